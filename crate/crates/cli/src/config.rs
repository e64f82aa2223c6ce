//! Run configuration: one TOML file maps onto [`RunConfig`]. Presets build
//! the same structure, and a config file given alongside a preset overrides
//! it key by key.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vibladder::curves::{
    load_tabulated, CurveKind, DipoleModel, EndCondition, HarmonicPotential, LennardJonesPotential,
    MorsePotential, PolynomialPotential, PotentialModel, TabulatedCurve,
};
use vibladder::dvr::{LifetimeConvention, RadialGrid, DEFAULT_THRESHOLD};
use vibladder::ga::GaConfig;
use vibladder::propagator::CapSpec;
use vibladder::pulse::{ChirpedPulseParams, ParamRanges};
use vibladder::reference::{self, Scenario};
use vibladder::units::krb_reduced_mass;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Preset this configuration started from, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
    pub initial_level: usize,
    pub target_level: usize,
    /// Descending level sequence from initial to target. Consecutive levels
    /// when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    pub grid: GridSpec,
    pub potential: PotentialSpec,
    pub dipole: DipoleSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<CapConfig>,
    #[serde(default)]
    pub eigensolve: EigensolveConfig,
    #[serde(default)]
    pub propagation: PropagationConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse: Option<ChirpedPulseParams>,
    #[serde(default)]
    pub ga: GaSection,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub n_points: usize,
    /// Nuclear reduced mass in electron masses; ³⁹K⁸⁷Rb when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduced_mass: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    Morse {
        well_depth: f64,
        equilibrium_distance: f64,
        width: f64,
    },
    LennardJones {
        well_depth: f64,
        equilibrium_distance: f64,
    },
    Harmonic {
        frequency: f64,
        center: f64,
    },
    Polynomial {
        center: f64,
        coefficients: Vec<f64>,
    },
    Tabulated {
        path: PathBuf,
        #[serde(default)]
        end_condition: EndCondition,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DipoleSpec {
    Damped {
        amplitude: f64,
        scale: f64,
        exponent: f64,
    },
    Constant {
        value: f64,
    },
    Linear {
        origin: f64,
        slope: f64,
    },
    Tabulated {
        path: PathBuf,
        #[serde(default)]
        end_condition: EndCondition,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapConfig {
    pub onset: f64,
    pub strength: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigensolveConfig {
    pub threshold: f64,
    pub lifetime_convention: LifetimeChoice,
    pub write_wavefunctions: bool,
}

impl Default for EigensolveConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            lifetime_convention: LifetimeChoice::TotalRate,
            write_wavefunctions: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LifetimeChoice {
    TotalRate,
    SumOfInverseRates,
}

impl From<LifetimeChoice> for LifetimeConvention {
    fn from(c: LifetimeChoice) -> Self {
        match c {
            LifetimeChoice::TotalRate => LifetimeConvention::TotalRate,
            LifetimeChoice::SumOfInverseRates => LifetimeConvention::SumOfInverseRates,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagationConfig {
    /// Fixed step in a.u.; chosen from the potential and pulse when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_step: Option<f64>,
    /// Halve the step until final populations settle (propagate only).
    pub converge: bool,
    pub tolerance: f64,
    pub max_halvings: usize,
    pub sample_stride: usize,
    /// Fixed end time in a.u.; τ₀ + 4τ of the pulse when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub end_time: Option<f64>,
    /// Levels written to the population file; all bound levels when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_levels: Option<Vec<usize>>,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            time_step: None,
            converge: true,
            tolerance: 1e-6,
            max_halvings: 6,
            sample_stride: 100,
            end_time: None,
            record_levels: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaSection {
    pub population_size: usize,
    pub generations: usize,
    pub elite_count: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub mutation_scale: f64,
    pub ranges: RangeChoice,
}

impl Default for GaSection {
    fn default() -> Self {
        let d = GaConfig::default();
        Self {
            population_size: d.population_size,
            generations: d.generations,
            elite_count: d.elite_count,
            crossover_prob: d.crossover_prob,
            mutation_prob: d.mutation_prob,
            mutation_scale: d.mutation_scale,
            ranges: RangeChoice::Heuristic,
        }
    }
}

impl GaSection {
    pub fn to_config(&self, seed: u64) -> GaConfig {
        GaConfig {
            population_size: self.population_size,
            generations: self.generations,
            elite_count: self.elite_count,
            crossover_prob: self.crossover_prob,
            mutation_prob: self.mutation_prob,
            mutation_scale: self.mutation_scale,
            seed,
        }
    }
}

/// Where the GA search box comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RangeChoice {
    /// Derived from the computed level structure.
    Heuristic,
    /// The published table for the preset scenario.
    Published,
    Explicit(ExplicitRanges),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitRanges {
    pub amplitude: [f64; 2],
    pub frequency: [f64; 2],
    pub center: [f64; 2],
    pub width: [f64; 2],
    pub chirp: [f64; 2],
}

impl ExplicitRanges {
    pub fn to_ranges(self) -> Result<ParamRanges, CliError> {
        let b = [
            self.amplitude,
            self.frequency,
            self.center,
            self.width,
            self.chirp,
        ]
        .map(|r| (r[0], r[1]));
        Ok(ParamRanges::new(b)?)
    }

    pub fn from_ranges(r: &ParamRanges) -> Self {
        let b = r.bounds().map(|g| [g.min, g.max]);
        Self {
            amplitude: b[0],
            frequency: b[1],
            center: b[2],
            width: b[3],
            chirp: b[4],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    /// Frequency window in a.u.; ω₀ ± 4σ when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
    pub points: usize,
    /// Also write the FFT power spectrum of the sampled field.
    pub fft: bool,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            omega_min: None,
            omega_max: None,
            points: 2001,
            fft: false,
        }
    }
}

impl RunConfig {
    /// Configuration of a published scenario on the stand-in curves at the
    /// full 5600-point resolution.
    pub fn preset(scenario: Scenario) -> Self {
        let grid = reference::full_grid();
        Self {
            scenario: Some(scenario),
            initial_level: scenario.initial_level(),
            target_level: scenario.target_level(),
            ladder: Some(scenario.ladder()),
            output_dir: None,
            seed: 0,
            grid: GridSpec {
                r_min: grid.r_min(),
                r_max: grid.r_max(),
                n_points: grid.n_points(),
                reduced_mass: None,
            },
            potential: PotentialSpec::LennardJones {
                well_depth: reference::STANDIN_WELL_DEPTH,
                equilibrium_distance: reference::STANDIN_EQUILIBRIUM,
            },
            dipole: DipoleSpec::Damped {
                amplitude: reference::STANDIN_DIPOLE_AMPLITUDE,
                scale: reference::STANDIN_DIPOLE_SCALE,
                exponent: reference::STANDIN_DIPOLE_EXPONENT,
            },
            cap: Some(CapConfig {
                onset: reference::CAP_ONSET,
                strength: reference::CAP_STRENGTH,
            }),
            eigensolve: EigensolveConfig::default(),
            propagation: PropagationConfig::default(),
            pulse: Some(scenario.published_optimum()),
            ga: GaSection::default(),
            spectrum: SpectrumConfig::default(),
        }
    }

    pub fn preset_by_name(name: &str) -> Result<Self, CliError> {
        Scenario::from_name(name).map(Self::preset).ok_or_else(|| {
            CliError::Config(format!(
                "unknown preset '{name}' (expected old20, old24, mld20 or mld24)"
            ))
        })
    }

    #[cfg(test)]
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads `path`, optionally layered over a preset. Relative curve paths
    /// are resolved against the file's directory.
    pub fn load(path: Option<&Path>, preset: Option<&str>) -> Result<Self, CliError> {
        let base = preset.map(Self::preset_by_name).transpose()?;
        let mut cfg = match (path, base) {
            (None, None) => {
                return Err(CliError::Config(
                    "either --config or --preset is required".into(),
                ))
            }
            (None, Some(base)) => base,
            (Some(path), base) => {
                let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                    path: path.to_path_buf(),
                    source,
                })?;
                let overlay: toml::Table = text.parse().map_err(|e: toml::de::Error| {
                    CliError::Config(format!("{}: {e}", path.display()))
                })?;
                let merged = match base {
                    Some(base) => {
                        let mut table = toml::Table::try_from(&base)
                            .map_err(|e| CliError::Config(e.to_string()))?;
                        merge_tables(&mut table, overlay);
                        table
                    }
                    None => overlay,
                };
                let mut cfg: Self = merged.try_into().map_err(|e: toml::de::Error| {
                    CliError::Config(format!("{}: {e}", path.display()))
                })?;
                if let Some(dir) = path.parent() {
                    cfg.resolve_paths(dir);
                }
                cfg
            }
        };
        cfg.validate()?;
        cfg.normalize();
        Ok(cfg)
    }

    fn resolve_paths(&mut self, dir: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        if let PotentialSpec::Tabulated { path, .. } = &mut self.potential {
            fix(path);
        }
        if let DipoleSpec::Tabulated { path, .. } = &mut self.dipole {
            fix(path);
        }
    }

    fn normalize(&mut self) {
        if self.ladder.is_none() {
            self.ladder = Some(self.consecutive_ladder());
        }
    }

    fn consecutive_ladder(&self) -> Vec<usize> {
        (self.target_level..=self.initial_level).rev().collect()
    }

    pub fn ladder(&self) -> Vec<usize> {
        self.ladder
            .clone()
            .unwrap_or_else(|| self.consecutive_ladder())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.initial_level <= self.target_level {
            return Err(CliError::Config(format!(
                "initial_level ({}) must be above target_level ({})",
                self.initial_level, self.target_level
            )));
        }
        if let Some(ladder) = &self.ladder {
            if ladder.first() != Some(&self.initial_level)
                || ladder.last() != Some(&self.target_level)
            {
                return Err(CliError::Config(format!(
                    "ladder must start at initial_level {} and end at target_level {}, got {ladder:?}",
                    self.initial_level, self.target_level
                )));
            }
            if ladder.windows(2).any(|w| w[1] >= w[0]) {
                return Err(CliError::Config(format!(
                    "ladder must strictly descend, got {ladder:?}"
                )));
            }
        }
        if self.propagation.sample_stride == 0 {
            return Err(CliError::Config(
                "propagation.sample_stride must be at least 1".into(),
            ));
        }
        if let Some(dt) = self.propagation.time_step {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(CliError::Config(format!(
                    "propagation.time_step must be positive, got {dt}"
                )));
            }
        }
        if self.spectrum.points < 2 {
            return Err(CliError::Config(
                "spectrum.points must be at least 2".into(),
            ));
        }
        self.grid()?;
        if let Some(cap) = self.cap {
            self.cap_spec()?;
            if cap.onset <= self.grid.r_min || cap.onset >= self.grid.r_max {
                return Err(CliError::Config(format!(
                    "cap.onset {} must lie inside the grid ({}, {})",
                    cap.onset, self.grid.r_min, self.grid.r_max
                )));
            }
        }
        if let Some(p) = &self.pulse {
            p.validate()?;
        }
        if let RangeChoice::Explicit(r) = &self.ga.ranges {
            r.to_ranges()?;
        }
        if self.ga.ranges == RangeChoice::Published && self.scenario.is_none() {
            return Err(CliError::Config(
                "ga.ranges = \"published\" needs a preset scenario".into(),
            ));
        }
        self.ga.to_config(self.seed).validate()?;
        Ok(())
    }

    pub fn grid(&self) -> Result<RadialGrid, CliError> {
        Ok(RadialGrid::new(
            self.grid.r_min,
            self.grid.r_max,
            self.grid.n_points,
            self.grid.reduced_mass.unwrap_or_else(krb_reduced_mass),
        )?)
    }

    pub fn potential_model(&self) -> Result<PotentialModel, CliError> {
        Ok(match &self.potential {
            PotentialSpec::Morse {
                well_depth,
                equilibrium_distance,
                width,
            } => PotentialModel::Morse(MorsePotential::new(
                *well_depth,
                *equilibrium_distance,
                *width,
            )?),
            PotentialSpec::LennardJones {
                well_depth,
                equilibrium_distance,
            } => PotentialModel::LennardJones(LennardJonesPotential::new(
                *well_depth,
                *equilibrium_distance,
            )?),
            PotentialSpec::Harmonic { frequency, center } => {
                PotentialModel::Harmonic(HarmonicPotential {
                    mass: self.grid()?.reduced_mass(),
                    frequency: *frequency,
                    center: *center,
                })
            }
            PotentialSpec::Polynomial {
                center,
                coefficients,
            } => PotentialModel::Polynomial(PolynomialPotential {
                center: *center,
                coefficients: coefficients.clone(),
            }),
            PotentialSpec::Tabulated {
                path,
                end_condition,
            } => PotentialModel::Tabulated(tabulated(path, CurveKind::Potential, *end_condition)?),
        })
    }

    pub fn dipole_model(&self) -> Result<DipoleModel, CliError> {
        Ok(match &self.dipole {
            DipoleSpec::Damped {
                amplitude,
                scale,
                exponent,
            } => DipoleModel::damped(*amplitude, *scale, *exponent)?,
            DipoleSpec::Constant { value } => DipoleModel::Constant(*value),
            DipoleSpec::Linear { origin, slope } => DipoleModel::Linear {
                origin: *origin,
                slope: *slope,
            },
            DipoleSpec::Tabulated {
                path,
                end_condition,
            } => DipoleModel::Tabulated(tabulated(path, CurveKind::Dipole, *end_condition)?),
        })
    }

    pub fn cap_spec(&self) -> Result<Option<CapSpec>, CliError> {
        self.cap
            .map(|c| CapSpec::new(c.onset, c.strength))
            .transpose()
            .map_err(Into::into)
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }
}

fn tabulated(path: &Path, kind: CurveKind, end: EndCondition) -> Result<TabulatedCurve, CliError> {
    let curve = load_tabulated(path, kind)?;
    Ok(TabulatedCurve::new(
        curve.nodes().to_vec(),
        curve.values().to_vec(),
        end,
    )?)
}

/// Recursively overlays `overlay` onto `base`. Tables merge; every other
/// value replaces. A tagged curve section whose `model` changes is replaced
/// whole so stale parameters of the old model do not leak through.
fn merge_tables(base: &mut toml::Table, overlay: toml::Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => {
                let model_changed = o.get("model").is_some_and(|m| b.get("model") != Some(m));
                if model_changed {
                    *b = o;
                } else {
                    merge_tables(b, o);
                }
            }
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_round_trip() {
        for s in Scenario::ALL {
            let cfg = RunConfig::preset(s);
            cfg.validate().unwrap();
            let back = RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
            assert_eq!(back, cfg);
        }
    }

    #[test]
    fn preset_records_section_iv_settings() {
        let cfg = RunConfig::preset(Scenario::Mld24);
        let cap = cfg.cap.unwrap();
        assert_eq!((cap.onset, cap.strength), (100.0, 5e-6));
        assert_eq!(cfg.grid.n_points, 5600);
        assert_eq!(cfg.grid.r_max - cfg.grid.r_min, 140.0);
        assert_eq!(cfg.ladder(), vec![24, 17, 13, 10]);
        let ga = cfg.ga.to_config(0);
        assert_eq!(
            (ga.population_size, ga.generations, ga.elite_count),
            (40, 10, 5)
        );
    }

    #[test]
    fn overlay_merges_sections() {
        let mut base = toml::Table::try_from(RunConfig::preset(Scenario::Old20)).unwrap();
        let overlay: toml::Table = "seed = 9\n[grid]\nn_points = 1024\n[potential]\nmodel = \"morse\"\nwell_depth = 1e-3\nequilibrium_distance = 11.0\nwidth = 0.5\n"
            .parse()
            .unwrap();
        merge_tables(&mut base, overlay);
        let cfg: RunConfig = base.try_into().unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.grid.n_points, 1024);
        assert_eq!(cfg.grid.r_min, 5.0);
        assert!(matches!(cfg.potential, PotentialSpec::Morse { .. }));
    }

    #[test]
    fn field_errors_name_the_field() {
        let mut text = RunConfig::preset(Scenario::Old20).to_toml().unwrap();
        text = text.replace("n_points = 5600", "n_points = \"many\"");
        let err = RunConfig::from_toml(&text).unwrap_err().to_string();
        assert!(err.contains("n_points"), "{err}");
        let unknown = RunConfig::preset(Scenario::Old20)
            .to_toml()
            .unwrap()
            .replace("[grid]", "[grid]\nspacing = 1.0");
        let err = RunConfig::from_toml(&unknown).unwrap_err().to_string();
        assert!(err.contains("spacing"), "{err}");
    }

    #[test]
    fn ladder_rules() {
        let mut cfg = RunConfig::preset(Scenario::Mld20);
        cfg.ladder = Some(vec![20, 16, 16, 10]);
        assert!(cfg.validate().is_err());
        cfg.ladder = Some(vec![19, 16, 10]);
        assert!(cfg.validate().is_err());
        cfg.ladder = None;
        cfg.validate().unwrap();
        assert_eq!(cfg.ladder().len(), 11);
        cfg.target_level = 20;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn explicit_ranges_parse() {
        let mut text = RunConfig::preset(Scenario::Old20).to_toml().unwrap();
        text = text.replace(
            "ranges = \"heuristic\"",
            "ranges = { explicit = { amplitude = [1e-3, 1e-2], frequency = [3.1e-5, 3.6e-5], center = [3.3e6, 3.5e7], width = [1e6, 1e7], chirp = [4e-13, 5e-12] } }",
        );
        let cfg = RunConfig::from_toml(&text).unwrap();
        let RangeChoice::Explicit(r) = cfg.ga.ranges else {
            panic!("not explicit")
        };
        assert_eq!(r.to_ranges().unwrap(), Scenario::Old20.published_ranges());
    }
}
