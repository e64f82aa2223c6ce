use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use vibladder::curves::{DipoleModel, PotentialModel};
use vibladder::dvr::{einstein_rate, lifetime, sdme_map, RadialGrid, SdmeMap, VibrationalSpectrum};
use vibladder::ga::{optimize, GaOutcome, GaussianSurrogate};
use vibladder::problem::{EndTime, LadderProblem};
use vibladder::propagator::{
    converge_time_step, default_time_step, populations, PropagationRecord, SplitOperator,
    WavefunctionState,
};
use vibladder::pulse::{
    heuristic_ranges, sampled_power_spectrum, spectral_peak, ChirpedPulseParams, Gene,
    HeuristicRanges, ParamRanges, PulseError,
};
use vibladder::reference;
use vibladder::units::{au_frequency_to_hz, au_frequency_to_rad_per_s, au_time_to_ns, AU_TIME_S};

use crate::config::{ExplicitRanges, RangeChoice, RunConfig};
use crate::error::CliError;
use crate::output::RunDir;

/// Curves, grid and bound-state data shared by every command.
struct Model {
    grid: RadialGrid,
    potential: PotentialModel,
    dipole: DipoleModel,
    potential_samples: Vec<f64>,
    spectrum: VibrationalSpectrum,
    sdme: SdmeMap,
}

impl Model {
    fn build(cfg: &RunConfig) -> Result<Self, CliError> {
        let grid = cfg.grid()?;
        let potential = cfg.potential_model()?;
        let dipole = cfg.dipole_model()?;
        let potential_samples = potential.sample(&grid.points())?;
        let started = Instant::now();
        let spectrum = VibrationalSpectrum::compute(&grid, &potential, cfg.eigensolve.threshold)?;
        log::info!(
            "{} bound levels on {} points in {:.2} s",
            spectrum.bound_count(),
            grid.n_points(),
            started.elapsed().as_secs_f64()
        );
        let sdme = sdme_map(&spectrum, &dipole)?;
        for level in [cfg.initial_level, cfg.target_level] {
            spectrum.wavefunction(level)?;
        }
        Ok(Self {
            grid,
            potential,
            dipole,
            potential_samples,
            spectrum,
            sdme,
        })
    }

    fn lifetime_s(&self, cfg: &RunConfig, level: usize) -> Result<f64, CliError> {
        Ok(lifetime(
            &self.spectrum,
            &self.sdme,
            level,
            cfg.eigensolve.lifetime_convention.into(),
        )?)
    }

    fn heuristic(&self, cfg: &RunConfig) -> Result<HeuristicRanges, CliError> {
        let tau = self.lifetime_s(cfg, cfg.initial_level)?;
        Ok(heuristic_ranges(
            &self.spectrum,
            &self.sdme,
            &cfg.ladder(),
            tau,
        )?)
    }

    fn propagator(&self, cfg: &RunConfig, dt: f64) -> Result<SplitOperator, CliError> {
        Ok(SplitOperator::from_models(
            &self.grid,
            &self.potential,
            &self.dipole,
            cfg.cap_spec()?,
            dt,
        )?)
    }
}

/// Highest instantaneous field frequency over [0, t_end].
fn field_frequency_ceiling(pulse: &ChirpedPulseParams, t_end: f64) -> f64 {
    pulse
        .instantaneous_frequency(0.0)
        .abs()
        .max(pulse.instantaneous_frequency(t_end).abs())
}

fn end_time(cfg: &RunConfig, pulse: &ChirpedPulseParams) -> f64 {
    cfg.propagation
        .end_time
        .unwrap_or_else(|| pulse.default_end_time())
}

fn load_pulse(cfg: &RunConfig, path: Option<&Path>) -> Result<ChirpedPulseParams, CliError> {
    let pulse = match path {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            toml::from_str::<ChirpedPulseParams>(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => cfg
            .pulse
            .ok_or_else(|| CliError::Config("no [pulse] section and no --pulse file".into()))?,
    };
    pulse.validate()?;
    Ok(pulse)
}

fn level_header(prefix: &str, levels: &[usize]) -> Vec<String> {
    levels.iter().map(|l| format!("{prefix}{l}")).collect()
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

#[derive(Serialize)]
struct EigensolveSummary {
    bound_count: usize,
    n_points: usize,
    spacing: f64,
    reduced_mass: f64,
    ground_energy: f64,
    top_energy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    top_lifetime_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cap_onset: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cap_strength: Option<f64>,
    ladder: Vec<usize>,
    ladder_frequencies: Vec<f64>,
    ladder_couplings: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    heuristic: Option<HeuristicSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    heuristic_error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference: Option<ReferenceValues>,
}

#[derive(Serialize)]
struct HeuristicSummary {
    delta_omega: f64,
    width_lower_bound: f64,
    width_lower_bound_ps: f64,
    ranges: ExplicitRanges,
}

impl HeuristicSummary {
    fn new(h: &HeuristicRanges) -> Self {
        Self {
            delta_omega: h.delta_omega,
            width_lower_bound: h.width_lower_bound,
            width_lower_bound_ps: h.width_lower_bound * AU_TIME_S * 1e12,
            ranges: ExplicitRanges::from_ranges(&h.ranges),
        }
    }
}

#[derive(Serialize)]
struct ReferenceValues {
    published_width_bound: f64,
    published_top_lifetime_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    published_transitions: Option<[f64; 3]>,
    published_target_population: f64,
}

pub fn eigensolve(cfg: &RunConfig, out: &RunDir) -> Result<(), CliError> {
    let model = Model::build(cfg)?;
    let spectrum = &model.spectrum;
    let n = spectrum.bound_count();

    let energy_rows = (0..n)
        .map(|v| {
            Ok(vec![
                v as f64,
                spectrum.energies()[v],
                spectrum.node_count(v)? as f64,
            ])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    out.write_csv(
        "energies.csv",
        &header(&["level", "energy", "nodes"]),
        energy_rows,
    )?;

    let convention = cfg.eigensolve.lifetime_convention.into();
    let mut lifetime_rows = Vec::new();
    for v in 1..n {
        let total: f64 = (0..v)
            .map(|l| einstein_rate(spectrum, &model.sdme, v, l))
            .sum::<Result<f64, _>>()?;
        let tau = lifetime(spectrum, &model.sdme, v, convention)?;
        lifetime_rows.push(vec![v as f64, tau, total]);
    }
    out.write_csv(
        "lifetimes.csv",
        &header(&["level", "lifetime_s", "total_rate_per_s"]),
        lifetime_rows,
    )?;

    let mut names = vec!["level".to_string()];
    names.extend(level_header("sdme_", &(0..n).collect::<Vec<_>>()));
    let sdme_rows = model.sdme.rows().into_iter().enumerate().map(|(a, row)| {
        let mut r = vec![a as f64];
        r.extend(row);
        r
    });
    out.write_csv("sdme.csv", &names, sdme_rows)?;

    if cfg.eigensolve.write_wavefunctions {
        let psi = spectrum.wavefunctions();
        let mut names = vec!["r".to_string()];
        names.extend((0..n).map(|v| format!("psi_{v}")));
        let rows = (0..model.grid.n_points()).map(|k| {
            let mut row = vec![model.grid.point(k)];
            row.extend(psi.iter().map(|p| p[k]));
            row
        });
        out.write_csv("wavefunctions.csv", &names, rows)?;
    }

    let ladder = cfg.ladder();
    let frequencies = ladder
        .windows(2)
        .map(|w| spectrum.transition_frequency(w[0], w[1]))
        .collect::<Result<Vec<_>, _>>()?;
    let couplings = ladder
        .windows(2)
        .map(|w| model.sdme.transition_dipole(w[0], w[1]).abs())
        .collect();
    let (heuristic, heuristic_error) = match model.heuristic(cfg) {
        Ok(h) => (Some(HeuristicSummary::new(&h)), None),
        Err(e) => {
            log::warn!("heuristic ranges unavailable: {e}");
            (None, Some(e.to_string()))
        }
    };
    let summary = EigensolveSummary {
        bound_count: n,
        n_points: model.grid.n_points(),
        spacing: model.grid.spacing(),
        reduced_mass: model.grid.reduced_mass(),
        ground_energy: spectrum.energies()[0],
        top_energy: spectrum.energies()[n - 1],
        top_lifetime_s: (n > 1).then(|| model.lifetime_s(cfg, n - 1)).transpose()?,
        cap_onset: cfg.cap.map(|c| c.onset),
        cap_strength: cfg.cap.map(|c| c.strength),
        ladder,
        ladder_frequencies: frequencies,
        ladder_couplings: couplings,
        heuristic,
        heuristic_error,
        reference: cfg.scenario.map(|s| ReferenceValues {
            published_width_bound: reference::PUBLISHED_WIDTH_BOUND,
            published_top_lifetime_s: reference::PUBLISHED_TOP_LIFETIME_S,
            published_transitions: s.published_transitions(),
            published_target_population: s.published_outcome().target_population,
        }),
    };
    out.write_toml("summary.toml", &summary)?;
    println!(
        "{n} bound levels; ground {:e} Eh, top {:e} Eh",
        summary.ground_energy, summary.top_energy
    );
    Ok(())
}

#[derive(Serialize)]
struct PropagateSummary {
    time_step: f64,
    time_step_converged: bool,
    steps: usize,
    end_time: f64,
    end_time_ns: f64,
    initial_level: usize,
    target_level: usize,
    initial_population: f64,
    target_population: f64,
    bound_total: f64,
    norm: f64,
    dissociation: f64,
    /// Time of maximum population for each ladder level, in a.u.
    peak_times: BTreeMap<String, f64>,
    wall_time_s: f64,
    pulse: ChirpedPulseParams,
}

fn write_populations(
    out: &RunDir,
    name: &str,
    record: &PropagationRecord,
    levels: &[usize],
) -> Result<(), CliError> {
    let mut names = header(&["t_au", "t_ns", "field"]);
    names.extend(level_header("p_", levels));
    names.extend(header(&["bound_total", "norm", "dissociation"]));
    let rows = (0..record.sample_count()).map(|i| {
        let t = record.times[i];
        let mut row = vec![t, au_time_to_ns(t), record.field[i]];
        row.extend(levels.iter().map(|&l| record.populations[i][l]));
        row.extend([
            record.bound_total[i],
            record.norm[i],
            record.dissociation[i],
        ]);
        row
    });
    out.write_csv(name, &names, rows)?;
    Ok(())
}

fn recorded_levels(
    cfg: &RunConfig,
    spectrum: &VibrationalSpectrum,
) -> Result<Vec<usize>, CliError> {
    match &cfg.propagation.record_levels {
        Some(levels) => {
            for &l in levels {
                spectrum.wavefunction(l)?;
            }
            Ok(levels.clone())
        }
        None => Ok((0..spectrum.bound_count()).collect()),
    }
}

fn peak_times(record: &PropagationRecord, ladder: &[usize]) -> BTreeMap<String, f64> {
    ladder
        .iter()
        .filter_map(|&l| record.peak_time(l).map(|t| (format!("level_{l}"), t)))
        .collect()
}

pub fn propagate(cfg: &RunConfig, pulse_path: Option<&Path>, out: &RunDir) -> Result<(), CliError> {
    let pulse = load_pulse(cfg, pulse_path)?;
    let model = Model::build(cfg)?;
    let t_end = end_time(cfg, &pulse);
    let initial = WavefunctionState::eigenstate(&model.spectrum, cfg.initial_level)?;
    let started = Instant::now();

    let (dt, converged) = match cfg.propagation.time_step {
        Some(dt) if !cfg.propagation.converge => (dt, false),
        fixed => {
            let start = fixed.unwrap_or_else(|| {
                default_time_step(
                    &model.potential_samples,
                    field_frequency_ceiling(&pulse, t_end),
                )
            });
            if cfg.propagation.converge {
                let cap = cfg.cap_spec()?;
                let (dt, _) = converge_time_step(
                    start,
                    cfg.propagation.tolerance,
                    cfg.propagation.max_halvings,
                    |dt| {
                        let prop = SplitOperator::from_models(
                            &model.grid,
                            &model.potential,
                            &model.dipole,
                            cap,
                            dt,
                        )?;
                        let end = prop.propagate_state(&initial, &pulse, t_end)?;
                        Ok(populations(&end, &model.spectrum)?.levels)
                    },
                )?;
                (dt, true)
            } else {
                (start, false)
            }
        }
    };
    log::info!("time step {dt} a.u.");

    let prop = model.propagator(cfg, dt)?;
    let record = prop.propagate(
        &initial,
        &pulse,
        &model.spectrum,
        t_end,
        cfg.propagation.sample_stride,
    )?;
    let levels = recorded_levels(cfg, &model.spectrum)?;
    write_populations(out, "populations.csv", &record, &levels)?;

    let last = record.sample_count() - 1;
    let summary = PropagateSummary {
        time_step: dt,
        time_step_converged: converged,
        steps: record.steps,
        end_time: t_end,
        end_time_ns: au_time_to_ns(t_end),
        initial_level: cfg.initial_level,
        target_level: cfg.target_level,
        initial_population: record.populations[last][cfg.initial_level],
        target_population: record.populations[last][cfg.target_level],
        bound_total: record.bound_total[last],
        norm: record.norm[last],
        dissociation: record.dissociation[last],
        peak_times: peak_times(&record, &cfg.ladder()),
        wall_time_s: started.elapsed().as_secs_f64(),
        pulse,
    };
    out.write_toml("summary.toml", &summary)?;
    println!(
        "p_{} = {:.6}, p_{} = {:.6}, bound {:.6}, norm {:.6} ({} steps of {dt} a.u., {:.1} s)",
        cfg.initial_level,
        summary.initial_population,
        cfg.target_level,
        summary.target_population,
        summary.bound_total,
        summary.norm,
        record.steps,
        summary.wall_time_s
    );
    Ok(())
}

#[derive(Serialize)]
struct OptimizeSummary {
    surrogate: bool,
    best_fitness: f64,
    evaluations: usize,
    generations: usize,
    population_size: usize,
    seed: u64,
    genes_on_boundary: Vec<Gene>,
    ranges: ExplicitRanges,
    #[serde(skip_serializing_if = "Option::is_none")]
    time_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    best_populations: Option<BestPopulations>,
}

#[derive(Serialize)]
struct BestPopulations {
    initial_population: f64,
    target_population: f64,
    bound_total: f64,
    norm: f64,
    peak_times: BTreeMap<String, f64>,
}

fn write_history(out: &RunDir, outcome: &GaOutcome) -> Result<(), CliError> {
    let mut names = header(&[
        "generation",
        "best",
        "mean",
        "min",
        "evaluations",
        "failures",
        "uniform_fallback",
    ]);
    names.extend(Gene::ALL.iter().map(|g| format!("best_{}", g.name())));
    let rows = outcome.history.generations.iter().map(|g| {
        let mut row = vec![
            g.generation as f64,
            g.best,
            g.mean,
            g.min,
            g.evaluations as f64,
            g.failures as f64,
            if g.uniform_fallback { 1.0 } else { 0.0 },
        ];
        row.extend(g.best_chromosome.genes());
        row
    });
    out.write_csv("history.csv", &names, rows)?;
    Ok(())
}

fn fixed_ranges(cfg: &RunConfig) -> Option<Result<ParamRanges, CliError>> {
    match &cfg.ga.ranges {
        RangeChoice::Heuristic => None,
        RangeChoice::Published => Some(
            cfg.scenario
                .map(|s| s.published_ranges())
                .ok_or_else(|| CliError::Config("published ranges need a preset scenario".into())),
        ),
        RangeChoice::Explicit(r) => Some(r.to_ranges()),
    }
}

pub fn optimize_command(cfg: &RunConfig, surrogate: bool, out: &RunDir) -> Result<(), CliError> {
    let ga = cfg.ga.to_config(cfg.seed);
    let started = Instant::now();
    if surrogate {
        let ranges = match fixed_ranges(cfg) {
            Some(r) => r?,
            None => Model::build(cfg)?.heuristic(cfg)?.ranges,
        };
        let problem = GaussianSurrogate::new(ranges);
        let outcome = optimize(&ga, &ranges, &problem)?;
        return finish_optimize(cfg, out, &outcome, &ranges, true, None, None, started);
    }

    let model = Model::build(cfg)?;
    let ranges = match fixed_ranges(cfg) {
        Some(r) => r?,
        None => model.heuristic(cfg)?.ranges,
    };
    let dt = cfg.propagation.time_step.unwrap_or_else(|| {
        let f = ranges.get(Gene::Frequency).max;
        default_time_step(&model.potential_samples, f)
    });
    log::info!("time step {dt} a.u.");
    let end = cfg
        .propagation
        .end_time
        .map_or(EndTime::PulseDefault, EndTime::Fixed);
    let prop = model.propagator(cfg, dt)?;
    let problem = LadderProblem::new(model.spectrum, prop, cfg.initial_level, cfg.target_level)?
        .with_end_time(end);
    let outcome = optimize(&ga, &ranges, &problem)?;

    let record = problem.simulate(&outcome.best.chromosome, cfg.propagation.sample_stride)?;
    let levels = recorded_levels(cfg, problem.spectrum())?;
    write_populations(out, "best_populations.csv", &record, &levels)?;
    let last = record.sample_count() - 1;
    let best = BestPopulations {
        initial_population: record.populations[last][cfg.initial_level],
        target_population: record.populations[last][cfg.target_level],
        bound_total: record.bound_total[last],
        norm: record.norm[last],
        peak_times: peak_times(&record, &cfg.ladder()),
    };
    finish_optimize(
        cfg,
        out,
        &outcome,
        &ranges,
        false,
        Some(dt),
        Some(best),
        started,
    )
}

#[allow(clippy::too_many_arguments)]
fn finish_optimize(
    cfg: &RunConfig,
    out: &RunDir,
    outcome: &GaOutcome,
    ranges: &ParamRanges,
    surrogate: bool,
    time_step: Option<f64>,
    best_populations: Option<BestPopulations>,
    started: Instant,
) -> Result<(), CliError> {
    write_history(out, outcome)?;
    out.write_toml("best_pulse.toml", &outcome.best.chromosome)?;
    let summary = OptimizeSummary {
        surrogate,
        best_fitness: outcome.best.score(),
        evaluations: outcome.history.evaluations(),
        generations: outcome.history.generations.len(),
        population_size: cfg.ga.population_size,
        seed: cfg.seed,
        genes_on_boundary: ranges.genes_on_boundary(&outcome.best.chromosome),
        ranges: ExplicitRanges::from_ranges(ranges),
        time_step,
        best_populations,
    };
    out.write_toml("summary.toml", &summary)?;
    println!(
        "best J = {:.6} after {} evaluations ({:.1} s)",
        summary.best_fitness,
        summary.evaluations,
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

#[derive(Serialize)]
struct SpectrumSummary {
    omega_min: f64,
    omega_max: f64,
    bandwidth: f64,
    analytic_peak: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    fft: Option<FftSummary>,
    pulse: ChirpedPulseParams,
}

#[derive(Serialize)]
struct FftSummary {
    peak: f64,
    peak_relative_offset: f64,
    half_max_width: f64,
    /// Expected intensity FWHM of a chirped Gaussian, σ/√2.
    expected_half_max_width: f64,
    time_step: f64,
    samples: usize,
}

pub fn pulse_spectrum(
    cfg: &RunConfig,
    pulse_path: Option<&Path>,
    omega_min: Option<f64>,
    omega_max: Option<f64>,
    out: &RunDir,
) -> Result<(), CliError> {
    let pulse = load_pulse(cfg, pulse_path)?;
    let sigma = pulse.bandwidth();
    let lo = omega_min
        .or(cfg.spectrum.omega_min)
        .unwrap_or((pulse.frequency - 4.0 * sigma).max(0.0));
    let hi = omega_max
        .or(cfg.spectrum.omega_max)
        .unwrap_or(pulse.frequency + 4.0 * sigma);
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
        return Err(PulseError::EmptyFrequencyRange { min: lo, max: hi }.into());
    }
    let n = cfg.spectrum.points;
    let mut omegas: Vec<f64> = (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect();
    // The carrier always gets its own row when it lies in the window.
    if let Err(at) = omegas.binary_search_by(|w| w.total_cmp(&pulse.frequency)) {
        if at > 0 && at < omegas.len() {
            omegas.insert(at, pulse.frequency);
        }
    }
    let rows = omegas.iter().map(|&w| {
        vec![
            w,
            au_frequency_to_rad_per_s(w),
            au_frequency_to_hz(w),
            pulse.spectral_intensity(w),
        ]
    });
    out.write_csv(
        "spectrum.csv",
        &header(&["omega_au", "omega_rad_s", "nu_hz", "intensity"]),
        rows,
    )?;

    let fft = if cfg.spectrum.fft {
        let t_end = end_time(cfg, &pulse);
        let w_top = field_frequency_ceiling(&pulse, t_end).max(hi);
        // Eight samples per shortest period, padded fourfold for resolution.
        let dt = 2.0 * PI / (8.0 * w_top);
        let samples = (4.0 * t_end / dt).ceil() as usize;
        let power = sampled_power_spectrum(&pulse, 0.0, dt, samples);
        let window: Vec<(f64, f64)> = power
            .into_iter()
            .filter(|(w, _)| *w >= lo && *w <= hi)
            .collect();
        out.write_csv(
            "fft_spectrum.csv",
            &header(&["omega_au", "omega_rad_s", "nu_hz", "power"]),
            window
                .iter()
                .map(|&(w, p)| vec![w, au_frequency_to_rad_per_s(w), au_frequency_to_hz(w), p]),
        )?;
        spectral_peak(&window).map(|peak| FftSummary {
            peak: peak.location,
            peak_relative_offset: (peak.location - pulse.frequency) / pulse.frequency,
            half_max_width: peak.half_max_width,
            expected_half_max_width: sigma / 2f64.sqrt(),
            time_step: dt,
            samples,
        })
    } else {
        None
    };

    let summary = SpectrumSummary {
        omega_min: lo,
        omega_max: hi,
        bandwidth: sigma,
        analytic_peak: pulse.frequency,
        fft,
        pulse,
    };
    out.write_toml("summary.toml", &summary)?;
    println!("bandwidth {sigma:e} a.u. over [{lo:e}, {hi:e}]");
    Ok(())
}
