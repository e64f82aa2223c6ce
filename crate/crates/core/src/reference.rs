//! Scenario data for vibrational ladder descent in triplet KRb: stand-in
//! curves, grid and absorber settings, ladders and the published pulse
//! tables kept as reference metadata.
//!
//! The published optima were obtained on ab initio curves that are not
//! shipped here, so the numbers below are reference points, not targets the
//! stand-in curves are expected to hit.

use serde::{Deserialize, Serialize};

use crate::curves::{DipoleModel, LennardJonesPotential, PotentialModel};
use crate::dvr::{RadialGrid, SpectrumError};
use crate::propagator::CapSpec;
use crate::pulse::{ChirpedPulseParams, ParamRanges};
use crate::units::krb_reduced_mass;

/// Well depth of the stand-in curve (hartree), calibrated to 30 bound
/// levels.
pub const STANDIN_WELL_DEPTH: f64 = 1.39e-3;
/// Equilibrium distance of the stand-in curve (bohr).
pub const STANDIN_EQUILIBRIUM: f64 = 11.0;
/// d₀ of the stand-in dipole (e·bohr), large enough that the skip-rung
/// couplings admit amplitudes below the ionization ceiling.
pub const STANDIN_DIPOLE_AMPLITUDE: f64 = 0.1;
/// R_d of the stand-in dipole (bohr).
pub const STANDIN_DIPOLE_SCALE: f64 = 12.0;
pub const STANDIN_DIPOLE_EXPONENT: f64 = 2.0;

pub const GRID_R_MIN: f64 = 5.0;
pub const GRID_R_MAX: f64 = 145.0;
/// Full-resolution grid: 140 bohr with 5600 points.
pub const GRID_POINTS: usize = 5600;
/// Reduced grid for desk-scale runs over the same interval.
pub const REDUCED_GRID_POINTS: usize = 1024;

pub const CAP_ONSET: f64 = 100.0;
pub const CAP_STRENGTH: f64 = 5e-6;

pub const BOUND_LEVELS: usize = 30;
pub const TARGET_LEVEL: usize = 10;

/// Lower bound on τ reported for i = 20, 24 on the ab initio curves (a.u.).
pub const PUBLISHED_WIDTH_BOUND: f64 = 3.17e5;
/// Radiative lifetime reported for the highest level (s).
pub const PUBLISHED_TOP_LIFETIME_S: f64 = 13.0;

pub fn standin_potential() -> PotentialModel {
    PotentialModel::LennardJones(
        LennardJonesPotential::new(STANDIN_WELL_DEPTH, STANDIN_EQUILIBRIUM)
            .expect("constants are valid"),
    )
}

pub fn standin_dipole() -> DipoleModel {
    DipoleModel::damped(
        STANDIN_DIPOLE_AMPLITUDE,
        STANDIN_DIPOLE_SCALE,
        STANDIN_DIPOLE_EXPONENT,
    )
    .expect("constants are valid")
}

pub fn full_grid() -> RadialGrid {
    RadialGrid::new(GRID_R_MIN, GRID_R_MAX, GRID_POINTS, krb_reduced_mass())
        .expect("constants are valid")
}

pub fn reduced_grid() -> RadialGrid {
    RadialGrid::new(
        GRID_R_MIN,
        GRID_R_MAX,
        REDUCED_GRID_POINTS,
        krb_reduced_mass(),
    )
    .expect("constants are valid")
}

pub fn grid_with_points(n_points: usize) -> Result<RadialGrid, SpectrumError> {
    RadialGrid::new(GRID_R_MIN, GRID_R_MAX, n_points, krb_reduced_mass())
}

pub fn standard_cap() -> CapSpec {
    CapSpec::new(CAP_ONSET, CAP_STRENGTH).expect("constants are valid")
}

/// Ladder-descent variant: one rung at a time or skipping rungs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    OneRung,
    MultiRung,
}

/// The four published scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Old20,
    Old24,
    Mld20,
    Mld24,
}

/// Published end-of-pulse populations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublishedOutcome {
    pub target_population: f64,
    pub bound_population: Option<f64>,
    pub duration_ns: Option<f64>,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::Old20,
        Scenario::Old24,
        Scenario::Mld20,
        Scenario::Mld24,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Old20 => "old20",
            Scenario::Old24 => "old24",
            Scenario::Mld20 => "mld20",
            Scenario::Mld24 => "mld24",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn scheme(self) -> Scheme {
        match self {
            Scenario::Old20 | Scenario::Old24 => Scheme::OneRung,
            Scenario::Mld20 | Scenario::Mld24 => Scheme::MultiRung,
        }
    }

    pub fn initial_level(self) -> usize {
        match self {
            Scenario::Old20 | Scenario::Mld20 => 20,
            Scenario::Old24 | Scenario::Mld24 => 24,
        }
    }

    pub fn target_level(self) -> usize {
        TARGET_LEVEL
    }

    pub fn ladder(self) -> Vec<usize> {
        match self {
            Scenario::Old20 => (TARGET_LEVEL..=20).rev().collect(),
            Scenario::Old24 => (TARGET_LEVEL..=24).rev().collect(),
            Scenario::Mld20 => vec![20, 16, 13, 10],
            Scenario::Mld24 => vec![24, 17, 13, 10],
        }
    }

    /// Published search box, in chromosome order (ε₀, ω₀, τ₀, τ, C).
    pub fn published_ranges(self) -> ParamRanges {
        let bounds = match self {
            Scenario::Old20 => [
                (1e-3, 1e-2),
                (3.1e-5, 3.6e-5),
                (3.3e6, 3.5e7),
                (1e6, 1e7),
                (4e-13, 5e-12),
            ],
            Scenario::Old24 => [
                (1e-3, 1e-2),
                (3.3e-5, 3.6e-5),
                (3.3e6, 3.5e7),
                (1e6, 1e7),
                (6e-13, 7e-12),
            ],
            Scenario::Mld20 => [
                (1e-3, 1e-2),
                (1e-4, 1.8e-4),
                (1e6, 1e7),
                (3.2e5, 3.2e6),
                (1.8e-12, 1.6e-11),
            ],
            Scenario::Mld24 => [
                (1e-3, 1e-2),
                (1.3e-4, 1.6e-4),
                (3.3e6, 3.5e7),
                (1e6, 1e7),
                (1e-13, 1e-12),
            ],
        };
        ParamRanges::new(bounds).expect("published ranges are valid")
    }

    /// Published optimal pulse.
    pub fn published_optimum(self) -> ChirpedPulseParams {
        let (amplitude, frequency, center, width, chirp) = match self {
            Scenario::Old20 => (8.011e-3, 3.531e-5, 4.104e7, 9.798e6, 6.259e-13),
            Scenario::Old24 => (9.168e-3, 3.723e-5, 3.723e7, 1.146e7, 7.300e-13),
            Scenario::Mld20 => (5.154e-3, 1.211e-4, 4.900e6, 1.489e6, 8.254e-12),
            Scenario::Mld24 => (5.720e-3, 1.378e-4, 4.835e6, 1.003e6, 5.832e-12),
        };
        ChirpedPulseParams {
            amplitude,
            frequency,
            center,
            width,
            chirp,
        }
    }

    /// Published transition energies of the multi-rung ladders (hartree).
    pub fn published_transitions(self) -> Option<[f64; 3]> {
        match self {
            Scenario::Mld20 => Some([1.068e-4, 1.110e-4, 1.378e-4]),
            Scenario::Mld24 => Some([1.372e-4, 1.423e-4, 1.430e-4]),
            _ => None,
        }
    }

    pub fn published_outcome(self) -> PublishedOutcome {
        match self {
            Scenario::Old20 => PublishedOutcome {
                target_population: 0.25,
                bound_population: Some(0.55),
                duration_ns: None,
            },
            Scenario::Old24 => PublishedOutcome {
                target_population: 0.05,
                bound_population: Some(0.45),
                duration_ns: None,
            },
            Scenario::Mld20 => PublishedOutcome {
                target_population: 0.30,
                bound_population: Some(0.40),
                duration_ns: None,
            },
            Scenario::Mld24 => PublishedOutcome {
                target_population: 0.48,
                bound_population: Some(0.52),
                duration_ns: Some(0.175),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::AU_TIME_S;

    #[test]
    fn names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(Scenario::from_name(s.name()), Some(s));
        }
        assert_eq!(Scenario::from_name("old21"), None);
    }

    #[test]
    fn ladders_descend_to_target() {
        for s in Scenario::ALL {
            let l = s.ladder();
            assert_eq!(l[0], s.initial_level());
            assert_eq!(*l.last().unwrap(), TARGET_LEVEL);
            assert!(l.windows(2).all(|w| w[1] < w[0]));
        }
        assert_eq!(Scenario::Old20.ladder().len(), 11);
    }

    #[test]
    fn published_transitions_increase() {
        for s in [Scenario::Mld20, Scenario::Mld24] {
            let t = s.published_transitions().unwrap();
            assert!(t[0] < t[1] && t[1] < t[2]);
        }
    }

    #[test]
    fn published_width_bound_in_picoseconds() {
        let ps = PUBLISHED_WIDTH_BOUND * AU_TIME_S * 1e12;
        assert!((ps - 7.7).abs() < 0.05, "{ps}");
    }

    #[test]
    fn grid_spacing_matches_resolution() {
        assert!((full_grid().spacing() - 140.0 / 5599.0).abs() < 1e-12);
        assert!(standard_cap().onset() < GRID_R_MAX);
    }

    #[test]
    fn some_published_optima_lie_outside_their_ranges() {
        let outside: Vec<_> = Scenario::ALL
            .into_iter()
            .filter(|s| !s.published_ranges().contains(&s.published_optimum()))
            .collect();
        assert_eq!(
            outside,
            vec![Scenario::Old20, Scenario::Old24, Scenario::Mld24]
        );
    }
}
