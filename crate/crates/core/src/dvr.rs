//! Bound vibrational states on a uniform radial grid.
//!
//! The Hamiltonian uses the Colbert-Miller discrete variable representation
//! for a uniform grid on an unbounded interval, which is diagonalized densely.
//! The resulting spectrum carries the dipole-coupling map and the radiative
//! rates derived from it.

use faer::{Mat, Side};
use thiserror::Error;

use crate::curves::{CurveError, DipoleModel, PotentialModel};
use crate::units::{AU_TIME_S, SPEED_OF_LIGHT};

/// Bound states are those below the dissociation limit of every shipped curve.
pub const DEFAULT_THRESHOLD: f64 = 0.0;

/// Sample values below this fraction of max|ψ| are ignored when reading the
/// sign structure of an eigenfunction.
const SIGN_FLOOR: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("invalid radial grid: {0}")]
    InvalidGrid(String),
    #[error("no bound states below {threshold} hartree")]
    NoBoundStates { threshold: f64 },
    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
    #[error("level {level} is not bound (bound count {bound_count})")]
    LevelOutOfRange { level: usize, bound_count: usize },
    #[error("transition {upper} -> {lower} must go from a higher to a lower level")]
    InvalidTransition { upper: usize, lower: usize },
    #[error("matrix has {rows} rows but the grid has {points} points")]
    DimensionMismatch { rows: usize, points: usize },
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Uniform grid R_k = R_min + kΔR together with the nuclear reduced mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    r_min: f64,
    r_max: f64,
    n_points: usize,
    reduced_mass: f64,
}

impl RadialGrid {
    pub fn new(
        r_min: f64,
        r_max: f64,
        n_points: usize,
        reduced_mass: f64,
    ) -> Result<Self, SpectrumError> {
        if n_points < 16 {
            return Err(SpectrumError::InvalidGrid(format!(
                "at least 16 points are required, got {n_points}"
            )));
        }
        if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) {
            return Err(SpectrumError::InvalidGrid(format!(
                "need 0 < R_min < R_max, got [{r_min}, {r_max}]"
            )));
        }
        if !(reduced_mass > 0.0 && reduced_mass.is_finite()) {
            return Err(SpectrumError::InvalidGrid(format!(
                "reduced mass must be positive, got {reduced_mass}"
            )));
        }
        Ok(Self {
            r_min,
            r_max,
            n_points,
            reduced_mass,
        })
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn reduced_mass(&self) -> f64 {
        self.reduced_mass
    }

    pub fn spacing(&self) -> f64 {
        (self.r_max - self.r_min) / (self.n_points - 1) as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        self.r_min + k as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.point(k)).collect()
    }

    /// Same interval and mass with a different number of points.
    pub fn with_points(&self, n_points: usize) -> Result<Self, SpectrumError> {
        Self::new(self.r_min, self.r_max, n_points, self.reduced_mass)
    }
}

/// Colbert-Miller kinetic matrix plus diagonal V(R_k). Exactly symmetric.
pub fn build_hamiltonian(
    grid: &RadialGrid,
    potential: &PotentialModel,
) -> Result<Mat<f64>, SpectrumError> {
    let potential = potential.sample(&grid.points())?;
    Ok(hamiltonian_from_samples(grid, &potential))
}

pub(crate) fn hamiltonian_from_samples(grid: &RadialGrid, potential: &[f64]) -> Mat<f64> {
    let n = grid.n_points();
    let dr = grid.spacing();
    let prefactor = 1.0 / (2.0 * grid.reduced_mass() * dr * dr);
    let diagonal = prefactor * std::f64::consts::PI.powi(2) / 3.0;
    Mat::from_fn(n, n, |i, j| {
        if i == j {
            diagonal + potential[i]
        } else {
            let d = i.abs_diff(j);
            let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
            sign * prefactor * 2.0 / (d * d) as f64
        }
    })
}

/// Bound eigenpairs of a grid Hamiltonian.
#[derive(Debug, Clone)]
pub struct VibrationalSpectrum {
    grid: RadialGrid,
    energies: Vec<f64>,
    wavefunctions: Vec<Vec<f64>>,
}

impl VibrationalSpectrum {
    /// Builds and diagonalizes the Hamiltonian in one go.
    pub fn compute(
        grid: &RadialGrid,
        potential: &PotentialModel,
        threshold: f64,
    ) -> Result<Self, SpectrumError> {
        let h = build_hamiltonian(grid, potential)?;
        solve_bound_states(&h, grid, threshold)
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn bound_count(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn energy(&self, level: usize) -> Result<f64, SpectrumError> {
        self.check_level(level)?;
        Ok(self.energies[level])
    }

    pub fn wavefunction(&self, level: usize) -> Result<&[f64], SpectrumError> {
        self.check_level(level)?;
        Ok(&self.wavefunctions[level])
    }

    pub fn wavefunctions(&self) -> &[Vec<f64>] {
        &self.wavefunctions
    }

    /// ω = E_upper − E_lower.
    pub fn transition_frequency(&self, upper: usize, lower: usize) -> Result<f64, SpectrumError> {
        Ok(self.energy(upper)? - self.energy(lower)?)
    }

    /// ΔR Σ ψ_a ψ_b.
    pub fn overlap(&self, a: usize, b: usize) -> Result<f64, SpectrumError> {
        let (pa, pb) = (self.wavefunction(a)?, self.wavefunction(b)?);
        Ok(self.grid.spacing() * pa.iter().zip(pb).map(|(x, y)| x * y).sum::<f64>())
    }

    /// Interior sign changes of ψ_level.
    pub fn node_count(&self, level: usize) -> Result<usize, SpectrumError> {
        Ok(count_sign_changes(self.wavefunction(level)?))
    }

    pub(crate) fn check_level(&self, level: usize) -> Result<(), SpectrumError> {
        if level < self.energies.len() {
            Ok(())
        } else {
            Err(SpectrumError::LevelOutOfRange {
                level,
                bound_count: self.energies.len(),
            })
        }
    }
}

/// Diagonalizes `h` and keeps every eigenpair below `threshold`, sorted
/// ascending. Eigenfunctions are normalized as ΔR Σ ψ² = 1 and signed so that
/// ψ is positive at its first extremum.
pub fn solve_bound_states(
    h: &Mat<f64>,
    grid: &RadialGrid,
    threshold: f64,
) -> Result<VibrationalSpectrum, SpectrumError> {
    let n = grid.n_points();
    if h.nrows() != n || h.ncols() != n {
        return Err(SpectrumError::DimensionMismatch {
            rows: h.nrows(),
            points: n,
        });
    }
    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| SpectrumError::Eigensolver(format!("{e:?}")))?;
    let values = evd.S().column_vector();
    let vectors = evd.U();

    let mut bound: Vec<(f64, usize)> = (0..n)
        .map(|k| (values[k], k))
        .filter(|(e, _)| *e < threshold)
        .collect();
    if bound.is_empty() {
        return Err(SpectrumError::NoBoundStates { threshold });
    }
    bound.sort_by(|a, b| a.0.total_cmp(&b.0));

    let dr = grid.spacing();
    let mut energies = Vec::with_capacity(bound.len());
    let mut wavefunctions = Vec::with_capacity(bound.len());
    for (energy, col) in bound {
        let mut psi: Vec<f64> = (0..n).map(|k| vectors[(k, col)]).collect();
        let norm = (dr * psi.iter().map(|x| x * x).sum::<f64>()).sqrt();
        let sign = first_extremum_sign(&psi);
        let scale = sign / norm;
        psi.iter_mut().for_each(|x| *x *= scale);
        energies.push(energy);
        wavefunctions.push(psi);
    }
    Ok(VibrationalSpectrum {
        grid: *grid,
        energies,
        wavefunctions,
    })
}

fn first_extremum_sign(psi: &[f64]) -> f64 {
    let peak = psi.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let floor = SIGN_FLOOR * peak;
    let start = psi.iter().position(|x| x.abs() > floor).unwrap_or(0);
    // Climb the first lobe until |ψ| stops growing.
    let mut k = start;
    while k + 1 < psi.len()
        && psi[k + 1].abs() >= psi[k].abs()
        && psi[k + 1].signum() == psi[k].signum()
    {
        k += 1;
    }
    if psi[k] < 0.0 {
        -1.0
    } else {
        1.0
    }
}

fn count_sign_changes(psi: &[f64]) -> usize {
    let peak = psi.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let floor = SIGN_FLOOR * peak;
    let mut last = 0.0f64;
    let mut changes = 0;
    for &x in psi.iter().filter(|x| x.abs() > floor) {
        if last != 0.0 && x.signum() != last {
            changes += 1;
        }
        last = x.signum();
    }
    changes
}

/// Transition dipoles ⟨υ|D|υ'⟩ between all bound levels; the squared
/// entries form the SDME map D_{υ,υ'}.
#[derive(Debug, Clone)]
pub struct SdmeMap {
    dim: usize,
    dipoles: Vec<f64>,
}

impl SdmeMap {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Signed ⟨a|D|b⟩ in e·bohr.
    pub fn transition_dipole(&self, a: usize, b: usize) -> f64 {
        self.dipoles[a * self.dim + b]
    }

    /// |⟨a|D|b⟩|² in (e·bohr)².
    pub fn sdme(&self, a: usize, b: usize) -> f64 {
        self.transition_dipole(a, b).powi(2)
    }

    /// Row-major dense SDME matrix.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|a| (0..self.dim).map(|b| self.sdme(a, b)).collect())
            .collect()
    }
}

/// Grid quadrature of ⟨υ|D|υ'⟩ for every pair of bound levels.
pub fn sdme_map(
    spectrum: &VibrationalSpectrum,
    dipole: &DipoleModel,
) -> Result<SdmeMap, SpectrumError> {
    let samples = dipole.sample(&spectrum.grid().points())?;
    Ok(sdme_from_samples(spectrum, &samples))
}

pub(crate) fn sdme_from_samples(spectrum: &VibrationalSpectrum, dipole: &[f64]) -> SdmeMap {
    let dim = spectrum.bound_count();
    let dr = spectrum.grid().spacing();
    let psi = spectrum.wavefunctions();
    let mut dipoles = vec![0.0; dim * dim];
    for a in 0..dim {
        let weighted: Vec<f64> = psi[a].iter().zip(dipole).map(|(p, d)| p * d).collect();
        for b in a..dim {
            let value = dr
                * weighted
                    .iter()
                    .zip(&psi[b])
                    .map(|(w, p)| w * p)
                    .sum::<f64>();
            dipoles[a * dim + b] = value;
            dipoles[b * dim + a] = value;
        }
    }
    SdmeMap { dim, dipoles }
}

/// Spontaneous-emission rate A_{upper→lower} in s⁻¹:
/// A = (4/3) ω³ |⟨upper|D|lower⟩|² / c³ in atomic units.
pub fn einstein_rate(
    spectrum: &VibrationalSpectrum,
    sdme: &SdmeMap,
    upper: usize,
    lower: usize,
) -> Result<f64, SpectrumError> {
    if upper <= lower {
        return Err(SpectrumError::InvalidTransition { upper, lower });
    }
    let omega = spectrum.transition_frequency(upper, lower)?;
    Ok(einstein_rate_au(omega, sdme.sdme(upper, lower)) / AU_TIME_S)
}

pub(crate) fn einstein_rate_au(omega: f64, squared_dipole: f64) -> f64 {
    4.0 / 3.0 * omega.powi(3) * squared_dipole / SPEED_OF_LIGHT.powi(3)
}

/// How parallel decay channels combine into a lifetime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LifetimeConvention {
    /// τ = 1 / Σ A, the physical radiative lifetime.
    #[default]
    TotalRate,
    /// τ = Σ 1/A, kept for comparison with published values computed that way.
    SumOfInverseRates,
}

/// Radiative lifetime of `level` in seconds. A level with no open decay
/// channel has an infinite lifetime.
pub fn lifetime(
    spectrum: &VibrationalSpectrum,
    sdme: &SdmeMap,
    level: usize,
    convention: LifetimeConvention,
) -> Result<f64, SpectrumError> {
    spectrum.check_level(level)?;
    if level == 0 {
        return Err(SpectrumError::InvalidTransition { upper: 0, lower: 0 });
    }
    let rates = (0..level)
        .map(|lower| einstein_rate(spectrum, sdme, level, lower))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(match convention {
        LifetimeConvention::TotalRate => {
            let total: f64 = rates.iter().sum();
            if total > 0.0 {
                1.0 / total
            } else {
                f64::INFINITY
            }
        }
        LifetimeConvention::SumOfInverseRates => rates.iter().map(|a| 1.0 / a).sum(),
    })
}
