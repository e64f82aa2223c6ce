//! Split-operator propagation of a radial wavepacket in a time-dependent
//! dipole field.
//!
//! One step applies e^{−iTδt/2} e^{−iW(t̄)δt} e^{−iTδt/2} with
//! W(t̄) = V + ε(t̄)D + V_A and t̄ the step midpoint. The kinetic factors are
//! diagonal in momentum space; between recorded samples adjacent half steps
//! are merged into one full kinetic step.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::curves::{CurveError, DipoleModel, PotentialModel};
use crate::dvr::{RadialGrid, SpectrumError, VibrationalSpectrum};
use crate::pulse::ControlField;
use crate::units::au_time_to_ns;

/// Phase budget per step on the populated energy window.
pub const STEP_PHASE_BUDGET: f64 = 0.1;

/// Steps between finiteness checks when no sample is due.
const BLOWUP_CHECK_INTERVAL: usize = 1024;

#[derive(Debug, Error)]
pub enum PropagationError {
    #[error("invalid time step {0}")]
    InvalidTimeStep(f64),
    #[error("a negative time step is only allowed without an absorbing potential")]
    BackwardWithCap,
    #[error("invalid absorbing potential: {0}")]
    InvalidCap(String),
    #[error("invalid propagation window: {0}")]
    InvalidWindow(String),
    #[error("{what} has {found} points but the grid has {expected}")]
    GridMismatch {
        what: &'static str,
        found: usize,
        expected: usize,
    },
    #[error("wavefunction became non-finite at step {step}")]
    NumericalBlowup { step: usize },
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

/// Complex absorbing potential V_A(R) = −iη(R − R₀)² for R > R₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapSpec {
    onset: f64,
    strength: f64,
}

impl CapSpec {
    pub fn new(onset: f64, strength: f64) -> Result<Self, PropagationError> {
        if !(strength > 0.0 && strength.is_finite()) {
            return Err(PropagationError::InvalidCap(format!(
                "strength must be positive, got {strength}"
            )));
        }
        if !onset.is_finite() {
            return Err(PropagationError::InvalidCap(format!(
                "onset must be finite, got {onset}"
            )));
        }
        Ok(Self { onset, strength })
    }

    pub fn onset(&self) -> f64 {
        self.onset
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn value(&self, r: f64) -> Complex64 {
        if r <= self.onset {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, -self.strength * (r - self.onset).powi(2))
        }
    }

    fn check_grid(&self, grid: &RadialGrid) -> Result<(), PropagationError> {
        if self.onset <= grid.r_min() || self.onset >= grid.r_max() {
            return Err(PropagationError::InvalidCap(format!(
                "onset {} lies outside the grid ({}, {})",
                self.onset,
                grid.r_min(),
                grid.r_max()
            )));
        }
        Ok(())
    }
}

/// Ψ(R_k) on the propagation grid at time `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavefunctionState {
    pub values: Vec<Complex64>,
    pub time: f64,
}

impl WavefunctionState {
    pub fn from_real(values: &[f64], time: f64) -> Self {
        Self {
            values: values.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            time,
        }
    }

    /// Bound eigenstate `level` of `spectrum` at t = 0.
    pub fn eigenstate(
        spectrum: &VibrationalSpectrum,
        level: usize,
    ) -> Result<Self, PropagationError> {
        Ok(Self::from_real(spectrum.wavefunction(level)?, 0.0))
    }

    /// N = ΔR Σ|Ψ|².
    pub fn norm(&self, spacing: f64) -> f64 {
        spacing * self.values.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// ⟨φ|Ψ⟩ = ΔR Σ φ(R_k) Ψ(R_k) for a real φ.
    pub fn overlap_real(&self, phi: &[f64], spacing: f64) -> Complex64 {
        let sum: Complex64 = phi.iter().zip(&self.values).map(|(p, c)| c * p).sum();
        sum * spacing
    }

    /// ⟨φ|Ψ⟩ for a complex φ.
    pub fn overlap(&self, phi: &WavefunctionState, spacing: f64) -> Complex64 {
        let sum: Complex64 = phi
            .values
            .iter()
            .zip(&self.values)
            .map(|(p, c)| p.conj() * c)
            .sum();
        sum * spacing
    }

    /// Squared distance ΔR Σ|Ψ − Φ|².
    pub fn distance_sqr(&self, other: &WavefunctionState, spacing: f64) -> f64 {
        spacing
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
    }
}

/// Level populations p_υ = |⟨υ|Ψ⟩|² plus the bookkeeping around them.
#[derive(Debug, Clone, PartialEq)]
pub struct Populations {
    pub levels: Vec<f64>,
    pub bound_total: f64,
    pub norm: f64,
    /// 1 − N(t).
    pub dissociation: f64,
}

pub fn populations(
    state: &WavefunctionState,
    spectrum: &VibrationalSpectrum,
) -> Result<Populations, PropagationError> {
    let grid = spectrum.grid();
    if state.values.len() != grid.n_points() {
        return Err(PropagationError::GridMismatch {
            what: "wavefunction",
            found: state.values.len(),
            expected: grid.n_points(),
        });
    }
    let dr = grid.spacing();
    let levels: Vec<f64> = spectrum
        .wavefunctions()
        .iter()
        .map(|phi| state.overlap_real(phi, dr).norm_sqr())
        .collect();
    let norm = state.norm(dr);
    Ok(Populations {
        bound_total: levels.iter().sum(),
        levels,
        norm,
        dissociation: 1.0 - norm,
    })
}

/// Observables sampled along a propagation.
#[derive(Debug, Clone)]
pub struct PropagationRecord {
    pub times: Vec<f64>,
    pub field: Vec<f64>,
    /// populations[sample][level].
    pub populations: Vec<Vec<f64>>,
    pub bound_total: Vec<f64>,
    pub norm: Vec<f64>,
    pub dissociation: Vec<f64>,
    pub steps: usize,
    pub final_state: WavefunctionState,
}

impl PropagationRecord {
    pub fn sample_count(&self) -> usize {
        self.times.len()
    }

    pub fn times_ns(&self) -> Vec<f64> {
        self.times.iter().map(|&t| au_time_to_ns(t)).collect()
    }

    /// p_υ(t) over all samples.
    pub fn level_trace(&self, level: usize) -> Vec<f64> {
        self.populations
            .iter()
            .map(|p| p.get(level).copied().unwrap_or(0.0))
            .collect()
    }

    pub fn final_populations(&self) -> &[f64] {
        self.populations.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// Time at which p_υ(t) peaks.
    pub fn peak_time(&self, level: usize) -> Option<f64> {
        let trace = self.level_trace(level);
        let (k, _) = trace.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
        Some(self.times[k])
    }
}

/// Propagator for one grid, potential, dipole, absorber and time step. It
/// holds no per-run state and can be shared across threads.
pub struct SplitOperator {
    grid: RadialGrid,
    dt: f64,
    dipole: Vec<f64>,
    potential_factor: Vec<Complex64>,
    half_kinetic: Vec<Complex64>,
    full_kinetic: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    cap: Option<CapSpec>,
}

impl std::fmt::Debug for SplitOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SplitOperator")
            .field("grid", &self.grid)
            .field("dt", &self.dt)
            .field("cap", &self.cap)
            .finish_non_exhaustive()
    }
}

/// k_j = 2πj/(NΔR) with j wrapped to [−N/2, N/2).
pub fn momentum_grid(n: usize, spacing: f64) -> Vec<f64> {
    let dk = 2.0 * std::f64::consts::PI / (n as f64 * spacing);
    (0..n)
        .map(|j| {
            let j = if j < n.div_ceil(2) {
                j as f64
            } else {
                j as f64 - n as f64
            };
            j * dk
        })
        .collect()
}

impl SplitOperator {
    pub fn new(
        grid: &RadialGrid,
        potential: &[f64],
        dipole: &[f64],
        cap: Option<CapSpec>,
        dt: f64,
    ) -> Result<Self, PropagationError> {
        let n = grid.n_points();
        for (what, len) in [("potential", potential.len()), ("dipole", dipole.len())] {
            if len != n {
                return Err(PropagationError::GridMismatch {
                    what,
                    found: len,
                    expected: n,
                });
            }
        }
        if !(dt.is_finite() && dt != 0.0) {
            return Err(PropagationError::InvalidTimeStep(dt));
        }
        if let Some(cap) = &cap {
            cap.check_grid(grid)?;
            if dt < 0.0 {
                return Err(PropagationError::BackwardWithCap);
            }
        }
        let potential_factor = grid
            .points()
            .iter()
            .zip(potential)
            .map(|(&r, &v)| {
                let w =
                    Complex64::new(v, 0.0) + cap.map_or(Complex64::new(0.0, 0.0), |c| c.value(r));
                (Complex64::new(0.0, -dt) * w).exp()
            })
            .collect();
        let inv_n = 1.0 / n as f64;
        let mass = grid.reduced_mass();
        let kinetic: Vec<f64> = momentum_grid(n, grid.spacing())
            .iter()
            .map(|k| k * k / (2.0 * mass))
            .collect();
        let half_kinetic = kinetic
            .iter()
            .map(|t| Complex64::cis(-t * dt / 2.0) * inv_n)
            .collect();
        let full_kinetic = kinetic
            .iter()
            .map(|t| Complex64::cis(-t * dt) * inv_n)
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            grid: *grid,
            dt,
            dipole: dipole.to_vec(),
            potential_factor,
            half_kinetic,
            full_kinetic,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            cap,
        })
    }

    pub fn from_models(
        grid: &RadialGrid,
        potential: &PotentialModel,
        dipole: &DipoleModel,
        cap: Option<CapSpec>,
        dt: f64,
    ) -> Result<Self, PropagationError> {
        let points = grid.points();
        Self::new(
            grid,
            &potential.sample(&points)?,
            &dipole.sample(&points)?,
            cap,
            dt,
        )
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn time_step(&self) -> f64 {
        self.dt
    }

    pub fn cap(&self) -> Option<CapSpec> {
        self.cap
    }

    fn scratch(&self) -> Vec<Complex64> {
        vec![
            Complex64::new(0.0, 0.0);
            self.forward
                .get_inplace_scratch_len()
                .max(self.inverse.get_inplace_scratch_len())
        ]
    }

    fn kinetic(&self, psi: &mut [Complex64], factor: &[Complex64], scratch: &mut [Complex64]) {
        self.forward.process_with_scratch(psi, scratch);
        psi.iter_mut().zip(factor).for_each(|(c, f)| *c *= f);
        self.inverse.process_with_scratch(psi, scratch);
    }

    fn potential(&self, psi: &mut [Complex64], field: f64) {
        let phase = -field * self.dt;
        for ((c, p), d) in psi.iter_mut().zip(&self.potential_factor).zip(&self.dipole) {
            *c *= p * Complex64::cis(phase * d);
        }
    }

    fn check_len(&self, state: &WavefunctionState) -> Result<(), PropagationError> {
        if state.values.len() != self.grid.n_points() {
            return Err(PropagationError::GridMismatch {
                what: "wavefunction",
                found: state.values.len(),
                expected: self.grid.n_points(),
            });
        }
        Ok(())
    }

    /// One symmetric step from `state.time` to `state.time + δt`.
    pub fn step(
        &self,
        state: &mut WavefunctionState,
        field: &dyn ControlField,
    ) -> Result<(), PropagationError> {
        self.check_len(state)?;
        let mut scratch = self.scratch();
        let eps = field.field(state.time + 0.5 * self.dt);
        self.kinetic(&mut state.values, &self.half_kinetic, &mut scratch);
        self.potential(&mut state.values, eps);
        self.kinetic(&mut state.values, &self.half_kinetic, &mut scratch);
        state.time += self.dt;
        Ok(())
    }

    /// Number of steps needed to reach `t_end` from `t_start`.
    pub fn step_count(&self, t_start: f64, t_end: f64) -> Result<usize, PropagationError> {
        let ratio = (t_end - t_start) / self.dt;
        if !(ratio.is_finite() && ratio > 0.0) {
            return Err(PropagationError::InvalidWindow(format!(
                "cannot reach t = {t_end} from t = {t_start} with δt = {}",
                self.dt
            )));
        }
        // Absorb roundoff in ratios that are integers in exact arithmetic.
        Ok((ratio * (1.0 - 1e-12)).ceil() as usize)
    }

    /// Advances `state` until its time reaches `t_end`, calling `observe`
    /// after step 0 (the initial state), every `stride` steps and after the
    /// final step.
    fn run<F>(
        &self,
        state: &mut WavefunctionState,
        field: &dyn ControlField,
        t_end: f64,
        stride: usize,
        mut observe: F,
    ) -> Result<usize, PropagationError>
    where
        F: FnMut(&WavefunctionState, usize) -> Result<(), PropagationError>,
    {
        self.check_len(state)?;
        let steps = self.step_count(state.time, t_end)?;
        let stride = stride.max(1);
        let t0 = state.time;
        let mut scratch = self.scratch();
        observe(state, 0)?;

        // `open` means a half kinetic step has been applied but its closing
        // half has not.
        let mut open = false;
        for n in 0..steps {
            if !open {
                self.kinetic(&mut state.values, &self.half_kinetic, &mut scratch);
            }
            let t_mid = t0 + (n as f64 + 0.5) * self.dt;
            self.potential(&mut state.values, field.field(t_mid));
            state.time = t0 + (n + 1) as f64 * self.dt;
            let done = n + 1;
            let sample = done % stride == 0 || done == steps;
            if sample {
                self.kinetic(&mut state.values, &self.half_kinetic, &mut scratch);
                open = false;
                if !state
                    .values
                    .iter()
                    .all(|c| c.re.is_finite() && c.im.is_finite())
                {
                    return Err(PropagationError::NumericalBlowup { step: done });
                }
                observe(state, done)?;
            } else {
                self.kinetic(&mut state.values, &self.full_kinetic, &mut scratch);
                open = true;
                if done % BLOWUP_CHECK_INTERVAL == 0 && !state.values[0].re.is_finite() {
                    return Err(PropagationError::NumericalBlowup { step: done });
                }
            }
        }
        Ok(steps)
    }

    /// Propagates to `t_end` and returns only the final state.
    pub fn propagate_state(
        &self,
        initial: &WavefunctionState,
        field: &dyn ControlField,
        t_end: f64,
    ) -> Result<WavefunctionState, PropagationError> {
        let mut state = initial.clone();
        self.run(&mut state, field, t_end, usize::MAX, |_, _| Ok(()))?;
        Ok(state)
    }

    /// Propagates to `t_end`, recording populations of every bound level of
    /// `spectrum` every `stride` steps. The record holds
    /// ⌈steps/stride⌉ + 1 samples.
    pub fn propagate(
        &self,
        initial: &WavefunctionState,
        field: &dyn ControlField,
        spectrum: &VibrationalSpectrum,
        t_end: f64,
        stride: usize,
    ) -> Result<PropagationRecord, PropagationError> {
        let sgrid = spectrum.grid();
        if sgrid.n_points() != self.grid.n_points()
            || (sgrid.spacing() - self.grid.spacing()).abs() > 1e-12 * self.grid.spacing()
        {
            return Err(PropagationError::GridMismatch {
                what: "spectrum",
                found: sgrid.n_points(),
                expected: self.grid.n_points(),
            });
        }
        let mut state = initial.clone();
        let mut record = PropagationRecord {
            times: Vec::new(),
            field: Vec::new(),
            populations: Vec::new(),
            bound_total: Vec::new(),
            norm: Vec::new(),
            dissociation: Vec::new(),
            steps: 0,
            final_state: initial.clone(),
        };
        let steps = self.run(&mut state, field, t_end, stride, |s, step| {
            let p = populations(s, spectrum)?;
            if !p.norm.is_finite() || p.levels.iter().any(|x| !x.is_finite()) {
                return Err(PropagationError::NumericalBlowup { step });
            }
            record.times.push(s.time);
            record.field.push(field.field(s.time));
            record.populations.push(p.levels);
            record.bound_total.push(p.bound_total);
            record.norm.push(p.norm);
            record.dissociation.push(p.dissociation);
            Ok(())
        })?;
        record.steps = steps;
        record.final_state = state;
        Ok(record)
    }
}

/// Default time step: the phase accumulated per step over the populated
/// energy window, set by the well depth and the highest field frequency,
/// stays within [`STEP_PHASE_BUDGET`].
pub fn default_time_step(potential: &[f64], max_field_frequency: f64) -> f64 {
    let well = potential.iter().cloned().fold(0.0f64, f64::min).abs();
    let scale = well.max(max_field_frequency.abs());
    if scale > 0.0 {
        STEP_PHASE_BUDGET / scale
    } else {
        STEP_PHASE_BUDGET
    }
}

/// Halves `dt` until the final populations returned by `run` change by less
/// than `tolerance` (max-norm) between successive halvings, at most
/// `max_halvings` times. Returns the accepted step and its populations.
pub fn converge_time_step<F>(
    mut dt: f64,
    tolerance: f64,
    max_halvings: usize,
    mut run: F,
) -> Result<(f64, Vec<f64>), PropagationError>
where
    F: FnMut(f64) -> Result<Vec<f64>, PropagationError>,
{
    let mut previous = run(dt)?;
    for _ in 0..max_halvings {
        let next = run(dt / 2.0)?;
        let change = previous
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if change < tolerance {
            return Ok((dt, previous));
        }
        dt /= 2.0;
        previous = next;
    }
    log::warn!("time step not converged to {tolerance} after {max_halvings} halvings; using {dt}");
    Ok((dt, previous))
}
