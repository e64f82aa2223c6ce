//! Ladder-descent control problem: start in level i, score a pulse by the
//! population it leaves in level f.

use crate::dvr::VibrationalSpectrum;
use crate::propagator::{PropagationError, PropagationRecord, SplitOperator, WavefunctionState};
use crate::pulse::ChirpedPulseParams;

/// Something the optimizer can score. Implementations must be
/// deterministic: the same pulse always yields the same fitness.
pub trait FitnessProblem: Sync {
    type Error: std::fmt::Display;

    /// Fitness J in [0, 1].
    fn fitness(&self, pulse: &ChirpedPulseParams) -> Result<f64, Self::Error>;
}

/// How long each candidate pulse is propagated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EndTime {
    /// τ₀ + 4τ of the pulse being scored.
    PulseDefault,
    Fixed(f64),
}

pub struct LadderProblem {
    spectrum: VibrationalSpectrum,
    propagator: SplitOperator,
    initial_level: usize,
    target_level: usize,
    end_time: EndTime,
}

impl LadderProblem {
    pub fn new(
        spectrum: VibrationalSpectrum,
        propagator: SplitOperator,
        initial_level: usize,
        target_level: usize,
    ) -> Result<Self, PropagationError> {
        spectrum.wavefunction(initial_level)?;
        spectrum.wavefunction(target_level)?;
        let (a, b) = (spectrum.grid(), propagator.grid());
        if a.n_points() != b.n_points() {
            return Err(PropagationError::GridMismatch {
                what: "spectrum",
                found: a.n_points(),
                expected: b.n_points(),
            });
        }
        Ok(Self {
            spectrum,
            propagator,
            initial_level,
            target_level,
            end_time: EndTime::PulseDefault,
        })
    }

    pub fn with_end_time(mut self, end_time: EndTime) -> Self {
        self.end_time = end_time;
        self
    }

    pub fn spectrum(&self) -> &VibrationalSpectrum {
        &self.spectrum
    }

    pub fn propagator(&self) -> &SplitOperator {
        &self.propagator
    }

    pub fn initial_level(&self) -> usize {
        self.initial_level
    }

    pub fn target_level(&self) -> usize {
        self.target_level
    }

    pub fn end_time(&self, pulse: &ChirpedPulseParams) -> f64 {
        match self.end_time {
            EndTime::PulseDefault => pulse.default_end_time(),
            EndTime::Fixed(t) => t,
        }
    }

    fn initial_state(&self) -> Result<WavefunctionState, PropagationError> {
        WavefunctionState::eigenstate(&self.spectrum, self.initial_level)
    }

    /// Full propagation record for one pulse.
    pub fn simulate(
        &self,
        pulse: &ChirpedPulseParams,
        stride: usize,
    ) -> Result<PropagationRecord, PropagationError> {
        self.propagator.propagate(
            &self.initial_state()?,
            pulse,
            &self.spectrum,
            self.end_time(pulse),
            stride,
        )
    }

    /// J = |⟨f|Ψ(t_max)⟩|².
    pub fn target_population(&self, pulse: &ChirpedPulseParams) -> Result<f64, PropagationError> {
        let end =
            self.propagator
                .propagate_state(&self.initial_state()?, pulse, self.end_time(pulse))?;
        let phi = self.spectrum.wavefunction(self.target_level)?;
        let j = end
            .overlap_real(phi, self.spectrum.grid().spacing())
            .norm_sqr();
        if !j.is_finite() {
            return Err(PropagationError::NumericalBlowup {
                step: self.propagator.step_count(0.0, self.end_time(pulse))?,
            });
        }
        Ok(j)
    }
}

impl FitnessProblem for LadderProblem {
    type Error = PropagationError;

    fn fitness(&self, pulse: &ChirpedPulseParams) -> Result<f64, PropagationError> {
        self.target_population(pulse)
    }
}
