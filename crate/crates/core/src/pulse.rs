//! Linearly chirped Gaussian pulses and the search box the optimizer explores.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dvr::{SdmeMap, SpectrumError, VibrationalSpectrum};
use crate::units::AU_TIME_S;

/// Field amplitudes above this risk ionizing the molecule.
pub const AMPLITUDE_CEILING: f64 = 1e-2;

/// Ratio between the largest and smallest width in a heuristic range.
pub const WIDTH_SPAN: f64 = 10.0;

/// τ₀ range as multiples of the τ range: τ₀ ∈ [3.3 τ_min, 3.5 τ_max].
pub const CENTER_FACTORS: (f64, f64) = (3.3, 3.5);

/// Largest admissible ratio of pulse duration to radiative lifetime.
pub const LIFETIME_MARGIN: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum PulseError {
    #[error("invalid pulse parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid range for {gene}: [{min}, {max}]")]
    InvalidRange { gene: Gene, min: f64, max: f64 },
    #[error("invalid ladder: {0}")]
    InvalidLadder(String),
    #[error(
        "transition energies must increase down the ladder for a positive chirp, \
         but {prev} -> {next} hartree at rung {rung}"
    )]
    ChirpSign { rung: usize, prev: f64, next: f64 },
    #[error("heuristic range construction failed: {0}")]
    HeuristicFailure(String),
    #[error(
        "pulse duration {duration_s:e} s is not much shorter than the lifetime {lifetime_s:e} s"
    )]
    PulseTooLong { duration_s: f64, lifetime_s: f64 },
    #[error("empty frequency range [{min}, {max}]")]
    EmptyFrequencyRange { min: f64, max: f64 },
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

/// A time-dependent electric field ε(t) in atomic units.
pub trait ControlField: Sync {
    fn field(&self, t: f64) -> f64;
}

/// No field at all.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoField;

impl ControlField for NoField {
    fn field(&self, _t: f64) -> f64 {
        0.0
    }
}

/// Constant-envelope monochromatic field ε̄ cos(ωt).
#[derive(Debug, Clone, Copy)]
pub struct ContinuousWave {
    pub amplitude: f64,
    pub frequency: f64,
}

impl ControlField for ContinuousWave {
    fn field(&self, t: f64) -> f64 {
        self.amplitude * (self.frequency * t).cos()
    }
}

/// The five genes of a pulse chromosome, in chromosome order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gene {
    Amplitude,
    Frequency,
    Center,
    Width,
    Chirp,
}

impl Gene {
    pub const ALL: [Gene; 5] = [
        Gene::Amplitude,
        Gene::Frequency,
        Gene::Center,
        Gene::Width,
        Gene::Chirp,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Gene::Amplitude => "amplitude",
            Gene::Frequency => "frequency",
            Gene::Center => "center",
            Gene::Width => "width",
            Gene::Chirp => "chirp",
        }
    }
}

impl std::fmt::Display for Gene {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// ε(t) = ε₀ exp[−(t−τ₀)²/2τ²] cos[ω₀(t−τ₀) + ½C(t−τ₀)²].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChirpedPulseParams {
    /// ε₀, peak field amplitude.
    pub amplitude: f64,
    /// ω₀, central angular frequency.
    pub frequency: f64,
    /// τ₀, time of the envelope maximum.
    pub center: f64,
    /// τ, Gaussian width.
    pub width: f64,
    /// C, chirp rate dω/dt.
    pub chirp: f64,
}

impl ChirpedPulseParams {
    /// Validated constructor. A zero amplitude is accepted so the field can
    /// be switched off without changing its time grid.
    pub fn new(
        amplitude: f64,
        frequency: f64,
        center: f64,
        width: f64,
        chirp: f64,
    ) -> Result<Self, PulseError> {
        let p = Self {
            amplitude,
            frequency,
            center,
            width,
            chirp,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), PulseError> {
        let genes = self.genes();
        if let Some(g) = Gene::ALL.iter().find(|g| !genes[g.index()].is_finite()) {
            return Err(PulseError::InvalidParameter(format!("{g} is not finite")));
        }
        if self.amplitude < 0.0 {
            return Err(PulseError::InvalidParameter(format!(
                "amplitude must be non-negative, got {}",
                self.amplitude
            )));
        }
        for gene in [Gene::Frequency, Gene::Center, Gene::Width] {
            if genes[gene.index()] <= 0.0 {
                return Err(PulseError::InvalidParameter(format!(
                    "{gene} must be positive, got {}",
                    genes[gene.index()]
                )));
            }
        }
        Ok(())
    }

    /// (ε₀, ω₀, τ₀, τ, C).
    pub fn genes(&self) -> [f64; 5] {
        [
            self.amplitude,
            self.frequency,
            self.center,
            self.width,
            self.chirp,
        ]
    }

    pub fn from_genes(genes: [f64; 5]) -> Result<Self, PulseError> {
        Self::new(genes[0], genes[1], genes[2], genes[3], genes[4])
    }

    /// ω(t) = ω₀ + C(t − τ₀).
    pub fn instantaneous_frequency(&self, t: f64) -> f64 {
        self.frequency + self.chirp * (t - self.center)
    }

    /// Spectral bandwidth σ = 2√(2 ln 2) √(1/τ² + τ²C²).
    pub fn bandwidth(&self) -> f64 {
        let tau = self.width;
        2.0 * (2.0 * LN_2).sqrt() * (1.0 / (tau * tau) + tau * tau * self.chirp * self.chirp).sqrt()
    }

    /// Analytic optical spectrum
    /// I(ω) = √(τ⁴/(1 + C²τ⁴)) ε₀² exp[−(ω − ω₀)²/2σ²], σ the bandwidth.
    pub fn spectral_intensity(&self, omega: f64) -> f64 {
        let tau4 = self.width.powi(4);
        let sigma = self.bandwidth();
        let d = omega - self.frequency;
        (tau4 / (1.0 + self.chirp * self.chirp * tau4)).sqrt()
            * self.amplitude
            * self.amplitude
            * (-d * d / (2.0 * sigma * sigma)).exp()
    }

    /// Default propagation horizon τ₀ + 4τ.
    pub fn default_end_time(&self) -> f64 {
        self.center + 4.0 * self.width
    }
}

impl ControlField for ChirpedPulseParams {
    fn field(&self, t: f64) -> f64 {
        let s = t - self.center;
        let envelope = (-s * s / (2.0 * self.width * self.width)).exp();
        self.amplitude * envelope * (self.frequency * s + 0.5 * self.chirp * s * s).cos()
    }
}

/// Closed interval [min, max] for one gene.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneRange {
    pub min: f64,
    pub max: f64,
}

impl GeneRange {
    pub fn width(&self) -> f64 {
        self.max - self.min
    }

    pub fn clip(&self, x: f64) -> f64 {
        x.clamp(self.min, self.max)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.min && x <= self.max
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.min + self.max)
    }
}

/// Search box over the five genes. Every bound is positive, min < max, and
/// the amplitude never exceeds [`AMPLITUDE_CEILING`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamRanges {
    bounds: [GeneRange; 5],
}

impl ParamRanges {
    /// Bounds in chromosome order (ε₀, ω₀, τ₀, τ, C).
    pub fn new(bounds: [(f64, f64); 5]) -> Result<Self, PulseError> {
        let mut out = [GeneRange { min: 0.0, max: 0.0 }; 5];
        for (gene, (min, max)) in Gene::ALL.into_iter().zip(bounds) {
            if !(min.is_finite() && max.is_finite() && min > 0.0 && min < max) {
                return Err(PulseError::InvalidRange { gene, min, max });
            }
            out[gene.index()] = GeneRange { min, max };
        }
        let amp = out[Gene::Amplitude.index()];
        if amp.max > AMPLITUDE_CEILING * (1.0 + 1e-12) {
            return Err(PulseError::InvalidRange {
                gene: Gene::Amplitude,
                min: amp.min,
                max: amp.max,
            });
        }
        Ok(Self { bounds: out })
    }

    pub fn get(&self, gene: Gene) -> GeneRange {
        self.bounds[gene.index()]
    }

    pub fn bounds(&self) -> &[GeneRange; 5] {
        &self.bounds
    }

    pub fn clip(&self, genes: [f64; 5]) -> [f64; 5] {
        let mut out = genes;
        for (x, r) in out.iter_mut().zip(&self.bounds) {
            *x = r.clip(*x);
        }
        out
    }

    pub fn contains(&self, p: &ChirpedPulseParams) -> bool {
        p.genes()
            .iter()
            .zip(&self.bounds)
            .all(|(x, r)| r.contains(*x))
    }

    /// Genes of `p` that sit on a boundary of the box.
    pub fn genes_on_boundary(&self, p: &ChirpedPulseParams) -> Vec<Gene> {
        let genes = p.genes();
        Gene::ALL
            .into_iter()
            .filter(|g| {
                let r = self.get(*g);
                let x = genes[g.index()];
                x <= r.min || x >= r.max
            })
            .collect()
    }

    pub fn midpoint(&self) -> ChirpedPulseParams {
        ChirpedPulseParams {
            amplitude: self.bounds[0].midpoint(),
            frequency: self.bounds[1].midpoint(),
            center: self.bounds[2].midpoint(),
            width: self.bounds[3].midpoint(),
            chirp: self.bounds[4].midpoint(),
        }
    }
}

/// Transition data of a descending ladder i → … → f.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderTransitions {
    pub levels: Vec<usize>,
    /// E(levels[k]) − E(levels[k+1]).
    pub frequencies: Vec<f64>,
    /// |⟨levels[k]|D|levels[k+1]⟩|.
    pub couplings: Vec<f64>,
}

impl LadderTransitions {
    pub fn new(
        spectrum: &VibrationalSpectrum,
        sdme: &SdmeMap,
        ladder: &[usize],
    ) -> Result<Self, PulseError> {
        if ladder.len() < 2 {
            return Err(PulseError::InvalidLadder(format!(
                "need at least two levels, got {ladder:?}"
            )));
        }
        if let Some(w) = ladder.windows(2).find(|w| w[1] >= w[0]) {
            return Err(PulseError::InvalidLadder(format!(
                "levels must strictly descend, found {} then {}",
                w[0], w[1]
            )));
        }
        let mut frequencies = Vec::with_capacity(ladder.len() - 1);
        let mut couplings = Vec::with_capacity(ladder.len() - 1);
        for w in ladder.windows(2) {
            frequencies.push(spectrum.transition_frequency(w[0], w[1])?);
            couplings.push(sdme.transition_dipole(w[0], w[1]).abs());
        }
        Ok(Self {
            levels: ladder.to_vec(),
            frequencies,
            couplings,
        })
    }

    /// Δω = ω_last − ω_first.
    pub fn frequency_span(&self) -> f64 {
        self.frequencies[self.frequencies.len() - 1] - self.frequencies[0]
    }

    /// Fails unless every transition is strictly higher in energy than the
    /// one before it, which is what a positive chirp can follow.
    pub fn check_positive_chirp(&self) -> Result<(), PulseError> {
        for (rung, w) in self.frequencies.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(PulseError::ChirpSign {
                    rung: rung + 1,
                    prev: w[0],
                    next: w[1],
                });
            }
        }
        if self.frequencies.len() == 1 {
            return Err(PulseError::ChirpSign {
                rung: 0,
                prev: self.frequencies[0],
                next: self.frequencies[0],
            });
        }
        Ok(())
    }
}

/// Lower bound on τ from requiring the bandwidth with C = Δω/6τ to match Δω:
/// 8 ln 2 (1/τ² + Δω²/36) = Δω².
pub fn width_lower_bound(delta_omega: f64) -> f64 {
    1.0 / (delta_omega * (1.0 / (8.0 * LN_2) - 1.0 / 36.0).sqrt())
}

/// Heuristic search box plus the quantities it was derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicRanges {
    pub ranges: ParamRanges,
    pub transitions: LadderTransitions,
    pub delta_omega: f64,
    pub width_lower_bound: f64,
}

/// Derives the initial search box for a ladder from the level structure:
/// τ from the bandwidth condition, τ₀ ≈ 3τ, C ≈ Δω/6τ, ω₀ inside the band of
/// ladder transitions and ε₀ from Rabi periods T ~ 1/(ε̄|⟨υ|D|υ'⟩|)
/// commensurate with τ. The whole pulse must be much shorter than
/// `lifetime_s`, the radiative lifetime of the initial level in seconds.
pub fn heuristic_ranges(
    spectrum: &VibrationalSpectrum,
    sdme: &SdmeMap,
    ladder: &[usize],
    lifetime_s: f64,
) -> Result<HeuristicRanges, PulseError> {
    let transitions = LadderTransitions::new(spectrum, sdme, ladder)?;
    transitions.check_positive_chirp()?;
    let delta_omega = transitions.frequency_span();

    let tau_min = width_lower_bound(delta_omega);
    let tau_max = WIDTH_SPAN * tau_min;
    let center = (CENTER_FACTORS.0 * tau_min, CENTER_FACTORS.1 * tau_max);
    let chirp = (delta_omega / (6.0 * tau_max), delta_omega / (6.0 * tau_min));
    let omega_first = transitions.frequencies[0];
    let frequency = (omega_first, omega_first + delta_omega);

    let d_max = transitions.couplings.iter().cloned().fold(0.0, f64::max);
    let d_min = transitions
        .couplings
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if d_max <= 0.0 {
        return Err(PulseError::HeuristicFailure(
            "no ladder transition carries dipole coupling".into(),
        ));
    }
    let amp_low = 1.0 / (tau_max * d_max);
    let amp_high = (1.0 / (tau_min * d_min)).min(AMPLITUDE_CEILING);

    let duration_s = center.1 * AU_TIME_S;
    if !(duration_s <= LIFETIME_MARGIN * lifetime_s) {
        return Err(PulseError::PulseTooLong {
            duration_s,
            lifetime_s,
        });
    }

    let bounds = [
        (amp_low, amp_high),
        frequency,
        center,
        (tau_min, tau_max),
        chirp,
    ];
    for (gene, (min, max)) in Gene::ALL.into_iter().zip(bounds) {
        if !(min < max) {
            return Err(PulseError::HeuristicFailure(format!(
                "{gene} range collapsed to [{min:e}, {max:e}]"
            )));
        }
    }
    Ok(HeuristicRanges {
        ranges: ParamRanges::new(bounds)?,
        transitions,
        delta_omega,
        width_lower_bound: tau_min,
    })
}

/// Positive-frequency power spectrum |∫ε(t)e^{−iωt}dt|² of a field sampled
/// at `n` points t_k = t_start + k·dt, as (ω, power) pairs.
pub fn sampled_power_spectrum(
    field: &dyn ControlField,
    t_start: f64,
    dt: f64,
    n: usize,
) -> Vec<(f64, f64)> {
    let mut buffer: Vec<Complex64> = (0..n)
        .map(|k| Complex64::new(field.field(t_start + k as f64 * dt), 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buffer);
    let d_omega = 2.0 * PI / (n as f64 * dt);
    buffer
        .iter()
        .take(n / 2 + 1)
        .enumerate()
        .map(|(k, c)| (k as f64 * d_omega, (c * dt).norm_sqr()))
        .collect()
}

/// Location and full width at half maximum of the dominant peak of a
/// sampled spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPeak {
    pub location: f64,
    pub height: f64,
    pub half_max_width: f64,
}

pub fn spectral_peak(samples: &[(f64, f64)]) -> Option<SpectralPeak> {
    let (imax, &(w_peak, h_peak)) = samples
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))?;
    if h_peak <= 0.0 {
        return None;
    }
    // Parabolic refinement through the three samples around the maximum.
    let (location, height) = if imax > 0 && imax + 1 < samples.len() {
        let (y0, y1, y2) = (samples[imax - 1].1, h_peak, samples[imax + 1].1);
        let denom = y0 - 2.0 * y1 + y2;
        let step = samples[imax + 1].0 - w_peak;
        if denom < 0.0 {
            let shift = 0.5 * (y0 - y2) / denom;
            (w_peak + shift * step, y1 - 0.25 * (y0 - y2) * shift)
        } else {
            (w_peak, h_peak)
        }
    } else {
        (w_peak, h_peak)
    };
    let half = 0.5 * height;
    let crossing = |a: (f64, f64), b: (f64, f64)| a.0 + (half - a.1) * (b.0 - a.0) / (b.1 - a.1);
    let left = (1..=imax)
        .rev()
        .find(|&k| samples[k - 1].1 < half)
        .map(|k| crossing(samples[k - 1], samples[k]))?;
    let right = (imax..samples.len() - 1)
        .find(|&k| samples[k + 1].1 < half)
        .map(|k| crossing(samples[k], samples[k + 1]))?;
    Some(SpectralPeak {
        location,
        height,
        half_max_width: right - left,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_i_optimum() -> ChirpedPulseParams {
        ChirpedPulseParams::new(8.011e-3, 3.531e-5, 4.104e7, 9.798e6, 6.259e-13).unwrap()
    }

    #[test]
    fn field_at_center_is_peak_amplitude() {
        let p = table_i_optimum();
        assert_eq!(p.field(p.center), p.amplitude);
    }

    #[test]
    fn field_tail_is_negligible() {
        let p = table_i_optimum();
        for t in [p.center - 10.0 * p.width, p.center + 10.0 * p.width] {
            assert!(p.field(t).abs() < p.amplitude * 1e-21);
        }
    }

    #[test]
    fn field_one_width_after_center() {
        let p = ChirpedPulseParams::new(2e-3, 1e-4, 5e5, 1e5, 3e-11).unwrap();
        // ε₀ e^{−1/2} cos(ω₀τ + ½Cτ²) = 2e-3 · 0.6065306597126334 · cos(10 + 0.15)
        let expected = 2e-3 * 0.606_530_659_712_633_4 * (10.15f64).cos();
        assert!((p.field(6e5) - expected).abs() < 1e-15);
        assert!(
            (expected - (-9.077_970_603_424_793e-4)).abs() < 1e-15,
            "{expected}"
        );
    }

    #[test]
    fn instantaneous_frequency_is_linear() {
        let p = table_i_optimum();
        assert_eq!(p.instantaneous_frequency(p.center), p.frequency);
        let d = 1e5;
        for t in [0.0, 1e6, 5e7] {
            let slope = (p.instantaneous_frequency(t + d) - p.instantaneous_frequency(t)) / d;
            assert!((slope - p.chirp).abs() < 1e-9 * p.chirp);
        }
        // 3.531e-5 + 6.259e-13 · 9.798e6 = 4.1442...e-5
        let w = p.instantaneous_frequency(p.center + p.width);
        assert!((w - 4.144_256_82e-5).abs() < 1e-14, "{w}");
    }

    #[test]
    fn bandwidth_limits() {
        let mut p = table_i_optimum();
        let k = 2.0 * (2.0 * LN_2).sqrt();
        p.chirp = 0.0;
        assert!((p.bandwidth() - k / p.width).abs() < 1e-12 * p.bandwidth());
        // With C = Δω/6τ the bandwidth takes the 1/τ² + Δω²/36 form.
        let dw = 2.4e-5;
        p.chirp = dw / (6.0 * p.width);
        let reduced = k * (1.0 / p.width.powi(2) + dw * dw / 36.0).sqrt();
        assert!((p.bandwidth() - reduced).abs() < 1e-12 * reduced);
    }

    #[test]
    fn bandwidth_of_table_i_optimum() {
        // 2√(2 ln 2)·√(1/9.798e6² + 9.798e6²·6.259e-13²) by hand.
        let sigma = table_i_optimum().bandwidth();
        assert!((sigma - 1.444_309_43e-5).abs() < 1e-12, "{sigma}");
    }

    #[test]
    fn spectral_intensity_peak() {
        let p = table_i_optimum();
        let tau4 = p.width.powi(4);
        let peak = (tau4 / (1.0 + p.chirp.powi(2) * tau4)).sqrt() * p.amplitude.powi(2);
        assert_eq!(p.spectral_intensity(p.frequency), peak);
        assert!(p.spectral_intensity(p.frequency * 1.01) < peak);
        let mut q = p;
        q.chirp = 0.0;
        let limit = q.width.powi(2) * q.amplitude.powi(2);
        assert!((q.spectral_intensity(q.frequency) - limit).abs() < 1e-12 * limit);
    }

    #[test]
    fn doubling_amplitude_quadruples_intensity() {
        let p = table_i_optimum();
        let mut q = p;
        q.amplitude *= 2.0;
        for w in [2e-5, 3.5e-5, 5e-5] {
            let r = q.spectral_intensity(w) / p.spectral_intensity(w);
            assert!((r - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_invalid_pulses() {
        assert!(ChirpedPulseParams::new(-1e-3, 1e-4, 1e5, 1e4, 1e-12).is_err());
        assert!(ChirpedPulseParams::new(1e-3, 0.0, 1e5, 1e4, 1e-12).is_err());
        assert!(ChirpedPulseParams::new(1e-3, 1e-4, 1e5, 0.0, 1e-12).is_err());
        assert!(ChirpedPulseParams::new(1e-3, 1e-4, f64::NAN, 1e4, 1e-12).is_err());
        assert!(ChirpedPulseParams::new(0.0, 1e-4, 1e5, 1e4, 1e-12).is_ok());
    }

    #[test]
    fn ranges_validation() {
        let ok = [
            (1e-3, 1e-2),
            (3.1e-5, 3.6e-5),
            (3.3e6, 3.5e7),
            (1e6, 1e7),
            (4e-13, 5e-12),
        ];
        let r = ParamRanges::new(ok).unwrap();
        assert_eq!(r.get(Gene::Width).max, 1e7);
        let mut degenerate = ok;
        degenerate[3] = (1e6, 1e6);
        assert!(matches!(
            ParamRanges::new(degenerate),
            Err(PulseError::InvalidRange {
                gene: Gene::Width,
                ..
            })
        ));
        let mut too_strong = ok;
        too_strong[0] = (1e-3, 2e-2);
        assert!(ParamRanges::new(too_strong).is_err());
        let mut negative_chirp = ok;
        negative_chirp[4] = (-1e-12, 5e-12);
        assert!(ParamRanges::new(negative_chirp).is_err());
    }

    #[test]
    fn clipping_and_boundaries() {
        let r = ParamRanges::new([
            (1e-3, 1e-2),
            (3.1e-5, 3.6e-5),
            (3.3e6, 3.5e7),
            (1e6, 1e7),
            (4e-13, 5e-12),
        ])
        .unwrap();
        let p = ChirpedPulseParams::new(8.011e-3, 3.531e-5, 4.104e7, 9.798e6, 6.259e-13).unwrap();
        assert!(!r.contains(&p));
        let clipped = ChirpedPulseParams::from_genes(r.clip(p.genes())).unwrap();
        assert!(r.contains(&clipped));
        assert_eq!(clipped.center, 3.5e7);
        assert_eq!(r.genes_on_boundary(&clipped), vec![Gene::Center]);
    }

    #[test]
    fn width_bound_solves_bandwidth_condition() {
        let dw = 3.0e-5;
        let tau = width_lower_bound(dw);
        let p = ChirpedPulseParams::new(1e-3, 1e-4, 3.0 * tau, tau, dw / (6.0 * tau)).unwrap();
        assert!((p.bandwidth() - dw).abs() < 1e-12 * dw);
    }

    #[test]
    fn fft_spectrum_of_chirped_pulse() {
        // Intensity spectrum has std² = ½(1/τ² + τ²C²); the amplitude
        // spectrum is √2 wider, so its FWHM is the bandwidth.
        let p = ChirpedPulseParams::new(1e-3, 0.2, 400.0, 40.0, 2e-4).unwrap();
        let spec = sampled_power_spectrum(&p, 0.0, 0.5, 1 << 14);
        let peak = spectral_peak(&spec).unwrap();
        assert!((peak.location - p.frequency).abs() < 1e-3 * p.frequency);
        let fwhm_intensity = peak.half_max_width;
        let expected = p.bandwidth() / 2f64.sqrt();
        assert!(
            (fwhm_intensity - expected).abs() < 0.01 * expected,
            "{fwhm_intensity} vs {expected}"
        );
    }

    #[test]
    fn peak_finder_on_gaussian_samples() {
        let samples: Vec<(f64, f64)> = (0..400)
            .map(|k| {
                let w = k as f64 * 0.01;
                (w, (-(w - 2.003f64).powi(2) / (2.0 * 0.1f64.powi(2))).exp())
            })
            .collect();
        let peak = spectral_peak(&samples).unwrap();
        assert!((peak.location - 2.003).abs() < 1e-3);
        let fwhm = 2.0 * (2.0 * LN_2).sqrt() * 0.1;
        assert!((peak.half_max_width - fwhm).abs() < 1e-3);
    }
}
