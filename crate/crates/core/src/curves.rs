//! Potential-energy and dipole curves of a diatomic electronic state.
//!
//! Analytic models cover the built-in stand-in molecule and the textbook
//! test systems; [`TabulatedCurve`] lets users supply curves sampled on a
//! radial grid. All curves are immutable once built.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CurveError {
    #[error("invalid curve parameter: {0}")]
    InvalidParameter(String),
    #[error("R = {r} bohr lies outside the tabulated range [{min}, {max}]")]
    OutOfRange { r: f64, min: f64, max: f64 },
    #[error("curve evaluated at R = {0} bohr, which is outside its physical domain")]
    InvalidDistance(f64),
    #[error("{path}:{line}: cannot parse `{token}` as a number")]
    Parse {
        path: String,
        line: usize,
        token: String,
    },
    #[error("{path}: {reason}")]
    Format { path: String, reason: String },
    #[error("{path}: at least 4 data rows are required, found {found}")]
    InsufficientData { path: String, found: usize },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn require_positive(name: &str, value: f64) -> Result<(), CurveError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(CurveError::InvalidParameter(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

/// V(R) = De (1 − e^{−a(R−Re)})² − De, zero at dissociation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorsePotential {
    well_depth: f64,
    equilibrium_distance: f64,
    width: f64,
}

impl MorsePotential {
    pub fn new(well_depth: f64, equilibrium_distance: f64, width: f64) -> Result<Self, CurveError> {
        require_positive("well depth", well_depth)?;
        require_positive("equilibrium distance", equilibrium_distance)?;
        require_positive("width", width)?;
        Ok(Self {
            well_depth,
            equilibrium_distance,
            width,
        })
    }

    pub fn well_depth(&self) -> f64 {
        self.well_depth
    }

    pub fn equilibrium_distance(&self) -> f64 {
        self.equilibrium_distance
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn value(&self, r: f64) -> f64 {
        let x = 1.0 - (-self.width * (r - self.equilibrium_distance)).exp();
        self.well_depth * x * x - self.well_depth
    }

    /// λ = √(2μDe)/a.
    pub fn lambda(&self, mass: f64) -> f64 {
        (2.0 * mass * self.well_depth).sqrt() / self.width
    }

    /// ω₀ = a√(2De/μ).
    pub fn harmonic_frequency(&self, mass: f64) -> f64 {
        self.width * (2.0 * self.well_depth / mass).sqrt()
    }

    /// Closed-form number of bound levels, ⌊λ − ½⌋ + 1.
    pub fn bound_level_count(&self, mass: f64) -> usize {
        let top = self.lambda(mass) - 0.5;
        if top < 0.0 {
            0
        } else {
            top.floor() as usize + 1
        }
    }

    /// E_n = −De + ω₀(n+½) − ω₀²(n+½)²/(4De).
    pub fn level_energy(&self, n: usize, mass: f64) -> f64 {
        let w = self.harmonic_frequency(mass);
        let x = n as f64 + 0.5;
        -self.well_depth + w * x - w * w * x * x / (4.0 * self.well_depth)
    }
}

/// 12-6 Lennard-Jones well, V(R) = De[(Re/R)¹² − 2(Re/R)⁶].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LennardJonesPotential {
    well_depth: f64,
    equilibrium_distance: f64,
}

impl LennardJonesPotential {
    pub fn new(well_depth: f64, equilibrium_distance: f64) -> Result<Self, CurveError> {
        require_positive("well depth", well_depth)?;
        require_positive("equilibrium distance", equilibrium_distance)?;
        Ok(Self {
            well_depth,
            equilibrium_distance,
        })
    }

    pub fn well_depth(&self) -> f64 {
        self.well_depth
    }

    pub fn equilibrium_distance(&self) -> f64 {
        self.equilibrium_distance
    }

    pub fn value(&self, r: f64) -> f64 {
        let s6 = (self.equilibrium_distance / r).powi(6);
        self.well_depth * (s6 * s6 - 2.0 * s6)
    }
}

/// V(R) = ½μω²(R − R₀)².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicPotential {
    pub mass: f64,
    pub frequency: f64,
    pub center: f64,
}

impl HarmonicPotential {
    pub fn value(&self, r: f64) -> f64 {
        let x = r - self.center;
        0.5 * self.mass * self.frequency * self.frequency * x * x
    }
}

/// V(R) = Σₖ cₖ (R − R₀)ᵏ.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialPotential {
    pub center: f64,
    pub coefficients: Vec<f64>,
}

impl PolynomialPotential {
    pub fn value(&self, r: f64) -> f64 {
        let x = r - self.center;
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c)
    }
}

/// Any potential-energy curve the solvers accept.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialModel {
    Morse(MorsePotential),
    LennardJones(LennardJonesPotential),
    Harmonic(HarmonicPotential),
    Polynomial(PolynomialPotential),
    Tabulated(TabulatedCurve),
}

impl PotentialModel {
    /// V(R) in hartree. R must be positive; tabulated curves refuse to
    /// extrapolate.
    pub fn evaluate(&self, r: f64) -> Result<f64, CurveError> {
        if !(r > 0.0) {
            return Err(CurveError::InvalidDistance(r));
        }
        Ok(match self {
            Self::Morse(m) => m.value(r),
            Self::LennardJones(lj) => lj.value(r),
            Self::Harmonic(h) => h.value(r),
            Self::Polynomial(p) => p.value(r),
            Self::Tabulated(t) => t.evaluate(r)?,
        })
    }

    /// Evaluates the curve on every point of a slice.
    pub fn sample(&self, points: &[f64]) -> Result<Vec<f64>, CurveError> {
        points.iter().map(|&r| self.evaluate(r)).collect()
    }
}

/// Permanent dipole function D(R).
#[derive(Debug, Clone, PartialEq)]
pub enum DipoleModel {
    /// D(R) = d₀ (R/R_d) exp[−(R/R_d)^p]: zero at the origin and at
    /// dissociation with a single interior maximum.
    Damped {
        amplitude: f64,
        scale: f64,
        exponent: f64,
    },
    Constant(f64),
    /// D(R) = slope · (R − origin).
    Linear {
        origin: f64,
        slope: f64,
    },
    Tabulated(TabulatedCurve),
}

impl DipoleModel {
    pub fn damped(amplitude: f64, scale: f64, exponent: f64) -> Result<Self, CurveError> {
        if !amplitude.is_finite() {
            return Err(CurveError::InvalidParameter(format!(
                "dipole amplitude must be finite, got {amplitude}"
            )));
        }
        require_positive("dipole scale", scale)?;
        require_positive("dipole exponent", exponent)?;
        Ok(Self::Damped {
            amplitude,
            scale,
            exponent,
        })
    }

    /// D(R) in e·bohr.
    pub fn evaluate(&self, r: f64) -> Result<f64, CurveError> {
        if !(r >= 0.0) {
            return Err(CurveError::InvalidDistance(r));
        }
        Ok(match self {
            Self::Damped {
                amplitude,
                scale,
                exponent,
            } => {
                let x = r / scale;
                amplitude * x * (-x.powf(*exponent)).exp()
            }
            Self::Constant(d) => *d,
            Self::Linear { origin, slope } => slope * (r - origin),
            Self::Tabulated(t) => t.evaluate(r)?,
        })
    }

    pub fn sample(&self, points: &[f64]) -> Result<Vec<f64>, CurveError> {
        points.iter().map(|&r| self.evaluate(r)).collect()
    }
}

/// Boundary closure of the interpolating cubic spline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndCondition {
    /// Zero second derivative at both ends.
    #[default]
    Natural,
    /// Continuous third derivative at the second and penultimate nodes;
    /// reproduces cubic polynomials exactly.
    NotAKnot,
}

/// Cubic-spline interpolant through tabulated (R, value) samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCurve {
    nodes: Vec<f64>,
    values: Vec<f64>,
    /// Second derivatives of the spline at the nodes.
    curvature: Vec<f64>,
    end: EndCondition,
}

impl TabulatedCurve {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>, end: EndCondition) -> Result<Self, CurveError> {
        if nodes.len() != values.len() {
            return Err(CurveError::InvalidParameter(format!(
                "{} nodes but {} values",
                nodes.len(),
                values.len()
            )));
        }
        if nodes.len() < 4 {
            return Err(CurveError::InvalidParameter(format!(
                "a tabulated curve needs at least 4 points, got {}",
                nodes.len()
            )));
        }
        if let Some(bad) = nodes.iter().chain(&values).find(|x| !x.is_finite()) {
            return Err(CurveError::InvalidParameter(format!(
                "non-finite sample {bad}"
            )));
        }
        if let Some(w) = nodes.windows(2).find(|w| w[1] <= w[0]) {
            return Err(CurveError::InvalidParameter(format!(
                "nodes must be strictly increasing, found {} followed by {}",
                w[0], w[1]
            )));
        }
        let curvature = spline_curvature(&nodes, &values, end);
        Ok(Self {
            nodes,
            values,
            curvature,
            end,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn end_condition(&self) -> EndCondition {
        self.end
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.nodes[0], self.nodes[self.nodes.len() - 1])
    }

    pub fn evaluate(&self, r: f64) -> Result<f64, CurveError> {
        let (min, max) = self.domain();
        if !(r >= min && r <= max) {
            return Err(CurveError::OutOfRange { r, min, max });
        }
        let last = self.nodes.len() - 1;
        if r == max {
            return Ok(self.values[last]);
        }
        // Segment k with nodes[k] <= r < nodes[k + 1].
        let k = self.nodes.partition_point(|&x| x <= r) - 1;
        let h = self.nodes[k + 1] - self.nodes[k];
        let t = r - self.nodes[k];
        let (m0, m1) = (self.curvature[k], self.curvature[k + 1]);
        let slope = (self.values[k + 1] - self.values[k]) / h - h * (2.0 * m0 + m1) / 6.0;
        Ok(self.values[k] + t * (slope + t * (0.5 * m0 + t * (m1 - m0) / (6.0 * h))))
    }
}

/// Solves for the spline second derivatives. Interior rows are the usual
/// continuity equations; the end closure is folded into the first and last
/// interior rows so the system stays tridiagonal.
fn spline_curvature(x: &[f64], y: &[f64], end: EndCondition) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let m = n - 2;
    let mut sub = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut sup = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    for row in 0..m {
        let k = row + 1;
        sub[row] = h[k - 1];
        diag[row] = 2.0 * (h[k - 1] + h[k]);
        sup[row] = h[k];
        rhs[row] = 6.0 * ((y[k + 1] - y[k]) / h[k] - (y[k] - y[k - 1]) / h[k - 1]);
    }
    if end == EndCondition::NotAKnot {
        // M₀ = ((h₀+h₁)M₁ − h₀M₂)/h₁
        let (h0, h1) = (h[0], h[1]);
        diag[0] += h0 * (h0 + h1) / h1;
        sup[0] -= h0 * h0 / h1;
        // M_{n−1} = ((hp+hl)M_{n−2} − hl·M_{n−3})/hp
        let (hp, hl) = (h[n - 3], h[n - 2]);
        diag[m - 1] += hl * (hp + hl) / hp;
        sub[m - 1] -= hl * hl / hp;
    }
    sub[0] = 0.0;
    sup[m - 1] = 0.0;

    // Thomas algorithm.
    for row in 1..m {
        let w = sub[row] / diag[row - 1];
        diag[row] -= w * sup[row - 1];
        rhs[row] -= w * rhs[row - 1];
    }
    let mut inner = vec![0.0; m];
    inner[m - 1] = rhs[m - 1] / diag[m - 1];
    for row in (0..m - 1).rev() {
        inner[row] = (rhs[row] - sup[row] * inner[row + 1]) / diag[row];
    }

    let mut curvature = vec![0.0; n];
    curvature[1..n - 1].copy_from_slice(&inner);
    if end == EndCondition::NotAKnot {
        let (h0, h1) = (h[0], h[1]);
        curvature[0] = ((h0 + h1) * curvature[1] - h0 * curvature[2]) / h1;
        let (hp, hl) = (h[n - 3], h[n - 2]);
        curvature[n - 1] = ((hp + hl) * curvature[n - 2] - hl * curvature[n - 3]) / hp;
    }
    curvature
}

/// Which physical quantity a tabulated file holds. Potentials must live at
/// R > 0; dipoles may start at R = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveKind {
    Potential,
    Dipole,
}

/// Reads a two-column (R, value) text file in atomic units. Columns may be
/// separated by whitespace or commas; blank lines and lines starting with
/// `#` are skipped. Node values are kept bit-identical to the file.
pub fn load_tabulated(path: &Path, kind: CurveKind) -> Result<TabulatedCurve, CurveError> {
    let shown = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| CurveError::Io {
        path: shown.clone(),
        source,
    })?;
    let (nodes, values) = parse_two_columns(&text, &shown)?;
    if nodes.len() < 4 {
        return Err(CurveError::InsufficientData {
            path: shown,
            found: nodes.len(),
        });
    }
    for w in nodes.windows(2) {
        if w[1] <= w[0] {
            let reason = if w[1] == w[0] {
                format!("duplicate R = {}", w[0])
            } else {
                format!("R values are not sorted ({} follows {})", w[1], w[0])
            };
            return Err(CurveError::Format {
                path: shown,
                reason,
            });
        }
    }
    let lowest_ok = match kind {
        CurveKind::Potential => nodes[0] > 0.0,
        CurveKind::Dipole => nodes[0] >= 0.0,
    };
    if !lowest_ok {
        return Err(CurveError::Format {
            path: shown,
            reason: format!("R = {} is outside the physical domain", nodes[0]),
        });
    }
    TabulatedCurve::new(nodes, values, EndCondition::Natural)
}

fn parse_two_columns(text: &str, path: &str) -> Result<(Vec<f64>, Vec<f64>), CurveError> {
    let mut nodes = Vec::new();
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if fields.len() != 2 {
            return Err(CurveError::Format {
                path: path.to_owned(),
                reason: format!(
                    "line {}: expected 2 columns, found {}",
                    idx + 1,
                    fields.len()
                ),
            });
        }
        let mut parsed = [0.0; 2];
        for (slot, token) in parsed.iter_mut().zip(&fields) {
            *slot = token
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CurveError::Parse {
                    path: path.to_owned(),
                    line: idx + 1,
                    token: (*token).to_owned(),
                })?;
        }
        nodes.push(parsed[0]);
        values.push(parsed[1]);
    }
    Ok((nodes, values))
}
