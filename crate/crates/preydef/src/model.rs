//! Model definition: parameters, planar state, vector field, and analytic
//! Jacobian.
//!
//! The system is a two-species predator-prey model. Prey grow logistically
//! with an additive Allee penalty `h/(w+N)` inside the growth bracket, and
//! are consumed through a saturating response `aN/(b+N^2)` whose decay at
//! high density models group defense. Predators convert consumption with
//! rate `c` and die at rate `delta`:
//!
//! ```text
//! dN/dt = r N (1 - N/K - h/(w+N)) - a N P / (b + N^2)
//! dP/dt = c N P / (b + N^2) - delta P
//! ```

use serde::Serialize;
use thiserror::Error;

/// Raised when a parameter or state fails construction-time validation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("parameter `{name}` must be strictly positive and finite (got {value})")]
    NonPositiveParam { name: &'static str, value: f64 },
    #[error("state component `{name}` must be non-negative and finite (got {value})")]
    InvalidState { name: &'static str, value: f64 },
}

/// Non-fatal construction diagnostics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelWarning {
    #[error("half-fitness population size w = {w} is not below the carrying capacity k = {k}; the model is derived under w < k")]
    HalfFitnessAtOrAboveCapacity { w: f64, k: f64 },
}

/// The eight positive constants of the model.
///
/// Units are abstract population/time scales; only positivity is required,
/// plus a warning when `w >= k` (see [`ModelParams::warnings`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    /// Intrinsic prey growth rate (1/time).
    pub r: f64,
    /// Prey carrying capacity (population).
    pub k: f64,
    /// Allee half-fitness population size (population).
    pub w: f64,
    /// Allee severity rate (population).
    pub h: f64,
    /// Predation rate.
    pub a: f64,
    /// Half-saturation constant of predation (population^2).
    pub b: f64,
    /// Predation conversion rate.
    pub c: f64,
    /// Predator death rate (1/time).
    pub delta: f64,
}

/// Identifies one of the eight model parameters, e.g. as a sweep axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamName {
    R,
    K,
    W,
    H,
    A,
    B,
    C,
    Delta,
}

impl ParamName {
    pub const ALL: [ParamName; 8] = [
        ParamName::R,
        ParamName::K,
        ParamName::W,
        ParamName::H,
        ParamName::A,
        ParamName::B,
        ParamName::C,
        ParamName::Delta,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ParamName::R => "r",
            ParamName::K => "k",
            ParamName::W => "w",
            ParamName::H => "h",
            ParamName::A => "a",
            ParamName::B => "b",
            ParamName::C => "c",
            ParamName::Delta => "delta",
        }
    }
}

impl std::str::FromStr for ParamName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ParamName::ALL
            .iter()
            .copied()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown parameter name `{s}` (expected one of r, k, w, h, a, b, c, delta)"))
    }
}

impl std::fmt::Display for ParamName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl ModelParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        r: f64,
        k: f64,
        w: f64,
        h: f64,
        a: f64,
        b: f64,
        c: f64,
        delta: f64,
    ) -> Result<Self, ModelError> {
        let p = ModelParams { r, k, w, h, a, b, c, delta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for name in ParamName::ALL {
            let value = self.value(name);
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::NonPositiveParam { name: name.as_str(), value });
            }
        }
        Ok(())
    }

    /// Diagnostics that do not invalidate the parameter set.
    pub fn warnings(&self) -> Vec<ModelWarning> {
        let mut out = Vec::new();
        if self.w >= self.k {
            out.push(ModelWarning::HalfFitnessAtOrAboveCapacity { w: self.w, k: self.k });
        }
        out
    }

    pub fn value(&self, name: ParamName) -> f64 {
        match name {
            ParamName::R => self.r,
            ParamName::K => self.k,
            ParamName::W => self.w,
            ParamName::H => self.h,
            ParamName::A => self.a,
            ParamName::B => self.b,
            ParamName::C => self.c,
            ParamName::Delta => self.delta,
        }
    }

    /// Copy of `self` with one parameter replaced; used by sweeps.
    pub fn with_value(mut self, name: ParamName, value: f64) -> Self {
        match name {
            ParamName::R => self.r = value,
            ParamName::K => self.k = value,
            ParamName::W => self.w = value,
            ParamName::H => self.h = value,
            ParamName::A => self.a = value,
            ParamName::B => self.b = value,
            ParamName::C => self.c = value,
            ParamName::Delta => self.delta = value,
        }
        self
    }

    pub fn allee_regime(&self) -> AlleeRegime {
        allee_regime(self)
    }
}

/// A point of the phase plane. Both densities are non-negative; the model is
/// only meaningful in the closed first quadrant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct State {
    /// Prey density.
    pub n: f64,
    /// Predator density.
    pub p: f64,
}

impl State {
    pub fn new(n: f64, p: f64) -> Result<Self, ModelError> {
        if !(n.is_finite() && n >= 0.0) {
            return Err(ModelError::InvalidState { name: "N", value: n });
        }
        if !(p.is_finite() && p >= 0.0) {
            return Err(ModelError::InvalidState { name: "P", value: p });
        }
        Ok(State { n, p })
    }

    pub fn distance(&self, other: &State) -> f64 {
        let dn = self.n - other.n;
        let dp = self.p - other.p;
        (dn * dn + dp * dp).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.n.is_finite() && self.p.is_finite()
    }
}

/// A real 2x2 matrix, used for Jacobians of the planar field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Matrix2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Matrix2 {
    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }
}

/// Qualitative strength of the Allee effect, decided by exact comparison of
/// the stored `h` and `w`. Callers needing a tolerance should compare
/// `h - w` themselves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AlleeRegime {
    /// `h < w`: the growth penalty never forces negative prey growth at low density.
    Weak,
    /// `h > w`: an extinction threshold exists for the prey.
    Strong,
    /// `h = w` exactly.
    Boundary,
}

pub fn allee_regime(p: &ModelParams) -> AlleeRegime {
    if p.h < p.w {
        AlleeRegime::Weak
    } else if p.h > p.w {
        AlleeRegime::Strong
    } else {
        AlleeRegime::Boundary
    }
}

/// Right-hand side `(dN/dt, dP/dt)` of the model at state `s`.
///
/// Both denominators `w + N` and `b + N^2` are strictly positive on the
/// first quadrant, so the field is defined everywhere it is used.
pub fn vector_field(p: &ModelParams, s: State) -> (f64, f64) {
    let (n, pp) = (s.n, s.p);
    let dn = p.r * n * (1.0 - n / p.k - p.h / (p.w + n)) - p.a * n * pp / (p.b + n * n);
    let dp = p.c * n * pp / (p.b + n * n) - p.delta * pp;
    (dn, dp)
}

/// Analytic Jacobian of [`vector_field`] at state `s`, written term by term:
///
/// ```text
/// a11 = r - 2rN/K - rhw/(w+N)^2 - aP(b-N^2)/(b+N^2)^2
/// a12 = -aN/(b+N^2)
/// a21 = cP/(b+N^2) - 2cN^2 P/(b+N^2)^2
/// a22 = cN/(b+N^2) - delta
/// ```
pub fn jacobian(p: &ModelParams, s: State) -> Matrix2 {
    let (n, pp) = (s.n, s.p);
    let wn = p.w + n;
    let bn = p.b + n * n;
    Matrix2 {
        a11: p.r - 2.0 * p.r * n / p.k - p.r * p.h * p.w / (wn * wn)
            - p.a * pp * (p.b - n * n) / (bn * bn),
        a12: -p.a * n / bn,
        a21: p.c * pp / bn - 2.0 * p.c * n * n * pp / (bn * bn),
        a22: p.c * n / bn - p.delta,
    }
}

/// Central finite differences of [`vector_field`], kept independent of
/// [`jacobian`] so the two can be cross-checked.
pub fn jacobian_fd(p: &ModelParams, s: State, step: f64) -> Matrix2 {
    let fd = |i: usize, j: usize| -> f64 {
        let mut plus = s;
        let mut minus = s;
        if j == 0 {
            plus.n += step;
            minus.n -= step;
        } else {
            plus.p += step;
            minus.p -= step;
        }
        let fp = vector_field(p, plus);
        let fm = vector_field(p, minus);
        let (fp_i, fm_i) = if i == 0 { (fp.0, fm.0) } else { (fp.1, fm.1) };
        (fp_i - fm_i) / (2.0 * step)
    };
    Matrix2 { a11: fd(0, 0), a12: fd(0, 1), a21: fd(1, 0), a22: fd(1, 1) }
}
