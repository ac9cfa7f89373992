//! Local stability classification from the 2x2 Jacobian, cross-checked
//! against the closed-form conditions each equilibrium family satisfies.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::equilibria::{axial_roots, coexistence_points, Equilibrium, Label};
use crate::model::{jacobian, vector_field, AlleeRegime, Matrix2, ModelParams};

/// Eigenvalue real parts (and the focus/node discriminant) within this of
/// zero are treated as degenerate.
pub const HYP_TOL: f64 = 1e-8;

/// An equilibrium handed to [`classify`] must annihilate the field to this
/// accuracy, otherwise it was produced for different parameters.
pub const RESIDUAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StabilityError {
    #[error("state is not an equilibrium of these parameters (residual {residual:e} > {RESIDUAL_TOL:e})")]
    NotAnEquilibrium { residual: f64 },
    #[error("operation requires the weak Allee regime (h < w)")]
    RequiresWeakAllee,
    #[error("no axial equilibrium exists for these parameters")]
    NoAxialPoint,
    #[error("no coexistence equilibrium E5 exists for these parameters")]
    NoCoexistencePoint,
}

/// Eigenvalues of a 2x2 Jacobian, ordered by descending real part (the
/// positive-imaginary member first for a conjugate pair).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenPair {
    pub lambda1: Complex64,
    pub lambda2: Complex64,
}

/// Roots of `lambda^2 - tr lambda + det = 0`, computed without cancellation
/// between the trace and the square root.
pub fn eigenvalues_2x2(m: &Matrix2) -> EigenPair {
    let tr = m.trace();
    let det = m.det();
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        let big = if tr >= 0.0 { (tr + s) / 2.0 } else { (tr - s) / 2.0 };
        let other = if big != 0.0 { det / big } else { tr - big };
        let (l1, l2) = (big.max(other), big.min(other));
        EigenPair { lambda1: Complex64::new(l1, 0.0), lambda2: Complex64::new(l2, 0.0) }
    } else {
        let im = (-disc).sqrt() / 2.0;
        EigenPair {
            lambda1: Complex64::new(tr / 2.0, im),
            lambda2: Complex64::new(tr / 2.0, -im),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    StableNode,
    StableFocus,
    UnstableNode,
    UnstableFocus,
    Saddle,
    NonHyperbolic,
}

impl Classification {
    /// True for the locally asymptotically stable classes.
    pub fn is_attracting(self) -> bool {
        matches!(self, Classification::StableNode | Classification::StableFocus)
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Classification::StableNode => "StableNode",
            Classification::StableFocus => "StableFocus",
            Classification::UnstableNode => "UnstableNode",
            Classification::UnstableFocus => "UnstableFocus",
            Classification::Saddle => "Saddle",
            Classification::NonHyperbolic => "NonHyperbolic",
        };
        f.write_str(s)
    }
}

/// Eigenvalue data and classification for one equilibrium, with a note
/// naming the closed-form condition that applies to its family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub equilibrium: Equilibrium,
    pub eigen: EigenPair,
    pub trace: f64,
    pub det: f64,
    pub classification: Classification,
    pub analytic_note: String,
}

fn classification_from(eigen: &EigenPair, tr: f64, det: f64) -> Classification {
    if eigen.lambda1.re.abs() <= HYP_TOL || eigen.lambda2.re.abs() <= HYP_TOL {
        return Classification::NonHyperbolic;
    }
    if det < -HYP_TOL {
        return Classification::Saddle;
    }
    let disc = tr * tr - 4.0 * det;
    // borderline repeated roots count as nodes
    if disc < -HYP_TOL {
        if tr < 0.0 {
            Classification::StableFocus
        } else {
            Classification::UnstableFocus
        }
    } else if eigen.lambda1.re > 0.0 && eigen.lambda2.re > 0.0 {
        Classification::UnstableNode
    } else if eigen.lambda1.re < 0.0 && eigen.lambda2.re < 0.0 {
        Classification::StableNode
    } else {
        Classification::Saddle
    }
}

fn analytic_note(p: &ModelParams, e: &Equilibrium, tr: f64) -> String {
    match e.label {
        Label::E0 => match p.allee_regime() {
            AlleeRegime::Weak => format!(
                "origin: weak Allee effect (h = {} < w = {}) makes the prey eigenvalue r(w-h)/w positive; unstable (saddle)",
                p.h, p.w
            ),
            AlleeRegime::Strong => format!(
                "origin: strong Allee effect (h = {} > w = {}) makes both eigenvalues negative; locally asymptotically stable",
                p.h, p.w
            ),
            AlleeRegime::Boundary => {
                "origin: h = w puts a zero prey eigenvalue at the origin; non-hyperbolic".to_string()
            }
        },
        Label::E3 => {
            "axial double root: zero prey eigenvalue at h = (K+w)^2/(4K); non-hyperbolic".to_string()
        }
        Label::E1 | Label::E2 => {
            let n = e.state.n;
            let cstar = p.delta * (p.b + n * n) / n;
            let side = if p.c < cstar { "<" } else { ">=" };
            match (p.allee_regime(), e.label) {
                (AlleeRegime::Strong, Label::E2) => format!(
                    "smaller axial root: prey eigenvalue positive in the strong regime; saddle (predator eigenvalue sign set by c* = delta(b+N^2)/N = {cstar})"
                ),
                _ => format!(
                    "axial root: prey eigenvalue negative; predator eigenvalue changes sign at c* = delta(b+N^2)/N = {cstar}, and c {side} c*"
                ),
            }
        }
        Label::E4 => "larger coexistence root: det(J) < 0 there; unstable, a saddle when tr(J) < 0".to_string(),
        Label::E5 => format!(
            "smaller coexistence root: det(J) > 0 there; locally asymptotically stable iff tr(J) < 0 (here tr = {tr})"
        ),
        Label::E6 => "coexistence double root at b = (c/2delta)^2: det(J) = 0; non-hyperbolic".to_string(),
    }
}

/// Classify the local stability of `e`, which must be an equilibrium of `p`.
pub fn classify(p: &ModelParams, e: &Equilibrium) -> Result<StabilityReport, StabilityError> {
    let (dn, dp) = vector_field(p, e.state);
    let residual = dn.abs().max(dp.abs());
    if residual.is_nan() || residual > RESIDUAL_TOL {
        return Err(StabilityError::NotAnEquilibrium { residual });
    }
    let j = jacobian(p, e.state);
    let eigen = eigenvalues_2x2(&j);
    let trace = j.trace();
    let det = j.det();
    let classification = classification_from(&eigen, trace, det);
    Ok(StabilityReport {
        equilibrium: *e,
        eigen,
        trace,
        det,
        classification,
        analytic_note: analytic_note(p, e, trace),
    })
}

fn weak_axial_root(p: &ModelParams) -> Result<f64, StabilityError> {
    if p.allee_regime() != AlleeRegime::Weak {
        return Err(StabilityError::RequiresWeakAllee);
    }
    axial_roots(p)
        .iter()
        .find(|(l, _)| *l == Label::E1)
        .map(|(_, n)| *n)
        .ok_or(StabilityError::NoAxialPoint)
}

/// Conversion rate at which the axial point `E1` exchanges stability with
/// the coexistence branch: `c* = delta (b + N1^2) / N1`.
pub fn e1_transcritical_c(p: &ModelParams) -> Result<f64, StabilityError> {
    let n1 = weak_axial_root(p)?;
    Ok(p.delta * (p.b + n1 * n1) / n1)
}

/// Half-saturation constant at which `E1` exchanges stability, solving the
/// same threshold for `b`: `b* = c N1 / delta - N1^2`.
pub fn e1_transcritical_b(p: &ModelParams) -> Result<f64, StabilityError> {
    let n1 = weak_axial_root(p)?;
    Ok(p.c * n1 / p.delta - n1 * n1)
}

/// Signed trace of the Jacobian at the coexistence point `E5`, evaluated in
/// the reduced form valid on the coexistence set:
///
/// ```text
/// tr = h r N/(w+N)^2 + 2 a N^2 P/(b+N^2)^2 - r N / K
/// ```
///
/// Its zero crossing (with positive determinant) is the oscillation onset.
pub fn coexistence_trace(p: &ModelParams) -> Result<f64, StabilityError> {
    let e5 = coexistence_points(p)
        .into_iter()
        .find(|e| e.label == Label::E5)
        .ok_or(StabilityError::NoCoexistencePoint)?;
    let (n, pp) = (e5.state.n, e5.state.p);
    let wn = p.w + n;
    let bn = p.b + n * n;
    Ok(p.h * p.r * n / (wn * wn) + 2.0 * p.a * n * n * pp / (bn * bn) - p.r * n / p.k)
}
