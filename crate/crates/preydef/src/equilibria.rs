//! Closed-form equilibrium points and their existence conditions.
//!
//! Setting both derivatives to zero yields three families of fixed points:
//! the origin `E0`, axial points `(N, 0)` with `N` a positive root of
//! `N^2 - (K-w)N + K(h-w) = 0`, and coexistence points whose prey density
//! solves `cN/(b+N^2) = delta` and whose predator density comes from the
//! prey nullcline. Candidates only count as equilibria while both
//! densities are strictly positive.

use serde::Serialize;

use crate::model::{vector_field, AlleeRegime, ModelParams, State};

/// Absolute tolerance deciding the degenerate (double-root) discriminant
/// branches, applied after scaling by the coefficient magnitudes.
pub const ROOT_TOL: f64 = 1e-10;

/// A coexistence candidate whose nullcline value is this close to zero is
/// reported as boundary-degenerate instead of as an equilibrium.
pub const BOUNDARY_TOL: f64 = 1e-10;

/// Fixed-point labels. `E0` is the origin; `E1`/`E2` are the larger/smaller
/// axial roots and `E3` the axial double root; `E4`/`E5` are the larger and
/// smaller coexistence roots and `E6` the coexistence double root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Label {
    E0,
    E1,
    E2,
    E3,
    E4,
    E5,
    E6,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::E0 => "E0",
            Label::E1 => "E1",
            Label::E2 => "E2",
            Label::E3 => "E3",
            Label::E4 => "E4",
            Label::E5 => "E5",
            Label::E6 => "E6",
        }
    }

    pub fn is_axial(self) -> bool {
        matches!(self, Label::E1 | Label::E2 | Label::E3)
    }

    pub fn is_coexistence(self) -> bool {
        matches!(self, Label::E4 | Label::E5 | Label::E6)
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Kind {
    /// Both populations extinct.
    Trivial,
    /// Predators extinct, prey at a positive density.
    Axial,
    /// Both densities strictly positive.
    Coexistence,
}

/// A labelled fixed point of the vector field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equilibrium {
    pub label: Label,
    pub kind: Kind,
    pub state: State,
}

/// Everything known about the fixed-point set at one parameter choice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExistenceReport {
    /// Discriminant of the axial quadratic, `(K-w)^2 - 4K(h-w)`.
    pub d1: f64,
    /// Discriminant of the coexistence quadratic, `c^2 - 4 b delta^2`.
    pub d2: f64,
    pub equilibria: Vec<Equilibrium>,
    /// Human-readable existence rationales, one per decision taken.
    pub notes: Vec<String>,
}

impl ExistenceReport {
    pub fn find(&self, label: Label) -> Option<&Equilibrium> {
        self.equilibria.iter().find(|e| e.label == label)
    }

    pub fn labels(&self) -> Vec<Label> {
        self.equilibria.iter().map(|e| e.label).collect()
    }
}

/// Roots of the monic quadratic `x^2 - sum*x + prod = 0` with non-negative
/// discriminant `d`, returned `(larger, smaller)`. The smaller-magnitude
/// root is recovered from the product to avoid cancellation.
fn monic_roots(sum: f64, prod: f64, d: f64) -> (f64, f64) {
    let s = d.max(0.0).sqrt();
    let big = if sum >= 0.0 { (sum + s) / 2.0 } else { (sum - s) / 2.0 };
    let other = if big != 0.0 { prod / big } else { sum - big };
    (big.max(other), big.min(other))
}

/// Strictly positive roots of the axial quadratic, labelled `E1` (larger),
/// `E2` (smaller), or `E3` (double root `(K-w)/2` when the discriminant
/// vanishes within [`ROOT_TOL`]). An empty list is a valid outcome.
pub fn axial_roots(p: &ModelParams) -> Vec<(Label, f64)> {
    let sum = p.k - p.w;
    let prod = p.k * (p.h - p.w);
    let d1 = sum * sum - 4.0 * prod;
    let tol = ROOT_TOL * (sum * sum).max(4.0 * prod.abs()).max(1.0);

    if d1 < -tol {
        return Vec::new();
    }
    if d1.abs() <= tol {
        let n3 = sum / 2.0;
        return if n3 > 0.0 { vec![(Label::E3, n3)] } else { Vec::new() };
    }
    let (big, small) = monic_roots(sum, prod, d1);
    let mut out = Vec::new();
    if big > 0.0 {
        out.push((Label::E1, big));
    }
    if small > 0.0 {
        out.push((Label::E2, small));
    }
    out
}

/// Discriminant of the axial quadratic.
pub fn axial_discriminant(p: &ModelParams) -> f64 {
    let sum = p.k - p.w;
    sum * sum - 4.0 * p.k * (p.h - p.w)
}

/// Discriminant of the coexistence quadratic `delta N^2 - c N + delta b = 0`.
pub fn coexistence_discriminant(p: &ModelParams) -> f64 {
    p.c * p.c - 4.0 * p.b * p.delta * p.delta
}

/// Predator density on the prey nullcline at prey density `n`, sign
/// included:
///
/// ```text
/// P(N) = r (b + N^2) [ (K-w)N - K(h-w) - N^2 ] / (K a (w + N))
/// ```
///
/// A negative value means a coexistence candidate at this `N` fails
/// existence.
pub fn prey_nullcline_p(p: &ModelParams, n: f64) -> f64 {
    let bracket = (p.k - p.w) * n - p.k * (p.h - p.w) - n * n;
    p.r * (p.b + n * n) * bracket / (p.k * p.a * (p.w + n))
}

struct CoexistenceAnalysis {
    d2: f64,
    points: Vec<Equilibrium>,
    notes: Vec<String>,
}

fn coexistence_analysis(p: &ModelParams) -> CoexistenceAnalysis {
    let d2 = coexistence_discriminant(p);
    let tol = ROOT_TOL * (p.c * p.c).max(4.0 * p.b * p.delta * p.delta).max(1.0);
    let mut notes = Vec::new();
    let mut candidates: Vec<(Label, f64)> = Vec::new();

    if d2 < -tol {
        notes.push(format!(
            "coexistence: D2 = {d2} < 0 (b > (c/2delta)^2), no real prey roots, so no coexistence points"
        ));
    } else if d2.abs() <= tol {
        let n6 = p.c / (2.0 * p.delta);
        notes.push(format!(
            "coexistence: D2 = 0 within tolerance, double prey root N6 = {n6}"
        ));
        candidates.push((Label::E6, n6));
    } else {
        let s = d2.sqrt();
        let n4 = (p.c + s) / (2.0 * p.delta);
        // the roots of delta N^2 - cN + delta b multiply to b
        let n5 = p.b / n4;
        candidates.push((Label::E4, n4));
        candidates.push((Label::E5, n5));
    }

    let mut points = Vec::new();
    for (label, n) in candidates {
        let pv = prey_nullcline_p(p, n);
        if pv > BOUNDARY_TOL {
            points.push(Equilibrium {
                label,
                kind: Kind::Coexistence,
                state: State { n, p: pv },
            });
            notes.push(format!("coexistence: {label} = ({n}, {pv}) exists (nullcline P > 0)"));
        } else if pv.abs() <= BOUNDARY_TOL {
            notes.push(format!(
                "coexistence: candidate {label} at N = {n} is boundary-degenerate (|P| <= {BOUNDARY_TOL}), not counted"
            ));
        } else {
            notes.push(format!(
                "coexistence: candidate {label} at N = {n} rejected, nullcline P = {pv} < 0"
            ));
        }
    }

    CoexistenceAnalysis { d2, points, notes }
}

/// Coexistence equilibria (0, 1, or 2 of them). Real roots of the predator
/// nullcline are kept only while the prey nullcline gives them a strictly
/// positive predator density.
pub fn coexistence_points(p: &ModelParams) -> Vec<Equilibrium> {
    coexistence_analysis(p).points
}

/// The full fixed-point set: the origin (always present), the axial roots,
/// and the surviving coexistence candidates, with existence rationales.
pub fn all_equilibria(p: &ModelParams) -> ExistenceReport {
    let mut equilibria = vec![Equilibrium {
        label: Label::E0,
        kind: Kind::Trivial,
        state: State { n: 0.0, p: 0.0 },
    }];
    let mut notes = vec!["origin E0 always exists".to_string()];

    let d1 = axial_discriminant(p);
    let axial = axial_roots(p);
    match p.allee_regime() {
        AlleeRegime::Weak => notes.push(
            "axial: weak Allee effect (h < w) gives exactly one positive axial root E1".to_string(),
        ),
        AlleeRegime::Boundary => notes.push(
            "axial: h = w, roots are 0 and K-w; the positive one (if any) is labelled E1"
                .to_string(),
        ),
        AlleeRegime::Strong => {
            let bound = (p.k + p.w) * (p.k + p.w) / (4.0 * p.k);
            if p.k <= p.w {
                notes.push(format!(
                    "axial: strong Allee effect with K <= w (K = {}, w = {}), no positive axial roots",
                    p.k, p.w
                ));
            } else if axial.iter().any(|(l, _)| *l == Label::E3) {
                notes.push(format!(
                    "axial: strong Allee effect at the degenerate severity h = (K+w)^2/4K = {bound}, double root E3"
                ));
            } else if axial.is_empty() {
                notes.push(format!(
                    "axial: strong Allee effect with h > (K+w)^2/4K = {bound}, no axial points"
                ));
            } else {
                notes.push(format!(
                    "axial: strong Allee effect with h < (K+w)^2/4K = {bound}, two axial points E1 and E2"
                ));
            }
        }
    }
    for (label, n) in &axial {
        equilibria.push(Equilibrium {
            label: *label,
            kind: Kind::Axial,
            state: State { n: *n, p: 0.0 },
        });
        notes.push(format!("axial: {label} at N = {n}"));
    }

    let coex = coexistence_analysis(p);
    equilibria.extend(coex.points.iter().copied());
    notes.extend(coex.notes);

    let report = ExistenceReport { d1, d2: coex.d2, equilibria, notes };
    debug_assert!(report.equilibria.iter().all(|e| {
        let (dn, dp) = vector_field(p, e.state);
        dn.abs() < 1e-8 && dp.abs() < 1e-8
    }));
    report
}
