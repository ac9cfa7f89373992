//! One-parameter sweeps and critical-point location.
//!
//! A sweep walks one parameter across a range, recomputing the fixed-point
//! set, classifying each point, and probing the attractor with a trajectory
//! that warm-starts from the previous attractor state (the diagrams plot
//! attractors, not every invariant set). Critical values come from three
//! routes: closed forms, sign-change bisection of the coexistence trace,
//! and classification flips between consecutive sweep records.

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{classify_attractor, integrate, AttractorId, IntegratorConfig, TAIL_FRAC};
use crate::equilibria::{all_equilibria, Label};
use crate::model::{jacobian, ModelParams, ParamName, State};
use crate::stability::{
    classify, coexistence_trace, e1_transcritical_b, e1_transcritical_c, Classification,
    StabilityError,
};

/// Warm-start states are floored to this to keep the probe off the
/// invariant axes, which no trajectory can leave.
const WARM_EPS: f64 = 1e-3;

/// Bisection stops once `|trace|` or the parameter interval is this small.
const HOPF_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BifurcationError {
    #[error("sweep range invalid: {0}")]
    InvalidRange(String),
    #[error("critical-point search does not support parameter `{0}`")]
    UnsupportedParam(ParamName),
    #[error("transcritical threshold requires the weak Allee regime with E1 present: {0}")]
    NoTranscritical(StabilityError),
    #[error("threshold value {value} for `{param}` lies outside the positive domain")]
    OutsidePositiveDomain { param: ParamName, value: f64 },
    #[error("coexistence trace has no sign change over the bracket")]
    NoSignChange,
    #[error("coexistence point E5 vanished inside the bracket at {param} = {value}")]
    E5Vanished { param: ParamName, value: f64 },
    #[error("determinant at the trace root is not positive (det = {det}); fold rather than oscillation onset")]
    DeterminantNotPositive { det: f64 },
}

/// Stability classification of one equilibrium at one sweep value.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSummary {
    pub label: Label,
    pub state: State,
    pub classification: Classification,
}

/// One parameter value of a sweep: the fixed-point set, the probe
/// trajectory's attractor, and the probe's tail extrema.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub param: ParamName,
    pub value: f64,
    pub equilibria_summary: Vec<EquilibriumSummary>,
    pub attractor: AttractorId,
    pub n_min: f64,
    pub n_max: f64,
    pub p_min: f64,
    pub p_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CriticalKind {
    /// Stability exchange between the axial and coexistence branches.
    Transcritical,
    /// Trace zero-crossing of the coexistence Jacobian with positive
    /// determinant: onset of oscillations.
    Hopf,
    /// Collision of the two coexistence roots (coexistence discriminant 0).
    CoexistenceFold,
    /// Collision of the two axial roots (axial discriminant 0).
    AxialDegenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DetectionMethod {
    Analytic,
    RootFind,
    SweepDetect,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub kind: CriticalKind,
    pub param: ParamName,
    pub value: f64,
    pub method: DetectionMethod,
}

/// Evenly spaced sweep over `steps` values of `param` in `[lo, hi]`.
///
/// The probe trajectory at each value starts from the previous attractor
/// state (floored by [`WARM_EPS`] off the axes); integrator failures mark
/// the record `Undetermined` with NaN extrema and the sweep continues.
pub fn sweep(
    p: &ModelParams,
    param: ParamName,
    lo: f64,
    hi: f64,
    steps: usize,
    probe_s0: State,
    cfg: &IntegratorConfig,
) -> Result<Vec<SweepRecord>, BifurcationError> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(BifurcationError::InvalidRange(format!("need lo < hi, got [{lo}, {hi}]")));
    }
    if lo <= 0.0 {
        return Err(BifurcationError::InvalidRange(format!(
            "parameter `{param}` must stay positive across the range (lo = {lo})"
        )));
    }
    if steps < 2 {
        return Err(BifurcationError::InvalidRange(format!("need at least 2 steps, got {steps}")));
    }

    let mut records = Vec::with_capacity(steps);
    let mut s0 = probe_s0;
    for i in 0..steps {
        let value = lo + (hi - lo) * i as f64 / (steps - 1) as f64;
        let pv = p.with_value(param, value);
        let report = all_equilibria(&pv);
        let equilibria_summary = report
            .equilibria
            .iter()
            .filter_map(|e| {
                classify(&pv, e).ok().map(|rep| EquilibriumSummary {
                    label: e.label,
                    state: e.state,
                    classification: rep.classification,
                })
            })
            .collect();

        let record = match integrate(&pv, s0, cfg) {
            Ok(traj) => {
                let tail = traj.tail_states(TAIL_FRAC);
                let (mut n_min, mut n_max, mut p_min, mut p_max) =
                    (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
                for s in tail {
                    n_min = n_min.min(s.n);
                    n_max = n_max.max(s.n);
                    p_min = p_min.min(s.p);
                    p_max = p_max.max(s.p);
                }
                let attractor = classify_attractor(&pv, &traj, &report);
                let fin = traj.final_state();
                s0 = State { n: fin.n.max(WARM_EPS), p: fin.p.max(WARM_EPS) };
                SweepRecord {
                    param,
                    value,
                    equilibria_summary,
                    attractor,
                    n_min,
                    n_max,
                    p_min,
                    p_max,
                }
            }
            Err(_) => SweepRecord {
                param,
                value,
                equilibria_summary,
                attractor: AttractorId::Undetermined,
                n_min: f64::NAN,
                n_max: f64::NAN,
                p_min: f64::NAN,
                p_max: f64::NAN,
            },
        };
        records.push(record);
    }
    Ok(records)
}

/// Classification flips between consecutive sweep records, located at the
/// midpoint of the bracketing values. An axial flip is a transcritical
/// exchange; a coexistence flip is an oscillation onset.
pub fn stability_changes(records: &[SweepRecord]) -> Vec<CriticalPoint> {
    let mut out = Vec::new();
    for pair in records.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        for ea in &a.equilibria_summary {
            let Some(eb) = b.equilibria_summary.iter().find(|e| e.label == ea.label) else {
                continue;
            };
            if ea.classification.is_attracting() != eb.classification.is_attracting() {
                let kind = if ea.label.is_coexistence() {
                    CriticalKind::Hopf
                } else {
                    CriticalKind::Transcritical
                };
                out.push(CriticalPoint {
                    kind,
                    param: a.param,
                    value: 0.5 * (a.value + b.value),
                    method: DetectionMethod::SweepDetect,
                });
            }
        }
    }
    out
}

/// Closed-form transcritical threshold of the axial point `E1`, solved for
/// `c` or for `b`.
pub fn transcritical_point(
    p: &ModelParams,
    param: ParamName,
) -> Result<CriticalPoint, BifurcationError> {
    let value = match param {
        ParamName::C => e1_transcritical_c(p),
        ParamName::B => e1_transcritical_b(p),
        other => return Err(BifurcationError::UnsupportedParam(other)),
    }
    .map_err(BifurcationError::NoTranscritical)?;
    if value <= 0.0 {
        return Err(BifurcationError::OutsidePositiveDomain { param, value });
    }
    Ok(CriticalPoint {
        kind: CriticalKind::Transcritical,
        param,
        value,
        method: DetectionMethod::Analytic,
    })
}

fn trace_at(p: &ModelParams, param: ParamName, x: f64) -> Result<f64, StabilityError> {
    coexistence_trace(&p.with_value(param, x))
}

/// Bisect the coexistence trace to its zero crossing inside `[lo, hi]`,
/// then require a positive determinant there (a fold also zeroes the trace
/// formula's usefulness, but with `det <= 0`).
pub fn hopf_point(
    p: &ModelParams,
    param: ParamName,
    lo: f64,
    hi: f64,
) -> Result<CriticalPoint, BifurcationError> {
    if !matches!(param, ParamName::C | ParamName::B) {
        return Err(BifurcationError::UnsupportedParam(param));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi && lo > 0.0) {
        return Err(BifurcationError::InvalidRange(format!("bad bracket [{lo}, {hi}]")));
    }
    // an endpoint without E5 cannot establish a sign change
    let f_lo = trace_at(p, param, lo).map_err(|_| BifurcationError::NoSignChange)?;
    let f_hi = trace_at(p, param, hi).map_err(|_| BifurcationError::NoSignChange)?;
    if f_lo == 0.0 || f_hi == 0.0 {
        let value = if f_lo == 0.0 { lo } else { hi };
        return finish_hopf(p, param, value);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(BifurcationError::NoSignChange);
    }

    let (mut a, mut b, mut f_a) = (lo, hi, f_lo);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let f_mid = trace_at(p, param, mid)
            .map_err(|_| BifurcationError::E5Vanished { param, value: mid })?;
        if f_mid.abs() < HOPF_TOL || (b - a) < HOPF_TOL {
            return finish_hopf(p, param, mid);
        }
        if f_mid.signum() == f_a.signum() {
            a = mid;
            f_a = f_mid;
        } else {
            b = mid;
        }
    }
    finish_hopf(p, param, 0.5 * (a + b))
}

fn finish_hopf(
    p: &ModelParams,
    param: ParamName,
    value: f64,
) -> Result<CriticalPoint, BifurcationError> {
    let pv = p.with_value(param, value);
    let e5 = crate::equilibria::coexistence_points(&pv)
        .into_iter()
        .find(|e| e.label == Label::E5)
        .ok_or(BifurcationError::E5Vanished { param, value })?;
    let det = jacobian(&pv, e5.state).det();
    if det <= 0.0 {
        return Err(BifurcationError::DeterminantNotPositive { det });
    }
    Ok(CriticalPoint { kind: CriticalKind::Hopf, param, value, method: DetectionMethod::RootFind })
}

/// Scan `[lo, hi]` for trace sign changes and bisect each; intervals where
/// `E5` does not exist are skipped.
pub fn find_hopf_points(
    p: &ModelParams,
    param: ParamName,
    lo: f64,
    hi: f64,
    scan_steps: usize,
) -> Vec<CriticalPoint> {
    let steps = scan_steps.max(2);
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=steps {
        let x = lo + (hi - lo) * i as f64 / steps as f64;
        let fx = match trace_at(p, param, x) {
            Ok(v) => v,
            Err(_) => {
                prev = None;
                continue;
            }
        };
        if let Some((x0, f0)) = prev {
            if f0.signum() != fx.signum() {
                if let Ok(cp) = hopf_point(p, param, x0, x) {
                    out.push(cp);
                }
            }
        }
        prev = Some((x, fx));
    }
    out
}

/// Parameter values where a discriminant vanishes: the coexistence roots
/// collide where `c^2 = 4 b delta^2`, the axial roots where
/// `(K-w)^2 = 4K(h-w)`. Solved in closed form for the swept parameter;
/// only strictly positive solutions are reported.
pub fn fold_points(p: &ModelParams, param: ParamName) -> Vec<CriticalPoint> {
    let mut values: Vec<(CriticalKind, f64)> = Vec::new();
    match param {
        ParamName::C => values.push((CriticalKind::CoexistenceFold, 2.0 * p.delta * p.b.sqrt())),
        ParamName::B => {
            let half = p.c / (2.0 * p.delta);
            values.push((CriticalKind::CoexistenceFold, half * half));
        }
        ParamName::Delta => {
            values.push((CriticalKind::CoexistenceFold, p.c / (2.0 * p.b.sqrt())));
        }
        ParamName::H => {
            let kw = p.k + p.w;
            values.push((CriticalKind::AxialDegenerate, kw * kw / (4.0 * p.k)));
        }
        ParamName::W => {
            values.push((CriticalKind::AxialDegenerate, 2.0 * (p.k * p.h).sqrt() - p.k));
        }
        ParamName::K => {
            // (K-w)^2 = 4K(h-w)  =>  K^2 - 2(2h-w)K + w^2 = 0
            let disc = 4.0 * p.h * (p.h - p.w);
            if disc >= 0.0 {
                let s = disc.sqrt();
                values.push((CriticalKind::AxialDegenerate, (2.0 * p.h - p.w) + s));
                if s > 0.0 {
                    values.push((CriticalKind::AxialDegenerate, (2.0 * p.h - p.w) - s));
                }
            }
        }
        ParamName::R | ParamName::A => {}
    }
    values
        .into_iter()
        .filter(|(_, v)| v.is_finite() && *v > 0.0)
        .map(|(kind, value)| CriticalPoint {
            kind,
            param,
            value,
            method: DetectionMethod::Analytic,
        })
        .collect()
}

/// CSV export of a sweep: one data row per record, then one flagged row per
/// critical point. Schema:
///
/// ```text
/// param,value,N_min,N_max,P_min,P_max,attractor,labels
/// ```
///
/// where `labels` lists `label:classification` pairs joined by `|`, and
/// critical rows carry `critical` in the attractor column with
/// `kind:method` in `labels`.
pub fn diagram_export<W: Write>(
    records: &[SweepRecord],
    critical_points: &[CriticalPoint],
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "param,value,N_min,N_max,P_min,P_max,attractor,labels")?;
    for r in records {
        let labels = r
            .equilibria_summary
            .iter()
            .map(|e| format!("{}:{}", e.label, e.classification))
            .collect::<Vec<_>>()
            .join("|");
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.param, r.value, r.n_min, r.n_max, r.p_min, r.p_max, r.attractor, labels
        )?;
    }
    for c in critical_points {
        writeln!(
            out,
            "{},{},,,,,critical,{:?}:{:?}",
            c.param, c.value, c.kind, c.method
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::AttractorKey;
    use crate::scenarios::{conversion_study, protection_study};

    fn assert_close(x: f64, want: f64, tol: f64) {
        assert!((x - want).abs() <= tol, "got {x}, want {want} +- {tol}");
    }

    fn probe() -> State {
        State { n: 0.5, p: 0.3 }
    }

    #[test]
    fn transcritical_closed_forms() {
        let cp = transcritical_point(&conversion_study(0.1, 0.2), ParamName::C).unwrap();
        assert_close(cp.value, 0.16736, 1e-4);
        assert_eq!(cp.kind, CriticalKind::Transcritical);

        let cp = transcritical_point(&protection_study(0.7, 0.2), ParamName::B).unwrap();
        assert_close(cp.value, 0.96821, 1e-4);

        assert!(matches!(
            transcritical_point(&conversion_study(0.1, 0.2), ParamName::R),
            Err(BifurcationError::UnsupportedParam(_))
        ));
        assert!(matches!(
            transcritical_point(&conversion_study(0.1, 0.4), ParamName::C),
            Err(BifurcationError::NoTranscritical(_))
        ));
    }

    #[test]
    fn transcritical_zeroes_the_axial_determinant() {
        let p = conversion_study(0.1, 0.2);
        let cp = transcritical_point(&p, ParamName::C).unwrap();
        let pv = p.with_value(ParamName::C, cp.value);
        let e1 = *all_equilibria(&pv).find(Label::E1).unwrap();
        let det = jacobian(&pv, e1.state).det();
        assert!(det.abs() < 1e-8, "det = {det}");
    }

    #[test]
    fn transcritical_is_where_branches_meet() {
        // the coexistence root N5 equals the axial root N1 at the threshold
        let p = conversion_study(0.1, 0.2);
        let cp = transcritical_point(&p, ParamName::C).unwrap();
        let pv = p.with_value(ParamName::C, cp.value);
        let n1 = crate::equilibria::axial_roots(&pv)[0].1;
        let d2 = crate::equilibria::coexistence_discriminant(&pv);
        let n5 = (pv.c - d2.sqrt()) / (2.0 * pv.delta);
        assert!((n5 - n1).abs() < 1e-6, "N5 = {n5}, N1 = {n1}");
    }

    #[test]
    fn hopf_in_conversion_rate() {
        let cp = hopf_point(&conversion_study(0.3, 0.2), ParamName::C, 0.3, 0.4).unwrap();
        assert_close(cp.value, 0.359, 2e-3);
        assert_eq!(cp.method, DetectionMethod::RootFind);

        // trace changes sign across the root and det stays positive
        let p = conversion_study(0.3, 0.2);
        let below = coexistence_trace(&p.with_value(ParamName::C, cp.value - 0.005)).unwrap();
        let above = coexistence_trace(&p.with_value(ParamName::C, cp.value + 0.005)).unwrap();
        assert!(below < 0.0 && above > 0.0);
        for v in [cp.value - 0.005, cp.value + 0.005] {
            let pv = p.with_value(ParamName::C, v);
            let e5 = *all_equilibria(&pv).find(Label::E5).unwrap();
            assert!(jacobian(&pv, e5.state).det() > 0.0);
        }
    }

    #[test]
    fn hopf_in_protection_rate() {
        let cp = hopf_point(&protection_study(0.7, 0.2), ParamName::B, 0.3, 0.6).unwrap();
        assert_close(cp.value, 0.465, 2e-3);
    }

    #[test]
    fn hopf_requires_a_sign_change() {
        // E5 does not even exist at c = 0.15; surfaced as NoSignChange
        assert!(matches!(
            hopf_point(&conversion_study(0.3, 0.2), ParamName::C, 0.15, 0.2),
            Err(BifurcationError::NoSignChange)
        ));
        // trace negative at both ends
        assert!(matches!(
            hopf_point(&conversion_study(0.3, 0.2), ParamName::C, 0.175, 0.2),
            Err(BifurcationError::NoSignChange)
        ));
    }

    #[test]
    fn fold_values() {
        let folds = fold_points(&conversion_study(0.3, 0.2), ParamName::C);
        assert_eq!(folds.len(), 1);
        assert_eq!(folds[0].kind, CriticalKind::CoexistenceFold);
        assert_close(folds[0].value, 0.1673320, 1e-6);

        let folds = fold_points(&protection_study(0.7, 0.2), ParamName::B);
        assert_close(folds[0].value, 1.0, 1e-12);

        let folds = fold_points(&conversion_study(0.3, 0.2), ParamName::H);
        assert_eq!(folds[0].kind, CriticalKind::AxialDegenerate);
        assert_close(folds[0].value, 0.4225, 1e-12);

        assert!(fold_points(&conversion_study(0.3, 0.2), ParamName::R).is_empty());
    }

    #[test]
    fn sweep_progression_in_conversion_rate() {
        let records = sweep(
            &conversion_study(0.1, 0.2),
            ParamName::C,
            0.1,
            0.5,
            81,
            probe(),
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert_eq!(records.len(), 81);
        let key_of = |r: &SweepRecord| r.attractor.key();
        assert_eq!(key_of(&records[0]), AttractorKey::FixedPoint(Label::E1));
        assert_eq!(key_of(records.last().unwrap()), AttractorKey::LimitCycle);
        let first_e5 = records
            .iter()
            .position(|r| key_of(r) == AttractorKey::FixedPoint(Label::E5))
            .expect("a coexistence plateau exists");
        let first_cycle = records
            .iter()
            .position(|r| key_of(r) == AttractorKey::LimitCycle)
            .expect("a cycle region exists");
        assert!(first_e5 < first_cycle);

        // one data row per record plus one flagged row per critical point
        let crits = stability_changes(&records);
        assert!(!crits.is_empty());
        let mut buf = Vec::new();
        diagram_export(&records, &crits, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 81 + crits.len());
    }

    #[test]
    fn sweep_progression_in_protection_rate() {
        let records = sweep(
            &protection_study(0.3, 0.2),
            ParamName::B,
            0.1,
            1.2,
            111,
            probe(),
            &IntegratorConfig::default(),
        )
        .unwrap();
        let key_of = |r: &SweepRecord| r.attractor.key();
        assert_eq!(key_of(&records[0]), AttractorKey::LimitCycle);
        assert_eq!(key_of(records.last().unwrap()), AttractorKey::FixedPoint(Label::E1));
        let first_e5 = records
            .iter()
            .position(|r| key_of(r) == AttractorKey::FixedPoint(Label::E5))
            .expect("a coexistence plateau exists");
        let last_cycle = records
            .iter()
            .rposition(|r| key_of(r) == AttractorKey::LimitCycle)
            .unwrap();
        assert!(last_cycle < first_e5);
    }

    #[test]
    fn constant_regime_sweep_is_flat() {
        let records = sweep(
            &conversion_study(0.1, 0.2),
            ParamName::C,
            0.11,
            0.12,
            2,
            probe(),
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert_eq!(records[0].attractor.key(), records[1].attractor.key());
    }

    #[test]
    fn sweep_rejects_bad_ranges() {
        let p = conversion_study(0.1, 0.2);
        let cfg = IntegratorConfig::default();
        assert!(sweep(&p, ParamName::C, 0.5, 0.1, 5, probe(), &cfg).is_err());
        assert!(sweep(&p, ParamName::C, -0.1, 0.5, 5, probe(), &cfg).is_err());
        assert!(sweep(&p, ParamName::C, 0.1, 0.5, 1, probe(), &cfg).is_err());
    }

    #[test]
    fn export_appends_critical_rows() {
        let records = sweep(
            &conversion_study(0.1, 0.2),
            ParamName::C,
            0.11,
            0.12,
            2,
            probe(),
            &IntegratorConfig::default(),
        )
        .unwrap();
        let crits = [
            CriticalPoint {
                kind: CriticalKind::Transcritical,
                param: ParamName::C,
                value: 0.167,
                method: DetectionMethod::Analytic,
            },
            CriticalPoint {
                kind: CriticalKind::Hopf,
                param: ParamName::C,
                value: 0.359,
                method: DetectionMethod::RootFind,
            },
        ];
        let mut buf = Vec::new();
        diagram_export(&records, &crits, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 2 + 2);
        assert_eq!(lines[0], "param,value,N_min,N_max,P_min,P_max,attractor,labels");
        assert!(lines[3].contains("critical"));

        let mut buf = Vec::new();
        diagram_export(&records, &[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 3);
    }
}
