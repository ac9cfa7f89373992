//! Trajectory integration with an embedded Dormand-Prince 5(4) pair and
//! long-run attractor classification.
//!
//! The first quadrant is invariant for the exact flow, so the integrator
//! only ever sees roundoff-scale violations: components in `(-1e-12, 0)`
//! are clamped to zero after an accepted step, anything more negative
//! rejects the step.

use std::io::Write;

use thiserror::Error;

use crate::equilibria::{ExistenceReport, Label};
use crate::model::{vector_field, ModelParams, State};

pub const DEFAULT_REL_TOL: f64 = 1e-8;
pub const DEFAULT_ABS_TOL: f64 = 1e-10;
pub const DEFAULT_T_END: f64 = 2000.0;

/// Fraction of the time span treated as the post-transient tail.
pub const TAIL_FRAC: f64 = 0.25;
/// A tail that stays this close to a known equilibrium is that fixed point.
pub const FP_TOL: f64 = 1e-3;
/// Minimum relative tail amplitude (against the tail mean) for a cycle.
pub const CYCLE_AMP_TOL: f64 = 1e-2;

/// Negative excursions smaller than this are roundoff and clamp to zero;
/// larger ones reject the step.
const NEG_CLAMP: f64 = 1e-12;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrateError {
    #[error("integrator configuration invalid: {0}")]
    InvalidConfig(String),
    #[error("initial state must lie in the first quadrant (got N = {n}, P = {p})")]
    InvalidInitialState { n: f64, p: f64 },
    #[error("required step size fell below h_min = {h_min} at t = {t}")]
    StepSizeUnderflow { t: f64, h_min: f64 },
    #[error("step budget of {max_steps} exhausted at t = {t}")]
    MaxStepsExceeded { t: f64, max_steps: usize },
}

/// Tolerances and step bounds for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub t_end: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: DEFAULT_REL_TOL,
            abs_tol: DEFAULT_ABS_TOL,
            h_init: 1e-2,
            h_min: 1e-10,
            h_max: 5.0,
            t_end: DEFAULT_T_END,
            max_steps: 1_000_000,
        }
    }
}

impl IntegratorConfig {
    /// Default configuration with a different horizon.
    pub fn with_t_end(t_end: f64) -> Self {
        IntegratorConfig { t_end, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), IntegrateError> {
        let bad = |msg: String| Err(IntegrateError::InvalidConfig(msg));
        if !(self.rel_tol.is_finite() && self.rel_tol > 0.0) {
            return bad(format!("rel_tol must be positive (got {})", self.rel_tol));
        }
        if !(self.abs_tol.is_finite() && self.abs_tol > 0.0) {
            return bad(format!("abs_tol must be positive (got {})", self.abs_tol));
        }
        if !(self.h_min > 0.0 && self.h_min <= self.h_init && self.h_init <= self.h_max) {
            return bad(format!(
                "step bounds must satisfy 0 < h_min <= h_init <= h_max (got {}, {}, {})",
                self.h_min, self.h_init, self.h_max
            ));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return bad(format!("t_end must be positive (got {})", self.t_end));
        }
        if self.max_steps == 0 {
            return bad("max_steps must be at least 1".to_string());
        }
        Ok(())
    }
}

/// A time-stamped solution sequence on `[0, t_end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub params: ModelParams,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> State {
        *self.states.last().expect("trajectory holds at least the initial state")
    }

    /// Index of the first sample inside the trailing `frac` of the time span.
    pub fn tail_start(&self, frac: f64) -> usize {
        let t0 = self.times[0];
        let t1 = *self.times.last().unwrap();
        let cut = t1 - frac * (t1 - t0);
        self.times.partition_point(|&t| t < cut)
    }

    pub fn tail_states(&self, frac: f64) -> &[State] {
        &self.states[self.tail_start(frac)..]
    }

    /// CSV export with header `t,N,P`; floats print in their shortest
    /// round-trip form.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,N,P")?;
        for (t, s) in self.times.iter().zip(&self.states) {
            writeln!(out, "{},{},{}", t, s.n, s.p)?;
        }
        Ok(())
    }
}

// Dormand-Prince 5(4) coefficients.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
// Fifth-order weights; the seventh stage lands on the solution (FSAL).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
// Difference between the fifth- and embedded fourth-order weights.
const ERR: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

#[inline]
fn axpy(y: (f64, f64), h: f64, coeffs: &[f64], k: &[(f64, f64); 7]) -> (f64, f64) {
    let mut out = y;
    for (c, ki) in coeffs.iter().zip(k.iter()) {
        out.0 += h * c * ki.0;
        out.1 += h * c * ki.1;
    }
    out
}

/// Integrate the model from `s0` over `[0, cfg.t_end]` with adaptive step
/// control: the local error estimate per step is held below
/// `abs_tol + rel_tol * |state|` componentwise (RMS-combined).
pub fn integrate(
    p: &ModelParams,
    s0: State,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, IntegrateError> {
    cfg.validate()?;
    p.validate().map_err(|e| IntegrateError::InvalidConfig(e.to_string()))?;
    if !(s0.is_finite() && s0.n >= 0.0 && s0.p >= 0.0) {
        return Err(IntegrateError::InvalidInitialState { n: s0.n, p: s0.p });
    }

    let mut t = 0.0_f64;
    let mut y = (s0.n, s0.p);
    let mut h = cfg.h_init.min(cfg.t_end);
    let mut times = vec![0.0];
    let mut states = vec![s0];
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut steps = 0usize;

    let f = |y: (f64, f64)| vector_field(p, State { n: y.0, p: y.1 });
    let mut k1 = f(y);

    while t < cfg.t_end {
        steps += 1;
        if steps > cfg.max_steps {
            return Err(IntegrateError::MaxStepsExceeded { t, max_steps: cfg.max_steps });
        }
        // land exactly on the horizon
        let landing = t + h >= cfg.t_end;
        if landing {
            h = cfg.t_end - t;
        }

        let mut k = [(0.0, 0.0); 7];
        k[0] = k1;
        k[1] = f(axpy(y, h, &A2, &k));
        k[2] = f(axpy(y, h, &A3, &k));
        k[3] = f(axpy(y, h, &A4, &k));
        k[4] = f(axpy(y, h, &A5, &k));
        k[5] = f(axpy(y, h, &A6, &k));
        let mut y5 = axpy(y, h, &B5[..6], &k);
        k[6] = f(y5);

        let err_vec = axpy((0.0, 0.0), h, &ERR, &k);
        let sc_n = cfg.abs_tol + cfg.rel_tol * y.0.abs().max(y5.0.abs());
        let sc_p = cfg.abs_tol + cfg.rel_tol * y.1.abs().max(y5.1.abs());
        let e_n = err_vec.0 / sc_n;
        let e_p = err_vec.1 / sc_p;
        let err = (0.5 * (e_n * e_n + e_p * e_p)).sqrt();

        let quadrant_violation = y5.0 <= -NEG_CLAMP || y5.1 <= -NEG_CLAMP;
        let accept = err.is_finite() && err <= 1.0 && !quadrant_violation && y5.0.is_finite() && y5.1.is_finite();

        if accept {
            // clamp roundoff-scale negatives back onto the axes
            let mut clamped = false;
            if y5.0 < 0.0 {
                y5.0 = 0.0;
                clamped = true;
            }
            if y5.1 < 0.0 {
                y5.1 = 0.0;
                clamped = true;
            }
            t = if landing { cfg.t_end } else { t + h };
            y = y5;
            // FSAL: the last stage is the derivative at the accepted state
            k1 = if clamped { f(y) } else { k[6] };
            accepted += 1;
            times.push(t);
            states.push(State { n: y.0, p: y.1 });

            let fac = if err > 0.0 {
                (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
            } else {
                FAC_MAX
            };
            h = (h * fac).min(cfg.h_max);
        } else {
            rejected += 1;
            let fac = if err.is_finite() && err > 0.0 {
                (SAFETY * err.powf(-0.2)).clamp(0.1, 0.5)
            } else {
                0.5
            };
            h *= fac;
            if h < cfg.h_min {
                return Err(IntegrateError::StepSizeUnderflow { t, h_min: cfg.h_min });
            }
        }
    }

    Ok(Trajectory {
        times,
        states,
        params: *p,
        accepted_steps: accepted,
        rejected_steps: rejected,
    })
}

/// What a trajectory settles onto.
#[derive(Debug, Clone, PartialEq)]
pub enum AttractorId {
    FixedPoint {
        label: Label,
        state: State,
    },
    LimitCycle {
        n_min: f64,
        n_max: f64,
        p_min: f64,
        p_max: f64,
        /// Mean spacing of upward mean-crossings of `N` over the tail.
        period: f64,
    },
    Undetermined,
}

/// Coarse identity of an attractor, used to group cells and sweep records
/// that land on the same invariant set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AttractorKey {
    FixedPoint(Label),
    LimitCycle,
    Undetermined,
}

impl AttractorId {
    pub fn key(&self) -> AttractorKey {
        match self {
            AttractorId::FixedPoint { label, .. } => AttractorKey::FixedPoint(*label),
            AttractorId::LimitCycle { .. } => AttractorKey::LimitCycle,
            AttractorId::Undetermined => AttractorKey::Undetermined,
        }
    }
}

impl std::fmt::Display for AttractorKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AttractorKey::FixedPoint(l) => f.write_str(l.as_str()),
            AttractorKey::LimitCycle => f.write_str("LimitCycle"),
            AttractorKey::Undetermined => f.write_str("Undetermined"),
        }
    }
}

impl std::fmt::Display for AttractorId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AttractorId::FixedPoint { label, .. } => write!(f, "FixedPoint({label})"),
            AttractorId::LimitCycle { .. } => f.write_str("LimitCycle"),
            AttractorId::Undetermined => f.write_str("Undetermined"),
        }
    }
}

fn tail_extrema(states: &[State]) -> (f64, f64, f64, f64) {
    let mut n_min = f64::INFINITY;
    let mut n_max = f64::NEG_INFINITY;
    let mut p_min = f64::INFINITY;
    let mut p_max = f64::NEG_INFINITY;
    for s in states {
        n_min = n_min.min(s.n);
        n_max = n_max.max(s.n);
        p_min = p_min.min(s.p);
        p_max = p_max.max(s.p);
    }
    (n_min, n_max, p_min, p_max)
}

/// Decide what the trajectory tail settled onto: a known equilibrium, a
/// bounded oscillation, or neither.
pub fn classify_attractor(
    _p: &ModelParams,
    traj: &Trajectory,
    eqs: &ExistenceReport,
) -> AttractorId {
    let start = traj.tail_start(TAIL_FRAC);
    let tail = &traj.states[start..];
    let tail_times = &traj.times[start..];
    if tail.len() < 2 || tail.iter().any(|s| !s.is_finite()) {
        return AttractorId::Undetermined;
    }

    // fixed point: the whole tail stays within FP_TOL of one equilibrium
    let mut best: Option<(f64, &crate::equilibria::Equilibrium)> = None;
    for e in &eqs.equilibria {
        let worst = tail.iter().map(|s| s.distance(&e.state)).fold(0.0_f64, f64::max);
        if worst <= FP_TOL && best.is_none_or(|(d, _)| worst < d) {
            best = Some((worst, e));
        }
    }
    if let Some((_, e)) = best {
        return AttractorId::FixedPoint { label: e.label, state: e.state };
    }

    // limit cycle: both components oscillate with non-trivial relative
    // amplitude and N shows repeated upward mean-crossings
    let (n_min, n_max, p_min, p_max) = tail_extrema(tail);
    let n_mean = tail.iter().map(|s| s.n).sum::<f64>() / tail.len() as f64;
    let p_mean = tail.iter().map(|s| s.p).sum::<f64>() / tail.len() as f64;
    let n_rel = (n_max - n_min) / n_mean.abs().max(1e-9);
    let p_rel = (p_max - p_min) / p_mean.abs().max(1e-9);
    if n_rel > CYCLE_AMP_TOL && p_rel > CYCLE_AMP_TOL {
        let mut crossings: Vec<f64> = Vec::new();
        for i in 1..tail.len() {
            let prev = tail[i - 1].n - n_mean;
            let cur = tail[i].n - n_mean;
            if prev < 0.0 && cur >= 0.0 {
                let frac = prev / (prev - cur);
                crossings.push(tail_times[i - 1] + frac * (tail_times[i] - tail_times[i - 1]));
            }
        }
        if crossings.len() >= 2 {
            let period =
                (crossings.last().unwrap() - crossings[0]) / (crossings.len() - 1) as f64;
            return AttractorId::LimitCycle { n_min, n_max, p_min, p_max, period };
        }
    }

    AttractorId::Undetermined
}
