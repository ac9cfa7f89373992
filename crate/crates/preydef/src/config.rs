//! Run configuration: a flat `key = value` format with bracketed sections
//! and `#` comments.
//!
//! Recognized sections are `[model]`, `[integrator]`, `[sweep]`, and
//! `[grid]`. Parsing is strict: unknown sections or keys, duplicate keys,
//! and malformed lines are rejected with the offending line number, and
//! every positivity/ordering constraint of the underlying types is checked
//! at build time with the offending key named.
//!
//! ```text
//! # conversion-rate study
//! [model]
//! r = 1
//! k = 1
//! w = 0.3
//! h = 0.2
//! a = 0.6
//! b = 0.7
//! c = 0.3
//! delta = 0.1
//!
//! [sweep]
//! param = c
//! lo = 0.1
//! hi = 0.5
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::dynamics::IntegratorConfig;
use crate::model::{ModelParams, ParamName, State};

/// Default number of sweep values for diagram runs.
pub const DEFAULT_SWEEP_STEPS: usize = 201;
/// Standard initial state for single-trajectory runs and sweep probes.
pub const DEFAULT_INITIAL: State = State { n: 0.5, p: 0.3 };
/// Default basin window and resolution.
pub const DEFAULT_GRID: GridSpec =
    GridSpec { n_lo: 0.0, n_hi: 1.0, p_lo: 0.0, p_hi: 1.0, n_res: 41, p_res: 41 };

const SECTIONS: [&str; 4] = ["model", "integrator", "sweep", "grid"];

const MODEL_KEYS: [&str; 8] = ["r", "k", "w", "h", "a", "b", "c", "delta"];
const INTEGRATOR_KEYS: [&str; 7] =
    ["rel_tol", "abs_tol", "h_init", "h_min", "h_max", "t_end", "max_steps"];
const SWEEP_KEYS: [&str; 6] = ["param", "lo", "hi", "steps", "probe_n0", "probe_p0"];
const GRID_KEYS: [&str; 6] = ["n_lo", "n_hi", "p_lo", "p_hi", "n_res", "p_res"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("config key `{key}`: {msg}")]
    Validation { key: String, msg: String },
}

fn syntax(line: usize, msg: impl Into<String>) -> ConfigError {
    ConfigError::Syntax { line, msg: msg.into() }
}

fn invalid(key: impl Into<String>, msg: impl Into<String>) -> ConfigError {
    ConfigError::Validation { key: key.into(), msg: msg.into() }
}

/// Ordered raw `section.key = value` assignments, before validation.
///
/// This is the override point for command-line flags: [`ConfigDoc::set`]
/// replaces an existing value where a duplicate key inside the file text
/// would be rejected.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigDoc {
    values: BTreeMap<(String, String), String>,
}

impl ConfigDoc {
    /// Parse the textual format. Syntax errors carry 1-based line numbers.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut doc = ConfigDoc::default();
        let mut section: Option<&str> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let Some(name) = name.strip_suffix(']') else {
                    return Err(syntax(line_no, format!("unterminated section header `{line}`")));
                };
                let name = name.trim();
                let Some(known) = SECTIONS.iter().find(|s| **s == name) else {
                    return Err(syntax(
                        line_no,
                        format!("unknown section `[{name}]` (expected one of [model], [integrator], [sweep], [grid])"),
                    ));
                };
                section = Some(known);
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(syntax(line_no, format!("expected `key = value`, got `{line}`")));
            };
            let key = key.trim();
            let value = value.trim();
            let Some(section) = section else {
                return Err(syntax(line_no, format!("key `{key}` appears before any section header")));
            };
            let allowed: &[&str] = match section {
                "model" => &MODEL_KEYS,
                "integrator" => &INTEGRATOR_KEYS,
                "sweep" => &SWEEP_KEYS,
                "grid" => &GRID_KEYS,
                _ => unreachable!(),
            };
            if !allowed.contains(&key) {
                return Err(syntax(line_no, format!("unknown key `{key}` in section [{section}]")));
            }
            if value.is_empty() {
                return Err(syntax(line_no, format!("key `{key}` has an empty value")));
            }
            let prev = doc.values.insert((section.to_string(), key.to_string()), value.to_string());
            if prev.is_some() {
                return Err(syntax(line_no, format!("duplicate key `{key}` in section [{section}]")));
            }
        }
        Ok(doc)
    }

    /// Insert or replace one value; `section` and `key` must be known.
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<(), ConfigError> {
        let allowed: &[&str] = match section {
            "model" => &MODEL_KEYS,
            "integrator" => &INTEGRATOR_KEYS,
            "sweep" => &SWEEP_KEYS,
            "grid" => &GRID_KEYS,
            _ => {
                return Err(invalid(
                    format!("{section}.{key}"),
                    format!("unknown section `{section}`"),
                ))
            }
        };
        if !allowed.contains(&key) {
            return Err(invalid(
                format!("{section}.{key}"),
                format!("unknown key `{key}` in section [{section}]"),
            ));
        }
        self.values.insert((section.to_string(), key.to_string()), value.trim().to_string());
        Ok(())
    }

    /// Apply an override of the form `section.key=value`.
    pub fn set_assignment(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let Some((path, value)) = assignment.split_once('=') else {
            return Err(invalid(assignment, "expected `section.key=value`"));
        };
        let Some((section, key)) = path.trim().split_once('.') else {
            return Err(invalid(path.trim(), "expected `section.key=value`"));
        };
        self.set(section.trim(), key.trim(), value)
    }

    fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.values.get(&(section.to_string(), key.to_string())).map(|s| s.as_str())
    }

    fn has_section(&self, section: &str) -> bool {
        self.values.keys().any(|(s, _)| s == section)
    }
}

/// Sweep request: the axis, its range, the sample count, and the probe
/// trajectory's initial state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub param: ParamName,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
    pub probe: State,
}

/// Basin window and resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n_lo: f64,
    pub n_hi: f64,
    pub p_lo: f64,
    pub p_hi: f64,
    pub n_res: usize,
    pub p_res: usize,
}

/// A fully validated run configuration.
///
/// `initial` is the single-trajectory initial state; it has no config-file
/// key and is set from command-line flags (default [`DEFAULT_INITIAL`]).
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub integrator: IntegratorConfig,
    pub sweep: Option<SweepSpec>,
    pub grid: Option<GridSpec>,
    pub initial: State,
}

fn parse_f64(doc: &ConfigDoc, section: &str, key: &str) -> Result<Option<f64>, ConfigError> {
    match doc.get(section, key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(Some)
            .ok_or_else(|| invalid(format!("{section}.{key}"), format!("not a finite number: `{raw}`"))),
    }
}

fn parse_usize(doc: &ConfigDoc, section: &str, key: &str) -> Result<Option<usize>, ConfigError> {
    match doc.get(section, key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<usize>()
            .map(Some)
            .map_err(|_| invalid(format!("{section}.{key}"), format!("not a non-negative integer: `{raw}`"))),
    }
}

fn require_f64(doc: &ConfigDoc, section: &str, key: &str) -> Result<f64, ConfigError> {
    parse_f64(doc, section, key)?
        .ok_or_else(|| invalid(format!("{section}.{key}"), "required key is missing"))
}

impl RunConfig {
    /// Validate a raw document into a run configuration.
    pub fn from_doc(doc: &ConfigDoc) -> Result<Self, ConfigError> {
        // model: all eight constants are required
        let mut vals = [0.0_f64; 8];
        for (slot, key) in vals.iter_mut().zip(MODEL_KEYS) {
            *slot = require_f64(doc, "model", key)?;
        }
        let [r, k, w, h, a, b, c, delta] = vals;
        let params = ModelParams::new(r, k, w, h, a, b, c, delta)
            .map_err(|e| match e {
                crate::model::ModelError::NonPositiveParam { name, value } => invalid(
                    format!("model.{name}"),
                    format!("must be strictly positive and finite (got {value})"),
                ),
                other => invalid("model", other.to_string()),
            })?;

        // integrator: every key optional, defaults applied
        let d = IntegratorConfig::default();
        let integrator = IntegratorConfig {
            rel_tol: parse_f64(doc, "integrator", "rel_tol")?.unwrap_or(d.rel_tol),
            abs_tol: parse_f64(doc, "integrator", "abs_tol")?.unwrap_or(d.abs_tol),
            h_init: parse_f64(doc, "integrator", "h_init")?.unwrap_or(d.h_init),
            h_min: parse_f64(doc, "integrator", "h_min")?.unwrap_or(d.h_min),
            h_max: parse_f64(doc, "integrator", "h_max")?.unwrap_or(d.h_max),
            t_end: parse_f64(doc, "integrator", "t_end")?.unwrap_or(d.t_end),
            max_steps: parse_usize(doc, "integrator", "max_steps")?.unwrap_or(d.max_steps),
        };
        integrator
            .validate()
            .map_err(|e| invalid("integrator", e.to_string()))?;

        let sweep = if doc.has_section("sweep") {
            let param: ParamName = doc
                .get("sweep", "param")
                .ok_or_else(|| invalid("sweep.param", "required key is missing"))?
                .parse()
                .map_err(|e| invalid("sweep.param", e))?;
            let lo = require_f64(doc, "sweep", "lo")?;
            let hi = require_f64(doc, "sweep", "hi")?;
            let steps = parse_usize(doc, "sweep", "steps")?.unwrap_or(DEFAULT_SWEEP_STEPS);
            let probe = State {
                n: parse_f64(doc, "sweep", "probe_n0")?.unwrap_or(DEFAULT_INITIAL.n),
                p: parse_f64(doc, "sweep", "probe_p0")?.unwrap_or(DEFAULT_INITIAL.p),
            };
            if lo <= 0.0 {
                return Err(invalid("sweep.lo", format!("swept parameter must stay positive (got {lo})")));
            }
            if hi <= lo {
                return Err(invalid("sweep.hi", format!("must exceed sweep.lo = {lo} (got {hi})")));
            }
            if steps < 2 {
                return Err(invalid("sweep.steps", format!("need at least 2 values (got {steps})")));
            }
            if probe.n < 0.0 || probe.p < 0.0 {
                return Err(invalid("sweep.probe_n0/probe_p0", "probe state must lie in the first quadrant"));
            }
            Some(SweepSpec { param, lo, hi, steps, probe })
        } else {
            None
        };

        let grid = if doc.has_section("grid") {
            let g = GridSpec {
                n_lo: parse_f64(doc, "grid", "n_lo")?.unwrap_or(DEFAULT_GRID.n_lo),
                n_hi: parse_f64(doc, "grid", "n_hi")?.unwrap_or(DEFAULT_GRID.n_hi),
                p_lo: parse_f64(doc, "grid", "p_lo")?.unwrap_or(DEFAULT_GRID.p_lo),
                p_hi: parse_f64(doc, "grid", "p_hi")?.unwrap_or(DEFAULT_GRID.p_hi),
                n_res: parse_usize(doc, "grid", "n_res")?.unwrap_or(DEFAULT_GRID.n_res),
                p_res: parse_usize(doc, "grid", "p_res")?.unwrap_or(DEFAULT_GRID.p_res),
            };
            for (key, lo, hi) in [("n", g.n_lo, g.n_hi), ("p", g.p_lo, g.p_hi)] {
                if !(lo >= 0.0 && hi >= lo) {
                    return Err(invalid(
                        format!("grid.{key}_lo/{key}_hi"),
                        format!("need 0 <= lo <= hi (got [{lo}, {hi}])"),
                    ));
                }
            }
            if g.n_res < 2 || g.p_res < 2 {
                return Err(invalid("grid.n_res/p_res", format!("resolution must be at least 2x2 (got {}x{})", g.n_res, g.p_res)));
            }
            Some(g)
        } else {
            None
        };

        Ok(RunConfig { params, integrator, sweep, grid, initial: DEFAULT_INITIAL })
    }

    /// Render back into the textual format. Floats print in their shortest
    /// round-trip form, so `parse_config(cfg.to_config_string())` recovers
    /// an identical configuration.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let p = &self.params;
        writeln!(s, "[model]").unwrap();
        for (key, v) in MODEL_KEYS
            .iter()
            .zip([p.r, p.k, p.w, p.h, p.a, p.b, p.c, p.delta])
        {
            writeln!(s, "{key} = {v}").unwrap();
        }
        let i = &self.integrator;
        writeln!(s, "\n[integrator]").unwrap();
        writeln!(s, "rel_tol = {}", i.rel_tol).unwrap();
        writeln!(s, "abs_tol = {}", i.abs_tol).unwrap();
        writeln!(s, "h_init = {}", i.h_init).unwrap();
        writeln!(s, "h_min = {}", i.h_min).unwrap();
        writeln!(s, "h_max = {}", i.h_max).unwrap();
        writeln!(s, "t_end = {}", i.t_end).unwrap();
        writeln!(s, "max_steps = {}", i.max_steps).unwrap();
        if let Some(sw) = &self.sweep {
            writeln!(s, "\n[sweep]").unwrap();
            writeln!(s, "param = {}", sw.param).unwrap();
            writeln!(s, "lo = {}", sw.lo).unwrap();
            writeln!(s, "hi = {}", sw.hi).unwrap();
            writeln!(s, "steps = {}", sw.steps).unwrap();
            writeln!(s, "probe_n0 = {}", sw.probe.n).unwrap();
            writeln!(s, "probe_p0 = {}", sw.probe.p).unwrap();
        }
        if let Some(g) = &self.grid {
            writeln!(s, "\n[grid]").unwrap();
            writeln!(s, "n_lo = {}", g.n_lo).unwrap();
            writeln!(s, "n_hi = {}", g.n_hi).unwrap();
            writeln!(s, "p_lo = {}", g.p_lo).unwrap();
            writeln!(s, "p_hi = {}", g.p_hi).unwrap();
            writeln!(s, "n_res = {}", g.n_res).unwrap();
            writeln!(s, "p_res = {}", g.p_res).unwrap();
        }
        s
    }
}

/// Parse and validate a configuration from text.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    RunConfig::from_doc(&ConfigDoc::parse(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCENARIO: &str = "\
# conversion study, weak Allee effect
[model]
r = 1
k = 1
w = 0.3
h = 0.2
a = 0.6
b = 0.7
c = 0.3
delta = 0.1
";

    #[test]
    fn parses_a_model_only_scenario() {
        let cfg = parse_config(SCENARIO).unwrap();
        assert_eq!(cfg.params.c, 0.3);
        assert_eq!(cfg.params.delta, 0.1);
        assert_eq!(cfg.integrator.rel_tol, 1e-8);
        assert_eq!(cfg.integrator.t_end, 2000.0);
        assert!(cfg.sweep.is_none() && cfg.grid.is_none());
        assert_eq!(cfg.initial, DEFAULT_INITIAL);
    }

    #[test]
    fn rejects_negative_parameters_by_name() {
        let text = SCENARIO.replace("r = 1", "r = -1");
        let err = parse_config(&text).unwrap_err();
        match err {
            ConfigError::Validation { key, .. } => assert_eq!(key, "model.r"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn missing_integrator_keys_take_defaults() {
        let text = format!("{SCENARIO}\n[integrator]\nt_end = 500\n");
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.integrator.t_end, 500.0);
        assert_eq!(cfg.integrator.rel_tol, 1e-8);
        assert_eq!(cfg.integrator.abs_tol, 1e-10);
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = ConfigDoc::parse("[model]\nr 1\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 2, .. }), "{err}");

        let err = ConfigDoc::parse("[model]\nr = 1\nr = 2\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 3, .. }), "{err}");

        let err = ConfigDoc::parse("[orbit]\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 1, .. }), "{err}");

        let err = ConfigDoc::parse("r = 1\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 1, .. }), "{err}");

        let err = ConfigDoc::parse("[model]\nq = 1\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 2, .. }), "{err}");
    }

    #[test]
    fn sweep_section_is_validated() {
        let good = format!("{SCENARIO}\n[sweep]\nparam = c\nlo = 0.1\nhi = 0.5\n");
        let cfg = parse_config(&good).unwrap();
        let sweep = cfg.sweep.unwrap();
        assert_eq!(sweep.param, ParamName::C);
        assert_eq!(sweep.steps, DEFAULT_SWEEP_STEPS);
        assert_eq!(sweep.probe, DEFAULT_INITIAL);

        let bad = format!("{SCENARIO}\n[sweep]\nparam = c\nlo = 0.5\nhi = 0.1\n");
        assert!(matches!(parse_config(&bad), Err(ConfigError::Validation { key, .. }) if key == "sweep.hi"));

        let bad = format!("{SCENARIO}\n[sweep]\nparam = q\nlo = 0.1\nhi = 0.5\n");
        assert!(parse_config(&bad).is_err());
    }

    #[test]
    fn grid_defaults_and_validation() {
        let cfg = parse_config(&format!("{SCENARIO}\n[grid]\nn_res = 21\n")).unwrap();
        let g = cfg.grid.unwrap();
        assert_eq!(g.n_res, 21);
        assert_eq!(g.p_res, 41);
        assert_eq!((g.n_lo, g.n_hi), (0.0, 1.0));

        let bad = format!("{SCENARIO}\n[grid]\np_lo = -0.5\n");
        assert!(parse_config(&bad).is_err());
    }

    #[test]
    fn zero_horizon_is_a_validation_error() {
        let text = format!("{SCENARIO}\n[integrator]\nt_end = 0\n");
        assert!(matches!(
            parse_config(&text),
            Err(ConfigError::Validation { key, .. }) if key == "integrator"
        ));
    }

    #[test]
    fn round_trips_through_serialization() {
        let text = format!(
            "{SCENARIO}\n[integrator]\nrel_tol = 1e-9\n\n[sweep]\nparam = b\nlo = 0.1\nhi = 1.2\nsteps = 111\n\n[grid]\nn_res = 21\np_res = 31\n"
        );
        let cfg = parse_config(&text).unwrap();
        let round = parse_config(&cfg.to_config_string()).unwrap();
        assert_eq!(cfg, round);
    }

    #[test]
    fn overrides_replace_file_values() {
        let mut doc = ConfigDoc::parse(SCENARIO).unwrap();
        doc.set_assignment("model.c=0.4").unwrap();
        doc.set_assignment("integrator.t_end=100").unwrap();
        let cfg = RunConfig::from_doc(&doc).unwrap();
        assert_eq!(cfg.params.c, 0.4);
        assert_eq!(cfg.integrator.t_end, 100.0);
        assert!(doc.set_assignment("model.zeta=1").is_err());
        assert!(doc.set_assignment("nonsense").is_err());
    }

    #[test]
    fn comments_and_whitespace_are_tolerated() {
        let text = "  # leading comment\n[model]  # trailing\n  r = 1  # rate\nk=1\nw = 0.3\nh = 0.2\na = 0.6\nb = 0.7\nc = 0.3\ndelta = 0.1\n";
        assert!(parse_config(text).is_ok());
    }
}
