//! Flag maps (modes), mode files on disk, and time-sliced schedules of
//! modes.
//!
//! A mode file is UTF-8 lines of `name value` with `%` comments; unknown
//! flag names are rejected at load time. A schedule file is lines of
//! `modename seconds`; when run against a wall-clock budget the slices
//! are scaled so they sum to it.

use std::collections::HashMap;
use std::time::Duration;

use thiserror::Error;

use crate::engine::{Engine, SearchResult, SearchStatus, TraceEvent};
use crate::tptp::Problem;

/// A full flag assignment for one engine run.
///
/// Priorities order the command queue (lower runs sooner); by default
/// propositions are processed before instantiations, and matings and
/// confrontations come last. `sat_search_delay` keeps the SAT core in
/// propagate-only mode until the queue empties. The `enable_*` flags
/// switch the rules that go beyond the minimal core on and off.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flags {
    pub prio_process: u32,
    pub prio_instantiate: u32,
    pub prio_mate: u32,
    pub prio_confront: u32,
    pub default_inst_priority: u32,
    pub sat_search_delay: bool,
    pub enable_decompose: bool,
    pub enable_choice: bool,
    pub enable_neq_fun: bool,
    pub enable_neg_imp: bool,
}

impl Default for Flags {
    fn default() -> Flags {
        Flags {
            prio_process: 0,
            prio_instantiate: 2,
            default_inst_priority: 3,
            prio_mate: 4,
            prio_confront: 5,
            sat_search_delay: false,
            enable_decompose: true,
            enable_choice: true,
            enable_neq_fun: true,
            enable_neg_imp: true,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModeError {
    #[error("line {line}: unknown flag '{name}'")]
    UnknownFlag { name: String, line: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Flags {
    fn set(&mut self, name: &str, value: &str, line: usize) -> Result<(), ModeError> {
        let int = |v: &str| -> Result<u32, ModeError> {
            v.parse().map_err(|_| ModeError::Parse {
                line,
                msg: format!("expected an integer, found '{v}'"),
            })
        };
        let boolean = |v: &str| -> Result<bool, ModeError> {
            match v {
                "true" => Ok(true),
                "false" => Ok(false),
                _ => Err(ModeError::Parse {
                    line,
                    msg: format!("expected true or false, found '{v}'"),
                }),
            }
        };
        match name {
            "prio_process" => self.prio_process = int(value)?,
            "prio_instantiate" => self.prio_instantiate = int(value)?,
            "prio_mate" => self.prio_mate = int(value)?,
            "prio_confront" => self.prio_confront = int(value)?,
            "default_inst_priority" => self.default_inst_priority = int(value)?,
            "sat_search_delay" => self.sat_search_delay = boolean(value)?,
            "enable_decompose" => self.enable_decompose = boolean(value)?,
            "enable_choice" => self.enable_choice = boolean(value)?,
            "enable_neq_fun" => self.enable_neq_fun = boolean(value)?,
            "enable_neg_imp" => self.enable_neg_imp = boolean(value)?,
            _ => {
                return Err(ModeError::UnknownFlag {
                    name: name.to_owned(),
                    line,
                })
            }
        }
        Ok(())
    }
}

/// Parses a mode file: defaults overlaid with `flag value` lines.
pub fn parse_mode(text: &str) -> Result<Flags, ModeError> {
    let mut flags = Flags::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('%').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut parts = body.split_whitespace();
        let name = parts.next().unwrap();
        let value = parts.next().ok_or_else(|| ModeError::Parse {
            line,
            msg: format!("flag '{name}' is missing a value"),
        })?;
        if parts.next().is_some() {
            return Err(ModeError::Parse {
                line,
                msg: "trailing tokens after value".into(),
            });
        }
        flags.set(name, value, line)?;
    }
    Ok(flags)
}

/// Loads a mode from a file path.
pub fn load_mode(path: &std::path::Path) -> Result<Flags, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_mode(&text).map_err(|e| format!("{}: {e}", path.display()))
}

const BUNDLED_MODES: &[(&str, &str)] = &[
    ("base", include_str!("../modes/base.mode")),
    ("satdelay", include_str!("../modes/satdelay.mode")),
    ("instfirst", include_str!("../modes/instfirst.mode")),
    ("matefirst", include_str!("../modes/matefirst.mode")),
    ("pure", include_str!("../modes/pure.mode")),
];

/// Names of the modes compiled into the binary.
pub fn builtin_mode_names() -> Vec<&'static str> {
    BUNDLED_MODES.iter().map(|(n, _)| *n).collect()
}

/// Resolves a builtin mode by name.
pub fn builtin_mode(name: &str) -> Option<Flags> {
    BUNDLED_MODES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(n, text)| parse_mode(text).unwrap_or_else(|e| panic!("bundled mode {n}: {e}")))
}

/// Resolves a mode argument: a builtin name first, then a file path.
pub fn resolve_mode(arg: &str) -> Result<Flags, String> {
    if let Some(f) = builtin_mode(arg) {
        return Ok(f);
    }
    let path = std::path::Path::new(arg);
    if path.exists() {
        return load_mode(path);
    }
    Err(format!(
        "unknown mode '{arg}' (builtins: {})",
        builtin_mode_names().join(", ")
    ))
}

/// An ordered list of (mode name, seconds) slices.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub entries: Vec<(String, f64)>,
}

impl Schedule {
    pub fn total_seconds(&self) -> f64 {
        self.entries.iter().map(|(_, s)| s).sum()
    }

    /// Slice durations scaled so their sum equals `wall`.
    pub fn scaled(&self, wall: Duration) -> Vec<(String, Duration)> {
        let total = self.total_seconds();
        self.entries
            .iter()
            .map(|(name, secs)| {
                let share = if total > 0.0 { secs / total } else { 0.0 };
                (name.clone(), wall.mul_f64(share))
            })
            .collect()
    }
}

/// The bundled default: five modes, two seconds each.
pub fn default_schedule() -> Schedule {
    parse_schedule(include_str!("../modes/default.schedule")).expect("bundled schedule")
}

/// Parses `modename seconds` lines. Mode names must resolve to builtin
/// modes; `%` starts a comment.
pub fn parse_schedule(text: &str) -> Result<Schedule, String> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('%').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut parts = body.split_whitespace();
        let name = parts.next().unwrap().to_owned();
        let secs: f64 = parts
            .next()
            .ok_or_else(|| format!("line {}: missing seconds", i + 1))?
            .parse()
            .map_err(|_| format!("line {}: seconds must be a number", i + 1))?;
        if secs <= 0.0 {
            return Err(format!("line {}: slice must be positive", i + 1));
        }
        if builtin_mode(&name).is_none() {
            return Err(format!("line {}: unknown mode '{name}'", i + 1));
        }
        entries.push((name, secs));
    }
    if entries.is_empty() {
        return Err("schedule has no slices".into());
    }
    Ok(Schedule { entries })
}

pub fn load_schedule(path: &std::path::Path) -> Result<Schedule, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_schedule(&text)
}

/// Outcome of a schedule run, with instrumentation from the engine that
/// produced the final result.
pub struct ScheduleOutcome {
    pub result: SearchResult,
    pub mode: String,
    pub trace: Vec<TraceEvent>,
    pub dimacs: String,
    pub lit_count: usize,
}

/// Runs each slice on a fresh engine instance (stores never leak between
/// slices) and returns the first Theorem, or the last slice's result.
pub fn run_schedule(
    problem: &Problem,
    schedule: &Schedule,
    wall: Duration,
    record_trace: bool,
) -> ScheduleOutcome {
    let slices = schedule.scaled(wall);
    let mut last: Option<ScheduleOutcome> = None;
    let mut total_elapsed = Duration::ZERO;
    for (name, slice) in slices {
        let flags = builtin_mode(&name).expect("schedule entries are validated");
        let mut eng = Engine::for_problem(problem, &flags);
        eng.record_trace(record_trace);
        let mut result = eng.search(slice);
        total_elapsed += result.elapsed;
        result.elapsed = total_elapsed;
        let outcome = ScheduleOutcome {
            result,
            mode: name,
            trace: eng.take_trace(),
            dimacs: eng.sat().dump_dimacs(),
            lit_count: eng.lits().num_vars(),
        };
        if outcome.result.status == SearchStatus::Theorem {
            return outcome;
        }
        last = Some(outcome);
    }
    last.expect("schedules are nonempty")
}

/// Runs a single mode for the whole budget.
pub fn run_mode(
    problem: &Problem,
    flags: &Flags,
    wall: Duration,
    record_trace: bool,
) -> (Engine, SearchResult) {
    let mut eng = Engine::for_problem(problem, flags);
    eng.record_trace(record_trace);
    let result = eng.search(wall);
    (eng, result)
}

/// Convenience table mapping mode names to their flag maps.
pub fn all_builtin_modes() -> HashMap<&'static str, Flags> {
    builtin_mode_names()
        .into_iter()
        .map(|n| (n, builtin_mode(n).unwrap()))
        .collect()
}
