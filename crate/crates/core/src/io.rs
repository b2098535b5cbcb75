//! Plain-text formats for networks, schedules and trajectories.
//!
//! Network file:
//!
//! ```text
//! fj-network
//! n 3
//! labels a b c          # optional
//! lambda 0 1 1
//! u 0 0 0
//! x0 0 1 0              # optional
//! W
//! 1 0 0
//! 1 0 0
//! 0 1 0
//! ```
//!
//! Schedule file: a header, `n`, `u` and optional `x0`/`labels`, then a
//! `prefix` and/or `period` section. Each section holds `stage` blocks (a
//! `lambda` line plus a `W` block) or `include <network-file>` lines, which
//! take `lambda` and `W` from another file, relative to the schedule.
//!
//! `#` starts a comment. Numbers are written in shortest round-trip form,
//! so `write(parse(f))` reproduces every value bit for bit.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::dynamics::OpinionTrajectory;
use crate::error::FjError;
use crate::network::{validate_stochastic, FjModel, Stage, SusceptibilityProfile, DEFAULT_ROW_TOL};
use crate::schedule::TvSchedule;

pub const NETWORK_HEADER: &str = "fj-network";
pub const SCHEDULE_HEADER: &str = "fj-schedule";
pub const TRAJECTORY_HEADER: &str = "fj-trajectory";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("line {line}, field `{field}`: {error}")]
    Invalid {
        line: usize,
        field: String,
        error: FjError,
    },

    #[error("missing field `{0}`")]
    Missing(&'static str),

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

fn invalid(line: usize, field: &str, error: FjError) -> ParseError {
    ParseError::Invalid {
        line,
        field: field.to_string(),
        error,
    }
}

/// Shortest representation that parses back to the same bits.
pub fn fmt_num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v}")
    } else {
        format!("{v:?}")
    }
}

fn fmt_vec<'a>(values: impl IntoIterator<Item = &'a f64>) -> String {
    values.into_iter().map(|&v| fmt_num(v)).collect::<Vec<_>>().join(" ")
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
        }
    }

    /// Next non-blank line with comments removed, and its 1-based number.
    fn next_significant(&mut self) -> Option<(usize, &'a str)> {
        for (i, raw) in self.inner.by_ref() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if !line.is_empty() {
                return Some((i + 1, line));
            }
        }
        None
    }
}

fn split_key(line: &str) -> (&str, &str) {
    match line.split_once(char::is_whitespace) {
        Some((k, rest)) => (k, rest.trim()),
        None => (line, ""),
    }
}

fn parse_floats(line: usize, field: &str, text: &str) -> Result<Vec<f64>, ParseError> {
    text.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| syntax(line, format!("field `{field}`: `{t}` is not a number")))
        })
        .collect()
}

fn parse_vector(line: usize, field: &str, text: &str, n: Option<usize>) -> Result<DVector<f64>, ParseError> {
    let v = parse_floats(line, field, text)?;
    let n = n.ok_or_else(|| syntax(line, format!("`{field}` before `n`")))?;
    if v.len() != n {
        return Err(invalid(line, field, FjError::DimensionMismatch { expected: n, found: v.len() }));
    }
    Ok(DVector::from_vec(v))
}

fn parse_labels(line: usize, text: &str, n: Option<usize>) -> Result<Vec<String>, ParseError> {
    let labels: Vec<String> = text.split_whitespace().map(str::to_string).collect();
    let n = n.ok_or_else(|| syntax(line, "`labels` before `n`"))?;
    if labels.len() != n {
        return Err(invalid(line, "labels", FjError::DimensionMismatch { expected: n, found: labels.len() }));
    }
    Ok(labels)
}

fn parse_n(line: usize, text: &str) -> Result<usize, ParseError> {
    text.parse::<usize>()
        .map_err(|_| syntax(line, format!("field `n`: `{text}` is not a nonnegative integer")))
}

/// Reads the `n` rows following a `W` line.
fn parse_matrix(lines: &mut Lines<'_>, start: usize, n: Option<usize>) -> Result<DMatrix<f64>, ParseError> {
    let n = n.ok_or_else(|| syntax(start, "`W` before `n`"))?;
    let mut rows = Vec::with_capacity(n);
    for r in 0..n {
        let (line, text) = lines
            .next_significant()
            .ok_or_else(|| syntax(start, format!("`W` has {r} rows, expected {n}")))?;
        let row = parse_floats(line, "W", text)?;
        if row.len() != n {
            return Err(invalid(line, "W", FjError::DimensionMismatch { expected: n, found: row.len() }));
        }
        rows.push(row);
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn expect_header(lines: &mut Lines<'_>, header: &str) -> Result<(), ParseError> {
    match lines.next_significant() {
        Some((_, h)) if h == header => Ok(()),
        Some((line, h)) => Err(syntax(line, format!("expected `{header}`, found `{h}`"))),
        None => Err(syntax(1, format!("empty file, expected `{header}`"))),
    }
}

fn build_stage(
    lambda: Option<(usize, DVector<f64>)>,
    w: Option<(usize, DMatrix<f64>)>,
    tol: f64,
) -> Result<Stage, ParseError> {
    let (lambda_line, lambda) = lambda.ok_or(ParseError::Missing("lambda"))?;
    let (w_line, w) = w.ok_or(ParseError::Missing("W"))?;
    let w = validate_stochastic(w, tol).map_err(|e| invalid(w_line, "W", e))?;
    let lambda = SusceptibilityProfile::new(lambda.iter().copied().collect())
        .map_err(|e| invalid(lambda_line, "lambda", e))?;
    Stage::new(lambda, w).map_err(|e| invalid(lambda_line, "lambda", e))
}

/// A stationary model together with an optional initial state and labels.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkFile {
    pub model: FjModel,
    pub x0: Option<DVector<f64>>,
    pub labels: Option<Vec<String>>,
}

impl NetworkFile {
    pub fn new(model: FjModel) -> Self {
        Self {
            model,
            x0: None,
            labels: None,
        }
    }
}

pub fn parse_network(text: &str) -> Result<NetworkFile, ParseError> {
    parse_network_with_tolerance(text, DEFAULT_ROW_TOL)
}

pub fn parse_network_with_tolerance(text: &str, tol: f64) -> Result<NetworkFile, ParseError> {
    let mut lines = Lines::new(text);
    expect_header(&mut lines, NETWORK_HEADER)?;
    let mut n = None;
    let mut labels = None;
    let mut lambda = None;
    let mut u = None;
    let mut x0 = None;
    let mut w = None;
    while let Some((line, text)) = lines.next_significant() {
        let (key, rest) = split_key(text);
        match key {
            "n" => n = Some(parse_n(line, rest)?),
            "labels" => labels = Some(parse_labels(line, rest, n)?),
            "lambda" => lambda = Some((line, parse_vector(line, "lambda", rest, n)?)),
            "u" => u = Some(parse_vector(line, "u", rest, n)?),
            "x0" => x0 = Some(parse_vector(line, "x0", rest, n)?),
            "W" => w = Some((line, parse_matrix(&mut lines, line, n)?)),
            other => return Err(syntax(line, format!("unknown field `{other}`"))),
        }
    }
    n.ok_or(ParseError::Missing("n"))?;
    let lambda_line = lambda.as_ref().map_or(1, |l| l.0);
    let stage = build_stage(lambda, w, tol)?;
    let u = u.ok_or(ParseError::Missing("u"))?;
    let model = FjModel::from_stage(stage, u).map_err(|e| invalid(lambda_line, "u", e))?;
    Ok(NetworkFile { model, x0, labels })
}

pub fn read_network(path: &Path) -> Result<NetworkFile, ParseError> {
    parse_network(&read(path)?)
}

fn read(path: &Path) -> Result<String, ParseError> {
    std::fs::read_to_string(path).map_err(|e| ParseError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn write_stage_body(out: &mut String, stage: &Stage) {
    let _ = writeln!(out, "lambda {}", fmt_vec(stage.lambda().as_slice()));
    out.push_str("W\n");
    for row in stage.w().matrix().row_iter() {
        let _ = writeln!(out, "{}", fmt_vec(row.iter()));
    }
}

pub fn write_network(file: &NetworkFile) -> String {
    let mut out = String::new();
    let m = &file.model;
    let _ = writeln!(out, "{NETWORK_HEADER}");
    let _ = writeln!(out, "n {}", m.n());
    if let Some(labels) = &file.labels {
        let _ = writeln!(out, "labels {}", labels.join(" "));
    }
    let _ = writeln!(out, "u {}", fmt_vec(m.u().iter()));
    if let Some(x0) = &file.x0 {
        let _ = writeln!(out, "x0 {}", fmt_vec(x0.iter()));
    }
    write_stage_body(&mut out, m.stage());
    out
}

/// A time-varying schedule together with the prejudice vector it is run with.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleFile {
    pub schedule: TvSchedule,
    pub u: DVector<f64>,
    pub x0: Option<DVector<f64>>,
    pub labels: Option<Vec<String>>,
}

/// The stage currently being filled: (start line, lambda, W), each field
/// with the line it was read from.
type OpenStage = (usize, Option<(usize, DVector<f64>)>, Option<(usize, DMatrix<f64>)>);

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Prefix,
    Period,
}

/// Parses a schedule; `include` paths resolve against `base_dir`.
pub fn parse_schedule(text: &str, base_dir: Option<&Path>) -> Result<ScheduleFile, ParseError> {
    let mut lines = Lines::new(text);
    expect_header(&mut lines, SCHEDULE_HEADER)?;
    let mut n = None;
    let mut u = None;
    let mut x0 = None;
    let mut labels = None;
    let mut section = Section::None;
    let mut prefix = Vec::new();
    let mut period = Vec::new();
    let mut open: Option<OpenStage> = None;

    let close = |open: &mut Option<_>, section: Section, prefix: &mut Vec<Stage>, period: &mut Vec<Stage>| {
        if let Some((_, lambda, w)) = open.take() {
            let stage = build_stage(lambda, w, DEFAULT_ROW_TOL)?;
            match section {
                Section::Prefix => prefix.push(stage),
                _ => period.push(stage),
            }
        }
        Ok::<(), ParseError>(())
    };

    while let Some((line, text)) = lines.next_significant() {
        let (key, rest) = split_key(text);
        match key {
            "n" => n = Some(parse_n(line, rest)?),
            "u" => u = Some(parse_vector(line, "u", rest, n)?),
            "x0" => x0 = Some(parse_vector(line, "x0", rest, n)?),
            "labels" => labels = Some(parse_labels(line, rest, n)?),
            "prefix" | "period" => {
                close(&mut open, section, &mut prefix, &mut period)?;
                section = if key == "prefix" { Section::Prefix } else { Section::Period };
            }
            "stage" => {
                if section == Section::None {
                    return Err(syntax(line, "`stage` outside a `prefix` or `period` section"));
                }
                close(&mut open, section, &mut prefix, &mut period)?;
                open = Some((line, None, None));
            }
            "include" => {
                if section == Section::None {
                    return Err(syntax(line, "`include` outside a `prefix` or `period` section"));
                }
                close(&mut open, section, &mut prefix, &mut period)?;
                let path: PathBuf = base_dir.map_or_else(|| PathBuf::from(rest), |d| d.join(rest));
                let net = read_network(&path)?;
                let stage = net.model.stage().clone();
                match section {
                    Section::Prefix => prefix.push(stage),
                    _ => period.push(stage),
                }
            }
            "lambda" | "W" => {
                let Some((_, lambda, w)) = open.as_mut() else {
                    return Err(syntax(line, format!("`{key}` outside a `stage` block")));
                };
                if key == "lambda" {
                    *lambda = Some((line, parse_vector(line, "lambda", rest, n)?));
                } else {
                    *w = Some((line, parse_matrix(&mut lines, line, n)?));
                }
            }
            other => return Err(syntax(line, format!("unknown field `{other}`"))),
        }
    }
    close(&mut open, section, &mut prefix, &mut period)?;

    let n = n.ok_or(ParseError::Missing("n"))?;
    let u = u.ok_or(ParseError::Missing("u"))?;
    if prefix.is_empty() && period.is_empty() {
        return Err(ParseError::Missing("stage"));
    }
    if let Some(bad) = prefix.iter().chain(&period).find(|s| s.n() != n) {
        return Err(invalid(0, "include", FjError::DimensionMismatch { expected: n, found: bad.n() }));
    }
    let schedule = TvSchedule::new(prefix, period).map_err(|e| invalid(0, "stage", e))?;
    Ok(ScheduleFile {
        schedule,
        u,
        x0,
        labels,
    })
}

pub fn read_schedule(path: &Path) -> Result<ScheduleFile, ParseError> {
    parse_schedule(&read(path)?, path.parent())
}

pub fn write_schedule(file: &ScheduleFile) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{SCHEDULE_HEADER}");
    let _ = writeln!(out, "n {}", file.schedule.n());
    if let Some(labels) = &file.labels {
        let _ = writeln!(out, "labels {}", labels.join(" "));
    }
    let _ = writeln!(out, "u {}", fmt_vec(file.u.iter()));
    if let Some(x0) = &file.x0 {
        let _ = writeln!(out, "x0 {}", fmt_vec(x0.iter()));
    }
    for (name, stages) in [("prefix", file.schedule.prefix()), ("period", file.schedule.period())] {
        if stages.is_empty() {
            continue;
        }
        let _ = writeln!(out, "{name}");
        for stage in stages {
            out.push_str("stage\n");
            write_stage_body(&mut out, stage);
        }
    }
    out
}

/// Columnar trajectory: `#`-prefixed header, then one `k x_1 … x_n` row per
/// recorded step.
pub fn write_trajectory(traj: &OpinionTrajectory) -> String {
    let mut out = String::new();
    let n = traj.n();
    let _ = writeln!(out, "# {TRAJECTORY_HEADER}");
    let _ = writeln!(out, "# n {n}");
    let _ = writeln!(out, "# steps {}", traj.total_steps);
    let _ = writeln!(out, "# converged {}", traj.converged);
    if let Some(p) = traj.period {
        let _ = writeln!(out, "# period {p}");
    }
    if let Some(limit) = &traj.limit {
        let _ = writeln!(out, "# limit {}", fmt_vec(limit.iter()));
    }
    let columns: Vec<String> = (1..=n).map(|i| format!("x_{i}")).collect();
    let _ = writeln!(out, "# k {}", columns.join(" "));
    for (k, x) in traj.iter() {
        let _ = writeln!(out, "{k} {}", fmt_vec(x.iter()));
    }
    out
}

/// Contents of a trajectory file.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryFile {
    pub n: usize,
    pub steps: usize,
    pub converged: bool,
    pub period: Option<usize>,
    pub limit: Option<Vec<f64>>,
    pub rows: Vec<(usize, Vec<f64>)>,
}

pub fn parse_trajectory(text: &str) -> Result<TrajectoryFile, ParseError> {
    let mut out = TrajectoryFile {
        n: 0,
        steps: 0,
        converged: false,
        period: None,
        limit: None,
        rows: Vec::new(),
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        if let Some(header) = raw.strip_prefix('#') {
            let (key, rest) = split_key(header.trim());
            match key {
                "n" => out.n = parse_n(line, rest)?,
                "steps" => out.steps = parse_n(line, rest)?,
                "period" => out.period = Some(parse_n(line, rest)?),
                "converged" => out.converged = rest == "true",
                "limit" => out.limit = Some(parse_floats(line, "limit", rest)?),
                _ => {}
            }
            continue;
        }
        let (k, rest) = split_key(raw);
        let k = parse_n(line, k)?;
        let values = parse_floats(line, "x", rest)?;
        if values.len() != out.n {
            return Err(invalid(line, "x", FjError::DimensionMismatch { expected: out.n, found: values.len() }));
        }
        out.rows.push((k, values));
    }
    Ok(out)
}
