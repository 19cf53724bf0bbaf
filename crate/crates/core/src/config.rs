//! Flat `key = value` run configuration.
//!
//! ```text
//! # SP4 with a shorter run
//! problem = sp4
//! steps = 1000
//! backend = parallel
//! stage.0.start = 0
//! stage.0.end = 500
//! stage.0.hx = 10
//! ```
//!
//! `#` starts a comment. Several assignments may share a line when separated
//! by commas. A built-in problem is chosen with `problem` and every other key
//! overrides one of its fields. Any `stage.<i>.*` key replaces the built-in
//! schedule as a whole with the stages given, ordered by `<i>`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::backend::Backend;
use crate::error::{Error, Result};
use crate::fields::{FieldRule, FieldSchedule, Stage};
use crate::grid::{Grid, Vec3};
use crate::problems::{standard_problem_3_benchmark, standard_problem_4, ProblemSpec};
use crate::real::Precision;
use crate::trajectory::LineEnding;

/// A fully resolved run: the problem plus how to execute it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec: ProblemSpec,
    pub backend: Backend,
    pub precision: Precision,
    /// `None` writes the trajectory to standard output.
    pub output: Option<PathBuf>,
    pub line_ending: LineEnding,
    /// Stop early once the max torque drops below this value.
    pub torque_tol: Option<f64>,
}

impl RunConfig {
    pub fn new(spec: ProblemSpec) -> Self {
        RunConfig {
            spec,
            backend: Backend::default(),
            precision: Precision::default(),
            output: None,
            line_ending: LineEnding::default(),
            torque_tol: None,
        }
    }

    /// Renders the configuration so that [`parse_config`] gives it back.
    pub fn to_config(&self) -> String {
        let mut out = to_config(&self.spec);
        let _ = writeln!(out, "backend = {}", self.backend);
        let _ = writeln!(out, "precision = {}", self.precision);
        if let Some(p) = &self.output {
            let _ = writeln!(out, "output = {}", p.display());
        }
        if self.line_ending == LineEnding::CrLf {
            out.push_str("crlf = true\n");
        }
        if let Some(t) = self.torque_tol {
            let _ = writeln!(out, "torque_tol = {t:?}");
        }
        out
    }
}

struct Entry<'a> {
    line: usize,
    value: &'a str,
}

fn tokenize(text: &str) -> Result<BTreeMap<&str, Entry<'_>>> {
    let mut entries = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("");
        for item in content.split(',') {
            let item = item.trim();
            if item.is_empty() {
                continue;
            }
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::config(line, format!("expected `key = value`, got `{item}`")))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::config(line, "missing key"));
            }
            let value = value.trim();
            if entries.insert(key, Entry { line, value }).is_some() {
                return Err(Error::config(line, format!("duplicate key `{key}`")));
            }
        }
    }
    Ok(entries)
}

fn parse_value<T: FromStr>(key: &str, e: &Entry<'_>) -> Result<T> {
    e.value.parse().map_err(|_| {
        Error::config(
            e.line,
            format!("`{key}`: cannot parse `{}` as {}", e.value, short_type_name::<T>()),
        )
    })
}

fn short_type_name<T>() -> &'static str {
    let full = std::any::type_name::<T>();
    full.rsplit("::").next().unwrap_or(full)
}

fn parse_bool(key: &str, e: &Entry<'_>) -> Result<bool> {
    match e.value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::config(e.line, format!("`{key}`: expected true or false, got `{}`", e.value))),
    }
}

#[derive(Default)]
struct StageKeys {
    line: usize,
    start: Option<u64>,
    end: Option<u64>,
    h: [f64; 3],
    h_end: [f64; 3],
    ramp: bool,
    alpha: Option<f64>,
}

impl StageKeys {
    fn build(&self, index: u64) -> Result<Stage> {
        let start = self
            .start
            .ok_or_else(|| Error::config(self.line, format!("stage {index} has no `start`")))?;
        let from = Vec3::new(self.h[0], self.h[1], self.h[2]);
        let stage = if self.ramp {
            let end = self
                .end
                .ok_or_else(|| Error::config(self.line, format!("ramp stage {index} needs an `end`")))?;
            Stage::ramp(start, end, from, Vec3::new(self.h_end[0], self.h_end[1], self.h_end[2]))
        } else {
            Stage::constant(start, self.end, from)
        };
        Ok(match self.alpha {
            Some(a) => stage.with_alpha(a),
            None => stage,
        })
    }
}

/// Parses a configuration document, applying the chosen built-in problem's
/// defaults before any overrides.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let entries = tokenize(text)?;
    let problem = entries
        .get("problem")
        .ok_or_else(|| Error::config(0, "missing required key `problem`"))?;
    let spec = match problem.value.to_ascii_lowercase().as_str() {
        "sp4" => {
            if let Some(e) = entries.get("n") {
                return Err(Error::config(e.line, "`n` only applies to problem sp3"));
            }
            standard_problem_4()
        }
        "sp3" => {
            let n = match entries.get("n") {
                Some(e) => parse_value::<usize>("n", e)?,
                None => 16,
            };
            standard_problem_3_benchmark(n).map_err(|err| Error::config(problem.line, err.to_string()))?
        }
        other => {
            return Err(Error::config(
                problem.line,
                format!("unknown problem `{other}` (expected sp3 or sp4)"),
            ))
        }
    };
    let mut cfg = RunConfig::new(spec);
    let (mut nx, mut ny, mut nz) = cfg.spec.grid.shape();
    let mut delta = cfg.spec.grid.delta();
    let mut grid_line = None;
    let mut material_line = None;
    let mut stages: BTreeMap<u64, StageKeys> = BTreeMap::new();

    for (&key, e) in &entries {
        match key {
            "problem" | "n" => {}
            "backend" => cfg.backend = parse_value(key, e)?,
            "precision" => cfg.precision = parse_value(key, e)?,
            "output" => cfg.output = Some(PathBuf::from(e.value)),
            "crlf" => {
                cfg.line_ending = if parse_bool(key, e)? {
                    LineEnding::CrLf
                } else {
                    LineEnding::Lf
                }
            }
            "torque_tol" => cfg.torque_tol = Some(parse_value(key, e)?),
            "name" => cfg.spec.name = e.value.to_string(),
            "dt" => cfg.spec.dt = parse_value(key, e)?,
            "steps" => cfg.spec.steps = parse_value(key, e)?,
            "cadence" => cfg.spec.cadence = parse_value(key, e)?,
            "nx" | "ny" | "nz" | "delta" => {
                grid_line = Some(e.line);
                match key {
                    "nx" => nx = parse_value(key, e)?,
                    "ny" => ny = parse_value(key, e)?,
                    "nz" => nz = parse_value(key, e)?,
                    _ => delta = parse_value(key, e)?,
                }
            }
            "a_ex" | "ms" | "hk" | "alpha" => {
                material_line = Some(e.line);
                let v = parse_value(key, e)?;
                let m = &mut cfg.spec.material;
                match key {
                    "a_ex" => m.a_ex = v,
                    "ms" => m.ms = v,
                    "hk" => m.hk = v,
                    _ => m.alpha = v,
                }
            }
            "init.x" => cfg.spec.initial.x = parse_value(key, e)?,
            "init.y" => cfg.spec.initial.y = parse_value(key, e)?,
            "init.z" => cfg.spec.initial.z = parse_value(key, e)?,
            _ => {
                let Some(rest) = key.strip_prefix("stage.") else {
                    return Err(Error::config(e.line, format!("unknown key `{key}`")));
                };
                let (index, field) = rest
                    .split_once('.')
                    .ok_or_else(|| Error::config(e.line, format!("unknown key `{key}`")))?;
                let index: u64 = index
                    .parse()
                    .map_err(|_| Error::config(e.line, format!("`{key}`: stage index must be an integer")))?;
                let s = stages.entry(index).or_default();
                s.line = s.line.max(e.line);
                match field {
                    "start" => s.start = Some(parse_value(key, e)?),
                    "end" => s.end = Some(parse_value(key, e)?),
                    "hx" => s.h[0] = parse_value(key, e)?,
                    "hy" => s.h[1] = parse_value(key, e)?,
                    "hz" => s.h[2] = parse_value(key, e)?,
                    "hx_end" => s.h_end[0] = parse_value(key, e)?,
                    "hy_end" => s.h_end[1] = parse_value(key, e)?,
                    "hz_end" => s.h_end[2] = parse_value(key, e)?,
                    "ramp" => s.ramp = parse_bool(key, e)?,
                    "alpha" => s.alpha = Some(parse_value(key, e)?),
                    _ => return Err(Error::config(e.line, format!("unknown key `{key}`"))),
                }
            }
        }
    }

    if let Some(line) = grid_line {
        cfg.spec.grid = Grid::new(nx, ny, nz, delta).map_err(|err| Error::config(line, err.to_string()))?;
    }
    if let Some(line) = material_line {
        cfg.spec.material.validate().map_err(|err| Error::config(line, err.to_string()))?;
    }
    if !stages.is_empty() {
        let line = stages.values().map(|s| s.line).max().unwrap_or(0);
        let built = stages.iter().map(|(&i, s)| s.build(i)).collect::<Result<Vec<_>>>()?;
        cfg.spec.schedule = FieldSchedule::new(built).map_err(|err| Error::config(line, err.to_string()))?;
    }
    let line_of = |key: &str| entries.get(key).map_or(0, |e| e.line);
    if !(cfg.spec.dt > 0.0 && cfg.spec.dt.is_finite()) {
        return Err(Error::config(line_of("dt"), "`dt` must be positive"));
    }
    if cfg.spec.cadence == 0 {
        return Err(Error::config(line_of("cadence"), "`cadence` must be at least 1"));
    }
    if cfg.spec.initial.norm() == 0.0 || !cfg.spec.initial.is_finite() {
        return Err(Error::config(line_of("init.x"), "initial direction must be a nonzero finite vector"));
    }
    if let Some(t) = cfg.torque_tol {
        if !(t > 0.0) {
            return Err(Error::config(line_of("torque_tol"), "`torque_tol` must be positive"));
        }
    }
    Ok(cfg)
}

/// Writes every field of `spec` in config syntax. The problem key picks the
/// built-in whose defaults are then fully overridden.
pub fn to_config(spec: &ProblemSpec) -> String {
    let base = if spec.name == "sp3" { "sp3" } else { "sp4" };
    let (nx, ny, nz) = spec.grid.shape();
    let m = &spec.material;
    let mut out = String::new();
    let mut put = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    put("problem", base.into());
    if base == "sp3" {
        put("n", nx.max(1).to_string());
    }
    if spec.name != base {
        put("name", spec.name.clone());
    }
    put("nx", nx.to_string());
    put("ny", ny.to_string());
    put("nz", nz.to_string());
    put("delta", format!("{:?}", spec.grid.delta()));
    put("a_ex", format!("{:?}", m.a_ex));
    put("ms", format!("{:?}", m.ms));
    put("hk", format!("{:?}", m.hk));
    put("alpha", format!("{:?}", m.alpha));
    put("init.x", format!("{:?}", spec.initial.x));
    put("init.y", format!("{:?}", spec.initial.y));
    put("init.z", format!("{:?}", spec.initial.z));
    put("dt", format!("{:?}", spec.dt));
    put("steps", spec.steps.to_string());
    put("cadence", spec.cadence.to_string());
    for (i, s) in spec.schedule.stages().iter().enumerate() {
        let mut put_stage = |k: &str, v: String| put(&format!("stage.{i}.{k}"), v);
        put_stage("start", s.start.to_string());
        if let Some(end) = s.end {
            put_stage("end", end.to_string());
        }
        let (from, to) = match s.rule {
            FieldRule::Constant(h) => (h, None),
            FieldRule::Ramp { from, to } => (from, Some(to)),
        };
        put_stage("hx", format!("{:?}", from.x));
        put_stage("hy", format!("{:?}", from.y));
        put_stage("hz", format!("{:?}", from.z));
        if let Some(to) = to {
            put_stage("ramp", "true".into());
            put_stage("hx_end", format!("{:?}", to.x));
            put_stage("hy_end", format!("{:?}", to.y));
            put_stage("hz_end", format!("{:?}", to.z));
        }
        if let Some(a) = s.alpha {
            put_stage("alpha", format!("{a:?}"));
        }
    }
    out
}
