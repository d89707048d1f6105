//! Flat `key = value` run configuration.

use std::fmt::Write as _;
use std::path::PathBuf;

use curvature_lines::flow::SectionKind;
use curvature_lines::{Branch, BuiltinBump};

use crate::error::{CliError, CliResult};
use crate::export::fmt_f64;

pub const MAX_EPS: f64 = 0.5;
pub const MAX_GRID: usize = 4096;
pub const MAX_ITERATIONS: usize = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub epsilon: f64,
    pub h_name: BuiltinBump,
    pub branch: Branch,
    pub start: (f64, f64),
    pub tol: f64,
    pub grid: usize,
    pub iterations: usize,
    pub pole: [f64; 4],
    pub deterministic: bool,
    pub out: PathBuf,
    /// Return section; `None` picks `u0` for First and `v0` for Second.
    pub section: Option<SectionKind>,
    pub eps_list: Vec<f64>,
    pub q_max: u32,
    pub cells: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            h_name: BuiltinBump::Sin2,
            branch: Branch::First,
            start: (0.0, 0.0),
            tol: 1e-10,
            grid: 64,
            iterations: 2000,
            pole: [0.0, 0.0, 0.0, 1.0],
            deterministic: true,
            out: PathBuf::from("out"),
            section: None,
            eps_list: vec![0.1, 0.15, 0.2, 0.25, 0.3],
            q_max: 20,
            cells: 32,
        }
    }
}

const KEYS: &[&str] = &[
    "epsilon",
    "h",
    "branch",
    "start",
    "tol",
    "grid",
    "iterations",
    "pole",
    "deterministic",
    "out",
    "section",
    "eps_list",
    "q_max",
    "cells",
];

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn parse_real(key: &str, s: &str) -> CliResult<f64> {
    let x: f64 = s.trim().parse().map_err(|_| invalid(format!("{key}: `{s}` is not a number")))?;
    if !x.is_finite() {
        return Err(invalid(format!("{key}: value must be finite")));
    }
    Ok(x)
}

fn parse_reals(key: &str, s: &str) -> CliResult<Vec<f64>> {
    s.split(',').map(|p| parse_real(key, p)).collect()
}

fn parse_count(key: &str, s: &str) -> CliResult<usize> {
    s.trim().parse().map_err(|_| invalid(format!("{key}: `{s}` is not a non-negative integer")))
}

impl RunConfig {
    /// Sets one key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let v = value.trim();
        match key {
            "epsilon" => self.epsilon = parse_real(key, v)?,
            "h" => {
                self.h_name = BuiltinBump::from_name(v)
                    .ok_or_else(|| invalid(format!("h: unknown function `{v}` (sin2_uv, zero)")))?
            }
            "branch" => {
                self.branch = Branch::from_name(v)
                    .ok_or_else(|| invalid(format!("branch: expected first or second, got `{v}`")))?
            }
            "start" => {
                let r = parse_reals(key, v)?;
                if r.len() != 2 {
                    return Err(invalid("start: expected `u, v`"));
                }
                self.start = (r[0], r[1]);
            }
            "tol" => self.tol = parse_real(key, v)?,
            "grid" => self.grid = parse_count(key, v)?,
            "iterations" => self.iterations = parse_count(key, v)?,
            "pole" => {
                let r = parse_reals(key, v)?;
                if r.len() != 4 {
                    return Err(invalid("pole: expected 4 comma-separated reals"));
                }
                self.pole = [r[0], r[1], r[2], r[3]];
            }
            "deterministic" => {
                self.deterministic = match v {
                    "true" => true,
                    "false" => false,
                    _ => return Err(invalid(format!("deterministic: expected true or false, got `{v}`"))),
                }
            }
            "out" => {
                if v.is_empty() {
                    return Err(invalid("out: empty path"));
                }
                self.out = PathBuf::from(v);
            }
            "section" => {
                self.section = match v {
                    "auto" => None,
                    _ => Some(SectionKind::from_name(v).ok_or_else(|| {
                        invalid(format!("section: expected auto, u0, v0 or diagonal, got `{v}`"))
                    })?),
                }
            }
            "eps_list" => self.eps_list = parse_reals(key, v)?,
            "q_max" => {
                self.q_max = v.parse().map_err(|_| invalid(format!("q_max: `{v}` is not an integer")))?
            }
            "cells" => self.cells = parse_count(key, v)?,
            _ => return Err(invalid(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a `key = value` document on top of `self`. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn apply_text(&mut self, text: &str) -> CliResult<()> {
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("line {}: expected `key = value`", k + 1)))?;
            self.set(key.trim(), value)
                .map_err(|e| invalid(format!("line {}: {}", k + 1, e.to_string().trim_start_matches("invalid configuration: "))))?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut c = Self::default();
        c.apply_text(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.epsilon.abs() > MAX_EPS {
            return Err(invalid(format!("epsilon: |{}| exceeds {MAX_EPS}", self.epsilon)));
        }
        if !(self.tol > 0.0 && self.tol <= 1e-3) {
            return Err(invalid(format!("tol: {} outside (0, 1e-3]", self.tol)));
        }
        if self.grid == 0 || self.grid > MAX_GRID {
            return Err(invalid(format!("grid: {} outside [1, {MAX_GRID}]", self.grid)));
        }
        if self.iterations == 0 || self.iterations > MAX_ITERATIONS {
            return Err(invalid(format!("iterations: {} outside [1, {MAX_ITERATIONS}]", self.iterations)));
        }
        if self.pole.iter().all(|&x| x == 0.0) {
            return Err(invalid("pole: zero vector"));
        }
        if self.eps_list.is_empty() || self.eps_list.iter().any(|e| e.abs() > MAX_EPS) {
            return Err(invalid(format!("eps_list: needs 1 or more values with |ε| <= {MAX_EPS}")));
        }
        if !(2..=1000).contains(&self.q_max) {
            return Err(invalid(format!("q_max: {} outside [2, 1000]", self.q_max)));
        }
        if self.cells == 0 || self.cells > 1024 {
            return Err(invalid(format!("cells: {} outside [1, 1024]", self.cells)));
        }
        Ok(())
    }

    /// Canonical text form; [`RunConfig::parse`] reads it back unchanged.
    pub fn to_text(&self) -> String {
        let join = |xs: &[f64]| xs.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(", ");
        let mut s = String::new();
        for key in KEYS {
            let value = match *key {
                "epsilon" => fmt_f64(self.epsilon),
                "h" => self.h_name.name().to_owned(),
                "branch" => self.branch.name().to_owned(),
                "start" => join(&[self.start.0, self.start.1]),
                "tol" => fmt_f64(self.tol),
                "grid" => self.grid.to_string(),
                "iterations" => self.iterations.to_string(),
                "pole" => join(&self.pole),
                "deterministic" => self.deterministic.to_string(),
                "out" => self.out.display().to_string(),
                "section" => self.section.map_or("auto", |s| s.name()).to_owned(),
                "eps_list" => join(&self.eps_list),
                "q_max" => self.q_max.to_string(),
                "cells" => self.cells.to_string(),
                _ => unreachable!(),
            };
            let _ = writeln!(s, "{key} = {value}");
        }
        s
    }

    pub fn section_for_branch(&self) -> SectionKind {
        self.section.unwrap_or(match self.branch {
            Branch::First => SectionKind::U0,
            Branch::Second => SectionKind::V0,
        })
    }
}
