//! Integration of principal lines on the torus chart, section crossings,
//! return maps and rotation numbers.
//!
//! Orbits are integrated in the lift: coordinates are never reduced modulo
//! 2π, so winding is read off directly. Each step runs in one of three
//! parametrizations, chosen at the step start: graph over u, graph over v, or
//! chart arc length. All three integrate `dy/dτ = d / w` for the oriented unit
//! branch direction `d`, with `w = |d_u|`, `|d_v|` or `1`.

use rayon::prelude::*;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::field::{
    lmn_closed_form, lmn_geometric, principal_directions_tol, select_branch, Branch,
    FieldCoefficients, ProjectiveDirection, DEFAULT_UMBILIC_TOL,
};
use crate::geometry::{wrap_angle, Deformation, TorusPoint};
use crate::ode::{dopri5_step, step_factor, DenseStep, Tolerances, MIN_STEP};

/// Where the principal-line coefficients come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldSource {
    /// Jet → fundamental forms → `(L, M, N)`.
    Geometric,
    /// The closed-form ε-polynomials.
    ClosedForm,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowConfig {
    pub tol: Tolerances,
    /// Largest transverse slope integrated in graph form.
    pub slope_cap: f64,
    pub trans_tol: f64,
    pub crossing_tol: f64,
    pub umbilic_tol: f64,
    pub max_steps: usize,
    /// Initial step, in chart arc length.
    pub initial_step: f64,
    pub source: FieldSource,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            slope_cap: 10.0,
            trans_tol: 1e-6,
            crossing_tol: 1e-12,
            umbilic_tol: DEFAULT_UMBILIC_TOL,
            max_steps: 2_000_000,
            initial_step: 0.05,
            source: FieldSource::Geometric,
        }
    }
}

impl FlowConfig {
    pub fn with_tol(mut self, rtol: f64, atol: f64) -> Self {
        self.tol = Tolerances { rtol, atol };
        self
    }
}

/// A principal line field of one deformation.
#[derive(Clone, Copy, Debug)]
pub struct LineField<'a> {
    pub def: Deformation<'a>,
    pub source: FieldSource,
    pub umbilic_tol: f64,
}

impl<'a> LineField<'a> {
    pub fn new(def: Deformation<'a>, cfg: &FlowConfig) -> Self {
        Self { def, source: cfg.source, umbilic_tol: cfg.umbilic_tol }
    }

    pub fn coefficients(&self, pt: TorusPoint) -> Result<FieldCoefficients> {
        match self.source {
            FieldSource::Geometric => lmn_geometric(&self.def, pt),
            FieldSource::ClosedForm => Ok(lmn_closed_form(pt, &self.def)),
        }
    }

    pub fn directions(&self, pt: TorusPoint) -> Result<(ProjectiveDirection, ProjectiveDirection)> {
        let c = self.coefficients(pt)?;
        principal_directions_tol(&c, self.umbilic_tol).map_err(|e| match e {
            Error::Umbilic { magnitude, .. } => Error::Umbilic { u: pt.u, v: pt.v, magnitude },
            other => other,
        })
    }

    /// Oriented unit direction of `branch` at `pt`, continuous with `prev`.
    pub fn direction(&self, pt: TorusPoint, branch: Branch, prev: Option<[f64; 2]>) -> Result<[f64; 2]> {
        select_branch(self.directions(pt)?, branch, prev)
    }
}

/// Transversal circles of the torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SectionKind {
    /// `{u ≡ 0 mod 2π}`
    U0,
    /// `{v ≡ 0 mod 2π}`
    V0,
    /// `Σ = {(s, s)}`, i.e. `u − v ≡ 0 mod 2π`.
    Diagonal,
}

impl SectionKind {
    /// Chart covector whose level sets at multiples of 2π are the lifted section.
    fn covector(self) -> [f64; 2] {
        match self {
            Self::U0 => [1.0, 0.0],
            Self::V0 => [0.0, 1.0],
            Self::Diagonal => [1.0, -1.0],
        }
    }

    pub fn level(self, pt: TorusPoint) -> f64 {
        let a = self.covector();
        (a[0] * pt.u + a[1] * pt.v) / TAU
    }

    /// Component of the unit direction transverse to the section.
    pub fn transverse_component(self, d: [f64; 2]) -> f64 {
        let a = self.covector();
        (a[0] * d[0] + a[1] * d[1]) / a[0].hypot(a[1])
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::U0 => "u0",
            Self::V0 => "v0",
            Self::Diagonal => "diagonal",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "u0" => Some(Self::U0),
            "v0" => Some(Self::V0),
            "diagonal" => Some(Self::Diagonal),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitSample {
    /// Lifted chart point.
    pub point: TorusPoint,
    /// Oriented unit chart direction.
    pub direction: [f64; 2],
    /// Chart arc length from the start.
    pub arc: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Crossing {
    pub point: TorusPoint,
    pub direction: [f64; 2],
    /// Index `k` of the lifted translate that was crossed.
    pub level: i64,
    pub section: SectionKind,
    pub arc: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Orbit {
    pub branch: Branch,
    pub eps: f64,
    pub samples: Vec<OrbitSample>,
    pub crossings: Vec<Crossing>,
}

impl Orbit {
    pub fn end(&self) -> &OrbitSample {
        self.samples.last().expect("orbit has at least its start sample")
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Stop {
    /// Until u has advanced by the given (signed) amount.
    USpan(f64),
    VSpan(f64),
    ArcLength(f64),
    Crossings { section: SectionKind, count: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    GraphU,
    GraphV,
    Arc,
}

/// A linear stop functional `a · (u, v, s) = c`.
#[derive(Clone, Copy, Debug)]
struct Target {
    a: [f64; 3],
    c: f64,
}

impl Target {
    fn g(&self, y: &[f64; 3]) -> f64 {
        self.a[0] * y[0] + self.a[1] * y[1] + self.a[2] * y[2] - self.c
    }
}

struct Integrator<'a, 'b> {
    field: LineField<'a>,
    branch: Branch,
    cfg: &'b FlowConfig,
}

struct RunOutput {
    samples: Vec<OrbitSample>,
    crossings: Vec<Crossing>,
    end: OrbitSample,
}

impl<'a, 'b> Integrator<'a, 'b> {
    fn mode_for(&self, d: [f64; 2]) -> Mode {
        let cap = self.cfg.slope_cap;
        match self.branch {
            Branch::First if d[1].abs() < cap * d[0].abs() => Mode::GraphU,
            Branch::Second if d[0].abs() < cap * d[1].abs() => Mode::GraphV,
            _ => Mode::Arc,
        }
    }

    fn weight(mode: Mode, d: [f64; 2]) -> f64 {
        match mode {
            Mode::GraphU => d[0].abs(),
            Mode::GraphV => d[1].abs(),
            Mode::Arc => 1.0,
        }
    }

    fn rhs(&self, mode: Mode, reference: [f64; 2], y: &[f64; 3]) -> Result<[f64; 3]> {
        let d = self.field.direction(TorusPoint::new(y[0], y[1]), self.branch, Some(reference))?;
        let w = Self::weight(mode, d);
        if w == 0.0 {
            return Err(Error::StepCollapse { t: y[2], step: 0.0 });
        }
        Ok([d[0] / w, d[1] / w, 1.0 / w])
    }

    fn run(&self, start: TorusPoint, stop: Stop, record: bool) -> Result<RunOutput> {
        let cfg = self.cfg;
        let d_start = self.field.direction(start, self.branch, None)?;
        let mut y = [start.u, start.v, 0.0];
        let mut d = d_start;
        let mut samples = Vec::new();
        if record {
            samples.push(OrbitSample { point: start, direction: d, arc: 0.0 });
        }
        let mut crossings = Vec::new();

        let target = match stop {
            Stop::USpan(x) => Some(Target { a: [1.0, 0.0, 0.0], c: start.u + x }),
            Stop::VSpan(x) => Some(Target { a: [0.0, 1.0, 0.0], c: start.v + x }),
            Stop::ArcLength(x) => {
                if x < 0.0 {
                    return Err(Error::InvalidArgument("arc length must be non-negative".into()));
                }
                Some(Target { a: [0.0, 0.0, 1.0], c: x })
            }
            Stop::Crossings { count, .. } => {
                if count == 0 {
                    return Err(Error::InvalidArgument("crossing count must be positive".into()));
                }
                None
            }
        };
        if let Some(t) = target {
            if t.g(&y) == 0.0 {
                let end = OrbitSample { point: start, direction: d, arc: 0.0 };
                return Ok(RunOutput { samples, crossings, end });
            }
        }

        let mut h_len = cfg.initial_step;
        let mut tau = 0.0;
        let mut cached: Option<(Mode, [f64; 3])> = None;
        for _ in 0..cfg.max_steps {
            let mode = self.mode_for(d);
            let w = Self::weight(mode, d);
            let mut h = h_len * w;

            // land exactly on the target when it is the independent variable
            let mut clamp_to: Option<(usize, f64)> = None;
            if let Some(t) = target {
                let idx = t.a.iter().position(|&x| x != 0.0).unwrap_or(0);
                let exact = matches!(
                    (mode, idx),
                    (Mode::GraphU, 0) | (Mode::GraphV, 1) | (Mode::Arc, 2)
                );
                if exact {
                    let rate = match mode {
                        Mode::GraphU => d[0].signum(),
                        Mode::GraphV => d[1].signum(),
                        Mode::Arc => 1.0,
                    };
                    let remaining = (t.c - y[idx]) * rate;
                    if remaining > 0.0 && h >= remaining {
                        h = remaining;
                        clamp_to = Some((idx, t.c));
                    }
                }
            }

            let k1 = match cached {
                Some((m, k)) if m == mode => k,
                _ => self.rhs(mode, d, &y)?,
            };
            let mut f = |_t: f64, yy: &[f64; 3]| self.rhs(mode, d, yy);
            let step = dopri5_step(&mut f, tau, &y, &k1, h, cfg.tol)?;
            let fac = step_factor(step.err);
            if step.err > 1.0 {
                h_len = (h * fac / w).min(MAX_STEP_LEN);
                if h * fac < MIN_STEP {
                    return Err(Error::StepCollapse { t: tau, step: h * fac });
                }
                cached = Some((mode, k1));
                continue;
            }

            let mut y1 = step.y1;
            if let Some((idx, c)) = clamp_to {
                y1[idx] = c;
            }
            let k_end = step.k_end;
            let d1 = normalize2([k_end[0], k_end[1]]);

            // section crossings inside this step
            if let Stop::Crossings { section, count } = stop {
                let a = section.covector();
                let phi0 = (a[0] * y[0] + a[1] * y[1]) / TAU;
                let phi1 = (a[0] * y1[0] + a[1] * y1[1]) / TAU;
                for level in levels_crossed(phi0, phi1) {
                    let tg = Target { a: [a[0], a[1], 0.0], c: TAU * level as f64 };
                    let t_star = locate(&step.dense, &tg, cfg.crossing_tol)?;
                    let yc = step.dense.eval(t_star);
                    let pc = TorusPoint::new(yc[0], yc[1]);
                    let dc = self.field.direction(pc, self.branch, Some(d))?;
                    let margin = section.transverse_component(dc).abs();
                    if margin < cfg.trans_tol {
                        return Err(Error::Tangency { margin });
                    }
                    let c = Crossing { point: pc, direction: dc, level, section, arc: yc[2] };
                    crossings.push(c);
                    if crossings.len() == count {
                        let end = OrbitSample { point: pc, direction: dc, arc: yc[2] };
                        if record {
                            samples.push(end);
                        }
                        return Ok(RunOutput { samples, crossings, end });
                    }
                }
            }

            if let Some(t) = target {
                let g0 = t.g(&y);
                let g1 = t.g(&y1);
                if clamp_to.is_some() || g1 == 0.0 || (g0 < 0.0) != (g1 < 0.0) {
                    let (pe, de, arc) = if clamp_to.is_some() || g1 == 0.0 {
                        (TorusPoint::new(y1[0], y1[1]), d1, y1[2])
                    } else {
                        let t_star = locate(&step.dense, &t, cfg.crossing_tol)?;
                        let ye = step.dense.eval(t_star);
                        let pe = TorusPoint::new(ye[0], ye[1]);
                        (pe, self.field.direction(pe, self.branch, Some(d))?, ye[2])
                    };
                    let end = OrbitSample { point: pe, direction: de, arc };
                    if record {
                        samples.push(end);
                    }
                    return Ok(RunOutput { samples, crossings, end });
                }
            }

            tau += h;
            y = y1;
            if d[0] * d1[0] + d[1] * d1[1] <= 0.0 {
                return Err(Error::AmbiguousBranch);
            }
            d = d1;
            cached = Some((mode, k_end));
            if record {
                samples.push(OrbitSample { point: TorusPoint::new(y[0], y[1]), direction: d, arc: y[2] });
            }
            let w1 = Self::weight(mode, d);
            h_len = (h * fac / w).min(MAX_STEP_LEN);
            if h_len * w1 < MIN_STEP {
                return Err(Error::StepCollapse { t: tau, step: h_len });
            }
        }
        Err(Error::TooManySteps { max_steps: cfg.max_steps })
    }
}

/// Largest step, in chart arc length.
const MAX_STEP_LEN: f64 = 0.5;

fn normalize2(v: [f64; 2]) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

/// Integer levels crossed when moving from `phi0` to `phi1`, in order of
/// traversal. A start exactly on a level does not count; an end exactly on
/// one does.
fn levels_crossed(phi0: f64, phi1: f64) -> Vec<i64> {
    if phi1 > phi0 {
        let first = phi0.floor() as i64 + 1;
        let last = phi1.floor() as i64;
        (first..=last).collect()
    } else if phi1 < phi0 {
        let first = phi0.ceil() as i64 - 1;
        let last = phi1.ceil() as i64;
        (last..=first).rev().collect()
    } else {
        Vec::new()
    }
}

/// Root of `target.g` along the dense interpolant: bisection to isolate,
/// Newton to polish.
fn locate(dense: &DenseStep<3>, target: &Target, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (dense.t0, dense.t1());
    let mut glo = target.g(&dense.eval(lo));
    let ghi = target.g(&dense.eval(hi));
    if glo == 0.0 {
        return Ok(lo);
    }
    if ghi == 0.0 {
        return Ok(hi);
    }
    if (glo < 0.0) == (ghi < 0.0) {
        return Err(Error::NoBracket);
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..200 {
        let y = dense.eval(t);
        let g = target.g(&y);
        if g.abs() <= tol {
            return Ok(t);
        }
        if (g < 0.0) == (glo < 0.0) {
            lo = t;
            glo = g;
        } else {
            hi = t;
        }
        let dy = dense.deriv(t);
        let slope = target.a[0] * dy[0] + target.a[1] * dy[1] + target.a[2] * dy[2];
        let newton = t - g / slope;
        t = if slope != 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
    }
    let y = dense.eval(t);
    if target.g(&y).abs() <= tol * 16.0 {
        Ok(t)
    } else {
        Err(Error::NoBracket)
    }
}

pub fn integrate_orbit(
    def: &Deformation,
    start: TorusPoint,
    branch: Branch,
    stop: Stop,
    cfg: &FlowConfig,
) -> Result<Orbit> {
    let it = Integrator { field: LineField::new(*def, cfg), branch, cfg };
    let out = it.run(start, stop, true)?;
    Ok(Orbit { branch, eps: def.eps(), samples: out.samples, crossings: out.crossings })
}

/// End point of the orbit without storing samples.
pub fn flow_to(
    def: &Deformation,
    start: TorusPoint,
    branch: Branch,
    stop: Stop,
    cfg: &FlowConfig,
) -> Result<OrbitSample> {
    let it = Integrator { field: LineField::new(*def, cfg), branch, cfg };
    Ok(it.run(start, stop, false)?.end)
}

/// First crossing of the lifted section along the branch from `start`.
pub fn section_crossing(
    def: &Deformation,
    start: TorusPoint,
    branch: Branch,
    section: SectionKind,
    cfg: &FlowConfig,
) -> Result<Crossing> {
    let it = Integrator { field: LineField::new(*def, cfg), branch, cfg };
    let out = it.run(start, Stop::Crossings { section, count: 1 }, false)?;
    Ok(out.crossings[0])
}

/// `v(2π)` along the First branch from `(0, v0)`, lifted.
pub fn poincare_u0(def: &Deformation, v0: f64, cfg: &FlowConfig) -> Result<f64> {
    Ok(flow_to(def, TorusPoint::new(0.0, v0), Branch::First, Stop::USpan(TAU), cfg)?.point.v)
}

/// `v(u)` along the First branch from `(0, v0)`, lifted.
pub fn first_branch_v(def: &Deformation, u: f64, v0: f64, cfg: &FlowConfig) -> Result<f64> {
    Ok(flow_to(def, TorusPoint::new(0.0, v0), Branch::First, Stop::USpan(u), cfg)?.point.v)
}

/// `u(2π)` along the Second branch from `(u0, 0)`, lifted.
pub fn poincare_v0(def: &Deformation, u0: f64, cfg: &FlowConfig) -> Result<f64> {
    Ok(flow_to(def, TorusPoint::new(u0, 0.0), Branch::Second, Stop::VSpan(TAU), cfg)?.point.u)
}

/// First return to Σ from `(s0, s0)`. The lifted return parameter is the
/// coordinate that stays near `s0`: `v` for First, `u` for Second.
pub fn poincare_diag(def: &Deformation, s0: f64, branch: Branch, cfg: &FlowConfig) -> Result<f64> {
    let c = section_crossing(def, TorusPoint::new(s0, s0), branch, SectionKind::Diagonal, cfg)?;
    Ok(match branch {
        Branch::First => c.point.v,
        Branch::Second => c.point.u,
    })
}

/// One application of the return map for `(branch, section)`.
pub fn return_map(
    def: &Deformation,
    x: f64,
    branch: Branch,
    section: SectionKind,
    cfg: &FlowConfig,
) -> Result<f64> {
    match (branch, section) {
        (Branch::First, SectionKind::U0) => poincare_u0(def, x, cfg),
        (Branch::Second, SectionKind::V0) => poincare_v0(def, x, cfg),
        (_, SectionKind::Diagonal) => poincare_diag(def, x, branch, cfg),
        _ => Err(Error::InvalidArgument(format!(
            "section {} is a leaf direction of the {} branch at ε = 0",
            section.name(),
            branch.name()
        ))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationEstimate {
    pub rho: f64,
    pub n: usize,
    pub err: f64,
    pub eps: f64,
    pub branch: Branch,
    pub section: SectionKind,
    /// Smoothly weighted average of the single-return displacements.
    pub rho_birkhoff: f64,
}

pub fn rotation_number(
    def: &Deformation,
    branch: Branch,
    section: SectionKind,
    n: usize,
    start: f64,
    cfg: &FlowConfig,
) -> Result<RotationEstimate> {
    if n < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 returns, got {n}")));
    }
    let mut x = start;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut wsum = 0.0;
    let mut wacc = 0.0;
    for k in 0..n {
        let next = return_map(def, x, branch, section, cfg)?;
        let disp = next - x;
        lo = lo.min(disp);
        hi = hi.max(disp);
        let t = (k as f64 + 0.5) / n as f64;
        let w = (-1.0 / (t * (1.0 - t))).exp();
        wsum += w;
        wacc += w * disp;
        x = next;
    }
    let turns = TAU * n as f64;
    Ok(RotationEstimate {
        rho: (x - start) / turns,
        n,
        err: (hi - lo) / turns,
        eps: def.eps(),
        branch,
        section,
        rho_birkhoff: wacc / wsum / TAU,
    })
}

/// Distance from `x` to the nearest rational `p/q` with `1 <= q <= q_max`.
pub fn distance_to_rationals(x: f64, q_max: u32) -> (f64, u32) {
    let mut best = (f64::INFINITY, 1);
    for q in 1..=q_max {
        let qf = q as f64;
        let d = (x - (x * qf).round() / qf).abs();
        if d < best.0 {
            best = (d, q);
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanRow {
    pub eps: f64,
    pub first: RotationEstimate,
    pub second: RotationEstimate,
    /// `min` over both branches of the distance to rationals with small
    /// denominator, less the estimate error.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
    pub selected_eps: Option<f64>,
    pub selected_margin: f64,
    pub denominator_bound: u32,
}

/// Rotation numbers of both foliations over a list of ε values; the First
/// branch on `{u = 0}` and the Second on `{v = 0}`.
pub fn epsilon_scan(
    eps_list: &[f64],
    bump: &dyn crate::geometry::BumpFunction,
    n: usize,
    q_max: u32,
    cfg: &FlowConfig,
) -> Result<ScanTable> {
    if q_max < 2 {
        return Err(Error::InvalidArgument(format!("denominator bound must be >= 2, got {q_max}")));
    }
    let rows: Vec<Result<ScanRow>> = eps_list
        .par_iter()
        .map(|&eps| {
            let def = Deformation::new(eps, bump);
            let first = rotation_number(&def, Branch::First, SectionKind::U0, n, 0.0, cfg)?;
            let second = rotation_number(&def, Branch::Second, SectionKind::V0, n, 0.0, cfg)?;
            let m1 = distance_to_rationals(first.rho, q_max).0 - first.err;
            let m2 = distance_to_rationals(second.rho, q_max).0 - second.err;
            Ok(ScanRow { eps, first, second, margin: m1.min(m2).max(0.0) })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let mut selected_eps = None;
    let mut selected_margin = 0.0;
    for r in &rows {
        if r.margin > selected_margin {
            selected_margin = r.margin;
            selected_eps = Some(r.eps);
        }
    }
    Ok(ScanTable { rows, selected_eps, selected_margin, denominator_bound: q_max })
}

/// Fraction of the cells of a `cells × cells` partition of `[0, 2π)²`
/// visited by the orbit. Consecutive samples are joined by densified
/// segments so no cell along the path is skipped.
pub fn coverage_fraction(orbit: &Orbit, cells: usize) -> f64 {
    if cells == 0 || orbit.samples.is_empty() {
        return 0.0;
    }
    let width = TAU / cells as f64;
    let mut visited = vec![false; cells * cells];
    let cell = |x: f64| ((wrap_angle(x) / width) as usize).min(cells - 1);
    let mut mark = |u: f64, v: f64| visited[cell(u) * cells + cell(v)] = true;
    let first = orbit.samples[0].point;
    mark(first.u, first.v);
    for pair in orbit.samples.windows(2) {
        let (a, b) = (pair[0].point, pair[1].point);
        let span = (b.u - a.u).abs().max((b.v - a.v).abs());
        let pieces = (span / (0.25 * width)).ceil().max(1.0) as usize;
        for k in 1..=pieces {
            let t = k as f64 / pieces as f64;
            mark(a.u + t * (b.u - a.u), a.v + t * (b.v - a.v));
        }
    }
    visited.iter().filter(|&&x| x).count() as f64 / (cells * cells) as f64
}

/// Pointwise distance between the σ-image of a First-branch orbit of `first`
/// and the Second-branch orbit of `second`, both started at `(s0, s0)` and
/// compared at `samples` points over one return to Σ.
pub fn sigma_orbit_deviation(
    first: &Deformation,
    second: &Deformation,
    s0: f64,
    samples: usize,
    cfg: &FlowConfig,
) -> Result<f64> {
    let start = TorusPoint::new(s0, s0);
    let ret = section_crossing(first, start, Branch::First, SectionKind::Diagonal, cfg)?;
    let span = ret.point.u - s0;
    let mut worst: f64 = 0.0;
    for k in 1..=samples {
        let du = span * k as f64 / samples as f64;
        let p = flow_to(first, start, Branch::First, Stop::USpan(du), cfg)?.point;
        // σ(p) = (p.v, p.u) should lie on the Second-branch orbit at v = p.u
        let q = flow_to(second, start, Branch::Second, Stop::VSpan(p.u - s0), cfg)?.point;
        worst = worst.max((q.u - p.v).abs().max((q.v - p.u).abs()));
    }
    Ok(worst)
}
