//! The Clifford torus in S³, its normal-graph deformations and their chart jets.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use crate::error::{Error, Result};
use crate::jet::Jet2;

/// A point of the torus chart. Coordinates are lifted: they are not reduced
/// modulo 2π unless [`TorusPoint::canonical`] is called.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusPoint {
    pub u: f64,
    pub v: f64,
}

impl TorusPoint {
    pub const fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    /// Reduces both coordinates into `[0, 2π)` by floored modulo.
    pub fn canonical(self) -> Self {
        Self { u: wrap_angle(self.u), v: wrap_angle(self.v) }
    }

    /// The reflection `(u, v) ↦ (v, u)`.
    pub fn swapped(self) -> Self {
        Self { u: self.v, v: self.u }
    }
}

/// Floored modulo into `[0, 2π)`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Value and partial derivatives through second order of a chart map into `R^D`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceJet<const D: usize> {
    pub p: [f64; D],
    pub du: [f64; D],
    pub dv: [f64; D],
    pub duu: [f64; D],
    pub duv: [f64; D],
    pub dvv: [f64; D],
}

pub type SurfaceJet4 = SurfaceJet<4>;
pub type SurfaceJet3 = SurfaceJet<3>;

impl<const D: usize> SurfaceJet<D> {
    pub fn from_components(c: [Jet2; D]) -> Self {
        Self {
            p: c.map(|j| j.val),
            du: c.map(|j| j.du),
            dv: c.map(|j| j.dv),
            duu: c.map(|j| j.duu),
            duv: c.map(|j| j.duv),
            dvv: c.map(|j| j.dvv),
        }
    }

    pub fn component(&self, i: usize) -> Jet2 {
        Jet2::new(self.p[i], self.du[i], self.dv[i], self.duu[i], self.duv[i], self.dvv[i])
    }

    pub fn components(&self) -> [Jet2; D] {
        std::array::from_fn(|i| self.component(i))
    }

    /// Largest absolute difference over all entries.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let pairs = [
            (&self.p, &other.p),
            (&self.du, &other.du),
            (&self.dv, &other.dv),
            (&self.duu, &other.duu),
            (&self.duv, &other.duv),
            (&self.dvv, &other.dvv),
        ];
        pairs
            .iter()
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

pub fn dot<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm<const D: usize>(a: &[f64; D]) -> f64 {
    dot(a, a).sqrt()
}

/// Perturbation profile `h` with analytic partials through third order.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BumpJet {
    pub h: f64,
    pub hu: f64,
    pub hv: f64,
    pub huu: f64,
    pub huv: f64,
    pub hvv: f64,
    /// ∂³h/∂u∂v²
    pub huvv: f64,
}

impl BumpJet {
    pub fn as_jet(&self) -> Jet2 {
        Jet2::new(self.h, self.hu, self.hv, self.huu, self.huv, self.hvv)
    }
}

/// A 2π-doubly-periodic perturbation profile.
pub trait BumpFunction: Send + Sync {
    fn jet(&self, pt: TorusPoint) -> BumpJet;

    /// Whether `h(u, v) = h(v, u)` holds identically.
    fn is_symmetric(&self) -> bool {
        false
    }
}

/// `h(u, v) = sin²(u + v)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sin2Bump;

impl BumpFunction for Sin2Bump {
    fn jet(&self, pt: TorusPoint) -> BumpJet {
        let s = pt.u + pt.v;
        let (sn, _) = s.sin_cos();
        let (s2, c2) = (2.0 * s).sin_cos();
        BumpJet {
            h: sn * sn,
            hu: s2,
            hv: s2,
            huu: 2.0 * c2,
            huv: 2.0 * c2,
            hvv: 2.0 * c2,
            huvv: -4.0 * s2,
        }
    }

    fn is_symmetric(&self) -> bool {
        true
    }
}

/// `h ≡ 0`: the undeformed Clifford torus.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroBump;

impl BumpFunction for ZeroBump {
    fn jet(&self, _pt: TorusPoint) -> BumpJet {
        BumpJet::default()
    }

    fn is_symmetric(&self) -> bool {
        true
    }
}

/// Built-in profiles selectable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuiltinBump {
    Sin2,
    Zero,
}

impl BuiltinBump {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "sin2_uv" => Some(Self::Sin2),
            "zero" => Some(Self::Zero),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Sin2 => "sin2_uv",
            Self::Zero => "zero",
        }
    }
}

impl BumpFunction for BuiltinBump {
    fn jet(&self, pt: TorusPoint) -> BumpJet {
        match self {
            Self::Sin2 => Sin2Bump.jet(pt),
            Self::Zero => ZeroBump.jet(pt),
        }
    }

    fn is_symmetric(&self) -> bool {
        true
    }
}

pub fn bump_sin2(pt: TorusPoint) -> BumpJet {
    Sin2Bump.jet(pt)
}

/// Dimensionless deformation parameter.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Epsilon(f64);

impl Epsilon {
    pub const DEFAULT_MAX: f64 = 0.5;

    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() {
            Ok(Self(value))
        } else {
            Err(Error::InvalidArgument(format!("epsilon must be finite, got {value}")))
        }
    }

    pub const fn zero() -> Self {
        Self(0.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_small(self, max: f64) -> bool {
        self.0.abs() < max
    }
}

/// One member `α^ε` of the deformation family, fixed by `ε` and the profile `h`.
#[derive(Clone, Copy)]
pub struct Deformation<'a> {
    pub eps: Epsilon,
    pub bump: &'a dyn BumpFunction,
}

impl<'a> Deformation<'a> {
    pub fn new(eps: f64, bump: &'a dyn BumpFunction) -> Self {
        Self { eps: Epsilon(eps), bump }
    }

    pub fn eps(&self) -> f64 {
        self.eps.0
    }

    /// The same profile at `-ε`.
    pub fn reflected(&self) -> Self {
        Self { eps: Epsilon(-self.eps.0), bump: self.bump }
    }

    pub fn jet(&self, pt: TorusPoint) -> SurfaceJet4 {
        deformed(pt, self.eps, self.bump)
    }
}

impl std::fmt::Debug for Deformation<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Deformation").field("eps", &self.eps.0).finish_non_exhaustive()
    }
}

const R: f64 = FRAC_1_SQRT_2;

/// `α(u, v) = (√2/2)(cos u, sin u, cos v, sin v)` with its partials.
pub fn clifford(pt: TorusPoint) -> SurfaceJet4 {
    let (su, cu) = pt.u.sin_cos();
    let (sv, cv) = pt.v.sin_cos();
    SurfaceJet {
        p: [R * cu, R * su, R * cv, R * sv],
        du: [-R * su, R * cu, 0.0, 0.0],
        dv: [0.0, 0.0, -R * sv, R * cv],
        duu: [-R * cu, -R * su, 0.0, 0.0],
        duv: [0.0; 4],
        dvv: [0.0, 0.0, -R * cv, -R * sv],
    }
}

/// Unit normal of the Clifford torus tangent to S³.
pub fn clifford_normal(pt: TorusPoint) -> [f64; 4] {
    let (su, cu) = pt.u.sin_cos();
    let (sv, cv) = pt.v.sin_cos();
    [-R * cu, -R * su, R * cv, R * sv]
}

fn clifford_jets(pt: TorusPoint) -> ([Jet2; 4], [Jet2; 4]) {
    let u = Jet2::var_u(pt.u);
    let v = Jet2::var_v(pt.v);
    let (cu, su, cv, sv) = (u.cos() * R, u.sin() * R, v.cos() * R, v.sin() * R);
    ([cu, su, cv, sv], [-cu, -su, cv, sv])
}

/// Second-order jet of `α^ε = (α + εhN) / |α + εhN|`.
pub fn deformed(pt: TorusPoint, eps: Epsilon, bump: &dyn BumpFunction) -> SurfaceJet4 {
    let (alpha, normal) = clifford_jets(pt);
    let eh = bump.jet(pt).as_jet().scale(eps.0);
    let w: [Jet2; 4] = std::array::from_fn(|i| alpha[i] + eh * normal[i]);
    let norm_sq = w.iter().fold(Jet2::constant(0.0), |acc, c| acc + *c * *c);
    let inv = norm_sq.sqrt().recip();
    SurfaceJet::from_components(w.map(|c| c * inv))
}

/// Max residual between the analytic partials of [`deformed`] and central
/// differences of its value with the given step.
pub fn jet_selfcheck(
    pt: TorusPoint,
    eps: Epsilon,
    bump: &dyn BumpFunction,
    step: f64,
) -> Result<f64> {
    if !(step > 0.0 && step <= 1e-2) {
        return Err(Error::InvalidArgument(format!("step must lie in (0, 1e-2], got {step}")));
    }
    let val = |du: f64, dv: f64| deformed(TorusPoint::new(pt.u + du, pt.v + dv), eps, bump).p;
    let jet = deformed(pt, eps, bump);
    let c = val(0.0, 0.0);
    let (up, um, vp, vm) = (val(step, 0.0), val(-step, 0.0), val(0.0, step), val(0.0, -step));
    let (pp, pm, mp, mm) =
        (val(step, step), val(step, -step), val(-step, step), val(-step, -step));
    let h2 = step * step;
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        let fd = [
            (up[i] - um[i]) / (2.0 * step),
            (vp[i] - vm[i]) / (2.0 * step),
            (up[i] - 2.0 * c[i] + um[i]) / h2,
            (pp[i] - pm[i] - mp[i] + mm[i]) / (4.0 * h2),
            (vp[i] - 2.0 * c[i] + vm[i]) / h2,
        ];
        let an = [jet.du[i], jet.dv[i], jet.duu[i], jet.duv[i], jet.dvv[i]];
        for (a, b) in an.iter().zip(fd.iter()) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

/// The isometry of R⁴ exchanging the coordinate planes `(x₁, x₂)` and `(x₃, x₄)`.
pub fn swap_planes(x: [f64; 4]) -> [f64; 4] {
    [x[2], x[3], x[0], x[1]]
}
