//! Derivatives of the First-branch flow with respect to ε, their closed forms
//! for `h = sin²(u+v)`, and the variational identities they satisfy.

use rayon::prelude::*;
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::field::{lmn_series, Branch};
use crate::flow::{first_branch_v, flow_to, poincare_u0, FlowConfig, Stop};
use crate::forms::ClosedFormVariant;
use crate::geometry::{BumpFunction, Deformation, TorusPoint};

/// `∂v/∂ε` at ε = 0 for the sin² bump.
pub fn v_eps_closed(u: f64, v0: f64) -> f64 {
    (2.0 * u + 2.0 * v0).sin() - (2.0 * v0).sin()
}

/// Second ε-derivative at ε = 0 as printed in the reference expansion.
pub fn v_epseps_closed(u: f64, v0: f64) -> f64 {
    -1.5 * u - (2.0 * u + 2.0 * v0).sin() + 0.875 * (4.0 * u + 4.0 * v0).sin() + (2.0 * u).sin()
        + (2.0 * v0).sin()
        - (4.0 * v0 + 2.0 * u).sin()
        + 0.125 * (4.0 * v0).sin()
}

/// Second ε-derivative at ε = 0 from the variational equation of the
/// quadratic form with middle coefficient `M` itself.
pub fn v_epseps_corrected(u: f64, v0: f64) -> f64 {
    2.0 * v_epseps_closed(u, v0)
}

/// Check that ε-differentiation settings are meaningful.
fn check_fd(eps_step: f64, cfg: &FlowConfig) -> Result<()> {
    if !(1e-4..=1e-2).contains(&eps_step) {
        return Err(Error::InvalidArgument(format!("eps_step {eps_step} outside [1e-4, 1e-2]")));
    }
    if cfg.tol.rtol > 1e-11 {
        return Err(Error::InvalidArgument(format!(
            "finite differences in ε need rtol <= 1e-11, got {}",
            cfg.tol.rtol
        )));
    }
    Ok(())
}

/// Integrator settings tight enough for ε-differences.
pub fn fd_config() -> FlowConfig {
    FlowConfig::default().with_tol(1e-13, 1e-15)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdDerivatives {
    pub v_eps: f64,
    pub v_epseps: f64,
}

/// Central ε-differences of `v(u, v0, ε)` along the First branch.
pub fn fd_v_derivatives(
    bump: &dyn BumpFunction,
    u: f64,
    v0: f64,
    eps_step: f64,
    cfg: &FlowConfig,
) -> Result<FdDerivatives> {
    check_fd(eps_step, cfg)?;
    let v = |e: f64| first_branch_v(&Deformation::new(e, bump), u, v0, cfg);
    let (p, z, m) = (v(eps_step)?, v(0.0)?, v(-eps_step)?);
    Ok(FdDerivatives {
        v_eps: (p - m) / (2.0 * eps_step),
        v_epseps: (p - 2.0 * z + m) / (eps_step * eps_step),
    })
}

/// Second ε-difference of the return-map displacement with one Richardson
/// step over `eps_step` and `eps_step / 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolonomyEstimate {
    pub coarse: f64,
    pub fine: f64,
    pub extrapolated: f64,
}

pub fn second_order_holonomy(
    bump: &dyn BumpFunction,
    v0: f64,
    eps_step: f64,
    cfg: &FlowConfig,
) -> Result<HolonomyEstimate> {
    let d = |e: f64| -> Result<f64> {
        let r = fd_v_derivatives(bump, TAU, v0, e, cfg)?;
        Ok(r.v_epseps)
    };
    let coarse = d(eps_step)?;
    let fine = d(0.5 * eps_step)?;
    Ok(HolonomyEstimate { coarse, fine, extrapolated: (4.0 * fine - coarse) / 3.0 })
}

/// Largest `||v_ε num| − |v_ε closed||` over an `n × n` grid of `(u, v0)` in
/// `[0, 2π)²`, with the sign relating the two.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridComparison {
    pub max_abs_dev: f64,
    pub sign: f64,
}

pub fn v_eps_grid_comparison(
    bump: &dyn BumpFunction,
    n: usize,
    eps_step: f64,
    cfg: &FlowConfig,
) -> Result<GridComparison> {
    let pts: Vec<(f64, f64)> = (0..n * n)
        .map(|k| (TAU * (k / n) as f64 / n as f64, TAU * (k % n) as f64 / n as f64))
        .collect();
    let vals = pts
        .par_iter()
        .map(|&(u, v0)| Ok((fd_v_derivatives(bump, u, v0, eps_step, cfg)?.v_eps, v_eps_closed(u, v0))))
        .collect::<Result<Vec<_>>>()?;
    let mut dev: f64 = 0.0;
    let mut corr = 0.0;
    for (num, closed) in vals {
        dev = dev.max((num.abs() - closed.abs()).abs());
        corr += num * closed;
    }
    Ok(GridComparison { max_abs_dev: dev, sign: if corr < 0.0 { -1.0 } else { 1.0 } })
}

/// How the coefficients `(a, b, c)` of `a p² + 2b p + c = 0` are read off
/// `(L, M, N)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    /// `(a, 2b, c) = (L, M, N)`, so `b = 1/2` at ε = 0.
    HalfMiddle,
    /// `(a, b, c) = (L, M, N)`.
    FullMiddle,
}

impl Normalization {
    pub fn name(self) -> &'static str {
        match self {
            Self::HalfMiddle => "a=L, 2b=M, c=N",
            Self::FullMiddle => "a=L, b=M, c=N",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
}

/// ε-jets of the First-branch solution through `(0, v0)` at ε = 0, together
/// with the field coefficients at the solution point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VariationalData {
    pub v_eps: f64,
    pub v_ueps: f64,
    pub v_uepseps: f64,
    pub n_eps: f64,
    pub n_epseps: f64,
    pub n_epsv: f64,
    pub m_eps: f64,
}

pub fn variational_data(
    bump: &dyn BumpFunction,
    u: f64,
    v0: f64,
    eps_step: f64,
    cfg: &FlowConfig,
) -> Result<VariationalData> {
    check_fd(eps_step, cfg)?;
    let end = |e: f64| {
        let def = Deformation::new(e, bump);
        flow_to(&def, TorusPoint::new(0.0, v0), Branch::First, Stop::USpan(u), cfg)
    };
    let (p, z, m) = (end(eps_step)?, end(0.0)?, end(-eps_step)?);
    let slope = |s: &crate::flow::OrbitSample| s.direction[1] / s.direction[0];
    let h2 = eps_step * eps_step;
    let v_eps = (p.point.v - m.point.v) / (2.0 * eps_step);
    let v_ueps = (slope(&p) - slope(&m)) / (2.0 * eps_step);
    let v_uepseps = (slope(&p) - 2.0 * slope(&z) + slope(&m)) / h2;

    let pt = TorusPoint::new(u, z.point.v);
    let b = bump.jet(pt);
    let s = lmn_series(&b, ClosedFormVariant::Derived);
    Ok(VariationalData {
        v_eps,
        v_ueps,
        v_uepseps,
        n_eps: s[2][1],
        n_epseps: 2.0 * s[2][2],
        n_epsv: -b.huvv,
        m_eps: s[1][1],
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualReport {
    pub order: Order,
    pub half: f64,
    pub full: f64,
    /// The identity exactly as stated for the sin²-bump expansion, with
    /// `2 v_uεε` in the second-order equation.
    pub printed: f64,
    pub matched: Normalization,
    pub residual: f64,
    /// Largest single term, for judging the residuals.
    pub signal: f64,
}

impl VariationalData {
    /// Residuals of `c_ε + 2b₀ v_uε = 0` or
    /// `c_εε + 2c_vε v_ε + 4b_ε v_uε + 2b₀ v_uεε = 0` under both readings.
    pub fn residuals(&self, order: Order) -> ResidualReport {
        let d = self;
        let eval = |b0: f64, b_eps: f64| match order {
            Order::First => d.n_eps + 2.0 * b0 * d.v_ueps,
            Order::Second => {
                d.n_epseps + 2.0 * d.n_epsv * d.v_eps + 4.0 * b_eps * d.v_ueps + 2.0 * b0 * d.v_uepseps
            }
        };
        let half = eval(0.5, 0.5 * d.m_eps).abs();
        let full = eval(1.0, d.m_eps).abs();
        let (printed, signal) = match order {
            Order::First => ((d.n_eps + d.v_ueps).abs(), d.n_eps.abs().max(d.v_ueps.abs())),
            Order::Second => (
                (d.n_epseps + 2.0 * d.n_epsv * d.v_eps - 2.0 * d.m_eps * d.n_eps + 2.0 * d.v_uepseps).abs(),
                [d.n_epseps, 2.0 * d.n_epsv * d.v_eps, 2.0 * d.m_eps * d.n_eps, d.v_uepseps]
                    .iter()
                    .fold(0.0f64, |a, x| a.max(x.abs())),
            ),
        };
        let (matched, residual) =
            if half <= full { (Normalization::HalfMiddle, half) } else { (Normalization::FullMiddle, full) };
        ResidualReport { order, half, full, printed, matched, residual, signal }
    }
}

pub fn variational_residual(
    bump: &dyn BumpFunction,
    u: f64,
    v0: f64,
    order: Order,
    eps_step: f64,
    cfg: &FlowConfig,
) -> Result<ResidualReport> {
    Ok(variational_data(bump, u, v0, eps_step, cfg)?.residuals(order))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DisplacementFit {
    pub v0: f64,
    pub eps: Vec<f64>,
    pub displacements: Vec<f64>,
    /// Coefficient of ε² in the two-term model `c2 ε² + c3 ε³`.
    pub c2: f64,
    pub c3: f64,
    /// Standard error of `c2` from the residuals.
    pub stderr: f64,
    /// Shift of `c2` when an ε⁴ term is added to the model.
    pub truncation: f64,
    /// `max(stderr, truncation)`.
    pub err: f64,
    /// `(c2 − (−3π/2)) / (3π/2)`.
    pub rel_dev_from_printed: f64,
}

/// Least squares for a model with `k` monomial columns `ε^(2+j)`. Returns
/// coefficients and their standard errors (zero when the fit is exact).
fn monomial_fit(eps: &[f64], y: &[f64], k: usize) -> (Vec<f64>, Vec<f64>) {
    let scale: f64 = eps.iter().fold(0.0f64, |a, &e| a.max(e.abs()));
    let cols = |e: f64| -> Vec<f64> { (0..k).map(|j| (e / scale).powi(2 + j as i32)).collect() };
    let mut ata = vec![vec![0.0; k]; k];
    let mut aty = vec![0.0; k];
    for (&e, &yy) in eps.iter().zip(y) {
        let r = cols(e);
        for i in 0..k {
            aty[i] += r[i] * yy;
            for j in 0..k {
                ata[i][j] += r[i] * r[j];
            }
        }
    }
    let inv = invert(&ata);
    let beta: Vec<f64> = (0..k).map(|i| (0..k).map(|j| inv[i][j] * aty[j]).sum()).collect();
    let nz = eps.iter().filter(|&&e| e != 0.0).count();
    let dof = nz.saturating_sub(k);
    let rss: f64 = eps
        .iter()
        .zip(y)
        .map(|(&e, &yy)| {
            let r = cols(e);
            let fit: f64 = r.iter().zip(&beta).map(|(a, b)| a * b).sum();
            (yy - fit).powi(2)
        })
        .sum();
    let s2 = if dof > 0 { rss / dof as f64 } else { 0.0 };
    let unscale = |j: usize| scale.powi(2 + j as i32);
    let coef = (0..k).map(|j| beta[j] / unscale(j)).collect();
    let se = (0..k).map(|j| (s2 * inv[j][j]).sqrt() / unscale(j)).collect();
    (coef, se)
}

/// Gauss–Jordan inverse of a small well-scaled matrix.
fn invert(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
        a.swap(c, piv);
        let p = a[c][c];
        for x in a[c].iter_mut() {
            *x /= p;
        }
        for r in 0..n {
            if r != c {
                let f = a[r][c];
                let pivot_row = a[c].clone();
                for (x, y) in a[r].iter_mut().zip(pivot_row) {
                    *x -= f * y;
                }
            }
        }
    }
    a.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Fit the return-map displacement `π(v0) − v0` against `c2 ε² + c3 ε³`.
pub fn displacement_fit(
    bump: &dyn BumpFunction,
    eps: &[f64],
    v0: f64,
    cfg: &FlowConfig,
) -> Result<DisplacementFit> {
    let mut distinct: Vec<f64> = eps.iter().copied().filter(|&e| e != 0.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InvalidArgument("need at least 3 distinct nonzero ε values".into()));
    }
    if eps.iter().any(|&e| !(0.0..=0.1).contains(&e)) {
        return Err(Error::InvalidArgument("ε values must lie in [0, 0.1]".into()));
    }
    let displacements = eps
        .par_iter()
        .map(|&e| Ok(poincare_u0(&Deformation::new(e, bump), v0, cfg)? - v0))
        .collect::<Result<Vec<_>>>()?;
    let (two, se) = monomial_fit(eps, &displacements, 2);
    let (three, _) = monomial_fit(eps, &displacements, 3);
    let truncation = (three[0] - two[0]).abs();
    let target = -1.5 * PI;
    Ok(DisplacementFit {
        v0,
        eps: eps.to_vec(),
        c2: two[0],
        c3: two[1],
        stderr: se[0],
        truncation,
        err: se[0].max(truncation),
        rel_dev_from_printed: (two[0] - target) / target.abs(),
        displacements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Sin2Bump, ZeroBump};

    #[test]
    fn closed_forms_at_endpoints() {
        for &v0 in &[0.0, 0.4, 2.9] {
            assert_eq!(v_eps_closed(0.0, v0), 0.0);
            assert!(v_eps_closed(TAU, v0).abs() < 1e-14);
            assert!((v_epseps_closed(TAU, v0) - v_epseps_closed(0.0, v0) + 3.0 * PI).abs() < 1e-12);
            let u = 1.234;
            assert!((v_epseps_closed(u + TAU, v0) - v_epseps_closed(u, v0) + 3.0 * PI).abs() < 1e-12);
        }
        assert!(v_eps_closed(PI / 2.0, 0.0).abs() < 1e-15);
    }

    #[test]
    fn v_epseps_vanishes_at_start() {
        for k in 0..32 {
            let v0 = TAU * k as f64 / 32.0;
            assert!(v_epseps_closed(0.0, v0).abs() < 1e-14);
        }
    }

    #[test]
    fn fd_preconditions() {
        let loose = FlowConfig::default();
        assert!(fd_v_derivatives(&Sin2Bump, 1.0, 0.0, 1e-3, &loose).is_err());
        assert!(fd_v_derivatives(&Sin2Bump, 1.0, 0.0, 1e-1, &fd_config()).is_err());
    }

    #[test]
    fn fd_first_derivative_matches_closed_form() {
        let r = fd_v_derivatives(&Sin2Bump, PI / 3.0, 0.2, 1e-3, &fd_config()).unwrap();
        let c = v_eps_closed(PI / 3.0, 0.2);
        assert!((r.v_eps.abs() - c.abs()).abs() < 1e-5, "{} {c}", r.v_eps);
        assert_eq!(r.v_eps.signum(), c.signum());
    }

    #[test]
    fn fd_second_derivative_matches_corrected_form() {
        for &(u, v0) in &[(PI / 3.0, 0.2), (TAU, 1.0), (4.0, 2.5)] {
            let r = fd_v_derivatives(&Sin2Bump, u, v0, 1e-3, &fd_config()).unwrap();
            assert!((r.v_epseps - v_epseps_corrected(u, v0)).abs() < 1e-4, "{u} {v0} {}", r.v_epseps);
        }
    }

    #[test]
    fn flat_bump_has_no_variation() {
        let r = variational_residual(&ZeroBump, 2.0, 0.3, Order::Second, 1e-3, &fd_config()).unwrap();
        assert_eq!((r.half, r.full, r.printed), (0.0, 0.0, 0.0));
        let d = fd_v_derivatives(&ZeroBump, 2.0, 0.3, 1e-3, &fd_config()).unwrap();
        assert_eq!((d.v_eps, d.v_epseps), (0.0, 0.0));
    }

    #[test]
    fn n_eps_v_equals_v_derivative_of_series() {
        let pt = TorusPoint::new(0.8, 1.9);
        let dv = 1e-5;
        let s = |v: f64| lmn_series(&Sin2Bump.jet(TorusPoint::new(pt.u, v)), ClosedFormVariant::Derived)[2][1];
        let numeric = (s(pt.v + dv) - s(pt.v - dv)) / (2.0 * dv);
        assert!((numeric + Sin2Bump.jet(pt).huvv).abs() < 1e-8);
    }

    #[test]
    fn half_middle_normalization_matches() {
        let cfg = fd_config();
        for &(u, v0) in &[(0.9, 0.1), (2.5, 1.3), (5.0, 4.0)] {
            let r1 = variational_residual(&Sin2Bump, u, v0, Order::First, 1e-4, &cfg).unwrap();
            assert_eq!(r1.matched, Normalization::HalfMiddle);
            assert!(r1.residual < 1e-6, "{r1:?}");
            assert!(r1.full >= 0.1 * r1.signal);
            let r2 = variational_residual(&Sin2Bump, u, v0, Order::Second, 1e-3, &cfg).unwrap();
            assert_eq!(r2.matched, Normalization::HalfMiddle);
            assert!(r2.residual < 1e-3 * r2.signal.max(1.0), "{r2:?}");
        }
    }

    #[test]
    fn fit_ignores_zero_eps() {
        let cfg = FlowConfig::default();
        let a = displacement_fit(&Sin2Bump, &[0.01, 0.02, 0.04], 0.0, &cfg).unwrap();
        let b = displacement_fit(&Sin2Bump, &[0.0, 0.01, 0.02, 0.04], 0.0, &cfg).unwrap();
        assert!((a.c2 - b.c2).abs() < 1e-12);
        assert!((a.c3 - b.c3).abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_bad_inputs() {
        let cfg = FlowConfig::default();
        assert!(displacement_fit(&Sin2Bump, &[0.01, 0.02, 0.02], 0.0, &cfg).is_err());
        assert!(displacement_fit(&Sin2Bump, &[0.01, 0.02, 0.2], 0.0, &cfg).is_err());
    }

    #[test]
    fn fit_recovers_synthetic_polynomial() {
        let eps = [0.01, 0.02, 0.03, 0.04, 0.05];
        let y: Vec<f64> = eps.iter().map(|e| -2.0 * e * e + 7.0 * e * e * e).collect();
        let (c, se) = monomial_fit(&eps, &y, 2);
        assert!((c[0] + 2.0).abs() < 1e-9 && (c[1] - 7.0).abs() < 1e-7);
        assert!(se[0] < 1e-9);
    }

    #[test]
    fn invert_small_matrix() {
        let m = vec![vec![4.0, 1.0], vec![2.0, 3.0]];
        let inv = invert(&m);
        assert!((inv[0][0] - 0.3).abs() < 1e-15 && (inv[1][0] + 0.2).abs() < 1e-15);
    }
}
