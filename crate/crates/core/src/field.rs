//! The principal-line equation `L dv² + M du dv + N du² = 0`, its two
//! projective root fields and the closed-form ε-polynomials of `(L, M, N)`
//! for the deformed Clifford family.

use rayon::prelude::*;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::forms::{forms_s3, ClosedFormVariant, closed_form_from_jet, FormCoefficients};
use crate::geometry::{BumpJet, Deformation, TorusPoint};

pub const DEFAULT_UMBILIC_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FieldCoefficients {
    pub l: f64,
    pub m: f64,
    pub n: f64,
}

impl FieldCoefficients {
    pub const fn new(l: f64, m: f64, n: f64) -> Self {
        Self { l, m, n }
    }

    pub fn discriminant(&self) -> f64 {
        self.m * self.m - 4.0 * self.l * self.n
    }

    pub fn max_abs(&self) -> f64 {
        self.l.abs().max(self.m.abs()).max(self.n.abs())
    }

    pub fn scaled(self, k: f64) -> Self {
        Self { l: k * self.l, m: k * self.m, n: k * self.n }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.l, self.m, self.n]
    }

    /// Value of the quadratic form at the chart direction `(du, dv)`.
    pub fn eval(&self, d: [f64; 2]) -> f64 {
        self.l * d[1] * d[1] + self.m * d[0] * d[1] + self.n * d[0] * d[0]
    }
}

/// The two principal foliations, labelled by their ε = 0 limits:
/// `First` is tangent to `(1:0)`, `Second` to `(0:1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    First,
    Second,
}

impl Branch {
    pub fn other(self) -> Self {
        match self {
            Self::First => Self::Second,
            Self::Second => Self::First,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::First => "first",
            Self::Second => "second",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "first" => Some(Self::First),
            "second" => Some(Self::Second),
            _ => None,
        }
    }
}

/// A unit chart direction `(du, dv)`, identified up to sign.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectiveDirection {
    pub du: f64,
    pub dv: f64,
}

impl ProjectiveDirection {
    /// Normalizes `(du, dv)`; the sign is fixed so that `du > 0`, or `dv > 0`
    /// when `du = 0`.
    pub fn new(du: f64, dv: f64) -> Self {
        let len = du.hypot(dv);
        let s = if du > 0.0 || (du == 0.0 && dv > 0.0) { 1.0 } else { -1.0 };
        Self { du: s * du / len, dv: s * dv / len }
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.du, self.dv]
    }

    /// Angle in `[0, π/2]` between the two lines.
    pub fn angle_to(&self, other: &Self) -> f64 {
        line_angle(self.as_array(), other.as_array())
    }
}

/// Angle in `[0, π/2]` between two lines through the origin.
pub fn line_angle(a: [f64; 2], b: [f64; 2]) -> f64 {
    let cross = a[0] * b[1] - a[1] * b[0];
    let dot = a[0] * b[0] + a[1] * b[1];
    cross.abs().atan2(dot.abs())
}

/// `L = Fg − Gf`, `M = Eg − Ge`, `N = Ef − Fe`, without normalization.
pub fn lmn_from_forms(fc: &FormCoefficients) -> FieldCoefficients {
    let (i, ii) = (fc.first, fc.second);
    FieldCoefficients {
        l: i.f * ii.g - i.g * ii.f,
        m: i.e * ii.g - i.g * ii.e,
        n: i.e * ii.f - i.f * ii.e,
    }
}

/// `(L, M, N)` of `α^ε` from the jet/determinant pipeline, scaled by
/// `4(1 + ε²h²)⁴ √(EG − F²)` so that `(L, M, N) = (0, 1, 0)` at ε = 0.
pub fn lmn_geometric(def: &Deformation, pt: TorusPoint) -> Result<FieldCoefficients> {
    let fc = forms_s3(&def.jet(pt)).map_err(|e| with_point(e, pt))?;
    let h = def.bump.jet(pt).h;
    let eps = def.eps();
    let s = 1.0 + eps * eps * h * h;
    let s2 = s * s;
    Ok(lmn_from_forms(&fc).scaled(4.0 * s2 * s2 * fc.first.det().sqrt()))
}

pub(crate) fn with_point(err: Error, pt: TorusPoint) -> Error {
    match err {
        Error::DegenerateMetric { det, .. } => Error::DegenerateMetric { u: pt.u, v: pt.v, det },
        other => other,
    }
}

/// Polynomial coefficients in ε (index = power) of L, M and N.
pub type LmnSeries = [[f64; 9]; 3];

pub fn lmn_series(b: &BumpJet, variant: ClosedFormVariant) -> LmnSeries {
    let BumpJet { h, hu, hv, huu, huv, hvv, .. } = *b;
    let h2 = h * h;
    let h3 = h2 * h;
    let h4 = h2 * h2;
    let h5 = h4 * h;
    let h6 = h3 * h3;
    let (hu2, hv2) = (hu * hu, hv * hv);
    let uv = hu * hv;
    let derived = variant == ClosedFormVariant::Derived;

    let l = [
        0.0,
        huv,
        2.0 * h * huv + uv,
        -2.0 * uv * hvv + 2.0 * hv2 * huv + huv * h2 + 2.0 * uv * h,
        2.0 * uv * h2 + 4.0 * uv * hv2,
        -h4 * huv + 2.0 * uv * h2 * hvv + 4.0 * h3 * uv - 2.0 * hv2 * h2 * huv,
        -2.0 * h5 * huv + 5.0 * uv * h4,
        2.0 * h5 * uv - h6 * huv,
        0.0,
    ];
    let m4 = if derived {
        -2.0 * h4 + 6.0 * h2 * hu2 + 6.0 * h2 * hv2 + 8.0 * hu2 * hv2
    } else {
        -6.0 * hv2 * h2 - 2.0 * h2 + 8.0 * hu2 * hv2 + 6.0 * hu2 * h2
    };
    let m5_huu = if derived { -h4 * huu } else { -h2 * huu };
    let m = [
        1.0,
        huu - hvv,
        2.0 * h * (hvv + huu) + 3.0 * (hv2 + hu2),
        -h2 * hvv + 6.0 * hu2 * h - 2.0 * hu2 * hvv + 2.0 * hv2 * huu - 6.0 * h * hv2 + h2 * huu,
        m4,
        h4 * hvv + m5_huu - 8.0 * h3 * hv2 - 2.0 * h2 * hv2 * huu + 2.0 * h2 * hu2 * hvv
            + 8.0 * h3 * hu2,
        -2.0 * h5 * hvv - 2.0 * h5 * huu + 7.0 * h4 * hv2 + 7.0 * h4 * hu2,
        -h6 * huu + h6 * hvv + 2.0 * h5 * hu2 - 2.0 * h5 * hv2,
        h4 * h4,
    ];
    let n3_tail = if derived { -2.0 * h * uv } else { -huv * hv2 };
    let n = [
        0.0,
        -huv,
        2.0 * h * huv + uv,
        2.0 * uv * huu - 2.0 * hu2 * huv + n3_tail - huv * h2,
        2.0 * uv * h2 + 4.0 * hu2 * uv,
        h4 * huv - 2.0 * uv * h2 * huu - 4.0 * h3 * uv + 2.0 * hu2 * h2 * huv,
        -2.0 * h5 * huv + 5.0 * uv * h4,
        -2.0 * h5 * uv + h6 * huv,
        0.0,
    ];
    [l, m, n]
}

fn horner(c: &[f64; 9], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

pub fn eval_series(series: &LmnSeries, eps: f64) -> FieldCoefficients {
    FieldCoefficients {
        l: horner(&series[0], eps),
        m: horner(&series[1], eps),
        n: horner(&series[2], eps),
    }
}

/// The ε-polynomials of `(L, M, N)` (normalized so that M = 1 at ε = 0).
pub fn lmn_closed_form(pt: TorusPoint, def: &Deformation) -> FieldCoefficients {
    eval_series(&lmn_series(&def.bump.jet(pt), ClosedFormVariant::Derived), def.eps())
}

/// The ε-polynomials exactly as typeset.
pub fn lmn_printed(pt: TorusPoint, def: &Deformation) -> FieldCoefficients {
    eval_series(&lmn_series(&def.bump.jet(pt), ClosedFormVariant::Printed), def.eps())
}

/// `−4(1 + ε²h²)⁴ · (Fg − Gf, Eg − Ge, Ef − Fe)` from closed-form coefficients.
pub fn lmn_from_display(b: &BumpJet, eps: f64, variant: ClosedFormVariant) -> FieldCoefficients {
    let fc = closed_form_from_jet(b, eps, variant);
    let s = 1.0 + eps * eps * b.h * b.h;
    let s2 = s * s;
    lmn_from_forms(&fc).scaled(-4.0 * s2 * s2)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Consistency {
    /// Max componentwise deviation between the polynomials and the product
    /// built from the closed-form E…g, relative to max(|L|,|M|,|N|).
    pub identity_residual: f64,
    /// Max angle between matched roots of the polynomials and of the jet pipeline.
    pub root_angle: f64,
    /// Sign of the factor relating the polynomials to the unnormalized
    /// determinant-convention `(L, M, N)`.
    pub normalization_sign: f64,
}

pub fn consistency_check(pt: TorusPoint, def: &Deformation) -> Result<Consistency> {
    consistency_check_variant(pt, def, ClosedFormVariant::Derived)
}

pub fn consistency_check_variant(
    pt: TorusPoint,
    def: &Deformation,
    variant: ClosedFormVariant,
) -> Result<Consistency> {
    let b = def.bump.jet(pt);
    let series = eval_series(&lmn_series(&b, variant), def.eps());
    let product = lmn_from_display(&b, def.eps(), variant);
    let scale = series.max_abs();
    let identity_residual = series
        .as_array()
        .iter()
        .zip(product.as_array().iter())
        .map(|(a, c)| (a - c).abs() / scale)
        .fold(0.0, f64::max);

    let raw = lmn_from_forms(&forms_s3(&def.jet(pt)).map_err(|e| with_point(e, pt))?);
    let (a1, a2) = principal_directions(&series)?;
    let (b1, b2) = principal_directions(&raw)?;
    let root_angle = matched_angle((a1, a2), (b1, b2));
    let dot: f64 = series.as_array().iter().zip(raw.as_array().iter()).map(|(x, y)| x * y).sum();
    Ok(Consistency { identity_residual, root_angle, normalization_sign: dot.signum() })
}

/// Max angle between two direction pairs after optimal matching.
pub fn matched_angle(
    a: (ProjectiveDirection, ProjectiveDirection),
    b: (ProjectiveDirection, ProjectiveDirection),
) -> f64 {
    let straight = a.0.angle_to(&b.0).max(a.1.angle_to(&b.1));
    let crossed = a.0.angle_to(&b.1).max(a.1.angle_to(&b.0));
    straight.min(crossed)
}

pub fn principal_directions(
    fc: &FieldCoefficients,
) -> Result<(ProjectiveDirection, ProjectiveDirection)> {
    principal_directions_tol(fc, DEFAULT_UMBILIC_TOL)
}

/// The two projective roots of `L dv² + M du dv + N du² = 0`.
///
/// Returned in the order `(q : N)`, `(L : q)` with
/// `q = −(M + sgn(M)√(M² − 4LN))/2`; at `(0, 1, 0)` these are exactly
/// `(1:0)` and `(0:1)`.
pub fn principal_directions_tol(
    fc: &FieldCoefficients,
    umbilic_tol: f64,
) -> Result<(ProjectiveDirection, ProjectiveDirection)> {
    if fc.max_abs() < umbilic_tol || !fc.max_abs().is_finite() {
        return Err(Error::Umbilic { u: f64::NAN, v: f64::NAN, magnitude: fc.max_abs() });
    }
    let disc = fc.discriminant().max(0.0).sqrt();
    let sgn = if fc.m >= 0.0 { 1.0 } else { -1.0 };
    let q = -0.5 * (fc.m + sgn * disc);
    if q == 0.0 {
        // M = 0 and LN = 0 with one of L, N nonzero: a double root
        return Err(Error::Umbilic { u: f64::NAN, v: f64::NAN, magnitude: 0.0 });
    }
    Ok((ProjectiveDirection::new(q, fc.n), ProjectiveDirection::new(fc.l, q)))
}

/// Picks one of the two directions for `branch`, oriented consistently.
///
/// Without `prev`, `First` takes the direction closer to `(1:0)` oriented
/// toward increasing u, and `Second` the one closer to `(0:1)` toward
/// increasing v. With `prev`, the direction of larger `|cos|` with `prev` is
/// chosen and its sign aligned with `prev`.
pub fn select_branch(
    dirs: (ProjectiveDirection, ProjectiveDirection),
    branch: Branch,
    prev: Option<[f64; 2]>,
) -> Result<[f64; 2]> {
    let (a, b) = (dirs.0.as_array(), dirs.1.as_array());
    let reference = match prev {
        Some(p) => p,
        None => match branch {
            Branch::First => [1.0, 0.0],
            Branch::Second => [0.0, 1.0],
        },
    };
    let ca = a[0] * reference[0] + a[1] * reference[1];
    let cb = b[0] * reference[0] + b[1] * reference[1];
    let rn = reference[0].hypot(reference[1]);
    if (ca.abs() - cb.abs()).abs() <= 1e-12 * rn {
        return Err(Error::AmbiguousBranch);
    }
    let (pick, c) = if ca.abs() > cb.abs() { (a, ca) } else { (b, cb) };
    Ok(if c < 0.0 { [-pick[0], -pick[1]] } else { pick })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UmbilicScan {
    pub min_discriminant: f64,
    pub min_magnitude: f64,
    pub argmin: TorusPoint,
}

/// Scans an `n × n` grid of the canonical torus with the normalized geometric `(L, M, N)`.
pub fn umbilic_scan(def: &Deformation, grid_n: usize) -> Result<UmbilicScan> {
    if grid_n < 16 {
        return Err(Error::InvalidArgument(format!("grid_n must be at least 16, got {grid_n}")));
    }
    let step = TAU / grid_n as f64;
    let rows: Vec<Result<UmbilicScan>> = (0..grid_n)
        .into_par_iter()
        .map(|i| {
            let mut best = UmbilicScan {
                min_discriminant: f64::INFINITY,
                min_magnitude: f64::INFINITY,
                argmin: TorusPoint::new(0.0, 0.0),
            };
            for j in 0..grid_n {
                let pt = TorusPoint::new(i as f64 * step, j as f64 * step);
                let c = lmn_geometric(def, pt)?;
                best.min_discriminant = best.min_discriminant.min(c.discriminant());
                if c.max_abs() < best.min_magnitude {
                    best.min_magnitude = c.max_abs();
                    best.argmin = pt;
                }
            }
            Ok(best)
        })
        .collect();
    let mut out = UmbilicScan {
        min_discriminant: f64::INFINITY,
        min_magnitude: f64::INFINITY,
        argmin: TorusPoint::new(0.0, 0.0),
    };
    for row in rows {
        let row = row?;
        out.min_discriminant = out.min_discriminant.min(row.min_discriminant);
        if row.min_magnitude < out.min_magnitude {
            out.min_magnitude = row.min_magnitude;
            out.argmin = row.argmin;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{first_form, FirstForm, SecondForm};
    use crate::geometry::{clifford, BumpFunction, Sin2Bump};

    #[test]
    fn clifford_lmn() {
        let fc = crate::forms::forms_s3(&clifford(TorusPoint::new(0.3, 1.0))).unwrap();
        let c = lmn_from_forms(&fc);
        assert!(c.l.abs() < 1e-15 && (c.m - 0.5).abs() < 1e-14 && c.n.abs() < 1e-15);
        assert!(c.discriminant() > 0.0);
    }

    #[test]
    fn geometric_normalization_at_zero() {
        let def = Deformation::new(0.0, &Sin2Bump);
        let c = lmn_geometric(&def, TorusPoint::new(2.0, 0.4)).unwrap();
        assert_eq!(c.l, 0.0);
        assert_eq!(c.n, 0.0);
        assert!((c.m - 1.0).abs() < 1e-14);
    }

    #[test]
    fn scaling_leaves_roots_unchanged() {
        let c = FieldCoefficients::new(0.3, 1.2, -0.7);
        let (a1, a2) = principal_directions(&c).unwrap();
        let (b1, b2) = principal_directions(&c.scaled(-3.5)).unwrap();
        assert!(matched_angle((a1, a2), (b1, b2)) < 1e-15);
    }

    #[test]
    fn degenerate_quadratic_roots() {
        let (a, b) = principal_directions(&FieldCoefficients::new(0.0, 1.0, 0.0)).unwrap();
        assert_eq!(a.as_array(), [1.0, 0.0]);
        assert_eq!(b.as_array(), [0.0, 1.0]);
        let (a, b) = principal_directions(&FieldCoefficients::new(1.0, 0.0, -1.0)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut got = [a.as_array(), b.as_array()];
        got.sort_by(|x, y| x[1].partial_cmp(&y[1]).unwrap());
        assert!((got[0][0] - s).abs() < 1e-15 && (got[0][1] + s).abs() < 1e-15);
        assert!((got[1][0] - s).abs() < 1e-15 && (got[1][1] - s).abs() < 1e-15);
    }

    #[test]
    fn umbilic_error() {
        let r = principal_directions(&FieldCoefficients::new(1e-12, 0.0, 1e-12));
        assert!(matches!(r, Err(Error::Umbilic { .. })));
    }

    #[test]
    fn roots_satisfy_quadratic_and_are_i_orthogonal() {
        let first = FirstForm { e: 0.7, f: 0.2, g: 1.3 };
        let second = SecondForm { e: -0.4, f: 0.9, g: 0.25 };
        let fc = FormCoefficients { first, second };
        let c = lmn_from_forms(&fc);
        let (a, b) = principal_directions(&c).unwrap();
        assert!(c.eval(a.as_array()).abs() < 1e-15);
        assert!(c.eval(b.as_array()).abs() < 1e-15);
        assert!(first.inner(a.as_array(), b.as_array()).abs() < 1e-15);
    }

    #[test]
    fn branch_selection() {
        let dirs = principal_directions(&FieldCoefficients::new(0.0, 1.0, 0.0)).unwrap();
        assert_eq!(select_branch(dirs, Branch::First, None).unwrap(), [1.0, 0.0]);
        assert_eq!(select_branch(dirs, Branch::Second, None).unwrap(), [0.0, 1.0]);

        let d1 = ProjectiveDirection::new(1.0, 0.02);
        let d2 = ProjectiveDirection::new(-0.02, 1.0);
        let prev = [1.0, 0.01];
        let pick = select_branch((d2, d1), Branch::Second, Some(prev)).unwrap();
        assert!((pick[1] / pick[0] - 0.02).abs() < 1e-15);
        let flipped = select_branch((d1, d2), Branch::First, Some([-1.0, -0.01])).unwrap();
        assert!(flipped[0] < 0.0);

        let e1 = ProjectiveDirection::new(1.0, 1.0);
        let e2 = ProjectiveDirection::new(1.0, -1.0);
        assert_eq!(select_branch((e1, e2), Branch::First, None), Err(Error::AmbiguousBranch));
    }

    #[test]
    fn closed_form_at_zero_and_first_derivatives() {
        let b = Sin2Bump.jet(TorusPoint::new(0.4, 1.7));
        let s = lmn_series(&b, ClosedFormVariant::Derived);
        assert_eq!(eval_series(&s, 0.0).as_array(), [0.0, 1.0, 0.0]);
        assert_eq!(s[1][1], b.huu - b.hvv);
        assert_eq!(s[2][1], -b.huv);
        assert_eq!(2.0 * s[2][2], 2.0 * (2.0 * b.h * b.huv + b.hu * b.hv));
    }

    #[test]
    fn series_agrees_with_display_product() {
        let b = Sin2Bump.jet(TorusPoint::new(0.9, 0.35));
        for &eps in &[0.05, 0.1, 1.0 / 3.0] {
            let a = eval_series(&lmn_series(&b, ClosedFormVariant::Derived), eps);
            let c = lmn_from_display(&b, eps, ClosedFormVariant::Derived);
            for (x, y) in a.as_array().iter().zip(c.as_array().iter()) {
                assert!((x - y).abs() < 1e-13, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn printed_series_differs_only_from_third_order() {
        let b = Sin2Bump.jet(TorusPoint::new(0.9, 0.35));
        let d = lmn_series(&b, ClosedFormVariant::Derived);
        let p = lmn_series(&b, ClosedFormVariant::Printed);
        for k in 0..3 {
            for i in 0..3 {
                assert_eq!(d[k][i], p[k][i]);
            }
        }
        assert_eq!(d[0], p[0]);
        assert_ne!(d[1][4], p[1][4]);
        assert_ne!(d[2][3], p[2][3]);
    }

    #[test]
    fn consistency_at_zero_and_small_eps() {
        let pt = TorusPoint::new(1.1, 2.9);
        let c0 = consistency_check(pt, &Deformation::new(0.0, &Sin2Bump)).unwrap();
        assert!(c0.identity_residual < 1e-12 && c0.root_angle < 1e-12);
        let c = consistency_check(pt, &Deformation::new(0.1, &Sin2Bump)).unwrap();
        assert!(c.identity_residual < 1e-12);
        assert!(c.root_angle < 1e-10, "{}", c.root_angle);
        assert_eq!(c.normalization_sign, 1.0);
    }

    #[test]
    fn pipeline_forms_feed_roots() {
        let def = Deformation::new(0.2, &Sin2Bump);
        let jet = def.jet(TorusPoint::new(0.5, 0.1));
        let fc = crate::forms::forms_s3(&jet).unwrap();
        let c = lmn_from_forms(&fc);
        let (a, b) = principal_directions(&c).unwrap();
        let i = first_form(&jet).unwrap();
        assert!(i.inner(a.as_array(), b.as_array()).abs() < 1e-14);
    }

    #[test]
    fn umbilic_scan_at_zero() {
        let s = umbilic_scan(&Deformation::new(0.0, &Sin2Bump), 16).unwrap();
        assert!((s.min_discriminant - 1.0).abs() < 1e-13);
        assert!(umbilic_scan(&Deformation::new(0.0, &Sin2Bump), 8).is_err());
    }
}
