//! First and second fundamental forms.
//!
//! For immersions into S³ the second form uses the determinant quotients
//! `det[α, α_u, α_v, α_xx] / √(EG − F²)` with rows in exactly that order. For
//! R³ the classical `⟨n, β_xx⟩` with `n = β_u × β_v / |β_u × β_v|` is used.

use crate::error::{Error, Result};
use crate::geometry::{dot, BumpFunction, BumpJet, Epsilon, SurfaceJet, SurfaceJet3, SurfaceJet4, TorusPoint};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FirstForm {
    pub e: f64,
    pub f: f64,
    pub g: f64,
}

impl FirstForm {
    pub fn det(&self) -> f64 {
        self.e * self.g - self.f * self.f
    }

    /// `I(a, b)` for chart vectors `a = (du, dv)`.
    pub fn inner(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        self.e * a[0] * b[0] + self.f * (a[0] * b[1] + a[1] * b[0]) + self.g * a[1] * b[1]
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SecondForm {
    pub e: f64,
    pub f: f64,
    pub g: f64,
}

impl SecondForm {
    pub fn scaled(self, k: f64) -> Self {
        Self { e: k * self.e, f: k * self.f, g: k * self.g }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FormCoefficients {
    pub first: FirstForm,
    pub second: SecondForm,
}

impl FormCoefficients {
    /// All six values in the order E, F, G, e, f, g.
    pub fn as_array(&self) -> [f64; 6] {
        [self.first.e, self.first.f, self.first.g, self.second.e, self.second.f, self.second.g]
    }
}

pub fn first_form<const D: usize>(jet: &SurfaceJet<D>) -> Result<FirstForm> {
    let form = FirstForm {
        e: dot(&jet.du, &jet.du),
        f: dot(&jet.du, &jet.dv),
        g: dot(&jet.dv, &jet.dv),
    };
    if form.det() > 0.0 {
        Ok(form)
    } else {
        Err(Error::DegenerateMetric { u: f64::NAN, v: f64::NAN, det: form.det() })
    }
}

/// 4×4 determinant of the matrix whose rows are `r`.
pub fn det4(r: [[f64; 4]; 4]) -> f64 {
    // expansion by 2×2 minors of the first two rows
    let m = |i: usize, j: usize| r[0][i] * r[1][j] - r[0][j] * r[1][i];
    let n = |i: usize, j: usize| r[2][i] * r[3][j] - r[2][j] * r[3][i];
    m(0, 1) * n(2, 3) - m(0, 2) * n(1, 3) + m(0, 3) * n(1, 2) + m(1, 2) * n(0, 3)
        - m(1, 3) * n(0, 2)
        + m(2, 3) * n(0, 1)
}

/// `det[α, α_u, α_v, X]` for X = α_uu, α_uv, α_vv, without the metric factor.
pub fn second_form_determinants(jet: &SurfaceJet4) -> [f64; 3] {
    [jet.duu, jet.duv, jet.dvv].map(|x| det4([jet.p, jet.du, jet.dv, x]))
}

pub fn second_form_s3(jet: &SurfaceJet4) -> Result<SecondForm> {
    let w = first_form(jet)?.det().sqrt();
    let [de, df, dg] = second_form_determinants(jet);
    Ok(SecondForm { e: de / w, f: df / w, g: dg / w })
}

pub fn forms_s3(jet: &SurfaceJet4) -> Result<FormCoefficients> {
    let first = first_form(jet)?;
    let w = first.det().sqrt();
    let [de, df, dg] = second_form_determinants(jet);
    Ok(FormCoefficients { first, second: SecondForm { e: de / w, f: df / w, g: dg / w } })
}

pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn unit_normal_r3(jet: &SurfaceJet3) -> Result<[f64; 3]> {
    let n = cross(jet.du, jet.dv);
    let len = dot(&n, &n).sqrt();
    if len > 0.0 {
        Ok(n.map(|x| x / len))
    } else {
        Err(Error::DegenerateMetric { u: f64::NAN, v: f64::NAN, det: 0.0 })
    }
}

pub fn second_form_r3(jet: &SurfaceJet3) -> Result<SecondForm> {
    first_form(jet)?;
    let n = unit_normal_r3(jet)?;
    Ok(SecondForm { e: dot(&n, &jet.duu), f: dot(&n, &jet.duv), g: dot(&n, &jet.dvv) })
}

pub fn forms_r3(jet: &SurfaceJet3) -> Result<FormCoefficients> {
    Ok(FormCoefficients { first: first_form(jet)?, second: second_form_r3(jet)? })
}

/// Principal curvatures, the roots of `det(II − κ I) = 0`, in ascending order.
pub fn principal_curvatures(fc: &FormCoefficients) -> (f64, f64) {
    let (i, ii) = (fc.first, fc.second);
    let a = i.det();
    let b = -(i.e * ii.g + i.g * ii.e - 2.0 * i.f * ii.f);
    let c = ii.e * ii.g - ii.f * ii.f;
    let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
    let q = -0.5 * (b + b.signum() * disc);
    let (k1, k2) = if q != 0.0 { (q / a, c / q) } else { (0.0, 0.0) };
    if k1 <= k2 {
        (k1, k2)
    } else {
        (k2, k1)
    }
}

/// Mean curvature `(κ₁ + κ₂)/2`.
pub fn mean_curvature(fc: &FormCoefficients) -> f64 {
    let (i, ii) = (fc.first, fc.second);
    (i.e * ii.g + i.g * ii.e - 2.0 * i.f * ii.f) / (2.0 * i.det())
}

/// Which variant of the closed-form coefficient display to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosedFormVariant {
    /// Coefficients as derived from the deformation; agrees with the jet pipeline.
    Derived,
    /// The display exactly as typeset, including its transcription slips
    /// (`1 ∓ εh` in E, G and `h_u h_v` in the ε³ bracket of f).
    Printed,
}

/// Closed-form E, F, G, e, f, g of `α^ε` in terms of the jet of `h`.
///
/// The second-form entries follow the display normalization, which equals
/// `−det[α, α_u, α_v, ·]`; see [`display_to_determinant_ratio`].
pub fn closed_form_coefficients(
    pt: TorusPoint,
    eps: Epsilon,
    bump: &dyn BumpFunction,
) -> FormCoefficients {
    closed_form_from_jet(&bump.jet(pt), eps.value(), ClosedFormVariant::Derived)
}

pub fn printed_coefficients(pt: TorusPoint, eps: Epsilon, bump: &dyn BumpFunction) -> FormCoefficients {
    closed_form_from_jet(&bump.jet(pt), eps.value(), ClosedFormVariant::Printed)
}

pub fn closed_form_from_jet(b: &BumpJet, eps: f64, variant: ClosedFormVariant) -> FormCoefficients {
    let BumpJet { h, hu, hv, huu, huv, hvv, .. } = *b;
    let (e1, e2, e3, e4) = (eps, eps * eps, eps.powi(3), eps.powi(4));
    let s = 1.0 + e2 * h * h;
    let d = s * s;
    let (lin, fcross) = match variant {
        ClosedFormVariant::Derived => (2.0, 2.0),
        ClosedFormVariant::Printed => (1.0, 1.0),
    };
    let big_e = (1.0 - lin * e1 * h + 2.0 * e2 * (h * h + hu * hu) - 2.0 * e3 * h.powi(3)
        + e4 * h.powi(4))
        / (2.0 * d);
    let big_f = e2 * hu * hv / d;
    let big_g = (1.0 + lin * e1 * h + 2.0 * e2 * (h * h + hv * hv) + 2.0 * e3 * h.powi(3)
        + e4 * h.powi(4))
        / (2.0 * d);
    let e = (1.0 + e1 * h)
        * (1.0 + e1 * (2.0 * huu - h) + e2 * (4.0 * hu * hu - 2.0 * h * huu - h * h) + e3 * h.powi(3))
        / (4.0 * d);
    let f = e1 * (huv + e2 * h * (fcross * hu * hv - h * huv)) / (2.0 * d);
    let g = (1.0 - e1 * h)
        * (-1.0 + e1 * (2.0 * hvv - h) + e2 * (h * h - 4.0 * hv * hv + 2.0 * h * hvv) + e3 * h.powi(3))
        / (4.0 * d);
    FormCoefficients {
        first: FirstForm { e: big_e, f: big_f, g: big_g },
        second: SecondForm { e, f, g },
    }
}

/// The factor λ with `(e, f, g)_determinant = λ · (e, f, g)_display`.
/// Measured rather than assumed: returns the least-squares ratio over the
/// three entries and the largest relative deviation from it.
pub fn display_to_determinant_ratio(det_form: &SecondForm, display: &SecondForm) -> (f64, f64) {
    let a = [det_form.e, det_form.f, det_form.g];
    let b = [display.e, display.f, display.g];
    let lambda = dot(&a, &b) / dot(&b, &b);
    let scale = a.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let dev = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (x - lambda * y).abs() / scale)
        .fold(0.0, f64::max);
    (lambda, dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{clifford, deformed, Sin2Bump};

    fn sphere_jet(radius: f64, u: f64, v: f64) -> SurfaceJet3 {
        // latitude-longitude chart, u = longitude, v = latitude
        let (su, cu) = u.sin_cos();
        let (sv, cv) = v.sin_cos();
        let r = radius;
        SurfaceJet {
            p: [r * cu * cv, r * su * cv, r * sv],
            du: [-r * su * cv, r * cu * cv, 0.0],
            dv: [-r * cu * sv, -r * su * sv, r * cv],
            duu: [-r * cu * cv, -r * su * cv, 0.0],
            duv: [r * su * sv, -r * cu * sv, 0.0],
            dvv: [-r * cu * cv, -r * su * cv, -r * sv],
        }
    }

    #[test]
    fn clifford_first_form() {
        for &(u, v) in &[(0.0, 0.0), (1.0, 2.0), (-3.0, 4.5)] {
            let i = first_form(&clifford(TorusPoint::new(u, v))).unwrap();
            assert!((i.e - 0.5).abs() < 1e-15 && i.f.abs() < 1e-16 && (i.g - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn clifford_second_form_and_curvatures() {
        let fc = forms_s3(&clifford(TorusPoint::new(0.8, -1.9))).unwrap();
        assert!((fc.second.e + 0.5).abs() < 1e-14);
        assert!(fc.second.f.abs() < 1e-15);
        assert!((fc.second.g - 0.5).abs() < 1e-14);
        let (k1, k2) = principal_curvatures(&fc);
        assert!((k1 + 1.0).abs() < 1e-13 && (k2 - 1.0).abs() < 1e-13);
        assert!(mean_curvature(&fc).abs() < 1e-14);
    }

    #[test]
    fn determinant_row_swap_flips_sign() {
        let j = deformed(TorusPoint::new(0.4, 1.3), Epsilon::new(0.2).unwrap(), &Sin2Bump);
        let a = det4([j.p, j.du, j.dv, j.duu]);
        let b = det4([j.p, j.dv, j.du, j.duu]);
        assert!(a != 0.0 && (a + b).abs() < 1e-15);
    }

    #[test]
    fn det4_of_known_matrices() {
        let id = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];
        assert_eq!(det4(id), 1.0);
        let m = [[2.0, 1.0, 0.0, 3.0], [0.0, -1.0, 4.0, 1.0], [1.0, 0.0, 2.0, 0.0], [3.0, 1.0, 1.0, -2.0]];
        // Leibniz expansion over all permutations
        let brute = {
            let mut total = 0.0;
            let perms = permutations4();
            for (p, sign) in perms {
                total += sign * (0..4).map(|i| m[i][p[i]]).product::<f64>();
            }
            total
        };
        assert!((det4(m) - brute).abs() < 1e-12);
    }

    fn permutations4() -> Vec<([usize; 4], f64)> {
        let mut out = Vec::new();
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let p = [a, b, c, d];
                        let mut seen = [false; 4];
                        if p.iter().all(|&x| !std::mem::replace(&mut seen[x], true)) {
                            let mut inv = 0;
                            for i in 0..4 {
                                for j in i + 1..4 {
                                    if p[i] > p[j] {
                                        inv += 1;
                                    }
                                }
                            }
                            out.push((p, if inv % 2 == 0 { 1.0 } else { -1.0 }));
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn closed_form_at_zero() {
        let fc = closed_form_coefficients(TorusPoint::new(1.0, 2.0), Epsilon::zero(), &Sin2Bump);
        assert_eq!(fc.as_array(), [0.5, 0.0, 0.5, 0.25, 0.0, -0.25]);
    }

    #[test]
    fn closed_form_matches_pipeline() {
        let pt = TorusPoint::new(1.0, 2.0);
        let eps = Epsilon::new(0.1).unwrap();
        let cf = closed_form_coefficients(pt, eps, &Sin2Bump);
        let jet = deformed(pt, eps, &Sin2Bump);
        let i = first_form(&jet).unwrap();
        assert!((i.e - cf.first.e).abs() < 1e-10);
        assert!((i.f - cf.first.f).abs() < 1e-10);
        assert!((i.g - cf.first.g).abs() < 1e-10);
        let ii = second_form_s3(&jet).unwrap();
        let (lambda, dev) = display_to_determinant_ratio(&ii, &cf.second);
        assert!(dev < 1e-12, "deviation {dev}");
        assert!((lambda + 1.0 / i.det().sqrt()).abs() < 1e-10);
    }

    #[test]
    fn printed_display_differs_from_pipeline() {
        let pt = TorusPoint::new(1.0, 2.0);
        let eps = Epsilon::new(0.1).unwrap();
        let printed = printed_coefficients(pt, eps, &Sin2Bump);
        let i = first_form(&deformed(pt, eps, &Sin2Bump)).unwrap();
        assert!((printed.first.e - i.e).abs() > 1e-4);
    }

    #[test]
    fn closed_form_symmetry() {
        let eps = Epsilon::new(1.0 / 3.0).unwrap();
        for &(u, v) in &[(0.1, 1.4), (2.0, 5.5), (3.3, 0.2)] {
            let a = closed_form_coefficients(TorusPoint::new(u, v), eps, &Sin2Bump).as_array();
            let b = closed_form_coefficients(TorusPoint::new(v, u), eps, &Sin2Bump).as_array();
            for (x, y) in a.iter().zip(b.iter()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sphere_is_umbilic() {
        let r = 2.5;
        for &(u, v) in &[(0.3, 0.2), (2.0, -1.0)] {
            let fc = forms_r3(&sphere_jet(r, u, v)).unwrap();
            let ku = fc.second.e / fc.first.e;
            let kv = fc.second.g / fc.first.g;
            assert!((ku.abs() - 1.0 / r).abs() < 1e-14);
            assert!((ku - kv).abs() < 1e-14);
            assert!((fc.second.f * fc.first.e - fc.first.f * fc.second.e).abs() < 1e-14);
        }
    }

    #[test]
    fn plane_has_zero_second_form() {
        let j = SurfaceJet {
            p: [1.0, 2.0, 0.0],
            du: [1.0, 0.5, 0.0],
            dv: [0.0, 2.0, 0.0],
            duu: [0.0; 3],
            duv: [0.0; 3],
            dvv: [0.0; 3],
        };
        let ii = second_form_r3(&j).unwrap();
        assert_eq!((ii.e, ii.f, ii.g), (0.0, 0.0, 0.0));
    }

    #[test]
    fn degenerate_metric_is_rejected() {
        let j = SurfaceJet {
            p: [0.0; 3],
            du: [1.0, 0.0, 0.0],
            dv: [2.0, 0.0, 0.0],
            duu: [0.0; 3],
            duv: [0.0; 3],
            dvv: [0.0; 3],
        };
        assert!(matches!(first_form(&j), Err(Error::DegenerateMetric { .. })));
        assert!(second_form_r3(&j).is_err());
    }
}
