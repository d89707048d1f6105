//! Stereographic projection from S³ to R³ and the comparison of principal
//! directions before and after it.

use rayon::prelude::*;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::field::{lmn_from_forms, lmn_geometric, principal_directions_tol, ProjectiveDirection};
use crate::flow::Orbit;
use crate::forms::forms_r3;
use crate::geometry::{dot, norm, Deformation, SurfaceJet, SurfaceJet3, SurfaceJet4, TorusPoint};
use crate::jet::Jet2;

/// Points closer than this to the pole are rejected.
pub const POLE_TOL: f64 = 1e-8;
pub const DEFAULT_CLEARANCE: f64 = 0.1;

/// Projection centre on S³ together with a fixed orthogonal map taking it
/// to `e4 = (0, 0, 0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionPole {
    pole: [f64; 4],
    /// Householder vector `w` of `R = I − 2wwᵀ/|w|²`; zero when the pole is `e4`.
    w: [f64; 4],
    w2: f64,
}

impl Default for ProjectionPole {
    fn default() -> Self {
        Self { pole: [0.0, 0.0, 0.0, 1.0], w: [0.0; 4], w2: 0.0 }
    }
}

impl ProjectionPole {
    /// The pole is normalized onto S³.
    pub fn new(p: [f64; 4]) -> Result<Self> {
        let n = norm(&p);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidArgument("pole must be a nonzero finite 4-vector".into()));
        }
        let pole = p.map(|x| x / n);
        let w = [pole[0], pole[1], pole[2], pole[3] - 1.0];
        let w2 = dot(&w, &w);
        if w2 == 0.0 {
            return Ok(Self::default());
        }
        Ok(Self { pole, w, w2 })
    }

    pub fn pole(&self) -> [f64; 4] {
        self.pole
    }

    pub fn rotate(&self, x: [f64; 4]) -> [f64; 4] {
        if self.w2 == 0.0 {
            return x;
        }
        let k = 2.0 * dot(&self.w, &x) / self.w2;
        std::array::from_fn(|i| x[i] - k * self.w[i])
    }

    fn rotate_jet(&self, x: [Jet2; 4]) -> [Jet2; 4] {
        if self.w2 == 0.0 {
            return x;
        }
        let mut k = Jet2::constant(0.0);
        for i in 0..4 {
            k += x[i] * (2.0 * self.w[i] / self.w2);
        }
        std::array::from_fn(|i| x[i] - k * self.w[i])
    }

    fn check(&self, p: &[f64; 4]) -> Result<()> {
        let d: [f64; 4] = std::array::from_fn(|i| p[i] - self.pole[i]);
        let distance = norm(&d);
        if distance < POLE_TOL {
            return Err(Error::PoleProximity { distance });
        }
        Ok(())
    }
}

/// `(q₁, q₂, q₃)/(1 − q₄)` with `q = R·p`.
pub fn stereo(p: [f64; 4], pole: &ProjectionPole) -> Result<[f64; 3]> {
    pole.check(&p)?;
    let q = pole.rotate(p);
    let d = 1.0 - q[3];
    Ok([q[0] / d, q[1] / d, q[2] / d])
}

/// Second-order pushforward of a surface jet through the projection.
pub fn stereo_jet(jet: &SurfaceJet4, pole: &ProjectionPole) -> Result<SurfaceJet3> {
    pole.check(&jet.p)?;
    let q = pole.rotate_jet(jet.components());
    let inv = (Jet2::constant(1.0) - q[3]).recip();
    Ok(SurfaceJet3::from_components([q[0] * inv, q[1] * inv, q[2] * inv]))
}

/// Smallest distance from the pole to `α^ε` over an `n × n` grid.
pub fn pole_clearance(def: &Deformation, pole: &ProjectionPole, n: usize) -> f64 {
    let pole_pt = pole.pole();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let u = TAU * i as f64 / n as f64;
            (0..n)
                .map(|j| {
                    let p = def.jet(TorusPoint::new(u, TAU * j as f64 / n as f64)).p;
                    let d: [f64; 4] = std::array::from_fn(|k| p[k] - pole_pt[k]);
                    norm(&d)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

fn require_clearance(def: &Deformation, pole: &ProjectionPole) -> Result<()> {
    let distance = pole_clearance(def, pole, 64);
    if distance <= DEFAULT_CLEARANCE {
        return Err(Error::PoleProximity { distance });
    }
    Ok(())
}

/// Unoriented angle between two lines in R^D.
pub fn line_angle_nd<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    let (na, nb) = (norm(a), norm(b));
    let sgn = if dot(a, b) < 0.0 { -1.0 } else { 1.0 };
    let diff: [f64; D] = std::array::from_fn(|i| a[i] / na - sgn * b[i] / nb);
    let sum: [f64; D] = std::array::from_fn(|i| a[i] / na + sgn * b[i] / nb);
    2.0 * norm(&diff).atan2(norm(&sum))
}

fn push<const D: usize>(jet: &SurfaceJet<D>, d: [f64; 2]) -> [f64; D] {
    std::array::from_fn(|i| d[0] * jet.du[i] + d[1] * jet.dv[i])
}

/// Angle between the images of the S³ principal directions and the principal
/// directions of `β = Π∘α^ε` computed in R³, at one point.
pub fn principal_deviation_at(def: &Deformation, pt: TorusPoint, pole: &ProjectionPole) -> Result<f64> {
    let s3 = principal_directions_tol(&lmn_geometric(def, pt)?, 0.0)?;
    let beta = stereo_jet(&def.jet(pt), pole)?;
    let r3 = principal_directions_tol(&lmn_from_forms(&forms_r3(&beta)?), 0.0)?;
    let img = |d: ProjectiveDirection| push(&beta, d.as_array());
    let (a0, a1, b0, b1) = (img(s3.0), img(s3.1), img(r3.0), img(r3.1));
    let straight = line_angle_nd(&a0, &b0).max(line_angle_nd(&a1, &b1));
    let crossed = line_angle_nd(&a0, &b1).max(line_angle_nd(&a1, &b0));
    Ok(straight.min(crossed))
}

/// Largest principal-direction deviation over an `n × n` grid.
pub fn principal_match(def: &Deformation, pole: &ProjectionPole, n: usize) -> Result<f64> {
    require_clearance(def, pole)?;
    let rows = (0..n)
        .into_par_iter()
        .map(|i| {
            let u = TAU * (i as f64 + 0.25) / n as f64;
            (0..n).try_fold(0.0f64, |acc, j| {
                let v = TAU * (j as f64 + 0.5) / n as f64;
                Ok(acc.max(principal_deviation_at(def, TorusPoint::new(u, v), pole)?))
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(rows.into_iter().fold(0.0, f64::max))
}

/// Difference between the angle of two chart vectors measured on S³ and on
/// the projected surface.
pub fn angle_distortion(
    def: &Deformation,
    pt: TorusPoint,
    pole: &ProjectionPole,
    a: [f64; 2],
    b: [f64; 2],
) -> Result<f64> {
    let jet = def.jet(pt);
    let beta = stereo_jet(&jet, pole)?;
    let angle = |x: &[f64], y: &[f64]| {
        let d: f64 = x.iter().zip(y).map(|(p, q)| p * q).sum();
        let nx: f64 = x.iter().map(|p| p * p).sum::<f64>().sqrt();
        let ny: f64 = y.iter().map(|p| p * p).sum::<f64>().sqrt();
        (d / (nx * ny)).clamp(-1.0, 1.0).acos()
    };
    let before = angle(&push(&jet, a), &push(&jet, b));
    let after = angle(&push(&beta, a), &push(&beta, b));
    Ok((before - after).abs())
}

/// Images under `Π∘α^ε` of the orbit samples.
pub fn project_orbit(orbit: &Orbit, def: &Deformation, pole: &ProjectionPole) -> Result<Vec<[f64; 3]>> {
    require_clearance(def, pole)?;
    orbit
        .samples
        .iter()
        .map(|s| stereo(def.jet(s.point).p, pole))
        .collect()
}

/// `Π∘α^ε` at one chart point.
pub fn project_point(def: &Deformation, pt: TorusPoint, pole: &ProjectionPole) -> Result<[f64; 3]> {
    stereo(def.jet(pt).p, pole)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Branch;
    use crate::flow::{integrate_orbit, FlowConfig, Stop};
    use crate::forms::{cross, principal_curvatures};
    use crate::geometry::Sin2Bump;
    use proptest::prelude::*;

    fn e4() -> ProjectionPole {
        ProjectionPole::default()
    }

    #[test]
    fn small_line_angles() {
        let a = [1.0, 0.0, 0.0];
        assert!((line_angle_nd(&a, &[1.0, 1e-10, 0.0]) - 1e-10).abs() < 1e-20);
        assert!((line_angle_nd(&a, &[-1.0, 1e-10, 0.0]) - 1e-10).abs() < 1e-20);
        assert!((line_angle_nd(&a, &[0.0, 0.0, 2.0]) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn basic_points() {
        assert_eq!(stereo([0.0, 0.0, 0.0, -1.0], &e4()).unwrap(), [0.0, 0.0, 0.0]);
        assert_eq!(stereo([1.0, 0.0, 0.0, 0.0], &e4()).unwrap(), [1.0, 0.0, 0.0]);
        assert!(matches!(stereo([0.0, 0.0, 0.0, 1.0], &e4()), Err(Error::PoleProximity { .. })));
    }

    #[test]
    fn rotated_pole_goes_to_e4() {
        let p = ProjectionPole::new([1.0, 2.0, -0.5, 0.3]).unwrap();
        let q = p.rotate(p.pole());
        assert!(q[..3].iter().all(|x| x.abs() < 1e-15) && (q[3] - 1.0).abs() < 1e-15);
        let x = [0.3, -0.1, 0.7, 0.2];
        assert!((norm(&p.rotate(x)) - norm(&x)).abs() < 1e-15);
        let anti = p.pole().map(|x| -x);
        let o = stereo(anti, &p).unwrap();
        assert!(norm(&o) < 1e-15);
    }

    #[test]
    fn default_pole_clearance() {
        for &eps in &[-1.0 / 3.0, 0.0, 0.1, 1.0 / 3.0] {
            let def = Deformation::new(eps, &Sin2Bump);
            assert!(pole_clearance(&def, &e4(), 256) > DEFAULT_CLEARANCE);
        }
        let def = Deformation::new(0.0, &Sin2Bump);
        let c = pole_clearance(&def, &e4(), 256);
        // closest approach is at x₄ = √2/2, |p − e4|² = 2 − √2
        assert!((c - (2.0 - 2f64.sqrt()).sqrt()).abs() < 1e-4);
    }

    #[test]
    fn jet_matches_finite_differences() {
        let def = Deformation::new(1.0 / 3.0, &Sin2Bump);
        let pole = ProjectionPole::new([0.2, 0.1, -0.3, 1.0]).unwrap();
        let pt = TorusPoint::new(0.7, 2.2);
        let j = stereo_jet(&def.jet(pt), &pole).unwrap();
        let f = |u: f64, v: f64| stereo(def.jet(TorusPoint::new(u, v)).p, &pole).unwrap();
        let h = 1e-4;
        for i in 0..3 {
            let du = (f(pt.u + h, pt.v)[i] - f(pt.u - h, pt.v)[i]) / (2.0 * h);
            let dv = (f(pt.u, pt.v + h)[i] - f(pt.u, pt.v - h)[i]) / (2.0 * h);
            assert!((du - j.du[i]).abs() < 1e-6 && (dv - j.dv[i]).abs() < 1e-6);
            let h2 = 1e-3;
            let duu = (f(pt.u + h2, pt.v)[i] - 2.0 * f(pt.u, pt.v)[i] + f(pt.u - h2, pt.v)[i]) / (h2 * h2);
            assert!((duu - j.duu[i]).abs() < 1e-4);
        }
    }

    #[test]
    fn orthonormal_frames_stay_orthonormal_up_to_scale() {
        let def = Deformation::new(0.1, &Sin2Bump);
        let pt = TorusPoint::new(1.3, 0.4);
        let jet = def.jet(pt);
        // Gram–Schmidt in the S³ metric
        let a = [1.0, 0.0];
        let pa = push(&jet, a);
        let pb0 = push(&jet, [0.0, 1.0]);
        let k = dot(&pa, &pb0) / dot(&pa, &pa);
        let b = [-k, 1.0];
        let (la, lb) = (norm(&push(&jet, a)), norm(&push(&jet, b)));
        let (a, b) = ([a[0] / la, a[1] / la], [b[0] / lb, b[1] / lb]);
        let beta = stereo_jet(&jet, &e4()).unwrap();
        let (ia, ib) = (push(&beta, a), push(&beta, b));
        assert!(dot(&ia, &ib).abs() < 1e-9);
        assert!((norm(&ia) - norm(&ib)).abs() < 1e-9);
    }

    #[test]
    fn clifford_projects_to_torus_of_revolution() {
        let def = Deformation::new(0.0, &Sin2Bump);
        for k in 0..16 {
            let v = TAU * k as f64 / 16.0 + 0.1;
            let ka = |u: f64| {
                let fc = forms_r3(&stereo_jet(&def.jet(TorusPoint::new(u, v)), &e4()).unwrap()).unwrap();
                principal_curvatures(&fc)
            };
            let (a, b) = (ka(0.3), ka(4.0));
            assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
            // meridian circles of radius 1 have curvature ±1
            assert!((a.0.abs() - 1.0).abs() < 1e-9 || (a.1.abs() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn principal_lines_are_preserved() {
        for &eps in &[0.0, 0.1, 1.0 / 3.0] {
            let def = Deformation::new(eps, &Sin2Bump);
            let dev = principal_match(&def, &e4(), 32).unwrap();
            assert!(dev < 1e-6, "ε = {eps}: {dev}");
            let other = ProjectionPole::new([0.3, -0.2, 0.1, 1.0]).unwrap();
            assert!(pole_clearance(&def, &other, 256) > DEFAULT_CLEARANCE);
            let dev2 = principal_match(&def, &other, 32).unwrap();
            assert!((dev - dev2).abs() < 1e-6);
        }
        let def = Deformation::new(0.0, &Sin2Bump);
        assert!(principal_match(&def, &e4(), 32).unwrap() < 1e-8);
    }

    #[test]
    fn pole_on_surface_is_rejected() {
        let def = Deformation::new(0.0, &Sin2Bump);
        let on = def.jet(TorusPoint::new(0.5, 0.5)).p;
        let pole = ProjectionPole::new(on).unwrap();
        assert!(matches!(principal_match(&def, &pole, 8), Err(Error::PoleProximity { .. })));
    }

    #[test]
    fn coordinate_circle_is_planar_and_closed() {
        let def = Deformation::new(0.0, &Sin2Bump);
        let o = integrate_orbit(&def, TorusPoint::new(0.0, 0.8), Branch::First, Stop::USpan(TAU), &FlowConfig::default())
            .unwrap();
        let pts = project_orbit(&o, &def, &e4()).unwrap();
        let (p0, p1, p2) = (pts[0], pts[pts.len() / 3], pts[2 * pts.len() / 3]);
        let sub = |a: [f64; 3], b: [f64; 3]| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
        let n = cross(sub(p1, p0), sub(p2, p0));
        let nn = norm(&n);
        for p in &pts {
            assert!((dot(&n, &sub(*p, p0)) / nn).abs() < 1e-9);
        }
        let gap = norm(&sub(pts[0], *pts.last().unwrap()));
        assert!(gap < 1e-10);
    }

    #[test]
    fn deformed_orbit_lies_on_projected_surface() {
        let def = Deformation::new(1.0 / 3.0, &Sin2Bump);
        let o = integrate_orbit(&def, TorusPoint::new(0.0, 0.8), Branch::First, Stop::USpan(TAU), &FlowConfig::default())
            .unwrap();
        let pts = project_orbit(&o, &def, &e4()).unwrap();
        for (s, p) in o.samples.iter().zip(&pts) {
            // independent evaluation from the chart point
            let q = project_point(&def, s.point.canonical(), &e4()).unwrap();
            assert!(norm(&[p[0] - q[0], p[1] - q[1], p[2] - q[2]]) < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn conformal(u in 0.0..TAU, v in 0.0..TAU, eps in -0.34..0.34f64,
                     a0 in -1.0..1.0f64, a1 in -1.0..1.0f64, b0 in -1.0..1.0f64, b1 in -1.0..1.0f64) {
            prop_assume!((a0 * b1 - a1 * b0).abs() > 1e-3);
            let def = Deformation::new(eps, &Sin2Bump);
            let d = angle_distortion(&def, TorusPoint::new(u, v), &e4(), [a0, a1], [b0, b1]).unwrap();
            prop_assert!(d < 1e-9, "{}", d);
        }
    }
}
