//! Dormand–Prince 5(4) with its fourth-order continuous extension.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12 }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Continuous extension over one accepted step `[t0, t0 + h]`.
#[derive(Clone, Copy, Debug)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    rc: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let r = &self.rc;
        std::array::from_fn(|i| {
            r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])))
        })
    }

    /// Time derivative of the interpolant.
    pub fn deriv(&self, t: f64) -> [f64; N] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let r = &self.rc;
        std::array::from_fn(|i| {
            let a = r[3][i] + th1 * r[4][i];
            let da = -r[4][i];
            let b = r[2][i] + th * a;
            let db = a + th * da;
            let c = r[1][i] + th1 * b;
            let dc = -b + th1 * db;
            (c + th * dc) / self.h
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Step<const N: usize> {
    pub y1: [f64; N],
    /// Right-hand side at the new point (first stage of the next step).
    pub k_end: [f64; N],
    /// Scaled RMS error estimate; the step is acceptable when `<= 1`.
    pub err: f64,
    pub dense: DenseStep<N>,
}

#[inline]
fn comb<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

/// One Dormand–Prince step from `(t, y)` with first stage `k1 = f(t, y)`.
pub fn dopri5_step<const N: usize, F>(
    f: &mut F,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    tol: Tolerances,
) -> Result<Step<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let k2 = f(t + C2 * h, &comb(y, h, &[(A21, k1)]))?;
    let k3 = f(t + C3 * h, &comb(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = f(t + C4 * h, &comb(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = f(t + C5 * h, &comb(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
    let k6 = f(
        t + h,
        &comb(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    )?;
    let y1 = comb(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = f(t + h, &y1)?;

    let mut acc = 0.0;
    for i in 0..N {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = tol.atol + tol.rtol * y[i].abs().max(y1[i].abs());
        acc += (e / sc) * (e / sc);
    }
    let err = (acc / N as f64).sqrt();

    let mut rc = [[0.0; N]; 5];
    for i in 0..N {
        let ydiff = y1[i] - y[i];
        let bspl = h * k1[i] - ydiff;
        rc[0][i] = y[i];
        rc[1][i] = ydiff;
        rc[2][i] = bspl;
        rc[3][i] = ydiff - h * k7[i] - bspl;
        rc[4][i] = h
            * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }
    Ok(Step { y1, k_end: k7, err, dense: DenseStep { t0: t, h, rc } })
}

/// Step-size factor after a step with scaled error `err`.
pub fn step_factor(err: f64) -> f64 {
    if err == 0.0 {
        5.0
    } else {
        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
    }
}

pub const MIN_STEP: f64 = 1e-14;

/// Integrates from `t0` to `t1` (either direction) and returns the end state.
pub fn integrate<const N: usize, F>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    tol: Tolerances,
) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let dir = (t1 - t0).signum();
    let mut t = t0;
    let mut y = y0;
    let mut k = f(t, &y)?;
    let mut h = dir * 1e-3_f64.min((t1 - t0).abs());
    while (t1 - t) * dir > 0.0 {
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        let s = dopri5_step(&mut f, t, &y, &k, h, tol)?;
        let fac = step_factor(s.err);
        if s.err <= 1.0 {
            t = if (t + h - t1) * dir >= 0.0 { t1 } else { t + h };
            y = s.y1;
            k = s.k_end;
        }
        h *= fac;
        if h.abs() < MIN_STEP {
            return Err(Error::StepCollapse { t, step: h.abs() });
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let y = integrate(|_, y: &[f64; 2]| Ok([y[1], -y[0]]), 0.0, [1.0, 0.0], std::f64::consts::TAU, Tolerances::default())
            .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-9 && y[1].abs() < 1e-9);
    }

    #[test]
    fn backward_integration() {
        let y = integrate(|_, y: &[f64; 1]| Ok([y[0]]), 1.0, [1.0_f64.exp()], 0.0, Tolerances::default()).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn dense_output_tracks_solution() {
        let mut f = |_: f64, y: &[f64; 2]| Ok([y[1], -y[0]]);
        let y0 = [0.0, 1.0];
        let k1 = f(0.0, &y0).unwrap();
        let s = dopri5_step(&mut f, 0.0, &y0, &k1, 0.1, Tolerances::default()).unwrap();
        let mut worst = (0.0_f64, 0.0_f64);
        for i in 0..=20 {
            let t = 0.005 * i as f64;
            worst.0 = worst.0.max((s.dense.eval(t)[0] - t.sin()).abs());
            worst.1 = worst.1.max((s.dense.deriv(t)[0] - t.cos()).abs());
        }
        assert!(worst.0 < 1e-8 && worst.1 < 1e-6, "{worst:?}");
        assert_eq!(s.dense.eval(0.1), s.y1);
    }

    #[test]
    fn error_estimate_scales_at_fifth_order() {
        let mut f = |_: f64, y: &[f64; 1]| Ok([y[0].cos()]);
        let k = f(0.0, &[0.3]).unwrap();
        let tol = Tolerances { rtol: 0.0, atol: 1.0 };
        let a = dopri5_step(&mut f, 0.0, &[0.3], &k, 0.2, tol).unwrap().err;
        let b = dopri5_step(&mut f, 0.0, &[0.3], &k, 0.1, tol).unwrap().err;
        let order = (a / b).log2();
        assert!((4.5..6.5).contains(&order), "observed order {order}");
    }
}
