//! Adaptive Dormand–Prince 5(4) for complex first-order systems of size two.
//!
//! The integrator visits a prescribed monotone list of output points exactly
//! (steps are clamped so that every target is hit).

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Y = [Complex64; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-14 }
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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn comb(y: &Y, h: f64, terms: &[(f64, &Y)]) -> Y {
    let mut out = *y;
    for (c, k) in terms {
        out[0] += k[0] * (h * c);
        out[1] += k[1] * (h * c);
    }
    out
}

/// Integrates `y′ = f(x, y)` from `(x0, y0)` through `targets` (all on the
/// same side of `x0`, ordered away from it) and returns `y` at each target.
pub fn integrate<F>(f: F, x0: f64, y0: Y, targets: &[f64], tol: Tolerances) -> Result<Vec<Y>>
where
    F: Fn(f64, &Y) -> Y,
{
    let mut out = Vec::with_capacity(targets.len());
    if targets.is_empty() {
        return Ok(out);
    }
    let dir = if targets[targets.len() - 1] >= x0 { 1.0 } else { -1.0 };
    let span = (targets[targets.len() - 1] - x0).abs().max(f64::MIN_POSITIVE);
    let mut x = x0;
    let mut y = y0;
    let mut h = 1e-3 * span;
    let mut k1 = f(x, &y);
    for &target in targets {
        if (target - x) * dir < 0.0 {
            return Err(Error::InvalidArgument("ODE targets must be monotone".into()));
        }
        while (target - x) * dir > 0.0 {
            let remaining = (target - x).abs();
            let mut step = h.min(remaining);
            let hit = step >= remaining * (1.0 - 1e-12);
            if hit {
                step = remaining;
            }
            let hs = step * dir;
            let k2 = f(x + C2 * hs, &comb(&y, hs, &[(A21, &k1)]));
            let k3 = f(x + C3 * hs, &comb(&y, hs, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(x + C4 * hs, &comb(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(x + C5 * hs, &comb(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = f(x + hs, &comb(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
            let yn = comb(&y, hs, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let xn = if hit { target } else { x + hs };
            let k7 = f(xn, &yn);
            let mut err = 0.0_f64;
            for i in 0..2 {
                let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * hs;
                let sc = tol.atol + tol.rtol * y[i].norm().max(yn[i].norm());
                err = err.max(e.norm() / sc);
            }
            if !err.is_finite() {
                err = 1e10;
            }
            if err <= 1.0 {
                x = xn;
                y = yn;
                k1 = k7;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                // Do not let a clamped final step shrink the next one.
                h = if hit { h.max(step * fac) } else { step * fac };
            } else {
                h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if h < 1e-15 * x.abs().max(1e-300) || h < 1e-300 {
                    return Err(Error::StiffFailure { rho: x, step: h });
                }
            }
        }
        out.push(y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        // u'' = -ω²u, u(0)=1, u'(0)=0
        let w = 7.0;
        let f = |_x: f64, y: &Y| [y[1], -y[0] * (w * w)];
        let targets: Vec<f64> = (1..=10).map(|i| i as f64 * 0.3).collect();
        let ys =
            integrate(f, 0.0, [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], &targets, Tolerances::default())
                .unwrap();
        for (t, y) in targets.iter().zip(&ys) {
            assert!((y[0].re - (w * t).cos()).abs() < 1e-8);
        }
    }

    #[test]
    fn backwards_complex_exponential() {
        let l = Complex64::new(0.3, 5.0);
        let f = |_x: f64, y: &Y| [y[0] * l, y[1] * 0.0];
        let ys = integrate(f, 1.0, [Complex64::new(1.0, 0.0); 2], &[0.5, 0.0], Tolerances::default()).unwrap();
        assert!((ys[1][0] - (-l).exp()).norm() < 1e-9);
    }
}
