//! Gauss hypergeometric function, complex Gamma, and the closed form of the
//! scaled Wronskian for the linearized potential.
//!
//! For `V ≡ −15/4` the regular branches are hypergeometric in `ρ²`:
//!
//! * `u₀(ρ) = (1 − 2λ) ₂F₁(λ/2 − ½, λ/2 + 3/2; 3/2; ρ²)`,
//! * `u₁(ρ) = 2^{1/2−λ} ρ⁻¹ ₂F₁(λ/2 − 1, λ/2 + 1; λ + ½; 1 − ρ²)`,
//!
//! and the connection formula between the two gives
//!
//! `w₀(λ) = Γ(λ/2 + ¼) Γ(λ/2 + ¾) / (Γ(λ/2 − ½) Γ(λ/2 + 3/2))`,
//!
//! which vanishes exactly at `λ = 1 − 2n` and `λ = −3 − 2n`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type C = Complex64;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Hypergeometric parameters of the spectral problem after the substitution
/// `v = (1 − ρ²)^{1/4+λ/2} w(ρ²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypParams {
    pub a: C,
    pub b: C,
    pub c: C,
}

impl HypParams {
    pub fn new(lambda: C) -> Self {
        Self { a: lambda / 2.0 - 1.0, b: lambda / 2.0 + 1.0, c: C::new(0.5, 0.0) }
    }
}

fn near_nonpositive_integer(z: C, tol: f64) -> bool {
    z.re < 0.5 && z.im.abs() < tol && (z.re - z.re.round()).abs() < tol
}

/// `ln Γ(z)` on any branch (only `exp` of it is meaningful). Errors at poles.
pub fn ln_gamma(z: C) -> Result<C> {
    if near_nonpositive_integer(z, 1e-14) {
        return Err(Error::GammaPole(format!("{z}")));
    }
    if z.re < 0.5 {
        // Γ(z)Γ(1−z) = π / sin(πz)
        let s = (z * PI).sin();
        return Ok(C::new(PI.ln(), 0.0) - s.ln() - ln_gamma(C::new(1.0, 0.0) - z)?);
    }
    let z = z - 1.0;
    let mut x = C::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        x += *c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    Ok(C::new(0.5 * (2.0 * PI).ln(), 0.0) + (z + 0.5) * t.ln() - t + x.ln())
}

pub fn gamma(z: C) -> Result<C> {
    Ok(ln_gamma(z)?.exp())
}

/// `1/Γ(z)`, entire; exactly zero at the poles of `Γ`.
pub fn rgamma(z: C) -> C {
    match ln_gamma(z) {
        Ok(l) => (-l).exp(),
        Err(_) => C::new(0.0, 0.0),
    }
}

fn series(a: C, b: C, c: C, z: C) -> Result<C> {
    let mut term = C::new(1.0, 0.0);
    let mut sum = term;
    for n in 0..20_000 {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() || term.norm() == 0.0 {
            return Ok(sum);
        }
    }
    Err(Error::EvaluationDomain(format!("series did not converge at z = {z}")))
}

/// `₂F₁(a, b; c; z)` near the unit disk and on `(−∞, 1]`, using the
/// `z → 1 − z` and `z → z/(z − 1)` transformations away from the origin.
pub fn f21(a: C, b: C, c: C, z: C) -> Result<C> {
    if near_nonpositive_integer(c, 1e-12) {
        return Err(Error::EvaluationDomain(format!("c = {c} is a nonpositive integer")));
    }
    if z.norm() == 0.0 {
        return Ok(C::new(1.0, 0.0));
    }
    if (z - 1.0).norm() == 0.0 {
        let s = c - a - b;
        if s.re <= 0.0 {
            return Err(Error::EvaluationDomain("Gauss sum diverges at z = 1".into()));
        }
        return gauss_sum(a, b, c);
    }
    if z.norm() <= 0.5 {
        return series(a, b, c, z);
    }
    if (C::new(1.0, 0.0) - z).norm() <= 0.5 {
        return one_minus_z(a, b, c, z);
    }
    let w = z / (z - 1.0);
    if w.norm() <= 0.5 || (C::new(1.0, 0.0) - w).norm() <= 0.5 {
        // Pfaff; the transformed argument lands in one of the two direct regions.
        return Ok((C::new(1.0, 0.0) - z).powc(-a) * f21(a, c - b, c, w)?);
    }
    if z.norm() < 0.95 {
        return series(a, b, c, z);
    }
    Err(Error::EvaluationDomain(format!("z = {z} not reachable")))
}

fn gauss_sum(a: C, b: C, c: C) -> Result<C> {
    Ok((ln_gamma(c)? + ln_gamma(c - a - b)?).exp() * rgamma(c - a) * rgamma(c - b))
}

fn one_minus_z(a: C, b: C, c: C, z: C) -> Result<C> {
    let s = c - a - b;
    if s.im.abs() < 1e-8 && (s.re - s.re.round()).abs() < 1e-8 {
        if z.norm() < 0.95 {
            return series(a, b, c, z);
        }
        // Integer c − a − b: symmetric shifts averaged, then Richardson in δ².
        let avg = |d: f64| -> Result<C> {
            Ok((one_minus_z_generic(a + d, b, c, z)? + one_minus_z_generic(a - d, b, c, z)?) / 2.0)
        };
        let d = 2e-4;
        return Ok((avg(d)? * 4.0 - avg(2.0 * d)?) / 3.0);
    }
    one_minus_z_generic(a, b, c, z)
}

fn one_minus_z_generic(a: C, b: C, c: C, z: C) -> Result<C> {
    let one = C::new(1.0, 0.0);
    let y = one - z;
    let s = c - a - b;
    let lg_c = ln_gamma(c)?;
    let t1 = (lg_c + ln_gamma(s)?).exp() * rgamma(c - a) * rgamma(c - b) * series(a, b, one - s, y)?;
    let t2 = y.powc(s) * (lg_c + ln_gamma(-s)?).exp() * rgamma(a) * rgamma(b) * series(c - a, c - b, one + s, y)?;
    Ok(t1 + t2)
}

/// Scaled Wronskian of the normalized pair for `V ≡ −15/4`.
///
/// The normalization constant in front of the Gamma ratio is exactly one
/// (`u₀(0) = 1 − 2λ`, `u₁(1) = 2^{1/2−λ}` fix it); [`W0_NORMALIZATION`] is kept
/// as a named factor so the ODE cross-check can assert it.
pub fn w0_closed(lambda: C) -> Result<C> {
    let h = lambda / 2.0;
    let p1 = h + 0.25;
    let p2 = h + 0.75;
    for p in [p1, p2] {
        if near_nonpositive_integer(p, 1e-12) {
            return Err(Error::GammaPole(format!("w0 has a pole at lambda = {lambda} (Gamma argument {p})")));
        }
    }
    let q1 = h - 0.5;
    let q2 = h + 1.5;
    if near_nonpositive_integer(q1, 1e-14) || near_nonpositive_integer(q2, 1e-14) {
        return Ok(C::new(0.0, 0.0));
    }
    let l = ln_gamma(p1)? + ln_gamma(p2)? - ln_gamma(q1)? - ln_gamma(q2)?;
    Ok(l.exp() * W0_NORMALIZATION)
}

pub const W0_NORMALIZATION: f64 = 1.0;

/// Regular branch at the centre, hypergeometric form.
pub fn u0_closed(lambda: C, rho: f64) -> Result<C> {
    let one = C::new(1.0, 0.0);
    Ok((one - lambda * 2.0) * f21(lambda / 2.0 - 0.5, lambda / 2.0 + 1.5, C::new(1.5, 0.0), C::new(rho * rho, 0.0))?)
}

/// Regular branch at the lightcone, hypergeometric form.
pub fn u1_closed(lambda: C, rho: f64) -> Result<C> {
    if rho <= 0.0 {
        return Err(Error::EvaluationDomain("u1 is singular at rho = 0".into()));
    }
    let f = f21(lambda / 2.0 - 1.0, lambda / 2.0 + 1.0, lambda + 0.5, C::new(1.0 - rho * rho, 0.0))?;
    Ok(C::new(2.0, 0.0).powc(C::new(0.5, 0.0) - lambda) / rho * f)
}

/// Rectangle `[ε₀, ε₁] × [ω₀, ω₁]` of the λ-plane with scan steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanStrip {
    pub eps: (f64, f64),
    pub omega: (f64, f64),
    pub eps_step: f64,
    pub omega_step: f64,
}

impl ScanStrip {
    pub fn new(eps: (f64, f64), omega: (f64, f64)) -> Self {
        Self { eps, omega, eps_step: 0.01, omega_step: 0.05 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps.0 <= self.eps.1 && self.omega.0 <= self.omega.1)
            || !(self.eps_step > 0.0 && self.omega_step > 0.0)
        {
            return Err(Error::InvalidArgument(format!("bad scan strip {self:?}")));
        }
        Ok(())
    }

    fn axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        let mut v: Vec<f64> = (0..=n).map(|i| lo + i as f64 * step).collect();
        if hi - v[n] > 1e-12 {
            v.push(hi);
        }
        v
    }

    fn clamp(&self, z: C) -> C {
        C::new(z.re.clamp(self.eps.0, self.eps.1), z.im.clamp(self.omega.0, self.omega.1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSample {
    pub eps: f64,
    pub omega: f64,
    pub abs_w0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub min_abs_w0: f64,
    pub argmin_re: f64,
    pub argmin_im: f64,
    pub grid_points: usize,
}

/// `|w₀|` on the scan lattice; lattice points sitting on a pole are skipped.
pub fn scan_grid(strip: &ScanStrip) -> Result<Vec<ScanSample>> {
    strip.validate()?;
    let es = ScanStrip::axis(strip.eps.0, strip.eps.1, strip.eps_step);
    let ws = ScanStrip::axis(strip.omega.0, strip.omega.1, strip.omega_step);
    let mut out = Vec::with_capacity(es.len() * ws.len());
    for &e in &es {
        for &w in &ws {
            if let Ok(v) = w0_closed(C::new(e, w)) {
                out.push(ScanSample { eps: e, omega: w, abs_w0: v.norm() });
            }
        }
    }
    Ok(out)
}

/// Lattice scan of `|w₀|` refined by compass search around the ten smallest values.
pub fn zero_scan(strip: &ScanStrip) -> Result<ScanReport> {
    let mut samples = scan_grid(strip)?;
    let n = samples.len();
    samples.sort_by(|a, b| a.abs_w0.total_cmp(&b.abs_w0));
    let f = |z: C| w0_closed(z).map(|w| w.norm()).unwrap_or(f64::INFINITY);
    let mut best = (f64::INFINITY, C::new(0.0, 0.0));
    for s in samples.iter().take(10) {
        let mut z = C::new(s.eps, s.omega);
        let mut fz = s.abs_w0;
        let mut step = (strip.eps_step, strip.omega_step);
        while step.0.max(step.1) > 1e-13 {
            let mut moved = false;
            for d in [C::new(step.0, 0.0), C::new(-step.0, 0.0), C::new(0.0, step.1), C::new(0.0, -step.1)] {
                let c = strip.clamp(z + d);
                let fc = f(c);
                if fc < fz {
                    z = c;
                    fz = fc;
                    moved = true;
                    break;
                }
            }
            if !moved {
                step = (step.0 / 2.0, step.1 / 2.0);
            }
        }
        if fz < best.0 {
            best = (fz, z);
        }
    }
    Ok(ScanReport { min_abs_w0: best.0, argmin_re: best.1.re, argmin_im: best.1.im, grid_points: n })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C {
        C::new(x, 0.0)
    }

    #[test]
    fn gamma_values() {
        assert!((gamma(c(5.0)).unwrap() - 24.0).norm() < 1e-12);
        assert!((gamma(c(0.5)).unwrap() - PI.sqrt()).norm() < 1e-14);
        assert!((gamma(c(-0.5)).unwrap() + 2.0 * PI.sqrt()).norm() < 1e-13);
        // |Γ(iy)|² = π / (y sinh πy)
        let y = 3.0;
        let g = gamma(C::new(0.0, y)).unwrap().norm_sqr();
        assert!((g / (PI / (y * (PI * y).sinh())) - 1.0).abs() < 1e-12);
        assert!(gamma(c(-2.0)).is_err());
        assert_eq!(rgamma(c(-3.0)), c(0.0));
    }

    #[test]
    fn f21_examples() {
        assert_eq!(f21(c(0.3), C::new(1.0, 2.0), c(0.7), c(0.0)).unwrap(), c(1.0));
        let v = f21(c(1.0), c(1.0), c(2.0), c(0.5)).unwrap();
        assert!((v - 2.0 * 2f64.ln()).norm() < 1e-13);
        let v = f21(c(0.5), c(0.5), c(1.5), c(0.25)).unwrap();
        assert!((v - PI / 3.0).norm() < 1e-13);
        // transformed regions: ln(1−z) identity at z = 0.9 and z = −3
        for z in [0.9, 0.75, -3.0, -0.8] {
            let v = f21(c(1.0), c(1.0), c(2.0), c(z)).unwrap();
            let want = -(1.0 - z).ln() / z;
            assert!((v - want).norm() < 1e-12 * want.abs(), "{z}: {v} vs {want}");
        }
    }

    #[test]
    fn gauss_value() {
        for (a, b, cc) in [(0.2, 0.3, 1.1), (-0.4, 0.7, 2.5), (0.1, -1.3, 0.9)] {
            let direct = f21(c(a), c(b), c(cc), c(1.0 - 1e-14));
            let exact = gauss_sum(c(a), c(b), c(cc)).unwrap();
            let at1 = f21(c(a), c(b), c(cc), c(1.0)).unwrap();
            assert!((at1 - exact).norm() < 1e-12 * exact.norm());
            assert!((direct.unwrap() - exact).norm() < 1e-8 * exact.norm());
        }
    }

    #[test]
    fn w0_zeros_and_symmetry() {
        assert_eq!(w0_closed(c(1.0)).unwrap(), c(0.0));
        assert_eq!(w0_closed(c(-3.0)).unwrap(), c(0.0));
        assert!((w0_closed(c(0.0)).unwrap() + 2f64.sqrt()).norm() < 1e-13);
        assert!(w0_closed(c(0.2)).unwrap().im.abs() <= 1e-12);
        let z = C::new(0.17, 7.3);
        assert!((w0_closed(z.conj()).unwrap() - w0_closed(z).unwrap().conj()).norm() < 1e-12);
        for w in [-100.0, 100.0] {
            assert!((w0_closed(C::new(0.1, w)).unwrap().norm() - 1.0).abs() < 0.15);
        }
        assert!(w0_closed(c(-0.5)).is_err());
    }

    #[test]
    fn closed_branches_normalized() {
        let l = C::new(0.1, 2.0);
        assert!((u0_closed(l, 0.0).unwrap() - (c(1.0) - l * 2.0)).norm() < 1e-15);
        let u1 = u1_closed(l, 1.0).unwrap();
        assert!((u1 - c(2.0).powc(c(0.5) - l)).norm() < 1e-14);
    }

    #[test]
    fn scan_detects_unit_zero() {
        let mut s = ScanStrip::new((0.5, 1.2), (-1.0, 1.0));
        s.omega_step = 0.1;
        let r = zero_scan(&s).unwrap();
        assert!(r.min_abs_w0 < 1e-6);
        assert!((C::new(r.argmin_re, r.argmin_im) - 1.0).norm() < 1e-6);
    }
}
