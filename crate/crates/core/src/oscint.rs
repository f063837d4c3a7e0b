//! Fourier–Laplace inversion on the imaginary axis.
//!
//! * [`osc_check`]: `∫_ℝ e^{iaω} f(ω) dω` for three model symbols.
//! * [`KernelTable`]: `K(ρ,s;τ) = (1/π) Re ∫₀^Ω e^{iωτ}[G − G₀](ρ,s;iω) dω`
//!   from one set of resolvent solves reused for every `(ρ, s, τ)`.
//! * [`laplace_semigroup`]: `S(τ)f̃ = S₀(τ)f̃ + (1/π) Re ∫₀^Ω e^{iωτ}[R_L − R_{L₀}](iω)f̃ dω`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dalembert::{s0_state, FreeData};
use crate::error::{Error, Result};
use crate::odeint::Tolerances;
use crate::quad::gl16;
use crate::resolvent::{
    apply_resolvent, green_free, FundamentalPair, PotentialSpec, ResolventRHS, SolverOptions, SpectralPoint,
};
use crate::simcoords::State;
use crate::specgrid::Grid;

type C = Complex64;

/// Model symbols with residue closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OscSample {
    /// `ω/(1+ω²)`.
    Odd,
    /// `1/(1+ω²)`.
    Even,
    /// Sum of both.
    Mix,
}

impl std::str::FromStr for OscSample {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "odd" => Ok(Self::Odd),
            "even" => Ok(Self::Even),
            "mix" => Ok(Self::Mix),
            _ => Err(Error::InvalidArgument(format!("unknown sample {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscResult {
    pub integral: C,
    /// `⟨a⟩² |integral|`.
    pub scaled: f64,
    /// Set for the odd symbol at `a = 0`, where only the principal value exists.
    pub principal_value: bool,
}

/// Truncation point of [`osc_check`].
pub const OSC_CUTOFF: f64 = 1e4;

/// `∫_X^∞ sin t/t dt` by the auxiliary-function asymptotic series (`X ≥ 100`).
fn sine_integral_tail(x: f64) -> f64 {
    let mut f = 0.0;
    let mut g = 0.0;
    let mut term_f = 1.0 / x;
    let mut term_g = 1.0 / (x * x);
    for k in 0..6 {
        f += term_f;
        g += term_g;
        let kf = k as f64;
        term_f *= -(2.0 * kf + 1.0) * (2.0 * kf + 2.0) / (x * x);
        term_g *= -(2.0 * kf + 2.0) * (2.0 * kf + 3.0) / (x * x);
    }
    let (s, c) = x.sin_cos();
    f * c + g * s
}

/// `∫_ℝ e^{iaω} f(ω) dω` by panel Gauss–Legendre on `[0, 10⁴]` and an
/// asymptotic tail.
pub fn osc_check(sample: OscSample, a: f64) -> Result<OscResult> {
    if !a.is_finite() {
        return Err(Error::InvalidArgument("a must be finite".into()));
    }
    let (gx, gw) = gl16();
    let width = 1.0_f64.min(PI / a.abs().max(1e-300));
    let panels = (OSC_CUTOFF / width).ceil() as usize;
    let h = OSC_CUTOFF / panels as f64;
    let mut even = 0.0;
    let mut odd = 0.0;
    for p in 0..panels {
        let lo = p as f64 * h;
        for (x, w) in gx.iter().zip(gw) {
            let om = lo + 0.5 * h * (x + 1.0);
            let wt = 0.5 * h * w;
            let (s, c) = (a * om).sin_cos();
            let d = 1.0 + om * om;
            even += wt * c / d;
            odd += wt * s * om / d;
        }
    }
    let big = OSC_CUTOFF;
    // tails: 1/(1+ω²) = ω⁻² − ω⁻⁴ + …, ω/(1+ω²) = ω⁻¹ − ω⁻³ + …
    let mut principal_value = false;
    if a == 0.0 {
        even += 1.0 / big - 1.0 / (3.0 * big.powi(3));
        odd = 0.0;
        principal_value = true;
    } else {
        let x = a.abs() * big;
        let st = sine_integral_tail(x);
        // ∫_Ω^∞ sin(aω)/ω dω = sgn(a)·st; ∫_Ω^∞ cos(aω)/ω² dω = cos(x)/Ω − |a|·st
        odd += a.signum() * st;
        even += x.cos() / big - a.abs() * st;
    }
    let integral = match sample {
        OscSample::Even => C::new(2.0 * even, 0.0),
        OscSample::Odd => C::new(0.0, 2.0 * odd),
        OscSample::Mix => C::new(2.0 * even, 2.0 * odd),
    };
    Ok(OscResult {
        integral,
        scaled: (1.0 + a * a) * integral.norm(),
        principal_value: principal_value && sample != OscSample::Even,
    })
}

/// Closed form of [`osc_check`] by residues.
pub fn osc_closed_form(sample: OscSample, a: f64) -> C {
    let e = PI * (-a.abs()).exp();
    match sample {
        OscSample::Even => C::new(e, 0.0),
        OscSample::Odd => C::new(0.0, a.signum() * e * f64::from(a != 0.0)),
        OscSample::Mix => C::new(e, a.signum() * e * f64::from(a != 0.0)),
    }
}

/// `s(1−s)^{−1/2}⟨τ + log(1−s)⟩^{−2}`.
pub fn envelope(s: f64, tau: f64) -> f64 {
    let x = tau + (1.0 - s).ln();
    s / (1.0 - s).sqrt() / (1.0 + x * x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSample {
    pub rho: f64,
    pub s: f64,
    pub tau: f64,
    pub omega_max: f64,
    /// Kernel value; real by conjugation symmetry of `G`.
    pub k: f64,
    /// Estimated remainder beyond `Ω_max` (tail model magnitude).
    pub error_bar: f64,
    pub envelope: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelConfig {
    pub potential: PotentialSpec,
    pub omega_max: f64,
    /// ω-panel width (16 Gauss nodes each).
    pub panel_width: f64,
    pub solver: SolverOptions,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            potential: PotentialSpec::Linearized,
            omega_max: 200.0,
            panel_width: 0.5,
            solver: SolverOptions { tol: Tolerances { rtol: 1e-12, atol: 1e-14 }, ..SolverOptions::default() },
        }
    }
}

/// Differentiation matrix on the 16 Gauss nodes of `[−1, 1]`.
fn gl_diff() -> Vec<f64> {
    let (x, _) = gl16();
    let n = x.len();
    let bw: Vec<f64> = (0..n).map(|j| 1.0 / (0..n).filter(|&k| k != j).map(|k| x[j] - x[k]).product::<f64>()).collect();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = bw[j] / bw[i] / (x[i] - x[j]);
                d[i * n + j] = v;
                diag -= v;
            }
        }
        d[i * n + i] = diag;
    }
    d
}

/// Lagrange weights of the 16 Gauss nodes for evaluation at `t = 1`.
fn gl_right_end() -> Vec<f64> {
    let (x, _) = gl16();
    let n = x.len();
    (0..n).map(|j| (0..n).filter(|&k| k != j).map(|k| (1.0 - x[k]) / (x[j] - x[k])).product()).collect()
}

/// `∫_Ω^∞ e^{iτω} ω^{−2} dω`.
fn tail_integral(tau: f64, big: f64) -> C {
    if tau * big < 20.0 {
        tail_integral_direct(tau, big)
    } else {
        tail_integral_asymptotic(tau, big)
    }
}

fn tail_integral_direct(tau: f64, big: f64) -> C {
    if tau * big < 1e-12 {
        return C::new(1.0 / big, 0.0);
    }
    // Gauss–Legendre in u = ln ω up to τω = 40, then the asymptotic series
    let stop = 40.0 / tau;
    let span = (stop / big).ln();
    let panels = (40.0 * span).ceil().max(1.0) as usize;
    let h = span / panels as f64;
    let (gx, gw) = gl16();
    let mut acc = C::new(0.0, 0.0);
    for p in 0..panels {
        for (x, w) in gx.iter().zip(gw) {
            let om = big * (h * (p as f64 + 0.5 * (x + 1.0))).exp();
            acc += C::from_polar(0.5 * h * w / om, tau * om);
        }
    }
    acc + tail_integral_asymptotic(tau, stop)
}

fn tail_integral_asymptotic(tau: f64, big: f64) -> C {
    let it = C::new(0.0, tau);
    let mut sum = C::new(0.0, 0.0);
    let mut coef = C::new(1.0, 0.0) / (big * big);
    for n in 2..8 {
        sum += coef;
        coef *= n as f64 / (it * big);
    }
    -C::from_polar(1.0, tau * big) / it * sum
}

/// `G − G₀` on the ω-panel nodes for all pairs of a point set.
#[derive(Debug, Clone)]
pub struct KernelTable {
    pub points: Vec<f64>,
    pub cfg: KernelConfig,
    pub omegas: Vec<f64>,
    weights: Vec<f64>,
    /// `values[i * n + j][k]` for `(ρ, s) = (points[i], points[j])` at `omegas[k]`.
    values: Vec<Vec<C>>,
}

impl KernelTable {
    pub fn build(points: &[f64], cfg: KernelConfig) -> Result<Self> {
        let mut pts = points.to_vec();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        if pts.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
            return Err(Error::InvalidArgument("kernel points must lie in (0, 1)".into()));
        }
        if !(cfg.omega_max > 0.0 && cfg.panel_width > 0.0) {
            return Err(Error::InvalidArgument("omega_max and panel width must be positive".into()));
        }
        let (gx, gw) = gl16();
        let panels = (cfg.omega_max / cfg.panel_width).round().max(1.0) as usize;
        let h = cfg.omega_max / panels as f64;
        let mut omegas = Vec::with_capacity(panels * 16);
        let mut weights = Vec::with_capacity(panels * 16);
        for p in 0..panels {
            for (x, w) in gx.iter().zip(gw) {
                omegas.push(p as f64 * h + 0.5 * h * (x + 1.0));
                weights.push(0.5 * h * w);
            }
        }
        let n = pts.len();
        let per_omega: Vec<std::result::Result<Vec<C>, f64>> = omegas
            .par_iter()
            .map(|&om| {
                let l = C::new(0.0, om);
                let pair = FundamentalPair::on_points(SpectralPoint::new(0.0, om), &cfg.potential, &pts, cfg.solver)
                    .map_err(|_| om)?;
                let mut row = Vec::with_capacity(n * n);
                for &r in &pts {
                    for &s in &pts {
                        let g = pair.green(r, s).map_err(|_| om)?;
                        row.push(g - green_free(l, r, s));
                    }
                }
                Ok(row)
            })
            .collect();
        let failed: Vec<f64> = per_omega.iter().filter_map(|r| r.as_ref().err().copied()).collect();
        if !failed.is_empty() {
            return Err(Error::PartialResult { failed });
        }
        let rows: Vec<Vec<C>> = per_omega.into_iter().map(|r| r.unwrap_or_default()).collect();
        let values = (0..n * n).map(|ij| rows.iter().map(|row| row[ij]).collect()).collect();
        Ok(Self { points: pts, cfg, omegas, weights, values })
    }

    fn index(&self, x: f64) -> Result<usize> {
        self.points
            .iter()
            .position(|&p| (p - x).abs() < 1e-14)
            .ok_or_else(|| Error::InvalidArgument(format!("{x} is not a table point")))
    }

    /// Kernel sample using the ω-range `[0, omega_max]` (a panel boundary of the table).
    pub fn sample(&self, rho: f64, s: f64, tau: f64, omega_max: f64) -> Result<KernelSample> {
        let n = self.points.len();
        let h = &self.values[self.index(rho)? * n + self.index(s)?];
        let panel = self.cfg.omega_max / (self.omegas.len() / 16) as f64;
        let panels = (omega_max / panel).round() as usize;
        if panels == 0 || panels * 16 > self.omegas.len() || (panels as f64 * panel - omega_max).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("omega_max {omega_max} is not a panel boundary of the table")));
        }
        let big = panels as f64 * panel;
        let last = (panels - 1) * 16;
        let end_w = gl_right_end();
        let h_end: C = (0..16).map(|q| h[last + q] * end_w[q]).sum();
        let c = h_end * big * big;
        let tail = c * tail_integral(tau, big);
        let body: C = if tau < 1.0 {
            (0..panels * 16).map(|k| C::from_polar(1.0, tau * self.omegas[k]) * h[k] * self.weights[k]).sum()
        } else {
            let d = gl_diff();
            let scale = 2.0 / panel;
            let mut acc = C::new(0.0, 0.0);
            for p in 0..panels {
                for i in 0..16 {
                    let k = p * 16 + i;
                    let dh: C = (0..16).map(|j| h[p * 16 + j] * d[i * 16 + j]).sum::<C>() * scale;
                    acc += C::from_polar(1.0, tau * self.omegas[k]) * dh * self.weights[k];
                }
            }
            let it = C::new(0.0, tau);
            // [e^{iωτ}h/(iτ)]₀^Ω − (1/(iτ))∫ e^{iωτ}h′; h(0) is real so its term has zero real part
            let h0 = self.values_at_zero(h);
            (C::from_polar(1.0, tau * big) * h_end - h0) / it - acc / it
        };
        let total = (body + tail) / PI;
        let env = envelope(s, tau);
        Ok(KernelSample {
            rho,
            s,
            tau,
            omega_max: big,
            k: total.re,
            error_bar: tail.norm() / PI,
            envelope: env,
            ratio: total.re.abs() / env,
        })
    }

    fn values_at_zero(&self, h: &[C]) -> C {
        let (x, _) = gl16();
        let w: Vec<f64> =
            (0..16).map(|j| (0..16).filter(|&k| k != j).map(|k| (-1.0 - x[k]) / (x[j] - x[k])).product()).collect();
        (0..16).map(|q| h[q] * w[q]).sum()
    }
}

/// Single kernel sample; builds a two-point table.
pub fn perturbation_kernel(rho: f64, s: f64, tau: f64, cfg: KernelConfig) -> Result<KernelSample> {
    if !(0.05..=0.95).contains(&rho) || !(0.05..=0.95).contains(&s) {
        return Err(Error::InvalidArgument("rho and s must lie in [0.05, 0.95]".into()));
    }
    if !(0.0..=15.0).contains(&tau) {
        return Err(Error::InvalidArgument("tau must lie in [0, 15]".into()));
    }
    let big = cfg.omega_max;
    KernelTable::build(&[rho, s], cfg)?.sample(rho, s, tau, big)
}

/// Resolvent differences `[R_L − R_{L₀}](iω)f̃` on an ω-panel grid.
#[derive(Debug, Clone)]
pub struct LaplaceTable {
    grid: Grid,
    data: State,
    omegas: Vec<f64>,
    weights: Vec<f64>,
    omega_max: f64,
    /// Stacked complex differences per ω.
    diffs: Vec<Vec<C>>,
}

impl LaplaceTable {
    pub fn build(grid: &Grid, data: &State, omega_max: f64, panel_width: f64) -> Result<Self> {
        let (gx, gw) = gl16();
        let panels = (omega_max / panel_width).round().max(1.0) as usize;
        let h = omega_max / panels as f64;
        let mut omegas = Vec::new();
        let mut weights = Vec::new();
        for p in 0..panels {
            for (x, w) in gx.iter().zip(gw) {
                omegas.push(p as f64 * h + 0.5 * h * (x + 1.0));
                weights.push(0.5 * h * w);
            }
        }
        let rhs = ResolventRHS::from_state(grid, data);
        let results: Vec<std::result::Result<Vec<C>, f64>> = omegas
            .par_iter()
            .map(|&om| {
                let sp = SpectralPoint::new(0.0, om);
                let full = FundamentalPair::new(sp, &PotentialSpec::Linearized, grid).map_err(|_| om)?;
                let free = FundamentalPair::new(sp, &PotentialSpec::Zero, grid).map_err(|_| om)?;
                let a = apply_resolvent(grid, &full, &rhs).map_err(|_| om)?.stacked();
                let b = apply_resolvent(grid, &free, &rhs).map_err(|_| om)?.stacked();
                Ok(a.iter().zip(&b).map(|(x, y)| x - y).collect())
            })
            .collect();
        let failed: Vec<f64> = results.iter().filter_map(|r| r.as_ref().err().copied()).collect();
        if !failed.is_empty() {
            return Err(Error::PartialResult { failed });
        }
        let diffs = results.into_iter().map(|r| r.unwrap_or_default()).collect();
        Ok(Self { grid: grid.clone(), data: data.clone(), omegas, weights, omega_max, diffs })
    }

    /// Reconstructed `S(τ)f̃` (both components) at the nodes.
    pub fn reconstruct(&self, tau: f64) -> State {
        let dim = 2 * self.grid.len();
        let mut acc = vec![C::new(0.0, 0.0); dim];
        for (k, d) in self.diffs.iter().enumerate() {
            let e = C::from_polar(self.weights[k], tau * self.omegas[k]);
            for (a, v) in acc.iter_mut().zip(d) {
                *a += e * v;
            }
        }
        // c/ω² tail from the last Gauss node
        let last = self.diffs.len() - 1;
        let wl = self.omegas[last];
        let tail = tail_integral(tau, self.omega_max);
        for (a, v) in acc.iter_mut().zip(&self.diffs[last]) {
            *a += v * wl * wl * tail;
        }
        let free = s0_state(&FreeData::from_state(&self.grid, &self.data), tau, &self.grid);
        let m = self.grid.len();
        let pert: Vec<f64> = acc.iter().map(|z| z.re / PI).collect();
        State {
            phi1: free.phi1.iter().zip(&pert[..m]).map(|(a, b)| a + b).collect(),
            phi2: free.phi2.iter().zip(&pert[m..]).map(|(a, b)| a + b).collect(),
        }
    }
}

/// `S(τ)f̃` from the Laplace representation at `ε = 0`.
pub fn laplace_semigroup(grid: &Grid, data: &State, tau: f64, omega_max: f64) -> Result<State> {
    if !(0.5..=5.0).contains(&tau) {
        return Err(Error::InvalidArgument("tau must lie in [0.5, 5]".into()));
    }
    Ok(LaplaceTable::build(grid, data, omega_max, 1.0)?.reconstruct(tau))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn osc_samples_match_residues() {
        for a in [2.0, -2.0, 1.0, 5.0] {
            for s in [OscSample::Even, OscSample::Odd, OscSample::Mix] {
                let r = osc_check(s, a).unwrap();
                assert!((r.integral - osc_closed_form(s, a)).norm() < 1e-6, "{s:?} {a}: {}", r.integral);
            }
        }
        let r = osc_check(OscSample::Odd, 0.0).unwrap();
        assert!(r.principal_value && r.integral.norm() == 0.0);
        assert!((osc_check(OscSample::Even, 0.0).unwrap().integral.re - PI).abs() < 1e-6);
    }

    #[test]
    fn tail_integral_consistent() {
        let a = tail_integral_direct(0.15, 200.0);
        let b = tail_integral_asymptotic(0.15, 200.0);
        assert!((a - b).norm() < 1e-4 * a.norm(), "{a} {b}");
        assert!((tail_integral(0.0, 50.0).re - 0.02).abs() < 1e-12);
    }

    #[test]
    fn free_control_kernel_vanishes() {
        let cfg = KernelConfig { potential: PotentialSpec::Zero, omega_max: 20.0, ..KernelConfig::default() };
        let k = perturbation_kernel(0.3, 0.5, 2.0, cfg).unwrap();
        assert!(k.k.abs() < 1e-8, "{}", k.k);
    }

    #[test]
    fn laplace_matches_linearized_flow() {
        use crate::evolve::{EvolveConfig, EvolveMode, Evolver};
        let g = Grid::new(12).unwrap();
        let cfg = EvolveConfig { reproject: true, ..EvolveConfig::new(EvolveMode::Linearized, 1.0) };
        let ev = Evolver::new(&g, cfg).unwrap();
        let f = State::from_fns(&g, |r| (1.0 - r * r) * (-r * r).exp(), |r| 0.3 * r * r - 0.2);
        let f = ev.projection().complement(&f);
        let tr = ev.run(&f).unwrap();
        let rec = laplace_semigroup(&g, &f, 1.0, 30.0).unwrap();
        let want = tr.last().unwrap();
        let d = rec.max_abs_diff(want);
        assert!(d < 1e-4, "{d}");
        let zero = laplace_semigroup(&g, &State::zeros(g.len()), 1.0, 5.0).unwrap();
        assert_eq!(zero.max_abs_diff(&State::zeros(g.len())), 0.0);
    }
}
