//! Closed-form free similarity flow through the d'Alembert window integrals.
//!
//! With `E = e^{−τ}`, `a = 1 − E − Eρ`, `b = 1 − E + Eρ` and
//! `h₁(s) = ∂_s[s f₁(|s|)]`,
//!
//! * `[S₀(τ)f]₁(ρ) = e^{−τ/2}/(2Eρ) · ( b f₁(b) − a f₁(|a|) + ∫_{|a|}^{b} s f₂(s) ds )`,
//! * `[S₀(τ)f]₂(ρ) = e^{−τ/2}/(2ρ) · ( h₁(b) − h₁(a) + b f₂(b) − a f₂(|a|) )`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::quad::integrate_gk;
use crate::simcoords::State;
use crate::spaces::{h_norm, lq_ball, strichartz_from_series, StrichartzExponents};
use crate::specgrid::Grid;

type Fun = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Radial data `(f₁, f₂)` on `[0, 1]` with the derivatives the formulas need.
#[derive(Clone)]
pub struct FreeData {
    f1: Fun,
    df1: Fun,
    d2f1: Fun,
    f2: Fun,
    df2: Fun,
}

impl std::fmt::Debug for FreeData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FreeData").finish_non_exhaustive()
    }
}

impl FreeData {
    pub fn new(
        f1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2f1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f2: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { f1: Arc::new(f1), df1: Arc::new(df1), d2f1: Arc::new(d2f1), f2: Arc::new(f2), df2: Arc::new(df2) }
    }

    pub fn constant(c1: f64, c2: f64) -> Self {
        Self::new(move |_| c1, |_| 0.0, |_| 0.0, move |_| c2, |_| 0.0)
    }

    /// Polynomial interpolants of a node state.
    pub fn from_state(grid: &Grid, state: &State) -> Self {
        let g = Arc::new(grid.clone());
        let d1 = grid.differentiate(&state.phi1).expect("state length matches grid");
        let d2 = grid.differentiate(&d1).expect("state length matches grid");
        let e2 = grid.differentiate(&state.phi2).expect("state length matches grid");
        let interp = |v: Vec<f64>| -> Fun {
            let g = g.clone();
            Arc::new(move |x: f64| g.interpolate_unchecked(&v, x))
        };
        Self {
            f1: interp(state.phi1.clone()),
            df1: interp(d1),
            d2f1: interp(d2),
            f2: interp(state.phi2.clone()),
            df2: interp(e2),
        }
    }

    fn h1(&self, s: f64) -> f64 {
        let s = s.abs();
        (self.f1)(s) + s * (self.df1)(s)
    }
}

/// `[S₀(τ)f]₁(ρ)`.
pub fn s0_first_component(f: &FreeData, tau: f64, rho: f64) -> f64 {
    let e = (-tau).exp();
    let decay = (-0.5 * tau).exp();
    let c = 1.0 - e;
    if rho == 0.0 {
        return decay * ((f.f1)(c) + c * (f.df1)(c) + c * (f.f2)(c));
    }
    let a = c - e * rho;
    let b = c + e * rho;
    let first = b * (f.f1)(b) - a * (f.f1)(a.abs());
    let second = integrate_gk(|s| s * (f.f2)(s), a.abs(), b, 1e-12);
    decay / (2.0 * e * rho) * (first + second)
}

/// `[S₀(τ)f]₂(ρ)`.
pub fn s0_second_component(f: &FreeData, tau: f64, rho: f64) -> f64 {
    let e = (-tau).exp();
    let decay = (-0.5 * tau).exp();
    let c = 1.0 - e;
    if rho < 1e-9 {
        let dh1 = 2.0 * (f.df1)(c) + c * (f.d2f1)(c);
        return decay * e * (dh1 + (f.f2)(c) + c * (f.df2)(c));
    }
    let a = c - e * rho;
    let b = c + e * rho;
    decay / (2.0 * rho) * (f.h1(b) - f.h1(a) + b * (f.f2)(b) - a * (f.f2)(a.abs()))
}

/// `S₀(τ)f` sampled at the nodes of `grid`.
pub fn s0_state(f: &FreeData, tau: f64, grid: &Grid) -> State {
    State {
        phi1: grid.nodes().iter().map(|&r| s0_first_component(f, tau, r)).collect(),
        phi2: grid.nodes().iter().map(|&r| s0_second_component(f, tau, r)).collect(),
    }
}

/// Uniform τ grid on `[0, τ_max]` with `n` intervals.
pub fn tau_grid(tau_max: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| tau_max * i as f64 / n as f64).collect()
}

/// `‖[S₀(τ)f]₁‖_{L^q}` along `taus`, evaluated on `grid`.
pub fn lq_series(f: &FreeData, grid: &Grid, q: f64, taus: &[f64]) -> Result<Vec<f64>> {
    taus.iter()
        .map(|&t| {
            let v: Vec<f64> = grid.nodes().iter().map(|&r| s0_first_component(f, t, r)).collect();
            lq_ball(grid, &v, q)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeStrichartzReport {
    pub max_ratio: f64,
    pub argmax: usize,
    /// Largest fitted remainder beyond `τ_max`, relative to the data norm.
    pub max_tail: f64,
}

/// Max over an ensemble of `‖[S₀(·)f]₁‖_{L^pL^q} / ‖f‖_ℋ`, on the product of
/// `eval_grid` nodes and `n_tau` uniform τ-intervals of `[0, τ_max]`.
pub fn free_strichartz_constant(
    data_grid: &Grid,
    ensemble: &[State],
    eval_grid: &Grid,
    exps: StrichartzExponents,
    tau_max: f64,
    n_tau: usize,
) -> Result<FreeStrichartzReport> {
    let exps = StrichartzExponents::new(exps.p, exps.q)?;
    let taus = tau_grid(tau_max, n_tau);
    let mut report = FreeStrichartzReport { max_ratio: 0.0, argmax: 0, max_tail: 0.0 };
    for (k, s) in ensemble.iter().enumerate() {
        let hn = h_norm(data_grid, s);
        if hn == 0.0 {
            continue;
        }
        let data = FreeData::from_state(data_grid, s);
        let series = lq_series(&data, eval_grid, exps.q, &taus)?;
        let v = strichartz_from_series(&taus, &series, exps.p)?;
        let r = v.value / hn;
        if r > report.max_ratio {
            report.max_ratio = r;
            report.argmax = k;
        }
        report.max_tail = report.max_tail.max(v.tail / hn);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_data() {
        let v = FreeData::constant(0.0, 1.0);
        let u = FreeData::constant(1.0, 0.0);
        for tau in [0.0_f64, 0.3, 2.0, 7.0] {
            for rho in [0.0, 0.2, 0.7, 1.0] {
                let want = (-0.5 * tau).exp() * (1.0 - (-tau).exp());
                assert!((s0_first_component(&v, tau, rho) - want).abs() < 1e-12);
                assert!((s0_first_component(&u, tau, rho) - (-0.5 * tau).exp()).abs() < 1e-12);
                assert!((s0_second_component(&v, tau, rho) - (-1.5 * tau).exp()).abs() < 1e-12);
                assert!(s0_second_component(&u, tau, rho).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn empty_window_is_zero() {
        let bump = |s: f64| if (0.8..=0.9).contains(&s) { ((s - 0.8) * (0.9 - s)).powi(3) } else { 0.0 };
        let f = FreeData::new(|_| 0.0, |_| 0.0, |_| 0.0, bump, |_| 0.0);
        let tau: f64 = 4.0;
        let rho = 0.5;
        let e = (-tau).exp();
        assert!(1.0 - e - e * rho > 0.9);
        assert_eq!(s0_first_component(&f, tau, rho), 0.0);
    }

    #[test]
    fn constant_velocity_strichartz_ratio() {
        let g = Grid::new(8).unwrap();
        let ens = vec![State::constant(g.len(), 0.0, 1.0)];
        let r = free_strichartz_constant(&g, &ens, &g, StrichartzExponents::endpoint(), 40.0, 8000).unwrap();
        assert!((r.max_ratio - 1.0).abs() < 1e-5, "{}", r.max_ratio);
    }

    #[test]
    fn semigroup_through_formula() {
        let g = Grid::new(24).unwrap();
        let s = State::from_fns(&g, |r| (1.0 - r * r).powi(2), |r| 0.5 + r * r);
        let f = FreeData::from_state(&g, &s);
        let mid = s0_state(&f, 0.4, &g);
        let f_mid = FreeData::from_state(&g, &mid);
        for &r in g.nodes() {
            let direct = s0_first_component(&f, 1.3, r);
            let two = s0_first_component(&f_mid, 0.9, r);
            assert!((direct - two).abs() < 1e-8, "{r}: {direct} vs {two}");
        }
    }
}
