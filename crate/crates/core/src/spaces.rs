//! Norms on the unit ball for radial functions (the angular factor `4π` is
//! dropped everywhere) and mixed Strichartz norms over trajectories.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::Trajectory;
use crate::simcoords::State;
use crate::specgrid::Grid;

/// `(∫₀¹ |f|² ρ² dρ)^{1/2}`.
pub fn l2_ball(grid: &Grid, values: &[f64]) -> f64 {
    weighted_sum(grid, values, |v| v * v).max(0.0).sqrt()
}

/// `(‖f‖² + ‖f′‖²)^{1/2}` with both terms in `L²(𝔹³)`.
pub fn h1_ball(grid: &Grid, values: &[f64]) -> f64 {
    let mut d = vec![0.0; values.len()];
    grid.differentiate_into(values, &mut d);
    (l2_ball(grid, values).powi(2) + l2_ball(grid, &d).powi(2)).sqrt()
}

/// Energy norm `‖(φ₁, φ₂)‖_ℋ = (‖φ₁‖²_{H¹} + ‖φ₂‖²_{L²})^{1/2}`.
pub fn h_norm(grid: &Grid, state: &State) -> f64 {
    (h1_ball(grid, &state.phi1).powi(2) + l2_ball(grid, &state.phi2).powi(2)).sqrt()
}

/// `(∫₀¹ |f|^q ρ² dρ)^{1/q}`, or the sup-norm for `q = ∞`.
pub fn lq_ball(grid: &Grid, values: &[f64], q: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::InvalidArgument(format!("q must lie in [1, ∞], got {q}")));
    }
    if q.is_infinite() {
        return Ok(grid.sup_norm(values));
    }
    Ok(weighted_sum(grid, values, |v| v.abs().powf(q)).max(0.0).powf(1.0 / q))
}

fn weighted_sum(grid: &Grid, values: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    grid.weights().iter().zip(grid.nodes()).zip(values).map(|((w, r), v)| w * r * r * f(*v)).sum()
}

/// The isomorphism `𝐆(f₁, f₂) = (ρ f₂, ρ f₁′ + f₁)` at the nodes.
pub fn g_transform(grid: &Grid, state: &State) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; state.len()];
    grid.differentiate_into(&state.phi1, &mut d);
    let first = grid.nodes().iter().zip(&state.phi2).map(|(r, f)| r * f).collect();
    let second = grid.nodes().iter().zip(&d).zip(&state.phi1).map(|((r, d), f)| r * d + f).collect();
    (first, second)
}

/// Plain `L²(0,1)²` norm of `𝐆(state)`.
pub fn g_norm(grid: &Grid, state: &State) -> f64 {
    let (a, b) = g_transform(grid, state);
    let sq: f64 = grid.weights().iter().zip(a.iter().zip(&b)).map(|(w, (x, y))| w * (x * x + y * y)).sum();
    sq.max(0.0).sqrt()
}

/// Admissible pair with `1/p + 3/q = 1/2`; `f64::INFINITY` stands for `∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrichartzExponents {
    pub p: f64,
    pub q: f64,
}

impl StrichartzExponents {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        let inv = |x: f64| if x.is_infinite() { 0.0 } else { 1.0 / x };
        if !(2.0..=f64::INFINITY).contains(&p) || !(6.0..=f64::INFINITY).contains(&q) {
            return Err(Error::InvalidArgument(format!("exponents out of range: p = {p}, q = {q}")));
        }
        if (inv(p) + 3.0 * inv(q) - 0.5).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("(p, q) = ({p}, {q}) violates 1/p + 3/q = 1/2")));
        }
        Ok(Self { p, q })
    }

    pub fn endpoint() -> Self {
        Self { p: 2.0, q: f64::INFINITY }
    }

    pub fn energy() -> Self {
        Self { p: f64::INFINITY, q: 6.0 }
    }

    /// Formats `∞` as `inf` for CSV and file names.
    pub fn label(&self) -> String {
        let f = |x: f64| if x.is_infinite() { "inf".to_string() } else { format!("{x}") };
        format!("p{}_q{}", f(self.p), f(self.q))
    }
}

/// Strichartz norm split into the integral over the stored window and an
/// exponential-fit estimate of the remainder beyond it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrichartzValue {
    pub value: f64,
    pub tail: f64,
}

/// `(∫ ‖φ₁(τ)‖_{L^q}^p dτ)^{1/p}` by the composite trapezoid rule on the τ-grid
/// of the trajectory (running maximum for `p = ∞`).
pub fn strichartz_norm(grid: &Grid, traj: &Trajectory, exps: StrichartzExponents) -> Result<f64> {
    Ok(strichartz_with_tail(grid, traj, exps)?.value)
}

pub fn strichartz_with_tail(grid: &Grid, traj: &Trajectory, exps: StrichartzExponents) -> Result<StrichartzValue> {
    let exps = StrichartzExponents::new(exps.p, exps.q)?;
    let norms = traj.states.iter().map(|s| lq_ball(grid, &s.phi1, exps.q)).collect::<Result<Vec<_>>>()?;
    strichartz_from_series(&traj.taus, &norms, exps.p)
}

/// Time integral of a precomputed series `n(τ_i) = ‖φ₁(τ_i)‖_{L^q}`.
pub fn strichartz_from_series(taus: &[f64], norms: &[f64], p: f64) -> Result<StrichartzValue> {
    if taus.len() != norms.len() {
        return Err(Error::InvalidArgument("τ grid and norm series differ in length".into()));
    }
    if taus.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("τ grid must be strictly increasing".into()));
    }
    if p.is_infinite() {
        let m = norms.iter().fold(0.0_f64, |m, v| m.max(*v));
        return Ok(StrichartzValue { value: m, tail: 0.0 });
    }
    let pw: Vec<f64> = norms.iter().map(|v| v.powf(p)).collect();
    let integral: f64 = taus.windows(2).zip(pw.windows(2)).map(|(t, f)| 0.5 * (t[1] - t[0]) * (f[0] + f[1])).sum();
    Ok(StrichartzValue { value: integral.powf(1.0 / p), tail: exponential_tail(taus, &pw).powf(1.0 / p) })
}

/// Fits `c e^{−kτ}` to the last tenth of the series and returns `∫_{τ_end}^∞`.
fn exponential_tail(taus: &[f64], f: &[f64]) -> f64 {
    let n = taus.len();
    if n < 4 {
        return 0.0;
    }
    let start = n - (n / 10).max(3);
    let pts: Vec<(f64, f64)> = (start..n).filter(|&i| f[i] > 0.0).map(|i| (taus[i], f[i].ln())).collect();
    if pts.len() < 3 {
        return 0.0;
    }
    let (slope, intercept) = linear_fit(&pts);
    if slope >= 0.0 {
        return f64::INFINITY;
    }
    let t_end = taus[n - 1];
    (intercept + slope * t_end).exp() / (-slope)
}

/// Least-squares line `y = a x + b`, returns `(a, b)`.
pub fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let a = sxy / sxx;
    (a, my - a * mx)
}
