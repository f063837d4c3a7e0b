//! Fundamental solutions of the spectral ODE
//!
//! `−(1−ρ²)u″ − (2/ρ)u′ + (3+2λ)ρu′ + (λ² + 2λ + ¾ + V(ρ))u = F`,
//!
//! the scaled Wronskian, the Green function and the resolvent of the
//! linearized generator.
//!
//! `u₀` is the branch regular at `ρ = 0` with `u₀(0) = 1 − 2λ`, `u₁` the branch
//! regular at `ρ = 1` with `u₁(1) = 2^{1/2−λ}`. Both are launched from a
//! power series in the local variable at the singular endpoint and continued
//! by adaptive Dormand–Prince.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::odeint::{self, Tolerances, Y};
use crate::quad::gl16;
use crate::simcoords::State;
use crate::specgrid::Grid;

type C = Complex64;

fn cr(x: f64) -> C {
    C::new(x, 0.0)
}

/// `λ = ε + iω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub lambda: C,
}

impl SpectralPoint {
    pub fn new(eps: f64, omega: f64) -> Self {
        Self { lambda: C::new(eps, omega) }
    }

    pub fn eps(&self) -> f64 {
        self.lambda.re
    }

    pub fn omega(&self) -> f64 {
        self.lambda.im
    }

    /// Green-function strip `ε ∈ [0, 1/3]`.
    pub fn check_strip(&self) -> Result<()> {
        let e = self.eps();
        if !(-1e-14..=1.0 / 3.0 + 1e-14).contains(&e) {
            return Err(Error::OutOfStrip(e));
        }
        Ok(())
    }
}

impl From<C> for SpectralPoint {
    fn from(lambda: C) -> Self {
        Self { lambda }
    }
}

/// Smooth potential `V` on `[0, 1]`, stored as a polynomial in `ρ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialSpec {
    Zero,
    /// `V ≡ −15/4`.
    Linearized,
    Constant(f64),
    /// Coefficients `v_k` of `Σ v_k ρ^k`.
    Polynomial(Vec<f64>),
}

impl PotentialSpec {
    pub fn coefficients(&self) -> Vec<f64> {
        match self {
            Self::Zero => vec![0.0],
            Self::Linearized => vec![-15.0 / 4.0],
            Self::Constant(c) => vec![*c],
            Self::Polynomial(v) if v.is_empty() => vec![0.0],
            Self::Polynomial(v) => v.clone(),
        }
    }

    pub fn eval(&self, rho: f64) -> f64 {
        self.coefficients().iter().rev().fold(0.0, |acc, c| acc * rho + c)
    }
}

impl std::str::FromStr for PotentialSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" | "free" => Ok(Self::Zero),
            "linearized" => Ok(Self::Linearized),
            other => other
                .parse::<f64>()
                .map(Self::Constant)
                .map_err(|_| Error::InvalidArgument(format!("unknown potential {other:?}"))),
        }
    }
}

/// Launch offsets and tolerances of the branch solves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// `u₀` starts at `ρ = offset0`.
    pub offset0: f64,
    /// `u₁` starts at `ρ = 1 − offset1`.
    pub offset1: f64,
    pub tol: Tolerances,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { offset0: 1e-4, offset1: 1e-6, tol: Tolerances::default() }
    }
}

fn poly_mul(a: &[C], b: &[C]) -> Vec<C> {
    let mut out = vec![cr(0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Power series of the analytic solution of `p₂u″ + p₁u′ + p₀u = 0` at a
/// regular singular point `x = 0` where `p₂(0) = 0`.
fn frobenius(p2: &[C], p1: &[C], p0: &[C], c0: C, kmax: usize) -> Vec<C> {
    let at = |p: &[C], i: usize| p.get(i).copied().unwrap_or(cr(0.0));
    let mut c = vec![cr(0.0); kmax + 1];
    c[0] = c0;
    for k in 0..kmax {
        let mut rhs = cr(0.0);
        for i in 2..p2.len() {
            if i <= k + 1 {
                let n = k + 2 - i;
                rhs += at(p2, i) * (n * (n - 1)) as f64 * c[n];
            }
        }
        for i in 1..p1.len() {
            if i <= k {
                let n = k + 1 - i;
                rhs += at(p1, i) * n as f64 * c[n];
            }
        }
        for i in 0..p0.len() {
            if i <= k {
                rhs += at(p0, i) * c[k - i];
            }
        }
        let kf = k as f64;
        let denom = (at(p2, 1) * kf + at(p1, 0)) * (kf + 1.0);
        c[k + 1] = -rhs / denom;
    }
    c
}

/// Value and `d/dx` of a power series at `x`.
fn eval_series(c: &[C], x: f64) -> (C, C) {
    let mut u = cr(0.0);
    let mut du = cr(0.0);
    for k in (0..c.len()).rev() {
        u = u * x + c[k];
        if k > 0 {
            du = du * x + c[k] * k as f64;
        }
    }
    (u, du)
}

/// Both branches for one `λ` and potential; evaluates at arbitrary points.
#[derive(Debug, Clone)]
pub struct BranchSolver {
    lambda: C,
    potential: Vec<f64>,
    opts: SolverOptions,
    series0: Vec<C>,
    series1: Vec<C>,
}

const SERIES_TERMS: usize = 60;

impl BranchSolver {
    pub fn new(point: SpectralPoint, v: &PotentialSpec, opts: SolverOptions) -> Result<Self> {
        let l = point.lambda;
        if !(l.re > -0.5) {
            return Err(Error::DegenerateParameter(format!(
                "Re(lambda) = {} must exceed -1/2 (indicial denominator 1 + 2 lambda)",
                l.re
            )));
        }
        let kappa = l * l + l * 2.0 + 0.75;
        let vc: Vec<C> = v.coefficients().into_iter().map(cr).collect();
        // centre, x = ρ, equation multiplied by ρ
        let p2 = [cr(0.0), cr(-1.0), cr(0.0), cr(1.0)];
        let p1 = [cr(-2.0), cr(0.0), l * 2.0 + 3.0];
        let mut k0 = vc.clone();
        k0[0] += kappa;
        let p0 = poly_mul(&k0, &[cr(0.0), cr(1.0)]);
        let series0 = frobenius(&p2, &p1, &p0, cr(1.0) - l * 2.0, SERIES_TERMS);
        // lightcone, x = 1 − ρ
        let q2 = [cr(0.0), cr(-2.0), cr(3.0), cr(-1.0)];
        let q1 = [cr(2.0) - (l * 2.0 + 3.0), (l * 2.0 + 3.0) * 2.0, -(l * 2.0 + 3.0)];
        let mut k1 = taylor_shift_reflect(&vc);
        k1[0] += kappa;
        let q0 = poly_mul(&k1, &[cr(1.0), cr(-1.0)]);
        let series1 = frobenius(&q2, &q1, &q0, two_pow(cr(0.5) - l), SERIES_TERMS);
        Ok(Self { lambda: l, potential: v.coefficients(), opts, series0, series1 })
    }

    pub fn lambda(&self) -> C {
        self.lambda
    }

    fn v(&self, rho: f64) -> f64 {
        self.potential.iter().rev().fold(0.0, |acc, c| acc * rho + c)
    }

    fn rhs(&self, rho: f64, y: &Y) -> Y {
        let l = self.lambda;
        let kappa = l * l + l * 2.0 + 0.75 + self.v(rho);
        let d2 = (y[1] * (-2.0 / rho) + (l * 2.0 + 3.0) * rho * y[1] + kappa * y[0]) / (1.0 - rho * rho);
        [y[1], d2]
    }

    /// `(u₀, u₀′)` at ascending points in `[0, 1)`.
    pub fn u0(&self, points: &[f64]) -> Result<Vec<Y>> {
        check_points(points)?;
        let split = points.partition_point(|&x| x <= self.opts.offset0);
        let mut out: Vec<Y> = points[..split]
            .iter()
            .map(|&x| {
                let (u, du) = eval_series(&self.series0, x);
                [u, du]
            })
            .collect();
        let x0 = self.opts.offset0;
        let (u, du) = eval_series(&self.series0, x0);
        out.extend(odeint::integrate(|x, y| self.rhs(x, y), x0, [u, du], &points[split..], self.opts.tol)?);
        Ok(out)
    }

    /// `(u₁, u₁′)` at ascending points in `(0, 1]`.
    pub fn u1(&self, points: &[f64]) -> Result<Vec<Y>> {
        check_points(points)?;
        if points.first().is_some_and(|&x| x <= 0.0) {
            return Err(Error::InvalidArgument("u1 is singular at rho = 0".into()));
        }
        let x1 = 1.0 - self.opts.offset1;
        let split = points.partition_point(|&x| x < x1);
        let (u, du) = eval_series(&self.series1, self.opts.offset1);
        let targets: Vec<f64> = points[..split].iter().rev().copied().collect();
        let mut low = odeint::integrate(|x, y| self.rhs(x, y), x1, [u, -du], &targets, self.opts.tol)?;
        low.reverse();
        low.extend(points[split..].iter().map(|&x| {
            let (u, du) = eval_series(&self.series1, 1.0 - x);
            [u, -du]
        }));
        Ok(low)
    }

    /// `u₁′(1)` from the indicial relation.
    pub fn du1_at_one(&self) -> C {
        -self.series1[1]
    }
}

fn check_points(points: &[f64]) -> Result<()> {
    if points.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("points must be ascending".into()));
    }
    if points.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::InvalidArgument("points must lie in [0, 1]".into()));
    }
    Ok(())
}

fn two_pow(z: C) -> C {
    (z * std::f64::consts::LN_2).exp()
}

/// Coefficients of `V(1 − x)` from those of `V(ρ)`.
fn taylor_shift_reflect(v: &[C]) -> Vec<C> {
    let mut out = vec![cr(0.0); v.len()];
    let mut power = vec![cr(1.0)];
    for c in v {
        for (i, p) in power.iter().enumerate() {
            out[i] += c * p;
        }
        power = poly_mul(&power, &[cr(1.0), cr(-1.0)]);
    }
    out
}

/// Branch samples at a point set plus the scaled Wronskian.
#[derive(Debug, Clone)]
pub struct FundamentalPair {
    pub lambda: C,
    pub points: Vec<f64>,
    pub u0: Vec<C>,
    pub du0: Vec<C>,
    pub u1: Vec<C>,
    pub du1: Vec<C>,
    /// Median over the points of `W(u₀,u₁)ρ²(1−ρ²)^{1/2+λ}/(−1+2λ)`.
    pub w0: C,
    /// Largest deviation from the median, relative to `max(|w₀|, size of the
    /// cancelling products)`.
    pub spread: f64,
    solver: BranchSolver,
}

impl FundamentalPair {
    /// Samples at the interior nodes of `grid`.
    pub fn new(point: SpectralPoint, v: &PotentialSpec, grid: &Grid) -> Result<Self> {
        let n = grid.order();
        Self::on_points(point, v, &grid.nodes()[1..n], SolverOptions::default())
    }

    /// Samples at ascending points of `(0, 1)`.
    pub fn on_points(point: SpectralPoint, v: &PotentialSpec, points: &[f64], opts: SolverOptions) -> Result<Self> {
        if points.is_empty() || points.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
            return Err(Error::InvalidArgument("pair points must lie in (0, 1)".into()));
        }
        let solver = BranchSolver::new(point, v, opts)?;
        let a = solver.u0(points)?;
        let b = solver.u1(points)?;
        let l = point.lambda;
        let mut ws = Vec::with_capacity(points.len());
        let mut scale = 0.0_f64;
        for (i, &r) in points.iter().enumerate() {
            let weight = (cr(1.0 - r * r).ln() * (l + 0.5)).exp() * (r * r) / (l * 2.0 - 1.0);
            let p = a[i][0] * b[i][1];
            let q = a[i][1] * b[i][0];
            ws.push((p - q) * weight);
            scale = scale.max((p.norm() + q.norm()) * weight.norm());
        }
        let w0 = complex_median(&ws);
        let denom = w0.norm().max(1e-12 * scale);
        let spread = ws.iter().map(|w| (w - w0).norm()).fold(0.0, f64::max) / denom.max(f64::MIN_POSITIVE);
        Ok(Self {
            lambda: l,
            points: points.to_vec(),
            u0: a.iter().map(|y| y[0]).collect(),
            du0: a.iter().map(|y| y[1]).collect(),
            u1: b.iter().map(|y| y[0]).collect(),
            du1: b.iter().map(|y| y[1]).collect(),
            w0,
            spread,
            solver,
        })
    }

    pub fn solver(&self) -> &BranchSolver {
        &self.solver
    }

    /// `(u₀, u₀′, u₁, u₁′)` at one point of `(0, 1)`.
    pub fn eval(&self, rho: f64) -> Result<[C; 4]> {
        if let Some(i) = self.points.iter().position(|&p| p == rho) {
            return Ok([self.u0[i], self.du0[i], self.u1[i], self.du1[i]]);
        }
        let a = self.solver.u0(&[rho])?[0];
        let b = self.solver.u1(&[rho])?[0];
        Ok([a[0], a[1], b[0], b[1]])
    }

    fn green_prefactor(&self, s: f64) -> Result<C> {
        if self.w0.norm() <= 1e-8 {
            return Err(Error::EigenvalueSingularity(self.w0.norm()));
        }
        let l = self.lambda;
        Ok((cr(1.0 - s * s).ln() * (l - 0.5)).exp() * (s * s) / ((cr(1.0) - l * 2.0) * self.w0))
    }

    /// `G(ρ, s; λ)`.
    pub fn green(&self, rho: f64, s: f64) -> Result<C> {
        Ok(self.green_with_derivative(rho, s)?.0)
    }

    /// `(G, ∂_ρG)`; on the diagonal the `ρ ≤ s` branch is used.
    pub fn green_with_derivative(&self, rho: f64, s: f64) -> Result<(C, C)> {
        SpectralPoint::from(self.lambda).check_strip()?;
        if !(rho > 0.0 && rho < 1.0 && s > 0.0 && s < 1.0) {
            return Err(Error::InvalidArgument("Green function needs rho, s in (0, 1)".into()));
        }
        let pre = self.green_prefactor(s)?;
        let er = self.eval(rho)?;
        let es = if s == rho { er } else { self.eval(s)? };
        Ok(if rho <= s {
            (pre * er[0] * es[2], pre * er[1] * es[2])
        } else {
            (pre * er[2] * es[0], pre * er[3] * es[0])
        })
    }

    /// Relative spread check.
    pub fn checked(self, max_spread: f64) -> Result<Self> {
        if self.spread > max_spread {
            return Err(Error::InconsistentWronskian(self.spread));
        }
        Ok(self)
    }
}

fn complex_median(v: &[C]) -> C {
    let med = |mut x: Vec<f64>| {
        x.sort_by(f64::total_cmp);
        let n = x.len();
        if n % 2 == 1 {
            x[n / 2]
        } else {
            0.5 * (x[n / 2 - 1] + x[n / 2])
        }
    };
    C::new(med(v.iter().map(|z| z.re).collect()), med(v.iter().map(|z| z.im).collect()))
}

/// Scaled Wronskian with the spread check (threshold `1e-6`).
pub fn wronskian_w0(pair: &FundamentalPair) -> Result<C> {
    if pair.spread > 1e-6 {
        return Err(Error::InconsistentWronskian(pair.spread));
    }
    Ok(pair.w0)
}

/// `φ₁(ρ;λ) = ρ⁻¹(1+ρ)^{1/2−λ}`.
pub fn phi1_free(lambda: C, rho: f64) -> C {
    (cr(1.0 + rho).ln() * (cr(0.5) - lambda)).exp() / rho
}

/// `φ₀(ρ;λ) = ρ⁻¹[(1+ρ)^{1/2−λ} − (1−ρ)^{1/2−λ}]`.
pub fn phi0_free(lambda: C, rho: f64) -> C {
    let a = cr(0.5) - lambda;
    if rho < 1e-5 {
        // odd expansion: 2a + (a(a−1)(a−2)/3) ρ²
        return a * 2.0 + a * (a - 1.0) * (a - 2.0) / 3.0 * (rho * rho);
    }
    ((cr(1.0 + rho).ln() * a).exp() - (cr(1.0 - rho).ln() * a).exp()) / rho
}

/// Free Green function `G₀(ρ, s; λ)` in closed form.
pub fn green_free(lambda: C, rho: f64, s: f64) -> C {
    let pre = (cr(1.0 - s * s).ln() * (lambda - 0.5)).exp() * (s * s) / (cr(1.0) - lambda * 2.0);
    if rho <= s {
        pre * phi0_free(lambda, rho) * phi1_free(lambda, s)
    } else {
        pre * phi1_free(lambda, rho) * phi0_free(lambda, s)
    }
}

/// Real data `f̃` at the nodes together with `f̃₁′`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventRHS {
    pub f1: Vec<f64>,
    pub df1: Vec<f64>,
    pub f2: Vec<f64>,
}

impl ResolventRHS {
    pub fn from_state(grid: &Grid, state: &State) -> Self {
        let mut df1 = vec![0.0; grid.len()];
        grid.differentiate_into(&state.phi1, &mut df1);
        Self { f1: state.phi1.clone(), df1, f2: state.phi2.clone() }
    }

    /// `F_λ(s) = s f̃₁′(s) + (λ + 3/2) f̃₁(s) + f̃₂(s)`.
    pub fn forcing(&self, grid: &Grid, lambda: C, s: f64) -> C {
        let f1 = grid.interpolate_unchecked(&self.f1, s);
        let df1 = grid.interpolate_unchecked(&self.df1, s);
        let f2 = grid.interpolate_unchecked(&self.f2, s);
        cr(s * df1 + f2) + (lambda + 1.5) * f1
    }
}

/// Complex node samples of both components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexState {
    pub phi1: Vec<C>,
    pub phi2: Vec<C>,
}

impl ComplexState {
    pub fn stacked(&self) -> Vec<C> {
        self.phi1.iter().chain(&self.phi2).copied().collect()
    }

    pub fn re(&self) -> State {
        State { phi1: self.phi1.iter().map(|z| z.re).collect(), phi2: self.phi2.iter().map(|z| z.re).collect() }
    }

    pub fn im(&self) -> State {
        State { phi1: self.phi1.iter().map(|z| z.im).collect(), phi2: self.phi2.iter().map(|z| z.im).collect() }
    }

    /// `‖·‖_ℋ` of the complex pair.
    pub fn h_norm(&self, grid: &Grid) -> f64 {
        let a = crate::spaces::h_norm(grid, &self.re());
        let b = crate::spaces::h_norm(grid, &self.im());
        (a * a + b * b).sqrt()
    }
}

/// Panel quadrature data in `y = atanh(s)` shared by the resolvent integrals.
struct ResolventQuadrature {
    /// Quadrature abscissae `s_q`, ascending.
    s: Vec<f64>,
    /// `s² cosh(y)^{−1−2λ} dy` weights.
    w: Vec<C>,
    /// For each interior node `j`, number of abscissae below `ρ_j`.
    below: Vec<usize>,
}

impl ResolventQuadrature {
    fn new(grid: &Grid, lambda: C, offset1: f64) -> Self {
        let n = grid.order();
        let (gx, gw) = gl16();
        let wmax = 0.25_f64.min(std::f64::consts::PI / lambda.im.abs().max(1.0));
        let mut breaks: Vec<f64> = grid.nodes()[..n].iter().map(|r| r.atanh()).collect();
        breaks.push((1.0 - offset1).atanh());
        let mut s = Vec::new();
        let mut w = Vec::new();
        let mut below = vec![0; n + 1];
        for j in 0..n {
            below[j] = s.len();
            let (a, b) = (breaks[j], breaks[j + 1]);
            let pieces = ((b - a) / wmax).ceil().max(1.0) as usize;
            let h = (b - a) / pieces as f64;
            for p in 0..pieces {
                let lo = a + p as f64 * h;
                for (x, wt) in gx.iter().zip(gw) {
                    let y = lo + 0.5 * h * (x + 1.0);
                    let sy = y.tanh();
                    // ln cosh y = y + ln(1 + e^{−2y}) − ln 2
                    let lc = y + (-2.0 * y).exp().ln_1p() - std::f64::consts::LN_2;
                    s.push(sy);
                    w.push((-(lambda * 2.0 + 1.0) * lc).exp() * (sy * sy * 0.5 * h * wt));
                }
            }
        }
        below[n] = s.len();
        Self { s, w, below }
    }
}

/// First and second components of `(λ − L)⁻¹ f̃` at the nodes.
pub fn apply_resolvent(grid: &Grid, pair: &FundamentalPair, rhs: &ResolventRHS) -> Result<ComplexState> {
    let l = pair.lambda;
    SpectralPoint::from(l).check_strip()?;
    if pair.w0.norm() <= 1e-8 {
        return Err(Error::EigenvalueSingularity(pair.w0.norm()));
    }
    let n = grid.order();
    let m = grid.len();
    if pair.points.len() != n - 1 || pair.points.iter().zip(&grid.nodes()[1..n]).any(|(a, b)| a != b) {
        return Err(Error::InvalidArgument("pair must be sampled at the interior grid nodes".into()));
    }
    let offset1 = pair.solver.opts.offset1;
    let q = ResolventQuadrature::new(grid, l, offset1);
    let a = pair.solver.u0(&q.s)?;
    let b = pair.solver.u1(&q.s)?;
    let f: Vec<C> = q.s.iter().map(|&s| rhs.forcing(grid, l, s)).collect();
    let c0: Vec<C> = (0..q.s.len()).map(|i| q.w[i] * a[i][0] * f[i]).collect();
    let c1: Vec<C> = (0..q.s.len()).map(|i| q.w[i] * b[i][0] * f[i]).collect();

    // Endpoint layer [1 − h, 1] in s, with c(s) = s²(1+s)^{λ−1/2}(1−s)^{λ−1/2}.
    let h = offset1;
    let se = 1.0 - h;
    let ends = pair.solver.u0(&[se])?[0];
    let endb = pair.solver.u1(&[se])?[0];
    let fe = rhs.forcing(grid, l, se);
    let smooth = (cr(1.0 + se).ln() * (l - 0.5)).exp() * (se * se) * fe;
    let hp = |p: C| (cr(h).ln() * p).exp();
    let tail1 = smooth * endb[0] * hp(l + 0.5) / (l + 0.5);
    // u₀ ≈ A + B(1−s)^{1/2−λ} near the lightcone
    let bcoef = -ends[1] * hp(l + 0.5) / (cr(0.5) - l);
    let acoef = ends[0] - bcoef * hp(cr(0.5) - l);
    let tail0 = smooth * (acoef * hp(l + 0.5) / (l + 0.5) + bcoef * h);

    let total0: C = c0.iter().sum::<C>() + tail0;
    let total1: C = c1.iter().sum::<C>() + tail1;
    let denom = (cr(1.0) - l * 2.0) * pair.w0;
    let mut u = vec![cr(0.0); m];
    u[0] = (cr(1.0) - l * 2.0) * total1 / denom;
    for (j, uj) in u.iter_mut().enumerate().take(n).skip(1) {
        let k = q.below[j];
        let i0: C = c0[..k].iter().sum();
        let i1: C = c1[k..].iter().sum::<C>() + tail1;
        *uj = (pair.u1[j - 1] * i0 + pair.u0[j - 1] * i1) / denom;
    }
    u[n] = two_pow(cr(0.5) - l) * total0 / denom;

    let re: Vec<f64> = u.iter().map(|z| z.re).collect();
    let im: Vec<f64> = u.iter().map(|z| z.im).collect();
    let mut dre = vec![0.0; m];
    let mut dim = vec![0.0; m];
    grid.differentiate_into(&re, &mut dre);
    grid.differentiate_into(&im, &mut dim);
    let phi2 = (0..m).map(|j| C::new(dre[j], dim[j]) * grid.nodes()[j] + (l + 0.5) * u[j] - rhs.f1[j]).collect();
    Ok(ComplexState { phi1: u, phi2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveop::{assemble, Mode};

    fn i() -> C {
        C::new(0.0, 1.0)
    }

    #[test]
    fn series_at_centre_matches_closed_coefficient() {
        let l = C::new(0.2, 3.0);
        let s = BranchSolver::new(l.into(), &PotentialSpec::Linearized, SolverOptions::default()).unwrap();
        let a2 = (l + 3.0) * (l - 1.0) / 6.0;
        assert!((s.series0[2] / s.series0[0] - a2).norm() < 1e-14);
        assert!(s.series0[1].norm() == 0.0);
        let du1 = -(l + 3.0) * (l - 1.0) / (cr(1.0) + l * 2.0) * two_pow(cr(0.5) - l);
        assert!((s.du1_at_one() - du1).norm() < 1e-13);
    }

    #[test]
    fn free_branches_match_closed_forms() {
        let pts: Vec<f64> = (1..=9).map(|k| 0.1 * k as f64).collect();
        let pair =
            FundamentalPair::on_points(i().into(), &PotentialSpec::Zero, &pts, SolverOptions::default()).unwrap();
        for (k, &r) in pts.iter().enumerate() {
            assert!((pair.u0[k] - phi0_free(i(), r)).norm() < 1e-8, "u0 at {r}");
            assert!((pair.u1[k] - phi1_free(i(), r)).norm() < 1e-8, "u1 at {r}");
        }
        assert!((pair.w0 - 1.0).norm() < 1e-8);
    }

    #[test]
    fn linearized_unit_eigenvalue() {
        let g = Grid::new(24).unwrap();
        let pair = FundamentalPair::new(cr(1.0).into(), &PotentialSpec::Linearized, &g).unwrap();
        for (k, &r) in pair.points.iter().enumerate() {
            if r <= 0.9 {
                assert!((pair.u0[k] - pair.u0[0]).norm() <= 1e-6 * 1.0);
            }
        }
        assert!(pair.w0.norm() <= 1e-6);
        // u₁ is parallel to u₀
        let ratio = pair.u1[0] / pair.u0[0];
        for k in 0..pair.points.len() {
            assert!((pair.u1[k] - ratio * pair.u0[k]).norm() / pair.u1[k].norm() < 1e-5);
        }
    }

    #[test]
    fn hypergeometric_branches_agree() {
        let l = C::new(0.1, 5.0);
        let pts = [0.2, 0.5, 0.8];
        let pair =
            FundamentalPair::on_points(l.into(), &PotentialSpec::Linearized, &pts, SolverOptions::default()).unwrap();
        for (k, &r) in pts.iter().enumerate() {
            let a = crate::hyp::u0_closed(l, r).unwrap();
            let b = crate::hyp::u1_closed(l, r).unwrap();
            assert!((pair.u0[k] - a).norm() < 1e-7 * a.norm(), "{r}: {} vs {a}", pair.u0[k]);
            assert!((pair.u1[k] - b).norm() < 1e-7 * b.norm(), "{r}: {} vs {b}", pair.u1[k]);
        }
        let w = crate::hyp::w0_closed(l).unwrap();
        assert!((pair.w0 - w).norm() < 1e-6, "{} vs {w}", pair.w0);
    }

    #[test]
    fn green_continuity_jump_and_free_limit() {
        let l = C::new(0.1, 2.0);
        let g = Grid::new(16).unwrap();
        let pair = FundamentalPair::new(l.into(), &PotentialSpec::Linearized, &g).unwrap();
        let s = 0.5;
        let d = 1e-9;
        let lo = pair.green(s - d, s).unwrap();
        let hi = pair.green(s + d, s).unwrap();
        assert!((lo - hi).norm() < 1e-8);
        let (_, dl) = pair.green_with_derivative(s, s).unwrap();
        let (_, dh) = pair.green_with_derivative(s + 1e-12, s).unwrap();
        assert!((dh - dl + 1.0 / (1.0 - s * s)).norm() < 1e-6);
        let free = FundamentalPair::new(i().into(), &PotentialSpec::Zero, &g).unwrap();
        let v = free.green(0.3, 0.6).unwrap();
        assert!((v - green_free(i(), 0.3, 0.6)).norm() < 1e-7);
    }

    #[test]
    fn resolvent_identity() {
        let g = Grid::new(24).unwrap();
        let l = C::new(0.1, 5.0);
        let pair = FundamentalPair::new(l.into(), &PotentialSpec::Linearized, &g).unwrap();
        let f = State::from_fns(&g, |r| (1.0 - r * r).powi(2) + 0.3, |r| r * r - 0.5 * r.powi(4));
        let u = apply_resolvent(&g, &pair, &ResolventRHS::from_state(&g, &f)).unwrap();
        let op = assemble(&g, Mode::Full);
        let lu = op.apply_complex(&u.stacked());
        let v: Vec<C> = u.stacked().iter().zip(&lu).map(|(a, b)| l * a - b).collect();
        let m = g.len();
        let back = ComplexState { phi1: v[..m].to_vec(), phi2: v[m..].to_vec() };
        let diff = ComplexState {
            phi1: back.phi1.iter().zip(&f.phi1).map(|(a, b)| a - b).collect(),
            phi2: back.phi2.iter().zip(&f.phi2).map(|(a, b)| a - b).collect(),
        };
        let rel = diff.h_norm(&g) / crate::spaces::h_norm(&g, &f);
        assert!(rel < 1e-6, "{rel}");
    }

    #[test]
    fn zero_data_and_real_lambda() {
        let g = Grid::new(16).unwrap();
        let pair = FundamentalPair::new(cr(0.2).into(), &PotentialSpec::Linearized, &g).unwrap();
        let z = apply_resolvent(&g, &pair, &ResolventRHS::from_state(&g, &State::zeros(g.len()))).unwrap();
        assert!(z.stacked().iter().all(|v| v.norm() == 0.0));
        let f = State::from_fns(&g, |r| (r * r).cos(), |r| r * r);
        let u = apply_resolvent(&g, &pair, &ResolventRHS::from_state(&g, &f)).unwrap();
        assert!(u.stacked().iter().all(|v| v.im.abs() <= 1e-10));
    }

    #[test]
    fn strip_and_degeneracy_errors() {
        let g = Grid::new(8).unwrap();
        let pair = FundamentalPair::new(C::new(0.5, 1.0).into(), &PotentialSpec::Linearized, &g).unwrap();
        assert!(matches!(pair.green(0.2, 0.4), Err(Error::OutOfStrip(_))));
        assert!(matches!(
            BranchSolver::new(cr(-0.5).into(), &PotentialSpec::Zero, SolverOptions::default()),
            Err(Error::DegenerateParameter(_))
        ));
    }
}
