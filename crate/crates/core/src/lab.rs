//! Experiment harness: random ensembles, blowup-time shooting, linear-flow
//! bounds and the nonlinear stability sweep.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{growth_rate, EvolveConfig, EvolveMode, Evolver, RateDiagnostic, Trajectory};
use crate::simcoords::{c3, from_similarity, to_similarity, CoordinateFrame, PhysicalData, Profile, State};
use crate::spaces::{h_norm, linear_fit, strichartz_norm, StrichartzExponents};
use crate::specgrid::Grid;
use crate::waveop::{assemble, projection, Mode, Projection};

/// Smooth random data `Σ a_k T_k(2ρ² − 1)` for both components, `a_k ~ N(0, (k+1)^{−2·decay})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RandomDataSpec {
    pub seed: u64,
    /// Member index; selects the ChaCha stream.
    pub stream: u64,
    pub decay: f64,
    /// Target `‖·‖_ℋ` after rescaling.
    pub target: f64,
    pub terms: usize,
}

impl Default for RandomDataSpec {
    fn default() -> Self {
        Self { seed: 0, stream: 0, decay: 3.0, target: 1.0, terms: 12 }
    }
}

/// Coefficients of a random member, independent of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomProfile {
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
}

impl RandomProfile {
    pub fn draw(spec: &RandomDataSpec) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
        rng.set_stream(spec.stream);
        let mut coeffs = || -> Vec<f64> {
            (0..spec.terms)
                .map(|k| {
                    let z: f64 = rng.sample(StandardNormal);
                    z * ((k + 1) as f64).powf(-spec.decay)
                })
                .collect()
        };
        let a1 = coeffs();
        let a2 = coeffs();
        Self { a1, a2 }
    }

    fn series(a: &[f64], rho: f64) -> f64 {
        let x = 2.0 * rho * rho - 1.0;
        let (mut t0, mut t1) = (1.0, x);
        let mut sum = 0.0;
        for (k, c) in a.iter().enumerate() {
            let tk = if k == 0 { t0 } else { t1 };
            sum += c * tk;
            if k >= 1 {
                let t2 = 2.0 * x * t1 - t0;
                t0 = t1;
                t1 = t2;
            }
        }
        sum
    }

    pub fn phi1(&self, rho: f64) -> f64 {
        Self::series(&self.a1, rho)
    }

    pub fn phi2(&self, rho: f64) -> f64 {
        Self::series(&self.a2, rho)
    }

    pub fn sample(&self, grid: &Grid) -> State {
        State::from_fns(grid, |r| self.phi1(r), |r| self.phi2(r))
    }
}

/// Random state on `grid` rescaled to `‖·‖_ℋ = spec.target`.
pub fn random_state(spec: &RandomDataSpec, grid: &Grid) -> State {
    let s = RandomProfile::draw(spec).sample(grid);
    let n = h_norm(grid, &s);
    if n == 0.0 {
        return s;
    }
    s.scaled(spec.target / n)
}

/// `size` members with streams `0..size`.
pub fn ensemble(spec: &RandomDataSpec, grid: &Grid, size: usize) -> Vec<State> {
    (0..size as u64).map(|k| random_state(&RandomDataSpec { stream: k, ..*spec }, grid)).collect()
}

/// Configuration of the blowup-time shooting and the stability sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StabilityConfig {
    pub deltas: Vec<f64>,
    /// Perturbations are drawn with `‖v‖ = δ/M`.
    pub safety: f64,
    /// Half-width of the shooting interval around `T = 1`.
    pub delta_t: f64,
    pub seed: u64,
    pub members: usize,
    pub order: usize,
    pub tau_max: f64,
    /// Bisection stops once the bracket is shorter than this.
    pub t_tol: f64,
    /// Instability threshold as a multiple of `δ`.
    pub threshold: f64,
    /// Radius of the physical data domain.
    pub radius: f64,
    pub decay: f64,
    pub dt: Option<f64>,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self {
            deltas: vec![1e-2, 1e-3],
            safety: 1.0,
            delta_t: 0.1,
            seed: 0,
            members: 20,
            order: 16,
            tau_max: 20.0,
            t_tol: 1e-13,
            threshold: 10.0,
            radius: 1.5,
            decay: 3.0,
            dt: None,
        }
    }
}

impl StabilityConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.deltas.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
            return bad("deltas must be finite and non-negative");
        }
        if !(self.safety >= 1.0) {
            return bad("safety factor must be >= 1");
        }
        if !(self.delta_t > 0.0 && self.delta_t < 1.0) {
            return bad("delta_t must lie in (0, 1)");
        }
        if !(self.t_tol > 0.0) || !(self.tau_max > 0.0) || !(self.threshold > 0.0) {
            return bad("t_tol, tau_max and threshold must be positive");
        }
        if self.radius < 1.0 + self.delta_t {
            return bad("radius must cover the shooting interval");
        }
        if self.order < 2 {
            return bad("order must be at least 2");
        }
        Ok(())
    }
}

/// One trial of the shooting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub t: f64,
    /// `+1` when the gauge amplitude ends positive, `−1` negative, `0` if identically zero.
    pub class: i8,
    /// τ at which the class was decided.
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shooting {
    pub t_star: f64,
    pub bracket: (f64, f64),
    pub trace: Vec<ShotRecord>,
}

/// Nonlinear shooting machinery shared across trials.
pub struct Shooter {
    grid: Grid,
    evolver: Evolver,
    cfg: StabilityConfig,
}

impl Shooter {
    pub fn new(cfg: &StabilityConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = Grid::new(cfg.order)?;
        let proj = projection(&grid, &assemble(&grid, Mode::Full))?;
        Self::with_projection(cfg, grid, proj)
    }

    pub fn with_projection(cfg: &StabilityConfig, grid: Grid, proj: Projection) -> Result<Self> {
        let ecfg = EvolveConfig { dt: cfg.dt, ..EvolveConfig::new(EvolveMode::Nonlinear, cfg.tau_max) };
        let evolver = Evolver::with_projection(&grid, ecfg, proj)?;
        Ok(Self { grid, evolver, cfg: cfg.clone() })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn evolver(&self) -> &Evolver {
        &self.evolver
    }

    /// `Φ(0)` for the frame `T`.
    pub fn initial(&self, data: &PhysicalData, t: f64) -> Result<State> {
        to_similarity(data, &CoordinateFrame::new(t)?, &self.grid)
    }

    /// Classifies the frame `T` by the sign of `a(τ)` at the first `|a| > threshold`,
    /// else at `τ_max`.
    pub fn classify(&self, data: &PhysicalData, t: f64, delta: f64) -> Result<ShotRecord> {
        let phi = self.initial(data, t)?;
        let level = self.cfg.threshold * delta;
        let traj = self.evolver.run_until(&phi, |_, a| a.abs() > level)?;
        let tau = *traj.taus.last().unwrap_or(&0.0);
        let a = *traj.amplitudes.last().unwrap_or(&0.0);
        let class = if traj.escaped {
            // escape is only reachable through the unstable direction
            let s = traj.states.last().map(|s| s.phi1[0]).unwrap_or(0.0);
            if s > 0.0 {
                1
            } else {
                -1
            }
        } else if a > 0.0 {
            1
        } else if a < 0.0 {
            -1
        } else {
            0
        };
        Ok(ShotRecord { t, class, tau })
    }

    /// Bisection for the frame in which the gauge mode is absent.
    pub fn find_blowup_time(&self, data: &PhysicalData, delta: f64) -> Result<Shooting> {
        let mut lo = 1.0 - self.cfg.delta_t;
        let mut hi = 1.0 + self.cfg.delta_t;
        let mut trace = Vec::new();
        let rl = self.classify(data, lo, delta)?;
        let rh = self.classify(data, hi, delta)?;
        trace.push(rl);
        trace.push(rh);
        if rl.class >= 0 || rh.class <= 0 {
            return Err(Error::ShootingBracket(format!(
                "T = {lo} classifies {} and T = {hi} classifies {}",
                rl.class, rh.class
            )));
        }
        while hi - lo >= self.cfg.t_tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let r = self.classify(data, mid, delta)?;
            trace.push(r);
            match r.class {
                0 => return Ok(Shooting { t_star: mid, bracket: (mid, mid), trace }),
                1 => hi = mid,
                _ => lo = mid,
            }
        }
        Ok(Shooting { t_star: 0.5 * (lo + hi), bracket: (lo, hi), trace })
    }
}

/// Physical data `u¹[0] + v` with `v` sampled on `grid` over `[0, radius]`.
pub fn perturbed_blowup_data(grid: &Grid, v: &State, radius: f64) -> Result<PhysicalData> {
    let g = std::sync::Arc::new(grid.clone());
    let pv = Profile::Sampled { grid: g.clone(), values: v.phi1.clone() };
    let vv = Profile::Sampled { grid: g, values: v.phi2.clone() };
    let c = c3();
    Ok(PhysicalData::new(radius, pv, vv)?.shifted(c, 0.5 * c))
}

/// `∫ ‖φ₁(τ)‖²_∞ dτ` by the trapezoid rule over recorded samples.
pub fn l2_linf_squared(grid: &Grid, traj: &Trajectory) -> f64 {
    let sq: Vec<f64> = traj.states.iter().map(|s| grid.sup_norm(&s.phi1).powi(2)).collect();
    traj.taus.windows(2).zip(sq.windows(2)).map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1])).sum()
}

/// `∫₀^{t_max} [‖u − u^T‖_∞/‖u^T‖_∞]² dt/(T − t)` from physical slices, trapezoid in `t`.
pub fn physical_integral(grid: &Grid, traj: &Trajectory, t_blowup: f64) -> Result<f64> {
    let frame = CoordinateFrame::new(t_blowup)?;
    let c = c3();
    let mut pts = Vec::with_capacity(traj.len());
    for (s, &tau) in traj.states.iter().zip(&traj.taus) {
        let slice = from_similarity(s, &frame, tau, grid)?;
        let rem = t_blowup - slice.t;
        let ut = c / rem.sqrt();
        let diff: Vec<f64> = slice.u.iter().map(|u| u - ut).collect();
        let ratio = grid.sup_norm(&diff) / ut;
        pts.push((slice.t, ratio * ratio / rem));
    }
    Ok(pts.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberRecord {
    pub delta: f64,
    pub member: usize,
    pub t_star: f64,
    pub bracket_width: f64,
    pub shots: usize,
    /// `‖φ₁‖²_{L²L^∞}` along the trajectory at `T*`.
    pub s_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub records: Vec<MemberRecord>,
    /// `(δ, max S(δ))`.
    pub max_s: Vec<(f64, f64)>,
    /// Log-log slope of max S against δ.
    pub slope: f64,
    /// `max S/δ²`.
    pub max_ratio: f64,
    /// Smallest C with `|T* − 1| ≤ Cδ` for every member.
    pub c_fit: f64,
}

/// Shoot `T*` and integrate at `T*` for one perturbation.
pub fn run_member(shooter: &Shooter, v: &State, delta: f64) -> Result<(Shooting, Trajectory)> {
    let data = perturbed_blowup_data(shooter.grid(), v, shooter.cfg.radius)?;
    let shot = shooter.find_blowup_time(&data, delta.max(f64::MIN_POSITIVE))?;
    let traj = shooter.evolver().run(&shooter.initial(&data, shot.t_star)?)?;
    Ok((shot, traj))
}

/// Perturbations of `u¹[0]` of size `δ/M`, shooting and `‖φ₁‖²_{L²L^∞}` per member.
pub fn stability_experiment(cfg: &StabilityConfig) -> Result<StabilityReport> {
    let shooter = Shooter::new(cfg)?;
    let grid = shooter.grid().clone();
    let jobs: Vec<(f64, usize)> = cfg.deltas.iter().flat_map(|&d| (0..cfg.members).map(move |m| (d, m))).collect();
    let records: Vec<Result<MemberRecord>> = jobs
        .par_iter()
        .map(|&(delta, member)| {
            let spec = RandomDataSpec {
                seed: cfg.seed,
                stream: member as u64,
                decay: cfg.decay,
                target: delta / cfg.safety,
                ..RandomDataSpec::default()
            };
            let v = if delta == 0.0 { State::zeros(grid.len()) } else { random_state(&spec, &grid) };
            let (shot, traj) = run_member(&shooter, &v, delta)?;
            Ok(MemberRecord {
                delta,
                member,
                t_star: shot.t_star,
                bracket_width: shot.bracket.1 - shot.bracket.0,
                shots: shot.trace.len(),
                s_value: l2_linf_squared(&grid, &traj),
            })
        })
        .collect();
    let records = records.into_iter().collect::<Result<Vec<_>>>()?;
    let mut max_s = Vec::new();
    for &d in &cfg.deltas {
        let m = records.iter().filter(|r| r.delta == d).map(|r| r.s_value).fold(0.0, f64::max);
        max_s.push((d, m));
    }
    let pts: Vec<(f64, f64)> =
        max_s.iter().filter(|(d, s)| *d > 0.0 && *s > 0.0).map(|(d, s)| (d.ln(), s.ln())).collect();
    let slope = if pts.len() >= 2 { linear_fit(&pts).0 } else { f64::NAN };
    let max_ratio =
        records.iter().filter(|r| r.delta > 0.0).map(|r| r.s_value / (r.delta * r.delta)).fold(0.0, f64::max);
    let c_fit = records.iter().filter(|r| r.delta > 0.0).map(|r| (r.t_star - 1.0).abs() / r.delta).fold(0.0, f64::max);
    Ok(StabilityReport { records, max_s, slope, max_ratio, c_fit })
}

/// Which linear flow a bound experiment measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinearFlow {
    /// `S₀(τ)f`.
    Free,
    /// `S(τ)(I − P)f`.
    Projected,
}

impl std::str::FromStr for LinearFlow {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "free" => Ok(Self::Free),
            "projected" => Ok(Self::Projected),
            _ => Err(Error::InvalidArgument(format!("unknown flow {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundKind {
    Strichartz(StrichartzExponents),
    Energy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRecord {
    pub member: usize,
    pub data_norm: f64,
    /// Strichartz norm over data norm, or `sup h_norm/h_norm(0)`.
    pub ratio: f64,
    /// Log-slope of `h_norm` on the last half of the window (energy kind).
    pub slope: f64,
    pub skipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub records: Vec<BoundRecord>,
    pub max_ratio: f64,
    pub max_slope: f64,
}

/// Linear-flow bound over an ensemble; members are projected for [`LinearFlow::Projected`].
pub fn linear_bound_experiment(
    grid: &Grid,
    kind: BoundKind,
    flow: LinearFlow,
    members: &[State],
    tau_max: f64,
) -> Result<BoundReport> {
    let mode = match flow {
        LinearFlow::Free => EvolveMode::Free,
        LinearFlow::Projected => EvolveMode::Linearized,
    };
    let cfg = EvolveConfig { reproject: flow == LinearFlow::Projected, ..EvolveConfig::new(mode, tau_max) };
    let evolver = Evolver::new(grid, cfg)?;
    let records: Vec<Result<BoundRecord>> = members
        .par_iter()
        .enumerate()
        .map(|(member, f)| {
            let data = match flow {
                LinearFlow::Free => f.clone(),
                LinearFlow::Projected => evolver.projection().complement(f),
            };
            let norm = h_norm(grid, &data);
            if norm <= 1e-12 * h_norm(grid, f).max(f64::MIN_POSITIVE) {
                return Ok(BoundRecord { member, data_norm: norm, ratio: 0.0, slope: 0.0, skipped: true });
            }
            let traj = evolver.run(&data)?;
            let (ratio, slope) = match kind {
                BoundKind::Strichartz(e) => (strichartz_norm(grid, &traj, e)? / norm, 0.0),
                BoundKind::Energy => {
                    let sup = traj.h_norms.iter().copied().fold(0.0, f64::max);
                    let s = growth_rate(&traj, (0.5 * tau_max, tau_max), RateDiagnostic::Energy)?;
                    (sup / norm, s)
                }
            };
            Ok(BoundRecord { member, data_norm: norm, ratio, slope, skipped: false })
        })
        .collect();
    let records = records.into_iter().collect::<Result<Vec<_>>>()?;
    let live = records.iter().filter(|r| !r.skipped);
    let max_ratio = live.clone().map(|r| r.ratio).fold(0.0, f64::max);
    let max_slope = live.map(|r| r.slope).fold(f64::NEG_INFINITY, f64::max);
    Ok(BoundReport { records, max_ratio, max_slope })
}
