//! Explicit RK4 integration of the similarity-coordinate system.
//!
//! Linear modes step with a precomputed stride propagator (the RK4 step
//! matrix raised to the number of steps per record interval), which is the
//! same map as stepping the right-hand side but far cheaper on long runs.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simcoords::{c3, State};
use crate::spaces::{h_norm, linear_fit};
use crate::specgrid::{matvec, Grid};
use crate::waveop::{assemble, enforce_regularity, projection, Mode, Projection, POTENTIAL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvolveMode {
    Free,
    Linearized,
    Nonlinear,
}

impl std::str::FromStr for EvolveMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "free" => Ok(Self::Free),
            "linearized" => Ok(Self::Linearized),
            "nonlinear" => Ok(Self::Nonlinear),
            _ => Err(Error::InvalidArgument(format!("unknown evolution mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolveConfig {
    pub mode: EvolveMode,
    /// Step size; `None` selects `0.25/N²`.
    pub dt: Option<f64>,
    pub tau_max: f64,
    /// τ-spacing of recorded states.
    pub record_every: f64,
    /// Escape cap on `sup|φ₁|`.
    pub escape: f64,
    /// Zero the top sixth of Chebyshev coefficients after every record interval.
    pub filter: bool,
    /// Apply `I − P` after every record interval (linear modes only).
    pub reproject: bool,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            mode: EvolveMode::Nonlinear,
            dt: None,
            tau_max: 10.0,
            record_every: 0.05,
            escape: 10.0,
            filter: false,
            reproject: false,
        }
    }
}

impl EvolveConfig {
    pub fn new(mode: EvolveMode, tau_max: f64) -> Self {
        Self { mode, tau_max, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
            }
        }
        if !(self.tau_max > 0.0 && self.tau_max.is_finite()) {
            return Err(Error::InvalidArgument(format!("tau_max must be positive, got {}", self.tau_max)));
        }
        if !(self.record_every > 0.0) {
            return Err(Error::InvalidArgument("record_every must be positive".into()));
        }
        if !(self.escape > 0.0) {
            return Err(Error::InvalidArgument("escape threshold must be positive".into()));
        }
        Ok(())
    }
}

/// Recorded states with per-record diagnostics.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub taus: Vec<f64>,
    pub states: Vec<State>,
    pub h_norms: Vec<f64>,
    pub sup_phi1: Vec<f64>,
    /// Gauge amplitude `a(τ) = ⟨Φ(τ), g*⟩`.
    pub amplitudes: Vec<f64>,
    /// Set when the run stopped on the escape cap.
    pub escaped: bool,
}

impl Trajectory {
    pub fn push(&mut self, tau: f64, state: State, h: f64, sup: f64, a: f64) {
        self.taus.push(tau);
        self.states.push(state);
        self.h_norms.push(h);
        self.sup_phi1.push(sup);
        self.amplitudes.push(a);
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    pub fn last(&self) -> Option<&State> {
        self.states.last()
    }

    /// Index of the recorded τ closest to `tau`.
    pub fn nearest(&self, tau: f64) -> Option<usize> {
        (0..self.len()).min_by(|&i, &j| (self.taus[i] - tau).abs().total_cmp(&(self.taus[j] - tau).abs()))
    }
}

/// `N(φ) = 10c₃³φ² + 10c₃²φ³ + 5c₃φ⁴ + φ⁵`.
pub fn nonlinearity(phi: f64) -> f64 {
    let c = c3();
    phi * phi * (10.0 * c.powi(3) + phi * (10.0 * c * c + phi * (5.0 * c + phi)))
}

/// Right-hand side at the nodes, with the centre handled as in [`crate::waveop`].
pub fn rhs(grid: &Grid, state: &State, mode: EvolveMode) -> State {
    let mut work = Workspace::new(grid.len());
    let mut out = vec![0.0; 2 * grid.len()];
    work.rhs(grid, mode, &state.stacked(), &mut out);
    State::from_stacked(&out)
}

struct Workspace {
    u: Vec<f64>,
    du: Vec<f64>,
    d2u: Vec<f64>,
    dv: Vec<f64>,
}

impl Workspace {
    fn new(m: usize) -> Self {
        Self { u: vec![0.0; m], du: vec![0.0; m], d2u: vec![0.0; m], dv: vec![0.0; m] }
    }

    fn rhs(&mut self, grid: &Grid, mode: EvolveMode, y: &[f64], out: &mut [f64]) {
        let m = grid.len();
        let rho = grid.nodes();
        self.u.copy_from_slice(&y[..m]);
        enforce_regularity(grid, &mut self.u);
        let v = &y[m..];
        matvec(grid.diff_table(), &self.u, &mut self.du);
        matvec(grid.diff2_table(), &self.u, &mut self.d2u);
        matvec(grid.diff_table(), v, &mut self.dv);
        let (o1, o2) = out.split_at_mut(m);
        for i in 0..m {
            o1[i] = -rho[i] * self.du[i] - 0.5 * self.u[i] + v[i];
            let lap = if i == 0 { 3.0 * self.d2u[0] } else { self.d2u[i] + 2.0 / rho[i] * self.du[i] };
            let mut r = lap - rho[i] * self.dv[i] - 1.5 * v[i];
            if mode != EvolveMode::Free {
                r += POTENTIAL * self.u[i];
            }
            if mode == EvolveMode::Nonlinear {
                r += nonlinearity(self.u[i]);
            }
            o2[i] = r;
        }
        enforce_regularity(grid, o1);
    }
}

/// Reusable integrator for one grid and configuration.
pub struct Evolver {
    grid: Grid,
    cfg: EvolveConfig,
    dt: f64,
    steps_per_record: usize,
    records: usize,
    proj: Projection,
    /// Stride propagator for the linear modes.
    stride: Option<DMatrix<f64>>,
}

impl Evolver {
    pub fn new(grid: &Grid, cfg: EvolveConfig) -> Result<Self> {
        let proj = projection(grid, &assemble(grid, Mode::Full))?;
        Self::with_projection(grid, cfg, proj)
    }

    /// Reuses an already computed gauge projection.
    pub fn with_projection(grid: &Grid, cfg: EvolveConfig, proj: Projection) -> Result<Self> {
        cfg.validate()?;
        let n = grid.order() as f64;
        let dt_target = cfg.dt.unwrap_or(0.25 / (n * n));
        let records = (cfg.tau_max / cfg.record_every - 1e-9).ceil().max(1.0) as usize;
        let interval = cfg.tau_max / records as f64;
        let steps_per_record = (interval / dt_target - 1e-9).ceil().max(1.0) as usize;
        let dt = interval / steps_per_record as f64;
        let stride = match cfg.mode {
            EvolveMode::Nonlinear => None,
            EvolveMode::Free => {
                Some(stride_propagator(&assemble(grid, Mode::Free).matrix().clone(), dt, steps_per_record))
            }
            EvolveMode::Linearized => {
                Some(stride_propagator(&assemble(grid, Mode::Full).matrix().clone(), dt, steps_per_record))
            }
        };
        Ok(Self { grid: grid.clone(), cfg, dt, steps_per_record, records, proj, stride })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn projection(&self) -> &Projection {
        &self.proj
    }

    pub fn config(&self) -> &EvolveConfig {
        &self.cfg
    }

    /// Integrates to `τ_max` (or escape).
    pub fn run(&self, initial: &State) -> Result<Trajectory> {
        self.run_until(initial, |_, _| false)
    }

    /// Integrates until `stop(τ, a(τ))` holds at a record, `τ_max`, or escape.
    pub fn run_until(&self, initial: &State, mut stop: impl FnMut(f64, f64) -> bool) -> Result<Trajectory> {
        let m = self.grid.len();
        if initial.len() != m {
            return Err(Error::InvalidArgument(format!("state has {} nodes, grid has {m}", initial.len())));
        }
        let mut y = initial.stacked();
        enforce_regularity(&self.grid, &mut y[..m]);
        let mut traj = Trajectory::default();
        let mut tau = 0.0;
        if self.record(&mut traj, tau, &y, &mut stop)? {
            return Ok(traj);
        }
        let mut work = Workspace::new(m);
        let mut k = [vec![0.0; 2 * m], vec![0.0; 2 * m], vec![0.0; 2 * m], vec![0.0; 2 * m]];
        let mut tmp = vec![0.0; 2 * m];
        for r in 1..=self.records {
            match &self.stride {
                Some(p) => {
                    let v = DVector::from_column_slice(&y);
                    y.copy_from_slice((p * v).as_slice());
                }
                None => {
                    for _ in 0..self.steps_per_record {
                        rk4_step(&self.grid, self.cfg.mode, self.dt, &mut y, &mut k, &mut tmp, &mut work);
                    }
                }
            }
            if self.cfg.filter {
                filter_top_sixth(&self.grid, &mut y[..m]);
                filter_top_sixth(&self.grid, &mut y[m..]);
                enforce_regularity(&self.grid, &mut y[..m]);
            }
            if self.cfg.reproject && self.cfg.mode != EvolveMode::Nonlinear {
                let s = self.proj.complement(&State::from_stacked(&y));
                y = s.stacked();
            }
            tau = if r == self.records { self.cfg.tau_max } else { r as f64 * self.cfg.tau_max / self.records as f64 };
            if !y.iter().all(|v| v.is_finite()) {
                return Err(Error::IntegrationFailure {
                    last_good_tau: traj.taus.last().copied().unwrap_or(0.0),
                    reason: "non-finite state".into(),
                });
            }
            if self.record(&mut traj, tau, &y, &mut stop)? {
                break;
            }
        }
        Ok(traj)
    }

    fn record(
        &self,
        traj: &mut Trajectory,
        tau: f64,
        y: &[f64],
        stop: &mut impl FnMut(f64, f64) -> bool,
    ) -> Result<bool> {
        let s = State::from_stacked(y);
        let h = h_norm(&self.grid, &s);
        let sup = self.grid.sup_norm(&s.phi1);
        let a = self.proj.amplitude(&s);
        traj.push(tau, s, h, sup, a);
        if self.cfg.mode == EvolveMode::Nonlinear && sup > self.cfg.escape {
            traj.escaped = true;
            return Ok(true);
        }
        Ok(stop(tau, a))
    }
}

fn rk4_step(
    grid: &Grid,
    mode: EvolveMode,
    dt: f64,
    y: &mut [f64],
    k: &mut [Vec<f64>; 4],
    tmp: &mut [f64],
    work: &mut Workspace,
) {
    let n = y.len();
    work.rhs(grid, mode, y, &mut k[0]);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * dt * k[0][i];
    }
    work.rhs(grid, mode, tmp, &mut k[1]);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * dt * k[1][i];
    }
    work.rhs(grid, mode, tmp, &mut k[2]);
    for i in 0..n {
        tmp[i] = y[i] + dt * k[2][i];
    }
    work.rhs(grid, mode, tmp, &mut k[3]);
    for i in 0..n {
        y[i] += dt / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
    }
}

/// RK4 step matrix `R = I + hM + (hM)²/2 + (hM)³/6 + (hM)⁴/24` raised to `steps`.
pub fn stride_propagator(m: &DMatrix<f64>, dt: f64, steps: usize) -> DMatrix<f64> {
    let n = m.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let hm = m * dt;
    let r = &id + &hm * (&id + &hm * (&id + &hm * (&id + &hm / 4.0) / 3.0) / 2.0);
    let mut result = id;
    let mut base = r;
    let mut e = steps;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Zeroes the top sixth of the Chebyshev coefficients in place.
pub fn filter_top_sixth(grid: &Grid, values: &mut [f64]) {
    let n = grid.order();
    let mut c = grid.chebyshev_coefficients(values);
    let cut = n + 1 - (n + 1) / 6;
    for a in c.iter_mut().skip(cut) {
        *a = 0.0;
    }
    let nf = n as f64;
    for (j, v) in values.iter_mut().enumerate() {
        *v = c.iter().enumerate().map(|(k, a)| a * ((k * j) as f64 * std::f64::consts::PI / nf).cos()).sum();
    }
}

/// Convenience wrapper around [`Evolver`].
pub fn integrate(grid: &Grid, initial: &State, cfg: EvolveConfig) -> Result<Trajectory> {
    Evolver::new(grid, cfg)?.run(initial)
}

/// Quantity whose logarithmic slope [`growth_rate`] fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateDiagnostic {
    /// `|a(τ)|`.
    Amplitude,
    /// `‖Φ(τ)‖_ℋ`.
    Energy,
}

/// Least-squares slope of `log|a(τ)|` (or `log‖Φ‖_ℋ`) over `[t0, t1]`.
pub fn growth_rate(traj: &Trajectory, window: (f64, f64), diag: RateDiagnostic) -> Result<f64> {
    let series = match diag {
        RateDiagnostic::Amplitude => &traj.amplitudes,
        RateDiagnostic::Energy => &traj.h_norms,
    };
    let mut pts = Vec::new();
    for (t, v) in traj.taus.iter().zip(series) {
        if *t < window.0 - 1e-12 || *t > window.1 + 1e-12 {
            continue;
        }
        if !(v.abs() > 0.0) {
            return Err(Error::UndefinedRate(format!("vanishing diagnostic at tau = {t}")));
        }
        pts.push((*t, v.abs().ln()));
    }
    if pts.len() < 2 {
        return Err(Error::UndefinedRate("fewer than two samples in the window".into()));
    }
    Ok(linear_fit(&pts).0)
}
