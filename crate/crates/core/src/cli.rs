//! Command-line front end: argument parsing, TOML configuration and output files.
//!
//! Every subcommand flag can also be set in the `--config` file, either at the
//! top level (global flags) or in a table named after the subcommand. Flags on
//! the command line take precedence.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dalembert::{lq_series, tau_grid, FreeData};
use crate::error::{Error, Result};
use crate::evolve::{growth_rate, EvolveConfig, EvolveMode, Evolver, RateDiagnostic};
use crate::hyp::{scan_grid, w0_closed, zero_scan, ScanStrip};
use crate::lab::{
    ensemble, linear_bound_experiment, random_state, stability_experiment, BoundKind, LinearFlow, RandomDataSpec,
    StabilityConfig,
};
use crate::oscint::{KernelConfig, KernelTable};
use crate::output::{fmt_f64, CsvTable, Summary};
use crate::resolvent::{apply_resolvent, FundamentalPair, PotentialSpec, ResolventRHS, SpectralPoint};
use crate::simcoords::{gauge_solution, CoordinateFrame, State};
use crate::spaces::{h_norm, strichartz_from_series, StrichartzExponents};
use crate::specgrid::Grid;
use crate::waveop::{assemble, eigenpairs, projection, Mode, SpuriousFilter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "critwave", version, about = "Stability of ODE blowup for the radial quintic wave equation")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues of the discrete generator and the gauge projection.
    Spectrum(SpectrumArgs),
    /// Fundamental pair, Green function and resolvent at one λ.
    Resolvent(ResolventArgs),
    /// Time evolution of the perturbation system.
    Evolve(EvolveArgs),
    /// Free flow from the closed-form window integrals.
    Dalembert(DalembertArgs),
    /// Strichartz or energy bounds over a random ensemble.
    Strichartz(StrichartzArgs),
    /// Perturbation kernel samples against the decay envelope.
    Kernel(KernelArgs),
    /// Nonlinear stability sweep with blowup-time shooting.
    Stability(StabilityArgs),
    /// |w₀| on a lattice of the spectral strip.
    #[command(name = "scan-w0")]
    ScanW0(ScanArgs),
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// `full` or `free`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResolventArgs {
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub im: Option<f64>,
    /// `linearized`, `zero` or `const:<V>`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Source point of the Green function samples.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    /// Right-hand side: `gauge:<T'>`, `random:<seed>`, `file:<path>` or `zero`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveArgs {
    /// `free`, `linearized` or `nonlinear`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_max: Option<f64>,
    /// Initial data: `gauge:<T'>`, `random:<seed>`, `file:<path>` or `zero`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<String>,
    /// `‖·‖_ℋ` of random data.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_every: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub filter: Option<bool>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reproject: Option<bool>,
    /// Also write every recorded state.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dump_states: Option<bool>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DalembertArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_tau: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrichartzArgs {
    /// `projected` or `free`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flow: Option<String>,
    /// `strichartz` or `energy`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub members: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelArgs {
    /// Sample points for both ρ and s.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub taus: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub panel_width: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityArgs {
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub members: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub safety: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_t: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_tol: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_min: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_step: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_step: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
struct Globals {
    out: Option<PathBuf>,
    seed: Option<u64>,
    threads: Option<usize>,
    format: Option<Format>,
}

/// Settings shared by every subcommand after merging file and flags.
#[derive(Debug, Clone)]
pub struct Context {
    pub out: PathBuf,
    pub seed: u64,
    pub format: Format,
}

fn config_err(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

fn read_config(path: Option<&Path>) -> Result<Value> {
    let Some(path) = path else { return Ok(json!({})) };
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    let table: toml::Table = toml::from_str(&text).map_err(config_err)?;
    serde_json::to_value(table).map_err(config_err)
}

/// Overlays the flags set on the command line onto a table of the config file.
fn merge<T: Serialize + DeserializeOwned>(file: Option<&Value>, flags: &T) -> Result<T> {
    let mut base = file.cloned().unwrap_or_else(|| json!({}));
    if !base.is_object() {
        return Err(config_err("configuration section must be a table"));
    }
    if let (Some(b), Value::Object(f)) = (base.as_object_mut(), serde_json::to_value(flags).map_err(config_err)?) {
        b.extend(f);
    }
    serde_json::from_value(base).map_err(config_err)
}

/// Data specification `gauge:<T'>`, `random:<seed>`, `file:<path>` or `zero`.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSpec {
    Zero,
    Gauge(f64),
    Random(u64),
    File(PathBuf),
}

impl std::str::FromStr for DataSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
        let num = |a: &str| a.parse::<f64>().map_err(|_| config_err(format!("bad data spec {s:?}")));
        match kind {
            "zero" => Ok(Self::Zero),
            "gauge" => Ok(Self::Gauge(num(arg)?)),
            "random" => arg.parse().map(Self::Random).map_err(|_| config_err(format!("bad data spec {s:?}"))),
            "file" if !arg.is_empty() => Ok(Self::File(arg.into())),
            _ => Err(config_err(format!("unknown data spec {s:?}"))),
        }
    }
}

impl DataSpec {
    /// Node state on `grid`; random data is scaled to `‖·‖_ℋ = amplitude`.
    pub fn state(&self, grid: &Grid, amplitude: f64) -> Result<State> {
        match self {
            Self::Zero => Ok(State::zeros(grid.len())),
            Self::Gauge(tp) => gauge_solution(*tp, &CoordinateFrame::new(1.0)?, 0.0, grid.len()),
            Self::Random(seed) => {
                Ok(random_state(&RandomDataSpec { seed: *seed, target: amplitude, ..RandomDataSpec::default() }, grid))
            }
            Self::File(path) => read_state(path, grid),
        }
    }
}

/// Reads a CSV with header `phi1,phi2` and one row per node.
pub fn read_state(path: &Path, grid: &Grid) -> Result<State> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').map(str::trim).collect();
    let i1 = header.iter().position(|h| *h == "phi1");
    let i2 = header.iter().position(|h| *h == "phi2");
    let (Some(i1), Some(i2)) = (i1, i2) else {
        return Err(config_err(format!("{}: header must name phi1 and phi2", path.display())));
    };
    let (mut p1, mut p2) = (Vec::new(), Vec::new());
    for l in lines {
        let f: Vec<&str> = l.split(',').map(str::trim).collect();
        let get = |i: usize| -> Result<f64> {
            f.get(i).and_then(|v| v.parse().ok()).ok_or_else(|| config_err(format!("bad row {l:?}")))
        };
        p1.push(get(i1)?);
        p2.push(get(i2)?);
    }
    if p1.len() != grid.len() {
        return Err(config_err(format!("{} rows for a grid of {} nodes", p1.len(), grid.len())));
    }
    State::new(p1, p2)
}

fn emit(ctx: &Context, name: &str, table: &CsvTable, mut summary: Summary) -> Result<()> {
    std::fs::create_dir_all(&ctx.out)?;
    match ctx.format {
        Format::Csv => table.write(&ctx.out.join(format!("{name}.csv")))?,
        Format::Json => summary.rows = Some(table.to_json()),
    }
    summary.write(&ctx.out.join(format!("{name}.json")))
}

fn grid_of(n: usize) -> Result<Grid> {
    Grid::new(n).map_err(config_err)
}

fn spectrum(ctx: &Context, a: SpectrumArgs) -> Result<()> {
    let n = a.n.unwrap_or(32);
    let mode_s = a.mode.unwrap_or_else(|| "full".into());
    let mode = match mode_s.as_str() {
        "full" => Mode::Full,
        "free" => Mode::Free,
        m => return Err(config_err(format!("unknown mode {m:?}"))),
    };
    let grid = grid_of(n)?;
    let op = assemble(&grid, mode);
    let pairs = eigenpairs(&op)?;
    let filter = SpuriousFilter::new(&grid, mode)?;
    let mut table = CsvTable::new(&["re", "im", "accepted"]);
    let mut accepted = 0;
    let mut max_re = f64::NEG_INFINITY;
    for p in &pairs {
        let ok = filter.accepts(p);
        if ok {
            accepted += 1;
            if (p.value - 1.0).norm() > 1e-6 {
                max_re = max_re.max(p.value.re);
            }
        }
        table.push(vec![fmt_f64(p.value.re), fmt_f64(p.value.im), ok.to_string()])?;
    }
    let mut metrics =
        json!({ "eigenvalues": pairs.len(), "accepted": accepted, "max_re_accepted_excluding_one": max_re });
    if mode == Mode::Full {
        let proj = projection(&grid, &op)?;
        metrics["projection"] = json!({
            "eigenvalue": proj.eigenvalue,
            "gstar_residual": proj.gstar_residual,
            "amplitude_of_g": proj.amplitude(&State::constant(grid.len(), 2.0, 3.0)),
        });
    }
    emit(ctx, "spectrum", &table, Summary::new("spectrum", json!({ "n": n, "mode": mode_s }), metrics))
}

fn resolvent(ctx: &Context, a: ResolventArgs) -> Result<()> {
    let (re, im) = (a.re.unwrap_or(0.1), a.im.unwrap_or(5.0));
    let pot_s = a.potential.unwrap_or_else(|| "linearized".into());
    let pot: PotentialSpec = pot_s.parse().map_err(config_err)?;
    let n = a.n.unwrap_or(24);
    let s = a.s.unwrap_or(0.5);
    let rhs_s = a.rhs.unwrap_or_else(|| format!("random:{}", ctx.seed));
    let grid = grid_of(n)?;
    let data = rhs_s.parse::<DataSpec>()?.state(&grid, 1.0)?;
    let point = SpectralPoint::new(re, im);
    point.check_strip()?;
    let pair = FundamentalPair::new(point, &pot, &grid)?;
    let out = apply_resolvent(&grid, &pair, &ResolventRHS::from_state(&grid, &data))?;
    let mut table = CsvTable::new(&[
        "rho", "u0_re", "u0_im", "u1_re", "u1_im", "green_re", "green_im", "phi1_re", "phi1_im", "phi2_re", "phi2_im",
    ]);
    for (j, &r) in grid.nodes().iter().enumerate() {
        let (u0, u1, g) = if r > 0.0 && r < 1.0 {
            let v = pair.eval(r)?;
            (v[0], v[2], pair.green(r, s)?)
        } else {
            let nan = Complex64::new(f64::NAN, f64::NAN);
            (nan, nan, nan)
        };
        table.push_f64(&[
            r,
            u0.re,
            u0.im,
            u1.re,
            u1.im,
            g.re,
            g.im,
            out.phi1[j].re,
            out.phi1[j].im,
            out.phi2[j].re,
            out.phi2[j].im,
        ])?;
    }
    let op_mode = match pot {
        PotentialSpec::Zero => Some(Mode::Free),
        PotentialSpec::Linearized => Some(Mode::Full),
        _ => None,
    };
    let residual = op_mode.map(|mode| {
        let lop = assemble(&grid, mode);
        let u = out.stacked();
        let lu = lop.apply_complex(&u);
        let f = data.stacked();
        let r: Vec<Complex64> = u.iter().zip(&lu).zip(&f).map(|((u, lu), f)| point.lambda * u - lu - f).collect();
        let m = grid.len();
        let res = crate::resolvent::ComplexState { phi1: r[..m].to_vec(), phi2: r[m..].to_vec() };
        res.h_norm(&grid) / h_norm(&grid, &data).max(f64::MIN_POSITIVE)
    });
    let closed = if pot == PotentialSpec::Linearized { w0_closed(point.lambda).ok() } else { None };
    let metrics = json!({
        "w0": [pair.w0.re, pair.w0.im],
        "w0_closed": closed.map(|c| vec![c.re, c.im]),
        "wronskian_spread": pair.spread,
        "identity_residual": residual,
    });
    let cfg = json!({ "re": re, "im": im, "potential": pot_s, "n": n, "s": s, "rhs": rhs_s });
    emit(ctx, "resolvent", &table, Summary::new("resolvent", cfg, metrics))
}

fn evolve(ctx: &Context, a: EvolveArgs) -> Result<()> {
    let mode_s = a.mode.unwrap_or_else(|| "nonlinear".into());
    let mode: EvolveMode = mode_s.parse().map_err(config_err)?;
    let n = a.n.unwrap_or(16);
    let tau_max = a.tau_max.unwrap_or(5.0);
    let data_s = a.data.unwrap_or_else(|| "gauge:1.02".into());
    let amplitude = a.amplitude.unwrap_or(1e-3);
    let cfg = EvolveConfig {
        dt: a.dt,
        record_every: a.record_every.unwrap_or(0.05),
        filter: a.filter.unwrap_or(false),
        reproject: a.reproject.unwrap_or(false),
        ..EvolveConfig::new(mode, tau_max)
    };
    cfg.validate().map_err(config_err)?;
    let grid = grid_of(n)?;
    let spec: DataSpec = data_s.parse()?;
    let initial = spec.state(&grid, amplitude)?;
    let ev = Evolver::new(&grid, cfg)?;
    let traj = ev.run(&initial)?;
    let mut table = CsvTable::new(&["tau", "h_norm", "sup_phi1", "a_tau"]);
    for i in 0..traj.len() {
        table.push_f64(&[traj.taus[i], traj.h_norms[i], traj.sup_phi1[i], traj.amplitudes[i]])?;
    }
    let mut metrics = json!({
        "dt": ev.dt(),
        "records": traj.len(),
        "escaped": traj.escaped,
        "final_h_norm": traj.h_norms.last(),
        "energy_rate_last_half": growth_rate(&traj, (0.5 * tau_max, tau_max), RateDiagnostic::Energy).ok(),
    });
    if let (DataSpec::Gauge(tp), EvolveMode::Nonlinear) = (&spec, mode) {
        let frame = CoordinateFrame::new(1.0)?;
        let mut err = 0.0_f64;
        for (t, s) in traj.taus.iter().zip(&traj.states) {
            err = err.max(s.max_abs_diff(&gauge_solution(*tp, &frame, *t, grid.len())?));
        }
        metrics["gauge_max_error"] = json!(err);
    }
    if a.dump_states.unwrap_or(false) {
        let mut st = CsvTable::new(&["tau", "rho", "phi1", "phi2"]);
        for (t, s) in traj.taus.iter().zip(&traj.states) {
            for (j, r) in grid.nodes().iter().enumerate() {
                st.push_f64(&[*t, *r, s.phi1[j], s.phi2[j]])?;
            }
        }
        std::fs::create_dir_all(&ctx.out)?;
        st.write(&ctx.out.join("evolve_states.csv"))?;
    }
    let echo = json!({
        "mode": mode_s, "n": n, "dt": ev.dt(), "tau_max": tau_max, "data": data_s, "amplitude": amplitude,
        "record_every": cfg.record_every, "filter": cfg.filter, "reproject": cfg.reproject,
    });
    emit(ctx, "evolve", &table, Summary::new("evolve", echo, metrics))
}

fn exponents(p: Option<f64>, q: Option<f64>) -> Result<StrichartzExponents> {
    StrichartzExponents::new(p.unwrap_or(2.0), q.unwrap_or(f64::INFINITY)).map_err(config_err)
}

fn dalembert(ctx: &Context, a: DalembertArgs) -> Result<()> {
    let n = a.n.unwrap_or(32);
    let exps = exponents(a.p, a.q)?;
    let tau_max = a.tau_max.unwrap_or(20.0);
    let n_tau = a.n_tau.unwrap_or(400);
    let data_s = a.data.unwrap_or_else(|| format!("random:{}", ctx.seed));
    let grid = grid_of(n)?;
    let state = data_s.parse::<DataSpec>()?.state(&grid, 1.0)?;
    let taus = tau_grid(tau_max, n_tau);
    let series = lq_series(&FreeData::from_state(&grid, &state), &grid, exps.q, &taus)?;
    let mut table = CsvTable::new(&["tau", "lq_norm"]);
    for (t, v) in taus.iter().zip(&series) {
        table.push_f64(&[*t, *v])?;
    }
    let st = strichartz_from_series(&taus, &series, exps.p)?;
    let hn = h_norm(&grid, &state);
    let metrics = json!({ "strichartz": st.value, "tail": st.tail, "h_norm": hn, "ratio": if hn > 0.0 { st.value / hn } else { 0.0 } });
    let echo = json!({ "n": n, "p": exps.p, "q": fmt_f64(exps.q), "tau_max": tau_max, "n_tau": n_tau, "data": data_s });
    emit(ctx, "dalembert", &table, Summary::new("dalembert", echo, metrics))
}

fn strichartz(ctx: &Context, a: StrichartzArgs) -> Result<()> {
    let flow_s = a.flow.unwrap_or_else(|| "projected".into());
    let flow: LinearFlow = flow_s.parse().map_err(config_err)?;
    let kind_s = a.kind.unwrap_or_else(|| "strichartz".into());
    let exps = exponents(a.p, a.q)?;
    let kind = match kind_s.as_str() {
        "strichartz" => BoundKind::Strichartz(exps),
        "energy" => BoundKind::Energy,
        k => return Err(config_err(format!("unknown kind {k:?}"))),
    };
    let members = a.members.unwrap_or(100);
    let n = a.n.unwrap_or(32);
    let tau_max = a.tau_max.unwrap_or(20.0);
    let decay = a.decay.unwrap_or(3.0);
    let grid = grid_of(n)?;
    let ens = ensemble(&RandomDataSpec { seed: ctx.seed, decay, ..RandomDataSpec::default() }, &grid, members);
    let report = linear_bound_experiment(&grid, kind, flow, &ens, tau_max)?;
    let mut table = CsvTable::new(&["member", "data_norm", "ratio", "slope", "skipped"]);
    for r in &report.records {
        table.push(vec![
            r.member.to_string(),
            fmt_f64(r.data_norm),
            fmt_f64(r.ratio),
            fmt_f64(r.slope),
            r.skipped.to_string(),
        ])?;
    }
    let metrics = json!({ "max_ratio": report.max_ratio, "max_slope": report.max_slope });
    let echo = json!({
        "flow": flow_s, "kind": kind_s, "p": exps.p, "q": fmt_f64(exps.q), "members": members, "n": n,
        "tau_max": tau_max, "decay": decay, "seed": ctx.seed,
    });
    emit(ctx, "strichartz", &table, Summary::new("strichartz", echo, metrics))
}

fn kernel(ctx: &Context, a: KernelArgs) -> Result<()> {
    let points = a.points.unwrap_or_else(|| (1..10).map(|i| i as f64 / 10.0).collect());
    let taus = a.taus.unwrap_or_else(|| vec![0.0, 1.0, 2.0, 4.0, 8.0]);
    let pot_s = a.potential.unwrap_or_else(|| "linearized".into());
    let cfg = KernelConfig {
        potential: pot_s.parse().map_err(config_err)?,
        omega_max: a.omega_max.unwrap_or(200.0),
        panel_width: a.panel_width.unwrap_or(0.5),
        ..KernelConfig::default()
    };
    if points.iter().any(|p| !(0.05..=0.95).contains(p)) || taus.iter().any(|t| !(0.0..=15.0).contains(t)) {
        return Err(config_err("points must lie in [0.05, 0.95] and taus in [0, 15]"));
    }
    let omega_max = cfg.omega_max;
    let table_k = KernelTable::build(&points, cfg.clone())?;
    let mut table = CsvTable::new(&["rho", "s", "tau", "omega_max", "k", "error_bar", "envelope", "ratio"]);
    let (mut max_ratio, mut max_err, mut arg) = (0.0_f64, 0.0_f64, [0.0; 3]);
    for &r in &table_k.points {
        for &s in &table_k.points {
            for &t in &taus {
                let k = table_k.sample(r, s, t, omega_max)?;
                if k.ratio > max_ratio {
                    max_ratio = k.ratio;
                    arg = [r, s, t];
                }
                max_err = max_err.max(k.error_bar);
                table.push_f64(&[k.rho, k.s, k.tau, k.omega_max, k.k, k.error_bar, k.envelope, k.ratio])?;
            }
        }
    }
    let metrics = json!({ "max_ratio": max_ratio, "argmax": arg, "max_error_bar": max_err });
    let echo = json!({ "points": points, "taus": taus, "omega_max": omega_max, "potential": pot_s, "panel_width": cfg.panel_width });
    emit(ctx, "kernel", &table, Summary::new("kernel", echo, metrics))
}

fn stability(ctx: &Context, a: StabilityArgs) -> Result<()> {
    let d = StabilityConfig::default();
    let cfg = StabilityConfig {
        deltas: a.deltas.unwrap_or(d.deltas),
        members: a.members.unwrap_or(d.members),
        order: a.n.unwrap_or(d.order),
        tau_max: a.tau_max.unwrap_or(d.tau_max),
        safety: a.safety.unwrap_or(d.safety),
        delta_t: a.delta_t.unwrap_or(d.delta_t),
        t_tol: a.t_tol.unwrap_or(d.t_tol),
        threshold: a.threshold.unwrap_or(d.threshold),
        decay: a.decay.unwrap_or(d.decay),
        seed: ctx.seed,
        ..d
    };
    cfg.validate()?;
    let report = stability_experiment(&cfg)?;
    let mut table = CsvTable::new(&["delta", "member", "t_star", "bracket_width", "shots", "s_value"]);
    for r in &report.records {
        table.push(vec![
            fmt_f64(r.delta),
            r.member.to_string(),
            fmt_f64(r.t_star),
            fmt_f64(r.bracket_width),
            r.shots.to_string(),
            fmt_f64(r.s_value),
        ])?;
    }
    let metrics =
        json!({ "slope": report.slope, "max_ratio": report.max_ratio, "c_fit": report.c_fit, "max_s": report.max_s });
    let echo = serde_json::to_value(&cfg).map_err(config_err)?;
    emit(ctx, "stability", &table, Summary::new("stability", echo, metrics))
}

fn scan_w0(ctx: &Context, a: ScanArgs) -> Result<()> {
    let strip = ScanStrip {
        eps: (a.eps_min.unwrap_or(0.01), a.eps_max.unwrap_or(1.0 / 3.0)),
        omega: (-a.omega_max.unwrap_or(50.0), a.omega_max.unwrap_or(50.0)),
        eps_step: a.eps_step.unwrap_or(0.01),
        omega_step: a.omega_step.unwrap_or(0.05),
    };
    let samples = scan_grid(&strip).map_err(config_err)?;
    let report = zero_scan(&strip)?;
    let mut table = CsvTable::new(&["eps", "omega", "abs_w0"]);
    for s in &samples {
        table.push_f64(&[s.eps, s.omega, s.abs_w0])?;
    }
    let metrics = serde_json::to_value(report).map_err(config_err)?;
    let echo = serde_json::to_value(strip).map_err(config_err)?;
    emit(ctx, "scan-w0", &table, Summary::new("scan-w0", echo, metrics))
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    let file = read_config(cli.config.as_deref())?;
    let g_flags = Globals { out: cli.out.clone(), seed: cli.seed, threads: cli.threads, format: cli.format };
    let mut top = file.as_object().cloned().unwrap_or_default();
    let sections = ["spectrum", "resolvent", "evolve", "dalembert", "strichartz", "kernel", "stability", "scan-w0"];
    let tables: serde_json::Map<String, Value> =
        sections.iter().filter_map(|s| top.remove(*s).map(|v| (s.to_string(), v))).collect();
    let globals: Globals = merge(Some(&Value::Object(top)), &g_flags)?;
    if let Some(t) = globals.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(config_err)?;
    }
    let ctx = Context {
        out: globals.out.unwrap_or_else(|| PathBuf::from("out")),
        seed: globals.seed.unwrap_or(0),
        format: globals.format.unwrap_or(Format::Csv),
    };
    match cli.command {
        Command::Spectrum(a) => spectrum(&ctx, merge(tables.get("spectrum"), &a)?),
        Command::Resolvent(a) => resolvent(&ctx, merge(tables.get("resolvent"), &a)?),
        Command::Evolve(a) => evolve(&ctx, merge(tables.get("evolve"), &a)?),
        Command::Dalembert(a) => dalembert(&ctx, merge(tables.get("dalembert"), &a)?),
        Command::Strichartz(a) => strichartz(&ctx, merge(tables.get("strichartz"), &a)?),
        Command::Kernel(a) => kernel(&ctx, merge(tables.get("kernel"), &a)?),
        Command::Stability(a) => stability(&ctx, merge(tables.get("stability"), &a)?),
        Command::ScanW0(a) => scan_w0(&ctx, merge(tables.get("scan-w0"), &a)?),
    }
}

/// Parses `args`, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
