//! Similarity coordinates `τ = −log(T − t) + log T`, `ρ = r/(T − t)`.
//!
//! In these variables the ODE blowup `u^T(t, r) = c₃(T − t)^{-1/2}` is the
//! constant pair `(c₃, ½c₃)`; a [`State`] stores the perturbation
//! `(φ₁, φ₂) = (ψ₁ − c₃, ψ₂ − ½c₃)` at the grid nodes.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specgrid::Grid;

/// The blowup constant `c₃ = (3/4)^{1/4}`.
pub fn c3() -> f64 {
    0.75_f64.powf(0.25)
}

/// Frame of the blowup time `T`; the base time is always `t₀ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoordinateFrame {
    t_blowup: f64,
}

impl CoordinateFrame {
    pub fn new(t_blowup: f64) -> Result<Self> {
        if !(t_blowup > 0.0) || !t_blowup.is_finite() {
            return Err(Error::InvalidArgument(format!("blowup time must be positive, got {t_blowup}")));
        }
        Ok(Self { t_blowup })
    }

    pub fn t(&self) -> f64 {
        self.t_blowup
    }

    /// Physical time of the similarity time `τ`.
    pub fn time_at(&self, tau: f64) -> f64 {
        self.t_blowup * (1.0 - (-tau).exp())
    }

    /// Similarity time of the physical time `t < T`.
    pub fn tau_at(&self, t: f64) -> f64 {
        -(self.t_blowup - t).ln() + self.t_blowup.ln()
    }
}

/// A perturbation in similarity variables, sampled at the nodes of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub phi1: Vec<f64>,
    pub phi2: Vec<f64>,
}

impl State {
    pub fn new(phi1: Vec<f64>, phi2: Vec<f64>) -> Result<Self> {
        if phi1.len() != phi2.len() {
            return Err(Error::InvalidArgument(format!("component lengths differ: {} vs {}", phi1.len(), phi2.len())));
        }
        Ok(Self { phi1, phi2 })
    }

    pub fn zeros(len: usize) -> Self {
        Self { phi1: vec![0.0; len], phi2: vec![0.0; len] }
    }

    pub fn constant(len: usize, a: f64, b: f64) -> Self {
        Self { phi1: vec![a; len], phi2: vec![b; len] }
    }

    pub fn from_fns(grid: &Grid, f1: impl Fn(f64) -> f64, f2: impl Fn(f64) -> f64) -> Self {
        Self { phi1: grid.sample(f1), phi2: grid.sample(f2) }
    }

    pub fn len(&self) -> usize {
        self.phi1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi1.is_empty()
    }

    /// Stacked `(φ₁, φ₂)` vector.
    pub fn stacked(&self) -> Vec<f64> {
        let mut v = self.phi1.clone();
        v.extend_from_slice(&self.phi2);
        v
    }

    pub fn from_stacked(v: &[f64]) -> Self {
        let n = v.len() / 2;
        Self { phi1: v[..n].to_vec(), phi2: v[n..].to_vec() }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { phi1: self.phi1.iter().map(|x| x * s).collect(), phi2: self.phi2.iter().map(|x| x * s).collect() }
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &State) -> Self {
        Self {
            phi1: self.phi1.iter().zip(&other.phi1).map(|(a, b)| a + s * b).collect(),
            phi2: self.phi2.iter().zip(&other.phi2).map(|(a, b)| a + s * b).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &State) -> f64 {
        self.phi1
            .iter()
            .zip(&other.phi1)
            .chain(self.phi2.iter().zip(&other.phi2))
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.phi1.iter().chain(&self.phi2).all(|v| v.is_finite())
    }
}

/// How a radial profile on `[0, R]` is evaluated.
#[derive(Clone)]
pub enum Profile {
    Closed(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    /// Samples at the nodes of `grid` mapped to `[0, R]` by `r = Rρ`.
    Sampled {
        grid: Arc<Grid>,
        values: Vec<f64>,
    },
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Closed(_) => f.write_str("Profile::Closed(..)"),
            Profile::Sampled { grid, .. } => write!(f, "Profile::Sampled(N = {})", grid.order()),
        }
    }
}

impl Profile {
    pub fn closed(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Profile::Closed(Arc::new(f))
    }

    pub fn constant(c: f64) -> Self {
        Profile::closed(move |_| c)
    }
}

/// Radial initial data `(f, g)` on `[0, R]`.
#[derive(Debug, Clone)]
pub struct PhysicalData {
    radius: f64,
    position: Profile,
    velocity: Profile,
}

impl PhysicalData {
    pub fn new(radius: f64, position: Profile, velocity: Profile) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
        }
        for p in [&position, &velocity] {
            if let Profile::Sampled { grid, values } = p {
                if values.len() != grid.len() || values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidArgument("sampled profile must hold N+1 finite values".into()));
                }
            }
        }
        Ok(Self { radius, position, velocity })
    }

    /// Data of the ODE blowup `u^{T'}` at `t = 0`.
    pub fn ode_blowup(t_prime: f64, radius: f64) -> Result<Self> {
        let c = c3();
        Self::new(radius, Profile::constant(c * t_prime.powf(-0.5)), Profile::constant(0.5 * c * t_prime.powf(-1.5)))
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn eval(&self, p: &Profile, r: f64) -> f64 {
        match p {
            Profile::Closed(f) => f(r),
            Profile::Sampled { grid, values } => grid.interpolate_unchecked(values, (r / self.radius).clamp(0.0, 1.0)),
        }
    }

    pub fn f(&self, r: f64) -> f64 {
        self.eval(&self.position, r)
    }

    pub fn g(&self, r: f64) -> f64 {
        self.eval(&self.velocity, r)
    }

    /// `(f, g) + (a, b)`, shifting both profiles by constants.
    pub fn shifted(&self, a: f64, b: f64) -> Self {
        let shift = |p: &Profile, c: f64| -> Profile {
            let p = p.clone();
            let radius = self.radius;
            Profile::closed(move |r| {
                c + match &p {
                    Profile::Closed(f) => f(r),
                    Profile::Sampled { grid, values } => {
                        grid.interpolate_unchecked(values, (r / radius).clamp(0.0, 1.0))
                    }
                }
            })
        };
        Self { radius: self.radius, position: shift(&self.position, a), velocity: shift(&self.velocity, b) }
    }
}

/// Maps physical data at `t = 0` to the similarity perturbation `Φ(0)`:
/// `φ₁ = T^{1/2} f(Tρ) − c₃`, `φ₂ = T^{3/2} g(Tρ) − ½c₃`.
pub fn to_similarity(data: &PhysicalData, frame: &CoordinateFrame, grid: &Grid) -> Result<State> {
    let t = frame.t();
    if data.radius() < t {
        return Err(Error::DomainTooSmall { radius: data.radius(), t });
    }
    let c = c3();
    let (s1, s2) = (t.sqrt(), t.powf(1.5));
    Ok(State { phi1: grid.sample(|r| s1 * data.f(t * r) - c), phi2: grid.sample(|r| s2 * data.g(t * r) - 0.5 * c) })
}

/// The ODE blowup `u^{T'}` seen in the frame `T`, as a perturbation of `(c₃, ½c₃)`.
pub fn gauge_solution(t_prime: f64, frame: &CoordinateFrame, tau: f64, len: usize) -> Result<State> {
    let (a, b) = gauge_values(t_prime, frame.t(), tau)?;
    Ok(State::constant(len, a, b))
}

/// ρ-independent values `(ψ₁ − c₃, ψ₂ − ½c₃)` of the gauge family.
pub fn gauge_values(t_prime: f64, t: f64, tau: f64) -> Result<(f64, f64)> {
    let e = (-tau).exp();
    let base = t_prime - t + t * e;
    if !(base > 0.0) {
        return Err(Error::GaugeSingular(base));
    }
    let c = c3();
    let ratio = t * e / base;
    let psi1 = c * ratio.sqrt();
    let psi2 = 0.5 * c * ratio.powf(1.5);
    Ok((psi1 - c, psi2 - 0.5 * c))
}

/// Physical slice reconstructed from a similarity state.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalSlice {
    pub t: f64,
    pub radii: Vec<f64>,
    pub u: Vec<f64>,
}

/// `u(t, (T − t)ρ_j) = (T − t)^{-1/2}(φ₁(ρ_j) + c₃)` at `t = T(1 − e^{−τ})`.
pub fn from_similarity(state: &State, frame: &CoordinateFrame, tau: f64, grid: &Grid) -> Result<PhysicalSlice> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidArgument(format!("tau must be >= 0, got {tau}")));
    }
    let t = frame.time_at(tau);
    let rem = frame.t() * (-tau).exp();
    let c = c3();
    Ok(PhysicalSlice {
        t,
        radii: grid.nodes().iter().map(|r| rem * r).collect(),
        u: state.phi1.iter().map(|p| (p + c) / rem.sqrt()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(16).unwrap()
    }

    #[test]
    fn blowup_constant() {
        let c = c3();
        assert!((c.powi(4) - 0.75).abs() < 1e-15);
        assert!((5.0 * c.powi(4) - 3.75).abs() < 1e-14);
    }

    #[test]
    fn exact_blowup_data_maps_to_zero() {
        let g = grid();
        let d = PhysicalData::ode_blowup(1.0, 1.0).unwrap();
        let s = to_similarity(&d, &CoordinateFrame::new(1.0).unwrap(), &g).unwrap();
        assert!(s.phi1.iter().chain(&s.phi2).all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn shifted_blowup_time() {
        let g = grid();
        let c = c3();
        let tp: f64 = 1.05;
        let d = PhysicalData::ode_blowup(tp, 1.0).unwrap();
        let s = to_similarity(&d, &CoordinateFrame::new(1.0).unwrap(), &g).unwrap();
        for (a, b) in s.phi1.iter().zip(&s.phi2) {
            assert!((a - c * (tp.powf(-0.5) - 1.0)).abs() < 1e-15);
            assert!((b - 0.5 * c * (tp.powf(-1.5) - 1.0)).abs() < 1e-15);
        }
        let d = PhysicalData::ode_blowup(1.0, 1.2).unwrap();
        let s = to_similarity(&d, &CoordinateFrame::new(1.1).unwrap(), &g).unwrap();
        assert!(s.phi1.iter().all(|a| (a - c * (1.1_f64.sqrt() - 1.0)).abs() < 1e-15));
    }

    #[test]
    fn domain_too_small() {
        let d = PhysicalData::ode_blowup(1.0, 1.0).unwrap();
        let err = to_similarity(&d, &CoordinateFrame::new(1.1).unwrap(), &grid()).unwrap_err();
        assert!(matches!(err, Error::DomainTooSmall { .. }));
    }

    #[test]
    fn gauge_family() {
        let f = CoordinateFrame::new(1.0).unwrap();
        for tau in [0.0, 0.5, 3.0, 40.0] {
            let s = gauge_solution(1.0, &f, tau, 5).unwrap();
            assert!(s.phi1.iter().chain(&s.phi2).all(|v| *v == 0.0), "tau={tau}");
        }
        let (a, _) = gauge_values(1.05, 1.0, 0.0).unwrap();
        assert!((a + c3() - c3() * 1.05_f64.powf(-0.5)).abs() < 1e-15);
        // ψ₁ decays like c₃ (T'−T)^{-1/2} e^{-τ/2}
        let tau = 30.0;
        let (a, _) = gauge_values(1.05, 1.0, tau).unwrap();
        let want = c3() * 0.05_f64.powf(-0.5) * (-0.5 * tau).exp();
        assert!(((a + c3()) / want - 1.0).abs() < 1e-9);
        assert!(matches!(gauge_values(0.9, 1.0, 5.0), Err(Error::GaugeSingular(_))));
    }

    #[test]
    fn back_to_physical() {
        let g = grid();
        let f = CoordinateFrame::new(1.0).unwrap();
        let z = State::zeros(g.len());
        let s = from_similarity(&z, &f, 0.0, &g).unwrap();
        assert!(s.u.iter().all(|u| (u - c3()).abs() < 1e-15));
        let s = from_similarity(&z, &f, 2.0_f64.ln(), &g).unwrap();
        assert!((s.t - 0.5).abs() < 1e-15);
        assert!((s.radii.last().unwrap() - 0.5).abs() < 1e-15);
        assert!(s.u.iter().all(|u| (u - c3() * 2.0_f64.sqrt()).abs() < 1e-14));
        let gs = gauge_solution(2.0, &f, 0.0, g.len()).unwrap();
        let s = from_similarity(&gs, &f, 0.0, &g).unwrap();
        assert!(s.u.iter().all(|u| (u - c3() * 0.5_f64.sqrt()).abs() < 1e-15));
    }

    #[test]
    fn round_trip_sampled_data() {
        let g = grid();
        let data_grid = Arc::new(Grid::new(24).unwrap());
        let radius = 1.3;
        let f = |r: f64| c3() + 0.01 * (-r * r).exp();
        let v = |r: f64| 0.5 * c3() + 0.02 * (1.0 + r * r).recip();
        let pd = PhysicalData::new(
            radius,
            Profile::Sampled { grid: data_grid.clone(), values: data_grid.sample(|x| f(radius * x)) },
            Profile::Sampled { grid: data_grid.clone(), values: data_grid.sample(|x| v(radius * x)) },
        )
        .unwrap();
        let frame = CoordinateFrame::new(1.2).unwrap();
        let s = to_similarity(&pd, &frame, &g).unwrap();
        let back = from_similarity(&s, &frame, 0.0, &g).unwrap();
        for (r, u) in back.radii.iter().zip(&back.u) {
            assert!((u - f(*r)).abs() < 1e-10);
        }
    }
}
