//! Discrete generators of the similarity-coordinate system and their spectra.
//!
//! The stacked vector is `(φ₁(ρ_0..ρ_N), φ₂(ρ_0..ρ_N))`. Regularity at the
//! centre is imposed by eliminating `φ₁(0)` through `φ₁′(0) = 0`: the operator
//! is `Π·A·Π`, where `A` is plain collocation (with `(2/ρ)∂_ρ → 2∂²_ρ` at
//! `ρ = 0`) and `Π` overwrites the first entry with the value that makes the
//! interpolant flat at the origin. `Π` fixes every even-regular vector, in
//! particular the gauge mode, and maps the node-0 unit vector to zero, which
//! produces one artifact eigenvalue `0`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simcoords::State;
use crate::specgrid::Grid;

/// Coefficient of the linearized potential term.
pub const POTENTIAL: f64 = 15.0 / 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `L̃₀` only.
    Free,
    /// `L̃₀ + L′`.
    Full,
}

/// Square `2(N+1)` generator matrix.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    mode: Mode,
    order: usize,
    matrix: DMatrix<f64>,
}

/// Replaces `φ₁(0)` (entry 0 of `phi1`) with the value making the interpolant
/// satisfy `φ₁′(0) = 0`.
pub fn enforce_regularity(grid: &Grid, phi1: &mut [f64]) {
    let m = grid.len();
    let d0 = &grid.diff_table()[..m];
    let s: f64 = d0[1..].iter().zip(&phi1[1..]).map(|(d, v)| d * v).sum();
    phi1[0] = -s / d0[0];
}

/// Matrix of [`enforce_regularity`] on stacked vectors.
pub fn regularity_matrix(grid: &Grid) -> DMatrix<f64> {
    let m = grid.len();
    let mut p = DMatrix::identity(2 * m, 2 * m);
    let d0 = &grid.diff_table()[..m];
    p[(0, 0)] = 0.0;
    for j in 1..m {
        p[(0, j)] = -d0[j] / d0[0];
    }
    p
}

/// Collocation of the linear part at the nodes, before regularity elimination.
fn raw_collocation(grid: &Grid, mode: Mode) -> DMatrix<f64> {
    let m = grid.len();
    let d = grid.diff_table();
    let d2 = grid.diff2_table();
    let rho = grid.nodes();
    let mut a = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        for j in 0..m {
            a[(i, j)] = -rho[i] * d[i * m + j];
            let lap = if i == 0 { 3.0 * d2[j] } else { d2[i * m + j] + 2.0 / rho[i] * d[i * m + j] };
            a[(m + i, j)] = lap;
            a[(m + i, m + j)] = -rho[i] * d[i * m + j];
        }
        a[(i, i)] -= 0.5;
        a[(i, m + i)] += 1.0;
        a[(m + i, m + i)] -= 1.5;
        if mode == Mode::Full {
            a[(m + i, i)] += POTENTIAL;
        }
    }
    a
}

/// Assembles the discrete generator on `grid`.
pub fn assemble(grid: &Grid, mode: Mode) -> OperatorMatrix {
    let p = regularity_matrix(grid);
    let matrix = &p * raw_collocation(grid, mode) * &p;
    OperatorMatrix { mode, order: grid.order(), matrix }
}

impl OperatorMatrix {
    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, state: &State) -> State {
        let v = DVector::from_vec(state.stacked());
        State::from_stacked((&self.matrix * v).as_slice())
    }

    pub fn apply_complex(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| v[j] * self.matrix[(i, j)]).sum()).collect()
    }
}

/// One eigenvalue with a unit (Euclidean) eigenvector.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: Complex64,
    pub vector: Vec<Complex64>,
}

/// Full eigendecomposition, sorted by descending real part.
///
/// Eigenvalues come from a real Schur form; eigenvectors from two steps of
/// shifted inverse iteration.
pub fn eigenpairs(op: &OperatorMatrix) -> Result<Vec<EigenPair>> {
    let values = eigenvalues(op)?;
    let n = op.dim();
    let mc: DMatrix<Complex64> = op.matrix.map(|x| Complex64::new(x, 0.0));
    let mut out = Vec::with_capacity(n);
    for value in values {
        let shift = value + Complex64::new(1e-10 * (1.0 + value.norm()), 0.0);
        let lu = (&mc - DMatrix::identity(n, n) * shift).lu();
        let mut v = DVector::from_element(n, Complex64::new(1.0, 0.0));
        for _ in 0..3 {
            v = lu
                .solve(&v)
                .ok_or_else(|| Error::NumericalFailure(format!("inverse iteration singular at {value}")))?;
            let nv = v.norm();
            if !nv.is_finite() || nv == 0.0 {
                return Err(Error::NumericalFailure(format!("inverse iteration diverged at {value}")));
            }
            v /= Complex64::new(nv, 0.0);
        }
        out.push(EigenPair { value, vector: v.as_slice().to_vec() });
    }
    Ok(out)
}

/// Eigenvalues only, sorted by descending real part.
pub fn eigenvalues(op: &OperatorMatrix) -> Result<Vec<Complex64>> {
    let schur = nalgebra::Schur::try_new(op.matrix.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| Error::NumericalFailure("Schur iteration did not converge".into()))?;
    let mut values: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NumericalFailure("non-finite eigenvalue".into()));
    }
    values.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    Ok(values)
}

/// Gram matrix of the discrete `ℋ` inner product,
/// `blockdiag(Wρ² + DᵀWρ²D, Wρ²)`.
pub fn h_gram(grid: &Grid) -> DMatrix<f64> {
    let m = grid.len();
    let w: Vec<f64> = grid.weights().iter().zip(grid.nodes()).map(|(w, r)| w * r * r).collect();
    let d = grid.diff_matrix();
    let wd = DMatrix::from_fn(m, m, |i, j| w[i] * d[(i, j)]);
    let k = d.transpose() * wd;
    let mut h = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        for j in 0..m {
            h[(i, j)] = k[(i, j)];
        }
        h[(i, i)] += w[i];
        h[(m + i, m + i)] = w[i];
    }
    h
}

/// Rank-one projection `P f = ⟨f, g*⟩_ℋ g` onto the gauge mode.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Projection {
    /// Stacked constant pair `(2, 3)`.
    pub g: Vec<f64>,
    /// Left eigenvector `ℓ` with `ℓᵀ g = 1`; `P f = (ℓᵀ f) g`.
    pub left: Vec<f64>,
    /// Representer of `ℓ` in the discrete `ℋ` inner product (least-squares
    /// solution of `H g* = ℓ`).
    pub gstar: Vec<f64>,
    /// `‖H g* − ℓ‖ / ‖ℓ‖`; nonzero because `H` is singular at `φ₂(0)`.
    pub gstar_residual: f64,
    /// The eigenvalue actually located near 1.
    pub eigenvalue: f64,
}

/// Builds `P` from the full-mode operator.
pub fn projection(grid: &Grid, op: &OperatorMatrix) -> Result<Projection> {
    if op.mode != Mode::Full {
        return Err(Error::SpectralFailure("projection requires the full generator".into()));
    }
    let n = op.dim();
    let m = n / 2;
    let values = eigenvalues(op)?;
    let near = values
        .iter()
        .min_by(|a, b| (*a - 1.0).norm().total_cmp(&(*b - 1.0).norm()))
        .copied()
        .ok_or_else(|| Error::SpectralFailure("empty spectrum".into()))?;
    if (near - 1.0).norm() > 1e-6 {
        return Err(Error::SpectralFailure(format!("no eigenvalue within 1e-6 of 1 (closest {near})")));
    }
    let lam = near.re;
    let at = op.matrix.transpose() - DMatrix::identity(n, n) * (lam + 1e-12);
    let lu = at.lu();
    let mut l = DVector::from_element(n, 1.0);
    for _ in 0..3 {
        l = lu.solve(&l).ok_or_else(|| Error::SpectralFailure("adjoint inverse iteration singular".into()))?;
        let nl = l.norm();
        l /= nl;
    }
    let g: Vec<f64> = (0..n).map(|i| if i < m { 2.0 } else { 3.0 }).collect();
    let lg: f64 = l.iter().zip(&g).map(|(a, b)| a * b).sum();
    if lg.abs() < 1e-14 {
        return Err(Error::SpectralFailure("left eigenvector orthogonal to g".into()));
    }
    l /= lg;
    let h = h_gram(grid);
    let svd = h.clone().svd(true, true);
    let gs = svd.solve(&l, 1e-13 * svd.singular_values.max()).map_err(|e| Error::SpectralFailure(e.to_string()))?;
    let residual = (&h * &gs - &l).norm() / l.norm();
    Ok(Projection {
        g,
        left: l.as_slice().to_vec(),
        gstar: gs.as_slice().to_vec(),
        gstar_residual: residual,
        eigenvalue: lam,
    })
}

impl Projection {
    /// Gauge amplitude `a = ℓᵀ f`.
    pub fn amplitude(&self, state: &State) -> f64 {
        let m = state.len();
        self.left[..m].iter().zip(&state.phi1).map(|(a, b)| a * b).sum::<f64>()
            + self.left[m..].iter().zip(&state.phi2).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn apply(&self, state: &State) -> State {
        let a = self.amplitude(state);
        let m = state.len();
        State::constant(m, 2.0 * a, 3.0 * a)
    }

    /// `(I − P) f`.
    pub fn complement(&self, state: &State) -> State {
        let a = self.amplitude(state);
        let mut out = state.clone();
        out.phi1.iter_mut().for_each(|v| *v -= 2.0 * a);
        out.phi2.iter_mut().for_each(|v| *v -= 3.0 * a);
        out
    }

    /// Matrix `g ℓᵀ`.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.g.len();
        DMatrix::from_fn(n, n, |i, j| self.g[i] * self.left[j])
    }
}

/// Resolution test for eigenpairs: an eigenvalue must reappear on the grid
/// of twice the order, and the Chebyshev coefficients of its eigenvector must
/// decay.
#[derive(Debug, Clone)]
pub struct SpuriousFilter {
    grid: Grid,
    refined: Vec<Complex64>,
    /// Maximum admissible eigenvalue displacement under refinement.
    pub move_tol: f64,
    /// Maximum admissible ratio of tail to peak Chebyshev coefficient.
    pub tail_tol: f64,
}

impl SpuriousFilter {
    pub fn new(grid: &Grid, mode: Mode) -> Result<Self> {
        let fine = Grid::new(2 * grid.order())?;
        let refined = eigenvalues(&assemble(&fine, mode))?;
        Ok(Self::with_refined(grid.clone(), refined))
    }

    /// Uses a precomputed refined spectrum.
    pub fn with_refined(grid: Grid, refined: Vec<Complex64>) -> Self {
        Self { grid, refined, move_tol: 1e-4, tail_tol: 1e-3 }
    }

    pub fn eigenvalue_shift(&self, value: Complex64) -> f64 {
        self.refined.iter().map(|z| (z - value).norm()).fold(f64::INFINITY, f64::min)
    }

    /// Largest coefficient among the top third of the Chebyshev spectrum of
    /// either component, relative to the largest coefficient overall.
    pub fn coefficient_tail(&self, vector: &[Complex64]) -> f64 {
        let m = self.grid.len();
        let mut peak = 0.0_f64;
        let mut tail = 0.0_f64;
        let cut = m - m / 3;
        for block in [&vector[..m], &vector[m..]] {
            for part in [block.iter().map(|z| z.re).collect::<Vec<_>>(), block.iter().map(|z| z.im).collect::<Vec<_>>()]
            {
                let c = self.grid.chebyshev_coefficients(&part);
                for (k, a) in c.iter().enumerate() {
                    peak = peak.max(a.abs());
                    if k >= cut {
                        tail = tail.max(a.abs());
                    }
                }
            }
        }
        if peak == 0.0 {
            return f64::INFINITY;
        }
        tail / peak
    }

    pub fn accepts(&self, pair: &EigenPair) -> bool {
        self.eigenvalue_shift(pair.value) < self.move_tol && self.coefficient_tail(&pair.vector) < self.tail_tol
    }
}
