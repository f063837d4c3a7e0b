//! Chebyshev–Gauss–Lobatto collocation on `[0, 1]`.
//!
//! Nodes are `ρ_j = (1 − cos(jπ/N))/2`, so `ρ_0 = 0` and `ρ_N = 1`. The grid
//! carries the first-derivative table, its square, Clenshaw–Curtis weights for
//! `∫₀¹ · dρ` and the barycentric weights used for interpolation.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Default number of uniform refinement points per order used by [`Grid::sup_norm`].
pub const SUP_REFINEMENT: usize = 4;

#[derive(Debug, Clone)]
pub struct Grid {
    order: usize,
    nodes: Vec<f64>,
    /// Row-major `(N+1) × (N+1)` first-derivative table.
    diff: Vec<f64>,
    /// Row-major second-derivative table `D·D`.
    diff2: Vec<f64>,
    weights: Vec<f64>,
    bary: Vec<f64>,
    refinement: usize,
}

impl Grid {
    /// Builds the order-`n` grid (`n + 1` nodes).
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("grid order must be at least 2, got {n}")));
        }
        let m = n + 1;
        // ρ_j = sin²(jπ/2n), with exact endpoint and centre values.
        let nodes: Vec<f64> = (0..m)
            .map(|j| match j {
                0 => 0.0,
                _ if j == n => 1.0,
                _ if 2 * j == n => 0.5,
                _ => (j as f64 * PI / (2.0 * n as f64)).sin().powi(2),
            })
            .collect();

        let c: Vec<f64> = (0..m)
            .map(|j| {
                let e = if j == 0 || j == n { 2.0 } else { 1.0 };
                if j % 2 == 0 {
                    e
                } else {
                    -e
                }
            })
            .collect();

        // d/dx on [-1,1]; then d/dρ = -2 d/dx. Off-diagonals use the
        // trigonometric form of x_i - x_j to limit cancellation.
        let mut diff = vec![0.0; m * m];
        for i in 0..m {
            let mut row_sum = 0.0;
            for j in 0..m {
                if i == j {
                    continue;
                }
                let dx = -2.0
                    * (((i + j) as f64) * PI / (2.0 * n as f64)).sin()
                    * (((i as f64) - (j as f64)) * PI / (2.0 * n as f64)).sin();
                let v = -2.0 * (c[i] / c[j]) / dx;
                diff[i * m + j] = v;
                row_sum += v;
            }
            diff[i * m + i] = -row_sum;
        }

        let mut diff2 = vec![0.0; m * m];
        for i in 0..m {
            for k in 0..m {
                let a = diff[i * m + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..m {
                    diff2[i * m + j] += a * diff[k * m + j];
                }
            }
        }

        let weights = clenshaw_curtis(n);
        let bary: Vec<f64> = (0..m)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == n {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();

        Ok(Self { order: n, nodes, diff, diff2, weights, bary, refinement: SUP_REFINEMENT })
    }

    /// Overrides the sup-norm refinement factor (points per order).
    pub fn with_refinement(mut self, factor: usize) -> Self {
        self.refinement = factor.max(1);
        self
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.order + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn barycentric_weights(&self) -> &[f64] {
        &self.bary
    }

    /// Row-major first-derivative table.
    pub fn diff_table(&self) -> &[f64] {
        &self.diff
    }

    /// Row-major second-derivative table.
    pub fn diff2_table(&self) -> &[f64] {
        &self.diff2
    }

    pub fn diff_matrix(&self) -> DMatrix<f64> {
        let m = self.len();
        DMatrix::from_row_slice(m, m, &self.diff)
    }

    fn check_len(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.len() {
            return Err(Error::InvalidArgument(format!("expected {} node samples, got {}", self.len(), values.len())));
        }
        Ok(())
    }

    pub fn differentiate(&self, values: &[f64]) -> Result<Vec<f64>> {
        self.check_len(values)?;
        let mut out = vec![0.0; self.len()];
        self.differentiate_into(values, &mut out);
        Ok(out)
    }

    /// `out = D·values` without length checks; used in hot loops.
    pub fn differentiate_into(&self, values: &[f64], out: &mut [f64]) {
        matvec(&self.diff, values, out);
    }

    pub fn differentiate2_into(&self, values: &[f64], out: &mut [f64]) {
        matvec(&self.diff2, values, out);
    }

    /// Clenshaw–Curtis approximation of `∫₀¹ f dρ` from node samples.
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        self.check_len(values)?;
        Ok(self.weights.iter().zip(values).map(|(w, v)| w * v).sum())
    }

    /// Barycentric interpolant at `x ∈ [0, 1]`.
    pub fn interpolate(&self, values: &[f64], x: f64) -> Result<f64> {
        self.check_len(values)?;
        if !(0.0..=1.0).contains(&x) || x.is_nan() {
            return Err(Error::InvalidArgument(format!("interpolation point {x} outside [0, 1]")));
        }
        Ok(self.interpolate_unchecked(values, x))
    }

    pub(crate) fn interpolate_unchecked(&self, values: &[f64], x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&xj, &wj), &fj) in self.nodes.iter().zip(&self.bary).zip(values) {
            let d = x - xj;
            if d == 0.0 {
                return fj;
            }
            let t = wj / d;
            num += t * fj;
            den += t;
        }
        num / den
    }

    /// Points where [`Grid::sup_norm`] samples the interpolant: the nodes
    /// followed by `refinement·N + 1` uniformly spaced points on `[0, 1]`.
    pub fn refinement_points(&self) -> Vec<f64> {
        let k = self.refinement * self.order;
        let mut pts = self.nodes.clone();
        pts.extend((0..=k).map(|i| i as f64 / k as f64));
        pts
    }

    /// Maximum of `|interpolant|` over the refinement set, polished by a
    /// golden-section search around the best sample.
    pub fn sup_norm(&self, values: &[f64]) -> f64 {
        let (mut best, mut arg) = (0.0_f64, 0.0);
        for (&x, v) in self.nodes.iter().zip(values) {
            if v.abs() > best {
                best = v.abs();
                arg = x;
            }
        }
        let k = self.refinement * self.order;
        let h = 1.0 / k as f64;
        for i in 0..=k {
            let x = i as f64 * h;
            let v = self.interpolate_unchecked(values, x).abs();
            if v > best {
                best = v;
                arg = x;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        let f = |x: f64| self.interpolate_unchecked(values, x).abs();
        let (mut a, mut b) = ((arg - h).max(0.0), (arg + h).min(1.0));
        let r = 0.5 * (5.0_f64.sqrt() - 1.0);
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..40 {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - r * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + r * (b - a);
                fd = f(d);
            }
        }
        best.max(fc).max(fd)
    }

    /// Chebyshev coefficients `a_k` of the interpolant, `f(ρ) = Σ a_k T_k(1 − 2ρ)`.
    pub fn chebyshev_coefficients(&self, values: &[f64]) -> Vec<f64> {
        let n = self.order;
        let nf = n as f64;
        (0..=n)
            .map(|k| {
                let mut s = 0.0;
                for (j, &v) in values.iter().enumerate() {
                    let half = if j == 0 || j == n { 0.5 } else { 1.0 };
                    s += half * v * ((k * j) as f64 * PI / nf).cos();
                }
                let scale = if k == 0 || k == n { 1.0 / nf } else { 2.0 / nf };
                s * scale
            })
            .collect()
    }

    /// Samples a closure at the nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }
}

pub(crate) fn matvec(a: &[f64], x: &[f64], out: &mut [f64]) {
    let m = x.len();
    for (i, o) in out.iter_mut().enumerate() {
        let row = &a[i * m..(i + 1) * m];
        *o = row.iter().zip(x).map(|(r, v)| r * v).sum();
    }
}

/// Clenshaw–Curtis weights on `[0, 1]` for the CGL nodes of order `n`.
fn clenshaw_curtis(n: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut w = vec![0.0; n + 1];
    let theta: Vec<f64> = (0..=n).map(|j| j as f64 * PI / nf).collect();
    if n.is_multiple_of(2) {
        w[0] = 1.0 / (nf * nf - 1.0);
        w[n] = w[0];
    } else {
        w[0] = 1.0 / (nf * nf);
        w[n] = w[0];
    }
    for j in 1..n {
        let mut v = 1.0;
        let half = n / 2;
        if n.is_multiple_of(2) {
            for k in 1..half {
                v -= 2.0 * (2.0 * k as f64 * theta[j]).cos() / (4.0 * (k * k) as f64 - 1.0);
            }
            v -= (2.0 * half as f64 * theta[j]).cos() / (4.0 * (half * half) as f64 - 1.0);
        } else {
            for k in 1..=half {
                v -= 2.0 * (2.0 * k as f64 * theta[j]).cos() / (4.0 * (k * k) as f64 - 1.0);
            }
        }
        w[j] = 2.0 * v / nf;
    }
    // [-1,1] → [0,1]
    w.iter_mut().for_each(|x| *x *= 0.5);
    w
}
