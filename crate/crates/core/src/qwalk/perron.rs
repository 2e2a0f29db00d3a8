//! Perron pair of the entrywise absolute value `abs(Ĥ)`.

use nalgebra::{DMatrix, DVector};

use crate::exec::ExecPolicy;
use crate::model::CompositeModel;
use crate::{Error, Result, C64};

/// Entries with `|h| ≤ EDGE_TOLERANCE · max|h|` are not edges of the graph.
pub const EDGE_TOLERANCE: f64 = 1e-13;

const RESIDUAL_TOLERANCE: f64 = 1e-12;
const MAX_ITERATIONS: usize = 1_000_000;

/// `abs(Ĥ)` in compressed-row form; the graph of `Ĥ` is its sparsity pattern.
#[derive(Debug, Clone)]
pub struct SparseAbs {
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseAbs {
    pub fn from_dense(h: &DMatrix<C64>) -> Self {
        let cutoff = EDGE_TOLERANCE * h.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let n = h.nrows();
        let mut row_start = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for r in 0..n {
            for c in 0..n {
                let a = h[(r, c)].norm();
                if a > cutoff {
                    cols.push(c);
                    vals.push(a);
                }
            }
            row_start.push(cols.len());
        }
        SparseAbs { row_start, cols, vals }
    }

    /// Builds `abs(Ĥ)` straight from the model blocks: O(d² + N) nonzeros.
    pub fn from_model(model: &CompositeModel) -> Self {
        let l = model.layout();
        let (d, n) = (l.d, l.n);
        let p = model.stiffness_block();
        let star = model.star();
        let bath_link: Vec<f64> = model.g_row().iter().map(|g| (g * model.inv_sqrt_mass()[star]).abs()).collect();
        let nus = model.bath().frequencies();
        let cutoff =
            EDGE_TOLERANCE * p.amax().max(bath_link.iter().copied().fold(0.0, f64::max)).max(model.bath().nu_max());
        let mut triplets: Vec<Vec<(usize, f64)>> = vec![Vec::new(); l.dim()];
        let mut push = |r: usize, c: usize, v: f64| {
            if v > cutoff {
                triplets[r].push((c, v));
                triplets[c].push((r, v));
            }
        };
        for r in 0..d {
            for c in 0..d {
                push(r, d + c, p[(r, c)].abs());
            }
        }
        for a in 0..n {
            push(d + star, 2 * d + a, bath_link[a]);
            push(2 * d + a, 2 * d + n + a, nus[a]);
        }
        let mut row_start = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for mut row in triplets {
            row.sort_by_key(|e| e.0);
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_start.push(cols.len());
        }
        SparseAbs { row_start, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.row_start.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_start[r]..self.row_start[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    /// Undirected edges `(r, c)` with `r < c`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.dim()).flat_map(|r| self.row(r).filter(move |&(c, _)| c > r).map(move |(c, _)| (r, c))).collect()
    }

    pub fn mul(&self, x: &[f64], out: &mut [f64], policy: ExecPolicy) {
        let rows = policy.map_range(self.dim(), |r| self.row(r).map(|(c, v)| v * x[c]).sum::<f64>());
        out.copy_from_slice(&rows);
    }

    /// Number of connected components of the graph.
    pub fn components(&self) -> usize {
        let n = self.dim();
        let mut seen = vec![false; n];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for (c, _) in self.row(u) {
                    if !seen[c] {
                        seen[c] = true;
                        stack.push(c);
                    }
                }
            }
        }
        count
    }
}

/// Principal eigenvalue `‖abs(Ĥ)‖` and the positive unit Perron vector.
#[derive(Debug, Clone)]
pub struct PerronPair {
    pub value: f64,
    pub vector: DVector<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Shifted power iteration on a connected `abs(Ĥ)`.
///
/// The graph of `Ĥ` is bipartite, so `−λmax` is also an eigenvalue; the
/// shift `abs(Ĥ) + s·I` with `s > 0` makes `λmax + s` strictly dominant.
pub fn perron_pair(a: &SparseAbs, policy: ExecPolicy) -> Result<PerronPair> {
    let n = a.dim();
    let components = a.components();
    if components != 1 {
        return Err(Error::DisconnectedGraph { components });
    }
    let row_sum_max = (0..n).map(|r| a.row(r).map(|(_, v)| v).sum::<f64>()).fold(0.0, f64::max);
    let shift = 0.5 * row_sum_max;
    let mut x = vec![(n as f64).sqrt().recip(); n];
    let mut ax = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for it in 1..=MAX_ITERATIONS {
        a.mul(&x, &mut ax, policy);
        let lambda = x.iter().zip(&ax).map(|(u, v)| u * v).sum::<f64>();
        residual = x.iter().zip(&ax).map(|(u, v)| (v - lambda * u).powi(2)).sum::<f64>().sqrt()
            / lambda.abs().max(f64::MIN_POSITIVE);
        if residual <= RESIDUAL_TOLERANCE {
            return Ok(PerronPair { value: lambda, vector: DVector::from_vec(x), iterations: it, residual });
        }
        let mut norm = 0.0;
        for (u, v) in x.iter_mut().zip(&ax) {
            *u = v + shift * *u;
            norm += *u * *u;
        }
        let norm = norm.sqrt();
        x.iter_mut().for_each(|u| *u /= norm);
    }
    Err(Error::NoConvergence { what: "Perron power iteration", iterations: MAX_ITERATIONS, residual })
}

/// `(‖abs(Ĥ)‖, v)` for a dense Hamiltonian.
pub fn abs_principal_eigenvector(h: &DMatrix<C64>) -> Result<(f64, DVector<f64>)> {
    let pair = perron_pair(&SparseAbs::from_dense(h), ExecPolicy::default())?;
    Ok((pair.value, pair.vector))
}
