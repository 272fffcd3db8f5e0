//! Spectra of multigraphs and covers, the universal-cover spectral radius,
//! closed walks on regular trees and the cogrowth function.
//!
//! Dense eigenproblems go through `nalgebra`'s symmetric eigensolver
//! (Householder tridiagonalisation followed by implicit QR), which is
//! deterministic.
//!
//! The new eigenvalues of a cover are computed on the space of functions
//! summing to zero on every fibre. An orthonormal basis of that space is
//! assembled from Helmert vectors on each fibre, and the operator is
//! compressed to it, so no matching against the base spectrum is involved.

use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::Serialize;

use crate::covers::{BaseGraph, CoverGraph, MultiGraph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Operator {
    Adjacency,
    Markov,
}

impl FromStr for Operator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adjacency" | "a" => Ok(Operator::Adjacency),
            "markov" | "m" => Ok(Operator::Markov),
            _ => Err(Error::invalid(format!("unknown operator {s:?}; expected adjacency or markov"))),
        }
    }
}

/// Eigenvalues of a dense symmetric matrix (row-major), descending.
pub fn symmetric_spectrum(matrix: &[f64], dim: usize) -> Result<Vec<f64>> {
    if matrix.len() != dim * dim {
        return Err(Error::SizeMismatch {
            expected: dim * dim,
            got: matrix.len(),
        });
    }
    let scale = matrix.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let mut asym = 0.0f64;
    for i in 0..dim {
        for j in 0..i {
            asym = asym.max((matrix[i * dim + j] - matrix[j * dim + i]).abs());
        }
    }
    if asym > 1e-12 * scale {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(sym_eigenvalues(DMatrix::from_row_slice(dim, dim, matrix)))
}

fn sym_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// `D^{-1/2} A D^{-1/2}` (row-major); isolated vertices give zero rows.
pub fn markov_matrix(g: &MultiGraph) -> Vec<f64> {
    let n = g.num_vertices();
    let inv_sqrt: Vec<f64> = g
        .degrees()
        .iter()
        .map(|&d| if d == 0 { 0.0 } else { 1.0 / (d as f64).sqrt() })
        .collect();
    let mut m = g.adjacency_f64();
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] *= inv_sqrt[i] * inv_sqrt[j];
        }
    }
    m
}

pub fn operator_matrix(g: &MultiGraph, op: Operator) -> Vec<f64> {
    match op {
        Operator::Adjacency => g.adjacency_f64(),
        Operator::Markov => markov_matrix(g),
    }
}

pub fn graph_spectrum(g: &MultiGraph, op: Operator) -> Vec<f64> {
    let n = g.num_vertices();
    sym_eigenvalues(DMatrix::from_row_slice(n, n, &operator_matrix(g, op)))
}

/// `max(λ2, -λn)` for a regular multigraph; `None` with a single vertex.
pub fn lambda_nontrivial(g: &MultiGraph) -> Result<Option<f64>> {
    if g.regular_degree().is_none() {
        return Err(Error::NotRegular);
    }
    let ev = graph_spectrum(g, Operator::Adjacency);
    if ev.len() < 2 {
        return Ok(None);
    }
    Ok(Some(ev[1].max(-ev[ev.len() - 1])))
}

/// Sparse symmetric operator of a cover: `(row, col, weight)` for every
/// nonzero entry, both triangles.
fn cover_entries(cover: &CoverGraph, op: Operator) -> Vec<(usize, usize, f64)> {
    let base = cover.base();
    let deg: Vec<f64> = (0..base.num_vertices()).map(|v| base.degree(v) as f64).collect();
    let n = cover.sheets();
    let mut out = Vec::new();
    for (a, b) in cover.lifted_edges() {
        let w = match op {
            Operator::Adjacency => 1.0,
            Operator::Markov => 1.0 / (deg[a / n] * deg[b / n]).sqrt(),
        };
        out.push((a, b, w));
        out.push((b, a, w));
    }
    out
}

/// The operator compressed to the fibre-sum-zero subspace, of dimension
/// `(n - 1) |V(Ω)|`.
pub fn new_operator(cover: &CoverGraph, op: Operator) -> DMatrix<f64> {
    let n = cover.sheets();
    let nv = cover.base().num_vertices();
    let per = n.saturating_sub(1);
    let dim = per * nv;
    let total = n * nv;
    let entries = cover_entries(cover, op);
    let norms: Vec<f64> = (1..n).map(|j| 1.0 / ((j * (j + 1)) as f64).sqrt()).collect();
    let mut out = DMatrix::<f64>::zeros(dim, dim);
    let mut h = vec![0.0; total];
    let mut y = vec![0.0; total];
    for col in 0..dim {
        let (v, j) = (col / per, col % per + 1);
        h.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..j {
            h[v * n + i] = norms[j - 1];
        }
        h[v * n + j] = -(j as f64) * norms[j - 1];
        y.iter_mut().for_each(|x| *x = 0.0);
        for &(r, c, w) in &entries {
            y[r] += w * h[c];
        }
        for u in 0..nv {
            let fibre = &y[u * n..(u + 1) * n];
            let mut prefix = 0.0;
            for jj in 1..n {
                prefix += fibre[jj - 1];
                out[(u * per + jj - 1, col)] = (prefix - jj as f64 * fibre[jj]) * norms[jj - 1];
            }
        }
    }
    // clean rounding asymmetry
    let t = out.transpose();
    (out + t) * 0.5
}

/// New eigenvalues of a cover, descending; empty for a one-sheeted cover.
pub fn new_eigenvalues(cover: &CoverGraph, op: Operator) -> Vec<f64> {
    sym_eigenvalues(new_operator(cover, op))
}

fn max_abs(ev: &[f64]) -> Option<f64> {
    ev.iter().map(|x| x.abs()).reduce(f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub operator: Operator,
    /// Full spectrum of the graph, descending; empty when not requested.
    pub eigenvalues: Vec<f64>,
    /// Spectrum on the fibre-sum-zero subspace, descending.
    pub new_eigenvalues: Vec<f64>,
    /// `max(λ2, -λn)` of the adjacency spectrum when the graph is regular.
    pub lambda_nontrivial: Option<f64>,
    pub lambda_a_new: Option<f64>,
    pub lambda_m_new: Option<f64>,
}

/// New adjacency and Markov eigenvalue maxima of a cover.
pub fn lambda_new(cover: &CoverGraph) -> (Option<f64>, Option<f64>) {
    (
        max_abs(&new_eigenvalues(cover, Operator::Adjacency)),
        max_abs(&new_eigenvalues(cover, Operator::Markov)),
    )
}

/// Spectral summary of a cover; `full` also diagonalises the whole operator.
pub fn new_spectrum(cover: &CoverGraph, op: Operator, full: bool) -> SpectrumReport {
    let graph = cover.multigraph();
    let eigenvalues = if full { graph_spectrum(&graph, op) } else { Vec::new() };
    let new_eigenvalues = new_eigenvalues(cover, op);
    let (lambda_a_new, lambda_m_new) = lambda_new(cover);
    let lambda_nontrivial = if graph.regular_degree().is_some() && graph.num_vertices() > 1 {
        let adj = if full && op == Operator::Adjacency {
            eigenvalues.clone()
        } else {
            graph_spectrum(&graph, Operator::Adjacency)
        };
        Some(adj[1].max(-adj[adj.len() - 1]))
    } else {
        None
    };
    SpectrumReport {
        operator: op,
        eigenvalues,
        new_eigenvalues,
        lambda_nontrivial,
        lambda_a_new,
        lambda_m_new,
    }
}

/// Spectral summary of a plain multigraph.
pub fn multigraph_spectrum(g: &MultiGraph, op: Operator) -> SpectrumReport {
    let eigenvalues = graph_spectrum(g, op);
    let lambda_nontrivial = lambda_nontrivial(g).ok().flatten();
    SpectrumReport {
        operator: op,
        eigenvalues,
        new_eigenvalues: Vec::new(),
        lambda_nontrivial,
        lambda_a_new: None,
        lambda_m_new: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhoReport {
    /// Largest Perron value of a depth-`R` ball of the universal cover over
    /// all roots; increases to the spectral radius, with error `O(1/R^2)`.
    pub estimate: f64,
    /// Closed form when the base is regular.
    pub exact: Option<f64>,
    pub depth: usize,
}

/// Whether `λ I - A` is positive definite on the depth-`depth` ball rooted
/// at `root`, by eliminating the tree from the leaves. The pivot of a vertex
/// reached through dart `e` with `r` levels below it depends only on `(e, r)`.
fn ball_pivots_positive(
    darts: &[(usize, usize, usize)],
    out: &[Vec<usize>],
    weight: &[f64],
    depth: usize,
    lambda: f64,
    roots: &[usize],
) -> bool {
    let nd = darts.len();
    let mut prev = vec![lambda; nd];
    let mut cur = vec![0.0; nd];
    for _ in 1..depth {
        for e in 0..nd {
            let (_, head, rev) = darts[e];
            let mut p = lambda;
            for &f in &out[head] {
                if f != rev {
                    p -= weight[f] * weight[f] / prev[f];
                }
            }
            if p <= 0.0 {
                return false;
            }
            cur[e] = p;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    roots.iter().all(|&root| {
        let p: f64 = lambda
            - out[root]
                .iter()
                .map(|&f| weight[f] * weight[f] / prev[f])
                .sum::<f64>();
        p > 0.0
    })
}

/// Spectral radius of the universal cover of `base`, estimated from balls of
/// the given depth, for the adjacency or Markov operator.
pub fn rho_universal_cover(base: &BaseGraph, depth: usize, op: Operator) -> Result<RhoReport> {
    if depth == 0 {
        return Err(Error::invalid("depth must be at least 1"));
    }
    let nv = base.num_vertices();
    let deg: Vec<f64> = (0..nv).map(|v| base.degree(v) as f64).collect();
    // darts: (tail, head, reverse dart)
    let mut darts = Vec::new();
    for &(u, v) in base.edges() {
        let i = darts.len();
        darts.push((u, v, i + 1));
        darts.push((v, u, i));
    }
    let mut out = vec![Vec::new(); nv];
    for (i, &(t, _, _)) in darts.iter().enumerate() {
        out[t].push(i);
    }
    let weight: Vec<f64> = darts
        .iter()
        .map(|&(t, h, _)| match op {
            Operator::Adjacency => 1.0,
            Operator::Markov => 1.0 / (deg[t] * deg[h]).sqrt(),
        })
        .collect();
    let roots: Vec<usize> = (0..nv).collect();
    let upper = match op {
        Operator::Adjacency => deg.iter().cloned().fold(0.0, f64::max),
        Operator::Markov => 1.0,
    };
    let (mut lo, mut hi) = (0.0, upper + 1e-9);
    if darts.is_empty() {
        hi = 0.0;
    }
    for _ in 0..200 {
        if hi - lo <= 1e-14 * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if ball_pivots_positive(&darts, &out, &weight, depth, mid, &roots) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let exact = base.regular_degree().map(|d| {
        let adj = if d <= 1 { d as f64 } else { 2.0 * ((d - 1) as f64).sqrt() };
        match op {
            Operator::Adjacency => adj,
            Operator::Markov if d == 0 => 0.0,
            Operator::Markov => adj / d as f64,
        }
    });
    Ok(RhoReport {
        estimate: hi,
        exact,
        depth,
    })
}

/// Closed walks of length `t` at the root of the `d`-regular tree.
pub fn tree_closed_walks(d: u64, t: usize) -> BigUint {
    if t % 2 == 1 {
        return BigUint::zero();
    }
    let half = t / 2;
    let mut dist = vec![BigUint::zero(); half + 2];
    dist[0] = BigUint::one();
    for step in 0..t {
        let reach = (step + 1).min(half + 1);
        let mut next = vec![BigUint::zero(); half + 2];
        for r in 0..reach {
            if dist[r].is_zero() {
                continue;
            }
            if r == 0 {
                next[1] += &dist[0] * d;
            } else {
                if r + 1 <= half {
                    next[r + 1] += &dist[r] * (d - 1);
                }
                next[r - 1] += &dist[r];
            }
        }
        dist = next;
    }
    dist[0].clone()
}

/// Cogrowth map `g(α)`: `2√(d-1)` for `α <= √(d-1)`, else `α + (d-1)/α`.
pub fn cogrowth_g(alpha: f64, d: u64) -> Result<f64> {
    if d < 2 || !(1.0..=(d - 1) as f64).contains(&alpha) {
        return Err(Error::invalid(format!("cogrowth g needs 1 <= alpha <= d - 1, got alpha = {alpha}, d = {d}")));
    }
    Ok(cogrowth_g_unchecked(alpha, d as f64))
}

pub(crate) fn cogrowth_g_unchecked(alpha: f64, d: f64) -> f64 {
    let s = (d - 1.0).sqrt();
    if alpha <= s {
        2.0 * s
    } else {
        alpha + (d - 1.0) / alpha
    }
}

/// Closed paths of length `t` by explicit enumeration over darts; a loop
/// contributes two darts.
pub fn count_closed_paths(g: &MultiGraph, t: usize) -> u64 {
    let n = g.num_vertices();
    let neighbours: Vec<Vec<(usize, u64)>> = (0..n)
        .map(|u| {
            (0..n)
                .filter(|&v| g.adjacency(u, v) > 0)
                .map(|v| (v, g.adjacency(u, v) as u64))
                .collect()
        })
        .collect();
    fn walk(nb: &[Vec<(usize, u64)>], at: usize, target: usize, left: usize) -> u64 {
        if left == 0 {
            return (at == target) as u64;
        }
        nb[at].iter().map(|&(v, m)| m * walk(nb, v, target, left - 1)).sum()
    }
    (0..n).map(|v| walk(&neighbours, v, v, t)).sum()
}

/// `tr(A^t)` in exact integer arithmetic.
pub fn trace_power(g: &MultiGraph, t: usize) -> BigInt {
    let n = g.num_vertices();
    let a: Vec<BigInt> = (0..n * n).map(|i| BigInt::from(g.adjacency(i / n, i % n))).collect();
    let mut p: Vec<BigInt> = (0..n * n).map(|i| BigInt::from((i / n == i % n) as u8)).collect();
    for _ in 0..t {
        let mut q = vec![BigInt::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                if p[i * n + k].is_zero() {
                    continue;
                }
                for j in 0..n {
                    q[i * n + j] += &p[i * n + k] * &a[k * n + j];
                }
            }
        }
        p = q;
    }
    (0..n).map(|i| p[i * n + i].clone()).sum()
}
