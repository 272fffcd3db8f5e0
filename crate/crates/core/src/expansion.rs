//! Combinatorial expansion of small multigraphs and the spectral
//! inequalities tying it to the adjacency, Markov and Laplacian spectra.
//!
//! `E(S, T)` is `1_S^T A 1_T`: edges with both ends in `S ∩ T` count twice
//! and a loop inside `S ∩ T` counts twice, matching the loop convention of
//! the adjacency matrix.

use nalgebra::{DMatrix, SymmetricEigen};
use num_integer::Integer;
use serde::Serialize;

use crate::covers::MultiGraph;
use crate::error::{Error, Result};
use crate::guard::Guards;
use crate::spectral::{graph_spectrum, Operator};

/// A nonnegative fraction in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Fraction {
    pub num: u64,
    pub den: u64,
}

impl Fraction {
    pub fn new(num: u64, den: u64) -> Self {
        let g = num.gcd(&den).max(1);
        Fraction {
            num: num / g,
            den: den / g,
        }
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    fn less_than(self, other: Fraction) -> bool {
        (self.num as u128) * (other.den as u128) < (other.num as u128) * (self.den as u128)
    }
}

impl std::fmt::Display for Fraction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Cut size `|E(S, V \ S)|` for every subset mask.
fn cut_sizes(g: &MultiGraph) -> Vec<u32> {
    let n = g.num_vertices();
    let outer: Vec<u32> = (0..n).map(|u| (g.degree(u) as u32) - g.adjacency(u, u)).collect();
    let mut cut = vec![0u32; 1 << n];
    for mask in 1usize..(1 << n) {
        let u = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        let inside: u32 = (0..n).filter(|&v| rest >> v & 1 == 1).map(|v| g.adjacency(u, v)).sum();
        cut[mask] = cut[rest] + outer[u] - 2 * inside;
    }
    cut
}

/// Exact Cheeger constant `h` and conductance `φ` by scanning all subsets.
pub fn cheeger_and_conductance(g: &MultiGraph, guards: &Guards) -> Result<(Fraction, Fraction)> {
    let n = g.num_vertices();
    guards.check_subsets(n)?;
    if n < 2 {
        return Err(Error::invalid("expansion needs at least two vertices"));
    }
    if !g.is_connected() {
        return Err(Error::NotConnected);
    }
    let deg: Vec<u64> = g.degrees().iter().map(|&d| d as u64).collect();
    let total: u64 = deg.iter().sum();
    let cut = cut_sizes(g);
    let mut h: Option<Fraction> = None;
    let mut phi: Option<Fraction> = None;
    for mask in 1usize..(1 << n) {
        let size = mask.count_ones() as u64;
        let c = cut[mask] as u64;
        if 2 * size <= n as u64 {
            let f = Fraction::new(c, size);
            if h.is_none_or(|b| f.less_than(b)) {
                h = Some(f);
            }
        }
        let vol: u64 = (0..n).filter(|&v| mask >> v & 1 == 1).map(|v| deg[v]).sum();
        if vol > 0 && 2 * vol <= total {
            let f = Fraction::new(c, vol);
            if phi.is_none_or(|b| f.less_than(b)) {
                phi = Some(f);
            }
        }
    }
    let h = h.expect("n >= 2 gives a singleton");
    let phi = phi.ok_or_else(|| Error::invalid("graph has no edges"))?;
    Ok((h, phi))
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpansionReport {
    pub cheeger_h: f64,
    pub cheeger_h_exact: Fraction,
    pub conductance_phi: f64,
    pub conductance_phi_exact: Fraction,
    /// Second smallest eigenvalue of `D - A`.
    pub laplacian_nu2: f64,
    /// Second largest eigenvalue of `D^{-1/2} A D^{-1/2}`.
    pub markov_mu2: f64,
    /// `max(μ2, -μ_min)`.
    pub markov_mu: f64,
    pub perron: f64,
    /// `max(λ2, -λ_min)` of the adjacency matrix.
    pub lambda: f64,
    pub max_degree: usize,
    /// `φ²/2 <= 1 - μ2 <= 2φ`.
    pub cheeger_markov_holds: bool,
    /// `h²/(2 maxdeg) <= ν2 <= 2h`.
    pub cheeger_laplacian_holds: bool,
    /// Largest value of `|E(S,T) - pf·vol(S)·vol(T)| - λ√(|S||T|)` over all
    /// pairs; the lemma holds when this is at most rounding.
    pub mixing_max_violation: f64,
    /// Same for `|E(S,T) - deg(S)deg(T)/2|E|| - μ√(deg(S)deg(T))`.
    pub markov_mixing_max_violation: f64,
    pub mixing_holds: bool,
}

const SLACK: f64 = 1e-9;

/// Maximum of `|1_S^T A 1_T - Σ_i c_i ⟨1_S, f_i⟩⟨1_T, f_i⟩| - λ √(w(S) w(T))`
/// over all subset pairs, where `weights` gives `w` per vertex.
pub fn mixing_violation(g: &MultiGraph, rank_one: &[(f64, Vec<f64>)], lambda: f64, weights: &[f64]) -> f64 {
    let n = g.num_vertices();
    let full = 1usize << n;
    let proj = |f: &Vec<f64>| -> Vec<f64> {
        let mut out = vec![0.0; full];
        for mask in 1..full {
            let u = mask.trailing_zeros() as usize;
            out[mask] = out[mask & (mask - 1)] + f[u];
        }
        out
    };
    let vols: Vec<Vec<f64>> = rank_one.iter().map(|(_, f)| proj(f)).collect();
    let wsum = proj(&weights.to_vec());
    let mut worst = f64::NEG_INFINITY;
    let mut row = vec![0u32; n];
    let mut e = vec![0u32; full];
    for t in 1..full {
        for (u, r) in row.iter_mut().enumerate() {
            *r = (0..n).filter(|&v| t >> v & 1 == 1).map(|v| g.adjacency(u, v)).sum();
        }
        for s in 1..full {
            let u = s.trailing_zeros() as usize;
            e[s] = e[s & (s - 1)] + row[u];
            let mut expected = 0.0;
            for ((c, _), vol) in rank_one.iter().zip(&vols) {
                expected += c * vol[s] * vol[t];
            }
            let v = (e[s] as f64 - expected).abs() - lambda * (wsum[s] * wsum[t]).sqrt();
            worst = worst.max(v);
        }
    }
    worst
}

fn eigen_desc(m: DMatrix<f64>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let eig = SymmetricEigen::new(m);
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = idx
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    (vals, vecs)
}

/// Cheeger constant, conductance, spectral gaps and both mixing lemmas,
/// checked exhaustively over subsets and subset pairs.
pub fn inequality_suite(g: &MultiGraph, guards: &Guards) -> Result<ExpansionReport> {
    let n = g.num_vertices();
    guards.check_subsets(2 * n)?;
    let (h, phi) = cheeger_and_conductance(g, guards)?;
    let deg: Vec<f64> = g.degrees().iter().map(|&d| d as f64).collect();
    let max_degree = g.max_degree();

    let a = DMatrix::from_row_slice(n, n, &g.adjacency_f64());
    let (adj_vals, adj_vecs) = eigen_desc(a.clone());
    let perron = adj_vals[0];
    let mut f = adj_vecs[0].clone();
    if f.iter().sum::<f64>() < 0.0 {
        f.iter_mut().for_each(|x| *x = -*x);
    }
    let lambda = adj_vals[1].max(-adj_vals[n - 1]);

    let laplacian = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(deg.clone())) - a;
    let mut lap = SymmetricEigen::new(laplacian).eigenvalues.iter().copied().collect::<Vec<_>>();
    lap.sort_by(f64::total_cmp);
    let nu2 = lap[1];

    let markov = graph_spectrum(g, Operator::Markov);
    let mu2 = markov[1];
    let mu = mu2.max(-markov[n - 1]);

    let (hv, pv) = (h.value(), phi.value());
    let cheeger_markov_holds = pv * pv / 2.0 <= 1.0 - mu2 + SLACK && 1.0 - mu2 <= 2.0 * pv + SLACK;
    let cheeger_laplacian_holds = hv * hv / (2.0 * max_degree as f64) <= nu2 + SLACK && nu2 <= 2.0 * hv + SLACK;

    let ones = vec![1.0; n];
    let mixing_max_violation = mixing_violation(g, &[(perron, f)], lambda, &ones);
    let total: f64 = deg.iter().sum();
    let g_vec: Vec<f64> = deg.iter().map(|d| d / total.sqrt()).collect();
    // rank-one part of A seen through D^{1/2}: deg(S)deg(T)/2|E|
    let markov_mixing_max_violation = mixing_violation(g, &[(1.0, g_vec)], mu, &deg);
    let mixing_holds = mixing_max_violation <= SLACK && markov_mixing_max_violation <= SLACK;

    Ok(ExpansionReport {
        cheeger_h: hv,
        cheeger_h_exact: h,
        conductance_phi: pv,
        conductance_phi_exact: phi,
        laplacian_nu2: nu2,
        markov_mu2: mu2,
        markov_mu: mu,
        perron,
        lambda,
        max_degree,
        cheeger_markov_holds,
        cheeger_laplacian_holds,
        mixing_max_violation,
        markov_mixing_max_violation,
        mixing_holds,
    })
}

/// Mixing for a `d`-regular bipartite graph with both trivial eigenvalues
/// `±d` removed; `side[v]` marks one colour class and `lambda` bounds the
/// remaining spectrum.
pub fn bipartite_mixing_violation(g: &MultiGraph, side: &[bool], lambda: f64) -> Result<f64> {
    let n = g.num_vertices();
    let d = g.regular_degree().ok_or(Error::NotRegular)? as f64;
    if side.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            got: side.len(),
        });
    }
    let s = 1.0 / (n as f64).sqrt();
    let plus = vec![s; n];
    let minus: Vec<f64> = side.iter().map(|&b| if b { s } else { -s }).collect();
    Ok(mixing_violation(g, &[(d, plus), (-d, minus)], lambda, &vec![1.0; n]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> MultiGraph {
        let edges: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        MultiGraph::from_edges(n, &edges).unwrap()
    }

    fn cycle(n: usize) -> MultiGraph {
        MultiGraph::from_edges(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn known_cheeger_constants() {
        let g = Guards::default();
        assert_eq!(cheeger_and_conductance(&complete(4), &g).unwrap().0, Fraction::new(2, 1));
        assert_eq!(cheeger_and_conductance(&cycle(6), &g).unwrap().0, Fraction::new(2, 3));
        assert_eq!(cheeger_and_conductance(&complete(2), &g).unwrap().0, Fraction::new(1, 1));
    }

    #[test]
    fn k4_suite() {
        let r = inequality_suite(&complete(4), &Guards::default()).unwrap();
        assert!(r.cheeger_markov_holds && r.cheeger_laplacian_holds && r.mixing_holds);
        assert!((r.lambda - 1.0).abs() < 1e-12);
        assert!((r.laplacian_nu2 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn loops_do_not_cut() {
        let g = MultiGraph::from_edges(2, &[(0, 0), (0, 1), (1, 1)]).unwrap();
        let (h, phi) = cheeger_and_conductance(&g, &Guards::default()).unwrap();
        assert_eq!(h, Fraction::new(1, 1));
        assert_eq!(phi, Fraction::new(1, 3));
        let r = inequality_suite(&g, &Guards::default()).unwrap();
        assert!(r.cheeger_markov_holds && r.cheeger_laplacian_holds && r.mixing_holds);
    }

    #[test]
    fn disconnected_rejected() {
        let g = MultiGraph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(cheeger_and_conductance(&g, &Guards::default()), Err(Error::NotConnected));
    }

    #[test]
    fn subset_guard() {
        let g = Guards {
            subset_vertices: 3,
            ..Guards::default()
        };
        assert!(cheeger_and_conductance(&complete(4), &g).unwrap_err().is_guard());
    }
}
