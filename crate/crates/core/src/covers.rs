//! Random regular multigraphs and random coverings.
//!
//! A [`BaseGraph`] has its edges oriented and numbered; edge `e` (0-based)
//! carries label `e + 1`, so closed paths in the base are words over an
//! alphabet of size `|E|`. A [`CoverGraph`] attaches one permutation of the
//! sheets `0..n` to every base edge. Loops add 2 to the adjacency diagonal
//! and to the degree, so the permutation model is `d`-regular as an operator.
//!
//! All samplers take an explicit RNG; [`trial_rng`] derives the generator of
//! trial `i` from a master seed so that sweeps are reproducible.

use std::collections::{HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::{evaluate_word, Letter, Permutation, RawWord};

/// SplitMix64 finaliser applied to `master + (i + 1) * golden`.
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    let mut z = master.wrapping_add(trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// ChaCha8 seeded from a 64-bit seed; portable across platforms.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn trial_rng(master: u64, trial: u64) -> ChaCha8Rng {
    seeded_rng(trial_seed(master, trial))
}

/// Symmetric multigraph given by its adjacency counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiGraph {
    n: usize,
    adj: Vec<u32>,
}

impl MultiGraph {
    pub fn empty(n: usize) -> Self {
        MultiGraph { n, adj: vec![0; n * n] }
    }

    /// Undirected edges as vertex pairs; `(v, v)` is a loop.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = MultiGraph::empty(n);
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!("edge ({u}, {v}) references a missing vertex")));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }

    /// From a symmetric matrix of counts; diagonal entries must be even.
    pub fn from_adjacency(rows: &[Vec<u32>]) -> Result<Self> {
        let n = rows.len();
        let mut adj = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::invalid("adjacency matrix must be square"));
            }
            adj.extend_from_slice(r);
        }
        for i in 0..n {
            if adj[i * n + i] % 2 != 0 {
                return Err(Error::invalid("diagonal entries count loops twice and must be even"));
            }
            for j in 0..i {
                if adj[i * n + j] != adj[j * n + i] {
                    return Err(Error::NotSymmetric((adj[i * n + j] as f64 - adj[j * n + i] as f64).abs()));
                }
            }
        }
        Ok(MultiGraph { n, adj })
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        if u == v {
            self.adj[u * self.n + u] += 2;
        } else {
            self.adj[u * self.n + v] += 1;
            self.adj[v * self.n + u] += 1;
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn adjacency(&self, u: usize, v: usize) -> u32 {
        self.adj[u * self.n + v]
    }

    pub fn row(&self, u: usize) -> &[u32] {
        &self.adj[u * self.n..(u + 1) * self.n]
    }

    pub fn adjacency_rows(&self) -> Vec<Vec<u32>> {
        (0..self.n).map(|u| self.row(u).to_vec()).collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.row(v).iter().map(|&a| a as usize).sum()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|v| self.degree(v)).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// `Some(d)` when every vertex has degree `d`.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.degrees();
        let first = *d.first()?;
        d.iter().all(|&x| x == first).then_some(first)
    }

    /// Number of edges, each loop counted once.
    pub fn num_edges(&self) -> usize {
        self.degrees().iter().sum::<usize>() / 2
    }

    pub fn num_loops(&self) -> usize {
        (0..self.n).map(|v| self.adjacency(v, v) as usize / 2).sum()
    }

    pub fn is_simple(&self) -> bool {
        (0..self.n).all(|u| self.adjacency(u, u) == 0 && self.row(u).iter().all(|&a| a <= 1))
    }

    /// Edges `(u, v)` with `u <= v`, repeated by multiplicity.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            let loops = self.adjacency(u, u) / 2;
            out.extend(std::iter::repeat((u, u)).take(loops as usize));
            for v in u + 1..self.n {
                out.extend(std::iter::repeat((u, v)).take(self.adjacency(u, v) as usize));
            }
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for v in 0..self.n {
                if self.adjacency(u, v) > 0 && !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.n
    }

    /// Adjacency as `f64`, row-major.
    pub fn adjacency_f64(&self) -> Vec<f64> {
        self.adj.iter().map(|&a| a as f64).collect()
    }

    /// Edge list CSV with header `u,v`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("u,v\n");
        for (u, v) in self.edges() {
            s.push_str(&format!("{u},{v}\n"));
        }
        s
    }
}

#[derive(Serialize, Deserialize)]
struct MultiGraphJson {
    vertices: usize,
    adjacency: Vec<Vec<u32>>,
}

impl Serialize for MultiGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MultiGraphJson {
            vertices: self.n,
            adjacency: self.adjacency_rows(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultiGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = MultiGraphJson::deserialize(d)?;
        if json.adjacency.len() != json.vertices {
            return Err(serde::de::Error::custom("adjacency size does not match vertex count"));
        }
        MultiGraph::from_adjacency(&json.adjacency).map_err(serde::de::Error::custom)
    }
}

/// A connected graph with oriented, numbered edges; edge `e` has label `e + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseGraph {
    num_vertices: usize,
    edges: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct BaseGraphJson {
    vertices: Vec<serde_json::Value>,
    edges: Vec<[serde_json::Value; 2]>,
}

impl BaseGraph {
    pub fn new(num_vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if num_vertices == 0 {
            return Err(Error::invalid("base graph needs at least one vertex"));
        }
        if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u >= num_vertices || v >= num_vertices) {
            return Err(Error::invalid(format!("edge ({u}, {v}) references a missing vertex")));
        }
        let g = BaseGraph { num_vertices, edges };
        if !g.multigraph().is_connected() {
            return Err(Error::NotConnected);
        }
        Ok(g)
    }

    /// One vertex with `k` loops.
    pub fn bouquet(k: usize) -> Self {
        BaseGraph {
            num_vertices: 1,
            edges: vec![(0, 0); k],
        }
    }

    /// Two vertices joined by `d` parallel edges; its covers are the bipartite
    /// `d`-regular multigraphs.
    pub fn dipole(d: usize) -> Self {
        BaseGraph {
            num_vertices: 2,
            edges: vec![(0, 1); d],
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// `|E| - |V| + 1`.
    pub fn rank(&self) -> usize {
        self.edges.len() + 1 - self.num_vertices
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().map(|&(a, b)| (a == v) as usize + (b == v) as usize).sum()
    }

    pub fn regular_degree(&self) -> Option<usize> {
        self.multigraph().regular_degree()
    }

    pub fn multigraph(&self) -> MultiGraph {
        MultiGraph::from_edges(self.num_vertices, &self.edges).expect("edges validated")
    }

    /// Darts leaving `v`: the letter read and the vertex reached.
    pub fn darts_from(&self, v: usize) -> Vec<(Letter, usize)> {
        let mut out = Vec::new();
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            if a == v {
                out.push((Letter::pos(e + 1), b));
            }
            if b == v {
                out.push((Letter::neg(e + 1), a));
            }
        }
        out
    }

    /// End vertex of the path spelled by `letters` from `start`, if it exists.
    pub fn walk(&self, start: usize, letters: &[Letter]) -> Result<usize> {
        let mut v = start;
        for l in letters {
            let (a, b) = *self.edges.get(l.index().wrapping_sub(1)).ok_or(Error::LetterOutOfRange {
                index: l.index(),
                alphabet_size: self.edges.len(),
            })?;
            let (from, to) = if l.is_inverse() { (b, a) } else { (a, b) };
            if from != v {
                return Err(Error::invalid(format!("path leaves vertex {v} along an edge not incident to it")));
            }
            v = to;
        }
        Ok(v)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let json: BaseGraphJson = serde_json::from_str(text).map_err(|e| Error::invalid(e.to_string()))?;
        let index: HashMap<String, usize> = json
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.to_string(), i))
            .collect();
        if index.len() != json.vertices.len() {
            return Err(Error::invalid("duplicate vertex ids"));
        }
        let lookup = |v: &serde_json::Value| {
            index
                .get(&v.to_string())
                .copied()
                .ok_or_else(|| Error::invalid(format!("unknown vertex {v}")))
        };
        let edges = json
            .edges
            .iter()
            .map(|[u, v]| Ok((lookup(u)?, lookup(v)?)))
            .collect::<Result<Vec<_>>>()?;
        BaseGraph::new(json.vertices.len(), edges)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "vertices": (0..self.num_vertices).collect::<Vec<_>>(),
            "edges": self.edges.iter().map(|&(u, v)| [u, v]).collect::<Vec<_>>(),
        })
    }
}

/// An `n`-sheeted covering: vertex `(v, i)` has index `v * n + i`, and base
/// edge `e = (u, v)` lifts to `(u, i) -> (v, sigma_e(i))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverGraph {
    base: BaseGraph,
    n: usize,
    sigma: Vec<Permutation>,
}

impl CoverGraph {
    pub fn new(base: BaseGraph, sigma: Vec<Permutation>) -> Result<Self> {
        if sigma.len() != base.num_edges() {
            return Err(Error::SizeMismatch {
                expected: base.num_edges(),
                got: sigma.len(),
            });
        }
        let n = sigma.first().map_or(1, Permutation::len);
        if let Some(p) = sigma.iter().find(|p| p.len() != n) {
            return Err(Error::SizeMismatch {
                expected: n,
                got: p.len(),
            });
        }
        if n == 0 {
            return Err(Error::invalid("cover needs at least one sheet"));
        }
        Ok(CoverGraph { base, n, sigma })
    }

    /// `n` disjoint copies of the base.
    pub fn trivial(base: BaseGraph, n: usize) -> Self {
        let sigma = vec![Permutation::identity(n); base.num_edges()];
        CoverGraph { base, n, sigma }
    }

    pub fn base(&self) -> &BaseGraph {
        &self.base
    }

    pub fn sheets(&self) -> usize {
        self.n
    }

    pub fn sigma(&self) -> &[Permutation] {
        &self.sigma
    }

    pub fn num_vertices(&self) -> usize {
        self.base.num_vertices() * self.n
    }

    pub fn vertex(&self, v: usize, sheet: usize) -> usize {
        v * self.n + sheet
    }

    pub fn lifted_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.base.num_edges() * self.n);
        for (e, &(u, v)) in self.base.edges().iter().enumerate() {
            for i in 0..self.n {
                out.push((self.vertex(u, i), self.vertex(v, self.sigma[e].apply(i))));
            }
        }
        out
    }

    pub fn multigraph(&self) -> MultiGraph {
        MultiGraph::from_edges(self.num_vertices(), &self.lifted_edges()).expect("cover vertices in range")
    }

    /// Checks that `(v, i) -> v` maps every lifted edge onto its base edge.
    pub fn projects_onto_base(&self) -> bool {
        let edges = self.lifted_edges();
        edges.iter().enumerate().all(|(idx, &(a, b))| {
            let (u, v) = self.base.edges()[idx / self.n];
            a / self.n == u && b / self.n == v
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "base": self.base.to_json(),
            "n": self.n,
            "sigma": self.sigma.iter().map(|p| p.images().to_vec()).collect::<Vec<_>>(),
        })
    }
}

/// A closed path of the base graph starting at `start`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasePath {
    pub start: usize,
    pub letters: Vec<Letter>,
}

/// Number of lifts of a closed base path that are closed in the cover,
/// counted by walking the cover's edges sheet by sheet.
pub fn closed_lift_count(path: &BasePath, cover: &CoverGraph) -> Result<usize> {
    let base = cover.base();
    if path.start >= base.num_vertices() {
        return Err(Error::invalid("path starts at a missing vertex"));
    }
    if base.walk(path.start, &path.letters)? != path.start {
        return Err(Error::invalid("path is not closed"));
    }
    let n = cover.sheets();
    let lifted = cover.lifted_edges();
    let mut forward: Vec<HashMap<usize, usize>> = Vec::with_capacity(base.num_edges());
    let mut backward: Vec<HashMap<usize, usize>> = Vec::with_capacity(base.num_edges());
    for e in 0..base.num_edges() {
        let block = &lifted[e * n..(e + 1) * n];
        forward.push(block.iter().copied().collect());
        backward.push(block.iter().map(|&(a, b)| (b, a)).collect());
    }
    let mut count = 0;
    for i in 0..n {
        let mut at = cover.vertex(path.start, i);
        for l in &path.letters {
            let e = l.index() - 1;
            at = if l.is_inverse() { backward[e][&at] } else { forward[e][&at] };
        }
        if at == cover.vertex(path.start, i) {
            count += 1;
        }
    }
    Ok(count)
}

/// Fixed points of the path's word evaluated at the cover's permutations.
pub fn closed_lift_count_by_fixed_points(path: &BasePath, cover: &CoverGraph) -> Result<usize> {
    let word = RawWord::new(path.letters.clone(), cover.base().num_edges().max(1))?;
    Ok(evaluate_word(&word, cover.sigma())?.fixed_points())
}

pub fn sample_cover<R: Rng + ?Sized>(base: &BaseGraph, n: usize, rng: &mut R) -> Result<CoverGraph> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let sigma = (0..base.num_edges()).map(|_| Permutation::random(n, rng)).collect();
    CoverGraph::new(base.clone(), sigma)
}

/// `d/2` uniform permutations, i.e. a random cover of the bouquet of `d/2` loops.
pub fn sample_permutation_model<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<CoverGraph> {
    if d % 2 == 1 {
        return Err(Error::invalid(
            "the permutation model needs even d; use the permutation-plus-matching model for odd d",
        ));
    }
    if d < 2 {
        return Err(Error::invalid("d must be at least 2"));
    }
    sample_cover(&BaseGraph::bouquet(d / 2), n, rng)
}

fn add_random_matching<R: Rng + ?Sized>(g: &mut MultiGraph, points: usize, bucket: usize, rng: &mut R) {
    let mut p: Vec<usize> = (0..points).collect();
    p.shuffle(rng);
    for pair in p.chunks_exact(2) {
        g.add_edge(pair[0] / bucket, pair[1] / bucket);
    }
}

/// Configuration model: a uniform perfect matching on `d * n` points, point
/// `p` belonging to vertex `p / d`.
pub fn sample_matching_model<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<MultiGraph> {
    if (d * n) % 2 == 1 {
        return Err(Error::invalid("d * n must be even"));
    }
    let mut g = MultiGraph::empty(n);
    add_random_matching(&mut g, n * d, d.max(1), rng);
    Ok(g)
}

/// `(d-1)/2` uniform permutations plus one uniform perfect matching of `0..n`.
pub fn sample_perm_plus_matching<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<MultiGraph> {
    if d % 2 == 0 {
        return Err(Error::invalid("d must be odd"));
    }
    if n % 2 == 1 {
        return Err(Error::invalid("n must be even"));
    }
    let mut g = MultiGraph::empty(n);
    for _ in 0..(d - 1) / 2 {
        let p = Permutation::random(n, rng);
        for i in 0..n {
            g.add_edge(i, p.apply(i));
        }
    }
    add_random_matching(&mut g, n, 1, rng);
    Ok(g)
}

/// Repeats `sample` until it returns a simple graph, at most `attempts` times.
pub fn sample_simple<F>(attempts: usize, mut sample: F) -> Result<MultiGraph>
where
    F: FnMut() -> Result<MultiGraph>,
{
    for _ in 0..attempts {
        let g = sample()?;
        if g.is_simple() {
            return Ok(g);
        }
    }
    Err(Error::invalid(format!("no simple graph in {attempts} attempts")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trial_seeds_differ_and_repeat() {
        assert_eq!(trial_seed(7, 3), trial_seed(7, 3));
        assert_ne!(trial_seed(7, 3), trial_seed(7, 4));
        assert_ne!(trial_seed(7, 3), trial_seed(8, 3));
    }

    #[test]
    fn single_sheet_permutation_model() {
        let mut rng = seeded_rng(1);
        let c = sample_permutation_model(1, 4, &mut rng).unwrap();
        let g = c.multigraph();
        assert_eq!(g.num_vertices(), 1);
        assert_eq!(g.num_loops(), 2);
        assert_eq!(g.regular_degree(), Some(4));
    }

    #[test]
    fn identity_cover_is_disjoint_loops() {
        let c = CoverGraph::trivial(BaseGraph::bouquet(2), 5);
        let g = c.multigraph();
        assert_eq!(g.num_loops(), 10);
        assert_eq!(g.regular_degree(), Some(4));
        assert!(!g.is_connected());
    }

    #[test]
    fn odd_degree_is_rejected() {
        let mut rng = seeded_rng(1);
        let err = sample_permutation_model(4, 3, &mut rng).unwrap_err();
        assert!(err.to_string().contains("matching"));
        assert!(sample_matching_model(3, 3, &mut rng).is_err());
        assert!(sample_perm_plus_matching(3, 3, &mut rng).is_err());
    }

    #[test]
    fn large_permutation_model_is_regular() {
        let mut rng = seeded_rng(11);
        let g = sample_permutation_model(1000, 4, &mut rng).unwrap().multigraph();
        assert!(g.degrees().iter().all(|&d| d == 4));
    }

    #[test]
    fn dipole_cover_is_bipartite_regular() {
        let mut rng = seeded_rng(5);
        let c = sample_cover(&BaseGraph::dipole(3), 20, &mut rng).unwrap();
        let g = c.multigraph();
        assert_eq!(g.regular_degree(), Some(3));
        for u in 0..20 {
            for v in 0..20 {
                assert_eq!(g.adjacency(u, v), 0);
                assert_eq!(g.adjacency(20 + u, 20 + v), 0);
            }
        }
        assert!(c.projects_onto_base());
    }

    #[test]
    fn single_sheet_cover_is_base() {
        let base = BaseGraph::new(2, vec![(0, 1), (0, 1), (1, 1)]).unwrap();
        let c = sample_cover(&base, 1, &mut seeded_rng(2)).unwrap();
        assert_eq!(c.multigraph(), base.multigraph());
    }

    #[test]
    fn matching_models() {
        let mut rng = seeded_rng(3);
        let g = sample_matching_model(2, 1, &mut rng).unwrap();
        assert_eq!(g.edges(), vec![(0, 1)]);
        let g = sample_matching_model(100, 3, &mut rng).unwrap();
        assert_eq!(g.regular_degree(), Some(3));
        let g = sample_perm_plus_matching(4, 3, &mut rng).unwrap();
        assert_eq!(g.regular_degree(), Some(3));
        let g = sample_perm_plus_matching(2, 1, &mut rng).unwrap();
        assert_eq!(g.edges(), vec![(0, 1)]);
    }

    #[test]
    fn base_json() {
        let b = BaseGraph::from_json(r#"{"vertices":["x","y"],"edges":[["x","y"],["y","x"],["x","x"]]}"#).unwrap();
        assert_eq!(b.edges(), &[(0, 1), (1, 0), (0, 0)]);
        assert_eq!(b.rank(), 2);
        assert!(BaseGraph::from_json(r#"{"vertices":[0,1],"edges":[]}"#).is_err());
    }

    #[test]
    fn multigraph_json_round_trip() {
        let g = MultiGraph::from_edges(3, &[(0, 1), (1, 1), (1, 2), (1, 2)]).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        assert_eq!(serde_json::from_str::<MultiGraph>(&text).unwrap(), g);
        assert_eq!(g.to_csv(), "u,v\n0,1\n1,1\n1,2\n1,2\n");
    }

    #[test]
    fn lifts_of_identity_cover() {
        let c = CoverGraph::trivial(BaseGraph::bouquet(2), 6);
        let p = BasePath {
            start: 0,
            letters: vec![Letter::pos(1), Letter::pos(2), Letter::neg(1)],
        };
        assert_eq!(closed_lift_count(&p, &c).unwrap(), 6);
        let open = BasePath {
            start: 0,
            letters: vec![Letter::pos(1)],
        };
        let dip = CoverGraph::trivial(BaseGraph::dipole(2), 3);
        assert!(closed_lift_count(&open, &dip).is_err());
    }
}
