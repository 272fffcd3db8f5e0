//! The quotient poset of a core graph and the Möbius derivations of Φ.
//!
//! For `M ≼ N` (N a quotient of M), `Φ_{M,N}(n)` is the expected number of
//! common fixed points of the subgroup of `M` under a uniformly random
//! homomorphism from the subgroup of `N` to `S_n`; equivalently the expected
//! number of lifts of `M -> N` to a random `n`-cover of `N`. The left, right
//! and two-sided derivations `L`, `R`, `C` are the unique functions with
//!
//! ```text
//! Φ_{H,J} = Σ_{M∈[H,J]} L_{M,J} = Σ_{H≼M≼N≼J} C_{M,N} = Σ_{N∈[H,J]} R_{H,N}
//! ```
//!
//! and are obtained here by triangular elimination in exact rationals.
//!
//! Two independent exact routes to Φ are provided: brute-force enumeration
//! over permutation tuples ([`phi_exact`]), and the sum of injective-lift
//! expectations `L_{K,N}(n) = Π_u (n)_{|fibre u|} / Π_f (n)_{|fibre f|}`
//! over the quotients `K` of `M` ([`phi_by_injective_lifts`]), which is cheap
//! at any `n`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::core_graph::{enumerate_quotients, morphism, CoreGraph, GraphMorphism, QuotientCache, TreeOrder};
use crate::covers::trial_rng;
use crate::error::{Error, Result};
use crate::guard::Guards;
use crate::primitivity::{cyclic_graph, is_algebraic_extension_cached, primitivity_rank, PrimitivityRank};
use crate::words::{word_fixed_points, Permutation, ReducedWord};

/// All quotients of a root core graph, ordered by the covers relation.
#[derive(Debug, Clone, Serialize)]
pub struct QuotientInterval {
    /// Sorted by `|V| + |E|` descending, so every node precedes its quotients.
    /// The root is node 0.
    pub nodes: Vec<CoreGraph>,
    /// `order[i][j]` iff node `j` is a quotient of node `i`.
    pub order: Vec<Vec<bool>>,
    /// Minimal partition norm from the root to each node.
    pub root_distance: Vec<usize>,
}

impl QuotientInterval {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn covers(&self, m: usize, n: usize) -> bool {
        self.order[m][n]
    }

    pub fn index_of(&self, g: &CoreGraph) -> Option<usize> {
        self.nodes.iter().position(|x| x == g)
    }

    /// Nodes `k` with `m ≼ k ≼ n`.
    pub fn between(&self, m: usize, n: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&k| self.order[m][k] && self.order[k][n])
    }
}

pub fn interval_poset(g: &CoreGraph, guards: &Guards) -> Result<QuotientInterval> {
    let mut entries = enumerate_quotients(g, guards)?;
    entries.sort_by(|a, b| {
        let sa = a.graph.num_vertices() + a.graph.num_edges();
        let sb = b.graph.num_vertices() + b.graph.num_edges();
        sb.cmp(&sa).then(a.norm.cmp(&b.norm)).then(a.graph.cmp(&b.graph))
    });
    let nodes: Vec<CoreGraph> = entries.iter().map(|e| e.graph.clone()).collect();
    let root_distance = entries.iter().map(|e| e.norm).collect();
    let order = nodes
        .iter()
        .map(|m| {
            nodes
                .iter()
                .map(|n| morphism(m, n).is_some_and(|mm| mm.surjective))
                .collect()
        })
        .collect();
    Ok(QuotientInterval {
        nodes,
        order,
        root_distance,
    })
}

fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

fn all_permutations(n: usize) -> Vec<Permutation> {
    let mut out = Vec::new();
    let mut images: Vec<u32> = (0..n as u32).collect();
    permute(&mut images, 0, &mut out);
    out.sort_by(|a, b| a.images().cmp(b.images()));
    out
}

fn permute(images: &mut Vec<u32>, at: usize, out: &mut Vec<Permutation>) {
    if at == images.len() {
        out.push(Permutation::from_images(images.clone()).expect("bijection"));
        return;
    }
    for i in at..images.len() {
        images.swap(at, i);
        permute(images, at + 1, out);
        images.swap(at, i);
    }
}

/// How a source graph's lifts are propagated over a target's edges.
struct LiftPlan {
    // (parent, child, target edge, forward)
    tree: Vec<(usize, usize, usize, bool)>,
    // (from, to, target edge)
    checks: Vec<(usize, usize, usize)>,
    vertices: usize,
}

impl LiftPlan {
    fn new(src: &CoreGraph, m: &GraphMorphism) -> Self {
        let n = src.num_vertices();
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut tree = Vec::new();
        let mut used = vec![false; src.num_edges()];
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for (i, e) in src.edges().iter().enumerate() {
                if used[i] {
                    continue;
                }
                let (child, forward) = if e.from == v && !seen[e.to] {
                    (e.to, true)
                } else if e.to == v && !seen[e.from] {
                    (e.from, false)
                } else {
                    continue;
                };
                used[i] = true;
                seen[child] = true;
                tree.push((v, child, m.edge_map[i], forward));
                queue.push_back(child);
            }
        }
        let checks = src
            .edges()
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, e)| (e.from, e.to, m.edge_map[i]))
            .collect();
        LiftPlan {
            tree,
            checks,
            vertices: n,
        }
    }

    /// Number of base sheets from which the whole source graph lifts.
    fn count(&self, sheets: usize, sigma: &[&[u32]], sigma_inv: &[&[u32]], buf: &mut Vec<u32>) -> u64 {
        buf.resize(self.vertices, 0);
        let mut total = 0;
        'sheet: for i in 0..sheets {
            buf[0] = i as u32;
            for &(p, c, e, fwd) in &self.tree {
                let s = buf[p] as usize;
                buf[c] = if fwd { sigma[e][s] } else { sigma_inv[e][s] };
            }
            for &(a, b, e) in &self.checks {
                if sigma[e][buf[a] as usize] != buf[b] {
                    continue 'sheet;
                }
            }
            total += 1;
        }
        total
    }
}

/// Exact `Φ_{M,N}(n)` for every source at once, by enumerating all
/// permutation assignments to the non-tree edges of `target` (tree edges get
/// the identity).
pub fn phi_exact_many(
    sources: &[&CoreGraph],
    target: &CoreGraph,
    n: usize,
    order: TreeOrder,
    guards: &Guards,
) -> Result<Vec<BigRational>> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let rank = target.rank() as u32;
    let fact = factorial(n as u64);
    let assignments = fact.checked_pow(rank);
    match assignments {
        Some(a) if a <= guards.phi_assignments => {}
        _ => {
            return Err(Error::guard(
                "exact expectation",
                format!("({n}!)^{rank} permutation tuples"),
                guards.phi_assignments,
            ))
        }
    }
    let plans = sources
        .iter()
        .map(|s| {
            morphism(s, target)
                .map(|m| LiftPlan::new(s, &m))
                .ok_or(Error::NoMorphism)
        })
        .collect::<Result<Vec<_>>>()?;
    let perms = all_permutations(n);
    let inverses: Vec<Permutation> = perms.iter().map(Permutation::inverse).collect();
    let identity: Vec<u32> = (0..n as u32).collect();
    let tree = target.spanning_tree(order);
    let free = tree.non_tree_edges.clone();
    let num_perms = perms.len();
    let total_tuples = assignments.expect("checked above") as usize;
    let chunk = num_perms.max(1);
    let sums: Vec<u64> = (0..total_tuples.div_ceil(chunk))
        .into_par_iter()
        .map(|block| {
            let mut sums = vec![0u64; plans.len()];
            let mut buf = Vec::new();
            let mut sigma: Vec<&[u32]> = vec![&identity[..]; target.num_edges()];
            let mut sigma_inv: Vec<&[u32]> = vec![&identity[..]; target.num_edges()];
            for idx in block * chunk..((block + 1) * chunk).min(total_tuples) {
                let mut rest = idx;
                for &e in &free {
                    let p = rest % num_perms;
                    rest /= num_perms;
                    sigma[e] = perms[p].images();
                    sigma_inv[e] = inverses[p].images();
                }
                for (s, plan) in sums.iter_mut().zip(&plans) {
                    *s += plan.count(n, &sigma, &sigma_inv, &mut buf);
                }
            }
            sums
        })
        .reduce(
            || vec![0u64; plans.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let denom = BigInt::from(fact).pow(rank);
    Ok(sums
        .into_iter()
        .map(|s| BigRational::new(BigInt::from(s), denom.clone()))
        .collect())
}

/// Exact `Φ_{M,N}(n)` by enumeration over `S_n^{rk N}`.
pub fn phi_exact(gm: &CoreGraph, gn: &CoreGraph, n: usize, guards: &Guards) -> Result<BigRational> {
    Ok(phi_exact_many(&[gm], gn, n, TreeOrder::Bfs, guards)?.remove(0))
}

fn falling(n: u64, k: u64) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i))
}

/// Expected number of injective lifts of `K -> N` to a random `n`-cover of
/// `N`, i.e. `L_{K,N}(n)`.
pub fn injective_lift_expectation(gk: &CoreGraph, gn: &CoreGraph, n: u64) -> Result<BigRational> {
    let m = morphism(gk, gn).ok_or(Error::NoMorphism)?;
    let mut vfib = vec![0u64; gn.num_vertices()];
    m.vertex_map.iter().for_each(|&v| vfib[v] += 1);
    if vfib.iter().any(|&a| a > n) {
        return Ok(BigRational::zero());
    }
    let mut efib = vec![0u64; gn.num_edges()];
    m.edge_map.iter().for_each(|&e| efib[e] += 1);
    let num = vfib.iter().fold(BigInt::one(), |acc, &a| acc * falling(n, a));
    let den = efib.iter().fold(BigInt::one(), |acc, &b| acc * falling(n, b));
    Ok(BigRational::new(num, den))
}

/// `Φ_{M,N}(n) = Σ_{K ∈ [M,N]} L_{K,N}(n)`, exact at any `n`.
pub fn phi_by_injective_lifts(gm: &CoreGraph, gn: &CoreGraph, n: u64, guards: &Guards) -> Result<BigRational> {
    morphism(gm, gn).ok_or(Error::NoMorphism)?;
    let mut total = BigRational::zero();
    for q in enumerate_quotients(gm, guards)? {
        if morphism(&q.graph, gn).is_some() {
            total += injective_lift_expectation(&q.graph, gn, n)?;
        }
    }
    Ok(total)
}

/// `E[F_{w,n}]` exactly, via injective lifts into the bouquet of the letters of `w`.
pub fn expected_fixed_points(w: &ReducedWord, n: u64, guards: &Guards) -> Result<BigRational> {
    let k = w.alphabet_size();
    let top = CoreGraph::bouquet_of(k, &w.letters_used());
    phi_by_injective_lifts(&cyclic_graph(w), &top, n, guards)
}

/// Square matrix over interval nodes; `None` off the order relation.
pub type PairTable = Vec<Vec<Option<BigRational>>>;

/// Φ, L, R, C at one value of `n`.
#[derive(Debug, Clone)]
pub struct MoebiusLayer {
    pub n: usize,
    pub phi: PairTable,
    pub left: PairTable,
    pub right: PairTable,
    pub two_sided: PairTable,
}

#[derive(Debug, Clone)]
pub struct MoebiusTable {
    pub interval: QuotientInterval,
    pub layers: Vec<MoebiusLayer>,
}

fn get(t: &PairTable, i: usize, j: usize) -> Result<&BigRational> {
    t[i][j]
        .as_ref()
        .ok_or_else(|| Error::Internal(format!("missing value for pair ({i}, {j})")))
}

/// Exact Φ on every comparable pair of the interval.
pub fn phi_table(interval: &QuotientInterval, n: usize, guards: &Guards) -> Result<PairTable> {
    let size = interval.len();
    let mut table: PairTable = vec![vec![None; size]; size];
    for target in 0..size {
        let sources: Vec<usize> = (0..size).filter(|&m| interval.covers(m, target)).collect();
        let graphs: Vec<&CoreGraph> = sources.iter().map(|&m| &interval.nodes[m]).collect();
        let values = phi_exact_many(&graphs, &interval.nodes[target], n, TreeOrder::Bfs, guards)?;
        for (m, v) in sources.into_iter().zip(values) {
            table[m][target] = Some(v);
        }
    }
    Ok(table)
}

/// Solves for L, R and C given Φ, then re-checks every identity.
pub fn moebius_invert(interval: &QuotientInterval, n: usize, phi: PairTable) -> Result<MoebiusLayer> {
    let size = interval.len();
    for i in 0..size {
        for j in 0..size {
            if interval.covers(i, j) != phi[i][j].is_some() {
                return Err(Error::Internal(format!("Φ table does not match the order at ({i}, {j})")));
            }
        }
    }
    let mut left: PairTable = vec![vec![None; size]; size];
    let mut right: PairTable = vec![vec![None; size]; size];
    let mut two: PairTable = vec![vec![None; size]; size];
    // coarser nodes have larger indices
    for target in 0..size {
        for m in (0..=target).rev() {
            if !interval.covers(m, target) {
                continue;
            }
            let mut v = get(&phi, m, target)?.clone();
            for k in interval.between(m, target).filter(|&k| k != m) {
                v -= get(&left, k, target)?;
            }
            left[m][target] = Some(v);
        }
    }
    for m in 0..size {
        for target in m..size {
            if !interval.covers(m, target) {
                continue;
            }
            let mut r = get(&phi, m, target)?.clone();
            let mut c = get(&left, m, target)?.clone();
            for k in interval.between(m, target).filter(|&k| k != target) {
                r -= get(&right, m, k)?;
                c -= get(&two, m, k)?;
            }
            right[m][target] = Some(r);
            two[m][target] = Some(c);
        }
    }
    let layer = MoebiusLayer {
        n,
        phi,
        left,
        right,
        two_sided: two,
    };
    verify_identities(interval, &layer)?;
    Ok(layer)
}

/// Re-sums every defining identity exactly; an error names the first failure.
pub fn verify_identities(interval: &QuotientInterval, layer: &MoebiusLayer) -> Result<()> {
    let size = interval.len();
    for h in 0..size {
        for j in 0..size {
            if !interval.covers(h, j) {
                continue;
            }
            let phi = get(&layer.phi, h, j)?;
            let mut by_left = BigRational::zero();
            let mut by_right = BigRational::zero();
            let mut by_two = BigRational::zero();
            for m in interval.between(h, j) {
                by_left += get(&layer.left, m, j)?;
                by_right += get(&layer.right, h, m)?;
                for nn in interval.between(m, j) {
                    by_two += get(&layer.two_sided, m, nn)?;
                }
            }
            let r_from_c = interval
                .between(h, j)
                .map(|m| get(&layer.two_sided, m, j).cloned())
                .sum::<Result<BigRational>>()?;
            let checks = [
                ("Σ L", &by_left),
                ("Σ R", &by_right),
                ("Σ Σ C", &by_two),
            ];
            for (name, value) in checks {
                if value != phi {
                    return Err(Error::Internal(format!(
                        "Φ({h},{j}) = {phi} but {name} = {value} at n = {}",
                        layer.n
                    )));
                }
            }
            if &r_from_c != get(&layer.right, h, j)? {
                return Err(Error::Internal(format!("R({h},{j}) differs from Σ C at n = {}", layer.n)));
            }
        }
    }
    Ok(())
}

/// Full table over the quotient interval of `g` at each `n`.
pub fn moebius_table(g: &CoreGraph, ns: &[usize], guards: &Guards) -> Result<MoebiusTable> {
    let interval = interval_poset(g, guards)?;
    let layers = ns
        .iter()
        .map(|&n| moebius_invert(&interval, n, phi_table(&interval, n, guards)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(MoebiusTable { interval, layers })
}

#[derive(Debug, Clone, Serialize)]
pub struct RSupportViolation {
    pub node: usize,
    pub n: usize,
    pub value: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RSupportReport {
    pub nodes: usize,
    /// Whether each node is an algebraic extension of the root.
    pub algebraic: Vec<bool>,
    pub violations: Vec<RSupportViolation>,
}

impl RSupportReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that `R_{<w>,N}(n)` vanishes on every non-algebraic quotient `N`.
pub fn verify_r_support(w: &ReducedWord, ns: &[usize], guards: &Guards) -> Result<(MoebiusTable, RSupportReport)> {
    let table = moebius_table(&cyclic_graph(w), ns, guards)?;
    let root = &table.interval.nodes[0];
    let mut cache = QuotientCache::new(*guards);
    let algebraic = table
        .interval
        .nodes
        .iter()
        .map(|node| is_algebraic_extension_cached(root, node, &mut cache))
        .collect::<Result<Vec<_>>>()?;
    let mut violations = Vec::new();
    for layer in &table.layers {
        for (node, alg) in algebraic.iter().enumerate() {
            let r = get(&layer.right, 0, node)?;
            if !alg && !r.is_zero() {
                violations.push(RSupportViolation {
                    node,
                    n: layer.n,
                    value: r.to_string(),
                });
            }
        }
    }
    let report = RSupportReport {
        nodes: table.interval.len(),
        algebraic,
        violations,
    };
    Ok((table, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
}

/// Monte-Carlo estimate of `E[F_{w,n}]`; trial `i` draws its permutations
/// from `trial_rng(seed, i)`.
pub fn phi_monte_carlo(w: &ReducedWord, n: usize, trials: u64, seed: u64) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let k = w.alphabet_size();
    let (sum, sum_sq) = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let sigmas: Vec<Permutation> = (0..k).map(|_| Permutation::random(n, &mut rng)).collect();
            let inverses: Vec<Permutation> = sigmas.iter().map(Permutation::inverse).collect();
            let f = word_fixed_points(w.letters(), &sigmas, &inverses) as f64;
            (f, f * f)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let t = trials as f64;
    let mean = sum / t;
    let var = if trials > 1 {
        ((sum_sq - t * mean * mean) / (t - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(Estimate {
        mean,
        std_error: (var / t).sqrt(),
        trials,
    })
}

/// How `E[F_{w,n}]` was obtained in an [`AsymptoticRow`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectationSource {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticRow {
    pub n: u64,
    pub expectation: f64,
    /// Exact value as `num/den` when available.
    pub exact: Option<String>,
    pub std_error: f64,
    pub bound: f64,
    pub passed: bool,
    /// `(E - 1 - |Crit| / n^{π-1}) · n^π`, for finite `π >= 1`.
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticReport {
    pub word: String,
    pub pi: PrimitivityRank,
    pub crit: usize,
    pub source: ExpectationSource,
    pub rows: Vec<AsymptoticRow>,
}

impl AsymptoticReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }
}

/// `1 + n^{1-π} (|Crit| + t^{2+2π} / (n - t^2))`; `1` for primitive words.
pub fn fixed_point_bound(pi: PrimitivityRank, crit: usize, t: usize, n: u64) -> Result<f64> {
    let t2 = (t * t) as u64;
    if n <= t2 {
        return Err(Error::invalid(format!("the bound needs n > |w|^2 = {t2}, got n = {n}")));
    }
    let Some(p) = pi.finite() else { return Ok(1.0) };
    let nf = n as f64;
    let p = p as i32;
    Ok(1.0 + nf.powi(1 - p) * (crit as f64 + (t as f64).powi(2 + 2 * p) / (nf - t2 as f64)))
}

/// Checks `E[F_{w,n}]` against [`fixed_point_bound`] at each `n`. With
/// `monte_carlo = Some((trials, seed))` the expectation is estimated and a row
/// passes when `mean - 5 SE` is within the bound; otherwise it is exact.
/// The wide margin keeps sweeps over many words and `n` free of false alarms.
pub fn asymptotic_check(
    w: &ReducedWord,
    ns: &[u64],
    monte_carlo: Option<(u64, u64)>,
    guards: &Guards,
) -> Result<AsymptoticReport> {
    let report = primitivity_rank(w, guards)?;
    let t = w.len();
    let crit = report.crit.len();
    let mut rows = Vec::new();
    for &n in ns {
        let bound = fixed_point_bound(report.pi, crit, t, n)?;
        let (expectation, exact, std_error) = match monte_carlo {
            Some((trials, seed)) => {
                let e = phi_monte_carlo(w, n as usize, trials, seed ^ n)?;
                (e.mean, None, e.std_error)
            }
            None => {
                let e = expected_fixed_points(w, n, guards)?;
                (ratio_to_f64(&e), Some(e.to_string()), 0.0)
            }
        };
        let passed = expectation - 5.0 * std_error <= bound * (1.0 + 1e-12);
        let residual = report.pi.finite().filter(|&p| p >= 1).map(|p| {
            let nf = n as f64;
            (expectation - 1.0 - crit as f64 / nf.powi(p as i32 - 1)) * nf.powi(p as i32)
        });
        rows.push(AsymptoticRow {
            n,
            expectation,
            exact,
            std_error,
            bound,
            passed,
            residual,
        });
    }
    Ok(AsymptoticReport {
        word: w.to_string(),
        pi: report.pi,
        crit,
        source: if monte_carlo.is_some() {
            ExpectationSource::MonteCarlo
        } else {
            ExpectationSource::Exact
        },
        rows,
    })
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(a), Some(b)) => a / b,
        _ => f64::NAN,
    }
}
