//! Primitivity-rank statistics over all words or closed paths of a given
//! length, walk counts inside core graphs, and the bound evaluators of the
//! trace method.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::core_graph::{morphism, CoreGraph, Edge};
use crate::covers::BaseGraph;
use crate::error::{Error, Result};
use crate::guard::Guards;
use crate::primitivity::{primitivity_rank, PrimitivityRank, PrimitivityReport};
use crate::spectral::{cogrowth_g_unchecked, trace_power};
use crate::words::{enumerate_words, word_count, Letter, RawWord, ReducedWord, WordMode};

/// Counts of words per primitivity rank at a fixed length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankHistogram {
    pub t: usize,
    pub counts: BTreeMap<PrimitivityRank, u64>,
    /// `Σ |Crit(w)|` per rank, when requested.
    pub crit_sums: Option<BTreeMap<PrimitivityRank, u64>>,
}

impl RankHistogram {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn count(&self, m: PrimitivityRank) -> u64 {
        self.counts.get(&m).copied().unwrap_or(0)
    }

    pub fn crit_sum(&self, m: PrimitivityRank) -> Option<u64> {
        self.crit_sums.as_ref().map(|c| c.get(&m).copied().unwrap_or(0))
    }

    /// Rows `t,m,count,crit_sum` (no header); `crit_sum` empty when absent.
    pub fn csv_rows(&self) -> Vec<String> {
        self.counts
            .iter()
            .map(|(m, c)| {
                let cs = self.crit_sum(*m).map(|v| v.to_string()).unwrap_or_default();
                format!("{},{},{},{}", self.t, m, c, cs)
            })
            .collect()
    }

    fn add(&mut self, m: PrimitivityRank, mult: u64, crit: usize) {
        *self.counts.entry(m).or_insert(0) += mult;
        if let Some(cs) = self.crit_sums.as_mut() {
            *cs.entry(m).or_insert(0) += mult * crit as u64;
        }
    }
}

#[derive(Serialize)]
struct HistogramRow {
    m: PrimitivityRank,
    count: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    crit_sum: Option<u64>,
}

impl Serialize for RankHistogram {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<HistogramRow> = self
            .counts
            .iter()
            .map(|(m, c)| HistogramRow {
                m: *m,
                count: *c,
                crit_sum: self.crit_sum(*m),
            })
            .collect();
        let mut st = s.serialize_struct("RankHistogram", 3)?;
        st.serialize_field("t", &self.t)?;
        st.serialize_field("total", &self.total())?;
        st.serialize_field("rows", &rows)?;
        st.end()
    }
}

/// Cyclic reduction of `w`, rotated and possibly inverted to the smallest
/// letter sequence. Primitivity rank and the number of critical subgroups
/// are invariant under this normalisation.
pub fn cyclic_canonical(w: &ReducedWord) -> ReducedWord {
    let l = w.letters();
    let (mut i, mut j) = (0, l.len());
    while j >= i + 2 && l[i] == l[j - 1].inv() {
        i += 1;
        j -= 1;
    }
    let core = &l[i..j];
    let inv: Vec<Letter> = core.iter().rev().map(|x| x.inv()).collect();
    let key = |s: &[Letter]| s.iter().map(|x| x.ordinal()).collect::<Vec<_>>();
    let mut best: Vec<Letter> = core.to_vec();
    for seq in [core, &inv[..]] {
        for r in 0..seq.len() {
            let cand: Vec<Letter> = seq[r..].iter().chain(&seq[..r]).copied().collect();
            if key(&cand) < key(&best) {
                best = cand;
            }
        }
    }
    ReducedWord::new(best, w.alphabet_size()).expect("rotations of cyclically reduced words are reduced")
}

fn classify_unique(words: Vec<ReducedWord>, guards: &Guards) -> Result<HashMap<ReducedWord, (PrimitivityRank, usize)>> {
    words
        .into_par_iter()
        .map(|w| {
            let r = primitivity_rank(&w, guards)?;
            Ok((w, (r.pi, r.crit.len())))
        })
        .collect()
}

/// Histogram of `π` over all words of length `t` in `F_k`; raw words are
/// classified through their reduced form.
pub fn classify_words(k: usize, t: usize, mode: WordMode, with_crit: bool, guards: &Guards) -> Result<RankHistogram> {
    let words = enumerate_words(k, t, mode, guards)?;
    let mut multiplicity: HashMap<ReducedWord, u64> = HashMap::new();
    for w in words {
        let canon = cyclic_canonical(&w.reduce());
        *multiplicity.entry(canon).or_insert(0) += 1;
    }
    let classes = classify_unique(multiplicity.keys().cloned().collect(), guards)?;
    let mut hist = RankHistogram {
        t,
        counts: BTreeMap::new(),
        crit_sums: with_crit.then(BTreeMap::new),
    };
    for (w, mult) in multiplicity {
        let (pi, crit) = classes[&w];
        hist.add(pi, mult, crit);
    }
    Ok(hist)
}

/// Closed paths of length `t` in the base, as (start vertex, letters).
pub fn closed_paths(base: &BaseGraph, t: usize, guards: &Guards) -> Result<Vec<(usize, Vec<Letter>)>> {
    let total = trace_power(&base.multigraph(), t);
    let count: Option<u64> = total.try_into().ok();
    guards.check_words(count, "closed path enumeration")?;
    let darts: Vec<Vec<(Letter, usize)>> = (0..base.num_vertices()).map(|v| base.darts_from(v)).collect();
    let mut out = Vec::new();
    let mut stack = Vec::new();
    fn rec(
        darts: &[Vec<(Letter, usize)>],
        start: usize,
        at: usize,
        left: usize,
        stack: &mut Vec<Letter>,
        out: &mut Vec<(usize, Vec<Letter>)>,
    ) {
        if left == 0 {
            if at == start {
                out.push((start, stack.clone()));
            }
            return;
        }
        for &(l, to) in &darts[at] {
            stack.push(l);
            rec(darts, start, to, left - 1, stack, out);
            stack.pop();
        }
    }
    for v in 0..base.num_vertices() {
        rec(&darts, v, v, t, &mut stack, &mut out);
    }
    Ok(out)
}

/// The core graph of `π1(Ω, v)` inside `F_{|E|}`: the base with hanging
/// trees away from `v` removed.
pub fn base_core_graph(base: &BaseGraph, v: usize) -> Result<CoreGraph> {
    let edges: Vec<Edge> = base
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &(a, b))| Edge::new(a, b, e + 1))
        .collect();
    let (g, _) = CoreGraph::from_edges(base.num_edges().max(1), base.num_vertices(), &edges, v)?;
    Ok(g.trimmed())
}

#[derive(Debug, Clone, Serialize)]
pub struct CycleReport {
    pub histogram: RankHistogram,
    /// Paths whose critical subgroups do not all map into the base pointed
    /// at the path's start.
    pub restriction_violations: u64,
    /// Paths whose rank falls outside `{0, ..., rk Ω, ∞}`.
    pub range_violations: u64,
}

/// Histogram of `π` over the closed paths of length `t` in the base.
pub fn classify_cycles(base: &BaseGraph, t: usize, guards: &Guards) -> Result<CycleReport> {
    let paths = closed_paths(base, t, guards)?;
    let k = base.num_edges().max(1);
    let mut multiplicity: HashMap<(usize, ReducedWord), u64> = HashMap::new();
    for (v, letters) in paths {
        let w = RawWord::new(letters, k)?.reduce();
        *multiplicity.entry((v, w)).or_insert(0) += 1;
    }
    let mut words: Vec<ReducedWord> = multiplicity.keys().map(|(_, w)| w.clone()).collect();
    words.sort_by_key(|w| w.letters().iter().map(|l| l.ordinal()).collect::<Vec<_>>());
    words.dedup();
    let reports: HashMap<ReducedWord, PrimitivityReport> = words
        .into_par_iter()
        .map(|w| primitivity_rank(&w, guards).map(|r| (w, r)))
        .collect::<Result<_>>()?;
    let cores = (0..base.num_vertices())
        .map(|v| base_core_graph(base, v))
        .collect::<Result<Vec<_>>>()?;
    let mut hist = RankHistogram {
        t,
        counts: BTreeMap::new(),
        crit_sums: Some(BTreeMap::new()),
    };
    let (mut restriction_violations, mut range_violations) = (0, 0);
    for ((v, w), mult) in multiplicity {
        let r = &reports[&w];
        hist.add(r.pi, mult, r.crit.len());
        if r.pi.finite().is_some_and(|m| m > base.rank()) {
            range_violations += mult;
        }
        if r.pi.finite().is_some_and(|m| m >= 1) && r.crit.iter().any(|c| morphism(c, &cores[v]).is_none()) {
            restriction_violations += mult;
        }
    }
    Ok(CycleReport {
        histogram: hist,
        restriction_violations,
        range_violations,
    })
}

/// Reduced words of length `t` whose closed path at the basepoint of `gn`
/// traverses every edge at least twice.
pub fn trace_twice_count(gn: &CoreGraph, t: usize, guards: &Guards) -> Result<u64> {
    let edges = gn.num_edges();
    if t < 2 * edges {
        return Ok(0);
    }
    guards.check_words(word_count(gn.alphabet_size(), t, WordMode::Reduced), "walk enumeration")?;
    let mut counts = vec![0u32; edges];
    let letters: Vec<Letter> = (1..=gn.alphabet_size())
        .flat_map(|l| [Letter::pos(l), Letter::neg(l)])
        .collect();
    struct Walk<'a> {
        g: &'a CoreGraph,
        letters: &'a [Letter],
        counts: &'a mut Vec<u32>,
        deficit: usize,
    }
    fn rec(s: &mut Walk<'_>, at: usize, prev: Option<Letter>, left: usize) -> u64 {
        if s.deficit > left {
            return 0;
        }
        if left == 0 {
            return (at == 0) as u64;
        }
        let mut total = 0;
        for &l in s.letters {
            if prev == Some(l.inv()) {
                continue;
            }
            let Some((to, e)) = s.g.step(at, l) else { continue };
            s.counts[e] += 1;
            let helped = s.counts[e] <= 2;
            if helped {
                s.deficit -= 1;
            }
            total += rec(s, to, Some(l), left - 1);
            if helped {
                s.deficit += 1;
            }
            s.counts[e] -= 1;
        }
        total
    }
    let mut walk = Walk {
        g: gn,
        letters: &letters,
        counts: &mut counts,
        deficit: 2 * edges,
    };
    Ok(rec(&mut walk, 0, None, t))
}

/// Terms of the trace-method bound and their maximum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    pub c: f64,
    pub terms: Vec<f64>,
    pub bound: f64,
}

fn spec_from_terms(d: Option<u64>, rank: Option<usize>, rho: Option<f64>, c: f64, terms: Vec<f64>) -> BoundSpec {
    let bound = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    BoundSpec {
        d,
        rank,
        rho,
        c,
        terms,
        bound,
    }
}

/// Terms `c·g(-1), g(1), g(3)/c, …, g(2k-3)/c^{k-2}, d/c^{k-1}` with
/// `k = ⌈d/2⌉`, where `c = n^{1/t}` and `g` is the cogrowth map.
pub fn bound_evaluator(d: u64, c: f64) -> Result<BoundSpec> {
    if d < 3 {
        return Err(Error::invalid("the bound needs d >= 3"));
    }
    if c.is_nan() || c <= 1.0 {
        return Err(Error::invalid("c must exceed 1"));
    }
    let df = d as f64;
    let k = d.div_ceil(2) as i32;
    let mut terms = vec![c * cogrowth_g_unchecked(-1.0, df)];
    for m in 1..k {
        terms.push(cogrowth_g_unchecked((2 * m - 1) as f64, df) / c.powi(m - 1));
    }
    terms.push(df / c.powi(k - 1));
    Ok(spec_from_terms(Some(d), None, None, c, terms))
}

/// Terms `c·ρ, ρ, 3ρ/c, …, (2r-1)ρ/c^{r-1}` for a base of rank `r`.
pub fn general_bound_evaluator(rank: usize, rho: f64, c: f64) -> Result<BoundSpec> {
    if rank == 0 {
        return Err(Error::invalid("rank must be at least 1"));
    }
    if !(rho > 0.0) {
        return Err(Error::invalid("rho must be positive"));
    }
    if c.is_nan() || c < 1.0 {
        return Err(Error::invalid("c must be at least 1"));
    }
    let mut terms = vec![c * rho];
    for m in 1..=rank as i32 {
        terms.push((2 * m - 1) as f64 * rho / c.powi(m - 1));
    }
    Ok(spec_from_terms(None, Some(rank), Some(rho), c, terms))
}

/// Minimises a unimodal function of `c` over `[lo, hi]`.
fn ternary_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if f(a) <= f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    0.5 * (lo + hi)
}

/// The `c > 1` minimising the largest term of [`bound_evaluator`].
pub fn optimize_bound(d: u64) -> Result<BoundSpec> {
    bound_evaluator(d, 2.0)?;
    let c = ternary_min(|c| bound_evaluator(d, c).map_or(f64::INFINITY, |s| s.bound), 1.0 + 1e-12, 3.0);
    bound_evaluator(d, c)
}

/// The `c >= 1` minimising the largest term of [`general_bound_evaluator`].
pub fn optimize_general_bound(rank: usize, rho: f64) -> Result<BoundSpec> {
    general_bound_evaluator(rank, rho, 1.0)?;
    let c = ternary_min(
        |c| general_bound_evaluator(rank, rho, c).map_or(f64::INFINITY, |s| s.bound),
        1.0,
        3.0,
    );
    general_bound_evaluator(rank, rho, c)
}

/// Exponential growth rate of `Σ |Crit(w)|` over words of length `t` in
/// `F_k` with `π(w) = m`, for the bouquet; `None` for `m = ∞` and `k < 2`.
pub fn bouquet_growth_rate(k: usize, m: PrimitivityRank) -> Option<f64> {
    let q = (2 * k - 1) as f64;
    match m {
        PrimitivityRank::Finite(0) => Some(2.0 * q.sqrt()),
        PrimitivityRank::Finite(m) if m <= k => {
            let a = (2 * m - 1) as f64;
            Some(if a <= q.sqrt() { 2.0 * q.sqrt() } else { a + q / a })
        }
        PrimitivityRank::Infinite if k >= 2 => Some(2.0 * k as f64 - 2.0 + 2.0 / (2.0 * k as f64 - 3.0)),
        _ => None,
    }
}
