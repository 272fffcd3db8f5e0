use std::collections::BTreeMap;

use ramlab_core::core_graph::CoreGraph;
use ramlab_core::covers::BaseGraph;
use ramlab_core::growth::{
    bound_evaluator, classify_cycles, classify_words, cyclic_canonical, general_bound_evaluator, optimize_bound,
    optimize_general_bound, trace_twice_count,
};
use ramlab_core::spectral::{trace_power, tree_closed_walks};
use ramlab_core::words::{enumerate_words, WordMode};
use ramlab_core::{Guards, PrimitivityRank, ReducedWord};

const INF: PrimitivityRank = PrimitivityRank::Infinite;

fn fin(m: usize) -> PrimitivityRank {
    PrimitivityRank::Finite(m)
}

fn binomial(n: u64, k: u64) -> u64 {
    (1..=k).fold(1, |acc, i| acc * (n - k + i) / i)
}

#[test]
fn totals_and_identity_counts() {
    let g = Guards::default();
    for t in 0..=6usize {
        let raw = classify_words(2, t, WordMode::Raw, false, &g).unwrap();
        assert_eq!(raw.total(), 4u64.pow(t as u32));
        assert_eq!(raw.count(fin(0)) as u32, u32::try_from(tree_closed_walks(4, t)).unwrap());
        let red = classify_words(2, t, WordMode::Reduced, false, &g).unwrap();
        let expect = if t == 0 { 1 } else { 4 * 3u64.pow(t as u32 - 1) };
        assert_eq!(red.total(), expect);
    }
    let red2 = classify_words(2, 2, WordMode::Reduced, false, &g).unwrap();
    assert_eq!(red2.counts, BTreeMap::from([(fin(1), 4), (INF, 8)]));
}

#[test]
fn crit_sums_dominate_counts() {
    let g = Guards::default();
    for t in 1..=6 {
        let h = classify_words(2, t, WordMode::Reduced, true, &g).unwrap();
        for (m, &c) in &h.counts {
            if *m != INF && c > 0 {
                assert!(h.crit_sum(*m).unwrap() >= c);
            }
        }
        assert!(h.counts.keys().all(|m| *m == INF || m.finite().unwrap() <= 2));
    }
}

#[test]
fn memo_key_is_a_conjugacy_invariant() {
    let g = Guards::default();
    for raw in enumerate_words(2, 5, WordMode::Reduced, &g).unwrap() {
        let w = raw.reduce();
        let u = ReducedWord::parse("aB", Some(2)).unwrap();
        assert_eq!(cyclic_canonical(&w.conjugate_by(&u)), cyclic_canonical(&w));
        assert_eq!(cyclic_canonical(&w.inverse()), cyclic_canonical(&w));
    }
}

#[test]
fn cycles_on_bases() {
    let g = Guards::default();
    for t in 1..=5 {
        let bouquet = classify_cycles(&BaseGraph::bouquet(2), t, &g).unwrap();
        let words = classify_words(2, t, WordMode::Raw, false, &g).unwrap();
        assert_eq!(bouquet.histogram.counts, words.counts);
    }
    for t in [2u64, 4, 6, 8] {
        let one = classify_cycles(&BaseGraph::bouquet(1), t as usize, &g).unwrap();
        assert_eq!(one.histogram.count(fin(0)), binomial(t, t / 2));
    }
    let theta = BaseGraph::new(2, vec![(0, 1), (0, 1), (0, 1)]).unwrap();
    for t in 1..=6 {
        let r = classify_cycles(&theta, t, &g).unwrap();
        let cp: u64 = trace_power(&theta.multigraph(), t).try_into().unwrap();
        assert_eq!(r.histogram.total(), cp);
        assert_eq!((r.range_violations, r.restriction_violations), (0, 0));
    }
}

#[test]
fn trace_twice_counts() {
    let g = Guards::default();
    let loop1 = CoreGraph::bouquet(1);
    assert_eq!(trace_twice_count(&loop1, 2, &g).unwrap(), 2);
    assert_eq!(trace_twice_count(&loop1, 1, &g).unwrap(), 0);
    let b2 = CoreGraph::bouquet(2);
    assert_eq!(trace_twice_count(&b2, 3, &g).unwrap(), 0);
    // brute force: reduced words of length 4 using each generator at least twice
    let brute = enumerate_words(2, 4, WordMode::Reduced, &g)
        .unwrap()
        .filter(|w| {
            let r = w.reduce();
            (1..=2).all(|i| r.letters().iter().filter(|l| l.index() == i).count() >= 2)
        })
        .count() as u64;
    assert_eq!(trace_twice_count(&b2, 4, &g).unwrap(), brute);
}

#[test]
fn bound_table_rows() {
    let s = bound_evaluator(4, 1.075).unwrap();
    assert!((s.bound - 3.723).abs() < 2e-3);
    assert_eq!(s.terms.len(), 3);
    assert!((optimize_bound(6).unwrap().bound - 4.933).abs() < 2e-3);
    let c = (2.0 / (5.0 * 25f64.sqrt())).exp();
    let s26 = bound_evaluator(26, c).unwrap();
    assert!(s26.terms.iter().all(|&x| x < 10.835));
    assert!(bound_evaluator(2, 1.1).is_err());
    assert!(bound_evaluator(4, 1.0).is_err());
}

#[test]
fn general_bound() {
    let rho = 2.0 * 3f64.sqrt();
    for rank in 2..=6 {
        let s = general_bound_evaluator(rank, rho, 3f64.sqrt()).unwrap();
        assert!((s.bound - 3f64.sqrt() * rho).abs() < 1e-12);
    }
    let one = optimize_general_bound(1, rho).unwrap();
    assert!((one.bound - rho).abs() < 1e-9);
    // both evaluators agree once d/2 terms are matched to rank 2 with ρ = 2√3
    let d4 = bound_evaluator(4, 1.2).unwrap();
    let r2 = general_bound_evaluator(2, rho, 1.2).unwrap();
    assert!((d4.terms[0] - r2.terms[0]).abs() < 1e-12);
    assert!((d4.terms[1] - r2.terms[1]).abs() < 1e-12);
}

#[test]
fn raw_ratio_trend() {
    // squared rates for k = 2: 12 for m = 0, 1 and 16 for m = 2, inf
    let g = Guards::default();
    let hs: Vec<_> = (0..=8).map(|t| classify_words(2, t, WordMode::Raw, false, &g).unwrap()).collect();
    let ratio = |m: PrimitivityRank, t: usize| hs[t].count(m) as f64 / hs[t - 2].count(m) as f64;
    for (m, rate) in [(fin(0), 12.0), (fin(1), 12.0), (INF, 16.0)] {
        let r = ratio(m, 8);
        assert!((r / rate - 1.0).abs() <= 0.25, "{m:?}: {r}");
    }
    // m = 2 approaches 16 from above, slowly
    let twos: Vec<f64> = (6..=8).map(|t| ratio(fin(2), t)).collect();
    assert!(twos.windows(2).all(|p| p[1] < p[0]) && twos[2] > 16.0, "{twos:?}");
}
