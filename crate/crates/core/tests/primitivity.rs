use ramlab_core::core_graph::CoreGraph;
use ramlab_core::primitivity::{is_algebraic_extension, is_primitive, primitivity_rank, traces_every_edge_twice, PrimitivityRank};
use ramlab_core::words::{enumerate_words, WordMode};
use ramlab_core::{Guards, ReducedWord};

fn w(s: &str, k: usize) -> ReducedWord {
    ReducedWord::parse(s, Some(k)).unwrap()
}

#[test]
fn ranks_of_named_words() {
    let g = Guards::default();
    let r = primitivity_rank(&w("aaa", 1), &g).unwrap();
    assert_eq!(r.pi, PrimitivityRank::Finite(1));
    assert_eq!(r.crit, vec![CoreGraph::bouquet(1)]);
    assert_eq!(primitivity_rank(&w("ab", 2), &g).unwrap().pi, PrimitivityRank::Infinite);
    assert!(primitivity_rank(&w("ab", 2), &g).unwrap().crit.is_empty());
    let e = primitivity_rank(&ReducedWord::identity(2), &g).unwrap();
    assert_eq!(e.pi, PrimitivityRank::Finite(0));
    assert_eq!(e.crit, vec![CoreGraph::trivial(2)]);
}

#[test]
fn primitivity_inside_a_subgroup() {
    let g = Guards::default();
    assert!(is_primitive(&w("a", 2), &CoreGraph::bouquet(2), &g).unwrap());
    assert!(!is_primitive(&w("aa", 1), &CoreGraph::bouquet(1), &g).unwrap());
    assert!(is_primitive(&w("abb", 2), &CoreGraph::bouquet(2), &g).unwrap());
    let x1 = CoreGraph::bouquet_of(2, &[1]);
    assert!(is_primitive(&w("b", 2), &x1, &g).is_err());
}

#[test]
fn algebraic_extension_examples() {
    let g = Guards::default();
    let sq = CoreGraph::from_words(1, &[w("aa", 1)]).unwrap();
    assert!(is_algebraic_extension(&sq, &sq, &g).unwrap());
    assert!(is_algebraic_extension(&sq, &CoreGraph::bouquet(1), &g).unwrap());
    let x1 = CoreGraph::from_words(2, &[w("a", 2)]).unwrap();
    assert!(!is_algebraic_extension(&x1, &CoreGraph::bouquet(2), &g).unwrap());
}

#[test]
fn report_invariants_over_short_words() {
    let g = Guards::default();
    for t in 1..=6 {
        for raw in enumerate_words(2, t, WordMode::Reduced, &g).unwrap() {
            let word = raw.reduce();
            let r = primitivity_rank(&word, &g).unwrap();
            match r.pi {
                PrimitivityRank::Infinite => assert!(r.crit.is_empty()),
                PrimitivityRank::Finite(m) => {
                    assert!((1..=2).contains(&m), "{word}: π = {m}");
                    let root = CoreGraph::from_words(2, &[word.clone()]).unwrap();
                    for n in &r.crit {
                        assert_eq!(n.rank(), m);
                        assert!(n.membership(&word));
                        assert!(is_algebraic_extension(&root, n, &g).unwrap());
                        assert!(traces_every_edge_twice(&word, n).unwrap());
                    }
                }
            }
        }
    }
}

#[test]
fn proper_powers_have_rank_one() {
    let g = Guards::default();
    for base in ["ab", "aB", "abAb"] {
        for p in 2..=3 {
            let word = w(base, 2).pow(p);
            assert_eq!(primitivity_rank(&word, &g).unwrap().pi, PrimitivityRank::Finite(1), "{word}");
        }
    }
}

#[test]
fn rank_serialises_as_number_or_inf() {
    assert_eq!(serde_json::to_string(&PrimitivityRank::Finite(2)).unwrap(), "2");
    assert_eq!(serde_json::to_string(&PrimitivityRank::Infinite).unwrap(), "\"inf\"");
    assert_eq!(PrimitivityRank::Infinite.to_string(), "inf");
}
