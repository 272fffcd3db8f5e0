//! Primitivity rank, critical subgroups and algebraic extensions.
//!
//! Every w-critical subgroup is an algebraic extension of `<w>`, and
//! algebraic extensions are quotients, so the search for `pi(w)` runs over
//! the quotients of the core graph of `<w>` only. A quotient `J` witnesses
//! non-primitivity exactly when `<w>` is not a free factor of `J`, i.e. when
//! the X-distance differs from `rk J - 1`.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::core_graph::{enumerate_quotients, morphism, CoreGraph, QuotientCache};
use crate::error::{Error, Result};
use crate::guard::Guards;
use crate::words::ReducedWord;

/// `pi(w)`: a rank in `0..=k`, or infinity for primitive words.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrimitivityRank {
    Finite(usize),
    Infinite,
}

impl PrimitivityRank {
    pub fn finite(self) -> Option<usize> {
        match self {
            PrimitivityRank::Finite(m) => Some(m),
            PrimitivityRank::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == PrimitivityRank::Infinite
    }
}

impl fmt::Display for PrimitivityRank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrimitivityRank::Finite(m) => write!(f, "{m}"),
            PrimitivityRank::Infinite => f.write_str("inf"),
        }
    }
}

/// Finite ranks as integers, infinity as the string `"inf"`.
impl Serialize for PrimitivityRank {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PrimitivityRank::Finite(m) => s.serialize_u64(*m as u64),
            PrimitivityRank::Infinite => s.serialize_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrimitivityReport {
    pub pi: PrimitivityRank,
    /// The w-critical subgroups, sorted.
    pub crit: Vec<CoreGraph>,
}

/// Core graph of the cyclic subgroup `<w>`.
pub fn cyclic_graph(w: &ReducedWord) -> CoreGraph {
    CoreGraph::from_words(w.alphabet_size(), std::slice::from_ref(w)).expect("word letters lie in its alphabet")
}

pub fn primitivity_rank(w: &ReducedWord, guards: &Guards) -> Result<PrimitivityReport> {
    let k = w.alphabet_size();
    if w.is_identity() {
        return Ok(PrimitivityReport {
            pi: PrimitivityRank::Finite(0),
            crit: vec![CoreGraph::trivial(k)],
        });
    }
    let gw = cyclic_graph(w);
    let quotients = enumerate_quotients(&gw, guards)?;
    let mut best: Option<usize> = None;
    let mut crit = Vec::new();
    for q in quotients.iter().skip(1) {
        let rank = q.graph.rank();
        // quotient of a rank-1 graph: free factor iff distance == rk J - 1
        if q.norm + 1 == rank {
            continue;
        }
        match best {
            Some(b) if rank > b => {}
            Some(b) if rank == b => crit.push(q.graph.clone()),
            _ => {
                best = Some(rank);
                crit = vec![q.graph.clone()];
            }
        }
    }
    crit.sort();
    Ok(PrimitivityReport {
        pi: best.map_or(PrimitivityRank::Infinite, PrimitivityRank::Finite),
        crit,
    })
}

/// Whether `w` is primitive in the subgroup of `gj`, i.e. `<w>` is a free
/// factor of it.
pub fn is_primitive(w: &ReducedWord, gj: &CoreGraph, guards: &Guards) -> Result<bool> {
    if w.is_identity() {
        return Err(Error::invalid("the identity is never primitive"));
    }
    if !gj.membership(w) {
        return Err(Error::NotMember);
    }
    let k = gj.alphabet_size().max(w.alphabet_size());
    let gw = CoreGraph::from_words(k, std::slice::from_ref(w))?;
    let gj = gj.with_alphabet(k)?;
    QuotientCache::new(*guards).is_free_factor(&gw, &gj)
}

/// Whether `gj` is an algebraic extension of `gh`.
pub fn is_algebraic_extension(gh: &CoreGraph, gj: &CoreGraph, guards: &Guards) -> Result<bool> {
    is_algebraic_extension_cached(gh, gj, &mut QuotientCache::new(*guards))
}

/// As [`is_algebraic_extension`], sharing quotient enumerations.
///
/// Suppose `H <= L < J` with `L` a proper free factor of `J`. The image `M`
/// of the core graph of `H` inside that of `L` is a quotient of `H` and a
/// subgraph of `L`, hence a free factor of `L` and so of `J`, and `M != J`.
/// So it suffices to look for such `M` among the quotients of `H`.
pub fn is_algebraic_extension_cached(gh: &CoreGraph, gj: &CoreGraph, cache: &mut QuotientCache) -> Result<bool> {
    let m = morphism(gh, gj).ok_or(Error::NoMorphism)?;
    if !m.surjective {
        return Ok(false);
    }
    let quotients = cache.quotients(gh)?;
    for q in quotients.iter() {
        if &q.graph == gj || morphism(&q.graph, gj).is_none() {
            continue;
        }
        if cache.is_free_factor(&q.graph, gj)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether the closed path of `w` in `gn` uses every edge at least twice.
pub fn traces_every_edge_twice(w: &ReducedWord, gn: &CoreGraph) -> Result<bool> {
    match gn.trace(w) {
        Some((0, counts)) => Ok(counts.iter().all(|&c| c >= 2)),
        _ => Err(Error::NotMember),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str, k: usize) -> ReducedWord {
        ReducedWord::parse(s, Some(k)).unwrap()
    }

    fn pi(s: &str, k: usize) -> PrimitivityRank {
        primitivity_rank(&w(s, k), &Guards::default()).unwrap().pi
    }

    #[test]
    fn proper_powers_have_rank_one() {
        let r = primitivity_rank(&w("aaa", 2), &Guards::default()).unwrap();
        assert_eq!(r.pi, PrimitivityRank::Finite(1));
        assert_eq!(r.crit, vec![CoreGraph::bouquet_of(2, &[1])]);
    }

    #[test]
    fn table_examples() {
        assert_eq!(pi("aabb", 2), PrimitivityRank::Finite(2));
        assert_eq!(pi("abAB", 2), PrimitivityRank::Finite(2));
        assert_eq!(pi("aabbcc", 3), PrimitivityRank::Finite(3));
        assert_eq!(pi("ab", 2), PrimitivityRank::Infinite);
        assert_eq!(pi("", 2), PrimitivityRank::Finite(0));
    }

    #[test]
    fn identity_report() {
        let r = primitivity_rank(&ReducedWord::identity(2), &Guards::default()).unwrap();
        assert_eq!(r.crit, vec![CoreGraph::trivial(2)]);
    }

    #[test]
    fn primitive_in_subgroups() {
        let g = Guards::default();
        assert!(is_primitive(&w("a", 2), &CoreGraph::bouquet(2), &g).unwrap());
        assert!(!is_primitive(&w("aa", 1), &CoreGraph::bouquet(1), &g).unwrap());
        assert!(is_primitive(&w("abb", 2), &CoreGraph::bouquet(2), &g).unwrap());
        let x1 = CoreGraph::bouquet_of(2, &[1]);
        assert_eq!(is_primitive(&w("b", 2), &x1, &g), Err(Error::NotMember));
    }

    #[test]
    fn algebraic_extension_examples() {
        let g = Guards::default();
        let sq = cyclic_graph(&w("aa", 1));
        let x1 = CoreGraph::bouquet(1);
        assert!(is_algebraic_extension(&sq, &sq, &g).unwrap());
        assert!(is_algebraic_extension(&sq, &x1, &g).unwrap());
        let x1_in_f2 = CoreGraph::bouquet_of(2, &[1]);
        assert!(!is_algebraic_extension(&x1_in_f2, &CoreGraph::bouquet(2), &g).unwrap());
    }

    #[test]
    fn critical_subgroups_are_algebraic_and_doubly_traced() {
        let g = Guards::default();
        for s in ["aabb", "abAB", "aab", "aaBaB", "abab"] {
            let word = w(s, 2);
            let r = primitivity_rank(&word, &g).unwrap();
            let gw = cyclic_graph(&word);
            for c in &r.crit {
                assert_eq!(Some(c.rank()), r.pi.finite());
                assert!(c.membership(&word));
                assert!(is_algebraic_extension(&gw, c, &g).unwrap(), "{s}");
                assert!(traces_every_edge_twice(&word, c).unwrap(), "{s}");
            }
        }
    }

    #[test]
    fn rank_serialization() {
        assert_eq!(serde_json::to_string(&PrimitivityRank::Finite(2)).unwrap(), "2");
        assert_eq!(serde_json::to_string(&PrimitivityRank::Infinite).unwrap(), "\"inf\"");
    }
}
