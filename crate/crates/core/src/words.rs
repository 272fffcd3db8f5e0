//! Letters, free-group words, permutations and fixed points.
//!
//! Words are written `a`, `A`, `b`, `B`, ... where `a` is the first
//! generator and the uppercase letter its inverse. Permutations act on
//! `0..n` internally and compose left to right: the word `x1 x2` evaluated
//! at `(s1, s2)` sends `i` to `s2(s1(i))`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::guard::Guards;

/// A generator `x_index` or its inverse. Indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    index: u16,
    inverse: bool,
}

impl Letter {
    pub fn new(index: usize, sign: i8) -> Result<Self> {
        if index == 0 || index > u16::MAX as usize {
            return Err(Error::invalid(format!("letter index {index} must be in 1..=65535")));
        }
        let inverse = match sign {
            1 => false,
            -1 => true,
            _ => return Err(Error::invalid(format!("letter sign must be +1 or -1, got {sign}"))),
        };
        Ok(Letter { index: index as u16, inverse })
    }

    /// `x_index`. Panics if `index` is zero.
    pub fn pos(index: usize) -> Self {
        Letter::new(index, 1).expect("generator index must be positive")
    }

    /// `x_index^-1`. Panics if `index` is zero.
    pub fn neg(index: usize) -> Self {
        Letter::new(index, -1).expect("generator index must be positive")
    }

    pub fn index(self) -> usize {
        self.index as usize
    }

    pub fn sign(self) -> i8 {
        if self.inverse {
            -1
        } else {
            1
        }
    }

    pub fn is_inverse(self) -> bool {
        self.inverse
    }

    pub fn inv(self) -> Self {
        Letter {
            index: self.index,
            inverse: !self.inverse,
        }
    }

    /// Position in the enumeration order `x1, x1^-1, x2, x2^-1, ...`.
    pub fn ordinal(self) -> usize {
        2 * (self.index as usize - 1) + self.inverse as usize
    }

    pub fn from_ordinal(ordinal: usize) -> Self {
        Letter {
            index: (ordinal / 2 + 1) as u16,
            inverse: ordinal % 2 == 1,
        }
    }

    pub fn to_char(self) -> Option<char> {
        if self.index > 26 {
            return None;
        }
        let base = if self.inverse { b'A' } else { b'a' };
        Some((base + (self.index as u8 - 1)) as char)
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'a'..='z' => Some(Letter::pos((c as u8 - b'a') as usize + 1)),
            'A'..='Z' => Some(Letter::neg((c as u8 - b'A') as usize + 1)),
            _ => None,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_char() {
            Some(c) => write!(f, "{c}"),
            None if self.inverse => write!(f, "x{}^-1", self.index),
            None => write!(f, "x{}", self.index),
        }
    }
}

fn check_alphabet(letters: &[Letter], alphabet_size: usize) -> Result<()> {
    if alphabet_size == 0 {
        return Err(Error::invalid("alphabet size must be at least 1"));
    }
    match letters.iter().find(|l| l.index() > alphabet_size) {
        Some(l) => Err(Error::LetterOutOfRange {
            index: l.index(),
            alphabet_size,
        }),
        None => Ok(()),
    }
}

fn parse_letters(s: &str) -> Result<Vec<Letter>> {
    let s = s.trim();
    if s.is_empty() || s == "1" || s == "ε" {
        return Ok(Vec::new());
    }
    s.chars()
        .map(|c| Letter::from_char(c).ok_or_else(|| Error::invalid(format!("unexpected character {c:?} in word"))))
        .collect()
}

fn write_letters(letters: &[Letter], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if letters.is_empty() {
        return write!(f, "1");
    }
    for l in letters {
        write!(f, "{l}")?;
    }
    Ok(())
}

/// A word over `alphabet_size` generators, possibly containing cancelling pairs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RawWord {
    letters: Vec<Letter>,
    alphabet_size: usize,
}

impl RawWord {
    pub fn new(letters: Vec<Letter>, alphabet_size: usize) -> Result<Self> {
        check_alphabet(&letters, alphabet_size)?;
        Ok(RawWord { letters, alphabet_size })
    }

    /// Parses `a`/`A`/`b`/... text; the alphabet is the largest letter used
    /// unless `alphabet_size` is given.
    pub fn parse(s: &str, alphabet_size: Option<usize>) -> Result<Self> {
        let letters = parse_letters(s)?;
        let k = alphabet_size.unwrap_or_else(|| letters.iter().map(|l| l.index()).max().unwrap_or(1));
        RawWord::new(letters, k)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn reduce(&self) -> ReducedWord {
        reduce(self)
    }
}

impl fmt::Display for RawWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_letters(&self.letters, f)
    }
}

/// A freely reduced word; the empty word is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReducedWord {
    letters: Vec<Letter>,
    alphabet_size: usize,
}

impl ReducedWord {
    /// Builds a reduced word, rejecting input with adjacent cancelling letters.
    pub fn new(letters: Vec<Letter>, alphabet_size: usize) -> Result<Self> {
        check_alphabet(&letters, alphabet_size)?;
        if letters.windows(2).any(|p| p[0] == p[1].inv()) {
            return Err(Error::invalid("word is not reduced"));
        }
        Ok(ReducedWord { letters, alphabet_size })
    }

    pub fn identity(alphabet_size: usize) -> Self {
        ReducedWord {
            letters: Vec::new(),
            alphabet_size: alphabet_size.max(1),
        }
    }

    /// Parses and reduces.
    pub fn parse(s: &str, alphabet_size: Option<usize>) -> Result<Self> {
        Ok(RawWord::parse(s, alphabet_size)?.reduce())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Self {
        ReducedWord {
            letters: self.letters.iter().rev().map(|l| l.inv()).collect(),
            alphabet_size: self.alphabet_size,
        }
    }

    /// Same letters over a larger alphabet.
    pub fn with_alphabet(&self, alphabet_size: usize) -> Result<Self> {
        ReducedWord::new(self.letters.clone(), alphabet_size)
    }

    /// Reduced form of the concatenation.
    pub fn concat(&self, other: &ReducedWord) -> ReducedWord {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        reduce_letters(letters, self.alphabet_size.max(other.alphabet_size))
    }

    pub fn pow(&self, p: u32) -> ReducedWord {
        let mut out = ReducedWord::identity(self.alphabet_size);
        for _ in 0..p {
            out = out.concat(self);
        }
        out
    }

    /// Reduced form of `u w u^-1`.
    pub fn conjugate_by(&self, u: &ReducedWord) -> ReducedWord {
        u.concat(self).concat(&u.inverse())
    }

    pub fn as_raw(&self) -> RawWord {
        RawWord {
            letters: self.letters.clone(),
            alphabet_size: self.alphabet_size,
        }
    }

    /// Generators that occur in the word, sorted.
    pub fn letters_used(&self) -> Vec<usize> {
        let mut used: Vec<usize> = self.letters.iter().map(|l| l.index()).collect();
        used.sort_unstable();
        used.dedup();
        used
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_letters(&self.letters, f)
    }
}

impl FromStr for ReducedWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ReducedWord::parse(s, None)
    }
}

fn reduce_letters(letters: Vec<Letter>, alphabet_size: usize) -> ReducedWord {
    let mut stack: Vec<Letter> = Vec::with_capacity(letters.len());
    for l in letters {
        if stack.last() == Some(&l.inv()) {
            stack.pop();
        } else {
            stack.push(l);
        }
    }
    ReducedWord {
        letters: stack,
        alphabet_size,
    }
}

/// Free reduction: repeatedly deletes `x x^-1` and `x^-1 x`.
pub fn reduce(raw: &RawWord) -> ReducedWord {
    reduce_letters(raw.letters.clone(), raw.alphabet_size)
}

/// A bijection of `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Permutation {
    images: Vec<u32>,
}

impl TryFrom<Vec<u32>> for Permutation {
    type Error = Error;

    fn try_from(images: Vec<u32>) -> Result<Self> {
        Permutation::from_images(images)
    }
}

impl From<Permutation> for Vec<u32> {
    fn from(p: Permutation) -> Vec<u32> {
        p.images
    }
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n as u32).collect(),
        }
    }

    /// 0-based images; fails unless they form a bijection.
    pub fn from_images(images: Vec<u32>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            let x = x as usize;
            if x >= n || seen[x] {
                return Err(Error::invalid("images do not form a permutation"));
            }
            seen[x] = true;
        }
        Ok(Permutation { images })
    }

    /// Builds a permutation of `0..n` from disjoint cycles given in 1-based notation.
    pub fn from_cycles(n: usize, cycles: &[&[u32]]) -> Result<Self> {
        let mut images: Vec<u32> = (0..n as u32).collect();
        for cycle in cycles {
            for (i, &a) in cycle.iter().enumerate() {
                let b = cycle[(i + 1) % cycle.len()];
                if a == 0 || b == 0 || a as usize > n || b as usize > n {
                    return Err(Error::invalid("cycle entries must be in 1..=n"));
                }
                images[a as usize - 1] = b - 1;
            }
        }
        Permutation::from_images(images)
    }

    /// Uniform permutation by Fisher-Yates (swap position `i` with a uniform
    /// `j <= i`, for `i = n-1` down to `1`).
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut images: Vec<u32> = (0..n as u32).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            images.swap(i, j);
        }
        Permutation { images }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.images[i] as usize
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u32; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x as usize] = i as u32;
        }
        Permutation { images: inv }
    }

    /// `self` followed by `next`: `i -> next(self(i))`.
    pub fn then(&self, next: &Permutation) -> Result<Self> {
        if self.len() != next.len() {
            return Err(Error::SizeMismatch {
                expected: self.len(),
                got: next.len(),
            });
        }
        Ok(Permutation {
            images: self.images.iter().map(|&x| next.images[x as usize]).collect(),
        })
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    pub fn fixed_points(&self) -> usize {
        fixed_points(self)
    }

    /// Cycles as 0-based index lists, each starting at its smallest element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cycle.push(i);
                i = self.apply(i);
            }
            out.push(cycle);
        }
        out
    }

    /// `n - #cycles`: the minimal number of transpositions giving `self`.
    pub fn norm(&self) -> usize {
        self.len() - self.cycles().len()
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles: Vec<_> = self.cycles().into_iter().filter(|c| c.len() > 1).collect();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for c in cycles {
            let parts: Vec<String> = c.iter().map(|i| (i + 1).to_string()).collect();
            write!(f, "({})", parts.join(" "))?;
        }
        Ok(())
    }
}

/// `|{i : p(i) = i}|`.
pub fn fixed_points(p: &Permutation) -> usize {
    p.images.iter().enumerate().filter(|&(i, &x)| i as u32 == x).count()
}

fn check_sigmas(alphabet_size: usize, sigmas: &[Permutation]) -> Result<usize> {
    if sigmas.len() != alphabet_size {
        return Err(Error::invalid(format!(
            "word over {alphabet_size} generators needs {alphabet_size} permutations, got {}",
            sigmas.len()
        )));
    }
    let n = sigmas.first().map_or(0, |s| s.len());
    if let Some(s) = sigmas.iter().find(|s| s.len() != n) {
        return Err(Error::SizeMismatch { expected: n, got: s.len() });
    }
    Ok(n)
}

/// `w(s_1, ..., s_k)` under left-to-right composition.
pub fn evaluate_word(w: &RawWord, sigmas: &[Permutation]) -> Result<Permutation> {
    let n = check_sigmas(w.alphabet_size, sigmas)?;
    let inverses: Vec<Permutation> = sigmas.iter().map(Permutation::inverse).collect();
    let mut images: Vec<u32> = (0..n as u32).collect();
    for l in &w.letters {
        let p = if l.is_inverse() { &inverses[l.index() - 1] } else { &sigmas[l.index() - 1] };
        for x in images.iter_mut() {
            *x = p.images[*x as usize];
        }
    }
    Ok(Permutation { images })
}

/// Fixed points of `w(s_1, ..., s_k)` given the inverses, without building
/// the product permutation.
pub(crate) fn word_fixed_points(letters: &[Letter], sigmas: &[Permutation], inverses: &[Permutation]) -> usize {
    let n = sigmas.first().map_or(0, |s| s.len());
    (0..n)
        .filter(|&start| {
            let mut i = start;
            for l in letters {
                let p = if l.is_inverse() { &inverses[l.index() - 1] } else { &sigmas[l.index() - 1] };
                i = p.images[i] as usize;
            }
            i == start
        })
        .count()
}

/// Raw words (all of `(X ∪ X^-1)^t`) or reduced words of a fixed length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WordMode {
    Raw,
    Reduced,
}

impl FromStr for WordMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(WordMode::Raw),
            "reduced" => Ok(WordMode::Reduced),
            _ => Err(Error::invalid(format!("unknown word mode {s:?} (expected raw or reduced)"))),
        }
    }
}

/// Number of words the enumeration yields, or `None` on overflow.
pub fn word_count(k: usize, t: usize, mode: WordMode) -> Option<u64> {
    let two_k = 2 * k as u64;
    match (mode, t) {
        (_, 0) => Some(1),
        (WordMode::Raw, _) => two_k.checked_pow(t as u32),
        (WordMode::Reduced, _) => two_k.checked_mul((two_k - 1).checked_pow(t as u32 - 1)?),
    }
}

/// Lexicographic enumeration of words of length `t` over `k` generators,
/// ordered by letter ordinal `x1 < x1^-1 < x2 < x2^-1 < ...`.
#[derive(Debug, Clone)]
pub struct WordIter {
    k: usize,
    t: usize,
    mode: WordMode,
    // ordinals; `None` once exhausted
    current: Option<Vec<usize>>,
}

impl WordIter {
    fn first(k: usize, t: usize, mode: WordMode) -> Option<Vec<usize>> {
        let mut w = Vec::with_capacity(t);
        for i in 0..t {
            // smallest ordinal not cancelling the previous letter
            let mut o = 0;
            if mode == WordMode::Reduced && i > 0 && Letter::from_ordinal(o) == Letter::from_ordinal(w[i - 1]).inv() {
                o += 1;
            }
            if o >= 2 * k {
                return None;
            }
            w.push(o);
        }
        Some(w)
    }

    fn advance(&mut self) {
        let Some(w) = self.current.as_mut() else { return };
        let two_k = 2 * self.k;
        let cancels = |prev: usize, o: usize| Letter::from_ordinal(o) == Letter::from_ordinal(prev).inv();
        let mut pos = self.t;
        loop {
            if pos == 0 {
                self.current = None;
                return;
            }
            pos -= 1;
            let mut o = w[pos] + 1;
            if self.mode == WordMode::Reduced && pos > 0 && o < two_k && cancels(w[pos - 1], o) {
                o += 1;
            }
            if o < two_k {
                w[pos] = o;
                break;
            }
        }
        for i in pos + 1..self.t {
            let mut o = 0;
            if self.mode == WordMode::Reduced && cancels(w[i - 1], o) {
                o += 1;
            }
            w[i] = o;
        }
    }
}

impl Iterator for WordIter {
    type Item = RawWord;

    fn next(&mut self) -> Option<RawWord> {
        let ordinals = self.current.as_ref()?;
        let word = RawWord {
            letters: ordinals.iter().map(|&o| Letter::from_ordinal(o)).collect(),
            alphabet_size: self.k,
        };
        self.advance();
        Some(word)
    }
}

/// All raw or reduced words of length `t` over `k` generators, guarded by
/// [`Guards::word_limit`].
pub fn enumerate_words(k: usize, t: usize, mode: WordMode, guards: &Guards) -> Result<WordIter> {
    if k == 0 {
        return Err(Error::invalid("alphabet size must be at least 1"));
    }
    guards.check_words(word_count(k, t, mode), "word enumeration")?;
    Ok(WordIter {
        k,
        t,
        mode,
        current: WordIter::first(k, t, mode),
    })
}

/// Uniform random raw word of length `t`.
pub fn random_raw_word<R: Rng + ?Sized>(k: usize, t: usize, rng: &mut R) -> RawWord {
    RawWord {
        letters: (0..t).map(|_| Letter::from_ordinal(rng.gen_range(0..2 * k))).collect(),
        alphabet_size: k,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn raw(s: &str, k: usize) -> RawWord {
        RawWord::parse(s, Some(k)).unwrap()
    }

    #[test]
    fn reduce_examples() {
        assert!(raw("aA", 1).reduce().is_identity());
        assert_eq!(raw("abBa", 2).reduce().to_string(), "aa");
        assert_eq!(raw("abBAab", 2).reduce().to_string(), "ab");
        assert_eq!(raw("", 2).reduce().to_string(), "1");
    }

    #[test]
    fn reduced_word_rejects_cancellation() {
        assert!(ReducedWord::new(vec![Letter::pos(1), Letter::neg(1)], 1).is_err());
        assert!(ReducedWord::new(vec![Letter::pos(3)], 2).is_err());
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(RawWord::parse("ab1", None).is_err());
        assert_eq!(RawWord::parse("aC", None).unwrap().alphabet_size(), 3);
    }

    #[test]
    fn evaluate_examples() {
        let s1 = Permutation::from_cycles(3, &[&[1, 2, 3]]).unwrap();
        let id = Permutation::identity(3);
        let w = raw("a", 2);
        assert_eq!(evaluate_word(&w, &[s1.clone(), id.clone()]).unwrap(), s1);
        let w = raw("aA", 2);
        assert!(evaluate_word(&w, &[s1.clone(), id.clone()]).unwrap().is_identity());
        let w = raw("ab", 2);
        assert_eq!(evaluate_word(&w, &[s1.clone(), id.clone()]).unwrap(), s1);
    }

    #[test]
    fn composition_is_left_to_right() {
        // s1 = (1 2), s2 = (2 3): ab sends 1 -> 2 -> 3
        let s1 = Permutation::from_cycles(3, &[&[1, 2]]).unwrap();
        let s2 = Permutation::from_cycles(3, &[&[2, 3]]).unwrap();
        let p = evaluate_word(&raw("ab", 2), &[s1, s2]).unwrap();
        assert_eq!(p.apply(0), 2);
    }

    #[test]
    fn evaluate_errors() {
        let w = raw("ab", 2);
        assert!(evaluate_word(&w, &[Permutation::identity(3)]).is_err());
        let err = evaluate_word(&w, &[Permutation::identity(3), Permutation::identity(4)]).unwrap_err();
        assert_eq!(err, Error::SizeMismatch { expected: 3, got: 4 });
    }

    #[test]
    fn fixed_point_examples() {
        assert_eq!(fixed_points(&Permutation::identity(5)), 5);
        assert_eq!(fixed_points(&Permutation::from_cycles(3, &[&[1, 2, 3]]).unwrap()), 0);
        assert_eq!(fixed_points(&Permutation::from_cycles(4, &[&[1, 2]]).unwrap()), 2);
    }

    #[test]
    fn permutation_norm_counts_cycles() {
        let p = Permutation::from_cycles(5, &[&[1, 2, 3], &[4, 5]]).unwrap();
        assert_eq!(p.norm(), 3);
        assert_eq!(p.to_string(), "(1 2 3)(4 5)");
        assert!(Permutation::from_images(vec![0, 0]).is_err());
    }

    #[test]
    fn enumeration_counts() {
        let g = Guards::default();
        assert_eq!(enumerate_words(2, 1, WordMode::Raw, &g).unwrap().count(), 4);
        assert_eq!(enumerate_words(2, 2, WordMode::Reduced, &g).unwrap().count(), 12);
        assert_eq!(enumerate_words(2, 3, WordMode::Raw, &g).unwrap().count(), 64);
        assert_eq!(enumerate_words(3, 0, WordMode::Reduced, &g).unwrap().count(), 1);
        assert_eq!(enumerate_words(1, 5, WordMode::Reduced, &g).unwrap().count(), 2);
    }

    #[test]
    fn reduced_enumeration_is_reduced_and_distinct() {
        let g = Guards::default();
        let words: Vec<_> = enumerate_words(2, 4, WordMode::Reduced, &g).unwrap().collect();
        assert_eq!(words.len() as u64, word_count(2, 4, WordMode::Reduced).unwrap());
        let mut set = std::collections::HashSet::new();
        for w in &words {
            assert_eq!(w.reduce().len(), 4);
            assert!(set.insert(w.clone()));
        }
    }

    #[test]
    fn enumeration_order_is_lexicographic() {
        let g = Guards::default();
        let words: Vec<String> = enumerate_words(2, 1, WordMode::Raw, &g).unwrap().map(|w| w.to_string()).collect();
        assert_eq!(words, ["a", "A", "b", "B"]);
        let words: Vec<String> =
            enumerate_words(1, 2, WordMode::Reduced, &g).unwrap().map(|w| w.to_string()).collect();
        assert_eq!(words, ["aa", "AA"]);
    }

    #[test]
    fn enumeration_guard() {
        let g = Guards {
            word_limit: 100,
            ..Guards::default()
        };
        assert!(enumerate_words(2, 4, WordMode::Raw, &g).unwrap_err().is_guard());
        assert!(enumerate_words(2, 3, WordMode::Raw, &g).is_ok());
    }

    #[test]
    fn fisher_yates_is_deterministic() {
        let a = Permutation::random(50, &mut ChaCha8Rng::seed_from_u64(9));
        let b = Permutation::random(50, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
        assert!(Permutation::from_images(a.images().to_vec()).is_ok());
    }

    #[test]
    fn mean_fixed_points_of_single_letter() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let trials = 20_000;
        let n = 20;
        let w = raw("a", 1);
        let total: usize = (0..trials)
            .map(|_| fixed_points(&evaluate_word(&w, &[Permutation::random(n, &mut rng)]).unwrap()))
            .sum();
        let mean = total as f64 / trials as f64;
        // variance of fixed points of a uniform permutation is 1
        assert!((mean - 1.0).abs() < 3.0 / (trials as f64).sqrt(), "mean {mean}");
    }
}
