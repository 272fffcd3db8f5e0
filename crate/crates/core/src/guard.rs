//! Resource guards for the exhaustive enumerations.

use crate::error::{Error, Result};

/// Environment variable that overrides the enumeration limits.
pub const GUARD_ENV: &str = "RAMLAB_GUARD_LIMIT";

/// Limits checked before any exhaustive enumeration allocates state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Guards {
    /// Maximum number of words in a single word enumeration.
    pub word_limit: u64,
    /// Maximum vertex count for set-partition enumeration (Bell-number guard).
    pub partition_vertices: usize,
    /// Maximum number of permutation tuples `(n!)^rank` in exact expectations.
    pub phi_assignments: u64,
    /// Maximum vertex count for exhaustive subset scans.
    pub subset_vertices: usize,
}

impl Default for Guards {
    fn default() -> Self {
        Guards {
            word_limit: 1 << 24,
            partition_vertices: 12,
            // n <= 5 with rank <= 3
            phi_assignments: 120u64.pow(3),
            subset_vertices: 20,
        }
    }
}

impl Guards {
    /// Defaults, with the word and permutation-tuple limits replaced by
    /// `RAMLAB_GUARD_LIMIT` when it is set to a positive integer.
    pub fn from_env() -> Result<Self> {
        let mut guards = Guards::default();
        if let Ok(raw) = std::env::var(GUARD_ENV) {
            let limit: u64 = raw
                .trim()
                .parse()
                .ok()
                .filter(|&v| v > 0)
                .ok_or_else(|| Error::invalid(format!("{GUARD_ENV} must be a positive integer, got {raw:?}")))?;
            guards.word_limit = limit;
            guards.phi_assignments = limit;
        }
        Ok(guards)
    }

    pub fn unlimited() -> Self {
        Guards {
            word_limit: u64::MAX,
            partition_vertices: usize::MAX,
            phi_assignments: u64::MAX,
            subset_vertices: 63,
        }
    }

    pub(crate) fn check_words(&self, count: Option<u64>, what: &str) -> Result<u64> {
        match count {
            Some(c) if c <= self.word_limit => Ok(c),
            Some(c) => Err(Error::guard(what, c, self.word_limit)),
            None => Err(Error::guard(what, "more than 2^64", self.word_limit)),
        }
    }

    pub(crate) fn check_partition(&self, vertices: usize) -> Result<()> {
        if vertices > self.partition_vertices {
            return Err(Error::guard(
                "quotient enumeration",
                format!("Bell({vertices}) set partitions"),
                format!("Bell({})", self.partition_vertices),
            ));
        }
        Ok(())
    }

    pub(crate) fn check_subsets(&self, vertices: usize) -> Result<()> {
        if vertices > self.subset_vertices {
            return Err(Error::guard(
                "subset scan",
                format!("2^{vertices} subsets"),
                format!("2^{}", self.subset_vertices),
            ));
        }
        Ok(())
    }
}

/// Bell numbers by the Bell triangle; `None` on overflow.
pub fn bell_number(n: usize) -> Option<u128> {
    let mut row: Vec<u128> = vec![1];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last()?);
        for &x in &row {
            let prev = *next.last()?;
            next.push(prev.checked_add(x)?);
        }
        row = next;
    }
    row.first().copied()
}
