//! Combinatorial and spectral machinery for random regular graphs and
//! random coverings.
//!
//! The crate is organised bottom-up:
//!
//! * [`words`]: letters, free-group words, reduction, permutations and
//!   fixed-point counting.
//! * [`core_graph`]: Stallings core graphs, folding, morphisms, quotients
//!   and the X-distance / free-factor machinery built on partitions.
//! * [`primitivity`]: primitivity rank, critical subgroups and algebraic
//!   extensions.
//! * [`moebius`]: the quotient poset of a core graph, exact expected
//!   common-fixed-point counts and their left/right/two-sided inversions.
//! * [`covers`]: samplers for the permutation model, random covers of a base
//!   graph and the configuration (matching) models.
//! * [`spectral`]: dense symmetric spectra, new eigenvalues of covers,
//!   universal-cover spectral radius, tree walks and the cogrowth function.
//! * [`expansion`]: Cheeger constant, conductance, Cheeger inequalities and
//!   the expander mixing lemma.
//! * [`growth`]: word classification by primitivity rank and the bound
//!   evaluators for the trace method.

pub mod core_graph;
pub mod covers;
pub mod error;
pub mod expansion;
pub mod growth;
pub mod guard;
pub mod moebius;
pub mod primitivity;
pub mod spectral;
pub mod words;

pub use core_graph::{CoreGraph, GraphMorphism, VertexPartition};
pub use covers::{BaseGraph, CoverGraph, MultiGraph};
pub use error::{Error, Result};
pub use guard::Guards;
pub use primitivity::{PrimitivityRank, PrimitivityReport};
pub use words::{Letter, Permutation, RawWord, ReducedWord};
