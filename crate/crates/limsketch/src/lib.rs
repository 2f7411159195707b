//! Finitely presented categories, limit sketches, and the universal
//! realized limit sketch, at desk scale.
//!
//! The library works with *presentations*: a generating graph with chosen
//! identity loops plus a finite set of relations between parallel paths.
//! On top of that it builds
//!
//! - a three-valued word-problem engine ([`word::decide_equal`]),
//! - finite materialization of a presentation into explicit hom-sets and
//!   composition tables ([`category::materialize`]),
//! - limit sketches with cone checking ([`sketch`]),
//! - the two cell constructions that freely adjoin a cone and its filler
//!   ([`cells`]),
//! - a bounded small-object-argument loop that saturates a sketch into its
//!   universal realization ([`factorization::realize`]),
//! - finite-Set model enumeration with the restriction/lift bijection
//!   along the realization unit ([`models`]),
//! - a small text format for sketches and a command-line driver
//!   ([`dsl`], [`cli`]).
//!
//! Every search is bounded and every bounded answer is honest: operations
//! that may run out of budget return [`Bounded::Diverged`] or
//! [`word::EqVerdict::Unknown`] instead of looping.
//!
//! See the `examples/` directory for one runnable tour per capability.

pub mod category;
pub mod cells;
pub mod cli;
pub mod dsl;
pub mod error;
pub mod factorization;
pub mod fixtures;
pub mod graph;
pub mod models;
pub mod presentation;
pub mod sketch;
pub mod word;

pub use error::{Error, Result};
pub use graph::{free_category_homs, EdgeId, Graph, Gwi, ObjectId, Path};
pub use presentation::{pushout, Presentation, PresentationArrow, PresentationMap, Pushout};
pub use word::{decide_equal, EqVerdict};

use graph::Path as WitnessPath;

/// Search budgets shared by every bounded operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    /// Maximum reduced-path length explored by the word problem and by
    /// hom-set enumeration.
    pub max_word_len: usize,
    /// Maximum number of morphism classes a materialization may produce.
    pub max_morphisms: usize,
}

impl Bounds {
    pub const fn new(max_word_len: usize, max_morphisms: usize) -> Bounds {
        Bounds {
            max_word_len,
            max_morphisms,
        }
    }
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds::new(8, 512)
    }
}

/// Default budget for the saturation loop in [`factorization::realize`].
pub const DEFAULT_MAX_ITER: usize = 16;

/// Default carrier-size cap for model enumeration.
pub const DEFAULT_MAX_SIZE: usize = 2;

/// Outcome of a bounded computation: either it finished, or some
/// enumeration escaped the budget and we report the escaping path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bounded<T> {
    Done(T),
    Diverged { witness: WitnessPath },
}

impl<T> Bounded<T> {
    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Bounded<U> {
        match self {
            Bounded::Done(t) => Bounded::Done(f(t)),
            Bounded::Diverged { witness } => Bounded::Diverged { witness },
        }
    }

    /// Unwrap a finished computation; panics on divergence. Test helper.
    pub fn expect_done(self, what: &str) -> T {
        match self {
            Bounded::Done(t) => t,
            Bounded::Diverged { witness } => {
                panic!("{what} diverged with witness {witness}")
            }
        }
    }

    pub fn is_diverged(&self) -> bool {
        matches!(self, Bounded::Diverged { .. })
    }
}
