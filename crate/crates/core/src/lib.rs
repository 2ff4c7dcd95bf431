//! Finite trace semantics for branching systems modelled as coalgebras
//! `X -> T F X` in the Kleisli category of a branching monad `T`.
//!
//! The crate covers three monads (lift, powerset, subdistribution) and the
//! shapely transition functors built from identity, constants, products,
//! finite coproducts and lists. Trace semantics is computed as the least
//! fixed point of the coinduction map, approximated by Kleene iteration to an
//! explicit depth, and cross-checked against direct recursive definitions.
//!
//! Module map:
//!
//! - [`monads`]: branching values, Kleisli arrows, the order on branching values.
//! - [`functors`]: functor expressions, structures, initial-algebra terms.
//! - [`distributivity`]: distributive laws `F T => T F` and lifted arrows.
//! - [`system`]: finite coalgebras.
//! - [`traces`]: the fixpoint engine, oracles, the coinduction square.
//! - [`bisim`]: strong bisimilarity by partition refinement.
//! - [`omega`]: possibly infinite traces for nondeterministic systems.
//! - [`testing`]: tests as terms, theory maps, testing equivalence.
//! - [`syntax`]: the line-oriented system file format.
//! - [`gen`]: seeded sample generators.
//! - [`laws`]: randomized law suites.

pub mod bisim;
pub mod distributivity;
mod error;
pub mod functors;
pub mod gen;
pub mod laws;
pub mod monads;
pub mod omega;
pub mod par;
pub mod syntax;
pub mod system;
pub mod testing;
pub mod traces;

pub use error::{Error, Result};

/// Anything that can sit inside a branching value or a functor structure.
pub trait Element: Clone + Ord + std::fmt::Debug + Send + Sync {}

impl<T: Clone + Ord + std::fmt::Debug + Send + Sync> Element for T {}
