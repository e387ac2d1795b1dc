//! Exact computations with blueprints over F1.

pub mod arith;
pub mod blueprint;
pub mod conservativity;
pub mod corpus;
pub mod error;
pub mod functors;
pub mod module;
pub mod monoid;
pub mod presentation;
pub mod sections;
pub mod spectra;
pub mod sum;
pub mod verdict;
