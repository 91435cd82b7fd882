//! Quotients of special cube complexes built from finite abelian groups.

pub mod algebra;
pub mod cli;
pub mod complex;
pub mod fixtures;
pub mod group;
pub mod hyperplane;
pub mod verifier;
