//! Exact and Fourier-side computation of additive-combinatorial quantities on
//! finite abelian groups.

pub(crate) mod bitset;
pub mod dissociation;
pub mod energy;
pub mod error;
pub mod extract;
pub mod experiments;
pub mod group;
pub mod record;
pub mod report;
pub mod set;

pub use error::{Error, Result};
pub use group::{Counts, GFunction, GroupElement, GroupSpec};
pub use set::GSet;
