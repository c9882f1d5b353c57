//! Commutator calculus for free nilpotent groups and the pseudo-free
//! locally nilpotent groups `Fr(M, c)`.

pub mod amalgam;
pub mod blackbox;
pub mod collect;
pub mod epi;
pub mod error;
pub mod fixtures;
pub mod hall;
pub mod int;
pub mod lattice;
pub mod magnus;
pub mod pseudofree;
pub mod report;
pub mod varieties;
pub mod word;

pub use error::{Error, Result};
