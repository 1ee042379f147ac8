//! Exact Bredon homology of partition complexes.
//!
//! The crate is organised bottom-up:
//!
//! * [`permgroups`]: permutation groups of small degree.
//! * [`exactalg`]: integer and mod-p linear algebra, homology, group-ring modules.
//! * [`complexes`]: posets, order complexes with group actions, Borel models.
//! * [`mackey`]: coefficient systems and Mackey functors.
//! * [`bredon`]: equivariant chain complexes and their homology.
//! * [`verify`]: theorem-level checks returning [`verify::VerificationReport`]s.
//! * [`cli`]: the command-line front end used by the `parcx` binary.

pub mod bredon;
pub mod cli;
pub mod complexes;
mod error;
pub mod exactalg;
pub mod mackey;
pub mod permgroups;
pub mod verify;

pub use error::{capacity_bonus, Error, Result};
