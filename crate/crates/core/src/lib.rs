//! Three-well condensate teleportation in truncated Fock space.
//!
//! Modules follow the protocol: [`fock`] states, [`dynamics`] propagators,
//! [`channel`] generation, [`homodyne`] phase readout, receiver
//! [`corrections`], the end-to-end [`protocol`], and the optical [`lattice`]
//! that would realise the collision schedule.

// `!(x >= 0.0)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod channel;
pub mod cli;
pub mod corrections;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod homodyne;
pub mod lattice;
pub mod linalg;
pub mod output;
pub mod protocol;
pub mod rng;

pub use error::{Error, ErrorKind, Result};
