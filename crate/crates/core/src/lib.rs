//! Variable-exponent harmonic analysis on a periodic dyadic grid.

// `!(x > 0.0)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atomic;
pub mod cli;
pub mod duality_czo;
pub mod error;
pub mod fft;
pub mod grid;
pub mod littlewood_paley;
pub mod luxemburg;
pub mod phi_transform;
pub mod rng;
pub mod space_norms;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{CoeffField, DyadicInterval, ExponentFunction, Grid, ProbePolicy, Signal, TorusInterval};
pub use littlewood_paley::{KernelFamily, Lattice, Which, WindowKind};
