//! Phase-locked Morse wave packets: eigenfunctions, coherent-state
//! superpositions, Wigner distributions and the sub-Planck diagnostics
//! built on them.

// negated float comparisons are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod commands;
pub mod config;
pub mod error;
pub mod grid;
pub mod gridfile;
pub mod morse;
pub mod phase_space;
pub mod special;
pub mod wavepacket;

pub use error::{Error, Result};
pub use grid::UniformGrid;
pub use morse::{EigenTable, MorseParams};
pub use phase_space::{wigner_overlap, wigner_transform, LobeCounter, WignerGrid};
pub use wavepacket::{PhaseLockedPacket, StateGrid};
