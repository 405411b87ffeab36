//! Target singulation in clutter by non-prehensile pushing.
//!
//! The crate bundles a deterministic quasi-static push simulator, the
//! empty-space-map push heuristics (global ES and local LES), a shaped-reward
//! singulation MDP, a small dense-network stack with an offline asymmetric
//! DDPG trainer, and the reporting used by the `singulate` CLI.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod grid;
pub mod harness;
pub mod learn;
pub mod maps;
pub mod mdp;
pub mod percept;
pub mod policy;
pub mod pushsim;
pub mod scene;

pub use error::{Error, Result};
