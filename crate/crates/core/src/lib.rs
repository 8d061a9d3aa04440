//! Simulation toolkit for a cyclic discrete-time quantum walk key-exchange
//! protocol built on Parrondo coin sequences: dense linear algebra, walk and
//! gate-level engines, depolarizing noise, the two-party protocol itself,
//! eavesdropping experiments, distribution metrics, and a SWAP-insertion
//! layout router.
//!
//! Conventions used throughout: qubit 0 is the least significant bit of a
//! basis index, and a coin⊗position walk state on a K-cycle indexes as
//! `coin * K + position`.

pub mod attack;
pub mod circuit;
pub mod dist;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod noise;
pub mod protocol;
pub mod router;
pub mod state;
pub mod walk;

pub use error::{Error, Result};
