//! Simulation and analysis of quantum weak oblivious transfer built from
//! repeated CKS rounds.

pub mod analysis;
pub mod bit;
pub mod cks;
pub mod qlin;
pub mod registry;
pub mod strategies;
pub mod weakot;

pub use bit::Bit;
