pub mod chain;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod rng;
pub mod rpse;
pub mod spectral;
