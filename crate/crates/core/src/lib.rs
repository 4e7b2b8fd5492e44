//! Simulation core for reading binary optical memories with coherent light:
//! finite fields, block codes, receiver physics, closed-form baselines, and
//! the Monte Carlo harness tying them together.

pub mod baselines;
pub mod codes;
pub mod experiment;
pub mod field;
pub mod photonics;
