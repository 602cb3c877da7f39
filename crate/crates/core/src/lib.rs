//! Timed asynchronous session types with mixed choice and timeouts.

pub mod cli;
pub mod constraints;
pub mod generate;
pub mod processes;
pub mod rational;
pub mod semantics;
pub mod types;
pub mod syntax;

pub use rational::{Extended, Rational};
