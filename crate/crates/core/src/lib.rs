//! Bounded validation of UML class models with OCL invariants.

pub mod analyzer;
pub mod cli;
pub mod config;
pub mod eval;
pub mod finder;
pub mod location;
pub mod model;
pub mod ocl;
pub mod parse;
pub mod server;
pub mod state;
pub mod tasks;
