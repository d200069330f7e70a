pub mod creal;
pub mod ode;
pub mod prover;
pub mod statics;
pub mod syntax;
pub mod cli;
pub mod engine;
