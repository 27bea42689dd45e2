//! Differential dynamic logic: syntax, real arithmetic, differential
//! invariants, a proof kernel and proof search.

pub mod arith;
pub mod deriv;
pub mod kernel;
pub mod odesolve;
pub mod parser;
pub mod sim;
pub mod syntax;
pub mod tactics;
