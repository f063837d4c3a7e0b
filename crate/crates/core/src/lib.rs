//! Numerical laboratory for the stability of ODE blowup of the radial
//! energy-critical (quintic) wave equation in three dimensions, worked in
//! similarity coordinates `τ = −log(T − t) + log T`, `ρ = r/(T − t)`.

// NaN-rejecting guards are written as `!(x > 0.0)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dalembert;
pub mod error;
pub mod evolve;
pub mod hyp;
pub mod lab;
pub mod odeint;
pub mod oscint;
pub mod output;
pub mod quad;
pub mod resolvent;
pub mod simcoords;
pub mod spaces;
pub mod specgrid;
pub mod waveop;

pub use error::{Error, Result};
