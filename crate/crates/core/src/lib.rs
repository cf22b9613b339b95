//! Numerical laboratory for finite-dimensional rate-independent systems
//! driven by loads of bounded variation.
//!
//! The crate solves the viscous regularization, reparametrizes it by arc
//! length, verifies candidate solutions against several solution concepts
//! and builds relaxed parametrized solutions from local ones.

pub mod checkers;
pub mod cli;
pub mod construction;
pub mod convex;
pub mod experiments;
pub mod model;
pub mod paths;
pub mod quadrature;
pub mod tuple;
pub mod viscous;
