
// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod error;
pub mod potentials;
pub mod dynamics;
pub mod geometry;
pub mod integrals;
pub mod oracles;
pub mod quadrature;
pub mod symmetry;
pub mod cli;
