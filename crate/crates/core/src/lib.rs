//! Pencil spectra, nonlinear characteristic eigenvalues and crack-tip
//! admissibility for the Laplace and p-Laplace equations near a multiple
//! crack tip.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod characteristic;
pub mod cli;
pub mod continuation;
pub mod crack;
pub mod eigenfunction;
pub mod error;
pub mod ode;
pub mod pencil;
pub mod perturbation;
pub mod poly;
pub mod quadrature;

pub use error::{Error, Result};
