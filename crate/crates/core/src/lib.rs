//! Finite-element laboratory for Hadamard variations of Laplacian eigenvalues
//! on deformed planar domains.
//!
//! The reference domain (the unit disk) is triangulated once; every deformed
//! domain `T_t(D)` is handled by pulling the Dirichlet form and the `L^2`
//! inner product back to the reference mesh, so eigenvalues along a family
//! `t -> T_t` are computed on one fixed mesh and can be differentiated.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod deform;
pub mod eig;
pub mod error;
pub mod forms;
pub mod hadamard;
pub mod holomorphic;
pub mod linalg;
pub mod mesh;
pub mod plot;
pub mod poly;
pub mod quadrature;
pub mod verify;

pub use error::{Error, Result};
