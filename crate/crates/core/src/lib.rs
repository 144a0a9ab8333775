//! Hermite-spectral simulation of the bilinear-controlled Gross–Pitaevskii
//! equation `i ψ_t + Hψ = u(t) K ψ - σ |ψ|^2 ψ` with `H = -Δ + |x|^2` and
//! the log-singular potential `K(x) = log|x| 1_{|x| <= 1}`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod basis;
pub mod cli;
pub mod config;
pub mod control;
pub mod dynamics;
pub mod error;
pub mod output;
pub mod potential;
pub mod quadrature;
pub mod state;
pub mod tensor;
pub mod verify;

pub use basis::{GridKind, HermiteBasis};
pub use error::{Error, Result};
pub use state::{GridField, SpectralState};
pub use tensor::C64;
