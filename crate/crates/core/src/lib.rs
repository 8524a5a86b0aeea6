//! Pseudo-spectral analysis toolkit for the stationary and transient
//! Navier-Stokes equations with Coriolis force on a periodic frequency lattice.
//!
//! The crate is `no_std` with `alloc`. Every Fourier transform goes through the
//! [`SpectralTransform`] trait; [`NaiveDft`] is the built-in reference backend
//! and faster backends live in companion crates.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod coriolis_kernel;
pub mod error;
pub mod field;
pub mod grid;
pub mod linalg;
pub mod littlewood_paley;
pub mod math;
pub mod solvers;
pub mod spectral;
pub mod transform;
pub mod verification;

pub use coriolis_kernel::{CoriolisParams, KernelSymbol};
pub use error::{Error, Result};
pub use field::{PhysicalVectorField, SpectralScalarField, SpectralVectorField};
pub use grid::FrequencyGrid;
pub use littlewood_paley::{DyadicPartition, DyadicProfile, Exponent, FourierBesovParams};
pub use solvers::{SolveFailure, SolveReport, SolveStatus, StationarySolveConfig, TransientSolveConfig};
pub use transform::{NaiveDft, SpectralTransform};
