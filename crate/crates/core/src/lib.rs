//! Analytic continuation of Brownian motion to complex time, realized as
//! weighted Wiener chaos expansions.
//!
//! The crate is organised bottom-up:
//!
//! - [`hermite`]: complex Hermite functions, growth envelopes, Mehler kernel.
//! - [`chaos`]: multi-indices, sparse chaos vectors, graded norms, Wick product.
//! - [`process`]: `B_z`, `N_z`, weighted and regularized processes, sampling.
//! - [`contour`]: Wick contour integrals and the quadratic Itô checks.
//! - [`diagnostics`]: Parseval, divergence and Mehler scans.

pub mod chaos;
pub mod contour;
pub mod diagnostics;
pub mod error;
pub mod hermite;
pub mod process;
pub mod quadrature;

pub use chaos::{ChaosVector, MultiIndex, WeightSequence};
pub use contour::{Contour, IntegrandField, IntegrationOptions, NoiseKind, Refinement};
pub use error::{Error, Result};
pub use hermite::{BoundEnvelope, Convention, HermiteConfig};
pub use num_complex::Complex64;
pub use process::{ChaosProcesses, ProcessSpec, TruncationPlan, WeightFunction};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
