//! Multivariate fractional Brownian motion (mfBm).
//!
//! Closed-form covariances and cross-spectra, an admissibility test for
//! parameter sets, conversions between the covariance, spectral and
//! moving-average parameterizations, exact simulation by block-circulant
//! embedding, and a Monte Carlo harness for partial sums of superlinear
//! processes.
//!
//! ```
//! use mfbm::{MfbmParams, covariance::increment_cov};
//!
//! let p = MfbmParams::independent(vec![0.3, 0.7], vec![1.0, 1.0])
//!     .unwrap()
//!     .with_pair(0, 1, 0.3, 0.0);
//! let g = increment_cov(&p, 0, 0, 0.0, 1.0).unwrap();
//! assert!((g - 1.0).abs() < 1e-12);
//! ```

pub mod circulant;
pub mod cli;
pub mod covariance;
pub mod error;
pub mod existence;
pub mod io;
pub mod limits;
pub mod params;
pub mod representations;
pub mod rng;
pub mod special;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use params::{MfbmParams, PairKind, SpecialCase};
