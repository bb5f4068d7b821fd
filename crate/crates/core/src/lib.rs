//! Robust clustering toolkit built around the gamma-SUP algorithm: minimum
//! gamma-divergence estimation of a q-Gaussian mixture, solved by a blurring
//! self-updating process.
//!
//! The crate provides:
//!
//! - [`qcore`]: q-exponential / q-Gaussian density primitives, the compactly
//!   supported weight function, tuning-parameter conversions, and
//!   gamma-divergence diagnostics.
//! - [`gammasup`]: the blurring gamma-SUP clusterer, the nonblurring
//!   gamma-estimator, and the post-split variant gamma-SUP+.
//! - [`baselines`]: Lloyd k-means, bisecting k-means+ with small-cluster
//!   dismissal, and gap-statistic selection of K.
//! - [`metrics`]: purity / impurity / c-impurity cluster quality counts.
//! - [`tuning`]: tau-grid scanning and phase-transition detection.
//! - [`datagen`]: seeded synthetic-data generators (mixture, toy, images).
//! - [`reduce`]: PCA and 2-mode multilinear PCA front-ends.
//! - [`io`]: csv / raw matrix formats and label files.

pub mod baselines;
pub mod datagen;
mod error;
pub mod gammasup;
pub mod io;
pub mod matrix;
pub mod metrics;
pub mod qcore;
pub mod reduce;
pub mod tuning;

pub use error::{Error, Result};
pub use gammasup::{ClusterResult, GammaSupConfig};
pub use matrix::DataMatrix;
pub use qcore::TuningParams;
