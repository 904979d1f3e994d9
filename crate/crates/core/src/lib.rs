//! Maximum-likelihood generalized ridge regression.
//!
//! The pipeline runs in canonical (principal-axis) coordinates:
//!
//! 1. [`design`] centers and rescales the data, takes the SVD `X = H Λ^{1/2} G'`
//!    and summarizes the uncorrelated components `c`, principal correlations `ρ`
//!    and their t-statistics.
//! 2. [`shrinkage`] holds the δ-factor algebra: the MSE-optimal factors, the
//!    componentwise ML estimator and its efficient path, and the 2-parameter
//!    `(q, k)` family with its closed-form restricted ML solution.
//! 3. [`risk`] estimates relative MSE risk of any fixed δ-vector and the
//!    inferior direction of over-shrinkage.
//! 4. [`trace`] evaluates a path over an `m`-grid and writes CSV/SVG/JSON.
//! 5. [`simulate`] is a seeded Monte-Carlo harness comparing risk against OLS.

pub mod cli;
pub mod data;
pub mod design;
pub mod error;
pub mod report;
pub mod risk;
pub mod shrinkage;
pub mod simulate;
pub mod trace;

pub use design::{
    back_transform, components, load_csv, spectral, standardize, ComponentSummary, Fit, RawDataset,
    SpectralDecomposition, StandardizedDesign,
};
pub use error::{Error, Result};
pub use risk::{inferior_direction, relative_mse, InferiorDirection, RelativeRisk};
pub use shrinkage::{
    crl, delta_mse_oracle, efficient_path_deltas, grr_estimate, m_extent, ml_components, qm_search,
    restricted_ml, two_param_deltas, DeltaVector, MLComponentFit, PathKind, PathSpec, QGrid,
    QMSolution, RestrictedMl,
};
pub use trace::{build_trace, likelihood_profile, TraceKind, TraceTable};
