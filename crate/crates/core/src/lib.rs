//! Regularized-density splines.
//!
//! Maximum-likelihood density estimation from sensitivity-thinned samples.
//! The estimate is the exponential of a tensor B-spline on a uniform grid,
//! regularized by the Schatten norm of the spline's Hessian and fitted by
//! accelerated proximal gradient with an adaptive Lipschitz step.

pub mod baselines;
pub mod bspline;
pub mod cli;
pub mod density;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod io;
pub mod hessian;
pub mod likelihood;
pub mod optimizer;
pub mod pet;
pub mod samples;

pub use baselines::{hist_fit_eval, kde_fit, HistModel, KdeModel};
pub use bspline::{eval_spline_grid, eval_spline_points, make_filter, FilterBank, SplineDegree};
pub use density::{DensityModel, Quadrature, SensitivityMap};
pub use error::{RdsError, Result};
pub use experiments::{mse_db, run_sweep, sample_observed, GroundTruth, Method, SensitivitySpec, SweepConfig};
pub use grid::{BoundaryCondition, GridSpec, ScalarField};
pub use hessian::{HessianField, HessianOperator, ProxConfig, SchattenP};
pub use likelihood::{accumulate_data_sums, DataSums, LogLikelihood};
pub use optimizer::{fit, FitConfig, FitResult, FitTrace, LipschitzMode, RegWeight};
pub use samples::SampleSet;
