//! Lane construction: confidence-weighted line fits for straight lanes and
//! piecewise-polynomial interpolants for curved ones.

mod spline;
mod wls;

pub use spline::{build_spline, CubicSpline, QuadraticSpline, SplineError};
pub use wls::{
    fit_straight, remove_outliers, wls_fit, FitError, LineModel, RegressionConfig, WlsFit,
};
