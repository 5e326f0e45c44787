use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extraction::LanePoint;
use crate::scalar::Scalar;

/// A straight lane in image coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LineModel<T> {
    /// `y = beta0 + beta1 * x`.
    Sloped { beta0: T, beta1: T },
    /// `x = const`, used when every point shares one column.
    Vertical { x: T },
}

impl<T: Scalar> LineModel<T> {
    pub fn x_at(&self, y: T) -> T {
        match *self {
            LineModel::Sloped { beta0, beta1 } => (y - beta0) / beta1,
            LineModel::Vertical { x } => x,
        }
    }

    /// `(u, v)` with `x = u * y + v`.
    pub fn x_of_y(&self) -> (T, T) {
        match *self {
            LineModel::Sloped { beta0, beta1 } => (beta1.recip(), -beta0 / beta1),
            LineModel::Vertical { x } => (T::zero(), x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WlsFit<T> {
    pub beta0: T,
    pub beta1: T,
    /// Weighted squared error at the solution.
    pub weighted_sse: T,
    pub support: usize,
}

impl<T: Scalar> WlsFit<T> {
    pub fn line(&self) -> LineModel<T> {
        LineModel::Sloped {
            beta0: self.beta0,
            beta1: self.beta1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum FitError<T: std::fmt::Display + std::fmt::Debug> {
    #[error("{found} points, need at least {needed}")]
    TooFewPoints { found: usize, needed: usize },
    /// Every point shares column `x`; the normal matrix is singular.
    #[error("vertical lane at x = {x}")]
    Vertical { x: T },
    #[error("total weight is zero")]
    ZeroWeight,
    #[error("near-horizontal line (gradient {beta1})")]
    NearHorizontal { beta1: T },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegressionConfig {
    /// Points whose x-residual exceeds `kappa` times the RMS residual are dropped.
    pub kappa: f64,
    /// Fits with `|beta1|` below this are rejected as horizontal noise.
    pub min_abs_slope: f64,
    pub min_points: usize,
}

impl Default for RegressionConfig {
    fn default() -> Self {
        RegressionConfig {
            kappa: 2.5,
            min_abs_slope: 1e-6,
            min_points: 3,
        }
    }
}

impl RegressionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.kappa.is_nan()
            || self.kappa <= 0.0
            || self.min_abs_slope.is_nan()
            || self.min_abs_slope < 0.0
        {
            return Err(Error::Config(
                "kappa must be positive, min_abs_slope non-negative".into(),
            ));
        }
        if self.min_points < 2 {
            return Err(Error::Config("min_points must be at least 2".into()));
        }
        Ok(())
    }
}

/// Weighted least squares of y on x with the point confidences as weights.
pub fn wls_fit<T: Scalar>(points: &[LanePoint<T>]) -> Result<WlsFit<T>, FitError<T>> {
    if points.len() < 3 {
        return Err(FitError::TooFewPoints {
            found: points.len(),
            needed: 3,
        });
    }
    let x0 = points[0].x;
    if points.iter().all(|p| p.x == x0) {
        return Err(FitError::Vertical { x: x0 });
    }
    let total: T = points.iter().map(|p| p.confidence).sum();
    if total <= T::zero() {
        return Err(FitError::ZeroWeight);
    }
    let mean_x = points.iter().map(|p| p.confidence * p.x).sum::<T>() / total;
    let mean_y = points.iter().map(|p| p.confidence * p.y).sum::<T>() / total;
    let (mut sxx, mut sxy) = (T::zero(), T::zero());
    for p in points {
        let dx = p.x - mean_x;
        sxx = sxx + p.confidence * dx * dx;
        sxy = sxy + p.confidence * dx * (p.y - mean_y);
    }
    if sxx <= T::zero() {
        // only the weighted-zero points differ in x
        return Err(FitError::Vertical { x: mean_x });
    }
    let beta1 = sxy / sxx;
    let beta0 = mean_y - beta1 * mean_x;
    let weighted_sse = points
        .iter()
        .map(|p| {
            let r = p.y - beta0 - beta1 * p.x;
            p.confidence * r * r
        })
        .sum();
    Ok(WlsFit {
        beta0,
        beta1,
        weighted_sse,
        support: points.len(),
    })
}

/// Drops points whose horizontal distance to the fitted line exceeds
/// `kappa` times the RMS of those distances. Inputs of three points or fewer
/// are returned unchanged.
pub fn remove_outliers<T: Scalar>(
    points: &[LanePoint<T>],
    fit: &WlsFit<T>,
    kappa: T,
) -> Vec<LanePoint<T>> {
    if points.len() <= 3 || fit.beta1 == T::zero() {
        return points.to_vec();
    }
    let line = fit.line();
    let residuals: Vec<T> = points
        .iter()
        .map(|p| (p.x - line.x_at(p.y)).abs())
        .collect();
    let rms = (residuals.iter().map(|&r| r * r).sum::<T>() / T::from_count(residuals.len())).sqrt();
    let cut = kappa * rms;
    points
        .iter()
        .zip(&residuals)
        .filter(|(_, &r)| r <= cut)
        .map(|(p, _)| *p)
        .collect()
}

/// Fit, one outlier pass, refit.
pub fn fit_straight<T: Scalar>(
    points: &[LanePoint<T>],
    cfg: &RegressionConfig,
) -> Result<WlsFit<T>, FitError<T>> {
    let needed = cfg.min_points.max(3);
    if points.len() < needed {
        return Err(FitError::TooFewPoints {
            found: points.len(),
            needed,
        });
    }
    let min_slope = T::lit(cfg.min_abs_slope);
    let first = wls_fit(points)?;
    if first.beta1.abs() < min_slope {
        return Err(FitError::NearHorizontal { beta1: first.beta1 });
    }
    let inliers = remove_outliers(points, &first, T::lit(cfg.kappa));
    if inliers.len() < needed {
        return Err(FitError::TooFewPoints {
            found: inliers.len(),
            needed,
        });
    }
    if inliers.len() == points.len() {
        return Ok(first);
    }
    let fit = wls_fit(&inliers)?;
    if fit.beta1.abs() < min_slope {
        return Err(FitError::NearHorizontal { beta1: fit.beta1 });
    }
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pts(v: &[(f64, f64, f64)]) -> Vec<LanePoint<f64>> {
        v.iter().map(|&(x, y, c)| LanePoint::new(x, y, c)).collect()
    }

    /// Solves the weighted 2x2 normal equations by Cramer's rule.
    fn normal_equations(p: &[LanePoint<f64>]) -> (f64, f64) {
        let (mut s, mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for q in p {
            s += q.confidence;
            sx += q.confidence * q.x;
            sxx += q.confidence * q.x * q.x;
            sy += q.confidence * q.y;
            sxy += q.confidence * q.x * q.y;
        }
        let det = s * sxx - sx * sx;
        ((sy * sxx - sx * sxy) / det, (s * sxy - sx * sy) / det)
    }

    #[test]
    fn exact_fit_on_diagonal() {
        let f = wls_fit(&pts(&[(0., 0., 1.), (1., 1., 1.), (2., 2., 1.)])).unwrap();
        assert_eq!((f.beta0, f.beta1, f.weighted_sse), (0.0, 1.0, 0.0));
        assert_eq!(f.support, 3);
    }

    #[test]
    fn low_confidence_point_pulls_less() {
        let a = pts(&[(0., 0., 1.), (1., 0., 1.), (2., 3., 1.)]);
        let b = pts(&[(0., 0., 1.), (1., 0., 1.), (2., 3., 0.01)]);
        let fa = wls_fit(&a).unwrap();
        let fb = wls_fit(&b).unwrap();
        let (a0, a1) = normal_equations(&a);
        let (b0, b1) = normal_equations(&b);
        assert_relative_eq!(fa.beta0, a0, epsilon = 1e-12);
        assert_relative_eq!(fa.beta1, a1, epsilon = 1e-12);
        assert_relative_eq!(fb.beta0, b0, epsilon = 1e-12);
        assert_relative_eq!(fb.beta1, b1, epsilon = 1e-12);
        // unweighted: beta = (-0.5, 1.5); downweighted third point flattens the line
        assert_relative_eq!(fa.beta1, 1.5, epsilon = 1e-12);
        let dist = |f: &WlsFit<f64>| (f.beta0).abs() + (f.beta0 + f.beta1).abs();
        assert!(dist(&fb) < dist(&fa));
    }

    #[test]
    fn shared_column_signals_vertical() {
        let r = wls_fit(&pts(&[(5., 0., 1.), (5., 1., 0.5), (5., 2., 1.)]));
        assert_eq!(r, Err(FitError::Vertical { x: 5.0 }));
        assert!(matches!(
            wls_fit(&pts(&[(1., 0., 1.), (2., 1., 1.)])),
            Err(FitError::TooFewPoints { found: 2, .. })
        ));
    }

    #[test]
    fn collinear_points_are_kept() {
        let p: Vec<_> = (0..9)
            .map(|i| LanePoint::new(i as f64, 3.0 * i as f64 + 1.0, 0.9))
            .collect();
        let f = wls_fit(&p).unwrap();
        assert_eq!(remove_outliers(&p, &f, 2.5).len(), 9);
    }

    #[test]
    fn displaced_point_is_removed() {
        // x-residual of each point against the line fitted with the outlier
        // present; the outlier's residual / RMS exceeds 2.5 while the rest stay below.
        let mut p: Vec<_> = (0..15)
            .map(|i| LanePoint::new(100.0 + 2.0 * i as f64, 280.0 - 10.0 * i as f64, 1.0))
            .collect();
        p[7].x += 10.0;
        let f = wls_fit(&p).unwrap();
        let res: Vec<f64> = p
            .iter()
            .map(|q| (q.x - (q.y - f.beta0) / f.beta1).abs())
            .collect();
        let rms = (res.iter().map(|r| r * r).sum::<f64>() / 15.0).sqrt();
        assert!(res[7] > 2.5 * rms);
        assert!(res
            .iter()
            .enumerate()
            .all(|(i, &r)| i == 7 || r <= 2.5 * rms));
        let kept = remove_outliers(&p, &f, 2.5);
        assert_eq!(kept.len(), 14);
        assert!(kept.iter().all(|q| q.y != 210.0));
    }

    #[test]
    fn symmetric_zigzag_is_unchanged() {
        let p = pts(&[(0., 0., 1.), (2., 1., 1.), (0., 2., 1.), (2., 3., 1.)]);
        let f = wls_fit(&p).unwrap();
        assert_eq!(remove_outliers(&p, &f, 2.5).len(), 4);
    }

    #[test]
    fn fit_straight_recovers_clean_line() {
        let clean: Vec<_> = (0..15)
            .map(|i| LanePoint::new(200.0 + 4.0 * i as f64, 280.0 - 12.0 * i as f64, 0.8))
            .collect();
        let mut noisy = clean.clone();
        noisy.insert(7, LanePoint::new(250.0, 200.0, 0.8));
        let cfg = RegressionConfig::default();
        let f = fit_straight(&noisy, &cfg).unwrap();
        let g = wls_fit(&clean).unwrap();
        assert_relative_eq!(f.beta0, g.beta0, max_relative = 1e-12);
        assert_relative_eq!(f.beta1, g.beta1, max_relative = 1e-12);
        assert_eq!(f.support, 15);

        let three = pts(&[(0., 0., 1.), (1., 2., 1.), (2., 4., 1.)]);
        let f = fit_straight(&three, &cfg).unwrap();
        assert_eq!((f.beta0, f.beta1), (0.0, 2.0));
    }

    #[test]
    fn fit_straight_rejects_horizontal() {
        let p = pts(&[(0., 5., 1.), (10., 5., 1.), (20., 5., 1.)]);
        assert!(matches!(
            fit_straight(&p, &RegressionConfig::default()),
            Err(FitError::NearHorizontal { .. })
        ));
    }

    #[test]
    fn line_model_forms_agree() {
        let l = LineModel::Sloped {
            beta0: 5.0,
            beta1: 2.0,
        };
        assert_eq!(l.x_at(100.0), 47.5);
        assert_eq!(l.x_at(200.0), 97.5);
        let (u, v) = l.x_of_y();
        assert_eq!(u * 200.0 + v, 97.5);
        assert_eq!(LineModel::Vertical { x: 3.0 }.x_at(17.0), 3.0);
    }

    #[test]
    fn works_in_single_precision() {
        let p: Vec<LanePoint<f32>> = (0..5)
            .map(|i| LanePoint::new(i as f32, 2.0 * i as f32 + 1.0, 1.0))
            .collect();
        let f = wls_fit(&p).unwrap();
        assert!((f.beta1 - 2.0).abs() < 1e-6 && (f.beta0 - 1.0).abs() < 1e-6);
    }
}
