use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One (θ, ΔE) measurement with an optional standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub theta: f64,
    pub delta_e: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sem: Option<f64>,
}

impl CurvePoint {
    pub fn new(theta: f64, delta_e: f64, sem: Option<f64>) -> Self {
        Self {
            theta,
            delta_e,
            sem,
        }
    }
}

/// Least-squares fit of ΔE(θ) = a (1 − cos θ) + b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub a: f64,
    pub b: f64,
    pub r_squared: f64,
    /// Weighted residual sum of squares over n − 2 degrees of freedom
    /// (plain residual variance for unweighted fits).
    pub reduced_chi_squared: f64,
    /// Parameter covariance, order (a, b).
    pub covariance: [[f64; 2]; 2],
    pub weighted: bool,
    pub n_points: usize,
}

impl FitResult {
    pub fn predict(&self, theta: f64) -> f64 {
        self.a * (1.0 - theta.cos()) + self.b
    }

    /// Sum of squared (unweighted) residuals on `points`.
    pub fn residual_sum_of_squares(&self, points: &[CurvePoint]) -> f64 {
        points
            .iter()
            .map(|p| (p.delta_e - self.predict(p.theta)).powi(2))
            .sum()
    }
}

/// Fits the linear model in x = 1 − cos θ through closed-form normal
/// equations. Points are weighted by 1/sem² when every point carries a
/// positive sem; otherwise the fit is unweighted.
///
/// R² is the (weighted) coefficient of determination. For weighted fits
/// the covariance is
/// (XᵀWX)⁻¹; for unweighted fits it is scaled by the residual variance.
pub fn fit_delta_curve(points: &[CurvePoint]) -> Result<FitResult> {
    let n = points.len();
    if n < 3 {
        return Err(Error::InvalidQuery(format!(
            "{n} points; the fit needs at least 3"
        )));
    }
    if let Some(p) = points
        .iter()
        .find(|p| !p.theta.is_finite() || !p.delta_e.is_finite())
    {
        return Err(Error::InvalidQuery(format!("non-finite point {p:?}")));
    }
    let weighted = points
        .iter()
        .all(|p| matches!(p.sem, Some(s) if s > 0.0 && s.is_finite()));
    let w: Vec<f64> = points
        .iter()
        .map(|p| {
            if weighted {
                1.0 / p.sem.unwrap().powi(2)
            } else {
                1.0
            }
        })
        .collect();
    let x: Vec<f64> = points.iter().map(|p| 1.0 - p.theta.cos()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.delta_e).collect();

    let sw: f64 = w.iter().sum();
    let swx: f64 = w.iter().zip(&x).map(|(w, x)| w * x).sum();
    let swy: f64 = w.iter().zip(&y).map(|(w, y)| w * y).sum();
    let xbar = swx / sw;
    let ybar = swy / sw;
    let sxx: f64 = w.iter().zip(&x).map(|(w, x)| w * (x - xbar).powi(2)).sum();
    let sxy: f64 = w
        .iter()
        .zip(&x)
        .zip(&y)
        .map(|((w, x), y)| w * (x - xbar) * (y - ybar))
        .sum();
    let syy: f64 = w.iter().zip(&y).map(|(w, y)| w * (y - ybar).powi(2)).sum();
    let spread = x.iter().fold(0.0f64, |m, &xi| m.max((xi - x[0]).abs()));
    if spread < 1e-12 || sxx <= 1e-24 * sw {
        return Err(Error::RankDeficient(
            "all points share the same 1 - cos(theta); slope and offset are not separable".into(),
        ));
    }
    let a = sxy / sxx;
    let b = ybar - a * xbar;
    let ssr: f64 = w
        .iter()
        .zip(&x)
        .zip(&y)
        .map(|((w, x), y)| w * (y - a * x - b).powi(2))
        .sum();
    let r_squared = if syy > 0.0 {
        1.0 - ssr / syy
    } else if ssr == 0.0 {
        1.0
    } else {
        0.0
    };
    let dof = n as f64 - 2.0;
    let reduced_chi_squared = ssr / dof;
    // (XᵀWX)⁻¹ for columns (x, 1)
    let det = sw * sxx;
    let mut cov = [
        [sw / det, -swx / det],
        [-swx / det, (sxx + swx * xbar) / det],
    ];
    if !weighted {
        for row in cov.iter_mut() {
            for v in row.iter_mut() {
                *v *= reduced_chi_squared;
            }
        }
    }
    Ok(FitResult {
        a,
        b,
        r_squared: r_squared.min(1.0),
        reduced_chi_squared,
        covariance: cov,
        weighted,
        n_points: n,
    })
}

/// Residual sum of squares left by a proxy-only description, which
/// attributes no contrast to the context label and so predicts ΔE ≡ 0.
pub fn proxy_only_residual(points: &[CurvePoint]) -> f64 {
    points.iter().map(|p| p.delta_e.powi(2)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn exact_law_is_recovered() {
        let pts: Vec<CurvePoint> = [0.0, PI / 4.0, PI / 2.0, PI]
            .iter()
            .map(|&t| CurvePoint::new(t, 1.0 - f64::cos(t), None))
            .collect();
        let f = fit_delta_curve(&pts).unwrap();
        assert_abs_diff_eq!(f.a, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.b, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.r_squared, 1.0, epsilon = 1e-12);
        assert!(!f.weighted);
    }

    #[test]
    fn degenerate_inputs() {
        let same: Vec<CurvePoint> = (0..4)
            .map(|i| CurvePoint::new(1.0, i as f64, None))
            .collect();
        assert!(matches!(
            fit_delta_curve(&same),
            Err(Error::RankDeficient(_))
        ));
        let few = [
            CurvePoint::new(0.0, 0.0, None),
            CurvePoint::new(1.0, 0.5, None),
        ];
        assert!(fit_delta_curve(&few).is_err());
    }

    #[test]
    fn weights_are_used_when_all_sems_present() {
        let pts = [
            CurvePoint::new(0.0, 0.0, Some(0.01)),
            CurvePoint::new(PI / 2.0, 1.0, Some(0.01)),
            CurvePoint::new(PI, 2.5, Some(10.0)),
        ];
        let f = fit_delta_curve(&pts).unwrap();
        assert!(f.weighted);
        // the outlier barely moves the fit
        assert!((f.a - 1.0).abs() < 0.01);
        assert!(f.reduced_chi_squared >= 0.0);
        let partial = [
            CurvePoint {
                sem: None,
                ..pts[0]
            },
            pts[1],
            pts[2],
        ];
        assert!(!fit_delta_curve(&partial).unwrap().weighted);
    }

    #[test]
    fn proxy_only_cannot_beat_the_fit() {
        let pts: Vec<CurvePoint> = [0.0, 1.0, 2.0, 3.0]
            .iter()
            .map(|&t| CurvePoint::new(t, 0.9 * (1.0 - f64::cos(t)) + 0.01, None))
            .collect();
        let f = fit_delta_curve(&pts).unwrap();
        assert!(f.residual_sum_of_squares(&pts) < proxy_only_residual(&pts));
    }
}
