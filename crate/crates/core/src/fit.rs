use serde::Serialize;

use crate::error::{Error, Result};

/// Least-squares line through `(ln x, ln err)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub const MIN_FIT_POINTS: usize = 4;

pub fn slope_fit(points: &[(f64, f64)]) -> Result<PowerFit> {
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::DegenerateFit(format!(
            "need at least {MIN_FIT_POINTS} points, got {}",
            points.len()
        )));
    }
    if let Some(&(x, e)) = points.iter().find(|(x, e)| !(*x > 0.0 && *e > 0.0)) {
        return Err(Error::DegenerateFit(format!(
            "non-positive abscissa or error ({x}, {e})"
        )));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, e)| (x.ln(), e.ln())).collect();
    linear_fit(&logs)
}

/// Ordinary least squares `v ≈ slope u + intercept`.
pub fn linear_fit(points: &[(f64, f64)]) -> Result<PowerFit> {
    let n = points.len() as f64;
    let mu = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mv = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut suu, mut suv, mut svv) = (0.0, 0.0, 0.0);
    for &(u, v) in points {
        suu += (u - mu) * (u - mu);
        suv += (u - mu) * (v - mv);
        svv += (v - mv) * (v - mv);
    }
    if points.len() < 2 || suu == 0.0 {
        return Err(Error::DegenerateFit("all abscissae are equal".into()));
    }
    let slope = suv / suu;
    let r2 = if svv == 0.0 {
        1.0
    } else {
        suv * suv / (suu * svv)
    };
    Ok(PowerFit {
        slope,
        intercept: mv - slope * mu,
        r2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power_law(c: f64, k: i32) -> Vec<(f64, f64)> {
        (1..=8)
            .map(|i| (i as f64 * 3.0, c / (i as f64 * 3.0).powi(k)))
            .collect()
    }

    #[test]
    fn exact_power_laws() {
        let f = slope_fit(&power_law(7.0, 1)).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        assert!((f.intercept - 7f64.ln()).abs() < 1e-12);
        let f = slope_fit(&power_law(3.0, 2)).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            slope_fit(&[(1.0, 1.0), (2.0, 0.5)]),
            Err(Error::DegenerateFit(_))
        ));
        assert!(slope_fit(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0), (4.0, 1.0)]).is_err());
        assert!(slope_fit(&[(2.0, 1.0), (2.0, 0.5), (2.0, 0.2), (2.0, 0.1)]).is_err());
    }
}
