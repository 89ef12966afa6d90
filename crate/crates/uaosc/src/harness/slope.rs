//! Log-log least-squares slopes.

use crate::error::{Error, Result};

/// Least-squares slope of `log2 y` against `log2 x`.
///
/// Needs at least two distinct `x`; all values must be positive and finite.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<f64> {
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(Error::Domain(format!("log-log fit needs positive finite data, got ({x}, {y})")));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.log2()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.log2()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if points.len() < 2 || sxx <= 1e-24 {
        return Err(Error::Domain("log-log fit needs at least two distinct x values".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let s = fit_slope(&[(1.0, 1.0), (2.0, 4.0), (4.0, 16.0)]).unwrap();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn constant_data_has_zero_slope() {
        assert_eq!(fit_slope(&[(1.0, 3.0), (2.0, 3.0)]).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_x_is_an_error() {
        assert!(fit_slope(&[(2.0, 1.0), (2.0, 3.0)]).is_err());
        assert!(fit_slope(&[(1.0, 1.0)]).is_err());
        assert!(fit_slope(&[(1.0, -1.0), (2.0, 1.0)]).is_err());
    }
}
