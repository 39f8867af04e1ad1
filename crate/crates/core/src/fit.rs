//! Log-log convergence slopes.

use crate::error::{Error, Result};

/// Errors at or below this are treated as roundoff and left out of fits.
pub const ROUNDOFF_FLOOR: f64 = 1e-13;

/// Minimum number of usable points for a slope.
pub const MIN_FIT_POINTS: usize = 3;

/// Least-squares slope of `ln err` against `ln γ`.
///
/// Points with non-positive γ, non-finite error, or error at the roundoff
/// floor are skipped. Fewer than [`MIN_FIT_POINTS`] survivors is an error.
pub fn fit_convergence_slope(points: &[(f64, f64)]) -> Result<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(g, e)| *g > 0.0 && g.is_finite() && e.is_finite() && *e > ROUNDOFF_FLOOR)
        .map(|(g, e)| (g.ln(), e.ln()))
        .collect();
    if logs.len() < MIN_FIT_POINTS {
        return Err(Error::DegenerateFit { usable: logs.len() });
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit { usable: logs.len() });
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const GAMMAS: [f64; 4] = [0.1, 0.05, 0.02, 0.01];

    #[test]
    fn quadratic_and_linear() {
        let quad: Vec<_> = GAMMAS.iter().map(|&g| (g, g * g)).collect();
        let lin: Vec<_> = GAMMAS.iter().map(|&g| (g, g)).collect();
        assert!((fit_convergence_slope(&quad).unwrap() - 2.0).abs() < 1e-12);
        assert!((fit_convergence_slope(&lin).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn roundoff_points_are_dropped() {
        let pts = [(0.1, 1e-2), (0.05, 2.5e-3), (0.02, 1e-14), (0.01, 0.0)];
        assert!(matches!(fit_convergence_slope(&pts), Err(Error::DegenerateFit { usable: 2 })));
        let pts = [(0.1, 1e-2), (0.05, 2.5e-3), (0.02, 4e-4), (0.01, 1e-16)];
        assert!((fit_convergence_slope(&pts).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn repeated_gamma_is_degenerate() {
        let pts = [(0.1, 1e-2), (0.1, 2e-2), (0.1, 3e-2)];
        assert!(fit_convergence_slope(&pts).is_err());
    }

    proptest! {
        #[test]
        fn recovers_power_law(k in 0.5f64..3.0, c in 0.1f64..10.0) {
            let pts: Vec<_> = GAMMAS.iter().map(|&g| (g, c * g.powf(k))).collect();
            prop_assert!((fit_convergence_slope(&pts).unwrap() - k).abs() < 1e-10);
        }
    }
}
