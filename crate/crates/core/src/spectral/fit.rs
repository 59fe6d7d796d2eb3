//! Least-squares power-law fits on log-log axes.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::{Error, Result};

/// `log y = slope log x + intercept`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in natural-log units.
    pub residual: f64,
    pub points: usize,
    /// `log10(max x / min x)`.
    pub decades: f64,
}

impl ScalingFit {
    /// Whether the scales span at least one decade.
    pub fn spans_decade(&self) -> bool {
        self.decades >= 1.0 - 1e-12
    }
}

/// Fits `(scale, value)` pairs; needs three points with positive coordinates.
///
/// Spans shorter than a decade are fitted but flagged through
/// [`ScalingFit::spans_decade`].
pub fn scaling_fit(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::Invalid("a scaling fit needs at least three points".into()));
    }
    if points
        .iter()
        .any(|&(x, y)| !(x > 0.0 && y > 0.0) || !x.is_finite() || !y.is_finite())
    {
        return Err(Error::Invalid("scaling fits need positive finite data".into()));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Invalid("scales must not all coincide".into()));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = logs.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let xmin = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let xmax = points.iter().map(|p| p.0).fold(0.0, f64::max);
    Ok(ScalingFit {
        slope,
        intercept,
        residual: (rss / n).sqrt(),
        points: points.len(),
        decades: (xmax / xmin).log10(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = [1.0, 2.0, 5.0, 10.0, 30.0].iter().map(|&t| (t, t * t * t)).collect();
        let f = scaling_fit(&pts).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-12);
        assert!(f.spans_decade());
        let c = scaling_fit(&[(1.0, 2.0), (10.0, 2.0), (100.0, 2.0)]).unwrap();
        assert!(c.slope.abs() < 1e-15);
        assert!(scaling_fit(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
        assert!(!scaling_fit(&[(5.0, 1.0), (10.0, 2.0), (40.0, 3.0)])
            .unwrap()
            .spans_decade());
    }
}
