//! The symmetric lattice walk `S_n` on `Z^M`, `M = d(m+1)`, with steps
//! `+-e_j` of probability `theta_j / 2`, and its projections
//! `U_n = S_n (x) omega-bar` on `R^d` and the torus.
//!
//! Lattice coordinates are axis-major: `j = k (m+1) + i`, where `i = 0` is the
//! unit base frequency of axis `k`.

mod envelope;
mod lattice;
mod point;
mod project;
mod series;
mod targeted;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

pub use envelope::{
    binomial_envelope_check, envelope_fit, gauss_sum_check, BinomialEnvelope, EnvelopeFit, GaussSumBounds, C_BIN,
    ENVELOPE_EXPONENT,
};
pub use lattice::{evolve, Evolution, LatticeDistribution, DEFAULT_CELL_BUDGET};
pub use point::{path_count, point_probability, point_probability_exact};
pub use project::{p_n_k, pbar_n_k, Interval, Projection, Projector};
pub use series::{
    i_beta, j_beta, recurrence_series, statistic_table, SeriesRequest, SeriesWeights, Statistic, StatisticTable,
    TailMode, TailedSum, DEFAULT_PRUNE,
};
pub use targeted::{asymptotic_tail, j_beta_targeted, local_clt, AsymptoticSeries, TargetSet};

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::real::Frequencies;
use crate::{Error, Result};

/// Frequencies plus the step weights `theta`.
#[derive(Clone, Debug)]
pub struct WalkConfig {
    freqs: Frequencies,
    weights: Vec<f64>,
}

impl WalkConfig {
    /// Uniform weights `1/M`.
    pub fn uniform(freqs: Frequencies) -> Self {
        let m = freqs.lattice_dim();
        WalkConfig {
            freqs,
            weights: vec![1.0 / m as f64; m],
        }
    }

    pub fn with_weights(freqs: Frequencies, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != freqs.lattice_dim() {
            return Err(Error::Invalid(format!(
                "{} weights for lattice dimension {}",
                weights.len(),
                freqs.lattice_dim()
            )));
        }
        if weights.iter().any(|&t| !(t > 0.0 && t <= 0.5)) && weights.len() > 1 {
            return Err(Error::Invalid("each weight must lie in (0, 1/2]".into()));
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > 4.0 * f64::EPSILON * weights.len() as f64 {
            return Err(Error::Invalid(format!("weights sum to {s}, not 1")));
        }
        Ok(WalkConfig { freqs, weights })
    }

    /// A bare walk on `Z^M` (`d = M` axes without frequencies), for lattice-only checks.
    pub fn lattice(dim: usize) -> Self {
        let freqs =
            Frequencies::new(vec![Vec::new(); dim], crate::real::DEFAULT_PRECISION).expect("empty rows are valid");
        WalkConfig::uniform(freqs)
    }

    pub fn freqs(&self) -> &Frequencies {
        &self.freqs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Lattice dimension `M`.
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Per-axis variance of one step of `U`: `sum_{j in axis k} theta_j omega-bar_j^2`.
    pub fn axis_variances(&self) -> Vec<f64> {
        let bar = self.freqs.bar_f64();
        let m1 = self.freqs.m() + 1;
        (0..self.freqs.d())
            .map(|k| {
                (0..m1)
                    .map(|i| self.weights[k * m1 + i] * bar[k * m1 + i].powi(2))
                    .sum()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests;
