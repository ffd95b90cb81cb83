//! Probabilistic error cancellation: gate set tomography, quasiprobability
//! decomposition, signed Monte Carlo sampling, and post-processing.
//!
//! The workflow mirrors its four steps: [`gst::run_gst`] characterizes the
//! noisy primitives, [`gst::decompose_quasiprob`] expands each inverse
//! noise map over implementable [`basis`] operations, [`pec::run_pec`]
//! samples signed circuit variants, and [`MitigatedDistribution`] holds the
//! reweighted outcome statistics together with the predicted sampling cost.

pub mod basis;
pub mod gst;
pub mod pec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use basis::{build_basis_set, BasisKind, BasisOperation, BasisOperationSet};
pub use gst::{
    compute_hat, decompose_quasiprob, decompose_state_measurement, gst_error_scaling,
    inverse_noise, run_gst, GstDataset, GstExecutor, GstShots, GstTarget, ShotScalingReport,
};
pub use pec::{
    build_pec, build_pec_plan, exact_step_distribution, monte_carlo_run,
    noisy_step_distribution, run_pec, run_pec_with_records, PecBuild, PecDiagnostics, PecPlan,
};

/// Signed coefficients over a family of implementable variants, with the
/// sampling table used by the Monte Carlo stage.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuasiprobDecomposition {
    pub coefficients: Vec<f64>,
    pub labels: Vec<String>,
    /// Sampling cost `C = sum |q_i|`.
    pub cost: f64,
    /// Cumulative `|q_i| / C` table.
    pub cdf: Vec<f64>,
    pub signs: Vec<i8>,
}

impl QuasiprobDecomposition {
    pub fn new(coefficients: Vec<f64>, labels: Vec<String>) -> Self {
        assert_eq!(coefficients.len(), labels.len());
        let cost: f64 = coefficients.iter().map(|q| q.abs()).sum();
        let mut cdf = Vec::with_capacity(coefficients.len());
        let mut acc = 0.0;
        for q in &coefficients {
            acc += q.abs() / cost;
            cdf.push(acc);
        }
        let signs = coefficients.iter().map(|q| if *q < 0.0 { -1i8 } else { 1 }).collect();
        QuasiprobDecomposition { coefficients, labels, cost, cdf, signs }
    }

    /// Draw a variant index proportionally to `|q_i| / C`.
    pub fn sample(&self, rng: &mut impl Rng) -> (usize, i8) {
        let u: f64 = rng.gen();
        let idx = match self.cdf.iter().position(|&c| u < c) {
            Some(i) => i,
            None => self.cdf.len() - 1,
        };
        (idx, self.signs[idx])
    }
}

/// Compounded Monte Carlo standard deviation `C^t / sqrt(N)`.
pub fn sigma_mc(cost: f64, n_mc: f64, t: u32) -> f64 {
    assert!(cost > 0.0 && n_mc > 0.0 && t >= 1);
    cost.powi(t as i32) / n_mc.sqrt()
}

/// Bhattacharyya fidelity `sum sqrt(p_i q_i)`; entries below zero (allowed
/// in raw mitigated estimates) contribute nothing.
pub fn distribution_fidelity(p: &[f64], q: &[f64]) -> f64 {
    let len = p.len().max(q.len());
    let mut total = 0.0;
    for i in 0..len {
        let a = p.get(i).copied().unwrap_or(0.0).max(0.0);
        let b = q.get(i).copied().unwrap_or(0.0).max(0.0);
        total += (a * b).sqrt();
    }
    total
}

/// Predicted fidelity loss `C^{2t} / (8 N) sum_i 1 / p_i` from the
/// second-order expansion around the exact distribution.
pub fn predict_fidelity_perturbation(
    cost: f64,
    t: u32,
    n_mc: f64,
    p_exact: &[f64],
) -> Result<f64> {
    for (i, &p) in p_exact.iter().enumerate() {
        if p <= 0.0 {
            return Err(Error::ZeroProbabilityOutcome(i));
        }
    }
    let inv_sum: f64 = p_exact.iter().map(|&p| 1.0 / p).sum();
    Ok(cost.powi(2 * t as i32) / (8.0 * n_mc) * inv_sum)
}

/// Post-processed output of a mitigated Monte Carlo run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MitigatedDistribution {
    /// Outcome words over `steps` bits, index-aligned with `p_qem`.
    pub outcomes: Vec<String>,
    /// Raw reweighted estimates; individual entries may leave `[0, 1]`.
    pub p_qem: Vec<f64>,
    pub counts_positive: Vec<u64>,
    pub counts_negative: Vec<u64>,
    pub cost: f64,
    pub n_mc: u64,
    pub steps: usize,
    /// `C / sqrt(N)` with the full multi-step cost `C`.
    pub sigma_predicted: f64,
    /// Per-chunk estimates when chunked post-processing was requested.
    pub chunk_estimates: Option<Vec<Vec<f64>>>,
}

impl MitigatedDistribution {
    /// Clipped-and-renormalized view for fidelity computations; the raw
    /// estimator record stays untouched.
    pub fn clipped_normalized(&self) -> Vec<f64> {
        let clipped: Vec<f64> = self.p_qem.iter().map(|&p| p.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        if total <= 0.0 {
            return vec![1.0 / clipped.len() as f64; clipped.len()];
        }
        clipped.iter().map(|&p| p / total).collect()
    }
}
