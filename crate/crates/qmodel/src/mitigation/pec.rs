//! Signed Monte Carlo simulation of the mitigated model circuit.
//!
//! Each run prepares a sampled noisy preparation variant, then per step
//! applies the noisy model unitary, a sampled basis operation, and a
//! sampled readout variant on the ancilla, resetting it between steps.
//! The run records one outcome word and the product sign of every sampled
//! coefficient; reweighting the signed counts by the total cost `C`
//! removes the noise bias in expectation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mitigation::basis::build_basis_set;
use crate::mitigation::gst::{
    compute_hat, decompose_quasiprob, decompose_state_measurement, prep_labels, run_gst,
    GstExecutor, GstShots, GstTarget,
};
use crate::mitigation::{MitigatedDistribution, QuasiprobDecomposition};
use crate::ptm::{
    measure_pauli_qubit, prep_state_ptm, project_qubit, reset_qubit, NoiseModel,
    PauliTransferMatrix, PrepLabel, PtmStateVector,
};

/// Everything a Monte Carlo run needs, assembled once.
#[derive(Clone, Debug)]
pub struct PecPlan {
    pub steps: usize,
    pub n_qubits: usize,
    /// The measured-and-reset qubit (least significant register position).
    pub ancilla: usize,
    pub noise: NoiseModel,
    /// Physical noisy channel of the model unitary.
    pub op_noisy: PauliTransferMatrix,
    /// Physical noisy channels of every basis operation.
    pub basis_noisy: Vec<PauliTransferMatrix>,
    /// Inverse-noise expansion over basis-operation hats.
    pub op_decomp: QuasiprobDecomposition,
    /// Initial register preparation variants (frame columns).
    pub prep_decomp: QuasiprobDecomposition,
    /// Ancilla re-preparation variants between steps.
    pub reset_decomp: QuasiprobDecomposition,
    /// Per-ancilla readout variants: leading coin entry, then the four
    /// Pauli observables.
    pub meas_decomp: QuasiprobDecomposition,
}

impl PecPlan {
    /// Total sampling cost: every sampled stage contributes its `C`.
    pub fn total_cost(&self) -> f64 {
        let t = self.steps as i32;
        self.prep_decomp.cost
            * self.op_decomp.cost.powi(t)
            * self.meas_decomp.cost.powi(t)
            * self.reset_decomp.cost.powi(t - 1)
    }
}

/// Tomography summary recorded while building a plan.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PecDiagnostics {
    pub gram_condition: f64,
    pub op_cost: f64,
    pub prep_cost: f64,
    pub meas_cost: f64,
    pub reset_cost: f64,
    pub total_cost_per_step_run: f64,
    /// Set when the reconstructed inverse noise strays far from identity.
    pub inverse_noise_warning: bool,
}

/// A built plan together with its tomography data and summary numbers.
#[derive(Clone, Debug)]
pub struct PecBuild {
    pub plan: PecPlan,
    pub diagnostics: PecDiagnostics,
    pub gst: crate::mitigation::gst::GstDataset,
}

/// Characterize the noisy model unitary with gate set tomography and build
/// the sampling plan for `steps` emissions.
pub fn build_pec_plan(
    op_exact: &PauliTransferMatrix,
    noise: &NoiseModel,
    shots: GstShots,
    seed: u64,
    steps: usize,
) -> Result<(PecPlan, PecDiagnostics)> {
    let built = build_pec(op_exact, noise, shots, seed, steps)?;
    Ok((built.plan, built.diagnostics))
}

/// As [`build_pec_plan`], also returning the raw tomography dataset.
pub fn build_pec(
    op_exact: &PauliTransferMatrix,
    noise: &NoiseModel,
    shots: GstShots,
    seed: u64,
    steps: usize,
) -> Result<PecBuild> {
    noise.validate()?;
    let n = op_exact.n_qubits;
    let basis = build_basis_set(n)?;
    let op_noisy = noise.register_channel(n).compose(op_exact);

    // Register-level tomography: the operator and all basis operations.
    let executor = GstExecutor::new(n, *noise);
    let gst = run_gst(&executor, std::slice::from_ref(&op_noisy), Some(&basis), shots, seed)?;
    let op_hat = compute_hat(&gst, GstTarget::Operator(0))?;
    let (inverse, warn) = crate::mitigation::gst::inverse_noise(op_exact, &op_hat)?;
    let basis_hats: Vec<PauliTransferMatrix> = (0..basis.len())
        .map(|i| compute_hat(&gst, GstTarget::Basis(i)))
        .collect::<Result<_>>()?;
    let op_decomp = decompose_quasiprob(&inverse, &basis_hats, basis.labels())?;
    let (prep_decomp, _) = decompose_state_measurement(&gst)?;

    // Ancilla-local tomography for readout and reset corrections.
    let anc_executor = GstExecutor::new(1, *noise);
    let anc_gst = run_gst(&anc_executor, &[], None, shots, seed.wrapping_add(0x5eed))?;
    let (reset_decomp, meas_decomp) = decompose_state_measurement(&anc_gst)?;

    let plan = PecPlan {
        steps,
        n_qubits: n,
        ancilla: n - 1,
        noise: *noise,
        op_noisy,
        basis_noisy: basis.operations.iter().map(|op| op.noisy(noise)).collect(),
        op_decomp,
        prep_decomp,
        reset_decomp,
        meas_decomp,
    };
    let diagnostics = PecDiagnostics {
        gram_condition: gst.gram_condition,
        op_cost: plan.op_decomp.cost,
        prep_cost: plan.prep_decomp.cost,
        meas_cost: plan.meas_decomp.cost,
        reset_cost: plan.reset_decomp.cost,
        total_cost_per_step_run: plan.total_cost(),
        inverse_noise_warning: warn,
    };
    Ok(PecBuild { plan, diagnostics, gst })
}

/// One signed shot: returns the recorded outcome word (first step in the
/// most significant bit) and the product sign of all sampled coefficients.
pub fn monte_carlo_run(plan: &PecPlan, rng: &mut impl Rng) -> (usize, i8) {
    let mut sign = 1i8;

    let (prep_idx, s) = plan.prep_decomp.sample(rng);
    sign *= s;
    let mut state = noisy_prep_state(prep_idx, plan.n_qubits, &plan.noise);

    let mut word = 0usize;
    for step in 0..plan.steps {
        state = plan.op_noisy.apply(&state);
        let (basis_idx, s) = plan.op_decomp.sample(rng);
        sign *= s;
        state = plan.basis_noisy[basis_idx].apply(&state);

        let (meas_idx, s) = plan.meas_decomp.sample(rng);
        sign *= s;
        let bit = match meas_idx {
            // Coin variant: no physical measurement, a fair recorded bit.
            0 => u8::from(rng.gen::<bool>()),
            // Identity observable: outcome +1 deterministically.
            1 => 0,
            // Pauli observable on the ancilla, with readout flip.
            obs => {
                let outcome =
                    measure_pauli_qubit(&mut state, plan.ancilla, obs - 1, rng).expect("valid axis");
                let flip = plan.noise.eps_meas > 0.0 && rng.gen::<f64>() < plan.noise.eps_meas;
                outcome ^ u8::from(flip)
            }
        };
        word = (word << 1) | bit as usize;

        if step + 1 < plan.steps {
            let (reset_idx, s) = plan.reset_decomp.sample(rng);
            sign *= s;
            let fresh = noisy_prep_vector(reset_idx, &plan.noise);
            reset_qubit(&mut state, plan.ancilla, &fresh);
        }
    }
    (word, sign)
}

fn noisy_prep_state(index: usize, n_qubits: usize, noise: &NoiseModel) -> PtmStateVector {
    let ideal = prep_state_ptm(&prep_labels(index, n_qubits));
    noise.prep_channel(n_qubits).apply(&ideal)
}

fn noisy_prep_vector(index: usize, noise: &NoiseModel) -> [f64; 4] {
    let v = PrepLabel::ALL[index].single_qubit_vector();
    let scale = 1.0 - 2.0 * noise.eps_prep;
    [v[0], v[1], scale * v[2], scale * v[3]]
}

/// Run `n_mc` signed shots and post-process the counts into mitigated
/// probabilities, optionally splitting the runs into fixed-size chunks for
/// variance analysis. Chunks execute in parallel on deterministic
/// per-chunk streams derived from `master_seed`.
pub fn run_pec(
    plan: &PecPlan,
    n_mc: u64,
    master_seed: u64,
    chunk_size: Option<u64>,
) -> Result<MitigatedDistribution> {
    Ok(run_pec_impl(plan, n_mc, master_seed, chunk_size, false)?.0)
}

/// As [`run_pec`], additionally returning the per-run `(outcome, sign)`
/// record stream in run order.
pub fn run_pec_with_records(
    plan: &PecPlan,
    n_mc: u64,
    master_seed: u64,
    chunk_size: Option<u64>,
) -> Result<(MitigatedDistribution, Vec<(u32, i8)>)> {
    let (dist, records) = run_pec_impl(plan, n_mc, master_seed, chunk_size, true)?;
    Ok((dist, records.expect("records requested")))
}

#[allow(clippy::type_complexity)]
fn run_pec_impl(
    plan: &PecPlan,
    n_mc: u64,
    master_seed: u64,
    chunk_size: Option<u64>,
    collect_records: bool,
) -> Result<(MitigatedDistribution, Option<Vec<(u32, i8)>>)> {
    if n_mc == 0 {
        return Err(Error::EmptyInput("n_mc must be positive".into()));
    }
    let n_outcomes = 1usize << plan.steps;
    let chunk = chunk_size.unwrap_or(65_536).min(n_mc).max(1);
    let n_chunks = n_mc.div_ceil(chunk);

    let per_chunk: Vec<(Vec<u64>, Vec<u64>, Vec<(u32, i8)>)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
            rng.set_stream(c + 1);
            let runs = chunk.min(n_mc - c * chunk);
            let mut pos = vec![0u64; n_outcomes];
            let mut neg = vec![0u64; n_outcomes];
            let mut records = Vec::new();
            if collect_records {
                records.reserve(runs as usize);
            }
            for _ in 0..runs {
                let (word, sign) = monte_carlo_run(plan, &mut rng);
                if sign > 0 {
                    pos[word] += 1;
                } else {
                    neg[word] += 1;
                }
                if collect_records {
                    records.push((word as u32, sign));
                }
            }
            (pos, neg, records)
        })
        .collect();

    let cost = plan.total_cost();
    let mut counts_positive = vec![0u64; n_outcomes];
    let mut counts_negative = vec![0u64; n_outcomes];
    for (pos, neg, _) in &per_chunk {
        for w in 0..n_outcomes {
            counts_positive[w] += pos[w];
            counts_negative[w] += neg[w];
        }
    }
    let p_qem: Vec<f64> = (0..n_outcomes)
        .map(|w| cost * (counts_positive[w] as f64 - counts_negative[w] as f64) / n_mc as f64)
        .collect();
    let chunk_estimates = chunk_size.map(|size| {
        per_chunk
            .iter()
            .enumerate()
            .map(|(c, (pos, neg, _))| {
                let runs = size.min(n_mc - c as u64 * size) as f64;
                (0..n_outcomes)
                    .map(|w| cost * (pos[w] as f64 - neg[w] as f64) / runs)
                    .collect()
            })
            .collect()
    });
    let records = collect_records.then(|| {
        let mut all = Vec::with_capacity(n_mc as usize);
        for (_, _, chunk_records) in per_chunk {
            all.extend(chunk_records);
        }
        all
    });

    let dist = MitigatedDistribution {
        outcomes: (0..n_outcomes).map(|w| format!("{w:0width$b}", width = plan.steps)).collect(),
        p_qem,
        counts_positive,
        counts_negative,
        cost,
        n_mc,
        steps: plan.steps,
        sigma_predicted: cost / (n_mc as f64).sqrt(),
        chunk_estimates,
    };
    Ok((dist, records))
}

/// Exact `t`-step outcome distribution of a channel with ideal state
/// preparation, Z readout, and resets: the noiseless reference when fed
/// the exact operator, or the unmitigated noisy distribution when fed the
/// noisy channel plus its SPAM noise.
pub fn exact_step_distribution(
    op: &PauliTransferMatrix,
    steps: usize,
) -> Result<Vec<f64>> {
    step_distribution_with_spam(op, steps, &NoiseModel::ideal())
}

/// Same enumeration with noisy preparation, readout flips, and noisy
/// resets.
pub fn noisy_step_distribution(
    op: &PauliTransferMatrix,
    steps: usize,
    noise: &NoiseModel,
) -> Result<Vec<f64>> {
    step_distribution_with_spam(op, steps, noise)
}

fn step_distribution_with_spam(
    op: &PauliTransferMatrix,
    steps: usize,
    noise: &NoiseModel,
) -> Result<Vec<f64>> {
    let n = op.n_qubits;
    let ancilla = n - 1;
    let init = noisy_prep_state(0, n, noise);
    let mut out = vec![0.0; 1 << steps];
    branch_outcomes(op, ancilla, noise, &init, steps, 1.0, 0, &mut out);
    let total: f64 = out.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::UnphysicalState { violation: (total - 1.0).abs() });
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn branch_outcomes(
    op: &PauliTransferMatrix,
    ancilla: usize,
    noise: &NoiseModel,
    state: &PtmStateVector,
    remaining: usize,
    prob: f64,
    word: usize,
    out: &mut Vec<f64>,
) {
    if remaining == 0 {
        out[word] += prob;
        return;
    }
    if prob <= 1e-300 {
        return;
    }
    let evolved = op.apply(state);
    for true_bit in 0..2u8 {
        let mut collapsed = evolved.clone();
        let p_true = project_qubit(&mut collapsed, ancilla, true_bit).clamp(0.0, 1.0);
        if p_true <= 1e-300 {
            continue;
        }
        if remaining > 1 {
            let fresh = noisy_prep_vector(0, noise);
            reset_qubit(&mut collapsed, ancilla, &fresh);
        }
        for flip in 0..2u8 {
            let p_flip = if flip == 1 { noise.eps_meas } else { 1.0 - noise.eps_meas };
            if p_flip <= 0.0 {
                continue;
            }
            let recorded = (true_bit ^ flip) as usize;
            branch_outcomes(
                op,
                ancilla,
                noise,
                &collapsed,
                remaining - 1,
                prob * p_true * p_flip,
                (word << 1) | recorded,
                out,
            );
        }
    }
}

/// Analytic expectation of the mitigated estimator at `t = 1`: enumerate
/// every (preparation, basis operation, readout variant) combination with
/// its signed weight. Used to check unbiasedness without sampling noise.
pub fn pec_expected_distribution(plan: &PecPlan) -> Vec<f64> {
    assert_eq!(plan.steps, 1, "enumeration implemented for one step");
    let mut expect = vec![0.0; 2];
    for (k, &qk) in plan.prep_decomp.coefficients.iter().enumerate() {
        if qk == 0.0 {
            continue;
        }
        let prepared = noisy_prep_state(k, plan.n_qubits, &plan.noise);
        let evolved = plan.op_noisy.apply(&prepared);
        for (i, &qi) in plan.op_decomp.coefficients.iter().enumerate() {
            if qi == 0.0 {
                continue;
            }
            let corrected = plan.basis_noisy[i].apply(&evolved);
            for (j, &qj) in plan.meas_decomp.coefficients.iter().enumerate() {
                if qj == 0.0 {
                    continue;
                }
                let weight = qk * qi * qj;
                let bit_probs = readout_variant_probabilities(plan, &corrected, j);
                expect[0] += weight * bit_probs[0];
                expect[1] += weight * bit_probs[1];
            }
        }
    }
    expect
}

/// Probability of recording 0 / 1 under readout variant `j`.
fn readout_variant_probabilities(plan: &PecPlan, state: &PtmStateVector, j: usize) -> [f64; 2] {
    match j {
        0 => [0.5, 0.5],
        1 => [1.0, 0.0],
        obs => {
            let axis = obs - 1;
            // <P> on the ancilla: expectation of the observable.
            let mut idx = 0usize;
            for q in 0..plan.n_qubits {
                let digit = if q == plan.ancilla { axis } else { 0 };
                idx = idx * 4 + digit;
            }
            let exp = state.components[idx];
            let p_plus = 0.5 * (1.0 + exp);
            let e = plan.noise.eps_meas;
            let p0 = (1.0 - e) * p_plus + e * (1.0 - p_plus);
            [p0, 1.0 - p0]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::MemoryStateSet;
    use crate::ptm::ptm_of_unitary;
    use crate::synthesis::build_unitary;

    fn coin_op(p: f64) -> PauliTransferMatrix {
        let set = MemoryStateSet::exact_perturbed_coin(p);
        let model = build_unitary(&set, 99).unwrap();
        ptm_of_unitary(&model.unitary)
    }

    fn mild_noise() -> NoiseModel {
        NoiseModel { q_dep2: 0.02, eps_meas: 0.02, ..NoiseModel::ideal() }
    }

    #[test]
    fn noiseless_plan_is_trivial() {
        let op = coin_op(0.2);
        let (plan, diag) =
            build_pec_plan(&op, &NoiseModel::ideal(), GstShots::Exact, 7, 1).unwrap();
        assert!((plan.total_cost() - 1.0).abs() < 1e-6, "cost {}", plan.total_cost());
        assert!(!diag.inverse_noise_warning);
        // All signs positive in the noiseless plan.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let (_, sign) = monte_carlo_run(&plan, &mut rng);
            assert_eq!(sign, 1);
        }
    }

    #[test]
    fn noiseless_sampling_matches_chain() {
        let op = coin_op(0.2);
        let (plan, _) = build_pec_plan(&op, &NoiseModel::ideal(), GstShots::Exact, 7, 1).unwrap();
        let n: u64 = 40_000;
        let dist = run_pec(&plan, n, 42, None).unwrap();
        // Outcome 1 with frequency 0.8 within 3 sigma.
        let bound = 3.0 / (n as f64).sqrt();
        assert!((dist.p_qem[1] - 0.8).abs() < bound, "p1 = {}", dist.p_qem[1]);
        assert!((dist.p_qem[0] + dist.p_qem[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn expected_estimator_is_unbiased_at_one_step() {
        let op = coin_op(0.2);
        let ideal = exact_step_distribution(&op, 1).unwrap();
        let (plan, _) = build_pec_plan(&op, &mild_noise(), GstShots::Exact, 11, 1).unwrap();
        let expect = pec_expected_distribution(&plan);
        assert!((expect[0] - ideal[0]).abs() < 1e-9, "{expect:?} vs {ideal:?}");
        assert!((expect[1] - ideal[1]).abs() < 1e-9);
        assert!(plan.total_cost() > 1.0);
    }

    #[test]
    fn expected_estimator_unbiased_with_heavy_spam() {
        let op = coin_op(0.3);
        let noise = NoiseModel {
            q_dep2: 0.05,
            gamma_ad: 0.1,
            q_z: 0.03,
            eps_meas: 0.06,
            eps_prep: 0.04,
            q_dep: 0.0,
        };
        let ideal = exact_step_distribution(&op, 1).unwrap();
        let (plan, _) = build_pec_plan(&op, &noise, GstShots::Exact, 13, 1).unwrap();
        let expect = pec_expected_distribution(&plan);
        assert!((expect[0] - ideal[0]).abs() < 1e-8, "{expect:?} vs {ideal:?}");
    }

    #[test]
    fn exact_distribution_matches_model_enumeration() {
        let p = 0.2;
        let set = MemoryStateSet::exact_perturbed_coin(p);
        let model = build_unitary(&set, 99).unwrap();
        let op = ptm_of_unitary(&model.unitary);
        for t in 1..=3 {
            let from_ptm = exact_step_distribution(&op, t).unwrap();
            let from_vec = model.joint_distribution(&model.memory_state(0), t).unwrap();
            for (a, b) in from_ptm.iter().zip(&from_vec) {
                assert!((a - b).abs() < 1e-10, "t = {t}");
            }
        }
    }

    #[test]
    fn mitigated_beats_noisy_at_one_step() {
        let op = coin_op(0.2);
        let noise = mild_noise();
        let ideal = exact_step_distribution(&op, 1).unwrap();
        let noisy_op = noise.register_channel(2).compose(&op);
        let noisy = noisy_step_distribution(&noisy_op, 1, &noise).unwrap();
        let bias = (noisy[1] - ideal[1]).abs();
        assert!(bias > 0.01, "noise should visibly bias the output ({bias})");

        let (plan, _) = build_pec_plan(&op, &noise, GstShots::Exact, 5, 1).unwrap();
        let n: u64 = 200_000;
        let dist = run_pec(&plan, n, 1234, None).unwrap();
        let err = (dist.p_qem[1] - ideal[1]).abs();
        assert!(err < 3.0 * dist.sigma_predicted, "err {err} sigma {}", dist.sigma_predicted);
        assert!(err < bias, "mitigation must beat the noisy bias: {err} vs {bias}");
    }

    #[test]
    fn two_step_noiseless_joint_distribution() {
        let op = coin_op(0.2);
        let (plan, _) = build_pec_plan(&op, &NoiseModel::ideal(), GstShots::Exact, 3, 2).unwrap();
        let n: u64 = 60_000;
        let dist = run_pec(&plan, n, 9, None).unwrap();
        let ideal = exact_step_distribution(&op, 2).unwrap();
        let bound = 4.0 / (n as f64).sqrt();
        for (got, want) in dist.p_qem.iter().zip(&ideal) {
            assert!((got - want).abs() < bound, "{:?} vs {ideal:?}", dist.p_qem);
        }
    }

    #[test]
    fn chunked_run_shapes_and_determinism() {
        let op = coin_op(0.2);
        let (plan, _) = build_pec_plan(&op, &mild_noise(), GstShots::Exact, 21, 1).unwrap();
        let a = run_pec(&plan, 10_000, 77, Some(1_000)).unwrap();
        let chunks = a.chunk_estimates.as_ref().unwrap();
        assert_eq!(chunks.len(), 10);
        let b = run_pec(&plan, 10_000, 77, Some(1_000)).unwrap();
        assert_eq!(a.p_qem, b.p_qem);
        assert_eq!(a.chunk_estimates, b.chunk_estimates);
        // Chunk means aggregate to the full estimate.
        let mean0: f64 = chunks.iter().map(|c| c[0]).sum::<f64>() / 10.0;
        assert!((mean0 - a.p_qem[0]).abs() < 1e-12);
    }

    #[test]
    fn qem_probabilities_sum_near_one() {
        let op = coin_op(0.2);
        let (plan, _) = build_pec_plan(&op, &mild_noise(), GstShots::Exact, 31, 1).unwrap();
        let dist = run_pec(&plan, 100_000, 5, None).unwrap();
        let total: f64 = dist.p_qem.iter().sum();
        let slack = 3.0 * dist.sigma_predicted * (dist.p_qem.len() as f64).sqrt();
        assert!((total - 1.0).abs() <= slack, "total {total} slack {slack}");
    }

    #[test]
    fn unbiased_over_fifty_independent_estimates() {
        // Statistical counterpart of the algebraic expectation check: the
        // mean of 50 independent estimates stays within 4 sigma / sqrt(50).
        let op = coin_op(0.2);
        let ideal = exact_step_distribution(&op, 1).unwrap();
        let (plan, _) = build_pec_plan(&op, &mild_noise(), GstShots::Exact, 19, 1).unwrap();
        let n_each: u64 = 20_000;
        let estimates: Vec<f64> = (0..50u64)
            .map(|r| run_pec(&plan, n_each, 5000 + r, None).unwrap().p_qem[1])
            .collect();
        let mean = estimates.iter().sum::<f64>() / 50.0;
        let sigma = plan.total_cost() / (n_each as f64).sqrt();
        let bound = 4.0 * sigma / 50f64.sqrt();
        assert!(
            (mean - ideal[1]).abs() < bound,
            "mean {mean} vs ideal {} (bound {bound})",
            ideal[1]
        );
    }

    #[test]
    fn mitigated_beats_noisy_across_depolarizing_sweep() {
        let op = coin_op(0.2);
        let ideal = exact_step_distribution(&op, 1).unwrap();
        for q in [0.01, 0.02, 0.05] {
            let noise = NoiseModel { q_dep2: q, eps_meas: 0.02, ..NoiseModel::ideal() };
            let noisy_op = noise.register_channel(2).compose(&op);
            let noisy = noisy_step_distribution(&noisy_op, 1, &noise).unwrap();
            let bias = (noisy[1] - ideal[1]).abs();
            let (plan, _) = build_pec_plan(&op, &noise, GstShots::Exact, 7, 1).unwrap();
            let mut wins = 0;
            for rep in 0..10u64 {
                let dist = run_pec(&plan, 200_000, 7000 + rep, None).unwrap();
                if (dist.p_qem[1] - ideal[1]).abs() < bias {
                    wins += 1;
                }
            }
            assert!(wins > 5, "q = {q}: only {wins}/10 replicates beat the bias {bias:.4}");
        }
    }

    #[test]
    fn shot_gst_plan_still_effective() {
        let op = coin_op(0.2);
        let ideal = exact_step_distribution(&op, 1).unwrap();
        let noise = mild_noise();
        let (plan, diag) =
            build_pec_plan(&op, &noise, GstShots::Shots(8192), 17, 1).unwrap();
        assert!(diag.gram_condition < 1e3);
        let dist = run_pec(&plan, 100_000, 23, None).unwrap();
        // Finite tomography leaves a small systematic bias; stay within a
        // loose band rather than the statistical bound.
        assert!((dist.p_qem[1] - ideal[1]).abs() < 0.05, "p1 {}", dist.p_qem[1]);
    }
}
