//! Acceptance suite: one test per headline criterion, each printing a
//! PASS line with the measured numbers (run with `--nocapture` to see
//! them). Tolerances are pinned in code.

use std::time::Instant;

use qmodel::inference::{
    classical_statistical_complexity, infer_memory_states, memory_advantage_region,
    merge_states, perturbed_coin_cq, quantum_statistical_memory, EpsilonMachine, MemoryStateSet,
};
use qmodel::linalg::random_unitary;
use qmodel::mitigation::{
    build_basis_set, build_pec_plan, compute_hat, decompose_quasiprob, distribution_fidelity,
    exact_step_distribution, gst_error_scaling, inverse_noise, noisy_step_distribution,
    predict_fidelity_perturbation, run_gst, run_pec, sigma_mc, GstExecutor, GstShots, GstTarget,
};
use qmodel::process::{conditional_distribution, generate_perturbed_coin, PerturbedCoinParams};
use qmodel::ptm::{depolarizing_ptm, ptm_of_unitary, NoiseModel, PauliTransferMatrix};
use qmodel::synthesis::{
    build_unitary, circuit_depth_formula, csd_decompose, reconstruct, UnitaryMatrix,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn coin_model_op(p: f64) -> (qmodel::synthesis::ModelUnitary, PauliTransferMatrix) {
    let set = MemoryStateSet::exact_perturbed_coin(p);
    let model = build_unitary(&set, 99).unwrap();
    let op = ptm_of_unitary(&model.unitary);
    (model, op)
}

fn std_dev(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

#[test]
fn criterion_01_memory_measures() {
    let start = Instant::now();
    let cq = perturbed_coin_cq(0.2);
    assert!((cq - 0.4690).abs() < 5e-4, "C_q(0.2) = {cq}");
    let machine = EpsilonMachine::perturbed_coin(0.2);
    let cmu = classical_statistical_complexity(&machine);
    assert_eq!(cmu, 1.0, "C_mu must be exactly one bit");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("[acceptance] criterion 1 PASS: C_q(0.2) = {cq:.6}, C_mu = {cmu}, {elapsed:?}");
}

#[test]
fn criterion_02_inferred_cq() {
    let start = Instant::now();
    let n = 100_000;
    let seq = generate_perturbed_coin(PerturbedCoinParams::new(0.2, 7).unwrap(), n).unwrap();
    let cond = conditional_distribution(&seq, 1).unwrap();
    let set = infer_memory_states(&cond, 1).unwrap();
    let (merged, _) = merge_states(&set, n).unwrap();
    let cq = quantum_statistical_memory(&merged);
    let err = (cq - 0.4690).abs();
    assert!(err < 0.02, "inferred C_q = {cq}");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!("[acceptance] criterion 2 PASS: inferred C_q = {cq:.4} (|err| = {err:.4}), {elapsed:?}");
}

#[test]
fn criterion_03_sigma_arithmetic() {
    let values = [
        (1u32, 0.0063),
        (2, 0.1265),
        (3, 2.5298),
    ];
    for (t, expect) in values {
        let got = sigma_mc(20.0, 1e7, t);
        assert!((got - expect).abs() < 5e-5, "sigma(t={t}) = {got}, expected {expect}");
    }
    println!(
        "[acceptance] criterion 3 PASS: sigma(20, 1e7, t) = {:.4} / {:.4} / {:.4}",
        sigma_mc(20.0, 1e7, 1),
        sigma_mc(20.0, 1e7, 2),
        sigma_mc(20.0, 1e7, 3)
    );
}

#[test]
fn criterion_04_memory_advantage_region() {
    let region = memory_advantage_region(1e6, 2500.0, 1.0);
    assert!((region.cq_threshold - 0.0025).abs() < 1e-12, "threshold {}", region.cq_threshold);
    assert!((region.p_interval.0 - 0.4866).abs() < 1e-3, "left {}", region.p_interval.0);
    assert!((region.p_interval.1 - 0.5134).abs() < 1e-3, "right {}", region.p_interval.1);
    println!(
        "[acceptance] criterion 4 PASS: threshold {:.4}, interval [{:.4}, {:.4}]",
        region.cq_threshold, region.p_interval.0, region.p_interval.1
    );
}

#[test]
fn criterion_05_csd_roundtrips() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst4 = 0.0f64;
    for _ in 0..100 {
        let u = random_unitary(4, &mut rng);
        let circuit = csd_decompose(&UnitaryMatrix::new(u.clone()).unwrap()).unwrap();
        worst4 = worst4.max(reconstruct(&circuit).max_abs_diff(&u));
    }
    let mut worst8 = 0.0f64;
    for _ in 0..20 {
        let u = random_unitary(8, &mut rng);
        let circuit = csd_decompose(&UnitaryMatrix::new(u.clone()).unwrap()).unwrap();
        worst8 = worst8.max(reconstruct(&circuit).max_abs_diff(&u));
    }
    assert!(worst4 <= 1e-9, "worst 4x4 roundtrip {worst4:.3e}");
    assert!(worst8 <= 1e-9, "worst 8x8 roundtrip {worst8:.3e}");
    assert_eq!(circuit_depth_formula(2, 1), 33);
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "[acceptance] criterion 5 PASS: worst roundtrip 4x4 {worst4:.2e}, 8x8 {worst8:.2e}, depth(2,1) = 33, {elapsed:?}"
    );
}

#[test]
fn criterion_06_unitary_construction_and_sampling() {
    let (model, op) = coin_model_op(0.2);
    // Derived fixed column.
    let col = model.unitary.matrix().column(0);
    let expect = [0.4472, 0.7155, 0.0, 0.5367];
    for (got, want) in col.iter().zip(expect) {
        assert!((got.re - want).abs() < 1e-3, "column {col:?}");
    }
    // Gram preservation in the circuit basis.
    let set = MemoryStateSet::exact_perturbed_coin(0.2);
    let gram = set.gram();
    let coords = &model.state_coords;
    for i in 0..2 {
        for j in 0..2 {
            let dot: f64 = (0..2).map(|k| coords[(i, k)] * coords[(j, k)]).sum();
            assert!((dot - gram[(i, j)]).abs() < 1e-9);
        }
    }
    // Noiseless 3-step sampling against the chain joint distribution.
    let (plan, _) =
        build_pec_plan(&op, &NoiseModel::ideal(), GstShots::Exact, 6, 3).unwrap();
    let n: u64 = 100_000;
    let dist = run_pec(&plan, n, 612, None).unwrap();
    let p = 0.2;
    let mut worst_sigma = 0.0f64;
    for word in 0..8usize {
        let mut state = 0usize;
        let mut expect = 1.0;
        for k in (0..3).rev() {
            let x = (word >> k) & 1;
            expect *= if x == state { p } else { 1.0 - p };
            state = x;
        }
        let bound = 3.0 * (expect * (1.0 - expect) / n as f64).sqrt();
        let err = (dist.p_qem[word] - expect).abs();
        assert!(err <= bound, "word {word:03b}: err {err:.4e} > 3 sigma {bound:.4e}");
        if bound > 0.0 {
            worst_sigma = worst_sigma.max(3.0 * err / bound);
        }
    }
    println!(
        "[acceptance] criterion 6 PASS: column matches, Gram preserved, 3-step words within 3 sigma (worst {worst_sigma:.2} sigma)"
    );
}

#[test]
fn criterion_07_exact_gst_identity_and_noiseless_costs() {
    // Single-qubit operators: identity, X, H.
    let executor = GstExecutor::new(1, NoiseModel::ideal());
    let x = {
        let mut m = qmodel::linalg::CMatrix::zeros(2, 2);
        m[(0, 1)] = num_complex::Complex64::new(1.0, 0.0);
        m[(1, 0)] = num_complex::Complex64::new(1.0, 0.0);
        qmodel::ptm::ptm_of_unitary(&UnitaryMatrix::new(m).unwrap())
    };
    let h = {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let m = qmodel::linalg::CMatrix::from_real_rows(&[&[s, s], &[s, -s]]);
        qmodel::ptm::ptm_of_unitary(&UnitaryMatrix::new(m).unwrap())
    };
    let mut worst = 0.0f64;
    for op in [PauliTransferMatrix::identity(1), x, h] {
        let gst =
            run_gst(&executor, std::slice::from_ref(&op), None, GstShots::Exact, 1).unwrap();
        let hat = compute_hat(&gst, GstTarget::Operator(0)).unwrap();
        worst = worst.max(hat.matrix.max_abs_diff(&op.matrix));
    }
    // The constructed two-qubit unitary.
    let (_, op2) = coin_model_op(0.2);
    let executor2 = GstExecutor::new(2, NoiseModel::ideal());
    let gst2 =
        run_gst(&executor2, std::slice::from_ref(&op2), None, GstShots::Exact, 2).unwrap();
    let hat2 = compute_hat(&gst2, GstTarget::Operator(0)).unwrap();
    worst = worst.max(hat2.matrix.max_abs_diff(&op2.matrix));
    assert!(worst <= 1e-9, "worst exact-GST reconstruction error {worst:.3e}");

    // Noiseless quasiprobability decompositions cost exactly one.
    let set1 = build_basis_set(1).unwrap();
    assert_eq!(set1.len(), 13);
    let hats1: Vec<_> = set1.operations.iter().map(|op| op.exact.clone()).collect();
    let d1 =
        decompose_quasiprob(&PauliTransferMatrix::identity(1), &hats1, set1.labels()).unwrap();
    assert!((d1.cost - 1.0).abs() < 1e-6, "n=1 noiseless cost {}", d1.cost);

    let set2 = build_basis_set(2).unwrap();
    assert_eq!(set2.len(), 241);
    let hats2: Vec<_> = set2.operations.iter().map(|op| op.exact.clone()).collect();
    let d2 =
        decompose_quasiprob(&PauliTransferMatrix::identity(2), &hats2, set2.labels()).unwrap();
    assert!((d2.cost - 1.0).abs() < 1e-6, "n=2 noiseless cost {}", d2.cost);
    println!(
        "[acceptance] criterion 7 PASS: exact-GST reconstruction to {worst:.2e}; noiseless C = {:.8} (13 ops) and {:.8} (241 ops)",
        d1.cost, d2.cost
    );
}

#[test]
fn criterion_08_analytic_inverse_depolarizing() {
    let q: f64 = 0.02;
    let (target, _) =
        inverse_noise(&PauliTransferMatrix::identity(1), &depolarizing_ptm(q, 1)).unwrap();
    let set = build_basis_set(1).unwrap();
    let hats: Vec<_> = set.operations[..4].iter().map(|op| op.exact.clone()).collect();
    let d = decompose_quasiprob(&target, &hats, set.labels()[..4].to_vec()).unwrap();
    let r = 1.0 / (1.0 - q);
    let expect_q = [(1.0 + 3.0 * r) / 4.0, (1.0 - r) / 4.0, (1.0 - r) / 4.0, (1.0 - r) / 4.0];
    for (got, want) in d.coefficients.iter().zip(expect_q) {
        assert!((got - want).abs() < 1e-8, "q = {:?}", d.coefficients);
    }
    assert!((d.cost - 1.0306).abs() < 1e-4, "cost {}", d.cost);
    println!(
        "[acceptance] criterion 8 PASS: C = {:.6} with q = ({:.5}, {:.5} x3)",
        d.cost, d.coefficients[0], d.coefficients[1]
    );
}

#[test]
fn criterion_09_mitigation_efficacy() {
    let start = Instant::now();
    let (_, op) = coin_model_op(0.2);
    let noise = NoiseModel { q_dep: 0.02, q_dep2: 0.02, eps_meas: 0.02, ..NoiseModel::ideal() };
    let ideal = exact_step_distribution(&op, 1).unwrap();
    let noisy_op = noise.register_channel(2).compose(&op);
    let noisy = noisy_step_distribution(&noisy_op, 1, &noise).unwrap();
    let bias = (noisy[1] - ideal[1]).abs();

    let (plan, _) = build_pec_plan(&op, &noise, GstShots::Exact, 9, 1).unwrap();
    let cost = plan.total_cost();
    let bound = 3.0 * cost / 1e3; // 3 C / sqrt(1e6)
    let n: u64 = 1_000_000;
    let mut wins = 0;
    let mut worst_err = 0.0f64;
    for rep in 0..10u64 {
        let dist = run_pec(&plan, n, 900 + rep, None).unwrap();
        let err = (dist.p_qem[1] - ideal[1]).abs();
        worst_err = worst_err.max(err);
        assert!(err <= bound, "replicate {rep}: err {err:.4e} > 3C/sqrt(N) = {bound:.4e}");
        if err < bias {
            wins += 1;
        }
    }
    assert!(wins >= 8, "mitigation beat the noisy bias in only {wins}/10 replicates");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    println!(
        "[acceptance] criterion 9 PASS: worst |err| {worst_err:.2e} <= {bound:.2e}, beat bias {bias:.4} in {wins}/10, C = {cost:.3}, {elapsed:?}"
    );
}

#[test]
fn criterion_10_variance_law() {
    let (_, op) = coin_model_op(0.2);
    let noise = NoiseModel {
        q_dep: 0.0,
        q_dep2: 0.07,
        gamma_ad: 0.06,
        q_z: 0.015,
        eps_meas: 0.04,
        eps_prep: 0.015,
    };
    let (mut plan, _) = build_pec_plan(&op, &noise, GstShots::Exact, 5, 1).unwrap();
    let c1 = plan.total_cost();
    let n: u64 = 1_000_000;
    let chunk: u64 = 10_000;

    let d1 = run_pec(&plan, n, 777, Some(chunk)).unwrap();
    let marg1: Vec<f64> =
        d1.chunk_estimates.as_ref().unwrap().iter().map(|e| e[1]).collect();
    assert_eq!(marg1.len(), 100);
    let s1 = std_dev(&marg1);
    let predicted = c1 / (chunk as f64).sqrt();
    let ratio = s1 / predicted;
    assert!(
        (0.67..=1.5).contains(&ratio),
        "t=1 chunk std {s1:.4} vs C/sqrt(N_chunk) {predicted:.4} (ratio {ratio:.3})"
    );

    plan.steps = 2;
    let d2 = run_pec(&plan, n, 778, Some(chunk)).unwrap();
    let marg2: Vec<f64> = d2
        .chunk_estimates
        .as_ref()
        .unwrap()
        .iter()
        .map(|e| e[1] + e[3]) // last emitted bit = 1
        .collect();
    let s2 = std_dev(&marg2);
    let growth = s2 / s1;
    assert!(
        growth >= c1 / 2.0 && growth <= c1 * 2.0,
        "std growth {growth:.3} outside factor 2 of C = {c1:.3}"
    );
    println!(
        "[acceptance] criterion 10 PASS: t=1 ratio {ratio:.3} in [0.67, 1.5]; t=2 growth {growth:.2} vs C = {c1:.2}"
    );
}

#[test]
fn criterion_11_gst_shot_scaling() {
    let noise = NoiseModel { q_dep: 0.02, ..NoiseModel::ideal() };
    let report =
        gst_error_scaling(&noise, &[100, 1_000, 10_000, 100_000], 20, 1111).unwrap();
    assert!(
        (-0.6..=-0.4).contains(&report.slope),
        "slope {} (errors {:?})",
        report.slope,
        report.mean_errors
    );
    println!(
        "[acceptance] criterion 11 PASS: log-log slope {:.3} in [-0.6, -0.4]",
        report.slope
    );
}

#[test]
fn criterion_12_fidelity_perturbation() {
    let (_, op) = coin_model_op(0.05);
    let noise = NoiseModel {
        q_dep: 0.0,
        q_dep2: 0.04,
        gamma_ad: 0.0,
        q_z: 0.0,
        eps_meas: 0.9,
        eps_prep: 0.01,
    };
    let ideal = exact_step_distribution(&op, 1).unwrap();
    let (plan, _) = build_pec_plan(&op, &noise, GstShots::Exact, 12, 1).unwrap();
    let cost = plan.total_cost();
    let n = 1_000_000u64;
    let reps = 8u64;
    let mut losses = Vec::new();
    for r in 0..reps {
        let dist = run_pec(&plan, n, 3000 + r, None).unwrap();
        losses.push(1.0 - distribution_fidelity(&ideal, &dist.clipped_normalized()));
    }
    let measured = losses.iter().sum::<f64>() / reps as f64;
    let predicted = predict_fidelity_perturbation(cost, 1, n as f64, &ideal).unwrap();
    let ratio = measured / predicted;
    assert!(
        (0.5..=2.0).contains(&ratio),
        "measured 1-F {measured:.3e} vs predicted {predicted:.3e} (ratio {ratio:.3})"
    );
    println!(
        "[acceptance] criterion 12 PASS: measured 1-F {measured:.3e}, predicted {predicted:.3e}, ratio {ratio:.3}"
    );
}
