//! Build the model unitary for the perturbed coin and lower it to
//! elementary gates with the cosine-sine decomposition.
//!
//! Usage: cargo run --release --example unitary_synthesis

use qmodel::inference::MemoryStateSet;
use qmodel::synthesis::{
    ancilla_distribution, apply_model_step, build_unitary, circuit_depth_formula, csd_decompose,
    reconstruct, Gate,
};

fn main() -> qmodel::Result<()> {
    let p = 0.2;
    let set = MemoryStateSet::exact_perturbed_coin(p);
    let model = build_unitary(&set, 42)?;
    let u = model.unitary.matrix();
    println!("model unitary for p = {p}: {}x{} (memory dim {})", u.rows, u.cols, model.memory_dim);
    for i in 0..u.rows {
        let row: Vec<String> = (0..u.cols).map(|j| format!("{:+.4}", u[(i, j)].re)).collect();
        println!("  [{}]", row.join(", "));
    }
    println!("unitarity error: {:.2e}", u.unitarity_error());

    // One model step from the first memory state.
    let joint = apply_model_step(&model.unitary, &model.memory_state(0))?;
    let emission = ancilla_distribution(&joint, 2);
    println!("\nemission from state 0: P(0) = {:.4}, P(1) = {:.4}", emission[0], emission[1]);

    let circuit = csd_decompose(&model.unitary)?;
    println!("\ncosine-sine decomposition: {} gates", circuit.gates.len());
    let mut counts = std::collections::BTreeMap::new();
    for gate in &circuit.gates {
        let kind = match gate {
            Gate::MultiplexedRy { .. } => "multiplexed Ry",
            Gate::MultiplexedRz { .. } => "multiplexed Rz",
            Gate::SingleZyz { .. } => "single ZYZ",
            Gate::Not { .. } => "NOT",
            Gate::ControlledU1 { .. } => "controlled U1",
        };
        *counts.entry(kind).or_insert(0usize) += 1;
    }
    for (kind, count) in counts {
        println!("  {count:2} x {kind}");
    }
    println!(
        "closed-form depth count for one application: {}",
        circuit_depth_formula(2, 1)
    );
    println!("three applications: {}", circuit_depth_formula(2, 3));

    let err = reconstruct(&circuit).max_abs_diff(u);
    println!("\nreconstruction error |circuit - U|_max = {err:.2e}");
    Ok(())
}
