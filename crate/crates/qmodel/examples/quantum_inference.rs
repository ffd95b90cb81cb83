//! Infer quantum memory states from data, merge the statistically
//! indistinguishable ones, and compare the classical and quantum memory
//! requirements.
//!
//! Usage: cargo run --release --example quantum_inference

use qmodel::inference::{
    classical_statistical_complexity, infer_memory_states, merge_states, perturbed_coin_cq,
    quantum_statistical_memory, EpsilonMachine,
};
use qmodel::process::{conditional_distribution, generate_perturbed_coin, PerturbedCoinParams};

fn main() -> qmodel::Result<()> {
    let p = 0.2;
    let n = 100_000;
    let seq = generate_perturbed_coin(PerturbedCoinParams::new(p, 7)?, n)?;

    // History length 2 on a Markov-order-1 source: four raw states that
    // merging collapses back to two.
    let l = 2;
    let cond = conditional_distribution(&seq, l)?;
    let set = infer_memory_states(&cond, l)?;
    println!("inferred {} memory states from histories of length {l}", set.n_states());
    let gram = set.gram();
    for i in 0..set.n_states() {
        let label: String = set.labels[i].iter().map(|s| char::from(b'0' + s)).collect();
        println!(
            "  |s_{label}>  weight {:.4}  overlaps {:?}",
            set.weights[i],
            (0..set.n_states()).map(|j| (gram[(i, j)] * 1e4).round() / 1e4).collect::<Vec<_>>()
        );
    }

    let (merged, report) = merge_states(&set, n)?;
    println!("\nmerged with delta = {:.5}: {} clusters", report.delta, merged.n_states());
    for cluster in &report.clusters {
        println!("  cluster {:?}", cluster);
    }
    for warning in &report.warnings {
        println!("  warning: {warning}");
    }

    let machine = EpsilonMachine::from_merged(&merged, &cond, &report)?;
    let c_mu = classical_statistical_complexity(&machine);
    let cq_inferred = quantum_statistical_memory(&merged);
    let cq_exact = perturbed_coin_cq(p);
    println!("\nclassical memory  C_mu      = {c_mu:.4} bits");
    println!("quantum memory    C_q~      = {cq_inferred:.4} bits (inferred)");
    println!("closed form       C_q       = {cq_exact:.4} bits");
    println!("inference error   |C_q~ - C_q| = {:.2e}", (cq_inferred - cq_exact).abs());
    Ok(())
}
