//! Where does the mitigated quantum model stay cheaper than the classical
//! machine? Sweep the coin bias, compare `C_mu` against `C_q`, and solve
//! the cumulative-memory inequality for the advantage window.
//!
//! Usage: cargo run --release --example memory_advantage

use qmodel::inference::{
    classical_statistical_complexity, memory_advantage_region, perturbed_coin_cq, EpsilonMachine,
};

fn main() {
    println!("   p     C_mu     C_q");
    for k in 1..=19 {
        let p = k as f64 / 20.0;
        let c_mu = classical_statistical_complexity(&EpsilonMachine::perturbed_coin(p));
        println!("  {p:.2}   {c_mu:.4}   {:.4}", perturbed_coin_cq(p));
    }

    // Mitigated sampling needs N_MC = (C / sigma)^2 runs for a target
    // precision, so the quantum side pays C_q per run while the classical
    // machine pays C_mu over far fewer samples.
    let n_mc = 1e6;
    let n_classical = 2500.0;
    let region = memory_advantage_region(n_mc, n_classical, 1.0);
    println!("\ncumulative memory comparison at sigma = 0.02:");
    println!("  classical: {n_classical} samples x 1 bit = {} bits", n_classical);
    println!("  mitigated quantum: {n_mc} samples x C_q bits");
    println!("  break-even C_q threshold: {:.4} bits", region.cq_threshold);
    println!(
        "  advantage window: {:.4} <= p <= {:.4} (excluding p = 0.5)",
        region.p_interval.0, region.p_interval.1
    );
}
