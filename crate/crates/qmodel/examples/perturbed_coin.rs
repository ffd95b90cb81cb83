//! Generate a perturbed-coin process and inspect its statistics: the
//! conditional next-symbol table, the empirical flip rate, and the
//! effective Markov order.
//!
//! Usage: cargo run --release --example perturbed_coin

use qmodel::process::{
    conditional_distribution, effective_markov_order, generate_perturbed_coin,
    PerturbedCoinParams,
};

fn main() -> qmodel::Result<()> {
    let p = 0.2;
    let n = 100_000;
    let seq = generate_perturbed_coin(PerturbedCoinParams::new(p, 7)?, n)?;
    println!("perturbed coin: p = {p}, n = {n}, seed = 7");
    let head: String = seq.symbols[..40].iter().map(|s| char::from(b'0' + s)).collect();
    println!("first symbols: {head}...");

    let flips = seq.symbols.windows(2).filter(|w| w[0] != w[1]).count();
    println!("flip fraction: {:.4} (chain value {:.4})", flips as f64 / (n - 1) as f64, 1.0 - p);

    let cond = conditional_distribution(&seq, 1)?;
    println!("\nconditional next-symbol table (L = 1):");
    for (history, probs) in &cond.table {
        println!(
            "  after {:?}: P(0) = {:.4}, P(1) = {:.4}  ({} windows)",
            history[0], probs[0], probs[1], cond.counts[history]
        );
    }

    let xi = 1.0 / (n as f64).sqrt();
    let order = effective_markov_order(&seq, 0.05, 4)?;
    println!("\neffective Markov order (xi = 0.05): {}", order.r_eff);
    println!("  distances per tested order: {:?}", order.distances);
    println!("  (default xi would be 1/sqrt(n) = {xi:.4})");
    Ok(())
}
