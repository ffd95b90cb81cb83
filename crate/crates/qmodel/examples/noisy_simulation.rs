//! Simulate the compiled model under parametric noise in Pauli transfer
//! form and watch the outcome statistics drift from the exact chain.
//!
//! Usage: cargo run --release --example noisy_simulation

use qmodel::inference::MemoryStateSet;
use qmodel::mitigation::{exact_step_distribution, noisy_step_distribution};
use qmodel::process::total_variation;
use qmodel::ptm::{ptm_of_unitary, NoiseModel};
use qmodel::synthesis::build_unitary;

fn main() -> qmodel::Result<()> {
    let p = 0.2;
    let set = MemoryStateSet::exact_perturbed_coin(p);
    let model = build_unitary(&set, 42)?;
    let op = ptm_of_unitary(&model.unitary);

    let settings = [
        ("mild       (0.5% depol, 0.5% flips)", 0.005, 0.005),
        ("moderate   (2% depol, 2% flips)   ", 0.02, 0.02),
        ("heavy      (8% depol, 5% flips)   ", 0.08, 0.05),
    ];
    for t in 1..=3usize {
        println!("=== {t} emission step(s) ===");
        let ideal = exact_step_distribution(&op, t)?;
        let words: Vec<String> = (0..1usize << t).map(|w| format!("{w:0t$b}")).collect();
        println!("  ideal:    {}", fmt_dist(&words, &ideal));
        for (name, q, eps) in settings {
            let noise = NoiseModel {
                q_dep: q,
                q_dep2: q,
                gamma_ad: 0.0,
                q_z: 0.0,
                eps_meas: eps,
                eps_prep: 0.0,
            };
            let noisy_op = noise.register_channel(2).compose(&op);
            let noisy = noisy_step_distribution(&noisy_op, t, &noise)?;
            println!(
                "  {name}: {}  TV = {:.4}",
                fmt_dist(&words, &noisy),
                total_variation(&ideal, &noisy)
            );
        }
    }
    Ok(())
}

fn fmt_dist(words: &[String], probs: &[f64]) -> String {
    words
        .iter()
        .zip(probs)
        .map(|(w, p)| format!("P({w}) = {p:.4}"))
        .collect::<Vec<_>>()
        .join(", ")
}
