//! Block coupling of a long-range model from two opposite boundary tails:
//! one sampled pair, a Monte Carlo disagreement profile, and exact bounds on
//! the first few `d_n` by enumeration.
//!
//! cargo run --release --example block_coupling

use gmeasure::coupling::{
    dn_bruteforce, estimate_disagreement, sample_block_coupling, BlockSchedule, CouplingConfig,
    DN_BUDGET,
};
use gmeasure::gmodel::{CoefficientLaw, GModel, LongRangeLinear, Word};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model: GModel = LongRangeLinear::binary(0.25, CoefficientLaw::power_normalized_p2(0.5))?.into();
    let schedule: BlockSchedule = "geometric:1.5".parse()?;
    let config = CouplingConfig::default();
    let tx = Word::new(1, vec![0; 16]);
    let ty = Word::new(1, vec![1; 16]);

    let one = sample_block_coupling(&model, &schedule, 30, &tx, &ty, 3, &config)?;
    let marks: String = one.disagree.iter().map(|&d| if d { 'x' } else { '.' }).collect();
    println!("disagreements at 0, -1, ..., -30: {marks}");
    for b in &one.blocks {
        println!("  block {} after run {}: {}", b.interval, b.run_before, if b.agreed { "agree" } else { "disagree" });
    }

    let est = estimate_disagreement(&model, &schedule, 30, &tx, &ty, 5000, 11, &config)?;
    for n in [0, 1, 3, 7, 15, 30] {
        println!("P(x_-{n} != y_-{n}) = {:.4} +/- {:.4}", est.frequency(n), est.stderr(n));
    }

    for n in 1..=3 {
        let d = dn_bruteforce(&model, &schedule, n, 4, DN_BUDGET)?;
        println!("d_{n} in [{:.4}, {:.4}] over {} configurations", d.lower, d.upper, d.configurations);
    }
    Ok(())
}
