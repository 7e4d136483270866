//! Renewal sequence of the block-agreement chain: `u_n`, its limits per
//! residue class, and the limiting disagreement bound for several `K`.
//!
//! cargo run --example renewal_bound

use gmeasure::coupling::BlockSchedule;
use gmeasure::renewal::{
    build_alphabeta, limsup_limit, mean_limit, proposition_bound, renewal_limit, renewal_solve,
    RenewalSpec,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = RenewalSpec::new(vec![0.5, 0.25], vec![2, 2, 4], 2)?;
    let ab = build_alphabeta(&spec)?;
    let u = renewal_solve(&ab, 40);
    println!("support of alpha = {:?}, period = {}", ab.support(), ab.period);
    for n in (0..=40).step_by(8) {
        println!("  u_{n:<2} = {:.6}", u[n]);
    }
    println!(
        "limit on multiples of the period = {:.6}, mean = {:.6}, limsup = {:.6}",
        renewal_limit(&ab)?,
        mean_limit(&ab)?,
        limsup_limit(&ab)?
    );

    // d̄_k = 2^-k with unit blocks
    let dbar: Vec<f64> = (1..=20).map(|k| 0.5f64.powi(k)).collect();
    let bound = proposition_bound(&BlockSchedule::constant(1)?, &dbar, &[1, 2, 4, 8])?;
    for row in &bound.rows {
        println!("K = {}: bound {:.5}", row.k, row.bound);
    }
    if let Some(best) = bound.best {
        println!("best K = {} with {:.5}", best.k, best.bound);
    }
    Ok(())
}
