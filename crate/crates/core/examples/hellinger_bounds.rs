//! Total variation bounds for products of conditionals from their ratio
//! bounds `ρ_i`: the Hellinger affinity floor, the product bound and the
//! logarithmic bound.
//!
//! cargo run --example hellinger_bounds

use gmeasure::criteria::{as1_constant, as1_floor, hellinger_floor, tv_upper_rg2};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("K(2) = {:.4}", as1_constant(2.0)?);
    for rho in [1.0, 1.1, 1.5, 2.0, 4.0] {
        println!("rho = {rho:3}: affinity >= {:.5}", hellinger_floor(rho)?);
    }

    // ratios decaying like exp(1/(i+1)^2) over a block of eight sites
    let rhos: Vec<f64> = (0..8).map(|i| (1.0 / ((i + 1) as f64).powi(2)).exp()).collect();
    println!("TV <= {:.5} (product bound)", tv_upper_rg2(&rhos)?);
    let tail: Vec<f64> = rhos[1..].to_vec();
    println!("affinity over sites 1..8 >= {:.5} (logarithmic bound)", as1_floor(&tail, 2.0)?);
    Ok(())
}
