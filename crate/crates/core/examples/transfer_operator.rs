//! Iterates the transfer operator of a memory-2 chain and a truncated
//! long-range model, printing how fast `L_g^n f` flattens out, then the
//! invariant measure on two-letter cylinders.
//!
//! cargo run --example transfer_operator

use gmeasure::gmodel::{Alphabet, CoefficientLaw, FiniteMemory, GModel, LongRangeLinear, Word};
use gmeasure::transfer::{uniqueness_diagnostic, CylinderFunction, TransferOperator};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // g(x_0 | x_{-1} x_{-2}) favours repeating x_{-1}
    let fm = FiniteMemory::from_fn(Alphabet::binary(), 2, |w| {
        if w[0] == w[1] {
            0.8
        } else {
            0.2
        }
    })?;
    let f = CylinderFunction::indicator(2, &Word::new(0, vec![0]));

    let model: GModel = fm.clone().into();
    println!("memory-2 chain, f = 1[x_0 = 0]");
    for row in uniqueness_diagnostic(&model, &f, 12, 0)?.iter().step_by(3) {
        println!("  n = {:2}  osc = {:.3e}", row.n, row.oscillation);
    }

    let lr: GModel = LongRangeLinear::binary(0.25, CoefficientLaw::power_normalized_p2(0.5))?.into();
    println!("long range p = 2, memory-12 surrogate");
    for row in uniqueness_diagnostic(&lr, &f, 12, 12)?.iter().step_by(3) {
        println!(
            "  n = {:2}  osc = {:.3e}  (+/- {:.1e} from truncation)",
            row.n, row.oscillation, row.truncation_error
        );
    }

    let mu = TransferOperator::new(fm)?.stationary(1e-14)?;
    for w in [[0, 0], [0, 1], [1, 0], [1, 1]] {
        println!("mu[{}{}] = {:.6}", w[0], w[1], mu.prob(&w));
    }
    Ok(())
}
