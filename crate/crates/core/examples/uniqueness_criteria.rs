//! Verdicts of the uniqueness criteria for power-law and exponential
//! variation, and for a model whose variation is tabulated from its
//! coefficients.
//!
//! cargo run --release --example uniqueness_criteria

use gmeasure::criteria::{check_hyp1, check_hyp2, check_hyp3, check_hyp5, VariationModel};
use gmeasure::gmodel::{CoefficientLaw, GModel, LongRangeLinear};

fn report(name: &str, vm: &VariationModel) -> Result<(), Box<dyn std::error::Error>> {
    println!("{name}");
    for r in [check_hyp1(vm)?, check_hyp2(vm, 0.1)?, check_hyp3(vm)?, check_hyp5(vm, 2.0)?] {
        println!("  {:5} {:?}: {}", r.id, r.verdict, r.evidence.reasoning);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    report("power law, p = 2", &VariationModel::PowerLaw { c: 1.0, p: 2.0 })?;
    report("power law, p = 1/2", &VariationModel::PowerLaw { c: 1.0, p: 0.5 })?;
    report("exponential, r = 0.9", &VariationModel::Exponential { c: 0.5, r: 0.9 })?;

    let model: GModel = LongRangeLinear::binary(0.25, CoefficientLaw::power_normalized_p2(0.5))?.into();
    report("long range p = 2, tabulated", &VariationModel::from_model(&model, 32)?)?;
    Ok(())
}
