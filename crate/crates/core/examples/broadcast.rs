//! Two-receiver broadcast: Marton coding with private messages, and
//! superposition with a common message.

use pmllab::bounds::EvalOptions;
use pmllab::instance::Instance;
use pmllab::schemes::RunConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = RunConfig::new(50_000, 0);
    let marton = Instance::from_json(include_str!("../instances/bc_marton.json"))?;
    for n in [2.0, 3.0, 4.0] {
        let inst = marton.with_param("n", n)?;
        let r = inst.simulate(&cfg)?;
        println!("marton n={n}: error {:.4} +- {:.4}, thm8 {:.4}", r.estimate, r.half_width(), r.bound);
    }

    let common = Instance::from_json(include_str!("../instances/bc_common.json"))?;
    let b = common.bounds(&EvalOptions::default())?;
    println!("common-message bounds: {:?}", b.bounds);
    let r = common.simulate(&RunConfig::new(20_000, 0))?;
    println!("common-message error {:.4} +- {:.4} (dominated {})", r.estimate, r.half_width(), r.dominated());
    Ok(())
}
