//! Lossy compression with side information at the decoder, swept over `L`.

use pmllab::bounds::EvalOptions;
use pmllab::instance::Instance;
use pmllab::schemes::RunConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = Instance::from_json(include_str!("../instances/wz.json"))?;
    println!("params: {:?}", base.params()?);
    let cfg = RunConfig::new(40_000, 1);
    for l in [1.0, 2.0, 4.0, 8.0, 16.0] {
        let inst = base.with_param("L", l)?;
        let b = inst.bounds(&EvalOptions::default())?;
        let r = inst.simulate(&cfg)?;
        println!(
            "L={l:>2}: excess-distortion {:.4} +- {:.4}   thm4 {:.4}   comparison {:.4}",
            r.estimate,
            r.half_width(),
            b.get("thm4")?,
            b.get("watanabe")?
        );
    }
    Ok(())
}
