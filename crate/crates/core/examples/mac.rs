//! Two-user multiple access over the binary adder channel `Y = X1 + X2`.

use pmllab::instance::Instance;
use pmllab::schemes::RunConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = Instance::from_json(include_str!("../instances/mac.json"))?;
    let cfg = RunConfig::new(20_000, 0);
    for (n, l1, l2) in [(2.0, 2.0, 1.0), (4.0, 2.0, 1.0), (4.0, 2.0, 2.0)] {
        let inst = base.with_param("n", n)?.with_param("L1", l1)?.with_param("L2", l2)?;
        let r = inst.simulate(&cfg)?;
        println!(
            "n={n} L1={l1} L2={l2}: error {:.4} +- {:.4}   thm10 {:.4}  harmonic {:.4}",
            r.estimate,
            r.half_width(),
            r.bound,
            r.bounds["harmonic"]
        );
    }
    Ok(())
}
