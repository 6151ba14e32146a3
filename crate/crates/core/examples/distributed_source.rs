//! Two encoders compress correlated sources; one decoder must meet both
//! distortion targets. The decoder picks the pair from a φ-mixture.

use pmllab::instance::Instance;
use pmllab::schemes::RunConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inst = Instance::from_json(include_str!("../instances/dlsc.json"))?;
    for l in [4.0, 16.0, 64.0] {
        let inst = inst.with_param("L1", l)?.with_param("L2", l)?;
        let mut cfg = RunConfig::new(20_000, 0);
        cfg.phi_terms = 256;
        let r = inst.simulate(&cfg)?;
        let b = &r.bounds;
        println!(
            "L1=L2={l}: failure {:.4} +- {:.4}   phi {:.4}  pe2 {:.3}  trunc {:.4}  harmonic {:.4}",
            r.estimate,
            r.half_width(),
            b["phi"],
            b["pe2"],
            b["trunc"],
            b["harmonic"]
        );
    }
    Ok(())
}
