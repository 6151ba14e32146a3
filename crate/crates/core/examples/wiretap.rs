//! Wiretap coding: reliability at the legitimate receiver and exact leakage
//! to the eavesdropper for each realized codebook.

use pmllab::instance::Instance;
use pmllab::schemes::RunConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = Instance::from_json(include_str!("../instances/wiretap.json"))?;
    let cfg = RunConfig::new(20_000, 0);
    for k in [2.0, 4.0, 8.0] {
        let r = base.with_param("K", k)?.simulate(&cfg)?;
        let (e, s) = (&r.components["error"], &r.components["secrecy"]);
        println!(
            "K={k}: error {:.4} (bound {:.4})  leakage {:.4} (bound {:.4})  total {:.4} <= {:.4}",
            e.mean,
            r.bounds["reliability"],
            s.mean,
            r.bounds["secrecy"],
            r.estimate,
            r.bound
        );
    }
    Ok(())
}
