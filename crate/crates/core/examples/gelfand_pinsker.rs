//! Channel with state known at the encoder: a binary dirty-paper style model.
//!
//! `Y = X ⊕ S ⊕ Z` with `Z ~ Bern(0.05)`. The encoder picks `U` from
//! `P_{U|S}(·|s) × δ_m` and sends `x(u, s) = u ⊕ s`.

use pmllab::bounds::{gp_bounds, GpParams};
use pmllab::model::{FnTable, GpModel};
use pmllab::prob::{Kernel, Pmf};
use pmllab::schemes::{simulate_gp, RunConfig};
use pmllab::second_order::gp_rate;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let channel = Kernel::from_rows(
        (0..4)
            .map(|i| {
                let (x, s) = (i / 2, i % 2);
                let clean = x ^ s;
                vec![if clean == 0 { 0.95 } else { 0.05 }, if clean == 1 { 0.95 } else { 0.05 }]
            })
            .collect(),
    )?;
    let model = GpModel::new(
        Pmf::uniform(2)?,
        Kernel::from_rows(vec![vec![0.8, 0.2], vec![0.2, 0.8]])?,
        FnTable::from_fn2(2, 2, 2, |u, s| u ^ s)?,
        channel,
    )?;

    let cfg = RunConfig::new(50_000, 0);
    for (n, l) in [(2, 2), (4, 2), (4, 4)] {
        let p = GpParams { l, gamma: 4.0, j: 1, n };
        let b = gp_bounds(&model, &p, &cfg.bound)?;
        let r = simulate_gp(&model, &p, &cfg)?;
        println!(
            "n={n} L={l}: error {:.4} +- {:.4}, thm3 {:.4}, four-term comparison {:.4}",
            r.estimate,
            r.half_width(),
            b.get("thm3")?,
            b.get("verdu")?
        );
    }

    let joint = model.joint()?;
    for n in [400, 1600, 6400] {
        let g = gp_rate(n, 0.1, &joint, 1.0)?;
        println!("n={n}: C={:.4} V={:.4} log2 L = {:.2}", g.c, g.v, g.log_l);
    }
    Ok(())
}
