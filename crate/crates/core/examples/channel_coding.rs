//! Message coding over a binary symmetric channel with one shared race.
//!
//! The encoder selects `X` from `P_X × δ_m`; the decoder selects from the
//! posterior `P_{X|Y}(·|y) × P_M` on the same race and reads off the message.

use pmllab::bounds::{channel_bounds, ChannelParams, EvalOptions};
use pmllab::model::ChannelModel;
use pmllab::prob::{Kernel, Pmf};
use pmllab::rng::aux_rng;
use pmllab::schemes::{simulate_channel, simulate_channel_list, simulate_channel_rank, ChannelCode, RunConfig};
use rand::Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = ChannelModel::new(Pmf::uniform(2)?, Kernel::bsc(0.05)?)?;
    let block = model.power(6)?;

    let code = ChannelCode::new(&block, 4)?;
    let mut rng = aux_rng(9, 0);
    for seed in 0..4 {
        let m = rng.gen_range(0..4);
        let x = code.encode(seed, m)?;
        let y = block.channel.sample(x, &mut rng);
        println!("seed {seed}: m={m} x={x:06b} y={y:06b} -> {} (list {:?})", code.decode(seed, y)?, code.decode_list(seed, y, 2)?);
    }

    let mut p = ChannelParams::new(4);
    p.n = 6;
    p.j = 2;
    let b = channel_bounds(&model, &p, &EvalOptions::default())?;
    println!("bounds: {:?}", b.bounds);

    let cfg = RunConfig::new(50_000, 0);
    for r in [simulate_channel(&model, &p, &cfg)?, simulate_channel_list(&model, &p, &cfg)?, simulate_channel_rank(&model, &p, &cfg)?] {
        println!(
            "{:>13}: error {:.4} [{:.4}, {:.4}]  {} = {:.4}  dominated {}",
            r.setting.name(),
            r.estimate,
            r.ci[0],
            r.ci[1],
            r.bound_name,
            r.bound,
            r.dominated()
        );
    }
    Ok(())
}
