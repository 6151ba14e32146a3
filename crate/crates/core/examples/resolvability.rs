//! Soft covering: how close a random codebook's output law gets to `P_Y`.

use pmllab::instance::Instance;
use pmllab::model::ChannelModel;
use pmllab::prob::{Kernel, Pmf};
use pmllab::rng::aux_rng;
use pmllab::schemes::{codebook_tv, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = Instance::from_json(include_str!("../instances/resolvability.json"))?;
    for l in [16.0, 64.0, 256.0, 1024.0] {
        let r = base.with_param("L", l)?.simulate(&RunConfig::new(1_000, 0))?;
        println!("L={l:>4}: mean TV {:.4} +- {:.4}   pe1 {:.4}", r.estimate, r.half_width(), r.bound);
    }

    let bsc = ChannelModel::new(Pmf::uniform(2)?, Kernel::bsc(0.11)?)?.power(4)?;
    let mut rng = aux_rng(5, 0);
    let book: Vec<usize> = (0..8).map(|_| bsc.p_x.sample(&mut rng)).collect();
    println!("one 8-word codebook at n=4: {book:?}, TV {:.4}", codebook_tv(&bsc, &book)?);

    let flat = ChannelModel::new(Pmf::uniform(2)?, Kernel::from_rows(vec![vec![0.3, 0.7], vec![0.3, 0.7]])?)?;
    println!("output independent of input: TV {}", codebook_tv(&flat, &[0, 0, 1])?);
    Ok(())
}
