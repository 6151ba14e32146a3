//! Moments of the matching rank, the constant chain behind the functional
//! representation bound, and the φ weights used by mixture decoders.

use pmllab::pml::{moment_bounds, phi, phi_constant, phi_inequality, sfrl_chain};
use pmllab::prob::{FiniteMeasure, Pmf};
use pmllab::race::{RaceProcess, View};
use pmllab::rng::trial_seed;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = Pmf::new(vec![0.6, 0.3, 0.1])?;
    let q = Pmf::new(vec![0.1, 0.3, 0.6])?;
    let mu = FiniteMeasure::new(vec![1.0; 3])?;
    let (pv, qv) = (View::new(&mu, &p)?, View::new(&mu, &q)?);
    let trials = 100_000u64;
    for j in [1usize, 2, 4] {
        let b = moment_bounds(&p, &q, j, 0.5)?;
        let (mut lg, mut rt) = (0.0, 0.0);
        for t in 0..trials {
            let mut race = RaceProcess::new(&mu, trial_seed(j as u64, t))?;
            let k = race.match_rank(&pv, &qv, j)?.finite().unwrap() as f64;
            lg += k.log2();
            rt += k.sqrt();
        }
        let n = trials as f64;
        println!(
            "j={j}: E[log rank] {:.3} <= {:.3}   E[rank^0.5] {:.3} <= {:.3}",
            lg / n,
            b.log_bound,
            rt / n,
            b.power_bound
        );
    }

    for i in [0.0, 1.0, 10.0, 50.0] {
        let (l, r) = sfrl_chain(i);
        println!("I={i:>4}: {l:.4} <= {r:.4}");
    }

    let c = phi_constant();
    println!("c = {:.12}, certified in [{:.12}, {:.12}]", c.c, c.c_lo, c.c_hi);
    println!("phi(1) {:.4}  phi(10) {:.5}  phi(1000) {:.3e}", phi(1.0), phi(10.0), phi(1000.0));
    let (head, tail) = c.head(1024);
    println!("first 1024 weights sum to {:.6}, tail {:.6}", head.iter().sum::<f64>(), tail);
    let r = phi_inequality(1.0 / 64.0, 8.0, 3.0, 3.0, 3.0);
    println!("s=1/64, t=8: {:.4} <= {:.4} <= {:.4} ({})", r.lhs, r.mid, r.rhs, r.holds);
    Ok(())
}
