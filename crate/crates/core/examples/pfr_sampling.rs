//! Selecting from a distribution with one shared exponential race.
//!
//! A `RaceProcess` holds one arrival stream per atom of the base measure.
//! Each `View` reads the same arrivals through a different density, so two
//! views select correlated points without any extra randomness.

use pmllab::prob::{FiniteMeasure, Pmf};
use pmllab::race::{RaceProcess, View};
use pmllab::rng::trial_seed;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mu = FiniteMeasure::new(vec![1.0; 4])?;
    let p = Pmf::new(vec![0.1, 0.2, 0.3, 0.4])?;
    let q = Pmf::new(vec![0.4, 0.3, 0.2, 0.1])?;
    let (pv, qv) = (View::new(&mu, &p)?, View::new(&mu, &q)?);

    let mut race = RaceProcess::new(&mu, 42)?;
    println!("first five points of the P-ordering:");
    for pt in race.pfr_list(&pv, 5)? {
        println!("  atom {} (arrival {}), key {:.4}, Q-key {:.4}", pt.atom, pt.arrival, pt.key, pt.key_under(&qv));
    }
    println!("raw trace, earliest arrivals first:");
    for row in race.trace(4, Some(&pv), Some(&qv)) {
        println!("  {}", serde_json::to_string(&row)?);
    }

    let trials = 200_000u64;
    let mut hits = [0u64; 4];
    let mut same = 0u64;
    for t in 0..trials {
        let mut r = RaceProcess::new(&mu, trial_seed(7, t))?;
        let a = r.pfr_select(&pv)?.atom;
        hits[a] += 1;
        same += u64::from(r.pfr_select(&qv)?.atom == a);
    }
    println!("selection frequencies vs P:");
    for (u, h) in hits.iter().enumerate() {
        println!("  {u}: {:.4} vs {:.1}", *h as f64 / trials as f64, p.prob(u));
    }
    println!("P{{U_P = U_Q}} = {:.4}", same as f64 / trials as f64);
    Ok(())
}
