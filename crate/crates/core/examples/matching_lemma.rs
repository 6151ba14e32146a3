//! Exact law of the matching rank and the lemma bounds, checked by simulation.

use pmllab::pml::{alpha_beta, pml_bound, rank_law, BoundForm};
use pmllab::prob::{rn_ratio, FiniteMeasure, Pmf};
use pmllab::race::{RaceProcess, View};
use pmllab::rng::trial_seed;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mu = FiniteMeasure::new(vec![1.0, 1.0])?;
    let p = Pmf::new(vec![0.75, 0.25])?;
    let q = Pmf::new(vec![0.5, 0.5])?;
    let (pv, qv) = (View::new(&mu, &p)?, View::new(&mu, &q)?);

    for j in 1..=3 {
        for u in 0..2 {
            let ab = alpha_beta(&mu, &p, &q, u)?;
            let law = rank_law(&mu, &p, &q, u, j)?;
            let r = rn_ratio(p.prob(u), q.prob(u));
            let head: Vec<String> = law.pmf.iter().take(5).map(|x| format!("{x:.4}")).collect();
            println!(
                "j={j} u={u}: alpha {:.3} beta {:.3}  P(rank>1) {:.4}  E[rank] {:.4} <= {:.4}  pmf [{}]",
                ab.alpha,
                ab.beta,
                law.mismatch(),
                law.mean() + 1.0,
                pml_bound(r, j as u64, 1, BoundForm::Mean),
                head.join(", ")
            );
        }
    }
    let ratio = rn_ratio(0.75, 0.5);
    println!("lemma bound at u=0, j=1: {:.4}", pml_bound(ratio, 1, 1, BoundForm::Basic));

    let trials = 500_000u64;
    let (mut sel, mut miss) = (0u64, 0u64);
    for t in 0..trials {
        let mut race = RaceProcess::new(&mu, trial_seed(1, t))?;
        let pt = race.pfr_select(&pv)?;
        if pt.atom == 0 {
            sel += 1;
            miss += u64::from(race.rank_of(&pt, &qv).finite() != Some(1));
        }
    }
    let est = miss as f64 / sel as f64;
    let sigma = (est * (1.0 - est) / sel as f64).sqrt();
    println!("simulated P(rank>1 | u=0) = {est:.4} +- {sigma:.4} (exact 1/3)");
    Ok(())
}
