//! Blahut-Arimoto rate-distortion and the tilted information.

use pmllab::model::Distortion;
use pmllab::prob::{h2, Pmf};
use pmllab::second_order::{ba_rd, d_tilted, source_dispersion};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let uniform = Pmf::uniform(2)?;
    let hamming = Distortion::hamming(2);
    for d in [0.0, 0.05, 0.11, 0.25, 0.5] {
        let rd = ba_rd(&uniform, &hamming, d)?;
        println!("D={d:<4}: R {:.6} (1-h2(D) {:.6}) regime {:?}", rd.rate, 1.0 - h2(d), rd.regime);
    }

    let skewed = Pmf::new(vec![0.8, 0.2])?;
    let rd = ba_rd(&skewed, &hamming, 0.1)?;
    let j: Vec<f64> = (0..2).map(|w| d_tilted(&skewed, &rd, w, 0.1)).collect::<Result<_, _>>()?;
    let (m, v) = source_dispersion(&skewed, &rd)?;
    println!(
        "Bern(0.2) at D=0.1: R {:.5}, slope {:.4}, j = {:?}, E[j] {m:.5}, Var[j] {v:.5}",
        rd.rate,
        rd.slope.unwrap_or(f64::NAN),
        j
    );

    let ternary = Distortion::new(vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]])?;
    let p = Pmf::new(vec![0.25, 0.5, 0.25])?;
    for d in [0.1, 0.3, 0.5] {
        let rd = ba_rd(&p, &ternary, d)?;
        println!("ternary D={d}: R {:.5} (dual {:.5}) after {} iterations", rd.rate, rd.dual, rd.iterations);
    }
    Ok(())
}
