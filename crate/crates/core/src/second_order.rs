//! Normal-approximation machinery: Q and its inverse, the second-order rate
//! for channels with encoder state, rate-distortion by alternating
//! minimization, D-tilted information and the joint source-channel
//! blocklength condition.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc_inv;

use crate::error::{invalid, Error, Result};
use crate::model::Distortion;
use crate::prob::{Density, JointPmf, Kernel, Pmf};

const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// Standard normal upper tail.
pub fn qfunc(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Inverse of [`qfunc`] on (0, 1).
pub fn qinv(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("qinv needs eps in (0, 1), got {eps}")));
    }
    let mut x = std::f64::consts::SQRT_2 * erfc_inv(2.0 * eps);
    // two Newton steps on Q(x) = eps
    for _ in 0..2 {
        let pdf = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        if pdf > 1e-300 {
            x += (qfunc(x) - eps) / pdf;
        }
    }
    Ok(x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GpRate {
    /// `E[ι(U;Y) − ι(U;S)]`
    pub c: f64,
    pub v: f64,
    pub log_l: f64,
    /// `⌊2^{log_l}⌋`, saturating.
    pub l: u64,
}

/// Second-order message size for a state-dependent channel. `joint` is over
/// (S, U, Y) in that axis order.
pub fn gp_rate(n: u64, eps: f64, joint: &JointPmf, alpha: f64) -> Result<GpRate> {
    if joint.dims().len() != 3 {
        return Err(invalid("gp_rate expects a joint over (S, U, Y)"));
    }
    if n == 0 || !(eps > 0.0 && eps < 1.0) || alpha < 0.0 {
        return Err(invalid("gp_rate needs n ≥ 1, eps in (0, 1) and alpha ≥ 0"));
    }
    let nf = n as f64;
    if eps - alpha / nf.sqrt() <= 0.0 {
        return Err(invalid(format!("gp_rate needs n > alpha²/eps² = {}", alpha * alpha / (eps * eps))));
    }
    let us = Density::new(joint, &[1], &[0], &[])?;
    let uy = Density::new(joint, &[1], &[2], &[])?;
    let atoms: Vec<(f64, f64)> = joint.support().map(|(t, w)| (w, uy.eval(&t) - us.eval(&t))).collect();
    let c: f64 = atoms.iter().map(|(w, x)| w * x).sum();
    let v: f64 = atoms.iter().map(|(w, x)| w * (x - c).powi(2)).sum();
    let arg = eps - alpha / nf.sqrt();
    let back = if v > 0.0 { (nf * v).sqrt() * qinv(arg)? } else { 0.0 };
    let log_l = nf * c - back - 0.5 * nf.log2();
    let l = if log_l < 0.0 {
        // ⌊2^x⌋ for negative x is 0
        0
    } else if log_l >= 63.0 {
        u64::MAX
    } else {
        log_l.exp2().floor() as u64
    };
    Ok(GpRate { c, v, log_l, l })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RdRegime {
    /// `D_min < D < D_max`
    Interior,
    /// `D ≥ D_max`: a single reproduction symbol suffices.
    ZeroRate,
    /// `D = D_min`: only minimum-distortion transitions are allowed.
    MinDistortion,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RdSolution {
    pub target: f64,
    /// Bits.
    pub rate: f64,
    pub kernel: Kernel,
    pub p_z: Pmf,
    /// `ν* = −R′(D)` in bits per unit distortion; absent at `D_min`.
    pub slope: Option<f64>,
    /// Achieved `E[d(W, Z)]`.
    pub achieved: f64,
    pub d: Distortion,
    /// Lower bound from the Lagrangian dual, bits.
    pub dual: f64,
    pub d_min: f64,
    pub d_max: f64,
    pub iterations: u64,
    pub residual: f64,
    pub regime: RdRegime,
}

const BA_MAX_ITER: usize = 10_000;
const BA_TOL: f64 = 1e-14;
const KEEP_MASS: f64 = 1e-12;

struct BaState {
    q: Vec<Vec<f64>>,
    pz: Vec<f64>,
    iterations: u64,
    residual: f64,
}

/// Blahut-Arimoto at fixed slope `s` (nats per unit distortion), restricted
/// to transitions where `allowed` is true.
fn ba_fixed(pw: &[f64], d: &Distortion, s: f64, allowed: &dyn Fn(usize, usize) -> bool, init: &[f64]) -> BaState {
    let nz = d.n_repro();
    let mut pz = init.to_vec();
    let mut q = vec![vec![0.0; nz]; pw.len()];
    let mut residual = f64::INFINITY;
    let mut it = 0;
    while it < BA_MAX_ITER {
        it += 1;
        for (w, row) in q.iter_mut().enumerate() {
            let mut t = 0.0;
            for z in 0..nz {
                row[z] = if allowed(w, z) { pz[z] * (-s * d.get(w, z)).exp() } else { 0.0 };
                t += row[z];
            }
            if t > 0.0 {
                row.iter_mut().for_each(|x| *x /= t);
            }
        }
        let mut next = vec![0.0; nz];
        for (w, row) in q.iter().enumerate() {
            for z in 0..nz {
                next[z] += pw[w] * row[z];
            }
        }
        for x in next.iter_mut() {
            if *x < KEEP_MASS {
                *x = 0.0;
            }
        }
        let t: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= t);
        residual = next.iter().zip(&pz).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        pz = next;
        if residual < BA_TOL {
            break;
        }
    }
    BaState { q, pz, iterations: it as u64, residual }
}

fn avg_distortion(pw: &[f64], q: &[Vec<f64>], d: &Distortion) -> f64 {
    let mut s = 0.0;
    for (w, row) in q.iter().enumerate() {
        for (z, &p) in row.iter().enumerate() {
            s += pw[w] * p * d.get(w, z);
        }
    }
    s
}

fn mutual_info(pw: &[f64], q: &[Vec<f64>], pz: &[f64]) -> f64 {
    let mut s = 0.0;
    for (w, row) in q.iter().enumerate() {
        for (z, &p) in row.iter().enumerate() {
            if p > 0.0 && pw[w] > 0.0 {
                s += pw[w] * p * (p / pz[z]).log2();
            }
        }
    }
    s.max(0.0)
}

/// Dual lower bound at slope `s`: `−sD − Σ_w p(w) ln Σ_z P_Z e^{−sd} − max_z ln c(z)`, in bits.
fn dual_value(pw: &[f64], d: &Distortion, s: f64, pz: &[f64], target: f64) -> f64 {
    let nz = d.n_repro();
    let norms: Vec<f64> =
        (0..pw.len()).map(|w| (0..nz).map(|z| pz[z] * (-s * d.get(w, z)).exp()).sum::<f64>()).collect();
    let mut max_c = f64::NEG_INFINITY;
    for z in 0..nz {
        let c: f64 = (0..pw.len()).filter(|&w| pw[w] > 0.0).map(|w| pw[w] * (-s * d.get(w, z)).exp() / norms[w]).sum();
        max_c = max_c.max(c);
    }
    let mut v = -s * target;
    for w in 0..pw.len() {
        if pw[w] > 0.0 {
            v -= pw[w] * norms[w].ln();
        }
    }
    (v - max_c.ln()) * LOG2_E
}

/// Rate-distortion function of `p_w` under `d` at target `D`.
pub fn ba_rd(p_w: &Pmf, d: &Distortion, target: f64) -> Result<RdSolution> {
    let pw = p_w.weights();
    if d.n_source() != pw.len() {
        return Err(invalid("distortion rows must match the source alphabet"));
    }
    let nz = d.n_repro();
    let row_min: Vec<f64> = (0..pw.len()).map(|w| (0..nz).map(|z| d.get(w, z)).fold(f64::INFINITY, f64::min)).collect();
    let d_min: f64 = pw.iter().zip(&row_min).map(|(p, m)| p * m).sum();
    let col: Vec<f64> = (0..nz).map(|z| (0..pw.len()).map(|w| pw[w] * d.get(w, z)).sum()).collect();
    let (z_star, d_max) = col.iter().copied().enumerate().fold((0, f64::INFINITY), |a, (z, v)| if v < a.1 { (z, v) } else { a });
    let tol = 1e-12 * d_max.abs().max(1.0);
    if !target.is_finite() || target < d_min - tol {
        return Err(Error::Infeasible(format!(
            "D = {target} is below the minimum achievable distortion {d_min}; the rate-distortion infimum needs D_min < D < D_max = {d_max}"
        )));
    }
    let uniform = vec![1.0 / nz as f64; nz];
    if target >= d_max - tol {
        let rows = vec![(0..nz).map(|z| if z == z_star { 1.0 } else { 0.0 }).collect::<Vec<_>>(); pw.len()];
        return Ok(RdSolution {
            target,
            rate: 0.0,
            kernel: Kernel::from_rows(rows)?,
            p_z: Pmf::point(nz, z_star)?,
            slope: Some(0.0),
            achieved: d_max,
            d: d.clone(),
            dual: 0.0,
            d_min,
            d_max,
            iterations: 0,
            residual: 0.0,
            regime: RdRegime::ZeroRate,
        });
    }
    if target <= d_min + tol {
        let allowed = |w: usize, z: usize| (d.get(w, z) - row_min[w]).abs() <= 1e-12 * row_min[w].abs().max(1.0);
        let st = ba_fixed(pw, d, 0.0, &allowed, &uniform);
        let rate = mutual_info(pw, &st.q, &st.pz);
        return Ok(RdSolution {
            target,
            rate,
            achieved: avg_distortion(pw, &st.q, d),
            d: d.clone(),
            kernel: Kernel::from_rows(st.q)?,
            p_z: Pmf::normalized(st.pz)?,
            slope: None,
            dual: rate,
            d_min,
            d_max,
            iterations: st.iterations,
            residual: st.residual,
            regime: RdRegime::MinDistortion,
        });
    }
    let all = |_: usize, _: usize| true;
    // bracket the slope: D(s) decreases from d_max at s = 0 toward d_min
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut iterations = 0;
    loop {
        let st = ba_fixed(pw, d, hi, &all, &uniform);
        iterations += st.iterations;
        if avg_distortion(pw, &st.q, d) < target {
            break;
        }
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Infeasible(format!("could not bracket the slope for D = {target}")));
        }
    }
    let mut best = None;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let st = ba_fixed(pw, d, mid, &all, &uniform);
        iterations += st.iterations;
        let dist = avg_distortion(pw, &st.q, d);
        if dist > target {
            lo = mid;
        } else {
            hi = mid;
        }
        best = Some((mid, st, dist));
        if (dist - target).abs() < 1e-13 || hi - lo < 1e-15 * hi {
            break;
        }
    }
    let (s, st, dist) = best.expect("bisection ran");
    let rate = mutual_info(pw, &st.q, &st.pz);
    let dual = dual_value(pw, d, s, &st.pz, target);
    Ok(RdSolution {
        target,
        rate,
        kernel: Kernel::from_rows(st.q)?,
        p_z: Pmf::normalized(st.pz)?,
        slope: Some(s * LOG2_E),
        achieved: dist,
        d: d.clone(),
        dual,
        d_min,
        d_max,
        iterations,
        residual: st.residual,
        regime: RdRegime::Interior,
    })
}

/// `j_W(w, D) = −log E[2^{ν*(D − d(w, Z))}]`, `Z ∼ P_Z`.
pub fn d_tilted(p_w: &Pmf, rd: &RdSolution, w: usize, target: f64) -> Result<f64> {
    if w >= p_w.len() {
        return Err(invalid(format!("symbol {w} outside the source alphabet")));
    }
    let nu = rd.slope.ok_or_else(|| {
        Error::Infeasible("the slope −R′(D) does not exist at D = D_min; D-tilted information is undefined".into())
    })?;
    let e: f64 = rd.p_z.weights().iter().enumerate().map(|(z, p)| p * (nu * (target - rd.d.get(w, z))).exp2()).sum();
    Ok(-e.log2())
}

/// Mean and variance of `j_W(W, D)`.
pub fn source_dispersion(p_w: &Pmf, rd: &RdSolution) -> Result<(f64, f64)> {
    let js: Vec<f64> = (0..p_w.len()).map(|w| d_tilted(p_w, rd, w, rd.target)).collect::<Result<_>>()?;
    let m: f64 = p_w.weights().iter().zip(&js).map(|(p, j)| p * j).sum();
    let v: f64 = p_w.weights().iter().zip(&js).map(|(p, j)| p * (j - m).powi(2)).sum();
    Ok((m, v))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersionInputs {
    /// Capacity term `I(X;Y)`.
    pub c: f64,
    /// `Var[ι(X;Y)]`
    pub v: f64,
    pub rate: f64,
    /// `Var[j_W(W, D)]`
    pub source_v: f64,
    pub eps: f64,
    pub n: u64,
    pub k: u64,
    pub eta: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub k0: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlocklengthCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `k ≥ k0` (or the source-free case `k = 0`).
    pub applicable: bool,
    pub satisfied: bool,
}

/// `nC − kR(D) ≥ √(nV + k𝒱) Q⁻¹(ε − η/√min{n,k}) + α log k + ½ log n + β`.
/// With `k = 0` the `α log k` term is dropped and `min{n, k}` becomes `n`.
pub fn jscc_blocklength_check(x: &DispersionInputs) -> Result<BlocklengthCheck> {
    if !(x.eps > 0.0 && x.eps < 1.0) || x.v < 0.0 || x.source_v < 0.0 || x.n == 0 {
        return Err(invalid("dispersion inputs need eps in (0, 1), n ≥ 1 and nonnegative variances"));
    }
    let (n, k) = (x.n as f64, x.k as f64);
    let lhs = n * x.c - k * x.rate;
    let m = if x.k == 0 { n } else { n.min(k) };
    let arg = x.eps - x.eta / m.sqrt();
    let rhs = if arg <= 0.0 {
        f64::INFINITY
    } else {
        let sd = (n * x.v + k * x.source_v).sqrt();
        let back = if sd > 0.0 { sd * qinv(arg)? } else { 0.0 };
        let logk = if x.k == 0 { 0.0 } else { x.alpha * k.log2() };
        back + logk + 0.5 * n.log2() + x.beta
    };
    let applicable = x.k == 0 || x.k >= x.k0;
    Ok(BlocklengthCheck { lhs, rhs, applicable, satisfied: applicable && lhs >= rhs })
}

/// Smallest `n ≤ n_max` for which the condition holds, scanning upward.
pub fn min_blocklength(x: &DispersionInputs, n_max: u64) -> Result<Option<u64>> {
    for n in 1..=n_max {
        if jscc_blocklength_check(&DispersionInputs { n, ..x.clone() })?.satisfied {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FnTable, GpModel};
    use crate::prob::h2;
    use proptest::prelude::*;

    /// `Q(x)` from the Maclaurin series of erf, fine for |x| ≲ 4.
    fn q_series(x: f64) -> f64 {
        let z = x / std::f64::consts::SQRT_2;
        let mut term = z;
        let mut sum = z;
        for k in 1..200 {
            term *= -z * z / k as f64;
            sum += term / (2 * k + 1) as f64;
        }
        0.5 - sum / std::f64::consts::PI.sqrt()
    }

    #[test]
    fn q_values() {
        assert_eq!(qfunc(0.0), 0.5);
        assert!(qinv(0.5).unwrap().abs() < 1e-15);
        assert!((qfunc(1.2815515655) - 0.1).abs() < 1e-10);
        for x in [-3.0, -1.0, 0.3, 1.2815515655, 2.5] {
            assert!((qfunc(x) - q_series(x)).abs() < 1e-12, "{x}: {} vs {}", qfunc(x), q_series(x));
        }
        assert!(qinv(0.0).is_err() && qinv(1.0).is_err());
    }

    fn toy_gp() -> GpModel {
        GpModel::new(
            Pmf::bernoulli(0.3).unwrap(),
            Kernel::from_rows(vec![vec![0.8, 0.2], vec![0.3, 0.7]]).unwrap(),
            FnTable::from_fn2(2, 2, 2, |u, s| u ^ s).unwrap(),
            Kernel::from_rows(vec![vec![0.9, 0.1], vec![0.2, 0.8], vec![0.1, 0.9], vec![0.85, 0.15]]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn gp_rate_direct_formula() {
        let gp = toy_gp();
        let joint = gp.joint().unwrap();
        // brute force ι(U;Y) − ι(U;S) from the model components
        let (ns, nu, ny) = (2, 2, 2);
        let mut p = vec![vec![vec![0.0; ny]; nu]; ns];
        for s in 0..ns {
            for u in 0..nu {
                for y in 0..ny {
                    let x = gp.x_fn.get2(u, s);
                    p[s][u][y] = gp.p_s.prob(s) * gp.p_u_given_s.get(s, u) * gp.channel.get(x * ns + s, y);
                }
            }
        }
        let pu: Vec<f64> = (0..nu).map(|u| (0..ns).map(|s| p[s][u].iter().sum::<f64>()).sum()).collect();
        let py: Vec<f64> = (0..ny).map(|y| (0..ns).flat_map(|s| (0..nu).map(move |u| (s, u))).map(|(s, u)| p[s][u][y]).sum()).collect();
        let puy = |u: usize, y: usize| (0..ns).map(|s| p[s][u][y]).sum::<f64>();
        let mut c = 0.0;
        let mut m2 = 0.0;
        for s in 0..ns {
            for u in 0..nu {
                for y in 0..ny {
                    let w = p[s][u][y];
                    let x = (puy(u, y) / (pu[u] * py[y])).log2() - (gp.p_u_given_s.get(s, u) / pu[u]).log2();
                    c += w * x;
                    m2 += w * x * x;
                }
            }
        }
        let v = m2 - c * c;
        let (n, eps, alpha) = (400u64, 0.1, 1.0);
        let r = gp_rate(n, eps, &joint, alpha).unwrap();
        assert!((r.c - c).abs() < 1e-12 && (r.v - v).abs() < 1e-12);
        let want = 400.0 * c - (400.0 * v).sqrt() * q_inverse_bisect(0.1 - 1.0 / 20.0) - 0.5 * 400f64.log2();
        assert!((r.log_l - want).abs() < 1e-8, "{} vs {want}", r.log_l);
        assert!(gp_rate(100, 0.1, &joint, 1.0).is_err());
    }

    fn q_inverse_bisect(e: f64) -> f64 {
        let (mut lo, mut hi) = (-10.0, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if q_series(f64::clamp(mid, -6.0, 6.0)) > e {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn gp_rate_trivial_cases() {
        let joint = toy_gp().joint().unwrap();
        // ε − α/√n = 0.5 makes the Q⁻¹ term vanish
        let r = gp_rate(100, 0.6, &joint, 1.0).unwrap();
        assert!((r.log_l - (100.0 * r.c - 0.5 * 100f64.log2())).abs() < 1e-9);
    }

    #[test]
    fn binary_rate_distortion() {
        let pw = Pmf::uniform(2).unwrap();
        let d = Distortion::hamming(2);
        for target in [0.05, 0.11, 0.25] {
            let rd = ba_rd(&pw, &d, target).unwrap();
            assert_eq!(rd.regime, RdRegime::Interior);
            assert!((rd.rate - (1.0 - h2(target))).abs() < 1e-6, "{target}: {}", rd.rate);
            assert!(rd.achieved <= target + 1e-7);
            assert!((rd.rate - rd.dual).abs() < 1e-7);
            let (m, v) = source_dispersion(&pw, &rd).unwrap();
            assert!((m - rd.rate).abs() < 1e-6);
            assert!(v.abs() < 1e-12);
        }
        let rd = ba_rd(&pw, &d, 0.6).unwrap();
        assert_eq!(rd.rate, 0.0);
        let rd = ba_rd(&pw, &d, 0.0).unwrap();
        assert!((rd.rate - 1.0).abs() < 1e-9);
        assert!(d_tilted(&pw, &rd, 0, 0.0).is_err());
        assert!(ba_rd(&pw, &d, -0.1).is_err());
    }

    #[test]
    fn skewed_binary_tilted_information() {
        let p = 0.3;
        let pw = Pmf::bernoulli(p).unwrap();
        let rd = ba_rd(&pw, &Distortion::hamming(2), 0.1).unwrap();
        assert!((rd.rate - (h2(p) - h2(0.1))).abs() < 1e-6);
        for (w, pw_w) in [(0usize, 1.0 - p), (1, p)] {
            let j = d_tilted(&pw, &rd, w, 0.1).unwrap();
            assert!((j - (-(pw_w as f64).log2() - h2(0.1))).abs() < 1e-6, "w = {w}: {j}");
        }
        let (m, v) = source_dispersion(&pw, &rd).unwrap();
        assert!((m - rd.rate).abs() < 1e-6);
        assert!(v >= 0.0);
    }

    #[test]
    fn blocklength_check_cases() {
        let base = DispersionInputs {
            c: 0.5,
            v: 0.3,
            rate: 0.2,
            source_v: 0.1,
            eps: 0.1,
            n: 1000,
            k: 0,
            eta: 1.0,
            alpha: 1.0,
            beta: 1.0,
            k0: 1,
        };
        let r = jscc_blocklength_check(&base).unwrap();
        let want = (1000.0f64 * 0.3).sqrt() * qinv(0.1 - 1.0 / 1000f64.sqrt()).unwrap() + 0.5 * 1000f64.log2() + 1.0;
        assert!((r.rhs - want).abs() < 1e-12 && r.lhs == 500.0 && r.satisfied);
        let tight = DispersionInputs { eta: 10.0, n: 50, ..base.clone() };
        assert_eq!(jscc_blocklength_check(&tight).unwrap().rhs, f64::INFINITY);
        let x = DispersionInputs { k: 500, ..base.clone() };
        let n0 = min_blocklength(&x, 100_000).unwrap().unwrap();
        assert!(jscc_blocklength_check(&DispersionInputs { n: n0, ..x.clone() }).unwrap().satisfied);
        assert!(!jscc_blocklength_check(&DispersionInputs { n: n0 - 1, ..x }).unwrap().satisfied);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn qinv_inverts_qfunc(x in -6.0f64..6.0) {
            // below zero Q(x) sits near 1 and loses absolute precision in f64
            let phi = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
            let tol = if x >= 0.0 { 1e-9 } else { 1e-9f64.max(4.0 * f64::EPSILON / phi) };
            prop_assert!((qinv(qfunc(x)).unwrap() - x).abs() < tol);
            let e = qfunc(x);
            prop_assert!((qfunc(qinv(e).unwrap()) - e).abs() <= 1e-10);
        }

        #[test]
        fn rd_dual_gap(w in prop::collection::vec(0.05f64..1.0, 2..=3), frac in 0.05f64..0.95) {
            let pw = Pmf::normalized(w).unwrap();
            let d = Distortion::hamming(pw.len());
            let rd0 = ba_rd(&pw, &d, 0.0).unwrap();
            let target = frac * rd0.d_max;
            let rd = ba_rd(&pw, &d, target).unwrap();
            prop_assert!(rd.achieved <= target + 1e-7);
            prop_assert!((rd.rate - rd.dual).abs() < 1e-8, "gap {}", rd.rate - rd.dual);
            let (m, _) = source_dispersion(&pw, &rd).unwrap();
            prop_assert!((m - rd.rate).abs() < 1e-6);
        }

        #[test]
        fn blocklength_monotone_in_n(
            c in 0.1f64..1.0, v in 0.0f64..1.0, r in 0.0f64..0.5, sv in 0.0f64..1.0,
            eps in 0.01f64..0.5, n in 1u64..5000, k in 1u64..5000, beta in 0.0f64..5.0, alpha in 0.0f64..2.0, eta in 0.0f64..1.0,
        ) {
            let x = DispersionInputs { c, v, rate: r, source_v: sv, eps, n, k, eta, alpha, beta, k0: 1 };
            let a = jscc_blocklength_check(&x).unwrap();
            let b = jscc_blocklength_check(&DispersionInputs { n: n + 1, ..x }).unwrap();
            prop_assert!(!(a.satisfied && !b.satisfied));
        }
    }
}
