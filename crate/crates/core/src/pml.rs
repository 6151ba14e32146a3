//! Closed-form laws of the matching rank and the bounds built on them.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::prob::{kl, renyi, ExtRatio, FiniteMeasure, Pmf};

const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// Conditional parameters of the rank law at atom `u`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AlphaBeta {
    pub atom: usize,
    /// `f64::INFINITY` when `q(u) = 0`.
    pub alpha: f64,
    pub beta: f64,
}

fn densities(mu: &FiniteMeasure, p: &Pmf, q: &Pmf) -> Result<(Vec<f64>, Vec<f64>)> {
    Ok((mu.density_of(p)?, mu.density_of(q)?))
}

pub fn alpha_beta(mu: &FiniteMeasure, p: &Pmf, q: &Pmf, u: usize) -> Result<AlphaBeta> {
    let (f, g) = densities(mu, p, q)?;
    if u >= f.len() || f[u] <= 0.0 {
        return Err(Error::InvalidParameter(format!("atom {u} is outside the support of P")));
    }
    if g[u] <= 0.0 {
        return Ok(AlphaBeta { atom: u, alpha: f64::INFINITY, beta: 0.0 });
    }
    let (fu, gu) = (f[u], g[u]);
    let mut a = 0.0;
    let mut b = 0.0;
    for v in mu.support() {
        let (rg, rf) = (g[v] / gu, f[v] / fu);
        a += (rg - rf).max(0.0) * mu.weight(v);
        b += rg.min(rf) * mu.weight(v);
    }
    Ok(AlphaBeta { atom: u, alpha: fu * a, beta: (fu * b).clamp(0.0, 1.0) })
}

/// Exact law of `Υ_{P∥Q}(j) − 1` given `Ũ_P(j) = u`:
/// NegBin (failures before the j-th success, success probability `1/(1+α)`)
/// convolved with Bin(j − 1, β).
#[derive(Clone, Debug, Serialize)]
pub struct RankLaw {
    pub j: usize,
    pub params: AlphaBeta,
    /// `pmf[k] = P{Υ − 1 = k}`; empty when the rank is infinite a.s.
    pub pmf: Vec<f64>,
    /// Mass beyond the truncation point (1 when the rank is infinite).
    pub tail: f64,
}

const LAW_TAIL: f64 = 1e-12;
const LAW_MAX_TERMS: usize = 10_000_000;

fn negbin_pmf(j: usize, alpha: f64) -> Vec<f64> {
    if alpha == 0.0 {
        return vec![1.0];
    }
    let s = 1.0 / (1.0 + alpha);
    let fail = alpha / (1.0 + alpha);
    let mut out = vec![s.powi(j as i32)];
    if out[0] == 0.0 {
        // underflow for huge α: start from logs
        let lp = j as f64 * s.ln();
        out[0] = lp.exp();
    }
    let mut acc = out[0];
    let mut k = 1usize;
    while 1.0 - acc > LAW_TAIL * 0.1 && k < LAW_MAX_TERMS {
        let next = out[k - 1] * (k + j - 1) as f64 / k as f64 * fail;
        out.push(next);
        acc += next;
        k += 1;
    }
    out
}

fn binomial_pmf(n: usize, beta: f64) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    if beta <= 0.0 {
        out[0] = 1.0;
        return out;
    }
    if beta >= 1.0 {
        out[n] = 1.0;
        return out;
    }
    let mut c = 1.0f64;
    for (k, o) in out.iter_mut().enumerate() {
        *o = c * beta.powi(k as i32) * (1.0 - beta).powi((n - k) as i32);
        c = c * (n - k) as f64 / (k + 1) as f64;
    }
    out
}

pub fn rank_law(mu: &FiniteMeasure, p: &Pmf, q: &Pmf, u: usize, j: usize) -> Result<RankLaw> {
    if j == 0 {
        return Err(Error::InvalidParameter("j must be at least 1".into()));
    }
    let params = alpha_beta(mu, p, q, u)?;
    Ok(RankLaw::from_params(params, j))
}

impl RankLaw {
    pub fn from_params(params: AlphaBeta, j: usize) -> Self {
        if params.alpha.is_infinite() {
            return Self { j, params, pmf: Vec::new(), tail: 1.0 };
        }
        let nb = negbin_pmf(j, params.alpha);
        let bin = binomial_pmf(j - 1, params.beta);
        let mut pmf = vec![0.0; nb.len() + bin.len() - 1];
        for (a, &x) in nb.iter().enumerate() {
            for (b, &y) in bin.iter().enumerate() {
                pmf[a + b] += x * y;
            }
        }
        let total: f64 = pmf.iter().sum();
        Self { j, params, pmf, tail: (1.0 - total).max(0.0) }
    }

    pub fn is_infinite(&self) -> bool {
        self.params.alpha.is_infinite()
    }

    /// `E[Υ − 1] = jα + (j−1)β`.
    pub fn mean(&self) -> f64 {
        self.j as f64 * self.params.alpha + (self.j - 1) as f64 * self.params.beta
    }

    /// `P{Υ > k}` from the truncated pmf (upper-rounded by the tail).
    pub fn prob_rank_gt(&self, k: u64) -> f64 {
        if self.is_infinite() {
            return 1.0;
        }
        let head: f64 = self.pmf.iter().take(k as usize).sum();
        (1.0 - head).clamp(0.0, 1.0)
    }

    /// `P{Υ > 1} = 1 − (1−β)^{j−1} / (1+α)^j`.
    pub fn mismatch(&self) -> f64 {
        let (a, b) = (self.params.alpha, self.params.beta);
        if a.is_infinite() {
            return 1.0;
        }
        1.0 - (1.0 - b).powi(self.j as i32 - 1) / (1.0 + a).powi(self.j as i32)
    }
}

/// `P{Υ(1) > k | u} = (1 − (1+α)⁻¹)^k`.
pub fn tail_j1(alpha: f64, k: u64) -> f64 {
    if alpha.is_infinite() {
        return 1.0;
    }
    (alpha / (1.0 + alpha)).powf(k as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BoundForm {
    /// `1 − (1+r)⁻¹`
    Basic,
    /// `j·r + 1`, a bound on `E[Υ]`
    Mean,
    /// `min{(j/k)·r, 1}`
    Tail,
    /// `1 − (1 − min{r,1})^j`
    K1,
    /// `(1 − (1+r)⁻¹)^k`
    J1,
    /// `1 − (1 + r/k)⁻¹`
    J1Weak,
}

/// Matching-lemma bound for the density ratio `r = dP/dQ` at the selected point.
pub fn pml_bound(r: ExtRatio, j: u64, k: u64, form: BoundForm) -> f64 {
    let (j, k) = (j as f64, k as f64);
    match r {
        ExtRatio::Infinite => {
            if form == BoundForm::Mean {
                f64::INFINITY
            } else {
                1.0
            }
        }
        ExtRatio::Finite(r) => match form {
            BoundForm::Basic => r / (1.0 + r),
            BoundForm::Mean => j * r + 1.0,
            BoundForm::Tail => (j / k * r).min(1.0),
            BoundForm::K1 => 1.0 - (1.0 - r.min(1.0)).powf(j),
            BoundForm::J1 => (r / (1.0 + r)).powf(k),
            BoundForm::J1Weak => (r / k) / (1.0 + r / k),
        },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentBounds {
    /// Bound on `E[log Υ(j)]`, bits.
    pub log_bound: f64,
    /// Bound on `E[Υ(j)^γ]`.
    pub power_bound: f64,
}

pub fn moment_bounds(p: &Pmf, q: &Pmf, j: usize, gamma: f64) -> Result<MomentBounds> {
    if j == 0 || !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter("need j ≥ 1 and γ ∈ (0,1)".into()));
    }
    if p.len() != q.len() {
        return Err(Error::InvalidDistribution("pmfs differ in size".into()));
    }
    let jf = j as f64;
    let d = kl(p.weights(), q.weights());
    let dg = renyi(p.weights(), q.weights(), gamma + 1.0);
    Ok(MomentBounds {
        log_bound: d + jf.log2() + LOG2_E / jf,
        power_bound: jf.powf(gamma) * (gamma * dg).exp2() + gamma * jf.powf(gamma - 1.0),
    })
}

/// Both sides of `I + log e + log(I + log e + 1) + 1 ≤ I + log(I+1) + 3.732`.
pub fn sfrl_chain(i: f64) -> (f64, f64) {
    let lhs = i + LOG2_E + (i + LOG2_E + 1.0).log2() + 1.0;
    let rhs = i + (i + 1.0).log2() + 3.732;
    (lhs, rhs)
}

/// Weights `φ(k) = c k⁻¹ (log₂(k+2))⁻²` on ℕ.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PhiDist {
    pub c: f64,
    pub c_lo: f64,
    pub c_hi: f64,
    pub partial_terms: u64,
    /// `Σ_{k ≤ N} k⁻¹ (log₂(k+2))⁻²`
    pub partial_sum: f64,
    pub tail_lo: f64,
    pub tail_hi: f64,
}

const PHI_TERMS: u64 = 100_000_000;
const PHI_CHUNK: u64 = 1 << 16;

fn phi_raw(k: f64) -> f64 {
    let l = (k + 2.0).log2();
    1.0 / (k * l * l)
}

/// Compensated sum.
fn neumaier(xs: impl Iterator<Item = f64>) -> f64 {
    let mut s = 0.0f64;
    let mut c = 0.0f64;
    for x in xs {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

impl PhiDist {
    /// Partial sum to `n` plus a tail bracket from monotone comparison integrals:
    /// `∫_{n+1}^∞ dx / ((x+2) log₂²(x+2)) ≤ tail ≤ ∫_n^∞ dx / (x log₂² x)`.
    pub fn certify(n: u64) -> Self {
        let chunks = n.div_ceil(PHI_CHUNK);
        let parts: Vec<f64> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let lo = c * PHI_CHUNK + 1;
                let hi = ((c + 1) * PHI_CHUNK).min(n);
                neumaier((lo..=hi).map(|k| phi_raw(k as f64)))
            })
            .collect();
        let partial = neumaier(parts.into_iter());
        let ln2sq = std::f64::consts::LN_2 * std::f64::consts::LN_2;
        let nf = n as f64;
        let tail_lo = ln2sq / (nf + 3.0).ln();
        let tail_hi = ln2sq / nf.ln();
        // rounding slack for the summation
        let slack = 1e-13;
        let lo = partial + tail_lo - slack;
        let hi = partial + tail_hi + slack;
        Self {
            c: 2.0 / (lo + hi),
            c_lo: 1.0 / hi,
            c_hi: 1.0 / lo,
            partial_terms: n,
            partial_sum: partial,
            tail_lo,
            tail_hi,
        }
    }

    pub fn bracket_width(&self) -> f64 {
        self.c_hi - self.c_lo
    }

    pub fn phi(&self, t: f64) -> f64 {
        self.c * phi_raw(t)
    }

    /// `φ(1..=k)` and the remaining tail mass `1 − Σ_{i≤k} φ(i)`.
    pub fn head(&self, k: usize) -> (Vec<f64>, f64) {
        let w: Vec<f64> = (1..=k).map(|i| self.phi(i as f64)).collect();
        let s = neumaier(w.iter().copied());
        (w, (1.0 - s).max(0.0))
    }
}

/// Process-wide certified φ.
pub fn phi_constant() -> &'static PhiDist {
    static PHI: OnceLock<PhiDist> = OnceLock::new();
    PHI.get_or_init(|| PhiDist::certify(PHI_TERMS))
}

pub fn phi(t: f64) -> f64 {
    phi_constant().phi(t)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PhiInequality {
    pub lhs: f64,
    pub mid: f64,
    pub rhs: f64,
    /// Whether `s·t ≤ 2^{−α}`, `t − 1 ≤ 2^β` and `ᾱ ≥ max{α, 0}` hold.
    pub preconditions: bool,
    pub holds: bool,
}

/// `min{s/φ(t), 1} ≤ min{s t (log(1/s + 1) + 1)², 1} ≤ 2^{−α}(2(ᾱ+β)² + 2ᾱ² + 14)`;
/// the second step is only asserted under its preconditions.
pub fn phi_inequality(s: f64, t: f64, alpha: f64, beta: f64, alpha_tilde: f64) -> PhiInequality {
    let lhs = (s / phi(t)).min(1.0);
    let l = (1.0 / s + 1.0).log2() + 1.0;
    let mid = (s * t * l * l).min(1.0);
    let rhs = (-alpha).exp2() * (2.0 * (alpha_tilde + beta).powi(2) + 2.0 * alpha_tilde.powi(2) + 14.0);
    let preconditions = s * t <= (-alpha).exp2() && t - 1.0 <= beta.exp2() && alpha_tilde >= alpha.max(0.0);
    let eps = 1e-12;
    let holds = lhs <= mid + eps && (!preconditions || mid <= rhs + eps);
    PhiInequality { lhs, mid, rhs, preconditions, holds }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{Binomial, Discrete, NegativeBinomial};

    fn canonical() -> (FiniteMeasure, Pmf, Pmf) {
        (
            FiniteMeasure::new(vec![1.0, 1.0]).unwrap(),
            Pmf::new(vec![0.75, 0.25]).unwrap(),
            Pmf::new(vec![0.5, 0.5]).unwrap(),
        )
    }

    /// Brute-force α, β straight from their sums, written independently.
    fn brute(mu: &[f64], p: &[f64], q: &[f64], u: usize) -> (f64, f64) {
        let f: Vec<f64> = p.iter().zip(mu).map(|(a, m)| a / m).collect();
        let g: Vec<f64> = q.iter().zip(mu).map(|(a, m)| a / m).collect();
        let mut a = 0.0;
        let mut b = 0.0;
        for v in 0..mu.len() {
            let x = g[v] / g[u];
            let y = f[v] / f[u];
            a += if x > y { (x - y) * mu[v] } else { 0.0 };
            b += if x < y { x * mu[v] } else { y * mu[v] };
        }
        (f[u] * a, f[u] * b)
    }

    #[test]
    fn canonical_alpha_beta() {
        let (mu, p, q) = canonical();
        let ab = alpha_beta(&mu, &p, &q, 0).unwrap();
        assert!((ab.alpha - 0.5).abs() < 1e-15 && (ab.beta - 1.0).abs() < 1e-15);
        let (a, b) = brute(&[1.0, 1.0], &[0.75, 0.25], &[0.5, 0.5], 0);
        assert!((ab.alpha - a).abs() < 1e-15 && (ab.beta - b).abs() < 1e-15);
        // atom b has the smaller P/Q ratio, so it is never overtaken
        let ab = alpha_beta(&mu, &p, &q, 1).unwrap();
        let (a, b) = brute(&[1.0, 1.0], &[0.75, 0.25], &[0.5, 0.5], 1);
        assert!((ab.alpha - a).abs() < 1e-15 && (ab.beta - b).abs() < 1e-15);
        assert_eq!(ab.alpha, 0.0);
        assert!((ab.beta - 0.5).abs() < 1e-15);
    }

    #[test]
    fn identical_pmfs() {
        let (mu, p, _) = canonical();
        for u in 0..2 {
            let ab = alpha_beta(&mu, &p, &p, u).unwrap();
            assert_eq!(ab.alpha, 0.0);
            assert!((ab.beta - 1.0).abs() < 1e-15);
        }
        let law = rank_law(&mu, &p, &p, 0, 3).unwrap();
        assert!((law.pmf[2] - 1.0).abs() < 1e-15);
        assert!(law.pmf[..2].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn canonical_tails_and_mean() {
        let (mu, p, q) = canonical();
        let law = rank_law(&mu, &p, &q, 0, 1).unwrap();
        assert!((law.prob_rank_gt(1) - 1.0 / 3.0).abs() < 1e-12);
        assert!((law.prob_rank_gt(2) - 1.0 / 9.0).abs() < 1e-12);
        assert!((tail_j1(0.5, 2) - 1.0 / 9.0).abs() < 1e-15);
        assert!((law.mismatch() - 1.0 / 3.0).abs() < 1e-15);
        let law2 = rank_law(&mu, &p, &q, 0, 2).unwrap();
        assert!((law2.mean() - 2.0).abs() < 1e-15);
        let m: f64 = law2.pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        assert!((m - 2.0).abs() < 1e-9);
        let lemma = pml_bound(ExtRatio::Finite(1.5), 1, 1, BoundForm::Basic);
        assert!((lemma - 0.6).abs() < 1e-15);
    }

    #[test]
    fn law_matches_statrs_convolution() {
        for &(alpha, beta, j) in &[(0.5, 1.0, 2usize), (1.7, 0.3, 3), (0.05, 0.9, 1), (3.0, 0.0, 3)] {
            let law = RankLaw::from_params(AlphaBeta { atom: 0, alpha, beta }, j);
            let nb = NegativeBinomial::new(j as f64, 1.0 / (1.0 + alpha)).unwrap();
            let bin = Binomial::new(beta, (j - 1) as u64).unwrap();
            for k in 0..40u64 {
                let want: f64 = (0..=k.min(j as u64 - 1)).map(|b| bin.pmf(b) * nb.pmf(k - b)).sum();
                let got = law.pmf.get(k as usize).copied().unwrap_or(0.0);
                assert!((got - want).abs() < 1e-12, "α={alpha} β={beta} j={j} k={k}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn infinite_alpha() {
        let mu = FiniteMeasure::new(vec![1.0, 1.0]).unwrap();
        let p = Pmf::point(2, 0).unwrap();
        let q = Pmf::point(2, 1).unwrap();
        let law = rank_law(&mu, &p, &q, 0, 2).unwrap();
        assert!(law.is_infinite());
        assert_eq!(law.prob_rank_gt(100), 1.0);
    }

    #[test]
    fn bound_forms() {
        assert_eq!(pml_bound(ExtRatio::Finite(1.0), 1, 1, BoundForm::Basic), 0.5);
        assert_eq!(pml_bound(ExtRatio::Infinite, 1, 1, BoundForm::Basic), 1.0);
        let j1 = pml_bound(ExtRatio::Finite(1.5), 1, 2, BoundForm::J1);
        let weak = pml_bound(ExtRatio::Finite(1.5), 1, 2, BoundForm::J1Weak);
        assert!((j1 - 0.36).abs() < 1e-15);
        assert!((weak - (1.0 - 1.0 / 1.75)).abs() < 1e-15);
        assert!(j1 <= weak);
    }

    #[test]
    fn moment_examples() {
        let (_, p, _) = canonical();
        let m = moment_bounds(&p, &p, 1, 0.5).unwrap();
        assert!((m.log_bound - LOG2_E).abs() < 1e-15);
        let m = moment_bounds(&Pmf::point(2, 0).unwrap(), &Pmf::uniform(2).unwrap(), 1, 0.5).unwrap();
        assert!((m.log_bound - (1.0 + LOG2_E)).abs() < 1e-12);
        for i in [0.0, 1.0, 5.0, 20.0] {
            let (l, r) = sfrl_chain(i);
            assert!(l <= r, "I={i}: {l} > {r}");
        }
    }

    #[test]
    fn phi_constant_certified() {
        let d = phi_constant();
        assert!(d.c_lo >= 1.0 && d.c_hi <= 2.0, "{d:?}");
        assert!(d.bracket_width() < 1e-10, "{d:?}");
        assert!(d.c_lo <= d.c && d.c <= d.c_hi);
    }

    #[test]
    fn phi_partial_sums_increase_within_bracket() {
        let d = phi_constant();
        let (w, tail) = d.head(1000);
        assert!(w.iter().all(|&x| x > 0.0));
        let s: f64 = w.iter().sum();
        assert!((s + tail - 1.0).abs() < 1e-12);
        // Σ_{k≤N} φ(k) + c·[tail_lo, tail_hi] brackets 1
        let total_lo = d.c * (d.partial_sum + d.tail_lo);
        let total_hi = d.c * (d.partial_sum + d.tail_hi);
        assert!(total_lo <= 1.0 + 1e-9 && total_hi >= 1.0 - 1e-9);
        assert!((total_lo - 1.0).abs() < 1e-9 && (total_hi - 1.0).abs() < 1e-9);
    }

    #[test]
    fn phi_inequality_corner() {
        let r = phi_inequality(1.0, 1.0, 0.0, 0.0, 0.0);
        assert_eq!(r.lhs, 1.0);
        assert_eq!(r.mid, 1.0);
        assert!(r.holds);
    }
}
