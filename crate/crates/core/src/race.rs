//! Exponential-race realization of a Poisson process with intensity μ × λ on
//! a finite alphabet.
//!
//! Atom `u` carries its own arrival stream with Exp(μ(u)) gaps; gap `k` of
//! atom `u` is a pure function of `(seed, u, k)`. A [`View`] tilts the process
//! by a density `f = dP/dμ`: the key of arrival `(u, i)` is `t_{u,i} / f(u)`,
//! and sorting by key gives the mapped sequence `Ũ_P(1), Ũ_P(2), …`.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{FiniteMeasure, Pmf};
use crate::rng::{counter_u64, derive, unit_open};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RacePoint {
    pub atom: usize,
    /// 1-based arrival index within the atom's stream.
    pub arrival: usize,
    pub time: f64,
    /// Key under the view that produced this point.
    pub key: f64,
}

impl RacePoint {
    /// Key of the same stored arrival under another view.
    pub fn key_under(&self, view: &View) -> f64 {
        view.key(self.atom, self.time)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rank {
    Finite(u64),
    Infinite,
}

impl Rank {
    pub fn finite(self) -> Option<u64> {
        match self {
            Rank::Finite(k) => Some(k),
            Rank::Infinite => None,
        }
    }
}

/// Density of a pmf with respect to the base measure, plus its support.
#[derive(Clone, Debug)]
pub struct View {
    density: Vec<f64>,
    support: Vec<usize>,
}

impl View {
    /// Checks `p ≪ μ`.
    pub fn new(base: &FiniteMeasure, p: &Pmf) -> Result<Self> {
        Ok(Self::from_density(base.density_of(p)?))
    }

    /// Density supplied directly. It must vanish wherever μ does.
    pub fn from_density(density: Vec<f64>) -> Self {
        let support = density.iter().enumerate().filter(|(_, d)| **d > 0.0).map(|(i, _)| i).collect();
        Self { density, support }
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    #[inline]
    pub fn key(&self, atom: usize, time: f64) -> f64 {
        let f = self.density[atom];
        if f > 0.0 {
            time / f
        } else {
            f64::INFINITY
        }
    }
}

/// Total order on points: key, then atom, then arrival index.
#[derive(Clone, Copy, Debug)]
struct Entry {
    key: f64,
    atom: usize,
    arrival: usize,
    time: f64,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .total_cmp(&other.key)
            .then(self.atom.cmp(&other.atom))
            .then(self.arrival.cmp(&other.arrival))
    }
}

impl Entry {
    fn point(self) -> RacePoint {
        RacePoint { atom: self.atom, arrival: self.arrival, time: self.time, key: self.key }
    }
}

/// One realization of the process. Streams are memoized lazily, so a process
/// is single-owner mutable state; use one per trial.
#[derive(Clone, Debug)]
pub struct RaceProcess {
    rates: Vec<f64>,
    seed: u64,
    streams: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceRow {
    pub atom: usize,
    pub arrival_index: usize,
    pub time: f64,
    pub p_key: Option<f64>,
    pub q_key: Option<f64>,
}

impl RaceProcess {
    pub fn new(base: &FiniteMeasure, seed: u64) -> Result<Self> {
        Self::from_rates(base.weights().to_vec(), seed)
    }

    pub fn from_rates(rates: Vec<f64>, seed: u64) -> Result<Self> {
        if rates.iter().any(|r| !(r.is_finite() && *r >= 0.0)) || !rates.iter().any(|&r| r > 0.0) {
            return Err(Error::InvalidDistribution("base measure needs a positive finite weight".into()));
        }
        let streams = vec![Vec::new(); rates.len()];
        Ok(Self { rates, seed, streams })
    }

    /// Starts a fresh realization, keeping allocations.
    pub fn reseed(&mut self, seed: u64) {
        self.seed = seed;
        self.streams.iter_mut().for_each(Vec::clear);
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// Number of arrivals materialized so far at `atom`.
    pub fn materialized(&self, atom: usize) -> usize {
        self.streams[atom].len()
    }

    /// Time of the `index`-th (0-based) arrival at `atom`.
    pub fn arrival(&mut self, atom: usize, index: usize) -> f64 {
        let rate = self.rates[atom];
        debug_assert!(rate > 0.0, "zero-rate atom {atom} has no arrivals");
        let stream = &mut self.streams[atom];
        if stream.len() <= index {
            let key = derive(self.seed, atom as u64);
            let mut t = stream.last().copied().unwrap_or(0.0);
            for k in stream.len()..=index {
                t += -unit_open(counter_u64(key, k as u64)).ln() / rate;
                stream.push(t);
            }
        }
        stream[index]
    }

    fn entry(&mut self, view: &View, atom: usize, index: usize) -> Entry {
        let time = self.arrival(atom, index);
        Entry { key: view.key(atom, time), atom, arrival: index + 1, time }
    }

    /// `Ũ_P`: the point minimizing `t / f(u)` over atoms with `f(u) > 0`.
    pub fn pfr_select(&mut self, view: &View) -> Result<RacePoint> {
        let mut best: Option<Entry> = None;
        for i in 0..view.support.len() {
            let atom = view.support[i];
            let e = self.entry(view, atom, 0);
            if best.map_or(true, |b| e < b) {
                best = Some(e);
            }
        }
        best.map(Entry::point).ok_or_else(|| Error::InvalidDistribution("view has empty support".into()))
    }

    /// The `j`-th point (1-based) of the mapped sequence.
    pub fn pfr_nth(&mut self, view: &View, j: usize) -> Result<RacePoint> {
        if j == 0 {
            return Err(Error::InvalidParameter("j must be at least 1".into()));
        }
        if j == 1 {
            return self.pfr_select(view);
        }
        let mut m = Mapped::new(self, view);
        let mut last = None;
        for _ in 0..j {
            last = m.next_point();
        }
        last.ok_or_else(|| Error::InvalidDistribution("view has empty support".into()))
    }

    /// The first `k` points of the mapped sequence.
    pub fn pfr_list(&mut self, view: &View, k: usize) -> Result<Vec<RacePoint>> {
        if view.support.is_empty() {
            return Err(Error::InvalidDistribution("view has empty support".into()));
        }
        let mut m = Mapped::new(self, view);
        Ok((0..k).filter_map(|_| m.next_point()).collect())
    }

    /// Position of `point` in the ordering induced by `q`.
    pub fn rank_of(&mut self, point: &RacePoint, q: &View) -> Rank {
        let g_u = q.density[point.atom];
        if g_u <= 0.0 {
            return Rank::Infinite;
        }
        let target = Entry { key: point.time / g_u, atom: point.atom, arrival: point.arrival, time: point.time };
        let mut count: u64 = 0;
        for s in 0..q.support.len() {
            let v = q.support[s];
            let mut i = 0;
            loop {
                let e = self.entry(q, v, i);
                if e >= target {
                    break;
                }
                count += 1;
                i += 1;
            }
        }
        Rank::Finite(count + 1)
    }

    /// `Υ_{P∥Q}(j)`: rank of the `j`-th P-point in the Q-ordering.
    pub fn match_rank(&mut self, p: &View, q: &View, j: usize) -> Result<Rank> {
        let pt = self.pfr_nth(p, j)?;
        Ok(self.rank_of(&pt, q))
    }

    /// First `n` points by raw time (superposition of all streams), with
    /// their keys under up to two views.
    pub fn trace(&mut self, n: usize, p: Option<&View>, q: Option<&View>) -> Vec<TraceRow> {
        let ones = View::from_density(self.rates.iter().map(|&r| if r > 0.0 { 1.0 } else { 0.0 }).collect());
        let mut m = Mapped::new(self, &ones);
        let pts: Vec<RacePoint> = (0..n).filter_map(|_| m.next_point()).collect();
        let key = |v: Option<&View>, pt: &RacePoint| {
            v.map(|v| v.key(pt.atom, pt.time)).filter(|k| k.is_finite())
        };
        pts.iter()
            .map(|pt| TraceRow {
                atom: pt.atom,
                arrival_index: pt.arrival,
                time: pt.time,
                p_key: key(p, pt),
                q_key: key(q, pt),
            })
            .collect()
    }
}

/// Lazy k-way merge producing the mapped sequence of one view.
pub struct Mapped<'a> {
    process: &'a mut RaceProcess,
    view: &'a View,
    heap: BinaryHeap<Reverse<Entry>>,
}

impl<'a> Mapped<'a> {
    pub fn new(process: &'a mut RaceProcess, view: &'a View) -> Self {
        let mut heap = BinaryHeap::with_capacity(view.support.len());
        for &atom in &view.support {
            heap.push(Reverse(process.entry(view, atom, 0)));
        }
        Self { process, view, heap }
    }

    pub fn next_point(&mut self) -> Option<RacePoint> {
        let Reverse(e) = self.heap.pop()?;
        let next = self.process.entry(self.view, e.atom, e.arrival);
        self.heap.push(Reverse(next));
        Some(e.point())
    }
}

impl Iterator for Mapped<'_> {
    type Item = RacePoint;

    fn next(&mut self) -> Option<RacePoint> {
        self.next_point()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{aux_rng, trial_seed};

    fn two_atom() -> (FiniteMeasure, View, View) {
        let mu = FiniteMeasure::new(vec![1.0, 1.0]).unwrap();
        let p = View::new(&mu, &Pmf::new(vec![0.75, 0.25]).unwrap()).unwrap();
        let q = View::new(&mu, &Pmf::new(vec![0.5, 0.5]).unwrap()).unwrap();
        (mu, p, q)
    }

    #[test]
    fn deterministic_streams_regardless_of_order() {
        let mu = FiniteMeasure::new(vec![1.0, 2.0, 0.5]).unwrap();
        let mut a = RaceProcess::new(&mu, 9).unwrap();
        let mut b = RaceProcess::new(&mu, 9).unwrap();
        let fwd: Vec<f64> = (0..3).flat_map(|u| (0..100).map(move |i| (u, i))).map(|(u, i)| a.arrival(u, i)).collect();
        let mut rev = vec![0.0; 300];
        for u in (0..3).rev() {
            for i in (0..100).rev() {
                rev[u * 100 + i] = b.arrival(u, i);
            }
        }
        assert_eq!(fwd, rev);
    }

    #[test]
    fn zero_weight_atoms_untouched() {
        let mu = FiniteMeasure::new(vec![1.0, 0.0, 1.0]).unwrap();
        let mut pr = RaceProcess::new(&mu, 1).unwrap();
        let v = View::new(&mu, &Pmf::new(vec![0.5, 0.0, 0.5]).unwrap()).unwrap();
        pr.pfr_list(&v, 50).unwrap();
        assert_eq!(pr.materialized(1), 0);
    }

    #[test]
    fn gap_mean_single_atom() {
        let mu = FiniteMeasure::new(vec![2.0]).unwrap();
        let mut pr = RaceProcess::new(&mu, 3).unwrap();
        let n = 100_000;
        let t = pr.arrival(0, n - 1);
        let mean = t / n as f64;
        let se = 0.5 / (n as f64).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * se, "mean gap {mean}");
    }

    #[test]
    fn point_mass_selects_own_atom() {
        let mu = FiniteMeasure::new(vec![1.0, 1.0, 1.0]).unwrap();
        let mut pr = RaceProcess::new(&mu, 5).unwrap();
        let v = View::new(&mu, &Pmf::point(3, 2).unwrap()).unwrap();
        let pt = pr.pfr_select(&v).unwrap();
        assert_eq!((pt.atom, pt.arrival), (2, 1));
        assert_eq!(pr.pfr_select(&v).unwrap(), pt);
    }

    #[test]
    fn nth_sorted_and_prefix_stable() {
        let (mu, p, _) = two_atom();
        let mut pr = RaceProcess::new(&mu, 11).unwrap();
        let l10 = pr.pfr_list(&p, 10).unwrap();
        let l11 = pr.pfr_list(&p, 11).unwrap();
        assert_eq!(&l11[..10], &l10[..]);
        assert!(l10.windows(2).all(|w| w[0].key < w[1].key));
        assert_eq!(pr.pfr_nth(&p, 1).unwrap(), pr.pfr_select(&p).unwrap());
        assert_eq!(pr.pfr_nth(&p, 7).unwrap(), l10[6]);
        assert!(pr.pfr_nth(&p, 0).is_err());
    }

    #[test]
    fn absolute_continuity_checked() {
        let mu = FiniteMeasure::new(vec![1.0, 0.0]).unwrap();
        assert!(View::new(&mu, &Pmf::uniform(2).unwrap()).is_err());
    }

    #[test]
    fn identical_views_rank_j() {
        let (mu, p, _) = two_atom();
        let mut pr = RaceProcess::new(&mu, 2).unwrap();
        for j in 1..8 {
            assert_eq!(pr.match_rank(&p, &p, j).unwrap(), Rank::Finite(j as u64));
        }
    }

    #[test]
    fn disjoint_supports_infinite() {
        let mu = FiniteMeasure::new(vec![1.0, 1.0]).unwrap();
        let p = View::new(&mu, &Pmf::point(2, 0).unwrap()).unwrap();
        let q = View::new(&mu, &Pmf::point(2, 1).unwrap()).unwrap();
        let mut pr = RaceProcess::new(&mu, 2).unwrap();
        assert_eq!(pr.match_rank(&p, &q, 1).unwrap(), Rank::Infinite);
    }

    #[test]
    fn rank_matches_brute_force() {
        let mu = FiniteMeasure::new(vec![0.7, 1.3, 0.4]).unwrap();
        let p = View::new(&mu, &Pmf::new(vec![0.2, 0.5, 0.3]).unwrap()).unwrap();
        let q = View::new(&mu, &Pmf::new(vec![0.6, 0.1, 0.3]).unwrap()).unwrap();
        for s in 0..200 {
            let mut pr = RaceProcess::new(&mu, s).unwrap();
            let j = 1 + (s as usize % 3);
            let r = pr.match_rank(&p, &q, j).unwrap().finite().unwrap() as usize;
            let target = pr.pfr_nth(&p, j).unwrap();
            let qlist = pr.pfr_list(&q, r).unwrap();
            assert_eq!((qlist[r - 1].atom, qlist[r - 1].arrival), (target.atom, target.arrival));
        }
    }

    #[test]
    fn inversion_identity() {
        let mu = FiniteMeasure::new(vec![1.0, 0.5, 2.0, 1.0]).unwrap();
        let p = View::new(&mu, &Pmf::new(vec![0.1, 0.4, 0.2, 0.3]).unwrap()).unwrap();
        let q = View::new(&mu, &Pmf::new(vec![0.5, 0.1, 0.1, 0.3]).unwrap()).unwrap();
        for s in 0..500 {
            let mut pr = RaceProcess::new(&mu, trial_seed(77, s)).unwrap();
            let j = 1 + (s as usize % 4);
            let k = pr.match_rank(&p, &q, j).unwrap().finite().unwrap() as usize;
            assert_eq!(pr.match_rank(&q, &p, k).unwrap(), Rank::Finite(j as u64));
        }
    }

    #[test]
    fn counting_dispersion() {
        let mu = FiniteMeasure::new(vec![2.0]).unwrap();
        let horizon = 2.0;
        let counts: Vec<f64> = (0..10_000)
            .map(|s| {
                let mut pr = RaceProcess::new(&mu, trial_seed(5, s)).unwrap();
                let mut n = 0;
                while pr.arrival(0, n) <= horizon {
                    n += 1;
                }
                n as f64
            })
            .collect();
        let m = counts.iter().sum::<f64>() / counts.len() as f64;
        let v = counts.iter().map(|c| (c - m) * (c - m)).sum::<f64>() / (counts.len() - 1) as f64;
        assert!((m - 4.0).abs() < 0.1, "mean {m}");
        assert!((0.9..=1.1).contains(&(v / m)), "dispersion {}", v / m);
    }

    #[test]
    fn superposition_gap_mean() {
        let mu = FiniteMeasure::new(vec![0.5, 1.5, 2.0]).unwrap();
        let mut pr = RaceProcess::new(&mu, 8).unwrap();
        let n = 50_000;
        let rows = pr.trace(n, None, None);
        let mean = rows.last().unwrap().time / n as f64;
        let se = 0.25 / (n as f64).sqrt();
        assert!((mean - 0.25).abs() < 3.0 * se, "mean gap {mean}");
    }

    #[test]
    fn selection_law_two_atoms() {
        let (mu, p, _) = two_atom();
        let mut pr = RaceProcess::new(&mu, 0).unwrap();
        let n = 100_000;
        let mut hits = 0;
        for s in 0..n {
            pr.reseed(trial_seed(123, s));
            if pr.pfr_select(&p).unwrap().atom == 0 {
                hits += 1;
            }
        }
        let f = hits as f64 / n as f64;
        assert!((f - 0.75).abs() < 4.0 * (0.75 * 0.25 / n as f64).sqrt(), "{f}");
        let _ = aux_rng(0, 0);
    }

    #[test]
    fn trace_keys() {
        let (mu, p, q) = two_atom();
        let mut pr = RaceProcess::new(&mu, 4).unwrap();
        let rows = pr.trace(5, Some(&p), Some(&q));
        assert_eq!(rows.len(), 5);
        for r in rows {
            assert!((r.p_key.unwrap() - r.time / p.density()[r.atom]).abs() < 1e-15);
        }
    }
}
