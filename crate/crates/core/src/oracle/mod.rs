//! Ground truth for small graphs: exhaustive enumeration, explicit graphlet
//! graphs, dense chains, exact sampling laws and distribution distances.

mod chain;
mod enumerate;
pub mod suites;

pub use chain::{conductance_of_cut, eps_mixing_time, relaxation_time, ChainMatrix, MIXING_GUARD};
pub use enumerate::{
    bucket_sizes, build_gk, enumerate_graphlets, enumerate_with_guard, graphlets_per_vertex, line_graph,
    GraphletGraph, GraphletIndex, ENUMERATION_GUARD,
};

use rand::Rng;

use crate::dd_order::DdOrder;
use crate::error::{Error, Result};
use crate::graph::{Graph, Graphlet, Vertex};
use crate::rng;
use crate::ugs::UgsSampler;

/// Half the L1 distance between two laws on the same support.
pub fn tv_distance(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "laws on different supports");
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Allowance for the plug-in TV estimate of an `n`-sample empirical law on
/// `support` outcomes: `3 √(support / (2n))`.
pub fn noise_allowance(support: usize, n: usize) -> f64 {
    3.0 * (support as f64 / (2.0 * n as f64)).sqrt()
}

pub fn uniform_law(len: usize) -> Vec<f64> {
    vec![1.0 / len as f64; len]
}

/// Sample counts per graphlet of `index`; errors on anything outside it.
pub fn tally(index: &GraphletIndex, samples: &[Graphlet]) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; index.len()];
    for s in samples {
        let i = index
            .index_of(&s.0)
            .ok_or_else(|| Error::Usage(format!("sample {s} is not a {}-graphlet", index.k)))?;
        counts[i] += 1;
    }
    Ok(counts)
}

pub fn empirical_law(index: &GraphletIndex, samples: &[Graphlet]) -> Result<Vec<f64>> {
    let n = samples.len() as f64;
    Ok(tally(index, samples)?.into_iter().map(|c| c as f64 / n).collect())
}

/// Pearson statistic of `counts` against `expected` probabilities, with its
/// degrees of freedom (outcomes with zero expectation are dropped).
pub fn chi_square(counts: &[u64], expected: &[f64]) -> (f64, usize) {
    let n: u64 = counts.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&c, &p) in counts.iter().zip(expected) {
        if p > 0.0 {
            let e = p * n as f64;
            stat += (c as f64 - e).powi(2) / e;
            cells += 1;
        }
    }
    (stat, cells.saturating_sub(1))
}

/// Exact law of the growing process at `v`: `(index in 𝒱_k, probability)`
/// for every graphlet of `B(v)`.
pub fn exact_sampling_law(sampler: &UgsSampler, index: &GraphletIndex, v: Vertex) -> Result<Vec<(usize, f64)>> {
    let buckets = index.by_bucket(sampler.order().rank());
    buckets[v].iter().map(|&i| Ok((i, sampler.prob(&index.all[i].0)?))).collect()
}

/// Step budget for the walk sampler: the exact `(eps/k²)`-mixing time of
/// the lazy walk on (k-1)-graphlets.
pub fn walk_mixing_time(g: &Graph, k: usize, eps: f64) -> Result<u64> {
    let gk = build_gk(g, k - 1)?;
    let chain = ChainMatrix::lazy_walk(&gk.adj);
    eps_mixing_time(&chain, eps / (k * k) as f64)
}

/// Smallest `b_v p(S)` over all graphlets reachable by the growing process
/// on `ord` (which must carry sorted adjacency).
pub fn min_bucket_mass(g: &Graph, ord: &DdOrder) -> Result<f64> {
    let sampler = UgsSampler::new(g, ord)?;
    let index = enumerate_graphlets(g, ord.k())?;
    let mut best = f64::INFINITY;
    for (v, bucket) in index.by_bucket(ord.rank()).iter().enumerate() {
        if ord.b_of(v) <= 0.0 {
            continue;
        }
        for &i in bucket {
            best = best.min(ord.b_of(v) * sampler.prob(&index.all[i].0)?);
        }
    }
    Ok(best)
}

/// Exact-cut counterpart of the epsilon-uniform sampler: exact growing and
/// exact probabilities on an approximate order, with the acceptance
/// `min(1, β k^(-c1 k) / (Z p(v) p(S)))`. A test instrument.
pub struct UgsCompare<'a> {
    inner: UgsSampler<'a>,
    scale: f64,
}

impl<'a> UgsCompare<'a> {
    /// `ord` must carry sorted adjacency (see `DdOrder::with_sorted_view`).
    pub fn new(g: &'a Graph, ord: &'a DdOrder, beta: f64, c1: f64) -> Result<Self> {
        let k = ord.k() as f64;
        Ok(UgsCompare { inner: UgsSampler::new(g, ord)?, scale: beta * k.powf(-c1 * k) })
    }

    fn acceptance(&self, v: Vertex, p: f64) -> f64 {
        let ord = self.inner.order();
        (self.scale / (ord.z() * ord.p(v) * p)).min(1.0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Graphlet> {
        let ord = self.inner.order();
        loop {
            let v = ord.draw_bucket(rng)?;
            let t = self.inner.rand_grow(v, rng)?;
            let p = self.inner.prob(&t.vertices)?;
            if rng.random::<f64>() < self.acceptance(v, p) {
                return Ok(t.graphlet());
            }
        }
    }

    pub fn sample_many(&self, count: usize, seed: u64) -> Result<Vec<Graphlet>> {
        (0..count).map(|i| self.sample(&mut rng::stream(seed, i as u64))).collect()
    }

    /// Exact output law over `index`.
    pub fn law(&self, index: &GraphletIndex) -> Result<Vec<f64>> {
        let ord = self.inner.order();
        let mut law = vec![0.0; index.len()];
        for (v, bucket) in index.by_bucket(ord.rank()).iter().enumerate() {
            if ord.b_of(v) <= 0.0 {
                continue;
            }
            for &i in bucket {
                let p = self.inner.prob(&index.all[i].0)?;
                law[i] = ord.p(v) * p * self.acceptance(v, p);
            }
        }
        let total: f64 = law.iter().sum();
        law.iter_mut().for_each(|x| *x /= total);
        Ok(law)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd_order::{compute_apx_dd, compute_dd};
    use crate::graph::generators::*;

    #[test]
    fn tv_basics() {
        assert_eq!(tv_distance(&uniform_law(4), &uniform_law(4)), 0.0);
        assert_eq!(tv_distance(&[1.0, 0.0], &[0.0, 1.0]), 1.0);
    }

    #[test]
    fn star_bucket_law() {
        let g = star(3);
        let ord = compute_dd(&g, 3).unwrap();
        let s = UgsSampler::new(&g, &ord).unwrap();
        let idx = enumerate_graphlets(&g, 3).unwrap();
        let law = exact_sampling_law(&s, &idx, 0).unwrap();
        assert_eq!(law.len(), 3);
        for (_, p) in law {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn compare_harness_is_uniform_on_covered_buckets() {
        let g = erdos_renyi(25, 0.25, 8);
        let apx = compute_apx_dd(&g, 3, 0.25, 2).unwrap().with_sorted_view(&g);
        let idx = enumerate_graphlets(&g, 3).unwrap();
        let mass = min_bucket_mass(&g, &apx).unwrap();
        // Scale at or below the smallest mass: nothing is clamped.
        let c1 = ((0.25 / mass).ln() / (3.0 * 3f64.ln())).max(0.0);
        let cmp = UgsCompare::new(&g, &apx, 0.25, c1).unwrap();
        let law = cmp.law(&idx).unwrap();
        let covered: Vec<usize> = idx
            .by_bucket(apx.rank())
            .iter()
            .enumerate()
            .filter(|(v, _)| apx.b_of(*v) > 0.0)
            .flat_map(|(_, b)| b.clone())
            .collect();
        for &i in &covered {
            assert!((law[i] - 1.0 / covered.len() as f64).abs() < 1e-12);
        }
    }
}
