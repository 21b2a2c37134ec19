//! Exact uniform graphlet sampling: the random growing process inside a
//! bucket, the exact probability of each of its outcomes, and rejection.

use rand::Rng;
use serde::Serialize;

use crate::dd_order::{DdOrder, SortedAdjacency};
use crate::error::{Error, Result};
use crate::graph::{Graph, Graphlet, Probe, Vertex};
use crate::rng;

/// Largest k accepted without an explicit override; probability evaluation
/// enumerates up to (k-1)! vertex orderings.
pub const DEFAULT_MAX_K: usize = 10;

/// Hard ceiling from the 16-bit subset masks used by probability evaluation.
pub const HARD_MAX_K: usize = 15;

/// One run of the growing process; `vertices` is in insertion order.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowTrace {
    pub root: Vertex,
    pub vertices: Vec<Vertex>,
    pub steps: Vec<GrowStep>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowStep {
    /// Vertex of the current set whose cut edge was taken.
    pub from: Vertex,
    /// Newly added vertex.
    pub added: Vertex,
    /// Cut size of each member of the current set, in insertion order.
    pub cuts: Vec<u64>,
    pub total_cut: u64,
}

impl GrowTrace {
    pub fn graphlet(&self) -> Graphlet {
        Graphlet::from_unsorted(self.vertices.clone())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SampleStats {
    pub samples: u64,
    pub trials: u64,
}

impl SampleStats {
    pub fn merge(self, other: SampleStats) -> SampleStats {
        SampleStats { samples: self.samples + other.samples, trials: self.trials + other.trials }
    }

    pub fn trials_per_sample(&self) -> f64 {
        self.trials as f64 / self.samples as f64
    }
}

/// Uniform sampler over the k-graphlets of a graph, given an order with
/// order-sorted adjacency.
#[derive(Clone)]
pub struct UgsSampler<'a> {
    probe: Probe<'a>,
    ord: &'a DdOrder,
    sorted: &'a SortedAdjacency,
    k: usize,
    beta_k: f64,
    factorial_k: f64,
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

impl<'a> UgsSampler<'a> {
    pub fn new(g: &'a Graph, ord: &'a DdOrder) -> Result<Self> {
        Self::with_probe(g.probe(), ord, DEFAULT_MAX_K)
    }

    /// `max_k` lifts the default cap up to [`HARD_MAX_K`]; cost grows like
    /// (k-1)! per trial.
    pub fn with_probe(probe: Probe<'a>, ord: &'a DdOrder, max_k: usize) -> Result<Self> {
        let k = ord.k();
        if k > max_k.min(HARD_MAX_K) {
            return Err(Error::Unsupported(format!("k = {k} exceeds the configured maximum {}", max_k.min(HARD_MAX_K))));
        }
        if ord.n() != probe.graph().n() {
            return Err(Error::Usage("order and graph sizes differ".into()));
        }
        let sorted = ord
            .sorted_adj()
            .ok_or_else(|| Error::Unsupported("exact sampling needs order-sorted adjacency".into()))?;
        let z = ord.z();
        let beta_k = if z > 0.0 { 1.0 / (factorial(k) * z) } else { 0.0 };
        Ok(UgsSampler { probe, ord, sorted, k, beta_k, factorial_k: factorial(k) })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn order(&self) -> &'a DdOrder {
        self.ord
    }

    /// `1 / (k! Z)`.
    pub fn beta_k(&self) -> f64 {
        self.beta_k
    }

    pub fn graph(&self) -> &'a Graph {
        self.probe.graph()
    }

    /// `d(u|G(v))`.
    #[inline]
    fn deg_in(&self, u: Vertex, v: Vertex) -> usize {
        self.probe.ledger().charge_degree(1);
        self.sorted.tail(self.ord.rank(), u, v).len()
    }

    /// Grows `{v}` to k vertices inside `G(v)`, each step taking a uniform
    /// random edge of the cut between the current set and the rest of `G(v)`.
    pub fn rand_grow<R: Rng + ?Sized>(&self, v: Vertex, rng: &mut R) -> Result<GrowTrace> {
        if v >= self.ord.n() || self.ord.b_of(v) <= 0.0 {
            return Err(Error::Usage(format!("vertex {v} has an empty bucket")));
        }
        let rank = self.ord.rank();
        let mut set = Vec::with_capacity(self.k);
        set.push(v);
        let mut steps = Vec::with_capacity(self.k - 1);
        let d_root = self.deg_in(v, v) as u64;
        for i in 1..self.k {
            let cuts: Vec<u64> = set
                .iter()
                .map(|&u| {
                    let inside = set.iter().filter(|&&s| self.probe.pair(u, s)).count();
                    (self.deg_in(u, v) - inside) as u64
                })
                .collect();
            let total: u64 = cuts.iter().sum();
            assert!(total > 0, "empty cut inside a nonempty bucket");
            if self.ord.is_exact() {
                debug_assert!(d_root <= i as u64 * total && total <= i as u64 * d_root);
            }
            let mut r = rng.random_range(0..total);
            let mut pick = 0;
            while r >= cuts[pick] {
                r -= cuts[pick];
                pick += 1;
            }
            let from = set[pick];
            let added = self.nth_outside(from, v, &set, r as usize, rank);
            steps.push(GrowStep { from, added, cuts, total_cut: total });
            set.push(added);
        }
        Ok(GrowTrace { root: v, vertices: set, steps })
    }

    /// The `j`-th (0-based) neighbor of `u` in `G(v)` outside `set`, skipping
    /// the at most k members of `set` in the sorted tail.
    fn nth_outside(&self, u: Vertex, v: Vertex, set: &[Vertex], mut j: usize, rank: &[usize]) -> Vertex {
        let tail = self.sorted.tail(rank, u, v);
        let mut skips: Vec<usize> = set
            .iter()
            .filter(|&&s| rank[s] >= rank[v] && s != u)
            .filter_map(|&s| {
                let pos = tail.partition_point(|&w| rank[w] < rank[s]);
                (pos < tail.len() && tail[pos] == s).then_some(pos)
            })
            .collect();
        skips.sort_unstable();
        for p in skips {
            if p <= j {
                j += 1;
            }
        }
        self.probe.ledger().charge_neighbor(1);
        tail[j]
    }

    /// Exact probability that the growing process at the ≺-minimum of `set`
    /// returns `set`: a sum over insertion orders of products of
    /// (edges into the next vertex) / (current cut size).
    pub fn prob(&self, set: &[Vertex]) -> Result<f64> {
        let k = set.len();
        if k != self.k {
            return Err(Error::Usage(format!("expected {} vertices, got {k}", self.k)));
        }
        let rank = self.ord.rank();
        let root_pos = (0..k).min_by_key(|&i| rank[set[i]]).unwrap();
        let root = set[root_pos];
        if self.ord.b_of(root) <= 0.0 {
            return Err(Error::Usage(format!("bucket of {root} is empty")));
        }
        let mut nbr = [0u16; 16];
        for a in 0..k {
            for b in (a + 1)..k {
                if set[a] == set[b] {
                    return Err(Error::Usage("repeated vertex".into()));
                }
                if self.probe.pair(set[a], set[b]) {
                    nbr[a] |= 1 << b;
                    nbr[b] |= 1 << a;
                }
            }
        }
        if !mask_connected(&nbr[..k], root_pos) {
            return Err(Error::Usage("vertex set is not connected".into()));
        }
        let deg: Vec<i64> = set.iter().map(|&u| self.deg_in(u, root) as i64).collect();
        let mut acc = Kahan::default();
        self.prob_dfs(&nbr[..k], &deg, 1 << root_pos, 1.0, &mut acc);
        Ok(acc.sum)
    }

    fn prob_dfs(&self, nbr: &[u16], deg: &[i64], mask: u16, weight: f64, acc: &mut Kahan) {
        let k = nbr.len();
        if mask.count_ones() as usize == k {
            acc.add(weight);
            return;
        }
        let mut cut = 0i64;
        for i in 0..k {
            if mask >> i & 1 == 1 {
                cut += deg[i] - (nbr[i] & mask).count_ones() as i64;
            }
        }
        for j in 0..k {
            if mask >> j & 1 == 1 {
                continue;
            }
            let into = (nbr[j] & mask).count_ones();
            if into == 0 {
                continue;
            }
            self.prob_dfs(nbr, deg, mask | 1 << j, weight * into as f64 / cut as f64, acc);
        }
    }

    /// `β_k / (p(v) p(S))`, the acceptance probability of a trial.
    pub fn acceptance(&self, v: Vertex, p_set: f64) -> f64 {
        self.beta_k / (self.ord.p(v) * p_set)
    }

    /// One rejection trial: `Some(graphlet)` when accepted.
    pub fn trial<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Option<Graphlet>> {
        let v = self.ord.draw_bucket(rng)?;
        let trace = self.rand_grow(v, rng)?;
        let p = self.prob(&trace.vertices)?;
        let acc = self.acceptance(v, p);
        debug_assert!(acc > 0.0 && acc <= 1.0 + 1e-9, "acceptance {acc} out of range");
        Ok((rng.random::<f64>() < acc).then(|| trace.graphlet()))
    }

    /// Draws one uniformly random k-graphlet; also returns the trial count.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(Graphlet, u64)> {
        let mut trials = 0;
        loop {
            trials += 1;
            if let Some(g) = self.trial(rng)? {
                return Ok((g, trials));
            }
        }
    }

    /// `count` independent samples; sample `i` uses stream `i` of `seed`.
    pub fn sample_many(&self, count: usize, seed: u64, jobs: usize) -> Result<(Vec<Graphlet>, SampleStats)> {
        let runs = crate::par_indexed(count, jobs, |i| self.sample_uniform(&mut rng::stream(seed, i as u64)))?;
        let mut stats = SampleStats::default();
        let mut out = Vec::with_capacity(count);
        for (g, t) in runs {
            stats = stats.merge(SampleStats { samples: 1, trials: t });
            out.push(g);
        }
        Ok((out, stats))
    }

    pub fn factorial_k(&self) -> f64 {
        self.factorial_k
    }
}

/// Whether the graph on `nbr.len()` vertices given by neighbor bitmasks is
/// connected.
pub(crate) fn mask_connected(nbr: &[u16], start: usize) -> bool {
    let full: u16 = ((1u32 << nbr.len()) - 1) as u16;
    let mut reach = 1u16 << start;
    loop {
        let next = (0..nbr.len()).filter(|&i| reach >> i & 1 == 1).fold(reach, |acc, i| acc | nbr[i]);
        if next == reach {
            return reach == full;
        }
        reach = next;
    }
}

/// Compensated summation.
#[derive(Default)]
pub(crate) struct Kahan {
    pub sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd_order::compute_dd;
    use crate::graph::generators::*;
    use crate::oracle::enumerate_graphlets;

    #[test]
    fn triangle_probabilities() {
        let g = clique(3);
        let ord = compute_dd(&g, 3).unwrap();
        let s = UgsSampler::new(&g, &ord).unwrap();
        assert!((s.prob(&[0, 1, 2]).unwrap() - 1.0).abs() < 1e-15);
        let trace = s.rand_grow(0, &mut rng::master(3)).unwrap();
        assert_eq!(trace.graphlet(), Graphlet(vec![0, 1, 2]));
    }

    #[test]
    fn star_probabilities() {
        let g = star(3);
        let ord = compute_dd(&g, 3).unwrap();
        let s = UgsSampler::new(&g, &ord).unwrap();
        for set in [[0, 1, 2], [0, 1, 3], [0, 2, 3]] {
            assert!((s.prob(&set).unwrap() - 1.0 / 3.0).abs() < 1e-15);
            assert!((s.acceptance(0, 1.0 / 3.0) - 1.0 / 18.0).abs() < 1e-15);
        }
        assert!((s.beta_k() - 1.0 / 54.0).abs() < 1e-15);
    }

    #[test]
    fn p3_middle_returns_whole_path() {
        let g = path(3);
        let ord = compute_dd(&g, 3).unwrap();
        let s = UgsSampler::new(&g, &ord).unwrap();
        let mut r = rng::master(1);
        for _ in 0..20 {
            assert_eq!(s.rand_grow(1, &mut r).unwrap().graphlet(), Graphlet(vec![0, 1, 2]));
        }
        assert!(matches!(s.rand_grow(0, &mut r), Err(Error::Usage(_))));
    }

    #[test]
    fn prob_rejects_bad_sets() {
        let g = path(4);
        let ord = compute_dd(&g, 3).unwrap();
        let s = UgsSampler::new(&g, &ord).unwrap();
        assert!(s.prob(&[0, 1, 3]).is_err());
        assert!(s.prob(&[0, 1]).is_err());
        // From vertex 1: take 0 first (1/2), or 2 first then 0 (1/4).
        assert!((s.prob(&[0, 1, 2]).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn empty_instance() {
        let g = empty(5);
        let ord = compute_dd(&g, 3).unwrap();
        let s = UgsSampler::new(&g, &ord).unwrap();
        assert!(matches!(s.sample_uniform(&mut rng::master(0)), Err(Error::EmptyInstance(_))));
    }

    #[test]
    fn sampling_is_reproducible_across_jobs() {
        let g = erdos_renyi(20, 0.3, 4);
        let ord = compute_dd(&g, 3).unwrap();
        let s = UgsSampler::new(&g, &ord).unwrap();
        let (a, _) = s.sample_many(200, 9, 1).unwrap();
        let (b, _) = s.sample_many(200, 9, 3).unwrap();
        assert_eq!(a, b);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(40))]

            #[test]
            fn bucket_laws(n in 2usize..14, p in 0.15f64..0.9, seed in any::<u64>(), k in 2usize..6) {
                let g = erdos_renyi(n, p, seed);
                let ord = compute_dd(&g, k).unwrap();
                let s = UgsSampler::new(&g, &ord).unwrap();
                let idx = enumerate_graphlets(&g, k).unwrap();
                let fact = |m: usize| (1..=m).map(|i| i as f64).product::<f64>();
                let da = ord.deg_after_all().unwrap();
                for (v, bucket) in idx.by_bucket(ord.rank()).iter().enumerate() {
                    if bucket.is_empty() { continue; }
                    let mut total = 0.0;
                    let mut expectation = 0.0;
                    let dv = (da[v] as f64).powi(k as i32 - 1);
                    for &i in bucket {
                        let q = s.prob(&idx.all[i].0).unwrap();
                        total += q;
                        expectation += q * (1.0 / q);
                        prop_assert!(q >= 1.0 / (fact(k - 1) * dv) - 1e-12);
                        prop_assert!(q <= fact(k - 1).powi(3) / dv + 1e-12);
                        let acc = s.acceptance(v, q);
                        prop_assert!(acc > 0.0 && acc <= 1.0 + 1e-12);
                        prop_assert!(1.0 / q <= fact(k - 1) * dv + 1e-9);
                    }
                    prop_assert!((total - 1.0).abs() < 1e-9);
                    prop_assert!((expectation - bucket.len() as f64).abs() < 1e-9 * bucket.len() as f64);
                }
            }

            #[test]
            fn traces_respect_cut_bounds(n in 3usize..16, p in 0.2f64..0.9, seed in any::<u64>(), k in 2usize..6) {
                let g = erdos_renyi(n, p, seed);
                let ord = compute_dd(&g, k).unwrap();
                let s = UgsSampler::new(&g, &ord).unwrap();
                let mut r = rng::master(seed);
                for v in ord.nonempty_buckets().collect::<Vec<_>>() {
                    let d = ord.deg_after(v, v).unwrap() as u64;
                    for _ in 0..5 {
                        let t = s.rand_grow(v, &mut r).unwrap();
                        prop_assert!(g.induces_connected(&t.vertices));
                        prop_assert!(t.vertices.iter().all(|&u| ord.rank_of(u) >= ord.rank_of(v)));
                        for (i, step) in t.steps.iter().enumerate() {
                            let i = i as u64 + 1;
                            prop_assert_eq!(step.cuts.iter().sum::<u64>(), step.total_cut);
                            prop_assert!(d <= i * step.total_cut && step.total_cut <= i * d);
                        }
                    }
                }
            }
        }
    }
}
