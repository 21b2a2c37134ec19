//! Graphlet counting: per-bucket sizes by inverse-probability weighting of
//! the growing process, class frequencies from uniform samples.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};
use crate::rng;
use crate::ugs::UgsSampler;

/// Largest k the isomorphism classifier handles (k! relabelings).
pub const MAX_CLASSIFY_K: usize = 8;

/// Canonical code of a small graph: the minimum, over all relabelings, of
/// its upper-triangle adjacency bits read as an integer with pair (0,1)
/// most significant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct IsoClassId {
    pub k: usize,
    pub code: u64,
}

impl IsoClassId {
    pub fn edge_count(&self) -> u32 {
        self.code.count_ones()
    }

    /// Common names for classes with at most four vertices.
    pub fn name(&self) -> Option<&'static str> {
        let (k, e) = (self.k, self.edge_count());
        Some(match (k, e) {
            (1, 0) => "vertex",
            (2, 1) => "edge",
            (3, 2) => "path",
            (3, 3) => "triangle",
            (4, 4) => {
                // Paw and 4-cycle both have four edges; the cycle has no
                // vertex of degree 3.
                if star_like(self.code, 4) {
                    "paw"
                } else {
                    "cycle"
                }
            }
            (4, 3) => {
                if star_like(self.code, 4) {
                    "star"
                } else {
                    "path"
                }
            }
            (4, 5) => "diamond",
            (4, 6) => "clique",
            _ => return None,
        })
    }
}

fn pair_bits(k: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for a in 0..k {
        for b in (a + 1)..k {
            pairs.push((a, b));
        }
    }
    pairs
}

fn bits_to_matrix(code: u64, k: usize) -> Vec<u16> {
    let pairs = pair_bits(k);
    let top = pairs.len();
    let mut nbr = vec![0u16; k];
    for (i, &(a, b)) in pairs.iter().enumerate() {
        if code >> (top - 1 - i) & 1 == 1 {
            nbr[a] |= 1 << b;
            nbr[b] |= 1 << a;
        }
    }
    nbr
}

fn star_like(code: u64, k: usize) -> bool {
    bits_to_matrix(code, k).iter().any(|m| m.count_ones() as usize == k - 1)
}

/// Classifies graphlets up to isomorphism, caching by raw adjacency bits.
#[derive(Default)]
pub struct IsoClassifier {
    cache: HashMap<(usize, u64), u64>,
    perms: HashMap<usize, Vec<Vec<u8>>>,
}

fn permutations(k: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur: Vec<u8> = (0..k as u8).collect();
    heap_permute(k, &mut cur, &mut out);
    out
}

fn heap_permute(n: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if n <= 1 {
        out.push(cur.clone());
        return;
    }
    for i in 0..n - 1 {
        heap_permute(n - 1, cur, out);
        if n.is_multiple_of(2) {
            cur.swap(i, n - 1);
        } else {
            cur.swap(0, n - 1);
        }
    }
    heap_permute(n - 1, cur, out);
}

impl IsoClassifier {
    pub fn new() -> Self {
        Self::default()
    }

    /// Raw upper-triangle bits of `G[vertices]` in the given vertex order.
    pub fn raw_code(g: &Graph, vertices: &[Vertex]) -> u64 {
        let mut code = 0u64;
        for (a, b) in pair_bits(vertices.len()) {
            code = code << 1 | g.has_edge(vertices[a], vertices[b]) as u64;
        }
        code
    }

    pub fn classify_iso(&mut self, g: &Graph, vertices: &[Vertex]) -> Result<IsoClassId> {
        let k = vertices.len();
        if k > MAX_CLASSIFY_K {
            return Err(Error::Unsupported(format!("isomorphism classes only for k <= {MAX_CLASSIFY_K}")));
        }
        let raw = Self::raw_code(g, vertices);
        Ok(IsoClassId { k, code: self.canonical(k, raw) })
    }

    pub fn canonical(&mut self, k: usize, raw: u64) -> u64 {
        if let Some(&c) = self.cache.get(&(k, raw)) {
            return c;
        }
        let nbr = bits_to_matrix(raw, k);
        let pairs = pair_bits(k);
        let perms = self.perms.entry(k).or_insert_with(|| permutations(k));
        let mut best = u64::MAX;
        for p in perms.iter() {
            let mut code = 0u64;
            for &(a, b) in &pairs {
                let bit = nbr[p[a] as usize] >> p[b] & 1;
                code = code << 1 | bit as u64;
            }
            best = best.min(code);
        }
        self.cache.insert((k, raw), best);
        best
    }
}

/// Estimated `|B(v)|`: mean of `1/p(S)` over `draws` runs of the growing
/// process at `v`.
pub fn estimate_bucket_size<R: Rng + ?Sized>(sampler: &UgsSampler, v: Vertex, draws: usize, rng: &mut R) -> Result<f64> {
    if sampler.order().b_of(v) <= 0.0 {
        return Err(Error::Usage(format!("bucket of {v} is empty")));
    }
    let mut sum = 0.0;
    for _ in 0..draws {
        let t = sampler.rand_grow(v, rng)?;
        sum += 1.0 / sampler.prob(&t.vertices)?;
    }
    Ok(sum / draws as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CountParams {
    pub eps0: f64,
    pub eps1: f64,
    pub delta: f64,
    /// Multiplier of the per-bucket draw count.
    pub draws_const: f64,
}

impl CountParams {
    pub fn new(eps0: f64, eps1: f64, delta: f64) -> CountParams {
        CountParams { eps0, eps1, delta, draws_const: 2.0 }
    }

    /// `⌈c (k-1)!² ε₀⁻² ln(2/δ_b)⌉` with `δ_b = δ/(2n)`.
    pub fn bucket_draws(&self, k: usize, n: usize) -> usize {
        let f: f64 = (1..k).map(|i| i as f64).product();
        let delta_b = self.delta / (2.0 * n as f64);
        (self.draws_const * f * f * (2.0 / delta_b).ln() / (self.eps0 * self.eps0)).ceil() as usize
    }

    /// `⌈(2/ε₁²) ln(2^(k²)/δ)⌉`.
    pub fn frequency_samples(&self, k: usize) -> usize {
        let ln = (k * k) as f64 * std::f64::consts::LN_2 - self.delta.ln();
        (2.0 / (self.eps1 * self.eps1) * ln).ceil() as usize
    }

    fn validate(&self) -> Result<()> {
        for (name, x) in [("eps0", self.eps0), ("eps1", self.eps1), ("delta", self.delta)] {
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::Usage(format!("{name} must lie in (0, 1), got {x}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassEstimate {
    pub code: u64,
    pub name: Option<&'static str>,
    pub edges: u32,
    pub f_hat: f64,
    #[serde(rename = "N_hat")]
    pub n_hat: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountReport {
    pub k: usize,
    pub seed: u64,
    pub eps0: f64,
    pub eps1: f64,
    pub delta: f64,
    #[serde(rename = "N_hat_k")]
    pub n_hat_k: f64,
    pub nonempty_buckets: usize,
    pub draws_per_bucket: usize,
    pub frequency_samples: usize,
    pub samples_used: u64,
    pub classes: Vec<ClassEstimate>,
}

impl CountReport {
    pub fn class(&self, code: u64) -> Option<&ClassEstimate> {
        self.classes.iter().find(|c| c.code == code)
    }
}

/// Estimates the total graphlet count and per-class counts.
pub fn estimate_counts(sampler: &UgsSampler, params: CountParams, seed: u64, jobs: usize) -> Result<CountReport> {
    params.validate()?;
    let ord = sampler.order();
    let k = sampler.k();
    let g = sampler.graph();
    let draws = params.bucket_draws(k, g.n());
    let fsamples = params.frequency_samples(k);
    let mut report = CountReport {
        k,
        seed,
        eps0: params.eps0,
        eps1: params.eps1,
        delta: params.delta,
        n_hat_k: 0.0,
        nonempty_buckets: 0,
        draws_per_bucket: draws,
        frequency_samples: fsamples,
        samples_used: 0,
        classes: Vec::new(),
    };
    if ord.is_empty_instance() {
        return Ok(report);
    }
    let buckets: Vec<Vertex> = ord.nonempty_buckets().collect();
    let sizes = crate::par_indexed(buckets.len(), jobs, |i| {
        let v = buckets[i];
        estimate_bucket_size(sampler, v, draws, &mut rng::stream(seed, v as u64))
    })?;
    report.n_hat_k = sizes.iter().sum();
    report.nonempty_buckets = buckets.len();

    let freq_seed = seed ^ 0x5851_f42d_4c95_7f2d;
    let (samples, stats) = sampler.sample_many(fsamples, freq_seed, jobs)?;
    let mut classifier = IsoClassifier::new();
    let mut tally: BTreeMap<u64, usize> = BTreeMap::new();
    for s in &samples {
        *tally.entry(classifier.classify_iso(g, &s.0)?.code).or_default() += 1;
    }
    report.samples_used = buckets.len() as u64 * draws as u64 + stats.trials;
    report.classes = tally
        .into_iter()
        .map(|(code, c)| {
            let f_hat = c as f64 / fsamples as f64;
            let id = IsoClassId { k, code };
            ClassEstimate { code, name: id.name(), edges: id.edge_count(), f_hat, n_hat: f_hat * report.n_hat_k }
        })
        .collect();
    Ok(report)
}
