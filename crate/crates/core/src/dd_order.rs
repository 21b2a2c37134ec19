//! Degree-dominating vertex orders: the exact order obtained by repeatedly
//! peeling a maximum-degree vertex, and the sampled approximate order that
//! only looks at O(n log n) neighbor entries.
//!
//! For an order ≺ write `G(v)` for the subgraph induced by `v` and its
//! successors, and `B(v)` for the graphlets whose ≺-minimum is `v`.

use std::cmp::Reverse;
use std::collections::BTreeSet;

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Probe, Vertex};
use crate::rng;

const SIDECAR_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OrderMode {
    Exact,
    Approximate { beta: f64, seed: u64 },
}

/// Adjacency lists re-sorted by position in an order.
#[derive(Clone, Debug)]
pub struct SortedAdjacency {
    offsets: Vec<usize>,
    targets: Vec<Vertex>,
}

impl SortedAdjacency {
    pub fn build(g: &Graph, rank: &[usize]) -> SortedAdjacency {
        let mut offsets = Vec::with_capacity(g.n() + 1);
        let mut targets = Vec::with_capacity(2 * g.m());
        offsets.push(0);
        for u in 0..g.n() {
            let start = targets.len();
            targets.extend_from_slice(g.adj(u));
            targets[start..].sort_unstable_by_key(|&w| rank[w]);
            offsets.push(targets.len());
        }
        SortedAdjacency { offsets, targets }
    }

    #[inline]
    pub fn list(&self, u: Vertex) -> &[Vertex] {
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    /// Neighbors `w` of `u` with `w ⪰ v`, in order.
    #[inline]
    pub fn tail<'a>(&'a self, rank: &[usize], u: Vertex, v: Vertex) -> &'a [Vertex] {
        let list = self.list(u);
        let rv = rank[v];
        &list[list.partition_point(|&w| rank[w] < rv)..]
    }
}

/// A vertex order with bucket weights `b_v`, their total `Z`, and an O(1)
/// sampler over the nonempty buckets.
#[derive(Clone, Debug)]
pub struct DdOrder {
    k: usize,
    mode: OrderMode,
    rank: Vec<usize>,
    order: Vec<Vertex>,
    b: Vec<f64>,
    z: f64,
    sorted_adj: Option<SortedAdjacency>,
    deg_after: Option<Vec<usize>>,
    sampler: Option<(WeightedAliasIndex<f64>, Vec<Vertex>)>,
}

impl DdOrder {
    fn assemble(
        k: usize,
        mode: OrderMode,
        rank: Vec<usize>,
        b: Vec<f64>,
        sorted_adj: Option<SortedAdjacency>,
        deg_after: Option<Vec<usize>>,
    ) -> DdOrder {
        let mut order = vec![0; rank.len()];
        for (v, &r) in rank.iter().enumerate() {
            order[r] = v;
        }
        let z = b.iter().sum();
        let support: Vec<Vertex> = (0..b.len()).filter(|&v| b[v] > 0.0).collect();
        let sampler = if support.is_empty() {
            None
        } else {
            let weights: Vec<f64> = support.iter().map(|&v| b[v]).collect();
            Some((WeightedAliasIndex::new(weights).expect("positive finite weights"), support))
        };
        DdOrder { k, mode, rank, order, b, z, sorted_adj, deg_after, sampler }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mode(&self) -> OrderMode {
        self.mode
    }

    pub fn is_exact(&self) -> bool {
        self.mode == OrderMode::Exact
    }

    pub fn n(&self) -> usize {
        self.rank.len()
    }

    pub fn rank(&self) -> &[usize] {
        &self.rank
    }

    pub fn rank_of(&self, v: Vertex) -> usize {
        self.rank[v]
    }

    /// Vertices from first to last.
    pub fn order(&self) -> &[Vertex] {
        &self.order
    }

    /// `u ≺ v`.
    #[inline]
    pub fn precedes(&self, u: Vertex, v: Vertex) -> bool {
        self.rank[u] < self.rank[v]
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn b_of(&self, v: Vertex) -> f64 {
        self.b[v]
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    /// Probability `b_v / Z` of drawing bucket `v`.
    pub fn p(&self, v: Vertex) -> f64 {
        self.b[v] / self.z
    }

    pub fn nonempty_buckets(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.n()).filter(move |&v| self.b[v] > 0.0)
    }

    pub fn is_empty_instance(&self) -> bool {
        self.sampler.is_none()
    }

    pub fn sorted_adj(&self) -> Option<&SortedAdjacency> {
        self.sorted_adj.as_ref()
    }

    /// `d(v|G(v))` for every `v` (present when adjacency is sorted).
    pub fn deg_after_all(&self) -> Option<&[usize]> {
        self.deg_after.as_deref()
    }

    /// Draws `v` with probability `b_v / Z`.
    pub fn draw_bucket<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vertex> {
        let (alias, support) = self.sampler.as_ref().ok_or_else(|| {
            Error::EmptyInstance(format!("no {}-graphlet: all bucket weights are zero", self.k))
        })?;
        Ok(support[alias.sample(rng)])
    }

    /// `d(u|G(v))`: neighbors `w` of `u` with `w ⪰ v`, by binary search on
    /// the order-sorted adjacency. Requires `u ⪰ v`.
    pub fn deg_after(&self, u: Vertex, v: Vertex) -> Result<usize> {
        let sorted = self.sorted_adj.as_ref().ok_or_else(|| {
            Error::Unsupported("deg_after needs order-sorted adjacency, which approximate orders do not build".into())
        })?;
        if u >= self.n() || v >= self.n() {
            return Err(Error::Usage(format!("vertex out of range (n = {})", self.n())));
        }
        if self.rank[u] < self.rank[v] {
            return Err(Error::Usage(format!("deg_after({u}, {v}) requires {u} to not precede {v}")));
        }
        Ok(sorted.tail(&self.rank, u, v).len())
    }

    /// Copy of this order with order-sorted adjacency and `d(v|G(v))`
    /// attached, so the exact growing process can run on it.
    pub fn with_sorted_view(&self, g: &Graph) -> DdOrder {
        let sorted = SortedAdjacency::build(g, &self.rank);
        let deg_after = (0..g.n()).map(|v| sorted.tail(&self.rank, v, v).len()).collect();
        DdOrder { sorted_adj: Some(sorted), deg_after: Some(deg_after), ..self.clone() }
    }

    pub fn to_sidecar(&self) -> OrderSidecar {
        let (mode, beta, seed) = match self.mode {
            OrderMode::Exact => ("exact".to_string(), None, None),
            OrderMode::Approximate { beta, seed } => ("approximate".to_string(), Some(beta), Some(seed)),
        };
        OrderSidecar {
            version: SIDECAR_VERSION,
            k: self.k,
            mode,
            seed,
            beta,
            n: self.n(),
            rank: self.rank.clone(),
            b: self.b.clone(),
            z: self.z,
        }
    }

    /// Rebuilds an order from a sidecar. Exact orders get their sorted
    /// adjacency rebuilt from `g`.
    pub fn from_sidecar(g: &Graph, car: &OrderSidecar) -> Result<DdOrder> {
        if car.version != SIDECAR_VERSION {
            return Err(Error::Usage(format!("order cache version {} not supported", car.version)));
        }
        if car.n != g.n() || car.rank.len() != g.n() || car.b.len() != g.n() {
            return Err(Error::Usage(format!(
                "order cache is for n = {}, graph has n = {}",
                car.n,
                g.n()
            )));
        }
        let mut seen = vec![false; car.n];
        for &r in &car.rank {
            if r >= car.n || std::mem::replace(&mut seen[r], true) {
                return Err(Error::Usage("order cache rank is not a permutation".into()));
            }
        }
        let mode = match (car.mode.as_str(), car.beta, car.seed) {
            ("exact", _, _) => OrderMode::Exact,
            ("approximate", Some(beta), Some(seed)) => OrderMode::Approximate { beta, seed },
            _ => return Err(Error::Usage(format!("bad order cache mode '{}'", car.mode))),
        };
        let ord = DdOrder::assemble(car.k, mode, car.rank.clone(), car.b.clone(), None, None);
        Ok(if mode == OrderMode::Exact { ord.with_sorted_view(g) } else { ord })
    }
}

/// On-disk form of a [`DdOrder`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderSidecar {
    pub version: u32,
    pub k: usize,
    pub mode: String,
    pub seed: Option<u64>,
    pub beta: Option<f64>,
    pub n: usize,
    pub rank: Vec<usize>,
    pub b: Vec<f64>,
    pub z: f64,
}

fn check_k(g: &Graph, k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::Usage(format!("k must be at least 2, got {k}")));
    }
    if g.n() == 0 {
        return Err(Error::EmptyInstance("graph has no vertices".into()));
    }
    Ok(())
}

/// Whether `v` reaches at least `k - 1` other vertices in `G(v)`, by a BFS
/// over the order-sorted tails that stops as soon as `k` vertices are seen.
fn bucket_nonempty_sorted(probe: &Probe, sorted: &SortedAdjacency, rank: &[usize], v: Vertex, k: usize) -> bool {
    let mut seen = Vec::with_capacity(k);
    seen.push(v);
    let mut head = 0;
    while head < seen.len() {
        let u = seen[head];
        head += 1;
        for &w in sorted.tail(rank, u, v) {
            probe.ledger().charge_neighbor(1);
            if w != v && !seen.contains(&w) {
                seen.push(w);
                if seen.len() >= k {
                    return true;
                }
            }
        }
    }
    false
}

/// Exact degree-dominating order: repeatedly remove a vertex of maximum
/// remaining degree, smallest id first among ties. `b_v = d(v|G(v))^(k-1)`
/// when `B(v)` is nonempty and 0 otherwise.
pub fn compute_dd(g: &Graph, k: usize) -> Result<DdOrder> {
    compute_dd_with(g.probe(), k)
}

pub fn compute_dd_with(probe: Probe<'_>, k: usize) -> Result<DdOrder> {
    let g = probe.graph();
    check_k(g, k)?;
    let n = g.n();
    let mut cur: Vec<usize> = (0..n).map(|v| probe.degree(v)).collect();
    let mut queue: BTreeSet<(Reverse<usize>, Vertex)> = (0..n).map(|v| (Reverse(cur[v]), v)).collect();
    let mut removed = vec![false; n];
    let mut rank = vec![0; n];
    let mut deg_after = vec![0; n];
    let mut pos = 0;
    while let Some((_, v)) = queue.pop_first() {
        rank[v] = pos;
        pos += 1;
        deg_after[v] = cur[v];
        removed[v] = true;
        probe.ledger().charge_neighbor(g.deg(v) as u64);
        for &w in g.adj(v) {
            if !removed[w] {
                queue.remove(&(Reverse(cur[w]), w));
                cur[w] -= 1;
                queue.insert((Reverse(cur[w]), w));
            }
        }
    }
    let sorted = SortedAdjacency::build(g, &rank);
    let b = (0..n)
        .map(|v| {
            if bucket_nonempty_sorted(&probe, &sorted, &rank, v, k) {
                (deg_after[v] as f64).powi(k as i32 - 1)
            } else {
                0.0
            }
        })
        .collect();
    Ok(DdOrder::assemble(k, OrderMode::Exact, rank, b, Some(sorted), Some(deg_after)))
}

/// Parameters of the approximate order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ApxDdParams {
    pub k: usize,
    pub beta: f64,
    /// `η = β^(1/(k-1)) / (6k²)`.
    pub eta: f64,
    /// `α = η / k`.
    pub alpha: f64,
    /// Neighbor samples per vertex in the first pass.
    pub h: usize,
    pub h_const: f64,
}

impl ApxDdParams {
    pub const DEFAULT_H_CONST: f64 = 8.0;

    pub fn new(n: usize, k: usize, beta: f64) -> ApxDdParams {
        Self::with_h_const(n, k, beta, Self::DEFAULT_H_CONST)
    }

    /// `h = ⌈h_const · η⁻² · ln(n + 1)⌉`.
    pub fn with_h_const(n: usize, k: usize, beta: f64, h_const: f64) -> ApxDdParams {
        let eta = beta.powf(1.0 / (k as f64 - 1.0)) / (6.0 * (k * k) as f64);
        let h = (h_const * ((n + 1) as f64).ln() / (eta * eta)).ceil().max(1.0) as usize;
        ApxDdParams { k, beta, eta, alpha: eta / k as f64, h, h_const }
    }

    /// Degree threshold `k/η` below which buckets are checked by BFS.
    pub fn small_degree(&self) -> f64 {
        self.k as f64 / self.eta
    }
}

/// Approximate degree-dominating order. The order is defined throughout by
/// `u ≺ v ⇔ s_u > s_v ∨ (s_u = s_v ∧ u > v)` and only materialized at the end.
pub fn compute_apx_dd(g: &Graph, k: usize, beta: f64, seed: u64) -> Result<DdOrder> {
    compute_apx_dd_with(g.probe(), ApxDdParams::new(g.n(), k, beta), seed)
}

pub fn compute_apx_dd_with(probe: Probe<'_>, params: ApxDdParams, seed: u64) -> Result<DdOrder> {
    let g = probe.graph();
    let k = params.k;
    check_k(g, k)?;
    if !(params.beta > 0.0 && params.beta < 1.0) {
        return Err(Error::Usage(format!("beta must lie in (0, 1), got {}", params.beta)));
    }
    let n = g.n();
    let mut rng = rng::master(seed);
    let ledger = probe.ledger();
    let deg: Vec<usize> = (0..n).map(|v| probe.degree(v)).collect();
    let mut s: Vec<f64> = deg.iter().map(|&d| d as f64).collect();
    let precedes = |s: &[f64], u: Vertex, v: Vertex| s[u] > s[v] || (s[u] == s[v] && u > v);

    // Nonincreasing degree; equal degrees in initial order (larger id first).
    let mut by_degree: Vec<Vertex> = (0..n).collect();
    by_degree.sort_unstable_by_key(|&v| (Reverse(deg[v]), Reverse(v)));

    let mut b = vec![0.0; n];
    let threshold = 2.0 * params.eta * params.h as f64;
    for &v in &by_degree {
        let d = deg[v];
        let mut hits = 0usize;
        if d > 0 {
            let adj = g.adj(v);
            for _ in 0..params.h {
                let x = adj[rng.random_range(0..d)];
                if precedes(&s, v, x) {
                    hits += 1;
                }
            }
            ledger.charge_neighbor(params.h as u64);
        }
        if hits as f64 >= threshold {
            b[v] = (d as f64).powi(k as i32 - 1);
        } else {
            b[v] = 0.0;
            s[v] = 3.0 * params.eta * d as f64;
        }
    }

    let small = params.small_degree();
    for v in 0..n {
        if deg[v] as f64 > small {
            continue;
        }
        let succ = |x: Vertex| precedes(&s, v, x);
        let mut d_after = 0;
        for i in 1..=deg[v] {
            if succ(probe.neighbor(v, i).expect("index within degree")) {
                d_after += 1;
            }
        }
        b[v] = if d_after > 0 && bucket_nonempty_scan(&probe, &deg, v, k, succ) {
            (d_after as f64).powi(k as i32 - 1)
        } else {
            0.0
        };
    }

    let mut order: Vec<Vertex> = (0..n).collect();
    order.sort_unstable_by(|&u, &v| {
        if precedes(&s, u, v) {
            std::cmp::Ordering::Less
        } else if precedes(&s, v, u) {
            std::cmp::Ordering::Greater
        } else {
            std::cmp::Ordering::Equal
        }
    });
    let mut rank = vec![0; n];
    for (r, &v) in order.iter().enumerate() {
        rank[v] = r;
    }
    let mode = OrderMode::Approximate { beta: params.beta, seed };
    Ok(DdOrder::assemble(k, mode, rank, b, None, None))
}

/// Truncated BFS over unsorted adjacency, with `succ` deciding membership in
/// `G(v)`.
fn bucket_nonempty_scan(probe: &Probe, deg: &[usize], v: Vertex, k: usize, succ: impl Fn(Vertex) -> bool) -> bool {
    let mut seen = Vec::with_capacity(k);
    seen.push(v);
    let mut head = 0;
    while head < seen.len() {
        let u = seen[head];
        head += 1;
        for i in 1..=deg[u] {
            let w = probe.neighbor(u, i).expect("index within degree");
            if w != v && succ(w) && !seen.contains(&w) {
                seen.push(w);
                if seen.len() >= k {
                    return true;
                }
            }
        }
    }
    false
}

/// Outcome of one property check, with a counterexample when it fails.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub pass: bool,
    pub witness: Option<String>,
}

impl PropertyCheck {
    fn ok() -> Self {
        PropertyCheck { pass: true, witness: None }
    }

    fn fail(&mut self, witness: String) {
        if self.pass {
            self.pass = false;
            self.witness = Some(witness);
        }
    }
}

/// Audit of an order against the four approximate degree-dominating
/// properties. The third property is reported in two halves: domination
/// `d(v|G(v)) ≥ α·d(u|G(v))` for `u ≻ v`, and the degree floor
/// `d(v|G(v)) ≥ α·d_v`; the exact peeling order satisfies the first with
/// `α = 1` but not in general the second.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AbOrderReport {
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
    pub covered_mass: u64,
    pub total_mass: u64,
    pub coverage: PropertyCheck,
    pub size_estimates: PropertyCheck,
    pub domination: PropertyCheck,
    pub degree_floor: PropertyCheck,
    pub degree_gap: PropertyCheck,
}

impl AbOrderReport {
    pub fn domination_property(&self) -> bool {
        self.domination.pass && self.degree_floor.pass
    }

    pub fn all_pass(&self) -> bool {
        self.coverage.pass && self.size_estimates.pass && self.domination_property() && self.degree_gap.pass
    }
}

/// Default exponent constant for the size-estimate property: `k^(Ck)`
/// with `C = 4` covers `(k-1)^(k-1)·α^-(k-1)·β` for every `k ≥ 3`.
pub const DEFAULT_SIZE_CONSTANT: f64 = 4.0;

/// Checks `ord` against the approximate degree-dominating properties using
/// exact bucket sizes. Oracle scale only.
pub fn check_ab_order(g: &Graph, k: usize, ord: &DdOrder, alpha: f64, beta: f64, c: f64) -> Result<AbOrderReport> {
    let sizes = crate::oracle::bucket_sizes(g, k, ord.rank())?;
    let n = g.n();
    let rank = ord.rank();
    let deg_in = |u: Vertex, v: Vertex| g.adj(u).iter().filter(|&&w| rank[w] >= rank[v]).count();

    let total: u64 = sizes.iter().sum();
    let covered: u64 = (0..n).filter(|&v| ord.b_of(v) > 0.0).map(|v| sizes[v]).sum();
    let mut coverage = PropertyCheck::ok();
    if (covered as f64) < (1.0 - beta) * total as f64 {
        coverage.fail(format!("nonempty buckets hold {covered} of {total} graphlets"));
    }

    let kf = k as f64;
    let lo = kf.powf(-c * kf) * beta;
    let hi = kf.powf(c * kf) / beta;
    let mut size_estimates = PropertyCheck::ok();
    let mut domination = PropertyCheck::ok();
    let mut degree_floor = PropertyCheck::ok();
    for v in 0..n {
        let bv = ord.b_of(v);
        if bv <= 0.0 {
            continue;
        }
        let ratio = bv / sizes[v] as f64;
        if !(lo..=hi).contains(&ratio) {
            size_estimates.fail(format!("v = {v}: b_v = {bv}, |B(v)| = {}", sizes[v]));
        }
        let dv = deg_in(v, v) as f64;
        if dv < alpha * g.deg(v) as f64 {
            degree_floor.fail(format!("v = {v}: d(v|G(v)) = {dv} < alpha * d_v = {}", alpha * g.deg(v) as f64));
        }
        for &u in &ord.order()[rank[v] + 1..] {
            let du = deg_in(u, v) as f64;
            if dv < alpha * du {
                domination.fail(format!("v = {v}, u = {u}: d(v|G(v)) = {dv} < alpha * d(u|G(v)) = {}", alpha * du));
                break;
            }
        }
    }

    let mut degree_gap = PropertyCheck::ok();
    let gap = 3.0 * kf * alpha;
    let mut later_max: Option<(Vertex, usize)> = None;
    for &v in ord.order().iter().rev() {
        if let Some((u, du)) = later_max {
            if (g.deg(v) as f64) < gap * du as f64 {
                degree_gap.fail(format!("{v} precedes {u} but d_{v} = {} < {gap} * {du}", g.deg(v)));
            }
        }
        if later_max.is_none_or(|(_, du)| g.deg(v) > du) {
            later_max = Some((v, g.deg(v)));
        }
    }

    Ok(AbOrderReport {
        alpha,
        beta,
        c,
        covered_mass: covered,
        total_mass: total,
        coverage,
        size_estimates,
        domination,
        degree_floor,
        degree_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generators::*;

    #[test]
    fn star_exact() {
        let g = star(3);
        let ord = compute_dd(&g, 3).unwrap();
        assert_eq!(ord.order(), &[0, 1, 2, 3]);
        assert_eq!(ord.b(), &[9.0, 0.0, 0.0, 0.0]);
        assert_eq!(ord.z(), 9.0);
        assert_eq!(ord.deg_after(0, 0).unwrap(), 3);
        assert_eq!(ord.deg_after(1, 1).unwrap(), 0);
    }

    #[test]
    fn triangle_exact() {
        let g = clique(3);
        let ord = compute_dd(&g, 3).unwrap();
        let first = ord.order()[0];
        assert_eq!(first, 0);
        assert_eq!(ord.b(), &[4.0, 0.0, 0.0]);
        assert_eq!(ord.z(), 4.0);
        assert_eq!(ord.deg_after(ord.order()[1], first).unwrap(), 2);
    }

    #[test]
    fn p4_exact() {
        let g = path(4);
        let ord = compute_dd(&g, 3).unwrap();
        assert_eq!(ord.order()[0], 1);
        assert_eq!(ord.b(), &[0.0, 4.0, 0.0, 0.0]);
        assert_eq!(ord.z(), 4.0);
    }

    #[test]
    fn empty_instance_refuses_to_sample() {
        let ord = compute_dd(&empty(5), 3).unwrap();
        assert_eq!(ord.z(), 0.0);
        assert!(matches!(ord.draw_bucket(&mut rng::master(0)), Err(Error::EmptyInstance(_))));
    }

    #[test]
    fn deg_after_on_apx_is_unsupported() {
        let g = star(3);
        let ord = compute_apx_dd(&g, 3, 0.5, 1).unwrap();
        assert!(matches!(ord.deg_after(0, 0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn apx_star_matches_exact() {
        let g = star(3);
        let apx = compute_apx_dd(&g, 3, 0.5, 11).unwrap();
        let exact = compute_dd(&g, 3).unwrap();
        assert_eq!(apx.b(), exact.b());
        assert_eq!(apx.order()[0], 0);
    }

    #[test]
    fn apx_is_deterministic() {
        let g = erdos_renyi(40, 0.2, 5);
        let a = compute_apx_dd(&g, 3, 0.25, 99).unwrap();
        let b = compute_apx_dd(&g, 3, 0.25, 99).unwrap();
        assert_eq!(a.rank(), b.rank());
        assert_eq!(a.b(), b.b());
        assert_eq!(a.z(), b.z());
    }

    #[test]
    fn sidecar_round_trip() {
        let g = erdos_renyi(20, 0.3, 2);
        for ord in [compute_dd(&g, 3).unwrap(), compute_apx_dd(&g, 3, 0.5, 4).unwrap()] {
            let text = serde_json::to_string(&ord.to_sidecar()).unwrap();
            let car: OrderSidecar = serde_json::from_str(&text).unwrap();
            let back = DdOrder::from_sidecar(&g, &car).unwrap();
            assert_eq!(back.rank(), ord.rank());
            assert_eq!(back.b(), ord.b());
            assert_eq!(back.mode(), ord.mode());
            assert_eq!(back.deg_after_all(), ord.deg_after_all());
        }
        let other = path(3);
        let car = compute_dd(&g, 3).unwrap().to_sidecar();
        assert!(DdOrder::from_sidecar(&other, &car).is_err());
    }

    #[test]
    fn truncated_bfs_is_cheap() {
        // A clique: every bucket check stops after k pushes.
        let g = clique(30);
        let ord = compute_dd(&g, 4).unwrap();
        let sorted = ord.sorted_adj().unwrap();
        for v in 0..g.n() {
            let ledger = crate::graph::QueryLedger::new();
            let probe = g.probe_with(&ledger);
            bucket_nonempty_sorted(&probe, sorted, ord.rank(), v, 4);
            assert!(ledger.snapshot().neighbor_queries <= 16);
        }
    }

    #[test]
    fn exact_order_dominates() {
        for seed in 0..5 {
            let g = erdos_renyi(25, 0.25, seed);
            let ord = compute_dd(&g, 3).unwrap();
            let report = check_ab_order(&g, 3, &ord, 1.0, 0.0, DEFAULT_SIZE_CONSTANT).unwrap();
            assert!(report.domination.pass, "{report:?}");
            assert!(report.coverage.pass);
        }
    }

    #[test]
    fn swapped_star_fails_domination() {
        let g = star(3);
        // Leaf 1 first, then the center, with a positive weight on the leaf.
        let rank = vec![1, 0, 2, 3];
        let ord = DdOrder::assemble(3, OrderMode::Exact, rank, vec![9.0, 1.0, 0.0, 0.0], None, None);
        let report = check_ab_order(&g, 3, &ord, 1.0, 0.0, DEFAULT_SIZE_CONSTANT).unwrap();
        assert!(!report.domination.pass);
        assert!(report.domination.witness.as_deref().unwrap().contains("v = 1"));
    }

    #[test]
    fn k4_violates_degree_floor_for_exact_order() {
        // Exact peeling keeps domination but not the d_v floor at alpha = 1.
        let g = clique(4);
        let ord = compute_dd(&g, 3).unwrap();
        let report = check_ab_order(&g, 3, &ord, 1.0, 0.0, DEFAULT_SIZE_CONSTANT).unwrap();
        assert!(report.domination.pass);
        assert!(!report.degree_floor.pass);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn exact_order_invariants(n in 1usize..22, p in 0.05f64..0.9, seed in any::<u64>(), k in 2usize..5) {
                let g = erdos_renyi(n, p, seed);
                let ord = compute_dd(&g, k).unwrap();
                let mut seen = vec![false; n];
                for &r in ord.rank() { prop_assert!(!seen[r]); seen[r] = true; }
                let z: f64 = ord.b().iter().sum();
                prop_assert_eq!(z, ord.z());
                let sizes = crate::oracle::bucket_sizes(&g, k, ord.rank()).unwrap();
                let da = ord.deg_after_all().unwrap();
                for v in 0..n {
                    prop_assert_eq!(ord.b_of(v) > 0.0, sizes[v] > 0);
                    if sizes[v] > 0 {
                        prop_assert_eq!(ord.b_of(v), (da[v] as f64).powi(k as i32 - 1));
                        let b = ord.b_of(v);
                        let fact: f64 = (1..k).map(|i| i as f64).product();
                        let pw = ((k - 1) as f64).powi(k as i32 - 1);
                        prop_assert!(b / fact <= sizes[v] as f64 * pw + 1e-9);
                        prop_assert!(sizes[v] as f64 <= fact * b + 1e-9);
                    }
                    for &u in &ord.order()[ord.rank_of(v)..] {
                        prop_assert!(ord.deg_after(v, v).unwrap() >= ord.deg_after(u, v).unwrap());
                        let filtered = g.adj(u).iter().filter(|&&w| ord.rank_of(w) >= ord.rank_of(v)).count();
                        prop_assert_eq!(ord.deg_after(u, v).unwrap(), filtered);
                    }
                }
            }
        }
    }
}
