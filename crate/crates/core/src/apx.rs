//! Epsilon-uniform sampling on an approximate order: cut sizes are estimated
//! from random neighbor samples instead of read off sorted adjacency.

use std::collections::HashMap;

use rand::Rng;
use serde::Serialize;

use crate::dd_order::{compute_apx_dd_with, ApxDdParams, DdOrder};
use crate::error::{Error, Result};
use crate::graph::{Graph, Graphlet, Probe, Vertex};
use crate::rng;

/// Default acceptance exponent. With it the acceptance expression stays at
/// most 1 whenever `β ≤ min b_v p(S)`, which holds for `β ≤ 1/(k-1)!` on
/// orders whose bucket sizes dominate the growing process; the sampler
/// counts clamped trials otherwise.
pub const DEFAULT_C1: f64 = 0.0;

/// Knobs of the epsilon-uniform sampler. Everything else is derived from
/// `eps` and `k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ApxUgsConfig {
    pub k: usize,
    pub eps: f64,
    /// Exponent in the `k^(-c1 k)` scaling of the acceptance probability.
    pub c1: f64,
    /// Exponent in `γ = ρ = ε³ k^(-c2 k)`.
    pub c2: f64,
    /// Constant of the neighbor sample count in the order construction.
    pub order_h_const: f64,
    /// Failure budget of probability estimation is `β / k^(fail_exponent k)`.
    pub fail_exponent: f64,
    /// When the prescribed sample count is at least `d_u`, count the cut of
    /// `u` by scanning its `d_u` neighbors instead of sampling.
    pub exact_scan: bool,
    /// Overrides the per-vertex sample count of cut estimation.
    pub cut_samples: Option<usize>,
}

impl ApxUgsConfig {
    pub fn new(k: usize, eps: f64) -> ApxUgsConfig {
        ApxUgsConfig {
            k,
            eps,
            c1: DEFAULT_C1,
            c2: 1.0,
            order_h_const: ApxDdParams::DEFAULT_H_CONST,
            fail_exponent: 2.0,
            exact_scan: true,
            cut_samples: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::Usage(format!("eps must lie in (0, 1], got {}", self.eps)));
        }
        if self.k < 2 {
            return Err(Error::Usage(format!("k must be at least 2, got {}", self.k)));
        }
        if self.k > crate::ugs::DEFAULT_MAX_K {
            return Err(Error::Unsupported(format!(
                "k = {} exceeds the maximum {}",
                self.k,
                crate::ugs::DEFAULT_MAX_K
            )));
        }
        Ok(())
    }

    fn kf(&self) -> f64 {
        self.k as f64
    }

    /// `β = ε / 2`.
    pub fn beta(&self) -> f64 {
        self.eps / 2.0
    }

    /// `α = β^(1/(k-1)) / (6k³)`.
    pub fn alpha(&self) -> f64 {
        self.beta().powf(1.0 / (self.kf() - 1.0)) / (6.0 * self.kf().powi(3))
    }

    /// `γ = ρ = ε³ k^(-c2 k)`.
    pub fn gamma(&self) -> f64 {
        self.eps.powi(3) * self.kf().powf(-self.c2 * self.kf())
    }

    pub fn rho(&self) -> f64 {
        self.gamma()
    }

    pub fn grow_delta(&self) -> f64 {
        self.gamma() / (50.0 * self.kf().powi(4))
    }

    pub fn prob_delta(&self) -> f64 {
        self.rho() / (50.0 * self.kf().powi(3))
    }

    /// Cap on neighbor draws when looking for a cut edge: `64 k ⌈1/(3kα²)⌉`.
    pub fn trial_cap(&self) -> u64 {
        let a = self.alpha();
        let per = (1.0 / (3.0 * self.kf() * a * a)).ceil();
        (64.0 * self.kf() * per).min(u64::MAX as f64 / 2.0) as u64
    }

    /// `β k^(-c1 k)`.
    pub fn acceptance_scale(&self) -> f64 {
        self.beta() * self.kf().powf(-self.c1 * self.kf())
    }

    pub fn grow_cut_params(&self) -> CutParams {
        let p = CutParams::from_theory(self.k, self.alpha(), self.beta(), self.grow_delta(), 1.0);
        self.override_samples(p)
    }

    /// Probability estimation uses `k` times the samples and the smaller
    /// failure budget.
    pub fn prob_cut_params(&self) -> CutParams {
        let fail = self.beta() / self.kf().powf(self.fail_exponent * self.kf());
        let p = CutParams::from_theory(self.k, self.alpha(), fail, self.prob_delta(), self.kf());
        self.override_samples(p)
    }

    fn override_samples(&self, mut p: CutParams) -> CutParams {
        if let Some(h) = self.cut_samples {
            p.h = h as f64;
        }
        p.exact_scan = self.exact_scan;
        p
    }
}

/// Parameters of one cut-estimation call.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CutParams {
    /// Minimum hit count for a nonzero estimate, `1/(kδα²)`.
    pub ell: f64,
    /// Neighbor samples per vertex (may be astronomically large; kept as f64).
    pub h: f64,
    /// Additive accuracy target relative to `d(v|G(v))`.
    pub delta: f64,
    pub exact_scan: bool,
}

impl CutParams {
    /// `ℓ = 1/(kδα²)` and `h = mult · ℓ² · ln(k/fail)`.
    pub fn from_theory(k: usize, alpha: f64, fail: f64, delta: f64, mult: f64) -> CutParams {
        let kf = k as f64;
        let ell = 1.0 / (kf * delta * alpha * alpha);
        let h = (mult * ell * ell * (kf / fail).ln()).ceil().max(1.0);
        CutParams { ell, h, delta, exact_scan: true }
    }

    /// Explicit small parameters, sampling always.
    pub fn sampled(ell: f64, h: usize) -> CutParams {
        CutParams { ell, h: h as f64, delta: 0.0, exact_scan: false }
    }
}

/// Estimates `ĉ(u)` of `|Cut(u, G(v) \ U)|` for each `u` in `U`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutEstimates {
    pub estimates: Vec<f64>,
    pub total: f64,
    pub params: CutParams,
}

/// Epsilon-uniform sampler over an approximate order.
pub struct ApxSampler<'a> {
    probe: Probe<'a>,
    ord: &'a DdOrder,
    cfg: ApxUgsConfig,
    grow: CutParams,
    prob: CutParams,
    trial_cap: u64,
}

/// Outcome of one pass of the outer loop.
#[derive(Clone, Debug, PartialEq)]
pub enum Trial {
    Accepted(Graphlet),
    Rejected,
    Failed,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ApxStats {
    pub samples: u64,
    pub trials: u64,
    pub fails: u64,
    /// Trials whose acceptance expression exceeded 1 and was clamped.
    pub clamps: u64,
    /// Trials where a realizable insertion order met a zero cut estimate.
    pub degraded: u64,
}

impl ApxStats {
    pub fn merge(self, o: ApxStats) -> ApxStats {
        ApxStats {
            samples: self.samples + o.samples,
            trials: self.trials + o.trials,
            fails: self.fails + o.fails,
            clamps: self.clamps + o.clamps,
            degraded: self.degraded + o.degraded,
        }
    }
}

/// Runs the approximate order construction with `β = ε/2`.
pub fn preprocess(probe: Probe<'_>, cfg: &ApxUgsConfig, seed: u64) -> Result<DdOrder> {
    cfg.validate()?;
    let g = probe.graph();
    let params = ApxDdParams::with_h_const(g.n(), cfg.k, cfg.beta(), cfg.order_h_const);
    compute_apx_dd_with(probe, params, seed)
}

impl<'a> ApxSampler<'a> {
    pub fn new(g: &'a Graph, ord: &'a DdOrder, cfg: ApxUgsConfig) -> Result<Self> {
        Self::with_probe(g.probe(), ord, cfg)
    }

    pub fn with_probe(probe: Probe<'a>, ord: &'a DdOrder, cfg: ApxUgsConfig) -> Result<Self> {
        cfg.validate()?;
        if ord.k() != cfg.k {
            return Err(Error::Usage(format!("order built for k = {}, sampler for k = {}", ord.k(), cfg.k)));
        }
        Ok(ApxSampler {
            probe,
            ord,
            grow: cfg.grow_cut_params(),
            prob: cfg.prob_cut_params(),
            trial_cap: cfg.trial_cap(),
            cfg,
        })
    }

    pub fn config(&self) -> &ApxUgsConfig {
        &self.cfg
    }

    pub fn order(&self) -> &'a DdOrder {
        self.ord
    }

    pub fn set_trial_cap(&mut self, cap: u64) {
        self.trial_cap = cap;
    }

    pub fn set_cut_params(&mut self, grow: CutParams, prob: CutParams) {
        self.grow = grow;
        self.prob = prob;
    }

    /// `x ∈ G(v)`: `x = v` or `v ≺ x`.
    #[inline]
    fn in_gv(&self, x: Vertex, v: Vertex) -> bool {
        self.ord.rank_of(x) >= self.ord.rank_of(v)
    }

    /// For each `u` in `set`, counts sampled neighbors that lie in
    /// `G(v) \ set`; the estimate is `d_u X / h` when `X ≥ ℓ` and 0 otherwise.
    pub fn estimate_cuts<R: Rng + ?Sized>(&self, v: Vertex, set: &[Vertex], params: CutParams, rng: &mut R) -> CutEstimates {
        let g = self.probe.graph();
        let mut estimates = Vec::with_capacity(set.len());
        for &u in set {
            let d = self.probe.degree(u);
            let good = |x: Vertex| self.in_gv(x, v) && !set.contains(&x);
            let est = if d == 0 {
                0.0
            } else if params.exact_scan && params.h >= d as f64 {
                let adj = g.adj(u);
                self.probe.ledger().charge_neighbor(d as u64);
                let c = adj.iter().filter(|&&x| good(x)).count();
                // X / h = c / d exactly.
                if c as f64 * params.h >= params.ell * d as f64 {
                    c as f64
                } else {
                    0.0
                }
            } else {
                let h = params.h as u64;
                let adj = g.adj(u);
                let mut hits = 0u64;
                for _ in 0..h {
                    if good(adj[rng.random_range(0..d)]) {
                        hits += 1;
                    }
                }
                self.probe.ledger().charge_neighbor(h);
                if hits as f64 >= params.ell {
                    d as f64 * hits as f64 / h as f64
                } else {
                    0.0
                }
            };
            estimates.push(est);
        }
        let total = estimates.iter().sum();
        CutEstimates { estimates, total, params }
    }

    /// Grows `{v}` using estimated cuts. `None` means FAIL: every estimate
    /// was zero, or no cut edge turned up within the trial cap.
    pub fn apx_rand_grow<R: Rng + ?Sized>(&self, v: Vertex, rng: &mut R) -> Result<Option<Vec<Vertex>>> {
        if v >= self.ord.n() || self.ord.b_of(v) <= 0.0 {
            return Err(Error::Usage(format!("vertex {v} has an empty bucket")));
        }
        let g = self.probe.graph();
        let mut set = Vec::with_capacity(self.cfg.k);
        set.push(v);
        for _ in 1..self.cfg.k {
            let est = self.estimate_cuts(v, &set, self.grow, rng);
            if est.total <= 0.0 {
                return Ok(None);
            }
            let r = rng.random::<f64>() * est.total;
            let mut cum = 0.0;
            let mut pick = None;
            for (i, &c) in est.estimates.iter().enumerate() {
                if c > 0.0 {
                    cum += c;
                    pick = Some(i);
                    if r < cum {
                        break;
                    }
                }
            }
            let u = set[pick.expect("positive total")];
            let mut found = None;
            for _ in 0..self.trial_cap {
                let x = self.probe.random_neighbor(u, rng).expect("positive estimate implies neighbors");
                if self.in_gv(x, v) && !set.contains(&x) {
                    found = Some(x);
                    break;
                }
            }
            match found {
                Some(x) => set.push(x),
                None => return Ok(None),
            }
        }
        debug_assert!(g.induces_connected(&set));
        Ok(Some(set))
    }

    /// Estimate of the growing-process probability of `set`, with cut sizes
    /// replaced by estimates (one estimate per distinct prefix set). The flag
    /// reports that some realizable insertion order met a zero estimate and
    /// was skipped.
    pub fn apx_prob<R: Rng + ?Sized>(&self, set: &[Vertex], rng: &mut R) -> Result<(f64, bool)> {
        let k = set.len();
        if k != self.cfg.k {
            return Err(Error::Usage(format!("expected {} vertices, got {k}", self.cfg.k)));
        }
        let root_pos = (0..k).min_by_key(|&i| self.ord.rank_of(set[i])).unwrap();
        let root = set[root_pos];
        if self.ord.b_of(root) <= 0.0 {
            return Err(Error::Usage(format!("bucket of {root} is empty")));
        }
        let mut nbr = vec![0u16; k];
        for a in 0..k {
            for b in (a + 1)..k {
                if self.probe.pair(set[a], set[b]) {
                    nbr[a] |= 1 << b;
                    nbr[b] |= 1 << a;
                }
            }
        }
        if !crate::ugs::mask_connected(&nbr, root_pos) {
            return Err(Error::Usage("vertex set is not connected".into()));
        }
        let mut cache: HashMap<u16, f64> = HashMap::new();
        let mut acc = crate::ugs::Kahan::default();
        let mut degraded = false;
        self.apx_prob_dfs(set, &nbr, root, 1 << root_pos, 1.0, &mut cache, &mut acc, &mut degraded, rng);
        Ok((acc.sum, degraded))
    }

    #[allow(clippy::too_many_arguments)]
    fn apx_prob_dfs<R: Rng + ?Sized>(
        &self,
        set: &[Vertex],
        nbr: &[u16],
        root: Vertex,
        mask: u16,
        weight: f64,
        cache: &mut HashMap<u16, f64>,
        acc: &mut crate::ugs::Kahan,
        degraded: &mut bool,
        rng: &mut R,
    ) {
        let k = set.len();
        if mask.count_ones() as usize == k {
            acc.add(weight);
            return;
        }
        let cut = match cache.get(&mask) {
            Some(&c) => c,
            None => {
                let members: Vec<Vertex> = (0..k).filter(|&i| mask >> i & 1 == 1).map(|i| set[i]).collect();
                let c = self.estimate_cuts(root, &members, self.prob, rng).total;
                cache.insert(mask, c);
                c
            }
        };
        for j in 0..k {
            if mask >> j & 1 == 1 {
                continue;
            }
            let into = (nbr[j] & mask).count_ones();
            if into == 0 {
                continue;
            }
            if cut <= 0.0 {
                *degraded = true;
                continue;
            }
            self.apx_prob_dfs(set, nbr, root, mask | 1 << j, weight * into as f64 / cut, cache, acc, degraded, rng);
        }
    }

    /// One pass of the outer loop.
    pub fn trial<R: Rng + ?Sized>(&self, rng: &mut R, stats: &mut ApxStats) -> Result<Trial> {
        stats.trials += 1;
        let v = self.ord.draw_bucket(rng)?;
        let Some(set) = self.apx_rand_grow(v, rng)? else {
            stats.fails += 1;
            return Ok(Trial::Failed);
        };
        let (p_hat, degraded) = self.apx_prob(&set, rng)?;
        if degraded {
            stats.degraded += 1;
        }
        if p_hat <= 0.0 {
            return Ok(Trial::Rejected);
        }
        let raw = self.cfg.acceptance_scale() / (self.ord.z() * self.ord.p(v) * p_hat);
        if raw > 1.0 {
            stats.clamps += 1;
        }
        if rng.random::<f64>() < raw.min(1.0) {
            Ok(Trial::Accepted(Graphlet::from_unsorted(set)))
        } else {
            Ok(Trial::Rejected)
        }
    }

    pub fn sample_eps_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(Graphlet, ApxStats)> {
        let mut stats = ApxStats { samples: 1, ..ApxStats::default() };
        loop {
            if let Trial::Accepted(g) = self.trial(rng, &mut stats)? {
                return Ok((g, stats));
            }
        }
    }

    /// `count` samples; sample `i` uses stream `i` of `seed`.
    pub fn sample_many(&self, count: usize, seed: u64, jobs: usize) -> Result<(Vec<Graphlet>, ApxStats)> {
        let runs = crate::par_indexed(count, jobs, |i| self.sample_eps_uniform(&mut rng::stream(seed, i as u64)))?;
        let mut stats = ApxStats::default();
        let mut out = Vec::with_capacity(count);
        for (g, s) in runs {
            stats = stats.merge(s);
            out.push(g);
        }
        Ok((out, stats))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd_order::compute_apx_dd;
    use crate::graph::generators::*;

    fn sampler_cfg(k: usize, eps: f64) -> ApxUgsConfig {
        ApxUgsConfig::new(k, eps)
    }

    #[test]
    fn derived_parameters() {
        let c = sampler_cfg(4, 0.2);
        assert!((c.beta() - 0.1).abs() < 1e-15);
        assert!((c.alpha() - 0.1f64.powf(1.0 / 3.0) / 384.0).abs() < 1e-15);
        assert!((c.gamma() - 0.008 / 256.0).abs() < 1e-15);
        assert!(c.grow_cut_params().h > 1e12);
        assert!(c.trial_cap() > 0);
    }

    #[test]
    fn first_vertex_alone_has_full_cut() {
        let g = star(5);
        let ord = compute_apx_dd(&g, 3, 0.25, 3).unwrap();
        assert_eq!(ord.order()[0], 0);
        let s = ApxSampler::new(&g, &ord, sampler_cfg(3, 0.5)).unwrap();
        let mut r = rng::master(1);
        let est = s.estimate_cuts(0, &[0], CutParams::sampled(1.0, 50), &mut r);
        assert_eq!(est.estimates, vec![5.0]);
        let est = s.estimate_cuts(0, &[0], s.grow, &mut r);
        assert_eq!(est.estimates, vec![5.0]);
    }

    #[test]
    fn zero_cut_gives_zero() {
        let g = star(3);
        let ord = compute_apx_dd(&g, 3, 0.5, 3).unwrap();
        let s = ApxSampler::new(&g, &ord, sampler_cfg(3, 0.5)).unwrap();
        let mut r = rng::master(2);
        let est = s.estimate_cuts(0, &[0, 1], CutParams::sampled(1.0, 40), &mut r);
        assert_eq!(est.estimates[1], 0.0);
        assert!(est.estimates[0] > 0.0);
        assert_eq!(est.total, est.estimates.iter().sum::<f64>());
    }

    #[test]
    fn sampled_estimates_are_multiples() {
        let g = erdos_renyi(20, 0.4, 1);
        let ord = compute_apx_dd(&g, 3, 0.5, 3).unwrap();
        let s = ApxSampler::new(&g, &ord, sampler_cfg(3, 0.5)).unwrap();
        let v = ord.nonempty_buckets().next().unwrap();
        let h = 37;
        let est = s.estimate_cuts(v, &[v], CutParams::sampled(3.0, h), &mut rng::master(5));
        let d = g.deg(v) as f64;
        let x = est.estimates[0] * h as f64 / d;
        assert!((x - x.round()).abs() < 1e-9);
        assert!(est.estimates[0] == 0.0 || x.round() >= 3.0);
    }

    #[test]
    fn triangle_always_returns_whole_graph() {
        let g = clique(3);
        let ord = compute_apx_dd(&g, 3, 0.5, 0).unwrap();
        let s = ApxSampler::new(&g, &ord, sampler_cfg(3, 0.5)).unwrap();
        let v = ord.order()[0];
        let mut r = rng::master(0);
        for _ in 0..50 {
            let mut set = s.apx_rand_grow(v, &mut r).unwrap().unwrap();
            set.sort_unstable();
            assert_eq!(set, vec![0, 1, 2]);
        }
        let (p, degraded) = s.apx_prob(&[0, 1, 2], &mut r).unwrap();
        assert!((p - 1.0).abs() < 1e-12 && !degraded);
    }

    #[test]
    fn tiny_samples_may_fail_but_never_lie() {
        let g = path(3);
        let ord = compute_apx_dd(&g, 3, 0.5, 0).unwrap();
        let mut s = ApxSampler::new(&g, &ord, sampler_cfg(3, 0.5)).unwrap();
        let cut = CutParams::sampled(1.0, 1);
        s.set_cut_params(cut, cut);
        s.set_trial_cap(2);
        let v = ord.order()[0];
        let mut r = rng::master(4);
        let mut fails = 0;
        for _ in 0..400 {
            match s.apx_rand_grow(v, &mut r).unwrap() {
                None => fails += 1,
                Some(mut set) => {
                    set.sort_unstable();
                    assert_eq!(set, vec![0, 1, 2]);
                }
            }
        }
        // One sample per cut: the second step sees a positive total with
        // probability 1/2 and then finds an edge within two tries w.p. 3/4.
        assert!((200..300).contains(&fails), "{fails} failures");
    }
}
