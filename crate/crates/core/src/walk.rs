//! Random-walk sampling: a lazy walk over (k-1)-graphlets, where adjacent
//! states share k-2 vertices that still induce a connected subgraph. The
//! union of two adjacent states is a k-graphlet; accepting it with
//! probability `1/|T(g)|` makes the output law that of a uniform edge of
//! the state graph mapped to k-graphlets, i.e. uniform once mixed.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, Graphlet, Probe, Vertex};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WalkConfig {
    /// Size of the sampled graphlets; the walk runs on (k-1)-graphlets.
    pub k: usize,
    /// Steps before each extraction attempt.
    pub t_mix: u64,
    pub eps: f64,
}

impl WalkConfig {
    pub fn new(k: usize, t_mix: u64) -> WalkConfig {
        WalkConfig { k, t_mix, eps: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WalkState {
    /// Sorted vertices of the current (k-1)-graphlet.
    pub current: Vec<Vertex>,
    pub steps_taken: u64,
    /// Set when the current state was found to have no neighbor.
    pub isolated: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct WalkStats {
    pub samples: u64,
    pub steps: u64,
    pub attempts: u64,
}

/// Grows a connected j-vertex set by BFS from vertices taken in random
/// order; fails only if no component has j vertices.
pub fn find_start<R: Rng + ?Sized>(g: &Graph, j: usize, rng: &mut R) -> Result<Vec<Vertex>> {
    if j == 0 || j > g.n() {
        return Err(Error::EmptyInstance(format!("no connected {j}-vertex subgraph")));
    }
    let mut roots: Vec<Vertex> = (0..g.n()).collect();
    roots.shuffle(rng);
    for root in roots {
        let mut set = vec![root];
        let mut head = 0;
        while head < set.len() && set.len() < j {
            let u = set[head];
            head += 1;
            for &w in g.adj(u) {
                if !set.contains(&w) {
                    set.push(w);
                    if set.len() == j {
                        break;
                    }
                }
            }
        }
        if set.len() == j {
            set.sort_unstable();
            return Ok(set);
        }
    }
    Err(Error::EmptyInstance(format!("no connected {j}-vertex subgraph")))
}

/// Whether `set` minus the positions in `skip` (a bitmask) is connected,
/// using pair queries. The empty set counts as connected.
fn connected_without(probe: &Probe, set: &[Vertex], skip: u32) -> bool {
    let idx: Vec<usize> = (0..set.len()).filter(|&i| skip >> i & 1 == 0).collect();
    if idx.len() <= 1 {
        return true;
    }
    let mut seen = vec![false; idx.len()];
    seen[0] = true;
    let mut stack = vec![0];
    let mut count = 1;
    while let Some(a) = stack.pop() {
        for b in 0..idx.len() {
            if !seen[b] && probe.pair(set[idx[a]], set[idx[b]]) {
                seen[b] = true;
                count += 1;
                stack.push(b);
            }
        }
    }
    count == idx.len()
}

/// `|T(g)|`: pairs `{x, y}` of `g` such that removing `x`, `y`, or both
/// leaves a connected set. This is the number of state-graph edges whose
/// union is `g`.
pub fn compute_t(probe: &Probe, g: &[Vertex]) -> usize {
    let k = g.len();
    let alone: Vec<bool> = (0..k).map(|x| connected_without(probe, g, 1 << x)).collect();
    let mut count = 0;
    for x in 0..k {
        for y in (x + 1)..k {
            if alone[x] && alone[y] && connected_without(probe, g, (1 << x) | (1 << y)) {
                count += 1;
            }
        }
    }
    count
}

pub struct WalkSampler<'a> {
    probe: Probe<'a>,
    cfg: WalkConfig,
    disconnected_warning: bool,
}

impl<'a> WalkSampler<'a> {
    pub fn new(g: &'a Graph, cfg: WalkConfig) -> Result<Self> {
        Self::with_probe(g.probe(), cfg)
    }

    pub fn with_probe(probe: Probe<'a>, cfg: WalkConfig) -> Result<Self> {
        if cfg.k < 2 {
            return Err(Error::Usage(format!("k must be at least 2, got {}", cfg.k)));
        }
        if cfg.t_mix == 0 {
            return Err(Error::Usage("t_mix must be at least 1".into()));
        }
        let disconnected_warning = !probe.graph().is_connected();
        Ok(WalkSampler { probe, cfg, disconnected_warning })
    }

    /// True when the graph is disconnected, so only the start component is
    /// sampled.
    pub fn disconnected_warning(&self) -> bool {
        self.disconnected_warning
    }

    pub fn start<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<WalkState> {
        let current = find_start(self.probe.graph(), self.cfg.k - 1, rng)?;
        Ok(WalkState { current, steps_taken: 0, isolated: false })
    }

    /// One lazy step: stay with probability 1/2, otherwise move to a
    /// uniform neighbor.
    pub fn walk_step<R: Rng + ?Sized>(&self, state: &mut WalkState, rng: &mut R) {
        state.steps_taken += 1;
        if rng.random_bool(0.5) {
            return;
        }
        self.move_uniform(state, rng);
    }

    /// Replaces the state by a uniform neighbor. Returns false (and flags the
    /// state) when there is none.
    pub fn move_uniform<R: Rng + ?Sized>(&self, state: &mut WalkState, rng: &mut R) -> bool {
        let g = &state.current;
        let j = g.len();
        if j == 1 {
            return match self.probe.random_neighbor(g[0], rng) {
                Some(w) => {
                    state.current[0] = w;
                    true
                }
                None => {
                    state.isolated = true;
                    false
                }
            };
        }
        // |C(g, y)|: edges from y leaving g.
        let outside: Vec<u64> = g
            .iter()
            .map(|&y| {
                let inside = g.iter().filter(|&&w| w != y && self.probe.pair(y, w)).count();
                (self.probe.degree(y) - inside) as u64
            })
            .collect();
        let total_out: u64 = outside.iter().sum();
        let weight: Vec<u64> =
            (0..j).map(|x| if connected_without(&self.probe, g, 1 << x) { total_out - outside[x] } else { 0 }).collect();
        let total: u64 = weight.iter().sum();
        if total == 0 {
            state.isolated = true;
            return false;
        }
        loop {
            let x = pick(&weight, rng.random_range(0..total));
            let mut rest_weight = outside.clone();
            rest_weight[x] = 0;
            let y = pick(&rest_weight, rng.random_range(0..weight[x]));
            let y2 = loop {
                let w = self.probe.random_neighbor(g[y], rng).expect("positive out-degree");
                if !g.contains(&w) {
                    break w;
                }
            };
            let r = (0..j).filter(|&i| i != x && self.probe.pair(y2, g[i])).count();
            if r == 1 || rng.random_range(0..r) == 0 {
                let mut next = g.clone();
                next[x] = y2;
                next.sort_unstable();
                state.current = next;
                return true;
            }
        }
    }

    /// Advances `t_mix` steps, takes one forced move, and offers the union
    /// of the two states, accepted with probability `1/|T|`. Repeats until
    /// accepted; the walk continues from the last state.
    pub fn sample_rw<R: Rng + ?Sized>(&self, state: &mut WalkState, rng: &mut R) -> Result<(Graphlet, u64)> {
        let mut attempts = 0;
        loop {
            attempts += 1;
            for _ in 0..self.cfg.t_mix {
                self.walk_step(state, rng);
            }
            let before = state.current.clone();
            if !self.move_uniform(state, rng) {
                return Err(Error::EmptyInstance(format!(
                    "walk state {before:?} has no neighboring {}-graphlet",
                    before.len()
                )));
            }
            state.steps_taken += 1;
            let mut union = before;
            for &w in &state.current {
                if !union.contains(&w) {
                    union.push(w);
                }
            }
            union.sort_unstable();
            debug_assert_eq!(union.len(), self.cfg.k);
            let t = compute_t(&self.probe, &union);
            debug_assert!(t >= 1);
            if t == 1 || rng.random_range(0..t) == 0 {
                debug_assert!(self.probe.graph().induces_connected(&union));
                return Ok((Graphlet(union), attempts));
            }
        }
    }

    /// `count` consecutive samples from one walk seeded by `seed`.
    pub fn sample_many(&self, count: usize, seed: u64) -> Result<(Vec<Graphlet>, WalkStats)> {
        let mut rng = rng::master(seed);
        let mut state = self.start(&mut rng)?;
        let mut out = Vec::with_capacity(count);
        let mut stats = WalkStats::default();
        for _ in 0..count {
            let (g, a) = self.sample_rw(&mut state, &mut rng)?;
            stats.attempts += a;
            out.push(g);
        }
        stats.samples = count as u64;
        stats.steps = state.steps_taken;
        Ok((out, stats))
    }
}

fn pick(weights: &[u64], mut r: u64) -> usize {
    for (i, &w) in weights.iter().enumerate() {
        if r < w {
            return i;
        }
        r -= w;
    }
    unreachable!("draw beyond total weight")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generators::*;
    use crate::oracle::{build_gk, enumerate_graphlets};

    #[test]
    fn t_counts() {
        let tri = clique(3);
        assert_eq!(compute_t(&tri.probe(), &[0, 1, 2]), 3);
        let p3 = path(3);
        assert_eq!(compute_t(&p3.probe(), &[0, 1, 2]), 1);
        let s = star(3);
        assert_eq!(compute_t(&s.probe(), &[0, 1, 2, 3]), 3);
        assert_eq!(compute_t(&p3.probe(), &[0, 1]), 1);
    }

    #[test]
    fn starts() {
        let mut r = rng::master(0);
        let e = find_start(&path(3), 2, &mut r).unwrap();
        assert!(e == vec![0, 1] || e == vec![1, 2]);
        assert!(matches!(find_start(&empty(4), 2, &mut r), Err(Error::EmptyInstance(_))));
        let t = find_start(&clique(4), 3, &mut r).unwrap();
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn isolated_state_is_flagged() {
        let g = Graph::from_edges(5, &[(0, 1), (2, 3), (3, 4)]).unwrap();
        let w = WalkSampler::new(&g, WalkConfig::new(3, 5)).unwrap();
        assert!(w.disconnected_warning());
        let mut st = WalkState { current: vec![0, 1], steps_taken: 0, isolated: false };
        let mut r = rng::master(1);
        assert!(!w.move_uniform(&mut st, &mut r));
        assert!(st.isolated);
        assert!(w.sample_rw(&mut st, &mut r).is_err());
    }

    #[test]
    fn triangle_transition_law() {
        let g = clique(3);
        let w = WalkSampler::new(&g, WalkConfig::new(3, 1)).unwrap();
        let mut r = rng::master(7);
        let mut counts = std::collections::HashMap::new();
        let n = 40_000;
        for _ in 0..n {
            let mut st = WalkState { current: vec![0, 1], steps_taken: 0, isolated: false };
            w.walk_step(&mut st, &mut r);
            *counts.entry(st.current).or_insert(0usize) += 1;
        }
        for (state, expect) in [(vec![0, 1], 0.5), (vec![0, 2], 0.25), (vec![1, 2], 0.25)] {
            let f = counts[&state] as f64 / n as f64;
            assert!((f - expect).abs() < 0.015, "{state:?}: {f}");
        }
    }

    #[test]
    fn t_sums_to_state_graph_edges() {
        for seed in 0..4 {
            let g = erdos_renyi(11, 0.4, seed);
            for k in 3..5 {
                let lower = build_gk(&g, k - 1).unwrap();
                let total: usize =
                    enumerate_graphlets(&g, k).unwrap().all.iter().map(|s| compute_t(&g.probe(), &s.0)).sum();
                assert_eq!(total, lower.edge_count());
            }
        }
    }

    #[test]
    fn samples_are_graphlets() {
        let g = erdos_renyi(15, 0.3, 2);
        let w = WalkSampler::new(&g, WalkConfig::new(4, 10)).unwrap();
        let (samples, stats) = w.sample_many(200, 3).unwrap();
        assert_eq!(stats.samples, 200);
        for s in samples {
            assert_eq!(s.k(), 4);
            assert!(g.induces_connected(&s.0));
        }
    }
}
