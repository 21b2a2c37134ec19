//! Invariant suites over fixed graph families, each producing a JSON-ready
//! report with a pass flag.

use serde::Serialize;

use super::{
    build_gk, conductance_of_cut, enumerate_graphlets, eps_mixing_time, graphlets_per_vertex, line_graph, relaxation_time,
    ChainMatrix,
};
use crate::error::{Error, Result};
use crate::graph::generators::*;
use crate::graph::Graph;
use crate::walk::compute_t;

/// Named graphs the suites run over: paths and stars up to 20 vertices,
/// cliques up to 10, five connected `G(30, 0.25)` draws and a small fat
/// lollipop.
pub fn suite_graphs() -> Vec<(String, Graph)> {
    let mut out = Vec::new();
    for n in 2..=20 {
        out.push((format!("path:{n}"), path(n)));
    }
    for leaves in 2..=19 {
        out.push((format!("star:{leaves}"), star(leaves)));
    }
    for n in 2..=10 {
        out.push((format!("clique:{n}"), clique(n)));
    }
    for seed in connected_er_seeds(30, 0.25, 5) {
        out.push((format!("er:30,0.25,{seed}"), erdos_renyi(30, 0.25, seed)));
    }
    out.push(("lollipop:3,2,3".into(), fat_lollipop(3, 2, 3)));
    out
}

/// First `count` seeds whose `G(n, p)` draw is connected.
pub fn connected_er_seeds(n: usize, p: f64, count: usize) -> Vec<u64> {
    (0u64..).filter(|&s| erdos_renyi(n, p, s).is_connected()).take(count).collect()
}

fn ratio_of_degrees(g: &Graph) -> f64 {
    g.max_degree() as f64 / g.min_degree() as f64
}

/// Relaxation times of the lazy walks on `G` and on its line graph, against
/// `τ(L(G)) ≤ 20 ρ τ(G)` with `ρ = Δ/δ`, plus the mixing sandwich on both
/// chains.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralReport {
    pub graph: String,
    pub tau_graph: f64,
    pub tau_line_graph: f64,
    pub rho: f64,
    pub bound: f64,
    pub mixing: Vec<MixingReport>,
    pub holds: bool,
}

pub fn spectral_check(name: &str, g: &Graph) -> Result<SpectralReport> {
    if g.m() == 0 || !g.is_connected() {
        return Err(Error::NotErgodic(format!("{name}: need a connected graph with an edge")));
    }
    let walk = ChainMatrix::from_graph(g);
    let line_walk = ChainMatrix::from_graph(&line_graph(g));
    let tau_graph = relaxation_time(&walk)?;
    let tau_line_graph = relaxation_time(&line_walk)?;
    let rho = ratio_of_degrees(g);
    let bound = 20.0 * rho * tau_graph;
    let mixing = vec![
        mixing_check(&format!("{name}/G"), &walk, &SANDWICH_EPS)?,
        mixing_check(&format!("{name}/L(G)"), &line_walk, &SANDWICH_EPS)?,
    ];
    let holds = tau_line_graph <= bound && mixing.iter().all(|m| m.holds);
    Ok(SpectralReport { graph: name.into(), tau_graph, tau_line_graph, rho, bound, mixing, holds })
}

/// Per-vertex graphlet counts against `d_v^(k-1)/(k-1)^(k-1) ≤ N_v ≤
/// (k-1)! Δ^(k-1)` (for `N_v > 0`), and `Σ_g |T(g)|` against the edge count
/// of the (k-1)-graphlet graph.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsReport {
    pub graph: String,
    pub k: usize,
    pub graphlets: usize,
    pub vertices_checked: usize,
    pub count_violations: Vec<String>,
    pub t_sum: usize,
    pub lower_graph_edges: usize,
    pub holds: bool,
}

pub fn bounds_check(name: &str, g: &Graph, k: usize) -> Result<BoundsReport> {
    if k < 2 {
        return Err(Error::Usage("k must be at least 2".into()));
    }
    let index = enumerate_graphlets(g, k)?;
    let per_vertex = graphlets_per_vertex(&index, g.n());
    let km1 = (k - 1) as i32;
    let fact: f64 = (1..k).map(|i| i as f64).product();
    let upper = fact * (g.max_degree() as f64).powi(km1);
    let mut count_violations = Vec::new();
    let mut vertices_checked = 0;
    for (v, &nv) in per_vertex.iter().enumerate() {
        if nv == 0 {
            continue;
        }
        vertices_checked += 1;
        let lower = (g.deg(v) as f64).powi(km1) / ((k - 1) as f64).powi(km1);
        if (nv as f64) < lower || nv as f64 > upper {
            count_violations.push(format!("v = {v}: N_v = {nv} outside [{lower}, {upper}]"));
        }
    }
    let probe = g.probe();
    let t_sum = index.all.iter().map(|s| compute_t(&probe, &s.0)).sum();
    let lower_graph_edges = build_gk(g, k - 1)?.edge_count();
    let holds = count_violations.is_empty() && t_sum == lower_graph_edges;
    Ok(BoundsReport {
        graph: name.into(),
        k,
        graphlets: index.len(),
        vertices_checked,
        count_violations,
        t_sum,
        lower_graph_edges,
        holds,
    })
}

/// `(τ - 1) ln(1/(2ε)) ≤ t_ε ≤ τ ln(1/(ε π_min))` for one chain and `ε`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichCheck {
    pub eps: f64,
    pub t_eps: u64,
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixingReport {
    pub chain: String,
    pub states: usize,
    pub tau: f64,
    pub pi_min: f64,
    pub checks: Vec<SandwichCheck>,
    pub holds: bool,
}

pub const SANDWICH_EPS: [f64; 4] = [0.25, 0.1, 0.02, 0.001];

pub fn mixing_check(name: &str, chain: &ChainMatrix, eps_list: &[f64]) -> Result<MixingReport> {
    let tau = relaxation_time(chain)?;
    let pi_min = chain.pi_min();
    let mut checks = Vec::new();
    for &eps in eps_list {
        let t_eps = eps_mixing_time(chain, eps)?;
        let lower = (tau - 1.0) * (1.0 / (2.0 * eps)).ln();
        let upper = tau * (1.0 / (eps * pi_min)).ln();
        let t = t_eps as f64;
        // Slack for the eigenvalue accuracy on the real-valued bounds.
        let holds = lower <= t + 1e-8 * tau && t <= upper + 1e-8 * tau;
        checks.push(SandwichCheck { eps, t_eps, lower, upper, holds });
    }
    let holds = checks.iter().all(|c| c.holds);
    Ok(MixingReport { chain: name.into(), states: chain.len(), tau, pi_min, checks, holds })
}

/// Walk-related checks for one graph: the mixing sandwich on the lazy walk
/// over (k-1)-graphlets, the mixing time used as the walk budget, and the
/// `|T|` consistency.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WalkSuiteReport {
    pub graph: String,
    pub k: usize,
    pub eps: f64,
    pub lower_graph_states: usize,
    pub t_mix: u64,
    pub mixing: MixingReport,
    pub t_sum: usize,
    pub lower_graph_edges: usize,
    pub holds: bool,
}

pub fn walk_check(name: &str, g: &Graph, k: usize, eps: f64) -> Result<WalkSuiteReport> {
    if k < 2 {
        return Err(Error::Usage("k must be at least 2".into()));
    }
    let lower = build_gk(g, k - 1)?;
    let chain = ChainMatrix::lazy_walk(&lower.adj);
    let mixing = mixing_check(&format!("{name}/G{}", k - 1), &chain, &SANDWICH_EPS)?;
    let t_mix = eps_mixing_time(&chain, eps / (k * k) as f64)?;
    let probe = g.probe();
    let t_sum = enumerate_graphlets(g, k)?.all.iter().map(|s| compute_t(&probe, &s.0)).sum();
    let lower_graph_edges = lower.edge_count();
    let holds = mixing.holds && t_sum == lower_graph_edges;
    Ok(WalkSuiteReport {
        graph: name.into(),
        k,
        eps,
        lower_graph_states: lower.states.len(),
        t_mix,
        mixing,
        t_sum,
        lower_graph_edges,
        holds,
    })
}

/// The bottleneck cut of the lollipop's k-graphlet graph: `U` holds the
/// graphlets with at least `k/2 + 1` vertices within distance `k - 1` of the
/// left clique. Reported, not asserted: the volume of `U` need not be the
/// smaller side at small sizes, in which case the conductance is taken on the
/// complement.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LollipopCutReport {
    pub clique_order: usize,
    pub path_width: usize,
    pub k: usize,
    pub states: usize,
    pub cut_side_states: usize,
    pub cut_side_volume: f64,
    pub complement_volume: f64,
    pub volume_comparison_holds: bool,
    pub conductance: f64,
    pub relaxation_time: f64,
}

pub fn lollipop_cut(clique_order: usize, path_width: usize, k: usize) -> Result<LollipopCutReport> {
    let g = fat_lollipop(clique_order, path_width, k);
    // Distance from the left clique (vertices 0..clique_order) by BFS.
    let mut dist = vec![usize::MAX; g.n()];
    let mut queue: std::collections::VecDeque<usize> = (0..clique_order).collect();
    for v in 0..clique_order {
        dist[v] = 0;
    }
    while let Some(u) = queue.pop_front() {
        for &w in g.adj(u) {
            if dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    let gk = build_gk(&g, k)?;
    let chain = ChainMatrix::lazy_walk(&gk.adj);
    let need = k as f64 / 2.0 + 1.0;
    let side: Vec<usize> = (0..gk.states.len())
        .filter(|&i| gk.states.all[i].0.iter().filter(|&&v| dist[v] < k).count() as f64 >= need)
        .collect();
    let mut inside = vec![false; gk.states.len()];
    side.iter().for_each(|&i| inside[i] = true);
    let complement: Vec<usize> = (0..gk.states.len()).filter(|&i| !inside[i]).collect();
    let vol = |set: &[usize]| set.iter().map(|&i| chain.pi[i]).sum::<f64>();
    let (cut_side_volume, complement_volume) = (vol(&side), vol(&complement));
    let holds = cut_side_volume <= complement_volume;
    let conductance = conductance_of_cut(&chain, if holds { &side } else { &complement })?;
    Ok(LollipopCutReport {
        clique_order,
        path_width,
        k,
        states: gk.states.len(),
        cut_side_states: side.len(),
        cut_side_volume,
        complement_volume,
        volume_comparison_holds: holds,
        conductance,
        relaxation_time: relaxation_time(&chain)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p4_spectral() {
        let r = spectral_check("p4", &path(4)).unwrap();
        assert!(r.holds);
        assert_eq!(r.rho, 2.0);
        let p3 = relaxation_time(&ChainMatrix::from_graph(&path(3))).unwrap();
        assert!((r.tau_line_graph - p3).abs() < 1e-9);
    }

    #[test]
    fn suite_contents() {
        let s = suite_graphs();
        assert!(s.iter().all(|(_, g)| g.is_connected()));
        assert_eq!(s.iter().filter(|(n, _)| n.starts_with("er:")).count(), 5);
    }

    #[test]
    fn bounds_on_small_graphs() {
        for (name, g) in [("k5", clique(5)), ("star", star(6)), ("lollipop", fat_lollipop(3, 2, 3))] {
            for k in 2..5 {
                let r = bounds_check(name, &g, k).unwrap();
                assert!(r.holds, "{r:?}");
            }
        }
    }

    #[test]
    fn sandwich_on_cliques() {
        for n in 2..7 {
            let r = mixing_check("clique", &ChainMatrix::from_graph(&clique(n)), &SANDWICH_EPS).unwrap();
            assert!(r.holds, "{r:?}");
        }
    }

    #[test]
    fn lollipop_cut_is_a_bottleneck() {
        let r = lollipop_cut(3, 2, 3).unwrap();
        assert!(r.cut_side_states > 0 && r.cut_side_states < r.states);
        assert!(r.conductance > 0.0 && r.conductance <= 1.0);
        // Cheeger: relaxation time at least 1/(2Φ).
        assert!(r.relaxation_time >= 1.0 / (2.0 * r.conductance) - 1e-9);
    }

    #[test]
    fn walk_suite_p4() {
        let r = walk_check("p4", &path(4), 3, 0.2).unwrap();
        assert!(r.holds);
        assert_eq!(r.lower_graph_states, 3);
        assert_eq!(r.t_sum, 2);
    }
}
