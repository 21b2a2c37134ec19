//! Brute-force graphlet enumeration and the explicit graphlet graph.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{Graph, Graphlet, Vertex};

/// Refuse to enumerate more graphlets than this.
pub const ENUMERATION_GUARD: usize = 10_000_000;

/// All k-graphlets of a graph, sorted, with a lookup from vertex set to index.
#[derive(Clone, Debug)]
pub struct GraphletIndex {
    pub k: usize,
    pub all: Vec<Graphlet>,
    lookup: HashMap<Vec<Vertex>, usize>,
}

impl GraphletIndex {
    pub fn len(&self) -> usize {
        self.all.len()
    }

    pub fn is_empty(&self) -> bool {
        self.all.is_empty()
    }

    pub fn index_of(&self, vertices: &[Vertex]) -> Option<usize> {
        self.lookup.get(vertices).copied()
    }

    /// Graphlets grouped by their minimum vertex under `rank`.
    pub fn by_bucket(&self, rank: &[usize]) -> Vec<Vec<usize>> {
        let mut buckets = vec![Vec::new(); rank.len()];
        for (i, g) in self.all.iter().enumerate() {
            let owner = *g.0.iter().min_by_key(|&&v| rank[v]).expect("nonempty graphlet");
            buckets[owner].push(i);
        }
        buckets
    }
}

/// Enumerates every connected induced k-vertex subgraph exactly once by
/// extension-set growth rooted at the smallest vertex.
pub fn enumerate_graphlets(g: &Graph, k: usize) -> Result<GraphletIndex> {
    enumerate_with_guard(g, k, ENUMERATION_GUARD)
}

pub fn enumerate_with_guard(g: &Graph, k: usize, guard: usize) -> Result<GraphletIndex> {
    if k == 0 {
        return Err(Error::Usage("k must be positive".into()));
    }
    let mut out: Vec<Graphlet> = Vec::new();
    let mut sub = Vec::with_capacity(k);
    for root in 0..g.n() {
        sub.clear();
        sub.push(root);
        let ext: Vec<Vertex> = g.adj(root).iter().copied().filter(|&w| w > root).collect();
        extend(g, k, root, &mut sub, ext, &mut out, guard)?;
    }
    out.iter_mut().for_each(|s| s.0.sort_unstable());
    out.sort_unstable();
    let lookup = out.iter().enumerate().map(|(i, s)| (s.0.clone(), i)).collect();
    Ok(GraphletIndex { k, all: out, lookup })
}

fn extend(
    g: &Graph,
    k: usize,
    root: Vertex,
    sub: &mut Vec<Vertex>,
    mut ext: Vec<Vertex>,
    out: &mut Vec<Graphlet>,
    guard: usize,
) -> Result<()> {
    if sub.len() == k {
        if out.len() >= guard {
            return Err(Error::Guard(format!("more than {guard} {k}-graphlets")));
        }
        out.push(Graphlet(sub.clone()));
        return Ok(());
    }
    while let Some(w) = ext.pop() {
        let mut next = ext.clone();
        for &u in g.adj(w) {
            if u > root
                && !sub.contains(&u)
                && !next.contains(&u)
                && !sub.iter().any(|&s| g.has_edge(s, u))
            {
                next.push(u);
            }
        }
        sub.push(w);
        extend(g, k, root, sub, next, out, guard)?;
        sub.pop();
    }
    Ok(())
}

/// `|B(v)|` for every `v` under the order given by `rank`.
pub fn bucket_sizes(g: &Graph, k: usize, rank: &[usize]) -> Result<Vec<u64>> {
    let index = enumerate_graphlets(g, k)?;
    Ok(index.by_bucket(rank).iter().map(|b| b.len() as u64).collect())
}

/// Number of k-graphlets containing each vertex.
pub fn graphlets_per_vertex(index: &GraphletIndex, n: usize) -> Vec<u64> {
    let mut counts = vec![0; n];
    for s in &index.all {
        for &v in &s.0 {
            counts[v] += 1;
        }
    }
    counts
}

/// Explicit graph on k-graphlets: two are adjacent when they share a
/// connected (k-1)-vertex subset. For `k = 1` this is `G` itself.
#[derive(Clone, Debug)]
pub struct GraphletGraph {
    pub states: GraphletIndex,
    pub adj: Vec<Vec<usize>>,
}

impl GraphletGraph {
    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn is_connected(&self) -> bool {
        let n = self.adj.len();
        if n <= 1 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for &y in &self.adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count == n
    }
}

pub fn build_gk(g: &Graph, k: usize) -> Result<GraphletGraph> {
    let states = enumerate_graphlets(g, k)?;
    let mut adj = vec![Vec::new(); states.len()];
    if k == 1 {
        for (i, s) in states.all.iter().enumerate() {
            adj[i] = g.adj(s.0[0]).to_vec();
        }
        return Ok(GraphletGraph { states, adj });
    }
    let mut groups: HashMap<Vec<Vertex>, Vec<usize>> = HashMap::new();
    for (i, s) in states.all.iter().enumerate() {
        for x in 0..k {
            let mut rest = s.0.clone();
            rest.remove(x);
            if g.induces_connected(&rest) {
                groups.entry(rest).or_default().push(i);
            }
        }
    }
    for members in groups.values() {
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    adj.iter_mut().for_each(|l| l.sort_unstable());
    Ok(GraphletGraph { states, adj })
}

/// Line graph: one vertex per edge (in `Graph::edges` order), adjacent when
/// the edges share exactly one endpoint.
pub fn line_graph(g: &Graph) -> Graph {
    let edges: Vec<(Vertex, Vertex)> = g.edges().collect();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
    for (i, &(u, v)) in edges.iter().enumerate() {
        incident[u].push(i);
        incident[v].push(i);
    }
    let mut out = Vec::new();
    for list in &incident {
        for (a, &i) in list.iter().enumerate() {
            for &j in &list[a + 1..] {
                out.push((i.min(j), i.max(j)));
            }
        }
    }
    Graph::from_edges(edges.len(), &out).expect("simple graphs have simple line graphs")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generators::*;

    fn brute_force(g: &Graph, k: usize) -> Vec<Vec<Vertex>> {
        let n = g.n();
        let mut out = Vec::new();
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != k {
                continue;
            }
            let set: Vec<Vertex> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            if g.induces_connected(&set) {
                out.push(set);
            }
        }
        out.sort();
        out
    }

    #[test]
    fn small_counts() {
        assert_eq!(enumerate_graphlets(&clique(4), 3).unwrap().len(), 4);
        let p4 = enumerate_graphlets(&path(4), 3).unwrap();
        assert_eq!(p4.all, vec![Graphlet(vec![0, 1, 2]), Graphlet(vec![1, 2, 3])]);
        assert_eq!(enumerate_graphlets(&star(3), 3).unwrap().len(), 3);
    }

    #[test]
    fn guard_refuses() {
        assert!(matches!(enumerate_with_guard(&clique(10), 4, 100), Err(Error::Guard(_))));
    }

    #[test]
    fn graphlet_graphs() {
        let k4 = build_gk(&clique(4), 3).unwrap();
        assert_eq!(k4.states.len(), 4);
        assert!(k4.adj.iter().all(|l| l.len() == 3));
        let p4 = build_gk(&path(4), 3).unwrap();
        assert_eq!(p4.adj, vec![vec![1], vec![0]]);
        let p3 = build_gk(&path(3), 2).unwrap();
        assert_eq!(p3.adj, vec![vec![1], vec![0]]);
    }

    #[test]
    fn line_graphs() {
        assert_eq!(line_graph(&clique(3)).m(), 3);
        assert_eq!(line_graph(&star(3)), clique(3));
        assert_eq!(line_graph(&path(4)), path(3));
    }

    #[test]
    fn gk_for_k2_is_line_graph() {
        let g = erdos_renyi(12, 0.35, 3);
        let g2 = build_gk(&g, 2).unwrap();
        let lg = line_graph(&g);
        assert_eq!(g2.edge_count(), lg.m());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn matches_subset_scan(n in 1usize..11, p in 0.0f64..1.0, seed in any::<u64>(), k in 1usize..6) {
                let g = erdos_renyi(n, p, seed);
                let fast: Vec<Vec<Vertex>> = enumerate_graphlets(&g, k).unwrap().all.into_iter().map(|s| s.0).collect();
                prop_assert_eq!(fast, brute_force(&g, k));
            }

            #[test]
            fn buckets_partition(n in 1usize..14, p in 0.1f64..0.8, seed in any::<u64>()) {
                let g = erdos_renyi(n, p, seed);
                let idx = enumerate_graphlets(&g, 3).unwrap();
                let rank: Vec<usize> = (0..n).rev().collect();
                let buckets = idx.by_bucket(&rank);
                let mut all: Vec<usize> = buckets.iter().flatten().copied().collect();
                all.sort_unstable();
                prop_assert_eq!(all, (0..idx.len()).collect::<Vec<_>>());
            }
        }
    }
}
