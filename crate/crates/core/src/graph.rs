//! Simple undirected graphs in compressed adjacency form, with the unit-cost
//! query model (neighbor / pair / degree) and per-run query accounting.

use std::collections::VecDeque;
use std::fmt;
use std::io::BufRead;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Error;

pub type Vertex = usize;

/// Counters for the three access-model queries.
///
/// Every metered query bills exactly one unit regardless of the work done
/// behind it (a pair query is a binary search internally).
#[derive(Debug, Default)]
pub struct QueryLedger {
    neighbor: AtomicU64,
    pair: AtomicU64,
    degree: AtomicU64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LedgerSnapshot {
    pub neighbor_queries: u64,
    pub pair_queries: u64,
    pub degree_queries: u64,
}

impl LedgerSnapshot {
    pub fn total(&self) -> u64 {
        self.neighbor_queries + self.pair_queries + self.degree_queries
    }

    pub fn since(&self, earlier: &LedgerSnapshot) -> LedgerSnapshot {
        LedgerSnapshot {
            neighbor_queries: self.neighbor_queries - earlier.neighbor_queries,
            pair_queries: self.pair_queries - earlier.pair_queries,
            degree_queries: self.degree_queries - earlier.degree_queries,
        }
    }
}

impl QueryLedger {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn charge_neighbor(&self, count: u64) {
        self.neighbor.fetch_add(count, Ordering::Relaxed);
    }

    #[inline]
    pub fn charge_pair(&self, count: u64) {
        self.pair.fetch_add(count, Ordering::Relaxed);
    }

    #[inline]
    pub fn charge_degree(&self, count: u64) {
        self.degree.fetch_add(count, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> LedgerSnapshot {
        LedgerSnapshot {
            neighbor_queries: self.neighbor.load(Ordering::Relaxed),
            pair_queries: self.pair.load(Ordering::Relaxed),
            degree_queries: self.degree.load(Ordering::Relaxed),
        }
    }

    /// Adds the counts of another (typically per-worker) ledger.
    pub fn absorb(&self, other: &QueryLedger) {
        let s = other.snapshot();
        self.charge_neighbor(s.neighbor_queries);
        self.charge_pair(s.pair_queries);
        self.charge_degree(s.degree_queries);
    }

    pub fn reset(&self) {
        self.neighbor.store(0, Ordering::Relaxed);
        self.pair.store(0, Ordering::Relaxed);
        self.degree.store(0, Ordering::Relaxed);
    }
}

/// Immutable simple undirected graph on vertices `0..n`.
///
/// Adjacency lists are strictly increasing. The graph carries its own
/// ledger; [`Graph::probe_with`] gives a view billing a separate one.
#[derive(Debug)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<Vertex>,
    ledger: QueryLedger,
}

impl Clone for Graph {
    fn clone(&self) -> Self {
        Graph {
            offsets: self.offsets.clone(),
            targets: self.targets.clone(),
            ledger: QueryLedger::new(),
        }
    }
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.offsets == other.offsets && self.targets == other.targets
    }
}

impl Graph {
    /// Builds a graph from an edge list, rejecting self-loops, duplicates and
    /// out-of-range endpoints.
    pub fn from_edges(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Graph, Error> {
        let mut adj: Vec<Vec<Vertex>> = vec![Vec::new(); n];
        for (idx, &(u, v)) in edges.iter().enumerate() {
            let line = idx + 1;
            if u >= n || v >= n {
                return Err(Error::VertexOutOfRange { line, vertex: u.max(v), n });
            }
            if u == v {
                return Err(Error::SelfLoop { line, vertex: u });
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                let line = edges
                    .iter()
                    .enumerate()
                    .filter(|(_, &(a, b))| (a, b) == (u, w[0]) || (b, a) == (u, w[0]))
                    .nth(1)
                    .map(|(i, _)| i + 1)
                    .unwrap_or(0);
                return Err(Error::DuplicateEdge { line, u: u.min(w[0]), v: u.max(w[0]) });
            }
        }
        Ok(Self::from_sorted_lists(adj))
    }

    /// Builds from adjacency lists that are already sorted, symmetric and
    /// free of loops and duplicates. Used by the generators.
    fn from_sorted_lists(adj: Vec<Vec<Vertex>>) -> Graph {
        let mut offsets = Vec::with_capacity(adj.len() + 1);
        offsets.push(0);
        let mut targets = Vec::with_capacity(adj.iter().map(Vec::len).sum());
        for list in adj {
            targets.extend_from_slice(&list);
            offsets.push(targets.len());
        }
        Graph { offsets, targets, ledger: QueryLedger::new() }
    }

    /// Parses the edge-list text format: two whitespace-separated 0-based ids
    /// per line, `#` comments. A comment of the form `# n <count>` declares
    /// the vertex count; otherwise `n` is one more than the largest id.
    pub fn load_edge_list<R: BufRead>(reader: R) -> Result<Graph, Error> {
        let mut declared: Option<usize> = None;
        let mut edges = Vec::new();
        let mut lines = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::Io(e.to_string()))?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(comment) = trimmed.strip_prefix('#') {
                let mut it = comment.split_whitespace();
                if let (Some("n"), Some(count), None) = (it.next(), it.next(), it.next()) {
                    let count = count.parse::<usize>().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("bad vertex count '{count}'"),
                    })?;
                    declared = Some(count);
                }
                continue;
            }
            let mut it = trimmed.split_whitespace();
            let (a, b) = match (it.next(), it.next(), it.next()) {
                (Some(a), Some(b), None) => (a, b),
                _ => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "expected two vertex ids".into(),
                    })
                }
            };
            let parse = |tok: &str| {
                tok.parse::<usize>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("'{tok}' is not a non-negative integer"),
                })
            };
            let (u, v) = (parse(a)?, parse(b)?);
            if u == v {
                return Err(Error::SelfLoop { line: line_no, vertex: u });
            }
            if let Some(n) = declared {
                if u >= n || v >= n {
                    return Err(Error::VertexOutOfRange { line: line_no, vertex: u.max(v), n });
                }
            }
            edges.push((u, v));
            lines.push(line_no);
        }
        let n = declared.unwrap_or_else(|| edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0));
        // from_edges reports positions within `edges`; map them back to file lines.
        Graph::from_edges(n, &edges).map_err(|e| e.remap_line(|i| lines.get(i.wrapping_sub(1)).copied().unwrap_or(i)))
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("# n {}\n", self.n());
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.targets.len() / 2
    }

    /// Unmetered degree, for oracle code and bookkeeping.
    #[inline]
    pub fn deg(&self, v: Vertex) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Unmetered sorted adjacency list.
    #[inline]
    pub fn adj(&self, v: Vertex) -> &[Vertex] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        if u == v {
            return false;
        }
        let (a, b) = if self.deg(u) <= self.deg(v) { (u, v) } else { (v, u) };
        self.adj(a).binary_search(&b).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        (0..self.n()).flat_map(move |u| self.adj(u).iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n()).map(|v| self.deg(v)).collect()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n()).map(|v| self.deg(v)).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n()).map(|v| self.deg(v)).min().unwrap_or(0)
    }

    pub fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }

    /// Metered view billing the graph's own ledger.
    pub fn probe(&self) -> Probe<'_> {
        Probe { graph: self, ledger: &self.ledger }
    }

    /// Metered view billing `ledger`.
    pub fn probe_with<'a>(&'a self, ledger: &'a QueryLedger) -> Probe<'a> {
        Probe { graph: self, ledger }
    }

    /// i-th (1-based) smallest neighbor of `v`, or `None` when `d_v < i`.
    pub fn neighbor(&self, v: Vertex, i: usize) -> Result<Option<Vertex>, Error> {
        self.check(v)?;
        Ok(self.probe().neighbor(v, i))
    }

    pub fn pair(&self, u: Vertex, v: Vertex) -> Result<bool, Error> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.probe().pair(u, v))
    }

    pub fn degree(&self, v: Vertex) -> Result<usize, Error> {
        self.check(v)?;
        Ok(self.probe().degree(v))
    }

    fn check(&self, v: Vertex) -> Result<(), Error> {
        if v >= self.n() {
            Err(Error::Usage(format!("vertex {v} out of range (n = {})", self.n())))
        } else {
            Ok(())
        }
    }

    /// Whether `G[set]` is connected (the empty set counts as connected).
    pub fn induces_connected(&self, set: &[Vertex]) -> bool {
        if set.len() <= 1 {
            return true;
        }
        let mut seen = vec![false; set.len()];
        seen[0] = true;
        let mut stack = vec![0usize];
        let mut reached = 1;
        while let Some(i) = stack.pop() {
            for j in 0..set.len() {
                if !seen[j] && self.has_edge(set[i], set[j]) {
                    seen[j] = true;
                    reached += 1;
                    stack.push(j);
                }
            }
        }
        reached == set.len()
    }

    /// Component label per vertex (labels are 0..components).
    pub fn components(&self) -> Vec<usize> {
        let n = self.n();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &w in self.adj(u) {
                    if label[w] == usize::MAX {
                        label[w] = next;
                        queue.push_back(w);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.n() <= 1 || self.components().iter().all(|&c| c == 0)
    }

    /// Relabels vertices: vertex `v` becomes `perm[v]`.
    pub fn permuted(&self, perm: &[Vertex]) -> Graph {
        let edges: Vec<_> = self.edges().map(|(u, v)| (perm[u], perm[v])).collect();
        Graph::from_edges(self.n(), &edges).expect("permutation of a simple graph is simple")
    }
}

/// Metered access to a [`Graph`]: the neighbor / pair / degree queries of
/// the access model, each billed one unit to the attached ledger.
#[derive(Clone, Copy)]
pub struct Probe<'a> {
    graph: &'a Graph,
    ledger: &'a QueryLedger,
}

impl<'a> Probe<'a> {
    pub fn graph(&self) -> &'a Graph {
        self.graph
    }

    pub fn ledger(&self) -> &'a QueryLedger {
        self.ledger
    }

    #[inline]
    pub fn neighbor(&self, v: Vertex, i: usize) -> Option<Vertex> {
        self.ledger.charge_neighbor(1);
        let adj = self.graph.adj(v);
        if i == 0 || i > adj.len() {
            None
        } else {
            Some(adj[i - 1])
        }
    }

    #[inline]
    pub fn pair(&self, u: Vertex, v: Vertex) -> bool {
        self.ledger.charge_pair(1);
        self.graph.has_edge(u, v)
    }

    #[inline]
    pub fn degree(&self, v: Vertex) -> usize {
        self.ledger.charge_degree(1);
        self.graph.deg(v)
    }

    /// Uniform random neighbor of `v` (one degree query, one neighbor query).
    #[inline]
    pub fn random_neighbor<R: Rng + ?Sized>(&self, v: Vertex, rng: &mut R) -> Option<Vertex> {
        let d = self.degree(v);
        if d == 0 {
            return None;
        }
        self.neighbor(v, rng.random_range(1..=d))
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, m={})", self.n(), self.m())
    }
}

/// A k-graphlet: strictly increasing vertex ids inducing a connected subgraph.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Graphlet(pub Vec<Vertex>);

impl Graphlet {
    /// Sorts `vertices`; the caller guarantees connectivity.
    pub fn from_unsorted(mut vertices: Vec<Vertex>) -> Graphlet {
        vertices.sort_unstable();
        Graphlet(vertices)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for Graphlet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub mod generators {
    //! Deterministic test and benchmark graphs.
    use super::*;

    /// `K_{1,leaves}` with center 0.
    pub fn star(leaves: usize) -> Graph {
        let edges: Vec<_> = (1..=leaves).map(|l| (0, l)).collect();
        Graph::from_edges(leaves + 1, &edges).unwrap()
    }

    pub fn path(n: usize) -> Graph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    pub fn clique(n: usize) -> Graph {
        let adj = (0..n).map(|u| (0..n).filter(|&v| v != u).collect()).collect();
        Graph::from_sorted_lists(adj)
    }

    pub fn cycle(n: usize) -> Graph {
        assert!(n >= 3);
        let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        edges.push((n - 1, 0));
        Graph::from_edges(n, &edges).unwrap()
    }

    pub fn empty(n: usize) -> Graph {
        Graph::from_sorted_lists(vec![Vec::new(); n])
    }

    /// G(n, p), each pair included independently; deterministic in `seed`.
    pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Graph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut adj: Vec<Vec<Vertex>> = vec![Vec::new(); n];
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.random::<f64>() < p {
                    adj[u].push(v);
                    adj[v].push(u);
                }
            }
        }
        adj.iter_mut().for_each(|l| l.sort_unstable());
        Graph::from_sorted_lists(adj)
    }

    /// Two cliques of order `clique_order` joined by a fat path: the
    /// Cartesian product of a path on `2(k-1)` layers with a clique of order
    /// `path_width`. Each end clique is completely joined to its adjacent end
    /// layer. `n = 2*clique_order + 2(k-1)*path_width`.
    pub fn fat_lollipop(clique_order: usize, path_width: usize, k: usize) -> Graph {
        assert!(clique_order >= 1 && path_width >= 1 && k >= 2);
        let layers = 2 * (k - 1);
        let n = 2 * clique_order + layers * path_width;
        let left = |i: usize| i;
        let right = |i: usize| clique_order + i;
        let cell = |layer: usize, j: usize| 2 * clique_order + layer * path_width + j;
        let mut edges = Vec::new();
        for a in 0..clique_order {
            for b in (a + 1)..clique_order {
                edges.push((left(a), left(b)));
                edges.push((right(a), right(b)));
            }
        }
        for layer in 0..layers {
            for a in 0..path_width {
                for b in (a + 1)..path_width {
                    edges.push((cell(layer, a), cell(layer, b)));
                }
                if layer + 1 < layers {
                    edges.push((cell(layer, a), cell(layer + 1, a)));
                }
            }
        }
        for a in 0..clique_order {
            for j in 0..path_width {
                edges.push((left(a), cell(0, j)));
                edges.push((right(a), cell(layers - 1, j)));
            }
        }
        Graph::from_edges(n, &edges).unwrap()
    }

    /// Parses generator specs such as `er:30,0.25,7`, `star:3`, `path:4`,
    /// `clique:5`, `cycle:6`, `lollipop:3,2,3`.
    pub fn from_spec(spec: &str) -> Result<Graph, Error> {
        let bad = || Error::Usage(format!("bad generator spec '{spec}'"));
        let (name, params) = spec.split_once(':').ok_or_else(bad)?;
        let nums: Vec<&str> = params.split(',').map(str::trim).collect();
        let int = |i: usize| nums.get(i).and_then(|s| s.parse::<usize>().ok()).ok_or_else(bad);
        match name {
            "star" => Ok(star(int(0)?)),
            "path" => Ok(path(int(0)?)),
            "clique" => Ok(clique(int(0)?)),
            "cycle" => Ok(cycle(int(0)?)),
            "empty" => Ok(empty(int(0)?)),
            "lollipop" => Ok(fat_lollipop(int(0)?, int(1)?, int(2)?)),
            "er" => {
                let p = nums.get(1).and_then(|s| s.parse::<f64>().ok()).ok_or_else(bad)?;
                let seed = nums.get(2).and_then(|s| s.parse::<u64>().ok()).unwrap_or(0);
                Ok(erdos_renyi(int(0)?, p, seed))
            }
            _ => Err(bad()),
        }
    }
}
