//! Uniform, epsilon-uniform and random-walk sampling of graphlets (connected
//! induced k-vertex subgraphs), graphlet counting, and an exact oracle for
//! checking all of them on small graphs.

pub mod apx;
pub mod count;
pub mod dd_order;
pub mod error;
pub mod graph;
pub mod oracle;
pub mod rng;
pub mod ugs;
pub mod walk;

pub use error::{Error, Result};
pub use graph::{generators, Graph, Graphlet, LedgerSnapshot, Probe, QueryLedger, Vertex};

/// Evaluates `f(0..count)`, on `jobs` worker threads when `jobs > 1`,
/// returning results in index order.
pub fn par_indexed<T, F>(count: usize, jobs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    if jobs <= 1 {
        return (0..count).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start {jobs} workers: {e}")))?;
    pool.install(|| (0..count).into_par_iter().map(f).collect())
}
