//! Dense lazy random-walk chains and their spectral and mixing quantities.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Largest chain for which mixing times are computed by matrix powering.
pub const MIXING_GUARD: usize = 5000;

/// Lazy walk `P = (P0 + I) / 2` over an undirected graph given by adjacency
/// lists, with stationary law `π(x) ∝ deg(x)`.
#[derive(Clone, Debug)]
pub struct ChainMatrix {
    pub p: DMatrix<f64>,
    pub pi: Vec<f64>,
}

impl ChainMatrix {
    pub fn lazy_walk(adj: &[Vec<usize>]) -> ChainMatrix {
        let n = adj.len();
        let mut p = DMatrix::zeros(n, n);
        let total: usize = adj.iter().map(Vec::len).sum();
        for (x, list) in adj.iter().enumerate() {
            if list.is_empty() {
                p[(x, x)] = 1.0;
                continue;
            }
            p[(x, x)] = 0.5;
            let w = 0.5 / list.len() as f64;
            for &y in list {
                p[(x, y)] += w;
            }
        }
        let pi = if total == 0 {
            vec![1.0 / n as f64; n]
        } else {
            adj.iter().map(|l| l.len() as f64 / total as f64).collect()
        };
        ChainMatrix { p, pi }
    }

    pub fn from_graph(g: &crate::graph::Graph) -> ChainMatrix {
        let adj: Vec<Vec<usize>> = (0..g.n()).map(|v| g.adj(v).to_vec()).collect();
        Self::lazy_walk(&adj)
    }

    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }

    pub fn pi_min(&self) -> f64 {
        self.pi.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `Q(x, y) = π(x) P(x, y)`.
    pub fn flow(&self, x: usize, y: usize) -> f64 {
        self.pi[x] * self.p[(x, y)]
    }

    pub fn max_row_error(&self) -> f64 {
        (0..self.len()).map(|x| (self.p.row(x).sum() - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn max_reversibility_error(&self) -> f64 {
        let n = self.len();
        let mut worst: f64 = 0.0;
        for x in 0..n {
            for y in 0..n {
                worst = worst.max((self.flow(x, y) - self.flow(y, x)).abs());
            }
        }
        worst
    }

    fn is_irreducible(&self) -> bool {
        let n = self.len();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for (y, s) in seen.iter_mut().enumerate() {
                if !*s && self.p[(x, y)] > 0.0 {
                    *s = true;
                    stack.push(y);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    fn require_ergodic(&self) -> Result<()> {
        if !self.is_irreducible() {
            return Err(Error::NotErgodic("state graph is disconnected".into()));
        }
        if self.pi.iter().any(|&p| p <= 0.0) {
            return Err(Error::NotErgodic("stationary law has zero entries".into()));
        }
        Ok(())
    }

    /// Eigenvalues of `P`, via the symmetric matrix `D^½ P D^-½`, sorted
    /// in decreasing order.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        self.require_ergodic()?;
        if self.max_reversibility_error() > 1e-10 {
            return Err(Error::NotErgodic("chain is not reversible".into()));
        }
        let n = self.len();
        let sq: Vec<f64> = self.pi.iter().map(|p| p.sqrt()).collect();
        let mut a = DMatrix::from_fn(n, n, |x, y| sq[x] * self.p[(x, y)] / sq[y]);
        // Remove rounding asymmetry before the symmetric solver.
        a = (&a + a.transpose()) * 0.5;
        let mut eig: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
        eig.sort_by(|x, y| y.total_cmp(x));
        Ok(eig)
    }
}

/// `τ = 1 / (1 - λ*)` with `λ*` the largest eigenvalue modulus other than
/// the unit eigenvalue. A single state has `τ = 1`.
pub fn relaxation_time(chain: &ChainMatrix) -> Result<f64> {
    let eig = chain.spectrum()?;
    let lambda = eig[1..].iter().map(|l| l.abs()).fold(0.0, f64::max);
    Ok(1.0 / (1.0 - lambda))
}

/// Worst-start total variation distance from `π` of the rows of `m`.
fn worst_tv(m: &DMatrix<f64>, pi: &[f64]) -> f64 {
    (0..pi.len())
        .map(|x| 0.5 * (0..pi.len()).map(|y| (m[(x, y)] - pi[y]).abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Smallest `t` with `max_x TV(P^t(x, ·), π) ≤ eps`. Uses that the worst-start
/// distance is nonincreasing in `t`: doubles until below `eps`, then
/// bisects using the stored powers.
pub fn eps_mixing_time(chain: &ChainMatrix, eps: f64) -> Result<u64> {
    chain.require_ergodic()?;
    let n = chain.len();
    if n > MIXING_GUARD {
        return Err(Error::Guard(format!("{n} states exceed the mixing-time limit of {MIXING_GUARD}")));
    }
    let ident = DMatrix::<f64>::identity(n, n);
    if worst_tv(&ident, &chain.pi) <= eps {
        return Ok(0);
    }
    // powers[j] = P^(2^j)
    let mut powers = vec![chain.p.clone()];
    while worst_tv(powers.last().unwrap(), &chain.pi) > eps {
        if powers.len() > 60 {
            return Err(Error::Guard("mixing time exceeds 2^60 steps".into()));
        }
        let last = powers.last().unwrap();
        powers.push(last * last);
    }
    // Answer lies in (2^(J-1), 2^J] where J = powers.len() - 1.
    let top = powers.len() - 1;
    if top == 0 {
        return Ok(1);
    }
    let mut lo_t: u64 = 1 << (top - 1);
    let mut lo_m = powers[top - 1].clone();
    for j in (0..top - 1).rev() {
        let candidate = &lo_m * &powers[j];
        if worst_tv(&candidate, &chain.pi) > eps {
            lo_t += 1 << j;
            lo_m = candidate;
        }
    }
    Ok(lo_t + 1)
}

/// `Φ(A) = Q(A, Ā) / π(A)`. Requires `A` nonempty with `π(A) ≤ 1/2`.
pub fn conductance_of_cut(chain: &ChainMatrix, set: &[usize]) -> Result<f64> {
    let n = chain.len();
    let mut inside = vec![false; n];
    for &x in set {
        if x >= n {
            return Err(Error::Usage(format!("state {x} out of range")));
        }
        inside[x] = true;
    }
    let vol: f64 = (0..n).filter(|&x| inside[x]).map(|x| chain.pi[x]).sum();
    if set.is_empty() || vol > 0.5 + 1e-12 {
        return Err(Error::Usage("cut side must be nonempty with at most half the volume".into()));
    }
    let mut cut = 0.0;
    for x in (0..n).filter(|&x| inside[x]) {
        for y in (0..n).filter(|&y| !inside[y]) {
            cut += chain.flow(x, y);
        }
    }
    Ok(cut / vol)
}
