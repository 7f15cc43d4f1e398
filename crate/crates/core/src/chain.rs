//! Validated stochastic matrices with symmetric support, and the
//! combinatorial metrics attached to them (support-graph distance,
//! diameter, smallest nonzero entry).

use crate::error::{Error, Result};
use std::collections::VecDeque;

/// Row-sum validation tolerance.
pub const ROW_SUM_TOL: f64 = 1e-12;
/// Rows off by at most this much may be renormalized when requested.
pub const RENORMALIZE_TOL: f64 = 1e-9;
/// Above this state count, dense n-by-n conversions are refused and
/// matrix-free paths are used instead.
pub const DENSE_LIMIT: usize = 4096;

/// A validated row-stochastic matrix with symmetric support.
///
/// Rows are stored sparsely as sorted `(col, value)` pairs; every chain in
/// scope here is sparse by construction (each row has at most `1/delta`
/// nonzero entries).
#[derive(Debug, Clone)]
pub struct Chain {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
    labels: Option<Vec<String>>,
}

/// Combinatorial metrics of a chain.
#[derive(Debug, Clone)]
pub struct ChainMetrics {
    /// Smallest nonzero entry of K.
    pub delta: f64,
    /// Support-graph distance matrix, row-major.
    pub dist: Vec<u32>,
    pub diameter: u32,
    /// The heat-kernel Lipschitz constant 3*log(e/delta).
    pub lip_constant_c: f64,
    n: usize,
}

impl ChainMetrics {
    pub fn dist(&self, x: usize, y: usize) -> u32 {
        self.dist[x * self.n + y]
    }
}

impl Chain {
    /// Validate a dense square matrix and build a `Chain`.
    ///
    /// Checks, in order: shape, entry signs, row sums, symmetric support,
    /// connectivity of the support graph. With `renormalize`, rows whose sum
    /// is off by at most `RENORMALIZE_TOL` are rescaled instead of rejected.
    pub fn from_dense(raw: &[Vec<f64>], renormalize: bool) -> Result<Chain> {
        let n = raw.len();
        for (i, row) in raw.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare { rows: n, cols: raw[i].len() });
            }
        }
        let rows: Vec<Vec<(usize, f64)>> = raw
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(j, &v)| (j, v))
                    .collect()
            })
            .collect();
        Chain::from_sparse_rows(n, rows, renormalize)
    }

    /// Validate coordinate-sparse rows (unsorted, duplicates not allowed).
    pub fn from_sparse_rows(
        n: usize,
        mut rows: Vec<Vec<(usize, f64)>>,
        renormalize: bool,
    ) -> Result<Chain> {
        if n < 2 {
            return Err(Error::TooFewStates(n));
        }
        if rows.len() != n {
            return Err(Error::NotSquare { rows: rows.len(), cols: n });
        }
        for (i, row) in rows.iter_mut().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            for &(j, v) in row.iter() {
                if j >= n {
                    return Err(Error::NotSquare { rows: n, cols: j + 1 });
                }
                if v < 0.0 || !v.is_finite() {
                    return Err(Error::NegativeEntry { row: i, col: j, value: v });
                }
            }
            row.retain(|&(_, v)| v != 0.0);
            let sum: f64 = row.iter().map(|&(_, v)| v).sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                if renormalize && (sum - 1.0).abs() <= RENORMALIZE_TOL && sum > 0.0 {
                    for e in row.iter_mut() {
                        e.1 /= sum;
                    }
                } else {
                    return Err(Error::RowSum { row: i, sum });
                }
            }
        }
        // Symmetric support: K(x,y) > 0 iff K(y,x) > 0.
        for x in 0..n {
            for &(y, _) in &rows[x] {
                if rows[y].binary_search_by_key(&x, |&(j, _)| j).is_err() {
                    return Err(Error::AsymmetricSupport { x, y });
                }
            }
        }
        let chain = Chain { n, rows, labels: None };
        let components = chain.components();
        if components.len() > 1 {
            return Err(Error::NotIrreducible { components });
        }
        Ok(chain)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, x: usize) -> &[(usize, f64)] {
        &self.rows[x]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn set_labels(&mut self, labels: Vec<String>) -> Result<()> {
        if labels.len() != self.n {
            return Err(Error::InvalidParams(format!(
                "{} labels for {} states",
                labels.len(),
                self.n
            )));
        }
        self.labels = Some(labels);
        Ok(())
    }

    pub fn entry(&self, x: usize, y: usize) -> f64 {
        match self.rows[x].binary_search_by_key(&y, |&(j, _)| j) {
            Ok(k) => self.rows[x][k].1,
            Err(_) => 0.0,
        }
    }

    /// Row vector times K: `out(y) = sum_x v(x) K(x,y)`.
    pub fn apply_left(&self, v: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (x, row) in self.rows.iter().enumerate() {
            let vx = v[x];
            if vx != 0.0 {
                for &(y, k) in row {
                    out[y] += vx * k;
                }
            }
        }
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for (x, row) in self.rows.iter().enumerate() {
            for &(y, v) in row {
                m[(x, y)] = v;
            }
        }
        m
    }

    /// Connected components of the support graph (symmetric support makes
    /// weak connectivity sufficient).
    fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut comps = Vec::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(x) = queue.pop_front() {
                for &(y, _) in &self.rows[x] {
                    if !seen[y] {
                        seen[y] = true;
                        comp.push(y);
                        queue.push_back(y);
                    }
                }
            }
            comps.push(comp);
        }
        comps
    }

    /// BFS distances, diameter, delta, and the Lipschitz constant c.
    pub fn metrics(&self) -> ChainMetrics {
        let n = self.n;
        let mut delta = f64::INFINITY;
        for row in &self.rows {
            for &(_, v) in row {
                if v < delta {
                    delta = v;
                }
            }
        }
        let mut dist = vec![u32::MAX; n * n];
        for s in 0..n {
            let d = &mut dist[s * n..(s + 1) * n];
            d[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(x) = queue.pop_front() {
                let dx = d[x];
                for &(y, _) in &self.rows[x] {
                    if d[y] == u32::MAX {
                        d[y] = dx + 1;
                        queue.push_back(y);
                    }
                }
            }
        }
        let diameter = *dist.iter().max().unwrap();
        ChainMetrics {
            delta,
            dist,
            diameter,
            lip_constant_c: 3.0 * (1.0 - delta.ln()),
            n,
        }
    }

    /// Lipschitz norm of `f` with respect to the support-graph metric.
    ///
    /// The sup over all pairs is attained on support-adjacent pairs
    /// (triangle inequality along geodesics), so only edges are scanned.
    pub fn lipschitz_norm(&self, f: &[f64]) -> Result<f64> {
        for (x, &v) in f.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { state: x });
            }
        }
        let mut best: f64 = 0.0;
        for (x, row) in self.rows.iter().enumerate() {
            for &(y, _) in row {
                if y != x {
                    best = best.max((f[x] - f[y]).abs());
                }
            }
        }
        Ok(best)
    }
}
