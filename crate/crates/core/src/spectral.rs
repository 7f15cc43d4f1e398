//! Stationary distribution, Poincare constant of the additive
//! reversibilization, and the isoperimetric constant.

use crate::chain::{Chain, ChainMetrics, DENSE_LIMIT};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

/// Exact cut enumeration is limited to this many states (2^21 subsets).
pub const CHEEGER_EXACT_CAP: usize = 22;
/// Required L1 residual of the stationarity equation.
pub const STATIONARY_TOL: f64 = 1e-12;

/// Spectral and isoperimetric summary of a chain.
#[derive(Debug, Clone)]
pub struct SpectralSummary {
    pub pi: Vec<f64>,
    pub p_min: f64,
    pub gamma: f64,
    pub phi: f64,
    /// Exact enumeration (true) or sweep-cut upper bound (false).
    pub phi_exact: bool,
    pub delta: f64,
    pub diameter: u32,
    pub lip_constant_c: f64,
}

impl SpectralSummary {
    pub fn compute(chain: &Chain, metrics: &ChainMetrics) -> Result<SpectralSummary> {
        let pi = stationary_distribution(chain)?;
        let gamma = poincare_constant(chain, &pi)?;
        let (phi, phi_exact) = if chain.n() <= CHEEGER_EXACT_CAP {
            (cheeger_exact(chain, &pi)?, true)
        } else {
            (cheeger_sweep_bound(chain, &pi)?, false)
        };
        let p_min = pi.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(SpectralSummary {
            pi,
            p_min,
            gamma,
            phi,
            phi_exact,
            delta: metrics.delta,
            diameter: metrics.diameter,
            lip_constant_c: metrics.lip_constant_c,
        })
    }
}

/// L1 residual of the stationarity equation pi K = pi.
fn stationarity_residual(chain: &Chain, pi: &[f64]) -> f64 {
    let mut out = vec![0.0; chain.n()];
    chain.apply_left(pi, &mut out);
    out.iter().zip(pi).map(|(a, b)| (a - b).abs()).sum()
}

/// Solve pi K = pi, sum(pi) = 1.
///
/// Dense LU with iterative refinement up to the dense limit; power
/// iteration with Cesaro averaging above it.
pub fn stationary_distribution(chain: &Chain) -> Result<Vec<f64>> {
    let n = chain.n();
    if n <= DENSE_LIMIT {
        // (K^T - I) pi = 0 with the last equation replaced by sum = 1.
        let mut a = chain.to_dense().transpose() - DMatrix::<f64>::identity(n, n);
        for j in 0..n {
            a[(n - 1, j)] = 1.0;
        }
        let mut b = DVector::zeros(n);
        b[n - 1] = 1.0;
        let lu = a.clone().lu();
        let mut x = lu
            .solve(&b)
            .ok_or(Error::SolveFailed { residual: f64::INFINITY })?;
        for _ in 0..10 {
            let pi: Vec<f64> = x.iter().cloned().collect();
            if stationarity_residual(chain, &pi) <= STATIONARY_TOL / 2.0 {
                break;
            }
            let r = &b - &a * &x;
            match lu.solve(&r) {
                Some(dx) => x += dx,
                None => break,
            }
        }
        let mut pi: Vec<f64> = x.iter().map(|&v| v.max(0.0)).collect();
        let sum: f64 = pi.iter().sum();
        for p in pi.iter_mut() {
            *p /= sum;
        }
        let residual = stationarity_residual(chain, &pi);
        if residual > STATIONARY_TOL {
            return Err(Error::SolveFailed { residual });
        }
        Ok(pi)
    } else {
        // Matrix-free fallback: Cesaro-averaged power iteration.
        let mut mu = vec![1.0 / n as f64; n];
        let mut avg = vec![0.0; n];
        let mut scratch = vec![0.0; n];
        let max_rounds = 200_000usize;
        for round in 1..=max_rounds {
            chain.apply_left(&mu, &mut scratch);
            std::mem::swap(&mut mu, &mut scratch);
            let w = 1.0 / round as f64;
            for (a, &m) in avg.iter_mut().zip(mu.iter()) {
                *a += w * (m - *a);
            }
            if round % 64 == 0 {
                let sum: f64 = avg.iter().sum();
                let pi: Vec<f64> = avg.iter().map(|&v| v / sum).collect();
                if stationarity_residual(chain, &pi) <= STATIONARY_TOL {
                    return Ok(pi);
                }
            }
        }
        let sum: f64 = avg.iter().sum();
        let pi: Vec<f64> = avg.iter().map(|&v| v / sum).collect();
        Err(Error::SolveFailed { residual: stationarity_residual(chain, &pi) })
    }
}

/// The pi-adjoint K*(x,y) = pi(y) K(y,x) / pi(x), as sparse rows.
pub fn pi_adjoint(chain: &Chain, pi: &[f64]) -> Vec<Vec<(usize, f64)>> {
    let n = chain.n();
    let mut rows = vec![Vec::new(); n];
    for y in 0..n {
        for &(x, k) in chain.row(y) {
            rows[x].push((y, pi[y] * k / pi[x]));
        }
    }
    for row in rows.iter_mut() {
        row.sort_by_key(|&(j, _)| j);
    }
    rows
}

/// Symmetrized additive reversibilization S = D^{1/2} (K+K*)/2 D^{-1/2},
/// D = diag(pi). S is symmetric and shares the spectrum of (K+K*)/2.
fn symmetrized_reversibilization(chain: &Chain, pi: &[f64]) -> DMatrix<f64> {
    let n = chain.n();
    let adj = pi_adjoint(chain, pi);
    let sqrt_pi: Vec<f64> = pi.iter().map(|p| p.sqrt()).collect();
    let mut s = DMatrix::zeros(n, n);
    for x in 0..n {
        for &(y, k) in chain.row(x) {
            s[(x, y)] += 0.5 * k * sqrt_pi[x] / sqrt_pi[y];
        }
        for &(y, k) in &adj[x] {
            s[(x, y)] += 0.5 * k * sqrt_pi[x] / sqrt_pi[y];
        }
    }
    // Enforce exact symmetry against rounding.
    for x in 0..n {
        for y in (x + 1)..n {
            let m = 0.5 * (s[(x, y)] + s[(y, x)]);
            s[(x, y)] = m;
            s[(y, x)] = m;
        }
    }
    s
}

/// Eigenvalues of S sorted descending, with eigenvectors as columns.
fn reversibilization_eigs(chain: &Chain, pi: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let s = symmetrized_reversibilization(chain, pi);
    let eig = nalgebra::SymmetricEigen::new(s);
    let n = chain.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Poincare constant: gamma = 1 - lambda_2 of the additive
/// reversibilization. Dense symmetric eigensolve up to the dense limit,
/// deflated power iteration above.
pub fn poincare_constant(chain: &Chain, pi: &[f64]) -> Result<f64> {
    let n = chain.n();
    if n <= DENSE_LIMIT {
        let (values, _) = reversibilization_eigs(chain, pi);
        let gamma = 1.0 - values[1];
        if !(gamma > 0.0 && gamma <= 2.0 + 1e-9) {
            return Err(Error::EigenFailed { residual: gamma });
        }
        return Ok(gamma);
    }
    // Deflated power iteration on S + I, deflating the known top
    // eigenvector sqrt(pi).
    let adj = pi_adjoint(chain, pi);
    let sqrt_pi: Vec<f64> = pi.iter().map(|p| p.sqrt()).collect();
    let q_norm: f64 = sqrt_pi.iter().map(|v| v * v).sum::<f64>().sqrt();
    let q: Vec<f64> = sqrt_pi.iter().map(|v| v / q_norm).collect();
    let apply_s = |v: &[f64], out: &mut [f64]| {
        out.fill(0.0);
        for x in 0..n {
            let mut acc = 0.0;
            for &(y, k) in chain.row(x) {
                acc += 0.5 * k * v[y] / sqrt_pi[y];
            }
            for &(y, k) in &adj[x] {
                acc += 0.5 * k * v[y] / sqrt_pi[y];
            }
            out[x] = acc * sqrt_pi[x];
        }
    };
    let mut v: Vec<f64> = (0..n)
        .map(|i| ((i * 2654435761 + 1) % 1000) as f64 / 1000.0 - 0.5)
        .collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let proj = dot(&v, &q);
    for (vi, qi) in v.iter_mut().zip(&q) {
        *vi -= proj * qi;
    }
    let mut sv = vec![0.0; n];
    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;
    for _ in 0..500_000 {
        apply_s(&v, &mut sv);
        for (s, &x) in sv.iter_mut().zip(v.iter()) {
            *s += x; // S + I keeps the spectrum nonnegative
        }
        let proj = dot(&sv, &q);
        for (s, qi) in sv.iter_mut().zip(&q) {
            *s -= proj * qi;
        }
        let norm = dot(&sv, &sv).sqrt();
        if norm == 0.0 {
            break;
        }
        for s in sv.iter_mut() {
            *s /= norm;
        }
        std::mem::swap(&mut v, &mut sv);
        apply_s(&v, &mut sv);
        lambda = dot(&v, &sv);
        residual = sv
            .iter()
            .zip(&v)
            .map(|(s, x)| (s - lambda * x).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= 1e-10 {
            break;
        }
    }
    if residual > 1e-9 {
        return Err(Error::EigenFailed { residual });
    }
    Ok(1.0 - lambda)
}

fn cut_ratio(chain: &Chain, pi: &[f64], in_a: impl Fn(usize) -> bool) -> f64 {
    let n = chain.n();
    let mut flow = 0.0;
    let mut mass = 0.0;
    for x in 0..n {
        if in_a(x) {
            mass += pi[x];
            for &(y, k) in chain.row(x) {
                if !in_a(y) {
                    flow += pi[x] * k;
                }
            }
        }
    }
    flow / mass.min(1.0 - mass)
}

/// Exact isoperimetric constant by enumeration over complement classes.
pub fn cheeger_exact(chain: &Chain, pi: &[f64]) -> Result<f64> {
    let n = chain.n();
    if n > CHEEGER_EXACT_CAP {
        return Err(Error::TooLargeForExact { n, cap: CHEEGER_EXACT_CAP });
    }
    // State n-1 is pinned to the complement, so each {A, A^c} pair is
    // visited once.
    let top: u64 = 1u64 << (n - 1);
    let phi = (1..top)
        .into_par_iter()
        .map(|mask| cut_ratio(chain, pi, |x| mask >> x & 1 == 1))
        .reduce(|| f64::INFINITY, f64::min);
    Ok(phi)
}

/// Sweep-cut upper bound on the isoperimetric constant: best prefix cut of
/// the second-eigenvector ordering.
pub fn cheeger_sweep_bound(chain: &Chain, pi: &[f64]) -> Result<f64> {
    let n = chain.n();
    if n > DENSE_LIMIT {
        return Err(Error::TooLargeForExact { n, cap: DENSE_LIMIT });
    }
    let (values, vectors) = reversibilization_eigs(chain, pi);
    let gamma = 1.0 - values[1];
    if !(gamma > 0.0 && gamma <= 2.0 + 1e-9) {
        return Err(Error::EigenFailed { residual: gamma });
    }
    // Embedding D^{-1/2} u_2 orders the states.
    let embed: Vec<f64> = (0..n).map(|x| vectors[(x, 1)] / pi[x].sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| embed[a].partial_cmp(&embed[b]).unwrap().then(a.cmp(&b)));
    let mut in_a = vec![false; n];
    let mut flow = 0.0;
    let mut mass = 0.0;
    let mut best = f64::INFINITY;
    for &x in order.iter().take(n - 1) {
        for &(y, k) in chain.row(x) {
            if y != x && !in_a[y] {
                flow += pi[x] * k;
            }
        }
        for y in 0..n {
            if in_a[y] {
                flow -= pi[y] * chain.entry(y, x);
            }
        }
        in_a[x] = true;
        mass += pi[x];
        best = best.min(flow / mass.min(1.0 - mass));
    }
    Ok(best)
}
