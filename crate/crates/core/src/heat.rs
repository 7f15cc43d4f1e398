//! Heat-kernel rows P_t(o,.) by uniformization: Poisson-weighted powers of
//! K, truncated at a certified tail mass.

use crate::chain::Chain;
use crate::error::{Error, Result};

/// Hard cap on the number of uniformization terms.
pub const MAX_TERMS: usize = 1_000_000;
/// Default truncation tolerance for chains up to the dense limit.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default truncation tolerance above the dense limit.
pub const DEFAULT_TOL_LARGE: f64 = 1e-10;

/// A probability vector carrying the certified truncation defect.
#[derive(Debug, Clone)]
pub struct Distribution {
    pub probs: Vec<f64>,
    /// Certified bound on `1 - sum(probs)` from the Poisson tail.
    pub mass_defect: f64,
}

impl Distribution {
    pub fn point_mass(n: usize, at: usize) -> Distribution {
        let mut probs = vec![0.0; n];
        probs[at] = 1.0;
        Distribution { probs, mass_defect: 0.0 }
    }

    pub fn from_probs(probs: Vec<f64>) -> Distribution {
        Distribution { probs, mass_defect: 0.0 }
    }
}

/// One row of P_t = e^{t(K-I)} via the Poisson series.
///
/// The truncation index N is the smallest integer whose Poisson(t) upper
/// tail is at most `tol`; the tail mass is reported as `mass_defect`.
/// Summation order is fixed (ascending term index, ascending state), so the
/// result is bitwise deterministic.
pub fn heat_kernel_row(chain: &Chain, origin: usize, t: f64, tol: f64) -> Result<Distribution> {
    debug_assert!(t >= 0.0, "time must be nonnegative");
    debug_assert!(tol > 0.0 && tol <= 1e-6);
    let n = chain.n();
    if t == 0.0 {
        return Ok(Distribution::point_mass(n, origin));
    }
    let log_t = t.ln();
    let mut v = vec![0.0; n];
    v[origin] = 1.0;
    let mut scratch = vec![0.0; n];
    let mut acc = vec![0.0; n];
    // Log-space weight recurrence keeps large t from underflowing at term 0.
    let mut log_w = -t;
    // Kahan-compensated cumulative Poisson mass.
    let mut cum = 0.0;
    let mut comp = 0.0;
    let mut k = 0usize;
    loop {
        let w = log_w.exp();
        if w > 0.0 {
            for (a, &x) in acc.iter_mut().zip(v.iter()) {
                *a += w * x;
            }
        }
        let y = w - comp;
        let s = cum + y;
        comp = (s - cum) - y;
        cum = s;
        if 1.0 - cum <= tol {
            break;
        }
        if k >= MAX_TERMS {
            return Err(Error::ToleranceUnreachable { t, cap: MAX_TERMS });
        }
        chain.apply_left(&v, &mut scratch);
        std::mem::swap(&mut v, &mut scratch);
        k += 1;
        log_w += log_t - (k as f64).ln();
    }
    let mass_defect = (1.0 - cum).max(0.0);
    debug_assert!(mass_defect <= tol);
    Ok(Distribution { probs: acc, mass_defect })
}

/// All rows of P_t, computed independently.
pub fn heat_kernel_all(chain: &Chain, t: f64, tol: f64) -> Result<Vec<Distribution>> {
    use rayon::prelude::*;
    (0..chain.n())
        .into_par_iter()
        .map(|o| heat_kernel_row(chain, o, t, tol))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn lazy_two_state() -> Chain {
        Chain::from_dense(&[vec![0.5, 0.5], vec![0.5, 0.5]], false).unwrap()
    }

    fn cycle(n: usize) -> Chain {
        let mut rows = vec![Vec::new(); n];
        for x in 0..n {
            rows[x].push(((x + 1) % n, 0.5));
            rows[x].push(((x + n - 1) % n, 0.5));
        }
        Chain::from_sparse_rows(n, rows, false).unwrap()
    }

    #[test]
    fn time_zero_is_point_mass() {
        let d = heat_kernel_row(&lazy_two_state(), 1, 0.0, 1e-12).unwrap();
        assert_eq!(d.probs, vec![0.0, 1.0]);
        assert_eq!(d.mass_defect, 0.0);
    }

    // Closed form: P_t(0,0) = 1/2 + e^{-t}/2 for the lazy 2-state chain.
    #[test]
    fn lazy_two_state_closed_form() {
        let t = 2f64.ln();
        let d = heat_kernel_row(&lazy_two_state(), 0, t, 1e-12).unwrap();
        assert_abs_diff_eq!(d.probs[0], 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(d.probs[1], 0.25, epsilon = 1e-12);
        let all = heat_kernel_all(&lazy_two_state(), t, 1e-12).unwrap();
        assert_abs_diff_eq!(all[1].probs[1], 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(all[1].probs[0], 0.25, epsilon = 1e-12);
    }

    #[test]
    fn three_cycle_converges_to_uniform() {
        let d = heat_kernel_row(&cycle(3), 0, 50.0, 1e-12).unwrap();
        for p in &d.probs {
            assert_abs_diff_eq!(*p, 1.0 / 3.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn mass_defect_certified() {
        for t in [0.1, 1.0, 7.3, 80.0, 700.0] {
            let d = heat_kernel_row(&cycle(5), 2, t, 1e-12).unwrap();
            assert!(d.mass_defect <= 1e-12);
            let sum: f64 = d.probs.iter().sum();
            assert!(sum <= 1.0 + 1e-12 && sum >= 1.0 - 1e-11);
        }
    }

    // P_{s+t}(o,.) equals the composition of P_s and P_t rows.
    #[test]
    fn semigroup_law() {
        let chain = cycle(5);
        let tol = 1e-12;
        for (s, t) in [(0.5, 0.5), (0.3, 1.7), (2.0, 3.0)] {
            let direct = heat_kernel_row(&chain, 0, s + t, tol).unwrap();
            let ps = heat_kernel_row(&chain, 0, s, tol).unwrap();
            let pt_rows = heat_kernel_all(&chain, t, tol).unwrap();
            let mut composed = vec![0.0; 5];
            for (x, &w) in ps.probs.iter().enumerate() {
                for (y, c) in composed.iter_mut().enumerate() {
                    *c += w * pt_rows[x].probs[y];
                }
            }
            let tv: f64 = direct
                .probs
                .iter()
                .zip(&composed)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
                / 2.0;
            assert!(tv <= 10.0 * tol, "semigroup violation {tv}");
        }
    }

    // Spectral oracle on a symmetric chain: P_t = U exp(-t(1-L)) U^T.
    #[test]
    fn matches_eigendecomposition_oracle() {
        let chain = cycle(12);
        let n = chain.n();
        let dense = chain.to_dense();
        let sym = (&dense + dense.transpose()) * 0.5;
        let eig = nalgebra::SymmetricEigen::new(sym);
        for t in [0.3, 2.0, 9.0] {
            let mut oracle = nalgebra::DMatrix::zeros(n, n);
            for k in 0..n {
                let u = eig.eigenvectors.column(k);
                let scale = (-(t) * (1.0 - eig.eigenvalues[k])).exp();
                oracle += scale * &u * u.transpose();
            }
            let rows = heat_kernel_all(&chain, t, 1e-13).unwrap();
            for x in 0..n {
                for y in 0..n {
                    assert_abs_diff_eq!(rows[x].probs[y], oracle[(x, y)], epsilon = 1e-9);
                }
            }
        }
    }
}
