//! The analysis engine: a chain bundled with its metrics, stationary
//! distribution, and spectral summary, exposing worst-case profiles, the
//! mixing-time solver, and the entropy-dissipation identity.

use crate::chain::{Chain, ChainMetrics, DENSE_LIMIT};
use crate::error::{Error, Result};
use crate::heat::{self, Distribution};
use crate::spectral::SpectralSummary;
use crate::stats::{kl_divergence, tv_distance, varentropy, MixingTimeResult, ProfilePoint};
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::Mutex;

pub struct Analyzer {
    chain: Chain,
    metrics: ChainMetrics,
    spectral: SpectralSummary,
    heat_tol: f64,
    /// Absolute bisection tolerance; `None` means 1e-8 * max(1, T_hi).
    t_tol: Option<f64>,
    /// Origin subset for worst-case maxima; `None` means all states.
    origins: Option<Vec<usize>>,
    tmix_cache: Mutex<HashMap<u64, MixingTimeResult>>,
}

impl Analyzer {
    pub fn new(chain: Chain) -> Result<Analyzer> {
        let metrics = chain.metrics();
        let spectral = SpectralSummary::compute(&chain, &metrics)?;
        let heat_tol = if chain.n() <= DENSE_LIMIT {
            heat::DEFAULT_TOL
        } else {
            heat::DEFAULT_TOL_LARGE
        };
        Ok(Analyzer {
            chain,
            metrics,
            spectral,
            heat_tol,
            t_tol: None,
            origins: None,
            tmix_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn chain(&self) -> &Chain {
        &self.chain
    }
    pub fn metrics(&self) -> &ChainMetrics {
        &self.metrics
    }
    pub fn spectral(&self) -> &SpectralSummary {
        &self.spectral
    }
    pub fn pi(&self) -> &[f64] {
        &self.spectral.pi
    }
    pub fn heat_tol(&self) -> f64 {
        self.heat_tol
    }

    pub fn with_heat_tol(mut self, tol: f64) -> Analyzer {
        self.heat_tol = tol;
        self.tmix_cache.lock().unwrap().clear();
        self
    }

    pub fn with_t_tol(mut self, t_tol: f64) -> Analyzer {
        self.t_tol = Some(t_tol);
        self.tmix_cache.lock().unwrap().clear();
        self
    }

    pub fn with_origins(mut self, origins: Vec<usize>) -> Result<Analyzer> {
        for &o in &origins {
            if o >= self.chain.n() {
                return Err(Error::InvalidParams(format!("origin {o} out of range")));
            }
        }
        self.origins = Some(origins);
        self.tmix_cache.lock().unwrap().clear();
        Ok(self)
    }

    fn origin_list(&self) -> Vec<usize> {
        match &self.origins {
            Some(v) => v.clone(),
            None => (0..self.chain.n()).collect(),
        }
    }

    pub fn row(&self, origin: usize, t: f64) -> Result<Distribution> {
        heat::heat_kernel_row(&self.chain, origin, t, self.heat_tol)
    }

    /// Worst-case total variation distance to stationarity at time t.
    pub fn worst_dtv(&self, t: f64) -> Result<f64> {
        let pi = Distribution::from_probs(self.spectral.pi.clone());
        let per: Result<Vec<f64>> = self
            .origin_list()
            .into_par_iter()
            .map(|o| self.row(o, t).map(|mu| tv_distance(&mu, &pi)))
            .collect();
        Ok(per?.into_iter().fold(0.0, f64::max))
    }

    /// Worst-case relative entropy at time t.
    pub fn worst_dkl(&self, t: f64) -> Result<f64> {
        let per: Result<Vec<f64>> = self
            .origin_list()
            .into_par_iter()
            .map(|o| self.row(o, t).map(|mu| kl_divergence(&mu, self.pi())))
            .collect();
        Ok(per?.into_iter().fold(0.0, f64::max))
    }

    /// Worst-case varentropy at time t.
    pub fn worst_vkl(&self, t: f64) -> Result<f64> {
        let per: Result<Vec<f64>> = self
            .origin_list()
            .into_par_iter()
            .map(|o| self.row(o, t).map(|mu| varentropy(&mu, self.pi())))
            .collect();
        Ok(per?.into_iter().fold(0.0, f64::max))
    }

    /// All three statistics with argmax origins (smallest index wins ties).
    pub fn worst_profile(&self, t: f64) -> Result<ProfilePoint> {
        let origins = self.origin_list();
        let pi_dist = Distribution::from_probs(self.spectral.pi.clone());
        let per: Result<Vec<(f64, f64, f64)>> = origins
            .par_iter()
            .map(|&o| {
                let mu = self.row(o, t)?;
                Ok((
                    tv_distance(&mu, &pi_dist),
                    kl_divergence(&mu, self.pi()),
                    varentropy(&mu, self.pi()),
                ))
            })
            .collect();
        let per = per?;
        let mut point = ProfilePoint {
            t,
            dtv: f64::NEG_INFINITY,
            dkl: f64::NEG_INFINITY,
            vkl: f64::NEG_INFINITY,
            argmax_tv: 0,
            argmax_kl: 0,
            argmax_vkl: 0,
        };
        for (&o, &(tv, kl, v)) in origins.iter().zip(&per) {
            if tv > point.dtv {
                point.dtv = tv;
                point.argmax_tv = o;
            }
            if kl > point.dkl {
                point.dkl = kl;
                point.argmax_kl = o;
            }
            if v > point.vkl {
                point.vkl = v;
                point.argmax_vkl = o;
            }
        }
        Ok(point)
    }

    /// Closed-form mixing-time upper bound from gamma and p, used as the
    /// bisection bracket.
    pub fn mixing_time_upper_bound(&self, epsilon: f64) -> f64 {
        let s = self.spectral();
        (1.0 / (4.0 * s.p_min * epsilon * epsilon)).ln() / (2.0 * s.gamma)
    }

    fn t_tol_for(&self, t_hi: f64) -> f64 {
        self.t_tol.unwrap_or(1e-8 * t_hi.max(1.0))
    }

    /// First time the worst-case TV distance drops to epsilon, by bisection
    /// (valid since worst-case TV is non-increasing in continuous time).
    pub fn mixing_time(&self, epsilon: f64) -> Result<MixingTimeResult> {
        debug_assert!(epsilon > 0.0 && epsilon < 1.0);
        if let Some(hit) = self.tmix_cache.lock().unwrap().get(&epsilon.to_bits()) {
            return Ok(*hit);
        }
        let d0 = self.worst_dtv(0.0)?;
        let result = if d0 <= epsilon {
            MixingTimeResult { epsilon, t_mix: 0.0, bracket_width: 0.0, dtv_at_t: d0 }
        } else {
            let mut hi = self.mixing_time_upper_bound(epsilon).max(1.0);
            let mut doublings = 0;
            let mut dtv_hi = self.worst_dtv(hi)?;
            while dtv_hi > epsilon {
                doublings += 1;
                if doublings > 60 {
                    return Err(Error::BracketFailed { t_hi: hi, dtv: dtv_hi, epsilon });
                }
                hi *= 2.0;
                dtv_hi = self.worst_dtv(hi)?;
            }
            let tol = self.t_tol_for(hi);
            let mut lo = 0.0;
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if self.worst_dtv(mid)? <= epsilon {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let t_mix = 0.5 * (lo + hi);
            MixingTimeResult {
                epsilon,
                t_mix,
                bracket_width: 0.5 * (hi - lo),
                dtv_at_t: self.worst_dtv(t_mix)?,
            }
        };
        self.tmix_cache.lock().unwrap().insert(epsilon.to_bits(), result);
        Ok(result)
    }

    /// log(P_t(o,.)/pi), requiring strict positivity of the kernel row.
    pub fn log_ratio(&self, origin: usize, t: f64) -> Result<Vec<f64>> {
        let mu = self.row(origin, t)?;
        self.log_ratio_of(&mu, t)
    }

    /// Entropy dissipation -d/dt d_KL(P_t(o,.), pi) as the exact double sum
    /// over transitions of the log-ratio differences.
    pub fn entropy_dissipation(&self, origin: usize, t: f64) -> Result<f64> {
        let mu = self.row(origin, t)?;
        let h = self.log_ratio_of(&mu, t)?;
        let mut total = 0.0;
        for (x, &m) in mu.probs.iter().enumerate() {
            let mut inner = 0.0;
            for &(y, k) in self.chain.row(x) {
                inner += k * (h[x] - h[y]);
            }
            total += m * inner;
        }
        Ok(total)
    }

    fn log_ratio_of(&self, mu: &Distribution, t: f64) -> Result<Vec<f64>> {
        mu.probs
            .iter()
            .zip(self.pi())
            .enumerate()
            .map(|(x, (&m, &p))| {
                if m <= 0.0 {
                    Err(Error::ZeroMassState { state: x, t })
                } else {
                    Ok(m.ln() - p.ln())
                }
            })
            .collect()
    }

    /// Default profile grid: log-spaced points in [diam/4, 2*T_hi(1/4)].
    pub fn auto_time_grid(&self, points: usize) -> Vec<f64> {
        let lo = (self.metrics.diameter as f64 / 4.0).max(1e-3);
        let hi = (2.0 * self.mixing_time_upper_bound(0.25)).max(lo * 2.0);
        let (lln, hln) = (lo.ln(), hi.ln());
        (0..points)
            .map(|i| (lln + (hln - lln) * i as f64 / (points - 1).max(1) as f64).exp())
            .collect()
    }
}
