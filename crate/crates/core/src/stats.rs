//! Distribution statistics: total variation, relative entropy, varentropy.

use crate::heat::Distribution;
use serde::Serialize;

/// Per-time record of the three worst-case statistics.
#[derive(Debug, Clone, Serialize)]
pub struct ProfilePoint {
    pub t: f64,
    pub dtv: f64,
    pub dkl: f64,
    pub vkl: f64,
    pub argmax_tv: usize,
    pub argmax_kl: usize,
    pub argmax_vkl: usize,
}

/// Certified mixing-time bracket.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MixingTimeResult {
    pub epsilon: f64,
    pub t_mix: f64,
    pub bracket_width: f64,
    pub dtv_at_t: f64,
}

/// Total variation distance: half the L1 distance.
pub fn tv_distance(mu: &Distribution, nu: &Distribution) -> f64 {
    debug_assert_eq!(mu.probs.len(), nu.probs.len());
    0.5 * mu
        .probs
        .iter()
        .zip(&nu.probs)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
}

/// Relative entropy sum_x mu(x) log(mu(x)/pi(x)), natural log, with the
/// convention 0 log 0 = 0. Log ratios are taken as log mu - log pi to avoid
/// quotient underflow.
pub fn kl_divergence(mu: &Distribution, pi: &[f64]) -> f64 {
    mu.probs
        .iter()
        .zip(pi)
        .filter(|(&m, _)| m > 0.0)
        .map(|(&m, &p)| m * (m.ln() - p.ln()))
        .sum()
}

/// Varentropy Var_mu(log mu/pi), two-pass (mean first, then the centered
/// second moment), summing only over the support of mu.
pub fn varentropy(mu: &Distribution, pi: &[f64]) -> f64 {
    let mean = kl_divergence(mu, pi);
    mu.probs
        .iter()
        .zip(pi)
        .filter(|(&m, _)| m > 0.0)
        .map(|(&m, &p)| {
            let d = m.ln() - p.ln() - mean;
            m * d * d
        })
        .sum()
}
