//! Family sweeps: per-size cutoff and varentropy-criterion statistics, and
//! the finite-size trend verdict.

use crate::analyzer::Analyzer;
use crate::bounds::{BoundReport, BoundSuite};
use crate::error::{Error, Result};
use crate::families::{self, FamilySpec};
use serde::Serialize;

/// Per-family-member statistics.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub n: usize,
    /// (epsilon, t_mix(epsilon)) over the configured grid.
    pub t_mix: Vec<(f64, f64)>,
    /// (epsilon, t_mix(epsilon) - t_mix(1-epsilon)) for epsilon < 1/2.
    pub window: Vec<(f64, f64)>,
    /// (epsilon, epsilon', t_mix(epsilon')/t_mix(epsilon)) for eps' > eps.
    pub cutoff_ratio: Vec<(f64, f64, f64)>,
    /// (epsilon, gamma t_mix(eps) / (1 + sqrt(V_KL(t_mix(eps))))).
    pub vc_statistic: Vec<(f64, f64)>,
    pub gamma: f64,
    pub phi: f64,
    pub phi_exact: bool,
    pub delta: f64,
    pub p_min: f64,
    pub diameter: u32,
}

impl SweepRecord {
    fn lookup(pairs: &[(f64, f64)], eps: f64) -> Option<f64> {
        pairs.iter().find(|&&(e, _)| e == eps).map(|&(_, v)| v)
    }

    pub fn t_mix_at(&self, eps: f64) -> Option<f64> {
        Self::lookup(&self.t_mix, eps)
    }
    pub fn window_at(&self, eps: f64) -> Option<f64> {
        Self::lookup(&self.window, eps)
    }
    pub fn vc_at(&self, eps: f64) -> Option<f64> {
        Self::lookup(&self.vc_statistic, eps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CutoffConsistent,
    NoCutoffConsistent,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::CutoffConsistent => "cutoff-consistent",
            Verdict::NoCutoffConsistent => "no-cutoff-consistent",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Heuristic thresholds for the finite-size trend verdict. These are
/// diagnostics only; the tool never claims asymptotic cutoff.
#[derive(Debug, Clone, Copy)]
pub struct VerdictThresholds {
    /// Relative width of the "flat" band (max/min - 1 over the tail).
    pub flat_band: f64,
    /// Inversions tolerated in the decreasing window-ratio series.
    pub allowed_inversions: usize,
    /// Number of trailing records the flatness band is measured on.
    pub trailing: usize,
    /// A1 sparsity flag: inf delta over the sweep at least this.
    pub a1_delta_min: f64,
    /// A2 expansion flag: inf gamma over the sweep at least this.
    pub a2_gamma_min: f64,
}

impl Default for VerdictThresholds {
    fn default() -> VerdictThresholds {
        VerdictThresholds {
            flat_band: 0.2,
            allowed_inversions: 1,
            trailing: 3,
            a1_delta_min: 0.05,
            a2_gamma_min: 0.01,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrendVerdict {
    pub verdict: Verdict,
    pub epsilon: f64,
    /// window(eps) / t_mix(1/2) per size.
    pub window_ratio: Vec<f64>,
    /// vc_statistic(eps) per size.
    pub vc: Vec<f64>,
    /// Last/first ratios of the two series.
    pub window_ratio_slope: f64,
    pub vc_slope: f64,
    pub a1_holds: bool,
    pub a2_holds: bool,
    pub min_delta: f64,
    pub min_gamma: f64,
}

#[derive(Debug, Serialize)]
pub struct SweepOutcome {
    pub records: Vec<SweepRecord>,
    /// Varentropy window bound per (size, epsilon < 1/2).
    pub window_bounds: Vec<(usize, BoundReport)>,
    /// Sizes that failed, with the error message; the sweep continues.
    pub failures: Vec<(usize, String)>,
}

pub struct SweepOptions {
    pub heat_tol: Option<f64>,
    pub t_tol: Option<f64>,
    pub slack_tol: f64,
}

impl Default for SweepOptions {
    fn default() -> SweepOptions {
        SweepOptions { heat_tol: None, t_tol: None, slack_tol: crate::bounds::DEFAULT_SLACK_TOL }
    }
}

fn analyze_one(
    analyzer: &Analyzer,
    n: usize,
    eps_grid: &[f64],
    slack_tol: f64,
) -> Result<(SweepRecord, Vec<(usize, BoundReport)>)> {
    let s = analyzer.spectral();
    let mut t_mix = Vec::new();
    for &eps in eps_grid {
        t_mix.push((eps, analyzer.mixing_time(eps)?.t_mix));
    }
    let mut window = Vec::new();
    let mut vc_statistic = Vec::new();
    for &(eps, t) in &t_mix {
        if eps < 0.5 {
            let t_counter = analyzer.mixing_time(1.0 - eps)?.t_mix;
            window.push((eps, t - t_counter));
        }
        let vkl = analyzer.worst_vkl(t)?;
        vc_statistic.push((eps, s.gamma * t / (1.0 + vkl.sqrt())));
    }
    let mut cutoff_ratio = Vec::new();
    for (i, &(e1, t1)) in t_mix.iter().enumerate() {
        for &(e2, t2) in &t_mix[i + 1..] {
            let ratio = if t1 == 0.0 {
                1.0 // both mixed instantly: t2 <= t1 = 0
            } else {
                t2 / t1
            };
            cutoff_ratio.push((e1, e2, ratio));
        }
    }
    let record = SweepRecord {
        n,
        t_mix,
        window,
        cutoff_ratio,
        vc_statistic,
        gamma: s.gamma,
        phi: s.phi,
        phi_exact: s.phi_exact,
        delta: s.delta,
        p_min: s.p_min,
        diameter: s.diameter,
    };
    let suite = BoundSuite::new(analyzer).with_slack_tol(slack_tol);
    let mut window_bounds = Vec::new();
    for &eps in eps_grid {
        if eps < 0.5 {
            window_bounds.push((n, suite.check_window_bound(eps)?));
        }
    }
    Ok((record, window_bounds))
}

/// Run the full per-size analysis across a family. Per-size failures are
/// recorded and the sweep continues.
pub fn sweep(
    template: &FamilySpec,
    sizes: &[usize],
    eps_grid: &[f64],
    opts: &SweepOptions,
) -> Result<SweepOutcome> {
    if !eps_grid.iter().any(|&e| e < 0.5 && eps_grid.contains(&(1.0 - e))) {
        return Err(Error::InvalidParams(
            "eps grid must contain at least one pair (eps, 1-eps) with eps < 1/2".into(),
        ));
    }
    let chains = families::family_sequence(template, sizes)?;
    let mut outcome = SweepOutcome { records: Vec::new(), window_bounds: Vec::new(), failures: Vec::new() };
    for (n, chain) in chains {
        let run = || -> Result<(SweepRecord, Vec<(usize, BoundReport)>)> {
            let mut analyzer = Analyzer::new(chain)?;
            if let Some(tol) = opts.heat_tol {
                analyzer = analyzer.with_heat_tol(tol);
            }
            if let Some(tol) = opts.t_tol {
                analyzer = analyzer.with_t_tol(tol);
            }
            analyze_one(&analyzer, n, eps_grid, opts.slack_tol)
        };
        match run() {
            Ok((record, window_bounds)) => {
                outcome.records.push(record);
                outcome.window_bounds.extend(window_bounds);
            }
            Err(e) => outcome.failures.push((n, e.to_string())),
        }
    }
    Ok(outcome)
}

fn flat(series: &[f64], thresholds: &VerdictThresholds) -> bool {
    let tail = &series[series.len().saturating_sub(thresholds.trailing)..];
    let min = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    min > 0.0 && max / min <= 1.0 + thresholds.flat_band
}

/// Trend verdict over a sweep, at the smallest epsilon < 1/2 in the grid.
///
/// Listed-order rules: cutoff-consistent when the window/t_mix(1/2) series
/// decreases (allowing `allowed_inversions`) while the vc series strictly
/// increases; otherwise no-cutoff-consistent when both series are flat
/// within the relative band over the trailing records; else inconclusive.
pub fn verdict(records: &[SweepRecord], thresholds: &VerdictThresholds) -> Result<TrendVerdict> {
    if records.len() < 3 {
        return Err(Error::InvalidParams("verdict needs at least 3 sizes".into()));
    }
    let eps = records[0]
        .window
        .iter()
        .map(|&(e, _)| e)
        .fold(f64::INFINITY, f64::min);
    if !eps.is_finite() {
        return Err(Error::InvalidParams("no epsilon < 1/2 in the sweep grid".into()));
    }
    let mut window_ratio = Vec::new();
    let mut vc = Vec::new();
    for r in records {
        let w = r
            .window_at(eps)
            .ok_or_else(|| Error::InvalidParams("missing window".into()))?;
        let t_half = r
            .t_mix_at(0.5)
            .ok_or_else(|| Error::InvalidParams("grid must include epsilon = 1/2".into()))?;
        if t_half <= 0.0 {
            return Err(Error::InvalidParams(format!("t_mix(1/2) = 0 at n = {}", r.n)));
        }
        window_ratio.push(w / t_half);
        vc.push(
            r.vc_at(eps)
                .ok_or_else(|| Error::InvalidParams("missing vc statistic".into()))?,
        );
    }
    let window_inversions = window_ratio
        .windows(2)
        .filter(|w| w[1] >= w[0])
        .count();
    let vc_strictly_increasing = vc.windows(2).all(|w| w[1] > w[0]);
    let verdict = if window_inversions <= thresholds.allowed_inversions && vc_strictly_increasing {
        Verdict::CutoffConsistent
    } else if flat(&window_ratio, thresholds) && flat(&vc, thresholds) {
        Verdict::NoCutoffConsistent
    } else {
        Verdict::Inconclusive
    };
    let min_delta = records.iter().map(|r| r.delta).fold(f64::INFINITY, f64::min);
    let min_gamma = records.iter().map(|r| r.gamma).fold(f64::INFINITY, f64::min);
    Ok(TrendVerdict {
        verdict,
        epsilon: eps,
        window_ratio_slope: window_ratio.last().unwrap() / window_ratio[0],
        vc_slope: vc.last().unwrap() / vc[0],
        window_ratio,
        vc,
        a1_holds: min_delta >= thresholds.a1_delta_min,
        a2_holds: min_gamma >= thresholds.a2_gamma_min,
        min_delta,
        min_gamma,
    })
}
