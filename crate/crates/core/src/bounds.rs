//! Every quantitative bound as a mechanically checkable inequality on a
//! concrete chain, reported with explicit slack.

use crate::analyzer::Analyzer;
use crate::error::{Error, Result};
use crate::stats::kl_divergence;
use serde::Serialize;

/// Default relative slack tolerance: bound checks compare certified
/// numerics, so failures beyond this indicate bugs, not near misses.
pub const DEFAULT_SLACK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundId {
    WindowWidth,
    MixingTimeUpper,
    MixingTimeLower,
    PControl,
    LipschitzRegularity,
    EntropyTimeRegularity,
    UniformHeatKernelLower,
    UniformHeatKernelUpper,
    ReversedPinsker,
    CheegerLower,
    CheegerUpper,
    DensityTailUpper,
    DensityTailLower,
}

impl std::fmt::Display for BoundId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            BoundId::WindowWidth => "window-width",
            BoundId::MixingTimeUpper => "mixing-time-upper",
            BoundId::MixingTimeLower => "mixing-time-lower",
            BoundId::PControl => "p-control",
            BoundId::LipschitzRegularity => "lipschitz-regularity",
            BoundId::EntropyTimeRegularity => "entropy-time-regularity",
            BoundId::UniformHeatKernelLower => "uniform-heat-kernel-lower",
            BoundId::UniformHeatKernelUpper => "uniform-heat-kernel-upper",
            BoundId::ReversedPinsker => "reversed-pinsker",
            BoundId::CheegerLower => "cheeger-lower",
            BoundId::CheegerUpper => "cheeger-upper",
            BoundId::DensityTailUpper => "density-tail-upper",
            BoundId::DensityTailLower => "density-tail-lower",
        };
        f.write_str(s)
    }
}

/// Echo of the evaluation point a report refers to.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct BoundInputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub origin: Option<usize>,
}

/// One checked inequality lhs <= rhs.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub bound_id: BoundId,
    pub inputs: BoundInputs,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub slack: Option<f64>,
    pub pass: bool,
    pub preconditions_met: bool,
    pub note: String,
}

impl BoundReport {
    fn checked(
        bound_id: BoundId,
        inputs: BoundInputs,
        lhs: f64,
        rhs: f64,
        slack_tol: f64,
        note: impl Into<String>,
    ) -> BoundReport {
        let slack = rhs - lhs;
        BoundReport {
            bound_id,
            inputs,
            lhs: Some(lhs),
            rhs: Some(rhs),
            slack: Some(slack),
            pass: slack >= -slack_tol * rhs.abs().max(1.0),
            preconditions_met: true,
            note: note.into(),
        }
    }

    fn skipped(bound_id: BoundId, inputs: BoundInputs, reason: impl Into<String>) -> BoundReport {
        BoundReport {
            bound_id,
            inputs,
            lhs: None,
            rhs: None,
            slack: None,
            pass: true,
            preconditions_met: false,
            note: reason.into(),
        }
    }

    pub fn status(&self) -> &'static str {
        if !self.preconditions_met {
            "SKIPPED"
        } else if self.pass {
            "PASS"
        } else {
            "FAIL"
        }
    }

    pub fn failed(&self) -> bool {
        self.preconditions_met && !self.pass
    }
}

/// F(u) = log u + 1/u - 1: nonnegative, zero only at u = 1.
pub fn f_tail(u: f64) -> f64 {
    u.ln() + 1.0 / u - 1.0
}

/// g(u) = u log u / (u - 1), the reversed-Pinsker coefficient shape.
pub fn g_coeff(u: f64) -> f64 {
    u * u.ln() / (u - 1.0)
}

/// All checks against one analyzer, sharing a slack tolerance.
pub struct BoundSuite<'a> {
    pub analyzer: &'a Analyzer,
    pub slack_tol: f64,
}

impl<'a> BoundSuite<'a> {
    pub fn new(analyzer: &'a Analyzer) -> BoundSuite<'a> {
        BoundSuite { analyzer, slack_tol: DEFAULT_SLACK_TOL }
    }

    pub fn with_slack_tol(mut self, tol: f64) -> BoundSuite<'a> {
        self.slack_tol = tol;
        self
    }

    fn diam_quarter(&self) -> f64 {
        self.analyzer.metrics().diameter as f64 / 4.0
    }

    /// Mixing-window width against the varentropy bound
    /// t_mix(eps) - t_mix(1-eps) <= 2/(gamma eps^2) (1 + sqrt(V_KL(t_mix(1-eps)))).
    pub fn check_window_bound(&self, epsilon: f64) -> Result<BoundReport> {
        let inputs = BoundInputs { epsilon: Some(epsilon), ..Default::default() };
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Ok(BoundReport::skipped(
                BoundId::WindowWidth,
                inputs,
                "requires epsilon in (0, 1/2)",
            ));
        }
        let a = self.analyzer;
        let t_hi = a.mixing_time(epsilon)?.t_mix;
        let t_lo = a.mixing_time(1.0 - epsilon)?.t_mix;
        let vkl = a.worst_vkl(t_lo)?;
        let gamma = a.spectral().gamma;
        let rhs = 2.0 / (gamma * epsilon * epsilon) * (1.0 + vkl.sqrt());
        Ok(BoundReport::checked(
            BoundId::WindowWidth,
            inputs,
            t_hi - t_lo,
            rhs,
            self.slack_tol,
            format!("V_KL(t_mix(1-eps)) = {vkl:.6e}"),
        ))
    }

    /// The two classical mixing-time estimates.
    pub fn check_mixing_time_bounds(&self, epsilon: f64) -> Result<[BoundReport; 2]> {
        let a = self.analyzer;
        let inputs = BoundInputs { epsilon: Some(epsilon), ..Default::default() };
        let t_mix = a.mixing_time(epsilon)?.t_mix;
        // When 4 p eps^2 > 1 the formula goes negative; the estimate it
        // derives from already certifies t_mix(eps) = 0 there, so the
        // informative right-hand side is its nonnegative part.
        let upper_value = a.mixing_time_upper_bound(epsilon);
        let upper_note = if upper_value < 0.0 {
            "t_mix(eps) <= log(1/(4 p eps^2)) / (2 gamma); clamped to 0 (4 p eps^2 > 1)"
        } else {
            "t_mix(eps) <= log(1/(4 p eps^2)) / (2 gamma)"
        };
        let upper = BoundReport::checked(
            BoundId::MixingTimeUpper,
            inputs,
            t_mix,
            upper_value.max(0.0),
            self.slack_tol,
            upper_note,
        );
        let gamma = a.spectral().gamma;
        let diam = a.metrics().diameter as f64;
        let lower_value = 0.5 * diam
            - (2.0 * t_mix / (1.0 - epsilon)).sqrt()
            - (2.0 / (gamma * (1.0 - epsilon))).sqrt();
        let note = if lower_value < 0.0 {
            "lower bound on t_mix(eps); vacuous (negative right-hand side)"
        } else {
            "lower bound on t_mix(eps)"
        };
        let lower = BoundReport::checked(
            BoundId::MixingTimeLower,
            inputs,
            lower_value,
            t_mix,
            self.slack_tol,
            note,
        );
        Ok([upper, lower])
    }

    /// log(1/p) <= 3 diam log(1/delta); needs delta <= 1/2.
    pub fn check_p_control(&self) -> BoundReport {
        let a = self.analyzer;
        let s = a.spectral();
        let inputs = BoundInputs::default();
        if s.delta > 0.5 {
            return BoundReport::skipped(
                BoundId::PControl,
                inputs,
                format!("requires delta <= 1/2, got delta = {}", s.delta),
            );
        }
        BoundReport::checked(
            BoundId::PControl,
            inputs,
            (1.0 / s.p_min).ln(),
            3.0 * s.diameter as f64 * (1.0 / s.delta).ln(),
            self.slack_tol,
            "",
        )
    }

    /// Lipschitz norm of log(P_t(o,.)/pi) against c = 3 log(e/delta).
    pub fn check_lipschitz_regularity(&self, origin: usize, t: f64) -> Result<BoundReport> {
        let a = self.analyzer;
        let inputs = BoundInputs { t: Some(t), origin: Some(origin), ..Default::default() };
        if t < self.diam_quarter() - 1e-12 {
            return Ok(BoundReport::skipped(
                BoundId::LipschitzRegularity,
                inputs,
                "requires t >= diam/4",
            ));
        }
        let h = match a.log_ratio(origin, t) {
            Ok(h) => h,
            Err(Error::ZeroMassState { state, .. }) => {
                return Ok(BoundReport::skipped(
                    BoundId::LipschitzRegularity,
                    inputs,
                    format!("zero heat-kernel mass at state {state} (tolerance issue)"),
                ))
            }
            Err(e) => return Err(e),
        };
        Ok(BoundReport::checked(
            BoundId::LipschitzRegularity,
            inputs,
            a.chain().lipschitz_norm(&h)?,
            a.metrics().lip_constant_c,
            self.slack_tol,
            "",
        ))
    }

    /// d_KL(t) <= d_KL(t+s) + c s for t >= diam/4.
    pub fn check_entropy_time_regularity(&self, t: f64, s: f64) -> Result<BoundReport> {
        let a = self.analyzer;
        let inputs = BoundInputs { t: Some(t), s: Some(s), ..Default::default() };
        if t < self.diam_quarter() - 1e-12 {
            return Ok(BoundReport::skipped(
                BoundId::EntropyTimeRegularity,
                inputs,
                "requires t >= diam/4",
            ));
        }
        if s < 0.0 {
            return Ok(BoundReport::skipped(BoundId::EntropyTimeRegularity, inputs, "s < 0"));
        }
        let lhs = a.worst_dkl(t)?;
        let rhs = a.worst_dkl(t + s)? + a.metrics().lip_constant_c * s;
        Ok(BoundReport::checked(BoundId::EntropyTimeRegularity, inputs, lhs, rhs, self.slack_tol, ""))
    }

    /// -c diam <= log(P_t(o,x)/pi(x)) <= log(1/p) over all pairs.
    pub fn check_uniform_heat_kernel(&self, t: f64) -> Result<[BoundReport; 2]> {
        let a = self.analyzer;
        let inputs = BoundInputs { t: Some(t), ..Default::default() };
        if t < self.diam_quarter() - 1e-12 {
            let reason = "requires t >= diam/4";
            return Ok([
                BoundReport::skipped(BoundId::UniformHeatKernelLower, inputs, reason),
                BoundReport::skipped(BoundId::UniformHeatKernelUpper, inputs, reason),
            ]);
        }
        let mut min_h = f64::INFINITY;
        let mut max_h = f64::NEG_INFINITY;
        let mut min_pair = (0usize, 0usize);
        let mut max_pair = (0usize, 0usize);
        for o in 0..a.chain().n() {
            let h = match a.log_ratio(o, t) {
                Ok(h) => h,
                Err(Error::ZeroMassState { state, .. }) => {
                    let reason = format!(
                        "zero heat-kernel mass at ({o},{state}) (tolerance issue)"
                    );
                    return Ok([
                        BoundReport::skipped(BoundId::UniformHeatKernelLower, inputs, &*reason),
                        BoundReport::skipped(BoundId::UniformHeatKernelUpper, inputs, &*reason),
                    ]);
                }
                Err(e) => return Err(e),
            };
            for (x, &v) in h.iter().enumerate() {
                if v < min_h {
                    min_h = v;
                    min_pair = (o, x);
                }
                if v > max_h {
                    max_h = v;
                    max_pair = (o, x);
                }
            }
        }
        let s = a.spectral();
        let lower = BoundReport::checked(
            BoundId::UniformHeatKernelLower,
            inputs,
            -(s.lip_constant_c * s.diameter as f64),
            min_h,
            self.slack_tol,
            format!("worst pair (o,x) = {min_pair:?}"),
        );
        let upper = BoundReport::checked(
            BoundId::UniformHeatKernelUpper,
            inputs,
            max_h,
            (1.0 / s.p_min).ln(),
            self.slack_tol,
            format!("worst pair (o,x) = {max_pair:?}"),
        );
        Ok([lower, upper])
    }

    /// d_KL(t) <= (1/(1-p)) log(1/p) d_TV(t).
    pub fn check_reversed_pinsker(&self, t: f64) -> Result<BoundReport> {
        let a = self.analyzer;
        let inputs = BoundInputs { t: Some(t), ..Default::default() };
        let p = a.spectral().p_min;
        let coeff = (1.0 / p).ln() / (1.0 - p);
        Ok(BoundReport::checked(
            BoundId::ReversedPinsker,
            inputs,
            a.worst_dkl(t)?,
            coeff * a.worst_dtv(t)?,
            self.slack_tol,
            "",
        ))
    }

    /// Cheeger sandwich Phi^2/2 <= gamma <= 2 Phi (exact Phi only).
    pub fn check_cheeger(&self) -> [BoundReport; 2] {
        let s = self.analyzer.spectral();
        let inputs = BoundInputs::default();
        if !s.phi_exact {
            let reason = "isoperimetric constant is a sweep bound, not exact";
            return [
                BoundReport::skipped(BoundId::CheegerLower, inputs, reason),
                BoundReport::skipped(BoundId::CheegerUpper, inputs, reason),
            ];
        }
        [
            BoundReport::checked(
                BoundId::CheegerLower,
                inputs,
                s.phi * s.phi / 2.0,
                s.gamma,
                self.slack_tol,
                "",
            ),
            BoundReport::checked(
                BoundId::CheegerUpper,
                inputs,
                s.gamma,
                2.0 * s.phi,
                self.slack_tol,
                "",
            ),
        ]
    }

    /// Markov tail bounds for the density Z = mu(X)/pi(X) with the
    /// F-function: P(Z >= p^-theta) <= d_KL/F(p^-theta) and
    /// P(Z <= p^theta) <= d_KL/F(p^theta).
    pub fn check_density_tail_bounds(
        &self,
        origin: usize,
        t: f64,
        theta: f64,
    ) -> Result<[BoundReport; 2]> {
        let a = self.analyzer;
        let inputs = BoundInputs {
            t: Some(t),
            theta: Some(theta),
            origin: Some(origin),
            ..Default::default()
        };
        let p = a.spectral().p_min;
        let upper_threshold = p.powf(-theta);
        let lower_threshold = p.powf(theta);
        if (upper_threshold - 1.0).abs() < 1e-12 || (lower_threshold - 1.0).abs() < 1e-12 {
            return Err(Error::DegenerateThreshold { threshold: lower_threshold });
        }
        let mu = a.row(origin, t)?;
        let dkl = kl_divergence(&mu, a.pi());
        let mut p_upper = 0.0;
        let mut p_lower = 0.0;
        for (x, &m) in mu.probs.iter().enumerate() {
            if m > 0.0 {
                let z = m / a.pi()[x];
                if z >= upper_threshold {
                    p_upper += m;
                }
                if z <= lower_threshold {
                    p_lower += m;
                }
            }
        }
        Ok([
            BoundReport::checked(
                BoundId::DensityTailUpper,
                inputs,
                p_upper,
                dkl / f_tail(upper_threshold),
                self.slack_tol,
                "",
            ),
            BoundReport::checked(
                BoundId::DensityTailLower,
                inputs,
                p_lower,
                dkl / f_tail(lower_threshold),
                self.slack_tol,
                "",
            ),
        ])
    }

    /// Per-origin checks folded to the single worst (minimum slack) report.
    /// If every origin is skipped, the fold is a skip.
    fn fold_over_origins(
        &self,
        mut per_origin: impl FnMut(usize) -> Result<Vec<BoundReport>>,
    ) -> Result<Vec<BoundReport>> {
        let n = self.analyzer.chain().n();
        let mut best: Vec<BoundReport> = Vec::new();
        for o in 0..n {
            let reports = per_origin(o)?;
            if best.is_empty() {
                best = reports;
                continue;
            }
            for (current, candidate) in best.iter_mut().zip(reports) {
                let keep = match (current.slack, candidate.slack) {
                    (Some(a), Some(b)) => a <= b,
                    (Some(_), None) => false, // a skip wins: it must be surfaced
                    (None, _) => true,
                };
                if !keep {
                    *current = candidate;
                }
            }
        }
        Ok(best)
    }

    /// The full default grid: every check over
    /// t in {diam/4, t_mix(3/4), t_mix(1/2), t_mix(1/4), 2 t_mix(1/4)},
    /// s in {0, 0.1, 1, t_mix(1/4)}, theta in {1/4, 1/2, 1}.
    pub fn run_all(&self, eps_grid: &[f64]) -> Result<Vec<BoundReport>> {
        let a = self.analyzer;
        let mut reports = Vec::new();
        for &eps in eps_grid {
            reports.push(self.check_window_bound(eps)?);
            reports.extend(self.check_mixing_time_bounds(eps)?);
        }
        reports.push(self.check_p_control());
        reports.extend(self.check_cheeger());

        let t14 = a.mixing_time(0.25)?.t_mix;
        let t12 = a.mixing_time(0.5)?.t_mix;
        let t34 = a.mixing_time(0.75)?.t_mix;
        let mut t_grid = vec![self.diam_quarter(), t34, t12, t14, 2.0 * t14];
        t_grid.sort_by(|x, y| x.partial_cmp(y).unwrap());
        t_grid.dedup_by(|x, y| x.to_bits() == y.to_bits());
        let s_grid = [0.0, 0.1, 1.0, t14];
        let theta_grid = [0.25, 0.5, 1.0];

        for &t in &t_grid {
            reports.extend(self.fold_over_origins(|o| {
                Ok(vec![self.check_lipschitz_regularity(o, t)?])
            })?);
            for &s in &s_grid {
                reports.push(self.check_entropy_time_regularity(t, s)?);
            }
            reports.extend(self.check_uniform_heat_kernel(t)?);
            reports.push(self.check_reversed_pinsker(t)?);
            for &theta in &theta_grid {
                reports.extend(self.fold_over_origins(|o| {
                    Ok(self.check_density_tail_bounds(o, t, theta)?.to_vec())
                })?);
            }
        }
        Ok(reports)
    }
}
