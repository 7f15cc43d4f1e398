//! Acceptance gate: one test (and one printed PASS/FAIL line) per criterion.

use cutoff_lab::analyzer::Analyzer;
use cutoff_lab::bounds::BoundSuite;
use cutoff_lab::chain::Chain;
use cutoff_lab::families::{self, FamilyId, FamilySpec};
use cutoff_lab::heat::{heat_kernel_row, DEFAULT_TOL};
use cutoff_lab::spectral::{poincare_constant, stationary_distribution};
use cutoff_lab::stats::kl_divergence;
use cutoff_lab::sweep::{self, SweepOptions, Verdict, VerdictThresholds};
use std::panic::{catch_unwind, resume_unwind, UnwindSafe};
use std::process::Command;

fn criterion(name: &str, f: impl FnOnce() + UnwindSafe) {
    let start = std::time::Instant::now();
    let result = catch_unwind(f);
    let verdict = if result.is_ok() { "PASS" } else { "FAIL" };
    println!("acceptance criterion {name}: {verdict} ({:.2?})", start.elapsed());
    if let Err(e) = result {
        resume_unwind(e);
    }
}

fn lazy_two_state() -> Chain {
    Chain::from_dense(&[vec![0.5, 0.5], vec![0.5, 0.5]], false).unwrap()
}

fn flip_chain() -> Chain {
    Chain::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]], false).unwrap()
}

fn random_corpus() -> Vec<Chain> {
    (0..50u64)
        .map(|seed| {
            let n = 4 + (seed as usize % 9); // 4..=12
            families::random_symmetric_chain(n, 0.4, seed).unwrap()
        })
        .collect()
}

#[test]
fn criterion_1_closed_form_suite() {
    criterion("1 (closed-form chain suite)", || {
        let a = Analyzer::new(lazy_two_state()).unwrap().with_t_tol(1e-10);
        let t = 2f64.ln();
        let p = a.worst_profile(t).unwrap();
        assert!((p.dtv - 0.25).abs() <= 1e-10, "dtv {}", p.dtv);
        assert!((p.dkl - 0.1308123).abs() <= 1e-6, "dkl {}", p.dkl);
        assert!((p.vkl - 0.2263025).abs() <= 1e-6, "vkl {}", p.vkl);
        assert!((a.mixing_time(0.25).unwrap().t_mix - t).abs() <= 1e-8);
        let s = a.spectral();
        assert!((s.gamma - 1.0).abs() <= 1e-10, "gamma {}", s.gamma);
        assert_eq!(s.phi, 0.5);
        let d = a.entropy_dissipation(0, t).unwrap();
        assert!((d - 0.25 * 3f64.ln()).abs() <= 1e-9, "dissipation {d}");

        let k4 = families::generate(&FamilySpec::new(FamilyId::Complete, 4)).unwrap();
        let a = Analyzer::new(k4).unwrap().with_t_tol(1e-10);
        assert!((a.mixing_time(0.25).unwrap().t_mix - 0.75 * 3f64.ln()).abs() <= 1e-8);
        let s = a.spectral();
        assert!((s.gamma - 4.0 / 3.0).abs() <= 1e-10, "gamma {}", s.gamma);
        assert!((s.phi - 2.0 / 3.0).abs() <= 1e-15, "phi {}", s.phi);

        for n in 3..=64usize {
            let cycle = families::generate(&FamilySpec::new(FamilyId::Cycle, n)).unwrap();
            let pi = stationary_distribution(&cycle).unwrap();
            let gamma = poincare_constant(&cycle, &pi).unwrap();
            let exact = 1.0 - (2.0 * std::f64::consts::PI / n as f64).cos();
            assert!((gamma - exact).abs() <= 1e-9, "cycle {n}: {gamma} vs {exact}");
        }
    });
}

#[test]
fn criterion_2_semigroup_and_monotonicity() {
    criterion("2 (semigroup and monotonicity properties)", || {
        for chain in random_corpus() {
            let n = chain.n();
            let a = Analyzer::new(chain.clone()).unwrap();
            // Semigroup law P_{t+s} = P_t P_s within 10x the certified
            // truncation tolerance.
            let (t, s) = (0.7, 1.3);
            for o in 0..n {
                let direct = heat_kernel_row(&chain, o, t + s, DEFAULT_TOL).unwrap();
                let at_t = heat_kernel_row(&chain, o, t, DEFAULT_TOL).unwrap();
                let mut composed = vec![0.0; n];
                for (x, &m) in at_t.probs.iter().enumerate() {
                    let step = heat_kernel_row(&chain, x, s, DEFAULT_TOL).unwrap();
                    for (c, &v) in composed.iter_mut().zip(&step.probs) {
                        *c += m * v;
                    }
                }
                let err: f64 = direct
                    .probs
                    .iter()
                    .zip(&composed)
                    .map(|(a, b)| (a - b).abs())
                    .sum();
                assert!(err <= 10.0 * DEFAULT_TOL, "semigroup error {err}");
            }
            // Worst-case TV non-increasing on a 32-point grid.
            let grid: Vec<f64> = (0..32).map(|i| 0.25 * i as f64).collect();
            let mut prev = f64::INFINITY;
            for &t in &grid {
                let d = a.worst_dtv(t).unwrap();
                assert!(d <= prev + 1e-10, "dtv increased at t={t}");
                prev = d;
            }
            // Dissipation nonnegative and matching -d/dt d_KL.
            let h = 1e-5;
            for &t in &[0.5, 1.0, 2.0, 4.0] {
                for o in 0..n {
                    let d = a.entropy_dissipation(o, t).unwrap();
                    assert!(d >= -1e-10, "negative dissipation {d}");
                    let up = kl_divergence(&a.row(o, t + h).unwrap(), a.pi());
                    let down = kl_divergence(&a.row(o, t - h).unwrap(), a.pi());
                    let fd = -(up - down) / (2.0 * h);
                    assert!((d + (up - down) / (2.0 * h)).abs() <= 1e-4, "{d} vs {fd} at t={t}");
                }
            }
        }
    });
}

#[test]
fn criterion_3_bound_suite_universality() {
    criterion("3 (bound suite universality)", || {
        let mut corpus: Vec<(String, Chain)> = vec![
            ("lazy-two-state".into(), lazy_two_state()),
            ("flip".into(), flip_chain()),
            (
                "complete-4".into(),
                families::generate(&FamilySpec::new(FamilyId::Complete, 4)).unwrap(),
            ),
        ];
        for n in 3..=64usize {
            corpus.push((
                format!("cycle-{n}"),
                families::generate(&FamilySpec::new(FamilyId::Cycle, n)).unwrap(),
            ));
        }
        for (i, chain) in random_corpus().into_iter().enumerate() {
            corpus.push((format!("random-{i}"), chain));
        }
        for seed in 0..5u64 {
            let mut spec = FamilySpec::new(FamilyId::RandomRegular, 64);
            spec.seed = seed;
            corpus.push((format!("random-regular-64-3-{seed}"), families::generate(&spec).unwrap()));
        }
        for (name, chain) in corpus {
            let delta = chain.metrics().delta;
            let a = Analyzer::new(chain).unwrap();
            let suite = BoundSuite::new(&a);
            let reports = suite.run_all(&[0.25, 0.5, 0.75]).unwrap();
            for r in &reports {
                assert!(!r.failed(), "{name}: {} FAILED: lhs {:?} rhs {:?}", r.bound_id, r.lhs, r.rhs);
            }
            // The p-control check is skipped exactly when delta > 1/2.
            let p_control = reports
                .iter()
                .find(|r| r.bound_id == cutoff_lab::bounds::BoundId::PControl)
                .unwrap();
            assert_eq!(p_control.preconditions_met, delta <= 0.5, "{name}");
        }
    });
}

#[test]
fn criterion_4_eigensolver_cross_check() {
    criterion("4 (eigensolver cross-check)", || {
        // Characteristic-polynomial oracle for the second eigenvalue of the
        // symmetrized reversibilization, for tiny chains.
        for (name, chain) in [
            ("lazy-two-state", lazy_two_state()),
            ("path-3", {
                let edges = [(0usize, 1usize), (1, 2)];
                families::srw_from_edges(&edges).unwrap()
            }),
            ("random-5", families::random_symmetric_chain(5, 0.5, 11).unwrap()),
            ("random-6", families::random_symmetric_chain(6, 0.5, 12).unwrap()),
        ] {
            let pi = stationary_distribution(&chain).unwrap();
            let gamma = poincare_constant(&chain, &pi).unwrap();
            let lambda2 = charpoly_second_eigenvalue(&chain, &pi);
            assert!(
                (gamma - (1.0 - lambda2)).abs() <= 1e-9,
                "{name}: gamma {gamma} vs oracle {}",
                1.0 - lambda2
            );
        }
        // Flip chain: d_TV(t) = e^{-2t}/2, so the observed decay rate is
        // gamma = 2.
        let a = Analyzer::new(flip_chain()).unwrap();
        let (t1, t2) = (1.0, 3.0);
        let rate = -(a.worst_dtv(t2).unwrap().ln() - a.worst_dtv(t1).unwrap().ln()) / (t2 - t1);
        let gamma = a.spectral().gamma;
        assert!((gamma - 2.0).abs() <= 1e-6, "gamma {gamma}");
        assert!((rate - gamma).abs() <= 1e-6, "rate {rate} vs gamma {gamma}");
    });
}

/// Second-largest eigenvalue of the symmetrized reversibilization via the
/// characteristic polynomial (Faddeev-LeVerrier coefficients, sign-change
/// scan, bisection). Independent of the eigensolver under test.
fn charpoly_second_eigenvalue(chain: &Chain, pi: &[f64]) -> f64 {
    let n = chain.n();
    // Dense symmetrized reversibilization, built from scratch:
    // S = (D^{1/2} K D^{-1/2} + transpose) / 2 with D = diag(pi).
    let mut s = vec![vec![0.0f64; n]; n];
    for x in 0..n {
        for &(y, k) in chain.row(x) {
            s[x][y] += 0.5 * k * (pi[x] / pi[y]).sqrt();
            s[y][x] += 0.5 * k * (pi[x] / pi[y]).sqrt();
        }
    }
    // Faddeev-LeVerrier: coefficients of det(xI - S).
    let mut coeffs = vec![1.0f64];
    let mut m = vec![vec![0.0f64; n]; n];
    for k in 1..=n {
        // M <- S (M + c_{k-1} I)
        let mut shifted = m.clone();
        for (i, row) in shifted.iter_mut().enumerate() {
            row[i] += *coeffs.last().unwrap();
        }
        let mut next = vec![vec![0.0f64; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for l in 0..n {
                    acc += s[i][l] * shifted[l][j];
                }
                next[i][j] = acc;
            }
        }
        let trace: f64 = (0..n).map(|i| next[i][i]).sum();
        coeffs.push(-trace / k as f64);
        m = next;
    }
    let eval = |x: f64| -> f64 {
        let mut acc = 0.0;
        for &c in &coeffs {
            acc = acc * x + c;
        }
        acc
    };
    // Largest root below 1 - 1e-12 (1 is always a root), by sign scan.
    let hi = 1.0 - 1e-9;
    let steps = 4_000_000usize;
    let lo = -1.0 - 1e-9;
    let mut prev_x = hi;
    let mut prev_v = eval(hi);
    for i in 1..=steps {
        let x = hi - (hi - lo) * i as f64 / steps as f64;
        let v = eval(x);
        if v == 0.0 || v.signum() != prev_v.signum() {
            // Bisect [x, prev_x].
            let (mut a, mut b) = (x, prev_x);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if eval(mid).signum() == eval(a).signum() {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            return 0.5 * (a + b);
        }
        prev_x = x;
        prev_v = v;
    }
    panic!("characteristic polynomial has no root below 1");
}

#[test]
fn criterion_5_trend_diagnostics() {
    criterion("5 (trend diagnostics at desk scale)", || {
        let eps = [0.25, 0.5, 0.75];
        let opts = SweepOptions::default();
        let thresholds = VerdictThresholds::default();

        let cycle = FamilySpec::new(FamilyId::Cycle, 8);
        let outcome = sweep::sweep(&cycle, &[8, 16, 32, 64], &eps, &opts).unwrap();
        assert!(outcome.failures.is_empty());
        let v = sweep::verdict(&outcome.records, &thresholds).unwrap();
        assert_eq!(v.verdict, Verdict::NoCutoffConsistent, "cycle: {:?}", v.window_ratio);
        let tail = &v.window_ratio[v.window_ratio.len() - 3..];
        let (min, max) = tail.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
        assert!(max / min <= 1.2, "cycle window ratios not flat: {tail:?}");

        let complete = FamilySpec::new(FamilyId::Complete, 4);
        let outcome = sweep::sweep(&complete, &[4, 8, 16, 32], &eps, &opts).unwrap();
        assert!(outcome.failures.is_empty());
        let v = sweep::verdict(&outcome.records, &thresholds).unwrap();
        assert_eq!(v.verdict, Verdict::NoCutoffConsistent, "complete: {:?}", v.window_ratio);

        let mut rr = FamilySpec::new(FamilyId::RandomRegular, 64);
        rr.degree = 3;
        rr.seed = 7;
        let outcome = sweep::sweep(&rr, &[64, 128, 256, 512], &eps, &opts).unwrap();
        assert!(outcome.failures.is_empty(), "{:?}", outcome.failures);
        let v = sweep::verdict(&outcome.records, &thresholds).unwrap();
        let w = &v.window_ratio;
        assert!(
            w[1] > w[2] && w[2] > w[3],
            "window ratio not strictly decreasing over the last three sizes: {w:?}"
        );
        assert!(
            v.vc.windows(2).all(|p| p[1] > p[0]),
            "vc not strictly increasing: {:?}",
            v.vc
        );
        assert_eq!(v.verdict, Verdict::CutoffConsistent, "random-regular: {w:?} / {:?}", v.vc);
    });
}

#[test]
fn criterion_6_reproducibility() {
    criterion("6 (byte-identical output across thread counts)", || {
        let bin = env!("CARGO_BIN_EXE_cutoff-lab");
        let run = |threads: &str| {
            let out = Command::new(bin)
                .args([
                    "--json",
                    "--threads",
                    threads,
                    "sweep",
                    "--family",
                    "random-regular",
                    "--seed",
                    "7",
                    "--sizes",
                    "16,32,64",
                ])
                .output()
                .expect("spawn cutoff-lab");
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
            out.stdout
        };
        let one = run("1");
        let eight = run("8");
        assert!(!one.is_empty());
        assert_eq!(one, eight, "sweep --json output differs across thread counts");
    });
}
