use clap::{Args, Parser, Subcommand};
use cutoff_lab::analyzer::Analyzer;
use cutoff_lab::bounds::{self, BoundReport, BoundSuite};
use cutoff_lab::error::{Error, Result};
use cutoff_lab::families::{self, FamilyId, FamilySpec};
use cutoff_lab::output::{fmt_num, json_line, OutputFormat, Table};
use cutoff_lab::sweep::{self, SweepOptions, VerdictThresholds};
use cutoff_lab::io;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const THREADS_ENV: &str = "CUTOFF_LAB_THREADS";

#[derive(Parser)]
#[command(name = "cutoff-lab", version, about = "Mixing and cutoff diagnostics for finite Markov chains")]
struct Cli {
    /// Emit one JSON object per line instead of a table.
    #[arg(long, global = true)]
    json: bool,
    /// Emit comma-separated values instead of a table.
    #[arg(long, global = true, conflicts_with = "json")]
    csv: bool,
    /// Heat-kernel truncation tolerance override.
    #[arg(long, global = true)]
    heat_tol: Option<f64>,
    /// Mixing-time bisection tolerance override (absolute).
    #[arg(long, global = true)]
    t_tol: Option<f64>,
    /// Relative slack tolerance for bound checks.
    #[arg(long, global = true, default_value_t = bounds::DEFAULT_SLACK_TOL)]
    slack_tol: f64,
    /// Worker thread cap; also settable via CUTOFF_LAB_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Rescale rows whose sums are off by at most 1e-9.
    #[arg(long, global = true)]
    renormalize: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct FamilyArgs {
    /// lazy-two-state | cycle | complete | hypercube | random-regular |
    /// random-symmetric | srw-from-edgelist
    #[arg(long)]
    family: FamilyId,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Degree for random-regular.
    #[arg(long, default_value_t = 3)]
    degree: usize,
    /// Edge density for random-symmetric.
    #[arg(long, default_value_t = 0.3)]
    density: f64,
    /// Laziness: K becomes (1-alpha) K + alpha I.
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    /// Edge-list file for srw-from-edgelist.
    #[arg(long)]
    edges: Option<PathBuf>,
}

impl FamilyArgs {
    fn spec(&self, size: usize) -> Result<FamilySpec> {
        let mut spec = FamilySpec::new(self.family, size);
        spec.seed = self.seed;
        spec.degree = self.degree;
        spec.density = self.density;
        spec.alpha = self.alpha;
        if let Some(path) = &self.edges {
            spec.edges = Some(io::read_edge_list(path)?);
        }
        Ok(spec)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a chain file, printing its basic metrics.
    Validate { chain: PathBuf },
    /// Worst-case d_TV, d_KL, V_KL over a time grid.
    Profile {
        chain: PathBuf,
        /// Explicit time grid (comma-separated); default is auto.
        #[arg(long, value_delimiter = ',')]
        times: Vec<f64>,
        /// Points in the auto log-spaced grid.
        #[arg(long, default_value_t = 64)]
        points: usize,
        /// Restrict worst-case maxima to these origins.
        #[arg(long, value_delimiter = ',')]
        origins: Vec<usize>,
        /// Directory for one plot file per curve.
        #[arg(long)]
        plot_data: Option<PathBuf>,
    },
    /// Certified mixing times over an epsilon grid.
    MixingTime {
        chain: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.5, 0.75])]
        eps: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        origins: Vec<usize>,
    },
    /// Check the full bound suite; exit 2 on any FAILED report.
    Verify {
        chain: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.5, 0.75])]
        eps: Vec<f64>,
        /// Treat SKIPPED reports as failures.
        #[arg(long)]
        strict: bool,
    },
    /// Per-size statistics and trend verdict across a family.
    Sweep {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.5, 0.75])]
        eps: Vec<f64>,
        #[arg(long)]
        plot_data: Option<PathBuf>,
    },
    /// Write one family member as a chain file.
    Generate {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        size: usize,
        /// Output path; stdout if omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Everything needed to reproduce a run, echoed as the first record in
/// `--json` mode. Thread count is deliberately excluded: it never affects
/// the output bytes.
#[derive(Serialize)]
struct RunConfig {
    command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    chain: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<FamilySpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sizes: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    times: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    origins: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    heat_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_tol: Option<f64>,
    slack_tol: f64,
    renormalize: bool,
    strict: bool,
}

impl Cli {
    fn format(&self) -> OutputFormat {
        if self.json {
            OutputFormat::Json
        } else if self.csv {
            OutputFormat::Csv
        } else {
            OutputFormat::Human
        }
    }

    fn config(&self, command: &'static str) -> RunConfig {
        RunConfig {
            command,
            chain: None,
            family: None,
            sizes: None,
            eps: None,
            times: None,
            origins: None,
            heat_tol: self.heat_tol,
            t_tol: self.t_tol,
            slack_tol: self.slack_tol,
            renormalize: self.renormalize,
            strict: false,
        }
    }

    fn load_analyzer(&self, path: &Path, origins: &[usize]) -> Result<Analyzer> {
        let chain = io::read_chain(path, self.renormalize)?;
        let mut analyzer = Analyzer::new(chain)?;
        if let Some(tol) = self.heat_tol {
            analyzer = analyzer.with_heat_tol(tol);
        }
        if let Some(tol) = self.t_tol {
            analyzer = analyzer.with_t_tol(tol);
        }
        if !origins.is_empty() {
            analyzer = analyzer.with_origins(origins.to_vec())?;
        }
        Ok(analyzer)
    }
}

fn opt_vec<T: Clone>(v: &[T]) -> Option<Vec<T>> {
    if v.is_empty() {
        None
    } else {
        Some(v.to_vec())
    }
}

fn emit_config(format: OutputFormat, config: &RunConfig) {
    if format == OutputFormat::Json {
        println!("{}", json_line(config));
    }
}

fn cmd_validate(cli: &Cli, path: &Path) -> Result<u8> {
    let chain = io::read_chain(path, cli.renormalize)?;
    let metrics = chain.metrics();
    let format = cli.format();
    let mut config = cli.config("validate");
    config.chain = Some(path.display().to_string());
    emit_config(format, &config);
    #[derive(Serialize)]
    struct ValidateReport {
        valid: bool,
        n: usize,
        delta: f64,
        diameter: u32,
        symmetric_support: bool,
        lip_constant_c: f64,
    }
    let report = ValidateReport {
        valid: true,
        n: chain.n(),
        delta: metrics.delta,
        diameter: metrics.diameter,
        symmetric_support: true,
        lip_constant_c: metrics.lip_constant_c,
    };
    match format {
        OutputFormat::Json => println!("{}", json_line(&report)),
        _ => {
            let mut table = Table::new(&["n", "delta", "diameter", "symmetric_support", "c"]);
            table.push_row(vec![
                report.n.to_string(),
                fmt_num(report.delta),
                report.diameter.to_string(),
                report.symmetric_support.to_string(),
                fmt_num(report.lip_constant_c),
            ]);
            print!("{}", table.render(format));
        }
    }
    Ok(0)
}

fn cmd_profile(
    cli: &Cli,
    path: &Path,
    times: &[f64],
    points: usize,
    origins: &[usize],
    plot_data: Option<&Path>,
) -> Result<u8> {
    let analyzer = cli.load_analyzer(path, origins)?;
    let grid = if times.is_empty() {
        analyzer.auto_time_grid(points)
    } else {
        times.to_vec()
    };
    let format = cli.format();
    let mut config = cli.config("profile");
    config.chain = Some(path.display().to_string());
    config.times = Some(grid.clone());
    config.origins = opt_vec(origins);
    emit_config(format, &config);
    let mut rows = Vec::with_capacity(grid.len());
    for &t in &grid {
        rows.push(analyzer.worst_profile(t)?);
    }
    match format {
        OutputFormat::Json => {
            for p in &rows {
                println!("{}", json_line(p));
            }
        }
        _ => {
            let mut table =
                Table::new(&["t", "dtv", "dkl", "vkl", "argmax_tv", "argmax_kl", "argmax_vkl"]);
            for p in &rows {
                table.push_row(vec![
                    fmt_num(p.t),
                    fmt_num(p.dtv),
                    fmt_num(p.dkl),
                    fmt_num(p.vkl),
                    p.argmax_tv.to_string(),
                    p.argmax_kl.to_string(),
                    p.argmax_vkl.to_string(),
                ]);
            }
            print!("{}", table.render(format));
        }
    }
    if let Some(dir) = plot_data {
        cutoff_lab::output::write_profile_plots(dir, &rows)?;
    }
    Ok(0)
}

fn cmd_mixing_time(cli: &Cli, path: &Path, eps: &[f64], origins: &[usize]) -> Result<u8> {
    for &e in eps {
        if !(0.0 < e && e < 1.0) {
            return Err(Error::InvalidParams(format!("epsilon must be in (0,1), got {e}")));
        }
    }
    let analyzer = cli.load_analyzer(path, origins)?;
    let format = cli.format();
    let mut config = cli.config("mixing-time");
    config.chain = Some(path.display().to_string());
    config.eps = Some(eps.to_vec());
    config.origins = opt_vec(origins);
    emit_config(format, &config);
    let mut table = Table::new(&["epsilon", "t_mix", "bracket_width", "dtv_at_t"]);
    for &e in eps {
        let r = analyzer.mixing_time(e)?;
        match format {
            OutputFormat::Json => println!("{}", json_line(&r)),
            _ => table.push_row(vec![
                fmt_num(r.epsilon),
                fmt_num(r.t_mix),
                fmt_num(r.bracket_width),
                fmt_num(r.dtv_at_t),
            ]),
        }
    }
    if format != OutputFormat::Json {
        print!("{}", table.render(format));
    }
    Ok(0)
}

fn report_row(report: &BoundReport) -> Vec<String> {
    let opt = |v: Option<f64>| v.map(fmt_num).unwrap_or_default();
    vec![
        report.bound_id.to_string(),
        report.status().to_string(),
        opt(report.lhs),
        opt(report.rhs),
        opt(report.slack),
        report.note.clone(),
    ]
}

fn cmd_verify(cli: &Cli, path: &Path, eps: &[f64], strict: bool) -> Result<u8> {
    let analyzer = cli.load_analyzer(path, &[])?;
    let suite = BoundSuite::new(&analyzer).with_slack_tol(cli.slack_tol);
    let format = cli.format();
    let mut config = cli.config("verify");
    config.chain = Some(path.display().to_string());
    config.eps = Some(eps.to_vec());
    config.strict = strict;
    emit_config(format, &config);
    let reports = suite.run_all(eps)?;
    let mut table = Table::new(&["bound_id", "status", "lhs", "rhs", "slack", "note"]);
    let mut failed = 0usize;
    let mut skipped = 0usize;
    for r in &reports {
        if r.failed() {
            failed += 1;
        }
        if !r.preconditions_met {
            skipped += 1;
        }
        match format {
            OutputFormat::Json => println!("{}", json_line(r)),
            _ => table.push_row(report_row(r)),
        }
    }
    if format != OutputFormat::Json {
        print!("{}", table.render(format));
        println!(
            "{} checks: {} passed, {failed} failed, {skipped} skipped",
            reports.len(),
            reports.len() - failed - skipped
        );
    }
    if failed > 0 || (strict && skipped > 0) {
        Ok(2)
    } else {
        Ok(0)
    }
}

fn cmd_sweep(
    cli: &Cli,
    family: &FamilyArgs,
    sizes: &[usize],
    eps: &[f64],
    plot_data: Option<&Path>,
) -> Result<u8> {
    let template = family.spec(sizes[0])?;
    let format = cli.format();
    let mut config = cli.config("sweep");
    config.family = Some(template.clone());
    config.sizes = Some(sizes.to_vec());
    config.eps = Some(eps.to_vec());
    emit_config(format, &config);
    let opts = SweepOptions {
        heat_tol: cli.heat_tol,
        t_tol: cli.t_tol,
        slack_tol: cli.slack_tol,
    };
    let outcome = sweep::sweep(&template, sizes, eps, &opts)?;
    let verdict = sweep::verdict(&outcome.records, &VerdictThresholds::default());
    match format {
        OutputFormat::Json => {
            for r in &outcome.records {
                println!("{}", json_line(r));
            }
            for (n, report) in &outcome.window_bounds {
                #[derive(Serialize)]
                struct PerSize<'a> {
                    n: usize,
                    #[serde(flatten)]
                    report: &'a BoundReport,
                }
                println!("{}", json_line(&PerSize { n: *n, report }));
            }
            for (n, msg) in &outcome.failures {
                println!("{}", json_line(&serde_json::json!({ "n": n, "error": msg })));
            }
            if let Ok(v) = &verdict {
                println!("{}", json_line(v));
            }
        }
        _ => {
            let mut headers = vec!["n".to_string()];
            let sample = outcome.records.first();
            if let Some(r) = sample {
                headers.extend(r.t_mix.iter().map(|&(e, _)| format!("t_mix({e})")));
                headers.extend(r.window.iter().map(|&(e, _)| format!("window({e})")));
                headers.extend(r.vc_statistic.iter().map(|&(e, _)| format!("vc({e})")));
            }
            headers.extend(["gamma", "phi", "phi_exact", "delta", "p_min", "diameter"].map(String::from));
            let refs: Vec<&str> = headers.iter().map(String::as_str).collect();
            let mut table = Table::new(&refs);
            for r in &outcome.records {
                let mut row = vec![r.n.to_string()];
                row.extend(r.t_mix.iter().map(|&(_, v)| fmt_num(v)));
                row.extend(r.window.iter().map(|&(_, v)| fmt_num(v)));
                row.extend(r.vc_statistic.iter().map(|&(_, v)| fmt_num(v)));
                row.extend([
                    fmt_num(r.gamma),
                    fmt_num(r.phi),
                    r.phi_exact.to_string(),
                    fmt_num(r.delta),
                    fmt_num(r.p_min),
                    r.diameter.to_string(),
                ]);
                table.push_row(row);
            }
            print!("{}", table.render(format));
            for (n, msg) in &outcome.failures {
                println!("n={n}: FAILED: {msg}");
            }
            match &verdict {
                Ok(v) => {
                    println!(
                        "verdict: {} (epsilon {}, window-ratio slope {:.3}, vc slope {:.3}, A1 {}, A2 {})",
                        v.verdict, v.epsilon, v.window_ratio_slope, v.vc_slope, v.a1_holds, v.a2_holds
                    );
                }
                Err(e) => println!("verdict: unavailable ({e})"),
            }
        }
    }
    if let (Some(dir), Ok(v)) = (plot_data, &verdict) {
        cutoff_lab::output::write_sweep_plots(dir, &outcome.records, v)?;
    }
    Ok(if outcome.failures.is_empty() { 0 } else { 3 })
}

fn cmd_generate(cli: &Cli, family: &FamilyArgs, size: usize, output: Option<&Path>) -> Result<u8> {
    let spec = family.spec(size)?;
    let chain = families::generate(&spec)?;
    match output {
        Some(path) => io::write_chain(path, &chain)?,
        None => print!("{}", io::chain_to_text(&chain)),
    }
    let _ = cli;
    Ok(0)
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Validate { chain } => cmd_validate(cli, chain),
        Command::Profile { chain, times, points, origins, plot_data } => {
            cmd_profile(cli, chain, times, *points, origins, plot_data.as_deref())
        }
        Command::MixingTime { chain, eps, origins } => cmd_mixing_time(cli, chain, eps, origins),
        Command::Verify { chain, eps, strict } => cmd_verify(cli, chain, eps, *strict),
        Command::Sweep { family, sizes, eps, plot_data } => {
            cmd_sweep(cli, family, sizes, eps, plot_data.as_deref())
        }
        Command::Generate { family, size, output } => {
            cmd_generate(cli, family, *size, output.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(|| {
        std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        if n > 0 {
            // Errors only if a global pool already exists; safe to ignore.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            if cli.json {
                eprintln!(
                    "{}",
                    serde_json::json!({ "error": e.to_string(), "exit_code": e.exit_code() })
                );
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
