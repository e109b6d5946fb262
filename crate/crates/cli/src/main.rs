//! Command line front end: generate models, draw samples, fit networks,
//! run the theory checks, and drive the simulation sweeps.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use isingnet::evaluation::{
    default_mc_rows, generating_thetas, re_diagnostics, verify_bounds, verify_copy_invariance,
    verify_risk_monotonicity,
};
use isingnet::experiments::{
    run_collinearity_sweep, run_sparsity_sweep, write_records_file, ExperimentConfig,
    OutputFormat, DEFAULT_COLLINEARITY_EDGE_PROB,
};
use isingnet::model::{
    apply_connected_copies, generate_erdos_renyi, plan_connected_copies, BinaryDataset,
    IsingModel, WeightSampler,
};
use isingnet::nodewise::{fit_nodewise, symmetrize, EdgeRule, EdgeSetEstimate, NodewiseFit};
use isingnet::sampler::{sample, SampleMethod, SamplerConfig};
use isingnet::seeds;
use isingnet::selection::EbicConfig;

#[derive(Parser)]
#[command(
    name = "isingnet",
    version,
    about = "Binary Markov network estimation by nodewise penalised logistic regression"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random model and write it as JSON.
    Generate(GenerateArgs),
    /// Sample binary configurations from a model file.
    Sample(SampleArgs),
    /// Fit a network to a CSV dataset.
    Fit(FitArgs),
    /// Run one of the built-in theory checks on simulated instances.
    Verify(VerifyArgs),
    /// Run a density or copy-fraction sweep and write the aggregate table.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of nodes.
    #[arg(long)]
    p: usize,
    /// Probability of each edge.
    #[arg(long, default_value_t = 0.05)]
    edge_prob: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output model JSON path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    /// Model JSON produced by `generate` (or written by hand).
    #[arg(long)]
    model: PathBuf,
    /// Rows to draw.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Burn-in sweeps before the first retained row (gibbs), or sweeps
    /// per row (independent).
    #[arg(long, default_value_t = 1000)]
    burnin: usize,
    /// Sweeps between retained rows (gibbs only).
    #[arg(long, default_value_t = 10)]
    thin: usize,
    /// gibbs | independent | exact (exact needs at most 16 nodes).
    #[arg(long, default_value = "gibbs")]
    method: String,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    /// Headerless 0/1 CSV, rows are observations.
    #[arg(long)]
    data: PathBuf,
    /// and | or
    #[arg(long, default_value = "and")]
    rule: String,
    #[arg(long, default_value_t = 0.25)]
    ebic_gamma: f64,
    /// Output JSON path (per-node fits plus the symmetrised weights).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// copies | monotonicity | bounds | re
    #[arg(long)]
    check: String,
    #[arg(long, default_value_t = 20)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Nodes per simulated instance (check-specific default).
    #[arg(long)]
    p: Option<usize>,
    /// Rows per simulated instance (check-specific default).
    #[arg(long)]
    n: Option<usize>,
    /// Edge probability of the generating graphs (check-specific default).
    #[arg(long)]
    edge_prob: Option<f64>,
    /// Fraction of edges converted to copies (copies/re checks).
    #[arg(long)]
    alpha: Option<f64>,
    /// Output JSON report path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// sparsity | collinearity
    #[arg(long)]
    mode: String,
    /// desk | paper
    #[arg(long, default_value = "desk")]
    preset: String,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    n_test: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    /// Comma-separated condition values, e.g. "0.025,0.05,0.1".
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    ebic_gamma: Option<f64>,
    /// and | or
    #[arg(long)]
    rule: Option<String>,
    /// Generating edge probability for the collinearity mode.
    #[arg(long)]
    edge_prob: Option<f64>,
    /// csv | json
    #[arg(long, default_value = "csv")]
    format: String,
    /// Output table path.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate(args) => run_generate(&args),
        Command::Sample(args) => run_sample(&args),
        Command::Fit(args) => run_fit(&args),
        Command::Verify(args) => run_verify(&args),
        Command::Experiment(args) => run_experiment(&args),
    }
}

fn run_generate(args: &GenerateArgs) -> Result<ExitCode> {
    let model = generate_erdos_renyi(args.p, args.edge_prob, &WeightSampler::default(), args.seed)?;
    model.write_json_file(&args.out).with_context(|| format!("writing {}", args.out.display()))?;
    println!("wrote model with {} nodes and {} edges to {}", model.p(), model.edges().len(), args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn parse_method(s: &str) -> Result<SampleMethod> {
    match s.to_ascii_lowercase().as_str() {
        "gibbs" => Ok(SampleMethod::Gibbs),
        "independent" => Ok(SampleMethod::Independent),
        "exact" => Ok(SampleMethod::Exact),
        other => bail!("unknown sampling method {other:?} (expected gibbs, independent, or exact)"),
    }
}

fn run_sample(args: &SampleArgs) -> Result<ExitCode> {
    let model = IsingModel::read_json_file(&args.model)
        .with_context(|| format!("reading {}", args.model.display()))?;
    let cfg = SamplerConfig {
        method: parse_method(&args.method)?,
        burn_in_sweeps: args.burnin,
        thinning_sweeps: args.thin,
        rng_seed: args.seed,
    };
    let data = sample(&model, args.n, &cfg)?;
    data.write_csv_file(&args.out).with_context(|| format!("writing {}", args.out.display()))?;
    println!("wrote {} rows x {} columns to {}", data.n(), data.p(), args.out.display());
    Ok(ExitCode::SUCCESS)
}

/// Everything `fit` knows: the per-node regressions and the symmetrised
/// edge estimate.
#[derive(Serialize)]
struct FitOutput {
    fit: NodewiseFit,
    estimate: EdgeSetEstimate,
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}

fn run_fit(args: &FitArgs) -> Result<ExitCode> {
    let data = BinaryDataset::read_csv_file(&args.data)
        .with_context(|| format!("reading {}", args.data.display()))?;
    let rule: EdgeRule = args.rule.parse()?;
    let cfg = EbicConfig { gamma: args.ebic_gamma, ..EbicConfig::default() };
    let fit = fit_nodewise(&data, &cfg)?;
    let estimate = symmetrize(&fit, rule);
    let edges = estimate.support().len();
    write_json(&FitOutput { fit, estimate }, &args.out)?;
    println!("fit {} nodes on {} rows, {} edges under the {} rule; wrote {}",
        data.p(), data.n(), edges, rule, args.out.display());
    Ok(ExitCode::SUCCESS)
}

struct VerifyScenario {
    p: usize,
    n: usize,
    edge_prob: f64,
    alpha: f64,
}

fn scenario(args: &VerifyArgs, p: usize, n: usize, edge_prob: f64, alpha: f64) -> VerifyScenario {
    VerifyScenario {
        p: args.p.unwrap_or(p),
        n: args.n.unwrap_or(n),
        edge_prob: args.edge_prob.unwrap_or(edge_prob),
        alpha: args.alpha.unwrap_or(alpha),
    }
}

#[derive(Serialize)]
struct CopiesCheckReport {
    reps: usize,
    /// Instances whose plan actually contained at least one copy.
    instances: usize,
    max_risk_delta: f64,
    max_l1_delta: f64,
    tolerance: f64,
    all_within_tolerance: bool,
}

fn run_verify_copies(args: &VerifyArgs) -> Result<CopiesCheckReport> {
    let sc = scenario(args, 8, 120, 0.35, 0.4);
    let mut instances = 0usize;
    let mut max_risk_delta = 0.0f64;
    let mut max_l1_delta = 0.0f64;
    for rep in 0..args.reps {
        let base = seeds::mix(&[args.seed, 0x10, rep as u64]);
        let model =
            generate_erdos_renyi(sc.p, sc.edge_prob, &WeightSampler::default(), seeds::mix(&[base, 0]))?;
        let plan = plan_connected_copies(&model, sc.alpha, seeds::mix(&[base, 1]))?;
        if plan.pairs.is_empty() {
            continue;
        }
        let cfg = SamplerConfig { rng_seed: seeds::mix(&[base, 2]), ..SamplerConfig::default() };
        let data = apply_connected_copies(&sample(&model, sc.n, &cfg)?, &plan)?;
        let fit = fit_nodewise(&data, &EbicConfig::default())?;

        // One degenerate split (all mass on the source) and one uneven
        // proper split per class.
        let classes = plan.classes();
        let degenerate: Vec<Vec<f64>> = classes
            .iter()
            .map(|(_, targets)| {
                let mut w = vec![0.0; 1 + targets.len()];
                w[0] = 1.0;
                w
            })
            .collect();
        let uneven: Vec<Vec<f64>> = classes
            .iter()
            .map(|(_, targets)| {
                let k = 1 + targets.len();
                let raw: Vec<f64> = (0..k).map(|j| (j + 1) as f64).collect();
                let total: f64 = raw.iter().sum();
                raw.into_iter().map(|v| v / total).collect()
            })
            .collect();
        for weights in [&degenerate, &uneven] {
            let report = verify_copy_invariance(&fit, &data, &plan, weights)?;
            max_risk_delta = max_risk_delta.max(report.max_risk_delta);
            max_l1_delta = max_l1_delta.max(report.max_l1_delta);
        }
        instances += 1;
    }
    let tolerance = 1e-10;
    Ok(CopiesCheckReport {
        reps: args.reps,
        instances,
        max_risk_delta,
        max_l1_delta,
        tolerance,
        all_within_tolerance: max_risk_delta <= tolerance && max_l1_delta <= tolerance,
    })
}

#[derive(Serialize)]
struct ReCheckReport {
    reps: usize,
    /// Instances where some copied pair sits inside a node's true
    /// neighbourhood, making the restricted block exactly singular.
    instances_with_pair_in_neighbourhood: usize,
    /// Among those, how many the diagnostics flagged as violated.
    detected: usize,
    all_detected: bool,
    min_gamma: f64,
    max_gamma_over_flagged: f64,
}

fn run_verify_re(args: &VerifyArgs) -> Result<ReCheckReport> {
    let sc = scenario(args, 8, 100, 0.4, 0.5);
    let mut with_condition = 0usize;
    let mut detected = 0usize;
    let mut min_gamma = f64::INFINITY;
    let mut max_gamma_over_flagged = 0.0f64;
    for rep in 0..args.reps {
        let base = seeds::mix(&[args.seed, 0x20, rep as u64]);
        let model =
            generate_erdos_renyi(sc.p, sc.edge_prob, &WeightSampler::default(), seeds::mix(&[base, 0]))?;
        let plan = plan_connected_copies(&model, sc.alpha, seeds::mix(&[base, 1]))?;
        let cfg = SamplerConfig { rng_seed: seeds::mix(&[base, 2]), ..SamplerConfig::default() };
        let data = apply_connected_copies(&sample(&model, sc.n, &cfg)?, &plan)?;
        let diag = re_diagnostics(&data, &model, &generating_thetas(&model))?;
        if diag.gamma.is_finite() {
            min_gamma = min_gamma.min(diag.gamma);
        }
        let pair_in_neighbourhood = (0..model.p()).any(|r| {
            let nb = model.neighbors(r);
            plan.pairs.iter().any(|&(u, v)| nb.contains(&u) && nb.contains(&v))
        });
        if pair_in_neighbourhood {
            with_condition += 1;
            if diag.violated {
                detected += 1;
            } else {
                max_gamma_over_flagged = max_gamma_over_flagged.max(diag.gamma);
            }
        }
    }
    Ok(ReCheckReport {
        reps: args.reps,
        instances_with_pair_in_neighbourhood: with_condition,
        detected,
        all_detected: detected == with_condition,
        min_gamma,
        max_gamma_over_flagged,
    })
}

#[derive(Serialize)]
struct MonotonicityCheckReport {
    reps: usize,
    /// Instances where every row's removed contribution shared one sign,
    /// so the risk ordering is forced exactly.
    per_row_certified: usize,
    /// Certified instances whose observed risks obeyed the forced order.
    certificates_respected: usize,
    certificate_violations: usize,
    /// Instances where the coefficient-sum direction matched the observed
    /// risk ordering.
    sign_consistent: usize,
}

fn run_verify_monotonicity(args: &VerifyArgs) -> Result<MonotonicityCheckReport> {
    let sc = scenario(args, 6, 100, 0.4, 0.0);
    let mut per_row_certified = 0usize;
    let mut certificates_respected = 0usize;
    let mut certificate_violations = 0usize;
    let mut sign_consistent = 0usize;
    for rep in 0..args.reps {
        let base = seeds::mix(&[args.seed, 0x30, rep as u64]);
        let model =
            generate_erdos_renyi(sc.p, sc.edge_prob, &WeightSampler::default(), seeds::mix(&[base, 0]))?;
        let cfg = SamplerConfig { rng_seed: seeds::mix(&[base, 1]), ..SamplerConfig::default() };
        let data = sample(&model, sc.n, &cfg)?;
        let fit = fit_nodewise(&data, &EbicConfig::default())?;
        let theta = &fit.per_node[0].theta;
        // Zero out nothing versus all of node 0's selected predictors.
        let b: Vec<usize> = (1..sc.p)
            .filter(|&t| theta[isingnet::nodewise::design_column(0, t)] != 0.0)
            .collect();
        let report = verify_risk_monotonicity(theta, &data, 0, &[], &b)?;
        if report.rows_all_nonneg || report.rows_all_nonpos {
            per_row_certified += 1;
            let respected = if report.rows_all_nonneg {
                report.per_row_guarantees_ge
                    && report.risk_a_removed >= report.risk_b_removed - 1e-12
            } else {
                report.per_row_guarantees_le
                    && report.risk_a_removed <= report.risk_b_removed + 1e-12
            };
            if respected {
                certificates_respected += 1;
            } else {
                certificate_violations += 1;
            }
        }
        if report.consistent {
            sign_consistent += 1;
        }
    }
    Ok(MonotonicityCheckReport {
        reps: args.reps,
        per_row_certified,
        certificates_respected,
        certificate_violations,
        sign_consistent,
    })
}

#[derive(Serialize)]
struct BoundsCheckReport {
    reps: usize,
    holds_penalized: usize,
    holds_error_norm: usize,
    /// Instances where the penalised bound held but the error-norm bound
    /// did not (expected never: the second follows from the first).
    implication_failures: usize,
    gamma_above_threshold: usize,
    gamma_threshold: f64,
    /// Among instances with gamma above the threshold, how many satisfied
    /// the l1 estimation bound.
    estimation_holds: usize,
    /// Among instances with gamma above the threshold, how many violated
    /// the l1 estimation bound (the bound binds only where gamma clears
    /// the threshold; instances below it are unfalsified).
    estimation_violations: usize,
    mean_pred_loss_max: f64,
}

fn run_verify_bounds(args: &VerifyArgs) -> Result<BoundsCheckReport> {
    let sc = scenario(args, 10, 200, 0.2, 0.0);
    let mut holds_penalized = 0usize;
    let mut holds_error_norm = 0usize;
    let mut implication_failures = 0usize;
    let mut gamma_above = 0usize;
    let mut estimation_holds = 0usize;
    let mut estimation_violations = 0usize;
    let mut pred_sum = 0.0f64;
    let gamma_threshold = 0.05;
    for rep in 0..args.reps {
        let base = seeds::mix(&[args.seed, 0x40, rep as u64]);
        let model =
            generate_erdos_renyi(sc.p, sc.edge_prob, &WeightSampler::default(), seeds::mix(&[base, 0]))?;
        let cfg = SamplerConfig { rng_seed: seeds::mix(&[base, 1]), ..SamplerConfig::default() };
        let train = sample(&model, sc.n, &cfg)?;
        let fit = fit_nodewise(&train, &EbicConfig::default())?;
        let report = verify_bounds(
            &fit,
            &model,
            &train,
            default_mc_rows(sc.p, sc.n),
            seeds::mix(&[base, 2]),
        )?;
        if report.holds_penalized_bound {
            holds_penalized += 1;
            if !report.holds_error_norm_bound {
                implication_failures += 1;
            }
        }
        if report.holds_error_norm_bound {
            holds_error_norm += 1;
        }
        if report.gamma > gamma_threshold {
            gamma_above += 1;
            if report.holds_estimation_bound {
                estimation_holds += 1;
            } else {
                estimation_violations += 1;
            }
        }
        pred_sum += report.pred_loss_max;
    }
    Ok(BoundsCheckReport {
        reps: args.reps,
        holds_penalized,
        holds_error_norm,
        implication_failures,
        gamma_above_threshold: gamma_above,
        gamma_threshold,
        estimation_holds,
        estimation_violations,
        mean_pred_loss_max: if args.reps > 0 { pred_sum / args.reps as f64 } else { 0.0 },
    })
}

fn run_verify(args: &VerifyArgs) -> Result<ExitCode> {
    if args.reps == 0 {
        bail!("--reps must be at least 1");
    }
    match args.check.to_ascii_lowercase().as_str() {
        "copies" => {
            let report = run_verify_copies(args)?;
            write_json(&report, &args.out)?;
            println!(
                "copies: {} instances, max risk delta {:.3e}, max l1 delta {:.3e}, within tolerance: {}",
                report.instances, report.max_risk_delta, report.max_l1_delta,
                report.all_within_tolerance
            );
        }
        "re" => {
            let report = run_verify_re(args)?;
            write_json(&report, &args.out)?;
            println!(
                "re: {} of {} instances with a copied pair inside a neighbourhood detected as violations",
                report.detected, report.instances_with_pair_in_neighbourhood
            );
        }
        "monotonicity" => {
            let report = run_verify_monotonicity(args)?;
            write_json(&report, &args.out)?;
            println!(
                "monotonicity: {} certified instances, {} respected, {} violations",
                report.per_row_certified, report.certificates_respected,
                report.certificate_violations
            );
        }
        "bounds" => {
            let report = run_verify_bounds(args)?;
            write_json(&report, &args.out)?;
            println!(
                "bounds: penalised {}/{}, error-norm {}/{}, implication failures {}, estimation {}/{} in force (violations {}, gamma > {})",
                report.holds_penalized, report.reps, report.holds_error_norm, report.reps,
                report.implication_failures, report.estimation_holds,
                report.gamma_above_threshold, report.estimation_violations,
                report.gamma_threshold
            );
        }
        other => bail!("unknown check {other:?} (expected copies, monotonicity, bounds, or re)"),
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .with_context(|| format!("invalid grid value {part:?}"))
        })
        .collect()
}

fn run_experiment(args: &ExperimentArgs) -> Result<ExitCode> {
    let mut cfg = match args.preset.to_ascii_lowercase().as_str() {
        "desk" => ExperimentConfig::desk(),
        "paper" => ExperimentConfig::paper(),
        other => bail!("unknown preset {other:?} (expected desk or paper)"),
    };
    if let Some(p) = args.p {
        cfg.p = p;
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(n_test) = args.n_test {
        cfg.n_test = n_test;
    }
    if let Some(reps) = args.reps {
        cfg.reps = reps;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(gamma) = args.ebic_gamma {
        cfg.ebic.gamma = gamma;
    }
    if let Some(rule) = &args.rule {
        cfg.rule = rule.parse()?;
    }
    let format: OutputFormat = args.format.parse()?;

    let outcome = match args.mode.to_ascii_lowercase().as_str() {
        "sparsity" => {
            let grid = match &args.grid {
                Some(g) => parse_grid(g)?,
                None => vec![0.025, 0.05, 0.1, 0.15, 0.2],
            };
            run_sparsity_sweep(&cfg, &grid)?
        }
        "collinearity" => {
            let grid = match &args.grid {
                Some(g) => parse_grid(g)?,
                None => vec![0.0, 0.2, 0.4, 0.6],
            };
            let edge_prob = args.edge_prob.unwrap_or(DEFAULT_COLLINEARITY_EDGE_PROB);
            run_collinearity_sweep(&cfg, &grid, edge_prob)?
        }
        other => bail!("unknown mode {other:?} (expected sparsity or collinearity)"),
    };

    write_records_file(&outcome.records, format, &args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "wrote {} rows to {} (worst degenerate-node fraction {:.3})",
        outcome.records.len(),
        args.out.display(),
        outcome.max_degenerate_fraction
    );
    if outcome.max_degenerate_fraction > 0.5 {
        eprintln!(
            "warning: a fit had {:.0}% degenerate nodes; results written but flagged",
            outcome.max_degenerate_fraction * 100.0
        );
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}
