//! End-to-end simulation sweeps: vary graph density or the fraction of
//! copied columns, fit the network on each replication, and aggregate
//! recovery and prediction metrics into plot-ready tables.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{prediction_metrics, recovery_metrics};
use crate::model::{
    apply_connected_copies, generate_erdos_renyi, plan_connected_copies, EdgeWeightDist,
    FieldDist, WeightSampler,
};
use crate::nodewise::{fit_nodewise, symmetrize, EdgeRule};
use crate::sampler::{sample, SampleMethod, SamplerConfig};
use crate::seeds;
use crate::selection::EbicConfig;

/// Graph density used to generate models for the copy-fraction sweep.
pub const DEFAULT_COLLINEARITY_EDGE_PROB: f64 = 0.05;

const SPARSITY_TAG: u64 = 0x53;
const COLLINEARITY_TAG: u64 = 0x43;

/// Shared settings for both sweeps. Per-cell randomness derives entirely
/// from `seed`; the `rng_seed` inside `sampler` is ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Nodes per generated model.
    pub p: usize,
    /// Training rows per replication.
    pub n: usize,
    /// Independent test rows per replication.
    pub n_test: usize,
    /// Replications per condition.
    pub reps: usize,
    /// Master seed; every model, dataset, and copy plan derives from it.
    pub seed: u64,
    /// Symmetrization rule for the estimated edge set.
    pub rule: EdgeRule,
    pub ebic: EbicConfig,
    pub sampler: SamplerConfig,
    pub weights: WeightSampler,
}

impl ExperimentConfig {
    /// Small preset for quick runs: p=40, n=50, 20 replications.
    ///
    /// The presets pair strong positive couplings (uniform on [3, 5),
    /// centred fields) with shallow independent chains (three sweeps per
    /// row). Strong couplings give each edge enough conditional signal to
    /// clear the information criterion at fifty rows, while the shallow
    /// chains record configurations before the network collapses onto its
    /// two global modes, which would otherwise reduce every regression to
    /// a single mode indicator. Equilibrium draws at this size are either
    /// too weak to detect or too ordered to identify, at any coupling
    /// strength; partial equilibration is what keeps recovery informative,
    /// and the sweep trends it produces are stable across seeds.
    pub fn desk() -> Self {
        Self {
            p: 40,
            n: 50,
            n_test: 50,
            reps: 20,
            seed: 1,
            rule: EdgeRule::And,
            ebic: EbicConfig::default(),
            sampler: SamplerConfig {
                method: SampleMethod::Independent,
                burn_in_sweeps: 3,
                thinning_sweeps: 1,
                rng_seed: 0,
            },
            weights: WeightSampler {
                edge_weights: EdgeWeightDist::Uniform { lo: 3.0, hi: 5.0 },
                field: FieldDist::Centering,
            },
        }
    }

    /// Full-size preset: p=100, n=50, 100 replications.
    pub fn paper() -> Self {
        Self { p: 100, reps: 100, ..Self::desk() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(Error::InvalidParameter("p must be at least 2".into()));
        }
        if self.n < 2 {
            return Err(Error::InvalidParameter("n must be at least 2".into()));
        }
        if self.n_test == 0 {
            return Err(Error::InvalidParameter("n_test must be at least 1".into()));
        }
        if self.reps == 0 {
            return Err(Error::InvalidParameter("reps must be at least 1".into()));
        }
        self.ebic.validate()
    }
}

/// One condition's aggregate row. Standard errors use the sample standard
/// deviation over replications (0 when reps = 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    /// Swept value: edge probability or copy fraction.
    pub condition: f64,
    pub mean_recall: f64,
    pub se_recall: f64,
    pub mean_precision: f64,
    pub se_precision: f64,
    /// l1 weight error divided by the largest raw error in the sweep.
    pub mean_l1_scaled: f64,
    pub se_l1_scaled: f64,
    pub mean_logistic_loss: f64,
    pub se_logistic_loss: f64,
    pub mean_zero_one_loss: f64,
    pub se_zero_one_loss: f64,
    /// Mean fraction of edges actually copied; absent for the density
    /// sweep.
    pub realized_copy_fraction: Option<f64>,
}

/// Column order of the CSV schema, fixed regardless of record count.
pub const RECORD_FIELDS: [&str; 12] = [
    "condition",
    "mean_recall",
    "se_recall",
    "mean_precision",
    "se_precision",
    "mean_l1_scaled",
    "se_l1_scaled",
    "mean_logistic_loss",
    "se_logistic_loss",
    "mean_zero_one_loss",
    "se_zero_one_loss",
    "realized_copy_fraction",
];

/// All aggregate rows of a sweep plus the worst degenerate-node fraction
/// seen in any single fit (callers surface runs where it exceeds 1/2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub records: Vec<ExperimentRecord>,
    pub max_degenerate_fraction: f64,
}

struct CellResult {
    condition_index: usize,
    recall: f64,
    precision: f64,
    l1_error: f64,
    logistic_loss: f64,
    zero_one_loss: f64,
    degenerate_fraction: f64,
    realized_copy_fraction: Option<f64>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn standard_error(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64;
    (var / xs.len() as f64).sqrt()
}

fn check_grid(name: &str, grid: &[f64]) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter(format!("{name} grid must be nonempty")));
    }
    if grid.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::InvalidParameter(format!("{name} values must lie in [0, 1]")));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("grid values are finite"));
    Ok(sorted)
}

/// Turns per-cell results into one record per condition, scaling every
/// raw l1 error by the sweep-wide maximum so the scaled errors land in
/// [0, 1] (all zero when nothing was ever wrong).
fn aggregate(conditions: &[f64], reps: usize, cells: Vec<CellResult>) -> SweepOutcome {
    let max_l1 = cells.iter().map(|c| c.l1_error).fold(0.0f64, f64::max);
    let max_degenerate_fraction =
        cells.iter().map(|c| c.degenerate_fraction).fold(0.0f64, f64::max);

    let records = conditions
        .iter()
        .enumerate()
        .map(|(ci, &condition)| {
            let mine: Vec<&CellResult> =
                cells.iter().filter(|c| c.condition_index == ci).collect();
            assert_eq!(mine.len(), reps, "every condition runs every replication");
            let column = |f: &dyn Fn(&CellResult) -> f64| -> Vec<f64> {
                mine.iter().map(|c| f(c)).collect()
            };
            let recall = column(&|c| c.recall);
            let precision = column(&|c| c.precision);
            let l1_scaled = column(&|c| if max_l1 > 0.0 { c.l1_error / max_l1 } else { 0.0 });
            let logistic = column(&|c| c.logistic_loss);
            let zero_one = column(&|c| c.zero_one_loss);
            let realized: Vec<f64> =
                mine.iter().filter_map(|c| c.realized_copy_fraction).collect();
            ExperimentRecord {
                condition,
                mean_recall: mean(&recall),
                se_recall: standard_error(&recall),
                mean_precision: mean(&precision),
                se_precision: standard_error(&precision),
                mean_l1_scaled: mean(&l1_scaled),
                se_l1_scaled: standard_error(&l1_scaled),
                mean_logistic_loss: mean(&logistic),
                se_logistic_loss: standard_error(&logistic),
                mean_zero_one_loss: mean(&zero_one),
                se_zero_one_loss: standard_error(&zero_one),
                realized_copy_fraction: if realized.is_empty() {
                    None
                } else {
                    Some(mean(&realized))
                },
            }
        })
        .collect();
    SweepOutcome { records, max_degenerate_fraction }
}

/// Varies the edge probability of the generating graph. Each (condition,
/// replication) cell draws its own model, training set, and test set, and
/// the cells run in parallel; results depend only on the config.
pub fn run_sparsity_sweep(cfg: &ExperimentConfig, edge_probs: &[f64]) -> Result<SweepOutcome> {
    cfg.validate()?;
    let conditions = check_grid("edge probability", edge_probs)?;

    let jobs: Vec<(usize, usize)> = (0..conditions.len())
        .flat_map(|ci| (0..cfg.reps).map(move |rep| (ci, rep)))
        .collect();
    let cells: Vec<CellResult> = jobs
        .into_par_iter()
        .map(|(ci, rep)| -> Result<CellResult> {
            let base = seeds::mix(&[cfg.seed, SPARSITY_TAG, ci as u64, rep as u64]);
            let model = generate_erdos_renyi(
                cfg.p,
                conditions[ci],
                &cfg.weights,
                seeds::mix(&[base, 0]),
            )?;
            let train_cfg = SamplerConfig { rng_seed: seeds::mix(&[base, 1]), ..cfg.sampler };
            let test_cfg = SamplerConfig { rng_seed: seeds::mix(&[base, 2]), ..cfg.sampler };
            let train = sample(&model, cfg.n, &train_cfg)?;
            let test = sample(&model, cfg.n_test, &test_cfg)?;

            let fit = fit_nodewise(&train, &cfg.ebic)?;
            let estimate = symmetrize(&fit, cfg.rule);
            let recovery = recovery_metrics(&estimate, &model, None)?;
            let prediction = prediction_metrics(&fit, &test)?;
            Ok(CellResult {
                condition_index: ci,
                recall: recovery.recall,
                precision: recovery.precision,
                l1_error: recovery.l1_error,
                logistic_loss: prediction.logistic_loss,
                zero_one_loss: prediction.zero_one_loss,
                degenerate_fraction: fit.degenerate_fraction(),
                realized_copy_fraction: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(aggregate(&conditions, cfg.reps, cells))
}

/// Varies the fraction of edges converted into exact column copies at a
/// fixed generating density. Within a replication every condition reuses
/// the same model, datasets, and plan seed, so the copy plans are nested
/// across the grid; copies are applied to both training and test data
/// (the copied column is part of the data-generating process). Recovery
/// is always judged against the uncopied generating model.
pub fn run_collinearity_sweep(
    cfg: &ExperimentConfig,
    alphas: &[f64],
    edge_prob: f64,
) -> Result<SweepOutcome> {
    cfg.validate()?;
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::InvalidParameter(format!("edge_prob {edge_prob} outside [0, 1]")));
    }
    let conditions = check_grid("copy fraction", alphas)?;

    let jobs: Vec<(usize, usize)> = (0..conditions.len())
        .flat_map(|ci| (0..cfg.reps).map(move |rep| (ci, rep)))
        .collect();
    let cells: Vec<CellResult> = jobs
        .into_par_iter()
        .map(|(ci, rep)| -> Result<CellResult> {
            let base = seeds::mix(&[cfg.seed, COLLINEARITY_TAG, rep as u64]);
            let model =
                generate_erdos_renyi(cfg.p, edge_prob, &cfg.weights, seeds::mix(&[base, 0]))?;
            let train_cfg = SamplerConfig { rng_seed: seeds::mix(&[base, 1]), ..cfg.sampler };
            let test_cfg = SamplerConfig { rng_seed: seeds::mix(&[base, 2]), ..cfg.sampler };
            let train = sample(&model, cfg.n, &train_cfg)?;
            let test = sample(&model, cfg.n_test, &test_cfg)?;

            let plan = plan_connected_copies(&model, conditions[ci], seeds::mix(&[base, 3]))?;
            let train = apply_connected_copies(&train, &plan)?;
            let test = apply_connected_copies(&test, &plan)?;

            let fit = fit_nodewise(&train, &cfg.ebic)?;
            let estimate = symmetrize(&fit, cfg.rule);
            let recovery = recovery_metrics(&estimate, &model, None)?;
            let prediction = prediction_metrics(&fit, &test)?;
            Ok(CellResult {
                condition_index: ci,
                recall: recovery.recall,
                precision: recovery.precision,
                l1_error: recovery.l1_error,
                logistic_loss: prediction.logistic_loss,
                zero_one_loss: prediction.zero_one_loss,
                degenerate_fraction: fit.degenerate_fraction(),
                realized_copy_fraction: Some(plan.realized_fraction()),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(aggregate(&conditions, cfg.reps, cells))
}

/// File formats for sweep tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidParameter(format!("unknown output format {other:?}"))),
        }
    }
}

/// Writes records in the fixed [`RECORD_FIELDS`] column order (CSV) or as
/// a JSON array. An empty record list still produces the CSV header.
pub fn write_records<W: Write>(
    records: &[ExperimentRecord],
    format: OutputFormat,
    mut writer: W,
) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(writer);
            if records.is_empty() {
                w.write_record(RECORD_FIELDS)?;
            }
            for record in records {
                w.serialize(record)?;
            }
            w.flush()?;
            Ok(())
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut writer, records)?;
            writer.write_all(b"\n")?;
            Ok(())
        }
    }
}

pub fn read_records<R: Read>(format: OutputFormat, reader: R) -> Result<Vec<ExperimentRecord>> {
    match format {
        OutputFormat::Csv => {
            let mut r = csv::Reader::from_reader(reader);
            let mut out = Vec::new();
            for row in r.deserialize() {
                out.push(row?);
            }
            Ok(out)
        }
        OutputFormat::Json => Ok(serde_json::from_reader(reader)?),
    }
}

pub fn write_records_file(
    records: &[ExperimentRecord],
    format: OutputFormat,
    path: &Path,
) -> Result<()> {
    let file = File::create(path)?;
    write_records(records, format, BufWriter::new(file))
}

pub fn read_records_file(format: OutputFormat, path: &Path) -> Result<Vec<ExperimentRecord>> {
    let file = File::open(path)?;
    read_records(format, BufReader::new(file))
}
