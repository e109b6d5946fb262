//! Evaluation of fitted networks: recovery and prediction metrics,
//! Fisher-information diagnostics for near-collinear designs, and
//! verifiers for the finite-sample guarantees the estimator is supposed
//! to satisfy.

use std::collections::{BTreeMap, BTreeSet};

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lasso::logistic_loss;
use crate::linalg::smallest_eigenvalue;
use crate::model::{BinaryDataset, CopyPlan, IsingModel};
use crate::nodewise::{design_column, node_design, EdgeSetEstimate, NodewiseFit};
use crate::numeric::sigmoid;
use crate::sampler::{exact_pmf, sample, SamplerConfig};

/// Restricted eigenvalues at or below this are treated as exact
/// violations (the restricted Fisher block is singular to within
/// accumulated rounding).
pub const RE_VIOLATION_EIG_TOL: f64 = 1e-10;

/// Largest node count for which bound verification enumerates the joint
/// distribution exactly instead of Monte Carlo.
pub const EXACT_PRED_MAX_NODES: usize = 12;

/// Edge-set and weight recovery of an estimate against the generating
/// model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryMetrics {
    /// Fraction of true edges found; 1 when the true graph is empty.
    pub recall: f64,
    /// Fraction of found edges that are true; 1 when nothing was found.
    pub precision: f64,
    /// Sum over unordered pairs of |estimated weight - true weight|.
    pub l1_error: f64,
    /// `l1_error` divided by the supplied scale; see [`recovery_metrics`].
    pub l1_error_scaled: f64,
}

/// Compares an estimated edge set against the generating model.
///
/// `scale` normalises the l1 weight error: pass the maximum raw error
/// across a sweep to land every value in [0, 1] (a zero scale maps
/// everything to zero), or `None` to self-normalise a single estimate
/// (0 when the raw error is 0, else 1).
pub fn recovery_metrics(
    estimate: &EdgeSetEstimate,
    truth: &IsingModel,
    scale: Option<f64>,
) -> Result<RecoveryMetrics> {
    if estimate.p != truth.p() {
        return Err(Error::DimensionMismatch(format!(
            "estimate has {} nodes, model has {}",
            estimate.p,
            truth.p()
        )));
    }
    let true_edges: BTreeSet<(usize, usize)> =
        truth.edges().iter().map(|&(s, t, _)| (s, t)).collect();
    let found: BTreeSet<(usize, usize)> = estimate.support().into_iter().collect();
    let hits = found.intersection(&true_edges).count() as f64;

    let recall = if true_edges.is_empty() { 1.0 } else { hits / true_edges.len() as f64 };
    let precision = if found.is_empty() { 1.0 } else { hits / found.len() as f64 };

    let p = truth.p();
    let mut l1_error = 0.0;
    for s in 0..p {
        for t in (s + 1)..p {
            l1_error += (estimate.weights[[s, t]] - truth.interaction(s, t)).abs();
        }
    }
    let l1_error_scaled = match scale {
        Some(u) => {
            if !u.is_finite() || u < 0.0 {
                return Err(Error::InvalidParameter(format!("scale {u} must be >= 0")));
            }
            if u > 0.0 {
                l1_error / u
            } else {
                0.0
            }
        }
        None => {
            if l1_error == 0.0 {
                0.0
            } else {
                1.0
            }
        }
    };
    Ok(RecoveryMetrics { recall, precision, l1_error, l1_error_scaled })
}

/// Conditional prediction quality of a fit on a dataset, averaged over
/// every (row, node) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionMetrics {
    /// Mean logistic loss of the fitted conditionals.
    pub logistic_loss: f64,
    /// Mean disagreement of the thresholded conditionals (a zero linear
    /// predictor classifies as 0).
    pub zero_one_loss: f64,
}

/// Evaluates each node's fitted conditional on each row of `data`.
pub fn prediction_metrics(fit: &NodewiseFit, data: &BinaryDataset) -> Result<PredictionMetrics> {
    if data.p() != fit.p {
        return Err(Error::DimensionMismatch(format!(
            "fit has {} nodes, data has {}",
            fit.p,
            data.p()
        )));
    }
    let n = data.n();
    let p = fit.p;
    let mut loss = 0.0;
    let mut miss = 0usize;
    for s in 0..p {
        let theta = &fit.per_node[s].theta;
        for i in 0..n {
            let mut mu = theta[0];
            for t in 0..p {
                if t != s && data.get(i, t) == 1 {
                    mu += theta[design_column(s, t)];
                }
            }
            let y = f64::from(data.get(i, s));
            loss += logistic_loss(y, mu);
            let predicted = u8::from(mu > 0.0);
            if predicted != data.get(i, s) {
                miss += 1;
            }
        }
    }
    let cells = (n * p) as f64;
    Ok(PredictionMetrics { logistic_loss: loss / cells, zero_one_loss: miss as f64 / cells })
}

/// Empirical Fisher information of a logistic regression at `theta`:
/// `(1/n) sum_i w_i d_i d_i^T` with `w_i = pi_i (1 - pi_i)`.
pub fn empirical_fisher(theta: &ArrayView1<f64>, design: &Array2<f64>) -> Array2<f64> {
    let n = design.nrows();
    let k = design.ncols();
    assert_eq!(theta.len(), k, "theta length must match design width");
    let mut fisher = Array2::<f64>::zeros((k, k));
    for i in 0..n {
        let row = design.row(i);
        let mut mu = 0.0;
        for j in 0..k {
            mu += row[j] * theta[j];
        }
        let pi = sigmoid(mu);
        let w = pi * (1.0 - pi);
        for a in 0..k {
            let wa = w * row[a];
            for b in a..k {
                fisher[[a, b]] += wa * row[b];
            }
        }
    }
    let nf = n as f64;
    for a in 0..k {
        for b in a..k {
            fisher[[a, b]] /= nf;
            fisher[[b, a]] = fisher[[a, b]];
        }
    }
    fisher
}

/// Per-node regression parameters implied by a generating model: for node
/// s, `[field_s, interactions to the other nodes ascending]`, matching the
/// layout of [`node_design`].
pub fn generating_thetas(model: &IsingModel) -> Vec<Vec<f64>> {
    let p = model.p();
    (0..p)
        .map(|s| {
            let mut theta = vec![0.0; p];
            theta[0] = model.field(s);
            for t in 0..p {
                if t != s {
                    theta[design_column(s, t)] = model.interaction(s, t);
                }
            }
            theta
        })
        .collect()
}

/// Spectral health of the per-node Fisher blocks restricted to the true
/// neighbourhoods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReDiagnostics {
    /// Smallest eigenvalue of each node's restricted Fisher block; `None`
    /// for nodes with no true neighbours (nothing to restrict to).
    pub per_node_min_eig: Vec<Option<f64>>,
    /// Minimum over nodes of the restricted eigenvalues, clamped at 0;
    /// infinite when no node has neighbours.
    pub gamma: f64,
    /// Largest diagonal Fisher entry across all nodes and columns
    /// (intercept included); an upper bound on per-coordinate curvature.
    pub max_fisher_diag: f64,
    /// True when `gamma` is at most [`RE_VIOLATION_EIG_TOL`].
    pub violated: bool,
}

/// Computes, for every node s, the smallest eigenvalue of the empirical
/// Fisher information restricted to the columns of s's true neighbours,
/// with curvature weights evaluated at `thetas[s]` (one length-p vector
/// per node in [`node_design`] layout).
///
/// Exactly collinear neighbour columns (for example a copied pair inside
/// one neighbourhood) make the restricted block singular, driving the
/// eigenvalue, and hence `gamma`, to zero.
pub fn re_diagnostics(
    data: &BinaryDataset,
    truth: &IsingModel,
    thetas: &[Vec<f64>],
) -> Result<ReDiagnostics> {
    let p = truth.p();
    if data.p() != p {
        return Err(Error::DimensionMismatch(format!(
            "data has {} nodes, model has {}",
            data.p(),
            p
        )));
    }
    if thetas.len() != p || thetas.iter().any(|t| t.len() != p) {
        return Err(Error::DimensionMismatch("need one length-p theta per node".into()));
    }
    let n = data.n();
    let nf = n as f64;

    let mut per_node_min_eig: Vec<Option<f64>> = Vec::with_capacity(p);
    let mut max_fisher_diag = 0.0f64;

    for s in 0..p {
        let (_, design) = node_design(data, s);
        let theta = &thetas[s];
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            let row = design.row(i);
            let mut mu = 0.0;
            for j in 0..p {
                mu += row[j] * theta[j];
            }
            let pi = sigmoid(mu);
            weights.push(pi * (1.0 - pi));
        }
        for j in 0..p {
            let mut diag = 0.0;
            for i in 0..n {
                let x = design[[i, j]];
                diag += weights[i] * x * x;
            }
            max_fisher_diag = max_fisher_diag.max(diag / nf);
        }

        let neighbors = truth.neighbors(s);
        if neighbors.is_empty() {
            per_node_min_eig.push(None);
            continue;
        }
        let cols: Vec<usize> = neighbors.iter().map(|&t| design_column(s, t)).collect();
        let k = cols.len();
        let mut block = Array2::<f64>::zeros((k, k));
        for i in 0..n {
            let w = weights[i];
            for (a, &ca) in cols.iter().enumerate() {
                let va = design[[i, ca]];
                if va == 0.0 {
                    continue;
                }
                for (b, &cb) in cols.iter().enumerate().skip(a) {
                    block[[a, b]] += w * va * design[[i, cb]];
                }
            }
        }
        for a in 0..k {
            for b in a..k {
                block[[a, b]] /= nf;
                block[[b, a]] = block[[a, b]];
            }
        }
        per_node_min_eig.push(Some(smallest_eigenvalue(&block)));
    }

    let gamma = per_node_min_eig
        .iter()
        .flatten()
        .map(|&e| e.max(0.0))
        .fold(f64::INFINITY, f64::min);
    let violated = gamma.is_finite() && gamma <= RE_VIOLATION_EIG_TOL;
    Ok(ReDiagnostics { per_node_min_eig, gamma, max_fisher_diag, violated })
}

/// Mean logistic loss of an explicit coefficient vector, accumulating the
/// linear predictor left to right so that structurally identical
/// regressions produce bit-identical results.
fn mean_loss(theta: &[f64], y: &Array1<f64>, design: &Array2<f64>) -> f64 {
    let n = design.nrows();
    let k = design.ncols();
    assert_eq!(theta.len(), k);
    let mut total = 0.0;
    for i in 0..n {
        let row = design.row(i);
        let mut mu = 0.0;
        for j in 0..k {
            mu += row[j] * theta[j];
        }
        total += logistic_loss(y[i], mu);
    }
    total / n as f64
}

fn non_intercept_l1(theta: &[f64]) -> f64 {
    theta.iter().skip(1).map(|v| v.abs()).sum()
}

/// Result of checking that redistributing a copy class's total coefficient
/// is risk- and norm-equivalent to deleting the copies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopyInvarianceReport {
    /// Regressions compared (nodes outside every copy class and not
    /// degenerate).
    pub nodes_checked: usize,
    /// Largest |risk(weighted on full data) - risk(total on reduced data)|.
    pub max_risk_delta: f64,
    /// Largest matching difference of non-intercept l1 norms.
    pub max_l1_delta: f64,
}

/// Verifies that, for each regression of a node outside every copy class,
/// splitting a class's total coefficient across its identical columns by
/// any convex weights leaves the empirical risk and the l1 norm equal to
/// those of the reduced regression in which the copies are deleted and
/// the source carries the whole total.
///
/// `weights[c]` aligns with `plan.classes()[c]` as
/// `[source, targets ascending]`; each vector must consist of values in
/// [0, 1] summing to 1 within 1e-12. `data` must be the dataset the plan
/// was applied to (target columns equal to their sources).
pub fn verify_copy_invariance(
    fit: &NodewiseFit,
    data: &BinaryDataset,
    plan: &CopyPlan,
    weights: &[Vec<f64>],
) -> Result<CopyInvarianceReport> {
    let p = fit.p;
    if data.p() != p {
        return Err(Error::DimensionMismatch(format!(
            "fit has {p} nodes, data has {}",
            data.p()
        )));
    }
    let classes = plan.classes();
    if weights.len() != classes.len() {
        return Err(Error::InvalidParameter(format!(
            "{} weight vectors for {} copy classes",
            weights.len(),
            classes.len()
        )));
    }
    for (w, (source, targets)) in weights.iter().zip(&classes) {
        if w.len() != 1 + targets.len() {
            return Err(Error::InvalidParameter(format!(
                "class with source {source} needs {} weights, got {}",
                1 + targets.len(),
                w.len()
            )));
        }
        if w.iter().any(|v| !v.is_finite() || !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidParameter("copy weights must lie in [0, 1]".into()));
        }
        let total: f64 = w.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "copy weights must sum to 1, got {total}"
            )));
        }
    }
    for &(s, t) in &plan.pairs {
        if s >= p || t >= p {
            return Err(Error::DimensionMismatch(format!("copy pair ({s},{t}) out of range")));
        }
        if data.column(s) != data.column(t) {
            return Err(Error::InvalidData(format!(
                "plan not applied: columns {s} and {t} differ"
            )));
        }
    }

    let involved: BTreeSet<usize> = plan.involved_nodes().into_iter().collect();
    let targets_all: BTreeSet<usize> = plan.pairs.iter().map(|&(_, t)| t).collect();
    let keep: Vec<usize> = (0..p).filter(|u| !targets_all.contains(u)).collect();
    let new_index: BTreeMap<usize, usize> =
        keep.iter().enumerate().map(|(idx, &u)| (u, idx)).collect();

    // Reduced dataset with the copy columns deleted.
    let mut reduced = Array2::<u8>::zeros((data.n(), keep.len()));
    for (idx, &u) in keep.iter().enumerate() {
        for i in 0..data.n() {
            reduced[[i, idx]] = data.get(i, u);
        }
    }
    let reduced = BinaryDataset::new(reduced)?;

    let mut nodes_checked = 0usize;
    let mut max_risk_delta = 0.0f64;
    let mut max_l1_delta = 0.0f64;

    for r in 0..p {
        if involved.contains(&r) || fit.per_node[r].degenerate {
            continue;
        }
        let theta = &fit.per_node[r].theta;

        // Class totals in node r's regression.
        let totals: BTreeMap<usize, f64> = classes
            .iter()
            .map(|(source, targets)| {
                let mut c = theta[design_column(r, *source)];
                for &t in targets {
                    c += theta[design_column(r, t)];
                }
                (*source, c)
            })
            .collect();

        // Weighted split of each class total on the full dataset.
        let mut weighted = theta.clone();
        for (w, (source, targets)) in weights.iter().zip(&classes) {
            let total = totals[source];
            weighted[design_column(r, *source)] = w[0] * total;
            for (k, &t) in targets.iter().enumerate() {
                weighted[design_column(r, t)] = w[k + 1] * total;
            }
        }

        // Reduced regression: copies deleted, sources carry their totals.
        let r_new = new_index[&r];
        let mut deleted = vec![0.0; keep.len()];
        deleted[0] = theta[0];
        for &u in &keep {
            if u == r {
                continue;
            }
            let value = match totals.get(&u) {
                Some(&c) => c,
                None => theta[design_column(r, u)],
            };
            deleted[design_column(r_new, new_index[&u])] = value;
        }

        let (y_full, d_full) = node_design(data, r);
        let (y_red, d_red) = node_design(&reduced, r_new);
        let risk_w = mean_loss(&weighted, &y_full, &d_full);
        let risk_d = mean_loss(&deleted, &y_red, &d_red);
        let l1_w = non_intercept_l1(&weighted);
        let l1_d = non_intercept_l1(&deleted);

        max_risk_delta = max_risk_delta.max((risk_w - risk_d).abs());
        max_l1_delta = max_l1_delta.max((l1_w - l1_d).abs());
        nodes_checked += 1;
    }

    Ok(CopyInvarianceReport { nodes_checked, max_risk_delta, max_l1_delta })
}

/// Comparison of the empirical risk after zeroing two nested coefficient
/// subsets out of one node's regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskMonotonicityReport {
    /// Risk with subset A's coefficients zeroed.
    pub risk_a_removed: f64,
    /// Risk with subset B's coefficients zeroed (A is a subset of B).
    pub risk_b_removed: f64,
    /// Sum of the coefficients in B minus A.
    pub sum_coeff_between: f64,
    /// Every row's activated B-minus-A contribution is >= 0.
    pub rows_all_nonneg: bool,
    /// Every row's activated B-minus-A contribution is <= 0.
    pub rows_all_nonpos: bool,
    /// Per-row loss differences certify risk_a_removed >= risk_b_removed.
    pub per_row_guarantees_ge: bool,
    /// Per-row loss differences certify risk_a_removed <= risk_b_removed.
    pub per_row_guarantees_le: bool,
    /// Observed ordering matches the direction suggested by the sign of
    /// `sum_coeff_between` (positive: A-removed risk at least B-removed).
    pub consistent: bool,
}

/// Zeroes subset A and subset B (A nested in B) out of node's regression
/// coefficients and compares the resulting empirical risks on `data`.
///
/// The sign of the between-subset coefficient sum suggests an ordering
/// (positive sum: removing more should not raise the risk), but the sum
/// alone cannot determine it in general: the per-row loss differences
/// depend on each row's response as well as its activated contribution.
/// The report therefore carries exact per-row certificates
/// (`per_row_guarantees_ge` / `per_row_guarantees_le`) alongside the
/// observational `consistent` flag.
pub fn verify_risk_monotonicity(
    theta: &[f64],
    data: &BinaryDataset,
    node: usize,
    subset_a: &[usize],
    subset_b: &[usize],
) -> Result<RiskMonotonicityReport> {
    let p = data.p();
    if node >= p {
        return Err(Error::InvalidParameter(format!("node {node} out of range for p={p}")));
    }
    if theta.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "theta has {} entries, expected {p}",
            theta.len()
        )));
    }
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("theta must be finite".into()));
    }
    let check_subset = |name: &str, subset: &[usize]| -> Result<BTreeSet<usize>> {
        let mut set = BTreeSet::new();
        for &t in subset {
            if t >= p || t == node {
                return Err(Error::InvalidParameter(format!(
                    "{name} contains invalid predictor {t}"
                )));
            }
            if !set.insert(t) {
                return Err(Error::InvalidParameter(format!("{name} repeats predictor {t}")));
            }
        }
        Ok(set)
    };
    let a = check_subset("subset_a", subset_a)?;
    let b = check_subset("subset_b", subset_b)?;
    if !a.is_subset(&b) {
        return Err(Error::InvalidParameter("subset_a must be nested in subset_b".into()));
    }
    let between: Vec<usize> = b.difference(&a).copied().collect();

    let (y, design) = node_design(data, node);
    let n = data.n();
    let mut risk_a = 0.0;
    let mut risk_b = 0.0;
    let mut rows_all_nonneg = true;
    let mut rows_all_nonpos = true;
    let mut per_row_guarantees_ge = true;
    let mut per_row_guarantees_le = true;

    for i in 0..n {
        let row = design.row(i);
        let mut mu_full = 0.0;
        for j in 0..p {
            mu_full += row[j] * theta[j];
        }
        let removed = |set: &BTreeSet<usize>| -> f64 {
            set.iter().map(|&t| theta[design_column(node, t)] * row[design_column(node, t)]).sum()
        };
        let mu_a = mu_full - removed(&a);
        let mu_b = mu_full - removed(&b);
        let d: f64 = between
            .iter()
            .map(|&t| theta[design_column(node, t)] * row[design_column(node, t)])
            .sum();
        if d < 0.0 {
            rows_all_nonneg = false;
        }
        if d > 0.0 {
            rows_all_nonpos = false;
        }
        let loss_a = logistic_loss(y[i], mu_a);
        let loss_b = logistic_loss(y[i], mu_b);
        let diff = loss_a - loss_b;
        if diff < -1e-15 {
            per_row_guarantees_ge = false;
        }
        if diff > 1e-15 {
            per_row_guarantees_le = false;
        }
        risk_a += loss_a;
        risk_b += loss_b;
    }
    risk_a /= n as f64;
    risk_b /= n as f64;

    let sum_coeff_between: f64 =
        between.iter().map(|&t| theta[design_column(node, t)]).sum();
    let eps = 1e-12;
    let consistent = if sum_coeff_between > eps {
        risk_a >= risk_b - eps
    } else if sum_coeff_between < -eps {
        risk_a <= risk_b + eps
    } else {
        (risk_a - risk_b).abs() <= eps
    };

    Ok(RiskMonotonicityReport {
        risk_a_removed: risk_a,
        risk_b_removed: risk_b,
        sum_coeff_between,
        rows_all_nonneg,
        rows_all_nonpos,
        per_row_guarantees_ge,
        per_row_guarantees_le,
        consistent,
    })
}

/// Outcome of checking the finite-sample prediction and estimation
/// guarantees of a nodewise fit against its generating model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheckReport {
    /// Non-degenerate nodes entering the per-node checks.
    pub nodes_checked: usize,
    /// Largest per-node prediction loss (expected excess logistic loss of
    /// the fitted conditional over the true one).
    pub pred_loss_max: f64,
    pub pred_loss_mean: f64,
    /// Smallest slack of `pred_s + lambda_s ||thetahat_s||_1 <=
    /// 2 lambda_s ||thetastar_s||_1 + slack_tol` over nodes.
    pub penalized_min_slack: f64,
    pub holds_penalized_bound: bool,
    /// Smallest slack of `pred_s <= 2 lambda_s ||thetahat_s -
    /// thetastar_s||_1 + slack_tol` over nodes.
    pub error_norm_min_slack: f64,
    pub holds_error_norm_bound: bool,
    /// Largest per-node l1 estimation error over interaction coefficients.
    pub l1_error_max: f64,
    /// Same with the intercept difference included.
    pub l1_error_max_with_intercept: f64,
    /// `(16 / gamma) * s0 * lambda_max_selected`; infinite when the
    /// restricted eigenvalue is zero, zero when the true graph is empty.
    pub estimation_rhs: f64,
    pub holds_estimation_bound: bool,
    /// Restricted eigenvalue of the training design at the generating
    /// parameters.
    pub gamma: f64,
    /// Largest true neighbourhood size.
    pub s0: usize,
    /// Largest penalty level selected across nodes.
    pub lambda_max_selected: f64,
    /// Finite-sample allowance added to the right side of both per-node
    /// bounds (4 / n).
    pub slack_tol: f64,
}

/// Rows to use for Monte Carlo prediction-loss estimates: enough that the
/// total work stays near constant in p, never fewer than n.
pub fn default_mc_rows(p: usize, n: usize) -> usize {
    (100_000 / p.max(1)).max(n)
}

/// Checks the finite-sample guarantees of a fit against the generating
/// model.
///
/// Prediction losses are computed exactly for up to
/// [`EXACT_PRED_MAX_NODES`] nodes by enumerating the joint law, otherwise
/// by averaging over `mc_rows` fresh Gibbs rows seeded by `seed`. `train`
/// must be the dataset the fit was computed on; its size sets
/// `slack_tol = 4 / n` and the restricted eigenvalue is measured on it at
/// the generating parameters. Degenerate nodes are skipped.
pub fn verify_bounds(
    fit: &NodewiseFit,
    truth: &IsingModel,
    train: &BinaryDataset,
    mc_rows: usize,
    seed: u64,
) -> Result<BoundCheckReport> {
    let p = truth.p();
    if fit.p != p || train.p() != p {
        return Err(Error::DimensionMismatch(format!(
            "fit ({}), model ({p}), and data ({}) disagree on node count",
            fit.p,
            train.p()
        )));
    }
    let theta_star = generating_thetas(truth);
    let active: Vec<usize> = (0..p).filter(|&s| !fit.per_node[s].degenerate).collect();

    // Per-node expected excess logistic loss of the fitted conditionals.
    let mut pred = vec![0.0f64; p];
    if p <= EXACT_PRED_MAX_NODES {
        let pmf = exact_pmf(truth)?;
        let mut x = vec![0u8; p];
        for (mask, &prob) in pmf.iter().enumerate() {
            if prob == 0.0 {
                continue;
            }
            for (s, bit) in x.iter_mut().enumerate() {
                *bit = ((mask >> s) & 1) as u8;
            }
            for &s in &active {
                let theta = &fit.per_node[s].theta;
                let mut mu_hat = theta[0];
                let mut mu_star = theta_star[s][0];
                for t in 0..p {
                    if t != s && x[t] == 1 {
                        let col = design_column(s, t);
                        mu_hat += theta[col];
                        mu_star += theta_star[s][col];
                    }
                }
                let y = f64::from(x[s]);
                pred[s] += prob * (logistic_loss(y, mu_hat) - logistic_loss(y, mu_star));
            }
        }
    } else {
        if mc_rows == 0 {
            return Err(Error::InvalidParameter(
                "mc_rows must be positive for models too large to enumerate".into(),
            ));
        }
        let cfg = SamplerConfig { rng_seed: seed, ..SamplerConfig::default() };
        let fresh = sample(truth, mc_rows, &cfg)?;
        for &s in &active {
            let theta = &fit.per_node[s].theta;
            let star = &theta_star[s];
            let mut total = 0.0;
            for i in 0..fresh.n() {
                let mut mu_hat = theta[0];
                let mut mu_star = star[0];
                for t in 0..p {
                    if t != s && fresh.get(i, t) == 1 {
                        let col = design_column(s, t);
                        mu_hat += theta[col];
                        mu_star += star[col];
                    }
                }
                let y = f64::from(fresh.get(i, s));
                total += logistic_loss(y, mu_hat) - logistic_loss(y, mu_star);
            }
            pred[s] = total / fresh.n() as f64;
        }
    }

    let slack_tol = 4.0 / train.n() as f64;
    let mut pred_loss_max = 0.0f64;
    let mut pred_sum = 0.0f64;
    let mut penalized_min_slack = f64::INFINITY;
    let mut error_norm_min_slack = f64::INFINITY;
    let mut l1_error_max = 0.0f64;
    let mut l1_error_max_with_intercept = 0.0f64;
    let mut lambda_max_selected = 0.0f64;

    for &s in &active {
        let node = &fit.per_node[s];
        let lambda = node.selected_lambda.expect("non-degenerate nodes carry a lambda");
        let hat = &node.theta;
        let star = &theta_star[s];
        let l1_hat = non_intercept_l1(hat);
        let l1_star = non_intercept_l1(star);
        let l1_err: f64 =
            (1..p).map(|j| (hat[j] - star[j]).abs()).sum();

        pred_loss_max = pred_loss_max.max(pred[s]);
        pred_sum += pred[s];
        penalized_min_slack = penalized_min_slack
            .min(2.0 * lambda * l1_star + slack_tol - pred[s] - lambda * l1_hat);
        error_norm_min_slack =
            error_norm_min_slack.min(2.0 * lambda * l1_err + slack_tol - pred[s]);
        l1_error_max = l1_error_max.max(l1_err);
        l1_error_max_with_intercept =
            l1_error_max_with_intercept.max(l1_err + (hat[0] - star[0]).abs());
        lambda_max_selected = lambda_max_selected.max(lambda);
    }

    let re = re_diagnostics(train, truth, &theta_star)?;
    let s0 = (0..p).map(|s| truth.neighbors(s).len()).max().unwrap_or(0);
    let estimation_rhs = if s0 == 0 {
        0.0
    } else if re.gamma <= 0.0 {
        f64::INFINITY
    } else {
        16.0 / re.gamma * s0 as f64 * lambda_max_selected
    };
    let holds_estimation_bound = l1_error_max <= estimation_rhs + 1e-12;

    Ok(BoundCheckReport {
        nodes_checked: active.len(),
        pred_loss_max,
        pred_loss_mean: if active.is_empty() { 0.0 } else { pred_sum / active.len() as f64 },
        penalized_min_slack,
        holds_penalized_bound: penalized_min_slack >= 0.0,
        error_norm_min_slack,
        holds_error_norm_bound: error_norm_min_slack >= 0.0,
        l1_error_max,
        l1_error_max_with_intercept,
        estimation_rhs,
        holds_estimation_bound,
        gamma: re.gamma,
        s0,
        lambda_max_selected,
        slack_tol,
    })
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "inputs must have equal length");
    assert!(x.len() >= 2, "need at least two observations");
    let rank = |v: &[f64]| -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).expect("values must be comparable"));
        let mut ranks = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                ranks[k] = avg;
            }
            i = j + 1;
        }
        ranks
    };
    let rx = rank(x);
    let ry = rank(y);
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for i in 0..x.len() {
        let dx = rx[i] - mx;
        let dy = ry[i] - my;
        cov += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    if vx == 0.0 || vy == 0.0 {
        0.0
    } else {
        cov / (vx * vy).sqrt()
    }
}
