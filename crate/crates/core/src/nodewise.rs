//! Network estimation by nodewise regression: every node is regressed on
//! all others with an l1 penalty chosen per node by extended BIC, and the
//! directed coefficients are symmetrised into an undirected weighted
//! graph.

use ndarray::{Array1, Array2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::BinaryDataset;
use crate::numeric::sigmoid;
use crate::selection::{select_lambda, EbicConfig, LambdaScore};

/// How directed neighbourhoods are combined into undirected edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeRule {
    /// Edge kept only when both directions are nonzero.
    And,
    /// Edge kept when either direction is nonzero.
    Or,
}

impl std::str::FromStr for EdgeRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "and" => Ok(EdgeRule::And),
            "or" => Ok(EdgeRule::Or),
            other => Err(Error::InvalidParameter(format!("unknown edge rule {other:?}"))),
        }
    }
}

impl std::fmt::Display for EdgeRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EdgeRule::And => "and",
            EdgeRule::Or => "or",
        })
    }
}

/// Column of predictor node t in the design for node s's regression
/// (column 0 is the intercept).
pub fn design_column(s: usize, t: usize) -> usize {
    assert_ne!(s, t, "a node is never its own predictor");
    if t < s {
        1 + t
    } else {
        t
    }
}

/// Response and design for regressing node s on all other nodes: column 0
/// is constant 1, the rest are the other nodes' columns ascending.
pub fn node_design(data: &BinaryDataset, s: usize) -> (Array1<f64>, Array2<f64>) {
    let n = data.n();
    let p = data.p();
    assert!(s < p, "node index {s} out of range");
    let mut y = Array1::<f64>::zeros(n);
    let mut design = Array2::<f64>::zeros((n, p));
    for i in 0..n {
        y[i] = f64::from(data.get(i, s));
        design[[i, 0]] = 1.0;
        for t in 0..p {
            if t != s {
                design[[i, design_column(s, t)]] = f64::from(data.get(i, t));
            }
        }
    }
    (y, design)
}

/// One node's regression outcome. `theta` has length p: intercept first,
/// then the other nodes' coefficients ascending by node index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeFit {
    pub node: usize,
    pub theta: Vec<f64>,
    /// Penalty level chosen by the score search; absent for degenerate
    /// nodes.
    pub selected_lambda: Option<f64>,
    pub path: Vec<LambdaScore>,
    /// True when the node's column never varies, in which case no
    /// regression exists and `theta` is all zeros.
    pub degenerate: bool,
    pub converged: bool,
    pub max_kkt_violation: f64,
    pub iterations: usize,
}

/// All nodewise regressions on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodewiseFit {
    pub p: usize,
    pub n: usize,
    pub ebic_gamma: f64,
    pub per_node: Vec<NodeFit>,
}

impl NodewiseFit {
    /// Coefficient of predictor node t in node s's regression.
    pub fn directed_coefficient(&self, s: usize, t: usize) -> f64 {
        self.per_node[s].theta[design_column(s, t)]
    }

    /// Fraction of nodes whose regression was skipped as degenerate.
    pub fn degenerate_fraction(&self) -> f64 {
        if self.p == 0 {
            0.0
        } else {
            self.per_node.iter().filter(|f| f.degenerate).count() as f64 / self.p as f64
        }
    }
}

fn fit_node(data: &BinaryDataset, s: usize, cfg: &EbicConfig) -> Result<NodeFit> {
    let p = data.p();
    if data.column_is_constant(s) {
        return Ok(NodeFit {
            node: s,
            theta: vec![0.0; p],
            selected_lambda: None,
            path: Vec::new(),
            degenerate: true,
            converged: true,
            max_kkt_violation: 0.0,
            iterations: 0,
        });
    }
    let (y, design) = node_design(data, s);
    let sel = select_lambda(&y, &design, cfg)?;
    Ok(NodeFit {
        node: s,
        theta: sel.solution.theta.to_vec(),
        selected_lambda: Some(sel.lambda),
        path: sel.path,
        degenerate: false,
        converged: sel.solution.converged,
        max_kkt_violation: sel.solution.max_kkt_violation,
        iterations: sel.solution.iterations,
    })
}

/// Runs every node's penalised regression (in parallel; results do not
/// depend on scheduling).
pub fn fit_nodewise(data: &BinaryDataset, cfg: &EbicConfig) -> Result<NodewiseFit> {
    cfg.validate()?;
    if data.p() < 2 {
        return Err(Error::InvalidParameter("nodewise estimation needs at least 2 nodes".into()));
    }
    let per_node: Vec<NodeFit> = (0..data.p())
        .into_par_iter()
        .map(|s| fit_node(data, s, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(NodewiseFit { p: data.p(), n: data.n(), ebic_gamma: cfg.gamma, per_node })
}

/// Undirected weighted graph obtained by symmetrising a nodewise fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSetEstimate {
    pub p: usize,
    pub rule: EdgeRule,
    /// Symmetric p-by-p weight matrix with zero diagonal; an edge exists
    /// exactly where the weight is nonzero.
    pub weights: Array2<f64>,
}

impl EdgeSetEstimate {
    /// Estimated edges (s, t) with s < t, ascending.
    pub fn support(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for s in 0..self.p {
            for t in (s + 1)..self.p {
                if self.weights[[s, t]] != 0.0 {
                    out.push((s, t));
                }
            }
        }
        out
    }
}

/// Combines the two directed coefficients of every pair into one weight:
/// the mean of the pair when the rule admits the edge, zero otherwise.
pub fn symmetrize(fit: &NodewiseFit, rule: EdgeRule) -> EdgeSetEstimate {
    let p = fit.p;
    let mut weights = Array2::<f64>::zeros((p, p));
    for s in 0..p {
        for t in (s + 1)..p {
            let a = fit.directed_coefficient(s, t);
            let b = fit.directed_coefficient(t, s);
            let keep = match rule {
                EdgeRule::And => a != 0.0 && b != 0.0,
                EdgeRule::Or => a != 0.0 || b != 0.0,
            };
            if keep {
                let w = 0.5 * (a + b);
                weights[[s, t]] = w;
                weights[[t, s]] = w;
            }
        }
    }
    EdgeSetEstimate { p, rule, weights }
}

/// Fitted conditional probabilities: entry (i, s) is the estimated
/// probability that node s is 1 given row i's other coordinates.
pub fn predict_conditionals(fit: &NodewiseFit, data: &BinaryDataset) -> Result<Array2<f64>> {
    if data.p() != fit.p {
        return Err(Error::DimensionMismatch(format!(
            "fit has {} nodes, data has {}",
            fit.p,
            data.p()
        )));
    }
    let n = data.n();
    let p = fit.p;
    let mut out = Array2::<f64>::zeros((n, p));
    for s in 0..p {
        let theta = &fit.per_node[s].theta;
        for i in 0..n {
            let mut mu = theta[0];
            for t in 0..p {
                if t != s && data.get(i, t) == 1 {
                    mu += theta[design_column(s, t)];
                }
            }
            out[[i, s]] = sigmoid(mu);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_erdos_renyi, IsingModel, WeightSampler};
    use crate::sampler::{sample, SamplerConfig};
    use ndarray::array;

    fn quick_cfg() -> EbicConfig {
        EbicConfig { n_lambdas: 15, ..EbicConfig::default() }
    }

    fn sampled(p: usize, n: usize, seed: u64) -> (IsingModel, BinaryDataset) {
        let model = generate_erdos_renyi(p, 0.4, &WeightSampler::default(), seed).unwrap();
        let cfg = SamplerConfig { burn_in_sweeps: 300, thinning_sweeps: 3, rng_seed: seed ^ 0xabc, ..SamplerConfig::default() };
        let data = sample(&model, n, &cfg).unwrap();
        (model, data)
    }

    #[test]
    fn design_column_mapping() {
        assert_eq!(design_column(0, 1), 1);
        assert_eq!(design_column(0, 4), 4);
        assert_eq!(design_column(2, 0), 1);
        assert_eq!(design_column(2, 1), 2);
        assert_eq!(design_column(2, 3), 3);
    }

    #[test]
    fn node_design_contents() {
        let data = BinaryDataset::new(array![[1, 0, 1], [0, 1, 1]]).unwrap();
        let (y, d) = node_design(&data, 1);
        assert_eq!(y.to_vec(), vec![0.0, 1.0]);
        // Columns: intercept, node 0, node 2.
        assert_eq!(d.row(0).to_vec(), vec![1.0, 1.0, 1.0]);
        assert_eq!(d.row(1).to_vec(), vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn fit_is_deterministic_and_well_formed() {
        let (_, data) = sampled(6, 120, 21);
        let a = fit_nodewise(&data, &quick_cfg()).unwrap();
        let b = fit_nodewise(&data, &quick_cfg()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.p, 6);
        assert_eq!(a.n, 120);
        for f in &a.per_node {
            assert!(!f.degenerate);
            assert!(f.converged);
            assert!(f.max_kkt_violation <= crate::lasso::KKT_TOL);
            assert_eq!(f.theta.len(), 6);
            assert!(f.selected_lambda.is_some());
        }
    }

    #[test]
    fn constant_column_is_flagged_degenerate() {
        let mut x = sampled(5, 60, 3).1.matrix().clone();
        for i in 0..60 {
            x[[i, 2]] = 1;
        }
        let data = BinaryDataset::new(x).unwrap();
        let fit = fit_nodewise(&data, &quick_cfg()).unwrap();
        assert!(fit.per_node[2].degenerate);
        assert!(fit.per_node[2].theta.iter().all(|&v| v == 0.0));
        assert!((fit.degenerate_fraction() - 0.2).abs() < 1e-15);
        // The constant column can still appear as a predictor for others,
        // but those fits must remain sound.
        for s in [0usize, 1, 3, 4] {
            assert!(!fit.per_node[s].degenerate);
            assert!(fit.per_node[s].converged);
        }
    }

    #[test]
    fn and_support_is_contained_in_or_support() {
        let (_, data) = sampled(7, 90, 8);
        let fit = fit_nodewise(&data, &quick_cfg()).unwrap();
        let and = symmetrize(&fit, EdgeRule::And);
        let or = symmetrize(&fit, EdgeRule::Or);
        let or_support: std::collections::BTreeSet<_> = or.support().into_iter().collect();
        for edge in and.support() {
            assert!(or_support.contains(&edge));
        }
        for est in [&and, &or] {
            for s in 0..7 {
                assert_eq!(est.weights[[s, s]], 0.0);
                for t in 0..7 {
                    assert_eq!(est.weights[[s, t]], est.weights[[t, s]]);
                }
            }
        }
    }

    #[test]
    fn symmetrized_weight_is_the_directed_mean() {
        let (_, data) = sampled(6, 150, 15);
        let fit = fit_nodewise(&data, &quick_cfg()).unwrap();
        let or = symmetrize(&fit, EdgeRule::Or);
        for (s, t) in or.support() {
            let a = fit.directed_coefficient(s, t);
            let b = fit.directed_coefficient(t, s);
            assert!(a != 0.0 || b != 0.0);
            assert!((or.weights[[s, t]] - 0.5 * (a + b)).abs() < 1e-15);
        }
    }

    #[test]
    fn copied_predictors_share_coefficients_exactly() {
        let (_, data) = sampled(6, 100, 33);
        let mut x = data.matrix().clone();
        for i in 0..100 {
            x[[i, 4]] = x[[i, 1]];
        }
        let data = BinaryDataset::new(x).unwrap();
        let fit = fit_nodewise(&data, &quick_cfg()).unwrap();
        // In every other node's regression, predictors 1 and 4 are
        // identical columns and must carry identical coefficients.
        for s in [0usize, 2, 3, 5] {
            let a = fit.directed_coefficient(s, 1);
            let b = fit.directed_coefficient(s, 4);
            assert_eq!(a.to_bits(), b.to_bits(), "node {s}");
        }
    }

    #[test]
    fn predictions_match_a_hand_computed_conditional() {
        let (_, data) = sampled(5, 80, 5);
        let fit = fit_nodewise(&data, &quick_cfg()).unwrap();
        let probs = predict_conditionals(&fit, &data).unwrap();
        assert_eq!(probs.dim(), (80, 5));
        let s = 3;
        let i = 17;
        let theta = &fit.per_node[s].theta;
        let mut mu = theta[0];
        for t in 0..5 {
            if t != s {
                mu += theta[design_column(s, t)] * f64::from(data.get(i, t));
            }
        }
        assert!((probs[[i, s]] - sigmoid(mu)).abs() < 1e-12);
        assert!(probs.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn fit_rejects_tiny_problems() {
        let data = BinaryDataset::new(array![[0], [1]]).unwrap();
        assert!(fit_nodewise(&data, &quick_cfg()).is_err());
    }
}
