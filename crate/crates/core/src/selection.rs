//! Penalty-level selection with an extended BIC.
//!
//! Each level of a descending geometric grid is solved with warm starts
//! and scored by `2 n risk + k ln(n) + 2 gamma k ln(candidates)`, where k
//! is the number of exactly nonzero penalised coefficients and
//! `candidates` the number of candidate predictors. Ties keep the larger
//! penalty.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lasso::{
    self, empirical_risk, lambda_grid, LassoProblem, LassoSolution, DEFAULT_MAX_ITER, DEFAULT_TOL,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EbicConfig {
    /// Weight of the model-space term; 0 recovers plain BIC.
    pub gamma: f64,
    pub n_lambdas: usize,
    /// Ratio of the smallest to the largest grid level.
    pub lambda_ratio: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EbicConfig {
    fn default() -> Self {
        Self {
            gamma: 0.25,
            n_lambdas: 50,
            lambda_ratio: 0.01,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

impl EbicConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.gamma.is_finite() || self.gamma < 0.0 {
            return Err(Error::InvalidParameter(format!("ebic gamma {} must be >= 0", self.gamma)));
        }
        if self.n_lambdas == 0 {
            return Err(Error::InvalidParameter("need at least one penalty level".into()));
        }
        if !(self.lambda_ratio > 0.0 && self.lambda_ratio < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda_ratio {} outside (0, 1)",
                self.lambda_ratio
            )));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::InvalidParameter("tol must be > 0 and max_iter >= 1".into()));
        }
        Ok(())
    }
}

/// Extended BIC of a solution on its problem.
///
/// Counts exactly nonzero penalised coordinates; the intercept (when
/// unpenalised) contributes neither to k nor to the candidate count.
pub fn ebic_score(solution: &LassoSolution, problem: &LassoProblem, gamma: f64) -> f64 {
    let n = problem.y().len() as f64;
    let skip = usize::from(!problem.penalize_intercept());
    let k = solution.theta.iter().skip(skip).filter(|&&v| v != 0.0).count();
    let candidates = problem.design().ncols() - skip;
    let risk = empirical_risk(&solution.theta.view(), problem);
    let mut score = 2.0 * n * risk;
    if k > 0 {
        score += k as f64 * n.ln() + 2.0 * gamma * k as f64 * (candidates as f64).ln();
    }
    score
}

/// One scored grid level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaScore {
    pub lambda: f64,
    pub score: f64,
    pub nonzero: usize,
    pub converged: bool,
}

/// Outcome of a grid search: the winning level, its solution, and the
/// whole scored path (descending in lambda).
#[derive(Debug, Clone)]
pub struct Selection {
    pub lambda: f64,
    pub solution: LassoSolution,
    pub path: Vec<LambdaScore>,
}

/// Fits the full penalty path for `y` against `design` (column 0 is the
/// unpenalised intercept) and returns the level with the smallest score.
pub fn select_lambda(y: &Array1<f64>, design: &Array2<f64>, cfg: &EbicConfig) -> Result<Selection> {
    cfg.validate()?;
    let grid = lambda_grid(&y.view(), design, cfg.n_lambdas, cfg.lambda_ratio)?;
    let mut problem = LassoProblem::new(y.clone(), design.clone(), grid[0], false)?;
    let skip = 1usize;

    let mut path = Vec::with_capacity(grid.len());
    let mut warm: Option<Array1<f64>> = None;
    let mut best: Option<(f64, LassoSolution)> = None;
    let mut best_lambda = grid[0];
    for &lam in &grid {
        problem.set_lambda(lam)?;
        let solution = lasso::solve(&problem, warm.as_ref(), cfg.tol, cfg.max_iter);
        let score = ebic_score(&solution, &problem, cfg.gamma);
        let nonzero = solution.theta.iter().skip(skip).filter(|&&v| v != 0.0).count();
        path.push(LambdaScore { lambda: lam, score, nonzero, converged: solution.converged });
        warm = Some(solution.theta.clone());
        // Strict inequality keeps the earlier (larger) lambda on ties.
        if best.as_ref().is_none_or(|(best_score, _)| score < *best_score) {
            best = Some((score, solution));
            best_lambda = lam;
        }
    }
    let (_, solution) = best.expect("grid is nonempty");
    Ok(Selection { lambda: best_lambda, solution, path })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn strong_signal(n: usize, seed: u64) -> (Array1<f64>, Array2<f64>) {
        use crate::numeric::sigmoid;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut design = Array2::<f64>::zeros((n, 4));
        let mut y = Array1::<f64>::zeros(n);
        for i in 0..n {
            design[[i, 0]] = 1.0;
            for j in 1..4 {
                design[[i, j]] = f64::from(rng.random::<f64>() < 0.5);
            }
            let mu = 2.5 * design[[i, 1]] - 2.0 * design[[i, 2]];
            y[i] = f64::from(rng.random::<f64>() < sigmoid(mu));
        }
        (y, design)
    }

    #[test]
    fn zero_solution_scores_twice_n_log_two() {
        let (y, design) = strong_signal(50, 0);
        let problem = LassoProblem::new(y, design, 0.5, false).unwrap();
        let solution = LassoSolution {
            theta: Array1::zeros(4),
            iterations: 0,
            max_kkt_violation: 0.0,
            converged: true,
        };
        let expected = 2.0 * 50.0 * std::f64::consts::LN_2;
        assert!((ebic_score(&solution, &problem, 0.25) - expected).abs() < 1e-10);
    }

    #[test]
    fn score_grows_by_the_pinned_penalty_per_extra_coefficient() {
        // n = 50 and 99 candidate predictors: each extra nonzero adds
        // ln(50) + 0.5 ln(99) = 6.209582930495441 beyond the risk term.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let n = 50;
        let mut design = Array2::<f64>::zeros((n, 100));
        for i in 0..n {
            design[[i, 0]] = 1.0;
            for j in 1..100 {
                design[[i, j]] = f64::from(rng.random::<f64>() < 0.5);
            }
        }
        let y = Array1::from_iter((0..n).map(|i| f64::from(i % 2 == 0)));
        let problem = LassoProblem::new(y, design, 0.1, false).unwrap();

        let mut theta2 = Array1::<f64>::zeros(100);
        theta2[1] = 0.4;
        theta2[7] = -0.2;
        let mut theta3 = theta2.clone();
        theta3[12] = 0.9;
        let wrap = |theta: Array1<f64>| LassoSolution {
            theta,
            iterations: 0,
            max_kkt_violation: 0.0,
            converged: true,
        };
        let s2 = wrap(theta2.clone());
        let s3 = wrap(theta3.clone());
        let risk2 = empirical_risk(&theta2.view(), &problem);
        let risk3 = empirical_risk(&theta3.view(), &problem);
        let complexity_gap = (ebic_score(&s3, &problem, 0.25) - 2.0 * 50.0 * risk3)
            - (ebic_score(&s2, &problem, 0.25) - 2.0 * 50.0 * risk2);
        assert!((complexity_gap - 6.209_582_930_495_441).abs() < 1e-12);
    }

    #[test]
    fn gamma_zero_is_plain_bic() {
        let (y, design) = strong_signal(50, 2);
        let problem = LassoProblem::new(y, design, 0.1, false).unwrap();
        let mut theta = Array1::<f64>::zeros(4);
        theta[0] = 0.1;
        theta[2] = -0.3;
        let solution = LassoSolution {
            theta: theta.clone(),
            iterations: 0,
            max_kkt_violation: 0.0,
            converged: true,
        };
        let risk = empirical_risk(&theta.view(), &problem);
        let expected = 2.0 * 50.0 * risk + 50.0f64.ln();
        assert!((ebic_score(&solution, &problem, 0.0) - expected).abs() < 1e-12);
    }

    #[test]
    fn selection_minimises_the_path_score() {
        let (y, design) = strong_signal(120, 3);
        let cfg = EbicConfig { n_lambdas: 20, ..EbicConfig::default() };
        let sel = select_lambda(&y, &design, &cfg).unwrap();
        assert_eq!(sel.path.len(), 20);
        let best = sel.path.iter().map(|p| p.score).fold(f64::INFINITY, f64::min);
        let chosen = sel.path.iter().find(|p| p.lambda == sel.lambda).unwrap();
        assert_eq!(chosen.score, best);
        // Strong coordinates should be picked up.
        assert!(sel.solution.theta[1] > 0.5);
        assert!(sel.solution.theta[2] < -0.5);
        assert!(chosen.nonzero >= 2);
    }

    #[test]
    fn ties_keep_the_largest_penalty() {
        // One predictor orthogonal to a balanced response: every level
        // fits the same intercept-only model, so every score ties and the
        // top of the grid must win.
        let y = array![1.0, 1.0, 0.0, 0.0];
        let design = array![[1.0, 1.0], [1.0, 0.0], [1.0, 1.0], [1.0, 0.0]];
        let cfg = EbicConfig { n_lambdas: 6, lambda_ratio: 0.1, ..EbicConfig::default() };
        let sel = select_lambda(&y, &design, &cfg).unwrap();
        let first = sel.path[0].score;
        assert!(sel.path.iter().all(|p| (p.score - first).abs() < 1e-12));
        assert_eq!(sel.lambda, sel.path[0].lambda);
        assert_eq!(sel.path[0].nonzero, 0);
    }

    #[test]
    fn config_validation() {
        let mut cfg = EbicConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.gamma = -0.1;
        assert!(cfg.validate().is_err());
        cfg = EbicConfig { n_lambdas: 0, ..EbicConfig::default() };
        assert!(cfg.validate().is_err());
        cfg = EbicConfig { lambda_ratio: 1.0, ..EbicConfig::default() };
        assert!(cfg.validate().is_err());
    }
}
