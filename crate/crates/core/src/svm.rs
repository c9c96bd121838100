//! Kernel support-vector classification and regression.
//!
//! Both tasks fit the representer form `f(x) = Σᵢ αᵢ K(x, xᵢ)` (no intercept)
//! by minimizing `Σᵢ loss(yᵢ, [Kα]ᵢ) + αᵀKα / (2C)` with a deterministic
//! subgradient method that keeps the best iterate seen.
//!
//! Steps are taken along `α/C − u`, the subgradient in the kernel's feature
//! space (`u` is the loss subgradient with respect to the scores), with step
//! size `C/√t`. Moving along the plain coordinate subgradient `K(α/C − u)`
//! instead multiplies each direction by `1 − λ/√t` for every Gram eigenvalue
//! `λ`, which diverges as soon as `λ > 2√t`.

use serde::{Deserialize, Serialize};

use crate::data::{Labels, Matrix};
use crate::error::{check_dim, Error, Result};
use crate::kernel_methods::{gram, gram_symmetric, KernelSpec};

/// `|αᵢ|` above this marks a support vector.
pub const SUPPORT_THRESHOLD: f64 = 1e-9;
pub const DEFAULT_ITERATIONS: usize = 5000;

pub fn hinge_loss(y: f64, f: f64) -> f64 {
    (1.0 - y * f).max(0.0)
}

pub fn eps_insensitive_loss(y: f64, f: f64, epsilon: f64) -> f64 {
    ((y - f).abs() - epsilon).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SvmTask {
    Classify,
    Regress,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub kernel: KernelSpec,
    pub c: f64,
    /// Half-width of the regression dead zone.
    pub epsilon: f64,
    pub iterations: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            kernel: KernelSpec::Rbf { gamma: 1.0 },
            c: 1.0,
            epsilon: 0.1,
            iterations: DEFAULT_ITERATIONS,
        }
    }
}

impl SvmConfig {
    fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(Error::hyper("C must be positive"));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::hyper("epsilon must be non-negative"));
        }
        if self.iterations == 0 {
            return Err(Error::hyper("iterations must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub task: SvmTask,
    pub config: SvmConfig,
    /// Dual coefficients for every training row.
    pub alphas: Vec<f64>,
    pub support: Vec<usize>,
    pub support_vectors: Matrix,
    pub support_alphas: Vec<f64>,
    /// Always 0; kept so the decision function reads in full.
    pub intercept: f64,
    pub objective: f64,
    /// Iteration that produced the returned coefficients (0 means α = 0).
    pub best_iteration: usize,
    /// Class names for classification models.
    pub labels: Vec<String>,
}

fn objective(task: SvmTask, y: &[f64], f: &[f64], alpha: &[f64], c: f64, epsilon: f64) -> f64 {
    let loss: f64 = match task {
        SvmTask::Classify => y.iter().zip(f).map(|(&yi, &fi)| hinge_loss(yi, fi)).sum(),
        SvmTask::Regress => y.iter().zip(f).map(|(&yi, &fi)| eps_insensitive_loss(yi, fi, epsilon)).sum(),
    };
    let reg: f64 = alpha.iter().zip(f).map(|(a, fi)| a * fi).sum::<f64>() / (2.0 * c);
    loss + reg
}

fn fit(x: &Matrix, y: &[f64], task: SvmTask, config: SvmConfig, labels: Vec<String>) -> Result<SvmModel> {
    config.validate()?;
    x.require_nonempty()?;
    check_dim(x.rows(), y.len())?;
    let n = x.rows();
    let k = gram_symmetric(&config.kernel, x)?;
    let c = config.c;

    let mut alpha = vec![0.0; n];
    let mut f = vec![0.0; n];
    let mut best = (objective(task, y, &f, &alpha, c, config.epsilon), alpha.clone(), 0);
    let mut u = vec![0.0; n];
    for t in 1..=config.iterations {
        for i in 0..n {
            u[i] = match task {
                SvmTask::Classify => {
                    if y[i] * f[i] < 1.0 {
                        y[i]
                    } else {
                        0.0
                    }
                }
                SvmTask::Regress => {
                    let r = y[i] - f[i];
                    if r.abs() > config.epsilon {
                        r.signum()
                    } else {
                        0.0
                    }
                }
            };
        }
        let step = c / (t as f64).sqrt();
        for i in 0..n {
            alpha[i] -= step * (alpha[i] / c - u[i]);
        }
        f = k.mat_vec(&alpha)?;
        let obj = objective(task, y, &f, &alpha, c, config.epsilon);
        if obj < best.0 {
            best = (obj, alpha.clone(), t);
        }
    }

    let (obj, alphas, best_iteration) = best;
    let support: Vec<usize> = (0..n).filter(|&i| alphas[i].abs() > SUPPORT_THRESHOLD).collect();
    Ok(SvmModel {
        task,
        config,
        support_vectors: x.select_rows(&support),
        support_alphas: support.iter().map(|&i| alphas[i]).collect(),
        support,
        alphas,
        intercept: 0.0,
        objective: obj,
        best_iteration,
        labels,
    })
}

/// Binary classifier; class index 1 is `+1`.
pub fn fit_svc(x: &Matrix, labels: &Labels, config: SvmConfig) -> Result<SvmModel> {
    check_dim(x.rows(), labels.len())?;
    labels.require_binary()?;
    fit(x, &labels.signs(), SvmTask::Classify, config, labels.names().to_vec())
}

pub fn fit_svr(x: &Matrix, y: &[f64], config: SvmConfig) -> Result<SvmModel> {
    fit(x, y, SvmTask::Regress, config, Vec::new())
}

impl SvmModel {
    /// Scores from the support vectors only.
    pub fn decision(&self, x: &Matrix) -> Result<Vec<f64>> {
        check_dim(self.support_vectors.cols(), x.cols())?;
        if self.support.is_empty() {
            return Ok(vec![self.intercept; x.rows()]);
        }
        let g = gram(&self.config.kernel, x, &self.support_vectors)?;
        let mut s = g.mat_vec(&self.support_alphas)?;
        s.iter_mut().for_each(|v| *v += self.intercept);
        Ok(s)
    }

    /// Scores using every training row, for checking the support-vector shortcut.
    pub fn decision_full(&self, train: &Matrix, x: &Matrix) -> Result<Vec<f64>> {
        check_dim(self.alphas.len(), train.rows())?;
        let g = gram(&self.config.kernel, x, train)?;
        let mut s = g.mat_vec(&self.alphas)?;
        s.iter_mut().for_each(|v| *v += self.intercept);
        Ok(s)
    }

    /// Class 1 iff the score is positive.
    pub fn predict_class(&self, x: &Matrix) -> Result<Vec<usize>> {
        Ok(self.decision(x)?.into_iter().map(|f| usize::from(f > 0.0)).collect())
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        self.decision(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    #[test]
    fn loss_values() {
        assert_eq!(hinge_loss(1.0, 2.0), 0.0);
        assert_eq!(hinge_loss(1.0, 0.5), 0.5);
        assert_eq!(hinge_loss(-1.0, 0.5), 1.5);
        assert_eq!(eps_insensitive_loss(1.0, 1.2, 0.5), 0.0);
        assert_eq!(eps_insensitive_loss(3.0, 1.0, 0.5), 1.5);
        assert_eq!(eps_insensitive_loss(3.0, 1.0, 0.0), 2.0);
    }

    #[test]
    fn two_point_problem_matches_grid_oracle() {
        let x = Matrix::from_rows(&[[-1.0], [1.0]]).unwrap();
        let labels = Labels::from_signs(&[-1.0, 1.0]).unwrap();
        let c = 10.0;
        let cfg = SvmConfig { kernel: KernelSpec::Linear, c, ..SvmConfig::default() };
        let m = fit_svc(&x, &labels, cfg).unwrap();
        let f = m.decision(&x).unwrap();
        assert!(f[0] < 0.0 && f[1] > 0.0);

        // Dense grid over α ∈ [−C, C]².
        let y = [-1.0, 1.0];
        let mut grid_min = f64::INFINITY;
        let steps = 400;
        for i in 0..=steps {
            for j in 0..=steps {
                let a = [-c + 2.0 * c * i as f64 / steps as f64, -c + 2.0 * c * j as f64 / steps as f64];
                let fx = [a[0] - a[1], -a[0] + a[1]];
                grid_min = grid_min.min(objective(SvmTask::Classify, &y, &fx, &a, c, 0.0));
            }
        }
        assert!(m.objective <= grid_min + 1e-2, "{} vs {grid_min}", m.objective);
    }

    #[test]
    fn xor_with_rbf() {
        let x = Matrix::from_rows(&[[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]]).unwrap();
        let labels = Labels::from_signs(&[-1.0, -1.0, 1.0, 1.0]).unwrap();
        let cfg = SvmConfig { kernel: KernelSpec::Rbf { gamma: 1.0 }, c: 100.0, ..SvmConfig::default() };
        let m = fit_svc(&x, &labels, cfg).unwrap();
        assert_eq!(m.predict_class(&x).unwrap(), vec![0, 0, 1, 1]);
    }

    #[test]
    fn single_class_rejected() {
        let x = Matrix::from_rows(&[[0.0], [1.0]]).unwrap();
        let labels = Labels::encode(&["a", "a"]).unwrap();
        assert!(matches!(fit_svc(&x, &labels, SvmConfig::default()), Err(Error::DegenerateLabels(_))));
    }

    #[test]
    fn svr_objective_bounds() {
        let x = Matrix::new(10, 1, (0..10).map(|i| i as f64).collect()).unwrap();
        let m = fit_svr(&x, &[2.5; 10], SvmConfig { epsilon: 0.1, ..SvmConfig::default() }).unwrap();
        assert!(m.objective <= 10.0 * 2.5);

        let y: Vec<f64> = (0..10).map(|i| 0.05 * (i as f64 - 4.5) / 4.5).collect();
        let m = fit_svr(&x, &y, SvmConfig { epsilon: 0.1, ..SvmConfig::default() }).unwrap();
        assert_eq!(m.objective, 0.0);
        assert!(m.support.is_empty());
    }

    #[test]
    fn svr_linear_trend_improves_on_zero() {
        let x = Matrix::new(20, 1, (0..20).map(|i| i as f64 / 10.0).collect()).unwrap();
        let y: Vec<f64> = (0..20).map(|i| 3.0 * i as f64 / 10.0).collect();
        let cfg = SvmConfig { kernel: KernelSpec::Linear, c: 10.0, epsilon: 0.05, ..SvmConfig::default() };
        let m = fit_svr(&x, &y, cfg).unwrap();
        let zero: f64 = y.iter().map(|v| eps_insensitive_loss(*v, 0.0, 0.05)).sum();
        assert!(m.objective < zero);
        let worst0 = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let f = m.predict(&x).unwrap();
        let worst = y.iter().zip(&f).fold(0.0f64, |a, (t, p)| a.max((t - p).abs()));
        assert!(worst < worst0);
    }

    #[test]
    fn zero_and_single_support_decisions() {
        let sv = Matrix::from_rows(&[[1.0, 2.0]]).unwrap();
        let mut m = SvmModel {
            task: SvmTask::Classify,
            config: SvmConfig { kernel: KernelSpec::Linear, ..SvmConfig::default() },
            alphas: vec![0.0],
            support: vec![],
            support_vectors: Matrix::new(0, 2, vec![]).unwrap(),
            support_alphas: vec![],
            intercept: 0.0,
            objective: 0.0,
            best_iteration: 0,
            labels: vec![],
        };
        let x = Matrix::from_rows(&[[3.0, 4.0], [-1.0, 0.5]]).unwrap();
        assert_eq!(m.decision(&x).unwrap(), vec![0.0, 0.0]);
        assert_eq!(m.predict_class(&x).unwrap(), vec![0, 0]);
        m.alphas = vec![1.0];
        m.support = vec![0];
        m.support_vectors = sv;
        m.support_alphas = vec![1.0];
        assert_eq!(m.decision(&x).unwrap(), vec![11.0, 0.0]);
    }

    #[test]
    fn support_only_matches_full_evaluation() {
        let mut rng = SeededRng::new(21);
        let x = Matrix::new(30, 2, (0..60).map(|_| rng.next_f64() * 4.0 - 2.0).collect()).unwrap();
        let signs: Vec<f64> = x.iter_rows().map(|r| if r[0] * r[1] > 0.0 { 1.0 } else { -1.0 }).collect();
        let labels = Labels::from_signs(&signs).unwrap();
        let m = fit_svc(&x, &labels, SvmConfig { c: 5.0, ..SvmConfig::default() }).unwrap();
        let q = Matrix::new(10, 2, (0..20).map(|_| rng.next_f64()).collect()).unwrap();
        let a = m.decision(&q).unwrap();
        let b = m.decision_full(&x, &q).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() <= 1e-9 * 30.0);
        }
        assert!(m.objective <= 30.0);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(16))]
        #[test]
        fn separable_sets_fit_exactly(seed in 0u64..1_000_000, n in 4usize..=40) {
            // Separable through the origin, since the expansion has no intercept.
            let mut rng = SeededRng::new(seed);
            let theta = rng.next_f64() * std::f64::consts::TAU;
            let normal = [theta.cos(), theta.sin()];
            let mut rows = Vec::new();
            let mut signs = Vec::new();
            while rows.len() < n {
                let p = [rng.next_f64() * 6.0 - 3.0, rng.next_f64() * 6.0 - 3.0];
                let s = p[0] * normal[0] + p[1] * normal[1];
                if s.abs() >= 0.5 {
                    rows.push(p);
                    signs.push(s.signum());
                }
            }
            if signs.iter().all(|&s| s == signs[0]) {
                signs[0] = -signs[0];
                rows[0] = [-rows[0][0], -rows[0][1]];
            }
            let x = Matrix::from_rows(&rows).unwrap();
            let labels = Labels::from_signs(&signs).unwrap();
            let cfg = SvmConfig { kernel: KernelSpec::Linear, c: 100.0, ..SvmConfig::default() };
            let m = fit_svc(&x, &labels, cfg).unwrap();
            proptest::prop_assert_eq!(m.predict_class(&x).unwrap(), labels.values().to_vec());
        }
    }
}
