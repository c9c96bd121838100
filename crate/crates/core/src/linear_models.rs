//! Least squares, ridge, lasso, elastic-net and logistic regression.
//!
//! Penalized objectives share one convention:
//! `loss + λα‖w‖₁ + λ(1−α)‖w‖₂²`, with the intercept never penalized.
//! Ridge is `α = 0`, lasso is `α = 1`.

use serde::{Deserialize, Serialize};

use crate::data::{dot, Labels, Matrix};
use crate::error::{check_dim, Error, Result};
use crate::linalg::solve_spd_vec;

pub const CD_TOL: f64 = 1e-8;
pub const CD_MAX_CYCLES: usize = 10_000;
/// Stationarity level a coordinate-descent fit must reach besides the step-size test.
pub const CD_KKT_TOL: f64 = 1e-7;
pub const GD_TOL: f64 = 1e-6;
pub const GD_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Penalty {
    None,
    L2,
    L1,
    ElasticNet,
}

impl Penalty {
    /// `(ℓ1 weight, ℓ2 weight)` for the given strength and mix.
    pub fn weights(self, lambda: f64, alpha: f64) -> (f64, f64) {
        match self {
            Penalty::None => (0.0, 0.0),
            Penalty::L2 => (0.0, lambda),
            Penalty::L1 => (lambda, 0.0),
            Penalty::ElasticNet => (lambda * alpha, lambda * (1.0 - alpha)),
        }
    }
}

fn check_penalty(lambda: f64, alpha: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::hyper("lambda must be non-negative and finite"));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::hyper("alpha must lie in [0, 1]"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub penalty: Penalty,
    pub lambda: f64,
    pub alpha: f64,
    pub fit_intercept: bool,
    /// Coordinate-descent cycles (0 for closed-form fits).
    pub iterations: usize,
}

impl LinearModel {
    pub fn predict_row(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.coefficients.len(), x.len())?;
        Ok(self.intercept + dot(&self.coefficients, x))
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        x.iter_rows().map(|r| self.predict_row(r)).collect()
    }
}

fn closed_form(x: &Matrix, y: &[f64], lambda: f64, fit_intercept: bool) -> Result<(f64, Vec<f64>)> {
    if x.rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    check_dim(x.rows(), y.len())?;
    let a = if fit_intercept { x.with_intercept_column() } else { x.clone() };
    if a.cols() == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut g = a.gram();
    let first = usize::from(fit_intercept);
    for j in first..g.rows() {
        g[(j, j)] += lambda;
    }
    let rhs = a.transpose_vec(y)?;
    let w = solve_spd_vec(&g, &rhs)?;
    if fit_intercept {
        Ok((w[0], w[1..].to_vec()))
    } else {
        Ok((0.0, w))
    }
}

/// Ordinary least squares through the normal equations.
pub fn fit_ols(x: &Matrix, y: &[f64], fit_intercept: bool) -> Result<LinearModel> {
    let (intercept, coefficients) = closed_form(x, y, 0.0, fit_intercept)?;
    Ok(LinearModel {
        intercept,
        coefficients,
        penalty: Penalty::None,
        lambda: 0.0,
        alpha: 0.0,
        fit_intercept,
        iterations: 0,
    })
}

/// `(XᵀX + λI)⁻¹Xᵀy`, leaving the intercept unpenalized.
pub fn fit_ridge(x: &Matrix, y: &[f64], lambda: f64, fit_intercept: bool) -> Result<LinearModel> {
    check_penalty(lambda, 0.0)?;
    let (intercept, coefficients) = closed_form(x, y, lambda, fit_intercept)?;
    Ok(LinearModel {
        intercept,
        coefficients,
        penalty: Penalty::L2,
        lambda,
        alpha: 0.0,
        fit_intercept,
        iterations: 0,
    })
}

pub fn fit_lasso(x: &Matrix, y: &[f64], lambda: f64, fit_intercept: bool) -> Result<LinearModel> {
    let mut m = fit_elastic_net(x, y, lambda, 1.0, fit_intercept)?;
    m.penalty = Penalty::L1;
    Ok(m)
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Cyclic coordinate descent on `‖y − w₀ − Xw‖² + λα‖w‖₁ + λ(1−α)‖w‖²`.
///
/// A fit is accepted once a full cycle moves no coefficient by more than
/// [`CD_TOL`] and the stationarity violation is at most [`CD_KKT_TOL`].
pub fn fit_elastic_net(x: &Matrix, y: &[f64], lambda: f64, alpha: f64, fit_intercept: bool) -> Result<LinearModel> {
    check_penalty(lambda, alpha)?;
    x.require_nonempty()?;
    check_dim(x.rows(), y.len())?;
    let (n, p) = x.shape();
    let l1 = lambda * alpha;
    let l2 = lambda * (1.0 - alpha);
    let cols: Vec<Vec<f64>> = (0..p).map(|j| x.column(j)).collect();
    let norms: Vec<f64> = cols.iter().map(|c| dot(c, c)).collect();

    let mut w = vec![0.0; p];
    let mut w0 = 0.0;
    let mut r = y.to_vec();
    let model = |w0: f64, w: &[f64], iterations: usize| LinearModel {
        intercept: w0,
        coefficients: w.to_vec(),
        penalty: Penalty::ElasticNet,
        lambda,
        alpha,
        fit_intercept,
        iterations,
    };

    for cycle in 1..=CD_MAX_CYCLES {
        let mut max_change = 0.0f64;
        if fit_intercept {
            let shift = r.iter().sum::<f64>() / n as f64;
            w0 += shift;
            r.iter_mut().for_each(|ri| *ri -= shift);
            max_change = max_change.max(shift.abs());
        }
        for j in 0..p {
            let denom = norms[j] + l2;
            let old = w[j];
            let new = if denom > 0.0 {
                let rho = dot(&cols[j], &r) + norms[j] * old;
                soft_threshold(rho, l1 / 2.0) / denom
            } else {
                0.0
            };
            let delta = new - old;
            if delta != 0.0 {
                for (ri, xij) in r.iter_mut().zip(&cols[j]) {
                    *ri -= delta * xij;
                }
                w[j] = new;
            }
            max_change = max_change.max(delta.abs());
        }
        if max_change <= CD_TOL {
            // Refresh the residual to shed accumulated drift before certifying.
            for (i, ri) in r.iter_mut().enumerate() {
                *ri = y[i] - w0 - dot(x.row(i), &w);
            }
            let m = model(w0, &w, cycle);
            if kkt_violation_residual(&cols, &r, &m) <= CD_KKT_TOL {
                return Ok(m);
            }
        }
    }
    let mut last_iterate = vec![w0];
    last_iterate.extend_from_slice(&w);
    Err(Error::ConvergenceFailure {
        solver: "coordinate descent",
        iterations: CD_MAX_CYCLES,
        last_iterate,
    })
}

fn kkt_violation_residual(cols: &[Vec<f64>], r: &[f64], m: &LinearModel) -> f64 {
    let (l1, l2) = m.penalty.weights(m.lambda, m.alpha);
    let mut worst = 0.0f64;
    if m.fit_intercept {
        worst = worst.max((2.0 * r.iter().sum::<f64>()).abs());
    }
    for (j, col) in cols.iter().enumerate() {
        let g = 2.0 * dot(col, r);
        let wj = m.coefficients[j];
        let v = if wj == 0.0 {
            (g.abs() - l1).max(0.0)
        } else {
            (g - l1 * wj.signum() - 2.0 * l2 * wj).abs()
        };
        worst = worst.max(v);
    }
    worst
}

/// Largest violation of the optimality conditions of a penalized least-squares fit.
///
/// For `wⱼ = 0` this is `max(0, |2Xⱼᵀr| − λα)`; otherwise
/// `|2Xⱼᵀr − λα·sign(wⱼ) − 2λ(1−α)wⱼ|`, where `r` is the residual.
pub fn kkt_violation(model: &LinearModel, x: &Matrix, y: &[f64]) -> Result<f64> {
    let pred = model.predict(x)?;
    let r: Vec<f64> = y.iter().zip(&pred).map(|(a, b)| a - b).collect();
    let cols: Vec<Vec<f64>> = (0..x.cols()).map(|j| x.column(j)).collect();
    Ok(kkt_violation_residual(&cols, &r, model))
}

/// Overflow-safe logistic function.
pub fn sigmoid(f: f64) -> f64 {
    if f >= 0.0 {
        1.0 / (1.0 + (-f).exp())
    } else {
        let e = f.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + eᶻ)` without overflow.
pub(crate) fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// `softplus(z + d) − softplus(z)`, accurate when `d` is small.
fn softplus_delta(z: f64, d: f64) -> f64 {
    if d.abs() < 1.0 {
        (d.exp_m1() * sigmoid(z)).ln_1p()
    } else {
        softplus(z + d) - softplus(z)
    }
}

/// Logistic loss in bits: `log(1 + exp(−y·f)) / log 2`.
pub fn logistic_loss(y: f64, f: f64) -> f64 {
    softplus(-y * f) / std::f64::consts::LN_2
}

/// A smooth objective for the proximal gradient driver.
pub(crate) trait SmoothObjective {
    fn value(&self, theta: &[f64]) -> f64;
    fn gradient(&self, theta: &[f64]) -> Vec<f64>;
    /// `value(theta + d) − value(theta)`, computed without cancellation.
    fn delta(&self, theta: &[f64], d: &[f64]) -> f64;
}

pub(crate) struct GdOutcome {
    pub theta: Vec<f64>,
    pub iterations: usize,
    pub objective_trace: Vec<f64>,
}

/// Gradient descent with halving backtracking from step 1; coordinates with a
/// positive `l1` weight take a soft-threshold (proximal) step.
///
/// Stops when the minimum-norm subgradient has infinity norm ≤ `tol`.
pub(crate) fn proximal_gradient(
    obj: &dyn SmoothObjective,
    mut theta: Vec<f64>,
    l1: &[f64],
    frozen: &[bool],
    tol: f64,
    max_iter: usize,
    solver: &'static str,
) -> Result<GdOutcome> {
    let l1_value = |t: &[f64]| t.iter().zip(l1).map(|(v, c)| c * v.abs()).sum::<f64>();
    let mut trace = vec![obj.value(&theta) + l1_value(&theta)];
    for iter in 0..max_iter {
        let mut g = obj.gradient(&theta);
        for (gi, &f) in g.iter_mut().zip(frozen) {
            if f {
                *gi = 0.0;
            }
        }
        let stationarity = g
            .iter()
            .zip(&theta)
            .zip(l1)
            .map(|((&gi, &ti), &c)| {
                if c == 0.0 {
                    gi.abs()
                } else if ti == 0.0 {
                    (gi.abs() - c).max(0.0)
                } else {
                    (gi + c * ti.signum()).abs()
                }
            })
            .fold(0.0, f64::max);
        if stationarity <= tol {
            return Ok(GdOutcome {
                theta,
                iterations: iter,
                objective_trace: trace,
            });
        }

        let mut step = 1.0;
        let mut accepted = false;
        while step > 1e-300 {
            let d: Vec<f64> = theta
                .iter()
                .zip(&g)
                .zip(l1)
                .map(|((&ti, &gi), &c)| soft_threshold(ti - step * gi, step * c) - ti)
                .collect();
            let df = obj.delta(&theta, &d);
            let lin: f64 = dot(&g, &d);
            let quad: f64 = dot(&d, &d) / (2.0 * step);
            let dh: f64 = theta
                .iter()
                .zip(&d)
                .zip(l1)
                .map(|((&ti, &di), &c)| c * ((ti + di).abs() - ti.abs()))
                .sum();
            if df.is_finite() && df <= lin + quad && df + dh < 0.0 {
                for (ti, di) in theta.iter_mut().zip(&d) {
                    *ti += di;
                }
                trace.push(obj.value(&theta) + l1_value(&theta));
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Err(Error::ConvergenceFailure {
        solver,
        iterations: max_iter,
        last_iterate: theta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub penalty: Penalty,
    pub lambda: f64,
    /// Elastic-net mix, used only with [`Penalty::ElasticNet`].
    pub alpha: f64,
    pub fit_intercept: bool,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            penalty: Penalty::L2,
            lambda: 1.0,
            alpha: 0.5,
            fit_intercept: true,
            max_iter: GD_MAX_ITER,
            tol: GD_TOL,
        }
    }
}

/// Sum of logistic losses plus the ℓ2 part of the penalty; parameters `[w₀, w…]`.
pub struct LogisticObjective<'a> {
    x: &'a Matrix,
    y: Vec<f64>,
    l2: f64,
}

impl<'a> LogisticObjective<'a> {
    /// `y` holds ±1 targets.
    pub fn new(x: &'a Matrix, y: &[f64], l2: f64) -> Result<Self> {
        check_dim(x.rows(), y.len())?;
        Ok(LogisticObjective { x, y: y.to_vec(), l2 })
    }

    fn scores(&self, theta: &[f64]) -> Vec<f64> {
        self.x.iter_rows().map(|r| theta[0] + dot(&theta[1..], r)).collect()
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        SmoothObjective::value(self, theta)
    }

    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        SmoothObjective::gradient(self, theta)
    }
}

impl SmoothObjective for LogisticObjective<'_> {
    fn value(&self, theta: &[f64]) -> f64 {
        let loss: f64 = self
            .scores(theta)
            .iter()
            .zip(&self.y)
            .map(|(f, y)| softplus(-y * f))
            .sum();
        loss + self.l2 * dot(&theta[1..], &theta[1..])
    }

    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; theta.len()];
        for ((r, f), y) in self.x.iter_rows().zip(self.scores(theta)).zip(&self.y) {
            // d/df softplus(−y f) = −y σ(−y f)
            let c = -y * sigmoid(-y * f);
            g[0] += c;
            for (gj, xj) in g[1..].iter_mut().zip(r) {
                *gj += c * xj;
            }
        }
        for (gj, wj) in g[1..].iter_mut().zip(&theta[1..]) {
            *gj += 2.0 * self.l2 * wj;
        }
        g
    }

    fn delta(&self, theta: &[f64], d: &[f64]) -> f64 {
        let mut total = 0.0;
        for ((r, f), y) in self.x.iter_rows().zip(self.scores(theta)).zip(&self.y) {
            let df = d[0] + dot(&d[1..], r);
            total += softplus_delta(-y * f, -y * df);
        }
        let pen: f64 = theta[1..]
            .iter()
            .zip(&d[1..])
            .map(|(w, dw)| 2.0 * w * dw + dw * dw)
            .sum();
        total + self.l2 * pen
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub config: LogisticConfig,
    pub labels: Vec<String>,
    pub iterations: usize,
    pub objective_trace: Vec<f64>,
}

/// Binary logistic regression; class index 1 is the positive class.
pub fn fit_logistic(x: &Matrix, labels: &Labels, config: LogisticConfig) -> Result<LogisticModel> {
    x.require_nonempty()?;
    check_dim(x.rows(), labels.len())?;
    labels.require_binary()?;
    check_penalty(config.lambda, config.alpha)?;
    let y = labels.signs();
    let (l1, l2) = config.penalty.weights(config.lambda, config.alpha);
    let obj = LogisticObjective::new(x, &y, l2)?;
    let p = x.cols();
    let mut l1w = vec![l1; p + 1];
    l1w[0] = 0.0;
    let mut frozen = vec![false; p + 1];
    frozen[0] = !config.fit_intercept;
    let out = proximal_gradient(&obj, vec![0.0; p + 1], &l1w, &frozen, config.tol, config.max_iter, "logistic gradient descent")?;
    Ok(LogisticModel {
        intercept: out.theta[0],
        coefficients: out.theta[1..].to_vec(),
        config,
        labels: labels.names().to_vec(),
        iterations: out.iterations,
        objective_trace: out.objective_trace,
    })
}

impl LogisticModel {
    /// Signed score `f(x) = w₀ + wᵀx`.
    pub fn decision(&self, x: &Matrix) -> Result<Vec<f64>> {
        check_dim(self.coefficients.len(), x.cols())?;
        Ok(x.iter_rows().map(|r| self.intercept + dot(&self.coefficients, r)).collect())
    }

    /// `P(class 1 | x)`.
    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>> {
        Ok(self.decision(x)?.into_iter().map(sigmoid).collect())
    }

    /// Class 1 iff `f(x) > 0`.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        Ok(self.decision(x)?.into_iter().map(|f| usize::from(f > 0.0)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn random(rng: &mut SeededRng, n: usize, p: usize) -> Matrix {
        Matrix::new(n, p, (0..n * p).map(|_| rng.next_f64() * 2.0 - 1.0).collect()).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn ols_two_points() {
        let x = Matrix::from_rows(&[[0.0], [1.0]]).unwrap();
        let m = fit_ols(&x, &[1.0, 3.0], true).unwrap();
        assert!(close(m.intercept, 1.0, 1e-12) && close(m.coefficients[0], 2.0, 1e-12));
    }

    #[test]
    fn ols_noiseless_recovery_and_orthogonality() {
        let mut rng = SeededRng::new(10);
        let x = random(&mut rng, 60, 5);
        let w_true = [1.5, -2.0, 0.25, 3.0, -0.5];
        let y: Vec<f64> = x.iter_rows().map(|r| 0.7 + dot(r, &w_true)).collect();
        let m = fit_ols(&x, &y, true).unwrap();
        assert!(close(m.intercept, 0.7, 1e-8));
        for (a, b) in m.coefficients.iter().zip(w_true) {
            assert!(close(*a, b, 1e-8));
        }
    }

    #[test]
    fn intercept_only_is_mean() {
        let x = Matrix::new(4, 0, vec![]).unwrap();
        let m = fit_ols(&x, &[1.0, 2.0, 3.0, 6.0], true).unwrap();
        assert!(close(m.intercept, 3.0, 1e-12));
        assert!(m.coefficients.is_empty());
    }

    #[test]
    fn ridge_scalar_case() {
        let x = Matrix::from_rows(&[[1.0]]).unwrap();
        let m = fit_ridge(&x, &[2.0], 1.0, false).unwrap();
        assert!(close(m.coefficients[0], 1.0, 1e-15));
    }

    #[test]
    fn ridge_zero_lambda_is_ols_and_large_lambda_shrinks() {
        let mut rng = SeededRng::new(11);
        let x = random(&mut rng, 40, 4);
        let y: Vec<f64> = (0..40).map(|_| rng.next_f64() * 4.0).collect();
        let ols = fit_ols(&x, &y, true).unwrap();
        let r0 = fit_ridge(&x, &y, 0.0, true).unwrap();
        assert!(close(ols.intercept, r0.intercept, 1e-10));
        for (a, b) in ols.coefficients.iter().zip(&r0.coefficients) {
            assert!(close(*a, *b, 1e-10));
        }
        let big = fit_ridge(&x, &y, 1e8, true).unwrap();
        let norm = |w: &[f64]| dot(w, w).sqrt();
        assert!(norm(&big.coefficients) <= 1e-4 * norm(&ols.coefficients));
    }

    #[test]
    fn lasso_soft_threshold_examples() {
        let x = Matrix::from_rows(&[[1.0]]).unwrap();
        let m = fit_lasso(&x, &[3.0], 2.0, false).unwrap();
        assert!(close(m.coefficients[0], 2.0, 1e-12));
        let m = fit_lasso(&x, &[3.0], 8.0, false).unwrap();
        assert_eq!(m.coefficients[0], 0.0);
    }

    #[test]
    fn elastic_net_alpha_one_is_lasso() {
        let mut rng = SeededRng::new(12);
        let x = random(&mut rng, 50, 6);
        let y: Vec<f64> = x.iter_rows().map(|r| r[0] * 3.0 - r[2] + 0.1 * rng.next_f64()).collect();
        let a = fit_lasso(&x, &y, 1.5, true).unwrap();
        let b = fit_elastic_net(&x, &y, 1.5, 1.0, true).unwrap();
        for (u, v) in a.coefficients.iter().zip(&b.coefficients) {
            assert!(close(*u, *v, 1e-8));
        }
    }

    #[test]
    fn elastic_net_kkt_and_zero_lambda() {
        let mut rng = SeededRng::new(13);
        let x = random(&mut rng, 80, 5);
        let y: Vec<f64> = x.iter_rows().map(|r| 2.0 * r[1] - r[3] + 0.3 * rng.next_f64()).collect();
        for (lambda, alpha) in [(0.5, 0.3), (4.0, 0.9), (20.0, 1.0)] {
            let m = fit_elastic_net(&x, &y, lambda, alpha, true).unwrap();
            assert!(kkt_violation(&m, &x, &y).unwrap() <= 1e-6);
        }
        let ols = fit_ols(&x, &y, true).unwrap();
        let cd = fit_elastic_net(&x, &y, 0.0, 0.5, true).unwrap();
        for (u, v) in ols.coefficients.iter().zip(&cd.coefficients) {
            assert!(close(*u, *v, 1e-7));
        }
    }

    #[test]
    fn lasso_sparsity_monotone_in_lambda() {
        let mut rng = SeededRng::new(14);
        let x = random(&mut rng, 60, 8);
        let y: Vec<f64> = x.iter_rows().map(|r| r[0] - 2.0 * r[4] + 0.5 * r[7] + 0.2 * rng.next_f64()).collect();
        let lambda_max = 2.0 * x.transpose_vec(&y).unwrap().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut last = usize::MAX;
        for f in [0.01, 0.1, 1.0, 10.0, 100.0] {
            let m = fit_lasso(&x, &y, f * lambda_max, false).unwrap();
            let nnz = m.coefficients.iter().filter(|&&w| w != 0.0).count();
            assert!(nnz <= last);
            last = nnz;
            if f >= 1.0 {
                assert_eq!(nnz, 0);
            }
        }
    }

    #[test]
    fn logistic_loss_values() {
        assert!(close(logistic_loss(1.0, 0.0), 1.0, 1e-15));
        assert!(close(logistic_loss(-1.0, 0.0), 1.0, 1e-15));
        assert!(logistic_loss(1.0, 50.0) < 1e-20);
        assert!(close(logistic_loss(1.0, -1.0), (1.0 + 1f64.exp()).ln() / 2f64.ln(), 1e-14));
        // log2(1 + e), evaluated independently
        assert!(close(logistic_loss(1.0, -1.0), 1.8946361239720115, 1e-14));
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(close(sigmoid(1e6), 1.0, 1e-12));
        assert_eq!(sigmoid(-1e6), 0.0);
        assert!((sigmoid(3.0) + sigmoid(-3.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_model_predicts_half_and_negative_class() {
        let m = LogisticModel {
            intercept: 0.0,
            coefficients: vec![0.0, 0.0],
            config: LogisticConfig::default(),
            labels: vec!["-1".into(), "+1".into()],
            iterations: 0,
            objective_trace: vec![],
        };
        let x = Matrix::from_rows(&[[1.0, 2.0], [-3.0, 4.0]]).unwrap();
        assert_eq!(m.predict_proba(&x).unwrap(), vec![0.5, 0.5]);
        assert_eq!(m.predict(&x).unwrap(), vec![0, 0]);
    }

    #[test]
    fn logistic_symmetric_data_has_zero_intercept() {
        let x = Matrix::from_rows(&[[-2.0], [-1.0], [1.0], [2.0]]).unwrap();
        let labels = Labels::from_signs(&[-1.0, -1.0, 1.0, 1.0]).unwrap();
        let m = fit_logistic(&x, &labels, LogisticConfig::default()).unwrap();
        assert!(m.intercept.abs() <= 1e-6);
        assert!(m.coefficients[0] > 0.0);
        assert_eq!(m.predict(&x).unwrap(), vec![0, 0, 1, 1]);
    }

    #[test]
    fn logistic_gradient_matches_finite_differences() {
        let mut rng = SeededRng::new(15);
        let x = random(&mut rng, 20, 3);
        let y: Vec<f64> = (0..20).map(|_| if rng.next_f64() < 0.5 { -1.0 } else { 1.0 }).collect();
        let obj = LogisticObjective::new(&x, &y, 0.3).unwrap();
        let theta: Vec<f64> = (0..4).map(|_| rng.next_f64() - 0.5).collect();
        let g = obj.gradient(&theta);
        let h = 1e-6;
        for j in 0..4 {
            let mut tp = theta.clone();
            let mut tm = theta.clone();
            tp[j] += h;
            tm[j] -= h;
            let fd = (obj.value(&tp) - obj.value(&tm)) / (2.0 * h);
            assert!((fd - g[j]).abs() <= 1e-5 * g[j].abs().max(1.0));
        }
    }

    #[test]
    fn logistic_converges_and_decreases() {
        let mut rng = SeededRng::new(16);
        let x = random(&mut rng, 60, 3);
        let signs: Vec<f64> = x
            .iter_rows()
            .map(|r| if r[0] + 0.5 * r[1] + 0.3 * (rng.next_f64() - 0.5) > 0.0 { 1.0 } else { -1.0 })
            .collect();
        let labels = Labels::from_signs(&signs).unwrap();
        for penalty in [Penalty::L2, Penalty::L1, Penalty::ElasticNet, Penalty::None] {
            let cfg = LogisticConfig { penalty, lambda: 0.5, ..LogisticConfig::default() };
            let m = fit_logistic(&x, &labels, cfg).unwrap();
            for w in m.objective_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-12 * w[0].abs(), "{penalty:?}");
            }
        }
    }

    #[test]
    fn logistic_rejects_single_class() {
        let x = Matrix::from_rows(&[[1.0], [2.0]]).unwrap();
        let labels = Labels::encode(&["a", "a"]).unwrap();
        assert!(matches!(fit_logistic(&x, &labels, LogisticConfig::default()), Err(Error::DegenerateLabels(_))));
    }
}
