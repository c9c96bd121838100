//! Gaussian generative classifiers scored through
//! `xᵀWₖx + xᵀwₖ + w₀ₖ`, the class log-posterior up to a class-independent term.
//!
//! Naive Bayes here uses one isotropic variance per class (`Σₖ = σₖ²I`), or one
//! variance for all classes, rather than a variance per feature. All
//! covariance estimates divide by the sample count and receive a diagonal
//! jitter of `1e-9 · trace/p` before inversion.

use serde::{Deserialize, Serialize};

use crate::data::{argmax, dot, Labels, Matrix};
use crate::error::{check_dim, Error, Result};
use crate::linalg::Cholesky;
use crate::multiclass::softmax;

pub const COVARIANCE_JITTER: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaussianKind {
    NbPerClassVar,
    NbSharedVar,
    Lda,
    Qda,
}

/// Quadratic coefficient `Wₖ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadratic {
    /// Linear model.
    Absent,
    /// `c·I`.
    Scalar(f64),
    Full(Matrix),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassCoefficients {
    pub quadratic: Quadratic,
    pub linear: Vec<f64>,
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianClassifier {
    pub kind: GaussianKind,
    pub means: Vec<Vec<f64>>,
    pub priors: Vec<f64>,
    /// Jittered isotropic variances: one per class, or a single shared one.
    pub variances: Vec<f64>,
    /// Jittered covariance matrices: one pooled (lda) or one per class (qda).
    pub covariances: Vec<Matrix>,
    pub coefficients: Vec<ClassCoefficients>,
    pub labels: Vec<String>,
}

fn jittered(mut cov: Matrix) -> Matrix {
    let p = cov.rows();
    let j = COVARIANCE_JITTER * cov.trace() / p as f64;
    cov.add_diagonal(j);
    cov
}

fn factor(cov: &Matrix) -> Result<Cholesky> {
    Cholesky::factor(cov).ok_or(Error::SingularMatrix)
}

fn isotropic(var: f64, mean: &[f64], prior: f64, quadratic: bool) -> Result<ClassCoefficients> {
    if !(var > 0.0) {
        return Err(Error::SingularMatrix);
    }
    let p = mean.len() as f64;
    let mut intercept = -dot(mean, mean) / (2.0 * var) + prior.ln();
    if quadratic {
        // −½ log|σ²I| = −(p/2) log σ²
        intercept -= 0.5 * p * var.ln();
    }
    Ok(ClassCoefficients {
        quadratic: if quadratic { Quadratic::Scalar(-0.5 / var) } else { Quadratic::Absent },
        linear: mean.iter().map(|m| m / var).collect(),
        intercept,
    })
}

pub fn fit_gaussian(x: &Matrix, labels: &Labels, kind: GaussianKind) -> Result<GaussianClassifier> {
    x.require_nonempty()?;
    check_dim(x.rows(), labels.len())?;
    let (n, p) = x.shape();
    let q = labels.n_classes();
    let counts = labels.counts();
    if let Some(k) = counts.iter().position(|&c| c < 2) {
        return Err(Error::DegenerateLabels(format!(
            "class '{}' has {} sample(s); at least 2 are needed",
            labels.name(k),
            counts[k]
        )));
    }

    let mut means = vec![vec![0.0; p]; q];
    for (r, &k) in x.iter_rows().zip(labels.values()) {
        for (m, v) in means[k].iter_mut().zip(r) {
            *m += v;
        }
    }
    for (m, &c) in means.iter_mut().zip(&counts) {
        m.iter_mut().for_each(|v| *v /= c as f64);
    }
    let priors: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();

    // Per-class scatter matrices Σᵢ (x − μₖ)(x − μₖ)ᵀ.
    let mut scatter = vec![Matrix::zeros(p, p); q];
    for (r, &k) in x.iter_rows().zip(labels.values()) {
        let d: Vec<f64> = r.iter().zip(&means[k]).map(|(a, b)| a - b).collect();
        let s = &mut scatter[k];
        for a in 0..p {
            for b in a..p {
                s[(a, b)] += d[a] * d[b];
            }
        }
    }
    for s in &mut scatter {
        for a in 0..p {
            for b in 0..a {
                s[(a, b)] = s[(b, a)];
            }
        }
    }

    let mut variances = Vec::new();
    let mut covariances = Vec::new();
    let coefficients: Vec<ClassCoefficients> = match kind {
        GaussianKind::NbPerClassVar => {
            for k in 0..q {
                let v = scatter[k].trace() / (counts[k] * p) as f64;
                variances.push(v * (1.0 + COVARIANCE_JITTER));
            }
            (0..q).map(|k| isotropic(variances[k], &means[k], priors[k], true)).collect::<Result<_>>()?
        }
        GaussianKind::NbSharedVar => {
            let total: f64 = scatter.iter().map(Matrix::trace).sum();
            variances.push(total / (n * p) as f64 * (1.0 + COVARIANCE_JITTER));
            (0..q).map(|k| isotropic(variances[0], &means[k], priors[k], false)).collect::<Result<_>>()?
        }
        GaussianKind::Lda => {
            let mut pooled = Matrix::zeros(p, p);
            for s in &scatter {
                pooled = Matrix::from_raw(p, p, pooled.as_slice().iter().zip(s.as_slice()).map(|(a, b)| a + b).collect());
            }
            pooled.scale(1.0 / n as f64);
            let cov = jittered(pooled);
            let chol = factor(&cov)?;
            covariances.push(cov);
            (0..q)
                .map(|k| {
                    let w = chol.solve_vec(&means[k]);
                    ClassCoefficients {
                        quadratic: Quadratic::Absent,
                        intercept: -0.5 * dot(&means[k], &w) + priors[k].ln(),
                        linear: w,
                    }
                })
                .collect()
        }
        GaussianKind::Qda => {
            let mut out = Vec::with_capacity(q);
            for k in 0..q {
                let mut s = scatter[k].clone();
                s.scale(1.0 / counts[k] as f64);
                let cov = jittered(s);
                let chol = factor(&cov)?;
                let w = chol.solve_vec(&means[k]);
                let mut quad = chol.inverse();
                quad.scale(-0.5);
                out.push(ClassCoefficients {
                    quadratic: Quadratic::Full(quad),
                    intercept: -0.5 * dot(&means[k], &w) - 0.5 * chol.log_det() + priors[k].ln(),
                    linear: w,
                });
                covariances.push(cov);
            }
            out
        }
    };

    Ok(GaussianClassifier {
        kind,
        means,
        priors,
        variances,
        covariances,
        coefficients,
        labels: labels.names().to_vec(),
    })
}

impl GaussianClassifier {
    pub fn n_features(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    /// Per-class scores `xᵀWₖx + xᵀwₖ + w₀ₖ`.
    pub fn log_posterior_scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n_features(), x.len())?;
        Ok(self
            .coefficients
            .iter()
            .map(|c| {
                let quad = match &c.quadratic {
                    Quadratic::Absent => 0.0,
                    Quadratic::Scalar(s) => s * dot(x, x),
                    Quadratic::Full(w) => {
                        let wx = w.mat_vec(x).expect("square coefficient matrix");
                        dot(x, &wx)
                    }
                };
                quad + dot(x, &c.linear) + c.intercept
            })
            .collect())
    }

    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<Vec<f64>>> {
        x.iter_rows().map(|r| Ok(softmax(&self.log_posterior_scores(r)?))).collect()
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        x.iter_rows().map(|r| Ok(argmax(&self.log_posterior_scores(r)?))).collect()
    }
}
