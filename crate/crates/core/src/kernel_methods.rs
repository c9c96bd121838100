//! Kernels, Gram matrices, kernel ridge regression and kernel PCA.
//!
//! Kernel PCA works on the double-centered Gram matrix
//! `K̃ = K − 1ₙK − K1ₙ + 1ₙK1ₙ`. A new point `z` is projected through its
//! centered cross-kernel row
//! `k̃ᵢ(z) = K(z,xᵢ) − mean_j K(z,xⱼ) − mean_j K(xⱼ,xᵢ) + mean_jl K(xⱼ,xₗ)`,
//! which coincides with row `i` of `K̃` when `z` is a training point.

use serde::{Deserialize, Serialize};

use crate::data::{dot, Matrix};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{solve_spd_vec, sym_eig};
use crate::metric::squared_euclidean;
use crate::parallel::map_indexed;

/// Eigenvalues at or below this are treated as numerically zero by kernel PCA.
pub const KPCA_EIGEN_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    Linear,
    /// `(γ xᵀx' + c₀)^d`
    Polynomial { gamma: f64, c0: f64, degree: u32 },
    /// `tanh(γ xᵀx' + c₀)`; not positive semi-definite in general.
    Sigmoid { gamma: f64, c0: f64 },
    /// `exp(−γ ‖x − x'‖²)`
    Rbf { gamma: f64 },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        let gamma_ok = |g: f64| g > 0.0 && g.is_finite();
        let c0_ok = |c: f64| c >= 0.0 && c.is_finite();
        match *self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Polynomial { gamma, c0, degree } => {
                if !gamma_ok(gamma) {
                    Err(Error::hyper("kernel gamma must be positive"))
                } else if !c0_ok(c0) {
                    Err(Error::hyper("kernel c0 must be non-negative"))
                } else if degree < 1 {
                    Err(Error::hyper("polynomial degree must be at least 1"))
                } else {
                    Ok(())
                }
            }
            KernelSpec::Sigmoid { gamma, c0 } => {
                if !gamma_ok(gamma) {
                    Err(Error::hyper("kernel gamma must be positive"))
                } else if !c0_ok(c0) {
                    Err(Error::hyper("kernel c0 must be non-negative"))
                } else {
                    Ok(())
                }
            }
            KernelSpec::Rbf { gamma } if !gamma_ok(gamma) => Err(Error::hyper("kernel gamma must be positive")),
            KernelSpec::Rbf { .. } => Ok(()),
        }
    }

    /// Kernel value without length checks.
    pub(crate) fn apply(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            KernelSpec::Linear => dot(a, b),
            KernelSpec::Polynomial { gamma, c0, degree } => (gamma * dot(a, b) + c0).powi(degree as i32),
            KernelSpec::Sigmoid { gamma, c0 } => (gamma * dot(a, b) + c0).tanh(),
            KernelSpec::Rbf { gamma } => (-gamma * squared_euclidean(a, b)).exp(),
        }
    }
}

pub fn kernel_eval(spec: &KernelSpec, a: &[f64], b: &[f64]) -> Result<f64> {
    spec.validate()?;
    check_dim(a.len(), b.len())?;
    Ok(spec.apply(a, b))
}

/// `G[i][j] = K(aᵢ, bⱼ)`.
pub fn gram(spec: &KernelSpec, a: &Matrix, b: &Matrix) -> Result<Matrix> {
    spec.validate()?;
    check_dim(a.cols(), b.cols())?;
    let rows = map_indexed(a.rows(), |i| {
        let ai = a.row(i);
        b.iter_rows().map(|bj| spec.apply(ai, bj)).collect::<Vec<f64>>()
    });
    Ok(Matrix::from_raw(a.rows(), b.rows(), rows.concat()))
}

/// Gram matrix of `a` against itself, exactly symmetric.
pub fn gram_symmetric(spec: &KernelSpec, a: &Matrix) -> Result<Matrix> {
    let mut g = gram(spec, a, a)?;
    for i in 0..g.rows() {
        for j in 0..i {
            g[(i, j)] = g[(j, i)];
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelRidgeModel {
    pub train: Matrix,
    pub alpha: Vec<f64>,
    pub lambda: f64,
    pub kernel: KernelSpec,
}

/// Solves `(K + λI) α = y`.
pub fn fit_kernel_ridge(x: &Matrix, y: &[f64], kernel: KernelSpec, lambda: f64) -> Result<KernelRidgeModel> {
    x.require_nonempty()?;
    check_dim(x.rows(), y.len())?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::hyper("kernel ridge lambda must be positive"));
    }
    let mut k = gram_symmetric(&kernel, x)?;
    k.add_diagonal(lambda);
    let alpha = solve_spd_vec(&k, y)?;
    Ok(KernelRidgeModel {
        train: x.clone(),
        alpha,
        lambda,
        kernel,
    })
}

impl KernelRidgeModel {
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        let g = gram(&self.kernel, x, &self.train)?;
        g.mat_vec(&self.alpha)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelPcaModel {
    pub train: Matrix,
    pub kernel: KernelSpec,
    /// Column means of the training Gram matrix.
    pub gram_col_means: Vec<f64>,
    pub gram_mean: f64,
    /// n×l, column k is the eigenvector scaled by 1/√λₖ.
    pub alphas: Matrix,
    pub eigenvalues: Vec<f64>,
    /// Set when fewer components than requested had positive eigenvalues.
    pub requested_components: Option<usize>,
}

impl KernelPcaModel {
    pub fn n_components(&self) -> usize {
        self.alphas.cols()
    }

    /// Human-readable note when the spectrum forced fewer components.
    pub fn warning(&self) -> Option<String> {
        self.requested_components.map(|req| {
            format!(
                "requested {req} components but only {} eigenvalues exceed {KPCA_EIGEN_FLOOR:e}",
                self.n_components()
            )
        })
    }
}

/// Double-centers a square Gram matrix, returning it with the column means and grand mean.
pub fn center_gram(k: &Matrix) -> (Matrix, Vec<f64>, f64) {
    let n = k.rows();
    let inv = 1.0 / n as f64;
    let mut means = vec![0.0; n];
    for r in k.iter_rows() {
        for (m, v) in means.iter_mut().zip(r) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m *= inv);
    let grand = means.iter().sum::<f64>() * inv;
    let mut c = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = k[(i, j)] - means[i] - means[j] + grand;
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    (c, means, grand)
}

pub fn kernel_pca_fit(x: &Matrix, kernel: KernelSpec, l: usize) -> Result<KernelPcaModel> {
    x.require_nonempty()?;
    if l == 0 || l > x.rows() {
        return Err(Error::hyper(format!("components must lie in 1..={}, got {l}", x.rows())));
    }
    let k = gram_symmetric(&kernel, x)?;
    let (kc, gram_col_means, gram_mean) = center_gram(&k);
    let eig = sym_eig(&kc)?;
    let kept = eig.eigenvalues.iter().take(l).take_while(|&&v| v > KPCA_EIGEN_FLOOR).count();
    let n = x.rows();
    let mut alphas = Matrix::zeros(n, kept);
    for c in 0..kept {
        let s = 1.0 / eig.eigenvalues[c].sqrt();
        for i in 0..n {
            alphas[(i, c)] = eig.eigenvectors[(i, c)] * s;
        }
    }
    Ok(KernelPcaModel {
        train: x.clone(),
        kernel,
        gram_col_means,
        gram_mean,
        alphas,
        eigenvalues: eig.eigenvalues[..kept].to_vec(),
        requested_components: (kept < l).then_some(l),
    })
}

pub fn kernel_pca_transform(model: &KernelPcaModel, z: &Matrix) -> Result<Matrix> {
    let cross = gram(&model.kernel, z, &model.train)?;
    let n = model.train.rows();
    let l = model.n_components();
    let mut out = Matrix::zeros(z.rows(), l);
    let mut centered = vec![0.0; n];
    for r in 0..z.rows() {
        let row = cross.row(r);
        let row_mean = row.iter().sum::<f64>() / n as f64;
        for i in 0..n {
            centered[i] = row[i] - row_mean - model.gram_col_means[i] + model.gram_mean;
        }
        for c in 0..l {
            let mut s = 0.0;
            for i in 0..n {
                s += model.alphas[(i, c)] * centered[i];
            }
            out[(r, c)] = s;
        }
    }
    Ok(out)
}
