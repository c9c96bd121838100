//! PCA by eigendecomposition of `XcᵀXc`, and the LDA projection from the
//! within/between-class scatter matrices.

use serde::{Deserialize, Serialize};

use crate::data::{Labels, Matrix};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{center_columns, column_means, fix_signs, sym_eig, Cholesky};

pub const LDA_JITTER: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub means: Vec<f64>,
    /// p×l, orthonormal columns.
    pub components: Matrix,
    /// Leading `l` eigenvalues of `XcᵀXc`, descending.
    pub eigenvalues: Vec<f64>,
    /// Eigenvalues divided by n: the variance of each score column.
    pub explained_variance: Vec<f64>,
    /// Eigenvalue over the sum of all p eigenvalues.
    pub explained_variance_ratio: Vec<f64>,
    pub n_samples: usize,
}

pub fn pca_fit(x: &Matrix, l: usize) -> Result<PcaModel> {
    x.require_nonempty()?;
    let (n, p) = x.shape();
    if l == 0 || l > p {
        return Err(Error::hyper(format!("n_components must be in 1..={p}, got {l}")));
    }
    if n < 2 {
        return Err(Error::DegenerateInput("PCA needs at least 2 rows".into()));
    }
    let (xc, means) = center_columns(x);
    let eig = sym_eig(&xc.gram())?;
    // Roundoff can leave tiny negative eigenvalues on rank-deficient data.
    let all: Vec<f64> = eig.eigenvalues.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = all.iter().sum();
    let keep: Vec<usize> = (0..l).collect();
    let eigenvalues = all[..l].to_vec();
    Ok(PcaModel {
        means,
        components: eig.eigenvectors.select_cols(&keep),
        explained_variance: eigenvalues.iter().map(|v| v / n as f64).collect(),
        explained_variance_ratio: eigenvalues.iter().map(|v| if total > 0.0 { v / total } else { 0.0 }).collect(),
        eigenvalues,
        n_samples: n,
    })
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.cols()
    }

    /// `(X − means)·W`
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        check_dim(self.means.len(), x.cols())?;
        let mut xc = x.clone();
        for i in 0..xc.rows() {
            for (v, m) in xc.row_mut(i).iter_mut().zip(&self.means) {
                *v -= m;
            }
        }
        xc.matmul(&self.components)
    }

    /// `T·Wᵀ + means`
    pub fn inverse_transform(&self, t: &Matrix) -> Result<Matrix> {
        check_dim(self.n_components(), t.cols())?;
        let mut x = t.matmul(&self.components.transpose())?;
        for i in 0..x.rows() {
            for (v, m) in x.row_mut(i).iter_mut().zip(&self.means) {
                *v += m;
            }
        }
        Ok(x)
    }
}

pub fn pca_transform(model: &PcaModel, x: &Matrix) -> Result<Matrix> {
    model.transform(x)
}

pub fn pca_inverse_transform(model: &PcaModel, t: &Matrix) -> Result<Matrix> {
    model.inverse_transform(t)
}

/// Within-class scatter `Σ_k Σ_{i∈k} (x−μ_k)(x−μ_k)ᵀ` and between-class scatter
/// `Σ_k π_k (μ_k−μ)(μ_k−μ)ᵀ`, with `π_k` the class proportion.
pub fn scatter_matrices(x: &Matrix, labels: &Labels) -> Result<(Matrix, Matrix)> {
    x.require_nonempty()?;
    check_dim(x.rows(), labels.len())?;
    let (n, p) = x.shape();
    let q = labels.n_classes();
    let mu = column_means(x);
    let mut class_means = vec![vec![0.0; p]; q];
    let counts = labels.counts();
    for (r, &c) in x.iter_rows().zip(labels.values()) {
        for (m, v) in class_means[c].iter_mut().zip(r) {
            *m += v;
        }
    }
    for (m, &c) in class_means.iter_mut().zip(&counts) {
        if c > 0 {
            m.iter_mut().for_each(|v| *v /= c as f64);
        }
    }
    let mut sw = Matrix::zeros(p, p);
    for (r, &c) in x.iter_rows().zip(labels.values()) {
        let d: Vec<f64> = r.iter().zip(&class_means[c]).map(|(a, b)| a - b).collect();
        for a in 0..p {
            for b in 0..p {
                sw[(a, b)] += d[a] * d[b];
            }
        }
    }
    let mut sb = Matrix::zeros(p, p);
    for (m, &c) in class_means.iter().zip(&counts) {
        if c == 0 {
            continue;
        }
        let w = c as f64 / n as f64;
        let d: Vec<f64> = m.iter().zip(&mu).map(|(a, b)| a - b).collect();
        for a in 0..p {
            for b in 0..p {
                sb[(a, b)] += w * d[a] * d[b];
            }
        }
    }
    Ok((sw, sb))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaProjection {
    pub means: Vec<f64>,
    /// p×l; columns solve `S_b w = λ S_w w`.
    pub projection: Matrix,
    /// Leading `l` generalized eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    pub labels: Vec<String>,
}

/// Solves the generalized problem via `S_w = LLᵀ`: eigenvectors `v` of
/// `L⁻¹ S_b L⁻ᵀ` map back to `w = L⁻ᵀ v`.
pub fn lda_fit(x: &Matrix, labels: &Labels, l: usize) -> Result<LdaProjection> {
    labels.require_all_present()?;
    let q = labels.n_classes();
    if q < 2 {
        return Err(Error::DegenerateLabels("LDA projection needs at least 2 classes".into()));
    }
    if l == 0 || l > q - 1 {
        return Err(Error::hyper(format!("n_components must be in 1..={}, got {l}", q - 1)));
    }
    let (sw, sb) = scatter_matrices(x, labels)?;
    let p = x.cols();
    if l > p {
        return Err(Error::hyper(format!("n_components must not exceed {p} features")));
    }
    let chol = Cholesky::factor_with_jitter(&sw, LDA_JITTER)?;
    // L⁻¹ S_b, then L⁻¹ (L⁻¹ S_b)ᵀ using the symmetry of S_b.
    let left = chol.forward_matrix(&sb);
    let mut a = chol.forward_matrix(&left.transpose());
    for i in 0..p {
        for j in 0..i {
            let avg = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = avg;
            a[(j, i)] = avg;
        }
    }
    let eig = sym_eig(&a)?;
    let mut w = Matrix::zeros(p, l);
    for k in 0..l {
        let mut v = eig.eigenvectors.column(k);
        chol.backward(&mut v);
        for (r, val) in v.into_iter().enumerate() {
            w[(r, k)] = val;
        }
    }
    fix_signs(&mut w);
    Ok(LdaProjection {
        means: column_means(x),
        projection: w,
        eigenvalues: eig.eigenvalues[..l].to_vec(),
        labels: labels.names().to_vec(),
    })
}

impl LdaProjection {
    pub fn n_components(&self) -> usize {
        self.projection.cols()
    }

    /// `(X − μ)·W`, with μ the training mean.
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        check_dim(self.means.len(), x.cols())?;
        let mut xc = x.clone();
        for i in 0..xc.rows() {
            for (v, m) in xc.row_mut(i).iter_mut().zip(&self.means) {
                *v -= m;
            }
        }
        xc.matmul(&self.projection)
    }
}

pub fn lda_fit_transform(x: &Matrix, labels: &Labels, l: usize) -> Result<(LdaProjection, Matrix)> {
    let model = lda_fit(x, labels, l)?;
    let t = model.transform(x)?;
    Ok((model, t))
}
