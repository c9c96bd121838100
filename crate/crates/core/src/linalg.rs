//! Dense kernels: Cholesky-based SPD solves, cyclic Jacobi eigendecomposition,
//! column centering and covariance.

use serde::{Deserialize, Serialize};

use crate::data::Matrix;
use crate::error::{check_dim, Error, Result};

const SYMMETRY_TOL: f64 = 1e-10;
const SOLVE_JITTER: f64 = 1e-10;
const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Fails unless `a` is square and symmetric to `1e-10` relative to its largest entry.
pub fn check_symmetric(a: &Matrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::Dimension {
            expected: a.rows(),
            found: a.cols(),
        });
    }
    let n = a.rows();
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..i {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    if worst > SYMMETRY_TOL * scale {
        Err(Error::NotSymmetric(worst))
    } else {
        Ok(())
    }
}

/// Lower-triangular Cholesky factor `L` with `A = L·Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Plain factorization; `None` when a pivot is not strictly positive.
    pub fn factor(a: &Matrix) -> Option<Cholesky> {
        let n = a.rows();
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut diag = a[(j, j)];
            for k in 0..j {
                diag -= l[(j, k)] * l[(j, k)];
            }
            if !(diag > 0.0) || !diag.is_finite() {
                return None;
            }
            let d = diag.sqrt();
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Some(Cholesky { l })
    }

    /// Factorization with one retry after adding `rel_jitter · trace/p` to the diagonal.
    pub fn factor_with_jitter(a: &Matrix, rel_jitter: f64) -> Result<Cholesky> {
        if let Some(c) = Cholesky::factor(a) {
            return Ok(c);
        }
        let p = a.rows().max(1) as f64;
        let jitter = rel_jitter * a.trace().abs() / p;
        if jitter > 0.0 {
            let mut bumped = a.clone();
            bumped.add_diagonal(jitter);
            if let Some(c) = Cholesky::factor(&bumped) {
                return Ok(c);
            }
        }
        Err(Error::SingularMatrix)
    }

    pub fn lower(&self) -> &Matrix {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    /// Solves `L·y = b` in place.
    pub fn forward(&self, b: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[(i, k)] * b[k];
            }
            b[i] = s / self.l[(i, i)];
        }
    }

    /// Solves `Lᵀ·x = y` in place.
    pub fn backward(&self, y: &mut [f64]) {
        let n = self.dim();
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l[(k, i)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
    }

    /// `L⁻¹·B`, column by column.
    pub fn forward_matrix(&self, b: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let mut c = b.column(j);
            self.forward(&mut c);
            for (i, v) in c.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }

    pub fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.forward(&mut x);
        self.backward(&mut x);
        x
    }

    pub fn solve(&self, b: &Matrix) -> Result<Matrix> {
        check_dim(self.dim(), b.rows())?;
        let mut out = Matrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let x = self.solve_vec(&b.column(j));
            for (i, v) in x.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Matrix {
        let n = self.dim();
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.solve_vec(&e);
            for (i, v) in col.into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        // Exact symmetry for downstream quadratic forms.
        for i in 0..n {
            for j in 0..i {
                let m = 0.5 * (inv[(i, j)] + inv[(j, i)]);
                inv[(i, j)] = m;
                inv[(j, i)] = m;
            }
        }
        inv
    }

    /// `log |A|`.
    pub fn log_det(&self) -> f64 {
        (0..self.dim()).map(|i| 2.0 * self.l[(i, i)].ln()).sum()
    }

    /// `‖L⁻¹ v‖²`, i.e. `vᵀ A⁻¹ v`.
    pub fn mahalanobis_sq(&self, v: &[f64]) -> f64 {
        let mut y = v.to_vec();
        self.forward(&mut y);
        y.iter().map(|t| t * t).sum()
    }
}

/// Solves `A·X = B` for symmetric positive-definite `A` by Cholesky.
///
/// If the first factorization fails, the diagonal is bumped once by
/// `1e-10 · trace(A)/p` before giving up with [`Error::SingularMatrix`].
pub fn solve_spd(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    check_symmetric(a)?;
    check_dim(a.rows(), b.rows())?;
    Cholesky::factor_with_jitter(a, SOLVE_JITTER)?.solve(b)
}

pub fn solve_spd_vec(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    check_symmetric(a)?;
    check_dim(a.rows(), b.len())?;
    Ok(Cholesky::factor_with_jitter(a, SOLVE_JITTER)?.solve_vec(b))
}

/// Eigenpairs of a symmetric matrix, eigenvalues descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub eigenvalues: Vec<f64>,
    /// Column `i` pairs with `eigenvalues[i]`; unit norm, largest-magnitude entry positive.
    pub eigenvectors: Matrix,
}

/// Cyclic Jacobi eigendecomposition.
///
/// Sweeps rotate away every off-diagonal entry until the largest remaining one
/// is at most `1e-12·‖A‖_max`, or 100 sweeps have run.
pub fn sym_eig(a: &Matrix) -> Result<EigenResult> {
    check_symmetric(a)?;
    let n = a.rows();
    let mut m = a.clone();
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
    let mut v = Matrix::identity(n);
    let threshold = JACOBI_TOL * a.max_abs();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                off = off.max(m[(i, j)].abs());
            }
        }
        if off <= threshold {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut m, &mut v, p, q, c, s);
            }
        }
    }

    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // Stable: equal eigenvalues keep their diagonal order.
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));

    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, dst)] = v[(r, src)];
        }
    }
    let mut vectors = vectors;
    fix_signs(&mut vectors);
    Ok(EigenResult {
        eigenvalues: order.iter().map(|&i| diag[i]).collect(),
        eigenvectors: vectors,
    })
}

fn rotate(m: &mut Matrix, v: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = m.rows();
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = c * mkp - s * mkq;
        m[(k, q)] = s * mkp + c * mkq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = c * mpk - s * mqk;
        m[(q, k)] = s * mpk + c * mqk;
    }
    m[(p, q)] = 0.0;
    m[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Flips each column so its largest-magnitude entry (first one on ties) is positive.
pub fn fix_signs(vectors: &mut Matrix) {
    for j in 0..vectors.cols() {
        let mut best = 0;
        for i in 1..vectors.rows() {
            if vectors[(i, j)].abs() > vectors[(best, j)].abs() {
                best = i;
            }
        }
        if vectors.rows() > 0 && vectors[(best, j)] < 0.0 {
            for i in 0..vectors.rows() {
                vectors[(i, j)] = -vectors[(i, j)];
            }
        }
    }
}

pub fn column_means(x: &Matrix) -> Vec<f64> {
    let mut means = vec![0.0; x.cols()];
    for r in x.iter_rows() {
        for (m, v) in means.iter_mut().zip(r) {
            *m += v;
        }
    }
    let n = x.rows().max(1) as f64;
    means.iter_mut().for_each(|m| *m /= n);
    means
}

/// Subtracts column means; returns the centered matrix and the means.
pub fn center_columns(x: &Matrix) -> (Matrix, Vec<f64>) {
    let means = column_means(x);
    let mut c = x.clone();
    for i in 0..c.rows() {
        for (v, m) in c.row_mut(i).iter_mut().zip(&means) {
            *v -= m;
        }
    }
    (c, means)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Divisor {
    /// Maximum-likelihood estimate.
    N,
    /// Unbiased estimate.
    NMinusOne,
}

/// Sample covariance `Xcᵀ·Xc / divisor`.
pub fn covariance(x: &Matrix, divisor: Divisor) -> Result<Matrix> {
    let n = x.rows();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let d = match divisor {
        Divisor::N => n as f64,
        Divisor::NMinusOne if n < 2 => {
            return Err(Error::DegenerateInput(
                "unbiased covariance needs at least 2 samples".into(),
            ))
        }
        Divisor::NMinusOne => (n - 1) as f64,
    };
    let (c, _) = center_columns(x);
    let mut cov = c.gram();
    cov.scale(1.0 / d);
    Ok(cov)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn random_matrix(rng: &mut SeededRng, r: usize, c: usize) -> Matrix {
        let data = (0..r * c).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
        Matrix::new(r, c, data).unwrap()
    }

    fn random_symmetric(rng: &mut SeededRng, n: usize) -> Matrix {
        let mut a = random_matrix(rng, n, n);
        for i in 0..n {
            for j in 0..i {
                a[(i, j)] = a[(j, i)];
            }
        }
        a
    }

    #[test]
    fn solve_identity_and_diagonal() {
        let b = Matrix::column_vector(&[1.0, -2.0]).unwrap();
        assert_eq!(solve_spd(&Matrix::identity(2), &b).unwrap(), b);
        let a = Matrix::from_diagonal(&[2.0, 2.0]);
        let b = Matrix::column_vector(&[4.0, 6.0]).unwrap();
        let x = solve_spd(&a, &b).unwrap();
        assert!((x[(0, 0)] - 2.0).abs() < 1e-15 && (x[(1, 0)] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn solve_random_spd_residual() {
        let mut rng = SeededRng::new(1);
        for n in [1, 3, 8, 20] {
            let m = random_matrix(&mut rng, n, n);
            let mut a = m.gram();
            a.add_diagonal(1.0);
            let b = random_matrix(&mut rng, n, 2);
            let x = solve_spd(&a, &b).unwrap();
            let r = a.matmul(&x).unwrap().sub(&b).unwrap();
            let bound = 1e-8 * (a.max_abs() * x.max_abs() + b.max_abs());
            assert!(r.max_abs() <= bound, "n={n}: {}", r.max_abs());
        }
    }

    #[test]
    fn solve_recovers_known_solution() {
        let mut rng = SeededRng::new(2);
        let m = random_matrix(&mut rng, 10, 10);
        let mut a = m.gram();
        a.add_diagonal(0.5);
        let x: Vec<f64> = (0..10).map(|i| i as f64 - 4.5).collect();
        let b = a.mat_vec(&x).unwrap();
        let got = solve_spd_vec(&a, &b).unwrap();
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() <= 1e-8 * e.abs().max(1.0));
        }
    }

    #[test]
    fn jitter_rescues_semidefinite() {
        // Rank-one PSD matrix: plain Cholesky hits a zero pivot.
        let a = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert!(Cholesky::factor(&a).is_none());
        assert!(solve_spd(&a, &Matrix::column_vector(&[1.0, 1.0]).unwrap()).is_ok());
    }

    #[test]
    fn indefinite_is_singular() {
        let a = Matrix::from_rows(&[[1.0, 0.0], [0.0, -1.0]]).unwrap();
        let b = Matrix::column_vector(&[1.0, 1.0]).unwrap();
        assert_eq!(solve_spd(&a, &b), Err(Error::SingularMatrix));
    }

    #[test]
    fn asymmetric_rejected() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eig(&a), Err(Error::NotSymmetric(_))));
        assert!(matches!(
            solve_spd(&a, &Matrix::column_vector(&[1.0, 1.0]).unwrap()),
            Err(Error::NotSymmetric(_))
        ));
    }

    #[test]
    fn eig_small_cases() {
        let e = sym_eig(&Matrix::identity(2)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0]);

        let e = sym_eig(&Matrix::from_diagonal(&[3.0, 1.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![3.0, 1.0]);
        assert_eq!(e.eigenvectors, Matrix::identity(2));

        let e = sym_eig(&Matrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap()).unwrap();
        assert!((e.eigenvalues[0] - 3.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = &e.eigenvectors;
        assert!((v[(0, 0)] - h).abs() < 1e-14 && (v[(1, 0)] - h).abs() < 1e-14);
        // Second vector ±(1,−1)/√2; the sign rule picks the first entry on a magnitude tie.
        assert!((v[(0, 1)] - h).abs() < 1e-14 && (v[(1, 1)] + h).abs() < 1e-14);
    }

    #[test]
    fn eig_reconstruction_and_orthogonality() {
        let mut rng = SeededRng::new(5);
        for n in [1, 2, 5, 17, 50] {
            let a = random_symmetric(&mut rng, n);
            let e = sym_eig(&a).unwrap();
            let v = &e.eigenvectors;
            let scale = a.max_abs();
            for w in e.eigenvalues.windows(2) {
                assert!(w[0] >= w[1]);
            }
            // A v_i = λ_i v_i
            let av = a.matmul(v).unwrap();
            for i in 0..n {
                for r in 0..n {
                    assert!((av[(r, i)] - e.eigenvalues[i] * v[(r, i)]).abs() <= 1e-8 * scale);
                }
            }
            let vtv = v.transpose().matmul(v).unwrap();
            let id = Matrix::identity(n);
            assert!(vtv.sub(&id).unwrap().max_abs() <= 1e-8);
            // V diag(λ) Vᵀ = A
            let mut vl = v.clone();
            for r in 0..n {
                for c in 0..n {
                    vl[(r, c)] *= e.eigenvalues[c];
                }
            }
            let rec = vl.matmul(&v.transpose()).unwrap();
            assert!(rec.sub(&a).unwrap().max_abs() <= 1e-7 * scale);
            // sign convention
            for c in 0..n {
                let col = v.column(c);
                let mut best = 0;
                for i in 1..n {
                    if col[i].abs() > col[best].abs() {
                        best = i;
                    }
                }
                assert!(col[best] > 0.0);
            }
        }
    }

    #[test]
    fn centering() {
        let x = Matrix::from_rows(&[[1.0], [3.0]]).unwrap();
        let (c, m) = center_columns(&x);
        assert_eq!(c.as_slice(), &[-1.0, 1.0]);
        assert_eq!(m, vec![2.0]);
        let (c2, _) = center_columns(&c);
        assert!(c2.sub(&c).unwrap().max_abs() <= 1e-15);

        let mut rng = SeededRng::new(8);
        let x = random_matrix(&mut rng, 37, 4);
        let (c, means) = center_columns(&x);
        for m in column_means(&c) {
            assert!(m.abs() <= 1e-12);
        }
        for i in 0..x.rows() {
            for j in 0..x.cols() {
                assert!((c[(i, j)] + means[j] - x[(i, j)]).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn covariance_cases() {
        let x = Matrix::from_rows(&[[0.0], [2.0]]).unwrap();
        assert_eq!(covariance(&x, Divisor::N).unwrap().as_slice(), &[1.0]);
        let x = Matrix::from_rows(&[[1.0, 5.0], [2.0, 5.0], [4.0, 5.0]]).unwrap();
        let c = covariance(&x, Divisor::N).unwrap();
        assert_eq!(c[(1, 1)], 0.0);
        assert_eq!(c[(0, 1)], 0.0);
        assert!(matches!(
            covariance(&Matrix::from_rows(&[[1.0]]).unwrap(), Divisor::NMinusOne),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn covariance_matches_double_loop() {
        let mut rng = SeededRng::new(13);
        let x = random_matrix(&mut rng, 25, 3);
        let n = x.rows() as f64;
        for (div, d) in [(Divisor::N, n), (Divisor::NMinusOne, n - 1.0)] {
            let c = covariance(&x, div).unwrap();
            for a in 0..3 {
                for b in 0..3 {
                    let ma: f64 = x.column(a).iter().sum::<f64>() / n;
                    let mb: f64 = x.column(b).iter().sum::<f64>() / n;
                    let mut s = 0.0;
                    for i in 0..x.rows() {
                        s += (x[(i, a)] - ma) * (x[(i, b)] - mb);
                    }
                    assert!((c[(a, b)] - s / d).abs() <= 1e-12);
                    assert_eq!(c[(a, b)], c[(b, a)]);
                }
            }
            let e = sym_eig(&c).unwrap();
            assert!(e.eigenvalues.iter().all(|&l| l >= -1e-10));
        }
    }
}
