//! Sample containers: the dense [`Matrix`] and class [`Labels`].

use std::collections::HashMap;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Dense row-major matrix of finite `f64` values.
///
/// Rows are samples, columns are features. Construction through [`Matrix::new`]
/// or [`Matrix::from_rows`] rejects NaN and infinities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_dim(rows * cols, data.len())?;
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            check_dim(cols, r.as_ref().len())?;
            data.extend_from_slice(r.as_ref());
        }
        Matrix::new(rows.len(), cols, data)
    }

    /// Single-column matrix.
    pub fn column_vector(values: &[f64]) -> Result<Self> {
        Matrix::new(values.len(), 1, values.to_vec())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Matrix::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from values already known to be finite.
    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(rows * cols, data.len());
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        check_dim(self.cols, other.rows)?;
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ · self`, exploiting symmetry.
    pub fn gram(&self) -> Matrix {
        let p = self.cols;
        let mut out = Matrix::zeros(p, p);
        for r in self.iter_rows() {
            for a in 0..p {
                let ra = r[a];
                if ra == 0.0 {
                    continue;
                }
                for b in a..p {
                    out.data[a * p + b] += ra * r[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                out.data[a * p + b] = out.data[b * p + a];
            }
        }
        out
    }

    pub fn mat_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.cols, v.len())?;
        Ok(self.iter_rows().map(|r| dot(r, v)).collect())
    }

    /// `selfᵀ · v`.
    pub fn transpose_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.rows, v.len())?;
        let mut out = vec![0.0; self.cols];
        for (r, &vi) in self.iter_rows().zip(v) {
            for (o, &x) in out.iter_mut().zip(r) {
                *o += x * vi;
            }
        }
        Ok(out)
    }

    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix::from_raw(indices.len(), self.cols, data)
    }

    pub fn select_cols(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.rows);
        for r in self.iter_rows() {
            data.extend(indices.iter().map(|&j| r[j]));
        }
        Matrix::from_raw(self.rows, indices.len(), data)
    }

    /// Largest absolute entry (0 for an empty matrix).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn add_diagonal(&mut self, value: f64) {
        for i in 0..self.rows.min(self.cols) {
            self[(i, i)] += value;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|v| *v *= factor);
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        check_dim(self.rows, other.rows)?;
        check_dim(self.cols, other.cols)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Matrix::from_raw(self.rows, self.cols, data))
    }

    /// Appends a leading column of ones.
    pub(crate) fn with_intercept_column(&self) -> Matrix {
        let mut data = Vec::with_capacity(self.rows * (self.cols + 1));
        for r in self.iter_rows() {
            data.push(1.0);
            data.extend_from_slice(r);
        }
        Matrix::from_raw(self.rows, self.cols + 1, data)
    }

    pub(crate) fn require_nonempty(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            Err(Error::EmptyDataset)
        } else {
            Ok(())
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Class labels encoded as indices `0..q`, with the original names kept for decoding.
///
/// For binary problems index 0 is the negative class (−1) and index 1 the
/// positive class (+1).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labels {
    values: Vec<usize>,
    names: Vec<String>,
}

impl Labels {
    /// Encodes raw strings, assigning indices in order of first appearance.
    pub fn encode<S: AsRef<str>>(raw: &[S]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut lookup: HashMap<&str, usize> = HashMap::new();
        let mut names = Vec::new();
        let mut values = Vec::with_capacity(raw.len());
        for s in raw {
            let s = s.as_ref();
            let next = names.len();
            let idx = *lookup.entry(s).or_insert_with(|| {
                names.push(s.to_string());
                next
            });
            values.push(idx);
        }
        Ok(Labels { values, names })
    }

    /// Labels from precomputed indices; names default to the decimal index.
    pub fn from_indices(values: Vec<usize>, n_classes: usize) -> Result<Self> {
        let names = (0..n_classes).map(|k| k.to_string()).collect();
        Labels::with_names(values, names)
    }

    pub fn with_names(values: Vec<usize>, names: Vec<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if let Some(&bad) = values.iter().find(|&&v| v >= names.len()) {
            return Err(Error::DegenerateLabels(format!(
                "class index {bad} outside 0..{}",
                names.len()
            )));
        }
        Ok(Labels { values, names })
    }

    /// Binary labels from ±1 (or any sign) values: positive → index 1.
    pub fn from_signs(signs: &[f64]) -> Result<Self> {
        let values = signs.iter().map(|&s| usize::from(s > 0.0)).collect();
        Labels::with_names(values, vec!["-1".into(), "+1".into()])
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, k: usize) -> &str {
        &self.names[k]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.names.len()
    }

    pub fn decode(&self) -> Vec<String> {
        self.values.iter().map(|&v| self.names[v].clone()).collect()
    }

    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.names.len()];
        for &v in &self.values {
            c[v] += 1;
        }
        c
    }

    /// Labels as ±1 reals (binary convention: index 1 ↦ +1, everything else ↦ −1).
    pub fn signs(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|&v| if v == 1 { 1.0 } else { -1.0 })
            .collect()
    }

    pub fn subset(&self, indices: &[usize]) -> Labels {
        Labels {
            values: indices.iter().map(|&i| self.values[i]).collect(),
            names: self.names.clone(),
        }
    }

    /// Fails unless every class index occurs at least once.
    pub fn require_all_present(&self) -> Result<()> {
        match self.counts().iter().position(|&c| c == 0) {
            Some(k) => Err(Error::DegenerateLabels(format!(
                "class '{}' has no samples",
                self.names[k]
            ))),
            None => Ok(()),
        }
    }

    pub fn require_binary(&self) -> Result<()> {
        if self.n_classes() != 2 {
            return Err(Error::DegenerateLabels(format!(
                "binary classifier needs exactly 2 classes, got {}",
                self.n_classes()
            )));
        }
        self.require_all_present()
    }
}

/// Argmax with ties resolved toward the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_first_appearance_order() {
        let l = Labels::encode(&["b", "a", "b"]).unwrap();
        assert_eq!(l.values(), &[0, 1, 0]);
        assert_eq!(l.names(), &["b".to_string(), "a".to_string()]);
        assert_eq!(l.decode(), vec!["b", "a", "b"]);
    }

    #[test]
    fn encode_single_class() {
        let l = Labels::encode(&["x"]).unwrap();
        assert_eq!(l.values(), &[0]);
        assert_eq!(l.n_classes(), 1);
    }

    #[test]
    fn encode_empty_rejected() {
        let raw: [&str; 0] = [];
        assert_eq!(Labels::encode(&raw), Err(Error::EmptyDataset));
    }

    #[test]
    fn matrix_rejects_nan() {
        let err = Matrix::new(1, 2, vec![1.0, f64::NAN]).unwrap_err();
        assert_eq!(err, Error::NonFinite { row: 0, col: 1 });
    }

    #[test]
    fn matmul_and_gram_agree() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]).unwrap();
        let g = a.transpose().matmul(&a).unwrap();
        assert_eq!(g, a.gram());
        assert_eq!(g.as_slice(), &[35.0, 44.0, 44.0, 56.0]);
    }

    #[test]
    fn argmax_ties_lowest() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax(&[0.5, 0.5]), 0);
    }

    proptest::proptest! {
        #[test]
        fn encode_decode_bijection(raw in proptest::collection::vec("[a-d]{1,2}", 1..40)) {
            let l = Labels::encode(&raw).unwrap();
            proptest::prop_assert_eq!(l.decode(), raw.clone());
            let distinct: std::collections::BTreeSet<_> = raw.iter().collect();
            proptest::prop_assert_eq!(l.n_classes(), distinct.len());
            l.require_all_present().unwrap();
        }
    }
}
