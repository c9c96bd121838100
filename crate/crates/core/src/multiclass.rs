//! Multinomial logistic regression and binary-to-multiclass strategies.
//!
//! One-vs-one model `(j, k)` treats class `j` as −1 and class `k` as +1.

use serde::{Deserialize, Serialize};

use crate::data::{argmax, dot, Labels, Matrix};
use crate::error::{check_dim, Error, Result};
use crate::linear_models::{fit_logistic, proximal_gradient, LogisticConfig, LogisticModel, SmoothObjective, GD_MAX_ITER, GD_TOL};
use crate::parallel::map_indexed;
use crate::rng::SeededRng;
use crate::svm::{fit_svc, SvmConfig, SvmModel};

pub const CODEBOOK_RETRIES: usize = 1000;

/// Max-shifted softmax.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = scores.iter().map(|s| (s - m).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|v| v / z).collect()
}

fn log_sum_exp(scores: &[f64]) -> f64 {
    let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + scores.iter().map(|s| (s - m).exp()).sum::<f64>().ln()
}

/// Cross-entropy of a softmax model plus `λ Σₖ ‖wₖ‖²`.
///
/// Parameters are laid out class by class, each block `[w₀ₖ, wₖ…]`.
pub struct MultinomialObjective<'a> {
    x: &'a Matrix,
    y: &'a [usize],
    q: usize,
    lambda: f64,
}

impl<'a> MultinomialObjective<'a> {
    pub fn new(x: &'a Matrix, y: &'a [usize], q: usize, lambda: f64) -> Result<Self> {
        check_dim(x.rows(), y.len())?;
        Ok(MultinomialObjective { x, y, q, lambda })
    }

    fn block(&self) -> usize {
        self.x.cols() + 1
    }

    fn scores(&self, theta: &[f64], row: &[f64]) -> Vec<f64> {
        let b = self.block();
        (0..self.q).map(|k| theta[k * b] + dot(&theta[k * b + 1..(k + 1) * b], row)).collect()
    }

    fn penalty(&self, theta: &[f64]) -> f64 {
        let b = self.block();
        (0..self.q).map(|k| {
            let w = &theta[k * b + 1..(k + 1) * b];
            dot(w, w)
        }).sum::<f64>() * self.lambda
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        SmoothObjective::value(self, theta)
    }

    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        SmoothObjective::gradient(self, theta)
    }
}

impl SmoothObjective for MultinomialObjective<'_> {
    fn value(&self, theta: &[f64]) -> f64 {
        let loss: f64 = self
            .x
            .iter_rows()
            .zip(self.y)
            .map(|(r, &yi)| {
                let s = self.scores(theta, r);
                log_sum_exp(&s) - s[yi]
            })
            .sum();
        loss + self.penalty(theta)
    }

    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let b = self.block();
        let mut g = vec![0.0; theta.len()];
        for (r, &yi) in self.x.iter_rows().zip(self.y) {
            let p = softmax(&self.scores(theta, r));
            for k in 0..self.q {
                let c = p[k] - if k == yi { 1.0 } else { 0.0 };
                g[k * b] += c;
                for (gj, xj) in g[k * b + 1..(k + 1) * b].iter_mut().zip(r) {
                    *gj += c * xj;
                }
            }
        }
        for k in 0..self.q {
            for j in k * b + 1..(k + 1) * b {
                g[j] += 2.0 * self.lambda * theta[j];
            }
        }
        g
    }

    fn delta(&self, theta: &[f64], d: &[f64]) -> f64 {
        let b = self.block();
        let mut total = 0.0;
        for (r, &yi) in self.x.iter_rows().zip(self.y) {
            let s = self.scores(theta, r);
            let ds = self.scores(d, r);
            let big = ds.iter().any(|v| v.abs() >= 1.0);
            total += if big {
                let new: Vec<f64> = s.iter().zip(&ds).map(|(a, b)| a + b).collect();
                log_sum_exp(&new) - log_sum_exp(&s) - ds[yi]
            } else {
                let p = softmax(&s);
                p.iter().zip(&ds).map(|(pk, dk)| pk * dk.exp_m1()).sum::<f64>().ln_1p() - ds[yi]
            };
        }
        let pen: f64 = (0..self.q)
            .flat_map(|k| k * b + 1..(k + 1) * b)
            .map(|j| 2.0 * theta[j] * d[j] + d[j] * d[j])
            .sum();
        total + self.lambda * pen
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultinomialModel {
    /// q×(p+1); column 0 holds the intercepts.
    pub weights: Matrix,
    pub lambda: f64,
    pub labels: Vec<String>,
    pub iterations: usize,
    pub objective_trace: Vec<f64>,
}

pub fn fit_multinomial(x: &Matrix, labels: &Labels, lambda: f64) -> Result<MultinomialModel> {
    x.require_nonempty()?;
    check_dim(x.rows(), labels.len())?;
    let q = labels.n_classes();
    if q < 2 {
        return Err(Error::DegenerateLabels("multinomial model needs at least 2 classes".into()));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::hyper("lambda must be non-negative and finite"));
    }
    let obj = MultinomialObjective::new(x, labels.values(), q, lambda)?;
    let dim = q * (x.cols() + 1);
    let l1 = vec![0.0; dim];
    let frozen = vec![false; dim];
    let out = proximal_gradient(&obj, vec![0.0; dim], &l1, &frozen, GD_TOL, GD_MAX_ITER, "multinomial gradient descent")?;
    Ok(MultinomialModel {
        weights: Matrix::new(q, x.cols() + 1, out.theta)?,
        lambda,
        labels: labels.names().to_vec(),
        iterations: out.iterations,
        objective_trace: out.objective_trace,
    })
}

impl MultinomialModel {
    pub fn decision(&self, x: &Matrix) -> Result<Vec<Vec<f64>>> {
        check_dim(self.weights.cols() - 1, x.cols())?;
        Ok(x
            .iter_rows()
            .map(|r| self.weights.iter_rows().map(|w| w[0] + dot(&w[1..], r)).collect())
            .collect())
    }

    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<Vec<f64>>> {
        Ok(self.decision(x)?.iter().map(|s| softmax(s)).collect())
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        Ok(self.decision(x)?.iter().map(|s| argmax(s)).collect())
    }
}

/// Binary learner used inside a multiclass strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "learner", rename_all = "snake_case")]
pub enum BinaryLearner {
    Logistic(LogisticConfig),
    Svc(SvmConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinaryModel {
    Logistic(LogisticModel),
    Svc(SvmModel),
}

impl BinaryLearner {
    /// Fits on ±1 targets.
    pub fn fit(&self, x: &Matrix, signs: &[f64]) -> Result<BinaryModel> {
        let labels = Labels::from_signs(signs)?;
        match self {
            BinaryLearner::Logistic(c) => Ok(BinaryModel::Logistic(fit_logistic(x, &labels, *c)?)),
            BinaryLearner::Svc(c) => Ok(BinaryModel::Svc(fit_svc(x, &labels, *c)?)),
        }
    }
}

impl BinaryModel {
    /// Signed confidence; positive means the +1 side.
    pub fn decision(&self, x: &Matrix) -> Result<Vec<f64>> {
        match self {
            BinaryModel::Logistic(m) => m.decision(x),
            BinaryModel::Svc(m) => m.decision(x),
        }
    }
}

fn fit_tasks(x: &Matrix, learner: &BinaryLearner, tasks: Vec<(String, Vec<usize>, Vec<f64>)>) -> Result<Vec<BinaryModel>> {
    map_indexed(tasks.len(), |t| {
        let (name, rows, signs) = &tasks[t];
        let sub = if rows.len() == x.rows() { x.clone() } else { x.select_rows(rows) };
        learner.fit(&sub, signs).map_err(|e| e.in_task(name.clone()))
    })
    .into_iter()
    .collect()
}

fn check_multiclass(x: &Matrix, labels: &Labels) -> Result<()> {
    x.require_nonempty()?;
    check_dim(x.rows(), labels.len())?;
    if labels.n_classes() < 2 {
        return Err(Error::DegenerateLabels("need at least 2 classes".into()));
    }
    labels.require_all_present()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvrModel {
    pub models: Vec<BinaryModel>,
    pub labels: Vec<String>,
}

pub fn ovr_fit(x: &Matrix, labels: &Labels, learner: &BinaryLearner) -> Result<OvrModel> {
    check_multiclass(x, labels)?;
    let all: Vec<usize> = (0..x.rows()).collect();
    let tasks = (0..labels.n_classes())
        .map(|k| {
            let signs = labels.values().iter().map(|&v| if v == k { 1.0 } else { -1.0 }).collect();
            (format!("class '{}' vs rest", labels.name(k)), all.clone(), signs)
        })
        .collect();
    Ok(OvrModel {
        models: fit_tasks(x, learner, tasks)?,
        labels: labels.names().to_vec(),
    })
}

impl OvrModel {
    /// n rows of per-class confidences.
    pub fn decision(&self, x: &Matrix) -> Result<Vec<Vec<f64>>> {
        let per_model = self.models.iter().map(|m| m.decision(x)).collect::<Result<Vec<_>>>()?;
        Ok((0..x.rows()).map(|i| per_model.iter().map(|s| s[i]).collect()).collect())
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        Ok(self.decision(x)?.iter().map(|s| argmax(s)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvoModel {
    pub pairs: Vec<(usize, usize)>,
    pub models: Vec<BinaryModel>,
    pub labels: Vec<String>,
}

pub fn ovo_fit(x: &Matrix, labels: &Labels, learner: &BinaryLearner) -> Result<OvoModel> {
    check_multiclass(x, labels)?;
    let q = labels.n_classes();
    let mut pairs = Vec::new();
    let mut tasks = Vec::new();
    for j in 0..q {
        for k in j + 1..q {
            let rows: Vec<usize> = (0..x.rows()).filter(|&i| {
                let v = labels.values()[i];
                v == j || v == k
            }).collect();
            let signs = rows.iter().map(|&i| if labels.values()[i] == k { 1.0 } else { -1.0 }).collect();
            pairs.push((j, k));
            tasks.push((format!("class '{}' vs '{}'", labels.name(j), labels.name(k)), rows, signs));
        }
    }
    Ok(OvoModel {
        pairs,
        models: fit_tasks(x, learner, tasks)?,
        labels: labels.names().to_vec(),
    })
}

/// Majority vote; ties go to the larger summed confidence, then the lowest index.
pub fn ovo_vote(votes: &[usize], confidences: &[f64]) -> usize {
    let top = *votes.iter().max().unwrap();
    let mut best: Option<usize> = None;
    for (k, &v) in votes.iter().enumerate() {
        if v == top && best.map_or(true, |b| confidences[k] > confidences[b]) {
            best = Some(k);
        }
    }
    best.unwrap()
}

impl OvoModel {
    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        let q = self.labels.len();
        let scores = self.models.iter().map(|m| m.decision(x)).collect::<Result<Vec<_>>>()?;
        Ok((0..x.rows())
            .map(|i| {
                let mut votes = vec![0usize; q];
                let mut conf = vec![0.0; q];
                for (&(j, k), s) in self.pairs.iter().zip(&scores) {
                    let f = s[i];
                    if f > 0.0 {
                        votes[k] += 1;
                    } else {
                        votes[j] += 1;
                    }
                    conf[k] += f;
                    conf[j] -= f;
                }
                ovo_vote(&votes, &conf)
            })
            .collect())
    }
}

/// q×m matrix of ±1 codewords, one row per class and one column per binary task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeBook {
    pub rows: Vec<Vec<i8>>,
}

impl CodeBook {
    pub fn new(rows: Vec<Vec<i8>>) -> Result<Self> {
        let cb = CodeBook { rows };
        cb.validate()?;
        Ok(cb)
    }

    pub fn n_classes(&self) -> usize {
        self.rows.len()
    }

    pub fn n_tasks(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    fn validate(&self) -> Result<()> {
        let m = self.n_tasks();
        if m == 0 || self.rows.iter().any(|r| r.len() != m || r.iter().any(|&v| v != 1 && v != -1)) {
            return Err(Error::hyper("code book must be a rectangular ±1 matrix"));
        }
        if !self.is_valid() {
            return Err(Error::hyper("code book needs distinct rows and non-constant columns"));
        }
        Ok(())
    }

    fn is_valid(&self) -> bool {
        let q = self.rows.len();
        for a in 0..q {
            for b in a + 1..q {
                if self.rows[a] == self.rows[b] {
                    return false;
                }
            }
        }
        (0..self.n_tasks()).all(|t| self.rows.iter().any(|r| r[t] != self.rows[0][t]))
    }

    /// Uniform random ±1 code book, resampled until valid.
    pub fn random(q: usize, m: usize, seed: u64) -> Result<Self> {
        let min_m = (q as f64).log2().ceil() as usize;
        if q < 2 || m < min_m.max(1) {
            return Err(Error::hyper(format!("need at least {} tasks for {q} classes", min_m.max(1))));
        }
        let mut rng = SeededRng::new(seed);
        for _ in 0..CODEBOOK_RETRIES {
            let rows: Vec<Vec<i8>> = (0..q)
                .map(|_| (0..m).map(|_| if rng.below(2) == 1 { 1 } else { -1 }).collect())
                .collect();
            let cb = CodeBook { rows };
            if cb.is_valid() {
                return Ok(cb);
            }
        }
        Err(Error::hyper(format!("no valid {q}×{m} code book after {CODEBOOK_RETRIES} draws")))
    }

    /// Row nearest to `scores` in Euclidean distance, lowest index on ties.
    pub fn decode(&self, scores: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, row) in self.rows.iter().enumerate() {
            let d: f64 = row.iter().zip(scores).map(|(&c, s)| (c as f64 - s).powi(2)).sum();
            if d < best_d {
                best_d = d;
                best = k;
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcocModel {
    pub codebook: CodeBook,
    pub models: Vec<BinaryModel>,
    pub labels: Vec<String>,
}

pub fn ecoc_fit(x: &Matrix, labels: &Labels, learner: &BinaryLearner, m: usize, seed: u64) -> Result<EcocModel> {
    check_multiclass(x, labels)?;
    let codebook = CodeBook::random(labels.n_classes(), m, seed)?;
    ecoc_fit_with_codebook(x, labels, learner, codebook)
}

pub fn ecoc_fit_with_codebook(x: &Matrix, labels: &Labels, learner: &BinaryLearner, codebook: CodeBook) -> Result<EcocModel> {
    check_multiclass(x, labels)?;
    check_dim(labels.n_classes(), codebook.n_classes())?;
    let all: Vec<usize> = (0..x.rows()).collect();
    let tasks = (0..codebook.n_tasks())
        .map(|t| {
            let signs = labels.values().iter().map(|&v| codebook.rows[v][t] as f64).collect();
            (format!("code column {t}"), all.clone(), signs)
        })
        .collect();
    Ok(EcocModel {
        models: fit_tasks(x, learner, tasks)?,
        codebook,
        labels: labels.names().to_vec(),
    })
}

impl EcocModel {
    pub fn decision(&self, x: &Matrix) -> Result<Vec<Vec<f64>>> {
        let per_model = self.models.iter().map(|m| m.decision(x)).collect::<Result<Vec<_>>>()?;
        Ok((0..x.rows()).map(|i| per_model.iter().map(|s| s[i]).collect()).collect())
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        Ok(self.decision(x)?.iter().map(|s| self.codebook.decode(s)).collect())
    }
}
