//! k-means (Lloyd or Elkan, k-means++ seeding, restarts) and Gaussian mixtures fitted by EM.

use serde::{Deserialize, Serialize};

use crate::data::{argmax, Matrix};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{covariance, Cholesky, Divisor};
use crate::metric::squared_euclidean;
use crate::parallel::map_indexed;
use crate::rng::{rng_split, SeededRng};

/// Slack on Elkan's bound tests, so a pruned centroid is always strictly farther.
const ELKAN_SLACK: f64 = 1e-10;
pub const GMM_JITTER: f64 = 1e-6;
pub const GMM_MIN_WEIGHT: f64 = 1e-12;

/// D² seeding: first row uniform, then rows drawn proportionally to the squared
/// distance to the closest chosen centroid. When every remaining distance is zero
/// the next pick is uniform over rows not chosen yet.
pub fn kmeans_pp_init(x: &Matrix, k: usize, rng: &mut SeededRng) -> Result<Matrix> {
    x.require_nonempty()?;
    let n = x.rows();
    if k == 0 || k > n {
        return Err(Error::hyper(format!("k must be in 1..={n}, got {k}")));
    }
    let mut chosen = vec![rng.below(n)];
    let mut taken = vec![false; n];
    taken[chosen[0]] = true;
    let mut d2: Vec<f64> = x.iter_rows().map(|r| squared_euclidean(r, x.row(chosen[0]))).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.next_f64() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 {
                    acc += d;
                    pick = Some(i);
                    if acc > target {
                        break;
                    }
                }
            }
            pick.unwrap()
        } else {
            let free: Vec<usize> = (0..n).filter(|&i| !taken[i]).collect();
            free[rng.below(free.len())]
        };
        taken[next] = true;
        chosen.push(next);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(squared_euclidean(x.row(i), x.row(next)));
        }
    }
    Ok(x.select_rows(&chosen))
}

fn nearest(row: &[f64], centroids: &Matrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter_rows().enumerate() {
        let d = squared_euclidean(row, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Nearest-centroid assignments (ties to the lowest index) and their summed squared distances.
pub fn inertia(x: &Matrix, centroids: &Matrix) -> Result<(Vec<usize>, f64)> {
    check_dim(centroids.cols(), x.cols())?;
    if centroids.rows() == 0 {
        return Err(Error::hyper("no centroids"));
    }
    let mut total = 0.0;
    let assign = x
        .iter_rows()
        .map(|r| {
            let (j, d) = nearest(r, centroids);
            total += d;
            j
        })
        .collect();
    Ok((assign, total))
}

fn assigned_inertia(x: &Matrix, centroids: &Matrix, assign: &[usize]) -> f64 {
    x.iter_rows().zip(assign).map(|(r, &j)| squared_euclidean(r, centroids.row(j))).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KMeansAlgorithm {
    Lloyd,
    Elkan,
}

/// Recomputes centroids as cluster means, then fills each empty cluster with the
/// point farthest from its centroid inside the highest-inertia cluster.
/// Returns the rows that were moved.
fn update_centroids(x: &Matrix, k: usize, assign: &mut [usize]) -> (Matrix, Vec<usize>) {
    let p = x.cols();
    let mean_of = |assign: &[usize], j: usize| {
        let mut sum = vec![0.0; p];
        let mut count = 0usize;
        for (r, _) in x.iter_rows().zip(assign).filter(|(_, &a)| a == j) {
            for (s, v) in sum.iter_mut().zip(r) {
                *s += v;
            }
            count += 1;
        }
        (count > 0).then(|| sum.into_iter().map(|s| s / count as f64).collect::<Vec<f64>>())
    };
    let mut centroids = Matrix::zeros(k, p);
    let mut empty = Vec::new();
    for j in 0..k {
        match mean_of(assign, j) {
            Some(m) => centroids.row_mut(j).copy_from_slice(&m),
            None => empty.push(j),
        }
    }
    let mut moved = Vec::new();
    for j in empty {
        let mut cluster_inertia = vec![0.0; k];
        for (i, r) in x.iter_rows().enumerate() {
            cluster_inertia[assign[i]] += squared_euclidean(r, centroids.row(assign[i]));
        }
        let donor = argmax(&cluster_inertia);
        let mut far = None::<(usize, f64)>;
        for (i, r) in x.iter_rows().enumerate() {
            if assign[i] == donor {
                let d = squared_euclidean(r, centroids.row(donor));
                if far.map_or(true, |(_, b)| d > b) {
                    far = Some((i, d));
                }
            }
        }
        // Donors always hold ≥ 2 rows here: k ≤ n and j is empty.
        let (i, _) = far.unwrap();
        assign[i] = j;
        moved.push(i);
        centroids.row_mut(j).copy_from_slice(x.row(i));
        let m = mean_of(assign, donor).unwrap();
        centroids.row_mut(donor).copy_from_slice(&m);
    }
    (centroids, moved)
}

/// Elkan bound state: upper bound to the own centroid, lower bounds to every centroid.
struct Bounds {
    upper: Vec<f64>,
    lower: Vec<Vec<f64>>,
}

impl Bounds {
    fn init(x: &Matrix, centroids: &Matrix) -> (Vec<usize>, Bounds) {
        let mut assign = Vec::with_capacity(x.rows());
        let mut upper = Vec::with_capacity(x.rows());
        let mut lower = Vec::with_capacity(x.rows());
        for r in x.iter_rows() {
            let sq: Vec<f64> = centroids.iter_rows().map(|c| squared_euclidean(r, c)).collect();
            let mut a = 0;
            for j in 1..sq.len() {
                if sq[j] < sq[a] {
                    a = j;
                }
            }
            assign.push(a);
            upper.push(sq[a].sqrt());
            lower.push(sq.iter().map(|d| d.sqrt()).collect());
        }
        (assign, Bounds { upper, lower })
    }

    fn shift(&mut self, old: &Matrix, new: &Matrix, assign: &[usize], moved: &[usize]) {
        let s: Vec<f64> = (0..old.rows()).map(|j| squared_euclidean(old.row(j), new.row(j)).sqrt()).collect();
        for i in 0..self.upper.len() {
            self.upper[i] += s[assign[i]];
            for (l, sj) in self.lower[i].iter_mut().zip(&s) {
                *l = (*l - sj).max(0.0);
            }
        }
        for &i in moved {
            self.upper[i] = f64::INFINITY;
            self.lower[i].iter_mut().for_each(|l| *l = 0.0);
        }
    }

    fn assign(&mut self, x: &Matrix, centroids: &Matrix, assign: &mut [usize]) {
        let k = centroids.rows();
        let mut cc = vec![vec![0.0; k]; k];
        for a in 0..k {
            for b in a + 1..k {
                let d = squared_euclidean(centroids.row(a), centroids.row(b)).sqrt();
                cc[a][b] = d;
                cc[b][a] = d;
            }
        }
        let half_min: Vec<f64> = (0..k)
            .map(|a| 0.5 * (0..k).filter(|&b| b != a).map(|b| cc[a][b]).fold(f64::INFINITY, f64::min))
            .collect();
        for (i, r) in x.iter_rows().enumerate() {
            let mut a = assign[i];
            let slack = ELKAN_SLACK * (1.0 + self.upper[i].min(1e300));
            if self.upper[i] + slack < half_min[a] {
                continue;
            }
            let mut sq_a = None::<f64>;
            for j in 0..k {
                if j == a {
                    continue;
                }
                let u = self.upper[i];
                if u + slack < self.lower[i][j] || u + slack < 0.5 * cc[a][j] {
                    continue;
                }
                let sa = *sq_a.get_or_insert_with(|| {
                    let s = squared_euclidean(r, centroids.row(a));
                    self.upper[i] = s.sqrt();
                    self.lower[i][a] = s.sqrt();
                    s
                });
                let u = self.upper[i];
                if u + slack < self.lower[i][j] || u + slack < 0.5 * cc[a][j] {
                    continue;
                }
                let sj = squared_euclidean(r, centroids.row(j));
                self.lower[i][j] = sj.sqrt();
                if sj < sa || (sj == sa && j < a) {
                    a = j;
                    sq_a = Some(sj);
                    self.upper[i] = sj.sqrt();
                }
            }
            assign[i] = a;
        }
    }
}

/// One k-means run from fixed initial centroids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansRun {
    pub centroids: Matrix,
    pub assignments: Vec<usize>,
    pub inertia: f64,
    /// Update steps performed.
    pub iterations: usize,
    /// Inertia after each (assignment, update) pair.
    pub inertia_trace: Vec<f64>,
}

/// Alternates assignment and update until the assignments stop changing or `max_iter` updates ran.
pub fn kmeans_run(x: &Matrix, init: &Matrix, max_iter: usize, algorithm: KMeansAlgorithm) -> Result<KMeansRun> {
    x.require_nonempty()?;
    check_dim(x.cols(), init.cols())?;
    let k = init.rows();
    if k == 0 || k > x.rows() {
        return Err(Error::hyper(format!("k must be in 1..={}, got {k}", x.rows())));
    }
    let mut centroids = init.clone();
    let mut bounds = None;
    let mut assign = match algorithm {
        KMeansAlgorithm::Lloyd => inertia(x, &centroids)?.0,
        KMeansAlgorithm::Elkan => {
            let (a, b) = Bounds::init(x, &centroids);
            bounds = Some(b);
            a
        }
    };
    let mut trace = Vec::new();
    let mut iterations = 0;
    loop {
        if iterations == max_iter {
            // Leave the model consistent: assignments nearest to the final centroids.
            assign = inertia(x, &centroids)?.0;
            break;
        }
        let (next, moved) = update_centroids(x, k, &mut assign);
        iterations += 1;
        trace.push(assigned_inertia(x, &next, &assign));
        let previous = assign.clone();
        match bounds.as_mut() {
            None => assign = inertia(x, &next)?.0,
            Some(b) => {
                b.shift(&centroids, &next, &assign, &moved);
                b.assign(x, &next, &mut assign);
            }
        }
        centroids = next;
        if assign == previous {
            break;
        }
    }
    let inertia = assigned_inertia(x, &centroids, &assign);
    Ok(KMeansRun {
        centroids,
        assignments: assign,
        inertia,
        iterations,
        inertia_trace: trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub restarts: usize,
    pub max_iter: usize,
    pub algorithm: KMeansAlgorithm,
    pub seed: u64,
}

impl KMeansConfig {
    pub fn new(k: usize) -> Self {
        KMeansConfig {
            k,
            restarts: 10,
            max_iter: 300,
            algorithm: KMeansAlgorithm::Lloyd,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansModel {
    pub centroids: Matrix,
    pub assignments: Vec<usize>,
    pub inertia: f64,
    pub iterations: usize,
    pub best_restart: usize,
    pub config: KMeansConfig,
}

/// Initial centroids of every restart, from `rng_split(seed, restarts)`.
pub fn restart_inits(x: &Matrix, config: &KMeansConfig) -> Result<Vec<Matrix>> {
    rng_split(config.seed, config.restarts)
        .into_iter()
        .map(|s| kmeans_pp_init(x, config.k, &mut SeededRng::new(s)))
        .collect()
}

pub fn kmeans_fit(x: &Matrix, config: &KMeansConfig) -> Result<KMeansModel> {
    if config.restarts == 0 {
        return Err(Error::hyper("restarts must be at least 1"));
    }
    if config.max_iter == 0 {
        return Err(Error::hyper("max_iter must be at least 1"));
    }
    let inits = restart_inits(x, config)?;
    let runs = map_indexed(inits.len(), |r| kmeans_run(x, &inits[r], config.max_iter, config.algorithm));
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (r, run) in runs.iter().enumerate() {
        if run.inertia < runs[best].inertia {
            best = r;
        }
    }
    let run = runs.into_iter().nth(best).unwrap();
    Ok(KMeansModel {
        centroids: run.centroids,
        assignments: run.assignments,
        inertia: run.inertia,
        iterations: run.iterations,
        best_restart: best,
        config: *config,
    })
}

impl KMeansModel {
    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        Ok(inertia(x, &self.centroids)?.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmmConfig {
    pub k: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl GmmConfig {
    pub fn new(k: usize) -> Self {
        GmmConfig {
            k,
            max_iter: 200,
            tol: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmModel {
    pub weights: Vec<f64>,
    /// k×p, one mean per row.
    pub means: Matrix,
    pub covariances: Vec<Matrix>,
    pub log_likelihood: f64,
    /// Log-likelihood of the initial parameters followed by one entry per EM iteration.
    pub log_likelihood_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub config: GmmConfig,
}

/// Adds `1e-6·trace/p` to the diagonal; a zero-trace matrix borrows the data scale instead.
fn jitter(cov: &mut Matrix, fallback_scale: f64) {
    let p = cov.rows() as f64;
    let mut j = GMM_JITTER * cov.trace() / p;
    if !(j > 0.0) {
        j = GMM_JITTER * fallback_scale;
    }
    cov.add_diagonal(j);
}

struct Components {
    log_weights: Vec<f64>,
    chol: Vec<Cholesky>,
}

impl Components {
    fn new(weights: &[f64], covariances: &[Matrix]) -> Result<Components> {
        Ok(Components {
            log_weights: weights.iter().map(|w| w.ln()).collect(),
            chol: covariances.iter().map(|c| Cholesky::factor(c).ok_or(Error::SingularMatrix)).collect::<Result<_>>()?,
        })
    }
}

/// Log-space E-step: responsibilities and the total log-likelihood.
fn e_step(x: &Matrix, means: &Matrix, comps: &Components) -> (Matrix, f64) {
    let (n, p) = x.shape();
    let k = means.rows();
    let log_norm = p as f64 * (2.0 * std::f64::consts::PI).ln();
    let mut gamma = Matrix::zeros(n, k);
    let mut ll = 0.0;
    let mut diff = vec![0.0; p];
    for i in 0..n {
        let row = gamma.row_mut(i);
        for j in 0..k {
            for ((d, xv), mv) in diff.iter_mut().zip(x.row(i)).zip(means.row(j)) {
                *d = xv - mv;
            }
            let c = &comps.chol[j];
            row[j] = comps.log_weights[j] - 0.5 * (log_norm + c.log_det() + c.mahalanobis_sq(&diff));
        }
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + row.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        for v in row.iter_mut() {
            *v = (*v - lse).exp();
        }
        ll += lse;
    }
    (gamma, ll)
}

fn m_step(x: &Matrix, gamma: &Matrix, data_scale: f64) -> Result<(Vec<f64>, Matrix, Vec<Matrix>)> {
    let (n, p) = x.shape();
    let k = gamma.cols();
    let mut weights = Vec::with_capacity(k);
    let mut means = Matrix::zeros(k, p);
    let mut covs = Vec::with_capacity(k);
    for j in 0..k {
        let nj: f64 = (0..n).map(|i| gamma[(i, j)]).sum();
        let w = nj / n as f64;
        if !(w >= GMM_MIN_WEIGHT) {
            return Err(Error::DegenerateComponent(j));
        }
        weights.push(w);
        let mu = means.row_mut(j);
        for i in 0..n {
            let g = gamma[(i, j)];
            for (m, v) in mu.iter_mut().zip(x.row(i)) {
                *m += g * v;
            }
        }
        mu.iter_mut().for_each(|m| *m /= nj);
        let mu = means.row(j).to_vec();
        let mut cov = Matrix::zeros(p, p);
        let mut d = vec![0.0; p];
        for i in 0..n {
            let g = gamma[(i, j)];
            for ((dv, xv), m) in d.iter_mut().zip(x.row(i)).zip(&mu) {
                *dv = xv - m;
            }
            for a in 0..p {
                for b in 0..=a {
                    cov[(a, b)] += g * d[a] * d[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..=a {
                let v = cov[(a, b)] / nj;
                cov[(a, b)] = v;
                cov[(b, a)] = v;
            }
        }
        jitter(&mut cov, data_scale);
        covs.push(cov);
    }
    Ok((weights, means, covs))
}

pub fn gmm_fit_em(x: &Matrix, config: &GmmConfig) -> Result<GmmModel> {
    if !(config.tol >= 0.0) {
        return Err(Error::hyper("tol must be non-negative"));
    }
    let k = config.k;
    let mut rng = SeededRng::new(config.seed);
    let mut means = kmeans_pp_init(x, k, &mut rng)?;
    let mut cov = covariance(x, Divisor::N)?;
    let data_scale = (cov.trace() / x.cols() as f64).max(f64::MIN_POSITIVE);
    jitter(&mut cov, 1.0);
    let mut weights = vec![1.0 / k as f64; k];
    let mut covariances = vec![cov; k];

    let (mut gamma, mut ll) = e_step(x, &means, &Components::new(&weights, &covariances)?);
    let mut trace = vec![ll];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iter {
        let (w, m, c) = m_step(x, &gamma, data_scale)?;
        let comps = Components::new(&w, &c)?;
        (weights, means, covariances) = (w, m, c);
        let (g, next) = e_step(x, &means, &comps);
        iterations += 1;
        trace.push(next);
        gamma = g;
        let delta = (next - ll).abs();
        ll = next;
        if delta < config.tol {
            converged = true;
            break;
        }
    }
    Ok(GmmModel {
        weights,
        means,
        covariances,
        log_likelihood: ll,
        log_likelihood_trace: trace,
        iterations,
        converged,
        config: *config,
    })
}

impl GmmModel {
    pub fn n_components(&self) -> usize {
        self.weights.len()
    }

    /// Posterior component probabilities per row, computed in log-space.
    pub fn responsibilities(&self, x: &Matrix) -> Result<Matrix> {
        check_dim(self.means.cols(), x.cols())?;
        let comps = Components::new(&self.weights, &self.covariances)?;
        Ok(e_step(x, &self.means, &comps).0)
    }

    pub fn log_likelihood_of(&self, x: &Matrix) -> Result<f64> {
        check_dim(self.means.cols(), x.cols())?;
        let comps = Components::new(&self.weights, &self.covariances)?;
        Ok(e_step(x, &self.means, &comps).1)
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        let g = self.responsibilities(x)?;
        Ok(g.iter_rows().map(argmax).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    fn random(rng: &mut SeededRng, n: usize, p: usize) -> Matrix {
        Matrix::new(n, p, (0..n * p).map(|_| rng.next_f64()).collect()).unwrap()
    }

    fn gaussian(rng: &mut SeededRng) -> f64 {
        let u = rng.open_interval(0.0, 1.0);
        let v = rng.next_f64();
        (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
    }

    #[test]
    fn pp_init_properties() {
        let mut rng = SeededRng::new(60);
        let x = random(&mut rng, 12, 2);
        let c = kmeans_pp_init(&x, 12, &mut SeededRng::new(1)).unwrap();
        let mut got: Vec<Vec<f64>> = c.iter_rows().map(|r| r.to_vec()).collect();
        let mut want: Vec<Vec<f64>> = x.iter_rows().map(|r| r.to_vec()).collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(got, want);
        let a = kmeans_pp_init(&x, 4, &mut SeededRng::new(2)).unwrap();
        assert_eq!(a, kmeans_pp_init(&x, 4, &mut SeededRng::new(2)).unwrap());
        let rows: Vec<Vec<f64>> = a.iter_rows().map(|r| r.to_vec()).collect();
        for i in 0..4 {
            for j in 0..i {
                assert_ne!(rows[i], rows[j]);
            }
        }
        assert!(matches!(kmeans_pp_init(&x, 13, &mut rng), Err(Error::InvalidHyperparameter(_))));
    }

    #[test]
    fn pp_init_with_duplicates_covers_all_rows() {
        let x = Matrix::column_vector(&[1.0, 1.0, 1.0, 5.0]).unwrap();
        let c = kmeans_pp_init(&x, 4, &mut SeededRng::new(3)).unwrap();
        let mut v = c.into_vec();
        v.sort_by(f64::total_cmp);
        assert_eq!(v, vec![1.0, 1.0, 1.0, 5.0]);
    }

    #[test]
    fn four_point_example() {
        let x = Matrix::column_vector(&[0.0, 1.0, 10.0, 11.0]).unwrap();
        for algorithm in [KMeansAlgorithm::Lloyd, KMeansAlgorithm::Elkan] {
            let m = kmeans_fit(&x, &KMeansConfig { algorithm, ..KMeansConfig::new(2) }).unwrap();
            let mut c = m.centroids.clone().into_vec();
            c.sort_by(f64::total_cmp);
            assert_eq!(c, vec![0.5, 10.5]);
            assert_eq!(m.inertia, 1.0);
        }
        let all = kmeans_fit(&x, &KMeansConfig::new(4)).unwrap();
        assert_eq!(all.inertia, 0.0);
    }

    #[test]
    fn inertia_examples() {
        let mut rng = SeededRng::new(61);
        let x = random(&mut rng, 30, 3);
        assert_eq!(inertia(&x, &x).unwrap().1, 0.0);
        let means = linalg::column_means(&x);
        let centroid = Matrix::new(1, 3, means.clone()).unwrap();
        let direct: f64 = (0..3)
            .map(|j| {
                let col = x.column(j);
                col.iter().map(|v| (v - means[j]).powi(2)).sum::<f64>()
            })
            .sum();
        assert!((inertia(&x, &centroid).unwrap().1 - direct).abs() <= 1e-12 * direct);
        let mut moved = centroid.clone();
        moved[(0, 1)] += 0.3;
        assert!(inertia(&x, &moved).unwrap().1 >= direct);
        assert!(matches!(inertia(&x, &Matrix::zeros(2, 2)), Err(Error::Dimension { .. })));
    }

    #[test]
    fn ties_go_to_lowest_centroid() {
        let x = Matrix::column_vector(&[0.0]).unwrap();
        let c = Matrix::column_vector(&[1.0, -1.0]).unwrap();
        assert_eq!(inertia(&x, &c).unwrap().0, vec![0]);
    }

    #[test]
    fn elkan_matches_lloyd() {
        let mut rng = SeededRng::new(62);
        for case in 0..5 {
            let x = random(&mut rng, 300, 4);
            let cfg = KMeansConfig { k: 5, seed: case, ..KMeansConfig::new(5) };
            for init in restart_inits(&x, &cfg).unwrap() {
                let a = kmeans_run(&x, &init, 300, KMeansAlgorithm::Lloyd).unwrap();
                let b = kmeans_run(&x, &init, 300, KMeansAlgorithm::Elkan).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn elkan_matches_lloyd_with_ties_and_repairs() {
        // Integer grid with duplicates: many exact distance ties and empty clusters.
        let mut rng = SeededRng::new(63);
        for _ in 0..20 {
            let x = Matrix::new(40, 2, (0..80).map(|_| rng.below(4) as f64).collect()).unwrap();
            let init = Matrix::new(6, 2, (0..12).map(|_| rng.below(4) as f64).collect()).unwrap();
            let a = kmeans_run(&x, &init, 300, KMeansAlgorithm::Lloyd).unwrap();
            let b = kmeans_run(&x, &init, 300, KMeansAlgorithm::Elkan).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn lloyd_is_monotone_and_consistent() {
        let mut rng = SeededRng::new(64);
        let x = random(&mut rng, 200, 3);
        let m = kmeans_run(&x, &kmeans_pp_init(&x, 6, &mut rng).unwrap(), 300, KMeansAlgorithm::Lloyd).unwrap();
        for w in m.inertia_trace.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-9));
        }
        let (assign, total) = inertia(&x, &m.centroids).unwrap();
        assert_eq!(assign, m.assignments);
        assert!((total - m.inertia).abs() <= 1e-9 * total);
    }

    #[test]
    fn empty_cluster_is_repaired() {
        let x = Matrix::column_vector(&[0.0, 1.0, 2.0, 10.0]).unwrap();
        // The centroid at 100 captures nothing.
        let init = Matrix::column_vector(&[1.0, 100.0]).unwrap();
        let mut assign = inertia(&x, &init).unwrap().0;
        let (c, moved) = update_centroids(&x, 2, &mut assign);
        assert_eq!(moved, vec![3]);
        assert_eq!(assign, vec![0, 0, 0, 1]);
        assert_eq!(c.into_vec(), vec![1.0, 10.0]);
    }

    #[test]
    fn restarts_dominate_single_run() {
        let mut rng = SeededRng::new(65);
        let x = random(&mut rng, 150, 2);
        let best = kmeans_fit(&x, &KMeansConfig { seed: 4, ..KMeansConfig::new(7) }).unwrap();
        let inits = restart_inits(&x, &KMeansConfig { seed: 4, ..KMeansConfig::new(7) }).unwrap();
        for init in inits {
            assert!(best.inertia <= kmeans_run(&x, &init, 300, KMeansAlgorithm::Lloyd).unwrap().inertia);
        }
        crate::parallel::set_threads(3);
        let par = kmeans_fit(&x, &KMeansConfig { seed: 4, ..KMeansConfig::new(7) }).unwrap();
        crate::parallel::set_threads(1);
        assert_eq!(par, best);
    }

    #[test]
    fn gmm_single_component() {
        let mut rng = SeededRng::new(66);
        let x = random(&mut rng, 50, 3);
        let m = gmm_fit_em(&x, &GmmConfig::new(1)).unwrap();
        let mean = linalg::column_means(&x);
        for (a, b) in m.means.row(0).iter().zip(&mean) {
            assert!((a - b).abs() < 1e-12);
        }
        let mut cov = linalg::covariance(&x, Divisor::N).unwrap();
        let j = GMM_JITTER * cov.trace() / 3.0;
        cov.add_diagonal(j);
        assert!(m.covariances[0].sub(&cov).unwrap().max_abs() < 1e-12);
        assert_eq!(m.weights, vec![1.0]);
        assert!(m.converged);
    }

    #[test]
    fn gmm_recovers_separated_blobs() {
        let mut rng = SeededRng::new(67);
        let v: Vec<f64> = (0..200).map(|i| if i % 2 == 0 { -5.0 } else { 5.0 } + 0.3 * gaussian(&mut rng)).collect();
        let x = Matrix::column_vector(&v).unwrap();
        let m = gmm_fit_em(&x, &GmmConfig::new(2)).unwrap();
        let mut mu = m.means.clone().into_vec();
        mu.sort_by(f64::total_cmp);
        assert!((mu[0] + 5.0).abs() < 0.1 && (mu[1] - 5.0).abs() < 0.1, "{mu:?}");
        assert!((m.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for w in m.log_likelihood_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9);
        }
        let g = m.responsibilities(&x).unwrap();
        for r in g.iter_rows() {
            assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gmm_responsibility_examples() {
        let means = Matrix::from_rows(&[[0.0, 0.0], [3.0, 3.0]]).unwrap();
        let mut tiny = Matrix::identity(2);
        tiny.scale(1e-3);
        let model = GmmModel {
            weights: vec![0.5, 0.5],
            means: means.clone(),
            covariances: vec![tiny.clone(), tiny.clone()],
            log_likelihood: 0.0,
            log_likelihood_trace: vec![],
            iterations: 0,
            converged: true,
            config: GmmConfig::new(2),
        };
        let g = model.responsibilities(&means).unwrap();
        assert!(g[(0, 0)] > 1.0 - 1e-12 && g[(1, 1)] > 1.0 - 1e-12);
        assert_eq!(model.predict(&means).unwrap(), vec![0, 1]);
        // Far from both, in log-space nothing underflows to NaN.
        let far = Matrix::from_rows(&[[1e3, -1e3]]).unwrap();
        assert!(model.responsibilities(&far).unwrap().as_slice().iter().all(|v| v.is_finite()));

        let same = GmmModel { means: Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap(), ..model };
        let g = same.responsibilities(&means).unwrap();
        assert!(g.as_slice().iter().all(|&v| (v - 0.5).abs() < 1e-12));
    }

    #[test]
    fn gmm_em_is_monotone_on_random_problems() {
        let mut rng = SeededRng::new(68);
        for seed in 0..5 {
            let x = random(&mut rng, 120, 3);
            let m = gmm_fit_em(&x, &GmmConfig { seed, ..GmmConfig::new(3) }).unwrap();
            for w in m.log_likelihood_trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-9, "{} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn gmm_handles_duplicates() {
        let x = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0], [1.0, 1.0], [4.0, 0.0], [4.0, 0.0], [4.1, 0.2]]).unwrap();
        let m = gmm_fit_em(&x, &GmmConfig::new(2)).unwrap();
        assert!(m.log_likelihood.is_finite());
        assert_eq!(m.predict(&x).unwrap()[0], m.predict(&x).unwrap()[1]);
    }
}
