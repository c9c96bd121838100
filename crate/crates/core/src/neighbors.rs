//! Exact nearest-neighbor search and neighbor-based predictors.
//!
//! Three index kinds answer the same queries with identical results: brute
//! force, a k-d tree pruned with bounding boxes, and a ball tree pruned with
//! the triangle inequality. Results are ordered by `(distance, row index)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::data::{argmax, Labels, Matrix};
use crate::error::{check_dim, Error, Result};
use crate::metric::{squared_euclidean, Metric};

pub const DEFAULT_LEAF_SIZE: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexKind {
    Brute,
    KdTree,
    BallTree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Bound {
    Rect { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Split {
    dim: usize,
    threshold: f64,
    left: usize,
    right: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Node {
    /// Range into `NeighborIndex::order`.
    start: usize,
    end: usize,
    bound: Bound,
    split: Option<Split>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborIndex {
    kind: IndexKind,
    metric: Metric,
    leaf_size: usize,
    points: Matrix,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

/// Neighbors of one query point, nearest first; equal distances by ascending row index.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborQueryResult {
    pub indices: Vec<usize>,
    pub distances: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    dist: f64,
    index: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl NeighborIndex {
    pub fn build(points: &Matrix, kind: IndexKind, leaf_size: usize) -> Result<Self> {
        points.require_nonempty()?;
        if leaf_size == 0 {
            return Err(Error::hyper("leaf_size must be at least 1"));
        }
        let mut index = NeighborIndex {
            kind,
            metric: Metric::Euclidean,
            leaf_size,
            points: points.clone(),
            order: (0..points.rows()).collect(),
            nodes: Vec::new(),
        };
        if kind != IndexKind::Brute {
            index.build_node(0, points.rows());
        }
        Ok(index)
    }

    pub fn kind(&self) -> IndexKind {
        self.kind
    }

    pub fn points(&self) -> &Matrix {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.rows() == 0
    }

    fn dist(&self, q: &[f64], i: usize) -> f64 {
        squared_euclidean(q, self.points.row(i)).sqrt()
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let p = self.points.cols();
        let id = self.nodes.len();
        let bound = self.bound_for(start, end);
        self.nodes.push(Node {
            start,
            end,
            bound,
            split: None,
        });
        if end - start <= self.leaf_size {
            return id;
        }

        // Dimension of largest spread, lowest index on ties.
        let mut best_dim = 0;
        let mut best_spread = -1.0;
        for d in 0..p {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &i in &self.order[start..end] {
                let v = self.points[(i, d)];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if hi - lo > best_spread {
                best_spread = hi - lo;
                best_dim = d;
            }
        }
        if best_spread <= 0.0 {
            // All points coincide; nothing to split on.
            return id;
        }

        let points = &self.points;
        self.order[start..end].sort_by(|&a, &b| {
            points[(a, best_dim)]
                .total_cmp(&points[(b, best_dim)])
                .then(a.cmp(&b))
        });
        let value = |k: usize| self.points[(self.order[k], best_dim)];
        let median = start + (end - start - 1) / 2;
        let mut threshold = value(median);
        let mut mid = (start..end).find(|&k| value(k) > threshold).unwrap_or(end);
        if mid == end {
            // Lower median equals the maximum: fall back to the largest smaller value.
            let last_below = (start..end).rev().find(|&k| value(k) < threshold).unwrap();
            threshold = value(last_below);
            mid = last_below + 1;
        }

        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id].split = Some(Split {
            dim: best_dim,
            threshold,
            left,
            right,
        });
        id
    }

    fn bound_for(&self, start: usize, end: usize) -> Bound {
        let p = self.points.cols();
        let rows = &self.order[start..end];
        match self.kind {
            IndexKind::KdTree | IndexKind::Brute => {
                let mut lo = vec![f64::INFINITY; p];
                let mut hi = vec![f64::NEG_INFINITY; p];
                for &i in rows {
                    for (d, &v) in self.points.row(i).iter().enumerate() {
                        lo[d] = lo[d].min(v);
                        hi[d] = hi[d].max(v);
                    }
                }
                Bound::Rect { lo, hi }
            }
            IndexKind::BallTree => {
                let mut center = vec![0.0; p];
                for &i in rows {
                    for (c, v) in center.iter_mut().zip(self.points.row(i)) {
                        *c += v;
                    }
                }
                let n = rows.len() as f64;
                center.iter_mut().for_each(|c| *c /= n);
                let radius = rows
                    .iter()
                    .map(|&i| self.dist(&center, i))
                    .fold(0.0, f64::max);
                Bound::Ball { center, radius }
            }
        }
    }

    /// Lower bound on the distance from `q` to any point under `node`.
    fn lower_bound(&self, node: &Node, q: &[f64]) -> f64 {
        match &node.bound {
            Bound::Rect { lo, hi } => {
                // Each gap is no larger than the matching coordinate difference of any
                // contained point, and IEEE arithmetic is monotone, so this never
                // exceeds a computed point distance.
                let mut s = 0.0;
                for d in 0..q.len() {
                    let g = if q[d] < lo[d] {
                        lo[d] - q[d]
                    } else if q[d] > hi[d] {
                        q[d] - hi[d]
                    } else {
                        0.0
                    };
                    s += g * g;
                }
                s.sqrt()
            }
            Bound::Ball { center, radius } => {
                let dc = squared_euclidean(q, center).sqrt();
                // Rounding slack keeps the triangle-inequality bound conservative.
                (dc - radius - 1e-12 * (dc + radius)).max(0.0)
            }
        }
    }

    fn check_query(&self, q: &[f64]) -> Result<()> {
        check_dim(self.points.cols(), q.len())?;
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: 0, col: 0 });
        }
        Ok(())
    }

    /// The `k` nearest stored points.
    pub fn query_knn(&self, q: &[f64], k: usize) -> Result<NeighborQueryResult> {
        self.check_query(q)?;
        if k == 0 || k > self.len() {
            return Err(Error::hyper(format!(
                "k must lie in 1..={}, got {k}",
                self.len()
            )));
        }
        let mut found: Vec<Candidate> = match self.kind {
            IndexKind::Brute => {
                let mut all: Vec<Candidate> = (0..self.len())
                    .map(|i| Candidate {
                        dist: self.dist(q, i),
                        index: i,
                    })
                    .collect();
                all.sort();
                all.truncate(k);
                all
            }
            _ => {
                let mut heap = BinaryHeap::with_capacity(k + 1);
                self.knn_visit(0, q, k, &mut heap);
                heap.into_vec()
            }
        };
        found.sort();
        Ok(into_result(found))
    }

    fn knn_visit(&self, id: usize, q: &[f64], k: usize, heap: &mut BinaryHeap<Candidate>) {
        let node = &self.nodes[id];
        match &node.split {
            None => {
                for &i in &self.order[node.start..node.end] {
                    let c = Candidate {
                        dist: self.dist(q, i),
                        index: i,
                    };
                    if heap.len() < k {
                        heap.push(c);
                    } else if c < *heap.peek().unwrap() {
                        heap.pop();
                        heap.push(c);
                    }
                }
            }
            Some(split) => {
                let lb_l = self.lower_bound(&self.nodes[split.left], q);
                let lb_r = self.lower_bound(&self.nodes[split.right], q);
                let children = if lb_r < lb_l {
                    [(split.right, lb_r), (split.left, lb_l)]
                } else {
                    [(split.left, lb_l), (split.right, lb_r)]
                };
                for (child, lb) in children {
                    // A point at exactly the current worst distance may still win on index.
                    if heap.len() == k && lb > heap.peek().unwrap().dist {
                        continue;
                    }
                    self.knn_visit(child, q, k, heap);
                }
            }
        }
    }

    /// All stored points strictly closer than `radius`.
    pub fn query_radius(&self, q: &[f64], radius: f64) -> Result<NeighborQueryResult> {
        self.check_query(q)?;
        if !(radius > 0.0) {
            return Err(Error::hyper("radius must be positive"));
        }
        let mut found = Vec::new();
        match self.kind {
            IndexKind::Brute => {
                for i in 0..self.len() {
                    let dist = self.dist(q, i);
                    if dist < radius {
                        found.push(Candidate { dist, index: i });
                    }
                }
            }
            _ => self.radius_visit(0, q, radius, &mut found),
        }
        found.sort();
        Ok(into_result(found))
    }

    fn radius_visit(&self, id: usize, q: &[f64], radius: f64, found: &mut Vec<Candidate>) {
        let node = &self.nodes[id];
        if self.lower_bound(node, q) >= radius {
            return;
        }
        match &node.split {
            None => {
                for &i in &self.order[node.start..node.end] {
                    let dist = self.dist(q, i);
                    if dist < radius {
                        found.push(Candidate { dist, index: i });
                    }
                }
            }
            Some(split) => {
                self.radius_visit(split.left, q, radius, found);
                self.radius_visit(split.right, q, radius, found);
            }
        }
    }

    /// Checks the structural invariants: every point sits in exactly one leaf,
    /// ball radii cover their points, and k-d splits separate their children.
    pub fn audit(&self) -> std::result::Result<(), String> {
        let n = self.len();
        let mut seen = vec![0usize; n];
        if self.kind == IndexKind::Brute {
            return Ok(());
        }
        self.audit_node(0, &mut seen)?;
        if let Some(i) = seen.iter().position(|&c| c != 1) {
            return Err(format!("point {i} reached {} times", seen[i]));
        }
        Ok(())
    }

    fn audit_node(&self, id: usize, seen: &mut [usize]) -> std::result::Result<(), String> {
        let node = &self.nodes[id];
        let rows = &self.order[node.start..node.end];
        if let Bound::Ball { center, radius } = &node.bound {
            for &i in rows {
                if self.dist(center, i) > *radius {
                    return Err(format!("node {id}: point {i} outside radius"));
                }
            }
        }
        match &node.split {
            None => {
                for &i in rows {
                    seen[i] += 1;
                }
                Ok(())
            }
            Some(split) => {
                let (l, r) = (&self.nodes[split.left], &self.nodes[split.right]);
                if l.start != node.start || l.end != r.start || r.end != node.end {
                    return Err(format!("node {id}: children do not tile the parent"));
                }
                for &i in &self.order[l.start..l.end] {
                    if self.points[(i, split.dim)] > split.threshold {
                        return Err(format!("node {id}: left point {i} above threshold"));
                    }
                }
                for &i in &self.order[r.start..r.end] {
                    if self.points[(i, split.dim)] <= split.threshold {
                        return Err(format!("node {id}: right point {i} not above threshold"));
                    }
                }
                self.audit_node(split.left, seen)?;
                self.audit_node(split.right, seen)
            }
        }
    }

    /// Number of nodes in the tree (0 for brute force).
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

fn into_result(found: Vec<Candidate>) -> NeighborQueryResult {
    NeighborQueryResult {
        indices: found.iter().map(|c| c.index).collect(),
        distances: found.iter().map(|c| c.dist).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    Uniform,
    /// Inversely proportional to distance.
    Inverse,
}

/// Normalized neighbor weights.
///
/// With inverse weighting, any zero-distance neighbors split the whole weight
/// equally and every other neighbor gets 0.
pub fn neighbor_weights(distances: &[f64], scheme: Weighting) -> Result<Vec<f64>> {
    if distances.is_empty() {
        return Err(Error::EmptyNeighborhood);
    }
    let n = distances.len() as f64;
    let w = match scheme {
        Weighting::Uniform => vec![1.0 / n; distances.len()],
        Weighting::Inverse => {
            let zeros = distances.iter().filter(|&&d| d == 0.0).count();
            if zeros > 0 {
                let share = 1.0 / zeros as f64;
                distances
                    .iter()
                    .map(|&d| if d == 0.0 { share } else { 0.0 })
                    .collect()
            } else {
                let inv: Vec<f64> = distances.iter().map(|d| 1.0 / d).collect();
                let total: f64 = inv.iter().sum();
                inv.iter().map(|v| v / total).collect()
            }
        }
    };
    Ok(w)
}

/// How the neighborhood of a query point is defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Neighborhood {
    K(usize),
    Radius(f64),
}

pub fn neighborhood(index: &NeighborIndex, x: &[f64], hood: Neighborhood) -> Result<NeighborQueryResult> {
    let res = match hood {
        Neighborhood::K(k) => index.query_knn(x, k)?,
        Neighborhood::Radius(r) => index.query_radius(x, r)?,
    };
    if res.indices.is_empty() {
        return Err(Error::EmptyNeighborhood);
    }
    Ok(res)
}

fn regress(index: &NeighborIndex, targets: &[f64], x: &[f64], hood: Neighborhood, scheme: Weighting) -> Result<f64> {
    check_dim(index.len(), targets.len())?;
    let res = neighborhood(index, x, hood)?;
    let w = neighbor_weights(&res.distances, scheme)?;
    Ok(res.indices.iter().zip(&w).map(|(&i, wi)| wi * targets[i]).sum())
}

fn classify(index: &NeighborIndex, labels: &Labels, x: &[f64], hood: Neighborhood, scheme: Weighting) -> Result<(usize, Vec<f64>)> {
    check_dim(index.len(), labels.len())?;
    let res = neighborhood(index, x, hood)?;
    let w = neighbor_weights(&res.distances, scheme)?;
    let mut scores = vec![0.0; labels.n_classes()];
    for (&i, wi) in res.indices.iter().zip(&w) {
        scores[labels.values()[i]] += wi;
    }
    Ok((argmax(&scores), scores))
}

/// Weighted mean of the `k` nearest targets.
pub fn knn_predict_regression(index: &NeighborIndex, targets: &[f64], x: &[f64], k: usize, scheme: Weighting) -> Result<f64> {
    regress(index, targets, x, Neighborhood::K(k), scheme)
}

/// Class with the largest weighted vote among the `k` nearest points, plus the per-class scores.
pub fn knn_predict_classification(index: &NeighborIndex, labels: &Labels, x: &[f64], k: usize, scheme: Weighting) -> Result<(usize, Vec<f64>)> {
    classify(index, labels, x, Neighborhood::K(k), scheme)
}

/// Radius-neighborhood regression; an empty neighborhood is an error.
pub fn radius_predict_regression(index: &NeighborIndex, targets: &[f64], x: &[f64], radius: f64, scheme: Weighting) -> Result<f64> {
    regress(index, targets, x, Neighborhood::Radius(radius), scheme)
}

pub fn radius_predict_classification(index: &NeighborIndex, labels: &Labels, x: &[f64], radius: f64, scheme: Weighting) -> Result<(usize, Vec<f64>)> {
    classify(index, labels, x, Neighborhood::Radius(radius), scheme)
}

/// Fitted neighbor regressor: the index plus training targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnRegressor {
    pub index: NeighborIndex,
    pub targets: Vec<f64>,
    pub neighborhood: Neighborhood,
    pub weighting: Weighting,
}

impl KnnRegressor {
    pub fn fit(x: &Matrix, y: &[f64], kind: IndexKind, leaf_size: usize, neighborhood: Neighborhood, weighting: Weighting) -> Result<Self> {
        check_dim(x.rows(), y.len())?;
        validate_hood(neighborhood, x.rows())?;
        Ok(KnnRegressor {
            index: NeighborIndex::build(x, kind, leaf_size)?,
            targets: y.to_vec(),
            neighborhood,
            weighting,
        })
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        x.iter_rows()
            .map(|r| regress(&self.index, &self.targets, r, self.neighborhood, self.weighting))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnClassifier {
    pub index: NeighborIndex,
    pub labels: Labels,
    pub neighborhood: Neighborhood,
    pub weighting: Weighting,
}

impl KnnClassifier {
    pub fn fit(x: &Matrix, labels: &Labels, kind: IndexKind, leaf_size: usize, neighborhood: Neighborhood, weighting: Weighting) -> Result<Self> {
        check_dim(x.rows(), labels.len())?;
        validate_hood(neighborhood, x.rows())?;
        Ok(KnnClassifier {
            index: NeighborIndex::build(x, kind, leaf_size)?,
            labels: labels.clone(),
            neighborhood,
            weighting,
        })
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        Ok(self.predict_proba(x)?.iter().map(|s| argmax(s)).collect())
    }

    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<Vec<f64>>> {
        x.iter_rows()
            .map(|r| classify(&self.index, &self.labels, r, self.neighborhood, self.weighting).map(|(_, s)| s))
            .collect()
    }
}

fn validate_hood(hood: Neighborhood, n: usize) -> Result<()> {
    match hood {
        Neighborhood::K(k) if k == 0 || k > n => Err(Error::hyper(format!("k must lie in 1..={n}, got {k}"))),
        Neighborhood::Radius(r) if !(r > 0.0) || !r.is_finite() => Err(Error::hyper("radius must be positive and finite")),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    const KINDS: [IndexKind; 3] = [IndexKind::Brute, IndexKind::KdTree, IndexKind::BallTree];

    fn random_points(rng: &mut SeededRng, n: usize, p: usize) -> Matrix {
        Matrix::new(n, p, (0..n * p).map(|_| rng.next_f64()).collect()).unwrap()
    }

    #[test]
    fn single_point() {
        let x = Matrix::from_rows(&[[1.0, 2.0]]).unwrap();
        for kind in KINDS {
            let idx = NeighborIndex::build(&x, kind, 30).unwrap();
            let r = idx.query_knn(&[0.0, 0.0], 1).unwrap();
            assert_eq!(r.indices, vec![0]);
            assert!(idx.node_count() <= 1);
        }
    }

    #[test]
    fn empty_matrix_rejected() {
        let x = Matrix::new(0, 2, vec![]).unwrap();
        assert_eq!(NeighborIndex::build(&x, IndexKind::KdTree, 5), Err(Error::EmptyDataset));
    }

    #[test]
    fn k_equals_n_and_self_query() {
        let mut rng = SeededRng::new(4);
        let x = random_points(&mut rng, 40, 3);
        for kind in KINDS {
            let idx = NeighborIndex::build(&x, kind, 4).unwrap();
            let all = idx.query_knn(x.row(0), 40).unwrap();
            assert_eq!(all.indices.len(), 40);
            assert!(all.distances.windows(2).all(|w| w[0] <= w[1]));
            let one = idx.query_knn(x.row(17), 1).unwrap();
            assert_eq!((one.indices[0], one.distances[0]), (17, 0.0));
            assert!(matches!(idx.query_knn(x.row(0), 41), Err(Error::InvalidHyperparameter(_))));
        }
    }

    #[test]
    fn trees_match_brute_on_random_data() {
        let mut rng = SeededRng::new(77);
        let x = random_points(&mut rng, 1000, 3);
        let brute = NeighborIndex::build(&x, IndexKind::Brute, 30).unwrap();
        let kd = NeighborIndex::build(&x, IndexKind::KdTree, 30).unwrap();
        let ball = NeighborIndex::build(&x, IndexKind::BallTree, 30).unwrap();
        kd.audit().unwrap();
        ball.audit().unwrap();
        for _ in 0..100 {
            let q: Vec<f64> = (0..3).map(|_| rng.next_f64() * 1.2 - 0.1).collect();
            let expect = brute.query_knn(&q, 7).unwrap();
            assert_eq!(kd.query_knn(&q, 7).unwrap(), expect);
            assert_eq!(ball.query_knn(&q, 7).unwrap(), expect);
            let r = 0.15;
            let expect = brute.query_radius(&q, r).unwrap();
            assert_eq!(kd.query_radius(&q, r).unwrap(), expect);
            assert_eq!(ball.query_radius(&q, r).unwrap(), expect);
        }
    }

    #[test]
    fn duplicates_and_ties() {
        // Grid with many equal distances and repeated points.
        let mut rows = Vec::new();
        for i in 0..6 {
            for j in 0..6 {
                rows.push([i as f64, j as f64]);
                rows.push([i as f64, j as f64]);
            }
        }
        let x = Matrix::from_rows(&rows).unwrap();
        let brute = NeighborIndex::build(&x, IndexKind::Brute, 1).unwrap();
        for kind in [IndexKind::KdTree, IndexKind::BallTree] {
            let idx = NeighborIndex::build(&x, kind, 1).unwrap();
            idx.audit().unwrap();
            for q in [[2.5, 2.5], [0.0, 0.0], [3.0, 1.5], [-1.0, 7.0]] {
                for k in [1, 3, 8, 13] {
                    assert_eq!(idx.query_knn(&q, k).unwrap(), brute.query_knn(&q, k).unwrap());
                }
                assert_eq!(idx.query_radius(&q, 1.5).unwrap(), brute.query_radius(&q, 1.5).unwrap());
            }
        }
        let r = brute.query_knn(&[0.0, 0.0], 2).unwrap();
        assert_eq!(r.indices, vec![0, 1]);
    }

    #[test]
    fn radius_edges() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [2.0]]).unwrap();
        for kind in KINDS {
            let idx = NeighborIndex::build(&x, kind, 1).unwrap();
            assert!(idx.query_radius(&[10.0], 0.5).unwrap().indices.is_empty());
            assert_eq!(idx.query_radius(&[0.0], f64::MAX).unwrap().indices, vec![0, 1, 2]);
            // strict: the point at distance exactly 1 is excluded
            assert_eq!(idx.query_radius(&[0.0], 1.0).unwrap().indices, vec![0]);
        }
    }

    #[test]
    fn weights() {
        assert_eq!(neighbor_weights(&[1.0, 2.0, 3.0, 4.0], Weighting::Uniform).unwrap(), vec![0.25; 4]);
        let w = neighbor_weights(&[1.0, 2.0], Weighting::Inverse).unwrap();
        assert!((w[0] - 2.0 / 3.0).abs() < 1e-15 && (w[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(neighbor_weights(&[0.0, 5.0], Weighting::Inverse).unwrap(), vec![1.0, 0.0]);
        assert_eq!(neighbor_weights(&[0.0, 5.0, 0.0], Weighting::Inverse).unwrap(), vec![0.5, 0.0, 0.5]);
        assert_eq!(neighbor_weights(&[], Weighting::Uniform), Err(Error::EmptyNeighborhood));
    }

    #[test]
    fn regression_predictions() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [3.0]]).unwrap();
        let idx = NeighborIndex::build(&x, IndexKind::Brute, 30).unwrap();
        let y = [1.0, 3.0, 100.0];
        assert_eq!(knn_predict_regression(&idx, &y, &[0.5], 2, Weighting::Uniform).unwrap(), 2.0);
        // distances 1 and 2 to targets 0 and 1
        let x2 = Matrix::from_rows(&[[1.0], [2.0]]).unwrap();
        let idx2 = NeighborIndex::build(&x2, IndexKind::KdTree, 1).unwrap();
        let v = knn_predict_regression(&idx2, &[0.0, 1.0], &[0.0], 2, Weighting::Inverse).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(knn_predict_regression(&idx, &y, &[3.0], 1, Weighting::Inverse).unwrap(), 100.0);
    }

    #[test]
    fn classification_predictions() {
        let x = Matrix::from_rows(&[[0.0], [0.1], [0.2], [5.0]]).unwrap();
        let labels = Labels::encode(&["A", "A", "B", "B"]).unwrap();
        let idx = NeighborIndex::build(&x, IndexKind::BallTree, 2).unwrap();
        let (c, s) = knn_predict_classification(&idx, &labels, &[0.05], 3, Weighting::Uniform).unwrap();
        assert_eq!(c, 0);
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let (c, _) = knn_predict_classification(&idx, &labels, &[5.0], 1, Weighting::Uniform).unwrap();
        assert_eq!(c, 1);
        // uniform tie between classes 0 and 1 resolves to class 0
        let x = Matrix::from_rows(&[[-1.0], [1.0]]).unwrap();
        let labels = Labels::from_indices(vec![1, 0], 2).unwrap();
        let idx = NeighborIndex::build(&x, IndexKind::Brute, 1).unwrap();
        let (c, s) = knn_predict_classification(&idx, &labels, &[0.0], 2, Weighting::Uniform).unwrap();
        assert_eq!((c, s), (0, vec![0.5, 0.5]));
    }

    #[test]
    fn empty_radius_neighborhood_is_error() {
        let x = Matrix::from_rows(&[[0.0], [1.0]]).unwrap();
        let idx = NeighborIndex::build(&x, IndexKind::KdTree, 1).unwrap();
        assert_eq!(
            radius_predict_regression(&idx, &[1.0, 2.0], &[9.0], 0.5, Weighting::Uniform),
            Err(Error::EmptyNeighborhood)
        );
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
        #[test]
        fn knn_within_radius(seed in 0u64..10_000, k in 1usize..10, r in 0.05f64..0.6) {
            let mut rng = SeededRng::new(seed);
            let x = random_points(&mut rng, 60, 2);
            let idx = NeighborIndex::build(&x, IndexKind::BallTree, 3).unwrap();
            let q = [rng.next_f64(), rng.next_f64()];
            let nn = idx.query_knn(&q, k).unwrap();
            if nn.distances[k - 1] < r {
                let within = idx.query_radius(&q, r).unwrap();
                for i in &nn.indices {
                    proptest::prop_assert!(within.indices.contains(i));
                }
            }
            for scheme in [Weighting::Uniform, Weighting::Inverse] {
                let w = neighbor_weights(&nn.distances, scheme).unwrap();
                proptest::prop_assert!(w.iter().all(|&v| v >= 0.0));
                proptest::prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            }
        }
    }
}
