//! Exact brute-force neighbors and the recall / graph accuracy metrics.

use std::time::Duration;

use rayon::prelude::*;

use crate::dataset::{sq_euclidean, GroundTruth, VectorSet};
use crate::error::{Error, Result};
use crate::graph::KnnGraph;
use crate::pool::NeighborPool;

/// What to find neighbors for.
#[derive(Debug, Clone, Copy)]
pub enum QuerySet<'a> {
    /// Every base point against the rest, excluding itself.
    SelfJoin,
    External(&'a VectorSet),
}

/// Exact `k` nearest `(id, dist)` rows, ordered by `(dist, id)`.
pub fn brute_force_rows(
    vs: &VectorSet,
    queries: QuerySet<'_>,
    k: usize,
) -> Result<Vec<Vec<(u32, f32)>>> {
    let n = vs.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if k == 0 {
        return Err(Error::param("k must be at least 1"));
    }
    let (n_queries, limit) = match queries {
        QuerySet::SelfJoin => (n, n - 1),
        QuerySet::External(q) => {
            if q.dim() != vs.dim() && !q.is_empty() {
                return Err(Error::DimMismatch {
                    expected: vs.dim(),
                    found: q.dim(),
                });
            }
            (q.len(), n)
        }
    };
    if k > limit {
        return Err(Error::param(format!(
            "k = {k} exceeds the {limit} candidate neighbors available"
        )));
    }
    let rows = (0..n_queries)
        .into_par_iter()
        .map(|qi| {
            let (q, skip) = match queries {
                QuerySet::SelfJoin => (vs.row(qi), Some(qi)),
                QuerySet::External(qs) => (qs.row(qi), None),
            };
            let mut pool = NeighborPool::with_capacity(k);
            for (b, row) in vs.rows().enumerate() {
                if Some(b) == skip {
                    continue;
                }
                let d = sq_euclidean(q, row);
                if d <= pool.bound() {
                    pool.insert(b as u32, d, false);
                }
            }
            pool.entries().iter().map(|e| (e.id, e.dist)).collect()
        })
        .collect();
    Ok(rows)
}

/// Exact `k` nearest neighbor ids, ties broken by ascending id.
pub fn brute_force_knn(vs: &VectorSet, queries: QuerySet<'_>, k: usize) -> Result<GroundTruth> {
    let rows = brute_force_rows(vs, queries, k)?;
    GroundTruth::new(k, rows.into_iter().flatten().map(|(id, _)| id).collect())
}

/// The exact kNN graph of `vs`.
pub fn brute_force_graph(vs: &VectorSet, k: usize) -> Result<KnnGraph> {
    let rows = brute_force_rows(vs, QuerySet::SelfJoin, k)?;
    KnnGraph::from_rows(k, &rows)
}

/// `|returned ∩ truth| / |truth|`. Missing results count as misses.
pub fn recall(returned: &[u32], truth: &[u32]) -> f64 {
    if truth.is_empty() {
        return 1.0;
    }
    let hits = returned.iter().filter(|id| truth.contains(id)).count();
    hits as f64 / truth.len() as f64
}

/// One metric over a run, with the per-item values it averages.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub metric: String,
    pub value: f64,
    pub breakdown: Vec<f64>,
    pub elapsed: Duration,
    pub dist_comps: u64,
}

impl EvalReport {
    pub fn from_breakdown(metric: impl Into<String>, breakdown: Vec<f64>) -> Self {
        let value = mean(&breakdown);
        Self {
            metric: metric.into(),
            value,
            breakdown,
            elapsed: Duration::ZERO,
            dist_comps: 0,
        }
    }
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Per-point accuracy `|R'_i ∩ R_i| / |R'_i|`, averaged over all points.
pub fn graph_accuracy_report(graph: &KnnGraph, gt: &GroundTruth) -> Result<EvalReport> {
    if graph.k() != gt.k() || graph.len() != gt.n_queries() {
        return Err(Error::param(format!(
            "graph is {}x{}, ground truth is {}x{}",
            graph.len(),
            graph.k(),
            gt.n_queries(),
            gt.k()
        )));
    }
    let breakdown = (0..graph.len())
        .map(|i| {
            let hits = graph
                .neighbors(i)
                .iter()
                .filter(|id| gt.row(i).contains(id))
                .count();
            hits as f64 / graph.k() as f64
        })
        .collect();
    Ok(EvalReport::from_breakdown("graph_accuracy", breakdown))
}

pub fn graph_accuracy(graph: &KnnGraph, gt: &GroundTruth) -> Result<f64> {
    graph_accuracy_report(graph, gt).map(|r| r.value)
}

/// For each `k'`, the fraction of graph edges whose target is among the
/// source's true `k'` nearest neighbors. `gt` must have at least
/// `max(k_list)` columns.
pub fn accuracy_vs_k_with_gt(
    graph: &KnnGraph,
    gt: &GroundTruth,
    k_list: &[usize],
) -> Result<Vec<(usize, f64)>> {
    if gt.n_queries() != graph.len() {
        return Err(Error::param("ground truth and graph differ in row count"));
    }
    k_list
        .iter()
        .map(|&kp| {
            if kp == 0 || kp > gt.k() {
                return Err(Error::param(format!(
                    "k' = {kp} outside 1..={} available ground-truth columns",
                    gt.k()
                )));
            }
            let mut hits = 0usize;
            for i in 0..graph.len() {
                let truth = &gt.row(i)[..kp];
                hits += graph.neighbors(i).iter().filter(|id| truth.contains(id)).count();
            }
            Ok((kp, hits as f64 / (graph.len() * graph.k()) as f64))
        })
        .collect()
}

/// [`accuracy_vs_k_with_gt`] with ground truth computed by brute force.
pub fn accuracy_vs_k(
    graph: &KnnGraph,
    vs: &VectorSet,
    k_list: &[usize],
) -> Result<Vec<(usize, f64)>> {
    let max_k = k_list.iter().copied().max().unwrap_or(0);
    if max_k == 0 {
        return Err(Error::param("k_list must contain a positive k'"));
    }
    let gt = brute_force_knn(vs, QuerySet::SelfJoin, max_k)?;
    accuracy_vs_k_with_gt(graph, &gt, k_list)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_self_join() {
        let vs = VectorSet::from_rows(&[vec![0.0f32], vec![1.0], vec![3.0]]).unwrap();
        let gt = brute_force_knn(&vs, QuerySet::SelfJoin, 1).unwrap();
        assert_eq!(gt.as_slice(), &[1, 0, 1]);
        assert!(brute_force_knn(&vs, QuerySet::SelfJoin, 3).is_err());
        assert!(brute_force_knn(&vs, QuerySet::External(&vs), 3).is_ok());
        assert!(brute_force_knn(&vs, QuerySet::External(&vs), 4).is_err());
    }

    #[test]
    fn query_equal_to_base_ranks_first() {
        let vs = VectorSet::from_rows(&[vec![0.0f32, 1.0], vec![5.0, 5.0], vec![2.0, 2.0]]).unwrap();
        let q = vs.select(&[1]).unwrap();
        let rows = brute_force_rows(&vs, QuerySet::External(&q), 2).unwrap();
        assert_eq!(rows[0][0], (1, 0.0));
    }

    #[test]
    fn ties_break_by_id() {
        let vs = VectorSet::from_rows(&[vec![0.0f32], vec![1.0], vec![-1.0], vec![1.0]]).unwrap();
        let gt = brute_force_knn(&vs, QuerySet::SelfJoin, 2).unwrap();
        assert_eq!(gt.row(0), &[1, 2]);
    }

    #[test]
    fn recall_examples() {
        assert_eq!(recall(&[1, 2, 3], &[3, 2, 1]), 1.0);
        assert_eq!(recall(&[4, 5], &[1, 2]), 0.0);
        assert_eq!(recall(&[1, 2, 3, 4], &[1, 2, 5, 6]), 0.5);
    }

    #[test]
    fn accuracy_is_order_free() {
        let vs = crate::dataset::gen_synthetic(60, 3, 1).unwrap();
        let g = brute_force_graph(&vs, 4).unwrap();
        let gt = g.to_ground_truth();
        assert_eq!(graph_accuracy(&g, &gt).unwrap(), 1.0);
        let reversed: Vec<Vec<u32>> = gt.rows().map(|r| r.iter().rev().copied().collect()).collect();
        let rev = GroundTruth::from_rows(&reversed).unwrap();
        assert_eq!(graph_accuracy(&g, &rev).unwrap(), 1.0);
        let table = accuracy_vs_k(&g, &vs, &[4, 59]).unwrap();
        assert_eq!(table, vec![(4, 1.0), (59, 1.0)]);
    }
}
