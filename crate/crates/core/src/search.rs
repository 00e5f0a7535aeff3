//! Online search: seed a candidate pool from the forest, then expand it
//! over the kNN graph.

use std::time::{Duration, Instant};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{sq_euclidean, GroundTruth, VectorSet};
use crate::error::{Error, Result};
use crate::eval;
use crate::graph::KnnGraph;
use crate::kd_forest::KdForest;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchParams {
    /// Results returned, `K`.
    pub k: usize,
    /// Candidate pool size `P`.
    pub pool_size: usize,
    /// Candidates kept after tree seeding, `E`.
    pub expansion: usize,
    /// Graph expansion rounds, `I`.
    pub iters: usize,
    /// Trees consulted during seeding.
    pub n_trees: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            k: 10,
            pool_size: 100,
            expansion: 50,
            iters: 4,
            n_trees: 8,
        }
    }
}

impl SearchParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > self.pool_size {
            return Err(Error::param(format!(
                "need 1 <= k ({}) <= pool size ({})",
                self.k, self.pool_size
            )));
        }
        if self.expansion == 0 || self.expansion > self.pool_size {
            return Err(Error::param(format!(
                "need 1 <= expansion ({}) <= pool size ({})",
                self.expansion, self.pool_size
            )));
        }
        Ok(())
    }

    /// Leaves visited per tree: `P / S_leaf / N_tree + 1` in integer
    /// arithmetic.
    pub fn leaves_per_tree(&self, leaf_cap: usize) -> usize {
        self.pool_size / leaf_cap.max(1) / self.n_trees.max(1) + 1
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub dist_comps: u64,
    pub leaves: u64,
    /// Candidates whose graph neighbors were expanded.
    pub hops: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub ids: Vec<u32>,
    pub dists: Vec<f32>,
    pub stats: SearchStats,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    dist: f32,
    id: u32,
}

fn by_dist(a: &Candidate, b: &Candidate) -> std::cmp::Ordering {
    a.dist.total_cmp(&b.dist).then(a.id.cmp(&b.id))
}

/// Per-query working memory. Visit marks are epoch stamps, so reuse across
/// queries costs nothing.
#[derive(Debug, Clone)]
pub struct SearchScratch {
    epoch: u32,
    seen: Vec<u32>,
    dist: Vec<f32>,
    in_pool: Vec<u32>,
    expanded: Vec<u32>,
    pool: Vec<Candidate>,
    buf: Vec<Candidate>,
}

impl SearchScratch {
    pub fn new(n: usize) -> Self {
        Self {
            epoch: 0,
            seen: vec![0; n],
            dist: vec![0.0; n],
            in_pool: vec![0; n],
            expanded: vec![0; n],
            pool: Vec::new(),
            buf: Vec::new(),
        }
    }

    fn next_epoch(&mut self) {
        if self.epoch == u32::MAX {
            self.epoch = 0;
            self.seen.fill(0);
            self.in_pool.fill(0);
            self.expanded.fill(0);
        }
        self.epoch += 1;
        self.pool.clear();
        self.buf.clear();
    }

    /// Distance to `id`, computed at most once per query.
    #[inline]
    fn distance(&mut self, vs: &VectorSet, q: &[f32], id: u32, stats: &mut SearchStats) -> f32 {
        let i = id as usize;
        if self.seen[i] == self.epoch {
            return self.dist[i];
        }
        self.seen[i] = self.epoch;
        stats.dist_comps += 1;
        let d = sq_euclidean(q, vs.row(i));
        self.dist[i] = d;
        d
    }
}

/// How the initial candidate pool is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Seeding {
    Forest,
    Random { seed: u64 },
}

/// Read-only search index over a dataset, its forest and its kNN graph.
#[derive(Debug, Clone, Copy)]
pub struct Searcher<'a> {
    vs: &'a VectorSet,
    forest: Option<&'a KdForest>,
    graph: &'a KnnGraph,
}

impl<'a> Searcher<'a> {
    pub fn new(vs: &'a VectorSet, forest: Option<&'a KdForest>, graph: &'a KnnGraph) -> Result<Self> {
        if vs.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if graph.len() != vs.len() {
            return Err(Error::param("graph and dataset differ in size"));
        }
        if let Some(f) = forest {
            if f.n_points() != vs.len() || f.dim() != vs.dim() {
                return Err(Error::param("forest and dataset differ in shape"));
            }
        }
        Ok(Self { vs, forest, graph })
    }

    pub fn scratch(&self) -> SearchScratch {
        SearchScratch::new(self.vs.len())
    }

    fn check(&self, q: &[f32], params: &SearchParams) -> Result<()> {
        params.validate()?;
        if q.len() != self.vs.dim() {
            return Err(Error::DimMismatch {
                expected: self.vs.dim(),
                found: q.len(),
            });
        }
        if params.k > self.vs.len() {
            return Err(Error::param(format!(
                "k = {} exceeds the {} indexed points",
                params.k,
                self.vs.len()
            )));
        }
        Ok(())
    }

    /// Tree-seeded search.
    pub fn search(
        &self,
        q: &[f32],
        params: &SearchParams,
        scratch: &mut SearchScratch,
    ) -> Result<SearchResult> {
        self.check(q, params)?;
        let forest = self
            .forest
            .ok_or_else(|| Error::param("tree-seeded search needs a forest"))?;
        if params.n_trees == 0 || params.n_trees > forest.trees().len() {
            return Err(Error::param(format!(
                "n_trees must lie in 1..={}",
                forest.trees().len()
            )));
        }
        scratch.next_epoch();
        let mut stats = SearchStats::default();
        let per_tree = params.leaves_per_tree(forest.leaf_cap());
        for tree in &forest.trees()[..params.n_trees] {
            for leaf in tree.search_leaves(q, per_tree) {
                stats.leaves += 1;
                for &p in tree.leaf_points(leaf) {
                    if scratch.seen[p as usize] != scratch.epoch {
                        let dist = scratch.distance(self.vs, q, p, &mut stats);
                        scratch.buf.push(Candidate { dist, id: p });
                    }
                }
            }
        }
        Ok(self.expand(q, params, scratch, stats))
    }

    /// Search seeded with `E` uniformly random points instead of the forest.
    pub fn search_random_init(
        &self,
        q: &[f32],
        params: &SearchParams,
        rng: &mut impl Rng,
        scratch: &mut SearchScratch,
    ) -> Result<SearchResult> {
        self.check(q, params)?;
        scratch.next_epoch();
        let mut stats = SearchStats::default();
        let m = params.expansion.min(self.vs.len());
        for p in index::sample(rng, self.vs.len(), m) {
            let dist = scratch.distance(self.vs, q, p as u32, &mut stats);
            scratch.buf.push(Candidate { dist, id: p as u32 });
        }
        Ok(self.expand(q, params, scratch, stats))
    }

    pub fn search_with(
        &self,
        q: &[f32],
        params: &SearchParams,
        seeding: Seeding,
        query_index: u64,
        scratch: &mut SearchScratch,
    ) -> Result<SearchResult> {
        match seeding {
            Seeding::Forest => self.search(q, params, scratch),
            Seeding::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(query_index);
                self.search_random_init(q, params, &mut rng, scratch)
            }
        }
    }

    /// Keeps the `E` closest seeds, then runs `I` rounds of graph expansion
    /// over a pool of at most `P`.
    fn expand(
        &self,
        q: &[f32],
        params: &SearchParams,
        scratch: &mut SearchScratch,
        mut stats: SearchStats,
    ) -> SearchResult {
        let epoch = scratch.epoch;
        let mut pool = std::mem::take(&mut scratch.pool);
        let mut buf = std::mem::take(&mut scratch.buf);
        buf.sort_unstable_by(by_dist);
        buf.truncate(params.expansion);
        pool.append(&mut buf);
        for c in &pool {
            scratch.in_pool[c.id as usize] = epoch;
        }

        for _ in 0..params.iters {
            let mut progressed = false;
            for idx in 0..pool.len() {
                let c = pool[idx].id as usize;
                if scratch.expanded[c] == epoch {
                    continue;
                }
                scratch.expanded[c] = epoch;
                stats.hops += 1;
                progressed = true;
                for &nn in self.graph.neighbors(c) {
                    if scratch.in_pool[nn as usize] == epoch {
                        continue;
                    }
                    scratch.in_pool[nn as usize] = epoch;
                    let dist = scratch.distance(self.vs, q, nn, &mut stats);
                    buf.push(Candidate { dist, id: nn });
                }
            }
            if !progressed {
                break;
            }
            pool.append(&mut buf);
            pool.sort_unstable_by(by_dist);
            for c in pool.iter().skip(params.pool_size) {
                scratch.in_pool[c.id as usize] = 0;
            }
            pool.truncate(params.pool_size);
        }

        let take = params.k.min(pool.len());
        let result = SearchResult {
            ids: pool[..take].iter().map(|c| c.id).collect(),
            dists: pool[..take].iter().map(|c| c.dist).collect(),
            stats,
        };
        scratch.pool = pool;
        scratch.buf = buf;
        result
    }
}

/// One query's outcome inside a batch run.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryOutcome {
    pub result: SearchResult,
    pub elapsed: Duration,
    pub recall: Option<f64>,
}

/// Runs every query sequentially, timing each search call alone.
pub fn batch_search(
    searcher: &Searcher<'_>,
    queries: &VectorSet,
    params: &SearchParams,
    seeding: Seeding,
    gt: Option<&GroundTruth>,
) -> Result<Vec<QueryOutcome>> {
    if let Some(gt) = gt {
        if gt.n_queries() != queries.len() || gt.k() < params.k {
            return Err(Error::param(format!(
                "ground truth is {}x{}, need {} rows of at least {}",
                gt.n_queries(),
                gt.k(),
                queries.len(),
                params.k
            )));
        }
    }
    let mut scratch = searcher.scratch();
    let mut out = Vec::with_capacity(queries.len());
    for (qi, q) in queries.rows().enumerate() {
        let start = Instant::now();
        let result = searcher.search_with(q, params, seeding, qi as u64, &mut scratch)?;
        let elapsed = start.elapsed();
        let recall = gt.map(|gt| eval::recall(&result.ids, &gt.row(qi)[..params.k]));
        out.push(QueryOutcome {
            result,
            elapsed,
            recall,
        });
    }
    Ok(out)
}

/// One point of a time/recall sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub expansion: usize,
    pub pool_size: usize,
    pub mean_time: Duration,
    pub recall: f64,
    pub mean_dist_comps: f64,
}

/// Average recall and per-query time for each `(E, P)` sweep point.
pub fn recall_curve(
    searcher: &Searcher<'_>,
    queries: &VectorSet,
    gt: &GroundTruth,
    base: &SearchParams,
    sweep: &[(usize, usize)],
    seeding: Seeding,
) -> Result<Vec<CurvePoint>> {
    if queries.is_empty() {
        return Err(Error::param("query set is empty"));
    }
    sweep
        .iter()
        .map(|&(expansion, pool_size)| {
            let params = SearchParams {
                expansion,
                pool_size,
                ..*base
            };
            let runs = batch_search(searcher, queries, &params, seeding, Some(gt))?;
            let nq = runs.len() as f64;
            let total: Duration = runs.iter().map(|r| r.elapsed).sum();
            Ok(CurvePoint {
                expansion,
                pool_size,
                mean_time: total / runs.len() as u32,
                recall: runs.iter().filter_map(|r| r.recall).sum::<f64>() / nq,
                mean_dist_comps: runs.iter().map(|r| r.result.stats.dist_comps as f64).sum::<f64>() / nq,
            })
        })
        .collect()
}
