//! Approximate kNN graph construction.
//!
//! Initialization conquers the forest's leaves hierarchically: every point
//! takes its own leaf plus, at each level from its leaf's parent up to the
//! conquer depth, the one leaf of the off-path sibling subtree that the
//! sibling's own splits assign the point to. Refinement is NN-descent
//! (local joins over new/old sampled neighbor lists) or, as a baseline,
//! NN-expansion over neighbors of neighbors.

use std::time::{Duration, Instant};

use rand::seq::index;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::{sq_euclidean, GroundTruth, VectorSet};
use crate::error::{Error, Result};
use crate::eval;
use crate::graph::KnnGraph;
use crate::kd_forest::{KdForest, KdNode};
use crate::pool::{NeighborEntry, NeighborPool};

/// Per-point neighbor pools plus the NN-descent bookkeeping lists.
#[derive(Debug, Clone)]
pub struct RefineState {
    pools: Vec<NeighborPool>,
    g_new: Vec<Vec<u32>>,
    g_old: Vec<Vec<u32>>,
    g_rnew: Vec<Vec<u32>>,
    g_rold: Vec<Vec<u32>>,
    sample_cap: usize,
    sampled: bool,
    iteration: usize,
    dist_comps: u64,
    rng: ChaCha8Rng,
}

impl RefineState {
    /// Wraps initial pools. `sample_cap` defaults to the pool capacity.
    pub fn from_pools(pools: Vec<NeighborPool>, dist_comps: u64) -> Self {
        let n = pools.len();
        let sample_cap = pools.first().map_or(1, NeighborPool::capacity);
        Self {
            pools,
            g_new: vec![Vec::new(); n],
            g_old: vec![Vec::new(); n],
            g_rnew: vec![Vec::new(); n],
            g_rold: vec![Vec::new(); n],
            sample_cap,
            sampled: false,
            iteration: 0,
            dist_comps,
            rng: ChaCha8Rng::seed_from_u64(0),
        }
    }

    /// Sets the per-iteration new-neighbor sample size `L` and the seed of
    /// the reverse-list sampler.
    pub fn with_sampling(mut self, sample_cap: usize, seed: u64) -> Self {
        self.sample_cap = sample_cap.max(1);
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self
    }

    pub fn pools(&self) -> &[NeighborPool] {
        &self.pools
    }

    pub fn len(&self) -> usize {
        self.pools.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pools.is_empty()
    }

    pub fn sample_cap(&self) -> usize {
        self.sample_cap
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Distance evaluations so far, initialization included.
    pub fn dist_comps(&self) -> u64 {
        self.dist_comps
    }

    pub fn new_lists(&self) -> &[Vec<u32>] {
        &self.g_new
    }

    pub fn old_lists(&self) -> &[Vec<u32>] {
        &self.g_old
    }

    /// Accuracy of the pools' top-`k` against exact ground truth.
    pub fn accuracy(&self, gt: &GroundTruth) -> f64 {
        let k = gt.k();
        let hits: usize = self
            .pools
            .iter()
            .enumerate()
            .map(|(i, p)| p.ids().take(k).filter(|id| gt.row(i).contains(id)).count())
            .sum();
        hits as f64 / (self.pools.len() * k) as f64
    }

    /// Moves up to `L` new entries of each pool (nearest first) into the new
    /// list, clearing their flag; old entries met before that go to the old
    /// list. On the first call the sampled edges also seed the reverse lists.
    fn sample(&mut self) {
        let first = !self.sampled;
        self.sampled = true;
        for (i, pool) in self.pools.iter_mut().enumerate() {
            let new = &mut self.g_new[i];
            let old = &mut self.g_old[i];
            new.clear();
            old.clear();
            for e in pool.entries_mut() {
                if new.len() >= self.sample_cap {
                    break;
                }
                if e.flag_new {
                    e.flag_new = false;
                    new.push(e.id);
                } else {
                    old.push(e.id);
                }
            }
        }
        if first {
            for i in 0..self.g_new.len() {
                for j in 0..self.g_new[i].len() {
                    let target = self.g_new[i][j] as usize;
                    self.g_rnew[target].push(i as u32);
                }
            }
        }
        let cap = self.sample_cap;
        for i in 0..self.pools.len() {
            let rnew = std::mem::take(&mut self.g_rnew[i]);
            let rold = std::mem::take(&mut self.g_rold[i]);
            union_sampled(&mut self.g_new[i], rnew, cap, &mut self.rng);
            union_sampled(&mut self.g_old[i], rold, cap, &mut self.rng);
        }
    }

    /// One NN-descent iteration. Returns the number of pool insertions.
    pub fn step_nn_descent(&mut self, vs: &VectorSet) -> u64 {
        if !self.sampled {
            self.sample();
        }
        let n = self.pools.len();
        let mut updates = 0u64;
        let mut comps = 0u64;
        for i in 0..n {
            let nn_new = std::mem::take(&mut self.g_new[i]);
            let nn_old = std::mem::take(&mut self.g_old[i]);
            for (a, &j) in nn_new.iter().enumerate() {
                for &k in &nn_new[a + 1..] {
                    if j == k {
                        continue;
                    }
                    let d = sq_euclidean(vs.row(j as usize), vs.row(k as usize));
                    comps += 1;
                    if self.pools[j as usize].insert(k, d, true) {
                        updates += 1;
                        self.g_rnew[k as usize].push(j);
                    }
                    if self.pools[k as usize].insert(j, d, true) {
                        updates += 1;
                        self.g_rnew[j as usize].push(k);
                    }
                }
                for &l in &nn_old {
                    if j == l {
                        continue;
                    }
                    let d = sq_euclidean(vs.row(j as usize), vs.row(l as usize));
                    comps += 1;
                    if self.pools[j as usize].insert(l, d, false) {
                        updates += 1;
                        self.g_rold[l as usize].push(j);
                    }
                    if self.pools[l as usize].insert(j, d, false) {
                        updates += 1;
                        self.g_rold[j as usize].push(l);
                    }
                }
            }
        }
        self.sample();
        self.dist_comps += comps;
        self.iteration += 1;
        updates
    }

    /// One NN-expansion iteration: every point measures itself against the
    /// neighbors of its not-yet-expanded neighbors. Returns the number of
    /// pool insertions.
    pub fn step_nn_expansion(&mut self, vs: &VectorSet) -> u64 {
        let n = self.pools.len();
        let snapshot: Vec<Vec<u32>> = self.pools.iter().map(|p| p.ids().collect()).collect();
        let mut stamp = vec![u32::MAX; n];
        let mut updates = 0u64;
        let mut comps = 0u64;
        for i in 0..n {
            let tag = i as u32;
            stamp[i] = tag;
            for &j in &snapshot[i] {
                stamp[j as usize] = tag;
            }
            let to_expand: Vec<u32> = self.pools[i]
                .entries_mut()
                .iter_mut()
                .filter(|e| !e.checked)
                .map(|e| {
                    e.checked = true;
                    e.id
                })
                .collect();
            let x = vs.row(i);
            for j in to_expand {
                for &m in &snapshot[j as usize] {
                    if stamp[m as usize] == tag {
                        continue;
                    }
                    stamp[m as usize] = tag;
                    let d = sq_euclidean(x, vs.row(m as usize));
                    comps += 1;
                    if self.pools[i].insert(m, d, true) {
                        updates += 1;
                    }
                }
            }
        }
        self.dist_comps += comps;
        self.iteration += 1;
        updates
    }

    /// Runs up to `max_iters` NN-descent iterations, stopping early once an
    /// iteration inserts fewer than `min_update_frac` of all pool slots.
    /// Returns the number of iterations run.
    pub fn refine_nn_descent(&mut self, vs: &VectorSet, max_iters: usize, min_update_frac: f64) -> usize {
        self.refine(vs, max_iters, min_update_frac, Self::step_nn_descent)
    }

    pub fn refine_nn_expansion(&mut self, vs: &VectorSet, max_iters: usize, min_update_frac: f64) -> usize {
        self.refine(vs, max_iters, min_update_frac, Self::step_nn_expansion)
    }

    fn refine(
        &mut self,
        vs: &VectorSet,
        max_iters: usize,
        min_update_frac: f64,
        step: fn(&mut Self, &VectorSet) -> u64,
    ) -> usize {
        for it in 0..max_iters {
            let updates = step(self, vs);
            if self.converged(updates, min_update_frac) {
                return it + 1;
            }
        }
        max_iters
    }

    fn converged(&self, updates: u64, min_update_frac: f64) -> bool {
        let slots: usize = self.pools.iter().map(NeighborPool::capacity).sum();
        (updates as f64) < min_update_frac * slots as f64
    }

    /// The `k` closest entries of every pool.
    pub fn finalize(&self, k: usize) -> Result<KnnGraph> {
        let n = self.pools.len();
        if k == 0 || k + 1 > n {
            return Err(Error::param(format!(
                "graph width {k} needs at least {} points, have {n}",
                k + 1
            )));
        }
        let mut rows = Vec::with_capacity(n);
        for (i, p) in self.pools.iter().enumerate() {
            if p.len() < k {
                return Err(Error::InvalidIndex(format!(
                    "pool of point {i} holds {} entries, fewer than k = {k}",
                    p.len()
                )));
            }
            rows.push(p.entries()[..k].iter().map(|e| (e.id, e.dist)).collect());
        }
        KnnGraph::from_rows(k, &rows)
    }
}

/// Appends a uniform sample of at most `cap` reverse ids, then dedups.
fn union_sampled(list: &mut Vec<u32>, mut reverse: Vec<u32>, cap: usize, rng: &mut ChaCha8Rng) {
    if reverse.is_empty() {
        return;
    }
    reverse.sort_unstable();
    reverse.dedup();
    if reverse.len() > cap {
        let (picked, _) = reverse.partial_shuffle(rng, cap);
        list.extend_from_slice(picked);
    } else {
        list.extend_from_slice(&reverse);
    }
    list.sort_unstable();
    list.dedup();
}

/// Divide-and-conquer initialization over the forest.
///
/// Pools hold the closest `pool_cap` distinct candidates, all flagged new.
/// Points that collect fewer than `min_fill` candidates are topped up with
/// seeded random points so every pool can export a full row.
pub fn init_graph(
    vs: &VectorSet,
    forest: &KdForest,
    conquer_depth: u32,
    pool_cap: usize,
    min_fill: usize,
    seed: u64,
) -> Result<RefineState> {
    let n = vs.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if forest.n_points() != n || forest.dim() != vs.dim() {
        return Err(Error::param("forest was built over a different dataset"));
    }
    if pool_cap == 0 {
        return Err(Error::param("pool capacity must be at least 1"));
    }
    let min_fill = min_fill.min(pool_cap).min(n - 1);

    let results: Vec<(NeighborPool, u64)> = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![u32::MAX; n], Vec::new()),
            |(stamp, cand), i| {
                cand.clear();
                conquer_candidates(forest, vs.row(i), i, conquer_depth, stamp, cand);
                if cand.len() < min_fill {
                    top_up(cand, stamp, i, n, min_fill, seed);
                }
                let x = vs.row(i);
                let pool = NeighborPool::from_candidates(
                    pool_cap,
                    cand.iter()
                        .map(|&c| NeighborEntry::new(c, sq_euclidean(x, vs.row(c as usize)), true)),
                );
                (pool, cand.len() as u64)
            },
        )
        .collect();
    let comps = results.iter().map(|r| r.1).sum();
    let pools = results.into_iter().map(|r| r.0).collect();
    Ok(RefineState::from_pools(pools, comps))
}

/// Collects the distinct candidate ids (excluding `i`) that the conquer step
/// assigns to point `i` across all trees.
pub fn conquer_candidates(
    forest: &KdForest,
    x: &[f32],
    i: usize,
    conquer_depth: u32,
    stamp: &mut [u32],
    out: &mut Vec<u32>,
) {
    let tag = i as u32;
    stamp[i] = tag;
    let mut add = |pts: &[u32], out: &mut Vec<u32>| {
        for &p in pts {
            if stamp[p as usize] != tag {
                stamp[p as usize] = tag;
                out.push(p);
            }
        }
    };
    for tree in forest.trees() {
        let leaf = tree.leaf_of(i);
        add(tree.leaf_points(leaf), out);
        let mut child = leaf;
        while let Some(parent) = tree.parent(child) {
            let KdNode::Internal { left, right, depth, .. } = *tree.node(parent) else {
                unreachable!("parents are internal nodes");
            };
            if depth < conquer_depth {
                break;
            }
            let sibling = if left == child { right } else { left };
            add(tree.leaf_points(tree.descend_from(x, sibling)), out);
            child = parent;
        }
    }
}

fn top_up(cand: &mut Vec<u32>, stamp: &mut [u32], i: usize, n: usize, want: usize, seed: u64) {
    let tag = i as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    // Drawing want + |cand| distinct ids from the n - 1 others always
    // leaves at least `want` unseen ones.
    let draw = (want + cand.len()).min(n - 1);
    for idx in index::sample(&mut rng, n - 1, draw) {
        if cand.len() >= want {
            break;
        }
        let p = if idx >= i { idx + 1 } else { idx };
        if stamp[p] != tag {
            stamp[p] = tag;
            cand.push(p as u32);
        }
    }
}

/// Random initialization: each pool gets `pool_cap` distinct random points.
pub fn random_init(vs: &VectorSet, pool_cap: usize, seed: u64) -> Result<RefineState> {
    let n = vs.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if pool_cap == 0 {
        return Err(Error::param("pool capacity must be at least 1"));
    }
    let m = pool_cap.min(n - 1);
    let results: Vec<NeighborPool> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let x = vs.row(i);
            NeighborPool::from_candidates(
                pool_cap,
                index::sample(&mut rng, n - 1, m).into_iter().map(|idx| {
                    let p = if idx >= i { idx + 1 } else { idx };
                    NeighborEntry::new(p as u32, sq_euclidean(x, vs.row(p)), true)
                }),
            )
        })
        .collect();
    Ok(RefineState::from_pools(results, (n * m) as u64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitStrategy {
    Forest,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefineStrategy {
    None,
    NnDescent,
    NnExpansion,
}

/// Named end-to-end construction recipes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Forest initialization refined by NN-descent.
    EfannaDescent,
    /// Random initialization refined by NN-descent.
    RandomDescent,
    /// Random initialization refined by NN-expansion.
    NnExpansion,
    /// Exact graph by exhaustive comparison.
    BruteForce,
    /// Custom pairing of initialization and refinement.
    Custom(InitStrategy, RefineStrategy),
}

impl Strategy {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "efanna" | "efanna_init+nn_descent" => Strategy::EfannaDescent,
            "random" | "random_init+nn_descent" => Strategy::RandomDescent,
            "nn_expansion" => Strategy::NnExpansion,
            "brute_force" => Strategy::BruteForce,
            "efanna_init" | "none" => Strategy::Custom(InitStrategy::Forest, RefineStrategy::None),
            "random_init" => Strategy::Custom(InitStrategy::Random, RefineStrategy::None),
            "efanna_init+nn_expansion" => {
                Strategy::Custom(InitStrategy::Forest, RefineStrategy::NnExpansion)
            }
            other => return Err(Error::param(format!("unknown strategy {other:?}"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::EfannaDescent => "efanna_init+nn_descent",
            Strategy::RandomDescent => "random_init+nn_descent",
            Strategy::NnExpansion => "nn_expansion",
            Strategy::BruteForce => "brute_force",
            Strategy::Custom(InitStrategy::Forest, RefineStrategy::None) => "efanna_init",
            Strategy::Custom(InitStrategy::Forest, RefineStrategy::NnDescent) => {
                "efanna_init+nn_descent"
            }
            Strategy::Custom(InitStrategy::Forest, RefineStrategy::NnExpansion) => {
                "efanna_init+nn_expansion"
            }
            Strategy::Custom(InitStrategy::Random, RefineStrategy::None) => "random_init",
            Strategy::Custom(InitStrategy::Random, RefineStrategy::NnDescent) => {
                "random_init+nn_descent"
            }
            Strategy::Custom(InitStrategy::Random, RefineStrategy::NnExpansion) => "nn_expansion",
        }
    }

    fn stages(&self) -> Option<(InitStrategy, RefineStrategy)> {
        match *self {
            Strategy::EfannaDescent => Some((InitStrategy::Forest, RefineStrategy::NnDescent)),
            Strategy::RandomDescent => Some((InitStrategy::Random, RefineStrategy::NnDescent)),
            Strategy::NnExpansion => Some((InitStrategy::Random, RefineStrategy::NnExpansion)),
            Strategy::BruteForce => None,
            Strategy::Custom(i, r) => Some((i, r)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphParams {
    /// Graph width `k`.
    pub k: usize,
    /// Shallowest tree level merged during initialization (`Dep`).
    pub conquer_depth: u32,
    /// Pool capacity `P`.
    pub pool_cap: usize,
    /// New-neighbor sample size `L`.
    pub sample_cap: usize,
    pub max_iters: usize,
    /// Early stop once an iteration inserts fewer than this fraction of
    /// pool slots.
    pub min_update_frac: f64,
    pub seed: u64,
}

impl Default for GraphParams {
    fn default() -> Self {
        Self {
            k: 10,
            conquer_depth: 4,
            pool_cap: 30,
            sample_cap: 20,
            max_iters: 10,
            min_update_frac: 0.001,
            seed: 1,
        }
    }
}

impl GraphParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::param("k must be at least 1"));
        }
        if self.pool_cap < self.k {
            return Err(Error::param(format!(
                "pool capacity {} is below k = {}",
                self.pool_cap, self.k
            )));
        }
        if self.sample_cap == 0 {
            return Err(Error::param("sample cap must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.min_update_frac) {
            return Err(Error::param("min_update_frac must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// One row of the construction log. Iteration 0 is the initial graph.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationLog {
    pub iteration: usize,
    /// Construction time so far, evaluation excluded.
    pub elapsed: Duration,
    pub dist_comps: u64,
    pub updates: u64,
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BuildStats {
    pub init_time: Duration,
    pub total_time: Duration,
    pub dist_comps: u64,
    pub iterations: Vec<IterationLog>,
}

impl BuildStats {
    /// First logged point at which accuracy reached `target`.
    pub fn first_reaching(&self, target: f64) -> Option<&IterationLog> {
        self.iterations
            .iter()
            .find(|l| l.accuracy.is_some_and(|a| a >= target))
    }

    /// Seconds and distance computations at which the logged accuracy
    /// curve crosses `target`, interpolating linearly between the two
    /// bracketing log rows.
    pub fn cost_to_reach(&self, target: f64) -> Option<(f64, f64)> {
        let hit = self
            .iterations
            .iter()
            .position(|l| l.accuracy.is_some_and(|a| a >= target))?;
        let b = &self.iterations[hit];
        let point = |l: &IterationLog| (l.elapsed.as_secs_f64(), l.dist_comps as f64);
        if hit == 0 {
            return Some(point(b));
        }
        let a = &self.iterations[hit - 1];
        let (acc_a, acc_b) = (a.accuracy?, b.accuracy?);
        let w = if acc_b > acc_a { (target - acc_a) / (acc_b - acc_a) } else { 1.0 };
        let (ta, ca) = point(a);
        let (tb, cb) = point(b);
        Some((ta + w * (tb - ta), ca + w * (cb - ca)))
    }
}

/// Initialization, refinement and export in one call. When `gt` is given
/// its accuracy is logged after every iteration (outside the timed region).
pub fn build_graph(
    vs: &VectorSet,
    forest: Option<&KdForest>,
    params: &GraphParams,
    strategy: Strategy,
    gt: Option<&GroundTruth>,
) -> Result<(KnnGraph, BuildStats)> {
    params.validate()?;
    if vs.len() < params.k + 1 {
        return Err(Error::param(format!(
            "graph width {} needs at least {} points",
            params.k,
            params.k + 1
        )));
    }
    if let Some(gt) = gt {
        if gt.k() != params.k || gt.n_queries() != vs.len() {
            return Err(Error::param("ground truth shape does not match the graph"));
        }
    }

    let Some((init, refine)) = strategy.stages() else {
        let start = Instant::now();
        let graph = eval::brute_force_graph(vs, params.k)?;
        let elapsed = start.elapsed();
        let n = vs.len() as u64;
        let comps = n * (n - 1) / 2;
        let accuracy = gt.map(|gt| eval::graph_accuracy(&graph, gt)).transpose()?;
        let stats = BuildStats {
            init_time: elapsed,
            total_time: elapsed,
            dist_comps: comps,
            iterations: vec![IterationLog {
                iteration: 0,
                elapsed,
                dist_comps: comps,
                updates: 0,
                accuracy,
            }],
        };
        return Ok((graph, stats));
    };

    let start = Instant::now();
    let state = match init {
        InitStrategy::Forest => {
            let forest = forest.ok_or_else(|| Error::param("forest initialization needs a forest"))?;
            init_graph(vs, forest, params.conquer_depth, params.pool_cap, params.k, params.seed)?
        }
        InitStrategy::Random => random_init(vs, params.pool_cap, params.seed)?,
    };
    let mut state = state.with_sampling(params.sample_cap, params.seed);
    let init_time = start.elapsed();
    let mut timed = init_time;
    let mut stats = BuildStats {
        init_time,
        ..Default::default()
    };
    stats.iterations.push(IterationLog {
        iteration: 0,
        elapsed: timed,
        dist_comps: state.dist_comps(),
        updates: 0,
        accuracy: gt.map(|gt| state.accuracy(gt)),
    });

    if refine != RefineStrategy::None {
        for _ in 0..params.max_iters {
            let t = Instant::now();
            let updates = match refine {
                RefineStrategy::NnDescent => state.step_nn_descent(vs),
                RefineStrategy::NnExpansion => state.step_nn_expansion(vs),
                RefineStrategy::None => unreachable!(),
            };
            timed += t.elapsed();
            stats.iterations.push(IterationLog {
                iteration: state.iteration(),
                elapsed: timed,
                dist_comps: state.dist_comps(),
                updates,
                accuracy: gt.map(|gt| state.accuracy(gt)),
            });
            if state.converged(updates, params.min_update_frac) {
                break;
            }
        }
    }

    let t = Instant::now();
    let graph = state.finalize(params.k)?;
    timed += t.elapsed();
    stats.total_time = timed;
    stats.dist_comps = state.dist_comps();
    Ok((graph, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::gen_synthetic;
    use crate::eval::{brute_force_rows, QuerySet};
    use crate::kd_forest::build_forest;

    #[test]
    fn single_leaf_init_is_brute_force() {
        let vs = gen_synthetic(30, 4, 3).unwrap();
        let forest = build_forest(&vs, 2, 64, 1).unwrap();
        let state = init_graph(&vs, &forest, 0, 5, 5, 0).unwrap();
        let exact = brute_force_rows(&vs, QuerySet::SelfJoin, 5).unwrap();
        for (pool, row) in state.pools().iter().zip(&exact) {
            let got: Vec<(u32, f32)> = pool.entries().iter().map(|e| (e.id, e.dist)).collect();
            assert_eq!(&got, row);
            assert!(pool.entries().iter().all(|e| e.flag_new && !e.checked));
        }
        assert_eq!(state.dist_comps(), 30 * 29);
    }

    #[test]
    fn depth_one_tree_conquers_both_leaves() {
        let vs = VectorSet::from_rows(&[vec![0.0f32], vec![1.0], vec![10.0], vec![11.0]]).unwrap();
        let forest = build_forest(&vs, 1, 2, 0).unwrap();
        let mut stamp = vec![u32::MAX; 4];
        let mut cand = Vec::new();
        conquer_candidates(&forest, vs.row(0), 0, 0, &mut stamp, &mut cand);
        cand.sort_unstable();
        assert_eq!(cand, vec![1, 2, 3]);

        // Conquer depth below the tree: own leaf only.
        let mut stamp = vec![u32::MAX; 4];
        let mut cand = Vec::new();
        conquer_candidates(&forest, vs.row(0), 0, 5, &mut stamp, &mut cand);
        assert_eq!(cand, vec![1]);
    }

    #[test]
    fn two_points_fixed_point() {
        let vs = VectorSet::from_rows(&[vec![0.0f32, 0.0], vec![1.0, 1.0]]).unwrap();
        let forest = build_forest(&vs, 1, 1, 0).unwrap();
        let mut state = init_graph(&vs, &forest, 0, 4, 1, 0).unwrap();
        let before: Vec<Vec<u32>> = state.pools().iter().map(|p| p.ids().collect()).collect();
        assert_eq!(before, vec![vec![1], vec![0]]);
        state.step_nn_descent(&vs);
        state.step_nn_expansion(&vs);
        let after: Vec<Vec<u32>> = state.pools().iter().map(|p| p.ids().collect()).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn exact_graph_is_a_fixed_point() {
        let vs = gen_synthetic(150, 6, 8).unwrap();
        let exact = brute_force_rows(&vs, QuerySet::SelfJoin, 8).unwrap();
        let pools: Vec<NeighborPool> = exact
            .iter()
            .map(|r| NeighborPool::from_candidates(8, r.iter().map(|&(id, d)| NeighborEntry::new(id, d, false))))
            .collect();
        let mut a = RefineState::from_pools(pools, 0).with_sampling(8, 1);
        let mut b = a.clone();
        a.step_nn_descent(&vs);
        b.step_nn_expansion(&vs);
        for s in [&a, &b] {
            for (p, r) in s.pools().iter().zip(&exact) {
                assert_eq!(p.ids().collect::<Vec<_>>(), r.iter().map(|x| x.0).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn sample_bound_and_no_self_loops() {
        let vs = gen_synthetic(400, 8, 2).unwrap();
        let mut state = random_init(&vs, 12, 3).unwrap().with_sampling(4, 9);
        for _ in 0..3 {
            state.step_nn_descent(&vs);
            for (i, p) in state.pools().iter().enumerate() {
                assert!(!p.contains(i as u32));
                let mut ids: Vec<u32> = p.ids().collect();
                ids.sort_unstable();
                ids.dedup();
                assert_eq!(ids.len(), p.len());
                for e in p.entries().iter().step_by(5) {
                    assert_eq!(e.dist, vs.dist_sq(i, e.id as usize).unwrap());
                }
            }
            // Forward samples (≤ L) plus sampled reverse ids (≤ L).
            assert!(state.new_lists().iter().all(|l| l.len() <= 8));
        }
    }

    #[test]
    fn finalize_errors() {
        let vs = gen_synthetic(5, 2, 1).unwrap();
        let state = random_init(&vs, 4, 0).unwrap();
        assert!(state.finalize(5).is_err());
        assert_eq!(state.finalize(4).unwrap().k(), 4);
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in [
            Strategy::EfannaDescent,
            Strategy::RandomDescent,
            Strategy::NnExpansion,
            Strategy::BruteForce,
        ] {
            assert_eq!(Strategy::parse(s.name()).unwrap(), s);
        }
        assert!(Strategy::parse("bogus").is_err());
    }
}
