//! Randomized truncated KD-trees.
//!
//! Each tree splits on a uniformly random dimension at the mean value and
//! stops once a node holds at most `leaf_cap` points. Leaves own contiguous
//! ranges of a per-tree permutation of the point ids.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::{write_file, VectorSet};
use crate::error::{Error, Result};

pub type NodeId = u32;

const NO_PARENT: NodeId = NodeId::MAX;

/// Mean splits more lopsided than this fall back to a median split.
const MAX_IMBALANCE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KdNode {
    Internal {
        split_dim: u32,
        split_val: f32,
        left: NodeId,
        right: NodeId,
        depth: u32,
    },
    Leaf {
        start: u32,
        end: u32,
        depth: u32,
    },
}

impl KdNode {
    pub fn depth(&self) -> u32 {
        match *self {
            KdNode::Internal { depth, .. } | KdNode::Leaf { depth, .. } => depth,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, KdNode::Leaf { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KdTree {
    nodes: Vec<KdNode>,
    leaf_cap: usize,
    point_index: Vec<u32>,
    parent: Vec<NodeId>,
    leaf_of: Vec<NodeId>,
    n_leaves: usize,
}

impl KdTree {
    fn from_parts(nodes: Vec<KdNode>, leaf_cap: usize, point_index: Vec<u32>) -> Self {
        let mut parent = vec![NO_PARENT; nodes.len()];
        let mut leaf_of = vec![NO_PARENT; point_index.len()];
        let mut n_leaves = 0;
        for (id, node) in nodes.iter().enumerate() {
            match *node {
                KdNode::Internal { left, right, .. } => {
                    parent[left as usize] = id as NodeId;
                    parent[right as usize] = id as NodeId;
                }
                KdNode::Leaf { start, end, .. } => {
                    n_leaves += 1;
                    for &p in &point_index[start as usize..end as usize] {
                        leaf_of[p as usize] = id as NodeId;
                    }
                }
            }
        }
        Self {
            nodes,
            leaf_cap,
            point_index,
            parent,
            leaf_of,
            n_leaves,
        }
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn nodes(&self) -> &[KdNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &KdNode {
        &self.nodes[id as usize]
    }

    pub fn leaf_cap(&self) -> usize {
        self.leaf_cap
    }

    pub fn point_index(&self) -> &[u32] {
        &self.point_index
    }

    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    /// Depth of the deepest leaf.
    pub fn height(&self) -> u32 {
        self.nodes.iter().map(KdNode::depth).max().unwrap_or(0)
    }

    /// The leaf whose range holds base point `p`.
    pub fn leaf_of(&self, p: usize) -> NodeId {
        self.leaf_of[p]
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        let p = self.parent[id as usize];
        (p != NO_PARENT).then_some(p)
    }

    /// Point ids owned by a leaf. Empty for internal nodes.
    pub fn leaf_points(&self, id: NodeId) -> &[u32] {
        match *self.node(id) {
            KdNode::Leaf { start, end, .. } => &self.point_index[start as usize..end as usize],
            KdNode::Internal { .. } => &[],
        }
    }

    /// Follows the split rule from `node` down to a leaf. Ties go left.
    pub fn descend_from(&self, q: &[f32], node: NodeId) -> NodeId {
        let mut cur = node;
        loop {
            match *self.node(cur) {
                KdNode::Leaf { .. } => return cur,
                KdNode::Internal {
                    split_dim,
                    split_val,
                    left,
                    right,
                    ..
                } => {
                    cur = if q[split_dim as usize] <= split_val {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    /// Best-bin-first leaf enumeration. The first leaf is the pure descent
    /// leaf; each later one is the cheapest unexplored branch, where a
    /// branch costs the sum of `|q[dim] - split|` over the splits it crosses
    /// to the far side. `n_leaves` is clamped to the tree's leaf count.
    pub fn search_leaves(&self, q: &[f32], n_leaves: usize) -> Vec<NodeId> {
        let want = n_leaves.min(self.n_leaves);
        let mut out = Vec::with_capacity(want);
        let mut heap = BinaryHeap::new();
        heap.push(Branch {
            cost: 0.0,
            node: self.root(),
        });
        while out.len() < want {
            let Some(Branch { cost, node }) = heap.pop() else {
                break;
            };
            let mut cur = node;
            loop {
                match *self.node(cur) {
                    KdNode::Leaf { .. } => {
                        out.push(cur);
                        break;
                    }
                    KdNode::Internal {
                        split_dim,
                        split_val,
                        left,
                        right,
                        ..
                    } => {
                        let diff = q[split_dim as usize] - split_val;
                        let (near, far) = if diff <= 0.0 {
                            (left, right)
                        } else {
                            (right, left)
                        };
                        heap.push(Branch {
                            cost: cost + diff.abs(),
                            node: far,
                        });
                        cur = near;
                    }
                }
            }
        }
        out
    }
}

/// Min-heap entry ordered by (cost, node).
#[derive(Debug, Clone, Copy)]
struct Branch {
    cost: f32,
    node: NodeId,
}

impl PartialEq for Branch {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Branch {}

impl PartialOrd for Branch {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Branch {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

struct TreeBuilder<'a> {
    vs: &'a VectorSet,
    leaf_cap: usize,
    rng: ChaCha8Rng,
    nodes: Vec<KdNode>,
    point_index: Vec<u32>,
}

impl TreeBuilder<'_> {
    fn build(mut self) -> KdTree {
        self.split(0, self.point_index.len(), 0);
        KdTree::from_parts(self.nodes, self.leaf_cap, self.point_index)
    }

    fn split(&mut self, start: usize, end: usize, depth: u32) -> NodeId {
        let id = self.nodes.len() as NodeId;
        let leaf = KdNode::Leaf {
            start: start as u32,
            end: end as u32,
            depth,
        };
        self.nodes.push(leaf);
        let len = end - start;
        if len <= self.leaf_cap {
            return id;
        }

        let vs = self.vs;
        let dim = self.rng.gen_range(0..vs.dim());
        let value = |p: u32| vs.row(p as usize)[dim];
        let points = &mut self.point_index[start..end];

        let sum: f64 = points.iter().map(|&p| value(p) as f64).sum();
        let mut split_val = (sum / len as f64) as f32;
        let mut n_left = partition(points, |p| value(p) <= split_val);
        let n_right = len - n_left;
        if n_left == 0 || n_right == 0 || n_left.max(n_right) > MAX_IMBALANCE * n_left.min(n_right)
        {
            points.sort_unstable_by(|&a, &b| value(a).total_cmp(&value(b)).then(a.cmp(&b)));
            n_left = len / 2;
            let lo = value(points[n_left - 1]);
            let hi = value(points[n_left]);
            split_val = (lo + (hi - lo) * 0.5).clamp(lo, hi);
        }

        let left = self.split(start, start + n_left, depth + 1);
        let right = self.split(start + n_left, end, depth + 1);
        self.nodes[id as usize] = KdNode::Internal {
            split_dim: dim as u32,
            split_val,
            left,
            right,
            depth,
        };
        id
    }
}

/// In-place two-way partition; returns the count of elements satisfying `pred`,
/// which end up first.
fn partition(xs: &mut [u32], pred: impl Fn(u32) -> bool) -> usize {
    let mut first = 0;
    for i in 0..xs.len() {
        if pred(xs[i]) {
            xs.swap(first, i);
            first += 1;
        }
    }
    first
}

#[derive(Debug, Clone, PartialEq)]
pub struct KdForest {
    trees: Vec<KdTree>,
    n: usize,
    dim: usize,
    leaf_cap: usize,
    seed: u64,
}

/// Builds `n_trees` independent trees. Tree `t` draws its split dimensions
/// from ChaCha stream `t` keyed by `seed`, so the result does not depend on
/// build order or thread count.
pub fn build_forest(
    vs: &VectorSet,
    n_trees: usize,
    leaf_cap: usize,
    seed: u64,
) -> Result<KdForest> {
    if vs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if n_trees == 0 {
        return Err(Error::param("n_trees must be at least 1"));
    }
    if leaf_cap == 0 {
        return Err(Error::param("leaf_cap must be at least 1"));
    }
    let trees = (0..n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            TreeBuilder {
                vs,
                leaf_cap,
                rng,
                nodes: Vec::new(),
                point_index: (0..vs.len() as u32).collect(),
            }
            .build()
        })
        .collect();
    Ok(KdForest {
        trees,
        n: vs.len(),
        dim: vs.dim(),
        leaf_cap,
        seed,
    })
}

const MAGIC: &[u8; 8] = b"KDFOREST";
const VERSION: u32 = 1;

impl KdForest {
    pub fn trees(&self) -> &[KdTree] {
        &self.trees
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn leaf_cap(&self) -> usize {
        self.leaf_cap
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Serializes to the little-endian index layout: a fixed header, then per
    /// tree a node count, fixed-width node records and the point permutation.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.n as u64).to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.trees.len() as u32).to_le_bytes());
        out.extend_from_slice(&(self.leaf_cap as u32).to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        for tree in &self.trees {
            out.extend_from_slice(&(tree.nodes.len() as u32).to_le_bytes());
            for node in &tree.nodes {
                let (tag, depth, a, b, c, d) = match *node {
                    KdNode::Leaf { start, end, depth } => (0u8, depth, start, end, 0, 0),
                    KdNode::Internal {
                        split_dim,
                        split_val,
                        left,
                        right,
                        depth,
                    } => (1u8, depth, split_dim, split_val.to_bits(), left, right),
                };
                out.push(tag);
                for w in [depth, a, b, c, d] {
                    out.extend_from_slice(&w.to_le_bytes());
                }
            }
            for &p in &tree.point_index {
                out.extend_from_slice(&p.to_le_bytes());
            }
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), &self.to_bytes())
    }

    /// Loads and validates a forest. When `data` is given, every split is
    /// also checked against the coordinates it was built from.
    pub fn load(path: impl AsRef<Path>, data: Option<&VectorSet>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io_path(path, e))?;
        Self::from_bytes(&bytes, data)
    }

    pub fn from_bytes(bytes: &[u8], data: Option<&VectorSet>) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::Format {
                offset: 0,
                msg: "bad magic".into(),
            });
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Format {
                offset: 8,
                msg: format!("unsupported version {version}"),
            });
        }
        let n = r.u64()? as usize;
        let dim = r.u32()? as usize;
        let n_trees = r.u32()? as usize;
        let leaf_cap = r.u32()? as usize;
        let seed = r.u64()?;
        if n == 0 || dim == 0 || n_trees == 0 || leaf_cap == 0 {
            return Err(Error::InvalidIndex(
                "n, dim, n_trees and leaf_cap must all be positive".into(),
            ));
        }
        if let Some(vs) = data {
            if vs.len() != n || vs.dim() != dim {
                return Err(Error::InvalidIndex(format!(
                    "index is over {n}x{dim} points, dataset is {}x{}",
                    vs.len(),
                    vs.dim()
                )));
            }
        }
        let mut trees = Vec::with_capacity(n_trees);
        for t in 0..n_trees {
            let count = r.u32()? as usize;
            if count == 0 || count > 2 * n {
                return Err(Error::InvalidIndex(format!("tree {t} has {count} nodes")));
            }
            let mut nodes = Vec::with_capacity(count);
            for _ in 0..count {
                let offset = r.pos;
                let tag = r.take(1)?[0];
                let depth = r.u32()?;
                let a = r.u32()?;
                let b = r.u32()?;
                let c = r.u32()?;
                let d = r.u32()?;
                nodes.push(match tag {
                    0 => KdNode::Leaf {
                        start: a,
                        end: b,
                        depth,
                    },
                    1 => KdNode::Internal {
                        split_dim: a,
                        split_val: f32::from_bits(b),
                        left: c,
                        right: d,
                        depth,
                    },
                    _ => {
                        return Err(Error::Format {
                            offset: offset as u64,
                            msg: format!("unknown node tag {tag}"),
                        })
                    }
                });
            }
            let mut point_index = Vec::with_capacity(n);
            for _ in 0..n {
                point_index.push(r.u32()?);
            }
            validate_tree(&nodes, &point_index, n, dim, leaf_cap, data)
                .map_err(|msg| Error::InvalidIndex(format!("tree {t}: {msg}")))?;
            trees.push(KdTree::from_parts(nodes, leaf_cap, point_index));
        }
        if r.pos != bytes.len() {
            return Err(Error::Format {
                offset: r.pos as u64,
                msg: "trailing bytes".into(),
            });
        }
        Ok(Self {
            trees,
            n,
            dim,
            leaf_cap,
            seed,
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let s = self
            .bytes
            .get(self.pos..self.pos + len)
            .ok_or_else(|| Error::Format {
                offset: self.pos as u64,
                msg: "unexpected end of index file".into(),
            })?;
        self.pos += len;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

fn validate_tree(
    nodes: &[KdNode],
    point_index: &[u32],
    n: usize,
    dim: usize,
    leaf_cap: usize,
    data: Option<&VectorSet>,
) -> std::result::Result<(), String> {
    let mut seen = vec![false; n];
    for &p in point_index {
        let p = p as usize;
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err("point_index is not a permutation".into());
        }
    }

    // Breadth-first from the root: every node reached exactly once, depths
    // increase by one per level.
    let mut order = Vec::with_capacity(nodes.len());
    let mut reached = vec![false; nodes.len()];
    reached[0] = true;
    if nodes[0].depth() != 0 {
        return Err("root depth is not 0".into());
    }
    order.push(0usize);
    let mut head = 0;
    while head < order.len() {
        let id = order[head];
        head += 1;
        match nodes[id] {
            KdNode::Internal {
                split_dim,
                split_val,
                left,
                right,
                depth,
            } => {
                if split_dim as usize >= dim || !split_val.is_finite() {
                    return Err(format!("node {id} has an invalid split"));
                }
                for child in [left as usize, right as usize] {
                    if child >= nodes.len() || std::mem::replace(&mut reached[child], true) {
                        return Err(format!("node {id} has an invalid child {child}"));
                    }
                    if nodes[child].depth() != depth + 1 {
                        return Err(format!("node {child} has inconsistent depth"));
                    }
                    order.push(child);
                }
            }
            KdNode::Leaf { start, end, .. } => {
                let len = end.saturating_sub(start) as usize;
                if start >= end || end as usize > n || len > leaf_cap {
                    return Err(format!("leaf {id} has invalid range {start}..{end}"));
                }
            }
        }
    }
    if order.len() != nodes.len() {
        return Err("unreachable nodes".into());
    }

    // Children before parents: each internal range is left range followed
    // immediately by right range.
    let mut range = vec![(0u32, 0u32); nodes.len()];
    for &id in order.iter().rev() {
        range[id] = match nodes[id] {
            KdNode::Leaf { start, end, .. } => (start, end),
            KdNode::Internal {
                split_dim,
                split_val,
                left,
                right,
                ..
            } => {
                let (ls, le) = range[left as usize];
                let (rs, re) = range[right as usize];
                if le != rs {
                    return Err(format!("children of node {id} are not adjacent"));
                }
                if let Some(vs) = data {
                    let d = split_dim as usize;
                    let left_ok = point_index[ls as usize..le as usize]
                        .iter()
                        .all(|&p| vs.row(p as usize)[d] <= split_val);
                    let right_ok = point_index[rs as usize..re as usize]
                        .iter()
                        .all(|&p| vs.row(p as usize)[d] >= split_val);
                    if !left_ok || !right_ok {
                        return Err(format!("node {id} split disagrees with the data"));
                    }
                }
                (ls, re)
            }
        };
    }
    if range[0] != (0, n as u32) {
        return Err("leaf ranges do not cover every point".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::gen_synthetic;

    fn leaf_ranges(tree: &KdTree) -> Vec<(u32, u32)> {
        let mut r: Vec<_> = tree
            .nodes()
            .iter()
            .filter_map(|n| match *n {
                KdNode::Leaf { start, end, .. } => Some((start, end)),
                _ => None,
            })
            .collect();
        r.sort_unstable();
        r
    }

    #[test]
    fn single_point_is_one_leaf() {
        let vs = VectorSet::from_rows(&[vec![0.5f32, 0.5]]).unwrap();
        let f = build_forest(&vs, 3, 10, 1).unwrap();
        for t in f.trees() {
            assert_eq!(t.nodes().len(), 1);
            assert_eq!(t.leaf_points(0), &[0]);
        }
    }

    #[test]
    fn small_set_is_one_leaf() {
        let vs = gen_synthetic(10, 3, 2).unwrap();
        let f = build_forest(&vs, 2, 10, 1).unwrap();
        for t in f.trees() {
            assert_eq!(t.n_leaves(), 1);
            let mut pts = t.leaf_points(0).to_vec();
            pts.sort_unstable();
            assert_eq!(pts, (0..10).collect::<Vec<_>>());
        }
    }

    #[test]
    fn rejects_bad_params() {
        let vs = gen_synthetic(10, 3, 2).unwrap();
        assert!(matches!(
            build_forest(&VectorSet::empty(), 1, 1, 0),
            Err(Error::EmptyDataset)
        ));
        assert!(build_forest(&vs, 0, 10, 0).is_err());
        assert!(build_forest(&vs, 1, 0, 0).is_err());
    }

    #[test]
    fn leaves_partition_points() {
        let vs = gen_synthetic(3000, 16, 9).unwrap();
        let f = build_forest(&vs, 4, 10, 3).unwrap();
        for t in f.trees() {
            let ranges = leaf_ranges(t);
            let mut next = 0;
            for (s, e) in ranges {
                assert_eq!(s, next);
                assert!((1..=10).contains(&(e - s)));
                next = e;
            }
            assert_eq!(next, 3000);
            for (id, node) in t.nodes().iter().enumerate() {
                if let KdNode::Internal { left, right, depth, .. } = *node {
                    assert_eq!(t.node(left).depth(), depth + 1);
                    assert_eq!(t.node(right).depth(), depth + 1);
                    assert_eq!(t.parent(left), Some(id as NodeId));
                }
            }
        }
    }

    #[test]
    fn deterministic_and_trees_differ() {
        let vs = gen_synthetic(500, 8, 4).unwrap();
        let a = build_forest(&vs, 3, 5, 77).unwrap();
        let b = build_forest(&vs, 3, 5, 77).unwrap();
        assert_eq!(a.to_bytes(), b.to_bytes());
        assert_ne!(a.trees()[0].point_index(), a.trees()[1].point_index());
    }

    #[test]
    fn constant_data_terminates() {
        let vs = VectorSet::new(2, vec![1.0; 2 * 257]).unwrap();
        let f = build_forest(&vs, 2, 3, 0).unwrap();
        for t in f.trees() {
            assert!(t.height() <= 9);
            assert_eq!(leaf_ranges(t).last().unwrap().1, 257);
        }
    }

    #[test]
    fn descent_reaches_own_leaf_on_distinct_data() {
        let vs = gen_synthetic(2000, 8, 12).unwrap();
        let f = build_forest(&vs, 2, 8, 5).unwrap();
        for t in f.trees() {
            for p in 0..vs.len() {
                let leaf = t.descend_from(vs.row(p), t.root());
                assert!(t.leaf_points(leaf).contains(&(p as u32)));
                assert_eq!(leaf, t.leaf_of(p));
            }
        }
    }

    #[test]
    fn descend_from_leaf_is_identity() {
        let vs = gen_synthetic(200, 4, 1).unwrap();
        let f = build_forest(&vs, 1, 4, 1).unwrap();
        let t = &f.trees()[0];
        let leaf = t.leaf_of(17);
        assert_eq!(t.descend_from(&[0.0; 4], leaf), leaf);
        let q = [0.3, 0.9, 0.1, 0.5];
        assert_eq!(t.descend_from(&q, t.root()), t.search_leaves(&q, 1)[0]);
    }

    #[test]
    fn depth_one_tree_search_order() {
        let vs = VectorSet::from_rows(&[vec![0.0f32], vec![1.0], vec![10.0], vec![11.0]]).unwrap();
        let f = build_forest(&vs, 1, 2, 0).unwrap();
        let t = &f.trees()[0];
        assert_eq!(t.n_leaves(), 2);
        let KdNode::Internal { left, right, .. } = *t.node(t.root()) else {
            panic!("root should split");
        };
        assert_eq!(t.search_leaves(&[0.5], 2), vec![left, right]);
        assert_eq!(t.search_leaves(&[0.5], 5).len(), 2);
    }

    #[test]
    fn search_all_leaves_enumerates_each_once() {
        let vs = gen_synthetic(1000, 6, 2).unwrap();
        let f = build_forest(&vs, 1, 10, 2).unwrap();
        let t = &f.trees()[0];
        let mut leaves = t.search_leaves(&[0.5; 6], usize::MAX);
        assert_eq!(leaves.len(), t.n_leaves());
        leaves.sort_unstable();
        leaves.dedup();
        assert_eq!(leaves.len(), t.n_leaves());
    }

    #[test]
    fn persistence_round_trip_and_validation() {
        let vs = gen_synthetic(800, 5, 3).unwrap();
        let f = build_forest(&vs, 3, 7, 11).unwrap();
        let bytes = f.to_bytes();
        let g = KdForest::from_bytes(&bytes, Some(&vs)).unwrap();
        assert_eq!(f, g);

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(KdForest::from_bytes(&bad, None).is_err());
        assert!(KdForest::from_bytes(&bytes[..bytes.len() - 1], None).is_err());

        // Swap two entries across leaves of the permutation: partition still
        // holds, but the splits no longer agree with the data.
        let mut tampered = f.clone();
        let pi = &mut tampered.trees[0].point_index;
        pi.swap(0, 799);
        let tampered = tampered.to_bytes();
        assert!(KdForest::from_bytes(&tampered, None).is_ok());
        assert!(KdForest::from_bytes(&tampered, Some(&vs)).is_err());

        // Duplicate a point id.
        let mut dup = f.clone();
        dup.trees[1].point_index[3] = dup.trees[1].point_index[4];
        assert!(KdForest::from_bytes(&dup.to_bytes(), None).is_err());
    }
}
