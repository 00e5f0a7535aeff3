use kdgraph::kd_forest::{build_forest, KdForest, KdNode, KdTree};
use kdgraph::{gen_synthetic, VectorSet};

/// Detour cost of every leaf: sum of |q[d] - split| over the splits whose
/// far side lies on the root-to-leaf path.
fn leaf_costs(tree: &KdTree, q: &[f32]) -> Vec<(f32, u32)> {
    let mut out = Vec::new();
    let mut stack = vec![(tree.root(), 0.0f32)];
    while let Some((id, cost)) = stack.pop() {
        match *tree.node(id) {
            KdNode::Leaf { .. } => out.push((cost, id)),
            KdNode::Internal { split_dim, split_val, left, right, .. } => {
                let diff = q[split_dim as usize] - split_val;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                stack.push((near, cost));
                stack.push((far, cost + diff.abs()));
            }
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

fn nearest(vs: &VectorSet, q: &[f32]) -> usize {
    (0..vs.len())
        .min_by(|&a, &b| vs.dist_sq_q(q, a).unwrap().total_cmp(&vs.dist_sq_q(q, b).unwrap()))
        .unwrap()
}

#[test]
fn best_bin_first_matches_exhaustive_leaf_ranking() {
    let vs = gen_synthetic(1000, 16, 3).unwrap();
    let queries = gen_synthetic(50, 16, 4).unwrap();
    let forest = build_forest(&vs, 2, 10, 5).unwrap();
    let (mut bbf_hits, mut oracle_hits) = (0, 0);
    for q in queries.rows() {
        let nn = nearest(&vs, q);
        for tree in forest.trees() {
            let ranked = leaf_costs(tree, q);
            let got = tree.search_leaves(q, 4);
            assert_eq!(got.len(), 4);
            let mut got_costs: Vec<f32> = got
                .iter()
                .map(|l| ranked.iter().find(|r| r.1 == *l).unwrap().0)
                .collect();
            let want: Vec<f32> = ranked[..4].iter().map(|r| r.0).collect();
            assert!(got_costs.windows(2).all(|w| w[0] <= w[1]), "not in cost order");
            got_costs.sort_by(f32::total_cmp);
            assert_eq!(got_costs, want);
            let owner = tree.leaf_of(nn);
            bbf_hits += got.contains(&owner) as usize;
            oracle_hits += ranked[..4].iter().any(|r| r.1 == owner) as usize;
        }
    }
    assert!(bbf_hits >= oracle_hits, "{bbf_hits} < {oracle_hits}");
}

#[test]
fn search_leaves_enumerates_every_leaf_once() {
    let vs = gen_synthetic(300, 8, 1).unwrap();
    let forest = build_forest(&vs, 1, 7, 2).unwrap();
    let tree = &forest.trees()[0];
    let mut all = tree.search_leaves(vs.row(0), usize::MAX);
    assert_eq!(all.len(), tree.n_leaves());
    all.sort_unstable();
    all.dedup();
    assert_eq!(all.len(), tree.n_leaves());
}

#[test]
fn descend_from_replays_the_path() {
    let vs = gen_synthetic(2000, 32, 8).unwrap();
    let forest = build_forest(&vs, 3, 10, 9).unwrap();
    let q = gen_synthetic(1, 32, 10).unwrap();
    let q = q.row(0);
    for tree in forest.trees() {
        for start in 0..tree.nodes().len() as u32 {
            let leaf = tree.descend_from(q, start);
            assert!(tree.node(leaf).is_leaf());
            let mut cur = leaf;
            while cur != start {
                let prev = cur;
                cur = tree.parent(cur).expect("leaf must lie below start");
                if let KdNode::Internal { split_dim, split_val, left, right, .. } = *tree.node(cur) {
                    let side = if q[split_dim as usize] <= split_val { left } else { right };
                    assert_eq!(side, prev);
                }
            }
        }
        assert_eq!(tree.descend_from(q, tree.root()), tree.search_leaves(q, 1)[0]);
    }
}

#[test]
fn desk_scale_forest_partitions_all_ids() {
    let vs = gen_synthetic(10_000, 128, 1).unwrap();
    let forest = build_forest(&vs, 8, 10, 1).unwrap();
    for tree in forest.trees() {
        let mut seen = vec![false; vs.len()];
        let mut leaves = 0;
        for (id, node) in tree.nodes().iter().enumerate() {
            if let KdNode::Leaf { .. } = node {
                let pts = tree.leaf_points(id as u32);
                assert!((1..=10).contains(&pts.len()));
                for &p in pts {
                    assert!(!seen[p as usize]);
                    seen[p as usize] = true;
                    assert_eq!(tree.leaf_of(p as usize), id as u32);
                }
                leaves += 1;
            }
        }
        assert!(seen.iter().all(|&s| s));
        assert_eq!(leaves, tree.n_leaves());
    }
}

#[test]
fn sixteen_tree_file_loads_and_validates() {
    let vs = gen_synthetic(10_000, 128, 1).unwrap();
    let forest = build_forest(&vs, 16, 10, 4).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.kdf");
    forest.save(&path).unwrap();
    let back = KdForest::load(&path, Some(&vs)).unwrap();
    assert_eq!(back.trees().len(), 16);
    assert_eq!(back.to_bytes(), forest.to_bytes());
    let again = build_forest(&vs, 16, 10, 4).unwrap();
    assert_eq!(again.to_bytes(), forest.to_bytes());
}

#[test]
fn tiny_input_gives_single_leaf_file() {
    let vs = gen_synthetic(5, 3, 1).unwrap();
    let forest = build_forest(&vs, 1, 10, 1).unwrap();
    let back = KdForest::from_bytes(&forest.to_bytes(), Some(&vs)).unwrap();
    let tree = &back.trees()[0];
    assert_eq!(tree.nodes().len(), 1);
    assert_eq!(tree.leaf_points(tree.root()).len(), 5);
}
