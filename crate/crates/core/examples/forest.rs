//! Build a KD-tree forest, inspect one tree and rank leaves for a query.
//!
//! cargo run --release --example forest -- [n] [dim] [n_trees]

use kdgraph::{build_forest, gen_synthetic, KdForest};

fn main() -> kdgraph::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("numeric argument"));
    let n = args.next().unwrap_or(10_000);
    let dim = args.next().unwrap_or(128);
    let n_trees = args.next().unwrap_or(8);

    let vs = gen_synthetic(n, dim, 1)?;
    let start = std::time::Instant::now();
    let forest = build_forest(&vs, n_trees, 10, 1)?;
    println!("built {n_trees} trees over {n} points in {:.3} s", start.elapsed().as_secs_f64());
    for (t, tree) in forest.trees().iter().enumerate() {
        println!("tree {t}: {} nodes, {} leaves, height {}", tree.nodes().len(), tree.n_leaves(), tree.height());
    }

    let q = gen_synthetic(1, dim, 2)?;
    let tree = &forest.trees()[0];
    for (rank, leaf) in tree.search_leaves(q.row(0), 5).into_iter().enumerate() {
        println!("leaf rank {rank}: node {leaf} with points {:?}", tree.leaf_points(leaf));
    }

    let path = std::env::temp_dir().join("kdgraph-example.kdf");
    forest.save(&path)?;
    let back = KdForest::load(&path, Some(&vs))?;
    println!("reloaded {} trees from {} ({} bytes)", back.trees().len(), path.display(), back.to_bytes().len());
    Ok(())
}
