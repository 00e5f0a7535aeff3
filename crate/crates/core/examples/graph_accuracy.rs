//! Accuracy of a partially refined graph measured against progressively
//! wider exact neighborhoods.
//!
//! cargo run --release --example graph_accuracy -- [n] [dim]

use kdgraph::eval::accuracy_vs_k_with_gt;
use kdgraph::{brute_force_knn, build_forest, build_graph, gen_synthetic, GraphParams, QuerySet, Strategy};

fn main() -> kdgraph::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("numeric argument"));
    let n = args.next().unwrap_or(5000);
    let dim = args.next().unwrap_or(128);

    let vs = gen_synthetic(n, dim, 1)?;
    let wide = brute_force_knn(&vs, QuerySet::SelfJoin, 100.min(n - 1))?;
    let forest = build_forest(&vs, 8, 10, 1)?;
    let params = GraphParams { pool_cap: 60, sample_cap: 30, conquer_depth: 5, max_iters: 1, ..Default::default() };
    let (graph, _) = build_graph(&vs, Some(&forest), &params, Strategy::EfannaDescent, None)?;

    let ks: Vec<usize> = [10, 20, 30, 40, 50, 60, 70, 80, 90, 100].into_iter().filter(|&k| k <= wide.k()).collect();
    for (k, acc) in accuracy_vs_k_with_gt(&graph, &wide, &ks)? {
        println!("k' = {k:>3}  accuracy {acc:.4}");
    }
    Ok(())
}
