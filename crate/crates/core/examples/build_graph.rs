//! Compare kNN-graph construction strategies: accuracy, time and distance
//! computations per iteration.
//!
//! cargo run --release --example build_graph -- [n] [dim]

use kdgraph::{brute_force_knn, build_forest, build_graph, gen_synthetic, GraphParams, QuerySet, Strategy};

fn main() -> kdgraph::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("numeric argument"));
    let n = args.next().unwrap_or(5000);
    let dim = args.next().unwrap_or(128);

    let vs = gen_synthetic(n, dim, 1)?;
    let gt = brute_force_knn(&vs, QuerySet::SelfJoin, 10)?;
    let forest = build_forest(&vs, 8, 10, 1)?;
    let params = GraphParams { pool_cap: 60, sample_cap: 30, conquer_depth: 5, max_iters: 6, min_update_frac: 0.0, ..Default::default() };
    let pairs = (n * (n - 1) / 2) as f64;

    for strategy in [Strategy::EfannaDescent, Strategy::RandomDescent, Strategy::NnExpansion] {
        let (_, stats) = build_graph(&vs, Some(&forest), &params, strategy, Some(&gt))?;
        println!("{}", strategy.name());
        for it in &stats.iterations {
            println!(
                "  iter {:>2}  {:>7.3} s  {:>6.3} of brute force  accuracy {:.4}",
                it.iteration,
                it.elapsed.as_secs_f64(),
                it.dist_comps as f64 / pairs,
                it.accuracy.unwrap_or(f64::NAN)
            );
        }
        match stats.cost_to_reach(0.90) {
            Some((t, d)) => println!("  0.90 accuracy after {t:.3} s and {:.3} of brute force", d / pairs),
            None => println!("  0.90 accuracy not reached"),
        }
    }
    Ok(())
}
