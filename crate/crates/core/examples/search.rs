//! Recall / cost curve of graph search, seeded by the forest and by random
//! points.
//!
//! cargo run --release --example search -- [n] [dim]

use kdgraph::{
    brute_force_graph, brute_force_knn, build_forest, gen_synthetic, recall_curve, QuerySet, SearchParams, Searcher,
    Seeding,
};

fn main() -> kdgraph::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("numeric argument"));
    let n = args.next().unwrap_or(10_000);
    let dim = args.next().unwrap_or(128);

    let vs = gen_synthetic(n, dim, 1)?;
    let graph = brute_force_graph(&vs, 10)?;
    let forest = build_forest(&vs, 8, 10, 1)?;
    let queries = gen_synthetic(100, dim, 2)?;
    let gt = brute_force_knn(&vs, QuerySet::External(&queries), 10)?;
    let searcher = Searcher::new(&vs, Some(&forest), &graph)?;

    let sweep = [(10, 20), (10, 50), (10, 100), (20, 200), (20, 400), (50, 800)];
    let base = SearchParams::default();
    for (label, seeding) in [("forest", Seeding::Forest), ("random", Seeding::Random { seed: 1 })] {
        println!("{label} seeding");
        for c in recall_curve(&searcher, &queries, &gt, &base, &sweep, seeding)? {
            println!(
                "  E={:>3} P={:>4}  recall {:.3}  {:>7.0} distances ({:.3} of brute force)  {:>8.1} us/query",
                c.expansion,
                c.pool_size,
                c.recall,
                c.mean_dist_comps,
                c.mean_dist_comps / n as f64,
                c.mean_time.as_secs_f64() * 1e6
            );
        }
    }
    Ok(())
}
