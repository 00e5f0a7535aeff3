//! Generate a dataset, write it as fvecs, read it back and compute exact
//! neighbors.
//!
//! cargo run --release --example datasets -- [n] [dim]

use kdgraph::{brute_force_knn, gen_synthetic, load_fvecs, load_ivecs, save_fvecs, save_ivecs, QuerySet};

fn main() -> kdgraph::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("numeric argument"));
    let n = args.next().unwrap_or(1000);
    let dim = args.next().unwrap_or(32);

    let dir = std::env::temp_dir().join("kdgraph-datasets-example");
    std::fs::create_dir_all(&dir)?;
    let base = gen_synthetic(n, dim, 1)?;
    save_fvecs(&base, dir.join("base.fvecs"))?;
    let loaded = load_fvecs(dir.join("base.fvecs"))?;
    assert_eq!(loaded, base);
    println!("{} vectors of dim {} round-tripped through {}", loaded.len(), loaded.dim(), dir.display());

    let queries = gen_synthetic(5, dim, 2)?;
    let gt = brute_force_knn(&base, QuerySet::External(&queries), 3)?;
    save_ivecs(&gt, dir.join("gt.ivecs"))?;
    for (i, row) in load_ivecs(dir.join("gt.ivecs"))?.rows().enumerate() {
        let dists: Vec<f32> = row.iter().map(|&id| base.dist_sq_q(queries.row(i), id as usize).unwrap()).collect();
        println!("query {i}: neighbors {row:?} squared distances {dists:?}");
    }
    Ok(())
}
