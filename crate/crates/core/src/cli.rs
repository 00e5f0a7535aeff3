//! Command-line front end. Every command is a function of its resolved
//! configuration and input files; the `kdgraph` binary only parses
//! arguments and calls [`run`].

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::dataset::{self, GroundTruth, VectorSet};
use crate::error::{Error, Result};
use crate::eval::{self, QuerySet};
use crate::graph::KnnGraph;
use crate::graph_build::{self, GraphParams, Strategy};
use crate::kd_forest::{build_forest, KdForest};
use crate::report::{fmt_f64, Table};
use crate::search::{self, SearchParams, Searcher, Seeding};

#[derive(Debug, Parser)]
#[command(name = "kdgraph", version, about = "KD-forest + kNN-graph approximate nearest neighbor toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded uniform [0,1) dataset as fvecs.
    Gen(GenArgs),
    /// Build a KD-tree forest index file.
    BuildTrees(BuildTreesArgs),
    /// Build an approximate kNN graph, logging per-iteration accuracy.
    BuildGraph(BuildGraphArgs),
    /// Exact nearest neighbors by brute force.
    Gt(GtArgs),
    /// Batch search with an (E, P) sweep.
    Search(SearchArgs),
    /// Score a graph or search results against ground truth.
    Eval(EvalArgs),
    /// Convert between fvecs/ivecs and CSV.
    Convert(ConvertArgs),
}

/// Algorithm parameters shared by every command. Unset flags fall back to
/// the config file, then to built-in defaults.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamArgs {
    /// TOML file with any of these parameters; flags override it.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n_trees: Option<usize>,
    /// Maximum points per leaf.
    #[arg(long)]
    pub leaf_cap: Option<usize>,
    /// Graph width, or neighbors per query.
    #[arg(long)]
    pub k: Option<usize>,
    /// Shallowest tree level merged during graph initialization.
    #[arg(long)]
    pub conquer_depth: Option<u32>,
    /// Refinement pool capacity.
    #[arg(long)]
    pub pool_cap: Option<usize>,
    /// New neighbors sampled per point per refinement iteration.
    #[arg(long)]
    pub sample_cap: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub min_update_frac: Option<f64>,
    /// efanna_init+nn_descent | random_init+nn_descent | nn_expansion | brute_force | efanna_init
    #[arg(long)]
    pub strategy: Option<String>,
    /// Search expansion factor E.
    #[arg(long)]
    pub expansion: Option<usize>,
    /// Search candidate pool size P.
    #[arg(long)]
    pub search_pool: Option<usize>,
    /// Search expansion rounds I.
    #[arg(long)]
    pub iters: Option<usize>,
    /// Trees consulted at search time (default: all).
    #[arg(long)]
    pub search_trees: Option<usize>,
    /// forest | random
    #[arg(long)]
    pub seeding: Option<String>,
    /// Worker threads. Output is only guaranteed byte-identical at 1.
    #[arg(long)]
    pub workers: Option<usize>,
}

/// Fully resolved parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub n_trees: usize,
    pub leaf_cap: usize,
    pub k: usize,
    pub conquer_depth: u32,
    pub pool_cap: usize,
    pub sample_cap: usize,
    pub max_iters: usize,
    pub min_update_frac: f64,
    pub strategy: Strategy,
    pub expansion: usize,
    pub search_pool: usize,
    pub iters: usize,
    pub search_trees: Option<usize>,
    pub seeding: Seeding,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let g = GraphParams::default();
        let s = SearchParams::default();
        Self {
            seed: g.seed,
            n_trees: 8,
            leaf_cap: 10,
            k: g.k,
            conquer_depth: g.conquer_depth,
            pool_cap: g.pool_cap,
            sample_cap: g.sample_cap,
            max_iters: g.max_iters,
            min_update_frac: g.min_update_frac,
            strategy: Strategy::EfannaDescent,
            expansion: s.expansion,
            search_pool: s.pool_size,
            iters: s.iters,
            search_trees: None,
            seeding: Seeding::Forest,
            workers: 1,
        }
    }
}

impl ParamArgs {
    /// Flags, then config file, then defaults.
    pub fn resolve(&self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::io_path(path, e))?;
                toml::from_str::<ParamArgs>(&text)
                    .map_err(|e| Error::param(format!("config {}: {e}", path.display())))?
            }
            None => ParamArgs::default(),
        };
        let d = RunConfig::default();
        macro_rules! pick {
            ($f:ident) => {
                self.$f.clone().or(file.$f.clone())
            };
        }
        let seed = pick!(seed).unwrap_or(d.seed);
        let strategy = match pick!(strategy) {
            Some(s) => Strategy::parse(&s)?,
            None => d.strategy,
        };
        let seeding = match pick!(seeding).as_deref() {
            None | Some("forest") => Seeding::Forest,
            Some("random") => Seeding::Random { seed },
            Some(other) => return Err(Error::param(format!("unknown seeding {other:?}"))),
        };
        let cfg = RunConfig {
            seed,
            n_trees: pick!(n_trees).unwrap_or(d.n_trees),
            leaf_cap: pick!(leaf_cap).unwrap_or(d.leaf_cap),
            k: pick!(k).unwrap_or(d.k),
            conquer_depth: pick!(conquer_depth).unwrap_or(d.conquer_depth),
            pool_cap: pick!(pool_cap).unwrap_or(d.pool_cap),
            sample_cap: pick!(sample_cap).unwrap_or(d.sample_cap),
            max_iters: pick!(max_iters).unwrap_or(d.max_iters),
            min_update_frac: pick!(min_update_frac).unwrap_or(d.min_update_frac),
            strategy,
            expansion: pick!(expansion).unwrap_or(d.expansion),
            search_pool: pick!(search_pool).unwrap_or(d.search_pool),
            iters: pick!(iters).unwrap_or(d.iters),
            search_trees: pick!(search_trees),
            seeding,
            workers: pick!(workers).unwrap_or(d.workers),
        };
        if cfg.workers == 0 {
            return Err(Error::param("workers must be at least 1"));
        }
        if cfg.n_trees == 0 || cfg.leaf_cap == 0 {
            return Err(Error::param("n_trees and leaf_cap must be at least 1"));
        }
        cfg.graph_params().validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn graph_params(&self) -> GraphParams {
        GraphParams {
            k: self.k,
            conquer_depth: self.conquer_depth,
            pool_cap: self.pool_cap,
            sample_cap: self.sample_cap,
            max_iters: self.max_iters,
            min_update_frac: self.min_update_frac,
            seed: self.seed,
        }
    }

    pub fn search_params(&self, forest_trees: usize) -> SearchParams {
        SearchParams {
            k: self.k,
            pool_size: self.search_pool,
            expansion: self.expansion,
            iters: self.iters,
            n_trees: self.search_trees.unwrap_or(forest_trees).max(1),
        }
    }

    /// One-line `key=value` dump written at the top of every log.
    pub fn describe(&self, command: &str) -> String {
        let seeding = match self.seeding {
            Seeding::Forest => "forest",
            Seeding::Random { .. } => "random",
        };
        format!(
            "kdgraph {command} seed={} n_trees={} leaf_cap={} k={} conquer_depth={} pool_cap={} \
             sample_cap={} max_iters={} min_update_frac={} strategy={} expansion={} search_pool={} \
             iters={} search_trees={} seeding={} workers={}",
            self.seed,
            self.n_trees,
            self.leaf_cap,
            self.k,
            self.conquer_depth,
            self.pool_cap,
            self.sample_cap,
            self.max_iters,
            self.min_update_frac,
            self.strategy.name(),
            self.expansion,
            self.search_pool,
            self.iters,
            self.search_trees.map_or("all".to_string(), |t| t.to_string()),
            seeding,
            self.workers,
        )
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub dim: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BuildTreesArgs {
    #[arg(long)]
    pub base: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Args)]
pub struct BuildGraphArgs {
    #[arg(long)]
    pub base: PathBuf,
    /// Forest index; built on the fly when the strategy needs one and none is given.
    #[arg(long)]
    pub forest: Option<PathBuf>,
    /// Exact k-NN ivecs for per-iteration accuracy.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Neighbor ids (ivecs).
    #[arg(long)]
    pub out: PathBuf,
    /// Neighbor distances (fvecs). Defaults to `<out>.dists.fvecs`.
    #[arg(long)]
    pub out_dists: Option<PathBuf>,
    /// Per-iteration CSV log.
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Args)]
pub struct GtArgs {
    #[arg(long)]
    pub base: PathBuf,
    /// Query fvecs; omitted means every base point against the rest.
    #[arg(long)]
    pub queries: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the exact graph's distances (self mode only).
    #[arg(long)]
    pub out_dists: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub base: PathBuf,
    #[arg(long)]
    pub forest: Option<PathBuf>,
    /// kNN graph ids (ivecs); distances are recomputed from the base.
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Comma-separated E:P pairs; defaults to the configured single point.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Result ids of the last sweep point (ivecs).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-query CSV.
    #[arg(long)]
    pub queries_csv: Option<PathBuf>,
    /// One row per sweep point.
    #[arg(long)]
    pub curve_csv: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Exact neighbors (ivecs).
    #[arg(long)]
    pub gt: PathBuf,
    /// A kNN graph (ivecs) to score by graph accuracy.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Search results (ivecs) to score by recall.
    #[arg(long)]
    pub results: Option<PathBuf>,
    /// Comma-separated k' values for graph accuracy against wider ground truth.
    #[arg(long)]
    pub k_list: Option<String>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    /// .fvecs, .ivecs or .csv
    #[arg(long)]
    pub input: PathBuf,
    /// .fvecs, .ivecs or .csv
    #[arg(long)]
    pub output: PathBuf,
}

/// Runs one command, writing human-readable progress to `out`.
pub fn run(command: &Command, out: &mut dyn Write) -> Result<()> {
    let workers = match command {
        Command::BuildTrees(a) => a.params.resolve()?.workers,
        Command::BuildGraph(a) => a.params.resolve()?.workers,
        Command::Gt(a) => a.params.resolve()?.workers,
        Command::Search(a) => a.params.resolve()?.workers,
        _ => 1,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::param(format!("thread pool: {e}")))?;
    let mut buf = Vec::new();
    let res = pool.install(|| {
        let o: &mut dyn Write = &mut buf;
        match command {
            Command::Gen(a) => cmd_gen(a, o),
            Command::BuildTrees(a) => cmd_build_trees(a, o),
            Command::BuildGraph(a) => cmd_build_graph(a, o),
            Command::Gt(a) => cmd_gt(a, o),
            Command::Search(a) => cmd_search(a, o),
            Command::Eval(a) => cmd_eval(a, o),
            Command::Convert(a) => cmd_convert(a, o),
        }
    });
    out.write_all(&buf)?;
    res
}

fn say(out: &mut dyn Write, line: String) -> Result<()> {
    writeln!(out, "{line}")?;
    Ok(())
}

pub fn cmd_gen(a: &GenArgs, out: &mut dyn Write) -> Result<()> {
    let vs = dataset::gen_synthetic(a.n, a.dim, a.seed)?;
    dataset::save_fvecs(&vs, &a.out)?;
    say(out, format!("wrote {} x {} vectors to {}", a.n, a.dim, a.out.display()))
}

pub fn cmd_build_trees(a: &BuildTreesArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = a.params.resolve()?;
    let vs = dataset::load_fvecs(&a.base)?;
    let start = Instant::now();
    let forest = build_forest(&vs, cfg.n_trees, cfg.leaf_cap, cfg.seed)?;
    let elapsed = start.elapsed();
    forest.save(&a.out)?;
    say(
        out,
        format!(
            "tree_build_s={:.6} n_trees={} leaf_cap={} n={} dim={}",
            elapsed.as_secs_f64(),
            cfg.n_trees,
            cfg.leaf_cap,
            vs.len(),
            vs.dim()
        ),
    )
}

fn load_forest_or_build(
    path: Option<&Path>,
    vs: &VectorSet,
    cfg: &RunConfig,
    out: &mut dyn Write,
) -> Result<KdForest> {
    match path {
        Some(p) => KdForest::load(p, Some(vs)),
        None => {
            let start = Instant::now();
            let f = build_forest(vs, cfg.n_trees, cfg.leaf_cap, cfg.seed)?;
            say(out, format!("tree_build_s={:.6}", start.elapsed().as_secs_f64()))?;
            Ok(f)
        }
    }
}

fn default_dists_path(ids: &Path) -> PathBuf {
    let mut s = ids.as_os_str().to_owned();
    s.push(".dists.fvecs");
    PathBuf::from(s)
}

pub fn cmd_build_graph(a: &BuildGraphArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = a.params.resolve()?;
    let vs = dataset::load_fvecs(&a.base)?;
    let gt = match &a.gt {
        Some(p) => {
            let gt = dataset::load_ivecs(p)?;
            gt.validate(vs.len())?;
            Some(gt.truncated(cfg.k)?)
        }
        None => None,
    };
    let needs_forest = matches!(
        cfg.strategy,
        Strategy::EfannaDescent | Strategy::Custom(graph_build::InitStrategy::Forest, _)
    );
    let forest = if needs_forest {
        Some(load_forest_or_build(a.forest.as_deref(), &vs, &cfg, out)?)
    } else {
        None
    };
    let (graph, stats) =
        graph_build::build_graph(&vs, forest.as_ref(), &cfg.graph_params(), cfg.strategy, gt.as_ref())?;
    let dists = a.out_dists.clone().unwrap_or_else(|| default_dists_path(&a.out));
    graph.save(&a.out, &dists)?;

    let mut table = Table::new(["iteration", "elapsed_s", "dist_comps", "scan_rate", "updates", "accuracy"]);
    table.comment(cfg.describe("build-graph"));
    let n = vs.len() as f64;
    let pairs = n * (n - 1.0) / 2.0;
    for it in &stats.iterations {
        table.push([
            it.iteration.to_string(),
            fmt_f64(it.elapsed.as_secs_f64()),
            it.dist_comps.to_string(),
            fmt_f64(it.dist_comps as f64 / pairs),
            it.updates.to_string(),
            it.accuracy.map_or(String::new(), fmt_f64),
        ]);
    }
    if let Some(log) = &a.log {
        table.write_csv(log)?;
    }
    write!(out, "{}", table.to_summary())?;
    say(
        out,
        format!(
            "graph_build_s={:.6} dist_comps={} strategy={}",
            stats.total_time.as_secs_f64(),
            stats.dist_comps,
            cfg.strategy.name()
        ),
    )
}

pub fn cmd_gt(a: &GtArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = a.params.resolve()?;
    let vs = dataset::load_fvecs(&a.base)?;
    let start = Instant::now();
    match &a.queries {
        None => {
            let graph = eval::brute_force_graph(&vs, cfg.k)?;
            graph.save(
                &a.out,
                a.out_dists.clone().unwrap_or_else(|| default_dists_path(&a.out)),
            )?;
        }
        Some(qp) => {
            let qs = dataset::load_fvecs(qp)?;
            let gt = eval::brute_force_knn(&vs, QuerySet::External(&qs), cfg.k)?;
            dataset::save_ivecs(&gt, &a.out)?;
        }
    }
    say(out, format!("ground_truth_s={:.6} k={}", start.elapsed().as_secs_f64(), cfg.k))
}

/// Parses `E:P,E:P,...`.
pub fn parse_sweep(s: &str) -> Result<Vec<(usize, usize)>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let (e, p) = t
                .trim()
                .split_once(':')
                .ok_or_else(|| Error::param(format!("sweep point {t:?} is not E:P")))?;
            let parse = |x: &str| {
                x.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::param(format!("bad number {x:?} in sweep")))
            };
            Ok((parse(e)?, parse(p)?))
        })
        .collect()
}

fn parse_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::param(format!("bad number {t:?} in list")))
        })
        .collect()
}

pub fn cmd_search(a: &SearchArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = a.params.resolve()?;
    let vs = dataset::load_fvecs(&a.base)?;
    let queries = dataset::load_fvecs(&a.queries)?;
    let graph = KnnGraph::load_ids(&a.graph, &vs)?;
    let forest = match (&a.forest, cfg.seeding) {
        (Some(p), _) => Some(KdForest::load(p, Some(&vs))?),
        (None, Seeding::Forest) => return Err(Error::param("forest seeding needs --forest")),
        (None, Seeding::Random { .. }) => None,
    };
    let gt = match &a.gt {
        Some(p) => {
            let gt = dataset::load_ivecs(p)?;
            gt.validate(vs.len())?;
            Some(gt)
        }
        None => None,
    };
    let base = cfg.search_params(forest.as_ref().map_or(1, |f| f.trees().len()));
    let sweep = match &a.sweep {
        Some(s) => parse_sweep(s)?,
        None => vec![(base.expansion, base.pool_size)],
    };
    if sweep.is_empty() {
        return Err(Error::param("empty sweep"));
    }
    let searcher = Searcher::new(&vs, forest.as_ref(), &graph)?;

    let mut per_query = Table::new([
        "sweep", "expansion", "pool_size", "query", "time_us", "dist_comps", "recall",
    ]);
    per_query.comment(cfg.describe("search"));
    let mut curve = Table::new([
        "expansion", "pool_size", "mean_time_us", "mean_dist_comps", "recall",
    ]);
    curve.comment(cfg.describe("search"));
    let mut last = Vec::new();
    for (si, &(expansion, pool_size)) in sweep.iter().enumerate() {
        let params = SearchParams {
            expansion,
            pool_size,
            ..base
        };
        let runs = search::batch_search(&searcher, &queries, &params, cfg.seeding, gt.as_ref())?;
        let nq = runs.len().max(1) as f64;
        let mut time_us = 0.0;
        let mut comps = 0.0;
        let mut rec = 0.0;
        for (qi, r) in runs.iter().enumerate() {
            let t = r.elapsed.as_secs_f64() * 1e6;
            time_us += t;
            comps += r.result.stats.dist_comps as f64;
            rec += r.recall.unwrap_or(0.0);
            per_query.push([
                si.to_string(),
                expansion.to_string(),
                pool_size.to_string(),
                qi.to_string(),
                format!("{t:.3}"),
                r.result.stats.dist_comps.to_string(),
                r.recall.map_or(String::new(), fmt_f64),
            ]);
        }
        curve.push([
            expansion.to_string(),
            pool_size.to_string(),
            format!("{:.3}", time_us / nq),
            fmt_f64(comps / nq),
            if gt.is_some() { fmt_f64(rec / nq) } else { String::new() },
        ]);
        last = runs;
    }
    if let Some(p) = &a.out {
        let mut ids = Vec::with_capacity(last.len() * base.k);
        for r in &last {
            if r.result.ids.len() != base.k {
                return Err(Error::param(
                    "a query returned fewer than k results; raise E or the iteration count",
                ));
            }
            ids.extend_from_slice(&r.result.ids);
        }
        dataset::save_ivecs(&GroundTruth::new(base.k, ids)?, p)?;
    }
    if let Some(p) = &a.queries_csv {
        per_query.write_csv(p)?;
    }
    if let Some(p) = &a.curve_csv {
        curve.write_csv(p)?;
    }
    write!(out, "{}", curve.to_summary())?;
    Ok(())
}

pub fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let gt = dataset::load_ivecs(&a.gt)?;
    let mut table = Table::new(["metric", "k", "value"]);
    let name = |p: &Path| p.file_name().map_or(String::new(), |f| f.to_string_lossy().into_owned());
    table.comment(format!(
        "kdgraph eval gt={} graph={} results={} k_list={}",
        name(&a.gt),
        a.graph.as_deref().map_or(String::new(), name),
        a.results.as_deref().map_or(String::new(), name),
        a.k_list.as_deref().unwrap_or("")
    ));
    if let Some(p) = &a.graph {
        let ids = dataset::load_ivecs(p)?;
        let k = ids.k();
        let n = ids.n_queries();
        gt.validate(n)?;
        ids.validate(n)?;
        let graph_ids = KnnGraph::from_rows(
            k,
            &ids.rows()
                .map(|r| r.iter().map(|&id| (id, 0.0)).collect())
                .collect::<Vec<_>>(),
        )?;
        let exact = gt.truncated(k)?;
        let report = eval::graph_accuracy_report(&graph_ids, &exact)?;
        table.push(["graph_accuracy".to_string(), k.to_string(), fmt_f64(report.value)]);
        if let Some(list) = &a.k_list {
            for (kp, acc) in eval::accuracy_vs_k_with_gt(&graph_ids, &gt, &parse_list(list)?)? {
                table.push(["accuracy_vs_k".to_string(), kp.to_string(), fmt_f64(acc)]);
            }
        }
    }
    if let Some(p) = &a.results {
        let res = dataset::load_ivecs(p)?;
        if res.n_queries() != gt.n_queries() || res.k() > gt.k() {
            return Err(Error::param("results and ground truth disagree in shape"));
        }
        let per: Vec<f64> = res
            .rows()
            .zip(gt.rows())
            .map(|(r, t)| eval::recall(r, &t[..res.k()]))
            .collect();
        let report = eval::EvalReport::from_breakdown("recall", per);
        table.push(["recall".to_string(), res.k().to_string(), fmt_f64(report.value)]);
    }
    if table.rows().is_empty() {
        return Err(Error::param("nothing to evaluate: pass --graph and/or --results"));
    }
    if let Some(p) = &a.csv {
        table.write_csv(p)?;
    }
    write!(out, "{}", table.to_summary())?;
    Ok(())
}

fn extension(p: &Path) -> &str {
    p.extension().and_then(|e| e.to_str()).unwrap_or("")
}

pub fn cmd_convert(a: &ConvertArgs, out: &mut dyn Write) -> Result<()> {
    match (extension(&a.input), extension(&a.output)) {
        ("fvecs", "csv") => {
            let vs = dataset::load_fvecs(&a.input)?;
            let mut text = String::new();
            for row in vs.rows() {
                let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                text.push_str(&cells.join(","));
                text.push('\n');
            }
            dataset::write_file(&a.output, text.as_bytes())?;
        }
        ("ivecs", "csv") => {
            let gt = dataset::load_ivecs(&a.input)?;
            let mut text = String::new();
            for row in gt.rows() {
                let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                text.push_str(&cells.join(","));
                text.push('\n');
            }
            dataset::write_file(&a.output, text.as_bytes())?;
        }
        ("csv", "fvecs") => {
            let rows = read_csv_rows(&a.input, |s| s.parse::<f32>().ok())?;
            dataset::save_fvecs(&VectorSet::from_rows(&rows)?, &a.output)?;
        }
        ("csv", "ivecs") => {
            let rows = read_csv_rows(&a.input, |s| s.parse::<u32>().ok())?;
            dataset::save_ivecs(&GroundTruth::from_rows(&rows)?, &a.output)?;
        }
        (i, o) => return Err(Error::param(format!("cannot convert .{i} to .{o}"))),
    }
    say(out, format!("wrote {}", a.output.display()))
}

fn read_csv_rows<T>(path: &Path, parse: impl Fn(&str) -> Option<T>) -> Result<Vec<Vec<T>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io_path(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(ln, l)| {
            l.split(',')
                .map(|c| {
                    parse(c.trim()).ok_or_else(|| Error::Format {
                        offset: ln as u64,
                        msg: format!("line {}: bad value {c:?}", ln + 1),
                    })
                })
                .collect()
        })
        .collect()
}
