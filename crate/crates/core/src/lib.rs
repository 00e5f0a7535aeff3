//! Approximate nearest neighbor search over a randomized truncated
//! KD-tree forest and an approximate kNN graph.
//!
//! The index has two parts. A forest of randomized KD-trees whose leaves
//! hold a handful of points each, and a kNN graph built by conquering the
//! trees' leaves and refining the result with NN-descent. A query is seeded
//! from the forest's closest leaves and then expanded over the graph.
//!
//! ```
//! use kdgraph::{build_forest, build_graph, gen_synthetic, GraphParams, SearchParams, Searcher, Strategy};
//!
//! let base = gen_synthetic(2_000, 16, 7).unwrap();
//! let forest = build_forest(&base, 4, 10, 7).unwrap();
//! let params = GraphParams { k: 10, conquer_depth: 4, ..Default::default() };
//! let (graph, _stats) = build_graph(&base, Some(&forest), &params, Strategy::EfannaDescent, None).unwrap();
//!
//! let searcher = Searcher::new(&base, Some(&forest), &graph).unwrap();
//! let query = vec![0.5f32; 16];
//! let sp = SearchParams { k: 5, pool_size: 40, expansion: 20, iters: 4, n_trees: 4 };
//! let hits = searcher.search(&query, &sp, &mut searcher.scratch()).unwrap();
//! assert_eq!(hits.ids.len(), 5);
//! ```

pub mod cli;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod graph;
pub mod graph_build;
pub mod kd_forest;
pub mod pool;
pub mod report;
pub mod search;

pub use dataset::{gen_synthetic, load_fvecs, load_ivecs, save_fvecs, save_ivecs, GroundTruth, VectorSet};
pub use error::{Error, Result};
pub use eval::{
    accuracy_vs_k, brute_force_graph, brute_force_knn, graph_accuracy, recall, EvalReport, QuerySet,
};
pub use graph::KnnGraph;
pub use graph_build::{build_graph, init_graph, random_init, BuildStats, GraphParams, RefineState, Strategy};
pub use kd_forest::{build_forest, KdForest, KdNode, KdTree};
pub use pool::{NeighborEntry, NeighborPool};
pub use search::{recall_curve, SearchParams, SearchResult, Searcher, Seeding};
