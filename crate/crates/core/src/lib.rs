//! Wasserstein Weisfeiler–Lehman subtree (WWLS) distance and kernel.
//!
//! Every node is described by the bag of complete subtrees of its WL
//! unfolding tree, hashed with random polynomial evaluation modulo a prime.
//! The L1 distance between two bags approximates the tree edit distance
//! between the unfolding trees; the WWLS distance between two graphs is the
//! 1-Wasserstein distance between their node distributions under that
//! ground distance.
//!
//! ```
//! use wwls::{gen_cycle, wwls_distance, HashParams, Solver, DEFAULT_MODULUS};
//!
//! let params = HashParams::new(DEFAULT_MODULUS, 2, 2, 0).unwrap();
//! let a = gen_cycle(6).unwrap();
//! let b = gen_cycle(7).unwrap();
//! assert_eq!(wwls_distance(&a, &a, &params, &Solver::Exact).unwrap(), 0.0);
//! assert_eq!(wwls_distance(&a, &b, &params, &Solver::Exact).unwrap(), 0.0);
//! ```

pub mod bocs;
pub mod error;
pub mod experiment;
pub mod generate;
pub mod graph;
pub mod hash;
pub mod metric;
pub mod ot;
pub mod par;
pub mod ted;
pub mod tud;

pub use bocs::{bocs_from_multiset, l1_ted, BocsVector};
pub use error::{Error, Result};
pub use experiment::{run_noise_experiment, saturation_index, spearman, GraphKind, NoiseConfig, NoiseMetric, NoiseResult};
pub use generate::{gen_cycle, gen_grid, gen_random_graph, perturb, perturb_sequence, NoiseMode, NoiseSpec};
pub use graph::{assign_degree_labels, laplacian_frobenius, Graph, LabeledDataset};
pub use hash::{
    canonical_subtree_encodings, count_subtree_types, node_subtree_hashes, wl_relabel, HashParams,
    SubtreeKey, SubtreeMultiset, TypeCountMethod, DEFAULT_MODULUS,
};
pub use metric::{
    embedded_distance, kernel_from_distance, kernel_value, knn_eval, pairwise_matrix, wwl_baseline_distance,
    wwls_distance, GraphEmbedding, KnnReport, MatrixMode, PairwiseMatrix, Solver,
};
pub use ot::{emd, emd_uniform_int, emd_weights, sinkhorn, CostMatrix, Histogram, SinkhornOptions, SinkhornResult, TransportPlan};
pub use par::Execution;
pub use ted::{check_ted_bound, exact_ted, TinyTree};
pub use tud::{parse_tud_dataset, write_tud_dataset};
