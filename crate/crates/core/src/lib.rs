//! Extremal dependence between groups of variables: rank-based extremal
//! coefficient and SECO estimators, closed forms for nested logistic and
//! Hüsler-Reiss models, exact samplers, and clustering of groups by their
//! extremal dependence.
//!
//! ```
//! use seco_core::{rank_matrix, sample_nested_logistic, seco_matrix, NestedModelSpec};
//!
//! let spec = NestedModelSpec::logistic(0.9, vec![0.3, 0.3, 0.5], vec![2, 2, 2]).unwrap();
//! let data = sample_nested_logistic(2000, &spec, 1).unwrap();
//! let seco = seco_matrix(&rank_matrix(&data), data.layout(), 50).unwrap();
//! assert_eq!(seco.d(), 3);
//! ```

pub mod clustering;
pub mod data;
pub mod error;
pub mod models;
pub mod tail;
pub mod validation;

pub use ndarray;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_240_601;

pub use clustering::{
    caice, check_dissimilarity, choose_k, hclust, kmedoids, parse_grid, select_tau, silhouette,
    KMedoids, KMethod, Linkage, Partition, PartitionMeta, Silhouette, SilhouetteTable, TauCurve,
    DEFAULT_TAU_GRID,
};
pub use data::{
    block_maxima, format_f64, load_dataset, rank_matrix, Dataset, GroupLayout, RankMatrix,
};
pub use error::{Error, Result};
pub use models::{
    normal_cdf, normal_sf, sample_ai_blocks, sample_logistic, sample_nested_logistic, seco_model,
    seco_nested_hr, seco_nested_logistic, stdf_hr, stdf_logistic, theta_hr, theta_model, Family,
    NestedModelSpec,
};
pub use tail::{
    dissimilarity_from_similarity, ext_coeff_eks, ext_coeff_mad, ext_coeff_madogram, ext_corr,
    madogram, read_matrix_csv, seco_matrix, seco_pair, seco_partition, write_matrix_csv, Madogram,
    SecoMatrix, TailParams,
};
pub use validation::{
    ari, ari_report, axiom_suite, bounds_experiment, coherence_levelsets, BoundsRow, BoundsTable,
    Check, ContingencyTable, Report,
};
