//! Uniformly finite homology over finitely generated amenable groups,
//! computed exactly on finite windows.
//!
//! Everything here works with explicit group elements inside a ball
//! `B_W(e)` of the Cayley graph (the *window*). Operations either return
//! exact answers, flag which part of a result is truncated at the rim, or
//! refuse with a "window too small" error — they never silently
//! approximate.

pub mod cayley;
pub mod chain;
pub mod compare;
pub mod error;
pub mod func;
pub mod geometry;
pub mod group;
pub mod linfty;
pub mod scalar;
pub mod sparse;
pub mod thick;
pub mod tiling;
pub mod whyte;

pub use cayley::Cayley;
pub use chain::{interval_chain, UfChain};
pub use compare::{
    beta_profile, compare, independence_matrix, CompareOptions, Comparison, ComparisonVerdict,
    IndependenceReport,
};
pub use error::{Error, Result};
pub use func::{BoundedFunction, SetRule, SparseRing};
pub use geometry::{
    check_star_condition, ensure_star_condition, growth_table, indices, r_boundary,
    sigma_profile, FiniteSubset, FolnerFamily, FolnerKind, GrowthTable, StarReport, Window,
};
pub use group::{Element, GroupSpec, SubgroupSpec};
pub use linfty::{
    coset_average, folner_mean, i_star, invariant_cycle, pi_star, rho, rho_inv, transfer,
    ApproxMean, CoeffFn, CosetAverage, GroupChain, LInftyChain,
};
pub use scalar::Scalar;
pub use sparse::{
    invisibility_decay, iterate_sparse, point_cloud_csv, sparse_construct, sparse_verify,
    CSequence, DecayTable, IteratedSparse, SparseCertificate, SparseDiagnostics,
};
pub use thick::{
    separate_search, thick_construct, thick_verify, ThickFamily, ThickReport, ThickWitness,
};
pub use tiling::{greedy_tiling, tiles_in, tiling_index, tiling_to_json, Tiling, TilingIndex};
pub use whyte::{boundary_bound_check, whyte_witness, BoundaryBoundReport, WhyteOutcome};
