//! Sparse rank-1 approximation of dense higher-order tensors under
//! ℓ1 regularization.
//!
//! The library solves `max ⟨T, x_1 ∘ ... ∘ x_d⟩ − Σ_j ω_j‖x_j‖₁` over
//! unit vectors with two one-pass approximation algorithms — V1 extracts
//! a dominant singular pair per unfolding, V2 a max-energy row — plus an
//! alternating maximization refiner. Both algorithms come with
//! evaluable lower-bound ratios (valid whenever `ω_j < 1/√n_j`) and an
//! unfolding-based upper bound, and a harness reproduces the synthetic
//! benchmark protocol with seeded, bit-reproducible results.
//!
//! ```
//! use sbr1_core::algo::{algorithm_v1, RegParams};
//! use sbr1_core::experiment::{generate_instance, InstanceSpec};
//!
//! let inst = generate_instance(&InstanceSpec {
//!     shape: vec![8, 8, 8],
//!     num_terms: 10,
//!     sparsity_ratio: 0.7,
//!     seed: 1,
//! })
//! .unwrap();
//! let params = RegParams::default_rule(inst.tensor.shape());
//! let report = algorithm_v1(&inst.tensor, &params).unwrap();
//! assert!(report.solution.lambda <= report.upper_bound.unwrap() + 1e-8);
//! ```
//!
//! Experiment drivers run records in parallel through rayon when the
//! `parallel` feature (default) is enabled; disabling it falls back to
//! sequential execution with identical output.

pub mod algo;
pub mod amm;
pub mod error;
pub mod experiment;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod seed;
pub mod sparsify;
pub mod tensor;
mod vecmath;

pub use algo::{
    algorithm_v1, algorithm_v2, bound_ratio_v1, bound_ratio_v2, objective_value, run_approx,
    upper_bound_vub, AlgoReport, Rank1Solution, RegParams, RunOptions, Variant,
};
pub use amm::{amm_block_update, amm_solve, random_init, AmmConfig, AmmInit, AmmTrace};
pub use error::{Error, Result};
pub use experiment::{
    experiment_amm, experiment_vary_n, experiment_vary_sr, generate_instance, sparsity_ratio,
    ExperimentOptions, ExperimentResult, InstanceSpec, Record, RecordVariant, SyntheticInstance,
};
pub use linalg::{leading_singular_pair, max_energy_row, SingularPair};
pub use sparsify::{
    soft_threshold, sphere_l1_maximize, xi_empirical, xi_lower_bound, Branch, SparsifyResult,
};
pub use tensor::{DenseTensor, Matrix};
