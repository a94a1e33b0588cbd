//! Multilevel Monte Carlo for `x = e^{beta A} u`.
//!
//! `A` is split as `A = D - T` where `-T` is the generator of a
//! continuous-time Markov chain (up to sign flips) and `D` is diagonal. Entries
//! of `e^{beta A} u` are expectations of multiplicative functionals over chain
//! paths; Strang splitting with step `dt` discretizes them, and a telescoping
//! sum over `dt_l = beta / 2^l` removes most of the sampling cost.
//!
//! ```
//! use mlmc_expmv::{node_communicability, MlmcConfig, SparseMatrix};
//!
//! let a = SparseMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
//! let r = node_communicability(&a, 0, Some(1.0), &MlmcConfig::new(1e-3, 7)).unwrap();
//! assert!((r.estimate - 1f64.exp()).abs() < 1e-12);
//! ```

pub mod apps;
pub mod bench;
pub mod error;
pub mod io;
pub mod mc;
pub mod mlmc;
pub mod netgen;
pub mod oracle;
pub mod parallel;
pub mod paths;
pub mod rng;
pub mod spmat;

pub use apps::{
    build_heat3d, load_fem_system, node_communicability, simpson_weights, solve_convdiff_point, solve_heat_point,
    total_communicability, ConvDiffResult, FemSystem, Grid3D, HeatProblem, HeatSolution,
};
pub use error::{Error, Result};
pub use mc::{mc_auto, mc_forward_scalar, mc_single_entry, McAutoResult, McResult};
pub use mlmc::{
    bias_estimate, initial_level, mlmc_driver, optimal_allocation, ErrorControl, LevelStats, MlmcConfig, MlmcResult,
    Problem,
};
pub use netgen::{pref, smallw, GraphKind, GraphSpec};
pub use paths::{CoupledSample, FemCoupledSample, ForwardSource, PathState, Sample};
pub use rng::{stream_for, RngStream};
pub use spmat::{ChainDecomposition, Jump, SparseMatrix};
