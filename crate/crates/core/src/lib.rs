//! Grid experiments for weighted pointwise and integral Hardy inequalities.
//!
//! The crate discretizes open subsets of the line and the plane on uniform
//! grids and measures doubling, maximal-function, Poincaré and Hardy
//! constants on them. The [`certificate`] module evaluates the explicit
//! constant pipeline of the self-improvement argument with exact or
//! directed-rounding arithmetic.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::unnecessary_map_or)]

pub mod certificate;
pub mod curves;
pub mod domain;
pub mod error;
pub mod field;
pub mod hardy;
pub mod maximal;
pub mod weights;

mod util;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use certificate::{
    alpha_bound, improvement_certificate, propagate_hardy_constants, propagate_poincare_constants,
    HardyHypotheses, ImprovementCertificate, LogReal,
};
pub use curves::{connect_pair, curve_infimum, CurveResult};
pub use domain::{build_domain, quasiconvexity_estimate, DomainSpec, GridDomain, Shape, Side};
pub use error::{LabError, Result};
pub use field::{ExperimentParams, ScalarField};
pub use hardy::{
    alpha_estimate, pointwise_hardy_constant, CandidateFamily, Generator, Recipe,
    TestFunctionCorpus,
};
pub use maximal::{maximal, maximal_capped};
pub use util::OrdF64;
pub use weights::{
    distance_power_weight, doubling_constant, doubling_constant_with, measure, DoublingReport,
    Weight, WeightKind,
};
