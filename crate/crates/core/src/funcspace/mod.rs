//! Sampled functions on covers, `L^p` norms, the full / shadow / ball
//! difference seminorms, the fractional gradient and the maximal operator.
//!
//! Every integral is a midpoint rule over an `m x m` tensor grid in each
//! Whitney cube. Outer-node loops may run in parallel; sums over outer
//! nodes are always reduced in node order.

mod grid;
mod maximal;
mod seminorm;
mod sharpness;

pub use grid::{bump_profile, lp_norm, node_point, sample_function, Builtin, GridFunction};
pub use maximal::{
    check_maximal_lemma, cube_integral, max_maximal_lemma_ratios, maximal, maximal_all, maximal_family, rect_mean, MaximalLemmaRatios,
};
pub use seminorm::{
    cube_contributions, fractional_gradient, fractional_gradient_with, inner_integrals, seminorm, seminorm_with, NormDiagnostics,
    NormReport, SeminormOptions, SeminormParams, Variant, VariantTag,
};
pub use sharpness::{sharpness_experiment, SharpnessReport};
