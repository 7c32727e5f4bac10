//! Numerical toolkit for function spaces on bounded planar uniform domains.
//!
//! The crate builds dyadic Whitney covers of simple polygons (inside and
//! outside), finds admissible chains between Whitney cubes and measures how
//! uniform the domain looks, evaluates difference-based Triebel–Lizorkin
//! seminorms in their full, shadow-restricted and ball-restricted forms,
//! applies the Jones extension operator through symmetrized cubes, and
//! evaluates truncated convolution Calderón–Zygmund operators by
//! principal-value quadrature.
//!
//! Everything here is `no_std` + `alloc`. File formats, plotting and the
//! command line live in the companion `fracspace-cli` crate. With the
//! `parallel` feature the outer node loops run on rayon; reductions are
//! always performed in node order so results do not depend on the thread
//! count.

#![no_std]
#![allow(clippy::too_many_arguments)]
// `!(x > 0.0)` is how parameter checks reject NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// `Float` supplies the libm methods without std. Once anything in the build
// graph links std (our `std` feature, or a dev-dependency), the inherent f64
// methods win and the imports look unused.
#![allow(unused_imports)]

extern crate alloc;

pub mod chains;
pub mod czo;
mod error;
pub mod extension;
pub mod funcspace;
pub mod geometry;
mod math;
pub(crate) mod par;

pub use error::Error;

/// Spatial dimension. Everything in this crate is planar.
pub const DIM: u32 = 2;

/// Crate version, for provenance records.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
