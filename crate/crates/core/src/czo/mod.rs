//! Convolution Calderón–Zygmund kernels, principal-value quadrature and the
//! T(1) harness.

mod kernel;
mod pv;
mod t1;

pub use kernel::{verify_kernel, KernelAudit, KernelId, KernelSpec};
pub use pv::{pv_apply, pv_apply_many, PvQuadrature, PvValue};
pub use t1::{
    apply_to_one, indicator_fractions, key_lemma_ratio, t1_check, truncated_apply, Applied, CubeShare, KeyLemmaReport, NormParts, T1Report,
};
