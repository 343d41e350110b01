//! Backaction-kernel estimation: the ΔE(θ) curve fit, the split of the
//! effective decay into local, proxy and residual context-conditioned
//! parts, the residual-kernel prediction from Möbius atoms, and the
//! context-dependence screen.

mod condition;
mod decompose;
mod fit;

pub use condition::{dc_condition_check, DcVerdict, ScreenResult};
pub use decompose::{
    decompose_gamma, gamma_rel_predict, ConditionKernel, KernelEstimate, CLAMP_FLOOR,
};
pub use fit::{fit_delta_curve, proxy_only_residual, CurvePoint, FitResult};
