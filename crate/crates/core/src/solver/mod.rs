//! CGLS, the IAS outer loop and the hybrid drivers.

mod cgls;
mod ias;
mod whiten;

pub use cgls::{cgls, cgls_with, CglsOptions, CglsOutcome, CglsStop, NORMAL_RESIDUAL_RTOL};
pub use ias::{
    alpha_update, hybrid_global, hybrid_global_with, hybrid_local, hybrid_local_with, ias_run,
    AlphaMode, IasOptions, IasState, Phase, PhaseSwitch, Problem, SolveReport, StoppingRule,
    THETA_FLOOR,
};
pub use whiten::whiten;
