//! Circuit families for the parity-context and eraser experiments, the
//! witnesses computed from their counts, and plan execution.

mod a6;
mod a62;
mod ensemble;
mod run;
mod witness;

pub use a6::{
    build_active_circuit, build_ctxonly_circuit, build_passive_circuit, Family, LanePlan,
    PairBasis, Replicate, A6_LABELS, CTX_LABELS,
};
pub use a62::{build_a62_circuit, A62Plan, Branch, A62_LABELS, REGISTER};
pub use ensemble::{ContextEnsemble, Triple};
pub use run::{
    run_a6, run_a62, A62Circuit, A62Run, A6Circuit, A6Plan, A6Run, NoiseTable, RunMode, RunTable,
};
pub use witness::{
    ctx_ok, ex_mean_witness, lane_balanced_delta, LaneDelta, LaneWitness, WitnessResult,
};
