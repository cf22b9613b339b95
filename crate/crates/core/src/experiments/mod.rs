//! Reproductions of the instability examples and numerical experiments.

mod counterexamples;
mod crosscheck;
mod stability;

pub use counterexamples::{
    asymmetric_jump_control, counterexample1, counterexample1_limit, counterexample2,
    counterexample2_limit, counterexample2_limit_state, ramp_loads, step_load, ExampleCase,
    ExampleError,
};
pub use crosscheck::{
    is_monotone_within, normalization_residual, viscous_crosscheck, write_crosscheck_csv,
    CrosscheckError, CrosscheckRow, Reference,
};
pub use stability::{
    stability_experiment, ExactTupleFamily, LoadFamily, Member, StabilityRow, StabilityTable,
    DEFAULT_NS,
};
