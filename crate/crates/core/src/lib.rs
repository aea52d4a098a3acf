//! Without-replacement SGD: permutation policies (random reshuffling, offline
//! GraB via herding), worst-case finite-sum constructions, step-size schedules,
//! exact brute-force oracles and Monte-Carlo rate sweeps.

pub mod error;
pub mod harness;
pub mod herding;
pub mod objectives;
pub mod optimizer;
pub mod oracle;
pub mod shuffler;

pub use error::{Error, Result};
pub use harness::{
    compare_policies, derive_seed, fit_rate, run_sweep, Axis, CompareReport, RateFit, StepSizeSpec, SweepRow, SweepSpec,
};
pub use herding::{herd_greedy, herd_signwalk, prefix_norm_profile, HerdingResult, VectorBatch};
pub use objectives::{
    make_diverging_quadratic, make_f1_quadratic, make_f2_piecewise, make_f3_quadratic_pm, make_shifted_quadratic,
    make_thm1_aggregate, make_thm7_coupled, make_thm9_nonconvex_pair, make_thm9_single_heavy, pad_to_even, ComponentFn,
    Constants, FiniteSumObjective, FunctionClass, SignPattern,
};
pub use optimizer::{
    lambert_w0, run_epochs, stepsize_grab, stepsize_mishchenko_strcvx, stepsize_tail_average, weighted_average,
    AveragingScheme, EpochTrace, RunConfig,
};
pub use oracle::{
    central_binomial_ratio, coupled_recursion_check, exhaustive_permutation_value, rr_expectation_exact,
    sign_stats_exact, SignStats,
};
pub use shuffler::{enumerate_all_orders, HerdingVariant, PermutationPolicy, PolicyKind};
