//! Solvers and verification tooling for scalar conservation laws whose
//! velocity depends on a forward-looking average of the density,
//!
//! ```text
//! ∂ₜρ + ∂ₓ( V(W[ρ]) ρ ) = 0,    W[ρ](x) = (1/ε) ∫ₓ^∞ η((x-y)/ε) ρ(y) dy,
//! ```
//!
//! together with the local law obtained as the kernel width vanishes.
//!
//! * [`profiles`]: piecewise-constant densities with exact integrals;
//! * [`velocity`]: traffic-type velocity models and the hypothesis checker;
//! * [`kernel`]: exact evaluation of W and its slopes for both kernels;
//! * [`nonlocal`]: the Lagrangian characteristics solver;
//! * [`local`]: Godunov scheme and exact Riemann evaluator;
//! * [`diagnostics`]: one-sided slope bounds, variation bound, maximum
//!   principle, mass bookkeeping;
//! * [`convergence`]: vanishing-width error sweeps against the local
//!   entropy solution;
//! * [`experiments`]: canned bound-versus-observed experiment recipes.

pub mod convergence;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod kernel;
pub mod local;
pub mod nonlocal;
pub mod profiles;
pub mod velocity;

pub use convergence::{
    fit_decay, resample_field, run_sweep, ErrorMetric, SweepConfig, SweepRow, SweepTable,
};
pub use diagnostics::{
    check_bounds_and_mass, check_oleinik_g, check_oleinik_w, check_tv_bound,
    min_difference_quotient, BoundsMassReport, OleinikGReport, OleinikWReport, TVReport,
};
pub use error::{Error, Result};
pub use experiments::{run_figure, write_figure_csvs, FigureMetric, FigureRecipe, FigureSeries};
pub use kernel::{box_nonlocal, exp_derivative, exp_nonlocal, KernelFamily, KernelSpec, WField};
pub use local::{riemann_eval, simulate_local, FluxFn, LocalGrid, LocalTrajectory};
pub use nonlocal::{
    admissible_dt, node_velocities, simulate, step, SimConfig, SimState, Snapshot, StepDiag,
    Trajectory,
};
pub use profiles::{PiecewiseConstantProfile, Window};
pub use velocity::{AssumptionReport, CustomVelocity, VelocityModel};
