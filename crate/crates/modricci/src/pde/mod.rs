//! Radial heat and Poisson solvers and the estimates built on them.

pub mod heat;

pub use heat::{
    fit_heat_constants, heat_kernel_radial, verify_heat_kernel_bounds, HeatConstants, HeatGridSpec, HeatKernelGrid,
    KernelSlice,
};
pub mod cutoff;

pub use cutoff::{build_cutoff, smooth_clamp, verify_cutoff, Bump, CutoffFunction, CutoffSampling};
pub mod elliptic;

pub use elliptic::{
    equation_residual, solve_poisson_radial, verify_gradient_estimate, verify_max_principle,
    verify_parabolic_estimate, RadialFunction,
};
pub mod green;

pub use green::{dirichlet_green, verify_green_bound, GreenProfile};
