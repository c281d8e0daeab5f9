//! Numerical laboratory for quasi-linear (possibly degenerate) parabolic
//! equations coupled to nonlinear *dynamic* boundary conditions:
//!
//! ```text
//! ∂ₜu − div(a(|∇u|²)∇u) + f(u) = h₁(x),           in Ω,
//! ∂ₜu + b(x) a(|∇u|²) ∂ₙu + g(u) = h₂(x),          on Γ = ∂Ω,
//! ```
//!
//! with the flux family `a(s) = |s|^((p−2)/2)` (p-Laplacian type, regularised
//! as `a_ε(s) = a(s+ε)`) or constant diffusion `a ≡ ν`.  The boundary trace is
//! an evolving unknown of its own; bulk and boundary states live in the
//! product space `X² = L²(Ω) ⊕ L²(Γ, dS/b)`.
//!
//! What the crate provides, by module:
//!
//! * [`grid`] — structured 1D/2D grids with the weighted measure
//!   `dμ = dx ⊕ dS/b`, discrete norms, traces and gradients;
//! * [`nonlin`] — parametric flux/reaction families and their growth metadata;
//! * [`hypotheses`] — numeric certification of the structural hypotheses
//!   (coercivity, monotonicity, growth envelopes, bulk/boundary balance) and a
//!   regime classifier (dissipative / competing / blow-up prone);
//! * [`poincare`] — Poincaré- and trace-constant estimation on the grid;
//! * [`operator`] — the discrete monotone operator `B_p` with exact
//!   summation-by-parts duality against its energy form;
//! * [`stepper`] — implicit (backward Euler) gradient-flow time stepping with
//!   Newton + line search, adaptive steps and blow-up detection;
//! * [`diagnostics`] — absorbing sets, sup-norm ladders, energy decay fits,
//!   blow-up rate fits;
//! * [`attractor`] — tangent linearisation (semilinear case), Lyapunov
//!   spectra, Kaplan–Yorke dimensions and diffusion sweeps;
//! * [`blowup`] — Dirichlet eigenpairs, subsolution construction, comparison
//!   runs and the full blow-up experiment;
//! * [`config`] / [`runner`] — config-driven scenario execution behind the
//!   thin `dynbc` CLI.
//!
//! See the crate `examples/` directory for one runnable program per
//! capability and `configs/` for one config file per experiment kind.

pub mod attractor;
pub mod blowup;
pub mod config;
pub mod diagnostics;
pub mod fit;
pub mod grid;
pub mod hypotheses;
pub mod linalg;
pub mod nonlin;
pub mod operator;
pub mod poincare;
pub mod runner;
pub mod stepper;

pub use grid::{GridDomain, StateField};
pub use nonlin::{FluxSpec, NonlinearitySpec};
pub use stepper::{SolverConfig, TrajectoryRecord};
