//! Numerical laboratory for the large-time behavior of bounded solutions of
//! the reaction-diffusion equation `u_t = u_xx + f(u)` on the real line.
//!
//! The crate is organised around the objects that show up when studying
//! quasiconvergence:
//!
//! - [`nonlinearity`]: the reaction term, its antiderivative and the coercive
//!   modification used to make every steady-state orbit bounded.
//! - [`phase_plane`]: the Hamiltonian system `u' = v, v' = -f(u)`, orbit
//!   classification, periods and steady-state profiles.
//! - [`solver`]: a finite-difference solver on a truncated line whose
//!   Dirichlet data follow the limit ODE `θ' = f(θ)`.
//! - [`diagnostics`]: zero numbers, critical-point tracking, the reflection
//!   transform and the windowed energy.
//! - [`omega`]: late-time clustering into approximate ω-limit profiles and the
//!   quasiconvergence / convergence verdicts.
//! - [`experiment`] and [`verify`]: configuration, presets, output layout and
//!   the acceptance criteria.

pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod nonlinearity;
pub mod ode;
pub mod omega;
pub mod phase_plane;
pub mod quadrature;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{Grid, Profile};
pub use nonlinearity::{NonlinearitySpec, Reaction};
pub use phase_plane::{OrbitClass, PhasePoint};
