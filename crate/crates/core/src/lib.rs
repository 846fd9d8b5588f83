//! Phase-locking analysis for the finite all-to-all Kuramoto model
//!
//! ```text
//! θ̇_i = ω_i + (k/N) Σ_j sin(θ_j − θ_i)
//! ```
//!
//! in grounded coordinates `x = θ − ⟨θ⟩`, `Ω = ω − ⟨ω⟩`, where a phase-locked
//! solution is a fixed point `k f(x) = −Ω`.
//!
//! - [`frequencies`]: input vectors, centering, seeded sampling, file format.
//! - [`order_field`]: order parameter, coupling field, reduced Jacobian.
//! - [`coupling`]: bounds on and exact value of the critical coupling, existence
//!   tests, explicit fixed points and their enumeration.
//! - [`simulator`]: RK4 traces of `R²`, the homogeneous envelope `D(t)`.

pub mod coupling;
pub mod error;
pub mod format;
pub mod frequencies;
pub mod order_field;
pub mod simulator;

pub use coupling::{
    compute_kc, construct_fixed_point, default_eps, enumerate_fixed_points, existence_at,
    existence_with_signs, lower_bounds, order_band, upper_bound, CouplingReport, Enumeration,
    FixedPointCertificate, SignVector,
};
pub use error::{Error, Result};
pub use frequencies::{center, sample_normal, FrequencySpec};
pub use order_field::{
    coupling_field, order_parameter, reduced_jacobian, OrderParameter, PhaseState,
};
pub use simulator::{homogeneous_run, integrate, SimConfig, SimTrace};
