//! Quasi-static drops sliding down an inclined plane with heterogeneous
//! adhesion, in one space dimension.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar for the common cases.

pub mod beta;
mod cache;
pub mod csv;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod homog;
pub mod ode;
pub mod oracle;
pub mod params;
pub mod quadrature;
pub mod roots;
pub mod scalar;
pub mod tables;
pub mod validate;
pub mod waves;

pub use beta::BetaProfile;
pub use dynamics::{simulate, DropState, SimulateOptions, Trajectory, VelocityLaw};
pub use equilibrium::{solve_bvp, solve_obstacle, EquilibriumProfile};
pub use error::{DropletError, Result};
pub use homog::EffectiveLaw;
pub use params::PhysicalParams;
pub use scalar::Real;
pub use tables::{CriticalLength, SlopeTables};

pub type Params = PhysicalParams<f64>;
pub type Beta = BetaProfile<f64>;
pub type Tables = SlopeTables<f64>;
pub type Profile = EquilibriumProfile<f64>;
pub type Traj = Trajectory<f64>;
pub type Law = EffectiveLaw<f64>;

pub type Params32 = PhysicalParams<f32>;
pub type Beta32 = BetaProfile<f32>;
pub type Tables32 = SlopeTables<f32>;
pub type Profile32 = EquilibriumProfile<f32>;
