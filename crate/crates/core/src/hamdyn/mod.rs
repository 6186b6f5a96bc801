//! Autonomous Hamiltonian dynamics: vector fields `X_H = J grad H`,
//! symplectic integration, periodic orbits with their monodromy and
//! Conley-Zehnder indices, first-return periods and twist-map fixed points.

mod integrate;
mod orbit;
mod period;
mod system;
mod twist;

pub use integrate::{integrate, integrate_variational, integrate_with, Integrator, Trajectory};
pub use orbit::{find_periodic_orbit, monodromy_and_cz, MonodromyReport, PeriodicOrbit, ShootingOptions};
pub use period::{prime_period, PeriodClass};
pub use system::{
    ham_vector_field, GradientFn, Hamiltonian, HamiltonianSystem, JConvention, Monomial, PhaseSpace,
    ScalarFn, HESSIAN_STEP,
};
pub use twist::{twist_fixed_points, AnnulusGrid, FixedCircle, FixedPoint, TwistReport};

pub type Vector = nalgebra::DVector<f64>;
