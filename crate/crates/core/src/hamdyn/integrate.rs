use serde::{Deserialize, Serialize};

use super::system::{ham_vector_field, HamiltonianSystem};
use super::Vector;
use crate::error::{Result, SymError};
use crate::linalg::Mat;

const NEWTON_ITERATIONS: usize = 40;
const NEWTON_TOL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    /// Second-order implicit midpoint rule.
    #[default]
    ImplicitMidpoint,
    /// Fourth-order two-stage Gauss-Legendre collocation.
    Gauss4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vector>,
}

impl Trajectory {
    pub fn end(&self) -> &Vector {
        self.states.last().expect("trajectories are nonempty")
    }

    pub fn max_energy_drift(&self, sys: &HamiltonianSystem) -> f64 {
        let e0 = sys.energy(&self.states[0]);
        self.states
            .iter()
            .map(|z| (sys.energy(z) - e0).abs())
            .fold(0.0, f64::max)
    }
}

fn step_count(t_end: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SymError::Parameter("dt must be positive".into()));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(SymError::Parameter("horizon must be finite and nonnegative".into()));
    }
    Ok((t_end / dt - 1e-9).ceil().max(0.0) as usize)
}

/// Solves `f(x) = 0` by Newton's method with Jacobian `jac`. `None` on
/// divergence.
fn newton(
    mut x: Vector,
    f: impl Fn(&Vector) -> Result<Vector>,
    jac: impl Fn(&Vector) -> Result<Mat>,
) -> Option<Vector> {
    let mut last = f64::INFINITY;
    for _ in 0..NEWTON_ITERATIONS {
        let r = f(&x).ok()?;
        let dx = jac(&x).ok()?.lu().solve(&r)?;
        x -= &dx;
        let size = dx.norm();
        if !size.is_finite() {
            return None;
        }
        let scale = x.norm().max(1.0);
        // Stop once converged or once rounding prevents further progress.
        if size <= NEWTON_TOL * scale || (size >= last && size < 1e-11 * scale) {
            return Some(x);
        }
        last = size;
    }
    None
}

const SQRT3_6: f64 = 0.288_675_134_594_812_9;
const GAUSS_A: [[f64; 2]; 2] = [[0.25, 0.25 - SQRT3_6], [0.25 + SQRT3_6, 0.25]];

/// One step `z -> z'` and, when `psi` is given, the matching step of the
/// variational equation `Psi' = J Hess H(z) Psi`.
fn step(
    sys: &HamiltonianSystem,
    method: Integrator,
    z: &Vector,
    psi: Option<&Mat>,
    h: f64,
    time: f64,
) -> Result<(Vector, Option<Mat>)> {
    let dim = z.len();
    let j = sys.j_matrix();
    let fail = || SymError::StepFailure { time };
    let id = Mat::identity(dim, dim);
    match method {
        Integrator::ImplicitMidpoint => {
            let guess = z + ham_vector_field(sys, z)? * h;
            let z1 = newton(
                guess,
                |w| Ok(w - z - ham_vector_field(sys, &((z + w) * 0.5))? * h),
                |w| Ok(&id - &j * sys.hessian(&((z + w) * 0.5))? * (0.5 * h)),
            )
            .ok_or_else(fail)?;
            let psi1 = match psi {
                Some(p) => {
                    let a = &j * sys.hessian(&((z + &z1) * 0.5))? * (0.5 * h);
                    Some((&id - &a).lu().solve(&((&id + &a) * p)).ok_or_else(fail)?)
                }
                None => None,
            };
            Ok((z1, psi1))
        }
        Integrator::Gauss4 => {
            let x0 = ham_vector_field(sys, z)?;
            let mut guess = Vector::zeros(2 * dim);
            guess.rows_mut(0, dim).copy_from(&x0);
            guess.rows_mut(dim, dim).copy_from(&x0);
            let stage = |k: &Vector, i: usize| -> Vector {
                z + (k.rows(0, dim) * GAUSS_A[i][0] + k.rows(dim, dim) * GAUSS_A[i][1]) * h
            };
            let k = newton(
                guess,
                |k| {
                    let mut r = k.clone();
                    for i in 0..2 {
                        let x = ham_vector_field(sys, &stage(k, i))?;
                        let mut rows = r.rows_mut(i * dim, dim);
                        rows -= x;
                    }
                    Ok(r)
                },
                |k| {
                    let mut m = Mat::identity(2 * dim, 2 * dim);
                    for i in 0..2 {
                        let b = &j * sys.hessian(&stage(k, i))?;
                        for c in 0..2 {
                            let mut block = m.view_mut((i * dim, c * dim), (dim, dim));
                            block -= &b * (h * GAUSS_A[i][c]);
                        }
                    }
                    Ok(m)
                },
            )
            .ok_or_else(fail)?;
            let z1 = z + (k.rows(0, dim) + k.rows(dim, dim)) * (0.5 * h);
            let psi1 = match psi {
                Some(p) => {
                    let a: Vec<Mat> = (0..2)
                        .map(|i| Ok(&j * sys.hessian(&stage(&k, i))?))
                        .collect::<Result<_>>()?;
                    let mut m = Mat::identity(2 * dim, 2 * dim);
                    let mut rhs = Mat::zeros(2 * dim, dim);
                    for i in 0..2 {
                        for c in 0..2 {
                            let mut block = m.view_mut((i * dim, c * dim), (dim, dim));
                            block -= &a[i] * (h * GAUSS_A[i][c]);
                        }
                        rhs.view_mut((i * dim, 0), (dim, dim)).copy_from(&(&a[i] * p));
                    }
                    let kk = m.lu().solve(&rhs).ok_or_else(fail)?;
                    Some(p + (kk.rows(0, dim) + kk.rows(dim, dim)) * (0.5 * h))
                }
                None => None,
            };
            Ok((z1, psi1))
        }
    }
}

/// Trajectory of `z' = X_H(z)` on `[0, t_end]` with the step `dt` shrunk so
/// that `t_end` is hit exactly.
pub fn integrate_with(
    sys: &HamiltonianSystem,
    z0: &Vector,
    t_end: f64,
    dt: f64,
    method: Integrator,
) -> Result<Trajectory> {
    Ok(run(sys, z0, t_end, dt, method, false)?.0)
}

/// Implicit-midpoint trajectory.
pub fn integrate(sys: &HamiltonianSystem, z0: &Vector, t_end: f64, dt: f64) -> Result<Trajectory> {
    integrate_with(sys, z0, t_end, dt, Integrator::ImplicitMidpoint)
}

/// Trajectory together with the linearized flow `Psi_k` at every sample.
pub fn integrate_variational(
    sys: &HamiltonianSystem,
    z0: &Vector,
    t_end: f64,
    dt: f64,
    method: Integrator,
) -> Result<(Trajectory, Vec<Mat>)> {
    run(sys, z0, t_end, dt, method, true)
}

fn run(
    sys: &HamiltonianSystem,
    z0: &Vector,
    t_end: f64,
    dt: f64,
    method: Integrator,
    variational: bool,
) -> Result<(Trajectory, Vec<Mat>)> {
    if z0.len() != sys.dim() {
        return Err(SymError::DimensionMismatch {
            expected: sys.dim(),
            found: z0.len(),
        });
    }
    let steps = step_count(t_end, dt)?;
    let h = if steps == 0 { 0.0 } else { t_end / steps as f64 };
    let dim = sys.dim();
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut psis = Vec::new();
    times.push(0.0);
    states.push(z0.clone());
    let mut psi = variational.then(|| Mat::identity(dim, dim));
    if let Some(p) = &psi {
        psis.push(p.clone());
    }
    for k in 0..steps {
        let t = k as f64 * h;
        let z = states.last().expect("nonempty");
        let (z1, p1) = step(sys, method, z, psi.as_ref(), h, t)?;
        if z1.iter().any(|v| !v.is_finite()) {
            return Err(SymError::StepFailure { time: t });
        }
        times.push(if k + 1 == steps { t_end } else { (k + 1) as f64 * h });
        states.push(z1);
        if let Some(p) = p1 {
            psis.push(p.clone());
            psi = Some(p);
        }
    }
    Ok((Trajectory { times, states }, psis))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::hamdyn::{Hamiltonian, JConvention, Monomial, PhaseSpace};
    use crate::linalg;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    fn harmonic() -> HamiltonianSystem {
        HamiltonianSystem::new(PhaseSpace::Plane, Hamiltonian::Harmonic { omega: 1.0 }, JConvention::Standard).unwrap()
    }

    fn pendulum(epsilon: f64) -> HamiltonianSystem {
        HamiltonianSystem::new(PhaseSpace::Cylinder, Hamiltonian::Pendulum { epsilon }, JConvention::Standard).unwrap()
    }

    #[test]
    fn harmonic_returns_after_two_pi() {
        let tr = integrate(&harmonic(), &v(&[1.0, 0.0]), 2.0 * PI, 1e-3).unwrap();
        assert!((tr.end() - v(&[1.0, 0.0])).norm() < 1e-6);
        // The exact flow is exp(t J0).
        let mid = tr.states.len() / 3;
        let exact = linalg::rotation(1, tr.times[mid]) * v(&[1.0, 0.0]);
        assert!((&tr.states[mid] - exact).norm() < 1e-6);
    }

    #[test]
    fn pendulum_energy_at_rest_point_and_in_motion() {
        let tr = integrate(&pendulum(1.0), &v(&[0.5, 0.0]), 100.0, 1e-3).unwrap();
        assert!(tr.max_energy_drift(&pendulum(1.0)) < 1e-8);
        let g = integrate_with(&pendulum(1.0), &v(&[0.2, 0.3]), 20.0, 1e-3, Integrator::Gauss4).unwrap();
        assert!(g.max_energy_drift(&pendulum(1.0)) < 1e-8);
    }

    #[test]
    fn midpoint_drift_is_second_order() {
        let sys = pendulum(1.0);
        let z = v(&[0.2, 0.3]);
        let a = integrate(&sys, &z, 2.0, 2e-2).unwrap().max_energy_drift(&sys);
        let b = integrate(&sys, &z, 2.0, 1e-2).unwrap().max_energy_drift(&sys);
        let ratio = a / b;
        assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn zero_hamiltonian_is_constant() {
        let sys = HamiltonianSystem::new(PhaseSpace::Euclidean(2), Hamiltonian::Polynomial(vec![]), JConvention::Standard).unwrap();
        let z = v(&[1.0, 2.0, 3.0, 4.0]);
        let tr = integrate(&sys, &z, 1.0, 0.1).unwrap();
        assert!(tr.states.iter().all(|s| *s == z));
        assert_eq!(tr.times.len(), 11);
    }

    #[test]
    fn variational_flow_is_symplectic() {
        let sys = HamiltonianSystem::new(
            PhaseSpace::Plane,
            Hamiltonian::Polynomial(vec![
                Monomial { coefficient: 0.5, powers: vec![0, 2] },
                Monomial { coefficient: 0.25, powers: vec![4, 0] },
            ]),
            JConvention::Canonical,
        )
        .unwrap();
        for method in [Integrator::ImplicitMidpoint, Integrator::Gauss4] {
            let (_, psis) = integrate_variational(&sys, &v(&[1.0, 0.2]), 3.0, 1e-2, method).unwrap();
            for p in &psis {
                assert!(linalg::symplectic_residual(p).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn variational_flow_matches_differences() {
        let sys = pendulum(0.3);
        let z = v(&[0.1, 0.4]);
        let (_, psis) = integrate_variational(&sys, &z, 1.5, 1e-3, Integrator::Gauss4).unwrap();
        let h = 1e-6;
        for i in 0..2 {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[i] += h;
            zm[i] -= h;
            let col = (integrate_with(&sys, &zp, 1.5, 1e-3, Integrator::Gauss4).unwrap().end()
                - integrate_with(&sys, &zm, 1.5, 1e-3, Integrator::Gauss4).unwrap().end())
                / (2.0 * h);
            assert!((col - psis.last().unwrap().column(i)).norm() < 1e-6);
        }
    }

    #[test]
    fn bad_step_is_rejected() {
        assert_eq!(integrate(&harmonic(), &v(&[1.0, 0.0]), 1.0, 0.0).unwrap_err().name(), "parameter");
    }

    #[test]
    fn divergent_inner_solve_reports_time() {
        // H = x y^2 gives y' = y^2, which blows up at t = 1.
        let sys = HamiltonianSystem::new(
            PhaseSpace::Plane,
            Hamiltonian::Polynomial(vec![Monomial { coefficient: 1.0, powers: vec![1, 2] }]),
            JConvention::Standard,
        )
        .unwrap();
        let err = integrate(&sys, &v(&[0.0, 1.0]), 3.0, 0.05).unwrap_err();
        assert_eq!(err.name(), "step-failure");
    }
}
