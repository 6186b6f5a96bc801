use serde::Serialize;

use super::integrate::{integrate_variational, Integrator, Trajectory};
use super::system::{ham_vector_field, HamiltonianSystem};
use super::Vector;
use crate::error::{Result, SymError};
use crate::index::{self, IndexOptions, IndexValue};
use crate::linalg::{self, Mat};
use crate::path::SymplecticPath;

const MIN_PERIOD_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy)]
pub struct ShootingOptions {
    pub dt: f64,
    pub tol: f64,
    pub max_iterations: usize,
    pub method: Integrator,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            tol: 1e-8,
            max_iterations: 50,
            method: Integrator::Gauss4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PeriodicOrbit {
    pub z0: Vector,
    pub period: f64,
    pub trajectory: Trajectory,
    /// Linearized flow with time rescaled to `[0, 1]`.
    pub monodromy: SymplecticPath,
    pub residual: f64,
}

fn monodromy_path(
    sys: &HamiltonianSystem,
    period: f64,
    trajectory: &Trajectory,
    psis: Vec<Mat>,
) -> Result<SymplecticPath> {
    let times = trajectory.times.iter().map(|t| t / period).collect();
    let j = sys.j_matrix();
    let tangents = trajectory
        .states
        .iter()
        .zip(&psis)
        .map(|(z, p)| Ok(&j * sys.hessian(z)? * p * period))
        .collect::<Result<Vec<_>>>()?;
    SymplecticPath::with_tangents(times, psis, tangents, 1e-7)
}

fn flow(
    sys: &HamiltonianSystem,
    z: &Vector,
    period: f64,
    opts: &ShootingOptions,
) -> Result<(Trajectory, Vec<Mat>)> {
    // At least 64 samples so that the monodromy path is resolved.
    let dt = opts.dt.min(period / 64.0);
    integrate_variational(sys, z, period, dt, opts.method)
}

/// Newton shooting for `phi_T(z) = z` in the unknowns `(z, T)`, with `z`
/// kept on the hyperplane through the guess orthogonal to the flow and on
/// the energy level of the guess. One equation of the system is redundant
/// by energy conservation, so steps are least-squares solutions.
pub fn find_periodic_orbit(
    sys: &HamiltonianSystem,
    z_guess: &Vector,
    t_guess: f64,
    opts: &ShootingOptions,
) -> Result<PeriodicOrbit> {
    if !(t_guess > 0.0 && t_guess.is_finite()) || z_guess.iter().any(|v| !v.is_finite()) {
        return Err(SymError::Parameter("guesses must be finite with positive period".into()));
    }
    let space = sys.phase_space();
    let dim = sys.dim();
    let normal = ham_vector_field(sys, z_guess)?;
    let energy = sys.energy(z_guess);
    let scale = z_guess.norm().max(1.0);

    if normal.norm() <= 1e-12 * scale {
        let (trajectory, psis) = flow(sys, z_guess, t_guess, opts)?;
        let monodromy = monodromy_path(sys, t_guess, &trajectory, psis)?;
        return Ok(PeriodicOrbit {
            z0: z_guess.clone(),
            period: t_guess,
            trajectory,
            monodromy,
            residual: 0.0,
        });
    }

    let mut z = z_guess.clone();
    let mut period = t_guess;
    // Return defect, section offset and energy offset.
    let evaluate = |z: &Vector, period: f64| -> Result<(Trajectory, Vec<Mat>, Vector)> {
        let (tr, psis) = flow(sys, z, period, opts)?;
        let mut g = Vector::zeros(dim + 2);
        g.rows_mut(0, dim)
            .copy_from(&space.difference(tr.end(), z));
        g[dim] = normal.dot(&space.difference(z, z_guess));
        g[dim + 1] = sys.energy(z) - energy;
        Ok((tr, psis, g))
    };
    let (mut tr, mut psis, mut g) = evaluate(&z, period)?;
    for _ in 0..opts.max_iterations {
        if g.norm() <= opts.tol {
            let monodromy = monodromy_path(sys, period, &tr, psis)?;
            return Ok(PeriodicOrbit {
                z0: z,
                period,
                trajectory: tr,
                monodromy,
                residual: g.rows(0, dim).norm(),
            });
        }
        let m = psis.last().expect("nonempty");
        let x_end = ham_vector_field(sys, tr.end())?;
        let mut jac = Mat::zeros(dim + 2, dim + 1);
        jac.view_mut((0, 0), (dim, dim))
            .copy_from(&(m - Mat::identity(dim, dim)));
        jac.view_mut((0, dim), (dim, 1)).copy_from(&x_end);
        jac.view_mut((dim, 0), (1, dim)).copy_from(&normal.transpose());
        jac.view_mut((dim + 1, 0), (1, dim))
            .copy_from(&sys.gradient(&z)?.transpose());
        let svd = jac.svd(true, true);
        let cutoff = 1e-10 * svd.singular_values.max();
        let step = svd
            .solve(&(-&g), cutoff)
            .map_err(|e| SymError::Internal(e.to_string()))?;

        // Backtracking on the norm of the whole system.
        let merit = g.norm();
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..12 {
            let zt = &z + step.rows(0, dim) * lambda;
            let pt = period + step[dim] * lambda;
            // Periods collapsing to zero satisfy the equations trivially.
            if pt > MIN_PERIOD_FRACTION * t_guess {
                if let Ok((t2, p2, g2)) = evaluate(&zt, pt) {
                    if g2.norm() < merit {
                        accepted = Some((zt, pt, t2, p2, g2));
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        let Some((zt, pt, t2, p2, g2)) = accepted else {
            break;
        };
        z = zt;
        period = pt;
        tr = t2;
        psis = p2;
        g = g2;
    }
    Err(SymError::NoOrbitFound {
        iterations: opts.max_iterations,
        residual: g.norm(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MonodromyReport {
    pub endpoint_sigma: f64,
    pub nondegenerate: bool,
    /// Conley-Zehnder index of the monodromy path (standard normalization)
    /// when the orbit is nondegenerate.
    pub cz: Option<IndexValue>,
    pub cz_canonical: Option<IndexValue>,
}

/// Monodromy path of a periodic orbit and, when `1` is not an eigenvalue of
/// its endpoint, its Conley-Zehnder index in both normalizations.
pub fn monodromy_and_cz(
    sys: &HamiltonianSystem,
    orbit: &PeriodicOrbit,
    opts: &IndexOptions,
) -> Result<(SymplecticPath, MonodromyReport)> {
    if orbit.residual > 1e-6 {
        return Err(SymError::Parameter(format!(
            "orbit residual {:.3e} exceeds the shooting tolerance",
            orbit.residual
        )));
    }
    if orbit.monodromy.dim() != sys.dim() {
        return Err(SymError::DimensionMismatch {
            expected: sys.dim(),
            found: orbit.monodromy.dim(),
        });
    }
    let path = orbit.monodromy.clone();
    let dim = path.dim();
    let end = path.end();
    let sigma = linalg::smallest_singular_value(&(end - Mat::identity(dim, dim)));
    let scale = linalg::max_abs(end).max(1.0);
    let nondegenerate = sigma > opts.tol.max(1e-7) * scale;
    let cz = if nondegenerate {
        Some(index::cz_rs(&path, opts)?)
    } else {
        None
    };
    let report = MonodromyReport {
        endpoint_sigma: sigma,
        nondegenerate,
        cz,
        cz_canonical: cz.map(IndexValue::canonical),
    };
    Ok((path, report))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::hamdyn::{Hamiltonian, JConvention, Monomial, PhaseSpace};

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    #[test]
    fn harmonic_orbit_has_period_two_pi() {
        let sys = HamiltonianSystem::new(PhaseSpace::Plane, Hamiltonian::Harmonic { omega: 1.0 }, JConvention::Standard).unwrap();
        let orbit = find_periodic_orbit(&sys, &v(&[1.1, 0.0]), 6.0, &ShootingOptions::default()).unwrap();
        assert!((orbit.period - 2.0 * PI).abs() < 1e-6);
        assert!(orbit.residual <= 1e-8);
        let r = orbit.z0.norm();
        assert!(orbit.trajectory.states.iter().all(|z| (z.norm() - r).abs() < 1e-9));
        let (_, rep) = monodromy_and_cz(&sys, &orbit, &IndexOptions::default()).unwrap();
        assert!(!rep.nondegenerate);
        assert!(rep.cz.is_none());
    }

    #[test]
    fn small_libration_period() {
        // Linearization at q = 1/2: q'' = -4 pi^2 epsilon (q - 1/2).
        let eps = 0.5;
        let sys = HamiltonianSystem::new(PhaseSpace::Cylinder, Hamiltonian::Pendulum { epsilon: eps }, JConvention::Standard).unwrap();
        let linear = 1.0 / eps.sqrt();
        let mut errors = vec![];
        for amp in [0.02, 0.01, 0.005] {
            let orbit = find_periodic_orbit(&sys, &v(&[0.5 + amp, 0.0]), linear * 1.02, &ShootingOptions::default()).unwrap();
            errors.push((orbit.period - linear).abs());
        }
        assert!(errors[2] < errors[1] && errors[1] < errors[0]);
        assert!(errors[2] < 1e-3 * linear);
    }

    #[test]
    fn equilibria_are_constant_orbits() {
        let sys = HamiltonianSystem::new(PhaseSpace::Cylinder, Hamiltonian::Pendulum { epsilon: 0.1 }, JConvention::Canonical).unwrap();
        let o = IndexOptions::default();
        // q = 0 is a saddle (index 1), q = 1/2 a minimum (index 0).
        for (q, morse) in [(0.0, 1), (0.5, 0)] {
            let orbit = find_periodic_orbit(&sys, &v(&[q, 0.0]), 1.0, &ShootingOptions::default()).unwrap();
            assert_eq!(orbit.residual, 0.0);
            let (path, rep) = monodromy_and_cz(&sys, &orbit, &o).unwrap();
            assert!(rep.nondegenerate);
            assert_eq!(rep.cz_canonical.unwrap().integer(), Some(1 - morse));
            if morse == 1 {
                assert_eq!(index::cz_winding(&path, &o).unwrap().0.canonical().integer(), Some(0));
            }
        }
    }

    #[test]
    fn monodromy_samples_are_symplectic() {
        let sys = HamiltonianSystem::new(
            PhaseSpace::Plane,
            Hamiltonian::Polynomial(vec![
                Monomial { coefficient: 0.5, powers: vec![0, 2] },
                Monomial { coefficient: 0.25, powers: vec![4, 0] },
            ]),
            JConvention::Standard,
        )
        .unwrap();
        let orbit = find_periodic_orbit(&sys, &v(&[1.0, 0.0]), 7.0, &ShootingOptions::default());
        let orbit = orbit.unwrap();
        assert!(orbit.residual <= 1e-8);
        for m in orbit.monodromy.samples() {
            assert!(linalg::symplectic_residual(m).unwrap() < 1e-7);
        }
        assert!(orbit.monodromy.starts_at_identity(1e-12));
    }

    #[test]
    fn hopeless_guess_fails() {
        // Free motion has no periodic orbits through a moving point.
        let sys = HamiltonianSystem::new(
            PhaseSpace::Plane,
            Hamiltonian::Polynomial(vec![Monomial { coefficient: 0.5, powers: vec![0, 2] }]),
            JConvention::Standard,
        )
        .unwrap();
        let err = find_periodic_orbit(&sys, &v(&[0.0, 1.0]), 1.0, &ShootingOptions::default()).unwrap_err();
        assert_eq!(err.name(), "no-orbit-found");
    }
}
