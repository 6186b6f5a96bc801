use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Vector;
use crate::error::{Result, SymError};
use crate::linalg::{self, Mat};

/// Step factor for finite-difference Hessians, scaled by `max(1, |z|)`.
pub const HESSIAN_STEP: f64 = 1e-5;
const GRADIENT_STEP: f64 = 1e-6;
const GRADIENT_CHECK: f64 = 1e-5;
const PROBES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseSpace {
    /// `R^2` with coordinates `(q, p)`.
    Plane,
    /// `S^1 x R` with the angle `q` of period 1.
    Cylinder,
    /// `R^{2n}`.
    Euclidean(usize),
}

impl PhaseSpace {
    pub fn n(self) -> usize {
        match self {
            PhaseSpace::Plane | PhaseSpace::Cylinder => 1,
            PhaseSpace::Euclidean(n) => n,
        }
    }

    pub fn dim(self) -> usize {
        2 * self.n()
    }

    /// `a - b`, with the angle difference reduced to `[-1/2, 1/2)` on the
    /// cylinder.
    pub fn difference(self, a: &Vector, b: &Vector) -> Vector {
        let mut d = a - b;
        if self == PhaseSpace::Cylinder {
            d[0] -= d[0].round();
        }
        d
    }

    pub fn distance(self, a: &Vector, b: &Vector) -> f64 {
        self.difference(a, b).norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JConvention {
    /// `X_H = J0 grad H`.
    #[default]
    Standard,
    /// `X_H = -J0 grad H`.
    Canonical,
}

impl JConvention {
    pub fn matrix(self, n: usize) -> Mat {
        match self {
            JConvention::Standard => linalg::j0(n),
            JConvention::Canonical => -linalg::j0(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coefficient: f64,
    /// One exponent per coordinate `(x_1..x_n, y_1..y_n)`.
    pub powers: Vec<u32>,
}

pub type ScalarFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;

#[derive(Clone)]
pub enum Hamiltonian {
    /// `H = omega |z|^2 / 2`.
    Harmonic { omega: f64 },
    /// `H(q, v) = v^2 / 2 + epsilon cos(2 pi q)`.
    Pendulum { epsilon: f64 },
    /// Sum of monomials.
    Polynomial(Vec<Monomial>),
    /// Arbitrary callback with an optional analytic gradient.
    Callback {
        value: ScalarFn,
        gradient: Option<GradientFn>,
    },
}

impl fmt::Debug for Hamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hamiltonian::Harmonic { omega } => write!(f, "Harmonic {{ omega: {omega} }}"),
            Hamiltonian::Pendulum { epsilon } => write!(f, "Pendulum {{ epsilon: {epsilon} }}"),
            Hamiltonian::Polynomial(m) => f.debug_tuple("Polynomial").field(m).finish(),
            Hamiltonian::Callback { gradient, .. } => {
                write!(f, "Callback {{ analytic_gradient: {} }}", gradient.is_some())
            }
        }
    }
}

fn monomial_value(m: &Monomial, z: &Vector) -> f64 {
    m.powers
        .iter()
        .zip(z.iter())
        .fold(m.coefficient, |acc, (&p, &x)| acc * x.powi(p as i32))
}

/// Product of `x_j^{p_j}` with `x_i^{p_i}` replaced by `c * x_i^{p_i - k}`.
fn monomial_derivative(m: &Monomial, z: &Vector, orders: &[(usize, u32)]) -> f64 {
    let mut acc = m.coefficient;
    for (j, (&p, &x)) in m.powers.iter().zip(z.iter()).enumerate() {
        let k: u32 = orders.iter().filter(|(i, _)| *i == j).map(|(_, k)| k).sum();
        if k > p {
            return 0.0;
        }
        let falling: f64 = (0..k).map(|r| (p - r) as f64).product();
        acc *= falling * x.powi((p - k) as i32);
    }
    acc
}

#[derive(Debug, Clone)]
pub struct HamiltonianSystem {
    phase_space: PhaseSpace,
    hamiltonian: Hamiltonian,
    j: JConvention,
}

impl HamiltonianSystem {
    pub fn new(phase_space: PhaseSpace, hamiltonian: Hamiltonian, j: JConvention) -> Result<Self> {
        let dim = phase_space.dim();
        if dim == 0 {
            return Err(SymError::Parameter("phase space dimension must be positive".into()));
        }
        match &hamiltonian {
            Hamiltonian::Harmonic { omega } if !omega.is_finite() => {
                return Err(SymError::Parameter("omega must be finite".into()))
            }
            Hamiltonian::Pendulum { epsilon } => {
                if phase_space.n() != 1 {
                    return Err(SymError::Parameter("the pendulum lives on a surface".into()));
                }
                if !epsilon.is_finite() {
                    return Err(SymError::Parameter("epsilon must be finite".into()));
                }
            }
            Hamiltonian::Polynomial(terms) => {
                if let Some(t) = terms.iter().find(|t| t.powers.len() != dim) {
                    return Err(SymError::Parameter(format!(
                        "monomial has {} exponents, expected {dim}",
                        t.powers.len()
                    )));
                }
                if terms.iter().any(|t| !t.coefficient.is_finite()) {
                    return Err(SymError::Parameter("coefficients must be finite".into()));
                }
            }
            _ => {}
        }
        let sys = Self {
            phase_space,
            hamiltonian,
            j,
        };
        sys.check_gradient()?;
        Ok(sys)
    }

    /// Compares an analytic callback gradient with central differences on
    /// seeded probe points.
    fn check_gradient(&self) -> Result<()> {
        let Hamiltonian::Callback {
            value,
            gradient: Some(gradient),
        } = &self.hamiltonian
        else {
            return Ok(());
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..PROBES {
            let z = Vector::from_fn(self.dim(), |_, _| rng.gen_range(-1.0..1.0));
            let g = gradient(&z);
            let fd = central_gradient(value.as_ref(), &z);
            if g.len() != fd.len() || (&g - &fd).norm() > GRADIENT_CHECK * fd.norm().max(1.0) {
                return Err(SymError::Parameter(format!(
                    "analytic gradient disagrees with finite differences at {:?}",
                    z.as_slice()
                )));
            }
        }
        Ok(())
    }

    pub fn phase_space(&self) -> PhaseSpace {
        self.phase_space
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    pub fn j_convention(&self) -> JConvention {
        self.j
    }

    pub fn n(&self) -> usize {
        self.phase_space.n()
    }

    pub fn dim(&self) -> usize {
        self.phase_space.dim()
    }

    pub fn j_matrix(&self) -> Mat {
        self.j.matrix(self.n())
    }

    fn check_point(&self, z: &Vector) -> Result<()> {
        if z.len() != self.dim() {
            return Err(SymError::DimensionMismatch {
                expected: self.dim(),
                found: z.len(),
            });
        }
        Ok(())
    }

    pub fn energy(&self, z: &Vector) -> f64 {
        match &self.hamiltonian {
            Hamiltonian::Harmonic { omega } => 0.5 * omega * z.norm_squared(),
            Hamiltonian::Pendulum { epsilon } => {
                0.5 * z[1] * z[1] + epsilon * (2.0 * PI * z[0]).cos()
            }
            Hamiltonian::Polynomial(terms) => terms.iter().map(|m| monomial_value(m, z)).sum(),
            Hamiltonian::Callback { value, .. } => value(z),
        }
    }

    pub fn gradient(&self, z: &Vector) -> Result<Vector> {
        self.check_point(z)?;
        let g = match &self.hamiltonian {
            Hamiltonian::Harmonic { omega } => z * *omega,
            Hamiltonian::Pendulum { epsilon } => Vector::from_vec(vec![
                -2.0 * PI * epsilon * (2.0 * PI * z[0]).sin(),
                z[1],
            ]),
            Hamiltonian::Polynomial(terms) => Vector::from_fn(z.len(), |i, _| {
                terms.iter().map(|m| monomial_derivative(m, z, &[(i, 1)])).sum()
            }),
            Hamiltonian::Callback { value, gradient } => match gradient {
                Some(g) => g(z),
                None => central_gradient(value.as_ref(), z),
            },
        };
        if g.len() != z.len() || g.iter().any(|v| !v.is_finite()) {
            return Err(SymError::GradientFailure(z.iter().copied().collect()));
        }
        Ok(g)
    }

    pub fn hessian(&self, z: &Vector) -> Result<Mat> {
        self.check_point(z)?;
        let dim = z.len();
        let h = match &self.hamiltonian {
            Hamiltonian::Harmonic { omega } => Mat::identity(dim, dim) * *omega,
            Hamiltonian::Pendulum { epsilon } => Mat::from_row_slice(
                2,
                2,
                &[-4.0 * PI * PI * epsilon * (2.0 * PI * z[0]).cos(), 0.0, 0.0, 1.0],
            ),
            Hamiltonian::Polynomial(terms) => Mat::from_fn(dim, dim, |i, j| {
                terms.iter().map(|m| monomial_derivative(m, z, &[(i, 1), (j, 1)])).sum()
            }),
            Hamiltonian::Callback { .. } => {
                let step = HESSIAN_STEP * z.norm().max(1.0);
                let mut h = Mat::zeros(dim, dim);
                for j in 0..dim {
                    let mut zp = z.clone();
                    let mut zm = z.clone();
                    zp[j] += step;
                    zm[j] -= step;
                    let col = (self.gradient(&zp)? - self.gradient(&zm)?) / (2.0 * step);
                    h.set_column(j, &col);
                }
                linalg::symmetrize(&h)
            }
        };
        if h.iter().any(|v| !v.is_finite()) {
            return Err(SymError::GradientFailure(z.iter().copied().collect()));
        }
        Ok(h)
    }
}

fn central_gradient(value: &(dyn Fn(&Vector) -> f64 + Send + Sync), z: &Vector) -> Vector {
    let step = GRADIENT_STEP * z.norm().max(1.0);
    Vector::from_fn(z.len(), |i, _| {
        let mut zp = z.clone();
        let mut zm = z.clone();
        zp[i] += step;
        zm[i] -= step;
        (value(&zp) - value(&zm)) / (2.0 * step)
    })
}

/// `X_H(z) = J grad H(z)` with the system's `J`.
pub fn ham_vector_field(sys: &HamiltonianSystem, z: &Vector) -> Result<Vector> {
    Ok(sys.j_matrix() * sys.gradient(z)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    #[test]
    fn harmonic_field_is_j0_z() {
        let sys = HamiltonianSystem::new(PhaseSpace::Plane, Hamiltonian::Harmonic { omega: 1.0 }, JConvention::Standard).unwrap();
        let z = v(&[0.3, -1.2]);
        assert_eq!(ham_vector_field(&sys, &z).unwrap(), linalg::j0(1) * &z);
    }

    #[test]
    fn pendulum_equilibrium_has_zero_field() {
        let sys = HamiltonianSystem::new(PhaseSpace::Cylinder, Hamiltonian::Pendulum { epsilon: 1.0 }, JConvention::Standard).unwrap();
        for q in [0.0, 0.5] {
            assert!(ham_vector_field(&sys, &v(&[q, 0.0])).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn energy_direction_is_orthogonal() {
        let quartic = Hamiltonian::Polynomial(vec![
            Monomial { coefficient: 0.5, powers: vec![2, 0, 0, 0] },
            Monomial { coefficient: 1.5, powers: vec![0, 1, 2, 0] },
            Monomial { coefficient: -0.2, powers: vec![1, 1, 1, 1] },
        ]);
        for j in [JConvention::Standard, JConvention::Canonical] {
            let sys = HamiltonianSystem::new(PhaseSpace::Euclidean(2), quartic.clone(), j).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            for _ in 0..20 {
                let z = Vector::from_fn(4, |_, _| rng.gen_range(-2.0..2.0));
                let g = sys.gradient(&z).unwrap();
                let x = ham_vector_field(&sys, &z).unwrap();
                assert!(g.dot(&x).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn polynomial_derivatives_match_differences() {
        let h = Hamiltonian::Polynomial(vec![
            Monomial { coefficient: 2.0, powers: vec![3, 1] },
            Monomial { coefficient: -1.0, powers: vec![0, 4] },
        ]);
        let sys = HamiltonianSystem::new(PhaseSpace::Plane, h, JConvention::Standard).unwrap();
        let z = v(&[0.7, -0.4]);
        // d/dx = 6 x^2 y, d/dy = 2 x^3 - 4 y^3
        let g = sys.gradient(&z).unwrap();
        assert!((g[0] - 6.0 * 0.49 * -0.4).abs() < 1e-12);
        assert!((g[1] - (2.0 * 0.343 + 4.0 * 0.064)).abs() < 1e-12);
        let hess = sys.hessian(&z).unwrap();
        assert!((hess[(0, 1)] - 6.0 * 0.49).abs() < 1e-12);
        assert!((hess[(1, 1)] + 12.0 * 0.16).abs() < 1e-12);
    }

    #[test]
    fn bad_callback_gradient_is_rejected() {
        let value: ScalarFn = Arc::new(|z: &Vector| z[0] * z[0] + z[1]);
        let wrong: GradientFn = Arc::new(|z: &Vector| Vector::from_vec(vec![z[0], 1.0]));
        let h = Hamiltonian::Callback { value: value.clone(), gradient: Some(wrong) };
        assert!(HamiltonianSystem::new(PhaseSpace::Plane, h, JConvention::Standard).is_err());
        let right: GradientFn = Arc::new(|z: &Vector| Vector::from_vec(vec![2.0 * z[0], 1.0]));
        let h = Hamiltonian::Callback { value, gradient: Some(right) };
        assert!(HamiltonianSystem::new(PhaseSpace::Plane, h, JConvention::Standard).is_ok());
    }

    #[test]
    fn nonfinite_gradient_fails() {
        let value: ScalarFn = Arc::new(|z: &Vector| z[0].ln());
        let sys = HamiltonianSystem::new(
            PhaseSpace::Plane,
            Hamiltonian::Callback { value, gradient: None },
            JConvention::Standard,
        )
        .unwrap();
        assert_eq!(sys.gradient(&v(&[-1.0, 0.0])).unwrap_err().name(), "gradient-failure");
    }

    #[test]
    fn cylinder_distance_wraps() {
        let d = PhaseSpace::Cylinder.distance(&v(&[0.95, 1.0]), &v(&[0.05, 1.0]));
        assert!((d - 0.1).abs() < 1e-12);
    }
}
