//! `Sp(2)` Conley-Zehnder index as the degree of `rho^2` along the path
//! followed by an extension inside the endpoint's component of `Sp*`.
//!
//! The extension is built from a normal form `M = G D G^{-1}` of the
//! endpoint: first the positive part of the polar decomposition of `G` is
//! shrunk to the identity, then its rotation part is removed, and finally
//! the normal form `D` is moved to `W+ = -I` or `W- = diag(2, 1/2)`. Every
//! stage keeps the trace, or moves it monotonically, on one side of 2; this
//! is re-checked numerically on every sample.

use std::f64::consts::PI;

use super::crossing::path_scale;
use super::{unwrap_phase, IndexOptions, IndexValue};
use crate::error::{Result, SymError};
use crate::linalg::{self, Mat};
use crate::path::SymplecticPath;
use crate::splin;

type Stage = Box<dyn Fn(f64) -> Mat>;

const PARABOLIC_TOL: f64 = 1e-6;

fn mat2(a: f64, b: f64, c: f64, d: f64) -> Mat {
    Mat::from_row_slice(2, 2, &[a, b, c, d])
}

fn diag2(a: f64, b: f64) -> Mat {
    mat2(a, 0.0, 0.0, b)
}

fn rot(a: f64) -> Mat {
    linalg::rotation(1, a)
}

/// Splits `g` (with positive determinant) into `O P` after scaling to
/// determinant one. Returns the rotation angle of `O` and `P`.
fn polar(g: &Mat) -> Result<(f64, Mat)> {
    let det = g.determinant();
    if !(det > 0.0) {
        return Err(SymError::Internal("normal-form basis is not oriented".into()));
    }
    let g = g / det.sqrt();
    let p = linalg::spd_function(&(g.transpose() * &g), f64::sqrt)?;
    let p_inv = linalg::spd_function(&p, |v| 1.0 / v)?;
    let o = &g * p_inv;
    Ok((o[(1, 0)].atan2(o[(0, 0)]), p))
}

/// Stages `a` and `b`: conjugation by `O P^{1-u}` and then by `R((1-u) alpha)`.
fn unconjugate(alpha: f64, p: Mat, core: Mat) -> Vec<Stage> {
    let o = rot(alpha);
    let core_a = core.clone();
    let stage_a: Stage = Box::new(move |u| {
        let pu = linalg::spd_function(&p, |v| v.powf(1.0 - u)).expect("positive definite");
        let g = &o * &pu;
        let g_inv = linalg::spd_function(&pu, |v| 1.0 / v).expect("positive definite") * o.transpose();
        g * &core_a * g_inv
    });
    let stage_b: Stage = Box::new(move |u| {
        let r = rot((1.0 - u) * alpha);
        &r * &core * r.transpose()
    });
    vec![stage_a, stage_b]
}

fn real_eigenvector(m: &Mat, l: f64) -> [f64; 2] {
    let c1 = [m[(0, 1)], l - m[(0, 0)]];
    let c2 = [l - m[(1, 1)], m[(1, 0)]];
    if c1[0].hypot(c1[1]) >= c2[0].hypot(c2[1]) {
        c1
    } else {
        c2
    }
}

/// Stages moving a matrix with trace `> 2` to `diag(target, 1/target)`.
fn hyperbolic_stages(m: &Mat, target: f64) -> Result<Vec<Stage>> {
    let tr = m.trace();
    let l = 0.5 * (tr + (tr * tr - 4.0).sqrt());
    let v1 = real_eigenvector(m, l);
    let v2 = real_eigenvector(m, 1.0 / l);
    let mut g = mat2(v1[0], v2[0], v1[1], v2[1]);
    if g.determinant() < 0.0 {
        g[(0, 1)] = -g[(0, 1)];
        g[(1, 1)] = -g[(1, 1)];
    }
    let (alpha, p) = polar(&g)?;
    let mut stages = unconjugate(alpha, p, diag2(l, 1.0 / l));
    let (ll, lt) = (l.ln(), target.ln());
    stages.push(Box::new(move |u| {
        let x = ((1.0 - u) * ll + u * lt).exp();
        diag2(x, 1.0 / x)
    }));
    Ok(stages)
}

fn elliptic_stages(m: &Mat) -> Result<Vec<Stage>> {
    let psi = (0.5 * m.trace()).clamp(-1.0, 1.0).acos();
    let (c, s) = (psi.cos(), psi.sin());
    // Eigenvector a + ib of e^{i psi}.
    let (a, b) = if m[(0, 1)].abs() >= m[(1, 0)].abs() {
        ([m[(0, 1)], c - m[(0, 0)]], [0.0, s])
    } else {
        ([c - m[(1, 1)], m[(1, 0)]], [s, 0.0])
    };
    // M [a, b] = [a, b] R(-psi) and M [a, -b] = [a, -b] R(psi).
    let g1 = mat2(a[0], b[0], a[1], b[1]);
    let (g, phi, target) = if g1.determinant() > 0.0 {
        (g1, -psi, -PI)
    } else {
        (mat2(a[0], -b[0], a[1], -b[1]), psi, PI)
    };
    let (alpha, p) = polar(&g)?;
    let mut stages = unconjugate(alpha, p, rot(phi));
    stages.push(Box::new(move |u| rot(phi + u * (target - phi))));
    Ok(stages)
}

fn negated(stages: Vec<Stage>) -> Vec<Stage> {
    stages
        .into_iter()
        .map(|f| Box::new(move |u| -f(u)) as Stage)
        .collect()
}

/// Extension from `m` to `W+` or `W-`, plus the sign of `det(M - I)`.
fn extension(m: &Mat) -> Result<(Vec<Stage>, Mat)> {
    let tr = m.trace();
    if tr > 2.0 {
        return Ok((hyperbolic_stages(m, 2.0)?, diag2(2.0, 0.5)));
    }
    let w_plus = -Mat::identity(2, 2);
    if (tr + 2.0).abs() <= PARABOLIC_TOL {
        let n = -m;
        let stage: Stage = Box::new(move |u| Mat::identity(2, 2) + (&n - Mat::identity(2, 2)) * (1.0 - u));
        return Ok((negated(vec![stage]), w_plus));
    }
    if tr < -2.0 {
        return Ok((negated(hyperbolic_stages(&-m, 1.0)?), w_plus));
    }
    Ok((elliptic_stages(m)?, w_plus))
}

fn check_stages(m: &Mat, stages: &[Stage], target: &Mat, samples: usize, thr: f64) -> Result<()> {
    let side = (2.0 - m.trace()).signum();
    let mut prev = m.clone();
    for (i, f) in stages.iter().enumerate() {
        let start = f(0.0);
        if linalg::max_abs(&(&start - &prev)) > 1e-7 * linalg::max_abs(&prev).max(1.0) {
            return Err(SymError::Extension(format!("stage {i} does not continue the previous one")));
        }
        for k in 0..=samples {
            let x = f(k as f64 / samples as f64);
            let d = 2.0 - x.trace();
            if d * side <= thr {
                return Err(SymError::Extension(format!(
                    "det(M - I) = {d:.3e} at stage {i}, u = {}",
                    k as f64 / samples as f64
                )));
            }
        }
        prev = f(1.0);
    }
    if linalg::max_abs(&(&prev - target)) > 1e-7 {
        return Err(SymError::Extension("extension misses its target".into()));
    }
    Ok(())
}

/// Conley-Zehnder index of an `Sp(2)` path via the degree of `rho^2` along
/// the path extended to `W+` or `W-`.
pub fn cz_degree_sp2(path: &SymplecticPath, opts: &IndexOptions) -> Result<IndexValue> {
    if path.n() != 1 {
        return Err(SymError::Unsupported("degree extension is implemented for n = 1".into()));
    }
    if !path.starts_at_identity(1e-6) {
        return Err(SymError::InvalidPath("path does not start at the identity".into()));
    }
    let m = path.end().clone();
    let sigma = linalg::smallest_singular_value(&(&m - Mat::identity(2, 2)));
    if sigma < opts.tol * path_scale(path) {
        return Err(SymError::EndpointDegenerate { sigma });
    }
    let (stages, target) = extension(&m)?;
    let thr = 0.5 * (2.0 - m.trace()).abs().min(1.0) * 1e-3;
    let mut samples = 64;
    loop {
        match check_stages(&m, &stages, &target, samples, thr) {
            Ok(()) => break,
            Err(e) if samples >= 1024 => return Err(e),
            Err(_) => samples *= 4,
        }
    }

    let rho2 = |x: &Mat| splin::rho(x).map(|z| z * z);
    let mut total = unwrap_phase(&|t| rho2(&path.eval(t)), path.times())?;
    let grid: Vec<f64> = (0..=samples).map(|k| k as f64 / samples as f64).collect();
    for f in &stages {
        total += unwrap_phase(&|u| rho2(&f(u)), &grid)?;
    }
    let winding = total / (2.0 * PI);
    let degree = winding.round();
    if (winding - degree).abs() > 1e-3 {
        return Err(SymError::Internal(format!("non-integral degree {winding}")));
    }
    Ok(IndexValue::standard(degree as i64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(f: impl Fn(f64) -> Mat) -> SymplecticPath {
        SymplecticPath::from_fn(300, f).unwrap()
    }

    #[test]
    fn rotations() {
        let o = IndexOptions::default();
        for theta in [0.3, 2.0, PI, 5.5] {
            let p = path(|t| rot(theta * t));
            assert_eq!(cz_degree_sp2(&p, &o).unwrap().integer(), Some(1), "theta {theta}");
        }
        for theta in [2.0 * PI + 0.4, 3.0 * PI, 4.0 * PI - 0.3] {
            let p = path(|t| rot(theta * t));
            assert_eq!(cz_degree_sp2(&p, &o).unwrap().integer(), Some(3), "theta {theta}");
        }
        let back = path(|t| rot(-2.0 * t));
        assert_eq!(cz_degree_sp2(&back, &o).unwrap().integer(), Some(-1));
    }

    #[test]
    fn hyperbolic_endpoint() {
        let o = IndexOptions::default();
        let p = path(|t| diag2((0.8 * t).exp(), (-0.8 * t).exp()));
        assert_eq!(cz_degree_sp2(&p, &o).unwrap().integer(), Some(0));
    }

    #[test]
    fn extension_stages_are_continuous() {
        let shear = mat2(1.0, 0.7, 0.0, 1.0);
        for m in [
            &shear * rot(1.1) * linalg::symplectic_inverse(&shear),
            &shear * diag2(3.0, 1.0 / 3.0) * linalg::symplectic_inverse(&shear),
            -(&shear * diag2(3.0, 1.0 / 3.0) * linalg::symplectic_inverse(&shear)),
            -&shear,
        ] {
            let (stages, target) = extension(&m).unwrap();
            assert!(linalg::max_abs(&(stages[0](0.0) - &m)) < 1e-9);
            check_stages(&m, &stages, &target, 256, 1e-6).unwrap();
        }
    }
}
