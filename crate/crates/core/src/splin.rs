//! Symplectic linear algebra on R^{2n}: validation, the polar retraction onto
//! `Sp(2n) ∩ O(2n) = U(n)`, the circle-valued map `rho`, eigenvalue
//! classification and the correspondence between paths and symmetric
//! families (`Psi' = J0 S Psi`, `S = -J0 Psi' Psi^{-1}`).

use nalgebra::Complex;
use serde::Serialize;

use crate::error::{Result, SymError};
use crate::linalg::{self, CMat, Mat};
use crate::path::{finite_difference_tangents, SymplecticPath};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_ODE_TOL: f64 = 1e-6;

pub fn is_symplectic(m: &Mat, tol: f64) -> Result<bool> {
    Ok(linalg::symplectic_residual(m)? <= tol)
}

/// A validated element of `Sp(2n)`.
#[derive(Debug, Clone)]
pub struct SymplecticMatrix {
    n: usize,
    m: Mat,
}

impl SymplecticMatrix {
    pub fn new(m: Mat, tol: f64) -> Result<Self> {
        let n = linalg::half_dim(&m)?;
        let residual = linalg::symplectic_residual(&m)?;
        if residual > tol {
            return Err(SymError::NotSymplectic { residual });
        }
        let det = m.determinant();
        if (det - 1.0).abs() > tol.max(1e-12) * det.abs().max(1.0) * 1e3 {
            return Err(SymError::NotSymplectic {
                residual: (det - 1.0).abs(),
            });
        }
        Ok(Self { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &Mat {
        &self.m
    }

    pub fn into_matrix(self) -> Mat {
        self.m
    }
}

/// `(M M^T)^{-1/2} M`, the endpoint of the polar deformation retraction.
pub fn unitary_retract(m: &Mat) -> Result<Mat> {
    linalg::half_dim(m)?;
    let p_inv = linalg::spd_function(&(m * m.transpose()), |v| 1.0 / v.sqrt())
        .map_err(|_| SymError::Singular("M M^T is not positive definite".into()))?;
    Ok(p_inv * m)
}

/// `det(X + iY)` of the unitary part of `m`.
pub fn rho(m: &Mat) -> Result<Complex<f64>> {
    let u = unitary_retract(m)?;
    let det = linalg::complex_form(&u).determinant();
    Ok(det / det.norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupKind {
    PositiveHyperbolicPair,
    NegativeHyperbolicPair,
    EllipticPair,
    Quadruple,
    UnitRoot,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenGroup {
    pub kind: GroupKind,
    /// Members as `(re, im)`.
    pub members: Vec<(f64, f64)>,
    /// For elliptic pairs, the member of the first kind.
    pub first_kind: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<(f64, f64)>,
    pub groups: Vec<EigenGroup>,
}

impl SpectrumReport {
    pub fn count(&self, kind: GroupKind) -> usize {
        self.groups.iter().filter(|g| g.kind == kind).count()
    }
}

/// Ratio between the "definitely on" and "definitely off" thresholds of a
/// classification boundary; values in between are ambiguous.
const GRAY_ZONE: f64 = 100.0;

#[derive(Clone, Copy, PartialEq)]
enum Side {
    On,
    Off,
}

fn side(distance: f64, tol: f64, lambda: Complex<f64>, bad: &mut Vec<(f64, f64)>) -> Side {
    if distance < tol {
        Side::On
    } else if distance > GRAY_ZONE * tol {
        Side::Off
    } else {
        bad.push((lambda.re, lambda.im));
        Side::Off
    }
}

/// Groups the spectrum of a symplectic matrix and labels elliptic pairs by
/// kind: `lambda` is of the first kind when `Im w0(conj xi, xi) > 0` for its
/// eigenvector `xi`.
pub fn classify_eigenvalues(m: &Mat, tol: f64) -> Result<SpectrumReport> {
    let n = linalg::half_dim(m)?;
    let eigs: Vec<Complex<f64>> = m.complex_eigenvalues().iter().copied().collect();
    let mut bad = Vec::new();

    let mut unit_plus = Vec::new();
    let mut unit_minus = Vec::new();
    let mut real_pos = Vec::new();
    let mut real_neg = Vec::new();
    let mut elliptic_upper = Vec::new();
    let mut elliptic_lower = 0usize;
    let mut quad = Vec::new();

    for &l in &eigs {
        if side((l - 1.0).norm(), tol, l, &mut bad) == Side::On {
            unit_plus.push(l);
            continue;
        }
        if side((l + 1.0).norm(), tol, l, &mut bad) == Side::On {
            unit_minus.push(l);
            continue;
        }
        let real = side(l.im.abs(), tol, l, &mut bad) == Side::On;
        let circle = side((l.norm() - 1.0).abs(), tol, l, &mut bad) == Side::On;
        match (real, circle) {
            (true, _) if l.re > 0.0 => real_pos.push(l.re),
            (true, _) => real_neg.push(l.re),
            (false, true) if l.im > 0.0 => elliptic_upper.push(l),
            (false, true) => elliptic_lower += 1,
            (false, false) => quad.push(l),
        }
    }
    if !bad.is_empty() {
        return Err(SymError::AmbiguousClassification { eigenvalues: bad });
    }
    let ambiguous = |v: &[Complex<f64>]| {
        SymError::AmbiguousClassification {
            eigenvalues: v.iter().map(|l| (l.re, l.im)).collect(),
        }
    };
    if unit_plus.len() % 2 != 0 || unit_minus.len() % 2 != 0 {
        let mut all = unit_plus.clone();
        all.extend(&unit_minus);
        return Err(ambiguous(&all));
    }
    if elliptic_upper.len() != elliptic_lower {
        return Err(ambiguous(&eigs));
    }

    let mut groups = Vec::new();
    for (vals, value) in [(&unit_plus, 1.0), (&unit_minus, -1.0)] {
        if !vals.is_empty() {
            groups.push(EigenGroup {
                kind: GroupKind::UnitRoot,
                members: vec![(value, 0.0); vals.len()],
                first_kind: None,
            });
        }
    }
    for (vals, kind) in [
        (real_pos, GroupKind::PositiveHyperbolicPair),
        (real_neg, GroupKind::NegativeHyperbolicPair),
    ] {
        let pairs = pair_reciprocals(vals, tol).ok_or_else(|| ambiguous(&eigs))?;
        for (a, b) in pairs {
            groups.push(EigenGroup {
                kind,
                members: vec![(a, 0.0), (b, 0.0)],
                first_kind: None,
            });
        }
    }

    // Elliptic pairs: eigenvalues of the Hermitian form -i w0(conj xi, xi)
    // restricted to each eigenspace decide the kinds.
    let mut remaining = elliptic_upper.clone();
    remaining.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
    let mut i = 0;
    while i < remaining.len() {
        let mut j = i + 1;
        while j < remaining.len() && (remaining[j] - remaining[i]).norm() < GRAY_ZONE * tol.sqrt() {
            j += 1;
        }
        let cluster = &remaining[i..j];
        let lambda = cluster.iter().sum::<Complex<f64>>() / cluster.len() as f64;
        let kinds = elliptic_kinds(m, n, lambda, cluster.len())?;
        for (l, first) in cluster.iter().zip(kinds) {
            let conj = l.conj();
            groups.push(EigenGroup {
                kind: GroupKind::EllipticPair,
                members: vec![(l.re, l.im), (conj.re, conj.im)],
                first_kind: Some(if first { (l.re, l.im) } else { (conj.re, conj.im) }),
            });
        }
        i = j;
    }

    // Quadruples: keep the representative with |l| > 1 and Im l > 0.
    let reps: Vec<Complex<f64>> = quad
        .iter()
        .copied()
        .filter(|l| l.norm() > 1.0 && l.im > 0.0)
        .collect();
    if reps.len() * 4 != quad.len() {
        return Err(ambiguous(&quad));
    }
    for l in reps {
        let inv = 1.0 / l;
        let members = [l, l.conj(), inv, inv.conj()];
        for mem in &members {
            if !quad.iter().any(|q| (q - mem).norm() < GRAY_ZONE * tol.sqrt()) {
                return Err(ambiguous(&quad));
            }
        }
        groups.push(EigenGroup {
            kind: GroupKind::Quadruple,
            members: members.iter().map(|c| (c.re, c.im)).collect(),
            first_kind: None,
        });
    }

    Ok(SpectrumReport {
        eigenvalues: eigs.iter().map(|l| (l.re, l.im)).collect(),
        groups,
    })
}

fn pair_reciprocals(mut vals: Vec<f64>, tol: f64) -> Option<Vec<(f64, f64)>> {
    let mut pairs = Vec::new();
    vals.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    while let Some(a) = vals.first().copied() {
        vals.remove(0);
        let target = 1.0 / a;
        let (idx, _) = vals
            .iter()
            .enumerate()
            .min_by(|x, y| (x.1 - target).abs().total_cmp(&(y.1 - target).abs()))?;
        if (vals[idx] - target).abs() > GRAY_ZONE * tol.sqrt() * target.abs().max(1.0) {
            return None;
        }
        pairs.push((a, vals.remove(idx)));
    }
    Some(pairs)
}

/// Returns, for each copy of `lambda` in the upper half plane, whether it is
/// of the first kind.
fn elliptic_kinds(m: &Mat, n: usize, lambda: Complex<f64>, mult: usize) -> Result<Vec<bool>> {
    let dim = 2 * n;
    let shifted = CMat::from_fn(dim, dim, |i, k| {
        let v = Complex::new(m[(i, k)], 0.0);
        if i == k {
            v - lambda
        } else {
            v
        }
    });
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let kernel: Vec<Vec<Complex<f64>>> = order[..mult]
        .iter()
        .map(|&r| (0..dim).map(|c| v_t[(r, c)].conj()).collect())
        .collect();
    let j = linalg::j0(n);
    // B_{ab} = w0(conj xi_a, xi_b) = -xi_a^* J0 xi_b, anti-Hermitian; H = -i B.
    let mut h = CMat::zeros(mult, mult);
    for a in 0..mult {
        for b in 0..mult {
            let mut s = Complex::new(0.0, 0.0);
            for r in 0..dim {
                for c in 0..dim {
                    s += kernel[a][r].conj() * j[(r, c)] * kernel[b][c];
                }
            }
            h[(a, b)] = -s * Complex::new(0.0, -1.0);
        }
    }
    let h = (&h + h.adjoint()) * Complex::new(0.5, 0.0);
    let eig = h.symmetric_eigenvalues();
    if eig.iter().any(|v| v.abs() < 1e-12) {
        return Err(SymError::AmbiguousClassification {
            eigenvalues: vec![(lambda.re, lambda.im)],
        });
    }
    Ok(eig.iter().map(|&v| v > 0.0).collect())
}

/// Sampled family `t -> S(t)` of symmetric matrices, linearly interpolated.
#[derive(Debug, Clone)]
pub struct SymmetricFamily {
    times: Vec<f64>,
    mats: Vec<Mat>,
}

impl SymmetricFamily {
    pub fn from_samples(times: Vec<f64>, mats: Vec<Mat>, tol: f64) -> Result<Self> {
        if times.is_empty() || times.len() != mats.len() {
            return Err(SymError::Parameter("empty or mismatched family".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(SymError::Parameter("family grid must increase".into()));
        }
        let dim = mats[0].nrows();
        for m in &mats {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(SymError::DimensionMismatch {
                    expected: dim,
                    found: m.nrows(),
                });
            }
            let residual = linalg::symmetric_residual(m);
            if residual > tol || m.iter().any(|v| !v.is_finite()) {
                return Err(SymError::NotSymmetric { residual });
            }
        }
        Ok(Self { times, mats })
    }

    pub fn from_fn(steps: usize, f: impl Fn(f64) -> Mat) -> Result<Self> {
        let times: Vec<f64> = (0..=steps).map(|i| i as f64 / steps as f64).collect();
        let mats = times.iter().map(|&t| linalg::symmetrize(&f(t))).collect();
        Self::from_samples(times, mats, f64::INFINITY)
    }

    pub fn dim(&self) -> usize {
        self.mats[0].nrows()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn samples(&self) -> &[Mat] {
        &self.mats
    }

    pub fn covers_unit_interval(&self) -> bool {
        self.times[0] <= 1e-12 && *self.times.last().unwrap() >= 1.0 - 1e-12
    }

    /// Largest asymmetry among the stored samples.
    pub fn asymmetry(&self) -> f64 {
        self.mats
            .iter()
            .map(linalg::symmetric_residual)
            .fold(0.0, f64::max)
    }

    pub fn eval(&self, t: f64) -> Mat {
        if self.times.len() == 1 {
            return self.mats[0].clone();
        }
        let t = t.clamp(self.times[0], *self.times.last().unwrap());
        let i = match self.times.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => i.min(self.times.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.times.len() - 2),
        };
        let u = (t - self.times[i]) / (self.times[i + 1] - self.times[i]);
        &self.mats[i] * (1.0 - u) + &self.mats[i + 1] * u
    }
}

/// Two-parameter family `(s, t) -> S(s, t)`, one t-family per s-slice.
#[derive(Debug, Clone)]
pub struct SymmetricHomotopy {
    slices: Vec<(f64, SymmetricFamily)>,
}

impl SymmetricHomotopy {
    pub fn new(slices: Vec<(f64, SymmetricFamily)>) -> Result<Self> {
        if slices.is_empty() {
            return Err(SymError::Parameter("homotopy without slices".into()));
        }
        if slices.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(SymError::Parameter("s grid must increase".into()));
        }
        let dim = slices[0].1.dim();
        if slices.iter().any(|(_, f)| f.dim() != dim) {
            return Err(SymError::Parameter("slices differ in dimension".into()));
        }
        Ok(Self { slices })
    }

    pub fn dim(&self) -> usize {
        self.slices[0].1.dim()
    }

    pub fn slices(&self) -> &[(f64, SymmetricFamily)] {
        &self.slices
    }

    pub fn eval(&self, s: f64, t: f64) -> Mat {
        let k = self.slices.len();
        if k == 1 {
            return self.slices[0].1.eval(t);
        }
        let s = s.clamp(self.slices[0].0, self.slices[k - 1].0);
        let i = self
            .slices
            .iter()
            .rposition(|(si, _)| *si <= s)
            .unwrap_or(0)
            .min(k - 2);
        let (s0, s1) = (self.slices[i].0, self.slices[i + 1].0);
        let u = (s - s0) / (s1 - s0);
        self.slices[i].1.eval(t) * (1.0 - u) + self.slices[i + 1].1.eval(t) * u
    }
}

/// Solves `Psi' = J0 S(t) Psi`, `Psi(0) = I` with the implicit midpoint
/// rule. Each step is a Cayley transform, so samples are symplectic up to
/// rounding.
pub fn path_from_symmetric_fn(
    n: usize,
    steps: usize,
    s: impl Fn(f64) -> Mat,
) -> Result<SymplecticPath> {
    if steps < 2 {
        return Err(SymError::Parameter("path_from_symmetric needs at least 2 steps".into()));
    }
    let dim = 2 * n;
    let j = linalg::j0(n);
    let id = Mat::identity(dim, dim);
    let h = 1.0 / steps as f64;
    let mut mats = Vec::with_capacity(steps + 1);
    mats.push(id.clone());
    for k in 0..steps {
        let a = &j * linalg::symmetrize(&s((k as f64 + 0.5) * h)) * (0.5 * h);
        let lhs = (&id - &a)
            .lu()
            .try_inverse()
            .ok_or_else(|| SymError::Singular("Cayley step".into()))?;
        let next = lhs * (&id + &a) * &mats[k];
        mats.push(next);
    }
    let times: Vec<f64> = (0..=steps).map(|i| i as f64 * h).collect();
    let tangents = times
        .iter()
        .zip(&mats)
        .map(|(&t, m)| &j * linalg::symmetrize(&s(t)) * m)
        .collect();
    SymplecticPath::with_tangents(times, mats, tangents, DEFAULT_ODE_TOL)
}

pub fn path_from_symmetric(family: &SymmetricFamily, steps: usize) -> Result<SymplecticPath> {
    if !family.covers_unit_interval() {
        return Err(SymError::Parameter("family grid must cover [0, 1]".into()));
    }
    let n = family.dim() / 2;
    if family.dim() % 2 != 0 {
        return Err(SymError::OddDimension(family.dim()));
    }
    path_from_symmetric_fn(n, steps, |t| family.eval(t))
}

/// `S(t) = -J0 Psi'(t) Psi(t)^{-1}` with `Psi'` from central differences of
/// the samples. The matrices are returned as computed (not symmetrized), so
/// [`SymmetricFamily::asymmetry`] measures the discretisation error.
pub fn recover_symmetric(path: &SymplecticPath) -> Result<SymmetricFamily> {
    if path.len() < 3 {
        return Err(SymError::InvalidPath("need at least three samples".into()));
    }
    let j = linalg::j0(path.n());
    let ders = finite_difference_tangents(path.times(), path.samples());
    let mut mats = Vec::with_capacity(path.len());
    for (m, d) in path.samples().iter().zip(&ders) {
        let inv = m
            .clone()
            .lu()
            .try_inverse()
            .ok_or_else(|| SymError::InvalidPath("non-invertible sample".into()))?;
        mats.push(-(&j * d * inv));
    }
    SymmetricFamily::from_samples(path.times().to_vec(), mats, f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{j0, max_abs, rotation};

    fn diag(v: &[f64]) -> Mat {
        Mat::from_diagonal(&nalgebra::DVector::from_column_slice(v))
    }

    #[test]
    fn is_symplectic_examples() {
        assert!(is_symplectic(&j0(1), 1e-12).unwrap());
        assert!(is_symplectic(&Mat::identity(4, 4), 1e-12).unwrap());
        assert!(!is_symplectic(&diag(&[2.0, 2.0]), 1e-12).unwrap());
        assert!(matches!(
            is_symplectic(&Mat::identity(3, 3), 1e-12),
            Err(SymError::OddDimension(3))
        ));
    }

    #[test]
    fn retraction_fixes_rotations_and_kills_stretch() {
        let r = rotation(1, 0.7);
        assert!(max_abs(&(unitary_retract(&r).unwrap() - &r)) < 1e-14);
        let d = diag(&[2.0, 0.5]);
        assert!(max_abs(&(unitary_retract(&d).unwrap() - Mat::identity(2, 2))) < 1e-14);
    }

    #[test]
    fn rho_values_at_the_reference_matrices() {
        let z = rho(&rotation(1, 0.4)).unwrap();
        assert!((z - Complex::from_polar(1.0, 0.4)).norm() < 1e-14);
        for n in 1..=3 {
            let w_plus = -Mat::identity(2 * n, 2 * n);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((rho(&w_plus).unwrap() - Complex::new(sign, 0.0)).norm() < 1e-12);
            let mut d = vec![-1.0; 2 * n];
            d[0] = 2.0;
            d[n] = 0.5;
            let w_minus = diag(&d);
            assert!((rho(&w_minus).unwrap() + Complex::new(sign, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn classify_rotation_hyperbolic_and_quadruple() {
        let r = classify_eigenvalues(&rotation(1, std::f64::consts::PI / 3.0), 1e-7).unwrap();
        assert_eq!(r.count(GroupKind::EllipticPair), 1);
        let g = &r.groups[0];
        // The eigenvector of e^{i pi/3} for this rotation is (1, -i), giving
        // w0(conj xi, xi) = -2i, so the lower member is of the first kind.
        let fk = g.first_kind.unwrap();
        assert!(fk.1 < 0.0);

        let h = classify_eigenvalues(&diag(&[2.0, 0.5]), 1e-7).unwrap();
        assert_eq!(h.count(GroupKind::PositiveHyperbolicPair), 1);
        let nh = classify_eigenvalues(&diag(&[-3.0, -1.0 / 3.0]), 1e-7).unwrap();
        assert_eq!(nh.count(GroupKind::NegativeHyperbolicPair), 1);
        let u = classify_eigenvalues(&Mat::identity(4, 4), 1e-7).unwrap();
        assert_eq!(u.count(GroupKind::UnitRoot), 1);
        assert_eq!(u.groups[0].members.len(), 4);
    }

    #[test]
    fn classify_rejects_gray_zone() {
        let l = 1.0 + 1e-6;
        let err = classify_eigenvalues(&diag(&[l, 1.0 / l]), 1e-7).unwrap_err();
        assert_eq!(err.name(), "ambiguous-classification");
    }

    #[test]
    fn identity_symmetric_family_gives_rotation() {
        let fam = SymmetricFamily::from_fn(4, |_| Mat::identity(2, 2)).unwrap();
        let p = path_from_symmetric(&fam, 10_000).unwrap();
        assert!(max_abs(&(p.end() - rotation(1, 1.0))) < 1e-8);
        let zero = SymmetricFamily::from_fn(4, |_| Mat::zeros(4, 4)).unwrap();
        let p = path_from_symmetric(&zero, 10).unwrap();
        assert!(max_abs(&(p.end() - Mat::identity(4, 4))) < 1e-15);
        assert!(path_from_symmetric(&zero, 1).is_err());
    }

    #[test]
    fn recover_rotation_generator() {
        let p = SymplecticPath::from_fn(200, |t| rotation(1, t)).unwrap();
        let s = recover_symmetric(&p).unwrap();
        for m in s.samples() {
            assert!(max_abs(&(m - Mat::identity(2, 2))) < 1e-4);
        }
        let c = SymplecticPath::from_fn(20, |_| Mat::identity(2, 2)).unwrap();
        let s = recover_symmetric(&c).unwrap();
        assert!(s.samples().iter().all(|m| max_abs(m) < 1e-10));
    }
}
