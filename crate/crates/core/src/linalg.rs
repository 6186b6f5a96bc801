//! Small dense helpers shared by the index, bundle and dynamics modules.
//!
//! Coordinates on R^{2n} are ordered `(x_1..x_n, y_1..y_n)` everywhere, so
//! `J0 = [[0, -I], [I, 0]]` and a complex matrix `X + iY` corresponds to the
//! real block matrix `[[X, -Y], [Y, X]]`.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Result, SymError};

pub type Mat = DMatrix<f64>;
pub type CMat = DMatrix<Complex<f64>>;

pub fn half_dim(m: &Mat) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(SymError::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    if m.nrows() % 2 != 0 || m.nrows() == 0 {
        return Err(SymError::OddDimension(m.nrows()));
    }
    Ok(m.nrows() / 2)
}

/// The standard complex structure `[[0, -I], [I, 0]]` on R^{2n}.
pub fn j0(n: usize) -> Mat {
    let mut j = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = -1.0;
        j[(n + i, i)] = 1.0;
    }
    j
}

/// `exp(theta * J0) = cos(theta) I + sin(theta) J0`.
pub fn rotation(n: usize, theta: f64) -> Mat {
    Mat::identity(2 * n, 2 * n) * theta.cos() + j0(n) * theta.sin()
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// `max |M^T J0 M - J0|`.
pub fn symplectic_residual(m: &Mat) -> Result<f64> {
    let n = half_dim(m)?;
    let j = j0(n);
    Ok(max_abs(&(m.transpose() * &j * m - &j)))
}

pub fn symmetric_residual(m: &Mat) -> f64 {
    max_abs(&(m - m.transpose()))
}

pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

/// Inverse of a symplectic matrix, `-J0 M^T J0`, exact up to rounding.
pub fn symplectic_inverse(m: &Mat) -> Mat {
    let n = m.nrows() / 2;
    let j = j0(n);
    -(&j * m.transpose() * &j)
}

/// Applies `f` to the eigenvalues of a symmetric positive definite matrix.
pub fn spd_function(m: &Mat, f: impl Fn(f64) -> f64) -> Result<Mat> {
    let eig = nalgebra::SymmetricEigen::new(symmetrize(m));
    let scale = eig.eigenvalues.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if eig
        .eigenvalues
        .iter()
        .any(|&v| !(v > 1e-14 * scale.max(1e-300)))
    {
        return Err(SymError::Singular(
            "matrix is not positive definite".to_string(),
        ));
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// Complex form `X + iY` of the upper-left and lower-left blocks.
pub fn complex_form(m: &Mat) -> CMat {
    let n = m.nrows() / 2;
    CMat::from_fn(n, n, |i, k| Complex::new(m[(i, k)], m[(n + i, k)]))
}

/// Real block matrix `[[X, -Y], [Y, X]]` of a complex matrix.
pub fn realify(c: &CMat) -> Mat {
    let n = c.nrows();
    let mut m = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for k in 0..n {
            let z = c[(i, k)];
            m[(i, k)] = z.re;
            m[(n + i, n + k)] = z.re;
            m[(n + i, k)] = z.im;
            m[(i, n + k)] = -z.im;
        }
    }
    m
}

/// Block direct sum respecting the `(x, y)` ordering: the result acts on
/// `(x', x'', y', y'')`.
pub fn direct_sum(a: &Mat, b: &Mat) -> Mat {
    let na = a.nrows() / 2;
    let nb = b.nrows() / 2;
    let n = na + nb;
    let mut m = Mat::zeros(2 * n, 2 * n);
    let idx_a = |i: usize| if i < na { i } else { n + (i - na) };
    let idx_b = |i: usize| if i < nb { na + i } else { n + na + (i - nb) };
    for i in 0..2 * na {
        for k in 0..2 * na {
            m[(idx_a(i), idx_a(k))] = a[(i, k)];
        }
    }
    for i in 0..2 * nb {
        for k in 0..2 * nb {
            m[(idx_b(i), idx_b(k))] = b[(i, k)];
        }
    }
    m
}

/// Singular values and right singular vectors (as columns), sorted ascending.
pub fn svd_ascending(m: &Mat) -> (Vec<f64>, Mat) {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut v = Mat::zeros(m.ncols(), order.len());
    for (col, &i) in order.iter().enumerate() {
        v.set_column(col, &v_t.row(i).transpose());
    }
    (values, v)
}

pub fn smallest_singular_value(m: &Mat) -> f64 {
    m.singular_values()
        .iter()
        .fold(f64::INFINITY, |a, &v| a.min(v))
}

/// Counts of positive and negative eigenvalues and the smallest magnitude.
#[derive(Debug, Clone, Copy)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub min_abs: f64,
}

pub fn inertia(m: &Mat) -> Inertia {
    let vals = symmetrize(m).symmetric_eigenvalues();
    inertia_of(vals.as_slice())
}

pub fn inertia_of(vals: &[f64]) -> Inertia {
    Inertia {
        positive: vals.iter().filter(|&&v| v > 0.0).count(),
        negative: vals.iter().filter(|&&v| v < 0.0).count(),
        min_abs: vals.iter().fold(f64::INFINITY, |a, v| a.min(v.abs())),
    }
}

pub fn frobenius(m: &Mat) -> f64 {
    m.norm()
}

pub fn column(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

/// Principal argument difference `arg(b / a)` in `(-pi, pi]`.
pub fn phase_step(a: Complex<f64>, b: Complex<f64>) -> f64 {
    (b * a.conj()).arg()
}
