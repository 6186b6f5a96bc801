//! Sampled paths of symplectic matrices over `[0, 1]`.
//!
//! A path stores its samples together with tangent matrices. Between samples
//! it is evaluated by cubic Hermite interpolation, which is what the crossing
//! search, the phase unwrapping and the extension checks refine against.

use crate::error::{Result, SymError};
use crate::linalg::{self, Mat};

/// Step used for central differences of analytic generators.
const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct SymplecticPath {
    n: usize,
    times: Vec<f64>,
    mats: Vec<Mat>,
    tangents: Vec<Mat>,
}

impl SymplecticPath {
    /// Builds a path from samples, estimating tangents by three-point
    /// differences on the (possibly non-uniform) grid.
    pub fn from_samples(times: Vec<f64>, mats: Vec<Mat>, tol: f64) -> Result<Self> {
        let n = validate_grid(&times, &mats, tol)?;
        let tangents = finite_difference_tangents(&times, &mats);
        Ok(Self {
            n,
            times,
            mats,
            tangents,
        })
    }

    pub fn with_tangents(
        times: Vec<f64>,
        mats: Vec<Mat>,
        tangents: Vec<Mat>,
        tol: f64,
    ) -> Result<Self> {
        let n = validate_grid(&times, &mats, tol)?;
        if tangents.len() != mats.len() {
            return Err(SymError::InvalidPath(
                "tangent count differs from sample count".into(),
            ));
        }
        Ok(Self {
            n,
            times,
            mats,
            tangents,
        })
    }

    /// Samples an analytic generator on a uniform grid of `steps + 1` points.
    /// The generator must be defined slightly outside `[0, 1]`.
    pub fn from_fn(steps: usize, f: impl Fn(f64) -> Mat) -> Result<Self> {
        if steps < 1 {
            return Err(SymError::Parameter("need at least one step".into()));
        }
        let times: Vec<f64> = (0..=steps).map(|i| i as f64 / steps as f64).collect();
        let mats: Vec<Mat> = times.iter().map(|&t| f(t)).collect();
        let tangents = times
            .iter()
            .map(|&t| (f(t + FD_STEP) - f(t - FD_STEP)) / (2.0 * FD_STEP))
            .collect();
        Self::with_tangents(times, mats, tangents, 1e-6)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn samples(&self) -> &[Mat] {
        &self.mats
    }

    pub fn tangents(&self) -> &[Mat] {
        &self.tangents
    }

    pub fn start(&self) -> &Mat {
        &self.mats[0]
    }

    pub fn end(&self) -> &Mat {
        self.mats.last().expect("non-empty path")
    }

    pub fn starts_at_identity(&self, tol: f64) -> bool {
        linalg::max_abs(&(self.start() - Mat::identity(self.dim(), self.dim()))) <= tol
    }

    pub fn is_closed(&self, tol: f64) -> bool {
        linalg::max_abs(&(self.end() - self.start())) <= tol
    }

    /// Largest symplecticity residual over all samples.
    pub fn symplectic_residual(&self) -> f64 {
        self.mats
            .iter()
            .map(|m| linalg::symplectic_residual(m).unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }

    fn segment(&self, t: f64) -> usize {
        let last = self.times.len() - 2;
        match self.times.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => i.min(last),
            Err(i) => i.saturating_sub(1).min(last),
        }
    }

    /// Hermite interpolant at `t` (clamped to `[0, 1]`).
    pub fn eval(&self, t: f64) -> Mat {
        if self.times.len() == 1 {
            return self.mats[0].clone();
        }
        let t = t.clamp(self.times[0], *self.times.last().unwrap());
        let i = self.segment(t);
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let h = t1 - t0;
        let u = (t - t0) / h;
        let h00 = 2.0 * u * u * u - 3.0 * u * u + 1.0;
        let h10 = u * u * u - 2.0 * u * u + u;
        let h01 = -2.0 * u * u * u + 3.0 * u * u;
        let h11 = u * u * u - u * u;
        &self.mats[i] * h00
            + &self.tangents[i] * (h10 * h)
            + &self.mats[i + 1] * h01
            + &self.tangents[i + 1] * (h11 * h)
    }

    /// Derivative of the Hermite interpolant at `t`.
    pub fn eval_derivative(&self, t: f64) -> Mat {
        if self.times.len() == 1 {
            return self.tangents[0].clone();
        }
        let t = t.clamp(self.times[0], *self.times.last().unwrap());
        let i = self.segment(t);
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let h = t1 - t0;
        let u = (t - t0) / h;
        let d00 = (6.0 * u * u - 6.0 * u) / h;
        let d10 = 3.0 * u * u - 4.0 * u + 1.0;
        let d01 = (-6.0 * u * u + 6.0 * u) / h;
        let d11 = 3.0 * u * u - 2.0 * u;
        &self.mats[i] * d00
            + &self.tangents[i] * d10
            + &self.mats[i + 1] * d01
            + &self.tangents[i + 1] * d11
    }

    /// Pointwise inverse `t -> Psi(t)^{-1}`.
    pub fn inverse(&self) -> Self {
        let mats: Vec<Mat> = self.mats.iter().map(linalg::symplectic_inverse).collect();
        let tangents = mats
            .iter()
            .zip(&self.tangents)
            .map(|(inv, d)| -(inv * d * inv))
            .collect();
        Self {
            n: self.n,
            times: self.times.clone(),
            mats,
            tangents,
        }
    }

    /// Pointwise transpose `t -> Psi(t)^T`.
    pub fn transpose(&self) -> Self {
        Self {
            n: self.n,
            times: self.times.clone(),
            mats: self.mats.iter().map(|m| m.transpose()).collect(),
            tangents: self.tangents.iter().map(|m| m.transpose()).collect(),
        }
    }

    /// Values and tangents of `other` on this path's grid.
    fn resampled(&self, other: &Self) -> (Vec<Mat>, Vec<Mat>) {
        if other.times == self.times {
            return (other.mats.clone(), other.tangents.clone());
        }
        let vals = self.times.iter().map(|&t| other.eval(t)).collect();
        let ders = self.times.iter().map(|&t| other.eval_derivative(t)).collect();
        (vals, ders)
    }

    /// Pointwise product `t -> self(t) * other(t)`.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        let (om, ot) = self.resampled(other);
        let mats = self.mats.iter().zip(&om).map(|(a, b)| a * b).collect();
        let tangents = self
            .mats
            .iter()
            .zip(&self.tangents)
            .zip(om.iter().zip(&ot))
            .map(|((a, da), (b, db))| da * b + a * db)
            .collect();
        Ok(Self {
            n: self.n,
            times: self.times.clone(),
            mats,
            tangents,
        })
    }

    /// Pointwise conjugation `t -> theta(t) self(t) theta(t)^{-1}`.
    pub fn conjugate_by(&self, theta: &Self) -> Result<Self> {
        theta.product(self)?.product(&theta.inverse())
    }

    /// Pointwise direct sum with the `(x, y)` block ordering.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (om, ot) = self.resampled(other);
        Self {
            n: self.n + other.n,
            times: self.times.clone(),
            mats: self
                .mats
                .iter()
                .zip(&om)
                .map(|(a, b)| linalg::direct_sum(a, b))
                .collect(),
            tangents: self
                .tangents
                .iter()
                .zip(&ot)
                .map(|(a, b)| linalg::direct_sum(a, b))
                .collect(),
        }
    }

    /// Concatenation: `self` on `[0, 1/2]`, `other` on `[1/2, 1]`.
    pub fn concat(&self, other: &Self, tol: f64) -> Result<Self> {
        self.same_dim(other)?;
        if linalg::max_abs(&(self.end() - other.start())) > tol {
            return Err(SymError::InvalidPath(
                "concatenated paths do not meet".into(),
            ));
        }
        let mut times: Vec<f64> = self.times.iter().map(|t| 0.5 * t).collect();
        let mut mats = self.mats.clone();
        let mut tangents: Vec<Mat> = self.tangents.iter().map(|d| d * 2.0).collect();
        for i in 1..other.len() {
            times.push(0.5 + 0.5 * other.times[i]);
            mats.push(other.mats[i].clone());
            tangents.push(&other.tangents[i] * 2.0);
        }
        // One-sided tangents disagree at the junction; average them.
        let j = self.len() - 1;
        tangents[j] = (&tangents[j] + &other.tangents[0] * 2.0) * 0.5;
        Ok(Self {
            n: self.n,
            times,
            mats,
            tangents,
        })
    }

    /// Resamples `t -> self(g(t))` on a uniform grid. `g` must map `[0,1]`
    /// monotonically onto `[0,1]`; `dg` is its derivative.
    pub fn reparametrize(
        &self,
        steps: usize,
        g: impl Fn(f64) -> f64,
        dg: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let times: Vec<f64> = (0..=steps).map(|i| i as f64 / steps as f64).collect();
        let mats = times.iter().map(|&t| self.eval(g(t))).collect();
        let tangents = times
            .iter()
            .map(|&t| self.eval_derivative(g(t)) * dg(t))
            .collect();
        Self::with_tangents(times, mats, tangents, 1e-6)
    }

    /// Right-multiplies every sample by `e(t)` with derivative `de(t)`.
    pub fn right_multiply(&self, e: impl Fn(f64) -> Mat, de: impl Fn(f64) -> Mat) -> Self {
        let mats = self
            .times
            .iter()
            .zip(&self.mats)
            .map(|(&t, m)| m * e(t))
            .collect();
        let tangents = self
            .times
            .iter()
            .zip(self.mats.iter().zip(&self.tangents))
            .map(|(&t, (m, d))| d * e(t) + m * de(t))
            .collect();
        Self {
            n: self.n,
            times: self.times.clone(),
            mats,
            tangents,
        }
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(SymError::DimensionMismatch {
                expected: 2 * self.n,
                found: 2 * other.n,
            });
        }
        Ok(())
    }
}

fn validate_grid(times: &[f64], mats: &[Mat], tol: f64) -> Result<usize> {
    if times.len() < 2 || times.len() != mats.len() {
        return Err(SymError::InvalidPath(
            "need at least two samples with one matrix each".into(),
        ));
    }
    if times[0].abs() > 1e-12 || (times[times.len() - 1] - 1.0).abs() > 1e-12 {
        return Err(SymError::InvalidPath("grid must run from 0 to 1".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(SymError::InvalidPath(
            "sample times must increase strictly".into(),
        ));
    }
    let n = linalg::half_dim(&mats[0])?;
    for m in mats {
        if m.nrows() != 2 * n || m.ncols() != 2 * n {
            return Err(SymError::DimensionMismatch {
                expected: 2 * n,
                found: m.nrows(),
            });
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(SymError::InvalidPath("non-finite sample entry".into()));
        }
        let residual = linalg::symplectic_residual(m)?;
        if residual > tol {
            return Err(SymError::NotSymplectic { residual });
        }
    }
    Ok(n)
}

/// Three-point differences on a non-uniform grid, second order everywhere.
pub(crate) fn finite_difference_tangents(times: &[f64], mats: &[Mat]) -> Vec<Mat> {
    let k = times.len();
    if k == 2 {
        let d = (&mats[1] - &mats[0]) / (times[1] - times[0]);
        return vec![d.clone(), d];
    }
    (0..k)
        .map(|i| {
            let (a, b, c) = if i == 0 {
                (0, 1, 2)
            } else if i == k - 1 {
                (k - 3, k - 2, k - 1)
            } else {
                (i - 1, i, i + 1)
            };
            let (ta, tb, tc) = (times[a], times[b], times[c]);
            let t = times[i];
            // Derivative of the Lagrange quadratic through a, b, c at t.
            let wa = (2.0 * t - tb - tc) / ((ta - tb) * (ta - tc));
            let wb = (2.0 * t - ta - tc) / ((tb - ta) * (tb - tc));
            let wc = (2.0 * t - ta - tb) / ((tc - ta) * (tc - tb));
            &mats[a] * wa + &mats[b] * wb + &mats[c] * wc
        })
        .collect()
}
