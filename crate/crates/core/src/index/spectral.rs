//! Spectral flow of symmetric matrix families and of the Fourier-truncated
//! loop operator `A(s) = -J0 d/dt - S(s, t)` on `L^2(S^1, R^{2n})`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::crossing::zero_candidates;
use super::IndexOptions;
use crate::error::{Result, SymError};
use crate::linalg::{self, Mat};
use crate::splin::{SymmetricFamily, SymmetricHomotopy};

/// Sign relating the truncated spectral flow (negative-to-positive crossings
/// counted positively) to `CZ(Psi^0) - CZ(Psi^1)`, fixed by the constant
/// family `S = theta I` with `theta` running from `-pi/2` to `pi/2`.
pub const SF_CALIBRATION: i64 = 1;

const FORM_TOL: f64 = 1e-6;

fn negative_count(m: &Mat, thr: f64) -> Result<i64> {
    let vals = m.clone().symmetric_eigenvalues();
    let inertia = linalg::inertia_of(vals.as_slice());
    if inertia.min_abs < thr {
        return Err(SymError::EndpointDegenerate {
            sigma: inertia.min_abs,
        });
    }
    Ok(inertia.negative as i64)
}

fn crossing_sum(
    a: &dyn Fn(f64) -> Mat,
    da: &dyn Fn(f64) -> Mat,
    grid: &[f64],
    thr: f64,
) -> Result<i64> {
    let lipschitz: Vec<f64> = grid
        .windows(2)
        .map(|w| {
            [w[0], 0.5 * (w[0] + w[1]), w[1]]
                .iter()
                .map(|&s| 2.0 * linalg::frobenius(&da(s)))
                .fold(0.0, f64::max)
        })
        .collect();
    let sigma = |s: f64| linalg::inertia(&a(s)).min_abs;
    let ss = zero_candidates(&sigma, grid, &lipschitz, thr)
        .map_err(|t| SymError::IrregularCrossing { t })?;
    let mut total = 0;
    for s in ss {
        let eig = nalgebra::SymmetricEigen::new(linalg::symmetrize(&a(s)));
        let cols: Vec<usize> = (0..eig.eigenvalues.len())
            .filter(|&i| eig.eigenvalues[i].abs() < thr)
            .collect();
        let cols = if cols.is_empty() {
            vec![eig.eigenvalues.iamin()]
        } else {
            cols
        };
        let kernel = eig.eigenvectors.select_columns(cols.iter());
        let d = da(s);
        let form = linalg::symmetrize(&(kernel.transpose() * &d * &kernel));
        let inertia = linalg::inertia(&form);
        if inertia.min_abs < FORM_TOL * linalg::max_abs(&d).max(1.0) {
            return Err(SymError::IrregularCrossing { t: s });
        }
        total += inertia.positive as i64 - inertia.negative as i64;
    }
    Ok(total)
}

/// Spectral flow of `s -> A(s)` on `[0, 1]` from crossing forms
/// `<z, A'(s) z>` on `ker A(s)`, checked against `IND(A(0)) - IND(A(1))`.
pub fn spectral_flow_fn(
    a: &dyn Fn(f64) -> Mat,
    da: &dyn Fn(f64) -> Mat,
    grid: &[f64],
    opts: &IndexOptions,
) -> Result<i64> {
    let scale = grid
        .iter()
        .map(|&s| linalg::max_abs(&a(s)))
        .fold(1.0, f64::max);
    let thr = opts.tol * scale;
    let endpoint_difference = negative_count(&a(0.0), thr)? - negative_count(&a(1.0), thr)?;

    let sum = match crossing_sum(a, da, grid, thr) {
        Ok(v) => v,
        Err(SymError::IrregularCrossing { t }) => {
            // Shift by a small multiple of the identity; the endpoints stay
            // invertible, so the flow is unchanged.
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let mut previous = None;
            let mut found = None;
            for k in 0..12 {
                let delta = 1e-4 * 0.5f64.powi(k) * (0.95 + 0.1 * rng.gen::<f64>()) * scale;
                let shifted = |s: f64| {
                    let m = a(s);
                    let dim = m.nrows();
                    m + Mat::identity(dim, dim) * delta
                };
                match crossing_sum(&shifted, da, grid, thr) {
                    Ok(v) if previous == Some(v) => {
                        found = Some(v);
                        break;
                    }
                    Ok(v) => previous = Some(v),
                    Err(SymError::IrregularCrossing { .. }) => previous = None,
                    Err(e) => return Err(e),
                }
            }
            found.ok_or(SymError::IrregularCrossing { t })?
        }
        Err(e) => return Err(e),
    };
    if sum != endpoint_difference {
        return Err(SymError::SpectralFlowMismatch {
            crossing_sum: sum,
            endpoint_difference,
        });
    }
    Ok(sum)
}

/// Spectral flow of a sampled family (linear between samples).
pub fn spectral_flow_matrix(family: &SymmetricFamily, opts: &IndexOptions) -> Result<i64> {
    if !family.covers_unit_interval() || family.times().len() < 2 {
        return Err(SymError::Parameter("family grid must cover [0, 1]".into()));
    }
    let times = family.times();
    let mats = family.samples();
    let seg = |i: usize| (&mats[i + 1] - &mats[i]) / (times[i + 1] - times[i]);
    // Segment slope inside a segment; the mean of both slopes at (or within
    // rounding of) a node.
    let slope = |s: f64| {
        let last = times.len() - 2;
        let i = times.partition_point(|&x| x < s);
        let near = [i.saturating_sub(1), i.min(last + 1)]
            .into_iter()
            .find(|&k| (times[k] - s).abs() < 1e-9);
        match near {
            Some(0) => seg(0),
            Some(k) if k > last => seg(last),
            Some(k) => (seg(k - 1) + seg(k)) * 0.5,
            None => seg(i.saturating_sub(1).min(last)),
        }
    };
    let eval = |s: f64| linalg::symmetrize(&family.eval(s));
    spectral_flow_fn(&eval, &slope, times, opts)
}

/// Galerkin matrix of `-J0 d/dt - S(t)` in the real orthonormal basis
/// `{1, sqrt2 cos 2 pi k t, sqrt2 sin 2 pi k t : 1 <= k <= cutoff}` of each
/// coordinate. Row `(j, a)` is `j * (2 cutoff + 1) + a`, with mode `a = 0`
/// the constant, `2k - 1` the cosine and `2k` the sine of frequency `k`.
pub fn loop_operator_matrix(n: usize, s: &dyn Fn(f64) -> Mat, cutoff: usize) -> Mat {
    let dim = 2 * n;
    let modes = 2 * cutoff + 1;
    let nq = 8 * cutoff + 64;
    let max_m = 2 * cutoff;

    // c[m][(i, j)] = int S_ij cos(2 pi m t), sn likewise with sin.
    let mut c = vec![Mat::zeros(dim, dim); max_m + 1];
    let mut sn = vec![Mat::zeros(dim, dim); max_m + 1];
    for q in 0..nq {
        let t = q as f64 / nq as f64;
        let st = linalg::symmetrize(&s(t)) / nq as f64;
        for m in 0..=max_m {
            let (sv, cv) = (2.0 * PI * m as f64 * t).sin_cos();
            c[m] += &st * cv;
            sn[m] += &st * sv;
        }
    }
    let cf = |m: i64, i: usize, j: usize| c[m.unsigned_abs() as usize][(i, j)];
    let sf = |m: i64, i: usize, j: usize| m.signum() as f64 * sn[m.unsigned_abs() as usize][(i, j)];

    // (kind, frequency): kind 0 constant, 1 cosine, 2 sine.
    let mode = |a: usize| -> (u8, i64) {
        if a == 0 {
            (0, 0)
        } else if a % 2 == 1 {
            (1, a.div_ceil(2) as i64)
        } else {
            (2, (a / 2) as i64)
        }
    };
    let r2 = 2f64.sqrt();
    let s_entry = |i: usize, j: usize, a: usize, b: usize| -> f64 {
        let ((ka, fa), (kb, fb)) = (mode(a), mode(b));
        match (ka, kb) {
            (0, 0) => cf(0, i, j),
            (0, 1) => r2 * cf(fb, i, j),
            (1, 0) => r2 * cf(fa, i, j),
            (0, 2) => r2 * sf(fb, i, j),
            (2, 0) => r2 * sf(fa, i, j),
            (1, 1) => cf(fa - fb, i, j) + cf(fa + fb, i, j),
            (2, 2) => cf(fa - fb, i, j) - cf(fa + fb, i, j),
            (2, 1) => sf(fa + fb, i, j) + sf(fa - fb, i, j),
            (1, 2) => sf(fb + fa, i, j) + sf(fb - fa, i, j),
            _ => unreachable!(),
        }
    };
    // Matrix of d/dt: D[sin_k, cos_k] = -2 pi k, D[cos_k, sin_k] = 2 pi k.
    let d_entry = |a: usize, b: usize| -> f64 {
        let ((ka, fa), (kb, fb)) = (mode(a), mode(b));
        match (ka, kb) {
            (2, 1) if fa == fb => -2.0 * PI * fa as f64,
            (1, 2) if fa == fb => 2.0 * PI * fa as f64,
            _ => 0.0,
        }
    };
    let minus_j = -linalg::j0(n);
    let size = dim * modes;
    let mut out = Mat::zeros(size, size);
    for i in 0..dim {
        for j in 0..dim {
            for a in 0..modes {
                for b in 0..modes {
                    out[(i * modes + a, j * modes + b)] =
                        minus_j[(i, j)] * d_entry(a, b) - s_entry(i, j, a, b);
                }
            }
        }
    }
    linalg::symmetrize(&out)
}

#[derive(Debug, Clone, Serialize)]
pub struct LoopSpectralFlow {
    /// Calibrated spectral flow.
    pub value: i64,
    /// Raw truncated spectral flow at each cutoff tried.
    pub by_cutoff: Vec<(usize, i64)>,
}

/// Spectral flow of the truncated loop operator family for `s` in `[0, 1]`,
/// computed at `cutoff` and `2 * cutoff`; the two must agree.
pub fn loop_operator_spectral_flow_fn(
    n: usize,
    s: &dyn Fn(f64, f64) -> Mat,
    cutoff: usize,
    opts: &IndexOptions,
) -> Result<LoopSpectralFlow> {
    if cutoff == 0 {
        return Err(SymError::Parameter("fourier cutoff must be positive".into()));
    }
    let mut by_cutoff = Vec::new();
    for c in [cutoff, 2 * cutoff] {
        let a0 = loop_operator_matrix(n, &|t| s(0.0, t), c);
        let a1 = loop_operator_matrix(n, &|t| s(1.0, t), c);
        let thr = opts.tol.max(1e-9);
        let sf = negative_count(&a0, thr)? - negative_count(&a1, thr)?;
        by_cutoff.push((c, sf));
    }
    if by_cutoff[0].1 != by_cutoff[1].1 {
        return Err(SymError::Convergence(format!(
            "truncated spectral flow {} at cutoff {} but {} at cutoff {}",
            by_cutoff[0].1, by_cutoff[0].0, by_cutoff[1].1, by_cutoff[1].0
        )));
    }
    Ok(LoopSpectralFlow {
        value: SF_CALIBRATION * by_cutoff[0].1,
        by_cutoff,
    })
}

pub fn loop_operator_spectral_flow(
    family: &SymmetricHomotopy,
    cutoff: usize,
    opts: &IndexOptions,
) -> Result<LoopSpectralFlow> {
    let dim = family.dim();
    if dim % 2 != 0 {
        return Err(SymError::OddDimension(dim));
    }
    loop_operator_spectral_flow_fn(dim / 2, &|s, t| family.eval(s, t), cutoff, opts)
}
