//! Crossing search along a path and the crossing-form indices `CZ` and `RS`.
//!
//! Crossings are zeros of `sigma(t) = smallest singular value of Psi(t) - I`.
//! Because `sigma` is Lipschitz with constant `sup |Psi'|`, a segment whose
//! endpoint values sum to more than `L * width` cannot contain a zero. The
//! remaining segments are bisected, grouped into clusters, and each cluster
//! is minimised by golden-section search. This also finds crossings where
//! `det(Psi - I)` touches zero without changing sign (even kernel dimension).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Crossing, CrossingReport, IndexOptions, IndexValue};
use crate::error::{Result, SymError};
use crate::linalg::{self, Mat};
use crate::path::SymplecticPath;

const LEAF_WIDTH: f64 = 1e-7;
const MAX_LEAVES: usize = 200_000;
const MAX_RUN_ZEROS: usize = 64;
const GOLDEN_TOL: f64 = 1e-12;
const PERTURBATION_TRIES: usize = 12;

/// Relative size below which a crossing-form eigenvalue counts as zero.
const FORM_TOL: f64 = 1e-6;

/// Zeros of a non-negative function with Lipschitz constant `lipschitz[i]`
/// on `[grid[i], grid[i + 1]]`, located up to `threshold`. Segments that
/// cannot be excluded are bisected down to `LEAF_WIDTH`; every local minimum
/// of the sampled values inside a run of such leaves is then refined. Returns
/// `Err(t)` if the search does not localise (the function vanishes on a
/// whole interval near `t`).
pub(crate) fn zero_candidates(
    sigma: &dyn Fn(f64) -> f64,
    grid: &[f64],
    lipschitz: &[f64],
    threshold: f64,
) -> std::result::Result<Vec<f64>, f64> {
    let mut leaves: Vec<(f64, f64, f64, f64)> = Vec::new();
    let values: Vec<f64> = grid.iter().map(|&t| sigma(t)).collect();
    for i in 0..grid.len() - 1 {
        let lip = lipschitz[i];
        let mut stack = vec![(grid[i], grid[i + 1], values[i], values[i + 1])];
        while let Some((a, b, sa, sb)) = stack.pop() {
            if sa + sb > lip * (b - a) {
                continue;
            }
            if b - a <= LEAF_WIDTH {
                leaves.push((a, b, sa, sb));
                if leaves.len() > MAX_LEAVES {
                    return Err(a);
                }
                continue;
            }
            let m = 0.5 * (a + b);
            let sm = sigma(m);
            stack.push((m, b, sm, sb));
            stack.push((a, m, sa, sm));
        }
    }

    // Runs of adjacent leaves as sampled curves.
    let mut runs: Vec<Vec<(f64, f64)>> = Vec::new();
    for (a, b, sa, sb) in leaves {
        match runs.last_mut() {
            Some(r) if a <= r.last().expect("nonempty").0 + 1e-12 => r.push((b, sb)),
            _ => runs.push(vec![(a, sa), (b, sb)]),
        }
    }

    let t0 = grid[0];
    let t1 = grid[grid.len() - 1];
    let mut out = Vec::new();
    for run in runs {
        let at_start = run[0].0 <= t0 && sigma(t0) < threshold;
        let at_end = run[run.len() - 1].0 >= t1 && sigma(t1) < threshold;
        if at_start {
            out.push(t0);
        }
        let last = run.len() - 1;
        let mut found = 0;
        for i in 0..=last {
            let left = i == 0 || run[i].1 < run[i - 1].1;
            let right = i == last || run[i].1 <= run[i + 1].1;
            if !(left && right) {
                continue;
            }
            let (t, s) = golden_min(sigma, run[i.saturating_sub(1)].0, run[(i + 1).min(last)].0);
            let near_start = at_start && t - t0 < 1e-8;
            let near_end = at_end && t1 - t < 1e-8;
            let repeated = out.last().is_some_and(|&u: &f64| t - u < 2.0 * LEAF_WIDTH);
            if s < threshold && !near_start && !near_end && !repeated {
                out.push(t);
                found += 1;
                if found > MAX_RUN_ZEROS {
                    return Err(t);
                }
            }
        }
        if at_end {
            out.push(t1);
        }
    }
    Ok(out)
}

fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > GOLDEN_TOL {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    (t, f(t))
}

pub(crate) fn path_scale(path: &SymplecticPath) -> f64 {
    path.samples()
        .iter()
        .map(linalg::max_abs)
        .fold(1.0, f64::max)
}

/// Per-segment bound on `|Psi'|` for the cubic Hermite interpolant:
/// `1.5 |M1 - M0| / h + |T0| + |T1|`.
fn path_lipschitz(path: &SymplecticPath) -> Vec<f64> {
    let (times, mats, tangents) = (path.times(), path.samples(), path.tangents());
    (0..times.len().saturating_sub(1))
        .map(|i| {
            let h = times[i + 1] - times[i];
            1.5 * linalg::frobenius(&(&mats[i + 1] - &mats[i])) / h
                + linalg::frobenius(&tangents[i])
                + linalg::frobenius(&tangents[i + 1])
        })
        .collect()
}

/// Locates all crossings of the path with the Maslov cycle and evaluates
/// their crossing forms. Endpoint crossings get half weight in the total.
pub(crate) fn crossing_report(path: &SymplecticPath, opts: &IndexOptions) -> Result<CrossingReport> {
    let dim = path.dim();
    let id = Mat::identity(dim, dim);
    let scale = path_scale(path);
    let threshold = opts.tol * scale;
    let sigma = |t: f64| linalg::smallest_singular_value(&(path.eval(t) - &id));
    let ts = zero_candidates(&sigma, path.times(), &path_lipschitz(path), threshold)
        .map_err(|t| SymError::IrregularCrossing { t })?;

    let j = linalg::j0(path.n());
    let mut crossings = Vec::new();
    let mut total = 0i64;
    for t in ts {
        let m = path.eval(t);
        let (values, v) = linalg::svd_ascending(&(&m - &id));
        let k = values.iter().filter(|&&s| s < threshold).count().max(1);
        let kernel = v.columns(0, k).into_owned();
        let s = -(&j * path.eval_derivative(t) * linalg::symplectic_inverse(&m));
        let form = linalg::symmetrize(&(kernel.transpose() * &s * &kernel));
        let inertia = linalg::inertia(&form);
        if inertia.min_abs < FORM_TOL * linalg::max_abs(&s).max(1.0) {
            return Err(SymError::IrregularCrossing { t });
        }
        let signature = inertia.positive as i64 - inertia.negative as i64;
        let is_endpoint = t <= path.times()[0] || t >= 1.0;
        total += if is_endpoint { signature } else { 2 * signature };
        crossings.push(Crossing {
            t,
            kernel_dim: k,
            signature,
            is_endpoint,
        });
    }
    Ok(CrossingReport {
        crossings,
        total_doubled: total,
    })
}

/// Result of a crossing-form index computation.
#[derive(Debug, Clone, Serialize)]
pub struct RsOutcome {
    pub value: IndexValue,
    pub crossings: CrossingReport,
    /// Rotation size `delta` of the perturbation that made crossings regular.
    pub perturbation: Option<f64>,
}

fn perturbation_sequence(seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..PERTURBATION_TRIES)
        .map(|k| 1e-4 * 0.5f64.powi(k as i32) * (0.95 + 0.1 * rng.gen::<f64>()))
        .collect()
}

/// Right-multiplies by `exp(-delta q(t) J0)`.
fn perturbed(path: &SymplecticPath, delta: f64, q: fn(f64) -> f64, dq: fn(f64) -> f64) -> SymplecticPath {
    let n = path.n();
    let j = linalg::j0(n);
    path.right_multiply(
        |t| linalg::rotation(n, -delta * q(t)),
        |t| &j * linalg::rotation(n, -delta * q(t)) * (-delta * dq(t)),
    )
}

fn with_perturbation(
    path: &SymplecticPath,
    opts: &IndexOptions,
    q: fn(f64) -> f64,
    dq: fn(f64) -> f64,
    check: &dyn Fn(&SymplecticPath) -> Result<()>,
) -> Result<RsOutcome> {
    let t_bad = match crossing_report(path, opts) {
        Ok(report) => {
            return Ok(RsOutcome {
                value: IndexValue::standard_doubled(report.total_doubled),
                crossings: report,
                perturbation: None,
            })
        }
        Err(SymError::IrregularCrossing { t }) => t,
        Err(e) => return Err(e),
    };
    let mut previous: Option<i64> = None;
    let mut last_t = t_bad;
    for delta in perturbation_sequence(opts.seed) {
        let p = perturbed(path, delta, q, dq);
        check(&p)?;
        match crossing_report(&p, opts) {
            Ok(report) => {
                if previous == Some(report.total_doubled) {
                    return Ok(RsOutcome {
                        value: IndexValue::standard_doubled(report.total_doubled),
                        crossings: report,
                        perturbation: Some(delta),
                    });
                }
                previous = Some(report.total_doubled);
            }
            Err(SymError::IrregularCrossing { t }) => {
                previous = None;
                last_t = t;
            }
            Err(e) => return Err(e),
        }
    }
    Err(SymError::IrregularCrossing { t: last_t })
}

fn check_endpoint(path: &SymplecticPath, opts: &IndexOptions) -> Result<()> {
    let dim = path.dim();
    let sigma = linalg::smallest_singular_value(&(path.end() - Mat::identity(dim, dim)));
    if sigma < opts.tol * path_scale(path) {
        return Err(SymError::EndpointDegenerate { sigma });
    }
    Ok(())
}

/// Conley-Zehnder index of a path from the identity to a matrix without
/// eigenvalue 1, as the crossing-form sum with half weight at `t = 0`.
pub fn cz_rs(path: &SymplecticPath, opts: &IndexOptions) -> Result<IndexValue> {
    cz_rs_detailed(path, opts).map(|o| o.value)
}

pub fn cz_rs_detailed(path: &SymplecticPath, opts: &IndexOptions) -> Result<RsOutcome> {
    if !path.starts_at_identity(1e-6) {
        return Err(SymError::InvalidPath("path does not start at the identity".into()));
    }
    check_endpoint(path, opts)?;
    let out = with_perturbation(path, opts, |t| t, |_| 1.0, &|p| check_endpoint(p, opts))?;
    if out.value.doubled % 2 != 0 {
        return Err(SymError::Internal(format!(
            "odd doubled Conley-Zehnder index {}",
            out.value.doubled
        )));
    }
    Ok(out)
}

/// Robbin-Salamon index for arbitrary endpoints (half weight at both ends).
pub fn rs_index(path: &SymplecticPath, opts: &IndexOptions) -> Result<IndexValue> {
    rs_index_detailed(path, opts).map(|o| o.value)
}

pub fn rs_index_detailed(path: &SymplecticPath, opts: &IndexOptions) -> Result<RsOutcome> {
    with_perturbation(
        path,
        opts,
        |t| 4.0 * t * (1.0 - t),
        |t| 4.0 - 8.0 * t,
        &|_| Ok(()),
    )
}
