use std::f64::consts::PI;

use nalgebra::Complex;
use serde::Serialize;

use super::crossing::path_scale;
use super::{unwrap_phase, IndexOptions, IndexValue};
use crate::error::{Result, SymError};
use crate::linalg::{self, Mat};
use crate::path::SymplecticPath;

const S_GRID: usize = 2048;
const BOUNDARY_TOL: f64 = 1e-8;

/// Range of the rotation numbers `Delta(s)` of the unit vectors
/// `z_s = (cos 2 pi s, sin 2 pi s)` under an `Sp(2)` path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindingInterval {
    pub lower: f64,
    pub upper: f64,
    pub index: i64,
}

impl WindingInterval {
    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }
}

fn image_phase(m: &Mat, s: f64) -> f64 {
    let (c, d) = ((2.0 * PI * s).cos(), (2.0 * PI * s).sin());
    Complex::new(m[(0, 0)] * c + m[(0, 1)] * d, m[(1, 0)] * c + m[(1, 1)] * d).arg()
}

/// Phase increase of `s -> M z_s` from `a` to `b` for `0 <= b - a < 1/2`.
/// Orientation-preserving maps turn every ray forward and a half turn of
/// inputs never maps to more than a half turn, so the increase lies in
/// `[0, pi]`; the shift below only absorbs rounding when `b` is close to `a`.
fn forward_step(m: &Mat, a: f64, b: f64) -> f64 {
    let d = (image_phase(m, b) - image_phase(m, a)).rem_euclid(2.0 * PI);
    if d > 1.5 * PI {
        d - 2.0 * PI
    } else {
        d
    }
}

fn golden_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-13 {
        if fc > fd {
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
    f(0.5 * (a + b)).max(fc).max(fd)
}

/// Conley-Zehnder index of an `Sp(2)` path from its winding interval:
/// `2k` when the integer `k` lies in the interval, `2k + 1` when the
/// interval sits inside `(k, k + 1)`.
pub fn cz_winding(path: &SymplecticPath, opts: &IndexOptions) -> Result<(IndexValue, WindingInterval)> {
    if path.n() != 1 {
        return Err(SymError::Unsupported("winding intervals need n = 1".into()));
    }
    if !path.starts_at_identity(1e-6) {
        return Err(SymError::InvalidPath("path does not start at the identity".into()));
    }
    let end = path.end().clone();
    let sigma = linalg::smallest_singular_value(&(&end - Mat::identity(2, 2)));
    if sigma < opts.tol * path_scale(path) {
        return Err(SymError::EndpointDegenerate { sigma });
    }

    let first = unwrap_phase(
        &|t| {
            let m = path.eval(t);
            Ok(Complex::new(m[(0, 0)], m[(1, 0)]))
        },
        path.times(),
    )?;
    let delta0 = first / (2.0 * PI);

    // Delta on a uniform s-grid, then golden-section refinement around the
    // extreme grid values.
    let h = 1.0 / S_GRID as f64;
    let mut values = Vec::with_capacity(S_GRID + 1);
    let mut acc = 0.0;
    values.push(delta0);
    for k in 0..S_GRID {
        acc += forward_step(&end, k as f64 * h, (k + 1) as f64 * h);
        values.push(delta0 + (acc - 2.0 * PI * (k + 1) as f64 * h) / (2.0 * PI));
    }
    let local = |k: usize| {
        let base = values[k];
        let s0 = k as f64 * h;
        let end = &end;
        move |s: f64| base + (forward_step(end, s0, s) - 2.0 * PI * (s - s0)) / (2.0 * PI)
    };
    let arg_ext = |better: &dyn Fn(f64, f64) -> bool| {
        (0..S_GRID).fold(0, |best, k| if better(values[k], values[best]) { k } else { best })
    };
    let kmax = arg_ext(&|a, b| a > b);
    let kmin = arg_ext(&|a, b| a < b);
    let lo_k = |k: usize| if k == 0 { S_GRID - 1 } else { k - 1 };
    let refine = |k: usize, sign: f64| {
        // Delta is 1-periodic in s, so the window may run past s = 1.
        let start = lo_k(k);
        let f = local(start);
        let s0 = start as f64 * h;
        let g = |s: f64| sign * f(s);
        sign * golden_max(&g, s0, s0 + 2.0 * h)
    };
    let upper = values[kmax].max(refine(kmax, 1.0));
    let lower = values[kmin].min(refine(kmin, -1.0));

    if upper - lower >= 0.5 {
        return Err(SymError::Internal(format!(
            "winding interval [{lower}, {upper}] is not shorter than 1/2"
        )));
    }
    for b in [lower, upper] {
        if (b - b.round()).abs() < BOUNDARY_TOL {
            return Err(SymError::EndpointDegenerate {
                sigma: (b - b.round()).abs(),
            });
        }
    }
    let k = lower.ceil();
    let index = if k <= upper {
        2 * k as i64
    } else {
        2 * lower.floor() as i64 + 1
    };
    Ok((
        IndexValue::standard(index),
        WindingInterval {
            lower,
            upper,
            index,
        },
    ))
}
