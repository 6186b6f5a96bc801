use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Complex;

use super::{IndexOptions, IndexValue};
use crate::error::{Result, SymError};
use crate::linalg;
use crate::path::SymplecticPath;
use crate::splin;

const MAX_REFINE: usize = 256;

/// Continuous change of `arg f(t)` across `grid`. Intervals whose principal
/// phase step reaches `pi/2` are subdivided (doubling up to 256 parts).
pub(crate) fn unwrap_phase(
    f: &dyn Fn(f64) -> Result<Complex<f64>>,
    grid: &[f64],
) -> Result<f64> {
    let values = grid.iter().map(|&t| f(t)).collect::<Result<Vec<_>>>()?;
    let mut total = 0.0;
    for i in 0..grid.len() - 1 {
        let step = linalg::phase_step(values[i], values[i + 1]);
        if step.abs() < FRAC_PI_2 {
            total += step;
            continue;
        }
        let (t0, t1) = (grid[i], grid[i + 1]);
        let mut parts = 2;
        loop {
            let mut prev = values[i];
            let mut sum = 0.0;
            let mut worst = 0.0f64;
            for k in 1..=parts {
                let z = if k == parts {
                    values[i + 1]
                } else {
                    f(t0 + (t1 - t0) * k as f64 / parts as f64)?
                };
                let s = linalg::phase_step(prev, z);
                worst = worst.max(s.abs());
                sum += s;
                prev = z;
            }
            if worst < FRAC_PI_2 {
                total += sum;
                break;
            }
            if parts >= MAX_REFINE {
                return Err(SymError::Resolution { t0, t1, jump: worst });
            }
            parts *= 2;
        }
    }
    Ok(total)
}

/// Maslov index of a loop of symplectic matrices: the winding number of
/// `t -> rho(L(t))`.
pub fn maslov_loop(path: &SymplecticPath, _opts: &IndexOptions) -> Result<IndexValue> {
    let scale = super::crossing::path_scale(path);
    if linalg::max_abs(&(path.end() - path.start())) > 1e-6 * scale {
        return Err(SymError::InvalidPath("loop is not closed".into()));
    }
    let total = unwrap_phase(&|t| splin::rho(&path.eval(t)), path.times())?;
    let winding = total / (2.0 * PI);
    let degree = winding.round();
    if (winding - degree).abs() > 1e-3 {
        return Err(SymError::Internal(format!(
            "non-integral winding {winding} of a closed loop"
        )));
    }
    Ok(IndexValue::standard(degree as i64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{direct_sum, rotation, Mat};

    #[test]
    fn normalization_and_direct_sum() {
        let o = IndexOptions::default();
        let l = SymplecticPath::from_fn(64, |t| rotation(1, 2.0 * PI * t)).unwrap();
        assert_eq!(maslov_loop(&l, &o).unwrap().integer(), Some(1));
        let c = SymplecticPath::from_fn(4, |_| Mat::identity(4, 4)).unwrap();
        assert_eq!(maslov_loop(&c, &o).unwrap().integer(), Some(0));
        let s = SymplecticPath::from_fn(64, |t| {
            direct_sum(&rotation(1, 4.0 * PI * t), &rotation(1, 6.0 * PI * t))
        })
        .unwrap();
        assert_eq!(maslov_loop(&s, &o).unwrap().integer(), Some(5));
    }

    #[test]
    fn coarse_loop_is_refined_or_rejected() {
        let o = IndexOptions::default();
        let l = SymplecticPath::from_fn(3, |t| rotation(1, 2.0 * PI * t)).unwrap();
        assert_eq!(maslov_loop(&l, &o).unwrap().integer(), Some(1));
        let jump = |t: f64| Ok(if t < 0.3137 { Complex::new(1.0, 0.0) } else { Complex::new(-1.0, 1e-3) });
        let err = unwrap_phase(&jump, &[0.0, 0.5, 1.0]).unwrap_err();
        assert_eq!(err.name(), "resolution");
    }

    #[test]
    fn open_path_is_rejected() {
        let o = IndexOptions::default();
        let p = SymplecticPath::from_fn(8, |t| rotation(1, t)).unwrap();
        assert_eq!(maslov_loop(&p, &o).unwrap_err().name(), "invalid-path");
    }
}
