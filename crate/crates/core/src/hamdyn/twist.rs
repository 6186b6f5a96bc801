use serde::Serialize;

const FIXED_TOL: f64 = 1e-8;
const MERGE_TOL: f64 = 1e-6;
const FD_STEP: f64 = 1e-7;

/// Grid for the fixed-point search on the annulus
/// `R / period Z x [r_min, r_max]`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AnnulusGrid {
    pub period: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub n_theta: usize,
    pub n_r: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPoint {
    pub theta: f64,
    pub r: f64,
    pub residual: f64,
    /// `det(DF - I)` is bounded away from zero.
    pub isolated: bool,
}

/// Non-isolated fixed points at a common radius covering every angle column
/// of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedCircle {
    pub r: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TwistReport {
    pub fixed_points: Vec<FixedPoint>,
    pub fixed_circles: Vec<FixedCircle>,
    /// Mean angular displacement of the lift on the inner and outer circle.
    pub rotation_inner: f64,
    pub rotation_outer: f64,
    /// The boundary circles turn in opposite directions.
    pub twist: bool,
}

fn wrap(x: f64, period: f64) -> f64 {
    x - period * (x / period).round()
}

/// Newton from every grid node on `F(theta, r) = (theta' - theta mod period,
/// r' - r)`, followed by deduplication.
pub fn twist_fixed_points(map: &dyn Fn(f64, f64) -> (f64, f64), grid: &AnnulusGrid) -> TwistReport {
    let p = grid.period;
    let residual = |th: f64, r: f64| {
        let (a, b) = map(th, r);
        (wrap(a - th, p), b - r)
    };
    let mut found: Vec<FixedPoint> = Vec::new();
    let n_r = grid.n_r.max(2);
    let n_theta = grid.n_theta.max(1);
    for i in 0..n_theta {
        for k in 0..n_r {
            let mut th = p * i as f64 / n_theta as f64;
            let mut r = grid.r_min + (grid.r_max - grid.r_min) * k as f64 / (n_r - 1) as f64;
            let mut det = 0.0;
            for _ in 0..50 {
                let (f1, f2) = residual(th, r);
                let (a1, a2) = residual(th + FD_STEP, r);
                let (b1, b2) = residual(th - FD_STEP, r);
                let (c1, c2) = residual(th, r + FD_STEP);
                let (d1, d2) = residual(th, r - FD_STEP);
                let j = [
                    [(a1 - b1) / (2.0 * FD_STEP), (c1 - d1) / (2.0 * FD_STEP)],
                    [(a2 - b2) / (2.0 * FD_STEP), (c2 - d2) / (2.0 * FD_STEP)],
                ];
                det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
                if f1.hypot(f2) <= FIXED_TOL * 1e-3 {
                    break;
                }
                // Least-squares step through the pseudo-inverse, which also
                // handles curves of fixed points.
                let m = nalgebra::Matrix2::new(j[0][0], j[0][1], j[1][0], j[1][1]);
                let Ok(step) = m.svd(true, true).solve(&nalgebra::Vector2::new(f1, f2), 1e-10) else {
                    break;
                };
                th -= step[0];
                r -= step[1];
                if !(th.is_finite() && r.is_finite()) {
                    break;
                }
            }
            let th = th.rem_euclid(p);
            let (f1, f2) = residual(th, r);
            let res = f1.hypot(f2);
            let inside = r >= grid.r_min - 1e-12 && r <= grid.r_max + 1e-12;
            if res <= FIXED_TOL && inside {
                let dup = found.iter().any(|q| {
                    wrap(q.theta - th, p).abs() < MERGE_TOL && (q.r - r).abs() < MERGE_TOL
                });
                if !dup {
                    found.push(FixedPoint {
                        theta: th,
                        r,
                        residual: res,
                        isolated: det.abs() > 1e-6,
                    });
                }
            }
        }
    }
    found.sort_by(|a, b| a.r.total_cmp(&b.r).then(a.theta.total_cmp(&b.theta)));

    let mut fixed_circles: Vec<FixedCircle> = Vec::new();
    for q in found.iter().filter(|q| !q.isolated) {
        match fixed_circles.iter_mut().find(|c| (c.r - q.r).abs() < MERGE_TOL) {
            Some(c) => c.points += 1,
            None => fixed_circles.push(FixedCircle { r: q.r, points: 1 }),
        }
    }
    fixed_circles.retain(|c| c.points >= n_theta);

    let rotation = |r: f64| {
        (0..n_theta)
            .map(|i| {
                let th = p * i as f64 / n_theta as f64;
                map(th, r).0 - th
            })
            .sum::<f64>()
            / n_theta as f64
    };
    let rotation_inner = rotation(grid.r_min);
    let rotation_outer = rotation(grid.r_max);
    TwistReport {
        fixed_points: found,
        fixed_circles,
        rotation_inner,
        rotation_outer,
        twist: rotation_inner * rotation_outer < 0.0,
    }
}
