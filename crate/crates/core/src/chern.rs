//! First Chern numbers of symplectic bundles over closed surfaces, given by
//! the overlap loops along the circles that split the surface into pieces
//! over which the bundle is trivial.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Result, SymError};
use crate::index::{maslov_loop, IndexOptions};
use crate::linalg::{self, Mat};
use crate::path::SymplecticPath;
use crate::splin;
use crate::suite;

#[derive(Debug, Clone)]
pub struct ClutchingData {
    rank: usize,
    genus: u32,
    loops: Vec<SymplecticPath>,
}

impl ClutchingData {
    pub fn new(rank: usize, genus: u32, loops: Vec<SymplecticPath>) -> Result<Self> {
        if rank == 0 || rank % 2 != 0 {
            return Err(SymError::OddDimension(rank));
        }
        for l in &loops {
            if l.dim() != rank {
                return Err(SymError::DimensionMismatch {
                    expected: rank,
                    found: l.dim(),
                });
            }
            if linalg::max_abs(&(l.end() - l.start())) > 1e-6 * linalg::max_abs(l.start()).max(1.0) {
                return Err(SymError::InvalidPath("overlap loop is not closed".into()));
            }
        }
        Ok(Self { rank, genus, loops })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn loops(&self) -> &[SymplecticPath] {
        &self.loops
    }
}

/// `c1 = sum of the Maslov indices of the overlap loops`.
pub fn c1_from_clutching(data: &ClutchingData, opts: &IndexOptions) -> Result<i64> {
    data.loops.iter().try_fold(0i64, |acc, l| {
        Ok(acc + maslov_loop(l, opts)?.integer().expect("Maslov index is an integer"))
    })
}

/// Chern number of a loop whose unitary parts have real determinant (as for
/// loops preserving a Lagrangian subbundle). It is always zero; the degree is
/// still computed and a nonzero value is reported as an internal failure.
pub fn c1_lagrangian_loop(l: &SymplecticPath, tol: f64, opts: &IndexOptions) -> Result<i64> {
    for (&t, m) in l.times().iter().zip(l.samples()) {
        let z = splin::rho(m)?;
        if z.im.abs() > tol {
            return Err(SymError::NotLagrangian { t, imag: z.im });
        }
    }
    let degree = maslov_loop(l, opts)?.integer().expect("Maslov index is an integer");
    if degree != 0 {
        return Err(SymError::Internal(format!(
            "loop with real determinant has degree {degree}"
        )));
    }
    Ok(0)
}

/// Rank-2 loop `t -> exp(2 pi k t J0)`.
pub fn rotation_loop(k: i64) -> SymplecticPath {
    let steps = 64 * (k.unsigned_abs() as usize).max(1);
    SymplecticPath::from_fn(steps, |t| linalg::rotation(1, 2.0 * PI * k as f64 * t))
        .expect("rotation loops are symplectic")
}

/// Pulls a loop back along the degree-`d` covering `t -> d t mod 1`.
pub fn pull_back(l: &SymplecticPath, d: i64) -> Result<SymplecticPath> {
    let steps = (l.len() - 1) * (d.unsigned_abs() as usize).max(1);
    let times: Vec<f64> = (0..=steps).map(|i| i as f64 / steps as f64).collect();
    let frac = |t: f64| (d as f64 * t).rem_euclid(1.0);
    let mats = times.iter().map(|&t| l.eval(frac(t))).collect();
    let tangents = times
        .iter()
        .map(|&t| l.eval_derivative(frac(t)) * d as f64)
        .collect();
    SymplecticPath::with_tangents(times, mats, tangents, 1e-6)
}

fn conjugate_const(l: &SymplecticPath, g: &Mat) -> Result<SymplecticPath> {
    let g_inv = linalg::symplectic_inverse(g);
    let mats = l.samples().iter().map(|m| g * m * &g_inv).collect();
    let tangents = l.tangents().iter().map(|m| g * m * &g_inv).collect();
    SymplecticPath::with_tangents(l.times().to_vec(), mats, tangents, 1e-6)
}

#[derive(Debug, Clone, Serialize)]
pub struct C1Check {
    pub axiom: String,
    pub description: String,
    pub expected: i64,
    pub found: Option<i64>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct C1AxiomReport {
    pub seed: u64,
    pub checks: Vec<C1Check>,
}

impl C1AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Normalization, additivity, functoriality and naturality checks on
/// generated clutching data. Loops are conjugated by seeded random
/// symplectic matrices, which must not change any Chern number.
pub fn check_c1_axioms(seed: u64, opts: &IndexOptions) -> C1AxiomReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let mut record = |axiom: &str, description: String, expected: i64, found: Result<i64>| {
        let found = found.ok();
        checks.push(C1Check {
            axiom: axiom.into(),
            description,
            expected,
            found,
            pass: found == Some(expected),
        });
    };
    let c1_of = |loops: Vec<SymplecticPath>, genus: u32| -> Result<i64> {
        let rank = loops.first().map_or(2, SymplecticPath::dim);
        c1_from_clutching(&ClutchingData::new(rank, genus, loops)?, opts)
    };

    for g in 0..=3u32 {
        let k = 2 - 2 * g as i64;
        let g1 = suite::random_symplectic(&mut rng, 1, 0.5);
        let found = conjugate_const(&rotation_loop(k), &g1).and_then(|l| c1_of(vec![l], g));
        record("normalization", format!("tangent data of genus {g}"), k, found);
    }

    for (a, b) in [(2, 3), (-1, 4), (0, -2)] {
        let g2 = suite::random_symplectic(&mut rng, 2, 0.5);
        let found = conjugate_const(&rotation_loop(a).direct_sum(&rotation_loop(b)), &g2)
            .and_then(|l| c1_of(vec![l], 0));
        record("additivity", format!("direct sum of degree {a} and {b} loops"), a + b, found);
    }

    for d in [3, 2, -1, 0] {
        let found = pull_back(&rotation_loop(2), d).and_then(|l| c1_of(vec![l], 0));
        record("functoriality", format!("degree {d} covering of a c1 = 2 datum"), 2 * d, found);
    }

    let found = c1_of(vec![rotation_loop(1), rotation_loop(-3), rotation_loop(2)], 0);
    record("additivity", "concatenated loop lists".into(), 0, found);

    C1AxiomReport { seed, checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tangent_bundles() {
        let o = IndexOptions::default();
        let s2 = ClutchingData::new(2, 0, vec![rotation_loop(2)]).unwrap();
        assert_eq!(c1_from_clutching(&s2, &o).unwrap(), 2);
        let g2 = ClutchingData::new(2, 2, vec![rotation_loop(-2)]).unwrap();
        assert_eq!(c1_from_clutching(&g2, &o).unwrap(), -2);
        let trivial = ClutchingData::new(4, 1, vec![rotation_loop(0).direct_sum(&rotation_loop(0))]).unwrap();
        assert_eq!(c1_from_clutching(&trivial, &o).unwrap(), 0);
    }

    #[test]
    fn reversed_loop_negates() {
        let o = IndexOptions::default();
        let l = rotation_loop(3);
        let rev = pull_back(&l, -1).unwrap();
        assert_eq!(maslov_loop(&rev, &o).unwrap().integer(), Some(-3));
    }

    #[test]
    fn lagrangian_block_loop() {
        let o = IndexOptions::default();
        let l = SymplecticPath::from_fn(64, |t| {
            let a = Mat::from_row_slice(2, 2, &[2.0 + (2.0 * PI * t).cos(), (2.0 * PI * t).sin(), 0.3, 1.0]);
            let a_inv_t = a.clone().try_inverse().unwrap().transpose();
            let mut m = Mat::zeros(4, 4);
            m.view_mut((0, 0), (2, 2)).copy_from(&a);
            m.view_mut((2, 2), (2, 2)).copy_from(&a_inv_t);
            m
        })
        .unwrap();
        assert_eq!(c1_lagrangian_loop(&l, 1e-9, &o).unwrap(), 0);
        let err = c1_lagrangian_loop(&rotation_loop(1), 1e-9, &o).unwrap_err();
        assert_eq!(err.name(), "not-lagrangian");
    }

    #[test]
    fn axiom_report_passes() {
        let r = check_c1_axioms(7, &IndexOptions::default());
        assert!(r.all_pass(), "{:?}", r.checks);
    }
}
