//! Seeded generators of symplectic data and the randomized index-axiom
//! suite (product, loop, inverse, naturality, determinant, signature,
//! direct sum, cross-algorithm agreement).

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::batch::{run_trials, Exec};
use crate::error::Result;
use crate::index::{self, IndexOptions, IndexValue};
use crate::io::PathDoc;
use crate::linalg::{self, Mat};
use crate::path::SymplecticPath;
use crate::splin;

/// Default sample count of generated paths.
pub const PATH_STEPS: usize = 400;

/// Smallest singular value of `Psi(1) - I` accepted for generated paths.
pub const ENDPOINT_MARGIN: f64 = 0.05;

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| uniform(rng, -1.0, 1.0))
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Mat {
    linalg::symmetrize(&random_matrix(rng, dim, dim)) * scale
}

pub fn random_orthogonal(rng: &mut ChaCha8Rng, dim: usize) -> Mat {
    let q = random_matrix(rng, dim, dim).qr().q();
    if q.determinant() < 0.0 {
        let mut q = q;
        q.column_mut(0).neg_mut();
        q
    } else {
        q
    }
}

/// Symmetric matrix with the given eigenvalues in a random orthonormal basis.
pub fn symmetric_with_spectrum(rng: &mut ChaCha8Rng, eigenvalues: &[f64]) -> Mat {
    let q = random_orthogonal(rng, eigenvalues.len());
    linalg::symmetrize(&(&q * Mat::from_diagonal(&linalg::column(eigenvalues)) * q.transpose()))
}

/// Product of a symplectic shear pair, a block `diag(A, A^{-T})` and an
/// exponential `exp(J0 S)`, all of size about `scale`.
pub fn random_symplectic(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Mat {
    let dim = 2 * n;
    let mut upper = Mat::identity(dim, dim);
    upper
        .view_mut((0, n), (n, n))
        .copy_from(&random_symmetric(rng, n, scale));
    let mut lower = Mat::identity(dim, dim);
    lower
        .view_mut((n, 0), (n, n))
        .copy_from(&random_symmetric(rng, n, scale));
    let a = Mat::identity(n, n) + random_matrix(rng, n, n) * (0.5 * scale);
    let a_inv_t = a
        .clone()
        .try_inverse()
        .unwrap_or_else(|| Mat::identity(n, n))
        .transpose();
    let mut block = Mat::zeros(dim, dim);
    block.view_mut((0, 0), (n, n)).copy_from(&a);
    block.view_mut((n, n), (n, n)).copy_from(&a_inv_t);
    let e = (linalg::j0(n) * random_symmetric(rng, dim, scale)).exp();
    upper * block * lower * e
}

/// `S(t) = A + B cos 2 pi t + C sin 2 pi t + D cos 4 pi t`.
#[derive(Debug, Clone)]
pub struct TrigFamily {
    pub coeffs: [Mat; 4],
}

impl TrigFamily {
    pub fn random(rng: &mut ChaCha8Rng, n: usize, amplitude: f64) -> Self {
        let dim = 2 * n;
        let mut coeffs = [0.0, 0.5, 0.5, 0.3].map(|w| random_symmetric(rng, dim, amplitude * w));
        coeffs[0] = random_symmetric(rng, dim, amplitude);
        Self { coeffs }
    }

    pub fn eval(&self, t: f64) -> Mat {
        let w = [1.0, (2.0 * PI * t).cos(), (2.0 * PI * t).sin(), (4.0 * PI * t).cos()];
        self.coeffs
            .iter()
            .zip(w)
            .fold(Mat::zeros(self.coeffs[0].nrows(), self.coeffs[0].ncols()), |acc, (c, w)| acc + c * w)
    }

    pub fn n(&self) -> usize {
        self.coeffs[0].nrows() / 2
    }

    pub fn path(&self, steps: usize) -> Result<SymplecticPath> {
        splin::path_from_symmetric_fn(self.n(), steps, |t| self.eval(t))
    }
}

pub fn endpoint_margin(path: &SymplecticPath) -> f64 {
    let dim = path.dim();
    linalg::smallest_singular_value(&(path.end() - Mat::identity(dim, dim)))
}

/// A path from the identity generated by a random trigonometric family,
/// redrawn until its endpoint is at least [`ENDPOINT_MARGIN`] away from the
/// Maslov cycle.
pub fn random_admissible_path(rng: &mut ChaCha8Rng, n: usize) -> (SymplecticPath, TrigFamily) {
    loop {
        let amplitude = uniform(rng, 0.3, 3.0);
        let family = TrigFamily::random(rng, n, amplitude);
        let path = family.path(PATH_STEPS).expect("midpoint steps are symplectic");
        if endpoint_margin(&path) > ENDPOINT_MARGIN {
            return (path, family);
        }
    }
}

/// Loop `C(t) * (exp(2 pi k_1 t J0) + ... + exp(2 pi k_n t J0))` where
/// `C(t) = exp(J0 (A sin 2 pi t + B (1 - cos 2 pi t)))` is contractible.
/// Returns the loop and `k_1 + ... + k_n`.
pub fn random_loop(rng: &mut ChaCha8Rng, n: usize, max_k: i64) -> (SymplecticPath, i64) {
    let dim = 2 * n;
    let ks: Vec<i64> = (0..n).map(|_| rng.gen_range(-max_k..=max_k)).collect();
    let amp = uniform(rng, 0.1, 1.0);
    let a = random_symmetric(rng, dim, amp);
    let b = random_symmetric(rng, dim, amp);
    let j = linalg::j0(n);
    let steps = PATH_STEPS;
    let ks2 = ks.clone();
    let path = SymplecticPath::from_fn(steps, move |t| {
        let (s, c) = (2.0 * PI * t).sin_cos();
        let cont = (&j * (&a * s + &b * (1.0 - c))).exp();
        let rot = ks2
            .iter()
            .map(|&k| linalg::rotation(1, 2.0 * PI * k as f64 * t))
            .reduce(|x, y| linalg::direct_sum(&x, &y))
            .expect("n >= 1");
        cont * rot
    })
    .expect("loop samples are symplectic");
    (path, ks.iter().sum())
}

/// Symmetric matrix with spectral norm below `2 pi` and no eigenvalue in
/// `(-0.1, 0.1)`.
pub fn random_small_nondegenerate(rng: &mut ChaCha8Rng, dim: usize) -> Mat {
    let eig: Vec<f64> = (0..dim)
        .map(|_| {
            let v = uniform(rng, 0.1, 2.0 * PI - 0.1);
            if rng.gen::<bool>() {
                v
            } else {
                -v
            }
        })
        .collect();
    symmetric_with_spectrum(rng, &eig)
}

pub fn exp_path(s: &Mat, steps: usize) -> SymplecticPath {
    let a = linalg::j0(s.nrows() / 2) * s;
    SymplecticPath::from_fn(steps, |t| (&a * t).exp()).expect("exponential paths are symplectic")
}

pub type CzFn = fn(&SymplecticPath, &IndexOptions) -> Result<IndexValue>;

#[derive(Debug, Clone, Copy)]
pub struct AxiomConfig {
    pub seed: u64,
    pub count: usize,
    pub exec: Exec,
    pub opts: IndexOptions,
    /// Conley-Zehnder implementation under test.
    pub cz: CzFn,
}

impl AxiomConfig {
    pub fn new(seed: u64, count: usize) -> Self {
        Self {
            seed,
            count,
            exec: Exec::default(),
            opts: IndexOptions::default(),
            cz: index::cz_rs,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub trial: usize,
    pub message: String,
    pub path: Option<PathDoc>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomOutcome {
    pub axiom: &'static str,
    pub trials: usize,
    pub failures: usize,
    pub counterexamples: Vec<Counterexample>,
}

impl AxiomOutcome {
    pub fn pass(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub seed: u64,
    pub count: usize,
    pub axioms: Vec<AxiomOutcome>,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.axioms.iter().all(AxiomOutcome::pass)
    }
}

pub const AXIOMS: [&str; 8] = [
    "signature",
    "product",
    "loop",
    "inverse",
    "naturality",
    "determinant",
    "direct-sum",
    "cross-algorithm",
];

type Trial = std::result::Result<(), (String, Option<SymplecticPath>)>;

fn fail(message: String, path: &SymplecticPath) -> Trial {
    Err((message, Some(path.clone())))
}

fn cz_of(cfg: &AxiomConfig, p: &SymplecticPath) -> std::result::Result<i64, (String, Option<SymplecticPath>)> {
    (cfg.cz)(p, &cfg.opts)
        .map(|v| v.doubled)
        .map_err(|e| (format!("index error: {e}"), Some(p.clone())))
}

fn mu_of(cfg: &AxiomConfig, p: &SymplecticPath) -> std::result::Result<i64, (String, Option<SymplecticPath>)> {
    index::maslov_loop(p, &cfg.opts)
        .map(|v| v.doubled / 2)
        .map_err(|e| (format!("maslov error: {e}"), Some(p.clone())))
}

fn axiom_trial(cfg: &AxiomConfig, axiom: &str, rng: &mut ChaCha8Rng) -> Trial {
    let n = rng.gen_range(1..=2usize);
    match axiom {
        "signature" => {
            let n = rng.gen_range(1..=3usize);
            let s = random_small_nondegenerate(rng, 2 * n);
            let p = exp_path(&s, 200);
            let inertia = linalg::inertia(&s);
            let expected = inertia.positive as i64 - inertia.negative as i64;
            let got = cz_of(cfg, &p)?;
            if got != expected {
                return fail(format!("doubled CZ {got}, signature {expected}"), &p);
            }
        }
        "product" => {
            let (a, ka) = random_loop(rng, n, 2);
            let (b, kb) = random_loop(rng, n, 2);
            let ab = a.product(&b).expect("same dimension");
            let (ma, mb, mab) = (mu_of(cfg, &a)?, mu_of(cfg, &b)?, mu_of(cfg, &ab)?);
            if mab != ma + mb || ma != ka || mb != kb {
                return fail(format!("mu(ab) = {mab}, mu(a) = {ma} ({ka}), mu(b) = {mb} ({kb})"), &ab);
            }
        }
        "loop" => {
            let (phi, _) = random_loop(rng, n, 2);
            let (psi, _) = random_admissible_path(rng, n);
            let prod = phi.product(&psi).expect("same dimension");
            let (m, c, cp) = (mu_of(cfg, &phi)?, cz_of(cfg, &psi)?, cz_of(cfg, &prod)?);
            if cp != 4 * m + c {
                return fail(format!("doubled CZ(phi psi) = {cp}, mu(phi) = {m}, doubled CZ(psi) = {c}"), &prod);
            }
        }
        "inverse" => {
            let (psi, _) = random_admissible_path(rng, n);
            let (c, ci) = (cz_of(cfg, &psi)?, cz_of(cfg, &psi.inverse())?);
            if ci != -c {
                return fail(format!("doubled CZ {c}, of inverse {ci}"), &psi);
            }
            let (phi, _) = random_loop(rng, n, 2);
            let (m, mi) = (mu_of(cfg, &phi)?, mu_of(cfg, &phi.inverse())?);
            if mi != -m {
                return fail(format!("mu {m}, of inverse {mi}"), &phi);
            }
        }
        "naturality" => {
            let (psi, _) = random_admissible_path(rng, n);
            let g = random_symplectic(rng, n, 0.4);
            let s = random_symmetric(rng, 2 * n, 1.5);
            let a = linalg::j0(n) * s;
            let theta = SymplecticPath::from_fn(PATH_STEPS, |t| &g * (&a * t).exp())
                .expect("conjugating path is symplectic");
            let conj = psi.conjugate_by(&theta).expect("same dimension");
            let (c, cc) = (cz_of(cfg, &psi)?, cz_of(cfg, &conj)?);
            if c != cc {
                return fail(format!("doubled CZ {c}, after conjugation {cc}"), &psi);
            }
        }
        "determinant" => {
            let n = rng.gen_range(1..=3usize);
            let (psi, _) = random_admissible_path(rng, n);
            let c = cz_of(cfg, &psi)? / 2;
            let lhs = if (n as i64 - c).rem_euclid(2) == 0 { 1 } else { -1 };
            let rhs = index::endpoint_determinant_sign(&psi, 1e-12);
            if lhs != rhs {
                return fail(format!("(-1)^(n - CZ) = {lhs}, sign det(I - Psi(1)) = {rhs}"), &psi);
            }
        }
        "direct-sum" => {
            let (a, _) = random_admissible_path(rng, 1);
            let (b, _) = random_admissible_path(rng, n);
            let ab = a.direct_sum(&b);
            let (ca, cb, cab) = (cz_of(cfg, &a)?, cz_of(cfg, &b)?, cz_of(cfg, &ab)?);
            if cab != ca + cb {
                return fail(format!("doubled CZ of sum {cab}, parts {ca} + {cb}"), &ab);
            }
            let (la, _) = random_loop(rng, 1, 3);
            let (lb, _) = random_loop(rng, n, 3);
            let lab = la.direct_sum(&lb);
            let (ma, mb, mab) = (mu_of(cfg, &la)?, mu_of(cfg, &lb)?, mu_of(cfg, &lab)?);
            if mab != ma + mb {
                return fail(format!("mu of sum {mab}, parts {ma} + {mb}"), &lab);
            }
        }
        "cross-algorithm" => {
            let (psi, _) = random_admissible_path(rng, 1);
            let c = cz_of(cfg, &psi)?;
            let (w, interval) = index::cz_winding(&psi, &cfg.opts)
                .map_err(|e| (format!("winding error: {e}"), Some(psi.clone())))?;
            let d = index::cz_degree_sp2(&psi, &cfg.opts)
                .map_err(|e| (format!("degree error: {e}"), Some(psi.clone())))?;
            if c != w.doubled || c != d.doubled || interval.length() >= 0.5 {
                return fail(
                    format!(
                        "doubled CZ: crossing {c}, winding {} (interval [{}, {}]), degree {}",
                        w.doubled, interval.lower, interval.upper, d.doubled
                    ),
                    &psi,
                );
            }
        }
        other => return Err((format!("unknown axiom {other}"), None)),
    }
    Ok(())
}

const MAX_DUMPS: usize = 3;

/// Runs one axiom `count` times. Trial `i` of the axiom at position `a` of
/// [`AXIOMS`] is seeded from `(seed, a * count + i)`.
pub fn run_axiom(cfg: &AxiomConfig, axiom: &'static str) -> AxiomOutcome {
    let a = AXIOMS.iter().position(|&x| x == axiom).unwrap_or(AXIOMS.len());
    let results = run_trials(cfg.exec, cfg.seed, cfg.count, |i, _| {
        let mut rng = crate::batch::trial_rng(cfg.seed, a * cfg.count.max(1) + i);
        axiom_trial(cfg, axiom, &mut rng)
    });
    let mut failures = 0;
    let mut counterexamples = Vec::new();
    for (trial, r) in results.into_iter().enumerate() {
        if let Err((message, path)) = r {
            failures += 1;
            if counterexamples.len() < MAX_DUMPS {
                counterexamples.push(Counterexample {
                    trial,
                    message,
                    path: path.as_ref().map(PathDoc::from_path),
                });
            }
        }
    }
    AxiomOutcome {
        axiom,
        trials: cfg.count,
        failures,
        counterexamples,
    }
}

/// Runs every axiom of [`AXIOMS`] `count` times.
pub fn run_axiom_suite(cfg: &AxiomConfig) -> AxiomReport {
    AxiomReport {
        seed: cfg.seed,
        count: cfg.count,
        axioms: AXIOMS.iter().map(|&a| run_axiom(cfg, a)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn generated_matrices_are_symplectic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=4 {
            let m = random_symplectic(&mut rng, n, 0.5);
            assert!(linalg::symplectic_residual(&m).unwrap() < 1e-9);
        }
    }

    #[test]
    fn empty_suite_passes() {
        let r = run_axiom_suite(&AxiomConfig::new(1, 0));
        assert!(r.all_pass());
        assert_eq!(r.axioms.len(), AXIOMS.len());
    }

    #[test]
    fn unknown_axiom_fails_every_trial() {
        let r = run_axiom(&AxiomConfig::new(1, 3), "no-such-axiom");
        assert_eq!(r.failures, 3);
    }

    #[test]
    fn small_suite_passes() {
        let r = run_axiom_suite(&AxiomConfig::new(11, 4));
        for a in &r.axioms {
            assert!(a.pass(), "{}: {:?}", a.axiom, a.counterexamples.first().map(|c| &c.message));
        }
    }
}
