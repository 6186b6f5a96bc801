//! Library results checked against independently computed values.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use symidx::chain::unit_sphere_rs_trans_doubled;
use symidx::index::{self, loop_operator_matrix, IndexOptions};
use symidx::io::ComplexDoc;
use symidx::splin::{classify_eigenvalues, GroupKind};
use symidx::suite::random_symplectic;
use symidx::{linalg, Mat, SymplecticPath};

fn data(name: &str) -> String {
    let path = format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap()
}

/// Rank over GF(2) by row reduction of a dense 0/1 matrix.
fn rank_mod2(mut rows: Vec<Vec<u8>>) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..ncols {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][c] == 1) else {
            continue;
        };
        rows.swap(rank, p);
        for r in 0..rows.len() {
            if r != rank && rows[r][c] == 1 {
                for k in 0..ncols {
                    rows[r][k] ^= rows[rank][k];
                }
            }
        }
        rank += 1;
    }
    rank
}

/// GF(2) Betti numbers of a closed 2-dimensional simplicial complex given by
/// its triangles.
fn simplicial_betti(triangles: &[[usize; 3]]) -> [usize; 3] {
    let mut vertices = BTreeMap::new();
    let mut edges = BTreeMap::new();
    for t in triangles {
        for &v in t {
            let k = vertices.len();
            vertices.entry(v).or_insert(k);
        }
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[0], t[2])] {
            let e = (a.min(b), a.max(b));
            let k = edges.len();
            edges.entry(e).or_insert(k);
        }
    }
    let d1: Vec<Vec<u8>> = (0..vertices.len())
        .map(|v| {
            let mut row = vec![0u8; edges.len()];
            for (&(a, b), &j) in &edges {
                if vertices[&a] == v || vertices[&b] == v {
                    row[j] = 1;
                }
            }
            row
        })
        .collect();
    let d2: Vec<Vec<u8>> = {
        let mut m = vec![vec![0u8; triangles.len()]; edges.len()];
        for (j, t) in triangles.iter().enumerate() {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[0], t[2])] {
                m[edges[&(a.min(b), a.max(b))]][j] ^= 1;
            }
        }
        m
    };
    // Every edge lies on exactly two triangles.
    assert!(d2.iter().all(|row| row.iter().map(|&x| x as usize).sum::<usize>() == 2));
    let (r1, r2) = (rank_mod2(d1), rank_mod2(d2));
    [vertices.len() - r1, edges.len() - r1 - r2, triangles.len() - r2]
}

fn tetrahedron_boundary() -> Vec<[usize; 3]> {
    vec![[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]
}

fn seven_vertex_torus() -> Vec<[usize; 3]> {
    (0..7)
        .flat_map(|i| [[i, (i + 1) % 7, (i + 3) % 7], [i, (i + 2) % 7, (i + 3) % 7]])
        .collect()
}

fn six_vertex_projective_plane() -> Vec<[usize; 3]> {
    vec![
        [0, 1, 2],
        [0, 2, 3],
        [0, 3, 4],
        [0, 4, 5],
        [0, 5, 1],
        [1, 2, 4],
        [2, 3, 5],
        [3, 4, 1],
        [4, 5, 2],
        [5, 1, 3],
    ]
}

#[test]
fn shipped_morse_complexes_match_simplicial_homology() {
    let cases = [
        ("s2.complex", tetrahedron_boundary()),
        ("t2.complex", seven_vertex_torus()),
        ("rp2.complex", six_vertex_projective_plane()),
    ];
    for (file, triangles) in cases {
        let oracle = simplicial_betti(&triangles);
        let complex = ComplexDoc::parse(&data(file)).unwrap().to_complex().unwrap();
        let h = complex.homology();
        let c = complex.cohomology();
        for (k, &b) in oracle.iter().enumerate() {
            assert_eq!(h.get(2 * k as i64), b, "{file} H_{k}");
            assert_eq!(c.get(2 * k as i64), b, "{file} H^{k}");
        }
    }
}

#[test]
fn simplicial_oracle_values() {
    assert_eq!(simplicial_betti(&tetrahedron_boundary()), [1, 0, 1]);
    assert_eq!(simplicial_betti(&seven_vertex_torus()), [1, 2, 1]);
    assert_eq!(simplicial_betti(&six_vertex_projective_plane()), [1, 1, 1]);
}

/// Interior zeros of the Jacobi field `sin t` along `[0, 2 pi |k|]`.
fn conjugate_points(k: i64) -> i64 {
    let end = 2.0 * PI * k.unsigned_abs() as f64;
    let steps = 100_000;
    let mut count = 0;
    let mut prev = (end / steps as f64).sin();
    for i in 2..steps {
        let s = (end * i as f64 / steps as f64).sin();
        if s * prev < 0.0 {
            count += 1;
        }
        prev = s;
    }
    count
}

#[test]
fn great_circle_table_matches_conjugate_points() {
    let opts = IndexOptions::default();
    for n in 4..=6u32 {
        for k in -2..=2i64 {
            let table = unit_sphere_rs_trans_doubled(n, k);
            let m = conjugate_points(k);
            let from_jacobi = if k == 0 { 0 } else { k.signum() * (n as i64 - 1) * (2 * m + 2) };
            assert_eq!(table, from_jacobi, "n = {n}, k = {k}");
            if k != 0 {
                let steps = 200 * k.unsigned_abs() as usize;
                let rot = SymplecticPath::from_fn(steps, |t| linalg::rotation(n as usize - 1, 2.0 * PI * k as f64 * t)).unwrap();
                assert_eq!(index::rs_index(&rot, &opts).unwrap().doubled, table, "n = {n}, k = {k}");
            }
        }
    }
}

/// Eigenvalue groups of a 4x4 symplectic matrix from its palindromic
/// characteristic polynomial: with `x = lambda + 1/lambda`,
/// `x^2 - a x + (b - 2) = 0`.
fn quartic_groups(m: &Mat) -> Option<BTreeMap<&'static str, usize>> {
    let a = m.trace();
    let b = (a * a - (m * m).trace()) / 2.0;
    let disc = a * a - 4.0 * (b - 2.0);
    let mut out = BTreeMap::new();
    if disc.abs() < 1e-3 {
        return None;
    }
    if disc < 0.0 {
        out.insert("quadruple", 1);
        return Some(out);
    }
    for x in [(a + disc.sqrt()) / 2.0, (a - disc.sqrt()) / 2.0] {
        if (x.abs() - 2.0).abs() < 1e-3 {
            return None;
        }
        let kind = if x > 2.0 {
            "positive"
        } else if x < -2.0 {
            "negative"
        } else {
            "elliptic"
        };
        *out.entry(kind).or_insert(0) += 1;
    }
    Some(out)
}

#[test]
fn classification_matches_characteristic_polynomial() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut checked = 0;
    for _ in 0..300 {
        let m = random_symplectic(&mut rng, 2, 0.8);
        let Some(expected) = quartic_groups(&m) else {
            continue;
        };
        let Ok(report) = classify_eigenvalues(&m, 1e-8) else {
            continue;
        };
        let mut found = BTreeMap::new();
        for (kind, name) in [
            (GroupKind::PositiveHyperbolicPair, "positive"),
            (GroupKind::NegativeHyperbolicPair, "negative"),
            (GroupKind::EllipticPair, "elliptic"),
            (GroupKind::Quadruple, "quadruple"),
        ] {
            let c = report.count(kind);
            if c > 0 {
                found.insert(name, c);
            }
        }
        assert_eq!(found, expected, "{m}");
        checked += 1;
    }
    assert!(checked > 200);
}

#[test]
fn sp2_classification_by_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let m = random_symplectic(&mut rng, 1, 1.0);
        let tr = m.trace();
        if (tr.abs() - 2.0).abs() < 1e-3 {
            continue;
        }
        let report = classify_eigenvalues(&m, 1e-8).unwrap();
        let kind = if tr > 2.0 {
            GroupKind::PositiveHyperbolicPair
        } else if tr < -2.0 {
            GroupKind::NegativeHyperbolicPair
        } else {
            GroupKind::EllipticPair
        };
        assert_eq!(report.count(kind), 1, "trace {tr}");
    }
}

#[test]
fn constant_loop_operator_spectrum_is_shifted_lattice() {
    let theta = 0.7;
    let cutoff = 5;
    let m = loop_operator_matrix(1, &|_| Mat::identity(2, 2) * theta, cutoff);
    let mut eig: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    let mut expected: Vec<f64> = (-(cutoff as i64)..=cutoff as i64)
        .flat_map(|k| [2.0 * PI * k as f64 - theta; 2])
        .collect();
    expected.sort_by(f64::total_cmp);
    assert_eq!(eig.len(), expected.len());
    for (a, b) in eig.iter().zip(&expected) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}
