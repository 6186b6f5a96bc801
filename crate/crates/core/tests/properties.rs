use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use symidx::chain::gf2::{BitVec, GfMatrix};
use symidx::chain::{BoundaryEntry, ChainComplex, Generator};
use symidx::hamdyn::{
    ham_vector_field, integrate_variational, Hamiltonian, HamiltonianSystem, Integrator, JConvention, Monomial,
    PhaseSpace, Vector,
};
use symidx::index::{self, IndexOptions, IndexValue};
use symidx::io::PathDoc;
use symidx::suite::{exp_path, random_small_nondegenerate, run_axiom_suite, AxiomConfig};
use symidx::{linalg, SymplecticPath};

fn matrix_from_bits(rows: usize, cols: usize, bits: &[bool]) -> GfMatrix {
    let mut m = GfMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m.set(i, j, bits[i * cols + j]);
        }
    }
    m
}

/// Three-term complex `C2 -> C1 -> C0` with `d2` built from the kernel of
/// `d1`, returned as generators and boundary pairs. Each pair is repeated
/// `1 + 2 r` times so that cancellation mod 2 is exercised.
fn three_term(dims: [usize; 3], d1_bits: &[bool], mix: &[bool], repeats: &[u8]) -> (Vec<Generator>, Vec<BoundaryEntry>, GfMatrix, GfMatrix) {
    let d1 = matrix_from_bits(dims[0], dims[1], d1_bits);
    let kernel = d1.kernel();
    let mut d2 = GfMatrix::zeros(dims[1], dims[2]);
    for j in 0..dims[2] {
        let mut col = BitVec::zeros(dims[1]);
        for (k, v) in kernel.iter().enumerate() {
            if mix[(j * 7 + k) % mix.len()] {
                col.xor_assign(v);
            }
        }
        for i in col.ones() {
            d2.set(i, j, true);
        }
    }
    let name = |deg: usize, i: usize| format!("c{deg}_{i}");
    let mut gens = Vec::new();
    for (deg, &d) in dims.iter().enumerate() {
        for i in 0..d {
            gens.push(Generator {
                id: name(deg, i),
                doubled_degree: 2 * deg as i64,
                action: None,
            });
        }
    }
    let mut entries = Vec::new();
    let mut r = 0;
    for (deg, m) in [(1usize, &d1), (2, &d2)] {
        for j in 0..m.ncols() {
            for i in m.column(j).ones() {
                let times = 1 + 2 * (repeats[r % repeats.len()] % 2) as usize;
                r += 1;
                for _ in 0..times {
                    entries.push(BoundaryEntry {
                        from: name(deg, j),
                        to: name(deg - 1, i),
                    });
                }
            }
        }
    }
    (gens, entries, d1, d2)
}

fn complex_inputs() -> impl Strategy<Value = ([usize; 3], Vec<bool>, Vec<bool>, Vec<u8>)> {
    (1usize..6, 1usize..7, 0usize..5).prop_flat_map(|(a, b, c)| {
        (
            Just([a, b, c]),
            proptest::collection::vec(any::<bool>(), a * b),
            proptest::collection::vec(any::<bool>(), 1..40),
            proptest::collection::vec(any::<u8>(), 1..20),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_built_complexes_are_accepted(
        (dims, d1_bits, mix, repeats) in complex_inputs()
    ) {
        let (gens, entries, d1, d2) = three_term(dims, &d1_bits, &mix, &repeats);
        prop_assert!(d1.mul(&d2).is_zero());
        let c = ChainComplex::build(gens, &entries).unwrap();
        let h = c.homology();
        prop_assert_eq!(&h, &c.cohomology());
        let (r1, r2) = (d1.rank(), d2.rank());
        prop_assert_eq!(h.get(0), dims[0] - r1);
        prop_assert_eq!(h.get(2), dims[1] - r1 - r2);
        prop_assert_eq!(h.get(4), dims[2] - r2);
        let euler_chain = dims[0] as i64 - dims[1] as i64 + dims[2] as i64;
        let euler_h = h.get(0) as i64 - h.get(2) as i64 + h.get(4) as i64;
        prop_assert_eq!(euler_chain, euler_h);
    }

    #[test]
    fn nonzero_square_is_rejected(
        a in 1usize..4, b in 1usize..4, c in 1usize..4,
        bits in proptest::collection::vec(any::<bool>(), 32)
    ) {
        let d1 = matrix_from_bits(a, b, &bits[..a * b]);
        let d2 = matrix_from_bits(b, c, &bits[16..16 + b * c]);
        let name = |deg: usize, i: usize| format!("c{deg}_{i}");
        let mut gens = Vec::new();
        for (deg, d) in [a, b, c].into_iter().enumerate() {
            for i in 0..d {
                gens.push(Generator { id: name(deg, i), doubled_degree: 2 * deg as i64, action: None });
            }
        }
        let mut entries = Vec::new();
        for (deg, m) in [(1usize, &d1), (2, &d2)] {
            for j in 0..m.ncols() {
                for i in m.column(j).ones() {
                    entries.push(BoundaryEntry { from: name(deg, j), to: name(deg - 1, i) });
                }
            }
        }
        let built = ChainComplex::build(gens, &entries);
        if d1.mul(&d2).is_zero() {
            prop_assert!(built.is_ok());
        } else {
            prop_assert_eq!(built.unwrap_err().name(), "d-squared-nonzero");
        }
    }

    #[test]
    fn rank_nullity_and_transpose(
        r in 1usize..8, c in 1usize..8,
        bits in proptest::collection::vec(any::<bool>(), 64)
    ) {
        let m = matrix_from_bits(r, c, &bits);
        prop_assert_eq!(m.rank(), m.transpose().rank());
        let kernel = m.kernel();
        prop_assert_eq!(m.rank() + kernel.len(), c);
        for v in &kernel {
            prop_assert!(m.apply(v).is_zero());
        }
    }
}

fn random_polynomial(coeffs: &[f64]) -> Hamiltonian {
    // Coercive: x^4 and y^4 dominate, so every level set is compact.
    let powers = [[2, 0], [0, 2], [1, 1], [3, 0], [1, 2], [4, 0], [2, 2], [0, 4]];
    let mut terms: Vec<Monomial> = powers
        .iter()
        .zip(coeffs)
        .map(|(p, &c)| Monomial { coefficient: c, powers: p.to_vec() })
        .collect();
    terms[0].coefficient = terms[0].coefficient.abs() + 0.5;
    terms[1].coefficient = terms[1].coefficient.abs() + 0.5;
    terms[5].coefficient = terms[5].coefficient.abs() + 0.2;
    terms[6].coefficient = terms[6].coefficient.abs();
    terms[7].coefficient = terms[7].coefficient.abs() + 0.2;
    Hamiltonian::Polynomial(terms)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn vector_field_is_tangent_to_level_sets(
        coeffs in proptest::collection::vec(-1.0f64..1.0, 8),
        x in -1.5f64..1.5, y in -1.5f64..1.5,
        canonical in any::<bool>()
    ) {
        let j = if canonical { JConvention::Canonical } else { JConvention::Standard };
        let sys = HamiltonianSystem::new(PhaseSpace::Plane, random_polynomial(&coeffs), j).unwrap();
        let z = Vector::from_column_slice(&[x, y]);
        let g = sys.gradient(&z).unwrap();
        let v = ham_vector_field(&sys, &z).unwrap();
        prop_assert!(g.dot(&v).abs() <= 1e-10 * (1.0 + g.norm() * v.norm()));
        let h = sys.hessian(&z).unwrap();
        prop_assert!(linalg::symmetric_residual(&h) <= 1e-9);
    }

    #[test]
    fn linearized_flow_is_symplectic(
        coeffs in proptest::collection::vec(-1.0f64..1.0, 8),
        x in -1.0f64..1.0, y in -1.0f64..1.0,
        gauss in any::<bool>()
    ) {
        let sys = HamiltonianSystem::new(PhaseSpace::Plane, random_polynomial(&coeffs), JConvention::Standard).unwrap();
        let method = if gauss { Integrator::Gauss4 } else { Integrator::ImplicitMidpoint };
        let z = Vector::from_column_slice(&[x, y]);
        let (tr, psis) = integrate_variational(&sys, &z, 1.0, 0.01, method).unwrap();
        prop_assert_eq!(tr.times.len(), psis.len());
        for p in &psis {
            prop_assert!(linalg::symplectic_residual(p).unwrap() < 1e-8);
        }
        prop_assert!(tr.states.iter().all(|z| z.iter().all(|v| v.is_finite())));
    }

    #[test]
    fn exponential_paths_have_half_signature(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_small_nondegenerate(&mut rng, 2 * n);
        let eig = s.clone().symmetric_eigenvalues();
        let signature = eig.iter().filter(|&&v| v > 0.0).count() as i64 - eig.iter().filter(|&&v| v < 0.0).count() as i64;
        let cz = index::cz_rs(&exp_path(&s, 200), &IndexOptions::default()).unwrap();
        prop_assert_eq!(cz.doubled, signature);
    }

    #[test]
    fn canonical_normalization_is_an_involution(d in -1000i64..1000) {
        let v = IndexValue::standard_doubled(d);
        prop_assert_eq!(v.canonical().doubled, -d);
        prop_assert_eq!(v.canonical().canonical(), v.canonical());
        prop_assert_eq!(v.value() * 2.0, d as f64);
    }

    #[test]
    fn path_documents_round_trip(theta in -10.0f64..10.0, steps in 2usize..50) {
        let p = SymplecticPath::from_fn(steps, |t| linalg::rotation(1, theta * t)).unwrap();
        let text = serde_json::to_string(&PathDoc::from_path(&p)).unwrap();
        let q = PathDoc::parse(&text).unwrap().to_path().unwrap();
        prop_assert_eq!(q.samples(), p.samples());
        prop_assert_eq!(q.times(), p.times());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn axiom_suite_passes_for_any_seed(seed in any::<u64>()) {
        let report = run_axiom_suite(&AxiomConfig::new(seed, 3));
        for a in &report.axioms {
            prop_assert!(a.pass(), "{}: {:?}", a.axiom, a.counterexamples.first().map(|c| &c.message));
        }
    }
}
