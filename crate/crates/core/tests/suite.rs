use symidx::batch::Exec;
use symidx::index::{self, IndexOptions, IndexValue};
use symidx::path::SymplecticPath;
use symidx::suite::{run_axiom, run_axiom_suite, AxiomConfig, AXIOMS};
use symidx::Result;

/// An index implementation that is off by one.
fn shifted_cz(p: &SymplecticPath, o: &IndexOptions) -> Result<IndexValue> {
    index::cz_rs(p, o).map(|v| IndexValue::standard_doubled(v.doubled + 2))
}

#[test]
fn corrupted_index_fails_the_determinant_axiom_with_a_dump() {
    let mut cfg = AxiomConfig::new(1, 5);
    cfg.cz = shifted_cz;
    let out = run_axiom(&cfg, "determinant");
    assert_eq!(out.failures, 5);
    let dump = out.counterexamples[0].path.as_ref().expect("failing path is dumped");
    let path = dump.to_path().unwrap();
    assert!(path.starts_at_identity(1e-9));
    assert!(out.counterexamples[0].message.contains("sign det"));
}

#[test]
fn zero_trials_pass_vacuously() {
    let r = run_axiom_suite(&AxiomConfig::new(1, 0));
    assert!(r.all_pass());
    assert!(r.axioms.iter().all(|a| a.trials == 0));
}

#[test]
fn execution_modes_give_identical_reports() {
    let mut seq = AxiomConfig::new(4, 3);
    seq.exec = Exec::Sequential;
    let mut par = AxiomConfig::new(4, 3);
    par.exec = Exec::Parallel;
    let a = serde_json::to_string(&run_axiom_suite(&seq)).unwrap();
    let b = serde_json::to_string(&run_axiom_suite(&par)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn suite_lists_every_axiom_once() {
    let r = run_axiom_suite(&AxiomConfig::new(2, 1));
    let names: Vec<&str> = r.axioms.iter().map(|a| a.axiom).collect();
    assert_eq!(names, AXIOMS);
}
