use std::f64::consts::PI;
use std::path::Path;

use serde_json::{json, Value};
use symidx::batch::Exec;
use symidx::chain::{self, degree_label, Betti};
use symidx::chern;
use symidx::hamdyn::{
    self, AnnulusGrid, Hamiltonian, HamiltonianSystem, Integrator, JConvention, PeriodClass, PhaseSpace,
    ShootingOptions, Vector,
};
use symidx::index::{self, IndexOptions, IndexValue};
use symidx::io::{matrix_rows, ClutchingDoc, ComplexDoc, MorseBottDoc, PathDoc, SystemDoc};
use symidx::suite::{run_axiom_suite, AxiomConfig};
use symidx::SymError;

use crate::report::{Config, InputDigest};
use crate::{
    AxiomsArgs, ChainCmd, Command, DemoCmd, DynCmd, ExecArg, Failure, IndexCmd, IntegrateArgs, Method,
    PendulumArgs, TwistArgs, UnitSphereArgs,
};

#[derive(Debug, Default)]
pub struct Outcome {
    pub inputs: Vec<InputDigest>,
    pub result: Option<Value>,
    pub diagnostics: Vec<String>,
    pub failure: Option<Failure>,
}

type Res = Result<Value, Failure>;

pub fn name(cmd: &Command) -> String {
    let s = match cmd {
        Command::Index(c) => match c {
            IndexCmd::Maslov(_) => "index maslov",
            IndexCmd::Cz(_) => "index cz",
            IndexCmd::Rs(_) => "index rs",
            IndexCmd::Winding(_) => "index winding",
            IndexCmd::Sf(_) => "index sf",
            IndexCmd::LoopSf(_) => "index loop-sf",
        },
        Command::Chern(_) => "chern",
        Command::Dyn(c) => match c {
            DynCmd::Integrate(_) => "dyn integrate",
            DynCmd::Orbit(_) => "dyn orbit",
            DynCmd::Monodromy(_) => "dyn monodromy",
            DynCmd::Twist(_) => "dyn twist",
        },
        Command::Chain(c) => match c {
            ChainCmd::Homology(_) => "chain homology",
            ChainCmd::Cascade(_) => "chain cascade",
        },
        Command::Demo(c) => match c {
            DemoCmd::Pendulum(_) => "demo pendulum",
            DemoCmd::UnitSphere(_) => "demo unit-sphere",
        },
        Command::Axioms(_) => "axioms",
    };
    s.to_string()
}

pub fn run(cmd: &Command, cfg: &Config) -> Outcome {
    let mut out = Outcome::default();
    let res = dispatch(cmd, cfg, &mut out);
    match res {
        Ok(v) => out.result = Some(v),
        Err(f) => out.failure = Some(f),
    }
    out
}

fn dispatch(cmd: &Command, cfg: &Config, out: &mut Outcome) -> Res {
    let opts = IndexOptions {
        tol: cfg.tol,
        seed: cfg.seed,
    };
    match cmd {
        Command::Index(c) => index_cmd(c, cfg, &opts, out),
        Command::Chern(a) => {
            let doc = ClutchingDoc::parse(&read_input(out, &a.input)?)?;
            let data = doc.to_data()?;
            let c1 = chern::c1_from_clutching(&data, &opts)?;
            Ok(json!({ "rank": data.rank(), "genus": data.genus(), "c1": c1 }))
        }
        Command::Dyn(c) => dyn_cmd(c, cfg, &opts, out),
        Command::Chain(c) => chain_cmd(c, out),
        Command::Demo(DemoCmd::Pendulum(a)) => demo_pendulum(a, cfg, &opts, out),
        Command::Demo(DemoCmd::UnitSphere(a)) => demo_unit_sphere(a),
        Command::Axioms(a) => axioms(a, cfg, &opts, out),
    }
}

fn read_input(out: &mut Outcome, path: &Path) -> Result<String, Failure> {
    let bytes = std::fs::read(path)
        .map_err(|e| Failure::usage("io", format!("cannot read {}: {e}", path.display())))?;
    out.inputs.push(InputDigest::new(&path.display().to_string(), &bytes));
    String::from_utf8(bytes).map_err(|_| Failure::from(SymError::Parse("input is not UTF-8".into())))
}

fn index_value(v: IndexValue) -> Value {
    json!({
        "doubled_index": v.doubled,
        "index": v.value(),
        "canonical_doubled_index": v.canonical().doubled,
    })
}

fn merge(mut a: Value, b: Value) -> Value {
    if let (Value::Object(x), Value::Object(y)) = (&mut a, b) {
        x.extend(y);
    }
    a
}

fn index_cmd(c: &IndexCmd, cfg: &Config, opts: &IndexOptions, out: &mut Outcome) -> Res {
    let input = match c {
        IndexCmd::Maslov(a)
        | IndexCmd::Cz(a)
        | IndexCmd::Rs(a)
        | IndexCmd::Winding(a)
        | IndexCmd::Sf(a)
        | IndexCmd::LoopSf(a) => &a.input,
    };
    let doc = PathDoc::parse(&read_input(out, input)?)?;
    match c {
        IndexCmd::Maslov(_) => Ok(index_value(index::maslov_loop(&doc.to_path()?, opts)?)),
        IndexCmd::Cz(_) => {
            let r = index::cz_rs_detailed(&doc.to_path()?, opts)?;
            if let Some(d) = r.perturbation {
                out.diagnostics.push(format!("irregular crossing resolved by perturbation {d:e}"));
            }
            Ok(merge(
                index_value(r.value),
                json!({ "crossings": r.crossings.crossings, "perturbation": r.perturbation }),
            ))
        }
        IndexCmd::Rs(_) => {
            let r = index::rs_index_detailed(&doc.to_path()?, opts)?;
            if let Some(d) = r.perturbation {
                out.diagnostics.push(format!("irregular crossing resolved by perturbation {d:e}"));
            }
            Ok(merge(
                index_value(r.value),
                json!({ "crossings": r.crossings.crossings, "perturbation": r.perturbation }),
            ))
        }
        IndexCmd::Winding(_) => {
            let (v, interval) = index::cz_winding(&doc.to_path()?, opts)?;
            Ok(merge(
                index_value(v),
                json!({ "interval": interval, "interval_length": interval.length() }),
            ))
        }
        IndexCmd::Sf(_) => {
            let sf = index::spectral_flow_matrix(&doc.to_family()?, opts)?;
            Ok(json!({ "spectral_flow": sf }))
        }
        IndexCmd::LoopSf(_) => {
            let sf = index::loop_operator_spectral_flow(&doc.to_homotopy()?, cfg.fourier_cutoff, opts)?;
            Ok(json!({
                "spectral_flow": sf.value,
                "by_cutoff": sf.by_cutoff.iter().map(|(c, v)| json!({ "cutoff": c, "raw": v })).collect::<Vec<_>>(),
            }))
        }
    }
}

fn method(m: Method) -> Integrator {
    match m {
        Method::Midpoint => Integrator::ImplicitMidpoint,
        Method::Gauss4 => Integrator::Gauss4,
    }
}

fn state(sys: &HamiltonianSystem, z: &[f64]) -> Result<Vector, Failure> {
    if z.len() != sys.dim() {
        return Err(SymError::DimensionMismatch {
            expected: sys.dim(),
            found: z.len(),
        }
        .into());
    }
    Ok(Vector::from_column_slice(z))
}

fn step_size(dt: f64, span: f64, steps: Option<usize>) -> Result<f64, Failure> {
    let dt = match steps {
        Some(0) => return Err(Failure::usage("usage", "--steps must be positive")),
        Some(k) => span / k as f64,
        None => dt,
    };
    if !(dt.is_finite() && dt > 0.0) {
        return Err(SymError::Parameter("step size must be positive".into()).into());
    }
    Ok(dt)
}

fn period_json(p: PeriodClass) -> Value {
    serde_json::to_value(p).unwrap_or(Value::Null)
}

fn orbit_json(orbit: &hamdyn::PeriodicOrbit) -> Value {
    json!({
        "z0": orbit.z0.as_slice(),
        "period": orbit.period,
        "residual": orbit.residual,
        "samples": orbit.trajectory.times.len(),
    })
}

fn dyn_cmd(c: &DynCmd, cfg: &Config, opts: &IndexOptions, out: &mut Outcome) -> Res {
    match c {
        DynCmd::Integrate(a) => integrate_cmd(a, cfg, out),
        DynCmd::Orbit(a) | DynCmd::Monodromy(a) => {
            let sys = SystemDoc::parse(&read_input(out, &a.input)?)?.to_system()?;
            let z = state(&sys, &a.z0)?;
            let shooting = ShootingOptions {
                dt: step_size(a.dt, a.period_guess, cfg.steps)?,
                method: method(a.method),
                ..ShootingOptions::default()
            };
            let orbit = hamdyn::find_periodic_orbit(&sys, &z, a.period_guess, &shooting)?;
            if matches!(c, DynCmd::Orbit(_)) {
                return Ok(orbit_json(&orbit));
            }
            let (path, rep) = hamdyn::monodromy_and_cz(&sys, &orbit, opts)?;
            if !rep.nondegenerate {
                out.diagnostics
                    .push("1 is an eigenvalue of the monodromy; no Conley-Zehnder index".into());
            }
            Ok(json!({
                "orbit": orbit_json(&orbit),
                "monodromy_end": matrix_rows(path.end()),
                "symplectic_residual": path.symplectic_residual(),
                "endpoint_sigma": rep.endpoint_sigma,
                "nondegenerate": rep.nondegenerate,
                "cz": rep.cz.map(index_value),
            }))
        }
        DynCmd::Twist(a) => Ok(twist(a)),
    }
}

fn integrate_cmd(a: &IntegrateArgs, cfg: &Config, out: &mut Outcome) -> Res {
    let sys = SystemDoc::parse(&read_input(out, &a.input)?)?.to_system()?;
    let z = state(&sys, &a.z0)?;
    if !(a.t_end.is_finite() && a.t_end > 0.0) {
        return Err(SymError::Parameter("--t-end must be positive".into()).into());
    }
    let dt = step_size(a.dt, a.t_end, cfg.steps)?;
    let tr = hamdyn::integrate_with(&sys, &z, a.t_end, dt, method(a.method))?;
    let period = hamdyn::prime_period(sys.phase_space(), &tr.times, &tr.states, 1e-3);
    let mut v = json!({
        "dt": dt,
        "steps": tr.times.len() - 1,
        "energy": sys.energy(&z),
        "max_energy_drift": tr.max_energy_drift(&sys),
        "end": tr.end().as_slice(),
        "period": period_json(period),
    });
    if let Some(k) = a.dump_every {
        if k == 0 {
            return Err(Failure::usage("usage", "--dump-every must be positive"));
        }
        let samples: Vec<Value> = tr
            .times
            .iter()
            .zip(&tr.states)
            .step_by(k)
            .map(|(t, s)| json!({ "t": t, "z": s.as_slice() }))
            .collect();
        v = merge(v, json!({ "trajectory": samples }));
    }
    Ok(v)
}

/// The perturbed twist map used by `dyn twist`.
pub fn twist_map(epsilon: f64) -> impl Fn(f64, f64) -> (f64, f64) {
    move |th, r| (th + r, r + epsilon * (2.0 * PI * (th + r)).sin())
}

fn twist(a: &TwistArgs) -> Value {
    let grid = AnnulusGrid {
        period: 2.0 * PI,
        r_min: -PI,
        r_max: PI,
        n_theta: a.n_theta,
        n_r: a.n_r,
    };
    let rep = hamdyn::twist_fixed_points(&twist_map(a.epsilon), &grid);
    json!({
        "epsilon": a.epsilon,
        "grid": grid,
        "fixed_point_count": rep.fixed_points.len(),
        "report": rep,
    })
}

fn betti_json(b: &Betti) -> Value {
    Value::Array(
        b.entries()
            .into_iter()
            .map(|e| json!({ "degree": degree_label(e.doubled_degree), "doubled_degree": e.doubled_degree, "rank": e.rank }))
            .collect(),
    )
}

fn chain_cmd(c: &ChainCmd, out: &mut Outcome) -> Res {
    match c {
        ChainCmd::Homology(a) => {
            let complex = ComplexDoc::parse(&read_input(out, &a.input)?)?.to_complex()?;
            Ok(json!({
                "generators": complex.len(),
                "chain_groups": betti_json(&complex.chain_groups()),
                "betti": betti_json(&complex.homology()),
                "cohomology": betti_json(&complex.cohomology()),
            }))
        }
        ChainCmd::Cascade(a) => {
            let data = MorseBottDoc::parse(&read_input(out, &a.input)?)?.to_data();
            let cc = chain::cascade_complex(&data)?;
            let gens: Vec<Value> = cc
                .complex
                .generators()
                .iter()
                .map(|g| json!({ "id": g.id, "grading": degree_label(g.doubled_degree), "doubled_grading": g.doubled_degree, "action": g.action }))
                .collect();
            Ok(json!({
                "generators": gens,
                "lacunary": cc.lacunary,
                "strict_lacunary": cc.strict_lacunary,
                "betti": betti_json(&cc.complex.homology()),
            }))
        }
    }
}

fn demo_pendulum(a: &PendulumArgs, cfg: &Config, opts: &IndexOptions, out: &mut Outcome) -> Res {
    let sys = HamiltonianSystem::new(
        PhaseSpace::Cylinder,
        Hamiltonian::Pendulum { epsilon: a.epsilon },
        JConvention::Canonical,
    )?;
    // q = 0 is a saddle and q = 1/2 the minimum when epsilon > 0.
    let mut equilibria = Vec::new();
    for (q, morse) in [(0.0, 1i64), (0.5, 0)] {
        let orbit = hamdyn::find_periodic_orbit(&sys, &Vector::from_column_slice(&[q, 0.0]), 1.0, &ShootingOptions::default())?;
        let (_, rep) = hamdyn::monodromy_and_cz(&sys, &orbit, opts)?;
        let cz = rep.cz_canonical.map(|v| v.doubled);
        let expected = 2 * (1 - morse);
        equilibria.push(json!({
            "q": q,
            "morse_index": morse,
            "cz_canonical_doubled": cz,
            "expected_doubled": expected,
            "pass": cz == Some(expected),
        }));
    }
    if !(a.t_end.is_finite() && a.t_end > 0.0) {
        return Err(SymError::Parameter("--t-end must be positive".into()).into());
    }
    let dt = step_size(a.dt, a.t_end, cfg.steps)?;
    let z0 = Vector::from_column_slice(&[0.2, 0.3]);
    let tr = hamdyn::integrate_with(&sys, &z0, a.t_end, dt, Integrator::Gauss4)?;
    let drift = tr.max_energy_drift(&sys);
    let linear = 1.0 / a.epsilon.abs().sqrt();
    let libration = match hamdyn::find_periodic_orbit(
        &sys,
        &Vector::from_column_slice(&[0.51, 0.0]),
        linear,
        &ShootingOptions::default(),
    ) {
        Ok(o) => json!({ "period": o.period, "linearized_period": linear, "residual": o.residual }),
        Err(e) => {
            out.diagnostics.push(format!("libration orbit: {e}"));
            Value::Null
        }
    };
    Ok(json!({
        "epsilon": a.epsilon,
        "equilibria": equilibria,
        "energy": { "z0": z0.as_slice(), "t_end": a.t_end, "dt": dt, "method": "gauss4", "max_drift": drift },
        "libration": libration,
    }))
}

fn demo_unit_sphere(a: &UnitSphereArgs) -> Res {
    let rep = chain::rfh_unit_sphere(a.n, a.window)?;
    let support: Vec<String> = rep.betti.support().into_iter().map(degree_label).collect();
    Ok(json!({
        "support": support,
        "report": rep,
    }))
}

fn axioms(a: &AxiomsArgs, cfg: &Config, opts: &IndexOptions, out: &mut Outcome) -> Res {
    let mut ac = AxiomConfig::new(cfg.seed, a.count);
    ac.opts = *opts;
    ac.exec = match a.exec {
        ExecArg::Sequential => Exec::Sequential,
        ExecArg::Parallel => Exec::Parallel,
    };
    let rep = run_axiom_suite(&ac);
    for o in &rep.axioms {
        out.diagnostics.push(format!(
            "{} {} ({} trials, {} failures)",
            if o.pass() { "PASS" } else { "FAIL" },
            o.axiom,
            o.trials,
            o.failures
        ));
    }
    let v = serde_json::to_value(&rep).unwrap_or(Value::Null);
    if rep.all_pass() {
        Ok(v)
    } else {
        // The report is still written so that counterexamples are visible.
        out.result = Some(v);
        Err(Failure {
            code: 1,
            error: crate::report::ErrorObject {
                name: "axiom-failure".into(),
                message: "at least one axiom failed".into(),
            },
        })
    }
}
