use std::path::{Path, PathBuf};
use std::process::Command;

use singmech::bracket::Analysis;
use singmech::fixtures;
use singmech::symbolic::{parse, Expr, Symbol, SymbolKind};
use singmech_cli::report::AnalysisReport;
use singmech_cli::{load_model, CliError};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn singmech(args: &[&str]) -> Run {
    singmech_env(args, None)
}

fn singmech_env(args: &[&str], seed: Option<&str>) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_singmech"));
    cmd.args(args).env_remove("SINGMECH_SEED");
    if let Some(s) = seed {
        cmd.env("SINGMECH_SEED", s);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("{e}: {text}"))
}

fn last_row(csv: &str) -> Vec<f64> {
    csv.lines().last().unwrap().split(',').map(|c| c.parse().unwrap()).collect()
}

#[test]
fn bundled_files_match_builtin_fixtures() {
    for name in fixtures::MODEL_NAMES {
        let (model, _) = load_model(&fixture(&format!("{}.toml", name.to_lowercase()))).unwrap();
        let builtin = fixtures::model(name);
        assert_eq!(model.name(), name);
        assert_eq!(model.coordinates(), builtin.coordinates());
        assert_eq!(model.lagrangian(), builtin.lagrangian());
    }
}

#[test]
fn load_model_rejects_bad_files() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    };
    let dup = write("dup.toml", "name = \"d\"\ncoordinates = [\"q1\", \"q1\"]\nlagrangian = \"q1_dot^2/2\"\n");
    let err = load_model(&dup).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().contains("duplicate"), "{err}");
    let undeclared = write("u.toml", "name = \"u\"\ncoordinates = [\"q1\", \"q2\"]\nlagrangian = \"q1_dot*q3_dot\"\n");
    let err = load_model(&undeclared).unwrap_err();
    assert!(err.to_string().contains("q3_dot"), "{err}");
    let broken = write("b.toml", "name = \"b\"\ncoordinates = [\"q1\"\n");
    assert!(matches!(load_model(&broken), Err(CliError::Input(_))));
    let syntax = write("s.toml", "name = \"s\"\ncoordinates = [\"q1\"]\nlagrangian = \"q1_dot^2 +\"\n");
    assert_eq!(load_model(&syntax).unwrap_err().exit_code(), 3);
    assert_eq!(singmech(&["analyze", path_str(&dup)]).code, 3);
    assert_eq!(singmech(&["analyze", "/nonexistent/model.toml"]).code, 3);
}

#[test]
fn parameters_are_substituted() {
    let (model, _) = load_model(&fixture("oscillator.toml")).unwrap();
    assert_eq!(model.n(), 2);
    assert!(!model.lagrangian().contains_kind(SymbolKind::Parameter), "{}", model.lagrangian());
    // m = 2, k = 1/2: L = x_dot^2 + y_dot^2 - x^2/4 - y^2
    let expected = model.parse("x_dot^2 + y_dot^2 - x^2/4 - y^2").unwrap();
    assert_eq!(model.lagrangian().clone() - expected, Expr::zero());
    let run = singmech(&["analyze", path_str(&fixture("oscillator.toml"))]);
    assert_eq!(run.code, 0);
    assert_eq!(json(&run.stdout)["classification"]["verdict"], "regular");
}

#[test]
fn analyze_reports() {
    let s1 = singmech(&["analyze", path_str(&fixture("s1.toml"))]);
    assert_eq!(s1.code, 0);
    let v = json(&s1.stdout);
    assert_eq!(v["hessian"]["rank"], 0);
    assert_eq!(v["classification"]["verdict"], "nongauge");
    assert_eq!(v["f"], serde_json::json!([["0", "-1"], ["1", "0"]]));

    let r = json(&singmech(&["analyze", path_str(&fixture("r.toml"))]).stdout);
    assert_eq!(r["classification"]["verdict"], "regular");
    assert_eq!(r["f"], serde_json::json!([]));

    let g2 = singmech(&["analyze", path_str(&fixture("g2.toml"))]);
    assert_eq!(g2.code, 1);
    let v = json(&g2.stdout);
    assert_eq!(v["classification"]["verdict"], "inconsistent");
    assert_eq!(v["classification"]["inconsistency"]["residual"], "p_q1");
}

#[test]
fn non_constant_rank_is_a_structured_rejection() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("drop.toml");
    std::fs::write(&p, "name = \"drop\"\ncoordinates = [\"q1\", \"q2\"]\nlagrangian = \"q1_dot^2/2 + exp(-50*q1^2)*q2_dot^2/2\"\n").unwrap();
    let run = singmech(&["analyze", path_str(&p)]);
    assert_eq!(run.code, 1);
    let v = json(&run.stdout);
    assert_eq!(v["status"], "rejected");
    assert_eq!(v["error"], "non-constant-rank");
}

#[test]
fn report_round_trips_and_expressions_reparse() {
    for name in fixtures::MODEL_NAMES {
        let (model, file) = load_model(&fixture(&format!("{}.toml", name.to_lowercase()))).unwrap();
        let analysis = Analysis::run(&model, &file.config(Some(42)).unwrap()).unwrap();
        let report = AnalysisReport::build(&analysis);
        let text = serde_json::to_string(&report).unwrap();
        let back: AnalysisReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report, "{name}");
        let mut table = model.symbols();
        for q in model.coordinates() {
            table.insert(Symbol::parameter(&format!("u_{}", q.name()))).unwrap();
        }
        for e in report.expressions() {
            let parsed = parse(e, &table).unwrap_or_else(|err| panic!("{name}: `{e}`: {err}"));
            assert_eq!(parsed.simplify().to_string(), e, "{name}");
        }
    }
}

#[test]
fn simulate_first_order_oscillator_returns_home() {
    let run = singmech(&["simulate", path_str(&fixture("s1.toml")), "--init", "q1=1,q2=0", "--t1", "6.283185307", "--dt", "1e-3"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert_eq!(run.stdout.lines().next().unwrap(), "t,q1,q2");
    let row = last_row(&run.stdout);
    // closed form q1 = cos t, q2 = -sin t
    let t = row[0];
    assert!((row[1] - t.cos()).abs() < 1e-9 && (row[2] + t.sin()).abs() < 1e-9);
    assert!((row[1] - 1.0).abs() < 1e-6 && row[2].abs() < 1e-6);
    let diag = json(&run.stderr);
    assert!(diag["h0_drift_max"].as_f64().unwrap() < 1e-10);
}

#[test]
fn simulate_free_particle() {
    let run = singmech(&["simulate", path_str(&fixture("g1.toml")), "--init", "q1=0,q1_dot=1,q2=0", "--t1", "3"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert_eq!(run.stdout.lines().next().unwrap(), "t,q1,q2,p_q1");
    let row = last_row(&run.stdout);
    assert!((row[1] - 3.0).abs() < 1e-10);
    assert!(run.stdout.lines().nth(1).unwrap().split(',').all(|c| c.contains('e')));
}

#[test]
fn simulate_with_momenta_observables_and_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let run = singmech(&[
        "simulate",
        path_str(&fixture("r.toml")),
        "--init",
        "q1=1,q2=0",
        "--init",
        "p_q1=0,p_q2=1",
        "--observable",
        "E=(p_q1^2 + p_q2^2 + q1^2 + q2^2)/2",
        "--observable",
        "q1*p_q2",
        "--t1",
        "1",
        "--dt",
        "0.01",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.stdout.is_empty());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,q1,q2,p_q1,p_q2,obs:E,obs:q1*p_q2");
    let row = last_row(&csv);
    assert!((row[5] - 1.0).abs() < 1e-9);
    assert!((row[2] - 1f64.sin()).abs() < 1e-9);
    let diag = json(&run.stderr);
    assert!(diag["observable_residual_max"]["E"].as_f64().unwrap() < 1e-6);
}

#[test]
fn simulate_input_errors() {
    let s1 = fixture("s1.toml");
    let missing = singmech(&["simulate", path_str(&s1), "--init", "q1=1"]);
    assert_eq!(missing.code, 3);
    assert!(missing.stderr.contains("missing initial values: q2"), "{}", missing.stderr);
    let r = fixture("r.toml");
    let run = singmech(&["simulate", path_str(&r), "--init", "q1=1,q2=0"]);
    assert!(run.stderr.contains("q1_dot (or p_q1)"), "{}", run.stderr);
    assert_eq!(singmech(&["simulate", path_str(&s1), "--init", "q1=1,q2=0,q9=1"]).code, 3);
    assert_eq!(singmech(&["simulate", path_str(&s1), "--init", "q1=1,q2=0", "--method", "leapfrog"]).code, 3);
    assert_eq!(singmech(&["simulate", path_str(&fixture("g2.toml")), "--init", "q1=0,q2=0,q1_dot=0"]).code, 1);
}

#[test]
fn output_is_deterministic() {
    let s1 = fixture("s1.toml");
    let args = ["simulate", path_str(&s1), "--init", "q1=0.3,q2=-0.2", "--t1", "2", "--dt", "0.01"];
    let (a, b) = (singmech(&args), singmech(&args));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stderr, b.stderr);
    let v = |seed| singmech_env(&["verify", path_str(&fixture("s2.toml"))], seed).stdout;
    assert_eq!(v(None), v(None));
}

#[test]
fn seed_precedence() {
    let s2 = fixture("s2.toml");
    let seed = |run: Run| json(&run.stdout)["seed"].as_u64().unwrap();
    assert_eq!(seed(singmech(&["analyze", path_str(&s2)])), 42);
    assert_eq!(seed(singmech_env(&["analyze", path_str(&s2)], Some("7"))), 7);
    assert_eq!(seed(singmech_env(&["analyze", path_str(&s2), "--seed", "9"], Some("7"))), 9);
    // the file pins its own seed
    assert_eq!(seed(singmech_env(&["analyze", path_str(&fixture("s1.toml"))], Some("7"))), 42);
    assert_eq!(singmech_env(&["analyze", path_str(&s2)], Some("abc")).code, 3);
}

#[test]
fn verify_passes_on_consistent_fixtures() {
    for name in ["r", "s1", "s2", "g1"] {
        let run = singmech(&["verify", path_str(&fixture(&format!("{name}.toml")))]);
        assert_eq!(run.code, 0, "{name}: {}", run.stdout);
        let v = json(&run.stdout);
        assert_eq!(v["passed"], true);
        if name == "g1" {
            let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
            assert!(names.contains(&"gauge-bracket-is-poisson"));
        }
    }
    let run = singmech(&["verify", path_str(&fixture("g2.toml")), "--samples", "50", "--tol", "1e-9"]);
    assert_eq!(run.code, 2);
    let v = json(&run.stdout);
    let failed: Vec<&serde_json::Value> = v["checks"].as_array().unwrap().iter().filter(|c| c["passed"] == false).collect();
    assert!(failed.iter().any(|c| c["witness"].is_object()));
}

#[test]
fn multitime_paths() {
    let paths = [fixture("path_t_first.txt"), fixture("path_tau_first.txt")];
    let run = |file: &str, init: &str| {
        let file = fixture(file);
        singmech(&["multitime", path_str(&file), "--path", path_str(&paths[0]), "--path", path_str(&paths[1]), "--init", init])
    };
    let good = run("commuting.toml", "q=0.3,p_q=1");
    assert_eq!(good.code, 0, "{}", good.stderr);
    let v = json(&good.stdout);
    assert_eq!(v["verdict"], "integrable");
    assert!(v["max_difference"].as_f64().unwrap() < 1e-8);
    // q = q0 + p t + tau1
    assert!((v["paths"][0]["endpoint"][0].as_f64().unwrap() - 2.3).abs() < 1e-10);

    let bad = json(&run("noncommuting.toml", "p_q=1").stdout);
    assert_eq!(bad["verdict"], "nonintegrable");
    assert!(bad["max_difference"].as_f64().unwrap() > 1e-3);

    let model = json(&singmech(&["multitime", path_str(&fixture("g1.toml"))]).stdout);
    assert_eq!(model["times"], serde_json::json!(["t", "q2"]));
    assert_eq!(model["counting_rules"]["times_momenta"], true);
}

#[test]
fn multitime_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let single = dir.path().join("single.txt");
    std::fs::write(&single, "0, 0\n").unwrap();
    let file = fixture("commuting.toml");
    assert_eq!(singmech(&["multitime", path_str(&file), "--path", path_str(&single)]).code, 3);
    let wrong = dir.path().join("wrong.txt");
    std::fs::write(&wrong, "0\n1\n").unwrap();
    let run = singmech(&["multitime", path_str(&file), "--path", path_str(&wrong)]);
    assert_eq!(run.code, 3);
    assert!(run.stderr.contains("components"), "{}", run.stderr);
}

#[test]
fn compare_against_reference() {
    for (name, init) in [("s1", "q1=1,q2=0"), ("s2", "q1=0.4,q2=0.1,q3=2"), ("g1", "q1=0,q2=1,q1_dot=0.5"), ("r", "q1=1,q2=0,q1_dot=0,q2_dot=1")] {
        let run = singmech(&["compare", path_str(&fixture(&format!("{name}.toml"))), "--init", init, "--t1", "6.283185307"]);
        assert_eq!(run.code, 0, "{name}: {}{}", run.stdout, run.stderr);
        assert!(json(&run.stdout)["max_difference"].as_f64().unwrap() < 1e-6);
    }
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("other.toml");
    std::fs::write(&p, "name = \"other\"\ncoordinates = [\"x\", \"y\"]\nlagrangian = \"x_dot*y - x^2/2 - y^2\"\n").unwrap();
    assert_eq!(singmech(&["compare", path_str(&p), "--init", "x=1,y=0"]).code, 1);
}

#[test]
fn bad_flags_exit_3() {
    assert_eq!(singmech(&["analyze"]).code, 3);
    assert_eq!(singmech(&["frobnicate"]).code, 3);
    assert_eq!(singmech(&["--help"]).code, 0);
}
