use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use singmech::bracket::{Analysis, Observable, Verdict};
use singmech::dynamics::{self, InitialData, IntegratorConfig, Method, State, Trajectory};
use singmech::lagrangian::LagrangianModel;
use singmech::multitime::{MultiTimeSystem, TimePath, DEFAULT_STEPS};
use singmech::partial::AnalysisConfig;
use singmech::symbolic::{momentum_name, velocity_name};
use singmech::verify::{self, VerifyConfig};

use crate::model_file::ModelFile;
use crate::report::{binding_map, AnalysisReport};
use crate::{resolve_seed, to_json, CliError, Output, Result};

#[derive(Debug, Serialize)]
struct Rejection<'a> {
    model: &'a str,
    status: &'static str,
    error: String,
    message: String,
}

fn error_kind(e: &singmech::Error) -> &'static str {
    use singmech::Error::*;
    match e {
        Expr(_) => "expression",
        Validation(_) => "validation",
        UnsupportedLagrangian(_) => "unsupported-lagrangian",
        NonConstantRank { .. } => "non-constant-rank",
        SingularMinor => "singular-minor",
        NondynamicalViolation { .. } => "nondynamical-violation",
        InconsistentSystem => "inconsistent",
        SecondClassRequired => "second-class-required",
        NoOracle(_) => "no-oracle",
        StepFailure { .. } => "step-failure",
        Config(_) => "config",
        CorrespondenceFailure { .. } => "correspondence-failure",
    }
}

/// Runs the pipeline; a model-level rejection becomes a JSON diagnostic on
/// stdout with exit status 1.
fn run_analysis(model: &LagrangianModel, config: &AnalysisConfig) -> Result<std::result::Result<Analysis, Output>> {
    match Analysis::run(model, config) {
        Ok(a) => Ok(Ok(a)),
        Err(e) if e.exit_code() == 1 => {
            let r = Rejection { model: model.name(), status: "rejected", error: error_kind(&e).into(), message: e.to_string() };
            Ok(Err(Output { stdout: to_json(&r), stderr: format!("error: {e}\n"), code: 1 }))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn analyze(path: &Path, seed: Option<u64>) -> Result<Output> {
    let file = ModelFile::read(path)?;
    let model = file.model()?;
    let analysis = match run_analysis(&model, &file.config(seed)?)? {
        Ok(a) => a,
        Err(out) => return Ok(out),
    };
    let report = AnalysisReport::build(&analysis);
    Ok(Output { stdout: to_json(&report), stderr: String::new(), code: analysis.verdict().exit_code() })
}

#[derive(Debug, Clone)]
pub struct SimulateArgs {
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    pub init: Vec<String>,
    pub observables: Vec<String>,
    pub method: String,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl Default for SimulateArgs {
    fn default() -> Self {
        SimulateArgs { t0: 0.0, t1: 10.0, dt: 1e-3, init: Vec::new(), observables: Vec::new(), method: "rk4".into(), out: None, seed: None }
    }
}

/// `k=v` pairs, comma separated, possibly spread over several flags.
pub fn parse_assignments(items: &[String]) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for part in items.iter().flat_map(|s| s.split(',')).map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| CliError::Input(format!("expected name=value, got `{part}`")))?;
        let (k, v) = (k.trim(), v.trim());
        let value: f64 = v.parse().map_err(|_| CliError::Input(format!("`{v}` is not a number (in `{part}`)")))?;
        if out.insert(k.to_string(), value).is_some() {
            return Err(CliError::Input(format!("`{k}` is given twice")));
        }
    }
    Ok(out)
}

/// Initial state from `--init` values: every coordinate, plus for each
/// canonical coordinate either its velocity or its momentum.
fn initial_state(analysis: &Analysis, values: &BTreeMap<String, f64>, t0: f64) -> Result<(State, Option<InitialData>)> {
    let sys = &analysis.system;
    let model = sys.model();
    let canonical = sys.partition().canonical();
    let mut known: Vec<String> = Vec::new();
    for q in model.coordinates() {
        known.push(q.name().to_string());
        known.push(velocity_name(q.name()));
    }
    known.extend(canonical.iter().map(|&i| momentum_name(model.coordinates()[i].name())));
    let unknown: Vec<&str> = values.keys().filter(|k| !known.contains(k)).map(String::as_str).collect();
    if !unknown.is_empty() {
        return Err(CliError::Input(format!("unknown initial values: {}", unknown.join(", "))));
    }
    let mut missing = Vec::new();
    let mut by_momentum = Vec::new();
    for (i, q) in model.coordinates().iter().enumerate() {
        if !values.contains_key(q.name()) {
            missing.push(q.name().to_string());
        }
        if canonical.contains(&i) {
            let (v, p) = (velocity_name(q.name()), momentum_name(q.name()));
            match (values.contains_key(&v), values.contains_key(&p)) {
                (true, true) => return Err(CliError::Input(format!("both `{v}` and `{p}` are given"))),
                (false, false) => missing.push(format!("{v} (or {p})")),
                (false, true) => by_momentum.push(i),
                (true, false) => {}
            }
        }
    }
    if !missing.is_empty() {
        return Err(CliError::Input(format!("missing initial values: {}", missing.join(", "))));
    }
    if !by_momentum.is_empty() && by_momentum.len() != canonical.len() {
        return Err(CliError::Input("give either all canonical velocities or all canonical momenta".into()));
    }
    let q: Vec<f64> = model.coordinates().iter().map(|q| values[q.name()]).collect();
    let q_dot: Vec<f64> = model.coordinates().iter().map(|q| values.get(&velocity_name(q.name())).copied().unwrap_or(0.0)).collect();
    let data = InitialData { t0, q, q_dot };
    let mut state = dynamics::initial_state(analysis, &data)?;
    if by_momentum.is_empty() {
        return Ok((state, Some(data)));
    }
    state.p = canonical.iter().map(|&i| values[&momentum_name(model.coordinates()[i].name())]).collect();
    Ok((state, None))
}

fn integrator(args: &SimulateArgs, observables: Vec<Observable>) -> Result<IntegratorConfig> {
    let method = Method::from_name(&args.method).ok_or_else(|| CliError::Input(format!("unknown method `{}` (rk4, euler)", args.method)))?;
    if !(args.dt > 0.0) || !args.dt.is_finite() {
        return Err(CliError::Input("--dt must be positive".into()));
    }
    if !(args.t1 > args.t0) {
        return Err(CliError::Input("--t1 must be greater than --t0".into()));
    }
    Ok(IntegratorConfig { method, dt: args.dt, t_end: args.t1, observables })
}

fn parse_observables(items: &[String], analysis: &Analysis) -> Result<Vec<Observable>> {
    items
        .iter()
        .map(|item| {
            let (name, text) = match item.split_once('=') {
                Some((n, t)) if is_name(n.trim()) => (n.trim().to_string(), t.trim()),
                _ => (item.trim().to_string(), item.trim()),
            };
            Ok(Observable::parse(name, text, &analysis.system)?)
        })
        .collect()
}

fn is_name(s: &str) -> bool {
    let mut c = s.chars();
    c.next().is_some_and(|f| f.is_ascii_alphabetic() || f == '_') && c.all(|x| x.is_ascii_alphanumeric() || x == '_')
}

/// Columns: `t`, coordinates in model order, canonical momenta, observables.
pub fn trajectory_csv(analysis: &Analysis, traj: &Trajectory) -> String {
    let sys = &analysis.system;
    let model = sys.model();
    let canonical = sys.partition().canonical();
    let noncanonical = sys.partition().noncanonical();
    let mut header = vec!["t".to_string()];
    header.extend(model.coordinates().iter().map(|q| q.name().to_string()));
    header.extend(sys.canonical_momenta().iter().map(|p| p.name().to_string()));
    header.extend(traj.observables.iter().map(|(n, _)| format!("obs:{n}")));
    let mut out = header.join(",");
    out.push('\n');
    for (k, s) in traj.states.iter().enumerate() {
        let mut row = vec![s.t];
        for i in 0..model.n() {
            row.push(match canonical.iter().position(|&c| c == i) {
                Some(j) => s.q_canonical[j],
                None => s.q_noncanonical[noncanonical.iter().position(|&a| a == i).unwrap()],
            });
        }
        row.extend(&s.p);
        row.extend(traj.observables.iter().map(|(_, v)| v[k]));
        let cells: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

#[derive(Debug, Serialize)]
struct Diagnostics {
    model: String,
    verdict: String,
    method: String,
    dt: f64,
    steps: usize,
    t0: f64,
    t1: f64,
    h0_drift_max: f64,
    observable_residual_max: BTreeMap<String, f64>,
}

pub fn simulate(path: &Path, args: &SimulateArgs) -> Result<Output> {
    let file = ModelFile::read(path)?;
    let model = file.model()?;
    let analysis = match run_analysis(&model, &file.config(args.seed)?)? {
        Ok(a) => a,
        Err(out) => return Ok(out),
    };
    if analysis.verdict() == Verdict::Inconsistent {
        return Err(singmech::Error::InconsistentSystem.into());
    }
    let (state, _) = initial_state(&analysis, &parse_assignments(&args.init)?, args.t0)?;
    let observables = parse_observables(&args.observables, &analysis)?;
    let cfg = integrator(args, observables.clone())?;
    let traj = dynamics::integrate(&analysis, &state, &cfg)?;
    let mut residual = BTreeMap::new();
    for o in &observables {
        residual.insert(o.name.clone(), dynamics::evolve_observable(o, &analysis, &traj)?.max_abs);
    }
    let diag = Diagnostics {
        model: model.name().to_string(),
        verdict: analysis.verdict().as_str().to_string(),
        method: cfg.method.as_str().to_string(),
        dt: cfg.dt,
        steps: traj.states.len() - 1,
        t0: args.t0,
        t1: args.t1,
        h0_drift_max: traj.max_h0_drift(),
        observable_residual_max: residual,
    };
    let csv = trajectory_csv(&analysis, &traj);
    let stdout = match &args.out {
        Some(p) => {
            std::fs::write(p, csv).map_err(|e| CliError::io(p, e))?;
            String::new()
        }
        None => csv,
    };
    Ok(Output { stdout, stderr: serde_json::to_string(&diag).expect("diagnostics serialize") + "\n", code: 0 })
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct CheckEntry {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub witness: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct VerifyReport {
    pub model: String,
    pub verdict: String,
    pub seed: u64,
    pub samples: usize,
    pub tol: f64,
    pub passed: bool,
    pub checks: Vec<CheckEntry>,
}

pub fn verify(path: &Path, seed: Option<u64>, samples: usize, tol: f64) -> Result<Output> {
    let file = ModelFile::read(path)?;
    let model = file.model()?;
    let config = file.config(seed)?;
    let analysis = match run_analysis(&model, &config)? {
        Ok(a) => a,
        Err(out) => return Ok(out),
    };
    if samples == 0 || !(tol > 0.0) {
        return Err(CliError::Input("--samples must be positive and --tol > 0".into()));
    }
    let cfg = VerifyConfig { seed: config.seed(), samples, tol, ..VerifyConfig::default() };
    let results = verify::run(&analysis, &cfg);
    let passed = verify::all_passed(&results);
    let report = VerifyReport {
        model: model.name().to_string(),
        verdict: analysis.verdict().as_str().to_string(),
        seed: cfg.seed,
        samples,
        tol,
        passed,
        checks: results
            .iter()
            .map(|r| CheckEntry { name: r.name.to_string(), passed: r.passed, detail: r.detail.clone(), witness: r.witness.as_ref().map(binding_map) })
            .collect(),
    };
    Ok(Output { stdout: to_json(&report), stderr: String::new(), code: if passed { 0 } else { 2 } })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HamiltonianFile {
    coordinates: Vec<String>,
    times: Vec<String>,
    hamiltonians: Vec<String>,
}

#[derive(Debug, Serialize)]
struct ResidualEntry {
    times: [String; 2],
    residual: String,
    zero: bool,
}

#[derive(Debug, Serialize)]
struct PathEndpoint {
    path: String,
    waypoints: usize,
    endpoint: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct MultitimeReport {
    source: String,
    times: Vec<String>,
    hamiltonians: Vec<String>,
    variables: Vec<String>,
    initial: Vec<f64>,
    steps: usize,
    verdict: &'static str,
    residuals: Vec<ResidualEntry>,
    counting_rules: Option<crate::report::CountingSection>,
    paths: Vec<PathEndpoint>,
    max_difference: Option<f64>,
}

fn strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn load_multitime(path: &Path, seed: Option<u64>) -> Result<std::result::Result<(MultiTimeSystem, AnalysisConfig, String), Output>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let table: toml::Table = text.parse().map_err(|e| CliError::Input(format!("{}: malformed file: {e}", path.display())))?;
    if table.contains_key("lagrangian") {
        let file = ModelFile::parse(&text)?;
        let config = file.config(seed)?;
        let analysis = match run_analysis(&file.model()?, &config)? {
            Ok(a) => a,
            Err(out) => return Ok(Err(out)),
        };
        let mts = MultiTimeSystem::from_partial(&analysis.system)?;
        return Ok(Ok((mts, config, file.name)));
    }
    let h: HamiltonianFile = toml::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mts = MultiTimeSystem::parse(&strs(&h.coordinates), &strs(&h.times), &strs(&h.hamiltonians))?;
    let config = AnalysisConfig::with_seed(resolve_seed(seed, None)?);
    Ok(Ok((mts, config, path.display().to_string())))
}

pub fn multitime(path: &Path, paths: &[PathBuf], init: &[String], steps: Option<usize>, seed: Option<u64>) -> Result<Output> {
    let (mts, config, source) = match load_multitime(path, seed)? {
        Ok(x) => x,
        Err(out) => return Ok(out),
    };
    let variables: Vec<String> = mts.coordinates.iter().chain(&mts.momenta).map(|s| s.name().to_string()).collect();
    let values = parse_assignments(init)?;
    if let Some(k) = values.keys().find(|k| !variables.contains(k)) {
        return Err(CliError::Input(format!("unknown initial value `{k}` (expected one of {})", variables.join(", "))));
    }
    let initial: Vec<f64> = variables.iter().map(|v| values.get(v).copied().unwrap_or(0.0)).collect();
    let steps = steps.unwrap_or(DEFAULT_STEPS);
    let integ = mts.integrability(&config);
    let residuals = (0..mts.n_mu())
        .flat_map(|m| (m + 1..mts.n_mu()).map(move |n| (m, n)))
        .map(|(m, n)| ResidualEntry {
            times: [mts.times[m].name().to_string(), mts.times[n].name().to_string()],
            residual: integ.residual[m][n].to_string(),
            zero: !integ.offending.contains(&(m, n)),
        })
        .collect();
    let mut endpoints = Vec::new();
    for p in paths {
        let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
        let tp = TimePath::parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
        let endpoint = mts.integrate_path(&tp, &initial, steps)?;
        endpoints.push(PathEndpoint { path: p.display().to_string(), waypoints: tp.waypoints.len(), endpoint });
    }
    let max_difference = (endpoints.len() > 1).then(|| {
        let mut worst: f64 = 0.0;
        for a in &endpoints {
            for b in &endpoints {
                worst = a.endpoint.iter().zip(&b.endpoint).fold(worst, |w, (x, y)| w.max((x - y).abs()));
            }
        }
        worst
    });
    let report = MultitimeReport {
        source,
        times: mts.times.iter().map(|t| t.name().to_string()).collect(),
        hamiltonians: mts.hamiltonians.iter().map(|h| h.to_string()).collect(),
        variables,
        initial,
        steps,
        verdict: if integ.integrable { "integrable" } else { "nonintegrable" },
        residuals,
        counting_rules: mts.counting_rules().map(|c| crate::report::CountingSection {
            n: c.n,
            n_p: c.n_p,
            n_mu: c.n_mu,
            r_w: c.r_w,
            times_momenta: c.times_momenta,
            times_rank: c.times_rank,
        }),
        paths: endpoints,
        max_difference,
    };
    Ok(Output::ok(to_json(&report)))
}

#[derive(Debug, Serialize)]
struct CompareReport {
    model: String,
    verdict: String,
    method: String,
    dt: f64,
    steps: usize,
    max_difference: f64,
    tol: f64,
    passed: bool,
}

/// Reduced-equation trajectory against the reference solution.
pub fn compare(path: &Path, args: &SimulateArgs, tol: f64) -> Result<Output> {
    let file = ModelFile::read(path)?;
    let model = file.model()?;
    let analysis = match run_analysis(&model, &file.config(args.seed)?)? {
        Ok(a) => a,
        Err(out) => return Ok(out),
    };
    if analysis.verdict() == Verdict::Inconsistent {
        return Err(singmech::Error::InconsistentSystem.into());
    }
    let (state, data) = initial_state(&analysis, &parse_assignments(&args.init)?, args.t0)?;
    let data = data.ok_or_else(|| CliError::Input("compare needs velocities, not momenta, in --init".into()))?;
    let cfg = integrator(args, Vec::new())?;
    let traj = dynamics::integrate(&analysis, &state, &cfg)?;
    let oracle = dynamics::oracle_trajectory(&model, &data, &cfg)?;
    let max_difference = traj.max_difference(&oracle);
    let passed = max_difference <= tol;
    let report = CompareReport {
        model: model.name().to_string(),
        verdict: analysis.verdict().as_str().to_string(),
        method: cfg.method.as_str().to_string(),
        dt: cfg.dt,
        steps: traj.states.len() - 1,
        max_difference,
        tol,
        passed,
    };
    Ok(Output { stdout: to_json(&report), stderr: String::new(), code: if passed { 0 } else { 2 } })
}
