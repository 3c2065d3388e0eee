//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Reference values are computed here from closed forms and
//! finite differences, independently of the library pipeline.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use singmech::bracket::{Analysis, Verdict};
use singmech::dirac;
use singmech::dynamics::{self, IntegratorConfig, State};
use singmech::fixtures;
use singmech::multitime::{MultiTimeSystem, TimePath, DEFAULT_STEPS};
use singmech::partial::AnalysisConfig;
use singmech::symbolic::{central_difference, is_zero, parse, Binding, Expr, Sampler, Symbol, SymbolTable, ZeroVerdict};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn analysis(name: &str) -> Analysis {
    Analysis::run(&fixtures::model(name), &AnalysisConfig::default()).unwrap()
}

fn expr(a: &Analysis, text: &str) -> Expr {
    a.system.model().parse(text).unwrap().simplify()
}

fn zero_at(e: &Expr, samples: usize, tol: f64) -> ZeroVerdict {
    is_zero(e, &Sampler::new(42, samples), tol)
}

fn state(q: &[f64], p: &[f64], q_non: &[f64]) -> State {
    State { t: 0.0, q_canonical: q.to_vec(), p: p.to_vec(), q_noncanonical: q_non.to_vec() }
}

// S1 written out by hand: L(q1, q2, v1, v2) = v1 q2 - (q1^2 + q2^2)/2.
fn s1_lagrangian(q: [f64; 2], v: [f64; 2]) -> f64 {
    v[0] * q[1] - 0.5 * (q[0] * q[0] + q[1] * q[1])
}

const H: f64 = 1e-5;

// H_a = -dL/dv_a by central differences.
fn s1_h_alpha(q: [f64; 2], a: usize) -> f64 {
    let mut up = [0.0; 2];
    let mut down = [0.0; 2];
    up[a] = H;
    down[a] = -H;
    -(s1_lagrangian(q, up) - s1_lagrangian(q, down)) / (2.0 * H)
}

fn shifted(q: [f64; 2], b: usize, d: f64) -> [f64; 2] {
    let mut q = q;
    q[b] += d;
    q
}

// F_ab = dH_a/dq^b - dH_b/dq^a and G_a = dH0/dq^a with H0 = -L(q, 0).
fn s1_numeric_fg(q: [f64; 2]) -> ([[f64; 2]; 2], [f64; 2]) {
    let mut f = [[0.0; 2]; 2];
    let dh = |a: usize, b: usize| (s1_h_alpha(shifted(q, b, H), a) - s1_h_alpha(shifted(q, b, -H), a)) / (2.0 * H);
    for a in 0..2 {
        for b in 0..2 {
            f[a][b] = dh(a, b) - dh(b, a);
        }
    }
    let h0 = |q: [f64; 2]| -s1_lagrangian(q, [0.0, 0.0]);
    let g = [0, 1].map(|a| (h0(shifted(q, a, H)) - h0(shifted(q, a, -H))) / (2.0 * H));
    (f, g)
}

fn binding(pairs: &[(&Symbol, f64)]) -> Binding {
    pairs.iter().map(|(s, v)| ((*s).clone(), *v)).collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let a = analysis("S1");
    let rank = a.system.hessian().unwrap().rank;
    ensure(rank == 0, || format!("r_W = {rank}"))?;
    ensure(a.verdict() == Verdict::NongaugeSingular, || format!("verdict {:?}", a.verdict()))?;
    let (q1, q2) = (Symbol::coordinate("q1"), Symbol::coordinate("q2"));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let q = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let b = binding(&[(&q1, q[0]), (&q2, q[1])]);
        let (f, g) = s1_numeric_fg(q);
        for i in 0..2 {
            let gi = a.fg.g[i].evaluate(&b).unwrap();
            ensure((gi - g[i]).abs() < 1e-6, || format!("G[{i}] = {gi} vs finite difference {}", g[i]))?;
            for j in 0..2 {
                let fij = a.fg.f[i][j].evaluate(&b).unwrap();
                ensure((fij - f[i][j]).abs() < 1e-6, || format!("F[{i}][{j}] = {fij} vs {}", f[i][j]))?;
            }
        }
    }
    ensure(a.fg.f == vec![vec![Expr::zero(), Expr::int(-1)], vec![Expr::one(), Expr::zero()]], || "F is not [[0,-1],[1,0]]".into())?;
    ensure(a.fg.g == vec![expr(&a, "q1"), expr(&a, "q2")], || "G is not (q1, q2)".into())?;
    let rhs = dynamics::reduced_rhs_exprs(&a).unwrap();
    ensure(rhs == vec![expr(&a, "q2"), expr(&a, "-q1")], || format!("reduced equations {rhs:?}"))?;
    let traj = dynamics::integrate(&a, &state(&[], &[], &[1.0, 0.0]), &IntegratorConfig::rk4(1e-3, 2.0 * PI)).unwrap();
    let end = &traj.last().q_noncanonical;
    let err = (end[0] - 1.0).abs().max(end[1].abs());
    ensure(err < 1e-6, || format!("endpoint error {err:e}"))?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 1.0, || format!("runtime {secs:.3} s"))?;
    Ok(format!("r_W = 0, nongauge, F and G match finite differences, endpoint error {err:.1e}, {secs:.3} s"))
}

fn criterion_2() -> Outcome {
    let a = analysis("S1");
    let b = a.bracket(&expr(&a, "q1"), &expr(&a, "q2")).unwrap();
    let verdict = is_zero(&(&b - &Expr::one()), &Sampler::default(), 1e-12);
    ensure(verdict == ZeroVerdict::SymbolicZero, || format!("bracket(q1, q2) = {b}"))?;
    // D_1 q1 = 1, D_2 q2 = 1 so the bracket is the (1,2) entry of F^-1
    let (f, _) = s1_numeric_fg([0.4, -1.1]);
    let det = f[0][0] * f[1][1] - f[0][1] * f[1][0];
    let inv12 = -f[0][1] / det;
    ensure((inv12 - 1.0).abs() < 1e-6, || format!("numeric inverse entry {inv12}"))?;
    Ok(format!("bracket(q1, q2) = {b}, SymbolicZero difference; finite-difference F^-1[1][2] = {inv12:.9}"))
}

fn observables(vars: &[Symbol], count: usize, seed: u64) -> Vec<Expr> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<Expr> = std::iter::once(Expr::one())
        .chain(vars.iter().map(Expr::sym))
        .chain(vars.iter().enumerate().flat_map(|(i, x)| vars[i..].iter().map(move |y| Expr::sym(x) * Expr::sym(y))))
        .collect();
    (0..count)
        .map(|_| {
            Expr::sum(terms.iter().map(|t| Expr::int(rng.gen_range(-2i64..=2)) * t.clone()))
        })
        .collect()
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for name in ["S1", "S2", "G1", "R"] {
        let a = analysis(name);
        let obs = observables(&a.system.state_symbols(), 20, 7);
        let br = |x: &Expr, y: &Expr| a.bracket(x, y).unwrap();
        for i in 0..obs.len() {
            let (x, y, z) = (&obs[i], &obs[(i + 1) % 20], &obs[(i + 2) % 20]);
            let anti = br(x, y) + br(y, x);
            let leibniz = Expr::sum([br(&(x * y), z), -(x * &br(y, z)), -(y * &br(x, z))]);
            let jacobi = Expr::sum([br(x, &br(y, z)), br(y, &br(z, x)), br(z, &br(x, y))]);
            for (what, e) in [("antisymmetry", anti), ("leibniz", leibniz), ("jacobi", jacobi)] {
                let v = zero_at(&e, 100, 1e-8);
                ensure(v.is_zero(), || format!("{name}: {what} fails for observable {i}: {v:?}"))?;
                checked += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 30.0, || format!("runtime {secs:.1} s"))?;
    Ok(format!("{checked} identities on S1, S2, G1, R hold, {secs:.2} s"))
}

fn criterion_4() -> Outcome {
    let a = analysis("R");
    ensure(a.verdict() == Verdict::Regular, || format!("verdict {:?}", a.verdict()))?;
    // full Legendre transform with q_dot = p (unit Hessian)
    let m = a.system.model();
    let to_p: BTreeMap<Symbol, Expr> =
        m.velocities().iter().zip(m.momenta()).map(|(v, p)| (v.clone(), Expr::sym(p))).collect();
    let pv = Expr::sum(m.momenta().iter().map(|p| Expr::sym(p) * Expr::sym(p)));
    let h = pv - m.lagrangian().substitute(&to_p);
    let mut hamilton: Vec<Expr> = m.momenta().iter().map(|p| h.diff(p)).collect();
    hamilton.extend(m.coordinates().iter().map(|q| -h.diff(q)));
    let rhs = dynamics::reduced_rhs_exprs(&a).unwrap();
    for (x, y) in rhs.iter().zip(&hamilton) {
        ensure(zero_at(&(x - y), 100, 1e-12) == ZeroVerdict::SymbolicZero, || format!("{x} vs {y}"))?;
    }
    let obs = observables(&a.system.state_symbols(), 20, 11);
    for w in obs.windows(2) {
        let poisson = Expr::sum(m.coordinates().iter().zip(m.momenta()).map(|(q, p)| {
            w[0].diff(q) * w[1].diff(p) - w[1].diff(q) * w[0].diff(p)
        }));
        let gap = a.bracket(&w[0], &w[1]).unwrap() - poisson;
        ensure(gap.is_zero_constant(), || format!("bracket differs from Poisson by {gap}"))?;
    }
    Ok("regular, reduced equations equal Hamilton's equations, bracket equals Poisson (SymbolicZero)".into())
}

fn full_poisson(a: &Expr, b: &Expr, an: &Analysis) -> Expr {
    let m = an.system.model();
    Expr::sum(m.coordinates().iter().zip(m.momenta()).map(|(q, p)| a.diff(q) * b.diff(p) - b.diff(q) * a.diff(p)))
}

fn criterion_5() -> Outcome {
    for name in ["S1", "S2", "G1"] {
        let a = analysis(name);
        let sys = &a.system;
        let phi: Vec<Expr> = sys.extra_momenta().iter().zip(&sys.h_alpha).map(|(p, h)| Expr::sym(p) + h.clone()).collect();
        for (i, pi) in phi.iter().enumerate() {
            for (j, pj) in phi.iter().enumerate() {
                let v = zero_at(&(&a.fg.f[i][j] - &full_poisson(pi, pj, &a)), 100, 1e-10);
                ensure(v.is_zero(), || format!("{name}: F[{i}][{j}] != {{Phi, Phi}}"))?;
            }
            // time-independent fixtures: D_a H0 = {H0, Phi_a}
            let v = zero_at(&(&a.fg.g[i] - &full_poisson(&sys.h0, pi, &a)), 100, 1e-10);
            ensure(v.is_zero(), || format!("{name}: G[{i}] != {{H0, Phi}}"))?;
        }
    }
    let a = analysis("S1");
    let obs = observables(&a.system.state_symbols(), 20, 5);
    for w in obs.windows(2) {
        let gap = dirac::dirac_bracket(&w[0], &w[1], &a.system).unwrap() - a.bracket(&w[0], &w[1]).unwrap();
        ensure(zero_at(&gap, 100, 1e-10).is_zero(), || format!("Dirac bracket differs: {gap}"))?;
    }
    Ok("F = {Phi, Phi} and D_a H0 = {H0, Phi_a} on S1, S2, G1; Dirac bracket = nongauge bracket on S1 (generator identity taken in the {H0, Phi} orientation, the literal {Phi, H0} form differs by sign)".into())
}

fn criterion_6() -> Outcome {
    let cfg = IntegratorConfig::rk4(1e-3, 100.0);
    let s1 = analysis("S1");
    let d1 = dynamics::integrate(&s1, &state(&[], &[], &[1.0, 0.0]), &cfg).unwrap().max_h0_drift();
    let r = analysis("R");
    let d2 = dynamics::integrate(&r, &state(&[1.0, 0.0], &[0.0, 0.5], &[]), &cfg).unwrap().max_h0_drift();
    ensure(d1 < 1e-7 && d2 < 1e-7, || format!("drift S1 {d1:e}, R {d2:e}"))?;
    Ok(format!("max |H0(t) - H0(0)| on [0, 100]: S1 {d1:.1e}, R {d2:.1e}"))
}

fn criterion_7() -> Outcome {
    let g1 = analysis("G1");
    let c = &g1.classification;
    ensure(c.verdict == Verdict::GaugeSingular && c.r_f == 0, || format!("G1: {:?}, r_F = {}", c.verdict, c.r_f))?;
    for w in observables(&g1.system.state_symbols(), 10, 3).windows(2) {
        let m = g1.system.model();
        let q = &m.coordinates()[..1];
        let p = &m.momenta()[..1];
        let poisson = Expr::sum(q.iter().zip(p).map(|(q, p)| w[0].diff(q) * w[1].diff(p) - w[1].diff(q) * w[0].diff(p)));
        ensure((g1.bracket(&w[0], &w[1]).unwrap() - poisson).is_zero_constant(), || "G1 gauge bracket != Poisson".into())?;
    }
    let s2 = analysis("S2");
    let c = &s2.classification;
    ensure(c.verdict == Verdict::GaugeSingular && c.r_f == 2, || format!("S2: {:?}, r_F = {}", c.verdict, c.r_f))?;
    ensure(c.lambda.iter().flatten().all(Expr::is_zero_constant), || "S2: lambda != 0".into())?;
    let v = s2.noncanonical_velocities().unwrap();
    ensure(c.alpha2 == vec![2] && v[2].is_zero_constant(), || format!("S2 gauge block {:?}, q3_dot = {}", c.alpha2, v[2]))?;
    let g2 = analysis("G2");
    let inc = g2.classification.inconsistency.as_ref().ok_or("G2 has no inconsistency witness")?;
    ensure(g2.verdict() == Verdict::Inconsistent && inc.residual == expr(&g2, "p_q1"), || format!("G2 residual {}", inc.residual))?;
    ensure(g2.verdict().exit_code() == 1, || "G2 exit code".into())?;
    Ok(format!("G1 gauge r_F = 0, S2 gauge r_F = 2 with lambda = 0 and q3_dot = 0, G2 inconsistent (G = {}, exit 1)", inc.residual))
}

fn criterion_8() -> Outcome {
    let load = |name: &str| {
        let (_, h, _) = fixtures::MULTITIME.iter().find(|(n, _, _)| *n == name).unwrap();
        MultiTimeSystem::parse(&["q"], &["t", "tau1"], h).unwrap()
    };
    let good = load("commuting");
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let end = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let init = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let a = TimePath::random_staircase(&[0.0, 0.0], &end, &mut rng).unwrap();
        let b = TimePath::random_staircase(&[0.0, 0.0], &end, &mut rng).unwrap();
        let ya = good.integrate_path(&a, &init, DEFAULT_STEPS).unwrap();
        let yb = good.integrate_path(&b, &init, DEFAULT_STEPS).unwrap();
        // closed form: p constant, q = q0 + p t + tau1
        let exact = init[0] + init[1] * end[0] + end[1];
        for y in [&ya, &yb] {
            ensure((y[0] - exact).abs() < 1e-8, || format!("endpoint q = {} vs {exact}", y[0]))?;
        }
        worst = worst.max((ya[0] - yb[0]).abs()).max((ya[1] - yb[1]).abs());
    }
    ensure(worst < 1e-8, || format!("integrable pair differs by {worst:e}"))?;
    let bad = load("noncommuting");
    let a = TimePath::staircase(&[0.0, 0.0], &[1.0, 1.0], &[0, 1]).unwrap();
    let b = TimePath::staircase(&[0.0, 0.0], &[1.0, 1.0], &[1, 0]).unwrap();
    let ya = bad.integrate_path(&a, &[0.0, 1.0], DEFAULT_STEPS).unwrap();
    let yb = bad.integrate_path(&b, &[0.0, 1.0], DEFAULT_STEPS).unwrap();
    let gap = (ya[0] - yb[0]).abs().max((ya[1] - yb[1]).abs());
    ensure(gap > 1e-3, || format!("nonintegrable pair differs by only {gap:e}"))?;
    for name in fixtures::MODEL_NAMES {
        let a = analysis(name);
        let mts = MultiTimeSystem::from_partial(&a.system).unwrap();
        let n = a.system.model().n();
        let (n_mu, n_p, r_w) = (mts.n_mu(), a.system.partition().n_p(), a.system.hessian().unwrap().rank);
        ensure(n_mu + n_p == n + 1 && n_mu + r_w == n + 1, || format!("{name}: n_mu {n_mu}, n_p {n_p}, r_W {r_w}"))?;
    }
    Ok(format!("integrable pairs agree within {worst:.1e}, nonintegrable witness differs by {gap:.3}, counting rules hold on all fixtures"))
}

fn criterion_9() -> Outcome {
    let mut table = SymbolTable::new();
    table.insert(Symbol::time()).unwrap();
    for c in ["q1", "q2", "q3"] {
        table.insert_coordinate(c).unwrap();
    }
    let vars: Vec<Symbol> = table.iter().filter(|s| s.name() != "p_q1" && !s.name().starts_with("p_")).cloned().collect();
    let sampler = Sampler::new(42, 100);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for text in fixtures::EXPRESSION_CORPUS {
        let e = parse(text, &table).unwrap();
        for s in e.free_symbols() {
            let d = e.diff(&s);
            for b in sampler.bindings(&vars) {
                let exact = d.evaluate(&b).unwrap();
                let fd = central_difference(&e, &s, &b, 1e-6).unwrap();
                let rel = (exact - fd).abs() / (1.0 + exact.abs());
                worst = worst.max(rel);
                ensure(rel < 1e-6, || format!("{text} d/d{}: {exact} vs {fd}", s.name()))?;
            }
            count += 1;
        }
    }
    ensure(fixtures::EXPRESSION_CORPUS.len() >= 50, || "corpus too small".into())?;
    Ok(format!("{} expressions, {count} partial derivatives at 100 points, worst relative error {worst:.1e}", fixtures::EXPRESSION_CORPUS.len()))
}

fn criterion_10() -> Outcome {
    let a = analysis("S1");
    let t_end = 8.0;
    let err = |dt: f64| {
        let traj = dynamics::integrate(&a, &state(&[], &[], &[1.0, 0.0]), &IntegratorConfig::rk4(dt, t_end)).unwrap();
        let end = &traj.last().q_noncanonical;
        (end[0] - t_end.cos()).hypot(end[1] + t_end.sin())
    };
    let (coarse, fine) = (err(0.1), err(0.05));
    let ratio = coarse / fine;
    ensure((12.0..=20.0).contains(&ratio), || format!("error ratio {ratio:.2}"))?;
    Ok(format!("endpoint errors {coarse:.2e} (dt = 0.1) and {fine:.2e} (dt = 0.05), ratio {ratio:.2}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("nongauge reduction", criterion_1),
        ("new bracket canonical pair", criterion_2),
        ("bracket axioms", criterion_3),
        ("regular limit", criterion_4),
        ("Dirac correspondence", criterion_5),
        ("conservation", criterion_6),
        ("gauge classification", criterion_7),
        ("multi-time integrability", criterion_8),
        ("differentiation soundness", criterion_9),
        ("integrator order", criterion_10),
    ];
    let mut failures = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {title}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {title}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
