//! Property suite over an analyzed model: Hessian and momentum identities,
//! bracket axioms, the Dirac correspondence and the multi-time residual.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bracket::{poisson_reduced, Analysis, Verdict};
use crate::dirac;
use crate::error::Error;
use crate::lagrangian;
use crate::multitime::MultiTimeSystem;
use crate::symbolic::{is_zero, Binding, Expr, Sampler, Symbol, SymbolKind, ZeroVerdict};

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    pub samples: usize,
    pub tol: f64,
    /// Random observables per bracket property.
    pub observables: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: 42, samples: 100, tol: 1e-8, observables: 20 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub witness: Option<Binding>,
}

impl CheckResult {
    fn pass(name: &'static str, detail: impl Into<String>) -> Self {
        CheckResult { name, passed: true, detail: detail.into(), witness: None }
    }

    fn fail(name: &'static str, detail: impl Into<String>, witness: Option<Binding>) -> Self {
        CheckResult { name, passed: false, detail: detail.into(), witness }
    }
}

/// `count` polynomials of degree at most 2 in `vars` with small integer
/// coefficients, reproducible from `seed`.
pub fn random_observables(vars: &[Symbol], count: usize, seed: u64) -> Vec<Expr> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut monomials: Vec<Expr> = vec![Expr::one()];
    monomials.extend(vars.iter().map(Expr::sym));
    for i in 0..vars.len() {
        for j in i..vars.len() {
            monomials.push(&Expr::sym(&vars[i]) * &Expr::sym(&vars[j]));
        }
    }
    (0..count)
        .map(|_| loop {
            let e = Expr::sum(monomials.iter().filter_map(|m| {
                let keep = rng.gen_bool(0.5);
                let c = rng.gen_range(-3i64..=3);
                keep.then(|| &Expr::int(c) * m)
            }));
            if !e.is_zero_constant() {
                break e;
            }
        })
        .collect()
}

struct Suite {
    sampler: Sampler,
    tol: f64,
    results: Vec<CheckResult>,
}

impl Suite {
    fn zero(&self, e: &Expr) -> ZeroVerdict {
        is_zero(e, &self.sampler, self.tol)
    }

    /// Passes when every expression vanishes; otherwise reports the first
    /// failure.
    fn all_zero(&mut self, name: &'static str, what: &str, exprs: impl IntoIterator<Item = (String, Expr)>) {
        let mut count = 0;
        for (label, e) in exprs {
            count += 1;
            if let ZeroVerdict::NonZero { witness, value } = self.zero(&e) {
                self.results.push(CheckResult::fail(name, format!("{label}: residual {value:e} ({e})"), Some(witness)));
                return;
            }
        }
        self.results.push(CheckResult::pass(name, format!("{count} {what}")));
    }

    fn error(&mut self, name: &'static str, err: Error) {
        let witness = match &err {
            Error::CorrespondenceFailure { witness, .. } => Some(witness.clone()),
            _ => None,
        };
        self.results.push(CheckResult::fail(name, err.to_string(), witness));
    }
}

/// Runs every check that applies to the analysis verdict.
pub fn run(analysis: &Analysis, cfg: &VerifyConfig) -> Vec<CheckResult> {
    let sys = &analysis.system;
    let model = sys.model();
    let mut s = Suite { sampler: Sampler::new(cfg.seed, cfg.samples), tol: cfg.tol, results: Vec::new() };

    match lagrangian::hessian(model) {
        Ok(w) => {
            let n = w.len();
            s.all_zero(
                "hessian-symmetry",
                "entry pairs",
                (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).map(|(a, b)| (format!("W[{a}][{b}]"), &w[a][b] - &w[b][a])),
            );
        }
        Err(e) => s.error("hessian-symmetry", e),
    }
    let rt = sys.round_trip_residuals();
    s.all_zero("momentum-round-trip", "canonical velocities", rt.into_iter().enumerate().map(|(i, e)| (format!("velocity {i}"), e)));
    let velocity_free = std::iter::once(&sys.h0).chain(&sys.h_alpha).all(|h| !h.contains_kind(SymbolKind::Velocity));
    s.results.push(if velocity_free {
        CheckResult::pass("nondynamical", "H0 and H_a are free of velocities")
    } else {
        CheckResult::fail("nondynamical", "a Hamiltonian still depends on a velocity", None)
    });

    let fg = &analysis.fg;
    let m = fg.g.len();
    let f_sym: Vec<(String, Expr)> = (0..m)
        .flat_map(|a| (a..m).map(move |b| (a, b)))
        .map(|(a, b)| (format!("F[{a}][{b}] + F[{b}][{a}]"), &fg.f[a][b] + &fg.f[b][a]))
        .collect();
    match f_sym.iter().find(|(_, e)| !e.is_zero_constant()) {
        None => s.results.push(CheckResult::pass("f-antisymmetry", format!("{m}x{m} exact"))),
        Some((label, e)) => {
            let witness = match s.zero(e) {
                ZeroVerdict::NonZero { witness, .. } => Some(witness),
                _ => None,
            };
            s.results.push(CheckResult::fail("f-antisymmetry", format!("{label} = {e} is not exactly zero"), witness));
        }
    }

    let cls = &analysis.classification;
    if cls.verdict == Verdict::Inconsistent {
        let inc = cls.inconsistency.as_ref().unwrap();
        s.results.push(CheckResult::fail(
            "consistency",
            format!("G residual {} does not vanish", inc.residual),
            Some(inc.witness.clone()),
        ));
        return s.results;
    }

    match analysis.noncanonical_velocities() {
        Ok(v) => s.all_zero(
            "velocity-system",
            "rows of F q_dot = G",
            (0..m).map(|a| {
                let lhs = Expr::sum((0..m).map(|b| &fg.f[a][b] * &v[b]));
                (format!("row {a}"), lhs - fg.g[a].clone())
            }),
        ),
        Err(e) => s.error("velocity-system", e),
    }
    if cls.verdict == Verdict::GaugeSingular {
        let (a1, a2, lam) = (&cls.alpha1, &cls.alpha2, &cls.lambda);
        let mut rows = Vec::new();
        for (l, &x) in a2.iter().enumerate() {
            for (k, &y) in a2.iter().enumerate() {
                let mut terms = vec![fg.f[x][y].clone()];
                for (i, &p) in a1.iter().enumerate() {
                    for (j, &q) in a1.iter().enumerate() {
                        terms.push(-Expr::product([lam[i][l].clone(), lam[j][k].clone(), fg.f[p][q].clone()]));
                    }
                }
                rows.push((format!("F[{x}][{y}]"), Expr::sum(terms)));
            }
        }
        s.all_zero("lambda-consistency", "gauge block entries", rows);
    }

    let observables = random_observables(&sys.state_symbols(), cfg.observables, cfg.seed);
    let br = |a: &Expr, b: &Expr| analysis.bracket(a, b).expect("classification is consistent");
    let k = observables.len();
    let triple = |i: usize| (&observables[i], &observables[(i + 1) % k], &observables[(i + 2) % k]);
    s.all_zero(
        "bracket-antisymmetry",
        "observable pairs",
        (0..k).map(|i| {
            let (a, b, _) = triple(i);
            (format!("pair {i}"), br(a, b) + br(b, a))
        }),
    );
    s.all_zero(
        "bracket-leibniz",
        "observable triples",
        (0..k).map(|i| {
            let (a, b, c) = triple(i);
            let e = Expr::sum([br(&(a * b), c), -(a * &br(b, c)), -(b * &br(a, c))]);
            (format!("triple {i}"), e)
        }),
    );
    s.all_zero(
        "bracket-jacobi",
        "observable triples",
        (0..k).map(|i| {
            let (a, b, c) = triple(i);
            let e = Expr::sum([br(a, &br(b, c)), br(b, &br(c, a)), br(c, &br(a, b))]);
            (format!("triple {i}"), e)
        }),
    );
    match cls.verdict {
        Verdict::Regular => s.all_zero(
            "regular-limit",
            "observable pairs",
            (0..k).map(|i| {
                let (a, b, _) = triple(i);
                (format!("pair {i}"), br(a, b) - dirac::poisson_full(a, b, sys))
            }),
        ),
        Verdict::GaugeSingular if cls.r_f == 0 => s.all_zero(
            "gauge-bracket-is-poisson",
            "observable pairs",
            (0..k).map(|i| {
                let (a, b, _) = triple(i);
                (format!("pair {i}"), br(a, b) - poisson_reduced(a, b, sys))
            }),
        ),
        _ => {}
    }

    if m > 0 {
        match dirac::verify_correspondence(analysis) {
            Ok(rep) => s.results.push(CheckResult::pass(
                "dirac-correspondence",
                format!("constraint algebra and generator identities hold (literal orientation: {})", rep.orientation.as_str()),
            )),
            Err(e) => s.error("dirac-correspondence", e),
        }
        if cls.verdict == Verdict::NongaugeSingular {
            let mut rows = Vec::new();
            for i in 0..k {
                let (a, b, _) = triple(i);
                match dirac::dirac_bracket(a, b, sys) {
                    Ok(d) => rows.push((format!("pair {i}"), d - br(a, b))),
                    Err(e) => {
                        s.error("dirac-bracket", e);
                        rows.clear();
                        break;
                    }
                }
            }
            if !rows.is_empty() {
                s.all_zero("dirac-bracket", "observable pairs", rows);
            }
        }
        let mut rows = Vec::new();
        for (i, a) in observables.iter().enumerate() {
            match dirac::total_evolution(a, analysis) {
                Ok(e) => rows.push((format!("observable {i}"), e - br(a, &sys.h0))),
                Err(e) => {
                    s.error("total-hamiltonian-evolution", e);
                    rows.clear();
                    break;
                }
            }
        }
        if !rows.is_empty() {
            s.all_zero("total-hamiltonian-evolution", "observables", rows);
        }
    }

    match MultiTimeSystem::from_partial(sys) {
        Ok(mts) => {
            let rules = mts.counting_rules().unwrap();
            s.results.push(CheckResult::pass(
                "counting-rules",
                format!("n_mu = {}, n_p = {}, n = {}", rules.n_mu, rules.n_p, rules.n),
            ));
            let r = mts.integrability_residual();
            let mut rows = Vec::new();
            for a in 0..m {
                rows.push((format!("R[0][{}] - G[{a}]", a + 1), &r[0][a + 1] - &fg.g[a]));
                for b in 0..m {
                    rows.push((format!("R[{}][{}] - F[{a}][{b}]", a + 1, b + 1), &r[a + 1][b + 1] - &fg.f[a][b]));
                }
            }
            s.all_zero("multitime-residual", "entries", rows);
        }
        Err(e) => s.error("counting-rules", e),
    }
    s.results
}

pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.passed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::partial::AnalysisConfig;

    #[test]
    fn fixtures_pass_their_suite() {
        for name in ["R", "S1", "S2", "G1"] {
            let a = Analysis::run(&fixtures::model(name), &AnalysisConfig::default()).unwrap();
            let results = run(&a, &VerifyConfig::default());
            let failed: Vec<_> = results.iter().filter(|r| !r.passed).collect();
            assert!(failed.is_empty(), "{name}: {failed:?}");
        }
    }

    #[test]
    fn tampered_f_is_caught() {
        let mut a = Analysis::run(&fixtures::model("S1"), &AnalysisConfig::default()).unwrap();
        let q1 = Expr::sym(&Symbol::coordinate("q1"));
        a.fg.f[0][1] = &a.fg.f[0][1] + &q1;
        let results = run(&a, &VerifyConfig::default());
        let dirac = results.iter().find(|r| r.name == "dirac-correspondence").unwrap();
        assert!(!dirac.passed && dirac.witness.is_some());
        assert!(!all_passed(&results));
    }

    #[test]
    fn random_observables_are_reproducible() {
        let vars = [Symbol::coordinate("a"), Symbol::coordinate("b")];
        assert_eq!(random_observables(&vars, 5, 7), random_observables(&vars, 5, 7));
        assert_ne!(random_observables(&vars, 5, 7), random_observables(&vars, 5, 8));
    }
}
