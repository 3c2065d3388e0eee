//! Serializable analysis report. Every expression is stored as text in the
//! grammar the parser accepts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use singmech::bracket::Analysis;
use singmech::dirac;
use singmech::multitime::MultiTimeSystem;
use singmech::symbolic::{Binding, Expr, Symbol};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Definition {
    pub symbol: String,
    pub expr: String,
}

impl Definition {
    fn new(symbol: impl Into<String>, expr: &Expr) -> Self {
        Definition { symbol: symbol.into(), expr: expr.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub name: String,
    pub coordinates: Vec<String>,
    pub lagrangian: String,
    pub parameters: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HessianSection {
    pub entries: Vec<Vec<String>>,
    pub rank: usize,
    pub exact_rank: Option<usize>,
    /// Coordinate indices with the canonical block first.
    pub permutation: Vec<usize>,
    pub samples: usize,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSection {
    pub canonical: Vec<String>,
    pub noncanonical: Vec<String>,
    pub degeneracy: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InconsistencySection {
    pub coordinate: String,
    pub residual: String,
    pub witness: BTreeMap<String, f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationSection {
    pub verdict: String,
    pub r_f: usize,
    pub independent: Vec<String>,
    pub dependent: Vec<String>,
    pub f_bar: Vec<Vec<String>>,
    pub lambda: Vec<Vec<String>>,
    /// Default gauge; absent when the system is inconsistent.
    pub noncanonical_velocities: Option<Vec<Definition>>,
    pub inconsistency: Option<InconsistencySection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceSection {
    pub constraint_algebra: bool,
    pub generator: bool,
    pub orientation: Option<String>,
    pub multipliers: Option<Vec<Definition>>,
    pub undetermined: usize,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountingSection {
    pub n: usize,
    pub n_p: usize,
    pub n_mu: usize,
    pub r_w: Option<usize>,
    pub times_momenta: bool,
    pub times_rank: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub model: ModelSummary,
    pub seed: u64,
    pub hessian: Option<HessianSection>,
    pub partition: PartitionSection,
    pub momenta: Vec<Definition>,
    pub canonical_velocities: Vec<Definition>,
    pub h0: String,
    pub h_alpha: Vec<Definition>,
    pub f: Vec<Vec<String>>,
    pub g: Vec<String>,
    pub classification: ClassificationSection,
    pub constraints: Vec<Definition>,
    pub correspondence: CorrespondenceSection,
    pub counting_rules: Option<CountingSection>,
}

pub fn binding_map(b: &Binding) -> BTreeMap<String, f64> {
    b.iter().map(|(s, v)| (s.name().to_string(), v)).collect()
}

fn render(m: &[Vec<Expr>]) -> Vec<Vec<String>> {
    m.iter().map(|row| row.iter().map(Expr::to_string).collect()).collect()
}

fn names(symbols: &[Symbol]) -> Vec<String> {
    symbols.iter().map(|s| s.name().to_string()).collect()
}

impl AnalysisReport {
    pub fn build(a: &Analysis) -> Self {
        let sys = &a.system;
        let model = sys.model();
        let cls = &a.classification;
        let non = sys.noncanonical_coordinates();
        let pick = |idx: &[usize]| idx.iter().map(|&i| non[i].name().to_string()).collect::<Vec<_>>();

        let hessian = sys.hessian().map(|h| HessianSection {
            entries: render(&h.w),
            rank: h.rank,
            exact_rank: h.exact_rank,
            permutation: h.permutation.clone(),
            samples: h.samples_used,
            threshold: h.pivot_threshold,
        });
        let velocities = a.noncanonical_velocities().ok().map(|v| {
            sys.noncanonical_velocities().iter().zip(&v).map(|(s, e)| Definition::new(s.name(), e)).collect()
        });
        let inconsistency = cls.inconsistency.as_ref().map(|inc| InconsistencySection {
            coordinate: non[cls.alpha2[inc.row]].name().to_string(),
            residual: inc.residual.to_string(),
            witness: binding_map(&inc.witness),
            value: inc.value,
        });
        let constraints = dirac::build_constraints(sys)
            .phi
            .iter()
            .zip(&non)
            .map(|(phi, q)| Definition::new(format!("phi_{}", q.name()), phi))
            .collect();
        let correspondence = match dirac::verify_correspondence(a) {
            Ok(r) => CorrespondenceSection {
                constraint_algebra: r.constraint_algebra,
                generator: r.generator,
                orientation: Some(r.orientation.as_str().to_string()),
                multipliers: r.multipliers.solution.map(|u| {
                    non.iter().zip(&u).map(|(q, e)| Definition::new(format!("u_{}", q.name()), e)).collect()
                }),
                undetermined: r.multipliers.undetermined,
                failure: None,
            },
            Err(e) => CorrespondenceSection {
                constraint_algebra: false,
                generator: false,
                orientation: None,
                multipliers: None,
                undetermined: 0,
                failure: Some(e.to_string()),
            },
        };
        let counting_rules = MultiTimeSystem::from_partial(sys).ok().and_then(|m| m.counting_rules()).map(|c| CountingSection {
            n: c.n,
            n_p: c.n_p,
            n_mu: c.n_mu,
            r_w: c.r_w,
            times_momenta: c.times_momenta,
            times_rank: c.times_rank,
        });

        AnalysisReport {
            model: ModelSummary {
                name: model.name().to_string(),
                coordinates: names(model.coordinates()),
                lagrangian: model.lagrangian().to_string(),
                parameters: model.parameters().clone(),
            },
            seed: sys.config().seed(),
            hessian,
            partition: PartitionSection {
                canonical: names(&sys.canonical_coordinates()),
                noncanonical: names(&non),
                degeneracy: sys.degeneracy.as_str().to_string(),
            },
            momenta: sys.canonical_momenta().iter().zip(&sys.momenta_defs).map(|(p, e)| Definition::new(p.name(), e)).collect(),
            canonical_velocities: sys
                .canonical_coordinates()
                .iter()
                .zip(&sys.solved_velocities)
                .map(|(q, e)| Definition::new(singmech::symbolic::velocity_name(q.name()), e))
                .collect(),
            h0: sys.h0.to_string(),
            h_alpha: non.iter().zip(&sys.h_alpha).map(|(q, e)| Definition::new(format!("H_{}", q.name()), e)).collect(),
            f: render(&a.fg.f),
            g: a.fg.g.iter().map(Expr::to_string).collect(),
            classification: ClassificationSection {
                verdict: cls.verdict.as_str().to_string(),
                r_f: cls.r_f,
                independent: pick(&cls.alpha1),
                dependent: pick(&cls.alpha2),
                f_bar: render(&cls.f_bar),
                lambda: render(&cls.lambda),
                noncanonical_velocities: velocities,
                inconsistency,
            },
            constraints,
            correspondence,
            counting_rules,
        }
    }

    /// Every rendered expression, for round-trip checks.
    pub fn expressions(&self) -> Vec<&str> {
        let mut out: Vec<&str> = vec![&self.model.lagrangian, &self.h0];
        let defs = self
            .momenta
            .iter()
            .chain(&self.canonical_velocities)
            .chain(&self.h_alpha)
            .chain(&self.constraints)
            .chain(self.classification.noncanonical_velocities.iter().flatten())
            .chain(self.correspondence.multipliers.iter().flatten());
        out.extend(defs.map(|d| d.expr.as_str()));
        let c = &self.classification;
        let matrices = self.hessian.iter().map(|h| &h.entries).chain([&self.f, &c.f_bar, &c.lambda]);
        out.extend(matrices.flatten().flatten().map(String::as_str));
        out.extend(self.g.iter().map(String::as_str));
        out.extend(c.inconsistency.iter().map(|i| i.residual.as_str()));
        out
    }
}
