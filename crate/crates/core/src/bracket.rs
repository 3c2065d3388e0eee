//! The `F`/`G` linear system for noncanonical velocities, classification,
//! and the nongauge/gauge brackets.

use crate::error::{Error, Result};
use crate::lagrangian::{self, submatrix};
use crate::linalg::{self, Matrix};
use crate::partial::{AnalysisConfig, PartialHamiltonianSystem};
use crate::symbolic::{Binding, Expr, Symbol, SymbolKind, ZeroVerdict};

/// `F_ab` and `G_a`, indexed by position in the noncanonical list.
#[derive(Debug, Clone, PartialEq)]
pub struct FGSystem {
    pub f: Matrix<Expr>,
    pub g: Vec<Expr>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Regular,
    NongaugeSingular,
    GaugeSingular,
    Inconsistent,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Regular => "regular",
            Verdict::NongaugeSingular => "nongauge",
            Verdict::GaugeSingular => "gauge",
            Verdict::Inconsistent => "inconsistent",
        }
    }

    /// Exit status of an analysis run: only an inconsistent system is a
    /// rejection.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Inconsistent => 1,
            _ => 0,
        }
    }
}

/// Where the compatibility condition on `G` fails.
#[derive(Debug, Clone, PartialEq)]
pub struct Inconsistency {
    /// Position (in the noncanonical list) of the failing dependent row.
    pub row: usize,
    /// `G_a2 - lambda G_a1`, nonzero at `witness`.
    pub residual: Expr,
    pub witness: Binding,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub verdict: Verdict,
    pub r_f: usize,
    /// Positions of the independent block `a1`, in increasing order.
    pub alpha1: Vec<usize>,
    /// Positions of the dependent (gauge) block `a2`.
    pub alpha2: Vec<usize>,
    /// Inverse of `F` restricted to `a1 x a1`.
    pub f_bar: Matrix<Expr>,
    /// `lambda[k][l]`: coefficient of row `alpha1[k]` in row `alpha2[l]` of `F`.
    pub lambda: Matrix<Expr>,
    pub inconsistency: Option<Inconsistency>,
}

/// `{A, B} = sum_i dA/dq^i dB/dp_i - dB/dq^i dA/dp_i` over canonical pairs.
pub fn poisson_reduced(a: &Expr, b: &Expr, system: &PartialHamiltonianSystem) -> Expr {
    poisson(a, b, &system.canonical_coordinates(), &system.canonical_momenta())
}

pub fn poisson(a: &Expr, b: &Expr, q: &[Symbol], p: &[Symbol]) -> Expr {
    Expr::sum(q.iter().zip(p).flat_map(|(q, p)| {
        [&a.diff(q) * &b.diff(p), -(&b.diff(q) * &a.diff(p))]
    }))
}

/// `D_a A = dA/dq^a - dH_a/dt + {A, H_a}` for the noncanonical position `alpha`.
pub fn d_op(a: &Expr, alpha: usize, system: &PartialHamiltonianSystem) -> Expr {
    let q = &system.noncanonical_coordinates()[alpha];
    let h = &system.h_alpha[alpha];
    Expr::sum([a.diff(q), -h.diff(&Symbol::time()), poisson_reduced(a, h, system)])
}

pub fn build_fg(system: &PartialHamiltonianSystem) -> FGSystem {
    let q = system.noncanonical_coordinates();
    let h = &system.h_alpha;
    let f = (0..h.len())
        .map(|a| {
            (0..h.len())
                .map(|b| {
                    if a == b {
                        return Expr::zero();
                    }
                    Expr::sum([h[a].diff(&q[b]), -h[b].diff(&q[a]), poisson_reduced(&h[a], &h[b], system)])
                })
                .collect()
        })
        .collect();
    let g = (0..h.len()).map(|a| d_op(&system.h0, a, system)).collect();
    FGSystem { f, g }
}

pub fn classify(fg: &FGSystem, system: &PartialHamiltonianSystem) -> Result<Classification> {
    let config = system.config();
    let m = fg.g.len();
    if m == 0 {
        return Ok(Classification {
            verdict: Verdict::Regular,
            r_f: 0,
            alpha1: Vec::new(),
            alpha2: Vec::new(),
            f_bar: Vec::new(),
            lambda: Vec::new(),
            inconsistency: None,
        });
    }
    let alpha1 = lagrangian::constant_rank_pivots(&fg.f, &system.phase_variables(), &config.rank, "F")?;
    let alpha2: Vec<usize> = (0..m).filter(|a| !alpha1.contains(a)).collect();
    let f_bar = linalg::symbolic_inverse(&submatrix(&fg.f, &alpha1, &alpha1), &config.sampler())?;
    // F_{a2 b1} = lambda_{a2}^{a1} F_{a1 b1}  =>  lambda = F_{a2 b1} Fbar^{b1 a1}
    let lambda: Matrix<Expr> = (0..alpha1.len())
        .map(|k| {
            alpha2
                .iter()
                .map(|&a2| Expr::sum((0..alpha1.len()).map(|j| &fg.f[a2][alpha1[j]] * &f_bar[j][k])))
                .collect()
        })
        .collect();
    let mut cls = Classification {
        verdict: if alpha2.is_empty() { Verdict::NongaugeSingular } else { Verdict::GaugeSingular },
        r_f: alpha1.len(),
        alpha1,
        alpha2,
        f_bar,
        lambda,
        inconsistency: None,
    };
    for (l, &a2) in cls.alpha2.iter().enumerate() {
        let residual =
            &fg.g[a2] - &Expr::sum(cls.alpha1.iter().enumerate().map(|(k, &a1)| &cls.lambda[k][l] * &fg.g[a1]));
        if let ZeroVerdict::NonZero { witness, value } = config.check_zero(&residual) {
            cls.verdict = Verdict::Inconsistent;
            cls.inconsistency = Some(Inconsistency { row: a2, residual, witness, value });
            break;
        }
    }
    Ok(cls)
}

/// Noncanonical velocities in the default gauge `q_dot^a2 = 0`.
pub fn solve_noncanonical_velocities(fg: &FGSystem, cls: &Classification) -> Result<Vec<Expr>> {
    let zeros = vec![Expr::zero(); cls.alpha2.len()];
    general_noncanonical_velocities(fg, cls, &zeros)
}

/// Noncanonical velocities with the gauge velocities `q_dot^a2` set to
/// `gauge` (one expression per dependent index):
/// `q_dot^a1 = Fbar^{a1 b1} (G_b1 - F_{b1 b2} q_dot^b2)`.
pub fn general_noncanonical_velocities(fg: &FGSystem, cls: &Classification, gauge: &[Expr]) -> Result<Vec<Expr>> {
    match cls.verdict {
        Verdict::Inconsistent => return Err(Error::InconsistentSystem),
        Verdict::Regular => return Ok(Vec::new()),
        _ => {}
    }
    if gauge.len() != cls.alpha2.len() {
        return Err(Error::Config(format!("expected {} gauge velocities, got {}", cls.alpha2.len(), gauge.len())));
    }
    let mut out = vec![Expr::zero(); fg.g.len()];
    let rhs: Vec<Expr> = cls
        .alpha1
        .iter()
        .map(|&b1| {
            let shift = Expr::sum(cls.alpha2.iter().zip(gauge).map(|(&b2, u)| &fg.f[b1][b2] * u));
            &fg.g[b1] - &shift
        })
        .collect();
    for (k, &a1) in cls.alpha1.iter().enumerate() {
        out[a1] = Expr::sum(cls.f_bar[k].iter().zip(&rhs).map(|(w, r)| w * r));
    }
    for (&a2, u) in cls.alpha2.iter().zip(gauge) {
        out[a2] = u.clone();
    }
    Ok(out)
}

/// The nongauge/gauge bracket; the reduced Poisson bracket for regular models.
pub fn bracket(a: &Expr, b: &Expr, system: &PartialHamiltonianSystem, cls: &Classification) -> Result<Expr> {
    if cls.verdict == Verdict::Inconsistent {
        return Err(Error::InconsistentSystem);
    }
    let mut terms = vec![poisson_reduced(a, b, system)];
    let da: Vec<Expr> = cls.alpha1.iter().map(|&x| d_op(a, x, system)).collect();
    let db: Vec<Expr> = cls.alpha1.iter().map(|&x| d_op(b, x, system)).collect();
    for (k, dak) in da.iter().enumerate() {
        if dak.is_zero_constant() {
            continue;
        }
        for (l, dbl) in db.iter().enumerate() {
            terms.push(Expr::product([dak.clone(), cls.f_bar[k][l].clone(), dbl.clone()]));
        }
    }
    Ok(Expr::sum(terms))
}

/// A named function on the reduced phase space `(t, q^i, p_i, q^a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    pub name: String,
    pub expr: Expr,
}

impl Observable {
    /// Rejects velocities and momenta of noncanonical coordinates.
    pub fn new(name: impl Into<String>, expr: Expr, system: &PartialHamiltonianSystem) -> Result<Self> {
        let name = name.into();
        if expr.contains_kind(SymbolKind::Velocity) {
            return Err(Error::Validation(format!("observable `{name}` depends on a velocity")));
        }
        if let Some(p) = system.extra_momenta().iter().find(|p| expr.contains(p)) {
            return Err(Error::Validation(format!(
                "observable `{name}` depends on `{}`, which is not part of the reduced phase space",
                p.name()
            )));
        }
        Ok(Observable { name, expr })
    }

    pub fn parse(name: impl Into<String>, text: &str, system: &PartialHamiltonianSystem) -> Result<Self> {
        let expr = system.model().parse(text)?.simplify();
        Observable::new(name, expr, system)
    }
}

/// Full analysis result: partial Hamiltonians, `F`/`G` and the verdict.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub system: PartialHamiltonianSystem,
    pub fg: FGSystem,
    pub classification: Classification,
}

impl Analysis {
    pub fn run(model: &crate::lagrangian::LagrangianModel, config: &AnalysisConfig) -> Result<Self> {
        Self::from_system(PartialHamiltonianSystem::build(model, config)?)
    }

    pub fn from_system(system: PartialHamiltonianSystem) -> Result<Self> {
        let fg = build_fg(&system);
        let classification = classify(&fg, &system)?;
        Ok(Analysis { system, fg, classification })
    }

    pub fn verdict(&self) -> Verdict {
        self.classification.verdict
    }

    pub fn bracket(&self, a: &Expr, b: &Expr) -> Result<Expr> {
        bracket(a, b, &self.system, &self.classification)
    }

    pub fn noncanonical_velocities(&self) -> Result<Vec<Expr>> {
        solve_noncanonical_velocities(&self.fg, &self.classification)
    }
}
