//! The extended phase space with momenta for every coordinate, primary
//! constraints `Phi_a = p_a + H_a`, and the correspondence with the reduced
//! picture.

use std::collections::BTreeMap;

use crate::bracket::{self, Analysis, Verdict};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::partial::PartialHamiltonianSystem;
use crate::symbolic::{Binding, Expr, Symbol, ZeroVerdict};

/// Poisson bracket over all `n` canonical pairs `(q^A, p_A)`.
pub fn poisson_full(a: &Expr, b: &Expr, system: &PartialHamiltonianSystem) -> Expr {
    let m = system.model();
    bracket::poisson(a, b, m.coordinates(), m.momenta())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    pub phi: Vec<Expr>,
}

pub fn build_constraints(system: &PartialHamiltonianSystem) -> ConstraintSet {
    let phi = system.extra_momenta().iter().zip(&system.h_alpha).map(|(p, h)| Expr::sym(p) + h.clone()).collect();
    ConstraintSet { phi }
}

/// `H0 + u^a Phi_a` with one multiplier symbol per constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct TotalHamiltonian {
    pub expr: Expr,
    pub multipliers: Vec<Symbol>,
}

pub fn total_hamiltonian(system: &PartialHamiltonianSystem, constraints: &ConstraintSet) -> TotalHamiltonian {
    let multipliers: Vec<Symbol> =
        system.noncanonical_coordinates().iter().map(|q| Symbol::parameter(&format!("u_{}", q.name()))).collect();
    let expr = Expr::sum(
        std::iter::once(system.h0.clone())
            .chain(multipliers.iter().zip(&constraints.phi).map(|(u, phi)| &Expr::sym(u) * phi)),
    );
    TotalHamiltonian { expr, multipliers }
}

/// `p_a -> -H_a`.
pub fn on_surface(e: &Expr, system: &PartialHamiltonianSystem) -> Expr {
    let m: BTreeMap<Symbol, Expr> =
        system.extra_momenta().into_iter().zip(system.h_alpha.iter().map(|h| -h.clone())).collect();
    e.substitute(&m)
}

/// How `D_a H0` relates to `{Phi_a, H0}` taken literally.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// `D_a H0 = {Phi_a, H0}`.
    Same,
    /// `D_a H0 = -{Phi_a, H0}`; only the opposite orientation holds.
    Opposite,
    /// Both orientations hold (both sides vanish).
    Both,
}

impl Orientation {
    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Same => "same",
            Orientation::Opposite => "opposite",
            Orientation::Both => "both",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierSolution {
    /// Multipliers in the default gauge; `None` when the system is insoluble.
    pub solution: Option<Vec<Expr>>,
    /// Number of multipliers left free.
    pub undetermined: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceReport {
    /// `F_ab = {Phi_a, Phi_b}`.
    pub constraint_algebra: bool,
    /// `D_a H0 = {H0, Phi_a} - dPhi_a/dt`.
    pub generator: bool,
    pub orientation: Orientation,
    pub multipliers: MultiplierSolution,
}

fn require(check: &'static str, verdict: ZeroVerdict) -> Result<()> {
    match verdict {
        ZeroVerdict::NonZero { witness, .. } => Err(Error::CorrespondenceFailure { check, witness }),
        _ => Ok(()),
    }
}

/// Checks the constraint algebra, the generator identity and the multiplier
/// equations `{Phi_a, H0} + {Phi_a, Phi_b} u^b = 0` against the reduced
/// system `F q_dot = G`.
pub fn verify_correspondence(analysis: &Analysis) -> Result<CorrespondenceReport> {
    let sys = &analysis.system;
    let cfg = sys.config();
    let constraints = build_constraints(sys);
    let phi = &constraints.phi;
    let t = Symbol::time();
    let m = phi.len();
    let c: Matrix<Expr> = (0..m).map(|a| (0..m).map(|b| poisson_full(&phi[a], &phi[b], sys)).collect()).collect();
    for a in 0..m {
        for b in 0..m {
            require("constraint-algebra", cfg.check_zero(&(&analysis.fg.f[a][b] - &c[a][b])))?;
        }
    }
    let phi_h0: Vec<Expr> = phi.iter().map(|f| poisson_full(f, &sys.h0, sys)).collect();
    let mut same = true;
    let mut opposite = true;
    for a in 0..m {
        let g = &analysis.fg.g[a];
        let corrected = Expr::sum([g.clone(), phi_h0[a].clone(), phi[a].diff(&t)]);
        require("generator", cfg.check_zero(&corrected))?;
        same &= cfg.check_zero(&(g - &phi_h0[a])).is_zero();
        opposite &= cfg.check_zero(&(g + &phi_h0[a])).is_zero();
    }
    let orientation = match (same, opposite) {
        (true, true) => Orientation::Both,
        (true, false) => Orientation::Same,
        _ => Orientation::Opposite,
    };

    let cls = &analysis.classification;
    let multipliers = if cls.verdict == Verdict::Inconsistent {
        // the dependent rows of C must also leave {Phi, H0} incompatible
        let inc = cls.inconsistency.as_ref().expect("inconsistent verdict carries its witness");
        let l = cls.alpha2.iter().position(|&x| x == inc.row).unwrap();
        let residual = &phi_h0[inc.row]
            - &Expr::sum(cls.alpha1.iter().enumerate().map(|(k, &a1)| &cls.lambda[k][l] * &phi_h0[a1]));
        if cfg.check_zero(&residual).is_zero() {
            return Err(Error::CorrespondenceFailure { check: "multipliers", witness: inc.witness.clone() });
        }
        MultiplierSolution { solution: None, undetermined: m - cls.r_f }
    } else {
        let u = analysis.noncanonical_velocities()?;
        for a in 0..m {
            let eq = Expr::sum(std::iter::once(phi_h0[a].clone()).chain((0..m).map(|b| &c[a][b] * &u[b])));
            require("multipliers", cfg.check_zero(&eq))?;
        }
        MultiplierSolution { solution: Some(u), undetermined: m - cls.r_f }
    };
    Ok(CorrespondenceReport { constraint_algebra: true, generator: true, orientation, multipliers })
}

/// `{A, B} - {A, Phi_a} Cbar^{ab} {Phi_b, B}` with `C_ab = {Phi_a, Phi_b}`.
pub fn dirac_bracket(a: &Expr, b: &Expr, system: &PartialHamiltonianSystem) -> Result<Expr> {
    let phi = build_constraints(system).phi;
    let m = phi.len();
    let c: Matrix<Expr> = (0..m).map(|i| (0..m).map(|j| poisson_full(&phi[i], &phi[j], system)).collect()).collect();
    let c_bar = match linalg::symbolic_inverse(&c, &system.config().sampler()) {
        Ok(inv) => inv,
        Err(Error::SingularMinor) => return Err(Error::SecondClassRequired),
        Err(e) => return Err(e),
    };
    let a_phi: Vec<Expr> = phi.iter().map(|f| poisson_full(a, f, system)).collect();
    let phi_b: Vec<Expr> = phi.iter().map(|f| poisson_full(f, b, system)).collect();
    let mut terms = vec![poisson_full(a, b, system)];
    for i in 0..m {
        for j in 0..m {
            terms.push(-Expr::product([a_phi[i].clone(), c_bar[i][j].clone(), phi_b[j].clone()]));
        }
    }
    Ok(Expr::sum(terms))
}

/// `dA/dt + {A, H0 + u^a Phi_a}` with the multipliers solved, restricted to
/// the constraint surface.
pub fn total_evolution(a: &Expr, analysis: &Analysis) -> Result<Expr> {
    let sys = &analysis.system;
    let total = total_hamiltonian(sys, &build_constraints(sys));
    let u = analysis.noncanonical_velocities()?;
    let rate = a.diff(&Symbol::time()) + poisson_full(a, &total.expr, sys);
    let solved: BTreeMap<Symbol, Expr> = total.multipliers.into_iter().zip(u).collect();
    Ok(on_surface(&rate.substitute(&solved), sys))
}

/// Witness of the first nonzero entry, for reporting.
pub fn first_nonzero(exprs: &[Expr], analysis: &Analysis) -> Option<Binding> {
    exprs.iter().find_map(|e| match analysis.system.config().check_zero(e) {
        ZeroVerdict::NonZero { witness, .. } => Some(witness),
        _ => None,
    })
}
