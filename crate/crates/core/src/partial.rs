//! Partial Legendre transform: reduced momenta, solved canonical velocities,
//! the partial Hamiltonian `H0` and the additional Hamiltonians `H_alpha`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::lagrangian::{self, CoordinatePartition, HessianReport, LagrangianModel, RankConfig};
use crate::linalg;
use crate::symbolic::{is_zero, Expr, Sampler, Symbol, SymbolKind, ZeroVerdict};

/// Settings shared by every zero test of the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub rank: RankConfig,
    pub zero_samples: usize,
    pub tol: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig { rank: RankConfig::default(), zero_samples: 100, tol: 1e-10 }
    }
}

impl AnalysisConfig {
    pub fn with_seed(seed: u64) -> Self {
        let mut c = AnalysisConfig::default();
        c.rank.seed = seed;
        c
    }

    pub fn seed(&self) -> u64 {
        self.rank.seed
    }

    pub fn sampler(&self) -> Sampler {
        Sampler::new(self.rank.seed, self.zero_samples)
    }

    pub fn check_zero(&self, e: &Expr) -> ZeroVerdict {
        is_zero(e, &self.sampler(), self.tol)
    }
}

/// Which form of the degeneracy condition the model satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    /// No noncanonical coordinates.
    Regular,
    /// `W_ab = 0` on the noncanonical block in the original variables.
    Literal,
    /// The noncanonical block is nonzero but its Schur complement vanishes.
    SchurComplement,
}

impl Degeneracy {
    pub fn as_str(self) -> &'static str {
        match self {
            Degeneracy::Regular => "regular",
            Degeneracy::Literal => "literal",
            Degeneracy::SchurComplement => "schur-complement",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PartialHamiltonianSystem {
    model: LagrangianModel,
    partition: CoordinatePartition,
    hessian: Option<HessianReport>,
    config: AnalysisConfig,
    pub momenta_defs: Vec<Expr>,
    /// Canonical velocities over `(t, q, p_i, q_dot^alpha)`.
    pub solved_velocities: Vec<Expr>,
    pub h0: Expr,
    pub h_alpha: Vec<Expr>,
    pub time_dependent: bool,
    pub degeneracy: Degeneracy,
}

/// `p_i = dL/d q_dot^i` for the canonical indices.
pub fn momenta(model: &LagrangianModel, partition: &CoordinatePartition) -> Vec<Expr> {
    partition.canonical().iter().map(|&i| model.lagrangian().diff(&model.velocities()[i])).collect()
}

/// Inverts `p_i = W_ij v^j + W_ia v^a + a_i` for the canonical velocities.
pub fn solve_canonical_velocities(
    model: &LagrangianModel,
    partition: &CoordinatePartition,
    momenta: &[Expr],
    sampler: &Sampler,
) -> Result<Vec<Expr>> {
    let vel = model.velocities();
    let zero_velocities: BTreeMap<Symbol, Expr> = vel.iter().map(|v| (v.clone(), Expr::zero())).collect();
    let mut coeff = Vec::with_capacity(momenta.len());
    let mut offset = Vec::with_capacity(momenta.len());
    for (k, p) in momenta.iter().enumerate() {
        let row: Vec<Expr> = vel.iter().map(|v| p.diff(v)).collect();
        if row.iter().any(|e| e.contains_kind(SymbolKind::Velocity)) {
            return Err(Error::UnsupportedLagrangian(format!(
                "momentum {} = {p} is not affine in the velocities",
                model.momenta()[partition.canonical()[k]].name()
            )));
        }
        offset.push(p.substitute(&zero_velocities));
        coeff.push(row);
    }
    let canon = partition.canonical();
    let block = lagrangian::submatrix(&coeff, &(0..canon.len()).collect::<Vec<_>>(), canon);
    let inverse = linalg::symbolic_inverse(&block, sampler)?;
    let rhs: Vec<Expr> = (0..canon.len())
        .map(|j| {
            let mut terms = vec![Expr::sym(&model.momenta()[canon[j]]), -offset[j].clone()];
            for &a in partition.noncanonical() {
                terms.push(-(&coeff[j][a] * &Expr::sym(&vel[a])));
            }
            Expr::sum(terms)
        })
        .collect();
    Ok(inverse.iter().map(|row| Expr::sum(row.iter().zip(&rhs).map(|(w, r)| w * r))).collect())
}

impl PartialHamiltonianSystem {
    /// Runs the partial Legendre transform with the momentum count fixed to
    /// the Hessian rank.
    pub fn build(model: &LagrangianModel, config: &AnalysisConfig) -> Result<Self> {
        let (report, partition) = lagrangian::rank_and_partition(model, &config.rank)?;
        let mut system = Self::with_partition(model, partition, config)?;
        system.hessian = Some(report);
        Ok(system)
    }

    /// Same construction for an arbitrary canonical set. Diagnostic entry
    /// point: a partition that does not follow the Hessian rank usually ends
    /// in `NondynamicalViolation`.
    pub fn with_partition(model: &LagrangianModel, partition: CoordinatePartition, config: &AnalysisConfig) -> Result<Self> {
        let sampler = config.sampler();
        let momenta_defs = momenta(model, &partition);
        let solved = solve_canonical_velocities(model, &partition, &momenta_defs, &sampler)?;
        let vel = model.velocities();
        let to_momenta: BTreeMap<Symbol, Expr> =
            partition.canonical().iter().zip(&solved).map(|(&i, v)| (vel[i].clone(), v.clone())).collect();
        let l = model.lagrangian();

        let mut h_alpha = Vec::new();
        for &a in partition.noncanonical() {
            h_alpha.push((-l.diff(&vel[a])).substitute(&to_momenta));
        }
        let mut legendre: Vec<Expr> = partition
            .canonical()
            .iter()
            .zip(&solved)
            .map(|(&i, v)| &Expr::sym(&model.momenta()[i]) * v)
            .collect();
        for (k, &a) in partition.noncanonical().iter().enumerate() {
            // dL/dv^a = -H_a after substitution
            legendre.push(-(&h_alpha[k] * &Expr::sym(&vel[a])));
        }
        legendre.push(-l.substitute(&to_momenta));
        let h0 = Expr::sum(legendre);

        let noncanonical_velocities: Vec<Symbol> = partition.noncanonical().iter().map(|&a| vel[a].clone()).collect();
        let targets = h_alpha
            .iter()
            .zip(partition.noncanonical())
            .map(|(h, &a)| (format!("H_{}", model.coordinates()[a].name()), h))
            .chain(std::iter::once(("H0".to_string(), &h0)));
        for (name, h) in targets {
            for v in &noncanonical_velocities {
                let d = h.diff(v);
                if !is_zero(&d, &sampler, config.tol).is_zero() {
                    return Err(Error::NondynamicalViolation { target: name, velocity: v.name().to_string(), derivative: d });
                }
            }
        }
        let drop: BTreeMap<Symbol, Expr> = noncanonical_velocities.iter().map(|v| (v.clone(), Expr::zero())).collect();
        let h0 = h0.substitute(&drop);
        let h_alpha: Vec<Expr> = h_alpha.iter().map(|h| h.substitute(&drop)).collect();

        let degeneracy = if partition.noncanonical().is_empty() {
            Degeneracy::Regular
        } else {
            let w = lagrangian::hessian(model)?;
            let literal = partition
                .noncanonical()
                .iter()
                .all(|&a| partition.noncanonical().iter().all(|&b| is_zero(&w[a][b], &sampler, config.tol).is_zero()));
            if literal {
                Degeneracy::Literal
            } else {
                Degeneracy::SchurComplement
            }
        };
        let t = Symbol::time();
        let time_dependent = std::iter::once(&h0).chain(&h_alpha).any(|h| !is_zero(&h.diff(&t), &sampler, config.tol).is_zero());
        Ok(PartialHamiltonianSystem {
            model: model.clone(),
            partition,
            hessian: None,
            config: config.clone(),
            momenta_defs,
            solved_velocities: solved,
            h0,
            h_alpha,
            time_dependent,
            degeneracy,
        })
    }

    pub fn model(&self) -> &LagrangianModel {
        &self.model
    }

    pub fn partition(&self) -> &CoordinatePartition {
        &self.partition
    }

    pub fn hessian(&self) -> Option<&HessianReport> {
        self.hessian.as_ref()
    }

    pub fn config(&self) -> &AnalysisConfig {
        &self.config
    }

    pub fn canonical_coordinates(&self) -> Vec<Symbol> {
        self.partition.canonical().iter().map(|&i| self.model.coordinates()[i].clone()).collect()
    }

    pub fn canonical_momenta(&self) -> Vec<Symbol> {
        self.partition.canonical().iter().map(|&i| self.model.momenta()[i].clone()).collect()
    }

    pub fn noncanonical_coordinates(&self) -> Vec<Symbol> {
        self.partition.noncanonical().iter().map(|&a| self.model.coordinates()[a].clone()).collect()
    }

    pub fn noncanonical_velocities(&self) -> Vec<Symbol> {
        self.partition.noncanonical().iter().map(|&a| self.model.velocities()[a].clone()).collect()
    }

    /// Momenta of the noncanonical coordinates; they only appear once the
    /// phase space is extended.
    pub fn extra_momenta(&self) -> Vec<Symbol> {
        self.partition.noncanonical().iter().map(|&a| self.model.momenta()[a].clone()).collect()
    }

    /// State layout used by the integrators: `q_i.., p_i.., q_alpha..`.
    pub fn state_symbols(&self) -> Vec<Symbol> {
        let mut s = self.canonical_coordinates();
        s.extend(self.canonical_momenta());
        s.extend(self.noncanonical_coordinates());
        s
    }

    /// `t` followed by [`Self::state_symbols`].
    pub fn phase_variables(&self) -> Vec<Symbol> {
        std::iter::once(Symbol::time()).chain(self.state_symbols()).collect()
    }

    /// Substituting the momentum definitions back into the solved velocities
    /// must give the velocities themselves.
    pub fn round_trip_residuals(&self) -> Vec<Expr> {
        let defs: BTreeMap<Symbol, Expr> =
            self.canonical_momenta().into_iter().zip(self.momenta_defs.iter().cloned()).collect();
        self.partition
            .canonical()
            .iter()
            .zip(&self.solved_velocities)
            .map(|(&i, v)| v.substitute(&defs) - Expr::sym(&self.model.velocities()[i]))
            .collect()
    }
}
