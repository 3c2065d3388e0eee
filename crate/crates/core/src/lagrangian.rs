//! Lagrangian models, the velocity Hessian and its rank.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::symbolic::{parse, Compiled, Expr, ExprError, Number, Sampler, Symbol, SymbolKind, SymbolTable};

/// A named coordinate list and a Lagrangian over the coordinates, their
/// velocities, `t` and named parameters.
///
/// Parameter values are substituted into the Lagrangian at construction, so
/// every derived expression is over `(t, q, q_dot, p)` only.
#[derive(Debug, Clone)]
pub struct LagrangianModel {
    name: String,
    coordinates: Vec<Symbol>,
    velocities: Vec<Symbol>,
    momenta: Vec<Symbol>,
    lagrangian: Expr,
    parameters: BTreeMap<String, f64>,
    symbols: SymbolTable,
}

impl LagrangianModel {
    pub fn new(
        name: impl Into<String>,
        coordinates: &[&str],
        lagrangian: &str,
        parameters: BTreeMap<String, f64>,
    ) -> Result<Self> {
        if coordinates.is_empty() {
            return Err(Error::Validation("at least one coordinate is required".into()));
        }
        let mut symbols = SymbolTable::new();
        symbols.insert(Symbol::time()).map_err(|e| Error::Validation(e.to_string()))?;
        for c in coordinates {
            if !is_identifier(c) {
                return Err(Error::Validation(format!("`{c}` is not a valid coordinate name")));
            }
            symbols.insert_coordinate(c).map_err(|_| Error::Validation(format!("duplicate coordinate `{c}`")))?;
        }
        for name in parameters.keys() {
            if !is_identifier(name) {
                return Err(Error::Validation(format!("`{name}` is not a valid parameter name")));
            }
            symbols
                .insert(Symbol::parameter(name))
                .map_err(|_| Error::Validation(format!("parameter `{name}` clashes with another symbol")))?;
        }
        let raw = parse(lagrangian, &symbols).map_err(|e| match e {
            ExprError::UnknownSymbol(s) => Error::Validation(format!("undeclared symbol `{s}` in lagrangian")),
            other => Error::Expr(other),
        })?;
        if raw.contains_kind(SymbolKind::Momentum) {
            return Err(Error::Validation("the lagrangian may not reference momenta".into()));
        }
        let values: BTreeMap<Symbol, Expr> = parameters
            .iter()
            .map(|(k, v)| (Symbol::parameter(k), Expr::Num(Number::from_f64(*v))))
            .collect();
        let lagrangian = raw.substitute(&values);
        Ok(LagrangianModel {
            name: name.into(),
            coordinates: coordinates.iter().map(|c| Symbol::coordinate(c)).collect(),
            velocities: coordinates.iter().map(|c| Symbol::velocity_of(c)).collect(),
            momenta: coordinates.iter().map(|c| Symbol::momentum_of(c)).collect(),
            lagrangian,
            parameters,
            symbols,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.coordinates.len()
    }

    pub fn coordinates(&self) -> &[Symbol] {
        &self.coordinates
    }

    pub fn velocities(&self) -> &[Symbol] {
        &self.velocities
    }

    pub fn momenta(&self) -> &[Symbol] {
        &self.momenta
    }

    pub fn time(&self) -> Symbol {
        Symbol::time()
    }

    pub fn lagrangian(&self) -> &Expr {
        &self.lagrangian
    }

    pub fn parameters(&self) -> &BTreeMap<String, f64> {
        &self.parameters
    }

    /// Symbols accepted by `parse` for this model: `t`, and `x`, `x_dot`,
    /// `p_x` per coordinate (parameters are already substituted).
    pub fn symbols(&self) -> SymbolTable {
        self.symbols.iter().filter(|s| s.kind() != SymbolKind::Parameter).cloned().collect()
    }

    /// Parses an expression over this model's symbols, substituting
    /// parameter values.
    pub fn parse(&self, text: &str) -> Result<Expr> {
        let raw = parse(text, &self.symbols)?;
        let values: BTreeMap<Symbol, Expr> = self
            .parameters
            .iter()
            .map(|(k, v)| (Symbol::parameter(k), Expr::Num(Number::from_f64(*v))))
            .collect();
        Ok(raw.substitute(&values))
    }

    /// Phase-space-with-velocities variable order: `t, q.., q_dot..`.
    pub fn configuration_variables(&self) -> Vec<Symbol> {
        std::iter::once(self.time()).chain(self.coordinates.iter().cloned()).chain(self.velocities.iter().cloned()).collect()
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
        && crate::symbolic::Func::from_name(s).is_none()
        && s != crate::symbolic::TIME_NAME
}

/// `W_AB = d^2 L / d q_dot^A d q_dot^B`.
///
/// Fails with `UnsupportedLagrangian` when an entry still depends on a
/// velocity, i.e. the Lagrangian is more than quadratic in velocities.
pub fn hessian(model: &LagrangianModel) -> Result<Matrix<Expr>> {
    let first: Vec<Expr> = model.velocities().iter().map(|v| model.lagrangian().diff(v)).collect();
    let mut w = Vec::with_capacity(model.n());
    for (a, d) in first.iter().enumerate() {
        let mut row = Vec::with_capacity(model.n());
        for (b, v) in model.velocities().iter().enumerate() {
            let entry = d.diff(v);
            if entry.contains_kind(SymbolKind::Velocity) {
                return Err(Error::UnsupportedLagrangian(format!(
                    "Hessian entry W[{a}][{b}] = {entry} depends on velocities"
                )));
            }
            row.push(entry);
        }
        w.push(row);
    }
    Ok(w)
}

/// Sampling configuration for rank decisions.
#[derive(Debug, Clone, PartialEq)]
pub struct RankConfig {
    pub samples: usize,
    pub seed: u64,
    pub threshold: f64,
}

impl Default for RankConfig {
    fn default() -> Self {
        RankConfig { samples: 16, seed: 42, threshold: 1e-10 }
    }
}

impl RankConfig {
    pub(crate) fn sampler(&self) -> Sampler {
        Sampler { seed: self.seed, samples: self.samples, range: 2.0, exclusion: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HessianReport {
    pub w: Matrix<Expr>,
    pub rank: usize,
    /// Coordinate indices, canonical block first.
    pub permutation: Vec<usize>,
    pub samples_used: usize,
    pub pivot_threshold: f64,
    pub seed: u64,
    /// Exact rank when every entry is a rational constant.
    pub exact_rank: Option<usize>,
}

/// Split of coordinate indices into the canonical block (with momenta) and
/// the noncanonical remainder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoordinatePartition {
    canonical: Vec<usize>,
    noncanonical: Vec<usize>,
}

impl CoordinatePartition {
    /// Builds a partition from an explicit canonical set.
    ///
    /// The analysis pipeline always derives the canonical set from the
    /// Hessian rank; this constructor exists for diagnostics that need a
    /// different momentum count.
    pub fn with_canonical(n: usize, canonical: &[usize]) -> Result<Self> {
        let mut seen = vec![false; n];
        for &i in canonical {
            if i >= n || seen[i] {
                return Err(Error::Config(format!("invalid canonical index {i} for n = {n}")));
            }
            seen[i] = true;
        }
        Ok(CoordinatePartition {
            canonical: canonical.to_vec(),
            noncanonical: (0..n).filter(|i| !seen[*i]).collect(),
        })
    }

    pub fn canonical(&self) -> &[usize] {
        &self.canonical
    }

    pub fn noncanonical(&self) -> &[usize] {
        &self.noncanonical
    }

    pub fn n(&self) -> usize {
        self.canonical.len() + self.noncanonical.len()
    }

    /// Number of reduced momenta.
    pub fn n_p(&self) -> usize {
        self.canonical.len()
    }

    pub fn permutation(&self) -> Vec<usize> {
        self.canonical.iter().chain(&self.noncanonical).copied().collect()
    }
}

pub fn compile_matrix(m: &Matrix<Expr>, vars: &[Symbol]) -> Result<Matrix<Compiled>> {
    m.iter().map(|row| row.iter().map(|e| e.compile(vars).map_err(Error::from)).collect()).collect()
}

pub fn submatrix<T: Clone>(m: &Matrix<T>, rows: &[usize], cols: &[usize]) -> Matrix<T> {
    rows.iter().map(|&i| cols.iter().map(|&j| m[i][j].clone()).collect()).collect()
}

/// Chooses a leading principal minor of maximal rank that stays
/// nonsingular at every sample.
///
/// The pivot columns of full-pivoting elimination at the first sample fix the
/// candidate index set; for a symmetric or antisymmetric matrix the principal
/// block on a column basis is nonsingular. Every further sample must
/// reproduce the rank and keep that block at full rank.
pub(crate) fn constant_rank_pivots(
    m: &Matrix<Expr>,
    vars: &[Symbol],
    config: &RankConfig,
    matrix: &'static str,
) -> Result<Vec<usize>> {
    let n = m.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let compiled = compile_matrix(m, vars)?;
    let sampler = config.sampler();
    let mut rng = sampler.rng();
    let mut pivots: Option<Vec<usize>> = None;
    for k in 0..config.samples.max(1) {
        let binding = sampler.draw_binding(&mut rng, vars);
        let values: Vec<f64> = vars.iter().map(|s| binding.get(s).unwrap()).collect();
        let numeric = linalg::evaluate_matrix(&compiled, &values)?;
        let full = linalg::rank_full_pivot(&numeric, config.threshold);
        match &pivots {
            None => {
                let mut cols = full.cols.clone();
                cols.sort_unstable();
                pivots = Some(cols);
            }
            Some(cols) => {
                if full.rank != cols.len() {
                    return Err(Error::NonConstantRank {
                        matrix,
                        detail: format!("rank {} at sample 0 but {} at sample {k}", cols.len(), full.rank),
                    });
                }
            }
        }
        let cols = pivots.as_ref().unwrap();
        let scale = numeric.iter().flatten().fold(0.0_f64, |a, x| a.max(x.abs()));
        let block = submatrix(&numeric, cols, cols);
        let block_rank = rank_with_scale(&block, config.threshold, scale);
        if block_rank != cols.len() {
            return Err(Error::NonConstantRank {
                matrix,
                detail: format!("leading block {cols:?} is singular at sample {k}"),
            });
        }
    }
    Ok(pivots.unwrap_or_default())
}

fn rank_with_scale(block: &Matrix<f64>, threshold: f64, scale: f64) -> usize {
    let local = block.iter().flatten().fold(0.0_f64, |a, x| a.max(x.abs()));
    if local == 0.0 {
        return 0;
    }
    linalg::rank_full_pivot(block, threshold * scale / local).rank
}

/// Hessian, its rank and the canonical/noncanonical split with the number of
/// momenta fixed to the rank.
pub fn rank_and_partition(model: &LagrangianModel, config: &RankConfig) -> Result<(HessianReport, CoordinatePartition)> {
    let w = hessian(model)?;
    let vars = model.configuration_variables();
    let canonical = constant_rank_pivots(&w, &vars, config, "Hessian")?;
    let partition = CoordinatePartition::with_canonical(model.n(), &canonical)?;
    let report = HessianReport {
        exact_rank: linalg::exact_rank(&w),
        rank: canonical.len(),
        permutation: partition.permutation(),
        samples_used: config.samples.max(1),
        pivot_threshold: config.threshold,
        seed: config.seed,
        w,
    };
    Ok((report, partition))
}
