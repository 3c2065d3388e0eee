//! Reduced equations of motion, fixed-step integration, observable
//! evolution, and reference solutions for equivalence checks.

use crate::bracket::{Analysis, Observable, Verdict};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::lagrangian::{self, compile_matrix, LagrangianModel};
use crate::linalg::{self, Matrix};
use crate::symbolic::{Compiled, Expr, Symbol};

/// A point of the reduced phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub q_canonical: Vec<f64>,
    pub p: Vec<f64>,
    pub q_noncanonical: Vec<f64>,
}

impl State {
    pub fn from_vector(t: f64, y: &[f64], r: usize) -> Self {
        State {
            t,
            q_canonical: y[..r].to_vec(),
            p: y[r..2 * r].to_vec(),
            q_noncanonical: y[2 * r..].to_vec(),
        }
    }

    /// `q_i.., p_i.., q_a..`.
    pub fn vector(&self) -> Vec<f64> {
        let mut v = self.q_canonical.clone();
        v.extend(&self.p);
        v.extend(&self.q_noncanonical);
        v
    }

    /// `t` followed by [`Self::vector`], the argument order of compiled
    /// phase-space expressions.
    pub fn point(&self) -> Vec<f64> {
        let mut v = vec![self.t];
        v.extend(self.vector());
        v
    }
}

/// Positions and velocities of every coordinate, in model order.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub t0: f64,
    pub q: Vec<f64>,
    pub q_dot: Vec<f64>,
}

/// Reduced state with momenta taken from their Lagrangian definitions.
pub fn initial_state(analysis: &Analysis, init: &InitialData) -> Result<State> {
    let sys = &analysis.system;
    let model = sys.model();
    if init.q.len() != model.n() || init.q_dot.len() != model.n() {
        return Err(Error::Config(format!("initial data needs {} positions and velocities", model.n())));
    }
    let mut vars = model.configuration_variables();
    vars.extend(sys.canonical_momenta());
    let mut values = vec![init.t0];
    values.extend(&init.q);
    values.extend(&init.q_dot);
    values.extend(vec![0.0; sys.partition().n_p()]);
    let p = sys
        .momenta_defs
        .iter()
        .map(|e| e.compile(&vars)?.eval(&values))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(State {
        t: init.t0,
        q_canonical: sys.partition().canonical().iter().map(|&i| init.q[i]).collect(),
        p,
        q_noncanonical: sys.partition().noncanonical().iter().map(|&a| init.q[a]).collect(),
    })
}

/// Right-hand sides of the reduced equations, in state order.
///
/// `q_dot^i = {q^i, H0} + {q^i, H_b} q_dot^b`, `p_dot_i = {p_i, H0} + {p_i, H_b} q_dot^b`,
/// with `q_dot^a` from the solved `F`/`G` system.
pub fn reduced_rhs_exprs(analysis: &Analysis) -> Result<Vec<Expr>> {
    if analysis.verdict() == Verdict::Inconsistent {
        return Err(Error::InconsistentSystem);
    }
    let sys = &analysis.system;
    let v = analysis.noncanonical_velocities()?;
    let mut out = Vec::new();
    for p in sys.canonical_momenta() {
        out.push(Expr::sum(
            std::iter::once(sys.h0.diff(&p)).chain(sys.h_alpha.iter().zip(&v).map(|(h, v)| &h.diff(&p) * v)),
        ));
    }
    for q in sys.canonical_coordinates() {
        out.push(-Expr::sum(
            std::iter::once(sys.h0.diff(&q)).chain(sys.h_alpha.iter().zip(&v).map(|(h, v)| &h.diff(&q) * v)),
        ));
    }
    out.extend(v);
    Ok(out)
}

/// Hamilton's equations `(dH/dp, -dH/dq)` for an arbitrary Hamiltonian.
pub fn hamilton_equations(h: &Expr, q: &[Symbol], p: &[Symbol]) -> Vec<Expr> {
    p.iter().map(|p| h.diff(p)).chain(q.iter().map(|q| -h.diff(q))).collect()
}

/// Compiled reduced equations.
#[derive(Debug, Clone)]
pub struct ReducedEquations {
    pub exprs: Vec<Expr>,
    compiled: Vec<Compiled>,
    r: usize,
}

impl ReducedEquations {
    pub fn new(analysis: &Analysis) -> Result<Self> {
        let exprs = reduced_rhs_exprs(analysis)?;
        let vars = analysis.system.phase_variables();
        let compiled = exprs.iter().map(|e| e.compile(&vars)).collect::<std::result::Result<_, _>>()?;
        Ok(ReducedEquations { exprs, compiled, r: analysis.system.partition().n_p() })
    }

    pub fn canonical_count(&self) -> usize {
        self.r
    }

    pub fn dimension(&self) -> usize {
        self.exprs.len()
    }

    pub fn eval(&self, t: f64, y: &[f64]) -> Result<Vec<f64>> {
        let mut point = Vec::with_capacity(y.len() + 1);
        point.push(t);
        point.extend_from_slice(y);
        self.compiled.iter().map(|c| c.eval(&point).map_err(Error::from)).collect()
    }

    pub fn at(&self, s: &State) -> Result<State> {
        Ok(State::from_vector(s.t, &self.eval(s.t, &s.vector())?, self.r))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk4,
    Euler,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Rk4 => "rk4",
            Method::Euler => "euler",
        }
    }

    pub fn from_name(name: &str) -> Option<Method> {
        match name.to_ascii_lowercase().as_str() {
            "rk4" => Some(Method::Rk4),
            "euler" => Some(Method::Euler),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IntegratorConfig {
    pub method: Method,
    pub dt: f64,
    pub t_end: f64,
    pub observables: Vec<Observable>,
}

impl IntegratorConfig {
    pub fn rk4(dt: f64, t_end: f64) -> Self {
        IntegratorConfig { method: Method::Rk4, dt, t_end, observables: Vec::new() }
    }
}

/// `t0, t0 + dt, ...` up to `t_end`, with a shorter last step when `dt`
/// does not divide the interval.
pub fn time_grid(t0: f64, t_end: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Config(format!("dt must be positive and finite, got {dt}")));
    }
    if !(t_end - t0 >= dt) {
        return Err(Error::Config(format!("dt = {dt} exceeds the interval [{t0}, {t_end}]")));
    }
    let span = t_end - t0;
    let full = (span / dt * (1.0 + 1e-12)).floor() as usize;
    let mut grid: Vec<f64> = (0..=full).map(|k| t0 + k as f64 * dt).collect();
    let last = *grid.last().unwrap();
    if t_end - last > 1e-9 * dt {
        grid.push(t_end);
    } else {
        *grid.last_mut().unwrap() = t_end;
    }
    Ok(grid)
}

/// Generic fixed-step integration of `y' = f(t, y)` over a grid.
pub fn integrate_grid<F>(f: F, y0: Vec<f64>, grid: &[f64], method: Method) -> Result<Vec<Vec<f64>>>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
{
    let mut out = Vec::with_capacity(grid.len());
    out.push(y0);
    for (step, w) in grid.windows(2).enumerate() {
        let (t, h) = (w[0], w[1] - w[0]);
        let y = out.last().unwrap();
        let next = match method {
            Method::Euler => axpy(y, h, &f(t, y)?),
            Method::Rk4 => {
                let k1 = f(t, y)?;
                let k2 = f(t + h / 2.0, &axpy(y, h / 2.0, &k1))?;
                let k3 = f(t + h / 2.0, &axpy(y, h / 2.0, &k2))?;
                let k4 = f(t + h, &axpy(y, h, &k3))?;
                y.iter()
                    .enumerate()
                    .map(|(i, yi)| yi + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                    .collect()
            }
        };
        if next.iter().any(|x| !x.is_finite()) {
            return Err(Error::StepFailure { step: step + 1, t: w[1], last_good: y.clone() });
        }
        out.push(next);
    }
    Ok(out)
}

fn axpy(y: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    y.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<State>,
    pub dt: f64,
    pub method: Method,
    /// Recorded observables: name and one value per state.
    pub observables: Vec<(String, Vec<f64>)>,
    /// `|H0(t) - H0(t0)|` per state.
    pub h0_drift: Vec<f64>,
}

impl Trajectory {
    pub fn last(&self) -> &State {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    pub fn max_h0_drift(&self) -> f64 {
        self.h0_drift.iter().fold(0.0, |a, b| a.max(*b))
    }

    /// Largest componentwise difference against another trajectory on the
    /// same grid.
    pub fn max_difference(&self, other: &Trajectory) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .flat_map(|(a, b)| a.vector().into_iter().zip(b.vector()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// Evaluates an expression over the reduced phase variables at each state.
pub fn sample_along(e: &Expr, analysis: &Analysis, states: &[State]) -> Result<Vec<f64>> {
    let c = e.compile(&analysis.system.phase_variables())?;
    states.iter().map(|s| c.eval(&s.point()).map_err(Error::from)).collect()
}

pub fn integrate(analysis: &Analysis, init: &State, cfg: &IntegratorConfig) -> Result<Trajectory> {
    let eqs = ReducedEquations::new(analysis)?;
    let grid = time_grid(init.t, cfg.t_end, cfg.dt)?;
    let ys = integrate_grid(|t, y| eqs.eval(t, y), init.vector(), &grid, cfg.method)?;
    let r = eqs.canonical_count();
    let states: Vec<State> = grid.iter().zip(&ys).map(|(t, y)| State::from_vector(*t, y, r)).collect();
    let h0 = sample_along(&analysis.system.h0, analysis, &states)?;
    let observables = cfg
        .observables
        .iter()
        .map(|o| Ok((o.name.clone(), sample_along(&o.expr, analysis, &states)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        h0_drift: h0.iter().map(|v| (v - h0[0]).abs()).collect(),
        states,
        dt: cfg.dt,
        method: cfg.method,
        observables,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservableResidual {
    pub residuals: Vec<f64>,
    pub max_abs: f64,
}

/// Compares the finite-difference rate of `A` along the trajectory with
/// `dA/dt + bracket(A, H0)` at each step midpoint.
pub fn evolve_observable(a: &Observable, analysis: &Analysis, traj: &Trajectory) -> Result<ObservableResidual> {
    let rate = Expr::sum([a.expr.diff(&Symbol::time()), analysis.bracket(&a.expr, &analysis.system.h0)?]);
    let vars = analysis.system.phase_variables();
    let value = a.expr.compile(&vars)?;
    let rate = rate.compile(&vars)?;
    let mut residuals = Vec::with_capacity(traj.states.len().saturating_sub(1));
    for w in traj.states.windows(2) {
        let (x, y) = (w[0].point(), w[1].point());
        let h = w[1].t - w[0].t;
        let fd = (value.eval(&y)? - value.eval(&x)?) / h;
        let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| (a + b) / 2.0).collect();
        residuals.push(fd - rate.eval(&mid)?);
    }
    let max_abs = residuals.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    Ok(ObservableResidual { residuals, max_abs })
}

/// Reference solution: Euler-Lagrange integration for regular models,
/// registered closed forms for the bundled singular fixtures.
pub fn oracle_trajectory(model: &LagrangianModel, init: &InitialData, cfg: &IntegratorConfig) -> Result<Trajectory> {
    let grid = time_grid(init.t0, cfg.t_end, cfg.dt)?;
    let w = lagrangian::hessian(model)?;
    if linalg::exact_rank(&w) == Some(model.n()) || is_regular(model)? {
        return euler_lagrange(model, init, &grid, cfg);
    }
    closed_form(model, init, &grid, cfg)
}

fn is_regular(model: &LagrangianModel) -> Result<bool> {
    match lagrangian::rank_and_partition(model, &Default::default()) {
        Ok((rep, _)) => Ok(rep.rank == model.n()),
        Err(Error::NonConstantRank { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

/// `W q_ddot = dL/dq - M q_dot - d^2L/(dq_dot dt)` with `M_AB = d^2L/(dq_dot^A dq^B)`.
fn euler_lagrange(model: &LagrangianModel, init: &InitialData, grid: &[f64], cfg: &IntegratorConfig) -> Result<Trajectory> {
    let n = model.n();
    let vars = model.configuration_variables();
    let l = model.lagrangian();
    let dl_dv: Vec<Expr> = model.velocities().iter().map(|v| l.diff(v)).collect();
    let w = compile_matrix(&lagrangian::hessian(model)?, &vars)?;
    let mixed: Matrix<Expr> =
        dl_dv.iter().map(|d| model.coordinates().iter().map(|q| d.diff(q)).collect()).collect();
    let mixed = compile_matrix(&mixed, &vars)?;
    let force: Vec<Compiled> = model.coordinates().iter().map(|q| l.diff(q).compile(&vars)).collect::<std::result::Result<_, _>>()?;
    let explicit: Vec<Compiled> =
        dl_dv.iter().map(|d| d.diff(&Symbol::time()).compile(&vars)).collect::<std::result::Result<_, _>>()?;
    let momenta: Vec<Compiled> = dl_dv.iter().map(|d| d.compile(&vars)).collect::<std::result::Result<_, _>>()?;

    let rhs = |t: f64, y: &[f64]| -> Result<Vec<f64>> {
        let mut point = vec![t];
        point.extend_from_slice(y);
        let wm = linalg::evaluate_matrix(&w, &point)?;
        let mm = linalg::evaluate_matrix(&mixed, &point)?;
        let b = (0..n)
            .map(|a| {
                let m_v: f64 = (0..n).map(|c| mm[a][c] * y[n + c]).sum();
                Ok(force[a].eval(&point)? - m_v - explicit[a].eval(&point)?)
            })
            .collect::<Result<Vec<f64>>>()?;
        let acc = linalg::solve(wm, b).ok_or(Error::SingularMinor)?;
        Ok(y[n..].iter().copied().chain(acc).collect())
    };
    let y0: Vec<f64> = init.q.iter().chain(&init.q_dot).copied().collect();
    let ys = integrate_grid(rhs, y0, grid, cfg.method)?;
    let states = grid
        .iter()
        .zip(&ys)
        .map(|(&t, y)| {
            let mut point = vec![t];
            point.extend_from_slice(y);
            let p = momenta.iter().map(|m| m.eval(&point)).collect::<std::result::Result<Vec<_>, _>>()?;
            Ok(State { t, q_canonical: y[..n].to_vec(), p, q_noncanonical: Vec::new() })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory { h0_drift: vec![0.0; states.len()], states, dt: cfg.dt, method: cfg.method, observables: Vec::new() })
}

fn registered(model: &LagrangianModel) -> Option<&'static str> {
    ["S1", "S2", "G1"].into_iter().find(|name| {
        let fixture = fixtures::model(name);
        fixture.coordinates() == model.coordinates() && fixture.lagrangian() == model.lagrangian()
    })
}

fn closed_form(model: &LagrangianModel, init: &InitialData, grid: &[f64], cfg: &IntegratorConfig) -> Result<Trajectory> {
    let tag = registered(model).ok_or_else(|| Error::NoOracle(model.name().to_string()))?;
    let q = &init.q;
    let states = grid
        .iter()
        .map(|&t| {
            let s = t - init.t0;
            let (c, sn) = (s.cos(), s.sin());
            match tag {
                "G1" => State { t, q_canonical: vec![q[0] + init.q_dot[0] * s], p: vec![init.q_dot[0]], q_noncanonical: vec![q[1]] },
                _ => {
                    let mut q_non = vec![q[0] * c + q[1] * sn, q[1] * c - q[0] * sn];
                    if tag == "S2" {
                        q_non.push(q[2]);
                    }
                    State { t, q_canonical: Vec::new(), p: Vec::new(), q_noncanonical: q_non }
                }
            }
        })
        .collect::<Vec<_>>();
    Ok(Trajectory { h0_drift: vec![0.0; states.len()], states, dt: cfg.dt, method: cfg.method, observables: Vec::new() })
}
