//! Multi-time dynamics: several generalized times `tau^mu`, one Hamiltonian
//! per time, integrability residuals and integration along paths in
//! `tau`-space.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bracket::poisson;
use crate::dynamics::{integrate_grid, Method};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::partial::{AnalysisConfig, PartialHamiltonianSystem};
use crate::symbolic::{parse, Compiled, Expr, Symbol, SymbolTable, ZeroVerdict, TIME_NAME};

/// Sizes of the source partial system, kept for the counting rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub model: String,
    pub n: usize,
    pub n_p: usize,
    pub r_w: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiTimeSystem {
    pub coordinates: Vec<Symbol>,
    pub momenta: Vec<Symbol>,
    pub times: Vec<Symbol>,
    pub hamiltonians: Vec<Expr>,
    pub provenance: Option<Provenance>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountingRules {
    pub n_mu: usize,
    pub n_p: usize,
    pub n: usize,
    pub r_w: Option<usize>,
    /// `n_mu + n_p = n + 1`.
    pub times_momenta: bool,
    /// `n_mu + r_W = n + 1`; `None` without a rank.
    pub times_rank: Option<bool>,
}

impl MultiTimeSystem {
    /// Times `(t, q^a..)` with Hamiltonians `(H0, H_a..)`.
    pub fn from_partial(system: &PartialHamiltonianSystem) -> Result<Self> {
        let mts = MultiTimeSystem {
            coordinates: system.canonical_coordinates(),
            momenta: system.canonical_momenta(),
            times: std::iter::once(Symbol::time()).chain(system.noncanonical_coordinates()).collect(),
            hamiltonians: std::iter::once(system.h0.clone()).chain(system.h_alpha.iter().cloned()).collect(),
            provenance: Some(Provenance {
                model: system.model().name().to_string(),
                n: system.model().n(),
                n_p: system.partition().n_p(),
                r_w: system.hessian().map(|h| h.rank),
            }),
        };
        let rules = mts.counting_rules().expect("built from a partial system");
        if !rules.times_momenta || rules.times_rank == Some(false) {
            return Err(Error::Config(format!("counting rules violated: {rules:?}")));
        }
        Ok(mts)
    }

    /// Direct construction. A time named `t` is the physical time; the
    /// others are plain symbols.
    pub fn parse(coordinates: &[&str], times: &[&str], hamiltonians: &[&str]) -> Result<Self> {
        if times.is_empty() || times.len() != hamiltonians.len() {
            return Err(Error::Config(format!(
                "need one Hamiltonian per time, got {} times and {} Hamiltonians",
                times.len(),
                hamiltonians.len()
            )));
        }
        let mut table = SymbolTable::new();
        let dup = |n: &str| Error::Config(format!("duplicate symbol `{n}`"));
        for c in coordinates {
            table.insert(Symbol::coordinate(c)).map_err(|_| dup(c))?;
            table.insert(Symbol::momentum_of(c)).map_err(|_| dup(c))?;
        }
        let time_symbols: Vec<Symbol> =
            times.iter().map(|n| if *n == TIME_NAME { Symbol::time() } else { Symbol::coordinate(n) }).collect();
        for s in &time_symbols {
            table.insert(s.clone()).map_err(|_| dup(s.name()))?;
        }
        let hamiltonians =
            hamiltonians.iter().map(|h| Ok(parse(h, &table)?.simplify())).collect::<Result<Vec<_>>>()?;
        Ok(MultiTimeSystem {
            coordinates: coordinates.iter().map(|c| Symbol::coordinate(c)).collect(),
            momenta: coordinates.iter().map(|c| Symbol::momentum_of(c)).collect(),
            times: time_symbols,
            hamiltonians,
            provenance: None,
        })
    }

    pub fn n_mu(&self) -> usize {
        self.times.len()
    }

    pub fn counting_rules(&self) -> Option<CountingRules> {
        let p = self.provenance.as_ref()?;
        Some(CountingRules {
            n_mu: self.n_mu(),
            n_p: p.n_p,
            n: p.n,
            r_w: p.r_w,
            times_momenta: self.n_mu() + p.n_p == p.n + 1,
            times_rank: p.r_w.map(|r| self.n_mu() + r == p.n + 1),
        })
    }

    /// `R_mn = dH_m/dtau^n - dH_n/dtau^m + {H_m, H_n}`.
    pub fn integrability_residual(&self) -> Matrix<Expr> {
        let h = &self.hamiltonians;
        let tau = &self.times;
        (0..h.len())
            .map(|m| {
                (0..h.len())
                    .map(|n| {
                        if m == n {
                            return Expr::zero();
                        }
                        Expr::sum([
                            h[m].diff(&tau[n]),
                            -h[n].diff(&tau[m]),
                            poisson(&h[m], &h[n], &self.coordinates, &self.momenta),
                        ])
                    })
                    .collect()
            })
            .collect()
    }

    /// Residual matrix with a zero verdict for each entry above the diagonal.
    pub fn integrability(&self, config: &AnalysisConfig) -> Integrability {
        let residual = self.integrability_residual();
        let mut offending = Vec::new();
        for m in 0..residual.len() {
            for n in m + 1..residual.len() {
                if let ZeroVerdict::NonZero { .. } = config.check_zero(&residual[m][n]) {
                    offending.push((m, n));
                }
            }
        }
        Integrability { integrable: offending.is_empty(), residual, offending }
    }

    /// Integrates `dq = {q, H_m} dtau^m`, `dp = {p, H_m} dtau^m` along the
    /// path with `steps` RK4 steps per segment. `init` is `(q.., p..)`.
    pub fn integrate_path(&self, path: &TimePath, init: &[f64], steps: usize) -> Result<Vec<f64>> {
        if path.dimension() != self.n_mu() {
            return Err(Error::Config(format!(
                "path has {} components, the system has {} times",
                path.dimension(),
                self.n_mu()
            )));
        }
        let r = self.coordinates.len();
        if init.len() != 2 * r {
            return Err(Error::Config(format!("initial state needs {} values, got {}", 2 * r, init.len())));
        }
        if steps == 0 {
            return Err(Error::Config("at least one step per segment is required".into()));
        }
        let vars: Vec<Symbol> =
            self.times.iter().chain(&self.coordinates).chain(&self.momenta).cloned().collect();
        // flows[m] = (dH_m/dp.., -dH_m/dq..)
        let flows: Vec<Vec<Compiled>> = self
            .hamiltonians
            .iter()
            .map(|h| {
                self.momenta
                    .iter()
                    .map(|p| h.diff(p))
                    .chain(self.coordinates.iter().map(|q| -h.diff(q)))
                    .map(|e| e.compile(&vars).map_err(Error::from))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let grid: Vec<f64> = (0..=steps).map(|k| k as f64 / steps as f64).collect();
        let mut y = init.to_vec();
        for w in path.waypoints.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let delta: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
            let rhs = |s: f64, y: &[f64]| -> Result<Vec<f64>> {
                let mut point: Vec<f64> = a.iter().zip(&delta).map(|(x, d)| x + s * d).collect();
                point.extend_from_slice(y);
                let mut out = vec![0.0; y.len()];
                for (m, flow) in flows.iter().enumerate() {
                    if delta[m] == 0.0 {
                        continue;
                    }
                    for (o, c) in out.iter_mut().zip(flow) {
                        *o += c.eval(&point)? * delta[m];
                    }
                }
                Ok(out)
            };
            y = integrate_grid(rhs, y, &grid, Method::Rk4)?.pop().unwrap();
        }
        Ok(y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Integrability {
    pub residual: Matrix<Expr>,
    /// Index pairs `(m, n)`, `m < n`, with a nonzero residual.
    pub offending: Vec<(usize, usize)>,
    pub integrable: bool,
}

/// Piecewise-linear path in `tau`-space.
#[derive(Debug, Clone, PartialEq)]
pub struct TimePath {
    pub waypoints: Vec<Vec<f64>>,
}

pub const DEFAULT_STEPS: usize = 1000;

impl TimePath {
    pub fn new(waypoints: Vec<Vec<f64>>) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::Config(format!("a path needs at least 2 waypoints, got {}", waypoints.len())));
        }
        let d = waypoints[0].len();
        if d == 0 {
            return Err(Error::Config("waypoints must have at least one component".into()));
        }
        for (i, w) in waypoints.iter().enumerate() {
            if w.len() != d {
                return Err(Error::Config(format!("waypoint {} has {} components, expected {d}", i + 1, w.len())));
            }
            if w.iter().any(|x| !x.is_finite()) {
                return Err(Error::Config(format!("waypoint {} is not finite", i + 1)));
            }
        }
        Ok(TimePath { waypoints })
    }

    /// One waypoint per line, components separated by commas. Blank lines
    /// and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut waypoints = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let w = line
                .split(',')
                .map(|c| {
                    c.trim().parse::<f64>().map_err(|_| {
                        Error::Config(format!("line {}: `{}` is not a number", lineno + 1, c.trim()))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            waypoints.push(w);
        }
        TimePath::new(waypoints)
    }

    pub fn dimension(&self) -> usize {
        self.waypoints[0].len()
    }

    pub fn start(&self) -> &[f64] {
        &self.waypoints[0]
    }

    pub fn end(&self) -> &[f64] {
        self.waypoints.last().unwrap()
    }

    /// Axis-parallel path moving the components in `order`.
    pub fn staircase(start: &[f64], end: &[f64], order: &[usize]) -> Result<Self> {
        let mut current = start.to_vec();
        let mut waypoints = vec![current.clone()];
        for &axis in order {
            current[axis] = end[axis];
            waypoints.push(current.clone());
        }
        TimePath::new(waypoints)
    }

    /// Staircase with a random axis order and, per axis, a random
    /// intermediate stop that may overshoot the target.
    pub fn random_staircase(start: &[f64], end: &[f64], rng: &mut impl Rng) -> Result<Self> {
        let mut axes: Vec<usize> = (0..start.len()).collect();
        axes.shuffle(rng);
        let mut current = start.to_vec();
        let mut waypoints = vec![current.clone()];
        for axis in axes {
            let (a, b) = (start[axis], end[axis]);
            let stop = a + (b - a) * rng.gen_range(-0.5..1.5);
            for target in [stop, b] {
                current[axis] = target;
                waypoints.push(current.clone());
            }
        }
        TimePath::new(waypoints)
    }
}
