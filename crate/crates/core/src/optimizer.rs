//! Parameter setting driven by the proxy.
//!
//! The outer loop is a box-constrained quasi-Newton (BFGS) search with
//! central finite-difference gradients; every objective evaluation runs the
//! proxy and returns its cost estimate. The resulting class-level angles are
//! meant to be handed to QAOA unchanged.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::distributions::{precompute_all, DistributionTable};
use crate::error::{Error, Result};
use crate::problem_classes::ClassSpec;
use crate::proxy::{evolve, expected_cost, LinearRamp, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parameterization {
    /// `[γ_1..γ_p, β_1..β_p]`
    Full2p,
    /// `[γ_1, γ_f, β_1, β_f]`, expanded with [`linear_ramp_expand`].
    LinearRamp4,
}

impl Parameterization {
    pub fn dimension(self, p: usize) -> usize {
        match self {
            Parameterization::Full2p => 2 * p,
            Parameterization::LinearRamp4 => 4,
        }
    }

    pub fn expand(self, params: &[f64], p: usize) -> Result<Schedule> {
        let expected = self.dimension(p);
        if params.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: params.len(),
            });
        }
        match self {
            Parameterization::Full2p => Schedule::new(params[..p].to_vec(), params[p..].to_vec()),
            Parameterization::LinearRamp4 => LinearRamp::from_slice(params).expand(p),
        }
    }

    /// `γ ∈ [0, 2π]`, `β ∈ [0, π]` for every angle.
    pub fn default_bounds(self, p: usize) -> Vec<(f64, f64)> {
        let half = self.dimension(p) / 2;
        let mut bounds = vec![(0.0, TAU); half];
        bounds.extend(vec![(0.0, PI); half]);
        bounds
    }
}

/// See [`LinearRamp::expand`].
pub fn linear_ramp_expand(ramp: &LinearRamp, p: usize) -> Result<Schedule> {
    ramp.expand(p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialPoint {
    Schedule(Schedule),
    Ramp(LinearRamp),
}

impl InitialPoint {
    /// Ramp `γ: 0.1 → 0.6`, `β: 0.6 → 0.1`.
    pub fn default_ramp() -> Self {
        InitialPoint::Ramp(LinearRamp::new(0.1, 0.6, 0.6, 0.1))
    }

    pub fn to_params(&self, parameterization: Parameterization, p: usize) -> Result<Vec<f64>> {
        match (self, parameterization) {
            (InitialPoint::Ramp(r), Parameterization::LinearRamp4) => Ok(r.to_array().to_vec()),
            (InitialPoint::Ramp(r), Parameterization::Full2p) => {
                let s = r.expand(p)?;
                Ok(s.gammas.into_iter().chain(s.betas).collect())
            }
            (InitialPoint::Schedule(s), Parameterization::Full2p) => {
                if s.depth() != p {
                    return Err(Error::DimensionMismatch {
                        expected: p,
                        got: s.depth(),
                    });
                }
                Ok(s.gammas.iter().chain(&s.betas).copied().collect())
            }
            (InitialPoint::Schedule(_), Parameterization::LinearRamp4) => Err(
                Error::InvalidOptions("a linear-ramp search needs a ramp starting point".into()),
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerOptions {
    pub parameterization: Parameterization,
    pub initial: InitialPoint,
    /// Per-parameter closed intervals; `None` uses [`Parameterization::default_bounds`].
    #[serde(default)]
    pub bounds: Option<Vec<(f64, f64)>>,
    /// Stop once one accepted step improves the objective by less than this.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub fd_step: f64,
    pub maximize: bool,
    /// Divide the cost estimate by the proxy pseudo-norm.
    #[serde(default)]
    pub normalize: bool,
}

impl OptimizerOptions {
    pub fn for_class(spec: &ClassSpec, parameterization: Parameterization) -> Self {
        Self {
            parameterization,
            initial: InitialPoint::default_ramp(),
            bounds: None,
            tolerance: 1e-6,
            max_iterations: 500,
            fd_step: 1e-6,
            maximize: spec.maximize(),
            normalize: false,
        }
    }

    pub fn with_initial(mut self, initial: InitialPoint) -> Self {
        self.initial = initial;
        self
    }

    fn search(&self, p: usize) -> Result<SearchOptions> {
        let bounds = self
            .bounds
            .clone()
            .unwrap_or_else(|| self.parameterization.default_bounds(p));
        let options = SearchOptions {
            bounds,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            fd_step: self.fd_step,
            maximize: self.maximize,
        };
        options.validate(self.parameterization.dimension(p))?;
        Ok(options)
    }
}

/// The proxy cost estimate for a parameter vector.
pub fn homogeneous_objective(
    params: &[f64],
    table: &DistributionTable,
    p: usize,
    parameterization: Parameterization,
    normalize: bool,
) -> Result<f64> {
    let schedule = parameterization.expand(params, p)?;
    expected_cost(&evolve(table, &schedule)?, table, normalize)
}

/// Settings for [`maximize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub bounds: Vec<(f64, f64)>,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub fd_step: f64,
    /// `false` minimizes instead.
    pub maximize: bool,
}

impl SearchOptions {
    pub fn unbounded(dim: usize) -> Self {
        Self {
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); dim],
            tolerance: 1e-6,
            max_iterations: 500,
            fd_step: 1e-6,
            maximize: true,
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidOptions("tolerance must be positive".into()));
        }
        if self.fd_step.is_nan() || self.fd_step <= 0.0 {
            return Err(Error::InvalidOptions("fd_step must be positive".into()));
        }
        if self.bounds.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: self.bounds.len(),
            });
        }
        if self.bounds.iter().any(|&(lo, hi)| lo.is_nan() || hi.is_nan() || lo > hi) {
            return Err(Error::InvalidOptions("every bound needs lo <= hi".into()));
        }
        Ok(())
    }

    fn project(&self, x: &mut [f64]) {
        for (v, &(lo, hi)) in x.iter_mut().zip(&self.bounds) {
            *v = v.clamp(lo, hi);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Tolerance,
    Stationary,
    LineSearch,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub trace: Vec<TracePoint>,
    pub stop: StopReason,
}

struct Counted<F> {
    f: F,
    sign: f64,
    calls: usize,
}

impl<F: Fn(&[f64]) -> f64> Counted<F> {
    /// Objective in minimization form.
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.calls += 1;
        self.sign * (self.f)(x)
    }

    fn gradient(&mut self, x: &[f64], h: f64) -> Vec<f64> {
        let mut probe = x.to_vec();
        (0..x.len())
            .map(|i| {
                probe[i] = x[i] + h;
                let up = self.eval(&probe);
                probe[i] = x[i] - h;
                let down = self.eval(&probe);
                probe[i] = x[i];
                (up - down) / (2.0 * h)
            })
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

const ARMIJO: f64 = 1e-4;
const FIRST_STEP: f64 = 0.1;

/// Box-constrained BFGS with central-difference gradients.
///
/// Each accepted step satisfies an Armijo decrease along the projected path,
/// so the returned point is never worse than the (projected) start.
pub fn maximize<F>(objective: F, x0: &[f64], options: &SearchOptions) -> Result<SearchResult>
where
    F: Fn(&[f64]) -> f64,
{
    let dim = x0.len();
    options.validate(dim)?;
    let sign = if options.maximize { -1.0 } else { 1.0 };
    let mut f = Counted {
        f: objective,
        sign,
        calls: 0,
    };
    let h = options.fd_step;

    let mut x = x0.to_vec();
    options.project(&mut x);
    let mut fx = f.eval(&x);
    if !fx.is_finite() {
        return Err(Error::NonFinite(format!("{x:?}")));
    }
    let mut g = f.gradient(&x, h);
    let mut hess = identity(dim);
    let mut scaled = false;
    let mut trace = vec![TracePoint {
        iteration: 0,
        objective: sign * fx,
    }];
    let mut stop = StopReason::MaxIterations;
    let mut iterations = 0;

    while iterations < options.max_iterations {
        let free: Vec<bool> = (0..dim)
            .map(|i| {
                let (lo, hi) = options.bounds[i];
                !((x[i] <= lo && g[i] > 0.0) || (x[i] >= hi && g[i] < 0.0))
            })
            .collect();
        if (0..dim).all(|i| !free[i] || g[i].abs() < 1e-12) {
            stop = StopReason::Stationary;
            break;
        }

        let mut dir = direction(&hess, &g, &free);
        if dot(&g, &dir) >= 0.0 {
            hess = identity(dim);
            scaled = false;
            dir = direction(&hess, &g, &free);
        }
        if !scaled {
            let longest = dir.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if longest > FIRST_STEP {
                dir.iter_mut().for_each(|v| *v *= FIRST_STEP / longest);
            }
        }

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let mut trial: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + alpha * b).collect();
            options.project(&mut trial);
            let step: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
            if step.iter().all(|&s| s == 0.0) {
                break;
            }
            let ft = f.eval(&trial);
            if ft.is_finite() && ft <= fx + ARMIJO * dot(&g, &step) && ft < fx {
                accepted = Some((trial, ft, step));
                break;
            }
            alpha *= 0.5;
        }
        let Some((x_new, f_new, s)) = accepted else {
            stop = StopReason::LineSearch;
            break;
        };
        iterations += 1;

        let g_new = f.gradient(&x_new, h);
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if !scaled {
                let scale = sy / dot(&y, &y);
                hess = identity(dim);
                hess.iter_mut()
                    .enumerate()
                    .for_each(|(i, row)| row[i] = scale);
                scaled = true;
            }
            bfgs_update(&mut hess, &s, &y, sy);
        }

        let improvement = fx - f_new;
        x = x_new;
        fx = f_new;
        g = g_new;
        trace.push(TracePoint {
            iteration: iterations,
            objective: sign * fx,
        });
        if improvement < options.tolerance {
            stop = StopReason::Tolerance;
            break;
        }
    }

    Ok(SearchResult {
        x,
        value: sign * fx,
        iterations,
        evaluations: f.calls,
        trace,
        stop,
    })
}

fn identity(dim: usize) -> Vec<Vec<f64>> {
    (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn direction(hess: &[Vec<f64>], g: &[f64], free: &[bool]) -> Vec<f64> {
    (0..g.len())
        .map(|i| {
            if !free[i] {
                return 0.0;
            }
            -(0..g.len())
                .filter(|&j| free[j])
                .map(|j| hess[i][j] * g[j])
                .sum::<f64>()
        })
        .collect()
}

/// `H ← (I - ρ s yᵀ) H (I - ρ y sᵀ) + ρ s sᵀ`
fn bfgs_update(hess: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let dim = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..dim).map(|i| dot(&hess[i], y)).collect();
    let yhy = dot(y, &hy);
    for i in 0..dim {
        for j in 0..dim {
            hess[i][j] +=
                -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub class_hash: String,
    pub p: usize,
    pub parameterization: Parameterization,
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp: Option<LinearRamp>,
    pub objective: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub stop: StopReason,
    pub trace: Vec<TracePoint>,
}

impl OptimizationResult {
    pub fn schedule(&self) -> Schedule {
        Schedule {
            gammas: self.gammas.clone(),
            betas: self.betas.clone(),
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self.ramp {
            Some(r) => r.to_array().to_vec(),
            None => self.gammas.iter().chain(&self.betas).copied().collect(),
        }
    }
}

/// Optimize the proxy objective for a precomputed table.
pub fn heuristic_with_table(
    table: &DistributionTable,
    p: usize,
    options: &OptimizerOptions,
) -> Result<OptimizationResult> {
    let search = options.search(p)?;
    let x0 = options.initial.to_params(options.parameterization, p)?;
    let param = options.parameterization;
    let normalize = options.normalize;
    let objective =
        |x: &[f64]| homogeneous_objective(x, table, p, param, normalize).unwrap_or(f64::NAN);
    let found = maximize(objective, &x0, &search)?;
    let schedule = param.expand(&found.x, p)?;
    Ok(OptimizationResult {
        class_hash: table.spec.hash_hex(),
        p,
        parameterization: param,
        gammas: schedule.gammas,
        betas: schedule.betas,
        ramp: (param == Parameterization::LinearRamp4).then(|| LinearRamp::from_slice(&found.x)),
        objective: found.value,
        iterations: found.iterations,
        evaluations: found.evaluations,
        stop: found.stop,
        trace: found.trace,
    })
}

/// Precompute the class table and optimize on it.
pub fn heuristic(
    spec: &ClassSpec,
    p: usize,
    options: &OptimizerOptions,
) -> Result<OptimizationResult> {
    let table = precompute_all(spec)?;
    heuristic_with_table(&table, p, options)
}

/// Best of several starts; ties keep the earliest start.
pub fn heuristic_multistart(
    table: &DistributionTable,
    p: usize,
    options: &OptimizerOptions,
    starts: &[InitialPoint],
) -> Result<OptimizationResult> {
    let runs: Vec<OptimizationResult> = starts
        .par_iter()
        .map(|start| heuristic_with_table(table, p, &options.clone().with_initial(start.clone())))
        .collect::<Result<_>>()?;
    let better = |a: f64, b: f64| if options.maximize { a > b } else { a < b };
    runs.into_iter()
        .reduce(|best, r| {
            if better(r.objective, best.objective) {
                r
            } else {
                best
            }
        })
        .ok_or_else(|| Error::InvalidOptions("no starting points".into()))
}

/// Seeded starting ramps: the default ramp scaled by factors drawn from `[0.25, 2]`.
pub fn seeded_ramps(seed: u64, count: usize) -> Vec<InitialPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            if i == 0 {
                return InitialPoint::default_ramp();
            }
            let gs: f64 = rng.random_range(0.25..2.0);
            let bs: f64 = rng.random_range(0.25..2.0);
            InitialPoint::Ramp(LinearRamp::new(0.1 * gs, 0.6 * gs, 0.6 * bs, 0.1 * bs))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_converges() {
        let target = [0.7, -1.3, 2.2];
        let f = |x: &[f64]| {
            -x.iter()
                .zip(&target)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
        };
        let r = maximize(f, &[0.0, 0.0, 0.0], &SearchOptions::unbounded(3)).unwrap();
        assert!(r.iterations < 50, "{} iterations", r.iterations);
        for (a, b) in r.x.iter().zip(&target) {
            assert!((a - b).abs() < 1e-4, "{:?}", r.x);
        }
    }

    #[test]
    fn minimization_flips_sign() {
        let f = |x: &[f64]| (x[0] - 3.0).powi(2) + 1.0;
        let mut opts = SearchOptions::unbounded(1);
        opts.maximize = false;
        let r = maximize(f, &[0.0], &opts).unwrap();
        assert!((r.x[0] - 3.0).abs() < 1e-4);
        assert!((r.value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn box_constraints_hold() {
        let f = |x: &[f64]| x[0] + x[1];
        let mut opts = SearchOptions::unbounded(2);
        opts.bounds = vec![(0.0, 1.0), (-2.0, 0.5)];
        let r = maximize(f, &[0.2, 0.0], &opts).unwrap();
        assert!(
            (r.x[0] - 1.0).abs() < 1e-12 && (r.x[1] - 0.5).abs() < 1e-12,
            "{:?}",
            r.x
        );
        assert_eq!(r.stop, StopReason::Stationary);
    }

    #[test]
    fn never_worse_than_start() {
        let f = |x: &[f64]| (3.0 * x[0]).sin() * (2.0 * x[1]).cos() - 0.1 * x[0] * x[0];
        for start in [[0.1, 0.2], [2.0, -1.0], [-3.0, 0.7]] {
            let r = maximize(f, &start, &SearchOptions::unbounded(2)).unwrap();
            assert!(r.value >= f(&start));
            assert!(r.trace.windows(2).all(|w| w[1].objective > w[0].objective));
        }
    }

    #[test]
    fn non_finite_start_is_rejected() {
        let f = |_: &[f64]| f64::NAN;
        assert!(matches!(
            maximize(f, &[0.0], &SearchOptions::unbounded(1)),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn invalid_options_are_rejected() {
        let f = |x: &[f64]| x[0];
        let mut opts = SearchOptions::unbounded(1);
        opts.tolerance = 0.0;
        assert!(maximize(f, &[0.0], &opts).is_err());
        let mut opts = SearchOptions::unbounded(1);
        opts.bounds = vec![(1.0, 0.0)];
        assert!(maximize(f, &[0.0], &opts).is_err());
        assert!(maximize(f, &[0.0, 1.0], &SearchOptions::unbounded(1)).is_err());
    }

    #[test]
    fn parameterizations_expand() {
        let s = Parameterization::Full2p
            .expand(&[1.0, 2.0, 3.0, 4.0], 2)
            .unwrap();
        assert_eq!((s.gammas, s.betas), (vec![1.0, 2.0], vec![3.0, 4.0]));
        assert!(matches!(
            Parameterization::LinearRamp4.expand(&[1.0, 2.0], 5),
            Err(Error::DimensionMismatch {
                expected: 4,
                got: 2
            })
        ));
        assert_eq!(Parameterization::LinearRamp4.default_bounds(7).len(), 4);
        assert_eq!(Parameterization::Full2p.default_bounds(3)[3], (0.0, PI));
    }

    #[test]
    fn initial_points_convert() {
        let ramp = InitialPoint::Ramp(LinearRamp::new(0.0, 1.0, 1.0, 0.0));
        assert_eq!(
            ramp.to_params(Parameterization::Full2p, 2).unwrap(),
            vec![0.5, 1.0, 0.5, 0.0]
        );
        let sched = InitialPoint::Schedule(Schedule::constant(2, 0.1, 0.2).unwrap());
        assert!(sched.to_params(Parameterization::LinearRamp4, 2).is_err());
        assert!(sched.to_params(Parameterization::Full2p, 3).is_err());
    }

    #[test]
    fn seeded_ramps_are_reproducible() {
        assert_eq!(seeded_ramps(5, 4), seeded_ramps(5, 4));
        assert_eq!(seeded_ramps(5, 4)[0], InitialPoint::default_ramp());
        assert_ne!(seeded_ramps(5, 4), seeded_ramps(6, 4));
    }
}
