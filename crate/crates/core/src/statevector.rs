//! Exact QAOA simulation over all `2^n` amplitudes.
//!
//! Qubit `i` is bit `i` of the amplitude index, least significant first, the
//! same convention the instances and the proxy pseudostate use. Each layer
//! applies `e^{-iγC}` as a diagonal phase and then `e^{-iβB}`, `B = Σ X_i`, as
//! `n` single-qubit rotations.

use std::io::Write;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::problem_classes::{optimum_from_costs, Direction, ProblemInstance};
use crate::proxy::{mixer_row, Schedule};

/// Exhaustive sum-of-paths evolution is `O(4^n)` per layer.
pub const SUM_OF_PATHS_LIMIT: usize = 12;

const PARALLEL_THRESHOLD: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    pub n: usize,
    pub amplitudes: Vec<Complex64>,
}

impl Statevector {
    pub fn uniform(n: usize) -> Self {
        let size = 1usize << n;
        let amp = Complex64::new((size as f64).sqrt().recip(), 0.0);
        Self {
            n,
            amplitudes: vec![amp; size],
        }
    }

    pub fn basis(n: usize, x: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
        amplitudes[x] = Complex64::new(1.0, 0.0);
        Self { n, amplitudes }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Multiply amplitude `x` by `e^{-iγ c(x)}`.
    pub fn apply_phase(&mut self, costs: &[u32], gamma: f64) {
        let max = costs.iter().copied().max().unwrap_or(0) as usize;
        let phases: Vec<Complex64> = (0..=max)
            .map(|c| Complex64::from_polar(1.0, -gamma * c as f64))
            .collect();
        let apply = |(a, &c): (&mut Complex64, &u32)| *a *= phases[c as usize];
        if self.amplitudes.len() >= PARALLEL_THRESHOLD {
            self.amplitudes
                .par_iter_mut()
                .zip(costs.par_iter())
                .for_each(apply);
        } else {
            self.amplitudes.iter_mut().zip(costs.iter()).for_each(apply);
        }
    }

    /// `e^{-iβ X_q}` on every qubit.
    pub fn apply_mixer(&mut self, beta: f64) {
        let (s, c) = beta.sin_cos();
        for q in 0..self.n {
            rotate_x(&mut self.amplitudes, q, c, s);
        }
    }

    /// Index, real and imaginary parts as tab-separated text.
    pub fn dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "index\tre\tim")?;
        for (i, a) in self.amplitudes.iter().enumerate() {
            writeln!(out, "{i}\t{:e}\t{:e}", a.re, a.im)?;
        }
        Ok(())
    }
}

#[inline]
fn rotate_pair(a: &mut Complex64, b: &mut Complex64, c: f64, s: f64) {
    // [a', b'] = [[c, -is], [-is, c]] [a, b]
    let (x, y) = (*a, *b);
    *a = Complex64::new(c * x.re + s * y.im, c * x.im - s * y.re);
    *b = Complex64::new(c * y.re + s * x.im, c * y.im - s * x.re);
}

fn rotate_x(amps: &mut [Complex64], qubit: usize, c: f64, s: f64) {
    let stride = 1usize << qubit;
    let block = stride * 2;
    let rotate_block = |chunk: &mut [Complex64]| {
        let (lo, hi) = chunk.split_at_mut(stride);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            rotate_pair(a, b, c, s);
        }
    };
    if amps.len() < PARALLEL_THRESHOLD {
        amps.chunks_mut(block).for_each(rotate_block);
    } else if amps.len() / block >= 64 {
        amps.par_chunks_mut(block).for_each(rotate_block);
    } else {
        for chunk in amps.chunks_mut(block) {
            let (lo, hi) = chunk.split_at_mut(stride);
            lo.par_iter_mut()
                .zip(hi.par_iter_mut())
                .for_each(|(a, b)| rotate_pair(a, b, c, s));
        }
    }
}

/// QAOA state for precomputed costs.
pub fn qaoa_state_from_costs(n: usize, costs: &[u32], schedule: &Schedule) -> Result<Statevector> {
    schedule.validate()?;
    if costs.len() != 1 << n {
        return Err(Error::ShapeMismatch(format!(
            "{} costs for {n} qubits",
            costs.len()
        )));
    }
    let mut state = Statevector::uniform(n);
    for (gamma, beta) in schedule.layers() {
        state.apply_phase(costs, gamma);
        state.apply_mixer(beta);
    }
    Ok(state)
}

pub fn qaoa_state(instance: &ProblemInstance, schedule: &Schedule) -> Result<Statevector> {
    let costs = instance.cost_table()?;
    qaoa_state_from_costs(instance.n, &costs, schedule)
}

/// States after layers `0..=p`.
pub fn qaoa_trajectory(
    instance: &ProblemInstance,
    schedule: &Schedule,
) -> Result<Vec<Statevector>> {
    schedule.validate()?;
    let costs = instance.cost_table()?;
    let mut states = vec![Statevector::uniform(instance.n)];
    for (gamma, beta) in schedule.layers() {
        let mut next = states.last().unwrap().clone();
        next.apply_phase(&costs, gamma);
        next.apply_mixer(beta);
        states.push(next);
    }
    Ok(states)
}

pub fn expectation_from_costs(costs: &[u32], state: &Statevector) -> f64 {
    let term = |(a, &c): (&Complex64, &u32)| a.norm_sqr() * c as f64;
    if costs.len() >= PARALLEL_THRESHOLD {
        state
            .amplitudes
            .par_iter()
            .zip(costs.par_iter())
            .map(term)
            .sum()
    } else {
        state.amplitudes.iter().zip(costs.iter()).map(term).sum()
    }
}

/// `Σ_x |q(x)|² c(x)`.
pub fn expectation(instance: &ProblemInstance, state: &Statevector) -> Result<f64> {
    if state.n != instance.n {
        return Err(Error::ShapeMismatch(format!(
            "state has {} qubits, instance {}",
            state.n, instance.n
        )));
    }
    Ok(expectation_from_costs(&instance.cost_table()?, state))
}

/// `|⟨a|b⟩|² / (⟨a|a⟩⟨b|b⟩)`.
pub fn squared_overlap(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!("{} vs {}", a.len(), b.len())));
    }
    let inner: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let na: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|x| x.norm_sqr()).sum();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((inner.norm_sqr() / (na * nb)).min(1.0))
}

/// `⟨C⟩ / c_opt` when maximizing; `(m - ⟨C⟩) / (m - c_opt)` when minimizing
/// conflicts, `m` being the instance clause count. Both equal 1 at the optimum.
pub fn ratio_from(
    expectation: f64,
    optimum: usize,
    clause_count: usize,
    direction: Direction,
) -> Result<f64> {
    match direction {
        Direction::MaximizeSatisfied => {
            if optimum == 0 {
                return Err(Error::UndefinedRatio("optimal cost is 0".into()));
            }
            Ok(expectation / optimum as f64)
        }
        Direction::MinimizeConflicts => {
            let gap = clause_count as f64 - optimum as f64;
            if gap <= 0.0 {
                return Err(Error::UndefinedRatio(
                    "every assignment violates every clause".into(),
                ));
            }
            Ok((clause_count as f64 - expectation) / gap)
        }
    }
}

/// Exact approximation ratio of `schedule` on `instance`.
pub fn approximation_ratio(instance: &ProblemInstance, schedule: &Schedule) -> Result<f64> {
    let costs = instance.cost_table()?;
    let optimum = optimum_from_costs(&costs, instance.spec.maximize());
    let state = qaoa_state_from_costs(instance.n, &costs, schedule)?;
    ratio_from(
        expectation_from_costs(&costs, &state),
        optimum.cost,
        instance.clause_count(),
        instance.spec.direction,
    )
}

/// Exact expectation of one extra layer on top of `prefix`, over a grid.
///
/// Entry `[i, j]` is `⟨C⟩` after appending `(gammas[i], betas[j])`.
pub fn exact_landscape(
    costs: &[u32],
    prefix: &Statevector,
    gammas: &[f64],
    betas: &[f64],
) -> Result<Array2<f64>> {
    if costs.len() != prefix.amplitudes.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} costs for {} amplitudes",
            costs.len(),
            prefix.amplitudes.len()
        )));
    }
    let rows: Vec<Vec<f64>> = gammas
        .par_iter()
        .map(|&gamma| {
            let mut phased = prefix.clone();
            phased.apply_phase(costs, gamma);
            betas
                .iter()
                .map(|&beta| {
                    let mut state = phased.clone();
                    state.apply_mixer(beta);
                    expectation_from_costs(costs, &state)
                })
                .collect()
        })
        .collect();
    Ok(Array2::from_shape_fn(
        (gammas.len(), betas.len()),
        |(i, j)| rows[i][j],
    ))
}

/// QAOA by direct summation over paths:
/// `q_ℓ(x) = Σ_y q_{ℓ-1}(y) M_{d(x,y)}(β) e^{-iγ c(y)}`.
///
/// Shares nothing with the gate-based simulator beyond the cost table.
pub fn sum_of_paths_state(
    instance: &ProblemInstance,
    schedule: &Schedule,
) -> Result<Vec<Complex64>> {
    schedule.validate()?;
    if instance.n > SUM_OF_PATHS_LIMIT {
        return Err(Error::SizeLimit {
            n: instance.n,
            limit: SUM_OF_PATHS_LIMIT,
        });
    }
    let n = instance.n;
    let costs = instance.cost_table()?;
    let size = 1usize << n;
    let mut q = vec![Complex64::new((size as f64).sqrt().recip(), 0.0); size];
    for (gamma, beta) in schedule.layers() {
        let mixer = mixer_row(n, beta);
        let phased: Vec<Complex64> = q
            .iter()
            .zip(&costs)
            .map(|(a, &c)| a * Complex64::from_polar(1.0, -gamma * c as f64))
            .collect();
        q = (0..size)
            .into_par_iter()
            .map(|x| {
                phased
                    .iter()
                    .enumerate()
                    .map(|(y, v)| v * mixer[(x ^ y).count_ones() as usize])
                    .sum()
            })
            .collect();
    }
    Ok(q)
}
