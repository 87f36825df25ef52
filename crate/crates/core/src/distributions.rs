//! Replacement distributions `N(c'; d, c)` and their empirical counterparts.
//!
//! `N(c'; d, c)` is the class-averaged number of bitstrings of cost `c` at
//! Hamming distance `d` from a bitstring of cost `c'`:
//!
//! ```text
//! N(c'; d, c) = C(n, d) · P(c', c | d) / P(c')
//! P(c', c | d) = Σ_b  m! / (b! (c'-b)! (c-b)! (m+b-c'-c)!)
//!                     · P_both^b · P_one^(c'+c-2b) · P_neither^(m+b-c'-c)
//! ```
//!
//! Every multinomial term is assembled in log space and the sum over `b` is a
//! streaming log-sum-exp, so `m!` never materializes. Costs whose class
//! probability falls below [`UNREACHABLE_PROBABILITY`] get all-zero rows.
//!
//! The Hamming-weight class bypasses the multinomial: its counts are known in
//! closed form, `N(c'; d, c) = C(c', j) · C(n-c', d-j)` with `j = (c'+d-c)/2`.

use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use ndarray::{Array2, Array3, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, ln_binomial, ln_factorial, pow_ln, LogSum};
use crate::error::{Error, Result};
use crate::problem_classes::{
    pair_probabilities, ClassKind, ClassSpec, CostSet, PairProbabilities, ProblemInstance,
};

/// Class probabilities below this are treated as zero.
pub const UNREACHABLE_PROBABILITY: f64 = 1e-300;

fn check_cost(spec: &ClassSpec, c: usize) -> Result<()> {
    let set = spec.cost_set();
    if set.contains(c) {
        Ok(())
    } else {
        Err(Error::CostOutOfRange {
            cost: c,
            max: set.max,
        })
    }
}

/// `ln P(c', c | d)` given the pair probabilities at `d`.
fn ln_joint(m: usize, pairs: &PairProbabilities, cp: usize, c: usize) -> f64 {
    if cp > m || c > m {
        return f64::NEG_INFINITY;
    }
    let lo = (cp + c).saturating_sub(m);
    let hi = cp.min(c);
    let ln_m = ln_factorial(m);
    let mut acc = LogSum::new();
    for b in lo..=hi {
        let one = cp + c - 2 * b;
        let neither = m + b - cp - c;
        let powers =
            pow_ln(pairs.both, b) + pow_ln(pairs.one, one) + pow_ln(pairs.neither, neither);
        if powers == f64::NEG_INFINITY {
            continue;
        }
        let coeff = ln_m
            - ln_factorial(b)
            - ln_factorial(cp - b)
            - ln_factorial(c - b)
            - ln_factorial(neither);
        acc.push(coeff + powers);
    }
    acc.value()
}

/// `ln N(c'; d, c)` for the Hamming-weight class.
fn ln_hamming_count(n: usize, cp: usize, d: usize, c: usize) -> f64 {
    // c = c' + d - 2j, with j ones flipped to zero
    let up = cp + d;
    if up < c || !(up - c).is_multiple_of(2) {
        return f64::NEG_INFINITY;
    }
    let j = (up - c) / 2;
    if j > d {
        return f64::NEG_INFINITY;
    }
    ln_binomial(cp, j) + ln_binomial(n - cp, d - j)
}

/// Probability that two uniformly random bitstrings at distance `d` have costs `c'` and `c`.
pub fn joint_cost_probability(spec: &ClassSpec, cp: usize, c: usize, d: usize) -> Result<f64> {
    check_cost(spec, cp)?;
    check_cost(spec, c)?;
    if d > spec.n {
        return Err(Error::DistanceOutOfRange { d, n: spec.n });
    }
    let ln = if spec.kind == ClassKind::HammingWeight {
        spec.ln_cost_probability(cp) + ln_hamming_count(spec.n, cp, d, c) - ln_binomial(spec.n, d)
    } else {
        ln_joint(spec.m, &pair_probabilities(spec, d)?, cp, c)
    };
    Ok(ln.exp())
}

fn ln_reachable(spec: &ClassSpec, cp: usize) -> Option<f64> {
    let ln_p = spec.ln_cost_probability(cp);
    (ln_p >= UNREACHABLE_PROBABILITY.ln()).then_some(ln_p)
}

fn replacement_row(
    spec: &ClassSpec,
    pairs: &[PairProbabilities],
    ln_p: f64,
    cp: usize,
    width: usize,
) -> Array2<f64> {
    let n = spec.n;
    let mut out = Array2::zeros((n + 1, width));
    for d in 0..=n {
        let ln_choose = ln_binomial(n, d);
        for c in 0..width {
            let ln_n = if spec.kind == ClassKind::HammingWeight {
                ln_hamming_count(n, cp, d, c)
            } else {
                ln_choose + ln_joint(spec.m, &pairs[d], cp, c) - ln_p
            };
            out[[d, c]] = ln_n.exp();
        }
    }
    out
}

fn all_pairs(spec: &ClassSpec) -> Result<Vec<PairProbabilities>> {
    (0..=spec.n).map(|d| pair_probabilities(spec, d)).collect()
}

/// `N(c'; d, c)` over all `(d, c)`, indexed `[d, c]`.
pub fn replacement_distribution(spec: &ClassSpec, cp: usize) -> Result<Array2<f64>> {
    check_cost(spec, cp)?;
    let ln_p = ln_reachable(spec, cp).ok_or(Error::CostUnreachable(cp))?;
    let pairs = all_pairs(spec)?;
    Ok(replacement_row(
        spec,
        &pairs,
        ln_p,
        cp,
        spec.cost_set().len(),
    ))
}

/// Precomputed `P(c')` and `N(c'; d, c)` for a class.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionTable {
    pub spec: ClassSpec,
    pub cost_set: CostSet,
    /// `P(c')` for every cost in the set.
    pub p_of_c: Vec<f64>,
    /// `N(c'; d, c)` indexed `[c', d, c]`.
    pub n_table: Array3<f64>,
    #[serde(skip)]
    id: OnceLock<u64>,
}

impl PartialEq for DistributionTable {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
            && self.cost_set == other.cost_set
            && self.p_of_c == other.p_of_c
            && self.n_table == other.n_table
    }
}

/// Build the full table. Unreachable costs get zero rows.
pub fn precompute_all(spec: &ClassSpec) -> Result<DistributionTable> {
    spec.validate()?;
    let set = spec.cost_set();
    let width = set.len();
    let n = spec.n;
    let pairs = all_pairs(spec)?;

    let rows: Vec<(f64, Option<Array2<f64>>)> = set
        .values()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|cp| match ln_reachable(spec, cp) {
            Some(ln_p) => (
                ln_p.exp(),
                Some(replacement_row(spec, &pairs, ln_p, cp, width)),
            ),
            None => (spec.ln_cost_probability(cp).exp(), None),
        })
        .collect();

    let mut n_table = Array3::zeros((width, n + 1, width));
    let mut p_of_c = Vec::with_capacity(width);
    for (cp, (p, row)) in rows.into_iter().enumerate() {
        p_of_c.push(p);
        if let Some(row) = row {
            n_table.index_axis_mut(Axis(0), cp).assign(&row);
        }
    }
    Ok(DistributionTable {
        spec: spec.clone(),
        cost_set: set,
        p_of_c,
        n_table,
        id: OnceLock::new(),
    })
}

/// Largest violations of the table's sum rules, all relative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumRuleResiduals {
    /// `max |Σ_c N(c';d,c) / C(n,d) - 1|`
    pub row_sum: f64,
    /// `max |Σ_{d,c} N(c';d,c) / 2^n - 1|`
    pub total: f64,
    /// `max |P(c')N(c';d,c) - P(c)N(c;d,c')| / max(both sides)`
    pub detailed_balance: f64,
}

impl DistributionTable {
    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn len(&self) -> usize {
        self.cost_set.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self) -> u64 {
        *self.id.get_or_init(|| self.spec.table_id())
    }

    pub fn get(&self, cp: usize, d: usize, c: usize) -> f64 {
        self.n_table[[cp, d, c]]
    }

    /// `N(c'; ·, ·)` indexed `[d, c]`.
    pub fn row(&self, cp: usize) -> ArrayView2<'_, f64> {
        self.n_table.index_axis(Axis(0), cp)
    }

    pub fn is_reachable(&self, cp: usize) -> bool {
        self.p_of_c[cp] >= UNREACHABLE_PROBABILITY
    }

    pub fn residuals(&self) -> SumRuleResiduals {
        let n = self.n();
        let two_n = 2f64.powi(n as i32);
        let mut out = SumRuleResiduals {
            row_sum: 0.0,
            total: 0.0,
            detailed_balance: 0.0,
        };
        for cp in self.cost_set.values().filter(|&c| self.is_reachable(c)) {
            let row = self.row(cp);
            let mut total = 0.0;
            for d in 0..=n {
                let s: f64 = row.row(d).sum();
                total += s;
                out.row_sum = out.row_sum.max((s / binomial(n, d) - 1.0).abs());
                for c in self.cost_set.values().filter(|&c| self.is_reachable(c)) {
                    let lhs = self.p_of_c[cp] * self.get(cp, d, c);
                    let rhs = self.p_of_c[c] * self.get(c, d, cp);
                    let scale = lhs.abs().max(rhs.abs());
                    if scale > 0.0 {
                        out.detailed_balance = out.detailed_balance.max((lhs - rhs).abs() / scale);
                    }
                }
            }
            out.total = out.total.max((total / two_n - 1.0).abs());
        }
        out
    }

    /// Cache file name for a spec: `table-<sha256 prefix>.json`.
    pub fn cache_path(dir: &Path, spec: &ClassSpec) -> PathBuf {
        dir.join(format!("table-{}.json", &spec.hash_hex()[..16]))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, serde_json::to_vec(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let table: Self = serde_json::from_slice(&std::fs::read(path)?)?;
        table.spec.validate()?;
        let width = table.spec.cost_set().len();
        if table.cost_set != table.spec.cost_set()
            || table.p_of_c.len() != width
            || table.n_table.dim() != (width, table.spec.n + 1, width)
        {
            return Err(Error::ShapeMismatch(format!(
                "cached table at {} does not match its class",
                path.display()
            )));
        }
        Ok(table)
    }

    /// Read the cached table for `spec` from `dir`, computing and writing it on a miss.
    pub fn load_or_compute(spec: &ClassSpec, dir: Option<&Path>) -> Result<Self> {
        let Some(dir) = dir else {
            return precompute_all(spec);
        };
        let path = Self::cache_path(dir, spec);
        if path.exists() {
            let table = Self::load(&path)?;
            if &table.spec == spec {
                log::debug!("loaded distribution table from {}", path.display());
                return Ok(table);
            }
            log::warn!("cache collision at {}, recomputing", path.display());
        }
        let table = precompute_all(spec)?;
        table.save(&path)?;
        Ok(table)
    }
}

/// `n(x; d, c)` for one anchor bitstring, by enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    /// Indexed `[d, c]`.
    pub counts: Array2<u64>,
    pub anchor_cost: usize,
}

fn empirical_from_costs(costs: &[u32], n: usize, x: u64, width: usize) -> EmpiricalDistribution {
    let mut counts = Array2::zeros((n + 1, width));
    for (y, &c) in costs.iter().enumerate() {
        let d = (x ^ y as u64).count_ones() as usize;
        counts[[d, c as usize]] += 1;
    }
    EmpiricalDistribution {
        counts,
        anchor_cost: costs[x as usize] as usize,
    }
}

/// `n(x; d, c)` for the assignment packed in `x`. Costs run over `0..=clause_count`.
pub fn empirical_distribution(instance: &ProblemInstance, x: u64) -> Result<EmpiricalDistribution> {
    let costs = instance.cost_table()?;
    if x >> instance.n != 0 {
        return Err(Error::BitstringLength {
            expected: instance.n,
            got: 64 - x.leading_zeros() as usize,
        });
    }
    Ok(empirical_from_costs(
        &costs,
        instance.n,
        x,
        instance.clause_count() + 1,
    ))
}

/// Element-wise statistics of `n(x; d, c)` over every `x` with `c(x) = c'` in a cohort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortStats {
    pub anchor_cost: usize,
    pub cohort_size: usize,
    pub mean: Array2<f64>,
    /// Population standard deviation.
    pub std: Array2<f64>,
    /// Cells whose mean is exactly zero (no bitstring ever lands there).
    pub zero_mean: Array2<bool>,
}

impl CohortStats {
    /// `std / mean`, `NaN` where the mean is zero.
    pub fn relative_deviation(&self) -> Array2<f64> {
        let mut out = &self.std / &self.mean;
        out.zip_mut_with(&self.zero_mean, |v, &z| {
            if z {
                *v = f64::NAN;
            }
        });
        out
    }
}

pub fn empirical_stats(instances: &[ProblemInstance], cp: usize) -> Result<CohortStats> {
    let first = instances
        .first()
        .ok_or_else(|| Error::ShapeMismatch("empty instance list".into()))?;
    let n = first.n;
    if instances.iter().any(|i| i.n != n) {
        return Err(Error::ShapeMismatch("instances differ in n".into()));
    }
    let width = instances
        .iter()
        .map(|i| i.clause_count() + 1)
        .max()
        .unwrap_or(1)
        .max(cp + 1);

    let mut sum = Array2::<f64>::zeros((n + 1, width));
    let mut sum_sq = Array2::<f64>::zeros((n + 1, width));
    let mut cohort = 0usize;
    for instance in instances {
        let costs = instance.cost_table()?;
        let anchors: Vec<u64> = (0..costs.len() as u64)
            .filter(|&x| costs[x as usize] as usize == cp)
            .collect();
        let partial = anchors
            .par_iter()
            .fold(
                || {
                    (
                        Array2::<f64>::zeros((n + 1, width)),
                        Array2::<f64>::zeros((n + 1, width)),
                    )
                },
                |(mut s, mut sq), &x| {
                    let e = empirical_from_costs(&costs, n, x, width);
                    for ((a, b), &v) in s.iter_mut().zip(sq.iter_mut()).zip(e.counts.iter()) {
                        let v = v as f64;
                        *a += v;
                        *b += v * v;
                    }
                    (s, sq)
                },
            )
            .reduce(
                || (Array2::zeros((n + 1, width)), Array2::zeros((n + 1, width))),
                |(a, b), (c, d)| (a + c, b + d),
            );
        sum += &partial.0;
        sum_sq += &partial.1;
        cohort += anchors.len();
    }
    if cohort == 0 {
        return Err(Error::EmptyCohort(cp));
    }
    let count = cohort as f64;
    let mean = &sum / count;
    let mut std = &sum_sq / count - &mean * &mean;
    std.mapv_inplace(|v| v.max(0.0).sqrt());
    let zero_mean = mean.mapv(|v| v == 0.0);
    Ok(CohortStats {
        anchor_cost: cp,
        cohort_size: cohort,
        mean,
        std,
        zero_mean,
    })
}

/// Pearson correlation over the flattened entries.
pub fn pearson_correlation(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::ShapeMismatch(format!(
            "{:?} vs {:?}",
            a.dim(),
            b.dim()
        )));
    }
    let len = a.len() as f64;
    let mean_a = a.sum() / len;
    let mean_b = b.sum() / len;
    let (mut cov, mut var_a, mut var_b) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b.iter()) {
        let (dx, dy) = (x - mean_a, y - mean_b);
        cov += dx * dy;
        var_a += dx * dx;
        var_b += dy * dy;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((cov / (var_a * var_b).sqrt()).clamp(-1.0, 1.0))
}
