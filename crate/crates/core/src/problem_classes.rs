//! Random constraint-satisfaction classes and their instances.
//!
//! A [`ClassSpec`] describes a whole random class (MaxCut on `G(n, p_e)`,
//! MaxE3Lin2, Max-k-XOR, random k-SAT) plus the Hamming-weight fixture, whose
//! cost depends only on `|x|`. Class-level quantities (`P(c')`, the per-clause
//! pair probabilities) feed the distribution tables; instances are drawn from a
//! seeded ChaCha stream so every experiment is reproducible.
//!
//! Bit convention: variable `i` is bit `i` of a bitstring index, least
//! significant first.
//!
//! **k-SAT direction.** For [`ClassKind::RandKSat`] the cost counts
//! *unsatisfied* clauses. The class probability
//! `P(c') = 2^{-km} (2^k - 1)^{m-c'} C(m, c')` only normalizes under that
//! reading, so k-SAT classes carry [`Direction::MinimizeConflicts`] and every
//! optimizer minimizes their cost.

use std::fmt;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::combinatorics::{binomial, ln_binomial};
use crate::error::{Error, Result};

/// Largest `n` accepted by routines that enumerate all `2^n` bitstrings.
pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 24;

/// Instances pack assignments into a `u64`.
pub const MAX_INSTANCE_VARIABLES: usize = 63;

const CEIL_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassKind {
    /// MaxCut on Erdős–Rényi graphs `G(n, p_e)`.
    MaxCutEr,
    MaxE3Lin2,
    /// Max-k-XOR / MaxEkLin2 with random parities.
    MaxKXor,
    RandKSat,
    /// `c(x) = |x|`; the proxy is exact on this class.
    HammingWeight,
}

impl ClassKind {
    pub fn is_parity(self) -> bool {
        matches!(
            self,
            ClassKind::MaxCutEr | ClassKind::MaxE3Lin2 | ClassKind::MaxKXor
        )
    }
}

impl fmt::Display for ClassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ClassKind::MaxCutEr => "max-cut-er",
            ClassKind::MaxE3Lin2 => "max-e3-lin2",
            ClassKind::MaxKXor => "max-k-xor",
            ClassKind::RandKSat => "rand-k-sat",
            ClassKind::HammingWeight => "hamming-weight",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    MaximizeSatisfied,
    MinimizeConflicts,
}

/// A random CSP class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSpec {
    pub kind: ClassKind,
    pub n: usize,
    /// Edge probability, MaxCut only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_e: Option<f64>,
    /// Clause count used by every class-level formula. For MaxCut this is
    /// `⌈p_e · n(n-1)/2⌉`; drawn graphs vary around it.
    pub m: usize,
    pub k: usize,
    /// Extra binomial standard deviations of edges added to the MaxCut cost set.
    #[serde(default)]
    pub margin: f64,
    pub direction: Direction,
}

/// `⌈p_e · n(n-1)/2⌉`, tolerant of round-off such as `45 · (1/3)`.
pub fn expected_edge_ceiling(n: usize, p_e: f64) -> usize {
    let pairs = (n * n.saturating_sub(1) / 2) as f64;
    (p_e * pairs - CEIL_SLACK).ceil().max(0.0) as usize
}

impl ClassSpec {
    pub fn max_cut_er(n: usize, p_e: f64) -> Result<Self> {
        let spec = Self {
            kind: ClassKind::MaxCutEr,
            n,
            p_e: Some(p_e),
            m: expected_edge_ceiling(n, p_e),
            k: 2,
            margin: 0.0,
            direction: Direction::MaximizeSatisfied,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn max_e3lin2(n: usize, m: usize) -> Result<Self> {
        let spec = Self {
            kind: ClassKind::MaxE3Lin2,
            n,
            p_e: None,
            m,
            k: 3,
            margin: 0.0,
            direction: Direction::MaximizeSatisfied,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn max_kxor(n: usize, m: usize, k: usize) -> Result<Self> {
        let spec = Self {
            kind: ClassKind::MaxKXor,
            n,
            p_e: None,
            m,
            k,
            margin: 0.0,
            direction: Direction::MaximizeSatisfied,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn rand_ksat(n: usize, m: usize, k: usize) -> Result<Self> {
        let spec = Self {
            kind: ClassKind::RandKSat,
            n,
            p_e: None,
            m,
            k,
            margin: 0.0,
            direction: Direction::MinimizeConflicts,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn hamming_weight(n: usize) -> Result<Self> {
        let spec = Self {
            kind: ClassKind::HammingWeight,
            n,
            p_e: None,
            m: n,
            k: 1,
            margin: 0.0,
            direction: Direction::MaximizeSatisfied,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Widen the MaxCut cost set by `sigmas` binomial standard deviations.
    pub fn with_margin(mut self, sigmas: f64) -> Result<Self> {
        self.margin = sigmas;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if self.m == 0 {
            return bad("clause count m must be at least 1".into());
        }
        if self.k == 0 || self.k > self.n {
            return bad(format!(
                "clause arity k = {} must lie in 1..={}",
                self.k, self.n
            ));
        }
        if !self.margin.is_finite() || self.margin < 0.0 {
            return bad(format!(
                "margin {} must be finite and non-negative",
                self.margin
            ));
        }
        if self.margin > 0.0 && self.kind != ClassKind::MaxCutEr {
            return bad("a cost-set margin only applies to max-cut-er".into());
        }
        if self.kind != ClassKind::MaxCutEr && self.p_e.is_some() {
            return bad(format!(
                "p_e is only meaningful for max-cut-er, not {}",
                self.kind
            ));
        }
        let expected_direction = match self.kind {
            ClassKind::RandKSat => Direction::MinimizeConflicts,
            _ => Direction::MaximizeSatisfied,
        };
        if self.direction != expected_direction {
            return bad(format!(
                "{} requires direction {:?}",
                self.kind, expected_direction
            ));
        }
        match self.kind {
            ClassKind::MaxCutEr => {
                let Some(p_e) = self.p_e else {
                    return bad("max-cut-er needs p_e".into());
                };
                if !(0.0..=1.0).contains(&p_e) {
                    return bad(format!("p_e = {p_e} outside [0, 1]"));
                }
                if self.n < 2 {
                    return bad("max-cut-er needs n >= 2".into());
                }
                if self.k != 2 {
                    return bad("max-cut-er clauses are edges (k = 2)".into());
                }
                let m = expected_edge_ceiling(self.n, p_e);
                if self.m != m {
                    return bad(format!("max-cut-er m must equal ceil(p_e n(n-1)/2) = {m}"));
                }
            }
            ClassKind::MaxE3Lin2 if self.k != 3 => {
                return bad("max-e3-lin2 has k = 3".into());
            }
            ClassKind::HammingWeight if self.m != self.n || self.k != 1 => {
                return bad("hamming-weight has m = n and k = 1".into());
            }
            _ => {}
        }
        Ok(())
    }

    pub fn maximize(&self) -> bool {
        self.direction == Direction::MaximizeSatisfied
    }

    /// Largest cost in the class cost set.
    pub fn cost_max(&self) -> usize {
        match (self.kind, self.p_e) {
            (ClassKind::MaxCutEr, Some(p_e)) if self.margin > 0.0 => {
                let pairs = (self.n * (self.n - 1) / 2) as f64;
                let sigma = (pairs * p_e * (1.0 - p_e)).sqrt();
                let widened = (p_e * pairs + self.margin * sigma - CEIL_SLACK).ceil() as usize;
                widened.max(self.m)
            }
            _ => self.m,
        }
    }

    pub fn cost_set(&self) -> CostSet {
        CostSet {
            max: self.cost_max(),
        }
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash_hex(&self) -> String {
        let json = serde_json::to_string(self).expect("class spec serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    /// Short identity used to tie proxy states to their table.
    pub fn table_id(&self) -> u64 {
        let json = serde_json::to_string(self).expect("class spec serializes");
        let digest = Sha256::digest(json.as_bytes());
        u64::from_le_bytes(digest[..8].try_into().unwrap())
    }

    /// `ln P(c')`; `-inf` off the support.
    pub fn ln_cost_probability(&self, c: usize) -> f64 {
        let ln2 = std::f64::consts::LN_2;
        match self.kind {
            ClassKind::HammingWeight => ln_binomial(self.n, c) - self.n as f64 * ln2,
            ClassKind::RandKSat => {
                if c > self.m {
                    return f64::NEG_INFINITY;
                }
                let k = self.k as f64;
                let m = self.m as f64;
                let violate_ln = ((2f64).powi(self.k as i32) - 1.0).ln();
                -k * m * ln2 + (self.m - c) as f64 * violate_ln + ln_binomial(self.m, c)
            }
            _ => ln_binomial(self.m, c) - self.m as f64 * ln2,
        }
    }
}

/// The contiguous cost range `{0, 1, …, max}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostSet {
    pub max: usize,
}

impl CostSet {
    pub fn len(&self) -> usize {
        self.max + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, c: usize) -> bool {
        c <= self.max
    }

    pub fn values(&self) -> std::ops::RangeInclusive<usize> {
        0..=self.max
    }
}

pub fn cost_set(spec: &ClassSpec) -> CostSet {
    spec.cost_set()
}

/// Probability that a uniformly random bitstring has cost `c`, averaged over the class.
pub fn cost_probability(spec: &ClassSpec, c: usize) -> Result<f64> {
    let set = spec.cost_set();
    if !set.contains(c) {
        return Err(Error::CostOutOfRange {
            cost: c,
            max: set.max,
        });
    }
    Ok(spec.ln_cost_probability(c).exp())
}

/// Per-clause probabilities for two bitstrings at Hamming distance `d`:
/// the clause counts toward the cost of both, of one specific one, or of neither.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairProbabilities {
    pub both: f64,
    pub one: f64,
    pub neither: f64,
}

impl PairProbabilities {
    pub fn total(&self) -> f64 {
        self.both + 2.0 * self.one + self.neither
    }
}

pub fn pair_probabilities(spec: &ClassSpec, d: usize) -> Result<PairProbabilities> {
    let n = spec.n;
    if d > n {
        return Err(Error::DistanceOutOfRange { d, n });
    }
    let k = spec.k;
    let probs = match spec.kind {
        ClassKind::MaxCutEr | ClassKind::MaxE3Lin2 | ClassKind::MaxKXor => {
            // parity survives when an even number of the clause's variables flip
            let same: f64 = (0..=k / 2)
                .map(|l| binomial(d, 2 * l) * binomial(n - d, k - 2 * l))
                .sum::<f64>()
                / binomial(n, k);
            PairProbabilities {
                both: same / 2.0,
                one: (1.0 - same) / 2.0,
                neither: same / 2.0,
            }
        }
        ClassKind::RandKSat => {
            // a clause is violated by exactly one of the 2^k local assignments
            let base = 0.5f64.powi(k as i32);
            let both = base * binomial(n - d, k) / binomial(n, k);
            let one = base - both;
            PairProbabilities {
                both,
                one,
                neither: (1.0 - 2.0 * one - both).max(0.0),
            }
        }
        ClassKind::HammingWeight => {
            // single-variable clause on a uniformly chosen variable
            let nf = n as f64;
            PairProbabilities {
                both: (n - d) as f64 / (2.0 * nf),
                one: d as f64 / (2.0 * nf),
                neither: (n - d) as f64 / (2.0 * nf),
            }
        }
    };
    Ok(probs)
}

/// One clause. Parity clauses count when `x_{v1} ⊕ … ⊕ x_{vk} ⊕ parity = 1`;
/// k-SAT clauses OR their literals, literal `i` being `x_{vi} ⊕ negations[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Clause {
    pub variables: Vec<usize>,
    #[serde(default)]
    pub parity: bool,
    #[serde(default)]
    pub negations: Vec<bool>,
}

impl Clause {
    pub fn edge(i: usize, j: usize) -> Self {
        Self {
            variables: vec![i, j],
            parity: false,
            negations: vec![false, false],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Compiled {
    Parity {
        mask: u64,
        parity: u32,
    },
    /// Violated iff the masked assignment equals `pattern`.
    Sat {
        mask: u64,
        pattern: u64,
    },
}

impl Compiled {
    #[inline]
    fn counts(&self, x: u64) -> bool {
        match *self {
            Compiled::Parity { mask, parity } => ((x & mask).count_ones() ^ parity) & 1 == 1,
            Compiled::Sat { mask, pattern } => x & mask == pattern,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemInstance {
    pub spec: ClassSpec,
    pub n: usize,
    pub clauses: Vec<Clause>,
    /// Seed the instance was drawn with, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip)]
    compiled: Vec<Compiled>,
}

impl ProblemInstance {
    pub fn new(spec: ClassSpec, clauses: Vec<Clause>) -> Result<Self> {
        let mut instance = Self {
            n: spec.n,
            spec,
            clauses,
            seed: None,
            compiled: Vec::new(),
        };
        instance.compile()?;
        Ok(instance)
    }

    /// Re-derive the bitmask form after deserializing.
    pub fn compile(&mut self) -> Result<()> {
        if self.n > MAX_INSTANCE_VARIABLES {
            return Err(Error::SizeLimit {
                n: self.n,
                limit: MAX_INSTANCE_VARIABLES,
            });
        }
        let sat = self.spec.kind == ClassKind::RandKSat;
        let mut compiled = Vec::with_capacity(self.clauses.len());
        for clause in &self.clauses {
            let mut mask = 0u64;
            for &v in &clause.variables {
                if v >= self.n {
                    return Err(Error::InvalidSpec(format!(
                        "clause variable {v} out of range for n = {}",
                        self.n
                    )));
                }
                if mask & (1 << v) != 0 {
                    return Err(Error::InvalidSpec(format!(
                        "clause {:?} repeats a variable",
                        clause.variables
                    )));
                }
                mask |= 1 << v;
            }
            if sat {
                if clause.negations.len() != clause.variables.len() {
                    return Err(Error::InvalidSpec(
                        "k-SAT clause needs one negation bit per variable".into(),
                    ));
                }
                let pattern = clause
                    .variables
                    .iter()
                    .zip(&clause.negations)
                    .filter(|(_, &neg)| neg)
                    .fold(0u64, |acc, (&v, _)| acc | 1 << v);
                compiled.push(Compiled::Sat { mask, pattern });
            } else {
                compiled.push(Compiled::Parity {
                    mask,
                    parity: clause.parity as u32,
                });
            }
        }
        self.compiled = compiled;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut instance: Self = serde_json::from_str(text)?;
        instance.spec.validate()?;
        if instance.n != instance.spec.n {
            return Err(Error::InvalidSpec(
                "instance n disagrees with its class".into(),
            ));
        }
        instance.compile()?;
        Ok(instance)
    }

    pub fn clause_count(&self) -> usize {
        self.clauses.len()
    }

    /// Cost of the assignment packed into `x` (bit `i` = variable `i`).
    #[inline]
    pub fn cost_of_index(&self, x: u64) -> usize {
        self.compiled.iter().filter(|c| c.counts(x)).count()
    }

    pub fn evaluate_cost(&self, x: &[bool]) -> Result<usize> {
        if x.len() != self.n {
            return Err(Error::BitstringLength {
                expected: self.n,
                got: x.len(),
            });
        }
        let packed = x
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | (b as u64) << i);
        Ok(self.cost_of_index(packed))
    }

    /// `c(x)` for every `x` in `0..2^n`.
    pub fn cost_table(&self) -> Result<Vec<u32>> {
        self.cost_table_with_limit(DEFAULT_EXHAUSTIVE_LIMIT)
    }

    pub fn cost_table_with_limit(&self, limit: usize) -> Result<Vec<u32>> {
        if self.n > limit {
            return Err(Error::SizeLimit { n: self.n, limit });
        }
        let size = 1usize << self.n;
        let mut costs = vec![0u32; size];
        costs
            .par_chunks_mut(4096)
            .enumerate()
            .for_each(|(chunk, out)| {
                let base = chunk * 4096;
                for (offset, slot) in out.iter_mut().enumerate() {
                    *slot = self.cost_of_index((base + offset) as u64) as u32;
                }
            });
        Ok(costs)
    }
}

/// Draw an instance of `spec`. Deterministic in `(spec, seed)`.
pub fn generate_instance(spec: &ClassSpec, seed: u64) -> Result<ProblemInstance> {
    spec.validate()?;
    let n = spec.n;
    if n > MAX_INSTANCE_VARIABLES {
        return Err(Error::SizeLimit {
            n,
            limit: MAX_INSTANCE_VARIABLES,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clauses = match spec.kind {
        ClassKind::MaxCutEr => {
            let p_e = spec.p_e.expect("validated");
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.random_bool(p_e) {
                        edges.push(Clause::edge(i, j));
                    }
                }
            }
            edges
        }
        ClassKind::HammingWeight => (0..n)
            .map(|i| Clause {
                variables: vec![i],
                parity: false,
                negations: vec![false],
            })
            .collect(),
        ClassKind::MaxE3Lin2 | ClassKind::MaxKXor | ClassKind::RandKSat => {
            let sat = spec.kind == ClassKind::RandKSat;
            (0..spec.m)
                .map(|_| {
                    let mut variables = sample(&mut rng, n, spec.k).into_vec();
                    variables.sort_unstable();
                    if sat {
                        let negations = (0..spec.k).map(|_| rng.random::<bool>()).collect();
                        Clause {
                            variables,
                            parity: false,
                            negations,
                        }
                    } else {
                        Clause {
                            variables,
                            parity: rng.random::<bool>(),
                            negations: vec![false; spec.k],
                        }
                    }
                })
                .collect()
        }
    };
    let mut instance = ProblemInstance::new(spec.clone(), clauses)?;
    instance.seed = Some(seed);
    Ok(instance)
}

/// Optimal cost and how many bitstrings attain it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Optimum {
    pub cost: usize,
    pub count: u64,
}

pub fn brute_force_optimum(instance: &ProblemInstance) -> Result<Optimum> {
    let costs = instance.cost_table()?;
    Ok(optimum_from_costs(&costs, instance.spec.maximize()))
}

pub fn optimum_from_costs(costs: &[u32], maximize: bool) -> Optimum {
    let best = if maximize {
        costs.iter().copied().max()
    } else {
        costs.iter().copied().min()
    }
    .unwrap_or(0);
    let count = costs.iter().filter(|&&c| c == best).count() as u64;
    Optimum {
        cost: best as usize,
        count,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    fn graph(n: usize, edges: &[(usize, usize)]) -> ProblemInstance {
        let spec = ClassSpec::max_cut_er(n, 1.0).unwrap();
        let clauses = edges.iter().map(|&(i, j)| Clause::edge(i, j)).collect();
        ProblemInstance::new(spec, clauses).unwrap()
    }

    #[test]
    fn edge_ceiling_survives_round_off() {
        assert_eq!(expected_edge_ceiling(10, 1.0 / 3.0), 15);
        assert_eq!(expected_edge_ceiling(8, 0.5), 14);
        assert_eq!(expected_edge_ceiling(20, 0.5), 95);
        assert_eq!(expected_edge_ceiling(3, 2.0 / 3.0), 2);
    }

    #[test]
    fn complete_graph_is_forced() {
        let spec = ClassSpec::max_cut_er(2, 1.0).unwrap();
        let inst = generate_instance(&spec, 0).unwrap();
        assert_eq!(inst.clauses, vec![Clause::edge(0, 1)]);
    }

    #[test]
    fn ksat_clause_is_structural() {
        let spec = ClassSpec::rand_ksat(5, 1, 2).unwrap();
        for seed in 0..20 {
            let inst = generate_instance(&spec, seed).unwrap();
            assert_eq!(inst.clauses.len(), 1);
            let c = &inst.clauses[0];
            assert_eq!(c.variables.len(), 2);
            assert_ne!(c.variables[0], c.variables[1]);
            assert!(c.variables.iter().all(|&v| v < 5));
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = ClassSpec::max_kxor(9, 12, 4).unwrap();
        assert_eq!(
            generate_instance(&spec, 7).unwrap(),
            generate_instance(&spec, 7).unwrap()
        );
        assert_ne!(
            generate_instance(&spec, 7).unwrap().clauses,
            generate_instance(&spec, 8).unwrap().clauses
        );
    }

    #[test]
    fn arity_larger_than_n_is_rejected() {
        assert!(matches!(
            ClassSpec::rand_ksat(2, 3, 3),
            Err(Error::InvalidSpec(_))
        ));
        assert!(ClassSpec::max_e3lin2(2, 3).is_err());
    }

    #[test]
    fn single_edge_costs() {
        let k2 = graph(2, &[(0, 1)]);
        assert_eq!(k2.evaluate_cost(&bits("01")).unwrap(), 1);
        assert_eq!(k2.evaluate_cost(&bits("00")).unwrap(), 0);
        assert!(matches!(
            k2.evaluate_cost(&bits("011")),
            Err(Error::BitstringLength {
                expected: 2,
                got: 3
            })
        ));
    }

    #[test]
    fn path_graph_cost_by_enumeration() {
        let path = graph(3, &[(0, 1), (1, 2)]);
        assert_eq!(path.evaluate_cost(&bits("010")).unwrap(), 2);
        // enumerate all 8 assignments: cost is the number of unequal neighbours
        for x in 0..8u64 {
            let b: Vec<bool> = (0..3).map(|i| x >> i & 1 == 1).collect();
            let expect = (b[0] != b[1]) as usize + (b[1] != b[2]) as usize;
            assert_eq!(path.cost_of_index(x), expect);
        }
    }

    #[test]
    fn parity_clause_identity() {
        let spec = ClassSpec::max_e3lin2(4, 1).unwrap();
        let clause = Clause {
            variables: vec![0, 2, 3],
            parity: false,
            negations: vec![false; 3],
        };
        let inst = ProblemInstance::new(spec, vec![clause]).unwrap();
        // x0 ⊕ x2 ⊕ x3 = 1 ⊕ 0 ⊕ 1 = 0
        assert_eq!(inst.evaluate_cost(&bits("1101")).unwrap(), 0);
        assert_eq!(inst.evaluate_cost(&bits("1001")).unwrap(), 0);
        assert_eq!(inst.evaluate_cost(&bits("1000")).unwrap(), 1);
    }

    #[test]
    fn sat_counts_violations() {
        let spec = ClassSpec::rand_ksat(3, 1, 2).unwrap();
        // (x0 ∨ ¬x2)
        let clause = Clause {
            variables: vec![0, 2],
            parity: false,
            negations: vec![false, true],
        };
        let inst = ProblemInstance::new(spec, vec![clause]).unwrap();
        assert_eq!(inst.evaluate_cost(&bits("001")).unwrap(), 1);
        assert_eq!(inst.evaluate_cost(&bits("000")).unwrap(), 0);
        assert_eq!(inst.evaluate_cost(&bits("101")).unwrap(), 0);
    }

    #[test]
    fn hamming_weight_counts_ones() {
        let spec = ClassSpec::hamming_weight(5).unwrap();
        let inst = generate_instance(&spec, 99).unwrap();
        for x in 0..32u64 {
            assert_eq!(inst.cost_of_index(x), x.count_ones() as usize);
        }
    }

    #[test]
    fn cost_sets() {
        assert_eq!(
            ClassSpec::max_cut_er(10, 1.0 / 3.0).unwrap().cost_set().max,
            15
        );
        assert_eq!(ClassSpec::rand_ksat(6, 4, 3).unwrap().cost_set().max, 4);
        assert_eq!(ClassSpec::hamming_weight(5).unwrap().cost_set().max, 5);
        let widened = ClassSpec::max_cut_er(10, 1.0 / 3.0)
            .unwrap()
            .with_margin(2.0)
            .unwrap();
        // sigma = sqrt(45 · 1/3 · 2/3) = sqrt(10)
        assert_eq!(
            widened.cost_set().max,
            (15.0 + 2.0 * 10f64.sqrt()).ceil() as usize
        );
        assert_eq!(widened.m, 15);
    }

    #[test]
    fn cost_probability_small_cases() {
        // 3-node path class (m = 2): 4 of 8 assignments cut exactly one edge
        let spec = ClassSpec::max_cut_er(3, 2.0 / 3.0).unwrap();
        assert_eq!(spec.m, 2);
        assert!((cost_probability(&spec, 1).unwrap() - 0.5).abs() < 1e-15);
        // one 2-literal clause: 3 of 4 assignments satisfy it, cost 0 = no conflicts
        let sat = ClassSpec::rand_ksat(2, 1, 2).unwrap();
        assert!((cost_probability(&sat, 0).unwrap() - 0.75).abs() < 1e-15);
        assert!(matches!(
            cost_probability(&sat, 2),
            Err(Error::CostOutOfRange { cost: 2, max: 1 })
        ));
    }

    #[test]
    fn pair_probability_examples() {
        let spec = ClassSpec::max_cut_er(4, 1.0).unwrap();
        let p0 = pair_probabilities(&spec, 0).unwrap();
        assert_eq!((p0.both, p0.one, p0.neither), (0.5, 0.0, 0.5));
        let p2 = pair_probabilities(&spec, 2).unwrap();
        assert!((p2.both - 1.0 / 6.0).abs() < 1e-15);

        let e3 = ClassSpec::max_e3lin2(3, 1).unwrap();
        let p = pair_probabilities(&e3, 2).unwrap();
        assert!((p.both + p.neither - 1.0).abs() < 1e-15);
        assert!(pair_probabilities(&e3, 4).is_err());
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(
            brute_force_optimum(&graph(2, &[(0, 1)])).unwrap(),
            Optimum { cost: 1, count: 2 }
        );
        assert_eq!(
            brute_force_optimum(&graph(3, &[(0, 1), (1, 2), (0, 2)])).unwrap(),
            Optimum { cost: 2, count: 6 }
        );
        let hw = generate_instance(&ClassSpec::hamming_weight(3).unwrap(), 0).unwrap();
        assert_eq!(
            brute_force_optimum(&hw).unwrap(),
            Optimum { cost: 3, count: 1 }
        );
    }

    #[test]
    fn brute_force_refuses_large_n() {
        let spec = ClassSpec::max_cut_er(30, 0.1).unwrap();
        let inst = generate_instance(&spec, 1).unwrap();
        assert!(matches!(
            brute_force_optimum(&inst),
            Err(Error::SizeLimit { n: 30, limit: 24 })
        ));
    }

    #[test]
    fn instance_json_round_trip_recompiles() {
        let spec = ClassSpec::rand_ksat(6, 5, 3).unwrap();
        let inst = generate_instance(&spec, 3).unwrap();
        let text = serde_json::to_string(&inst).unwrap();
        let back = ProblemInstance::from_json(&text).unwrap();
        for x in 0..64 {
            assert_eq!(back.cost_of_index(x), inst.cost_of_index(x));
        }
    }

    #[test]
    fn spec_json_rejects_unknown_fields() {
        let text =
            r#"{"kind":"rand-k-sat","n":4,"m":3,"k":2,"direction":"minimize-conflicts","extra":1}"#;
        assert!(serde_json::from_str::<ClassSpec>(text).is_err());
    }
}
