//! Classical parameter setting for QAOA on random constraint-satisfaction
//! classes.
//!
//! A class of random instances is summarized by how the cost of a bitstring
//! changes under bit flips at Hamming distance `d`. Evolving a single
//! amplitude per cost value through that summary gives a cheap stand-in for
//! the QAOA state, and optimizing its expected cost gives angles that
//! transfer to any instance of the class.
//!
//! ```
//! use homog_core::{heuristic, ClassSpec, OptimizerOptions, Parameterization};
//!
//! let spec = ClassSpec::max_cut_er(8, 0.5).unwrap();
//! let options = OptimizerOptions::for_class(&spec, Parameterization::LinearRamp4);
//! let result = heuristic(&spec, 3, &options).unwrap();
//! assert_eq!(result.gammas.len(), 3);
//! ```

pub mod combinatorics;
pub mod distributions;
pub mod error;
pub mod optimizer;
pub mod problem_classes;
pub mod proxy;
pub mod statevector;

pub use distributions::{
    empirical_distribution, empirical_stats, joint_cost_probability, pearson_correlation,
    precompute_all, replacement_distribution, CohortStats, DistributionTable,
    EmpiricalDistribution, SumRuleResiduals,
};
pub use error::{Error, Result};
pub use optimizer::{
    heuristic, heuristic_multistart, heuristic_with_table, homogeneous_objective,
    linear_ramp_expand, maximize, seeded_ramps, InitialPoint, OptimizationResult, OptimizerOptions,
    Parameterization, SearchOptions, SearchResult, StopReason,
};
pub use problem_classes::{
    brute_force_optimum, cost_probability, cost_set, generate_instance, pair_probabilities,
    ClassKind, ClassSpec, Clause, CostSet, Direction, Optimum, PairProbabilities, ProblemInstance,
};
pub use proxy::{
    evolve, evolve_step, expected_cost, proxy_pseudostate, HomogState, LinearRamp, Schedule,
};
pub use statevector::{approximation_ratio, expectation, qaoa_state, squared_overlap, Statevector};
