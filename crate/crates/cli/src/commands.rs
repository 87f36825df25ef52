use std::time::Instant;

use anyhow::Context;
use homog_core::distributions::DistributionTable;
use homog_core::problem_classes::optimum_from_costs;
use homog_core::proxy::{proxy_landscape, pseudostate_trajectory};
use homog_core::statevector::{
    exact_landscape, expectation_from_costs, qaoa_state_from_costs, qaoa_trajectory, ratio_from,
};
use homog_core::*;
use ndarray::Array2;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Config, ConfigError};
use crate::output::{num, Outputs};

fn table(config: &Config) -> anyhow::Result<DistributionTable> {
    let spec = config.spec()?;
    let start = Instant::now();
    let table = DistributionTable::load_or_compute(&spec, config.cache_dir.as_deref())?;
    log::info!("table for {} ready in {:.2?}", spec.kind, start.elapsed());
    Ok(table)
}

fn seeds(config: &Config) -> Vec<u64> {
    (0..config.instances() as u64)
        .map(|i| config.seed + i)
        .collect()
}

#[derive(Serialize)]
struct PrecomputeSummary {
    class_hash: String,
    cost_set_size: usize,
    reachable_costs: usize,
    residuals: SumRuleResiduals,
    table: String,
}

pub fn precompute(config: &Config, out: &mut Outputs) -> anyhow::Result<()> {
    let spec = config.spec()?;
    let start = Instant::now();
    let table = precompute_all(&spec)?;
    log::info!(
        "precomputed |C| = {} in {:.2?}",
        table.len(),
        start.elapsed()
    );
    let path = match &config.cache_dir {
        Some(dir) => DistributionTable::cache_path(dir, &spec),
        None => out.path("table.json"),
    };
    table.save(&path)?;
    out.record(&path);
    let summary = PrecomputeSummary {
        class_hash: spec.hash_hex(),
        cost_set_size: table.len(),
        reachable_costs: (0..table.len()).filter(|&c| table.is_reachable(c)).count(),
        residuals: table.residuals(),
        table: path.display().to_string(),
    };
    println!(
        "|C| = {}, sum-rule residuals row {:.1e} total {:.1e} balance {:.1e}",
        summary.cost_set_size,
        summary.residuals.row_sum,
        summary.residuals.total,
        summary.residuals.detailed_balance
    );
    out.json("summary.json", &summary)
}

pub fn optimize(config: &Config, out: &mut Outputs) -> anyhow::Result<()> {
    let table = table(config)?;
    let mut options = OptimizerOptions::for_class(&table.spec, config.parameterization());
    options.tolerance = config.tol();
    options.max_iterations = config.max_iter();
    options.normalize = config.normalize;
    let starts = seeded_ramps(config.seed, config.starts());
    let result = heuristic_multistart(&table, config.p(), &options, &starts)?;
    println!(
        "p = {} objective {:.6} after {} iterations ({:?})",
        result.p, result.objective, result.iterations, result.stop
    );
    out.json("result.json", &result)
}

fn evaluation_schedule(config: &Config) -> anyhow::Result<Schedule> {
    if let Some(s) = &config.schedule {
        return Ok(s.clone());
    }
    match config.ramps.as_slice() {
        [ramp] => return Ok(ramp.expand(config.p())?),
        [] => {}
        _ => return Err(ConfigError("evaluate takes a single ramp".into()).into()),
    }
    if let Some(path) = &config.result {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let result: OptimizationResult = serde_json::from_str(&text)
            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        return Ok(result.schedule());
    }
    Err(ConfigError("evaluate needs a schedule, a ramp, or an optimization result".into()).into())
}

#[derive(Serialize)]
struct EvaluateSummary {
    instances: usize,
    mean_ratio: f64,
    std_ratio: f64,
    mean_expectation: f64,
}

pub fn evaluate(config: &Config, out: &mut Outputs) -> anyhow::Result<()> {
    let spec = config.spec()?;
    let schedule = evaluation_schedule(config)?;
    let rows: Vec<(u64, usize, f64, usize, f64)> = seeds(config)
        .par_iter()
        .map(|&seed| {
            let instance = generate_instance(&spec, seed)?;
            let costs = instance.cost_table()?;
            let optimum = optimum_from_costs(&costs, spec.maximize());
            let state = qaoa_state_from_costs(instance.n, &costs, &schedule)?;
            let e = expectation_from_costs(&costs, &state);
            let ratio = ratio_from(e, optimum.cost, instance.clause_count(), spec.direction)?;
            Ok((seed, instance.clause_count(), e, optimum.cost, ratio))
        })
        .collect::<homog_core::Result<_>>()?;
    let count = rows.len() as f64;
    let mean_ratio = rows.iter().map(|r| r.4).sum::<f64>() / count;
    let var = rows.iter().map(|r| (r.4 - mean_ratio).powi(2)).sum::<f64>() / count;
    let summary = EvaluateSummary {
        instances: rows.len(),
        mean_ratio,
        std_ratio: var.sqrt(),
        mean_expectation: rows.iter().map(|r| r.2).sum::<f64>() / count,
    };
    println!(
        "{} instances: ratio {:.4} ± {:.4}",
        summary.instances, summary.mean_ratio, summary.std_ratio
    );
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|&(seed, m, e, opt, ratio)| {
            vec![
                seed.to_string(),
                m.to_string(),
                num(e),
                opt.to_string(),
                num(ratio),
            ]
        })
        .collect();
    out.csv(
        "evaluate.csv",
        &["seed", "clauses", "expectation", "optimum", "ratio"],
        &table,
    )?;
    out.json("evaluate_summary.json", &summary)
}

pub fn overlap_sweep(config: &Config, out: &mut Outputs) -> anyhow::Result<()> {
    let table = table(config)?;
    let instance = generate_instance(&table.spec, config.seed)?;
    let p = config.p();
    let sets: Vec<Vec<f64>> = config
        .ramps
        .par_iter()
        .map(|ramp| -> anyhow::Result<Vec<f64>> {
            let schedule = ramp.expand(p)?;
            let exact = qaoa_trajectory(&instance, &schedule)?;
            let proxy = pseudostate_trajectory(&instance, &table, &schedule)?;
            exact
                .iter()
                .zip(&proxy)
                .map(|(e, q)| Ok(statevector::squared_overlap(&e.amplitudes, q)?))
                .collect()
        })
        .collect::<anyhow::Result<_>>()?;
    let mut rows = Vec::new();
    for (set, (ramp, overlaps)) in config.ramps.iter().zip(&sets).enumerate() {
        println!(
            "set {set}: overlap {:.4} after layer {p}",
            overlaps.last().copied().unwrap_or(f64::NAN)
        );
        for (layer, &o) in overlaps.iter().enumerate() {
            let mut row = vec![set.to_string()];
            row.extend(ramp.to_array().iter().map(|&v| num(v)));
            row.push(layer.to_string());
            row.push(num(o));
            rows.push(row);
        }
    }
    out.csv(
        "overlap.csv",
        &[
            "set",
            "gamma_start",
            "gamma_end",
            "beta_start",
            "beta_end",
            "layer",
            "overlap",
        ],
        &rows,
    )
}

fn axis((lo, hi): (f64, f64), steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / steps as f64)
        .collect()
}

fn grid_rows(grid: &Array2<f64>, gammas: &[f64], betas: &[f64]) -> Vec<Vec<String>> {
    grid.indexed_iter()
        .map(|((i, j), &v)| vec![num(gammas[i]), num(betas[j]), num(v)])
        .collect()
}

pub fn landscape(config: &Config, out: &mut Outputs) -> anyhow::Result<()> {
    let table = table(config)?;
    let instance = generate_instance(&table.spec, config.seed)?;
    let costs = instance.cost_table()?;
    let gammas = axis(config.gamma_range.expect("resolved"), config.grid());
    let betas = axis(config.beta_range.expect("resolved"), config.grid());

    let start = Instant::now();
    let prefix = match &config.prefix {
        Some(s) => qaoa_state_from_costs(instance.n, &costs, s)?,
        None => Statevector::uniform(instance.n),
    };
    let exact = exact_landscape(&costs, &prefix, &gammas, &betas)?;
    let exact_time = start.elapsed();

    let start = Instant::now();
    let prefix = match &config.prefix {
        Some(s) => evolve(&table, s)?,
        None => HomogState::initial(&table),
    };
    let proxy = proxy_landscape(&table, &prefix, &gammas, &betas, config.normalize)?;
    let proxy_time = start.elapsed();

    println!(
        "exact grid {:.2?}, proxy grid {:.2?} ({:.1}x)",
        exact_time,
        proxy_time,
        exact_time.as_secs_f64() / proxy_time.as_secs_f64().max(1e-12)
    );
    let header = ["gamma", "beta", "expectation"];
    out.csv(
        "landscape_exact.csv",
        &header,
        &grid_rows(&exact, &gammas, &betas),
    )?;
    out.csv(
        "landscape_proxy.csv",
        &header,
        &grid_rows(&proxy, &gammas, &betas),
    )
}

/// The most probable cost, lowest on ties.
fn modal_cost(table: &DistributionTable) -> usize {
    let mut best = 0;
    for (c, &p) in table.p_of_c.iter().enumerate() {
        if p > table.p_of_c[best] * (1.0 + 1e-12) {
            best = c;
        }
    }
    best
}

pub fn empirical_compare(config: &Config, out: &mut Outputs) -> anyhow::Result<()> {
    let table = table(config)?;
    let instances: Vec<ProblemInstance> = seeds(config)
        .iter()
        .map(|&s| generate_instance(&table.spec, s))
        .collect::<homog_core::Result<_>>()?;
    let cprimes = if config.cprimes.is_empty() {
        vec![modal_cost(&table)]
    } else {
        config.cprimes.clone()
    };
    let mut cells = Vec::new();
    let mut correlations = Vec::new();
    for &cp in &cprimes {
        let analytic = replacement_distribution(&table.spec, cp)?;
        let stats = empirical_stats(&instances, cp)?;
        let rows = analytic.nrows();
        let width = analytic.ncols().max(stats.mean.ncols());
        let pad = |a: &Array2<f64>| {
            Array2::from_shape_fn(
                (rows, width),
                |(d, c)| {
                    if c < a.ncols() {
                        a[[d, c]]
                    } else {
                        0.0
                    }
                },
            )
        };
        let analytic = pad(&analytic);
        let mean = pad(&stats.mean);
        let std = pad(&stats.std);
        let r = pearson_correlation(analytic.view(), mean.view())?;
        println!("c' = {cp}: {} anchors, Pearson r {r:.4}", stats.cohort_size);
        correlations.push(vec![cp.to_string(), stats.cohort_size.to_string(), num(r)]);
        for d in 0..rows {
            for c in 0..width {
                let rel = if mean[[d, c]] > 0.0 {
                    num(std[[d, c]] / mean[[d, c]])
                } else {
                    String::new()
                };
                cells.push(vec![
                    cp.to_string(),
                    d.to_string(),
                    c.to_string(),
                    num(analytic[[d, c]]),
                    num(mean[[d, c]]),
                    num(std[[d, c]]),
                    rel,
                ]);
            }
        }
    }
    out.csv(
        "heatmap.csv",
        &[
            "cprime",
            "d",
            "c",
            "analytic",
            "empirical_mean",
            "empirical_std",
            "std_over_mean",
        ],
        &cells,
    )?;
    out.csv(
        "pearson.csv",
        &["cprime", "anchors", "pearson_r"],
        &correlations,
    )
}
