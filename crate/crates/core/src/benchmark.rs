//! Monte-Carlo comparison of the empirical Bayes procedure, its oracle
//! version and the two frequentist baselines over a grid of `(π1, a)`.

use std::fmt;
use std::str::FromStr;

use crate::baselines::{bh_procedure, site_pvalues, Combiner};
use crate::embayes::{call_pipeline, CallSet, Mode};
use crate::error::{domain, Error, Result};
use crate::evaluation::{
    aggregate_replications, score_callset, ConfusionCounts, EvaluationReport, RankedReplication,
    RocAccumulator, RocCurve,
};
use crate::model::{batch_local_fdr, PoolDesign};
use crate::moments::estimate;
use crate::simulator::{mix_seed, simulate_replication, LatentTruth, SimulationSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    EmBayes,
    Oracle,
    Snver,
    Meta,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::EmBayes, Method::Oracle, Method::Snver, Method::Meta];

    pub fn name(&self) -> &'static str {
        match self {
            Method::EmBayes => "embayes",
            Method::Oracle => "oracle",
            Method::Snver => "snver",
            Method::Meta => "meta",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| domain(format!("unknown method '{s}' (expected embayes, oracle, snver or meta)")))
    }
}

/// One `(π1, a)` setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub pi1: f64,
    pub a: f64,
}

/// The variant proportions and prior bounds of the standard comparison table.
pub fn standard_grid() -> Vec<GridCell> {
    let mut cells = Vec::new();
    for pi1 in [0.01, 0.007, 0.004, 0.001] {
        for a in [0.01, 0.02] {
            cells.push(GridCell { pi1, a });
        }
    }
    cells
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub p: usize,
    pub design: PoolDesign,
    pub coverage_mean: f64,
    pub coverage_shape: f64,
    pub replications: usize,
    pub seed: u64,
    pub alpha: f64,
    pub methods: Vec<Method>,
}

impl BenchmarkConfig {
    /// Five pools of 20 haploids, ε = 0.01, α = 0.05, every method.
    pub fn standard(p: usize, replications: usize, seed: u64) -> Self {
        Self {
            p,
            design: PoolDesign::new(5, 20, 0.01).expect("valid design"),
            coverage_mean: crate::simulator::DEFAULT_COVERAGE_MEAN,
            coverage_shape: crate::simulator::DEFAULT_COVERAGE_SHAPE,
            replications,
            seed,
            alpha: 0.05,
            methods: Method::ALL.to_vec(),
        }
    }

    /// Simulation spec for one cell. The seed depends on the cell's values,
    /// not its position in the grid.
    pub fn spec_for(&self, cell: GridCell) -> SimulationSpec {
        SimulationSpec {
            p: self.p,
            design: self.design,
            pi1: cell.pi1,
            a: cell.a,
            coverage_mean: self.coverage_mean,
            coverage_shape: self.coverage_shape,
            seed: mix_seed(mix_seed(self.seed, cell.pi1.to_bits()), cell.a.to_bits()),
            replications: self.replications,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub method: Method,
    pub report: EvaluationReport,
    pub per_replication: Vec<ConfusionCounts>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub cell: GridCell,
    pub p: usize,
    pub results: Vec<MethodResult>,
}

impl CellResult {
    pub fn get(&self, method: Method) -> Option<&MethodResult> {
        self.results.iter().find(|r| r.method == method)
    }
}

/// Calls of one method on one dataset.
pub fn run_method(
    method: Method,
    spec: &SimulationSpec,
    data: &crate::model::SiteCountMatrix,
    alpha: f64,
) -> Result<CallSet> {
    let design = &spec.design;
    match method {
        Method::EmBayes => Ok(call_pipeline(data, design, alpha, Mode::Empirical)?.calls),
        Method::Oracle => Ok(call_pipeline(data, design, alpha, Mode::Oracle(spec.hyperparameters()?))?.calls),
        Method::Snver => bh_procedure(&site_pvalues(data, design, Combiner::Simes)?, alpha),
        Method::Meta => bh_procedure(&site_pvalues(data, design, Combiner::Fisher)?, alpha),
    }
}

/// Simulates `replications` datasets for `cell` and scores every method.
pub fn run_cell(config: &BenchmarkConfig, cell: GridCell) -> Result<CellResult> {
    let spec = config.spec_for(cell);
    spec.validate()?;
    let mut counts: Vec<Vec<ConfusionCounts>> = vec![Vec::with_capacity(config.replications); config.methods.len()];
    for r in 0..config.replications {
        let (data, truth) = simulate_replication(&spec, r)?;
        for (slot, &method) in counts.iter_mut().zip(&config.methods) {
            let calls = run_method(method, &spec, &data, config.alpha)?;
            slot.push(score_callset(&calls, &truth)?);
        }
    }
    let results = config
        .methods
        .iter()
        .zip(counts)
        .map(|(&method, per_replication)| {
            Ok(MethodResult { method, report: aggregate_replications(&per_replication)?, per_replication })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CellResult { cell, p: config.p, results })
}

pub fn run_grid(config: &BenchmarkConfig, cells: &[GridCell]) -> Result<Vec<CellResult>> {
    cells.iter().map(|&cell| run_cell(config, cell)).collect()
}

/// Ranking scores of a method: local fdr for the Bayes procedures,
/// combined p-values for the frequentist ones. Smaller is stronger.
pub fn ranking_scores(
    method: Method,
    spec: &SimulationSpec,
    data: &crate::model::SiteCountMatrix,
) -> Result<Vec<f64>> {
    let design = &spec.design;
    Ok(match method {
        Method::EmBayes => {
            let (_, est) = estimate(data, design)?;
            batch_local_fdr(data, design, &est.hyper)?.into_inner()
        }
        Method::Oracle => batch_local_fdr(data, design, &spec.hyperparameters()?)?.into_inner(),
        Method::Snver => site_pvalues(data, design, Combiner::Simes)?.values().to_vec(),
        Method::Meta => site_pvalues(data, design, Combiner::Fisher)?.values().to_vec(),
    })
}

/// Averaged ROC curves (top-`k` FDR and sensitivity) for each method.
pub fn run_roc(
    config: &BenchmarkConfig,
    cell: GridCell,
    max_calls: usize,
) -> Result<Vec<(Method, RocCurve)>> {
    let spec = config.spec_for(cell);
    spec.validate()?;
    let mut accs = config
        .methods
        .iter()
        .map(|_| RocAccumulator::new(max_calls))
        .collect::<Result<Vec<_>>>()?;
    for r in 0..config.replications {
        let (data, truth): (_, LatentTruth) = simulate_replication(&spec, r)?;
        for (acc, &method) in accs.iter_mut().zip(&config.methods) {
            let scores = ranking_scores(method, &spec, &data)?;
            acc.add(RankedReplication { scores: &scores, mu: &truth.mu })?;
        }
    }
    config
        .methods
        .iter()
        .zip(accs)
        .map(|(&m, acc)| Ok((m, acc.finish()?)))
        .collect()
}
