//! Empirical Bayes detection of single-nucleotide variants from pooled
//! sequencing counts.
//!
//! A site is sequenced in `M` pools of `N` haploid genomes each. Pool `j`
//! yields `K_j` reads, `X_j` of which show the alternative allele. Under the
//! null every alternative read is a sequencing error (probability `ε/3`);
//! under the alternative each pool carries an allele frequency drawn from
//! `U(0, a)`. The crate
//!
//! * computes both marginal likelihoods exactly ([`model`]),
//! * estimates `(π1, a)` by the method of moments ([`moments`]),
//! * turns local fdr scores into calls with a Bayes-FDR step-up rule
//!   ([`embayes`]),
//! * provides binomial-test baselines combined by Simes or Fisher
//!   ([`baselines`]),
//! * and simulates, scores and tabulates benchmark runs ([`simulator`],
//!   [`evaluation`], [`benchmark`]).
//!
//! ```
//! use ebvariant::{call_pipeline, simulate, Mode, PoolDesign, SimulationSpec};
//!
//! let design = PoolDesign::new(5, 20, 0.01).unwrap();
//! let spec = SimulationSpec::new(20_000, design, 0.01, 0.02, 42);
//! let (data, truth) = simulate(&spec).unwrap();
//! let result = call_pipeline(&data, &design, 0.05, Mode::Empirical).unwrap();
//! assert!(result.calls.num_rejected <= truth.num_variants() * 2);
//! ```

pub mod baselines;
pub mod benchmark;
pub mod cli;
pub mod embayes;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod model;
pub mod moments;
pub mod reduce;
pub mod simulator;
pub mod special;

pub use baselines::{
    bh_procedure, fisher_meta, meta_call, pool_pvalue, simes_partial_conjunction, site_pvalues,
    snver_call, Combiner, PValueVector,
};
pub use benchmark::{run_cell, run_grid, run_roc, standard_grid, BenchmarkConfig, CellResult, GridCell, Method};
pub use embayes::{
    call_pipeline, step_up_call, threshold_call, threshold_for_loss_weight, CallSet, DecisionRule,
    HyperSource, Mode, PipelineResult,
};
pub use error::{Error, Result};
pub use evaluation::{
    aggregate_replications, gold_standard_fdr, roc_from_scores, score_callset, score_decisions,
    ConfusionCounts, EvaluationReport, GoldStandardReport, RocCurve, RocPoint,
};
pub use model::{
    alt_marginal_log_likelihood, batch_local_fdr, null_log_likelihood, site_local_fdr, Hyperparameters,
    LocalFdrVector, PoolDesign, SiteCountMatrix, SiteObservation,
};
pub use moments::{compute_moments, estimate, estimate_hyperparameters, EstimatedHyperparameters, MomentSummary};
pub use simulator::{simulate, simulate_replication, LatentTruth, SimulationSpec};
