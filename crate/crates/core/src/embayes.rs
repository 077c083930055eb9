//! The empirical Bayes step-up procedure and the fixed-threshold Bayes rule.
//!
//! Sorted ascending, the smallest `J` local fdr scores are rejected where `J`
//! is the largest prefix whose running mean stays at or below `α`. The mean
//! of the rejected scores estimates the Bayes FDR of the call set.

use std::cmp::Ordering;

use crate::error::{domain, Result};
use crate::model::{batch_local_fdr, Hyperparameters, LocalFdrVector, PoolDesign, SiteCountMatrix};
use crate::moments::{estimate, EstimatedHyperparameters, MomentSummary};

/// How a [`CallSet`] chose its rejections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecisionRule {
    StepUp { alpha: f64 },
    Threshold { t: f64 },
    BenjaminiHochberg { alpha: f64 },
}

/// Where the hyperparameters behind a set of fdr scores came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HyperSource {
    Estimated(EstimatedHyperparameters),
    Oracle(Hyperparameters),
    Fixed(Hyperparameters),
}

impl HyperSource {
    pub fn hyper(&self) -> Hyperparameters {
        match self {
            HyperSource::Estimated(e) => e.hyper,
            HyperSource::Oracle(h) | HyperSource::Fixed(h) => *h,
        }
    }

    pub fn mode_name(&self) -> &'static str {
        match self {
            HyperSource::Estimated(_) => "empirical",
            HyperSource::Oracle(_) => "oracle",
            HyperSource::Fixed(_) => "fixed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CallSet {
    /// `decisions[i]` is true when site `i` is called a variant.
    pub decisions: Vec<bool>,
    /// 1-based position of each site in the ranking (ties broken by index).
    pub ranks: Vec<usize>,
    pub num_rejected: usize,
    /// Mean score over the rejected set; `Some(0.0)` when nothing is rejected.
    /// `None` for p-value procedures.
    pub attained_bfdr: Option<f64>,
    pub rule: DecisionRule,
    pub hyper_used: Option<HyperSource>,
}

impl CallSet {
    pub fn len(&self) -> usize {
        self.decisions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decisions.is_empty()
    }

    pub fn rejected(&self) -> impl Iterator<Item = usize> + '_ {
        self.decisions.iter().enumerate().filter(|(_, &d)| d).map(|(i, _)| i)
    }
}

/// Indices sorted by ascending score, ties by ascending index.
pub fn ascending_order(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&i, &j| match scores[i].total_cmp(&scores[j]) {
        Ordering::Equal => i.cmp(&j),
        o => o,
    });
    order
}

pub(crate) fn ranks_from_order(order: &[usize]) -> Vec<usize> {
    let mut ranks = vec![0; order.len()];
    for (pos, &i) in order.iter().enumerate() {
        ranks[i] = pos + 1;
    }
    ranks
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(format!("alpha = {alpha} outside (0, 1)")));
    }
    Ok(())
}

/// Rejects the largest prefix of sorted scores whose mean is at most `alpha`.
pub fn step_up_call(scores: &LocalFdrVector, alpha: f64) -> Result<CallSet> {
    check_alpha(alpha)?;
    let s = scores.scores();
    let order = ascending_order(s);

    let mut cumulative = 0.0;
    let mut best = (0, 0.0);
    for (j, &i) in order.iter().enumerate() {
        cumulative += s[i];
        let mean = cumulative / (j + 1) as f64;
        if mean <= alpha {
            best = (j + 1, mean);
        }
    }
    let (num_rejected, attained) = best;

    let mut decisions = vec![false; s.len()];
    for &i in &order[..num_rejected] {
        decisions[i] = true;
    }
    Ok(CallSet {
        decisions,
        ranks: ranks_from_order(&order),
        num_rejected,
        attained_bfdr: Some(attained),
        rule: DecisionRule::StepUp { alpha },
        hyper_used: None,
    })
}

/// Bayes rule `δᵢ = 1{fdrᵢ < t}`; a loss weight `λ` corresponds to
/// `t = 1/(λ + 1)`.
pub fn threshold_call(scores: &LocalFdrVector, t: f64) -> Result<CallSet> {
    if !(0.0..=1.0).contains(&t) {
        return Err(domain(format!("threshold t = {t} outside [0, 1]")));
    }
    let s = scores.scores();
    let decisions: Vec<bool> = s.iter().map(|&v| v < t).collect();
    let rejected: Vec<f64> = s.iter().copied().filter(|&v| v < t).collect();
    let attained = if rejected.is_empty() {
        0.0
    } else {
        rejected.iter().sum::<f64>() / rejected.len() as f64
    };
    Ok(CallSet {
        num_rejected: rejected.len(),
        decisions,
        ranks: ranks_from_order(&ascending_order(s)),
        attained_bfdr: Some(attained),
        rule: DecisionRule::Threshold { t },
        hyper_used: None,
    })
}

/// `t = 1/(λ + 1)` for the loss `λ·(false rejections) + (false acceptances)`.
pub fn threshold_for_loss_weight(lambda: f64) -> f64 {
    1.0 / (lambda + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    /// Estimate `(π1, a)` from the data by moments.
    Empirical,
    /// Use the true generating hyperparameters.
    Oracle(Hyperparameters),
    /// Use user-supplied hyperparameters.
    Fixed(Hyperparameters),
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub calls: CallSet,
    pub scores: LocalFdrVector,
    pub moments: Option<MomentSummary>,
}

/// Hyperparameters → local fdr for every site → step-up calls.
pub fn call_pipeline(
    data: &SiteCountMatrix,
    design: &PoolDesign,
    alpha: f64,
    mode: Mode,
) -> Result<PipelineResult> {
    check_alpha(alpha)?;
    let (source, moments) = match mode {
        Mode::Empirical => {
            let (m, est) = estimate(data, design)?;
            (HyperSource::Estimated(est), Some(m))
        }
        Mode::Oracle(h) => (HyperSource::Oracle(h), None),
        Mode::Fixed(h) => (HyperSource::Fixed(h), None),
    };
    let scores = batch_local_fdr(data, design, &source.hyper())?;
    let mut calls = step_up_call(&scores, alpha)?;
    calls.hyper_used = Some(source);
    Ok(PipelineResult { calls, scores, moments })
}
