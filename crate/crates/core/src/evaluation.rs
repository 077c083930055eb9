//! Scoring call sets against known truth: confusion counts, replication
//! averages, ROC sweeps over a ranking, and FDR against a partial gold
//! standard.

use std::collections::HashMap;

use crate::embayes::{ascending_order, CallSet};
use crate::error::{domain, Error, Result};
use crate::simulator::LatentTruth;

/// One replication's confusion counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    /// Rejections.
    pub r: usize,
    /// False rejections.
    pub v: usize,
    /// Acceptances.
    pub a: usize,
    /// False acceptances.
    pub u: usize,
}

impl ConfusionCounts {
    pub fn true_rejections(&self) -> usize {
        self.r - self.v
    }

    pub fn non_nulls(&self) -> usize {
        self.r - self.v + self.u
    }

    /// `V / (R ∨ 1)`.
    pub fn fdp(&self) -> f64 {
        self.v as f64 / self.r.max(1) as f64
    }

    /// `U / (A ∨ 1)`.
    pub fn fnp(&self) -> f64 {
        self.u as f64 / self.a.max(1) as f64
    }

    /// True rejections over non-nulls; 0 when there are no non-nulls.
    pub fn sensitivity(&self) -> f64 {
        let nn = self.non_nulls();
        if nn == 0 {
            0.0
        } else {
            self.true_rejections() as f64 / nn as f64
        }
    }
}

pub fn score_decisions(decisions: &[bool], mu: &[bool]) -> Result<ConfusionCounts> {
    if decisions.len() != mu.len() {
        return Err(Error::LengthMismatch { expected: mu.len(), got: decisions.len() });
    }
    let mut c = ConfusionCounts::default();
    for (&d, &m) in decisions.iter().zip(mu) {
        match (d, m) {
            (true, false) => {
                c.r += 1;
                c.v += 1;
            }
            (true, true) => c.r += 1,
            (false, true) => {
                c.a += 1;
                c.u += 1;
            }
            (false, false) => c.a += 1,
        }
    }
    Ok(c)
}

pub fn score_callset(calls: &CallSet, truth: &LatentTruth) -> Result<ConfusionCounts> {
    score_decisions(&calls.decisions, &truth.mu)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluationReport {
    /// Mean number of rejections.
    pub er: f64,
    /// Mean number of false rejections.
    pub ev: f64,
    /// Mean of `V/(R ∨ 1)` over replications.
    pub fdr: f64,
    /// Mean of `U/(A ∨ 1)`.
    pub fnr: f64,
    pub sensitivity: f64,
    /// Mean number of true rejections.
    pub etr: f64,
    pub replications: usize,
}

pub fn aggregate_replications(counts: &[ConfusionCounts]) -> Result<EvaluationReport> {
    if counts.is_empty() {
        return Err(domain("cannot aggregate zero replications"));
    }
    let n = counts.len() as f64;
    let mean = |f: &dyn Fn(&ConfusionCounts) -> f64| counts.iter().map(f).sum::<f64>() / n;
    Ok(EvaluationReport {
        er: mean(&|c| c.r as f64),
        ev: mean(&|c| c.v as f64),
        fdr: mean(&|c| c.fdp()),
        fnr: mean(&|c| c.fnp()),
        sensitivity: mean(&|c| c.sensitivity()),
        etr: mean(&|c| c.true_rejections() as f64),
        replications: counts.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    /// Number of top-ranked sites called.
    pub k: usize,
    pub fdr: f64,
    pub sensitivity: f64,
    /// Mean number of true calls among the top `k`.
    pub true_calls: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
}

impl RocCurve {
    /// Largest sensitivity among points whose averaged FDR is at most `level`,
    /// with the matching mean true-call count.
    pub fn at_fdr(&self, level: f64) -> Option<RocPoint> {
        self.points
            .iter()
            .filter(|pt| pt.fdr <= level)
            .max_by(|x, y| x.sensitivity.total_cmp(&y.sensitivity).then(y.k.cmp(&x.k)))
            .copied()
    }
}

/// One replication's ranking input: smaller scores are stronger calls.
#[derive(Debug, Clone, Copy)]
pub struct RankedReplication<'a> {
    pub scores: &'a [f64],
    pub mu: &'a [bool],
}

/// Averages, at each `k = 1..=max_calls`, the FDP and sensitivity of calling
/// the `k` best-ranked sites of each replication.
pub fn roc_from_scores(replications: &[RankedReplication<'_>], max_calls: usize) -> Result<RocCurve> {
    let mut acc = RocAccumulator::new(max_calls)?;
    for rep in replications {
        acc.add(*rep)?;
    }
    acc.finish()
}

/// Streaming form of [`roc_from_scores`], one replication at a time.
#[derive(Debug, Clone)]
pub struct RocAccumulator {
    fdr_sum: Vec<f64>,
    sens_sum: Vec<f64>,
    tp_sum: Vec<f64>,
    replications: usize,
}

impl RocAccumulator {
    pub fn new(max_calls: usize) -> Result<Self> {
        if max_calls == 0 {
            return Err(domain("max_calls must be positive"));
        }
        Ok(Self {
            fdr_sum: vec![0.0; max_calls],
            sens_sum: vec![0.0; max_calls],
            tp_sum: vec![0.0; max_calls],
            replications: 0,
        })
    }

    pub fn add(&mut self, rep: RankedReplication<'_>) -> Result<()> {
        if rep.scores.len() != rep.mu.len() {
            return Err(Error::LengthMismatch { expected: rep.mu.len(), got: rep.scores.len() });
        }
        let order = ascending_order(rep.scores);
        let non_nulls = rep.mu.iter().filter(|&&m| m).count();
        let mut tp = 0usize;
        for k in 0..self.fdr_sum.len() {
            if let Some(&i) = order.get(k) {
                tp += rep.mu[i] as usize;
            }
            let called = (k + 1).min(order.len());
            self.fdr_sum[k] += (called - tp) as f64 / called.max(1) as f64;
            self.sens_sum[k] += if non_nulls == 0 { 0.0 } else { tp as f64 / non_nulls as f64 };
            self.tp_sum[k] += tp as f64;
        }
        self.replications += 1;
        Ok(())
    }

    pub fn finish(self) -> Result<RocCurve> {
        if self.replications == 0 {
            return Err(domain("ROC needs at least one replication"));
        }
        let n = self.replications as f64;
        let points = (0..self.fdr_sum.len())
            .map(|k| RocPoint {
                k: k + 1,
                fdr: self.fdr_sum[k] / n,
                sensitivity: self.sens_sum[k] / n,
                true_calls: self.tp_sum[k] / n,
            })
            .collect();
        Ok(RocCurve { points })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldStandardReport {
    pub tp: usize,
    pub fp: usize,
    /// Calls without gold-standard information.
    pub other: usize,
    /// `FP / (TP + FP)`; `None` when no call overlaps the gold standard.
    pub fdr: Option<f64>,
}

/// `decisions[i]` and `site_ids[i]` describe site `i`; `gold` maps site ids
/// to known variant status.
pub fn gold_standard_fdr<S: AsRef<str>>(
    decisions: &[bool],
    site_ids: &[S],
    gold: &HashMap<String, bool>,
) -> Result<GoldStandardReport> {
    if site_ids.len() != decisions.len() {
        return Err(Error::LengthMismatch { expected: decisions.len(), got: site_ids.len() });
    }
    let (mut tp, mut fp, mut other) = (0, 0, 0);
    for i in (0..decisions.len()).filter(|&i| decisions[i]) {
        match gold.get(site_ids[i].as_ref()) {
            Some(true) => tp += 1,
            Some(false) => fp += 1,
            None => other += 1,
        }
    }
    let fdr = (tp + fp > 0).then(|| fp as f64 / (tp + fp) as f64);
    Ok(GoldStandardReport { tp, fp, other, fdr })
}
