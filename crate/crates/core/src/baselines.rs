//! Frequentist comparison procedures: a per-pool exact binomial test,
//! combined across pools by Simes' partial-conjunction rule (SNVer-style) or
//! by Fisher's method (META), followed by Benjamini–Hochberg.

use rayon::prelude::*;

use crate::embayes::{ascending_order, ranks_from_order, CallSet, DecisionRule};
use crate::error::{domain, Result};
use crate::model::{PairTable, PoolDesign, SiteCountMatrix};
use crate::special::{binomial_upper_tail, chi_squared_sf_even};

/// p-values are floored here before Fisher's log transform.
pub const FISHER_P_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct PValueVector(Vec<f64>);

impl PValueVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(domain(format!("p-value {bad} outside [0, 1]")));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `P(Binom(K, ε/3) ≥ X)`: evidence against the error-only model in one pool.
pub fn pool_pvalue(depth: u32, alt: u32, design: &PoolDesign) -> Result<f64> {
    if alt > depth {
        return Err(domain(format!("alt count {alt} exceeds depth {depth}")));
    }
    Ok(binomial_upper_tail(depth as u64, alt as u64, design.null_alt_prob()))
}

/// Simes combination for "at least one of M pool nulls is false":
/// `min_j (M/j) p_(j)`, capped at 1.
pub fn simes_partial_conjunction(pool_ps: &[f64]) -> Result<f64> {
    if pool_ps.is_empty() {
        return Err(domain("Simes combination of zero p-values"));
    }
    let mut sorted = pool_ps.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let m = sorted.len() as f64;
    let best = sorted
        .iter()
        .enumerate()
        .map(|(j, &p)| m / (j + 1) as f64 * p)
        .fold(f64::INFINITY, f64::min);
    Ok(best.min(1.0))
}

/// Fisher's combination `P(χ²_{2M} > -2 Σ ln p_j)`.
pub fn fisher_meta(pool_ps: &[f64]) -> Result<f64> {
    if pool_ps.is_empty() {
        return Err(domain("Fisher combination of zero p-values"));
    }
    let stat: f64 = -2.0 * pool_ps.iter().map(|p| p.max(FISHER_P_FLOOR).ln()).sum::<f64>();
    Ok(chi_squared_sf_even(stat, pool_ps.len()))
}

/// Benjamini–Hochberg step-up: reject the `k*` smallest p-values with
/// `k* = max{k : p_(k) ≤ kα/p}`.
pub fn bh_procedure(ps: &PValueVector, alpha: f64) -> Result<CallSet> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(format!("alpha = {alpha} outside (0, 1)")));
    }
    let values = ps.values();
    let order = ascending_order(values);
    let p = values.len() as f64;
    let num_rejected = order
        .iter()
        .enumerate()
        .rev()
        .find(|(k, &i)| values[i] <= (k + 1) as f64 * alpha / p)
        .map_or(0, |(k, _)| k + 1);
    let mut decisions = vec![false; values.len()];
    for &i in &order[..num_rejected] {
        decisions[i] = true;
    }
    Ok(CallSet {
        decisions,
        ranks: ranks_from_order(&order),
        num_rejected,
        attained_bfdr: None,
        rule: DecisionRule::BenjaminiHochberg { alpha },
        hyper_used: None,
    })
}

/// Which rule merges per-pool p-values into a site p-value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combiner {
    Simes,
    Fisher,
}

/// Combined p-value for every site.
pub fn site_pvalues(
    data: &SiteCountMatrix,
    design: &PoolDesign,
    combiner: Combiner,
) -> Result<PValueVector> {
    if data.pools() != design.pools() {
        return Err(domain(format!(
            "matrix has {} pools, design expects {}",
            data.pools(),
            design.pools()
        )));
    }
    let q = design.null_alt_prob();
    let tail = |k: u32, x: u32| binomial_upper_tail(k as u64, x as u64, q);
    let max_depth = data.depths().iter().copied().max().unwrap_or(0);
    let table = PairTable::build(max_depth, tail);
    let combine = match combiner {
        Combiner::Simes => simes_partial_conjunction,
        Combiner::Fisher => fisher_meta,
    };
    let values = (0..data.num_sites())
        .into_par_iter()
        .map(|i| {
            let site = data.site(i);
            let ps: Vec<f64> = site
                .depths
                .iter()
                .zip(site.alt_counts)
                .map(|(&k, &x)| table.get(k, x, tail))
                .collect();
            combine(&ps)
        })
        .collect::<Result<Vec<f64>>>()?;
    PValueVector::new(values)
}

pub fn snver_call(data: &SiteCountMatrix, design: &PoolDesign, alpha: f64) -> Result<CallSet> {
    bh_procedure(&site_pvalues(data, design, Combiner::Simes)?, alpha)
}

pub fn meta_call(data: &SiteCountMatrix, design: &PoolDesign, alpha: f64) -> Result<CallSet> {
    bh_procedure(&site_pvalues(data, design, Combiner::Fisher)?, alpha)
}
