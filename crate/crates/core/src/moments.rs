//! Method-of-moments estimation of the variant proportion `π1` and the
//! allele-frequency bound `a`, pooling every (site, pool) pair.
//!
//! With `c = 1 - 4ε/3` the two statistics have expectations
//! `E m1 = c π1 a / 2` and `E m2 = ((N-1)/N) π1 a²/3 + π1 a / (2N)`,
//! which invert to
//! `â = 3(N c m2 - m1) / (2 m1 (N-1))` and `π̂1 = 2 m1 / (c â)`.

use crate::error::{Error, Result};
use crate::model::{Hyperparameters, PoolDesign, SiteCountMatrix};
use crate::reduce::chunked_sum_indexed;

/// Replacement for a non-positive `â`.
pub const TRUNCATED_A: f64 = 0.01;
/// Replacement for a non-positive `π̂1`.
pub const TRUNCATED_PI1: f64 = 0.001;

pub const A_BOUNDS: (f64, f64) = (0.01, 1.0);
pub const PI1_BOUNDS: (f64, f64) = (0.001, 0.999);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSummary {
    pub m1: f64,
    pub m2: f64,
    /// (site, pool) pairs with depth ≥ 2.
    pub n_terms: usize,
    /// Pairs skipped because their depth was 0 or 1.
    pub n_excluded: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatedHyperparameters {
    pub raw_a: f64,
    pub raw_pi1: f64,
    pub hyper: Hyperparameters,
    /// `raw_a ≤ 0`, replaced by [`TRUNCATED_A`].
    pub truncated_a: bool,
    /// `raw_pi1 ≤ 0`, replaced by [`TRUNCATED_PI1`].
    pub truncated_pi1: bool,
    /// Positive estimate moved into [`A_BOUNDS`].
    pub clamped_a: bool,
    /// Positive estimate moved into [`PI1_BOUNDS`].
    pub clamped_pi1: bool,
}

pub fn compute_moments(data: &SiteCountMatrix, design: &PoolDesign) -> Result<MomentSummary> {
    if data.pools() != design.pools() {
        return Err(Error::LengthMismatch { expected: design.pools(), got: data.pools() });
    }
    let n_terms = data.depths().iter().filter(|&&k| k >= 2).count();
    let n_excluded = data.depths().len() - n_terms;
    if n_terms == 0 {
        return Err(Error::EstimationImpossible(format!(
            "no (site, pool) pair has depth >= 2 ({n_excluded} pairs excluded)"
        )));
    }

    let q = design.null_alt_prob();
    let c = design.signal_scale();
    // Summed per site so that chunk boundaries depend only on the data layout.
    let per_site = |f: &(dyn Fn(f64, f64) -> f64 + Sync)| {
        chunked_sum_indexed(data.num_sites(), |i| {
            let site = data.site(i);
            site.depths
                .iter()
                .zip(site.alt_counts)
                .filter(|(&k, _)| k >= 2)
                .map(|(&k, &x)| f(k as f64, x as f64))
                .sum::<f64>()
        })
    };

    let m1 = per_site(&|k, x| x / k - q) / n_terms as f64;
    let scale = c * c;
    let m2 = per_site(&|k, x| {
        (x * x - k * k * q * q - k * q * (1.0 - q) - k * (1.0 - 2.0 * q) * m1 - k * k * 2.0 * q * m1)
            / ((k * k - k) * scale)
    }) / n_terms as f64;

    Ok(MomentSummary { m1, m2, n_terms, n_excluded })
}

pub fn estimate_hyperparameters(
    moments: &MomentSummary,
    design: &PoolDesign,
) -> Result<EstimatedHyperparameters> {
    let big_n = design.haploids() as f64;
    if design.haploids() < 2 {
        return Err(Error::UnsupportedDesign(
            "the moment estimator of a needs pool size N >= 2; supply a fixed a instead".into(),
        ));
    }
    let c = design.signal_scale();
    let MomentSummary { m1, m2, .. } = *moments;

    let (raw_a, a_trunc, raw_pi1) = if m1 == 0.0 {
        (0.0, TRUNCATED_A, 0.0)
    } else {
        let raw_a = 3.0 * (big_n * c * m2 - m1) / (2.0 * m1 * (big_n - 1.0));
        let a_trunc = if raw_a > 0.0 { raw_a } else { TRUNCATED_A };
        (raw_a, a_trunc, 2.0 * m1 / (c * a_trunc))
    };
    let pi1_trunc = if raw_pi1 > 0.0 { raw_pi1 } else { TRUNCATED_PI1 };

    let a = a_trunc.clamp(A_BOUNDS.0, A_BOUNDS.1);
    let pi1 = pi1_trunc.clamp(PI1_BOUNDS.0, PI1_BOUNDS.1);
    let truncated_a = a_trunc != raw_a;
    let truncated_pi1 = pi1_trunc != raw_pi1;

    Ok(EstimatedHyperparameters {
        raw_a,
        raw_pi1,
        hyper: Hyperparameters::new(pi1, a)?,
        truncated_a,
        truncated_pi1,
        clamped_a: !truncated_a && a != a_trunc,
        clamped_pi1: !truncated_pi1 && pi1 != pi1_trunc,
    })
}

/// [`compute_moments`] followed by [`estimate_hyperparameters`].
pub fn estimate(
    data: &SiteCountMatrix,
    design: &PoolDesign,
) -> Result<(MomentSummary, EstimatedHyperparameters)> {
    let moments = compute_moments(data, design)?;
    let est = estimate_hyperparameters(&moments, design)?;
    Ok((moments, est))
}
