//! Marginal likelihoods of pooled read counts and the multi-pool local fdr.
//!
//! A site is null (`μ = 0`) when every pool has minor allele frequency zero;
//! reads then show the alternative allele only through sequencing error,
//! `X ~ Binom(K, ε/3)`. Under the alternative each pool draws
//! `θ ~ U(0, a)`, `n ~ Binom(N, θ)` carriers, and
//! `X ~ Binom(K, pₙ)` with `pₙ = (n/N)(1-ε) + ((N-n)/N)(ε/3)`.
//!
//! Integrating `θ` out gives per-carrier-count weights
//! `wₙ = I_a(n+1, N-n+1) / (a(N+1))`, so the alternative marginal is the
//! finite mixture `Σₙ wₙ Binom(X; K, pₙ)`.

use std::borrow::Cow;

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::special::{ln_beta_reg, ln_binom_pmf_parts, ln_choose, log_sum_exp};

/// Absolute tolerance on `π0 + π1 = 1`.
pub const PRIOR_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoolDesign {
    pools: usize,
    haploids: u32,
    error_rate: f64,
}

impl PoolDesign {
    pub fn new(pools: usize, haploids: u32, error_rate: f64) -> Result<Self> {
        if pools == 0 {
            return Err(domain("number of pools must be at least 1"));
        }
        if haploids == 0 {
            return Err(domain("pool size must be at least 1"));
        }
        if !(0.0..0.5).contains(&error_rate) {
            return Err(domain(format!("error rate {error_rate} outside [0, 0.5)")));
        }
        Ok(Self { pools, haploids, error_rate })
    }

    pub fn pools(&self) -> usize {
        self.pools
    }

    pub fn haploids(&self) -> u32 {
        self.haploids
    }

    pub fn error_rate(&self) -> f64 {
        self.error_rate
    }

    /// Probability that a reference read shows one specific alternative base.
    pub fn null_alt_prob(&self) -> f64 {
        self.error_rate / 3.0
    }

    /// `1 - 4ε/3`, the attenuation of allele frequency by sequencing error.
    pub fn signal_scale(&self) -> f64 {
        1.0 - 4.0 * self.error_rate / 3.0
    }

    /// Probability that a read shows the alternative allele when `n` of the
    /// `N` haploids in the pool carry it.
    pub fn read_alt_prob(&self, carriers: u32) -> f64 {
        let n = carriers as f64;
        let total = self.haploids as f64;
        n / total * (1.0 - self.error_rate) + (total - n) / total * self.null_alt_prob()
    }
}

/// Prior mass on null and variant sites plus the upper bound of the
/// uniform allele-frequency prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparameters {
    pi0: f64,
    pi1: f64,
    a: f64,
}

impl Hyperparameters {
    /// Builds from the variant proportion; `π0 = 1 - π1`.
    pub fn new(pi1: f64, a: f64) -> Result<Self> {
        Self::from_parts(1.0 - pi1, pi1, a)
    }

    pub fn from_parts(pi0: f64, pi1: f64, a: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&pi1) || !(0.0..=1.0).contains(&pi0) {
            return Err(domain(format!("prior masses ({pi0}, {pi1}) must lie in [0, 1]")));
        }
        if (pi0 + pi1 - 1.0).abs() > PRIOR_SUM_TOL {
            return Err(domain(format!("pi0 + pi1 = {} != 1", pi0 + pi1)));
        }
        if !(a > 0.0 && a <= 1.0) {
            return Err(domain(format!("prior bound a = {a} outside (0, 1]")));
        }
        Ok(Self { pi0, pi1, a })
    }

    pub fn pi0(&self) -> f64 {
        self.pi0
    }

    pub fn pi1(&self) -> f64 {
        self.pi1
    }

    pub fn a(&self) -> f64 {
        self.a
    }
}

/// Read counts of one site across the pools.
#[derive(Debug, Clone, Copy)]
pub struct SiteObservation<'a> {
    pub depths: &'a [u32],
    pub alt_counts: &'a [u32],
}

impl<'a> SiteObservation<'a> {
    pub fn new(depths: &'a [u32], alt_counts: &'a [u32]) -> Self {
        Self { depths, alt_counts }
    }

    fn validate(&self, design: &PoolDesign) -> std::result::Result<(), String> {
        if self.depths.len() != design.pools || self.alt_counts.len() != design.pools {
            return Err(format!(
                "expected {} pools, got {} depths and {} alt counts",
                design.pools,
                self.depths.len(),
                self.alt_counts.len()
            ));
        }
        for (j, (&k, &x)) in self.depths.iter().zip(self.alt_counts).enumerate() {
            if x > k {
                return Err(format!("pool {}: alt count {x} exceeds depth {k}", j + 1));
            }
        }
        Ok(())
    }
}

/// Depth and alternative-allele counts for `p` sites × `M` pools, stored
/// site-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteCountMatrix {
    pools: usize,
    depths: Vec<u32>,
    alt_counts: Vec<u32>,
    ids: Option<Vec<String>>,
}

impl SiteCountMatrix {
    /// `ids = None` names sites `site1`, `site2`, ... in order.
    pub fn new(
        pools: usize,
        depths: Vec<u32>,
        alt_counts: Vec<u32>,
        ids: Option<Vec<String>>,
    ) -> Result<Self> {
        if pools == 0 {
            return Err(domain("count matrix needs at least one pool"));
        }
        if depths.len() != alt_counts.len() {
            return Err(Error::LengthMismatch { expected: depths.len(), got: alt_counts.len() });
        }
        if depths.is_empty() || !depths.len().is_multiple_of(pools) {
            return Err(domain(format!(
                "{} entries do not form a non-empty matrix with {pools} pools",
                depths.len()
            )));
        }
        let sites = depths.len() / pools;
        if let Some(ids) = &ids {
            if ids.len() != sites {
                return Err(Error::LengthMismatch { expected: sites, got: ids.len() });
            }
        }
        let matrix = Self { pools, depths, alt_counts, ids };
        for i in 0..sites {
            let site = matrix.site(i);
            if let Some((j, (k, x))) = site
                .depths
                .iter()
                .zip(site.alt_counts)
                .enumerate()
                .find(|(_, (k, x))| x > k)
            {
                return Err(Error::InvalidSite {
                    site_id: matrix.site_id(i).into_owned(),
                    reason: format!("pool {}: alt count {x} exceeds depth {k}", j + 1),
                });
            }
        }
        Ok(matrix)
    }

    pub fn num_sites(&self) -> usize {
        self.depths.len() / self.pools
    }

    pub fn pools(&self) -> usize {
        self.pools
    }

    pub fn site(&self, i: usize) -> SiteObservation<'_> {
        let range = i * self.pools..(i + 1) * self.pools;
        SiteObservation { depths: &self.depths[range.clone()], alt_counts: &self.alt_counts[range] }
    }

    pub fn sites(&self) -> impl Iterator<Item = SiteObservation<'_>> + '_ {
        self.depths
            .chunks_exact(self.pools)
            .zip(self.alt_counts.chunks_exact(self.pools))
            .map(|(depths, alt_counts)| SiteObservation { depths, alt_counts })
    }

    pub fn site_id(&self, i: usize) -> Cow<'_, str> {
        match &self.ids {
            Some(ids) => Cow::Borrowed(ids[i].as_str()),
            None => Cow::Owned(format!("site{}", i + 1)),
        }
    }

    pub fn depths(&self) -> &[u32] {
        &self.depths
    }

    pub fn alt_counts(&self) -> &[u32] {
        &self.alt_counts
    }

    /// Rows reordered so that row `r` of the result is row `order[r]` of `self`.
    pub fn reordered(&self, order: &[usize]) -> Result<Self> {
        let m = self.pools;
        let mut depths = Vec::with_capacity(order.len() * m);
        let mut alt_counts = Vec::with_capacity(order.len() * m);
        for &i in order {
            let site = self.site(i);
            depths.extend_from_slice(site.depths);
            alt_counts.extend_from_slice(site.alt_counts);
        }
        let ids = order.iter().map(|&i| self.site_id(i).into_owned()).collect();
        Self::new(m, depths, alt_counts, Some(ids))
    }

    fn check_design(&self, design: &PoolDesign) -> Result<()> {
        if self.pools != design.pools {
            return Err(Error::InvalidSite {
                site_id: self.site_id(0).into_owned(),
                reason: format!("matrix has {} pools, design expects {}", self.pools, design.pools),
            });
        }
        Ok(())
    }
}

/// Per-site posterior null probabilities, aligned with the input sites.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFdrVector(Vec<f64>);

impl LocalFdrVector {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if let Some(bad) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(domain(format!("fdr score {bad} outside [0, 1]")));
        }
        Ok(Self(scores))
    }

    pub fn scores(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// `ln f(X | μ = 0)`: the binomial(K, ε/3) mass at `X`.
pub fn null_log_likelihood(depth: u32, alt: u32, design: &PoolDesign) -> Result<f64> {
    check_counts(depth, alt)?;
    let q = design.null_alt_prob();
    Ok(ln_binom_pmf_parts(
        ln_choose(depth as u64, alt as u64),
        alt as u64,
        depth as u64,
        q.ln(),
        (-q).ln_1p(),
    ))
}

/// `ln (1/a)∫₀ᵃ f(X | θ) dθ`: the alternative marginal likelihood of one pool.
pub fn alt_marginal_log_likelihood(
    depth: u32,
    alt: u32,
    design: &PoolDesign,
    a: f64,
) -> Result<f64> {
    check_counts(depth, alt)?;
    let kernel = AltKernel::new(design, a)?;
    Ok(kernel.log_likelihood(depth, alt, ln_choose(depth as u64, alt as u64)))
}

/// Posterior probability that the site is null, given every pool's counts.
pub fn site_local_fdr(
    obs: SiteObservation<'_>,
    design: &PoolDesign,
    hyper: &Hyperparameters,
) -> Result<f64> {
    obs.validate(design).map_err(domain)?;
    Ok(LocalFdrModel::new(design, hyper)?.site_fdr(obs))
}

/// [`site_local_fdr`] for every site. Per-pair likelihoods are shared through
/// a lookup table, so results match the per-site function bit for bit.
pub fn batch_local_fdr(
    data: &SiteCountMatrix,
    design: &PoolDesign,
    hyper: &Hyperparameters,
) -> Result<LocalFdrVector> {
    data.check_design(design)?;
    let model = LocalFdrModel::new(design, hyper)?;
    let max_depth = data.depths.iter().copied().max().unwrap_or(0);
    let table = PairTable::build(max_depth, |k, x| model.pair_log_likelihoods(k, x));
    let scores: Vec<f64> = (0..data.num_sites())
        .into_par_iter()
        .map(|i| {
            let site = data.site(i);
            let (l0, l1) = site.depths.iter().zip(site.alt_counts).fold(
                (0.0, 0.0),
                |(l0, l1), (&k, &x)| {
                    let (f0, f1) = table.get(k, x, |k, x| model.pair_log_likelihoods(k, x));
                    (l0 + f0, l1 + f1)
                },
            );
            model.posterior_null(l0, l1)
        })
        .collect();
    Ok(LocalFdrVector(scores))
}

fn check_counts(depth: u32, alt: u32) -> Result<()> {
    if alt > depth {
        return Err(domain(format!("alt count {alt} exceeds depth {depth}")));
    }
    Ok(())
}

/// Precomputed carrier-count mixture for the alternative likelihood.
#[derive(Debug, Clone)]
pub(crate) struct AltKernel {
    ln_weights: Vec<f64>,
    ln_p: Vec<f64>,
    ln_q: Vec<f64>,
}

impl AltKernel {
    pub(crate) fn new(design: &PoolDesign, a: f64) -> Result<Self> {
        if !(a > 0.0 && a <= 1.0) {
            return Err(domain(format!("prior bound a = {a} outside (0, 1]")));
        }
        let big_n = design.haploids;
        let ln_norm = (a * (big_n as f64 + 1.0)).ln();
        let mut ln_weights = Vec::with_capacity(big_n as usize + 1);
        let mut ln_p = Vec::with_capacity(big_n as usize + 1);
        let mut ln_q = Vec::with_capacity(big_n as usize + 1);
        for n in 0..=big_n {
            let shape_a = n as f64 + 1.0;
            let shape_b = (big_n - n) as f64 + 1.0;
            ln_weights.push(ln_beta_reg(shape_a, shape_b, a) - ln_norm);
            let p = design.read_alt_prob(n);
            ln_p.push(p.ln());
            ln_q.push((-p).ln_1p());
        }
        Ok(Self { ln_weights, ln_p, ln_q })
    }

    fn log_likelihood(&self, depth: u32, alt: u32, ln_coef: f64) -> f64 {
        let mut terms = [0.0f64; 64];
        let n_terms = self.ln_weights.len();
        let mut heap;
        let buf: &mut [f64] = if n_terms <= terms.len() {
            &mut terms[..n_terms]
        } else {
            heap = vec![0.0; n_terms];
            &mut heap
        };
        for (n, slot) in buf.iter_mut().enumerate() {
            *slot = self.ln_weights[n]
                + ln_binom_pmf_parts(ln_coef, alt as u64, depth as u64, self.ln_p[n], self.ln_q[n]);
        }
        log_sum_exp(buf)
    }
}

/// Everything needed to score sites for one design and hyperparameter set.
#[derive(Debug, Clone)]
pub(crate) struct LocalFdrModel {
    hyper: Hyperparameters,
    kernel: AltKernel,
    ln_null_p: f64,
    ln_null_q: f64,
}

impl LocalFdrModel {
    pub(crate) fn new(design: &PoolDesign, hyper: &Hyperparameters) -> Result<Self> {
        let q = design.null_alt_prob();
        Ok(Self {
            hyper: *hyper,
            kernel: AltKernel::new(design, hyper.a)?,
            ln_null_p: q.ln(),
            ln_null_q: (-q).ln_1p(),
        })
    }

    /// `(ln f0, ln f1)` for one pool. Depth zero contributes nothing to
    /// either branch.
    fn pair_log_likelihoods(&self, depth: u32, alt: u32) -> (f64, f64) {
        if depth == 0 {
            return (0.0, 0.0);
        }
        let ln_coef = ln_choose(depth as u64, alt as u64);
        let f0 = ln_binom_pmf_parts(ln_coef, alt as u64, depth as u64, self.ln_null_p, self.ln_null_q);
        let f1 = self.kernel.log_likelihood(depth, alt, ln_coef);
        (f0, f1)
    }

    fn site_fdr(&self, obs: SiteObservation<'_>) -> f64 {
        let (l0, l1) = obs.depths.iter().zip(obs.alt_counts).fold((0.0, 0.0), |(l0, l1), (&k, &x)| {
            let (f0, f1) = self.pair_log_likelihoods(k, x);
            (l0 + f0, l1 + f1)
        });
        self.posterior_null(l0, l1)
    }

    /// `π0 e^{l0} / (π0 e^{l0} + π1 e^{l1})` evaluated as a logistic of the
    /// log-mass difference.
    fn posterior_null(&self, l0: f64, l1: f64) -> f64 {
        let null_mass = self.hyper.pi0.ln() + l0;
        let alt_mass = self.hyper.pi1.ln() + l1;
        if null_mass == f64::NEG_INFINITY && alt_mass == f64::NEG_INFINITY {
            // Data impossible under both weighted branches; fall back to the prior.
            return self.hyper.pi0;
        }
        let d = alt_mass - null_mass;
        if d > 0.0 {
            let e = (-d).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + d.exp())
        }
    }
}

/// Largest depth whose `(K, X)` pairs are tabulated densely.
const DENSE_DEPTH_LIMIT: u32 = 512;

/// Dense triangular table over `0 ≤ X ≤ K ≤ K_max` of a pure per-pair
/// function; deeper pairs are computed on demand.
pub(crate) struct PairTable<T> {
    max_depth: u32,
    values: Vec<T>,
}

impl<T: Copy + Send + Sync> PairTable<T> {
    pub(crate) fn build<F>(max_observed_depth: u32, f: F) -> Self
    where
        F: Fn(u32, u32) -> T + Sync,
    {
        let max_depth = max_observed_depth.min(DENSE_DEPTH_LIMIT);
        let values = (0..=max_depth)
            .into_par_iter()
            .flat_map_iter(|k| (0..=k).map(move |x| (k, x)))
            .map(|(k, x)| f(k, x))
            .collect();
        Self { max_depth, values }
    }

    #[inline]
    pub(crate) fn get<F: Fn(u32, u32) -> T>(&self, depth: u32, alt: u32, f: F) -> T {
        if depth <= self.max_depth {
            let k = depth as usize;
            self.values[k * (k + 1) / 2 + alt as usize]
        } else {
            f(depth, alt)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design(m: usize, n: u32, eps: f64) -> PoolDesign {
        PoolDesign::new(m, n, eps).unwrap()
    }

    #[test]
    fn null_likelihood_examples() {
        let d0 = design(1, 20, 0.0);
        assert_eq!(null_log_likelihood(30, 0, &d0).unwrap(), 0.0);
        let d = design(1, 20, 0.01);
        let p = null_log_likelihood(30, 0, &d).unwrap().exp();
        assert!((p - 0.904_686_288_457_137_9).abs() < 1e-14);
        let p = null_log_likelihood(10, 10, &d).unwrap().exp();
        assert!(((p - 1.693_508_780_843_028_7e-25) / p).abs() < 1e-12);
    }

    #[test]
    fn invalid_counts_rejected() {
        let d = design(1, 20, 0.01);
        assert!(matches!(null_log_likelihood(3, 4, &d), Err(Error::Domain(_))));
        assert!(matches!(alt_marginal_log_likelihood(3, 4, &d, 0.02), Err(Error::Domain(_))));
        assert!(alt_marginal_log_likelihood(3, 1, &d, 0.0).is_err());
        assert!(alt_marginal_log_likelihood(3, 1, &d, 1.5).is_err());
    }

    #[test]
    fn single_haploid_full_prior_averages_components() {
        let d = design(1, 1, 0.01);
        for &(k, x) in &[(30u32, 0u32), (30, 15), (12, 12), (7, 2)] {
            let got = alt_marginal_log_likelihood(k, x, &d, 1.0).unwrap();
            let lo = crate::special::ln_binom_pmf(k as u64, x as u64, 0.01 / 3.0).exp();
            let hi = crate::special::ln_binom_pmf(k as u64, x as u64, 0.99).exp();
            let want = (0.5 * (lo + hi)).ln();
            assert!((got - want).abs() < 1e-12, "{k} {x}: {got} vs {want}");
        }
    }

    #[test]
    fn all_reference_site_favours_null() {
        let d = design(1, 20, 0.01);
        let alt = alt_marginal_log_likelihood(30, 0, &d, 0.02).unwrap();
        let null = null_log_likelihood(30, 0, &d).unwrap();
        assert!(alt < null);
    }

    #[test]
    fn kernel_weights_sum_to_one() {
        for &(n, a) in &[(1u32, 0.3), (20, 0.02), (30, 1.0), (7, 0.5)] {
            let k = AltKernel::new(&design(1, n, 0.01), a).unwrap();
            let total: f64 = k.ln_weights.iter().map(|w| w.exp()).sum();
            assert!((total - 1.0).abs() < 1e-12, "N={n} a={a}: {total}");
        }
    }

    #[test]
    fn degenerate_priors() {
        let d = design(3, 20, 0.01);
        let depths = [30, 12, 0];
        let alts = [4, 0, 0];
        let obs = SiteObservation::new(&depths, &alts);
        let all_null = Hyperparameters::new(0.0, 0.02).unwrap();
        assert_eq!(site_local_fdr(obs, &d, &all_null).unwrap(), 1.0);
        let all_alt = Hyperparameters::new(1.0, 0.02).unwrap();
        assert_eq!(site_local_fdr(obs, &d, &all_alt).unwrap(), 0.0);
    }

    #[test]
    fn zero_depth_is_uninformative() {
        let d = design(2, 20, 0.01);
        let h = Hyperparameters::new(0.01, 0.02).unwrap();
        let one = design(1, 20, 0.01);
        let with_empty = site_local_fdr(SiteObservation::new(&[30, 0], &[2, 0]), &d, &h).unwrap();
        let alone = site_local_fdr(SiteObservation::new(&[30], &[2]), &one, &h).unwrap();
        assert!((with_empty - alone).abs() < 1e-15);
    }

    #[test]
    fn impossible_under_both_branches_uses_prior() {
        // ε = 0 and π1 = 0: any alt read is impossible under the only branch
        // that carries mass.
        let d = design(1, 20, 0.0);
        let h = Hyperparameters::new(0.0, 0.02).unwrap();
        let v = site_local_fdr(SiteObservation::new(&[10], &[3]), &d, &h).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn hyperparameter_validation() {
        assert!(Hyperparameters::from_parts(0.5, 0.6, 0.1).is_err());
        assert!(Hyperparameters::new(0.01, 0.0).is_err());
        assert!(Hyperparameters::new(-0.1, 0.2).is_err());
        assert!(Hyperparameters::from_parts(0.99, 0.01 + 1e-13, 0.1).is_ok());
    }

    #[test]
    fn design_validation() {
        assert!(PoolDesign::new(0, 20, 0.01).is_err());
        assert!(PoolDesign::new(5, 0, 0.01).is_err());
        assert!(PoolDesign::new(5, 20, 0.5).is_err());
        assert!(PoolDesign::new(5, 20, -0.1).is_err());
    }

    #[test]
    fn matrix_validation() {
        assert!(SiteCountMatrix::new(2, vec![], vec![], None).is_err());
        assert!(SiteCountMatrix::new(2, vec![1, 2, 3], vec![0, 0, 0], None).is_err());
        let err = SiteCountMatrix::new(2, vec![5, 5], vec![1, 6], Some(vec!["chr1:100".into()])).unwrap_err();
        assert!(err.to_string().contains("chr1:100"));
    }

    #[test]
    fn batch_pool_mismatch_names_site() {
        let data = SiteCountMatrix::new(2, vec![5, 5], vec![1, 0], None).unwrap();
        let h = Hyperparameters::new(0.01, 0.02).unwrap();
        let err = batch_local_fdr(&data, &design(3, 20, 0.01), &h).unwrap_err();
        assert!(matches!(err, Error::InvalidSite { ref site_id, .. } if site_id == "site1"));
    }

    #[test]
    fn deep_pairs_bypass_table() {
        let d = design(2, 20, 0.01);
        let h = Hyperparameters::new(0.05, 0.03).unwrap();
        let data = SiteCountMatrix::new(2, vec![40, 100_000, 600, 7], vec![3, 400, 2, 7], None).unwrap();
        let batch = batch_local_fdr(&data, &d, &h).unwrap();
        for i in 0..2 {
            let single = site_local_fdr(data.site(i), &d, &h).unwrap();
            assert_eq!(batch.scores()[i].to_bits(), single.to_bits());
        }
    }
}
