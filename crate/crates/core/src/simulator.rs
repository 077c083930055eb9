//! Synthetic pooled-sequencing data with known variant status.
//!
//! Each site owns a ChaCha8 stream selected by its index, so a dataset is a
//! pure function of `(seed, replication)` regardless of how many threads
//! generate it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Gamma};
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::model::{Hyperparameters, PoolDesign, SiteCountMatrix};

pub const DEFAULT_COVERAGE_MEAN: f64 = 30.0;
pub const DEFAULT_COVERAGE_SHAPE: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationSpec {
    pub p: usize,
    pub design: PoolDesign,
    pub pi1: f64,
    pub a: f64,
    pub coverage_mean: f64,
    pub coverage_shape: f64,
    pub seed: u64,
    pub replications: usize,
}

impl SimulationSpec {
    /// Defaults: gamma coverage with mean 30 and shape 3, one replication.
    pub fn new(p: usize, design: PoolDesign, pi1: f64, a: f64, seed: u64) -> Self {
        Self {
            p,
            design,
            pi1,
            a,
            coverage_mean: DEFAULT_COVERAGE_MEAN,
            coverage_shape: DEFAULT_COVERAGE_SHAPE,
            seed,
            replications: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(domain("simulation needs at least one site"));
        }
        if !(0.0..1.0).contains(&self.pi1) {
            return Err(domain(format!("pi1 = {} outside [0, 1)", self.pi1)));
        }
        if !(self.a > 0.0 && self.a <= 1.0) {
            return Err(domain(format!("a = {} outside (0, 1]", self.a)));
        }
        if !(self.coverage_mean > 0.0 && self.coverage_shape > 0.0) {
            return Err(domain("coverage mean and shape must be positive"));
        }
        if self.replications == 0 {
            return Err(domain("replications must be at least 1"));
        }
        Ok(())
    }

    /// The generating hyperparameters, for oracle-mode calls.
    pub fn hyperparameters(&self) -> Result<Hyperparameters> {
        Hyperparameters::new(self.pi1, self.a)
    }
}

/// Latent state behind a simulated dataset; `theta` and `n_alt` are
/// site-major `p × M`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentTruth {
    pub pools: usize,
    pub mu: Vec<bool>,
    pub theta: Vec<f64>,
    pub n_alt: Vec<u32>,
}

impl LatentTruth {
    pub fn num_variants(&self) -> usize {
        self.mu.iter().filter(|&&m| m).count()
    }
}

/// SplitMix64 finalizer, used to derive independent seeds.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// First replication of `spec`.
pub fn simulate(spec: &SimulationSpec) -> Result<(SiteCountMatrix, LatentTruth)> {
    simulate_replication(spec, 0)
}

pub fn simulate_replication(
    spec: &SimulationSpec,
    replication: usize,
) -> Result<(SiteCountMatrix, LatentTruth)> {
    spec.validate()?;
    let m = spec.design.pools();
    let big_n = spec.design.haploids() as u64;
    let coverage = Gamma::new(spec.coverage_shape, spec.coverage_mean / spec.coverage_shape)
        .map_err(|e| domain(format!("coverage distribution: {e}")))?;
    let key = ChaCha8Rng::seed_from_u64(mix_seed(spec.seed, replication as u64)).get_seed();
    let read_p: Vec<f64> = (0..=spec.design.haploids()).map(|n| spec.design.read_alt_prob(n)).collect();

    let mut mu = vec![false; spec.p];
    let mut theta = vec![0.0; spec.p * m];
    let mut n_alt = vec![0u32; spec.p * m];
    let mut depths = vec![0u32; spec.p * m];
    let mut alts = vec![0u32; spec.p * m];

    mu.par_iter_mut()
        .zip(theta.par_chunks_mut(m))
        .zip(n_alt.par_chunks_mut(m))
        .zip(depths.par_chunks_mut(m))
        .zip(alts.par_chunks_mut(m))
        .enumerate()
        .for_each(|(i, ((((mu, theta), n_alt), depths), alts))| {
            let mut rng = ChaCha8Rng::from_seed(key);
            rng.set_stream(i as u64);
            *mu = rng.random::<f64>() < spec.pi1;
            for j in 0..m {
                if *mu {
                    // θ ~ U(0, a), excluding 0 so that variant pools are never
                    // exactly monomorphic in frequency.
                    let mut t = rng.random::<f64>() * spec.a;
                    while t <= 0.0 {
                        t = rng.random::<f64>() * spec.a;
                    }
                    theta[j] = t;
                    n_alt[j] = sample_binomial(&mut rng, big_n, t);
                }
                let k = coverage.sample(&mut rng).round().max(1.0);
                depths[j] = k.min(u32::MAX as f64) as u32;
                alts[j] = sample_binomial(&mut rng, depths[j] as u64, read_p[n_alt[j] as usize]);
            }
        });

    let data = SiteCountMatrix::new(m, depths, alts, None)?;
    Ok((data, LatentTruth { pools: m, mu, theta, n_alt }))
}

fn sample_binomial<R: Rng>(rng: &mut R, n: u64, p: f64) -> u32 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n as u32;
    }
    Binomial::new(n, p).expect("valid binomial").sample(rng) as u32
}
