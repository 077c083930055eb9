//! Independent numerical oracles shared by the integration tests.
//!
//! Nothing here calls into the library's likelihood or special-function
//! code: binomial masses are built from sums of logarithms and the
//! θ-integral is done by Gauss–Legendre quadrature.

#![allow(dead_code)]

pub mod props;

/// Log binomial coefficient by direct summation of logs.
pub fn ln_choose_sum(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

pub fn ln_binom_pmf(k: u64, x: u64, p: f64) -> f64 {
    let mut out = ln_choose_sum(k, x);
    if x > 0 {
        out += x as f64 * p.ln();
    }
    if k > x {
        out += (k - x) as f64 * (1.0 - p).ln();
    }
    out
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1],
/// found by Newton iteration on the Legendre polynomial.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// log of (1/a)∫₀ᵃ Σₙ Binom(x; k, pₙ)·Binom(n; N, θ) dθ by 64-node quadrature.
pub fn alt_log_likelihood_quadrature(k: u64, x: u64, n_haploids: u64, eps: f64, a: f64) -> f64 {
    let (nodes, weights) = gauss_legendre(64);
    let nf = n_haploids as f64;
    let read_terms: Vec<f64> = (0..=n_haploids)
        .map(|n| {
            let p = n as f64 / nf * (1.0 - eps) + (nf - n as f64) / nf * eps / 3.0;
            ln_binom_pmf(k, x, p)
        })
        .collect();
    let mut at_nodes = Vec::with_capacity(64);
    for (z, w) in nodes.iter().zip(&weights) {
        let theta = 0.5 * a * (z + 1.0);
        let terms: Vec<f64> = (0..=n_haploids)
            .map(|n| read_terms[n as usize] + ln_binom_pmf(n_haploids, n, theta))
            .collect();
        // (1/a) · (a/2) · Σ w f(θ)
        at_nodes.push((0.5 * w).ln() + log_sum_exp(&terms));
    }
    log_sum_exp(&at_nodes)
}

pub fn null_log_likelihood_direct(k: u64, x: u64, eps: f64) -> f64 {
    ln_binom_pmf(k, x, eps / 3.0)
}

/// Local fdr built from the two quadrature/direct oracles.
pub fn local_fdr_oracle(
    obs: &[(u64, u64)],
    n_haploids: u64,
    eps: f64,
    pi1: f64,
    a: f64,
) -> f64 {
    let l0: f64 = (1.0 - pi1).ln()
        + obs
            .iter()
            .map(|&(k, x)| null_log_likelihood_direct(k, x, eps))
            .sum::<f64>();
    let l1: f64 = pi1.ln()
        + obs
            .iter()
            .map(|&(k, x)| alt_log_likelihood_quadrature(k, x, n_haploids, eps, a))
            .sum::<f64>();
    1.0 / (1.0 + (l1 - l0).exp())
}

/// Theorem-style expectations of the two moment statistics.
pub fn expected_moments(pi1: f64, a: f64, n_haploids: f64, eps: f64) -> (f64, f64) {
    let c = 1.0 - 4.0 * eps / 3.0;
    let m1 = c * pi1 * a / 2.0;
    let m2 = (n_haploids - 1.0) / n_haploids * pi1 * a * a / 3.0 + pi1 * a / (2.0 * n_haploids);
    (m1, m2)
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}
