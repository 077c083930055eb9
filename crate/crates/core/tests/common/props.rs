//! Property and distribution checks shared by the standalone suites and the
//! acceptance target. Each check returns `Err` with a description on failure.

use std::collections::HashMap;

use ebvariant::io::{read_calls, read_counts, write_calls, write_counts};
use ebvariant::{
    batch_local_fdr, bh_procedure, call_pipeline, compute_moments, fisher_meta, simes_partial_conjunction,
    simulate_replication, site_local_fdr, site_pvalues, step_up_call, threshold_call, Combiner, Hyperparameters,
    LocalFdrVector, Mode, PValueVector, PoolDesign, SimulationSpec, SiteCountMatrix, SiteObservation,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use statrs::distribution::{ChiSquared, ContinuousCDF, Gamma};

use super::gauss_legendre;

pub type Check = Result<(), String>;

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

/// Scores in [0, 1], sometimes drawn from a small set to force ties.
fn scores(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop_oneof![
        prop::collection::vec(0.0..=1.0f64, 1..max_len),
        prop::collection::vec(prop::sample::select(vec![0.0, 0.01, 0.05, 0.2, 1.0]), 1..max_len),
    ]
}

fn alpha_pair() -> impl Strategy<Value = (f64, f64)> {
    (0.001..0.999f64, 0.001..0.999f64).prop_map(|(x, y)| if x <= y { (x, y) } else { (y, x) })
}

pub fn step_up_nesting(cases: u32) -> Check {
    runner(cases)
        .run(&(scores(200), alpha_pair()), |(s, (a1, a2))| {
            let v = LocalFdrVector::new(s.clone()).unwrap();
            let lo = step_up_call(&v, a1).unwrap();
            let hi = step_up_call(&v, a2).unwrap();
            ensure(lo.num_rejected <= hi.num_rejected, || "J not monotone in alpha".into())?;
            for i in 0..s.len() {
                ensure(!lo.decisions[i] || hi.decisions[i], || format!("site {i} not nested"))?;
            }
            for (calls, alpha) in [(&lo, a1), (&hi, a2)] {
                let bfdr = calls.attained_bfdr.unwrap();
                ensure(bfdr <= alpha, || format!("attained {bfdr} > alpha {alpha}"))?;
                let worst_in = calls.rejected().map(|i| s[i]).fold(f64::NEG_INFINITY, f64::max);
                let best_out = (0..s.len()).filter(|&i| !calls.decisions[i]).map(|i| s[i]).fold(f64::INFINITY, f64::min);
                ensure(worst_in <= best_out, || "rejected set is not a prefix of the ranking".into())?;
                for i in 0..s.len() {
                    ensure(calls.decisions[i] == (calls.ranks[i] <= calls.num_rejected), || "ranks disagree".into())?;
                }
                let mut sorted = s.clone();
                sorted.sort_by(f64::total_cmp);
                let mut cum = 0.0;
                for (j, x) in sorted.iter().enumerate() {
                    cum += x;
                    if j + 1 > calls.num_rejected {
                        ensure(cum / (j + 1) as f64 > alpha, || format!("prefix {} also qualifies", j + 1))?;
                    }
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

pub fn threshold_rule(cases: u32) -> Check {
    runner(cases)
        .run(&(scores(100), 0.0..=1.0f64), |(s, t)| {
            let calls = threshold_call(&LocalFdrVector::new(s.clone()).unwrap(), t).unwrap();
            for (i, &x) in s.iter().enumerate() {
                ensure(calls.decisions[i] == (x < t), || format!("score {x} vs t {t}"))?;
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Raising one pool p-value never lowers the combined p-value.
pub fn combiners_monotone(cases: u32) -> Check {
    let strategy = (prop::collection::vec(0.0..=1.0f64, 1..8), any::<prop::sample::Index>(), 0.0..1.0f64);
    runner(cases)
        .run(&strategy, |(ps, idx, frac)| {
            let j = idx.index(ps.len());
            let mut raised = ps.clone();
            raised[j] = ps[j] + frac * (1.0 - ps[j]);
            for (name, f) in [("simes", simes_partial_conjunction as fn(&[f64]) -> _), ("fisher", fisher_meta)] {
                let before = f(&ps).unwrap();
                let after = f(&raised).unwrap();
                ensure((0.0..=1.0).contains(&before), || format!("{name} out of range: {before}"))?;
                ensure(after >= before, || format!("{name}: {before} -> {after} for {ps:?} -> {raised:?}"))?;
            }
            let min = ps.iter().copied().fold(1.0, f64::min);
            let simes = simes_partial_conjunction(&ps).unwrap();
            ensure(simes >= min && simes <= (ps.len() as f64 * min).min(1.0), || "Simes outside [min p, M min p]".into())
        })
        .map_err(|e| e.to_string())
}

pub fn bh_nesting(cases: u32) -> Check {
    runner(cases)
        .run(&(scores(200), alpha_pair()), |(ps, (a1, a2))| {
            let v = PValueVector::new(ps.clone()).unwrap();
            let lo = bh_procedure(&v, a1).unwrap();
            let hi = bh_procedure(&v, a2).unwrap();
            for i in 0..ps.len() {
                ensure(!lo.decisions[i] || hi.decisions[i], || format!("site {i} not nested"))?;
            }
            let n = ps.len() as f64;
            let k = lo.num_rejected;
            if k > 0 {
                let worst = lo.rejected().map(|i| ps[i]).fold(0.0, f64::max);
                ensure(worst <= k as f64 * a1 / n, || "k-th p-value above its BH line".into())?;
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn site_strategy(pools: usize) -> impl Strategy<Value = (Vec<u32>, Vec<u32>)> {
    prop::collection::vec((0u32..100).prop_flat_map(|k| (Just(k), 0..=k.min(12))), pools)
        .prop_map(|pairs| pairs.into_iter().unzip())
}

/// The local fdr of fixed data falls as the prior variant proportion rises.
pub fn fdr_monotone_in_pi1(cases: u32) -> Check {
    let d = PoolDesign::new(3, 20, 0.01).unwrap();
    runner(cases)
        .run(&(site_strategy(3), 0.0001..0.5f64, 0.0001..0.5f64, 0.005..0.5f64), |((k, x), p, q, a)| {
            let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
            let obs = SiteObservation::new(&k, &x);
            let f_lo = site_local_fdr(obs, &d, &Hyperparameters::new(lo, a).unwrap()).unwrap();
            let f_hi = site_local_fdr(obs, &d, &Hyperparameters::new(hi, a).unwrap()).unwrap();
            ensure(f_hi <= f_lo, || format!("fdr rose from {f_lo} to {f_hi} as pi1 went {lo} -> {hi}"))
        })
        .map_err(|e| e.to_string())
}

/// Permuting sites permutes the scores and nothing else, bit for bit.
pub fn batch_permutation_invariance(cases: u32) -> Check {
    let d = PoolDesign::new(3, 20, 0.01).unwrap();
    let h = Hyperparameters::new(0.02, 0.05).unwrap();
    let strategy = prop::collection::vec(site_strategy(3), 1..40).prop_flat_map(|sites| {
        let n = sites.len();
        (Just(sites), Just((0..n).collect::<Vec<usize>>()).prop_shuffle())
    });
    runner(cases)
        .run(&strategy, |(sites, order)| {
            let depths = sites.iter().flat_map(|s| s.0.clone()).collect();
            let alts = sites.iter().flat_map(|s| s.1.clone()).collect();
            let data = SiteCountMatrix::new(3, depths, alts, None).unwrap();
            let base = batch_local_fdr(&data, &d, &h).unwrap();
            let moved = batch_local_fdr(&data.reordered(&order).unwrap(), &d, &h).unwrap();
            for (r, &i) in order.iter().enumerate() {
                ensure(moved.scores()[r].to_bits() == base.scores()[i].to_bits(), || format!("row {r}"))?;
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Chi-squared statistic and its upper-tail probability after merging
/// adjacent bins until each expects at least 5 counts.
fn chi_squared_gof(observed: &[f64], expected: &[f64]) -> (f64, f64) {
    let (mut obs, mut exp) = (Vec::new(), Vec::new());
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for (o, e) in observed.iter().zip(expected) {
        o_acc += o;
        e_acc += e;
        if e_acc >= 5.0 {
            obs.push(o_acc);
            exp.push(e_acc);
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    if let (Some(lo), Some(le)) = (obs.last_mut(), exp.last_mut()) {
        *lo += o_acc;
        *le += e_acc;
    }
    let stat: f64 = obs.iter().zip(&exp).map(|(o, e)| (o - e) * (o - e) / e).sum();
    let df = (obs.len() - 1).max(1) as f64;
    (stat, 1.0 - ChiSquared::new(df).unwrap().cdf(stat))
}

fn gof(name: &str, observed: &[f64], expected: &[f64], min_p: f64) -> Check {
    let (stat, p) = chi_squared_gof(observed, expected);
    if p >= min_p {
        Ok(())
    } else {
        Err(format!("{name}: chi2 = {stat:.2}, p = {p:.2e}"))
    }
}

fn binom_pmf(k: u64, x: u64, p: f64) -> f64 {
    super::ln_binom_pmf(k, x, p).exp()
}

/// Goodness of fit of every simulated layer against its generating law.
pub fn simulator_chi_squared() -> Check {
    let eps = 0.01;
    let (m, n, pi1, a) = (5usize, 20u32, 0.05, 0.1);
    let d = PoolDesign::new(m, n, eps).unwrap();
    let spec = SimulationSpec::new(200_000, d, pi1, a, 31337);
    let (data, truth) = simulate_replication(&spec, 0).unwrap();
    let min_p = 1e-4;

    // Variant indicators.
    let variants = truth.num_variants() as f64;
    let p = data.num_sites() as f64;
    gof("variant count", &[variants, p - variants], &[p * pi1, p * (1.0 - pi1)], min_p)?;

    // Coverage: rounded gamma with a floor of 1.
    let gamma = Gamma::new(spec.coverage_shape, spec.coverage_shape / spec.coverage_mean).unwrap();
    let max_k = 400usize;
    let mut observed = vec![0.0; max_k + 1];
    for &k in data.depths() {
        observed[(k as usize).min(max_k)] += 1.0;
    }
    let total = data.depths().len() as f64;
    let mut expected = vec![0.0; max_k + 1];
    for (k, e) in expected.iter_mut().enumerate().skip(1) {
        let hi = if k == max_k { 1.0 } else { gamma.cdf(k as f64 + 0.5) };
        let lo = if k == 1 { 0.0 } else { gamma.cdf(k as f64 - 0.5) };
        *e = total * (hi - lo);
    }
    gof("coverage", &observed[1..], &expected[1..], min_p)?;
    let mean_k = data.depths().iter().map(|&k| k as f64).sum::<f64>() / total;
    if ((mean_k - spec.coverage_mean) / spec.coverage_mean).abs() > 0.005 {
        return Err(format!("mean coverage {mean_k}"));
    }

    // Carrier counts of variant pools: ∫ Binom(n; N, θ) dθ / a by quadrature.
    let (nodes, weights) = gauss_legendre(64);
    let marginal: Vec<f64> = (0..=n as u64)
        .map(|c| {
            nodes
                .iter()
                .zip(&weights)
                .map(|(z, w)| 0.5 * w * binom_pmf(n as u64, c, 0.5 * a * (z + 1.0)))
                .sum()
        })
        .collect();
    let mut observed = vec![0.0; n as usize + 1];
    let mut variant_pools = 0.0;
    for i in (0..truth.mu.len()).filter(|&i| truth.mu[i]) {
        for j in 0..m {
            observed[truth.n_alt[i * m + j] as usize] += 1.0;
            variant_pools += 1.0;
        }
    }
    let expected: Vec<f64> = marginal.iter().map(|q| q * variant_pools).collect();
    gof("carrier counts", &observed, &expected, min_p)?;

    // Allele frequencies of variant pools are U(0, a): ten equal bins.
    let mut observed = vec![0.0; 10];
    for i in (0..truth.mu.len()).filter(|&i| truth.mu[i]) {
        for j in 0..m {
            observed[((truth.theta[i * m + j] / a * 10.0) as usize).min(9)] += 1.0;
        }
    }
    gof("allele frequency", &observed, &[variant_pools / 10.0; 10], min_p)?;

    // Alt reads given depth 30 and carrier count: null pools and single-carrier pools.
    for carriers in [0u32, 1] {
        let prob = d.read_alt_prob(carriers);
        let mut observed = vec![0.0; 31];
        let mut count = 0.0;
        for idx in 0..data.depths().len() {
            if data.depths()[idx] == 30 && truth.n_alt[idx] == carriers {
                observed[data.alt_counts()[idx] as usize] += 1.0;
                count += 1.0;
            }
        }
        let expected: Vec<f64> = (0..=30).map(|x| count * binom_pmf(30, x, prob)).collect();
        gof(&format!("alt reads (n = {carriers})"), &observed, &expected, min_p)?;
    }
    Ok(())
}

/// Counts and calls survive a write/read cycle; output bytes are stable.
pub fn serialization_round_trip() -> Check {
    let d = PoolDesign::new(4, 10, 0.01).unwrap();
    let (data, _) = simulate_replication(&SimulationSpec::new(3_000, d, 0.05, 0.1, 8), 0).unwrap();
    let mut buf = Vec::new();
    write_counts(&data, &mut buf).map_err(|e| e.to_string())?;
    let back = read_counts(buf.as_slice(), &d).map_err(|e| e.to_string())?;
    if back.depths() != data.depths() || back.alt_counts() != data.alt_counts() {
        return Err("count matrix changed in a round trip".into());
    }

    let result = call_pipeline(&data, &d, 0.05, Mode::Empirical).map_err(|e| e.to_string())?;
    let ids: Vec<String> = (0..data.num_sites()).map(|i| data.site_id(i).into_owned()).collect();
    let write = || {
        let mut out = Vec::new();
        write_calls(&result.calls, &result.scores, &ids, &mut out).map(|_| out)
    };
    let first = write().map_err(|e| e.to_string())?;
    if first != write().map_err(|e| e.to_string())? {
        return Err("calls output not byte-stable".into());
    }
    let parsed = read_calls(first.as_slice()).map_err(|e| e.to_string())?;
    if parsed.decisions != result.calls.decisions || parsed.ranks != result.calls.ranks || parsed.site_ids != ids {
        return Err("calls changed in a round trip".into());
    }
    for (got, want) in parsed.fdr.iter().zip(result.scores.scores()) {
        if (got - want).abs() > 5e-6 * want.abs().max(1e-300) {
            return Err(format!("fdr {want} printed as {got}"));
        }
    }
    Ok(())
}

/// Every parallel stage gives identical bits on 1, 2 and 4 threads.
pub fn thread_count_determinism() -> Check {
    let d = PoolDesign::new(5, 20, 0.01).unwrap();
    let spec = SimulationSpec::new(30_000, d, 0.01, 0.02, 77);
    let fingerprint = || -> Result<Vec<u64>, String> {
        let (data, truth) = simulate_replication(&spec, 3).map_err(|e| e.to_string())?;
        let mut bits: Vec<u64> = data.depths().iter().chain(data.alt_counts()).map(|&v| v as u64).collect();
        bits.extend(truth.theta.iter().map(|t| t.to_bits()));
        let m = compute_moments(&data, &d).map_err(|e| e.to_string())?;
        bits.extend([m.m1.to_bits(), m.m2.to_bits()]);
        let result = call_pipeline(&data, &d, 0.05, Mode::Empirical).map_err(|e| e.to_string())?;
        bits.extend(result.scores.scores().iter().map(|s| s.to_bits()));
        bits.push(result.calls.num_rejected as u64);
        for c in [Combiner::Simes, Combiner::Fisher] {
            let ps = site_pvalues(&data, &d, c).map_err(|e| e.to_string())?;
            bits.extend(ps.values().iter().map(|p| p.to_bits()));
        }
        Ok(bits)
    };
    let mut seen: HashMap<usize, Vec<u64>> = HashMap::new();
    for threads in [1, 2, 4] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
        seen.insert(threads, pool.install(fingerprint)?);
    }
    if seen[&1] != seen[&2] || seen[&1] != seen[&4] {
        return Err("outputs differ across thread counts".into());
    }
    Ok(())
}

/// All checks with their names.
pub fn all(cases: u32) -> Vec<(&'static str, Check)> {
    vec![
        ("step-up monotonicity, nesting and attained BFDR <= alpha", step_up_nesting(cases)),
        ("threshold rule", threshold_rule(cases)),
        ("Simes/Fisher monotonicity", combiners_monotone(cases)),
        ("BH nesting", bh_nesting(cases)),
        ("local fdr monotone in pi1", fdr_monotone_in_pi1(cases)),
        ("batch permutation invariance", batch_permutation_invariance(cases)),
        ("simulator chi-squared fit", simulator_chi_squared()),
        ("serialization round trip", serialization_round_trip()),
        ("bitwise determinism across thread counts", thread_count_determinism()),
    ]
}
