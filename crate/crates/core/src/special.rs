//! Log-space special functions: binomial coefficients, log-sum-exp, the
//! regularized incomplete beta function and the tail probabilities built
//! on it.

use statrs::function::gamma::ln_gamma;

/// Maximum continued-fraction iterations before switching to quadrature.
const CF_MAX_ITER: usize = 200;
const CF_TOL: f64 = 1e-14;
const CF_TINY: f64 = 1e-300;

/// `ln C(n, k)`; `-inf` when `k > n`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Log binomial mass from precomputed pieces. Handles `p = 0` and `p = 1`
/// without producing `0 · -inf`.
#[inline]
pub fn ln_binom_pmf_parts(ln_coef: f64, x: u64, k: u64, ln_p: f64, ln_q: f64) -> f64 {
    let mut out = ln_coef;
    if x > 0 {
        out += x as f64 * ln_p;
    }
    if k > x {
        out += (k - x) as f64 * ln_q;
    }
    out
}

pub fn ln_binom_pmf(k: u64, x: u64, p: f64) -> f64 {
    ln_binom_pmf_parts(ln_choose(k, x), x, k, p.ln(), (-p).ln_1p())
}

/// `ln(e^a + e^b)`.
#[inline]
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `ln(1 - e^x)` for `x ≤ 0`.
fn ln_1m_exp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// Logarithm of the regularized incomplete beta function `I_x(a, b)`.
///
/// Uses the Lentz continued fraction on whichever tail converges fastest and
/// falls back to adaptive quadrature if the fraction has not converged after
/// 200 iterations.
pub fn ln_beta_reg(a: f64, b: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0, "ln_beta_reg requires a, b > 0");
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if x >= 1.0 {
        return 0.0;
    }
    if x > (a + 1.0) / (a + b + 2.0) {
        ln_1m_exp(ln_beta_reg_lower(b, a, 1.0 - x))
    } else {
        ln_beta_reg_lower(a, b, x)
    }
}

/// `I_x(a, b)` on the linear scale.
pub fn beta_reg(a: f64, b: f64, x: f64) -> f64 {
    ln_beta_reg(a, b, x).exp()
}

fn ln_beta_reg_lower(a: f64, b: f64, x: f64) -> f64 {
    match ln_beta_cf(a, b, x) {
        Some(v) => v,
        None => ln_beta_reg_quadrature(a, b, x),
    }
}

fn ln_beta_cf(a: f64, b: f64, x: f64) -> Option<f64> {
    let ln_prefix = a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b) - a.ln();

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let clamp = |v: f64| if v.abs() < CF_TINY { CF_TINY } else { v };

    let mut c = 1.0;
    let mut d = 1.0 / clamp(1.0 - qab * x / qap);
    let mut f = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        let even = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / clamp(1.0 + even * d);
        c = clamp(1.0 + even / c);
        f *= d * c;

        let odd = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / clamp(1.0 + odd * d);
        c = clamp(1.0 + odd / c);
        let delta = d * c;
        f *= delta;

        if (delta - 1.0).abs() < CF_TOL {
            return Some(ln_prefix + f.ln());
        }
    }
    None
}

/// `ln I_x(a, b)` by adaptive Simpson integration, for `x` at or below the
/// mode region (the caller's tail switch guarantees this).
///
/// For `a ≥ 1` the integrand `t^{a-1}(1-t)^{b-1}` is scaled by its value at
/// `t = x`, where it peaks. For `a < 1` the substitution `t = x s^{1/a}`
/// removes the singularity at zero:
/// `∫₀ˣ t^{a-1}(1-t)^{b-1} dt = (x^a/a) ∫₀¹ (1 - x s^{1/a})^{b-1} ds`.
pub(crate) fn ln_beta_reg_quadrature(a: f64, b: f64, x: f64) -> f64 {
    let ln_x = x.ln();
    let ln_1mx = (-x).ln_1p();
    if a >= 1.0 {
        // Integrate over the distance u = x - t from the peak.
        let integrand = |u: f64| -> f64 {
            if u >= x {
                return if a == 1.0 { ((b - 1.0) * (-ln_1mx)).exp() } else { 0.0 };
            }
            ((a - 1.0) * (-u / x).ln_1p() + (b - 1.0) * (u / (1.0 - x)).ln_1p()).exp()
        };
        let integral = adaptive_simpson(&integrand, 0.0, x, 1e-14, 50);
        return (a - 1.0) * ln_x + (b - 1.0) * ln_1mx + integral.ln() - ln_beta(a, b);
    }
    let inv_a = 1.0 / a;
    let integrand = |s: f64| -> f64 {
        if s <= 0.0 {
            return 1.0;
        }
        let t = x * (s.ln() * inv_a).exp();
        ((b - 1.0) * (-t).ln_1p()).exp()
    };
    let integral = adaptive_simpson(&integrand, 0.0, 1.0, 1e-14, 50);
    a * ln_x - a.ln() - ln_beta(a, b) + integral.ln()
}

/// Adaptive Simpson with an absolute tolerance of `rel_tol` times the
/// largest initial sample times the interval length; the tolerance is split
/// between halves so deep recursion stays confined to the peak.
fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, rel_tol: f64, depth: u32) -> f64 {
    let mid = 0.5 * (lo + hi);
    let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
    let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    let tol = rel_tol * flo.abs().max(fmid.abs()).max(fhi.abs()) * (hi - lo);
    simpson_step(f, lo, hi, flo, fmid, fhi, whole, tol.max(f64::MIN_POSITIVE), depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    flo: f64,
    fmid: f64,
    fhi: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let mid = 0.5 * (lo + hi);
    let lmid = 0.5 * (lo + mid);
    let rmid = 0.5 * (mid + hi);
    let (fl, fr) = (f(lmid), f(rmid));
    let left = (mid - lo) / 6.0 * (flo + 4.0 * fl + fmid);
    let right = (hi - mid) / 6.0 * (fmid + 4.0 * fr + fhi);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    simpson_step(f, lo, mid, flo, fl, fmid, left, 0.5 * tol, depth - 1)
        + simpson_step(f, mid, hi, fmid, fr, fhi, right, 0.5 * tol, depth - 1)
}

/// Upper tail `P(Binom(k, q) ≥ x)`.
pub fn binomial_upper_tail(k: u64, x: u64, q: f64) -> f64 {
    if x == 0 {
        return 1.0;
    }
    if x > k || q <= 0.0 {
        return 0.0;
    }
    if q >= 1.0 {
        return 1.0;
    }
    beta_reg(x as f64, (k - x) as f64 + 1.0, q)
}

/// Survival function of a chi-squared variable with `2m` degrees of freedom:
/// `e^{-s/2} Σ_{j<m} (s/2)^j / j!`.
pub fn chi_squared_sf_even(stat: f64, m: usize) -> f64 {
    if stat <= 0.0 {
        return 1.0;
    }
    let half = 0.5 * stat;
    let ln_half = half.ln();
    let terms: Vec<f64> = (0..m)
        .map(|j| j as f64 * ln_half - ln_gamma(j as f64 + 1.0) - half)
        .collect();
    log_sum_exp(&terms).exp().min(1.0)
}
