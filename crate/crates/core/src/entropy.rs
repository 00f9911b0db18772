//! Exact entropy of a quantized variable and its two analytic
//! approximations.
//!
//! The two outermost bins saturate, so their probabilities extend to
//! infinity while their widths stay finite. With `p_i` the clipped bin
//! probabilities, the identity
//! `H = h(X) - sum p_i log2|B_i| + D(f || g)` holds exactly, where `g` is the
//! bin-wise constant density `p_i / |B_i|` (outer bins extended).

use std::f64::consts::{E, LN_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{Distribution, Family, MultivariateGaussian};
use crate::error::{Error, Result};
use crate::format::{FpFormat, Quantizer};
use crate::special::{digamma_unchecked as psi, log_beta, log_gamma_unchecked, EULER_GAMMA};
use crate::sum::CompensatedSum;

/// Probabilities below this are dropped; their `-p log p` is far below
/// double precision relative to the total.
pub const MIN_PROBABILITY: f64 = 1e-300;

const CHUNK: u64 = 4096;

/// Edges of bin `i` with the outer bins extended to ±∞.
pub(crate) fn clipped_edges<Q: Quantizer + ?Sized>(q: &Q, i: u64) -> (f64, f64) {
    let b = q.bin(i);
    let k = q.bin_count();
    let lo = if i == 0 { f64::NEG_INFINITY } else { b.lower };
    let hi = if i + 1 == k { f64::INFINITY } else { b.upper };
    (lo, hi)
}

/// Probability of each bin, outer bins absorbing the tails.
pub fn bin_probabilities<Q: Quantizer + ?Sized>(dist: &Distribution, q: &Q) -> Vec<f64> {
    let k = q.bin_count();
    if k == 1 {
        return vec![1.0];
    }
    (0..k)
        .into_par_iter()
        .map(|i| {
            let (lo, hi) = clipped_edges(q, i);
            dist.interval_prob(lo, hi)
        })
        .collect()
}

fn plogp(p: f64) -> f64 {
    if p < MIN_PROBABILITY {
        0.0
    } else {
        -p * p.log2()
    }
}

/// `-sum p_i log2 p_i` over the bins of `q`.
///
/// Work is split into fixed chunks whose partial sums are merged in index
/// order, so the result does not depend on the thread count.
pub fn exact_entropy<Q: Quantizer + ?Sized>(dist: &Distribution, q: &Q) -> f64 {
    let k = q.bin_count();
    if k <= 1 {
        return 0.0;
    }
    let chunks = k.div_ceil(CHUNK);
    let partial: Vec<CompensatedSum> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut s = CompensatedSum::new();
            for i in c * CHUNK..((c + 1) * CHUNK).min(k) {
                let (lo, hi) = clipped_edges(q, i);
                s.add(plogp(dist.interval_prob(lo, hi)));
            }
            s
        })
        .collect();
    let mut total = CompensatedSum::new();
    for s in &partial {
        total.merge(s);
    }
    total.value().max(0.0)
}

/// `E[log2 Δ(X)] = sum p_i log2|B_i|` with clipped probabilities, evaluated
/// one run of equal-width bins at a time.
pub fn expected_log_bin_size<Q: Quantizer + ?Sized>(dist: &Distribution, q: &Q) -> f64 {
    let k = q.bin_count();
    let runs = q.width_runs();
    let terms: Vec<f64> = runs
        .par_iter()
        .map(|&(a, b)| {
            let lo = if a == 0 { f64::NEG_INFINITY } else { q.bin(a).lower };
            let hi = if b + 1 == k { f64::INFINITY } else { q.bin(b).upper };
            let p = dist.interval_prob(lo, hi);
            if p < MIN_PROBABILITY {
                0.0
            } else {
                p * q.bin(a).width().log2()
            }
        })
        .collect();
    terms.into_iter().collect::<CompensatedSum>().value()
}

/// `H~ = h(X) - E[log2 Δ(X)]`.
pub fn approx_entropy_tilde<Q: Quantizer + ?Sized>(dist: &Distribution, q: &Q) -> f64 {
    dist.differential_entropy() - expected_log_bin_size(dist, q)
}

/// `E[log2 Δs(X)] = E[log2|X|] + (1 - p) - 1/2`.
pub fn expected_log_smooth_bin_size(dist: &Distribution, fmt: &FpFormat) -> f64 {
    dist.abs_log_moment() + (1.0 - fmt.precision() as f64) - 0.5
}

/// `H~s = (p - 1/2) + h(X) - E[log2|X|]`.
pub fn approx_entropy_smooth(dist: &Distribution, fmt: &FpFormat) -> f64 {
    (fmt.precision() as f64 - 0.5) + dist.differential_entropy() - dist.abs_log_moment()
}

/// Closed-form `H~s` for each family, written per family rather than
/// through `h - E[log|X|]`, and independent of every scale parameter.
pub fn closed_form(dist: &Distribution, p: u32) -> f64 {
    let p = p as f64;
    let log2e = std::f64::consts::LOG2_E;
    match *dist.family() {
        Family::Gaussian { .. } => p + 0.5 * (2.0 * PI * E).log2() + EULER_GAMMA / (2.0 * LN_2),
        Family::Uniform { a, b } => {
            let (a, b) = (a * dist.scale(), b * dist.scale());
            let xl = |x: f64| if x == 0.0 { 0.0 } else { x * x.abs().log2() };
            p - 1.0 + (2f64.sqrt() * E * (b - a)).log2() + (xl(a) - xl(b)) / (b - a)
        }
        Family::Gamma { alpha, .. } => gamma_closed_form(p, alpha),
        Family::ChiSquared { k } => gamma_closed_form(p, 0.5 * k),
        Family::Laplace { .. } => p + 0.5 + (1.0 + EULER_GAMMA) / LN_2,
        Family::Logistic { .. } => p - 0.5 + (2.0 + EULER_GAMMA - (PI / 2.0).ln()) / LN_2,
        Family::Weibull { k, .. } => p - 0.5 + (1.0 + EULER_GAMMA) / LN_2 - k.log2(),
        Family::Lognormal { sigma, .. } => p - 0.5 + (sigma * (2.0 * PI * E).sqrt()).log2(),
        Family::Pareto { alpha, .. } => p - 0.5 + (E / alpha).log2(),
        Family::Beta { alpha, beta } => {
            p - 0.5
                + log_beta(alpha, beta) * log2e
                + ((alpha + beta - 1.0) * psi(alpha + beta) - alpha * psi(alpha) - (beta - 1.0) * psi(beta))
                    / LN_2
        }
        Family::StudentT { nu, .. } => {
            p - 0.5
                + log_beta(0.5 * nu, 0.5) * log2e
                + (0.5 * (nu + 1.0) * psi(0.5 * (nu + 1.0)) - 0.5 * nu * psi(0.5 * nu) - 0.5 * psi(0.5)) / LN_2
        }
    }
}

fn gamma_closed_form(p: f64, alpha: f64) -> f64 {
    p - 0.5 + alpha * (1.0 - psi(alpha)) / LN_2 + log_gamma_unchecked(alpha) / LN_2
}

/// `d (p + ½ log2(2πe) + γ/(2 ln 2)) + ½ log2(Π λ_i / Π Σ_ii)`.
pub fn multivariate_gaussian_approx(mvg: &MultivariateGaussian, p: u32) -> f64 {
    let per = p as f64 + 0.5 * (2.0 * PI * E).log2() + EULER_GAMMA / (2.0 * LN_2);
    mvg.dim() as f64 * per + mvg.correlation_term()
}

/// `d (p - 1/2) + h(X) - sum_j E[log2|X_j|]`, the generic route to the same
/// quantity.
pub fn multivariate_approx_generic(mvg: &MultivariateGaussian, p: u32) -> f64 {
    mvg.dim() as f64 * (p as f64 - 0.5) + mvg.differential_entropy() - mvg.abs_log_moment()
}

/// Exact entropy of a vector with independent Gaussian coordinates, as the
/// sum of the marginal exact entropies.
pub fn exact_entropy_independent(mvg: &MultivariateGaussian, fmt: &FpFormat) -> Result<f64> {
    let d = mvg.dim();
    for i in 0..d {
        for j in 0..d {
            if i != j && mvg.covariance(i, j) != 0.0 {
                return Err(Error::Unsupported(
                    "exact entropy needs independent coordinates; use the Monte-Carlo estimator".into(),
                ));
            }
        }
    }
    let mut total = 0.0;
    for s in mvg.marginal_sigmas() {
        total += exact_entropy(&Distribution::gaussian(s)?, fmt);
    }
    Ok(total)
}

/// P(|X| > G).
pub fn overflow_probability(dist: &Distribution, fmt: &FpFormat) -> f64 {
    let g = fmt.granular_bound();
    dist.cdf(-g) + dist.sf(g)
}

/// P(|X| <= 2^e_min).
pub fn underflow_probability(dist: &Distribution, fmt: &FpFormat) -> f64 {
    let u = fmt.underflow_bound();
    dist.interval_prob(-u, u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyComponents {
    pub differential_entropy: f64,
    pub expected_log_bin_size: f64,
    pub expected_log_smooth_bin_size: f64,
    pub abs_log_moment: f64,
}

/// Exact entropy, both approximations, and their ingredients for one
/// distribution and format. All values in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct EntropyReport {
    pub exact_H: f64,
    pub approx_H_tilde: f64,
    pub approx_H_s: f64,
    pub closed_form_H_s: Option<f64>,
    pub p_overflow: f64,
    pub p_underflow: f64,
    pub components: EntropyComponents,
}

pub fn full_report(dist: &Distribution, fmt: &FpFormat) -> Result<EntropyReport> {
    let exact = exact_entropy(dist, fmt);
    let h = dist.differential_entropy();
    let elog = expected_log_bin_size(dist, fmt);
    let report = EntropyReport {
        exact_H: exact,
        approx_H_tilde: h - elog,
        approx_H_s: approx_entropy_smooth(dist, fmt),
        closed_form_H_s: Some(closed_form(dist, fmt.precision())),
        p_overflow: overflow_probability(dist, fmt),
        p_underflow: underflow_probability(dist, fmt),
        components: EntropyComponents {
            differential_entropy: h,
            expected_log_bin_size: elog,
            expected_log_smooth_bin_size: expected_log_smooth_bin_size(dist, fmt),
            abs_log_moment: dist.abs_log_moment(),
        },
    };
    let finite = [report.exact_H, report.approx_H_tilde, report.approx_H_s, report.p_overflow, report.p_underflow];
    if let Some(bad) = finite.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(*bad));
    }
    Ok(report)
}
