//! The correction term `D(f || g)` between the exact entropy and `H~`, its
//! two-sided bounds, and the error of smoothing the bin-size function.
//!
//! Bounds are taken bin by bin on the granular part of each bin. The two
//! saturating bins also carry their tail beyond the granular region; that
//! piece is evaluated exactly and added to every bound, so the sandwich
//! `lower <= kl <= upper` holds with or without overflow mass.

use std::f64::consts::{LN_2, LOG2_E};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::Distribution;
use crate::entropy::{
    approx_entropy_smooth, approx_entropy_tilde, bin_probabilities, clipped_edges, expected_log_bin_size,
    MIN_PROBABILITY,
};
use crate::error::{Error, Result};
use crate::format::{FpFormat, Quantizer};
use crate::quadrature::{integrate_named, QuadOptions};
use crate::sum::CompensatedSum;

/// Largest `K` for which per-bin analysis is run.
pub const MAX_PER_BIN_BINS: u64 = 1 << 16;

/// Bisection stops once the bracket is this fraction of the segment.
pub const ROOT_TOL: f64 = 1e-12;

/// 60 log-spaced points in `[1, 32]`.
pub fn default_t_grid() -> Vec<f64> {
    (0..60).map(|i| 32f64.powf(i as f64 / 59.0)).collect()
}

/// `t log2 t - (t - 1) log2 e`.
pub fn phi(t: f64) -> f64 {
    if t == 0.0 {
        LOG2_E
    } else {
        t * t.log2() - (t - 1.0) * LOG2_E
    }
}

/// `R ln R - R + 1` at `R = e^s`, accurate when `R` is close to 1.
fn phi_nats_exp(s: f64) -> f64 {
    if s.abs() < 0.1 {
        // sum_{n>=2} s^n (n-1)/n!
        let mut term = s; // s^n / n! built incrementally
        let mut acc = 0.0;
        for n in 2..20 {
            term *= s / n as f64;
            acc += term * (n - 1) as f64;
        }
        acc
    } else {
        s.exp() * s - s.exp_m1()
    }
}

fn per_bin_quad(p: f64) -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-15 * p,
        rel_tol: 1e-10,
        max_intervals: 2000,
    }
}

/// Everything the bounds need about one bin.
#[derive(Debug, Clone)]
struct BinData {
    index: u64,
    lower: f64,
    upper: f64,
    /// clipped probability
    p: f64,
    /// probability of the granular part
    q: f64,
    ln_g: f64,
    /// pieces of `[lower, upper]` on which the density is monotone
    pieces: Vec<(f64, f64)>,
    /// largest ln f on the bin
    ln_max: f64,
    /// ∫_tail f ln(f/g), nats; zero for inner bins
    tail: f64,
}

impl BinData {
    fn width(&self) -> f64 {
        self.upper - self.lower
    }

    fn lambda(&self) -> f64 {
        (self.ln_max - self.ln_g).exp()
    }
}

fn bin_data<Q: Quantizer + ?Sized>(dist: &Distribution, q: &Q, i: u64, p: f64) -> Result<Option<BinData>> {
    if p < MIN_PROBABILITY {
        return Ok(None);
    }
    let b = q.bin(i);
    let (clo, chi) = clipped_edges(q, i);
    let ln_g = (p / b.width()).ln();
    let mut pts = vec![b.lower];
    pts.extend(dist.breakpoints().into_iter().filter(|&x| x > b.lower && x < b.upper));
    pts.push(b.upper);
    let pieces: Vec<(f64, f64)> = pts.windows(2).map(|w| (w[0], w[1])).collect();
    let ln_max = pts.iter().map(|&x| dist.ln_pdf(x)).fold(f64::NEG_INFINITY, f64::max);
    let gran = dist.interval_prob(b.lower, b.upper);
    let f_ln_f = |x: f64| {
        let l = dist.ln_pdf(x);
        if l == f64::NEG_INFINITY {
            0.0
        } else {
            l.exp() * (l - ln_g)
        }
    };
    let opts = QuadOptions::default().with_abs_tol(1e-15);
    let mut tail = 0.0;
    if clo < b.lower {
        tail += dist.integrate_region("kl tail", f_ln_f, clo, b.lower, &opts)?;
    }
    if chi > b.upper {
        tail += dist.integrate_region("kl tail", f_ln_f, b.upper, chi, &opts)?;
    }
    Ok(Some(BinData {
        index: i,
        lower: b.lower,
        upper: b.upper,
        p,
        q: gran,
        ln_g,
        pieces,
        ln_max,
        tail,
    }))
}

/// Sub-interval of a monotone piece where `ln f >= level`.
fn superlevel_on_piece(dist: &Distribution, (a, b): (f64, f64), level: f64) -> Option<(f64, f64)> {
    let fa = dist.ln_pdf(a) >= level;
    let fb = dist.ln_pdf(b) >= level;
    match (fa, fb) {
        (true, true) => Some((a, b)),
        (false, false) => None,
        _ => {
            // bracket the crossing; `lo` keeps the status of `a`
            let (mut lo, mut hi) = (a, b);
            let tol = ROOT_TOL * (b - a);
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if (dist.ln_pdf(mid) >= level) == fa {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let r = 0.5 * (lo + hi);
            if fa {
                Some((a, r))
            } else {
                Some((r, b))
            }
        }
    }
}

fn superlevel_set(dist: &Distribution, bin: &BinData, ln_ratio: f64) -> Vec<(f64, f64)> {
    let level = bin.ln_g + ln_ratio;
    if level > bin.ln_max {
        return Vec::new();
    }
    bin.pieces
        .iter()
        .filter_map(|&piece| superlevel_on_piece(dist, piece, level))
        .collect()
}

fn superlevel_fraction_of(dist: &Distribution, bin: &BinData, lambda: f64) -> f64 {
    let m: f64 = superlevel_set(dist, bin, lambda.ln()).iter().map(|(a, b)| b - a).sum();
    m / bin.width()
}

/// ∫_B g φ(f/g) in nats.
fn granular_phi_integral(dist: &Distribution, bin: &BinData) -> Result<f64> {
    let g = bin.ln_g.exp();
    let h = |x: f64| {
        let l = dist.ln_pdf(x);
        if l == f64::NEG_INFINITY {
            g
        } else {
            g * phi_nats_exp(l - bin.ln_g)
        }
    };
    let opts = per_bin_quad(bin.p);
    let mut total = 0.0;
    for &(a, b) in &bin.pieces {
        total += integrate_named("kl divergence", h, a, b, &opts)?.value;
    }
    Ok(total)
}

/// ∫_{B, f >= g} f ln(f/g) in nats.
fn positive_part_integral(dist: &Distribution, bin: &BinData) -> Result<f64> {
    let h = |x: f64| {
        let l = dist.ln_pdf(x);
        if l == f64::NEG_INFINITY {
            0.0
        } else {
            l.exp() * (l - bin.ln_g).max(0.0)
        }
    };
    let opts = per_bin_quad(bin.p);
    let mut total = 0.0;
    for (a, b) in superlevel_set(dist, bin, 0.0) {
        total += integrate_named("kl upper bound", h, a, b, &opts)?.value;
    }
    Ok(total)
}

/// Exact contribution of a saturating bin's tail to every bound, in bits:
/// `(T, T + log2(e) (q - p))` for the upper and lower side.
fn overflow_terms(bin: &BinData) -> (f64, f64) {
    let t = bin.tail / LN_2;
    (t, t + LOG2_E * (bin.q - bin.p))
}

fn analyse<Q: Quantizer + ?Sized>(dist: &Distribution, q: &Q) -> Result<Vec<BinData>> {
    let k = q.bin_count();
    if k > MAX_PER_BIN_BINS {
        return Err(Error::TooManyBins {
            k,
            limit: MAX_PER_BIN_BINS,
        });
    }
    if k < 2 {
        return Ok(Vec::new());
    }
    let probs = bin_probabilities(dist, q);
    let bins: Vec<Option<BinData>> = (0..k)
        .into_par_iter()
        .map(|i| bin_data(dist, q, i, probs[i as usize]))
        .collect::<Result<_>>()?;
    Ok(bins.into_iter().flatten().collect())
}

/// Per-bin figures for the `--per-bin` dump. `lambda` is `inf` where the
/// density is unbounded on the bin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinBound {
    pub index: u64,
    pub lower: f64,
    pub upper: f64,
    pub p: f64,
    pub g: f64,
    pub lambda: f64,
    pub kl: f64,
    pub upper_bound: f64,
    pub lower_bound: f64,
}

/// `D(f || g)` with its bounds, in bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlBoundReport {
    pub kl: f64,
    pub lower: f64,
    pub upper: f64,
    pub t_star: f64,
    /// `None` when the density is not unimodal; `inf` when it is unbounded.
    pub one_peak: Option<f64>,
    /// Whether some bin has an unbounded density ratio.
    pub unbounded_ratio: bool,
    /// Exact tail contribution of the saturating bins included in `upper`.
    pub overflow_term: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_bin: Option<Vec<BinBound>>,
}

/// `D(f || g) = sum_i ∫ f log2(f/g_i)` over the bins (outer bins extended),
/// by per-bin quadrature. Limited to `K <= 2^16`; see [`kl_via_identity`].
pub fn kl_divergence<Q: Quantizer + ?Sized>(dist: &Distribution, q: &Q) -> Result<f64> {
    let bins = analyse(dist, q)?;
    kl_from(dist, &bins)
}

fn kl_from(dist: &Distribution, bins: &[BinData]) -> Result<f64> {
    let terms: Vec<f64> = bins
        .par_iter()
        .map(|b| {
            let phi = granular_phi_integral(dist, b)? / LN_2;
            Ok(phi + overflow_terms(b).1)
        })
        .collect::<Result<_>>()?;
    Ok(terms.into_iter().collect::<CompensatedSum>().value())
}

/// `D = H - H~`, for formats too large for per-bin quadrature.
pub fn kl_via_identity<Q: Quantizer + ?Sized>(dist: &Distribution, q: &Q) -> f64 {
    crate::entropy::exact_entropy(dist, q) - approx_entropy_tilde(dist, q)
}

/// `sum_i ∫_{B_i, f >= g_i} f log2(f/g_i)` plus the saturating tails.
pub fn kl_upper_bound<Q: Quantizer + ?Sized>(dist: &Distribution, q: &Q) -> Result<f64> {
    let bins = analyse(dist, q)?;
    Ok(upper_terms(dist, &bins)?.iter().sum())
}

fn upper_terms(dist: &Distribution, bins: &[BinData]) -> Result<Vec<f64>> {
    bins.par_iter()
        .map(|b| Ok(positive_part_integral(dist, b)? / LN_2 + overflow_terms(b).0))
        .collect()
}

/// Best `sum_i p_i φ(t) L_i(t)` (plus the saturating tails) over `t_grid`,
/// with its maximizing `t`.
pub fn kl_lower_bound<Q: Quantizer + ?Sized>(dist: &Distribution, q: &Q, t_grid: &[f64]) -> Result<(f64, f64)> {
    let bins = analyse(dist, q)?;
    lower_from(dist, &bins, t_grid)
}

fn lower_at(dist: &Distribution, bins: &[BinData], t: f64) -> Vec<f64> {
    bins.par_iter()
        .map(|b| {
            let l = if t > 1.0 { superlevel_fraction_of(dist, b, t) } else { 0.0 };
            b.p * phi(t) * l + overflow_terms(b).1
        })
        .collect()
}

fn lower_from(dist: &Distribution, bins: &[BinData], t_grid: &[f64]) -> Result<(f64, f64)> {
    if let Some(bad) = t_grid.iter().find(|t| !(**t >= 1.0) || !t.is_finite()) {
        return Err(Error::InvalidParameter {
            family: "t grid",
            reason: format!("t = {bad} is not a finite value >= 1"),
        });
    }
    let mut best = (f64::NEG_INFINITY, 1.0);
    for &t in t_grid {
        let v: f64 = lower_at(dist, bins, t).iter().sum();
        if v > best.0 {
            best = (v, t);
        }
    }
    if best.0 < 0.0 || t_grid.is_empty() {
        best.0 = best.0.max(0.0);
    }
    Ok(best)
}

/// `sum_i w_i H_i log2(H_i |B_i| / p_i)` with `w_i` the width of
/// `{f >= g_i}` on the bin and `H_i` the peak density there. Requires a
/// unimodal density.
pub fn one_peak_bound<Q: Quantizer + ?Sized>(dist: &Distribution, q: &Q) -> Result<f64> {
    if !dist.is_unimodal() {
        return Err(Error::NotUnimodal("one-peak"));
    }
    let bins = analyse(dist, q)?;
    Ok(one_peak_from(dist, &bins))
}

fn one_peak_from(dist: &Distribution, bins: &[BinData]) -> f64 {
    bins.iter()
        .map(|b| {
            let w: f64 = superlevel_set(dist, b, 0.0).iter().map(|(a, c)| c - a).sum();
            let tail = overflow_terms(b).0;
            if w == 0.0 {
                return tail;
            }
            if b.ln_max == f64::INFINITY {
                return f64::INFINITY;
            }
            let h = b.ln_max.exp();
            w * h * (b.ln_max - b.ln_g) / LN_2 + tail
        })
        .sum()
}

/// Normalized measure `L_i(λ)` of `{x in B_i : f(x)/g_i >= λ}`.
pub fn superlevel_fraction<Q: Quantizer + ?Sized>(dist: &Distribution, q: &Q, index: u64, lambda: f64) -> Result<f64> {
    let p = {
        let (lo, hi) = clipped_edges(q, index);
        dist.interval_prob(lo, hi)
    };
    Ok(match bin_data(dist, q, index, p)? {
        Some(b) => superlevel_fraction_of(dist, &b, lambda),
        None => 0.0,
    })
}

/// Everything at once, sharing the per-bin setup.
pub fn kl_bounds<Q: Quantizer + ?Sized>(
    dist: &Distribution,
    q: &Q,
    t_grid: &[f64],
    per_bin: bool,
) -> Result<KlBoundReport> {
    let bins = analyse(dist, q)?;
    let kl_terms: Vec<f64> = bins
        .par_iter()
        .map(|b| Ok(granular_phi_integral(dist, b)? / LN_2 + overflow_terms(b).1))
        .collect::<Result<_>>()?;
    let kl = kl_terms.iter().copied().collect::<CompensatedSum>().value();
    let up = upper_terms(dist, &bins)?;
    let upper = up.iter().copied().collect::<CompensatedSum>().value();
    let (lower, t_star) = lower_from(dist, &bins, t_grid)?;
    let one_peak = dist.is_unimodal().then(|| one_peak_from(dist, &bins));
    let unbounded_ratio = bins.iter().any(|b| b.ln_max == f64::INFINITY);
    let overflow_term = bins.iter().map(|b| overflow_terms(b).0).sum();
    let per_bin = per_bin.then(|| {
        let low = lower_at(dist, &bins, t_star);
        bins.iter()
            .enumerate()
            .map(|(j, b)| BinBound {
                index: b.index,
                lower: b.lower,
                upper: b.upper,
                p: b.p,
                g: b.ln_g.exp(),
                lambda: b.lambda(),
                kl: kl_terms[j],
                upper_bound: up[j],
                lower_bound: low[j],
            })
            .collect()
    });
    Ok(KlBoundReport {
        kl,
        lower,
        upper,
        t_star,
        one_peak,
        unbounded_ratio,
        overflow_term,
        per_bin,
    })
}

/// Error of replacing `Δ` by the smooth `Δs` and extending it to all of R.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct SmoothingErrorReport {
    /// `|∫_{S ∪ O} f log2(f Δs)|`
    pub epsilon: f64,
    /// `1/2 + epsilon`
    pub bound: f64,
    /// `|H~_{U\S} - H~s|`
    pub observed_gap: f64,
    /// `h + ∫_{S ∪ O} f log2 f - sum_i q'_i log2|B_i|`, with `q'_i` the mass of
    /// bin `i` outside the underflow and overflow regions.
    pub approx_H_tilde_restricted: f64,
    pub approx_H_s: f64,
}

pub fn smoothing_epsilon(dist: &Distribution, fmt: &FpFormat) -> Result<SmoothingErrorReport> {
    let u = fmt.underflow_bound();
    let g = fmt.granular_bound();
    let ln_ds = (1.0 - fmt.precision() as f64) * LN_2 - 0.5 * LN_2;
    let opts = QuadOptions::default().with_abs_tol(1e-13);
    let regions = [(f64::NEG_INFINITY, -g), (-u, u), (g, f64::INFINITY)];

    let f_log_fds = |x: f64| {
        let l = dist.ln_pdf(x);
        if l == f64::NEG_INFINITY || x == 0.0 {
            0.0
        } else {
            l.exp() * (l + x.abs().ln() + ln_ds)
        }
    };
    let f_log_f = |x: f64| {
        let l = dist.ln_pdf(x);
        if l == f64::NEG_INFINITY {
            0.0
        } else {
            l.exp() * l
        }
    };
    let mut eps = 0.0;
    let mut neg_h_outside = 0.0;
    for &(a, b) in &regions {
        eps += dist.integrate_region("smoothing epsilon", f_log_fds, a, b, &opts)?;
        neg_h_outside += dist.integrate_region("smoothing epsilon", f_log_f, a, b, &opts)?;
    }
    let epsilon = (eps / LN_2).abs();

    // sum_i q'_i log2|B_i|: drop the tails of the outer bins and the
    // underflow part of the two central bins
    let k = fmt.k();
    let outer_w = fmt.bin(k - 1).width().log2();
    let central_w = fmt.bin(k / 2).width().log2();
    let tails = dist.cdf(-g) + dist.sf(g);
    let under = dist.interval_prob(-u, u);
    let elog = expected_log_bin_size(dist, fmt) - tails * outer_w - under * central_w;
    let restricted = dist.differential_entropy() + neg_h_outside / LN_2 - elog;
    let smooth = approx_entropy_smooth(dist, fmt);
    let report = SmoothingErrorReport {
        epsilon,
        bound: 0.5 + epsilon,
        observed_gap: (restricted - smooth).abs(),
        approx_H_tilde_restricted: restricted,
        approx_H_s: smooth,
    };
    if !report.epsilon.is_finite() || !report.observed_gap.is_finite() {
        return Err(Error::Quadrature {
            component: "smoothing epsilon",
            estimate: report.epsilon,
            achieved: f64::NAN,
        });
    }
    Ok(report)
}
