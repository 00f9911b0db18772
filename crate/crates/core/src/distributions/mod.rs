//! Univariate distribution families and the zero-mean multivariate
//! Gaussian.
//!
//! Entropies and log-moments are returned in bits. Every family can be
//! rescaled (`X -> sX`) through [`Distribution::scaled`], which is how scale
//! sweeps reach families without a native scale parameter.

mod multivariate;
mod parse;

use std::f64::consts::{LN_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_named, QuadOptions};
use crate::special::{
    digamma_unchecked, log_beta, log_gamma_unchecked, reg_inc_beta, reg_inc_beta_upper,
    reg_inc_gamma, reg_inc_gamma_upper, std_normal_cdf, EULER_GAMMA,
};

pub use multivariate::MultivariateGaussian;
pub use parse::FAMILY_HELP;

/// A family and its parameters, in the family's own units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Gaussian { sigma: f64 },
    Uniform { a: f64, b: f64 },
    Gamma { alpha: f64, theta: f64 },
    ChiSquared { k: f64 },
    Laplace { b: f64 },
    Logistic { s: f64 },
    Weibull { lambda: f64, k: f64 },
    Lognormal { mu: f64, sigma: f64 },
    Pareto { xm: f64, alpha: f64 },
    Beta { alpha: f64, beta: f64 },
    StudentT { nu: f64, s: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportKind {
    RealLine,
    PositiveHalfLine,
    LowerBounded,
    Bounded,
}

/// Closure of the set where the density is positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub kind: SupportKind,
    pub lower: f64,
    pub upper: f64,
}

/// A univariate law: a family, optionally multiplied by a positive scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    family: Family,
    scale: f64,
}

fn check(family: &'static str, ok: bool, reason: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            family,
            reason: reason.to_string(),
        })
    }
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Gaussian { .. } => "gaussian",
            Family::Uniform { .. } => "uniform",
            Family::Gamma { .. } => "gamma",
            Family::ChiSquared { .. } => "chisquared",
            Family::Laplace { .. } => "laplace",
            Family::Logistic { .. } => "logistic",
            Family::Weibull { .. } => "weibull",
            Family::Lognormal { .. } => "lognormal",
            Family::Pareto { .. } => "pareto",
            Family::Beta { .. } => "beta",
            Family::StudentT { .. } => "studentt",
        }
    }

    /// Parameter names and values in canonical order.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            Family::Gaussian { sigma } => vec![("sigma", sigma)],
            Family::Uniform { a, b } => vec![("a", a), ("b", b)],
            Family::Gamma { alpha, theta } => vec![("alpha", alpha), ("theta", theta)],
            Family::ChiSquared { k } => vec![("k", k)],
            Family::Laplace { b } => vec![("b", b)],
            Family::Logistic { s } => vec![("s", s)],
            Family::Weibull { lambda, k } => vec![("lambda", lambda), ("k", k)],
            Family::Lognormal { mu, sigma } => vec![("mu", mu), ("sigma", sigma)],
            Family::Pareto { xm, alpha } => vec![("xm", xm), ("alpha", alpha)],
            Family::Beta { alpha, beta } => vec![("alpha", alpha), ("beta", beta)],
            Family::StudentT { nu, s } => vec![("nu", nu), ("s", s)],
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.name();
        match *self {
            Family::Gaussian { sigma } => check(n, positive(sigma), "sigma must be > 0"),
            Family::Uniform { a, b } => check(n, a.is_finite() && b.is_finite() && a < b, "need a < b"),
            Family::Gamma { alpha, theta } => {
                check(n, positive(alpha), "alpha must be > 0")?;
                check(n, positive(theta), "theta must be > 0")
            }
            Family::ChiSquared { k } => check(n, positive(k), "k must be > 0"),
            Family::Laplace { b } => check(n, positive(b), "b must be > 0"),
            Family::Logistic { s } => check(n, positive(s), "s must be > 0"),
            Family::Weibull { lambda, k } => {
                check(n, positive(lambda), "lambda must be > 0")?;
                check(n, positive(k), "k must be > 0")
            }
            Family::Lognormal { mu, sigma } => {
                check(n, mu.is_finite(), "mu must be finite")?;
                check(n, positive(sigma), "sigma must be > 0")
            }
            Family::Pareto { xm, alpha } => {
                check(n, positive(xm), "xm must be > 0")?;
                check(n, positive(alpha), "alpha must be > 0")
            }
            Family::Beta { alpha, beta } => {
                check(n, positive(alpha), "alpha must be > 0")?;
                check(n, positive(beta), "beta must be > 0")
            }
            Family::StudentT { nu, s } => {
                check(n, positive(nu), "nu must be > 0")?;
                check(n, positive(s), "s must be > 0")
            }
        }
    }

    /// Chi-squared is handled as the Gamma law it is.
    fn canonical(&self) -> Family {
        match *self {
            Family::ChiSquared { k } => Family::Gamma {
                alpha: 0.5 * k,
                theta: 2.0,
            },
            f => f,
        }
    }

    fn support(&self) -> Support {
        let (kind, lower, upper) = match self.canonical() {
            Family::Gaussian { .. }
            | Family::Laplace { .. }
            | Family::Logistic { .. }
            | Family::StudentT { .. } => (SupportKind::RealLine, f64::NEG_INFINITY, f64::INFINITY),
            Family::Uniform { a, b } => (SupportKind::Bounded, a, b),
            Family::Gamma { .. } | Family::Weibull { .. } | Family::Lognormal { .. } => {
                (SupportKind::PositiveHalfLine, 0.0, f64::INFINITY)
            }
            Family::Pareto { xm, .. } => (SupportKind::LowerBounded, xm, f64::INFINITY),
            Family::Beta { .. } => (SupportKind::Bounded, 0.0, 1.0),
            Family::ChiSquared { .. } => unreachable!(),
        };
        Support { kind, lower, upper }
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        let s = self.support();
        if x < s.lower || x > s.upper {
            return f64::NEG_INFINITY;
        }
        match self.canonical() {
            Family::Gaussian { sigma } => {
                let z = x / sigma;
                -0.5 * z * z - sigma.ln() - 0.5 * (2.0 * PI).ln()
            }
            Family::Uniform { a, b } => -(b - a).ln(),
            Family::Gamma { alpha, theta } => {
                if x == 0.0 {
                    return gamma_like_at_zero(alpha, -log_gamma_unchecked(alpha) - alpha * theta.ln());
                }
                (alpha - 1.0) * x.ln() - x / theta - log_gamma_unchecked(alpha) - alpha * theta.ln()
            }
            Family::Laplace { b } => -x.abs() / b - (2.0 * b).ln(),
            Family::Logistic { s } => {
                let z = -x.abs() / s;
                z - s.ln() - 2.0 * z.exp().ln_1p()
            }
            Family::Weibull { lambda, k } => {
                if x == 0.0 {
                    return gamma_like_at_zero(k, (k / lambda).ln());
                }
                let z = x / lambda;
                (k / lambda).ln() + (k - 1.0) * z.ln() - z.powf(k)
            }
            Family::Lognormal { mu, sigma } => {
                if x == 0.0 {
                    return f64::NEG_INFINITY;
                }
                let z = (x.ln() - mu) / sigma;
                -0.5 * z * z - x.ln() - sigma.ln() - 0.5 * (2.0 * PI).ln()
            }
            Family::Pareto { xm, alpha } => alpha.ln() + alpha * xm.ln() - (alpha + 1.0) * x.ln(),
            Family::Beta { alpha, beta } => {
                let lb = log_beta(alpha, beta);
                if x == 0.0 {
                    return gamma_like_at_zero(alpha, -lb);
                }
                if x == 1.0 {
                    return gamma_like_at_zero(beta, -lb);
                }
                (alpha - 1.0) * x.ln() + (beta - 1.0) * (-x).ln_1p() - lb
            }
            Family::StudentT { nu, s } => {
                let t = x / s;
                log_gamma_unchecked(0.5 * (nu + 1.0))
                    - log_gamma_unchecked(0.5 * nu)
                    - 0.5 * (nu * PI).ln()
                    - s.ln()
                    - 0.5 * (nu + 1.0) * (t * t / nu).ln_1p()
            }
            Family::ChiSquared { .. } => unreachable!(),
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        let s = self.support();
        if x <= s.lower {
            return 0.0;
        }
        if x >= s.upper {
            return 1.0;
        }
        match self.canonical() {
            Family::Gaussian { sigma } => std_normal_cdf(x / sigma),
            Family::Uniform { a, b } => (x - a) / (b - a),
            Family::Gamma { alpha, theta } => reg_inc_gamma(alpha, x / theta),
            Family::Laplace { b } => {
                if x < 0.0 {
                    0.5 * (x / b).exp()
                } else {
                    1.0 - 0.5 * (-x / b).exp()
                }
            }
            Family::Logistic { s } => 1.0 / (1.0 + (-x / s).exp()),
            Family::Weibull { lambda, k } => -(-(x / lambda).powf(k)).exp_m1(),
            Family::Lognormal { mu, sigma } => std_normal_cdf((x.ln() - mu) / sigma),
            Family::Pareto { xm, alpha } => -(alpha * (xm / x).ln()).exp_m1(),
            Family::Beta { alpha, beta } => reg_inc_beta(alpha, beta, x),
            Family::StudentT { nu, s } => {
                let t = x / s;
                let tail = 0.5 * reg_inc_beta(0.5 * nu, 0.5, nu / (nu + t * t));
                if t < 0.0 {
                    tail
                } else {
                    1.0 - tail
                }
            }
            Family::ChiSquared { .. } => unreachable!(),
        }
    }

    fn sf(&self, x: f64) -> f64 {
        let s = self.support();
        if x <= s.lower {
            return 1.0;
        }
        if x >= s.upper {
            return 0.0;
        }
        match self.canonical() {
            Family::Gaussian { sigma } => std_normal_cdf(-x / sigma),
            Family::Uniform { a, b } => (b - x) / (b - a),
            Family::Gamma { alpha, theta } => reg_inc_gamma_upper(alpha, x / theta),
            Family::Laplace { b } => {
                if x < 0.0 {
                    1.0 - 0.5 * (x / b).exp()
                } else {
                    0.5 * (-x / b).exp()
                }
            }
            Family::Logistic { s } => 1.0 / (1.0 + (x / s).exp()),
            Family::Weibull { lambda, k } => (-(x / lambda).powf(k)).exp(),
            Family::Lognormal { mu, sigma } => std_normal_cdf(-(x.ln() - mu) / sigma),
            Family::Pareto { xm, alpha } => (alpha * (xm / x).ln()).exp(),
            Family::Beta { alpha, beta } => reg_inc_beta_upper(alpha, beta, x),
            Family::StudentT { .. } => self.cdf(-x),
            Family::ChiSquared { .. } => unreachable!(),
        }
    }

    fn critical_points(&self) -> Vec<f64> {
        match self.canonical() {
            Family::Gaussian { .. }
            | Family::Laplace { .. }
            | Family::Logistic { .. }
            | Family::StudentT { .. } => vec![0.0],
            Family::Uniform { .. } | Family::Pareto { .. } => vec![],
            Family::Gamma { alpha, theta } if alpha > 1.0 => vec![(alpha - 1.0) * theta],
            Family::Gamma { .. } => vec![],
            Family::Weibull { lambda, k } if k > 1.0 => vec![lambda * ((k - 1.0) / k).powf(1.0 / k)],
            Family::Weibull { .. } => vec![],
            Family::Lognormal { mu, sigma } => vec![(mu - sigma * sigma).exp()],
            Family::Beta { alpha, beta } => {
                let interior = (alpha > 1.0 && beta > 1.0) || (alpha < 1.0 && beta < 1.0);
                if interior {
                    vec![(alpha - 1.0) / (alpha + beta - 2.0)]
                } else {
                    vec![]
                }
            }
            Family::ChiSquared { .. } => unreachable!(),
        }
    }

    fn is_unimodal(&self) -> bool {
        !matches!(self.canonical(), Family::Beta { alpha, beta } if alpha < 1.0 && beta < 1.0)
    }

    /// Differential entropy in nats.
    fn entropy_nats(&self) -> f64 {
        let psi = digamma_unchecked;
        let lg = log_gamma_unchecked;
        match self.canonical() {
            Family::Gaussian { sigma } => 0.5 * (2.0 * PI * std::f64::consts::E * sigma * sigma).ln(),
            Family::Uniform { a, b } => (b - a).ln(),
            Family::Gamma { alpha, theta } => alpha + theta.ln() + lg(alpha) + (1.0 - alpha) * psi(alpha),
            Family::Laplace { b } => (2.0 * b).ln() + 1.0,
            Family::Logistic { s } => s.ln() + 2.0,
            Family::Weibull { lambda, k } => EULER_GAMMA * (1.0 - 1.0 / k) + (lambda / k).ln() + 1.0,
            Family::Lognormal { mu, sigma } => mu + 0.5 * (2.0 * PI * std::f64::consts::E * sigma * sigma).ln(),
            Family::Pareto { xm, alpha } => (xm / alpha).ln() + 1.0 + 1.0 / alpha,
            Family::Beta { alpha, beta } => {
                log_beta(alpha, beta) - (alpha - 1.0) * psi(alpha) - (beta - 1.0) * psi(beta)
                    + (alpha + beta - 2.0) * psi(alpha + beta)
            }
            Family::StudentT { nu, s } => {
                (s * nu.sqrt()).ln()
                    + log_beta(0.5 * nu, 0.5)
                    + 0.5 * (nu + 1.0) * (psi(0.5 * (nu + 1.0)) - psi(0.5 * nu))
            }
            Family::ChiSquared { .. } => unreachable!(),
        }
    }

    /// E[ln|X|].
    fn abs_log_moment_nats(&self) -> f64 {
        let psi = digamma_unchecked;
        match self.canonical() {
            Family::Gaussian { sigma } => sigma.ln() - 0.5 * (EULER_GAMMA + LN_2),
            Family::Uniform { a, b } => {
                let xlx = |x: f64| if x == 0.0 { 0.0 } else { x * x.abs().ln() };
                (xlx(b) - xlx(a)) / (b - a) - 1.0
            }
            Family::Gamma { alpha, theta } => psi(alpha) + theta.ln(),
            Family::Laplace { b } => b.ln() - EULER_GAMMA,
            Family::Logistic { s } => s.ln() + (PI / 2.0).ln() - EULER_GAMMA,
            Family::Weibull { lambda, k } => lambda.ln() - EULER_GAMMA / k,
            Family::Lognormal { mu, .. } => mu,
            Family::Pareto { xm, alpha } => xm.ln() + 1.0 / alpha,
            Family::Beta { alpha, beta } => psi(alpha) - psi(alpha + beta),
            Family::StudentT { nu, s } => s.ln() + 0.5 * (nu.ln() + psi(0.5) - psi(0.5 * nu)),
            Family::ChiSquared { .. } => unreachable!(),
        }
    }
}

/// ln f at the endpoint of a density behaving like x^(shape-1) there.
fn gamma_like_at_zero(shape: f64, log_const: f64) -> f64 {
    if shape < 1.0 {
        f64::INFINITY
    } else if shape == 1.0 {
        log_const
    } else {
        f64::NEG_INFINITY
    }
}

impl Distribution {
    pub fn new(family: Family) -> Result<Self> {
        family.validate()?;
        Ok(Distribution { family, scale: 1.0 })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::new(Family::Gaussian { sigma })
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Self::new(Family::Uniform { a, b })
    }

    pub fn gamma(alpha: f64, theta: f64) -> Result<Self> {
        Self::new(Family::Gamma { alpha, theta })
    }

    pub fn chi_squared(k: f64) -> Result<Self> {
        Self::new(Family::ChiSquared { k })
    }

    pub fn laplace(b: f64) -> Result<Self> {
        Self::new(Family::Laplace { b })
    }

    pub fn logistic(s: f64) -> Result<Self> {
        Self::new(Family::Logistic { s })
    }

    pub fn weibull(lambda: f64, k: f64) -> Result<Self> {
        Self::new(Family::Weibull { lambda, k })
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(Family::Lognormal { mu, sigma })
    }

    pub fn pareto(xm: f64, alpha: f64) -> Result<Self> {
        Self::new(Family::Pareto { xm, alpha })
    }

    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(Family::Beta { alpha, beta })
    }

    pub fn student_t(nu: f64, s: f64) -> Result<Self> {
        Self::new(Family::StudentT { nu, s })
    }

    /// The law of `s * X`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        check(self.family.name(), positive(s), "scale must be > 0")?;
        let scale = self.scale * s;
        check(self.family.name(), positive(scale), "scale overflows")?;
        Ok(Distribution {
            family: self.family,
            scale,
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        self.family.ln_pdf(x / self.scale) - self.scale.ln()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.family.cdf(x / self.scale)
    }

    /// Survival function `1 - cdf(x)`, computed without cancellation.
    pub fn sf(&self, x: f64) -> f64 {
        self.family.sf(x / self.scale)
    }

    pub fn support(&self) -> Support {
        let s = self.family.support();
        Support {
            kind: s.kind,
            lower: s.lower * self.scale,
            upper: s.upper * self.scale,
        }
    }

    /// Interior points where the density changes monotonicity.
    pub fn critical_points(&self) -> Vec<f64> {
        self.family
            .critical_points()
            .into_iter()
            .map(|c| c * self.scale)
            .collect()
    }

    pub fn is_unimodal(&self) -> bool {
        self.family.is_unimodal()
    }

    /// P(a < X <= b), taken from whichever tail keeps relative accuracy.
    /// Narrow intervals where both cdf values are close fall back to
    /// integrating the density.
    pub fn interval_prob(&self, a: f64, b: f64) -> f64 {
        if !(a < b) {
            return 0.0;
        }
        let (fa, fb) = (self.cdf(a), self.cdf(b));
        let (hi, diff) = if fa > 0.5 {
            let sa = self.sf(a);
            (sa, sa - self.sf(b))
        } else {
            (fb, fb - fa)
        };
        if diff > 1e-7 * hi || !a.is_finite() || !b.is_finite() {
            return diff.max(0.0);
        }
        let opts = QuadOptions {
            abs_tol: 0.0,
            rel_tol: 1e-13,
            max_intervals: 64,
        };
        match integrate_named("interval probability", |x| self.pdf(x), a, b, &opts) {
            Ok(q) if q.value.is_finite() => q.value.max(0.0),
            _ => diff.max(0.0),
        }
    }

    /// log2 P(a < X <= b); `-inf` for an empty interval.
    pub fn log_cdf_diff(&self, a: f64, b: f64) -> f64 {
        self.interval_prob(a, b).log2()
    }

    /// h(X) in bits.
    pub fn differential_entropy(&self) -> f64 {
        (self.family.entropy_nats() + self.scale.ln()) / LN_2
    }

    /// E[log2|X|].
    pub fn abs_log_moment(&self) -> f64 {
        (self.family.abs_log_moment_nats() + self.scale.ln()) / LN_2
    }

    /// Points that split the real line into pieces on which the density is
    /// smooth and monotone: support ends, 0, and critical points.
    pub fn breakpoints(&self) -> Vec<f64> {
        let s = self.support();
        let mut pts = vec![s.lower, s.upper, 0.0];
        pts.extend(self.critical_points());
        pts.retain(|&x| x >= s.lower && x <= s.upper);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// The `u`-quantile, by bisection on the cdf (or on the survival
    /// function above the median).
    pub fn quantile(&self, u: f64) -> f64 {
        let s = self.support();
        let below = |x: f64| if u <= 0.5 { self.cdf(x) < u } else { self.sf(x) > 1.0 - u };
        let width = self.scale.max(1e-300);
        let mut lo = s.lower;
        let mut hi = s.upper;
        if !lo.is_finite() {
            lo = -width;
            while !below(lo) && lo > -f64::MAX / 2.0 {
                lo *= 2.0;
            }
        }
        if !hi.is_finite() {
            hi = lo.max(0.0) + width;
            while below(hi) && hi < f64::MAX / 2.0 {
                hi *= 2.0;
            }
        }
        for _ in 0..2100 {
            // geometric steps first when the bracket spans many decades
            let mid = if lo > 0.0 && hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
            if mid <= lo || mid >= hi {
                break;
            }
            if below(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Points that bracket where the mass lives: support ends, 0, critical
    /// points, and a spread of quantiles. Integrals over arbitrary regions
    /// split at these so narrow peaks and long tails are not missed.
    pub fn landmarks(&self) -> Vec<f64> {
        let mut pts = self.breakpoints();
        for u in [1e-15, 1e-9, 1e-4, 0.02, 0.25, 0.5, 0.75, 0.98, 1.0 - 1e-4, 1.0 - 1e-9, 1.0 - 1e-15] {
            let q = self.quantile(u);
            if q.is_finite() {
                pts.push(q);
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// ∫_a^b h(x) dx split at the landmarks inside `(a, b)`.
    pub fn integrate_region<F: Fn(f64) -> f64>(
        &self,
        component: &'static str,
        h: F,
        a: f64,
        b: f64,
        opts: &QuadOptions,
    ) -> Result<f64> {
        if !(a < b) {
            return Ok(0.0);
        }
        let s = self.support();
        let (a, b) = (a.max(s.lower), b.min(s.upper));
        if !(a < b) {
            return Ok(0.0);
        }
        let mut pts = vec![a];
        pts.extend(self.landmarks().into_iter().filter(|&x| x > a && x < b));
        pts.push(b);
        let mut total = 0.0;
        for w in pts.windows(2) {
            total += integrate_named(component, &h, w[0], w[1], opts)?.value;
        }
        Ok(total)
    }

    /// -∫ f log2 f by quadrature; an oracle for [`Self::differential_entropy`].
    pub fn entropy_by_quadrature(&self, opts: &QuadOptions) -> Result<f64> {
        let f = |x: f64| {
            let l = self.ln_pdf(x);
            if l == f64::NEG_INFINITY {
                0.0
            } else {
                -l.exp() * l
            }
        };
        Ok(self.integrate_split("differential entropy", f, opts)? / LN_2)
    }

    /// ∫ f log2|x| by quadrature; an oracle for [`Self::abs_log_moment`].
    pub fn abs_log_moment_by_quadrature(&self, opts: &QuadOptions) -> Result<f64> {
        let f = |x: f64| {
            let d = self.pdf(x);
            if d == 0.0 {
                0.0
            } else {
                d * x.abs().ln()
            }
        };
        Ok(self.integrate_split("abs log moment", f, opts)? / LN_2)
    }

    fn integrate_split<F: Fn(f64) -> f64>(
        &self,
        component: &'static str,
        f: F,
        opts: &QuadOptions,
    ) -> Result<f64> {
        let pts = self.breakpoints();
        let mut total = 0.0;
        for w in pts.windows(2) {
            total += integrate_named(component, &f, w[0], w[1], opts)?.value;
        }
        Ok(total)
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.family.name())?;
        let params = self.family.params();
        for (i, (k, v)) in params.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}={v:?}")?;
        }
        if self.scale != 1.0 {
            write!(f, ",scale={:?}", self.scale)?;
        }
        Ok(())
    }
}
