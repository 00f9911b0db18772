//! Monte-Carlo estimate of quantized entropy, used as an independent check
//! on the exact computation and for correlated Gaussian vectors.
//!
//! Samples are drawn in fixed-size chunks; chunk `c` uses the ChaCha stream
//! `c` of the configured seed. Counts are merged as integers, so the result
//! is bit-identical for any thread count.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, ChiSquared, Distribution as _, Gamma, LogNormal, Normal, Pareto, StandardNormal, StudentT, Weibull};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{Distribution, Family, MultivariateGaussian};
use crate::error::{Error, Result};
use crate::format::{FpFormat, Quantizer};

pub const CHUNK_SIZE: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    /// Add the Miller–Madow term `(m - 1) / (2 n ln 2)`.
    pub bias_correction: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub plug_in: f64,
    pub occupied_bins: u64,
    pub samples: u64,
}

enum Sampler {
    Normal(Normal<f64>),
    Uniform(f64, f64),
    Gamma(Gamma<f64>),
    ChiSquared(ChiSquared<f64>),
    Laplace(f64),
    Logistic(f64),
    Weibull(Weibull<f64>),
    LogNormal(LogNormal<f64>),
    Pareto(Pareto<f64>),
    Beta(Beta<f64>),
    StudentT(StudentT<f64>, f64),
}

fn sampler_error(family: &'static str, e: impl std::fmt::Display) -> Error {
    Error::Unsupported(format!("no sampler for {family}: {e}"))
}

impl Sampler {
    fn new(dist: &Distribution) -> Result<Self> {
        let fam = dist.family();
        let n = fam.name();
        Ok(match *fam {
            Family::Gaussian { sigma } => Sampler::Normal(Normal::new(0.0, sigma).map_err(|e| sampler_error(n, e))?),
            Family::Uniform { a, b } => Sampler::Uniform(a, b),
            Family::Gamma { alpha, theta } => Sampler::Gamma(Gamma::new(alpha, theta).map_err(|e| sampler_error(n, e))?),
            Family::ChiSquared { k } => Sampler::ChiSquared(ChiSquared::new(k).map_err(|e| sampler_error(n, e))?),
            Family::Laplace { b } => Sampler::Laplace(b),
            Family::Logistic { s } => Sampler::Logistic(s),
            Family::Weibull { lambda, k } => Sampler::Weibull(Weibull::new(lambda, k).map_err(|e| sampler_error(n, e))?),
            Family::Lognormal { mu, sigma } => {
                Sampler::LogNormal(LogNormal::new(mu, sigma).map_err(|e| sampler_error(n, e))?)
            }
            Family::Pareto { xm, alpha } => Sampler::Pareto(Pareto::new(xm, alpha).map_err(|e| sampler_error(n, e))?),
            Family::Beta { alpha, beta } => Sampler::Beta(Beta::new(alpha, beta).map_err(|e| sampler_error(n, e))?),
            Family::StudentT { nu, s } => Sampler::StudentT(StudentT::new(nu).map_err(|e| sampler_error(n, e))?, s),
        })
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Normal(d) => d.sample(rng),
            Sampler::Uniform(a, b) => rng.gen_range(*a..*b),
            Sampler::Gamma(d) => d.sample(rng),
            Sampler::ChiSquared(d) => d.sample(rng),
            Sampler::Laplace(b) => {
                let u: f64 = rng.gen::<f64>() - 0.5;
                -b * u.signum() * (-2.0 * u.abs()).ln_1p()
            }
            Sampler::Logistic(s) => {
                let u: f64 = rng.gen();
                s * (u / (1.0 - u)).ln()
            }
            Sampler::Weibull(d) => d.sample(rng),
            Sampler::LogNormal(d) => d.sample(rng),
            Sampler::Pareto(d) => d.sample(rng),
            Sampler::Beta(d) => d.sample(rng),
            Sampler::StudentT(d, s) => s * d.sample(rng),
        }
    }
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

// +0 lands in the positive central bin, matching the grid lookup's
// tie-breaking; a sample of exactly zero has probability zero anyway.
fn nonzero(x: f64) -> f64 {
    if x == 0.0 {
        f64::MIN_POSITIVE
    } else {
        x
    }
}

fn check_config(cfg: &McConfig) -> Result<()> {
    if cfg.samples == 0 {
        return Err(Error::InvalidParameter {
            family: "monte carlo",
            reason: "sample count must be positive".into(),
        });
    }
    Ok(())
}

/// Run-length counts of a sorted key list.
fn run_lengths<K: Ord + Clone>(mut keys: Vec<K>) -> Vec<(K, u64)> {
    keys.sort_unstable();
    let mut out: Vec<(K, u64)> = Vec::new();
    for k in keys {
        match out.last_mut() {
            Some((last, c)) if *last == k => *c += 1,
            _ => out.push((k, 1)),
        }
    }
    out
}

fn sampled_counts<K, F>(cfg: &McConfig, draw: F) -> Result<BTreeMap<K, u64>>
where
    K: Ord + Clone + Send,
    F: Fn(&mut ChaCha8Rng) -> Result<K> + Sync,
{
    check_config(cfg)?;
    let chunks = cfg.samples.div_ceil(CHUNK_SIZE);
    let partial: Vec<Vec<(K, u64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(cfg.seed, c);
            let n = CHUNK_SIZE.min(cfg.samples - c * CHUNK_SIZE);
            let keys = (0..n).map(|_| draw(&mut rng)).collect::<Result<Vec<K>>>()?;
            Ok(run_lengths(keys))
        })
        .collect::<Result<_>>()?;
    let mut counts = BTreeMap::new();
    for part in partial {
        for (k, c) in part {
            *counts.entry(k).or_insert(0) += c;
        }
    }
    Ok(counts)
}

/// Plug-in entropy of integer counts, with its delta-method standard error.
pub fn entropy_from_counts<I: IntoIterator<Item = u64>>(counts: I, bias_correction: bool) -> McEstimate {
    let counts: Vec<u64> = counts.into_iter().filter(|&c| c > 0).collect();
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return McEstimate {
            estimate: 0.0,
            std_error: 0.0,
            plug_in: 0.0,
            occupied_bins: 0,
            samples: 0,
        };
    }
    let nf = n as f64;
    let (mut h, mut h2) = (0.0, 0.0);
    for &c in &counts {
        let p = c as f64 / nf;
        let l = p.log2();
        h -= p * l;
        h2 += p * l * l;
    }
    let m = counts.len() as u64;
    let var = ((h2 - h * h) / nf).max(0.0);
    let correction = if bias_correction {
        (m as f64 - 1.0) / (2.0 * nf * LN_2)
    } else {
        0.0
    };
    McEstimate {
        estimate: h + correction,
        std_error: var.sqrt(),
        plug_in: h,
        occupied_bins: m,
        samples: n,
    }
}

/// Estimate the entropy of `dist` quantized by `q` from `cfg.samples` draws.
pub fn mc_entropy<Q: Quantizer + ?Sized>(dist: &Distribution, q: &Q, cfg: &McConfig) -> Result<McEstimate> {
    let sampler = Sampler::new(dist)?;
    let scale = dist.scale();
    let counts = sampled_counts(cfg, |rng| q.bin_index(nonzero(scale * sampler.sample(rng))))?;
    Ok(entropy_from_counts(counts.into_values(), cfg.bias_correction))
}

/// Joint entropy of a Gaussian vector with every coordinate quantized by
/// `fmt`.
pub fn mc_entropy_mvg(mvg: &MultivariateGaussian, fmt: &FpFormat, cfg: &McConfig) -> Result<McEstimate> {
    let d = mvg.dim();
    let l = mvg.cholesky_factor();
    let counts = sampled_counts(cfg, |rng| {
        let z: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        (0..d)
            .map(|i| {
                let x: f64 = (0..=i).map(|j| l[i * d + j] * z[j]).sum();
                fmt.bin_index(nonzero(x))
            })
            .collect::<Result<Vec<u64>>>()
    })?;
    Ok(entropy_from_counts(counts.into_values(), cfg.bias_correction))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::exact_entropy;
    use crate::format::RepresentableGrid;

    fn cfg(samples: u64, seed: u64) -> McConfig {
        McConfig {
            samples,
            seed,
            bias_correction: false,
        }
    }

    #[test]
    fn single_bin_has_zero_entropy() {
        let grid = RepresentableGrid::from_values(vec![0.0]).unwrap();
        let r = mc_entropy(&Distribution::gaussian(1.0).unwrap(), &grid, &cfg(10_000, 1)).unwrap();
        assert_eq!((r.estimate, r.std_error, r.occupied_bins), (0.0, 0.0, 1));
    }

    #[test]
    fn counts_formula() {
        let r = entropy_from_counts([5, 5, 0, 10], true);
        assert!((r.plug_in - 1.5).abs() < 1e-15);
        assert!((r.estimate - (1.5 + 2.0 / (40.0 * LN_2))).abs() < 1e-15);
        assert_eq!(r.occupied_bins, 3);
    }

    #[test]
    fn deterministic_for_a_seed() {
        let d = Distribution::laplace(2.0).unwrap();
        let f = FpFormat::new(4, 3).unwrap();
        let a = mc_entropy(&d, &f, &cfg(200_000, 42)).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| mc_entropy(&d, &f, &cfg(200_000, 42)).unwrap());
        assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
        let c = mc_entropy(&d, &f, &cfg(200_000, 43)).unwrap();
        assert_ne!(a.estimate, c.estimate);
    }

    #[test]
    fn samplers_match_exact_entropy() {
        let f = FpFormat::new(3, 3).unwrap();
        let ds = [
            Distribution::gaussian(2.0).unwrap(),
            Distribution::uniform(-1.0, 3.0).unwrap(),
            Distribution::gamma(2.0, 1.0).unwrap(),
            Distribution::chi_squared(3.0).unwrap(),
            Distribution::laplace(1.0).unwrap(),
            Distribution::logistic(0.5).unwrap(),
            Distribution::weibull(1.0, 2.0).unwrap(),
            Distribution::lognormal(0.0, 1.0).unwrap(),
            Distribution::pareto(1.0, 2.0).unwrap(),
            Distribution::beta(2.0, 3.0).unwrap(),
            Distribution::student_t(3.0, 1.0).unwrap().scaled(2.0).unwrap(),
        ];
        for d in ds {
            let r = mc_entropy(&d, &f, &cfg(400_000, 9)).unwrap();
            let h = exact_entropy(&d, &f);
            assert!((r.estimate - h).abs() <= 4.0 * r.std_error + 1e-3, "{d}: {} vs {h}", r.estimate);
        }
    }

    #[test]
    fn independent_vector_is_additive() {
        let f = FpFormat::new(3, 4).unwrap();
        let mvg = MultivariateGaussian::identity(2).unwrap();
        let r = mc_entropy_mvg(&mvg, &f, &cfg(1_000_000, 5)).unwrap();
        let want = 2.0 * exact_entropy(&Distribution::gaussian(1.0).unwrap(), &f);
        assert!((r.estimate - want).abs() <= 4.0 * r.std_error + 2e-3, "{} vs {want}", r.estimate);
    }

    #[test]
    fn rejects_zero_samples() {
        let f = FpFormat::new(3, 4).unwrap();
        assert!(mc_entropy(&Distribution::gaussian(1.0).unwrap(), &f, &cfg(0, 1)).is_err());
    }
}
