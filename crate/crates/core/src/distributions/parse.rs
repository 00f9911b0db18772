use std::collections::BTreeMap;
use std::str::FromStr;

use super::{Distribution, Family};
use crate::error::{Error, Result};

/// Accepted `family:param=value,...` forms. Any family also takes an
/// optional `scale=s`, which multiplies the variable.
pub const FAMILY_HELP: &str = "gaussian:sigma, uniform:a,b, gamma:alpha,theta, chisquared:k, \
laplace:b, logistic:s, weibull:lambda,k, lognormal:mu,sigma, pareto:xm,alpha, beta:alpha,beta, \
studentt:nu,s (any family also accepts scale)";

fn err(input: &str, reason: impl Into<String>) -> Error {
    Error::Parse {
        input: input.to_string(),
        reason: reason.into(),
    }
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(input: &str) -> Result<Self> {
        let (name, rest) = input.split_once(':').unwrap_or((input, ""));
        let name = name.trim().to_ascii_lowercase();
        let mut params = BTreeMap::new();
        for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| err(input, format!("expected key=value, got '{item}'")))?;
            let k = k.trim().to_ascii_lowercase();
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| err(input, format!("'{}' is not a number", v.trim())))?;
            if params.insert(k.clone(), v).is_some() {
                return Err(err(input, format!("parameter '{k}' given twice")));
            }
        }
        let scale = params.remove("scale");

        let keys: &[&str] = match name.as_str() {
            "gaussian" | "normal" => &["sigma"],
            "uniform" => &["a", "b"],
            "gamma" => &["alpha", "theta"],
            "chisquared" | "chi2" => &["k"],
            "laplace" => &["b"],
            "logistic" => &["s"],
            "weibull" => &["lambda", "k"],
            "lognormal" => &["mu", "sigma"],
            "pareto" => &["xm", "alpha"],
            "beta" => &["alpha", "beta"],
            "studentt" | "t" => &["nu", "s"],
            _ => {
                return Err(err(
                    input,
                    format!("unknown family '{name}'; expected one of {FAMILY_HELP}"),
                ))
            }
        };
        if let Some(extra) = params.keys().find(|k| !keys.contains(&k.as_str())) {
            return Err(err(
                input,
                format!("unknown parameter '{extra}' for {name}; expected {}", keys.join(",")),
            ));
        }
        let mut v = Vec::with_capacity(keys.len());
        for k in keys {
            v.push(*params.get(*k).ok_or_else(|| {
                err(input, format!("missing parameter '{k}' for {name}; expected {}", keys.join(",")))
            })?);
        }
        let family = match name.as_str() {
            "gaussian" | "normal" => Family::Gaussian { sigma: v[0] },
            "uniform" => Family::Uniform { a: v[0], b: v[1] },
            "gamma" => Family::Gamma { alpha: v[0], theta: v[1] },
            "chisquared" | "chi2" => Family::ChiSquared { k: v[0] },
            "laplace" => Family::Laplace { b: v[0] },
            "logistic" => Family::Logistic { s: v[0] },
            "weibull" => Family::Weibull { lambda: v[0], k: v[1] },
            "lognormal" => Family::Lognormal { mu: v[0], sigma: v[1] },
            "pareto" => Family::Pareto { xm: v[0], alpha: v[1] },
            "beta" => Family::Beta { alpha: v[0], beta: v[1] },
            _ => Family::StudentT { nu: v[0], s: v[1] },
        };
        let d = Distribution::new(family)?;
        match scale {
            Some(s) => d.scaled(s),
            None => Ok(d),
        }
    }
}
