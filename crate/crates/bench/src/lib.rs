//! Shared inputs for the benchmarks.

use fpent::{Distribution, FpFormat};

/// Formats from a tiny minifloat up to a 17-bit layout.
pub fn formats() -> Vec<FpFormat> {
    [(3, 4), (7, 5), (10, 7)].iter().map(|&(p, e)| FpFormat::new(p, e).unwrap()).collect()
}

pub fn gaussian() -> Distribution {
    Distribution::gaussian(1.0).unwrap()
}

/// Deterministic spread of magnitudes and signs for encoder throughput.
pub fn encoder_inputs(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let t = i as f64 / n as f64;
            let x = (40.0 * t - 20.0).exp2() * (1.0 + 0.37 * t);
            if i % 2 == 0 { x } else { -x }
        })
        .collect()
}
