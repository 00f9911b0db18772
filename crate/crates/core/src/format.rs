//! The idealized normalized floating-point format: no zero, no subnormals,
//! no infinities, round-to-nearest with saturation at the largest
//! magnitude.
//!
//! A format with precision `p` and `E` exponent bits has exponents
//! `e_min = -(2^(E-1) - 1) ..= e_max = 2^(E-1)`, `2^(p-1)` mantissas per
//! exponent and `K = 2^(E+p)` representable values, symmetric about zero.
//! Every value, bin edge, and bin width is a dyadic rational with at most
//! `p + 1` significant bits, so all of them are exact in `f64`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported `E + p` (K = 2^30 representable values).
pub const MAX_TOTAL_BITS: u32 = 30;
/// Largest supported exponent width; 2^(e_max + 1) must fit in an `f64`.
pub const MAX_EXPONENT_BITS: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FpFormat {
    precision: u32,
    exponent_bits: u32,
}

impl FpFormat {
    pub fn new(precision: u32, exponent_bits: u32) -> Result<Self> {
        if precision == 0 {
            return Err(Error::InvalidFormat("precision must be at least 1".into()));
        }
        if exponent_bits == 0 {
            return Err(Error::InvalidFormat(
                "exponent bits must be at least 1 (E = 0 is not supported)".into(),
            ));
        }
        if exponent_bits > MAX_EXPONENT_BITS {
            return Err(Error::InvalidFormat(format!(
                "exponent bits {exponent_bits} exceed the supported maximum {MAX_EXPONENT_BITS}"
            )));
        }
        if precision + exponent_bits > MAX_TOTAL_BITS {
            return Err(Error::InvalidFormat(format!(
                "K = 2^{} representable values exceeds the limit 2^{MAX_TOTAL_BITS}",
                precision + exponent_bits
            )));
        }
        Ok(FpFormat {
            precision,
            exponent_bits,
        })
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn exponent_bits(&self) -> u32 {
        self.exponent_bits
    }

    pub fn e_min(&self) -> i32 {
        -((1i32 << (self.exponent_bits - 1)) - 1)
    }

    pub fn e_max(&self) -> i32 {
        1i32 << (self.exponent_bits - 1)
    }

    /// Number of representable values, `2^(E+p)`.
    pub fn k(&self) -> u64 {
        1u64 << (self.exponent_bits + self.precision)
    }

    /// Mantissa values per exponent, `2^(p-1)`.
    pub fn mantissas_per_exponent(&self) -> u64 {
        1u64 << (self.precision - 1)
    }

    /// Number of exponent levels, `2^E`.
    pub fn exponent_levels(&self) -> u32 {
        1u32 << self.exponent_bits
    }

    /// Half-width `G = 2^(e_max+1) - 2^(e_max-p)` of the granular region.
    pub fn granular_bound(&self) -> f64 {
        let e = self.e_max();
        pow2(e + 1) - pow2(e - self.precision as i32)
    }

    /// Half-width `2^e_min` of the underflow region.
    pub fn underflow_bound(&self) -> f64 {
        pow2(self.e_min())
    }

    /// Largest representable magnitude.
    pub fn max_value(&self) -> f64 {
        let e = self.e_max();
        pow2(e + 1) - pow2(e + 1 - self.precision as i32)
    }

    pub fn classify(&self, x: f64) -> Result<Region> {
        classify(x, self)
    }

    pub fn encode(&self, x: f64) -> Result<Encoded> {
        encode(x, self)
    }

    /// The `i`-th bin (0-based, ascending) computed arithmetically.
    pub fn bin(&self, index: u64) -> Bin {
        let half = self.k() / 2;
        if index >= half {
            self.positive_bin(index - half)
        } else {
            let b = self.positive_bin(half - 1 - index);
            Bin {
                value: -b.value,
                lower: -b.upper,
                upper: -b.lower,
                class: b.class,
            }
        }
    }

    /// Bin of the `pos`-th positive value (0-based from `2^e_min`).
    fn positive_bin(&self, pos: u64) -> Bin {
        let per = self.mantissas_per_exponent();
        let e = self.e_min() + (pos / per) as i32;
        let j = pos % per;
        let p = self.precision as i32;
        let value = pow2(e) + j as f64 * pow2(e + 1 - p);
        let lower = if j > 0 {
            value - pow2(e - p)
        } else if e == self.e_min() {
            0.0
        } else {
            pow2(e) - pow2(e - p - 1)
        };
        let upper = value + pow2(e - p);
        let last = pos + 1 == self.k() / 2;
        let class = if pos == 0 {
            BinClass::Central
        } else if last {
            BinClass::OuterClipping
        } else if j == 0 {
            BinClass::ExponentBoundary
        } else {
            BinClass::Interior
        };
        Bin {
            value,
            lower,
            upper,
            class,
        }
    }

    /// Grid index of an encoded value.
    pub fn index_of(&self, enc: &Encoded) -> u64 {
        let per = self.mantissas_per_exponent();
        let pos = (enc.exponent - self.e_min()) as u64 * per + enc.mantissa_index;
        let half = self.k() / 2;
        if enc.negative {
            half - 1 - pos
        } else {
            half + pos
        }
    }
}

#[inline]
pub(crate) fn pow2(e: i32) -> f64 {
    // exact for the exponent range allowed by FpFormat
    2f64.powi(e)
}

/// Where a real number falls relative to the format's range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// `|x| <= 2^e_min`
    Underflow,
    Granular,
    /// `|x| > G`
    Overflow,
}

pub fn classify(x: f64, fmt: &FpFormat) -> Result<Region> {
    if !x.is_finite() {
        return Err(Error::NonFinite(x));
    }
    let a = x.abs();
    Ok(if a <= fmt.underflow_bound() {
        Region::Underflow
    } else if a > fmt.granular_bound() {
        Region::Overflow
    } else {
        Region::Granular
    })
}

/// Component-wise classification of a vector.
pub fn classify_vec(xs: &[f64], fmt: &FpFormat) -> Result<Vec<Region>> {
    xs.iter().map(|&x| classify(x, fmt)).collect()
}

/// Kind of quantization bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinClass {
    /// The two bins adjacent to zero; they contain the underflow region.
    Central,
    /// Strictly inside an exponent block.
    Interior,
    /// First bin of an exponent block, straddling `2^e`.
    ExponentBoundary,
    /// The saturating bin at either end of the range.
    OuterClipping,
    /// Bin of a grid that did not come from a floating-point format.
    Generic,
}

/// One quantization bin: its representable value and its edges inside the
/// granular region. The two outermost bins also absorb everything beyond
/// their outer edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub class: BinClass,
}

impl Bin {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// `round_p(alpha)`: nearest multiple of `2^-(p-1)` in `[0, 1]`, ties
/// toward the larger multiple.
pub fn round_p(alpha: f64, p: u32) -> f64 {
    round_p_index(alpha, p) as f64 * pow2(1 - p as i32)
}

fn round_p_index(alpha: f64, p: u32) -> u64 {
    let n = 1u64 << (p - 1);
    let scaled = alpha * n as f64;
    let i = (scaled + 0.5).floor();
    i.clamp(0.0, n as f64) as u64
}

/// Sign, exponent and mantissa of a quantized value:
/// `(-1)^negative * 2^exponent * (1 + mantissa_index * 2^-(p-1))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Encoded {
    pub negative: bool,
    pub exponent: i32,
    pub mantissa_index: u64,
    precision: u32,
}

impl Encoded {
    pub fn sign(&self) -> f64 {
        if self.negative {
            -1.0
        } else {
            1.0
        }
    }

    pub fn mantissa(&self) -> f64 {
        self.mantissa_index as f64 * pow2(1 - self.precision as i32)
    }

    pub fn value(&self) -> f64 {
        self.sign() * pow2(self.exponent) * (1.0 + self.mantissa())
    }
}

/// floor(log2|x|) for finite nonzero x, exact (including subnormals).
fn floor_log2(x: f64) -> i32 {
    let bits = x.abs().to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i32;
    if biased == 0 {
        floor_log2(x * pow2(64)) - 64
    } else {
        biased - 1023
    }
}

/// Round `x` to the format by sign/exponent/mantissa arithmetic, without
/// consulting a grid. Magnitudes below `2^e_min` round to `2^e_min`,
/// magnitudes beyond the largest value saturate, and a mantissa that rounds
/// up to 1 carries into the next exponent.
pub fn encode(x: f64, fmt: &FpFormat) -> Result<Encoded> {
    if x == 0.0 {
        return Err(Error::ZeroInput);
    }
    if !x.is_finite() {
        return Err(Error::NonFinite(x));
    }
    let p = fmt.precision();
    let (e_min, e_max) = (fmt.e_min(), fmt.e_max());
    let n = fmt.mantissas_per_exponent();
    let a = x.abs();
    let lg = floor_log2(a);
    let negative = x < 0.0;
    let saturated = Encoded {
        negative,
        exponent: e_max,
        mantissa_index: n - 1,
        precision: p,
    };
    if lg > e_max {
        return Ok(saturated);
    }
    let e_tilde = lg.max(e_min);
    // exact: scaling by a power of two
    let alpha = a * pow2(-e_tilde) - 1.0;
    let i = round_p_index(alpha, p);
    if i == n {
        if e_tilde >= e_max {
            return Ok(saturated);
        }
        return Ok(Encoded {
            negative,
            exponent: e_tilde + 1,
            mantissa_index: 0,
            precision: p,
        });
    }
    Ok(Encoded {
        negative,
        exponent: e_tilde,
        mantissa_index: i,
        precision: p,
    })
}

/// Width of the bin containing `x`, for `x` in the granular region.
pub fn bin_size(x: f64, fmt: &FpFormat) -> Result<f64> {
    if x == 0.0 {
        return Err(Error::ZeroInput);
    }
    if !x.is_finite() {
        return Err(Error::NonFinite(x));
    }
    if x.abs() > fmt.granular_bound() {
        return Err(Error::OutsideGranularRegion(x));
    }
    let enc = encode(x, fmt)?;
    Ok(fmt.bin(fmt.index_of(&enc)).width())
}

/// Smoothed bin size `|x| 2^(1-p) / sqrt(2)`, defined on all of R \ {0}.
pub fn smooth_bin_size(x: f64, fmt: &FpFormat) -> Result<f64> {
    if x == 0.0 {
        return Err(Error::ZeroInput);
    }
    if !x.is_finite() {
        return Err(Error::NonFinite(x));
    }
    Ok(x.abs() * pow2(1 - fmt.precision() as i32) / std::f64::consts::SQRT_2)
}

/// Anything that maps reals onto an ordered set of representable values by
/// midpoint rounding with saturation.
pub trait Quantizer: Sync {
    fn bin_count(&self) -> u64;
    fn bin(&self, index: u64) -> Bin;
    /// Index of the bin `x` quantizes to.
    fn bin_index(&self, x: f64) -> Result<u64>;

    /// Maximal runs of consecutive bins sharing one width, as inclusive
    /// index ranges in ascending order.
    fn width_runs(&self) -> Vec<(u64, u64)> {
        let k = self.bin_count();
        let mut runs = Vec::new();
        let mut start = 0;
        for i in 1..=k {
            if i == k || self.bin(i).width() != self.bin(start).width() {
                runs.push((start, i - 1));
                start = i;
            }
        }
        runs
    }
}

impl Quantizer for FpFormat {
    fn bin_count(&self) -> u64 {
        self.k()
    }

    fn bin(&self, index: u64) -> Bin {
        FpFormat::bin(self, index)
    }

    fn bin_index(&self, x: f64) -> Result<u64> {
        Ok(self.index_of(&encode(x, self)?))
    }

    /// One run per exponent-boundary bin and one per block interior, so
    /// about `3 * 2^E` runs instead of `K` bins.
    fn width_runs(&self) -> Vec<(u64, u64)> {
        let half = self.k() / 2;
        let n = self.mantissas_per_exponent();
        let mut pos = Vec::new();
        for b in 0..self.exponent_levels() as u64 {
            let start = b * n;
            pos.push((start, start));
            if n > 1 {
                pos.push((start + 1, start + n - 1));
            }
        }
        let mut runs: Vec<(u64, u64)> = pos.iter().rev().map(|&(a, b)| (half - 1 - b, half - 1 - a)).collect();
        runs.extend(pos.iter().map(|&(a, b)| (half + a, half + b)));
        runs
    }
}

/// Materialized ordered representable values with their midpoint bins.
///
/// `lower[0]` and `upper[K-1]` are the edges of the granular region; every
/// other edge is the midpoint of its two neighbouring values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentableGrid {
    values: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    classes: Vec<BinClass>,
}

/// Largest grid `build_grid` will materialize.
pub const MAX_GRID_LEN: u64 = 1 << 30;

/// Enumerate all representable values of `fmt` in increasing order.
pub fn build_grid(fmt: &FpFormat) -> Result<RepresentableGrid> {
    let k = fmt.k();
    if k > MAX_GRID_LEN {
        return Err(Error::TooManyBins {
            k,
            limit: MAX_GRID_LEN,
        });
    }
    let bins: Vec<Bin> = (0..k).map(|i| fmt.bin(i)).collect();
    Ok(RepresentableGrid {
        values: bins.iter().map(|b| b.value).collect(),
        lower: bins.iter().map(|b| b.lower).collect(),
        upper: bins.iter().map(|b| b.upper).collect(),
        classes: bins.iter().map(|b| b.class).collect(),
    })
}

impl RepresentableGrid {
    /// A midpoint quantizer over arbitrary strictly increasing values. The
    /// outer edges are placed half a neighbouring gap beyond the extreme
    /// values (or at ±0.5 around a single value).
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidFormat("grid needs at least one value".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidFormat("grid values must be finite".into()));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidFormat("grid values must be strictly increasing".into()));
        }
        let k = values.len();
        let mut lower = Vec::with_capacity(k);
        let mut upper = Vec::with_capacity(k);
        for i in 0..k {
            let lo = if i > 0 {
                0.5 * (values[i] + values[i - 1])
            } else if k > 1 {
                values[0] - 0.5 * (values[1] - values[0])
            } else {
                values[0] - 0.5
            };
            let hi = if i + 1 < k {
                0.5 * (values[i + 1] + values[i])
            } else if k > 1 {
                values[k - 1] + 0.5 * (values[k - 1] - values[k - 2])
            } else {
                values[0] + 0.5
            };
            lower.push(lo);
            upper.push(hi);
        }
        Ok(RepresentableGrid {
            classes: vec![BinClass::Generic; k],
            values,
            lower,
            upper,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn lower_bounds(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper_bounds(&self) -> &[f64] {
        &self.upper
    }

    pub fn bins(&self) -> impl Iterator<Item = Bin> + '_ {
        (0..self.len()).map(|i| self.bin_at(i))
    }

    fn bin_at(&self, i: usize) -> Bin {
        Bin {
            value: self.values[i],
            lower: self.lower[i],
            upper: self.upper[i],
            class: self.classes[i],
        }
    }

    /// Nearest-value lookup by binary search over the bin edges. Ties at an
    /// edge go to the larger magnitude, as the encoder does.
    pub fn quantize(&self, x: f64) -> Result<f64> {
        Ok(self.values[self.bin_index(x)? as usize])
    }
}

impl Quantizer for RepresentableGrid {
    fn bin_count(&self) -> u64 {
        self.values.len() as u64
    }

    fn bin(&self, index: u64) -> Bin {
        self.bin_at(index as usize)
    }

    fn bin_index(&self, x: f64) -> Result<u64> {
        if !x.is_finite() {
            return Err(Error::NonFinite(x));
        }
        let k = self.values.len();
        // upper[i] are the interior edges for i < k-1
        let edges = &self.upper[..k - 1];
        let i = if x >= 0.0 {
            // first edge strictly greater than x
            edges.partition_point(|&e| e <= x)
        } else {
            // first edge >= x
            edges.partition_point(|&e| e < x)
        };
        Ok(i as u64)
    }
}
