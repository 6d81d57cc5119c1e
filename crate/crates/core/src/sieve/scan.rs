//! Short-interval scans and dyadic densities of E_k numbers.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ek::{ranges_match, EkConstraint};
use super::{base_primes, light_segment, profile_segment, SieveError, SEGMENT};

/// Largest `X` accepted by [`scan_intervals`]; the indicator bitset covers
/// `[1, 2X + h]`.
pub const MAX_SCAN_X: u64 = 1_000_000_000;

pub const H_RULE: &str = "h = ceil(ln(x)^c)";

/// Which interval starts to examine, as offsets `j ∈ [0, X)` from the start
/// of each convention's range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Sample {
    All,
    Stride { step: u64 },
    Random { n: u64, seed: u64 },
}

impl fmt::Display for Sample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sample::All => f.write_str("all"),
            Sample::Stride { step } => write!(f, "stride:{step}"),
            Sample::Random { n, seed } => write!(f, "random:{n}:{seed}"),
        }
    }
}

impl FromStr for Sample {
    type Err = SieveError;

    /// `all`, `stride:S` or `random:N:SEED`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SieveError::Invalid(format!("cannot parse sample {s:?} (all | stride:S | random:N:SEED)"));
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["all"] => Ok(Sample::All),
            ["stride", step] => {
                let step: u64 = step.parse().map_err(|_| bad())?;
                if step == 0 {
                    return Err(bad());
                }
                Ok(Sample::Stride { step })
            }
            ["random", n, seed] => {
                Ok(Sample::Random { n: n.parse().map_err(|_| bad())?, seed: seed.parse().map_err(|_| bad())? })
            }
            _ => Err(bad()),
        }
    }
}

impl Sample {
    fn offsets(&self, x_max: u64) -> Vec<u64> {
        match *self {
            Sample::All => (0..x_max).collect(),
            Sample::Stride { step } => (0..x_max).step_by(step.max(1) as usize).collect(),
            Sample::Random { n, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..n).map(|_| rng.gen_range(0..x_max)).collect()
            }
        }
    }
}

/// Exceptional-set statistics for one normalization of the interval starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConventionStats {
    pub x_lo: u64,
    pub x_hi: u64,
    pub x_sampled: u64,
    pub exceptional: u64,
    pub exceptional_fraction: f64,
    /// `(count of E_k in [x, x+h], number of sampled x)`.
    pub histogram: Vec<(u64, u64)>,
}

/// Scan of `[x, x + ⌈(log x)^c⌉]` for E_k members.
///
/// The top-level statistics use starts `x ∈ [1, X]`; `dyadic` repeats the
/// scan over `x ∈ [X, 2X)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    #[serde(rename = "X")]
    pub x_max: u64,
    pub c: f64,
    pub k: u32,
    pub constraint: EkConstraint,
    pub h_rule: String,
    pub sample: Sample,
    pub x_sampled: u64,
    pub exceptional: u64,
    pub exceptional_fraction: f64,
    pub histogram: Vec<(u64, u64)>,
    pub dyadic: ConventionStats,
    pub degenerate: bool,
    pub warnings: Vec<String>,
}

/// `⌈(ln x)^c⌉` (0 for `x = 1`).
pub fn interval_length(x: u64, c: f64) -> u64 {
    (x as f64).ln().powf(c).ceil() as u64
}

/// E_k indicator as a bitset over `[0, n_max]` with a rank directory.
struct RankBits {
    words: Vec<u64>,
    /// Number of set bits in `words[..w]`.
    prefix: Vec<u64>,
}

impl RankBits {
    fn build(n_max: u64, c: &EkConstraint) -> Self {
        let primes = base_primes(n_max);
        let seg_count = n_max / SEGMENT + 1;
        let chunks: Vec<Vec<u64>> = (0..seg_count)
            .into_par_iter()
            .map(|s| {
                let a = s * SEGMENT;
                let b = n_max.min(a + SEGMENT - 1);
                let mut words = vec![0u64; ((b - a) / 64 + 1) as usize];
                let lo = a.max(2);
                if lo <= b {
                    for (n, hit) in ek_flags(lo, b, c, &primes) {
                        if hit {
                            let off = n - a;
                            words[(off / 64) as usize] |= 1 << (off % 64);
                        }
                    }
                }
                words
            })
            .collect();
        let words: Vec<u64> = chunks.into_iter().flatten().collect();
        let mut prefix = Vec::with_capacity(words.len() + 1);
        let mut acc = 0u64;
        for w in &words {
            prefix.push(acc);
            acc += w.count_ones() as u64;
        }
        prefix.push(acc);
        Self { words, prefix }
    }

    /// Number of members in `[0, n]`.
    fn rank(&self, n: u64) -> u64 {
        let w = (n / 64) as usize;
        let bit = n % 64;
        let mask = if bit == 63 { u64::MAX } else { (1u64 << (bit + 1)) - 1 };
        self.prefix[w] + (self.words[w] & mask).count_ones() as u64
    }

    fn count(&self, lo: u64, hi: u64) -> u64 {
        self.rank(hi) - if lo == 0 { 0 } else { self.rank(lo - 1) }
    }
}

/// `(n, is E_k)` for every `n` in `[lo, hi]`, `lo ≥ 2`.
fn ek_flags(lo: u64, hi: u64, c: &EkConstraint, primes: &[u64]) -> Vec<(u64, bool)> {
    if c.ranges.is_empty() {
        let (nu, big) = light_segment(lo, hi, primes);
        let k = c.k as u8;
        (lo..=hi).zip(nu.into_iter().zip(big)).map(|(n, (v, b))| (n, v == k && b == k)).collect()
    } else {
        profile_segment(lo, hi, primes)
            .into_iter()
            .map(|p| {
                let hit = p.squarefree
                    && p.omega_distinct == c.k
                    && ranges_match(p.factors.iter().map(|&(q, _)| q), &c.ranges);
                (p.n, hit)
            })
            .collect()
    }
}

fn validate_scan(x_max: u64, c: f64, constraint: &EkConstraint) -> Result<(), SieveError> {
    if x_max < 1000 {
        return Err(SieveError::Invalid(format!("X must be at least 1000 (got {x_max})")));
    }
    if x_max > MAX_SCAN_X {
        return Err(SieveError::TooLarge { what: "X", value: x_max, max: MAX_SCAN_X });
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(SieveError::Invalid(format!("c must be positive (got {c})")));
    }
    constraint.validate()
}

fn stats(
    bits: &RankBits,
    base: u64,
    offsets: &[u64],
    c: f64,
    x_max: u64,
    mut on_row: impl FnMut(u64, u64, u64),
) -> ConventionStats {
    let mut hist: BTreeMap<u64, u64> = BTreeMap::new();
    let mut exceptional = 0;
    for &j in offsets {
        let x = base + j;
        let h = interval_length(x, c);
        let count = bits.count(x, x + h);
        on_row(x, h, count);
        if count == 0 {
            exceptional += 1;
        }
        *hist.entry(count).or_default() += 1;
    }
    let sampled = offsets.len() as u64;
    ConventionStats {
        x_lo: base,
        x_hi: base + x_max - 1,
        x_sampled: sampled,
        exceptional,
        exceptional_fraction: if sampled == 0 { 0.0 } else { exceptional as f64 / sampled as f64 },
        histogram: hist.into_iter().collect(),
    }
}

/// Counts E_k members of `[x, x + h(x)]`, `h(x) = ⌈(ln x)^c⌉`, for the
/// sampled starts `x ∈ [1, X]` (and `x ∈ [X, 2X)` for the `dyadic` block).
pub fn scan_intervals(
    x_max: u64,
    c: f64,
    constraint: &EkConstraint,
    sample: &Sample,
) -> Result<ScanReport, SieveError> {
    scan_intervals_with(x_max, c, constraint, sample, |_, _, _| {})
}

/// As [`scan_intervals`], calling `on_row(x, h, count)` for every sampled
/// start of the `[1, X]` convention, in sampling order.
pub fn scan_intervals_with(
    x_max: u64,
    c: f64,
    constraint: &EkConstraint,
    sample: &Sample,
    on_row: impl FnMut(u64, u64, u64),
) -> Result<ScanReport, SieveError> {
    validate_scan(x_max, c, constraint)?;
    if let Sample::Stride { step: 0 } = sample {
        return Err(SieveError::Invalid("stride must be positive".into()));
    }
    let last = 2 * x_max - 1;
    let n_max = last + interval_length(last, c);
    let mut warnings = Vec::new();
    let degenerate = constraint.largest_range_lo().is_some_and(|lo| lo > n_max);
    if degenerate {
        warnings.push(format!(
            "constraint ranges lie beyond the scanned range [1, {n_max}]; every interval is exceptional"
        ));
    }
    let bits = RankBits::build(n_max, constraint);
    let offsets = sample.offsets(x_max);
    let primary = stats(&bits, 1, &offsets, c, x_max, on_row);
    let dyadic = stats(&bits, x_max, &offsets, c, x_max, |_, _, _| {});
    Ok(ScanReport {
        x_max,
        c,
        k: constraint.k,
        constraint: constraint.clone(),
        h_rule: H_RULE.to_string(),
        sample: sample.clone(),
        x_sampled: primary.x_sampled,
        exceptional: primary.exceptional,
        exceptional_fraction: primary.exceptional_fraction,
        histogram: primary.histogram,
        dyadic,
        degenerate,
        warnings,
    })
}

/// `#{n ∈ [X, 2X) : n is E_k under the constraint} / X`.
pub fn dyadic_density(x_max: u64, constraint: &EkConstraint) -> Result<f64, SieveError> {
    if x_max < 1000 {
        return Err(SieveError::Invalid(format!("X must be at least 1000 (got {x_max})")));
    }
    if x_max > MAX_SCAN_X {
        return Err(SieveError::TooLarge { what: "X", value: x_max, max: MAX_SCAN_X });
    }
    constraint.validate()?;
    let hi = 2 * x_max - 1;
    let primes = base_primes(hi);
    let counts: Vec<u64> = super::segments(x_max, hi)
        .into_par_iter()
        .map(|(a, b)| ek_flags(a, b, constraint, &primes).iter().filter(|f| f.1).count() as u64)
        .collect();
    Ok(counts.iter().sum::<u64>() as f64 / x_max as f64)
}
