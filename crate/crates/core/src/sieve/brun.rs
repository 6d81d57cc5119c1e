//! Brun's pure sieve: truncated Möbius weights and the sandwich check.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{primes_up_to, SieveError};

pub const MAX_W: u64 = 100;
pub const MAX_R: u32 = 8;
pub const MAX_SPAN: u64 = 10_000_000;
/// Violations listed individually in a [`SandwichReport`]; the rest are only counted.
pub const MAX_LISTED: usize = 100;

/// `λ⁺_d = μ(d)` for `d | P(w)`, `ν(d) ≤ R`; `λ⁻_d` likewise with `R + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrunWeights {
    pub w: u64,
    #[serde(rename = "R")]
    pub r: u32,
    /// Primes below `w`.
    pub primes: Vec<u64>,
    #[serde(with = "pairs")]
    pub plus: BTreeMap<u64, i8>,
    #[serde(with = "pairs")]
    pub minus: BTreeMap<u64, i8>,
}

mod pairs {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<u64, i8>, s: S) -> Result<S::Ok, S::Error> {
        m.iter().map(|(&d, &mu)| (d, mu)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<u64, i8>, D::Error> {
        Ok(Vec::<(u64, i8)>::deserialize(d)?.into_iter().collect())
    }
}

pub fn brun_weights(w: u64, r: u32) -> Result<BrunWeights, SieveError> {
    if w > MAX_W {
        return Err(SieveError::TooLarge { what: "w", value: w, max: MAX_W });
    }
    if r > MAX_R {
        return Err(SieveError::TooLarge { what: "R", value: r as u64, max: MAX_R as u64 });
    }
    let primes: Vec<u64> = primes_up_to(w.saturating_sub(1));
    let mut plus = BTreeMap::new();
    let mut minus = BTreeMap::new();
    // Depth-first over subsets of the primes, at most R + 1 deep.
    fn walk(
        primes: &[u64],
        start: usize,
        d: u64,
        size: u32,
        r: u32,
        plus: &mut BTreeMap<u64, i8>,
        minus: &mut BTreeMap<u64, i8>,
    ) {
        let mu = if size % 2 == 0 { 1 } else { -1 };
        if size <= r {
            plus.insert(d, mu);
        }
        minus.insert(d, mu);
        if size == r + 1 {
            return;
        }
        for i in start..primes.len() {
            walk(primes, i + 1, d * primes[i], size + 1, r, plus, minus);
        }
    }
    walk(&primes, 0, 1, 0, r, &mut plus, &mut minus);
    Ok(BrunWeights { w, r, primes, plus, minus })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub n: u64,
    pub theta_minus: i64,
    pub indicator: u8,
    pub theta_plus: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub w: u64,
    #[serde(rename = "R")]
    pub r: u32,
    pub n_lo: u64,
    pub n_hi: u64,
    pub checked: u64,
    pub violation_count: u64,
    /// The first [`MAX_LISTED`] violations in increasing `n`.
    pub violations: Vec<Violation>,
    pub ok: bool,
}

/// `(θ⁻_n, θ⁺_n)` by summing the stored weights over the divisors of `n`
/// that divide `P(w)`.
fn thetas(n: u64, weights: &BrunWeights) -> (i64, i64, u8) {
    let small: Vec<u64> = weights.primes.iter().copied().filter(|&p| n % p == 0).collect();
    let depth = (weights.r + 1).min(small.len() as u32);
    let (mut lo, mut hi) = (0i64, 0i64);
    fn walk(small: &[u64], start: usize, d: u64, left: u32, w: &BrunWeights, lo: &mut i64, hi: &mut i64) {
        *lo += *w.minus.get(&d).unwrap_or(&0) as i64;
        *hi += *w.plus.get(&d).unwrap_or(&0) as i64;
        if left == 0 {
            return;
        }
        for i in start..small.len() {
            walk(small, i + 1, d * small[i], left - 1, w, lo, hi);
        }
    }
    walk(&small, 0, 1, depth, weights, &mut lo, &mut hi);
    (lo, hi, small.is_empty() as u8)
}

/// Checks `θ⁻_n ≤ 1_{(n, P(w)) = 1} ≤ θ⁺_n` for every `n ∈ [n_lo, n_hi]`.
pub fn theta_sandwich(n_lo: u64, n_hi: u64, weights: &BrunWeights) -> Result<SandwichReport, SieveError> {
    if n_lo == 0 || n_lo > n_hi {
        return Err(SieveError::EmptyRange { lo: n_lo, hi: n_hi });
    }
    if n_hi - n_lo > MAX_SPAN {
        return Err(SieveError::TooLarge { what: "n_hi - n_lo", value: n_hi - n_lo, max: MAX_SPAN });
    }
    const CHUNK: u64 = 1 << 16;
    let chunks: Vec<(u64, Vec<Violation>)> = (n_lo..=n_hi)
        .step_by(CHUNK as usize)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|a| {
            let b = n_hi.min(a + CHUNK - 1);
            let mut count = 0;
            let mut listed = Vec::new();
            for n in a..=b {
                let (lo, hi, ind) = thetas(n, weights);
                if lo > ind as i64 || hi < ind as i64 {
                    count += 1;
                    if listed.len() < MAX_LISTED {
                        listed.push(Violation { n, theta_minus: lo, indicator: ind, theta_plus: hi });
                    }
                }
            }
            (count, listed)
        })
        .collect();
    let violation_count = chunks.iter().map(|c| c.0).sum();
    let violations: Vec<Violation> = chunks.into_iter().flat_map(|c| c.1).take(MAX_LISTED).collect();
    Ok(SandwichReport {
        w: weights.w,
        r: weights.r,
        n_lo,
        n_hi,
        checked: n_hi - n_lo + 1,
        violation_count,
        violations,
        ok: violation_count == 0,
    })
}
