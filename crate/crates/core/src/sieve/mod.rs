//! Segmented factorization sieve and the empirical side of the toolkit:
//! E_k membership, short-interval scans, dyadic densities, Brun pure-sieve
//! weights and `π_ℓ(x)`.
//!
//! Each segment `[lo, hi]` starts from `rem[n] = n` and divides out every
//! base prime `p ≤ √hi` at its multiples; whatever cofactor survives is a
//! single prime above `√hi`. Segments are independent, so the counting
//! routines process them in parallel and reduce in segment order.

mod brun;
mod ek;
mod scan;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use brun::{brun_weights, theta_sandwich, BrunWeights, SandwichReport, Violation};
pub use ek::{is_ek, ladder_ranges, p1_range, EkConstraint};
pub use scan::{dyadic_density, scan_intervals, scan_intervals_with, ConventionStats, Sample, ScanReport};

/// Default number of integers per segment.
pub const SEGMENT: u64 = 1 << 22;

/// Largest `hi` accepted: base primes up to `√hi` must fit comfortably in
/// memory.
pub const MAX_HI: u64 = 1 << 52;

/// Largest argument accepted by [`pi_ell`].
pub const PI_ELL_MAX: u64 = 1_000_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SieveError {
    #[error("empty range: hi = {hi} < lo = {lo}")]
    EmptyRange { lo: u64, hi: u64 },
    #[error("range must start at 2 or above (got lo = {0})")]
    BelowTwo(u64),
    #[error("range [{lo}, {hi}] exceeds the memory budget of {budget} integers per segment; split it")]
    MemoryBudget { lo: u64, hi: u64, budget: u64 },
    #[error("{what} = {value} exceeds the supported maximum {max}")]
    TooLarge { what: &'static str, value: u64, max: u64 },
    #[error("invalid parameter: {0}")]
    Invalid(String),
}

/// Full factorization of `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorProfile {
    pub n: u64,
    /// `ν(n)`, the number of distinct prime factors.
    pub omega_distinct: u32,
    /// `Ω(n)`, the number of prime factors with multiplicity.
    pub big_omega: u32,
    pub squarefree: bool,
    /// `(prime, multiplicity)` in increasing order of the prime.
    pub factors: Vec<(u64, u32)>,
}

impl FactorProfile {
    fn from_factors(n: u64, factors: Vec<(u64, u32)>) -> Self {
        let omega_distinct = factors.len() as u32;
        let big_omega = factors.iter().map(|&(_, e)| e).sum();
        Self { n, omega_distinct, big_omega, squarefree: omega_distinct == big_omega, factors }
    }
}

/// Primes `≤ limit` by the sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Base primes for sieving ranges up to `hi`.
fn base_primes(hi: u64) -> Vec<u64> {
    primes_up_to(isqrt(hi))
}

fn first_multiple(p: u64, lo: u64) -> u64 {
    lo.div_ceil(p) * p
}

/// Full factorizations of every `n` in one segment `[lo, hi]`.
fn profile_segment(lo: u64, hi: u64, primes: &[u64]) -> Vec<FactorProfile> {
    let len = (hi - lo + 1) as usize;
    let mut rem: Vec<u64> = (lo..=hi).collect();
    let mut factors: Vec<Vec<(u64, u32)>> = vec![Vec::new(); len];
    for &p in primes {
        if p * p > hi {
            break;
        }
        let mut m = first_multiple(p, lo);
        while m <= hi {
            let i = (m - lo) as usize;
            let mut e = 0;
            while rem[i] % p == 0 {
                rem[i] /= p;
                e += 1;
            }
            factors[i].push((p, e));
            m += p;
        }
    }
    rem.into_iter()
        .zip(factors)
        .enumerate()
        .map(|(i, (r, mut f))| {
            if r > 1 {
                f.push((r, 1));
            }
            FactorProfile::from_factors(lo + i as u64, f)
        })
        .collect()
}

/// `(ν(n), Ω(n))` for every `n` in one segment, without storing factors.
pub(crate) fn light_segment(lo: u64, hi: u64, primes: &[u64]) -> (Vec<u8>, Vec<u8>) {
    let len = (hi - lo + 1) as usize;
    let mut rem: Vec<u64> = (lo..=hi).collect();
    let mut nu = vec![0u8; len];
    let mut big = vec![0u8; len];
    for &p in primes {
        if p * p > hi {
            break;
        }
        let mut m = first_multiple(p, lo);
        while m <= hi {
            let i = (m - lo) as usize;
            nu[i] += 1;
            loop {
                rem[i] /= p;
                big[i] += 1;
                if rem[i] % p != 0 {
                    break;
                }
            }
            m += p;
        }
    }
    for i in 0..len {
        if rem[i] > 1 {
            nu[i] += 1;
            big[i] += 1;
        }
    }
    (nu, big)
}

fn check_range(lo: u64, hi: u64) -> Result<(), SieveError> {
    if lo < 2 {
        return Err(SieveError::BelowTwo(lo));
    }
    if hi < lo {
        return Err(SieveError::EmptyRange { lo, hi });
    }
    if hi > MAX_HI {
        return Err(SieveError::TooLarge { what: "hi", value: hi, max: MAX_HI });
    }
    Ok(())
}

/// Factorizations of `[lo, hi]` as one segment. Fails if the range is
/// wider than [`SEGMENT`]; use [`sieve_profiles`] for longer ranges.
pub fn sieve_segment(lo: u64, hi: u64) -> Result<Vec<FactorProfile>, SieveError> {
    check_range(lo, hi)?;
    if hi - lo >= SEGMENT {
        return Err(SieveError::MemoryBudget { lo, hi, budget: SEGMENT });
    }
    Ok(profile_segment(lo, hi, &base_primes(hi)))
}

/// Streams the factorizations of `[lo, hi]` in increasing order, sieving
/// one segment at a time.
pub fn sieve_profiles(lo: u64, hi: u64) -> Result<ProfileStream, SieveError> {
    check_range(lo, hi)?;
    Ok(ProfileStream { next_lo: lo, hi, primes: base_primes(hi), buffer: Vec::new().into_iter(), done: false })
}

pub struct ProfileStream {
    next_lo: u64,
    hi: u64,
    primes: Vec<u64>,
    buffer: std::vec::IntoIter<FactorProfile>,
    done: bool,
}

impl Iterator for ProfileStream {
    type Item = FactorProfile;

    fn next(&mut self) -> Option<FactorProfile> {
        loop {
            if let Some(p) = self.buffer.next() {
                return Some(p);
            }
            if self.done {
                return None;
            }
            let lo = self.next_lo;
            let hi = self.hi.min(lo.saturating_add(SEGMENT - 1));
            self.buffer = profile_segment(lo, hi, &self.primes).into_iter();
            if hi == self.hi {
                self.done = true;
            } else {
                self.next_lo = hi + 1;
            }
        }
    }
}

/// Segment boundaries covering `[lo, hi]`.
pub(crate) fn segments(lo: u64, hi: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut a = lo;
    loop {
        let b = hi.min(a.saturating_add(SEGMENT - 1));
        out.push((a, b));
        if b == hi {
            return out;
        }
        a = b + 1;
    }
}

/// `π_ℓ(x) = #{2 ≤ n ≤ x : ν(n) = ℓ}`. Prime powers count towards `ℓ = 1`.
pub fn pi_ell(x: u64, ell: u32) -> Result<u64, SieveError> {
    if ell == 0 {
        return Err(SieveError::Invalid("ell must be at least 1".into()));
    }
    let table = pi_ell_table(x)?;
    Ok(table.get(ell as usize).copied().unwrap_or(0))
}

/// `[π_0(x), π_1(x), …]` up to the largest `ℓ` that occurs (`π_0` counts
/// nothing: `n = 1` is excluded).
pub fn pi_ell_table(x: u64) -> Result<Vec<u64>, SieveError> {
    if x > PI_ELL_MAX {
        return Err(SieveError::TooLarge { what: "x", value: x, max: PI_ELL_MAX });
    }
    if x < 2 {
        return Ok(vec![0]);
    }
    let primes = base_primes(x);
    let per_segment: Vec<[u64; 16]> = segments(2, x)
        .into_par_iter()
        .map(|(lo, hi)| {
            let (nu, _) = light_segment(lo, hi, &primes);
            let mut counts = [0u64; 16];
            for v in nu {
                counts[v as usize] += 1;
            }
            counts
        })
        .collect();
    let mut total = [0u64; 16];
    for c in &per_segment {
        for (t, v) in total.iter_mut().zip(c) {
            *t += v;
        }
    }
    let last = total.iter().rposition(|&v| v > 0).unwrap_or(0);
    Ok(total[..=last].to_vec())
}
