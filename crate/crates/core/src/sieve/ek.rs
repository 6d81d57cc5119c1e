//! E_k membership with optional prime-size ranges.

use serde::{Deserialize, Serialize};

use super::{FactorProfile, SieveError};

/// "Squarefree with exactly `k` prime factors, `k − 1` of which lie in the
/// given ranges". Fewer ranges leave the remaining factors unconstrained.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EkConstraint {
    pub k: u32,
    /// Inclusive `(P_lo, P_hi)` ranges for distinct prime factors.
    pub ranges: Vec<(u64, u64)>,
    pub distinct: bool,
}

impl EkConstraint {
    pub fn unconstrained(k: u32) -> Self {
        Self { k, ranges: Vec::new(), distinct: true }
    }

    pub fn with_ranges(k: u32, ranges: Vec<(u64, u64)>) -> Result<Self, SieveError> {
        let c = Self { k, ranges, distinct: true };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), SieveError> {
        if self.k == 0 {
            return Err(SieveError::Invalid("k must be at least 1".into()));
        }
        if self.ranges.len() >= self.k as usize && !self.ranges.is_empty() {
            return Err(SieveError::Invalid(format!(
                "at most k - 1 = {} ranges allowed, got {}",
                self.k - 1,
                self.ranges.len()
            )));
        }
        if let Some(&(lo, hi)) = self.ranges.iter().find(|(lo, hi)| lo > hi) {
            return Err(SieveError::Invalid(format!("range ({lo}, {hi}) is empty")));
        }
        if !self.distinct {
            return Err(SieveError::Invalid("only distinct prime factors are supported".into()));
        }
        Ok(())
    }

    /// Largest lower end among the ranges; no integer below it can satisfy
    /// the constraint.
    pub fn largest_range_lo(&self) -> Option<u64> {
        self.ranges.iter().map(|r| r.0).max()
    }
}

/// True iff `n` is squarefree with `ν(n) = Ω(n) = k` and the ranges can be
/// matched to distinct prime factors. Ranges are assigned greedily, in
/// increasing order of their lower ends, to the smallest unused factor that
/// fits; this is exact for disjoint ascending ranges.
pub fn is_ek(profile: &FactorProfile, c: &EkConstraint) -> bool {
    if !profile.squarefree || profile.omega_distinct != c.k || profile.big_omega != c.k {
        return false;
    }
    ranges_match(profile.factors.iter().map(|&(p, _)| p), &c.ranges)
}

pub(crate) fn ranges_match(primes: impl Iterator<Item = u64>, ranges: &[(u64, u64)]) -> bool {
    if ranges.is_empty() {
        return true;
    }
    let mut sorted = ranges.to_vec();
    sorted.sort_unstable();
    let mut primes = primes.peekable();
    for (lo, hi) in sorted {
        while primes.next_if(|&p| p < lo).is_some() {}
        match primes.next() {
            Some(p) if p <= hi => {}
            _ => return false,
        }
    }
    true
}

fn to_int(x: f64) -> u64 {
    if x.is_finite() {
        x as u64
    } else {
        u64::MAX
    }
}

/// Integer ranges `[⌈P_i⌉, ⌊P_i^{1+ε}⌋]`, `i = 1..k−1`, for the ladder
/// `P_{k−1} = (log X)^{ε⁻²}`, `P_{k−2} = (log log X)^{6+10√ε}`,
/// `P_j = (log P_{j+1})^{ε⁻¹}`. Values saturate at `u64::MAX`; at desk
/// scale the ranges are typically empty or astronomically large.
pub fn ladder_ranges(x: u64, eps: f64, k: u32) -> Result<Vec<(u64, u64)>, SieveError> {
    if k < 3 || !(eps > 0.0 && eps < 1.0) || x < 16 {
        return Err(SieveError::Invalid("need k >= 3, 0 < eps < 1 and X >= 16".into()));
    }
    let lx = (x as f64).ln();
    let k = k as usize;
    let mut p = vec![0.0_f64; k];
    p[k - 1] = lx.powf(eps.powi(-2));
    p[k - 2] = lx.ln().powf(6.0 + 10.0 * eps.sqrt());
    for j in (1..k - 2).rev() {
        p[j] = p[j + 1].ln().powf(1.0 / eps);
    }
    Ok((1..k).map(|i| (to_int(p[i].ceil()), to_int(p[i].powf(1.0 + eps).floor()))).collect())
}

/// `(P₁, P₁^{1+ε})` with `P₁ = (log X)^a`, as integers, together with the
/// smallest admissible interval length `h = P₁ log X`.
pub fn p1_range(x: u64, a: f64, eps: f64) -> Result<((u64, u64), u64), SieveError> {
    if !(eps > 0.0 && a > 0.0) || x < 3 {
        return Err(SieveError::Invalid("need a > 0, eps > 0 and X >= 3".into()));
    }
    let lx = (x as f64).ln();
    let p1 = lx.powf(a);
    Ok(((to_int(p1.ceil()), to_int(p1.powf(1.0 + eps).floor())), to_int((p1 * lx).ceil())))
}
