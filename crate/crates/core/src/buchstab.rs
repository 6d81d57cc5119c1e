//! Buchstab's function `ω(u)`.
//!
//! `ω` is `1/u` on `[1, 2]` and continues through `(u ω(u))' = ω(u − 1)`,
//! with `ω(u) = 0` for `u < 1`. On `[1, 3]` it has closed forms. Above 3 the
//! certified integrals use the constant cap `(1 + log 2)/3`, which dominates
//! `ω` there; [`omega_dde`] integrates the delay equation numerically and
//! serves as a cross-check only.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

/// `(1 + log 2)/3`, the value of `ω(3)` and the cap used for `u > 3`.
pub fn cap() -> f64 {
    (1.0 + std::f64::consts::LN_2) / 3.0
}

/// Relative outward inflation applied to every certified bound.
pub const INFLATION: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BuchstabError {
    #[error("closed form of omega exists only for u <= 3 (got u = {0}); use omega_upper or omega_dde")]
    Domain(f64),
    #[error("argument must be finite (got {0})")]
    NonFinite(f64),
    #[error("DDE step must lie in (0, 1e-3] (got {0})")]
    InvalidStep(f64),
    #[error("DDE range must satisfy u_max >= 1 (got {0})")]
    InvalidRange(f64),
}

/// Enclosure `[lo, hi]` of the values of `omega_upper` on an argument set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuchstabBound {
    pub lo: f64,
    pub hi: f64,
}

/// `ω(u)` from its closed forms, valid for `u <= 3`.
pub fn omega_exact(u: f64) -> Result<f64, BuchstabError> {
    if !u.is_finite() {
        return Err(BuchstabError::NonFinite(u));
    }
    if u > 3.0 {
        return Err(BuchstabError::Domain(u));
    }
    Ok(closed_form(u))
}

#[inline]
fn closed_form(u: f64) -> f64 {
    if u < 1.0 {
        0.0
    } else if u <= 2.0 {
        1.0 / u
    } else {
        (1.0 + (u - 1.0).ln()) / u
    }
}

#[inline]
fn log_branch(u: f64) -> f64 {
    (1.0 + (u - 1.0).ln()) / u
}

/// Piecewise upper approximant `ω̄(u)`: the closed forms up to 3, then the
/// constant `(1 + log 2)/3`. Equal to `ω` for `u <= 3`.
#[inline]
pub fn omega_upper(u: f64) -> f64 {
    if u > 3.0 {
        cap()
    } else {
        closed_form(u)
    }
}

/// Location and value of the maximum of `(1 + log(u − 1))/u` on `[2, 3]`.
///
/// The derivative has the sign of `u/(u − 1) − (1 + log(u − 1))`, which is
/// positive at 2 and negative at 3 and changes sign once; 200 bisection
/// steps collapse the bracket to adjacent doubles.
pub fn log_branch_peak() -> (f64, f64) {
    static PEAK: OnceLock<(f64, f64)> = OnceLock::new();
    *PEAK.get_or_init(|| {
        let sign = |u: f64| u / (u - 1.0) - (1.0 + (u - 1.0).ln());
        let (mut lo, mut hi) = (2.0_f64, 3.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if sign(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let value = log_branch(lo).max(log_branch(hi));
        (0.5 * (lo + hi), value)
    })
}

/// Certified enclosure of `omega_upper` over `[a, b]`.
///
/// The interval is split at the branch points 1, 2 and 3. On `[1, 2]` the
/// branch decreases, on `[2, 3]` it is unimodal with its peak at
/// [`log_branch_peak`], and above 3 it is constant. `hi` is inflated and
/// `lo` deflated by a relative `1e-12`.
pub fn omega_sup(a: f64, b: f64) -> BuchstabBound {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    let mut hi = 0.0_f64;
    let mut lo = f64::INFINITY;

    if a < 1.0 {
        lo = 0.0;
    }
    let (s, e) = (a.max(1.0), b.min(2.0));
    if s <= e {
        hi = hi.max(1.0 / s);
        lo = lo.min(1.0 / e);
    }
    let (s, e) = (a.max(2.0), b.min(3.0));
    if s <= e {
        let (fs, fe) = (log_branch(s), log_branch(e));
        hi = hi.max(fs).max(fe);
        let (peak_at, peak) = log_branch_peak();
        if s <= peak_at && peak_at <= e {
            hi = hi.max(peak);
        }
        lo = lo.min(fs).min(fe);
    }
    if b > 3.0 {
        hi = hi.max(cap());
        lo = lo.min(cap());
    }
    if !lo.is_finite() {
        lo = 0.0;
    }
    BuchstabBound { lo: (lo * (1.0 - INFLATION)).max(0.0), hi: hi * (1.0 + INFLATION) }
}

/// Integrates the delay equation on the grid `u = 1 + i·step`.
///
/// `[1, 2]` is seeded with `1/u`; beyond 2 the integral form
/// `u ω(u) = 1 + ∫_2^u ω(t − 1) dt` is advanced by the trapezoid rule, with
/// the delayed value read off the grid by linear interpolation. The last
/// grid point is the first one `>= u_max`.
pub fn omega_dde(u_max: f64, step: f64) -> Result<Vec<(f64, f64)>, BuchstabError> {
    if !step.is_finite() || step <= 0.0 || step > 1e-3 {
        return Err(BuchstabError::InvalidStep(step));
    }
    if !u_max.is_finite() {
        return Err(BuchstabError::NonFinite(u_max));
    }
    if u_max < 1.0 {
        return Err(BuchstabError::InvalidRange(u_max));
    }
    let n = ((u_max - 1.0) / step - 1e-9).ceil().max(0.0) as usize;
    let mut grid: Vec<(f64, f64)> = Vec::with_capacity(n + 1);
    let mut integral = 0.0_f64;
    let mut prev_t = 2.0_f64;
    let mut prev_g = 1.0_f64; // ω(1)
    for i in 0..=n {
        let u = 1.0 + i as f64 * step;
        if u <= 2.0 + 1e-12 {
            grid.push((u, 1.0 / u));
            continue;
        }
        let g = interpolate(&grid, u - 1.0);
        integral += 0.5 * (u - prev_t) * (prev_g + g);
        prev_t = u;
        prev_g = g;
        grid.push((u, (1.0 + integral) / u));
    }
    Ok(grid)
}

/// Linear interpolation in a table produced by [`omega_dde`]; clamps to the
/// table ends and returns 0 below `u = 1`.
pub fn interpolate(table: &[(f64, f64)], u: f64) -> f64 {
    let Some(&(u0, _)) = table.first() else {
        return f64::NAN;
    };
    if u < u0 {
        return 0.0;
    }
    if table.len() == 1 {
        return table[0].1;
    }
    let step = table[1].0 - table[0].0;
    let pos = (u - u0) / step;
    let j = pos.floor() as usize;
    if j + 1 >= table.len() {
        return table[table.len() - 1].1;
    }
    let f = pos - j as f64;
    table[j].1 * (1.0 - f) + table[j + 1].1 * f
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Euler–Mascheroni constant; e^{-γ} is the limit of ω at infinity.
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

    #[test]
    fn closed_form_examples() {
        assert_eq!(omega_exact(1.5).unwrap(), 2.0 / 3.0);
        assert_eq!(omega_exact(2.0).unwrap(), 0.5);
        assert_eq!(omega_exact(0.7).unwrap(), 0.0);
        // (1 + log 1.5)/2.5 = 0.5621860432... from a 30-digit evaluation.
        assert!((omega_exact(2.5).unwrap() - 0.562_186_043_243_265_9).abs() < 1e-15);
    }

    #[test]
    fn closed_form_rejects_above_three() {
        assert_eq!(omega_exact(3.5), Err(BuchstabError::Domain(3.5)));
        assert!(matches!(omega_exact(f64::NAN), Err(BuchstabError::NonFinite(_))));
        assert!(omega_exact(3.0).is_ok());
    }

    #[test]
    fn upper_approximant_examples() {
        assert_eq!(omega_upper(5.0), cap());
        assert!((cap() - 0.564_382_393_519_981_8).abs() < 1e-15);
        assert_eq!(omega_upper(1.25), 0.8);
        assert!((omega_upper(3.0) - cap()).abs() < 1e-15);
        // The cap sits within 0.003 of the limiting value.
        assert!((cap() - (-EULER_GAMMA).exp()).abs() < 0.003);
    }

    #[test]
    fn upper_matches_exact_on_grid() {
        for i in 0..=10_000 {
            let u = 3.0 * i as f64 / 10_000.0;
            assert_eq!(omega_upper(u), omega_exact(u).unwrap());
        }
    }

    #[test]
    fn continuity_at_two() {
        let d = 1e-6;
        let gap = (omega_exact(2.0 - d).unwrap() - omega_exact(2.0 + d).unwrap()).abs();
        assert!(gap <= 2.0 * d);
    }

    #[test]
    fn upper_is_bounded_by_one() {
        assert_eq!(omega_upper(1.0), 1.0);
        for i in 1..100_000 {
            let u = 1.0 + i as f64 * 1e-4;
            assert!(omega_upper(u) < 1.0);
        }
    }

    #[test]
    fn sup_examples() {
        assert!((omega_sup(1.0, 2.0).hi - 1.0).abs() < 1e-11);
        assert!(omega_sup(1.0, 2.0).hi >= 1.0);
        let capped = omega_sup(3.5, 10.0);
        assert!(capped.hi >= cap() && capped.hi <= cap() + 1e-12);
        assert!(capped.lo <= cap());
        assert_eq!(omega_sup(0.1, 0.9), BuchstabBound { lo: 0.0, hi: 0.0 });
    }

    #[test]
    fn sup_over_log_branch_matches_dense_sampling() {
        // Oracle: 10^6 samples of (1 + log(u − 1))/u on [2, 3].
        let mut best = 0.0_f64;
        for i in 0..=1_000_000 {
            let u = 2.0 + i as f64 / 1_000_000.0;
            best = best.max((1.0 + (u - 1.0).ln()) / u);
        }
        let b = omega_sup(2.0, 3.0);
        assert!(b.hi >= best);
        assert!(b.hi - best < 1e-11);
        assert!((b.hi - 0.5672).abs() < 1e-3);
        let (peak_at, peak) = log_branch_peak();
        // At the peak, 1 + log(u − 1) = u/(u − 1), so the value is 1/(u − 1).
        assert!((peak - 1.0 / (peak_at - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn sup_straddling_the_jump_at_one() {
        let b = omega_sup(0.5, 1.0);
        assert_eq!(b.lo, 0.0);
        assert!(b.hi >= 1.0);
    }

    #[test]
    fn dde_rejects_bad_input() {
        assert!(matches!(omega_dde(3.0, 0.0), Err(BuchstabError::InvalidStep(_))));
        assert!(matches!(omega_dde(3.0, 2e-3), Err(BuchstabError::InvalidStep(_))));
        assert!(matches!(omega_dde(0.5, 1e-4), Err(BuchstabError::InvalidRange(_))));
    }

    #[test]
    fn dde_matches_closed_forms() {
        let table = omega_dde(3.0, 1e-4).unwrap();
        let exact = omega_exact(2.5).unwrap();
        assert!((interpolate(&table, 2.5) - exact).abs() < 1e-3);
        for &(u, w) in &table {
            if u <= 3.0 {
                assert!((w - omega_exact(u).unwrap()).abs() <= 10.0 * 1e-4, "u = {u}");
            }
        }
        let short = omega_dde(2.0, 1e-4).unwrap();
        assert!((short.last().unwrap().1 - 0.5).abs() < 1e-3);
    }

    #[test]
    fn dde_approaches_limit() {
        let table = omega_dde(6.0, 1e-4).unwrap();
        let limit = (-EULER_GAMMA).exp();
        assert!((interpolate(&table, 6.0) - limit).abs() < 0.01);
        for &(u, w) in &table {
            assert!((0.0..=1.0).contains(&w));
            if u > 4.0 {
                assert!((w - limit).abs() < 0.01, "u = {u}, w = {w}");
            }
            if u > 3.0 {
                // The cap really is an upper bound where the DDE is resolved.
                assert!(w <= cap() + 1e-6, "u = {u}, w = {w}");
            }
        }
    }

    proptest! {
        #[test]
        fn sup_dominates_samples(a in -1.0f64..8.0, len in 0.0f64..4.0, seed in 0u64..1000) {
            let b = a + len;
            let bound = omega_sup(a, b);
            prop_assert!(bound.lo <= bound.hi);
            prop_assert!(bound.lo >= 0.0);
            for i in 0..1000u64 {
                let t = ((i * 7919 + seed * 104_729) % 1000) as f64 / 999.0;
                let m = a + t * (b - a);
                let v = omega_upper(m);
                prop_assert!(bound.hi >= v, "m = {}, v = {}, hi = {}", m, v, bound.hi);
                prop_assert!(bound.lo <= v, "m = {}, v = {}, lo = {}", m, v, bound.lo);
            }
        }
    }
}
