//! Exact verification of the type-II exponent inequality.
//!
//! Both sides of `R̄(ν, α₂) ≤ ½ − ν + min{2σ(ν), ν/2}` are built from
//! finitely many lines in `ν`: three per `(k, ℓ)` on the left, three on the
//! right. Between consecutive pairwise crossings of those lines every side
//! is linear, so checking the inequality at all crossings and interval
//! endpoints is exhaustive. All arithmetic is over `BigRational`.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{self, int, ratio, Rational};
use crate::regions::{RegionError, SieveParams};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExponentError {
    #[error("nu = {nu} lies outside [{lo}, {hi}]")]
    NuOutOfRange { nu: String, lo: String, hi: String },
    #[error("invalid Jutila parameters: {0}")]
    InvalidParams(String),
    #[error("k and ell sets must be non-empty")]
    EmptySet,
    #[error("delta must be positive (got {0})")]
    InvalidDelta(String),
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("no admissible a in (2, 4] for these parameters")]
    NoAdmissibleA,
    #[error(transparent)]
    Params(#[from] RegionError),
}

fn check_range(nu: &Rational, lo: Rational, hi: Rational) -> Result<(), ExponentError> {
    if *nu < lo || *nu > hi {
        return Err(ExponentError::NuOutOfRange {
            nu: rational::fmt_rational(nu),
            lo: rational::fmt_rational(&lo),
            hi: rational::fmt_rational(&hi),
        });
    }
    Ok(())
}

/// `σ(ν) = max{0, ν/21 − (1 − ν)/126}`, from the exponent pair
/// `(1/126, 20/21)`. Zero up to the kink at `ν = 1/7`.
pub fn sigma(nu: &Rational) -> Result<Rational, ExponentError> {
    check_range(nu, int(0), int(1))?;
    Ok(sigma_unchecked(nu))
}

fn sigma_unchecked(nu: &Rational) -> Rational {
    let v = (int(7) * nu - int(1)) / int(126);
    if v.is_positive() {
        v
    } else {
        int(0)
    }
}

/// `½ − ν + min{2σ(ν), ν/2}`.
pub fn target_bound(nu: &Rational) -> Result<Rational, ExponentError> {
    check_range(nu, int(0), ratio(1, 2))?;
    Ok(target_unchecked(nu))
}

fn target_unchecked(nu: &Rational) -> Rational {
    let two_sigma = int(2) * sigma_unchecked(nu);
    let half_nu = nu / int(2);
    ratio(1, 2) - nu + rational::min_rat(&two_sigma, &half_nu).clone()
}

/// Arguments of Jutila's large-values exponent. `t_exp` (the exponent of `T`
/// in `X`) is pinned to its worst case 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JutilaParams {
    #[serde(with = "rational::serde_pq")]
    pub nu: Rational,
    #[serde(with = "rational::serde_pq")]
    pub alpha2: Rational,
    pub k: u32,
    pub ell: u32,
    #[serde(with = "rational::serde_pq")]
    pub t_exp: Rational,
}

impl JutilaParams {
    pub fn new(nu: Rational, alpha2: Rational, k: u32, ell: u32) -> Self {
        Self { nu, alpha2, k, ell, t_exp: int(1) }
    }

    pub fn validate(&self) -> Result<(), ExponentError> {
        let bad = |m: &str| Err(ExponentError::InvalidParams(m.to_string()));
        if self.nu.is_negative() || self.nu > ratio(1, 2) {
            return bad("nu must lie in [0, 1/2]");
        }
        if !self.alpha2.is_positive() || self.alpha2 > int(1) {
            return bad("alpha2 must lie in (0, 1]");
        }
        if self.k == 0 || self.ell == 0 {
            return bad("k and ell must be positive");
        }
        if self.t_exp != int(1) {
            return bad("t_exp is fixed at 1");
        }
        Ok(())
    }
}

/// A line `slope·ν + intercept`.
#[derive(Debug, Clone, PartialEq)]
struct Line {
    slope: Rational,
    intercept: Rational,
}

impl Line {
    fn at(&self, nu: &Rational) -> Rational {
        &self.slope * nu + &self.intercept
    }

    fn crossing(&self, other: &Line) -> Option<Rational> {
        let ds = &self.slope - &other.slope;
        if ds.is_zero() {
            None
        } else {
            Some((&other.intercept - &self.intercept) / ds)
        }
    }
}

/// The three linear forms whose maximum is `R(ν, α₂, k, ℓ)`:
/// `2να₂ℓ`, `(6 − 2/k)να₂ℓ + 1 − 2νℓ` and `1 + 8kℓνα₂ − 2kℓν`.
fn jutila_lines(alpha2: &Rational, k: u32, ell: u32) -> [Line; 3] {
    let (k, l) = (int(k as i64), int(ell as i64));
    [
        Line { slope: int(2) * alpha2 * &l, intercept: int(0) },
        Line { slope: (int(6) - int(2) / &k) * alpha2 * &l - int(2) * &l, intercept: int(1) },
        Line { slope: int(8) * &k * &l * alpha2 - int(2) * &k * &l, intercept: int(1) },
    ]
}

/// `½ − ν` plus each of `0`, `(7ν − 1)/63` and `ν/2`.
fn target_lines() -> [Line; 3] {
    [
        Line { slope: int(-1), intercept: ratio(1, 2) },
        Line { slope: int(-1) + ratio(7, 63), intercept: ratio(1, 2) - ratio(1, 63) },
        Line { slope: ratio(-1, 2), intercept: ratio(1, 2) },
    ]
}

fn max_of(lines: &[Line; 3], nu: &Rational) -> Rational {
    lines.iter().map(|l| l.at(nu)).max().expect("three lines")
}

/// `R(ν, α₂, k, ℓ)`, the exponent of `X` in Jutila's large-values bound for
/// the `ℓ`-th moment.
pub fn jutila_r(p: &JutilaParams) -> Result<Rational, ExponentError> {
    p.validate()?;
    Ok(max_of(&jutila_lines(&p.alpha2, p.k, p.ell), &p.nu))
}

/// Index (0, 1 or 2) of the linear form attaining `R`; the first on ties.
pub fn jutila_r_active_term(p: &JutilaParams) -> Result<usize, ExponentError> {
    p.validate()?;
    let lines = jutila_lines(&p.alpha2, p.k, p.ell);
    let values: Vec<Rational> = lines.iter().map(|l| l.at(&p.nu)).collect();
    let best = values.iter().max().expect("three lines");
    Ok(values.iter().position(|v| v == best).expect("max present"))
}

/// `R̄(ν, α₂) = min over k ∈ k_set, ℓ ∈ ell_set of R(ν, α₂, k, ℓ)`, with the
/// witness `(k, ℓ)`. Ties go to the smallest `ℓ`, then the smallest `k`.
pub fn jutila_rbar(
    nu: &Rational,
    alpha2: &Rational,
    k_set: &[u32],
    ell_set: &[u32],
) -> Result<(Rational, (u32, u32)), ExponentError> {
    if k_set.is_empty() || ell_set.is_empty() {
        return Err(ExponentError::EmptySet);
    }
    let mut ells = ell_set.to_vec();
    ells.sort_unstable();
    let mut ks = k_set.to_vec();
    ks.sort_unstable();
    let mut best: Option<(Rational, (u32, u32))> = None;
    for &ell in &ells {
        for &k in &ks {
            let r = jutila_r(&JutilaParams::new(nu.clone(), alpha2.clone(), k, ell))?;
            if best.as_ref().is_none_or(|(b, _)| r < *b) {
                best = Some((r, (k, ell)));
            }
        }
    }
    Ok(best.expect("non-empty sets"))
}

pub const DEFAULT_K: [u32; 1] = [3];
pub const DEFAULT_ELL: [u32; 9] = [4, 5, 6, 7, 8, 9, 10, 11, 12];

/// One verified point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentCheck {
    #[serde(with = "rational::serde_pq")]
    pub nu: Rational,
    #[serde(with = "rational::serde_pq")]
    pub lhs: Rational,
    #[serde(with = "rational::serde_pq")]
    pub rhs: Rational,
    /// `rhs − lhs`.
    #[serde(with = "rational::serde_pq")]
    pub margin: Rational,
    pub witness_ell: Option<u32>,
    pub witness_k: Option<u32>,
    /// Which inequality was checked, for reports with several per point.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub condition: Option<String>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    #[serde(with = "rational::serde_pq")]
    pub alpha2: Rational,
    #[serde(with = "rational::serde_pq")]
    pub delta: Rational,
    pub k_set: Vec<u32>,
    pub ell_set: Vec<u32>,
    #[serde(with = "rational::serde_pq_pairs")]
    pub intervals: Vec<(Rational, Rational)>,
    #[serde(with = "rational::serde_pq_vec")]
    pub breakpoints: Vec<Rational>,
    pub checks: Vec<ExponentCheck>,
    pub pass: bool,
}

impl ExponentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The check with the smallest margin.
    pub fn worst(&self) -> Option<&ExponentCheck> {
        self.checks.iter().min_by(|a, b| a.margin.cmp(&b.margin))
    }

    pub fn first_failure(&self) -> Option<&ExponentCheck> {
        self.checks.iter().find(|c| !c.ok)
    }
}

fn validate_sets(k_set: &[u32], ell_set: &[u32]) -> Result<(), ExponentError> {
    if k_set.is_empty() || ell_set.is_empty() {
        return Err(ExponentError::EmptySet);
    }
    if k_set.contains(&0) || ell_set.contains(&0) {
        return Err(ExponentError::InvalidParams("k and ell must be positive".into()));
    }
    Ok(())
}

/// All lines entering either side of the type-II inequality.
fn all_lines(alpha2: &Rational, k_set: &[u32], ell_set: &[u32]) -> Vec<Line> {
    let mut lines: Vec<Line> = Vec::new();
    for &k in k_set {
        for &ell in ell_set {
            lines.extend(jutila_lines(alpha2, k, ell));
        }
    }
    lines.extend(target_lines());
    lines
}

/// Sorted, deduplicated breakpoints inside `[lo, hi]`: the endpoints, the
/// kink `1/7`, and every pairwise crossing of `lines`.
fn breakpoints_in(lines: &[Line], lo: &Rational, hi: &Rational) -> Vec<Rational> {
    let mut pts = vec![lo.clone(), hi.clone(), ratio(1, 7)];
    for (i, a) in lines.iter().enumerate() {
        for b in &lines[i + 1..] {
            if let Some(x) = a.crossing(b) {
                pts.push(x);
            }
        }
    }
    pts.retain(|x| lo <= x && x <= hi);
    pts.sort();
    pts.dedup();
    pts
}

/// Checks `R̄(ν, α₂) ≤ target(ν) − delta` at every breakpoint of the given
/// intervals.
pub fn verify_type2_on(
    alpha2: &Rational,
    intervals: &[(Rational, Rational)],
    k_set: &[u32],
    ell_set: &[u32],
    delta: &Rational,
) -> Result<ExponentReport, ExponentError> {
    if !delta.is_positive() {
        return Err(ExponentError::InvalidDelta(rational::fmt_rational(delta)));
    }
    validate_sets(k_set, ell_set)?;
    for (lo, hi) in intervals {
        if lo > hi || lo.is_negative() || *hi > ratio(1, 2) {
            return Err(ExponentError::InvalidRange(format!(
                "[{}, {}] must be a sub-interval of [0, 1/2]",
                rational::PQ(lo),
                rational::PQ(hi)
            )));
        }
    }
    let lines = all_lines(alpha2, k_set, ell_set);
    let mut breakpoints: Vec<Rational> = intervals.iter().flat_map(|(lo, hi)| breakpoints_in(&lines, lo, hi)).collect();
    breakpoints.sort();
    breakpoints.dedup();

    let mut checks = Vec::with_capacity(breakpoints.len());
    for nu in &breakpoints {
        let (lhs, (k, ell)) = jutila_rbar(nu, alpha2, k_set, ell_set)?;
        let rhs = target_unchecked(nu);
        let margin = &rhs - &lhs;
        let ok = margin >= *delta;
        checks.push(ExponentCheck {
            nu: nu.clone(),
            lhs,
            rhs,
            margin,
            witness_ell: Some(ell),
            witness_k: Some(k),
            condition: None,
            ok,
        });
    }
    let pass = checks.iter().all(|c| c.ok);
    Ok(ExponentReport {
        alpha2: alpha2.clone(),
        delta: delta.clone(),
        k_set: k_set.to_vec(),
        ell_set: ell_set.to_vec(),
        intervals: intervals.to_vec(),
        breakpoints,
        checks,
        pass,
    })
}

/// The intervals on which the type-II bound is needed: `[1/20, β₁]` and
/// `[β₂, β]` (the small-ν branch covers `[0, 1/20]`).
pub fn type2_intervals(params: &SieveParams) -> Vec<(Rational, Rational)> {
    vec![(ratio(1, 20), params.beta1.clone()), (params.beta2.clone(), params.beta.clone())]
}

/// The union `[1/20, β₁] ∪ [β₁, β₂]` exactly as printed next to the
/// verification claim, for comparison.
pub fn printed_intervals(params: &SieveParams) -> Vec<(Rational, Rational)> {
    vec![(ratio(1, 20), params.beta1.clone()), (params.beta1.clone(), params.beta2.clone())]
}

/// Type-II verification with `k = 3`, `ℓ ∈ 4..=12` on [`type2_intervals`].
pub fn verify_type2(params: &SieveParams, delta: &Rational) -> Result<ExponentReport, ExponentError> {
    params.validate()?;
    verify_type2_on(&params.alpha2, &type2_intervals(params), &DEFAULT_K, &DEFAULT_ELL, delta)
}

/// The bound `|U′| ≪ X^{2α₂(1+ν)} ≪ X^{0.42} < X^{1/2−ν−δ}` used for
/// `ν ≤ nu_max`. Both conditions are linear in `ν`, so the two endpoints
/// decide. The first needs `margin ≥ 0`, the second `margin > delta`.
pub fn verify_small_nu(
    alpha2: &Rational,
    nu_max: &Rational,
    delta: &Rational,
) -> Result<ExponentReport, ExponentError> {
    if !delta.is_positive() {
        return Err(ExponentError::InvalidDelta(rational::fmt_rational(delta)));
    }
    if nu_max.is_negative() || *nu_max > ratio(1, 2) {
        return Err(ExponentError::InvalidRange(format!("nu_max = {} must lie in [0, 1/2]", rational::PQ(nu_max))));
    }
    let cap = ratio(21, 50);
    let mut breakpoints = vec![int(0), nu_max.clone()];
    breakpoints.dedup();
    let mut checks = Vec::new();
    for nu in &breakpoints {
        let lhs = int(2) * alpha2 * (int(1) + nu);
        let margin = &cap - &lhs;
        checks.push(ExponentCheck {
            nu: nu.clone(),
            ok: !margin.is_negative(),
            lhs,
            rhs: cap.clone(),
            margin,
            witness_ell: None,
            witness_k: None,
            condition: Some("2*alpha2*(1+nu) <= 21/50".into()),
        });
        let rhs = ratio(1, 2) - nu;
        let margin = &rhs - &cap;
        checks.push(ExponentCheck {
            nu: nu.clone(),
            ok: margin > *delta,
            lhs: cap.clone(),
            rhs,
            margin,
            witness_ell: None,
            witness_k: None,
            condition: Some("21/50 < 1/2 - nu - delta".into()),
        });
    }
    let pass = checks.iter().all(|c| c.ok);
    Ok(ExponentReport {
        alpha2: alpha2.clone(),
        delta: delta.clone(),
        k_set: vec![],
        ell_set: vec![],
        intervals: vec![(int(0), nu_max.clone())],
        breakpoints,
        checks,
        pass,
    })
}

/// Smallest `a` on the grid `2 + j/10⁴` (`a ∈ (2, 4]`) for which
/// `α₂ = 1/(2a)` passes both [`verify_type2`] and [`verify_small_nu`] with
/// margin `delta`. Both checks only get easier as `a` grows (every term of
/// `R` is non-decreasing in `α₂`), so the search is a bisection.
pub fn max_admissible_a(params: &SieveParams, delta: &Rational) -> Result<Rational, ExponentError> {
    params.validate()?;
    let a_of = |j: i64| int(2) + ratio(j, 10_000);
    let passes = |j: i64| -> Result<bool, ExponentError> {
        let alpha2 = int(1) / (int(2) * a_of(j));
        let p = SieveParams { alpha2: alpha2.clone(), ..params.clone() };
        Ok(verify_small_nu(&alpha2, &ratio(1, 20), delta)?.pass && verify_type2(&p, delta)?.pass)
    };
    let (mut lo, mut hi) = (0_i64, 20_000_i64);
    if !passes(hi)? {
        return Err(ExponentError::NoAdmissibleA);
    }
    // Invariant: lo fails (or is the excluded a = 2), hi passes.
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if passes(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(a_of(hi))
}

/// Maximal closed sub-intervals of `[0, 1/2]` on which the single bound
/// `R(ν, α₂, k, ℓ) ≤ target(ν)` holds, with exact endpoints.
pub fn sufficiency_intervals(alpha2: &Rational, k: u32, ell: u32) -> Vec<(Rational, Rational)> {
    let r = jutila_lines(alpha2, k, ell);
    let t = target_lines();
    let lines: Vec<Line> = r.iter().chain(t.iter()).cloned().collect();
    let gap = |nu: &Rational| target_unchecked(nu) - max_of(&r, nu);
    let pts = breakpoints_in(&lines, &int(0), &ratio(1, 2));
    let mut out: Vec<(Rational, Rational)> = Vec::new();
    let mut push = |a: Rational, b: Rational| match out.last_mut() {
        Some(last) if last.1 == a => last.1 = b,
        _ => out.push((a, b)),
    };
    // The gap is linear between consecutive breakpoints, so its non-negative
    // part on each piece is a closed sub-interval cut at the zero.
    for w in pts.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let (ga, gb) = (gap(a), gap(b));
        match (ga.is_negative(), gb.is_negative()) {
            (false, false) => push(a.clone(), b.clone()),
            (true, true) => {}
            (false, true) => {
                let z = a + (b - a) * &ga / (&ga - &gb);
                push(a.clone(), z);
            }
            (true, false) => {
                let z = a + (b - a) * &ga / (&ga - &gb);
                push(z, b.clone());
            }
        }
    }
    if out.is_empty() && pts.len() == 1 && !gap(&pts[0]).is_negative() {
        out.push((pts[0].clone(), pts[0].clone()));
    }
    out
}

/// One piece of the witness map: on `[lo, hi]` the minimizing `ℓ` (in the
/// interior of the piece) is `ell`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessPiece {
    #[serde(with = "rational::serde_pq")]
    pub lo: Rational,
    #[serde(with = "rational::serde_pq")]
    pub hi: Rational,
    pub k: u32,
    pub ell: u32,
}

/// Partition of `[lo, hi]` by the witness `(k, ℓ)` of `R̄`, evaluated at the
/// midpoint of every breakpoint gap and merged.
pub fn witness_map(
    alpha2: &Rational,
    lo: &Rational,
    hi: &Rational,
    k_set: &[u32],
    ell_set: &[u32],
) -> Result<Vec<WitnessPiece>, ExponentError> {
    validate_sets(k_set, ell_set)?;
    let lines = all_lines(alpha2, k_set, ell_set);
    let pts = breakpoints_in(&lines, lo, hi);
    let mut out: Vec<WitnessPiece> = Vec::new();
    if pts.len() == 1 {
        let (_, (k, ell)) = jutila_rbar(&pts[0], alpha2, k_set, ell_set)?;
        out.push(WitnessPiece { lo: lo.clone(), hi: hi.clone(), k, ell });
        return Ok(out);
    }
    for w in pts.windows(2) {
        let mid = (&w[0] + &w[1]) / int(2);
        let (_, (k, ell)) = jutila_rbar(&mid, alpha2, k_set, ell_set)?;
        match out.last_mut() {
            Some(last) if last.k == k && last.ell == ell => last.hi = w[1].clone(),
            _ => out.push(WitnessPiece { lo: w[0].clone(), hi: w[1].clone(), k, ell }),
        }
    }
    Ok(out)
}
