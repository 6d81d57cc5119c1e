//! Exponent-space regions as exact linear-constraint systems.
//!
//! Coordinates are `u_i = log q_i / log X`. A [`Region`] is a disjunction of
//! conjunctions of [`LinearConstraint`]s together with an outer bounding box.
//! Everything here is exact rational arithmetic; the integrator compiles the
//! same constraints to integer form for speed.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{self, int, ratio, Rational};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RegionError {
    #[error("unknown region {0:?} (expected A1, A2, A3, A3_star, A2_star, J2_crude or J2_full)")]
    UnknownName(String),
    #[error("invalid sieve parameters: {0}")]
    InvalidParams(String),
    #[error("dimension mismatch: region has dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// The optimized sieve parameters `β₁, β₂, β`, the slack `ε` and the
/// large-values threshold `α₂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SieveParams {
    #[serde(with = "rational::serde_pq")]
    pub beta1: Rational,
    #[serde(with = "rational::serde_pq")]
    pub beta2: Rational,
    #[serde(with = "rational::serde_pq")]
    pub beta: Rational,
    #[serde(with = "rational::serde_pq")]
    pub epsilon: Rational,
    #[serde(with = "rational::serde_pq")]
    pub alpha2: Rational,
}

impl Default for SieveParams {
    fn default() -> Self {
        Self {
            beta1: ratio(21, 125),
            beta2: ratio(1803, 10000),
            beta: ratio(39, 200),
            epsilon: int(0),
            alpha2: ratio(50, 251),
        }
    }
}

impl SieveParams {
    /// Checks `1/6 < β₁ ≤ β₂ ≤ β < 1/2`, `0 ≤ ε < 1/8` and `0 < α₂ ≤ 1`.
    ///
    /// Equal β's are accepted so that degenerate (collapsed) intervals can be
    /// explored.
    pub fn validate(&self) -> Result<(), RegionError> {
        let bad = |m: &str| Err(RegionError::InvalidParams(m.to_string()));
        if self.beta1 <= ratio(1, 6) {
            return bad("beta1 must exceed 1/6");
        }
        if self.beta1 > self.beta2 || self.beta2 > self.beta {
            return bad("need beta1 <= beta2 <= beta");
        }
        if self.beta >= ratio(1, 2) {
            return bad("beta must be below 1/2");
        }
        if self.epsilon.is_negative() || self.epsilon >= ratio(1, 8) {
            return bad("epsilon must lie in [0, 1/8)");
        }
        if !self.alpha2.is_positive() || self.alpha2 > int(1) {
            return bad("alpha2 must lie in (0, 1]");
        }
        Ok(())
    }

    pub fn with_epsilon(&self, epsilon: Rational) -> Self {
        Self { epsilon, ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
    Lt,
    Gt,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Lt => "<",
            Sense::Gt => ">",
        }
    }

    pub fn is_strict(self) -> bool {
        matches!(self, Sense::Lt | Sense::Gt)
    }
}

impl Serialize for Sense {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.symbol())
    }
}

impl<'de> Deserialize<'de> for Sense {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        match s.as_str() {
            "<=" => Ok(Sense::Le),
            ">=" => Ok(Sense::Ge),
            "<" => Ok(Sense::Lt),
            ">" => Ok(Sense::Gt),
            other => Err(serde::de::Error::custom(format!("unknown sense {other:?}"))),
        }
    }
}

/// `coeffs · u  (sense)  bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    #[serde(with = "rational::serde_pq_vec")]
    pub coeffs: Vec<Rational>,
    #[serde(with = "rational::serde_pq")]
    pub bound: Rational,
    pub sense: Sense,
}

impl LinearConstraint {
    /// Builds a constraint from sparse integer coefficients.
    ///
    /// Panics if every coefficient is zero.
    pub fn new(dim: usize, terms: &[(usize, i64)], sense: Sense, bound: Rational) -> Self {
        let mut coeffs = vec![Rational::zero(); dim];
        for &(i, a) in terms {
            coeffs[i] += int(a);
        }
        assert!(coeffs.iter().any(|c| !c.is_zero()), "constraint without variables");
        Self { coeffs, bound, sense }
    }

    pub fn holds(&self, point: &[Rational]) -> bool {
        // Accumulate coeffs·point − bound as an unreduced fraction: skipping
        // the gcd normalisation of every partial sum is much faster, and
        // only the sign matters.
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        let mut push = |tn: BigInt, td: BigInt| {
            num = &num * &td + tn * &den;
            den *= td;
        };
        for (a, x) in self.coeffs.iter().zip(point) {
            if !a.is_zero() {
                push(a.numer() * x.numer(), a.denom() * x.denom());
            }
        }
        push(-self.bound.numer(), self.bound.denom().clone());
        let sign = num.sign();
        match self.sense {
            Sense::Le => sign != num_bigint::Sign::Plus,
            Sense::Ge => sign != num_bigint::Sign::Minus,
            Sense::Lt => sign == num_bigint::Sign::Minus,
            Sense::Gt => sign == num_bigint::Sign::Plus,
        }
    }

    /// Exact range of `coeffs · u` over an axis-aligned box.
    fn range_on(&self, cell: &[(Rational, Rational)]) -> (Rational, Rational) {
        let mut lo = Rational::zero();
        let mut hi = Rational::zero();
        for (a, (l, h)) in self.coeffs.iter().zip(cell) {
            if a.is_positive() {
                lo += a * l;
                hi += a * h;
            } else if a.is_negative() {
                lo += a * h;
                hi += a * l;
            }
        }
        (lo, hi)
    }

    /// True if the constraint holds at every point of the box.
    fn holds_on(&self, cell: &[(Rational, Rational)]) -> bool {
        let (lo, hi) = self.range_on(cell);
        match self.sense {
            Sense::Le => hi <= self.bound,
            Sense::Lt => hi < self.bound,
            Sense::Ge => lo >= self.bound,
            Sense::Gt => lo > self.bound,
        }
    }

    /// True if no point of the box satisfies the constraint.
    fn refuted_on(&self, cell: &[(Rational, Rational)]) -> bool {
        let (lo, hi) = self.range_on(cell);
        match self.sense {
            Sense::Le => lo > self.bound,
            Sense::Lt => lo >= self.bound,
            Sense::Ge => hi < self.bound,
            Sense::Gt => hi <= self.bound,
        }
    }

    /// Recognizes `u_{j+1} < u_j` (in either orientation) and returns `j`.
    pub fn strict_descent(&self) -> Option<usize> {
        if !self.bound.is_zero() || !self.sense.is_strict() {
            return None;
        }
        let nz: Vec<usize> = (0..self.coeffs.len()).filter(|&i| !self.coeffs[i].is_zero()).collect();
        let [j, j1] = nz[..] else { return None };
        if j1 != j + 1 || self.coeffs[j] != -self.coeffs[j1].clone() {
            return None;
        }
        // a (u_j − u_{j+1}) > 0 with a > 0, or < 0 with a < 0.
        let positive = self.coeffs[j].is_positive();
        match (self.sense, positive) {
            (Sense::Gt, true) | (Sense::Lt, false) => Some(j),
            _ => None,
        }
    }
}

impl fmt::Display for LinearConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let sign = if a.is_negative() {
                "-"
            } else if first {
                ""
            } else {
                "+"
            };
            let mag = a.abs();
            let sep = if first { "" } else { " " };
            if mag == int(1) {
                write!(f, "{sep}{sign}u{}", i + 1)?;
            } else {
                write!(f, "{sep}{sign}{}*u{}", rational::PQ(&mag), i + 1)?;
            }
            first = false;
        }
        write!(f, " {} {}", self.sense.symbol(), rational::PQ(&self.bound))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionName {
    A1,
    A2,
    A3,
    #[serde(rename = "A3_star")]
    A3Star,
    #[serde(rename = "A2_star")]
    A2Star,
    #[serde(rename = "J2_crude")]
    J2Crude,
    /// `A₂*` intersected with the simplex constraint `u₁+u₂+u₃+2u₄ ≤ 1`.
    #[serde(rename = "J2_full")]
    J2Full,
}

impl RegionName {
    pub const ALL: [RegionName; 7] = [
        RegionName::A1,
        RegionName::A2,
        RegionName::A3,
        RegionName::A3Star,
        RegionName::A2Star,
        RegionName::J2Crude,
        RegionName::J2Full,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RegionName::A1 => "A1",
            RegionName::A2 => "A2",
            RegionName::A3 => "A3",
            RegionName::A3Star => "A3_star",
            RegionName::A2Star => "A2_star",
            RegionName::J2Crude => "J2_crude",
            RegionName::J2Full => "J2_full",
        }
    }
}

impl fmt::Display for RegionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RegionName {
    type Err = RegionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.to_ascii_lowercase().replace('-', "_").replace('*', "_star");
        match key.as_str() {
            "a1" => Ok(RegionName::A1),
            "a2" => Ok(RegionName::A2),
            "a3" => Ok(RegionName::A3),
            "a3_star" | "a3star" => Ok(RegionName::A3Star),
            "a2_star" | "a2star" => Ok(RegionName::A2Star),
            "j2_crude" | "j2crude" => Ok(RegionName::J2Crude),
            "j2_full" | "j2full" => Ok(RegionName::J2Full),
            _ => Err(RegionError::UnknownName(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoxRelation {
    Inside,
    Outside,
    Boundary,
}

/// A union of polyhedra `⋃_c ⋂_{g ∈ c} g` inside an outer box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub name: String,
    pub dim: usize,
    #[serde(rename = "box", with = "rational::serde_pq_pairs")]
    pub bbox: Vec<(Rational, Rational)>,
    pub clauses: Vec<Vec<LinearConstraint>>,
}

impl Region {
    fn check_dim(&self, got: usize) -> Result<(), RegionError> {
        if got == self.dim {
            Ok(())
        } else {
            Err(RegionError::DimensionMismatch { expected: self.dim, got })
        }
    }

    pub fn contains(&self, point: &[Rational]) -> Result<bool, RegionError> {
        self.check_dim(point.len())?;
        Ok(self.clauses.iter().any(|c| c.iter().all(|g| g.holds(point))))
    }

    /// Floating-point copy of the constraint system, for Monte-Carlo style
    /// diagnostics where exact membership would be too slow.
    pub fn to_float(&self) -> FloatRegion {
        let clauses = self
            .clauses
            .iter()
            .map(|c| {
                c.iter()
                    .map(|g| {
                        let coeffs = g.coeffs.iter().map(rational::to_f64_up).collect();
                        (coeffs, rational::to_f64_up(&g.bound), g.sense)
                    })
                    .collect()
            })
            .collect();
        FloatRegion { clauses }
    }

    /// Classifies a closed box against the region.
    ///
    /// `Outside` means every clause has a constraint refuted on the whole
    /// box; `Inside` means some clause holds on the whole box. Linear forms
    /// reach their extremes at corners, so both tests are exact; a box
    /// covered only by a union of clauses is reported as `Boundary`.
    pub fn box_relation(&self, cell: &[(Rational, Rational)]) -> Result<BoxRelation, RegionError> {
        self.check_dim(cell.len())?;
        let mut outside = true;
        for clause in &self.clauses {
            if clause.iter().all(|g| g.holds_on(cell)) {
                return Ok(BoxRelation::Inside);
            }
            if !clause.iter().any(|g| g.refuted_on(cell)) {
                outside = false;
            }
        }
        Ok(if outside { BoxRelation::Outside } else { BoxRelation::Boundary })
    }

    /// True if every clause forces `u₁ > u₂ > … > u_k`, which lets grid
    /// enumeration skip cells with a non-descending index.
    pub fn is_strictly_descending(&self) -> bool {
        if self.dim < 2 || self.clauses.is_empty() {
            return false;
        }
        self.clauses
            .iter()
            .all(|clause| (0..self.dim - 1).all(|j| clause.iter().any(|g| g.strict_descent() == Some(j))))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("region serializes")
    }
}

/// See [`Region::to_float`]. Membership is approximate near boundaries.
#[derive(Debug, Clone)]
pub struct FloatRegion {
    clauses: Vec<Vec<(Vec<f64>, f64, Sense)>>,
}

impl FloatRegion {
    pub fn contains(&self, point: &[f64]) -> bool {
        self.clauses.iter().any(|c| {
            c.iter().all(|(a, b, sense)| {
                let lhs: f64 = a.iter().zip(point).map(|(a, x)| a * x).sum();
                match sense {
                    Sense::Le => lhs <= *b,
                    Sense::Ge => lhs >= *b,
                    Sense::Lt => lhs < *b,
                    Sense::Gt => lhs > *b,
                }
            })
        })
    }
}

type Dnf = Vec<Vec<LinearConstraint>>;

fn and(a: Dnf, b: Dnf) -> Dnf {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in &a {
        for y in &b {
            out.push(x.iter().chain(y).cloned().collect());
        }
    }
    out
}

fn all(cs: Vec<LinearConstraint>) -> Dnf {
    vec![cs]
}

fn one_of(alternatives: Vec<Vec<LinearConstraint>>) -> Dnf {
    alternatives
}

/// Constraint builder for a fixed dimension.
struct B(usize);

impl B {
    fn c(&self, terms: &[(usize, i64)], sense: Sense, bound: Rational) -> LinearConstraint {
        LinearConstraint::new(self.0, terms, sense, bound)
    }
    fn le(&self, i: usize, b: &Rational) -> LinearConstraint {
        self.c(&[(i, 1)], Sense::Le, b.clone())
    }
    fn lt(&self, i: usize, b: &Rational) -> LinearConstraint {
        self.c(&[(i, 1)], Sense::Lt, b.clone())
    }
    fn ge(&self, i: usize, b: &Rational) -> LinearConstraint {
        self.c(&[(i, 1)], Sense::Ge, b.clone())
    }
    fn gt(&self, i: usize, b: &Rational) -> LinearConstraint {
        self.c(&[(i, 1)], Sense::Gt, b.clone())
    }
    /// `u_{i+1} < u_i`.
    fn desc(&self, i: usize) -> LinearConstraint {
        self.c(&[(i, 1), (i + 1, -1)], Sense::Gt, int(0))
    }
}

/// `(u₁, u₂)` not in `A₁`, given `0 < u₂ < u₁`: both coordinates avoid
/// `(0, β₁] ∪ [β₂, β]`.
fn not_a1(b: &B, p: &SieveParams) -> Dnf {
    let avoid = |i: usize| one_of(vec![vec![b.gt(i, &p.beta1), b.lt(i, &p.beta2)], vec![b.gt(i, &p.beta)]]);
    and(avoid(0), avoid(1))
}

/// The `A₂` conditions on `(u₁, u₂)`, embedded in dimension `b.0`.
fn a2_conditions(b: &B, p: &SieveParams) -> Dnf {
    let quarter = ratio(1, 4) - int(2) * &p.epsilon;
    let one = int(1);
    let base = all(vec![b.gt(1, &int(0)), b.desc(0), b.le(0, &quarter)]);
    let short = one_of(vec![
        vec![b.c(&[(0, 2), (1, 3)], Sense::Le, one.clone())],
        vec![b.c(&[(0, 1), (1, 4)], Sense::Le, one)],
    ]);
    and(and(base, short), not_a1(b, p))
}

/// Coordinate `i` lies in `[β₁, β₂] ∪ [β, top]`.
fn in_star_bands(b: &B, p: &SieveParams, i: usize, top: &Rational) -> Dnf {
    one_of(vec![vec![b.ge(i, &p.beta1), b.le(i, &p.beta2)], vec![b.ge(i, &p.beta), b.le(i, top)]])
}

/// Builds one of the named regions for the given parameters.
pub fn build_region(name: RegionName, params: &SieveParams) -> Result<Region, RegionError> {
    params.validate()?;
    let p = params;
    let zero = int(0);
    let one = int(1);
    let half = ratio(1, 2);
    let quarter = ratio(1, 4);
    let (dim, bbox, clauses) = match name {
        RegionName::A1 => {
            let b = B(2);
            let base = all(vec![b.gt(1, &zero), b.desc(0), b.le(0, &one)]);
            let small = one_of(vec![
                vec![b.le(0, &p.beta1)],
                vec![b.ge(0, &p.beta2), b.le(0, &p.beta)],
                vec![b.le(1, &p.beta1)],
                vec![b.ge(1, &p.beta2), b.le(1, &p.beta)],
            ]);
            (2, vec![(zero.clone(), one.clone()); 2], and(base, small))
        }
        RegionName::A2 => {
            let b = B(2);
            (2, vec![(zero.clone(), quarter.clone()); 2], a2_conditions(&b, p))
        }
        RegionName::A3 => {
            let b = B(2);
            let q = &quarter - int(2) * &p.epsilon;
            let base = all(vec![b.gt(1, &zero), b.desc(0), b.le(0, &half)]);
            let long = one_of(vec![
                vec![b.c(&[(0, 2), (1, 3)], Sense::Gt, one.clone()), b.c(&[(0, 1), (1, 4)], Sense::Gt, one.clone())],
                vec![b.gt(0, &q)],
            ]);
            (2, vec![(zero.clone(), half.clone()); 2], and(and(base, not_a1(&b, p)), long))
        }
        RegionName::A3Star => {
            let b = B(2);
            let base = all(vec![b.desc(0), b.c(&[(0, 2), (1, 3)], Sense::Ge, one.clone())]);
            let bands = and(in_star_bands(&b, p, 0, &half), in_star_bands(&b, p, 1, &half));
            let tail = one_of(vec![
                vec![b.c(&[(0, 1), (1, 4)], Sense::Ge, one.clone())],
                vec![b.c(&[(0, 4)], Sense::Ge, &one + int(10) * &p.epsilon)],
            ]);
            (2, vec![(p.beta1.clone(), half.clone()); 2], and(and(base, bands), tail))
        }
        RegionName::A2Star | RegionName::J2Full => {
            let b = B(4);
            let mut ordered = vec![b.ge(3, &p.beta1)];
            ordered.extend((0..3).map(|i| b.desc(i)));
            let mut dnf = all(ordered);
            for i in 0..4 {
                dnf = and(dnf, one_of(vec![vec![b.le(i, &p.beta2)], vec![b.ge(i, &p.beta)]]));
            }
            dnf = and(dnf, a2_conditions(&b, p));
            if name == RegionName::J2Full {
                dnf = and(dnf, all(vec![simplex(&b)]));
            }
            (4, vec![(p.beta1.clone(), quarter.clone()); 4], dnf)
        }
        RegionName::J2Crude => {
            let b = B(4);
            let mut cs = vec![b.gt(3, &p.beta1)];
            cs.extend((0..3).map(|i| b.desc(i)));
            cs.push(simplex(&b));
            let top = rational::max_rat(&p.beta1, &(&one - int(4) * &p.beta1)).clone();
            (4, vec![(p.beta1.clone(), top); 4], all(cs))
        }
    };
    Ok(Region { name: name.as_str().to_string(), dim, bbox, clauses })
}

fn simplex(b: &B) -> LinearConstraint {
    b.c(&[(0, 1), (1, 1), (2, 1), (3, 2)], Sense::Le, int(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::parse_rational;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(xs: &[&str]) -> Vec<Rational> {
        xs.iter().map(|s| parse_rational(s).unwrap()).collect()
    }

    fn region(name: RegionName) -> Region {
        build_region(name, &SieveParams::default()).unwrap()
    }

    fn cell(bounds: &[(&str, &str)]) -> Vec<(Rational, Rational)> {
        bounds.iter().map(|(a, b)| (parse_rational(a).unwrap(), parse_rational(b).unwrap())).collect()
    }

    // Random rationals with a large prime denominator avoid landing exactly
    // on any of the region boundaries.
    const DEN: i64 = 2_147_483_647;

    fn random_rational(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Rational {
        random_over(rng, lo, hi, DEN)
    }

    fn random_over(rng: &mut ChaCha8Rng, lo: f64, hi: f64, den: i64) -> Rational {
        let x: f64 = rng.gen_range(lo..hi);
        Rational::new(BigInt::from((x * den as f64) as i64), BigInt::from(den))
    }

    #[test]
    fn defaults_are_valid() {
        SieveParams::default().validate().unwrap();
        assert_eq!(SieveParams::default().beta1, parse_rational("0.1680").unwrap());
        assert_eq!(SieveParams::default().alpha2, parse_rational("1/5.02").unwrap());
    }

    #[test]
    fn rejects_invalid_params() {
        let p = SieveParams { beta1: ratio(1, 10), ..SieveParams::default() };
        assert!(matches!(build_region(RegionName::A1, &p), Err(RegionError::InvalidParams(_))));
        let p = SieveParams { beta2: ratio(1, 5), ..SieveParams::default() };
        assert!(p.validate().is_err());
        let p = SieveParams { epsilon: ratio(-1, 100), ..SieveParams::default() };
        assert!(p.validate().is_err());
    }

    #[test]
    fn parses_names() {
        assert_eq!("A3_star".parse::<RegionName>().unwrap(), RegionName::A3Star);
        assert_eq!("a2*".parse::<RegionName>().unwrap(), RegionName::A2Star);
        assert_eq!("J2-crude".parse::<RegionName>().unwrap(), RegionName::J2Crude);
        assert!(matches!("A4".parse::<RegionName>(), Err(RegionError::UnknownName(_))));
        for name in RegionName::ALL {
            assert_eq!(name.as_str().parse::<RegionName>().unwrap(), name);
        }
    }

    #[test]
    fn membership_examples() {
        let a3s = region(RegionName::A3Star);
        assert!(a3s.contains(&pt(&["0.21", "0.20"])).unwrap());
        assert!(!a3s.contains(&pt(&["0.21", "0.17"])).unwrap());
        assert!(!a3s.contains(&pt(&["0.5", "0.5"])).unwrap());
        let a2 = region(RegionName::A2);
        assert!(!a2.contains(&pt(&["0.24", "0.05"])).unwrap());
        assert!(region(RegionName::A1).contains(&pt(&["0.24", "0.05"])).unwrap());
        let j2 = region(RegionName::J2Crude);
        assert!(j2.contains(&pt(&["0.2", "0.19", "0.18", "0.17"])).unwrap());
        assert!(!j2.contains(&pt(&["0.168", "0.168", "0.168", "0.168"])).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a3s = region(RegionName::A3Star);
        assert_eq!(a3s.contains(&pt(&["0.2"])), Err(RegionError::DimensionMismatch { expected: 2, got: 1 }));
        assert!(a3s.box_relation(&cell(&[("0", "1")])).is_err());
    }

    #[test]
    fn box_relation_examples() {
        let a3s = region(RegionName::A3Star);
        let inside = cell(&[("0.3", "0.31"), ("0.25", "0.26")]);
        assert_eq!(a3s.box_relation(&inside).unwrap(), BoxRelation::Inside);
        let outside = cell(&[("0.1", "0.11"), ("0.05", "0.06")]);
        assert_eq!(a3s.box_relation(&outside).unwrap(), BoxRelation::Outside);
        let straddle = cell(&[("0.3", "0.31"), ("0.175", "0.185")]);
        assert_eq!(a3s.box_relation(&straddle).unwrap(), BoxRelation::Boundary);
    }

    #[test]
    fn clause_counts() {
        assert_eq!(region(RegionName::A1).clauses.len(), 4);
        assert_eq!(region(RegionName::A2).clauses.len(), 8);
        assert_eq!(region(RegionName::A3).clauses.len(), 8);
        assert_eq!(region(RegionName::A3Star).clauses.len(), 8);
        assert_eq!(region(RegionName::A2Star).clauses.len(), 128);
        assert_eq!(region(RegionName::J2Crude).clauses.len(), 1);
    }

    #[test]
    fn descending_detection() {
        for name in RegionName::ALL {
            assert!(region(name).is_strictly_descending(), "{name}");
        }
        let mut r = region(RegionName::J2Crude);
        r.clauses[0].retain(|g| g.strict_descent() != Some(1));
        assert!(!r.is_strictly_descending());
    }

    #[test]
    fn json_round_trip() {
        let r = region(RegionName::A3Star);
        let back: Region = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(r.to_json().contains("\"sense\": \">=\""));
    }

    #[test]
    fn a1_a2_a3_partition_pairs() {
        let (a1, a2, a3) = (region(RegionName::A1), region(RegionName::A2), region(RegionName::A3));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut seen = [0usize; 3];
        let mut n = 0;
        while n < 100_000 {
            // The three sets are exact complements, so boundary hits are
            // harmless here and a small denominator keeps this fast.
            let u1 = random_over(&mut rng, 0.0, 0.5, 1_000_003);
            let u2 = random_over(&mut rng, 0.0, 0.5, 1_000_003);
            if !(u2 < u1) || u2.is_zero() {
                continue;
            }
            n += 1;
            let p = [u1, u2];
            let hits = [a1.contains(&p).unwrap(), a2.contains(&p).unwrap(), a3.contains(&p).unwrap()];
            assert_eq!(hits.iter().filter(|&&h| h).count(), 1, "{:?}", p);
            for (s, h) in seen.iter_mut().zip(hits) {
                *s += h as usize;
            }
        }
        assert!(seen.iter().all(|&s| s > 0), "{seen:?}");
    }

    #[test]
    fn a3_star_lies_in_a3() {
        let (a3s, a3) = (region(RegionName::A3Star), region(RegionName::A3));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut members = 0;
        for _ in 0..50_000 {
            let p = [random_rational(&mut rng, 0.168, 0.5), random_rational(&mut rng, 0.168, 0.5)];
            if a3s.contains(&p).unwrap() {
                members += 1;
                assert!(a3.contains(&p).unwrap(), "{:?}", p);
            }
        }
        assert!(members > 1000);
    }

    #[test]
    fn a3_star_shrinks_with_epsilon() {
        let p0 = SieveParams::default();
        let wide = build_region(RegionName::A3Star, &p0).unwrap();
        let narrow = build_region(RegionName::A3Star, &p0.with_epsilon(ratio(1, 1000))).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut strictly_lost = 0;
        for _ in 0..50_000 {
            let p = [random_rational(&mut rng, 0.168, 0.5), random_rational(&mut rng, 0.168, 0.5)];
            let (w, n) = (wide.contains(&p).unwrap(), narrow.contains(&p).unwrap());
            assert!(!n || w, "{:?}", p);
            strictly_lost += (w && !n) as usize;
        }
        assert!(strictly_lost > 0);
    }

    #[test]
    fn bounding_boxes_contain_members() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for name in RegionName::ALL {
            let r = region(name);
            for _ in 0..5_000 {
                let p: Vec<Rational> = (0..r.dim).map(|_| random_rational(&mut rng, -0.05, 0.6)).collect();
                if r.contains(&p).unwrap() {
                    for (x, (lo, hi)) in p.iter().zip(&r.bbox) {
                        assert!(lo <= x && x <= hi, "{name}: {:?}", p);
                    }
                }
            }
        }
    }

    #[test]
    fn display_is_readable() {
        let b = B(2);
        assert_eq!(b.c(&[(0, 2), (1, -3)], Sense::Ge, int(1)).to_string(), "2/1*u1 -3/1*u2 >= 1/1");
        assert_eq!(b.desc(0).to_string(), "u1 -u2 > 0/1");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn box_relation_is_sound(
            which in 0usize..7,
            corner in proptest::collection::vec(0u32..1000, 4),
            width in 1u32..80,
            seed in any::<u64>(),
        ) {
            let r = region(RegionName::ALL[which]);
            let cell: Vec<(Rational, Rational)> = corner[..r.dim]
                .iter()
                .map(|&c| (ratio(c as i64, 2000), ratio((c + width) as i64, 2000)))
                .collect();
            let rel = r.box_relation(&cell).unwrap();
            if rel == BoxRelation::Boundary {
                return Ok(());
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..1000 {
                let p: Vec<Rational> = cell
                    .iter()
                    .map(|(lo, hi)| {
                        let t = Rational::new(BigInt::from(rng.gen_range(0..=DEN)), BigInt::from(DEN));
                        lo + (hi - lo) * t
                    })
                    .collect();
                prop_assert_eq!(r.contains(&p).unwrap(), rel == BoxRelation::Inside);
            }
        }
    }
}
