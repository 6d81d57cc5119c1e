//! Certified upper Riemann sums over [`Region`]s.
//!
//! The bounding box is padded outward to a multiple of the step `s = p/q` and
//! cut into cubes. With `u_j = i_j·p/q` every constraint compiles to an exact
//! `i128` inequality in the cell indices, so classification involves no
//! rounding at all. Each cell that meets the region is charged its volume
//! times a supremum bound of the integrand; the only floating-point error is
//! in the per-cell products and the compensated reduction, and both are
//! dominated by a final relative inflation of `1e-10`.
//!
//! Rows (the first coordinate) are processed in parallel, each into its own
//! compensated accumulator, and rows are merged in index order, so the result
//! is bit-identical for any number of worker threads.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::buchstab::omega_sup;
use crate::rational::{self, int, Rational};
use crate::regions::{build_region, Region, RegionError, RegionName, Sense, SieveParams};
use crate::summation::CompensatedSum;

/// Final relative inflation of the reduced upper sum.
pub const SUM_INFLATION: f64 = 1e-10;

/// Relative widening of the floating-point ω argument interval; a correctly
/// rounded quotient is off by at most half an ulp.
const ARG_WIDENING: f64 = 1e-15;

/// Refuse grids with more raw cells than this (before ordering pruning).
const MAX_RAW_CELLS: f64 = 1e13;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntegrationError {
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error("grid dimension {grid} does not match region dimension {region}")]
    DimensionMismatch { region: usize, grid: usize },
    #[error("step must be positive (got {0})")]
    InvalidStep(String),
    #[error("grid too coarse: step {step} is not below the box side {side}")]
    GridTooCoarse { step: String, side: String },
    #[error("grid too fine: {0:.3e} raw cells")]
    GridTooFine(f64),
    #[error("integrand unbounded on cell with lower corner index {cell:?}; the region needs positive lower bounds")]
    Unbounded { cell: Vec<i64> },
    #[error("unknown J2 mode {0:?} (expected crude or full)")]
    UnknownMode(String),
    #[error("writing cell dump: {0}")]
    Io(String),
}

/// Uniform grid of cubes of side `step` covering a padded box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    #[serde(with = "rational::serde_pq")]
    pub step: Rational,
    /// Padded box; every side is a whole number of steps.
    #[serde(rename = "box", with = "rational::serde_pq_pairs")]
    pub padded_box: Vec<(Rational, Rational)>,
    /// First cell index on each axis.
    pub first: Vec<i64>,
    /// One past the last cell index on each axis.
    pub end: Vec<i64>,
}

impl GridSpec {
    /// Pads `bbox` outward to the step lattice. A zero-width side still
    /// gets one cell.
    pub fn new(bbox: &[(Rational, Rational)], step: Rational) -> Result<Self, IntegrationError> {
        if !step.is_positive() {
            return Err(IntegrationError::InvalidStep(rational::fmt_rational(&step)));
        }
        let mut first = Vec::with_capacity(bbox.len());
        let mut end = Vec::with_capacity(bbox.len());
        let mut padded_box = Vec::with_capacity(bbox.len());
        let mut raw = 1.0_f64;
        for (lo, hi) in bbox {
            let side = hi - lo;
            if side.is_positive() && step >= side {
                return Err(IntegrationError::GridTooCoarse {
                    step: rational::fmt_rational(&step),
                    side: rational::fmt_rational(&side),
                });
            }
            let a = rational::floor_to_i64(&(lo / &step)).ok_or(IntegrationError::GridTooFine(f64::INFINITY))?;
            let b =
                rational::ceil_to_i64(&(hi / &step)).ok_or(IntegrationError::GridTooFine(f64::INFINITY))?.max(a + 1);
            raw *= (b - a) as f64;
            padded_box.push((int(a) * &step, int(b) * &step));
            first.push(a);
            end.push(b);
        }
        if raw > MAX_RAW_CELLS {
            return Err(IntegrationError::GridTooFine(raw));
        }
        Ok(Self { dim: bbox.len(), step, padded_box, first, end })
    }

    pub fn for_region(region: &Region, step: Rational) -> Result<Self, IntegrationError> {
        Self::new(&region.bbox, step)
    }

    /// Cell count of the full box, ignoring any ordering pruning.
    pub fn raw_cells(&self) -> u128 {
        self.first.iter().zip(&self.end).map(|(a, b)| (b - a) as u128).product()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrand {
    /// `ω((1 − u₁ − … − u_k)/u_k) / (u₁⋯u_{k−1}·u_k²)`.
    BuchstabJ,
    ConstantOne,
}

impl Integrand {
    pub fn as_str(self) -> &'static str {
        match self {
            Integrand::BuchstabJ => "buchstab_j",
            Integrand::ConstantOne => "constant_one",
        }
    }
}

impl fmt::Display for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum J2Mode {
    /// `β₁⁻⁵ · vol{β₁ < u₄ < u₃ < u₂ < u₁, u₁+u₂+u₃+2u₄ ≤ 1}`.
    Crude,
    /// The Buchstab integrand over `A₂*` cut by the same simplex.
    Full,
}

impl FromStr for J2Mode {
    type Err = IntegrationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "crude" => Ok(J2Mode::Crude),
            "full" => Ok(J2Mode::Full),
            _ => Err(IntegrationError::UnknownMode(s.to_string())),
        }
    }
}

/// Certified enclosure `lower_bound ≤ ∫ ≤ upper_bound` of an integral over a
/// region, with the grid that produced it.
///
/// `wall_time_ms` is not serialized so that certificates for the same input
/// are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiemannCertificate {
    pub region: String,
    pub integrand: Integrand,
    #[serde(with = "rational::serde_pq")]
    pub step: Rational,
    pub grid: GridSpec,
    pub upper_bound: f64,
    pub lower_bound: f64,
    pub cells_inside: u64,
    pub cells_boundary: u64,
    /// Cells classified after ordering pruning.
    pub cells_visited: u64,
    /// Exact factor multiplying the integral (`β₁⁻⁵` for the crude J₂).
    #[serde(with = "rational::serde_pq")]
    pub scale_factor: Rational,
    #[serde(skip)]
    pub wall_time_ms: u64,
}

impl RiemannCertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Holds,
    Refuted,
    Mixed,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Class {
    Inside,
    Boundary,
    Outside,
}

impl Class {
    fn label(self) -> &'static str {
        match self {
            Class::Inside => "inside",
            Class::Boundary => "boundary",
            Class::Outside => "outside",
        }
    }
}

/// `Σ a_j i_j · p  (sense)  rhs` with `rhs = B·q`, where the original
/// constraint was scaled by the lcm of its denominators.
struct IntConstraint {
    a: Vec<i128>,
    rhs: i128,
    p: i128,
    sense: Sense,
}

impl IntConstraint {
    #[inline]
    fn status(&self, idx: &[i64]) -> Status {
        let (mut lo, mut hi) = (0i128, 0i128);
        for (&a, &i) in self.a.iter().zip(idx) {
            let i = i as i128;
            if a > 0 {
                lo += a * i;
                hi += a * (i + 1);
            } else if a < 0 {
                lo += a * (i + 1);
                hi += a * i;
            }
        }
        let (lo, hi) = (lo * self.p, hi * self.p);
        let (holds, refuted) = match self.sense {
            Sense::Le => (hi <= self.rhs, lo > self.rhs),
            Sense::Lt => (hi < self.rhs, lo >= self.rhs),
            Sense::Ge => (lo >= self.rhs, hi < self.rhs),
            Sense::Gt => (lo > self.rhs, hi <= self.rhs),
        };
        if holds {
            Status::Holds
        } else if refuted {
            Status::Refuted
        } else {
            Status::Mixed
        }
    }
}

/// The region's constraints in integer form, deduplicated across clauses.
struct Compiled {
    constraints: Vec<IntConstraint>,
    clauses: Vec<Vec<usize>>,
}

fn to_i128(x: &BigInt) -> i128 {
    x.to_i128().expect("constraint coefficients fit in i128")
}

impl Compiled {
    fn new(region: &Region, step: &Rational) -> Self {
        let p = to_i128(step.numer());
        let q = to_i128(step.denom());
        let mut constraints: Vec<IntConstraint> = Vec::new();
        let mut seen: Vec<&crate::regions::LinearConstraint> = Vec::new();
        let mut clauses = Vec::with_capacity(region.clauses.len());
        for clause in &region.clauses {
            let mut ids = Vec::with_capacity(clause.len());
            for g in clause {
                if let Some(pos) = seen.iter().position(|h| *h == g) {
                    ids.push(pos);
                    continue;
                }
                let lcm =
                    g.coeffs.iter().chain(std::iter::once(&g.bound)).fold(BigInt::from(1), |l, r| l.lcm(r.denom()));
                let scaled = |r: &Rational| to_i128(&(r * Rational::from_integer(lcm.clone())).to_integer());
                constraints.push(IntConstraint {
                    a: g.coeffs.iter().map(scaled).collect(),
                    rhs: scaled(&g.bound) * q,
                    p,
                    sense: g.sense,
                });
                seen.push(g);
                ids.push(constraints.len() - 1);
            }
            clauses.push(ids);
        }
        Self { constraints, clauses }
    }

    fn classify(&self, idx: &[i64], scratch: &mut Vec<Status>) -> Class {
        scratch.clear();
        scratch.extend(self.constraints.iter().map(|c| c.status(idx)));
        let mut outside = true;
        for clause in &self.clauses {
            if clause.iter().all(|&c| scratch[c] == Status::Holds) {
                return Class::Inside;
            }
            if !clause.iter().any(|&c| scratch[c] == Status::Refuted) {
                outside = false;
            }
        }
        if outside {
            Class::Outside
        } else {
            Class::Boundary
        }
    }
}

/// Per-cell bounds of the Buchstab integrand, in units where the cell volume
/// has already been folded in: `vol · sup f = (q/p) · ω_hi / (Π l_j · l_k)`.
struct BuchstabCell {
    p: i128,
    q: i128,
    q_over_p: f64,
}

impl BuchstabCell {
    /// Returns `(sup of integrand · vol, inf of integrand · vol, sup of
    /// integrand)` for the cell, or `None` if a lower corner touches 0.
    fn bounds(&self, idx: &[i64]) -> Option<(f64, f64, f64)> {
        let k = idx.len();
        if idx.iter().any(|&i| i <= 0) {
            return None;
        }
        let lk = idx[k - 1] as i128;
        let hk = lk + 1;
        let t_lo: i128 = idx[..k - 1].iter().map(|&i| i as i128).sum();
        let t_hi = t_lo + (k as i128 - 1);
        // arg = c/u_k − 1 with c = 1 − Σ_{j<k} u_j = (q − p·T)/q.
        let c_max = self.q - self.p * t_lo;
        let c_min = self.q - self.p * t_hi;
        let quotient = |c: i128, l: i128| (c - self.p * l) as f64 / (self.p * l) as f64;
        let arg_max = quotient(c_max, if c_max >= 0 { lk } else { hk });
        let arg_min = quotient(c_min, if c_min >= 0 { hk } else { lk });
        let widen = |x: f64, dir: f64| x + dir * (x.abs() * ARG_WIDENING + f64::MIN_POSITIVE);
        let omega = omega_sup(widen(arg_min, -1.0), widen(arg_max, 1.0));

        let mut prod_lo = 1.0_f64;
        let mut prod_hi = 1.0_f64;
        for &i in idx {
            prod_lo *= i as f64;
            prod_hi *= (i + 1) as f64;
        }
        prod_lo *= lk as f64;
        prod_hi *= hk as f64;
        let sup_vol = omega.hi * self.q_over_p / prod_lo;
        let inf_vol = omega.lo * self.q_over_p / prod_hi;
        let vol = rational_pow_f64(self.p, self.q, k);
        Some((sup_vol, inf_vol, sup_vol / vol))
    }
}

fn rational_pow_f64(p: i128, q: i128, k: usize) -> f64 {
    (p as f64 / q as f64).powi(k as i32)
}

#[derive(Default)]
struct RowTotals {
    upper: CompensatedSum,
    lower: CompensatedSum,
    inside: u64,
    boundary: u64,
    visited: u64,
    unbounded: Option<Vec<i64>>,
}

impl RowTotals {
    fn merge(&mut self, other: &RowTotals) {
        self.upper.merge(&other.upper);
        self.lower.merge(&other.lower);
        self.inside += other.inside;
        self.boundary += other.boundary;
        self.visited += other.visited;
        if self.unbounded.is_none() {
            self.unbounded.clone_from(&other.unbounded);
        }
    }
}

/// Visits every cell of the row `idx[0] = row`, honouring descending-order
/// pruning, and calls `f` with the full index vector.
fn for_each_cell(grid: &GridSpec, descending: bool, row: i64, mut f: impl FnMut(&[i64])) {
    let k = grid.dim;
    let mut idx = vec![0i64; k];
    idx[0] = row;
    if k == 1 {
        f(&idx);
        return;
    }
    let upper = |idx: &[i64], j: usize| -> i64 {
        if descending {
            grid.end[j].min(idx[j - 1] + 1)
        } else {
            grid.end[j]
        }
    };
    // Odometer over axes 1..k.
    let mut j = 1;
    idx[1] = grid.first[1];
    loop {
        if idx[j] >= upper(&idx, j) {
            if j == 1 {
                return;
            }
            j -= 1;
            idx[j] += 1;
            continue;
        }
        if j + 1 < k {
            j += 1;
            idx[j] = grid.first[j];
            continue;
        }
        f(&idx);
        idx[j] += 1;
    }
}

/// Upper (and lower) Riemann sum of `integrand` over `region`.
pub fn upper_riemann(
    region: &Region,
    integrand: Integrand,
    grid: &GridSpec,
) -> Result<RiemannCertificate, IntegrationError> {
    upper_riemann_scaled(region, integrand, grid, &int(1))
}

/// As [`upper_riemann`], with the integral multiplied by an exact positive
/// `scale`.
pub fn upper_riemann_scaled(
    region: &Region,
    integrand: Integrand,
    grid: &GridSpec,
    scale: &Rational,
) -> Result<RiemannCertificate, IntegrationError> {
    if region.dim != grid.dim {
        return Err(IntegrationError::DimensionMismatch { region: region.dim, grid: grid.dim });
    }
    let started = Instant::now();
    let compiled = Compiled::new(region, &grid.step);
    let descending = region.is_strictly_descending();
    let p = to_i128(grid.step.numer());
    let q = to_i128(grid.step.denom());
    let cell = BuchstabCell { p, q, q_over_p: q as f64 / p as f64 };

    let rows: Vec<RowTotals> = (grid.first[0]..grid.end[0])
        .into_par_iter()
        .map(|row| {
            let mut totals = RowTotals::default();
            let mut scratch = Vec::with_capacity(compiled.constraints.len());
            for_each_cell(grid, descending, row, |idx| {
                totals.visited += 1;
                let class = compiled.classify(idx, &mut scratch);
                if class == Class::Outside {
                    return;
                }
                if class == Class::Inside {
                    totals.inside += 1;
                } else {
                    totals.boundary += 1;
                }
                if integrand == Integrand::BuchstabJ {
                    match cell.bounds(idx) {
                        Some((sup_vol, inf_vol, _)) => {
                            totals.upper.add(sup_vol);
                            if class == Class::Inside {
                                totals.lower.add(inf_vol);
                            }
                        }
                        None => {
                            if totals.unbounded.is_none() {
                                totals.unbounded = Some(idx.to_vec());
                            }
                        }
                    }
                }
            });
            totals
        })
        .collect();

    let mut total = RowTotals::default();
    for r in &rows {
        total.merge(r);
    }
    if let Some(cell) = total.unbounded {
        return Err(IntegrationError::Unbounded { cell });
    }

    let (upper_bound, lower_bound) = match integrand {
        Integrand::ConstantOne => {
            let vol = rational_pow(&grid.step, grid.dim);
            let up = Rational::from_integer(BigInt::from(total.inside + total.boundary)) * &vol * scale;
            let lo = Rational::from_integer(BigInt::from(total.inside)) * &vol * scale;
            (rational::to_f64_up(&up), rational::to_f64_down(&lo))
        }
        Integrand::BuchstabJ => {
            let s_up = rational::to_f64_up(scale);
            let s_lo = rational::to_f64_down(scale);
            (
                total.upper.value() * s_up * (1.0 + SUM_INFLATION),
                (total.lower.value() * s_lo * (1.0 - SUM_INFLATION)).max(0.0),
            )
        }
    };

    Ok(RiemannCertificate {
        region: region.name.clone(),
        integrand,
        step: grid.step.clone(),
        grid: grid.clone(),
        upper_bound,
        lower_bound,
        cells_inside: total.inside,
        cells_boundary: total.boundary,
        cells_visited: total.visited,
        scale_factor: scale.clone(),
        wall_time_ms: started.elapsed().as_millis() as u64,
    })
}

fn rational_pow(r: &Rational, k: usize) -> Rational {
    (0..k).fold(int(1), |acc, _| acc * r)
}

/// Writes one CSV row per cell that meets the region:
/// `u_lo_1..u_lo_k,classification,cell_sup`. Returns the number of rows.
pub fn dump_cells<W: Write>(
    region: &Region,
    integrand: Integrand,
    grid: &GridSpec,
    mut out: W,
) -> Result<u64, IntegrationError> {
    if region.dim != grid.dim {
        return Err(IntegrationError::DimensionMismatch { region: region.dim, grid: grid.dim });
    }
    let io = |e: std::io::Error| IntegrationError::Io(e.to_string());
    let compiled = Compiled::new(region, &grid.step);
    let descending = region.is_strictly_descending();
    let p = to_i128(grid.step.numer());
    let q = to_i128(grid.step.denom());
    let cell = BuchstabCell { p, q, q_over_p: q as f64 / p as f64 };
    let header: Vec<String> = (1..=grid.dim).map(|j| format!("u_lo_{j}")).collect();
    writeln!(out, "{},classification,cell_sup", header.join(",")).map_err(io)?;
    let mut rows = 0u64;
    let mut scratch = Vec::new();
    let mut failure = None;
    for row in grid.first[0]..grid.end[0] {
        for_each_cell(grid, descending, row, |idx| {
            if failure.is_some() {
                return;
            }
            let class = compiled.classify(idx, &mut scratch);
            if class == Class::Outside {
                return;
            }
            let sup = match integrand {
                Integrand::ConstantOne => Some(1.0),
                Integrand::BuchstabJ => cell.bounds(idx).map(|b| b.2),
            };
            let Some(sup) = sup else {
                failure = Some(IntegrationError::Unbounded { cell: idx.to_vec() });
                return;
            };
            let coords: Vec<String> = idx.iter().map(|&i| (i as f64 * p as f64 / q as f64).to_string()).collect();
            if let Err(e) = writeln!(out, "{},{},{}", coords.join(","), class.label(), sup) {
                failure = Some(io(e));
                return;
            }
            rows += 1;
        });
        if let Some(e) = failure.take() {
            return Err(e);
        }
    }
    Ok(rows)
}

/// `J₁ = ∫_{A₃*} ω((1 − u₁ − u₂)/u₂) du₁ du₂ / (u₁ u₂²)` with `ε = 0`.
pub fn compute_j1(params: &SieveParams, step: &Rational) -> Result<RiemannCertificate, IntegrationError> {
    let region = build_region(RegionName::A3Star, &params.with_epsilon(int(0)))?;
    let grid = GridSpec::for_region(&region, step.clone())?;
    upper_riemann(&region, Integrand::BuchstabJ, &grid)
}

/// `J₂`, either via the crude simplex-volume bound or the direct Buchstab
/// integrand over `A₂*` cut by the simplex (both with `ε = 0`).
pub fn compute_j2(params: &SieveParams, step: &Rational, mode: J2Mode) -> Result<RiemannCertificate, IntegrationError> {
    let params = params.with_epsilon(int(0));
    match mode {
        J2Mode::Crude => {
            let region = build_region(RegionName::J2Crude, &params)?;
            let grid = GridSpec::for_region(&region, step.clone())?;
            let scale = rational_pow(&(int(1) / &params.beta1), 5);
            upper_riemann_scaled(&region, Integrand::ConstantOne, &grid, &scale)
        }
        J2Mode::Full => {
            let region = build_region(RegionName::J2Full, &params)?;
            let grid = GridSpec::for_region(&region, step.clone())?;
            upper_riemann(&region, Integrand::BuchstabJ, &grid)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::buchstab::omega_upper;
    use crate::rational::ratio;
    use crate::regions::LinearConstraint;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_square() -> Region {
        Region {
            name: "unit".into(),
            dim: 2,
            bbox: vec![(int(0), int(1)); 2],
            clauses: vec![vec![
                LinearConstraint::new(2, &[(0, 1)], Sense::Ge, int(0)),
                LinearConstraint::new(2, &[(0, 1)], Sense::Le, int(1)),
                LinearConstraint::new(2, &[(1, 1)], Sense::Ge, int(0)),
                LinearConstraint::new(2, &[(1, 1)], Sense::Le, int(1)),
            ]],
        }
    }

    fn pool(threads: usize) -> rayon::ThreadPool {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap()
    }

    #[test]
    fn unit_box_volume_is_exact() {
        let r = unit_square();
        let grid = GridSpec::for_region(&r, ratio(1, 10)).unwrap();
        let cert = upper_riemann(&r, Integrand::ConstantOne, &grid).unwrap();
        assert_eq!(cert.upper_bound, 1.0);
        assert_eq!(cert.lower_bound, 1.0);
        assert_eq!(cert.cells_inside, 100);
        assert_eq!(cert.cells_boundary, 0);
    }

    #[test]
    fn grid_padding_and_errors() {
        let g = GridSpec::new(&[(ratio(21, 125), ratio(1, 2))], ratio(1, 100)).unwrap();
        assert_eq!((g.first[0], g.end[0]), (16, 50));
        assert_eq!(g.padded_box[0], (ratio(4, 25), ratio(1, 2)));
        assert!(matches!(
            GridSpec::new(&[(int(0), ratio(1, 4))], ratio(1, 2)),
            Err(IntegrationError::GridTooCoarse { .. })
        ));
        assert!(matches!(GridSpec::new(&[(int(0), int(1))], int(0)), Err(IntegrationError::InvalidStep(_))));
        let flat = GridSpec::new(&[(ratio(1, 5), ratio(1, 5))], ratio(1, 100)).unwrap();
        assert_eq!(flat.end[0] - flat.first[0], 1);
    }

    #[test]
    fn unbounded_integrand_is_reported() {
        let r = unit_square();
        let grid = GridSpec::for_region(&r, ratio(1, 10)).unwrap();
        assert!(matches!(upper_riemann(&r, Integrand::BuchstabJ, &grid), Err(IntegrationError::Unbounded { .. })));
    }

    #[test]
    fn descending_enumeration_skips_only_empty_cells() {
        // Pruned and unpruned enumeration classify the same cells.
        let region = build_region(RegionName::J2Crude, &SieveParams::default()).unwrap();
        let grid = GridSpec::for_region(&region, ratio(1, 100)).unwrap();
        let compiled = Compiled::new(&region, &grid.step);
        let mut scratch = Vec::new();
        let count = |descending: bool, scratch: &mut Vec<Status>| {
            let mut n = [0u64; 3];
            for row in grid.first[0]..grid.end[0] {
                for_each_cell(&grid, descending, row, |idx| match compiled.classify(idx, scratch) {
                    Class::Inside => n[0] += 1,
                    Class::Boundary => n[1] += 1,
                    Class::Outside => n[2] += 1,
                });
            }
            n
        };
        let pruned = count(true, &mut scratch);
        let full = count(false, &mut scratch);
        assert_eq!(pruned[..2], full[..2]);
        assert!(pruned[2] < full[2]);
    }

    #[test]
    fn integer_classification_matches_exact_box_relation() {
        use crate::regions::BoxRelation;
        let params = SieveParams::default();
        for name in [RegionName::A3Star, RegionName::A3, RegionName::J2Crude] {
            let region = build_region(name, &params).unwrap();
            let step = ratio(1, 40);
            let grid = GridSpec::for_region(&region, step.clone()).unwrap();
            let compiled = Compiled::new(&region, &step);
            let mut scratch = Vec::new();
            for row in grid.first[0]..grid.end[0] {
                for_each_cell(&grid, false, row, |idx| {
                    let cell: Vec<(Rational, Rational)> =
                        idx.iter().map(|&i| (int(i) * &step, int(i + 1) * &step)).collect();
                    let exact = region.box_relation(&cell).unwrap();
                    let fast = compiled.classify(idx, &mut scratch);
                    let expect = match exact {
                        BoxRelation::Inside => Class::Inside,
                        BoxRelation::Outside => Class::Outside,
                        BoxRelation::Boundary => Class::Boundary,
                    };
                    assert_eq!(fast, expect, "{name} {idx:?}");
                });
            }
        }
    }

    #[test]
    fn j1_refinement_is_monotone() {
        let p = SieveParams::default();
        let coarse = compute_j1(&p, &ratio(1, 500)).unwrap();
        let fine = compute_j1(&p, &ratio(1, 1000)).unwrap();
        let finer = compute_j1(&p, &ratio(1, 2000)).unwrap();
        assert!(fine.upper_bound <= coarse.upper_bound);
        assert!(finer.upper_bound <= fine.upper_bound);
        assert!(coarse.lower_bound <= fine.lower_bound && fine.lower_bound <= finer.lower_bound);
        assert!(finer.lower_bound <= finer.upper_bound);
        assert!(finer.upper_bound.is_finite() && finer.upper_bound > 0.9);
    }

    #[test]
    fn j1_encloses_monte_carlo_estimate() {
        let p = SieveParams::default();
        let cert = compute_j1(&p, &ratio(1, 2000)).unwrap();
        let region = build_region(RegionName::A3Star, &p).unwrap().to_float();
        let (lo, hi) = (0.168_f64, 0.5_f64);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 10_000_000u64;
        let mut acc = CompensatedSum::new();
        for _ in 0..n {
            let u1 = rng.gen_range(lo..hi);
            let u2 = rng.gen_range(lo..hi);
            if region.contains(&[u1, u2]) {
                acc.add(omega_upper((1.0 - u1 - u2) / u2) / (u1 * u2 * u2));
            }
        }
        let estimate = acc.value() / n as f64 * (hi - lo) * (hi - lo);
        assert!(cert.lower_bound < estimate && estimate < cert.upper_bound, "{cert:?} vs {estimate}");
        // Tight quadrature puts the integral at 0.98799.
        assert!((estimate - 0.98799).abs() < 5e-3, "{estimate}");
    }

    #[test]
    fn omega_argument_stays_bounded_on_inside_cells() {
        let region = build_region(RegionName::A3Star, &SieveParams::default()).unwrap();
        let grid = GridSpec::for_region(&region, ratio(1, 400)).unwrap();
        let compiled = Compiled::new(&region, &grid.step);
        let mut scratch = Vec::new();
        for row in grid.first[0]..grid.end[0] {
            for_each_cell(&grid, true, row, |idx| {
                if compiled.classify(idx, &mut scratch) == Class::Inside {
                    for (i, j) in
                        [(idx[0], idx[1]), (idx[0] + 1, idx[1] + 1), (idx[0], idx[1] + 1), (idx[0] + 1, idx[1])]
                    {
                        let (u1, u2) = (i as f64 / 400.0, j as f64 / 400.0);
                        let arg = (1.0 - u1 - u2) / u2;
                        assert!((0.0..=6.0).contains(&arg), "{idx:?}");
                    }
                }
            });
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let p = SieveParams::default();
        let step = ratio(1, 1000);
        let one = pool(1).install(|| compute_j1(&p, &step).unwrap());
        let many = pool(8).install(|| compute_j1(&p, &step).unwrap());
        assert_eq!(one.to_json(), many.to_json());
        assert_eq!(one.upper_bound.to_bits(), many.upper_bound.to_bits());
        let c1 = pool(1).install(|| compute_j2(&p, &ratio(1, 200), J2Mode::Crude).unwrap());
        let c8 = pool(8).install(|| compute_j2(&p, &ratio(1, 200), J2Mode::Crude).unwrap());
        assert_eq!(c1.to_json(), c8.to_json());
    }

    #[test]
    fn j2_crude_encloses_exact_volume() {
        // Shifting by β₁ and taking successive differences maps the region
        // onto {w ≥ 0, w₁+2w₂+3w₃+5w₄ ≤ 1 − 5β₁}, of volume (1 − 5β₁)⁴/720
        // = 16/17578125; so β₁⁻⁵·vol = 0.0068014...
        let p = SieveParams::default();
        let exact = ratio(16, 17_578_125) * rational_pow(&ratio(125, 21), 5);
        let exact = rational::to_f64_up(&exact);
        assert!((exact - 0.006_801_4).abs() < 1e-7);
        let coarse = compute_j2(&p, &ratio(1, 200), J2Mode::Crude).unwrap();
        let fine = compute_j2(&p, &ratio(1, 500), J2Mode::Crude).unwrap();
        assert!(coarse.lower_bound <= exact && exact <= coarse.upper_bound);
        assert!(fine.lower_bound <= exact && exact <= fine.upper_bound);
        assert!(fine.upper_bound <= coarse.upper_bound);
        assert!(coarse.upper_bound < 0.02);
        assert_eq!(fine.scale_factor, rational_pow(&ratio(125, 21), 5));
    }

    #[test]
    fn j2_crude_vanishes_for_tight_beta1() {
        let p = SieveParams { beta1: ratio(1, 5), beta2: ratio(1, 5), beta: ratio(1, 5), ..SieveParams::default() };
        let a = compute_j2(&p, &ratio(1, 100), J2Mode::Crude).unwrap();
        let b = compute_j2(&p, &ratio(1, 1000), J2Mode::Crude).unwrap();
        assert!(b.upper_bound < a.upper_bound);
        assert!(b.upper_bound < 1e-6);
        assert_eq!(b.lower_bound, 0.0);
    }

    #[test]
    fn j2_full_is_below_crude() {
        let p = SieveParams::default();
        let full = compute_j2(&p, &ratio(1, 200), J2Mode::Full).unwrap();
        let crude = compute_j2(&p, &ratio(1, 200), J2Mode::Crude).unwrap();
        assert!(full.upper_bound <= crude.upper_bound + 1e-12, "{} vs {}", full.upper_bound, crude.upper_bound);
        assert!(full.lower_bound <= full.upper_bound);
    }

    #[test]
    fn degenerate_betas_still_integrate() {
        let p = SieveParams { beta1: ratio(1, 4), beta2: ratio(1, 4), beta: ratio(1, 4), ..SieveParams::default() };
        let cert = compute_j1(&p, &ratio(1, 500)).unwrap();
        assert!(cert.upper_bound.is_finite());
        assert!(cert.lower_bound <= cert.upper_bound);
    }

    #[test]
    fn certificate_json_excludes_timing() {
        let cert = compute_j1(&SieveParams::default(), &ratio(1, 200)).unwrap();
        let json = cert.to_json();
        assert!(!json.contains("wall_time"));
        assert!(json.contains("\"step\": \"1/200\""));
        let back: RiemannCertificate = serde_json::from_str(&json).unwrap();
        assert_eq!(back.upper_bound.to_bits(), cert.upper_bound.to_bits());
    }

    #[test]
    fn cell_dump_lists_non_outside_cells() {
        let region = build_region(RegionName::A3Star, &SieveParams::default()).unwrap();
        let grid = GridSpec::for_region(&region, ratio(1, 50)).unwrap();
        let cert = upper_riemann(&region, Integrand::BuchstabJ, &grid).unwrap();
        let mut buf = Vec::new();
        let rows = dump_cells(&region, Integrand::BuchstabJ, &grid, &mut buf).unwrap();
        assert_eq!(rows, cert.cells_inside + cert.cells_boundary);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("u_lo_1,u_lo_2,classification,cell_sup\n"));
        assert_eq!(text.lines().count() as u64, rows + 1);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]

        #[test]
        fn sums_bracket_exact_triangle_area(num in 1i64..=40, n in 5i64..80) {
            // {u ∈ [0,1]², u1 + u2 ≤ t}, area t²/2 for t ≤ 1.
            let t = ratio(num, 40);
            let mut r = unit_square();
            r.clauses[0].push(LinearConstraint::new(2, &[(0, 1), (1, 1)], Sense::Le, t.clone()));
            let grid = GridSpec::for_region(&r, ratio(1, n)).unwrap();
            let cert = upper_riemann(&r, Integrand::ConstantOne, &grid).unwrap();
            let area = crate::rational::to_f64_down(&(&t * &t / int(2)));
            proptest::prop_assert!(cert.lower_bound <= area && area <= cert.upper_bound,
                "{} <= {} <= {}", cert.lower_bound, area, cert.upper_bound);
        }
    }
}
