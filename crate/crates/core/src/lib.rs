//! Verification toolkit for E_k numbers (squarefree integers with exactly `k`
//! prime factors) in short intervals.
//!
//! The crate is split along the computations it certifies:
//!
//! * [`buchstab`]: Buchstab's function, its piecewise upper approximant and
//!   certified suprema over intervals.
//! * [`regions`]: exact linear-constraint regions in exponent space.
//! * [`integrator`]: rigorous upper Riemann sums of Buchstab integrals over
//!   those regions.
//! * [`exponents`]: exact rational verification of the type-II exponent
//!   inequality and the admissible exponent `a` (hence `c = a + 1`).
//! * [`sieve`]: segmented factorization sieve, E_k scans over short
//!   intervals, Brun pure-sieve weights and `π_ℓ(x)` counts.

pub mod buchstab;
pub mod exponents;
pub mod integrator;
pub mod rational;
pub mod regions;
pub mod sieve;
pub mod summation;

pub use buchstab::{omega_dde, omega_exact, omega_sup, omega_upper, BuchstabBound, BuchstabError};
pub use exponents::{
    jutila_r, jutila_rbar, max_admissible_a, sigma, sufficiency_intervals, target_bound, verify_small_nu, verify_type2,
    verify_type2_on, witness_map, ExponentCheck, ExponentError, ExponentReport, JutilaParams, WitnessPiece,
};
pub use integrator::{
    compute_j1, compute_j2, dump_cells, upper_riemann, upper_riemann_scaled, GridSpec, Integrand, IntegrationError,
    J2Mode, RiemannCertificate,
};
pub use rational::{parse_rational, Rational};
pub use regions::{build_region, BoxRelation, LinearConstraint, Region, RegionError, RegionName, Sense, SieveParams};
pub use sieve::{
    brun_weights, dyadic_density, is_ek, pi_ell, pi_ell_table, scan_intervals, sieve_profiles, sieve_segment,
    theta_sandwich, BrunWeights, EkConstraint, FactorProfile, Sample, SandwichReport, ScanReport, SieveError,
};
pub use summation::CompensatedSum;
