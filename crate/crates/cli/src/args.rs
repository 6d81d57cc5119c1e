use std::path::PathBuf;

use almostprime_core::rational::parse_rational;
use almostprime_core::sieve::Sample;
use almostprime_core::{J2Mode, Rational, RegionName, SieveParams};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "almostprime",
    version,
    about = "Certified computations and desk-scale scans for products of distinct primes in short intervals"
)]
pub struct Cli {
    /// Directory receiving every artifact.
    #[arg(long, global = true, default_value = "out")]
    pub output_dir: PathBuf,

    /// Format of tabular artifacts. Certificates are always JSON.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Suppress the summary lines on stdout (artifacts are still written).
    #[arg(long, short, global = true)]
    pub quiet: bool,

    /// Worker threads for cell and segment evaluation (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact verification of the exponent inequalities and the combined run.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Certified upper Riemann sums for J1 and J2.
    #[command(subcommand)]
    Integrate(IntegrateCmd),
    /// Buchstab's function: closed forms, delay-equation table, plot data.
    #[command(subcommand)]
    Buchstab(BuchstabCmd),
    /// Counts E_k numbers in [x, x + ceil(ln(x)^c)] for sampled x.
    Scan(ScanArgs),
    /// Density of E_k numbers in [X, 2X).
    Density(DensityArgs),
    /// Brun pure-sieve weights and the sandwich check.
    #[command(subcommand)]
    Brun(BrunCmd),
    /// Counts of n <= x with exactly l distinct prime factors.
    PiEll(PiEllArgs),
    /// Exact region descriptions.
    #[command(subcommand)]
    Region(RegionCmd),
}

pub fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn sample(s: &str) -> Result<Sample, String> {
    s.parse().map_err(|e: almostprime_core::SieveError| e.to_string())
}

fn range(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected LO:HI, got {s:?}"))?;
    let lo = a.trim().parse().map_err(|_| format!("bad lower end in {s:?}"))?;
    let hi = b.trim().parse().map_err(|_| format!("bad upper end in {s:?}"))?;
    Ok((lo, hi))
}

fn rational_range(s: &str) -> Result<(Rational, Rational), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected LO:HI, got {s:?}"))?;
    Ok((rational(a)?, rational(b)?))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntSet(pub Vec<u32>);

/// `4..12`, `4..=12`, `4-12` or `4,5,7`.
pub fn int_set(s: &str) -> Result<IntSet, String> {
    let bad = || format!("cannot parse {s:?} as a set of integers");
    let t = s.trim();
    let bounds = t.split_once("..=").or_else(|| t.split_once("..")).or_else(|| t.split_once('-'));
    let out: Vec<u32> = match bounds {
        Some((a, b)) => {
            let a: u32 = a.trim().parse().map_err(|_| bad())?;
            let b: u32 = b.trim().parse().map_err(|_| bad())?;
            (a..=b).collect()
        }
        None => t.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?,
    };
    if out.is_empty() {
        return Err(bad());
    }
    Ok(IntSet(out))
}

// Overrides for the sieve parameters; unspecified fields keep their defaults.
#[derive(Args, Debug, Clone)]
pub struct ParamArgs {
    /// Override beta1 (fraction or decimal).
    #[arg(long, value_parser = rational)]
    pub beta1: Option<Rational>,
    /// Override beta2.
    #[arg(long, value_parser = rational)]
    pub beta2: Option<Rational>,
    /// Override beta.
    #[arg(long, value_parser = rational)]
    pub beta: Option<Rational>,
    /// Override epsilon (0 <= epsilon < 1/8).
    #[arg(long, value_parser = rational)]
    pub epsilon: Option<Rational>,
    /// Large-values threshold, e.g. 1/5.02.
    #[arg(long, value_parser = rational)]
    pub alpha2: Option<Rational>,
}

impl ParamArgs {
    pub fn resolve(&self) -> anyhow::Result<SieveParams> {
        let d = SieveParams::default();
        let p = SieveParams {
            beta1: self.beta1.clone().unwrap_or(d.beta1),
            beta2: self.beta2.clone().unwrap_or(d.beta2),
            beta: self.beta.clone().unwrap_or(d.beta),
            epsilon: self.epsilon.clone().unwrap_or(d.epsilon),
            alpha2: self.alpha2.clone().unwrap_or(d.alpha2),
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Subcommand, Debug)]
pub enum VerifyCmd {
    /// R-bar(nu) <= target(nu) - delta at every breakpoint of the type-II range.
    Exponents(ExponentArgs),
    /// The crude bound used below nu = 1/20.
    SmallNu(SmallNuArgs),
    /// Exponents, small-nu, J1, J2 and J1 + J2 < 0.995 in one run.
    All(AllArgs),
}

#[derive(Args, Debug)]
pub struct ExponentArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_parser = rational, default_value = "1/10000")]
    pub delta: Rational,
    #[arg(long, value_parser = int_set, default_value = "3")]
    pub k: IntSet,
    #[arg(long, value_parser = int_set, default_value = "4..=12")]
    pub ell: IntSet,
    /// Replace the default [1/20, beta1] and [beta2, beta] by LO:HI intervals.
    #[arg(long = "interval", value_parser = rational_range)]
    pub intervals: Vec<(Rational, Rational)>,
}

#[derive(Args, Debug)]
pub struct SmallNuArgs {
    #[arg(long, value_parser = rational, default_value = "1/5.02")]
    pub alpha2: Rational,
    #[arg(long, value_parser = rational, default_value = "1/20")]
    pub nu_max: Rational,
    #[arg(long, value_parser = rational, default_value = "1/10000")]
    pub delta: Rational,
}

#[derive(Args, Debug)]
pub struct AllArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_parser = rational, default_value = "1/10000")]
    pub delta: Rational,
    #[arg(long, value_parser = rational, default_value = "1/4000")]
    pub j1_step: Rational,
    /// Finer step tried when J1 misses its target at --j1-step.
    #[arg(long, value_parser = rational, default_value = "1/8000")]
    pub j1_refine: Rational,
    #[arg(long, value_parser = rational, default_value = "1/500")]
    pub j2_step: Rational,
    #[arg(long, default_value = "crude", value_parser = j2_mode)]
    pub j2_mode: J2Mode,
}

fn j2_mode(s: &str) -> Result<J2Mode, String> {
    s.parse().map_err(|e: almostprime_core::IntegrationError| e.to_string())
}

#[derive(Subcommand, Debug)]
pub enum IntegrateCmd {
    /// Upper sum of the J1 integrand over A3*.
    J1(IntegrateArgs),
    /// Upper sum for J2: crude volume bound or the full integrand over A2*.
    J2(J2Args),
}

#[derive(Args, Debug)]
pub struct IntegrateArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_parser = rational, default_value = "1/4000")]
    pub step: Rational,
    #[arg(long, value_parser = rational, default_value = "0.988")]
    pub target: Rational,
    /// Also write the integration region as JSON.
    #[arg(long)]
    pub dump_region: bool,
    /// Also write every non-outside cell as CSV.
    #[arg(long)]
    pub dump_cells: bool,
}

#[derive(Args, Debug)]
pub struct J2Args {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_parser = rational, default_value = "1/500")]
    pub step: Rational,
    #[arg(long, value_parser = rational, default_value = "0.007")]
    pub target: Rational,
    #[arg(long, default_value = "crude", value_parser = j2_mode)]
    pub mode: J2Mode,
    #[arg(long)]
    pub dump_region: bool,
    #[arg(long)]
    pub dump_cells: bool,
}

#[derive(Subcommand, Debug)]
pub enum BuchstabCmd {
    /// Closed form and certified upper approximant at the given points.
    Eval {
        #[arg(long, value_delimiter = ',', required = true)]
        u: Vec<f64>,
    },
    /// Integrates the delay equation on [1, u_max].
    Dde {
        #[arg(long, default_value_t = 6.0)]
        u_max: f64,
        #[arg(long, default_value_t = 1e-4)]
        step: f64,
    },
    /// Plot data: closed form, upper approximant and delay-equation values.
    Table {
        #[arg(long, default_value_t = 1.0)]
        u_min: f64,
        #[arg(long, default_value_t = 6.0)]
        u_max: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
}

#[derive(Args, Debug)]
pub struct ConstraintArgs {
    /// Number of distinct prime factors.
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    /// Inclusive prime-size range LO:HI for one distinct factor (repeatable).
    #[arg(long = "range", value_parser = range)]
    pub ranges: Vec<(u64, u64)>,
    /// Use the single range [P1, P1^(1+eps)] with P1 = ln(X)^a.
    #[arg(long, value_name = "A", conflicts_with_all = ["ranges", "ladder"])]
    pub p1_exponent: Option<f64>,
    /// Use the full k-1 range ladder for the given X.
    #[arg(long, conflicts_with = "ranges")]
    pub ladder: bool,
    /// Width exponent of the prime-size ranges.
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    /// Upper end of the range of interval starts.
    #[arg(long = "X", alias = "x-max")]
    pub x_max: u64,
    /// Interval length exponent: h = ceil(ln(x)^c).
    #[arg(long)]
    pub c: f64,
    #[command(flatten)]
    pub constraint: ConstraintArgs,
    /// all | stride:S | random:N:SEED (ALMOSTPRIME_SEED overrides SEED).
    #[arg(long, value_parser = sample, default_value = "all")]
    pub sample: Sample,
    /// Also write one CSV row (x, h, count) per sampled x.
    #[arg(long)]
    pub rows: bool,
}

#[derive(Args, Debug)]
pub struct DensityArgs {
    /// Counts E_k numbers in [X, 2X).
    #[arg(long = "X", alias = "x-max")]
    pub x_max: u64,
    #[command(flatten)]
    pub constraint: ConstraintArgs,
}

#[derive(Subcommand, Debug)]
pub enum BrunCmd {
    /// Upper and lower weights for the primes below w and truncation R.
    Weights {
        #[arg(long)]
        w: u64,
        #[arg(long = "R")]
        r: u32,
    },
    /// Checks theta-minus <= indicator <= theta-plus for n in [lo, hi].
    Sandwich {
        #[arg(long)]
        w: u64,
        #[arg(long = "R")]
        r: u32,
        #[arg(long, default_value_t = 2)]
        lo: u64,
        #[arg(long, default_value_t = 100_000)]
        hi: u64,
    },
}

#[derive(Args, Debug)]
pub struct PiEllArgs {
    /// Upper end of the count.
    #[arg(long)]
    pub x: u64,
    /// Report only this l (default: every l with a nonzero count).
    #[arg(long)]
    pub ell: Option<u32>,
}

#[derive(Subcommand, Debug)]
pub enum RegionCmd {
    /// Writes the named region as JSON.
    Dump {
        #[arg(long, value_parser = region_name)]
        name: RegionName,
        #[command(flatten)]
        params: ParamArgs,
    },
}

fn region_name(s: &str) -> Result<RegionName, String> {
    s.parse().map_err(|e: almostprime_core::RegionError| e.to_string())
}
