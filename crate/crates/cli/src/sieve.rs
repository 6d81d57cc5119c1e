use std::fs::File;
use std::io::BufWriter;

use almostprime_core::sieve::{
    brun_weights, dyadic_density, ladder_ranges, p1_range, pi_ell_table, scan_intervals_with, theta_sandwich,
    EkConstraint, Sample,
};
use anyhow::{bail, Context};
use serde::Serialize;
use serde_json::json;

use crate::args::{BrunCmd, ConstraintArgs, DensityArgs, Format, PiEllArgs, ScanArgs};
use crate::output::Output;

pub const SEED_VAR: &str = "ALMOSTPRIME_SEED";

fn constraint(args: &ConstraintArgs, x_max: u64, out: &Output) -> anyhow::Result<EkConstraint> {
    let ranges = if let Some(a) = args.p1_exponent {
        let (range, h) = p1_range(x_max, a, args.eps)?;
        say!(out, "P1 range [{}, {}], minimal interval length P1 ln X = {h}", range.0, range.1);
        vec![range]
    } else if args.ladder {
        ladder_ranges(x_max, args.eps, args.k)?
    } else {
        args.ranges.clone()
    };
    Ok(EkConstraint::with_ranges(args.k, ranges)?)
}

fn seeded(sample: &Sample) -> anyhow::Result<Sample> {
    let Ok(raw) = std::env::var(SEED_VAR) else {
        return Ok(sample.clone());
    };
    let seed: u64 = raw.trim().parse().with_context(|| format!("{SEED_VAR}={raw:?} is not an unsigned integer"))?;
    Ok(match *sample {
        Sample::Random { n, .. } => Sample::Random { n, seed },
        ref other => other.clone(),
    })
}

pub fn scan(args: &ScanArgs, out: &Output) -> anyhow::Result<bool> {
    let c = constraint(&args.constraint, args.x_max, out)?;
    let sample = seeded(&args.sample)?;
    let mut rows = if args.rows {
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(out.path("scan_rows.csv"))?));
        w.write_record(["x", "h", "count"])?;
        Some(w)
    } else {
        None
    };
    let mut row_error = None;
    let report = scan_intervals_with(args.x_max, args.c, &c, &sample, |x, h, n| {
        if let Some(w) = rows.as_mut() {
            if let Err(e) = w.serialize((x, h, n)) {
                row_error.get_or_insert(e);
            }
        }
    })?;
    if let Some(e) = row_error {
        return Err(e.into());
    }
    if let Some(mut w) = rows {
        w.flush()?;
    }
    out.json("scan.json", &report)?;
    if out.format == Format::Csv {
        let primary = report.histogram.iter().map(|&(count, freq)| ("1..X", count, freq));
        let dyadic = report.dyadic.histogram.iter().map(|&(count, freq)| ("X..2X", count, freq));
        out.csv("scan_histogram.csv", &["convention", "count", "frequency"], primary.chain(dyadic))?;
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    say!(
        out,
        "scan: X = {}, c = {}, k = {}: {} of {} sampled x in [1, X] exceptional ({:.6e}); [X, 2X): {} of {} ({:.6e})",
        report.x_max,
        report.c,
        report.k,
        report.exceptional,
        report.x_sampled,
        report.exceptional_fraction,
        report.dyadic.exceptional,
        report.dyadic.x_sampled,
        report.dyadic.exceptional_fraction
    );
    Ok(true)
}

pub fn density(args: &DensityArgs, out: &Output) -> anyhow::Result<bool> {
    let c = constraint(&args.constraint, args.x_max, out)?;
    let d = dyadic_density(args.x_max, &c)?;
    let ln = (args.x_max as f64).ln();
    out.json(
        "density.json",
        &json!({
            "X": args.x_max,
            "k": c.k,
            "constraint": c,
            "count": (d * args.x_max as f64).round() as u64,
            "density": d,
            "inverse_log": 1.0 / ln,
        }),
    )?;
    say!(out, "density: #E_{} in [{}, {}) / X = {d} (1/ln X = {:.6})", c.k, args.x_max, 2 * args.x_max, 1.0 / ln);
    Ok(true)
}

#[derive(Serialize)]
struct WeightRow {
    d: u64,
    nu: u32,
    lambda_plus: i8,
    lambda_minus: i8,
}

pub fn brun(cmd: &BrunCmd, out: &Output) -> anyhow::Result<bool> {
    match *cmd {
        BrunCmd::Weights { w, r } => {
            let weights = brun_weights(w, r)?;
            out.json("brun_weights.json", &weights)?;
            if out.format == Format::Csv {
                let rows = weights.minus.iter().map(|(&d, &mu)| WeightRow {
                    d,
                    nu: weights.primes.iter().filter(|&&p| d % p == 0).count() as u32,
                    lambda_plus: weights.plus.get(&d).copied().unwrap_or(0),
                    lambda_minus: mu,
                });
                out.csv("brun_weights.csv", &["d", "nu", "lambda_plus", "lambda_minus"], rows)?;
            }
            say!(
                out,
                "brun weights: w = {w}, R = {r}: {} upper and {} lower weights",
                weights.plus.len(),
                weights.minus.len()
            );
            Ok(true)
        }
        BrunCmd::Sandwich { w, r, lo, hi } => {
            let weights = brun_weights(w, r)?;
            let report = theta_sandwich(lo, hi, &weights)?;
            out.json("brun_sandwich.json", &report)?;
            say!(
                out,
                "brun sandwich: {}  {} values of n in [{lo}, {hi}], {} violations (w = {w}, R = {r})",
                if report.ok { "PASS" } else { "FAIL" },
                report.checked,
                report.violation_count
            );
            Ok(report.ok)
        }
    }
}

#[derive(Serialize)]
struct PiRow {
    ell: u32,
    count: u64,
    /// `x/ln x · (ln ln x)^{ℓ−1}/(ℓ−1)!`, the Landau main term.
    landau: f64,
}

pub fn pi_ell(args: &PiEllArgs, out: &Output) -> anyhow::Result<bool> {
    if args.x < 3 {
        bail!("x must be at least 3");
    }
    let table = pi_ell_table(args.x)?;
    let x = args.x as f64;
    let (lx, llx) = (x.ln(), x.ln().ln());
    let landau = |ell: u32| {
        let fact: f64 = (1..ell).map(f64::from).product();
        x / lx * llx.powi(ell as i32 - 1) / fact
    };
    let rows: Vec<PiRow> = match args.ell {
        Some(ell) => vec![PiRow { ell, count: table.get(ell as usize).copied().unwrap_or(0), landau: landau(ell) }],
        None => {
            (1..table.len() as u32).map(|ell| PiRow { ell, count: table[ell as usize], landau: landau(ell) }).collect()
        }
    };
    let total: u64 = table.iter().sum();
    out.json("pi_ell.json", &json!({ "x": args.x, "total": total, "counts": rows }))?;
    if out.format == Format::Csv {
        out.csv("pi_ell.csv", &["ell", "count", "landau"], &rows)?;
    }
    for r in &rows {
        say!(out, "pi_{}({}) = {}", r.ell, args.x, r.count);
    }
    Ok(true)
}
