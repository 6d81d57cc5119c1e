use std::fs::File;
use std::io::BufWriter;

use almostprime_core::exponents::{
    max_admissible_a, printed_intervals, sufficiency_intervals, type2_intervals, verify_small_nu, verify_type2_on,
    witness_map, DEFAULT_ELL, DEFAULT_K,
};
use almostprime_core::rational::{fmt_rational, int, ratio, to_f64_down, to_f64_up, PQ};
use almostprime_core::{
    build_region, compute_j1, compute_j2, dump_cells, ExponentReport, GridSpec, Integrand, J2Mode, Rational,
    RegionName, RiemannCertificate, SieveParams,
};
use serde::Serialize;
use serde_json::json;

use crate::args::{AllArgs, ExponentArgs, Format, IntegrateArgs, J2Args, SmallNuArgs};
use crate::output::Output;

/// Bound required of `J₁ + J₂`.
const COMBINED_TARGET: (i64, i64) = (995, 1000);

#[derive(Serialize)]
struct CheckRow {
    nu: String,
    nu_approx: f64,
    lhs: String,
    rhs: String,
    margin: String,
    margin_approx: f64,
    witness_k: Option<u32>,
    witness_ell: Option<u32>,
    condition: Option<String>,
    ok: bool,
}

fn write_report(out: &Output, stem: &str, report: &ExponentReport) -> anyhow::Result<()> {
    out.text(&format!("{stem}.json"), &report.to_json())?;
    if out.format == Format::Csv {
        let rows = report.checks.iter().map(|c| CheckRow {
            nu: fmt_rational(&c.nu),
            nu_approx: to_f64_down(&c.nu),
            lhs: fmt_rational(&c.lhs),
            rhs: fmt_rational(&c.rhs),
            margin: fmt_rational(&c.margin),
            margin_approx: to_f64_down(&c.margin),
            witness_k: c.witness_k,
            witness_ell: c.witness_ell,
            condition: c.condition.clone(),
            ok: c.ok,
        });
        let header =
            ["nu", "nu_approx", "lhs", "rhs", "margin", "margin_approx", "witness_k", "witness_ell", "condition", "ok"];
        out.csv(&format!("{stem}.csv"), &header, rows)?;
    }
    Ok(())
}

fn summarize(out: &Output, name: &str, report: &ExponentReport) {
    let verdict = if report.pass { "PASS" } else { "FAIL" };
    match report.worst() {
        Some(w) => say!(
            out,
            "{name}: {verdict}  {} checks, smallest margin {} (~{:.6e}) at nu = {} (delta = {})",
            report.checks.len(),
            PQ(&w.margin),
            to_f64_down(&w.margin),
            PQ(&w.nu),
            PQ(&report.delta)
        ),
        None => say!(out, "{name}: {verdict}  no checks"),
    }
}

pub fn exponents(args: &ExponentArgs, out: &Output) -> anyhow::Result<bool> {
    let params = args.params.resolve()?;
    let intervals = if args.intervals.is_empty() { type2_intervals(&params) } else { args.intervals.clone() };
    let (k, ell) = (&args.k.0, &args.ell.0);
    let report = verify_type2_on(&params.alpha2, &intervals, k, ell, &args.delta)?;
    write_report(out, "exponents", &report)?;
    summarize(out, "exponents", &report);

    // The union as printed next to the claim, for comparison only.
    let printed = verify_type2_on(&params.alpha2, &printed_intervals(&params), k, ell, &args.delta)?;
    write_report(out, "exponents_printed", &printed)?;
    summarize(out, "exponents (printed union, informational)", &printed);

    let (lo, hi) = intervals
        .iter()
        .fold((intervals[0].0.clone(), intervals[0].1.clone()), |(a, b), (c, d)| (a.min(c.clone()), b.max(d.clone())));
    let map = witness_map(&params.alpha2, &lo, &hi, k, ell)?;
    let sufficiency: Vec<_> = k
        .iter()
        .flat_map(|&kk| ell.iter().map(move |&l| (kk, l)))
        .map(|(kk, l)| {
            let iv: Vec<[String; 2]> = sufficiency_intervals(&params.alpha2, kk, l)
                .iter()
                .map(|(a, b)| [fmt_rational(a), fmt_rational(b)])
                .collect();
            json!({ "k": kk, "ell": l, "intervals": iv })
        })
        .collect();
    out.json(
        "witness.json",
        &json!({ "alpha2": fmt_rational(&params.alpha2), "witness_map": map, "sufficiency": sufficiency }),
    )?;
    Ok(report.pass)
}

pub fn small_nu(args: &SmallNuArgs, out: &Output) -> anyhow::Result<bool> {
    let report = verify_small_nu(&args.alpha2, &args.nu_max, &args.delta)?;
    write_report(out, "small_nu", &report)?;
    summarize(out, "small-nu", &report);
    Ok(report.pass)
}

/// A certificate together with the bound it is meant to establish.
#[derive(Serialize)]
struct Targeted<'a> {
    #[serde(flatten)]
    certificate: &'a RiemannCertificate,
    #[serde(with = "almostprime_core::rational::serde_pq")]
    target: Rational,
    meets_target: bool,
}

fn below(value: f64, target: &Rational) -> bool {
    Rational::from_float(value).is_some_and(|v| &v < target)
}

fn write_certificate(out: &Output, stem: &str, cert: &RiemannCertificate, target: &Rational) -> anyhow::Result<bool> {
    let meets_target = below(cert.upper_bound, target);
    out.json(&format!("{stem}.json"), &Targeted { certificate: cert, target: target.clone(), meets_target })?;
    out.timing(stem, cert.wall_time_ms)?;
    say!(
        out,
        "{stem}: {}  upper_bound = {:.9} (target < {}), lower_bound = {:.9}, step = {}, {} inside + {} boundary cells",
        if meets_target { "PASS" } else { "FAIL" },
        cert.upper_bound,
        to_f64_up(target),
        cert.lower_bound,
        PQ(&cert.step),
        cert.cells_inside,
        cert.cells_boundary
    );
    Ok(meets_target)
}

#[allow(clippy::too_many_arguments)]
fn dump_extras(
    out: &Output,
    stem: &str,
    name: RegionName,
    params: &SieveParams,
    integrand: Integrand,
    step: &Rational,
    region: bool,
    cells: bool,
) -> anyhow::Result<()> {
    if !region && !cells {
        return Ok(());
    }
    let r = build_region(name, &params.with_epsilon(int(0)))?;
    if region {
        out.text(&format!("region_{}.json", name.as_str()), &r.to_json())?;
    }
    if cells {
        let grid = GridSpec::for_region(&r, step.clone())?;
        let path = out.path(&format!("{stem}_cells.csv"));
        let rows = dump_cells(&r, integrand, &grid, BufWriter::new(File::create(&path)?))?;
        say!(out, "{stem}: wrote {rows} cells to {}", path.display());
    }
    Ok(())
}

pub fn integrate_j1(args: &IntegrateArgs, out: &Output) -> anyhow::Result<bool> {
    let params = args.params.resolve()?;
    let cert = compute_j1(&params, &args.step)?;
    let ok = write_certificate(out, "j1", &cert, &args.target)?;
    dump_extras(
        out,
        "j1",
        RegionName::A3Star,
        &params,
        Integrand::BuchstabJ,
        &args.step,
        args.dump_region,
        args.dump_cells,
    )?;
    Ok(ok)
}

fn j2_stem(mode: J2Mode) -> &'static str {
    match mode {
        J2Mode::Crude => "j2_crude",
        J2Mode::Full => "j2_full",
    }
}

pub fn integrate_j2(args: &J2Args, out: &Output) -> anyhow::Result<bool> {
    let params = args.params.resolve()?;
    let cert = compute_j2(&params, &args.step, args.mode)?;
    let stem = j2_stem(args.mode);
    let ok = write_certificate(out, stem, &cert, &args.target)?;
    let (name, integrand) = match args.mode {
        J2Mode::Crude => (RegionName::J2Crude, Integrand::ConstantOne),
        J2Mode::Full => (RegionName::J2Full, Integrand::BuchstabJ),
    };
    dump_extras(out, stem, name, &params, integrand, &args.step, args.dump_region, args.dump_cells)?;
    Ok(ok)
}

/// The whole chain behind `c = 3.51`: exponents, small-ν, `J₁`, `J₂` and
/// `J₁ + J₂ < 0.995`. The admissible-`a` search is reported alongside but
/// does not decide the exit code.
pub fn all(args: &AllArgs, out: &Output) -> anyhow::Result<bool> {
    let params = args.params.resolve()?;

    let report = verify_type2_on(&params.alpha2, &type2_intervals(&params), &DEFAULT_K, &DEFAULT_ELL, &args.delta)?;
    write_report(out, "exponents", &report)?;
    summarize(out, "exponents", &report);

    let small = verify_small_nu(&params.alpha2, &ratio(1, 20), &args.delta)?;
    write_report(out, "small_nu", &small)?;
    summarize(out, "small-nu", &small);

    let j1_target = ratio(988, 1000);
    let mut j1 = compute_j1(&params, &args.j1_step)?;
    let mut refined = false;
    if !below(j1.upper_bound, &j1_target) && args.j1_refine < args.j1_step {
        say!(
            out,
            "j1: upper_bound {:.9} at step {} misses the target; refining to {}",
            j1.upper_bound,
            PQ(&args.j1_step),
            PQ(&args.j1_refine)
        );
        j1 = compute_j1(&params, &args.j1_refine)?;
        refined = true;
    }
    let j1_ok = write_certificate(out, "j1", &j1, &j1_target)?;

    let j2_target = ratio(7, 1000);
    let j2 = compute_j2(&params, &args.j2_step, args.j2_mode)?;
    let j2_ok = write_certificate(out, j2_stem(args.j2_mode), &j2, &j2_target)?;

    let combined_target = ratio(COMBINED_TARGET.0, COMBINED_TARGET.1);
    // Sum exactly so the comparison stays rigorous.
    let exact = |v: f64| Rational::from_float(v).unwrap_or_else(|| int(i64::MAX));
    let combined = exact(j1.upper_bound) + exact(j2.upper_bound);
    let combined_ok = combined < combined_target;
    let combined_up = to_f64_up(&combined);
    say!(
        out,
        "combined: {}  J1 + J2 <= {:.9} (target < {})",
        if combined_ok { "PASS" } else { "FAIL" },
        combined_up,
        to_f64_up(&combined_target)
    );

    let a = max_admissible_a(&params, &args.delta).ok();
    if let Some(a) = &a {
        say!(
            out,
            "headline: smallest admissible a = {} (~{:.4}), c = a + 1 = {:.4}",
            PQ(a),
            to_f64_up(a),
            to_f64_up(a) + 1.0
        );
    }
    let pass = report.pass && small.pass && j1_ok && j2_ok && combined_ok;
    let summary = json!({
        "params": params,
        "delta": fmt_rational(&args.delta),
        "exponents": { "pass": report.pass, "worst_margin": report.worst().map(|w| fmt_rational(&w.margin)) },
        "small_nu": { "pass": small.pass },
        "j1": { "step": fmt_rational(&j1.step), "refined": refined, "upper_bound": j1.upper_bound, "target": fmt_rational(&j1_target), "pass": j1_ok },
        "j2": { "mode": j2_stem(args.j2_mode), "step": fmt_rational(&j2.step), "upper_bound": j2.upper_bound, "target": fmt_rational(&j2_target), "pass": j2_ok },
        "combined": { "upper_bound": combined_up, "target": fmt_rational(&combined_target), "pass": combined_ok },
        "max_admissible_a": a.as_ref().map(fmt_rational),
        "c": a.as_ref().map(|a| fmt_rational(&(a + int(1)))),
        "pass": pass,
    });
    out.json("verify_all.json", &summary)?;
    say!(out, "verify all: {}", if pass { "PASS" } else { "FAIL" });
    Ok(pass)
}
