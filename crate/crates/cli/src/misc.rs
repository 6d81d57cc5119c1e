use almostprime_core::buchstab::{interpolate, omega_dde, omega_exact, omega_upper};
use almostprime_core::{build_region, RegionName};
use anyhow::bail;
use serde_json::json;

use crate::args::{BuchstabCmd, ParamArgs};
use crate::output::Output;

/// Grid used for the delay-equation column of `buchstab table`.
const TABLE_DDE_STEP: f64 = 1e-4;

pub fn buchstab(cmd: &BuchstabCmd, out: &Output) -> anyhow::Result<bool> {
    match cmd {
        BuchstabCmd::Eval { u } => {
            let rows: Vec<_> = u
                .iter()
                .map(|&u| {
                    let exact = omega_exact(u).ok();
                    say!(
                        out,
                        "omega({u}) = {}  upper approximant {}",
                        exact.map_or("n/a (closed forms end at 3)".to_string(), |v| v.to_string()),
                        omega_upper(u)
                    );
                    json!({ "u": u, "omega_exact": exact, "omega_upper": omega_upper(u) })
                })
                .collect();
            out.json("buchstab_eval.json", &rows)?;
        }
        BuchstabCmd::Dde { u_max, step } => {
            let table = omega_dde(*u_max, *step)?;
            let path = out.csv("buchstab_dde.csv", &["u", "omega"], &table)?;
            let last = table.last().expect("table has at least u = 1");
            say!(out, "omega_dde: {} points, omega({}) ~ {} -> {}", table.len(), last.0, last.1, path.display());
        }
        BuchstabCmd::Table { u_min, u_max, step } => {
            if !(step.is_finite() && *step > 0.0 && u_min <= u_max && *u_min >= 0.0) {
                bail!("need 0 <= u_min <= u_max and step > 0");
            }
            let dde = omega_dde(u_max.max(1.0), TABLE_DDE_STEP)?;
            let n = ((u_max - u_min) / step + 1e-9).floor() as u64;
            let rows = (0..=n).map(|i| {
                let u = u_min + i as f64 * step;
                (u, omega_exact(u).ok(), omega_upper(u), interpolate(&dde, u))
            });
            let path = out.csv("buchstab_table.csv", &["u", "omega_exact", "omega_upper", "omega_dde"], rows)?;
            say!(out, "buchstab table: {} rows -> {}", n + 1, path.display());
        }
    }
    Ok(true)
}

pub fn region_dump(name: RegionName, params: &ParamArgs, out: &Output) -> anyhow::Result<bool> {
    let region = build_region(name, &params.resolve()?)?;
    let path = out.text(&format!("region_{}.json", name.as_str()), &region.to_json())?;
    say!(out, "region {}: dimension {}, {} clauses -> {}", name, region.dim, region.clauses.len(), path.display());
    Ok(true)
}
