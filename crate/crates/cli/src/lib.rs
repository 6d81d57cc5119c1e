//! `almostprime`: one entry point for every verification and scan.
//!
//! [`run`] is the whole program; the binary only forwards `std::env::args`.
//! Exit status is 0 when everything requested passes, 1 when a verification
//! fails, and 2 on usage or parameter errors.

/// `println!` unless `--quiet` was given.
macro_rules! say {
    ($out:expr, $($arg:tt)*) => {
        if !$out.quiet {
            println!($($arg)*);
        }
    };
}

mod args;
mod misc;
mod output;
mod sieve;
mod verify;

use std::ffi::OsString;

use clap::Parser;

pub use args::Cli;
use args::{Command, IntegrateCmd, RegionCmd, VerifyCmd};
use output::Output;
pub use sieve::SEED_VAR;

fn dispatch(cli: &Cli) -> anyhow::Result<bool> {
    let out = Output::new(&cli.output_dir, cli.format, cli.quiet)?;
    match &cli.command {
        Command::Verify(VerifyCmd::Exponents(a)) => verify::exponents(a, &out),
        Command::Verify(VerifyCmd::SmallNu(a)) => verify::small_nu(a, &out),
        Command::Verify(VerifyCmd::All(a)) => verify::all(a, &out),
        Command::Integrate(IntegrateCmd::J1(a)) => verify::integrate_j1(a, &out),
        Command::Integrate(IntegrateCmd::J2(a)) => verify::integrate_j2(a, &out),
        Command::Buchstab(cmd) => misc::buchstab(cmd, &out),
        Command::Scan(a) => sieve::scan(a, &out),
        Command::Density(a) => sieve::density(a, &out),
        Command::Brun(cmd) => sieve::brun(cmd, &out),
        Command::PiEll(a) => sieve::pi_ell(a, &out),
        Command::Region(RegionCmd::Dump { name, params }) => misc::region_dump(*name, params, &out),
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// exit status.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    // A scoped pool rather than the global one, so that repeated in-process
    // runs can use different thread counts.
    let result = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(anyhow::Error::from)
        .and_then(|pool| pool.install(|| dispatch(&cli)));
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e:#}");
            eprintln!("run `almostprime --help` for the command grammar");
            2
        }
    }
}
