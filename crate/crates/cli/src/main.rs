//! `droplet` batch front end.

mod commands;
mod config;
mod error;
mod output;

use std::io::Write;
use std::process::ExitCode;

use commands::SUBCOMMANDS;
use config::Config;
use error::CliError;

const USAGE: &str = "\
usage: droplet <command> [--config FILE] [--section.key value ...]

commands:
  simulate    trajectory CSV (run.T, run.a, run.b; optional run.h, run.stride, run.law)
  tables      ell,G,H,F over [run.ell_min, run.ell_max]
  tw          traveling-wave speed against the drive V0 tilt
  pulsate     periodic length profile z(x) and its time period
  rq          effective velocity curve q,r
  homogenize  eps,sup_err_a,sup_err_b convergence report (run.eps)
  stick       sticking barrier, if the construction succeeds
  check       acceptance experiments (run.seed)

keys: params.{V0,kappa,alpha}, beta.{kind,value,mean,amplitude,period,nodes},
      run.{T,h,a,b,law,stride,eps,q_min,q_max,ell_min,ell_max,drive_min,drive_max,count,seed,output}
exit codes: 0 ok, 2 bad configuration, 3 numerical failure, 4 failed checks";

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    match args.first().map(String::as_str) {
        None | Some("-h" | "--help" | "help") => {
            println!("{USAGE}");
            return ExitCode::SUCCESS;
        }
        _ => {}
    }
    match run(&args[0], &args[1..]) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("droplet {}: {e}", args[0]);
            if matches!(e, CliError::Usage(_)) {
                eprintln!("{USAGE}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cmd: &str, rest: &[String]) -> Result<(), CliError> {
    if !SUBCOMMANDS.contains(&cmd) {
        return Err(CliError::Usage(format!("unknown subcommand `{cmd}`")));
    }
    let cfg = Config::new(config::parse_args(rest)?)?;
    let report = commands::run(cmd, &cfg)?;
    let mut doc = Vec::with_capacity(report.body.len() + 512);
    writeln!(doc, "# droplet {cmd} ({} {})", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))?;
    for (k, v) in cfg.resolved() {
        writeln!(doc, "# {k} = {v}")?;
    }
    doc.extend_from_slice(&report.body);
    output::emit(cfg.output().as_deref(), &doc)?;
    match report.failed {
        Some((failed, total)) => Err(CliError::Property { failed, total }),
        None => Ok(()),
    }
}
