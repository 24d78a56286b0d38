use std::io::Write;

use droplet::csv::{format_value, write_rows, write_trajectory};
use droplet::dynamics::speed_bound;
use droplet::homog::epsilon_sweep;
use droplet::validate::run_all;
use droplet::waves::{homogenized_tw_speed, pulsating_wave, sticking_barrier, traveling_wave, PulsatingOptions};
use droplet::{simulate, Law, SimulateOptions, VelocityLaw};

use crate::config::Config;
use crate::error::CliError;

pub const SUBCOMMANDS: [&str; 8] = ["simulate", "tables", "tw", "pulsate", "rq", "homogenize", "stick", "check"];

/// Output body of one subcommand. `failed` is set by `check`.
pub struct Report {
    pub body: Vec<u8>,
    pub failed: Option<(usize, usize)>,
}

impl From<Vec<u8>> for Report {
    fn from(body: Vec<u8>) -> Self {
        Self { body, failed: None }
    }
}

pub fn run(cmd: &str, cfg: &Config) -> Result<Report, CliError> {
    match cmd {
        "simulate" => simulate_cmd(cfg).map(Report::from),
        "tables" => tables_cmd(cfg).map(Report::from),
        "tw" => tw_cmd(cfg).map(Report::from),
        "pulsate" => pulsate_cmd(cfg).map(Report::from),
        "rq" => rq_cmd(cfg).map(Report::from),
        "homogenize" => homogenize_cmd(cfg).map(Report::from),
        "stick" => stick_cmd(cfg).map(Report::from),
        "check" => check_cmd(cfg),
        other => Err(CliError::Usage(format!("unknown subcommand `{other}`"))),
    }
}

fn footer(out: &mut Vec<u8>, key: &str, value: impl std::fmt::Display) -> Result<(), CliError> {
    writeln!(out, "# {key} = {value}")?;
    Ok(())
}

fn simulate_cmd(cfg: &Config) -> Result<Vec<u8>, CliError> {
    let tables = cfg.tables()?;
    let beta = cfg.beta();
    let initial = cfg.initial()?;
    let horizon = cfg.positive("run.T", cfg.real("run.T")?)?;
    let stride = cfg.count_or("run.stride", 10)?;
    let law_name = cfg.text_or("run.law", "raw");
    let effective;
    let law = match law_name.as_str() {
        "raw" => VelocityLaw::Raw(beta),
        "homogenized" => {
            effective = Law::new(beta);
            VelocityLaw::Homogenized(&effective)
        }
        other => return Err(CliError::Config(format!("`run.law` = `{other}`: expected raw or homogenized"))),
    };
    let h = match cfg.real_opt("run.h")? {
        Some(h) => cfg.positive("run.h", h)?,
        None => {
            let scale = tables.critical_length().finite().unwrap_or(initial.length());
            let h = scale * 1e-3 / speed_bound(&tables, beta, initial.length())?;
            cfg.real_or("run.h", h)?
        }
    };
    let opts = SimulateOptions { stride, ..Default::default() };
    let traj = simulate(initial, horizon, h, &law, &tables, &opts)?;
    let mut out = Vec::new();
    write_trajectory(&mut out, &traj)?;
    footer(&mut out, "max_speed", format_value(traj.max_speed))?;
    footer(&mut out, "speed_bound", format_value(traj.speed_bound))?;
    Ok(out)
}

fn tables_cmd(cfg: &Config) -> Result<Vec<u8>, CliError> {
    let tables = cfg.tables()?;
    let lc = tables.critical_length();
    let ell_max = match (cfg.real_opt("run.ell_max")?, lc.finite()) {
        (Some(x), _) => x,
        (None, Some(lc)) => cfg.real_or("run.ell_max", lc)?,
        (None, None) => {
            return Err(CliError::Config(
                "`run.ell_max` is required when the critical length is unbounded".into(),
            ))
        }
    };
    let ell_min = cfg.real_or("run.ell_min", ell_max / 100.0)?;
    cfg.positive("run.ell_min", ell_min)?;
    if !(ell_max > ell_min) {
        return Err(CliError::Config(format!("need run.ell_max > run.ell_min, got {ell_min} and {ell_max}")));
    }
    let count = cfg.count_or("run.count", 201)?.max(2);
    let rows = tables.rows(ell_min, ell_max, count)?;
    let mut out = Vec::new();
    write_rows(&mut out, &["ell", "G", "H", "F"], rows)?;
    footer(&mut out, "ell_c", lc)?;
    Ok(out)
}

fn tw_cmd(cfg: &Config) -> Result<Vec<u8>, CliError> {
    let beta = cfg.beta();
    let tilt = cfg.params_with_volume(1.0)?.tilt();
    if !(tilt > 0.0) {
        return Err(CliError::Config("traveling waves need kappa > 0 and alpha > 0".into()));
    }
    let lo = cfg.positive("run.drive_min", cfg.real_or("run.drive_min", 0.1)?)?;
    let hi = cfg.real_or("run.drive_max", 4.0)?;
    if !(hi > lo) {
        return Err(CliError::Config(format!("need run.drive_max > run.drive_min, got {lo} and {hi}")));
    }
    let count = cfg.count_or("run.count", 40)?.max(2);
    let drives: Vec<f64> = (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect();
    let mut out = Vec::new();
    if beta.is_constant() {
        let mut rows = Vec::with_capacity(count);
        for &drive in &drives {
            let p = cfg.params_with_volume(drive / tilt)?;
            let tw = traveling_wave(beta.max(), &droplet::Tables::new(&p)?)?;
            rows.push([drive, p.volume(), tw.ell0, tw.speed]);
        }
        write_rows(&mut out, &["drive", "V0", "ell0", "speed"], rows)?;
    } else {
        let law = Law::new(beta);
        let mut rows = Vec::with_capacity(count);
        for &drive in &drives {
            let p = cfg.params_with_volume(drive / tilt)?;
            rows.push([drive, p.volume(), homogenized_tw_speed(&law, &p)?]);
        }
        write_rows(&mut out, &["drive", "V0", "speed"], rows)?;
    }
    Ok(out)
}

fn pulsate_cmd(cfg: &Config) -> Result<Vec<u8>, CliError> {
    let tables = cfg.tables()?;
    let beta = cfg.beta();
    let opts = PulsatingOptions {
        samples: cfg.count_or("run.count", 256)?,
        ..Default::default()
    };
    let pw = pulsating_wave(beta, &tables, &opts)?;
    let mut out = Vec::new();
    write_rows(&mut out, &["x", "z"], pw.x.iter().zip(&pw.z).map(|(x, z)| [*x, *z]))?;
    footer(&mut out, "time_period", format_value(pw.time_period))?;
    footer(&mut out, "mean_speed", format_value(pw.mean_speed))?;
    footer(&mut out, "periods", pw.sup_differences.len() + 1)?;
    Ok(out)
}

fn rq_cmd(cfg: &Config) -> Result<Vec<u8>, CliError> {
    let beta = cfg.beta();
    let q_min = cfg.real_or("run.q_min", 0.0)?;
    let q_max = cfg.real_or("run.q_max", 2.0 * beta.max())?;
    if !(q_max > q_min) {
        return Err(CliError::Config(format!("need run.q_max > run.q_min, got {q_min} and {q_max}")));
    }
    let count = cfg.count_or("run.count", 401)?.max(2);
    let law = Law::new(beta);
    let mut out = Vec::new();
    write_rows(&mut out, &["q", "r"], law.curve(q_min, q_max, count)?)?;
    let (lo, hi) = law.plateau();
    footer(&mut out, "plateau", format!("{},{}", format_value(lo), format_value(hi)))?;
    Ok(out)
}

fn homogenize_cmd(cfg: &Config) -> Result<Vec<u8>, CliError> {
    let tables = cfg.tables()?;
    let beta = cfg.beta();
    let initial = cfg.initial()?;
    let horizon = cfg.positive("run.T", cfg.real("run.T")?)?;
    let eps = cfg.list_or("run.eps", &[0.1, 0.05, 0.025])?;
    let eps_min = eps.iter().copied().fold(f64::INFINITY, f64::min);
    let h = match cfg.real_opt("run.h")? {
        Some(h) => cfg.positive("run.h", h)?,
        None => {
            let bound = speed_bound(&tables, beta, initial.length())?;
            let period = beta.period().unwrap_or(1.0);
            cfg.real_or("run.h", 0.9 * eps_min * period / (10.0 * bound))?
        }
    };
    let report = epsilon_sweep(initial, horizon, beta, &eps, h, &tables)?;
    let mut out = Vec::new();
    write_rows(
        &mut out,
        &["eps", "sup_err_a", "sup_err_b"],
        report.rows.iter().map(|r| [r.eps, r.sup_err_a, r.sup_err_b]),
    )?;
    footer(&mut out, "strictly_decreasing", report.strictly_decreasing())?;
    Ok(out)
}

fn stick_cmd(cfg: &Config) -> Result<Vec<u8>, CliError> {
    let tables = cfg.tables()?;
    let beta = cfg.beta();
    let mut out = Vec::new();
    match sticking_barrier(beta, &tables)? {
        Some(bar) => write_rows(
            &mut out,
            &["a", "b", "ell0", "front_excess", "rear_excess"],
            [[bar.a, bar.b, bar.ell0, bar.front_excess, bar.rear_excess]],
        )?,
        None => footer(&mut out, "barrier", "none")?,
    }
    Ok(out)
}

fn check_cmd(cfg: &Config) -> Result<Report, CliError> {
    let reports = run_all(cfg.seed()?);
    let mut body = Vec::new();
    for r in &reports {
        writeln!(body, "{r}")?;
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    writeln!(body, "acceptance: {} passed, {failed} failed", reports.len() - failed)?;
    Ok(Report {
        body,
        failed: (failed > 0).then_some((failed, reports.len())),
    })
}
