//! End-to-end acceptance experiments.
//!
//! Each check runs a complete experiment in `f64` and reports a pass/fail
//! verdict with the measured quantities. Used by the `check` command and the
//! acceptance test target.

use std::f64::consts::FRAC_PI_6;
use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::beta::BetaProfile;
use crate::dynamics::{check_comparison, simulate, speed_bound, DropState, SimulateOptions, Trajectory, VelocityLaw};
use crate::equilibrium::{solve_bvp, EquilibriumProfile};
use crate::error::{DropletError, Result};
use crate::homog::{effective_velocity, epsilon_sweep, sine_effective_velocity, sqrt_degeneracy_check, EffectiveLaw};
use crate::oracle::{fd_bvp, fd_bvp_extrapolated, fd_obstacle};
use crate::params::PhysicalParams;
use crate::tables::SlopeTables;
use crate::waves::{homogenized_tw_speed, pulsating_wave, sticking_barrier, traveling_wave, PulsatingOptions};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{verdict}] {:>2} {}: {}", self.id, self.name, self.detail)
    }
}

pub const CRITERIA: [&str; 12] = [
    "slope identity",
    "oracle equivalence",
    "parabola limit",
    "traveling wave speed",
    "stability of the traveling wave",
    "comparison principle",
    "effective velocity",
    "homogenization convergence",
    "pulsating wave",
    "sticking barrier",
    "homogenized traveling wave",
    "energy dissipation",
];

/// Runs criterion `id` (1-based).
pub fn run_criterion(id: usize, seed: u64) -> CriterionReport {
    let name = CRITERIA.get(id.wrapping_sub(1)).copied().unwrap_or("unknown");
    let outcome = match id {
        1 => slope_identity(seed),
        2 => oracle_equivalence(seed),
        3 => parabola_limit(),
        4 => traveling_wave_speed(),
        5 => stability(),
        6 => comparison(seed),
        7 => effective_velocity_check(),
        8 => homogenization(),
        9 => pulsating(),
        10 => sticking(),
        11 => homogenized_tw(),
        12 => energy_dissipation(),
        _ => Err(DropletError::Precondition(format!("no criterion {id}"))),
    };
    let (passed, detail) = match outcome {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionReport { id, name, passed, detail }
}

/// Runs every criterion concurrently; reports come back in id order.
pub fn run_all(seed: u64) -> Vec<CriterionReport> {
    (1..=CRITERIA.len()).into_par_iter().map(|id| run_criterion(id, seed)).collect()
}

type Outcome = Result<(bool, String)>;

fn inclined(v0: f64) -> Result<PhysicalParams<f64>> {
    PhysicalParams::new(v0, 1.0, FRAC_PI_6)
}

fn random_params(rng: &mut ChaCha8Rng) -> Result<PhysicalParams<f64>> {
    PhysicalParams::new(rng.gen_range(0.2..5.0), rng.gen_range(0.05..20.0), rng.gen_range(0.05..1.4))
}

fn lean() -> SimulateOptions<f64> {
    SimulateOptions {
        stride: 100,
        energy: false,
        ..Default::default()
    }
}

fn slope_identity(seed: u64) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let p = random_params(&mut rng)?;
        let t = SlopeTables::new(&p)?;
        let lc = t.critical_length().finite().ok_or(DropletError::NoCriticalLength)?;
        let ell = lc * rng.gen_range(0.05..=1.0);
        let (g, h) = t.gh(ell)?;
        worst = worst.max((h - g - p.drive()).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        worst <= 1e-8 && secs < 10.0,
        format!("max |H - G - V0 tilt| = {worst:.3e} over 50 cases in {secs:.2} s"),
    ))
}

fn oracle_equivalence(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let cases: Vec<(PhysicalParams<f64>, f64, f64)> = (0..25)
        .map(|_| -> Result<_> {
            let p = PhysicalParams::new(rng.gen_range(0.5..2.0), rng.gen_range(0.1..5.0), rng.gen_range(0.1..1.2))?;
            Ok((p, rng.gen_range(0.3..1.0), rng.gen_range(-1.0..1.0)))
        })
        .collect::<Result<_>>()?;
    // Deviation from the grid-converged oracle and from plain n = 4096.
    let errors = cases
        .par_iter()
        .map(|(p, frac, a)| -> Result<(f64, f64)> {
            let t = SlopeTables::new(p)?;
            let lc = t.critical_length().finite().ok_or(DropletError::NoCriticalLength)?;
            let b = a + frac * lc;
            let u = solve_bvp(*a, b, p)?;
            let dev = |[l, sa, sb]: [f64; 3]| {
                (u.lambda() - l).abs().max((u.slope_a() - sa).abs()).max((u.slope_b() - sb).abs())
            };
            let raw = fd_bvp(*a, b, p, 4096)?;
            Ok((
                dev(fd_bvp_extrapolated(*a, b, p, 2048)?),
                dev([raw.lambda, raw.slope_a, raw.slope_b]),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = errors.iter().fold(0.0f64, |m, e| m.max(e.0));
    let worst_raw = errors.iter().fold(0.0f64, |m, e| m.max(e.1));
    let edges = cases[..5]
        .par_iter()
        .map(|(p, _, a)| -> Result<f64> {
            let t = SlopeTables::new(p)?;
            let lc = t.critical_length().finite().ok_or(DropletError::NoCriticalLength)?;
            let b = a + 1.5 * lc;
            let fd = fd_obstacle(*a, b, p, 400)?;
            Ok((fd.support_left - (b - lc)).abs() / fd.spacing())
        })
        .collect::<Result<Vec<_>>>()?;
    let worst_cells = edges.iter().fold(0.0f64, |m, e| m.max(*e));
    Ok((
        worst <= 1e-6 && worst_cells <= 2.0,
        format!(
            "max deviation from extrapolated FD (n = 2048, 4096) {worst:.3e} over 25 cases (plain n = 4096: {worst_raw:.3e}); obstacle edge off by {worst_cells:.2} cells"
        ),
    ))
}

fn parabola_limit() -> Outcome {
    let p = PhysicalParams::new(1.0, 0.0, 0.3)?;
    let u: EquilibriumProfile<f64> = solve_bvp(0.0, 2.0, &p)?;
    let err = (u.lambda() - 1.5)
        .abs()
        .max((u.slope_a() - 1.5).abs())
        .max((u.slope_b() + 1.5).abs());
    Ok((
        err <= 1e-10,
        format!("lambda = {}, slopes = ({}, {})", u.lambda(), u.slope_a(), u.slope_b()),
    ))
}

/// Long-run front speed `(b(T) - b(T/2)) / (T/2)` from half the wave length.
fn measured_speed(tables: &SlopeTables<f64>, beta: &BetaProfile<f64>, ell0: f64, horizon: f64, h: f64) -> Result<f64> {
    let traj = simulate(DropState::new(0.0, 0.5 * ell0), horizon, h, &VelocityLaw::Raw(beta), tables, &lean())?;
    let mid = traj.b_at(0.5 * horizon).ok_or(DropletError::Internal("midpoint sample".into()))?;
    Ok((traj.last().b - mid) / (0.5 * horizon))
}

fn traveling_wave_speed() -> Outcome {
    let beta = BetaProfile::constant(1.0)?;
    let drives = [0.5, 1.0, 1.9, 2.1, 3.0];
    let (horizon, h) = (40.0, 2e-3);
    let rows = drives
        .par_iter()
        .map(|&drive| -> Result<(f64, f64, f64, f64)> {
            let tables = SlopeTables::new(&inclined(2.0 * drive)?)?;
            let tw = traveling_wave(1.0, &tables)?;
            let coarse = measured_speed(&tables, &beta, tw.ell0, horizon, h)?;
            let fine = measured_speed(&tables, &beta, tw.ell0, horizon, 0.5 * h)?;
            let formula = if drive <= 2.0 { 0.5 * drive } else { drive - 1.0 };
            Ok((drive, formula, coarse, fine))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut ok = true;
    let mut worst_rel = 0.0f64;
    let mut worst_refine = 0.0f64;
    for &(_, formula, coarse, fine) in &rows {
        worst_rel = worst_rel.max((fine - formula).abs() / formula);
        worst_refine = worst_refine.max((fine - coarse).abs() / fine);
    }
    ok &= worst_rel < 0.01 && worst_refine < 0.002;
    // Kink: intersect the line fitted to the lower drives with the line
    // through the upper ones.
    let (lx, ly): (Vec<f64>, Vec<f64>) = rows[..3].iter().map(|r| (r.0, r.3)).unzip();
    let (sl, il) = line_fit(&lx, &ly);
    let (sr, ir) = line_fit(&[rows[3].0, rows[4].0], &[rows[3].3, rows[4].3]);
    let kink = (ir - il) / (sl - sr);
    ok &= ((kink - 2.0) / 2.0).abs() < 0.02;
    Ok((
        ok,
        format!(
            "max rel. error vs formula {worst_rel:.2e}, h-halving change {worst_refine:.2e}, kink at {kink:.4} (slopes {sl:.4}, {sr:.4})"
        ),
    ))
}

fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Whether `values` is monotone in one direction, up to rounding.
fn monotone(values: &[f64]) -> bool {
    let tol = 1e-12;
    values.windows(2).all(|w| w[1] >= w[0] - tol) || values.windows(2).all(|w| w[1] <= w[0] + tol)
}

fn stability() -> Outcome {
    let beta = BetaProfile::constant(1.0)?;
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut lines = Vec::new();
    for v0 in [2.0, 6.0] {
        let tables = SlopeTables::new(&inclined(v0)?)?;
        let lc = tables.critical_length().finite().ok_or(DropletError::NoCriticalLength)?;
        let tw = traveling_wave(1.0, &tables)?;
        for factor in [0.7, 1.3] {
            let ell = (factor * tw.ell0).min(lc);
            let opts = SimulateOptions { stride: 10, energy: false, ..Default::default() };
            let traj = simulate(DropState::new(0.0, ell), 30.0, 1e-3, &VelocityLaw::Raw(&beta), &tables, &opts)?;
            let ells: Vec<f64> = traj.samples.iter().map(|s| s.ell).collect();
            let gap = (traj.last().ell - tw.ell0).abs();
            ok &= monotone(&ells) && gap < 1e-4;
            worst = worst.max(gap);
            lines.push(format!("V0={v0} x{factor}: gap {gap:.2e}, monotone {}", monotone(&ells)));
        }
    }
    Ok((ok, format!("max |ell(T) - ell0| = {worst:.2e}; {}", lines.join("; "))))
}

fn comparison(seed: u64) -> Outcome {
    let beta = BetaProfile::sine(1.0, 0.3, 0.5)?;
    let tables = SlopeTables::new(&inclined(2.0)?)?;
    let lc = tables.critical_length().finite().ok_or(DropletError::NoCriticalLength)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0ffee);
    let mut pairs = Vec::with_capacity(100);
    while pairs.len() < 100 {
        let a1 = rng.gen_range(0.0..1.0);
        let b1 = a1 + lc * rng.gen_range(0.3..0.9);
        let a2 = a1 + rng.gen_range(0.0..0.2);
        let b2 = b1 + rng.gen_range(0.0..0.2);
        if b2 - a2 <= lc && b2 - a2 > 0.2 * lc {
            pairs.push((DropState::new(a1, b1), DropState::new(a2, b2)));
        }
    }
    let (horizon, h) = (3.0, 1e-3);
    let k = beta.lipschitz();
    let law = VelocityLaw::Raw(&beta);
    let opts = SimulateOptions { stride: 10, energy: false, ..Default::default() };
    let margins = pairs
        .par_iter()
        .map(|(lo, hi)| -> Result<(bool, f64)> {
            let c = speed_bound(&tables, &beta, lo.length().min(hi.length()))?;
            let p = simulate(*lo, horizon, h, &law, &tables, &opts)?;
            let q = simulate(*hi, horizon, h, &law, &tables, &opts)?;
            let r = check_comparison(&p, &q, c, k)?;
            Ok((r.holds, r.worst_margin))
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = margins.iter().filter(|m| m.0).count();
    let worst = margins.iter().fold(f64::INFINITY, |m, r| m.min(r.1));
    Ok((
        passed == 100,
        format!("{passed}/100 ordered pairs preserved; smallest margin {worst:.3e}"),
    ))
}

fn effective_velocity_check() -> Outcome {
    let beta = BetaProfile::sine(1.0, 0.3, 1.0)?;
    let mut worst = 0.0f64;
    for q in [1.31f64, 1.4, 2.0, 5.0] {
        worst = worst.max((effective_velocity(q, &beta)? - sine_effective_velocity(q, 1.0, 0.3)).abs());
    }
    let mut plateau_max = 0.0f64;
    for i in 0..=600 {
        let q = 0.7 + 0.6 * i as f64 / 600.0;
        plateau_max = plateau_max.max(effective_velocity(q.min(1.3), &beta)?.abs());
    }
    let exponent = sqrt_degeneracy_check(&beta)?;
    Ok((
        worst <= 1e-6 && plateau_max == 0.0 && (exponent - 0.5).abs() <= 0.05,
        format!("max |r - closed form| = {worst:.2e}; max |r| on plateau = {plateau_max}; edge exponent {exponent:.4}"),
    ))
}

fn homogenization() -> Outcome {
    let start = Instant::now();
    let beta = BetaProfile::sine(1.0, 0.3, 1.0)?;
    let tables = SlopeTables::new(&inclined(2.0)?)?;
    let lc = tables.critical_length().finite().ok_or(DropletError::NoCriticalLength)?;
    // Both contact points on the lattice shared by every epsilon, so each run
    // starts at the same cell phase.
    let initial = DropState::new(0.0, 2.0);
    if lc <= 2.0 {
        return Err(DropletError::Internal("initial length exceeds critical length".into()));
    }
    let eps = [0.1, 0.05, 0.025];
    let bound = speed_bound(&tables, &beta, initial.length())?;
    let h = 0.9 * eps[2] / (10.0 * bound);
    let report = epsilon_sweep(initial, 4.0, &beta, &eps, h, &tables)?;
    let secs = start.elapsed().as_secs_f64();
    let cols: Vec<String> = report
        .rows
        .iter()
        .map(|r| format!("eps {}: ({:.3e}, {:.3e})", r.eps, r.sup_err_a, r.sup_err_b))
        .collect();
    Ok((
        report.strictly_decreasing() && secs < 300.0,
        format!("{} in {secs:.1} s, h = {h:.3e}", cols.join(", ")),
    ))
}

fn pulsating() -> Outcome {
    let beta = BetaProfile::sine(1.0, 0.1, 1.0)?;
    let tables = SlopeTables::new(&inclined(3.0)?)?;
    let pw = pulsating_wave(&beta, &tables, &PulsatingOptions::default())?;
    let diffs = &pw.sup_differences;
    let decreasing = diffs.windows(2).all(|w| w[1] < w[0]);
    let last = diffs.last().copied().unwrap_or(f64::NAN);

    let h = 1e-3;
    let horizon = 40.0 * pw.time_period;
    let opts = SimulateOptions { stride: 10, energy: false, ..Default::default() };
    let traj = simulate(DropState::new(0.0, pw.z[0]), horizon, h, &VelocityLaw::Raw(&beta), &tables, &opts)?;
    let t_start = 0.5 * horizon;
    let mut worst = 0.0f64;
    for s in traj.samples.iter().filter(|s| s.t >= t_start && s.t + pw.time_period <= horizon) {
        let later = traj.b_at(s.t + pw.time_period).ok_or(DropletError::Internal("sample".into()))?;
        worst = worst.max((later - s.b - 1.0).abs());
    }
    let long_run = (traj.last().b - traj.b_at(t_start).unwrap_or(f64::NAN)) / (horizon - t_start);
    let speed_rel = (long_run - pw.mean_speed).abs() / pw.mean_speed;
    Ok((
        decreasing && last < 1e-8 && worst < 5e-3 && speed_rel < 0.01,
        format!(
            "{} periods, monotone sup-differences {decreasing}, last {last:.2e}; T = {:.6}; max |b(t+T) - b(t) - 1| = {worst:.2e}; mean speed rel. error {speed_rel:.2e}",
            diffs.len() + 1,
            pw.time_period
        ),
    ))
}

fn sticking() -> Outcome {
    let beta = BetaProfile::sine(1.0, 0.6, 0.05)?;
    let tables = SlopeTables::new(&inclined(2.0)?)?;
    let Some(bar) = sticking_barrier(&beta, &tables)? else {
        return Ok((false, "no barrier found".into()));
    };
    // One start just inside the barrier and one short drop that must spread
    // towards it.
    let starts = [
        DropState::new(bar.a - 0.3, bar.b - 0.2),
        DropState::new(bar.a - 0.3, bar.a + 0.2),
    ];
    let opts = SimulateOptions { stride: 1, energy: false, ..Default::default() };
    let mut ok = true;
    let mut parts = Vec::new();
    for start in starts {
        let traj = simulate(start, 20.0, 1e-4, &VelocityLaw::Raw(&beta), &tables, &opts)?;
        let b_max = traj.samples.iter().fold(f64::NEG_INFINITY, |m, s| m.max(s.b));
        let a_max = traj.samples.iter().fold(f64::NEG_INFINITY, |m, s| m.max(s.a));
        ok &= b_max <= bar.b && a_max <= bar.a;
        parts.push(format!(
            "start ({:.3}, {:.3}): max b = {b_max:.5}, max a = {a_max:.5}",
            start.a, start.b
        ));
    }
    Ok((
        ok,
        format!("barrier ({:.5}, {:.5}); {} over t in [0, 20]", bar.a, bar.b, parts.join("; ")),
    ))
}

fn homogenized_tw() -> Outcome {
    let flat = EffectiveLaw::new(&BetaProfile::constant(1.0)?);
    let mut exact_err = 0.0f64;
    let drives: Vec<f64> = (1..=80).map(|i| 0.05 * i as f64).collect();
    for &d in &drives {
        let c = homogenized_tw_speed(&flat, &inclined(2.0 * d)?)?;
        let formula = if d <= 2.0 { 0.5 * d } else { d - 1.0 };
        exact_err = exact_err.max((c - formula).abs());
    }
    let law = EffectiveLaw::new(&BetaProfile::sine(1.0, 0.3, 1.0)?);
    let curve = drives
        .iter()
        .map(|&d| homogenized_tw_speed(&law, &inclined(2.0 * d)?))
        .collect::<Result<Vec<_>>>()?;
    let nondecreasing = curve.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    let slower = drives.iter().zip(&curve).all(|(d, c)| {
        let flat_c = if *d <= 2.0 { 0.5 * d } else { d - 1.0 };
        *c < flat_c
    });
    let delta = 1e-3;
    let speed = |d: f64| homogenized_tw_speed(&law, &inclined(2.0 * d)?);
    let c2 = speed(2.0)?;
    let left = (c2 - speed(2.0 - delta)?) / delta;
    let right = (speed(2.0 + delta)? - c2) / delta;
    let corner = right > 1.5 * left && (left - 0.524).abs() < 0.01 && (right - 1.048).abs() < 0.01;
    Ok((
        exact_err <= 1e-12 && nondecreasing && slower && corner,
        format!(
            "constant law max error {exact_err:.1e}; sine law monotone {nondecreasing}, below constant speed {slower}; one-sided slopes at 2: {left:.4}, {right:.4}"
        ),
    ))
}

/// Largest `(E_{n+1} - E_n) / h^2` along a constant-adhesion trajectory.
fn energy_excess(tables: &SlopeTables<f64>, beta: &BetaProfile<f64>, start: DropState<f64>, h: f64) -> Result<f64> {
    let traj: Trajectory<f64> = simulate(start, 10.0, h, &VelocityLaw::Raw(beta), tables, &SimulateOptions::default())?;
    Ok(traj
        .samples
        .windows(2)
        .map(|w| (w[1].energy - w[0].energy) / (h * h))
        .fold(f64::NEG_INFINITY, f64::max))
}

fn energy_dissipation() -> Outcome {
    let beta = BetaProfile::constant(1.0)?;
    let mut lines = Vec::new();
    let mut ok = true;
    for v0 in [2.0, 6.0] {
        let tables = SlopeTables::new(&inclined(v0)?)?;
        let lc = tables.critical_length().finite().ok_or(DropletError::NoCriticalLength)?;
        let tw = traveling_wave(1.0, &tables)?;
        for factor in [0.7, 1.3] {
            let start = DropState::new(0.0, (factor * tw.ell0).min(lc));
            let coarse = energy_excess(&tables, &beta, start, 2e-3)?;
            let fine = energy_excess(&tables, &beta, start, 1e-3)?;
            // With C the coarse-step constant, the halved step must obey the
            // same bound.
            let c = coarse.max(0.0);
            ok &= fine <= c + 1e-6;
            lines.push(format!("V0={v0} x{factor}: C(h) = {coarse:.3e}, C(h/2) = {fine:.3e}"));
        }
    }
    Ok((ok, lines.join("; ")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_criteria_pass() {
        for id in [1, 3, 7] {
            let r = run_criterion(id, DEFAULT_SEED);
            assert!(r.passed, "{r}");
        }
    }

    #[test]
    fn unknown_criterion_fails() {
        assert!(!run_criterion(13, 0).passed);
    }
}
