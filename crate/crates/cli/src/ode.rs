use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use listmatch::continuum::{multi_seat_solve, solve_ivp, tau_rescaled_solve, MAX_STEP};
use listmatch::table::Table;

use crate::args::{OdeArgs, OdeMethod};
use crate::manifest::{manifest_path_for, RunManifest};
use crate::usage;

pub fn run(a: &OdeArgs) -> Result<ExitCode> {
    let started = Instant::now();
    if !(a.d >= 1.0) || !a.d.is_finite() {
        return Err(usage("--d", "need a finite list length >= 1"));
    }
    if a.q == 0 {
        return Err(usage("--q", "need at least one seat"));
    }
    if !(a.t_max >= 0.0) || !a.t_max.is_finite() {
        return Err(usage("--t-max", "need a finite horizon >= 0"));
    }
    if !(a.step > 0.0 && a.step <= MAX_STEP) {
        return Err(usage("--step", format!("need 0 < step <= {MAX_STEP}")));
    }
    let sol = match (a.method, a.q) {
        (OdeMethod::Direct, 1) => solve_ivp(a.d, a.t_max, a.step)?,
        (OdeMethod::Direct, q) => multi_seat_solve(a.d, q, a.t_max, a.step)?,
        (OdeMethod::Tau, q) => tau_rescaled_solve(a.d, q, a.t_max, a.step)?,
    };
    let mut header = vec!["t".to_string(), "x".to_string(), "x_prime".to_string()];
    header.extend((0..a.q).map(|k| format!("y{k}")));
    let mut table = Table::new(header);
    for j in 0..sol.len() {
        let mut row = vec![sol.t_grid[j].into(), sol.x[j].into(), sol.x_prime[j].into()];
        match &sol.y {
            Some(y) => row.extend(y.iter().map(|yk| yk[j].into())),
            // One seat: the only other state is the open share.
            None => row.push((1.0 - sol.x[j]).into()),
        }
        table.push(row);
    }
    table.write(&a.out)?;
    RunManifest::new("ode", a, None, vec![a.out.clone()], started)?
        .write(&manifest_path_for(&a.out))?;
    println!("wrote {} rows to {}", table.len(), a.out.display());
    Ok(ExitCode::SUCCESS)
}
