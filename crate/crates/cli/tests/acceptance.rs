//! Acceptance criteria, one line each. Run with
//! `cargo test -p listmatch-cli --test acceptance`.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use listmatch::continuum::{
    crossing_time, erlang_solution, integral_condition, multi_seat_solve, root::bisect,
    solve_ivp, tau_rescaled_solve,
};
use listmatch::montecarlo::{
    estimate_rsd, estimate_school_match_prob, estimate_student_stats, estimate_trajectory,
    Estimate,
};
use listmatch::oracle::{exact_match_curve, exact_match_prob, exact_rank_cdf_curve, expected_taken_curve};
use listmatch::verify::{verify_conjecture, verify_main_discrete_mc, verify_xd_bounds, Status};
use listmatch::{DistributionKind, MarketConfig};

struct Outcome {
    pass: bool,
    summary: String,
}

fn outcome(pass: bool, summary: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        summary: summary.into(),
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let took = start.elapsed();
    out.summary = format!("{}; {:.2}s (limit {}s)", out.summary, took.as_secs_f64(), limit.as_secs());
    out.pass &= took <= limit;
    out
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn closed_form_accuracy() -> Outcome {
    timed(secs(1), || {
        let one = solve_ivp(1.0f64, 3.0, 1e-3).unwrap();
        let two = solve_ivp(2.0f64, 3.0, 1e-3).unwrap();
        let mut err1 = 0.0f64;
        let mut err2 = 0.0f64;
        for (j, &t) in one.t_grid.iter().enumerate() {
            err1 = err1.max((one.x[j] - (1.0 - (-t).exp())).abs());
            err2 = err2.max((two.x[j] - t.tanh()).abs());
        }
        outcome(
            err1.max(err2) <= 1e-8,
            format!("max error d=1 {err1:.2e}, d=2 {err2:.2e} (tol 1e-8)"),
        )
    })
}

fn crossing() -> Outcome {
    let t: f64 = crossing_time(1.0, 2.0).unwrap();
    // Independent route: e^{-t} = sech^2 t  <=>  4u = (1 + u^2)^2 with u = e^{-t}.
    let u = bisect(|u: f64| 4.0 * u - (1.0 + u * u).powi(2), 0.2, 0.5, 1e-15).unwrap();
    let closed = -u.ln();
    outcome(
        (t - 1.219).abs() <= 1e-3,
        format!("crossing {t:.6} (closed form {closed:.6}); target 1.219 ± 1e-3"),
    )
}

fn bound_sandwich() -> Outcome {
    timed(secs(30), || {
        let n = 1000;
        let mut worst = f64::INFINITY;
        for d in 1..=10usize {
            let p: f64 = exact_match_prob(n, d, n).unwrap();
            let df = d as f64;
            let slack = 5.0 * df * df / n as f64;
            let (lo, hi) = (df / (2.0 * df + 1.0), 2.0 * df / (4.0 * df + 1.0));
            worst = worst.min((p - (lo - slack)).min(hi + slack - p));
        }
        let mut strict = f64::INFINITY;
        for d in 1..=100usize {
            let df = d as f64;
            let x = *solve_ivp(df, 1.0, 1e-4).unwrap().x.last().unwrap();
            let rate = 1.0 - x.powf(df);
            let (lo, hi) = (df / (2.0 * df + 1.0), 2.0 * df / (4.0 * df + 1.0));
            strict = strict.min((rate - lo).min(hi - rate));
        }
        outcome(
            worst >= 0.0 && strict > 0.0,
            format!("discrete slack {worst:.3e}, continuum interior distance {strict:.3e}"),
        )
    })
}

fn monotonicity() -> Outcome {
    timed(secs(120), || {
        let n = 1000;
        let curves: Vec<Vec<f64>> = (1..=20).map(|d| exact_match_curve(n, d, n).unwrap()).collect();
        let mut worst = f64::INFINITY;
        for w in curves.windows(2) {
            for i in 0..n {
                worst = worst.min(w[1][i] - w[0][i]);
            }
        }
        outcome(
            worst >= -1e-9,
            format!("min P(M_i; d+1) - P(M_i; d) over i<=1000, d<20: {worst:.3e}"),
        )
    })
}

fn crossing_existence() -> Outcome {
    let short: f64 = exact_match_prob(1000, 1, 1250).unwrap();
    let long: f64 = exact_match_prob(1000, 2, 1250).unwrap();
    outcome(
        short > long,
        format!("P(M_1250): d=1 {short:.9}, d=2 {long:.9}, margin {:.3e}", short - long),
    )
}

fn convergence() -> Outcome {
    timed(secs(300), || {
        let mut meds = Vec::new();
        for n in [100usize, 1000, 10_000] {
            let config = MarketConfig::uniform(n, 2, 2 * n).with_seed(42);
            let traj = estimate_trajectory(&config, 2.0, 2 * n + 1, 200).unwrap();
            meds.push(traj.median_sup_deviation());
        }
        let decreasing = meds.windows(2).all(|w| w[1] < w[0]);
        outcome(
            decreasing,
            format!(
                "d=2, 200 reps: median sup deviation {:.5} (n=100) > {:.5} (n=1000) > {:.5} (n=10000)",
                meds[0], meds[1], meds[2]
            ),
        )
    })
}

/// Distance from an exact value in standard errors, with the binomial
/// standard error under the exact value as a floor for proportions.
fn z_score(est: &Estimate, exact: f64, proportion: bool) -> f64 {
    let floor = if proportion {
        (exact * (1.0 - exact) / est.reps as f64).max(0.0).sqrt()
    } else {
        0.0
    };
    let se = est.stderr.max(floor);
    let dev = (est.mean - exact).abs();
    if dev <= 1e-12 {
        0.0
    } else if se == 0.0 {
        f64::INFINITY
    } else {
        dev / se
    }
}

fn oracle_equivalence() -> Outcome {
    timed(secs(120), || {
        let reps = 1_000_000;
        let mut cells = 0;
        let mut worst = 0.0f64;
        let mut worst_at = String::new();
        let mut seed = 1000;
        for n in 2..=5usize {
            for d in 1..=n.min(3) {
                for m in [3usize, 5] {
                    seed += 1;
                    cells += 1;
                    let config = MarketConfig::uniform(n, d, m).with_seed(seed);
                    let indices: Vec<usize> = (1..=m).collect();
                    let stats = estimate_student_stats(&config, &indices, 1, reps).unwrap();
                    let p = exact_match_curve::<f64>(n, d, m).unwrap();
                    let top = exact_rank_cdf_curve::<f64>(n, d, m, 1).unwrap();
                    let taken = expected_taken_curve::<f64>(n, d, m).unwrap();
                    let mut check = |z: f64, what: &str| {
                        if z > worst {
                            worst = z;
                            worst_at = format!("n={n} d={d} m={m} {what}");
                        }
                    };
                    for (k, s) in stats.iter().enumerate() {
                        check(z_score(&s.p_match, p[k], true), "match");
                        check(z_score(&s.rank_cdf, top[k], true), "top-1");
                        check(z_score(&s.taken_mean, taken[k], false), "taken");
                    }
                    let school = estimate_school_match_prob(&config, m, reps).unwrap();
                    check(z_score(&school, taken[m - 1] / n as f64, true), "school");
                    let rsd = estimate_rsd(&config, reps).unwrap();
                    check(z_score(&rsd, p.iter().sum::<f64>() / m as f64, false), "rsd");
                }
            }
        }
        outcome(
            cells >= 20 && worst <= 4.0,
            format!("{cells} cells at 1e6 reps, worst |z| {worst:.2} ({worst_at}); tol 4"),
        )
    })
}

fn multi_seat() -> Outcome {
    let mut gap = 0.0f64;
    for d in [1.0f64, 2.0, 3.0] {
        for q in [1usize, 2, 4] {
            let horizon = 3.0 * q as f64;
            let tau = tau_rescaled_solve(d, q, horizon, 1e-3).unwrap();
            let direct = multi_seat_solve(d, q, horizon, 1e-3).unwrap();
            for j in 0..tau.len() {
                gap = gap.max((tau.x[j] - direct.x[j]).abs());
            }
        }
    }
    let erlang = multi_seat_solve(1.0f64, 4, 12.0, 1e-3).unwrap();
    let mut err = 0.0f64;
    for (j, &t) in erlang.t_grid.iter().enumerate() {
        err = err.max((erlang.x[j] - erlang_solution(4, t).0).abs());
    }
    outcome(
        gap <= 1e-4 && err <= 1e-6,
        format!("clock-change vs direct {gap:.2e} (tol 1e-4); Erlang q=4 error {err:.2e} (tol 1e-6)"),
    )
}

fn conjecture() -> Outcome {
    timed(secs(600), || {
        let r = verify_conjecture(20, 15, 1e-6, 1e-3).unwrap();
        outcome(
            r.status == Status::Pass,
            format!("{}; margin {:.3e}", r.details.join("; "), r.margin),
        )
    })
}

fn nonuniform_reproduction() -> Outcome {
    timed(secs(900), || {
        let mut parts = Vec::new();
        let mut pass = true;
        for kind in DistributionKind::NAMED {
            let r = verify_main_discrete_mc(1000, &[1, 2, 4, 10, 20], kind, 10_000, 42).unwrap();
            pass &= !r.status.is_failure() && r.margin >= 0.0;
            parts.push(format!("{kind} {} (margin {:.2e})", r.status, r.margin));
        }
        outcome(pass, parts.join(", "))
    })
}

fn theorem_spot_checks() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for d in [1.0f64, 2.0, 5.0, 10.0, 50.0] {
        worst = worst.max(integral_condition(d).unwrap());
    }
    let bounds = verify_xd_bounds(100.0).unwrap();
    outcome(
        worst <= 1e-8 && bounds.margin >= 0.0,
        format!(
            "max integral {worst:.3e} (tol 1e-8); x(d,1) bound slack {:.3e} over d in [1,100]",
            bounds.margin
        ),
    )
}

fn listmatch(args: &[&str], threads: usize) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_listmatch"))
        .arg("--threads")
        .arg(threads.to_string())
        .args(args)
        .env_remove("LISTMATCH_SEED")
        .output()
        .expect("binary runs")
}

/// Compares every output file in `a` with its namesake in `b`. Manifests
/// carry wall-clock times and are skipped.
fn same_outputs(a: &Path, b: &Path) -> Result<usize, String> {
    let mut compared = 0;
    for entry in std::fs::read_dir(a).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        if path.is_dir() || name.contains("manifest") {
            continue;
        }
        match (std::fs::read(&path), std::fs::read(b.join(&name))) {
            (Ok(x), Ok(y)) if x == y => compared += 1,
            _ => return Err(format!("{name} differs")),
        }
    }
    Ok(compared)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let mut runs = Vec::new();
    for threads in [1usize, 4] {
        let sub = root.join(format!("t{threads}"));
        std::fs::create_dir_all(&sub).unwrap();
        let csv = sub.join("run.csv");
        let sim = listmatch(
            &[
                "simulate", "--n", "300", "--d", "1,2,4", "--dist", "two-class", "--reps",
                "3000", "--i", "1..300:7", "--seed", "7", "--out", csv.to_str().unwrap(),
            ],
            threads,
        );
        let ver = listmatch(
            &[
                "verify", "--suite", "school-love,corollary-serial,xts", "--n", "200",
                "--reps", "1500", "--out-dir", sub.join("v").to_str().unwrap(),
            ],
            threads,
        );
        runs.push((sub, sim.status.success() && ver.status.success()));
    }
    // Replaying the single-thread manifests with three threads.
    let replay = root.join("replay");
    let r1 = listmatch(
        &[
            "replay",
            root.join("t1/run.manifest.json").to_str().unwrap(),
            "--out-dir",
            replay.to_str().unwrap(),
        ],
        3,
    );
    let r2 = listmatch(
        &[
            "replay",
            root.join("t1/v/manifest.json").to_str().unwrap(),
            "--out-dir",
            replay.join("v").to_str().unwrap(),
        ],
        3,
    );
    let ran = runs.iter().all(|r| r.1) && r1.status.success() && r2.status.success();
    let mut problems = Vec::new();
    let mut compared = 0;
    for other in [root.join("t4"), replay] {
        for (a, b) in [(root.join("t1"), other.clone()), (root.join("t1/v"), other.join("v"))] {
            match same_outputs(&a, &b) {
                Ok(c) => compared += c,
                Err(e) => problems.push(e),
            }
        }
    }
    let summary = if !ran {
        "a command exited nonzero".to_string()
    } else if problems.is_empty() {
        format!("{compared} output files identical across 1 and 4 threads and a 3-thread replay")
    } else {
        problems.join(", ")
    };
    outcome(ran && problems.is_empty() && compared > 0, summary)
}

fn main() -> ExitCode {
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("closed-form ODE accuracy", closed_form_accuracy),
        ("crossing time", crossing),
        ("bound sandwich", bound_sandwich),
        ("monotonicity in d (exact)", monotonicity),
        ("crossing existence", crossing_existence),
        ("convergence to the continuum", convergence),
        ("oracle equivalence", oracle_equivalence),
        ("multi-seat cross-validation", multi_seat),
        ("conjecture scan", conjecture),
        ("non-uniform reproduction", nonuniform_reproduction),
        ("theorem spot-checks", theorem_spot_checks),
        ("determinism across threads", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let id = (k + 1).to_string();
        if !filter.is_empty() && !filter.iter().any(|f| *f == id || name.contains(f.as_str())) {
            continue;
        }
        let out = check();
        println!(
            "{} {:>2}. {name}: {}",
            if out.pass { "PASS" } else { "FAIL" },
            k + 1,
            out.summary
        );
        failed += (!out.pass) as usize;
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
