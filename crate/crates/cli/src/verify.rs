use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use listmatch::verify::{self as suites, ids, Evidence, FigureProtocol, VerificationReport};
use listmatch::DistributionKind;

use crate::args::VerifyArgs;
use crate::manifest::RunManifest;
use crate::usage;

fn selected(spec: &str) -> Result<Vec<&'static str>> {
    let mut out = Vec::new();
    for name in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if name == "all" {
            return Ok(ids::ALL.to_vec());
        }
        // Accept the long form of the serial-dictatorship corollary name.
        let name = if name == "rsd" { ids::COROLLARY_SERIAL } else { name };
        match ids::ALL.iter().find(|&&id| id == name) {
            Some(&id) if !out.contains(&id) => out.push(id),
            Some(_) => {}
            None => {
                return Err(usage(
                    "--suite",
                    format!("unknown suite `{name}`; choose from all, {}", ids::ALL.join(", ")),
                ))
            }
        }
    }
    if out.is_empty() {
        return Err(usage("--suite", "no suite given"));
    }
    Ok(out)
}

fn run_suite(id: &str, a: &VerifyArgs) -> Result<VerificationReport> {
    let n = a.n;
    let reps = |default: u64| a.reps.unwrap_or(default);
    let report = match id {
        ids::MAIN_DISCRETE => {
            if a.dist == DistributionKind::Uniform {
                let d_max = a.d_max.unwrap_or(20).min(n);
                suites::verify_main_discrete(n, &(1..=d_max).collect::<Vec<_>>(), Evidence::Exact)?
            } else {
                let evidence = Evidence::MonteCarlo {
                    kind: a.dist,
                    reps: reps(10_000),
                    seed: a.seed,
                };
                let ds: Vec<usize> = [1, 2, 4, 10, 20].into_iter().filter(|&d| d <= n).collect();
                suites::verify_main_discrete(n, &ds, evidence)?
            }
        }
        ids::SCHOOL_LOVE => suites::verify_school_love(n, &small_ds(n), reps(10_000), a.seed)?,
        ids::CROSSING_DISCRETE => suites::verify_crossing_discrete(n, 1, 2)?,
        ids::BOUND_DISCRETE => suites::verify_bound_discrete(n, a.d_max.unwrap_or(10).min(n))?,
        ids::WORST_CASE_RANK => {
            let cells: Vec<(usize, usize)> = (1..=3usize)
                .filter(|&d| d < n)
                .flat_map(|d| (1..=d).map(move |k| (d, k)))
                .collect();
            suites::verify_worst_case_rank(n, &cells)?
        }
        ids::BOUND_CTS => suites::verify_bound_cts(20, a.d_max.unwrap_or(100))?,
        ids::XTS => {
            let sizes = [n / 10, n, n * 10];
            if sizes[0] < 2 {
                return Err(usage("--n", "xts needs n >= 20"));
            }
            suites::verify_xts_convergence(&sizes, 2, 2.0, reps(200), a.seed)?
        }
        ids::PROB_TO_XPRIME => suites::verify_prob_to_xprime(n, &small_ds(n), reps(2_000), a.seed)?,
        ids::COROLLARY_SERIAL => {
            suites::verify_corollary_serial(n, n, &small_ds(n), reps(10_000), a.seed)?
        }
        ids::CONJECTURE => {
            suites::verify_conjecture(a.q_max, a.d_max.unwrap_or(15), 1e-6, 1e-3)?
        }
        ids::XD_BOUNDS => suites::verify_xd_bounds(a.d_max.unwrap_or(100) as f64)?,
        ids::IG => suites::verify_integral_condition(&[1.0, 2.0, 5.0, 10.0, 50.0])?,
        ids::FIGURES => {
            let protocol = FigureProtocol {
                n,
                d_set: [1, 2, 4, 10, 20].into_iter().filter(|&d| d <= n).collect(),
                reps: reps(10_000),
                seed: a.seed,
                ..FigureProtocol::default()
            };
            suites::verify_figures(&protocol)?.0
        }
        other => unreachable!("unlisted suite {other}"),
    };
    Ok(report)
}

fn small_ds(n: usize) -> Vec<usize> {
    [1, 2, 4].into_iter().filter(|&d| d <= n).collect()
}

pub fn run(a: &VerifyArgs) -> Result<ExitCode> {
    let started = Instant::now();
    let suites = selected(&a.suite)?;
    if a.n < 2 {
        return Err(usage("--n", "need at least two schools"));
    }
    if a.reps == Some(0) {
        return Err(usage("--reps", "need at least one replication"));
    }
    if a.d_max == Some(0) {
        return Err(usage("--d-max", "must be at least 1"));
    }
    if a.q_max == 0 {
        return Err(usage("--q-max", "must be at least 1"));
    }
    std::fs::create_dir_all(&a.out_dir)
        .with_context(|| format!("creating {}", a.out_dir.display()))?;

    let mut outputs = Vec::new();
    let mut failed = 0;
    for id in suites {
        let mut report = run_suite(id, a)?;
        report.write_artifacts(&a.out_dir)?;
        let path = a.out_dir.join(format!("{id}.json"));
        std::fs::write(&path, report.to_json())?;
        outputs.push(path);
        outputs.extend(report.artifacts.iter().map(|f| a.out_dir.join(f)));
        println!("{}", report.summary_line());
        failed += report.status.is_failure() as usize;
    }
    RunManifest::new("verify", a, Some(a.seed), outputs, started)?
        .write(&a.out_dir.join("manifest.json"))?;
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        eprintln!("{failed} claim(s) failed");
        ExitCode::from(1)
    })
}
