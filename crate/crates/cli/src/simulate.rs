use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use listmatch::montecarlo::{estimate_student_stats, push_stats_rows, STATS_HEADER};
use listmatch::table::Table;
use listmatch::{DistributionSpec, MarketConfig};

use crate::args::SimulateArgs;
use crate::manifest::{manifest_path_for, RunManifest};
use crate::range::parse_indices;
use crate::usage;

pub fn run(a: &SimulateArgs) -> Result<ExitCode> {
    let started = Instant::now();
    if a.n == 0 {
        return Err(usage("--n", "need at least one school"));
    }
    if let Some(&d) = a.d.iter().find(|&&d| d == 0 || d > a.n) {
        return Err(usage("--d", format!("{d} is outside 1..={}", a.n)));
    }
    if a.q == 0 {
        return Err(usage("--q", "need at least one seat per school"));
    }
    if a.reps == 0 {
        return Err(usage("--reps", "need at least one replication"));
    }
    let indices = match &a.i {
        Some(spec) => parse_indices(spec).map_err(|e| usage("--i", e))?,
        None => (1..=a.n).collect(),
    };
    if indices[0] == 0 {
        return Err(usage("--i", "students are numbered from 1"));
    }
    let d_min = *a.d.iter().min().expect("clap requires a value");
    if a.k == 0 || a.k > d_min {
        return Err(usage("--k", format!("{} is outside 1..={d_min}", a.k)));
    }
    let dist = DistributionSpec::named(a.dist, a.n)?;
    let m = *indices.last().expect("non-empty");

    let mut table = Table::new(STATS_HEADER);
    for &d in &a.d {
        let config = MarketConfig::uniform(a.n, d, m)
            .with_seats(a.q)
            .with_dist(dist.clone())
            .with_seed(a.seed);
        let stats = estimate_student_stats(&config, &indices, a.k, a.reps)?;
        push_stats_rows(&mut table, &config, &stats);
    }
    table.write(&a.out)?;
    let manifest_path = manifest_path_for(&a.out);
    RunManifest::new("simulate", a, Some(a.seed), vec![a.out.clone()], started)?
        .write(&manifest_path)?;
    println!(
        "wrote {} rows to {} (manifest {})",
        table.len(),
        a.out.display(),
        manifest_path.display()
    );
    Ok(ExitCode::SUCCESS)
}
