use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use listmatch::continuum::{crossing_time, solve_ivp};
use listmatch::montecarlo::sample_trajectories;
use listmatch::table::Table;
use listmatch::verify::{verify_figures, FigureProtocol};
use listmatch::MarketConfig;

use crate::args::FiguresArgs;
use crate::manifest::RunManifest;
use crate::svg::{color, render, render_grid, Chart, Series};
use crate::usage;

const FIGURES: [&str; 3] = ["d1-vs-d2", "overlay", "nonuniform"];

pub fn run(a: &FiguresArgs) -> Result<ExitCode> {
    let started = Instant::now();
    let chosen: Vec<&str> = if a.fig == "all" {
        FIGURES.to_vec()
    } else {
        match FIGURES.iter().find(|&&f| f == a.fig) {
            Some(&f) => vec![f],
            None => {
                return Err(usage(
                    "--fig",
                    format!("unknown figure `{}`; choose from all, {}", a.fig, FIGURES.join(", ")),
                ))
            }
        }
    };
    if a.n < 2 {
        return Err(usage("--n", "need at least two schools"));
    }
    if a.d == 0 || a.d > a.n {
        return Err(usage("--d", format!("{} is outside 1..={}", a.d, a.n)));
    }
    if a.reps == Some(0) {
        return Err(usage("--reps", "need at least one replication"));
    }
    std::fs::create_dir_all(&a.out_dir)?;
    let mut outputs = Vec::new();
    for fig in chosen {
        let written = match fig {
            "d1-vs-d2" => d1_vs_d2(&a.out_dir)?,
            "overlay" => overlay(a)?,
            _ => nonuniform(a)?,
        };
        for p in &written {
            println!("wrote {}", p.display());
        }
        outputs.extend(written);
    }
    RunManifest::new("figures", a, Some(a.seed), outputs, started)?
        .write(&a.out_dir.join("manifest.json"))?;
    Ok(ExitCode::SUCCESS)
}

fn write_svg(path: &Path, svg: &str) -> Result<()> {
    std::fs::write(path, svg)?;
    Ok(())
}

/// Taken fraction and match rate for lists of length 1 and 2, with the
/// time after which the shorter list matches more often.
fn d1_vs_d2(dir: &Path) -> Result<Vec<PathBuf>> {
    let one = solve_ivp(1.0, 3.0, 1e-3)?;
    let two = solve_ivp(2.0, 3.0, 1e-3)?;
    let crossing: f64 = crossing_time(1.0, 2.0)?;
    let mut table = Table::new(["t", "x_d1", "rate_d1", "x_d2", "rate_d2"]);
    for j in 0..one.len() {
        table.push(vec![
            one.t_grid[j].into(),
            one.x[j].into(),
            one.x_prime[j].into(),
            two.x[j].into(),
            two.x_prime[j].into(),
        ]);
    }
    let mut marker = Table::new(["name", "value"]);
    marker.push(vec!["crossing_time".into(), crossing.into()]);

    let path_of = |v: &[f64]| -> Vec<(f64, f64)> {
        one.t_grid.iter().copied().zip(v.iter().copied()).collect()
    };
    let label = format!("t = {crossing:.3}");
    let mut fractions = Chart::new("Taken fraction", "t", "x_d(t)");
    fractions.series.push(Series::new("d = 1", color(0), path_of(&one.x)));
    fractions.series.push(Series::new("d = 2", color(1), path_of(&two.x)));
    fractions.markers.push((crossing, label.clone()));
    let mut rates = Chart::new("Match rate", "t", "x_d'(t)");
    rates.series.push(Series::new("d = 1", color(0), path_of(&one.x_prime)));
    rates.series.push(Series::new("d = 2", color(1), path_of(&two.x_prime)));
    rates.markers.push((crossing, label));

    let csv = dir.join("d1-vs-d2.csv");
    let csv_marker = dir.join("d1-vs-d2-crossing.csv");
    let svg = dir.join("d1-vs-d2.svg");
    table.write(&csv)?;
    marker.write(&csv_marker)?;
    write_svg(&svg, &render_grid(&[fractions.fit(), rates.fit()], 2, 420.0, 320.0))?;
    Ok(vec![csv, csv_marker, svg])
}

/// Simulated taken-fraction paths with the continuum curve on top.
fn overlay(a: &FiguresArgs) -> Result<Vec<PathBuf>> {
    let reps = a.reps.unwrap_or(100);
    let t_max = 2.0;
    let grid: Vec<f64> = (0..=200).map(|g| t_max * g as f64 / 200.0).collect();
    let config = MarketConfig::uniform(a.n, a.d, 2 * a.n).with_seed(a.seed);
    let paths = sample_trajectories(&config, &grid, reps)?;
    let sol = solve_ivp(a.d as f64, t_max, 1e-3)?;

    let mut table = Table::new(["rep", "t", "fraction"]);
    for (r, path) in paths.iter().enumerate() {
        for (t, f) in grid.iter().zip(path) {
            table.push(vec![r.into(), (*t).into(), (*f).into()]);
        }
    }
    let mut continuum = Table::new(["t", "x"]);
    for &t in &grid {
        continuum.push(vec![t.into(), sol.x_at(t).into()]);
    }
    let mut chart = Chart::new(
        &format!("{reps} simulations, n = {}, d = {}", a.n, a.d),
        "t = i / n",
        "taken fraction",
    );
    for path in &paths {
        chart
            .series
            .push(Series::faint(color(0), grid.iter().copied().zip(path.iter().copied()).collect()));
    }
    chart.series.push(Series::new(
        "continuum",
        color(1),
        grid.iter().map(|&t| (t, sol.x_at(t))).collect(),
    ));
    let csv = a.out_dir.join("overlay-paths.csv");
    let csv_cts = a.out_dir.join("overlay-continuum.csv");
    let svg = a.out_dir.join("overlay.svg");
    table.write(&csv)?;
    continuum.write(&csv_cts)?;
    write_svg(&svg, &render(&chart.fit(), 560.0, 400.0))?;
    Ok(vec![csv, csv_cts, svg])
}

/// One row per popularity law: school weights, taken fraction and match
/// probability against the student index, one curve per list length.
fn nonuniform(a: &FiguresArgs) -> Result<Vec<PathBuf>> {
    let protocol = FigureProtocol {
        n: a.n,
        d_set: [1, 2, 4, 10, 20].into_iter().filter(|&d| d <= a.n).collect(),
        reps: a.reps.unwrap_or(10_000),
        seed: a.seed,
        ..FigureProtocol::default()
    };
    let (mut report, panels) = verify_figures(&protocol)?;
    let mut charts = Vec::new();
    for panel in &panels {
        let kind = panel.dist.kind();
        let mut weights = Chart::new(&format!("{kind}: weights"), "school j", "p(j)");
        weights.series.push(Series::new(
            kind.name(),
            color(5),
            panel
                .dist
                .weights()
                .iter()
                .enumerate()
                .map(|(j, w)| ((j + 1) as f64, *w))
                .collect(),
        ));
        let mut taken = Chart::new(&format!("{kind}: taken fraction"), "student i", "E[T_i] / n");
        let mut matched = Chart::new(&format!("{kind}: match probability"), "student i", "P(M_i = 1)");
        for (k, (d, stats)) in panel.curves.iter().enumerate() {
            let label = format!("d = {d}");
            taken.series.push(Series::new(
                &label,
                color(k),
                stats
                    .iter()
                    .map(|s| (s.i as f64, s.taken_mean.mean / a.n as f64))
                    .collect(),
            ));
            matched.series.push(Series::new(
                &label,
                color(k),
                stats.iter().map(|s| (s.i as f64, s.p_match.mean)).collect(),
            ));
        }
        let mut weights = weights.fit();
        weights.y_range.0 = 0.0;
        charts.extend([weights, taken.fit(), matched.fit()]);
    }
    let mut written = Vec::new();
    for (name, table) in &report.tables {
        let path = a.out_dir.join(format!("nonuniform-{name}.csv"));
        table.write(&path)?;
        written.push(path);
    }
    report.tables.clear();
    let json = a.out_dir.join("nonuniform-report.json");
    std::fs::write(&json, report.to_json())?;
    let svg = a.out_dir.join("nonuniform.svg");
    write_svg(&svg, &render_grid(&charts, 3, 380.0, 260.0))?;
    written.extend([json, svg]);
    Ok(written)
}
