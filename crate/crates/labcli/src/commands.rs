//! The four CLI commands: build, flow, verify, render.

use anyhow::Context;
use csflab::Point;

use crate::artifacts::{
    fmt_f64, read_curve_csv, read_diagnostics_csv, time_tag, write_corners_csv, write_curve_csv,
    write_diagnostics_csv, write_runs_csv, write_text, Annotation, CornerRow, Layout, RunSummary,
};
use crate::driver::{build_initial, run_ladder, sample_soliton, LadderRun};
use crate::scenario::Scenario;
use crate::svg::{self, Layer};
use crate::verify::{run_suite, suite_needs_runs, Check};

const SOLITON_SAMPLES: usize = 512;

fn soliton_layers(sc: &Scenario, t: f64) -> Vec<Layer> {
    sc.chain
        .solitons()
        .iter()
        .enumerate()
        .map(|(k, g)| {
            Layer::soliton(
                format!("soliton {k} (v={:.4})", g.velocity()),
                svg::soliton_color(k),
                sample_soliton(g, t, SOLITON_SAMPLES),
            )
        })
        .collect()
}

/// Snapshot indices emitted as SVG frames / CSV snapshot blocks: every
/// `frame_every`-th recorded snapshot plus the final one.
fn frame_indices(count: usize, every: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..count).step_by(every.max(1)).collect();
    if let Some(last) = count.checked_sub(1) {
        if out.last() != Some(&last) {
            out.push(last);
        }
    }
    out
}

// --- build ---------------------------------------------------------------------

/// Construct the initial curve for every start time; write curve CSVs
/// (axis crossings annotated), corner reports, per-barrier CSVs and an SVG
/// rendering per start time.
pub fn cmd_build(sc: &Scenario, layout: &Layout) -> anyhow::Result<()> {
    for &t0 in &sc.start_times {
        let built = build_initial(sc, t0)
            .with_context(|| format!("building the initial curve at t = {t0}"))?;

        let mut annotations: Vec<Annotation> = built
            .crossings
            .iter()
            .map(|&p| Annotation { kind: "crossing", point: p })
            .collect();
        annotations.extend(
            built
                .tangents
                .iter()
                .map(|&p| Annotation { kind: "vertical-tangent", point: p }),
        );

        let curve_path = layout.timed("build", "initial", t0, "csv");
        write_curve_csv(&curve_path, &[(t0, &built.points)], &annotations)?;

        if !built.corners.is_empty() {
            let rows: Vec<CornerRow> = built
                .corners
                .iter()
                .map(|c| CornerRow {
                    height_index: c.height_index,
                    t: c.time,
                    point: c.location,
                    eta: c.eta,
                    angle: c.angle,
                    predicted_x: c.predicted_x,
                    prediction_gap: c.prediction_gap(),
                })
                .collect();
            write_corners_csv(&layout.timed("build", "corners", t0, "csv"), &rows)?;
        }
        for (i, barrier) in built.barriers.iter().enumerate() {
            let path = layout.timed("build", &format!("barrier{i}"), t0, "csv");
            write_curve_csv(&path, &[(t0, barrier)], &[])?;
        }

        let mut layers = soliton_layers(sc, t0);
        for (i, barrier) in built.barriers.iter().enumerate() {
            layers.push(
                Layer::curve(format!("barrier {i}"), svg::EXTRA_COLOR, barrier.clone())
                    .with_stroke(1.0),
            );
        }
        layers.push(
            Layer::curve(
                format!("initial curve (t={})", time_tag(t0)),
                svg::REFERENCE_COLOR,
                built.points.clone(),
            )
            .with_closed(built.closed),
        );
        let title = format!("{} initial curve at t={}", sc.name, time_tag(t0));
        write_text(
            &layout.timed("build", "initial", t0, "svg"),
            &svg::render(&title, &layers),
        )?;

        println!(
            "BUILD {} t={}: {} vertices ({}), {} corners, {} barriers -> {}",
            sc.name,
            time_tag(t0),
            built.points.len(),
            if built.closed { "closed" } else { "open" },
            built.corners.len(),
            built.barriers.len(),
            curve_path.display()
        );
        for c in &built.corners {
            println!(
                "  corner k={}: location=({}, {}) angle={} predicted_x={}",
                c.height_index,
                fmt_f64(c.location.x),
                fmt_f64(c.location.y),
                fmt_f64(c.angle),
                fmt_f64(c.predicted_x)
            );
        }
        if !built.crossings.is_empty() || !built.tangents.is_empty() {
            println!(
                "  {} axis crossings, {} vertical tangents annotated",
                built.crossings.len(),
                built.tangents.len()
            );
        }
    }
    Ok(())
}

// --- flow ----------------------------------------------------------------------

fn write_run_artifacts(sc: &Scenario, layout: &Layout, run: &LadderRun) -> anyhow::Result<()> {
    let tag = run.start_time;
    write_diagnostics_csv(&layout.timed("flow", "diagnostics", tag, "csv"), &run.diag)?;

    // Every recorded snapshot goes into the CSV so that checks replayed from
    // artifacts see the same time resolution as in-memory runs; the frame
    // cadence only thins the rendered SVGs.
    let blocks: Vec<(f64, &[Point])> = run
        .times
        .iter()
        .zip(&run.curves)
        .map(|(&t, c)| (t, c.as_slice()))
        .collect();
    write_curve_csv(&layout.timed("flow", "snapshots", tag, "csv"), &blocks, &[])?;

    let frames = frame_indices(run.times.len(), sc.flow.frame_every);
    for (k, &i) in frames.iter().enumerate() {
        let t = run.times[i];
        let mut layers = soliton_layers(sc, t);
        layers.push(
            Layer::curve(
                format!("flowed curve (t={t:.4})"),
                svg::FLOWED_COLOR,
                run.curves[i].clone(),
            )
            .with_closed(run.closed),
        );
        let title = format!(
            "{} flow from t={} frame {k} at t={t:.4}",
            sc.name,
            time_tag(tag)
        );
        let name = format!("frame_t{}_{k:04}.svg", time_tag(tag));
        write_text(&layout.file("flow", &name), &svg::render(&title, &layers))?;
    }
    Ok(())
}

/// Flow every start time to the end time (in parallel), writing per-run
/// diagnostics, snapshot CSVs and SVG frames; returns whether every run
/// completed.
pub fn cmd_flow(sc: &Scenario, layout: &Layout) -> anyhow::Result<bool> {
    let runs = run_ladder(sc);
    let mut summaries = Vec::new();
    let mut all_ok = true;
    for run in &runs {
        write_run_artifacts(sc, layout, run)?;
        let status = run.failure.clone().unwrap_or_else(|| "ok".to_string());
        let last_time = run.times.last().copied().unwrap_or(run.start_time);
        println!(
            "FLOW {} start={}: {} snapshots to t={} ({status})",
            sc.name,
            time_tag(run.start_time),
            run.times.len(),
            time_tag(last_time)
        );
        if run.failure.is_some() {
            all_ok = false;
        }
        summaries.push(RunSummary {
            start_time: run.start_time,
            last_time,
            snapshots: run.times.len(),
            status,
        });
    }
    write_runs_csv(&layout.file("flow", "runs.csv"), &summaries)?;
    if !all_ok {
        eprintln!("warning: some runs failed; see {}", layout.file("flow", "runs.csv").display());
    }
    Ok(all_ok)
}

// --- verify --------------------------------------------------------------------

/// Reload the ladder from flow artifacts; `None` when any run's files are
/// missing (the caller then recomputes the ladder in memory).
fn load_ladder(sc: &Scenario, layout: &Layout) -> Option<Vec<LadderRun>> {
    use csflab::chain::ScenarioClass;
    let closed = sc.chain.is_compact() && sc.chain.class() == ScenarioClass::Convex;
    let mut runs = Vec::new();
    for &t0 in &sc.start_times {
        let snapshots = read_curve_csv(&layout.timed("flow", "snapshots", t0, "csv"), "").ok()?;
        let diag = read_diagnostics_csv(&layout.timed("flow", "diagnostics", t0, "csv"), "").ok()?;
        let (times, curves) = snapshots.into_iter().unzip();
        runs.push(LadderRun {
            start_time: t0,
            closed,
            times,
            curves,
            diag,
            failure: None,
        });
    }
    Some(runs)
}

/// Run the requested suite (or every suite enabled in the scenario), using
/// existing flow artifacts when present and recomputing the ladder on
/// demand otherwise. Returns whether every check passed.
pub fn cmd_verify(sc: &Scenario, layout: &Layout, suite: Option<&str>) -> anyhow::Result<bool> {
    let suites: Vec<String> = match suite {
        Some(s) => vec![s.to_string()],
        None => sc.suites.clone(),
    };
    if suites.is_empty() {
        println!(
            "VERIFY {}: no suites enabled (set [verify] suites or pass --suite)",
            sc.name
        );
        return Ok(true);
    }

    let mut runs: Option<Vec<LadderRun>> = None;
    if suites.iter().any(|s| suite_needs_runs(s)) {
        let loaded = load_ladder(sc, layout);
        let computed_on_demand = loaded.is_none();
        if computed_on_demand {
            println!("VERIFY {}: no flow artifacts found, computing runs on demand", sc.name);
        }
        runs = Some(loaded.unwrap_or_else(|| run_ladder(sc)));
    }
    let empty: Vec<LadderRun> = Vec::new();

    let mut report = String::new();
    let mut checks_total = 0usize;
    let mut checks_passed = 0usize;
    for name in &suites {
        let suite_runs = if suite_needs_runs(name) {
            runs.as_deref().unwrap_or(&empty)
        } else {
            &empty
        };
        let checks: Vec<Check> = run_suite(sc, name, suite_runs);
        let mut suite_passed = 0usize;
        for c in &checks {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            let line = format!(
                "CHECK {} {}: {verdict} measured={} bound={} tol={} ({})",
                c.suite,
                c.name,
                fmt_f64(c.measured),
                fmt_f64(c.bound),
                fmt_f64(c.tol),
                c.detail
            );
            println!("{line}");
            report.push_str(&line);
            report.push('\n');
            checks_total += 1;
            if c.passed {
                checks_passed += 1;
                suite_passed += 1;
            }
        }
        let line = format!(
            "SUITE {name}: {} ({suite_passed}/{} checks)",
            if suite_passed == checks.len() { "PASS" } else { "FAIL" },
            checks.len()
        );
        println!("{line}");
        report.push_str(&line);
        report.push('\n');
    }

    let all_passed = checks_passed == checks_total;
    let line = format!(
        "VERIFY {}: {} ({checks_passed}/{checks_total} checks)",
        sc.name,
        if all_passed { "PASS" } else { "FAIL" }
    );
    println!("{line}");
    report.push_str(&line);
    report.push('\n');
    write_text(&layout.file("verify", "report.txt"), &report)?;
    Ok(all_passed)
}

// --- render --------------------------------------------------------------------

/// Re-render layered SVG frames from existing artifacts: closed-form
/// solitons, the built initial curve, and (when flow artifacts exist) the
/// flowed snapshots.
pub fn cmd_render(sc: &Scenario, layout: &Layout) -> anyhow::Result<()> {
    use csflab::chain::ScenarioClass;
    let closed = sc.chain.is_compact() && sc.chain.class() == ScenarioClass::Convex;

    for &t0 in &sc.start_times {
        let initial_path = layout.timed("build", "initial", t0, "csv");
        let hint = "labcli build <scenario>";
        let initial = read_curve_csv(&initial_path, hint)?;
        let initial_points = initial[0].1.clone();

        let snapshots_path = layout.timed("flow", "snapshots", t0, "csv");
        let frames: Vec<Option<(f64, Vec<Point>)>> = if snapshots_path.exists() {
            let snapshots = read_curve_csv(&snapshots_path, "labcli flow <scenario>")?;
            frame_indices(snapshots.len(), sc.flow.frame_every)
                .into_iter()
                .map(|i| Some(snapshots[i].clone()))
                .collect()
        } else {
            vec![None]
        };

        for (k, frame) in frames.iter().enumerate() {
            let t = frame.as_ref().map_or(t0, |(t, _)| *t);
            let mut layers = soliton_layers(sc, t);
            layers.push(
                Layer::curve(
                    format!("initial curve (t={})", time_tag(t0)),
                    svg::REFERENCE_COLOR,
                    initial_points.clone(),
                )
                .with_closed(closed)
                .with_stroke(1.0),
            );
            if let Some((t, points)) = frame {
                layers.push(
                    Layer::curve(format!("flowed curve (t={t:.4})"), svg::FLOWED_COLOR, points.clone())
                        .with_closed(closed),
                );
            }
            let title = format!("{} start t={} frame {k}", sc.name, time_tag(t0));
            let name = format!("frame_t{}_{k:04}.svg", time_tag(t0));
            write_text(&layout.file("render", &name), &svg::render(&title, &layers))?;
        }
        println!(
            "RENDER {} start={}: {} frames -> {}",
            sc.name,
            time_tag(t0),
            frames.len(),
            layout.command_dir("render").display()
        );
    }
    Ok(())
}
