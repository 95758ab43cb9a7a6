//! Scenario-driven construction and flow orchestration: build the initial
//! curve for a start time, rebuild the exact piecewise-soliton reference at
//! any later time, and march the whole start-time ladder in parallel.

use csflab::chain::ScenarioClass;
use csflab::flow::{
    mollify_corners, run_flow_graph, run_flow_parametric, EndMotion, FlowError, PolyCurve,
};
use csflab::glue::{barrier_chain, broken_curve, glued_graph, graph_grid};
use csflab::measure::{area_between, crossings_and_tangents, strip_distance, total_curvature};
use csflab::reaper::GrimReaper;
use csflab::{Corner, GlueError, MeasureError, Point, ReaperError};
use rayon::prelude::*;
use thiserror::Error;

use crate::artifacts::DiagRow;
use crate::scenario::Scenario;

#[derive(Debug, Error)]
pub enum DriverError {
    #[error(transparent)]
    Glue(#[from] GlueError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Reaper(#[from] ReaperError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// An initial curve built for one start time, with everything the build
/// report needs.
pub struct Built {
    pub points: Vec<Point>,
    pub closed: bool,
    /// Indices into `points` of the corner vertices (convex chains).
    pub corner_vertices: Vec<usize>,
    pub corners: Vec<Corner>,
    /// One sampled polyline per barrier (general chains; convex chains are
    /// their own single barrier and leave this empty).
    pub barriers: Vec<Vec<Point>>,
    /// Y-axis crossings / vertical tangent points of open curves.
    pub crossings: Vec<Point>,
    pub tangents: Vec<Point>,
}

/// The exact comparison curve at time `t` (same construction as the initial
/// data, re-evaluated), plus the sum of its corner opening angles.
pub struct Reference {
    pub points: Vec<Point>,
    pub angle_sum: f64,
}

/// A completed (or cleanly failed) ladder entry: snapshot polylines and
/// per-snapshot diagnostics.
pub struct LadderRun {
    pub start_time: f64,
    pub closed: bool,
    pub times: Vec<f64>,
    pub curves: Vec<Vec<Point>>,
    pub diag: Vec<DiagRow>,
    /// Set when this run stopped early or failed to construct; sibling
    /// runs are unaffected.
    pub failure: Option<String>,
}

/// Uniform y-grid used for embedded (graph) scenarios.
pub fn scenario_grid(sc: &Scenario) -> Vec<f64> {
    let heights = sc.chain.heights();
    let lo = heights.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = heights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo - 2.0 * sc.flow.graph_margin;
    let points = ((span / sc.flow.resolution).round() as usize + 1).max(16);
    graph_grid(&sc.chain, sc.flow.graph_margin, points)
}

/// Build the initial curve for time `t`: a closed broken curve for compact
/// chains, a glued graph for strictly monotone ones, and a barrier
/// assembly for every other noncompact chain (a single-run chain is its
/// own lone barrier).
pub fn build_initial(sc: &Scenario, t: f64) -> Result<Built, DriverError> {
    let chain = &sc.chain;
    match chain.class() {
        ScenarioClass::Embedded => {
            let graph = glued_graph(chain, t, &scenario_grid(sc))?;
            let points = graph.to_points();
            let (crossings, tangents) = crossings_and_tangents(&points);
            Ok(Built {
                points,
                closed: false,
                corner_vertices: Vec::new(),
                corners: Vec::new(),
                barriers: Vec::new(),
                crossings,
                tangents,
            })
        }
        ScenarioClass::Convex if chain.is_compact() => {
            let broken = broken_curve(chain, t, sc.flow.resolution)?;
            let points = broken.polyline();
            Ok(Built {
                points,
                closed: true,
                corner_vertices: broken.corner_vertex_indices(),
                corners: broken.corners.clone(),
                barriers: Vec::new(),
                crossings: Vec::new(),
                tangents: Vec::new(),
            })
        }
        _ => {
            let assembly = barrier_chain(chain, t, sc.flow.resolution)?;
            let points = assembly.curve.clone();
            let (crossings, tangents) = crossings_and_tangents(&points);
            let corners: Vec<Corner> = assembly
                .barriers
                .iter()
                .flat_map(|b| b.corners.iter().copied())
                .collect();
            let barriers: Vec<Vec<Point>> =
                assembly.barriers.iter().map(|b| b.polyline()).collect();
            Ok(Built {
                points,
                closed: false,
                corner_vertices: Vec::new(),
                corners,
                barriers,
                crossings,
                tangents,
            })
        }
    }
}

/// Rebuild the exact reference curve at time `t`.
pub fn reference(sc: &Scenario, t: f64) -> Result<Reference, DriverError> {
    let chain = &sc.chain;
    match chain.class() {
        ScenarioClass::Embedded => {
            let graph = glued_graph(chain, t, &scenario_grid(sc))?;
            Ok(Reference { points: graph.to_points(), angle_sum: 0.0 })
        }
        ScenarioClass::Convex if chain.is_compact() => {
            let broken = broken_curve(chain, t, sc.flow.resolution)?;
            let angle_sum = broken.corners.iter().map(|c| c.angle).sum();
            Ok(Reference { points: broken.polyline(), angle_sum })
        }
        _ => {
            let assembly = barrier_chain(chain, t, sc.flow.resolution)?;
            let angle_sum = assembly
                .barriers
                .iter()
                .flat_map(|b| b.corners.iter())
                .map(|c| c.angle)
                .sum();
            Ok(Reference { points: assembly.curve, angle_sum })
        }
    }
}

/// Repeat the seam vertex so closed polylines measure as full loops.
pub fn closed_loop(points: &[Point]) -> Vec<Point> {
    let mut out = points.to_vec();
    if let Some(&first) = points.first() {
        out.push(first);
    }
    out
}

/// Sample one soliton as a graph over its strip (for rendering).
pub fn sample_soliton(g: &GrimReaper, t: f64, samples: usize) -> Vec<Point> {
    let (lo, hi) = (g.asymptote_low(), g.asymptote_high());
    let margin = (hi - lo) * 1e-4;
    (0..samples)
        .filter_map(|i| {
            let y = lo + margin + (hi - lo - 2.0 * margin) * i as f64 / (samples as f64 - 1.0);
            g.x_of_y(y, t).ok().map(|x| Point::new(x, y))
        })
        .collect()
}

fn diag_extras(sc: &Scenario, t: f64, points: &[Point], closed: bool) -> Result<(f64, f64, f64), DriverError> {
    let reference = reference(sc, t)?;
    let (flowed, refpts) = if closed {
        (closed_loop(points), closed_loop(&reference.points))
    } else {
        (points.to_vec(), reference.points)
    };
    let area = area_between(&flowed, &refpts)?.value;
    let strip = strip_distance(&flowed, &refpts);
    Ok((area, reference.angle_sum, strip))
}

fn scalar_stats(points: &[Point], closed: bool) -> Result<(f64, f64, f64, f64), DriverError> {
    let poly = PolyCurve::new(points.to_vec(), closed)?;
    let turning = total_curvature(points, closed);
    let max_curvature = poly.curvatures().into_iter().fold(0.0f64, f64::max);
    Ok((poly.length(), turning, max_curvature, poly.min_edge()))
}

fn translate_ends(sc: &Scenario) -> (EndMotion, EndMotion) {
    let first = sc.chain.soliton(0);
    let last = sc.chain.soliton(sc.chain.arc_count() - 1);
    (
        EndMotion::Translate(Point::new(first.parity() * first.velocity(), 0.0)),
        EndMotion::Translate(Point::new(last.parity() * last.velocity(), 0.0)),
    )
}

fn run_parametric_one(sc: &Scenario, t0: f64) -> Result<LadderRun, DriverError> {
    let built = build_initial(sc, t0)?;
    let poly = PolyCurve::new(built.points.clone(), built.closed)?;
    let params = sc.flow.params();
    let smooth = if built.corner_vertices.is_empty() {
        poly
    } else {
        mollify_corners(&poly, &built.corner_vertices, params.mollify_radius, params.h)
    };
    let ends = if built.closed {
        (EndMotion::Fixed, EndMotion::Fixed)
    } else {
        translate_ends(sc)
    };
    let run = run_flow_parametric(&smooth, t0, sc.end_time, &params, ends);

    let mut diag = Vec::with_capacity(run.times.len());
    for (i, &t) in run.times.iter().enumerate() {
        let d = run.diagnostics[i];
        let (area, corner_angle_sum, strip) =
            diag_extras(sc, t, &run.curves[i].points, built.closed)?;
        diag.push(DiagRow {
            t,
            length: d.length,
            total_turning: d.total_turning,
            max_curvature: d.max_curvature,
            min_edge: d.min_edge,
            area,
            corner_angle_sum,
            strip_distance: strip,
        });
    }
    Ok(LadderRun {
        start_time: t0,
        closed: built.closed,
        times: run.times,
        curves: run.curves.into_iter().map(|c| c.points).collect(),
        diag,
        failure: run.failure.map(|e| e.to_string()),
    })
}

fn run_graph_one(sc: &Scenario, t0: f64) -> Result<LadderRun, DriverError> {
    let chain = &sc.chain;
    let grid = scenario_grid(sc);
    let initial = glued_graph(chain, t0, &grid)?;
    let heights = chain.heights();
    let increasing = heights[heights.len() - 1] > heights[0];
    let lower = chain.soliton(if increasing { 0 } else { chain.arc_count() - 1 });
    let upper = chain.soliton(if increasing { chain.arc_count() - 1 } else { 0 });
    let (y_lo, y_hi) = (grid[0], *grid.last().expect("nonempty grid"));
    let bc = move |t: f64| {
        (
            lower.x_of_y(y_lo, t).expect("grid start inside the lower strip"),
            upper.x_of_y(y_hi, t).expect("grid end inside the upper strip"),
        )
    };
    let run = run_flow_graph(&initial, t0, sc.end_time, &sc.flow.params(), &bc);

    let mut times = Vec::with_capacity(run.times.len());
    let mut curves = Vec::with_capacity(run.times.len());
    let mut diag = Vec::with_capacity(run.times.len());
    for (i, &t) in run.times.iter().enumerate() {
        let points: Vec<Point> = run.grid
            .iter()
            .zip(&run.values[i])
            .map(|(&y, &x)| Point::new(x, y))
            .collect();
        let (length, total_turning, max_curvature, min_edge) = scalar_stats(&points, false)?;
        let (area, corner_angle_sum, strip) = diag_extras(sc, t, &points, false)?;
        diag.push(DiagRow {
            t,
            length,
            total_turning,
            max_curvature,
            min_edge,
            area,
            corner_angle_sum,
            strip_distance: strip,
        });
        times.push(t);
        curves.push(points);
    }
    Ok(LadderRun {
        start_time: t0,
        closed: false,
        times,
        curves,
        diag,
        failure: None,
    })
}

fn run_one(sc: &Scenario, t0: f64) -> LadderRun {
    let result = match sc.chain.class() {
        ScenarioClass::Embedded => run_graph_one(sc, t0),
        _ => run_parametric_one(sc, t0),
    };
    result.unwrap_or_else(|e| LadderRun {
        start_time: t0,
        closed: false,
        times: Vec::new(),
        curves: Vec::new(),
        diag: Vec::new(),
        failure: Some(e.to_string()),
    })
}

/// Run every start time of the ladder in a work pool; failures stay local
/// to their run.
pub fn run_ladder(sc: &Scenario) -> Vec<LadderRun> {
    sc.start_times.par_iter().map(|&t0| run_one(sc, t0)).collect()
}
