//! Quantitative diagnostics: signed areas between curves and their
//! predicted decay rates, axis-crossing angles, total curvature and its
//! dissipation, crossing/vertical-tangent counts, strip distances, and
//! exponential-rate fitting.

use crate::flow::FlowRun;
use crate::geom::{dist_sq_point_segment, Point};
use crate::glue::Corner;
use crate::reaper::{Branch, GrimReaper};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MeasureError {
    /// The closed circuit bounding the requested area is degenerate.
    #[error("degenerate area circuit (need at least two points per curve)")]
    OrientationError,
    /// No y-axis crossing found near the requested height.
    #[error("no y-axis crossing near height {height}")]
    CrossingNotFound { height: f64 },
    /// Too few usable (positive) samples to fit an exponential rate; the
    /// series is treated as already converged.
    #[error("fewer than three samples above 1e-14; rate fit is degenerate")]
    DegenerateFit,
}

// ---------------------------------------------------------------------------
// Areas
// ---------------------------------------------------------------------------

/// A measured area together with optional rate information.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaReport {
    /// Signed, multiplicity-counted enclosed area.
    pub value: f64,
    /// Numeric dA/dt when consecutive snapshots were differentiated.
    pub rate: Option<f64>,
    /// Model prediction for dA/dt (corner-angle sum or axis-angle
    /// combination) when available.
    pub predicted_rate: Option<f64>,
}

impl AreaReport {
    pub fn new(value: f64) -> Self {
        Self { value, rate: None, predicted_rate: None }
    }

    pub fn with_rate(mut self, rate: f64) -> Self {
        self.rate = Some(rate);
        self
    }

    pub fn with_predicted_rate(mut self, rate: f64) -> Self {
        self.predicted_rate = Some(rate);
        self
    }
}

/// Trapezoidal line integral of `x dy` along the polyline; for a closed
/// polyline the wrap-around edge is included. For a positively oriented
/// (counterclockwise) closed curve this equals the enclosed area.
pub fn line_integral_area(points: &[Point], closed: bool) -> f64 {
    let open_part: f64 = points
        .windows(2)
        .map(|w| 0.5 * (w[0].x + w[1].x) * (w[1].y - w[0].y))
        .sum();
    if closed && points.len() > 1 {
        let (last, first) = (points[points.len() - 1], points[0]);
        open_part + 0.5 * (last.x + first.x) * (first.y - last.y)
    } else {
        open_part
    }
}

/// Multiplicity-counted area enclosed between two curves.
///
/// The circuit runs along `a` forward, jumps straight to the end of `b`,
/// runs `b` backward, and jumps straight back to the start of `a`; the
/// result is the signed area of that closed circuit, i.e.
/// `∮ x dy = ∫_a x dy − ∫_b x dy + connector terms`.
///
/// * Two closed loops passed with coinciding first/last vertices make the
///   connectors vanish and the value is the difference of the loop areas.
/// * Two open arcs with endpoints on the y-axis get connected by the two
///   short axis segments, which is exactly the boundary of the horseshoe
///   regions the decay estimates are about.
pub fn area_between(a: &[Point], b: &[Point]) -> Result<AreaReport, MeasureError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(MeasureError::OrientationError);
    }
    let mut total = line_integral_area(a, false) - line_integral_area(b, false);
    let (a0, a1) = (a[0], a[a.len() - 1]);
    let (b0, b1) = (b[0], b[b.len() - 1]);
    // Connector a_end -> b_end and connector b_start -> a_start.
    total += 0.5 * (a1.x + b1.x) * (b1.y - a1.y);
    total += 0.5 * (b0.x + a0.x) * (a0.y - b0.y);
    Ok(AreaReport::new(total))
}

/// Predicted sweep rate of the area between a broken convex curve and the
/// smooth flow started from it: the sum of the corner opening angles.
pub fn predicted_area_rate_convex(corners: &[Corner]) -> f64 {
    corners.iter().map(|c| c.angle).sum()
}

// ---------------------------------------------------------------------------
// Axis angles
// ---------------------------------------------------------------------------

/// Signed slope angle (vs. the horizontal) of one soliton arm where it
/// crosses the y-axis, computed from the closed form: the arm
/// `y = a ± arcsin(e^phi)/v` has slope `∓ parity · e^phi / sqrt(1-e^{2phi})`
/// at `x = 0`.
pub fn soliton_axis_angle(
    sol: &GrimReaper,
    branch: Branch,
    t: f64,
) -> Result<f64, MeasureError> {
    let phi = sol.branch_exponent(0.0, t);
    let e = phi.exp();
    if e >= 1.0 {
        let height = match branch {
            Branch::Lower => sol.asymptote_low(),
            Branch::Upper => sol.asymptote_high(),
        };
        return Err(MeasureError::CrossingNotFound { height });
    }
    let slope = sol.parity() * e / (1.0 - e * e).sqrt();
    Ok(match branch {
        Branch::Lower => (-slope).atan(),
        Branch::Upper => slope.atan(),
    })
}

/// The y-axis crossing of a sampled curve nearest to `near_height`,
/// with the signed slope angle of the crossing segment. The crossing is
/// linearly interpolated between the bracketing samples.
pub fn curve_axis_angle(
    points: &[Point],
    near_height: f64,
) -> Result<(Point, f64), MeasureError> {
    let mut best: Option<(Point, f64)> = None;
    for w in points.windows(2) {
        let (p, q) = (w[0], w[1]);
        if p.x * q.x > 0.0 || (p.x == 0.0 && q.x == 0.0) {
            continue;
        }
        let s = if p.x == q.x { 0.0 } else { p.x / (p.x - q.x) };
        let cross = Point::new(0.0, p.y + s * (q.y - p.y));
        let angle = (q.y - p.y).atan2(q.x - p.x);
        // Fold the traversal direction out: report the slope angle of the
        // unoriented tangent line, in (-pi/2, pi/2].
        let slope_angle = if angle > std::f64::consts::FRAC_PI_2 {
            angle - std::f64::consts::PI
        } else if angle <= -std::f64::consts::FRAC_PI_2 {
            angle + std::f64::consts::PI
        } else {
            angle
        };
        let dist = (cross.y - near_height).abs();
        if best.is_none_or(|(b, _)| (b.y - near_height).abs() > dist) {
            best = Some((cross, slope_angle));
        }
    }
    best.ok_or(MeasureError::CrossingNotFound { height: near_height })
}

/// The four signed slope angles `(theta1, theta2, theta3, theta4)` where a
/// horseshoe region's boundary meets the y-axis, in the order produced by
/// [`axis_angles`].
pub type AxisAngles = (f64, f64, f64, f64);

/// The four angles controlling the rate of change of one horseshoe area:
/// `theta2`/`theta3` are the analytic slope angles of the reference
/// soliton's lower/upper arms at the y-axis, `theta1`/`theta4` the
/// measured slope angles of the given curve at its crossings nearest the
/// soliton's lower/upper asymptotes.
pub fn axis_angles(
    curve: &[Point],
    sol: &GrimReaper,
    t: f64,
) -> Result<AxisAngles, MeasureError> {
    let theta2 = soliton_axis_angle(sol, Branch::Lower, t)?;
    let theta3 = soliton_axis_angle(sol, Branch::Upper, t)?;
    let (_, theta1) = curve_axis_angle(curve, sol.asymptote_low())?;
    let (_, theta4) = curve_axis_angle(curve, sol.asymptote_high())?;
    Ok((theta1, theta2, theta3, theta4))
}

/// Predicted rate of change of the horseshoe area bounded by the soliton
/// arc (inner), the curve arc (outer), and the two y-axis segments, with
/// all four angles signed slope angles as returned by [`axis_angles`]:
/// transporting the region by the boundary motion gives
/// `dA/dt = -theta1 + theta2 - theta3 + theta4`.
pub fn predicted_area_rate_horseshoe(angles: AxisAngles) -> f64 {
    let (t1, t2, t3, t4) = angles;
    -t1 + t2 - t3 + t4
}

// ---------------------------------------------------------------------------
// Curvature
// ---------------------------------------------------------------------------

/// Total absolute curvature of the polyline: the sum of |exterior turning
/// angles| over the vertices (all vertices for closed curves, interior
/// ones for open curves).
pub fn total_curvature(points: &[Point], closed: bool) -> f64 {
    let n = points.len();
    if n < 3 {
        return 0.0;
    }
    let turn = |prev: Point, p: Point, next: Point| -> f64 {
        let e_in = p - prev;
        let e_out = next - p;
        e_in.cross(e_out).atan2(e_in.dot(e_out)).abs()
    };
    let mut total = 0.0;
    for i in 1..n - 1 {
        total += turn(points[i - 1], points[i], points[i + 1]);
    }
    if closed {
        total += turn(points[n - 2], points[n - 1], points[0]);
        total += turn(points[n - 1], points[0], points[1]);
    }
    total
}

/// Curvature magnitude below which a discrete sign change is treated as
/// flat noise rather than an inflection.
const INFLECTION_FLOOR: f64 = 1e-6;

/// Total curvature and its dissipation at one recorded snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationSample {
    pub time: f64,
    pub total_curvature: f64,
    /// Central-difference dK/dt from the neighboring snapshots.
    pub numeric_rate: f64,
    /// Model rate `-2 Σ |dκ/ds|` summed over detected inflections.
    pub predicted_rate: f64,
}

/// Dissipation of total curvature along a recorded flow: for every
/// interior snapshot, the numeric dK/dt next to the inflection-point
/// prediction. Inflections are discrete curvature sign changes with
/// magnitude above the flatness floor on both sides.
pub fn curvature_dissipation(run: &FlowRun) -> Vec<DissipationSample> {
    let k: Vec<f64> = run
        .curves
        .iter()
        .map(|c| total_curvature(&c.points, c.closed))
        .collect();
    let mut out = Vec::new();
    for i in 1..run.curves.len().saturating_sub(1) {
        let numeric = (k[i + 1] - k[i - 1]) / (run.times[i + 1] - run.times[i - 1]);
        let curve = &run.curves[i];
        let kappa = curve.signed_curvatures();
        let pts = &curve.points;
        // Compare consecutive vertices whose curvature clears the
        // flatness floor; sub-floor vertices in between (e.g. a sample
        // landing exactly on the inflection) are stepped over.
        let mut predicted = 0.0;
        let mut prev: Option<(usize, f64)> = None;
        for (j, &k_j) in kappa.iter().enumerate() {
            if k_j.abs() <= INFLECTION_FLOOR {
                continue;
            }
            if let Some((i, k_i)) = prev {
                if k_i * k_j < 0.0 {
                    let ds: f64 =
                        (i..j).map(|m| pts[m].dist(pts[m + 1])).sum();
                    if ds > 0.0 {
                        predicted -= 2.0 * ((k_j - k_i) / ds).abs();
                    }
                }
            }
            prev = Some((j, k_j));
        }
        out.push(DissipationSample {
            time: run.times[i],
            total_curvature: k[i],
            numeric_rate: numeric,
            predicted_rate: predicted,
        });
    }
    out
}

// ---------------------------------------------------------------------------
// Crossings and vertical tangents
// ---------------------------------------------------------------------------

/// Y-axis crossings and vertical-tangent points of a sampled curve.
///
/// Crossings are strict sign changes of x between consecutive samples,
/// refined by linear interpolation. Vertical tangents are sign changes of
/// the polyline direction's x-component, refined by parabolic
/// interpolation through the three samples around the turning edge pair.
pub fn crossings_and_tangents(points: &[Point]) -> (Vec<Point>, Vec<Point>) {
    let mut crossings = Vec::new();
    for w in points.windows(2) {
        let (p, q) = (w[0], w[1]);
        if p.x * q.x < 0.0 {
            let s = p.x / (p.x - q.x);
            crossings.push(Point::new(0.0, p.y + s * (q.y - p.y)));
        } else if p.x == 0.0 && q.x != 0.0 {
            crossings.push(p);
        }
    }
    // Direction x-components of the edges, skipping exactly-vertical ones.
    let mut tangents = Vec::new();
    let mut prev: Option<(usize, f64)> = None;
    for (i, w) in points.windows(2).enumerate() {
        let dx = w[1].x - w[0].x;
        if dx == 0.0 {
            continue;
        }
        if let Some((j, pdx)) = prev {
            if pdx * dx < 0.0 {
                // Edges j and i turn around between them; the shared
                // stretch of vertices is j+1 ..= i. Refine around its
                // middle with a parabola through three samples.
                let mid = (j + 1 + i).div_euclid(2);
                tangents.push(parabolic_extremum(points, mid));
            }
        }
        prev = Some((i, dx));
    }
    (crossings, tangents)
}

/// Vertex of the parabola through `points[i-1..=i+1]` (in the chord
/// parameter), clamped to that neighborhood; falls back to the middle
/// sample for degenerate configurations.
fn parabolic_extremum(points: &[Point], i: usize) -> Point {
    if i == 0 || i + 1 >= points.len() {
        return points[i.min(points.len() - 1)];
    }
    let (a, b, c) = (points[i - 1], points[i], points[i + 1]);
    let denom = a.x - 2.0 * b.x + c.x;
    if denom.abs() < 1e-300 {
        return b;
    }
    let u = 0.5 * (a.x - c.x) / denom; // extremum of x(u), u in [-1, 1]
    let u = u.clamp(-1.0, 1.0);
    let lag = |fa: f64, fb: f64, fc: f64| {
        fb + 0.5 * u * (fc - fa) + 0.5 * u * u * (fa - 2.0 * fb + fc)
    };
    Point::new(lag(a.x, b.x, c.x), lag(a.y, b.y, c.y))
}

// ---------------------------------------------------------------------------
// Distances and rate fits
// ---------------------------------------------------------------------------

/// One-sided Hausdorff distance: the maximum over samples of `curve` of
/// the distance to the polyline `reference`.
pub fn strip_distance(curve: &[Point], reference: &[Point]) -> f64 {
    if reference.len() < 2 {
        return f64::INFINITY;
    }
    curve
        .iter()
        .map(|&p| {
            reference
                .windows(2)
                .map(|w| dist_sq_point_segment(p, w[0], w[1]))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0f64, f64::max)
        .sqrt()
}

/// Least-squares exponential fit `value ≈ exp(log_intercept + delta · t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    /// The samples that entered the fit (positive values only).
    pub samples: Vec<(f64, f64)>,
    /// Fitted exponential rate (slope of ln value against t).
    pub delta: f64,
    pub log_intercept: f64,
    /// Root-mean-square residual of ln value around the fitted line.
    pub residual: f64,
}

/// Fit an exponential decay/growth rate through positive samples.
/// Samples at or below 1e-14 are discarded as converged-to-zero; fewer
/// than three survivors is a degenerate fit.
pub fn fit_rate(samples: &[(f64, f64)]) -> Result<RateFit, MeasureError> {
    let kept: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|&(_, v)| v > 1e-14)
        .collect();
    if kept.len() < 3 {
        return Err(MeasureError::DegenerateFit);
    }
    let n = kept.len() as f64;
    let (mut st, mut sl, mut stt, mut stl) = (0.0, 0.0, 0.0, 0.0);
    for &(t, v) in &kept {
        let l = v.ln();
        st += t;
        sl += l;
        stt += t * t;
        stl += t * l;
    }
    let denom = n * stt - st * st;
    if denom.abs() < 1e-300 {
        return Err(MeasureError::DegenerateFit);
    }
    let delta = (n * stl - st * sl) / denom;
    let log_intercept = (sl - delta * st) / n;
    let residual = (kept
        .iter()
        .map(|&(t, v)| {
            let r = v.ln() - (log_intercept + delta * t);
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(RateFit { samples: kept, delta, log_intercept, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Chain;
    use crate::flow::{run_flow_parametric, EndMotion, FlowParams, PolyCurve};
    use crate::glue::{broken_curve, corner, glued_graph, graph_grid};
    use std::f64::consts::PI;

    fn circle(r: f64, n: usize) -> Vec<Point> {
        (0..n)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / n as f64;
                Point::new(r * a.cos(), r * a.sin())
            })
            .collect()
    }

    #[test]
    fn circle_line_integral_is_area() {
        let c = circle(1.0, 1000);
        let a = line_integral_area(&c, true);
        assert!((a - PI).abs() < 1e-4, "area {a}");
    }

    #[test]
    fn area_between_self_is_zero() {
        let c = circle(1.3, 400);
        let r = area_between(&c, &c).unwrap();
        assert!(r.value.abs() < 1e-12);
    }

    #[test]
    fn annulus_area() {
        // Closed loops passed with the seam vertex repeated, so the
        // connectors vanish.
        let mut big = circle(2.0, 2000);
        big.push(big[0]);
        let mut small = circle(1.0, 2000);
        small.push(small[0]);
        let r = area_between(&big, &small).unwrap();
        assert!((r.value - 3.0 * PI).abs() < 1e-3, "annulus {}", r.value);
    }

    #[test]
    fn line_integral_negates_under_reversal_and_adds_over_pieces() {
        let pts: Vec<Point> = (0..50)
            .map(|i| {
                let u = i as f64 / 49.0;
                Point::new(u * u - 0.3, (2.5 * u).sin())
            })
            .collect();
        let total = line_integral_area(&pts, false);
        let mut rev = pts.clone();
        rev.reverse();
        assert!((line_integral_area(&rev, false) + total).abs() < 1e-14);
        let first = line_integral_area(&pts[..20], false);
        let second = line_integral_area(&pts[19..], false);
        assert!((first + second - total).abs() < 1e-14);
    }

    #[test]
    fn convex_rate_is_corner_angle_sum() {
        let chain = Chain::with_zero_shifts(vec![0.0, 1.0, 0.0], true).unwrap();
        let t = -5.0;
        let c1 = corner(&chain, 1, t).unwrap();
        let c2 = corner(&chain, 2, t).unwrap();
        let rate = predicted_area_rate_convex(&[c1, c2]);
        assert!((rate - 2.0 * c1.angle).abs() < 1e-18 + 1e-12 * rate.abs());
        assert!(rate > 0.0);
    }

    #[test]
    fn soliton_axis_angle_matches_finite_difference() {
        let sol = GrimReaper::new(0.0, PI, 0.3, 1.0).unwrap();
        let t = -5.0;
        for branch in [Branch::Lower, Branch::Upper] {
            let analytic = soliton_axis_angle(&sol, branch, t).unwrap();
            let eps = 1e-6;
            let yp = sol.y_of_x_branch(branch, eps, t).unwrap();
            let ym = sol.y_of_x_branch(branch, -eps, t).unwrap();
            let numeric = ((yp - ym) / (2.0 * eps)).atan();
            assert!(
                (analytic - numeric).abs() < 1e-8,
                "{branch:?}: {analytic} vs {numeric}"
            );
        }
    }

    #[test]
    fn symmetric_soliton_arm_angles_mirror() {
        let sol = GrimReaper::new(0.0, PI, 0.0, 1.0).unwrap();
        let lo = soliton_axis_angle(&sol, Branch::Lower, -4.0).unwrap();
        let hi = soliton_axis_angle(&sol, Branch::Upper, -4.0).unwrap();
        assert!((lo + hi).abs() < 1e-15, "{lo} vs {hi}");
        assert!(lo < 0.0 && hi > 0.0);
    }

    #[test]
    fn missing_axis_crossing_is_reported() {
        // At t = +1 the exponent at x = 0 is positive: no crossing.
        let sol = GrimReaper::new(0.0, PI, 0.0, 1.0).unwrap();
        assert!(matches!(
            soliton_axis_angle(&sol, Branch::Lower, 1.0),
            Err(MeasureError::CrossingNotFound { .. })
        ));
        let seg = [Point::new(1.0, 0.0), Point::new(2.0, 1.0)];
        assert!(matches!(
            curve_axis_angle(&seg, 0.5),
            Err(MeasureError::CrossingNotFound { .. })
        ));
    }

    #[test]
    fn horseshoe_rate_matches_axis_angle_combination() {
        // Two nested translating solitons: every boundary piece of the
        // region between their arcs (closed off by the y-axis) moves by
        // curve shortening, so the measured dA/dt must match the
        // four-angle prediction.
        let inner = GrimReaper::new(0.0, PI, 1.0, 1.0).unwrap();
        let outer = GrimReaper::new(0.0, PI, 0.0, 1.0).unwrap();
        let t = -5.0;
        let dt = 1e-3;
        let area = |tau: f64| {
            let a = inner.axis_to_axis_arc(tau, 2e-3).unwrap();
            let b = outer.axis_to_axis_arc(tau, 2e-3).unwrap();
            area_between(&a, &b).unwrap().value
        };
        let value = area(t);
        assert!(value > 0.0, "horseshoe area should be positive, got {value}");
        let numeric = (area(t + dt) - area(t - dt)) / (2.0 * dt);
        let curve = outer.axis_to_axis_arc(t, 2e-3).unwrap();
        let angles = axis_angles(&curve, &inner, t).unwrap();
        let predicted = predicted_area_rate_horseshoe(angles);
        assert!(
            (numeric - predicted).abs() < 1e-5 + 0.01 * predicted.abs(),
            "numeric {numeric} vs predicted {predicted}"
        );
    }

    #[test]
    fn total_curvature_of_closed_convex_polyline_is_exact() {
        assert!((total_curvature(&circle(1.0, 1000), true) - 2.0 * PI).abs() < 1e-9);
        assert!((total_curvature(&circle(0.2, 17), true) - 2.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn full_soliton_branch_turns_by_pi() {
        let chain = Chain::with_zero_shifts(vec![0.0, PI], false).unwrap();
        let b = broken_curve(&chain, -5.0, 0.01).unwrap();
        let k = total_curvature(&b.polyline(), false);
        assert!((k - PI).abs() < 1e-3, "turning {k}");
    }

    #[test]
    fn convex_flow_conserves_turning_and_reports_no_dissipation() {
        let c = PolyCurve::new(circle(1.0, 600), true).unwrap();
        let params = FlowParams::with_resolution(0.01);
        let run = run_flow_parametric(
            &c,
            0.0,
            40.0 * params.dt,
            &params,
            (EndMotion::Fixed, EndMotion::Fixed),
        );
        assert!(run.failure.is_none());
        let samples = curvature_dissipation(&run);
        assert!(!samples.is_empty());
        for s in &samples {
            assert!((s.total_curvature - 2.0 * PI).abs() < 1e-9);
            assert!(s.numeric_rate.abs() < 1e-9);
            assert_eq!(s.predicted_rate, 0.0);
        }
    }

    #[test]
    fn single_inflection_dissipates_total_curvature() {
        let pts: Vec<Point> = (0..=800)
            .map(|i| {
                let x = -2.0 + 4.0 * i as f64 / 800.0;
                Point::new(x, 0.5 * (2.0 * x).tanh())
            })
            .collect();
        let c = PolyCurve::new(pts, false).unwrap();
        let h = c.min_edge();
        let params = FlowParams::with_resolution(h);
        let run = run_flow_parametric(
            &c,
            0.0,
            60.0 * params.dt,
            &params,
            (EndMotion::Fixed, EndMotion::Fixed),
        );
        assert!(run.failure.is_none(), "{:?}", run.failure);
        let samples = curvature_dissipation(&run);
        assert!(!samples.is_empty());
        let mid = samples[samples.len() / 2];
        assert!(mid.numeric_rate < 0.0, "numeric {}", mid.numeric_rate);
        assert!(mid.predicted_rate < 0.0);
        let ratio = mid.numeric_rate / mid.predicted_rate;
        assert!(
            (0.6..1.7).contains(&ratio),
            "numeric {} vs predicted {}",
            mid.numeric_rate,
            mid.predicted_rate
        );
    }

    #[test]
    fn single_soliton_crossing_and_tangent_counts() {
        let chain = Chain::with_zero_shifts(vec![0.0, PI], false).unwrap();
        let b = broken_curve(&chain, -5.0, 0.005).unwrap();
        let (p, q) = crossings_and_tangents(&b.polyline());
        assert_eq!(p.len(), 2, "crossings {:?}", p);
        assert_eq!(q.len(), 1, "tangents {:?}", q);
        // The unique vertical tangent is the tip.
        let tip = chain.soliton(0).tip(-5.0);
        assert!(q[0].dist(tip) < 1e-3, "{:?} vs {:?}", q[0], tip);
    }

    #[test]
    fn glued_curve_crossing_and_tangent_counts() {
        let chain = Chain::with_zero_shifts(vec![0.0, PI, 2.0 * PI], false).unwrap();
        let t = -7.0;
        let grid = graph_grid(&chain, 1e-6, 12000);
        let g = glued_graph(&chain, t, &grid).unwrap();
        let (p, q) = crossings_and_tangents(&g.to_points());
        assert_eq!(p.len(), 3, "crossings {:?}", p);
        assert_eq!(q.len(), 2, "tangents {:?}", q);
    }

    #[test]
    fn strip_distance_basics() {
        let c = circle(1.0, 300);
        assert_eq!(strip_distance(&c, &c), 0.0);
        let shifted: Vec<Point> =
            c.iter().map(|p| Point::new(p.x, p.y + 0.25)).collect();
        let d = strip_distance(&shifted, &c);
        assert!((d - 0.25).abs() < 1e-3, "distance {d}");
    }

    #[test]
    fn fit_rate_recovers_synthetic_exponential() {
        let samples: Vec<(f64, f64)> =
            (0..20).map(|i| {
                let t = -8.0 + 0.3 * i as f64;
                (t, (1.7 + 2.0 * t).exp())
            }).collect();
        let fit = fit_rate(&samples).unwrap();
        assert!((fit.delta - 2.0).abs() < 1e-9);
        assert!((fit.log_intercept - 1.7).abs() < 1e-9);
        assert!(fit.residual < 1e-9);
    }

    #[test]
    fn fit_rate_rejects_converged_series() {
        let samples = vec![(0.0, 1e-16), (1.0, 1e-17), (2.0, 0.0)];
        assert!(matches!(fit_rate(&samples), Err(MeasureError::DegenerateFit)));
    }

    #[test]
    fn corner_angle_series_fits_velocity_product_rate() {
        let chain = Chain::with_zero_shifts(vec![0.0, 1.0, 0.0], true).unwrap();
        let samples: Vec<(f64, f64)> = (0..9)
            .map(|i| {
                let t = -1.0 - 0.25 * i as f64;
                (t, corner(&chain, 1, t).unwrap().angle)
            })
            .collect();
        let fit = fit_rate(&samples).unwrap();
        let expected = PI * PI; // product of the two arc velocities
        assert!(
            (fit.delta - expected).abs() < 0.05 * expected,
            "delta {} vs {}",
            fit.delta,
            expected
        );
    }
}
