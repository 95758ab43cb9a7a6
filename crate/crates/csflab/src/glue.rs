//! Assembling soliton families into initial curves.
//!
//! Three constructions, one per scenario class:
//!
//! * **Broken curve** (zigzag chains): consecutive solitons genuinely
//!   intersect; the curve is their arcs joined at the intersection corners.
//! * **Glued graph** (monotone chains): consecutive solitons never meet;
//!   near each shared asymptote the two arms are blended with a smooth
//!   cutoff over the vertical strip `-1 <= x <= 1`, producing a single
//!   smooth graph `x = u(y)`.
//! * **Barrier assembly** (mixed chains): one broken curve per maximal
//!   zigzag run, glued across the shared run-boundary asymptotes exactly as
//!   in the graph case.
//!
//! Corner locations are found in logarithmic distance from the shared
//! asymptote, so they remain accurate long after the corner gap shrinks
//! below every absolute floating-point scale.

use crate::chain::{Chain, Run, ScenarioClass};
use crate::flow::GraphCurve;
use crate::geom::Point;
use crate::reaper::{profile_remainder, Branch, GrimReaper, ReaperError};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GlueError {
    /// The two solitons do not intersect inside the guaranteed window at
    /// this time (the corner does not exist yet, or lies beyond
    /// floating-point range).
    #[error("no corner bracket at height index {height_index} for t = {time}")]
    NoBracket { height_index: usize, time: f64 },
    /// The requested corner sits at a height that is not a strict local
    /// extremum, so the adjacent solitons share no crossing.
    #[error("height index {height_index} is not a strict local extremum; no corner exists there")]
    NotAlternating { height_index: usize },
    /// The construction needs a more negative time than requested.
    #[error("time {time} is above the construction threshold {threshold}")]
    ThresholdError { time: f64, threshold: f64 },
    /// The chain's scenario class does not match the requested builder.
    #[error("builder requires a {expected} chain")]
    WrongScenario { expected: &'static str },
    #[error(transparent)]
    Reaper(#[from] ReaperError),
}

/// Free ends of open curves stop where the soliton sits this close to its
/// asymptote; beyond that the curve is horizontal to within the distance
/// itself.
pub const TRUNCATION_ETA: f64 = 1e-4;

/// Where the smooth cutoff used for gluing lives: the blend happens on
/// `-GLUE_HALF_WIDTH <= x <= GLUE_HALF_WIDTH`.
pub const GLUE_HALF_WIDTH: f64 = 1.0;

// ---------------------------------------------------------------------------
// Corners
// ---------------------------------------------------------------------------

/// The intersection of two consecutive solitons of a zigzag pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corner {
    /// Index of the shared height in the chain's canonical height list.
    pub height_index: usize,
    pub time: f64,
    /// The intersection point.
    pub location: Point,
    /// Distance from the shared asymptote, `|y - a_k|`.
    pub eta: f64,
    /// Angle between the two solitons' tangent lines at the intersection;
    /// equals `(v_in + v_out) * eta` exactly.
    pub angle: f64,
    /// Time-independent part of the predicted x-position.
    pub c_k: f64,
    /// First-order prediction for the x-position: the crossing point of
    /// the two logarithmic asymptote lines, `parity_in*(v_in - v_out)*t + c_k`.
    pub predicted_x: f64,
    /// Velocity of the incoming (lower-index) soliton.
    pub v_in: f64,
    /// Velocity of the outgoing soliton.
    pub v_out: f64,
    /// Parity of the incoming soliton.
    pub parity_in: f64,
}

impl Corner {
    /// The exact gap `x(corner) - predicted_x`, evaluated from the corner
    /// distance without cancellation.
    ///
    /// At the intersection the gap equals
    /// `parity_in * (R(v_in*eta) - R(v_out*eta)) / (v_in + v_out)` where
    /// `R` is the log-sine remainder; this form stays fully accurate when
    /// the naive difference of two nearby doubles would be pure noise.
    pub fn prediction_gap(&self) -> f64 {
        let r_in = remainder_or_zero(self.v_in * self.eta);
        let r_out = remainder_or_zero(self.v_out * self.eta);
        self.parity_in * (r_in - r_out) / (self.v_in + self.v_out)
    }
}

fn remainder_or_zero(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        profile_remainder(s).unwrap_or(0.0)
    }
}

/// Everything the corner equation needs about the junction at height
/// index `k`.
struct Junction {
    shared_height: f64,
    /// +1 when the corner lies above the shared height (local minimum),
    /// -1 below (local maximum).
    side: f64,
    eta_max: f64,
    v_in: f64,
    v_out: f64,
    parity_in: f64,
    shift_in: f64,
    shift_out: f64,
}

fn junction(chain: &Chain, k: usize) -> Result<Junction, GlueError> {
    let h = chain.heights();
    let n = chain.arc_count();
    let seam = chain.is_compact() && k == n;
    if k == 0 || k > n || (k == n && !seam) {
        return Err(GlueError::NotAlternating { height_index: k });
    }
    let (arc_in, arc_out) = (k - 1, if seam { 0 } else { k });
    let gap_in = h[k] - h[k - 1];
    let gap_out = if seam { h[1] - h[0] } else { h[k + 1] - h[k] };
    if gap_in * gap_out >= 0.0 {
        return Err(GlueError::NotAlternating { height_index: k });
    }
    let side = if gap_in > 0.0 { -1.0 } else { 1.0 };
    let sol_in = chain.soliton(arc_in);
    let sol_out = chain.soliton(arc_out);
    Ok(Junction {
        shared_height: h[k],
        side,
        eta_max: 0.5 * gap_in.abs().min(gap_out.abs()),
        v_in: sol_in.velocity(),
        v_out: sol_out.velocity(),
        parity_in: sol_in.parity(),
        shift_in: sol_in.shift(),
        shift_out: sol_out.shift(),
    })
}

impl Junction {
    /// The corner equation in log-distance form: `balance(ln eta) = 0`
    /// exactly at the intersection. Strictly decreasing on the bracket.
    fn balance(&self, xi: f64, t: f64) -> f64 {
        let eta = xi.exp();
        let ra = remainder_or_zero(self.v_in * eta);
        let rb = remainder_or_zero(self.v_out * eta);
        (-(self.v_in.ln() + xi) + ra) / self.v_in
            + (-(self.v_out.ln() + xi) + rb) / self.v_out
            + (self.v_in + self.v_out) * t
            + self.parity_in * (self.shift_in - self.shift_out)
    }

    fn solve(&self, k: usize, t: f64) -> Result<Corner, GlueError> {
        let xi_hi = self.eta_max.ln();
        if self.balance(xi_hi, t) > 0.0 {
            return Err(GlueError::NoBracket { height_index: k, time: t });
        }
        let mut lo = xi_hi;
        let mut step = 8.0;
        loop {
            let cand = lo - step;
            if cand < -740.0 {
                return Err(GlueError::NoBracket { height_index: k, time: t });
            }
            if self.balance(cand, t) > 0.0 {
                lo = cand;
                break;
            }
            lo = cand;
            step *= 2.0;
        }
        // Invariant: balance(lo) > 0 >= balance(hi).
        let mut hi = (lo + step).min(xi_hi);
        for _ in 0..200 {
            if hi - lo < 1e-15 * (1.0 + lo.abs()) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.balance(mid, t) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let xi = 0.5 * (lo + hi);
        let eta = xi.exp();
        let (va, vb, pa) = (self.v_in, self.v_out, self.parity_in);
        let x = self.shift_in
            + pa * ((-(va.ln() + xi) + remainder_or_zero(va * eta)) / va + va * t);
        let c_k = (va * self.shift_in + vb * self.shift_out) / (va + vb)
            - pa * (va / vb).ln() / (va + vb);
        Ok(Corner {
            height_index: k,
            time: t,
            location: Point::new(x, self.shared_height + self.side * eta),
            eta,
            angle: (va + vb) * eta,
            c_k,
            predicted_x: pa * (va - vb) * t + c_k,
            v_in: va,
            v_out: vb,
            parity_in: pa,
        })
    }
}

/// Locate the corner at height index `k` (1-based interior index; for a
/// compact chain, `k = arc_count()` addresses the closing seam corner).
pub fn corner(chain: &Chain, k: usize, t: f64) -> Result<Corner, GlueError> {
    junction(chain, k)?.solve(k, t)
}

/// Corner indices interior to one run, in traversal order.
fn corner_indices(run: &Run) -> Vec<usize> {
    (run.start + 1..run.end).collect()
}

// ---------------------------------------------------------------------------
// Existence threshold
// ---------------------------------------------------------------------------

/// Largest fraction of the neighboring gap a gluing band may occupy at the
/// threshold time.
const BAND_FRACTION: f64 = 0.2;

fn corners_exist(chain: &Chain, t: f64) -> bool {
    let runs = chain.decompose_runs();
    for run in runs.runs() {
        for k in corner_indices(&run) {
            if corner(chain, k, t).is_err() {
                return false;
            }
        }
    }
    if chain.is_compact() && corner(chain, chain.arc_count(), t).is_err() {
        return false;
    }
    true
}

/// Both arms meeting at the shared height `a_k` (between `arc_in` and
/// `arc_out = arc_in + 1`) stay within a small fraction of the adjacent
/// gaps over the whole gluing strip.
fn band_is_thin(chain: &Chain, boundary: usize, t: f64) -> bool {
    let h = chain.heights();
    let gaps = chain.gaps();
    let (arc_in, arc_out) = (boundary - 1, boundary);
    let limit = BAND_FRACTION * gaps[arc_in].abs().min(gaps[arc_out].abs());
    for arc in [arc_in, arc_out] {
        let sol = chain.soliton(arc);
        for x in [-GLUE_HALF_WIDTH, GLUE_HALF_WIDTH] {
            let phi = sol.branch_exponent(x, t);
            let max_sin = (sol.velocity() * limit).sin();
            if phi > max_sin.ln() {
                return false;
            }
        }
        // The arm must hug the boundary height a_{boundary}.
        debug_assert!(
            (sol.asymptote_low() - h[boundary]).abs() < 1e-12
                || (sol.asymptote_high() - h[boundary]).abs() < 1e-12
        );
    }
    true
}

fn construction_ready(chain: &Chain, t: f64) -> bool {
    if !corners_exist(chain, t) {
        return false;
    }
    for &b in &chain.decompose_runs().breakpoints {
        if b == 0 || b == chain.arc_count() {
            continue;
        }
        if !band_is_thin(chain, b, t) {
            return false;
        }
    }
    if chain.class() == ScenarioClass::Embedded {
        // Every interior height is a gluing boundary.
        for b in 1..chain.arc_count() {
            if !band_is_thin(chain, b, t) {
                return false;
            }
        }
    }
    true
}

/// A time at (and below) which the chain's construction exists: all
/// corners bracket and all gluing bands are thin. Found by a doubling
/// search refined by bisection.
pub fn find_t0(chain: &Chain) -> f64 {
    let ok = |t: f64| construction_ready(chain, t);
    let (mut good, mut bad);
    if ok(0.0) {
        // Walk forward until it breaks (or give up far in the future).
        good = 0.0;
        let mut t = 1.0;
        while ok(t) {
            good = t;
            t *= 2.0;
            if t > 1024.0 {
                return 1024.0;
            }
        }
        bad = t;
    } else {
        bad = 0.0;
        let mut t = -1.0;
        while !ok(t) {
            bad = t;
            t *= 2.0;
            assert!(t > -1e9, "construction threshold search diverged");
        }
        good = t;
    }
    for _ in 0..60 {
        let mid = 0.5 * (good + bad);
        if ok(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    good
}

// ---------------------------------------------------------------------------
// Arc sampling (stable arclength parametrization)
// ---------------------------------------------------------------------------

fn ln_cosh(z: f64) -> f64 {
    let a = z.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Point of the soliton at arclength parameter `sigma` (zero at the tip,
/// increasing toward the upper asymptote).
fn point_at_sigma(sol: &GrimReaper, sigma: f64, t: f64) -> Point {
    let v = sol.velocity();
    let x = sol.shift() + sol.parity() * (ln_cosh(v * sigma) / v + v * t);
    let y = if sigma > 0.0 {
        sol.asymptote_high() - 2.0 / v * (-(v * sigma)).exp().atan()
    } else {
        sol.asymptote_low() + 2.0 / v * (v * sigma).exp().atan()
    };
    Point::new(x, y)
}

/// Arclength parameter of the point at distance `eta` from the chosen
/// asymptote. Stable for arbitrarily small `eta`.
fn sigma_of_eta(sol: &GrimReaper, eta: f64, hugging: Branch) -> f64 {
    let v = sol.velocity();
    let s = (v * eta / 2.0).tan().ln() / v;
    match hugging {
        Branch::Lower => s,
        Branch::Upper => -s,
    }
}

/// Sample the soliton between two arclength parameters at spacing ~ `h`,
/// endpoints exact.
fn sample_sigma_range(sol: &GrimReaper, s0: f64, s1: f64, t: f64, h: f64) -> Vec<Point> {
    let span = (s1 - s0).abs();
    let n = ((span / h).ceil() as usize).max(1);
    (0..=n)
        .map(|i| point_at_sigma(sol, s0 + (s1 - s0) * i as f64 / n as f64, t))
        .collect()
}

// ---------------------------------------------------------------------------
// Broken curves
// ---------------------------------------------------------------------------

/// A piecewise-soliton curve: sampled arcs joined at corners.
#[derive(Debug, Clone)]
pub struct BrokenCurve {
    pub time: f64,
    pub closed: bool,
    /// Sampled arcs in traversal order; consecutive arcs share their
    /// junction point.
    pub arcs: Vec<Vec<Point>>,
    /// Corners between consecutive arcs: `corners[i]` joins `arcs[i]` and
    /// `arcs[i+1]`; for closed curves one final corner joins the last arc
    /// back to the first.
    pub corners: Vec<Corner>,
    /// Which chain arcs the pieces came from.
    pub arc_indices: Vec<usize>,
}

impl BrokenCurve {
    /// Concatenated polyline (shared junction points deduplicated). For
    /// closed curves the seam point appears once, at the start.
    pub fn polyline(&self) -> Vec<Point> {
        let mut out: Vec<Point> = Vec::new();
        for arc in &self.arcs {
            let skip = usize::from(
                !out.is_empty() && out.last() == arc.first(),
            );
            out.extend_from_slice(&arc[skip..]);
        }
        if self.closed && out.len() > 1 && out.first() == out.last() {
            out.pop();
        }
        out
    }

    /// Indices (into `polyline()`) of the corner vertices.
    pub fn corner_vertex_indices(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut acc = 0usize;
        for (i, arc) in self.arcs.iter().enumerate() {
            acc += arc.len() - usize::from(i > 0);
            if i + 1 < self.arcs.len() {
                out.push(acc - 1);
            }
        }
        if self.closed {
            out.push(0);
        }
        out
    }

    /// Every junction turns the same way as the smooth arcs bend (within
    /// the evaluation noise floor), i.e. the corners are convex for the
    /// curve's own orientation.
    pub fn corners_convex(&self) -> bool {
        let pts = self.polyline();
        let n = pts.len();
        if n < 3 {
            return true;
        }
        let turn = |i: usize| -> Option<f64> {
            let (prev, next) = if self.closed {
                (pts[(i + n - 1) % n], pts[(i + 1) % n])
            } else if i == 0 || i == n - 1 {
                return None;
            } else {
                (pts[i - 1], pts[i + 1])
            };
            let e_in = pts[i] - prev;
            let e_out = next - pts[i];
            Some(e_in.cross(e_out).atan2(e_in.dot(e_out)))
        };
        let mut total = 0.0;
        for i in 0..n {
            if let Some(a) = turn(i) {
                total += a;
            }
        }
        let orientation = total.signum();
        (0..n).all(|i| match turn(i) {
            Some(a) => a * orientation > -1e-9,
            None => true,
        })
    }
}

/// End treatment for one side of a sampled run.
#[derive(Debug, Clone, Copy)]
enum EndCut {
    /// Run out along the asymptote until `eta` falls to the truncation
    /// height.
    Free,
    /// Stop at the given distance from the end asymptote (used when a
    /// gluing band takes over).
    AtEta(f64),
}

/// Sample the broken curve of one zigzag run.
fn sample_run(
    chain: &Chain,
    run: &Run,
    t: f64,
    h: f64,
    start_cut: EndCut,
    end_cut: EndCut,
    closed: bool,
) -> Result<BrokenCurve, GlueError> {
    let heights = chain.heights();
    let mut corners: Vec<Corner> = corner_indices(run)
        .into_iter()
        .map(|k| corner(chain, k, t))
        .collect::<Result<_, _>>()?;
    let seam = if closed {
        Some(corner(chain, chain.arc_count(), t)?)
    } else {
        None
    };

    let mut arcs = Vec::new();
    let mut arc_indices = Vec::new();
    for arc in run.start..run.end {
        let sol = chain.soliton(arc);
        // Which asymptote each end of this piece hugs.
        let start_height = heights[arc];
        let end_height = heights[arc + 1];
        let hug = |height: f64| -> Branch {
            if (height - sol.asymptote_low()).abs() < (height - sol.asymptote_high()).abs() {
                Branch::Lower
            } else {
                Branch::Upper
            }
        };
        let start_eta = if arc == run.start {
            match (start_cut, &seam) {
                (EndCut::AtEta(e), _) => e,
                (EndCut::Free, Some(c)) => c.eta,
                (EndCut::Free, None) => TRUNCATION_ETA,
            }
        } else {
            corners[arc - run.start - 1].eta
        };
        let end_eta = if arc == run.end - 1 {
            match (end_cut, &seam) {
                (EndCut::AtEta(e), _) => e,
                (EndCut::Free, Some(c)) => c.eta,
                (EndCut::Free, None) => TRUNCATION_ETA,
            }
        } else {
            corners[arc - run.start].eta
        };
        let s0 = sigma_of_eta(&sol, start_eta, hug(start_height));
        let s1 = sigma_of_eta(&sol, end_eta, hug(end_height));
        let mut pts = sample_sigma_range(&sol, s0, s1, t, h);
        // Pin interior junctions to the solved corner locations so
        // consecutive arcs share their endpoint exactly.
        if arc > run.start {
            pts[0] = corners[arc - run.start - 1].location;
        } else if let Some(c) = &seam {
            pts[0] = c.location;
        }
        if arc < run.end - 1 {
            *pts.last_mut().expect("nonempty") = corners[arc - run.start].location;
        } else if let Some(c) = &seam {
            *pts.last_mut().expect("nonempty") = c.location;
        }
        arcs.push(pts);
        arc_indices.push(arc);
    }
    if let Some(c) = seam {
        corners.push(c);
    }
    Ok(BrokenCurve { time: t, closed, arcs, corners, arc_indices })
}

/// Build the broken curve of a zigzag chain at time `t`, sampled at
/// arclength spacing ~ `h`.
///
/// Requires a single-run chain (the whole height sequence zigzags). The
/// curve has one arc per soliton joined at the solved corners; a compact
/// chain closes up through its seam corner, a noncompact chain runs out
/// along its first and last asymptotes.
pub fn broken_curve(chain: &Chain, t: f64, h: f64) -> Result<BrokenCurve, GlueError> {
    let runs = chain.decompose_runs();
    if runs.run_count() != 1 || (chain.is_compact() && !runs.seam_alternates) {
        return Err(GlueError::WrongScenario { expected: "single-run (zigzag)" });
    }
    let run = runs.runs().next().expect("one run");
    sample_run(chain, &run, t, h, EndCut::Free, EndCut::Free, chain.is_compact())
}

// ---------------------------------------------------------------------------
// Cutoff and glued graphs
// ---------------------------------------------------------------------------

/// Smooth monotone cutoff: 0 below -1, 1 above +1, quintic smoothstep in
/// between (C^2 at the joins, symmetric: `cutoff_eta(x) + cutoff_eta(-x) = 1`).
pub fn cutoff_eta(x: f64) -> f64 {
    let u = ((x + 1.0) / 2.0).clamp(0.0, 1.0);
    u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
}

/// One gluing band: the blend of the two soliton arms meeting at a shared
/// interior asymptote, over the strip `|x| <= 1`.
struct Band {
    /// Soliton whose strip lies below the shared height (its Upper branch
    /// is the lower arm of the band).
    below: GrimReaper,
    /// Soliton whose strip lies above (its Lower branch is the upper arm).
    above: GrimReaper,
    parity_below: f64,
    y_at_minus: f64,
    y_at_plus: f64,
}

impl Band {
    fn new(chain: &Chain, boundary: usize, t: f64) -> Result<Self, GlueError> {
        let h = chain.heights();
        let (arc_in, arc_out) = (boundary - 1, boundary);
        let sol_in = chain.soliton(arc_in);
        let sol_out = chain.soliton(arc_out);
        // Which soliton's strip lies below the shared height?
        let (below, above) = if h[boundary - 1] < h[boundary] {
            (sol_in, sol_out)
        } else {
            (sol_out, sol_in)
        };
        let parity_below = below.parity();
        let band = Self {
            below,
            above,
            parity_below,
            y_at_minus: 0.0,
            y_at_plus: 0.0,
        };
        let y_at_minus = band.blend(-GLUE_HALF_WIDTH, t)?;
        let y_at_plus = band.blend(GLUE_HALF_WIDTH, t)?;
        Ok(Self { y_at_minus, y_at_plus, ..band })
    }

    /// Blended height at horizontal position `x`: weight slides from the
    /// below-arm to the above-arm across the strip, entering on the side
    /// where the below-soliton's piece survives.
    fn blend(&self, x: f64, t: f64) -> Result<f64, GlueError> {
        let w = cutoff_eta(self.parity_below * x);
        let y_below = self.below.y_of_x_branch(Branch::Upper, x, t)?;
        let y_above = self.above.y_of_x_branch(Branch::Lower, x, t)?;
        Ok(w * y_above + (1.0 - w) * y_below)
    }

    fn y_lo(&self) -> f64 {
        self.y_at_minus.min(self.y_at_plus)
    }

    fn y_hi(&self) -> f64 {
        self.y_at_minus.max(self.y_at_plus)
    }

    /// Invert the blend: the x in `[-1, 1]` with `blend(x) = y`.
    fn x_of_y(&self, y: f64, t: f64) -> Result<f64, GlueError> {
        let increasing = self.y_at_plus >= self.y_at_minus;
        let (mut lo, mut hi) = (-GLUE_HALF_WIDTH, GLUE_HALF_WIDTH);
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            let val = self.blend(mid, t)?;
            if (val < y) == increasing {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// A uniform y-grid spanning the chain's strip, inset by `margin` from the
/// outer asymptotes.
pub fn graph_grid(chain: &Chain, margin: f64, points: usize) -> Vec<f64> {
    let h = chain.heights();
    let (lo, hi) = (
        h.iter().cloned().fold(f64::INFINITY, f64::min) + margin,
        h.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - margin,
    );
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points as f64 - 1.0))
        .collect()
}

/// Build the smoothly glued graph `x = u(y)` of a monotone chain at time
/// `t`, sampled on `grid`.
///
/// Away from the interior asymptotes the curve *is* the corresponding
/// soliton; across each shared asymptote the two arms are blended by the
/// smooth cutoff over `|x| <= 1` and the blend is inverted per grid
/// height. Fails with `ThresholdError` until every band is thin.
pub fn glued_graph(chain: &Chain, t: f64, grid: &[f64]) -> Result<GraphCurve, GlueError> {
    if chain.class() != ScenarioClass::Embedded {
        return Err(GlueError::WrongScenario { expected: "strictly monotone (embedded)" });
    }
    let threshold = find_t0(chain);
    if t >= threshold {
        return Err(GlueError::ThresholdError { time: t, threshold });
    }
    let bands: Vec<Band> = (1..chain.arc_count())
        .map(|b| Band::new(chain, b, t))
        .collect::<Result<_, _>>()?;
    let solitons = chain.solitons();

    let mut values = Vec::with_capacity(grid.len());
    for &y in grid {
        if let Some(band) = bands.iter().find(|b| y >= b.y_lo() && y <= b.y_hi()) {
            values.push(band.x_of_y(y, t)?);
            continue;
        }
        // Strip membership: the arc whose open strip contains y (unique
        // for monotone chains away from the bands).
        let arc = solitons
            .iter()
            .position(|s| y > s.asymptote_low() && y < s.asymptote_high())
            .ok_or(ReaperError::DomainError(y))?;
        values.push(solitons[arc].x_of_y(y, t)?);
    }
    GraphCurve::new(grid.to_vec(), values).map_err(|_| GlueError::WrongScenario {
        expected: "grid with at least 3 strictly increasing heights",
    })
}

// ---------------------------------------------------------------------------
// Barrier assembly (general case)
// ---------------------------------------------------------------------------

/// The general-case construction: one broken "barrier" curve per maximal
/// zigzag run, plus the single approximate curve obtained by gluing the
/// barriers across their shared asymptotes.
#[derive(Debug, Clone)]
pub struct BarrierAssembly {
    pub time: f64,
    /// One barrier per run, sampled with free ends.
    pub barriers: Vec<BrokenCurve>,
    /// The glued approximate curve as a single open polyline.
    pub curve: Vec<Point>,
    pub runs: Vec<Run>,
}

/// Build the barrier assembly of a noncompact chain at time `t`, sampled
/// at spacing ~ `h`.
///
/// Works for every class — a single-run chain yields one barrier and no
/// gluing, a monotone chain yields single-soliton barriers glued at every
/// interior height (the polyline version of `glued_graph`) — but the
/// interesting case is the mixed one. Compact chains are not supported
/// here: a closed non-convex cycle would need a seam-spanning run, which
/// the linear run decomposition cannot represent.
pub fn barrier_chain(chain: &Chain, t: f64, h: f64) -> Result<BarrierAssembly, GlueError> {
    if chain.is_compact() {
        if chain.class() == ScenarioClass::Convex {
            let b = broken_curve(chain, t, h)?;
            let curve = b.polyline();
            let runs = chain.decompose_runs().runs().collect();
            return Ok(BarrierAssembly { time: t, barriers: vec![b], curve, runs });
        }
        return Err(GlueError::WrongScenario { expected: "noncompact (or compact zigzag)" });
    }
    let threshold = find_t0(chain);
    if t >= threshold {
        return Err(GlueError::ThresholdError { time: t, threshold });
    }
    let runs: Vec<Run> = chain.decompose_runs().runs().collect();

    let barriers: Vec<BrokenCurve> = runs
        .iter()
        .map(|r| sample_run(chain, r, t, h, EndCut::Free, EndCut::Free, false))
        .collect::<Result<_, _>>()?;

    // Assemble: trim each run at the gluing bands and bridge with blends.
    let mut curve: Vec<Point> = Vec::new();
    let mut start_cut = EndCut::Free;
    for (i, run) in runs.iter().enumerate() {
        if i + 1 == runs.len() {
            let piece = sample_run(chain, run, t, h, start_cut, EndCut::Free, false)?;
            append_polyline(&mut curve, &piece.polyline());
            break;
        }
        let band = Band::new(chain, run.end, t)?;
        // This run's last arc is one of the band's arms; the next run's
        // first arc is the other. Each arm survives on the side its tip
        // lies on, so cut it at the opposite edge of the gluing strip.
        let exit_sol = chain.soliton(run.end - 1);
        let enter_sol = chain.soliton(run.end);
        let x_exit = -exit_sol.parity() * GLUE_HALF_WIDTH;
        let x_enter = -enter_sol.parity() * GLUE_HALF_WIDTH;
        let piece = sample_run(
            chain,
            run,
            t,
            h,
            start_cut,
            EndCut::AtEta(arm_distance(&exit_sol, x_exit, t)),
            false,
        )?;
        append_polyline(&mut curve, &piece.polyline());
        // Blend samples from this run's side to the next run's side.
        let n = ((2.0 * GLUE_HALF_WIDTH / h).ceil() as usize).max(2);
        let band_points: Vec<Point> = (0..=n)
            .map(|s| {
                let x = x_exit + (x_enter - x_exit) * s as f64 / n as f64;
                Ok(Point::new(x, band.blend(x, t)?))
            })
            .collect::<Result<_, GlueError>>()?;
        append_polyline(&mut curve, &band_points);
        start_cut = EndCut::AtEta(arm_distance(&enter_sol, x_enter, t));
    }

    Ok(BarrierAssembly { time: t, barriers, curve, runs })
}

/// Distance of the soliton arm from its asymptote at horizontal position
/// `x`, computed in exponent form so it never suffers the cancellation of
/// subtracting two nearly equal heights. (Below roughly 1e-320 the arm is
/// flat beyond all representable resolution; the distance is floored there
/// so downstream logarithms stay finite.)
fn arm_distance(sol: &GrimReaper, x: f64, t: f64) -> f64 {
    let phi = sol.branch_exponent(x, t);
    (phi.exp().min(1.0).asin() / sol.velocity()).max(1e-320)
}

fn append_polyline(out: &mut Vec<Point>, pts: &[Point]) {
    let skip = usize::from(!out.is_empty() && !pts.is_empty() && {
        let last = *out.last().expect("nonempty");
        last.dist(pts[0]) < 1e-9
    });
    out.extend_from_slice(&pts[skip..]);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Chain;
    use crate::geom::angle_between;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn paperclip() -> Chain {
        Chain::with_zero_shifts(vec![0.0, 1.0, 0.0], true).unwrap()
    }

    fn ladder() -> Chain {
        // Zigzag with three distinct velocities: pi/2, pi, pi/3.
        Chain::with_zero_shifts(vec![0.0, 2.0, 1.0, 4.0], false).unwrap()
    }

    #[test]
    fn symmetric_corner_sits_on_the_axis() {
        let c = corner(&paperclip(), 1, -5.0).unwrap();
        assert!(c.location.x.abs() < 1e-12, "x = {}", c.location.x);
        assert_eq!(c.c_k, 0.0);
        assert_eq!(c.predicted_x, 0.0);
        assert!((c.location.y - 1.0).abs() < 0.5);
        // Corner distance decays like exp(v^2 t): check the log-slope.
        let c2 = corner(&paperclip(), 1, -6.0).unwrap();
        let slope = c.eta.ln() - c2.eta.ln();
        assert!((slope - PI * PI).abs() < 0.05 * PI * PI, "slope {slope}");
    }

    #[test]
    fn seam_corner_mirrors_the_interior_corner() {
        let chain = paperclip();
        let a = corner(&chain, 1, -5.0).unwrap();
        let b = corner(&chain, 2, -5.0).unwrap();
        assert!((a.location.x + b.location.x).abs() < 1e-12);
        assert!((a.eta - b.eta).abs() < 1e-15 * a.eta.abs());
        assert!((a.location.y - 1.0).abs() < 0.5); // near the top
        assert!(b.location.y.abs() < 0.5); // near the bottom
    }

    #[test]
    fn corner_agrees_with_direct_bisection_oracle() {
        // At a moderate time the plain-double bisection of
        // x_in(y) = x_out(y) is trustworthy; the log-space solver must
        // match it.
        let chain = paperclip();
        let t = -2.0;
        let (s1, s2) = (chain.soliton(0), chain.soliton(1));
        let f = |y: f64| s1.x_of_y(y, t).unwrap() - s2.x_of_y(y, t).unwrap();
        let (mut lo, mut hi) = (0.5, 1.0 - 1e-12);
        // f(lo) < 0 < f(hi)? establish orientation first.
        let rising = f(hi) > f(lo);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if (f(mid) < 0.0) == rising {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let y_oracle = 0.5 * (lo + hi);
        let c = corner(&chain, 1, t).unwrap();
        assert!(
            (c.location.y - y_oracle).abs() < 1e-10,
            "{} vs oracle {}",
            c.location.y,
            y_oracle
        );
        // The oracle x carries the sine-near-pi evaluation noise (~1e-8).
        assert!((c.location.x - s1.x_of_y(y_oracle, t).unwrap()).abs() < 2e-7);
    }

    #[test]
    fn corner_angle_matches_tangent_gap() {
        let chain = ladder();
        for t in [-1.5, -2.5, -4.0] {
            for k in [1, 2] {
                let c = corner(&chain, k, t).unwrap();
                let t_in = chain.soliton(k - 1).tangent_at(c.location.y).unwrap();
                let t_out = chain.soliton(k).tangent_at(c.location.y).unwrap();
                let raw = angle_between(t_in, t_out);
                let gap = raw.min(PI - raw);
                assert!(
                    (gap - c.angle).abs() < 1e-10,
                    "t={t} k={k}: {gap} vs {}",
                    c.angle
                );
            }
        }
    }

    #[test]
    fn prediction_gap_matches_naive_difference_when_measurable() {
        // At t = -1.5 the corner gap is ~1e-7: far above the double-
        // precision noise floor, so the naive subtraction is meaningful
        // and must agree with the cancellation-free form.
        let chain = ladder();
        for k in [1, 2] {
            let c = corner(&chain, k, -1.5).unwrap();
            let naive = c.location.x - c.predicted_x;
            let exact = c.prediction_gap();
            assert!(
                (naive - exact).abs() < 1e-12 + 1e-6 * exact.abs(),
                "k={k}: naive {naive} vs exact {exact}"
            );
            assert!(exact.abs() > 1e-9, "gap should be measurable at this time");
        }
    }

    #[test]
    fn prediction_gap_decays_at_twice_the_corner_rate() {
        let chain = ladder();
        let (v1, v2) = (PI / 2.0, PI);
        let mut samples = Vec::new();
        for i in 0..=6 {
            let t = -6.0 - i as f64;
            let c = corner(&chain, 1, t).unwrap();
            samples.push((t, c.prediction_gap().abs()));
        }
        let slope = {
            let n = samples.len() as f64;
            let (mut st, mut sl, mut stt, mut stl) = (0.0, 0.0, 0.0, 0.0);
            for &(t, g) in &samples {
                let l = g.ln();
                st += t;
                sl += l;
                stt += t * t;
                stl += t * l;
            }
            (n * stl - st * sl) / (n * stt - st * st)
        };
        let expected = 2.0 * v1 * v2;
        assert!(
            (slope - expected).abs() < 0.1 * expected,
            "slope {slope} vs {expected}"
        );
    }

    #[test]
    fn missing_corner_is_reported() {
        // Far in the future the solitons have passed each other.
        let err = corner(&paperclip(), 1, 50.0).unwrap_err();
        assert!(matches!(err, GlueError::NoBracket { .. }));
        // Monotone chains have no corners at all.
        let mono = Chain::with_zero_shifts(vec![0.0, 1.0, 2.0], false).unwrap();
        let err = corner(&mono, 1, -5.0).unwrap_err();
        assert!(matches!(err, GlueError::NotAlternating { .. }));
    }

    #[test]
    fn threshold_bounds_corner_existence() {
        let chain = paperclip();
        let t0 = find_t0(&chain);
        assert!(corner(&chain, 1, t0).is_ok());
        assert!(corner(&chain, 1, 2.0 * t0.min(-1.0)).is_ok());
    }

    #[test]
    fn embedded_threshold_tracks_shifts() {
        let base = Chain::with_zero_shifts(vec![0.0, 1.0, 2.0], false).unwrap();
        let shifted = Chain::new(vec![0.0, 1.0, 2.0], vec![100.0, 100.0], false).unwrap();
        let (t0, t1) = (find_t0(&base), find_t0(&shifted));
        // Both arcs have v = pi; pushing the shifts +100 delays every
        // tip-position condition by 100/v.
        let expected = t0 - 100.0 / PI;
        assert!(
            (t1 - expected).abs() < 0.05 * (100.0 / PI),
            "t1 {t1} vs {expected}"
        );
    }

    #[test]
    fn paperclip_broken_curve_structure() {
        let chain = paperclip();
        let t = -6.0;
        let b = broken_curve(&chain, t, 0.01).unwrap();
        assert!(b.closed);
        assert_eq!(b.arcs.len(), 2);
        assert_eq!(b.corners.len(), 2);
        assert!(b.corners_convex());
        let pts = b.polyline();
        assert!(pts.len() > 100);
        // Total turning of the closed convex curve: 2 pi minus the two
        // corner angles (numerically just 2 pi at this depth).
        let n = pts.len();
        let mut total = 0.0;
        for i in 0..n {
            let e_in = pts[i] - pts[(i + n - 1) % n];
            let e_out = pts[(i + 1) % n] - pts[i];
            total += e_in.cross(e_out).atan2(e_in.dot(e_out));
        }
        assert!((total.abs() - 2.0 * PI).abs() < 1e-6, "turning {total}");
    }

    #[test]
    fn broken_arcs_lie_on_their_solitons() {
        let chain = ladder();
        let t = -4.0;
        let b = broken_curve(&chain, t, 0.01).unwrap();
        assert_eq!(b.arcs.len(), 3);
        assert_eq!(b.corners.len(), 2);
        for (arc_pts, &arc_idx) in b.arcs.iter().zip(&b.arc_indices) {
            let sol = chain.soliton(arc_idx);
            for p in arc_pts {
                let eta = (p.y - sol.asymptote_low()).min(sol.asymptote_high() - p.y);
                if eta < 1e-5 {
                    continue; // too close to the asymptote for the plain form
                }
                let x = sol.x_of_y(p.y, t).unwrap();
                assert!((x - p.x).abs() < 1e-9, "arc {arc_idx}: {} vs {}", p.x, x);
            }
        }
    }

    #[test]
    fn cutoff_endpoints_and_midpoint() {
        assert_eq!(cutoff_eta(-1.0), 0.0);
        assert_eq!(cutoff_eta(1.0), 1.0);
        assert_eq!(cutoff_eta(-1.7), 0.0);
        assert_eq!(cutoff_eta(2.3), 1.0);
        assert!((cutoff_eta(0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_soliton_graph_is_exact() {
        let chain = Chain::with_zero_shifts(vec![0.0, 1.0], false).unwrap();
        let t = -5.0;
        let grid = graph_grid(&chain, 1e-3, 200);
        let g = glued_graph(&chain, t, &grid).unwrap();
        let sol = chain.soliton(0);
        for (y, x) in g.grid.iter().zip(&g.values) {
            assert_eq!(*x, sol.x_of_y(*y, t).unwrap());
        }
    }

    #[test]
    fn glued_graph_structure_two_solitons() {
        // Unit gaps mean v = pi, so arm heights shrink like exp(-pi^2 |t|);
        // t = -2 keeps them representable while the band is already thin.
        let chain = Chain::with_zero_shifts(vec![0.0, 1.0, 2.0], false).unwrap();
        let t = -2.0;
        let grid = graph_grid(&chain, 1e-3, 4001);
        let g = glued_graph(&chain, t, &grid).unwrap();
        assert!(g.values.iter().all(|v| v.is_finite()));
        // Outside the band, exact soliton values.
        let sols = chain.solitons();
        let band = Band::new(&chain, 1, t).unwrap();
        for (y, x) in g.grid.iter().zip(&g.values) {
            if *y < band.y_lo() - 1e-12 && *y < 1.0 {
                assert_eq!(*x, sols[0].x_of_y(*y, t).unwrap());
            }
            if *y > band.y_hi() + 1e-12 && *y > 1.0 {
                assert_eq!(*x, sols[1].x_of_y(*y, t).unwrap());
            }
        }
        // The band is thin and the blend is monotone across it.
        assert!(band.y_hi() - band.y_lo() < 1e-3);
        let mut prev = None;
        for i in 0..=400 {
            let x = -1.0 + 2.0 * i as f64 / 400.0;
            let y = band.blend(x, t).unwrap();
            if let Some(p) = prev {
                assert!(y > p, "blend must increase across the strip");
            }
            prev = Some(y);
        }
    }

    #[test]
    fn glued_graph_rejects_late_times() {
        let chain = Chain::with_zero_shifts(vec![0.0, 1.0, 2.0], false).unwrap();
        let grid = graph_grid(&chain, 1e-3, 100);
        let err = glued_graph(&chain, 5.0, &grid).unwrap_err();
        assert!(matches!(err, GlueError::ThresholdError { .. }));
        let zig = paperclip();
        let err = glued_graph(&zig, -5.0, &grid).unwrap_err();
        assert!(matches!(err, GlueError::WrongScenario { .. }));
    }

    #[test]
    fn barrier_assembly_general_chain() {
        // Gaps of pi and 2pi give unit-scale velocities, so every arm and
        // axis crossing stays at a representable distance at this time.
        let two_pi = 2.0 * PI;
        let chain = Chain::with_zero_shifts(vec![0.0, two_pi, PI, 0.0], false).unwrap();
        let t = -7.0;
        let asm = barrier_chain(&chain, t, 0.01).unwrap();
        assert_eq!(asm.barriers.len(), 2);
        assert_eq!(asm.barriers[0].arcs.len(), 2);
        assert_eq!(asm.barriers[1].arcs.len(), 1);
        // Single connected polyline: no jumps.
        let max_gap = asm
            .curve
            .windows(2)
            .map(|w| w[0].dist(w[1]))
            .fold(0.0f64, f64::max);
        assert!(max_gap < 0.05, "max gap {max_gap}");
        // It crosses the y-axis n+1 = 4 times.
        let crossings = asm
            .curve
            .windows(2)
            .filter(|w| (w[0].x <= 0.0) != (w[1].x <= 0.0))
            .count();
        assert_eq!(crossings, 4);
    }

    #[test]
    fn barrier_assembly_reduces_to_broken_curve_for_zigzags() {
        let chain = ladder();
        let t = -6.0;
        let asm = barrier_chain(&chain, t, 0.01).unwrap();
        assert_eq!(asm.barriers.len(), 1);
        let direct = broken_curve(&chain, t, 0.01).unwrap();
        assert_eq!(asm.curve.len(), direct.polyline().len());
    }

    #[test]
    fn barrier_assembly_monotone_matches_graph_crossings() {
        let chain = Chain::with_zero_shifts(vec![0.0, PI, 2.0 * PI], false).unwrap();
        let t = -7.0;
        let asm = barrier_chain(&chain, t, 0.005).unwrap();
        assert_eq!(asm.barriers.len(), 2);
        let crossings = asm
            .curve
            .windows(2)
            .filter(|w| (w[0].x <= 0.0) != (w[1].x <= 0.0))
            .count();
        assert_eq!(crossings, 3);
    }

    proptest! {
        #[test]
        fn cutoff_is_symmetric_and_monotone(x in -2.0f64..2.0, d in 0.0f64..0.5) {
            prop_assert!((cutoff_eta(x) + cutoff_eta(-x) - 1.0).abs() < 1e-14);
            prop_assert!(cutoff_eta(x + d) >= cutoff_eta(x));
        }

        #[test]
        fn corner_distance_shrinks_with_time(dt in 0.1f64..3.0) {
            let chain = Chain::with_zero_shifts(vec![0.0f64, 2.0, 1.0, 4.0], false).unwrap();
            let a = corner(&chain, 1, -4.0).unwrap();
            let b = corner(&chain, 1, -4.0 - dt).unwrap();
            prop_assert!(b.eta < a.eta);
            prop_assert!(b.angle < a.angle);
        }
    }
}
