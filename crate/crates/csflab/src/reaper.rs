//! The translating soliton of curve shortening flow ("grim reaper") and its
//! closed-form evaluators.
//!
//! A soliton occupies an open horizontal strip `low < y < high`, translates
//! rigidly at speed `v = pi / (high - low)`, and is the graph
//!
//! ```text
//! x = shift + parity * ( profile(v * (y - low)) / v  +  v * t )
//! ```
//!
//! where `profile(s) = -ln(sin s)`. Both arms approach the asymptotes
//! `y = low` and `y = high`; `parity = +1` opens toward +x and travels
//! right, `parity = -1` the mirror image. The graph is symmetric about the
//! strip midline, where the tip (the unique vertical-tangent point) sits.

use crate::geom::Point;
use thiserror::Error;

/// Evaluation failures for soliton formulas.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum ReaperError {
    /// Argument lies on or outside the soliton's open domain.
    #[error("argument {0} lies outside the open domain")]
    DomainError(f64),
    /// The requested x is ahead of the soliton at this time: the branch
    /// inverse needs `exp(phi) <= 1` and got `phi > 0`.
    #[error("point is off the soliton: branch inverse exponent phi = {0} is positive")]
    OutOfDomain(f64),
    /// Constructor rejected a degenerate strip.
    #[error("asymptotes must satisfy low < high, got {low} >= {high}")]
    InvalidStrip { low: f64, high: f64 },
    /// Constructor rejected a parity other than +1 or -1.
    #[error("parity must be +1 or -1, got {0}")]
    InvalidParity(f64),
}

/// Guard distance keeping `profile` arguments away from the endpoints of
/// `(0, pi)`, where the logarithm blows up.
const PROFILE_GUARD: f64 = 1e-12;

/// The soliton profile `-ln(sin s)` for `s` in `(0, pi)`.
///
/// Nonnegative, zero only at `pi/2`, symmetric about `pi/2`. Arguments
/// inside the open interval but closer than 1e-12 to an endpoint are
/// clamped to the guard distance; arguments on or beyond the endpoints are
/// domain errors.
pub fn profile(s: f64) -> Result<f64, ReaperError> {
    if !(s > 0.0 && s < std::f64::consts::PI) {
        return Err(ReaperError::DomainError(s));
    }
    let s = s.clamp(PROFILE_GUARD, std::f64::consts::PI - PROFILE_GUARD);
    Ok(-s.sin().ln())
}

/// The remainder `profile(s) + ln(s) = -ln(sin(s)/s)`, evaluated without
/// cancellation for small `s`.
///
/// This is the gap between the profile and its logarithmic asymptote; it
/// controls how far a corner of two glued solitons sits from the crossing
/// point of their asymptotic lines. Series: `s^2/6 + s^4/180 + ...`.
pub fn profile_remainder(s: f64) -> Result<f64, ReaperError> {
    if !(s > 0.0 && s < std::f64::consts::PI) {
        return Err(ReaperError::DomainError(s));
    }
    if s < 0.1 {
        let s2 = s * s;
        // -ln(sin s / s) = s^2/6 + s^4/180 + s^6/2835 + s^8/37800 + O(s^10)
        Ok(s2 / 6.0 + s2 * s2 / 180.0 + s2 * s2 * s2 / 2835.0 + s2 * s2 * s2 * s2 / 37800.0)
    } else {
        Ok(-(s.sin() / s).ln())
    }
}

/// Which arm of the soliton a branch inverse refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// The arm hugging the lower asymptote.
    Lower,
    /// The arm hugging the upper asymptote.
    Upper,
}

/// One translating soliton, fixed for all time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrimReaper {
    asymptote_low: f64,
    asymptote_high: f64,
    shift: f64,
    parity: f64,
    velocity: f64,
}

impl GrimReaper {
    /// Build a soliton in the strip `(low, high)` with horizontal shift
    /// `shift` and opening/travel direction `parity` (+1 or -1). The speed
    /// is determined by the strip height.
    pub fn new(low: f64, high: f64, shift: f64, parity: f64) -> Result<Self, ReaperError> {
        // `partial_cmp` so NaN bounds are rejected along with inverted ones.
        if low.partial_cmp(&high) != Some(std::cmp::Ordering::Less) {
            return Err(ReaperError::InvalidStrip { low, high });
        }
        if parity != 1.0 && parity != -1.0 {
            return Err(ReaperError::InvalidParity(parity));
        }
        Ok(Self {
            asymptote_low: low,
            asymptote_high: high,
            shift,
            parity,
            velocity: std::f64::consts::PI / (high - low),
        })
    }

    pub fn asymptote_low(&self) -> f64 {
        self.asymptote_low
    }

    pub fn asymptote_high(&self) -> f64 {
        self.asymptote_high
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn parity(&self) -> f64 {
        self.parity
    }

    pub fn velocity(&self) -> f64 {
        self.velocity
    }

    pub fn midline(&self) -> f64 {
        0.5 * (self.asymptote_low + self.asymptote_high)
    }

    /// Distance from `y` to the nearer asymptote; errors outside the open
    /// strip.
    pub fn eta(&self, y: f64) -> Result<f64, ReaperError> {
        if !(y > self.asymptote_low && y < self.asymptote_high) {
            return Err(ReaperError::DomainError(y));
        }
        Ok((y - self.asymptote_low).min(self.asymptote_high - y))
    }

    /// Horizontal position of the curve at height `y` and time `t`.
    pub fn x_of_y(&self, y: f64, t: f64) -> Result<f64, ReaperError> {
        if !(y > self.asymptote_low && y < self.asymptote_high) {
            return Err(ReaperError::DomainError(y));
        }
        let g = profile(self.velocity * (y - self.asymptote_low))?;
        Ok(self.shift + self.parity * (g / self.velocity + self.velocity * t))
    }

    /// The point of the curve at height `y` and time `t`.
    pub fn point_at(&self, y: f64, t: f64) -> Result<Point, ReaperError> {
        Ok(Point::new(self.x_of_y(y, t)?, y))
    }

    /// Branch-inverse exponent: `sin(v * eta) = exp(phi)` on the curve.
    pub fn branch_exponent(&self, x: f64, t: f64) -> f64 {
        let v = self.velocity;
        v * v * t - self.parity * v * (x - self.shift)
    }

    /// Height of the chosen arm above/below its asymptote at horizontal
    /// position `x`, time `t`. Errors where the soliton has no point with
    /// that x (ahead of the tip).
    pub fn y_of_x_branch(&self, branch: Branch, x: f64, t: f64) -> Result<f64, ReaperError> {
        let phi = self.branch_exponent(x, t);
        if phi > 0.0 {
            return Err(ReaperError::OutOfDomain(phi));
        }
        let eta = phi.exp().asin() / self.velocity;
        Ok(match branch {
            Branch::Lower => self.asymptote_low + eta,
            Branch::Upper => self.asymptote_high - eta,
        })
    }

    /// Angle between the curve's tangent line and the x-axis at height
    /// `y`, in `(0, pi/2]`. Equals `velocity * eta(y)` exactly; the slope
    /// magnitude is `tan` of this angle, so the tip (midline) is the one
    /// vertical-tangent point.
    pub fn tangent_angle(&self, y: f64) -> Result<f64, ReaperError> {
        Ok(self.velocity * self.eta(y)?)
    }

    /// Unit tangent in the direction of increasing y.
    pub fn tangent_at(&self, y: f64) -> Result<Point, ReaperError> {
        self.eta(y)?; // domain check
        let s = self.velocity * (y - self.asymptote_low);
        // d(x)/d(y) = -parity * cot(s); hypot keeps the normalization
        // stable even where the slope diverges near the asymptotes.
        let dxdy = -self.parity * s.cos() / s.sin();
        let n = dxdy.hypot(1.0);
        Ok(Point::new(dxdy / n, 1.0 / n))
    }

    /// The tip: the unique point with a vertical tangent, on the strip
    /// midline, translating at constant speed `velocity * parity`.
    pub fn tip(&self, t: f64) -> Point {
        Point::new(
            self.shift + self.parity * self.velocity * t,
            self.midline(),
        )
    }

    /// The arc between the curve's two y-axis crossings (through the tip),
    /// sampled uniformly in arclength at spacing `ds` and ordered by
    /// increasing y. The endpoints land on the axis up to rounding.
    ///
    /// Errors when the arms do not reach the axis at time `t` (tip on or
    /// past it).
    pub fn axis_to_axis_arc(&self, t: f64, ds: f64) -> Result<Vec<Point>, ReaperError> {
        let v = self.velocity;
        let phi = self.branch_exponent(0.0, t);
        if phi >= 0.0 {
            return Err(ReaperError::OutOfDomain(phi));
        }
        let eta = phi.exp().asin() / v;
        // Arclength coordinate of the crossings: sigma = ln(tan(v*eta/2))/v
        // below the midline, its negative above.
        let sigma_top = -(v * eta / 2.0).tan().ln() / v;
        let n = ((2.0 * sigma_top / ds).ceil() as usize).clamp(2, 2_000_000);
        Ok((0..=n)
            .map(|i| {
                let s = -sigma_top + 2.0 * sigma_top * i as f64 / n as f64;
                let z = (v * s).abs();
                let ln_cosh = z + (-2.0 * z).exp().ln_1p() - std::f64::consts::LN_2;
                let x = self.shift + self.parity * (ln_cosh / v + v * t);
                let y = self.asymptote_low + 2.0 / v * (v * s).exp().atan();
                Point::new(x, y)
            })
            .collect())
    }
}
