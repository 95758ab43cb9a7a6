//! Height sequences: validation, velocities, and run decomposition.
//!
//! A chain is a list of y-levels `a_0..a_n` ("heights"), one horizontal
//! shift per consecutive pair, and a flag marking whether the curve closes
//! up. Soliton `k` (1-based in the math, 0-based here) lives in the strip
//! between `a_{k-1}` and `a_k`, travels horizontally with speed
//! `v_k = pi / |a_k - a_{k-1}|`, and alternates direction with `k`.
//!
//! Compact (closed) chains are canonicalized so that the height list ends
//! where it starts: an input whose last height differs from its first gets
//! the first height appended as an explicit closing arc (with shift 0).
//! After canonicalization the cycle visits `len - 1` distinct positions on
//! the y-axis, and that count must be even for a closed curve to cross the
//! axis consistently.

use crate::reaper::GrimReaper;
use thiserror::Error;

/// Validation failures for chain data.
#[derive(Debug, Error, PartialEq)]
pub enum ChainError {
    /// Two consecutive heights coincide, which would demand an infinite
    /// velocity.
    #[error("adjacent heights at indices {0} and {1} are equal; each arc needs a nonzero gap")]
    DuplicateAdjacentHeight(usize, usize),
    /// A closed curve must cross any horizontal-avoiding line an even
    /// number of times; this cycle has an odd number of axis crossings.
    #[error("compact chain has {0} axis crossings, which is odd; closed curves need an even count")]
    OddCompactChain(usize),
    /// The shift list must supply exactly one value per arc, and a chain
    /// needs at least two heights (one arc).
    #[error("chain with {heights} heights requires {} shifts, got {shifts}", if *heights > 0 { heights - 1 } else { 0 })]
    LengthMismatch { heights: usize, shifts: usize },
}

/// Which of the three construction templates a chain calls for.
///
/// * `Embedded`: heights strictly monotone — every consecutive pair is its
///   own run and the smooth-graph gluing applies.
/// * `Convex`: the whole sequence zigzags (every interior height is a
///   strict local extremum, cyclically for compact chains) — a single
///   broken curve with corners.
/// * `General`: anything else — one convex piece per maximal zigzag run,
///   assembled with cutoff gluing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioClass {
    Convex,
    Embedded,
    General,
}

/// One maximal zigzag run: heights `start..=end` (inclusive arc-index
/// range over the canonical height list).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Run {
    pub start: usize,
    pub end: usize,
}

impl Run {
    /// Number of arcs (solitons) in the run.
    pub fn arc_count(&self) -> usize {
        self.end - self.start
    }
}

/// The maximal-run decomposition of a chain.
///
/// `breakpoints` is strictly increasing, starts at 0, and ends at the last
/// height index; consecutive breakpoints delimit runs that overlap in
/// exactly one height.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunDecomposition {
    pub breakpoints: Vec<usize>,
    /// For compact chains: whether the zigzag condition also holds across
    /// the closing seam (at the shared first/last height). Always true for
    /// noncompact chains, where the seam does not exist.
    pub seam_alternates: bool,
}

impl RunDecomposition {
    /// Number of runs.
    pub fn run_count(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn runs(&self) -> impl Iterator<Item = Run> + '_ {
        self.breakpoints
            .windows(2)
            .map(|w| Run { start: w[0], end: w[1] })
    }
}

/// A validated chain of soliton data.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    heights: Vec<f64>,
    shifts: Vec<f64>,
    compact: bool,
}

impl Chain {
    /// Validate and canonicalize chain data.
    ///
    /// `shifts` must contain one entry per consecutive height pair. For a
    /// compact chain whose last height differs from its first, the cycle
    /// is closed automatically by appending the first height with shift 0.
    pub fn new(heights: Vec<f64>, shifts: Vec<f64>, compact: bool) -> Result<Self, ChainError> {
        if heights.len() < 2 || shifts.len() != heights.len() - 1 {
            return Err(ChainError::LengthMismatch {
                heights: heights.len(),
                shifts: shifts.len(),
            });
        }
        if let Some(k) = heights.windows(2).position(|w| w[0] == w[1]) {
            return Err(ChainError::DuplicateAdjacentHeight(k, k + 1));
        }

        let mut heights = heights;
        let mut shifts = shifts;
        if compact {
            if *heights.last().expect("nonempty") != heights[0] {
                heights.push(heights[0]);
                shifts.push(0.0);
            }
            // The cycle visits every height except the repeated closer.
            let crossings = heights.len() - 1;
            if !crossings.is_multiple_of(2) {
                return Err(ChainError::OddCompactChain(crossings));
            }
        }

        Ok(Self { heights, shifts, compact })
    }

    /// A chain with all shifts zero.
    pub fn with_zero_shifts(heights: Vec<f64>, compact: bool) -> Result<Self, ChainError> {
        let shifts = vec![0.0; heights.len().saturating_sub(1)];
        Self::new(heights, shifts, compact)
    }

    /// Canonical heights (for compact chains the list ends with a repeat
    /// of the first height).
    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    /// One shift per arc.
    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }

    pub fn is_compact(&self) -> bool {
        self.compact
    }

    /// Number of soliton arcs.
    pub fn arc_count(&self) -> usize {
        self.heights.len() - 1
    }

    /// Signed gaps `a_k - a_{k-1}`, one per arc.
    pub fn gaps(&self) -> Vec<f64> {
        self.heights.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Arc velocities `pi / |gap|`.
    ///
    /// For compact chains the cycle has no endpoint, so one wraparound
    /// entry (the first arc's velocity again) is appended after the last
    /// arc: indexing past the end continues around the cycle.
    pub fn velocities(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .gaps()
            .iter()
            .map(|g| std::f64::consts::PI / g.abs())
            .collect();
        if self.compact {
            v.push(v[0]);
        }
        v
    }

    /// The soliton for arc `k` (0-based), with parity alternating starting
    /// positive: arc 0 opens and travels toward +x.
    pub fn soliton(&self, k: usize) -> GrimReaper {
        let (lo, hi) = (self.heights[k], self.heights[k + 1]);
        let parity = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        GrimReaper::new(lo.min(hi), lo.max(hi), self.shifts[k], parity)
            .expect("validated chain arcs have distinct heights")
    }

    /// All solitons of the chain, in arc order.
    pub fn solitons(&self) -> Vec<GrimReaper> {
        (0..self.arc_count()).map(|k| self.soliton(k)).collect()
    }

    /// Split the height sequence into maximal zigzag runs.
    ///
    /// An interior height is a run boundary exactly when it fails to be a
    /// strict local extremum (its two neighboring gaps point the same
    /// way). Noncompact chains test interior indices only; compact chains
    /// additionally test the closing seam against its cyclic neighbors.
    pub fn decompose_runs(&self) -> RunDecomposition {
        let h = &self.heights;
        let n = self.arc_count();
        let mut breakpoints = vec![0];
        for k in 1..n {
            let up_in = h[k] > h[k - 1];
            let up_out = h[k + 1] > h[k];
            if up_in == up_out {
                breakpoints.push(k);
            }
        }
        breakpoints.push(n);

        let seam_alternates = if self.compact {
            // Cyclic neighbors of the shared first/last height: the height
            // before the closer and the height after the opener.
            let prev = h[n - 1];
            let next = h[1];
            let a0 = h[0];
            a0 < prev.min(next) || a0 > prev.max(next)
        } else {
            true
        };

        RunDecomposition { breakpoints, seam_alternates }
    }

    /// Classify which construction applies to this chain.
    pub fn class(&self) -> ScenarioClass {
        if !self.compact && self.strictly_monotone() {
            return ScenarioClass::Embedded;
        }
        let runs = self.decompose_runs();
        if runs.run_count() == 1 && runs.seam_alternates {
            ScenarioClass::Convex
        } else {
            ScenarioClass::General
        }
    }

    fn strictly_monotone(&self) -> bool {
        let inc = self.heights.windows(2).all(|w| w[0] < w[1]);
        let dec = self.heights.windows(2).all(|w| w[0] > w[1]);
        inc || dec
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn minimal_chain_is_valid() {
        let c = Chain::new(vec![0.0, 1.0], vec![0.0], false).unwrap();
        assert_eq!(c.arc_count(), 1);
    }

    #[test]
    fn equal_adjacent_heights_rejected() {
        let err = Chain::new(vec![0.0, 0.0], vec![0.0], false).unwrap_err();
        assert_eq!(err, ChainError::DuplicateAdjacentHeight(0, 1));
    }

    #[test]
    fn odd_compact_cycle_rejected() {
        // Auto-closing [0,1,2] yields a cycle visiting three heights.
        let err = Chain::new(vec![0.0, 1.0, 2.0], vec![0.0, 0.0], true).unwrap_err();
        assert_eq!(err, ChainError::OddCompactChain(3));
    }

    #[test]
    fn shift_count_must_match() {
        let err = Chain::new(vec![0.0, 1.0, 2.0], vec![0.0], false).unwrap_err();
        assert_eq!(err, ChainError::LengthMismatch { heights: 3, shifts: 1 });
        let err = Chain::new(vec![0.0], vec![], false).unwrap_err();
        assert!(matches!(err, ChainError::LengthMismatch { .. }));
    }

    #[test]
    fn unit_gap_velocity_is_pi() {
        let c = Chain::with_zero_shifts(vec![0.0, 1.0], false).unwrap();
        assert_eq!(c.velocities(), vec![PI]);
    }

    #[test]
    fn velocities_from_gaps() {
        let c = Chain::with_zero_shifts(vec![0.0, 2.0, 3.0], false).unwrap();
        let v = c.velocities();
        assert_eq!(v.len(), 2);
        assert!((v[0] - PI / 2.0).abs() < 1e-15);
        assert!((v[1] - PI).abs() < 1e-15);
    }

    #[test]
    fn compact_velocities_wrap_around() {
        let c = Chain::with_zero_shifts(vec![0.0, 1.0, 0.0], true).unwrap();
        assert_eq!(c.velocities(), vec![PI, PI, PI]);
    }

    #[test]
    fn compact_autoclose_appends_first_height() {
        let c = Chain::with_zero_shifts(vec![0.0, 1.0, 2.0, 3.0], true).unwrap();
        assert_eq!(c.heights(), &[0.0, 1.0, 2.0, 3.0, 0.0]);
        assert_eq!(c.arc_count(), 4);
        let v = c.velocities();
        assert_eq!(v.len(), 5);
        assert!((v[3] - PI / 3.0).abs() < 1e-15);
        assert!((v[4] - v[0]).abs() < 1e-15);
    }

    #[test]
    fn monotone_heights_split_into_pairs() {
        let c = Chain::with_zero_shifts(vec![0.0, 1.0, 2.0], false).unwrap();
        assert_eq!(c.decompose_runs().breakpoints, vec![0, 1, 2]);
        assert_eq!(c.class(), ScenarioClass::Embedded);
    }

    // The next two verdicts were frozen from a direct scan of the zigzag
    // condition at every interior index.
    #[test]
    fn zigzag_sequence_is_a_single_run() {
        let c = Chain::with_zero_shifts(vec![0.0, 2.0, 1.0, 3.0], false).unwrap();
        assert_eq!(c.decompose_runs().breakpoints, vec![0, 3]);
        assert_eq!(c.class(), ScenarioClass::Convex);
    }

    #[test]
    fn zigzag_with_wide_swings_is_a_single_run() {
        // 3 is a strict max of (0,3,1); 1 is a strict min of (3,1,2).
        let c = Chain::with_zero_shifts(vec![0.0, 3.0, 1.0, 2.0], false).unwrap();
        assert_eq!(c.decompose_runs().breakpoints, vec![0, 3]);
        assert_eq!(c.class(), ScenarioClass::Convex);
    }

    #[test]
    fn repeated_direction_breaks_the_run() {
        let c = Chain::with_zero_shifts(vec![0.0, 2.0, 1.0, 0.5], false).unwrap();
        // Heights fall twice in a row after the peak: boundary at index 2.
        assert_eq!(c.decompose_runs().breakpoints, vec![0, 2, 3]);
        assert_eq!(c.class(), ScenarioClass::General);
    }

    #[test]
    fn general_mixed_chain_decomposes() {
        let two_pi = 2.0 * PI;
        let c = Chain::with_zero_shifts(vec![0.0, two_pi, PI, 0.0], false).unwrap();
        assert_eq!(c.decompose_runs().breakpoints, vec![0, 2, 3]);
        assert_eq!(c.class(), ScenarioClass::General);
    }

    #[test]
    fn paperclip_is_compact_convex() {
        let c = Chain::with_zero_shifts(vec![0.0, 1.0, 0.0], true).unwrap();
        let runs = c.decompose_runs();
        assert_eq!(runs.run_count(), 1);
        assert!(runs.seam_alternates);
        assert_eq!(c.class(), ScenarioClass::Convex);
    }

    #[test]
    fn compact_cycle_with_monotone_stretch_is_general() {
        let c = Chain::with_zero_shifts(vec![0.0, 1.0, 2.0, 1.0], true).unwrap();
        // Canonical cycle 0,1,2,1,0: index 1 rises twice, index 3 falls twice.
        assert_eq!(c.decompose_runs().breakpoints, vec![0, 1, 3, 4]);
        assert_eq!(c.class(), ScenarioClass::General);
    }

    #[test]
    fn solitons_alternate_parity_and_share_asymptotes() {
        let c = Chain::with_zero_shifts(vec![0.0, 2.0, 1.0, 3.0], false).unwrap();
        let sols = c.solitons();
        assert_eq!(sols.len(), 3);
        assert_eq!(sols[0].parity(), 1.0);
        assert_eq!(sols[1].parity(), -1.0);
        assert_eq!(sols[2].parity(), 1.0);
        // Arc k and arc k+1 share the height between them.
        assert_eq!(sols[0].asymptote_high(), 2.0);
        assert_eq!(sols[1].asymptote_high(), 2.0);
        assert_eq!(sols[1].asymptote_low(), 1.0);
        assert_eq!(sols[2].asymptote_low(), 1.0);
    }

    fn distinct_adjacent_heights(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-10.0f64..10.0, len)
            .prop_filter("adjacent heights must differ", |h| {
                h.windows(2).all(|w| w[0] != w[1])
            })
    }

    proptest! {
        #[test]
        fn velocities_ignore_height_translation_and_reflection(
            h in distinct_adjacent_heights(2..9),
            c in -5.0f64..5.0,
        ) {
            let base = Chain::with_zero_shifts(h.clone(), false).unwrap();
            let shifted = Chain::with_zero_shifts(
                h.iter().map(|a| a + c).collect(), false).unwrap();
            let reflected = Chain::with_zero_shifts(
                h.iter().map(|a| -a).collect(), false).unwrap();
            for (a, b) in base.velocities().iter().zip(shifted.velocities()) {
                prop_assert!((a - b).abs() <= 1e-12 * a.abs());
            }
            for (a, b) in base.velocities().iter().zip(reflected.velocities()) {
                prop_assert!((a - b).abs() <= 1e-12 * a.abs());
            }
        }

        #[test]
        fn breakpoints_strictly_increase_and_cover(h in distinct_adjacent_heights(2..12)) {
            let chain = Chain::with_zero_shifts(h, false).unwrap();
            let d = chain.decompose_runs();
            prop_assert_eq!(d.breakpoints[0], 0);
            prop_assert_eq!(*d.breakpoints.last().unwrap(), chain.arc_count());
            prop_assert!(d.breakpoints.windows(2).all(|w| w[0] < w[1]));
        }

        #[test]
        fn each_run_redecomposes_to_itself(h in distinct_adjacent_heights(2..12)) {
            let chain = Chain::with_zero_shifts(h.clone(), false).unwrap();
            for run in chain.decompose_runs().runs() {
                let sub: Vec<f64> = h[run.start..=run.end].to_vec();
                let sub_chain = Chain::with_zero_shifts(sub, false).unwrap();
                let d = sub_chain.decompose_runs();
                prop_assert_eq!(d.run_count(), 1);
            }
        }

        #[test]
        fn embedded_iff_every_run_is_one_arc(h in distinct_adjacent_heights(2..12)) {
            let chain = Chain::with_zero_shifts(h, false).unwrap();
            let m = chain.decompose_runs().run_count();
            let embedded = chain.class() == ScenarioClass::Embedded;
            prop_assert_eq!(embedded, m == chain.arc_count());
        }
    }
}
