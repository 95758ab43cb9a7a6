//! Scenario files: a chain, a ladder of start times, solver settings and
//! verification toggles, loaded from TOML and validated as a whole.

use std::path::{Path, PathBuf};

use csflab::chain::{Chain, ChainError, ScenarioClass};
use csflab::flow::FlowParams;
use csflab::glue::find_t0;
use serde::Deserialize;
use thiserror::Error;

use crate::verify::SUITE_NAMES;

/// Loading or validating a scenario file failed.
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario file {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// The TOML text did not parse into the scenario schema; the message
    /// carries the line/column and the offending field.
    #[error("cannot parse scenario file {path}:\n{message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid scenario {path}")]
    Validation {
        path: PathBuf,
        #[source]
        source: ValidationError,
    },
}

/// A parsed scenario that violates one of the cross-field invariants.
#[derive(Debug, Error)]
pub enum ValidationError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("start_times must contain at least one time")]
    NoStartTimes,
    #[error("start time {0} must be negative")]
    StartTimeNotNegative(f64),
    #[error(
        "start_times must strictly decrease in magnitude toward end_time \
         (found {prev} before {next})"
    )]
    StartTimesOutOfOrder { prev: f64, next: f64 },
    #[error("start time {start} does not precede end_time {end_time}")]
    StartNotBeforeEnd { start: f64, end_time: f64 },
    #[error(
        "end_time {end_time} is not before the construction threshold \
         {threshold}; the glued initial data only exists strictly before it"
    )]
    EndTimePastThreshold { end_time: f64, threshold: f64 },
    #[error("flow.{field} must be positive and finite (got {value})")]
    NonPositive { field: &'static str, value: f64 },
    #[error("flow.{field} must be at least 1")]
    ZeroCadence { field: &'static str },
    #[error("unknown verification suite {name:?}; known suites: {known}")]
    UnknownSuite { name: String, known: String },
    #[error(
        "compact chains must zigzag (every interior height a strict local \
         extremum); this one decomposes into several runs"
    )]
    CompactNotConvex,
}

/// Solver and artifact-cadence settings, all optional in the file.
#[derive(Debug, Clone, Copy)]
pub struct FlowSettings {
    /// Target arclength / grid spacing `h`.
    pub resolution: f64,
    /// Time step; defaults to `0.4 h^2` when absent.
    pub dt: Option<f64>,
    /// Corner fillet radius; defaults to `5 h` when absent.
    pub mollify_radius: Option<f64>,
    /// Steps between recorded snapshots.
    pub record_every: usize,
    /// Recorded snapshots between emitted SVG frames / CSV snapshot blocks.
    pub frame_every: usize,
    /// Inset of the sampling grid from the outer asymptotes (graph flows).
    pub graph_margin: f64,
}

impl FlowSettings {
    pub fn dt(&self) -> f64 {
        self.dt.unwrap_or(0.4 * self.resolution * self.resolution)
    }

    pub fn params(&self) -> FlowParams {
        FlowParams {
            dt: self.dt(),
            h: self.resolution,
            mollify_radius: self.mollify_radius.unwrap_or(5.0 * self.resolution),
            record_every: self.record_every,
        }
    }
}

/// A validated scenario: everything the commands need to run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub chain: Chain,
    /// Ladder of flow start times, strictly increasing and all negative.
    pub start_times: Vec<f64>,
    pub end_time: f64,
    pub flow: FlowSettings,
    /// Output root named in the file (overridden by `--out`, overriding
    /// the environment default).
    pub output_dir: Option<PathBuf>,
    /// Verification suites enabled for this scenario.
    pub suites: Vec<String>,
}

// --- raw (serde) layer ------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    output_dir: Option<String>,
    start_times: Vec<f64>,
    end_time: f64,
    chain: RawChain,
    #[serde(default)]
    flow: RawFlow,
    #[serde(default)]
    verify: RawVerify,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChain {
    heights: Vec<f64>,
    shifts: Vec<f64>,
    #[serde(default)]
    compact: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFlow {
    resolution: Option<f64>,
    dt: Option<f64>,
    mollify_radius: Option<f64>,
    record_every: Option<usize>,
    frame_every: Option<usize>,
    graph_margin: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVerify {
    suites: Option<Vec<String>>,
}

const DEFAULT_RESOLUTION: f64 = 1e-2;
const DEFAULT_RECORD_EVERY: usize = 100;
const DEFAULT_FRAME_EVERY: usize = 10;
const DEFAULT_GRAPH_MARGIN: f64 = 1e-5;

/// Load and fully validate a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let raw: RawScenario = toml::from_str(&text).map_err(|e| ScenarioError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let validated = validate(raw, path);
    validated.map_err(|source| ScenarioError::Validation {
        path: path.to_path_buf(),
        source,
    })
}

fn validate(raw: RawScenario, path: &Path) -> Result<Scenario, ValidationError> {
    let chain = Chain::new(raw.chain.heights, raw.chain.shifts, raw.chain.compact)?;
    if chain.is_compact() && chain.class() != ScenarioClass::Convex {
        return Err(ValidationError::CompactNotConvex);
    }

    let name = raw.name.unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scenario".to_string())
    });

    let flow = FlowSettings {
        resolution: raw.flow.resolution.unwrap_or(DEFAULT_RESOLUTION),
        dt: raw.flow.dt,
        mollify_radius: raw.flow.mollify_radius,
        record_every: raw.flow.record_every.unwrap_or(DEFAULT_RECORD_EVERY),
        frame_every: raw.flow.frame_every.unwrap_or(DEFAULT_FRAME_EVERY),
        graph_margin: raw.flow.graph_margin.unwrap_or(DEFAULT_GRAPH_MARGIN),
    };

    let scenario = Scenario {
        name,
        chain,
        start_times: raw.start_times,
        end_time: raw.end_time,
        flow,
        output_dir: raw.output_dir.map(PathBuf::from),
        suites: raw.verify.suites.unwrap_or_default(),
    };
    check_invariants(&scenario)?;
    Ok(scenario)
}

/// Cross-field invariants, re-checked after command-line overrides.
pub fn check_invariants(sc: &Scenario) -> Result<(), ValidationError> {
    if sc.start_times.is_empty() {
        return Err(ValidationError::NoStartTimes);
    }
    // `partial_cmp` keeps NaN inputs (TOML accepts them) on the error path.
    let lt = |a: f64, b: f64| a.partial_cmp(&b) == Some(std::cmp::Ordering::Less);
    for &t in &sc.start_times {
        if !lt(t, 0.0) {
            return Err(ValidationError::StartTimeNotNegative(t));
        }
        if !lt(t, sc.end_time) {
            return Err(ValidationError::StartNotBeforeEnd {
                start: t,
                end_time: sc.end_time,
            });
        }
    }
    for w in sc.start_times.windows(2) {
        if w[0] >= w[1] {
            return Err(ValidationError::StartTimesOutOfOrder {
                prev: w[0],
                next: w[1],
            });
        }
    }
    let threshold = find_t0(&sc.chain);
    if !lt(sc.end_time, threshold) {
        return Err(ValidationError::EndTimePastThreshold {
            end_time: sc.end_time,
            threshold,
        });
    }

    let positive = [
        ("resolution", sc.flow.resolution),
        ("dt", sc.flow.dt()),
        ("mollify_radius", sc.flow.mollify_radius.unwrap_or(5.0 * sc.flow.resolution)),
        ("graph_margin", sc.flow.graph_margin),
    ];
    for (field, value) in positive {
        if !(value > 0.0 && value.is_finite()) {
            return Err(ValidationError::NonPositive { field, value });
        }
    }
    if sc.flow.record_every == 0 {
        return Err(ValidationError::ZeroCadence { field: "record_every" });
    }
    if sc.flow.frame_every == 0 {
        return Err(ValidationError::ZeroCadence { field: "frame_every" });
    }

    for name in &sc.suites {
        if !SUITE_NAMES.contains(&name.as_str()) {
            return Err(ValidationError::UnknownSuite {
                name: name.clone(),
                known: SUITE_NAMES.join(", "),
            });
        }
    }
    Ok(())
}
