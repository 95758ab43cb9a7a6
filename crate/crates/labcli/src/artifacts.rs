//! Artifact layout and CSV round-tripping.
//!
//! Every artifact path is a pure function of the output root, the scenario
//! name and the command, so reruns overwrite their previous outputs. CSV
//! files carry a versioned schema comment, then a column-header row, then
//! data rows with floats printed to 17 significant digits (round-trip exact
//! for f64).

use std::io::Write;
use std::path::{Path, PathBuf};

use csflab::Point;
use thiserror::Error;

use crate::scenario::Scenario;

/// Version tag stamped into the first comment line of every CSV.
pub const CSV_VERSION: &str = "labcli csv v1";

/// Environment variable naming the default output root.
pub const OUT_ENV_VAR: &str = "LABCLI_OUT";

const DEFAULT_ROOT: &str = "artifacts";

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error("missing artifact {path} (run `{hint}` first)")]
    Missing { path: PathBuf, hint: String },
    #[error("malformed artifact {path} line {line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Where one scenario's artifacts live: `<root>/<scenario-name>/<command>/`.
#[derive(Debug, Clone)]
pub struct Layout {
    root: PathBuf,
    scenario: String,
}

impl Layout {
    /// Resolve the output root: `--out` flag, then the scenario file's
    /// `output_dir`, then `$LABCLI_OUT`, then `./artifacts`.
    pub fn new(scenario: &Scenario, out_flag: Option<&Path>) -> Self {
        let root = out_flag
            .map(Path::to_path_buf)
            .or_else(|| scenario.output_dir.clone())
            .or_else(|| std::env::var_os(OUT_ENV_VAR).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_ROOT));
        Self { root, scenario: scenario.name.clone() }
    }

    pub fn command_dir(&self, command: &str) -> PathBuf {
        self.root.join(&self.scenario).join(command)
    }

    /// `<command>/<label>_t<time>.<ext>`; the time tag is the shortest
    /// exact decimal form of the f64, so equal times collide on purpose.
    pub fn timed(&self, command: &str, label: &str, t: f64, ext: &str) -> PathBuf {
        self.command_dir(command)
            .join(format!("{label}_t{}.{ext}", time_tag(t)))
    }

    pub fn file(&self, command: &str, name: &str) -> PathBuf {
        self.command_dir(command).join(name)
    }
}

/// Shortest round-trip decimal form of a time, used in file names.
pub fn time_tag(t: f64) -> String {
    format!("{t}")
}

/// 17-significant-digit scientific form; parses back to the same f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>, ArtifactError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|source| ArtifactError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    let file = std::fs::File::create(path).map_err(|source| ArtifactError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(std::io::BufWriter::new(file))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ArtifactError + '_ {
    move |source| ArtifactError::Io { path: path.to_path_buf(), source }
}

// --- curve CSV ---------------------------------------------------------------

/// One annotated point row (`# <kind>,x,y` comment before the data).
pub struct Annotation {
    pub kind: &'static str,
    pub point: Point,
}

/// Write curve samples as `t,x,y` rows. `blocks` holds one `(time, points)`
/// entry per snapshot; a single-snapshot file is just one block.
pub fn write_curve_csv(
    path: &Path,
    blocks: &[(f64, &[Point])],
    annotations: &[Annotation],
) -> Result<(), ArtifactError> {
    let mut w = create(path)?;
    let err = io_err(path);
    (|| -> std::io::Result<()> {
        writeln!(w, "# {CSV_VERSION} schema=curve columns=t,x,y")?;
        for a in annotations {
            writeln!(
                w,
                "# {},{},{}",
                a.kind,
                fmt_f64(a.point.x),
                fmt_f64(a.point.y)
            )?;
        }
        writeln!(w, "t,x,y")?;
        for (t, points) in blocks {
            let tt = fmt_f64(*t);
            for p in *points {
                writeln!(w, "{tt},{},{}", fmt_f64(p.x), fmt_f64(p.y))?;
            }
        }
        w.flush()
    })()
    .map_err(err)
}

/// Read a curve CSV back as `(time, points)` blocks (consecutive rows with
/// the same `t` form one block). Comment lines are skipped.
pub fn read_curve_csv(path: &Path, hint: &str) -> Result<Vec<(f64, Vec<Point>)>, ArtifactError> {
    let text = read_text(path, hint)?;
    let mut blocks: Vec<(f64, Vec<Point>)> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.starts_with('#') || line == "t,x,y" || line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let bad = |message: &str| ArtifactError::Malformed {
            path: path.to_path_buf(),
            line: idx + 1,
            message: message.to_string(),
        };
        let mut next = |name: &str| -> Result<f64, ArtifactError> {
            fields
                .next()
                .ok_or_else(|| bad(&format!("missing {name} column")))?
                .parse::<f64>()
                .map_err(|e| bad(&format!("bad {name}: {e}")))
        };
        let t = next("t")?;
        let x = next("x")?;
        let y = next("y")?;
        match blocks.last_mut() {
            Some((bt, pts)) if *bt == t => pts.push(Point::new(x, y)),
            _ => blocks.push((t, vec![Point::new(x, y)])),
        }
    }
    if blocks.is_empty() {
        return Err(ArtifactError::Malformed {
            path: path.to_path_buf(),
            line: 0,
            message: "no data rows".to_string(),
        });
    }
    Ok(blocks)
}

// --- corners CSV --------------------------------------------------------------

pub struct CornerRow {
    pub height_index: usize,
    pub t: f64,
    pub point: Point,
    pub eta: f64,
    pub angle: f64,
    pub predicted_x: f64,
    pub prediction_gap: f64,
}

pub fn write_corners_csv(path: &Path, rows: &[CornerRow]) -> Result<(), ArtifactError> {
    let mut w = create(path)?;
    let err = io_err(path);
    (|| -> std::io::Result<()> {
        writeln!(
            w,
            "# {CSV_VERSION} schema=corners \
             columns=height_index,t,x,y,eta,angle,predicted_x,prediction_gap"
        )?;
        writeln!(w, "height_index,t,x,y,eta,angle,predicted_x,prediction_gap")?;
        for r in rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                r.height_index,
                fmt_f64(r.t),
                fmt_f64(r.point.x),
                fmt_f64(r.point.y),
                fmt_f64(r.eta),
                fmt_f64(r.angle),
                fmt_f64(r.predicted_x),
                fmt_f64(r.prediction_gap),
            )?;
        }
        w.flush()
    })()
    .map_err(err)
}

// --- diagnostics CSV -----------------------------------------------------------

/// Per-snapshot scalar diagnostics of one flow run.
#[derive(Debug, Clone, Copy)]
pub struct DiagRow {
    pub t: f64,
    pub length: f64,
    /// Sum of absolute turning angles (discrete total curvature).
    pub total_turning: f64,
    pub max_curvature: f64,
    pub min_edge: f64,
    /// Signed area between the flowed curve and the exact piecewise-soliton
    /// reference at the same time.
    pub area: f64,
    /// Sum of the reference curve's corner opening angles (0 when the
    /// reference has no corners).
    pub corner_angle_sum: f64,
    /// One-sided sup distance from the flowed curve to the reference.
    pub strip_distance: f64,
}

const DIAG_COLUMNS: &str =
    "t,length,total_turning,max_curvature,min_edge,area,corner_angle_sum,strip_distance";

pub fn write_diagnostics_csv(path: &Path, rows: &[DiagRow]) -> Result<(), ArtifactError> {
    let mut w = create(path)?;
    let err = io_err(path);
    (|| -> std::io::Result<()> {
        writeln!(w, "# {CSV_VERSION} schema=diagnostics columns={DIAG_COLUMNS}")?;
        writeln!(w, "{DIAG_COLUMNS}")?;
        for r in rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                fmt_f64(r.t),
                fmt_f64(r.length),
                fmt_f64(r.total_turning),
                fmt_f64(r.max_curvature),
                fmt_f64(r.min_edge),
                fmt_f64(r.area),
                fmt_f64(r.corner_angle_sum),
                fmt_f64(r.strip_distance),
            )?;
        }
        w.flush()
    })()
    .map_err(err)
}

pub fn read_diagnostics_csv(path: &Path, hint: &str) -> Result<Vec<DiagRow>, ArtifactError> {
    let text = read_text(path, hint)?;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.starts_with('#') || line == DIAG_COLUMNS || line.is_empty() {
            continue;
        }
        let vals: Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
        let vals = vals.map_err(|e| ArtifactError::Malformed {
            path: path.to_path_buf(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        if vals.len() != 8 {
            return Err(ArtifactError::Malformed {
                path: path.to_path_buf(),
                line: idx + 1,
                message: format!("expected 8 columns, got {}", vals.len()),
            });
        }
        rows.push(DiagRow {
            t: vals[0],
            length: vals[1],
            total_turning: vals[2],
            max_curvature: vals[3],
            min_edge: vals[4],
            area: vals[5],
            corner_angle_sum: vals[6],
            strip_distance: vals[7],
        });
    }
    Ok(rows)
}

// --- run summary CSV -------------------------------------------------------------

pub struct RunSummary {
    pub start_time: f64,
    pub last_time: f64,
    pub snapshots: usize,
    /// `ok` or the failure description (commas/newlines replaced).
    pub status: String,
}

pub fn write_runs_csv(path: &Path, rows: &[RunSummary]) -> Result<(), ArtifactError> {
    let mut w = create(path)?;
    let err = io_err(path);
    (|| -> std::io::Result<()> {
        writeln!(
            w,
            "# {CSV_VERSION} schema=runs columns=start_time,last_time,snapshots,status"
        )?;
        writeln!(w, "start_time,last_time,snapshots,status")?;
        for r in rows {
            let status: String = r
                .status
                .chars()
                .map(|c| if c == ',' || c == '\n' { ';' } else { c })
                .collect();
            writeln!(
                w,
                "{},{},{},{status}",
                fmt_f64(r.start_time),
                fmt_f64(r.last_time),
                r.snapshots,
            )?;
        }
        w.flush()
    })()
    .map_err(err)
}

// --- text helpers ------------------------------------------------------------------

pub fn write_text(path: &Path, text: &str) -> Result<(), ArtifactError> {
    let mut w = create(path)?;
    let err = io_err(path);
    (|| -> std::io::Result<()> {
        w.write_all(text.as_bytes())?;
        w.flush()
    })()
    .map_err(err)
}

fn read_text(path: &Path, hint: &str) -> Result<String, ArtifactError> {
    if !path.exists() {
        return Err(ArtifactError::Missing {
            path: path.to_path_buf(),
            hint: hint.to_string(),
        });
    }
    std::fs::read_to_string(path).map_err(|source| ArtifactError::Io {
        path: path.to_path_buf(),
        source,
    })
}
