//! A numerical laboratory for curve shortening flow acting on grim-reaper
//! soliton chains.
//!
//! The crate is organized as a pipeline:
//!
//! * [`chain`] — validate height sequences and decompose them into monotone
//!   runs, classifying the resulting scenario.
//! * [`reaper`] — exact translating-soliton ("grim reaper") solutions of the
//!   flow, with forward evaluation, branch inverses, and tangent data.
//! * [`glue`] — assemble soliton families into initial curves: broken curves
//!   with corners, smoothed embedded graphs, and barrier chains; locate and
//!   track the corners of a broken curve over time.
//! * [`flow`] — discrete curve shortening flow for open/closed polylines and
//!   a semi-implicit graph solver with exact boundary data.
//! * [`measure`] — quantitative diagnostics: signed areas and their predicted
//!   decay rates, total curvature, crossing counts, strip distance, and
//!   exponential-rate fitting.

pub mod chain;
pub mod flow;
pub mod geom;
pub mod glue;
pub mod measure;
pub mod reaper;

pub use chain::{Chain, ChainError, Run, ScenarioClass};
pub use geom::Point;
pub use glue::{BarrierAssembly, BrokenCurve, Corner, GlueError};
pub use measure::{AreaReport, DissipationSample, MeasureError, RateFit};
pub use reaper::{Branch, GrimReaper, ReaperError};
