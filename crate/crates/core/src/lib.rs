//! Thinging-machine conceptual models.
//!
//! A model has a static part (thimacs containing the five generic actions,
//! linked by flow and trigger edges) and a dynamic part (events over regions
//! of the static model, ordered by a behavior graph). This crate parses and
//! prints the `.tm` text format, validates both parts, normalizes simplified
//! diagrams, simulates behaviors and converts to and from DOT, JSON and
//! activity diagrams.

pub mod bundle;
pub mod dsl;
pub mod dynamics;
pub mod interop;
pub mod model;
pub mod normalize;
pub mod paths;
pub mod report;
pub mod sim;
pub mod validate;

pub use bundle::{ModelBundle, SpanTable};
pub use model::{ActionId, ActionKind, EdgeKind, Mode, StaticModel, ThimacId};
pub use report::{Rule, Severity, ValidationReport, Violation};
