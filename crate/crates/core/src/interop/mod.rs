//! Exchange formats: DOT output, JSON interchange and activity-diagram import.

pub mod activity;
pub mod dot;
pub mod dot_check;
pub mod json;

pub use activity::{import_activity, ActivityError, AdDocument, AdEdge, AdNode, AdPartition};
pub use dot::{export_dot, DotOptions};
pub use dot_check::{check_dot, DotStats, DotSyntaxError};
pub use json::{export_json, import_json, JsonError};
