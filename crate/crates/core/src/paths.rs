//! Thing paths: where a thing can travel along flow edges.

use thiserror::Error;

use crate::model::{ActionId, StaticModel};
use crate::report::ValidationReport;
use crate::validate::{validate_static_with, RuleTable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    #[error("unknown action `{0}`")]
    Dangling(String),
    #[error("model is not strict-valid:\n{0}")]
    InvalidInput(ValidationReport),
}

impl PathError {
    pub fn code(&self) -> &'static str {
        match self {
            PathError::Dangling(_) => "DANGLING",
            PathError::InvalidInput(_) => "INVALID_INPUT",
        }
    }
}

/// All maximal simple flow paths from `start`, sorted lexicographically by
/// their dotted action paths.
pub fn flow_paths(model: &StaticModel, start: ActionId) -> Result<Vec<Vec<ActionId>>, PathError> {
    if start.0 >= model.actions.len() {
        return Err(PathError::Dangling(format!("#{}", start.0)));
    }
    let report = validate_static_with(model, &RuleTable::strict());
    if report.has_errors() {
        return Err(PathError::InvalidInput(report));
    }

    let mut succ: Vec<Vec<ActionId>> = vec![Vec::new(); model.actions.len()];
    for e in model.flow_edges() {
        succ[e.src.0].push(e.dst);
    }
    let mut found = Vec::new();
    let mut on_path = vec![false; model.actions.len()];
    let mut path = vec![start];
    on_path[start.0] = true;
    extend(&succ, &mut path, &mut on_path, &mut found);

    let mut keyed: Vec<(Vec<String>, Vec<ActionId>)> = found
        .into_iter()
        .map(|p| (p.iter().map(|a| model.action_path(*a)).collect(), p))
        .collect();
    keyed.sort();
    keyed.dedup();
    Ok(keyed.into_iter().map(|(_, p)| p).collect())
}

/// Same as [`flow_paths`] but addressed by dotted path.
pub fn flow_paths_from(model: &StaticModel, start: &str) -> Result<Vec<Vec<ActionId>>, PathError> {
    let id = model
        .resolve_action(start)
        .ok_or_else(|| PathError::Dangling(start.to_owned()))?;
    flow_paths(model, id)
}

fn extend(
    succ: &[Vec<ActionId>],
    path: &mut Vec<ActionId>,
    on_path: &mut [bool],
    found: &mut Vec<Vec<ActionId>>,
) {
    let last = *path.last().expect("path is never empty");
    let mut extended = false;
    for &next in &succ[last.0] {
        if on_path[next.0] {
            continue;
        }
        extended = true;
        on_path[next.0] = true;
        path.push(next);
        extend(succ, path, on_path, found);
        path.pop();
        on_path[next.0] = false;
    }
    if !extended {
        found.push(path.clone());
    }
}
