//! Re-inserts the gate actions that simplified diagrams leave out.
//!
//! A boundary flow `A -> B` between thimacs becomes
//! `A -> release -> transfer(out) -> transfer(in) -> receive -> B`, with the
//! release and outgoing transfer placed in `A`'s thimac and the incoming pair
//! in `B`'s.

use thiserror::Error;

use crate::model::{ActionId, ActionKind, Edge, EdgeKind, Member, Mode, StaticModel, ThimacId};
use crate::report::ValidationReport;
use crate::validate::{flow_is_strict, validate_static_with, RuleTable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NormalizeError {
    #[error("input is not a valid simplified model:\n{0}")]
    InvalidInput(ValidationReport),
}

impl NormalizeError {
    pub fn code(&self) -> &'static str {
        "INVALID_INPUT"
    }
}

/// Converts a simplified-valid model into a strict one. Strict input comes
/// back unchanged.
pub fn normalize(model: &StaticModel) -> Result<StaticModel, NormalizeError> {
    let report = validate_static_with(model, &RuleTable::simplified());
    if report.has_errors() {
        return Err(NormalizeError::InvalidInput(report));
    }

    let mut out = model.clone();
    out.mode = Mode::Strict;
    let mut edges = Vec::with_capacity(model.edges.len());
    for e in &model.edges {
        let needs_gates = e.kind == EdgeKind::Flow
            && model.action(e.src).owner != model.action(e.dst).owner
            && !flow_is_strict(model, e.src, e.dst);
        if needs_gates {
            edges.extend(gate_chain(&mut out, e));
        } else {
            edges.push(e.clone());
        }
    }
    out.edges = edges;
    Ok(out)
}

fn gate_chain(model: &mut StaticModel, e: &Edge) -> [Edge; 5] {
    let src = model.action(e.src).clone();
    let dst = model.action(e.dst).clone();
    let base = format!("{}_{}", src.name, dst.name);
    let thing = src.label.clone().unwrap_or_else(|| src.name.clone());

    let release = fresh_action(
        model,
        src.owner,
        ActionKind::Release,
        &base,
        "release",
        &thing,
    );
    let out = fresh_action(model, src.owner, ActionKind::Transfer, &base, "out", &thing);
    let inp = fresh_action(model, dst.owner, ActionKind::Transfer, &base, "in", &thing);
    let receive = fresh_action(
        model,
        dst.owner,
        ActionKind::Receive,
        &base,
        "receive",
        &thing,
    );

    let flow = |src, dst, marker| Edge {
        src,
        dst,
        kind: EdgeKind::Flow,
        marker,
    };
    [
        flow(e.src, release, None),
        flow(release, out, None),
        flow(out, inp, e.marker),
        flow(inp, receive, None),
        flow(receive, e.dst, None),
    ]
}

fn fresh_action(
    model: &mut StaticModel,
    owner: ThimacId,
    kind: ActionKind,
    base: &str,
    role: &str,
    thing: &str,
) -> ActionId {
    let taken = |m: &StaticModel, name: &str| {
        m.thimac(owner).members.iter().any(|mem| match *mem {
            Member::Action(a) => m.action(a).name == name,
            Member::Thimac(t) => m.thimac(t).name == name,
        })
    };
    let mut name = format!("{base}_{role}");
    let mut n = 2;
    while taken(model, &name) {
        name = format!("{base}_{role}{n}");
        n += 1;
    }
    let label = format!("{thing} ({role})");
    model
        .add_action(owner, kind, name, Some(&label))
        .expect("fresh name in an existing thimac")
}
