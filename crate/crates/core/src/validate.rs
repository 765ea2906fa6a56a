//! Flow-grammar validation of static models.
//!
//! The grammar lives in [`RuleTable`]: a versioned list of enabled rules and
//! their severities plus the adjacency tables the rules consult. Relaxing a
//! rule is a table edit, not a code change.

use std::collections::{HashMap, VecDeque};

use crate::model::{ActionId, ActionKind, Member, Mode, StaticModel, ThimacId};
use crate::report::{Rule, Severity, ValidationReport};

use ActionKind::*;

/// Allowed flow adjacency between two actions of the same thimac.
pub const INTRA_FLOW: &[(ActionKind, ActionKind)] = &[
    (Transfer, Receive),
    (Receive, Process),
    (Receive, Release),
    (Create, Process),
    (Create, Release),
    (Process, Release),
    (Release, Transfer),
];

/// Allowed flow adjacency across a thimac boundary.
pub const CROSS_FLOW: &[(ActionKind, ActionKind)] = &[(Transfer, Transfer)];

pub const TRIGGER_SOURCES: &[ActionKind] = &[Process, Create];
pub const TRIGGER_TARGETS: &[ActionKind] = &[Create];

/// Kinds that may start a boundary flow the normalizer can gate: the
/// inserted release must be a legal successor.
pub const GATE_SOURCES: &[ActionKind] = &[Create, Process, Receive];
/// Kinds that may end a gated boundary flow: legal successors of receive.
pub const GATE_TARGETS: &[ActionKind] = &[Process, Release];

/// Switches shared by the validators and the simulator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CheckOptions {
    /// Downgrade trigger-kind violations (V4) to warnings.
    pub relaxed_triggers: bool,
    /// Downgrade disconnected event regions to warnings.
    pub allow_disconnected_regions: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleTable {
    pub version: u32,
    pub mode: Mode,
    rules: Vec<(Rule, Severity)>,
}

impl RuleTable {
    pub const VERSION: u32 = 1;

    pub fn strict() -> Self {
        RuleTable {
            version: Self::VERSION,
            mode: Mode::Strict,
            rules: vec![
                (Rule::SelfEdge, Severity::Error),
                (Rule::V1, Severity::Error),
                (Rule::V2, Severity::Error),
                (Rule::V3, Severity::Error),
                (Rule::V4, Severity::Error),
                (Rule::V5, Severity::Warning),
            ],
        }
    }

    pub fn simplified() -> Self {
        RuleTable {
            version: Self::VERSION,
            mode: Mode::Simplified,
            rules: vec![
                (Rule::SelfEdge, Severity::Error),
                (Rule::S1, Severity::Error),
                (Rule::V3, Severity::Error),
                (Rule::V4, Severity::Warning),
            ],
        }
    }

    pub fn for_mode(mode: Mode) -> Self {
        match mode {
            Mode::Strict => Self::strict(),
            Mode::Simplified => Self::simplified(),
        }
    }

    pub fn with_options(mut self, options: CheckOptions) -> Self {
        if options.relaxed_triggers {
            self.set(Rule::V4, Some(Severity::Warning));
        }
        self
    }

    pub fn severity(&self, rule: Rule) -> Option<Severity> {
        self.rules.iter().find(|(r, _)| *r == rule).map(|(_, s)| *s)
    }

    /// Enables, re-grades (`Some`) or disables (`None`) a rule.
    pub fn set(&mut self, rule: Rule, severity: Option<Severity>) {
        self.rules.retain(|(r, _)| *r != rule);
        if let Some(s) = severity {
            self.rules.push((rule, s));
        }
    }

    pub fn rules(&self) -> impl Iterator<Item = (Rule, Severity)> + '_ {
        self.rules.iter().copied()
    }
}

/// Validates a model against the rule table of its declared mode.
pub fn validate_static(model: &StaticModel) -> ValidationReport {
    validate_static_with(model, &RuleTable::for_mode(model.mode))
}

pub fn validate_static_with(model: &StaticModel, table: &RuleTable) -> ValidationReport {
    let mut report = check_integrity(model);
    if report.has_errors() {
        return report;
    }
    for (rule, severity) in table.rules() {
        match rule {
            Rule::SelfEdge => check_self_edges(model, severity, &mut report),
            Rule::V1 => check_cross_flows(model, severity, &mut report),
            Rule::V2 => check_intra_flows(model, severity, &mut report),
            Rule::V3 => check_fan(model, severity, &mut report),
            Rule::V4 => check_triggers(model, severity, &mut report),
            Rule::V5 => check_reachability(model, severity, &mut report),
            Rule::S1 => check_gateable(model, severity, &mut report),
            _ => {}
        }
    }
    report
}

/// True when the model has no errors under the strict table (with options).
pub fn is_strict_valid(model: &StaticModel, options: CheckOptions) -> bool {
    !validate_static_with(model, &RuleTable::strict().with_options(options)).has_errors()
}

pub(crate) fn edge_location(model: &StaticModel, src: ActionId, dst: ActionId) -> String {
    format!("{} -> {}", model.action_path(src), model.action_path(dst))
}

/// Referential integrity, containment shape and identifier uniqueness.
pub(crate) fn check_integrity(model: &StaticModel) -> ValidationReport {
    let mut report = ValidationReport::new();
    let n_thimacs = model.thimacs.len();
    let n_actions = model.actions.len();
    let dangling = |report: &mut ValidationReport, loc: String, msg: String| {
        report.push(Rule::Dangling, Severity::Error, loc, msg)
    };

    let mut listed_thimac = vec![0usize; n_thimacs];
    let mut listed_action = vec![0usize; n_actions];
    for (i, th) in model.thimacs.iter().enumerate() {
        let here = model.thimac_path(ThimacId(i));
        if let Some(p) = th.parent {
            if p.0 >= n_thimacs {
                dangling(
                    &mut report,
                    here.clone(),
                    format!("parent thimac #{} does not exist", p.0),
                );
            }
        }
        for m in &th.members {
            match *m {
                Member::Thimac(c) if c.0 >= n_thimacs => dangling(
                    &mut report,
                    here.clone(),
                    format!("member thimac #{} does not exist", c.0),
                ),
                Member::Thimac(c) => {
                    listed_thimac[c.0] += 1;
                    if model.thimacs[c.0].parent != Some(ThimacId(i)) {
                        dangling(
                            &mut report,
                            here.clone(),
                            format!("lists `{}` whose parent is elsewhere", model.thimac_path(c)),
                        );
                    }
                }
                Member::Action(a) if a.0 >= n_actions => dangling(
                    &mut report,
                    here.clone(),
                    format!("member action #{} does not exist", a.0),
                ),
                Member::Action(a) => {
                    listed_action[a.0] += 1;
                    if model.actions[a.0].owner != ThimacId(i) {
                        dangling(
                            &mut report,
                            here.clone(),
                            format!("lists `{}` owned elsewhere", model.action_path(a)),
                        );
                    }
                }
            }
        }
    }
    for (i, th) in model.thimacs.iter().enumerate() {
        if th.parent.is_some_and(|p| p.0 < n_thimacs) && listed_thimac[i] != 1 {
            let rule = if listed_thimac[i] > 1 {
                Rule::DupId
            } else {
                Rule::Dangling
            };
            report.push(
                rule,
                Severity::Error,
                model.thimac_path(ThimacId(i)),
                format!("listed {} times by its parent", listed_thimac[i]),
            );
        }
    }
    for (i, a) in model.actions.iter().enumerate() {
        let here = model.action_path(ActionId(i));
        if a.owner.0 >= n_thimacs {
            dangling(
                &mut report,
                here,
                format!("owner thimac #{} does not exist", a.owner.0),
            );
        } else if listed_action[i] != 1 {
            let rule = if listed_action[i] > 1 {
                Rule::DupId
            } else {
                Rule::Dangling
            };
            report.push(
                rule,
                Severity::Error,
                here,
                format!("listed {} times by its owner", listed_action[i]),
            );
        }
    }
    for e in &model.edges {
        for end in [e.src, e.dst] {
            if end.0 >= n_actions {
                let loc = format!("{} edge", e.kind.keyword());
                dangling(
                    &mut report,
                    loc,
                    format!("endpoint action #{} does not exist", end.0),
                );
            }
        }
    }
    if report.has_errors() {
        return report;
    }

    // Containment must be a forest: walking parents never revisits.
    for i in 0..n_thimacs {
        let mut steps = 0;
        let mut cur = model.thimacs[i].parent;
        while let Some(p) = cur {
            steps += 1;
            if p.0 == i || steps > n_thimacs {
                report.push(
                    Rule::Forest,
                    Severity::Error,
                    model.thimacs[i].name.clone(),
                    "thimac containment has a cycle",
                );
                break;
            }
            cur = model.thimacs[p.0].parent;
        }
    }
    if report.has_errors() {
        return report;
    }

    let check_scope = |report: &mut ValidationReport, names: Vec<(&str, String)>| {
        let mut seen: HashMap<&str, usize> = HashMap::new();
        for (name, path) in names {
            let count = seen.entry(name).or_default();
            *count += 1;
            if *count == 2 {
                report.push(
                    Rule::DupId,
                    Severity::Error,
                    path,
                    "identifier declared more than once",
                );
            }
        }
    };
    let roots: Vec<(&str, String)> = model
        .roots()
        .map(|t| (model.thimacs[t.0].name.as_str(), model.thimac_path(t)))
        .collect();
    check_scope(&mut report, roots);
    for th in &model.thimacs {
        let names = th
            .members
            .iter()
            .map(|m| match *m {
                Member::Thimac(c) => (model.thimacs[c.0].name.as_str(), model.thimac_path(c)),
                Member::Action(a) => (model.actions[a.0].name.as_str(), model.action_path(a)),
            })
            .collect();
        check_scope(&mut report, names);
    }
    report
}

fn check_self_edges(model: &StaticModel, severity: Severity, report: &mut ValidationReport) {
    for e in &model.edges {
        if e.src == e.dst {
            report.push(
                Rule::SelfEdge,
                severity,
                edge_location(model, e.src, e.dst),
                format!(
                    "{} edge loops on itself; repetition belongs in the behavior model",
                    e.kind.keyword()
                ),
            );
        }
    }
}

fn same_owner(model: &StaticModel, a: ActionId, b: ActionId) -> bool {
    model.action(a).owner == model.action(b).owner
}

fn kinds(model: &StaticModel, a: ActionId, b: ActionId) -> (ActionKind, ActionKind) {
    (model.action(a).kind, model.action(b).kind)
}

/// Strict legality of a single flow edge.
pub fn flow_is_strict(model: &StaticModel, src: ActionId, dst: ActionId) -> bool {
    let pair = kinds(model, src, dst);
    if same_owner(model, src, dst) {
        INTRA_FLOW.contains(&pair)
    } else {
        CROSS_FLOW.contains(&pair)
    }
}

/// A boundary flow the normalizer can replace by a gate chain.
pub fn flow_is_gateable(model: &StaticModel, src: ActionId, dst: ActionId) -> bool {
    let (s, d) = kinds(model, src, dst);
    !same_owner(model, src, dst) && GATE_SOURCES.contains(&s) && GATE_TARGETS.contains(&d)
}

fn check_cross_flows(model: &StaticModel, severity: Severity, report: &mut ValidationReport) {
    for e in model.flow_edges() {
        if e.src == e.dst || same_owner(model, e.src, e.dst) {
            continue;
        }
        let (s, d) = kinds(model, e.src, e.dst);
        if !CROSS_FLOW.contains(&(s, d)) {
            report.push(
                Rule::V1,
                severity,
                edge_location(model, e.src, e.dst),
                format!("flow across thimacs must be transfer -> transfer, found {s} -> {d}"),
            );
        }
    }
}

fn check_intra_flows(model: &StaticModel, severity: Severity, report: &mut ValidationReport) {
    for e in model.flow_edges() {
        if e.src == e.dst || !same_owner(model, e.src, e.dst) {
            continue;
        }
        let (s, d) = kinds(model, e.src, e.dst);
        if !INTRA_FLOW.contains(&(s, d)) {
            report.push(
                Rule::V2,
                severity,
                edge_location(model, e.src, e.dst),
                format!("flow {s} -> {d} is not allowed inside a thimac"),
            );
        }
    }
}

fn check_fan(model: &StaticModel, severity: Severity, report: &mut ValidationReport) {
    let mut out = vec![0usize; model.actions.len()];
    let mut inc = vec![0usize; model.actions.len()];
    for e in model.flow_edges() {
        out[e.src.0] += 1;
        inc[e.dst.0] += 1;
    }
    for id in model.action_ids() {
        match model.action(id).kind {
            Release if out[id.0] > 1 => report.push(
                Rule::V3,
                severity,
                model.action_path(id),
                format!("release has {} outgoing flows (at most 1)", out[id.0]),
            ),
            Receive if inc[id.0] > 1 => report.push(
                Rule::V3,
                severity,
                model.action_path(id),
                format!("receive has {} incoming flows (at most 1)", inc[id.0]),
            ),
            _ => {}
        }
    }
}

fn check_triggers(model: &StaticModel, severity: Severity, report: &mut ValidationReport) {
    for e in model.trigger_edges() {
        let (s, d) = kinds(model, e.src, e.dst);
        if !TRIGGER_SOURCES.contains(&s) || !TRIGGER_TARGETS.contains(&d) {
            report.push(
                Rule::V4,
                severity,
                edge_location(model, e.src, e.dst),
                format!(
                    "trigger {s} -> {d}: source must be process or create, target must be create"
                ),
            );
        }
    }
}

fn check_reachability(model: &StaticModel, severity: Severity, report: &mut ValidationReport) {
    let n = model.actions.len();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut has_in = vec![false; n];
    for e in model.flow_edges() {
        succ[e.src.0].push(e.dst.0);
        has_in[e.dst.0] = true;
    }
    let mut seen = vec![false; n];
    let mut queue: VecDeque<usize> = model
        .action_ids()
        .filter(|a| match model.action(*a).kind {
            Create => true,
            Transfer => !has_in[a.0],
            _ => false,
        })
        .map(|a| a.0)
        .collect();
    for &q in &queue {
        seen[q] = true;
    }
    while let Some(u) = queue.pop_front() {
        for &v in &succ[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    for id in model.action_ids() {
        if !seen[id.0] && model.action(id).kind != Create {
            report.push(
                Rule::V5,
                severity,
                model.action_path(id),
                "not flow-reachable from any create or boundary transfer",
            );
        }
    }
}

fn check_gateable(model: &StaticModel, severity: Severity, report: &mut ValidationReport) {
    for e in model.flow_edges() {
        if e.src == e.dst {
            continue;
        }
        if !flow_is_strict(model, e.src, e.dst) && !flow_is_gateable(model, e.src, e.dst) {
            let (s, d) = kinds(model, e.src, e.dst);
            let why = if same_owner(model, e.src, e.dst) {
                "is not allowed inside a thimac"
            } else {
                "crosses a boundary but cannot be gated (needs create/process/receive -> process/release)"
            };
            report.push(
                Rule::S1,
                severity,
                edge_location(model, e.src, e.dst),
                format!("flow {s} -> {d} {why}"),
            );
        }
    }
}
