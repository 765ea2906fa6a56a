//! Deterministic execution of behavior models.
//!
//! Events are scheduled with a token game over the behavior graph. An event
//! is enabled once every predecessor has deposited a token on the connecting
//! edge; inside a bounded loop the head is re-enabled by the back-edge and
//! exit edges only carry a token after the last iteration. One enabled event
//! fires per step, the earliest declared first.

mod orderings;

pub use orderings::{enumerate_orderings, enumerate_orderings_with, OracleError, MAX_UNROLLED};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bundle::ModelBundle;
use crate::dynamics::{analyze_loops, validate_behavior_with, EventId, Region};
use crate::model::{ActionId, StaticModel};
use crate::report::ValidationReport;
use crate::validate::{validate_static_with, CheckOptions, RuleTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    #[default]
    DeclarationOrder,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimConfig {
    pub max_steps: usize,
    /// Bound for `[repeat]` edges that carry no explicit number.
    pub default_loop_bound: u32,
    pub tie_break: TieBreak,
    pub checks: CheckOptions,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            max_steps: 10_000,
            default_loop_bound: 1,
            tie_break: TieBreak::DeclarationOrder,
            checks: CheckOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub step: usize,
    pub event: EventId,
    /// The event's time annotation, copied verbatim.
    pub time: Option<String>,
    /// Region actions in firing order.
    pub actions: Vec<ActionId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
}

impl Trace {
    pub fn events(&self) -> Vec<EventId> {
        self.steps.iter().map(|s| s.event).collect()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// One line per step: `step<TAB>event<TAB>action,action,...`.
    pub fn to_text(&self, bundle: &ModelBundle) -> String {
        let mut out = String::new();
        for s in &self.steps {
            let actions: Vec<String> = s
                .actions
                .iter()
                .map(|a| bundle.model.action_path(*a))
                .collect();
            out.push_str(&format!(
                "{}\t{}\t{}\n",
                s.step,
                bundle.event_name(s.event),
                actions.join(",")
            ));
        }
        out
    }

    pub fn to_json(&self, bundle: &ModelBundle) -> String {
        let doc = TraceDoc {
            version: 1,
            steps: self
                .steps
                .iter()
                .map(|s| StepDoc {
                    step: s.step,
                    event: bundle.event_name(s.event).to_owned(),
                    time: s.time.clone(),
                    actions: s
                        .actions
                        .iter()
                        .map(|a| bundle.model.action_path(*a))
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("trace serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct TraceDoc {
    version: u32,
    steps: Vec<StepDoc>,
}

#[derive(Serialize, Deserialize)]
struct StepDoc {
    step: usize,
    event: String,
    time: Option<String>,
    actions: Vec<String>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("step budget of {max_steps} exhausted")]
    Budget { max_steps: usize, partial: Trace },
    #[error("bundle is not simulatable:\n{0}")]
    InvalidInput(ValidationReport),
    #[error("region of event `{0}` contains a cycle and has no firing order")]
    CyclicRegion(String),
}

impl SimError {
    pub fn code(&self) -> &'static str {
        match self {
            SimError::Budget { .. } => "BUDGET",
            SimError::InvalidInput(_) | SimError::CyclicRegion(_) => "INVALID_INPUT",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum EdgeRole {
    /// Both ends in the same loop body: carries a token every iteration.
    Internal,
    /// Anything else: carries one token, after the source's last firing.
    Cross,
    /// A loop's bounded back-edge.
    Back,
}

pub fn simulate(bundle: &ModelBundle, config: &SimConfig) -> Result<Trace, SimError> {
    let table = RuleTable::strict().with_options(config.checks);
    let mut report = validate_static_with(&bundle.model, &table);
    if !report.has_errors() {
        report.extend(validate_behavior_with(
            &bundle.behavior,
            &bundle.events,
            &bundle.model,
            config.checks,
        ));
    }
    if report.has_errors() {
        report.sort();
        return Err(SimError::InvalidInput(report));
    }
    let loops = analyze_loops(&bundle.behavior, &bundle.events).map_err(SimError::InvalidInput)?;

    let n = bundle.events.len();
    let mut orders = vec![Vec::new(); n];
    for id in &bundle.behavior.events {
        let ev = &bundle.events[id.0];
        orders[id.0] = firing_order(&bundle.model, &ev.region)
            .ok_or_else(|| SimError::CyclicRegion(ev.name.clone()))?;
    }

    let mut body_of: Vec<Option<usize>> = vec![None; n];
    let mut cap = vec![1u32; n];
    for (i, l) in loops.iter().enumerate() {
        let k = l.repeat.resolve(config.default_loop_bound).max(1);
        for v in &l.body {
            body_of[v.0] = Some(i);
            cap[v.0] = k;
        }
    }
    let edges = &bundle.behavior.edges;
    let roles: Vec<EdgeRole> = edges
        .iter()
        .map(|e| match e.repeat {
            Some(_) => EdgeRole::Back,
            None if body_of[e.from.0].is_some() && body_of[e.from.0] == body_of[e.to.0] => {
                EdgeRole::Internal
            }
            None => EdgeRole::Cross,
        })
        .collect();
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, e) in edges.iter().enumerate() {
        incoming[e.to.0].push(i);
        outgoing[e.from.0].push(i);
    }

    let mut schedule: Vec<EventId> = bundle.behavior.events.clone();
    schedule.sort();
    schedule.dedup();

    let mut tokens = vec![0u32; edges.len()];
    let mut count = vec![0u32; n];
    let required = |v: usize, e: usize, count: &[u32]| match roles[e] {
        EdgeRole::Internal => true,
        EdgeRole::Cross => count[v] == 0,
        EdgeRole::Back => count[v] > 0,
    };
    let enabled = |v: usize, tokens: &[u32], count: &[u32]| {
        count[v] < cap[v]
            && incoming[v]
                .iter()
                .all(|&e| !required(v, e, count) || tokens[e] > 0)
    };

    let mut trace = Trace::default();
    loop {
        let next = match config.tie_break {
            TieBreak::DeclarationOrder => schedule
                .iter()
                .copied()
                .find(|v| enabled(v.0, &tokens, &count)),
        };
        let Some(v) = next else { break };
        if trace.steps.len() >= config.max_steps {
            return Err(SimError::Budget {
                max_steps: config.max_steps,
                partial: trace,
            });
        }
        let u = v.0;
        for &e in &incoming[u] {
            if required(u, e, &count) {
                tokens[e] -= 1;
            }
        }
        count[u] += 1;
        for &e in &outgoing[u] {
            let deposit = match roles[e] {
                EdgeRole::Internal => true,
                EdgeRole::Cross => count[u] == cap[u],
                EdgeRole::Back => count[u] < cap[u],
            };
            if deposit {
                tokens[e] += 1;
            }
        }
        let ev = &bundle.events[u];
        trace.steps.push(TraceStep {
            step: trace.steps.len(),
            event: v,
            time: ev.time.clone(),
            actions: orders[u].clone(),
        });
    }
    Ok(trace)
}

/// Topological order of a region over its induced flow and trigger edges,
/// lowest action id first among ready actions. `None` if the region is
/// cyclic.
pub fn firing_order(model: &StaticModel, region: &Region) -> Option<Vec<ActionId>> {
    let members = region.actions();
    let index = |a: ActionId| members.binary_search(&a).ok();
    let mut indeg = vec![0usize; members.len()];
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); members.len()];
    for e in region.induced_edges(model) {
        let (s, d) = (index(e.src)?, index(e.dst)?);
        succ[s].push(d);
        indeg[d] += 1;
    }
    let mut ready: std::collections::BTreeSet<usize> =
        (0..members.len()).filter(|&i| indeg[i] == 0).collect();
    let mut order = Vec::with_capacity(members.len());
    while let Some(i) = ready.pop_first() {
        order.push(members[i]);
        for &d in &succ[i] {
            indeg[d] -= 1;
            if indeg[d] == 0 {
                ready.insert(d);
            }
        }
    }
    (order.len() == members.len()).then_some(order)
}
