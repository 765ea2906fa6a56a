//! Events (regions of the static model plus time) and behavior models (the
//! chronology of events).

mod behavior;

pub use behavior::{analyze_loops, validate_behavior, validate_behavior_with, LoopInfo};

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::model::{ActionId, Edge, Member, StaticModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventId(pub usize);

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A set of actions forming a subdiagram of the static model.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Region {
    actions: Vec<ActionId>,
}

impl Region {
    pub fn new(actions: impl IntoIterator<Item = ActionId>) -> Self {
        let set: BTreeSet<ActionId> = actions.into_iter().collect();
        Region {
            actions: set.into_iter().collect(),
        }
    }

    /// Member actions in ascending id order.
    pub fn actions(&self) -> &[ActionId] {
        &self.actions
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn contains(&self, id: ActionId) -> bool {
        self.actions.binary_search(&id).is_ok()
    }

    /// Static edges with both endpoints inside the region.
    pub fn induced_edges<'m>(&self, model: &'m StaticModel) -> Vec<&'m Edge> {
        model
            .edges
            .iter()
            .filter(|e| self.contains(e.src) && self.contains(e.dst))
            .collect()
    }

    /// Weakly connected components of the induced subgraph, each sorted,
    /// ordered by their smallest member.
    pub fn components(&self, model: &StaticModel) -> Vec<Vec<ActionId>> {
        let n = self.actions.len();
        let index = |a: ActionId| self.actions.binary_search(&a).ok();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in &model.edges {
            if let (Some(a), Some(b)) = (index(e.src), index(e.dst)) {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
        let mut groups: Vec<Vec<ActionId>> = Vec::new();
        let mut slot = vec![usize::MAX; n];
        for i in 0..n {
            let r = find(&mut parent, i);
            if slot[r] == usize::MAX {
                slot[r] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[r]].push(self.actions[i]);
        }
        groups
    }

    pub fn is_connected(&self, model: &StaticModel) -> bool {
        self.components(model).len() == 1
    }
}

/// A region plus an opaque time annotation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    /// Display name such as `E1`.
    pub name: String,
    pub label: Option<String>,
    pub region: Region,
    pub time: Option<String>,
}

/// How many times a loop body runs when its back-edge is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Repeat {
    /// Bound supplied by the simulator configuration.
    Default,
    AtMost(u32),
}

impl Repeat {
    pub fn resolve(self, default_bound: u32) -> u32 {
        match self {
            Repeat::Default => default_bound,
            Repeat::AtMost(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BehaviorEdge {
    pub from: EventId,
    pub to: EventId,
    /// Present on loop back-edges only.
    pub repeat: Option<Repeat>,
}

/// The chronology of events: precedence edges plus bounded back-edges.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BehaviorModel {
    pub events: Vec<EventId>,
    pub edges: Vec<BehaviorEdge>,
}

impl BehaviorModel {
    /// A behavior over events `0..count` with no edges.
    pub fn over(count: usize) -> Self {
        BehaviorModel {
            events: (0..count).map(EventId).collect(),
            edges: Vec::new(),
        }
    }

    pub fn precede(&mut self, from: EventId, to: EventId) -> &mut Self {
        self.edges.push(BehaviorEdge {
            from,
            to,
            repeat: None,
        });
        self
    }

    pub fn repeat(&mut self, from: EventId, to: EventId, repeat: Repeat) -> &mut Self {
        self.edges.push(BehaviorEdge {
            from,
            to,
            repeat: Some(repeat),
        });
        self
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DynamicsError {
    #[error("undefined reference `{0}`")]
    Undef(String),
    #[error("region of event `{event}` is not connected: {}", render_components(.components))]
    RegionDisconnected {
        event: String,
        components: Vec<Vec<String>>,
    },
}

impl DynamicsError {
    pub fn code(&self) -> &'static str {
        match self {
            DynamicsError::Undef(_) => "UNDEF",
            DynamicsError::RegionDisconnected { .. } => "REGION_DISCONNECTED",
        }
    }
}

fn render_components(components: &[Vec<String>]) -> String {
    if components.is_empty() {
        return "no actions".to_owned();
    }
    components
        .iter()
        .map(|c| format!("{{{}}}", c.join(", ")))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Resolves region paths: an action path names that action, a thimac path
/// names every action inside the thimac (nested thimacs included).
pub fn resolve_region(model: &StaticModel, paths: &[&str]) -> Result<Region, DynamicsError> {
    let mut actions = Vec::new();
    for path in paths {
        match model.resolve(path) {
            Some(Member::Action(a)) => actions.push(a),
            Some(Member::Thimac(t)) => actions.extend(model.subtree_actions(t)),
            None => return Err(DynamicsError::Undef((*path).to_owned())),
        }
    }
    Ok(Region::new(actions))
}

/// Builds an event from region paths and checks that the region is a single
/// connected subdiagram.
pub fn define_event(
    model: &StaticModel,
    name: &str,
    paths: &[&str],
) -> Result<Event, DynamicsError> {
    define_event_with(model, name, paths, false)
}

pub fn define_event_with(
    model: &StaticModel,
    name: &str,
    paths: &[&str],
    allow_disconnected: bool,
) -> Result<Event, DynamicsError> {
    let region = resolve_region(model, paths)?;
    if !allow_disconnected || region.is_empty() {
        let components = region.components(model);
        if components.len() != 1 {
            return Err(DynamicsError::RegionDisconnected {
                event: name.to_owned(),
                components: components
                    .iter()
                    .map(|c| c.iter().map(|a| model.action_path(*a)).collect())
                    .collect(),
            });
        }
    }
    Ok(Event {
        name: name.to_owned(),
        label: None,
        region,
        time: None,
    })
}
