//! Static thinging-machine models: thimacs, their action nodes, and the flow
//! and trigger edges between actions.
//!
//! Thimacs and actions live in arenas indexed by [`ThimacId`] and
//! [`ActionId`]. Each also has a dotted path (`CarService.Scheduler.p1`) that
//! mirrors containment and is unique model-wide, because sibling names share a
//! single namespace per scope.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The five generic actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionKind {
    Create,
    Process,
    Release,
    Transfer,
    /// Arrival and acceptance folded into one stage.
    Receive,
}

impl ActionKind {
    pub const ALL: [ActionKind; 5] = [
        ActionKind::Create,
        ActionKind::Process,
        ActionKind::Release,
        ActionKind::Transfer,
        ActionKind::Receive,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            ActionKind::Create => "create",
            ActionKind::Process => "process",
            ActionKind::Release => "release",
            ActionKind::Transfer => "transfer",
            ActionKind::Receive => "receive",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        ActionKind::ALL.into_iter().find(|k| k.keyword() == word)
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ThimacId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    /// Movement of a thing (solid arrow).
    Flow,
    /// Non-sequential initiation of another flow (dashed arrow).
    Trigger,
}

impl EdgeKind {
    pub fn keyword(self) -> &'static str {
        match self {
            EdgeKind::Flow => "flow",
            EdgeKind::Trigger => "trigger",
        }
    }
}

/// Which rule table a model is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Full formalism: every thing crosses a thimac boundary through
    /// release/transfer/transfer/receive gates.
    #[default]
    Strict,
    /// Gate actions may be omitted; arrow direction implies the flow.
    Simplified,
}

/// An entry in a thimac's body, kept in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Member {
    Thimac(ThimacId),
    Action(ActionId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Thimac {
    pub name: String,
    pub parent: Option<ThimacId>,
    pub members: Vec<Member>,
}

impl Thimac {
    pub fn children(&self) -> impl Iterator<Item = ThimacId> + '_ {
        self.members.iter().filter_map(|m| match m {
            Member::Thimac(t) => Some(*t),
            Member::Action(_) => None,
        })
    }

    pub fn actions(&self) -> impl Iterator<Item = ActionId> + '_ {
        self.members.iter().filter_map(|m| match m {
            Member::Action(a) => Some(*a),
            Member::Thimac(_) => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionNode {
    pub name: String,
    pub kind: ActionKind,
    pub owner: ThimacId,
    /// The thing or annotation the action handles.
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub src: ActionId,
    pub dst: ActionId,
    pub kind: EdgeKind,
    /// Numbered annotation carried from diagrams; metadata only.
    pub marker: Option<u32>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("duplicate identifier `{0}`")]
    DupId(String),
    #[error("dangling reference: {0}")]
    Dangling(String),
    #[error("self-edge on `{0}`")]
    SelfEdge(String),
}

/// The static description: a forest of thimacs whose actions are linked by
/// flow and trigger edges.
///
/// Fields are public so tools can build arbitrary (even broken) models;
/// [`crate::validate::validate_static`] reports what is wrong with them. The
/// `add_*` builders keep a model referentially intact.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StaticModel {
    pub name: String,
    pub mode: Mode,
    pub thimacs: Vec<Thimac>,
    pub actions: Vec<ActionNode>,
    pub edges: Vec<Edge>,
}

impl StaticModel {
    pub fn new(name: impl Into<String>) -> Self {
        StaticModel {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn thimac(&self, id: ThimacId) -> &Thimac {
        &self.thimacs[id.0]
    }

    pub fn action(&self, id: ActionId) -> &ActionNode {
        &self.actions[id.0]
    }

    pub fn action_ids(&self) -> impl Iterator<Item = ActionId> {
        (0..self.actions.len()).map(ActionId)
    }

    pub fn thimac_ids(&self) -> impl Iterator<Item = ThimacId> {
        (0..self.thimacs.len()).map(ThimacId)
    }

    /// Top-level thimacs in declaration order.
    pub fn roots(&self) -> impl Iterator<Item = ThimacId> + '_ {
        self.thimac_ids()
            .filter(|t| self.thimacs[t.0].parent.is_none())
    }

    pub fn add_thimac(
        &mut self,
        parent: Option<ThimacId>,
        name: impl Into<String>,
    ) -> Result<ThimacId, ModelError> {
        let name = name.into();
        if let Some(p) = parent {
            if p.0 >= self.thimacs.len() {
                return Err(ModelError::Dangling(format!("parent thimac #{}", p.0)));
            }
        }
        if self.scope_has(parent, &name) {
            return Err(ModelError::DupId(self.join(parent, &name)));
        }
        let id = ThimacId(self.thimacs.len());
        self.thimacs.push(Thimac {
            name,
            parent,
            members: Vec::new(),
        });
        if let Some(p) = parent {
            self.thimacs[p.0].members.push(Member::Thimac(id));
        }
        Ok(id)
    }

    pub fn add_action(
        &mut self,
        owner: ThimacId,
        kind: ActionKind,
        name: impl Into<String>,
        label: Option<&str>,
    ) -> Result<ActionId, ModelError> {
        let name = name.into();
        if owner.0 >= self.thimacs.len() {
            return Err(ModelError::Dangling(format!("owner thimac #{}", owner.0)));
        }
        if self.scope_has(Some(owner), &name) {
            return Err(ModelError::DupId(self.join(Some(owner), &name)));
        }
        let id = ActionId(self.actions.len());
        self.actions.push(ActionNode {
            name,
            kind,
            owner,
            label: label.map(str::to_owned),
        });
        self.thimacs[owner.0].members.push(Member::Action(id));
        Ok(id)
    }

    pub fn add_edge(
        &mut self,
        src: ActionId,
        dst: ActionId,
        kind: EdgeKind,
    ) -> Result<(), ModelError> {
        self.add_marked_edge(src, dst, kind, None)
    }

    pub fn add_marked_edge(
        &mut self,
        src: ActionId,
        dst: ActionId,
        kind: EdgeKind,
        marker: Option<u32>,
    ) -> Result<(), ModelError> {
        for end in [src, dst] {
            if end.0 >= self.actions.len() {
                return Err(ModelError::Dangling(format!("action #{}", end.0)));
            }
        }
        if src == dst {
            return Err(ModelError::SelfEdge(self.action_path(src)));
        }
        self.edges.push(Edge {
            src,
            dst,
            kind,
            marker,
        });
        Ok(())
    }

    /// Flow/trigger helper keyed by dotted paths; panics on unknown paths.
    /// Intended for building fixtures in code.
    pub fn connect(&mut self, kind: EdgeKind, src: &str, dst: &str) {
        let s = self
            .resolve_action(src)
            .unwrap_or_else(|| panic!("unknown action `{src}`"));
        let d = self
            .resolve_action(dst)
            .unwrap_or_else(|| panic!("unknown action `{dst}`"));
        self.add_edge(s, d, kind).expect("valid edge");
    }

    fn scope_has(&self, parent: Option<ThimacId>, name: &str) -> bool {
        match parent {
            None => self.roots().any(|t| self.thimacs[t.0].name == name),
            Some(p) => self.thimacs[p.0].members.iter().any(|m| match m {
                Member::Thimac(t) => self.thimacs.get(t.0).is_some_and(|x| x.name == name),
                Member::Action(a) => self.actions.get(a.0).is_some_and(|x| x.name == name),
            }),
        }
    }

    fn join(&self, parent: Option<ThimacId>, name: &str) -> String {
        match parent {
            None => name.to_owned(),
            Some(p) => format!("{}.{}", self.thimac_path(p), name),
        }
    }

    /// Dotted path of a thimac. Tolerates broken containment so that
    /// diagnostics can be rendered for invalid models.
    pub fn thimac_path(&self, id: ThimacId) -> String {
        let mut parts = Vec::new();
        let mut cur = Some(id);
        while let Some(t) = cur {
            let Some(th) = self.thimacs.get(t.0) else {
                parts.push(format!("<thimac #{}>", t.0));
                break;
            };
            parts.push(th.name.clone());
            if parts.len() > self.thimacs.len() {
                parts.push("<cycle>".to_owned());
                break;
            }
            cur = th.parent;
        }
        parts.reverse();
        parts.join(".")
    }

    pub fn action_path(&self, id: ActionId) -> String {
        match self.actions.get(id.0) {
            Some(a) => format!("{}.{}", self.thimac_path(a.owner), a.name),
            None => format!("<action #{}>", id.0),
        }
    }

    /// Resolves a dotted path to a thimac or an action.
    pub fn resolve(&self, path: &str) -> Option<Member> {
        let mut segments = path.split('.');
        let first = segments.next()?;
        let mut cur = self.roots().find(|t| self.thimacs[t.0].name == first)?;
        let rest: Vec<&str> = segments.collect();
        for (i, seg) in rest.iter().enumerate() {
            let found = self.thimacs[cur.0].members.iter().find(|m| match m {
                Member::Thimac(t) => self.thimacs[t.0].name == *seg,
                Member::Action(a) => self.actions[a.0].name == *seg,
            })?;
            match *found {
                Member::Thimac(t) => cur = t,
                Member::Action(a) => {
                    return (i + 1 == rest.len()).then_some(Member::Action(a));
                }
            }
        }
        Some(Member::Thimac(cur))
    }

    pub fn resolve_action(&self, path: &str) -> Option<ActionId> {
        match self.resolve(path)? {
            Member::Action(a) => Some(a),
            Member::Thimac(_) => None,
        }
    }

    /// All actions contained in a thimac, including those of nested thimacs,
    /// in depth-first member order.
    pub fn subtree_actions(&self, id: ThimacId) -> Vec<ActionId> {
        let mut out = Vec::new();
        self.walk_actions(id, &mut out, &mut vec![false; self.thimacs.len()]);
        out
    }

    fn walk_actions(&self, id: ThimacId, out: &mut Vec<ActionId>, seen: &mut Vec<bool>) {
        if seen[id.0] {
            return;
        }
        seen[id.0] = true;
        for m in &self.thimacs[id.0].members {
            match *m {
                Member::Action(a) => out.push(a),
                Member::Thimac(c) => self.walk_actions(c, out, seen),
            }
        }
    }

    pub fn flow_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.kind == EdgeKind::Flow)
    }

    pub fn trigger_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.kind == EdgeKind::Trigger)
    }
}
