//! JSON interchange, schema version 1.
//!
//! Thimacs and actions are identified by their dotted paths, events by name.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::bundle::ModelBundle;
use crate::dynamics::{BehaviorEdge, Event, EventId, Region, Repeat};
use crate::model::{
    ActionId, ActionKind, ActionNode, Edge, EdgeKind, Member, Mode, StaticModel, Thimac, ThimacId,
};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JsonError {
    #[error("unsupported schema version {found} (expected {SCHEMA_VERSION})")]
    Version { found: String },
    #[error("schema violation at `{pointer}`: {message}")]
    Schema { pointer: String, message: String },
}

impl JsonError {
    pub fn code(&self) -> &'static str {
        match self {
            JsonError::Version { .. } => "VERSION",
            JsonError::Schema { .. } => "SCHEMA",
        }
    }
}

fn schema(pointer: impl Into<String>, message: impl Into<String>) -> JsonError {
    JsonError::Schema {
        pointer: pointer.into(),
        message: message.into(),
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Doc {
    version: u64,
    #[serde(default = "default_name")]
    name: String,
    #[serde(default)]
    mode: Mode,
    #[serde(default)]
    thimacs: Vec<ThimacDoc>,
    #[serde(default)]
    actions: Vec<ActionDoc>,
    #[serde(default)]
    edges: Vec<EdgeDoc>,
    #[serde(default)]
    events: Vec<EventDoc>,
    #[serde(default)]
    behavior: Vec<BehaviorDoc>,
}

fn default_name() -> String {
    "Model".to_owned()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ThimacDoc {
    id: String,
    name: String,
    parent: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    members: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionDoc {
    id: String,
    name: String,
    kind: ActionKind,
    owner: String,
    #[serde(default)]
    label: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    src: String,
    dst: String,
    kind: EdgeKind,
    #[serde(default)]
    marker: Option<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventDoc {
    id: String,
    #[serde(default)]
    label: Option<String>,
    region: Vec<String>,
    #[serde(default)]
    time: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BehaviorDoc {
    from: String,
    to: String,
    #[serde(default)]
    repeat: Option<RepeatDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RepeatDoc {
    Bound(u32),
    Keyword(String),
}

pub fn export_json(bundle: &ModelBundle) -> String {
    let m = &bundle.model;
    let member_id = |mem: &Member| match *mem {
        Member::Thimac(t) => m.thimac_path(t),
        Member::Action(a) => m.action_path(a),
    };
    let doc = Doc {
        version: SCHEMA_VERSION,
        name: m.name.clone(),
        mode: m.mode,
        thimacs: m
            .thimac_ids()
            .map(|t| {
                let th = m.thimac(t);
                ThimacDoc {
                    id: m.thimac_path(t),
                    name: th.name.clone(),
                    parent: th.parent.map(|p| m.thimac_path(p)),
                    members: Some(th.members.iter().map(member_id).collect()),
                }
            })
            .collect(),
        actions: m
            .action_ids()
            .map(|a| {
                let node = m.action(a);
                ActionDoc {
                    id: m.action_path(a),
                    name: node.name.clone(),
                    kind: node.kind,
                    owner: m.thimac_path(node.owner),
                    label: node.label.clone(),
                }
            })
            .collect(),
        edges: m
            .edges
            .iter()
            .map(|e| EdgeDoc {
                src: m.action_path(e.src),
                dst: m.action_path(e.dst),
                kind: e.kind,
                marker: e.marker,
            })
            .collect(),
        events: bundle
            .events
            .iter()
            .map(|ev| EventDoc {
                id: ev.name.clone(),
                label: ev.label.clone(),
                region: ev
                    .region
                    .actions()
                    .iter()
                    .map(|a| m.action_path(*a))
                    .collect(),
                time: ev.time.clone(),
            })
            .collect(),
        behavior: bundle
            .behavior
            .edges
            .iter()
            .map(|e| BehaviorDoc {
                from: bundle.event_name(e.from).to_owned(),
                to: bundle.event_name(e.to).to_owned(),
                repeat: e.repeat.map(|r| match r {
                    Repeat::Default => RepeatDoc::Keyword("default".to_owned()),
                    Repeat::AtMost(n) => RepeatDoc::Bound(n),
                }),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("document serializes");
    text.push('\n');
    text
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn import_json(text: &str) -> Result<ModelBundle, JsonError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| schema("", format!("malformed JSON: {e}")))?;
    match value.get("version") {
        None => return Err(schema("/version", "missing field `version`")),
        Some(Value::Number(n)) if n.as_u64() == Some(SCHEMA_VERSION) => {}
        Some(other) => {
            return Err(JsonError::Version {
                found: other.to_string(),
            })
        }
    }
    let doc: Doc = serde_path_to_error::deserialize(value).map_err(|e| {
        let pointer = pointer_of(e.path());
        schema(pointer, e.into_inner().to_string())
    })?;
    build(doc)
}

/// Renders a serde path as a JSON pointer (`/actions/3/kind`).
fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } | Segment::Enum { variant: key } => {
                out.push_str(&key.replace('~', "~0").replace('/', "~1"))
            }
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

fn build(doc: Doc) -> Result<ModelBundle, JsonError> {
    let mut model = StaticModel::new(doc.name).with_mode(doc.mode);

    let mut thimac_ids: HashMap<&str, ThimacId> = HashMap::new();
    for (i, t) in doc.thimacs.iter().enumerate() {
        if !is_ident(&t.name) {
            return Err(schema(format!("/thimacs/{i}/name"), "not an identifier"));
        }
        if thimac_ids.insert(&t.id, ThimacId(i)).is_some() {
            return Err(schema(format!("/thimacs/{i}/id"), "duplicate id"));
        }
    }
    for (i, t) in doc.thimacs.iter().enumerate() {
        let parent = match &t.parent {
            None => None,
            Some(p) => Some(
                *thimac_ids
                    .get(p.as_str())
                    .ok_or_else(|| schema(format!("/thimacs/{i}/parent"), "unknown thimac id"))?,
            ),
        };
        model.thimacs.push(Thimac {
            name: t.name.clone(),
            parent,
            members: Vec::new(),
        });
    }
    for i in 0..model.thimacs.len() {
        let mut cur = model.thimacs[i].parent;
        let mut hops = 0;
        while let Some(p) = cur {
            hops += 1;
            if hops > model.thimacs.len() {
                return Err(schema(format!("/thimacs/{i}/parent"), "containment cycle"));
            }
            cur = model.thimacs[p.0].parent;
        }
    }

    let mut action_ids: HashMap<&str, ActionId> = HashMap::new();
    for (i, a) in doc.actions.iter().enumerate() {
        if !is_ident(&a.name) {
            return Err(schema(format!("/actions/{i}/name"), "not an identifier"));
        }
        if thimac_ids.contains_key(a.id.as_str()) || action_ids.insert(&a.id, ActionId(i)).is_some()
        {
            return Err(schema(format!("/actions/{i}/id"), "duplicate id"));
        }
        let owner = *thimac_ids
            .get(a.owner.as_str())
            .ok_or_else(|| schema(format!("/actions/{i}/owner"), "unknown thimac id"))?;
        model.actions.push(ActionNode {
            name: a.name.clone(),
            kind: a.kind,
            owner,
            label: a.label.clone(),
        });
    }

    for (i, t) in doc.thimacs.iter().enumerate() {
        let id = ThimacId(i);
        let expected: Vec<Member> = model
            .action_ids()
            .filter(|a| model.action(*a).owner == id)
            .map(Member::Action)
            .chain(
                model
                    .thimac_ids()
                    .filter(|c| model.thimac(*c).parent == Some(id))
                    .map(Member::Thimac),
            )
            .collect();
        let members = match &t.members {
            None => expected,
            Some(list) => {
                let mut members = Vec::with_capacity(list.len());
                for (j, m) in list.iter().enumerate() {
                    let at = || format!("/thimacs/{i}/members/{j}");
                    let mem = if let Some(a) = action_ids.get(m.as_str()) {
                        Member::Action(*a)
                    } else if let Some(c) = thimac_ids.get(m.as_str()) {
                        Member::Thimac(*c)
                    } else {
                        return Err(schema(at(), "unknown id"));
                    };
                    if !expected.contains(&mem) || members.contains(&mem) {
                        return Err(schema(at(), "member does not belong to this thimac"));
                    }
                    members.push(mem);
                }
                if members.len() != expected.len() {
                    return Err(schema(
                        format!("/thimacs/{i}/members"),
                        "members list is incomplete",
                    ));
                }
                members
            }
        };
        model.thimacs[i].members = members;
    }

    let mut scopes: HashMap<(Option<ThimacId>, &str), ()> = HashMap::new();
    for (i, t) in model.thimacs.iter().enumerate() {
        if scopes.insert((t.parent, t.name.as_str()), ()).is_some() {
            return Err(schema(
                format!("/thimacs/{i}/name"),
                "duplicate name in scope",
            ));
        }
    }
    for (i, a) in model.actions.iter().enumerate() {
        if scopes
            .insert((Some(a.owner), a.name.as_str()), ())
            .is_some()
        {
            return Err(schema(
                format!("/actions/{i}/name"),
                "duplicate name in scope",
            ));
        }
    }

    for (i, e) in doc.edges.iter().enumerate() {
        let end = |id: &str, field: &str| {
            action_ids
                .get(id)
                .copied()
                .ok_or_else(|| schema(format!("/edges/{i}/{field}"), "unknown action id"))
        };
        model.edges.push(Edge {
            src: end(&e.src, "src")?,
            dst: end(&e.dst, "dst")?,
            kind: e.kind,
            marker: e.marker,
        });
    }

    let mut bundle = ModelBundle::new(model);
    let mut event_ids: HashMap<&str, EventId> = HashMap::new();
    for (i, ev) in doc.events.iter().enumerate() {
        if !is_ident(&ev.id) {
            return Err(schema(format!("/events/{i}/id"), "not an identifier"));
        }
        if event_ids.insert(&ev.id, EventId(i)).is_some() {
            return Err(schema(format!("/events/{i}/id"), "duplicate id"));
        }
        let mut actions = Vec::new();
        for (j, r) in ev.region.iter().enumerate() {
            if let Some(a) = action_ids.get(r.as_str()) {
                actions.push(*a);
            } else if let Some(t) = thimac_ids.get(r.as_str()) {
                actions.extend(bundle.model.subtree_actions(*t));
            } else {
                return Err(schema(format!("/events/{i}/region/{j}"), "unknown id"));
            }
        }
        if actions.is_empty() {
            return Err(schema(format!("/events/{i}/region"), "region is empty"));
        }
        bundle.add_event(Event {
            name: ev.id.clone(),
            label: ev.label.clone(),
            region: Region::new(actions),
            time: ev.time.clone(),
        });
    }
    for (i, b) in doc.behavior.iter().enumerate() {
        let end = |id: &str, field: &str| {
            event_ids
                .get(id)
                .copied()
                .ok_or_else(|| schema(format!("/behavior/{i}/{field}"), "unknown event id"))
        };
        let repeat = match &b.repeat {
            None => None,
            Some(RepeatDoc::Keyword(k)) if k == "default" => Some(Repeat::Default),
            Some(RepeatDoc::Bound(n)) if *n >= 1 => Some(Repeat::AtMost(*n)),
            Some(_) => {
                return Err(schema(
                    format!("/behavior/{i}/repeat"),
                    "expected null, \"default\" or a positive integer",
                ))
            }
        };
        bundle.behavior.edges.push(BehaviorEdge {
            from: end(&b.from, "from")?,
            to: end(&b.to, "to")?,
            repeat,
        });
    }
    Ok(bundle)
}
