//! Activity-diagram import.
//!
//! Each partition becomes a top-level thimac and each action node a process
//! with its own event. Object edges become thing flows through the usual
//! gates; control edges become behavior edges.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bundle::ModelBundle;
use crate::dynamics::{Event, EventId, Region};
use crate::model::{ActionId, ActionKind, EdgeKind, StaticModel, ThimacId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdPartition {
    pub id: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdNode {
    pub id: String,
    pub name: String,
    /// `action`, `initial` or `final`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdEdge {
    pub from: String,
    pub to: String,
    /// `control` or `object`.
    pub kind: String,
    #[serde(
        rename = "objectName",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub object_name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdDocument {
    #[serde(default)]
    pub partitions: Vec<AdPartition>,
    #[serde(default)]
    pub nodes: Vec<AdNode>,
    #[serde(default)]
    pub edges: Vec<AdEdge>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ActivityError {
    #[error("schema violation at `{pointer}`: {message}")]
    Schema { pointer: String, message: String },
    #[error("undefined reference `{0}`")]
    Undef(String),
    #[error("duplicate id `{0}`")]
    DupId(String),
    #[error("more than one initial node: {0:?}")]
    MultiInitial(Vec<String>),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl ActivityError {
    pub fn code(&self) -> &'static str {
        match self {
            ActivityError::Schema { .. } => "SCHEMA",
            ActivityError::Undef(_) => "UNDEF",
            ActivityError::DupId(_) => "DUPID",
            ActivityError::MultiInitial(_) => "MULTI_INITIAL",
            ActivityError::Unsupported(_) => "UNSUPPORTED",
        }
    }
}

impl AdDocument {
    pub fn from_json(text: &str) -> Result<Self, ActivityError> {
        let mut de = serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(&mut de).map_err(|e| ActivityError::Schema {
            pointer: e.path().iter().map(|s| format!("/{s}")).collect::<String>(),
            message: e.into_inner().to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum NodeKind {
    Action,
    Initial,
    Final,
}

fn words(s: &str) -> Vec<String> {
    s.split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_owned)
        .collect()
}

/// `"Car Service"` becomes `CarService`.
pub fn camel_name(s: &str, fallback: &str) -> String {
    let mut out: String = words(s)
        .iter()
        .map(|w| {
            let mut c = w.chars();
            let first = c.next().unwrap().to_ascii_uppercase();
            std::iter::once(first).chain(c).collect::<String>()
        })
        .collect();
    if out.is_empty() {
        out = fallback.to_owned();
    }
    if out.starts_with(|c: char| c.is_ascii_digit()) {
        out.insert(0, '_');
    }
    out
}

/// `"Receive Order"` becomes `receive_order`.
pub fn snake_name(s: &str, fallback: &str) -> String {
    let mut out = words(s)
        .iter()
        .map(|w| w.to_ascii_lowercase())
        .collect::<Vec<_>>()
        .join("_");
    if out.is_empty() {
        out = fallback.to_owned();
    }
    if out.starts_with(|c: char| c.is_ascii_digit()) {
        out.insert(0, '_');
    }
    out
}

fn unique(base: String, taken: &mut HashSet<String>) -> String {
    let mut name = base.clone();
    let mut n = 2;
    while taken.contains(&name) {
        name = format!("{base}{n}");
        n += 1;
    }
    taken.insert(name.clone());
    name
}

pub fn import_activity(doc: &AdDocument) -> Result<ModelBundle, ActivityError> {
    let mut partitions: HashMap<&str, usize> = HashMap::new();
    for (i, p) in doc.partitions.iter().enumerate() {
        if partitions.insert(&p.id, i).is_some() {
            return Err(ActivityError::DupId(p.id.clone()));
        }
    }
    let mut nodes: HashMap<&str, usize> = HashMap::new();
    let mut kinds = Vec::with_capacity(doc.nodes.len());
    for (i, n) in doc.nodes.iter().enumerate() {
        if nodes.insert(&n.id, i).is_some() {
            return Err(ActivityError::DupId(n.id.clone()));
        }
        kinds.push(match n.kind.as_str() {
            "action" => NodeKind::Action,
            "initial" => NodeKind::Initial,
            "final" => NodeKind::Final,
            other => {
                return Err(ActivityError::Unsupported(format!(
                    "node `{}` has kind `{other}`",
                    n.id
                )))
            }
        });
        if let Some(p) = &n.partition {
            if !partitions.contains_key(p.as_str()) {
                return Err(ActivityError::Undef(p.clone()));
            }
        }
    }
    let initials: Vec<String> = doc
        .nodes
        .iter()
        .zip(&kinds)
        .filter(|(_, k)| **k == NodeKind::Initial)
        .map(|(n, _)| n.id.clone())
        .collect();
    if initials.len() > 1 {
        return Err(ActivityError::MultiInitial(initials));
    }
    let mut ends = Vec::with_capacity(doc.edges.len());
    for e in &doc.edges {
        let from = *nodes
            .get(e.from.as_str())
            .ok_or_else(|| ActivityError::Undef(e.from.clone()))?;
        let to = *nodes
            .get(e.to.as_str())
            .ok_or_else(|| ActivityError::Undef(e.to.clone()))?;
        match e.kind.as_str() {
            "control" => {}
            "object" => {
                if kinds[from] != NodeKind::Action || kinds[to] != NodeKind::Action {
                    return Err(ActivityError::Unsupported(format!(
                        "object edge `{}` -> `{}` must connect two actions",
                        e.from, e.to
                    )));
                }
                if from == to {
                    return Err(ActivityError::Unsupported(format!(
                        "object edge `{}` -> `{}` loops back to its source",
                        e.from, e.to
                    )));
                }
            }
            other => return Err(ActivityError::Unsupported(format!("edge kind `{other}`"))),
        }
        ends.push((from, to));
    }

    let mut model = StaticModel::new("Activity");
    let mut top_names = HashSet::new();
    let mut scope_names: HashMap<ThimacId, HashSet<String>> = HashMap::new();
    let mut thimac_of_partition = Vec::with_capacity(doc.partitions.len());
    for p in &doc.partitions {
        let name = unique(camel_name(&p.name, "Partition"), &mut top_names);
        let t = model.add_thimac(None, name).expect("unique top-level name");
        scope_names.insert(t, HashSet::new());
        thimac_of_partition.push(t);
    }
    let mut unassigned = None;
    let mut process = vec![None; doc.nodes.len()];
    let mut owner = vec![ThimacId(0); doc.nodes.len()];
    for (i, n) in doc.nodes.iter().enumerate() {
        if kinds[i] != NodeKind::Action {
            continue;
        }
        let t = match &n.partition {
            Some(p) => thimac_of_partition[partitions[p.as_str()]],
            None => *unassigned.get_or_insert_with(|| {
                let name = unique("Unassigned".to_owned(), &mut top_names);
                let t = model.add_thimac(None, name).expect("unique top-level name");
                scope_names.insert(t, HashSet::new());
                t
            }),
        };
        let name = unique(
            snake_name(&n.name, "action"),
            scope_names.get_mut(&t).unwrap(),
        );
        let a = model
            .add_action(t, ActionKind::Process, name, Some(&n.name))
            .expect("unique action name");
        process[i] = Some(a);
        owner[i] = t;
    }

    // Chain actions attached to each node's event region.
    let mut attached: Vec<Vec<ActionId>> = vec![Vec::new(); doc.nodes.len()];
    let mut object_no = 0;
    for (e, &(from, to)) in doc.edges.iter().zip(&ends) {
        if e.kind != "object" {
            continue;
        }
        object_no += 1;
        let thing = e.object_name.clone().unwrap_or_else(|| "thing".to_owned());
        let base = format!("{}_{object_no}", snake_name(&thing, "thing"));
        let (src_t, dst_t) = (owner[from], owner[to]);
        let (p_src, p_dst) = (process[from].unwrap(), process[to].unwrap());
        let mut add = |model: &mut StaticModel, t: ThimacId, kind: ActionKind, role: &str| {
            let name = unique(format!("{base}_{role}"), scope_names.get_mut(&t).unwrap());
            model
                .add_action(t, kind, name, Some(&thing))
                .expect("unique action name")
        };
        let originates =
            !doc.edges.iter().zip(&ends).any(|(o, &(_, t))| {
                t == from && o.kind == "object" && o.object_name == e.object_name
            });

        let mut src_side = Vec::new();
        let release = if originates {
            let create = add(&mut model, src_t, ActionKind::Create, "create");
            let release = add(&mut model, src_t, ActionKind::Release, "release");
            link(&mut model, p_src, create, EdgeKind::Trigger);
            link(&mut model, create, release, EdgeKind::Flow);
            src_side.extend([create, release]);
            release
        } else {
            let release = add(&mut model, src_t, ActionKind::Release, "release");
            link(&mut model, p_src, release, EdgeKind::Flow);
            src_side.push(release);
            release
        };
        let out = add(&mut model, src_t, ActionKind::Transfer, "out");
        link(&mut model, release, out, EdgeKind::Flow);
        src_side.push(out);

        let mut dst_side = Vec::new();
        let arrival = if src_t == dst_t {
            out
        } else {
            let inp = add(&mut model, dst_t, ActionKind::Transfer, "in");
            link(&mut model, out, inp, EdgeKind::Flow);
            dst_side.push(inp);
            inp
        };
        let receive = add(&mut model, dst_t, ActionKind::Receive, "receive");
        link(&mut model, arrival, receive, EdgeKind::Flow);
        link(&mut model, receive, p_dst, EdgeKind::Flow);
        dst_side.push(receive);

        attached[from].extend(src_side);
        attached[to].extend(dst_side);
    }

    let mut bundle = ModelBundle::new(model);
    let mut event_of = vec![None; doc.nodes.len()];
    for (i, n) in doc.nodes.iter().enumerate() {
        let Some(p) = process[i] else { continue };
        let id = bundle.add_event(Event {
            name: format!("E{}", bundle.events.len() + 1),
            label: Some(n.name.clone()),
            region: Region::new(std::iter::once(p).chain(attached[i].iter().copied())),
            time: None,
        });
        event_of[i] = Some(id);
    }
    for (e, &(from, to)) in doc.edges.iter().zip(&ends) {
        if e.kind != "control" {
            continue;
        }
        if let (Some(a), Some(b)) = (event_of[from], event_of[to]) {
            bundle.behavior.precede(a, b);
        }
    }
    Ok(bundle)
}

fn link(model: &mut StaticModel, src: ActionId, dst: ActionId, kind: EdgeKind) {
    model
        .add_edge(src, dst, kind)
        .expect("distinct existing actions");
}

/// The event generated for the action node named `name`, if any.
pub fn event_for_node(bundle: &ModelBundle, name: &str) -> Option<EventId> {
    bundle
        .events
        .iter()
        .position(|e| e.label.as_deref() == Some(name))
        .map(EventId)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate::validate_static;

    fn node(id: &str, kind: &str, partition: Option<&str>) -> AdNode {
        AdNode {
            id: id.into(),
            name: id.into(),
            kind: kind.into(),
            partition: partition.map(Into::into),
        }
    }

    fn edge(from: &str, to: &str, kind: &str, object: Option<&str>) -> AdEdge {
        AdEdge {
            from: from.into(),
            to: to.into(),
            kind: kind.into(),
            object_name: object.map(Into::into),
        }
    }

    #[test]
    fn single_action() {
        let doc = AdDocument {
            nodes: vec![node("Do it", "action", None)],
            ..Default::default()
        };
        let b = import_activity(&doc).unwrap();
        assert_eq!(b.model.thimacs.len(), 1);
        assert_eq!(b.model.thimacs[0].name, "Unassigned");
        assert_eq!(b.model.actions.len(), 1);
        assert_eq!(b.model.actions[0].kind, ActionKind::Process);
        assert_eq!(b.model.actions[0].name, "do_it");
        assert_eq!(b.events.len(), 1);
        assert!(b.behavior.edges.is_empty());
    }

    #[test]
    fn cross_partition_object_flow_is_gated() {
        let doc = AdDocument {
            partitions: vec![
                AdPartition {
                    id: "p".into(),
                    name: "Sales desk".into(),
                },
                AdPartition {
                    id: "q".into(),
                    name: "Stock".into(),
                },
            ],
            nodes: vec![
                node("i", "initial", None),
                node("Take", "action", Some("p")),
                node("Pick", "action", Some("q")),
                node("f", "final", None),
            ],
            edges: vec![
                edge("i", "Take", "control", None),
                edge("Take", "Pick", "control", None),
                edge("Take", "Pick", "object", Some("order")),
                edge("Pick", "f", "control", None),
            ],
        };
        let b = import_activity(&doc).unwrap();
        let r = validate_static(&b.model);
        assert!(!r.has_errors(), "{r}");
        assert_eq!(b.model.thimacs[0].name, "SalesDesk");
        let paths: Vec<String> = b
            .model
            .action_ids()
            .map(|a| b.model.action_path(a))
            .collect();
        assert_eq!(
            paths,
            [
                "SalesDesk.take",
                "Stock.pick",
                "SalesDesk.order_1_create",
                "SalesDesk.order_1_release",
                "SalesDesk.order_1_out",
                "Stock.order_1_in",
                "Stock.order_1_receive",
            ]
        );
        assert_eq!(b.events[0].region.len(), 4);
        assert_eq!(b.events[1].region.len(), 3);
        assert!(b.events.iter().all(|e| e.region.is_connected(&b.model)));
        assert_eq!(b.behavior.edges.len(), 1);
    }

    #[test]
    fn forwarded_objects_are_not_recreated() {
        let doc = AdDocument {
            nodes: vec![
                node("a", "action", None),
                node("b", "action", None),
                node("c", "action", None),
            ],
            edges: vec![
                edge("a", "b", "object", Some("x")),
                edge("b", "c", "object", Some("x")),
            ],
            ..Default::default()
        };
        let b = import_activity(&doc).unwrap();
        let creates = b
            .model
            .actions
            .iter()
            .filter(|a| a.kind == ActionKind::Create)
            .count();
        assert_eq!(creates, 1);
        assert!(!validate_static(&b.model).has_errors());
    }

    #[test]
    fn errors() {
        let two_initials = AdDocument {
            nodes: vec![node("a", "initial", None), node("b", "initial", None)],
            ..Default::default()
        };
        assert_eq!(
            import_activity(&two_initials).unwrap_err().code(),
            "MULTI_INITIAL"
        );
        let fork = AdDocument {
            nodes: vec![node("a", "fork", None)],
            ..Default::default()
        };
        assert_eq!(import_activity(&fork).unwrap_err().code(), "UNSUPPORTED");
        let dangling = AdDocument {
            nodes: vec![node("a", "action", None)],
            edges: vec![edge("a", "zz", "control", None)],
            ..Default::default()
        };
        assert_eq!(import_activity(&dangling).unwrap_err().code(), "UNDEF");
        let bad_partition = AdDocument {
            nodes: vec![node("a", "action", Some("nowhere"))],
            ..Default::default()
        };
        assert_eq!(import_activity(&bad_partition).unwrap_err().code(), "UNDEF");
        assert_eq!(
            AdDocument::from_json("{\"nodes\": 3}").unwrap_err().code(),
            "SCHEMA"
        );
    }

    #[test]
    fn names_are_sanitized() {
        assert_eq!(camel_name("car service", "X"), "CarService");
        assert_eq!(snake_name("Pick up vehicle!", "x"), "pick_up_vehicle");
        assert_eq!(snake_name("3 lanes", "x"), "_3_lanes");
        assert_eq!(snake_name("***", "thing"), "thing");
    }
}
