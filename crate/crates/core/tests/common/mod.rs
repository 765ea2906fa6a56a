//! Shared fixtures, generators and independent checkers for the
//! integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use thimac::dynamics::{BehaviorModel, Event, EventId, Region, Repeat};
use thimac::interop::{AdDocument, AdEdge, AdNode, AdPartition};
use thimac::model::{ActionId, ActionKind, Edge, EdgeKind, Mode, StaticModel, ThimacId};
use thimac::validate::{validate_static_with, RuleTable};
use thimac::{dsl, ModelBundle};

pub use rand::SeedableRng;
pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn corpus_text(name: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn load(name: &str) -> ModelBundle {
    dsl::parse_named(&corpus_text(name), name).unwrap_or_else(|e| panic!("{e}"))
}

pub fn load_ad(name: &str) -> AdDocument {
    AdDocument::from_json(&corpus_text(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub const CORPUS_TM: [&str; 6] = [
    "underpants.tm",
    "order.tm",
    "carservice.tm",
    "letter.tm",
    "brutus.tm",
    "order_simplified.tm",
];

pub fn names(bundle: &ModelBundle, events: &[EventId]) -> Vec<String> {
    events
        .iter()
        .map(|e| bundle.event_name(*e).to_owned())
        .collect()
}

/// Checks that `fired` lists each region action once, with the source of
/// every flow and trigger edge inside the region before its target.
pub fn check_firing_order(
    model: &StaticModel,
    region: &Region,
    fired: &[ActionId],
) -> Result<(), String> {
    let mut sorted = fired.to_vec();
    sorted.sort();
    if sorted != region.actions() {
        return Err(format!("fired {fired:?}, region is {:?}", region.actions()));
    }
    let pos = |a: ActionId| fired.iter().position(|x| *x == a);
    for e in &model.edges {
        if let (Some(s), Some(d)) = (pos(e.src), pos(e.dst)) {
            if s >= d {
                return Err(format!(
                    "{} fired before {}",
                    model.action_path(e.dst),
                    model.action_path(e.src)
                ));
            }
        }
    }
    Ok(())
}

/// Counts orderings of a loop-free behavior by testing every permutation.
pub fn permutation_count(behavior: &BehaviorModel) -> usize {
    let mut items: Vec<EventId> = behavior.events.clone();
    let mut count = 0;
    permute(&mut items, 0, behavior, &mut count);
    count
}

fn permute(items: &mut Vec<EventId>, k: usize, b: &BehaviorModel, count: &mut usize) {
    if k == items.len() {
        let pos = |e: EventId| items.iter().position(|x| *x == e).unwrap();
        if b.edges.iter().all(|e| pos(e.from) < pos(e.to)) {
            *count += 1;
        }
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, b, count);
        items.swap(k, i);
    }
}

/// Whether `seq` respects every behavior edge. Events firing equally often
/// are matched occurrence by occurrence; otherwise every firing of the
/// source precedes every firing of the target. A repeat edge requires the
/// i-th firing of its source before the (i+1)-th firing of its target.
pub fn respects_precedence(behavior: &BehaviorModel, seq: &[EventId]) -> bool {
    let at = |e: EventId| -> Vec<usize> { (0..seq.len()).filter(|&i| seq[i] == e).collect() };
    behavior.events.iter().all(|e| !at(*e).is_empty())
        && behavior.edges.iter().all(|e| {
            let (f, t) = (at(e.from), at(e.to));
            match e.repeat {
                Some(_) => f.iter().zip(t.iter().skip(1)).all(|(a, b)| a < b),
                None if f.len() == t.len() => f.iter().zip(&t).all(|(a, b)| a < b),
                None => f.last() < t.first(),
            }
        })
}

/// Id-independent description of a bundle: everything keyed by dotted
/// paths and event names, so bundles that differ only in arena order
/// compare equal.
pub fn summary(b: &ModelBundle) -> Vec<String> {
    let m = &b.model;
    let mut out = vec![format!("model {}", m.name)];
    for t in m.thimac_ids() {
        let members: Vec<String> = m
            .thimac(t)
            .members
            .iter()
            .map(|x| match x {
                thimac::model::Member::Thimac(c) => m.thimac(*c).name.clone(),
                thimac::model::Member::Action(a) => m.action(*a).name.clone(),
            })
            .collect();
        out.push(format!(
            "thimac {} [{}]",
            m.thimac_path(t),
            members.join(",")
        ));
    }
    for a in m.action_ids() {
        let node = m.action(a);
        out.push(format!(
            "action {} {:?} {:?}",
            m.action_path(a),
            node.kind,
            node.label
        ));
    }
    let mut edges: Vec<String> = m
        .edges
        .iter()
        .map(|e| {
            format!(
                "edge {} {} {:?} {:?}",
                m.action_path(e.src),
                m.action_path(e.dst),
                e.kind,
                e.marker
            )
        })
        .collect();
    edges.sort();
    out.extend(edges);
    out.sort();
    for e in &b.events {
        let mut region: Vec<String> = e
            .region
            .actions()
            .iter()
            .map(|a| m.action_path(*a))
            .collect();
        region.sort();
        out.push(format!(
            "event {} {:?} {:?} {:?}",
            e.name, e.label, e.time, region
        ));
    }
    for e in &b.behavior.edges {
        out.push(format!(
            "after {} {} {:?}",
            b.event_name(e.from),
            b.event_name(e.to),
            e.repeat
        ));
    }
    out
}

/// Number of linear extensions of the forward (non-repeat) edges, by
/// dynamic programming over subsets of already fired events.
pub fn extension_count(behavior: &BehaviorModel) -> u64 {
    let n = behavior.events.len();
    let mut preds = vec![0u32; n];
    for e in behavior.edges.iter().filter(|e| e.repeat.is_none()) {
        preds[e.to.0] |= 1 << e.from.0;
    }
    let mut ways = vec![0u64; 1 << n];
    ways[0] = 1;
    for set in 0..(1usize << n) {
        if ways[set] == 0 {
            continue;
        }
        for v in 0..n {
            if set & (1 << v) == 0 && preds[v] as usize & !set == 0 {
                ways[set | (1 << v)] += ways[set];
            }
        }
    }
    ways[(1 << n) - 1]
}

// ---- generators ----------------------------------------------------------

fn random_kind(r: &mut Rng8) -> ActionKind {
    *ActionKind::ALL.choose(r).unwrap()
}

fn thimac_forest(r: &mut Rng8, m: &mut StaticModel) -> Vec<ThimacId> {
    let mut ids = Vec::new();
    for i in 0..r.gen_range(1..=4) {
        ids.push(m.add_thimac(None, format!("T{i}")).unwrap());
    }
    for i in 0..r.gen_range(0..=3) {
        let parent = *ids.choose(r).unwrap();
        ids.push(m.add_thimac(Some(parent), format!("N{i}")).unwrap());
    }
    ids
}

/// A simplified-valid model with at most `max_actions` actions. Edges are
/// proposed at random and kept only if the model stays valid; triggers are
/// always of legal kinds.
pub fn simplified_model(r: &mut Rng8, max_actions: usize) -> StaticModel {
    let mut m = StaticModel::new("Gen").with_mode(Mode::Simplified);
    let thimacs = thimac_forest(r, &mut m);
    let n = r.gen_range(2..=max_actions);
    for i in 0..n {
        let owner = *thimacs.choose(r).unwrap();
        m.add_action(owner, random_kind(r), format!("a{i}"), None)
            .unwrap();
    }
    let table = RuleTable::simplified();
    for _ in 0..4 * n {
        let (s, d) = (ActionId(r.gen_range(0..n)), ActionId(r.gen_range(0..n)));
        if s == d {
            continue;
        }
        if r.gen_bool(0.2) {
            let (sk, dk) = (m.action(s).kind, m.action(d).kind);
            if matches!(sk, ActionKind::Process | ActionKind::Create) && dk == ActionKind::Create {
                m.add_edge(s, d, EdgeKind::Trigger).unwrap();
            }
            continue;
        }
        m.add_edge(s, d, EdgeKind::Flow).unwrap();
        if validate_static_with(&m, &table).has_errors() {
            m.edges.pop();
        }
    }
    m
}

const LABELS: [&str; 6] = [
    "order",
    "say \"hi\"",
    "back\\slash",
    "two\nlines",
    "ünïcødé",
    "",
];

/// Any constructible bundle: valid identifiers and referential integrity,
/// but no flow-grammar guarantees.
pub fn any_bundle(r: &mut Rng8) -> ModelBundle {
    let mut m = StaticModel::new(format!("M{}", r.gen_range(0..100)));
    let mut thimacs: Vec<ThimacId> = Vec::new();
    let mut counter = 0;
    // Interleave thimac and action declarations so member order is mixed.
    for _ in 0..r.gen_range(0..14) {
        counter += 1;
        if thimacs.is_empty() || r.gen_bool(0.3) {
            let parent = if thimacs.is_empty() || r.gen_bool(0.4) {
                None
            } else {
                Some(*thimacs.choose(r).unwrap())
            };
            thimacs.push(m.add_thimac(parent, format!("t{counter}")).unwrap());
        } else {
            let owner = *thimacs.choose(r).unwrap();
            let label = r.gen_bool(0.4).then(|| *LABELS.choose(r).unwrap());
            m.add_action(owner, random_kind(r), format!("a{counter}"), label)
                .unwrap();
        }
    }
    let n = m.actions.len();
    if n > 0 {
        for _ in 0..r.gen_range(0..2 * n) {
            m.edges.push(Edge {
                src: ActionId(r.gen_range(0..n)),
                dst: ActionId(r.gen_range(0..n)),
                kind: if r.gen_bool(0.7) {
                    EdgeKind::Flow
                } else {
                    EdgeKind::Trigger
                },
                marker: r.gen_bool(0.3).then(|| r.gen_range(0..50)),
            });
        }
    }
    let mut b = ModelBundle::new(m);
    if n > 0 {
        for i in 0..r.gen_range(0..6) {
            let size = r.gen_range(1..=n.min(4));
            let actions: Vec<ActionId> = (0..size).map(|_| ActionId(r.gen_range(0..n))).collect();
            b.add_event(Event {
                name: format!("E{}", i + 1),
                label: r
                    .gen_bool(0.5)
                    .then(|| LABELS.choose(r).unwrap().to_string()),
                region: Region::new(actions),
                time: r.gen_bool(0.3).then(|| format!("t+{i}")),
            });
        }
        let k = b.events.len();
        if k > 0 {
            for _ in 0..r.gen_range(0..2 * k) {
                let (f, t) = (EventId(r.gen_range(0..k)), EventId(r.gen_range(0..k)));
                match r.gen_range(0..4) {
                    0 => b.behavior.repeat(f, t, Repeat::Default),
                    1 => b.behavior.repeat(f, t, Repeat::AtMost(r.gen_range(1..9))),
                    _ => b.behavior.precede(f, t),
                };
            }
        }
    }
    b
}

/// A strict-valid bundle whose behavior is a random DAG over `n` events,
/// optionally with one bounded loop, small enough for the ordering oracle.
/// Each event covers a create, a process and sometimes a release, declared
/// in shuffled order.
pub fn dag_bundle(r: &mut Rng8, n: usize) -> ModelBundle {
    let mut m = StaticModel::new("Dag");
    let t = m.add_thimac(None, "T").unwrap();
    let mut plan: Vec<(usize, ActionKind)> = Vec::new();
    for i in 0..n {
        plan.push((i, ActionKind::Create));
        plan.push((i, ActionKind::Process));
        if r.gen_bool(0.5) {
            plan.push((i, ActionKind::Release));
        }
    }
    plan.shuffle(r);
    let mut ids = vec![Vec::new(); n];
    for (i, kind) in &plan {
        let a = m
            .add_action(t, *kind, format!("{}{i}", kind.keyword()), None)
            .unwrap();
        ids[*i].push((*kind, a));
    }
    let find =
        |v: &Vec<(ActionKind, ActionId)>, k: ActionKind| v.iter().find(|x| x.0 == k).map(|x| x.1);
    for v in &ids {
        let (c, p) = (
            find(v, ActionKind::Create).unwrap(),
            find(v, ActionKind::Process).unwrap(),
        );
        m.add_edge(c, p, EdgeKind::Flow).unwrap();
        if let Some(rel) = find(v, ActionKind::Release) {
            m.add_edge(p, rel, EdgeKind::Flow).unwrap();
        }
    }
    let mut b = ModelBundle::new(m);
    for (i, v) in ids.iter().enumerate() {
        b.add_event(Event {
            name: format!("E{}", i + 1),
            label: None,
            region: Region::new(v.iter().map(|x| x.1)),
            time: None,
        });
    }
    // Edges follow a random topological order so ids carry no ordering hint.
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(r);
    let mut p = r.gen_range(0.1..0.6);
    let mut reach;
    loop {
        b.behavior.edges.clear();
        reach = vec![vec![false; n]; n];
        for (i, row) in reach.iter_mut().enumerate() {
            row[i] = true;
        }
        for i in 0..n {
            for j in i + 1..n {
                if r.gen_bool(p) {
                    let (u, v) = (order[i], order[j]);
                    b.behavior.precede(EventId(u), EventId(v));
                    let below = reach[v].clone();
                    for row in reach.iter_mut().filter(|row| row[u]) {
                        for (cell, &b) in row.iter_mut().zip(&below) {
                            *cell |= b;
                        }
                    }
                }
            }
        }
        if extension_count(&b.behavior) <= 2000 {
            break;
        }
        p = (p + 0.1).min(1.0);
    }
    if n > 0 && r.gen_bool(0.4) {
        let head = r.gen_range(0..n);
        let candidates: Vec<usize> = (0..n).filter(|&x| reach[head][x]).collect();
        let tail = *candidates.choose(r).unwrap();
        let body = (0..n).filter(|&v| reach[head][v] && reach[v][tail]).count();
        let spare = (12 - n) / body;
        let k = 1 + r.gen_range(0..=spare.min(3)) as u32;
        b.behavior
            .repeat(EventId(tail), EventId(head), Repeat::AtMost(k));
    }
    b
}

const NODE_NAMES: [&str; 8] = [
    "Receive Order",
    "receive-order",
    "Ship!",
    "Pay invoice",
    "2nd check",
    "***",
    "Close",
    "close",
];
const OBJECTS: [Option<&str>; 5] = [
    Some("order"),
    Some("repair request"),
    Some(""),
    Some("42 things"),
    None,
];

/// A random activity document satisfying the importer's preconditions.
pub fn activity_doc(r: &mut Rng8) -> AdDocument {
    let mut doc = AdDocument::default();
    for i in 0..r.gen_range(0..=3) {
        doc.partitions.push(AdPartition {
            id: format!("p{i}"),
            name: ["Customer", "Car Service", "finance dept", "9 lives"][i].to_owned(),
        });
    }
    let n = r.gen_range(1..=7);
    for i in 0..n {
        let partition = if doc.partitions.is_empty() || r.gen_bool(0.2) {
            None
        } else {
            Some(format!("p{}", r.gen_range(0..doc.partitions.len())))
        };
        doc.nodes.push(AdNode {
            id: format!("n{i}"),
            name: NODE_NAMES.choose(r).unwrap().to_string(),
            kind: "action".to_owned(),
            partition,
        });
    }
    if r.gen_bool(0.7) {
        doc.nodes.push(AdNode {
            id: "init".into(),
            name: "init".into(),
            kind: "initial".into(),
            partition: None,
        });
        doc.edges.push(AdEdge {
            from: "init".into(),
            to: "n0".into(),
            kind: "control".into(),
            object_name: None,
        });
    }
    if r.gen_bool(0.7) {
        doc.nodes.push(AdNode {
            id: "fin".into(),
            name: "fin".into(),
            kind: "final".into(),
            partition: None,
        });
        doc.edges.push(AdEdge {
            from: format!("n{}", n - 1),
            to: "fin".into(),
            kind: "control".into(),
            object_name: None,
        });
    }
    for _ in 0..r.gen_range(0..2 * n) {
        let (a, c) = (r.gen_range(0..n), r.gen_range(0..n));
        let object = r.gen_bool(0.5);
        if (!object && a >= c) || a == c {
            continue;
        }
        doc.edges.push(AdEdge {
            from: format!("n{a}"),
            to: format!("n{c}"),
            kind: if object { "object" } else { "control" }.into(),
            object_name: if object {
                OBJECTS.choose(r).unwrap().map(str::to_owned)
            } else {
                None
            },
        });
    }
    doc
}
