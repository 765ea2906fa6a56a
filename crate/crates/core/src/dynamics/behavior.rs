use std::collections::{BTreeSet, HashMap, VecDeque};

use super::{BehaviorModel, Event, EventId, Repeat};
use crate::model::StaticModel;
use crate::report::{Rule, Severity, ValidationReport};
use crate::validate::CheckOptions;

/// A bounded loop: the back-edge `tail -> head` and every event on a
/// precedence path from `head` to `tail`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopInfo {
    pub tail: EventId,
    pub head: EventId,
    pub repeat: Repeat,
    pub body: BTreeSet<EventId>,
}

pub fn validate_behavior(
    behavior: &BehaviorModel,
    events: &[Event],
    model: &StaticModel,
) -> ValidationReport {
    validate_behavior_with(behavior, events, model, CheckOptions::default())
}

/// Checks references, loop boundedness, reachability and region coverage.
/// The report is sorted canonically, so edge declaration order does not
/// affect it.
pub fn validate_behavior_with(
    behavior: &BehaviorModel,
    events: &[Event],
    model: &StaticModel,
    options: CheckOptions,
) -> ValidationReport {
    let mut report = ValidationReport::new();
    let name = |id: EventId| {
        events
            .get(id.0)
            .map(|e| e.name.clone())
            .unwrap_or_else(|| format!("<event {id}>"))
    };

    let mut seen_names: HashMap<&str, usize> = HashMap::new();
    for e in events {
        let n = seen_names.entry(e.name.as_str()).or_default();
        *n += 1;
        if *n == 2 {
            report.push(
                Rule::DupId,
                Severity::Error,
                &e.name,
                "event declared more than once",
            );
        }
    }

    for e in events {
        if let Some(bad) = e
            .region
            .actions()
            .iter()
            .find(|a| a.0 >= model.actions.len())
        {
            report.push(
                Rule::Undef,
                Severity::Error,
                &e.name,
                format!("region references missing action #{}", bad.0),
            );
            continue;
        }
        let components = e.region.components(model);
        if components.len() != 1 {
            let severity = if options.allow_disconnected_regions && !components.is_empty() {
                Severity::Warning
            } else {
                Severity::Error
            };
            let rendered: Vec<String> = components
                .iter()
                .map(|c| {
                    let paths: Vec<String> = c.iter().map(|a| model.action_path(*a)).collect();
                    format!("{{{}}}", paths.join(", "))
                })
                .collect();
            let msg = if rendered.is_empty() {
                "region is empty".to_owned()
            } else {
                format!(
                    "region has {} components: {}",
                    rendered.len(),
                    rendered.join(" ")
                )
            };
            report.push(Rule::RegionDisconnected, severity, &e.name, msg);
        }
    }

    let declared: BTreeSet<EventId> = behavior.events.iter().copied().collect();
    let mut graph_ok = true;
    for id in &behavior.events {
        if id.0 >= events.len() {
            report.push(
                Rule::Undef,
                Severity::Error,
                name(*id),
                "behavior names an undeclared event",
            );
            graph_ok = false;
        }
    }
    for edge in &behavior.edges {
        for end in [edge.from, edge.to] {
            if !declared.contains(&end) || end.0 >= events.len() {
                report.push(
                    Rule::Undef,
                    Severity::Error,
                    format!("{} -> {}", name(edge.from), name(edge.to)),
                    format!("edge endpoint {} is not a declared event", name(end)),
                );
                graph_ok = false;
            }
        }
    }

    if graph_ok {
        if let Err(loop_report) = analyze_loops(behavior, events) {
            report.extend(loop_report);
        }
        check_reachable(behavior, &name, &mut report);
    }

    // A model without events has no dynamic part to cover it.
    if events.is_empty() {
        report.sort();
        return report;
    }
    let mut covered = vec![false; model.actions.len()];
    for e in events {
        for a in e.region.actions() {
            if let Some(slot) = covered.get_mut(a.0) {
                *slot = true;
            }
        }
    }
    for id in model.action_ids() {
        if !covered[id.0] {
            report.push(
                Rule::Coverage,
                Severity::Warning,
                model.action_path(id),
                "action belongs to no event region",
            );
        }
    }

    report.sort();
    report
}

/// Identifies the bounded loops of a behavior. Errors when a cycle has no
/// repeat bound, when a bound closes no cycle, or when loop bodies overlap.
/// Endpoints must already be known to be declared events.
pub fn analyze_loops(
    behavior: &BehaviorModel,
    events: &[Event],
) -> Result<Vec<LoopInfo>, ValidationReport> {
    let n = events.len();
    let name = |id: usize| events[id].name.clone();
    let mut forward: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in behavior.edges.iter().filter(|e| e.repeat.is_none()) {
        forward[e.from.0].push(e.to.0);
    }
    // reach[u][v]: a non-empty forward path leads from u to v.
    let reach: Vec<Vec<bool>> = (0..n).map(|u| reachable_from(&forward, u)).collect();

    let mut report = ValidationReport::new();
    let mut reported = vec![false; n];
    for u in 0..n {
        if !reach[u][u] || reported[u] {
            continue;
        }
        let scc: Vec<usize> = (0..n)
            .filter(|&v| v == u || (reach[u][v] && reach[v][u]))
            .collect();
        for &v in &scc {
            reported[v] = true;
        }
        let cycle = cycle_through(&forward, u, &scc);
        let names: Vec<String> = cycle.iter().map(|&v| name(v)).collect();
        report.push(
            Rule::UnboundedLoop,
            Severity::Error,
            names.join(" -> "),
            format!("cycle {} has no repeat bound", names.join(" -> ")),
        );
    }
    if report.has_errors() {
        return Err(report);
    }

    let mut loops = Vec::new();
    for e in behavior.edges.iter() {
        let Some(repeat) = e.repeat else { continue };
        let (tail, head) = (e.from.0, e.to.0);
        let loc = format!("{} -> {}", name(tail), name(head));
        if repeat == Repeat::AtMost(0) {
            report.push(
                Rule::LoopShape,
                Severity::Error,
                &loc,
                "repeat bound must be positive",
            );
            continue;
        }
        if tail != head && !reach[head][tail] {
            report.push(
                Rule::LoopShape,
                Severity::Error,
                &loc,
                "repeat bound on an edge that closes no cycle",
            );
            continue;
        }
        let body: BTreeSet<EventId> = (0..n)
            .filter(|&v| (v == head || reach[head][v]) && (v == tail || reach[v][tail]))
            .map(EventId)
            .collect();
        loops.push(LoopInfo {
            tail: EventId(tail),
            head: EventId(head),
            repeat,
            body,
        });
    }
    for i in 0..loops.len() {
        for j in i + 1..loops.len() {
            if !loops[i].body.is_disjoint(&loops[j].body) {
                report.push(
                    Rule::LoopShape,
                    Severity::Error,
                    format!("{} -> {}", name(loops[j].tail.0), name(loops[j].head.0)),
                    format!(
                        "loop overlaps the loop {} -> {}; nested or shared loop bodies are not supported",
                        name(loops[i].tail.0),
                        name(loops[i].head.0)
                    ),
                );
            }
        }
    }
    if report.has_errors() {
        Err(report)
    } else {
        Ok(loops)
    }
}

fn reachable_from(adj: &[Vec<usize>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut queue: VecDeque<usize> = adj[start].iter().copied().collect();
    while let Some(u) = queue.pop_front() {
        if seen[u] {
            continue;
        }
        seen[u] = true;
        queue.extend(adj[u].iter().copied());
    }
    seen
}

/// A simple cycle through `start` using only vertices of its component.
fn cycle_through(adj: &[Vec<usize>], start: usize, scc: &[usize]) -> Vec<usize> {
    let inside = |v: usize| scc.contains(&v);
    let mut prev: HashMap<usize, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    for &v in &adj[start] {
        if v == start {
            return vec![start, start];
        }
        if inside(v) && !prev.contains_key(&v) {
            prev.insert(v, start);
            queue.push_back(v);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if v == start {
                let mut path = vec![start, u];
                let mut cur = u;
                while let Some(&p) = prev.get(&cur) {
                    if p == start {
                        break;
                    }
                    path.push(p);
                    cur = p;
                }
                path.push(start);
                // Collected backwards from the closing edge.
                path.reverse();
                return path;
            }
            if inside(v) && !prev.contains_key(&v) {
                prev.insert(v, u);
                queue.push_back(v);
            }
        }
    }
    vec![start]
}

fn check_reachable(
    behavior: &BehaviorModel,
    name: &dyn Fn(EventId) -> String,
    report: &mut ValidationReport,
) {
    let ids: Vec<EventId> = behavior.events.clone();
    let pos: HashMap<EventId, usize> = ids.iter().enumerate().map(|(i, e)| (*e, i)).collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); ids.len()];
    let mut has_forward_in = vec![false; ids.len()];
    for e in &behavior.edges {
        let (f, t) = (pos[&e.from], pos[&e.to]);
        adj[f].push(t);
        if e.repeat.is_none() {
            has_forward_in[t] = true;
        }
    }
    let mut seen = vec![false; ids.len()];
    let mut queue: VecDeque<usize> = (0..ids.len()).filter(|&i| !has_forward_in[i]).collect();
    while let Some(u) = queue.pop_front() {
        if seen[u] {
            continue;
        }
        seen[u] = true;
        queue.extend(adj[u].iter().copied());
    }
    for (i, id) in ids.iter().enumerate() {
        if !seen[i] {
            report.push(
                Rule::Unreachable,
                Severity::Warning,
                name(*id),
                "event is not reachable from any source event",
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Region;
    use crate::model::{ActionKind, EdgeKind};

    fn chain_model(n: usize) -> (StaticModel, Vec<Event>) {
        let mut m = StaticModel::new("M");
        let t = m.add_thimac(None, "T").unwrap();
        let mut events = Vec::new();
        for i in 0..n {
            let a = m
                .add_action(t, ActionKind::Create, format!("c{i}"), None)
                .unwrap();
            events.push(Event {
                name: format!("E{}", i + 1),
                label: None,
                region: Region::new([a]),
                time: None,
            });
        }
        (m, events)
    }

    #[test]
    fn linear_chain_is_clean() {
        let (m, events) = chain_model(6);
        let mut b = BehaviorModel::over(6);
        for i in 0..5 {
            b.precede(EventId(i), EventId(i + 1));
        }
        assert!(validate_behavior(&b, &events, &m).is_empty());
    }

    #[test]
    fn unbounded_self_loop_is_an_error() {
        let (m, events) = chain_model(1);
        let mut b = BehaviorModel::over(1);
        b.precede(EventId(0), EventId(0));
        let r = validate_behavior(&b, &events, &m);
        let v: Vec<_> = r.with_rule(Rule::UnboundedLoop).collect();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].location, "E1 -> E1");
        // Nothing can start the cycle either.
        assert_eq!(r.with_rule(Rule::Unreachable).count(), 1);
    }

    #[test]
    fn unbounded_cycle_names_its_events() {
        let (m, events) = chain_model(3);
        let mut b = BehaviorModel::over(3);
        b.precede(EventId(0), EventId(1))
            .precede(EventId(1), EventId(2))
            .precede(EventId(2), EventId(1));
        let r = validate_behavior(&b, &events, &m);
        let v: Vec<_> = r.with_rule(Rule::UnboundedLoop).collect();
        assert_eq!(v.len(), 1, "{r}");
        assert_eq!(v[0].location, "E2 -> E3 -> E2");
    }

    #[test]
    fn bounded_loops_are_accepted_and_measured() {
        let (m, events) = chain_model(3);
        let mut b = BehaviorModel::over(3);
        b.precede(EventId(0), EventId(1))
            .repeat(EventId(1), EventId(0), Repeat::Default)
            .precede(EventId(1), EventId(2));
        assert!(validate_behavior(&b, &events, &m).is_empty());
        let loops = analyze_loops(&b, &events).unwrap();
        assert_eq!(loops.len(), 1);
        assert_eq!(loops[0].body, BTreeSet::from([EventId(0), EventId(1)]));
    }

    #[test]
    fn stray_and_overlapping_bounds_are_rejected() {
        let (m, events) = chain_model(3);
        let mut b = BehaviorModel::over(3);
        b.precede(EventId(0), EventId(1))
            .repeat(EventId(0), EventId(2), Repeat::AtMost(2));
        let r = validate_behavior(&b, &events, &m);
        assert_eq!(r.with_rule(Rule::LoopShape).count(), 1, "{r}");

        let mut b = BehaviorModel::over(3);
        b.precede(EventId(0), EventId(1))
            .repeat(EventId(1), EventId(0), Repeat::AtMost(2))
            .repeat(EventId(1), EventId(1), Repeat::AtMost(2));
        let r = validate_behavior(&b, &events, &m);
        assert_eq!(r.with_rule(Rule::LoopShape).count(), 1, "{r}");
    }

    #[test]
    fn unknown_endpoints_are_undefined() {
        let (m, events) = chain_model(2);
        let mut b = BehaviorModel::over(2);
        b.precede(EventId(0), EventId(5));
        let r = validate_behavior(&b, &events, &m);
        assert_eq!(r.with_rule(Rule::Undef).count(), 1);
    }

    #[test]
    fn uncovered_actions_warn() {
        let (mut m, events) = chain_model(2);
        let extra = m
            .add_action(crate::model::ThimacId(0), ActionKind::Create, "x", None)
            .unwrap();
        let r = validate_behavior(&BehaviorModel::over(2), &events, &m);
        let cov: Vec<_> = r.with_rule(Rule::Coverage).collect();
        assert_eq!(cov.len(), 1);
        assert_eq!(cov[0].location, m.action_path(extra));
        assert!(!r.has_errors());
    }

    #[test]
    fn disconnected_regions_follow_the_switch() {
        let (mut m, mut events) = chain_model(1);
        let x = m
            .add_action(crate::model::ThimacId(0), ActionKind::Create, "x", None)
            .unwrap();
        events[0].region = Region::new([crate::model::ActionId(0), x]);
        let b = BehaviorModel::over(1);
        let strict = validate_behavior(&b, &events, &m);
        assert!(strict.has_errors());
        let relaxed = validate_behavior_with(
            &b,
            &events,
            &m,
            CheckOptions {
                allow_disconnected_regions: true,
                ..Default::default()
            },
        );
        assert!(!relaxed.has_errors());
        let _ = EdgeKind::Flow;
    }

    #[test]
    fn report_ignores_edge_declaration_order() {
        let (m, events) = chain_model(4);
        let mut a = BehaviorModel::over(4);
        a.precede(EventId(0), EventId(1))
            .precede(EventId(2), EventId(3))
            .precede(EventId(3), EventId(2))
            .precede(EventId(1), EventId(0));
        let mut b = a.clone();
        b.edges.reverse();
        assert_eq!(
            validate_behavior(&a, &events, &m),
            validate_behavior(&b, &events, &m)
        );
    }
}
