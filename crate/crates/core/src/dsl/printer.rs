use std::fmt::Write;

use crate::bundle::ModelBundle;
use crate::dynamics::{Region, Repeat};
use crate::model::{Member, StaticModel, ThimacId};

/// Canonical text for a bundle: two-space indentation, one declaration per
/// line, declaration order kept. Regions are written with whole-thimac paths
/// wherever every action of a thimac is included.
pub fn print(bundle: &ModelBundle) -> String {
    let m = &bundle.model;
    let mut out = String::new();
    let roots: Vec<ThimacId> = m.roots().collect();
    if roots.is_empty() && m.edges.is_empty() {
        writeln!(out, "model {} {{}}", m.name).unwrap();
    } else {
        writeln!(out, "model {} {{", m.name).unwrap();
        for t in roots {
            print_thimac(m, t, 1, &mut out);
        }
        for e in &m.edges {
            write!(
                out,
                "  {} {} -> {}",
                e.kind.keyword(),
                m.action_path(e.src),
                m.action_path(e.dst)
            )
            .unwrap();
            if let Some(n) = e.marker {
                write!(out, " @{n}").unwrap();
            }
            out.push_str(";\n");
        }
        out.push_str("}\n");
    }

    if !bundle.events.is_empty() {
        out.push_str("events {\n");
        for ev in &bundle.events {
            write!(out, "  event {}", ev.name).unwrap();
            if let Some(label) = &ev.label {
                write!(out, " {}", quote(label)).unwrap();
            }
            out.push_str(" {\n");
            writeln!(
                out,
                "    region: {};",
                region_paths(m, &ev.region).join(", ")
            )
            .unwrap();
            if let Some(time) = &ev.time {
                writeln!(out, "    time: {};", quote(time)).unwrap();
            }
            out.push_str("  }\n");
        }
        out.push_str("}\n");
    }

    if !bundle.behavior.edges.is_empty() {
        out.push_str("behavior {\n");
        for e in &bundle.behavior.edges {
            write!(
                out,
                "  {} -> {}",
                bundle.event_name(e.from),
                bundle.event_name(e.to)
            )
            .unwrap();
            match e.repeat {
                None => {}
                Some(Repeat::Default) => out.push_str(" [repeat]"),
                Some(Repeat::AtMost(n)) => write!(out, " [repeat <= {n}]").unwrap(),
            }
            out.push_str(";\n");
        }
        out.push_str("}\n");
    }
    out
}

fn print_thimac(m: &StaticModel, id: ThimacId, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    let t = m.thimac(id);
    if t.members.is_empty() {
        writeln!(out, "{pad}thimac {} {{}}", t.name).unwrap();
        return;
    }
    writeln!(out, "{pad}thimac {} {{", t.name).unwrap();
    for member in &t.members {
        match *member {
            Member::Thimac(c) => print_thimac(m, c, depth + 1, out),
            Member::Action(a) => {
                let node = m.action(a);
                write!(out, "{pad}  {} {}", node.kind.keyword(), node.name).unwrap();
                if let Some(label) = &node.label {
                    write!(out, " {}", quote(label)).unwrap();
                }
                out.push_str(";\n");
            }
        }
    }
    writeln!(out, "{pad}}}").unwrap();
}

fn quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for c in s.chars() {
        match c {
            '"' => q.push_str("\\\""),
            '\\' => q.push_str("\\\\"),
            '\n' => q.push_str("\\n"),
            '\t' => q.push_str("\\t"),
            c => q.push(c),
        }
    }
    q.push('"');
    q
}

fn region_paths(m: &StaticModel, region: &Region) -> Vec<String> {
    let mut out = Vec::new();
    for t in m.roots() {
        collect(m, region, t, &mut out);
    }
    out
}

fn collect(m: &StaticModel, region: &Region, id: ThimacId, out: &mut Vec<String>) {
    let all = m.subtree_actions(id);
    if !all.is_empty() && all.iter().all(|a| region.contains(*a)) {
        out.push(m.thimac_path(id));
        return;
    }
    for member in &m.thimac(id).members {
        match *member {
            Member::Action(a) if region.contains(a) => out.push(m.action_path(a)),
            Member::Action(_) => {}
            Member::Thimac(c) => collect(m, region, c, out),
        }
    }
}
