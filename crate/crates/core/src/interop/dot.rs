//! Graphviz output: one nested cluster per thimac, flows solid, triggers
//! dashed.

use std::fmt::Write;

use crate::bundle::ModelBundle;
use crate::model::{EdgeKind, Member, StaticModel, ThimacId};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DotOptions {
    /// Draw each event as a note node linked to its region's actions.
    pub show_events: bool,
}

pub fn export_dot(bundle: &ModelBundle, options: DotOptions) -> String {
    let m = &bundle.model;
    let mut out = String::new();
    writeln!(out, "digraph {} {{", quote(&m.name)).unwrap();
    out.push_str("  node [shape=box];\n");
    for t in m.roots() {
        cluster(m, t, 1, &mut out);
    }
    for e in &m.edges {
        let mut attrs = Vec::new();
        if e.kind == EdgeKind::Trigger {
            attrs.push("style=dashed".to_owned());
        }
        if let Some(n) = e.marker {
            attrs.push(format!("label={}", quote(&n.to_string())));
        }
        write!(
            out,
            "  {} -> {}",
            quote(&m.action_path(e.src)),
            quote(&m.action_path(e.dst))
        )
        .unwrap();
        if !attrs.is_empty() {
            write!(out, " [{}]", attrs.join(", ")).unwrap();
        }
        out.push_str(";\n");
    }
    if options.show_events {
        for ev in &bundle.events {
            let id = quote(&format!("event:{}", ev.name));
            let caption = match &ev.label {
                Some(l) => format!("{}: {}", ev.name, l),
                None => ev.name.clone(),
            };
            writeln!(out, "  {id} [shape=note, label={}];", quote(&caption)).unwrap();
            for a in ev.region.actions() {
                writeln!(
                    out,
                    "  {id} -> {} [style=dotted, arrowhead=none];",
                    quote(&m.action_path(*a))
                )
                .unwrap();
            }
        }
    }
    out.push_str("}\n");
    out
}

fn cluster(m: &StaticModel, id: ThimacId, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    let path = m.thimac_path(id);
    writeln!(
        out,
        "{pad}subgraph {} {{",
        quote(&format!("cluster_{path}"))
    )
    .unwrap();
    writeln!(out, "{pad}  label={};", quote(&m.thimac(id).name)).unwrap();
    for member in &m.thimac(id).members {
        match *member {
            Member::Thimac(c) => cluster(m, c, depth + 1, out),
            Member::Action(a) => {
                let node = m.action(a);
                let caption = format!(
                    "{}: {}",
                    node.kind,
                    node.label.as_deref().unwrap_or(&node.name)
                );
                writeln!(
                    out,
                    "{pad}  {} [label={}];",
                    quote(&m.action_path(a)),
                    quote(&caption)
                )
                .unwrap();
            }
        }
    }
    writeln!(out, "{pad}}}").unwrap();
}

fn quote(s: &str) -> String {
    let mut q = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => q.push_str("\\\""),
            '\\' => q.push_str("\\\\"),
            '\n' => q.push_str("\\n"),
            c => q.push(c),
        }
    }
    q.push('"');
    q
}
