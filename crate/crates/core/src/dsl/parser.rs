use std::collections::HashMap;

use super::lexer::{tokenize, Tok, Token};
use super::{DslError, SourceSpan};
use crate::bundle::ModelBundle;
use crate::dynamics::{Event, EventId, Region, Repeat};
use crate::model::{ActionKind, Edge, EdgeKind, Member, StaticModel, ThimacId};

pub fn parse(text: &str) -> Result<ModelBundle, DslError> {
    parse_named(text, "<input>")
}

/// Parses `text`, attributing spans to `file`.
pub fn parse_named(text: &str, file: &str) -> Result<ModelBundle, DslError> {
    let toks = tokenize(text, file)?;
    let mut p = Parser {
        toks,
        pos: 0,
        file,
        bundle: ModelBundle::default(),
    };
    p.bundle_decl()?;
    Ok(p.bundle)
}

struct PendingEdge {
    kind: EdgeKind,
    src: (String, SourceSpan),
    dst: (String, SourceSpan),
    marker: Option<u32>,
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    file: &'a str,
    bundle: ModelBundle,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_keyword(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == word)
    }

    fn span(&self) -> SourceSpan {
        let t = &self.toks[self.pos];
        SourceSpan {
            file: self.file.to_owned(),
            line: t.line,
            column: t.column,
        }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn unexpected<T>(&self, expected: &str) -> Result<T, DslError> {
        Err(DslError::Parse {
            span: self.span(),
            message: format!("unexpected {}", self.peek().describe()),
            expected: expected.to_owned(),
        })
    }

    fn expect(&mut self, tok: Tok) -> Result<(), DslError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.unexpected(&tok.describe())
        }
    }

    fn keyword(&mut self, word: &str) -> Result<(), DslError> {
        if self.peek_keyword(word) {
            self.bump();
            Ok(())
        } else {
            self.unexpected(&format!("`{word}`"))
        }
    }

    fn ident(&mut self, expected: &str) -> Result<(String, SourceSpan), DslError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok((s, span))
            }
            _ => self.unexpected(expected),
        }
    }

    fn path(&mut self) -> Result<(String, SourceSpan), DslError> {
        let (mut path, span) = self.ident("a path")?;
        while *self.peek() == Tok::Dot {
            self.bump();
            let (seg, _) = self.ident("an identifier after `.`")?;
            path.push('.');
            path.push_str(&seg);
        }
        Ok((path, span))
    }

    fn optional_string(&mut self) -> Option<String> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.bump();
                Some(s)
            }
            _ => None,
        }
    }

    fn bundle_decl(&mut self) -> Result<(), DslError> {
        self.keyword("model")?;
        let (name, _) = self.ident("a model name")?;
        self.bundle.model = StaticModel::new(name);
        self.expect(Tok::LBrace)?;
        let mut pending = Vec::new();
        loop {
            match self.peek() {
                Tok::RBrace => break,
                Tok::Ident(s) if s == "thimac" => self.thimac_decl(None)?,
                Tok::Ident(s) if s == "flow" || s == "trigger" => pending.push(self.edge_decl()?),
                _ => return self.unexpected("`thimac`, `flow`, `trigger` or `}`"),
            }
        }
        self.bump();

        for e in pending {
            let model = &self.bundle.model;
            let resolve = |(path, span): (String, SourceSpan)| {
                model.resolve_action(&path).ok_or(DslError::Undef {
                    name: path,
                    what: "is not a declared action",
                    span,
                })
            };
            let src = resolve(e.src)?;
            let dst = resolve(e.dst)?;
            self.bundle.model.edges.push(Edge {
                src,
                dst,
                kind: e.kind,
                marker: e.marker,
            });
        }

        if self.peek_keyword("events") {
            self.events_decl()?;
        }
        if self.peek_keyword("behavior") {
            self.behavior_decl()?;
        }
        if *self.peek() != Tok::Eof {
            return self.unexpected("`events`, `behavior` or end of input");
        }
        Ok(())
    }

    fn scope_member(&self, parent: Option<ThimacId>, name: &str) -> Option<Member> {
        let m = &self.bundle.model;
        match parent {
            None => m
                .roots()
                .find(|t| m.thimac(*t).name == name)
                .map(Member::Thimac),
            Some(p) => m.thimac(p).members.iter().copied().find(|mem| match *mem {
                Member::Thimac(t) => m.thimac(t).name == name,
                Member::Action(a) => m.action(a).name == name,
            }),
        }
    }

    fn check_fresh(
        &self,
        parent: Option<ThimacId>,
        name: &str,
        span: &SourceSpan,
    ) -> Result<(), DslError> {
        let Some(existing) = self.scope_member(parent, name) else {
            return Ok(());
        };
        let first = match existing {
            Member::Thimac(t) => self.bundle.spans.thimacs.get(&t),
            Member::Action(a) => self.bundle.spans.actions.get(&a),
        };
        let full = match parent {
            None => name.to_owned(),
            Some(p) => format!("{}.{}", self.bundle.model.thimac_path(p), name),
        };
        Err(DslError::DupId {
            name: full,
            first: first.cloned().unwrap_or_else(|| span.clone()),
            second: span.clone(),
        })
    }

    fn thimac_decl(&mut self, parent: Option<ThimacId>) -> Result<(), DslError> {
        self.keyword("thimac")?;
        let (name, span) = self.ident("a thimac name")?;
        self.check_fresh(parent, &name, &span)?;
        let id = self
            .bundle
            .model
            .add_thimac(parent, name)
            .expect("name checked and parent exists");
        self.bundle.spans.thimacs.insert(id, span);
        self.expect(Tok::LBrace)?;
        loop {
            match self.peek().clone() {
                Tok::RBrace => break,
                Tok::Ident(s) if s == "thimac" => self.thimac_decl(Some(id))?,
                Tok::Ident(s) => match ActionKind::from_keyword(&s) {
                    Some(kind) => {
                        self.bump();
                        self.action_decl(id, kind)?;
                    }
                    None => return self.unexpected("an action kind, `thimac` or `}`"),
                },
                _ => return self.unexpected("an action kind, `thimac` or `}`"),
            }
        }
        self.bump();
        Ok(())
    }

    fn action_decl(&mut self, owner: ThimacId, kind: ActionKind) -> Result<(), DslError> {
        let (name, span) = self.ident("an action name")?;
        self.check_fresh(Some(owner), &name, &span)?;
        let label = self.optional_string();
        self.expect(Tok::Semi)?;
        let id = self
            .bundle
            .model
            .add_action(owner, kind, name, label.as_deref())
            .expect("name checked and owner exists");
        self.bundle.spans.actions.insert(id, span);
        Ok(())
    }

    fn edge_decl(&mut self) -> Result<PendingEdge, DslError> {
        let kind = match self.bump() {
            Tok::Ident(s) if s == "flow" => EdgeKind::Flow,
            _ => EdgeKind::Trigger,
        };
        let src = self.path()?;
        self.expect(Tok::Arrow)?;
        let dst = self.path()?;
        let mut marker = None;
        if *self.peek() == Tok::At {
            self.bump();
            match self.peek().clone() {
                Tok::Int(n) if n <= u32::MAX as u64 => {
                    self.bump();
                    marker = Some(n as u32);
                }
                _ => return self.unexpected("a marker number"),
            }
        }
        self.expect(Tok::Semi)?;
        Ok(PendingEdge {
            kind,
            src,
            dst,
            marker,
        })
    }

    fn events_decl(&mut self) -> Result<(), DslError> {
        self.keyword("events")?;
        self.expect(Tok::LBrace)?;
        let mut seen: HashMap<String, SourceSpan> = HashMap::new();
        while *self.peek() != Tok::RBrace {
            if !self.peek_keyword("event") {
                return self.unexpected("`event` or `}`");
            }
            self.bump();
            let (name, span) = self.ident("an event name")?;
            if let Some(first) = seen.get(&name) {
                return Err(DslError::DupId {
                    name,
                    first: first.clone(),
                    second: span,
                });
            }
            seen.insert(name.clone(), span.clone());
            let label = self.optional_string();
            self.expect(Tok::LBrace)?;
            self.keyword("region")?;
            self.expect(Tok::Colon)?;
            let mut actions = Vec::new();
            loop {
                let (path, pspan) = self.path()?;
                match self.bundle.model.resolve(&path) {
                    Some(Member::Action(a)) => actions.push(a),
                    Some(Member::Thimac(t)) => actions.extend(self.bundle.model.subtree_actions(t)),
                    None => {
                        return Err(DslError::Undef {
                            name: path,
                            what: "is not a declared thimac or action",
                            span: pspan,
                        })
                    }
                }
                if *self.peek() != Tok::Comma {
                    break;
                }
                self.bump();
            }
            self.expect(Tok::Semi)?;
            let mut time = None;
            if self.peek_keyword("time") {
                self.bump();
                self.expect(Tok::Colon)?;
                match self.optional_string() {
                    Some(s) => time = Some(s),
                    None => return self.unexpected("a time string"),
                }
                self.expect(Tok::Semi)?;
            }
            self.expect(Tok::RBrace)?;
            if actions.is_empty() {
                return Err(DslError::EmptyRegion { event: name, span });
            }
            let id = self.bundle.add_event(Event {
                name,
                label,
                region: Region::new(actions),
                time,
            });
            self.bundle.spans.events.insert(id, span);
        }
        self.bump();
        Ok(())
    }

    fn event_ref(&mut self) -> Result<EventId, DslError> {
        let (name, span) = self.ident("an event name")?;
        self.bundle.event_id(&name).ok_or(DslError::Undef {
            name,
            what: "is not a declared event",
            span,
        })
    }

    fn behavior_decl(&mut self) -> Result<(), DslError> {
        self.keyword("behavior")?;
        self.expect(Tok::LBrace)?;
        while *self.peek() != Tok::RBrace {
            let from = self.event_ref()?;
            self.expect(Tok::Arrow)?;
            let to = self.event_ref()?;
            if *self.peek() == Tok::LBracket {
                self.bump();
                self.keyword("repeat")?;
                let repeat = if *self.peek() == Tok::Le {
                    self.bump();
                    match self.peek().clone() {
                        Tok::Int(n) if n >= 1 && n <= u32::MAX as u64 => {
                            self.bump();
                            Repeat::AtMost(n as u32)
                        }
                        _ => return self.unexpected("a positive repeat bound"),
                    }
                } else {
                    Repeat::Default
                };
                self.expect(Tok::RBracket)?;
                self.bundle.behavior.repeat(from, to, repeat);
            } else {
                self.bundle.behavior.precede(from, to);
            }
            self.expect(Tok::Semi)?;
        }
        self.bump();
        Ok(())
    }
}
