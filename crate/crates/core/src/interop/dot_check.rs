//! A recursive-descent recognizer for the Graphviz DOT language, used to
//! check emitted diagrams without an external `dot` binary.

use std::collections::BTreeSet;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("DOT syntax error at byte {offset}: {message}")]
pub struct DotSyntaxError {
    pub offset: usize,
    pub message: String,
}

/// What a well-formed document contains.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DotStats {
    pub directed: bool,
    /// Distinct node identifiers used in node or edge statements.
    pub nodes: usize,
    /// Edge segments (`a -> b -> c` counts two).
    pub edges: usize,
    /// Edge segments carrying `style=dashed`.
    pub dashed_edges: usize,
    /// Subgraph names starting with `cluster`, in document order.
    pub clusters: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum T {
    Id(String),
    /// Quoted string; never a keyword.
    Str(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Colon,
    Eq,
    EdgeOp(&'static str),
    Eof,
}

fn lex(src: &str) -> Result<Vec<(T, usize)>, DotSyntaxError> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |offset, message: &str| DotSyntaxError {
        offset,
        message: message.to_owned(),
    };
    let mut line_start = true;
    while i < b.len() {
        let c = b[i];
        let start = i;
        if c == b'\n' {
            line_start = true;
            i += 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'#' && line_start {
            while i < b.len() && b[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        line_start = false;
        match c {
            b'/' if b.get(i + 1) == Some(&b'/') => {
                while i < b.len() && b[i] != b'\n' {
                    i += 1;
                }
            }
            b'/' if b.get(i + 1) == Some(&b'*') => {
                let end = src[i + 2..]
                    .find("*/")
                    .ok_or_else(|| err(start, "unterminated comment"))?;
                i += end + 4;
            }
            b'{' | b'}' | b'[' | b']' | b';' | b',' | b':' | b'=' => {
                let t = match c {
                    b'{' => T::LBrace,
                    b'}' => T::RBrace,
                    b'[' => T::LBracket,
                    b']' => T::RBracket,
                    b';' => T::Semi,
                    b',' => T::Comma,
                    b':' => T::Colon,
                    _ => T::Eq,
                };
                out.push((t, start));
                i += 1;
            }
            b'-' if b.get(i + 1) == Some(&b'>') => {
                out.push((T::EdgeOp("->"), start));
                i += 2;
            }
            b'-' if b.get(i + 1) == Some(&b'-') => {
                out.push((T::EdgeOp("--"), start));
                i += 2;
            }
            b'"' => {
                let mut s = String::new();
                i += 1;
                loop {
                    match b.get(i) {
                        None => return Err(err(start, "unterminated string")),
                        Some(b'"') => {
                            i += 1;
                            break;
                        }
                        Some(b'\\') if b.get(i + 1).is_some() => {
                            let next = src[i + 1..].chars().next().unwrap();
                            if next != '"' {
                                s.push('\\');
                            }
                            s.push(next);
                            i += 1 + next.len_utf8();
                        }
                        Some(_) => {
                            let ch = src[i..].chars().next().unwrap();
                            s.push(ch);
                            i += ch.len_utf8();
                        }
                    }
                }
                out.push((T::Str(s), start));
            }
            b'<' => {
                let mut depth = 0usize;
                loop {
                    match b.get(i) {
                        None => return Err(err(start, "unterminated HTML string")),
                        Some(b'<') => depth += 1,
                        Some(b'>') => {
                            depth -= 1;
                            if depth == 0 {
                                i += 1;
                                break;
                            }
                        }
                        _ => {}
                    }
                    i += 1;
                }
                out.push((T::Id(src[start..i].to_owned()), start));
            }
            c if c == b'-' || c == b'.' || c.is_ascii_digit() => {
                i += 1;
                while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
                    i += 1;
                }
                let text = &src[start..i];
                let digits = text.trim_start_matches('-');
                if digits.is_empty() || digits == "." || digits.matches('.').count() > 1 {
                    return Err(err(start, "malformed numeral"));
                }
                out.push((T::Id(text.to_owned()), start));
            }
            c if c.is_ascii_alphabetic() || c == b'_' || c >= 0x80 => {
                while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_' || b[i] >= 0x80)
                {
                    i += 1;
                }
                out.push((T::Id(src[start..i].to_owned()), start));
            }
            _ => return Err(err(start, "unexpected character")),
        }
    }
    out.push((T::Eof, src.len()));
    Ok(out)
}

struct Checker {
    toks: Vec<(T, usize)>,
    pos: usize,
    edge_op: &'static str,
    nodes: BTreeSet<String>,
    stats: DotStats,
}

fn is_kw(t: &T, kw: &str) -> bool {
    matches!(t, T::Id(s) if s.eq_ignore_ascii_case(kw))
}

impl Checker {
    fn peek(&self) -> &T {
        &self.toks[self.pos].0
    }

    fn bump(&mut self) -> T {
        let t = self.toks[self.pos].0.clone();
        if t != T::Eof {
            self.pos += 1;
        }
        t
    }

    fn fail<R>(&self, message: &str) -> Result<R, DotSyntaxError> {
        Err(DotSyntaxError {
            offset: self.toks[self.pos].1,
            message: format!("{message}, found {:?}", self.peek()),
        })
    }

    fn expect(&mut self, t: T) -> Result<(), DotSyntaxError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.fail(&format!("expected {t:?}"))
        }
    }

    fn id(&mut self) -> Result<String, DotSyntaxError> {
        match self.peek().clone() {
            T::Id(s) if !is_keyword(&s) => {
                self.bump();
                Ok(s)
            }
            T::Str(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.fail("expected identifier"),
        }
    }

    fn graph(&mut self) -> Result<(), DotSyntaxError> {
        if is_kw(self.peek(), "strict") {
            self.bump();
        }
        if is_kw(self.peek(), "digraph") {
            self.edge_op = "->";
            self.stats.directed = true;
        } else if is_kw(self.peek(), "graph") {
            self.edge_op = "--";
        } else {
            return self.fail("expected `graph` or `digraph`");
        }
        self.bump();
        if matches!(self.peek(), T::Id(_) | T::Str(_)) {
            self.id()?;
        }
        self.expect(T::LBrace)?;
        self.stmt_list()?;
        self.expect(T::RBrace)?;
        if *self.peek() != T::Eof {
            return self.fail("trailing input after graph");
        }
        Ok(())
    }

    fn stmt_list(&mut self) -> Result<(), DotSyntaxError> {
        while *self.peek() != T::RBrace && *self.peek() != T::Eof {
            self.stmt()?;
            if *self.peek() == T::Semi {
                self.bump();
            }
        }
        Ok(())
    }

    fn stmt(&mut self) -> Result<(), DotSyntaxError> {
        let t = self.peek().clone();
        if is_kw(&t, "graph") || is_kw(&t, "node") || is_kw(&t, "edge") {
            self.bump();
            self.attr_list(true)?;
            return Ok(());
        }
        if is_kw(&t, "subgraph") || t == T::LBrace {
            let members = self.subgraph()?;
            return self.edge_rest(members);
        }
        let id = self.id()?;
        if *self.peek() == T::Eq {
            self.bump();
            self.id()?;
            return Ok(());
        }
        self.port()?;
        self.nodes.insert(id.clone());
        if matches!(self.peek(), T::EdgeOp(_)) {
            return self.edge_rest(vec![id]);
        }
        if *self.peek() == T::LBracket {
            self.attr_list(false)?;
        }
        Ok(())
    }

    fn port(&mut self) -> Result<(), DotSyntaxError> {
        for _ in 0..2 {
            if *self.peek() != T::Colon {
                break;
            }
            self.bump();
            self.id()?;
        }
        Ok(())
    }

    /// Parses a subgraph and returns the node ids it mentions.
    fn subgraph(&mut self) -> Result<Vec<String>, DotSyntaxError> {
        if is_kw(self.peek(), "subgraph") {
            self.bump();
            if matches!(self.peek(), T::Id(_) | T::Str(_)) {
                let name = self.id()?;
                if name.starts_with("cluster") {
                    self.stats.clusters.push(name);
                }
            }
        }
        let before = self.nodes.clone();
        self.expect(T::LBrace)?;
        self.stmt_list()?;
        self.expect(T::RBrace)?;
        Ok(self.nodes.difference(&before).cloned().collect())
    }

    fn edge_rest(&mut self, first: Vec<String>) -> Result<(), DotSyntaxError> {
        let mut segments = 0;
        let mut left = first;
        while let T::EdgeOp(op) = self.peek().clone() {
            if op != self.edge_op {
                return self.fail(&format!("edge operator must be `{}`", self.edge_op));
            }
            self.bump();
            let right = if is_kw(self.peek(), "subgraph") || *self.peek() == T::LBrace {
                self.subgraph()?
            } else {
                let id = self.id()?;
                self.port()?;
                self.nodes.insert(id.clone());
                vec![id]
            };
            segments += left.len().max(1) * right.len().max(1);
            left = right;
        }
        let dashed = if *self.peek() == T::LBracket {
            self.attr_list(false)?
        } else {
            false
        };
        self.stats.edges += segments;
        if dashed {
            self.stats.dashed_edges += segments;
        }
        Ok(())
    }

    /// Returns whether the attributes set `style=dashed`.
    fn attr_list(&mut self, required: bool) -> Result<bool, DotSyntaxError> {
        if required && *self.peek() != T::LBracket {
            return self.fail("expected `[`");
        }
        let mut dashed = false;
        while *self.peek() == T::LBracket {
            self.bump();
            while *self.peek() != T::RBracket {
                let key = self.id()?;
                self.expect(T::Eq)?;
                let value = self.id()?;
                if key == "style" && value.split(',').any(|s| s.trim() == "dashed") {
                    dashed = true;
                }
                if matches!(self.peek(), T::Semi | T::Comma) {
                    self.bump();
                }
            }
            self.bump();
        }
        Ok(dashed)
    }
}

fn is_keyword(s: &str) -> bool {
    ["node", "edge", "graph", "digraph", "subgraph", "strict"]
        .iter()
        .any(|k| s.eq_ignore_ascii_case(k))
}

pub fn check_dot(src: &str) -> Result<DotStats, DotSyntaxError> {
    let toks = lex(src)?;
    let mut c = Checker {
        toks,
        pos: 0,
        edge_op: "->",
        nodes: BTreeSet::new(),
        stats: DotStats::default(),
    };
    c.graph()?;
    c.stats.nodes = c.nodes.len();
    Ok(c.stats)
}
