use super::{DslError, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Str(String),
    Int(u64),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Dot,
    Colon,
    Arrow,
    At,
    Le,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Str(_) => "string".to_owned(),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::LBrace => "`{`".to_owned(),
            Tok::RBrace => "`}`".to_owned(),
            Tok::LBracket => "`[`".to_owned(),
            Tok::RBracket => "`]`".to_owned(),
            Tok::Semi => "`;`".to_owned(),
            Tok::Comma => "`,`".to_owned(),
            Tok::Dot => "`.`".to_owned(),
            Tok::Colon => "`:`".to_owned(),
            Tok::Arrow => "`->`".to_owned(),
            Tok::At => "`@`".to_owned(),
            Tok::Le => "`<=`".to_owned(),
            Tok::Eof => "end of input".to_owned(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

pub(crate) fn tokenize(text: &str, file: &str) -> Result<Vec<Token>, DslError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, column, message: String, expected: &str| DslError::Parse {
        span: SourceSpan {
            file: file.to_owned(),
            line,
            column,
        },
        message,
        expected: expected.to_owned(),
    };

    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let push = |tok: Tok, out: &mut Vec<Token>| {
            out.push(Token {
                tok,
                line: start_line,
                column: start_col,
            })
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '{' | '}' | '[' | ']' | ';' | ',' | '.' | ':' | '@' => {
                let tok = match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    ';' => Tok::Semi,
                    ',' => Tok::Comma,
                    '.' => Tok::Dot,
                    ':' => Tok::Colon,
                    _ => Tok::At,
                };
                push(tok, &mut out);
                i += 1;
                col += 1;
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                push(Tok::Arrow, &mut out);
                i += 2;
                col += 2;
            }
            '<' if chars.get(i + 1) == Some(&'=') => {
                push(Tok::Le, &mut out);
                i += 2;
                col += 2;
            }
            '"' => {
                let mut s = String::new();
                i += 1;
                col += 1;
                loop {
                    match chars.get(i) {
                        None | Some('\n') => {
                            return Err(err(
                                start_line,
                                start_col,
                                "unterminated string".to_owned(),
                                "closing `\"`",
                            ))
                        }
                        Some('"') => {
                            i += 1;
                            col += 1;
                            break;
                        }
                        Some('\\') => {
                            let escaped = match chars.get(i + 1) {
                                Some('"') => '"',
                                Some('\\') => '\\',
                                Some('n') => '\n',
                                Some('t') => '\t',
                                _ => {
                                    return Err(err(
                                        line,
                                        col,
                                        "invalid escape".to_owned(),
                                        "one of `\\\"`, `\\\\`, `\\n`, `\\t`",
                                    ))
                                }
                            };
                            s.push(escaped);
                            i += 2;
                            col += 2;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            i += 1;
                            col += 1;
                        }
                    }
                }
                push(Tok::Str(s), &mut out);
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..i].iter().collect();
                let n = digits.parse::<u64>().map_err(|_| {
                    err(
                        start_line,
                        start_col,
                        format!("integer `{digits}` out of range"),
                        "a smaller integer",
                    )
                })?;
                col += i - start;
                push(Tok::Int(n), &mut out);
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                col += i - start;
                push(Tok::Ident(chars[start..i].iter().collect()), &mut out);
            }
            other => {
                return Err(err(
                    line,
                    col,
                    format!("unexpected character `{other}`"),
                    "a token",
                ))
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}
