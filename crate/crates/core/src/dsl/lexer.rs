use super::{DslError, DslErrorKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    /// Integer literal as written, possibly with a leading `-`.
    Int(String),
    Str(String),
    LParen,
    RParen,
    Comma,
    Eq,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(s) => format!("integer `{s}`"),
            Tok::Str(_) => "string literal".to_string(),
            Tok::LParen => "`(`".to_string(),
            Tok::RParen => "`)`".to_string(),
            Tok::Comma => "`,`".to_string(),
            Tok::Eq => "`=`".to_string(),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub offset: usize,
}

fn lex_error(offset: usize, message: impl Into<String>) -> DslError {
    DslError::new(DslErrorKind::Lex, offset, message)
}

pub(crate) fn tokenize(input: &str) -> Result<Vec<Token>, DslError> {
    let bytes = input.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => out.push(Token { tok: Tok::LParen, offset: i }),
            b')' => out.push(Token { tok: Tok::RParen, offset: i }),
            b',' => out.push(Token { tok: Tok::Comma, offset: i }),
            b'=' => out.push(Token { tok: Tok::Eq, offset: i }),
            b'a'..=b'z' | b'_' => {
                while i < bytes.len() && matches!(bytes[i], b'a'..=b'z' | b'0'..=b'9' | b'_') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(input[start..i].to_string()),
                    offset: start,
                });
                continue;
            }
            b'-' | b'0'..=b'9' => {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if c == b'-' && i == start + 1 {
                    return Err(lex_error(start, "`-` must be followed by digits"));
                }
                if i < bytes.len() && matches!(bytes[i], b'a'..=b'z' | b'_') {
                    return Err(lex_error(i, "identifier cannot start with a digit"));
                }
                out.push(Token {
                    tok: Tok::Int(input[start..i].to_string()),
                    offset: start,
                });
                continue;
            }
            b'"' => {
                let (value, end) = lex_string(input, start)?;
                out.push(Token {
                    tok: Tok::Str(value),
                    offset: start,
                });
                i = end;
                continue;
            }
            _ => {
                let ch = input[i..].chars().next().unwrap_or('?');
                return Err(lex_error(i, format!("unexpected character {ch:?}")));
            }
        }
        i += 1;
    }
    out.push(Token {
        tok: Tok::Eof,
        offset: input.len(),
    });
    Ok(out)
}

/// Lex a string literal opening at `start`; returns the value and the byte
/// offset just past the closing quote.
fn lex_string(input: &str, start: usize) -> Result<(String, usize), DslError> {
    let mut value = String::new();
    let mut chars = input[start + 1..].char_indices();
    while let Some((rel, ch)) = chars.next() {
        let at = start + 1 + rel;
        match ch {
            '"' => return Ok((value, at + 1)),
            '\\' => match chars.next() {
                Some((_, '"')) => value.push('"'),
                Some((_, '\\')) => value.push('\\'),
                Some((_, 'n')) => value.push('\n'),
                Some((_, 't')) => value.push('\t'),
                Some((_, other)) => {
                    return Err(lex_error(at, format!("unknown escape `\\{other}`")))
                }
                None => break,
            },
            _ => value.push(ch),
        }
    }
    Err(lex_error(start, "unterminated string literal"))
}
