use std::fmt;

/// Parse tree of one protocol datagram.
///
/// Atoms keep their lexical form; numbers are interpreted by the typed decoders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    /// Bare token: no whitespace, parentheses, quotes or backslashes.
    Atom(String),
    /// Double-quoted string. May hold anything printable.
    Quoted(String),
    List(Vec<SExpr>),
}

/// Nesting deeper than this is rejected; real messages stay below 5.
pub const MAX_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("unbalanced parentheses at byte {0}")]
    UnbalancedParens(usize),
    #[error("illegal character at byte {0}")]
    IllegalCharacter(usize),
    #[error("unterminated string starting at byte {0}")]
    UnterminatedString(usize),
    #[error("unexpected input after expression at byte {0}")]
    TrailingInput(usize),
    #[error("nesting deeper than {MAX_DEPTH} at byte {0}")]
    TooDeep(usize),
    #[error("empty message")]
    Empty,
}

impl SExpr {
    pub fn atom(s: impl Into<String>) -> SExpr {
        SExpr::Atom(s.into())
    }

    pub fn list(items: impl IntoIterator<Item = SExpr>) -> SExpr {
        SExpr::List(items.into_iter().collect())
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(s) => Some(s),
            _ => None,
        }
    }

    /// Text of an atom or a quoted string.
    pub fn as_text(&self) -> Option<&str> {
        match self {
            SExpr::Atom(s) | SExpr::Quoted(s) => Some(s),
            SExpr::List(_) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items) => Some(items),
            _ => None,
        }
    }

    /// Head atom of a list, e.g. `see` for `(see 12 ...)`.
    pub fn head(&self) -> Option<&str> {
        self.as_list()?.first()?.as_atom()
    }

    /// True when every atom is a valid bare token, so that printing and
    /// re-parsing yields the same tree.
    pub fn is_canonical(&self) -> bool {
        match self {
            SExpr::Atom(s) => is_bare_token(s),
            SExpr::Quoted(s) => s.bytes().all(is_printable),
            SExpr::List(items) => items.iter().all(SExpr::is_canonical),
        }
    }
}

fn is_printable(b: u8) -> bool {
    (0x20..0x7f).contains(&b)
}

fn is_delimiter(b: u8) -> bool {
    matches!(b, b'(' | b')' | b'"' | b'\\') || b.is_ascii_whitespace()
}

/// Whether `s` can be written as an unquoted atom.
pub fn is_bare_token(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| is_printable(b) && !is_delimiter(b))
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Atom(s) => f.write_str(s),
            SExpr::Quoted(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    if c == '"' || c == '\\' {
                        f.write_str("\\")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str("\"")
            }
            SExpr::List(items) => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Parses one datagram payload. A trailing NUL terminator is accepted.
pub fn parse_sexpr(text: &str) -> Result<SExpr, ParseError> {
    parse_bytes(text.as_bytes())
}

pub fn parse_bytes(raw: &[u8]) -> Result<SExpr, ParseError> {
    let mut end = raw.len();
    while end > 0 && raw[end - 1] == 0 {
        end -= 1;
    }
    let bytes = &raw[..end];

    // Open lists, innermost last, with the byte offset of their '('.
    let mut stack: Vec<(usize, Vec<SExpr>)> = Vec::new();
    let mut done: Option<SExpr> = None;
    let mut i = 0;

    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if done.is_some() {
            return Err(if b == b')' {
                ParseError::UnbalancedParens(i)
            } else {
                ParseError::TrailingInput(i)
            });
        }
        let item = match b {
            b'(' => {
                if stack.len() >= MAX_DEPTH {
                    return Err(ParseError::TooDeep(i));
                }
                stack.push((i, Vec::new()));
                i += 1;
                continue;
            }
            b')' => {
                let (_, items) = stack.pop().ok_or(ParseError::UnbalancedParens(i))?;
                i += 1;
                SExpr::List(items)
            }
            b'"' => {
                let start = i;
                i += 1;
                let mut s = String::new();
                loop {
                    match bytes.get(i) {
                        None => return Err(ParseError::UnterminatedString(start)),
                        Some(b'"') => {
                            i += 1;
                            break;
                        }
                        Some(b'\\') => {
                            let next = *bytes.get(i + 1).ok_or(ParseError::UnterminatedString(start))?;
                            if !is_printable(next) {
                                return Err(ParseError::IllegalCharacter(i + 1));
                            }
                            s.push(next as char);
                            i += 2;
                        }
                        Some(&c) if is_printable(c) => {
                            s.push(c as char);
                            i += 1;
                        }
                        Some(_) => return Err(ParseError::IllegalCharacter(i)),
                    }
                }
                SExpr::Quoted(s)
            }
            b'\\' => return Err(ParseError::IllegalCharacter(i)),
            c if is_printable(c) => {
                let start = i;
                while i < bytes.len() && is_printable(bytes[i]) && !is_delimiter(bytes[i]) {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'\\' {
                    return Err(ParseError::IllegalCharacter(i));
                }
                // printable ASCII only, so this is valid UTF-8
                SExpr::Atom(String::from_utf8_lossy(&bytes[start..i]).into_owned())
            }
            _ => return Err(ParseError::IllegalCharacter(i)),
        };
        match stack.last_mut() {
            Some((_, items)) => items.push(item),
            None => done = Some(item),
        }
    }

    if let Some((open, _)) = stack.last() {
        return Err(ParseError::UnbalancedParens(*open));
    }
    done.ok_or(ParseError::Empty)
}
