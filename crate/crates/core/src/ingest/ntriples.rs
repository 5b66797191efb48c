//! Line-oriented N-Triples reader.

use std::borrow::Cow;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermKind {
    Iri,
    Literal,
    BlankNode,
}

/// An RDF term keyed by its lexical form.
///
/// IRIs are stored without angle brackets and blank nodes without the `_:`
/// prefix. Literals keep their quoted source form including any language tag
/// or datatype, so `"1"` and `"1"^^<xsd:int>` are different terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    pub kind: TermKind,
    pub lexical: String,
}

impl Term {
    pub fn iri(iri: impl Into<String>) -> Self {
        Term {
            kind: TermKind::Iri,
            lexical: iri.into(),
        }
    }

    pub fn blank(label: impl Into<String>) -> Self {
        Term {
            kind: TermKind::BlankNode,
            lexical: label.into(),
        }
    }

    /// Builds a plain literal from an unescaped value.
    pub fn literal(value: &str) -> Self {
        Term {
            kind: TermKind::Literal,
            lexical: format!("\"{}\"", escape_literal(value)),
        }
    }

    /// Builds a literal from its full quoted form, e.g. `"5"^^<xsd:int>`.
    pub fn literal_lexical(lexical: impl Into<String>) -> Self {
        Term {
            kind: TermKind::Literal,
            lexical: lexical.into(),
        }
    }

    pub fn is_literal(&self) -> bool {
        self.kind == TermKind::Literal
    }

    /// The value used for comparisons: the unescaped literal body for literals,
    /// the IRI or blank label otherwise.
    pub fn value(&self) -> Cow<'_, str> {
        match self.kind {
            TermKind::Literal => {
                let body = literal_body(&self.lexical);
                if body.contains('\\') {
                    Cow::Owned(unescape(body).unwrap_or_else(|_| body.to_string()))
                } else {
                    Cow::Borrowed(body)
                }
            }
            _ => Cow::Borrowed(&self.lexical),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TermKind::Iri => write!(f, "<{}>", self.lexical),
            TermKind::BlankNode => write!(f, "_:{}", self.lexical),
            TermKind::Literal => f.write_str(&self.lexical),
        }
    }
}

/// The text between the opening quote and the closing quote of a literal.
fn literal_body(lexical: &str) -> &str {
    let inner = lexical.strip_prefix('"').unwrap_or(lexical);
    let bytes = inner.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'"' => return &inner[..i],
            _ => i += 1,
        }
    }
    inner
}

pub(crate) fn escape_literal(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(body: &str) -> Result<String, &'static str> {
    let mut out = String::with_capacity(body.len());
    let mut chars = body.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('b') => out.push('\u{8}'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('f') => out.push('\u{c}'),
            Some('"') => out.push('"'),
            Some('\'') => out.push('\''),
            Some('\\') => out.push('\\'),
            Some('u') => out.push(hex_char(&mut chars, 4)?),
            Some('U') => out.push(hex_char(&mut chars, 8)?),
            _ => return Err("invalid escape sequence"),
        }
    }
    Ok(out)
}

fn hex_char(chars: &mut std::str::Chars<'_>, digits: usize) -> Result<char, &'static str> {
    let hex: String = chars.take(digits).collect();
    if hex.len() != digits {
        return Err("truncated unicode escape");
    }
    u32::from_str_radix(&hex, 16)
        .ok()
        .and_then(char::from_u32)
        .ok_or("invalid unicode escape")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTriple {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {reason}")]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub reason: String,
}

/// Parses a whole N-Triples document, failing on the first malformed line.
pub fn parse_ntriples(input: &str) -> Result<Vec<RawTriple>, SyntaxError> {
    let mut out = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        if let Some(triple) = parse_line(line, idx + 1)? {
            out.push(triple);
        }
    }
    Ok(out)
}

/// Parses a document, reporting malformed lines to `on_error` and skipping them.
pub fn parse_ntriples_lenient(input: &str, mut on_error: impl FnMut(SyntaxError)) -> Vec<RawTriple> {
    let mut out = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        match parse_line(line, idx + 1) {
            Ok(Some(triple)) => out.push(triple),
            Ok(None) => {}
            Err(e) => on_error(e),
        }
    }
    out
}

/// Parses one line; blank lines and comment lines yield `None`.
pub fn parse_line(line: &str, line_no: usize) -> Result<Option<RawTriple>, SyntaxError> {
    let mut cursor = Cursor {
        text: line,
        pos: 0,
        line: line_no,
    };
    cursor.skip_ws();
    if cursor.at_end() || cursor.peek() == Some('#') {
        return Ok(None);
    }
    let subject = match cursor.peek() {
        Some('<') => cursor.iri()?,
        Some('_') => cursor.blank()?,
        _ => return Err(cursor.error("expected IRI or blank node as subject")),
    };
    cursor.skip_ws();
    let predicate = match cursor.peek() {
        Some('<') => cursor.iri()?,
        _ => return Err(cursor.error("expected IRI as predicate")),
    };
    cursor.skip_ws();
    let object = match cursor.peek() {
        Some('<') => cursor.iri()?,
        Some('_') => cursor.blank()?,
        Some('"') => cursor.literal()?,
        _ => return Err(cursor.error("expected IRI, blank node or literal as object")),
    };
    cursor.skip_ws();
    if cursor.peek() != Some('.') {
        return Err(cursor.error("statement not terminated by '.'"));
    }
    cursor.bump();
    cursor.skip_ws();
    if !cursor.at_end() && cursor.peek() != Some('#') {
        return Err(cursor.error("unexpected content after '.'"));
    }
    Ok(Some(RawTriple {
        subject,
        predicate,
        object,
        line: line_no,
    }))
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn at_end(&self) -> bool {
        self.pos >= self.text.len()
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t' | '\r')) {
            self.pos += 1;
        }
    }

    fn error(&self, reason: impl Into<String>) -> SyntaxError {
        SyntaxError {
            line: self.line,
            column: self.text[..self.pos].chars().count() + 1,
            reason: reason.into(),
        }
    }

    fn iri(&mut self) -> Result<Term, SyntaxError> {
        self.bump();
        let start = self.pos;
        loop {
            match self.peek() {
                None => return Err(self.error("unterminated IRI")),
                Some('>') => break,
                Some(c @ (' ' | '<' | '"' | '{' | '}' | '|' | '^' | '`' | '\\')) => {
                    return Err(self.error(format!("illegal IRI character {c:?}")))
                }
                Some(c) if c <= ' ' => return Err(self.error("illegal control character in IRI")),
                Some(_) => {
                    self.bump();
                }
            }
        }
        let iri = &self.text[start..self.pos];
        self.bump();
        if iri.is_empty() {
            return Err(self.error("empty IRI"));
        }
        Ok(Term::iri(iri))
    }

    fn blank(&mut self) -> Result<Term, SyntaxError> {
        if !self.text[self.pos..].starts_with("_:") {
            return Err(self.error("expected '_:' blank node prefix"));
        }
        self.pos += 2;
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || matches!(c, '_' | '-' | '.') {
                self.bump();
            } else {
                break;
            }
        }
        // a trailing '.' belongs to the statement terminator
        while self.pos > start && self.text[..self.pos].ends_with('.') {
            self.pos -= 1;
        }
        if self.pos == start {
            return Err(self.error("empty blank node label"));
        }
        Ok(Term::blank(&self.text[start..self.pos]))
    }

    fn literal(&mut self) -> Result<Term, SyntaxError> {
        let start = self.pos;
        self.bump();
        loop {
            match self.bump() {
                None => return Err(self.error("unterminated literal")),
                Some('\\') => {
                    if self.bump().is_none() {
                        return Err(self.error("unterminated literal"));
                    }
                }
                Some('"') => break,
                Some(_) => {}
            }
        }
        let body_end = self.pos - 1;
        if let Err(reason) = unescape(&self.text[start + 1..body_end]) {
            return Err(self.error(reason));
        }
        match self.peek() {
            Some('@') => {
                self.bump();
                let tag_start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '-') {
                    self.bump();
                }
                if self.pos == tag_start {
                    return Err(self.error("empty language tag"));
                }
            }
            Some('^') => {
                if !self.text[self.pos..].starts_with("^^<") {
                    return Err(self.error("expected '^^<' before datatype IRI"));
                }
                self.pos += 2;
                self.iri()?;
            }
            _ => {}
        }
        Ok(Term::literal_lexical(&self.text[start..self.pos]))
    }
}
