//! Parser for the supported SPARQL subset: `PREFIX`, `SELECT`, and a `WHERE`
//! block of triple patterns with `OPTIONAL`, `FILTER` and top-level `UNION`.
//!
//! Prefixed names whose prefix is not declared are kept verbatim as IRIs, and
//! bare words are read as IRIs too, so `?x rdf:type Student` works without a
//! prologue.

use std::collections::HashMap;

use thiserror::Error;

use super::ast::{ArithOp, CompareOp, Expr, GroupPattern, Projection, Query, TermPattern, TriplePattern};
use crate::ingest::{Term, RDF_TYPE};

const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("parse error at line {line}, column {column}: expected {expected}")]
    Parse {
        line: usize,
        column: usize,
        expected: String,
    },
    #[error("unsupported feature: {0}")]
    Unsupported(String),
    #[error("query graph is disconnected: vertex {0} is unreachable from the start vertex")]
    Disconnected(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWarning(pub String);

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Iri(String),
    PName(String, String),
    Word(String),
    Var(String),
    Blank(String),
    Str(String),
    LangTag(String),
    Number(f64, String),
    Sym(&'static str),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    pos: usize,
}

const SYMBOLS: &[&str] = &[
    "^^", "&&", "||", "!=", "<=", ">=", "{", "}", "(", ")", ".", ",", ";", "*", "=", "<", ">", "!", "+", "-", "/", "|",
    "^",
];

fn lex(text: &str) -> Result<Vec<Spanned>, QueryError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c == b'<' && iri_end(text, i).is_some() {
            let end = iri_end(text, i).unwrap();
            i = end + 1;
            Tok::Iri(text[start + 1..end].to_string())
        } else if c == b'?' || c == b'$' {
            i += 1;
            let name_end = scan_name(text, i);
            if name_end == i {
                return Err(parse_error(text, start, "variable name"));
            }
            let name = text[i..name_end].to_string();
            i = name_end;
            Tok::Var(name)
        } else if c == b'_' && bytes.get(i + 1) == Some(&b':') {
            i += 2;
            let end = scan_local(text, i);
            let label = text[i..end].to_string();
            i = end;
            Tok::Blank(label)
        } else if c == b'"' || c == b'\'' {
            let (value, end) = scan_string(text, i)?;
            i = end;
            Tok::Str(value)
        } else if c == b'@' {
            i += 1;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'-') {
                i += 1;
            }
            Tok::LangTag(text[start + 1..i].to_string())
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let lexical = &text[start..i];
            Tok::Number(lexical.parse().expect("digits"), lexical.to_string())
        } else if c.is_ascii_alphabetic() || c == b'_' || c == b':' {
            let prefix_end = scan_name(text, i);
            if bytes.get(prefix_end) == Some(&b':') {
                let local_start = prefix_end + 1;
                let local_end = scan_local(text, local_start);
                i = local_end;
                Tok::PName(
                    text[start..prefix_end].to_string(),
                    text[local_start..local_end].to_string(),
                )
            } else {
                let end = scan_local(text, i);
                i = end;
                Tok::Word(text[start..end].to_string())
            }
        } else {
            let sym = SYMBOLS
                .iter()
                .find(|s| text[i..].starts_with(**s))
                .ok_or_else(|| parse_error(text, start, "a token"))?;
            i += sym.len();
            Tok::Sym(sym)
        };
        out.push(Spanned { tok, pos: start });
    }
    Ok(out)
}

/// Index of the closing `>` when `<` at `start` opens an IRI reference.
fn iri_end(text: &str, start: usize) -> Option<usize> {
    for (off, ch) in text[start + 1..].char_indices() {
        match ch {
            '>' => return Some(start + 1 + off),
            c if c.is_whitespace() || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`' | '\\') => return None,
            _ => {}
        }
    }
    None
}

fn scan_name(text: &str, start: usize) -> usize {
    let mut end = start;
    for (off, ch) in text[start..].char_indices() {
        if ch.is_alphanumeric() || ch == '_' || (off > 0 && ch == '-') {
            end = start + off + ch.len_utf8();
        } else {
            break;
        }
    }
    end
}

/// Local part of a prefixed name or bare word; a `.` only counts when another
/// name character follows it.
fn scan_local(text: &str, start: usize) -> usize {
    let chars: Vec<(usize, char)> = text[start..].char_indices().collect();
    let mut end = start;
    let mut k = 0;
    while k < chars.len() {
        let (off, ch) = chars[k];
        let name_char = |c: char| c.is_alphanumeric() || matches!(c, '_' | '-' | ':' | '%');
        if name_char(ch) || (ch == '.' && chars.get(k + 1).is_some_and(|&(_, n)| name_char(n))) {
            end = start + off + ch.len_utf8();
            k += 1;
        } else {
            break;
        }
    }
    end
}

fn scan_string(text: &str, start: usize) -> Result<(String, usize), QueryError> {
    let quote = text.as_bytes()[start] as char;
    let mut value = String::new();
    let mut chars = text[start + 1..].char_indices();
    while let Some((off, ch)) = chars.next() {
        match ch {
            c if c == quote => return Ok((value, start + 1 + off + 1)),
            '\\' => match chars.next() {
                Some((_, 'n')) => value.push('\n'),
                Some((_, 't')) => value.push('\t'),
                Some((_, 'r')) => value.push('\r'),
                Some((_, c @ ('"' | '\'' | '\\'))) => value.push(c),
                _ => return Err(parse_error(text, start + 1 + off, "a valid escape sequence")),
            },
            '\n' => break,
            c => value.push(c),
        }
    }
    Err(parse_error(text, start, "a terminated string literal"))
}

fn parse_error(text: &str, pos: usize, expected: &str) -> QueryError {
    let before = &text[..pos.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().unwrap_or("").chars().count() + 1;
    QueryError::Parse {
        line,
        column,
        expected: expected.to_string(),
    }
}

const UNSUPPORTED_KEYWORDS: &[&str] = &[
    "CONSTRUCT",
    "ASK",
    "DESCRIBE",
    "GRAPH",
    "SERVICE",
    "MINUS",
    "BIND",
    "VALUES",
    "GROUP",
    "HAVING",
    "LIMIT",
    "OFFSET",
    "FROM",
    "EXISTS",
    "NOT",
    "BOUND",
    "IN",
];

struct Parser<'a> {
    text: &'a str,
    toks: Vec<Spanned>,
    pos: usize,
    prefixes: HashMap<String, String>,
    warnings: Vec<ParseWarning>,
}

/// Parses a query, logging ignored modifiers.
pub fn parse_query(text: &str) -> Result<Query, QueryError> {
    let (query, warnings) = parse_query_with_warnings(text)?;
    for w in warnings {
        log::warn!("{}", w.0);
    }
    Ok(query)
}

pub fn parse_query_with_warnings(text: &str) -> Result<(Query, Vec<ParseWarning>), QueryError> {
    let mut p = Parser {
        text,
        toks: lex(text)?,
        pos: 0,
        prefixes: HashMap::new(),
        warnings: Vec::new(),
    };
    let query = p.query()?;
    Ok((query, p.warnings))
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|s| &s.tok)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        self.pos += 1;
        t
    }

    fn error(&self, expected: &str) -> QueryError {
        let pos = self.toks.get(self.pos).map(|s| s.pos).unwrap_or(self.text.len());
        parse_error(self.text, pos, expected)
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(w)) if w.eq_ignore_ascii_case(kw))
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn is_sym(&self, sym: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(s)) if *s == sym)
    }

    fn eat_sym(&mut self, sym: &str) -> bool {
        if self.is_sym(sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, sym: &str) -> Result<(), QueryError> {
        if self.eat_sym(sym) {
            Ok(())
        } else {
            Err(self.error(&format!("'{sym}'")))
        }
    }

    fn check_unsupported(&self) -> Result<(), QueryError> {
        if let Some(Tok::Word(w)) = self.peek() {
            let upper = w.to_ascii_uppercase();
            if UNSUPPORTED_KEYWORDS.contains(&upper.as_str()) {
                return Err(QueryError::Unsupported(upper));
            }
        }
        Ok(())
    }

    fn query(&mut self) -> Result<Query, QueryError> {
        loop {
            if self.eat_keyword("PREFIX") {
                let prefix = match self.next() {
                    Some(Tok::PName(p, local)) if local.is_empty() => p,
                    _ => {
                        self.pos -= 1;
                        return Err(self.error("prefix name ending in ':'"));
                    }
                };
                match self.next() {
                    Some(Tok::Iri(iri)) => {
                        self.prefixes.insert(prefix, iri);
                    }
                    _ => {
                        self.pos -= 1;
                        return Err(self.error("IRI after PREFIX name"));
                    }
                }
            } else if self.is_keyword("BASE") {
                return Err(QueryError::Unsupported("BASE".into()));
            } else {
                break;
            }
        }
        self.check_unsupported()?;
        if !self.eat_keyword("SELECT") {
            return Err(self.error("SELECT"));
        }
        for modifier in ["DISTINCT", "REDUCED"] {
            if self.eat_keyword(modifier) {
                self.warnings
                    .push(ParseWarning(format!("{modifier} is accepted but ignored")));
            }
        }
        let projection = if self.eat_sym("*") {
            Projection::All
        } else {
            let mut vars = Vec::new();
            while let Some(Tok::Var(v)) = self.peek() {
                vars.push(v.clone());
                self.pos += 1;
                self.eat_sym(",");
            }
            if vars.is_empty() {
                if self.is_sym("(") {
                    return Err(QueryError::Unsupported("projection expressions".into()));
                }
                return Err(self.error("projected variables or '*'"));
            }
            Projection::Variables(vars)
        };
        self.check_unsupported()?;
        self.eat_keyword("WHERE");
        let branches = self.top_level_group()?;
        self.solution_modifiers()?;
        if self.peek().is_some() {
            self.check_unsupported()?;
            return Err(self.error("end of query"));
        }
        Ok(Query { projection, branches })
    }

    fn solution_modifiers(&mut self) -> Result<(), QueryError> {
        if self.is_keyword("ORDER") {
            self.pos += 1;
            if !self.eat_keyword("BY") {
                return Err(self.error("BY"));
            }
            let start = self.pos;
            loop {
                if self.eat_keyword("ASC") || self.eat_keyword("DESC") {
                    self.parenthesized()?;
                } else if matches!(self.peek(), Some(Tok::Var(_))) {
                    self.pos += 1;
                } else if self.is_sym("(") {
                    self.parenthesized()?;
                } else {
                    break;
                }
            }
            if self.pos == start {
                return Err(self.error("ORDER BY condition"));
            }
            self.warnings
                .push(ParseWarning("ORDER BY is accepted but ignored".into()));
        }
        self.check_unsupported()
    }

    fn parenthesized(&mut self) -> Result<Expr, QueryError> {
        self.expect_sym("(")?;
        let e = self.expr()?;
        self.expect_sym(")")?;
        Ok(e)
    }

    /// The outer `{ ... }`; UNION chains are distributed into branches.
    fn top_level_group(&mut self) -> Result<Vec<GroupPattern>, QueryError> {
        self.expect_sym("{")?;
        let mut base = GroupPattern::default();
        let mut alternatives: Vec<Vec<GroupPattern>> = Vec::new();
        while !self.eat_sym("}") {
            if self.is_sym("{") {
                let mut chain = vec![self.group(0)?];
                while self.eat_keyword("UNION") {
                    chain.push(self.group(0)?);
                }
                if chain.len() == 1 {
                    merge_into(&mut base, chain.pop().unwrap());
                } else {
                    alternatives.push(chain);
                }
                self.eat_sym(".");
            } else {
                self.group_element(&mut base, 0)?;
            }
        }
        let mut branches = vec![base];
        for chain in alternatives {
            let mut next = Vec::with_capacity(branches.len() * chain.len());
            for b in &branches {
                for alt in &chain {
                    let mut merged = b.clone();
                    merge_into(&mut merged, alt.clone());
                    next.push(merged);
                }
            }
            branches = next;
        }
        Ok(branches)
    }

    fn group(&mut self, depth: usize) -> Result<GroupPattern, QueryError> {
        self.expect_sym("{")?;
        let mut g = GroupPattern::default();
        while !self.eat_sym("}") {
            if self.is_sym("{") {
                let inner = self.group(depth)?;
                if self.is_keyword("UNION") {
                    return Err(QueryError::Unsupported("UNION below the top level".into()));
                }
                merge_into(&mut g, inner);
                self.eat_sym(".");
            } else {
                self.group_element(&mut g, depth)?;
            }
        }
        Ok(g)
    }

    fn group_element(&mut self, g: &mut GroupPattern, depth: usize) -> Result<(), QueryError> {
        if self.peek().is_none() {
            return Err(self.error("'}'"));
        }
        self.check_unsupported()?;
        if self.eat_keyword("OPTIONAL") {
            let inner = self.group(depth + 1)?;
            g.optionals.push(inner);
            self.eat_sym(".");
        } else if self.eat_keyword("FILTER") {
            let e = if self.is_keyword("REGEX") {
                self.primary()?
            } else {
                self.parenthesized()?
            };
            g.filters.push(e);
            self.eat_sym(".");
        } else if self.is_keyword("UNION") {
            return Err(self.error("a group before UNION"));
        } else if self.eat_sym(".") {
        } else {
            self.triples_same_subject(&mut g.triples)?;
        }
        Ok(())
    }

    fn triples_same_subject(&mut self, out: &mut Vec<TriplePattern>) -> Result<(), QueryError> {
        let subject = self.term(false)?;
        loop {
            let predicate = self.predicate()?;
            loop {
                let object = self.term(true)?;
                out.push(TriplePattern {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                });
                if !self.eat_sym(",") {
                    break;
                }
            }
            if !self.eat_sym(";") {
                break;
            }
            if self.is_sym(".") || self.is_sym("}") {
                break;
            }
        }
        let next_element =
            self.is_sym("}") || self.is_sym("{") || self.is_keyword("FILTER") || self.is_keyword("OPTIONAL");
        if !self.eat_sym(".") && !next_element {
            if matches!(self.peek(), Some(Tok::Sym("/" | "|" | "*" | "+" | "^"))) {
                return Err(QueryError::Unsupported("property paths".into()));
            }
            return Err(self.error("'.' or '}' after triple pattern"));
        }
        Ok(())
    }

    fn predicate(&mut self) -> Result<TermPattern, QueryError> {
        if matches!(self.peek(), Some(Tok::Word(w)) if w == "a") {
            self.pos += 1;
            return Ok(TermPattern::Constant(Term::iri(RDF_TYPE)));
        }
        if matches!(self.peek(), Some(Tok::Sym("^" | "!" | "(")))
            || matches!(self.peek_at(1), Some(Tok::Sym("/" | "|" | "*" | "+" | "?")))
        {
            return Err(QueryError::Unsupported("property paths".into()));
        }
        match self.term(false)? {
            TermPattern::Constant(t) if t.is_literal() => Err(self.error("IRI or variable as predicate")),
            p => Ok(p),
        }
    }

    fn iri_from(&self, tok: &Tok) -> Option<String> {
        match tok {
            Tok::Iri(iri) => Some(iri.clone()),
            Tok::PName(p, local) => Some(match self.prefixes.get(p) {
                Some(ns) => format!("{ns}{local}"),
                None => format!("{p}:{local}"),
            }),
            Tok::Word(w) => Some(w.clone()),
            _ => None,
        }
    }

    fn term(&mut self, allow_literal: bool) -> Result<TermPattern, QueryError> {
        self.check_unsupported()?;
        let tok = self.peek().cloned().ok_or_else(|| self.error("a term"))?;
        let pattern = match &tok {
            Tok::Var(v) => TermPattern::Variable(v.clone()),
            Tok::Blank(b) => TermPattern::Variable(format!("_:{b}")),
            Tok::Iri(_) | Tok::PName(..) => TermPattern::Constant(Term::iri(self.iri_from(&tok).unwrap())),
            Tok::Word(w) if allow_literal && (w == "true" || w == "false") => TermPattern::Constant(
                Term::literal_lexical(format!("\"{w}\"^^<http://www.w3.org/2001/XMLSchema#boolean>")),
            ),
            Tok::Word(w) if !is_reserved(w) => TermPattern::Constant(Term::iri(w.clone())),
            Tok::Str(_) | Tok::Number(..) if allow_literal => {
                self.pos += 1;
                return Ok(TermPattern::Constant(self.literal_rest(tok)?));
            }
            _ => return Err(self.error("a variable, IRI or literal")),
        };
        self.pos += 1;
        Ok(pattern)
    }

    /// Completes a literal whose first token (string or number) was consumed.
    fn literal_rest(&mut self, first: Tok) -> Result<Term, QueryError> {
        match first {
            Tok::Number(_, lexical) => {
                let dt = if lexical.contains('.') {
                    XSD_DECIMAL
                } else {
                    XSD_INTEGER
                };
                Ok(Term::literal_lexical(format!("\"{lexical}\"^^<{dt}>")))
            }
            Tok::Str(value) => {
                let body = Term::literal(&value).lexical;
                match self.peek().cloned() {
                    Some(Tok::LangTag(tag)) => {
                        self.pos += 1;
                        Ok(Term::literal_lexical(format!("{body}@{tag}")))
                    }
                    Some(Tok::Sym("^^")) => {
                        self.pos += 1;
                        let tok = self.next().ok_or_else(|| self.error("datatype IRI"))?;
                        let dt = self.iri_from(&tok).ok_or_else(|| self.error("datatype IRI"))?;
                        Ok(Term::literal_lexical(format!("{body}^^<{dt}>")))
                    }
                    _ => Ok(Term::literal_lexical(body)),
                }
            }
            _ => Err(self.error("a literal")),
        }
    }

    fn expr(&mut self) -> Result<Expr, QueryError> {
        let mut left = self.and_expr()?;
        while self.eat_sym("||") {
            let right = self.and_expr()?;
            left = Expr::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn and_expr(&mut self) -> Result<Expr, QueryError> {
        let mut left = self.relational()?;
        while self.eat_sym("&&") {
            let right = self.relational()?;
            left = Expr::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn relational(&mut self) -> Result<Expr, QueryError> {
        let left = self.additive()?;
        let op = match self.peek() {
            Some(Tok::Sym("=")) => CompareOp::Eq,
            Some(Tok::Sym("!=")) => CompareOp::Ne,
            Some(Tok::Sym("<")) => CompareOp::Lt,
            Some(Tok::Sym("<=")) => CompareOp::Le,
            Some(Tok::Sym(">")) => CompareOp::Gt,
            Some(Tok::Sym(">=")) => CompareOp::Ge,
            _ => return Ok(left),
        };
        self.pos += 1;
        let right = self.additive()?;
        Ok(Expr::Compare(op, Box::new(left), Box::new(right)))
    }

    fn additive(&mut self) -> Result<Expr, QueryError> {
        let mut left = self.multiplicative()?;
        loop {
            let op = if self.eat_sym("+") {
                ArithOp::Add
            } else if self.eat_sym("-") {
                ArithOp::Sub
            } else {
                return Ok(left);
            };
            let right = self.multiplicative()?;
            left = Expr::Arith(op, Box::new(left), Box::new(right));
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, QueryError> {
        let mut left = self.unary()?;
        loop {
            let op = if self.eat_sym("*") {
                ArithOp::Mul
            } else if self.eat_sym("/") {
                ArithOp::Div
            } else {
                return Ok(left);
            };
            let right = self.unary()?;
            left = Expr::Arith(op, Box::new(left), Box::new(right));
        }
    }

    fn unary(&mut self) -> Result<Expr, QueryError> {
        if self.eat_sym("!") {
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        if self.eat_sym("-") {
            if let Some(Tok::Number(n, _)) = self.peek() {
                let n = *n;
                self.pos += 1;
                return Ok(Expr::Number(-n));
            }
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat_sym("+") {
            return self.unary();
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, QueryError> {
        self.check_unsupported()?;
        let tok = self.peek().cloned().ok_or_else(|| self.error("an expression"))?;
        match tok {
            Tok::Sym("(") => self.parenthesized(),
            Tok::Var(v) => {
                self.pos += 1;
                Ok(Expr::Variable(v))
            }
            Tok::Number(n, _) => {
                self.pos += 1;
                Ok(Expr::Number(n))
            }
            Tok::Str(_) => {
                self.pos += 1;
                Ok(Expr::Constant(self.literal_rest(tok)?))
            }
            Tok::Word(w) if w == "true" || w == "false" => {
                self.pos += 1;
                Ok(Expr::Bool(w == "true"))
            }
            Tok::Word(w) if w.eq_ignore_ascii_case("REGEX") => {
                self.pos += 1;
                self.expect_sym("(")?;
                let text = self.expr()?;
                self.expect_sym(",")?;
                let pattern = self.expr()?;
                let flags = if self.eat_sym(",") {
                    Some(Box::new(self.expr()?))
                } else {
                    None
                };
                self.expect_sym(")")?;
                Ok(Expr::Regex {
                    text: Box::new(text),
                    pattern: Box::new(pattern),
                    flags,
                })
            }
            Tok::Word(w) if matches!(self.peek_at(1), Some(Tok::Sym("("))) => {
                Err(QueryError::Unsupported(format!("function {}", w.to_ascii_uppercase())))
            }
            Tok::Iri(_) | Tok::PName(..) | Tok::Word(_) => {
                self.pos += 1;
                Ok(Expr::Constant(Term::iri(self.iri_from(&tok).unwrap())))
            }
            _ => Err(self.error("an expression")),
        }
    }
}

fn is_reserved(word: &str) -> bool {
    const RESERVED: &[&str] = &[
        "SELECT", "WHERE", "OPTIONAL", "FILTER", "UNION", "PREFIX", "ORDER", "DISTINCT",
    ];
    RESERVED.iter().any(|r| r.eq_ignore_ascii_case(word)) || word == "a"
}

fn merge_into(dst: &mut GroupPattern, src: GroupPattern) {
    dst.triples.extend(src.triples);
    dst.filters.extend(src.filters);
    dst.optionals.extend(src.optionals);
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const TRIANGLE: &str = "SELECT ?X, ?Y, ?Z WHERE
{?X rdf:type Student .
 ?Y rdf:type University .
 ?Z rdf:type Department .
 ?X undergradDegreeFrom ?Y .
 ?X memberOf ?Z .
 ?Z subOrganizationOf ?Y.}";

    const OPTIONAL_PRICE: &str = "SELECT ?price ?rating ?homepage WHERE
{ <product1> rdf:type <Product>. <product1> price ?price.
 OPTIONAL  {<product1> rating ?rating.
            <product1> homepage ?homepage.} }";

    const HIGHER_RATING: &str = "SELECT ?product WHERE
{ <product1> rdf:type <Product>. <product1> rating ?r1.
  ?product rdf:type <Product>. ?product rating ?r2.
  FILTER(?r2 > ?r1) }";

    const FEATURE_UNION: &str = "SELECT ?product WHERE
{ {?product rdf:type <Product>. ?P hasFeature <feature1>.}
  UNION
  {?product rdf:type <Product>. ?P hasFeature <feature2>.} }";

    #[test]
    fn parses_triangle_query() {
        let q = parse_query(TRIANGLE).unwrap();
        assert_eq!(
            q.projection,
            Projection::Variables(vec!["X".into(), "Y".into(), "Z".into()])
        );
        assert_eq!(q.branches.len(), 1);
        let b = &q.branches[0];
        assert_eq!(b.triples.len(), 6);
        assert_eq!(b.triples[0].predicate, TermPattern::Constant(Term::iri("rdf:type")));
        assert_eq!(b.triples[0].object, TermPattern::Constant(Term::iri("Student")));
        assert_eq!(b.triples[5].object, TermPattern::Variable("Y".into()));
    }

    #[test]
    fn parses_optional_block() {
        let q = parse_query(OPTIONAL_PRICE).unwrap();
        let b = &q.branches[0];
        assert_eq!(b.triples.len(), 2);
        assert_eq!(b.optionals.len(), 1);
        assert_eq!(b.optionals[0].triples.len(), 2);
    }

    #[test]
    fn parses_filter() {
        let q = parse_query(HIGHER_RATING).unwrap();
        let b = &q.branches[0];
        assert_eq!(b.triples.len(), 4);
        assert_eq!(
            b.filters,
            vec![Expr::Compare(
                CompareOp::Gt,
                Box::new(Expr::Variable("r2".into())),
                Box::new(Expr::Variable("r1".into()))
            )]
        );
    }

    #[test]
    fn parses_union_into_branches() {
        let q = parse_query(FEATURE_UNION).unwrap();
        assert_eq!(q.branches.len(), 2);
        assert!(q.branches.iter().all(|b| b.triples.len() == 2));
        assert_eq!(
            q.branches[1].triples[1].object,
            TermPattern::Constant(Term::iri("feature2"))
        );
    }

    #[test]
    fn union_distributes_over_outer_triples() {
        let q = parse_query("SELECT * WHERE { ?x <p> ?y . { ?y <q> ?z } UNION { ?y <r> ?z } }").unwrap();
        assert_eq!(q.branches.len(), 2);
        assert!(q.branches.iter().all(|b| b.triples.len() == 2));
        assert_eq!(q.projected_variables(), ["x", "y", "z"]);
    }

    #[test]
    fn prefixes_expand_and_a_means_type() {
        let q = parse_query(
            "PREFIX ub: <http://ex.org/ub#>\nSELECT ?x WHERE { ?x a ub:Student ; ub:name \"Bob\"@en , 42 . }",
        )
        .unwrap();
        let t = &q.branches[0].triples;
        assert_eq!(t.len(), 3);
        assert_eq!(t[0].predicate, TermPattern::Constant(Term::iri(RDF_TYPE)));
        assert_eq!(
            t[0].object,
            TermPattern::Constant(Term::iri("http://ex.org/ub#Student"))
        );
        assert_eq!(t[1].object, TermPattern::Constant(Term::literal_lexical("\"Bob\"@en")));
        assert_eq!(
            t[2].object,
            TermPattern::Constant(Term::literal_lexical(format!("\"42\"^^<{XSD_INTEGER}>")))
        );
    }

    #[test]
    fn modifiers_are_ignored_with_warnings() {
        let (q, w) = parse_query_with_warnings("SELECT DISTINCT ?x WHERE { ?x <p> ?y } ORDER BY ?x").unwrap();
        assert_eq!(q.branches[0].triples.len(), 1);
        assert_eq!(w.len(), 2);
    }

    #[test]
    fn rejects_unsupported_features() {
        for (text, feature) in [
            ("SELECT ?x WHERE { ?x <p> ?y } LIMIT 5", "LIMIT"),
            ("ASK { ?x <p> ?y }", "ASK"),
            ("SELECT ?x WHERE { ?x <p>/<q> ?y }", "property paths"),
            ("SELECT ?x WHERE { ?x <p> ?y FILTER(BOUND(?y)) }", "BOUND"),
            (
                "SELECT ?x WHERE { OPTIONAL { { ?x <p> ?y } UNION { ?x <q> ?y } } }",
                "UNION below the top level",
            ),
        ] {
            match parse_query(text) {
                Err(QueryError::Unsupported(name)) => assert_eq!(name, feature, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn reports_error_position() {
        match parse_query("SELECT ?x WHERE {\n  ?x <p> \n}") {
            Err(QueryError::Parse { line, column, .. }) => assert_eq!((line, column), (3, 1)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_query("SELECT WHERE { }"), Err(QueryError::Parse { .. })));
    }

    #[test]
    fn filter_expressions_parse_with_precedence() {
        let q = parse_query(
            "SELECT ?x WHERE { ?x <p> ?v FILTER(?v + 2 * 3 >= -1 && !(?v = 4) || regex(?x, \"^a\", \"i\")) }",
        )
        .unwrap();
        let f = &q.branches[0].filters[0];
        assert!(matches!(f, Expr::Or(_, _)));
        assert!(f.has_regex());
        assert_eq!(f.variables(), ["v", "x"]);
    }

    #[test]
    fn pretty_print_reparses_identically() {
        for text in [TRIANGLE, OPTIONAL_PRICE, HIGHER_RATING, FEATURE_UNION] {
            let q = parse_query(text).unwrap();
            let printed = q.to_string();
            assert_eq!(parse_query(&printed).unwrap(), q, "{printed}");
        }
    }
}
