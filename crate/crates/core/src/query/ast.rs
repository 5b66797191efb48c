use std::fmt;

use crate::ingest::{Term, TermKind};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TermPattern {
    /// `?name`; blank nodes in patterns are stored as variables named `_:label`.
    Variable(String),
    Constant(Term),
}

impl TermPattern {
    pub fn variable(&self) -> Option<&str> {
        match self {
            TermPattern::Variable(v) => Some(v),
            TermPattern::Constant(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    pub subject: TermPattern,
    pub predicate: TermPattern,
    pub object: TermPattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Variable(String),
    Constant(Term),
    Number(f64),
    Bool(bool),
    Not(Box<Expr>),
    Neg(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Compare(CompareOp, Box<Expr>, Box<Expr>),
    Arith(ArithOp, Box<Expr>, Box<Expr>),
    Regex {
        text: Box<Expr>,
        pattern: Box<Expr>,
        flags: Option<Box<Expr>>,
    },
}

impl Expr {
    /// Distinct variables in first-occurrence order.
    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Variable(v) => {
                if !out.contains(&v.as_str()) {
                    out.push(v);
                }
            }
            Expr::Constant(_) | Expr::Number(_) | Expr::Bool(_) => {}
            Expr::Not(e) | Expr::Neg(e) => e.collect_vars(out),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Compare(_, a, b) | Expr::Arith(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Regex { text, pattern, flags } => {
                text.collect_vars(out);
                pattern.collect_vars(out);
                if let Some(f) = flags {
                    f.collect_vars(out);
                }
            }
        }
    }

    pub fn has_regex(&self) -> bool {
        match self {
            Expr::Regex { .. } => true,
            Expr::Variable(_) | Expr::Constant(_) | Expr::Number(_) | Expr::Bool(_) => false,
            Expr::Not(e) | Expr::Neg(e) => e.has_regex(),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Compare(_, a, b) | Expr::Arith(_, a, b) => {
                a.has_regex() || b.has_regex()
            }
        }
    }
}

/// A `{ ... }` block: required triples, filters and nested OPTIONAL blocks.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroupPattern {
    pub triples: Vec<TriplePattern>,
    pub filters: Vec<Expr>,
    pub optionals: Vec<GroupPattern>,
}

impl GroupPattern {
    /// Nested OPTIONAL blocks in pre-order, each with the pre-order index of
    /// its enclosing block (`None` for blocks directly inside `self`).
    pub fn optional_blocks(&self) -> Vec<(Option<usize>, &GroupPattern)> {
        fn walk<'a>(g: &'a GroupPattern, parent: Option<usize>, out: &mut Vec<(Option<usize>, &'a GroupPattern)>) {
            for o in &g.optionals {
                let idx = out.len();
                out.push((parent, o));
                walk(o, Some(idx), out);
            }
        }
        let mut out = Vec::new();
        walk(self, None, &mut out);
        out
    }

    /// Variables in first-occurrence order over triples, then optional blocks.
    pub fn variables(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        for t in &self.triples {
            for p in [&t.subject, &t.predicate, &t.object] {
                if let TermPattern::Variable(v) = p {
                    if !v.starts_with("_:") && !out.contains(v) {
                        out.push(v.clone());
                    }
                }
            }
        }
        for o in &self.optionals {
            o.collect_vars(out);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projection {
    All,
    Variables(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub projection: Projection,
    /// One entry per UNION branch; a query without UNION has exactly one.
    pub branches: Vec<GroupPattern>,
}

impl Query {
    /// Projected variable names in output column order.
    pub fn projected_variables(&self) -> Vec<String> {
        match &self.projection {
            Projection::Variables(v) => v.clone(),
            Projection::All => {
                let mut out: Vec<String> = Vec::new();
                for b in &self.branches {
                    for v in b.variables() {
                        if !out.contains(&v) {
                            out.push(v);
                        }
                    }
                }
                out
            }
        }
    }
}

fn fmt_term(f: &mut fmt::Formatter<'_>, t: &Term) -> fmt::Result {
    match t.kind {
        TermKind::BlankNode => write!(f, "<_:{}>", t.lexical),
        _ => write!(f, "{t}"),
    }
}

impl fmt::Display for TermPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermPattern::Variable(v) if v.starts_with("_:") => f.write_str(v),
            TermPattern::Variable(v) => write!(f, "?{v}"),
            TermPattern::Constant(t) => fmt_term(f, t),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Variable(v) => write!(f, "?{v}"),
            Expr::Constant(t) => fmt_term(f, t),
            Expr::Number(n) => write!(f, "{n:?}"),
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Not(e) => write!(f, "(!{e})"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::And(a, b) => write!(f, "({a} && {b})"),
            Expr::Or(a, b) => write!(f, "({a} || {b})"),
            Expr::Compare(op, a, b) => {
                let op = match op {
                    CompareOp::Eq => "=",
                    CompareOp::Ne => "!=",
                    CompareOp::Lt => "<",
                    CompareOp::Le => "<=",
                    CompareOp::Gt => ">",
                    CompareOp::Ge => ">=",
                };
                write!(f, "({a} {op} {b})")
            }
            Expr::Arith(op, a, b) => {
                let op = match op {
                    ArithOp::Add => "+",
                    ArithOp::Sub => "-",
                    ArithOp::Mul => "*",
                    ArithOp::Div => "/",
                };
                write!(f, "({a} {op} {b})")
            }
            Expr::Regex { text, pattern, flags } => {
                write!(f, "REGEX({text}, {pattern}")?;
                if let Some(fl) = flags {
                    write!(f, ", {fl}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl GroupPattern {
    fn fmt_indented(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        let pad = "  ".repeat(depth + 1);
        writeln!(f, "{{")?;
        for t in &self.triples {
            writeln!(f, "{pad}{} {} {} .", t.subject, t.predicate, t.object)?;
        }
        for o in &self.optionals {
            write!(f, "{pad}OPTIONAL ")?;
            o.fmt_indented(f, depth + 1)?;
            writeln!(f)?;
        }
        for e in &self.filters {
            writeln!(f, "{pad}FILTER({e})")?;
        }
        write!(f, "{}}}", "  ".repeat(depth))
    }
}

impl fmt::Display for GroupPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_indented(f, 0)
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SELECT")?;
        match &self.projection {
            Projection::All => f.write_str(" *")?,
            Projection::Variables(vs) => {
                for v in vs {
                    write!(f, " ?{v}")?;
                }
            }
        }
        f.write_str(" WHERE ")?;
        if self.branches.len() == 1 {
            self.branches[0].fmt_indented(f, 0)
        } else {
            writeln!(f, "{{")?;
            for (i, b) in self.branches.iter().enumerate() {
                if i > 0 {
                    writeln!(f, "  UNION")?;
                }
                f.write_str("  ")?;
                b.fmt_indented(f, 1)?;
                writeln!(f)?;
            }
            f.write_str("}")
        }
    }
}
