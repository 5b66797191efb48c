//! FILTER evaluation.
//!
//! Comparisons are numeric when both sides parse as decimals and fall back to
//! lexicographic order on the lexical value otherwise. Any evaluation error
//! (unbound variable, type mismatch, bad regex) makes the filter false.

use std::cmp::Ordering;
use std::collections::HashMap;

use regex::{Regex, RegexBuilder};

use super::ast::{ArithOp, CompareOp, Expr};
use crate::ingest::{Term, TermKind};

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Num(f64),
    Str(String),
    Iri(String),
    Bool(bool),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterCost {
    /// At most one variable and no regex: evaluated when candidates are accessed.
    Cheap,
    /// Join conditions and regexes: evaluated on completed solutions.
    Expensive,
}

#[derive(Debug, Clone)]
pub struct FilterExpr {
    expr: Expr,
    variables: Vec<String>,
    cost: FilterCost,
    regexes: HashMap<(String, String), Regex>,
}

impl FilterExpr {
    pub fn new(expr: Expr) -> Self {
        let variables: Vec<String> = expr.variables().into_iter().map(String::from).collect();
        let cost = if variables.len() <= 1 && !expr.has_regex() {
            FilterCost::Cheap
        } else {
            FilterCost::Expensive
        };
        let mut regexes = HashMap::new();
        precompile(&expr, &mut regexes);
        FilterExpr {
            expr,
            variables,
            cost,
            regexes,
        }
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn cost(&self) -> FilterCost {
        self.cost
    }

    pub fn is_cheap(&self) -> bool {
        self.cost == FilterCost::Cheap
    }

    /// Evaluates the filter; `lookup` returns the bound term of a variable.
    pub fn eval<'t>(&self, lookup: &dyn Fn(&str) -> Option<&'t Term>) -> bool {
        match self.value(&self.expr, lookup) {
            Ok(v) => effective_boolean(&v).unwrap_or(false),
            Err(()) => false,
        }
    }

    fn value<'t>(&self, e: &Expr, lookup: &dyn Fn(&str) -> Option<&'t Term>) -> Result<Value, ()> {
        Ok(match e {
            Expr::Variable(v) => term_value(lookup(v).ok_or(())?),
            Expr::Constant(t) => term_value(t),
            Expr::Number(n) => Value::Num(*n),
            Expr::Bool(b) => Value::Bool(*b),
            Expr::Not(a) => Value::Bool(!effective_boolean(&self.value(a, lookup)?)?),
            Expr::Neg(a) => Value::Num(-numeric(&self.value(a, lookup)?)?),
            Expr::And(a, b) => {
                // errors on one side are absorbed by a false on the other
                let l = self.value(a, lookup).and_then(|v| effective_boolean(&v));
                let r = self.value(b, lookup).and_then(|v| effective_boolean(&v));
                match (l, r) {
                    (Ok(false), _) | (_, Ok(false)) => Value::Bool(false),
                    (Ok(true), Ok(true)) => Value::Bool(true),
                    _ => return Err(()),
                }
            }
            Expr::Or(a, b) => {
                let l = self.value(a, lookup).and_then(|v| effective_boolean(&v));
                let r = self.value(b, lookup).and_then(|v| effective_boolean(&v));
                match (l, r) {
                    (Ok(true), _) | (_, Ok(true)) => Value::Bool(true),
                    (Ok(false), Ok(false)) => Value::Bool(false),
                    _ => return Err(()),
                }
            }
            Expr::Compare(op, a, b) => {
                let ord = compare(&self.value(a, lookup)?, &self.value(b, lookup)?)?;
                Value::Bool(match op {
                    CompareOp::Eq => ord == Ordering::Equal,
                    CompareOp::Ne => ord != Ordering::Equal,
                    CompareOp::Lt => ord == Ordering::Less,
                    CompareOp::Le => ord != Ordering::Greater,
                    CompareOp::Gt => ord == Ordering::Greater,
                    CompareOp::Ge => ord != Ordering::Less,
                })
            }
            Expr::Arith(op, a, b) => {
                let (x, y) = (numeric(&self.value(a, lookup)?)?, numeric(&self.value(b, lookup)?)?);
                Value::Num(match op {
                    ArithOp::Add => x + y,
                    ArithOp::Sub => x - y,
                    ArithOp::Mul => x * y,
                    ArithOp::Div if y == 0.0 => return Err(()),
                    ArithOp::Div => x / y,
                })
            }
            Expr::Regex { text, pattern, flags } => {
                let text = string_of(&self.value(text, lookup)?);
                let pattern = string_of(&self.value(pattern, lookup)?);
                let flags = match flags {
                    Some(f) => string_of(&self.value(f, lookup)?),
                    None => String::new(),
                };
                let key = (pattern, flags);
                let matched = match self.regexes.get(&key) {
                    Some(re) => re.is_match(&text),
                    None => build_regex(&key.0, &key.1).ok_or(())?.is_match(&text),
                };
                Value::Bool(matched)
            }
        })
    }
}

fn precompile(e: &Expr, out: &mut HashMap<(String, String), Regex>) {
    match e {
        Expr::Regex { text, pattern, flags } => {
            precompile(text, out);
            let constant = |e: &Expr| match e {
                Expr::Constant(t) => Some(t.value().into_owned()),
                _ => None,
            };
            let flag_text = match flags {
                None => Some(String::new()),
                Some(f) => constant(f),
            };
            if let (Some(p), Some(f)) = (constant(pattern), flag_text) {
                if let Some(re) = build_regex(&p, &f) {
                    out.insert((p, f), re);
                }
            }
        }
        Expr::Not(a) | Expr::Neg(a) => precompile(a, out),
        Expr::And(a, b) | Expr::Or(a, b) | Expr::Compare(_, a, b) | Expr::Arith(_, a, b) => {
            precompile(a, out);
            precompile(b, out);
        }
        _ => {}
    }
}

fn build_regex(pattern: &str, flags: &str) -> Option<Regex> {
    RegexBuilder::new(pattern)
        .case_insensitive(flags.contains('i'))
        .multi_line(flags.contains('m'))
        .dot_matches_new_line(flags.contains('s'))
        .build()
        .ok()
}

fn term_value(t: &Term) -> Value {
    match t.kind {
        TermKind::Literal => {
            let v = t.value();
            if t.lexical.ends_with("#boolean>") {
                match v.as_ref() {
                    "true" => return Value::Bool(true),
                    "false" => return Value::Bool(false),
                    _ => {}
                }
            }
            Value::Str(v.into_owned())
        }
        TermKind::Iri | TermKind::BlankNode => Value::Iri(t.lexical.clone()),
    }
}

fn numeric(v: &Value) -> Result<f64, ()> {
    match v {
        Value::Num(n) => Ok(*n),
        Value::Str(s) => s.trim().parse::<f64>().map_err(|_| ()),
        _ => Err(()),
    }
}

fn string_of(v: &Value) -> String {
    match v {
        Value::Num(n) => format_number(*n),
        Value::Str(s) | Value::Iri(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
    }
}

fn format_number(n: f64) -> String {
    if n.fract() == 0.0 && n.abs() < 1e15 {
        format!("{}", n as i64)
    } else {
        n.to_string()
    }
}

fn effective_boolean(v: &Value) -> Result<bool, ()> {
    match v {
        Value::Bool(b) => Ok(*b),
        Value::Num(n) => Ok(*n != 0.0 && !n.is_nan()),
        Value::Str(s) => Ok(!s.is_empty()),
        Value::Iri(_) => Err(()),
    }
}

fn compare(a: &Value, b: &Value) -> Result<Ordering, ()> {
    match (a, b) {
        (Value::Bool(x), Value::Bool(y)) => Ok(x.cmp(y)),
        (Value::Bool(_), _) | (_, Value::Bool(_)) => Err(()),
        (Value::Iri(x), Value::Iri(y)) => Ok(x.cmp(y)),
        (Value::Iri(_), _) | (_, Value::Iri(_)) => Err(()),
        _ => match (numeric(a), numeric(b)) {
            (Ok(x), Ok(y)) => x.partial_cmp(&y).ok_or(()),
            _ => Ok(string_of(a).cmp(&string_of(b))),
        },
    }
}
