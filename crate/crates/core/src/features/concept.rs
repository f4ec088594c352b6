//! Concept and role expressions.
//!
//! Textual form is an s-expression:
//! `top`, `bottom`, `(prim p i)`, `(gprim p i)`, `(type t)`, `(one c)`,
//! `(not C)`, `(and C D)`, `(exists R C)`, `(forall R C)` for concepts and
//! `(role p)`, `(grole p)`, `(inv R)`, `(tc R)` for roles.

use std::fmt;

use thiserror::Error;

use crate::model::DomainSpec;
use crate::pddl::sexpr::{read_all, Sexpr};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Prim(String),
    GoalPrim(String),
    Inverse(Box<Role>),
    TransitiveClosure(Box<Role>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Concept {
    Top,
    Bottom,
    /// Objects at argument position `.1` of some `.0` atom.
    Prim(String, usize),
    GoalPrim(String, usize),
    /// Objects of a declared type (or a subtype).
    Type(String),
    Nominal(String),
    Not(Box<Concept>),
    And(Box<Concept>, Box<Concept>),
    Exists(Role, Box<Concept>),
    Forall(Role, Box<Concept>),
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ConceptError {
    #[error("malformed expression `{0}`")]
    Syntax(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
}

impl Role {
    pub fn complexity(&self) -> usize {
        match self {
            Role::Prim(_) | Role::GoalPrim(_) => 1,
            Role::Inverse(r) | Role::TransitiveClosure(r) => 1 + r.complexity(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Role::Prim(_) | Role::GoalPrim(_) => 1,
            Role::Inverse(r) | Role::TransitiveClosure(r) => 1 + r.depth(),
        }
    }

    pub fn inv(self) -> Role {
        Role::Inverse(Box::new(self))
    }

    pub fn tc(self) -> Role {
        Role::TransitiveClosure(Box::new(self))
    }

    fn pretty(&self) -> String {
        match self {
            Role::Prim(p) => p.clone(),
            Role::GoalPrim(p) => format!("{p}_g"),
            Role::Inverse(r) => format!("{}⁻", r.pretty()),
            Role::TransitiveClosure(r) => format!("{}⁺", r.pretty()),
        }
    }

    fn check(&self, d: &DomainSpec) -> Result<(), ConceptError> {
        match self {
            Role::Prim(p) | Role::GoalPrim(p) => match d.predicate(p) {
                Some(sig) if sig.arity() == 2 => Ok(()),
                _ => Err(ConceptError::UnknownSymbol(p.clone())),
            },
            Role::Inverse(r) | Role::TransitiveClosure(r) => r.check(d),
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Prim(p) => write!(f, "(role {p})"),
            Role::GoalPrim(p) => write!(f, "(grole {p})"),
            Role::Inverse(r) => write!(f, "(inv {r})"),
            Role::TransitiveClosure(r) => write!(f, "(tc {r})"),
        }
    }
}

impl Concept {
    pub fn prim(p: &str, pos: usize) -> Concept {
        Concept::Prim(p.to_string(), pos)
    }

    pub fn goal(p: &str, pos: usize) -> Concept {
        Concept::GoalPrim(p.to_string(), pos)
    }

    pub fn not(c: Concept) -> Concept {
        Concept::Not(Box::new(c))
    }

    pub fn and(a: Concept, b: Concept) -> Concept {
        Concept::And(Box::new(a), Box::new(b))
    }

    pub fn exists(r: Role, c: Concept) -> Concept {
        Concept::Exists(r, Box::new(c))
    }

    pub fn forall(r: Role, c: Concept) -> Concept {
        Concept::Forall(r, Box::new(c))
    }

    /// Node count, roles included.
    pub fn complexity(&self) -> usize {
        match self {
            Concept::Top
            | Concept::Bottom
            | Concept::Prim(..)
            | Concept::GoalPrim(..)
            | Concept::Type(_)
            | Concept::Nominal(_) => 1,
            Concept::Not(c) => 1 + c.complexity(),
            Concept::And(a, b) => 1 + a.complexity() + b.complexity(),
            Concept::Exists(r, c) | Concept::Forall(r, c) => 1 + r.complexity() + c.complexity(),
        }
    }

    /// Tree height; leaves have depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Concept::Top
            | Concept::Bottom
            | Concept::Prim(..)
            | Concept::GoalPrim(..)
            | Concept::Type(_)
            | Concept::Nominal(_) => 1,
            Concept::Not(c) => 1 + c.depth(),
            Concept::And(a, b) => 1 + a.depth().max(b.depth()),
            Concept::Exists(r, c) | Concept::Forall(r, c) => 1 + r.depth().max(c.depth()),
        }
    }

    /// Key of the static ordering: complexity, then canonical text.
    pub fn order_key(&self) -> (usize, String) {
        (self.complexity(), self.to_string())
    }

    /// Description-logic notation, e.g. `∃on⁺.clear_g`.
    pub fn pretty(&self) -> String {
        match self {
            Concept::Top => "⊤".into(),
            Concept::Bottom => "⊥".into(),
            Concept::Prim(p, 0) => p.clone(),
            Concept::Prim(p, i) => format!("{p}[{i}]"),
            Concept::GoalPrim(p, 0) => format!("{p}_g"),
            Concept::GoalPrim(p, i) => format!("{p}_g[{i}]"),
            Concept::Type(t) => format!("<{t}>"),
            Concept::Nominal(c) => format!("{{{c}}}"),
            Concept::Not(c) => format!("¬{}", c.pretty()),
            Concept::And(a, b) => format!("({} ⊓ {})", a.pretty(), b.pretty()),
            Concept::Exists(r, c) => format!("∃{}.{}", r.pretty(), c.pretty()),
            Concept::Forall(r, c) => format!("∀{}.{}", r.pretty(), c.pretty()),
        }
    }

    /// Checks predicates, positions, types and constants against a domain.
    /// Nominals may also name instance objects, which is checked at binding.
    pub fn check(&self, d: &DomainSpec) -> Result<(), ConceptError> {
        match self {
            Concept::Top | Concept::Bottom | Concept::Nominal(_) => Ok(()),
            Concept::Prim(p, i) | Concept::GoalPrim(p, i) => match d.predicate(p) {
                Some(sig) if *i < sig.arity() => Ok(()),
                _ => Err(ConceptError::UnknownSymbol(format!("{p}[{i}]"))),
            },
            Concept::Type(t) => {
                if d.type_names().contains(t.as_str()) {
                    Ok(())
                } else {
                    Err(ConceptError::UnknownSymbol(t.clone()))
                }
            }
            Concept::Not(c) => c.check(d),
            Concept::And(a, b) => {
                a.check(d)?;
                b.check(d)
            }
            Concept::Exists(r, c) | Concept::Forall(r, c) => {
                r.check(d)?;
                c.check(d)
            }
        }
    }

    pub fn parse(text: &str) -> Result<Concept, ConceptError> {
        let exprs = read_all(text, "<concept>", false).map_err(|e| ConceptError::Syntax(e.message))?;
        match exprs.as_slice() {
            [e] => concept(e),
            _ => Err(ConceptError::Syntax(text.to_string())),
        }
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Concept::Top => write!(f, "top"),
            Concept::Bottom => write!(f, "bottom"),
            Concept::Prim(p, i) => write!(f, "(prim {p} {i})"),
            Concept::GoalPrim(p, i) => write!(f, "(gprim {p} {i})"),
            Concept::Type(t) => write!(f, "(type {t})"),
            Concept::Nominal(c) => write!(f, "(one {c})"),
            Concept::Not(c) => write!(f, "(not {c})"),
            Concept::And(a, b) => write!(f, "(and {a} {b})"),
            Concept::Exists(r, c) => write!(f, "(exists {r} {c})"),
            Concept::Forall(r, c) => write!(f, "(forall {r} {c})"),
        }
    }
}

fn bad(e: &Sexpr) -> ConceptError {
    ConceptError::Syntax(e.to_string())
}

fn name(e: &Sexpr) -> Result<String, ConceptError> {
    e.as_atom().map(str::to_string).ok_or_else(|| bad(e))
}

fn index(e: &Sexpr) -> Result<usize, ConceptError> {
    e.as_atom().and_then(|s| s.parse().ok()).ok_or_else(|| bad(e))
}

fn concept(e: &Sexpr) -> Result<Concept, ConceptError> {
    if let Some(a) = e.as_atom() {
        return match a {
            "top" => Ok(Concept::Top),
            "bottom" => Ok(Concept::Bottom),
            _ => Err(bad(e)),
        };
    }
    let items = e.as_list().ok_or_else(|| bad(e))?;
    match (e.head(), items) {
        (Some("prim"), [_, p, i]) => Ok(Concept::Prim(name(p)?, index(i)?)),
        (Some("gprim"), [_, p, i]) => Ok(Concept::GoalPrim(name(p)?, index(i)?)),
        (Some("type"), [_, t]) => Ok(Concept::Type(name(t)?)),
        (Some("one"), [_, c]) => Ok(Concept::Nominal(name(c)?)),
        (Some("not"), [_, c]) => Ok(Concept::not(concept(c)?)),
        (Some("and"), [_, a, b]) => Ok(Concept::and(concept(a)?, concept(b)?)),
        (Some("exists"), [_, r, c]) => Ok(Concept::exists(role(r)?, concept(c)?)),
        (Some("forall"), [_, r, c]) => Ok(Concept::forall(role(r)?, concept(c)?)),
        _ => Err(bad(e)),
    }
}

fn role(e: &Sexpr) -> Result<Role, ConceptError> {
    let items = e.as_list().ok_or_else(|| bad(e))?;
    match (e.head(), items) {
        (Some("role"), [_, p]) => Ok(Role::Prim(name(p)?)),
        (Some("grole"), [_, p]) => Ok(Role::GoalPrim(name(p)?)),
        (Some("inv"), [_, r]) => Ok(role(r)?.inv()),
        (Some("tc"), [_, r]) => Ok(role(r)?.tc()),
        _ => Err(bad(e)),
    }
}
