//! Lifted domain and instance descriptions.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

/// Name of the implicit root type.
pub const ROOT_TYPE: &str = "object";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TypeError {
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("unknown variable `{var}` in schema `{schema}`")]
    UnknownVariable { schema: String, var: String },
    #[error("predicate `{predicate}` expects {expected} arguments, got {got}")]
    Arity {
        predicate: String,
        expected: usize,
        got: usize,
    },
    #[error("argument `{arg}` of `{predicate}` has type `{actual}`, expected `{expected}`")]
    IllTyped {
        predicate: String,
        arg: String,
        actual: String,
        expected: String,
    },
    #[error("object `{0}` declared twice")]
    DuplicateObject(String),
    #[error("predicate `{0}` declared twice")]
    DuplicatePredicate(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
}

impl TypedName {
    pub fn new(name: impl Into<String>, ty: impl Into<String>) -> Self {
        TypedName {
            name: name.into(),
            ty: ty.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: String,
    pub parent: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateSig {
    pub name: String,
    pub params: Vec<TypedName>,
}

impl PredicateSig {
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    /// Schema parameter, stored with its leading `?`.
    Var(String),
    Const(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) | Term::Const(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AtomPattern {
    pub predicate: String,
    pub args: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Literal {
    pub positive: bool,
    pub atom: AtomPattern,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<TypedName>,
    pub precondition: Vec<Literal>,
    pub add: Vec<AtomPattern>,
    pub del: Vec<AtomPattern>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainSpec {
    pub name: String,
    pub requirements: Vec<String>,
    pub types: Vec<TypeDecl>,
    pub constants: Vec<TypedName>,
    pub predicates: Vec<PredicateSig>,
    pub schemas: Vec<ActionSchema>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl GroundAtom {
    pub fn new<S: Into<String>>(predicate: impl Into<String>, args: impl IntoIterator<Item = S>) -> Self {
        GroundAtom {
            predicate: predicate.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceSpec {
    pub name: String,
    pub domain: String,
    pub objects: Vec<TypedName>,
    pub init: Vec<GroundAtom>,
    pub goal: Vec<GroundAtom>,
}

impl DomainSpec {
    pub fn predicate(&self, name: &str) -> Option<&PredicateSig> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn type_names(&self) -> BTreeSet<&str> {
        let mut out: BTreeSet<&str> = self.types.iter().map(|t| t.name.as_str()).collect();
        out.insert(ROOT_TYPE);
        out
    }

    fn parent_map(&self) -> HashMap<&str, &str> {
        self.types
            .iter()
            .map(|t| (t.name.as_str(), t.parent.as_str()))
            .collect()
    }

    /// `sub` equals `sup` or descends from it.
    pub fn is_subtype(&self, sub: &str, sup: &str) -> bool {
        if sup == ROOT_TYPE || sub == sup {
            return true;
        }
        let parents = self.parent_map();
        let mut cur = sub;
        let mut steps = 0;
        while let Some(&p) = parents.get(cur) {
            if p == sup {
                return true;
            }
            cur = p;
            steps += 1;
            if steps > self.types.len() {
                break;
            }
        }
        false
    }

    /// Predicates that occur in some add or delete effect.
    pub fn fluent_predicates(&self) -> BTreeSet<&str> {
        self.schemas
            .iter()
            .flat_map(|s| s.add.iter().chain(s.del.iter()))
            .map(|a| a.predicate.as_str())
            .collect()
    }

    /// Checks declarations and schema bodies against each other.
    pub fn validate(&self) -> Result<(), TypeError> {
        let types = self.type_names();
        for t in &self.types {
            if !types.contains(t.parent.as_str()) {
                return Err(TypeError::UnknownType(t.parent.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for p in &self.predicates {
            if !seen.insert(&p.name) {
                return Err(TypeError::DuplicatePredicate(p.name.clone()));
            }
            for param in &p.params {
                if !types.contains(param.ty.as_str()) {
                    return Err(TypeError::UnknownType(param.ty.clone()));
                }
            }
        }
        let mut consts = BTreeSet::new();
        for c in &self.constants {
            if !types.contains(c.ty.as_str()) {
                return Err(TypeError::UnknownType(c.ty.clone()));
            }
            if !consts.insert(&c.name) {
                return Err(TypeError::DuplicateObject(c.name.clone()));
            }
        }
        for s in &self.schemas {
            let vars: BTreeMap<&str, &str> = s
                .params
                .iter()
                .map(|p| (p.name.as_str(), p.ty.as_str()))
                .collect();
            for p in &s.params {
                if !types.contains(p.ty.as_str()) {
                    return Err(TypeError::UnknownType(p.ty.clone()));
                }
            }
            let atoms = s
                .precondition
                .iter()
                .map(|l| &l.atom)
                .chain(s.add.iter())
                .chain(s.del.iter());
            for atom in atoms {
                let sig = self
                    .predicate(&atom.predicate)
                    .ok_or_else(|| TypeError::UnknownPredicate(atom.predicate.clone()))?;
                if sig.arity() != atom.args.len() {
                    return Err(TypeError::Arity {
                        predicate: atom.predicate.clone(),
                        expected: sig.arity(),
                        got: atom.args.len(),
                    });
                }
                for term in &atom.args {
                    match term {
                        Term::Var(v) if !vars.contains_key(v.as_str()) => {
                            return Err(TypeError::UnknownVariable {
                                schema: s.name.clone(),
                                var: v.clone(),
                            })
                        }
                        Term::Const(c) if !consts.contains(c) => {
                            return Err(TypeError::UnknownObject(c.clone()))
                        }
                        _ => {}
                    }
                }
            }
        }
        Ok(())
    }
}

impl InstanceSpec {
    /// Type-checks objects, init and goal against `domain`.
    pub fn validate(&self, domain: &DomainSpec) -> Result<(), TypeError> {
        let types = domain.type_names();
        let mut objects: BTreeMap<&str, &str> = domain
            .constants
            .iter()
            .map(|c| (c.name.as_str(), c.ty.as_str()))
            .collect();
        for o in &self.objects {
            if !types.contains(o.ty.as_str()) {
                return Err(TypeError::UnknownType(o.ty.clone()));
            }
            if objects.insert(&o.name, &o.ty).is_some() {
                return Err(TypeError::DuplicateObject(o.name.clone()));
            }
        }
        for atom in self.init.iter().chain(self.goal.iter()) {
            let sig = domain
                .predicate(&atom.predicate)
                .ok_or_else(|| TypeError::UnknownPredicate(atom.predicate.clone()))?;
            if sig.arity() != atom.args.len() {
                return Err(TypeError::Arity {
                    predicate: atom.predicate.clone(),
                    expected: sig.arity(),
                    got: atom.args.len(),
                });
            }
            for (arg, param) in atom.args.iter().zip(&sig.params) {
                let ty = objects
                    .get(arg.as_str())
                    .ok_or_else(|| TypeError::UnknownObject(arg.clone()))?;
                if !domain.is_subtype(ty, &param.ty) {
                    return Err(TypeError::IllTyped {
                        predicate: atom.predicate.clone(),
                        arg: arg.clone(),
                        actual: ty.to_string(),
                        expected: param.ty.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}
