//! Reader and writer for the STRIPS + typing subset of PDDL.
//!
//! Supported requirements are `:strips`, `:typing`, `:negative-preconditions`
//! and `:constants`. Identifiers are lower-cased on input. Preconditions are
//! conjunctions of (possibly negated) atoms, effects are conjunctions of add
//! and delete atoms, and goals are conjunctions of positive ground atoms.

pub(crate) mod sexpr;

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::model::{
    ActionSchema, AtomPattern, DomainSpec, GroundAtom, InstanceSpec, Literal, PredicateSig, Term,
    TypeDecl, TypeError, TypedName, ROOT_TYPE,
};
pub use sexpr::Pos;
use sexpr::{read_all, Sexpr};

pub const SUPPORTED_REQUIREMENTS: &[&str] = &[
    ":strips",
    ":typing",
    ":negative-preconditions",
    ":constants",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub file: String,
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub severity: Severity,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{}:{}:{}: {sev}: {}",
            self.file, self.line, self.column, self.message
        )
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PddlError {
    #[error("{0}")]
    Syntax(ParseDiagnostic),
    #[error("unsupported requirement `{0}`")]
    UnsupportedRequirement(String),
    #[error("type error: {0}")]
    Type(#[from] TypeError),
}

struct Ctx<'a> {
    file: &'a str,
}

impl Ctx<'_> {
    fn diag(&self, pos: Pos, msg: impl Into<String>) -> PddlError {
        PddlError::Syntax(ParseDiagnostic {
            file: self.file.to_string(),
            line: pos.line,
            column: pos.column,
            message: msg.into(),
            severity: Severity::Error,
        })
    }

    fn list<'s>(&self, e: &'s Sexpr, what: &str) -> Result<&'s [Sexpr], PddlError> {
        e.as_list()
            .ok_or_else(|| self.diag(e.pos(), format!("expected {what}")))
    }

    fn atom<'s>(&self, e: &'s Sexpr, what: &str) -> Result<&'s str, PddlError> {
        e.as_atom()
            .ok_or_else(|| self.diag(e.pos(), format!("expected {what}")))
    }

    fn name<'s>(&self, e: &'s Sexpr, what: &str) -> Result<&'s str, PddlError> {
        let s = self.atom(e, what)?;
        if s.starts_with('?') || s.starts_with(':') || s == "-" {
            return Err(self.diag(e.pos(), format!("expected {what}, found `{s}`")));
        }
        Ok(s)
    }

    /// `(define (<kind> name) ...)` → (name, remaining sections)
    fn define<'s>(
        &self,
        exprs: &'s [Sexpr],
        kind: &str,
    ) -> Result<(&'s str, &'s [Sexpr]), PddlError> {
        let top = match exprs {
            [one] => one,
            [] => {
                return Err(self.diag(Pos { line: 1, column: 1 }, "empty input"));
            }
            [_, second, ..] => {
                return Err(self.diag(second.pos(), "trailing input after definition"));
            }
        };
        let items = self.list(top, "(define ...)")?;
        match items.first().and_then(Sexpr::as_atom) {
            Some("define") => {}
            _ => return Err(self.diag(top.pos(), "expected `define`")),
        }
        let header = items
            .get(1)
            .ok_or_else(|| self.diag(top.pos(), format!("missing ({kind} <name>)")))?;
        let h = self.list(header, &format!("({kind} <name>)"))?;
        match h {
            [k, n] if k.as_atom() == Some(kind) => Ok((self.name(n, "name")?, &items[2..])),
            _ => Err(self.diag(header.pos(), format!("expected ({kind} <name>)"))),
        }
    }

    /// Typed list `a b - t c ?x - u` → names with types (root type when untyped).
    fn typed_list(&self, items: &[Sexpr], vars: bool) -> Result<Vec<TypedName>, PddlError> {
        let mut out = Vec::new();
        let mut pending: Vec<&str> = Vec::new();
        let mut i = 0;
        while i < items.len() {
            let e = &items[i];
            let s = self.atom(e, "name")?;
            if s == "-" {
                let ty_expr = items
                    .get(i + 1)
                    .ok_or_else(|| self.diag(e.pos(), "missing type after `-`"))?;
                if ty_expr.head() == Some("either") {
                    return Err(self.diag(ty_expr.pos(), "`either` types are not supported"));
                }
                let ty = self.name(ty_expr, "type name")?;
                if pending.is_empty() {
                    return Err(self.diag(e.pos(), "type annotation without names"));
                }
                out.extend(pending.drain(..).map(|n| TypedName::new(n, ty)));
                i += 2;
                continue;
            }
            if vars != s.starts_with('?') || s.starts_with(':') || s.len() <= usize::from(vars) {
                let what = if vars { "variable" } else { "name" };
                return Err(self.diag(e.pos(), format!("expected {what}, found `{s}`")));
            }
            pending.push(s);
            i += 1;
        }
        out.extend(pending.into_iter().map(|n| TypedName::new(n, ROOT_TYPE)));
        Ok(out)
    }

    fn atom_pattern(&self, e: &Sexpr) -> Result<AtomPattern, PddlError> {
        let items = self.list(e, "atom")?;
        let (head, args) = items
            .split_first()
            .ok_or_else(|| self.diag(e.pos(), "empty atom"))?;
        let predicate = self.name(head, "predicate name")?;
        if matches!(predicate, "and" | "not" | "or" | "forall" | "exists" | "when" | "imply" | "=") {
            return Err(self.diag(head.pos(), format!("unsupported construct `{predicate}`")));
        }
        let args = args
            .iter()
            .map(|a| {
                let s = self.atom(a, "term")?;
                if s.starts_with('?') {
                    Ok(Term::Var(s.to_string()))
                } else {
                    Ok(Term::Const(self.name(a, "term")?.to_string()))
                }
            })
            .collect::<Result<_, PddlError>>()?;
        Ok(AtomPattern {
            predicate: predicate.to_string(),
            args,
        })
    }

    fn literal(&self, e: &Sexpr) -> Result<Literal, PddlError> {
        if e.head() == Some("not") {
            let items = self.list(e, "(not <atom>)")?;
            match items {
                [_, inner] => Ok(Literal {
                    positive: false,
                    atom: self.atom_pattern(inner)?,
                }),
                _ => Err(self.diag(e.pos(), "expected (not <atom>)")),
            }
        } else {
            Ok(Literal {
                positive: true,
                atom: self.atom_pattern(e)?,
            })
        }
    }

    /// Flattens nested conjunctions into literals.
    fn conjunction(&self, e: &Sexpr, out: &mut Vec<Literal>) -> Result<(), PddlError> {
        let items = self.list(e, "formula")?;
        if items.is_empty() {
            return Ok(());
        }
        if e.head() == Some("and") {
            for item in &items[1..] {
                self.conjunction(item, out)?;
            }
            Ok(())
        } else {
            out.push(self.literal(e)?);
            Ok(())
        }
    }

    fn action(&self, items: &[Sexpr], pos: Pos, negative_ok: bool) -> Result<ActionSchema, PddlError> {
        let name = items
            .get(1)
            .ok_or_else(|| self.diag(pos, "missing action name"))?;
        let name = self.name(name, "action name")?.to_string();
        let mut params = Vec::new();
        let mut precondition = Vec::new();
        let mut add = Vec::new();
        let mut del = Vec::new();
        let mut i = 2;
        while i < items.len() {
            let key = self.atom(&items[i], "action keyword")?;
            let value = items
                .get(i + 1)
                .ok_or_else(|| self.diag(items[i].pos(), format!("missing value for {key}")))?;
            match key {
                ":parameters" => params = self.typed_list(self.list(value, "parameter list")?, true)?,
                ":precondition" => {
                    self.conjunction(value, &mut precondition)?;
                    if !negative_ok {
                        if let Some(_l) = precondition.iter().find(|l| !l.positive) {
                            return Err(PddlError::UnsupportedRequirement(
                                ":negative-preconditions".into(),
                            ));
                        }
                    }
                }
                ":effect" => {
                    let mut lits = Vec::new();
                    self.conjunction(value, &mut lits)?;
                    for l in lits {
                        if l.positive {
                            add.push(l.atom);
                        } else {
                            del.push(l.atom);
                        }
                    }
                }
                other => {
                    return Err(self.diag(items[i].pos(), format!("unknown action keyword `{other}`")))
                }
            }
            i += 2;
        }
        Ok(ActionSchema {
            name,
            params,
            precondition,
            add,
            del,
        })
    }

    fn ground_atom(&self, e: &Sexpr) -> Result<GroundAtom, PddlError> {
        let pat = self.atom_pattern(e)?;
        let mut args = Vec::with_capacity(pat.args.len());
        for t in pat.args {
            match t {
                Term::Const(c) => args.push(c),
                Term::Var(v) => return Err(self.diag(e.pos(), format!("variable `{v}` in ground atom"))),
            }
        }
        Ok(GroundAtom {
            predicate: pat.predicate,
            args,
        })
    }
}

/// Parses a domain file.
pub fn parse_domain(text: &str) -> Result<DomainSpec, PddlError> {
    parse_domain_named(text, "<domain>")
}

pub fn parse_domain_named(text: &str, file: &str) -> Result<DomainSpec, PddlError> {
    let cx = Ctx { file };
    let exprs = read_all(text, file, false).map_err(PddlError::Syntax)?;
    let (name, sections) = cx.define(&exprs, "domain")?;
    let mut dom = DomainSpec {
        name: name.to_string(),
        requirements: Vec::new(),
        types: Vec::new(),
        constants: Vec::new(),
        predicates: Vec::new(),
        schemas: Vec::new(),
    };
    let mut negative_ok = false;
    for sec in sections {
        let items = cx.list(sec, "domain section")?;
        let key = items
            .first()
            .map(|k| cx.atom(k, "section keyword"))
            .transpose()?
            .ok_or_else(|| cx.diag(sec.pos(), "empty section"))?;
        match key {
            ":requirements" => {
                for r in &items[1..] {
                    let r = cx.atom(r, "requirement")?;
                    if !SUPPORTED_REQUIREMENTS.contains(&r) {
                        return Err(PddlError::UnsupportedRequirement(r.to_string()));
                    }
                    negative_ok |= r == ":negative-preconditions";
                    dom.requirements.push(r.to_string());
                }
            }
            ":types" => {
                for t in cx.typed_list(&items[1..], false)? {
                    if t.name != ROOT_TYPE {
                        dom.types.push(TypeDecl {
                            name: t.name,
                            parent: t.ty,
                        });
                    }
                }
            }
            ":constants" => dom.constants.extend(cx.typed_list(&items[1..], false)?),
            ":predicates" => {
                for p in &items[1..] {
                    let parts = cx.list(p, "predicate declaration")?;
                    let (head, params) = parts
                        .split_first()
                        .ok_or_else(|| cx.diag(p.pos(), "empty predicate declaration"))?;
                    let pname = cx.name(head, "predicate name")?;
                    if dom.predicates.iter().any(|q| q.name == pname) {
                        return Err(cx.diag(p.pos(), format!("predicate `{pname}` declared twice")));
                    }
                    dom.predicates.push(PredicateSig {
                        name: pname.to_string(),
                        params: cx.typed_list(params, true)?,
                    });
                }
            }
            ":action" => dom.schemas.push(cx.action(items, sec.pos(), negative_ok)?),
            other => return Err(cx.diag(sec.pos(), format!("unsupported section `{other}`"))),
        }
    }
    dom.validate()?;
    Ok(dom)
}

/// Parses a problem file against an already parsed domain.
pub fn parse_problem(text: &str, domain: &DomainSpec) -> Result<InstanceSpec, PddlError> {
    parse_problem_named(text, domain, "<problem>")
}

pub fn parse_problem_named(
    text: &str,
    domain: &DomainSpec,
    file: &str,
) -> Result<InstanceSpec, PddlError> {
    let cx = Ctx { file };
    let exprs = read_all(text, file, false).map_err(PddlError::Syntax)?;
    let (name, sections) = cx.define(&exprs, "problem")?;
    let mut inst = InstanceSpec {
        name: name.to_string(),
        domain: domain.name.clone(),
        objects: Vec::new(),
        init: Vec::new(),
        goal: Vec::new(),
    };
    for sec in sections {
        let items = cx.list(sec, "problem section")?;
        let key = items
            .first()
            .map(|k| cx.atom(k, "section keyword"))
            .transpose()?
            .ok_or_else(|| cx.diag(sec.pos(), "empty section"))?;
        match key {
            ":domain" => match items {
                [_, d] => {
                    let d = cx.name(d, "domain name")?;
                    if d != domain.name {
                        return Err(cx.diag(sec.pos(), format!("problem is for domain `{d}`, not `{}`", domain.name)));
                    }
                }
                _ => return Err(cx.diag(sec.pos(), "expected (:domain <name>)")),
            },
            ":requirements" => {
                for r in &items[1..] {
                    let r = cx.atom(r, "requirement")?;
                    if !SUPPORTED_REQUIREMENTS.contains(&r) {
                        return Err(PddlError::UnsupportedRequirement(r.to_string()));
                    }
                }
            }
            ":objects" => inst.objects.extend(cx.typed_list(&items[1..], false)?),
            ":init" => {
                for a in &items[1..] {
                    inst.init.push(cx.ground_atom(a)?);
                }
            }
            ":goal" => {
                let formula = match items {
                    [_, f] => f,
                    _ => return Err(cx.diag(sec.pos(), "expected (:goal <formula>)")),
                };
                let mut lits = Vec::new();
                cx.conjunction(formula, &mut lits)?;
                for l in lits {
                    if !l.positive {
                        return Err(cx.diag(formula.pos(), "negative goals are not supported"));
                    }
                    let mut args = Vec::new();
                    for t in l.atom.args {
                        match t {
                            Term::Const(c) => args.push(c),
                            Term::Var(v) => {
                                return Err(cx.diag(formula.pos(), format!("variable `{v}` in goal")))
                            }
                        }
                    }
                    inst.goal.push(GroundAtom {
                        predicate: l.atom.predicate,
                        args,
                    });
                }
            }
            other => return Err(cx.diag(sec.pos(), format!("unsupported section `{other}`"))),
        }
    }
    inst.validate(domain)?;
    Ok(inst)
}

fn write_typed(out: &mut String, items: &[TypedName]) {
    for (i, t) in items.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{} - {}", t.name, t.ty);
    }
}

fn write_pattern(out: &mut String, a: &AtomPattern) {
    let _ = write!(out, "({}", a.predicate);
    for t in &a.args {
        let _ = write!(out, " {t}");
    }
    out.push(')');
}

/// Renders a domain as PDDL that [`parse_domain`] reads back unchanged.
pub fn domain_to_pddl(d: &DomainSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (domain {})", d.name);
    if !d.requirements.is_empty() {
        let _ = writeln!(out, "  (:requirements {})", d.requirements.join(" "));
    }
    if !d.types.is_empty() {
        out.push_str("  (:types");
        for t in &d.types {
            let _ = write!(out, " {} - {}", t.name, t.parent);
        }
        out.push_str(")\n");
    }
    if !d.constants.is_empty() {
        out.push_str("  (:constants ");
        write_typed(&mut out, &d.constants);
        out.push_str(")\n");
    }
    out.push_str("  (:predicates");
    for p in &d.predicates {
        let _ = write!(out, " ({}", p.name);
        if !p.params.is_empty() {
            out.push(' ');
            write_typed(&mut out, &p.params);
        }
        out.push(')');
    }
    out.push_str(")\n");
    for s in &d.schemas {
        let _ = writeln!(out, "  (:action {}", s.name);
        out.push_str("    :parameters (");
        write_typed(&mut out, &s.params);
        out.push_str(")\n    :precondition (and");
        for l in &s.precondition {
            out.push(' ');
            if l.positive {
                write_pattern(&mut out, &l.atom);
            } else {
                out.push_str("(not ");
                write_pattern(&mut out, &l.atom);
                out.push(')');
            }
        }
        out.push_str(")\n    :effect (and");
        for a in &s.add {
            out.push(' ');
            write_pattern(&mut out, a);
        }
        for a in &s.del {
            out.push_str(" (not ");
            write_pattern(&mut out, a);
            out.push(')');
        }
        out.push_str("))\n");
    }
    out.push_str(")\n");
    out
}

/// Renders a problem as PDDL.
pub fn problem_to_pddl(p: &InstanceSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (problem {})", p.name);
    let _ = writeln!(out, "  (:domain {})", p.domain);
    out.push_str("  (:objects ");
    write_typed(&mut out, &p.objects);
    out.push_str(")\n  (:init");
    for a in &p.init {
        let _ = write!(out, "\n    {a}");
    }
    out.push_str(")\n  (:goal (and");
    for a in &p.goal {
        let _ = write!(out, " {a}");
    }
    out.push_str("))\n)\n");
    out
}

/// Requirement names in `d` that this reader rejects (always empty for a parsed domain).
pub fn unsupported_requirements(d: &DomainSpec) -> BTreeSet<String> {
    d.requirements
        .iter()
        .filter(|r| !SUPPORTED_REQUIREMENTS.contains(&r.as_str()))
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench;

    #[test]
    fn gripper_domain_predicates() {
        let d = parse_domain(bench::GRIPPER_DOMAIN).unwrap();
        let sig: Vec<(String, usize)> = d
            .predicates
            .iter()
            .map(|p| (p.name.clone(), p.arity()))
            .collect();
        for (name, arity) in [("at-robby", 1), ("at", 2), ("free", 1), ("carry", 2)] {
            assert!(sig.contains(&(name.to_string(), arity)), "{name}/{arity}");
        }
    }

    #[test]
    fn adl_requirement_rejected() {
        let text = "(define (domain d) (:requirements :strips :adl) (:predicates (p)))";
        assert_eq!(
            parse_domain(text),
            Err(PddlError::UnsupportedRequirement(":adl".into()))
        );
    }

    #[test]
    fn duplicate_predicate_points_at_second_declaration() {
        let text = "(define (domain d)\n  (:predicates (p ?x)\n                (p ?y)))";
        match parse_domain(text) {
            Err(PddlError::Syntax(d)) => {
                assert_eq!((d.line, d.column), (3, 17));
                assert!(d.message.contains("declared twice"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gripper_problem_four_balls() {
        let d = parse_domain(bench::GRIPPER_DOMAIN).unwrap();
        let text = bench::gripper_problem(4);
        let p = parse_problem(&text, &d).unwrap();
        assert_eq!(p.objects.iter().filter(|o| o.ty == "ball").count(), 4);
        assert_eq!(p.goal.len(), 4);
        assert!(p
            .goal
            .iter()
            .all(|g| g.predicate == "at" && g.args[1] == "roomb"));
    }

    #[test]
    fn goal_with_undeclared_object() {
        let d = parse_domain(bench::GRIPPER_DOMAIN).unwrap();
        let text = "(define (problem p) (:domain gripper) (:objects b1 - ball left - gripper)
            (:init (at-robby rooma)) (:goal (and (at b9 roomb))))";
        assert_eq!(
            parse_problem(text, &d),
            Err(PddlError::Type(TypeError::UnknownObject("b9".into())))
        );
    }

    #[test]
    fn empty_init() {
        let d = parse_domain(bench::GRIPPER_DOMAIN).unwrap();
        let text = "(define (problem p) (:domain gripper) (:objects b1 - ball) (:init) (:goal (and (at b1 roomb))))";
        let p = parse_problem(text, &d).unwrap();
        assert!(p.init.is_empty());
    }

    #[test]
    fn case_is_normalized() {
        let text = "(DEFINE (DOMAIN D) (:PREDICATES (P ?X)))";
        let d = parse_domain(text).unwrap();
        assert_eq!(d.name, "d");
        assert_eq!(d.predicates[0].name, "p");
    }

    #[test]
    fn negative_precondition_requires_flag() {
        let text = "(define (domain d) (:requirements :strips) (:predicates (p))
            (:action a :parameters () :precondition (not (p)) :effect (p)))";
        assert_eq!(
            parse_domain(text),
            Err(PddlError::UnsupportedRequirement(":negative-preconditions".into()))
        );
    }

    #[test]
    fn bench_domains_round_trip() {
        for text in [
            bench::GRIPPER_DOMAIN,
            bench::BLOCKS_DOMAIN,
            bench::SPANNER_DOMAIN,
            bench::DELIVERY_DOMAIN,
        ] {
            let d = parse_domain(text).unwrap();
            assert_eq!(parse_domain(&domain_to_pddl(&d)).unwrap(), d);
        }
    }
}
