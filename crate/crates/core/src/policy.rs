//! Rule-based policies over Boolean and numerical features, and their
//! verification on single instances.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{bool_value, Concept, ConceptError, Feature, FeatureEvaluator, FeatureKind};
use crate::model::symmetry::Symmetry;
use crate::model::{State, Task};
use crate::planner::{Budget, DeadEndOracle, Meter, SearchError};
use crate::termination::{Rank, Ranking};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Test {
    BoolTrue,
    BoolFalse,
    Eq0,
    Gt0,
}

impl Test {
    pub fn holds(self, v: u32) -> bool {
        match self {
            Test::BoolTrue | Test::Gt0 => v > 0,
            Test::BoolFalse | Test::Eq0 => v == 0,
        }
    }

    fn boolean(self) -> bool {
        matches!(self, Test::BoolTrue | Test::BoolFalse)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Change {
    SetTrue,
    SetFalse,
    UnkBool,
    Inc,
    Dec,
    UnkNum,
}

impl Change {
    fn boolean(self) -> bool {
        matches!(self, Change::SetTrue | Change::SetFalse | Change::UnkBool)
    }

    /// Holds of a value pair; Boolean changes compare truth values.
    pub fn holds(self, s: u32, t: u32) -> bool {
        match self {
            Change::SetTrue => t > 0,
            Change::SetFalse => t == 0,
            Change::Inc => t > s,
            Change::Dec => t < s,
            Change::UnkBool | Change::UnkNum => true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cond {
    pub feature: usize,
    pub test: Test,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Eff {
    pub feature: usize,
    pub change: Change,
}

/// `cond ↦ eff`, both sorted by feature with at most one atom per feature.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    pub cond: Vec<Cond>,
    pub eff: Vec<Eff>,
}

impl Rule {
    pub fn new(mut cond: Vec<Cond>, mut eff: Vec<Eff>) -> Rule {
        cond.sort();
        eff.sort();
        Rule { cond, eff }
    }

    pub fn cond_on(&self, f: usize) -> Option<Test> {
        self.cond.iter().find(|c| c.feature == f).map(|c| c.test)
    }

    pub fn eff_on(&self, f: usize) -> Option<Change> {
        self.eff.iter().find(|e| e.feature == f).map(|e| e.change)
    }

    /// Features mentioned in the condition or the effect.
    pub fn features(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .cond
            .iter()
            .map(|c| c.feature)
            .chain(self.eff.iter().map(|e| e.feature))
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    fn well_formed(&self) -> bool {
        self.cond.windows(2).all(|w| w[0].feature != w[1].feature)
            && self.eff.windows(2).all(|w| w[0].feature != w[1].feature)
    }

    /// Compatibility of a transition given feature values at both ends.
    pub fn compatible(&self, kinds: &[FeatureKind], vs: &[u32], vt: &[u32]) -> bool {
        if !self.cond.iter().all(|c| c.test.holds(vs[c.feature])) {
            return false;
        }
        let mut e = self.eff.iter().peekable();
        for f in 0..kinds.len() {
            let change = match e.peek() {
                Some(x) if x.feature == f => e.next().map(|x| x.change),
                _ => None,
            };
            let ok = match change {
                Some(c) => c.holds(vs[f], vt[f]),
                None => match kinds[f] {
                    FeatureKind::Boolean => bool_value(vs[f]) == bool_value(vt[f]),
                    FeatureKind::Numerical => vs[f] == vt[f],
                },
            };
            if !ok {
                return false;
            }
        }
        true
    }
}

/// Compatibility against a per-feature `(value at s, value at t)` signature.
pub fn compatible(rule: &Rule, kinds: &[FeatureKind], sig: &[(u32, u32)]) -> bool {
    let (vs, vt): (Vec<u32>, Vec<u32>) = sig.iter().copied().unzip();
    rule.compatible(kinds, &vs, &vt)
}

/// Valuations at the source as the condition, changes as the effect.
pub fn project(kinds: &[FeatureKind], vs: &[u32], vt: &[u32]) -> Rule {
    let mut cond = Vec::with_capacity(kinds.len());
    let mut eff = Vec::new();
    for (f, &kind) in kinds.iter().enumerate() {
        let (s, t) = (vs[f], vt[f]);
        let test = match (kind, s > 0) {
            (FeatureKind::Boolean, true) => Test::BoolTrue,
            (FeatureKind::Boolean, false) => Test::BoolFalse,
            (FeatureKind::Numerical, true) => Test::Gt0,
            (FeatureKind::Numerical, false) => Test::Eq0,
        };
        cond.push(Cond { feature: f, test });
        let change = match kind {
            FeatureKind::Boolean if bool_value(s) != bool_value(t) => {
                Some(if t > 0 { Change::SetTrue } else { Change::SetFalse })
            }
            FeatureKind::Numerical if t > s => Some(Change::Inc),
            FeatureKind::Numerical if t < s => Some(Change::Dec),
            _ => None,
        };
        if let Some(change) = change {
            eff.push(Eff { feature: f, change });
        }
    }
    Rule::new(cond, eff)
}

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error(transparent)]
    Concept(#[from] ConceptError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("malformed policy: {0}")]
    Format(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Policy {
    pub features: Vec<Feature>,
    pub names: Vec<String>,
    /// Rules refer to features by their index in `features`.
    pub rules: Vec<Rule>,
    pub ranking: Option<Ranking>,
}

#[derive(Serialize, Deserialize)]
struct PolicyFile {
    features: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kinds: Option<Vec<FeatureKind>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    names: Option<Vec<String>>,
    rules: Vec<RuleFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ranking: Option<BTreeMap<String, RankFile>>,
}

#[derive(Serialize, Deserialize)]
struct RuleFile {
    cond: Vec<String>,
    eff: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct RankFile {
    rank: usize,
    support: Vec<String>,
}

impl Policy {
    pub fn new(features: Vec<Feature>, rules: Vec<Rule>) -> Policy {
        let names = (0..features.len()).map(|i| format!("f{i}")).collect();
        Policy {
            features,
            names,
            rules,
            ranking: None,
        }
    }

    pub fn kinds(&self) -> Vec<FeatureKind> {
        self.features.iter().map(|f| f.kind).collect()
    }

    /// Rule atoms must match feature kinds and indices.
    pub fn validate(&self) -> Result<(), PolicyError> {
        let n = self.features.len();
        if self.names.len() != n {
            return Err(PolicyError::Format("one name per feature expected".into()));
        }
        for r in &self.rules {
            if !r.well_formed() {
                return Err(PolicyError::Format("feature mentioned twice in a rule".into()));
            }
            for c in &r.cond {
                let f = self.features.get(c.feature).ok_or_else(|| PolicyError::Format(format!("no feature {}", c.feature)))?;
                if c.test.boolean() != (f.kind == FeatureKind::Boolean) {
                    return Err(PolicyError::Format(format!("condition on {} does not match its kind", self.names[c.feature])));
                }
            }
            for e in &r.eff {
                let f = self.features.get(e.feature).ok_or_else(|| PolicyError::Format(format!("no feature {}", e.feature)))?;
                if e.change.boolean() != (f.kind == FeatureKind::Boolean) {
                    return Err(PolicyError::Format(format!("effect on {} does not match its kind", self.names[e.feature])));
                }
            }
        }
        Ok(())
    }

    pub fn accepts(&self, kinds: &[FeatureKind], vs: &[u32], vt: &[u32]) -> bool {
        self.rules.iter().any(|r| r.compatible(kinds, vs, vt))
    }

    pub fn evaluator(&self, task: &Task) -> Result<FeatureEvaluator, ConceptError> {
        FeatureEvaluator::new(&task.domain, &self.features)
    }

    /// Membership of the transition `(s, t)` in the policy.
    pub fn contains(&self, task: &Task, s: &State, t: &State) -> Result<bool, ConceptError> {
        let ev = self.evaluator(task)?;
        let b = ev.bind(task)?;
        Ok(self.accepts(&self.kinds(), &b.values(s), &b.values(t)))
    }

    pub fn cond_text(&self, c: &Cond) -> String {
        let n = &self.names[c.feature];
        match c.test {
            Test::BoolTrue => n.clone(),
            Test::BoolFalse => format!("¬{n}"),
            Test::Eq0 => format!("{n}=0"),
            Test::Gt0 => format!("{n}>0"),
        }
    }

    pub fn eff_text(&self, e: &Eff) -> String {
        let n = &self.names[e.feature];
        match e.change {
            Change::SetTrue => n.clone(),
            Change::SetFalse => format!("¬{n}"),
            Change::UnkBool | Change::UnkNum => format!("{n}?"),
            Change::Inc => format!("{n}↑"),
            Change::Dec => format!("{n}↓"),
        }
    }

    pub fn rule_text(&self, r: &Rule) -> String {
        let c: Vec<String> = r.cond.iter().map(|c| self.cond_text(c)).collect();
        let e: Vec<String> = r.eff.iter().map(|e| self.eff_text(e)).collect();
        format!("{{{}}} ↦ {{{}}}", c.join(", "), e.join(", "))
    }

    /// Feature legend followed by one rule per line.
    pub fn pretty(&self) -> String {
        let mut out = String::new();
        for (i, f) in self.features.iter().enumerate() {
            let rank = match self.ranking.as_ref().and_then(|r| r.ranks.get(&i)) {
                Some(r) if r.support.is_empty() => format!(", rank {}", r.rank),
                Some(r) => {
                    let sup: Vec<&str> = r.support.iter().map(|&g| self.names[g].as_str()).collect();
                    format!(", rank {} via {}", r.rank, sup.join(" "))
                }
                None => String::new(),
            };
            out.push_str(&format!("{} = {}  [{}{}]\n", self.names[i], f.concept.pretty(), f.kind, rank));
        }
        for r in &self.rules {
            out.push_str(&self.rule_text(r));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let file = PolicyFile {
            features: self.features.iter().map(|f| f.concept.to_string()).collect(),
            kinds: Some(self.kinds()),
            names: Some(self.names.clone()),
            rules: self
                .rules
                .iter()
                .map(|r| RuleFile {
                    cond: r.cond.iter().map(|c| self.cond_text(c)).collect(),
                    eff: r.eff.iter().map(|e| self.eff_text(e)).collect(),
                })
                .collect(),
            ranking: self.ranking.as_ref().map(|rk| {
                rk.ranks
                    .iter()
                    .map(|(&f, r)| {
                        (
                            self.names[f].clone(),
                            RankFile {
                                rank: r.rank,
                                support: r.support.iter().map(|&g| self.names[g].clone()).collect(),
                            },
                        )
                    })
                    .collect()
            }),
        };
        serde_json::to_string_pretty(&file).unwrap_or_default()
    }

    /// Reads the JSON form. Missing kinds are inferred from the rule atoms.
    pub fn from_json(text: &str) -> Result<Policy, PolicyError> {
        let file: PolicyFile = serde_json::from_str(text).map_err(|e| PolicyError::Format(e.to_string()))?;
        let n = file.features.len();
        let names = file.names.unwrap_or_else(|| (0..n).map(|i| format!("f{i}")).collect());
        if names.len() != n {
            return Err(PolicyError::Format("one name per feature expected".into()));
        }
        let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let lookup = |s: &str| {
            index
                .get(s)
                .copied()
                .ok_or_else(|| PolicyError::Format(format!("unknown feature `{s}`")))
        };
        let mut rules = Vec::new();
        let mut bool_hint = vec![None::<bool>; n];
        let mut unk_effects = Vec::new();
        for (ri, r) in file.rules.iter().enumerate() {
            let mut cond = Vec::new();
            for a in &r.cond {
                let a = a.trim();
                let c = if let Some(x) = a.strip_suffix(">0") {
                    Cond { feature: lookup(x.trim())?, test: Test::Gt0 }
                } else if let Some(x) = a.strip_suffix("=0") {
                    Cond { feature: lookup(x.trim())?, test: Test::Eq0 }
                } else if let Some(x) = a.strip_prefix('¬').or_else(|| a.strip_prefix('!')) {
                    Cond { feature: lookup(x.trim())?, test: Test::BoolFalse }
                } else {
                    Cond { feature: lookup(a)?, test: Test::BoolTrue }
                };
                bool_hint[c.feature] = Some(c.test.boolean());
                cond.push(c);
            }
            let mut eff = Vec::new();
            for a in &r.eff {
                let a = a.trim();
                let e = if let Some(x) = a.strip_suffix('↑').or_else(|| a.strip_suffix("++")) {
                    Eff { feature: lookup(x.trim())?, change: Change::Inc }
                } else if let Some(x) = a.strip_suffix('↓').or_else(|| a.strip_suffix("--")) {
                    Eff { feature: lookup(x.trim())?, change: Change::Dec }
                } else if let Some(x) = a.strip_suffix('?') {
                    let f = lookup(x.trim())?;
                    unk_effects.push((ri, eff.len()));
                    Eff { feature: f, change: Change::UnkNum }
                } else if let Some(x) = a.strip_prefix('¬').or_else(|| a.strip_prefix('!')) {
                    Eff { feature: lookup(x.trim())?, change: Change::SetFalse }
                } else {
                    Eff { feature: lookup(a)?, change: Change::SetTrue }
                };
                if e.change != Change::UnkNum {
                    bool_hint[e.feature] = Some(e.change.boolean());
                }
                eff.push(e);
            }
            rules.push((cond, eff));
        }
        let kinds = match file.kinds {
            Some(k) if k.len() == n => k,
            Some(_) => return Err(PolicyError::Format("one kind per feature expected".into())),
            None => bool_hint
                .iter()
                .map(|h| if *h == Some(true) { FeatureKind::Boolean } else { FeatureKind::Numerical })
                .collect(),
        };
        for (ri, ei) in unk_effects {
            let e = &mut rules[ri].1[ei];
            if kinds[e.feature] == FeatureKind::Boolean {
                e.change = Change::UnkBool;
            }
        }
        let mut features = Vec::with_capacity(n);
        for (i, text) in file.features.iter().enumerate() {
            features.push(Feature::new(i, kinds[i], Concept::parse(text)?));
        }
        let ranking = match file.ranking {
            None => None,
            Some(map) => {
                let mut ranks = BTreeMap::new();
                for (name, r) in map {
                    let support = r.support.iter().map(|s| lookup(s)).collect::<Result<Vec<_>, _>>()?;
                    ranks.insert(lookup(&name)?, Rank { rank: r.rank, support });
                }
                Some(Ranking { ranks })
            }
        };
        let policy = Policy {
            features,
            names,
            rules: rules.into_iter().map(|(c, e)| Rule::new(c, e)).collect(),
            ranking,
        };
        policy.validate()?;
        Ok(policy)
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Solves,
    /// An alive state reached by the policy with no policy successor.
    NotClosed(State),
    /// A policy transition into a dead end.
    Unsafe(State, State),
    /// A policy trajectory whose last state repeats an earlier one (up to
    /// symmetry when symmetry reduction is on).
    Cyclic(Vec<State>),
}

impl Outcome {
    pub fn name(&self) -> &'static str {
        match self {
            Outcome::Solves => "Solves",
            Outcome::NotClosed(_) => "NotClosed",
            Outcome::Unsafe(..) => "Unsafe",
            Outcome::Cyclic(_) => "Cyclic",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub outcome: Outcome,
    pub visited: usize,
}

impl Verdict {
    pub fn solves(&self) -> bool {
        self.outcome == Outcome::Solves
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct AnalyzeOptions {
    pub budget: Budget,
    /// Merge states equal up to object symmetries.
    pub symmetry: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Color {
    Gray,
    Black,
}

struct Frame {
    state: State,
    succ: Vec<State>,
    next: usize,
}

/// Model-checks the policy from the initial state of `task`.
///
/// Every policy successor is explored depth first. Dead ends are located
/// only when the search gets stuck or closes a cycle: along the current path
/// dead-endness is monotone, so a binary search finds the first dead end.
pub fn analyze(
    policy: &Policy,
    task: &Task,
    oracle: &dyn DeadEndOracle,
    opts: &AnalyzeOptions,
) -> Result<Verdict, PolicyError> {
    analyze_from(policy, task, &task.init, oracle, opts)
}

pub fn analyze_from(
    policy: &Policy,
    task: &Task,
    init: &State,
    oracle: &dyn DeadEndOracle,
    opts: &AnalyzeOptions,
) -> Result<Verdict, PolicyError> {
    let ev = policy.evaluator(task)?;
    let bound = ev.bind(task)?;
    let kinds = policy.kinds();
    let sym = if opts.symmetry { Symmetry::compute(task) } else { Symmetry::none() };
    let key = |s: &State| if sym.is_trivial() { s.clone() } else { sym.canonical(task, s) };
    let mut values: HashMap<State, Vec<u32>> = HashMap::new();
    let mut color: HashMap<State, Color> = HashMap::new();
    let mut meter = Meter::new(opts.budget);

    let expand = |s: &State, values: &mut HashMap<State, Vec<u32>>| -> Vec<State> {
        let vs = values.entry(key(s)).or_insert_with(|| bound.values(s)).clone();
        let mut out: Vec<State> = Vec::new();
        for (_, t) in task.successors(s) {
            let vt = values.entry(key(&t)).or_insert_with(|| bound.values(&t));
            if policy.accepts(&kinds, &vs, vt) && !out.contains(&t) {
                out.push(t);
            }
        }
        out
    };

    if task.is_goal(init) {
        return Ok(Verdict { outcome: Outcome::Solves, visited: 1 });
    }
    meter.tick()?;
    color.insert(key(init), Color::Gray);
    let succ = expand(init, &mut values);
    let mut path = vec![Frame { state: init.clone(), succ, next: 0 }];
    let failure = loop {
        let Some(top) = path.last_mut() else {
            return Ok(Verdict { outcome: Outcome::Solves, visited: color.len() });
        };
        if top.succ.is_empty() {
            break None;
        }
        if top.next == top.succ.len() {
            color.insert(key(&top.state), Color::Black);
            path.pop();
            continue;
        }
        let t = top.succ[top.next].clone();
        top.next += 1;
        let kt = key(&t);
        match color.get(&kt) {
            Some(Color::Gray) => break Some(t),
            Some(Color::Black) => continue,
            None => {}
        }
        if task.is_goal(&t) {
            color.insert(kt, Color::Black);
            continue;
        }
        meter.tick()?;
        color.insert(kt, Color::Gray);
        let succ = expand(&t, &mut values);
        path.push(Frame { state: t, succ, next: 0 });
    };
    let visited = color.len();
    let states: Vec<State> = path.into_iter().map(|f| f.state).collect();
    // first dead end on the path, if any
    let (mut lo, mut hi) = (0, states.len());
    while lo < hi {
        let mid = (lo + hi) / 2;
        if oracle.is_dead_end(task, &states[mid])? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let outcome = if lo < states.len() {
        if lo == 0 {
            return Err(SearchError::Unsolvable.into());
        }
        Outcome::Unsafe(states[lo - 1].clone(), states[lo].clone())
    } else {
        match failure {
            None => Outcome::NotClosed(states[states.len() - 1].clone()),
            Some(t) => {
                let mut lasso = states;
                lasso.push(t);
                Outcome::Cyclic(lasso)
            }
        }
    };
    Ok(Verdict { outcome, visited })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench;
    use crate::features::Role;
    use crate::planner::Classifier;

    fn blocks_features() -> Vec<Feature> {
        vec![
            Feature::new(
                0,
                FeatureKind::Numerical,
                Concept::exists(Role::Prim("on".into()).tc(), Concept::goal("clear", 0)),
            ),
            Feature::new(1, FeatureKind::Boolean, Concept::prim("holding", 0)),
        ]
    }

    fn blocks_policy(variant: bool) -> Policy {
        let text = if variant {
            r#"{"features": ["(exists (tc (role on)) (gprim clear 0))", "(prim holding 0)"],
                "names": ["n", "H"],
                "rules": [{"cond": ["¬H", "n>0"], "eff": ["H", "n↓"]},
                          {"cond": ["H"], "eff": ["¬H", "n?"]}]}"#
        } else {
            r#"{"features": ["(exists (tc (role on)) (gprim clear 0))", "(prim holding 0)"],
                "names": ["n", "H"],
                "rules": [{"cond": ["¬H", "n>0"], "eff": ["H", "n↓"]},
                          {"cond": ["H"], "eff": ["¬H"]}]}"#
        };
        Policy::from_json(text).unwrap()
    }

    #[test]
    fn compatibility_examples() {
        let kinds = [FeatureKind::Numerical, FeatureKind::Boolean];
        let p = blocks_policy(false);
        let pick = &p.rules[0];
        assert_eq!(p.rule_text(pick), "{n>0, ¬H} ↦ {n↓, H}");
        assert!(compatible(pick, &kinds, &[(2, 1), (0, 1)]));
        assert!(!compatible(pick, &kinds, &[(2, 2), (0, 1)]));
        let put = &p.rules[1];
        assert!(!compatible(put, &kinds, &[(3, 2), (1, 0)]));
        assert!(compatible(put, &kinds, &[(3, 3), (1, 0)]));
    }

    #[test]
    fn projection_examples() {
        let kinds = [FeatureKind::Numerical, FeatureKind::Boolean];
        let p = blocks_policy(false);
        let r = project(&kinds, &[2, 0], &[1, 1]);
        assert_eq!(r, p.rules[0]);
        assert!(r.compatible(&kinds, &[2, 0], &[1, 1]));
        let idle = project(&kinds, &[1, 1], &[1, 1]);
        assert!(idle.eff.is_empty());
    }

    #[test]
    fn json_round_trip_and_kinds() {
        let p = blocks_policy(true);
        assert_eq!(p.features, blocks_features());
        assert_eq!(p.rules[1].eff_on(0), Some(Change::UnkNum));
        let back = Policy::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
        assert!(Policy::from_json(r#"{"features": ["top"], "rules": [{"cond": ["x"], "eff": []}]}"#).is_err());
    }

    #[test]
    fn blocks_policy_solves_and_variant_cycles() {
        let task = bench::blocks_clear_task(&[vec!["a", "b", "c"]], "a");
        let cls = Classifier::new(Budget::unlimited());
        let v = analyze(&blocks_policy(false), &task, &cls, &AnalyzeOptions::default()).unwrap();
        assert_eq!(v.outcome, Outcome::Solves);
        let v = analyze(&blocks_policy(true), &task, &cls, &AnalyzeOptions::default()).unwrap();
        match v.outcome {
            Outcome::Cyclic(lasso) => {
                assert!(lasso.len() >= 3);
                assert!(lasso[..lasso.len() - 1].contains(lasso.last().unwrap()));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_policy_not_closed_at_init() {
        let task = bench::gripper_task(2);
        let p = Policy::new(vec![], vec![]);
        let cls = Classifier::new(Budget::unlimited());
        let v = analyze(&p, &task, &cls, &AnalyzeOptions::default()).unwrap();
        assert_eq!(v.outcome, Outcome::NotClosed(task.init.clone()));
        assert_eq!(v.visited, 1);
    }

    #[test]
    fn walking_past_spanner_is_unsafe() {
        let task = bench::spanner_task(3, 1);
        // no features: every transition is allowed
        let p = Policy::new(vec![], vec![Rule::new(vec![], vec![])]);
        let cls = Classifier::new(Budget::unlimited());
        let v = analyze(&p, &task, &cls, &AnalyzeOptions::default()).unwrap();
        match v.outcome {
            Outcome::Unsafe(s, t) => {
                assert!(!cls.is_dead_end(&task, &s).unwrap());
                assert!(cls.is_dead_end(&task, &t).unwrap());
                assert!(task.successors(&s).iter().any(|(_, x)| *x == t));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn symmetry_reduces_visits() {
        let task = bench::gripper_task(3);
        let p = Policy::new(vec![], vec![Rule::new(vec![], vec![])]);
        let cls = Classifier::new(Budget::unlimited());
        let plain = analyze(&p, &task, &cls, &AnalyzeOptions::default()).unwrap();
        let sym = analyze(&p, &task, &cls, &AnalyzeOptions { symmetry: true, ..Default::default() }).unwrap();
        assert_eq!(plain.outcome.name(), "Cyclic");
        assert_eq!(sym.outcome.name(), "Cyclic");
        assert!(sym.visited <= plain.visited);
    }
}
