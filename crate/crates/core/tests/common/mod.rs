//! Independent reference implementations used as test oracles.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, VecDeque};

use rand::Rng;

use policy_learner::features::FeatureKind;
use policy_learner::genex::SampleMatrix;
use policy_learner::model::{DomainSpec, GroundAtom, InstanceSpec, Term};
use policy_learner::policy::{Change, Cond, Eff, Rule, Test};

// ---------------------------------------------------------------------------
// Rule-level stratification by exhaustive ranking search.

pub fn oracle_entails_change(r: &Rule) -> bool {
    r.eff.iter().any(|e| match e.change {
        Change::Inc | Change::Dec => true,
        Change::SetTrue => r.cond.iter().any(|c| c.feature == e.feature && c.test == Test::BoolFalse),
        Change::SetFalse => r.cond.iter().any(|c| c.feature == e.feature && c.test == Test::BoolTrue),
        _ => false,
    })
}

fn cond(r: &Rule, f: usize) -> Option<Test> {
    r.cond.iter().find(|c| c.feature == f).map(|c| c.test)
}

fn eff(r: &Rule, f: usize) -> Option<Change> {
    r.eff.iter().find(|e| e.feature == f).map(|e| e.change)
}

fn may_inc(r: &Rule, f: usize) -> bool {
    match eff(r, f) {
        Some(Change::Inc | Change::UnkNum | Change::UnkBool) => true,
        Some(Change::SetTrue) => cond(r, f) != Some(Test::BoolTrue),
        _ => false,
    }
}

fn may_dec(r: &Rule, f: usize) -> bool {
    match eff(r, f) {
        Some(Change::Dec | Change::UnkNum | Change::UnkBool) => true,
        Some(Change::SetFalse) => cond(r, f) != Some(Test::BoolFalse),
        _ => false,
    }
}

/// Membership of `r` in ρ(R, g, tag) with tag `None` for "=".
pub fn in_rho(r: &Rule, g: usize, tag: Option<bool>) -> bool {
    let changes = match eff(r, g) {
        Some(Change::Inc | Change::Dec) => true,
        Some(Change::SetTrue) => cond(r, g) == Some(Test::BoolFalse),
        Some(Change::SetFalse) => cond(r, g) == Some(Test::BoolTrue),
        _ => false,
    };
    if changes {
        return false;
    }
    !matches!(
        (tag, cond(r, g)),
        (Some(false), Some(Test::Gt0 | Test::BoolTrue)) | (Some(true), Some(Test::Eq0 | Test::BoolFalse))
    )
}

pub fn oracle_monotone_given(rules: &[Rule], f: usize, given: &[usize]) -> bool {
    (0u32..1 << given.len()).all(|nu| {
        let sel: Vec<&Rule> = rules
            .iter()
            .filter(|r| given.iter().enumerate().all(|(j, &g)| in_rho(r, g, Some(nu >> j & 1 == 1))))
            .collect();
        !(sel.iter().any(|r| may_inc(r, f)) && sel.iter().any(|r| may_dec(r, f)))
    })
}

fn subsets_up_to(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &x in items {
        let ext: Vec<Vec<usize>> = out
            .iter()
            .filter(|s| s.len() < k)
            .map(|s| {
                let mut t = s.clone();
                t.push(x);
                t
            })
            .collect();
        out.extend(ext);
    }
    out
}

/// Whether some ordering of the features ranks each one, given at most `k`
/// features placed before it.
pub fn oracle_stratified(rules: &[Rule], n: usize, k: usize) -> bool {
    if !rules.iter().all(oracle_entails_change) {
        return false;
    }
    let mut memo: HashMap<(usize, u32), bool> = HashMap::new();
    let mut ok = |f: usize, placed: u32| -> bool {
        *memo.entry((f, placed)).or_insert_with(|| {
            let before: Vec<usize> = (0..n).filter(|&g| placed >> g & 1 == 1).collect();
            subsets_up_to(&before, k).iter().any(|g| oracle_monotone_given(rules, f, g))
        })
    };
    // every permutation, with shared prefixes explored once
    fn perm(n: usize, placed: u32, ok: &mut dyn FnMut(usize, u32) -> bool) -> bool {
        if placed.count_ones() as usize == n {
            return true;
        }
        (0..n).any(|f| placed >> f & 1 == 0 && ok(f, placed) && perm(n, placed | 1 << f, ok))
    }
    perm(n, 0, &mut ok)
}

pub fn random_rules(rng: &mut impl Rng, n: usize, count: usize) -> (Vec<FeatureKind>, Vec<Rule>) {
    let kinds: Vec<FeatureKind> = (0..n)
        .map(|_| if rng.gen_bool(0.5) { FeatureKind::Boolean } else { FeatureKind::Numerical })
        .collect();
    let mut rules = Vec::new();
    for _ in 0..count {
        let mut cond = Vec::new();
        let mut eff = Vec::new();
        // most rules get one atom pair that entails a change
        let main = rng.gen_bool(0.9).then(|| rng.gen_range(0..n));
        if let Some(f) = main {
            let up = rng.gen_bool(0.5);
            if kinds[f] == FeatureKind::Boolean {
                let test = if up { Test::BoolFalse } else { Test::BoolTrue };
                cond.push(Cond { feature: f, test });
                let change = if up { Change::SetTrue } else { Change::SetFalse };
                eff.push(Eff { feature: f, change });
            } else {
                if !up {
                    cond.push(Cond { feature: f, test: Test::Gt0 });
                }
                let change = if up { Change::Inc } else { Change::Dec };
                eff.push(Eff { feature: f, change });
            }
        }
        for f in 0..n {
            if main == Some(f) {
                continue;
            }
            let boolean = kinds[f] == FeatureKind::Boolean;
            if rng.gen_bool(0.4) {
                let test = match (boolean, rng.gen_bool(0.5)) {
                    (true, true) => Test::BoolTrue,
                    (true, false) => Test::BoolFalse,
                    (false, true) => Test::Gt0,
                    (false, false) => Test::Eq0,
                };
                cond.push(Cond { feature: f, test });
            }
            if rng.gen_bool(0.2) {
                let change = match (boolean, rng.gen_range(0..5)) {
                    (true, 0 | 1) => Change::SetTrue,
                    (true, 2 | 3) => Change::SetFalse,
                    (true, _) => Change::UnkBool,
                    (false, 0 | 1) => Change::Inc,
                    (false, 2 | 3) => Change::Dec,
                    (false, _) => Change::UnkNum,
                };
                eff.push(Eff { feature: f, change });
            }
        }
        rules.push(Rule::new(cond, eff));
    }
    (kinds, rules)
}

// ---------------------------------------------------------------------------
// Sample matrices and the conditions a GenEx solution must meet.

/// A random sample whose transitions change one or two features by one.
pub fn random_matrix(rng: &mut impl Rng, max_features: usize) -> SampleMatrix {
    let nf = rng.gen_range(2..=max_features);
    let kinds: Vec<FeatureKind> = (0..nf)
        .map(|_| if rng.gen_bool(0.4) { FeatureKind::Boolean } else { FeatureKind::Numerical })
        .collect();
    let costs: Vec<u64> = (0..nf).map(|_| rng.gen_range(1..8)).collect();
    let top = |f: usize| if kinds[f] == FeatureKind::Boolean { 1 } else { 3 };
    let mut values: Vec<Vec<u32>> = Vec::new();
    let step = |rng: &mut dyn rand::RngCore, v: &[u32]| -> Vec<u32> {
        let mut w = v.to_vec();
        let changes = 1 + (rng.next_u32() % 2) as usize;
        for _ in 0..changes {
            let f = (rng.next_u32() as usize) % nf;
            w[f] = if w[f] == 0 {
                1
            } else if w[f] == top(f) || rng.next_u32().is_multiple_of(2) {
                w[f] - 1
            } else {
                w[f] + 1
            };
        }
        w
    };
    let mut plus = Vec::new();
    let chains = rng.gen_range(1..=2);
    for _ in 0..chains {
        let start: Vec<u32> = (0..nf).map(|f| rng.gen_range(0..=top(f))).collect();
        values.push(start);
        let len = rng.gen_range(1..=4);
        for _ in 0..len {
            let s = values.len() - 1;
            let next = step(rng, &values[s]);
            values.push(next);
            plus.push((s, values.len() - 1));
        }
    }
    let mut minus = Vec::new();
    for _ in 0..rng.gen_range(0..=3) {
        let s = plus[rng.gen_range(0..plus.len())].0;
        let next = step(rng, &values[s]);
        values.push(next);
        minus.push((s, values.len() - 1));
    }
    let n = values.len();
    let mut goal = vec![false; n];
    for &(_, t) in &plus {
        if !plus.iter().any(|&(s, _)| s == t) {
            goal[t] = true;
        }
    }
    SampleMatrix {
        costs,
        kinds,
        values,
        goal,
        plus,
        minus,
    }
}

fn sig(m: &SampleMatrix, (s, t): (usize, usize), f: usize) -> (bool, i8) {
    let (a, b) = (m.values[s][f], m.values[t][f]);
    (a > 0, (b as i64 - a as i64).signum() as i8)
}

pub fn changes_on(m: &SampleMatrix, e: (usize, usize), g: &[usize]) -> bool {
    g.iter().any(|&f| m.values[e.0][f] != m.values[e.1][f])
}

/// Some projected good transition is compatible with bad transition `bad`.
pub fn bad_allowed(m: &SampleMatrix, bad: (usize, usize), g: &[usize]) -> bool {
    m.plus.iter().any(|&e| g.iter().all(|&f| sig(m, e, f) == sig(m, bad, f)))
}

pub fn goal_separating(m: &SampleMatrix, g: &[usize]) -> bool {
    let states: BTreeSet<usize> = m.plus.iter().flat_map(|&(s, t)| [s, t]).collect();
    states.iter().filter(|&&a| m.goal[a]).all(|&a| {
        states
            .iter()
            .filter(|&&b| !m.goal[b])
            .all(|&b| g.iter().any(|&f| (m.values[a][f] > 0) != (m.values[b][f] > 0)))
    })
}

/// π(G, X⁺) as rules over positions in `g`.
pub fn oracle_project(m: &SampleMatrix, g: &[usize]) -> Vec<Rule> {
    let mut out: Vec<Rule> = Vec::new();
    for &(s, t) in &m.plus {
        let mut cond = Vec::new();
        let mut eff = Vec::new();
        for (i, &f) in g.iter().enumerate() {
            let (a, b) = (m.values[s][f], m.values[t][f]);
            let boolean = m.kinds[f] == FeatureKind::Boolean;
            let test = match (boolean, a > 0) {
                (true, true) => Test::BoolTrue,
                (true, false) => Test::BoolFalse,
                (false, true) => Test::Gt0,
                (false, false) => Test::Eq0,
            };
            cond.push(Cond { feature: i, test });
            if a != b {
                let change = match (boolean, b > a) {
                    (true, true) => Change::SetTrue,
                    (true, false) => Change::SetFalse,
                    (false, true) => Change::Inc,
                    (false, false) => Change::Dec,
                };
                eff.push(Eff { feature: i, change });
            }
        }
        let r = Rule::new(cond, eff);
        if !out.contains(&r) {
            out.push(r);
        }
    }
    out
}

/// Every condition a GenEx solution `g` must satisfy; `None` when all hold.
pub fn solution_violation(m: &SampleMatrix, g: &[usize], k: usize) -> Option<&'static str> {
    if !m.plus.iter().all(|&e| changes_on(m, e, g)) {
        return Some("good transition without change");
    }
    if m.minus.iter().any(|&e| bad_allowed(m, e, g)) {
        return Some("bad transition allowed");
    }
    if !goal_separating(m, g) {
        return Some("not goal separating");
    }
    if !oracle_stratified(&oracle_project(m, g), g.len(), k) {
        return Some("not stratified");
    }
    None
}

/// Exhaustive search for any feature subset meeting `solution_violation`.
pub fn exists_solution(m: &SampleMatrix, k: usize) -> bool {
    let nf = m.costs.len();
    (1u32..1 << nf).any(|mask| {
        let g: Vec<usize> = (0..nf).filter(|&f| mask >> f & 1 == 1).collect();
        solution_violation(m, &g, k).is_none()
    })
}

// ---------------------------------------------------------------------------
// A lifted STRIPS interpreter over parsed domain and instance descriptions.

pub type Facts = BTreeSet<GroundAtom>;

pub struct Interpreter<'a> {
    domain: &'a DomainSpec,
    objects: Vec<(String, String)>,
    goal: Vec<GroundAtom>,
    pub init: Facts,
}

impl<'a> Interpreter<'a> {
    pub fn new(domain: &'a DomainSpec, inst: &InstanceSpec) -> Interpreter<'a> {
        let objects = domain
            .constants
            .iter()
            .chain(inst.objects.iter())
            .map(|o| (o.name.clone(), o.ty.clone()))
            .collect();
        Interpreter {
            domain,
            objects,
            goal: inst.goal.clone(),
            init: inst.init.iter().cloned().collect(),
        }
    }

    fn has_type(&self, ty: &str, want: &str) -> bool {
        let mut cur = ty.to_string();
        for _ in 0..=self.domain.types.len() {
            if cur == want || want == "object" {
                return true;
            }
            match self.domain.types.iter().find(|t| t.name == cur) {
                Some(t) => cur = t.parent.clone(),
                None => return false,
            }
        }
        false
    }

    pub fn is_goal(&self, s: &Facts) -> bool {
        self.goal.iter().all(|a| s.contains(a))
    }

    pub fn successors(&self, s: &Facts) -> Vec<Facts> {
        let mut out = Vec::new();
        for schema in &self.domain.schemas {
            let mut binding: Vec<usize> = Vec::new();
            self.bind(schema, &mut binding, s, &mut out);
        }
        out
    }

    fn bind(
        &self,
        schema: &policy_learner::model::ActionSchema,
        binding: &mut Vec<usize>,
        s: &Facts,
        out: &mut Vec<Facts>,
    ) {
        if binding.len() == schema.params.len() {
            let ground = |p: &policy_learner::model::AtomPattern| GroundAtom {
                predicate: p.predicate.clone(),
                args: p
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Const(c) => c.clone(),
                        Term::Var(v) => {
                            let i = schema.params.iter().position(|q| &q.name == v).expect("bound variable");
                            self.objects[binding[i]].0.clone()
                        }
                    })
                    .collect(),
            };
            if schema.precondition.iter().all(|l| s.contains(&ground(&l.atom)) == l.positive) {
                let mut t = s.clone();
                for d in &schema.del {
                    t.remove(&ground(d));
                }
                for a in &schema.add {
                    t.insert(ground(a));
                }
                out.push(t);
            }
            return;
        }
        let want = &schema.params[binding.len()].ty;
        for o in 0..self.objects.len() {
            if binding.contains(&o) || !self.has_type(&self.objects[o].1, want) {
                continue;
            }
            binding.push(o);
            self.bind(schema, binding, s, out);
            binding.pop();
        }
    }

    /// Reachable states with their breadth-first depth and goal distance.
    pub fn explore(&self, limit: usize) -> Option<Explored> {
        let mut index: HashMap<Facts, usize> = HashMap::new();
        let mut states = vec![self.init.clone()];
        index.insert(self.init.clone(), 0);
        let mut preds: Vec<Vec<usize>> = vec![Vec::new()];
        let mut depth = vec![0usize];
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for t in self.successors(&states[i].clone()) {
                let j = match index.get(&t) {
                    Some(&j) => j,
                    None => {
                        if states.len() == limit {
                            return None;
                        }
                        let j = states.len();
                        index.insert(t.clone(), j);
                        states.push(t);
                        preds.push(Vec::new());
                        depth.push(depth[i] + 1);
                        queue.push_back(j);
                        j
                    }
                };
                if !preds[j].contains(&i) {
                    preds[j].push(i);
                }
            }
        }
        let mut dist: Vec<Option<usize>> = vec![None; states.len()];
        let mut queue = VecDeque::new();
        for (i, s) in states.iter().enumerate() {
            if self.is_goal(s) {
                dist[i] = Some(0);
                queue.push_back(i);
            }
        }
        while let Some(j) = queue.pop_front() {
            for &i in &preds[j] {
                if dist[i].is_none() {
                    dist[i] = Some(dist[j].unwrap() + 1);
                    queue.push_back(i);
                }
            }
        }
        Some(Explored { states, index, dist })
    }
}

pub struct Explored {
    pub states: Vec<Facts>,
    pub index: HashMap<Facts, usize>,
    pub dist: Vec<Option<usize>>,
}
