//! The learning loop: seed plans, repeated hitting-set solving on a subset
//! Q' of the training instances, verification, and updates of Q'.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::features::{FeatureKind, FeaturePool};
use crate::genex::{
    build_hsp, localize_ranking, project_rules, run_genex_with, FailureReason as GenexFailure, GenexResult, Origin,
    Relations, SampleMatrix,
};
use crate::model::{State, Task, Transition};
use crate::planner::{solve, Budget, Classifier, SearchError, StateSpace};
use crate::policy::{analyze, AnalyzeOptions, Change, Eff, Outcome, Policy, PolicyError, Rule, Verdict};
use crate::termination::{entails_change, Ranking, Rules};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Strategy {
    S1,
    S2,
    /// S1, then S2 from scratch if S1 runs out of subsets.
    Auto,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WrapperConfig {
    pub strategy: Strategy,
    pub k: usize,
    pub simplify: bool,
    /// Symmetry reduction during verification.
    pub symmetry: bool,
    pub plan_budget: Budget,
    pub verify_budget: Budget,
    pub classify_budget: Budget,
    pub time_limit: Option<Duration>,
    /// Pool bounds and pruning-sample size, used when the pool is generated.
    pub complexity: usize,
    pub depth: usize,
    pub pool_sample: usize,
}

impl Default for WrapperConfig {
    fn default() -> WrapperConfig {
        WrapperConfig {
            strategy: Strategy::Auto,
            k: 1,
            simplify: false,
            symmetry: true,
            plan_budget: Budget::nodes(2_000_000),
            verify_budget: Budget::nodes(2_000_000),
            classify_budget: Budget::nodes(1_000_000),
            time_limit: None,
            complexity: 6,
            depth: 5,
            pool_sample: 3000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FailureReason {
    /// No pool feature changes across a required good transition.
    Edge,
    /// The hitting-set solver found no eligible chain for a remaining subset.
    NoEligible,
    /// No further Q' subsets.
    Exhausted,
    Timeout,
    /// A learned policy cycled during verification; never expected.
    Cyclic,
    NoInstances,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WrapperFailure {
    pub reason: FailureReason,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Timings {
    pub prep: f64,
    pub genex: f64,
    pub verify: f64,
    pub total: f64,
}

/// Summary of a run. Columns of the last outer iteration describe the
/// final Q', X⁺, X⁻, hitting-set problem and policy.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub domain: String,
    pub q: usize,
    pub s: usize,
    pub f: usize,
    pub strategy: Strategy,
    pub outer: usize,
    pub inner: usize,
    pub q_prime: usize,
    pub inner_last: usize,
    pub x_plus: usize,
    pub x_minus: usize,
    pub h: usize,
    pub g: usize,
    pub pi: usize,
    pub timings: Timings,
    pub outcome: String,
    pub reason: Option<FailureReason>,
    pub witness: Option<String>,
    /// Instances in training order.
    pub order: Vec<String>,
    /// Instances dropped because the planner found no plan.
    pub excluded: Vec<String>,
}

const HEADERS: [&str; 18] = [
    "Domain", "|Q|", "|S|", "|F|", "Strat.", "Outer", "Inner", "|Q'|", "Inner*", "|X+|", "|X-|", "|H|", "|G|", "|π|",
    "Prep.", "GenEx", "Verif.", "Total",
];

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_default()
    }

    pub fn row(&self) -> Vec<String> {
        let strat = match self.strategy {
            Strategy::S1 => "S1",
            Strategy::S2 => "S2",
            Strategy::Auto => "auto",
        };
        vec![
            self.domain.clone(),
            self.q.to_string(),
            self.s.to_string(),
            self.f.to_string(),
            strat.to_string(),
            self.outer.to_string(),
            self.inner.to_string(),
            self.q_prime.to_string(),
            self.inner_last.to_string(),
            self.x_plus.to_string(),
            self.x_minus.to_string(),
            self.h.to_string(),
            self.g.to_string(),
            self.pi.to_string(),
            format!("{:.2}", self.timings.prep),
            format!("{:.2}", self.timings.genex),
            format!("{:.2}", self.timings.verify),
            format!("{:.2}", self.timings.total),
        ]
    }

    /// Aligned text table with a header line.
    pub fn table(reports: &[RunReport]) -> String {
        let rows: Vec<Vec<String>> = reports.iter().map(|r| r.row()).collect();
        let width = |i: usize| {
            rows.iter()
                .map(|r| r[i].chars().count())
                .chain([HEADERS[i].chars().count()])
                .max()
                .unwrap_or(0)
        };
        let widths: Vec<usize> = (0..HEADERS.len()).map(width).collect();
        let line = |cells: Vec<&str>| {
            let mut s = String::new();
            for (i, c) in cells.iter().enumerate() {
                let pad = widths[i] - c.chars().count();
                if i == 0 {
                    let _ = write!(s, "{c}{}", " ".repeat(pad));
                } else {
                    let _ = write!(s, "  {}{c}", " ".repeat(pad));
                }
            }
            s.push('\n');
            s
        };
        let mut out = line(HEADERS.to_vec());
        for r in &rows {
            out.push_str(&line(r.iter().map(String::as_str).collect()));
        }
        out
    }
}

pub struct WrapperRun {
    pub result: Result<Policy, WrapperFailure>,
    pub report: RunReport,
}

/// Bookkeeping of the Q' updates of one strategy.
#[derive(Clone, Debug)]
pub struct StrategyState {
    pub strategy: Strategy,
    /// Instance indices in the static order, ascending.
    pub q: Vec<usize>,
    pub n: usize,
    visited: HashSet<Vec<usize>>,
    steps: usize,
}

impl StrategyState {
    pub fn new(strategy: Strategy, n: usize) -> StrategyState {
        let strategy = if strategy == Strategy::Auto { Strategy::S1 } else { strategy };
        StrategyState {
            strategy,
            q: vec![0],
            n,
            visited: HashSet::from([vec![0]]),
            steps: 0,
        }
    }

    /// Same state with Q' set to `q` (for tests and replays).
    pub fn with_q(strategy: Strategy, n: usize, q: Vec<usize>) -> StrategyState {
        let mut s = StrategyState::new(strategy, n);
        s.q = q.clone();
        s.visited.insert(q);
        s
    }
}

/// The next Q' after the current one is solved but instance `failing` (of
/// minimum index) is not; `None` when no subsets are left.
pub fn next_q(state: &mut StrategyState, failing: usize) -> Option<Vec<usize>> {
    let k = *state.q.iter().max()?;
    let next = match state.strategy {
        Strategy::S2 => {
            if state.steps + 1 >= state.n * state.n {
                return None;
            }
            if failing < k {
                let mut q = state.q.clone();
                q.push(failing);
                q.sort_unstable();
                q.dedup();
                q
            } else {
                vec![failing]
            }
        }
        _ => {
            if failing > k {
                vec![failing]
            } else if k + 1 < state.n {
                vec![k + 1]
            } else {
                return None;
            }
        }
    };
    if !state.visited.insert(next.clone()) {
        return None;
    }
    state.steps += 1;
    state.q = next.clone();
    Some(next)
}

/// Fresh S2 state after S1 ran out of subsets.
pub fn switch_strategy(state: &StrategyState) -> StrategyState {
    StrategyState::new(Strategy::S2, state.n)
}

fn generalize(c: Change) -> Option<Change> {
    match c {
        Change::Inc | Change::Dec => Some(Change::UnkNum),
        Change::SetTrue | Change::SetFalse => Some(Change::UnkBool),
        Change::UnkBool | Change::UnkNum => None,
    }
}

/// Greedy generalization: drop condition atoms and make effects unknown,
/// one edit at a time, keeping each edit only if every rule still entails a
/// change, the ranking still certifies stratification, and no bad
/// transition becomes compatible.
pub fn simplify(
    rules: &[Rule],
    kinds: &[FeatureKind],
    ranking: &Ranking,
    k: usize,
    minus: &[(Vec<u32>, Vec<u32>)],
) -> Vec<Rule> {
    let ok = |rs: &[Rule]| {
        rs.iter().all(entails_change)
            && ranking.certifies(&Rules(rs), k)
            && minus.iter().all(|(s, t)| !rs.iter().any(|r| r.compatible(kinds, s, t)))
    };
    let mut rules = rules.to_vec();
    for ri in 0..rules.len() {
        let mut ci = 0;
        while ci < rules[ri].cond.len() {
            let mut trial = rules.clone();
            trial[ri].cond.remove(ci);
            if ok(&trial) {
                rules = trial;
            } else {
                ci += 1;
            }
        }
        for f in 0..kinds.len() {
            let unknown = match rules[ri].eff_on(f) {
                None => Some(match kinds[f] {
                    FeatureKind::Boolean => Change::UnkBool,
                    FeatureKind::Numerical => Change::UnkNum,
                }),
                Some(c) => generalize(c),
            };
            let Some(unknown) = unknown else { continue };
            let mut trial = rules.clone();
            let mut eff: Vec<Eff> = trial[ri].eff.iter().copied().filter(|e| e.feature != f).collect();
            eff.push(Eff { feature: f, change: unknown });
            trial[ri] = Rule::new(trial[ri].cond.clone(), eff);
            if ok(&trial) {
                rules = trial;
            }
        }
    }
    let mut seen = HashSet::new();
    rules.retain(|r| seen.insert(r.clone()));
    rules
}

/// Transitions of the reachable state spaces of `tasks`, expanding at most
/// `limit` states in total.
pub fn pool_sample(tasks: &[Task], limit: usize) -> Vec<Transition> {
    let mut left = limit;
    let mut out = Vec::new();
    for (i, t) in tasks.iter().enumerate() {
        if left == 0 {
            break;
        }
        let space = StateSpace::expand(t, &t.init, left);
        left = left.saturating_sub(space.len());
        out.extend(space.transitions(i));
    }
    out
}

/// `instance: (action)` for a transition, or the target atoms if no single
/// action explains it.
pub fn describe_transition(task: &Task, tr: &Transition) -> String {
    match task.successors(&tr.source).into_iter().find(|(_, t)| *t == tr.target) {
        Some((a, _)) => format!("{}: {}", task.name, task.action_name(a)),
        None => format!("{}: transition into {:?}", task.name, task.state_atoms(&tr.target)),
    }
}

fn push_unique(v: &mut Vec<Transition>, t: Transition) {
    if !v.contains(&t) {
        v.push(t);
    }
}

fn gather(sets: &[Vec<Transition>], q: &[usize]) -> Vec<Transition> {
    let mut out = Vec::new();
    for &i in q {
        for t in &sets[i] {
            push_unique(&mut out, t.clone());
        }
    }
    out
}

struct Timer {
    start: Instant,
    limit: Option<Duration>,
}

impl Timer {
    fn expired(&self) -> bool {
        self.limit.is_some_and(|l| self.start.elapsed() > l)
    }
}

fn fail(reason: FailureReason, witness: Option<String>) -> WrapperFailure {
    WrapperFailure { reason, witness }
}

fn search_failure(e: PolicyError) -> WrapperFailure {
    match e {
        PolicyError::Search(SearchError::BudgetExceeded { nodes }) => {
            fail(FailureReason::Timeout, Some(format!("search budget exceeded after {nodes} nodes")))
        }
        other => fail(FailureReason::Timeout, Some(other.to_string())),
    }
}

/// Runs the learning loop on the training instances `tasks` with `pool`.
pub fn run_wrapper(tasks: Vec<Task>, pool: &FeaturePool, cfg: &WrapperConfig) -> WrapperRun {
    let timer = Timer {
        start: Instant::now(),
        limit: cfg.time_limit,
    };
    let domain = tasks.first().map(|t| t.domain.name.clone()).unwrap_or_default();
    let mut report = RunReport {
        schema: 1,
        domain,
        q: 0,
        s: 0,
        f: pool.len(),
        strategy: if cfg.strategy == Strategy::S2 { Strategy::S2 } else { Strategy::S1 },
        outer: 0,
        inner: 0,
        q_prime: 0,
        inner_last: 0,
        x_plus: 0,
        x_minus: 0,
        h: 0,
        g: 0,
        pi: 0,
        timings: Timings::default(),
        outcome: "Failure".into(),
        reason: None,
        witness: None,
        order: Vec::new(),
        excluded: Vec::new(),
    };
    let result = learn(tasks, pool, cfg, &timer, &mut report);
    report.timings.total = timer.start.elapsed().as_secs_f64();
    match &result {
        Ok(_) => report.outcome = "PolicyFound".into(),
        Err(f) => {
            report.reason = Some(f.reason);
            report.witness = f.witness.clone();
        }
    }
    WrapperRun { result, report }
}

fn learn(
    tasks: Vec<Task>,
    pool: &FeaturePool,
    cfg: &WrapperConfig,
    timer: &Timer,
    report: &mut RunReport,
) -> Result<Policy, WrapperFailure> {
    let t0 = Instant::now();
    let plans: Vec<_> = tasks
        .par_iter()
        .map(|t| solve(t, 0, &t.init, cfg.plan_budget))
        .collect();
    let mut order: Vec<(Task, Vec<State>)> = Vec::new();
    for (t, p) in tasks.into_iter().zip(plans) {
        match p {
            Ok(p) => order.push((t, p.states)),
            Err(_) => report.excluded.push(t.name.clone()),
        }
    }
    order.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| a.0.name.cmp(&b.0.name)));
    let (tasks, seeds): (Vec<Task>, Vec<Vec<State>>) = order.into_iter().unzip();
    report.q = tasks.len();
    report.order = tasks.iter().map(|t| t.name.clone()).collect();
    report.timings.prep += t0.elapsed().as_secs_f64();
    if tasks.is_empty() {
        return Err(fail(FailureReason::NoInstances, None));
    }
    let n = tasks.len();
    let seed_sets: Vec<Vec<Transition>> = seeds
        .iter()
        .enumerate()
        .map(|(i, states)| {
            states
                .windows(2)
                .map(|w| Transition {
                    instance: i,
                    source: w[0].clone(),
                    target: w[1].clone(),
                })
                .collect()
        })
        .collect();
    let mut seen: HashSet<(usize, State)> = HashSet::new();
    for (i, states) in seeds.iter().enumerate() {
        for s in states {
            seen.insert((i, s.clone()));
        }
    }
    let classifiers: Vec<Classifier> = (0..n).map(|_| Classifier::new(cfg.classify_budget)).collect();
    let opts = AnalyzeOptions {
        budget: cfg.verify_budget,
        symmetry: cfg.symmetry,
    };
    let mut xp = seed_sets.clone();
    let mut xm: Vec<Vec<Transition>> = vec![Vec::new(); n];
    let mut state = StrategyState::new(cfg.strategy, n);
    report.strategy = state.strategy;
    loop {
        report.outer += 1;
        let mut inner_here = 0;
        let policy = loop {
            if timer.expired() {
                return Err(fail(FailureReason::Timeout, None));
            }
            report.inner += 1;
            inner_here += 1;
            let t0 = Instant::now();
            let plus = gather(&xp, &state.q);
            let minus = gather(&xm, &state.q);
            report.s = seen.len();
            let matrix = SampleMatrix::from_transitions(pool, &tasks, &plus, &minus)
                .map_err(|e| fail(FailureReason::Edge, Some(e.to_string())))?;
            let hsp = build_hsp(&matrix).map_err(|e| fail(FailureReason::Edge, Some(e.to_string())))?;
            let rel = Relations::new(&matrix);
            report.timings.prep += t0.elapsed().as_secs_f64();
            let t1 = Instant::now();
            let run = run_genex_with(&hsp, &rel);
            report.timings.genex += t1.elapsed().as_secs_f64();
            report.q_prime = state.q.len();
            report.inner_last = inner_here;
            report.x_plus = plus.len();
            report.x_minus = minus.len();
            report.h = hsp.len();
            let sol = match run.result {
                GenexResult::Solution(s) => s,
                GenexResult::Failure(f) => {
                    let witness = match f.origin {
                        Origin::GoodChange { plus: i } | Origin::Distinguish { plus: i, .. } => {
                            describe_transition(&tasks[plus[i].instance], &plus[i])
                        }
                        Origin::GoalSep { .. } => "goal separation".to_string(),
                    };
                    let reason = match f.reason {
                        GenexFailure::EdgeUnhit => FailureReason::Edge,
                        GenexFailure::NoEligible => FailureReason::NoEligible,
                    };
                    return Err(fail(reason, Some(witness)));
                }
            };
            let g = &sol.features;
            let ranking = localize_ranking(&sol.ranking, g);
            let mut rules = project_rules(&matrix, g);
            let kinds: Vec<FeatureKind> = g.iter().map(|&f| pool.features[f].kind).collect();
            if cfg.simplify {
                let bad: Vec<(Vec<u32>, Vec<u32>)> = matrix
                    .minus
                    .iter()
                    .map(|&(s, t)| {
                        (
                            g.iter().map(|&f| matrix.values[s][f]).collect(),
                            g.iter().map(|&f| matrix.values[t][f]).collect(),
                        )
                    })
                    .collect();
                rules = simplify(&rules, &kinds, &ranking, cfg.k, &bad);
            }
            let mut policy = Policy::new(g.iter().map(|&f| pool.features[f].clone()).collect(), rules);
            policy.ranking = Some(ranking);
            report.g = g.len();
            report.pi = policy.rules.len();

            let t2 = Instant::now();
            let mut failure = None;
            for &i in &state.q {
                let v = analyze(&policy, &tasks[i], &classifiers[i], &opts).map_err(search_failure)?;
                if !v.solves() {
                    failure = Some((i, v));
                    break;
                }
            }
            report.timings.verify += t2.elapsed().as_secs_f64();
            let Some((i, v)) = failure else { break policy };
            match v.outcome {
                Outcome::NotClosed(t) => {
                    let plan = solve(&tasks[i], i, &t, cfg.plan_budget)
                        .map_err(|e| search_failure(PolicyError::Search(e)))?;
                    let tr = plan.transitions().into_iter().next().ok_or_else(|| fail(FailureReason::Timeout, None))?;
                    seen.insert((i, tr.source.clone()));
                    seen.insert((i, tr.target.clone()));
                    push_unique(&mut xp[i], tr);
                }
                Outcome::Unsafe(s, t) => {
                    seen.insert((i, s.clone()));
                    seen.insert((i, t.clone()));
                    push_unique(&mut xm[i], Transition { instance: i, source: s, target: t });
                }
                Outcome::Cyclic(_) => {
                    return Err(fail(FailureReason::Cyclic, Some(tasks[i].name.clone())));
                }
                Outcome::Solves => unreachable!("failing verdict"),
            }
        };

        let t3 = Instant::now();
        let verdicts: Vec<Result<Verdict, PolicyError>> = (0..n)
            .into_par_iter()
            .map(|i| analyze(&policy, &tasks[i], &classifiers[i], &opts))
            .collect();
        report.timings.verify += t3.elapsed().as_secs_f64();
        let mut failing = None;
        for (i, v) in verdicts.into_iter().enumerate() {
            if !v.map_err(search_failure)?.solves() {
                failing = Some(i);
                break;
            }
        }
        let Some(l) = failing else { return Ok(policy) };
        if timer.expired() {
            return Err(fail(FailureReason::Timeout, None));
        }
        if next_q(&mut state, l).is_none() {
            if cfg.strategy == Strategy::Auto && state.strategy == Strategy::S1 {
                state = switch_strategy(&state);
                report.strategy = Strategy::S2;
                xp = seed_sets.clone();
                xm = vec![Vec::new(); n];
            } else {
                return Err(fail(FailureReason::Exhausted, None));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::{Cond, Test};
    use crate::termination::Rank;

    #[test]
    fn s1_updates() {
        let mut s = StrategyState::with_q(Strategy::S1, 8, vec![1]);
        assert_eq!(next_q(&mut s, 4), Some(vec![4]));
        assert_eq!(next_q(&mut s, 2), Some(vec![5]));
        let mut s = StrategyState::with_q(Strategy::S1, 3, vec![2]);
        assert_eq!(next_q(&mut s, 0), None);
    }

    #[test]
    fn s2_updates() {
        let mut s = StrategyState::with_q(Strategy::S2, 8, vec![3]);
        assert_eq!(next_q(&mut s, 1), Some(vec![1, 3]));
        assert_eq!(next_q(&mut s, 5), Some(vec![5]));
        let fresh = switch_strategy(&s);
        assert_eq!(fresh.strategy, Strategy::S2);
        assert_eq!(fresh.q, vec![0]);
    }

    #[test]
    fn simplify_drops_free_conditions() {
        // n decreases, b is an unrelated Boolean that never changes
        let kinds = [FeatureKind::Numerical, FeatureKind::Boolean];
        let r = Rule::new(
            vec![Cond { feature: 0, test: Test::Gt0 }, Cond { feature: 1, test: Test::BoolTrue }],
            vec![Eff { feature: 0, change: Change::Dec }],
        );
        let mut ranking = Ranking::default();
        ranking.ranks.insert(0, Rank { rank: 0, support: vec![] });
        ranking.ranks.insert(1, Rank { rank: 0, support: vec![] });
        let out = simplify(std::slice::from_ref(&r), &kinds, &ranking, 1, &[]);
        assert_eq!(out[0].cond, Vec::<Cond>::new());
        // a bad transition with b false keeps the condition on b
        let bad = vec![(vec![2, 0], vec![1, 0])];
        let out = simplify(&[r], &kinds, &ranking, 1, &bad);
        assert_eq!(out[0].cond, vec![Cond { feature: 1, test: Test::BoolTrue }]);
    }

    #[test]
    fn report_table_headers() {
        let t = RunReport::table(&[]);
        let head: Vec<&str> = t.split_whitespace().collect();
        assert_eq!(head, HEADERS.to_vec());
    }
}
