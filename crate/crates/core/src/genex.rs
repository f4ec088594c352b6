//! The hitting-set problem induced by good and bad transitions, and the
//! greedy chain-based solver for it.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::features::{ConceptError, FeatureKind, FeaturePool};
use crate::model::{State, Task, Transition};
use crate::policy::{project, Rule};
use crate::termination::{Rank, Ranking};

/// Feature values on the states of a learning sample. Transitions are pairs
/// of state indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleMatrix {
    pub costs: Vec<u64>,
    pub kinds: Vec<FeatureKind>,
    /// Per state, one value per feature (Boolean features clamped).
    pub values: Vec<Vec<u32>>,
    pub goal: Vec<bool>,
    pub plus: Vec<(usize, usize)>,
    pub minus: Vec<(usize, usize)>,
}

impl SampleMatrix {
    pub fn n_features(&self) -> usize {
        self.costs.len()
    }

    /// Evaluates every pool feature on every state of `plus` and `minus`.
    pub fn from_transitions(
        pool: &FeaturePool,
        tasks: &[Task],
        plus: &[Transition],
        minus: &[Transition],
    ) -> Result<SampleMatrix, ConceptError> {
        let mut index: HashMap<(usize, &State), usize> = HashMap::new();
        let mut states: Vec<(usize, &State)> = Vec::new();
        let mut intern = Vec::new();
        for t in plus.iter().chain(minus) {
            for s in [&t.source, &t.target] {
                let n = states.len();
                let i = *index.entry((t.instance, s)).or_insert(n);
                if i == n {
                    states.push((t.instance, s));
                }
                intern.push(i);
            }
        }
        let np = plus.len();
        let plus_ids = (0..np).map(|k| (intern[2 * k], intern[2 * k + 1])).collect();
        let minus_ids = (np..np + minus.len()).map(|k| (intern[2 * k], intern[2 * k + 1])).collect();
        let domain = match tasks.first() {
            Some(t) => t.domain.clone(),
            None => return Err(ConceptError::UnknownSymbol("no instances".into())),
        };
        let ev = pool.evaluator(&domain)?;
        let mut values = vec![Vec::new(); states.len()];
        let mut by_inst: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, (inst, _)) in states.iter().enumerate() {
            by_inst.entry(*inst).or_default().push(i);
        }
        for (inst, ids) in by_inst {
            let task = tasks
                .get(inst)
                .ok_or_else(|| ConceptError::UnknownSymbol(format!("instance {inst}")))?;
            let bound = ev.bind(task)?;
            let vals: Vec<Vec<u32>> = ids.par_iter().map(|&i| bound.values(states[i].1)).collect();
            for (i, v) in ids.into_iter().zip(vals) {
                values[i] = v;
            }
        }
        let goal = states.iter().map(|(inst, s)| tasks[*inst].is_goal(s)).collect();
        Ok(SampleMatrix {
            costs: pool.costs(),
            kinds: pool.features.iter().map(|f| f.kind).collect(),
            values,
            goal,
            plus: plus_ids,
            minus: minus_ids,
        })
    }

    fn sig(&self, e: (usize, usize), f: usize) -> (bool, Delta) {
        change_signature(self.values[e.0][f], self.values[e.1][f])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Delta {
    Inc,
    Dec,
    Same,
}

/// Truth value at the source and direction of change.
pub fn change_signature(s: u32, t: u32) -> (bool, Delta) {
    let d = match t.cmp(&s) {
        Ordering::Greater => Delta::Inc,
        Ordering::Less => Delta::Dec,
        Ordering::Equal => Delta::Same,
    };
    (s > 0, d)
}

/// Whether a feature tells apart two transitions given its values on each.
pub fn distinguishes(e: (u32, u32), e2: (u32, u32)) -> bool {
    change_signature(e.0, e.1) != change_signature(e2.0, e2.1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Origin {
    /// Features that change across good transition `plus`.
    GoodChange { plus: usize },
    /// Features telling good transition `plus` from bad transition `minus`.
    Distinguish { plus: usize, minus: usize },
    /// Features whose truth value differs on a goal and a non-goal state.
    GoalSep { goal: usize, other: usize },
}

#[derive(Clone, Debug)]
pub struct Subset {
    pub members: FixedBitSet,
    pub origin: Origin,
}

#[derive(Clone, Debug)]
pub struct HittingSetProblem {
    pub costs: Vec<u64>,
    pub subsets: Vec<Subset>,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum HspError {
    #[error("no good transitions")]
    EmptyPlus,
    #[error("good transition {plus} is also bad transition {minus}")]
    Overlap { plus: usize, minus: usize },
}

impl HittingSetProblem {
    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn hits_all(&self, g: &[usize]) -> bool {
        self.subsets.iter().all(|s| g.iter().any(|&f| s.members.contains(f)))
    }
}

/// Distinct states of the good transitions, in order of first appearance.
fn plus_states(m: &SampleMatrix) -> Vec<usize> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &(s, t) in &m.plus {
        for x in [s, t] {
            if seen.insert(x) {
                out.push(x);
            }
        }
    }
    out
}

pub fn build_hsp(m: &SampleMatrix) -> Result<HittingSetProblem, HspError> {
    if m.plus.is_empty() {
        return Err(HspError::EmptyPlus);
    }
    for (i, e) in m.plus.iter().enumerate() {
        if let Some(j) = m.minus.iter().position(|x| x == e) {
            return Err(HspError::Overlap { plus: i, minus: j });
        }
    }
    let nf = m.n_features();
    let mut subsets = Vec::new();
    let collect = |pred: &dyn Fn(usize) -> bool| {
        let mut b = FixedBitSet::with_capacity(nf);
        for f in 0..nf {
            if pred(f) {
                b.insert(f);
            }
        }
        b
    };
    for (i, &(s, t)) in m.plus.iter().enumerate() {
        subsets.push(Subset {
            members: collect(&|f| m.values[s][f] != m.values[t][f]),
            origin: Origin::GoodChange { plus: i },
        });
    }
    for (i, &e) in m.plus.iter().enumerate() {
        for (j, &e2) in m.minus.iter().enumerate() {
            subsets.push(Subset {
                members: collect(&|f| m.sig(e, f) != m.sig(e2, f)),
                origin: Origin::Distinguish { plus: i, minus: j },
            });
        }
    }
    let states = plus_states(m);
    for &g in states.iter().filter(|&&s| m.goal[s]) {
        for &o in states.iter().filter(|&&s| !m.goal[s]) {
            subsets.push(Subset {
                members: collect(&|f| (m.values[g][f] > 0) != (m.values[o][f] > 0)),
                origin: Origin::GoalSep { goal: g, other: o },
            });
        }
    }
    Ok(HittingSetProblem {
        costs: m.costs.clone(),
        subsets,
    })
}

/// Monotonicity of features over the good transitions, and conditional
/// monotonicity given one other feature.
#[derive(Clone, Debug)]
pub struct Relations {
    inc: Vec<FixedBitSet>,
    dec: Vec<FixedBitSet>,
    same: [Vec<FixedBitSet>; 2],
    /// `edges[g]` lists the non-monotone `f` that are monotone given `g`.
    pub edges: Vec<Vec<usize>>,
}

impl Relations {
    pub fn new(m: &SampleMatrix) -> Relations {
        let nf = m.n_features();
        let np = m.plus.len();
        let empty = FixedBitSet::with_capacity(np);
        let mut inc = vec![empty.clone(); nf];
        let mut dec = vec![empty.clone(); nf];
        let mut same = [vec![empty.clone(); nf], vec![empty; nf]];
        for (i, &(s, t)) in m.plus.iter().enumerate() {
            for f in 0..nf {
                let (a, b) = (m.values[s][f], m.values[t][f]);
                match b.cmp(&a) {
                    Ordering::Greater => inc[f].insert(i),
                    Ordering::Less => dec[f].insert(i),
                    Ordering::Equal => same[usize::from(a > 0)][f].insert(i),
                }
            }
        }
        let mut rel = Relations {
            inc,
            dec,
            same,
            edges: Vec::new(),
        };
        let targets: Vec<usize> = (0..nf).filter(|&f| !rel.monotone(f)).collect();
        rel.edges = (0..nf)
            .into_par_iter()
            .map(|g| {
                targets
                    .iter()
                    .copied()
                    .filter(|&f| f != g && rel.monotone_given(f, g))
                    .collect()
            })
            .collect();
        rel
    }

    pub fn monotone(&self, f: usize) -> bool {
        self.inc[f].is_clear() || self.dec[f].is_clear()
    }

    pub fn monotone_given(&self, f: usize, g: usize) -> bool {
        self.same.iter().all(|sb| self.inc[f].is_disjoint(&sb[g]) || self.dec[f].is_disjoint(&sb[g]))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Chain {
    /// `f_0, ..., f`: the first is monotone, each next monotone given the previous.
    pub features: Vec<usize>,
    pub cost: u64,
}

impl Chain {
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.features.windows(2).map(|w| (w[0], w[1]))
    }
}

/// Minimum-cost chains under `costs`, ties broken by length and then by the
/// lexicographically smallest feature sequence.
pub fn compute_chains(rel: &Relations, costs: &[u64]) -> Vec<Option<Chain>> {
    let nf = costs.len();
    let mut best: Vec<Option<(u64, usize, Vec<usize>)>> = vec![None; nf];
    let mut done = vec![false; nf];
    let mut heap = BinaryHeap::new();
    for f in 0..nf {
        if rel.monotone(f) {
            let label = (costs[f], 1, vec![f]);
            best[f] = Some(label.clone());
            heap.push(Reverse(label));
        }
    }
    while let Some(Reverse((c, len, path))) = heap.pop() {
        let g = path[path.len() - 1];
        if done[g] {
            continue;
        }
        done[g] = true;
        for &f in &rel.edges[g] {
            if done[f] {
                continue;
            }
            let mut p = path.clone();
            p.push(f);
            let label = (c + costs[f], len + 1, p);
            if best[f].as_ref().is_none_or(|b| label < *b) {
                best[f] = Some(label.clone());
                heap.push(Reverse(label));
            }
        }
    }
    best.into_iter()
        .map(|b| b.map(|(cost, _, features)| Chain { features, cost }))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FailureReason {
    /// Some good transition is left without a changing feature.
    EdgeUnhit,
    /// No eligible chain hits a remaining subset.
    NoEligible,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub reason: FailureReason,
    /// Index of the unhit subset reported.
    pub witness: usize,
    pub origin: Origin,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    /// Selected pool feature ids, ascending.
    pub features: Vec<usize>,
    /// Ranking over pool ids, from the first chain that added each feature.
    pub ranking: Ranking,
    pub ord: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GenexResult {
    Solution(Solution),
    Failure(Failure),
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceStep {
    pub chosen: usize,
    pub chain: Vec<usize>,
    pub newly_hit: u64,
    pub chain_cost: u64,
    pub unhit_before: usize,
    pub unhit_after: usize,
}

#[derive(Clone, Debug)]
pub struct GenexRun {
    pub result: GenexResult,
    pub trace: Vec<TraceStep>,
}

impl GenexRun {
    pub fn trace_json(&self) -> String {
        serde_json::to_string_pretty(&self.trace).unwrap_or_default()
    }
}

fn acyclic(edges: &BTreeSet<(usize, usize)>) -> bool {
    let mut indeg: BTreeMap<usize, usize> = BTreeMap::new();
    let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(a, b) in edges {
        indeg.entry(a).or_insert(0);
        *indeg.entry(b).or_insert(0) += 1;
        out.entry(a).or_default().push(b);
    }
    let mut ready: Vec<usize> = indeg.iter().filter(|(_, &d)| d == 0).map(|(&n, _)| n).collect();
    let mut seen = 0;
    while let Some(n) = ready.pop() {
        seen += 1;
        for &b in out.get(&n).map(|v| v.as_slice()).unwrap_or(&[]) {
            let d = indeg.get_mut(&b).expect("node");
            *d -= 1;
            if *d == 0 {
                ready.push(b);
            }
        }
    }
    seen == indeg.len()
}

/// Greedy loop: repeatedly add the eligible chain with the best ratio of
/// newly hit subsets to chain cost, then make its features free.
pub fn run_genex(problem: &HittingSetProblem, m: &SampleMatrix) -> GenexRun {
    run_genex_with(problem, &Relations::new(m))
}

pub fn run_genex_with(problem: &HittingSetProblem, rel: &Relations) -> GenexRun {
    let nf = problem.costs.len();
    let ns = problem.subsets.len();
    let mut hits = vec![FixedBitSet::with_capacity(ns); nf];
    for (i, s) in problem.subsets.iter().enumerate() {
        for f in s.members.ones() {
            hits[f].insert(i);
        }
    }
    let mut unhit = FixedBitSet::with_capacity(ns);
    unhit.insert_range(..);
    let mut costs = problem.costs.clone();
    let mut selected = vec![false; nf];
    let mut support: BTreeMap<usize, Option<usize>> = BTreeMap::new();
    let mut ord: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut trace = Vec::new();
    let mut buf = FixedBitSet::with_capacity(ns);
    loop {
        if unhit.is_clear() {
            break;
        }
        let chains = compute_chains(rel, &costs);
        let mut cands: Vec<(u64, u64, usize)> = Vec::new();
        for (f, ch) in chains.iter().enumerate() {
            let Some(ch) = ch else { continue };
            if ch.cost == 0 {
                continue;
            }
            buf.clear();
            for &g in &ch.features {
                buf.union_with(&hits[g]);
            }
            buf.intersect_with(&unhit);
            let newly = buf.count_ones(..) as u64;
            if newly > 0 {
                cands.push((newly, ch.cost, f));
            }
        }
        cands.sort_by(|a, b| {
            let lhs = u128::from(b.0) * u128::from(a.1);
            let rhs = u128::from(a.0) * u128::from(b.1);
            lhs.cmp(&rhs).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
        });
        let pick = cands.into_iter().find(|&(_, _, f)| {
            let ch = chains[f].as_ref().expect("chain");
            let mut trial = ord.clone();
            trial.extend(ch.edges());
            acyclic(&trial)
        });
        let Some((newly, cost, f)) = pick else {
            let good_unhit = unhit
                .ones()
                .find(|&i| matches!(problem.subsets[i].origin, Origin::GoodChange { .. }));
            let (reason, witness) = match good_unhit {
                Some(i) => (FailureReason::EdgeUnhit, i),
                None => (FailureReason::NoEligible, unhit.ones().next().expect("unhit subset")),
            };
            return GenexRun {
                result: GenexResult::Failure(Failure {
                    reason,
                    witness,
                    origin: problem.subsets[witness].origin,
                }),
                trace,
            };
        };
        let ch = chains[f].clone().expect("chain");
        let before = unhit.count_ones(..);
        for (i, &g) in ch.features.iter().enumerate() {
            selected[g] = true;
            costs[g] = 0;
            support.entry(g).or_insert(if i == 0 { None } else { Some(ch.features[i - 1]) });
            unhit.difference_with(&hits[g]);
        }
        ord.extend(ch.edges());
        trace.push(TraceStep {
            chosen: f,
            chain: ch.features.clone(),
            newly_hit: newly,
            chain_cost: cost,
            unhit_before: before,
            unhit_after: unhit.count_ones(..),
        });
    }
    let mut ranking = Ranking::default();
    fn rank_of(f: usize, support: &BTreeMap<usize, Option<usize>>) -> usize {
        match support[&f] {
            None => 0,
            Some(g) => 1 + rank_of(g, support),
        }
    }
    for (&f, &s) in &support {
        ranking.ranks.insert(
            f,
            Rank {
                rank: rank_of(f, &support),
                support: s.into_iter().collect(),
            },
        );
    }
    GenexRun {
        result: GenexResult::Solution(Solution {
            features: (0..nf).filter(|&f| selected[f]).collect(),
            ranking,
            ord: ord.into_iter().collect(),
        }),
        trace,
    }
}

/// The policy π(G, X⁺): good transitions projected on `g`, deduplicated and
/// sorted. Rules index features by position in `g`.
pub fn project_rules(m: &SampleMatrix, g: &[usize]) -> Vec<Rule> {
    let kinds: Vec<FeatureKind> = g.iter().map(|&f| m.kinds[f]).collect();
    let mut rules: Vec<Rule> = m
        .plus
        .iter()
        .map(|&(s, t)| {
            let vs: Vec<u32> = g.iter().map(|&f| m.values[s][f]).collect();
            let vt: Vec<u32> = g.iter().map(|&f| m.values[t][f]).collect();
            project(&kinds, &vs, &vt)
        })
        .collect();
    rules.sort();
    rules.dedup();
    rules
}

/// Restricts a ranking over pool ids to positions in `g`.
pub fn localize_ranking(ranking: &Ranking, g: &[usize]) -> Ranking {
    let pos: HashMap<usize, usize> = g.iter().enumerate().map(|(i, &f)| (f, i)).collect();
    Ranking {
        ranks: ranking
            .ranks
            .iter()
            .filter_map(|(f, r)| {
                Some((
                    *pos.get(f)?,
                    Rank {
                        rank: r.rank,
                        support: r.support.iter().filter_map(|s| pos.get(s).copied()).collect(),
                    },
                ))
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::termination::{stratify_rules, Rules};

    fn numeric(costs: Vec<u64>) -> Vec<FeatureKind> {
        vec![FeatureKind::Numerical; costs.len()]
    }

    #[test]
    fn signatures_and_distinguishing() {
        assert_eq!(change_signature(2, 1), (true, Delta::Dec));
        assert_eq!(change_signature(0, 0), (false, Delta::Same));
        assert_eq!(change_signature(0, 1), (false, Delta::Inc));
        assert!(distinguishes((2, 1), (3, 4)));
        assert!(!distinguishes((2, 1), (5, 4)));
        assert!(distinguishes((0, 0), (2, 2)));
    }

    /// Gripper signatures over features n, m, A (Boolean) and a constant junk feature.
    fn gripper_matrix() -> SampleMatrix {
        // states: (n, m, A, junk)
        let values = vec![
            vec![2, 0, 1, 5], // s0
            vec![1, 1, 1, 5], // s1 pick
            vec![1, 1, 0, 5], // s2 move to B
            vec![1, 0, 0, 5], // s3 drop
            vec![1, 0, 1, 5], // s4 back
            vec![0, 1, 1, 5], // s5 pick
            vec![0, 1, 0, 5], // s6 move
            vec![0, 0, 0, 5], // s7 goal
        ];
        let costs = vec![4, 3, 2, 1];
        SampleMatrix {
            kinds: vec![
                FeatureKind::Numerical,
                FeatureKind::Numerical,
                FeatureKind::Boolean,
                FeatureKind::Numerical,
            ],
            costs,
            values,
            goal: vec![false, false, false, false, false, false, false, true],
            plus: vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7)],
            minus: vec![],
        }
    }

    #[test]
    fn gripper_toy_solution() {
        let m = gripper_matrix();
        let h = build_hsp(&m).unwrap();
        assert_eq!(h.len(), 7 + 7);
        let rel = Relations::new(&m);
        assert!(rel.monotone(0));
        assert!(!rel.monotone(1));
        assert!(rel.monotone_given(1, 0));
        let chains = compute_chains(&rel, &m.costs);
        assert_eq!(chains[0].as_ref().unwrap().features, vec![0]);
        assert_eq!(chains[1].as_ref().unwrap().features, vec![0, 1]);
        let mut free = m.costs.clone();
        free[0] = 0;
        assert_eq!(compute_chains(&rel, &free)[1].as_ref().unwrap().cost, m.costs[1]);
        let run = run_genex(&h, &m);
        let GenexResult::Solution(sol) = run.result else { panic!("{:?}", run.result) };
        for f in [0, 1, 2] {
            assert!(sol.features.contains(&f), "{sol:?}");
        }
        assert!(h.hits_all(&sol.features));
        let rules = project_rules(&m, &sol.features);
        let local = localize_ranking(&sol.ranking, &sol.features);
        assert!(local.certifies(&Rules(&rules), 1));
        assert!(stratify_rules(&rules, &(0..sol.features.len()).collect::<Vec<_>>(), 1).is_ranked());
    }

    #[test]
    fn blind_pool_fails_on_edge() {
        let costs = vec![1];
        let m = SampleMatrix {
            kinds: numeric(costs.clone()),
            costs,
            values: vec![vec![1], vec![1], vec![2]],
            goal: vec![false, false, true],
            plus: vec![(0, 1), (1, 2)],
            minus: vec![],
        };
        let h = build_hsp(&m).unwrap();
        assert!(h.subsets[0].members.is_clear());
        let run = run_genex(&h, &m);
        match run.result {
            GenexResult::Failure(f) => {
                assert_eq!(f.reason, FailureReason::EdgeUnhit);
                assert_eq!(f.origin, Origin::GoodChange { plus: 0 });
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_subset_single_feature() {
        let costs = vec![2];
        let m = SampleMatrix {
            kinds: numeric(costs.clone()),
            costs,
            values: vec![vec![2], vec![1]],
            goal: vec![false, false],
            plus: vec![(0, 1)],
            minus: vec![],
        };
        let h = build_hsp(&m).unwrap();
        assert_eq!(h.len(), 1);
        let run = run_genex(&h, &m);
        assert_eq!(run.trace.len(), 1);
        let GenexResult::Solution(sol) = run.result else { panic!() };
        assert_eq!(sol.features, vec![0]);
    }

    #[test]
    fn distinguish_subset_counts_and_overlap() {
        let costs = vec![1, 1];
        let mut m = SampleMatrix {
            kinds: numeric(costs.clone()),
            costs,
            values: vec![vec![1, 0], vec![0, 0], vec![1, 1]],
            goal: vec![false; 3],
            plus: vec![(0, 1)],
            minus: vec![(0, 2)],
        };
        let h = build_hsp(&m).unwrap();
        let origins: Vec<Origin> = h.subsets.iter().map(|s| s.origin).collect();
        assert_eq!(
            origins,
            vec![Origin::GoodChange { plus: 0 }, Origin::Distinguish { plus: 0, minus: 0 }]
        );
        m.minus.push((0, 1));
        assert_eq!(build_hsp(&m).unwrap_err(), HspError::Overlap { plus: 0, minus: 1 });
    }

    #[test]
    fn acyclicity_check() {
        let e: BTreeSet<(usize, usize)> = [(0, 1), (1, 2)].into();
        assert!(acyclic(&e));
        let c: BTreeSet<(usize, usize)> = [(0, 1), (1, 2), (2, 0)].into();
        assert!(!acyclic(&c));
    }
}
