//! Complete search over grounded tasks: shortest plans, dead-end
//! classification, full state-space expansion and IW(k).

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};
use std::sync::RwLock;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::model::{State, Task, Transition};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Budget {
    pub nodes: Option<usize>,
    pub time: Option<Duration>,
}

impl Budget {
    pub fn unlimited() -> Budget {
        Budget::default()
    }

    pub fn nodes(n: usize) -> Budget {
        Budget {
            nodes: Some(n),
            time: None,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SearchError {
    #[error("unsolvable")]
    Unsolvable,
    #[error("budget exceeded after {nodes} nodes")]
    BudgetExceeded { nodes: usize },
}

pub(crate) struct Meter {
    start: Instant,
    budget: Budget,
    pub(crate) nodes: usize,
}

impl Meter {
    pub(crate) fn new(budget: Budget) -> Meter {
        Meter {
            start: Instant::now(),
            budget,
            nodes: 0,
        }
    }

    pub(crate) fn tick(&mut self) -> Result<(), SearchError> {
        self.nodes += 1;
        let over_nodes = self.budget.nodes.is_some_and(|n| self.nodes > n);
        let over_time = self.nodes.is_multiple_of(256)
            && self.budget.time.is_some_and(|t| self.start.elapsed() > t);
        if over_nodes || over_time {
            Err(SearchError::BudgetExceeded { nodes: self.nodes })
        } else {
            Ok(())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plan {
    pub instance: usize,
    pub actions: Vec<usize>,
    /// `actions.len() + 1` states, starting with the origin.
    pub states: Vec<State>,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn transitions(&self) -> Vec<Transition> {
        self.states
            .windows(2)
            .map(|w| Transition {
                instance: self.instance,
                source: w[0].clone(),
                target: w[1].clone(),
            })
            .collect()
    }

    /// One `(name obj ...)` line per action.
    pub fn to_text(&self, task: &Task) -> String {
        self.actions
            .iter()
            .map(|&a| task.action_name(a) + "\n")
            .collect()
    }

    /// Replays a newline-separated action list from the initial state.
    pub fn from_text(task: &Task, instance: usize, text: &str) -> Option<Plan> {
        let mut states = vec![task.init.clone()];
        let mut actions = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with(';')) {
            let a = task.find_action(line)?;
            let cur = states.last()?;
            if !task.actions[a].applicable(cur) {
                return None;
            }
            states.push(task.actions[a].apply(cur));
            actions.push(a);
        }
        Some(Plan {
            instance,
            actions,
            states,
        })
    }
}

fn rebuild(
    instance: usize,
    states: Vec<State>,
    parent: &[(usize, usize)],
    mut node: usize,
) -> Plan {
    let mut idx = vec![node];
    let mut actions = Vec::new();
    while node != 0 {
        let (p, a) = parent[node];
        actions.push(a);
        idx.push(p);
        node = p;
    }
    idx.reverse();
    actions.reverse();
    let mut slots: Vec<Option<State>> = states.into_iter().map(Some).collect();
    Plan {
        instance,
        actions,
        states: idx.into_iter().map(|i| slots[i].take().unwrap_or_else(|| unreachable!())).collect(),
    }
}

/// Breadth-first search for a shortest plan from `from`. Ties break by
/// ground-action order.
pub fn solve(task: &Task, instance: usize, from: &State, budget: Budget) -> Result<Plan, SearchError> {
    if task.is_goal(from) {
        return Ok(Plan {
            instance,
            actions: vec![],
            states: vec![from.clone()],
        });
    }
    let mut meter = Meter::new(budget);
    let mut states = vec![from.clone()];
    let mut parent = vec![(0usize, usize::MAX)];
    let mut seen: HashMap<State, usize> = HashMap::from([(from.clone(), 0)]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        meter.tick()?;
        let s = states[i].clone();
        for (a, t) in task.successors(&s) {
            if seen.contains_key(&t) {
                continue;
            }
            let j = states.len();
            let goal = task.is_goal(&t);
            seen.insert(t.clone(), j);
            states.push(t);
            parent.push((i, a));
            if goal {
                return Ok(rebuild(instance, states, &parent, j));
            }
            queue.push_back(j);
        }
    }
    Err(SearchError::Unsolvable)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StateClass {
    Goal,
    Alive,
    DeadEnd,
    Unreachable,
}

/// Decides whether a state is a dead end. Injected into verification so
/// tests can use precomputed tables.
pub trait DeadEndOracle: Sync {
    fn is_dead_end(&self, task: &Task, s: &State) -> Result<bool, SearchError>;
}

/// Dead-end oracle backed by complete search, memoized per instance.
#[derive(Debug, Default)]
pub struct Classifier {
    cache: RwLock<HashMap<State, bool>>,
    budget: Budget,
}

impl Classifier {
    pub fn new(budget: Budget) -> Classifier {
        Classifier {
            cache: RwLock::new(HashMap::new()),
            budget,
        }
    }

    pub fn cached(&self) -> usize {
        self.cache.read().map(|c| c.len()).unwrap_or(0)
    }

    pub fn classify(&self, task: &Task, s: &State) -> Result<StateClass, SearchError> {
        if task.is_goal(s) {
            return Ok(StateClass::Goal);
        }
        Ok(if self.is_dead_end(task, s)? {
            StateClass::DeadEnd
        } else {
            StateClass::Alive
        })
    }

    fn lookup(&self, s: &State) -> Option<bool> {
        self.cache.read().ok().and_then(|c| c.get(s).copied())
    }

    /// Greedy best-first search on the number of unmet goal atoms. The
    /// search is complete: it returns "dead end" only after exhausting every
    /// state reachable from `s`, and all of those are dead ends as well.
    fn search(&self, task: &Task, s: &State) -> Result<bool, SearchError> {
        let h = |t: &State| task.goal.iter().filter(|&&g| !t.contains(g)).count();
        let mut meter = Meter::new(self.budget);
        let mut states = vec![s.clone()];
        let mut parent = vec![usize::MAX];
        let mut seen: HashSet<State> = HashSet::from([s.clone()]);
        let mut open = BinaryHeap::from([Reverse((h(s), 0usize))]);
        let mut found = None;
        'outer: while let Some(Reverse((_, i))) = open.pop() {
            meter.tick()?;
            let cur = states[i].clone();
            for (_, t) in task.successors(&cur) {
                if seen.contains(&t) {
                    continue;
                }
                match self.lookup(&t) {
                    Some(true) => continue,
                    Some(false) => {
                        found = Some(i);
                        break 'outer;
                    }
                    None => {}
                }
                let j = states.len();
                seen.insert(t.clone());
                parent.push(i);
                let goal = task.is_goal(&t);
                open.push(Reverse((h(&t), j)));
                states.push(t);
                if goal {
                    found = Some(j);
                    break 'outer;
                }
            }
        }
        let mut cache = self.cache.write().unwrap_or_else(|e| e.into_inner());
        match found {
            Some(mut j) => {
                loop {
                    cache.insert(states[j].clone(), false);
                    if j == 0 {
                        break;
                    }
                    j = parent[j];
                }
                Ok(false)
            }
            None => {
                for t in states {
                    cache.insert(t, true);
                }
                Ok(true)
            }
        }
    }
}

impl DeadEndOracle for Classifier {
    fn is_dead_end(&self, task: &Task, s: &State) -> Result<bool, SearchError> {
        if let Some(d) = self.lookup(s) {
            return Ok(d);
        }
        if task.is_goal(s) {
            return Ok(false);
        }
        self.search(task, s)
    }
}

/// Dead-end oracle given as an explicit set of dead-end states.
impl DeadEndOracle for HashSet<State> {
    fn is_dead_end(&self, _task: &Task, s: &State) -> Result<bool, SearchError> {
        Ok(self.contains(s))
    }
}

/// The reachable state space of a task, in breadth-first order.
#[derive(Clone, Debug)]
pub struct StateSpace {
    pub states: Vec<State>,
    pub index: HashMap<State, usize>,
    /// Outgoing `(action, target)` edges per state, in action order.
    pub edges: Vec<Vec<(usize, usize)>>,
    pub goal: Vec<bool>,
    /// Breadth-first depth from the root.
    pub depth: Vec<usize>,
    /// Length of a shortest path to a goal, `None` for dead ends.
    pub goal_distance: Vec<Option<usize>>,
    /// False when expansion stopped at the state limit.
    pub complete: bool,
}

impl StateSpace {
    /// Expands up to `limit` states breadth-first from `root`. States beyond
    /// the limit are dropped together with edges into them.
    pub fn expand(task: &Task, root: &State, limit: usize) -> StateSpace {
        let mut states = vec![root.clone()];
        let mut index = HashMap::from([(root.clone(), 0usize)]);
        let mut edges = Vec::new();
        let mut depth = vec![0];
        let mut complete = true;
        let mut i = 0;
        while i < states.len() {
            let s = states[i].clone();
            let mut out = Vec::new();
            for (a, t) in task.successors(&s) {
                let j = match index.get(&t) {
                    Some(&j) => j,
                    None if states.len() < limit => {
                        let j = states.len();
                        index.insert(t.clone(), j);
                        states.push(t);
                        depth.push(depth[i] + 1);
                        j
                    }
                    None => {
                        complete = false;
                        continue;
                    }
                };
                out.push((a, j));
            }
            edges.push(out);
            i += 1;
        }
        let goal: Vec<bool> = states.iter().map(|s| task.is_goal(s)).collect();
        let mut rev: Vec<Vec<usize>> = vec![Vec::new(); states.len()];
        for (i, out) in edges.iter().enumerate() {
            for &(_, j) in out {
                rev[j].push(i);
            }
        }
        let mut goal_distance = vec![None; states.len()];
        let mut queue = VecDeque::new();
        for (i, &g) in goal.iter().enumerate() {
            if g {
                goal_distance[i] = Some(0);
                queue.push_back(i);
            }
        }
        while let Some(j) = queue.pop_front() {
            let d = goal_distance[j].unwrap_or(0);
            for &i in &rev[j] {
                if goal_distance[i].is_none() {
                    goal_distance[i] = Some(d + 1);
                    queue.push_back(i);
                }
            }
        }
        StateSpace {
            states,
            index,
            edges,
            goal,
            depth,
            goal_distance,
            complete,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Class of a state; only meaningful for complete expansions.
    pub fn class_of(&self, s: &State) -> StateClass {
        match self.index.get(s) {
            None => StateClass::Unreachable,
            Some(&i) if self.goal[i] => StateClass::Goal,
            Some(&i) if self.goal_distance[i].is_none() => StateClass::DeadEnd,
            Some(_) => StateClass::Alive,
        }
    }

    pub fn transitions(&self, instance: usize) -> Vec<Transition> {
        let mut out = Vec::new();
        for (i, es) in self.edges.iter().enumerate() {
            for &(_, j) in es {
                out.push(Transition {
                    instance,
                    source: self.states[i].clone(),
                    target: self.states[j].clone(),
                });
            }
        }
        out
    }
}

/// Novelty table over atom tuples of size at most `k` (1 or 2).
struct Novelty {
    k: usize,
    singles: HashSet<u32>,
    pairs: HashSet<(u32, u32)>,
}

impl Novelty {
    fn new(k: usize) -> Novelty {
        Novelty {
            k,
            singles: HashSet::new(),
            pairs: HashSet::new(),
        }
    }

    /// Records the tuples of `s`; true if any was new.
    fn visit(&mut self, s: &State) -> bool {
        let atoms = s.atoms();
        let mut novel = false;
        for (i, &a) in atoms.iter().enumerate() {
            novel |= self.singles.insert(a);
            if self.k >= 2 {
                for &b in &atoms[i + 1..] {
                    novel |= self.pairs.insert((a, b));
                }
            }
        }
        novel
    }
}

/// Iterated-width search for the nearest `t` with `accept(from, t)`.
///
/// Width 0 means `t` is a direct successor. Otherwise IW(1), IW(2), ... up to
/// `k_max` run in turn and the first width that reaches an accepted state is
/// reported. `k_max = usize::MAX` adds a final unpruned breadth-first pass.
/// Finite widths above 2 are treated as 2.
pub fn iw_search(
    task: &Task,
    from: &State,
    k_max: usize,
    accept: impl Fn(&State, &State) -> bool,
    budget: Budget,
) -> Result<Option<(State, usize)>, SearchError> {
    let mut meter = Meter::new(budget);
    for (_, t) in task.successors(from) {
        if accept(from, &t) {
            return Ok(Some((t, 0)));
        }
    }
    let mut widths: Vec<usize> = (1..=k_max.min(2)).collect();
    if k_max == usize::MAX {
        widths.push(usize::MAX);
    }
    for k in widths {
        let mut novelty = Novelty::new(k);
        if k != usize::MAX {
            novelty.visit(from);
        }
        let mut seen: HashSet<State> = HashSet::from([from.clone()]);
        let mut queue = VecDeque::from([from.clone()]);
        while let Some(s) = queue.pop_front() {
            meter.tick()?;
            for (_, t) in task.successors(&s) {
                if !seen.insert(t.clone()) {
                    continue;
                }
                if k != usize::MAX && !novelty.visit(&t) {
                    continue;
                }
                if accept(from, &t) {
                    return Ok(Some((t, k)));
                }
                queue.push_back(t);
            }
        }
    }
    Ok(None)
}
