//! Bounded feature-pool generation with redundancy pruning.
//!
//! Concepts are generated layer by layer in increasing complexity. Within a
//! layer candidates are visited in canonical-text order, so the first concept
//! kept for a given denotation is the earliest one in the static ordering.
//! Denotations are compared over every state of the sample, which already
//! removes S-equivalent duplicates; features are then also pruned for T-
//! equivalence.

use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, HashSet};
use std::hash::{Hash, Hasher};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::concept::{Concept, ConceptError, Role};
use super::{Feature, FeatureEvaluator, FeatureKind};
use crate::model::{DomainSpec, State, Task, Transition};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolBounds {
    pub complexity: usize,
    pub depth: usize,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum PoolError {
    #[error("the pruning sample is empty")]
    EmptySample,
    #[error("generation bounds must be at least 1")]
    BadBounds,
    #[error("transition refers to unknown instance {0}")]
    UnknownInstance(usize),
    #[error(transparent)]
    Concept(#[from] ConceptError),
    #[error("malformed pool file: {0}")]
    Format(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeaturePool {
    /// Static order: complexity, then canonical concept text.
    pub features: Vec<Feature>,
    pub bounds: PoolBounds,
    pub sample_states: usize,
    pub sample_transitions: usize,
}

#[derive(Serialize, Deserialize)]
struct FeatureRecord {
    id: usize,
    kind: FeatureKind,
    concept: String,
    complexity: usize,
}

impl FeaturePool {
    /// A pool made of the given features, renumbered in list order.
    pub fn from_features(features: Vec<Feature>) -> FeaturePool {
        let features: Vec<Feature> = features
            .into_iter()
            .enumerate()
            .map(|(i, f)| Feature { id: i, ..f })
            .collect();
        let complexity = features.iter().map(|f| f.complexity).max().unwrap_or(0);
        let depth = features.iter().map(|f| f.concept.depth()).max().unwrap_or(0);
        FeaturePool {
            features,
            bounds: PoolBounds { complexity, depth },
            sample_states: 0,
            sample_transitions: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn costs(&self) -> Vec<u64> {
        self.features.iter().map(|f| f.complexity as u64).collect()
    }

    pub fn evaluator(&self, domain: &DomainSpec) -> Result<FeatureEvaluator, ConceptError> {
        FeatureEvaluator::new(domain, &self.features)
    }

    /// JSON array of `{id, kind, concept, complexity}` records.
    pub fn to_json(&self) -> String {
        let recs: Vec<FeatureRecord> = self
            .features
            .iter()
            .map(|f| FeatureRecord {
                id: f.id,
                kind: f.kind,
                concept: f.concept.to_string(),
                complexity: f.complexity,
            })
            .collect();
        serde_json::to_string_pretty(&recs).unwrap_or_default()
    }

    pub fn from_json(text: &str) -> Result<FeaturePool, PoolError> {
        let recs: Vec<FeatureRecord> =
            serde_json::from_str(text).map_err(|e| PoolError::Format(e.to_string()))?;
        let mut features = Vec::with_capacity(recs.len());
        for (i, r) in recs.into_iter().enumerate() {
            if r.id != i {
                return Err(PoolError::Format(format!("feature {i} has id {}", r.id)));
            }
            features.push(Feature::new(i, r.kind, Concept::parse(&r.concept)?));
        }
        Ok(FeaturePool::from_features(features))
    }
}

/// Per-transition value pairs plus the Boolean valuation of each distinct
/// sample state, in order of first appearance.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Signature {
    pub pairs: Vec<(u32, u32)>,
    pub bools: Vec<bool>,
}

fn distinct_states(sample: &[Transition]) -> (Vec<(usize, State)>, Vec<(usize, usize)>) {
    let mut index: HashMap<(usize, &State), usize> = HashMap::new();
    let mut states = Vec::new();
    let mut pairs = Vec::with_capacity(sample.len());
    for t in sample {
        let mut ids = [0usize; 2];
        for (k, s) in [&t.source, &t.target].into_iter().enumerate() {
            ids[k] = match index.get(&(t.instance, s)) {
                Some(&i) => i,
                None => {
                    states.push((t.instance, s.clone()));
                    index.insert((t.instance, s), states.len() - 1);
                    states.len() - 1
                }
            };
        }
        pairs.push((ids[0], ids[1]));
    }
    (states, pairs)
}

pub fn signature(f: &Feature, tasks: &[Task], sample: &[Transition]) -> Result<Signature, PoolError> {
    let (states, pairs) = distinct_states(sample);
    let ev = FeatureEvaluator::new(
        &tasks.first().ok_or(PoolError::EmptySample)?.domain,
        std::slice::from_ref(f),
    )?;
    let mut bound = HashMap::new();
    let mut values = Vec::with_capacity(states.len());
    for (inst, s) in &states {
        let task = tasks.get(*inst).ok_or(PoolError::UnknownInstance(*inst))?;
        if !bound.contains_key(inst) {
            bound.insert(*inst, ev.bind(task)?);
        }
        values.push(bound[inst].values(s)[0]);
    }
    Ok(Signature {
        pairs: pairs.iter().map(|&(a, b)| (values[a], values[b])).collect(),
        bools: values.iter().map(|&v| v > 0).collect(),
    })
}

/// Word layout of per-state object sets across the sample.
struct Layout<'a> {
    tasks: &'a [Task],
    states: Vec<(usize, State)>,
    n: Vec<usize>,
    w: Vec<usize>,
    off: Vec<usize>,
    total: usize,
    roff: Vec<usize>,
    rtotal: usize,
    mask: Vec<u64>,
}

impl Layout<'_> {
    fn new(tasks: &[Task], states: Vec<(usize, State)>) -> Layout<'_> {
        let mut n = Vec::new();
        let mut w = Vec::new();
        let mut off = Vec::new();
        let mut roff = Vec::new();
        let (mut total, mut rtotal) = (0, 0);
        for (inst, _) in &states {
            let k = tasks[*inst].objects.len();
            let words = k.div_ceil(64).max(1);
            n.push(k);
            w.push(words);
            off.push(total);
            roff.push(rtotal);
            total += words;
            rtotal += k * words;
        }
        let mut mask = vec![0u64; total];
        for i in 0..states.len() {
            for o in 0..n[i] {
                mask[off[i] + o / 64] |= 1 << (o % 64);
            }
        }
        Layout {
            tasks,
            states,
            n,
            w,
            off,
            total,
            roff,
            rtotal,
            mask,
        }
    }

    fn not(&self, a: &[u64]) -> Vec<u64> {
        a.iter().zip(&self.mask).map(|(x, m)| !x & m).collect()
    }

    fn and(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(x, y)| x & y).collect()
    }

    fn quantify(&self, role: &[u64], c: &[u64], forall: bool) -> Vec<u64> {
        let mut out = vec![0u64; self.total];
        for i in 0..self.states.len() {
            let (n, w, off, roff) = (self.n[i], self.w[i], self.off[i], self.roff[i]);
            let cs = &c[off..off + w];
            for a in 0..n {
                let row = &role[roff + a * w..roff + (a + 1) * w];
                let hit = if forall {
                    row.iter().zip(cs).all(|(r, c)| r & !c == 0)
                } else {
                    row.iter().zip(cs).any(|(r, c)| r & c != 0)
                };
                if hit {
                    out[off + a / 64] |= 1 << (a % 64);
                }
            }
        }
        out
    }

    fn inverse(&self, r: &[u64]) -> Vec<u64> {
        let mut out = vec![0u64; self.rtotal];
        for i in 0..self.states.len() {
            let (n, w, roff) = (self.n[i], self.w[i], self.roff[i]);
            for a in 0..n {
                for b in 0..n {
                    if r[roff + a * w + b / 64] >> (b % 64) & 1 == 1 {
                        out[roff + b * w + a / 64] |= 1 << (a % 64);
                    }
                }
            }
        }
        out
    }

    fn closure(&self, r: &[u64]) -> Vec<u64> {
        let mut out = r.to_vec();
        for i in 0..self.states.len() {
            let (n, w, roff) = (self.n[i], self.w[i], self.roff[i]);
            for k in 0..n {
                let row_k: Vec<u64> = out[roff + k * w..roff + (k + 1) * w].to_vec();
                for a in 0..n {
                    if out[roff + a * w + k / 64] >> (k % 64) & 1 == 1 {
                        for (x, y) in out[roff + a * w..roff + (a + 1) * w].iter_mut().zip(&row_k) {
                            *x |= y;
                        }
                    }
                }
            }
        }
        out
    }

    fn values(&self, den: &[u64]) -> Vec<u32> {
        (0..self.states.len())
            .map(|i| den[self.off[i]..self.off[i] + self.w[i]].iter().map(|x| x.count_ones()).sum())
            .collect()
    }
}

fn hash_words(d: &[u64]) -> u64 {
    let mut h = DefaultHasher::new();
    d.hash(&mut h);
    h.finish()
}

/// Keeps the first entry per distinct denotation.
struct Dedup {
    dens: Vec<Vec<u64>>,
    seen: HashMap<u64, Vec<usize>>,
}

impl Dedup {
    fn new() -> Dedup {
        Dedup {
            dens: Vec::new(),
            seen: HashMap::new(),
        }
    }

    fn insert(&mut self, den: Vec<u64>) -> Option<usize> {
        let h = hash_words(&den);
        let bucket = self.seen.entry(h).or_default();
        if bucket.iter().any(|&i| self.dens[i] == den) {
            return None;
        }
        bucket.push(self.dens.len());
        self.dens.push(den);
        Some(self.dens.len() - 1)
    }
}

struct Kept {
    concept: Concept,
    depth: usize,
}

#[derive(Clone, Copy)]
enum Op {
    Not(usize),
    And(usize, usize),
    Exists(usize, usize),
    Forall(usize, usize),
}

const BATCH: usize = 4096;

/// Generates every concept within the bounds, removes redundant ones on the
/// sample, and returns the surviving features in static order.
pub fn generate_pool(
    domain: &DomainSpec,
    tasks: &[Task],
    sample: &[Transition],
    bounds: PoolBounds,
) -> Result<FeaturePool, PoolError> {
    if sample.is_empty() {
        return Err(PoolError::EmptySample);
    }
    if bounds.complexity == 0 || bounds.depth == 0 {
        return Err(PoolError::BadBounds);
    }
    if let Some(t) = sample.iter().find(|t| t.instance >= tasks.len()) {
        return Err(PoolError::UnknownInstance(t.instance));
    }
    let (states, pairs) = distinct_states(sample);
    let lay = Layout::new(tasks, states);

    // atomic concepts and base roles, filled in one pass over the atoms
    let mut atomic: Vec<(Concept, Vec<u64>)> = vec![
        (Concept::Top, lay.mask.clone()),
        (Concept::Bottom, vec![0; lay.total]),
    ];
    let mut prim_slot: HashMap<(u32, bool), Vec<(usize, usize)>> = HashMap::new();
    let mut base_roles: Vec<(Role, Vec<u64>)> = Vec::new();
    let mut role_slot: HashMap<(u32, bool), usize> = HashMap::new();
    for (p, sig) in domain.predicates.iter().enumerate() {
        for goal in [false, true] {
            for pos in 0..sig.arity() {
                let c = if goal {
                    Concept::GoalPrim(sig.name.clone(), pos)
                } else {
                    Concept::Prim(sig.name.clone(), pos)
                };
                prim_slot.entry((p as u32, goal)).or_default().push((atomic.len(), pos));
                atomic.push((c, vec![0; lay.total]));
            }
            if sig.arity() == 2 {
                let r = if goal {
                    Role::GoalPrim(sig.name.clone())
                } else {
                    Role::Prim(sig.name.clone())
                };
                role_slot.insert((p as u32, goal), base_roles.len());
                base_roles.push((r, vec![0; lay.rtotal]));
            }
        }
    }
    for (i, (inst, s)) in lay.states.iter().enumerate() {
        let task = &tasks[*inst];
        for &id in s.atoms() {
            let a = task.atom(id);
            if let Some(slots) = prim_slot.get(&(a.pred, a.goal)) {
                for &(k, pos) in slots {
                    let o = a.args[pos] as usize;
                    atomic[k].1[lay.off[i] + o / 64] |= 1 << (o % 64);
                }
            }
            if let Some(&r) = role_slot.get(&(a.pred, a.goal)) {
                let (x, y) = (a.args[0] as usize, a.args[1] as usize);
                base_roles[r].1[lay.roff[i] + x * lay.w[i] + y / 64] |= 1 << (y % 64);
            }
        }
    }
    let mut fixed = |make: &dyn Fn(&Task) -> Vec<u32>, c: Concept| {
        let mut den = vec![0u64; lay.total];
        let mut cache: HashMap<usize, Vec<u32>> = HashMap::new();
        for (i, (inst, _)) in lay.states.iter().enumerate() {
            let objs = cache.entry(*inst).or_insert_with(|| make(&lay.tasks[*inst]));
            for &o in objs.iter() {
                den[lay.off[i] + o as usize / 64] |= 1 << (o % 64);
            }
        }
        atomic.push((c, den));
    };
    for t in &domain.types {
        let name = t.name.clone();
        fixed(&|task: &Task| task.objects_of_type(&name), Concept::Type(t.name.clone()));
    }
    for c in &domain.constants {
        let name = c.name.clone();
        fixed(
            &|task: &Task| task.object_id(&name).into_iter().collect(),
            Concept::Nominal(c.name.clone()),
        );
    }

    // roles: base, inverse, closure, closure of inverse
    let mut role_cands: Vec<(Role, Vec<u64>)> = Vec::new();
    for (r, den) in &base_roles {
        let inv = lay.inverse(den);
        role_cands.push((r.clone().tc(), lay.closure(den)));
        role_cands.push((r.clone().inv().tc(), lay.closure(&inv)));
        role_cands.push((r.clone().inv(), inv));
        role_cands.push((r.clone(), den.clone()));
    }
    role_cands.retain(|(r, _)| r.complexity() + 2 <= bounds.complexity && r.depth() < bounds.depth);
    role_cands.sort_by_key(|(r, _)| (r.complexity(), r.to_string()));
    let mut role_dedup = Dedup::new();
    let mut roles: Vec<Role> = Vec::new();
    for (r, den) in role_cands {
        if role_dedup.insert(den).is_some() {
            roles.push(r);
        }
    }
    let role_dens = role_dedup.dens;

    // concepts, layer by layer
    let mut dedup = Dedup::new();
    let mut kept: Vec<Kept> = Vec::new();
    let mut by_complexity: Vec<Vec<usize>> = vec![Vec::new(); bounds.complexity + 1];
    atomic.sort_by_cached_key(|a| a.0.to_string());
    for (c, den) in atomic {
        if let Some(i) = dedup.insert(den) {
            kept.push(Kept { concept: c, depth: 1 });
            by_complexity[1].push(i);
        }
    }
    for level in 2..=bounds.complexity {
        let mut cands: Vec<(String, Concept, usize, Op)> = Vec::new();
        let mut push = |c: Concept, depth: usize, op: Op| {
            if depth <= bounds.depth {
                cands.push((c.to_string(), c, depth, op));
            }
        };
        for &i in &by_complexity[level - 1] {
            push(Concept::not(kept[i].concept.clone()), kept[i].depth + 1, Op::Not(i));
        }
        for c1 in 1..level - 1 {
            let c2 = level - 1 - c1;
            if c1 > c2 {
                break;
            }
            for &i in &by_complexity[c1] {
                for &j in &by_complexity[c2] {
                    if c1 == c2 && j <= i {
                        continue;
                    }
                    let (a, b) = (&kept[i], &kept[j]);
                    push(
                        Concept::and(a.concept.clone(), b.concept.clone()),
                        1 + a.depth.max(b.depth),
                        Op::And(i, j),
                    );
                }
            }
        }
        for (r, role) in roles.iter().enumerate() {
            let rc = role.complexity();
            if rc + 2 > level {
                continue;
            }
            for &i in &by_complexity[level - 1 - rc] {
                let k = &kept[i];
                let depth = 1 + role.depth().max(k.depth);
                push(Concept::exists(role.clone(), k.concept.clone()), depth, Op::Exists(r, i));
                push(Concept::forall(role.clone(), k.concept.clone()), depth, Op::Forall(r, i));
            }
        }
        cands.sort_by(|a, b| a.0.cmp(&b.0));
        cands.dedup_by(|a, b| a.0 == b.0);
        for batch in cands.chunks(BATCH) {
            let dens: Vec<Vec<u64>> = batch
                .par_iter()
                .map(|(_, _, _, op)| {
                    let d = &dedup.dens;
                    match *op {
                        Op::Not(i) => lay.not(&d[i]),
                        Op::And(i, j) => lay.and(&d[i], &d[j]),
                        Op::Exists(r, i) => lay.quantify(&role_dens[r], &d[i], false),
                        Op::Forall(r, i) => lay.quantify(&role_dens[r], &d[i], true),
                    }
                })
                .collect();
            for ((_, c, depth, _), den) in batch.iter().zip(dens) {
                if let Some(i) = dedup.insert(den) {
                    kept.push(Kept {
                        concept: c.clone(),
                        depth: *depth,
                    });
                    by_complexity[level].push(i);
                }
            }
        }
    }

    // features, pruned for T-equivalence as well
    let mut s_keys: HashSet<Vec<u32>> = HashSet::new();
    let mut t_keys: HashSet<Vec<u8>> = HashSet::new();
    let mut features = Vec::new();
    for (i, k) in kept.iter().enumerate() {
        let values = lay.values(&dedup.dens[i]);
        let mut t_key: Vec<u8> = values.iter().map(|&v| u8::from(v > 0)).collect();
        t_key.extend(pairs.iter().map(|&(a, b)| match values[a].cmp(&values[b]) {
            std::cmp::Ordering::Less => 2,
            std::cmp::Ordering::Equal => 3,
            std::cmp::Ordering::Greater => 4,
        }));
        if s_keys.contains(&values) || t_keys.contains(&t_key) {
            continue;
        }
        let kind = if values.iter().all(|&v| v <= 1) {
            FeatureKind::Boolean
        } else {
            FeatureKind::Numerical
        };
        s_keys.insert(values);
        t_keys.insert(t_key);
        features.push(Feature::new(features.len(), kind, k.concept.clone()));
    }
    Ok(FeaturePool {
        features,
        bounds,
        sample_states: lay.states.len(),
        sample_transitions: sample.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench;
    use crate::planner::StateSpace;

    fn blocks_sample() -> (Vec<Task>, Vec<Transition>) {
        let tasks = vec![bench::blocks_clear_task(&[vec!["a", "b", "c"]], "a")];
        let space = StateSpace::expand(&tasks[0], &tasks[0].init, 10_000);
        let sample = space.transitions(0);
        (tasks, sample)
    }

    #[test]
    fn blocks_pool_contains_paper_concepts() {
        let (tasks, sample) = blocks_sample();
        let pool = generate_pool(&tasks[0].domain, &tasks, &sample, PoolBounds { complexity: 4, depth: 4 }).unwrap();
        let texts: Vec<String> = pool.features.iter().map(|f| f.concept.to_string()).collect();
        let sig = |c: &Concept| signature(&Feature::new(0, FeatureKind::Numerical, c.clone()), &tasks, &sample).unwrap();
        let pool_sigs: Vec<Signature> = pool.features.iter().map(|f| sig(&f.concept)).collect();
        let above = Concept::exists(Role::Prim("on".into()).tc(), Concept::goal("clear", 0));
        let target = Concept::goal("clear", 0);
        assert!(pool_sigs.contains(&sig(&above)), "{texts:?}");
        assert!(pool_sigs.contains(&sig(&target)), "{texts:?}");
        assert_ne!(sig(&above), sig(&target));
    }

    #[test]
    fn pruned_pool_has_distinct_signatures() {
        let (tasks, sample) = blocks_sample();
        let pool = generate_pool(&tasks[0].domain, &tasks, &sample, PoolBounds { complexity: 5, depth: 4 }).unwrap();
        let mut seen = HashSet::new();
        for f in &pool.features {
            let s = signature(f, &tasks, &sample).unwrap();
            assert!(seen.insert(s), "duplicate signature for {}", f.concept);
        }
        let keys: Vec<(usize, String)> = pool.features.iter().map(|f| f.concept.order_key()).collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn earliest_equivalent_concept_wins() {
        let (tasks, sample) = blocks_sample();
        let pool = generate_pool(&tasks[0].domain, &tasks, &sample, PoolBounds { complexity: 2, depth: 2 }).unwrap();
        let texts: Vec<String> = pool.features.iter().map(|f| f.concept.to_string()).collect();
        // no goal holding atoms: same denotation as bottom, earlier in text order
        assert!(texts.contains(&"(gprim holding 0)".to_string()), "{texts:?}");
        assert!(!texts.contains(&"bottom".to_string()));
        // constant and always true, like the goal clear concept
        assert!(!texts.contains(&"top".to_string()));
    }

    #[test]
    fn single_state_sample_collapses() {
        let tasks = vec![bench::gripper_task(2)];
        let s = tasks[0].init.clone();
        let sample = vec![Transition {
            instance: 0,
            source: s.clone(),
            target: s,
        }];
        let pool = generate_pool(&tasks[0].domain, &tasks, &sample, PoolBounds { complexity: 3, depth: 3 }).unwrap();
        // one survivor per Boolean valuation of the single state
        assert_eq!(pool.len(), 2);
        let f = &pool.features;
        let b0 = signature(&f[0], &tasks, &sample).unwrap().bools;
        let b1 = signature(&f[1], &tasks, &sample).unwrap().bools;
        assert_ne!(b0, b1);
    }

    #[test]
    fn empty_sample_rejected() {
        let tasks = vec![bench::gripper_task(1)];
        assert_eq!(
            generate_pool(&tasks[0].domain, &tasks, &[], PoolBounds { complexity: 2, depth: 2 }),
            Err(PoolError::EmptySample)
        );
    }

    #[test]
    fn json_round_trip() {
        let (tasks, sample) = blocks_sample();
        let pool = generate_pool(&tasks[0].domain, &tasks, &sample, PoolBounds { complexity: 3, depth: 3 }).unwrap();
        let back = FeaturePool::from_json(&pool.to_json()).unwrap();
        assert_eq!(back.features, pool.features);
    }
}
