//! Denotation evaluation over a hash-consed arena of concept and role nodes.

use std::collections::HashMap;

use super::concept::{Concept, ConceptError, Role};
use crate::model::{DomainSpec, State, Task};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum CNode {
    Top,
    Bottom,
    Prim { pred: u32, pos: usize, goal: bool },
    Type(String),
    Nominal(String),
    Not(usize),
    And(usize, usize),
    Exists(usize, usize),
    Forall(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum RNode {
    Prim { pred: u32, goal: bool },
    Inv(usize),
    Tc(usize),
}

/// A set of concepts compiled against one domain. Shared subterms are
/// evaluated once per state.
#[derive(Clone, Debug)]
pub struct Compiled {
    nodes: Vec<CNode>,
    roles: Vec<RNode>,
    roots: Vec<usize>,
    node_ids: HashMap<CNode, usize>,
    role_ids: HashMap<RNode, usize>,
    num_preds: usize,
}

impl Compiled {
    pub fn new(domain: &DomainSpec, concepts: &[Concept]) -> Result<Compiled, ConceptError> {
        let mut c = Compiled {
            nodes: Vec::new(),
            roles: Vec::new(),
            roots: Vec::new(),
            node_ids: HashMap::new(),
            role_ids: HashMap::new(),
            num_preds: domain.predicates.len(),
        };
        for concept in concepts {
            concept.check(domain)?;
            let id = c.concept(domain, concept);
            c.roots.push(id);
        }
        Ok(c)
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    fn pred(domain: &DomainSpec, p: &str) -> u32 {
        domain.predicates.iter().position(|q| q.name == p).unwrap_or(usize::MAX) as u32
    }

    fn intern(&mut self, n: CNode) -> usize {
        if let Some(&i) = self.node_ids.get(&n) {
            return i;
        }
        self.nodes.push(n.clone());
        self.node_ids.insert(n, self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    fn intern_role(&mut self, n: RNode) -> usize {
        if let Some(&i) = self.role_ids.get(&n) {
            return i;
        }
        self.roles.push(n.clone());
        self.role_ids.insert(n, self.roles.len() - 1);
        self.roles.len() - 1
    }

    fn role(&mut self, d: &DomainSpec, r: &Role) -> usize {
        let n = match r {
            Role::Prim(p) => RNode::Prim {
                pred: Self::pred(d, p),
                goal: false,
            },
            Role::GoalPrim(p) => RNode::Prim {
                pred: Self::pred(d, p),
                goal: true,
            },
            Role::Inverse(r) => RNode::Inv(self.role(d, r)),
            Role::TransitiveClosure(r) => RNode::Tc(self.role(d, r)),
        };
        self.intern_role(n)
    }

    fn concept(&mut self, d: &DomainSpec, c: &Concept) -> usize {
        let n = match c {
            Concept::Top => CNode::Top,
            Concept::Bottom => CNode::Bottom,
            Concept::Prim(p, i) => CNode::Prim {
                pred: Self::pred(d, p),
                pos: *i,
                goal: false,
            },
            Concept::GoalPrim(p, i) => CNode::Prim {
                pred: Self::pred(d, p),
                pos: *i,
                goal: true,
            },
            Concept::Type(t) => CNode::Type(t.clone()),
            Concept::Nominal(o) => CNode::Nominal(o.clone()),
            Concept::Not(x) => CNode::Not(self.concept(d, x)),
            Concept::And(a, b) => {
                let (a, b) = (self.concept(d, a), self.concept(d, b));
                CNode::And(a, b)
            }
            Concept::Exists(r, x) => {
                let r = self.role(d, r);
                CNode::Exists(r, self.concept(d, x))
            }
            Concept::Forall(r, x) => {
                let r = self.role(d, r);
                CNode::Forall(r, self.concept(d, x))
            }
        };
        self.intern(n)
    }

    /// Resolves types and nominals for one task.
    pub fn bind<'a>(&'a self, task: &'a Task) -> Result<Bound<'a>, ConceptError> {
        let n = task.objects.len();
        let w = n.div_ceil(64).max(1);
        let mut fixed = HashMap::new();
        for (i, node) in self.nodes.iter().enumerate() {
            let set = match node {
                CNode::Type(t) => task.objects_of_type(t),
                CNode::Nominal(o) => vec![task
                    .object_id(o)
                    .ok_or_else(|| ConceptError::UnknownSymbol(o.clone()))?],
                _ => continue,
            };
            let mut words = vec![0u64; w];
            for o in set {
                words[o as usize / 64] |= 1 << (o % 64);
            }
            fixed.insert(i, words);
        }
        let mut prim_slots = vec![Vec::new(); self.num_preds * 2];
        for (i, node) in self.nodes.iter().enumerate() {
            if let CNode::Prim { pred, pos, goal } = node {
                prim_slots[*pred as usize * 2 + usize::from(*goal)].push((i, *pos));
            }
        }
        let mut role_slots = vec![Vec::new(); self.num_preds * 2];
        for (i, r) in self.roles.iter().enumerate() {
            if let RNode::Prim { pred, goal } = r {
                role_slots[*pred as usize * 2 + usize::from(*goal)].push(i);
            }
        }
        Ok(Bound {
            c: self,
            task,
            n,
            w,
            fixed,
            prim_slots,
            role_slots,
        })
    }
}

/// A compiled concept set bound to a task.
pub struct Bound<'a> {
    c: &'a Compiled,
    task: &'a Task,
    n: usize,
    w: usize,
    fixed: HashMap<usize, Vec<u64>>,
    prim_slots: Vec<Vec<(usize, usize)>>,
    role_slots: Vec<Vec<usize>>,
}

#[inline]
fn set_bit(words: &mut [u64], i: usize) {
    words[i / 64] |= 1 << (i % 64);
}

#[inline]
fn get_bit(words: &[u64], i: usize) -> bool {
    words[i / 64] >> (i % 64) & 1 == 1
}

impl Bound<'_> {
    fn mask(&self) -> Vec<u64> {
        let mut m = vec![0u64; self.w];
        for i in 0..self.n {
            set_bit(&mut m, i);
        }
        m
    }

    /// Denotations of every arena node, `w` words each.
    fn denotations(&self, s: &State) -> Vec<u64> {
        let (n, w) = (self.n, self.w);
        let mut nodes = vec![0u64; self.c.nodes.len() * w];
        let mut roles = vec![0u64; self.c.roles.len() * n * w];
        for &id in s.atoms() {
            let atom = self.task.atom(id);
            let slot = atom.pred as usize * 2 + usize::from(atom.goal);
            for &(node, pos) in &self.prim_slots[slot] {
                if let Some(&o) = atom.args.get(pos) {
                    set_bit(&mut nodes[node * w..(node + 1) * w], o as usize);
                }
            }
            if atom.args.len() == 2 {
                for &r in &self.role_slots[slot] {
                    let (a, b) = (atom.args[0] as usize, atom.args[1] as usize);
                    set_bit(&mut roles[(r * n + a) * w..(r * n + a + 1) * w], b);
                }
            }
        }
        for (r, node) in self.c.roles.iter().enumerate() {
            let base = r * n * w;
            match *node {
                RNode::Prim { .. } => {}
                RNode::Inv(x) => {
                    let src = x * n * w;
                    for a in 0..n {
                        for b in 0..n {
                            if get_bit(&roles[src + a * w..src + (a + 1) * w], b) {
                                set_bit(&mut roles[base + b * w..base + (b + 1) * w], a);
                            }
                        }
                    }
                }
                RNode::Tc(x) => {
                    let src = x * n * w;
                    roles.copy_within(src..src + n * w, base);
                    for k in 0..n {
                        let row_k: Vec<u64> = roles[base + k * w..base + (k + 1) * w].to_vec();
                        for i in 0..n {
                            let row_i = &mut roles[base + i * w..base + (i + 1) * w];
                            if get_bit(row_i, k) {
                                for (a, b) in row_i.iter_mut().zip(&row_k) {
                                    *a |= b;
                                }
                            }
                        }
                    }
                }
            }
        }
        let mask = self.mask();
        for (i, node) in self.c.nodes.iter().enumerate() {
            let (lo, rest) = nodes.split_at_mut(i * w);
            let out = &mut rest[..w];
            match *node {
                CNode::Top => out.copy_from_slice(&mask),
                CNode::Bottom | CNode::Prim { .. } => {}
                CNode::Type(_) | CNode::Nominal(_) => out.copy_from_slice(&self.fixed[&i]),
                CNode::Not(x) => {
                    for k in 0..w {
                        out[k] = !lo[x * w + k] & mask[k];
                    }
                }
                CNode::And(a, b) => {
                    for k in 0..w {
                        out[k] = lo[a * w + k] & lo[b * w + k];
                    }
                }
                CNode::Exists(r, x) | CNode::Forall(r, x) => {
                    let forall = matches!(node, CNode::Forall(..));
                    let c = &lo[x * w..(x + 1) * w];
                    for a in 0..n {
                        let row = &roles[(r * n + a) * w..(r * n + a + 1) * w];
                        let hit = if forall {
                            row.iter().zip(c).all(|(r, c)| r & !c == 0)
                        } else {
                            row.iter().zip(c).any(|(r, c)| r & c != 0)
                        };
                        if hit {
                            set_bit(out, a);
                        }
                    }
                }
            }
        }
        nodes
    }

    /// Cardinality of each root concept.
    pub fn values(&self, s: &State) -> Vec<u32> {
        let d = self.denotations(s);
        let w = self.w;
        self.c
            .roots
            .iter()
            .map(|&r| d[r * w..(r + 1) * w].iter().map(|x| x.count_ones()).sum())
            .collect()
    }

    /// Object ids denoted by each root concept.
    pub fn sets(&self, s: &State) -> Vec<Vec<u32>> {
        let d = self.denotations(s);
        let w = self.w;
        self.c
            .roots
            .iter()
            .map(|&r| {
                (0..self.n)
                    .filter(|&o| get_bit(&d[r * w..(r + 1) * w], o))
                    .map(|o| o as u32)
                    .collect()
            })
            .collect()
    }
}

/// Denotation of one concept in a state, as sorted object names.
pub fn eval_concept(c: &Concept, task: &Task, s: &State) -> Result<Vec<String>, ConceptError> {
    let compiled = Compiled::new(&task.domain, std::slice::from_ref(c))?;
    let bound = compiled.bind(task)?;
    let mut names: Vec<String> = bound.sets(s)[0]
        .iter()
        .map(|&o| task.objects[o as usize].clone())
        .collect();
    names.sort();
    Ok(names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench;

    fn clear_example() -> Task {
        // c on table, b on c, a on b; goal clear(c)
        bench::blocks_clear_task(&[vec!["c", "b", "a"]], "c")
    }

    #[test]
    fn goal_primitive_is_target() {
        let t = clear_example();
        let c = Concept::goal("clear", 0);
        assert_eq!(eval_concept(&c, &t, &t.init).unwrap(), vec!["c"]);
    }

    #[test]
    fn blocks_on_something() {
        let t = clear_example();
        let c = Concept::exists(Role::Prim("on".into()), Concept::Top);
        assert_eq!(eval_concept(&c, &t, &t.init).unwrap(), vec!["a", "b"]);
    }

    #[test]
    fn blocks_above_target() {
        let t = clear_example();
        let c = Concept::exists(Role::Prim("on".into()).tc(), Concept::goal("clear", 0));
        assert_eq!(eval_concept(&c, &t, &t.init).unwrap(), vec!["a", "b"]);
    }

    #[test]
    fn bottom_is_empty_and_nominal_checked() {
        let t = clear_example();
        assert!(eval_concept(&Concept::Bottom, &t, &t.init).unwrap().is_empty());
        assert_eq!(
            eval_concept(&Concept::Nominal("zz".into()), &t, &t.init),
            Err(ConceptError::UnknownSymbol("zz".into()))
        );
    }

    #[test]
    fn holding_after_unstack() {
        let t = clear_example();
        let (_, s) = t.successors(&t.init).remove(0);
        let c = Concept::prim("holding", 0);
        assert_eq!(eval_concept(&c, &t, &s).unwrap(), vec!["a"]);
    }

    #[test]
    fn forall_and_inverse() {
        let t = bench::gripper_task(2);
        // rooms all of whose balls are in the goal room: vacuous for roomb
        let c = Concept::and(
            Concept::Type("room".into()),
            Concept::forall(Role::Prim("at".into()).inv(), Concept::Bottom),
        );
        assert_eq!(eval_concept(&c, &t, &t.init).unwrap(), vec!["roomb"]);
    }
}
