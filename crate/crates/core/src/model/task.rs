use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::spec::{ActionSchema, AtomPattern, DomainSpec, GroundAtom, InstanceSpec, Term, TypeError};

/// Interned ground atom. `goal` marks the static goal-predicate copy `p_g`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: u32,
    pub args: Box<[u32]>,
    pub goal: bool,
}

/// Set of atom ids, kept sorted. Equality is set equality.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(Arc<[u32]>);

impl State {
    pub fn from_atoms(mut atoms: Vec<u32>) -> State {
        atoms.sort_unstable();
        atoms.dedup();
        State(atoms.into())
    }

    pub fn atoms(&self) -> &[u32] {
        &self.0
    }

    pub fn contains(&self, atom: u32) -> bool {
        self.0.binary_search(&atom).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "State{:?}", &self.0[..])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundAction {
    pub schema: usize,
    pub args: Vec<u32>,
    pub pre_pos: Vec<u32>,
    pub pre_neg: Vec<u32>,
    pub add: Vec<u32>,
    pub del: Vec<u32>,
}

impl GroundAction {
    pub fn applicable(&self, s: &State) -> bool {
        self.pre_pos.iter().all(|&a| s.contains(a)) && !self.pre_neg.iter().any(|&a| s.contains(a))
    }

    /// Delete then add.
    pub fn apply(&self, s: &State) -> State {
        let mut out: Vec<u32> = s
            .atoms()
            .iter()
            .copied()
            .filter(|a| self.del.binary_search(a).is_err())
            .collect();
        out.extend_from_slice(&self.add);
        State::from_atoms(out)
    }
}

/// A state pair of one instance, identified by the instance's index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub instance: usize,
    pub source: State,
    pub target: State,
}

/// A grounded instance.
#[derive(Clone, Debug)]
pub struct Task {
    pub domain: Arc<DomainSpec>,
    pub name: String,
    /// Constants and objects, sorted by name.
    pub objects: Vec<String>,
    pub object_types: Vec<String>,
    atoms: Vec<Atom>,
    atom_ids: HashMap<Atom, u32>,
    pub actions: Vec<GroundAction>,
    pub init: State,
    /// Ids of the (plain) goal atoms.
    pub goal: Vec<u32>,
    /// Ids of the goal-predicate atoms present in every state.
    pub goal_copies: Vec<u32>,
}

struct Interner<'a> {
    domain: &'a DomainSpec,
    object_ids: HashMap<&'a str, u32>,
    atoms: Vec<Atom>,
    atom_ids: HashMap<Atom, u32>,
}

impl Interner<'_> {
    fn intern(&mut self, atom: Atom) -> u32 {
        if let Some(&id) = self.atom_ids.get(&atom) {
            return id;
        }
        let id = self.atoms.len() as u32;
        self.atoms.push(atom.clone());
        self.atom_ids.insert(atom, id);
        id
    }

    fn pred(&self, name: &str) -> Result<u32, TypeError> {
        self.domain
            .predicates
            .iter()
            .position(|p| p.name == name)
            .map(|i| i as u32)
            .ok_or_else(|| TypeError::UnknownPredicate(name.to_string()))
    }

    fn ground_atom(&mut self, a: &GroundAtom, goal: bool) -> Result<u32, TypeError> {
        let pred = self.pred(&a.predicate)?;
        let args = a
            .args
            .iter()
            .map(|o| {
                self.object_ids
                    .get(o.as_str())
                    .copied()
                    .ok_or_else(|| TypeError::UnknownObject(o.clone()))
            })
            .collect::<Result<Box<[u32]>, _>>()?;
        Ok(self.intern(Atom { pred, args, goal }))
    }

    fn pattern(
        &mut self,
        p: &AtomPattern,
        schema: &ActionSchema,
        binding: &[u32],
    ) -> Result<u32, TypeError> {
        let pred = self.pred(&p.predicate)?;
        let args = p
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => schema
                    .params
                    .iter()
                    .position(|q| &q.name == v)
                    .map(|i| binding[i])
                    .ok_or_else(|| TypeError::UnknownVariable {
                        schema: schema.name.clone(),
                        var: v.clone(),
                    }),
                Term::Const(c) => self
                    .object_ids
                    .get(c.as_str())
                    .copied()
                    .ok_or_else(|| TypeError::UnknownObject(c.clone())),
            })
            .collect::<Result<Box<[u32]>, _>>()?;
        Ok(self.intern(Atom {
            pred,
            args,
            goal: false,
        }))
    }
}

fn sorted(mut v: Vec<u32>) -> Vec<u32> {
    v.sort_unstable();
    v.dedup();
    v
}

/// Enumerates injective, type-consistent bindings in lexicographic object order.
fn bindings(candidates: &[Vec<u32>], out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>) {
    if cur.len() == candidates.len() {
        out.push(cur.clone());
        return;
    }
    for &o in &candidates[cur.len()] {
        if cur.contains(&o) {
            continue;
        }
        cur.push(o);
        bindings(candidates, out, cur);
        cur.pop();
    }
}

impl Task {
    pub fn new(domain: Arc<DomainSpec>, instance: &InstanceSpec) -> Result<Task, TypeError> {
        instance.validate(&domain)?;
        let mut objs: Vec<(String, String)> = domain
            .constants
            .iter()
            .chain(instance.objects.iter())
            .map(|t| (t.name.clone(), t.ty.clone()))
            .collect();
        objs.sort();
        let (objects, object_types): (Vec<String>, Vec<String>) = objs.into_iter().unzip();

        let dom = domain.clone();
        let mut int = Interner {
            domain: &dom,
            object_ids: objects
                .iter()
                .enumerate()
                .map(|(i, o)| (o.as_str(), i as u32))
                .collect(),
            atoms: Vec::new(),
            atom_ids: HashMap::new(),
        };

        let mut init = Vec::new();
        for a in &instance.init {
            init.push(int.ground_atom(a, false)?);
        }
        let mut goal = Vec::new();
        let mut goal_copies = Vec::new();
        for a in &instance.goal {
            goal.push(int.ground_atom(a, false)?);
            goal_copies.push(int.ground_atom(a, true)?);
        }
        init.extend_from_slice(&goal_copies);

        let mut order: Vec<usize> = (0..dom.schemas.len()).collect();
        order.sort_by(|&a, &b| dom.schemas[a].name.cmp(&dom.schemas[b].name));
        let mut actions = Vec::new();
        for si in order {
            let schema = &dom.schemas[si];
            let candidates: Vec<Vec<u32>> = schema
                .params
                .iter()
                .map(|p| {
                    (0..objects.len() as u32)
                        .filter(|&o| dom.is_subtype(&object_types[o as usize], &p.ty))
                        .collect()
                })
                .collect();
            let mut all = Vec::new();
            bindings(&candidates, &mut all, &mut Vec::new());
            for b in all {
                let mut pre_pos = Vec::new();
                let mut pre_neg = Vec::new();
                for l in &schema.precondition {
                    let id = int.pattern(&l.atom, schema, &b)?;
                    if l.positive {
                        pre_pos.push(id);
                    } else {
                        pre_neg.push(id);
                    }
                }
                let add = sorted(
                    schema
                        .add
                        .iter()
                        .map(|p| int.pattern(p, schema, &b))
                        .collect::<Result<_, _>>()?,
                );
                let del: Vec<u32> = sorted(
                    schema
                        .del
                        .iter()
                        .map(|p| int.pattern(p, schema, &b))
                        .collect::<Result<_, _>>()?,
                )
                .into_iter()
                .filter(|a| add.binary_search(a).is_err())
                .collect();
                actions.push(GroundAction {
                    schema: si,
                    args: b,
                    pre_pos: sorted(pre_pos),
                    pre_neg: sorted(pre_neg),
                    add,
                    del,
                });
            }
        }

        let Interner {
            atoms, atom_ids, ..
        } = int;
        Ok(Task {
            name: instance.name.clone(),
            objects,
            object_types,
            atoms,
            atom_ids,
            actions,
            init: State::from_atoms(init),
            goal: sorted(goal),
            goal_copies: sorted(goal_copies),
            domain,
        })
    }

    pub fn atom(&self, id: u32) -> &Atom {
        &self.atoms[id as usize]
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn atom_id(&self, atom: &Atom) -> Option<u32> {
        self.atom_ids.get(atom).copied()
    }

    pub fn object_id(&self, name: &str) -> Option<u32> {
        self.objects.binary_search_by(|o| o.as_str().cmp(name)).ok().map(|i| i as u32)
    }

    pub fn pred_id(&self, name: &str) -> Option<u32> {
        self.domain
            .predicates
            .iter()
            .position(|p| p.name == name)
            .map(|i| i as u32)
    }

    /// Looks up a ground atom by names; `None` if it was never interned.
    pub fn lookup(&self, a: &GroundAtom, goal: bool) -> Option<u32> {
        let pred = self.pred_id(&a.predicate)?;
        let args = a
            .args
            .iter()
            .map(|o| self.object_id(o))
            .collect::<Option<Box<[u32]>>>()?;
        self.atom_id(&Atom { pred, args, goal })
    }

    pub fn atom_to_ground(&self, id: u32) -> GroundAtom {
        let a = self.atom(id);
        let name = &self.domain.predicates[a.pred as usize].name;
        GroundAtom {
            predicate: if a.goal { format!("{name}_g") } else { name.clone() },
            args: a.args.iter().map(|&o| self.objects[o as usize].clone()).collect(),
        }
    }

    pub fn action_name(&self, idx: usize) -> String {
        let a = &self.actions[idx];
        let mut s = format!("({}", self.domain.schemas[a.schema].name);
        for &o in &a.args {
            s.push(' ');
            s.push_str(&self.objects[o as usize]);
        }
        s.push(')');
        s
    }

    /// Index of the ground action written as `(name obj ...)`.
    pub fn find_action(&self, text: &str) -> Option<usize> {
        let norm: Vec<String> = text
            .trim()
            .trim_start_matches('(')
            .trim_end_matches(')')
            .split_whitespace()
            .map(str::to_lowercase)
            .collect();
        let (name, args) = norm.split_first()?;
        self.actions.iter().position(|a| {
            &self.domain.schemas[a.schema].name == name
                && a.args.len() == args.len()
                && a.args
                    .iter()
                    .zip(args)
                    .all(|(&o, n)| &self.objects[o as usize] == n)
        })
    }

    /// Applicable actions with their successor states, in action order.
    pub fn successors(&self, s: &State) -> Vec<(usize, State)> {
        self.actions
            .iter()
            .enumerate()
            .filter(|(_, a)| a.applicable(s))
            .map(|(i, a)| (i, a.apply(s)))
            .collect()
    }

    pub fn is_goal(&self, s: &State) -> bool {
        self.goal.iter().all(|&g| s.contains(g))
    }

    /// Objects of type `ty` or one of its subtypes.
    pub fn objects_of_type(&self, ty: &str) -> Vec<u32> {
        (0..self.objects.len() as u32)
            .filter(|&o| self.domain.is_subtype(&self.object_types[o as usize], ty))
            .collect()
    }

    /// Renders a state as sorted ground atoms (goal copies excluded).
    pub fn state_atoms(&self, s: &State) -> Vec<GroundAtom> {
        let mut v: Vec<GroundAtom> = s
            .atoms()
            .iter()
            .filter(|&&a| !self.atom(a).goal)
            .map(|&a| self.atom_to_ground(a))
            .collect();
        v.sort();
        v
    }

    /// Builds a state from plain ground atoms; goal copies are added.
    pub fn make_state(&self, atoms: &[GroundAtom]) -> Option<State> {
        let mut ids = Vec::with_capacity(atoms.len() + self.goal_copies.len());
        for a in atoms {
            ids.push(self.lookup(a, false)?);
        }
        ids.extend_from_slice(&self.goal_copies);
        Some(State::from_atoms(ids))
    }
}

/// Every type-consistent injective binding of every schema, ordered by schema
/// name and then by bound object names.
pub fn ground(domain: &DomainSpec, instance: &InstanceSpec) -> Result<Vec<GroundAction>, TypeError> {
    Ok(Task::new(Arc::new(domain.clone()), instance)?.actions)
}
