//! Object symmetries of a grounded task.
//!
//! Two objects are interchangeable when they have the same declared type, are
//! not domain constants, and swapping them maps the static atoms and the goal
//! onto themselves. Interchangeability is closed under composition, so objects
//! fall into classes. States that differ by a permutation inside classes have
//! the same feature values, the same successors up to renaming and the same
//! goal status, which lets exhaustive explorations work on representatives.

use std::collections::{BTreeSet, HashSet};

use super::task::{Atom, State, Task};

#[derive(Clone, Debug, Default)]
pub struct Symmetry {
    classes: Vec<Vec<u32>>,
    class_of: Vec<Option<usize>>,
}

const SELF: u32 = u32::MAX;
const PEER: u32 = u32::MAX - 1;

fn swap(a: &Atom, x: u32, y: u32) -> Atom {
    Atom {
        pred: a.pred,
        goal: a.goal,
        args: a
            .args
            .iter()
            .map(|&o| if o == x { y } else if o == y { x } else { o })
            .collect(),
    }
}

impl Symmetry {
    pub fn compute(task: &Task) -> Symmetry {
        let fluent = task.domain.fluent_predicates();
        let constants: BTreeSet<&str> = task.domain.constants.iter().map(|c| c.name.as_str()).collect();
        let fixed: HashSet<Atom> = task
            .init
            .atoms()
            .iter()
            .map(|&a| task.atom(a))
            .filter(|a| a.goal || !fluent.contains(task.domain.predicates[a.pred as usize].name.as_str()))
            .chain(task.goal.iter().map(|&g| task.atom(g)))
            .cloned()
            .collect();
        let preserved = |x: u32, y: u32| fixed.iter().all(|a| fixed.contains(&swap(a, x, y)));

        let mut classes: Vec<Vec<u32>> = Vec::new();
        for o in 0..task.objects.len() as u32 {
            if constants.contains(task.objects[o as usize].as_str()) {
                continue;
            }
            let ty = &task.object_types[o as usize];
            let home = classes
                .iter()
                .position(|c| &task.object_types[c[0] as usize] == ty && preserved(c[0], o));
            match home {
                Some(i) => classes[i].push(o),
                None => classes.push(vec![o]),
            }
        }
        classes.retain(|c| c.len() > 1);
        let mut class_of = vec![None; task.objects.len()];
        for (i, c) in classes.iter().enumerate() {
            for &o in c {
                class_of[o as usize] = Some(i);
            }
        }
        Symmetry { classes, class_of }
    }

    /// No symmetry at all; `canonical` is the identity.
    pub fn none() -> Symmetry {
        Symmetry::default()
    }

    pub fn is_trivial(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn classes(&self) -> &[Vec<u32>] {
        &self.classes
    }

    /// A representative of the symmetry orbit of `s`. Equal keys imply
    /// isomorphic states; isomorphic states usually, but not always, share a key.
    pub fn canonical(&self, task: &Task, s: &State) -> State {
        if self.classes.is_empty() {
            return s.clone();
        }
        let n = task.objects.len();
        let mut profiles: Vec<Vec<(u32, bool, Vec<u32>)>> = vec![Vec::new(); n];
        for &id in s.atoms() {
            let a = task.atom(id);
            for (pos, &o) in a.args.iter().enumerate() {
                if let Some(c) = self.class_of[o as usize] {
                    let args = a
                        .args
                        .iter()
                        .enumerate()
                        .map(|(i, &x)| {
                            if i == pos || x == o {
                                SELF
                            } else if self.class_of[x as usize] == Some(c) {
                                PEER
                            } else {
                                x
                            }
                        })
                        .collect();
                    profiles[o as usize].push((a.pred, a.goal, args));
                }
            }
        }
        for p in &mut profiles {
            p.sort_unstable();
        }
        let mut perm: Vec<u32> = (0..n as u32).collect();
        for c in &self.classes {
            let mut members = c.clone();
            members.sort_by(|&x, &y| profiles[x as usize].cmp(&profiles[y as usize]).then(x.cmp(&y)));
            for (slot, &m) in c.iter().zip(&members) {
                perm[m as usize] = *slot;
            }
        }
        let mut out = Vec::with_capacity(s.len());
        for &id in s.atoms() {
            let a = task.atom(id);
            let mapped = Atom {
                pred: a.pred,
                goal: a.goal,
                args: a.args.iter().map(|&o| perm[o as usize]).collect(),
            };
            match task.atom_id(&mapped) {
                Some(m) => out.push(m),
                None => return s.clone(),
            }
        }
        State::from_atoms(out)
    }
}
