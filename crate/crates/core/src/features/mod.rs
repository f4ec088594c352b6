//! Description-logic features: grammar, evaluation and pool generation.

mod concept;
mod eval;
mod pool;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use concept::{Concept, ConceptError, Role};
pub use eval::{eval_concept, Bound, Compiled};
pub use pool::{generate_pool, signature, FeaturePool, PoolBounds, PoolError, Signature};

use crate::model::{DomainSpec, State, Task};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Boolean,
    Numerical,
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureKind::Boolean => "boolean",
            FeatureKind::Numerical => "numerical",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Feature {
    pub id: usize,
    pub kind: FeatureKind,
    pub concept: Concept,
    pub complexity: usize,
}

impl Feature {
    pub fn new(id: usize, kind: FeatureKind, concept: Concept) -> Feature {
        Feature {
            id,
            kind,
            complexity: concept.complexity(),
            concept,
        }
    }

    /// Boolean features report presence only.
    pub fn clamp(&self, v: u32) -> u32 {
        clamp(self.kind, v)
    }
}

pub fn clamp(kind: FeatureKind, v: u32) -> u32 {
    match kind {
        FeatureKind::Boolean => v.min(1),
        FeatureKind::Numerical => v,
    }
}

/// Boolean valuation: 1 iff the value is positive.
pub fn bool_value(v: u32) -> bool {
    v > 0
}

/// Evaluates a fixed list of features on states of any task of one domain.
#[derive(Clone, Debug)]
pub struct FeatureEvaluator {
    compiled: Compiled,
    kinds: Vec<FeatureKind>,
}

impl FeatureEvaluator {
    pub fn new(domain: &DomainSpec, features: &[Feature]) -> Result<FeatureEvaluator, ConceptError> {
        let concepts: Vec<Concept> = features.iter().map(|f| f.concept.clone()).collect();
        Ok(FeatureEvaluator {
            compiled: Compiled::new(domain, &concepts)?,
            kinds: features.iter().map(|f| f.kind).collect(),
        })
    }

    pub fn bind<'a>(&'a self, task: &'a Task) -> Result<BoundFeatures<'a>, ConceptError> {
        Ok(BoundFeatures {
            bound: self.compiled.bind(task)?,
            kinds: &self.kinds,
        })
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }
}

pub struct BoundFeatures<'a> {
    bound: Bound<'a>,
    kinds: &'a [FeatureKind],
}

impl BoundFeatures<'_> {
    /// Feature values at `s`, Boolean ones clamped to {0, 1}.
    pub fn values(&self, s: &State) -> Vec<u32> {
        self.bound
            .values(s)
            .into_iter()
            .zip(self.kinds)
            .map(|(v, &k)| clamp(k, v))
            .collect()
    }
}

pub fn eval_feature(f: &Feature, task: &Task, s: &State) -> Result<u32, ConceptError> {
    let ev = FeatureEvaluator::new(&task.domain, std::slice::from_ref(f))?;
    let b = ev.bind(task)?;
    Ok(b.values(s)[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench;

    #[test]
    fn blocks_above_target_counts() {
        // a at the bottom with two blocks above
        let t = bench::blocks_clear_task(&[vec!["a", "b", "c"]], "a");
        let n = Feature::new(
            0,
            FeatureKind::Numerical,
            Concept::exists(Role::Prim("on".into()).tc(), Concept::goal("clear", 0)),
        );
        assert_eq!(eval_feature(&n, &t, &t.init).unwrap(), 2);
        assert!(bool_value(2));
        assert!(!bool_value(0));
    }

    #[test]
    fn holding_is_boolean_one() {
        let t = bench::blocks_clear_task(&[vec!["a", "b", "c"]], "a");
        let (_, s) = t.successors(&t.init).remove(0);
        let h = Feature::new(1, FeatureKind::Boolean, Concept::prim("holding", 0));
        assert_eq!(eval_feature(&h, &t, &s).unwrap(), 1);
        assert_eq!(eval_feature(&h, &t, &t.init).unwrap(), 0);
    }

    #[test]
    fn boolean_kind_is_clamped() {
        let t = bench::gripper_task(3);
        let f = Feature::new(0, FeatureKind::Boolean, Concept::Type("ball".into()));
        assert_eq!(eval_feature(&f, &t, &t.init).unwrap(), 1);
    }
}
