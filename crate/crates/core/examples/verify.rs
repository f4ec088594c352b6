//! Check a hand-written Blocks policy on random instances, with and without
//! symmetry reduction.

use rand::SeedableRng;

use policy_learner::bench;
use policy_learner::planner::{Budget, Classifier};
use policy_learner::policy::{analyze, AnalyzeOptions, Policy};

const POLICY: &str = r#"{
  "features": ["(exists (tc (role on)) (gprim clear 0))", "(prim holding 0)"],
  "names": ["n", "H"],
  "rules": [{"cond": ["¬H", "n>0"], "eff": ["H", "n↓"]},
            {"cond": ["H"], "eff": ["¬H"]}]
}"#;

fn main() {
    let policy = Policy::from_json(POLICY).expect("policy");
    println!("{}", policy.pretty());
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    for n in [4, 6, 8] {
        let task = bench::task(bench::BLOCKS_DOMAIN, &bench::random_blocks_clear(n, &mut rng));
        for symmetry in [false, true] {
            let cls = Classifier::new(Budget::unlimited());
            let opts = AnalyzeOptions { budget: Budget::unlimited(), symmetry };
            let v = analyze(&policy, &task, &cls, &opts).expect("features evaluate");
            println!("{n} blocks, symmetry {symmetry}: {} after {} states", v.outcome.name(), v.visited);
        }
    }
}
