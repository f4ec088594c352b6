//! One GenEx call on a hand-built sample: the transitions of one optimal
//! plan per Gripper instance are good, nothing is marked bad.

use policy_learner::bench;
use policy_learner::features::{generate_pool, PoolBounds};
use policy_learner::genex::{build_hsp, project_rules, run_genex, GenexResult, SampleMatrix};
use policy_learner::planner::{solve, Budget};
use policy_learner::policy::Policy;
use policy_learner::wrapper::pool_sample;

fn main() {
    let tasks: Vec<_> = (1..=3).map(bench::gripper_task).collect();
    let sample = pool_sample(&tasks, 3000);
    let pool = generate_pool(&tasks[0].domain, &tasks, &sample, PoolBounds { complexity: 6, depth: 5 })
        .expect("pool");

    let mut plus = Vec::new();
    for (i, task) in tasks.iter().enumerate() {
        let plan = solve(task, i, &task.init, Budget::unlimited()).expect("solvable");
        plus.extend(plan.transitions());
    }
    let m = SampleMatrix::from_transitions(&pool, &tasks, &plus, &[]).expect("matrix");
    let hsp = build_hsp(&m).expect("hitting set problem");
    println!("{} features, {} good transitions, {} subsets", pool.len(), plus.len(), hsp.len());

    let run = run_genex(&hsp, &m);
    for step in &run.trace {
        println!(
            "chose f{} via chain {:?}: {} subsets hit, {} left",
            step.chosen, step.chain, step.newly_hit, step.unhit_after
        );
    }
    match run.result {
        GenexResult::Solution(sol) => {
            let features = sol.features.iter().map(|&f| pool.features[f].clone()).collect();
            let policy = Policy::new(features, project_rules(&m, &sol.features));
            println!("{}", policy.pretty());
        }
        GenexResult::Failure(f) => println!("no policy: {:?} at subset {}", f.reason, f.witness),
    }
}
