//! Learn a Spanner policy from a configuration file and write the policy
//! and run report as JSON.

use policy_learner::bench;
use policy_learner::config::parse_config;
use policy_learner::features::{generate_pool, PoolBounds};
use policy_learner::wrapper::{pool_sample, run_wrapper};

const CONFIG: &str = "
# start with S2 and drop redundant conditions
strategy = s2
simplify = true
complexity = 6
depth = 5
time_limit = 60
";

fn main() {
    let cfg = parse_config(CONFIG).expect("config");
    let tasks: Vec<_> = [(2, 1), (3, 1), (3, 2), (4, 2)].iter().map(|&(l, a)| bench::spanner_task(l, a)).collect();
    let sample = pool_sample(&tasks, cfg.pool_sample);
    let bounds = PoolBounds { complexity: cfg.complexity, depth: cfg.depth };
    let pool = generate_pool(&tasks[0].domain, &tasks, &sample, bounds).expect("pool");
    let run = run_wrapper(tasks, &pool, &cfg);
    match &run.result {
        Ok(policy) => println!("{}", policy.to_json()),
        Err(f) => println!("failed: {:?}", f.reason),
    }
    println!("{}", run.report.to_json());
}
