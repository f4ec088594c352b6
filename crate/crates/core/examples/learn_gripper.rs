use policy_learner::bench;
use policy_learner::features::{generate_pool, PoolBounds};
use policy_learner::wrapper::{pool_sample, run_wrapper, RunReport, WrapperConfig};

fn main() {
    let tasks: Vec<_> = (1..=4).map(bench::gripper_task).collect();
    let cfg = WrapperConfig::default();
    let sample = pool_sample(&tasks, cfg.pool_sample);
    let bounds = PoolBounds { complexity: cfg.complexity, depth: cfg.depth };
    let pool = generate_pool(&tasks[0].domain, &tasks, &sample, bounds).expect("pool");
    println!("pool: {} features", pool.len());
    let run = run_wrapper(tasks, &pool, &cfg);
    match &run.result {
        Ok(policy) => println!("{}", policy.pretty()),
        Err(f) => println!("failed: {:?} {:?}", f.reason, f.witness),
    }
    print!("{}", RunReport::table(&[run.report]));
}
