//! Generate the description-logic feature pool for Blocks and print the
//! cheapest features.

use policy_learner::bench;
use policy_learner::features::{generate_pool, PoolBounds};
use policy_learner::wrapper::pool_sample;

fn main() {
    let tasks = vec![
        bench::blocks_clear_task(&[vec!["a", "b", "c"]], "a"),
        bench::blocks_clear_task(&[vec!["a", "b"], vec!["c", "d"]], "a"),
    ];
    let sample = pool_sample(&tasks, 2000);
    let pool = generate_pool(&tasks[0].domain, &tasks, &sample, PoolBounds { complexity: 5, depth: 4 })
        .expect("pool");
    println!("{} features from {} sampled transitions", pool.len(), sample.len());
    for f in pool.features.iter().take(20) {
        println!("{:>3} {:?} c={} {}", f.id, f.kind, f.complexity, f.concept);
    }
}
