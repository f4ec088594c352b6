//! Use a one-rule sketch ("deliver another ball") and measure how much
//! search each step needs.

use policy_learner::bench;
use policy_learner::cli::effective_width;
use policy_learner::planner::Budget;
use policy_learner::policy::Policy;

const SKETCH: &str = r#"{
  "features": ["(exists (role at) (one roomb))"],
  "names": ["g"],
  "rules": [{"cond": [], "eff": ["g↑"]}]
}"#;

fn main() {
    let sketch = Policy::from_json(SKETCH).expect("sketch");
    for n in [2, 4, 6] {
        let task = bench::gripper_task(n);
        let row = effective_width(&sketch, &task, 2, Budget::unlimited()).expect("features evaluate");
        println!("{}: solved {} max width {} avg {:.2}", row.name, row.solved, row.max, row.avg);
    }
}
