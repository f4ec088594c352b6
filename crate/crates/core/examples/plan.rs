//! Parse a domain and problem, plan, and look at the reachable state space.

use policy_learner::bench;
use policy_learner::planner::{solve, Budget, Classifier, StateSpace};

fn main() {
    let task = bench::task(bench::SPANNER_DOMAIN, &bench::spanner_problem_multi(4, &[1, 3]));
    println!("{}: {} atoms, {} actions", task.name, task.num_atoms(), task.actions.len());

    let plan = solve(&task, 0, &task.init, Budget::unlimited()).expect("solvable");
    println!("optimal plan ({} steps):", plan.len());
    print!("{}", plan.to_text(&task));

    let space = StateSpace::expand(&task, &task.init, 100_000);
    let dead = space.goal_distance.iter().filter(|d| d.is_none()).count();
    println!("{} reachable states, {} dead ends", space.len(), dead);

    // classification of each state along the plan
    let cls = Classifier::new(Budget::unlimited());
    for s in &plan.states {
        print!("{:?} ", cls.classify(&task, s).expect("within budget"));
    }
    println!();
}
