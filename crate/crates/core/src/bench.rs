//! Bundled benchmark domains and instance generators.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{DomainSpec, InstanceSpec, Task};
use crate::pddl;

pub const GRIPPER_DOMAIN: &str = include_str!("../data/gripper.pddl");
pub const BLOCKS_DOMAIN: &str = include_str!("../data/blocks.pddl");
pub const SPANNER_DOMAIN: &str = include_str!("../data/spanner.pddl");
pub const DELIVERY_DOMAIN: &str = include_str!("../data/delivery.pddl");

/// Parses a bundled domain text.
pub fn domain(text: &str) -> Arc<DomainSpec> {
    Arc::new(pddl::parse_domain(text).expect("bundled domain parses"))
}

/// Parses and grounds a generated problem against a bundled domain.
pub fn task(domain_text: &str, problem: &str) -> Task {
    let d = domain(domain_text);
    let p = instance(&d, problem);
    Task::new(d, &p).expect("generated problem is well typed")
}

pub fn instance(domain: &DomainSpec, problem: &str) -> InstanceSpec {
    pddl::parse_problem(problem, domain).expect("generated problem parses")
}

/// All balls start in `rooma` with the robot; the goal moves them to `roomb`.
pub fn gripper_problem(balls: usize) -> String {
    let names: Vec<String> = (1..=balls).map(|i| format!("b{i}")).collect();
    let mut s = format!("(define (problem gripper-{balls})\n  (:domain gripper)\n  (:objects");
    for b in &names {
        let _ = write!(s, " {b}");
    }
    s.push_str(" - ball left right - gripper)\n  (:init (at-robby rooma) (free left) (free right)");
    for b in &names {
        let _ = write!(s, " (at {b} rooma)");
    }
    s.push_str(")\n  (:goal (and");
    for b in &names {
        let _ = write!(s, " (at {b} roomb)");
    }
    s.push_str(")))\n");
    s
}

pub fn gripper_task(balls: usize) -> Task {
    task(GRIPPER_DOMAIN, &gripper_problem(balls))
}

/// Towers are listed bottom block first. The goal is `(clear target)`.
pub fn blocks_clear_problem(towers: &[Vec<&str>], target: &str) -> String {
    let blocks: Vec<&str> = towers.iter().flatten().copied().collect();
    let mut s = format!(
        "(define (problem blocks-clear-{}-{target})\n  (:domain blocks)\n  (:objects {})\n  (:init (handempty)",
        blocks.len(),
        blocks.join(" ")
    );
    for t in towers {
        if let Some(first) = t.first() {
            let _ = write!(s, " (ontable {first})");
        }
        for w in t.windows(2) {
            let _ = write!(s, " (on {} {})", w[1], w[0]);
        }
        if let Some(last) = t.last() {
            let _ = write!(s, " (clear {last})");
        }
    }
    let _ = write!(s, ")\n  (:goal (and (clear {target}))))\n");
    s
}

pub fn blocks_clear_task(towers: &[Vec<&str>], target: &str) -> Task {
    task(BLOCKS_DOMAIN, &blocks_clear_problem(towers, target))
}

/// Random towers over `n` blocks with a target that has at least one block
/// above it whenever some tower is taller than one block.
pub fn random_blocks_clear(n: usize, rng: &mut impl Rng) -> String {
    let mut names: Vec<String> = (1..=n).map(|i| format!("b{i}")).collect();
    names.shuffle(rng);
    let mut towers: Vec<Vec<&str>> = Vec::new();
    for b in &names {
        if towers.is_empty() || rng.gen_bool(0.3) {
            towers.push(vec![b]);
        } else {
            let i = rng.gen_range(0..towers.len());
            towers[i].push(b);
        }
    }
    let covered: Vec<&str> = towers
        .iter()
        .flat_map(|t| t[..t.len() - 1].iter().copied())
        .collect();
    let target = if covered.is_empty() {
        names[0].as_str()
    } else {
        covered[rng.gen_range(0..covered.len())]
    };
    blocks_clear_problem(&towers, target)
}

/// A corridor `l0 -> l1 -> ... -> l{len}` with the man at `l0`, one spanner at
/// `l{spanner_at}` and one loose nut at the gate `l{len}`.
pub fn spanner_problem(len: usize, spanner_at: usize) -> String {
    spanner_problem_multi(len, &[spanner_at])
}

/// Like [`spanner_problem`] with one spanner per listed position.
pub fn spanner_problem_multi(len: usize, spanners: &[usize]) -> String {
    let mut s = format!(
        "(define (problem spanner-{len}-{})\n  (:domain spanner)\n  (:objects",
        spanners.iter().map(|p| p.to_string()).collect::<Vec<_>>().join("-")
    );
    for i in 0..=len {
        let _ = write!(s, " l{i}");
    }
    s.push_str(" - location");
    for i in 0..spanners.len() {
        let _ = write!(s, " s{}", i + 1);
    }
    if !spanners.is_empty() {
        s.push_str(" - spanner");
    }
    let _ = write!(s, " n1 - nut)\n  (:init (man-at l0) (nut-at n1 l{len}) (loose n1)");
    for i in 0..len {
        let _ = write!(s, " (link l{i} l{})", i + 1);
    }
    for (i, p) in spanners.iter().enumerate() {
        let _ = write!(s, " (at s{} l{p}) (useable s{})", i + 1, i + 1);
    }
    s.push_str(")\n  (:goal (and (tightened n1))))\n");
    s
}

pub fn spanner_task(len: usize, spanner_at: usize) -> Task {
    task(SPANNER_DOMAIN, &spanner_problem(len, spanner_at))
}

/// A `width` x `height` grid with 4-neighbour moves and one package.
/// Cells are `(x, y)` pairs.
pub fn delivery_problem(
    width: usize,
    height: usize,
    agent: (usize, usize),
    package: (usize, usize),
    target: (usize, usize),
) -> String {
    let cell = |(x, y): (usize, usize)| format!("c{x}-{y}");
    let mut s = format!("(define (problem delivery-{width}x{height})\n  (:domain delivery)\n  (:objects");
    for y in 0..height {
        for x in 0..width {
            let _ = write!(s, " {}", cell((x, y)));
        }
    }
    let _ = write!(s, " - cell p1 - package)\n  (:init (empty) (at-agent {}) (at p1 {})", cell(agent), cell(package));
    for y in 0..height {
        for x in 0..width {
            if x + 1 < width {
                let _ = write!(s, " (adjacent {} {})", cell((x, y)), cell((x + 1, y)));
                let _ = write!(s, " (adjacent {} {})", cell((x + 1, y)), cell((x, y)));
            }
            if y + 1 < height {
                let _ = write!(s, " (adjacent {} {})", cell((x, y)), cell((x, y + 1)));
                let _ = write!(s, " (adjacent {} {})", cell((x, y + 1)), cell((x, y)));
            }
        }
    }
    let _ = write!(s, ")\n  (:goal (and (at p1 {}))))\n", cell(target));
    s
}

pub fn delivery_task(
    width: usize,
    height: usize,
    agent: (usize, usize),
    package: (usize, usize),
    target: (usize, usize),
) -> Task {
    task(DELIVERY_DOMAIN, &delivery_problem(width, height, agent, package, target))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_three_ground_action_counts() {
        let task = blocks_clear_task(&[vec!["a", "b", "c"]], "a");
        let mut counts = std::collections::BTreeMap::new();
        for a in &task.actions {
            *counts.entry(task.domain.schemas[a.schema].name.as_str()).or_insert(0) += 1;
        }
        assert_eq!(counts["pickup"], 3);
        assert_eq!(counts["putdown"], 3);
        assert_eq!(counts["stack"], 6);
        assert_eq!(counts["unstack"], 6);
    }

    #[test]
    fn tower_has_single_successor() {
        let task = blocks_clear_task(&[vec!["a", "b", "c"]], "a");
        let succ = task.successors(&task.init);
        assert_eq!(succ.len(), 1);
        assert_eq!(task.action_name(succ[0].0), "(unstack c b)");
    }

    #[test]
    fn gripper_initial_successors() {
        let task = gripper_task(1);
        let names: Vec<String> = task.successors(&task.init).iter().map(|(a, _)| task.action_name(*a)).collect();
        for want in ["(pick b1 rooma left)", "(pick b1 rooma right)", "(move rooma roomb)"] {
            assert!(names.iter().any(|n| n == want), "{names:?}");
        }
    }

    #[test]
    fn generators_parse() {
        let mut rng = rand::rngs::mock::StepRng::new(7, 13);
        for n in 1..6 {
            let _ = task(BLOCKS_DOMAIN, &random_blocks_clear(n, &mut rng));
        }
        let _ = delivery_task(3, 2, (0, 0), (2, 1), (0, 1));
        let _ = task(SPANNER_DOMAIN, &spanner_problem_multi(4, &[1, 3]));
    }
}
