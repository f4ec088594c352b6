//! Command-line behaviour and exit codes.

use std::path::Path;

use policy_learner::bench;
use policy_learner::cli::{self, EXIT_BUDGET, EXIT_FAILURE, EXIT_OK, EXIT_USAGE};
use policy_learner::features::{Concept, Feature, FeatureKind, FeaturePool};
use policy_learner::policy::Policy;

fn run(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut argv = vec!["plearn"];
    argv.extend_from_slice(args);
    let code = cli::run(argv, &mut out);
    (code, String::from_utf8(out).unwrap())
}

struct Dir(tempfile::TempDir);

impl Dir {
    fn new() -> Dir {
        Dir(tempfile::tempdir().unwrap())
    }

    fn write(&self, name: &str, text: &str) -> String {
        let p = self.0.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.display().to_string()
    }

    fn path(&self, name: &str) -> String {
        self.0.path().join(name).display().to_string()
    }

    fn gripper(&self) -> String {
        for n in 2..=4 {
            self.write(&format!("p{n}.pddl"), &bench::gripper_problem(n));
        }
        self.write("domain.pddl", bench::GRIPPER_DOMAIN)
    }
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn plan_prints_one_action_per_line() {
    let d = Dir::new();
    let dom = d.write("domain.pddl", bench::GRIPPER_DOMAIN);
    let prob = d.write("p1.pddl", &bench::gripper_problem(1));
    let (code, out) = run(&["plan", &dom, &prob]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().count(), 3, "{out}");
    assert!(out.lines().all(|l| l.starts_with('(') && l.ends_with(')')));

    let done = bench::gripper_problem(1).replace("(at b1 rooma)", "(at b1 roomb)");
    let prob = d.write("done.pddl", &done);
    let (code, out) = run(&["plan", &dom, &prob]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.trim(), "");
}

#[test]
fn plan_exit_codes() {
    let d = Dir::new();
    let dom = d.write("domain.pddl", bench::SPANNER_DOMAIN);
    let (code, _) = run(&["plan", &dom, &d.path("missing.pddl")]);
    assert_eq!(code, EXIT_USAGE);

    let worn = bench::spanner_problem(3, 1).replace(" (useable s1)", "");
    let prob = d.write("worn.pddl", &worn);
    let (code, _) = run(&["plan", &dom, &prob]);
    assert_eq!(code, EXIT_FAILURE);

    let prob = d.write("ok.pddl", &bench::spanner_problem(3, 1));
    let (code, _) = run(&["plan", &dom, &prob, "--node-budget", "1"]);
    assert_eq!(code, EXIT_BUDGET);

    let (code, _) = run(&["frobnicate"]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn plan_writes_to_file() {
    let d = Dir::new();
    let dom = d.write("domain.pddl", bench::GRIPPER_DOMAIN);
    let prob = d.write("p2.pddl", &bench::gripper_problem(2));
    let out_path = d.path("plan.txt");
    let (code, out) = run(&["plan", &dom, &prob, "--out", &out_path]);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    assert_eq!(read(&out_path).lines().count(), 5);
}

#[test]
fn learn_is_deterministic() {
    let d = Dir::new();
    let dom = d.gripper();
    let probs = d.path("p*.pddl");
    let mut outputs = Vec::new();
    for i in 0..2 {
        let pol = d.path(&format!("policy{i}.json"));
        let rep = d.path(&format!("report{i}.json"));
        let (code, out) = run(&["learn", &dom, &probs, "--out", &pol, "--report", &rep]);
        assert_eq!(code, EXIT_OK, "{out}");
        let mut report: serde_json::Value = serde_json::from_str(&read(&rep)).unwrap();
        report.as_object_mut().unwrap().remove("timings");
        outputs.push((read(&pol), report));
    }
    assert_eq!(outputs[0], outputs[1]);
    let report = &outputs[0].1;
    assert_eq!(report["schema"], 1);
    assert_eq!(report["outcome"], "PolicyFound");
    assert_eq!(report["q"], 3);
    Policy::from_json(&outputs[0].0).unwrap();
}

#[test]
fn learn_from_saved_pool_and_config() {
    let d = Dir::new();
    let dom = d.gripper();
    let probs = d.path("p*.pddl");
    let pool = d.path("pool.json");
    let (code, _) = run(&["pool", &dom, &probs, "--complexity", "6", "--out", &pool]);
    assert_eq!(code, EXIT_OK);
    assert!(FeaturePool::from_json(&read(&pool)).unwrap().len() > 10);

    let cfg = d.write("learn.cfg", "# gripper\nstrategy = s2\nsimplify = yes\n");
    let pol = d.path("policy.json");
    let (code, out) = run(&["learn", &dom, &probs, "--pool", &pool, "--config", &cfg, "--out", &pol]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.lines().nth(1).unwrap().contains("S2"), "{out}");

    let (code, out) = run(&["verify", &dom, &pol, &probs]);
    assert_eq!(code, EXIT_OK);
    assert!(out.ends_with("coverage: 100.0%\n"), "{out}");
}

#[test]
fn learn_usage_and_failure_codes() {
    let d = Dir::new();
    let dom = d.gripper();
    let (code, _) = run(&["learn", &dom, &d.path("nothing-*.pddl")]);
    assert_eq!(code, EXIT_USAGE);

    let bad = d.write("bad.cfg", "strategy = sideways\n");
    let (code, _) = run(&["learn", &dom, &d.path("p*.pddl"), "--config", &bad]);
    assert_eq!(code, EXIT_USAGE);

    let blind = FeaturePool::from_features(vec![Feature::new(0, FeatureKind::Numerical, Concept::Top)]);
    let pool = d.write("blind.json", &blind.to_json());
    let (code, out) = run(&["learn", &dom, &d.path("p*.pddl"), "--pool", &pool]);
    assert_eq!(code, EXIT_FAILURE);
    assert!(out.contains("failure: Edge"), "{out}");
}

#[test]
fn verify_reports_failures() {
    let d = Dir::new();
    let dom = d.gripper();
    let empty = d.write("empty.json", r#"{"features": [], "rules": []}"#);
    let (code, out) = run(&["verify", &dom, &empty, &d.path("p2.pddl")]);
    assert_eq!(code, EXIT_FAILURE);
    assert!(out.starts_with("gripper-2\tNotClosed"), "{out}");
    assert!(out.ends_with("coverage: 0.0%\n"));

    let d = Dir::new();
    let dom = d.write("domain.pddl", bench::BLOCKS_DOMAIN);
    let prob = d.write(
        "b.pddl",
        &bench::blocks_clear_problem(&[vec!["a", "b", "c"]], "a"),
    );
    // putting down may stack the block back, so H flips forever
    let cyclic = d.write(
        "cyclic.json",
        r#"{"features": ["(exists (tc (role on)) (gprim clear 0))", "(prim holding 0)"],
            "names": ["n", "H"],
            "rules": [{"cond": ["¬H", "n>0"], "eff": ["H", "n↓"]},
                      {"cond": ["H"], "eff": ["¬H", "n?"]}]}"#,
    );
    let (code, out) = run(&["verify", &dom, &cyclic, &prob, "--no-symmetry"]);
    assert_eq!(code, EXIT_FAILURE);
    assert!(out.contains("\tCyclic\t"), "{out}");
}

#[test]
fn width_of_a_sketch() {
    let d = Dir::new();
    let dom = d.gripper();
    let sketch = d.write(
        "sketch.json",
        r#"{"features": ["(exists (role at) (one roomb))"], "names": ["g"],
            "rules": [{"cond": [], "eff": ["g↑"]}]}"#,
    );
    let (code, out) = run(&["width", &dom, &sketch, &d.path("p2.pddl"), "--k-max", "2"]);
    assert_eq!(code, EXIT_OK, "{out}");
    let last = out.lines().last().unwrap();
    assert!(last.starts_with("coverage: 100.0%"), "{out}");
    let max: f64 = last.split("max width: ").nth(1).unwrap().split_whitespace().next().unwrap().parse().unwrap();
    assert!(max >= 1.0, "{out}");

    let (code, _) = run(&["width", &dom, &d.path("missing.json"), &d.path("p2.pddl")]);
    assert_eq!(code, EXIT_USAGE);
}
