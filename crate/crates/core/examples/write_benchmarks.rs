//! Writes the bundled domains and generated problems as PDDL files.
//!
//! `cargo run --example write_benchmarks -- <dir>`

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand::rngs::StdRng;

use policy_learner::bench;

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).expect("write file");
}

fn main() {
    let root = std::env::args().nth(1).unwrap_or_else(|| "benchmarks".into());
    let root = Path::new(&root);
    for d in ["gripper", "blocks", "spanner", "delivery"] {
        fs::create_dir_all(root.join(d)).expect("create directory");
    }

    let g = root.join("gripper");
    write(&g, "domain.pddl", bench::GRIPPER_DOMAIN);
    for n in [2, 3, 4, 10, 20] {
        write(&g, &format!("p{n:02}.pddl"), &bench::gripper_problem(n));
    }

    let b = root.join("blocks");
    write(&b, "domain.pddl", bench::BLOCKS_DOMAIN);
    let mut rng = StdRng::seed_from_u64(7);
    for n in [3, 4, 5, 10] {
        write(&b, &format!("p{n:02}.pddl"), &bench::random_blocks_clear(n, &mut rng));
    }

    let s = root.join("spanner");
    write(&s, "domain.pddl", bench::SPANNER_DOMAIN);
    for (len, at) in [(2, 1), (3, 1), (3, 2), (4, 2), (6, 3)] {
        write(&s, &format!("p{len}-{at}.pddl"), &bench::spanner_problem(len, at));
    }

    let d = root.join("delivery");
    write(&d, "domain.pddl", bench::DELIVERY_DOMAIN);
    for (w, h) in [(2, 2), (3, 2), (3, 3), (5, 5)] {
        write(&d, &format!("p{w}x{h}.pddl"), &bench::delivery_problem(w, h, (0, 0), (w - 1, h - 1), (0, h - 1)));
    }
    println!("wrote benchmarks to {}", root.display());
}
