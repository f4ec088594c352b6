//! Termination check for a hand-written rule set.

use policy_learner::policy::{Change, Cond, Eff, Rule, Test};
use policy_learner::termination::{stratify_rules, Stratification};

fn main() {
    // features: 0 = n (numerical), 1 = H (Boolean)
    let pick = Rule::new(
        vec![Cond { feature: 1, test: Test::BoolFalse }, Cond { feature: 0, test: Test::Gt0 }],
        vec![Eff { feature: 1, change: Change::SetTrue }, Eff { feature: 0, change: Change::Dec }],
    );
    let put = Rule::new(
        vec![Cond { feature: 1, test: Test::BoolTrue }],
        vec![Eff { feature: 1, change: Change::SetFalse }],
    );
    let put_loose = Rule::new(
        vec![Cond { feature: 1, test: Test::BoolTrue }],
        vec![Eff { feature: 1, change: Change::SetFalse }, Eff { feature: 0, change: Change::UnkNum }],
    );

    for (label, rules) in [("tight", vec![pick.clone(), put]), ("loose", vec![pick, put_loose])] {
        match stratify_rules(&rules, &[0, 1], 1) {
            Stratification::Ranked(rk) => {
                println!("{label}: terminating");
                for (f, r) in &rk.ranks {
                    println!("  f{f}: rank {} support {:?}", r.rank, r.support);
                }
            }
            Stratification::NotStratified(rest) => println!("{label}: no ranking, stuck on {rest:?}"),
        }
    }
}
