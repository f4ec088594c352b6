//! Monotonicity, conditional monotonicity and k-stratification, over rule
//! sets and over sets of transitions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::policy::{Change, Rule, Test};

/// Context tag of ρ: `g` unchanged, and additionally false / true at the source.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Tag {
    Same,
    Zero,
    One,
}

impl Tag {
    pub fn of(b: bool) -> Tag {
        if b {
            Tag::One
        } else {
            Tag::Zero
        }
    }
}

/// Something made of items (rules or transitions) that may move features.
pub trait ChangeModel {
    fn items(&self) -> usize;
    fn may_inc(&self, item: usize, f: usize) -> bool;
    fn may_dec(&self, item: usize, f: usize) -> bool;
    /// Membership of `item` in ρ(·, g, tag).
    fn keeps(&self, item: usize, g: usize, tag: Tag) -> bool;
}

/// True iff the rule forces a change of some feature.
pub fn entails_change(rule: &Rule) -> bool {
    rule.eff.iter().any(|e| match e.change {
        Change::Inc | Change::Dec => true,
        Change::SetTrue => rule.cond_on(e.feature) == Some(Test::BoolFalse),
        Change::SetFalse => rule.cond_on(e.feature) == Some(Test::BoolTrue),
        Change::UnkBool | Change::UnkNum => false,
    })
}

/// Rule-level change model. Unknown effects move a feature both ways.
pub struct Rules<'a>(pub &'a [Rule]);

impl ChangeModel for Rules<'_> {
    fn items(&self) -> usize {
        self.0.len()
    }

    fn may_inc(&self, item: usize, f: usize) -> bool {
        let r = &self.0[item];
        match r.eff_on(f) {
            Some(Change::Inc | Change::UnkNum | Change::UnkBool) => true,
            Some(Change::SetTrue) => r.cond_on(f) != Some(Test::BoolTrue),
            _ => false,
        }
    }

    fn may_dec(&self, item: usize, f: usize) -> bool {
        let r = &self.0[item];
        match r.eff_on(f) {
            Some(Change::Dec | Change::UnkNum | Change::UnkBool) => true,
            Some(Change::SetFalse) => r.cond_on(f) != Some(Test::BoolFalse),
            _ => false,
        }
    }

    fn keeps(&self, item: usize, g: usize, tag: Tag) -> bool {
        let r = &self.0[item];
        let moved = match r.eff_on(g) {
            Some(Change::Inc | Change::Dec) => true,
            Some(Change::SetTrue) => r.cond_on(g) == Some(Test::BoolFalse),
            Some(Change::SetFalse) => r.cond_on(g) == Some(Test::BoolTrue),
            _ => false,
        };
        if moved {
            return false;
        }
        !matches!(
            (tag, r.cond_on(g)),
            (Tag::Zero, Some(Test::Gt0 | Test::BoolTrue)) | (Tag::One, Some(Test::Eq0 | Test::BoolFalse))
        )
    }
}

/// Transition-level change model over explicit feature values.
pub struct Transitions<'a> {
    /// Per transition, feature values at the source and at the target.
    pub pairs: &'a [(Vec<u32>, Vec<u32>)],
}

impl ChangeModel for Transitions<'_> {
    fn items(&self) -> usize {
        self.pairs.len()
    }

    fn may_inc(&self, item: usize, f: usize) -> bool {
        let (s, t) = &self.pairs[item];
        t[f] > s[f]
    }

    fn may_dec(&self, item: usize, f: usize) -> bool {
        let (s, t) = &self.pairs[item];
        t[f] < s[f]
    }

    fn keeps(&self, item: usize, g: usize, tag: Tag) -> bool {
        let (s, t) = &self.pairs[item];
        s[g] == t[g]
            && match tag {
                Tag::Same => true,
                Tag::Zero => s[g] == 0,
                Tag::One => s[g] > 0,
            }
    }
}

/// Items of ρ(R, g, tag).
pub fn rho(model: &impl ChangeModel, g: usize, tag: Tag) -> Vec<usize> {
    (0..model.items()).filter(|&i| model.keeps(i, g, tag)).collect()
}

fn monotone_in(model: &impl ChangeModel, items: impl Iterator<Item = usize>, f: usize) -> bool {
    let (mut inc, mut dec) = (false, false);
    for i in items {
        inc |= model.may_inc(i, f);
        dec |= model.may_dec(i, f);
        if inc && dec {
            return false;
        }
    }
    true
}

pub fn monotone(model: &impl ChangeModel, f: usize) -> bool {
    monotone_in(model, 0..model.items(), f)
}

/// `f` is monotone in ρ(R, G, ν) for every Boolean valuation ν of `given`.
pub fn monotone_given(model: &impl ChangeModel, f: usize, given: &[usize]) -> bool {
    assert!(given.len() < 32, "support too large");
    (0u32..1 << given.len()).all(|nu| {
        let items = (0..model.items()).filter(|&i| {
            given
                .iter()
                .enumerate()
                .all(|(j, &g)| model.keeps(i, g, Tag::of(nu >> j & 1 == 1)))
        });
        monotone_in(model, items, f)
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rank {
    pub rank: usize,
    pub support: Vec<usize>,
}

/// Feature index to rank and support.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Ranking {
    pub ranks: BTreeMap<usize, Rank>,
}

impl Ranking {
    pub fn rank(&self, f: usize) -> Option<usize> {
        self.ranks.get(&f).map(|r| r.rank)
    }

    pub fn support(&self, f: usize) -> &[usize] {
        self.ranks.get(&f).map(|r| r.support.as_slice()).unwrap_or(&[])
    }

    /// Checks the ranking against a model: each feature monotone outright or
    /// given its support, supports of lower rank and at most `k` large.
    pub fn certifies(&self, model: &impl ChangeModel, k: usize) -> bool {
        self.ranks.iter().all(|(&f, r)| {
            r.support.len() <= k
                && r.support.iter().all(|g| self.rank(*g).is_some_and(|rg| rg < r.rank))
                && if r.support.is_empty() {
                    monotone(model, f)
                } else {
                    monotone_given(model, f, &r.support)
                }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stratification {
    Ranked(Ranking),
    /// Features left without rank; empty when a rule entails no change.
    NotStratified(Vec<usize>),
}

impl Stratification {
    pub fn ranking(&self) -> Option<&Ranking> {
        match self {
            Stratification::Ranked(r) => Some(r),
            Stratification::NotStratified(_) => None,
        }
    }

    pub fn is_ranked(&self) -> bool {
        matches!(self, Stratification::Ranked(_))
    }
}

/// Subsets of `pool` with 1..=k elements, by size then lexicographically.
fn supports(pool: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(pool: &[usize], start: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..pool.len() {
            cur.push(pool[i]);
            rec(pool, i + 1, size, cur, out);
            cur.pop();
        }
    }
    for size in 1..=k.min(pool.len()) {
        rec(pool, 0, size, &mut cur, &mut out);
    }
    out
}

/// Staged ranking: rank 0 for monotone features, then rank ℓ for features
/// monotone given some set of at most `k` features ranked before stage ℓ.
pub fn stratify(model: &impl ChangeModel, used: &[usize], k: usize) -> Stratification {
    let mut used = used.to_vec();
    used.sort_unstable();
    used.dedup();
    let mut ranking = Ranking::default();
    let mut level = 0;
    loop {
        let earlier: Vec<usize> = ranking.ranks.keys().copied().collect();
        let cands = if level == 0 { Vec::new() } else { supports(&earlier, k) };
        let mut added = Vec::new();
        for &f in &used {
            if ranking.ranks.contains_key(&f) {
                continue;
            }
            let support = if level == 0 {
                monotone(model, f).then(Vec::new)
            } else {
                cands.iter().find(|g| monotone_given(model, f, g)).cloned()
            };
            if let Some(support) = support {
                added.push((f, support));
            }
        }
        if added.is_empty() && level > 0 {
            break;
        }
        for (f, support) in added {
            ranking.ranks.insert(f, Rank { rank: level, support });
        }
        level += 1;
        if ranking.ranks.len() == used.len() {
            break;
        }
    }
    let missing: Vec<usize> = used.into_iter().filter(|f| !ranking.ranks.contains_key(f)).collect();
    if missing.is_empty() {
        Stratification::Ranked(ranking)
    } else {
        Stratification::NotStratified(missing)
    }
}

/// Stratification of a rule-based policy; every rule must entail a change.
pub fn stratify_rules(rules: &[Rule], used: &[usize], k: usize) -> Stratification {
    if !rules.iter().all(entails_change) {
        return Stratification::NotStratified(Vec::new());
    }
    stratify(&Rules(rules), used, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::{Cond, Eff};

    const N: usize = 0;
    const M: usize = 1;
    const A: usize = 2;

    fn c(feature: usize, test: Test) -> Cond {
        Cond { feature, test }
    }

    fn e(feature: usize, change: Change) -> Eff {
        Eff { feature, change }
    }

    fn gripper() -> Vec<Rule> {
        vec![
            Rule::new(vec![c(N, Test::Gt0)], vec![e(N, Change::Dec), e(M, Change::UnkNum)]),
            Rule::new(vec![c(M, Test::Gt0)], vec![e(M, Change::Dec)]),
            Rule::new(vec![c(A, Test::BoolTrue), c(M, Test::Gt0)], vec![e(A, Change::SetFalse)]),
            Rule::new(vec![c(A, Test::BoolFalse), c(M, Test::Eq0)], vec![e(A, Change::SetTrue)]),
        ]
    }

    #[test]
    fn gripper_rho_sets() {
        let r = gripper();
        let m = Rules(&r);
        assert_eq!(rho(&m, N, Tag::Zero), vec![1, 2, 3]);
        assert_eq!(rho(&m, N, Tag::One), vec![1, 2, 3]);
        assert_eq!(rho(&m, M, Tag::Zero), vec![0, 3]);
        // the literal definition; the worked example lists r1, r4
        assert_eq!(rho(&m, M, Tag::One), vec![0, 2]);
        assert!(rho(&Rules(&[]), N, Tag::Same).is_empty());
    }

    #[test]
    fn gripper_monotonicity() {
        let r = gripper();
        let m = Rules(&r);
        assert!(monotone(&m, N));
        assert!(!monotone(&m, M));
        assert!(!monotone(&m, A));
        assert!(monotone_given(&m, M, &[N]));
        assert!(monotone_given(&m, A, &[M]));
        assert!(!monotone_given(&m, A, &[N]));
        assert!(monotone(&m, 7));
    }

    #[test]
    fn gripper_ranking() {
        let r = gripper();
        let s = stratify_rules(&r, &[N, M, A], 1);
        let rk = s.ranking().expect("stratified");
        assert_eq!(rk.ranks[&N], Rank { rank: 0, support: vec![] });
        assert_eq!(rk.ranks[&M], Rank { rank: 1, support: vec![N] });
        assert_eq!(rk.ranks[&A], Rank { rank: 2, support: vec![M] });
        assert!(rk.certifies(&Rules(&r), 1));
    }

    #[test]
    fn entails_change_cases() {
        const H: usize = 1;
        let pick = Rule::new(vec![c(H, Test::BoolFalse), c(N, Test::Gt0)], vec![e(H, Change::SetTrue), e(N, Change::Dec)]);
        assert!(entails_change(&pick));
        assert!(!entails_change(&Rule::new(vec![c(H, Test::BoolTrue)], vec![e(H, Change::UnkBool)])));
        assert!(!entails_change(&Rule::new(vec![], vec![])));
    }

    #[test]
    fn blocks_dichotomy() {
        const H: usize = 1;
        let pick = Rule::new(vec![c(H, Test::BoolFalse), c(N, Test::Gt0)], vec![e(H, Change::SetTrue), e(N, Change::Dec)]);
        let put = Rule::new(vec![c(H, Test::BoolTrue)], vec![e(H, Change::SetFalse)]);
        let s = stratify_rules(&[pick.clone(), put], &[N, H], 1);
        let rk = s.ranking().unwrap();
        assert_eq!(rk.ranks[&N].rank, 0);
        assert_eq!(rk.ranks[&H], Rank { rank: 1, support: vec![N] });
        let put_unk = Rule::new(vec![c(H, Test::BoolTrue)], vec![e(H, Change::SetFalse), e(N, Change::UnkNum)]);
        assert_eq!(
            stratify_rules(&[pick, put_unk], &[N, H], 1),
            Stratification::NotStratified(vec![N, H])
        );
    }

    #[test]
    fn transition_model() {
        let pairs = vec![(vec![2, 0], vec![1, 1]), (vec![1, 1], vec![1, 0])];
        let m = Transitions { pairs: &pairs };
        assert!(monotone(&m, 0));
        assert!(!monotone(&m, 1));
        assert!(monotone_given(&m, 1, &[0]));
        assert_eq!(rho(&m, 0, Tag::One), vec![1]);
        assert_eq!(rho(&m, 0, Tag::Zero), Vec::<usize>::new());
    }
}
