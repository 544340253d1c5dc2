//! Exhaustive deciders for the attack problems.
//!
//! These only use election scoring, never the matching code, and refuse
//! instances above their caps rather than truncating the search.

use crate::approval::{verify_replacement, CcrvInstance};
use crate::attack::{
    verify_bribery, AttackDecision, Bribe, BriberyInstance, BriberyPlan, Certificate, ReplacementPlan, Witness,
};
use crate::election::{is_winner_by_counts, CandidateId, Vote};
use crate::error::SolveError;

pub const CCRV_VOTER_CAP: usize = 14;
pub const BRIBERY_VOTER_CAP: usize = 8;
pub const BRIBERY_CANDIDATE_CAP: usize = 6;

/// Size limits for the searches. Above them the oracles return an error.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleCaps {
    pub ccrv_voters: usize,
    pub bribery_voters: usize,
    pub bribery_candidates: usize,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps {
            ccrv_voters: CCRV_VOTER_CAP,
            bribery_voters: BRIBERY_VOTER_CAP,
            bribery_candidates: BRIBERY_CANDIDATE_CAP,
        }
    }
}

fn cap(what: &'static str, cap: usize, actual: usize) -> Result<(), SolveError> {
    if actual > cap {
        Err(SolveError::CapExceeded { what, cap, actual })
    } else {
        Ok(())
    }
}

fn subsets_by_cost(prices: &[u64], budget: u64) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = (0u32..1 << prices.len())
        .map(|mask| {
            let cost = (0..prices.len()).filter(|i| mask >> i & 1 == 1).map(|i| prices[i]).sum();
            (cost, mask)
        })
        .filter(|&(cost, _)| cost <= budget)
        .collect();
    out.sort_by_key(|&(cost, mask)| (cost, mask.count_ones(), mask));
    out
}

/// Tries every pair of equal-size sub-collections within the limit; the
/// witness is a cheapest one.
pub fn brute_ccrv(instance: &CcrvInstance) -> Result<AttackDecision, SolveError> {
    brute_ccrv_capped(instance, OracleCaps::default())
}

pub fn brute_ccrv_capped(instance: &CcrvInstance, caps: OracleCaps) -> Result<AttackDecision, SolveError> {
    let reg = instance.registered();
    let unreg = instance.unregistered();
    cap("registered plus unregistered voters", caps.ccrv_voters.min(31), reg.len() + unreg.len())?;
    let election = instance.election();
    let kind = election.rule().kind;
    let p = election.index_of(instance.preferred()).expect("validated");
    let reg_idx: Vec<Vec<usize>> = reg.iter().map(|v| election.vote_indices(&v.vote)).collect();
    let unreg_idx: Vec<Vec<usize>> = unreg.iter().map(|v| election.vote_indices(&v.vote)).collect();
    let base = election.counts();
    let (rp, up): (Vec<u64>, Vec<u64>) = if instance.priced() {
        (reg.iter().map(|v| v.price).collect(), unreg.iter().map(|v| v.price).collect())
    } else {
        (vec![0; reg.len()], vec![0; unreg.len()])
    };

    let mut best: Option<(u64, ReplacementPlan)> = None;
    for rm in 0u32..1 << reg.len() {
        let removed: Vec<usize> = (0..reg.len()).filter(|i| rm >> i & 1 == 1).collect();
        if !instance.priced() && removed.len() as u64 > instance.limit() {
            continue;
        }
        let rm_cost: u64 = removed.iter().map(|&i| rp[i]).sum();
        let mut counts = base.clone();
        for &i in &removed {
            for &c in &reg_idx[i] {
                counts[c] -= 1;
            }
        }
        for add in 0u32..1 << unreg.len() {
            if add.count_ones() as usize != removed.len() {
                continue;
            }
            let added: Vec<usize> = (0..unreg.len()).filter(|j| add >> j & 1 == 1).collect();
            let cost = if instance.priced() {
                rm_cost + added.iter().map(|&j| up[j]).sum::<u64>()
            } else {
                removed.len() as u64
            };
            if cost > instance.limit() || best.as_ref().is_some_and(|(b, _)| *b <= cost) {
                continue;
            }
            let mut after = counts.clone();
            for &j in &added {
                for &c in &unreg_idx[j] {
                    after[c] += 1;
                }
            }
            if is_winner_by_counts(kind, &after, p) {
                best = Some((cost, ReplacementPlan { removed: removed.clone(), added }));
            }
        }
    }
    let Some((_, plan)) = best else {
        return Ok(AttackDecision::no());
    };
    let cost = verify_replacement(instance, &plan).map_err(|e| SolveError::WitnessRejected(e.to_string()))?;
    Ok(AttackDecision::yes(Witness::Replacement(plan), cost, Certificate::Search))
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Tries every bribed set within budget (cheapest first) and every multiset
/// of new votes for it, including votes that name p.
pub fn brute_bribery(instance: &BriberyInstance) -> Result<AttackDecision, SolveError> {
    brute_bribery_capped(instance, OracleCaps::default())
}

pub fn brute_bribery_capped(instance: &BriberyInstance, caps: OracleCaps) -> Result<AttackDecision, SolveError> {
    let election = instance.election();
    let voters = election.voters();
    cap("voters", caps.bribery_voters.min(31), voters.len())?;
    cap("candidates", caps.bribery_candidates, election.candidates().len())?;
    let rule = election.rule();
    let p = election.index_of(instance.preferred()).expect("validated");
    let options = combinations(election.candidates().len(), rule.k);
    let base = election.counts();
    let prices: Vec<u64> = voters.iter().map(|v| v.price).collect();

    for (_, mask) in subsets_by_cost(&prices, instance.budget()) {
        let bribed: Vec<usize> = (0..voters.len()).filter(|i| mask >> i & 1 == 1).collect();
        let mut counts = base.clone();
        for &i in &bribed {
            for c in election.vote_indices(&voters[i].vote) {
                counts[c] -= 1;
            }
        }
        let mut picks = Vec::with_capacity(bribed.len());
        if search_votes(&options, bribed.len(), 0, &mut counts, &mut picks, |c| is_winner_by_counts(rule.kind, c, p)) {
            let bribes = bribed
                .iter()
                .zip(&picks)
                .map(|(&voter, &o)| {
                    let chosen: Vec<CandidateId> =
                        options[o].iter().map(|&c| election.candidates()[c].clone()).collect();
                    Bribe { voter, vote: Vote::new(rule.kind, chosen).expect("distinct candidates") }
                })
                .collect();
            let plan = BriberyPlan { bribes };
            let cost = verify_bribery(instance, &plan).map_err(|e| SolveError::WitnessRejected(e.to_string()))?;
            return Ok(AttackDecision::yes(Witness::Bribery(plan), cost, Certificate::Search));
        }
    }
    Ok(AttackDecision::no())
}

/// Multisets of `left` options in nondecreasing order; `picks` holds the
/// successful choice on return.
fn search_votes(
    options: &[Vec<usize>],
    left: usize,
    from: usize,
    counts: &mut Vec<u64>,
    picks: &mut Vec<usize>,
    wins: impl Fn(&[u64]) -> bool + Copy,
) -> bool {
    if left == 0 {
        return wins(counts);
    }
    for o in from..options.len() {
        for &c in &options[o] {
            counts[c] += 1;
        }
        picks.push(o);
        if search_votes(options, left - 1, o, counts, picks, wins) {
            return true;
        }
        picks.pop();
        for &c in &options[o] {
            counts[c] -= 1;
        }
    }
    false
}
