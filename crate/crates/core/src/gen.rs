//! Seeded random problem generator for the test harnesses.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::approval::CcrvInstance;
use crate::attack::BriberyInstance;
use crate::election::{CandidateId, Election, Rule, Vote, Voter};
use crate::problem::{Instance, ProblemFile, ProblemKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenParams {
    pub kind: ProblemKind,
    pub rule: Rule,
    /// Including p.
    pub candidates: usize,
    pub voters: usize,
    /// Ignored for bribery.
    pub unregistered: usize,
    /// Prices are drawn from min_price..=max_price when the problem is priced.
    pub min_price: u64,
    pub max_price: u64,
    /// Replacement limit (capped at the voter count for ccrv) or budget.
    pub limit: u64,
}

fn candidate_names(m: usize) -> Vec<CandidateId> {
    std::iter::once("p".to_string())
        .chain((1..m).map(|i| format!("c{i}")))
        .map(|n| CandidateId::new(n).expect("plain name"))
        .collect()
}

fn random_voter(rng: &mut ChaCha8Rng, cands: &[CandidateId], rule: Rule, prices: Option<(u64, u64)>) -> Voter {
    let chosen = sample(rng, cands.len(), rule.k).into_iter().map(|i| cands[i].clone()).collect();
    let vote = Vote::new(rule.kind, chosen).expect("distinct sample");
    let price = prices.map_or(1, |(lo, hi)| rng.gen_range(lo..=hi.max(lo)));
    Voter::new(vote, price)
}

/// Deterministic for a given (params, seed).
///
/// # Panics
/// If `rule.k` exceeds the candidate count.
pub fn gen_problem(params: &GenParams, seed: u64) -> ProblemFile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cands = candidate_names(params.candidates);
    let priced = params.kind != ProblemKind::Ccrv;
    let prices = priced.then_some((params.min_price, params.max_price));
    let voters: Vec<Voter> = (0..params.voters).map(|_| random_voter(&mut rng, &cands, params.rule, prices)).collect();
    let election = Election::new(cands.clone(), voters, params.rule).expect("rule fits candidates");
    let p = cands[0].clone();
    let instance = match params.kind {
        ProblemKind::Ccrv | ProblemKind::PricedCcrv => {
            let pool = (0..params.unregistered).map(|_| random_voter(&mut rng, &cands, params.rule, prices)).collect();
            let limit = if priced { params.limit } else { params.limit.min(params.voters as u64) };
            Instance::Ccrv(CcrvInstance::new(election, pool, p, limit, priced).expect("generated votes are valid"))
        }
        ProblemKind::Bribery => Instance::Bribery(BriberyInstance::new(election, p, params.limit).expect("p runs")),
    };
    ProblemFile { name: format!("gen{seed}"), kind: params.kind, instance }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::parse_problem;

    #[test]
    fn deterministic_and_round_trips() {
        let params = GenParams {
            kind: ProblemKind::PricedCcrv,
            rule: Rule::approval(2),
            candidates: 5,
            voters: 6,
            unregistered: 4,
            min_price: 0,
            max_price: 3,
            limit: 4,
        };
        let a = gen_problem(&params, 17);
        assert_eq!(a, gen_problem(&params, 17));
        assert_ne!(a, gen_problem(&params, 18));
        assert_eq!(parse_problem(&a.to_string()).unwrap(), a);
    }
}
