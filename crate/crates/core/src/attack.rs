//! Attack instances, decisions and witnesses.
//!
//! Witness checks in this module use only election scoring; they never
//! call into the matching code, so they can audit any solver.

use std::fmt;

use crate::election::{CandidateId, Election, Vote, Voter};
use crate::error::InstanceError;

/// Priced bribery: change votes of voters whose total price is within budget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BriberyInstance {
    election: Election,
    preferred: CandidateId,
    budget: u64,
}

pub type VetoBriberyInstance = BriberyInstance;

impl BriberyInstance {
    pub fn new(election: Election, preferred: CandidateId, budget: u64) -> Result<Self, InstanceError> {
        if !election.contains(&preferred) {
            return Err(InstanceError::Malformed(format!("preferred candidate {preferred} is not running")));
        }
        Ok(BriberyInstance { election, preferred, budget })
    }

    pub fn election(&self) -> &Election {
        &self.election
    }

    pub fn preferred(&self) -> &CandidateId {
        &self.preferred
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn with_budget(&self, budget: u64) -> Self {
        BriberyInstance { budget, ..self.clone() }
    }
}

/// Index of a voter in a control instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VoterRef {
    Registered(usize),
    Unregistered(usize),
}

impl fmt::Display for VoterRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VoterRef::Registered(i) => write!(f, "v{}", i + 1),
            VoterRef::Unregistered(i) => write!(f, "w{}", i + 1),
        }
    }
}

/// Remove `removed` registered voters and add `added` unregistered ones.
/// Entries are paired position by position for reporting.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReplacementPlan {
    pub removed: Vec<usize>,
    pub added: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bribe {
    pub voter: usize,
    pub vote: Vote,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BriberyPlan {
    pub bribes: Vec<Bribe>,
}

impl BriberyPlan {
    pub fn cost(&self, election: &Election) -> u64 {
        self.bribes.iter().map(|b| election.voters()[b.voter].price).sum()
    }

    /// The election after every bribed voter casts its new vote.
    pub fn apply(&self, election: &Election) -> Result<Election, WitnessError> {
        let mut voters = election.voters().to_vec();
        let mut seen = vec![false; voters.len()];
        for b in &self.bribes {
            let Some(slot) = voters.get_mut(b.voter) else {
                return Err(WitnessError::UnknownVoter(b.voter));
            };
            if std::mem::replace(&mut seen[b.voter], true) {
                return Err(WitnessError::RepeatedVoter(b.voter));
            }
            slot.vote = b.vote.clone();
        }
        election.with_voters(voters).map_err(|e| WitnessError::InvalidVote(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Replacement(ReplacementPlan),
    Bribery(BriberyPlan),
}

/// How a polynomial solver reached its answer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    /// Fewer than three candidates (or, under 3-Veto, four): everyone ties.
    Trivial,
    /// Control graph with target final score `fs_p` for p.
    Control { fs_p: u64, matching_weight: i64 },
    /// 2-Veto subproblem bribing `lp` p-vetoers and `lp_other` other voters.
    Veto { lp: u64, lp_other: u64, fv_p: u64, matching_weight: i64 },
    /// Exhaustive search (3-Veto solver, oracles): the cheapest witness.
    Search,
}

/// Yes/no with a witness on yes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttackDecision {
    pub success: bool,
    pub witness: Option<Witness>,
    /// Cost of the witness plan (replacements, or total price paid).
    pub objective: Option<u64>,
    pub certificate: Option<Certificate>,
}

impl AttackDecision {
    pub fn no() -> Self {
        AttackDecision { success: false, witness: None, objective: None, certificate: None }
    }

    pub fn yes(witness: Witness, objective: u64, certificate: Certificate) -> Self {
        AttackDecision {
            success: true,
            witness: Some(witness),
            objective: Some(objective),
            certificate: Some(certificate),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum WitnessError {
    #[error("voter index {0} out of range")]
    UnknownVoter(usize),
    #[error("voter index {0} used twice")]
    RepeatedVoter(usize),
    #[error("{removed} voters removed but {added} added")]
    Unbalanced { removed: usize, added: usize },
    #[error("plan replaces {used} voters, limit is {limit}")]
    OverLimit { used: u64, limit: u64 },
    #[error("plan costs {cost}, budget is {budget}")]
    OverBudget { cost: u64, budget: u64 },
    #[error("invalid vote in plan: {0}")]
    InvalidVote(String),
    #[error("{preferred} does not win; winners are {winners}")]
    NotWinner { preferred: CandidateId, winners: String },
}

pub(crate) fn require_winner(election: &Election, preferred: &CandidateId) -> Result<(), WitnessError> {
    if election.is_winner(preferred) {
        Ok(())
    } else {
        let winners = election.winners().iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ");
        Err(WitnessError::NotWinner { preferred: preferred.clone(), winners })
    }
}

/// Rechecks a bribery plan: distinct voters, valid votes, within budget,
/// and the preferred candidate wins the bribed election. Returns the cost.
pub fn verify_bribery(instance: &BriberyInstance, plan: &BriberyPlan) -> Result<u64, WitnessError> {
    let bribed = plan.apply(instance.election())?;
    let cost = plan.cost(instance.election());
    if cost > instance.budget() {
        return Err(WitnessError::OverBudget { cost, budget: instance.budget() });
    }
    require_winner(&bribed, instance.preferred())?;
    Ok(cost)
}

/// Voters of the applied replacement, in registered-then-added order.
pub(crate) fn replaced_voters(
    registered: &[Voter],
    unregistered: &[Voter],
    plan: &ReplacementPlan,
) -> Result<Vec<Voter>, WitnessError> {
    let mut removed = vec![false; registered.len()];
    for &i in &plan.removed {
        if i >= registered.len() {
            return Err(WitnessError::UnknownVoter(i));
        }
        if std::mem::replace(&mut removed[i], true) {
            return Err(WitnessError::RepeatedVoter(i));
        }
    }
    let mut added = vec![false; unregistered.len()];
    for &j in &plan.added {
        if j >= unregistered.len() {
            return Err(WitnessError::UnknownVoter(j));
        }
        if std::mem::replace(&mut added[j], true) {
            return Err(WitnessError::RepeatedVoter(j));
        }
    }
    Ok(registered
        .iter()
        .zip(&removed)
        .filter(|(_, r)| !**r)
        .map(|(v, _)| v.clone())
        .chain(plan.added.iter().map(|&j| unregistered[j].clone()))
        .collect())
}
