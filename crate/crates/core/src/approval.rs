//! Control by replacing voters, and priced bribery, under 2-Approval.
//!
//! Each solve builds a b-matching graph over the candidates plus a slack
//! vertex `x`. A voter approving {a, b} becomes an edge (a, b); a perfect
//! b-matching picks the final electorate.

use rayon::prelude::*;

use crate::attack::{
    replaced_voters, require_winner, AttackDecision, Bribe, BriberyInstance, BriberyPlan, Certificate, ReplacementPlan,
    VoterRef, Witness, WitnessError,
};
use crate::election::{CandidateId, Election, Rule, RuleKind, Vote, Voter};
use crate::error::{InstanceError, SolveError};
use crate::graph::{fresh_name, Multigraph, PerfectBMatchingProblem, Sense};
use crate::matching;

/// Control by replacing voters: swap out up to `limit` registered voters
/// for the same number of unregistered ones (or, when priced, spend at most
/// `limit` on removals plus additions).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CcrvInstance {
    election: Election,
    unregistered: Vec<Voter>,
    preferred: CandidateId,
    limit: u64,
    priced: bool,
}

impl CcrvInstance {
    pub fn new(
        election: Election,
        unregistered: Vec<Voter>,
        preferred: CandidateId,
        limit: u64,
        priced: bool,
    ) -> Result<Self, InstanceError> {
        for v in &unregistered {
            election.check_vote(&v.vote)?;
        }
        if !election.contains(&preferred) {
            return Err(InstanceError::Malformed(format!("preferred candidate {preferred} is not running")));
        }
        Ok(CcrvInstance { election, unregistered, preferred, limit, priced })
    }

    /// The registered election (C, V).
    pub fn election(&self) -> &Election {
        &self.election
    }

    pub fn candidates(&self) -> &[CandidateId] {
        self.election.candidates()
    }

    pub fn registered(&self) -> &[Voter] {
        self.election.voters()
    }

    pub fn unregistered(&self) -> &[Voter] {
        &self.unregistered
    }

    pub fn preferred(&self) -> &CandidateId {
        &self.preferred
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn priced(&self) -> bool {
        self.priced
    }

    pub fn with_limit(&self, limit: u64) -> Self {
        CcrvInstance { limit, ..self.clone() }
    }

    pub fn voter(&self, r: VoterRef) -> &Voter {
        match r {
            VoterRef::Registered(i) => &self.registered()[i],
            VoterRef::Unregistered(j) => &self.unregistered[j],
        }
    }

    /// Price of a voter; 1 for everyone when unpriced.
    pub fn price(&self, r: VoterRef) -> u64 {
        if self.priced {
            self.voter(r).price
        } else {
            1
        }
    }

    /// Cost of a plan: replacements when unpriced, prices paid when priced.
    pub fn plan_cost(&self, plan: &ReplacementPlan) -> u64 {
        if self.priced {
            let removed: u64 = plan.removed.iter().map(|&i| self.registered()[i].price).sum();
            let added: u64 = plan.added.iter().map(|&j| self.unregistered[j].price).sum();
            removed + added
        } else {
            plan.removed.len() as u64
        }
    }

    /// The election after applying `plan`.
    pub fn apply(&self, plan: &ReplacementPlan) -> Result<Election, WitnessError> {
        let voters = replaced_voters(self.registered(), &self.unregistered, plan)?;
        self.election.with_voters(voters).map_err(|e| WitnessError::InvalidVote(e.to_string()))
    }

    fn check_rule(&self) -> Result<(), SolveError> {
        let rule = self.election.rule();
        if rule != Rule::approval(2) {
            return Err(SolveError::Precondition(format!("replacement control needs 2approval, got {rule}")));
        }
        Ok(())
    }

    fn approves_p(&self, v: &Voter) -> bool {
        v.vote.chosen().contains(&self.preferred)
    }
}

/// Rechecks a replacement plan with plain re-scoring. Returns its cost.
pub fn verify_replacement(instance: &CcrvInstance, plan: &ReplacementPlan) -> Result<u64, WitnessError> {
    if plan.removed.len() != plan.added.len() {
        return Err(WitnessError::Unbalanced { removed: plan.removed.len(), added: plan.added.len() });
    }
    let after = instance.apply(plan)?;
    let cost = instance.plan_cost(plan);
    if cost > instance.limit() {
        return Err(if instance.priced() {
            WitnessError::OverBudget { cost, budget: instance.limit() }
        } else {
            WitnessError::OverLimit { used: cost, limit: instance.limit() }
        });
    }
    require_winner(&after, instance.preferred())?;
    Ok(cost)
}

/// What the graph's parts mean for the instance it was built from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CcrvGraphMeta {
    pub fs_p: u64,
    /// Accept when the optimal matching weight is at least this.
    pub threshold: i64,
    /// Vertex index of the slack vertex.
    pub x: usize,
    /// For each edge, the voter it stands for (padding edges map to None).
    pub edge_voter: Vec<Option<VoterRef>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CcrvGraph {
    Built {
        problem: PerfectBMatchingProblem,
        meta: CcrvGraphMeta,
    },
    /// b(x) would be `deficit` below zero: no electorate of the right size
    /// gives everyone at most fs_p points.
    TriviallyNo {
        fs_p: u64,
        deficit: u64,
    },
}

/// The target score for p in the unpriced problem.
pub fn target_score(instance: &CcrvInstance) -> u64 {
    let n = instance.registered().len() as u64;
    let vp = instance.registered().iter().filter(|v| instance.approves_p(v)).count() as u64;
    let wp = instance.unregistered().iter().filter(|v| instance.approves_p(v)).count() as u64;
    vp + instance.limit().min(n - vp).min(wp)
}

/// Graph for the unpriced problem, at the target score.
pub fn build_ccrv_graph(instance: &CcrvInstance) -> CcrvGraph {
    let n = instance.registered().len() as i64;
    build_graph_at(instance, target_score(instance), |_| 1, |_| 0, n - instance.limit() as i64)
}

/// Graph for the priced problem at score `fs_p`: V-edges weigh π(v),
/// W-edges weigh −π(w).
pub fn build_priced_ccrv_graph(instance: &CcrvInstance, fs_p: u64) -> CcrvGraph {
    let total: u64 = instance.registered().iter().map(|v| v.price).sum();
    build_graph_at(instance, fs_p, |v| v.price as i64, |w| -(w.price as i64), total as i64 - instance.limit() as i64)
}

fn build_graph_at(
    instance: &CcrvInstance,
    fs_p: u64,
    v_weight: impl Fn(&Voter) -> i64,
    w_weight: impl Fn(&Voter) -> i64,
    threshold: i64,
) -> CcrvGraph {
    let election = instance.election();
    let m = election.candidates().len() as u64;
    let n = instance.registered().len() as u64;
    let Some(bx) = (m * fs_p).checked_sub(2 * n) else {
        return CcrvGraph::TriviallyNo { fs_p, deficit: 2 * n - m * fs_p };
    };

    let mut graph = Multigraph::new();
    for c in election.candidates() {
        graph.add_vertex(c.as_str());
    }
    let taken: Vec<&str> = election.candidates().iter().map(|c| c.as_str()).collect();
    let x = graph.add_vertex(fresh_name(&taken, "x"));
    let mut edge_voter = Vec::new();

    let voters =
        instance.registered().iter().enumerate().map(|(i, v)| (VoterRef::Registered(i), v, v_weight(v))).chain(
            instance.unregistered().iter().enumerate().map(|(j, w)| (VoterRef::Unregistered(j), w, w_weight(w))),
        );
    for (r, voter, weight) in voters {
        let [a, b] = election.vote_indices(&voter.vote)[..] else {
            unreachable!("2approval votes name two candidates")
        };
        graph.add_edge(a, b, weight).expect("distinct candidates");
        edge_voter.push(Some(r));
    }
    let p = election.index_of(instance.preferred()).expect("validated");
    for c in (0..m as usize).filter(|&c| c != p) {
        graph.add_parallel(c, x, 0, fs_p).expect("valid vertices");
        edge_voter.extend(std::iter::repeat_n(None, fs_p as usize));
    }

    let mut demand = vec![fs_p; m as usize];
    demand.push(bx);
    let problem = PerfectBMatchingProblem::new(graph, demand, Sense::Maximize).expect("demand per vertex");
    CcrvGraph::Built { problem, meta: CcrvGraphMeta { fs_p, threshold, x, edge_voter } }
}

/// Solves one graph; Some(plan, weight) when it meets its threshold.
fn solve_graph(instance: &CcrvInstance, graph: &CcrvGraph) -> Result<Option<(ReplacementPlan, i64)>, SolveError> {
    let CcrvGraph::Built { problem, meta } = graph else {
        return Ok(None);
    };
    let solution = match matching::solve(problem) {
        Ok(s) => s,
        Err(e) if e.is_infeasible() => return Ok(None),
        Err(e) => return Err(e),
    };
    if solution.total_weight < meta.threshold {
        return Ok(None);
    }
    let n = instance.registered().len();
    let mut kept = vec![false; n];
    let mut added = Vec::new();
    for &e in &solution.selected {
        match meta.edge_voter[e] {
            Some(VoterRef::Registered(i)) => kept[i] = true,
            Some(VoterRef::Unregistered(j)) => added.push(j),
            None => {}
        }
    }
    added.sort_unstable();
    let removed = (0..n).filter(|&i| !kept[i]).collect();
    let plan = ReplacementPlan { removed, added };

    // The chosen electorate must give p exactly fs_p and nobody more.
    let after = instance.apply(&plan).map_err(|e| SolveError::WitnessRejected(e.to_string()))?;
    let p_score = after.score().get(instance.preferred()).expect("p runs");
    if p_score != meta.fs_p {
        return Err(SolveError::WitnessRejected(format!(
            "p scores {p_score} in the selected electorate, expected {}",
            meta.fs_p
        )));
    }
    Ok(Some((plan, solution.total_weight)))
}

fn accept(
    instance: &CcrvInstance,
    plan: ReplacementPlan,
    certificate: Certificate,
) -> Result<AttackDecision, SolveError> {
    let cost = verify_replacement(instance, &plan).map_err(|e| SolveError::WitnessRejected(e.to_string()))?;
    Ok(AttackDecision::yes(Witness::Replacement(plan), cost, certificate))
}

/// Decides unpriced replacement control for 2-Approval.
pub fn solve_ccrv_2approval(instance: &CcrvInstance) -> Result<AttackDecision, SolveError> {
    instance.check_rule()?;
    if instance.priced() {
        return Err(SolveError::Precondition("instance is priced".into()));
    }
    if instance.candidates().len() <= 2 {
        return accept(instance, ReplacementPlan::default(), Certificate::Trivial);
    }
    let graph = build_ccrv_graph(instance);
    match solve_graph(instance, &graph)? {
        Some((plan, weight)) => {
            let fs_p = target_score(instance);
            accept(instance, plan, Certificate::Control { fs_p, matching_weight: weight })
        }
        None => Ok(AttackDecision::no()),
    }
}

/// Decides priced replacement control for 2-Approval by trying every
/// target score for p; the lowest score that works supplies the witness.
pub fn solve_priced_ccrv_2approval(instance: &CcrvInstance) -> Result<AttackDecision, SolveError> {
    instance.check_rule()?;
    if instance.candidates().len() <= 2 {
        return accept(instance, ReplacementPlan::default(), Certificate::Trivial);
    }
    let n = instance.registered().len() as u64;
    let found = (0..=n)
        .into_par_iter()
        .map(|fs_p| {
            let graph = build_priced_ccrv_graph(instance, fs_p);
            solve_graph(instance, &graph).map(|r| r.map(|(plan, w)| (fs_p, plan, w)))
        })
        .find_map_first(|r| r.transpose())
        .transpose()?;
    match found {
        Some((fs_p, plan, weight)) => accept(instance, plan, Certificate::Control { fs_p, matching_weight: weight }),
        None => Ok(AttackDecision::no()),
    }
}

/// Dispatches on the instance's priced flag.
pub fn solve_ccrv(instance: &CcrvInstance) -> Result<AttackDecision, SolveError> {
    if instance.priced() {
        solve_priced_ccrv_2approval(instance)
    } else {
        solve_ccrv_2approval(instance)
    }
}

/// The replacement instance equivalent to a 2-Approval bribery instance:
/// every possible vote is available n times at no cost.
pub fn bribery_as_ccrv(instance: &BriberyInstance) -> Result<CcrvInstance, SolveError> {
    let election = instance.election();
    if election.rule() != Rule::approval(2) {
        return Err(SolveError::Precondition(format!("expected 2approval, got {}", election.rule())));
    }
    let n = election.voters().len();
    let cands = election.candidates();
    let mut pool = Vec::new();
    for (i, a) in cands.iter().enumerate() {
        for b in &cands[i + 1..] {
            let vote = Vote::new(RuleKind::Approval, vec![a.clone(), b.clone()]).expect("distinct");
            pool.extend(std::iter::repeat_n(Voter::new(vote, 0), n));
        }
    }
    CcrvInstance::new(election.clone(), pool, instance.preferred().clone(), instance.budget(), true)
        .map_err(|e| SolveError::Precondition(e.to_string()))
}

/// Decides priced bribery for 2-Approval through replacement control.
pub fn solve_bribery_2approval(instance: &BriberyInstance) -> Result<AttackDecision, SolveError> {
    let ccrv = bribery_as_ccrv(instance)?;
    let decision = solve_priced_ccrv_2approval(&ccrv)?;
    let Some(Witness::Replacement(plan)) = decision.witness else {
        return Ok(AttackDecision::no());
    };
    let voters = instance.election().voters();
    let bribes = plan
        .removed
        .iter()
        .zip(&plan.added)
        .map(|(&v, &w)| Bribe { voter: v, vote: ccrv.unregistered()[w].vote.clone() })
        .filter(|b| !b.vote.same_set(&voters[b.voter].vote))
        .collect();
    let plan = BriberyPlan { bribes };
    let cost =
        crate::attack::verify_bribery(instance, &plan).map_err(|e| SolveError::WitnessRejected(e.to_string()))?;
    let certificate = decision.certificate.unwrap_or(Certificate::Trivial);
    Ok(AttackDecision::yes(Witness::Bribery(plan), cost, certificate))
}
