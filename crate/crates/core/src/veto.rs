//! Priced bribery under 2-Veto (polynomial, through b-matching) and
//! 3-Veto (exact search at small scale).
//!
//! Bribed voters never veto p: moving a veto off p onto anyone else can
//! only help p.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::attack::{verify_bribery, AttackDecision, Bribe, BriberyInstance, BriberyPlan, Certificate, Witness};
use crate::election::{CandidateId, Rule, RuleKind, Vote};
use crate::error::SolveError;
use crate::graph::{fresh_name, Multigraph, PerfectBMatchingProblem, Sense};
use crate::matching;

pub const THREE_VETO_VOTER_CAP: usize = 22;

/// One guess at the shape of a bribery: `lp` bribed voters veto p and
/// `lp_other` bribed voters do not.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SubproblemParams {
    pub lp: u64,
    pub lp_other: u64,
}

impl SubproblemParams {
    pub fn new(lp: u64, lp_other: u64) -> Self {
        SubproblemParams { lp, lp_other }
    }

    pub fn bribed(&self) -> u64 {
        self.lp + self.lp_other
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VetoGraphMeta {
    pub params: SubproblemParams,
    /// Vetoes p keeps after bribery.
    pub fv_p: u64,
    pub x: usize,
    pub y: usize,
    /// Voter index of each voter-edge.
    pub edge_voter: Vec<Option<usize>>,
    /// Candidate index of each bribe-edge (c, y).
    pub edge_bribe: Vec<Option<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SkipReason {
    /// More bribed voters of one kind than exist.
    TooFewVoters { wanted: u64, available: u64 },
    /// A vertex would need a negative b-value.
    NegativeDemand { vertex: String, value: i64 },
}

impl std::fmt::Display for SkipReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SkipReason::TooFewVoters { wanted, available } => {
                write!(f, "needs {wanted} voters but only {available} exist")
            }
            SkipReason::NegativeDemand { vertex, value } => write!(f, "b({vertex}) would be {value}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VetoGraph {
    Built { problem: PerfectBMatchingProblem, meta: VetoGraphMeta },
    Skip(SkipReason),
}

fn check_rule(instance: &BriberyInstance, k: usize) -> Result<(), SolveError> {
    let rule = instance.election().rule();
    if rule != Rule::veto(k) {
        return Err(SolveError::Precondition(format!("expected {}, got {rule}", Rule::veto(k))));
    }
    Ok(())
}

fn vetoes_p(instance: &BriberyInstance, i: usize) -> bool {
    instance.election().voters()[i].vote.chosen().contains(instance.preferred())
}

/// The min-weight b-matching graph for one (ℓ_p, ℓ′_p) guess.
pub fn build_2veto_graph(instance: &BriberyInstance, params: SubproblemParams) -> VetoGraph {
    let election = instance.election();
    let voters = election.voters();
    let cands = election.candidates();
    let m = cands.len();
    let p = election.index_of(instance.preferred()).expect("validated");
    let counts = election.counts();
    let vp_count = (0..voters.len()).filter(|&i| vetoes_p(instance, i)).count() as u64;
    let other_count = voters.len() as u64 - vp_count;
    if params.lp > vp_count {
        return VetoGraph::Skip(SkipReason::TooFewVoters { wanted: params.lp, available: vp_count });
    }
    if params.lp_other > other_count {
        return VetoGraph::Skip(SkipReason::TooFewVoters { wanted: params.lp_other, available: other_count });
    }
    let t = params.bribed() as i64;
    let fv_p = counts[p] as i64 - params.lp as i64;

    let mut demand = vec![0u64; m + 2];
    demand[p] = params.lp;
    for c in (0..m).filter(|&c| c != p) {
        let b = counts[c] as i64 + t - fv_p;
        if b < 0 {
            return VetoGraph::Skip(SkipReason::NegativeDemand { vertex: cands[c].to_string(), value: b });
        }
        demand[c] = b as u64;
    }
    let by = (m as i64 - 3) * t;
    let bx = (0..m).filter(|&c| c != p).map(|c| demand[c] as i64).sum::<i64>()
        - params.lp as i64
        - 2 * params.lp_other as i64
        - by;
    let taken: Vec<&str> = cands.iter().map(|c| c.as_str()).collect();
    let x_name = fresh_name(&taken, "x");
    let y_name = fresh_name(&taken, "y");
    if bx < 0 {
        return VetoGraph::Skip(SkipReason::NegativeDemand { vertex: x_name, value: bx });
    }
    demand[m] = bx as u64;
    demand[m + 1] = by as u64;

    let mut graph = Multigraph::new();
    for c in cands {
        graph.add_vertex(c.as_str());
    }
    let x = graph.add_vertex(x_name);
    let y = graph.add_vertex(y_name);
    let mut edge_voter = Vec::new();
    let mut edge_bribe = Vec::new();
    for (i, v) in voters.iter().enumerate() {
        let [a, b] = election.vote_indices(&v.vote)[..] else { unreachable!("2veto votes name two candidates") };
        graph.add_edge(a, b, v.price as i64).expect("distinct candidates");
        edge_voter.push(Some(i));
        edge_bribe.push(None);
    }
    for c in (0..m).filter(|&c| c != p) {
        graph.add_parallel(c, y, 0, t as u64).expect("valid vertices");
        graph.add_parallel(c, x, 0, demand[c]).expect("valid vertices");
        let extra = t as usize + demand[c] as usize;
        edge_voter.extend(std::iter::repeat_n(None, extra));
        edge_bribe.extend(std::iter::repeat_n(Some(c), t as usize));
        edge_bribe.extend(std::iter::repeat_n(None, demand[c] as usize));
    }
    let problem = PerfectBMatchingProblem::new(graph, demand, Sense::Minimize).expect("demand per vertex");
    let meta = VetoGraphMeta { params, fv_p: fv_p as u64, x, y, edge_voter, edge_bribe };
    VetoGraph::Built { problem, meta }
}

/// Turns per-candidate veto counts into `t` votes of `arity` distinct
/// candidates each, always taking the candidates with the most remaining
/// (ties by name).
pub fn realize_bribed_votes(bv: &BTreeMap<CandidateId, u64>, t: u64, arity: usize) -> Result<Vec<Vote>, SolveError> {
    let total: u64 = bv.values().sum();
    if total != arity as u64 * t {
        return Err(SolveError::Precondition(format!("demands sum to {total}, expected {}", arity as u64 * t)));
    }
    if let Some((c, &n)) = bv.iter().find(|(_, &n)| n > t) {
        return Err(SolveError::Precondition(format!("{c} needs {n} vetoes from {t} voters")));
    }
    if t > 0 && bv.len() < arity {
        return Err(SolveError::Precondition(format!("{} candidates cannot fill votes of {arity}", bv.len())));
    }
    let mut left: Vec<(CandidateId, u64)> = bv.iter().map(|(c, &n)| (c.clone(), n)).collect();
    let mut votes = Vec::with_capacity(t as usize);
    for _ in 0..t {
        // Stable sort keeps names ascending among equal counts.
        left.sort_by_key(|&(_, n)| std::cmp::Reverse(n));
        let chosen: Vec<CandidateId> = left[..arity].iter().map(|(c, _)| c.clone()).collect();
        if left[arity - 1].1 == 0 {
            return Err(SolveError::Precondition("ran out of demand".into()));
        }
        for entry in &mut left[..arity] {
            entry.1 -= 1;
        }
        left.sort_by(|a, b| a.0.cmp(&b.0));
        votes.push(Vote::new(RuleKind::Veto, chosen).expect("distinct candidates"));
    }
    Ok(votes)
}

fn finish(
    instance: &BriberyInstance,
    bribed: &[usize],
    bv: &BTreeMap<CandidateId, u64>,
    arity: usize,
    certificate: Certificate,
) -> Result<AttackDecision, SolveError> {
    let votes = realize_bribed_votes(bv, bribed.len() as u64, arity)?;
    let bribes = bribed.iter().zip(votes).map(|(&voter, vote)| Bribe { voter, vote }).collect();
    let plan = BriberyPlan { bribes };
    let cost = verify_bribery(instance, &plan).map_err(|e| SolveError::WitnessRejected(e.to_string()))?;
    Ok(AttackDecision::yes(Witness::Bribery(plan), cost, certificate))
}

/// Subproblems in search order: ℓ_p descending, then ℓ′_p ascending.
pub fn subproblem_order(instance: &BriberyInstance) -> Vec<SubproblemParams> {
    let n = instance.election().voters().len();
    let vp = (0..n).filter(|&i| vetoes_p(instance, i)).count() as u64;
    let other = n as u64 - vp;
    (0..=vp).rev().flat_map(|lp| (0..=other).map(move |lo| SubproblemParams::new(lp, lo))).collect()
}

struct Accepted {
    params: SubproblemParams,
    fv_p: u64,
    weight: i64,
    bribed: Vec<usize>,
    bv: BTreeMap<CandidateId, u64>,
}

fn try_subproblem(instance: &BriberyInstance, params: SubproblemParams) -> Result<Option<Accepted>, SolveError> {
    let VetoGraph::Built { problem, meta } = build_2veto_graph(instance, params) else {
        return Ok(None);
    };
    let solution = match matching::solve(&problem) {
        Ok(s) => s,
        Err(e) if e.is_infeasible() => return Ok(None),
        Err(e) => return Err(e),
    };
    if solution.total_weight > instance.budget() as i64 {
        return Ok(None);
    }
    let election = instance.election();
    let p = election.index_of(instance.preferred()).expect("validated");
    let t = params.bribed();
    let mut bribed = Vec::new();
    let mut at_y = vec![0u64; election.candidates().len()];
    for &e in &solution.selected {
        if let Some(i) = meta.edge_voter[e] {
            bribed.push(i);
        }
        if let Some(c) = meta.edge_bribe[e] {
            at_y[c] += 1;
        }
    }
    bribed.sort_unstable();
    let bv = election
        .candidates()
        .iter()
        .enumerate()
        .filter(|&(c, _)| c != p)
        .map(|(c, name)| (name.clone(), t - at_y[c]))
        .collect();
    Ok(Some(Accepted { params, fv_p: meta.fv_p, weight: solution.total_weight, bribed, bv }))
}

/// Decides priced bribery for 2-Veto.
pub fn solve_bribery_2veto(instance: &BriberyInstance) -> Result<AttackDecision, SolveError> {
    check_rule(instance, 2)?;
    if instance.election().candidates().len() <= 2 {
        return Ok(AttackDecision::yes(Witness::Bribery(BriberyPlan::default()), 0, Certificate::Trivial));
    }
    let found = subproblem_order(instance)
        .into_par_iter()
        .map(|params| try_subproblem(instance, params))
        .find_map_first(|r| r.transpose())
        .transpose()?;
    let Some(acc) = found else {
        return Ok(AttackDecision::no());
    };
    let certificate = Certificate::Veto {
        lp: acc.params.lp,
        lp_other: acc.params.lp_other,
        fv_p: acc.fv_p,
        matching_weight: acc.weight,
    };
    finish(instance, &acc.bribed, &acc.bv, 2, certificate)
}

/// Decides priced bribery for 3-Veto by branch-and-bound over bribed sets,
/// up to [`THREE_VETO_VOTER_CAP`] voters.
pub fn solve_bribery_3veto_exact(instance: &BriberyInstance) -> Result<AttackDecision, SolveError> {
    solve_bribery_3veto_capped(instance, THREE_VETO_VOTER_CAP)
}

pub fn solve_bribery_3veto_capped(instance: &BriberyInstance, cap: usize) -> Result<AttackDecision, SolveError> {
    check_rule(instance, 3)?;
    let election = instance.election();
    let n = election.voters().len();
    if n > cap {
        return Err(SolveError::CapExceeded { what: "voters", cap, actual: n });
    }
    if election.candidates().len() <= 3 {
        return Ok(AttackDecision::yes(Witness::Bribery(BriberyPlan::default()), 0, Certificate::Trivial));
    }
    let search = Search::new(instance);
    let mut chosen = Vec::new();
    let mut best = None;
    search.explore(0, 0, &mut chosen, &mut best);
    let Some((_, bribed)) = best else {
        return Ok(AttackDecision::no());
    };
    let demands = search.demands(&bribed).expect("feasible set");
    let bv = search.top_up(demands, bribed.len() as u64);
    finish(instance, &bribed, &bv, 3, Certificate::Search)
}

struct Search<'a> {
    instance: &'a BriberyInstance,
    p: usize,
    counts: Vec<u64>,
    vetoed: Vec<Vec<usize>>,
    prices: Vec<u64>,
}

impl<'a> Search<'a> {
    fn new(instance: &'a BriberyInstance) -> Self {
        let e = instance.election();
        Search {
            instance,
            p: e.index_of(instance.preferred()).expect("validated"),
            counts: e.counts(),
            vetoed: e.voters().iter().map(|v| e.vote_indices(&v.vote)).collect(),
            prices: e.voters().iter().map(|v| v.price).collect(),
        }
    }

    /// Extra vetoes each candidate needs from the bribed votes, or None
    /// when no set of new votes works for this bribed set.
    fn demands(&self, bribed: &[usize]) -> Option<Vec<u64>> {
        let m = self.counts.len();
        let t = bribed.len() as u64;
        let mut left = self.counts.clone();
        for &i in bribed {
            for &c in &self.vetoed[i] {
                left[c] -= 1;
            }
        }
        let f = left[self.p];
        let d: Vec<u64> = (0..m).map(|c| if c == self.p { 0 } else { f.saturating_sub(left[c]) }).collect();
        let feasible = d.iter().all(|&x| x <= t) && d.iter().sum::<u64>() <= 3 * t && 3 * t <= (m as u64 - 1) * t;
        feasible.then_some(d)
    }

    /// Raises demands (lowest-named candidates first, each up to t) until
    /// they total 3t.
    fn top_up(&self, mut d: Vec<u64>, t: u64) -> BTreeMap<CandidateId, u64> {
        let mut missing = 3 * t - d.iter().sum::<u64>();
        for (c, x) in d.iter_mut().enumerate() {
            if c == self.p {
                continue;
            }
            let add = (t - *x).min(missing);
            *x += add;
            missing -= add;
        }
        let cands = self.instance.election().candidates();
        (0..d.len()).filter(|&c| c != self.p).map(|c| (cands[c].clone(), d[c])).collect()
    }

    fn explore(&self, i: usize, cost: u64, chosen: &mut Vec<usize>, best: &mut Option<(u64, Vec<usize>)>) {
        if best.as_ref().is_some_and(|(b, _)| *b <= cost) {
            return;
        }
        // Feasibility is monotone in the bribed set, so stop at the first hit.
        if self.demands(chosen).is_some() {
            *best = Some((cost, chosen.clone()));
            return;
        }
        if i == self.prices.len() {
            return;
        }
        let with = cost + self.prices[i];
        if with <= self.instance.budget() {
            chosen.push(i);
            self.explore(i + 1, with, chosen, best);
            chosen.pop();
        }
        self.explore(i + 1, cost, chosen, best);
    }
}
