use thiserror::Error;

use crate::election::{CandidateId, Rule, RuleKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ElectionError {
    #[error("invalid candidate name {0:?}")]
    InvalidName(String),
    #[error("election has no candidates")]
    NoCandidates,
    #[error("duplicate candidate {0}")]
    DuplicateCandidate(CandidateId),
    #[error("unknown candidate {0}")]
    UnknownCandidate(CandidateId),
    #[error("candidate {0} appears twice in one vote")]
    DuplicateInVote(CandidateId),
    #[error("vote names no candidates")]
    EmptyVote,
    #[error("vote lists {found} candidates, rule needs {expected}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("{found:?} vote under rule {rule}")]
    RuleMismatch { rule: Rule, found: RuleKind },
    #[error("rule needs {k} chosen candidates but only {candidates} exist")]
    RuleTooWide { k: usize, candidates: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(String),
    #[error("vertex index {0} out of range")]
    UnknownVertex(usize),
    #[error("unknown vertex {0:?}")]
    UnknownVertexName(String),
    #[error("duplicate vertex {0:?}")]
    DuplicateVertex(String),
    #[error("invalid vertex name {0:?}")]
    InvalidName(String),
    #[error("demand vector has {found} entries for {expected} vertices")]
    DemandLength { expected: usize, found: usize },
}

/// Why a perfect b-matching does not exist.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Infeasibility {
    #[error("total demand {0} is odd")]
    OddDemand(u64),
    #[error("vertex {vertex} has degree {degree} below demand {demand}")]
    DegreeBelowDemand { vertex: String, degree: u64, demand: u64 },
    #[error("no perfect matching exists")]
    NoPerfectMatching,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("infeasible: {0}")]
    Infeasible(#[from] Infeasibility),
    #[error("{what} has size {actual}, above the cap of {cap}")]
    CapExceeded { what: &'static str, cap: usize, actual: usize },
    #[error("edge weights span {0}, beyond the supported 2^31-1")]
    WeightOverflow(i128),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal check rejected the solver's witness: {0}")]
    WitnessRejected(String),
}

impl SolveError {
    pub fn is_infeasible(&self) -> bool {
        matches!(self, SolveError::Infeasible(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error(transparent)]
    Election(#[from] ElectionError),
    #[error("instance is malformed: {0}")]
    Malformed(String),
}

/// Text-format parse failure with a 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError { line, message: message.into() }
    }
}
