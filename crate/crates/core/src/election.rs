//! Elections under k-Approval and k-Veto.
//!
//! Votes are stored abbreviated: only the top-k (approval) or bottom-k (veto)
//! candidates are kept, since both rules score a vote by that set alone. A
//! full ranking can be rebuilt with [`Vote::full_ranking`].

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use crate::error::ElectionError;

/// Candidate name. Nonempty, no whitespace, no `#`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CandidateId(String);

impl CandidateId {
    pub fn new(name: impl Into<String>) -> Result<Self, ElectionError> {
        let name = name.into();
        if name.is_empty() || name.contains('#') || name.chars().any(char::is_whitespace) {
            return Err(ElectionError::InvalidName(name));
        }
        Ok(CandidateId(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CandidateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RuleKind {
    Approval,
    Veto,
}

impl RuleKind {
    pub fn verb(self) -> &'static str {
        match self {
            RuleKind::Approval => "approve",
            RuleKind::Veto => "veto",
        }
    }
}

/// A scoring rule: k-Approval or k-Veto.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub kind: RuleKind,
    pub k: usize,
}

impl Rule {
    pub const fn approval(k: usize) -> Self {
        Rule { kind: RuleKind::Approval, k }
    }

    pub const fn veto(k: usize) -> Self {
        Rule { kind: RuleKind::Veto, k }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            RuleKind::Approval => write!(f, "{}approval", self.k),
            RuleKind::Veto => write!(f, "{}veto", self.k),
        }
    }
}

/// An abbreviated vote: the k approved (or vetoed) candidates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Vote {
    kind: RuleKind,
    chosen: Vec<CandidateId>,
}

impl Vote {
    pub fn new(kind: RuleKind, chosen: Vec<CandidateId>) -> Result<Self, ElectionError> {
        if chosen.is_empty() {
            return Err(ElectionError::EmptyVote);
        }
        let mut seen = BTreeSet::new();
        for c in &chosen {
            if !seen.insert(c) {
                return Err(ElectionError::DuplicateInVote(c.clone()));
            }
        }
        Ok(Vote { kind, chosen })
    }

    pub fn approve<I, S>(names: I) -> Result<Self, ElectionError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::from_names(RuleKind::Approval, names)
    }

    pub fn veto<I, S>(names: I) -> Result<Self, ElectionError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::from_names(RuleKind::Veto, names)
    }

    fn from_names<I, S>(kind: RuleKind, names: I) -> Result<Self, ElectionError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let chosen = names.into_iter().map(CandidateId::new).collect::<Result<Vec<_>, _>>()?;
        Vote::new(kind, chosen)
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn chosen(&self) -> &[CandidateId] {
        &self.chosen
    }

    pub fn k(&self) -> usize {
        self.chosen.len()
    }

    /// True when both votes give points (or vetoes) to the same set.
    pub fn same_set(&self, other: &Vote) -> bool {
        if self.kind != other.kind || self.chosen.len() != other.chosen.len() {
            return false;
        }
        let a: BTreeSet<_> = self.chosen.iter().collect();
        other.chosen.iter().all(|c| a.contains(c))
    }

    /// The full ranking this vote denotes.
    ///
    /// Approval votes put `chosen` on top, veto votes put it at the bottom.
    /// `lead` (if given and not chosen) is placed first among the remaining
    /// candidates; the rest follow in lexicographic order.
    pub fn full_ranking(&self, candidates: &[CandidateId], lead: Option<&CandidateId>) -> Vec<CandidateId> {
        let chosen: BTreeSet<_> = self.chosen.iter().collect();
        let mut rest: Vec<CandidateId> = candidates.iter().filter(|c| !chosen.contains(c)).cloned().collect();
        rest.sort();
        if let Some(lead) = lead {
            if let Some(pos) = rest.iter().position(|c| c == lead) {
                let l = rest.remove(pos);
                rest.insert(0, l);
            }
        }
        match self.kind {
            RuleKind::Approval => self.chosen.iter().cloned().chain(rest).collect(),
            RuleKind::Veto => rest.into_iter().chain(self.chosen.iter().cloned()).collect(),
        }
    }
}

impl fmt::Display for Vote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.verb())?;
        for c in &self.chosen {
            write!(f, " {c}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Voter {
    pub vote: Vote,
    pub price: u64,
}

impl Voter {
    pub fn new(vote: Vote, price: u64) -> Self {
        Voter { vote, price }
    }

    pub fn unpriced(vote: Vote) -> Self {
        Voter { vote, price: 1 }
    }
}

/// Per-candidate approval scores or veto counts, in candidate order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScoreProfile {
    kind: RuleKind,
    entries: Vec<(CandidateId, u64)>,
}

impl ScoreProfile {
    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn get(&self, c: &CandidateId) -> Option<u64> {
        self.entries.binary_search_by(|(x, _)| x.cmp(c)).ok().map(|i| self.entries[i].1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CandidateId, u64)> {
        self.entries.iter().map(|(c, s)| (c, *s))
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().map(|(_, s)| s).sum()
    }

    /// Best value: highest score (approval) or fewest vetoes (veto).
    pub fn best(&self) -> Option<u64> {
        let values = self.entries.iter().map(|(_, s)| *s);
        match self.kind {
            RuleKind::Approval => values.max(),
            RuleKind::Veto => values.min(),
        }
    }

    pub fn winners(&self) -> Vec<CandidateId> {
        match self.best() {
            None => Vec::new(),
            Some(best) => self.entries.iter().filter(|(_, s)| *s == best).map(|(c, _)| c.clone()).collect(),
        }
    }
}

/// Candidates, voters and a rule. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Election {
    candidates: Vec<CandidateId>,
    voters: Vec<Voter>,
    rule: Rule,
}

impl Election {
    /// Validates the election. Candidates are kept in sorted order.
    pub fn new(candidates: Vec<CandidateId>, voters: Vec<Voter>, rule: Rule) -> Result<Self, ElectionError> {
        if candidates.is_empty() {
            return Err(ElectionError::NoCandidates);
        }
        let mut sorted = candidates;
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(ElectionError::DuplicateCandidate(w[0].clone()));
        }
        if rule.k == 0 || rule.k > sorted.len() {
            return Err(ElectionError::RuleTooWide { k: rule.k, candidates: sorted.len() });
        }
        let election = Election { candidates: sorted, voters: Vec::new(), rule };
        for v in &voters {
            election.check_vote(&v.vote)?;
        }
        Ok(Election { voters, ..election })
    }

    pub fn from_names<I, S>(names: I, voters: Vec<Voter>, rule: Rule) -> Result<Self, ElectionError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let candidates = names.into_iter().map(CandidateId::new).collect::<Result<Vec<_>, _>>()?;
        Election::new(candidates, voters, rule)
    }

    /// Checks that `vote` is valid under this election's rule and candidates.
    pub fn check_vote(&self, vote: &Vote) -> Result<(), ElectionError> {
        if vote.kind != self.rule.kind {
            return Err(ElectionError::RuleMismatch { rule: self.rule, found: vote.kind });
        }
        if vote.k() != self.rule.k {
            return Err(ElectionError::ArityMismatch { expected: self.rule.k, found: vote.k() });
        }
        for c in &vote.chosen {
            if self.index_of(c).is_none() {
                return Err(ElectionError::UnknownCandidate(c.clone()));
            }
        }
        Ok(())
    }

    pub fn candidates(&self) -> &[CandidateId] {
        &self.candidates
    }

    pub fn voters(&self) -> &[Voter] {
        &self.voters
    }

    pub fn rule(&self) -> Rule {
        self.rule
    }

    pub fn index_of(&self, c: &CandidateId) -> Option<usize> {
        self.candidates.binary_search(c).ok()
    }

    pub fn contains(&self, c: &CandidateId) -> bool {
        self.index_of(c).is_some()
    }

    /// Candidate indices chosen by `vote`, in vote order.
    pub fn vote_indices(&self, vote: &Vote) -> Vec<usize> {
        vote.chosen.iter().map(|c| self.index_of(c).expect("vote validated against election")).collect()
    }

    /// Same candidates and rule, different voters.
    pub fn with_voters(&self, voters: Vec<Voter>) -> Result<Election, ElectionError> {
        for v in &voters {
            self.check_vote(&v.vote)?;
        }
        Ok(Election { candidates: self.candidates.clone(), voters, rule: self.rule })
    }

    /// Raw counts in candidate-index order.
    pub fn counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.candidates.len()];
        for v in &self.voters {
            for c in &v.vote.chosen {
                counts[self.index_of(c).expect("validated")] += 1;
            }
        }
        counts
    }

    pub fn score(&self) -> ScoreProfile {
        let entries = self.candidates.iter().cloned().zip(self.counts()).collect();
        ScoreProfile { kind: self.rule.kind, entries }
    }

    /// Nonunique-model winners, in candidate order. Never empty.
    pub fn winners(&self) -> Vec<CandidateId> {
        self.score().winners()
    }

    pub fn is_winner(&self, c: &CandidateId) -> bool {
        let counts = self.counts();
        let Some(i) = self.index_of(c) else { return false };
        is_winner_by_counts(self.rule.kind, &counts, i)
    }
}

/// Whether candidate `i` is among the winners for the given raw counts.
pub(crate) fn is_winner_by_counts(kind: RuleKind, counts: &[u64], i: usize) -> bool {
    counts.iter().all(|&c| match kind {
        RuleKind::Approval => c.cmp(&counts[i]) != Ordering::Greater,
        RuleKind::Veto => c.cmp(&counts[i]) != Ordering::Less,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approvals(groups: &[(usize, [&str; 2])]) -> Vec<Voter> {
        groups
            .iter()
            .flat_map(|(n, names)| std::iter::repeat_with(|| Voter::unpriced(Vote::approve(*names).unwrap())).take(*n))
            .collect()
    }

    fn vetoes(groups: &[(usize, [&str; 2], u64)]) -> Vec<Voter> {
        groups
            .iter()
            .flat_map(|(n, names, price)| {
                std::iter::repeat_with(|| Voter::new(Vote::veto(*names).unwrap(), *price)).take(*n)
            })
            .collect()
    }

    fn id(s: &str) -> CandidateId {
        CandidateId::new(s).unwrap()
    }

    #[test]
    fn example_one_scores() {
        let voters = approvals(&[(1, ["b", "c"]), (2, ["a", "b"]), (2, ["p", "b"])]);
        let e = Election::from_names(["a", "b", "c", "p"], voters, Rule::approval(2)).unwrap();
        let s = e.score();
        assert_eq!(s.get(&id("p")), Some(2));
        assert_eq!(s.get(&id("a")), Some(2));
        assert_eq!(s.get(&id("b")), Some(5));
        assert_eq!(s.get(&id("c")), Some(1));
        assert_eq!(s.total(), 10);
        assert_eq!(e.winners(), vec![id("b")]);
    }

    #[test]
    fn example_two_vetoes() {
        let voters = vetoes(&[(1, ["a", "b"], 1), (2, ["b", "c"], 1), (2, ["b", "p"], 1), (4, ["c", "p"], 2)]);
        let e = Election::from_names(["a", "b", "c", "p"], voters, Rule::veto(2)).unwrap();
        let s = e.score();
        assert_eq!(
            s.iter().map(|(c, v)| (c.as_str().to_string(), v)).collect::<Vec<_>>(),
            vec![("a".into(), 1), ("b".into(), 5), ("c".into(), 6), ("p".into(), 6)]
        );
        assert_eq!(e.winners(), vec![id("a")]);
    }

    #[test]
    fn bribed_example_two_has_p_winning() {
        let voters = vetoes(&[(1, ["a", "b"], 1), (1, ["b", "c"], 1), (4, ["c", "p"], 2), (3, ["a", "b"], 1)]);
        let e = Election::from_names(["a", "b", "c", "p"], voters, Rule::veto(2)).unwrap();
        assert_eq!(e.score().get(&id("p")), Some(4));
        assert_eq!(e.winners(), vec![id("a"), id("p")]);
    }

    #[test]
    fn empty_voters_all_tie_at_zero() {
        let e = Election::from_names(["x", "y", "z"], vec![], Rule::veto(2)).unwrap();
        assert!(e.score().iter().all(|(_, s)| s == 0));
        assert_eq!(e.winners().len(), 3);
    }

    #[test]
    fn single_candidate_always_wins() {
        let voters = vec![Voter::unpriced(Vote::approve(["solo"]).unwrap()); 3];
        let e = Election::from_names(["solo"], voters, Rule::approval(1)).unwrap();
        assert_eq!(e.winners(), vec![id("solo")]);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(Vote::approve(["p", "p"]), Err(ElectionError::DuplicateInVote(_))));
        assert!(matches!(CandidateId::new("a b"), Err(ElectionError::InvalidName(_))));
        assert!(matches!(CandidateId::new("#a"), Err(ElectionError::InvalidName(_))));
        assert!(matches!(
            Election::from_names(["a", "a"], vec![], Rule::approval(1)),
            Err(ElectionError::DuplicateCandidate(_))
        ));
        let ghost = vec![Voter::unpriced(Vote::approve(["a", "zz"]).unwrap())];
        assert!(matches!(
            Election::from_names(["a", "b"], ghost, Rule::approval(2)),
            Err(ElectionError::UnknownCandidate(_))
        ));
        let wide = vec![Voter::unpriced(Vote::approve(["a"]).unwrap())];
        assert!(matches!(
            Election::from_names(["a", "b"], wide, Rule::approval(2)),
            Err(ElectionError::ArityMismatch { .. })
        ));
        let veto = vec![Voter::unpriced(Vote::veto(["a", "b"]).unwrap())];
        assert!(matches!(
            Election::from_names(["a", "b"], veto, Rule::approval(2)),
            Err(ElectionError::RuleMismatch { .. })
        ));
    }

    #[test]
    fn full_ranking_places_chosen_at_the_ends() {
        let cands: Vec<_> = ["a", "b", "c", "p"].iter().map(|s| id(s)).collect();
        let v = Vote::approve(["p", "b"]).unwrap();
        assert_eq!(v.full_ranking(&cands, None), vec![id("p"), id("b"), id("a"), id("c")]);
        let v = Vote::veto(["a", "b"]).unwrap();
        assert_eq!(v.full_ranking(&cands, Some(&id("p"))), vec![id("p"), id("c"), id("a"), id("b")]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        const NAMES: [&str; 5] = ["a", "b", "c", "d", "p"];

        fn arb_election(kind: RuleKind) -> impl Strategy<Value = Election> {
            (2usize..=5, 1usize..=3).prop_flat_map(move |(m, k)| {
                let k = k.min(m);
                proptest::collection::vec(proptest::sample::subsequence((0..m).collect::<Vec<_>>(), k), 0..8).prop_map(
                    move |sets| {
                        let voters = sets
                            .into_iter()
                            .map(|s| {
                                let names: Vec<_> = s.into_iter().map(|i| NAMES[i]).collect();
                                Voter::unpriced(Vote::from_names(kind, names).unwrap())
                            })
                            .collect();
                        Election::from_names(NAMES[..m].iter().copied(), voters, Rule { kind, k }).unwrap()
                    },
                )
            })
        }

        proptest! {
            #[test]
            fn totals_are_conserved(e in prop_oneof![arb_election(RuleKind::Approval), arb_election(RuleKind::Veto)]) {
                let s = e.score();
                prop_assert_eq!(s.total(), (e.rule().k * e.voters().len()) as u64);
            }

            #[test]
            fn winners_are_extremal(e in prop_oneof![arb_election(RuleKind::Approval), arb_election(RuleKind::Veto)]) {
                let s = e.score();
                let w = e.winners();
                prop_assert!(!w.is_empty());
                for c in &w {
                    let sc = s.get(c).unwrap();
                    for (_, other) in s.iter() {
                        match e.rule().kind {
                            RuleKind::Approval => prop_assert!(sc >= other),
                            RuleKind::Veto => prop_assert!(sc <= other),
                        }
                    }
                    prop_assert!(e.is_winner(c));
                }
            }

            #[test]
            fn reordering_a_vote_keeps_scores(e in arb_election(RuleKind::Approval), pick in 0usize..8) {
                prop_assume!(!e.voters().is_empty());
                let i = pick % e.voters().len();
                let mut voters = e.voters().to_vec();
                let mut chosen = voters[i].vote.chosen().to_vec();
                chosen.reverse();
                voters[i] = Voter::unpriced(Vote::new(RuleKind::Approval, chosen).unwrap());
                let reordered = e.with_voters(voters).unwrap();
                prop_assert_eq!(reordered.score(), e.score());
            }
        }
    }
}
