//! Problem files: an election plus the attack question asked about it.
//!
//! ```text
//! election ex1
//! candidates a b c p
//! preferred p
//! problem ccrv
//! rule 2approval
//! limit 3
//! registered
//! 2 approve a b
//! 1 price 3 approve b c
//! unregistered
//! 1 approve p a
//! end
//! ```

use std::fmt::{self, Write as _};

use crate::approval::{solve_bribery_2approval, solve_ccrv, CcrvInstance};
use crate::attack::{AttackDecision, BriberyInstance};
use crate::election::{CandidateId, Election, Rule, RuleKind, Vote, Voter};
use crate::error::{ParseError, SolveError};
use crate::oracles::{brute_bribery_capped, brute_ccrv_capped, OracleCaps};
use crate::veto::{solve_bribery_2veto, solve_bribery_3veto_exact};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    Ccrv,
    PricedCcrv,
    Bribery,
}

impl ProblemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::Ccrv => "ccrv",
            ProblemKind::PricedCcrv => "priced-ccrv",
            ProblemKind::Bribery => "bribery",
        }
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ccrv" => Ok(ProblemKind::Ccrv),
            "priced-ccrv" => Ok(ProblemKind::PricedCcrv),
            "bribery" => Ok(ProblemKind::Bribery),
            other => Err(format!("unknown problem {other:?} (expected ccrv, priced-ccrv or bribery)")),
        }
    }
}

/// Parses `2approval`, `3veto` and the like.
pub fn parse_rule(s: &str) -> Result<Rule, String> {
    let (digits, kind) = if let Some(d) = s.strip_suffix("approval") {
        (d, RuleKind::Approval)
    } else if let Some(d) = s.strip_suffix("veto") {
        (d, RuleKind::Veto)
    } else {
        return Err(format!("unknown rule {s:?}"));
    };
    let k: usize = digits.parse().map_err(|_| format!("unknown rule {s:?}"))?;
    Ok(Rule { kind, k })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instance {
    Ccrv(CcrvInstance),
    Bribery(BriberyInstance),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemFile {
    pub name: String,
    pub kind: ProblemKind,
    pub instance: Instance,
}

impl ProblemFile {
    pub fn election(&self) -> &Election {
        match &self.instance {
            Instance::Ccrv(c) => c.election(),
            Instance::Bribery(b) => b.election(),
        }
    }

    pub fn preferred(&self) -> &CandidateId {
        match &self.instance {
            Instance::Ccrv(c) => c.preferred(),
            Instance::Bribery(b) => b.preferred(),
        }
    }

    pub fn limit(&self) -> u64 {
        match &self.instance {
            Instance::Ccrv(c) => c.limit(),
            Instance::Bribery(b) => b.budget(),
        }
    }
}

/// Runs the polynomial (or, for 3-Veto, exact) solver for the file.
pub fn solve_problem(problem: &ProblemFile) -> Result<AttackDecision, SolveError> {
    match &problem.instance {
        Instance::Ccrv(c) => solve_ccrv(c),
        Instance::Bribery(b) => {
            let rule = b.election().rule();
            match (rule.kind, rule.k) {
                (RuleKind::Approval, 2) => solve_bribery_2approval(b),
                (RuleKind::Veto, 2) => solve_bribery_2veto(b),
                (RuleKind::Veto, 3) => solve_bribery_3veto_exact(b),
                _ => Err(SolveError::Precondition(format!("no solver for bribery under {rule}"))),
            }
        }
    }
}

/// Runs the exhaustive oracle for the file.
pub fn oracle_problem(problem: &ProblemFile) -> Result<AttackDecision, SolveError> {
    oracle_problem_capped(problem, OracleCaps::default())
}

pub fn oracle_problem_capped(problem: &ProblemFile, caps: OracleCaps) -> Result<AttackDecision, SolveError> {
    match &problem.instance {
        Instance::Ccrv(c) => brute_ccrv_capped(c, caps),
        Instance::Bribery(b) => brute_bribery_capped(b, caps),
    }
}

#[derive(Default)]
struct Header {
    name: Option<String>,
    candidates: Option<Vec<CandidateId>>,
    preferred: Option<CandidateId>,
    kind: Option<ProblemKind>,
    rule: Option<Rule>,
    limit: Option<u64>,
}

fn set_once<T>(slot: &mut Option<T>, value: T, line: usize, key: &str) -> Result<(), ParseError> {
    if slot.is_some() {
        return Err(ParseError::new(line, format!("`{key}` given twice")));
    }
    *slot = Some(value);
    Ok(())
}

#[derive(PartialEq)]
enum Section {
    Header,
    Registered,
    Unregistered,
    Done,
}

fn parse_voters(toks: &[&str], rule: Rule, election: &Election, line: usize) -> Result<Vec<Voter>, ParseError> {
    let err = |m: String| ParseError::new(line, m);
    let count: usize = toks[0].parse().map_err(|_| err(format!("bad voter count {:?}", toks[0])))?;
    let (price, rest) = match toks.get(1) {
        Some(&"price") => {
            let raw = toks.get(2).ok_or_else(|| err("`price` needs a value".into()))?;
            (raw.parse::<u64>().map_err(|_| err(format!("bad price {raw:?}")))?, &toks[3..])
        }
        _ => (1, &toks[1..]),
    };
    let Some((verb, names)) = rest.split_first() else {
        return Err(err("expected `approve` or `veto`".into()));
    };
    let kind = match *verb {
        "approve" => RuleKind::Approval,
        "veto" => RuleKind::Veto,
        other => return Err(err(format!("expected `approve` or `veto`, found {other:?}"))),
    };
    if kind != rule.kind {
        return Err(err(format!("`{verb}` vote under rule {rule}")));
    }
    let chosen =
        names.iter().map(|n| CandidateId::new(*n)).collect::<Result<Vec<_>, _>>().map_err(|e| err(e.to_string()))?;
    let vote = Vote::new(kind, chosen).map_err(|e| err(e.to_string()))?;
    election.check_vote(&vote).map_err(|e| err(e.to_string()))?;
    Ok(vec![Voter::new(vote, price); count])
}

pub fn parse_problem(text: &str) -> Result<ProblemFile, ParseError> {
    let mut h = Header::default();
    let mut section = Section::Header;
    let mut shell: Option<Election> = None;
    let mut registered = Vec::new();
    let mut unregistered = Vec::new();
    let mut started = false;
    let mut last = 1;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        last = line;
        let toks: Vec<&str> = content.split_whitespace().collect();
        let err = |m: String| ParseError::new(line, m);
        if section == Section::Done {
            return Err(err("content after `end`".into()));
        }
        if !started {
            match toks[..] {
                ["election", name] => {
                    h.name = Some(name.to_string());
                    started = true;
                    continue;
                }
                _ => return Err(err("expected `election <name>`".into())),
            }
        }
        match toks[0] {
            "end" if toks.len() == 1 => {
                if section == Section::Header {
                    return Err(err("missing `registered` block".into()));
                }
                section = Section::Done;
            }
            "registered" if toks.len() == 1 => {
                if section != Section::Header {
                    return Err(err("`registered` given twice".into()));
                }
                let missing = [
                    ("candidates", h.candidates.is_none()),
                    ("preferred", h.preferred.is_none()),
                    ("problem", h.kind.is_none()),
                    ("rule", h.rule.is_none()),
                    ("limit", h.limit.is_none()),
                ];
                if let Some((key, _)) = missing.iter().find(|(_, m)| *m) {
                    return Err(err(format!("`{key}` must come before `registered`")));
                }
                let cands = h.candidates.clone().expect("checked");
                let election =
                    Election::new(cands, vec![], h.rule.expect("checked")).map_err(|e| err(e.to_string()))?;
                let p = h.preferred.as_ref().expect("checked");
                if !election.contains(p) {
                    return Err(err(format!("preferred candidate {p} is not a candidate")));
                }
                shell = Some(election);
                section = Section::Registered;
            }
            "unregistered" if toks.len() == 1 => {
                if section != Section::Registered {
                    return Err(err("`unregistered` must follow `registered`".into()));
                }
                if h.kind == Some(ProblemKind::Bribery) {
                    return Err(err("bribery problems have no unregistered voters".into()));
                }
                section = Section::Unregistered;
            }
            t if section != Section::Header && t.bytes().all(|b| b.is_ascii_digit()) => {
                let e = shell.as_ref().expect("set at registered");
                let voters = parse_voters(&toks, e.rule(), e, line)?;
                if section == Section::Registered {
                    registered.extend(voters);
                } else {
                    unregistered.extend(voters);
                }
            }
            _ if section != Section::Header => return Err(err(format!("expected a voter line, found {:?}", toks[0]))),
            "candidates" => {
                let cands = toks[1..]
                    .iter()
                    .map(|n| CandidateId::new(*n))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| err(e.to_string()))?;
                let mut sorted = cands.clone();
                sorted.sort();
                if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
                    return Err(err(format!("duplicate candidate {}", w[0])));
                }
                set_once(&mut h.candidates, cands, line, "candidates")?;
            }
            "preferred" => {
                let [_, p] = toks[..] else { return Err(err("expected `preferred <name>`".into())) };
                let p = CandidateId::new(p).map_err(|e| err(e.to_string()))?;
                set_once(&mut h.preferred, p, line, "preferred")?;
            }
            "problem" => {
                let [_, k] = toks[..] else { return Err(err("expected `problem <kind>`".into())) };
                set_once(&mut h.kind, k.parse().map_err(err)?, line, "problem")?;
            }
            "rule" => {
                let [_, r] = toks[..] else { return Err(err("expected `rule <rule>`".into())) };
                set_once(&mut h.rule, parse_rule(r).map_err(err)?, line, "rule")?;
            }
            "limit" => {
                let [_, l] = toks[..] else { return Err(err("expected `limit <int>`".into())) };
                let l: u64 = l.parse().map_err(|_| err(format!("bad limit {l:?}")))?;
                set_once(&mut h.limit, l, line, "limit")?;
            }
            other => return Err(err(format!("unknown directive {other:?}"))),
        }
    }
    if section != Section::Done {
        return Err(ParseError::new(last, "missing `end`"));
    }

    let err = |m: String| ParseError::new(last, m);
    let election = shell.expect("registered seen").with_voters(registered).map_err(|e| err(e.to_string()))?;
    let kind = h.kind.expect("checked");
    let limit = h.limit.expect("checked");
    let preferred = h.preferred.expect("checked");
    let instance = match kind {
        ProblemKind::Ccrv | ProblemKind::PricedCcrv => {
            let priced = kind == ProblemKind::PricedCcrv;
            if !priced && limit > election.voters().len() as u64 {
                return Err(err(format!("limit {limit} exceeds the {} registered voters", election.voters().len())));
            }
            Instance::Ccrv(
                CcrvInstance::new(election, unregistered, preferred, limit, priced).map_err(|e| err(e.to_string()))?,
            )
        }
        ProblemKind::Bribery => {
            Instance::Bribery(BriberyInstance::new(election, preferred, limit).map_err(|e| err(e.to_string()))?)
        }
    };
    Ok(ProblemFile { name: h.name.expect("started"), kind, instance })
}

fn write_voters(out: &mut String, voters: &[Voter]) {
    let mut i = 0;
    while i < voters.len() {
        let mut j = i + 1;
        while j < voters.len() && voters[j] == voters[i] {
            j += 1;
        }
        let v = &voters[i];
        let _ = write!(out, "{}", j - i);
        if v.price != 1 {
            let _ = write!(out, " price {}", v.price);
        }
        let _ = writeln!(out, " {}", v.vote);
        i = j;
    }
}

impl fmt::Display for ProblemFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = self.election();
        let mut out = String::new();
        let _ = writeln!(out, "election {}", self.name);
        out.push_str("candidates");
        for c in e.candidates() {
            let _ = write!(out, " {c}");
        }
        out.push('\n');
        let _ = writeln!(out, "preferred {}", self.preferred());
        let _ = writeln!(out, "problem {}", self.kind.as_str());
        let _ = writeln!(out, "rule {}", e.rule());
        let _ = writeln!(out, "limit {}", self.limit());
        out.push_str("registered\n");
        write_voters(&mut out, e.voters());
        if let Instance::Ccrv(c) = &self.instance {
            if !c.unregistered().is_empty() {
                out.push_str("unregistered\n");
                write_voters(&mut out, c.unregistered());
            }
        }
        out.push_str("end\n");
        f.write_str(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX1: &str = "\
election ex1
candidates a b c p
preferred p
problem ccrv
rule 2approval
limit 3
registered
1 approve b c
2 approve a b
2 approve p b
unregistered
2 approve a c
1 approve b c
1 approve p a
end
";

    #[test]
    fn parses_example_one() {
        let f = parse_problem(EX1).unwrap();
        let Instance::Ccrv(c) = &f.instance else { panic!() };
        assert_eq!((c.registered().len(), c.unregistered().len(), c.limit()), (5, 4, 3));
        assert!(!c.priced());
        assert_eq!(f.to_string(), EX1);
        assert_eq!(parse_problem(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn prices_round_trip() {
        let text = "election t\ncandidates a b p\npreferred p\nproblem bribery\nrule 2veto\nlimit 2\nregistered\n2 price 3 veto a p\n1 veto a b\nend\n";
        let f = parse_problem(text).unwrap();
        assert_eq!(f.election().voters()[0].price, 3);
        assert_eq!(f.election().voters()[2].price, 1);
        assert_eq!(f.to_string(), text);
    }

    #[test]
    fn errors_have_lines() {
        let bad = EX1.replace("2 approve p b", "2 approve p p");
        let e = parse_problem(&bad).unwrap_err();
        assert_eq!(e.line, 10);
        assert!(e.message.contains("twice"), "{}", e.message);
        let bad = EX1.replace("1 approve b c\n2", "1 approve b z\n2");
        assert_eq!(parse_problem(&bad).unwrap_err().line, 8);
        let bad = EX1.replace("1 approve b c\n2", "1 approve b c a\n2");
        assert_eq!(parse_problem(&bad).unwrap_err().line, 8);
        let bad = EX1.replace("candidates a b c p", "candidates a b c p a");
        assert_eq!(parse_problem(&bad).unwrap_err().line, 2);
        let bad = EX1.replace("limit 3", "limit 6");
        assert!(parse_problem(&bad).is_err());
        assert!(parse_problem(&EX1.replace("end\n", "")).is_err());
        let bad = EX1.replace("rule 2approval", "rule 2veto");
        assert_eq!(parse_problem(&bad).unwrap_err().line, 8);
    }

    #[test]
    fn rule_names() {
        assert_eq!(parse_rule("3veto"), Ok(Rule::veto(3)));
        assert_eq!(parse_rule("2approval"), Ok(Rule::approval(2)));
        assert!(parse_rule("veto").is_err());
        assert!(parse_rule("2plurality").is_err());
    }
}
