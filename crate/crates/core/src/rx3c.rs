//! Restricted exact cover by 3-sets, its reduction to 3-Veto bribery, and
//! instance generators.
//!
//! Text format:
//!
//! ```text
//! rx3c
//! elements 1 2 3
//! set 1 2 3
//! set 1 2 3
//! set 1 2 3
//! end
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::attack::BriberyInstance;
use crate::election::{CandidateId, Election, Rule, Vote, Voter};
use crate::error::{InstanceError, ParseError, SolveError};

pub const RX3C_SET_CAP: usize = 24;

/// 3k elements and 3k triples, each element in exactly three triples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rx3cInstance {
    elements: Vec<String>,
    sets: Vec<[usize; 3]>,
}

impl Rx3cInstance {
    pub fn new(elements: Vec<String>, sets: Vec<[String; 3]>) -> Result<Self, InstanceError> {
        let bad = |msg: String| InstanceError::Malformed(msg);
        let mut index = HashMap::new();
        for (i, e) in elements.iter().enumerate() {
            CandidateId::new(e.as_str())?;
            if index.insert(e.as_str(), i).is_some() {
                return Err(bad(format!("element {e} listed twice")));
            }
        }
        if !elements.len().is_multiple_of(3) {
            return Err(bad(format!("{} elements is not a multiple of 3", elements.len())));
        }
        if sets.len() != elements.len() {
            return Err(bad(format!("{} sets for {} elements", sets.len(), elements.len())));
        }
        let mut occurrences = vec![0usize; elements.len()];
        let mut triples = Vec::with_capacity(sets.len());
        for s in &sets {
            let mut t = [0usize; 3];
            for (slot, name) in t.iter_mut().zip(s) {
                *slot = *index.get(name.as_str()).ok_or_else(|| bad(format!("unknown element {name}")))?;
            }
            if t[0] == t[1] || t[0] == t[2] || t[1] == t[2] {
                return Err(bad(format!("set {} {} {} repeats an element", s[0], s[1], s[2])));
            }
            for &e in &t {
                occurrences[e] += 1;
            }
            triples.push(t);
        }
        if let Some(e) = occurrences.iter().position(|&n| n != 3) {
            return Err(bad(format!("element {} occurs in {} sets, not 3", elements[e], occurrences[e])));
        }
        Ok(Rx3cInstance { elements, sets: triples })
    }

    /// Number of sets in a cover.
    pub fn k(&self) -> usize {
        self.elements.len() / 3
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    /// Sets as element indices.
    pub fn sets(&self) -> &[[usize; 3]] {
        &self.sets
    }

    pub fn set_names(&self, i: usize) -> [&str; 3] {
        self.sets[i].map(|e| self.elements[e].as_str())
    }

    /// Whether the chosen sets cover every element exactly once.
    pub fn is_exact_cover(&self, chosen: &[usize]) -> bool {
        let mut hit = vec![0usize; self.elements.len()];
        for &s in chosen {
            let Some(set) = self.sets.get(s) else { return false };
            for &e in set {
                hit[e] += 1;
            }
        }
        hit.iter().all(|&h| h == 1)
    }
}

/// Exact-cover search, branching on the first uncovered element. Returns
/// the chosen set indices.
pub fn solve_rx3c_brute(instance: &Rx3cInstance) -> Result<Option<Vec<usize>>, SolveError> {
    if instance.sets.len() > RX3C_SET_CAP {
        return Err(SolveError::CapExceeded { what: "sets", cap: RX3C_SET_CAP, actual: instance.sets.len() });
    }
    fn rec(inst: &Rx3cInstance, covered: &mut [bool], chosen: &mut Vec<usize>) -> bool {
        let Some(e) = covered.iter().position(|c| !c) else { return true };
        for (i, s) in inst.sets.iter().enumerate() {
            if !s.contains(&e) || s.iter().any(|&x| covered[x]) {
                continue;
            }
            for &x in s {
                covered[x] = true;
            }
            chosen.push(i);
            if rec(inst, covered, chosen) {
                return true;
            }
            chosen.pop();
            for &x in s {
                covered[x] = false;
            }
        }
        false
    }
    let mut covered = vec![false; instance.elements.len()];
    let mut chosen = Vec::new();
    Ok(rec(instance, &mut covered, &mut chosen).then_some(chosen))
}

const RESERVED: [&str; 3] = ["p", "p1", "p2"];

fn is_reserved(name: &str) -> bool {
    RESERVED.contains(&name)
        || name.strip_prefix('d').is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
}

/// The 3-Veto bribery instance that is yes exactly when the cover exists.
///
/// Candidates are the elements, p, p1, p2 and dummies d1..d3k. Each set is
/// a price-1 voter vetoing its elements; two voters veto p1, p2, p; k more
/// give every dummy one veto. Those k + 2 voters cost k + 1, above budget k.
pub fn reduce_rx3c_to_3veto(instance: &Rx3cInstance) -> Result<BriberyInstance, InstanceError> {
    if let Some(e) = instance.elements.iter().find(|e| is_reserved(e)) {
        return Err(InstanceError::Malformed(format!("element name {e} clashes with a reduction candidate")));
    }
    let k = instance.k();
    let dummies: Vec<String> = (1..=3 * k).map(|i| format!("d{i}")).collect();
    let names =
        instance.elements.iter().cloned().chain(RESERVED.iter().map(|s| s.to_string())).chain(dummies.iter().cloned());
    let high = k as u64 + 1;
    let mut voters = Vec::new();
    for i in 0..instance.sets.len() {
        voters.push(Voter::new(Vote::veto(instance.set_names(i))?, 1));
    }
    for _ in 0..2 {
        voters.push(Voter::new(Vote::veto(["p1", "p2", "p"])?, high));
    }
    for block in dummies.chunks(3) {
        voters.push(Voter::new(Vote::veto(block.iter().map(String::as_str))?, high));
    }
    let election = Election::from_names(names, voters, Rule::veto(3))?;
    BriberyInstance::new(election, CandidateId::new("p")?, k as u64)
}

fn element_names(k: usize) -> Vec<String> {
    (1..=3 * k).map(|i| format!("e{i}")).collect()
}

/// Three random partitions of 3k elements into triples, stacked. Always
/// has an exact cover (any one partition).
pub fn gen_rx3c(k: usize, seed: u64) -> Rx3cInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let elements = element_names(k);
    let mut sets = Vec::with_capacity(3 * k);
    for _ in 0..3 {
        let mut order: Vec<usize> = (0..3 * k).collect();
        order.shuffle(&mut rng);
        for c in order.chunks(3) {
            let mut t = [c[0], c[1], c[2]];
            t.sort_unstable();
            sets.push(t.map(|e: usize| elements[e].clone()));
        }
    }
    Rx3cInstance::new(elements, sets).expect("three partitions give three occurrences each")
}

/// Random instance with no planted cover: three copies of every element
/// shuffled into triples, redrawn until no triple repeats an element.
pub fn gen_rx3c_unplanted(k: usize, seed: u64) -> Rx3cInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let elements = element_names(k);
    let mut points: Vec<usize> = (0..3 * k).flat_map(|e| [e, e, e]).collect();
    loop {
        points.shuffle(&mut rng);
        let triples: Vec<[usize; 3]> = points.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
        if triples.iter().all(|t| t[0] != t[1] && t[0] != t[2] && t[1] != t[2]) {
            let sets = triples
                .into_iter()
                .map(|mut t| {
                    t.sort_unstable();
                    t.map(|e| elements[e].clone())
                })
                .collect();
            return Rx3cInstance::new(elements, sets).expect("each element placed three times");
        }
    }
}

pub fn parse_rx3c(text: &str) -> Result<Rx3cInstance, ParseError> {
    let mut elements: Option<Vec<String>> = None;
    let mut sets = Vec::new();
    let mut started = false;
    let mut ended = false;
    let mut last = 1;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        last = line_no;
        if ended {
            return Err(ParseError::new(line_no, "content after `end`"));
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "rx3c" if !started && toks.len() == 1 => started = true,
            _ if !started => return Err(ParseError::new(line_no, "expected `rx3c`")),
            "elements" if elements.is_none() => {
                elements = Some(toks[1..].iter().map(|s| s.to_string()).collect());
            }
            "elements" => return Err(ParseError::new(line_no, "`elements` given twice")),
            "set" => {
                if elements.is_none() {
                    return Err(ParseError::new(line_no, "`set` before `elements`"));
                }
                let [_, a, b, c] = toks[..] else {
                    return Err(ParseError::new(line_no, "expected `set <a> <b> <c>`"));
                };
                sets.push([a.to_string(), b.to_string(), c.to_string()]);
            }
            "end" => ended = true,
            other => return Err(ParseError::new(line_no, format!("unknown directive {other:?}"))),
        }
    }
    if !ended {
        return Err(ParseError::new(last, "missing `end`"));
    }
    Rx3cInstance::new(elements.unwrap_or_default(), sets).map_err(|e| ParseError::new(last, e.to_string()))
}

pub fn write_rx3c(instance: &Rx3cInstance) -> String {
    let mut out = String::from("rx3c\nelements");
    for e in &instance.elements {
        let _ = write!(out, " {e}");
    }
    out.push('\n');
    for i in 0..instance.sets.len() {
        let [a, b, c] = instance.set_names(i);
        let _ = writeln!(out, "set {a} {b} {c}");
    }
    out.push_str("end\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triple_copies() -> Rx3cInstance {
        let b = || ["1", "2", "3"].map(String::from);
        Rx3cInstance::new(["1", "2", "3"].map(String::from).to_vec(), vec![b(), b(), b()]).unwrap()
    }

    #[test]
    fn validator_rejects_bad_occurrence() {
        let e = ["a", "b", "c", "d", "e", "f"].map(String::from).to_vec();
        let s = |x: [&str; 3]| x.map(String::from);
        let sets = vec![
            s(["a", "b", "c"]),
            s(["a", "b", "c"]),
            s(["a", "b", "c"]),
            s(["d", "e", "f"]),
            s(["d", "e", "f"]),
            s(["d", "e", "a"]),
        ];
        assert!(Rx3cInstance::new(e.clone(), sets).is_err());
        let sets = vec![s(["a", "a", "c"]); 6];
        assert!(Rx3cInstance::new(e, sets).is_err());
    }

    #[test]
    fn copies_of_one_set() {
        let x = triple_copies();
        let cover = solve_rx3c_brute(&x).unwrap().unwrap();
        assert!(x.is_exact_cover(&cover));
        let empty = Rx3cInstance::new(vec![], vec![]).unwrap();
        assert_eq!(solve_rx3c_brute(&empty).unwrap(), Some(vec![]));
    }

    #[test]
    fn reduction_tallies() {
        let x = gen_rx3c(2, 7);
        let inst = reduce_rx3c_to_3veto(&x).unwrap();
        let e = inst.election();
        assert_eq!(e.candidates().len(), 6 + 3 + 6);
        assert_eq!(e.voters().len(), 6 + 2 + 2);
        assert_eq!(inst.budget(), 2);
        let score = e.score();
        for (c, n) in score.iter() {
            let expected = match c.as_str() {
                "p" | "p1" | "p2" => 2,
                name if name.starts_with('d') => 1,
                _ => 3,
            };
            assert_eq!(n, expected, "{c}");
        }
    }

    #[test]
    fn reserved_names_rejected() {
        let b = || ["p", "q", "r"].map(String::from);
        let x = Rx3cInstance::new(["p", "q", "r"].map(String::from).to_vec(), vec![b(), b(), b()]).unwrap();
        assert!(reduce_rx3c_to_3veto(&x).is_err());
        assert!(is_reserved("d12") && !is_reserved("d") && !is_reserved("dx"));
    }

    #[test]
    fn generators() {
        let x = gen_rx3c(1, 99);
        assert!(x.sets().iter().all(|s| *s == [0, 1, 2]));
        assert_eq!(gen_rx3c(3, 5), gen_rx3c(3, 5));
        assert_ne!(gen_rx3c(3, 5), gen_rx3c(3, 6));
        assert!(solve_rx3c_brute(&gen_rx3c(4, 1)).unwrap().is_some());
        let u = gen_rx3c_unplanted(2, 3);
        assert_eq!(u.sets().len(), 6);
        assert_eq!(u, gen_rx3c_unplanted(2, 3));
        let negatives = (0..40).filter(|&s| solve_rx3c_brute(&gen_rx3c_unplanted(2, s)).unwrap().is_none()).count();
        assert!(negatives > 0);
    }

    #[test]
    fn text_round_trip() {
        let x = gen_rx3c(2, 11);
        let text = write_rx3c(&x);
        assert_eq!(parse_rx3c(&text).unwrap(), x);
        let err = parse_rx3c("rx3c\nelements a b c\nset a b\nend\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(parse_rx3c("rx3c\nelements a b c\nset a b c\n").is_err());
    }

    #[test]
    fn brute_cap() {
        let x = gen_rx3c(9, 0);
        assert!(matches!(solve_rx3c_brute(&x), Err(SolveError::CapExceeded { .. })));
    }
}
