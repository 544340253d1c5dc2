//! Minimum-weight b-edge cover, and the counterexample graph that shows a
//! published NMTS reduction to it is unsound.

use rayon::prelude::*;

use crate::error::{Infeasibility, SolveError};
use crate::graph::{fresh_name, Multigraph, PerfectBMatchingProblem, Sense};
use crate::matching;

pub const NMTS_CAP: usize = 8;

/// Pick edges so every vertex `v` meets at least `b[v]` of them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BEdgeCoverProblem {
    pub graph: Multigraph,
    pub b: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CoverViolation {
    #[error("edge index {0} out of range")]
    UnknownEdge(usize),
    #[error("edge {0} listed twice")]
    RepeatedEdge(usize),
    #[error("vertex {vertex} is covered {got} times, needs {needed}")]
    Uncovered { vertex: String, needed: u64, got: u64 },
}

/// Checks the cover and returns its weight.
pub fn verify_b_edge_cover(problem: &BEdgeCoverProblem, edges: &[usize]) -> Result<i64, CoverViolation> {
    let g = &problem.graph;
    let mut used = vec![false; g.edge_count()];
    let mut deg = vec![0u64; g.vertex_count()];
    let mut weight = 0;
    for &i in edges {
        if i >= g.edge_count() {
            return Err(CoverViolation::UnknownEdge(i));
        }
        if std::mem::replace(&mut used[i], true) {
            return Err(CoverViolation::RepeatedEdge(i));
        }
        let e = g.edge(i);
        deg[e.u] += 1;
        deg[e.v] += 1;
        weight += e.weight;
    }
    for (v, (&got, &needed)) in deg.iter().zip(&problem.b).enumerate() {
        if got < needed {
            return Err(CoverViolation::Uncovered { vertex: g.name(v).to_string(), needed, got });
        }
    }
    Ok(weight)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cover {
    pub edges: Vec<usize>,
    pub weight: i64,
}

/// Exact minimum-weight b-edge cover.
///
/// The edges left out form a subgraph with degree at most deg(v) − b(v)
/// everywhere, so we find the heaviest such subgraph instead. Unused
/// capacity drains into a slack vertex z; z′ absorbs z's leftover and its
/// demand fixes how many real edges the subgraph has, so we try each.
pub fn min_weight_b_edge_cover(problem: &BEdgeCoverProblem) -> Result<Cover, SolveError> {
    let g = &problem.graph;
    let deg = g.degrees();
    let mut cap = Vec::with_capacity(deg.len());
    for (v, (&d, &b)) in deg.iter().zip(&problem.b).enumerate() {
        if d < b {
            return Err(Infeasibility::DegreeBelowDemand { vertex: g.name(v).to_string(), degree: d, demand: b }.into());
        }
        cap.push(d - b);
    }
    let total_cap: u64 = cap.iter().sum();

    let mut h = g.clone();
    let taken: Vec<&str> = g.names().iter().map(String::as_str).collect();
    let z = h.add_vertex(fresh_name(&taken, "z"));
    let z2 = h.add_vertex(fresh_name(&taken, "z'"));
    for (v, &c) in cap.iter().enumerate() {
        h.add_parallel(v, z, 0, c).expect("valid vertices");
    }
    h.add_parallel(z, z2, 0, total_cap).expect("valid vertices");
    let real = g.edge_count();

    let best = (0..=total_cap / 2)
        .into_par_iter()
        .map(|f| {
            let mut demand = cap.clone();
            demand.push(total_cap);
            demand.push(2 * f);
            let sub = PerfectBMatchingProblem::new(h.clone(), demand, Sense::Maximize).expect("demand per vertex");
            match matching::solve(&sub) {
                Ok(s) => Ok(Some(s)),
                Err(e) if e.is_infeasible() => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .max_by_key(|s| s.total_weight)
        .expect("the empty complement is always feasible");

    let mut dropped = vec![false; real];
    for &i in best.selected.iter().filter(|&&i| i < real) {
        dropped[i] = true;
    }
    let edges: Vec<usize> = (0..real).filter(|&i| !dropped[i]).collect();
    let weight = g.total_weight() - best.total_weight;
    debug_assert_eq!(edges.iter().map(|&i| g.edge(i).weight).sum::<i64>(), weight);
    Ok(Cover { edges, weight })
}

/// Three sets of n positive integers, all 3n distinct. Yes when A and B
/// can be paired off so the pair sums are exactly C.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NmtsInstance {
    pub a: Vec<u64>,
    pub b: Vec<u64>,
    pub c: Vec<u64>,
}

impl NmtsInstance {
    pub fn new(a: Vec<u64>, b: Vec<u64>, c: Vec<u64>) -> Result<Self, String> {
        let n = a.len();
        if b.len() != n || c.len() != n {
            return Err(format!("set sizes {}, {}, {} differ", n, b.len(), c.len()));
        }
        let mut all: Vec<u64> = a.iter().chain(&b).chain(&c).copied().collect();
        if all.contains(&0) {
            return Err("values must be positive".into());
        }
        all.sort_unstable();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err("values must be distinct".into());
        }
        Ok(NmtsInstance { a, b, c })
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    /// Triples (a, b, c) with a + b = c.
    pub fn sum_triples(&self) -> usize {
        let mut count = 0;
        for &x in &self.a {
            for &y in &self.b {
                count += self.c.iter().filter(|&&z| x + y == z).count();
            }
        }
        count
    }

    /// The cover weight the reduction promises exactly for yes instances.
    pub fn cover_threshold(&self) -> i64 {
        let n = self.n() as i64;
        let t = self.sum_triples() as i64;
        8 * n + 6 * (t - n) + 2 * n * (n - 1) * n.pow(4)
    }
}

/// (a, b, a + b).
pub type Triple = (u64, u64, u64);

/// Tries every pairing of A with B.
pub fn solve_nmts_brute(instance: &NmtsInstance) -> Result<Option<Vec<Triple>>, SolveError> {
    let n = instance.n();
    if n > NMTS_CAP {
        return Err(SolveError::CapExceeded { what: "NMTS set size", cap: NMTS_CAP, actual: n });
    }
    let mut target = instance.c.clone();
    target.sort_unstable();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        let mut sums: Vec<u64> = (0..n).map(|i| instance.a[i] + instance.b[perm[i]]).collect();
        sums.sort_unstable();
        if sums == target {
            return Ok(Some(
                (0..n).map(|i| (instance.a[i], instance.b[perm[i]], instance.a[i] + instance.b[perm[i]])).collect(),
            ));
        }
        if !next_permutation(&mut perm) {
            return Ok(None);
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else { return false };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("successor exists");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub problem: BEdgeCoverProblem,
    pub published_cover: Vec<usize>,
    pub nmts: NmtsInstance,
    pub threshold: i64,
}

/// The reduction's graph for A = {3, 4}, B = {5, 6}, C = {8, 9}, with the
/// cover from the refutation.
pub fn build_bt_counterexample() -> Counterexample {
    let nmts = NmtsInstance::new(vec![3, 4], vec![5, 6], vec![8, 9]).expect("distinct");
    let n = nmts.n() as i64;
    let heavy = n.pow(4);
    let mut g = Multigraph::new();
    let mut b = Vec::new();
    let mut vertex = |g: &mut Multigraph, name: &str, demand: u64| {
        b.push(demand);
        g.add_vertex(name)
    };
    let row1 = vertex(&mut g, "row1", 1);
    let row2 = vertex(&mut g, "row2", 1);
    let col1 = vertex(&mut g, "col1", 1);
    let col2 = vertex(&mut g, "col2", 1);
    let v35 = vertex(&mut g, "v35", 2);
    let v36 = vertex(&mut g, "v36", 2);
    let v45 = vertex(&mut g, "v45", 2);
    let v46 = vertex(&mut g, "v46", 2);
    let t81 = vertex(&mut g, "v8_1", 1);
    let t82 = vertex(&mut g, "v8_2", 1);
    let t91 = vertex(&mut g, "v9_1", 1);
    let t92 = vertex(&mut g, "v9_2", 1);

    let mut cover = Vec::new();
    let cycle = [row1, v36, col2, v46, row2, v45, col1, v35, row1];
    for w in cycle.windows(2) {
        let e = g.add_edge(w[0], w[1], heavy).expect("distinct");
        if [(row1, v36), (col2, v46), (v46, row2), (v45, col1)].contains(&(w[0], w[1])) {
            cover.push(e);
        }
    }

    // Gadget edges by label: "s3" is (star, 3), "34" is (3, 4), "v1" is
    // (set vertex, 1), "t6" and "t5" join 6 and 5 to the targets.
    let gadgets: [(&str, usize, usize, usize, &[&str]); 3] = [
        ("g35", v35, t81, t82, &["s3", "s4", "s7", "s8", "v1", "v2", "t6", "t5"]),
        ("g36", v36, t91, t92, &["v1", "s2", "s7", "s8", "s5", "34", "t6"]),
        ("g45", v45, t91, t92, &["v1", "s2", "s7", "s8", "s6", "34", "t5"]),
    ];
    for (prefix, set_vertex, target6, target5, chosen) in gadgets {
        let star = vertex(&mut g, &format!("{prefix}.star"), 4);
        let num: Vec<usize> = (1..=8).map(|i| vertex(&mut g, &format!("{prefix}.{i}"), 1)).collect();
        let mut labelled = Vec::new();
        for i in 1..=8 {
            labelled.push((format!("s{i}"), g.add_edge(star, num[i - 1], 1).expect("distinct")));
        }
        labelled.push(("34".into(), g.add_edge(num[2], num[3], 1).expect("distinct")));
        labelled.push(("78".into(), g.add_edge(num[6], num[7], 1).expect("distinct")));
        labelled.push(("v1".into(), g.add_edge(set_vertex, num[0], 1).expect("distinct")));
        labelled.push(("v2".into(), g.add_edge(set_vertex, num[1], 1).expect("distinct")));
        labelled.push(("t6".into(), g.add_edge(num[5], target6, 1).expect("distinct")));
        labelled.push(("t5".into(), g.add_edge(num[4], target5, 1).expect("distinct")));
        for label in chosen {
            cover.push(labelled.iter().find(|(l, _)| l == label).expect("known label").1);
        }
    }
    cover.sort_unstable();
    let threshold = nmts.cover_threshold();
    Counterexample { problem: BEdgeCoverProblem { graph: g, b }, published_cover: cover, nmts, threshold }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Exhaustive cover search over edge subsets.
    fn brute_cover(problem: &BEdgeCoverProblem) -> Option<i64> {
        let m = problem.graph.edge_count();
        (0u32..1 << m)
            .filter_map(|mask| {
                let edges: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
                verify_b_edge_cover(problem, &edges).ok()
            })
            .min()
    }

    #[test]
    fn single_edge_is_forced() {
        let mut g = Multigraph::new();
        let a = g.add_vertex("a");
        let b = g.add_vertex("b");
        g.add_edge(a, b, 4).unwrap();
        let p = BEdgeCoverProblem { graph: g, b: vec![1, 1] };
        assert_eq!(min_weight_b_edge_cover(&p).unwrap(), Cover { edges: vec![0], weight: 4 });
        let empty = BEdgeCoverProblem { graph: p.graph.clone(), b: vec![0, 0] };
        assert_eq!(verify_b_edge_cover(&empty, &[]), Ok(0));
        assert_eq!(min_weight_b_edge_cover(&empty).unwrap().weight, 0);
        let short = BEdgeCoverProblem { graph: p.graph, b: vec![2, 0] };
        assert!(min_weight_b_edge_cover(&short).unwrap_err().is_infeasible());
    }

    #[test]
    fn negative_edges_are_taken_anyway() {
        let mut g = Multigraph::new();
        let a = g.add_vertex("a");
        let b = g.add_vertex("b");
        g.add_edge(a, b, -3).unwrap();
        g.add_edge(a, b, 2).unwrap();
        let p = BEdgeCoverProblem { graph: g, b: vec![0, 0] };
        assert_eq!(min_weight_b_edge_cover(&p).unwrap(), Cover { edges: vec![0], weight: -3 });
    }

    #[test]
    fn counterexample_shape_and_cover() {
        let cx = build_bt_counterexample();
        assert_eq!(cx.problem.graph.vertex_count(), 39);
        assert_eq!(cx.problem.graph.edge_count(), 50);
        assert_eq!(cx.published_cover.len(), 26);
        assert_eq!(cx.nmts.sum_triples(), 3);
        assert_eq!(cx.threshold, 86);
        assert_eq!(verify_b_edge_cover(&cx.problem, &cx.published_cover), Ok(86));
        assert_eq!(solve_nmts_brute(&cx.nmts).unwrap(), None);
    }

    #[test]
    fn counterexample_optimum_is_at_most_published() {
        let cx = build_bt_counterexample();
        let best = min_weight_b_edge_cover(&cx.problem).unwrap();
        assert!(best.weight <= 86);
        assert_eq!(verify_b_edge_cover(&cx.problem, &best.edges), Ok(best.weight));
    }

    #[test]
    fn dropping_a_cover_edge_uncovers() {
        let cx = build_bt_counterexample();
        let mut c = cx.published_cover.clone();
        let last = c.pop().unwrap();
        let e = cx.problem.graph.edge(last);
        match verify_b_edge_cover(&cx.problem, &c) {
            Err(CoverViolation::Uncovered { vertex, .. }) => {
                assert!(vertex == cx.problem.graph.name(e.u) || vertex == cx.problem.graph.name(e.v))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nmts_examples() {
        let yes = |a, b, c| solve_nmts_brute(&NmtsInstance::new(a, b, c).unwrap()).unwrap();
        assert_eq!(yes(vec![1], vec![2], vec![3]), Some(vec![(1, 2, 3)]));
        assert_eq!(yes(vec![3, 4], vec![5, 6], vec![8, 10]), Some(vec![(3, 5, 8), (4, 6, 10)]));
        assert!(NmtsInstance::new(vec![1, 2], vec![2, 3], vec![4, 5]).is_err());
        let big = NmtsInstance::new((1..=9).collect(), (10..=18).collect(), (19..=27).collect()).unwrap();
        assert!(solve_nmts_brute(&big).is_err());
    }

    fn arb_cover() -> impl Strategy<Value = BEdgeCoverProblem> {
        (2usize..=7).prop_flat_map(|n| {
            let edges = proptest::collection::vec((0..n, 0..n, -4i64..9), 0..=12);
            let b = proptest::collection::vec(0u64..=2, n);
            (Just(n), edges, b).prop_map(|(n, edges, b)| {
                let mut g = Multigraph::new();
                for i in 0..n {
                    g.add_vertex(format!("v{i}"));
                }
                for (u, v, w) in edges {
                    if u != v {
                        g.add_edge(u, v, w).unwrap();
                    }
                }
                BEdgeCoverProblem { graph: g, b }
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn cover_matches_exhaustive_search(p in arb_cover()) {
            match (min_weight_b_edge_cover(&p), brute_cover(&p)) {
                (Ok(c), Some(w)) => {
                    prop_assert_eq!(c.weight, w);
                    prop_assert_eq!(verify_b_edge_cover(&p, &c.edges), Ok(w));
                }
                (Err(e), None) => prop_assert!(e.is_infeasible()),
                (got, want) => prop_assert!(false, "solver {:?}, search {:?}", got, want),
            }
        }
    }
}
