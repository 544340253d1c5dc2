//! Perfect b-matching on multigraphs.
//!
//! [`solve`] reduces to maximum-weight perfect matching on a simple graph by
//! Tutte's vertex gadget ([`tutte_expand`]) and runs the blossom core on it.
//! Minimization and negative weights are handled by affine rewrites of the
//! weights, which is sound because every perfect b-matching has exactly
//! `sum(b) / 2` edges.

use std::collections::HashSet;

use crate::blossom::max_weight_matching;
use crate::error::{Infeasibility, SolveError};
use crate::graph::{PerfectBMatchingProblem, Sense};

/// Default edge cap for [`brute_force_solve`].
pub const BRUTE_FORCE_EDGE_CAP: usize = 20;

const WEIGHT_LIMIT: i128 = i32::MAX as i128;

/// Simple weighted graph handed to the blossom core.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SimpleGraph {
    pub vertex_count: usize,
    pub edges: Vec<(usize, usize, i64)>,
}

/// Result of [`tutte_expand`].
#[derive(Clone, Debug)]
pub struct TutteExpansion {
    pub graph: SimpleGraph,
    /// For each simple edge, the multigraph edge it stands for (`None` for
    /// zero-weight padding edges inside a gadget).
    pub origin: Vec<Option<usize>>,
    /// Per original vertex: its external copies, one per incident edge.
    pub external: Vec<Vec<usize>>,
    /// Per original vertex: its padding vertices (`degree - b` of them).
    pub padding: Vec<Vec<usize>>,
}

/// Replaces every vertex `v` by a complete bipartite gadget between its
/// `deg(v)` external copies and `deg(v) - b(v)` padding vertices. The `i`-th
/// edge at `v` that is the `j`-th edge at `w` becomes `(v_i, w_j)` with the
/// same weight.
pub fn tutte_expand(problem: &PerfectBMatchingProblem) -> Result<TutteExpansion, Infeasibility> {
    let g = &problem.graph;
    let degrees = g.degrees();
    for (v, (&deg, &b)) in degrees.iter().zip(&problem.demand).enumerate() {
        if deg < b {
            return Err(Infeasibility::DegreeBelowDemand { vertex: g.name(v).to_string(), degree: deg, demand: b });
        }
    }

    let mut next = 0usize;
    let mut external = Vec::with_capacity(g.vertex_count());
    let mut padding = Vec::with_capacity(g.vertex_count());
    for (&deg, &b) in degrees.iter().zip(&problem.demand) {
        let ext: Vec<usize> = (next..next + deg as usize).collect();
        next += deg as usize;
        let pad: Vec<usize> = (next..next + (deg - b) as usize).collect();
        next += (deg - b) as usize;
        external.push(ext);
        padding.push(pad);
    }

    let mut edges = Vec::new();
    let mut origin = Vec::new();
    let mut seen = vec![0usize; g.vertex_count()];
    for (i, e) in g.edges().iter().enumerate() {
        let a = external[e.u][seen[e.u]];
        let b = external[e.v][seen[e.v]];
        seen[e.u] += 1;
        seen[e.v] += 1;
        edges.push((a, b, e.weight));
        origin.push(Some(i));
    }
    for (ext, pad) in external.iter().zip(&padding) {
        for &x in ext {
            for &p in pad {
                edges.push((x, p, 0));
                origin.push(None);
            }
        }
    }
    Ok(TutteExpansion { graph: SimpleGraph { vertex_count: next, edges }, origin, external, padding })
}

/// A perfect matching of a [`SimpleGraph`], as edge indices into it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerfectMatching {
    pub edges: Vec<usize>,
    pub weight: i64,
}

/// Maximum-weight perfect matching on a simple graph.
pub fn max_weight_perfect_matching(graph: &SimpleGraph) -> Result<PerfectMatching, SolveError> {
    if graph.vertex_count % 2 == 1 {
        return Err(Infeasibility::NoPerfectMatching.into());
    }
    if graph.vertex_count == 0 {
        return Ok(PerfectMatching { edges: Vec::new(), weight: 0 });
    }
    let mut pairs = HashSet::with_capacity(graph.edges.len());
    for &(a, b, _) in &graph.edges {
        if a == b || a >= graph.vertex_count || b >= graph.vertex_count {
            return Err(SolveError::Precondition(format!("bad edge ({a}, {b})")));
        }
        if !pairs.insert((a.min(b), a.max(b))) {
            return Err(SolveError::Precondition(format!("parallel edge ({a}, {b})")));
        }
    }
    let min = graph.edges.iter().map(|e| e.2).min().unwrap_or(0).min(0);
    let max = graph.edges.iter().map(|e| e.2).max().unwrap_or(0);
    if (max as i128) - (min as i128) > WEIGHT_LIMIT {
        return Err(SolveError::WeightOverflow((max as i128) - (min as i128)));
    }
    let shifted: Vec<(usize, usize, i64)> = graph.edges.iter().map(|&(a, b, w)| (a, b, w - min)).collect();
    let mate = max_weight_matching(graph.vertex_count, &shifted, true);
    if mate.iter().any(Option::is_none) {
        return Err(Infeasibility::NoPerfectMatching.into());
    }
    let mut edges: Vec<usize> = mate.into_iter().flatten().collect();
    edges.sort_unstable();
    edges.dedup();
    let weight = edges.iter().map(|&k| graph.edges[k].2).sum();
    Ok(PerfectMatching { edges, weight })
}

/// An optimal perfect b-matching: sorted edge indices of the multigraph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchingSolution {
    pub selected: Vec<usize>,
    pub total_weight: i64,
}

fn check_parity(problem: &PerfectBMatchingProblem) -> Result<(), Infeasibility> {
    let total = problem.total_demand();
    if total % 2 == 1 {
        return Err(Infeasibility::OddDemand(total));
    }
    Ok(())
}

/// Solves the problem exactly through the Tutte expansion.
pub fn solve(problem: &PerfectBMatchingProblem) -> Result<MatchingSolution, SolveError> {
    check_parity(problem)?;
    let g = &problem.graph;

    // Edges at a vertex with b = 0 can never be selected; dropping them
    // shrinks the gadgets without changing the optimum.
    let keep: Vec<usize> = (0..g.edge_count())
        .filter(|&i| {
            let e = g.edge(i);
            problem.demand[e.u] > 0 && problem.demand[e.v] > 0
        })
        .collect();
    let mut reduced = crate::graph::Multigraph::new();
    for name in g.names() {
        reduced.add_vertex(name.clone());
    }
    let (lo, hi) =
        keep.iter().map(|&i| g.edge(i).weight).fold((i64::MAX, i64::MIN), |(lo, hi), w| (lo.min(w), hi.max(w)));
    if !keep.is_empty() && (hi as i128) - (lo as i128) > WEIGHT_LIMIT {
        return Err(SolveError::WeightOverflow((hi as i128) - (lo as i128)));
    }
    for &i in &keep {
        let e = g.edge(i);
        // Maximize w, or maximize (hi - w) to minimize w; shifting by `lo`
        // keeps everything nonnegative.
        let w = match problem.sense {
            Sense::Maximize => e.weight - lo,
            Sense::Minimize => hi - e.weight,
        };
        reduced.add_tagged_edge(e.u, e.v, w, Some(i)).expect("edge copied from a valid graph");
    }
    let reduced_problem =
        PerfectBMatchingProblem { graph: reduced, demand: problem.demand.clone(), sense: Sense::Maximize };
    let expansion = tutte_expand(&reduced_problem)?;
    let matching = max_weight_perfect_matching(&expansion.graph)?;
    let mut selected: Vec<usize> =
        matching.edges.iter().filter_map(|&k| expansion.origin[k]).map(|r| keep[r]).collect();
    selected.sort_unstable();
    let total_weight = selected.iter().map(|&i| g.edge(i).weight).sum();
    debug_assert_eq!(selected.len() as u64 * 2, problem.total_demand());
    Ok(MatchingSolution { selected, total_weight })
}

/// Exhaustive search over edge subsets; the independent oracle for [`solve`].
pub fn brute_force_solve(problem: &PerfectBMatchingProblem, cap: usize) -> Result<MatchingSolution, SolveError> {
    let m = problem.graph.edge_count();
    if m > cap {
        return Err(SolveError::CapExceeded { what: "edge set", cap, actual: m });
    }
    check_parity(problem)?;

    struct Search<'a> {
        problem: &'a PerfectBMatchingProblem,
        residual: Vec<u64>,
        chosen: Vec<usize>,
        best: Option<(i64, Vec<usize>)>,
    }
    impl Search<'_> {
        fn go(&mut self, i: usize, weight: i64) {
            let edges = self.problem.graph.edges();
            if i == edges.len() {
                if self.residual.iter().all(|&r| r == 0) {
                    let better = match (&self.best, self.problem.sense) {
                        (None, _) => true,
                        (Some((b, _)), Sense::Maximize) => weight > *b,
                        (Some((b, _)), Sense::Minimize) => weight < *b,
                    };
                    if better {
                        self.best = Some((weight, self.chosen.clone()));
                    }
                }
                return;
            }
            let e = edges[i];
            if self.residual[e.u] > 0 && self.residual[e.v] > 0 {
                self.residual[e.u] -= 1;
                self.residual[e.v] -= 1;
                self.chosen.push(i);
                self.go(i + 1, weight + e.weight);
                self.chosen.pop();
                self.residual[e.u] += 1;
                self.residual[e.v] += 1;
            }
            self.go(i + 1, weight);
        }
    }

    let mut search = Search { problem, residual: problem.demand.clone(), chosen: Vec::new(), best: None };
    search.go(0, 0);
    match search.best {
        Some((total_weight, selected)) => Ok(MatchingSolution { selected, total_weight }),
        None => Err(Infeasibility::NoPerfectMatching.into()),
    }
}

/// Why a proposed matching is not a perfect b-matching.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    UnknownEdge(usize),
    RepeatedEdge(usize),
    Demand { vertex: String, expected: u64, actual: u64 },
    Weight { claimed: i64, actual: i64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::UnknownEdge(i) => write!(f, "edge {i} does not exist"),
            Violation::RepeatedEdge(i) => write!(f, "edge {i} selected twice"),
            Violation::Demand { vertex, expected, actual } => {
                write!(f, "vertex {vertex} meets {actual} selected edges, needs {expected}")
            }
            Violation::Weight { claimed, actual } => {
                write!(f, "claimed weight {claimed}, recomputed {actual}")
            }
        }
    }
}

/// Counts selected edges at every vertex and recomputes the total weight.
/// Returns the weight when the selection is a perfect b-matching.
pub fn verify_selection(problem: &PerfectBMatchingProblem, selected: &[usize]) -> Result<i64, Violation> {
    let g = &problem.graph;
    let mut used = vec![false; g.edge_count()];
    let mut count = vec![0u64; g.vertex_count()];
    let mut weight = 0i64;
    for &i in selected {
        if i >= g.edge_count() {
            return Err(Violation::UnknownEdge(i));
        }
        if std::mem::replace(&mut used[i], true) {
            return Err(Violation::RepeatedEdge(i));
        }
        let e = g.edge(i);
        count[e.u] += 1;
        count[e.v] += 1;
        weight += e.weight;
    }
    for (v, (&c, &b)) in count.iter().zip(&problem.demand).enumerate() {
        if c != b {
            return Err(Violation::Demand { vertex: g.name(v).to_string(), expected: b, actual: c });
        }
    }
    Ok(weight)
}

pub fn verify(problem: &PerfectBMatchingProblem, solution: &MatchingSolution) -> Result<i64, Violation> {
    let weight = verify_selection(problem, &solution.selected)?;
    if weight != solution.total_weight {
        return Err(Violation::Weight { claimed: solution.total_weight, actual: weight });
    }
    Ok(weight)
}
