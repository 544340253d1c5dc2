//! Weighted multigraphs and perfect b-matching problems, plus their text
//! format:
//!
//! ```text
//! graph
//! vertex a b 1
//! vertex b b 1
//! edge a b weight 5 count 2
//! end
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{GraphError, ParseError};

/// One edge of a [`Multigraph`]. `tag` is an opaque label owned by whoever
/// built the graph (solvers use it to point back at voters).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: i64,
    pub tag: Option<usize>,
}

impl Edge {
    pub fn other(&self, x: usize) -> usize {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

/// Undirected multigraph with stable edge indices. Parallel edges are
/// allowed; self-loops are not.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Multigraph {
    names: Vec<String>,
    edges: Vec<Edge>,
}

impl Multigraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, name: impl Into<String>) -> usize {
        self.names.push(name.into());
        self.names.len() - 1
    }

    pub fn add_edge(&mut self, u: usize, v: usize, weight: i64) -> Result<usize, GraphError> {
        self.add_tagged_edge(u, v, weight, None)
    }

    pub fn add_tagged_edge(
        &mut self,
        u: usize,
        v: usize,
        weight: i64,
        tag: Option<usize>,
    ) -> Result<usize, GraphError> {
        for x in [u, v] {
            if x >= self.names.len() {
                return Err(GraphError::UnknownVertex(x));
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(self.names[u].clone()));
        }
        self.edges.push(Edge { u, v, weight, tag });
        Ok(self.edges.len() - 1)
    }

    /// Adds `count` parallel copies of (u, v).
    pub fn add_parallel(&mut self, u: usize, v: usize, weight: i64, count: u64) -> Result<(), GraphError> {
        for _ in 0..count {
            self.add_edge(u, v, weight)?;
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> &Edge {
        &self.edges[i]
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn degrees(&self) -> Vec<u64> {
        let mut deg = vec![0u64; self.names.len()];
        for e in &self.edges {
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        deg
    }

    pub fn total_weight(&self) -> i64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Edge indices incident to each vertex, in edge order.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.names.len()];
        for (i, e) in self.edges.iter().enumerate() {
            inc[e.u].push(i);
            inc[e.v].push(i);
        }
        inc
    }
}

/// A name not already used in `graph` (appends primes).
pub(crate) fn fresh_name(taken: &[&str], base: &str) -> String {
    let mut name = base.to_string();
    while taken.contains(&name.as_str()) {
        name.push('\'');
    }
    name
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    Maximize,
    Minimize,
}

impl std::str::FromStr for Sense {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "max" | "maximize" => Ok(Sense::Maximize),
            "min" | "minimize" => Ok(Sense::Minimize),
            other => Err(format!("unknown sense {other:?} (expected max or min)")),
        }
    }
}

/// Find edges so each vertex `v` meets exactly `demand[v]` of them,
/// optimizing total weight in the given sense.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerfectBMatchingProblem {
    pub graph: Multigraph,
    pub demand: Vec<u64>,
    pub sense: Sense,
}

impl PerfectBMatchingProblem {
    pub fn new(graph: Multigraph, demand: Vec<u64>, sense: Sense) -> Result<Self, GraphError> {
        if demand.len() != graph.vertex_count() {
            return Err(GraphError::DemandLength { expected: graph.vertex_count(), found: demand.len() });
        }
        Ok(PerfectBMatchingProblem { graph, demand, sense })
    }

    pub fn total_demand(&self) -> u64 {
        self.demand.iter().sum()
    }
}

/// Parses the graph text format into a graph and its per-vertex `b` values.
pub fn parse_graph(text: &str) -> Result<(Multigraph, Vec<u64>), ParseError> {
    let mut graph = Multigraph::new();
    let mut demand = Vec::new();
    let mut by_name: HashMap<String, usize> = HashMap::new();
    let mut started = false;
    let mut ended = false;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if ended {
            return Err(ParseError::new(line_no, "content after `end`"));
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "graph" if !started => {
                if toks.len() != 1 {
                    return Err(ParseError::new(line_no, "`graph` takes no arguments"));
                }
                started = true;
            }
            _ if !started => return Err(ParseError::new(line_no, "expected `graph`")),
            "vertex" => {
                let [_, name, "b", b] = toks[..] else {
                    return Err(ParseError::new(line_no, "expected `vertex <name> b <int>`"));
                };
                let b: u64 = b.parse().map_err(|_| ParseError::new(line_no, format!("bad demand {b:?}")))?;
                if by_name.contains_key(name) {
                    return Err(ParseError::new(line_no, format!("duplicate vertex {name}")));
                }
                by_name.insert(name.to_string(), graph.add_vertex(name));
                demand.push(b);
            }
            "edge" => {
                let (u, v, w, count) = match toks[..] {
                    [_, u, v, "weight", w] => (u, v, w, "1"),
                    [_, u, v, "weight", w, "count", c] => (u, v, w, c),
                    _ => return Err(ParseError::new(line_no, "expected `edge <u> <v> weight <int> [count <int>]`")),
                };
                let lookup = |n: &str| {
                    by_name.get(n).copied().ok_or_else(|| ParseError::new(line_no, format!("unknown vertex {n}")))
                };
                let (u, v) = (lookup(u)?, lookup(v)?);
                let w: i64 = w.parse().map_err(|_| ParseError::new(line_no, format!("bad weight {w:?}")))?;
                let count: u64 = count.parse().map_err(|_| ParseError::new(line_no, format!("bad count {count:?}")))?;
                graph.add_parallel(u, v, w, count).map_err(|e| ParseError::new(line_no, e.to_string()))?;
            }
            "end" => ended = true,
            other => return Err(ParseError::new(line_no, format!("unknown directive {other:?}"))),
        }
    }
    if !ended {
        return Err(ParseError::new(text.lines().count().max(1), "missing `end`"));
    }
    Ok((graph, demand))
}

/// Writes the graph text format. Consecutive identical edges are merged
/// with `count`.
pub fn write_graph(graph: &Multigraph, demand: &[u64]) -> String {
    let mut out = String::from("graph\n");
    for (name, b) in graph.names().iter().zip(demand) {
        let _ = writeln!(out, "vertex {name} b {b}");
    }
    let edges = graph.edges();
    let mut i = 0;
    while i < edges.len() {
        let e = edges[i];
        let mut j = i + 1;
        while j < edges.len() && (edges[j].u, edges[j].v, edges[j].weight) == (e.u, e.v, e.weight) {
            j += 1;
        }
        let _ = write!(out, "edge {} {} weight {}", graph.name(e.u), graph.name(e.v), e.weight);
        if j - i > 1 {
            let _ = write!(out, " count {}", j - i);
        }
        out.push('\n');
        i = j;
    }
    out.push_str("end\n");
    out
}
