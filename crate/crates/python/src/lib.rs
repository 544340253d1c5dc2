//! Python bindings: parse and generate problem files, run the solvers and
//! oracles, solve b-matching graphs, and run the cover audit.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use matchvote::approval::verify_replacement;
use matchvote::attack::{verify_bribery, AttackDecision, Certificate, VoterRef, Witness};
use matchvote::cover::{build_bt_counterexample, min_weight_b_edge_cover, solve_nmts_brute, verify_b_edge_cover};
use matchvote::error::SolveError;
use matchvote::gen::{gen_problem, GenParams};
use matchvote::graph::{parse_graph, PerfectBMatchingProblem, Sense};
use matchvote::oracles::OracleCaps;
use matchvote::problem::{self, parse_rule, Instance, ProblemFile, ProblemKind};
use matchvote::rx3c;

create_exception!(matchvote, CapExceeded, PyException, "An exhaustive search was asked to go past its size cap.");
create_exception!(matchvote, SolverError, PyException, "A solver could not handle the instance.");

fn solve_err(e: SolveError) -> PyErr {
    match e {
        SolveError::CapExceeded { .. } | SolveError::WeightOverflow(_) => CapExceeded::new_err(e.to_string()),
        _ => SolverError::new_err(e.to_string()),
    }
}

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn kind_from_str(s: &str) -> PyResult<ProblemKind> {
    match s {
        "ccrv" => Ok(ProblemKind::Ccrv),
        "priced-ccrv" => Ok(ProblemKind::PricedCcrv),
        "bribery" => Ok(ProblemKind::Bribery),
        other => Err(PyValueError::new_err(format!("unknown problem kind {other:?}"))),
    }
}

/// A parsed problem file.
#[pyclass(name = "Problem", module = "matchvote", frozen)]
struct PyProblem {
    inner: ProblemFile,
}

#[pymethods]
impl PyProblem {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        problem::parse_problem(text).map(|inner| PyProblem { inner }).map_err(value_err)
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind.as_str()
    }

    #[getter]
    fn rule(&self) -> String {
        self.inner.election().rule().to_string()
    }

    #[getter]
    fn preferred(&self) -> String {
        self.inner.preferred().to_string()
    }

    #[getter]
    fn limit(&self) -> u64 {
        self.inner.limit()
    }

    #[getter]
    fn candidates(&self) -> Vec<String> {
        self.inner.election().candidates().iter().map(|c| c.to_string()).collect()
    }

    #[getter]
    fn voter_count(&self) -> usize {
        self.inner.election().voters().len()
    }

    /// Scores of the current election, by candidate.
    fn scores(&self) -> Vec<(String, u64)> {
        self.inner.election().score().iter().map(|(c, s)| (c.to_string(), s)).collect()
    }

    fn solve(&self) -> PyResult<PyDecision> {
        problem::solve_problem(&self.inner).map(PyDecision::from).map_err(solve_err)
    }

    #[pyo3(signature = (max_voters = None))]
    fn oracle(&self, max_voters: Option<usize>) -> PyResult<PyDecision> {
        let mut caps = OracleCaps::default();
        if let Some(v) = max_voters {
            caps.bribery_voters = v;
        }
        problem::oracle_problem_capped(&self.inner, caps).map(PyDecision::from).map_err(solve_err)
    }

    /// Re-scores a decision's plan on this problem. False for a no.
    fn check(&self, decision: &PyDecision) -> bool {
        match (&self.inner.instance, &decision.inner.witness) {
            (Instance::Ccrv(inst), Some(Witness::Replacement(plan))) => verify_replacement(inst, plan).is_ok(),
            (Instance::Bribery(inst), Some(Witness::Bribery(plan))) => verify_bribery(inst, plan).is_ok(),
            _ => false,
        }
    }

    fn to_text(&self) -> String {
        self.inner.to_string()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("<Problem {} {} {}>", self.inner.name, self.inner.kind.as_str(), self.rule())
    }
}

/// Answer of a solver or oracle.
#[pyclass(name = "Decision", module = "matchvote", frozen)]
struct PyDecision {
    inner: AttackDecision,
}

impl From<AttackDecision> for PyDecision {
    fn from(inner: AttackDecision) -> Self {
        PyDecision { inner }
    }
}

#[pymethods]
impl PyDecision {
    #[getter]
    fn success(&self) -> bool {
        self.inner.success
    }

    #[getter]
    fn objective(&self) -> Option<u64> {
        self.inner.objective
    }

    /// `("replace", "v2", "w1")` or `("bribe", "v3", "veto a b")` per step.
    #[getter]
    fn plan(&self) -> Vec<(&'static str, String, String)> {
        match &self.inner.witness {
            Some(Witness::Replacement(p)) => p
                .removed
                .iter()
                .zip(&p.added)
                .map(|(&r, &a)| ("replace", VoterRef::Registered(r).to_string(), VoterRef::Unregistered(a).to_string()))
                .collect(),
            Some(Witness::Bribery(p)) => p
                .bribes
                .iter()
                .map(|b| ("bribe", VoterRef::Registered(b.voter).to_string(), b.vote.to_string()))
                .collect(),
            None => Vec::new(),
        }
    }

    #[getter]
    fn certificate(&self) -> Option<String> {
        self.inner.certificate.as_ref().map(|c| match c {
            Certificate::Trivial => "trivial".to_string(),
            Certificate::Control { fs_p, matching_weight } => format!("control fs_p {fs_p} weight {matching_weight}"),
            Certificate::Veto { lp, lp_other, fv_p, matching_weight } => {
                format!("veto lp {lp} lp_other {lp_other} fv_p {fv_p} weight {matching_weight}")
            }
            Certificate::Search => "search".to_string(),
        })
    }

    fn __bool__(&self) -> bool {
        self.inner.success
    }

    fn __repr__(&self) -> String {
        match self.inner.objective {
            Some(o) => format!("<Decision yes objective {o}>"),
            None => "<Decision no>".to_string(),
        }
    }
}

#[pyfunction]
fn parse_problem(text: &str) -> PyResult<PyProblem> {
    PyProblem::parse(text)
}

#[pyfunction]
#[pyo3(signature = (*, seed, voters, candidates, rule, problem, unregistered = None, min_price = 0, max_price = 3, limit = 2))]
#[allow(clippy::too_many_arguments)]
fn gen_election(
    seed: u64,
    voters: usize,
    candidates: usize,
    rule: &str,
    problem: &str,
    unregistered: Option<usize>,
    min_price: u64,
    max_price: u64,
    limit: u64,
) -> PyResult<PyProblem> {
    let rule = parse_rule(rule).map_err(PyValueError::new_err)?;
    if candidates == 0 || rule.k > candidates {
        return Err(PyValueError::new_err(format!("rule {rule} needs at least {} candidates", rule.k.max(1))));
    }
    let params = GenParams {
        kind: kind_from_str(problem)?,
        rule,
        candidates,
        voters,
        unregistered: unregistered.unwrap_or(voters),
        min_price,
        max_price,
        limit,
    };
    Ok(PyProblem { inner: gen_problem(&params, seed) })
}

type MatchedEdges = Vec<(String, String, i64)>;

/// Optimal perfect b-matching of a graph in text form. Returns
/// `(weight, [(u, v, weight), ...])`, or None when no perfect b-matching exists.
#[pyfunction]
#[pyo3(signature = (text, sense = "max"))]
fn solve_matching(text: &str, sense: &str) -> PyResult<Option<(i64, MatchedEdges)>> {
    let sense = match sense {
        "max" => Sense::Maximize,
        "min" => Sense::Minimize,
        other => return Err(PyValueError::new_err(format!("sense must be max or min, got {other:?}"))),
    };
    let (graph, demand) = parse_graph(text).map_err(value_err)?;
    let problem = PerfectBMatchingProblem::new(graph, demand, sense).map_err(value_err)?;
    match matchvote::matching::solve(&problem) {
        Ok(sol) => {
            let g = &problem.graph;
            let edges = sol
                .selected
                .iter()
                .map(|&i| {
                    let e = g.edge(i);
                    (g.name(e.u).to_string(), g.name(e.v).to_string(), e.weight)
                })
                .collect();
            Ok(Some((sol.total_weight, edges)))
        }
        Err(SolveError::Infeasible(_)) => Ok(None),
        Err(e) => Err(solve_err(e)),
    }
}

#[pyfunction]
#[pyo3(signature = (k, seed, unplanted = false))]
fn gen_rx3c(k: usize, seed: u64, unplanted: bool) -> PyResult<String> {
    if k == 0 {
        return Err(PyValueError::new_err("k must be positive"));
    }
    let inst = if unplanted { rx3c::gen_rx3c_unplanted(k, seed) } else { rx3c::gen_rx3c(k, seed) };
    Ok(rx3c::write_rx3c(&inst))
}

/// Indices of an exact cover, or None.
#[pyfunction]
fn solve_rx3c(text: &str) -> PyResult<Option<Vec<usize>>> {
    let inst = rx3c::parse_rx3c(text).map_err(value_err)?;
    rx3c::solve_rx3c_brute(&inst).map_err(solve_err)
}

#[pyfunction]
fn reduce_rx3c(text: &str) -> PyResult<PyProblem> {
    let inst = rx3c::parse_rx3c(text).map_err(value_err)?;
    let bribery = rx3c::reduce_rx3c_to_3veto(&inst).map_err(value_err)?;
    let inner = ProblemFile { name: "rx3c".into(), kind: ProblemKind::Bribery, instance: Instance::Bribery(bribery) };
    Ok(PyProblem { inner })
}

/// The published cover's weight, the threshold, the NMTS answer and
/// (when asked) the true optimum.
#[pyfunction]
#[pyo3(signature = (optimum = false))]
fn audit_counterexample<'py>(py: Python<'py>, optimum: bool) -> PyResult<Bound<'py, PyDict>> {
    let cx = build_bt_counterexample();
    let weight =
        verify_b_edge_cover(&cx.problem, &cx.published_cover).map_err(|v| SolverError::new_err(v.to_string()))?;
    let nmts = solve_nmts_brute(&cx.nmts).map_err(solve_err)?;
    let out = PyDict::new(py);
    out.set_item("cover_weight", weight)?;
    out.set_item("threshold", cx.threshold)?;
    out.set_item("nmts", nmts.is_some())?;
    if optimum {
        out.set_item("optimum", min_weight_b_edge_cover(&cx.problem).map_err(solve_err)?.weight)?;
    }
    out.set_item("refuted", nmts.is_none() && weight <= cx.threshold)?;
    Ok(out)
}

#[pymodule(name = "matchvote")]
fn matchvote_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_class::<PyDecision>()?;
    m.add_function(wrap_pyfunction!(parse_problem, m)?)?;
    m.add_function(wrap_pyfunction!(gen_election, m)?)?;
    m.add_function(wrap_pyfunction!(solve_matching, m)?)?;
    m.add_function(wrap_pyfunction!(gen_rx3c, m)?)?;
    m.add_function(wrap_pyfunction!(solve_rx3c, m)?)?;
    m.add_function(wrap_pyfunction!(reduce_rx3c, m)?)?;
    m.add_function(wrap_pyfunction!(audit_counterexample, m)?)?;
    m.add("CapExceeded", m.py().get_type::<CapExceeded>())?;
    m.add("SolverError", m.py().get_type::<SolverError>())?;
    Ok(())
}
