//! The `matchvote` command line. [`run`] is the whole program minus process
//! exit, so tests can drive it directly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use matchvote::approval::verify_replacement;
use matchvote::attack::{verify_bribery, AttackDecision, VoterRef, Witness};
use matchvote::cover::{build_bt_counterexample, min_weight_b_edge_cover, solve_nmts_brute, verify_b_edge_cover};
use matchvote::election::Rule;
use matchvote::error::SolveError;
use matchvote::gen::{gen_problem, GenParams};
use matchvote::graph::{parse_graph, PerfectBMatchingProblem, Sense};
use matchvote::matching;
use matchvote::oracles::OracleCaps;
use matchvote::problem::{
    oracle_problem_capped, parse_problem, parse_rule, solve_problem, Instance, ProblemFile, ProblemKind,
};
use matchvote::rx3c::{gen_rx3c, gen_rx3c_unplanted, parse_rx3c, reduce_rx3c_to_3veto};

pub const EXIT_DECIDED: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_CAP: u8 = 2;
/// Solver and oracle disagree, or a witness failed its check.
pub const EXIT_MISMATCH: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "matchvote", version, about = "Election control and bribery through b-matching")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide a problem file with the polynomial solver.
    Solve {
        file: PathBuf,
        /// Print the replacement or bribery plan.
        #[arg(long)]
        witness: bool,
        /// Re-score the plan on the election alone.
        #[arg(long)]
        check: bool,
    },
    /// Decide a problem file by exhaustive search.
    Oracle {
        file: PathBuf,
        #[arg(long)]
        witness: bool,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Run solver and oracle and compare decisions.
    Compare {
        file: PathBuf,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Optimal perfect b-matching of a graph file.
    Match {
        file: PathBuf,
        #[arg(long, value_enum)]
        sense: SenseArg,
        /// Answer yes when the optimum reaches this weight (at least for max, at most for min).
        #[arg(long, allow_hyphen_values = true)]
        threshold: i64,
    },
    #[command(subcommand)]
    Gen(GenCommand),
    #[command(subcommand)]
    Reduce(ReduceCommand),
    /// Check the published b-edge cover against the NMTS instance it came from.
    AuditCounterexample {
        /// Also compute the true minimum cover weight.
        #[arg(long)]
        optimum: bool,
    },
}

#[derive(Subcommand, Debug)]
enum GenCommand {
    /// Random RX3C instance in text form.
    Rx3c {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        seed: u64,
        /// Draw sets without planting a cover.
        #[arg(long)]
        unplanted: bool,
    },
    /// Random problem file.
    Election(GenElection),
}

#[derive(Args, Debug)]
struct GenElection {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    voters: usize,
    /// Including p.
    #[arg(long)]
    candidates: usize,
    #[arg(long, value_parser = parse_rule)]
    rule: Rule,
    #[arg(long, value_enum)]
    problem: KindArg,
    /// Defaults to the registered voter count.
    #[arg(long)]
    unregistered: Option<usize>,
    #[arg(long, default_value_t = 0)]
    min_price: u64,
    #[arg(long, default_value_t = 3)]
    max_price: u64,
    #[arg(long, default_value_t = 2)]
    limit: u64,
}

#[derive(Args, Debug)]
struct CapArgs {
    /// Largest bribery election the oracle will search.
    #[arg(long, default_value_t = OracleCaps::default().bribery_voters)]
    max_voters: usize,
}

impl CapArgs {
    fn caps(&self) -> OracleCaps {
        OracleCaps { bribery_voters: self.max_voters, ..OracleCaps::default() }
    }
}

#[derive(Subcommand, Debug)]
enum ReduceCommand {
    /// Print the 3-Veto bribery problem for an RX3C file.
    Rx3c { file: PathBuf },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SenseArg {
    Max,
    Min,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Ccrv,
    PricedCcrv,
    Bribery,
}

impl From<KindArg> for ProblemKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Ccrv => ProblemKind::Ccrv,
            KindArg::PricedCcrv => ProblemKind::PricedCcrv,
            KindArg::Bribery => ProblemKind::Bribery,
        }
    }
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { code: EXIT_DECIDED, stdout, stderr: String::new() }
    }

    fn fail(code: u8, stderr: impl Into<String>) -> Self {
        let mut stderr = stderr.into();
        if !stderr.ends_with('\n') {
            stderr.push('\n');
        }
        Outcome { code, stdout: String::new(), stderr }
    }
}

fn solve_failure(e: &SolveError) -> Outcome {
    let code = match e {
        SolveError::CapExceeded { .. } | SolveError::WeightOverflow(_) => EXIT_CAP,
        SolveError::WitnessRejected(_) => EXIT_MISMATCH,
        _ => EXIT_USAGE,
    };
    Outcome::fail(code, format!("error: {e}"))
}

fn read(path: &Path) -> Result<String, Outcome> {
    std::fs::read_to_string(path).map_err(|e| Outcome::fail(EXIT_USAGE, format!("error: {}: {e}", path.display())))
}

fn load_problem(path: &Path) -> Result<ProblemFile, Outcome> {
    let text = read(path)?;
    parse_problem(&text).map_err(|e| Outcome::fail(EXIT_USAGE, format!("error: {}: {e}", path.display())))
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() { Outcome::fail(EXIT_USAGE, text) } else { Outcome::ok(text) };
        }
    };
    let result = match cli.command {
        Command::Solve { file, witness, check } => cmd_solve(&file, witness, check),
        Command::Oracle { file, witness, caps } => cmd_oracle(&file, witness, caps.caps()),
        Command::Compare { file, caps } => cmd_compare(&file, caps.caps()),
        Command::Match { file, sense, threshold } => cmd_match(&file, sense, threshold),
        Command::Gen(GenCommand::Rx3c { k, seed, unplanted }) => cmd_gen_rx3c(k, seed, unplanted),
        Command::Gen(GenCommand::Election(g)) => cmd_gen_election(&g),
        Command::Reduce(ReduceCommand::Rx3c { file }) => cmd_reduce_rx3c(&file),
        Command::AuditCounterexample { optimum } => cmd_audit(optimum),
    };
    result.unwrap_or_else(|o| o)
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// `decision`, `objective` and, when asked, the plan lines.
fn write_decision(out: &mut String, d: &AttackDecision, witness: bool) {
    writeln!(out, "decision {}", yes_no(d.success)).unwrap();
    if let Some(obj) = d.objective {
        writeln!(out, "objective {obj}").unwrap();
    }
    if !witness {
        return;
    }
    match &d.witness {
        Some(Witness::Replacement(plan)) => {
            let n = plan.removed.len().max(plan.added.len());
            for i in 0..n {
                match (plan.removed.get(i), plan.added.get(i)) {
                    (Some(&r), Some(&a)) => {
                        writeln!(out, "replace {} with {}", VoterRef::Registered(r), VoterRef::Unregistered(a)).unwrap()
                    }
                    (Some(&r), None) => writeln!(out, "remove {}", VoterRef::Registered(r)).unwrap(),
                    (None, Some(&a)) => writeln!(out, "add {}", VoterRef::Unregistered(a)).unwrap(),
                    (None, None) => unreachable!(),
                }
            }
        }
        Some(Witness::Bribery(plan)) => {
            for b in &plan.bribes {
                writeln!(out, "bribe {} to {}", VoterRef::Registered(b.voter), b.vote).unwrap();
            }
        }
        None => {}
    }
}

/// Re-scores the witness with election code only.
fn check_witness(problem: &ProblemFile, d: &AttackDecision) -> Result<(), String> {
    match (&problem.instance, &d.witness) {
        (Instance::Ccrv(inst), Some(Witness::Replacement(plan))) => verify_replacement(inst, plan).map(drop),
        (Instance::Bribery(inst), Some(Witness::Bribery(plan))) => verify_bribery(inst, plan).map(drop),
        (_, None) => return Err("no witness".into()),
        _ => return Err("witness does not match the problem kind".into()),
    }
    .map_err(|e| e.to_string())
}

fn cmd_solve(file: &Path, witness: bool, check: bool) -> Result<Outcome, Outcome> {
    let problem = load_problem(file)?;
    let d = solve_problem(&problem).map_err(|e| solve_failure(&e))?;
    let mut out = String::new();
    write_decision(&mut out, &d, witness);
    if check && d.success {
        if let Err(msg) = check_witness(&problem, &d) {
            out.push_str("check winner no\n");
            return Ok(Outcome { code: EXIT_MISMATCH, stdout: out, stderr: format!("error: {msg}\n") });
        }
        out.push_str("check winner yes\n");
    }
    Ok(Outcome::ok(out))
}

fn cmd_oracle(file: &Path, witness: bool, caps: OracleCaps) -> Result<Outcome, Outcome> {
    let problem = load_problem(file)?;
    let d = oracle_problem_capped(&problem, caps).map_err(|e| solve_failure(&e))?;
    let mut out = String::new();
    write_decision(&mut out, &d, witness);
    Ok(Outcome::ok(out))
}

fn cmd_compare(file: &Path, caps: OracleCaps) -> Result<Outcome, Outcome> {
    let problem = load_problem(file)?;
    let solver = solve_problem(&problem).map_err(|e| solve_failure(&e))?;
    let oracle = oracle_problem_capped(&problem, caps).map_err(|e| solve_failure(&e))?;
    let mut out = String::new();
    writeln!(out, "solver decision {}", yes_no(solver.success)).unwrap();
    writeln!(out, "oracle decision {}", yes_no(oracle.success)).unwrap();
    let mut agree = solver.success == oracle.success;
    if solver.success {
        let checked = check_witness(&problem, &solver);
        writeln!(out, "check winner {}", yes_no(checked.is_ok())).unwrap();
        agree &= checked.is_ok();
    }
    writeln!(out, "agree {}", yes_no(agree)).unwrap();
    let code = if agree { EXIT_DECIDED } else { EXIT_MISMATCH };
    Ok(Outcome { code, stdout: out, stderr: String::new() })
}

fn cmd_match(file: &Path, sense: SenseArg, threshold: i64) -> Result<Outcome, Outcome> {
    let text = read(file)?;
    let (graph, demand) =
        parse_graph(&text).map_err(|e| Outcome::fail(EXIT_USAGE, format!("error: {}: {e}", file.display())))?;
    let sense = match sense {
        SenseArg::Max => Sense::Maximize,
        SenseArg::Min => Sense::Minimize,
    };
    let problem = PerfectBMatchingProblem::new(graph, demand, sense)
        .map_err(|e| Outcome::fail(EXIT_USAGE, format!("error: {e}")))?;
    let mut out = String::new();
    match matching::solve(&problem) {
        Ok(sol) => {
            let yes = match sense {
                Sense::Maximize => sol.total_weight >= threshold,
                Sense::Minimize => sol.total_weight <= threshold,
            };
            writeln!(out, "decision {}", yes_no(yes)).unwrap();
            writeln!(out, "objective {}", sol.total_weight).unwrap();
            for &i in &sol.selected {
                let e = problem.graph.edge(i);
                writeln!(out, "edge {} {} weight {}", problem.graph.name(e.u), problem.graph.name(e.v), e.weight)
                    .unwrap();
            }
        }
        Err(SolveError::Infeasible(why)) => {
            writeln!(out, "decision no").unwrap();
            writeln!(out, "infeasible {why}").unwrap();
        }
        Err(e) => return Err(solve_failure(&e)),
    }
    Ok(Outcome::ok(out))
}

fn cmd_gen_rx3c(k: usize, seed: u64, unplanted: bool) -> Result<Outcome, Outcome> {
    if k == 0 {
        return Err(Outcome::fail(EXIT_USAGE, "error: --k must be positive"));
    }
    let inst = if unplanted { gen_rx3c_unplanted(k, seed) } else { gen_rx3c(k, seed) };
    Ok(Outcome::ok(matchvote::rx3c::write_rx3c(&inst)))
}

fn cmd_gen_election(g: &GenElection) -> Result<Outcome, Outcome> {
    if g.rule.k > g.candidates {
        return Err(Outcome::fail(
            EXIT_USAGE,
            format!("error: rule {} needs at least {} candidates", g.rule, g.rule.k),
        ));
    }
    if g.candidates == 0 {
        return Err(Outcome::fail(EXIT_USAGE, "error: --candidates must be positive"));
    }
    let params = GenParams {
        kind: g.problem.into(),
        rule: g.rule,
        candidates: g.candidates,
        voters: g.voters,
        unregistered: g.unregistered.unwrap_or(g.voters),
        min_price: g.min_price,
        max_price: g.max_price,
        limit: g.limit,
    };
    Ok(Outcome::ok(gen_problem(&params, g.seed).to_string()))
}

fn cmd_reduce_rx3c(file: &Path) -> Result<Outcome, Outcome> {
    let text = read(file)?;
    let inst = parse_rx3c(&text).map_err(|e| Outcome::fail(EXIT_USAGE, format!("error: {}: {e}", file.display())))?;
    let bribery = reduce_rx3c_to_3veto(&inst).map_err(|e| Outcome::fail(EXIT_USAGE, format!("error: {e}")))?;
    let file = ProblemFile { name: "rx3c".into(), kind: ProblemKind::Bribery, instance: Instance::Bribery(bribery) };
    Ok(Outcome::ok(file.to_string()))
}

fn cmd_audit(optimum: bool) -> Result<Outcome, Outcome> {
    let cx = build_bt_counterexample();
    let mut out = String::new();
    let weight = verify_b_edge_cover(&cx.problem, &cx.published_cover);
    match &weight {
        Ok(w) => writeln!(out, "cover weight {w}").unwrap(),
        Err(v) => writeln!(out, "cover invalid {v}").unwrap(),
    }
    writeln!(out, "threshold {}", cx.threshold).unwrap();
    let nmts = solve_nmts_brute(&cx.nmts).map_err(|e| solve_failure(&e))?;
    writeln!(out, "nmts {}", yes_no(nmts.is_some())).unwrap();
    if optimum {
        let best = min_weight_b_edge_cover(&cx.problem).map_err(|e| solve_failure(&e))?;
        writeln!(out, "optimum {}", best.weight).unwrap();
    }
    let refuted = nmts.is_none() && weight.is_ok_and(|w| w <= cx.threshold);
    writeln!(out, "refuted {}", yes_no(refuted)).unwrap();
    Ok(Outcome::ok(out))
}
