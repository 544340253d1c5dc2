//! Acceptance gate. Runs every criterion in order and prints one
//! `PASS`/`FAIL` line each; exits nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use matchvote::approval::{solve_ccrv_2approval, verify_replacement};
use matchvote::attack::{verify_bribery, AttackDecision, BriberyInstance, Certificate, Witness};
use matchvote::cover::{build_bt_counterexample, min_weight_b_edge_cover, solve_nmts_brute, verify_b_edge_cover};
use matchvote::election::{Rule, RuleKind};
use matchvote::gen::{gen_problem, GenParams};
use matchvote::graph::{Multigraph, PerfectBMatchingProblem, Sense};
use matchvote::matching::{brute_force_solve, solve, verify, BRUTE_FORCE_EDGE_CAP};
use matchvote::problem::{oracle_problem, parse_problem, solve_problem, Instance, ProblemFile, ProblemKind};
use matchvote::rx3c::{gen_rx3c, gen_rx3c_unplanted, parse_rx3c, reduce_rx3c_to_3veto, solve_rx3c_brute, Rx3cInstance};
use matchvote::veto::{build_2veto_graph, solve_bribery_3veto_exact, SubproblemParams, VetoGraph};

const EX1: &str = include_str!("../../../fixtures/ex1.election");
const EX2: &str = include_str!("../../../fixtures/ex2.election");
const K1: &str = include_str!("../../../fixtures/k1.rx3c");

/// Witness checks tallied across every suite.
#[derive(Default)]
struct Witnesses {
    checked: usize,
    failures: Vec<String>,
}

impl Witnesses {
    /// Re-scores a yes answer with election code only.
    fn check(&mut self, label: &str, problem: &ProblemFile, d: &AttackDecision, from_solver: bool) {
        if !d.success {
            return;
        }
        self.checked += 1;
        let outcome = match (&problem.instance, &d.witness) {
            (Instance::Ccrv(c), Some(Witness::Replacement(plan))) => {
                verify_replacement(c, plan).map_err(|e| e.to_string()).and_then(|_| {
                    if !c.priced() && from_solver {
                        // |V̂ ∩ V| >= n - k.
                        let kept = c.registered().len() - plan.removed.len();
                        if (kept as u64) + c.limit() < c.registered().len() as u64 {
                            return Err("kept too few registered voters".into());
                        }
                    }
                    Ok(())
                })
            }
            (Instance::Bribery(b), Some(Witness::Bribery(plan))) => {
                verify_bribery(b, plan).map_err(|e| e.to_string()).and_then(|_| {
                    let veto = b.election().rule().kind == RuleKind::Veto;
                    if from_solver && veto && plan.bribes.iter().any(|x| x.vote.chosen().contains(b.preferred())) {
                        return Err("bribed vote vetoes p".into());
                    }
                    Ok(())
                })
            }
            _ => Err("yes without a matching witness".into()),
        };
        if let Err(e) = outcome {
            self.failures.push(format!("{label}: {e}"));
        }
    }
}

struct Gate {
    results: Vec<(String, bool)>,
}

impl Gate {
    fn record(&mut self, name: &str, ok: bool, elapsed: Duration, limit: Duration, detail: String) {
        let ok = ok && elapsed <= limit;
        let status = if ok { "PASS" } else { "FAIL" };
        println!("{status} {name}: {detail} [{:.2}s, limit {}s]", elapsed.as_secs_f64(), limit.as_secs());
        self.results.push((name.to_string(), ok));
    }
}

fn criterion_example_one(gate: &mut Gate, w: &mut Witnesses) {
    let start = Instant::now();
    let file = parse_problem(EX1).expect("fixture parses");
    let Instance::Ccrv(inst) = &file.instance else { unreachable!() };
    let d = solve_ccrv_2approval(inst).expect("solves");
    w.check("ex1", &file, &d, true);
    let mut ok = d.success && matches!(d.certificate, Some(Certificate::Control { fs_p: 3, .. }));
    let mut detail = format!("decision {}, certificate {:?}", d.success, d.certificate);
    if let Some(Witness::Replacement(plan)) = &d.witness {
        let after = inst.apply(plan).expect("plan applies");
        let score = after.score();
        let p = score.get(inst.preferred()).unwrap();
        ok &= plan.removed.len() <= 3 && p == 3 && score.iter().all(|(_, s)| s <= 3);
        detail += &format!(", {} replacements, final p = {p}, max = {}", plan.removed.len(), score.best().unwrap());
    } else {
        ok = false;
    }
    gate.record("1 example-1 control", ok, start.elapsed(), Duration::from_secs(1), detail);
}

fn criterion_example_two(gate: &mut Gate, w: &mut Witnesses) {
    let start = Instant::now();
    let file = parse_problem(EX2).expect("fixture parses");
    let Instance::Bribery(inst) = &file.instance else { unreachable!() };
    let d = solve_problem(&file).expect("solves");
    w.check("ex2", &file, &d, true);
    let mut ok = d.success && d.objective.is_some_and(|c| c <= 3);
    let mut detail = format!("decision {}, cost {:?}", d.success, d.objective);
    ok &= matches!(d.certificate, Some(Certificate::Veto { lp: 2, lp_other: 1, fv_p: 4, .. }));
    match build_2veto_graph(inst, SubproblemParams::new(2, 1)) {
        VetoGraph::Built { problem, meta } => {
            let g = &problem.graph;
            let b = |name: &str| problem.demand[g.index_of(name).unwrap()];
            let labels = [b("a"), b("b"), b("c"), b("p"), problem.demand[meta.y]];
            let bx = problem.demand[meta.x];
            let weight = solve(&problem).map(|s| s.total_weight);
            ok &= labels == [0, 4, 5, 2, 3] && bx == 2 && weight.as_ref().is_ok_and(|&w| w <= 3);
            detail += &format!(", (2,1) labels a,b,c,p,y = {labels:?}, b(x) = {bx}, weight {weight:?}");
        }
        VetoGraph::Skip(r) => {
            ok = false;
            detail += &format!(", (2,1) skipped: {r}");
        }
    }
    gate.record("2 example-2 bribery", ok, start.elapsed(), Duration::from_secs(1), detail);
}

struct Family {
    name: &'static str,
    kind: ProblemKind,
    rule: Rule,
    candidates: (usize, usize),
    prices: (u64, u64),
    limit: u64,
}

fn criterion_oracle_equivalence(gate: &mut Gate, w: &mut Witnesses) {
    let start = Instant::now();
    let families = [
        Family {
            name: "2approval-ccrv",
            kind: ProblemKind::Ccrv,
            rule: Rule::approval(2),
            candidates: (2, 5),
            prices: (1, 1),
            limit: 3,
        },
        Family {
            name: "priced-ccrv",
            kind: ProblemKind::PricedCcrv,
            rule: Rule::approval(2),
            candidates: (2, 5),
            prices: (0, 3),
            limit: 5,
        },
        Family {
            name: "2approval-bribery",
            kind: ProblemKind::Bribery,
            rule: Rule::approval(2),
            candidates: (2, 5),
            prices: (1, 3),
            limit: 3,
        },
        Family {
            name: "2veto-bribery",
            kind: ProblemKind::Bribery,
            rule: Rule::veto(2),
            candidates: (2, 6),
            prices: (1, 3),
            limit: 3,
        },
        Family {
            name: "3veto-bribery",
            kind: ProblemKind::Bribery,
            rule: Rule::veto(3),
            candidates: (3, 6),
            prices: (1, 3),
            limit: 3,
        },
    ];
    let per_family = 200;
    let mut ok = true;
    let mut parts = Vec::new();
    for (fi, fam) in families.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + fi as u64);
        let (mut agree, mut yes) = (0, 0);
        for i in 0..per_family {
            // Mostly full-size elections with modest limits, so both answers occur.
            let voters = if i % 10 == 0 { rng.gen_range(0..=6) } else { rng.gen_range(4..=6) };
            let params = GenParams {
                kind: fam.kind,
                rule: fam.rule,
                candidates: rng.gen_range(fam.candidates.0..=fam.candidates.1),
                voters,
                unregistered: rng.gen_range(0..=6),
                min_price: fam.prices.0,
                max_price: fam.prices.1,
                limit: rng.gen_range(0..=fam.limit),
            };
            let file = gen_problem(&params, rng.gen());
            let label = format!("{} #{i}", fam.name);
            let (solver, oracle) = match (solve_problem(&file), oracle_problem(&file)) {
                (Ok(s), Ok(o)) => (s, o),
                (s, o) => {
                    ok = false;
                    println!("  {label}: error solver {:?} oracle {:?}", s.err(), o.err());
                    continue;
                }
            };
            w.check(&label, &file, &solver, true);
            w.check(&format!("{label} oracle"), &file, &oracle, false);
            if solver.success == oracle.success {
                agree += 1;
            } else {
                ok = false;
                println!("  {label}: solver {} oracle {}\n{file}", solver.success, oracle.success);
            }
            yes += solver.success as usize;
        }
        parts.push(format!("{} {agree}/{per_family} ({yes} yes)", fam.name));
    }
    gate.record("3 oracle equivalence", ok, start.elapsed(), Duration::from_secs(600), parts.join(", "));
}

fn random_matching_problem(rng: &mut ChaCha8Rng) -> PerfectBMatchingProblem {
    let n = rng.gen_range(1..=8);
    let mut g = Multigraph::new();
    for i in 0..n {
        g.add_vertex(format!("v{i}"));
    }
    let m = rng.gen_range(0..=14);
    while g.edge_count() < m && n >= 2 {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v {
            g.add_edge(u, v, rng.gen_range(-5..=9)).unwrap();
        }
    }
    // Half the demands come from a random edge subset (so a perfect
    // b-matching exists), half are arbitrary.
    let demand = if rng.gen() {
        let mut d = vec![0u64; n];
        for e in g.edges() {
            if rng.gen_bool(0.4) && d[e.u] < 3 && d[e.v] < 3 {
                d[e.u] += 1;
                d[e.v] += 1;
            }
        }
        d
    } else {
        (0..n).map(|_| rng.gen_range(0..=3)).collect()
    };
    let sense = if rng.gen() { Sense::Maximize } else { Sense::Minimize };
    PerfectBMatchingProblem::new(g, demand, sense).unwrap()
}

fn criterion_matching(gate: &mut Gate) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let total = 400;
    let (mut agree, mut feasible) = (0, 0);
    let mut ok = true;
    for i in 0..total {
        let problem = random_matching_problem(&mut rng);
        let fast = solve(&problem);
        let slow = brute_force_solve(&problem, BRUTE_FORCE_EDGE_CAP);
        let same = match (&fast, &slow) {
            (Ok(f), Ok(s)) => f.total_weight == s.total_weight && verify(&problem, f) == Ok(f.total_weight),
            (Err(a), Err(b)) => a.is_infeasible() && b.is_infeasible(),
            _ => false,
        };
        feasible += slow.is_ok() as usize;
        if same {
            agree += 1;
        } else {
            ok = false;
            println!("  matching #{i}: solver {fast:?} brute {:?}", slow.as_ref().map(|s| s.total_weight));
        }
    }
    gate.record(
        "4 matching equivalence",
        ok,
        start.elapsed(),
        Duration::from_secs(120),
        format!("{agree}/{total} agree ({feasible} feasible)"),
    );
}

fn tallies_match(x: &Rx3cInstance, inst: &BriberyInstance) -> bool {
    let score = inst.election().score();
    let ok = score.iter().all(|(c, n)| {
        let name = c.as_str();
        let expected = if ["p", "p1", "p2"].contains(&name) {
            2
        } else if x.elements().iter().any(|e| e == name) {
            3
        } else {
            1
        };
        n == expected
    });
    ok
}

fn criterion_rx3c(gate: &mut Gate, w: &mut Witnesses) {
    let start = Instant::now();
    let mut instances = vec![("k1 fixture".to_string(), parse_rx3c(K1).expect("fixture parses"))];
    for s in 0..6 {
        instances.push((format!("planted k=1 seed {s}"), gen_rx3c(1, s)));
    }
    for s in 0..12 {
        instances.push((format!("planted k=2 seed {s}"), gen_rx3c(2, s)));
    }
    // Unplanted draws usually still have a cover; keep the first few of
    // each answer.
    let (mut with, mut without) = (0, 0);
    for s in 0.. {
        let x = gen_rx3c_unplanted(2, s);
        let has = solve_rx3c_brute(&x).unwrap().is_some();
        let slot = if has { &mut with } else { &mut without };
        if *slot < 8 {
            *slot += 1;
            instances.push((format!("unplanted k=2 seed {s}"), x));
        }
        if with == 8 && without == 8 {
            break;
        }
    }
    let mut ok = true;
    let (mut agree, mut negatives) = (0, 0);
    for (label, x) in &instances {
        let cover = solve_rx3c_brute(x).unwrap();
        if let Some(c) = &cover {
            ok &= x.is_exact_cover(c);
        }
        let inst = reduce_rx3c_to_3veto(x).unwrap();
        ok &= tallies_match(x, &inst);
        let d = solve_bribery_3veto_exact(&inst).unwrap();
        let file = ProblemFile { name: label.clone(), kind: ProblemKind::Bribery, instance: Instance::Bribery(inst) };
        w.check(label, &file, &d, true);
        negatives += cover.is_none() as usize;
        if cover.is_some() == d.success {
            agree += 1;
        } else {
            ok = false;
            println!("  {label}: cover {} bribery {}", cover.is_some(), d.success);
        }
    }
    gate.record(
        "5 rx3c reduction",
        ok,
        start.elapsed(),
        Duration::from_secs(300),
        format!("{agree}/{} agree ({negatives} without cover), tallies checked", instances.len()),
    );
}

fn criterion_audit(gate: &mut Gate) {
    let start = Instant::now();
    let cx = build_bt_counterexample();
    let published = verify_b_edge_cover(&cx.problem, &cx.published_cover);
    let best = min_weight_b_edge_cover(&cx.problem).map(|c| c.weight);
    let nmts = solve_nmts_brute(&cx.nmts).unwrap();
    let ok = published == Ok(86)
        && cx.threshold == 86
        && 22 + 4 * 2i64.pow(4) == 86
        && best.as_ref().is_ok_and(|&b| b <= 86)
        && nmts.is_none();
    gate.record(
        "6 cover audit",
        ok,
        start.elapsed(),
        Duration::from_secs(30),
        format!("published {published:?}, threshold {}, optimum {best:?}, nmts {:?}", cx.threshold, nmts),
    );
}

fn criterion_scale(gate: &mut Gate, w: &mut Witnesses) {
    let limit = Duration::from_secs(120);
    let base = GenParams {
        kind: ProblemKind::Ccrv,
        rule: Rule::approval(2),
        candidates: 10,
        voters: 50,
        unregistered: 50,
        min_price: 1,
        max_price: 1,
        limit: 0,
    };
    let priced =
        GenParams { kind: ProblemKind::PricedCcrv, voters: 20, unregistered: 20, min_price: 0, max_price: 3, ..base };
    let mut parts = Vec::new();
    let mut ok = true;
    for (label, params, limits) in [("ccrv 10x50x50", base, [0, 3, 10]), ("priced 10x20x20", priced, [0, 6, 20])] {
        let mut slowest = Duration::ZERO;
        let mut yes = 0;
        for (seed, k) in limits.into_iter().enumerate() {
            let file = gen_problem(&GenParams { limit: k, ..params }, seed as u64);
            let t = Instant::now();
            let d = solve_problem(&file).unwrap();
            slowest = slowest.max(t.elapsed());
            w.check(label, &file, &d, true);
            yes += d.success as usize;
        }
        ok &= slowest <= limit;
        parts.push(format!("{label} slowest {:.2}s ({yes}/3 yes)", slowest.as_secs_f64()));
    }
    gate.record("7 scale", ok, Duration::ZERO, limit, parts.join(", "));
}

fn main() -> ExitCode {
    let mut gate = Gate { results: Vec::new() };
    let mut w = Witnesses::default();
    criterion_example_one(&mut gate, &mut w);
    criterion_example_two(&mut gate, &mut w);
    criterion_oracle_equivalence(&mut gate, &mut w);
    criterion_matching(&mut gate);
    criterion_rx3c(&mut gate, &mut w);
    criterion_audit(&mut gate);
    criterion_scale(&mut gate, &mut w);
    for f in &w.failures {
        println!("  witness: {f}");
    }
    gate.record(
        "8 witness integrity",
        w.failures.is_empty() && w.checked > 0,
        Duration::ZERO,
        Duration::from_secs(1),
        format!("{} yes witnesses re-scored, {} failures", w.checked, w.failures.len()),
    );
    let failed = gate.results.iter().filter(|(_, ok)| !ok).count();
    println!("{} of {} criteria pass", gate.results.len() - failed, gate.results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
