//! Acceptance gate: one PASS/FAIL line per criterion.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use flowpds::algebra::{
    boolean_algebra, check_laws, killgen_algebra, minplus_algebra, FlowAlgebra, KillGen, Law, MinPlus, Verdict,
};
use flowpds::automaton::query;
use flowpds::oracle::{
    check_completeness, check_soundness, configurations, explore, join_over_paths, Bounds, PathQuery,
    Target,
};
use flowpds::pds::{build_delta_post2, build_delta_pre, replay};
use flowpds::saturation::witness;
use flowpds::solver::{apply_f, bottom, eval_lhs, solve_from, solve_least, solve_naive, variables, Solution};
use flowpds::text::{parse_automaton, parse_config, parse_pds, LoadedPds};
use flowpds::{saturate, Configuration, Direction, PAutomaton, SolverConfig};
use rand::Rng;

#[path = "../../core/tests/common/mod.rs"]
mod common;

use common::Instance;

const SOUNDNESS_SEEDS: std::ops::Range<u64> = 0..100;
const COMPLETENESS_SEEDS: std::ops::Range<u64> = 1000..1050;

/// Deep enough that every path of a loop-free instance is explored.
const COMPLETE_DEPTH: usize = 96;

type Outcome = Result<String, String>;

struct Suite {
    random: Vec<Instance<KillGen>>,
    loop_free: Vec<Instance<KillGen>>,
    loop_free_minplus: Vec<Instance<MinPlus>>,
}

impl Suite {
    fn build() -> Self {
        Suite {
            random: SOUNDNESS_SEEDS.map(|s| common::killgen_instance(s, false).1).collect(),
            loop_free: COMPLETENESS_SEEDS.map(|s| common::killgen_instance(s, true).1).collect(),
            loop_free_minplus: COMPLETENESS_SEEDS.map(|s| common::minplus_instance(s, true)).collect(),
        }
    }

    fn killgen(&self) -> impl Iterator<Item = &Instance<KillGen>> {
        self.random.iter().chain(&self.loop_free)
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn cli(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_flowpds"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "flowpds {} exited {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr).trim()
        ));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn expect_eq(what: &str, got: &str, want: &str) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what}: got {got:?}, want {want:?}"))
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let took = start.elapsed();
    if took < limit {
        Ok(())
    } else {
        Err(format!("took {took:?}, limit {limit:?}"))
    }
}

fn load_minplus(pds: &Path, aut: &Path, direction: Direction) -> (flowpds::PushdownSystem<MinPlus>, PAutomaton) {
    let LoadedPds::MinPlus(_, pds) = parse_pds(&std::fs::read_to_string(pds).unwrap()).unwrap() else {
        panic!("fixture is not min-plus");
    };
    let aut = parse_automaton(&std::fs::read_to_string(aut).unwrap(), direction, pds.locations()).unwrap();
    (pds, aut)
}

fn worked_pre() -> Outcome {
    let start = Instant::now();
    let (pds_path, aut_path) = (fixture("ab.pds"), fixture("wpre.aut"));
    let (pds_s, aut_s) = (pds_path.to_str().unwrap(), aut_path.to_str().unwrap());
    let sol = cli(&["solve", "--pds", pds_s, "--automaton", aut_s, "--direction", "pre"])?;
    expect_eq("solution", &sol, "l(p,$,qf) = 0\nl(p,a,p) = 2\nl(p,b,p) = 1\n")?;
    let q = cli(&["query", "--pds", pds_s, "--automaton", aut_s, "--direction", "pre", "--config", "<p: a $>"])?;
    expect_eq("query", q.trim(), "2")?;

    let alg = minplus_algebra();
    let (pds, aut) = load_minplus(&pds_path, &aut_path, Direction::Pre);
    let delta = build_delta_pre(&alg, &pds, &aut);
    let source = parse_config("<p: a $>").unwrap();
    let v = join_over_paths(&alg, &PathQuery::new(&delta, source, Target::EmptyAt(aut.finals().clone()), 6));
    if !v.exhausted {
        return Err("depth-6 path search was cut off".into());
    }
    expect_eq("path join", &v.value.map_or("none".into(), |w| alg.render(&w)), "2")?;
    within(Duration::from_secs(1), start)?;
    Ok(format!("solution, query and exhausted path join agree ({} paths)", v.count))
}

fn worked_post() -> Outcome {
    let start = Instant::now();
    let (pds_path, aut_path) = (fixture("ab.pds"), fixture("wpost.aut"));
    let (pds_s, aut_s) = (pds_path.to_str().unwrap(), aut_path.to_str().unwrap());
    let sol = cli(&["solve", "--pds", pds_s, "--automaton", aut_s, "--direction", "post"])?;
    expect_eq("solution", &sol, "l(p,a,qf) = 0\nl(p,b,qf) = 1\nl(p,eps,qf) = 2\n")?;
    let q = cli(&["query", "--pds", pds_s, "--automaton", aut_s, "--direction", "post", "--config", "<p:>"])?;
    expect_eq("query", q.trim(), "2")?;

    // the reversed readout is visible on a non-commutative algebra too
    let alg = minplus_algebra();
    let (pds, aut) = load_minplus(&pds_path, &aut_path, Direction::Post);
    let res = saturate(&alg, &pds, &aut).map_err(|e| e.to_string())?;
    let sol = solve_least(&alg, &res.constraints, SolverConfig::default()).map_err(|e| e.to_string())?;
    let w = query(&alg, &res.automaton, &sol, &parse_config("<p: b>").unwrap()).map_err(|e| e.to_string())?;
    expect_eq("query <p: b>", &alg.render(&w), "1")?;
    within(Duration::from_secs(1), start)?;
    Ok("solution and epsilon readout agree".into())
}

fn killgen_laws() -> Outcome {
    let start = Instant::now();
    let alg = killgen_algebra(["x", "y"]).map_err(|e| e.to_string())?;
    let report = check_laws(&alg, None).map_err(|e| e.to_string())?;
    for law in [
        Law::CombineIdempotent,
        Law::CombineCommutative,
        Law::ZeroNeutral,
        Law::OneNeutral,
        Law::LeftDistributive,
        Law::RightDistributive,
        Law::RightStrict,
    ] {
        if report.verdict(law) != &Verdict::Holds {
            return Err(format!("{} does not hold", law.label()));
        }
    }
    let Verdict::Fails(cx) = report.verdict(Law::LeftStrict) else {
        return Err("left-strict unexpectedly holds".into());
    };
    let zero = alg.zero();
    let mut left_failures = 0;
    for k in 0..4u64 {
        for g in 0..4u64 {
            let a = KillGen::new(k, g);
            if alg.extend(&a, &zero) != zero {
                return Err(format!("{} (x) 0 is not 0", alg.render(&a)));
            }
            let strict = alg.extend(&zero, &a) == zero;
            if strict == (g != 0) {
                return Err(format!("left annihilation at {} disagrees with its gen set", alg.render(&a)));
            }
            left_failures += usize::from(!strict);
        }
    }
    within(Duration::from_secs(1), start)?;
    Ok(format!(
        "16 elements; left annihilation fails on {left_failures}, e.g. [{}]",
        cx.elements.join("; ")
    ))
}

fn soundness(suite: &Suite) -> Outcome {
    let start = Instant::now();
    let alg = common::killgen3();
    let mut checked = 0;
    for (i, inst) in suite.random.iter().enumerate() {
        for direction in [Direction::Pre, Direction::Post] {
            let input = inst.automaton(direction);
            let res = saturate(&alg, &inst.pds, &input).map_err(|e| e.to_string())?;
            let sol = solve_least(&alg, &res.constraints, SolverConfig::default()).map_err(|e| e.to_string())?;
            let report = check_soundness(&alg, &inst.pds, &input, &res.automaton, &sol, Bounds::default())
                .map_err(|e| e.to_string())?;
            if let Some(v) = report.violations.first() {
                return Err(format!("instance {i} {direction:?}: {v}"));
            }
            checked += report.checked;
        }
    }
    within(Duration::from_secs(300), start)?;
    Ok(format!("{} instances, both directions, {checked} configurations", suite.random.len()))
}

fn completeness_of<A: FlowAlgebra>(alg: &A, name: &str, instances: &[Instance<A::Elem>]) -> Result<usize, String> {
    let bounds = Bounds { depth: COMPLETE_DEPTH, max_stack: 4 };
    let mut checked = 0;
    for (i, inst) in instances.iter().enumerate() {
        for direction in [Direction::Pre, Direction::Post] {
            let input = inst.automaton(direction);
            let res = saturate(alg, &inst.pds, &input).map_err(|e| e.to_string())?;
            let sol = solve_least(alg, &res.constraints, SolverConfig::default()).map_err(|e| e.to_string())?;
            let report =
                check_completeness(alg, &inst.pds, &input, &res.automaton, &sol, bounds).map_err(|e| e.to_string())?;
            if let Some(v) = report.violations.first() {
                return Err(format!("{name} instance {i} {direction:?}: {v}"));
            }
            if report.bound_limited > 0 {
                return Err(format!(
                    "{name} instance {i} {direction:?}: {} configurations not fully explored",
                    report.bound_limited
                ));
            }
            checked += report.checked;
        }
    }
    Ok(checked)
}

fn completeness(suite: &Suite) -> Outcome {
    let start = Instant::now();
    let kg = completeness_of(&common::killgen3(), "killgen", &suite.loop_free)?;
    let mp = completeness_of(&minplus_algebra(), "minplus", &suite.loop_free_minplus)?;
    within(Duration::from_secs(300), start)?;
    Ok(format!(
        "{} loop-free instances per algebra, {} configurations, all exhausted",
        suite.loop_free.len(),
        kg + mp
    ))
}

fn witnesses_of<A: FlowAlgebra>(alg: &A, inst: &Instance<A::Elem>) -> Result<usize, String> {
    let mut n = 0;
    for direction in [Direction::Pre, Direction::Post] {
        let input = inst.automaton(direction);
        let res = saturate(alg, &inst.pds, &input).map_err(|e| e.to_string())?;
        let delta = match direction {
            Direction::Pre => build_delta_pre(alg, &inst.pds, &input),
            Direction::Post => build_delta_post2(alg, &inst.pds, &input),
        };
        for t in res.automaton.transitions() {
            let sigma = witness(alg, &inst.pds, &res, t).ok_or_else(|| format!("no witness for {t}"))?;
            if let Some(r) = sigma.iter().find(|r| !delta.contains(r)) {
                return Err(format!("witness for {t} uses foreign rule {r:?}"));
            }
            let word: Vec<_> = t.label.iter().cloned().collect();
            let (from, to) = (
                Configuration { loc: t.src.clone(), stack: word },
                Configuration { loc: t.dst.clone(), stack: vec![] },
            );
            let (start, end) = match direction {
                Direction::Pre => (from, to),
                Direction::Post => (to, from),
            };
            if replay(&sigma, &start).as_ref() != Some(&end) {
                return Err(format!("witness for {t} does not replay to {end}"));
            }
            n += 1;
        }
    }
    Ok(n)
}

fn witnesses(suite: &Suite) -> Outcome {
    let kg = common::killgen3();
    let mp = minplus_algebra();
    let mut n = 0;
    for inst in suite.killgen() {
        n += witnesses_of(&kg, inst)?;
    }
    for inst in &suite.loop_free_minplus {
        n += witnesses_of(&mp, inst)?;
    }
    Ok(format!("{n} transitions replayed"))
}

fn random_assignment(vars: &BTreeSet<flowpds::Transition>, rng: &mut impl Rng) -> Solution<KillGen> {
    vars.iter().map(|t| (t.clone(), common::random_killgen(rng))).collect()
}

fn solver_props(suite: &Suite) -> Outcome {
    let alg = common::killgen3();
    let mut rng = common::rng(77);
    let systems: Vec<_> = suite
        .killgen()
        .flat_map(|inst| {
            [Direction::Pre, Direction::Post].map(|d| saturate(&alg, &inst.pds, &inst.automaton(d)).unwrap().constraints)
        })
        .collect();

    let mut pairs = 0;
    while pairs < 1000 {
        let cs = &systems[rng.gen_range(0..systems.len())];
        let vars = variables(cs);
        let lo = random_assignment(&vars, &mut rng);
        let bump = random_assignment(&vars, &mut rng);
        let hi: Solution<KillGen> = lo.iter().map(|(t, v)| (t.clone(), alg.combine(v, bump.get(t).unwrap()))).collect();
        let (flo, fhi) = (apply_f(&alg, &lo, cs).unwrap(), apply_f(&alg, &hi, cs).unwrap());
        if !flo.leq(&alg, &fhi) {
            return Err(format!("F not monotone on pair {pairs}"));
        }
        pairs += 1;
    }

    let mut least_checks = 0;
    for (i, cs) in systems.iter().enumerate() {
        let config = SolverConfig::default();
        let (sol, _) = solve_from(&alg, cs, bottom(&alg, cs), config).map_err(|e| e.to_string())?;
        if &solve_naive(&alg, cs, 100_000).map_err(|e| e.to_string())? != &sol {
            return Err(format!("system {i}: worklist and naive iteration differ"));
        }
        let vars = variables(cs);
        for _ in 0..100 {
            let (upper, _) =
                solve_from(&alg, cs, random_assignment(&vars, &mut rng), config).map_err(|e| e.to_string())?;
            if !cs.iter().all(|c| alg.leq(&eval_lhs(&alg, &upper, c).unwrap(), upper.get(&c.rhs).unwrap())) {
                return Err(format!("system {i}: sampled assignment does not satisfy the constraints"));
            }
            if !sol.leq(&alg, &upper) {
                return Err(format!("system {i}: least solution is not below a satisfying assignment"));
            }
            least_checks += 1;
        }
    }
    Ok(format!(
        "{pairs} monotone pairs, {least_checks} leastness samples, {} naive comparisons",
        systems.len()
    ))
}

/// Breadth-first search without a depth limit, stopping at the first goal.
fn connected<E>(
    rules: &[flowpds::Rule<E>],
    source: &Configuration,
    goal: impl Fn(&Configuration) -> bool,
    stack_bound: usize,
) -> bool {
    let mut seen = BTreeSet::from([source.clone()]);
    let mut queue = std::collections::VecDeque::from([source.clone()]);
    while let Some(c) = queue.pop_front() {
        if goal(&c) {
            return true;
        }
        for r in rules {
            if let Some(c2) = r.apply(&c) {
                if c2.stack.len() <= stack_bound && seen.insert(c2.clone()) {
                    queue.push_back(c2);
                }
            }
        }
    }
    false
}

/// Accepted configurations must be exactly those connected to the target
/// set. Paths of length at most 12 must all land in accepted
/// configurations; an accepted configuration with no such path must still
/// be connected by a longer one.
fn boolean_reachability(suite: &Suite) -> Outcome {
    const DEEP_STACK: usize = 28;
    let alg = boolean_algebra();
    let bounds = Bounds::default();
    let (mut compared, mut deep_only) = (0, 0);
    for (i, inst) in suite.killgen().enumerate() {
        let inst = inst.map(&alg, |_| true);
        for direction in [Direction::Pre, Direction::Post] {
            let input = inst.automaton(direction);
            let res = saturate(&alg, &inst.pds, &input).map_err(|e| e.to_string())?;
            let mut alphabet = inst.pds.alphabet().clone();
            alphabet.extend(input.labels());
            let configs = configurations(input.initials(), &alphabet, bounds.max_stack);
            let in_scope = |c: &Configuration| c.stack.len() <= bounds.max_stack && input.initials().contains(&c.loc);
            let mut shallow = BTreeSet::new();
            let delta = match direction {
                Direction::Pre => build_delta_pre(&alg, &inst.pds, &input),
                Direction::Post => build_delta_post2(&alg, &inst.pds, &input),
            };
            match direction {
                Direction::Pre => {
                    let target = Target::EmptyAt(input.finals().clone());
                    for c in &configs {
                        let q = PathQuery::new(&delta, c.clone(), target.clone(), bounds.depth);
                        if join_over_paths(&alg, &q).value.is_some() {
                            shallow.insert(c.clone());
                        }
                    }
                }
                Direction::Post => {
                    for qf in input.finals() {
                        let source = Configuration { loc: qf.clone(), stack: vec![] };
                        let ex = explore(&alg, &delta, &source, bounds.depth, 2 * bounds.depth, None, in_scope);
                        shallow.extend(ex.arrivals.into_keys());
                    }
                }
            }
            for c in &configs {
                compared += 1;
                let accepted = res.automaton.accepts(c).map_err(|e| e.to_string())?;
                if shallow.contains(c) {
                    if !accepted {
                        return Err(format!("instance {i} {direction:?}: {c} is reachable but not accepted"));
                    }
                    continue;
                }
                if !accepted {
                    continue;
                }
                deep_only += 1;
                let reached = match direction {
                    Direction::Pre => {
                        let target = Target::EmptyAt(input.finals().clone());
                        connected(&delta, c, |d| target.matches(d), DEEP_STACK)
                    }
                    Direction::Post => input.finals().iter().any(|qf| {
                        let source = Configuration { loc: qf.clone(), stack: vec![] };
                        connected(&delta, &source, |d| d == c, DEEP_STACK)
                    }),
                };
                if !reached {
                    return Err(format!("instance {i} {direction:?}: {c} is accepted but not reachable"));
                }
            }
        }
    }
    Ok(format!("{compared} configurations compared, {deep_only} needed paths longer than 12"))
}

fn demo_analysis() -> Outcome {
    let icfg = fixture("demo.icfg");
    let out = cli(&[
        "analyze",
        "--icfg",
        icfg.to_str().unwrap(),
        "--init-config",
        "<p: m0>",
        "--config",
        "<p: h0 m2>",
        "--config",
        "<p: h0 m4>",
    ])?;
    let expected = std::fs::read_to_string(fixture("demo_analyze.expected")).map_err(|e| e.to_string())?;
    if out != expected {
        return Err(format!("analyze output differs:\n{out}"));
    }
    let contexts: Vec<&str> = out.lines().filter(|l| l.starts_with("<p: h0")).collect();
    match contexts.as_slice() {
        [a, b] if a.split_once('>').map(|x| x.1.trim()) != b.split_once('>').map(|x| x.1.trim()) => {
            Ok("table matches; the two helper contexts differ".into())
        }
        _ => Err("the two helper contexts do not have distinct summaries".into()),
    }
}

fn main() -> ExitCode {
    let suite = Suite::build();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("worked pre example", Box::new(worked_pre)),
        ("worked post example", Box::new(worked_post)),
        ("kill/gen law table", Box::new(killgen_laws)),
        ("soundness suite", Box::new(|| soundness(&suite))),
        ("completeness suite", Box::new(|| completeness(&suite))),
        ("witness replay", Box::new(|| witnesses(&suite))),
        ("solver properties", Box::new(|| solver_props(&suite))),
        ("boolean reachability", Box::new(|| boolean_reachability(&suite))),
        ("demo analysis", Box::new(demo_analysis)),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run))
            .unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS criterion {} {name}: {detail} ({took:.2?})", n + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {} {name}: {why} ({took:.2?})", n + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
