//! Random desk-scale instances shared by the integration tests.
#![allow(dead_code)]

use flowpds::algebra::{killgen_algebra, FlowAlgebra, KillGen, KillGenAlgebra, MinPlus};
use flowpds::{Direction, PAutomaton, PushdownSystem, Rule, StateId, Transition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn killgen3() -> KillGenAlgebra {
    killgen_algebra(["x", "y", "z"]).unwrap()
}

pub fn random_killgen(rng: &mut (impl Rng + ?Sized)) -> KillGen {
    KillGen::new(rng.gen_range(0..8), rng.gen_range(0..8))
}

pub fn random_minplus(rng: &mut (impl Rng + ?Sized)) -> MinPlus {
    MinPlus::Finite(rng.gen_range(0..6))
}

/// A system with its input automaton, readable in either direction.
#[derive(Debug, Clone)]
pub struct Instance<E> {
    pub pds: PushdownSystem<E>,
    pub initials: Vec<StateId>,
    pub finals: Vec<StateId>,
    pub transitions: Vec<Transition>,
}

impl<E> Instance<E> {
    pub fn automaton(&self, direction: Direction) -> PAutomaton {
        PAutomaton::new(
            direction,
            self.initials.iter().cloned(),
            [],
            self.finals.iter().cloned(),
            self.transitions.iter().cloned(),
        )
        .unwrap()
    }

    /// The same system and automaton with every weight replaced.
    pub fn map<A: FlowAlgebra>(&self, alg: &A, f: impl Fn(&E) -> A::Elem) -> Instance<A::Elem> {
        let rules = self
            .pds
            .rules()
            .iter()
            .map(|r| Rule {
                from_loc: r.from_loc.clone(),
                from_sym: r.from_sym.clone(),
                to_loc: r.to_loc.clone(),
                to_word: r.to_word.clone(),
                weight: f(&r.weight),
            })
            .collect();
        Instance {
            pds: PushdownSystem::new(alg, rules)
                .unwrap()
                .with_locations(self.initials.iter().cloned())
                .with_symbols(self.pds.alphabet().iter().cloned()),
            initials: self.initials.clone(),
            finals: self.finals.clone(),
            transitions: self.transitions.clone(),
        }
    }
}

fn name(prefix: &str, i: usize) -> String {
    format!("{prefix}{i}")
}

/// Up to 3 locations, 4 symbols, 8 rules; automaton of at most 4 states.
/// With `loop_free`, a rule reading symbol `s_i` only writes symbols
/// `s_j` with `j > i`, and the automaton is acyclic, so every path set is
/// finite.
pub fn instance<A: FlowAlgebra>(
    alg: &A,
    rng: &mut impl Rng,
    loop_free: bool,
    mut weight: impl FnMut(&mut dyn rand::RngCore) -> A::Elem,
) -> Instance<A::Elem> {
    let n_loc = rng.gen_range(1..=3);
    let n_sym = rng.gen_range(1..=4);
    let n_rules = rng.gen_range(1..=8);
    let locs: Vec<String> = (0..n_loc).map(|i| name("p", i)).collect();
    let syms: Vec<String> = (0..n_sym).map(|i| name("s", i)).collect();
    let mut rules = Vec::new();
    for _ in 0..n_rules {
        let i = rng.gen_range(0..n_sym);
        let max_len = if loop_free && i + 1 == n_sym { 0 } else { 2 };
        let len = rng.gen_range(0..=max_len);
        let word: Vec<&str> = (0..len)
            .map(|_| {
                let lo = if loop_free { i + 1 } else { 0 };
                syms[rng.gen_range(lo..n_sym)].as_str()
            })
            .collect();
        let from = &locs[rng.gen_range(0..n_loc)];
        let to = &locs[rng.gen_range(0..n_loc)];
        rules.push(Rule::new(from, &syms[i], to, &word, weight(rng)));
    }
    let initials: Vec<StateId> = locs.iter().map(|l| StateId::new(l)).collect();
    let n_extra = rng.gen_range(1..=(4 - n_loc).max(1));
    let extra: Vec<StateId> = (0..n_extra).map(|i| StateId::new(&name("q", i))).collect();
    let mut finals: Vec<StateId> = extra.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
    if finals.is_empty() {
        finals.push(extra[rng.gen_range(0..n_extra)].clone());
    }
    let mut transitions = Vec::new();
    for _ in 0..rng.gen_range(1..=6) {
        let sym = syms[rng.gen_range(0..n_sym)].as_str();
        let d = rng.gen_range(0..n_extra);
        let src = if loop_free {
            // sources are control locations or strictly earlier extra states
            let k = rng.gen_range(0..n_loc + d);
            if k < n_loc { initials[k].clone() } else { extra[k - n_loc].clone() }
        } else {
            let k = rng.gen_range(0..n_loc + n_extra);
            if k < n_loc { initials[k].clone() } else { extra[k - n_loc].clone() }
        };
        transitions.push(Transition::new(src.as_str(), Some(sym), extra[d].as_str()));
    }
    let pds = PushdownSystem::new(alg, rules)
        .unwrap()
        .with_locations(initials.iter().cloned())
        .with_symbols(syms.iter().map(|s| flowpds::Symbol::new(s)));
    Instance {
        pds,
        initials,
        finals,
        transitions,
    }
}

pub fn killgen_instance(seed: u64, loop_free: bool) -> (KillGenAlgebra, Instance<KillGen>) {
    let alg = killgen3();
    let mut r = rng(seed);
    let inst = instance(&alg, &mut r, loop_free, |g| random_killgen(g));
    (alg, inst)
}

pub fn minplus_instance(seed: u64, loop_free: bool) -> Instance<MinPlus> {
    let alg = flowpds::algebra::minplus_algebra();
    let mut r = rng(seed);
    instance(&alg, &mut r, loop_free, |g| random_minplus(g))
}
