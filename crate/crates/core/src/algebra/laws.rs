//! Dynamic law checking for flow algebra instances.

use std::fmt;

use super::{AlgebraError, Carrier, FlowAlgebra};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Law {
    CombineIdempotent,
    CombineCommutative,
    CombineAssociative,
    ZeroNeutral,
    ExtendAssociative,
    OneNeutral,
    ExtendMonotone,
    LeftDistributive,
    RightDistributive,
    LeftStrict,
    RightStrict,
}

impl Law {
    pub const ALL: [Law; 11] = [
        Law::CombineIdempotent,
        Law::CombineCommutative,
        Law::CombineAssociative,
        Law::ZeroNeutral,
        Law::ExtendAssociative,
        Law::OneNeutral,
        Law::ExtendMonotone,
        Law::LeftDistributive,
        Law::RightDistributive,
        Law::LeftStrict,
        Law::RightStrict,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Law::CombineIdempotent => "combine-idempotent",
            Law::CombineCommutative => "combine-commutative",
            Law::CombineAssociative => "combine-associative",
            Law::ZeroNeutral => "zero-neutral",
            Law::ExtendAssociative => "extend-associative",
            Law::OneNeutral => "one-neutral",
            Law::ExtendMonotone => "extend-monotone",
            Law::LeftDistributive => "left-distributive",
            Law::RightDistributive => "right-distributive",
            Law::LeftStrict => "left-strict",
            Law::RightStrict => "right-strict",
        }
    }

    /// Number of quantified elements.
    fn arity(self) -> usize {
        match self {
            Law::CombineIdempotent | Law::ZeroNeutral | Law::OneNeutral | Law::LeftStrict | Law::RightStrict => 1,
            Law::CombineCommutative => 2,
            _ => 3,
        }
    }
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    /// Rendered witnesses, in quantifier order.
    pub elements: Vec<String>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// Verified on the whole carrier.
    Holds,
    /// No failure among the sampled tuples; not a proof.
    SampledOnly,
    Fails(Counterexample),
}

impl Verdict {
    pub fn failed(&self) -> bool {
        matches!(self, Verdict::Fails(_))
    }
}

/// Upper bounds on exhaustive enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LawBudget {
    pub max_pairs: usize,
    pub max_triples: usize,
}

impl Default for LawBudget {
    fn default() -> Self {
        LawBudget {
            max_pairs: 4096,
            max_triples: 32768,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawReport {
    pub algebra: String,
    pub verdicts: Vec<(Law, Verdict)>,
}

impl LawReport {
    pub fn verdict(&self, law: Law) -> &Verdict {
        &self
            .verdicts
            .iter()
            .find(|(l, _)| *l == law)
            .expect("every law is checked")
            .1
    }

    fn none_fail(&self, laws: &[Law]) -> bool {
        laws.iter().all(|&l| !self.verdict(l).failed())
    }

    pub fn is_flow_algebra(&self) -> bool {
        self.none_fail(&Law::ALL[..7])
    }

    pub fn is_distributive(&self) -> bool {
        self.none_fail(&[Law::LeftDistributive, Law::RightDistributive])
    }

    pub fn is_strict(&self) -> bool {
        self.none_fail(&[Law::LeftStrict, Law::RightStrict])
    }

    pub fn is_idempotent_semiring(&self) -> bool {
        self.is_flow_algebra() && self.is_distributive() && self.is_strict()
    }

    pub fn classification(&self) -> &'static str {
        if !self.is_flow_algebra() {
            "not a flow algebra"
        } else if self.is_idempotent_semiring() {
            "idempotent semiring"
        } else if self.is_distributive() {
            "distributive flow algebra"
        } else if self.is_strict() {
            "strict flow algebra"
        } else {
            "flow algebra"
        }
    }

    /// One line per law, then the classification.
    pub fn render(&self) -> String {
        let mut out = format!("{}\n", self.algebra);
        for (law, verdict) in &self.verdicts {
            let text = match verdict {
                Verdict::Holds => "holds".to_string(),
                Verdict::SampledOnly => "sampled-only".to_string(),
                Verdict::Fails(cx) => format!("FAILS [{}] {}", cx.elements.join("; "), cx.detail),
            };
            out.push_str(&format!("{:<20} {}\n", law.label(), text));
        }
        out.push_str(&format!("classification: {}\n", self.classification()));
        out
    }
}

pub fn check_laws<A: FlowAlgebra>(alg: &A, samples: Option<&[A::Elem]>) -> Result<LawReport, AlgebraError> {
    check_laws_with_budget(alg, samples, LawBudget::default())
}

/// Checks every law exhaustively where the carrier is enumerable and the
/// tuple count fits the budget; otherwise over tuples of samples.
///
/// Samples are always augmented with `0̄` and `1̄`.
pub fn check_laws_with_budget<A: FlowAlgebra>(
    alg: &A,
    samples: Option<&[A::Elem]>,
    budget: LawBudget,
) -> Result<LawReport, AlgebraError> {
    let carrier = match alg.carrier() {
        Carrier::Explicit(all) => Some(all),
        Carrier::Abstract => None,
    };
    let mut sampled: Vec<A::Elem> = match (samples, &carrier) {
        (Some(s), _) if !s.is_empty() => s.to_vec(),
        (_, Some(all)) => {
            // deterministic stride through the carrier
            let keep = 32.min(all.len()).max(1);
            let stride = all.len().div_ceil(keep);
            all.iter().step_by(stride).cloned().collect()
        }
        _ => return Err(AlgebraError::NoSamplesForAbstractCarrier(alg.name().to_string())),
    };
    sampled.push(alg.zero());
    sampled.push(alg.one());
    sampled.sort();
    sampled.dedup();

    let verdicts = Law::ALL
        .iter()
        .map(|&law| {
            let exhaustive = carrier.as_ref().filter(|all| {
                let n = all.len();
                match law.arity() {
                    1 | 2 => n.saturating_mul(n) <= budget.max_pairs,
                    _ => n.saturating_mul(n).saturating_mul(n) <= budget.max_triples,
                }
            });
            let elems = exhaustive.map(Vec::as_slice).unwrap_or(&sampled);
            let verdict = match find_violation(alg, law, elems) {
                Some(cx) => Verdict::Fails(cx),
                None if exhaustive.is_some() => Verdict::Holds,
                None => Verdict::SampledOnly,
            };
            (law, verdict)
        })
        .collect();
    Ok(LawReport {
        algebra: alg.header(),
        verdicts,
    })
}

fn find_violation<A: FlowAlgebra>(alg: &A, law: Law, elems: &[A::Elem]) -> Option<Counterexample> {
    let r = |e: &A::Elem| alg.render(e);
    let cx = |xs: &[&A::Elem], detail: String| Counterexample {
        elements: xs.iter().map(|e| r(e)).collect(),
        detail,
    };
    let zero = alg.zero();
    let one = alg.one();
    match law.arity() {
        1 => elems.iter().find_map(|a| {
            let (lhs, rhs, what) = match law {
                Law::CombineIdempotent => (alg.combine(a, a), a.clone(), "a ⊕ a"),
                Law::ZeroNeutral => (alg.combine(a, &zero), a.clone(), "a ⊕ 0̄"),
                Law::OneNeutral => {
                    let left = alg.extend(&one, a);
                    if left != *a {
                        return Some(cx(&[a], format!("1̄ ⊗ a = {} ≠ a", r(&left))));
                    }
                    (alg.extend(a, &one), a.clone(), "a ⊗ 1̄")
                }
                Law::LeftStrict => (alg.extend(&zero, a), zero.clone(), "0̄ ⊗ a"),
                Law::RightStrict => (alg.extend(a, &zero), zero.clone(), "a ⊗ 0̄"),
                _ => unreachable!(),
            };
            (lhs != rhs).then(|| cx(&[a], format!("{what} = {} ≠ {}", r(&lhs), r(&rhs))))
        }),
        2 => elems.iter().find_map(|a| {
            elems.iter().find_map(|b| {
                let (ab, ba) = (alg.combine(a, b), alg.combine(b, a));
                (ab != ba).then(|| cx(&[a, b], format!("a ⊕ b = {} ≠ b ⊕ a = {}", r(&ab), r(&ba))))
            })
        }),
        _ => elems.iter().find_map(|a| {
            elems.iter().find_map(|b| {
                elems.iter().find_map(|c| {
                    let triple = [a, b, c];
                    match law {
                        Law::CombineAssociative => {
                            let lhs = alg.combine(&alg.combine(a, b), c);
                            let rhs = alg.combine(a, &alg.combine(b, c));
                            (lhs != rhs).then(|| {
                                cx(&triple, format!("(a ⊕ b) ⊕ c = {} ≠ a ⊕ (b ⊕ c) = {}", r(&lhs), r(&rhs)))
                            })
                        }
                        Law::ExtendAssociative => {
                            let lhs = alg.extend(&alg.extend(a, b), c);
                            let rhs = alg.extend(a, &alg.extend(b, c));
                            (lhs != rhs).then(|| {
                                cx(&triple, format!("(a ⊗ b) ⊗ c = {} ≠ a ⊗ (b ⊗ c) = {}", r(&lhs), r(&rhs)))
                            })
                        }
                        Law::ExtendMonotone => {
                            if !alg.leq(a, b) {
                                return None;
                            }
                            let (ac, bc) = (alg.extend(a, c), alg.extend(b, c));
                            if !alg.leq(&ac, &bc) {
                                return Some(cx(
                                    &triple,
                                    format!("a ⊑ b but a ⊗ c = {} ⋢ b ⊗ c = {}", r(&ac), r(&bc)),
                                ));
                            }
                            let (ca, cb) = (alg.extend(c, a), alg.extend(c, b));
                            (!alg.leq(&ca, &cb)).then(|| {
                                cx(&triple, format!("a ⊑ b but c ⊗ a = {} ⋢ c ⊗ b = {}", r(&ca), r(&cb)))
                            })
                        }
                        Law::LeftDistributive => {
                            let lhs = alg.extend(a, &alg.combine(b, c));
                            let rhs = alg.combine(&alg.extend(a, b), &alg.extend(a, c));
                            (lhs != rhs).then(|| {
                                cx(
                                    &triple,
                                    format!("a ⊗ (b ⊕ c) = {} ≠ (a ⊗ b) ⊕ (a ⊗ c) = {}", r(&lhs), r(&rhs)),
                                )
                            })
                        }
                        Law::RightDistributive => {
                            let lhs = alg.extend(&alg.combine(a, b), c);
                            let rhs = alg.combine(&alg.extend(a, c), &alg.extend(b, c));
                            (lhs != rhs).then(|| {
                                cx(
                                    &triple,
                                    format!("(a ⊕ b) ⊗ c = {} ≠ (a ⊗ c) ⊕ (b ⊗ c) = {}", r(&lhs), r(&rhs)),
                                )
                            })
                        }
                        _ => unreachable!(),
                    }
                })
            })
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{
        boolean_algebra, killgen_algebra, minplus_algebra, tabulated_framework_algebra, Lattice, MinPlus,
        Table,
    };

    #[test]
    fn killgen_over_two_facts() {
        let alg = killgen_algebra(["x", "y"]).unwrap();
        let report = check_laws(&alg, None).unwrap();
        for law in [
            Law::CombineIdempotent,
            Law::CombineCommutative,
            Law::CombineAssociative,
            Law::ZeroNeutral,
            Law::ExtendAssociative,
            Law::OneNeutral,
            Law::ExtendMonotone,
            Law::LeftDistributive,
            Law::RightDistributive,
            Law::RightStrict,
        ] {
            assert_eq!(report.verdict(law), &Verdict::Holds, "{law}");
        }
        let Verdict::Fails(cx) = report.verdict(Law::LeftStrict) else {
            panic!("left strictness must fail")
        };
        // first counterexample in carrier order: 0̄ ⊗ (∅,{x}) = (D,{x})
        assert_eq!(cx.elements, vec!["kill={} gen={x}".to_string()]);
        assert!(cx.detail.contains("kill={x,y} gen={x}"), "{}", cx.detail);
        assert_eq!(report.classification(), "distributive flow algebra");
        assert!(!report.is_idempotent_semiring());
    }

    #[test]
    fn boolean_is_a_semiring() {
        let report = check_laws(&boolean_algebra(), None).unwrap();
        assert!(report.verdicts.iter().all(|(_, v)| *v == Verdict::Holds));
        assert!(report.is_idempotent_semiring());
    }

    #[test]
    fn minplus_needs_samples() {
        let alg = minplus_algebra();
        assert!(matches!(
            check_laws(&alg, None),
            Err(AlgebraError::NoSamplesForAbstractCarrier(_))
        ));
        let samples: Vec<MinPlus> = [0, 1, 2, 5].map(MinPlus::Finite).into_iter().chain([MinPlus::Infinity]).collect();
        let report = check_laws(&alg, Some(&samples)).unwrap();
        assert!(report.verdicts.iter().all(|(_, v)| *v == Verdict::SampledOnly));
        assert!(report.is_idempotent_semiring());
    }

    #[test]
    fn non_distributive_tabulated() {
        let diamond = Lattice::from_order(
            &["bot", "a", "b", "top"],
            &[("bot", "a"), ("bot", "b"), ("a", "top"), ("b", "top")],
        )
        .unwrap();
        // f(a ⊔ b) = top but f(a) ⊔ f(b) = bot
        let f = Table(vec![0, 0, 0, 3]);
        let alg = tabulated_framework_algebra(diamond, &[f, Table(vec![1; 4]), Table(vec![2; 4])]).unwrap();
        let report = check_laws(&alg, None).unwrap();
        assert!(report.is_flow_algebra());
        assert!(!report.is_distributive());
        assert!(report.verdict(Law::RightDistributive).failed());
    }

    #[test]
    fn large_explicit_carrier_is_sampled_for_triples() {
        let alg = killgen_algebra(["a", "b", "c"]).unwrap();
        let report = check_laws(&alg, None).unwrap();
        assert_eq!(report.verdict(Law::CombineCommutative), &Verdict::Holds);
        assert_eq!(report.verdict(Law::LeftDistributive), &Verdict::SampledOnly);
        assert!(report.render().contains("classification: distributive flow algebra"));
    }
}
