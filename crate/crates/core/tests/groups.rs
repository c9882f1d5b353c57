use lnfree::amalgam::{AutWord, Gf2Vector};
use lnfree::blackbox::{BlackBoxGroup, Element};
use lnfree::epi::{build_epi, EpiOptions};
use lnfree::fixtures;
use lnfree::varieties::{evaluate_law, Law, VarietyChain};
use lnfree::word::{Alphabet, GeneratorId, Word};
use num_bigint::BigInt;
use proptest::prelude::*;

fn eval(g: &BlackBoxGroup, w: &Word) -> Element {
    let images: Vec<Element> = g.generators().iter().map(|(_, e)| e.clone()).collect();
    w.evaluate(&images, g.identity(), |a, b| g.mul(a, b), |a| g.inverse(a))
}

fn word(a: &Alphabet, raw: &[(u8, i8)]) -> Word {
    let syl = raw
        .iter()
        .filter(|(_, e)| *e != 0)
        .map(|&(g, e)| (GeneratorId(u32::from(g) % a.len() as u32), BigInt::from(e)));
    Word::from_syllables(a, syl).unwrap()
}

const SMALL: [&str; 5] = ["d4", "q8", "d16", "s3", "s4"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn word_operations_commute_with_evaluation(
        which in 0usize..SMALL.len(),
        u in proptest::collection::vec((0u8..4, -3i8..4), 0..8),
        v in proptest::collection::vec((0u8..4, -3i8..4), 0..8),
    ) {
        let g = fixtures::group(SMALL[which]).unwrap();
        let a = Alphabet::new(g.generator_names()).unwrap();
        let (u, v) = (word(&a, &u), word(&a, &v));
        let (eu, ev) = (eval(&g, &u), eval(&g, &v));
        prop_assert_eq!(eval(&g, &u.multiply(&v).unwrap()), g.mul(&eu, &ev));
        prop_assert_eq!(eval(&g, &u.invert()), g.inverse(&eu));
        prop_assert_eq!(eval(&g, &u.commutator(&v).unwrap()), g.commutator(&eu, &ev));
        prop_assert_eq!(eval(&g, &u.conjugate(&v).unwrap()), g.conjugate(&eu, &ev));
    }

    #[test]
    fn laws_commute_with_substitution(
        which in 0usize..SMALL.len(),
        m in 1usize..4,
        args in proptest::collection::vec(proptest::collection::vec((0u8..4, -2i8..3), 0..5), 4),
    ) {
        let g = fixtures::group(SMALL[which]).unwrap();
        let a = Alphabet::new(g.generator_names()).unwrap();
        for law in [Law::left_normed(m), Law::derived(m.min(2)), Law::power(m as u64 + 1)] {
            let ws: Vec<Word> = args.iter().take(law.arity()).map(|r| word(&a, r)).collect();
            let vals: Vec<Element> = ws.iter().map(|w| eval(&g, w)).collect();
            let direct = evaluate_law(&law, &g, &vals).unwrap();
            prop_assert_eq!(eval(&g, &law.instantiate(&ws).unwrap()), direct);
        }
    }

    #[test]
    fn automorphism_equality_is_action_equality(
        x in proptest::collection::vec(0u8..2, 0..10),
        y in proptest::collection::vec(0u8..2, 0..10),
    ) {
        let (a, b) = (AutWord::from_letters(&x), AutWord::from_letters(&y));
        let same_action = (0..=64).all(|n| {
            let v = Gf2Vector::basis(n);
            a.apply_naive(&v) == b.apply_naive(&v)
        });
        prop_assert_eq!(a == b, same_action);
        prop_assert!(a.then(&a.inverse()).is_identity());
    }
}

#[test]
fn class_is_monotone_on_subsets() {
    for name in ["d4", "q8", "d16", "c2xc2", "trivial"] {
        let g = fixtures::group(name).unwrap();
        let r = g.generators().len();
        for v in 0..(1u64 << r) {
            let cv = g.nilpotency_class(&g.mask_elements(v)).unwrap();
            for u in (0..(1u64 << r)).filter(|u| u & !v == 0) {
                let cu = g.nilpotency_class(&g.mask_elements(u)).unwrap();
                assert!(cu <= cv, "{name}: mask {u:b} has class {cu} > {cv} of {v:b}");
            }
        }
    }
}

#[test]
fn series_descend_and_are_normal() {
    for name in ["d4", "q8", "d16", "s3", "s4"] {
        let g = fixtures::group(name).unwrap();
        let gens = g.mask_elements(u64::MAX);
        let h = g.subgroup_closure(&gens).unwrap();
        for series in [g.lower_central_series(&gens).unwrap(), g.derived_series(&gens).unwrap()] {
            for pair in series.windows(2) {
                assert!(pair[1].len() < pair[0].len(), "{name}: not strictly descending");
                assert!(pair[1].elements().iter().all(|e| pair[0].contains(e)));
            }
            for term in &series {
                for x in term.elements() {
                    for y in h.generators() {
                        assert!(term.contains(&g.conjugate(x, y)), "{name}: term not normal");
                    }
                }
            }
        }
    }
}

#[test]
fn nilpotent_chain_matches_class() {
    let chain = VarietyChain::nilpotent();
    for name in ["d4", "q8", "d16", "c2xc2"] {
        let g = fixtures::group(name).unwrap();
        let u = g.mask_elements(u64::MAX);
        assert_eq!(
            lnfree::varieties::min_variety_index(&g, &u, &chain).unwrap(),
            g.nilpotency_class(&u).unwrap()
        );
    }
}

#[test]
fn every_nilpotent_fixture_is_an_epimorphic_image() {
    for name in ["d4", "q8", "d16", "c2xc2", "trivial"] {
        let g = fixtures::group(name).unwrap();
        let e = build_epi(&g, &EpiOptions { samples: 200, ..EpiOptions::default() }).unwrap();
        assert!(e.report.passed(), "{name}: {:?}", e.report);
    }
}
