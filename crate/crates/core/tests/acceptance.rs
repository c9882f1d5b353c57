//! Acceptance suite: one PASS/FAIL line per criterion, each with its own
//! time limit. Run with `cargo test --test acceptance`.

use std::sync::Arc;
use std::time::{Duration, Instant};

use lnfree::amalgam::{self, Branch};
use lnfree::collect::Collector;
use lnfree::epi::{build_epi, epi_family, EpiOptions};
use lnfree::fixtures;
use lnfree::hall::{enumerate_basis, HallBasis, HallConfig};
use lnfree::magnus::equal_mod_gamma;
use lnfree::pseudofree::{joint_embed, split, verify_summand, verify_torsion_free};
use lnfree::report::trial_rng;
use lnfree::varieties::{epi_lv, min_variety_index, VarietyChain};
use lnfree::word::{Alphabet, Word};
use lnfree::Result;

const SEED: u64 = 0;

type Outcome = Result<(bool, String)>;

fn mobius(n: usize) -> i64 {
    let (mut n, mut k, mut sign) = (n, 2, 1);
    while k * k <= n {
        if n % k == 0 {
            n /= k;
            if n % k == 0 {
                return 0;
            }
            sign = -sign;
        }
        k += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// Witt's formula for the rank of the weight-`n` layer of the free Lie ring.
fn witt(r: usize, n: usize) -> usize {
    let s: i64 = (1..=n).filter(|d| n % d == 0).map(|d| mobius(d) * (r as i64).pow((n / d) as u32)).sum();
    (s / n as i64) as usize
}

fn c1_hall() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (r, w, expect) in [(2, 6, vec![2, 1, 2, 3, 6, 9]), (3, 4, vec![3, 3, 8, 18])] {
        let sizes = enumerate_basis(r, w)?.layer_sizes();
        let oracle: Vec<usize> = (1..=w).map(|n| witt(r, n)).collect();
        ok &= sizes == expect && sizes == oracle;
        detail.push(format!("r={r}: {sizes:?}"));
    }
    Ok((ok, detail.join(", ")))
}

fn c2_normal_forms() -> Outcome {
    let mut checked = 0;
    let mut bad = 0;
    for r in [2, 3] {
        let a = Alphabet::standard(r);
        let basis = Arc::new(HallBasis::over(&a, 5, &HallConfig::default())?);
        let collectors: Vec<Collector> = (1..=5).map(|n| Collector::new(basis.clone(), n)).collect::<Result<_>>()?;
        for i in 0..300 {
            let mut rng = trial_rng(SEED, "acceptance-nf", (r * 1000 + i) as u64);
            let w = Word::random(&a, (1 << r) - 1, 12, &mut rng);
            let class = 1 + i % 5;
            let nf = collectors[class - 1].normal_form(&w)?;
            if !equal_mod_gamma(&nf.to_word(), &w, class) {
                bad += 1;
            }
            if class > 1 {
                let lower = collectors[class - 2].normal_form(&w)?;
                let k = basis.prefix_len(class - 1);
                if lower.exponents()[..k] != nf.exponents()[..k] {
                    bad += 1;
                }
            }
            checked += 1;
        }
    }
    Ok((bad == 0 && checked >= 500, format!("{checked} words, {bad} mismatches")))
}

fn c3_deep_commutators() -> Outcome {
    let mut bad = 0;
    let mut total = 0;
    for n in 1..=4 {
        let a = Alphabet::standard(3);
        let basis = Arc::new(HallBasis::over(&a, n, &HallConfig::default())?);
        let collector = Collector::new(basis, n)?;
        for i in 0..25 {
            let mut rng = trial_rng(SEED, "acceptance-deep", (n * 100 + i) as u64);
            let parts: Vec<Word> = (0..=n).map(|_| Word::random(&a, 7, 4, &mut rng)).collect();
            let c = Word::left_normed(&parts)?;
            if !collector.normal_form(&c)?.is_zero() {
                bad += 1;
            }
            total += 1;
        }
    }
    Ok((bad == 0, format!("{total} commutators, {bad} nonzero")))
}

fn c4_relator_kill() -> Outcome {
    let p1 = fixtures::preset("p1")?;
    let p2 = fixtures::preset("p2")?;
    let joint = joint_embed(&[p1.clone(), p2.clone()])?.preset;
    let mut detail = Vec::new();
    let mut ok = true;
    for (name, p) in [("P1", &p1), ("P2", &p2), ("joint", &joint)] {
        let mut nonzero = 0;
        for r in p.relator_generators(200, 4, SEED) {
            if !p.nf_fr(&r.word)?.is_zero() {
                nonzero += 1;
            }
        }
        ok &= nonzero == 0;
        detail.push(format!("{name}: {nonzero}/200 nonzero"));
    }
    Ok((ok, detail.join(", ")))
}

fn c5_summand() -> Outcome {
    let p2 = fixtures::preset("p2")?;
    let mut ok = true;
    let mut detail = Vec::new();
    for n in [1, 2] {
        let r = verify_summand(&p2, n, 200, SEED)?;
        ok &= r.passed() && !r.vacuous;
        detail.push(format!("layer {n}: {:?}", r.status));
    }
    Ok((ok, detail.join(", ")))
}

fn c6_torsion() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for name in fixtures::PRESETS {
        let p = fixtures::preset(name)?;
        let r = verify_torsion_free(&p, 100, 8, SEED)?;
        ok &= r.passed() && !r.vacuous;
        detail.push(format!("{name}: {:?}", r.status));
    }
    Ok((ok, detail.join(", ")))
}

fn c7_split() -> Outcome {
    let p2 = fixtures::preset("p2")?;
    let p1 = p2.restrict(&["a", "b"])?;
    let r = split(&p2, &p1, 100, SEED)?;
    let failed: Vec<&str> = r.checks.iter().filter(|c| !c.status.passed()).map(|c| c.name.as_str()).collect();
    Ok((r.passed(), format!("{} checks, failed {failed:?}", r.checks.len())))
}

fn c8_epi() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for name in ["d4", "q8", "d16", "c2xc2"] {
        let g = fixtures::group(name)?;
        let e = build_epi(&g, &EpiOptions { seed: SEED, ..EpiOptions::default() })?;
        let exhaustive = e.report.check("exhaustive-commutators-die").is_some_and(|c| c.status.passed() && c.trials > 0);
        let tf = e.report.check("preset-torsion-free").is_some_and(|c| c.status.passed());
        ok &= e.report.passed() && exhaustive && tf;
        detail.push(format!("{name}: c(M)={}", e.weights.value(e.weights.full_mask())));
    }
    Ok((ok, detail.join(", ")))
}

fn c9_family() -> Outcome {
    let gs = [fixtures::group("d4")?, fixtures::group("q8")?];
    let f = epi_family(&gs, &EpiOptions { samples: 200, seed: SEED, ..EpiOptions::default() })?;
    let pu = &f.joint.as_ref().expect("nonempty family").preset;
    let top = pu.weights().value(pu.weights().full_mask());
    Ok((f.report.passed() && pu.alphabet().len() == 4 && top == 4, format!("joint preset on 4 generators, c(M)={top}")))
}

fn c10_amalgam() -> Outcome {
    let mut ok = amalgam::relations_check(64).passed();
    ok &= amalgam::descent_chain(32).passed();
    let star = amalgam::star_identity(20);
    ok &= star.passed() && star.check("k1-value").is_some_and(|c| c.status.passed());
    ok &= amalgam::star_element(1) == amalgam::HolElement::translation(amalgam::Gf2Vector::from_indices([0, 1]));
    let mut orders = Vec::new();
    for k in [1, 3, 5, 7, 9] {
        let (n, r) = amalgam::truncated_order(k)?;
        ok &= r.passed() && n == 1 << (k + 2);
        orders.push(n);
    }
    Ok((ok, format!("truncated orders {orders:?}")))
}

fn branch(prefix: &[&str], period: &[&str], epsilon: u8) -> Branch {
    Branch {
        prefix: prefix.iter().map(|s| s.to_string()).collect(),
        period: period.iter().map(|s| s.to_string()).collect(),
        epsilon,
    }
}

fn c11_branches() -> Outcome {
    let two = [branch(&["a"], &["b"], 0), branch(&["c"], &["c", "d"], 1)];
    let three = [branch(&["a", "a"], &["b"], 0), branch(&["a", "b", "c"], &["d"], 1), branch(&["b"], &["a", "b"], 0)];
    let mut ok = true;
    let mut detail = Vec::new();
    for (set, k) in [(&two[..], 1), (&three[..], 3)] {
        let a = amalgam::branch_group_check(set, Some(k))?;
        ok &= a.report.passed() && a.w_star.is_power_of_two() && a.window_order as u128 <= a.bound;
        detail.push(format!("{} branches: |W*|={} bound {}", set.len(), a.w_star, a.bound));
    }
    Ok((ok, detail.join(", ")))
}

fn c12_varieties() -> Outcome {
    let chains = [VarietyChain::nilpotent(), VarietyChain::solvable(), VarietyChain::exponent(vec![1, 2, 4, 8, 16, 32, 64, 128, 256])?];
    for c in &chains {
        c.validate_descent()?;
    }
    let nil = &chains[0];
    let mut ok = true;
    for name in ["d4", "q8", "d16", "c2xc2", "trivial"] {
        let g = fixtures::group(name)?;
        for mask in 1..(1u64 << g.generators().len()) {
            let u = g.mask_elements(mask);
            ok &= min_variety_index(&g, &u, nil)? == g.nilpotency_class(&u)?;
        }
    }
    let s4 = fixtures::group("s4")?;
    let lv = epi_lv(&s4, &chains[1], 200, SEED)?;
    ok &= lv.report.passed() && lv.weights.value(lv.weights.full_mask()) == 3;
    let d4 = fixtures::group("d4")?;
    let lv = epi_lv(&d4, nil, 200, SEED)?;
    let e = build_epi(&d4, &EpiOptions { samples: 100, ..EpiOptions::default() })?;
    ok &= lv.report.passed() && (1..4).all(|m| lv.weights.value(m) == e.weights.value(m));
    Ok((ok, "descent, nilpotent indices, S4 solvable, D4 cross-check".into()))
}

fn c13_determinism() -> Outcome {
    let run = || -> Result<String> {
        let p2 = fixtures::preset("p2")?;
        let mut out = serde_json::to_string(&verify_summand(&p2, 2, 100, SEED)?).unwrap();
        out += &serde_json::to_string(&split(&p2, &p2.restrict(&["a", "b"])?, 50, SEED)?).unwrap();
        let e = build_epi(&fixtures::group("q8")?, &EpiOptions { samples: 100, ..EpiOptions::default() })?;
        out += &serde_json::to_string(&e.report).unwrap();
        out += &serde_json::to_string(&amalgam::aut_equality_check(100, SEED)).unwrap();
        Ok(out)
    };
    let a = run()?;
    let b = run()?;
    Ok((a == b, format!("{} bytes compared", a.len())))
}

fn main() {
    let criteria: [(&str, u64, fn() -> Outcome); 13] = [
        ("Hall layer sizes", 5, c1_hall),
        ("normal-form soundness", 60, c2_normal_forms),
        ("deep commutators vanish", 10, c3_deep_commutators),
        ("relators reduce to zero", 60, c4_relator_kill),
        ("direct summand layers", 30, c5_summand),
        ("torsion-free presets", 120, c6_torsion),
        ("splitting", 30, c7_split),
        ("epimorphisms", 120, c8_epi),
        ("finite epi-universality", 60, c9_family),
        ("holomorph construction", 30, c10_amalgam),
        ("branch local finiteness", 30, c11_branches),
        ("variety chains", 60, c12_varieties),
        ("determinism", 60, c13_determinism),
    ];
    let mut failures = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let in_time = elapsed < Duration::from_secs(*limit);
        let (ok, detail) = match outcome {
            Ok((ok, d)) => (ok && in_time, d),
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failures += 1;
        }
        println!(
            "criterion {:>2} {}: {} ({:.2}s, limit {}s) {}",
            i + 1,
            name,
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit,
            detail
        );
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
