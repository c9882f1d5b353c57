//! Epimorphisms from pseudo-free presets onto finite nilpotent groups: the
//! weight function of a group is the nilpotency class of each generated
//! subgroup, and `x_i ↦ y_i` kills every relator.

use std::collections::HashMap;

use crate::blackbox::{BlackBoxGroup, Element};
use crate::error::{Error, Result};
use crate::pseudofree::{joint_embed, split, verify_torsion_free, JointEmbedding, Preset, WeightFunction};
use crate::report::{trial_rng, Check, Report, MAX_WITNESSES};
use crate::word::{Alphabet, GeneratorId, Word};

/// Largest generator set for which every subset is examined.
pub const MAX_EPI_GENERATORS: usize = 5;
/// Exhaustive commutator checks run while `|G_U|^(n+1)` stays below this.
pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;

#[derive(Clone, Copy, Debug)]
pub struct EpiOptions {
    pub samples: usize,
    pub length_bound: usize,
    pub torsion_trials: usize,
    pub max_power: u32,
    pub seed: u64,
}

impl Default for EpiOptions {
    fn default() -> Self {
        EpiOptions { samples: 500, length_bound: 6, torsion_trials: 40, max_power: 4, seed: 0 }
    }
}

fn group_alphabet(g: &BlackBoxGroup) -> Result<Alphabet> {
    Alphabet::new(g.generator_names())
}

fn mask_names(g: &BlackBoxGroup, mask: u64) -> String {
    let names = g.generator_names();
    let parts: Vec<&str> =
        names.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, n)| n.as_str()).collect();
    parts.join(",")
}

/// `c_G(U)`, the nilpotency class of `⟨y_i : i ∈ U⟩`, for every `U`.
pub fn weight_of(g: &BlackBoxGroup) -> Result<WeightFunction> {
    let r = g.generators().len();
    if r > MAX_EPI_GENERATORS {
        return Err(Error::BoundExceeded { what: "generator count".into(), limit: MAX_EPI_GENERATORS });
    }
    let alphabet = group_alphabet(g)?;
    let mut assigned = Vec::new();
    for mask in 1..(1u64 << r) {
        let c = match g.nilpotency_class(&g.mask_elements(mask)) {
            Ok(c) => c,
            Err(Error::NotNilpotent(_)) => {
                return Err(Error::NotNilpotent(mask_names(g, mask)))
            }
            Err(e) => return Err(e),
        };
        assigned.push((mask, c as u32));
    }
    WeightFunction::new(&alphabet, &assigned)
}

/// Elements of `⟨y_i : i ∈ mask⟩`, each with a word producing it.
fn closure_with_words(g: &BlackBoxGroup, alphabet: &Alphabet, mask: u64) -> Result<Vec<(Element, Word)>> {
    let gens: Vec<(usize, Element)> =
        g.generators().iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(i, (_, e))| (i, e.clone())).collect();
    let mut seen: HashMap<Element, usize> = HashMap::new();
    let mut out = vec![(g.identity(), Word::identity(alphabet))];
    seen.insert(g.identity(), 0);
    let mut head = 0;
    while head < out.len() {
        let (x, w) = out[head].clone();
        head += 1;
        for (i, s) in &gens {
            let y = g.mul(&x, s);
            if !seen.contains_key(&y) {
                if out.len() >= g.bound() {
                    return Err(Error::BoundExceeded { what: "subgroup order".into(), limit: g.bound() });
                }
                let wy = w.multiply(&Word::generator(alphabet, GeneratorId(*i as u32)))?;
                seen.insert(y.clone(), out.len());
                out.push((y, wy));
            }
        }
    }
    Ok(out)
}

/// Distinct values of left-normed commutators `[g_1, …, g_t]` over the
/// subgroup, for `t = 1, 2, …, t_max`, each with its least producing tuple.
fn commutator_layers(
    g: &BlackBoxGroup,
    elems: &[(Element, Word)],
    t_max: usize,
) -> Vec<HashMap<Element, Vec<usize>>> {
    let mut layers = Vec::new();
    let first: HashMap<Element, Vec<usize>> = elems.iter().enumerate().map(|(i, (e, _))| (e.clone(), vec![i])).collect();
    layers.push(first);
    for _ in 1..t_max {
        let prev = layers.last().unwrap();
        let mut next: HashMap<Element, Vec<usize>> = HashMap::new();
        for (v, tuple) in prev {
            for (j, (e, _)) in elems.iter().enumerate() {
                let mut t = tuple.clone();
                t.push(j);
                // keep the least producing tuple so witnesses do not depend
                // on hash order
                next.entry(g.commutator(v, e)).and_modify(|old| if t < *old { *old = t.clone() }).or_insert(t);
            }
        }
        layers.push(next);
    }
    layers
}

fn tuple_word(elems: &[(Element, Word)], tuple: &[usize]) -> String {
    let parts: Vec<String> = tuple.iter().map(|&i| format!("({})", elems[i].1)).collect();
    format!("[{}]", parts.join(", "))
}

#[derive(Clone, Debug)]
pub struct EpiReport {
    pub weights: WeightFunction,
    pub preset: Preset,
    pub report: Report,
}

/// Builds `Fr(I, c_G) → G`, `x_i ↦ y_i`, and checks that it is onto, that
/// relators die and that every value `c_G(U)` is attained.
pub fn build_epi(g: &BlackBoxGroup, opts: &EpiOptions) -> Result<EpiReport> {
    let weights = weight_of(g)?;
    let preset = Preset::new(weights.clone())?;
    let alphabet = preset.alphabet().clone();
    let images: Vec<Element> = g.generators().iter().map(|(_, e)| e.clone()).collect();
    let eval = |w: &Word| w.evaluate(&images, g.identity(), |a, b| g.mul(a, b), |a| g.inverse(a));
    let mut report = Report::new("epimorphism", opts.seed);

    let all = g.closure_of_generators()?;
    let onto = g.universe_size().is_none_or(|n| n == all.len());
    report.push(Check::new("surjective", onto, 1).detail(format!(
        "generators produce {} of {} elements",
        all.len(),
        g.universe_size().unwrap_or(all.len())
    )));

    let mut dead = Vec::new();
    for r in preset.relator_generators(opts.samples, opts.length_bound, opts.seed) {
        if !g.is_identity(&eval(&r.word)) {
            dead.push(format!("{} over {{{}}}", r.word, r.subset.join(",")));
        }
    }
    report.push(
        Check::new("sampled-relators-die", dead.is_empty(), opts.samples)
            .witnesses(dead.into_iter().take(MAX_WITNESSES).collect()),
    );

    let r = alphabet.len();
    let mut exhaustive_bad = Vec::new();
    let mut sharp_bad = Vec::new();
    let mut sharp_witnesses = Vec::new();
    let mut exhaustive_sets = 0;
    let mut skipped = Vec::new();
    for mask in 1..(1u64 << r) {
        let n = weights.value(mask) as usize;
        let elems = closure_with_words(g, &alphabet, mask)?;
        let tuples = (elems.len() as u128).checked_pow(n as u32 + 1).unwrap_or(u128::MAX);
        let exhaustive = tuples <= EXHAUSTIVE_LIMIT;
        let layers = commutator_layers(g, &elems, if exhaustive { n + 1 } else { n.max(1) });
        if exhaustive {
            exhaustive_sets += 1;
            if let Some((v, t)) = layers[n].iter().filter(|(v, _)| !g.is_identity(v)).min_by_key(|(_, t)| (*t).clone()) {
                exhaustive_bad.push(format!("{} = {v:?}", tuple_word(&elems, t)));
            }
        } else {
            skipped.push(mask_names(g, mask));
        }
        if n >= 1 {
            match layers[n - 1].iter().filter(|(v, _)| !g.is_identity(v)).min_by_key(|(_, t)| (*t).clone()) {
                Some((_, t)) => sharp_witnesses.push(format!("c({{{}}}) = {n}: {} != 1", mask_names(g, mask), tuple_word(&elems, t))),
                None => sharp_bad.push(format!("{{{}}}", mask_names(g, mask))),
            }
        }
    }
    let mut check = Check::new("exhaustive-commutators-die", exhaustive_bad.is_empty(), exhaustive_sets)
        .witnesses(exhaustive_bad.into_iter().take(MAX_WITNESSES).collect());
    if !skipped.is_empty() {
        check = check.detail(format!("skipped (too large): {}", skipped.join("; ")));
    }
    report.push(check);
    report.push(
        Check::new("sharp", sharp_bad.is_empty(), sharp_witnesses.len() + sharp_bad.len())
            .detail(sharp_witnesses.join("; "))
            .witnesses(sharp_bad),
    );

    // an epimorphic image of a torsion-free group, itself full of torsion
    let tf = verify_torsion_free(&preset, opts.torsion_trials, opts.max_power, opts.seed)?;
    report.push(
        Check::new("preset-torsion-free", tf.passed(), opts.torsion_trials)
            .detail(tf.checks.first().map(|c| c.detail.clone()).unwrap_or_default()),
    );
    let torsion = images.iter().zip(g.generator_names()).find(|(e, _)| !g.is_identity(e));
    match torsion {
        Some((e, name)) => report.note(format!(
            "{name} has order {} in G, so the torsion-free Fr(I, c_G) maps onto a group with torsion",
            g.element_order(e)?
        )),
        None => report.note("G is trivial"),
    }
    report.vacuous = tf.vacuous && preset.class_bound() == 0;
    Ok(EpiReport { weights, preset, report })
}

#[derive(Clone, Debug)]
pub struct FamilyReport {
    pub joint: Option<JointEmbedding>,
    pub report: Report,
}

/// For finitely many groups, one preset mapping onto each: the joint
/// embedding of their presets, followed by the split projection and the
/// individual epimorphism.
pub fn epi_family(groups: &[BlackBoxGroup], opts: &EpiOptions) -> Result<FamilyReport> {
    let mut report = Report::new("epimorphism family", opts.seed);
    if groups.is_empty() {
        report.vacuous = true;
        report.note("empty family: the empty preset maps onto every member");
        return Ok(FamilyReport { joint: None, report });
    }
    let mut epis = Vec::new();
    for g in groups {
        epis.push(build_epi(g, opts)?);
    }
    let presets: Vec<Preset> = epis.iter().map(|e| e.preset.clone()).collect();
    let joint = joint_embed(&presets)?;
    let pu = &joint.preset;
    report.note(format!(
        "joint preset on {} generators with c(M) = {}",
        pu.alphabet().len(),
        pu.weights().value(pu.weights().full_mask())
    ));
    for (j, (g, epi)) in groups.iter().zip(&epis).enumerate() {
        let tag = format!("G{j}");
        for c in &epi.report.checks {
            let mut c = c.clone();
            c.name = format!("{tag} {}", c.name);
            report.push(c);
        }
        let component = joint.component(j)?;
        let s = split(pu, &component, opts.samples.min(100), opts.seed)?;
        for c in s.checks {
            let mut c = c;
            c.name = format!("{tag} split {}", c.name);
            report.push(c);
        }
        // the composite: project onto component j, rename, evaluate in G_j
        let images: Vec<Element> = g.generators().iter().map(|(_, e)| e.clone()).collect();
        let names = &joint.components[j];
        let comp_alpha = component.alphabet();
        let reorder: Vec<Element> = comp_alpha
            .names()
            .iter()
            .map(|n| images[names.iter().position(|m| m == n).expect("component name")].clone())
            .collect();
        let composite =
            |w: &Word| w.project(comp_alpha).evaluate(&reorder, g.identity(), |a, b| g.mul(a, b), |a| g.inverse(a));
        let mut bad = Vec::new();
        for r in pu.relator_generators(opts.samples, opts.length_bound, opts.seed ^ j as u64) {
            if !g.is_identity(&composite(&r.word)) {
                bad.push(r.word.to_string());
            }
        }
        report.push(
            Check::new(format!("{tag} composite-kills-relators"), bad.is_empty(), opts.samples)
                .witnesses(bad.into_iter().take(MAX_WITNESSES).collect()),
        );
        let gen_images: Vec<Element> = pu
            .alphabet()
            .names()
            .iter()
            .map(|n| composite(&Word::generator(pu.alphabet(), pu.alphabet().lookup(n).unwrap())))
            .collect();
        let reached = g.subgroup_closure(&gen_images)?.len();
        let full = g.closure_of_generators()?.len();
        report.push(
            Check::new(format!("{tag} composite-surjective"), reached == full, 1)
                .detail(format!("{reached} of {full} elements")),
        );
        let mut rng = trial_rng(opts.seed, "family", j as u64);
        let w = Word::random(pu.alphabet(), pu.weights().full_mask(), opts.length_bound, &mut rng);
        let lifted = joint.lift(j, &Word::random(epi.preset.alphabet(), epi.preset.weights().full_mask(), opts.length_bound, &mut rng))?;
        let ok = g.is_identity(&g.mul(&composite(&w.multiply(&lifted)?), &g.inverse(&g.mul(&composite(&w), &composite(&lifted)))));
        report.push(Check::new(format!("{tag} composite-multiplicative"), ok, 1));
    }
    Ok(FamilyReport { joint: Some(joint), report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn opts() -> EpiOptions {
        EpiOptions { samples: 100, ..EpiOptions::default() }
    }

    #[test]
    fn weights_of_fixtures() {
        let d4 = fixtures::group("d4").unwrap();
        let w = weight_of(&d4).unwrap();
        assert_eq!((w.value(1), w.value(2), w.value(3)), (1, 1, 2));
        let t = weight_of(&fixtures::group("trivial").unwrap()).unwrap();
        assert_eq!(t.value(1), 0);
        let s3 = fixtures::group("s3").unwrap();
        assert!(matches!(weight_of(&s3), Err(Error::NotNilpotent(_))));
        let c = weight_of(&fixtures::group("c2xc2").unwrap()).unwrap();
        assert_eq!((c.value(1), c.value(2), c.value(3)), (1, 1, 1));
    }

    #[test]
    fn epimorphisms_verify() {
        for name in ["d4", "q8", "c2xc2", "d16", "trivial"] {
            let g = fixtures::group(name).unwrap();
            let e = build_epi(&g, &opts()).unwrap();
            assert!(e.report.passed(), "{name}: {:?}", e.report);
        }
    }

    #[test]
    fn family() {
        let empty = epi_family(&[], &opts()).unwrap();
        assert!(empty.report.passed() && empty.report.vacuous);
        let gs = [fixtures::group("d4").unwrap(), fixtures::group("q8").unwrap()];
        let f = epi_family(&gs, &EpiOptions { samples: 30, ..opts() }).unwrap();
        assert!(f.report.passed(), "{:?}", f.report);
        let pu = &f.joint.unwrap().preset;
        assert_eq!(pu.alphabet().len(), 4);
        assert_eq!(pu.weights().value(pu.weights().full_mask()), 4);
    }
}
