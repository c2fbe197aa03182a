//! Seeded property campaigns over the element calculus, with serializable
//! reports. Every random choice flows from one `ChaCha8Rng` seeded by the
//! caller, so reports are reproducible byte for byte (apart from timings).

use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::element::{
    bfs_ball, labeled_elements_up_to, random_element, random_unlabeled_element, vd_generating_set, CantorPoint,
    ElementError, ElementText, SymTreePair,
};
use crate::localgroup::{Generator, GroupError, LocalGroup, Perm};

/// The six standard configurations: `d ∈ {2, 3}` with `H` trivial, `Z/2`
/// (faithful, swapping children 0 and 1) and `Sym(3)`. For `d = 2`, `Sym(3)`
/// acts through the sign; for `d = 3` it acts as itself.
pub fn standard_configurations() -> Result<Vec<(String, Arc<LocalGroup>)>, GroupError> {
    let mut out = Vec::new();
    for d in [2usize, 3] {
        out.push((format!("d{d}-trivial"), LocalGroup::trivial(d)?));
        out.push((format!("d{d}-z2"), z2(d)?));
        out.push((format!("d{d}-sym3"), sym3(d)?));
    }
    Ok(out)
}

fn cyc(n: usize, s: &str) -> Perm {
    Perm::parse_cycles(n, s).expect("well-formed cycle literal")
}

pub fn z2(d: usize) -> Result<Arc<LocalGroup>, GroupError> {
    Ok(LocalGroup::build(d, 2, vec![Generator::new("a", cyc(2, "(0 1)"), cyc(d, "(0 1)"))])?.with_name("z2"))
}

pub fn sym3(d: usize) -> Result<Arc<LocalGroup>, GroupError> {
    let (qs, qt) = if d >= 3 {
        (cyc(d, "(0 1)"), cyc(d, "(0 1 2)"))
    } else {
        (cyc(d, "(0 1)"), Perm::identity(d))
    };
    Ok(LocalGroup::build(
        d,
        3,
        vec![
            Generator::new("s", cyc(3, "(0 1)"), qs),
            Generator::new("t", cyc(3, "(0 1 2)"), qt),
        ],
    )?
    .with_name("sym3"))
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomsConfig {
    pub triples: usize,
    pub confluence_trials: usize,
    pub expansions: usize,
    pub faithfulness_pairs: usize,
    pub action_pairs: usize,
    pub points_per_pair: usize,
    pub pi_pairs: usize,
    pub section_round_trips: usize,
    pub retraction_samples: usize,
    /// Caret bound for random tree pairs.
    pub max_carets: usize,
    /// Longest generator word used when sampling from the word ball.
    pub max_word: usize,
}

impl Default for AxiomsConfig {
    fn default() -> Self {
        AxiomsConfig {
            triples: 1000,
            confluence_trials: 500,
            expansions: 5,
            faithfulness_pairs: 200,
            action_pairs: 200,
            points_per_pair: 16,
            pi_pairs: 500,
            section_round_trips: 200,
            retraction_samples: 500,
            max_carets: 3,
            max_word: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertyResult {
    pub name: String,
    pub samples: usize,
    pub passed: bool,
    /// Why the property was not run, if it was not.
    pub skipped: Option<String>,
    pub counterexample: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomsReport {
    pub group: String,
    pub d: usize,
    pub h_order: usize,
    pub q_faithful: bool,
    pub seed: u64,
    pub config: AxiomsConfig,
    pub properties: Vec<PropertyResult>,
    pub all_passed: bool,
    pub wall_time_ms: u128,
}

/// Runs one check per sample and keeps the first failure.
struct Tally {
    name: &'static str,
    samples: usize,
    counterexample: Option<String>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally {
            name,
            samples: 0,
            counterexample: None,
        }
    }

    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.samples += 1;
        if !ok && self.counterexample.is_none() {
            self.counterexample = Some(describe());
        }
    }

    fn finish(self) -> PropertyResult {
        PropertyResult {
            name: self.name.into(),
            samples: self.samples,
            passed: self.counterexample.is_none(),
            skipped: None,
            counterexample: self.counterexample,
        }
    }
}

fn skipped(name: &str, reason: &str) -> PropertyResult {
    PropertyResult {
        name: name.into(),
        samples: 0,
        passed: true,
        skipped: Some(reason.into()),
        counterexample: None,
    }
}

/// Draws elements either as random tree pairs or as random words in
/// `ι(generators of H) ∪ vd_generating_set`, i.e. from the word ball.
pub struct Sampler {
    group: Arc<LocalGroup>,
    gens: Vec<SymTreePair>,
    max_carets: usize,
    max_word: usize,
}

impl Sampler {
    pub fn new(group: &Arc<LocalGroup>, max_carets: usize, max_word: usize) -> Result<Self, ElementError> {
        Ok(Sampler {
            group: group.clone(),
            gens: generators(group)?,
            max_carets,
            max_word,
        })
    }

    pub fn element<R: Rng>(&self, rng: &mut R) -> Result<SymTreePair, ElementError> {
        if rng.gen_bool(0.5) {
            random_element(&self.group, self.max_carets, rng)
        } else {
            let len = rng.gen_range(1..=self.max_word);
            let mut acc = SymTreePair::identity(&self.group);
            for _ in 0..len {
                acc = acc.compose(self.gens.choose(rng).expect("generating set is non-empty"))?;
            }
            Ok(acc)
        }
    }
}

/// `ι(h)` for each generator `h` of `H`, followed by the unlabeled set.
pub fn generators(group: &Arc<LocalGroup>) -> Result<Vec<SymTreePair>, ElementError> {
    let mut gens: Vec<SymTreePair> = group
        .generators()
        .iter()
        .map(|g| group.generator_element(&g.name).map(|h| SymTreePair::iota(&h)))
        .collect::<Result<_, _>>()?;
    gens.extend(vd_generating_set(group)?);
    Ok(gens)
}

fn random_point<R: Rng>(d: usize, rng: &mut R) -> CantorPoint {
    let pl = rng.gen_range(0..7);
    let ql = rng.gen_range(1..5);
    let prefix = (0..pl).map(|_| rng.gen_range(0..d as u8)).collect();
    let period = (0..ql).map(|_| rng.gen_range(0..d as u8)).collect();
    CantorPoint::new(prefix, period).expect("non-empty period")
}

/// Every point `w · x^∞` with `|w| ≤ max_prefix`, in normal form.
fn period_one_points(d: usize, max_prefix: usize) -> Vec<CantorPoint> {
    let mut words: Vec<Vec<u8>> = vec![vec![]];
    let mut out = Vec::new();
    for len in 0..=max_prefix {
        if len > 0 {
            words = words
                .iter()
                .flat_map(|w| {
                    (0..d as u8).map(move |x| {
                        let mut w = w.clone();
                        w.push(x);
                        w
                    })
                })
                .collect();
        }
        for w in &words {
            for x in 0..d as u8 {
                out.push(CantorPoint::new(w.clone(), vec![x]).expect("non-empty period"));
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

fn expand_randomly<R: Rng>(e: &SymTreePair, times: usize, rng: &mut R) -> Result<SymTreePair, ElementError> {
    let mut x = e.clone();
    for _ in 0..times {
        let leaves = x.domain();
        let l = leaves.leaves()[rng.gen_range(0..leaves.leaf_count())].clone();
        x = x.expand(&l)?;
    }
    Ok(x)
}

/// Runs the element-level property suite.
pub fn run_axioms(group: &Arc<LocalGroup>, name: &str, config: &AxiomsConfig, seed: u64) -> Result<AxiomsReport, ElementError> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampler = Sampler::new(group, config.max_carets, config.max_word)?;
    let id = SymTreePair::identity(group);
    let d = group.arity();
    let mut props = Vec::new();

    let mut assoc = Tally::new("associativity");
    let mut inverse = Tally::new("inverse");
    let mut identity = Tally::new("identity");
    for _ in 0..config.triples {
        let x = sampler.element(&mut rng)?;
        let y = sampler.element(&mut rng)?;
        let z = sampler.element(&mut rng)?;
        let lhs = x.compose(&y)?.compose(&z)?;
        let rhs = x.compose(&y.compose(&z)?)?;
        assoc.check(lhs == rhs, || format!("x={x:?} y={y:?} z={z:?}"));
        let ok = x.compose(&x.inverse())? == id && x.inverse().compose(&x)? == id;
        inverse.check(ok, || format!("x={x:?}"));
        let ok = id.compose(&x)? == x && x.compose(&id)? == x;
        identity.check(ok, || format!("x={x:?}"));
    }
    props.extend([assoc.finish(), inverse.finish(), identity.finish()]);

    let mut confluence = Tally::new("reduction_confluence");
    for _ in 0..config.confluence_trials {
        let e = sampler.element(&mut rng)?;
        let a = expand_randomly(&e, config.expansions, &mut rng)?;
        let b = expand_randomly(&e, config.expansions, &mut rng)?;
        confluence.check(a.reduce() == e && b.reduce() == e, || format!("e={e:?} a={a:?} b={b:?}"));
    }
    props.push(confluence.finish());

    if group.q_is_faithful() {
        let mut faithful = Tally::new("action_faithfulness");
        for _ in 0..config.faithfulness_pairs {
            let e1 = random_element(group, 2, &mut rng)?;
            // half the time a disguised copy of e1, otherwise a fresh element
            let e2 = match rng.gen_range(0..3) {
                0 => expand_randomly(&e1, 2, &mut rng)?,
                1 => random_element(group, 2, &mut rng)?,
                _ => {
                    let s = SymTreePair::iota(&group.element(rng.gen_range(0..group.order() as u32)));
                    e1.compose(&s)?
                }
            };
            let points = period_one_points(d, e1.depth() + e2.depth());
            let mut same = true;
            for c in &points {
                if e1.act(c)? != e2.act(c)? {
                    same = false;
                    break;
                }
            }
            let eq = e1.equals(&e2)?;
            faithful.check(eq == same, || format!("e1={e1:?} e2={e2:?} equal={eq} same_action={same}"));
        }
        props.push(faithful.finish());
    } else {
        props.push(skipped(
            "action_faithfulness",
            "q is not injective, so distinct elements can act identically",
        ));
    }

    let mut action = Tally::new("action_homomorphism");
    let mut period = Tally::new("period_preserved");
    for _ in 0..config.action_pairs {
        let f = sampler.element(&mut rng)?;
        let g = sampler.element(&mut rng)?;
        let gf = g.compose(&f)?;
        for _ in 0..config.points_per_pair {
            let c = random_point(d, &mut rng);
            let lhs = gf.act(&c)?;
            let rhs = g.act(&f.act(&c)?)?;
            action.check(lhs == rhs, || format!("f={f:?} g={g:?} c={c}"));
            period.check(lhs.period().len() == c.period().len(), || format!("g∘f={gf:?} c={c}"));
        }
    }
    props.extend([action.finish(), period.finish()]);

    let mut pi_hom = Tally::new("pi_homomorphism");
    for _ in 0..config.pi_pairs {
        let f = sampler.element(&mut rng)?;
        let g = sampler.element(&mut rng)?;
        let ok = g.compose(&f)?.pi() == g.pi().compose(&f.pi())?;
        pi_hom.check(ok, || format!("f={f:?} g={g:?}"));
    }
    props.push(pi_hom.finish());

    let image = group.image_group();
    let mut section = Tally::new("pi_section_round_trip");
    for _ in 0..config.section_round_trips {
        let v = random_element(&image, config.max_carets, &mut rng)?;
        let ok = SymTreePair::pi_section(&v, group)?.pi() == v;
        section.check(ok, || format!("v={v:?}"));
    }
    props.push(section.finish());

    let mut r_iota = Tally::new("retract_iota_identity");
    for h in group.elements() {
        r_iota.check(SymTreePair::iota(&h).retract() == h, || format!("h={h}"));
    }
    props.push(r_iota.finish());

    // products read left to right: g·x = g.then(x)
    let mut law1 = Tally::new("retraction_law_iota");
    for _ in 0..config.retraction_samples {
        let g = sampler.element(&mut rng)?;
        let s = group.element(rng.gen_range(0..group.order() as u32));
        let r = g.then(&SymTreePair::iota(&s))?.retract();
        let ok = r == g.retract() || r == g.retract().then(&s)?;
        law1.check(ok, || format!("g={g:?} s={s}"));
    }
    props.push(law1.finish());

    let mut law2 = Tally::new("retraction_law_unlabeled");
    for _ in 0..config.retraction_samples {
        let g = sampler.element(&mut rng)?;
        let u = random_unlabeled_element(group, config.max_carets, &mut rng)?;
        law2.check(g.then(&u)?.retract() == g.retract(), || format!("g={g:?} u={u:?}"));
    }
    props.push(law2.finish());

    let mut text = Tally::new("text_round_trip");
    for _ in 0..config.section_round_trips {
        let e = sampler.element(&mut rng)?;
        let printed = e.to_text(None);
        let ok = ElementText::parse(&printed)
            .ok()
            .and_then(|t| t.build(group).ok())
            .is_some_and(|back| back == e && back.to_text(None) == printed);
        text.check(ok, || printed.clone());
    }
    props.push(text.finish());

    let all_passed = props.iter().all(|p| p.passed);
    Ok(AxiomsReport {
        group: name.into(),
        d,
        h_order: group.order(),
        q_faithful: group.q_is_faithful(),
        seed,
        config: config.clone(),
        properties: props,
        all_passed,
        wall_time_ms: start.elapsed().as_millis(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TargetResult {
    pub element: String,
    pub radius: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GenerateReport {
    pub d: usize,
    pub h_order: usize,
    pub generator_count: usize,
    pub target_carets: usize,
    pub max_radius: usize,
    /// Largest radius whose ball was computed in full.
    pub radius_completed: usize,
    pub ball_size: usize,
    pub ball_limit_hit: bool,
    pub targets: Vec<TargetResult>,
    pub all_reached: bool,
    pub wall_time_ms: u128,
}

/// Grows the word ball over `ι(generators of H) ∪ vd_generating_set` one
/// radius at a time until every labeled element with at most `target_carets`
/// carets is inside, the radius reaches `max_radius`, or the ball outgrows
/// `ball_limit`.
pub fn generate_check(
    group: &Arc<LocalGroup>,
    target_carets: usize,
    max_radius: usize,
    ball_limit: usize,
) -> Result<GenerateReport, ElementError> {
    let start = Instant::now();
    let gens = generators(group)?;
    let targets = labeled_elements_up_to(group, target_carets)?;
    let mut reached: Vec<Option<usize>> = vec![None; targets.len()];
    let mut completed = 0;
    let mut ball_size = 1;
    let mut limit_hit = false;
    for r in 0..=max_radius {
        match bfs_ball(group, &gens, r, ball_limit) {
            Ok(ball) => {
                completed = r;
                ball_size = ball.len();
                for (t, slot) in targets.iter().zip(reached.iter_mut()) {
                    *slot = ball.radius_of(t);
                }
                if reached.iter().all(Option::is_some) || ball.radius.last() != Some(&r) {
                    break;
                }
            }
            Err(ElementError::BallLimit { .. }) => {
                limit_hit = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let all_reached = reached.iter().all(Option::is_some);
    Ok(GenerateReport {
        d: group.arity(),
        h_order: group.order(),
        generator_count: gens.len(),
        target_carets,
        max_radius,
        radius_completed: completed,
        ball_size,
        ball_limit_hit: limit_hit,
        targets: targets
            .iter()
            .zip(reached)
            .map(|(t, radius)| TargetResult {
                element: format!("{t:?}"),
                radius,
            })
            .collect(),
        all_reached,
        wall_time_ms: start.elapsed().as_millis(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> AxiomsConfig {
        AxiomsConfig {
            triples: 60,
            confluence_trials: 40,
            faithfulness_pairs: 20,
            action_pairs: 15,
            pi_pairs: 40,
            section_round_trips: 20,
            retraction_samples: 40,
            ..AxiomsConfig::default()
        }
    }

    #[test]
    fn small_campaigns_pass_everywhere() {
        for (name, g) in standard_configurations().unwrap() {
            let r = run_axioms(&g, &name, &small(), 7).unwrap();
            assert!(r.all_passed, "{name}: {:?}", r.properties);
            assert_eq!(r.properties.len(), 13);
        }
    }

    #[test]
    fn faithfulness_is_skipped_for_sign_action() {
        let r = run_axioms(&sym3(2).unwrap(), "sym3", &small(), 1).unwrap();
        let p = r.properties.iter().find(|p| p.name == "action_faithfulness").unwrap();
        assert!(p.skipped.is_some());
    }

    #[test]
    fn reports_are_reproducible() {
        let g = z2(2).unwrap();
        let a = run_axioms(&g, "z2", &small(), 99).unwrap();
        let b = run_axioms(&g, "z2", &small(), 99).unwrap();
        assert_eq!(a.properties, b.properties);
    }

    #[test]
    fn trivial_group_generates_small_elements_quickly() {
        let g = LocalGroup::trivial(2).unwrap();
        let r = generate_check(&g, 1, 4, 100_000).unwrap();
        assert!(r.all_reached);
        assert!(r.targets.iter().all(|t| t.radius.unwrap() <= 2));
    }

    #[test]
    fn ball_limit_is_reported() {
        let g = z2(2).unwrap();
        let r = generate_check(&g, 1, 4, 50).unwrap();
        assert!(r.ball_limit_hit);
        assert!(!r.all_reached);
    }

    #[test]
    fn period_one_points_are_normalized_and_distinct() {
        let pts = period_one_points(2, 2);
        // x^∞ for 2 digits, plus w·x^∞ with w ending in the other digit
        assert_eq!(pts.len(), 2 + 2 + 4);
    }
}
