use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::localgroup::{Generator, Perm};

fn cyc(n: usize, s: &str) -> Perm {
    Perm::parse_cycles(n, s).unwrap()
}

fn trivial(d: usize) -> Arc<LocalGroup> {
    LocalGroup::trivial(d).unwrap()
}

fn z2(d: usize) -> Arc<LocalGroup> {
    LocalGroup::build(d, 2, vec![Generator::new("a", cyc(2, "(0 1)"), cyc(d, "(0 1)"))]).unwrap()
}

fn kernel() -> Arc<LocalGroup> {
    LocalGroup::build(2, 2, vec![Generator::new("a", cyc(2, "(0 1)"), Perm::identity(2))]).unwrap()
}

fn sym3(d: usize) -> Arc<LocalGroup> {
    let (qs, qt) = if d == 3 {
        (cyc(3, "(0 1)"), cyc(3, "(0 1 2)"))
    } else {
        (cyc(d, "(0 1)"), Perm::identity(d))
    };
    LocalGroup::build(
        d,
        3,
        vec![
            Generator::new("s", cyc(3, "(0 1)"), qs),
            Generator::new("t", cyc(3, "(0 1 2)"), qt),
        ],
    )
    .unwrap()
}

fn el(g: &Arc<LocalGroup>, text: &str) -> SymTreePair {
    parse_element(text, g).unwrap()
}

fn a(s: &str) -> LeafAddress {
    LeafAddress::parse(s).unwrap()
}

fn pt(s: &str) -> CantorPoint {
    CantorPoint::parse(s).unwrap()
}

fn random_points(d: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<CantorPoint> {
    (0..count)
        .map(|_| {
            let pl = rng.gen_range(0..7);
            let ql = rng.gen_range(1..4);
            let prefix = (0..pl).map(|_| rng.gen_range(0..d as u8)).collect();
            let period = (0..ql).map(|_| rng.gen_range(0..d as u8)).collect();
            CantorPoint::new(prefix, period).unwrap()
        })
        .collect()
}

/// Direct evaluation of the action on a finite word, straight from the
/// formula: find the domain leaf that prefixes the word, swap it for its
/// image and permute the remaining digits by q of the label.
fn naive_act(e: &SymTreePair, word: &[u8]) -> Vec<u8> {
    let row = e
        .entries()
        .iter()
        .find(|r| r.source.is_prefix_of(word))
        .expect("word is long enough");
    let q = e.group().q(row.label);
    let mut out = row.target.digits().to_vec();
    out.extend(word[row.source.len()..].iter().map(|&x| q.apply(x as usize) as u8));
    out
}

fn agree_with_oracle(e: &SymTreePair, points: &[CantorPoint]) {
    for c in points {
        let word = c.truncate(48);
        let expected = naive_act(e, &word);
        let got = e.act(c).unwrap().truncate(24);
        assert_eq!(got, expected[..24], "element {e:?} at {c}");
    }
}

#[test]
fn identity_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for g in [trivial(2), z2(2), sym3(3)] {
        let id = SymTreePair::identity(&g);
        for _ in 0..20 {
            let x = random_element(&g, 3, &mut rng).unwrap();
            assert_eq!(id.compose(&x).unwrap(), x);
            assert_eq!(x.compose(&id).unwrap(), x);
        }
        for c in random_points(g.arity(), 10, &mut rng) {
            assert_eq!(id.act(&c).unwrap(), c);
        }
        assert_eq!(id.reduce(), id);
    }
}

#[test]
fn expand_examples() {
    let g = trivial(2);
    let e = SymTreePair::identity(&g).expand(&a("e")).unwrap();
    assert_eq!(e, el(&g, "map 0 -> 0 : id\nmap 1 -> 1 : id"));

    let g = z2(2);
    let single = el(&g, "map e -> e : a");
    let expanded = single.expand(&a("e")).unwrap();
    assert_eq!(expanded, el(&g, "map 0 -> 1 : a\nmap 1 -> 0 : a"));
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for c in random_points(2, 16, &mut rng) {
        assert_eq!(single.act(&c).unwrap(), expanded.act(&c).unwrap());
    }
    assert!(matches!(
        single.expand(&a("0")),
        Err(ElementError::Tree(TreeError::NotALeaf(_)))
    ));
}

#[test]
fn expansions_commute_exhaustive() {
    let g = z2(2);
    for e in labeled_elements_up_to(&g, 2).unwrap() {
        let leaves = e.domain().leaves().to_vec();
        for l1 in &leaves {
            for l2 in &leaves {
                if l1 == l2 {
                    continue;
                }
                let x = e.expand(l1).unwrap().expand(l2).unwrap();
                let y = e.expand(l2).unwrap().expand(l1).unwrap();
                assert_eq!(x, y);
            }
        }
    }
}

#[test]
fn reduce_examples() {
    let g = kernel();
    let e = el(&g, "map 0 -> 0 : a\nmap 1 -> 1 : a");
    assert_eq!(e.reduce(), el(&g, "map e -> e : a"));

    let g = z2(2);
    let e = el(&g, "map 0 -> 0 : a\nmap 1 -> 1 : id");
    assert_eq!(e.reduce(), e);
    // twist mismatch: common label a needs the swapped targets
    let e = el(&g, "map 0 -> 0 : a\nmap 1 -> 1 : a");
    assert_eq!(e.reduce(), e);
}

#[test]
fn reduce_inverts_expand_exhaustive() {
    for g in [trivial(2), z2(2), trivial(3)] {
        let max = if g.arity() == 2 { 2 } else { 1 };
        for e in labeled_elements_up_to(&g, max).unwrap() {
            assert!(e.is_reduced());
            for l in e.domain().leaves() {
                assert_eq!(e.expand(l).unwrap().reduce(), e);
            }
        }
    }
}

#[test]
fn classical_composition_hand_checked() {
    let g = trivial(2);
    let x = el(&g, "map 0 -> 00 : id\nmap 10 -> 01 : id\nmap 11 -> 1 : id");
    let swap = el(&g, "map 0 -> 1 : id\nmap 1 -> 0 : id");
    let y = el(&g, "map 00 -> 11 : id\nmap 01 -> 0 : id\nmap 1 -> 10 : id");
    // worked by hand: 0 -> 00 -> 10, 10 -> 01 -> 11, 11 -> 1 -> 0
    assert_eq!(
        swap.compose(&x).unwrap(),
        el(&g, "map 0 -> 10 : id\nmap 10 -> 11 : id\nmap 11 -> 0 : id")
    );
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let points = random_points(2, 32, &mut rng);
    for (p, q) in [(&x, &swap), (&swap, &y), (&y, &x)] {
        let pq = p.compose(q).unwrap();
        for c in &points {
            let word = c.truncate(48);
            let expected = naive_act(p, &naive_act(q, &word));
            assert_eq!(pq.act(c).unwrap().truncate(30), expected[..30]);
        }
    }
}

#[test]
fn labels_multiply_in_iota() {
    let g = sym3(2);
    let t = g.generator_element("t").unwrap();
    let t2 = t.mul(&t).unwrap();
    assert!(t.q_image().is_identity());
    assert_eq!(
        SymTreePair::iota(&t).compose(&SymTreePair::iota(&t)).unwrap(),
        SymTreePair::iota(&t2)
    );
}

#[test]
fn iota_is_a_homomorphism_on_sym3() {
    let g = sym3(3);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let points = random_points(3, 32, &mut rng);
    for s in g.elements() {
        for t in g.elements() {
            let lhs = SymTreePair::iota(&s.mul(&t).unwrap());
            let rhs = SymTreePair::iota(&s).compose(&SymTreePair::iota(&t)).unwrap();
            assert_eq!(lhs, rhs);
            for c in &points {
                assert_eq!(lhs.act(c).unwrap(), rhs.act(c).unwrap());
            }
        }
    }
    assert_eq!(SymTreePair::iota(&g.identity()), SymTreePair::identity(&g));
}

#[test]
fn inverse_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for g in [trivial(2), z2(2), sym3(3), sym3(2)] {
        let id = SymTreePair::identity(&g);
        assert_eq!(id.inverse(), id);
        for _ in 0..50 {
            let x = random_element(&g, 3, &mut rng).unwrap();
            assert_eq!(x.inverse().inverse(), x);
            assert!(x.compose(&x.inverse()).unwrap().is_identity());
            assert!(x.inverse().compose(&x).unwrap().is_identity());
        }
    }
    let g = z2(2);
    let e = el(&g, "map 0 -> 1 : a\nmap 1 -> 0 : id");
    let inv = e.inverse();
    assert_eq!(inv, el(&g, "map 0 -> 1 : id\nmap 1 -> 0 : a"));
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for c in random_points(2, 16, &mut rng) {
        assert_eq!(inv.act(&e.act(&c).unwrap()).unwrap(), c);
    }
}

#[test]
fn act_examples() {
    let g = z2(2);
    let e = SymTreePair::iota(&g.generator_element("a").unwrap());
    assert_eq!(e, el(&g, "map 0 -> 0 : a\nmap 1 -> 1 : id"));
    assert_eq!(e.act(&pt("0(10)")).unwrap(), pt("0(01)"));
    assert_eq!(e.act(&pt("0(10)")).unwrap().to_string(), "0(01)");
    assert_eq!(e.act(&pt("1(1)")).unwrap(), pt("1(1)"));
    let swap = el(&g, "map 0 -> 1 : id\nmap 1 -> 0 : id");
    assert_eq!(swap.act(&pt("(0)")).unwrap().to_string(), "1(0)");
    assert!(e.act(&pt("(2)")).is_err());
}

#[test]
fn act_matches_the_direct_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for g in [z2(2), sym3(3), sym3(2)] {
        let points = random_points(g.arity(), 16, &mut rng);
        for _ in 0..40 {
            let e = random_element(&g, 4, &mut rng).unwrap();
            agree_with_oracle(&e, &points);
            for c in &points {
                assert_eq!(e.act(c).unwrap().period().len(), c.period().len());
            }
        }
    }
}

#[test]
fn equals_examples() {
    let g = z2(2);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let e = random_element(&g, 3, &mut rng).unwrap();
        for l in e.domain().leaves() {
            assert!(e.equals(&e.expand(l).unwrap()).unwrap());
        }
    }
    let left = el(&g, "map 0 -> 0 : a\nmap 1 -> 1 : id");
    let right = el(&g, "map 0 -> 0 : id\nmap 1 -> 1 : a");
    assert!(!left.equals(&right).unwrap());
    assert_ne!(left.act(&pt("(0)")).unwrap(), right.act(&pt("(0)")).unwrap());
    let other = SymTreePair::identity(&trivial(2));
    assert!(left.equals(&other).is_err());
}

#[test]
fn word_products_are_deterministic() {
    let g = z2(2);
    let gens = vd_generating_set(&g).unwrap();
    let word: Vec<usize> = {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        (0..20).map(|_| rng.gen_range(0..gens.len())).collect()
    };
    let product = || {
        word.iter()
            .fold(SymTreePair::identity(&g), |acc, &i| acc.compose(&gens[i]).unwrap())
    };
    assert!(product().equals(&product()).unwrap());
}

/// Points with prefix length at most `max_prefix` and period of length one.
fn period_one_points(d: usize, max_prefix: usize) -> Vec<CantorPoint> {
    let mut out = Vec::new();
    let mut words: Vec<Vec<u8>> = vec![vec![]];
    for len in 0..=max_prefix {
        if len > 0 {
            words = words
                .into_iter()
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
                out.push(CantorPoint::new(w.clone(), vec![x]).unwrap());
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

#[test]
fn action_separates_elements_exhaustive() {
    for g in [trivial(2), z2(2)] {
        let elements = labeled_elements_up_to(&g, 2).unwrap();
        let points = period_one_points(2, 4);
        let images: Vec<Vec<CantorPoint>> = elements
            .iter()
            .map(|e| points.iter().map(|c| e.act(c).unwrap()).collect())
            .collect();
        for i in 0..elements.len() {
            for j in 0..elements.len() {
                let same_action = images[i] == images[j];
                assert_eq!(same_action, elements[i].equals(&elements[j]).unwrap());
            }
        }
    }
}

#[test]
fn pi_examples() {
    let g = z2(2);
    let elements = labeled_elements_up_to(&g, 2).unwrap();
    let images: std::collections::HashSet<_> = elements.iter().map(SymTreePair::pi).collect();
    assert_eq!(images.len(), elements.len());

    let k = kernel();
    let a = k.generator_element("a").unwrap();
    assert!(SymTreePair::iota(&a).pi().is_identity());
    assert!(!SymTreePair::iota(&a).is_identity());
    assert!(SymTreePair::identity(&k).pi().is_identity());
    assert_eq!(SymTreePair::identity(&k).pi().group().order(), 1);

    // unlabeled elements keep their trees
    let t = trivial(2);
    let swap = el(&t, "map 0 -> 1 : id\nmap 1 -> 0 : id");
    assert_eq!(swap.pi().entries(), swap.entries());
}

#[test]
fn pi_is_a_homomorphism() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for g in [z2(2), sym3(2), sym3(3), kernel()] {
        for _ in 0..50 {
            let x = random_element(&g, 3, &mut rng).unwrap();
            let y = random_element(&g, 3, &mut rng).unwrap();
            assert_eq!(x.compose(&y).unwrap().pi(), x.pi().compose(&y.pi()).unwrap());
        }
    }
}

#[test]
fn pi_section_examples() {
    let t = trivial(2);
    let img = t.image_group();
    let v = SymTreePair::identity(&img);
    let lifted = SymTreePair::pi_section(&v, &t).unwrap();
    assert!(lifted.is_unlabeled());

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for g in [z2(2), sym3(2), sym3(3), kernel()] {
        let img = g.image_group();
        for _ in 0..100 {
            let v = random_element(&img, 3, &mut rng).unwrap();
            let lifted = SymTreePair::pi_section(&v, &g).unwrap();
            assert_eq!(lifted.pi(), v);
        }
    }

    let k = kernel();
    let iota_a = SymTreePair::iota(&k.generator_element("a").unwrap());
    let round = SymTreePair::pi_section(&iota_a.pi(), &k).unwrap();
    assert_ne!(round, iota_a);
    assert!(SymTreePair::pi_section(&iota_a, &k).is_err());
}

#[test]
fn retract_examples() {
    for g in [trivial(2), z2(2), sym3(3), sym3(2)] {
        assert!(SymTreePair::identity(&g).retract().is_identity());
        for h in g.elements() {
            assert_eq!(SymTreePair::iota(&h).retract(), h);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..30 {
            let e = random_element(&g, 3, &mut rng).unwrap();
            let left = e.domain().leftmost_leaf().clone();
            assert_eq!(e.expand(&left).unwrap().retract(), e.retract());
        }
    }
}

#[test]
fn retraction_laws_read_left_to_right() {
    // products are read "left factor first": g·h = g.then(h) = h ∘ g
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for g in [z2(2), sym3(2), sym3(3)] {
        for _ in 0..100 {
            let x = random_element(&g, 3, &mut rng).unwrap();
            let u = super::enumerate::random_element_with(&g, 3, false, &mut rng).unwrap();
            assert_eq!(x.then(&u).unwrap().retract(), x.retract());
            for s in g.elements() {
                let r = x.then(&SymTreePair::iota(&s)).unwrap().retract();
                assert!(r == x.retract() || r == x.retract().then(&s).unwrap());
            }
        }
    }
}

#[test]
fn retraction_is_not_invariant_under_precomposition() {
    let g = z2(2);
    let x = el(&g, "map 0 -> 0 : a\nmap 1 -> 1 : id");
    let swap = el(&g, "map 0 -> 1 : id\nmap 1 -> 0 : id");
    assert_eq!(x.retract().to_string(), "a");
    assert!(x.compose(&swap).unwrap().retract().is_identity());
    assert_eq!(x.then(&swap).unwrap().retract().to_string(), "a");
}

#[test]
fn generating_set_shape() {
    let g = trivial(2);
    let gens = vd_generating_set(&g).unwrap();
    let swap = el(&g, "map 0 -> 1 : id\nmap 1 -> 0 : id");
    assert!(gens.contains(&swap));
    assert!(!gens.iter().any(SymTreePair::is_identity));
    assert!(gens.iter().all(|x| x.carets() <= 2 && x.is_unlabeled() && x.retract().is_identity()));
    for x in &gens {
        assert!(gens.contains(&x.inverse()));
    }
    let zg = vd_generating_set(&z2(2)).unwrap();
    assert_eq!(zg.len(), gens.len());
    assert!(zg.iter().all(|x| x.retract().is_identity()));
}

#[test]
fn generating_set_reaches_all_small_unlabeled_elements() {
    let g = trivial(2);
    let gens = vd_generating_set(&g).unwrap();
    let ball = bfs_ball(&g, &gens, 1, DEFAULT_BALL_LIMIT).unwrap();
    for e in all_elements(&g, 2, false).unwrap() {
        assert!(ball.contains(&e));
    }
}

#[test]
fn ball_examples() {
    let g = z2(2);
    let gens = vd_generating_set(&g).unwrap();
    let b0 = bfs_ball(&g, &gens, 0, 10).unwrap();
    assert_eq!(b0.elements, vec![SymTreePair::identity(&g)]);
    let b1 = bfs_ball(&g, &gens, 1, DEFAULT_BALL_LIMIT).unwrap();
    assert_eq!(b1.len(), gens.len() + 1);
    assert!(gens.iter().all(|x| b1.radius_of(x) == Some(1)));
    assert!(matches!(
        bfs_ball(&g, &gens, 2, 5),
        Err(ElementError::BallLimit { limit: 5 })
    ));

    let mut all_gens = vec![SymTreePair::iota(&g.generator_element("a").unwrap())];
    all_gens.extend(gens);
    let ball = bfs_ball(&g, &all_gens, 4, DEFAULT_BALL_LIMIT).unwrap();
    let targets = labeled_elements_up_to(&g, 1).unwrap();
    assert_eq!(targets.len(), 8);
    for t in &targets {
        assert!(ball.radius_of(t).is_some_and(|r| r <= 4), "{t:?} not reached");
    }
}

#[test]
fn depth_limit_surfaces_as_an_error() {
    let g = LocalGroup::build_with(
        2,
        1,
        vec![],
        crate::localgroup::GroupOptions {
            depth_limit: 3,
            ..Default::default()
        },
    )
    .unwrap();
    let x = el(&g, "map 0 -> 00 : id\nmap 10 -> 01 : id\nmap 11 -> 1 : id");
    let mut acc = x.clone();
    let mut failed = false;
    for _ in 0..5 {
        match acc.compose(&x) {
            Ok(next) => acc = next,
            Err(ElementError::Tree(TreeError::DepthLimit { limit: 3 })) => {
                failed = true;
                break;
            }
            Err(e) => panic!("unexpected {e}"),
        }
    }
    assert!(failed);
}

#[test]
fn text_round_trip() {
    let g = z2(2).with_name("z2.grp");
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let header = ElementHeader::Group("z2.grp".into());
    for _ in 0..30 {
        let e = random_element(&g, 3, &mut rng).unwrap();
        let text = e.to_text(Some(&header));
        let parsed = ElementText::parse(&text).unwrap();
        assert_eq!(parsed.header, Some(header.clone()));
        assert_eq!(parsed.build(&g).unwrap(), e);
    }
    assert_eq!(
        SymTreePair::identity(&g).to_text(None),
        "map e -> e : id\n"
    );
    let err = parse_element("map 0 -> 0 : a\nmap 1 -> 1 : b", &g).unwrap_err();
    assert_eq!((err.line, err.column), (2, 14));
    let err = parse_element("map 0 -> 0 : a\nmap 1 -> 0 : id", &g).unwrap_err();
    assert_eq!(err.line, 1);
    assert!(parse_element("map 0 => 0 : a", &g).is_err());
}
