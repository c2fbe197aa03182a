//! Exhaustive enumeration, generating sets, word balls and random elements.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use super::{ElementError, Entry, SymTreePair};
use crate::localgroup::LocalGroup;
use crate::trees::{trees_with_carets, CompleteTree};

pub const DEFAULT_BALL_LIMIT: usize = 1_000_000;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

fn label_tuples(order: u32, n: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..order).map(move |h| {
                    let mut t = t.clone();
                    t.push(h);
                    t
                })
            })
            .collect();
    }
    out
}

fn enumerate(group: &Arc<LocalGroup>, max_carets: usize, labeled: bool) -> Result<Vec<SymTreePair>, ElementError> {
    let d = group.arity();
    let order = if labeled { group.order() as u32 } else { 1 };
    let mut seen = BTreeSet::new();
    for k in 0..=max_carets {
        let trees = trees_with_carets(d, k)?;
        let n = 1 + k * (d - 1);
        let perms = permutations(n);
        let labels = label_tuples(order, n);
        for dom in &trees {
            for ran in &trees {
                for perm in &perms {
                    for lab in &labels {
                        let entries = (0..n)
                            .map(|i| Entry {
                                source: dom.leaves()[i].clone(),
                                target: ran.leaves()[perm[i]].clone(),
                                label: lab[i],
                            })
                            .collect();
                        seen.insert(SymTreePair::from_sorted(group, entries).reduce());
                    }
                }
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// Every element whose canonical form has at most `max_carets` carets, with
/// arbitrary labels. Sorted canonical forms.
pub fn labeled_elements_up_to(group: &Arc<LocalGroup>, max_carets: usize) -> Result<Vec<SymTreePair>, ElementError> {
    enumerate(group, max_carets, true)
}

/// Like [`labeled_elements_up_to`], restricted to identity labels when
/// `labeled` is false.
pub fn all_elements(group: &Arc<LocalGroup>, max_carets: usize, labeled: bool) -> Result<Vec<SymTreePair>, ElementError> {
    enumerate(group, max_carets, labeled)
}

/// The unlabeled elements with at most two carets in canonical form, minus
/// the identity. Inverse-closed, sorted.
pub fn vd_generating_set(group: &Arc<LocalGroup>) -> Result<Vec<SymTreePair>, ElementError> {
    Ok(enumerate(group, 2, false)?
        .into_iter()
        .filter(|e| !e.is_identity())
        .collect())
}

/// Products of at most `radius` generators, deduplicated by canonical form.
#[derive(Debug, Clone)]
pub struct Ball {
    /// Discovery order: by word length, then by parent, then by generator.
    pub elements: Vec<SymTreePair>,
    /// Word length at which each element first appeared.
    pub radius: Vec<usize>,
    index: HashMap<SymTreePair, usize>,
}

impl Ball {
    pub fn contains(&self, e: &SymTreePair) -> bool {
        self.index.contains_key(&e.reduce())
    }

    pub fn radius_of(&self, e: &SymTreePair) -> Option<usize> {
        self.index.get(&e.reduce()).map(|&i| self.radius[i])
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Breadth-first ball: layer `k` holds `x ∘ g` for `x` new in layer `k-1`.
/// Products are computed in parallel and merged in a fixed order.
pub fn bfs_ball(
    group: &Arc<LocalGroup>,
    gens: &[SymTreePair],
    radius: usize,
    limit: usize,
) -> Result<Ball, ElementError> {
    for g in gens {
        if !g.group().same_as(group) {
            return Err(crate::localgroup::GroupError::GroupMismatch.into());
        }
    }
    let gens: Vec<SymTreePair> = gens.iter().map(SymTreePair::reduce).collect();
    let id = SymTreePair::identity(group);
    let mut ball = Ball {
        elements: vec![id.clone()],
        radius: vec![0],
        index: HashMap::from([(id, 0)]),
    };
    let mut frontier = vec![0usize];
    for r in 1..=radius {
        let products: Vec<Vec<SymTreePair>> = frontier
            .par_iter()
            .map(|&i| {
                gens.iter()
                    .map(|g| ball.elements[i].compose(g))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()?;
        let mut next = Vec::new();
        for p in products.into_iter().flatten() {
            if !ball.index.contains_key(&p) {
                if ball.elements.len() >= limit {
                    return Err(ElementError::BallLimit { limit });
                }
                ball.index.insert(p.clone(), ball.elements.len());
                next.push(ball.elements.len());
                ball.elements.push(p);
                ball.radius.push(r);
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(ball)
}

fn random_tree<R: Rng>(d: usize, carets: usize, rng: &mut R) -> Result<CompleteTree, ElementError> {
    let mut t = CompleteTree::trivial(d)?;
    for _ in 0..carets {
        let l = t.leaves()[rng.gen_range(0..t.leaf_count())].clone();
        t = t.expand_leaf(&l)?;
    }
    Ok(t)
}

/// A random element: random trees with up to `max_carets` carets, a uniform
/// bijection and uniform labels, returned reduced.
pub fn random_element<R: Rng>(
    group: &Arc<LocalGroup>,
    max_carets: usize,
    rng: &mut R,
) -> Result<SymTreePair, ElementError> {
    random_element_with(group, max_carets, true, rng)
}

/// A random element with identity labels everywhere.
pub fn random_unlabeled_element<R: Rng>(
    group: &Arc<LocalGroup>,
    max_carets: usize,
    rng: &mut R,
) -> Result<SymTreePair, ElementError> {
    random_element_with(group, max_carets, false, rng)
}

pub(crate) fn random_element_with<R: Rng>(
    group: &Arc<LocalGroup>,
    max_carets: usize,
    labeled: bool,
    rng: &mut R,
) -> Result<SymTreePair, ElementError> {
    let d = group.arity();
    let k = rng.gen_range(0..=max_carets);
    let dom = random_tree(d, k, rng)?;
    let ran = random_tree(d, k, rng)?;
    let mut targets: Vec<_> = ran.leaves().to_vec();
    targets.shuffle(rng);
    let entries = dom
        .leaves()
        .iter()
        .zip(targets)
        .map(|(s, t)| Entry {
            source: s.clone(),
            target: t,
            label: if labeled {
                rng.gen_range(0..group.order() as u32)
            } else {
                0
            },
        })
        .collect();
    Ok(SymTreePair::from_sorted(group, entries).reduce())
}
