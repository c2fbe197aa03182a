//! The Stein–Farley poset over the tree model.
//!
//! A vertex `[T, g]` is a complete tree together with a group element, up to
//! `(T₁, g₁) ~ (T₂, g₂)` iff `g₂⁻¹ ∘ g₁` has a representative with domain
//! tree `T₁` and range tree `T₂`. Height is the caret count of `T`. Carets
//! play the part of blocks: `x ≤ y` when `y` is `x` with carets added (in a
//! common frame), and `x ⪯ y` when every added caret hangs directly off a
//! leaf of `x`.
//!
//! The descending link of `[T, id]` has one vertex per lower neighbour
//! `y ⪯ [T, id]` of height one less. Such a `y` is determined by which `d`
//! leaves of `T` are merged, in which order, and with which labels; the
//! link's vertices are those data up to the vertex equivalence.

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::element::{random_element, ElementError, Entry, SymTreePair};
use crate::homology::{reduced_homology, HomologyError, HomologyProfile};
use crate::localgroup::{GroupError, LocalElement, LocalGroup};
use crate::simplicial::SimplicialComplex;
use crate::trees::{trees_with_carets, CompleteTree, LeafAddress, TreeError};

pub const DEFAULT_GAP_BOUND: usize = 4;
pub const DEFAULT_LEAF_BOUND: usize = 9;
pub const DEFAULT_STABILIZER_LIMIT: u128 = 2_000_000;
pub const DEFAULT_HEIGHT_BOUND: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SteinError {
    #[error(transparent)]
    Element(#[from] ElementError),
    #[error("vertices are not comparable")]
    NotComparable,
    #[error("the interval is not elementary")]
    NotElementary,
    #[error("height gap {gap} exceeds the bound {limit}")]
    GapBound { gap: usize, limit: usize },
    #[error("{leaves} leaves exceed the bound {limit}")]
    LeafBound { leaves: usize, limit: usize },
    #[error("height {height} exceeds the bound {limit}")]
    HeightBound { height: usize, limit: usize },
    #[error("{count} elements exceed the limit {limit}")]
    SizeLimit { count: u128, limit: u128 },
    #[error("descending links are built at vertices [T, id]")]
    NotBaseVertex,
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Homology(#[from] HomologyError),
}

impl From<TreeError> for SteinError {
    fn from(e: TreeError) -> Self {
        SteinError::Element(e.into())
    }
}

impl From<GroupError> for SteinError {
    fn from(e: GroupError) -> Self {
        SteinError::Element(e.into())
    }
}

/// A representative `(T, g)` of a poset vertex, with `g` reduced.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PosetVertex {
    tree: CompleteTree,
    element: SymTreePair,
}

impl std::fmt::Debug for PosetVertex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {:?}]", self.tree, self.element)
    }
}

impl PosetVertex {
    pub fn new(tree: CompleteTree, element: &SymTreePair) -> Result<Self, SteinError> {
        if tree.arity() != element.arity() {
            return Err(TreeError::ArityMismatch(tree.arity() as u8, element.arity() as u8).into());
        }
        Ok(PosetVertex {
            tree,
            element: element.reduce(),
        })
    }

    /// `[T, id]`.
    pub fn base(tree: CompleteTree, group: &Arc<LocalGroup>) -> Result<Self, SteinError> {
        Self::new(tree, &SymTreePair::identity(group))
    }

    pub fn tree(&self) -> &CompleteTree {
        &self.tree
    }

    pub fn element(&self) -> &SymTreePair {
        &self.element
    }

    pub fn group(&self) -> &Arc<LocalGroup> {
        self.element.group()
    }

    /// Caret count of the tree; constant on equivalence classes.
    pub fn height(&self) -> usize {
        self.tree.carets()
    }

    /// The left action `g · [T, f] = [T, g ∘ f]`.
    pub fn translate(&self, g: &SymTreePair) -> Result<PosetVertex, SteinError> {
        Ok(PosetVertex {
            tree: self.tree.clone(),
            element: g.compose(&self.element)?,
        })
    }
}

/// If `h` has a representative with domain tree `tree`, its range tree.
fn image_of_tree(h: &SymTreePair, tree: &CompleteTree) -> Result<Option<CompleteTree>, SteinError> {
    let h = h.reduce();
    if !tree.refines(&h.domain())? {
        return Ok(None);
    }
    Ok(Some(h.expand_domain_to(tree)?.range()))
}

pub fn vertex_equals(v1: &PosetVertex, v2: &PosetVertex) -> Result<bool, SteinError> {
    let h = v2.element.inverse().compose(&v1.element)?;
    Ok(image_of_tree(&h, &v1.tree)?.as_ref() == Some(&v2.tree))
}

/// `v2` written in the frame of `v1`: the tree `B` with `[B, g₁] ~ v2`, if
/// one exists.
fn in_frame_of(v1: &PosetVertex, v2: &PosetVertex) -> Result<Option<CompleteTree>, SteinError> {
    let j = v1.element.inverse().compose(&v2.element)?;
    image_of_tree(&j, &v2.tree)
}

/// `v1 ≤ v2`: some common element `f` has `v1 = [A, f]`, `v2 = [B, f]` with
/// `B` refining `A`. Any representative of `v1` can serve as the frame.
pub fn leq(v1: &PosetVertex, v2: &PosetVertex) -> Result<bool, SteinError> {
    match in_frame_of(v1, v2)? {
        Some(b) => Ok(b.refines(&v1.tree)?),
        None => Ok(false),
    }
}

/// Every leaf of `a` is a leaf of `b` or has all its children among the
/// leaves of `b`. Assumes `b` refines `a`.
fn one_layer_above(a: &CompleteTree, b: &CompleteTree) -> bool {
    let d = a.arity() as u8;
    a.leaves()
        .iter()
        .all(|l| b.contains_leaf(l) || (0..d).all(|j| b.contains_leaf(&l.child(j))))
}

/// `v1 ⪯ v2`: `v1 ≤ v2` and every added caret sits directly on a leaf of `v1`.
pub fn elementary(v1: &PosetVertex, v2: &PosetVertex) -> Result<bool, SteinError> {
    match in_frame_of(v1, v2)? {
        Some(b) if b.refines(&v1.tree)? => Ok(one_layer_above(&v1.tree, &b)),
        _ => Ok(false),
    }
}

/// The vertices `z` with `v1 ≤ z ≤ v2`, with their order relation and the
/// lattice verdicts.
#[derive(Debug, Clone)]
pub struct IntervalLattice {
    pub gap: usize,
    pub vertices: Vec<PosetVertex>,
    /// `order[i][j]` iff `vertices[i] ≤ vertices[j]`.
    pub order: Vec<Vec<bool>>,
    pub size_is_power_of_two: bool,
    /// The order agrees with inclusion of the added caret sets.
    pub matches_subset_lattice: bool,
    /// Meets and joins exist and distribute.
    pub is_distributive_lattice: bool,
}

impl IntervalLattice {
    pub fn is_boolean(&self) -> bool {
        self.size_is_power_of_two && self.matches_subset_lattice && self.is_distributive_lattice
    }
}

pub fn interval(v1: &PosetVertex, v2: &PosetVertex, gap_bound: usize) -> Result<IntervalLattice, SteinError> {
    let Some(top) = in_frame_of(v1, v2)?.filter(|b| b.refines(&v1.tree).unwrap_or(false)) else {
        return Err(SteinError::NotComparable);
    };
    if !one_layer_above(&v1.tree, &top) {
        return Err(SteinError::NotElementary);
    }
    let gap = top.carets() - v1.tree.carets();
    if gap > gap_bound {
        return Err(SteinError::GapBound { gap, limit: gap_bound });
    }
    // every z ≥ v1 is [C, g₁] with C refining T₁, so candidates are the
    // subtrees of the top tree in that frame
    let mut vertices: Vec<PosetVertex> = Vec::new();
    for c in top.subtrees() {
        if !c.refines(&v1.tree)? {
            continue;
        }
        let z = PosetVertex::new(c, &v1.element)?;
        if !leq(v1, &z)? || !leq(&z, v2)? {
            return Err(SteinError::Inconsistent(format!("{z:?} escapes the interval")));
        }
        let mut fresh = true;
        for w in &vertices {
            if vertex_equals(w, &z)? {
                fresh = false;
                break;
            }
        }
        if fresh {
            vertices.push(z);
        }
    }
    let n = vertices.len();
    let mut order = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            order[i][j] = leq(&vertices[i], &vertices[j])?;
        }
    }
    let base: HashSet<LeafAddress> = v1.tree.internal_vertices().into_iter().collect();
    let added: Vec<HashSet<LeafAddress>> = vertices
        .iter()
        .map(|z| z.tree.internal_vertices().into_iter().filter(|x| !base.contains(x)).collect())
        .collect();
    let matches_subset_lattice = (0..n).all(|i| (0..n).all(|j| order[i][j] == added[i].is_subset(&added[j])));
    Ok(IntervalLattice {
        gap,
        size_is_power_of_two: n == 1 << gap,
        matches_subset_lattice,
        is_distributive_lattice: distributive_lattice(&order),
        vertices,
        order,
    })
}

/// Checks that a finite partial order (given by its relation matrix) has all
/// meets and joins and that they distribute.
fn distributive_lattice(order: &[Vec<bool>]) -> bool {
    let n = order.len();
    let bound = |i: usize, j: usize, up: bool| -> Option<usize> {
        let rel = |a: usize, b: usize| if up { order[a][b] } else { order[b][a] };
        let cands: Vec<usize> = (0..n).filter(|&k| rel(i, k) && rel(j, k)).collect();
        let best: Vec<usize> = cands.iter().copied().filter(|&k| cands.iter().all(|&o| rel(k, o))).collect();
        (best.len() == 1).then(|| best[0])
    };
    let mut meet = vec![vec![0; n]; n];
    let mut join = vec![vec![0; n]; n];
    for i in 0..n {
        for j in 0..n {
            match (bound(i, j, false), bound(i, j, true)) {
                (Some(m), Some(s)) => {
                    meet[i][j] = m;
                    join[i][j] = s;
                }
                _ => return false,
            }
        }
    }
    (0..n).all(|a| (0..n).all(|b| (0..n).all(|c| meet[a][join[b][c]] == join[meet[a][b]][meet[a][c]])))
}

/// The stabilizer of `[T, id]`: every element with domain and range tree
/// `T`, checked one by one to fix the vertex and to be distinct.
#[derive(Debug, Clone, Serialize)]
pub struct StabilizerReport {
    pub leaves: usize,
    pub h_order: usize,
    pub count: u128,
    pub predicted: u128,
    pub all_fix_vertex: bool,
    pub all_distinct: bool,
}

impl StabilizerReport {
    pub fn passed(&self) -> bool {
        self.count == self.predicted && self.all_fix_vertex && self.all_distinct
    }
}

pub fn vertex_stabilizer_order(v: &PosetVertex, limit: u128) -> Result<StabilizerReport, SteinError> {
    if !v.element.is_identity() {
        return Err(SteinError::NotBaseVertex);
    }
    let group = v.group();
    let n = v.tree.leaf_count();
    let h = group.order();
    let predicted = (1..=n as u128).product::<u128>() * (h as u128).pow(n as u32);
    if predicted > limit {
        return Err(SteinError::SizeLimit { count: predicted, limit });
    }
    let perms = permutations(n);
    let labels = tuples(h as u32, n);
    let elements: Vec<SymTreePair> = perms
        .par_iter()
        .flat_map_iter(|perm| {
            labels.iter().map(move |lab| {
                let entries = (0..n)
                    .map(|i| Entry {
                        source: v.tree.leaves()[i].clone(),
                        target: v.tree.leaves()[perm[i]].clone(),
                        label: lab[i],
                    })
                    .collect();
                SymTreePair::from_entries(group, entries)
            })
        })
        .collect::<Result<_, _>>()?;
    let fixes: Vec<bool> = elements
        .par_iter()
        .map(|g| vertex_equals(&v.translate(g)?, v))
        .collect::<Result<_, _>>()?;
    let distinct: HashSet<SymTreePair> = elements.par_iter().map(SymTreePair::reduce).collect();
    Ok(StabilizerReport {
        leaves: n,
        h_order: h,
        count: elements.len() as u128,
        predicted,
        all_fix_vertex: fixes.iter().all(|&b| b),
        all_distinct: distinct.len() == elements.len(),
    })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for k in 0..n {
        out = out
            .into_iter()
            .flat_map(|p: Vec<usize>| {
                (0..=k).map(move |pos| {
                    let mut q = p.clone();
                    q.insert(pos, k);
                    q
                })
            })
            .collect();
    }
    out.sort();
    out
}

fn tuples(base: u32, n: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|t: Vec<u32>| {
                (0..base).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

/// A way to merge `d` leaves of `T` into one caret: the leaves in the order
/// they become children `0..d` of the new leaf, and the label on each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DownMove {
    pub leaves: Vec<LeafAddress>,
    pub labels: Vec<LocalElement>,
}

/// A complete tree with `n` leaves (`n ≡ 1 mod d-1`) whose first leaf is
/// `0…0`, built by expanding the last leaf repeatedly.
fn comb(d: usize, n: usize) -> Result<CompleteTree, TreeError> {
    let mut t = CompleteTree::trivial(d)?;
    while t.leaf_count() < n {
        let last = t.leaves()[t.leaf_count() - 1].clone();
        t = t.expand_leaf(&last)?;
    }
    Ok(t)
}

/// Lower face of `[T, id]` where each block `(leaf tuple, labels)` collapses
/// to one leaf. Returns the bottom tree `Z`, the merge points in `Z` and the
/// element `g` with domain `Z` expanded at those points and range `T`.
fn collapse(
    tree: &CompleteTree,
    group: &Arc<LocalGroup>,
    blocks: &[(&[usize], &[u32])],
) -> Result<(CompleteTree, Vec<LeafAddress>, SymTreePair), SteinError> {
    let d = tree.arity();
    let n = tree.leaf_count();
    let used: HashSet<usize> = blocks.iter().flat_map(|(ls, _)| ls.iter().copied()).collect();
    let rest: Vec<usize> = (0..n).filter(|i| !used.contains(i)).collect();
    let bottom = comb(d, blocks.len() + rest.len())?;
    let points: Vec<LeafAddress> = bottom.leaves()[..blocks.len()].to_vec();
    let mut entries = Vec::with_capacity(n);
    for ((ls, hs), s) in blocks.iter().zip(&points) {
        for j in 0..d {
            entries.push(Entry {
                source: s.child(j as u8),
                target: tree.leaves()[ls[j]].clone(),
                label: hs[j],
            });
        }
    }
    for (s, &i) in bottom.leaves()[blocks.len()..].iter().zip(&rest) {
        entries.push(Entry {
            source: s.clone(),
            target: tree.leaves()[i].clone(),
            label: 0,
        });
    }
    let g = SymTreePair::from_entries(group, entries)?;
    Ok((bottom, points, g))
}

impl DownMove {
    /// The lower vertex `y ⪯ [T, id]` this move produces.
    pub fn lower_vertex(&self, tree: &CompleteTree) -> Result<PosetVertex, SteinError> {
        let group = self
            .labels
            .first()
            .map(|h| h.group().clone())
            .ok_or_else(|| SteinError::Inconsistent("empty move".into()))?;
        let idx: Vec<usize> = self
            .leaves
            .iter()
            .map(|l| tree.leaf_index(l).ok_or_else(|| TreeError::NotALeaf(l.clone())))
            .collect::<Result<_, _>>()?;
        let labels: Vec<u32> = self.labels.iter().map(LocalElement::index).collect();
        let (bottom, _, g) = collapse(tree, &group, &[(&idx, &labels)])?;
        PosetVertex::new(bottom, &g)
    }
}

/// The descending link of `[T, id]` with the projection to leaf subsets.
#[derive(Debug, Clone)]
pub struct DescendingLink {
    pub base: PosetVertex,
    /// One representative move per link vertex; vertex ids are positions.
    pub moves: Vec<DownMove>,
    /// `pi[v]` is the target vertex (a `d`-subset of leaf indices) of `v`.
    pub pi: Vec<u32>,
    pub complex: SimplicialComplex,
    /// The `d`-subsets of leaf indices, indexed by target vertex id.
    pub subsets: Vec<Vec<usize>>,
    /// The disjointness complex on `subsets`.
    pub target: SimplicialComplex,
    /// Every maximal simplex was realised as the co-atoms of a cube below
    /// the base vertex.
    pub cubes_verified: bool,
}

impl DescendingLink {
    pub fn fiber_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.subsets.len()];
        for &t in &self.pi {
            sizes[t as usize] += 1;
        }
        sizes
    }
}

fn subsets_of(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn disjoint(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| !b.contains(x))
}

/// Maximal sets of pairwise compatible items (cliques of the compatibility
/// graph), as sorted id lists.
fn maximal_cliques(count: usize, compatible: impl Fn(usize, usize) -> bool + Sync) -> Vec<Vec<u32>> {
    fn grow(
        clique: &mut Vec<usize>,
        cands: &[usize],
        count: usize,
        compatible: &(impl Fn(usize, usize) -> bool + Sync),
        out: &mut Vec<Vec<u32>>,
    ) {
        if cands.is_empty() {
            // maximal iff no earlier vertex could be added either
            let extendable = (0..count)
                .filter(|v| !clique.contains(v))
                .any(|v| clique.iter().all(|&c| compatible(c, v)));
            if !extendable {
                out.push(clique.iter().map(|&v| v as u32).collect());
            }
            return;
        }
        for (i, &v) in cands.iter().enumerate() {
            let next: Vec<usize> = cands[i + 1..].iter().copied().filter(|&w| compatible(v, w)).collect();
            clique.push(v);
            grow(clique, &next, count, compatible, out);
            clique.pop();
        }
    }
    let mut out: Vec<Vec<u32>> = (0..count)
        .into_par_iter()
        .flat_map_iter(|v| {
            let cands: Vec<usize> = (v + 1..count).filter(|&w| compatible(v, w)).collect();
            let mut local = Vec::new();
            grow(&mut vec![v], &cands, count, &compatible, &mut local);
            local
        })
        .collect();
    out.sort();
    out
}

/// Builds the descending link of `v = [T, id]`.
pub fn descending_link(v: &PosetVertex, leaf_bound: usize) -> Result<DescendingLink, SteinError> {
    if !v.element.is_identity() {
        return Err(SteinError::NotBaseVertex);
    }
    let tree = &v.tree;
    let group = v.group().clone();
    let d = tree.arity();
    let n = tree.leaf_count();
    if n > leaf_bound {
        return Err(SteinError::LeafBound { leaves: n, limit: leaf_bound });
    }
    let subsets = if n >= d { subsets_of(n, d) } else { vec![] };
    let orderings = permutations(d);
    let label_tuples = tuples(group.order() as u32, d);

    // every (ordered tuple, labels) datum, grouped by its subset
    let mut data: Vec<(usize, Vec<usize>, Vec<u32>)> = Vec::new();
    for (si, s) in subsets.iter().enumerate() {
        for ord in &orderings {
            let tuple: Vec<usize> = ord.iter().map(|&k| s[k]).collect();
            for labs in &label_tuples {
                data.push((si, tuple.clone(), labs.clone()));
            }
        }
    }
    let lowers: Vec<PosetVertex> = data
        .par_iter()
        .map(|(_, tuple, labs)| {
            let (bottom, _, g) = collapse(tree, &group, &[(tuple, labs)])?;
            PosetVertex::new(bottom, &g)
        })
        .collect::<Result<_, SteinError>>()?;

    // dedupe by the vertex equivalence; identifications must stay inside a subset
    let mut reps: Vec<usize> = Vec::new();
    let mut class_of = vec![usize::MAX; data.len()];
    for i in 0..data.len() {
        let found = reps
            .par_iter()
            .map(|&r| vertex_equals(&lowers[i], &lowers[r]).map(|eq| eq.then_some(r)))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .flatten()
            .collect::<Vec<_>>();
        match found.as_slice() {
            [] => {
                class_of[i] = reps.len();
                reps.push(i);
            }
            [r] => {
                if data[*r].0 != data[i].0 {
                    return Err(SteinError::Inconsistent(format!(
                        "moves on leaf sets {:?} and {:?} give the same vertex",
                        subsets[data[*r].0], subsets[data[i].0]
                    )));
                }
                class_of[i] = class_of[*r];
            }
            _ => return Err(SteinError::Inconsistent("vertex equivalence is not transitive".into())),
        }
    }
    let moves: Vec<DownMove> = reps
        .iter()
        .map(|&r| DownMove {
            leaves: data[r].1.iter().map(|&i| tree.leaves()[i].clone()).collect(),
            labels: data[r].2.iter().map(|&h| group.element(h)).collect(),
        })
        .collect();
    let pi: Vec<u32> = reps.iter().map(|&r| data[r].0 as u32).collect();

    let complex = SimplicialComplex::from_maximal(maximal_cliques(reps.len(), |a, b| {
        disjoint(&subsets[pi[a] as usize], &subsets[pi[b] as usize])
    }));
    let target = SimplicialComplex::from_maximal(maximal_cliques(subsets.len(), |a, b| {
        disjoint(&subsets[a], &subsets[b])
    }));

    // each maximal simplex must be the set of co-atoms of a cube [z, v]
    let cubes_verified = complex
        .maximal_simplices()
        .par_iter()
        .map(|simplex| -> Result<bool, SteinError> {
            let blocks: Vec<(&[usize], &[u32])> = simplex
                .iter()
                .map(|&x| {
                    let r = reps[x as usize];
                    (data[r].1.as_slice(), data[r].2.as_slice())
                })
                .collect();
            let (bottom, points, g) = collapse(tree, &group, &blocks)?;
            let z = PosetVertex::new(bottom.clone(), &g)?;
            if !elementary(&z, v)? {
                return Ok(false);
            }
            let mut full = bottom.clone();
            for s in &points {
                full = full.expand_leaf(s)?;
            }
            if !vertex_equals(&PosetVertex::new(full, &g)?, v)? {
                return Ok(false);
            }
            for (a, &x) in simplex.iter().enumerate() {
                let mut co_atom = bottom.clone();
                for (b, s) in points.iter().enumerate() {
                    if b != a {
                        co_atom = co_atom.expand_leaf(s)?;
                    }
                }
                let y = PosetVertex::new(co_atom, &g)?;
                if !vertex_equals(&y, &lowers[reps[x as usize]])? {
                    return Ok(false);
                }
            }
            Ok(true)
        })
        .collect::<Result<Vec<bool>, _>>()?
        .into_iter()
        .all(|b| b);

    Ok(DescendingLink {
        base: v.clone(),
        moves,
        pi,
        complex,
        subsets,
        target,
        cubes_verified,
    })
}

/// Outcome of a complete-join check; `certificate` names the first failure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JoinVerdict {
    pub holds: bool,
    pub certificate: Option<String>,
}

impl JoinVerdict {
    fn fail(msg: String) -> Self {
        JoinVerdict {
            holds: false,
            certificate: Some(msg),
        }
    }
}

/// Checks that `pi: K -> L` is a complete join: surjective on vertices and
/// simplices, injective on each simplex of `K`, simplicial, and the preimage
/// of every simplex of `L` is the join of the vertex fibers.
pub fn complete_join_check(k: &SimplicialComplex, pi: &BTreeMap<u32, u32>, l: &SimplicialComplex) -> JoinVerdict {
    let mut fibers: BTreeMap<u32, Vec<u32>> = l.vertices().into_iter().map(|x| (x, Vec::new())).collect();
    for v in k.vertices() {
        let Some(&x) = pi.get(&v) else {
            return JoinVerdict::fail(format!("vertex {v} has no image"));
        };
        match fibers.get_mut(&x) {
            Some(f) => f.push(v),
            None => return JoinVerdict::fail(format!("vertex {v} maps to {x}, which is not a vertex of the target")),
        }
    }
    if let Some((x, _)) = fibers.iter().find(|(_, f)| f.is_empty()) {
        return JoinVerdict::fail(format!("not surjective: target vertex {x} has an empty fiber"));
    }
    let dim = k.dimension().unwrap_or(0);
    for p in 1..=dim {
        let bad = k.simplices(p).par_iter().find_first(|s| {
            let mut img: Vec<u32> = s.iter().map(|v| pi[v]).collect();
            img.sort_unstable();
            img.dedup();
            img.len() != s.len() || !l.contains(&img)
        });
        if let Some(s) = bad {
            let img: Vec<u32> = s.iter().map(|v| pi[v]).collect();
            return JoinVerdict::fail(format!("simplex {s:?} maps to {img:?}, not an injective image simplex"));
        }
    }
    // preimages of maximal target simplices contain every full selection;
    // smaller simplices follow by taking faces
    let maximal = l.maximal_simplices();
    let bad = maximal.par_iter().find_map_first(|sigma| {
        let mut choice = vec![0usize; sigma.len()];
        loop {
            let selection: Vec<u32> = sigma.iter().zip(&choice).map(|(x, &c)| fibers[x][c]).collect();
            if !k.contains(&selection) {
                return Some(format!(
                    "join condition fails over target simplex {sigma:?}: {selection:?} is not a simplex"
                ));
            }
            // odometer over the fibers
            let mut pos = 0;
            loop {
                if pos == sigma.len() {
                    return None;
                }
                choice[pos] += 1;
                if choice[pos] < fibers[&sigma[pos]].len() {
                    break;
                }
                choice[pos] = 0;
                pos += 1;
            }
        }
    });
    match bad {
        Some(msg) => JoinVerdict::fail(msg),
        None => JoinVerdict {
            holds: true,
            certificate: None,
        },
    }
}

impl DescendingLink {
    pub fn pi_map(&self) -> BTreeMap<u32, u32> {
        self.pi.iter().enumerate().map(|(v, &x)| (v as u32, x)).collect()
    }

    pub fn complete_join(&self) -> JoinVerdict {
        complete_join_check(&self.complex, &self.pi_map(), &self.target)
    }
}

/// Orbit count of vertices at one height under the left action, with the
/// vertices used and the witnesses checked.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitCensus {
    pub height: usize,
    pub sampled: usize,
    pub orbits: usize,
    pub witnesses_checked: usize,
}

/// Takes `[T, id]` for every tree with `height` carets plus `random_frames`
/// translates `[T, f]` with random `f`, and joins two vertices whenever an
/// explicit element carries one to the other.
pub fn orbit_census<R: Rng>(
    group: &Arc<LocalGroup>,
    height: usize,
    height_bound: usize,
    random_frames: usize,
    rng: &mut R,
) -> Result<OrbitCensus, SteinError> {
    if height > height_bound {
        return Err(SteinError::HeightBound { height, limit: height_bound });
    }
    let trees = trees_with_carets(group.arity(), height)?;
    let mut vertices: Vec<PosetVertex> = trees
        .iter()
        .map(|t| PosetVertex::base(t.clone(), group))
        .collect::<Result<_, _>>()?;
    for _ in 0..random_frames {
        let t = trees[rng.gen_range(0..trees.len())].clone();
        let f = random_element(group, 3, rng)?;
        vertices.push(PosetVertex::new(t, &f)?);
    }
    let root = &vertices[0];
    let mut parent: Vec<usize> = (0..vertices.len()).collect();
    let mut checked = 0;
    for (i, v) in vertices.iter().enumerate().skip(1) {
        // w = f ∘ m, where m maps the first tree onto T leaf by leaf in order
        let entries = root
            .tree
            .leaves()
            .iter()
            .zip(v.tree.leaves())
            .map(|(s, t)| Entry {
                source: s.clone(),
                target: t.clone(),
                label: 0,
            })
            .collect();
        let m = SymTreePair::from_entries(group, entries)?;
        let w = v.element.compose(&m)?;
        if vertex_equals(&root.translate(&w)?, v)? {
            parent[i] = 0;
        }
        checked += 1;
    }
    let orbits = parent.iter().enumerate().filter(|&(i, &p)| i == p).count();
    Ok(OrbitCensus {
        height,
        sampled: vertices.len(),
        orbits,
        witnesses_checked: checked,
    })
}

/// Machine-readable summary of one descending-link computation.
#[derive(Debug, Clone, Serialize)]
pub struct DlkReport {
    pub d: usize,
    pub n: usize,
    pub h_order: usize,
    pub vertex_count: usize,
    pub simplex_counts: Vec<usize>,
    pub fiber_sizes: Vec<usize>,
    pub target_simplex_counts: Vec<usize>,
    pub cubes_verified: bool,
    pub complete_join: JoinVerdict,
    pub betti: Vec<usize>,
    pub torsion: Vec<Vec<u64>>,
    pub rational_ranks_agree: bool,
    pub euler_check: bool,
    pub target_betti: Vec<usize>,
    pub target_torsion: Vec<Vec<u64>>,
    pub wall_time_ms: u128,
}

impl DlkReport {
    pub fn passed(&self) -> bool {
        self.cubes_verified && self.complete_join.holds && self.rational_ranks_agree && self.euler_check
    }
}

fn small_torsion(h: &HomologyProfile) -> Result<Vec<Vec<u64>>, SteinError> {
    use num_traits::ToPrimitive;
    h.torsion
        .iter()
        .map(|level| {
            level
                .iter()
                .map(|t| t.to_u64().ok_or_else(|| SteinError::Inconsistent(format!("torsion {t} too large"))))
                .collect()
        })
        .collect()
}

/// Builds the link of `[T, id]`, checks the complete join and computes the
/// reduced homology of the link and of its target.
pub fn dlk_report(tree: &CompleteTree, group: &Arc<LocalGroup>, leaf_bound: usize) -> Result<DlkReport, SteinError> {
    let start = Instant::now();
    let v = PosetVertex::base(tree.clone(), group)?;
    let link = descending_link(&v, leaf_bound)?;
    let verdict = link.complete_join();
    let h = reduced_homology(&link.complex)?;
    let ht = reduced_homology(&link.target)?;
    let mut fibers = link.fiber_sizes();
    fibers.sort_unstable();
    fibers.dedup();
    Ok(DlkReport {
        d: tree.arity(),
        n: tree.leaf_count(),
        h_order: group.order(),
        vertex_count: link.complex.vertex_count(),
        simplex_counts: link.complex.f_vector(),
        fiber_sizes: fibers,
        target_simplex_counts: link.target.f_vector(),
        cubes_verified: link.cubes_verified,
        complete_join: verdict,
        torsion: small_torsion(&h)?,
        rational_ranks_agree: h.boundary_ranks == h.rational_ranks && ht.boundary_ranks == ht.rational_ranks,
        euler_check: h.euler_check && ht.euler_check,
        betti: h.betti,
        target_torsion: small_torsion(&ht)?,
        target_betti: ht.betti,
        wall_time_ms: start.elapsed().as_millis(),
    })
}
