//! Labeled tree pairs: elements of `V_d(H, q)`.
//!
//! An element is a triple `(F-, (b, h), F+)`: a domain tree, a range tree of
//! the same size, a bijection `b` from domain leaves to range leaves, and a
//! label `h_l ∈ H` on every domain leaf. It acts on an infinite word
//! `c = l · t` (with `l` the domain leaf above `c`) by
//!
//! ```text
//! c  ↦  b(l) · q(h_l)(t_1) q(h_l)(t_2) …
//! ```
//!
//! Representatives are not unique; expanding a domain leaf `l` into its
//! children `l·j ↦ b(l)·q(h_l)(j)` (all labeled `h_l`) gives another
//! representative of the same element. [`SymTreePair::reduce`] undoes such
//! expansions until none applies, and its output is the canonical form used for
//! equality. Elements returned by [`SymTreePair::compose`],
//! [`SymTreePair::inverse`] and friends are always reduced.

mod enumerate;
mod point;
mod text;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use enumerate::{
    all_elements, bfs_ball, labeled_elements_up_to, random_element, random_unlabeled_element,
    vd_generating_set, Ball, DEFAULT_BALL_LIMIT,
};
pub use point::CantorPoint;
pub use text::{parse_element, ElementHeader, ElementText};

use crate::localgroup::{GroupError, LocalElement, LocalGroup};
use crate::trees::{prefix_index, CompleteTree, LeafAddress, TreeError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ElementError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("invalid tree pair: {0}")]
    Invalid(String),
    #[error("ball size limit {limit} exceeded")]
    BallLimit { limit: usize },
    #[error("point digit {digit} out of range for arity {arity}")]
    PointDigit { digit: u8, arity: usize },
}

/// One row of a tree pair: domain leaf, range leaf, label index.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Entry {
    pub source: LeafAddress,
    pub target: LeafAddress,
    pub label: u32,
}

/// A labeled tree-pair representative of an element of `V_d(H, q)`.
///
/// Entries are sorted by domain leaf. Equality is structural, so compare
/// reduced forms (or use [`SymTreePair::equals`]).
#[derive(Clone)]
pub struct SymTreePair {
    group: Arc<LocalGroup>,
    entries: Vec<Entry>,
}

impl PartialEq for SymTreePair {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries && self.group.same_as(&other.group)
    }
}

impl Eq for SymTreePair {}

impl std::hash::Hash for SymTreePair {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.entries.hash(state);
    }
}

impl PartialOrd for SymTreePair {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SymTreePair {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.entries.len(), &self.entries).cmp(&(other.entries.len(), &other.entries))
    }
}

impl fmt::Debug for SymTreePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}->{}:{}", e.source, e.target, self.group.word(e.label))?;
        }
        f.write_str("]")
    }
}

impl SymTreePair {
    /// Builds and validates a representative from `(domain leaf, range leaf,
    /// label)` rows.
    pub fn new(
        group: &Arc<LocalGroup>,
        rows: impl IntoIterator<Item = (LeafAddress, LeafAddress, LocalElement)>,
    ) -> Result<Self, ElementError> {
        let mut entries = Vec::new();
        for (source, target, label) in rows {
            if !label.group().same_as(group) {
                return Err(GroupError::GroupMismatch.into());
            }
            entries.push(Entry {
                source,
                target,
                label: label.index(),
            });
        }
        Self::from_entries(group, entries)
    }

    pub(crate) fn from_entries(group: &Arc<LocalGroup>, mut entries: Vec<Entry>) -> Result<Self, ElementError> {
        entries.sort();
        let d = group.arity();
        let limit = group.depth_limit();
        let domain = CompleteTree::from_leaves(d, entries.iter().map(|e| e.source.clone()))?;
        let range = CompleteTree::from_leaves(d, entries.iter().map(|e| e.target.clone()))
            .map_err(|e| ElementError::Invalid(format!("range leaves: {e}")))?;
        if domain.depth() > limit || range.depth() > limit {
            return Err(TreeError::DepthLimit { limit }.into());
        }
        if entries.iter().any(|e| e.label as usize >= group.order()) {
            return Err(ElementError::Invalid("label out of range".into()));
        }
        Ok(SymTreePair {
            group: Arc::clone(group),
            entries,
        })
    }

    /// Trusted constructor for internally produced entries, sorted by source.
    fn from_sorted(group: &Arc<LocalGroup>, entries: Vec<Entry>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].source < w[1].source));
        SymTreePair {
            group: Arc::clone(group),
            entries,
        }
    }

    pub fn identity(group: &Arc<LocalGroup>) -> Self {
        SymTreePair::from_sorted(
            group,
            vec![Entry {
                source: LeafAddress::root(),
                target: LeafAddress::root(),
                label: 0,
            }],
        )
    }

    pub fn group(&self) -> &Arc<LocalGroup> {
        &self.group
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn arity(&self) -> usize {
        self.group.arity()
    }

    pub fn domain(&self) -> CompleteTree {
        CompleteTree::from_sorted_unchecked(
            self.group.arity() as u8,
            self.entries.iter().map(|e| e.source.clone()).collect(),
            self.group.depth_limit(),
        )
    }

    pub fn range(&self) -> CompleteTree {
        let mut leaves: Vec<LeafAddress> = self.entries.iter().map(|e| e.target.clone()).collect();
        leaves.sort();
        CompleteTree::from_sorted_unchecked(self.group.arity() as u8, leaves, self.group.depth_limit())
    }

    /// Number of carets of the domain (and range) tree of this representative.
    pub fn carets(&self) -> usize {
        (self.entries.len() - 1) / (self.group.arity() - 1)
    }

    /// Deepest leaf on either side.
    pub fn depth(&self) -> usize {
        self.entries
            .iter()
            .map(|e| e.source.len().max(e.target.len()))
            .max()
            .unwrap_or(0)
    }

    pub fn is_identity(&self) -> bool {
        let r = self.reduce();
        r.entries.len() == 1 && r.entries[0].label == 0
    }

    /// True iff every label is the identity of `H`.
    pub fn is_unlabeled(&self) -> bool {
        self.entries.iter().all(|e| e.label == 0)
    }

    pub fn label_of(&self, source: &LeafAddress) -> Option<LocalElement> {
        self.entries
            .binary_search_by(|e| e.source.cmp(source))
            .ok()
            .map(|i| self.group.element(self.entries[i].label))
    }

    fn same_group(&self, other: &SymTreePair) -> Result<(), ElementError> {
        if self.group.same_as(&other.group) {
            Ok(())
        } else {
            Err(GroupError::GroupMismatch.into())
        }
    }

    /// Children of one entry: `l·j ↦ b(l)·q(h)(j)`, labeled `h`.
    fn split_entry(&self, e: &Entry, out: &mut Vec<Entry>) -> Result<(), ElementError> {
        let limit = self.group.depth_limit();
        if e.source.len() + 1 > limit || e.target.len() + 1 > limit {
            return Err(TreeError::DepthLimit { limit }.into());
        }
        let twist = self.group.q(e.label);
        for j in 0..self.group.arity() {
            out.push(Entry {
                source: e.source.child(j as u8),
                target: e.target.child(twist.apply(j) as u8),
                label: e.label,
            });
        }
        Ok(())
    }

    /// Attaches a caret at the domain leaf `l` (and at `b(l)` in the range).
    /// Represents the same element.
    pub fn expand(&self, l: &LeafAddress) -> Result<SymTreePair, ElementError> {
        let idx = self
            .entries
            .binary_search_by(|e| e.source.cmp(l))
            .map_err(|_| TreeError::NotALeaf(l.clone()))?;
        let mut entries = Vec::with_capacity(self.entries.len() + self.group.arity() - 1);
        entries.extend_from_slice(&self.entries[..idx]);
        self.split_entry(&self.entries[idx], &mut entries)?;
        entries.extend_from_slice(&self.entries[idx + 1..]);
        Ok(SymTreePair::from_sorted(&self.group, entries))
    }

    /// Attaches a caret at the range leaf `m`.
    pub fn expand_range_leaf(&self, m: &LeafAddress) -> Result<SymTreePair, ElementError> {
        let source = self
            .entries
            .iter()
            .find(|e| &e.target == m)
            .map(|e| e.source.clone())
            .ok_or_else(|| TreeError::NotALeaf(m.clone()))?;
        self.expand(&source)
    }

    /// Expands until the domain tree is exactly `tree`, which must refine the
    /// current domain.
    pub fn expand_domain_to(&self, tree: &CompleteTree) -> Result<SymTreePair, ElementError> {
        self.expand_to(tree, |e| &e.source)
    }

    /// Expands until the range tree is exactly `tree`, which must refine the
    /// current range.
    pub fn expand_range_to(&self, tree: &CompleteTree) -> Result<SymTreePair, ElementError> {
        self.expand_to(tree, |e| &e.target)
    }

    fn expand_to(
        &self,
        tree: &CompleteTree,
        side: impl Fn(&Entry) -> &LeafAddress,
    ) -> Result<SymTreePair, ElementError> {
        if tree.arity() != self.arity() {
            return Err(TreeError::ArityMismatch(tree.arity() as u8, self.arity() as u8).into());
        }
        let mut out = Vec::with_capacity(tree.leaf_count());
        let mut stack: Vec<Entry> = Vec::new();
        for e in &self.entries {
            stack.push(e.clone());
            while let Some(cur) = stack.pop() {
                let key = side(&cur);
                if tree.contains_leaf(key) {
                    out.push(cur);
                    continue;
                }
                // the entry must sit strictly above some leaf of the target tree
                let below = tree
                    .leaves()
                    .partition_point(|l| l <= key);
                let extends = tree
                    .leaves()
                    .get(below)
                    .is_some_and(|l| key.is_proper_prefix_of(l));
                if !extends {
                    return Err(ElementError::Invalid(format!(
                        "tree {tree} does not refine the representative at {key}"
                    )));
                }
                let mut kids = Vec::with_capacity(self.arity());
                self.split_entry(&cur, &mut kids)?;
                stack.extend(kids.into_iter().rev());
            }
        }
        out.sort();
        Ok(SymTreePair::from_sorted(&self.group, out))
    }

    /// Contracts carets until no contraction applies. The result is the unique
    /// minimal representative of the element.
    pub fn reduce(&self) -> SymTreePair {
        let d = self.group.arity();
        let mut entries = self.entries.clone();
        loop {
            let mut changed = false;
            let mut out: Vec<Entry> = Vec::with_capacity(entries.len());
            let mut i = 0;
            while i < entries.len() {
                if i + d <= entries.len() && self.contractible(&entries[i..i + d]) {
                    let first = &entries[i];
                    out.push(Entry {
                        source: first.source.parent().expect("contractible rows are not the root"),
                        target: first.target.parent().expect("contractible rows are not the root"),
                        label: first.label,
                    });
                    i += d;
                    changed = true;
                } else {
                    out.push(entries[i].clone());
                    i += 1;
                }
            }
            entries = out;
            if !changed {
                break;
            }
        }
        SymTreePair::from_sorted(&self.group, entries)
    }

    /// `d` consecutive rows `p·j ↦ p'·q(h)(j)` with a common label `h`.
    fn contractible(&self, rows: &[Entry]) -> bool {
        let first = &rows[0];
        let (Some(sp), Some(tp)) = (first.source.parent(), first.target.parent()) else {
            return false;
        };
        let twist = self.group.q(first.label);
        rows.iter().enumerate().all(|(j, e)| {
            e.label == first.label
                && e.source.len() == first.source.len()
                && e.source.last_digit() == Some(j as u8)
                && sp.is_prefix_of(e.source.digits())
                && e.target.len() == first.target.len()
                && tp.is_prefix_of(e.target.digits())
                && e.target.last_digit() == Some(twist.apply(j) as u8)
        })
    }

    pub fn is_reduced(&self) -> bool {
        self.reduce().entries.len() == self.entries.len()
    }

    /// `self ∘ f`: apply `f` first.
    pub fn compose(&self, f: &SymTreePair) -> Result<SymTreePair, ElementError> {
        self.same_group(f)?;
        let middle = f.range().common_refinement(&self.domain())?;
        let f2 = f.expand_range_to(&middle)?;
        let g2 = self.expand_domain_to(&middle)?;
        let group = &self.group;
        let entries = f2
            .entries
            .iter()
            .map(|e| {
                let k = g2
                    .entries
                    .binary_search_by(|x| x.source.cmp(&e.target))
                    .expect("ranges were refined to the same tree");
                let after = &g2.entries[k];
                Entry {
                    source: e.source.clone(),
                    target: after.target.clone(),
                    label: group.mul_idx(after.label, e.label),
                }
            })
            .collect();
        Ok(SymTreePair::from_sorted(group, entries).reduce())
    }

    /// Product written left to right: apply `self` first, then `next`.
    pub fn then(&self, next: &SymTreePair) -> Result<SymTreePair, ElementError> {
        next.compose(self)
    }

    pub fn inverse(&self) -> SymTreePair {
        let mut entries: Vec<Entry> = self
            .entries
            .iter()
            .map(|e| Entry {
                source: e.target.clone(),
                target: e.source.clone(),
                label: self.group.inv_idx(e.label),
            })
            .collect();
        entries.sort();
        SymTreePair::from_sorted(&self.group, entries).reduce()
    }

    /// Image of an eventually periodic point.
    pub fn act(&self, c: &CantorPoint) -> Result<CantorPoint, ElementError> {
        if c.max_digit() as usize >= self.arity() {
            return Err(ElementError::PointDigit {
                digit: c.max_digit(),
                arity: self.arity(),
            });
        }
        let depth = self.entries.iter().map(|e| e.source.len()).max().unwrap_or(0);
        let word = c.truncate(depth);
        let sources: Vec<&LeafAddress> = self.entries.iter().map(|e| &e.source).collect();
        let pos = sources.partition_point(|l| l.digits() <= &word[..]);
        let e = &self.entries[pos - 1];
        debug_assert!(e.source.is_prefix_of(&word));
        let tail = c.shift(e.source.len()).map_digits(self.group.q(e.label));
        Ok(tail.prepend(e.target.digits()))
    }

    /// Equality of group elements, via canonical forms.
    pub fn equals(&self, other: &SymTreePair) -> Result<bool, ElementError> {
        self.same_group(other)?;
        Ok(self.reduce().entries == other.reduce().entries)
    }

    /// The image in `V_d(H̄)`: every label `h` becomes `q(h)`.
    pub fn pi(&self) -> SymTreePair {
        let image = self.group.image_group();
        let entries = self
            .entries
            .iter()
            .map(|e| Entry {
                label: self.group.image_index(e.label),
                ..e.clone()
            })
            .collect();
        SymTreePair::from_sorted(&image, entries).reduce()
    }

    /// Lifts an element of `V_d(H̄)` back to `V_d(H, q)` by choosing, for every
    /// label, the section element over it. `pi(pi_section(v)) = v`.
    pub fn pi_section(v: &SymTreePair, group: &Arc<LocalGroup>) -> Result<SymTreePair, ElementError> {
        if !v.group.same_as(&group.image_group()) {
            return Err(GroupError::GroupMismatch.into());
        }
        let entries = v
            .entries
            .iter()
            .map(|e| Entry {
                label: group.section_index(e.label),
                ..e.clone()
            })
            .collect();
        Ok(SymTreePair::from_sorted(group, entries).reduce())
    }

    /// The single caret labeled `(h, 1, …, 1)` with identity bijection.
    pub fn iota(h: &LocalElement) -> SymTreePair {
        let group = h.group();
        let entries = (0..group.arity() as u8)
            .map(|j| Entry {
                source: LeafAddress::from_digits(vec![j]),
                target: LeafAddress::from_digits(vec![j]),
                label: if j == 0 { h.index() } else { 0 },
            })
            .collect();
        SymTreePair::from_sorted(group, entries).reduce()
    }

    /// The label on the leftmost domain leaf. Expansion of the leftmost leaf
    /// hands its label to the new leftmost leaf, so any representative works.
    pub fn retract(&self) -> LocalElement {
        self.group.element(self.entries[0].label)
    }

    /// Image of a domain leaf or deeper vertex address under the bijection,
    /// as a finite word.
    pub fn apply_to_address(&self, address: &LeafAddress) -> Result<LeafAddress, ElementError> {
        let sources: Vec<LeafAddress> = self.entries.iter().map(|e| e.source.clone()).collect();
        let i = prefix_index(&sources, address.digits())
            .ok_or_else(|| TreeError::Underspecified(address.clone()))?;
        let e = &self.entries[i];
        let twist = self.group.q(e.label);
        let mut digits = e.target.digits().to_vec();
        digits.extend(address.digits()[e.source.len()..].iter().map(|&x| twist.apply(x as usize) as u8));
        Ok(LeafAddress::from_digits(digits))
    }
}

#[cfg(test)]
mod tests;
