//! Complete finite rooted subtrees of the infinite rooted d-ary tree.
//!
//! A tree is stored only through its leaves. Each leaf is addressed by the
//! finite word of child indices leading to it from the root, so the leaf set
//! of a complete tree is a maximal prefix-free code over `{0, .., d-1}`.
//! Internal vertices are implicit.

use std::fmt;

use thiserror::Error;

use crate::parse::ParseError;

/// Depth bound applied to trees unless a caller asks for something else.
pub const DEFAULT_DEPTH_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("invalid arity {0}: trees need at least 2 children per caret")]
    InvalidArity(usize),
    #[error("arity mismatch: {0} vs {1}")]
    ArityMismatch(u8, u8),
    #[error("{0} is not a leaf of the tree")]
    NotALeaf(LeafAddress),
    #[error("depth limit {limit} exceeded")]
    DepthLimit { limit: usize },
    #[error("digit {digit} is out of range for arity {arity}")]
    DigitOutOfRange { digit: u8, arity: u8 },
    #[error("leaf set is not a complete prefix code: {0}")]
    Incomplete(String),
    #[error("address {0} is shorter than the leaf it falls under")]
    Underspecified(LeafAddress),
}

/// A vertex of the d-ary tree, written as the word of child indices from the
/// root. The empty word is the root.
///
/// The derived ordering is lexicographic with a prefix sorting before its
/// extensions, which is the left-to-right order of leaves in a planar drawing.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LeafAddress(Vec<u8>);

impl LeafAddress {
    pub fn root() -> Self {
        LeafAddress(Vec::new())
    }

    pub fn from_digits(digits: impl Into<Vec<u8>>) -> Self {
        LeafAddress(digits.into())
    }

    pub fn digits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, j: u8) -> Self {
        let mut digits = Vec::with_capacity(self.0.len() + 1);
        digits.extend_from_slice(&self.0);
        digits.push(j);
        LeafAddress(digits)
    }

    pub fn parent(&self) -> Option<LeafAddress> {
        if self.0.is_empty() {
            None
        } else {
            Some(LeafAddress(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn last_digit(&self) -> Option<u8> {
        self.0.last().copied()
    }

    pub fn is_prefix_of(&self, word: &[u8]) -> bool {
        word.len() >= self.0.len() && word[..self.0.len()] == self.0[..]
    }

    pub fn is_proper_prefix_of(&self, other: &LeafAddress) -> bool {
        other.0.len() > self.0.len() && self.is_prefix_of(&other.0)
    }

    /// Parses a word such as `"0110"`; `"e"` is the root.
    pub fn parse(text: &str) -> Result<Self, String> {
        if text == "e" {
            return Ok(LeafAddress::root());
        }
        if text.is_empty() {
            return Err("empty leaf word (write the root as \"e\")".into());
        }
        text.chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as u8)
                    .ok_or_else(|| format!("invalid digit {c:?} in leaf word {text:?}"))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(LeafAddress)
    }
}

impl fmt::Display for LeafAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for &d in &self.0 {
            if d < 10 {
                write!(f, "{d}")?;
            } else {
                write!(f, "[{d}]")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LeafAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A complete finite rooted subtree, i.e. a maximal prefix-free code.
///
/// Leaves are kept sorted. The depth limit travels with the tree but takes no
/// part in equality, ordering or hashing.
#[derive(Clone)]
pub struct CompleteTree {
    arity: u8,
    leaves: Vec<LeafAddress>,
    depth_limit: usize,
}

impl PartialEq for CompleteTree {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity && self.leaves == other.leaves
    }
}

impl Eq for CompleteTree {}

impl std::hash::Hash for CompleteTree {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.arity.hash(state);
        self.leaves.hash(state);
    }
}

impl PartialOrd for CompleteTree {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CompleteTree {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.arity, self.leaves.len(), &self.leaves).cmp(&(
            other.arity,
            other.leaves.len(),
            &other.leaves,
        ))
    }
}

impl fmt::Debug for CompleteTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CompleteTree(d={}, {{{}}})", self.arity, self)
    }
}

impl fmt::Display for CompleteTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.leaves.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

pub(crate) fn check_arity(d: usize) -> Result<u8, TreeError> {
    if (2..=u8::MAX as usize).contains(&d) {
        Ok(d as u8)
    } else {
        Err(TreeError::InvalidArity(d))
    }
}

/// Index of the unique leaf in `sorted` that is a prefix of `word`, if any.
///
/// In a prefix code the leaf above `word` is the largest leaf that is `<= word`.
pub(crate) fn prefix_index(sorted: &[LeafAddress], word: &[u8]) -> Option<usize> {
    let pos = sorted.partition_point(|l| l.digits() <= word);
    if pos == 0 {
        return None;
    }
    let candidate = &sorted[pos - 1];
    candidate.is_prefix_of(word).then_some(pos - 1)
}

impl CompleteTree {
    /// The root-only tree.
    pub fn trivial(d: usize) -> Result<Self, TreeError> {
        let arity = check_arity(d)?;
        Ok(CompleteTree {
            arity,
            leaves: vec![LeafAddress::root()],
            depth_limit: DEFAULT_DEPTH_LIMIT,
        })
    }

    /// Validates an arbitrary leaf set.
    pub fn from_leaves(d: usize, leaves: impl IntoIterator<Item = LeafAddress>) -> Result<Self, TreeError> {
        let arity = check_arity(d)?;
        let mut leaves: Vec<LeafAddress> = leaves.into_iter().collect();
        leaves.sort();
        for l in &leaves {
            if let Some(&digit) = l.digits().iter().find(|&&x| x >= arity) {
                return Err(TreeError::DigitOutOfRange { digit, arity });
            }
        }
        let len = leaves.len();
        leaves.dedup();
        if leaves.len() != len {
            return Err(TreeError::Incomplete("repeated leaf".into()));
        }
        check_complete(arity, &leaves, 0)?;
        let tree = CompleteTree {
            arity,
            leaves,
            depth_limit: DEFAULT_DEPTH_LIMIT,
        };
        if tree.depth() > tree.depth_limit {
            return Err(TreeError::DepthLimit {
                limit: tree.depth_limit,
            });
        }
        Ok(tree)
    }

    /// Skips validation. Callers guarantee the leaves are a sorted complete code.
    pub(crate) fn from_sorted_unchecked(arity: u8, leaves: Vec<LeafAddress>, depth_limit: usize) -> Self {
        debug_assert!(leaves.windows(2).all(|w| w[0] < w[1]));
        CompleteTree {
            arity,
            leaves,
            depth_limit,
        }
    }

    /// Parses the whitespace-separated text form, e.g. `"00 01 1"` or `"e"`.
    pub fn parse(d: usize, text: &str) -> Result<Self, ParseError> {
        let mut leaves = Vec::new();
        let mut col = 1;
        for token in text.split_whitespace() {
            let start = text[col - 1..].find(token).map(|o| o + col).unwrap_or(col);
            leaves.push(LeafAddress::parse(token).map_err(|m| ParseError::new(1, start, m))?);
            col = start + token.len();
        }
        if leaves.is_empty() {
            return Err(ParseError::new(1, 1, "empty tree"));
        }
        CompleteTree::from_leaves(d, leaves).map_err(|e| ParseError::new(1, 1, e.to_string()))
    }

    pub fn with_depth_limit(mut self, limit: usize) -> Self {
        self.depth_limit = limit;
        self
    }

    pub fn depth_limit(&self) -> usize {
        self.depth_limit
    }

    pub fn arity(&self) -> usize {
        self.arity as usize
    }

    pub fn leaves(&self) -> &[LeafAddress] {
        &self.leaves
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    pub fn carets(&self) -> usize {
        (self.leaves.len() - 1) / (self.arity as usize - 1)
    }

    /// Length of the longest leaf address.
    pub fn depth(&self) -> usize {
        self.leaves.iter().map(LeafAddress::len).max().unwrap_or(0)
    }

    pub fn contains_leaf(&self, l: &LeafAddress) -> bool {
        self.leaves.binary_search(l).is_ok()
    }

    /// Position of `l` in the sorted leaf list.
    pub fn leaf_index(&self, l: &LeafAddress) -> Option<usize> {
        self.leaves.binary_search(l).ok()
    }

    /// Replaces the leaf `l` with its `d` children.
    pub fn expand_leaf(&self, l: &LeafAddress) -> Result<Self, TreeError> {
        let idx = self
            .leaves
            .binary_search(l)
            .map_err(|_| TreeError::NotALeaf(l.clone()))?;
        if l.len() + 1 > self.depth_limit {
            return Err(TreeError::DepthLimit {
                limit: self.depth_limit,
            });
        }
        let mut leaves = Vec::with_capacity(self.leaves.len() + self.arity as usize - 1);
        leaves.extend_from_slice(&self.leaves[..idx]);
        leaves.extend((0..self.arity).map(|j| l.child(j)));
        leaves.extend_from_slice(&self.leaves[idx + 1..]);
        Ok(CompleteTree {
            arity: self.arity,
            leaves,
            depth_limit: self.depth_limit,
        })
    }

    fn same_arity(&self, other: &Self) -> Result<(), TreeError> {
        if self.arity == other.arity {
            Ok(())
        } else {
            Err(TreeError::ArityMismatch(self.arity, other.arity))
        }
    }

    /// True iff `self` is obtained from `coarser` by expanding leaves, i.e. every
    /// leaf of `self` lies below a leaf of `coarser`.
    pub fn refines(&self, coarser: &CompleteTree) -> Result<bool, TreeError> {
        self.same_arity(coarser)?;
        Ok(self
            .leaves
            .iter()
            .all(|l| prefix_index(&coarser.leaves, l.digits()).is_some()))
    }

    /// The least common refinement: the leaves of the union of both trees.
    pub fn common_refinement(&self, other: &CompleteTree) -> Result<CompleteTree, TreeError> {
        self.same_arity(other)?;
        let mut merged: Vec<LeafAddress> = Vec::with_capacity(self.leaves.len() + other.leaves.len());
        let (mut i, mut j) = (0, 0);
        while i < self.leaves.len() || j < other.leaves.len() {
            let next = match (self.leaves.get(i), other.leaves.get(j)) {
                (Some(a), Some(b)) if a == b => {
                    i += 1;
                    j += 1;
                    a
                }
                (Some(a), Some(b)) if a < b => {
                    i += 1;
                    a
                }
                (Some(_), Some(b)) => {
                    j += 1;
                    b
                }
                (Some(a), None) => {
                    i += 1;
                    a
                }
                (None, Some(b)) => {
                    j += 1;
                    b
                }
                (None, None) => unreachable!(),
            };
            // a word that is a proper prefix of another sorts immediately before
            // its first extension, so only the previous entry can be shadowed
            if let Some(prev) = merged.last() {
                if prev.is_proper_prefix_of(next) {
                    merged.pop();
                }
            }
            merged.push(next.clone());
        }
        let limit = self.depth_limit.min(other.depth_limit);
        let tree = CompleteTree {
            arity: self.arity,
            leaves: merged,
            depth_limit: limit,
        };
        if tree.depth() > limit {
            return Err(TreeError::DepthLimit { limit });
        }
        Ok(tree)
    }

    /// The leaf lying above the given vertex address.
    pub fn nearest_leaf(&self, address: &LeafAddress) -> Result<&LeafAddress, TreeError> {
        if let Some(&digit) = address.digits().iter().find(|&&x| x >= self.arity) {
            return Err(TreeError::DigitOutOfRange {
                digit,
                arity: self.arity,
            });
        }
        prefix_index(&self.leaves, address.digits())
            .map(|i| &self.leaves[i])
            .ok_or_else(|| TreeError::Underspecified(address.clone()))
    }

    /// The leaf whose subtree contains the given infinite word.
    pub fn nearest_leaf_of_point(&self, point: &crate::element::CantorPoint) -> &LeafAddress {
        let word = point.truncate(self.depth());
        let idx = prefix_index(&self.leaves, &word).expect("complete prefix code covers every point");
        &self.leaves[idx]
    }

    /// Index of the leftmost (all-zero) leaf, which is always the first.
    pub fn leftmost_leaf(&self) -> &LeafAddress {
        &self.leaves[0]
    }

    /// Internal vertices, in sorted order.
    pub fn internal_vertices(&self) -> Vec<LeafAddress> {
        let mut out: Vec<LeafAddress> = Vec::new();
        for l in &self.leaves {
            let mut p = l.parent();
            while let Some(v) = p {
                p = v.parent();
                out.push(v);
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// All complete subtrees `S` with `self` refining `S`, sorted.
    pub fn subtrees(&self) -> Vec<CompleteTree> {
        let internal = self.internal_vertices();
        let mut out: Vec<CompleteTree> = subtree_leaf_sets(self.arity, &internal, &LeafAddress::root())
            .into_iter()
            .map(|mut ls| {
                ls.sort();
                CompleteTree::from_sorted_unchecked(self.arity, ls, self.depth_limit)
            })
            .collect();
        out.sort();
        out
    }
}

/// Leaf sets of the complete subtrees rooted at `v` inside the tree whose
/// internal vertices are `internal`.
fn subtree_leaf_sets(arity: u8, internal: &[LeafAddress], v: &LeafAddress) -> Vec<Vec<LeafAddress>> {
    let mut result = vec![vec![v.clone()]];
    if internal.binary_search(v).is_ok() {
        let mut combos: Vec<Vec<LeafAddress>> = vec![vec![]];
        for j in 0..arity {
            let child_opts = subtree_leaf_sets(arity, internal, &v.child(j));
            let mut next = Vec::with_capacity(combos.len() * child_opts.len());
            for c in &combos {
                for o in &child_opts {
                    let mut merged = c.clone();
                    merged.extend(o.iter().cloned());
                    next.push(merged);
                }
            }
            combos = next;
        }
        result.extend(combos);
    }
    result
}

fn check_complete(arity: u8, leaves: &[LeafAddress], depth: usize) -> Result<(), TreeError> {
    match leaves {
        [] => Err(TreeError::Incomplete("missing subtree".into())),
        [only] if only.len() == depth => Ok(()),
        _ => {
            if let Some(short) = leaves.iter().find(|l| l.len() <= depth) {
                return Err(TreeError::Incomplete(format!("{short} is a prefix of another leaf")));
            }
            let mut start = 0;
            for j in 0..arity {
                let end = start + leaves[start..].partition_point(|l| l.digits()[depth] == j);
                if end == start {
                    let parent = LeafAddress::from_digits(leaves[0].digits()[..depth].to_vec());
                    return Err(TreeError::Incomplete(format!(
                        "vertex {parent} is missing child {j}"
                    )));
                }
                check_complete(arity, &leaves[start..end], depth + 1)?;
                start = end;
            }
            Ok(())
        }
    }
}

/// Every complete tree of arity `d` with at most `max_carets` carets, sorted by
/// caret count and then by leaf list.
pub fn all_trees(d: usize, max_carets: usize) -> Result<Vec<CompleteTree>, TreeError> {
    let mut layer = vec![CompleteTree::trivial(d)?];
    let mut out = layer.clone();
    for _ in 0..max_carets {
        let mut next = std::collections::BTreeSet::new();
        for t in &layer {
            for l in t.leaves() {
                next.insert(t.expand_leaf(l)?);
            }
        }
        layer = next.into_iter().collect();
        out.extend(layer.iter().cloned());
    }
    Ok(out)
}

/// Trees with exactly `carets` carets.
pub fn trees_with_carets(d: usize, carets: usize) -> Result<Vec<CompleteTree>, TreeError> {
    Ok(all_trees(d, carets)?
        .into_iter()
        .filter(|t| t.carets() == carets)
        .collect())
}
