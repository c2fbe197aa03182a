//! Finite abstract simplicial complexes on `u32` vertex ids.

use std::collections::BTreeSet;
use std::fmt;

use crate::parse::{column_of, ParseError};

/// A downward-closed family of vertex sets. Simplices are stored as sorted
/// id vectors, grouped by dimension and sorted within each dimension.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct SimplicialComplex {
    simplices: Vec<Vec<Vec<u32>>>,
}

impl SimplicialComplex {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The downward closure of the given simplices. Repeated vertices inside a
    /// simplex are merged; empty inputs are ignored.
    pub fn from_maximal<I, S>(simplices: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = u32>,
    {
        let mut by_dim: Vec<BTreeSet<Vec<u32>>> = Vec::new();
        for s in simplices {
            let mut s: Vec<u32> = s.into_iter().collect();
            s.sort_unstable();
            s.dedup();
            if s.is_empty() {
                continue;
            }
            if by_dim.len() < s.len() {
                by_dim.resize_with(s.len(), BTreeSet::new);
            }
            by_dim[s.len() - 1].insert(s);
        }
        // close downward one dimension at a time
        for p in (1..by_dim.len()).rev() {
            let faces: Vec<Vec<u32>> = by_dim[p].iter().flat_map(|s| faces_of(s)).collect();
            by_dim[p - 1].extend(faces);
        }
        SimplicialComplex {
            simplices: by_dim.into_iter().map(|set| set.into_iter().collect()).collect(),
        }
    }

    /// Parses one simplex per line as whitespace-separated vertex ids. Blank
    /// lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut simplices = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            let mut s = Vec::new();
            let mut from = 0;
            for tok in line.split_whitespace() {
                let col = column_of(line, tok, from);
                from = col - 1 + tok.len();
                let v = tok
                    .parse::<u32>()
                    .map_err(|_| ParseError::new(ln + 1, col, format!("bad vertex id {tok:?}")))?;
                s.push(v);
            }
            if !s.is_empty() {
                simplices.push(s);
            }
        }
        Ok(Self::from_maximal(simplices))
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// `None` for the empty complex.
    pub fn dimension(&self) -> Option<usize> {
        self.simplices.len().checked_sub(1)
    }

    /// Simplices of dimension `p`, sorted.
    pub fn simplices(&self, p: usize) -> &[Vec<u32>] {
        self.simplices.get(p).map_or(&[], |v| v.as_slice())
    }

    pub fn vertices(&self) -> Vec<u32> {
        self.simplices(0).iter().map(|s| s[0]).collect()
    }

    pub fn vertex_count(&self) -> usize {
        self.simplices(0).len()
    }

    /// Simplex counts by dimension.
    pub fn f_vector(&self) -> Vec<usize> {
        self.simplices.iter().map(Vec::len).collect()
    }

    pub fn total_simplices(&self) -> usize {
        self.simplices.iter().map(Vec::len).sum()
    }

    /// Position of a sorted simplex within its dimension.
    pub fn index_of(&self, simplex: &[u32]) -> Option<usize> {
        let p = simplex.len().checked_sub(1)?;
        self.simplices(p).binary_search_by(|s| s.as_slice().cmp(simplex)).ok()
    }

    pub fn contains(&self, simplex: &[u32]) -> bool {
        let mut s = simplex.to_vec();
        s.sort_unstable();
        s.dedup();
        s.is_empty() || self.index_of(&s).is_some()
    }

    /// Simplices that are not a face of any other simplex.
    pub fn maximal_simplices(&self) -> Vec<Vec<u32>> {
        let mut covered: BTreeSet<Vec<u32>> = BTreeSet::new();
        let mut out = Vec::new();
        for p in (0..self.simplices.len()).rev() {
            for s in &self.simplices[p] {
                if !covered.contains(s) {
                    out.push(s.clone());
                }
            }
            if p > 0 {
                covered = self.simplices[p].iter().flat_map(|s| faces_of(s)).collect();
            }
        }
        out.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        out
    }

    /// Removes `simplex` together with every simplex containing it. The result
    /// is still downward closed.
    pub fn without_simplex(&self, simplex: &[u32]) -> SimplicialComplex {
        let mut target = simplex.to_vec();
        target.sort_unstable();
        let mut out = self.clone();
        for level in out.simplices.iter_mut() {
            level.retain(|s| !is_subset(&target, s));
        }
        while out.simplices.last().is_some_and(Vec::is_empty) {
            out.simplices.pop();
        }
        out
    }

    /// Text form: maximal simplices, one per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in self.maximal_simplices() {
            let ids: Vec<String> = s.iter().map(u32::to_string).collect();
            out.push_str(&ids.join(" "));
            out.push('\n');
        }
        out
    }
}

/// The codimension-one faces of a sorted simplex, in the order obtained by
/// deleting vertex 0, 1, … .
pub fn faces_of(simplex: &[u32]) -> impl Iterator<Item = Vec<u32>> + '_ {
    (0..simplex.len()).filter(move |_| simplex.len() > 1).map(move |i| {
        let mut f = simplex.to_vec();
        f.remove(i);
        f
    })
}

/// Both inputs sorted.
fn is_subset(small: &[u32], big: &[u32]) -> bool {
    let mut it = big.iter();
    small.iter().all(|x| it.any(|y| y == x))
}

impl fmt::Debug for SimplicialComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SimplicialComplex{:?}", self.f_vector())
    }
}
