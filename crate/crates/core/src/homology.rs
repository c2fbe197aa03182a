//! Reduced integral homology of finite simplicial complexes.
//!
//! Ranks and torsion come from Smith normal forms of the boundary matrices.
//! Boundary matrices of the complexes met here are large and sparse with
//! `±1` entries, so the integral path first eliminates unit pivots sparsely
//! (in checked `i64`, rerun over `BigInt` on overflow) and hands whatever is
//! left to a dense `BigInt` Smith normal form. An independent rank-only path
//! reduces columns over the rationals; the two must agree.

use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::cmp::Reverse;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::simplicial::SimplicialComplex;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HomologyError {
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

/// The boundary `C_p -> C_{p-1}` as a sparse column-major matrix: rows are
/// the `(p-1)`-simplices, columns the `p`-simplices, both in sorted order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainBoundary {
    pub dim: usize,
    pub rows: usize,
    /// Per column, `(row, ±1)` sorted by row.
    pub columns: Vec<Vec<(u32, i64)>>,
}

impl ChainBoundary {
    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn to_dense(&self) -> Vec<Vec<i64>> {
        let mut m = vec![vec![0; self.cols()]; self.rows];
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, v) in col {
                m[i as usize][j] = v;
            }
        }
        m
    }

    /// Smith normal form through sparse unit elimination.
    pub fn smith_form(&self) -> SmithForm {
        sparse_smith(self.rows, &self.columns)
    }
}

/// Boundary matrices `∂_1, …, ∂_dim`. Deleting vertex `i` of a sorted simplex
/// contributes sign `(-1)^i`.
pub fn boundary_matrices(k: &SimplicialComplex) -> Vec<ChainBoundary> {
    let dim = k.dimension().unwrap_or(0);
    (1..=dim)
        .into_par_iter()
        .map(|p| {
            let columns = k
                .simplices(p)
                .iter()
                .map(|s| {
                    let mut col: Vec<(u32, i64)> = (0..s.len())
                        .map(|i| {
                            let mut face = s.clone();
                            face.remove(i);
                            let row = k.index_of(&face).expect("complex is downward closed");
                            (row as u32, if i % 2 == 0 { 1 } else { -1 })
                        })
                        .collect();
                    col.sort_unstable();
                    col
                })
                .collect();
            ChainBoundary {
                dim: p,
                rows: k.simplices(p - 1).len(),
                columns,
            }
        })
        .collect()
}

/// `∂_{p} ∘ ∂_{p+1} = 0` for every consecutive pair.
pub fn boundary_squares_to_zero(boundaries: &[ChainBoundary]) -> bool {
    boundaries.windows(2).all(|w| {
        let (lower, upper) = (&w[0], &w[1]);
        upper.columns.par_iter().all(|col| {
            let mut acc: HashMap<u32, i64> = HashMap::new();
            for &(mid, a) in col {
                for &(row, b) in &lower.columns[mid as usize] {
                    *acc.entry(row).or_insert(0) += a * b;
                }
            }
            acc.values().all(|&v| v == 0)
        })
    })
}

/// Nonzero invariant factors `d_1 | d_2 | …`, all positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    pub invariants: Vec<BigInt>,
}

impl SmithForm {
    pub fn rank(&self) -> usize {
        self.invariants.len()
    }

    /// The invariants greater than one.
    pub fn torsion(&self) -> Vec<BigInt> {
        self.invariants.iter().filter(|d| !d.is_one()).cloned().collect()
    }
}

/// Smith normal form of a dense integer matrix, computed over `BigInt`.
pub fn smith_normal_form(matrix: &[Vec<i64>]) -> SmithForm {
    let m: Vec<Vec<BigInt>> = matrix
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    SmithForm {
        invariants: dense_smith(m),
    }
}

fn dense_smith(mut a: Vec<Vec<BigInt>>) -> Vec<BigInt> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    for t in 0..rows.min(cols) {
        // smallest nonzero entry of the trailing block becomes the pivot
        let Some((pi, pj)) = smallest_entry(&a, t, t) else {
            break;
        };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if !a[i][t].is_zero() {
                    let q = a[i][t].div_floor(&a[t][t]);
                    for j in t..cols {
                        let delta = &q * &a[t][j];
                        a[i][j] -= delta;
                    }
                    dirty |= !a[i][t].is_zero();
                }
            }
            for j in t + 1..cols {
                if !a[t][j].is_zero() {
                    let q = a[t][j].div_floor(&a[t][t]);
                    for i in t..rows {
                        let delta = &q * &a[i][t];
                        a[i][j] -= delta;
                    }
                    dirty |= !a[t][j].is_zero();
                }
            }
            if dirty {
                let (pi, pj) = smallest_in_cross(&a, t);
                a.swap(t, pi);
                for row in a.iter_mut() {
                    row.swap(t, pj);
                }
                continue;
            }
            // the pivot must divide the whole trailing block
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !(&a[i][j] % &a[t][t]).is_zero()));
            match bad {
                Some(i) => {
                    for j in t..cols {
                        let v = a[i][j].clone();
                        a[t][j] += v;
                    }
                }
                None => break,
            }
        }
        out.push(a[t][t].abs());
    }
    out
}

fn smallest_entry(a: &[Vec<BigInt>], r0: usize, c0: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for (i, row) in a.iter().enumerate().skip(r0) {
        for (j, x) in row.iter().enumerate().skip(c0) {
            if !x.is_zero() && best.is_none_or(|(bi, bj)| x.abs() < a[bi][bj].abs()) {
                best = Some((i, j));
            }
        }
    }
    best
}

/// Smallest nonzero entry in row `t` or column `t` (at least one exists).
fn smallest_in_cross(a: &[Vec<BigInt>], t: usize) -> (usize, usize) {
    let mut best = (t, t);
    let consider = |i: usize, j: usize, best: &mut (usize, usize)| {
        if !a[i][j].is_zero() && (a[best.0][best.1].is_zero() || a[i][j].abs() < a[best.0][best.1].abs()) {
            *best = (i, j);
        }
    };
    for i in t..a.len() {
        consider(i, t, &mut best);
    }
    for j in t..a[t].len() {
        consider(t, j, &mut best);
    }
    best
}

trait Coeff: Clone + PartialEq + Zero {
    fn from_i64(x: i64) -> Self;
    fn is_unit(&self) -> bool;
    /// `a - f * b`, or `None` on overflow.
    fn mul_sub(a: &Self, f: &Self, b: &Self) -> Option<Self>;
    fn mul(a: &Self, b: &Self) -> Option<Self>;
    fn neg(a: &Self) -> Option<Self>;
    fn to_big(&self) -> BigInt;
}

impl Coeff for i64 {
    fn from_i64(x: i64) -> Self {
        x
    }
    fn is_unit(&self) -> bool {
        *self == 1 || *self == -1
    }
    fn mul_sub(a: &Self, f: &Self, b: &Self) -> Option<Self> {
        a.checked_sub(f.checked_mul(*b)?)
    }
    fn mul(a: &Self, b: &Self) -> Option<Self> {
        a.checked_mul(*b)
    }
    fn neg(a: &Self) -> Option<Self> {
        a.checked_neg()
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Coeff for BigInt {
    fn from_i64(x: i64) -> Self {
        BigInt::from(x)
    }
    fn is_unit(&self) -> bool {
        self.abs().is_one()
    }
    fn mul_sub(a: &Self, f: &Self, b: &Self) -> Option<Self> {
        Some(a - f * b)
    }
    fn mul(a: &Self, b: &Self) -> Option<Self> {
        Some(a * b)
    }
    fn neg(a: &Self) -> Option<Self> {
        Some(-a)
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
}

type Column<T> = Vec<(u32, T)>;

/// `a - f * b` on sorted sparse columns.
fn axpy<T: Coeff>(a: &Column<T>, f: &T, b: &Column<T>) -> Option<Column<T>> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ra = a.get(i).map_or(u32::MAX, |e| e.0);
        let rb = b.get(j).map_or(u32::MAX, |e| e.0);
        if ra < rb {
            out.push(a[i].clone());
            i += 1;
        } else if rb < ra {
            let v = T::neg(&T::mul(f, &b[j].1)?)?;
            out.push((rb, v));
            j += 1;
        } else {
            let v = T::mul_sub(&a[i].1, f, &b[j].1)?;
            if !v.is_zero() {
                out.push((ra, v));
            }
            i += 1;
            j += 1;
        }
    }
    Some(out)
}

/// Eliminates unit pivots (Markowitz-style: sparsest column first, sparsest
/// row within it). Each elimination splits off an invariant factor 1 and
/// replaces the matrix by a Schur complement. Returns the number of pivots
/// and the leftover nonzero columns, or `None` on overflow.
fn eliminate_units<T: Coeff>(rows: usize, input: &[Column<i64>]) -> Option<(usize, Vec<Column<T>>)> {
    let mut cols: Vec<Column<T>> = input
        .iter()
        .map(|c| c.iter().map(|&(r, v)| (r, T::from_i64(v))).collect())
        .collect();
    let mut row_index: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); rows];
    for (j, c) in cols.iter().enumerate() {
        for (r, _) in c {
            row_index[*r as usize].insert(j as u32);
        }
    }
    let mut alive = vec![true; cols.len()];
    let mut heap: BinaryHeap<Reverse<(usize, u32)>> =
        cols.iter().enumerate().map(|(j, c)| Reverse((c.len(), j as u32))).collect();
    let mut pivots = 0;
    while let Some(Reverse((len, j))) = heap.pop() {
        let ju = j as usize;
        if !alive[ju] || cols[ju].len() != len {
            continue;
        }
        if cols[ju].is_empty() {
            alive[ju] = false;
            continue;
        }
        let Some(&(r, ref p)) = cols[ju]
            .iter()
            .filter(|(_, v)| v.is_unit())
            .min_by_key(|(r, _)| (row_index[*r as usize].len(), *r))
        else {
            // stays put until some update touches it again
            continue;
        };
        let p = p.clone();
        let pivot_col = std::mem::take(&mut cols[ju]);
        alive[ju] = false;
        for (row, _) in &pivot_col {
            row_index[*row as usize].remove(&j);
        }
        let others: Vec<u32> = row_index[r as usize].iter().copied().collect();
        for k in others {
            let ku = k as usize;
            let entry = cols[ku]
                .binary_search_by_key(&r, |e| e.0)
                .map(|i| cols[ku][i].1.clone())
                .expect("row index is consistent");
            // p is ±1, so p⁻¹ = p
            let f = T::mul(&entry, &p)?;
            let updated = axpy(&cols[ku], &f, &pivot_col)?;
            for (row, _) in &cols[ku] {
                row_index[*row as usize].remove(&k);
            }
            for (row, _) in &updated {
                row_index[*row as usize].insert(k);
            }
            cols[ku] = updated;
            heap.push(Reverse((cols[ku].len(), k)));
        }
        pivots += 1;
    }
    let rest = cols
        .into_iter()
        .zip(alive)
        .filter(|(c, a)| *a && !c.is_empty())
        .map(|(c, _)| c)
        .collect();
    Some((pivots, rest))
}

fn residual_smith<T: Coeff>(rest: Vec<Column<T>>) -> Vec<BigInt> {
    if rest.is_empty() {
        return Vec::new();
    }
    let mut rows: Vec<u32> = rest.iter().flat_map(|c| c.iter().map(|e| e.0)).collect();
    rows.sort_unstable();
    rows.dedup();
    let mut dense = vec![vec![BigInt::zero(); rest.len()]; rows.len()];
    for (j, c) in rest.iter().enumerate() {
        for (r, v) in c {
            let i = rows.binary_search(r).expect("row collected above");
            dense[i][j] = v.to_big();
        }
    }
    dense_smith(dense)
}

fn sparse_smith(rows: usize, columns: &[Column<i64>]) -> SmithForm {
    let (units, rest) = match eliminate_units::<i64>(rows, columns) {
        Some((units, rest)) => (units, residual_smith(rest)),
        None => {
            let (units, rest) = eliminate_units::<BigInt>(rows, columns).expect("BigInt does not overflow");
            (units, residual_smith(rest))
        }
    };
    // units first keeps the divisibility order: the residual invariants are ≥ 1
    let mut invariants = vec![BigInt::one(); units];
    invariants.extend(rest);
    SmithForm { invariants }
}

/// Rank over the rationals by column reduction on lowest nonzero rows.
pub fn rational_rank(boundary: &ChainBoundary) -> usize {
    reduce_rational(boundary, &BTreeSet::new()).0
}

/// Column reduction that skips the columns listed in `cleared` (known to
/// reduce to zero). Returns the rank and the pivot rows.
fn reduce_rational(boundary: &ChainBoundary, cleared: &BTreeSet<u32>) -> (usize, BTreeSet<u32>) {
    let mut reduced: Vec<Vec<(u32, BigRational)>> = Vec::new();
    let mut by_low: HashMap<u32, usize> = HashMap::new();
    let mut lows = BTreeSet::new();
    for (j, col) in boundary.columns.iter().enumerate() {
        if cleared.contains(&(j as u32)) {
            continue;
        }
        let mut c: Vec<(u32, BigRational)> = col
            .iter()
            .map(|&(r, v)| (r, BigRational::from_integer(BigInt::from(v))))
            .collect();
        while let Some((low, lv)) = c.last().cloned() {
            let Some(&k) = by_low.get(&low) else {
                break;
            };
            let other = &reduced[k];
            let f = lv / &other.last().expect("pivot columns are nonzero").1;
            c = rational_axpy(&c, &f, other);
        }
        if let Some((low, _)) = c.last() {
            by_low.insert(*low, reduced.len());
            lows.insert(*low);
            reduced.push(c);
        }
    }
    (reduced.len(), lows)
}

fn rational_axpy(
    a: &[(u32, BigRational)],
    f: &BigRational,
    b: &[(u32, BigRational)],
) -> Vec<(u32, BigRational)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ra = a.get(i).map_or(u32::MAX, |e| e.0);
        let rb = b.get(j).map_or(u32::MAX, |e| e.0);
        if ra < rb {
            out.push(a[i].clone());
            i += 1;
        } else if rb < ra {
            out.push((rb, -(f * &b[j].1)));
            j += 1;
        } else {
            let v = &a[i].1 - f * &b[j].1;
            if !v.is_zero() {
                out.push((ra, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Ranks of `∂_1, …, ∂_dim` over the rationals. Works from the top down so
/// that columns already known to die (pivot rows one dimension up) are skipped.
pub fn rational_ranks(boundaries: &[ChainBoundary]) -> Vec<usize> {
    let mut ranks = vec![0; boundaries.len()];
    let mut cleared = BTreeSet::new();
    for (i, b) in boundaries.iter().enumerate().rev() {
        let (rank, lows) = reduce_rational(b, &cleared);
        ranks[i] = rank;
        cleared = lows;
    }
    ranks
}

fn serialize_torsion<S: Serializer>(torsion: &[Vec<BigInt>], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut outer = s.serialize_seq(Some(torsion.len()))?;
    for level in torsion {
        let as_json: Vec<serde_json_number::Num> = level.iter().map(serde_json_number::Num::from).collect();
        outer.serialize_element(&as_json)?;
    }
    outer.end()
}

mod serde_json_number {
    use num_bigint::BigInt;
    use num_traits::ToPrimitive;
    use serde::{Serialize, Serializer};

    /// A torsion coefficient: a JSON number when it fits in `u64`, a decimal
    /// string otherwise.
    pub enum Num {
        Small(u64),
        Big(String),
    }

    impl From<&BigInt> for Num {
        fn from(x: &BigInt) -> Self {
            x.to_u64().map_or_else(|| Num::Big(x.to_string()), Num::Small)
        }
    }

    impl Serialize for Num {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            match self {
                Num::Small(v) => s.serialize_u64(*v),
                Num::Big(v) => s.serialize_str(v),
            }
        }
    }
}

/// Reduced homology by dimension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomologyProfile {
    /// The empty complex has reduced homology `Z` in degree −1 only.
    pub empty: bool,
    pub f_vector: Vec<usize>,
    /// Reduced Betti numbers, degrees `0..=dim`.
    pub betti: Vec<usize>,
    /// Torsion coefficients of reduced `H_p`, in divisibility order.
    #[serde(serialize_with = "serialize_torsion")]
    pub torsion: Vec<Vec<BigInt>>,
    /// Ranks of `∂_1, …, ∂_dim` from the integral path.
    pub boundary_ranks: Vec<usize>,
    /// The same ranks from the rational path.
    pub rational_ranks: Vec<usize>,
    pub euler_check: bool,
}

impl HomologyProfile {
    /// Reduced `H_p = 0` for every `p ≤ k`.
    pub fn is_homologically_connected_through(&self, k: usize) -> bool {
        !self.empty
            && (0..=k).all(|p| self.betti.get(p).copied().unwrap_or(0) == 0 && self.torsion.get(p).is_none_or(Vec::is_empty))
    }

    pub fn reduced_betti(&self, p: usize) -> usize {
        self.betti.get(p).copied().unwrap_or(0)
    }
}

/// Reduced integral homology, cross-checked against the rational path and
/// the Euler characteristic.
pub fn reduced_homology(k: &SimplicialComplex) -> Result<HomologyProfile, HomologyError> {
    let f = k.f_vector();
    if k.is_empty() {
        return Ok(HomologyProfile {
            empty: true,
            f_vector: f,
            betti: vec![],
            torsion: vec![],
            boundary_ranks: vec![],
            rational_ranks: vec![],
            euler_check: true,
        });
    }
    let boundaries = boundary_matrices(k);
    let smith: Vec<SmithForm> = boundaries.par_iter().map(ChainBoundary::smith_form).collect();
    let ranks: Vec<usize> = smith.iter().map(SmithForm::rank).collect();
    let rational = rational_ranks(&boundaries);
    if ranks != rational {
        return Err(HomologyError::Internal(format!(
            "integral ranks {ranks:?} disagree with rational ranks {rational:?}"
        )));
    }
    // rank of ∂_p for p = 0..=dim+1, with the augmentation in degree 0
    let rank_of = |p: usize| -> usize {
        match p {
            0 => 1,
            p if p <= ranks.len() => ranks[p - 1],
            _ => 0,
        }
    };
    let dim = f.len() - 1;
    let mut betti = Vec::with_capacity(dim + 1);
    for p in 0..=dim {
        let b = f[p]
            .checked_sub(rank_of(p) + rank_of(p + 1))
            .ok_or_else(|| HomologyError::Internal(format!("negative Betti number in degree {p}")))?;
        betti.push(b);
    }
    let torsion: Vec<Vec<BigInt>> = (0..=dim)
        .map(|p| smith.get(p).map_or_else(Vec::new, SmithForm::torsion))
        .collect();
    let alt = |v: &[usize]| -> i64 {
        v.iter()
            .enumerate()
            .map(|(p, &x)| if p % 2 == 0 { x as i64 } else { -(x as i64) })
            .sum()
    };
    let euler_check = alt(&f) - 1 == alt(&betti);
    if !euler_check {
        return Err(HomologyError::Internal("Euler characteristic mismatch".into()));
    }
    Ok(HomologyProfile {
        empty: false,
        f_vector: f,
        betti,
        torsion,
        boundary_ranks: ranks,
        rational_ranks: rational,
        euler_check,
    })
}
