//! Permutations, descent counting, and the grid insertion construction.
//!
//! A permutation of size `n` lives on `{1, ..., n}` in one-line notation.
//! Growing a permutation by one element is done geometrically: draw the
//! permutation as the points `(i/(n+1), p(i)/(n+1))` of the unit square, pick
//! one of the `(n+1)^2` open grid cells, and insert a new point there. Each
//! child of size `n+1` arises from exactly `n+1` (parent, cell) pairs, which
//! is what makes the construction produce uniform permutations at every size.
//!
//! This module also carries the brute-force oracles used to validate the
//! closed-form transition counts of [`crate::chain`]: [`enumerate_all`] walks
//! whole symmetric groups and [`increment_table`] classifies every cell of a
//! given parent by recounting descents of the child and of its inverse.

use crate::error::Error;
use crate::rng::RandomStream;
use crate::Result;

/// Largest size accepted by [`enumerate_all`] (n! blows up past this).
pub const MAX_ENUMERATE: usize = 10;
/// Largest size accepted by [`increment_table`].
pub const MAX_INCREMENT_TABLE: usize = 9;

/// A permutation in one-line notation.
///
/// Values are 1-based (`values` holds a rearrangement of `1..=n`); positions
/// in the public API are 1-based as well, via [`Permutation::at`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    values: Vec<u32>,
}

impl Permutation {
    /// Builds a permutation, checking that `values` is a rearrangement of
    /// `1..=n` with `n >= 1`.
    pub fn new(values: Vec<u32>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::Domain("permutation must have size >= 1".into()));
        }
        let mut seen = vec![false; n];
        for &v in &values {
            if v < 1 || v as usize > n || seen[v as usize - 1] {
                return Err(Error::Domain(format!(
                    "values are not a permutation of 1..={n}"
                )));
            }
            seen[v as usize - 1] = true;
        }
        Ok(Permutation { values })
    }

    /// The identity permutation of size `n >= 1`.
    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "permutation size must be >= 1");
        Permutation {
            values: (1..=n as u32).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // size >= 1 by construction
    }

    /// One-line notation as a slice (entry `i` of the slice is `p(i+1)`).
    pub fn values(&self) -> &[u32] {
        &self.values
    }

    /// Image of the 1-based position `i`.
    pub fn at(&self, i: usize) -> u32 {
        self.values[i - 1]
    }

    /// Number of positions `k` with `p(k) > p(k+1)`; zero for size 1.
    pub fn descent_count(&self) -> usize {
        self.values.windows(2).filter(|w| w[0] > w[1]).count()
    }

    /// The inverse permutation: `q(p(i)) = i`.
    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u32; self.values.len()];
        for (i, &v) in self.values.iter().enumerate() {
            inv[v as usize - 1] = i as u32 + 1;
        }
        Permutation { values: inv }
    }

    /// Descents of the inverse permutation.
    pub fn inverse_descent_count(&self) -> usize {
        self.inverse().descent_count()
    }

    /// Value complement `i -> n + 1 - p(i)`; swaps descents and ascents.
    pub fn complement(&self) -> Permutation {
        let n = self.values.len() as u32;
        Permutation {
            values: self.values.iter().map(|&v| n + 1 - v).collect(),
        }
    }

    /// Position reversal `i -> p(n + 1 - i)`.
    pub fn reverse(&self) -> Permutation {
        let mut values = self.values.clone();
        values.reverse();
        Permutation { values }
    }
}

impl std::fmt::Display for Permutation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// An open grid cell of the insertion construction.
///
/// For ambient size `n` the unit square splits into `(n+1)^2` open cells;
/// `col` is the column index `k` and `row` the row index `l`, both in
/// `1..=n+1`. Inserting into cell `(k, l)` places value `l` at position `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub col: u32,
    pub row: u32,
}

/// Counts of cells classified by the descent increments they produce.
///
/// `counts[a][b]` is the number of cells whose insertion raises the descent
/// count by `a` and the inverse-descent count by `b`. The four entries always
/// sum to `(n+1)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IncrementTable {
    counts: [[u64; 2]; 2],
}

impl IncrementTable {
    pub fn get(&self, a: usize, b: usize) -> u64 {
        self.counts[a][b]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

/// Iterator over all permutations of size `n` in lexicographic order.
pub struct Enumeration {
    next: Option<Vec<u32>>,
}

impl Iterator for Enumeration {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let current = self.next.take()?;
        let result = Permutation {
            values: current.clone(),
        };
        // classic next-permutation step
        let mut v = current;
        let n = v.len();
        let mut i = n.wrapping_sub(1);
        while i > 0 && v[i - 1] >= v[i] {
            i -= 1;
        }
        if i == 0 {
            self.next = None;
        } else {
            let mut j = n - 1;
            while v[j] <= v[i - 1] {
                j -= 1;
            }
            v.swap(i - 1, j);
            v[i..].reverse();
            self.next = Some(v);
        }
        Some(result)
    }
}

/// All `n!` permutations of size `n`, each exactly once, lexicographic order.
///
/// Guarded at `n <= 10` to keep the factorial in check.
pub fn enumerate_all(n: usize) -> Result<Enumeration> {
    if n < 1 {
        return Err(Error::Domain("enumeration needs n >= 1".into()));
    }
    if n > MAX_ENUMERATE {
        return Err(Error::SizeLimit {
            what: "enumerate_all",
            limit: MAX_ENUMERATE as u64,
            got: n as u64,
        });
    }
    Ok(Enumeration {
        next: Some((1..=n as u32).collect()),
    })
}

/// Uniform random permutation of size `n` by Fisher-Yates shuffle.
pub fn sample_uniform(n: usize, rng: &mut RandomStream) -> Permutation {
    assert!(n >= 1, "permutation size must be >= 1");
    let mut values: Vec<u32> = (1..=n as u32).collect();
    for i in (1..n).rev() {
        let j = rng.next_below(i as u64 + 1) as usize;
        values.swap(i, j);
    }
    Permutation { values }
}

/// Grid cell containing the interior point `u` for ambient size `n`.
///
/// Returns `(k, l)` with `k = ceil(u.0 * (n+1))`, `l = ceil(u.1 * (n+1))`.
/// Errors if either coordinate sits exactly on a grid line `j/(n+1)`
/// (including 0 and 1), where the cell is ambiguous.
pub fn cell_of(u: (f64, f64), n: usize) -> Result<Cell> {
    let m = (n + 1) as f64;
    let mut idx = [0u32; 2];
    for (slot, coord) in idx.iter_mut().zip([u.0, u.1]) {
        if !(0.0..=1.0).contains(&coord) {
            return Err(Error::Domain(format!(
                "point coordinate {coord} outside [0,1]"
            )));
        }
        let scaled = coord * m;
        if scaled == scaled.floor() {
            return Err(Error::BoundaryPoint {
                coord,
                denom: n as u64 + 1,
            });
        }
        *slot = scaled.ceil() as u32;
    }
    Ok(Cell {
        col: idx[0],
        row: idx[1],
    })
}

/// Inserts a new point into cell `c`, growing `p` from size `n` to `n + 1`.
///
/// The child is defined case by case: value `c.row` lands at position
/// `c.col`; values `>= c.row` shift up by one; positions after `c.col` shift
/// right by one. For example inserting into `(2,1)` of `(1,2)` gives
/// `(2,1,3)`, and into `(1,1)` of `(2,1)` gives `(1,3,2)`.
///
/// Note: the cell is read as (column, row); the child is fully determined by
/// those indices, not by where the point lies inside the cell.
pub fn insert(p: &Permutation, c: Cell) -> Permutation {
    let n = p.len();
    let (k, l) = (c.col as usize, c.row);
    assert!(
        (1..=n + 1).contains(&k) && (1..=n as u32 + 1).contains(&l),
        "cell ({k},{l}) invalid for size {n}"
    );
    let mut values = Vec::with_capacity(n + 1);
    for i in 1..=n + 1 {
        let v = if i < k {
            let old = p.at(i);
            if old < l {
                old
            } else {
                old + 1
            }
        } else if i > k {
            let old = p.at(i - 1);
            if old < l {
                old
            } else {
                old + 1
            }
        } else {
            l
        };
        values.push(v);
    }
    Permutation { values }
}

/// Classifies all `(n+1)^2` cells of `p` by brute force.
///
/// For each cell the child and its inverse are built and their descents
/// recounted from scratch; no closed form is consulted. Guarded at `n <= 9`.
pub fn increment_table(p: &Permutation) -> Result<IncrementTable> {
    let n = p.len();
    if n > MAX_INCREMENT_TABLE {
        return Err(Error::SizeLimit {
            what: "increment_table",
            limit: MAX_INCREMENT_TABLE as u64,
            got: n as u64,
        });
    }
    let d = p.descent_count();
    let dp = p.inverse_descent_count();
    let mut counts = [[0u64; 2]; 2];
    for k in 1..=n as u32 + 1 {
        for l in 1..=n as u32 + 1 {
            let child = insert(p, Cell { col: k, row: l });
            let a = child.descent_count() - d;
            let b = child.inverse_descent_count() - dp;
            counts[a][b] += 1;
        }
    }
    Ok(IncrementTable { counts })
}
