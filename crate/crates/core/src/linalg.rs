//! Sparse Gauss–Jordan elimination over exact fields.
//!
//! Entries are either plain rationals or expressions, which form the field
//! of rational functions in parameters and further coordinates. Pivots on
//! non-constant entries are only taken when a caller-supplied predicate
//! confirms they are nonzero; rows whose remaining entries are all
//! unconfirmed are reported as stuck instead of guessed.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::Zero;

use crate::expr::{Expr, Rational};

pub trait Field: Clone + PartialEq + std::fmt::Debug {
    fn is_zero(&self) -> bool;
    fn zero() -> Self;
    fn one() -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    /// Zero for constants; larger values for entries that are costlier
    /// to pivot on.
    fn cost(&self) -> usize;
}

impl Field for Rational {
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        num_traits::One::one()
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn cost(&self) -> usize {
        (self.numer().bits() + self.denom().bits()) as usize / 64
    }
}

impl Field for Expr {
    fn is_zero(&self) -> bool {
        Expr::is_zero(self)
    }
    fn zero() -> Self {
        Expr::zero()
    }
    fn one() -> Self {
        Expr::one()
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self.checked_div(other).expect("pivot is nonzero")
    }
    fn cost(&self) -> usize {
        if self.constant_value().is_some() {
            0
        } else {
            self.size()
        }
    }
}

#[derive(Clone, Debug)]
struct Row<T> {
    entries: BTreeMap<usize, T>,
    rhs: T,
}

/// A linear system `sum_j A[i][j] x_j = rhs_i`.
#[derive(Clone, Debug)]
pub struct LinearSystem<T> {
    ncols: usize,
    rows: Vec<Row<T>>,
}

/// A row of the reduced system, solved for its pivot column.
#[derive(Clone, Debug)]
pub struct PivotRow<T> {
    pub col: usize,
    /// Coefficients of free columns: `x_col = rhs - sum free[j] x_j`.
    pub free: BTreeMap<usize, T>,
    pub rhs: T,
}

#[derive(Clone, Debug)]
pub struct Reduced<T> {
    pub ncols: usize,
    pub pivots: Vec<PivotRow<T>>,
    /// Right-hand sides of rows left without unknowns; each must vanish for
    /// the system to be consistent.
    pub conditions: Vec<T>,
    /// Rows whose remaining coefficients could not be confirmed nonzero.
    pub stuck: Vec<(BTreeMap<usize, T>, T)>,
}

impl<T: Field> LinearSystem<T> {
    pub fn new(ncols: usize) -> Self {
        LinearSystem { ncols, rows: Vec::new() }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push(&mut self, entries: impl IntoIterator<Item = (usize, T)>, rhs: T) {
        let mut map: BTreeMap<usize, T> = BTreeMap::new();
        for (j, a) in entries {
            assert!(j < self.ncols, "column {j} out of range");
            match map.get_mut(&j) {
                Some(old) => {
                    let neg = T::zero().sub(&a);
                    *old = old.sub(&neg);
                }
                None => {
                    map.insert(j, a);
                }
            }
        }
        map.retain(|_, a| !a.is_zero());
        if map.is_empty() && rhs.is_zero() {
            return;
        }
        self.rows.push(Row { entries: map, rhs });
    }

    /// Full Gauss–Jordan reduction. `licensed` decides whether a
    /// non-constant entry may serve as a pivot.
    pub fn eliminate(self, licensed: &dyn Fn(&T) -> bool) -> Reduced<T> {
        self.eliminate_in(licensed, &|_| true)
    }

    /// Like [`eliminate`](Self::eliminate), but only columns accepted by
    /// `pivotable` are solved for. Rows left holding other columns end up
    /// in `stuck`.
    pub fn eliminate_in(self, licensed: &dyn Fn(&T) -> bool, pivotable: &dyn Fn(usize) -> bool) -> Reduced<T> {
        let ncols = self.ncols;
        let mut rows: Vec<Option<Row<T>>> = self.rows.into_iter().map(Some).collect();
        let mut col_rows: HashMap<usize, BTreeSet<usize>> = HashMap::new();
        for (i, r) in rows.iter().enumerate() {
            for &j in r.as_ref().unwrap().entries.keys() {
                col_rows.entry(j).or_default().insert(i);
            }
        }
        let mut pivots: Vec<(usize, usize)> = Vec::new();
        let mut is_pivot_row = vec![false; rows.len()];
        let mut rejected: HashMap<(usize, usize), T> = HashMap::new();
        loop {
            // constant pivots first, by Markowitz count
            let mut best: Option<(usize, usize, usize)> = None;
            let mut others: Vec<(usize, usize, usize, usize)> = Vec::new();
            for (i, r) in rows.iter().enumerate() {
                if is_pivot_row[i] {
                    continue;
                }
                let Some(r) = r else { continue };
                let rl = r.entries.len();
                if best.is_some_and(|(m, _, _)| m == 0) {
                    break;
                }
                for (&j, a) in &r.entries {
                    if !pivotable(j) {
                        continue;
                    }
                    let cl = col_rows.get(&j).map_or(0, |s| s.len());
                    let mk = (rl - 1) * (cl - 1);
                    let cost = a.cost();
                    if cost == 0 {
                        if best.is_none_or(|(m, _, _)| mk < m) {
                            best = Some((mk, i, j));
                        }
                    } else if best.is_none() {
                        others.push((cost, mk, i, j));
                    }
                }
            }
            let mut chosen = best.map(|(_, i, j)| (i, j));
            if chosen.is_none() {
                others.sort_unstable();
                for &(_, _, i, j) in &others {
                    let a = &rows[i].as_ref().unwrap().entries[&j];
                    if rejected.get(&(i, j)) == Some(a) {
                        continue;
                    }
                    if licensed(a) {
                        chosen = Some((i, j));
                        break;
                    }
                    rejected.insert((i, j), a.clone());
                }
            }
            let Some((p, c)) = chosen else { break };
            let mut prow = rows[p].take().unwrap();
            let piv = prow.entries.remove(&c).unwrap();
            for a in prow.entries.values_mut() {
                *a = a.div(&piv);
            }
            prow.rhs = prow.rhs.div(&piv);
            prow.entries.insert(c, T::one());
            let targets: Vec<usize> = col_rows[&c].iter().copied().filter(|&i| i != p).collect();
            let singleton = prow.entries.len() == 1 && prow.rhs.is_zero();
            for i in targets {
                let row = rows[i].as_mut().unwrap();
                let f = row.entries.remove(&c).unwrap();
                col_rows.get_mut(&c).unwrap().remove(&i);
                if singleton {
                    continue;
                }
                for (&j, a) in &prow.entries {
                    if j == c {
                        continue;
                    }
                    let delta = f.mul(a);
                    let new = match row.entries.get(&j) {
                        Some(old) => old.sub(&delta),
                        None => T::zero().sub(&delta),
                    };
                    if new.is_zero() {
                        if row.entries.remove(&j).is_some() {
                            col_rows.get_mut(&j).unwrap().remove(&i);
                        }
                    } else if row.entries.insert(j, new).is_none() {
                        col_rows.entry(j).or_default().insert(i);
                    }
                }
                if !prow.rhs.is_zero() {
                    row.rhs = row.rhs.sub(&f.mul(&prow.rhs));
                }
            }
            rows[p] = Some(prow);
            is_pivot_row[p] = true;
            pivots.push((p, c));
        }
        let mut out = Reduced { ncols, pivots: Vec::new(), conditions: Vec::new(), stuck: Vec::new() };
        for &(p, c) in &pivots {
            let mut r = rows[p].take().unwrap();
            r.entries.remove(&c);
            out.pivots.push(PivotRow { col: c, free: r.entries, rhs: r.rhs });
        }
        for r in rows.into_iter().flatten() {
            if r.entries.is_empty() {
                if !r.rhs.is_zero() {
                    out.conditions.push(r.rhs);
                }
            } else {
                out.stuck.push((r.entries, r.rhs));
            }
        }
        out.pivots.sort_by_key(|p| p.col);
        out
    }
}

impl<T: Field> Reduced<T> {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_consistent(&self) -> bool {
        self.conditions.is_empty() && self.stuck.iter().all(|(_, r)| r.is_zero())
    }

    /// Solution with every free column set to zero.
    pub fn particular(&self) -> BTreeMap<usize, T> {
        self.pivots
            .iter()
            .filter(|p| !p.rhs.is_zero())
            .map(|p| (p.col, p.rhs.clone()))
            .collect()
    }

    pub fn free_columns(&self) -> Vec<usize> {
        let piv: BTreeSet<usize> = self.pivots.iter().map(|p| p.col).collect();
        (0..self.ncols).filter(|j| !piv.contains(j)).collect()
    }

    /// Basis of the homogeneous solution space, one vector per free column.
    /// Only meaningful when no row is stuck.
    pub fn nullspace(&self) -> Vec<Vec<T>> {
        let mut out = Vec::new();
        for f in self.free_columns() {
            let mut v = vec![T::zero(); self.ncols];
            v[f] = T::one();
            for p in &self.pivots {
                if let Some(a) = p.free.get(&f) {
                    v[p.col] = T::zero().sub(a);
                }
            }
            out.push(v);
        }
        out
    }
}

/// Rank of a rational matrix given by rows.
pub fn rank(rows: &[Vec<Rational>]) -> usize {
    let ncols = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    let mut sys = LinearSystem::new(ncols);
    for r in rows {
        sys.push(r.iter().cloned().enumerate(), <Rational as Zero>::zero());
    }
    sys.eliminate(&|_| true).rank()
}

/// Scales a rational vector so that its first nonzero entry is one.
pub fn normalize_vector(v: &[Rational]) -> Vec<Rational> {
    match v.iter().find(|q| !Zero::is_zero(*q)) {
        Some(lead) => v.iter().map(|q| q / lead).collect(),
        None => v.to_vec(),
    }
}
