//! Howell normal form for submodules of (Z/p^a)^n.
//!
//! Over the chain ring Z/p^a every submodule has a unique basis in Howell form:
//! echelon rows with pivots p^v, entries above a pivot reduced mod p^v, and the
//! Howell property (every element with leading zeros is spanned by the rows
//! with those leading zeros). That makes membership a greedy reduction.

use serde::Serialize;

use crate::arith::{inv_mod, valuation};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SubLattice {
    pub p: u64,
    pub a: u32,
    pub modulus: u64,
    pub rank: usize,
    pub rows: Vec<Vec<u64>>,
    #[serde(skip)]
    pivots: Vec<(usize, u32)>,
}

impl SubLattice {
    pub fn zero(p: u64, a: u32, rank: usize) -> Self {
        SubLattice {
            p,
            a,
            modulus: p.pow(a),
            rank,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(p: u64, a: u32, rank: usize) -> Self {
        let rows = (0..rank)
            .map(|i| {
                let mut r = vec![0; rank];
                r[i] = 1;
                r
            })
            .collect();
        howell_form(rows, p, a, rank)
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn pivots(&self) -> &[(usize, u32)] {
        &self.pivots
    }

    /// Number of elements, as p-power exponent.
    pub fn log_size(&self) -> u32 {
        self.pivots.iter().map(|&(_, v)| self.a - v).sum()
    }

    pub fn size(&self) -> u128 {
        (self.p as u128).pow(self.log_size())
    }

    /// Reduce `v` against the basis; returns the canonical coset representative.
    pub fn reduce(&self, v: &[u64]) -> Vec<u64> {
        let n = self.modulus;
        let mut w: Vec<u64> = v.iter().map(|x| x % n).collect();
        for (row, &(col, e)) in self.rows.iter().zip(&self.pivots) {
            let piv = self.p.pow(e);
            let q = w[col] / piv;
            if q != 0 {
                sub_scaled(&mut w, row, q, n);
            }
        }
        w
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    pub fn contains_lattice(&self, other: &SubLattice) -> bool {
        other.rows.iter().all(|r| self.contains(r))
    }

    pub fn sum(&self, other: &SubLattice) -> SubLattice {
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        howell_form(rows, self.p, self.a, self.rank)
    }

    pub fn with_rows(&self, extra: impl IntoIterator<Item = Vec<u64>>) -> SubLattice {
        let mut rows = self.rows.clone();
        rows.extend(extra);
        howell_form(rows, self.p, self.a, self.rank)
    }

    /// Add one vector; returns false when it was already a member.
    pub fn absorb(&mut self, v: &[u64]) -> bool {
        if self.contains(v) {
            return false;
        }
        *self = self.with_rows(std::iter::once(v.to_vec()));
        true
    }

    pub fn intersection(&self, other: &SubLattice) -> SubLattice {
        let n = self.rank;
        let mut rows = Vec::new();
        for r in &self.rows {
            let mut row = r.clone();
            row.extend_from_slice(r);
            rows.push(row);
        }
        for r in &other.rows {
            let mut row = r.clone();
            row.extend(std::iter::repeat_n(0, n));
            rows.push(row);
        }
        let h = howell_form(rows, self.p, self.a, 2 * n);
        let tail: Vec<Vec<u64>> = h
            .rows
            .iter()
            .filter(|r| r[..n].iter().all(|&x| x == 0))
            .map(|r| r[n..].to_vec())
            .collect();
        howell_form(tail, self.p, self.a, n)
    }

    /// Every element, each exactly once, in a deterministic order.
    pub fn elements(&self) -> Vec<Vec<u64>> {
        let mut out = vec![vec![0u64; self.rank]];
        for (row, &(_, e)) in self.rows.iter().zip(&self.pivots).rev() {
            let count = self.p.pow(self.a - e);
            let mut next = Vec::with_capacity(out.len() * count as usize);
            for base in &out {
                for c in 0..count {
                    let mut w = base.clone();
                    add_scaled(&mut w, row, c, self.modulus);
                    next.push(w);
                }
            }
            out = next;
        }
        out.sort();
        out
    }

    /// Image under a Z/p^a-linear map given by `f` on basis rows.
    pub fn map<F: Fn(&[u64]) -> Vec<u64>>(&self, target_rank: usize, f: F) -> SubLattice {
        let rows = self.rows.iter().map(|r| f(r)).collect();
        howell_form(rows, self.p, self.a, target_rank)
    }
}

fn sub_scaled(w: &mut [u64], row: &[u64], q: u64, n: u64) {
    for (x, &r) in w.iter_mut().zip(row) {
        let t = (r as u128 * q as u128 % n as u128) as u64;
        *x = (*x + n - t) % n;
    }
}

fn add_scaled(w: &mut [u64], row: &[u64], q: u64, n: u64) {
    for (x, &r) in w.iter_mut().zip(row) {
        *x = ((*x as u128 + r as u128 * q as u128) % n as u128) as u64;
    }
}

fn scale(row: &mut [u64], q: u64, n: u64) {
    for x in row.iter_mut() {
        *x = (*x as u128 * q as u128 % n as u128) as u64;
    }
}

/// Canonical Howell basis of the submodule generated by `rows`.
pub fn howell_form(rows: Vec<Vec<u64>>, p: u64, a: u32, rank: usize) -> SubLattice {
    let n = p.pow(a);
    let mut pool: Vec<Vec<u64>> = rows
        .into_iter()
        .map(|r| {
            assert_eq!(r.len(), rank, "row length mismatch");
            r.into_iter().map(|x| x % n).collect::<Vec<u64>>()
        })
        .filter(|r: &Vec<u64>| r.iter().any(|&x| x != 0))
        .collect();
    let mut basis: Vec<Vec<u64>> = Vec::new();
    let mut pivots: Vec<(usize, u32)> = Vec::new();
    for col in 0..rank {
        let best = pool
            .iter()
            .enumerate()
            .filter(|(_, r)| r[col] != 0)
            .min_by_key(|(i, r)| (valuation(r[col], p, a), *i))
            .map(|(i, _)| i);
        let Some(bi) = best else { continue };
        let mut piv = pool.swap_remove(bi);
        let v = valuation(piv[col], p, a);
        let unit = piv[col] / p.pow(v);
        let uinv = inv_mod(unit, n).expect("unit part invertible");
        scale(&mut piv, uinv, n);
        let pv = p.pow(v);
        for r in pool.iter_mut() {
            if r[col] != 0 {
                let q = r[col] / pv;
                sub_scaled(r, &piv, q, n);
            }
        }
        pool.retain(|r| r.iter().any(|&x| x != 0));
        if v > 0 {
            let mut extra = piv.clone();
            scale(&mut extra, p.pow(a - v), n);
            if extra.iter().any(|&x| x != 0) {
                pool.push(extra);
            }
        }
        for r in basis.iter_mut() {
            let q = r[col] / pv;
            if q != 0 {
                sub_scaled(r, &piv, q, n);
            }
        }
        basis.push(piv);
        pivots.push((col, v));
    }
    SubLattice {
        p,
        a,
        modulus: n,
        rank,
        rows: basis,
        pivots,
    }
}

/// Solutions x in (Z/p^a)^m with x*F in S, where F is given by its rows (m rows of length k).
pub fn preimage(f_rows: &[Vec<u64>], target: &SubLattice) -> SubLattice {
    let m = f_rows.len();
    let k = target.rank;
    let (p, a) = (target.p, target.a);
    let mut rows = Vec::new();
    for (i, fr) in f_rows.iter().enumerate() {
        let mut row = fr.clone();
        row.extend((0..m).map(|j| u64::from(i == j)));
        rows.push(row);
    }
    for tr in &target.rows {
        let mut row = tr.clone();
        row.extend(std::iter::repeat_n(0, m));
        rows.push(row);
    }
    let h = howell_form(rows, p, a, k + m);
    let tail = h
        .rows
        .iter()
        .filter(|r| r[..k].iter().all(|&x| x == 0))
        .map(|r| r[k..].to_vec())
        .collect();
    howell_form(tail, p, a, m)
}

pub fn kernel(f_rows: &[Vec<u64>], p: u64, a: u32, k: usize) -> SubLattice {
    preimage(f_rows, &SubLattice::zero(p, a, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn brute_span(rows: &[Vec<u64>], n: u64, rank: usize) -> BTreeSet<Vec<u64>> {
        let mut set = BTreeSet::new();
        set.insert(vec![0; rank]);
        loop {
            let mut grew = false;
            let cur: Vec<_> = set.iter().cloned().collect();
            for v in &cur {
                for r in rows {
                    let w: Vec<u64> = v.iter().zip(r).map(|(x, y)| (x + y) % n).collect();
                    grew |= set.insert(w);
                }
            }
            if !grew {
                return set;
            }
        }
    }

    #[test]
    fn empty_is_zero() {
        assert!(howell_form(vec![], 3, 2, 2).is_zero());
    }

    #[test]
    fn already_canonical() {
        let h = howell_form(vec![vec![3, 0], vec![0, 3]], 3, 2, 2);
        assert_eq!(h.rows, vec![vec![3, 0], vec![0, 3]]);
    }

    #[test]
    fn generating_set_independent() {
        let h1 = howell_form(vec![vec![1, 1], vec![0, 3]], 3, 2, 2);
        let h2 = howell_form(vec![vec![1, 4], vec![0, 3]], 3, 2, 2);
        assert_eq!(h1, h2);
        let brute = brute_span(&[vec![1, 1], vec![0, 3]], 9, 2);
        let listed: BTreeSet<_> = h1.elements().into_iter().collect();
        assert_eq!(brute, listed);
    }

    #[test]
    fn howell_property_needed() {
        // span{(3,1)} mod 9 contains (0,3) = 3*(3,1) which has leading zero.
        let h = howell_form(vec![vec![3, 1]], 3, 2, 2);
        assert!(h.contains(&[0, 3]));
        assert_eq!(h.size(), 9);
    }

    #[test]
    fn intersection_matches_brute() {
        let a = howell_form(vec![vec![1, 2, 0], vec![0, 3, 3]], 3, 2, 3);
        let b = howell_form(vec![vec![0, 1, 1], vec![3, 0, 0]], 3, 2, 3);
        let sa = brute_span(&a.rows, 9, 3);
        let sb = brute_span(&b.rows, 9, 3);
        let both: BTreeSet<_> = sa.intersection(&sb).cloned().collect();
        let i: BTreeSet<_> = a.intersection(&b).elements().into_iter().collect();
        assert_eq!(both, i);
    }

    #[test]
    fn kernel_of_multiplication_by_three() {
        let k = kernel(&[vec![3]], 3, 2, 1);
        assert_eq!(k.rows, vec![vec![3]]);
    }
}
