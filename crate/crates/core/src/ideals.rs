//! Ideals of a finite coefficient ring as Howell lattices, plus multiplier
//! rings, conductors and the passage from a lattice to an ideal inside it.
//!
//! Lattices are stored in the coordinates of the cover ring; for a quotient
//! ring A/Q every stored lattice contains Q.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{too_large, IflError, Result};
use crate::howell::{howell_form, preimage, SubLattice};
use crate::rings::Ring;

#[derive(Clone, Debug)]
pub struct IdealHandle {
    pub ring: Arc<Ring>,
    pub lattice: SubLattice,
}

impl PartialEq for IdealHandle {
    fn eq(&self, other: &Self) -> bool {
        *self.ring == *other.ring && self.lattice == other.lattice
    }
}

impl Eq for IdealHandle {}

#[derive(Serialize)]
pub struct IdealReport {
    pub basis: Vec<Vec<u64>>,
    pub generators: Vec<String>,
    pub index: String,
    pub size: String,
}

/// The monomial basis T^t x^j as unit coefficient vectors.
pub fn monomials(ring: &Ring) -> Vec<Vec<u64>> {
    (0..ring.n())
        .map(|k| {
            let mut v = vec![0; ring.n()];
            v[k] = 1;
            v
        })
        .collect()
}

fn quotient_rows(ring: &Ring) -> Vec<Vec<u64>> {
    ring.quotient.as_ref().map(|q| q.rows.clone()).unwrap_or_default()
}

/// Lattice spanned by `rows` together with the quotient relations.
pub fn ring_lattice(ring: &Ring, mut rows: Vec<Vec<u64>>) -> SubLattice {
    rows.extend(quotient_rows(ring));
    howell_form(rows, ring.p, ring.a, ring.n())
}

/// Socle of the cover ring: the annihilator of the maximal ideal.
pub fn socle(ring: &Ring) -> SubLattice {
    let gens = maximal_ideal_lattice(ring).rows;
    let n = ring.n();
    let f_rows: Vec<Vec<u64>> = monomials(ring)
        .iter()
        .map(|e| gens.iter().flat_map(|g| ring.mul_raw(e, g)).collect())
        .collect();
    let k = gens.len() * n;
    let mut target = Vec::new();
    for (i, _) in gens.iter().enumerate() {
        for r in quotient_rows(ring) {
            let mut row = vec![0; k];
            row[i * n..(i + 1) * n].copy_from_slice(&r);
            target.push(row);
        }
    }
    let target = howell_form(target, ring.p, ring.a, k.max(1));
    if k == 0 {
        return SubLattice::full(ring.p, ring.a, n);
    }
    preimage(&f_rows, &target)
}

impl IdealHandle {
    pub fn zero(ring: &Arc<Ring>) -> Self {
        IdealHandle { ring: ring.clone(), lattice: ring_lattice(ring, vec![]) }
    }

    pub fn unit(ring: &Arc<Ring>) -> Self {
        IdealHandle { ring: ring.clone(), lattice: SubLattice::full(ring.p, ring.a, ring.n()) }
    }

    pub fn closure(ring: &Arc<Ring>, gens: &[Vec<u64>]) -> Self {
        IdealHandle { ring: ring.clone(), lattice: closure_lattice(ring, gens) }
    }

    pub fn from_strings(ring: &Arc<Ring>, gens: &[&str]) -> Result<Self> {
        let gens = gens.iter().map(|s| ring.parse(s)).collect::<Result<Vec<_>>>()?;
        Ok(IdealHandle::closure(ring, &gens))
    }

    fn same(&self, o: &Self) -> Result<()> {
        if *self.ring == *o.ring {
            Ok(())
        } else {
            Err(IflError::RingMismatch)
        }
    }

    pub fn product(&self, o: &Self) -> Result<Self> {
        self.same(o)?;
        let r = &self.ring;
        let mut rows = Vec::new();
        for x in &self.lattice.rows {
            for y in &o.lattice.rows {
                rows.push(r.mul_raw(x, y));
            }
        }
        Ok(IdealHandle { ring: r.clone(), lattice: ring_lattice(r, rows) })
    }

    pub fn sum(&self, o: &Self) -> Result<Self> {
        self.same(o)?;
        Ok(IdealHandle { ring: self.ring.clone(), lattice: self.lattice.sum(&o.lattice) })
    }

    pub fn intersection(&self, o: &Self) -> Result<Self> {
        self.same(o)?;
        Ok(IdealHandle {
            ring: self.ring.clone(),
            lattice: self.lattice.intersection(&o.lattice),
        })
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = IdealHandle::unit(&self.ring);
        for _ in 0..e {
            acc = acc.product(self).expect("same ring");
        }
        acc
    }

    pub fn contains(&self, x: &[u64]) -> bool {
        self.lattice.contains(x)
    }

    pub fn is_subset(&self, o: &Self) -> bool {
        o.lattice.contains_lattice(&self.lattice)
    }

    pub fn quotient_log_size(&self) -> u32 {
        self.ring.quotient.as_ref().map(|q| q.log_size()).unwrap_or(0)
    }

    /// Number of elements of the ideal inside A (quotient included).
    pub fn size(&self) -> u128 {
        (self.ring.p as u128).pow(self.lattice.log_size() - self.quotient_log_size())
    }

    pub fn is_zero(&self) -> bool {
        self.lattice.log_size() == self.quotient_log_size()
    }

    pub fn is_unit(&self) -> bool {
        self.lattice.contains(&self.ring.one())
    }

    /// Closed under multiplication by every monomial.
    pub fn is_ideal(&self) -> bool {
        let mons = monomials(&self.ring);
        self.lattice
            .rows
            .iter()
            .all(|r| mons.iter().all(|m| self.lattice.contains(&self.ring.mul_raw(r, m))))
    }

    /// Distinct elements, each the canonical representative in A.
    pub fn elements(&self) -> Vec<Vec<u64>> {
        let mut out: Vec<Vec<u64>> = self
            .lattice
            .elements()
            .into_iter()
            .map(|v| self.ring.canon(v))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn generators(&self) -> Vec<String> {
        let mut gens: Vec<String> = self
            .lattice
            .rows
            .iter()
            .map(|r| self.ring.canon(r.clone()))
            .filter(|r| !self.ring.is_zero(r))
            .map(|r| self.ring.format(&r))
            .collect();
        gens.dedup();
        gens
    }

    pub fn report(&self) -> IdealReport {
        let index = (self.ring.size() / self.size().max(1)).to_string();
        IdealReport {
            basis: self.lattice.rows.clone(),
            generators: self.generators(),
            index,
            size: self.size().to_string(),
        }
    }
}

fn block_target(ring: &Ring, m: &SubLattice, copies: usize) -> SubLattice {
    let n = ring.n();
    let k = n * copies;
    let mut rows = Vec::new();
    for i in 0..copies {
        for r in &m.rows {
            let mut row = vec![0; k];
            row[i * n..(i + 1) * n].copy_from_slice(r);
            rows.push(row);
        }
    }
    howell_form(rows, ring.p, ring.a, k)
}

fn stabilizer(ring: &Ring, sources: &[Vec<u64>], target: &SubLattice) -> SubLattice {
    if sources.is_empty() {
        return SubLattice::full(ring.p, ring.a, ring.n());
    }
    let f_rows: Vec<Vec<u64>> = monomials(ring)
        .iter()
        .map(|e| sources.iter().flat_map(|s| ring.mul_raw(e, s)).collect())
        .collect();
    preimage(&f_rows, &block_target(ring, target, sources.len()))
}

/// {x in A : x M in M}; a subring containing 1.
pub fn multiplier_ring(ring: &Ring, m: &SubLattice) -> SubLattice {
    let m = m.sum(&ring_lattice(ring, vec![]));
    stabilizer(ring, &m.rows, &m)
}

/// {x in A : x A in R}; an ideal contained in R.
pub fn conductor(ring: &Arc<Ring>, r: &SubLattice) -> IdealHandle {
    let r = r.sum(&ring_lattice(ring, vec![]));
    IdealHandle { ring: ring.clone(), lattice: stabilizer(ring, &monomials(ring), &r) }
}

/// c * (M A) with c the conductor of the multiplier ring of M; always inside M.
pub fn lattice_to_ideal(ring: &Arc<Ring>, m: &SubLattice) -> Result<IdealHandle> {
    let m = m.sum(&ring_lattice(ring, vec![]));
    let r = multiplier_ring(ring, &m);
    let c = conductor(ring, &r);
    let ma = IdealHandle::closure(ring, &m.rows);
    let a = c.product(&ma)?;
    if a.is_zero() {
        return Err(IflError::Degenerate {
            stage: "lattice_to_ideal".into(),
            detail: "the conductor ideal times M*A is zero".into(),
        });
    }
    if !m.contains_lattice(&a.lattice) {
        return Err(IflError::Unverified {
            stage: "lattice_to_ideal".into(),
            detail: "ideal not contained in the lattice".into(),
        });
    }
    Ok(a)
}

/// Finite surrogate for a full-rank lattice: M contains a unit and the socle.
pub fn is_full_lattice_surrogate(ring: &Ring, m: &SubLattice) -> bool {
    let has_unit = m.rows.iter().any(|r| ring.is_unit(r))
        || m.elements().iter().any(|r| ring.is_unit(r));
    has_unit && m.contains_lattice(&socle(ring))
}

fn closure_lattice(ring: &Ring, gens: &[Vec<u64>]) -> SubLattice {
    let mons = monomials(ring);
    let rows = gens
        .iter()
        .flat_map(|g| mons.iter().map(move |m| (g, m)))
        .map(|(g, m)| ring.mul_raw(g, m))
        .collect();
    ring_lattice(ring, rows)
}

pub fn maximal_ideal(ring: &Arc<Ring>) -> IdealHandle {
    IdealHandle { ring: ring.clone(), lattice: maximal_ideal_lattice(ring) }
}

fn maximal_ideal_lattice(ring: &Ring) -> SubLattice {
    let mut gens = vec![ring.from_int(ring.p as i64)];
    if ring.b > 1 {
        gens.push(ring.t_gen());
    }
    if ring.d > 1 {
        gens.extend(residue_radical_gens(ring));
    }
    closure_lattice(ring, &gens)
}

fn residue_radical_gens(ring: &Ring) -> Vec<Vec<u64>> {
    let p = ring.p as usize;
    let d = ring.d;
    let mut out = Vec::new();
    let total = p.pow(d as u32);
    for code in 1..total {
        let mut v = ring.zero();
        let mut c = code;
        for j in 0..d {
            v[j * ring.b] = (c % p) as u64;
            c /= p;
        }
        if ring.in_radical(&v) {
            out.push(v);
        }
    }
    out
}

/// All ideals of A (including 0 and A), by closing under I -> I + (x).
pub fn enumerate_ideals(ring: &Arc<Ring>, cap: u128) -> Result<Vec<IdealHandle>> {
    let size = ring.size();
    let limit = cap.min(3u128.pow(8));
    if size > limit {
        return Err(too_large("ideal lattice enumeration", size, limit));
    }
    let elems = ring.enumeration()?.elems.clone();
    let mut found: BTreeMap<Vec<Vec<u64>>, IdealHandle> = BTreeMap::new();
    let zero = IdealHandle::zero(ring);
    let mut frontier = vec![zero.clone()];
    found.insert(zero.lattice.rows.clone(), zero);
    while let Some(i) = frontier.pop() {
        for x in &elems {
            if i.contains(x) {
                continue;
            }
            let mut rows = i.lattice.rows.clone();
            rows.push(x.clone());
            let j = IdealHandle::closure(ring, &rows);
            if !found.contains_key(&j.lattice.rows) {
                found.insert(j.lattice.rows.clone(), j.clone());
                frontier.push(j);
            }
        }
    }
    let mut out: Vec<IdealHandle> = found.into_values().collect();
    out.sort_by(|a, b| {
        a.size()
            .cmp(&b.size())
            .then_with(|| a.lattice.rows.cmp(&b.lattice.rows))
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn f3t3() -> Arc<Ring> {
        Ring::trunc_iwasawa(3, 1, 3).unwrap()
    }

    #[test]
    fn closure_examples() {
        let r = f3t3();
        assert!(IdealHandle::closure(&r, &[r.one()]).is_unit());
        let t = IdealHandle::closure(&r, &[r.t_gen()]);
        assert_eq!(t.size(), 9);
        assert!(t.contains(&r.parse("T^2").unwrap()));
        let r9 = Ring::trunc_iwasawa(3, 2, 2).unwrap();
        let m = IdealHandle::from_strings(&r9, &["3", "T"]).unwrap();
        assert_eq!(r9.size() / m.size(), 3);
        assert_eq!(m, maximal_ideal(&r9));
    }

    #[test]
    fn products_and_intersections() {
        let r = f3t3();
        let t = IdealHandle::from_strings(&r, &["T"]).unwrap();
        let t2 = IdealHandle::from_strings(&r, &["T^2"]).unwrap();
        assert_eq!(t.product(&t).unwrap(), t2);
        assert_eq!(t.product(&IdealHandle::unit(&r)).unwrap(), t);
        let r9 = Ring::trunc_iwasawa(3, 2, 2).unwrap();
        let a = IdealHandle::from_strings(&r9, &["T"]).unwrap();
        let b = IdealHandle::from_strings(&r9, &["3"]).unwrap();
        let i = a.intersection(&b).unwrap();
        let ea: BTreeSet<_> = a.elements().into_iter().collect();
        let eb: BTreeSet<_> = b.elements().into_iter().collect();
        let brute: Vec<_> = ea.intersection(&eb).cloned().collect();
        assert_eq!(i.elements(), brute);
        assert_eq!(i, IdealHandle::from_strings(&r9, &["3*T"]).unwrap());
    }

    #[test]
    fn multiplier_and_conductor() {
        let r = f3t3();
        let m = howell_form(vec![r.one(), r.parse("T^2").unwrap()], 3, 1, 3);
        let mr = multiplier_ring(&r, &m);
        assert_eq!(mr, m);
        let c = conductor(&r, &mr);
        assert_eq!(c, IdealHandle::from_strings(&r, &["T^2"]).unwrap());
        let a = lattice_to_ideal(&r, &m).unwrap();
        assert_eq!(a, c);
        let full = SubLattice::full(3, 1, 3);
        assert_eq!(multiplier_ring(&r, &full), full);
        assert!(conductor(&r, &full).is_unit());
        let tm = IdealHandle::from_strings(&r, &["T"]).unwrap();
        assert_eq!(lattice_to_ideal(&r, &tm.lattice).unwrap(), tm);
    }

    #[test]
    fn lattice_to_ideal_degenerate() {
        let r = f3t3();
        let m = howell_form(vec![r.one()], 3, 1, 3);
        assert!(!is_full_lattice_surrogate(&r, &m));
        assert!(matches!(lattice_to_ideal(&r, &m), Err(IflError::Degenerate { .. })));
    }

    #[test]
    fn ideal_lattices_of_test_rings() {
        let r = f3t3();
        let ideals = enumerate_ideals(&r, 1 << 20).unwrap();
        assert_eq!(ideals.len(), 4);
        let r9 = Ring::trunc_iwasawa(3, 2, 2).unwrap();
        let ideals = enumerate_ideals(&r9, 1 << 20).unwrap();
        for i in &ideals {
            assert!(i.is_ideal());
            for j in &ideals {
                let p = i.product(j).unwrap();
                let x = i.intersection(j).unwrap();
                assert!(p.is_subset(&x));
                assert!(x.is_subset(i) && x.is_subset(j));
            }
        }
        assert!(ideals.iter().any(|i| i.is_zero()));
        assert!(ideals.iter().any(|i| i.is_unit()));
    }

    #[test]
    fn socle_of_truncated_ring() {
        let r = Ring::trunc_iwasawa(3, 2, 3).unwrap();
        let s = socle(&r);
        assert_eq!(s.rows, vec![vec![0, 0, 3]]);
    }

    #[test]
    fn ideals_in_quotient() {
        let r = f3t3();
        let q = r.quotient_by(&IdealHandle::from_strings(&r, &["T^2"]).unwrap().lattice).unwrap();
        let ideals = enumerate_ideals(&q, 1 << 20).unwrap();
        assert_eq!(ideals.len(), 3);
        let t = IdealHandle::from_strings(&q, &["T"]).unwrap();
        assert!(t.product(&t).unwrap().is_zero());
    }
}
