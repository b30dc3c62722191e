//! Obstruction to extending a representation of a normal subgroup H of G,
//! over a finite field K.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use super::{general_linear, Cocycle2, FiniteGroup, GMat};
use crate::error::{too_large, IflError, Result};
use crate::matrix::field;
use crate::rings::{Ops, Ring};

/// Matrices indexed by group element; defined on a subgroup for restrictions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rep {
    pub dim: usize,
    pub images: BTreeMap<usize, GMat>,
}

impl Rep {
    pub fn is_homomorphism(&self, o: &Ops, g: &FiniteGroup) -> bool {
        self.images.iter().all(|(&x, mx)| {
            self.images.iter().all(|(&y, my)| {
                self.images.get(&g.mul(x, y)).is_some_and(|mxy| *mxy == mx.mul(o, my))
            })
        })
    }

    pub fn restricts_to(&self, r: &Rep) -> bool {
        r.images.iter().all(|(x, m)| self.images.get(x) == Some(m))
    }

    pub fn trace_vector(&self, o: &Ops) -> Vec<u32> {
        self.images.values().map(|m| m.trace(o)).collect()
    }
}

#[derive(Clone, Debug)]
pub struct Obstruction {
    pub delta: FiniteGroup,
    /// G -> Delta.
    pub projection: Vec<usize>,
    /// Least element of each coset, in Delta order.
    pub coset_reps: Vec<usize>,
    /// c(g) for every g in G.
    pub c: Vec<GMat>,
    pub cocycle: Cocycle2,
    /// zeta on Delta with b(d, e) = zeta(d) zeta(e) zeta(de)^-1, or None (NonVanishing).
    pub witness: Option<Vec<u32>>,
    pub functions_searched: u128,
}

#[derive(Serialize)]
pub struct ObstructionReport {
    pub delta_order: usize,
    pub cocycle: BTreeMap<String, String>,
    pub cocycle_identity: bool,
    pub vanishing: bool,
    pub witness: Option<BTreeMap<String, String>>,
    pub functions_searched: u128,
}

impl Obstruction {
    pub fn vanishes(&self) -> bool {
        self.witness.is_some()
    }

    pub fn report(&self, o: &Ops) -> ObstructionReport {
        ObstructionReport {
            delta_order: self.delta.order(),
            cocycle: self.cocycle.table_strings(o),
            cocycle_identity: self.cocycle.identity_holds(o, &[]),
            vanishing: self.vanishes(),
            witness: self.witness.as_ref().map(|z| {
                z.iter()
                    .enumerate()
                    .map(|(i, &v)| (self.delta.labels[i].clone(), o.ring.format(o.elem(v))))
                    .collect()
            }),
            functions_searched: self.functions_searched,
        }
    }
}

pub const SEARCH_CAP: u128 = 10_000_000;

fn check_input(o: &Ops, g: &FiniteGroup, h: &[usize], r: &Rep) -> Result<()> {
    if !g.is_normal(h) {
        return Err(IflError::HypothesisFailed("H is not a normal subgroup of G".into()));
    }
    let mut hs = h.to_vec();
    hs.sort_unstable();
    if r.images.keys().copied().collect::<Vec<_>>() != hs {
        return Err(IflError::BadInput("representation must be given exactly on H".into()));
    }
    if r.images.values().any(|m| m.n != r.dim) || !r.is_homomorphism(o, g) {
        return Err(IflError::BadInput("r is not a homomorphism on H".into()));
    }
    Ok(())
}

/// Nonzero combinations of the basis, coefficient tuples in lexicographic id order.
fn first_invertible(o: &Ops, basis: &[Vec<u32>], n: usize) -> Result<Option<GMat>> {
    let q = o.size() as u128;
    let k = basis.len();
    let total = q.checked_pow(k as u32).unwrap_or(u128::MAX);
    if total > SEARCH_CAP {
        return Err(too_large("intertwiner search", total, SEARCH_CAP));
    }
    let mut coeffs = vec![0u32; k];
    loop {
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(None);
            }
            i -= 1;
            coeffs[i] += 1;
            if (coeffs[i] as usize) < o.size() {
                break;
            }
            coeffs[i] = 0;
        }
        let e: Vec<u32> = (0..n * n)
            .map(|j| (0..k).fold(o.zero(), |acc, t| o.add(acc, o.mul(coeffs[t], basis[t][j]))))
            .collect();
        let m = GMat { n, e };
        if m.inv(o).is_some() {
            return Ok(Some(m));
        }
    }
}

/// Invertible X with X r(h) = r(g h g^-1) X for all h in H.
fn intertwiner(o: &Ops, g: &FiniteGroup, h: &[usize], r: &Rep, x: usize) -> Result<Option<GMat>> {
    let n = r.dim;
    let mut rows = Vec::new();
    for &hh in h {
        let a = &r.images[&hh];
        let b = &r.images[&g.mul(g.mul(x, hh), g.inv(x))];
        for i in 0..n {
            for j in 0..n {
                let mut row = vec![o.zero(); n * n];
                for k in 0..n {
                    row[i * n + k] = o.add(row[i * n + k], a.at(k, j));
                    row[k * n + j] = o.sub(row[k * n + j], b.at(i, k));
                }
                rows.push(row);
            }
        }
    }
    let basis = field::kernel(o, &rows, n * n);
    first_invertible(o, &basis, n)
}

fn units(o: &Ops) -> Vec<u32> {
    o.all().filter(|&u| o.is_unit(u)).collect()
}

/// Calls `f` on every function Delta -> K^x (values as unit lists), in lexicographic order; stops on true.
fn for_each_function(order: usize, units: &[u32], mut f: impl FnMut(&[u32]) -> bool) -> Result<(u128, bool)> {
    let total = (units.len() as u128).checked_pow(order as u32).unwrap_or(u128::MAX);
    if total > SEARCH_CAP {
        return Err(too_large("function search", total, SEARCH_CAP));
    }
    let mut idx = vec![0usize; order];
    let mut count = 0u128;
    loop {
        count += 1;
        let vals: Vec<u32> = idx.iter().map(|&i| units[i]).collect();
        if f(&vals) {
            return Ok((count, true));
        }
        let mut i = order;
        loop {
            if i == 0 {
                return Ok((count, false));
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < units.len() {
                break;
            }
            idx[i] = 0;
        }
    }
}

pub fn obstruction_class(field_ring: &Arc<Ring>, g: &FiniteGroup, h: &[usize], r: &Rep) -> Result<Obstruction> {
    let o = field_ring.ops()?;
    check_input(&o, g, h, r)?;
    let (delta, projection) = g.quotient(h)?;
    let coset_reps: Vec<usize> = g.cosets(h).iter().map(|c| c[0]).collect();
    let mut rep_c = Vec::new();
    for &x in &coset_reps {
        if x == 0 {
            rep_c.push(GMat::identity(&o, r.dim));
            continue;
        }
        let c = intertwiner(&o, g, h, r, x)?.ok_or_else(|| {
            IflError::HypothesisFailed(format!("r is not isomorphic to its conjugate by {}", g.labels[x]))
        })?;
        rep_c.push(c);
    }
    let c: Vec<GMat> = (0..g.order())
        .map(|x| {
            let d = projection[x];
            let hpart = g.mul(x, g.inv(coset_reps[d]));
            r.images[&hpart].mul(&o, &rep_c[d])
        })
        .collect();
    let m = delta.order();
    let b = |x: usize, y: usize| -> Result<u32> {
        let cxy_inv = c[g.mul(x, y)].inv(&o).expect("invertible");
        c[x].mul(&o, &c[y]).mul(&o, &cxy_inv).scalar_value(&o).ok_or_else(|| {
            IflError::HypothesisFailed("c(g)c(h)c(gh)^-1 is not scalar; r is not absolutely irreducible".into())
        })
    };
    let values = coset_reps
        .iter()
        .map(|&x| coset_reps.iter().map(|&y| b(x, y)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    for x in 0..g.order() {
        for y in 0..g.order() {
            if b(x, y)? != values[projection[x]][projection[y]] {
                return Err(IflError::HypothesisFailed("cocycle does not factor through G/H".into()));
            }
        }
    }
    let cocycle = Cocycle2 { group: delta.clone(), values };
    let us = units(&o);
    let mut witness = None;
    let (searched, _) = for_each_function(m, &us, |z| {
        let ok = (0..m).all(|a| {
            (0..m).all(|b| {
                let rhs = o.mul(o.mul(z[a], z[b]), o.inv(z[delta.mul(a, b)]).expect("unit"));
                cocycle.values[a][b] == rhs
            })
        });
        if ok {
            witness = Some(z.to_vec());
        }
        ok
    })?;
    Ok(Obstruction { delta, projection, coset_reps, c, cocycle, witness, functions_searched: searched })
}

#[derive(Clone, Debug)]
pub struct Extensions {
    /// Each extension as images of every element of G.
    pub maps: Vec<Rep>,
    pub characters: Vec<Vec<u32>>,
    pub pairwise_distinct: bool,
    pub all_restrict: bool,
    /// Number of distinct trace vectors among the extensions.
    pub trace_classes: usize,
}

/// Homomorphisms Delta -> K^x by exhaustive search.
pub fn characters(o: &Ops, delta: &FiniteGroup) -> Result<Vec<Vec<u32>>> {
    let us = units(o);
    let m = delta.order();
    let mut out = Vec::new();
    for_each_function(m, &us, |z| {
        if (0..m).all(|a| (0..m).all(|b| z[delta.mul(a, b)] == o.mul(z[a], z[b]))) {
            out.push(z.to_vec());
        }
        false
    })?;
    Ok(out)
}

pub fn extend_rep(field_ring: &Arc<Ring>, g: &FiniteGroup, r: &Rep, ob: &Obstruction) -> Result<Extensions> {
    let o = field_ring.ops()?;
    let zeta = ob
        .witness
        .as_ref()
        .ok_or_else(|| IflError::HypothesisFailed("the obstruction class does not vanish".into()))?;
    let base: Vec<GMat> = (0..g.order())
        .map(|x| ob.c[x].scale(&o, o.inv(zeta[ob.projection[x]]).expect("unit")))
        .collect();
    let chars = characters(&o, &ob.delta)?;
    let maps: Vec<Rep> = chars
        .iter()
        .map(|psi| Rep {
            dim: r.dim,
            images: (0..g.order()).map(|x| (x, base[x].scale(&o, psi[ob.projection[x]]))).collect(),
        })
        .collect();
    if let Some(bad) = maps.iter().find(|m| !m.is_homomorphism(&o, g)) {
        let _ = bad;
        return Err(IflError::HypothesisFailed("constructed extension is not a homomorphism".into()));
    }
    let all_restrict = maps.iter().all(|m| m.restricts_to(r));
    let pairwise_distinct = (0..maps.len()).all(|i| (i + 1..maps.len()).all(|j| maps[i] != maps[j]));
    let mut traces: Vec<Vec<u32>> = maps.iter().map(|m| m.trace_vector(&o)).collect();
    traces.sort();
    traces.dedup();
    Ok(Extensions { maps, characters: chars, pairwise_distinct, all_restrict, trace_classes: traces.len() })
}

/// Every homomorphism G -> GL_n(K) restricting to r, by search over images of coset representatives.
pub fn exhaustive_extensions(field_ring: &Arc<Ring>, g: &FiniteGroup, h: &[usize], r: &Rep) -> Result<Vec<Rep>> {
    let o = field_ring.ops()?;
    check_input(&o, g, h, r)?;
    let gl = general_linear(&o, r.dim, SEARCH_CAP)?;
    let cosets = g.cosets(h);
    let reps: Vec<usize> = cosets.iter().map(|c| c[0]).collect();
    let free = reps.len() - 1;
    let total = (gl.len() as u128).checked_pow(free as u32).unwrap_or(u128::MAX);
    if total > SEARCH_CAP {
        return Err(too_large("extension search", total, SEARCH_CAP));
    }
    let mut owner = vec![0usize; g.order()];
    for (i, c) in cosets.iter().enumerate() {
        for &x in c {
            owner[x] = i;
        }
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; free];
    loop {
        let chosen: Vec<GMat> = std::iter::once(GMat::identity(&o, r.dim))
            .chain(idx.iter().map(|&i| gl[i].clone()))
            .collect();
        let images: BTreeMap<usize, GMat> = (0..g.order())
            .map(|x| {
                let d = owner[x];
                let hpart = g.mul(x, g.inv(reps[d]));
                (x, r.images[&hpart].mul(&o, &chosen[d]))
            })
            .collect();
        let cand = Rep { dim: r.dim, images };
        if cand.is_homomorphism(&o, g) {
            out.push(cand);
        }
        let mut i = free;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < gl.len() {
                break;
            }
            idx[i] = 0;
        }
    }
}

/// The S_3 / C_3 example over F_7: r(rotation) = diag(2, 4).
pub fn s3_example() -> Result<(Arc<Ring>, FiniteGroup, Vec<usize>, Rep)> {
    let k = Ring::finite_field(7, 1)?;
    let g = FiniteGroup::symmetric3()?;
    let rot = g.labels.iter().position(|l| l == "120").expect("3-cycle");
    let h = vec![0, rot, g.mul(rot, rot)];
    let o = k.ops()?;
    let d = |a: i64, b: i64| {
        let mut m = GMat::identity(&o, 2);
        m.e[0] = o.from_int(a);
        m.e[3] = o.from_int(b);
        m
    };
    let mut images = BTreeMap::new();
    images.insert(0, GMat::identity(&o, 2));
    images.insert(rot, d(2, 4));
    images.insert(g.mul(rot, rot), d(4, 2));
    let mut hs = h.clone();
    hs.sort_unstable();
    Ok((k.clone(), g, hs, Rep { dim: 2, images }))
}

/// The Z(Q_8) example over F_5: r(-1) = -1.
pub fn q8_example() -> Result<(Arc<Ring>, FiniteGroup, Vec<usize>, Rep)> {
    let k = Ring::finite_field(5, 1)?;
    let g = FiniteGroup::quaternion()?;
    let h = g.center();
    let o = k.ops()?;
    let images = h
        .iter()
        .map(|&x| (x, GMat::scalar(&o, 1, if x == 0 { o.one() } else { o.from_int(-1) })))
        .collect();
    Ok((k.clone(), g, h, Rep { dim: 1, images }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s3_extension_exists() {
        let (k, g, h, r) = s3_example().unwrap();
        let o = k.ops().unwrap();
        let ob = obstruction_class(&k, &g, &h, &r).unwrap();
        assert!(ob.cocycle.identity_holds(&o, &[]));
        assert!(ob.vanishes());
        let ext = extend_rep(&k, &g, &r, &ob).unwrap();
        assert_eq!(ext.maps.len(), 2);
        assert!(ext.pairwise_distinct && ext.all_restrict);
        assert_eq!(ext.trace_classes, 1);
        let brute = exhaustive_extensions(&k, &g, &h, &r).unwrap();
        assert!(!brute.is_empty());
        for m in &ext.maps {
            assert!(brute.contains(m));
        }
    }

    #[test]
    fn q8_center_obstructed() {
        let (k, g, h, r) = q8_example().unwrap();
        let o = k.ops().unwrap();
        let ob = obstruction_class(&k, &g, &h, &r).unwrap();
        assert!(ob.cocycle.identity_holds(&o, &[]));
        assert!(!ob.vanishes());
        assert_eq!(ob.functions_searched, 256);
        assert!(exhaustive_extensions(&k, &g, &h, &r).unwrap().is_empty());
        assert!(extend_rep(&k, &g, &r, &ob).is_err());
    }

    #[test]
    fn h_equals_g() {
        let (k, g, _, _) = s3_example().unwrap();
        let o = k.ops().unwrap();
        // sign character
        let images: BTreeMap<usize, GMat> = (0..6)
            .map(|x| {
                let even = g.element_order(x) != 2;
                (x, GMat::scalar(&o, 1, if even { o.one() } else { o.from_int(-1) }))
            })
            .collect();
        let r = Rep { dim: 1, images };
        let all: Vec<usize> = (0..6).collect();
        let ob = obstruction_class(&k, &g, &all, &r).unwrap();
        assert!(ob.vanishes());
        assert_eq!(ob.c, r.images.values().cloned().collect::<Vec<_>>());
        let ext = extend_rep(&k, &g, &r, &ob).unwrap();
        assert_eq!(ext.maps, vec![r]);
    }

    #[test]
    fn non_invariant_rep_rejected() {
        let k = Ring::finite_field(7, 1).unwrap();
        let o = k.ops().unwrap();
        let g = FiniteGroup::symmetric3().unwrap();
        let rot = g.labels.iter().position(|l| l == "120").unwrap();
        let images: BTreeMap<usize, GMat> = [(0, 1), (rot, 2), (g.mul(rot, rot), 4)]
            .into_iter()
            .map(|(x, v)| (x, GMat::scalar(&o, 1, o.from_int(v))))
            .collect();
        let mut h: Vec<usize> = images.keys().copied().collect();
        h.sort_unstable();
        let r = Rep { dim: 1, images };
        assert!(matches!(obstruction_class(&k, &g, &h, &r), Err(IflError::HypothesisFailed(_))));
    }
}
