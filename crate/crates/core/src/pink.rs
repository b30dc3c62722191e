//! Finite matrix groups in SL_2(A) and Pink's Lie-algebra tower.

use std::collections::{HashSet, VecDeque};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{too_large, IflError, Result};
use crate::howell::{howell_form, SubLattice};
use crate::ideals::{enumerate_ideals, maximal_ideal, ring_lattice, IdealHandle};
use crate::matrix::{self as mx, M2};
use crate::rings::{Ops, Ring};

pub const DEFAULT_CAP: usize = 2_000_000;

#[derive(Clone)]
pub struct MatrixGroup {
    pub ring: Arc<Ring>,
    pub generators: Vec<M2>,
    pub elements: Vec<M2>,
    set: HashSet<M2>,
}

impl std::fmt::Debug for MatrixGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MatrixGroup(order {} over {})", self.order(), self.ring.label())
    }
}

impl PartialEq for MatrixGroup {
    fn eq(&self, other: &Self) -> bool {
        *self.ring == *other.ring && self.elements == other.elements
    }
}

impl MatrixGroup {
    pub fn from_elements(ring: &Arc<Ring>, generators: Vec<M2>, mut elements: Vec<M2>) -> Self {
        elements.sort_unstable();
        elements.dedup();
        let set = elements.iter().copied().collect();
        MatrixGroup { ring: ring.clone(), generators, elements, set }
    }

    pub fn ops(&self) -> Ops<'_> {
        self.ring.ops().expect("group rings are enumerable")
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, x: &M2) -> bool {
        self.set.contains(x)
    }

    pub fn is_subset(&self, other: &MatrixGroup) -> bool {
        self.order() <= other.order() && self.elements.iter().all(|x| other.contains(x))
    }

    /// Every element is congruent to 1 modulo the maximal ideal.
    pub fn is_pgroup(&self) -> bool {
        let o = self.ops();
        let one = o.one();
        self.elements.iter().all(|x| is_unipotent_mod_m(&o, x, one))
    }

    pub fn is_abelian(&self) -> bool {
        let o = self.ops();
        self.generators.iter().all(|g| {
            self.generators
                .iter()
                .all(|h| mx::mul(&o, g, h) == mx::mul(&o, h, g))
        })
    }

    /// Small generating set chosen greedily in element order.
    pub fn minimal_generators(&self, cap: usize) -> Result<Vec<M2>> {
        let ring = &self.ring;
        let mut gens: Vec<M2> = Vec::new();
        let mut cur = enumerate_subgroup(ring, &gens, cap)?;
        for x in &self.elements {
            if cur.order() == self.order() {
                break;
            }
            if !cur.contains(x) {
                gens.push(*x);
                cur = enumerate_subgroup(ring, &gens, cap)?;
            }
        }
        Ok(gens)
    }

    pub fn with_generators(mut self, cap: usize) -> Result<Self> {
        if self.generators.is_empty() && self.order() > 1 {
            self.generators = self.minimal_generators(cap)?;
        }
        Ok(self)
    }
}

fn is_unipotent_mod_m(o: &Ops, x: &M2, one: u32) -> bool {
    let r = o.ring;
    r.in_radical(o.elem(o.sub(x[0], one)))
        && r.in_radical(o.elem(x[1]))
        && r.in_radical(o.elem(x[2]))
        && r.in_radical(o.elem(o.sub(x[3], one)))
}

/// Breadth-first closure under right multiplication by generators and inverses.
pub fn enumerate_subgroup(ring: &Arc<Ring>, gens: &[M2], cap: usize) -> Result<MatrixGroup> {
    let o = ring.ops()?;
    let id = mx::identity(&o);
    let mut steps: Vec<M2> = Vec::new();
    for g in gens {
        let gi = mx::inv(&o, g).ok_or_else(|| IflError::BadInput("singular generator".into()))?;
        for s in [*g, gi] {
            if s != id && !steps.contains(&s) {
                steps.push(s);
            }
        }
    }
    let mut set: HashSet<M2> = HashSet::new();
    set.insert(id);
    let mut order = vec![id];
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for s in &steps {
            let y = mx::mul(&o, &x, s);
            if set.insert(y) {
                if set.len() > cap {
                    return Err(IflError::CapExceeded {
                        what: "subgroup enumeration".into(),
                        count: set.len(),
                        cap,
                    });
                }
                order.push(y);
                queue.push_back(y);
            }
        }
    }
    order.sort_unstable();
    Ok(MatrixGroup { ring: ring.clone(), generators: gens.to_vec(), elements: order, set })
}

pub fn group_from_strings(ring: &Arc<Ring>, mats: &[&str], cap: usize) -> Result<MatrixGroup> {
    let o = ring.ops()?;
    let gens = mats.iter().map(|s| mx::parse(&o, s)).collect::<Result<Vec<_>>>()?;
    enumerate_subgroup(ring, &gens, cap)
}

/// Elementary generators E12(m), E21(m) over the monomial basis.
pub fn sl2_generators(ring: &Arc<Ring>) -> Result<Vec<M2>> {
    let o = ring.ops()?;
    let (z, e) = (o.zero(), o.one());
    let mut out = Vec::new();
    for m in crate::ideals::monomials(ring) {
        let m = o.id(&m);
        if m == z {
            continue;
        }
        out.push([e, m, z, e]);
        out.push([e, z, m, e]);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// |SL_2(A)| for local A; an upper bound otherwise.
pub fn sl2_order_estimate(ring: &Ring) -> u128 {
    let s = ring.size();
    let q = (ring.p as u128).pow(ring.residue_degree() as u32);
    s.saturating_pow(3) / (q * q) * (q * q - 1)
}

pub fn sl2_elements(ring: &Arc<Ring>, cap: usize) -> Result<MatrixGroup> {
    let est = sl2_order_estimate(ring);
    if est > cap as u128 {
        return Err(too_large("SL_2 enumeration", est, cap as u128));
    }
    let o = ring.ops()?;
    let one = o.one();
    let all: Vec<u32> = o.all().collect();
    let units: Vec<u32> = all.iter().copied().filter(|&x| o.is_unit(x)).collect();
    let chunks: Vec<Vec<M2>> = all
        .par_iter()
        .map(|&a| {
            let mut out = Vec::new();
            if let Some(ai) = o.inv(a) {
                for &b in &all {
                    for &c in &all {
                        let d = o.mul(o.add(one, o.mul(b, c)), ai);
                        out.push([a, b, c, d]);
                    }
                }
            } else {
                for &b in &all {
                    if let Some(bi) = o.inv(b) {
                        for &d in &all {
                            let c = o.mul(o.sub(o.mul(a, d), one), bi);
                            out.push([a, b, c, d]);
                        }
                    } else {
                        for &c in &all {
                            for &d in &all {
                                if mx::det(&o, &[a, b, c, d]) == one {
                                    out.push([a, b, c, d]);
                                }
                            }
                        }
                    }
                }
            }
            out
        })
        .collect();
    let _ = units;
    let elements: Vec<M2> = chunks.into_iter().flatten().collect();
    Ok(MatrixGroup::from_elements(ring, sl2_generators(ring)?, elements))
}

fn ideal_ids(o: &Ops, ideal: &IdealHandle) -> Vec<u32> {
    let mut v: Vec<u32> = ideal.elements().iter().map(|e| o.id(e)).collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Kernel of SL_2(A) -> SL_2(A/a).
pub fn gamma(ideal: &IdealHandle, cap: usize) -> Result<MatrixGroup> {
    let ring = &ideal.ring;
    if ideal.is_unit() {
        return sl2_elements(ring, cap);
    }
    let size = ideal.size().saturating_pow(3);
    if size > cap as u128 {
        return Err(too_large("congruence subgroup enumeration", size, cap as u128));
    }
    let o = ring.ops()?;
    let one = o.one();
    let ids = ideal_ids(&o, ideal);
    let elements: Vec<M2> = ids
        .par_iter()
        .flat_map_iter(|&al| {
            let ids = &ids;
            let a = o.add(one, al);
            let ai = o.inv(a).expect("1 + a is a unit for a proper ideal");
            ids.iter().flat_map(move |&b| {
                ids.iter().map(move |&c| {
                    let d = o.mul(o.add(one, o.mul(b, c)), ai);
                    [a, b, c, d]
                })
            })
        })
        .collect();
    let (z, e) = (o.zero(), one);
    let mut gens = Vec::new();
    for r in &ideal.lattice.rows {
        let x = o.id(r);
        if x == z {
            continue;
        }
        gens.push([e, x, z, e]);
        gens.push([e, z, x, e]);
        let xi = o.inv(o.add(one, x)).expect("unit");
        gens.push([o.add(one, x), z, z, xi]);
    }
    Ok(MatrixGroup::from_elements(ring, gens, elements))
}

/// x - tr(x)/2.
pub fn theta(o: &Ops, x: &M2) -> M2 {
    let half = o.inv(o.from_int(2)).expect("p odd");
    let t = o.mul(half, mx::trace(o, x));
    [o.sub(x[0], t), x[1], x[2], o.sub(x[3], t)]
}

/// Lattice of 2x2 matrices (rank 4n) spanned by `rows` plus the quotient in every entry.
pub fn matrix_lattice(ring: &Ring, mut rows: Vec<Vec<u64>>) -> SubLattice {
    let n = ring.n();
    if let Some(q) = &ring.quotient {
        for k in 0..4 {
            for r in &q.rows {
                let mut row = vec![0; 4 * n];
                row[k * n..(k + 1) * n].copy_from_slice(r);
                rows.push(row);
            }
        }
    }
    howell_form(rows, ring.p, ring.a, 4 * n)
}

/// a * sl_2(A) as a matrix lattice.
pub fn ideal_times_sl2(ideal: &IdealHandle) -> SubLattice {
    let ring = &ideal.ring;
    let n = ring.n();
    let mut rows = Vec::new();
    for r in &ideal.lattice.rows {
        let z = vec![0u64; n];
        let neg = ring.neg(r);
        rows.push([z.clone(), r.clone(), z.clone(), z.clone()].concat());
        rows.push([z.clone(), z.clone(), r.clone(), z.clone()].concat());
        rows.push([r.clone(), z.clone(), z.clone(), neg].concat());
    }
    matrix_lattice(ring, rows)
}

pub fn lattice_matrices(o: &Ops, l: &SubLattice) -> Vec<M2> {
    let mut v: Vec<M2> = l.elements().iter().map(|e| mx::from_vec(o, e)).collect();
    v.sort_unstable();
    v.dedup();
    v
}

#[derive(Clone, Debug)]
pub struct PinkData {
    pub l1: SubLattice,
    pub c_trace: SubLattice,
    /// L_1, L_2, ..., L_depth.
    pub l_tower: Vec<SubLattice>,
    pub m_tower: Vec<SubLattice>,
    /// H_1, ..., H_depth.
    pub h_tower: Vec<MatrixGroup>,
}

impl PinkData {
    /// L_n for n >= 1.
    pub fn l(&self, n: usize) -> &SubLattice {
        &self.l_tower[n - 1]
    }

    pub fn h(&self, n: usize) -> &MatrixGroup {
        &self.h_tower[n - 1]
    }
}

fn check_pgroup(g: &MatrixGroup) -> Result<()> {
    let o = g.ops();
    let one = o.one();
    if let Some(x) = g.elements.iter().find(|x| !is_unipotent_mod_m(&o, x, one)) {
        return Err(IflError::NotPGroup(format!(
            "{} is not congruent to 1 modulo the maximal ideal",
            mx::format(&o, x)
        )));
    }
    Ok(())
}

pub fn pink_tower(g: &MatrixGroup, depth: usize, cap: usize) -> Result<PinkData> {
    check_pgroup(g)?;
    let ring = &g.ring;
    let o = g.ops();
    let depth = depth.max(1);
    let mut l1 = matrix_lattice(ring, vec![]);
    for x in &g.elements {
        let v = mx::to_vec(&o, &theta(&o, x));
        if !l1.contains(&v) {
            l1 = l1.with_rows([v]);
        }
    }
    let basis: Vec<M2> = l1.rows.iter().map(|r| mx::from_vec(&o, r)).collect();
    let mut c_rows = Vec::new();
    for x in &basis {
        for y in &basis {
            c_rows.push(o.elem(mx::trace(&o, &mx::mul(&o, x, y))).to_vec());
        }
    }
    let c_trace = ring_lattice(ring, c_rows);
    let mut l_tower = vec![l1.clone()];
    for _ in 1..depth {
        let prev = l_tower.last().unwrap();
        let prev_b: Vec<M2> = prev.rows.iter().map(|r| mx::from_vec(&o, r)).collect();
        let rows = basis
            .iter()
            .flat_map(|x| prev_b.iter().map(move |y| (x, y)))
            .map(|(x, y)| mx::to_vec(&o, &mx::bracket(&o, x, y)))
            .collect();
        l_tower.push(matrix_lattice(ring, rows));
    }
    let n = ring.n();
    let scalar_rows: Vec<Vec<u64>> = c_trace
        .rows
        .iter()
        .map(|c| [c.clone(), vec![0; n], vec![0; n], c.clone()].concat())
        .collect();
    let m_tower = l_tower
        .iter()
        .map(|l| l.with_rows(scalar_rows.iter().cloned()))
        .collect();
    let h_tower = l_tower
        .iter()
        .map(|l| h_group(ring, l, &c_trace, cap))
        .collect::<Result<Vec<_>>>()?;
    Ok(PinkData { l1, c_trace, l_tower, m_tower, h_tower })
}

/// {x in SL_2(A) : Theta(x) in L, tr(x) - 2 in C}.
pub fn h_group(ring: &Arc<Ring>, l: &SubLattice, c: &SubLattice, cap: usize) -> Result<MatrixGroup> {
    let o = ring.ops()?;
    let qlog = ring.quotient.as_ref().map(|q| q.log_size()).unwrap_or(0);
    let lsize = (ring.p as u128).pow(l.log_size() - 4 * qlog);
    let csize = (ring.p as u128).pow(c.log_size() - qlog);
    let direct = lsize.saturating_mul(csize);
    let half = o.inv(o.from_int(2)).expect("p odd");
    let one = o.one();
    let two = o.from_int(2);
    let elements: Vec<M2> = if direct <= sl2_order_estimate(ring) {
        let thetas = lattice_matrices(&o, l);
        let mut traces: Vec<u32> = c.elements().iter().map(|e| o.add(two, o.id(e))).collect();
        traces.sort_unstable();
        traces.dedup();
        traces
            .par_iter()
            .flat_map_iter(|&t| {
                let s = o.mul(half, t);
                let thetas = &thetas;
                thetas.iter().filter_map(move |th| {
                    let x = [o.add(s, th[0]), th[1], th[2], o.add(s, th[3])];
                    (mx::det(&o, &x) == one).then_some(x)
                })
            })
            .collect()
    } else {
        let sl2 = sl2_elements(ring, cap)?;
        sl2.elements
            .par_iter()
            .filter(|x| {
                l.contains(&mx::to_vec(&o, &theta(&o, x)))
                    && c.contains(o.elem(o.sub(mx::trace(&o, x), two)))
            })
            .copied()
            .collect()
    };
    Ok(MatrixGroup::from_elements(ring, vec![], elements))
}

/// Normal closure of `gens` inside the group generated by `ambient_gens`.
pub fn normal_closure(
    ring: &Arc<Ring>,
    gens: &[M2],
    ambient_gens: &[M2],
    cap: usize,
) -> Result<MatrixGroup> {
    let o = ring.ops()?;
    let mut cur_gens = gens.to_vec();
    let mut group = enumerate_subgroup(ring, &cur_gens, cap)?;
    loop {
        let mut added = false;
        let mut k = 0;
        while k < cur_gens.len() {
            let n = cur_gens[k];
            for s in ambient_gens {
                let si = mx::inv(&o, s).expect("invertible");
                for c in [mx::conj(&o, s, &n, &si), mx::conj(&o, &si, &n, s)] {
                    if !group.contains(&c) {
                        cur_gens.push(c);
                        group = enumerate_subgroup(ring, &cur_gens, cap)?;
                        added = true;
                    }
                }
            }
            k += 1;
        }
        if !added {
            return Ok(group);
        }
    }
}

/// (G, N) for N normal in G: normal closure of commutators of generators.
pub fn commutator_subgroup(g: &MatrixGroup, n: &MatrixGroup, cap: usize) -> Result<MatrixGroup> {
    let o = g.ops();
    let id = mx::identity(&o);
    let mut comms = Vec::new();
    for x in &g.generators {
        for y in &n.generators {
            let c = mx::commutator(&o, x, y);
            if c != id && !comms.contains(&c) {
                comms.push(c);
            }
        }
    }
    normal_closure(&g.ring, &comms, &g.generators, cap)
}

/// G_1 = G, G_{k+1} = (G, G_k); returns G_n.
pub fn descending_central(g: &MatrixGroup, n: usize, cap: usize) -> Result<MatrixGroup> {
    let g = g.clone().with_generators(cap)?;
    let mut cur = g.clone();
    for _ in 1..n {
        cur = commutator_subgroup(&g, &cur, cap)?;
    }
    Ok(cur)
}

#[derive(Clone, Debug, Serialize)]
pub struct PinkLevelCheck {
    pub n: usize,
    pub h_order: usize,
    pub g_n_order: usize,
    pub h_equals_g_n: bool,
    pub g_comm_g_n_order: usize,
    pub h_equals_g_comm_g_n: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PinkVerdict {
    pub group_order: usize,
    pub h1_order: usize,
    pub normal_in_h1: bool,
    pub levels: Vec<PinkLevelCheck>,
    pub passed: bool,
}

/// Clause (i): G is normal in H_1. Clause (ii): H_n equals the n-th term of the
/// descending central series; the set equality with (G, G_n) is reported alongside.
pub fn verify_pink_theorem(g: &MatrixGroup, depth: usize, cap: usize) -> Result<PinkVerdict> {
    let data = pink_tower(g, depth.max(2), cap)?;
    verify_with_tower(g, &data, depth, cap)
}

pub fn verify_with_tower(
    g: &MatrixGroup,
    data: &PinkData,
    depth: usize,
    cap: usize,
) -> Result<PinkVerdict> {
    let g = g.clone().with_generators(cap)?;
    let o = g.ops();
    let h1 = data.h(1);
    let normal_in_h1 = g.is_subset(h1)
        && h1.elements.par_iter().all(|h| {
            let hi = mx::inv_sl(&o, h);
            g.generators.iter().all(|x| g.contains(&mx::conj(&o, h, x, &hi)))
        });
    let mut series = vec![g.clone()];
    for _ in 1..=depth {
        let next = commutator_subgroup(&g, series.last().unwrap(), cap)?;
        series.push(next);
    }
    let mut levels = Vec::new();
    for n in 2..=depth.min(data.h_tower.len()) {
        let h = data.h(n);
        let gn = &series[n - 1];
        let gcomm = &series[n];
        levels.push(PinkLevelCheck {
            n,
            h_order: h.order(),
            g_n_order: gn.order(),
            h_equals_g_n: h.elements == gn.elements,
            g_comm_g_n_order: gcomm.order(),
            h_equals_g_comm_g_n: h.elements == gcomm.elements,
        });
    }
    let passed = normal_in_h1 && levels.iter().all(|l| l.h_equals_g_n);
    Ok(PinkVerdict { group_order: g.order(), h1_order: h1.order(), normal_in_h1, levels, passed })
}

/// Image of G in SL_2(A/a).
pub fn reduce_group(g: &MatrixGroup, ideal: &IdealHandle) -> Result<MatrixGroup> {
    if ideal.is_unit() {
        return Err(IflError::BadInput("reduction modulo the unit ideal".into()));
    }
    let target = g.ring.quotient_by(&ideal.lattice)?;
    let o = g.ops();
    let t = target.ops()?;
    let map = |x: &M2| -> M2 { [0, 1, 2, 3].map(|k| t.id(o.elem(x[k]))) };
    let gens = g.generators.iter().map(map).collect();
    let elements = g.elements.iter().map(map).collect();
    Ok(MatrixGroup::from_elements(&target, gens, elements))
}

/// Whether L(G) maps onto L(G mod a).
pub fn lie_surjects(g: &MatrixGroup, ideal: &IdealHandle, cap: usize) -> Result<bool> {
    let gbar = reduce_group(g, ideal)?;
    let l = pink_tower(g, 2, cap)?;
    let lbar = pink_tower(&gbar, 2, cap)?;
    let image = matrix_lattice(&gbar.ring, l.l(2).rows.clone());
    Ok(image == *lbar.l(2))
}

#[derive(Clone, Debug)]
pub struct CongruenceLevel {
    pub ideal: IdealHandle,
    pub contained: Vec<IdealHandle>,
    pub maximal: Vec<IdealHandle>,
    pub join_closed: bool,
}

pub fn congruence_level(g: &MatrixGroup, cap: usize) -> Result<CongruenceLevel> {
    let ring = &g.ring;
    let ideals = enumerate_ideals(ring, cap as u128)?;
    let mut contained = Vec::new();
    for i in &ideals {
        if i.size().saturating_pow(3) > (g.order() as u128) * 2 && !i.is_zero() {
            continue;
        }
        let gi = gamma(i, cap)?;
        if gi.is_subset(g) {
            contained.push(i.clone());
        }
    }
    let mut join = IdealHandle::zero(ring);
    for i in &contained {
        join = join.sum(i)?;
    }
    let maximal: Vec<IdealHandle> = contained
        .iter()
        .filter(|i| !contained.iter().any(|j| j != *i && i.is_subset(j)))
        .cloned()
        .collect();
    let join_closed = contained.contains(&join);
    Ok(CongruenceLevel { ideal: join, contained, maximal, join_closed })
}

/// Normal-closure descent from SL_2(A) towards G.
pub fn is_subnormal(g: &MatrixGroup, cap: usize) -> Result<bool> {
    let ring = &g.ring;
    let full = sl2_elements(ring, cap)?;
    if g.order() == full.order() {
        return Ok(true);
    }
    let g = g.clone().with_generators(cap)?;
    let mut s_gens = full.generators.clone();
    let mut s_order = full.order();
    loop {
        let n = normal_closure(ring, &g.generators, &s_gens, cap)?;
        if n.order() == g.order() {
            return Ok(true);
        }
        if n.order() == s_order {
            return Ok(false);
        }
        s_order = n.order();
        s_gens = n.minimal_generators(cap)?;
    }
}

/// Random subgroup of the congruence subgroup of the maximal ideal.
pub fn random_pgroup<R: rand::Rng>(
    ring: &Arc<Ring>,
    ngens: usize,
    rng: &mut R,
    cap: usize,
) -> Result<MatrixGroup> {
    let m = maximal_ideal(ring);
    let pool = gamma(&m, cap)?;
    let gens: Vec<M2> = (0..ngens)
        .map(|_| pool.elements[rng.gen_range(0..pool.order())])
        .collect();
    enumerate_subgroup(ring, &gens, cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    const CAP: usize = DEFAULT_CAP;

    #[test]
    fn sl2_f3_from_elementary() {
        let r = Ring::finite_field(3, 1).unwrap();
        let g = group_from_strings(&r, &["1,1;0,1", "1,0;1,1"], CAP).unwrap();
        assert_eq!(g.order(), 24);
        assert_eq!(sl2_elements(&r, CAP).unwrap().order(), 24);
        let e = enumerate_subgroup(&r, &[], CAP).unwrap();
        assert_eq!(e.order(), 1);
    }

    #[test]
    fn kernel_of_reduction_has_order_27() {
        let r = Ring::trunc_iwasawa(3, 1, 2).unwrap();
        let g = group_from_strings(&r, &["1+T,0;0,1+2*T", "1,T;0,1", "1,0;T,1"], CAP).unwrap();
        assert_eq!(g.order(), 27);
        let m = maximal_ideal(&r);
        assert_eq!(gamma(&m, CAP).unwrap(), g);
    }

    #[test]
    fn theta_examples() {
        let r = Ring::trunc_iwasawa(3, 1, 3).unwrap();
        let o = r.ops().unwrap();
        assert_eq!(theta(&o, &mx::identity(&o)), mx::zero(&o));
        let x = mx::parse(&o, "1,1+T;0,1").unwrap();
        assert_eq!(theta(&o, &x), mx::parse(&o, "0,1+T;0,0").unwrap());
        let u = o.id(&r.parse("1+T").unwrap());
        let ui = o.inv(u).unwrap();
        let th = theta(&o, &[u, o.zero(), o.zero(), ui]);
        let half = o.inv(o.from_int(2)).unwrap();
        let v = o.mul(half, o.sub(u, ui));
        assert_eq!(th, [v, o.zero(), o.zero(), o.neg(v)]);
    }

    #[test]
    fn theta_equivariant() {
        let r = Ring::trunc_iwasawa(3, 1, 2).unwrap();
        let o = r.ops().unwrap();
        let s = sl2_elements(&r, CAP).unwrap();
        for (i, g) in s.elements.iter().enumerate().step_by(97) {
            let gi = mx::inv_sl(&o, g);
            for x in s.elements.iter().skip(i % 13).step_by(211) {
                let lhs = theta(&o, &mx::conj(&o, g, x, &gi));
                let rhs = mx::conj(&o, g, &theta(&o, x), &gi);
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn pink_law_for_maximal_ideal() {
        let r = Ring::trunc_iwasawa(3, 1, 3).unwrap();
        let m = maximal_ideal(&r);
        let g = gamma(&m, CAP).unwrap();
        let data = pink_tower(&g, 2, CAP).unwrap();
        assert_eq!(*data.l(2), ideal_times_sl2(&m.pow(2)));
        let r2 = Ring::trunc_iwasawa(3, 1, 2).unwrap();
        let g2 = gamma(&maximal_ideal(&r2), CAP).unwrap();
        assert!(pink_tower(&g2, 2, CAP).unwrap().l(2).is_zero());
    }

    #[test]
    fn trivial_group_tower() {
        let r = Ring::trunc_iwasawa(3, 1, 2).unwrap();
        let g = enumerate_subgroup(&r, &[], CAP).unwrap();
        let data = pink_tower(&g, 3, CAP).unwrap();
        assert!(data.l1.is_zero() && data.c_trace.is_zero());
        assert_eq!(data.h(1).order(), 1);
        assert!(verify_pink_theorem(&g, 3, CAP).unwrap().passed);
    }

    #[test]
    fn not_pgroup() {
        let r = Ring::finite_field(3, 1).unwrap();
        let g = group_from_strings(&r, &["1,1;0,1"], CAP).unwrap();
        assert!(matches!(pink_tower(&g, 2, CAP), Err(IflError::NotPGroup(_))));
    }

    #[test]
    fn pink_theorem_on_congruence_group() {
        let r = Ring::trunc_iwasawa(3, 1, 2).unwrap();
        let g = gamma(&maximal_ideal(&r), CAP).unwrap();
        let v = verify_pink_theorem(&g, 3, CAP).unwrap();
        assert!(v.passed);
        let g2 = descending_central(&g, 2, CAP).unwrap();
        assert_eq!(g2.order(), v.levels[0].h_order);
    }

    #[test]
    fn sylow_of_sl2_f3_is_abelian() {
        let r = Ring::finite_field(3, 1).unwrap();
        let g = group_from_strings(&r, &["1,1;0,1"], CAP).unwrap();
        assert_eq!(g.order(), 3);
        assert_eq!(descending_central(&g, 2, CAP).unwrap().order(), 1);
    }

    #[test]
    fn reduce_congruence_group() {
        let r = Ring::trunc_iwasawa(3, 1, 3).unwrap();
        let t = IdealHandle::from_strings(&r, &["T"]).unwrap();
        let g = gamma(&t, CAP).unwrap();
        let t2 = IdealHandle::from_strings(&r, &["T^2"]).unwrap();
        let gbar = reduce_group(&g, &t2).unwrap();
        let q = gbar.ring.clone();
        let expected = gamma(&IdealHandle::from_strings(&q, &["T"]).unwrap(), CAP).unwrap();
        assert_eq!(gbar, expected);
        assert!(lie_surjects(&g, &t2, CAP).unwrap());
        let same = reduce_group(&g, &IdealHandle::zero(&r)).unwrap();
        assert_eq!(same.order(), g.order());
    }

    #[test]
    fn congruence_level_round_trip() {
        let r = Ring::trunc_iwasawa(3, 1, 2).unwrap();
        for i in enumerate_ideals(&r, 1 << 20).unwrap() {
            let g = gamma(&i, CAP).unwrap();
            let lvl = congruence_level(&g, CAP).unwrap();
            assert_eq!(lvl.ideal, i);
            assert!(lvl.join_closed);
        }
        let f3 = Ring::finite_field(3, 1).unwrap();
        let torus = group_from_strings(&f3, &["2,0;0,2"], CAP).unwrap();
        assert!(congruence_level(&torus, CAP).unwrap().ideal.is_zero());
    }

    #[test]
    fn subnormality() {
        let f5 = Ring::finite_field(5, 1).unwrap();
        let full = sl2_elements(&f5, CAP).unwrap();
        assert!(is_subnormal(&full, CAP).unwrap());
        let c4 = group_from_strings(&f5, &["2,0;0,3"], CAP).unwrap();
        assert_eq!(c4.order(), 4);
        assert!(!is_subnormal(&c4, CAP).unwrap());
        let r = Ring::trunc_iwasawa(3, 1, 2).unwrap();
        let g = gamma(&maximal_ideal(&r), CAP).unwrap();
        assert!(is_subnormal(&g, CAP).unwrap());
    }

    #[test]
    fn random_pgroups_are_pgroups() {
        let r = Ring::trunc_iwasawa(3, 1, 2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let g = random_pgroup(&r, 2, &mut rng, CAP).unwrap();
            assert!(g.is_pgroup());
            assert!(verify_pink_theorem(&g, 3, CAP).unwrap().passed);
        }
    }
}
