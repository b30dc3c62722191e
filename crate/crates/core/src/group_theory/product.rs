//! Subgroups of direct products of matrix groups, Goursat decomposition,
//! the pairwise-surjectivity criterion, and Merzljakov's form of isomorphisms.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use serde::Serialize;

use super::FiniteGroup;
use crate::error::{too_large, IflError, Result};
use crate::matrix::{self as mx, M2};
use crate::pink::{commutator_subgroup, MatrixGroup};
use crate::rings::{ring_automorphisms, Ops, Ring, RingMorphism};

/// A subgroup of S_1 x ... x S_t; elements are mixed-radix codes of factor indices.
#[derive(Clone, Debug)]
pub struct ProductSubgroup {
    pub factors: Vec<MatrixGroup>,
    tables: Vec<FiniteGroup>,
    factor_elems: Vec<Vec<M2>>,
    index: Vec<HashMap<M2, usize>>,
    pub elements: Vec<u64>,
}

impl ProductSubgroup {
    fn skeleton(factors: Vec<MatrixGroup>, cap: usize) -> Result<Self> {
        let mut tables = Vec::new();
        let mut factor_elems = Vec::new();
        let mut index = Vec::new();
        for f in &factors {
            let (t, e) = FiniteGroup::from_matrix_group(f, cap)?;
            index.push(e.iter().enumerate().map(|(i, x)| (*x, i)).collect());
            tables.push(t);
            factor_elems.push(e);
        }
        Ok(ProductSubgroup { factors, tables, factor_elems, index, elements: Vec::new() })
    }

    pub fn product_order(&self) -> u128 {
        self.tables.iter().map(|t| t.order() as u128).product()
    }

    fn radix(&self, i: usize) -> u64 {
        self.tables[i + 1..].iter().map(|t| t.order() as u64).product()
    }

    pub fn encode(&self, tuple: &[M2]) -> Result<u64> {
        if tuple.len() != self.tables.len() {
            return Err(IflError::BadInput("tuple length differs from the number of factors".into()));
        }
        let mut code = 0u64;
        for (i, x) in tuple.iter().enumerate() {
            let k = *self.index[i]
                .get(x)
                .ok_or_else(|| IflError::BadInput(format!("component {i} is not in its factor")))?;
            code = code * self.tables[i].order() as u64 + k as u64;
        }
        Ok(code)
    }

    fn component(&self, code: u64, i: usize) -> usize {
        ((code / self.radix(i)) % self.tables[i].order() as u64) as usize
    }

    pub fn decode(&self, code: u64) -> Vec<M2> {
        (0..self.tables.len()).map(|i| self.factor_elems[i][self.component(code, i)]).collect()
    }

    fn mul_codes(&self, x: u64, y: u64) -> u64 {
        let mut code = 0u64;
        for (i, t) in self.tables.iter().enumerate() {
            code = code * t.order() as u64 + t.mul(self.component(x, i), self.component(y, i)) as u64;
        }
        code
    }

    /// The subgroup generated by the given tuples.
    pub fn generated(factors: Vec<MatrixGroup>, gens: &[Vec<M2>], cap: usize) -> Result<Self> {
        let mut s = Self::skeleton(factors, cap)?;
        let total = s.product_order();
        if total > 1 << 32 {
            return Err(too_large("product group", total, 1 << 32));
        }
        let g: Vec<u64> = gens.iter().map(|t| s.encode(t)).collect::<Result<_>>()?;
        let mut seen = vec![0u64; (total as usize).div_ceil(64)];
        let mut elems = vec![0u64];
        seen[0] |= 1;
        let mut i = 0;
        while i < elems.len() {
            for &h in &g {
                let y = s.mul_codes(elems[i], h);
                let (w, b) = ((y / 64) as usize, y % 64);
                if seen[w] >> b & 1 == 0 {
                    seen[w] |= 1 << b;
                    elems.push(y);
                    if elems.len() > cap {
                        return Err(IflError::CapExceeded { what: "product subgroup".into(), count: elems.len(), cap });
                    }
                }
            }
            i += 1;
        }
        elems.sort_unstable();
        s.elements = elems;
        Ok(s)
    }

    pub fn full(factors: Vec<MatrixGroup>, cap: usize) -> Result<Self> {
        let mut s = Self::skeleton(factors, cap)?;
        let total = s.product_order();
        if total > cap as u128 {
            return Err(too_large("product group", total, cap as u128));
        }
        s.elements = (0..total as u64).collect();
        Ok(s)
    }

    /// {(x, f(x)) : x in G_1}.
    pub fn graph(g1: &MatrixGroup, g2: &MatrixGroup, f: impl Fn(&M2) -> M2, cap: usize) -> Result<Self> {
        let mut s = Self::skeleton(vec![g1.clone(), g2.clone()], cap)?;
        let mut elems = g1
            .elements
            .iter()
            .map(|x| s.encode(&[*x, f(x)]))
            .collect::<Result<Vec<_>>>()?;
        elems.sort_unstable();
        s.elements = elems;
        Ok(s)
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, tuple: &[M2]) -> bool {
        self.encode(tuple).map(|c| self.elements.binary_search(&c).is_ok()).unwrap_or(false)
    }

    pub fn is_closed(&self) -> bool {
        self.elements.iter().all(|&x| {
            self.elements.iter().all(|&y| self.elements.binary_search(&self.mul_codes(x, y)).is_ok())
        })
    }

    pub fn tuples(&self) -> Vec<Vec<M2>> {
        self.elements.iter().map(|&c| self.decode(c)).collect()
    }

    /// Number of distinct images in S_i x S_j.
    pub fn pair_image_size(&self, i: usize, j: usize) -> usize {
        let nj = self.tables[j].order();
        let mut seen = vec![false; self.tables[i].order() * nj];
        let mut count = 0;
        for &c in &self.elements {
            let k = self.component(c, i) * nj + self.component(c, j);
            if !std::mem::replace(&mut seen[k], true) {
                count += 1;
            }
        }
        count
    }

    fn projection(&self, i: usize) -> Vec<M2> {
        let mut seen = vec![false; self.tables[i].order()];
        for &c in &self.elements {
            seen[self.component(c, i)] = true;
        }
        (0..seen.len()).filter(|&k| seen[k]).map(|k| self.factor_elems[i][k]).collect()
    }
}

#[derive(Clone, Debug)]
pub struct GoursatResult {
    pub g1: MatrixGroup,
    pub g2: MatrixGroup,
    pub n1: MatrixGroup,
    pub n2: MatrixGroup,
    /// Least coset representatives: x N_1 -> y N_2.
    pub quotient_iso: Vec<(M2, M2)>,
    /// The isomorphism G_1 -> G_2 itself when N_1 = N_2 = 1.
    pub iso: Option<Vec<(M2, M2)>>,
}

fn coset_rep(o: &Ops, n: &MatrixGroup, x: &M2) -> M2 {
    n.elements.iter().map(|k| mx::mul(o, x, k)).min().expect("nonempty")
}

impl GoursatResult {
    /// The subgroup {(x, y) : alpha(x N_1) = y N_2}, as sorted pairs.
    pub fn regenerate(&self) -> Vec<(M2, M2)> {
        let o = self.g1.ops();
        let map: HashMap<M2, M2> = self.quotient_iso.iter().copied().collect();
        let mut out = Vec::new();
        for x in &self.g1.elements {
            let target = map[&coset_rep(&o, &self.n1, x)];
            for y in &self.g2.elements {
                if coset_rep(&o, &self.n2, y) == target {
                    out.push((*x, *y));
                }
            }
        }
        out.sort_unstable();
        out
    }
}

pub fn goursat(g: &ProductSubgroup) -> Result<GoursatResult> {
    if g.factors.len() != 2 {
        return Err(IflError::BadInput("goursat needs exactly two factors".into()));
    }
    let ring = &g.factors[0].ring;
    let o = ring.ops()?;
    let id = mx::identity(&o);
    let pairs: Vec<(M2, M2)> = g.tuples().into_iter().map(|t| (t[0], t[1])).collect();
    let sub = |elems: Vec<M2>| MatrixGroup::from_elements(ring, Vec::new(), elems);
    let g1 = sub(g.projection(0));
    let g2 = sub(g.projection(1));
    let n1 = sub(pairs.iter().filter(|p| p.1 == id).map(|p| p.0).collect());
    let n2 = sub(pairs.iter().filter(|p| p.0 == id).map(|p| p.1).collect());
    let mut q = BTreeMap::new();
    for (x, y) in &pairs {
        q.insert(coset_rep(&o, &n1, x), coset_rep(&o, &n2, y));
    }
    let quotient_iso: Vec<(M2, M2)> = q.into_iter().collect();
    let iso = (n1.order() == 1 && n2.order() == 1).then(|| quotient_iso.clone());
    Ok(GoursatResult { g1, g2, n1, n2, quotient_iso, iso })
}

#[derive(Clone, Debug, Serialize)]
pub struct PairwiseReport {
    pub surrogate: String,
    pub factors_perfect: Vec<bool>,
    pub pairs_surjective: bool,
    /// First pair (i, j) onto which the group does not surject.
    pub witness_pair: Option<(usize, usize)>,
    pub hypothesis_holds: bool,
    pub group_order: usize,
    pub product_order: u128,
    /// G equals the full product, decided by counting; None when the hypothesis fails.
    pub conclusion: Option<bool>,
}

/// Surrogate for openness: surjectivity onto every S_i x S_j, with every factor perfect.
pub fn pairwise_implies_product(g: &ProductSubgroup, cap: usize) -> Result<PairwiseReport> {
    let t = g.factors.len();
    if t < 3 {
        return Err(IflError::BadInput("pairwise criterion needs at least three factors".into()));
    }
    let factors_perfect = g
        .factors
        .iter()
        .map(|s| Ok(commutator_subgroup(s, s, cap)?.order() == s.order()))
        .collect::<Result<Vec<_>>>()?;
    let mut witness_pair = None;
    'outer: for i in 0..t {
        for j in i + 1..t {
            if g.pair_image_size(i, j) != g.factors[i].order() * g.factors[j].order() {
                witness_pair = Some((i, j));
                break 'outer;
            }
        }
    }
    let pairs_surjective = witness_pair.is_none();
    let hypothesis_holds = pairs_surjective && factors_perfect.iter().all(|&b| b);
    let product_order = g.product_order();
    Ok(PairwiseReport {
        surrogate: "open = surjective onto each pair of factors; commutator condition = each factor perfect".into(),
        factors_perfect,
        pairs_surjective,
        witness_pair,
        hypothesis_holds,
        group_order: g.order(),
        product_order,
        conclusion: hypothesis_holds.then_some(g.order() as u128 == product_order),
    })
}

/// Adds uniformly random tuples as generators until the subgroup surjects onto every pair.
pub fn random_pairwise_surjective<R: rand::Rng>(
    factors: Vec<MatrixGroup>,
    rng: &mut R,
    cap: usize,
) -> Result<(ProductSubgroup, Vec<Vec<M2>>)> {
    let t = factors.len();
    let mut gens: Vec<Vec<M2>> = Vec::new();
    loop {
        gens.push(factors.iter().map(|f| f.elements[rng.gen_range(0..f.order())]).collect());
        let g = ProductSubgroup::generated(factors.clone(), &gens, cap)?;
        let ok = (0..t).all(|i| {
            (i + 1..t).all(|j| g.pair_image_size(i, j) == factors[i].order() * factors[j].order())
        });
        if ok {
            return Ok((g, gens));
        }
        if gens.len() > 64 {
            return Err(IflError::NotFound("no pairwise-surjective subgroup after 64 generators".into()));
        }
    }
}

/// alpha(x) = eta(x) y^-1 sigma(x) y.
#[derive(Clone, Debug)]
pub struct Merzljakov {
    pub eta: BTreeMap<M2, u32>,
    pub y: M2,
    pub sigma: RingMorphism,
}

pub fn sigma_table(o: &Ops, sigma: &RingMorphism) -> Vec<u32> {
    o.all().map(|i| o.id(&sigma.apply(o.elem(i)))).collect()
}

pub fn apply_entrywise(table: &[u32], x: &M2) -> M2 {
    [table[x[0] as usize], table[x[1] as usize], table[x[2] as usize], table[x[3] as usize]]
}

pub fn merzljakov_verify(
    ring: &Arc<Ring>,
    iso: &[(M2, M2)],
    eta: &BTreeMap<M2, u32>,
    y: &M2,
    sigma: &RingMorphism,
) -> Result<bool> {
    let o = ring.ops()?;
    let Some(yi) = mx::inv(&o, y) else { return Ok(false) };
    let st = sigma_table(&o, sigma);
    Ok(iso.iter().all(|(x, ax)| {
        eta.get(x).is_some_and(|&e| *ax == mx::scale(&o, e, &mx::conj(&o, &yi, &apply_entrywise(&st, x), y)))
    }))
}

pub const MERZLJAKOV_MAX_AUTOMORPHISMS: usize = 16;
pub const MERZLJAKOV_MAX_TRANSVERSAL: usize = 100_000;

/// GL_2 modulo scalars, identity class first, then id-lexicographic.
pub fn gl2_transversal(o: &Ops, cap: usize) -> Result<Vec<M2>> {
    let q = o.size() as u128;
    if q.pow(4) > 20_000_000 {
        return Err(too_large("GL_2 transversal search", q.pow(4), 20_000_000));
    }
    let units: Vec<u32> = o.all().filter(|&u| o.is_unit(u)).collect();
    let mut seen: HashSet<M2> = HashSet::new();
    let mut out = Vec::new();
    let mut push = |m: M2, out: &mut Vec<M2>| -> Result<()> {
        if seen.contains(&m) {
            return Ok(());
        }
        for &u in &units {
            seen.insert(mx::scale(o, u, &m));
        }
        out.push(m);
        if out.len() > cap {
            return Err(too_large("GL_2 transversal", out.len() as u128, cap as u128));
        }
        Ok(())
    };
    push(mx::identity(o), &mut out)?;
    let n = o.size() as u32;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let m = [a, b, c, d];
                    if o.is_unit(mx::det(o, &m)) {
                        push(m, &mut out)?;
                    }
                }
            }
        }
    }
    Ok(out)
}

pub fn merzljakov_search(ring: &Arc<Ring>, iso: &[(M2, M2)], cap: u128) -> Result<Merzljakov> {
    let o = ring.ops()?;
    let autos = ring_automorphisms(ring, cap)?;
    if autos.len() > MERZLJAKOV_MAX_AUTOMORPHISMS {
        return Err(too_large(
            "ring automorphisms",
            autos.len() as u128,
            MERZLJAKOV_MAX_AUTOMORPHISMS as u128,
        ));
    }
    let transversal = gl2_transversal(&o, MERZLJAKOV_MAX_TRANSVERSAL)?;
    let domain: HashSet<M2> = iso.iter().map(|p| p.0).collect();
    for sigma in &autos {
        let st = sigma_table(&o, sigma);
        let images: Vec<M2> = iso.iter().map(|(x, _)| apply_entrywise(&st, x)).collect();
        for y in &transversal {
            let yi = mx::inv(&o, y).expect("invertible");
            let mut eta = BTreeMap::new();
            let ok = iso.iter().zip(&images).all(|((x, ax), sx)| {
                let w = mx::conj(&o, &yi, sx, y);
                let wi = mx::inv(&o, &w).expect("invertible");
                let q = mx::mul(&o, ax, &wi);
                let z = o.zero();
                if q[1] == z && q[2] == z && q[0] == q[3] {
                    eta.insert(*x, q[0]);
                    true
                } else {
                    false
                }
            });
            if !ok {
                continue;
            }
            let hom = iso.iter().all(|(x, _)| {
                iso.iter().all(|(x2, _)| {
                    let p = mx::mul(&o, x, x2);
                    !domain.contains(&p) || eta[&p] == o.mul(eta[x], eta[x2])
                })
            });
            if hom {
                return Ok(Merzljakov { eta, y: *y, sigma: sigma.clone() });
            }
        }
    }
    Err(IflError::NotFound("no (eta, y, sigma) reproduces the isomorphism".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideals::maximal_ideal;
    use crate::pink::{gamma, group_from_strings, sl2_elements, DEFAULT_CAP};
    use rand::SeedableRng;

    fn sl2_f3() -> MatrixGroup {
        sl2_elements(&Ring::finite_field(3, 1).unwrap(), DEFAULT_CAP).unwrap()
    }

    #[test]
    fn goursat_identity_graph() {
        let s = sl2_f3();
        let g = ProductSubgroup::graph(&s, &s, |x| *x, 1 << 20).unwrap();
        assert!(g.is_closed());
        let r = goursat(&g).unwrap();
        assert_eq!((r.n1.order(), r.n2.order()), (1, 1));
        let iso = r.iso.clone().unwrap();
        assert!(iso.iter().all(|(x, y)| x == y));
        let mut pairs: Vec<(M2, M2)> = g.tuples().into_iter().map(|t| (t[0], t[1])).collect();
        pairs.sort_unstable();
        assert_eq!(r.regenerate(), pairs);
    }

    #[test]
    fn goursat_full_product() {
        let s = sl2_f3();
        let g = ProductSubgroup::full(vec![s.clone(), s.clone()], DEFAULT_CAP).unwrap();
        let r = goursat(&g).unwrap();
        assert_eq!((r.n1.order(), r.n2.order()), (24, 24));
        assert_eq!(r.quotient_iso.len(), 1);
        assert!(r.iso.is_none());
        assert_eq!(r.regenerate().len(), 576);
    }

    #[test]
    fn goursat_with_automorphism() {
        let r = Ring::trunc_iwasawa(3, 1, 2).unwrap();
        let o = r.ops().unwrap();
        let g1 = gamma(&maximal_ideal(&r), DEFAULT_CAP).unwrap();
        let autos = ring_automorphisms(&r, 1 << 20).unwrap();
        assert_eq!(autos.len(), 2);
        let sigma = autos.iter().find(|m| !m.is_identity()).unwrap();
        assert_eq!(sigma.t_image, r.parse("2*T").unwrap());
        let st = sigma_table(&o, sigma);
        let g = ProductSubgroup::graph(&g1, &g1, |x| apply_entrywise(&st, x), 1 << 20).unwrap();
        let res = goursat(&g).unwrap();
        let iso = res.iso.unwrap();
        assert!(iso.iter().all(|(x, y)| *y == apply_entrywise(&st, x)));
        let m = merzljakov_search(&r, &iso, 1 << 20).unwrap();
        assert!(merzljakov_verify(&r, &iso, &m.eta, &m.y, &m.sigma).unwrap());
    }

    #[test]
    fn merzljakov_conjugation_and_character() {
        let f3 = Ring::finite_field(3, 1).unwrap();
        let o = f3.ops().unwrap();
        let s = sl2_f3();
        let y0 = mx::parse(&o, "1,1;0,1").unwrap();
        let y0i = mx::inv(&o, &y0).unwrap();
        let iso: Vec<(M2, M2)> = s.elements.iter().map(|x| (*x, mx::conj(&o, &y0i, x, &y0))).collect();
        let ones: BTreeMap<M2, u32> = s.elements.iter().map(|x| (*x, o.one())).collect();
        let id = RingMorphism::identity(&f3);
        assert!(merzljakov_verify(&f3, &iso, &ones, &y0, &id).unwrap());
        let q8 = group_from_strings(&f3, &["0,1;2,0", "1,1;1,2"], DEFAULT_CAP).unwrap();
        assert_eq!(q8.order(), 8);
        let i = mx::parse(&o, "0,1;2,0").unwrap();
        let ig = enumerate_cyclic(&o, &i);
        let minus = o.from_int(-1);
        let iso: Vec<(M2, M2)> = q8
            .elements
            .iter()
            .map(|x| (*x, if ig.contains(x) { *x } else { mx::scale(&o, minus, x) }))
            .collect();
        let m = merzljakov_search(&f3, &iso, 1 << 20).unwrap();
        assert_eq!(m.y, mx::identity(&o));
        assert!(m.sigma.is_identity());
        assert!(q8.elements.iter().all(|x| m.eta[x] == if ig.contains(x) { o.one() } else { minus }));
    }

    fn enumerate_cyclic(o: &Ops, x: &M2) -> Vec<M2> {
        let mut out = vec![mx::identity(o)];
        let mut y = *x;
        while y != out[0] {
            out.push(y);
            y = mx::mul(o, &y, x);
        }
        out
    }

    #[test]
    fn pairwise_criterion() {
        let f5 = Ring::finite_field(5, 1).unwrap();
        let s = sl2_elements(&f5, DEFAULT_CAP).unwrap();
        assert_eq!(s.order(), 120);
        let o = f5.ops().unwrap();
        let gens = crate::pink::sl2_generators(&f5).unwrap();
        let diag: Vec<Vec<M2>> = gens.iter().map(|g| vec![*g, *g, *g]).collect();
        let g = ProductSubgroup::generated(vec![s.clone(), s.clone(), s.clone()], &diag, DEFAULT_CAP).unwrap();
        let rep = pairwise_implies_product(&g, DEFAULT_CAP).unwrap();
        assert!(!rep.hypothesis_holds);
        assert_eq!(rep.witness_pair, Some((0, 1)));
        assert_eq!(rep.conclusion, None);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let (g, _) = random_pairwise_surjective(vec![s.clone(), s.clone(), s.clone()], &mut rng, DEFAULT_CAP).unwrap();
        let rep = pairwise_implies_product(&g, DEFAULT_CAP).unwrap();
        assert!(rep.hypothesis_holds);
        assert_eq!(rep.conclusion, Some(true));
        assert_eq!(g.order(), 120 * 120 * 120);
        let _ = o;
    }

    #[test]
    fn pairwise_full_product() {
        let f5 = Ring::finite_field(5, 1).unwrap();
        let s = sl2_elements(&f5, DEFAULT_CAP).unwrap();
        let g = ProductSubgroup::full(vec![s.clone(), s.clone(), s], DEFAULT_CAP).unwrap();
        let rep = pairwise_implies_product(&g, DEFAULT_CAP).unwrap();
        assert_eq!(rep.conclusion, Some(true));
    }
}
