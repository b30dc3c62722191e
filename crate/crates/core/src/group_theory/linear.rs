//! Linear algebra over finite fields and local rings: Galois descent of
//! conjugators, commutants of 2-dimensional images, Teichmuller limits,
//! twisted Frobenius invariants.

use std::sync::Arc;

use serde::Serialize;

use super::GMat;
use crate::error::{too_large, IflError, Result};
use crate::matrix::{self as mx, field, M2};
use crate::rings::{Ops, Ring};

const SEARCH_CAP: u128 = 10_000_000;

/// Commutant {X : X A = A X for all A}, as a kernel basis of n^2-vectors.
fn commutant(o: &Ops, mats: &[GMat], n: usize) -> Vec<Vec<u32>> {
    let mut rows = Vec::new();
    for a in mats {
        for i in 0..n {
            for j in 0..n {
                let mut row = vec![o.zero(); n * n];
                for k in 0..n {
                    row[i * n + k] = o.add(row[i * n + k], a.at(k, j));
                    row[k * n + j] = o.sub(row[k * n + j], a.at(i, k));
                }
                rows.push(row);
            }
        }
    }
    field::kernel(o, &rows, n * n)
}

fn is_frobenius_fixed(o: &Ops, x: u32, q: u64) -> bool {
    o.id(&o.ring.pow(o.elem(x), q)) == x
}

/// z over the subfield F_{p^s} of the enumerated field with z S z^-1 = y S y^-1.
pub fn split_descent(l: &Arc<Ring>, base_degree: usize, s: &[GMat], y: &GMat) -> Result<GMat> {
    let o = l.ops()?;
    if base_degree == 0 || !l.d.is_multiple_of(base_degree) {
        return Err(IflError::BadInput(format!("F_{}^{base_degree} is not a subfield", l.p)));
    }
    let q = l.p.pow(base_degree as u32);
    let n = y.n;
    let yi = y.inv(&o).ok_or_else(|| IflError::BadInput("y is not invertible".into()))?;
    let in_base = |m: &GMat| m.e.iter().all(|&x| is_frobenius_fixed(&o, x, q));
    if !s.iter().all(|a| in_base(&y.mul(&o, a).mul(&o, &yi))) {
        return Err(IflError::NotFound("y S y^-1 is not defined over the base field".into()));
    }
    if in_base(y) {
        return Ok(y.clone());
    }
    let basis = commutant(&o, s, n);
    let k = basis.len();
    let total = (o.size() as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if total > SEARCH_CAP {
        return Err(too_large("centralizer torus search", total, SEARCH_CAP));
    }
    let mut coeffs = vec![0u32; k];
    loop {
        let mut i = k;
        loop {
            if i == 0 {
                return Err(IflError::NotFound("no conjugator over the base field".into()));
            }
            i -= 1;
            coeffs[i] += 1;
            if (coeffs[i] as usize) < o.size() {
                break;
            }
            coeffs[i] = 0;
        }
        let t = GMat {
            n,
            e: (0..n * n)
                .map(|j| (0..k).fold(o.zero(), |acc, b| o.add(acc, o.mul(coeffs[b], basis[b][j]))))
                .collect(),
        };
        if t.inv(&o).is_none() {
            continue;
        }
        let z = y.mul(&o, &t);
        if in_base(&z) {
            return Ok(z);
        }
    }
}

/// Multiplication by u on F_{p^d} = F_p[x]/(f) in the basis 1, x, ..., as a matrix over `base`.
pub fn regular_representation(ext: &Ring, base: &Ops, u: &[u64]) -> GMat {
    let d = ext.d;
    let mut e = vec![base.zero(); d * d];
    let mut basis_vec = ext.one();
    for col in 0..d {
        let img = ext.mul(u, &basis_vec);
        for row in 0..d {
            e[row * d + col] = base.from_int(img[row * ext.b] as i64);
        }
        basis_vec = ext.mul(&basis_vec, &ext.x_gen());
    }
    GMat { n: d, e }
}

#[derive(Clone, Debug, Serialize)]
pub struct CentralizerCase {
    pub case: u8,
    pub commutant_dim: usize,
    /// Case 2: z with z^-1 x' z = ((0, D), (1, 0)); case 3: diagonalizing basis (columns).
    pub z: Option<M2>,
    pub d: Option<u32>,
    /// The chosen traceless non-scalar element of the commutant.
    pub x: Option<M2>,
}

pub fn centralizer_classify(f: &Arc<Ring>, images: &[M2]) -> Result<CentralizerCase> {
    let o = f.ops()?;
    if f.p == 2 {
        return Err(IflError::BadDomain("centralizer classification needs odd characteristic".into()));
    }
    let mats: Vec<GMat> = images.iter().map(GMat::from_m2).collect();
    let basis = commutant(&o, &mats, 2);
    let dim = basis.len();
    match dim {
        1 => return Ok(CentralizerCase { case: 1, commutant_dim: 1, z: None, d: None, x: None }),
        2 => {}
        4 => return Err(IflError::HypothesisFailed("image is scalar; commutant is all of M_2".into())),
        _ => return Err(IflError::NotSemisimple(format!("commutant has dimension {dim}"))),
    }
    let raw: M2 = basis
        .iter()
        .map(|v| [v[0], v[1], v[2], v[3]])
        .find(|m| m[1] != o.zero() || m[2] != o.zero() || m[0] != m[3])
        .expect("a 2-dimensional commutant has a non-scalar element");
    let half = o.inv(o.from_int(2)).expect("odd characteristic");
    let x = mx::sub(&o, &raw, &mx::scalar(&o, o.mul(half, mx::trace(&o, &raw))));
    let d = o.neg(mx::det(&o, &x));
    if d == o.zero() {
        return Err(IflError::NotSemisimple("the commutant contains a nonzero nilpotent".into()));
    }
    let sqrt = o.all().find(|&s| o.mul(s, s) == d);
    match sqrt {
        None => {
            let e1 = [o.one(), o.zero()];
            let e2 = [o.zero(), o.one()];
            let apply = |v: [u32; 2]| [o.add(o.mul(x[0], v[0]), o.mul(x[1], v[1])), o.add(o.mul(x[2], v[0]), o.mul(x[3], v[1]))];
            let v = if x[2] != o.zero() { e1 } else { e2 };
            let w = apply(v);
            let z = [v[0], w[0], v[1], w[1]];
            Ok(CentralizerCase { case: 2, commutant_dim: 2, z: Some(z), d: Some(d), x: Some(x) })
        }
        Some(s) => {
            let eig = |lam: u32| -> [u32; 2] {
                let m = mx::sub(&o, &x, &mx::scalar(&o, lam));
                let k = field::kernel(&o, &[vec![m[0], m[1]], vec![m[2], m[3]]], 2);
                [k[0][0], k[0][1]]
            };
            let (v1, v2) = (eig(s), eig(o.neg(s)));
            let z = [v1[0], v2[0], v1[1], v2[1]];
            Ok(CentralizerCase { case: 3, commutant_dim: 2, z: Some(z), d: Some(d), x: Some(x) })
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TeichmullerLimit {
    pub limit: M2,
    pub j: M2,
    /// C = ((1, u/(zeta - zeta')), (0, 1)) with C limit C^-1 = j.
    pub conjugator: M2,
    pub iterations: usize,
}

pub fn teichmuller_matrix_limit(ring: &Arc<Ring>, x: &M2, q: u64) -> Result<TeichmullerLimit> {
    let o = ring.ops()?;
    if x[2] != o.zero() {
        return Err(IflError::NotTriangular);
    }
    if !o.is_unit(x[0]) || !o.is_unit(x[3]) {
        return Err(IflError::BadInput("diagonal entries must be units".into()));
    }
    let mut y = *x;
    let mut seen = std::collections::HashSet::new();
    let mut iterations = 0;
    loop {
        let next = mx::pow(&o, &y, q);
        if next == y {
            break;
        }
        if !seen.insert(y) {
            return Err(IflError::BadInput(format!("x -> x^{q} has no fixed point from this start")));
        }
        y = next;
        iterations += 1;
    }
    let (zeta, u, zeta2) = (y[0], y[1], y[3]);
    let one = o.one();
    if o.id(&ring.pow(o.elem(zeta), q - 1)) != one || o.id(&ring.pow(o.elem(zeta2), q - 1)) != one {
        return Err(IflError::BadInput("limit diagonal is not made of (q-1)-th roots of unity".into()));
    }
    let diff = o.sub(zeta, zeta2);
    let conjugator = if o.is_unit(diff) {
        [one, o.mul(u, o.inv(diff).expect("unit")), o.zero(), one]
    } else if x[1] == o.zero() && x[0] == x[3] {
        mx::identity(&o)
    } else {
        return Err(IflError::NotRegular("diagonal entries agree modulo the maximal ideal".into()));
    };
    let j = mx::conj(&o, &conjugator, &y, &mx::inv(&o, &conjugator).expect("unipotent"));
    debug_assert!(j[1] == o.zero() && j[2] == o.zero());
    Ok(TeichmullerLimit { limit: y, j, conjugator, iterations })
}

#[derive(Clone, Debug, Serialize)]
pub struct TwistedInvariant {
    pub witness: u32,
    pub f_witness: u32,
    /// v with alpha * sigma(v) = v.
    pub invariant: u32,
    pub order: usize,
    pub fixed_field_size: u64,
    pub invariant_count: usize,
    pub dimension_one: bool,
    pub scanned: usize,
}

/// f(x) = sum_k alpha^(1 + sigma + ... + sigma^(k-1)) sigma^k(x) for sigma = Frobenius^s.
pub fn twisted_invariants(kappa: &Arc<Ring>, alpha: &[u64], s: usize) -> Result<TwistedInvariant> {
    let o = kappa.ops()?;
    let d = kappa.d;
    if s == 0 || !d.is_multiple_of(s) {
        return Err(IflError::BadInput(format!("Frobenius^{s} does not generate a Galois group of F_p^{d}")));
    }
    let n = d / s;
    let q = kappa.p.pow(s as u32);
    let sigma = |x: u32| o.id(&kappa.pow(o.elem(x), q));
    let a = o.id(alpha);
    if !o.is_unit(a) {
        return Err(IflError::NonUnit(kappa.format(alpha)));
    }
    let mut partial = vec![o.one()];
    let mut sa = a;
    for _ in 0..n {
        let last = *partial.last().expect("nonempty");
        partial.push(o.mul(last, sa));
        sa = sigma(sa);
    }
    if partial[n] != o.one() {
        return Err(IflError::HypothesisFailed(format!(
            "the norm of alpha is {}, not 1; no nonzero invariant exists",
            kappa.format(o.elem(partial[n]))
        )));
    }
    let f = |x: u32| {
        let mut acc = o.zero();
        let mut sx = x;
        for &c in partial.iter().take(n) {
            acc = o.add(acc, o.mul(c, sx));
            sx = sigma(sx);
        }
        acc
    };
    let mut scanned = 0;
    let mut found = None;
    for x in o.all().filter(|&x| o.is_unit(x)) {
        scanned += 1;
        let fx = f(x);
        if fx != o.zero() {
            found = Some((x, fx));
            break;
        }
    }
    let (witness, v) = found.ok_or_else(|| {
        IflError::HypothesisFailed("f vanishes on all units; Artin independence violated".into())
    })?;
    if o.mul(a, sigma(v)) != v {
        return Err(IflError::HypothesisFailed("f(a) is not invariant".into()));
    }
    let invariant_count = o.all().filter(|&w| o.mul(a, sigma(w)) == w).count();
    Ok(TwistedInvariant {
        witness,
        f_witness: v,
        invariant: v,
        order: n,
        fixed_field_size: q,
        invariant_count,
        dimension_one: invariant_count as u64 == q,
        scanned,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_theory::general_linear;

    #[test]
    fn descent_over_f9() {
        let l = Ring::finite_field(3, 2).unwrap();
        let o = l.ops().unwrap();
        let gen = o.all().find(|&u| o.is_unit(u) && (1..8).all(|k| l.pow(o.elem(u), k) != l.one())).unwrap();
        let s_std = {
            let f3 = Ring::finite_field(3, 1).unwrap();
            let o3 = f3.ops().unwrap();
            let m = regular_representation(&l, &o3, o.elem(gen));
            m.map(|v| o.from_int(o3.elem(v)[0] as i64))
        };
        let y0 = GMat::parse(&o, "1,1;2,0").unwrap();
        let y0i = y0.inv(&o).unwrap();
        let s = vec![y0i.mul(&o, &s_std).mul(&o, &y0)];
        // twist y0 by a torus element not defined over F_3
        let x = o.id(&l.x_gen());
        let t = GMat::scalar(&o, 2, x);
        let t = GMat { n: 2, e: t.e.iter().zip(&s[0].e).map(|(&a, &b)| o.add(a, b)).collect() };
        assert!(t.inv(&o).is_some());
        let y = y0.mul(&o, &t);
        let z = split_descent(&l, 1, &s, &y).unwrap();
        assert!(z.e.iter().all(|&v| o.elem(v)[1] == 0));
        let zi = z.inv(&o).unwrap();
        let yi = y.inv(&o).unwrap();
        assert_eq!(z.mul(&o, &s[0]).mul(&o, &zi), y.mul(&o, &s[0]).mul(&o, &yi));
        let c = yi.mul(&o, &z);
        assert_eq!(c.mul(&o, &s[0]), s[0].mul(&o, &c));
        assert_eq!(split_descent(&l, 1, &s, &y0).unwrap(), y0);
    }

    #[test]
    fn centralizer_cases() {
        let f3 = Ring::finite_field(3, 1).unwrap();
        let o3 = f3.ops().unwrap();
        let gens = crate::pink::sl2_generators(&f3).unwrap();
        assert_eq!(centralizer_classify(&f3, &gens).unwrap().case, 1);
        let f7 = Ring::finite_field(7, 1).unwrap();
        let o7 = f7.ops().unwrap();
        let diag = mx::parse(&o7, "2,0;0,4").unwrap();
        let c = centralizer_classify(&f7, &[diag]).unwrap();
        assert_eq!(c.case, 3);
        let z = c.z.unwrap();
        let zi = mx::inv(&o7, &z).unwrap();
        let dd = mx::conj(&o7, &zi, &diag, &z);
        assert!(dd[1] == o7.zero() && dd[2] == o7.zero());
        let f9 = Ring::finite_field(3, 2).unwrap();
        let o9 = f9.ops().unwrap();
        let imgs: Vec<M2> = o9
            .all()
            .filter(|&u| o9.is_unit(u))
            .map(|u| regular_representation(&f9, &o3, o9.elem(u)).to_m2())
            .collect();
        let c = centralizer_classify(&f3, &imgs).unwrap();
        assert_eq!(c.case, 2);
        let (z, d, x) = (c.z.unwrap(), c.d.unwrap(), c.x.unwrap());
        let zi = mx::inv(&o3, &z).unwrap();
        assert_eq!(mx::conj(&o3, &zi, &x, &z), [o3.zero(), d, o3.one(), o3.zero()]);
        let unip = mx::parse(&o3, "1,1;0,1").unwrap();
        assert!(matches!(centralizer_classify(&f3, &[unip]), Err(IflError::NotSemisimple(_))));
        let _ = general_linear;
    }

    #[test]
    fn teichmuller_limits() {
        let r = Ring::zmod(3, 2).unwrap();
        let o = r.ops().unwrap();
        let id = mx::identity(&o);
        let t = teichmuller_matrix_limit(&r, &id, 3).unwrap();
        assert_eq!((t.j, t.conjugator), (id, id));
        let x = mx::parse(&o, "2,0;0,1").unwrap();
        assert_eq!(teichmuller_matrix_limit(&r, &x, 3).unwrap().j, mx::parse(&o, "8,0;0,1").unwrap());
        let x = mx::parse(&o, "2,1;0,1").unwrap();
        let t = teichmuller_matrix_limit(&r, &x, 3).unwrap();
        assert_eq!(t.j, mx::parse(&o, "8,0;0,1").unwrap());
        let xi = mx::inv(&o, &x).unwrap();
        let big = mx::pow(&o, &x, 3u64.pow(6));
        assert_eq!(mx::mul(&o, &t.limit, &big), mx::mul(&o, &big, &t.limit));
        let _ = xi;
        let lower = mx::parse(&o, "1,0;1,1").unwrap();
        assert!(matches!(teichmuller_matrix_limit(&r, &lower, 3), Err(IflError::NotTriangular)));
        let coll = mx::parse(&o, "1,1;0,4").unwrap();
        assert!(matches!(teichmuller_matrix_limit(&r, &coll, 3), Err(IflError::NotRegular(_))));
    }

    #[test]
    fn twisted_invariant_scan() {
        let f9 = Ring::finite_field(3, 2).unwrap();
        let o = f9.ops().unwrap();
        let t = twisted_invariants(&f9, &f9.one(), 2).unwrap();
        assert_eq!(t.order, 1);
        assert_eq!(t.witness, t.f_witness);
        let mut norm_one = 0;
        for a in o.all().filter(|&a| o.is_unit(a)) {
            let norm = f9.mul(o.elem(a), &f9.pow(o.elem(a), 3));
            match twisted_invariants(&f9, o.elem(a), 1) {
                Ok(t) => {
                    assert_eq!(norm, f9.one());
                    norm_one += 1;
                    assert!(t.scanned <= 8 && t.dimension_one);
                    let v = t.invariant;
                    assert_eq!(o.mul(a, o.id(&f9.pow(o.elem(v), 3))), v);
                }
                Err(IflError::HypothesisFailed(_)) => assert_ne!(norm, f9.one()),
                Err(e) => panic!("{e}"),
            }
        }
        assert_eq!(norm_one, 4);
    }
}
