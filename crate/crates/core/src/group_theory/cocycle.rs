//! Splitting 2-cocycles of a group of order prime to p with values in A^x.

use std::sync::Arc;

use super::{Cocycle2, FiniteGroup};
use crate::arith::{gcd, inv_mod};
use crate::error::{too_large, IflError, Result};
use crate::rings::{Ops, Ring, RingMorphism};

const SEARCH_CAP: u128 = 10_000_000;

/// Action tables act[g][x] = id of g(x); empty morphism list means trivial action.
pub fn action_tables(o: &Ops, group: &FiniteGroup, action: &[RingMorphism]) -> Result<Vec<Vec<u32>>> {
    if action.is_empty() {
        return Ok(Vec::new());
    }
    if action.len() != group.order() {
        return Err(IflError::BadInput("one ring automorphism per group element is required".into()));
    }
    Ok(action.iter().map(|m| o.all().map(|x| o.id(&m.apply(o.elem(x)))).collect()).collect())
}

/// (d zeta)(s, t) = zeta(s) s(zeta(t)) zeta(st)^-1.
pub fn coboundary(o: &Ops, group: &FiniteGroup, act: &[Vec<u32>], zeta: &[u32]) -> Vec<Vec<u32>> {
    let n = group.order();
    let a = |g: usize, v: u32| if act.is_empty() { v } else { act[g][v as usize] };
    (0..n)
        .map(|s| {
            (0..n)
                .map(|t| o.mul(o.mul(zeta[s], a(s, zeta[t])), o.inv(zeta[group.mul(s, t)]).expect("unit")))
                .collect()
        })
        .collect()
}

/// zeta with b(s, t) = zeta(st)^-1 zeta(s) s(zeta(t)): residual splitting by search over
/// Teichmuller values, then the 1 + m part as the |G|-th root of prod_t b'(s, t).
pub fn split_tsigma_cocycle(ring: &Arc<Ring>, b: &Cocycle2, action: &[RingMorphism]) -> Result<Vec<u32>> {
    let o = ring.ops()?;
    let g = &b.group;
    let n = g.order();
    if ring.p == 2 || gcd(n as u64, ring.p) != 1 {
        return Err(IflError::BadInput("need p odd and the group order prime to p".into()));
    }
    let act = action_tables(&o, g, action)?;
    if b.values.iter().flatten().any(|&v| !o.is_unit(v)) {
        return Err(IflError::BadInput("cocycle values must be units".into()));
    }
    if !b.identity_holds(&o, &act) {
        return Err(IflError::HypothesisFailed("b does not satisfy the 2-cocycle identity".into()));
    }
    let mut teich: Vec<u32> = o
        .all()
        .filter(|&u| o.is_unit(u))
        .map(|u| Ok(o.id(&ring.teichmuller(o.elem(u))?)))
        .collect::<Result<_>>()?;
    teich.sort_unstable();
    teich.dedup();
    let total = (teich.len() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if total > SEARCH_CAP {
        return Err(too_large("residual splitting search", total, SEARCH_CAP));
    }
    let residual_ok = |zeta: &[u32]| {
        let d = coboundary(&o, g, &act, zeta);
        (0..n).all(|s| {
            (0..n).all(|t| {
                let q = o.mul(b.values[s][t], o.inv(d[s][t]).expect("unit"));
                ring.in_radical(&ring.sub(o.elem(q), &ring.one()))
            })
        })
    };
    let mut idx = vec![0usize; n];
    let zeta0 = loop {
        let cand: Vec<u32> = idx.iter().map(|&i| teich[i]).collect();
        if residual_ok(&cand) {
            break cand;
        }
        let mut i = n;
        loop {
            if i == 0 {
                return Err(IflError::ResidualObstruction);
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < teich.len() {
                break;
            }
            idx[i] = 0;
        }
    };
    let d0 = coboundary(&o, g, &act, &zeta0);
    let one_plus_m = (o.all().filter(|&u| o.is_unit(u)).count() / teich.len()) as u64;
    let e = inv_mod(n as u64 % one_plus_m.max(1), one_plus_m.max(1)).unwrap_or(0);
    let zeta: Vec<u32> = (0..n)
        .map(|s| {
            let f = (0..n).fold(o.one(), |acc, t| o.mul(acc, o.mul(b.values[s][t], o.inv(d0[s][t]).expect("unit"))));
            let root = if one_plus_m == 1 { o.one() } else { o.id(&ring.pow(o.elem(f), e)) };
            o.mul(zeta0[s], root)
        })
        .collect();
    if coboundary(&o, g, &act, &zeta) != b.values {
        return Err(IflError::HypothesisFailed("lifted splitting does not reproduce b".into()));
    }
    Ok(zeta)
}
