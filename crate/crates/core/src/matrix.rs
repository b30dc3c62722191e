//! 2x2 matrices over an enumerated ring (entries are element ids) and small
//! dense linear algebra over a finite field.

use crate::rings::Ops;

/// Row-major [a, b, c, d].
pub type M2 = [u32; 4];

pub fn identity(o: &Ops) -> M2 {
    let (z, e) = (o.zero(), o.one());
    [e, z, z, e]
}

pub fn zero(o: &Ops) -> M2 {
    let z = o.zero();
    [z, z, z, z]
}

pub fn scalar(o: &Ops, c: u32) -> M2 {
    let z = o.zero();
    [c, z, z, c]
}

pub fn mul(o: &Ops, x: &M2, y: &M2) -> M2 {
    [
        o.add(o.mul(x[0], y[0]), o.mul(x[1], y[2])),
        o.add(o.mul(x[0], y[1]), o.mul(x[1], y[3])),
        o.add(o.mul(x[2], y[0]), o.mul(x[3], y[2])),
        o.add(o.mul(x[2], y[1]), o.mul(x[3], y[3])),
    ]
}

pub fn add(o: &Ops, x: &M2, y: &M2) -> M2 {
    [o.add(x[0], y[0]), o.add(x[1], y[1]), o.add(x[2], y[2]), o.add(x[3], y[3])]
}

pub fn sub(o: &Ops, x: &M2, y: &M2) -> M2 {
    [o.sub(x[0], y[0]), o.sub(x[1], y[1]), o.sub(x[2], y[2]), o.sub(x[3], y[3])]
}

pub fn scale(o: &Ops, c: u32, x: &M2) -> M2 {
    [o.mul(c, x[0]), o.mul(c, x[1]), o.mul(c, x[2]), o.mul(c, x[3])]
}

pub fn det(o: &Ops, x: &M2) -> u32 {
    o.sub(o.mul(x[0], x[3]), o.mul(x[1], x[2]))
}

pub fn trace(o: &Ops, x: &M2) -> u32 {
    o.add(x[0], x[3])
}

pub fn inv(o: &Ops, x: &M2) -> Option<M2> {
    let di = o.inv(det(o, x))?;
    Some([
        o.mul(di, x[3]),
        o.mul(di, o.neg(x[1])),
        o.mul(di, o.neg(x[2])),
        o.mul(di, x[0]),
    ])
}

/// Inverse of a determinant-one matrix (the adjugate).
pub fn inv_sl(o: &Ops, x: &M2) -> M2 {
    [x[3], o.neg(x[1]), o.neg(x[2]), x[0]]
}

pub fn conj(o: &Ops, g: &M2, x: &M2, g_inv: &M2) -> M2 {
    mul(o, &mul(o, g, x), g_inv)
}

pub fn commutator(o: &Ops, g: &M2, h: &M2) -> M2 {
    let gi = inv(o, g).expect("invertible");
    let hi = inv(o, h).expect("invertible");
    mul(o, &mul(o, g, h), &mul(o, &gi, &hi))
}

pub fn bracket(o: &Ops, x: &M2, y: &M2) -> M2 {
    sub(o, &mul(o, x, y), &mul(o, y, x))
}

pub fn pow(o: &Ops, x: &M2, mut e: u64) -> M2 {
    let mut acc = identity(o);
    let mut base = *x;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(o, &acc, &base);
        }
        base = mul(o, &base, &base);
        e >>= 1;
    }
    acc
}

/// Entry coefficient vectors concatenated: length 4n.
pub fn to_vec(o: &Ops, x: &M2) -> Vec<u64> {
    let mut v = Vec::with_capacity(4 * o.ring.n());
    for &e in x {
        v.extend_from_slice(o.elem(e));
    }
    v
}

pub fn from_vec(o: &Ops, v: &[u64]) -> M2 {
    let n = o.ring.n();
    [
        o.id(&v[..n]),
        o.id(&v[n..2 * n]),
        o.id(&v[2 * n..3 * n]),
        o.id(&v[3 * n..]),
    ]
}

pub fn format(o: &Ops, x: &M2) -> String {
    let f = |i: u32| o.ring.format(o.elem(i));
    format!("{},{};{},{}", f(x[0]), f(x[1]), f(x[2]), f(x[3]))
}

/// Parse `a,b;c,d` with polynomial entries.
pub fn parse(o: &Ops, s: &str) -> crate::Result<M2> {
    let rows: Vec<&str> = s.split(';').collect();
    if rows.len() != 2 {
        return Err(crate::IflError::Parse(format!("matrix '{s}' needs two rows")));
    }
    let mut out = [0u32; 4];
    for (i, r) in rows.iter().enumerate() {
        let cols: Vec<&str> = r.split(',').collect();
        if cols.len() != 2 {
            return Err(crate::IflError::Parse(format!("matrix row '{r}' needs two entries")));
        }
        for (j, c) in cols.iter().enumerate() {
            out[2 * i + j] = o.id(&o.ring.parse(c.trim())?);
        }
    }
    Ok(out)
}

/// Gaussian elimination over a finite field given by an id-level ring.
pub mod field {
    use crate::rings::Ops;

    /// Reduced row echelon form in place; returns pivot columns.
    pub fn rref(o: &Ops, m: &mut Vec<Vec<u32>>) -> Vec<usize> {
        let rows = m.len();
        let cols = if rows == 0 { 0 } else { m[0].len() };
        let zero = o.zero();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(pr) = (r..rows).find(|&i| m[i][c] != zero) else { continue };
            m.swap(r, pr);
            let inv = o.inv(m[r][c]).expect("field element");
            for x in m[r].iter_mut() {
                *x = o.mul(inv, *x);
            }
            for i in 0..rows {
                if i != r && m[i][c] != zero {
                    let f = m[i][c];
                    for j in 0..cols {
                        let t = o.mul(f, m[r][j]);
                        m[i][j] = o.sub(m[i][j], t);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        m.truncate(r);
        pivots
    }

    /// Basis of the right kernel {x : M x = 0}.
    pub fn kernel(o: &Ops, m: &[Vec<u32>], cols: usize) -> Vec<Vec<u32>> {
        let mut a: Vec<Vec<u32>> = m.to_vec();
        let pivots = rref(o, &mut a);
        let zero = o.zero();
        let one = o.one();
        let mut basis = Vec::new();
        for free in (0..cols).filter(|c| !pivots.contains(c)) {
            let mut v = vec![zero; cols];
            v[free] = one;
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = o.neg(a[row][free]);
            }
            basis.push(v);
        }
        basis
    }

    pub fn rank(o: &Ops, m: &[Vec<u32>]) -> usize {
        let mut a = m.to_vec();
        rref(o, &mut a).len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rings::Ring;

    #[test]
    fn inverse_and_commutator() {
        let r = Ring::trunc_iwasawa(3, 1, 2).unwrap();
        let o = r.ops().unwrap();
        let x = parse(&o, "1+T,1;0,1+2*T").unwrap();
        assert_eq!(det(&o, &x), o.one());
        let xi = inv(&o, &x).unwrap();
        assert_eq!(mul(&o, &x, &xi), identity(&o));
        assert_eq!(inv_sl(&o, &x), xi);
        let y = parse(&o, "1,0;T,1").unwrap();
        let c = commutator(&o, &x, &y);
        assert_eq!(det(&o, &c), o.one());
        assert_eq!(format(&o, &identity(&o)), "1,0;0,1");
    }

    #[test]
    fn kernel_over_f7() {
        let r = Ring::finite_field(7, 1).unwrap();
        let o = r.ops().unwrap();
        let m = vec![vec![o.from_int(1), o.from_int(2), o.from_int(3)]];
        let k = field::kernel(&o, &m, 3);
        assert_eq!(k.len(), 2);
        for v in k {
            let s = (0..3).fold(o.zero(), |acc, i| o.add(acc, o.mul(m[0][i], v[i])));
            assert_eq!(s, o.zero());
        }
    }
}
