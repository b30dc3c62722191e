//! Exact arithmetic in cyclotomic fields Q(zeta_n), power basis mod Phi_n.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::arith::{divisors, euler_phi, gcd, lcm};
use crate::error::{IflError, Result};

fn phi_cache() -> &'static Mutex<HashMap<u64, Arc<Vec<BigInt>>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<BigInt>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Exact division of integer polynomials (little-endian) by a monic divisor.
fn div_monic(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let mut q = vec![BigInt::zero(); a.len() - db];
    for i in (0..q.len()).rev() {
        let c = r[i + db].clone();
        if c.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            r[i + j] -= &c * bj;
        }
        q[i] = c;
    }
    q
}

/// Phi_n with integer coefficients, little-endian.
pub fn cyclotomic_poly(n: u64) -> Arc<Vec<BigInt>> {
    if let Some(p) = phi_cache().lock().expect("cache").get(&n) {
        return p.clone();
    }
    let mut num = vec![BigInt::zero(); n as usize + 1];
    num[0] = -BigInt::one();
    num[n as usize] = BigInt::one();
    for d in divisors(n) {
        if d < n {
            num = div_monic(&num, &cyclotomic_poly(d));
        }
    }
    let out = Arc::new(num);
    phi_cache().lock().expect("cache").insert(n, out.clone());
    out
}

/// sum c_i zeta_n^i, i < phi(n).
#[derive(Clone, Debug)]
pub struct Cyc {
    pub n: u64,
    pub c: Vec<BigRational>,
}

fn reduce(n: u64, mut v: Vec<BigRational>) -> Vec<BigRational> {
    let phi = cyclotomic_poly(n);
    let d = phi.len() - 1;
    for i in (d..v.len()).rev() {
        let c = v[i].clone();
        if c.is_zero() {
            continue;
        }
        for (j, pj) in phi.iter().enumerate() {
            v[i - d + j] -= &c * BigRational::from_integer(pj.clone());
        }
    }
    v.truncate(d);
    v.resize(d, BigRational::zero());
    v
}

impl Cyc {
    /// sum_i v[i] zeta_n^i for an arbitrary-length coefficient list.
    pub fn from_powers(n: u64, v: Vec<BigRational>) -> Self {
        if n == 1 {
            return Cyc::rational(v.into_iter().fold(BigRational::zero(), |a, b| a + b));
        }
        let mut w = vec![BigRational::zero(); n as usize];
        for (i, x) in v.into_iter().enumerate() {
            w[i % n as usize] += x;
        }
        Cyc { n, c: reduce(n, w) }.normalized()
    }

    pub fn rational(q: BigRational) -> Self {
        Cyc { n: 1, c: vec![q] }
    }

    pub fn from_int(k: i64) -> Self {
        Self::rational(BigRational::from_integer(k.into()))
    }

    pub fn from_bigint(k: BigInt) -> Self {
        Self::rational(BigRational::from_integer(k))
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// zeta_n^k.
    pub fn zeta_pow(n: u64, k: i64) -> Self {
        let e = k.rem_euclid(n as i64) as u64;
        let g = gcd(e, n);
        let (n2, e2) = (n / g, e / g);
        if n2 <= 2 {
            return Self::from_int(if n2 == 2 { -1 } else { 1 });
        }
        let mut v = vec![BigRational::zero(); n2 as usize];
        v[e2 as usize] = BigRational::one();
        Cyc { n: n2, c: reduce(n2, v) }.normalized()
    }

    /// Rational values collapse to the field Q.
    fn normalized(mut self) -> Self {
        if self.n > 1 && self.c.iter().skip(1).all(Zero::is_zero) {
            self.c.truncate(1);
            self.n = 1;
        }
        if self.n == 2 {
            self.n = 1;
        }
        self
    }

    /// The same element written in Q(zeta_m), n | m.
    pub fn lift(&self, m: u64) -> Cyc {
        if m == self.n {
            return self.clone();
        }
        assert!(m.is_multiple_of(self.n), "lift to a non-multiple");
        let step = (m / self.n) as usize;
        let mut v = vec![BigRational::zero(); (step * self.c.len()).max(1)];
        for (i, ci) in self.c.iter().enumerate() {
            v[i * step] += ci;
        }
        Cyc { n: m, c: reduce(m, v) }
    }

    fn common(&self, o: &Cyc) -> (Cyc, Cyc) {
        let m = lcm(self.n, o.n);
        (self.lift(m), o.lift(m))
    }

    pub fn add(&self, o: &Cyc) -> Cyc {
        let (a, b) = self.common(o);
        let c = a.c.iter().zip(&b.c).map(|(x, y)| x + y).collect();
        Cyc { n: a.n, c }.normalized()
    }

    pub fn sub(&self, o: &Cyc) -> Cyc {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Cyc {
        Cyc { n: self.n, c: self.c.iter().map(|x| -x).collect() }
    }

    pub fn mul(&self, o: &Cyc) -> Cyc {
        if self.n == 1 {
            return o.scale(&self.c[0]);
        }
        if o.n == 1 {
            return self.scale(&o.c[0]);
        }
        let (a, b) = self.common(o);
        let mut v = vec![BigRational::zero(); a.c.len() + b.c.len()];
        for (i, x) in a.c.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.c.iter().enumerate() {
                v[i + j] += x * y;
            }
        }
        Cyc { n: a.n, c: reduce(a.n, v) }.normalized()
    }

    pub fn scale(&self, q: &BigRational) -> Cyc {
        Cyc { n: self.n, c: self.c.iter().map(|x| x * q).collect() }.normalized()
    }

    pub fn pow(&self, mut e: u64) -> Cyc {
        let mut acc = Cyc::one();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Zero::is_zero)
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        (self.n == 1).then(|| &self.c[0])
    }

    /// The Galois automorphism zeta -> zeta^a, gcd(a, n) = 1.
    pub fn galois(&self, a: i64) -> Cyc {
        if self.n == 1 {
            return self.clone();
        }
        let mut acc = Cyc::zero();
        for (i, ci) in self.c.iter().enumerate() {
            if !ci.is_zero() {
                acc = acc.add(&Cyc::zeta_pow(self.n, a * i as i64).scale(ci));
            }
        }
        acc
    }

    pub fn conj(&self) -> Cyc {
        self.galois(-1)
    }

    /// Product of all Galois conjugates.
    pub fn norm(&self) -> BigRational {
        if self.n == 1 {
            return self.c[0].clone();
        }
        let mut acc = Cyc::one();
        for a in (1..self.n).filter(|&a| gcd(a, self.n) == 1) {
            acc = acc.mul(&self.galois(a as i64));
        }
        acc.as_rational().cloned().expect("norm is rational")
    }

    /// Inverse by solving the multiplication-matrix system over Q.
    pub fn inv(&self) -> Result<Cyc> {
        if self.is_zero() {
            return Err(IflError::NonUnit("0".into()));
        }
        if self.n == 1 {
            return Ok(Cyc::rational(self.c[0].recip()));
        }
        let d = self.c.len();
        // columns: self * zeta^j
        let cols: Vec<Vec<BigRational>> = (0..d)
            .map(|j| self.mul(&Cyc::zeta_pow(self.n, j as i64)).lift(self.n).c)
            .collect();
        let mut a: Vec<Vec<BigRational>> = (0..d)
            .map(|i| {
                let mut r: Vec<BigRational> = (0..d).map(|j| cols[j][i].clone()).collect();
                r.push(if i == 0 { BigRational::one() } else { BigRational::zero() });
                r
            })
            .collect();
        for c in 0..d {
            let pr = (c..d).find(|&r| !a[r][c].is_zero()).expect("nonzero element is invertible");
            a.swap(c, pr);
            let iv = a[c][c].recip();
            for x in a[c].iter_mut() {
                *x *= &iv;
            }
            for r in 0..d {
                if r != c && !a[r][c].is_zero() {
                    let f = a[r][c].clone();
                    for k in 0..=d {
                        let t = &f * &a[c][k];
                        a[r][k] -= t;
                    }
                }
            }
        }
        Ok(Cyc { n: self.n, c: a.into_iter().map(|r| r[d].clone()).collect() }.normalized())
    }

    pub fn div(&self, o: &Cyc) -> Result<Cyc> {
        Ok(self.mul(&o.inv()?))
    }

    /// Parse an integer, `a/b`, or a polynomial in `z` = zeta_n.
    pub fn parse(s: &str, n: u64) -> Result<Cyc> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(IflError::Parse("empty coefficient".into()));
        }
        let mut acc = Cyc::zero();
        let mut terms = Vec::new();
        let mut cur = String::new();
        for (i, ch) in s.chars().enumerate() {
            if (ch == '+' || ch == '-') && i > 0 && !cur.ends_with('^') {
                terms.push(std::mem::take(&mut cur));
            }
            cur.push(ch);
        }
        terms.push(cur);
        for t in terms {
            let (sign, body) = match t.strip_prefix('-') {
                Some(r) => (-1, r),
                None => (1, t.strip_prefix('+').unwrap_or(&t)),
            };
            let (coef, zpart) = match body.find('z') {
                None => (body, None),
                Some(k) => {
                    let c = body[..k].trim_end_matches('*');
                    (if c.is_empty() { "1" } else { c }, Some(&body[k + 1..]))
                }
            };
            let q: BigRational = coef
                .parse()
                .map_err(|_| IflError::Parse(format!("bad coefficient '{coef}' in '{s}'")))?;
            // "z", "z^k", "zm" or "zm^k" with m | n naming zeta_m = zeta_n^(n/m)
            let (order, e): (u64, i64) = match zpart {
                None => (n, 0),
                Some(r) => {
                    let digits: String = r.chars().take_while(|c| c.is_ascii_digit()).collect();
                    let m = if digits.is_empty() { n } else { digits.parse().unwrap_or(0) };
                    if m == 0 || !n.is_multiple_of(m) {
                        return Err(IflError::Parse(format!("zeta_{digits} is not in Q(zeta_{n}) in '{s}'")));
                    }
                    let rest = &r[digits.len()..];
                    let e = if rest.is_empty() {
                        1
                    } else {
                        rest.strip_prefix('^')
                            .and_then(|x| x.parse().ok())
                            .ok_or_else(|| IflError::Parse(format!("bad power of z in '{s}'")))?
                    };
                    (m, e)
                }
            };
            let term = if e == 0 { Cyc::one() } else { Cyc::zeta_pow(order, e) };
            acc = acc.add(&term.scale(&(q * BigRational::from_integer(sign.into()))));
        }
        Ok(acc)
    }

    pub fn degree(&self) -> u64 {
        euler_phi(self.n)
    }
}

impl PartialEq for Cyc {
    fn eq(&self, o: &Cyc) -> bool {
        if self.n == o.n {
            return self.c == o.c;
        }
        let (a, b) = self.common(o);
        a.c == b.c
    }
}

impl Eq for Cyc {}

impl fmt::Display for Cyc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.n == 1 {
            return write!(f, "{}", self.c[0]);
        }
        let mut first = true;
        for (i, ci) in self.c.iter().enumerate() {
            if ci.is_zero() {
                continue;
            }
            let mag = ci.abs();
            let sign = if ci.is_negative() { "-" } else if first { "" } else { "+" };
            let z = match i {
                0 => String::new(),
                1 => format!("z{}", self.n),
                _ => format!("z{}^{i}", self.n),
            };
            if i == 0 {
                write!(f, "{sign}{mag}")?;
            } else if mag.is_one() {
                write!(f, "{sign}{z}")?;
            } else {
                write!(f, "{sign}{mag}*{z}")?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_polys() {
        let as_i64 = |n| cyclotomic_poly(n).iter().map(|c| c.try_into().unwrap()).collect::<Vec<i64>>();
        assert_eq!(as_i64(1), vec![-1, 1]);
        assert_eq!(as_i64(4), vec![1, 0, 1]);
        assert_eq!(as_i64(12), vec![1, 0, -1, 0, 1]);
        assert_eq!(as_i64(9), vec![1, 0, 0, 1, 0, 0, 1]);
    }

    #[test]
    fn arithmetic() {
        let z3 = Cyc::zeta_pow(3, 1);
        assert_eq!(z3.pow(3), Cyc::one());
        let s = z3.sub(&z3.pow(2));
        assert_eq!(s.mul(&s), Cyc::from_int(-3));
        let i = Cyc::zeta_pow(4, 1);
        assert_eq!(i.mul(&i), Cyc::from_int(-1));
        assert_eq!(i.lift(12).pow(2), Cyc::from_int(-1));
        assert_eq!(z3.add(&i).conj(), z3.conj().add(&i.conj()));
        let x = Cyc::parse("1+2*z-1/3*z^3", 12).unwrap();
        assert_eq!(x.mul(&x.inv().unwrap()), Cyc::one());
        assert_eq!(Cyc::zeta_pow(12, 5).norm(), BigRational::one());
        assert_eq!(Cyc::parse("-7/2", 1).unwrap().to_string(), "-7/2");
        assert_eq!(Cyc::zeta_pow(6, 3), Cyc::from_int(-1));
    }
}
