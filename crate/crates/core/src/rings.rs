//! Finite coefficient rings: Z/p^a, truncated Iwasawa algebras (Z/p^a)[T]/(T^b),
//! monogenic extensions B[x]/(f) of those, finite fields F_p[x]/(f), and
//! quotients of any of these by an additive ideal lattice.
//!
//! An element is a coefficient vector over Z/p^a of length b*d, the coefficient
//! of x^j T^t sitting at index j*b + t.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num::BigInt;
use serde::Serialize;

use crate::arith::{inv_mod, is_prime, lcm, pow_mod};
use crate::error::{too_large, IflError, Result};
use crate::howell::SubLattice;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum RingKind {
    ZmodPa,
    TruncIwasawa,
    MonogenicExt,
    FiniteField,
}

/// Largest ambient coefficient space that is enumerated element by element.
pub const MAX_ENUMERABLE: u128 = 1 << 24;
const TABLE_LIMIT: usize = 1024;

pub struct Ring {
    pub kind: RingKind,
    pub p: u64,
    pub a: u32,
    pub b: usize,
    pub d: usize,
    pub modulus: u64,
    /// Monic modulus f_0 + f_1 x + ... + x^d with base-ring coefficients.
    ext: Vec<Vec<u64>>,
    pub quotient: Option<SubLattice>,
    enumeration: OnceLock<std::result::Result<Enumeration, IflError>>,
}

impl fmt::Debug for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ring({})", self.label())
    }
}

impl PartialEq for Ring {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.p == other.p
            && self.a == other.a
            && self.b == other.b
            && self.d == other.d
            && self.ext == other.ext
            && self.quotient == other.quotient
    }
}

impl Eq for Ring {}

fn check_prime(p: u64) -> Result<()> {
    if p < 3 || !is_prime(p) {
        return Err(IflError::BadInput(format!("p = {p} must be an odd prime")));
    }
    Ok(())
}

impl Ring {
    fn build(kind: RingKind, p: u64, a: u32, b: usize, ext: Vec<Vec<u64>>) -> Result<Arc<Ring>> {
        check_prime(p)?;
        if a == 0 || b == 0 {
            return Err(IflError::BadInput("precision exponents must be >= 1".into()));
        }
        let modulus = p
            .checked_pow(a)
            .filter(|&m| m < (1 << 31))
            .ok_or_else(|| IflError::BadInput(format!("p^a too large ({p}^{a})")))?;
        let d = ext.len() - 1;
        if d == 0 {
            return Err(IflError::BadInput("extension polynomial must have degree >= 1".into()));
        }
        let mut one = vec![0; b];
        one[0] = 1;
        if ext[d] != one {
            return Err(IflError::BadInput("extension polynomial must be monic".into()));
        }
        Ok(Arc::new(Ring {
            kind,
            p,
            a,
            b,
            d,
            modulus,
            ext,
            quotient: None,
            enumeration: OnceLock::new(),
        }))
    }

    fn linear_ext(b: usize) -> Vec<Vec<u64>> {
        let mut one = vec![0; b];
        one[0] = 1;
        vec![vec![0; b], one]
    }

    pub fn zmod(p: u64, a: u32) -> Result<Arc<Ring>> {
        Ring::build(RingKind::ZmodPa, p, a, 1, Ring::linear_ext(1))
    }

    pub fn trunc_iwasawa(p: u64, a: u32, b: usize) -> Result<Arc<Ring>> {
        Ring::build(RingKind::TruncIwasawa, p, a, b, Ring::linear_ext(b))
    }

    /// B[x]/(f) with B = (Z/p^a)[T]/(T^b); `ext` lists f_0..f_d as base elements.
    pub fn monogenic(p: u64, a: u32, b: usize, ext: Vec<Vec<u64>>) -> Result<Arc<Ring>> {
        let n = p.checked_pow(a).unwrap_or(u64::MAX);
        let ext = ext
            .into_iter()
            .map(|c| {
                let mut c: Vec<u64> = c.into_iter().map(|x| x % n).collect();
                c.resize(b, 0);
                c
            })
            .collect();
        Ring::build(RingKind::MonogenicExt, p, a, b, ext)
    }

    /// F_q with q = p^d, modulus the first monic irreducible in a fixed ordering.
    pub fn finite_field(p: u64, d: usize) -> Result<Arc<Ring>> {
        check_prime(p)?;
        let f = fp::first_irreducible(p, d);
        Ring::finite_field_with(p, f)
    }

    pub fn finite_field_with(p: u64, f: Vec<u64>) -> Result<Arc<Ring>> {
        check_prime(p)?;
        if !fp::is_irreducible(&f, p) {
            return Err(IflError::BadInput("field modulus is not irreducible".into()));
        }
        Ring::build(RingKind::FiniteField, p, 1, 1, f.into_iter().map(|c| vec![c]).collect())
    }

    /// A/I for an additive ideal lattice I of A (rank n = b*d).
    pub fn quotient_by(self: &Arc<Ring>, ideal: &SubLattice) -> Result<Arc<Ring>> {
        if ideal.rank != self.n() || ideal.modulus != self.modulus {
            return Err(IflError::RingMismatch);
        }
        let lat = match &self.quotient {
            Some(q) => q.sum(ideal),
            None => ideal.clone(),
        };
        let mut one = vec![0; self.n()];
        one[0] = 1;
        if lat.contains(&one) {
            return Err(IflError::BadInput("quotient by the unit ideal".into()));
        }
        let quotient = if lat.is_zero() { None } else { Some(lat) };
        Ok(Arc::new(Ring {
            kind: self.kind,
            p: self.p,
            a: self.a,
            b: self.b,
            d: self.d,
            modulus: self.modulus,
            ext: self.ext.clone(),
            quotient,
            enumeration: OnceLock::new(),
        }))
    }

    /// Same ring with the quotient removed.
    pub fn cover(&self) -> Arc<Ring> {
        Arc::new(Ring {
            kind: self.kind,
            p: self.p,
            a: self.a,
            b: self.b,
            d: self.d,
            modulus: self.modulus,
            ext: self.ext.clone(),
            quotient: None,
            enumeration: OnceLock::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.b * self.d
    }

    pub fn ext_poly(&self) -> &[Vec<u64>] {
        &self.ext
    }

    pub fn has_extension(&self) -> bool {
        matches!(self.kind, RingKind::MonogenicExt | RingKind::FiniteField)
    }

    pub fn label(&self) -> String {
        let base = match self.kind {
            RingKind::ZmodPa => format!("Z/{}", self.modulus),
            RingKind::TruncIwasawa => format!("(Z/{})[T]/(T^{})", self.modulus, self.b),
            RingKind::MonogenicExt => format!(
                "(Z/{})[T]/(T^{})[x]/({})",
                self.modulus,
                self.b,
                self.format_poly_x(&self.ext)
            ),
            RingKind::FiniteField => format!("F_{}", self.p.pow(self.d as u32)),
        };
        match &self.quotient {
            Some(q) => format!("{base} / <{} generators>", q.rows.len()),
            None => base,
        }
    }

    fn format_poly_x(&self, f: &[Vec<u64>]) -> String {
        let mut flat = Vec::new();
        for c in f {
            flat.extend_from_slice(c);
        }
        let d = f.len();
        RingShape { b: self.b, d, modulus: self.modulus }.format(&flat)
    }

    /// Number of elements of the ambient coefficient space (Z/p^a)^n.
    pub fn ambient_size(&self) -> u128 {
        (self.modulus as u128).saturating_pow(self.n() as u32)
    }

    pub fn size(&self) -> u128 {
        match &self.quotient {
            Some(q) => self.ambient_size() / q.size(),
            None => self.ambient_size(),
        }
    }

    pub fn residue_degree(&self) -> usize {
        if self.kind == RingKind::FiniteField {
            self.d
        } else {
            1
        }
    }

    // ---- coefficient-vector arithmetic ----

    pub fn zero(&self) -> Vec<u64> {
        vec![0; self.n()]
    }

    pub fn one(&self) -> Vec<u64> {
        self.from_int(1)
    }

    pub fn from_int(&self, c: i64) -> Vec<u64> {
        let mut v = self.zero();
        v[0] = c.rem_euclid(self.modulus as i64) as u64;
        self.canon(v)
    }

    pub fn from_bigint(&self, c: &BigInt) -> Vec<u64> {
        let m = BigInt::from(self.modulus);
        let r = ((c % &m) + &m) % &m;
        let r: u64 = r.try_into().expect("reduced residue fits");
        let mut v = self.zero();
        v[0] = r;
        self.canon(v)
    }

    /// The generator T (zero when b = 1).
    pub fn t_gen(&self) -> Vec<u64> {
        let mut v = self.zero();
        if self.b > 1 {
            v[1] = 1;
        }
        self.canon(v)
    }

    /// The extension generator x (for d = 1 this is the root of the linear modulus).
    pub fn x_gen(&self) -> Vec<u64> {
        if self.d == 1 {
            return self.neg(&self.canon(self.ext[0].clone()));
        }
        let mut v = self.zero();
        v[self.b] = 1;
        self.canon(v)
    }

    pub fn canon(&self, mut v: Vec<u64>) -> Vec<u64> {
        for x in v.iter_mut() {
            *x %= self.modulus;
        }
        match &self.quotient {
            Some(q) => q.reduce(&v),
            None => v,
        }
    }

    pub fn add(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        let n = self.modulus;
        let v = x.iter().zip(y).map(|(a, b)| (a + b) % n).collect();
        self.canon(v)
    }

    pub fn sub(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        let n = self.modulus;
        let v = x.iter().zip(y).map(|(a, b)| (a + n - b) % n).collect();
        self.canon(v)
    }

    pub fn neg(&self, x: &[u64]) -> Vec<u64> {
        let n = self.modulus;
        self.canon(x.iter().map(|a| (n - a) % n).collect())
    }

    pub fn scale(&self, x: &[u64], c: u64) -> Vec<u64> {
        let n = self.modulus as u128;
        self.canon(x.iter().map(|&a| (a as u128 * c as u128 % n) as u64).collect())
    }

    fn base_mul_acc(&self, acc: &mut [u64], x: &[u64], y: &[u64]) {
        let n = self.modulus as u128;
        let b = self.b;
        for i in 0..b {
            if x[i] == 0 {
                continue;
            }
            for j in 0..(b - i) {
                if y[j] == 0 {
                    continue;
                }
                acc[i + j] = ((acc[i + j] as u128 + x[i] as u128 * y[j] as u128) % n) as u64;
            }
        }
    }

    fn base_mul_sub(&self, acc: &mut [u64], x: &[u64], y: &[u64]) {
        let mut t = vec![0; self.b];
        self.base_mul_acc(&mut t, x, y);
        for (a, v) in acc.iter_mut().zip(t) {
            *a = (*a + self.modulus - v) % self.modulus;
        }
    }

    pub fn mul_raw(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        let (b, d) = (self.b, self.d);
        if d == 1 {
            let mut out = vec![0; b];
            self.base_mul_acc(&mut out, x, y);
            return out;
        }
        let mut prod = vec![vec![0u64; b]; 2 * d - 1];
        for j in 0..d {
            let xj = &x[j * b..(j + 1) * b];
            if xj.iter().all(|&c| c == 0) {
                continue;
            }
            for k in 0..d {
                let yk = &y[k * b..(k + 1) * b];
                self.base_mul_acc(&mut prod[j + k], xj, yk);
            }
        }
        for deg in (d..2 * d - 1).rev() {
            let c = std::mem::replace(&mut prod[deg], vec![0; b]);
            if c.iter().all(|&v| v == 0) {
                continue;
            }
            for i in 0..d {
                let (lo, _) = prod.split_at_mut(deg);
                self.base_mul_sub(&mut lo[deg - d + i], &c, &self.ext[i]);
            }
        }
        prod.into_iter().take(d).flatten().collect()
    }

    pub fn mul(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        self.canon(self.mul_raw(x, y))
    }

    pub fn pow(&self, x: &[u64], mut e: u64) -> Vec<u64> {
        let mut acc = self.one();
        let mut base = x.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn is_zero(&self, x: &[u64]) -> bool {
        x.iter().all(|&c| c == 0)
    }

    /// Image in F_p[x]/(f mod (p, T)): the T^0 coefficients of each x^j, mod p.
    pub fn residue(&self, x: &[u64]) -> Vec<u64> {
        (0..self.d).map(|j| x[j * self.b] % self.p).collect()
    }

    fn residue_modulus(&self) -> Vec<u64> {
        self.ext.iter().map(|c| c[0] % self.p).collect()
    }

    /// Membership in the Jacobson radical of the cover ring.
    pub fn in_radical(&self, x: &[u64]) -> bool {
        let r = fp::trim(self.residue(x));
        if r.is_empty() {
            return true;
        }
        let f = self.residue_modulus();
        fp::pow_mod_poly(&r, self.d as u64, &f, self.p).is_empty()
    }

    pub fn is_unit(&self, x: &[u64]) -> bool {
        self.inv(x).is_ok()
    }

    pub fn inv(&self, x: &[u64]) -> Result<Vec<u64>> {
        if let Some(y) = self.inv_lift(x)? {
            return Ok(y);
        }
        if self.quotient.is_some() && self.ambient_size() <= MAX_ENUMERABLE {
            let en = self.enumeration()?;
            let one = self.one();
            for e in &en.elems {
                if self.mul(x, e) == one {
                    return Ok(e.clone());
                }
            }
        }
        Err(IflError::NonUnit(self.format(x)))
    }

    /// Residue inverse lifted by Newton iteration; None when the residue is not a unit.
    fn inv_lift(&self, x: &[u64]) -> Result<Option<Vec<u64>>> {
        let r = fp::trim(self.residue(x));
        let f = self.residue_modulus();
        if let Some(rinv) = fp::inv_mod_poly(&r, &f, self.p) {
            let mut y = self.zero();
            for (j, c) in rinv.iter().enumerate() {
                y[j * self.b] = *c;
            }
            let one = self.one();
            let two = self.from_int(2);
            for _ in 0..64 {
                let xy = self.mul_raw(x, &y);
                if self.canon(xy.clone()) == one {
                    return Ok(Some(self.canon(y)));
                }
                let xy = self.canon(xy);
                y = self.mul_raw(&y, &self.sub(&two, &xy));
            }
            return Err(IflError::NonUnit("Newton lifting did not converge".into()));
        }
        Ok(None)
    }

    pub fn div(&self, x: &[u64], y: &[u64]) -> Result<Vec<u64>> {
        Ok(self.mul(x, &self.inv(y)?))
    }

    /// Fixed point of u -> u^q (q the residue size) starting at the residue lift of u.
    pub fn teichmuller(&self, u: &[u64]) -> Result<Vec<u64>> {
        if !self.is_unit(u) {
            return Err(IflError::NonUnit(self.format(u)));
        }
        let e = (1..=self.d as u64).fold(1, lcm);
        let q = self.p.pow(e as u32);
        let mut x = self.zero();
        for (j, c) in self.residue(u).into_iter().enumerate() {
            x[j * self.b] = c;
        }
        let mut x = self.canon(x);
        for _ in 0..256 {
            let y = self.pow(&x, q);
            if y == x {
                return Ok(x);
            }
            x = y;
        }
        Err(IflError::BadInput("Teichmuller iteration did not stabilize".into()))
    }

    /// The unique square root in 1 + rad of an element of 1 + rad.
    pub fn sqrt_one_plus_m(&self, x: &[u64]) -> Result<Vec<u64>> {
        let one = self.one();
        if !self.in_radical(&self.sub(x, &one)) {
            return Err(IflError::BadDomain(format!(
                "{} is not congruent to 1 modulo the maximal ideal",
                self.format(x)
            )));
        }
        let half = self.inv(&self.from_int(2))?;
        let mut y = one;
        for _ in 0..128 {
            if self.mul(&y, &y) == self.canon(x.to_vec()) {
                return Ok(y);
            }
            let q = self.div(x, &y)?;
            y = self.mul(&self.add(&y, &q), &half);
        }
        Err(IflError::BadDomain("square root iteration did not converge".into()))
    }

    // ---- text formats ----

    pub fn format(&self, x: &[u64]) -> String {
        RingShape { b: self.b, d: self.d, modulus: self.modulus }.format(x)
    }

    pub fn parse(&self, s: &str) -> Result<Vec<u64>> {
        let terms = parse_bivariate(s)?;
        let mut v = self.zero();
        let x = self.x_gen();
        let t = self.t_gen();
        let m = BigInt::from(self.modulus);
        for (c, te, xe) in terms {
            let c = ((c % &m) + &m) % &m;
            let c: u64 = c.try_into().expect("reduced");
            let mut mono = self.from_int(1);
            if te > 0 {
                if te >= self.b {
                    continue;
                }
                mono = self.mul(&mono, &self.pow(&t, te as u64));
            }
            if xe > 0 {
                mono = self.mul(&mono, &self.pow(&x, xe as u64));
            }
            v = self.add(&v, &self.scale(&mono, c));
        }
        Ok(self.canon(v))
    }

    // ---- enumeration ----

    pub fn enumeration(&self) -> Result<&Enumeration> {
        self.enumeration
            .get_or_init(|| Enumeration::build(self))
            .as_ref()
            .map_err(|e| e.clone())
    }

    pub fn ops(&self) -> Result<Ops<'_>> {
        Ok(Ops { ring: self, en: self.enumeration()? })
    }

    pub fn encode(&self, v: &[u64]) -> usize {
        let mut idx = 0usize;
        for &c in v.iter().rev() {
            idx = idx * self.modulus as usize + c as usize;
        }
        idx
    }
}

#[derive(Clone, Copy)]
struct RingShape {
    b: usize,
    d: usize,
    modulus: u64,
}

impl RingShape {
    fn format(&self, x: &[u64]) -> String {
        let mut terms = Vec::new();
        for j in 0..self.d {
            for t in 0..self.b {
                let c = x[j * self.b + t] % self.modulus;
                if c == 0 {
                    continue;
                }
                let mut s = c.to_string();
                if t == 1 {
                    s.push_str("*T");
                } else if t > 1 {
                    s.push_str(&format!("*T^{t}"));
                }
                if j == 1 {
                    s.push_str("*x");
                } else if j > 1 {
                    s.push_str(&format!("*x^{j}"));
                }
                terms.push(s);
            }
        }
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join("+")
        }
    }
}

/// Parse "c*T^i*x^j" sums into (coefficient, T exponent, x exponent) terms.
pub fn parse_bivariate(s: &str) -> Result<Vec<(BigInt, usize, usize)>> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(IflError::Parse("empty polynomial".into()));
    }
    let mut terms = Vec::new();
    let mut cur = String::new();
    let mut sign = 1i64;
    let mut out = Vec::new();
    for (i, ch) in s.chars().enumerate() {
        if (ch == '+' || ch == '-') && i > 0 {
            terms.push((sign, std::mem::take(&mut cur)));
            sign = if ch == '-' { -1 } else { 1 };
        } else if ch == '-' && i == 0 {
            sign = -1;
        } else if ch == '+' && i == 0 {
        } else {
            cur.push(ch);
        }
    }
    terms.push((sign, cur));
    for (sign, term) in terms {
        if term.is_empty() {
            return Err(IflError::Parse(format!("empty term in '{s}'")));
        }
        let mut c = BigInt::from(sign);
        let (mut te, mut xe) = (0usize, 0usize);
        for factor in term.split('*') {
            let (base, exp) = match factor.split_once('^') {
                Some((b, e)) => (
                    b,
                    e.parse::<usize>()
                        .map_err(|_| IflError::Parse(format!("bad exponent in '{factor}'")))?,
                ),
                None => (factor, 1),
            };
            match base {
                "T" => te += exp,
                "x" | "X" => xe += exp,
                num => {
                    let v: BigInt = num
                        .parse()
                        .map_err(|_| IflError::Parse(format!("bad factor '{factor}'")))?;
                    c *= num::pow(v, exp);
                }
            }
        }
        out.push((c, te, xe));
    }
    Ok(out)
}

/// Dense element list plus optional operation tables.
pub struct Enumeration {
    pub elems: Vec<Vec<u64>>,
    dense: HashMap<usize, u32>,
    add: Option<Vec<u32>>,
    mul: Option<Vec<u32>>,
    neg: Vec<u32>,
    inv: Vec<u32>,
}

pub const NO_INVERSE: u32 = u32::MAX;

impl Enumeration {
    fn build(ring: &Ring) -> std::result::Result<Enumeration, IflError> {
        let amb = ring.ambient_size();
        if amb > MAX_ENUMERABLE {
            return Err(too_large("ring enumeration", amb, MAX_ENUMERABLE));
        }
        let n = ring.n();
        let m = ring.modulus;
        let mut elems = Vec::new();
        let mut v = vec![0u64; n];
        loop {
            if ring.canon(v.clone()) == v {
                elems.push(v.clone());
            }
            let mut i = 0;
            loop {
                if i == n {
                    break;
                }
                v[i] += 1;
                if v[i] < m {
                    break;
                }
                v[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
        let dense: HashMap<usize, u32> = elems
            .iter()
            .enumerate()
            .map(|(i, e)| (ring.encode(e), i as u32))
            .collect();
        let id = |v: &[u64]| dense[&ring.encode(v)];
        let neg = elems.iter().map(|e| id(&ring.neg(e))).collect();
        let inv = elems
            .iter()
            .map(|e| match ring.inv_lift(e) {
                Ok(Some(y)) => id(&y),
                _ if ring.quotient.is_some() => {
                    let one = ring.one();
                    elems
                        .iter()
                        .find(|y| ring.mul(e, y) == one)
                        .map(|y| id(y))
                        .unwrap_or(NO_INVERSE)
                }
                _ => NO_INVERSE,
            })
            .collect();
        let size = elems.len();
        let (add, mul) = if size <= TABLE_LIMIT {
            let mut add = vec![0u32; size * size];
            let mut mul = vec![0u32; size * size];
            for i in 0..size {
                for j in 0..size {
                    add[i * size + j] = id(&ring.add(&elems[i], &elems[j]));
                    mul[i * size + j] = id(&ring.mul(&elems[i], &elems[j]));
                }
            }
            (Some(add), Some(mul))
        } else {
            (None, None)
        };
        Ok(Enumeration { elems, dense, add, mul, neg, inv })
    }
}

/// Element-id arithmetic over an enumerated ring.
#[derive(Clone, Copy)]
pub struct Ops<'a> {
    pub ring: &'a Ring,
    pub en: &'a Enumeration,
}

impl<'a> Ops<'a> {
    pub fn size(&self) -> usize {
        self.en.elems.len()
    }

    pub fn id(&self, v: &[u64]) -> u32 {
        let c = self.ring.canon(v.to_vec());
        self.en.dense[&self.ring.encode(&c)]
    }

    pub fn elem(&self, i: u32) -> &'a [u64] {
        &self.en.elems[i as usize]
    }

    pub fn zero(&self) -> u32 {
        self.id(&self.ring.zero())
    }

    pub fn one(&self) -> u32 {
        self.id(&self.ring.one())
    }

    pub fn from_int(&self, c: i64) -> u32 {
        self.id(&self.ring.from_int(c))
    }

    #[inline]
    pub fn add(&self, x: u32, y: u32) -> u32 {
        match &self.en.add {
            Some(t) => t[x as usize * self.size() + y as usize],
            None => self.id(&self.ring.add(self.elem(x), self.elem(y))),
        }
    }

    #[inline]
    pub fn mul(&self, x: u32, y: u32) -> u32 {
        match &self.en.mul {
            Some(t) => t[x as usize * self.size() + y as usize],
            None => self.id(&self.ring.mul(self.elem(x), self.elem(y))),
        }
    }

    #[inline]
    pub fn neg(&self, x: u32) -> u32 {
        self.en.neg[x as usize]
    }

    #[inline]
    pub fn sub(&self, x: u32, y: u32) -> u32 {
        self.add(x, self.neg(y))
    }

    pub fn inv(&self, x: u32) -> Option<u32> {
        let v = self.en.inv[x as usize];
        (v != NO_INVERSE).then_some(v)
    }

    pub fn is_unit(&self, x: u32) -> bool {
        self.en.inv[x as usize] != NO_INVERSE
    }

    pub fn all(&self) -> impl Iterator<Item = u32> {
        0..self.size() as u32
    }
}

/// Element handle bound to its ring.
#[derive(Clone)]
pub struct RingElement {
    pub ring: Arc<Ring>,
    pub coeffs: Vec<u64>,
}

impl PartialEq for RingElement {
    fn eq(&self, other: &Self) -> bool {
        *self.ring == *other.ring && self.coeffs == other.coeffs
    }
}

impl Eq for RingElement {}

impl fmt::Debug for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ring.format(&self.coeffs))
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ring.format(&self.coeffs))
    }
}

impl RingElement {
    pub fn new(ring: &Arc<Ring>, coeffs: Vec<u64>) -> Self {
        RingElement { coeffs: ring.canon(coeffs), ring: ring.clone() }
    }

    pub fn parse(ring: &Arc<Ring>, s: &str) -> Result<Self> {
        Ok(RingElement { coeffs: ring.parse(s)?, ring: ring.clone() })
    }

    pub fn from_int(ring: &Arc<Ring>, c: i64) -> Self {
        RingElement { coeffs: ring.from_int(c), ring: ring.clone() }
    }

    fn same(&self, o: &Self) -> Result<()> {
        if *self.ring == *o.ring {
            Ok(())
        } else {
            Err(IflError::RingMismatch)
        }
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.same(o)?;
        Ok(RingElement::new(&self.ring, self.ring.add(&self.coeffs, &o.coeffs)))
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.same(o)?;
        Ok(RingElement::new(&self.ring, self.ring.sub(&self.coeffs, &o.coeffs)))
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.same(o)?;
        Ok(RingElement::new(&self.ring, self.ring.mul(&self.coeffs, &o.coeffs)))
    }

    pub fn neg(&self) -> Self {
        RingElement::new(&self.ring, self.ring.neg(&self.coeffs))
    }

    pub fn pow(&self, e: u64) -> Self {
        RingElement::new(&self.ring, self.ring.pow(&self.coeffs, e))
    }

    pub fn invert(&self) -> Result<Self> {
        Ok(RingElement::new(&self.ring, self.ring.inv(&self.coeffs)?))
    }

    pub fn is_unit(&self) -> bool {
        self.ring.is_unit(&self.coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.ring.is_zero(&self.coeffs)
    }

    pub fn sqrt_one_plus_m(&self) -> Result<Self> {
        Ok(RingElement::new(&self.ring, self.ring.sqrt_one_plus_m(&self.coeffs)?))
    }

    pub fn teichmuller(&self) -> Result<Self> {
        Ok(RingElement::new(&self.ring, self.ring.teichmuller(&self.coeffs)?))
    }
}

// ---------------------------------------------------------------------------
// p-adic helpers: Teichmuller on integers, truncated logarithm, kappa.

/// p-adic logarithm of a 1-unit u (u = 1 mod p), returned mod p^prec.
fn padic_log(u: u64, p: u64, prec: u32) -> BigInt {
    let x = BigInt::from(u) - BigInt::from(1u32);
    let pk = BigInt::from(p).pow(prec);
    let mut acc = BigInt::from(0);
    let mut n: u64 = 1;
    loop {
        let vn = crate::arith::valuation(n, p, 64);
        let mut logn = 0;
        while p.pow(logn + 1) <= n {
            logn += 1;
        }
        if n > (prec + logn) as u64 {
            break;
        }
        let modn = BigInt::from(p).pow(prec + vn);
        let xn = num::pow(x.clone(), n as usize) % &modn;
        let num = xn / BigInt::from(p).pow(vn);
        let unit = n / p.pow(vn);
        let uinv = inv_mod(unit % p.pow(prec), p.pow(prec)).expect("unit");
        let mut term = (num * BigInt::from(uinv)) % &pk;
        if n.is_multiple_of(2) {
            term = -term;
        }
        acc = ((acc + term) % &pk + &pk) % &pk;
        n += 1;
    }
    acc
}

/// Teichmuller representative of an integer unit modulo p^k.
pub fn teichmuller_int(u: u64, p: u64, k: u32) -> u64 {
    let m = p.pow(k);
    let mut x = u % p;
    loop {
        let y = pow_mod(x, p, m);
        if y == x {
            return x;
        }
        x = y;
    }
}

/// Exponent s with <ell> = (1+p)^s, determined modulo p^w.
pub fn kappa_exponent(ell: u64, p: u64, w: u32) -> Result<u64> {
    if ell.is_multiple_of(p) {
        return Err(IflError::BadInput(format!("p = {p} divides {ell}")));
    }
    let wp = w + 1;
    let m = p.pow(wp);
    let omega = teichmuller_int(ell % m, p, wp);
    let bracket = (ell % m) as u128 * inv_mod(omega, m).expect("unit") as u128 % m as u128;
    let l1 = padic_log(bracket as u64, p, wp);
    let l0 = padic_log(1 + p, p, wp);
    let pb = BigInt::from(p);
    let num = l1 / &pb;
    let den = l0 / &pb;
    let pw = BigInt::from(p).pow(w);
    let den_u: u64 = ((den % &pw + &pw) % &pw).try_into().expect("fits");
    let dinv = inv_mod(den_u, p.pow(w)).expect("log(1+p) has valuation one");
    let s = ((num % &pw + &pw) % &pw) * BigInt::from(dinv) % &pw;
    Ok(s.try_into().expect("fits"))
}

/// Working precision for the exponent of (1+T)^s in (Z/p^a)[T]/(T^b).
pub fn kappa_precision(p: u64, a: u32, b: usize) -> u32 {
    let mut extra = 0;
    let mut pk = p as usize;
    while b >= 2 && pk < b {
        extra += 1;
        pk *= p as usize;
    }
    a + extra
}

/// (1+T)^s for s a p-adic integer known modulo p^w.
pub fn one_plus_t_pow(ring: &Ring, s: u64) -> Vec<u64> {
    let mut v = ring.zero();
    let m = BigInt::from(ring.modulus);
    let mut binom = BigInt::from(1);
    for k in 0..ring.b {
        let c: u64 = (((&binom % &m) + &m) % &m).try_into().expect("fits");
        v[k] = c;
        binom = binom * (BigInt::from(s) - BigInt::from(k as u64)) / BigInt::from(k as u64 + 1);
    }
    ring.canon(v)
}

/// kappa(<ell>) = (1+T)^s in a truncated Iwasawa algebra.
pub fn kappa(ell: u64, ring: &Ring) -> Result<Vec<u64>> {
    if ring.kind != RingKind::TruncIwasawa || ring.quotient.is_some() {
        return Err(IflError::Unsupported("kappa needs a truncated Iwasawa algebra".into()));
    }
    let w = kappa_precision(ring.p, ring.a, ring.b);
    let s = kappa_exponent(ell, ring.p, w)?;
    Ok(one_plus_t_pow(ring, s))
}

// ---------------------------------------------------------------------------
// Morphisms.

#[derive(Clone, Debug)]
pub struct RingMorphism {
    pub source: Arc<Ring>,
    pub target: Arc<Ring>,
    pub t_image: Vec<u64>,
    pub x_image: Vec<u64>,
    pub label: String,
}

impl RingMorphism {
    pub fn identity(ring: &Arc<Ring>) -> Self {
        RingMorphism {
            source: ring.clone(),
            target: ring.clone(),
            t_image: ring.t_gen(),
            x_image: ring.x_gen(),
            label: "id".into(),
        }
    }

    pub fn apply(&self, v: &[u64]) -> Vec<u64> {
        let (s, t) = (&self.source, &self.target);
        let mut out = t.zero();
        let tpows: Vec<Vec<u64>> = (0..s.b).map(|k| t.pow(&self.t_image, k as u64)).collect();
        let mut xp = t.one();
        for j in 0..s.d {
            for k in 0..s.b {
                let c = v[j * s.b + k];
                if c == 0 {
                    continue;
                }
                let mono = t.mul(&xp, &tpows[k]);
                out = t.add(&out, &t.scale(&mono, c % t.modulus));
            }
            xp = t.mul(&xp, &self.x_image);
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        *self.source == *self.target
            && self.t_image == self.source.t_gen()
            && self.x_image == self.source.x_gen()
    }

    /// Relations of the source map to zero: T^b, f(x), quotient generators.
    pub fn well_defined(&self) -> bool {
        let (s, t) = (&self.source, &self.target);
        if t.modulus > s.modulus || s.modulus % t.modulus != 0 || t.p != s.p {
            return false;
        }
        if s.b > 1 && !t.is_zero(&t.pow(&self.t_image, s.b as u64)) {
            return false;
        }
        let base_map = |c: &[u64]| {
            let mut acc = t.zero();
            for (k, &ck) in c.iter().enumerate() {
                if ck != 0 {
                    let m = t.pow(&self.t_image, k as u64);
                    acc = t.add(&acc, &t.scale(&m, ck % t.modulus));
                }
            }
            acc
        };
        let mut fx = t.zero();
        let mut xp = t.one();
        for c in s.ext_poly() {
            fx = t.add(&fx, &t.mul(&base_map(c), &xp));
            xp = t.mul(&xp, &self.x_image);
        }
        if !t.is_zero(&fx) {
            return false;
        }
        if let Some(q) = &s.quotient {
            if q.rows.iter().any(|r| !t.is_zero(&self.apply(r))) {
                return false;
            }
        }
        true
    }

    pub fn compose(&self, first: &RingMorphism) -> RingMorphism {
        RingMorphism {
            source: first.source.clone(),
            target: self.target.clone(),
            t_image: self.apply(&first.t_image),
            x_image: self.apply(&first.x_image),
            label: format!("{}.{}", self.label, first.label),
        }
    }
}

/// T -> (1+p)^(k+1) - 1, the specialization killing 1 + T - (1+p)^(k+1).
pub fn arithmetic_prime_spec(k: i64, ring: &Arc<Ring>) -> Result<RingMorphism> {
    if ring.kind != RingKind::TruncIwasawa || ring.quotient.is_some() {
        return Err(IflError::Unsupported("arithmetic primes need a truncated Iwasawa algebra".into()));
    }
    if k < 0 {
        return Err(IflError::BadInput("weight must be nonnegative".into()));
    }
    let m = ring.modulus;
    let t = (pow_mod(1 + ring.p, (k + 1) as u64, m) + m - 1) % m;
    if pow_mod(t, ring.b as u64, m) != 0 {
        return Err(IflError::BadInput(format!(
            "T -> {t} is not well defined modulo T^{}",
            ring.b
        )));
    }
    let target = Ring::zmod(ring.p, ring.a)?;
    let mut ti = target.zero();
    ti[0] = t;
    Ok(RingMorphism {
        source: ring.clone(),
        target: target.clone(),
        t_image: ti,
        x_image: target.from_int(0),
        label: format!("P_{{{k},1}}"),
    })
}

/// Automorphisms: Frobenius powers for fields, base-fixing root maps for
/// monogenic extensions, T -> t substitutions for truncated Iwasawa algebras.
pub fn ring_automorphisms(ring: &Arc<Ring>, cap: u128) -> Result<Vec<RingMorphism>> {
    let size = ring.size();
    match ring.kind {
        RingKind::FiniteField => {
            let mut out = Vec::new();
            let x = ring.x_gen();
            for i in 0..ring.d {
                let img = ring.pow(&x, ring.p.pow(i as u32));
                out.push(RingMorphism {
                    source: ring.clone(),
                    target: ring.clone(),
                    t_image: ring.t_gen(),
                    x_image: img,
                    label: if i == 0 { "id".into() } else { format!("frob^{i}") },
                });
            }
            Ok(out)
        }
        RingKind::ZmodPa => Ok(vec![RingMorphism::identity(ring)]),
        RingKind::TruncIwasawa | RingKind::MonogenicExt => {
            let search = if ring.kind == RingKind::MonogenicExt { size * size } else { size };
            if search > cap || ring.ambient_size() > MAX_ENUMERABLE {
                return Err(too_large("automorphism search", search, cap));
            }
            let en = ring.enumeration()?;
            let t_candidates: Vec<Vec<u64>> = if ring.kind == RingKind::MonogenicExt {
                vec![ring.t_gen()]
            } else {
                en.elems.clone()
            };
            let x_candidates: Vec<Vec<u64>> = if ring.d > 1 {
                en.elems.clone()
            } else {
                vec![ring.x_gen()]
            };
            let mut out = Vec::new();
            for t in &t_candidates {
                for x in &x_candidates {
                    let m = RingMorphism {
                        source: ring.clone(),
                        target: ring.clone(),
                        t_image: t.clone(),
                        x_image: x.clone(),
                        label: String::new(),
                    };
                    if !m.well_defined() {
                        continue;
                    }
                    let mut seen = std::collections::HashSet::new();
                    if en.elems.iter().all(|e| seen.insert(m.apply(e))) {
                        out.push(m);
                    }
                }
            }
            out.sort_by_key(|m| !m.is_identity());
            for m in out.iter_mut() {
                m.label = if m.is_identity() {
                    "id".into()
                } else if ring.d > 1 {
                    format!("T->{}, x->{}", ring.format(&m.t_image), ring.format(&m.x_image))
                } else {
                    format!("T->{}", ring.format(&m.t_image))
                };
            }
            Ok(out)
        }
    }
}

// ---------------------------------------------------------------------------
// Polynomials over F_p, coefficients little-endian, trimmed.

pub mod fp {
    use crate::arith::inv_mod;

    pub fn trim(mut v: Vec<u64>) -> Vec<u64> {
        while v.last() == Some(&0) {
            v.pop();
        }
        v
    }

    pub fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let n = a.len().max(b.len());
        let out = (0..n)
            .map(|i| (a.get(i).copied().unwrap_or(0) + p - b.get(i).copied().unwrap_or(0) % p) % p)
            .collect();
        trim(out)
    }

    pub fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return vec![];
        }
        let mut out = vec![0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y) % p;
            }
        }
        trim(out)
    }

    pub fn divrem(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
        let b = trim(b.to_vec());
        let mut r = trim(a.to_vec());
        if r.len() < b.len() {
            return (vec![], r);
        }
        let lead_inv = inv_mod(*b.last().expect("nonzero divisor"), p).expect("field");
        let mut q = vec![0; r.len() - b.len() + 1];
        while r.len() >= b.len() && !r.is_empty() {
            let shift = r.len() - b.len();
            let c = r.last().unwrap() * lead_inv % p;
            q[shift] = c;
            for (i, bi) in b.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p - c * bi % p) % p;
            }
            r = trim(r);
        }
        (trim(q), r)
    }

    pub fn rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        divrem(a, b, p).1
    }

    pub fn pow_mod_poly(a: &[u64], mut e: u64, f: &[u64], p: u64) -> Vec<u64> {
        let mut acc = vec![1];
        let mut base = rem(a, f, p);
        while e > 0 {
            if e & 1 == 1 {
                acc = rem(&mul(&acc, &base, p), f, p);
            }
            base = rem(&mul(&base, &base, p), f, p);
            e >>= 1;
        }
        trim(acc)
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let (mut x, mut y) = (trim(a.to_vec()), trim(b.to_vec()));
        while !y.is_empty() {
            let r = rem(&x, &y, p);
            x = y;
            y = r;
        }
        if let Some(&l) = x.last() {
            let li = inv_mod(l, p).unwrap();
            x = x.into_iter().map(|c| c * li % p).collect();
        }
        x
    }

    /// Inverse of a modulo f, when gcd(a, f) = 1.
    pub fn inv_mod_poly(a: &[u64], f: &[u64], p: u64) -> Option<Vec<u64>> {
        let (mut r0, mut r1) = (trim(f.to_vec()), rem(a, f, p));
        let (mut s0, mut s1): (Vec<u64>, Vec<u64>) = (vec![], vec![1]);
        if r1.is_empty() {
            return None;
        }
        while !r1.is_empty() {
            let (q, r) = divrem(&r0, &r1, p);
            let s2 = sub(&s0, &mul(&q, &s1, p), p);
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s2;
        }
        if r0.len() != 1 {
            return None;
        }
        let c = inv_mod(r0[0], p)?;
        Some(trim(rem(&s0, f, p).into_iter().map(|x| x * c % p).collect()))
    }

    pub fn is_irreducible(f: &[u64], p: u64) -> bool {
        let f = trim(f.to_vec());
        let d = f.len().saturating_sub(1);
        if d == 0 {
            return false;
        }
        if d == 1 {
            return true;
        }
        let x = vec![0, 1];
        let xq = |k: u32| pow_mod_poly(&x, p.pow(k), &f, p);
        if !sub(&xq(d as u32), &x, p).is_empty() {
            return false;
        }
        for (r, _) in crate::arith::factorize(d as u64) {
            let k = d as u32 / r as u32;
            let g = gcd(&sub(&xq(k), &x, p), &f, p);
            if g.len() != 1 {
                return false;
            }
        }
        true
    }

    pub fn first_irreducible(p: u64, d: usize) -> Vec<u64> {
        let total = p.pow(d as u32);
        for code in 0..total {
            let mut f = Vec::with_capacity(d + 1);
            let mut c = code;
            for _ in 0..d {
                f.push(c % p);
                c /= p;
            }
            f.push(1);
            if is_irreducible(&f, p) {
                return f;
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3t3() -> Arc<Ring> {
        Ring::trunc_iwasawa(3, 1, 3).unwrap()
    }

    #[test]
    fn inverse_of_one_plus_t() {
        let r = f3t3();
        let x = r.parse("1+T").unwrap();
        assert_eq!(r.inv(&x).unwrap(), r.parse("1+2*T+T^2").unwrap());
        assert!(matches!(r.inv(&r.t_gen()), Err(IflError::NonUnit(_))));
        assert_eq!(r.inv(&r.one()).unwrap(), r.one());
    }

    #[test]
    fn sqrt_examples() {
        let r = f3t3();
        let x = r.parse("1+T").unwrap();
        assert_eq!(r.sqrt_one_plus_m(&x).unwrap(), r.parse("1+2*T+T^2").unwrap());
        assert!(r.sqrt_one_plus_m(&r.from_int(2)).is_err());
        let en = r.enumeration().unwrap();
        let mut count = 0;
        for e in &en.elems {
            if r.in_radical(&r.sub(e, &r.one())) {
                let y = r.sqrt_one_plus_m(e).unwrap();
                assert_eq!(r.mul(&y, &y), *e);
                count += 1;
            }
        }
        assert_eq!(count, 9);
    }

    #[test]
    fn teichmuller_mod_9() {
        let r = Ring::zmod(3, 2).unwrap();
        assert_eq!(r.teichmuller(&r.from_int(2)).unwrap(), r.from_int(8));
        assert_eq!(r.teichmuller(&r.one()).unwrap(), r.one());
        let r25 = Ring::zmod(5, 2).unwrap();
        for u in 1..25 {
            if u % 5 == 0 {
                continue;
            }
            let w = r25.teichmuller(&r25.from_int(u)).unwrap();
            assert_eq!(r25.pow(&w, 4), r25.one());
            assert_eq!(w[0] % 5, u as u64 % 5);
        }
    }

    #[test]
    fn kappa_examples() {
        let r = Ring::trunc_iwasawa(3, 2, 2).unwrap();
        assert_eq!(kappa(4, &r).unwrap(), r.parse("1+T").unwrap());
        let r3 = Ring::trunc_iwasawa(3, 2, 3).unwrap();
        assert_eq!(kappa(4, &r3).unwrap(), r3.parse("1+T").unwrap());
        assert!(kappa(6, &r3).is_err());
        let r5 = Ring::trunc_iwasawa(5, 2, 3).unwrap();
        assert_eq!(kappa(6, &r5).unwrap(), r5.parse("1+T").unwrap());
    }

    #[test]
    fn kappa_of_power_is_power() {
        let r = Ring::trunc_iwasawa(3, 2, 4).unwrap();
        let k4 = kappa(4, &r).unwrap();
        assert_eq!(kappa(16, &r).unwrap(), r.mul(&k4, &k4));
        assert_eq!(kappa(64, &r).unwrap(), r.pow(&k4, 3));
    }

    #[test]
    fn arithmetic_prime_values() {
        let r = Ring::trunc_iwasawa(3, 2, 3).unwrap();
        let m = arithmetic_prime_spec(2, &r).unwrap();
        assert_eq!(m.t_image, vec![0]);
        let r2 = Ring::trunc_iwasawa(3, 2, 2).unwrap();
        let m1 = arithmetic_prime_spec(1, &r2).unwrap();
        assert_eq!(m1.t_image, vec![6]);
        assert!(m1.well_defined());
        let gen = r2.sub(&r2.add(&r2.one(), &r2.t_gen()), &r2.from_int(16));
        assert!(m1.target.is_zero(&m1.apply(&gen)));
    }

    #[test]
    fn field_automorphisms() {
        let f3 = Ring::finite_field(3, 1).unwrap();
        assert_eq!(ring_automorphisms(&f3, 1000).unwrap().len(), 1);
        let f9 = Ring::finite_field(3, 2).unwrap();
        let auts = ring_automorphisms(&f9, 1000).unwrap();
        assert_eq!(auts.len(), 2);
        let x = f9.x_gen();
        assert_eq!(auts[1].apply(&x), f9.pow(&x, 3));
    }

    #[test]
    fn extension_automorphisms() {
        let one_plus_t = vec![1, 1];
        let ext = vec![vec![2, 2], vec![0, 0], vec![1, 0]];
        let a = Ring::monogenic(3, 1, 2, ext).unwrap();
        assert_eq!(a.size(), 81);
        let x = a.x_gen();
        let mut t = a.zero();
        t[..2].copy_from_slice(&one_plus_t);
        assert_eq!(a.mul(&x, &x), t);
        let auts = ring_automorphisms(&a, 100_000).unwrap();
        assert_eq!(auts.len(), 2);
        assert_eq!(auts[1].x_image, a.neg(&x));
    }

    #[test]
    fn trunc_automorphisms_of_f3_t2() {
        let r = Ring::trunc_iwasawa(3, 1, 2).unwrap();
        let auts = ring_automorphisms(&r, 1000).unwrap();
        assert_eq!(auts.len(), 2);
        assert_eq!(auts[1].t_image, r.parse("2*T").unwrap());
    }

    #[test]
    fn maximal_ideal_nilpotent() {
        for (p, a, b) in [(3, 2, 3), (3, 1, 3), (5, 2, 2)] {
            let r = Ring::trunc_iwasawa(p, a, b).unwrap();
            let gens = [r.from_int(p as i64), r.t_gen()];
            let k = a as usize + b - 1;
            // every product of k generators vanishes, some product of k-1 does not
            let mut prods = vec![r.one()];
            for _ in 0..k {
                prods = prods
                    .iter()
                    .flat_map(|x| gens.iter().map(move |g| (x.clone(), g.clone())))
                    .map(|(x, g)| r.mul(&x, &g))
                    .collect();
            }
            assert!(prods.iter().all(|x| r.is_zero(x)));
            let almost = r.mul(&r.pow(&gens[0], a as u64 - 1), &r.pow(&gens[1], b as u64 - 1));
            assert!(!r.is_zero(&almost));
        }
    }

    #[test]
    fn parse_format_round_trip() {
        let r = Ring::trunc_iwasawa(3, 2, 3).unwrap();
        let x = r.parse("2+1*T+2*T^2").unwrap();
        assert_eq!(r.format(&x), "2+1*T+2*T^2");
        assert_eq!(r.parse("-1").unwrap(), r.from_int(8));
        assert_eq!(r.format(&r.zero()), "0");
    }

    #[test]
    fn quotient_ring_arithmetic() {
        let r = Ring::trunc_iwasawa(3, 1, 3).unwrap();
        let ideal = crate::howell::howell_form(vec![vec![0, 0, 1]], 3, 1, 3);
        let q = r.quotient_by(&ideal).unwrap();
        assert_eq!(q.size(), 9);
        let t = q.t_gen();
        assert!(q.is_zero(&q.mul(&t, &t)));
        let u = q.parse("1+T").unwrap();
        assert_eq!(q.inv(&u).unwrap(), q.parse("1+2*T").unwrap());
    }

    #[test]
    fn finite_field_inverse() {
        let f9 = Ring::finite_field(3, 2).unwrap();
        let en = f9.enumeration().unwrap();
        for e in &en.elems {
            if !f9.is_zero(e) {
                assert_eq!(f9.mul(e, &f9.inv(e).unwrap()), f9.one());
            }
        }
    }
}
