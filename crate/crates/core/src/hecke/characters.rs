//! Dirichlet characters as exponent tables: chi(n) = zeta_order^e(n).

use std::sync::Arc;

use num::{BigRational, One};
use serde::Serialize;

use super::cyclotomic::Cyc;
use crate::arith::{factorize, gcd, lcm, pow_mod};
use crate::error::{IflError, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DirichletCharacter {
    pub modulus: u64,
    /// Exact order; values are powers of zeta_order.
    pub order: u64,
    exps: Arc<Vec<Option<u32>>>,
}

/// Generators of (Z/M)^x with their orders, as residues mod M.
pub fn unit_group_generators(m: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for (p, k) in factorize(m) {
        let q = p.pow(k);
        let rest = m / q;
        // lift g mod q to a residue that is 1 mod the other components
        let crt = |g: u64| -> u64 {
            if rest == 1 {
                return g % m;
            }
            (0..rest).map(|t| g + t * q).find(|&x| x % rest == 1 % rest).expect("CRT") % m
        };
        if p == 2 {
            if k >= 2 {
                out.push((crt(q - 1), 2));
            }
            if k >= 3 {
                out.push((crt(5), q / 4));
            }
        } else {
            let phi = q / p * (p - 1);
            let g = (2..q)
                .find(|&g| {
                    gcd(g, p) == 1 && factorize(phi).iter().all(|&(r, _)| pow_mod(g, phi / r, q) != 1)
                })
                .expect("odd prime powers have primitive roots");
            out.push((crt(g), phi));
        }
    }
    out
}

/// Discrete logs: for each residue coprime to M, exponents on the generators.
fn discrete_logs(m: u64, gens: &[(u64, u64)]) -> Vec<Option<Vec<u64>>> {
    let mut logs = vec![None; m as usize];
    let mut e = vec![0u64; gens.len()];
    loop {
        let n = gens.iter().zip(&e).fold(1 % m, |acc, (&(g, _), &k)| acc * pow_mod(g, k, m) % m);
        logs[n as usize] = Some(e.clone());
        let mut i = gens.len();
        loop {
            if i == 0 {
                return logs;
            }
            i -= 1;
            e[i] += 1;
            if e[i] < gens[i].1 {
                break;
            }
            e[i] = 0;
        }
    }
}

impl DirichletCharacter {
    fn normalized(modulus: u64, k: u64, exps: Vec<Option<u64>>) -> Self {
        let g = exps.iter().flatten().fold(k, |acc, &e| gcd(acc, e % k));
        let order = k / g.max(1);
        let exps = exps.into_iter().map(|e| e.map(|x| ((x % k) / g.max(1)) as u32)).collect();
        DirichletCharacter { modulus, order, exps: Arc::new(exps) }
    }

    pub fn trivial(modulus: u64) -> Self {
        let exps = (0..modulus).map(|n| (gcd(n, modulus) == 1).then_some(0)).collect();
        Self::normalized(modulus, 1, exps)
    }

    /// All characters mod M, trivial first, ordered by generator exponents.
    pub fn all(modulus: u64) -> Vec<Self> {
        if modulus == 1 {
            return vec![Self::trivial(1)];
        }
        let gens = unit_group_generators(modulus);
        let logs = discrete_logs(modulus, &gens);
        let k = gens.iter().fold(1, |acc, &(_, o)| lcm(acc, o));
        let mut out = Vec::new();
        let mut c = vec![0u64; gens.len()];
        loop {
            let exps = logs
                .iter()
                .map(|l| {
                    l.as_ref().map(|l| {
                        l.iter().zip(&c).zip(&gens).map(|((&li, &ci), &(_, o))| li * ci * (k / o)).sum::<u64>() % k
                    })
                })
                .collect();
            out.push(Self::normalized(modulus, k, exps));
            let mut i = gens.len();
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                c[i] += 1;
                if c[i] < gens[i].1 {
                    break;
                }
                c[i] = 0;
            }
        }
    }

    /// n -> (D/n) restricted to units mod M.
    pub fn kronecker(d: i64, modulus: u64) -> Result<Self> {
        let exps: Vec<Option<u64>> = (0..modulus)
            .map(|n| {
                if gcd(n, modulus) != 1 {
                    return Ok(None);
                }
                match kronecker_symbol(d, n) {
                    1 => Ok(Some(0)),
                    -1 => Ok(Some(1)),
                    _ => Err(IflError::BadInput(format!("({d}/.) is not a character mod {modulus}"))),
                }
            })
            .collect::<Result<_>>()?;
        let c = Self::normalized(modulus, 2, exps);
        if !c.is_multiplicative() {
            return Err(IflError::BadInput(format!("({d}/.) is not a character mod {modulus}")));
        }
        Ok(c)
    }

    /// chi(n) as (exponent, order) with chi(n) = zeta_order^exponent, None when gcd(n, M) > 1.
    pub fn value_exp(&self, n: i64) -> Option<(u64, u64)> {
        let r = n.rem_euclid(self.modulus as i64) as usize;
        self.exps[r].map(|e| (e as u64, self.order))
    }

    pub fn value(&self, n: i64) -> Cyc {
        match self.value_exp(n) {
            None => Cyc::zero(),
            Some((e, k)) => Cyc::zeta_pow(k, e as i64),
        }
    }

    /// +1, -1 or 0 for characters of order at most 2.
    pub fn value_sign(&self, n: i64) -> Option<i64> {
        match self.value_exp(n) {
            None => Some(0),
            Some((0, _)) => Some(1),
            Some((e, k)) if 2 * e == k => Some(-1),
            _ => None,
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }

    pub fn is_quadratic(&self) -> bool {
        self.order == 2
    }

    pub fn is_even(&self) -> bool {
        self.value_exp(-1) == Some((0, self.order))
    }

    pub fn is_multiplicative(&self) -> bool {
        let m = self.modulus as i64;
        (0..m).all(|a| {
            (0..m).all(|b| match (self.value_exp(a), self.value_exp(b), self.value_exp(a * b)) {
                (Some((x, k)), Some((y, _)), Some((z, _))) => (x + y) % k == z,
                (None, _, None) | (_, None, None) => true,
                _ => false,
            })
        })
    }

    /// Same character viewed modulo a multiple of the modulus.
    pub fn induce(&self, m: u64) -> Result<Self> {
        if !m.is_multiple_of(self.modulus) {
            return Err(IflError::BadLevel(format!("{m} is not a multiple of {}", self.modulus)));
        }
        let exps = (0..m)
            .map(|n| if gcd(n, m) == 1 { self.value_exp(n as i64).map(|v| v.0) } else { None })
            .collect();
        Ok(Self::normalized(m, self.order, exps))
    }

    pub fn mul(&self, o: &Self) -> Self {
        let m = lcm(self.modulus, o.modulus);
        let k = lcm(self.order, o.order);
        let exps = (0..m as i64)
            .map(|n| match (self.value_exp(n), o.value_exp(n)) {
                (Some((a, ka)), Some((b, kb))) => Some(a * (k / ka) + b * (k / kb)),
                _ => None,
            })
            .collect();
        Self::normalized(m, k, exps)
    }

    pub fn pow(&self, e: i64) -> Self {
        let k = self.order;
        let e = e.rem_euclid(k as i64) as u64;
        let exps = self.exps.iter().map(|x| x.map(|v| v as u64 * e)).collect();
        Self::normalized(self.modulus, k, exps)
    }

    pub fn inverse(&self) -> Self {
        self.pow(-1)
    }

    /// chi^sigma for sigma: zeta -> zeta^a on values.
    pub fn galois(&self, a: i64) -> Self {
        self.pow(a)
    }

    /// Same values at every n (moduli may differ only through induction).
    pub fn same_as(&self, o: &Self) -> bool {
        let m = lcm(self.modulus, o.modulus);
        match (self.induce(m), o.induce(m)) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        }
    }

    pub fn conductor(&self) -> u64 {
        let m = self.modulus;
        crate::arith::divisors(m)
            .into_iter()
            .find(|&d| {
                (0..m).filter(|&n| gcd(n, m) == 1 && n % d == 1 % d).all(|n| self.exps[n as usize] == Some(0))
            })
            .expect("the modulus itself works")
    }

    pub fn primitive_part(&self) -> Self {
        let c = self.conductor();
        let m = self.modulus;
        let exps = (0..c)
            .map(|a| {
                if gcd(a, c) != 1 {
                    return None;
                }
                let n = (0..m).map(|t| a + t * c).find(|&n| gcd(n, m) == 1).expect("lift exists");
                self.value_exp(n as i64).map(|v| v.0)
            })
            .collect();
        Self::normalized(c, self.order, exps)
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor() == self.modulus
    }

    /// (generator, exponent, order) triples: chi(g) = zeta_order^exponent.
    pub fn generator_images(&self) -> Vec<(u64, u64, u64)> {
        unit_group_generators(self.modulus)
            .into_iter()
            .map(|(g, _)| {
                let (e, k) = self.value_exp(g as i64).expect("unit");
                (g, e, k)
            })
            .collect()
    }

    /// Kronecker label chi_D for quadratic primitive parts, else modulus and generator images.
    pub fn label(&self) -> String {
        if self.is_trivial() {
            return "trivial".into();
        }
        let p = self.primitive_part();
        if p.is_quadratic() {
            let c = p.modulus as i64;
            let d = if p.is_even() { c } else { -c };
            if Self::kronecker(d, p.modulus).map(|k| k == p).unwrap_or(false) {
                return format!("chi_{d}");
            }
        }
        let imgs: Vec<String> = self.generator_images().iter().map(|(g, e, k)| format!("{g}:{e}/{k}")).collect();
        format!("chi_mod{}[{}]", self.modulus, imgs.join(","))
    }

    pub fn summary(&self) -> CharacterSummary {
        CharacterSummary {
            label: self.label(),
            modulus: self.modulus,
            conductor: self.conductor(),
            order: self.order,
            generator_images: self
                .generator_images()
                .into_iter()
                .map(|(g, e, k)| (g, format!("{e}/{k}")))
                .collect(),
        }
    }

    /// Lines `modulus=M`, then `g=e/k` (chi(g) = zeta_k^e) or `kronecker=D`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut modulus = None;
        let mut constraints = Vec::new();
        let mut kron = None;
        for line in text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).filter(|l| !l.is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| IflError::Parse(format!("expected key=value, got '{line}'")))?;
            let (k, v) = (k.trim(), v.trim());
            let bad = |what: &str| IflError::Parse(format!("bad {what} in '{line}'"));
            match k {
                "modulus" => modulus = Some(v.parse::<u64>().map_err(|_| bad("modulus"))?),
                "kronecker" => kron = Some(v.parse::<i64>().map_err(|_| bad("discriminant"))?),
                _ => {
                    let g: i64 = k.parse().map_err(|_| bad("residue"))?;
                    let (e, o) = v.split_once('/').ok_or_else(|| bad("value"))?;
                    let e: u64 = e.trim().parse().map_err(|_| bad("exponent"))?;
                    let o: u64 = o.trim().parse().map_err(|_| bad("order"))?;
                    if o == 0 {
                        return Err(bad("order"));
                    }
                    constraints.push((g, e, o));
                }
            }
        }
        let modulus = modulus.ok_or_else(|| IflError::Parse("missing modulus=".into()))?;
        if modulus == 0 {
            return Err(IflError::Parse("modulus must be positive".into()));
        }
        if let Some(d) = kron {
            return Self::kronecker(d, modulus);
        }
        let matches: Vec<Self> = Self::all(modulus)
            .into_iter()
            .filter(|c| {
                constraints.iter().all(|&(g, e, o)| {
                    c.value_exp(g).is_some_and(|(ce, ck)| (ce * o) % (ck * o) == (e * ck) % (ck * o))
                })
            })
            .collect();
        match matches.len() {
            1 => Ok(matches.into_iter().next().expect("one")),
            0 => Err(IflError::Parse("no character has the given values".into())),
            n => Err(IflError::Parse(format!("{n} characters match; give more generator values"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CharacterSummary {
    pub label: String,
    pub modulus: u64,
    pub conductor: u64,
    pub order: u64,
    pub generator_images: Vec<(u64, String)>,
}

/// Kronecker symbol (a/n), n >= 0.
pub fn kronecker_symbol(a: i64, n: u64) -> i64 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut n = n;
    let mut result = 1i64;
    let mut a = a as i128;
    while n.is_multiple_of(2) {
        n /= 2;
        match a.rem_euclid(8) {
            0 | 2 | 4 | 6 => return 0,
            3 | 5 => result = -result,
            _ => {}
        }
    }
    // Jacobi symbol (a/n) for odd n
    let mut m = n as i128;
    a = a.rem_euclid(m);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(m % 8, 3 | 5) {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut m);
        if a % 4 == 3 && m % 4 == 3 {
            result = -result;
        }
        a %= m;
    }
    if m == 1 {
        result
    } else {
        0
    }
}

/// sum over a mod c of chi_0(a) zeta_c^a for the primitive part chi_0 of conductor c.
pub fn gauss_sum(chi: &DirichletCharacter) -> Cyc {
    let p = chi.primitive_part();
    let c = p.modulus;
    if c == 1 {
        return Cyc::one();
    }
    let l = lcm(c, p.order);
    let mut v = vec![BigRational::from_integer(0.into()); l as usize];
    for a in 0..c {
        if let Some((e, k)) = p.value_exp(a as i64) {
            let idx = (e * (l / k) + a * (l / c)) % l;
            v[idx as usize] += BigRational::one();
        }
    }
    Cyc::from_powers(l, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_multiplicativity() {
        for m in 1..=24u64 {
            let all = DirichletCharacter::all(m);
            assert_eq!(all.len() as u64, crate::arith::euler_phi(m), "modulus {m}");
            assert!(all[0].is_trivial());
            for c in &all {
                assert!(c.is_multiplicative());
                let p = c.primitive_part();
                assert_eq!(p.conductor(), p.modulus);
                assert_eq!(m % c.conductor(), 0);
                assert!(p.induce(m).unwrap() == *c);
            }
            let mut dedup = all.clone();
            dedup.sort();
            dedup.dedup();
            assert_eq!(dedup.len(), all.len());
        }
    }

    #[test]
    fn conductors() {
        assert_eq!(DirichletCharacter::trivial(12).conductor(), 1);
        let m4 = DirichletCharacter::kronecker(-4, 4).unwrap();
        assert_eq!(m4.conductor(), 4);
        let c9 = DirichletCharacter::all(9).into_iter().find(|c| c.order == 3).unwrap();
        assert_eq!(c9.conductor(), 9);
        assert_eq!(c9.induce(27).unwrap().conductor(), 9);
        assert_eq!(m4.label(), "chi_-4");
        assert_eq!(DirichletCharacter::kronecker(8, 8).unwrap().label(), "chi_8");
    }

    #[test]
    fn gauss_sums() {
        assert_eq!(gauss_sum(&DirichletCharacter::trivial(7)), Cyc::one());
        let q3 = DirichletCharacter::kronecker(-3, 3).unwrap();
        let z = Cyc::zeta_pow(3, 1);
        assert_eq!(gauss_sum(&q3), z.sub(&z.pow(2)));
        for m in 1..=12u64 {
            for c in DirichletCharacter::all(m).into_iter().filter(|c| c.is_primitive()) {
                let g = gauss_sum(&c);
                assert_eq!(g.mul(&g.conj()), Cyc::from_int(m as i64));
                let sign = if c.is_even() { 1 } else { -1 };
                assert_eq!(g.mul(&gauss_sum(&c.inverse())), Cyc::from_int(sign * m as i64));
            }
        }
    }

    #[test]
    fn kronecker_values() {
        assert_eq!(kronecker_symbol(-4, 3), -1);
        assert_eq!(kronecker_symbol(-4, 5), 1);
        assert_eq!(kronecker_symbol(8, 3), -1);
        assert_eq!(kronecker_symbol(5, 2), -1);
        assert_eq!(kronecker_symbol(2, 7), 1);
    }

    #[test]
    fn parse_file() {
        let c = DirichletCharacter::parse("modulus=4\n3=1/2\n").unwrap();
        assert_eq!(c, DirichletCharacter::kronecker(-4, 4).unwrap());
        assert!(DirichletCharacter::parse("modulus=12\n").is_err());
        let k = DirichletCharacter::parse("modulus=8\nkronecker=-8").unwrap();
        assert_eq!(k.conductor(), 8);
    }
}
