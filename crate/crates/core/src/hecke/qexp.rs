//! Truncated q-expansions with classical and Lambda-adic Hecke operators.

use std::sync::Arc;

use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::characters::DirichletCharacter;
use super::cyclotomic::Cyc;
use crate::arith::{divisors, factorize, gcd, is_prime, lcm, pow_mod};
use crate::error::{too_large, IflError, Result};
use crate::rings::{kappa, teichmuller_int, Ring, RingKind};

pub const MAX_ETA_PRECISION: usize = 10_000;

/// a(0), ..., a(prec) of a form of weight k, level N and nebentypus psi (mod N).
#[derive(Clone, Debug, PartialEq)]
pub struct QExpansion {
    pub coeffs: Vec<Cyc>,
    pub weight: u32,
    pub level: u64,
    pub nebentypus: DirichletCharacter,
    pub label: String,
}

fn check_prime(l: u64) -> Result<()> {
    if is_prime(l) {
        Ok(())
    } else {
        Err(IflError::BadInput(format!("{l} is not prime")))
    }
}

fn shorten(prec: usize, by: u64, what: &str) -> Result<usize> {
    let out = prec / by as usize;
    if out == 0 {
        return Err(IflError::TruncationTooShort(format!(
            "{what} needs a({by}) but the series stops at q^{prec}"
        )));
    }
    Ok(out)
}

impl QExpansion {
    pub fn new(coeffs: Vec<Cyc>, weight: u32, level: u64, nebentypus: &DirichletCharacter) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(IflError::BadInput("a q-expansion needs at least a(1)".into()));
        }
        if level == 0 {
            return Err(IflError::BadInput("level must be positive".into()));
        }
        let nebentypus = nebentypus.induce(level)?;
        Ok(QExpansion { coeffs, weight, level, nebentypus, label: String::new() })
    }

    pub fn from_ints(coeffs: &[i64], weight: u32, level: u64) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Cyc::from_int(c)).collect(), weight, level, &DirichletCharacter::trivial(1))
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    /// Largest n with a(n) known.
    pub fn prec(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn a(&self, n: usize) -> &Cyc {
        &self.coeffs[n]
    }

    /// Smallest cyclotomic field holding every coefficient and character value.
    pub fn field(&self) -> u64 {
        let f = self.coeffs.iter().fold(1, |acc, c| lcm(acc, c.n));
        let f = lcm(f, self.nebentypus.order);
        if f % 4 == 2 {
            f / 2
        } else {
            f
        }
    }

    fn same_shape(&self, coeffs: Vec<Cyc>) -> Self {
        QExpansion { coeffs, ..self.clone() }
    }

    /// psi(d) d^(k-1) at the form's level.
    fn diamond_factor(&self, d: u64) -> Cyc {
        let chi = self.nebentypus.value(d as i64);
        chi.scale(&BigRational::from_integer(BigInt::from(d).pow(self.weight.saturating_sub(1))))
    }

    /// a(m, f|T(n)) = sum_{d | (m, n)} psi(d) d^(k-1) a(mn/d^2); output precision prec / n.
    pub fn hecke_tn(&self, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(IflError::BadInput("T(0) is undefined".into()));
        }
        let out_prec = shorten(self.prec(), n, "T(n)")?;
        let coeffs = (0..=out_prec as u64)
            .map(|m| {
                if m == 0 {
                    let s = divisors(n).into_iter().fold(Cyc::zero(), |acc, d| acc.add(&self.diamond_factor(d)));
                    return s.mul(self.a(0));
                }
                divisors(gcd(m, n)).into_iter().fold(Cyc::zero(), |acc, d| {
                    let idx = (m * n / (d * d)) as usize;
                    acc.add(&self.diamond_factor(d).mul(self.a(idx)))
                })
            })
            .collect();
        Ok(self.same_shape(coeffs))
    }

    /// a(m, f|T(l)) = a(ml) + psi(l) l^(k-1) a(m/l).
    pub fn hecke_t(&self, l: u64) -> Result<Self> {
        check_prime(l)?;
        let out_prec = shorten(self.prec(), l, "T(l)")?;
        let eps = self.diamond_factor(l);
        let coeffs = (0..=out_prec)
            .map(|m| {
                let mut c = self.a(m * l as usize).clone();
                if m % l as usize == 0 {
                    c = c.add(&eps.mul(self.a(m / l as usize)));
                }
                c
            })
            .collect();
        Ok(self.same_shape(coeffs))
    }

    /// a(m, f|U(p)) = a(mp).
    pub fn u_p(&self, p: u64) -> Result<Self> {
        check_prime(p)?;
        let out_prec = shorten(self.prec(), p, "U(p)")?;
        Ok(self.same_shape((0..=out_prec).map(|m| self.a(m * p as usize).clone()).collect()))
    }

    /// a(p) is a p-adic unit: p does not divide the norm of a(p).
    pub fn is_ordinary(&self, p: u64) -> Result<bool> {
        check_prime(p)?;
        if (p as usize) > self.prec() {
            return Err(IflError::TruncationTooShort(format!("a({p}) is beyond the truncation")));
        }
        let nm = self.a(p as usize).norm();
        if nm.is_zero() {
            return Ok(false);
        }
        let pb = BigInt::from(p);
        Ok(!nm.numer().is_multiple_of(&pb) && !nm.denom().is_multiple_of(&pb))
    }

    /// f|[l](z) = f(lz): a(n) = a(n/l), zero for l not dividing n; level N l.
    pub fn v_operator(&self, l: u64) -> Result<Self> {
        if l == 0 {
            return Err(IflError::BadInput("V(0) is undefined".into()));
        }
        let out_prec = self.prec() * l as usize;
        let coeffs = (0..=out_prec)
            .map(|n| if n % l as usize == 0 { self.a(n / l as usize).clone() } else { Cyc::zero() })
            .collect();
        let mut out = self.same_shape(coeffs);
        out.level = self.level * l;
        out.nebentypus = self.nebentypus.induce(out.level)?;
        Ok(out)
    }

    /// a(n) -> eta(n) a(n), no level bookkeeping.
    pub fn twist_coeffs(&self, eta: &DirichletCharacter) -> Vec<Cyc> {
        self.coeffs.iter().enumerate().map(|(n, c)| eta.value(n as i64).mul(c)).collect()
    }

    /// The twist at level M; M must be a multiple of twist_level(psi, eta, N).
    pub fn twist_map(&self, eta: &DirichletCharacter, m: u64) -> Result<Self> {
        let need = twist_level(&self.nebentypus, eta, self.level);
        if m == 0 || !m.is_multiple_of(need) {
            return Err(IflError::BadLevel(format!("twist needs a multiple of {need}, got {m}")));
        }
        let neb = self.nebentypus.mul(&eta.pow(2)).primitive_part().induce(m)?;
        Ok(QExpansion {
            coeffs: self.twist_coeffs(eta),
            weight: self.weight,
            level: m,
            nebentypus: neb,
            label: format!("{} x {}", self.label, eta.label()),
        })
    }

    /// Difference over the common precision.
    pub fn sub(&self, o: &Self) -> Self {
        let p = self.prec().min(o.prec());
        self.same_shape((0..=p).map(|n| self.a(n).sub(o.a(n))).collect())
    }

    pub fn scale(&self, c: &Cyc) -> Self {
        self.same_shape(self.coeffs.iter().map(|x| x.mul(c)).collect())
    }

    /// Coefficient equality on the common range a(0..=min prec).
    pub fn agrees_with(&self, o: &Self) -> bool {
        self.first_difference(o).is_none()
    }

    pub fn first_difference(&self, o: &Self) -> Option<usize> {
        let p = self.prec().min(o.prec());
        (0..=p).find(|&n| self.a(n) != o.a(n))
    }

    /// f|T(l) = a(l) f on the valid range (needs a(0) * (1 + psi(l) l^(k-1)) = a(l) a(0) too).
    pub fn is_hecke_eigen(&self, l: u64) -> Result<bool> {
        if (l as usize) > self.prec() {
            return Err(IflError::TruncationTooShort(format!("a({l}) is beyond the truncation")));
        }
        let t = self.hecke_t(l)?;
        let lam = self.a(l as usize);
        Ok((0..=t.prec()).all(|m| t.a(m) == &lam.mul(self.a(m))))
    }

    /// One literal level-raising step f - a(l) f|[l], level N l.
    pub fn level_raise_step(&self, l: u64) -> Result<Self> {
        check_prime(l)?;
        if (l as usize) > self.prec() {
            return Err(IflError::TruncationTooShort(format!("a({l}) is beyond the truncation")));
        }
        let lam = self.a(l as usize).clone();
        let v = self.v_operator(l)?;
        let mut out = self.sub(&v.scale(&lam));
        out.level = v.level;
        out.nebentypus = v.nebentypus;
        Ok(out)
    }

    /// f_M: level M form with the same T(n)-eigenvalues for n prime to M/N, killed by U(l) for l | M/N.
    pub fn build_fm(&self, m: u64) -> Result<Self> {
        if m == 0 || !m.is_multiple_of(self.level) {
            return Err(IflError::BadLevel(format!("{} does not divide {m}", self.level)));
        }
        let mut g = self.clone();
        for (l, mut e) in factorize(m / self.level) {
            if (l as usize) > g.prec() {
                return Err(IflError::TruncationTooShort(format!("a({l}) is beyond the truncation")));
            }
            if !g.is_hecke_eigen(l)? {
                return Err(IflError::NotEigen(format!("f is not a T({l}) eigenform on the known range")));
            }
            while e > 0 {
                let lam = g.a(l as usize).clone();
                if g.level.is_multiple_of(l) {
                    let v = g.v_operator(l)?;
                    let level = v.level;
                    g = g.sub(&v.scale(&lam));
                    g.level = level;
                    e -= 1;
                } else if e >= 2 {
                    let eps = g.diamond_factor(l);
                    let v1 = g.v_operator(l)?;
                    let v2 = v1.v_operator(l)?;
                    let level = v2.level;
                    g = g.sub(&v1.scale(&lam)).sub(&v2.scale(&eps.neg()));
                    g.level = level;
                    e -= 2;
                } else {
                    return Err(IflError::LevelTooShallow(format!(
                        "{l} does not divide level {} and only one factor of {l} is available",
                        g.level
                    )));
                }
                g.nebentypus = self.nebentypus.induce(g.level)?;
            }
        }
        g.label = format!("{}_M{m}", self.label);
        Ok(g)
    }

    /// CSV with header lines key=value (weight, level, field, nebentypus as a Kronecker discriminant
    /// or `modulus:g=e/k;...`), then `n,value` rows for every n from 1 up to the truncation.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut weight = 2u32;
        let mut level = 1u64;
        let mut field = 1u64;
        let mut neb: Option<DirichletCharacter> = None;
        let mut label = String::new();
        let mut rows: Vec<(usize, String)> = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() || line.eq_ignore_ascii_case("n,value") {
                continue;
            }
            let bad = |what: &str| IflError::Parse(format!("line {}: bad {what}: '{line}'", ln + 1));
            if let Some((k, v)) = line.split_once('=') {
                if !line.contains(',') || k.trim() == "nebentypus" {
                    let v = v.trim();
                    match k.trim() {
                        "weight" => weight = v.parse().map_err(|_| bad("weight"))?,
                        "level" => level = v.parse().map_err(|_| bad("level"))?,
                        "field" => field = v.parse().map_err(|_| bad("field"))?,
                        "label" => label = v.to_string(),
                        "nebentypus" => neb = Some(parse_nebentypus(v).map_err(|_| bad("nebentypus"))?),
                        _ => return Err(bad("header key")),
                    }
                    continue;
                }
            }
            let (n, v) = line.split_once(',').ok_or_else(|| bad("row"))?;
            let n: usize = n.trim().parse().map_err(|_| bad("index"))?;
            rows.push((n, v.trim().to_string()));
        }
        if field == 0 || level == 0 {
            return Err(IflError::Parse("field and level must be positive".into()));
        }
        rows.sort_by_key(|r| r.0);
        let top = rows.last().map(|r| r.0).unwrap_or(0);
        let mut coeffs = vec![None; top + 1];
        for (n, v) in rows {
            if coeffs[n].is_some() {
                return Err(IflError::Parse(format!("a({n}) given twice")));
            }
            coeffs[n] = Some(Cyc::parse(&v, field)?);
        }
        if coeffs[0].is_none() {
            coeffs[0] = Some(Cyc::zero());
        }
        let coeffs: Vec<Cyc> = coeffs
            .into_iter()
            .enumerate()
            .map(|(n, c)| c.ok_or_else(|| IflError::Parse(format!("a({n}) is missing"))))
            .collect::<Result<_>>()?;
        let neb = neb.unwrap_or_else(|| DirichletCharacter::trivial(1));
        if !level.is_multiple_of(neb.conductor()) {
            return Err(IflError::Parse("nebentypus conductor does not divide the level".into()));
        }
        let neb = neb.primitive_part();
        Ok(Self::new(coeffs, weight, level, &neb)
            .map_err(|e| IflError::Parse(e.to_string()))?
            .with_label(&label))
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("weight={}\nlevel={}\nfield={}\n", self.weight, self.level, self.field());
        if !self.nebentypus.is_trivial() {
            let imgs: Vec<String> =
                self.nebentypus.generator_images().iter().map(|(g, e, k)| format!("{g}={e}/{k}")).collect();
            s.push_str(&format!("nebentypus={}:{}\n", self.nebentypus.modulus, imgs.join(";")));
        }
        if !self.label.is_empty() {
            s.push_str(&format!("label={}\n", self.label));
        }
        s.push_str("n,value\n");
        for (n, c) in self.coeffs.iter().enumerate().skip(1) {
            s.push_str(&format!("{n},{c}\n"));
        }
        s
    }

    pub fn summary(&self, shown: usize) -> QExpansionSummary {
        QExpansionSummary {
            label: self.label.clone(),
            weight: self.weight,
            level: self.level,
            precision: self.prec(),
            field: self.field(),
            nebentypus: self.nebentypus.label(),
            coefficients: self.coeffs.iter().take(shown + 1).map(|c| c.to_string()).collect(),
        }
    }
}

fn parse_nebentypus(v: &str) -> Result<DirichletCharacter> {
    if let Ok(d) = v.parse::<i64>() {
        let m = d.unsigned_abs().max(1);
        let m = if d % 4 == 0 || (d.rem_euclid(4) == 1) { m } else { 4 * m };
        return Ok(DirichletCharacter::kronecker(d, m)?.primitive_part());
    }
    let (m, imgs) = v.split_once(':').ok_or_else(|| IflError::Parse("nebentypus".into()))?;
    let text = format!("modulus={}\n{}", m.trim(), imgs.replace(';', "\n"));
    DirichletCharacter::parse(&text)
}

#[derive(Clone, Debug, Serialize)]
pub struct QExpansionSummary {
    pub label: String,
    pub weight: u32,
    pub level: u64,
    pub precision: usize,
    pub field: u64,
    pub nebentypus: String,
    pub coefficients: Vec<String>,
}

/// lcm(L, c(psi)^2, c(psi) c(eta)).
pub fn m_level(psi: &DirichletCharacter, eta: &DirichletCharacter, l: u64) -> u64 {
    let (cp, ce) = (psi.conductor(), eta.conductor());
    lcm(lcm(l, cp * cp), cp * ce)
}

/// m_level together with c(eta)^2 and the modulus of eta: the level at which a twist is taken.
pub fn twist_level(psi: &DirichletCharacter, eta: &DirichletCharacter, l: u64) -> u64 {
    let ce = eta.conductor();
    lcm(lcm(m_level(psi, eta, l), ce * ce), eta.modulus)
}

/// prod_{n >= 1} (1 - q^n) to q^prec via Euler's pentagonal numbers.
fn euler_product(prec: usize) -> Vec<BigInt> {
    let mut v = vec![BigInt::zero(); prec + 1];
    v[0] = BigInt::one();
    let mut k: i64 = 1;
    loop {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let g1 = (k * (3 * k - 1) / 2) as usize;
        let g2 = (k * (3 * k + 1) / 2) as usize;
        if g1 > prec {
            break;
        }
        v[g1] += sign;
        if g2 <= prec {
            v[g2] += sign;
        }
        k += 1;
    }
    v
}

/// A^e for A(0) = 1: n B_n = sum_{k=1}^n ((e+1)k - n) A_k B_{n-k}.
pub fn series_power(a: &[BigInt], e: i64) -> Vec<BigInt> {
    let mut b = vec![BigInt::zero(); a.len()];
    b[0] = BigInt::one();
    for n in 1..a.len() {
        let mut s = BigInt::zero();
        for k in 1..=n {
            if a[k].is_zero() {
                continue;
            }
            let c = (e + 1) * k as i64 - n as i64;
            s += &a[k] * &b[n - k] * c;
        }
        b[n] = s / BigInt::from(n);
    }
    b
}

fn series_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let n = a.len().min(b.len());
    let mut out = vec![BigInt::zero(); n];
    for (i, x) in a.iter().enumerate().take(n) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// q^(sum d e / 24) prod (1 - q^(dn))^e to q^prec, with weight, level and quadratic nebentypus.
pub fn eta_product_expand(spec: &[(u64, i64)], prec: usize) -> Result<QExpansion> {
    if prec > MAX_ETA_PRECISION {
        return Err(too_large("eta-product precision", prec as u128, MAX_ETA_PRECISION as u128));
    }
    if prec == 0 {
        return Err(IflError::BadInput("precision must be positive".into()));
    }
    if spec.iter().any(|&(d, _)| d == 0) {
        return Err(IflError::BadInput("eta-product factors need d >= 1".into()));
    }
    let offset: i64 = spec.iter().map(|&(d, e)| d as i64 * e).sum();
    if offset <= 0 || offset % 24 != 0 {
        return Err(IflError::NonIntegralWeightOffset(format!("sum d*e / 24 = {offset}/24")));
    }
    let offset = (offset / 24) as usize;
    let esum: i64 = spec.iter().map(|&(_, e)| e).sum();
    if esum <= 0 || esum % 2 != 0 {
        return Err(IflError::Unsupported(format!("weight {esum}/2 is not a positive integer")));
    }
    let weight = (esum / 2) as u32;
    let mut series = vec![BigInt::zero(); prec + 1];
    series[0] = BigInt::one();
    if offset <= prec {
        let len = prec - offset;
        for &(d, e) in spec {
            let base = euler_product(len / d as usize);
            let pw = series_power(&base, e);
            let mut spread = vec![BigInt::zero(); len + 1];
            for (i, c) in pw.into_iter().enumerate() {
                spread[i * d as usize] = c;
            }
            series = series_mul(&series[..=len], &spread);
        }
        let mut shifted = vec![BigInt::zero(); prec + 1];
        for (i, c) in series.into_iter().enumerate() {
            shifted[i + offset] = c;
        }
        series = shifted;
    } else {
        series = vec![BigInt::zero(); prec + 1];
    }
    let dl = spec.iter().fold(1, |acc, &(d, _)| lcm(acc, d));
    let level = (1..)
        .map(|t| dl * t)
        .find(|&n| spec.iter().map(|&(d, e)| (n / d) as i64 * e).sum::<i64>() % 24 == 0)
        .expect("24 lcm(d) always works");
    let mut disc: i64 = if weight.is_multiple_of(2) { 1 } else { -1 };
    for &(d, e) in spec {
        if e % 2 != 0 {
            disc *= d as i64;
        }
    }
    let neb = DirichletCharacter::kronecker(disc, level)?;
    let label = spec.iter().map(|(d, e)| format!("eta({d}z)^{e}")).collect::<Vec<_>>().join("*");
    Ok(QExpansion::new(series.into_iter().map(Cyc::from_bigint).collect(), weight, level, &neb)?.with_label(&label))
}

pub fn delta(prec: usize) -> Result<QExpansion> {
    eta_product_expand(&[(1, 24)], prec)
}

/// eta(4z)^2 eta(8z)^2, weight 2, level 32, CM by Q(i).
pub fn cm_form_32(prec: usize) -> Result<QExpansion> {
    eta_product_expand(&[(4, 2), (8, 2)], prec)
}

/// Teichmuller image of chi(n) in Z/p^a, for chi of order dividing p - 1.
pub fn character_teichmuller(chi: &DirichletCharacter, n: i64, p: u64, a: u32) -> Result<u64> {
    let m = p.pow(a);
    match chi.value_exp(n) {
        None => Ok(0),
        Some((e, k)) => {
            if !(p - 1).is_multiple_of(k) {
                return Err(IflError::Unsupported(format!("character of order {k} needs roots of unity beyond Z_{p}")));
            }
            let g = (2..p.max(3))
                .find(|&g| factorize(p - 1).iter().all(|&(r, _)| pow_mod(g, (p - 1) / r, p) != 1))
                .unwrap_or(1);
            let root = pow_mod(g, (p - 1) / k, p);
            Ok(pow_mod(teichmuller_int(root, p, a), e, m))
        }
    }
}

/// A truncated q-expansion with coefficients in (Z/p^a)[T]/(T^b) and Lambda-adic Hecke action.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaExpansion {
    pub ring: Arc<Ring>,
    pub coeffs: Vec<Vec<u64>>,
    pub chi: DirichletCharacter,
}

impl LambdaExpansion {
    pub fn new(ring: &Arc<Ring>, coeffs: Vec<Vec<u64>>, chi: &DirichletCharacter) -> Result<Self> {
        if ring.kind != RingKind::TruncIwasawa {
            return Err(IflError::Unsupported("Lambda-adic expansions need a truncated Iwasawa algebra".into()));
        }
        if coeffs.len() < 2 {
            return Err(IflError::BadInput("a q-expansion needs at least a(1)".into()));
        }
        let coeffs = coeffs.into_iter().map(|c| ring.canon(c)).collect();
        Ok(LambdaExpansion { ring: ring.clone(), coeffs, chi: chi.clone() })
    }

    pub fn prec(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// kappa(<l>) chi(l) l^-1, zero when l divides the character modulus; U(p) at l = p.
    pub fn hecke_factor(&self, l: u64) -> Result<Vec<u64>> {
        let r = &self.ring;
        if l.is_multiple_of(r.p) || gcd(l, self.chi.modulus) != 1 {
            return Ok(r.zero());
        }
        let k = kappa(l, r)?;
        let c = character_teichmuller(&self.chi, l as i64, r.p, r.a)?;
        let linv = r.inv(&r.from_int((l % r.modulus) as i64))?;
        Ok(r.mul(&r.scale(&k, c), &linv))
    }

    /// a(m, G|T(l)) = a(ml) + kappa(<l>) chi(l) l^-1 a(m/l).
    pub fn hecke_t(&self, l: u64) -> Result<Self> {
        check_prime(l)?;
        let out_prec = shorten(self.prec(), l, "T(l)")?;
        let f = self.hecke_factor(l)?;
        let r = &self.ring;
        let coeffs = (0..=out_prec)
            .map(|m| {
                let mut c = self.coeffs[m * l as usize].clone();
                if m % l as usize == 0 {
                    c = r.add(&c, &r.mul(&f, &self.coeffs[m / l as usize]));
                }
                c
            })
            .collect();
        Ok(LambdaExpansion { coeffs, ..self.clone() })
    }

    pub fn u_p(&self) -> Result<Self> {
        let p = self.ring.p;
        let out_prec = shorten(self.prec(), p, "U(p)")?;
        Ok(LambdaExpansion { coeffs: (0..=out_prec).map(|m| self.coeffs[m * p as usize].clone()).collect(), ..self.clone() })
    }

    /// The U(p)-eigenvalue candidate a(p) is a unit.
    pub fn is_ordinary(&self) -> Result<bool> {
        let p = self.ring.p as usize;
        if p > self.prec() {
            return Err(IflError::TruncationTooShort(format!("a({p}) is beyond the truncation")));
        }
        Ok(self.ring.is_unit(&self.coeffs[p]))
    }
}

/// Rational integer value of a coefficient, if it has one.
pub fn as_integer(c: &Cyc) -> Option<BigInt> {
    c.as_rational().filter(|q| q.is_integer()).map(|q| q.to_integer())
}

pub fn as_i64(c: &Cyc) -> Option<i64> {
    as_integer(c).and_then(|z| z.to_i64())
}

pub fn is_negative_rational(c: &Cyc) -> bool {
    c.as_rational().is_some_and(|q| q.is_negative())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::primes_up_to;
    use rand::{Rng, SeedableRng};

    #[test]
    fn delta_coefficients() {
        let d = delta(100).unwrap();
        assert_eq!((d.weight, d.level), (12, 1));
        assert!(d.nebentypus.is_trivial());
        let ints: Vec<i64> = (0..8).map(|n| as_i64(d.a(n)).unwrap()).collect();
        assert_eq!(ints, vec![0, 1, -24, 252, -1472, 4830, -6048, -16744]);
        assert_eq!(d.a(6), &d.a(2).mul(d.a(3)));
        assert_eq!(as_i64(d.a(100)).unwrap(), 37_534_859_200);
        let t2 = d.hecke_t(2).unwrap();
        assert_eq!(t2.prec(), 50);
        assert_eq!(as_i64(t2.a(1)).unwrap(), -24);
        assert!(d.is_hecke_eigen(2).unwrap() && d.is_hecke_eigen(5).unwrap());
        assert!(matches!(eta_product_expand(&[], 10), Err(IflError::NonIntegralWeightOffset(_))));
        assert!(matches!(eta_product_expand(&[(1, 12)], 10), Err(IflError::NonIntegralWeightOffset(_))));
    }

    #[test]
    fn cm_form() {
        let f = cm_form_32(200).unwrap();
        assert_eq!((f.weight, f.level), (2, 32));
        assert!(f.nebentypus.is_trivial());
        assert_eq!(as_i64(f.a(1)).unwrap(), 1);
        for p in primes_up_to(200) {
            if p % 4 == 3 {
                assert!(f.a(p as usize).is_zero(), "a({p})");
            }
        }
        assert_eq!(as_i64(f.a(5)).unwrap(), -2);
        assert_eq!(as_i64(f.a(13)).unwrap(), 6);
    }

    #[test]
    fn operators() {
        let d = delta(60).unwrap();
        let v = d.v_operator(2).unwrap();
        assert_eq!(v.prec(), 120);
        assert_eq!(v.a(2), d.a(1));
        assert!(v.a(3).is_zero());
        assert_eq!(v.level, 2);
        // f|[l]|U(l) = f
        assert!(v.u_p(2).unwrap().agrees_with(&d));
        assert!(matches!(d.hecke_t(61), Err(IflError::TruncationTooShort(_))));
        // T(n)T(m) = T(m)T(n) for coprime n, m and T(6) = T(2)T(3)
        let a = d.hecke_tn(2).unwrap().hecke_tn(3).unwrap();
        let b = d.hecke_tn(3).unwrap().hecke_tn(2).unwrap();
        assert!(a.agrees_with(&b));
        assert!(a.agrees_with(&d.hecke_tn(6).unwrap()));
        assert!(d.hecke_tn(5).unwrap().agrees_with(&d.hecke_t(5).unwrap()));
        assert!(d.is_ordinary(11).unwrap());
        assert!(!d.is_ordinary(2).unwrap());
    }

    #[test]
    fn twisting() {
        let d = delta(200).unwrap();
        let triv = DirichletCharacter::trivial(1);
        assert_eq!(d.twist_map(&triv, 1).unwrap().coeffs, d.coeffs);
        let m4 = DirichletCharacter::kronecker(-4, 4).unwrap();
        assert!(matches!(d.twist_map(&m4, 4), Err(IflError::BadLevel(_))));
        let tw = d.twist_map(&m4, 16).unwrap();
        assert!(tw.a(2).is_zero());
        for n in 1..=50u64 {
            let lhs = tw.hecke_tn(n).unwrap();
            let rhs = d.hecke_tn(n).unwrap();
            let rhs = rhs.same_shape(rhs.twist_coeffs(&m4)).scale(&m4.value(n as i64));
            assert!(lhs.agrees_with(&rhs), "n = {n}");
        }
        // twisting twice by a quadratic character
        let twice = tw.twist_map(&m4, 16).unwrap();
        for n in (1..=200).filter(|n| n % 2 == 1) {
            assert_eq!(twice.a(n), d.a(n));
        }
    }

    #[test]
    fn m_levels() {
        let t = DirichletCharacter::trivial(1);
        assert_eq!(m_level(&t, &t, 7), 7);
        let psi = DirichletCharacter::kronecker(-4, 4).unwrap();
        let eta = DirichletCharacter::kronecker(-3, 3).unwrap();
        assert_eq!(m_level(&psi, &eta, 4), 48);
    }

    #[test]
    fn f_m_construction() {
        let d = delta(100).unwrap();
        assert_eq!(d.build_fm(1).unwrap().coeffs, d.coeffs);
        let step = d.level_raise_step(2).unwrap();
        assert!(step.a(2).is_zero());
        assert!(step.hecke_t(2).unwrap().a(1).is_zero());
        assert!(!step.u_p(2).unwrap().a(2).is_zero());
        assert!(matches!(d.build_fm(2), Err(IflError::LevelTooShallow(_))));
        let f4 = d.build_fm(4).unwrap();
        assert_eq!(f4.level, 4);
        assert!(f4.u_p(2).unwrap().coeffs.iter().all(Cyc::is_zero));
        for l in [3u64, 5, 7] {
            assert!(f4.hecke_t(l).unwrap().agrees_with(&f4.scale(d.a(l as usize))));
        }
        let f8 = d.build_fm(8).unwrap();
        assert!(f8.u_p(2).unwrap().coeffs.iter().all(Cyc::is_zero));
        // lambda = 0: already killed
        let again = f4.build_fm(8).unwrap();
        assert_eq!(again.coeffs, f4.coeffs);
        let mut bad = d.clone();
        bad.coeffs[4] = Cyc::from_int(1);
        assert!(matches!(bad.build_fm(4), Err(IflError::NotEigen(_))));
    }

    #[test]
    fn csv_round_trip() {
        let f = cm_form_32(40).unwrap().with_label("cm32");
        let g = QExpansion::parse_csv(&f.to_csv()).unwrap();
        assert_eq!(g, f);
        let chi = DirichletCharacter::all(7).into_iter().find(|c| c.order == 3).unwrap();
        let h = QExpansion::new(
            (0..12).map(|n| chi.value(n)).collect(),
            2,
            7,
            &chi,
        )
        .unwrap();
        let back = QExpansion::parse_csv(&h.to_csv()).unwrap();
        assert_eq!(back.coeffs, h.coeffs);
        assert_eq!(back.nebentypus, h.nebentypus);
        assert!(QExpansion::parse_csv("1,1\n3,2\n").is_err());
        assert!(QExpansion::parse_csv("1,x\n").is_err());
    }

    #[test]
    fn lambda_adic_hecke() {
        let r = Ring::trunc_iwasawa(3, 2, 3).unwrap();
        let chi = DirichletCharacter::kronecker(-4, 4).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let coeffs: Vec<Vec<u64>> =
                (0..=60).map(|_| (0..3).map(|_| rng.gen_range(0..9)).collect()).collect();
            let g = LambdaExpansion::new(&r, coeffs, &chi).unwrap();
            for l in [5u64, 7] {
                let t = g.hecke_t(l).unwrap();
                let k = kappa(l, &r).unwrap();
                let c = character_teichmuller(&chi, l as i64, 3, 2).unwrap();
                let linv = r.inv(&r.from_int(l as i64)).unwrap();
                let expect = r.add(&g.coeffs[(l * l) as usize], &r.mul(&r.mul(&r.scale(&k, c), &linv), &g.coeffs[1]));
                assert_eq!(t.coeffs[l as usize], expect);
                assert_eq!(t.coeffs[1], g.coeffs[l as usize]);
            }
        }
        assert_eq!(character_teichmuller(&chi, 3, 3, 2).unwrap(), 8);
    }
}
