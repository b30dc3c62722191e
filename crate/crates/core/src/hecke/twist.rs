//! Conjugate self-twists: Ribet's cocycle, the twist diagram check and exhaustive detection.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use super::characters::{gauss_sum, CharacterSummary, DirichletCharacter};
use super::cyclotomic::Cyc;
use super::qexp::QExpansion;
use crate::arith::{factorize, gcd, is_prime, primes_up_to};
use crate::error::{too_large, IflError, Result};
use crate::rings::{ring_automorphisms, Ring, RingMorphism};

pub const MIN_PRIMES: usize = 10;

fn exp_label(a: i64, field: u64) -> String {
    if field <= 1 || a.rem_euclid(field as i64) == 1 {
        "id".into()
    } else {
        format!("z{field}->z{field}^{}", a.rem_euclid(field as i64))
    }
}

/// c(s, t) = G(eta_s^-1) G(eta_t^-1) / G(eta_st^-1), after checking eta_st = eta_s^t eta_t.
/// `tau` is the Galois exponent of t acting on character values.
pub fn ribet_cocycle(
    eta_s: &DirichletCharacter,
    eta_t: &DirichletCharacter,
    eta_st: &DirichletCharacter,
    tau: i64,
) -> Result<Cyc> {
    let expect = eta_s.galois(tau).mul(eta_t);
    if !expect.primitive_part().same_as(&eta_st.primitive_part()) {
        return Err(IflError::IncompatibleCharacters(format!(
            "{} is not {}^t * {}",
            eta_st.label(),
            eta_s.label(),
            eta_t.label()
        )));
    }
    let g = |e: &DirichletCharacter| gauss_sum(&e.inverse());
    g(eta_s).mul(&g(eta_t)).div(&g(eta_st))
}

/// Gamma as Galois exponents mod `field` paired with characters eta_s.
#[derive(Clone, Debug)]
pub struct TwistTable {
    pub field: u64,
    pub elements: Vec<(i64, DirichletCharacter)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CocycleCheck {
    pub elements: Vec<String>,
    pub values: Vec<Vec<String>>,
    pub triples_checked: usize,
    pub identity_holds: bool,
    pub first_failure: Option<(usize, usize, usize)>,
}

impl TwistTable {
    fn index_of(&self, a: i64) -> Result<usize> {
        let f = self.field.max(1) as i64;
        self.elements
            .iter()
            .position(|(b, _)| b.rem_euclid(f) == a.rem_euclid(f))
            .ok_or_else(|| IflError::BadInput(format!("exponent {a} is not in the table (not closed)")))
    }

    /// All values c(s, t) and the identity s(c(t, u)) c(s, tu) = c(st, u) c(s, t) on every triple.
    pub fn check(&self) -> Result<CocycleCheck> {
        let n = self.elements.len();
        let f = self.field.max(1) as i64;
        let prod = |i: usize, j: usize| self.index_of(self.elements[i].0 * self.elements[j].0 % f);
        let mut c = vec![vec![Cyc::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let k = prod(i, j)?;
                c[i][j] = ribet_cocycle(&self.elements[i].1, &self.elements[j].1, &self.elements[k].1, self.elements[j].0)?;
            }
        }
        let mut first_failure = None;
        let mut triples = 0;
        for s in 0..n {
            for t in 0..n {
                for u in 0..n {
                    triples += 1;
                    let lhs = c[t][u].galois(self.elements[s].0).mul(&c[s][prod(t, u)?]);
                    let rhs = c[prod(s, t)?][u].mul(&c[s][t]);
                    if lhs != rhs && first_failure.is_none() {
                        first_failure = Some((s, t, u));
                    }
                }
            }
        }
        Ok(CocycleCheck {
            elements: self.elements.iter().map(|(a, e)| format!("{}:{}", exp_label(*a, self.field), e.label())).collect(),
            values: c.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect(),
            triples_checked: triples,
            identity_holds: first_failure.is_none(),
            first_failure,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TwistDiagramReport {
    pub holds: bool,
    pub level_requested: u64,
    pub level_used: u64,
    pub checked_up_to: usize,
    pub first_violation: Option<usize>,
}

/// Smallest multiple of M reachable by build_fm from level N.
pub fn admissible_level(n: u64, m: u64) -> u64 {
    let mut out = m;
    for (l, e) in factorize(m / n) {
        if e == 1 && !n.is_multiple_of(l) {
            out *= l;
        }
    }
    out
}

/// sigma(a(n, f_M)) = eta(n) a(n, f_M) for every known n, with f_M from build_fm.
pub fn verify_twist_diagram(f: &QExpansion, m: u64, sigma: i64, eta: &DirichletCharacter) -> Result<TwistDiagramReport> {
    if m == 0 || !m.is_multiple_of(f.level) {
        return Err(IflError::BadLevel(format!("{} does not divide {m}", f.level)));
    }
    let used = admissible_level(f.level, m);
    let fm = f.build_fm(used)?;
    let first_violation =
        (1..=fm.prec()).find(|&n| fm.a(n).galois(sigma) != eta.value(n as i64).mul(fm.a(n)));
    Ok(TwistDiagramReport {
        holds: first_violation.is_none(),
        level_requested: m,
        level_used: used,
        checked_up_to: fm.prec(),
        first_violation,
    })
}

/// The level c(eta) N^2 at which the diagram is stated.
pub fn diagram_level(f: &QExpansion, eta: &DirichletCharacter) -> u64 {
    eta.conductor() * f.level * f.level
}

#[derive(Clone, Debug, Serialize)]
pub struct DetectedTwist {
    pub sigma: String,
    pub sigma_exponent: i64,
    pub eta: CharacterSummary,
    pub verified_primes: Vec<u64>,
    pub validation_primes: Vec<u64>,
    pub validated: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TwistReport {
    pub form: String,
    pub field: u64,
    pub character_moduli_bound: u64,
    pub primes: Vec<u64>,
    pub candidates_examined: usize,
    pub detected: Vec<DetectedTwist>,
    pub cm_flag: bool,
}

/// Primitive characters of conductor at most `bound`, trivial first.
pub fn primitive_characters(bound: u64) -> Vec<DirichletCharacter> {
    (1..=bound.max(1))
        .flat_map(|c| DirichletCharacter::all(c).into_iter().filter(|x| x.is_primitive()))
        .collect()
}

/// Galois exponents of Q(zeta_F), one per distinct action on the coefficients.
fn distinct_sigmas(f: &QExpansion) -> Vec<i64> {
    let field = f.field();
    if field <= 2 {
        return vec![1];
    }
    let mut seen: BTreeMap<Vec<String>, i64> = BTreeMap::new();
    for a in (1..field).filter(|&a| gcd(a, field) == 1) {
        let key: Vec<String> = f.coeffs.iter().map(|c| c.galois(a as i64).to_string()).collect();
        seen.entry(key).or_insert(a as i64);
    }
    let mut v: Vec<i64> = seen.into_values().collect();
    v.sort_unstable();
    v
}

fn twist_holds(f: &QExpansion, sigma: i64, eta: &DirichletCharacter, p: u64) -> bool {
    let a = f.a(p as usize);
    a.galois(sigma) == eta.value(p as i64).mul(a)
}

/// Exhaustive search over (sigma, eta), eta primitive of conductor <= bound, verified on `primes`
/// (minus those dividing the level or c(eta)) and re-checked on the remaining primes up to the truncation.
pub fn detect_self_twists(f: &QExpansion, bound: u64, primes: &[u64], cap: u128) -> Result<TwistReport> {
    let usable: Vec<u64> = primes.iter().copied().filter(|&p| is_prime(p) && (p as usize) <= f.prec()).collect();
    if usable.len() < MIN_PRIMES {
        return Err(IflError::BadInput(format!(
            "insufficient primes: {} prime-indexed coefficients available, need {MIN_PRIMES}",
            usable.len()
        )));
    }
    let sigmas = distinct_sigmas(f);
    let etas = primitive_characters(bound);
    let work = (sigmas.len() * etas.len()) as u128 * usable.len() as u128;
    if work > cap {
        return Err(too_large("self-twist search", work, cap));
    }
    let fresh: Vec<u64> =
        primes_up_to(f.prec() as u64).into_iter().filter(|p| !usable.contains(p)).collect();
    let mut detected = Vec::new();
    for &s in &sigmas {
        for eta in &etas {
            let bad = |p: &u64| f.level.is_multiple_of(*p) || eta.modulus % p == 0;
            let verify: Vec<u64> = usable.iter().copied().filter(|p| !bad(p)).collect();
            if verify.is_empty() || !verify.iter().all(|&p| twist_holds(f, s, eta, p)) {
                continue;
            }
            let validation: Vec<u64> = fresh.iter().copied().filter(|p| !bad(p)).collect();
            let validated = validation.iter().all(|&p| twist_holds(f, s, eta, p));
            detected.push(DetectedTwist {
                sigma: exp_label(s, f.field()),
                sigma_exponent: s,
                eta: eta.summary(),
                verified_primes: verify,
                validation_primes: validation,
                validated,
            });
        }
    }
    let cm_flag = detected.iter().any(|d| d.sigma == "id" && d.eta.order > 1);
    Ok(TwistReport {
        form: f.label.clone(),
        field: f.field(),
        character_moduli_bound: bound,
        primes: usable,
        candidates_examined: sigmas.len() * etas.len(),
        detected,
        cm_flag,
    })
}

/// Psi: Gamma -> Gamma_Q keeps eta; injective when distinct family twists have distinct characters
/// and each appears among the specialization's twists.
pub fn gamma_map_injective(family: &TwistReport, special: &TwistReport) -> bool {
    let mut seen = std::collections::BTreeSet::new();
    family.detected.iter().all(|d| {
        seen.insert(d.eta.label.clone()) && special.detected.iter().any(|s| s.eta.label == d.eta.label)
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FiniteTwist {
    pub sigma: String,
    pub eta: CharacterSummary,
}

#[derive(Clone, Debug, Serialize)]
pub struct FiniteTwistReport {
    pub ring: String,
    pub primes: Vec<u64>,
    pub detected: Vec<FiniteTwist>,
    pub cm_flag: bool,
}

/// Element of exact multiplicative order k in a finite ring, if any.
fn root_of_unity(ring: &Arc<Ring>, k: u64) -> Result<Option<Vec<u64>>> {
    let o = ring.ops()?;
    for u in o.all().filter(|&u| o.is_unit(u)) {
        let x = o.elem(u).to_vec();
        if ring.pow(&x, k) == ring.one() && factorize(k).iter().all(|&(r, _)| ring.pow(&x, k / r) != ring.one()) {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

/// Detection for coefficients a(p) in a finite ring; sigma runs over ring_automorphisms and
/// character values are mapped through a fixed choice of roots of unity.
pub fn detect_self_twists_finite(
    ring: &Arc<Ring>,
    ap: &[(u64, Vec<u64>)],
    bound: u64,
    cap: u128,
) -> Result<FiniteTwistReport> {
    if ap.len() < MIN_PRIMES {
        return Err(IflError::BadInput(format!("insufficient primes: {} given, need {MIN_PRIMES}", ap.len())));
    }
    let autos: Vec<RingMorphism> = ring_automorphisms(ring, cap)?;
    let etas = primitive_characters(bound);
    let work = (autos.len() * etas.len() * ap.len()) as u128;
    if work > cap {
        return Err(too_large("self-twist search", work, cap));
    }
    let mut roots: BTreeMap<u64, Option<Vec<u64>>> = BTreeMap::new();
    let mut detected = Vec::new();
    for s in &autos {
        'eta: for eta in &etas {
            let k = eta.order;
            if let std::collections::btree_map::Entry::Vacant(e) = roots.entry(k) {
                e.insert(root_of_unity(ring, k)?);
            }
            let Some(z) = roots[&k].clone() else { continue };
            for (p, a) in ap {
                if eta.modulus % p == 0 {
                    continue;
                }
                let (e, _) = eta.value_exp(*p as i64).expect("unit");
                let lhs = s.apply(a);
                let rhs = ring.mul(&ring.pow(&z, e), a);
                if lhs != ring.canon(rhs) {
                    continue 'eta;
                }
            }
            detected.push(FiniteTwist { sigma: s.label.clone(), eta: eta.summary() });
        }
    }
    let cm_flag = detected.iter().any(|d| {
        d.eta.order > 1 && autos.iter().any(|a| a.is_identity() && a.label == d.sigma)
    });
    Ok(FiniteTwistReport { ring: ring.label(), primes: ap.iter().map(|x| x.0).collect(), detected, cm_flag })
}

/// eta^2 = chi^sigma chi^-1 as characters.
pub fn eta_quadratic_constraint(sigma: i64, chi: &DirichletCharacter, eta: &DirichletCharacter) -> bool {
    let rhs = chi.galois(sigma).mul(&chi.inverse());
    eta.pow(2).primitive_part().same_as(&rhs.primitive_part())
}

#[derive(Clone, Debug, Serialize)]
pub struct BEllReport {
    pub b_ell: String,
    pub invariant: Vec<(i64, bool)>,
}

/// b_l = a(l)^2 / det(Frob_l) and whether sigma(b_l) = b_l for each supplied Galois exponent.
pub fn b_ell_invariance(a_ell: &Cyc, det_ell: &Cyc, sigmas: &[i64]) -> Result<BEllReport> {
    if det_ell.is_zero() {
        return Err(IflError::NonUnit("det(Frob_l) is zero".into()));
    }
    let b = a_ell.mul(a_ell).div(det_ell)?;
    Ok(BEllReport { b_ell: b.to_string(), invariant: sigmas.iter().map(|&s| (s, b.galois(s) == b)).collect() })
}

#[derive(Clone, Debug)]
pub struct NebentypusReduction {
    pub psi: DirichletCharacter,
    pub chi2: DirichletCharacter,
    pub xi: DirichletCharacter,
    pub n: u64,
}

/// chi = chi_2 xi (2-power and odd order 2n - 1 parts); psi = xi^-n so that psi^2 chi = chi_2.
pub fn quadratic_nebentypus_reduction(chi: &DirichletCharacter) -> Result<NebentypusReduction> {
    let ord = chi.order;
    let two = 1u64 << ord.trailing_zeros();
    let m = ord / two;
    let inv = |a: u64, md: u64| crate::arith::inv_mod(a % md, md).unwrap_or(0);
    let xi = if m == 1 { DirichletCharacter::trivial(chi.modulus) } else { chi.pow((two * inv(two, m)) as i64) };
    let chi2 = if two == 1 { DirichletCharacter::trivial(chi.modulus) } else { chi.pow((m * inv(m, two)) as i64) };
    let n = m.div_ceil(2);
    let psi = xi.pow(-(n as i64));
    let check = psi.pow(2).mul(chi);
    if check != chi2 || !check.order.is_power_of_two() {
        return Err(IflError::HypothesisFailed("psi^2 chi is not the 2-power part".into()));
    }
    Ok(NebentypusReduction { psi, chi2, xi, n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::first_primes;
    use crate::hecke::qexp::{cm_form_32, delta};

    #[test]
    fn ribet_values() {
        let t = DirichletCharacter::trivial(1);
        assert_eq!(ribet_cocycle(&t, &t, &t, 1).unwrap(), Cyc::one());
        let q3 = DirichletCharacter::kronecker(-3, 3).unwrap();
        assert_eq!(ribet_cocycle(&q3, &q3, &t, 1).unwrap(), Cyc::from_int(-3));
        assert!(matches!(ribet_cocycle(&q3, &t, &t, 1), Err(IflError::IncompatibleCharacters(_))));
    }

    #[test]
    fn c2_table() {
        let q3 = DirichletCharacter::kronecker(-3, 3).unwrap();
        let m4 = DirichletCharacter::kronecker(-4, 4).unwrap();
        for (eta, sigma) in [(q3.clone(), -1i64), (m4.clone(), 5), (q3.mul(&m4), 7)] {
            let table = TwistTable { field: 12, elements: vec![(1, DirichletCharacter::trivial(1)), (sigma, eta)] };
            let r = table.check().unwrap();
            assert!(r.identity_holds);
            assert_eq!(r.triples_checked, 8);
        }
    }

    #[test]
    fn diagrams() {
        let d = delta(100).unwrap();
        let t = DirichletCharacter::trivial(1);
        assert!(verify_twist_diagram(&d, 1, 1, &t).unwrap().holds);
        for c in 1..=8 {
            for eta in DirichletCharacter::all(c).into_iter().filter(|e| !e.is_trivial()) {
                let r = verify_twist_diagram(&d, diagram_level(&d, &eta), 1, &eta).unwrap();
                assert!(!r.holds, "{}", eta.label());
            }
        }
        let f = cm_form_32(200).unwrap();
        let m4 = DirichletCharacter::kronecker(-4, 4).unwrap();
        let r = verify_twist_diagram(&f, diagram_level(&f, &m4), 1, &m4).unwrap();
        assert!(r.holds);
        assert_eq!(r.level_used, 4 * 32 * 32);
        assert_eq!(admissible_level(1, 3), 9);
    }

    #[test]
    fn detection() {
        let primes = first_primes(25);
        let d = delta(200).unwrap();
        let r = detect_self_twists(&d, 8, &primes, 1 << 30).unwrap();
        assert_eq!(r.detected.len(), 1);
        assert_eq!(r.detected[0].sigma, "id");
        assert_eq!(r.detected[0].eta.order, 1);
        assert!(!r.cm_flag);
        let f = cm_form_32(200).unwrap();
        let r = detect_self_twists(&f, 8, &primes, 1 << 30).unwrap();
        assert!(r.cm_flag);
        assert!(r.detected.iter().any(|x| x.eta.label == "chi_-4" && x.validated));
        assert!(r.detected.iter().all(|x| x.sigma == "id"));
        let short = QExpansion::from_ints(&[0, 1, -24, 252], 12, 1).unwrap();
        let e = detect_self_twists(&short, 8, &primes, 1 << 30).unwrap_err();
        assert!(e.to_string().contains("insufficient primes"));
    }

    #[test]
    fn detection_with_galois_action() {
        // a(n) = tau(n) for n = 1 mod 4 and i tau(n) for n = 3 mod 4: conjugation pairs with chi_-4
        let m4 = DirichletCharacter::kronecker(-4, 4).unwrap();
        let d = delta(120).unwrap();
        let i = Cyc::zeta_pow(4, 1);
        let coeffs: Vec<Cyc> = d
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| if m4.value_sign(n as i64) == Some(-1) { c.mul(&i) } else { c.clone() })
            .collect();
        let g = QExpansion::new(coeffs, 12, 16, &DirichletCharacter::trivial(1)).unwrap();
        assert_eq!(g.field(), 4);
        let r = detect_self_twists(&g, 4, &first_primes(20), 1 << 30).unwrap();
        let pairs: Vec<(i64, String)> = r.detected.iter().map(|x| (x.sigma_exponent, x.eta.label.clone())).collect();
        assert_eq!(pairs, vec![(1, "trivial".to_string()), (3, "chi_-4".to_string())]);
        assert!(!r.cm_flag);
    }

    #[test]
    fn finite_detection() {
        let r = Ring::finite_field(5, 1).unwrap();
        let f = cm_form_32(120).unwrap();
        let ap: Vec<(u64, Vec<u64>)> = first_primes(30)
            .into_iter()
            .filter(|&p| p != 2 && p != 5)
            .take(12)
            .map(|p| {
                let v = super::super::qexp::as_i64(f.a(p as usize)).unwrap();
                (p, r.from_int(v))
            })
            .collect();
        let rep = detect_self_twists_finite(&r, &ap, 4, 1 << 20).unwrap();
        assert!(rep.cm_flag);
        assert!(rep.detected.iter().all(|d| d.sigma == rep.detected[0].sigma));
    }

    #[test]
    fn constraints() {
        let t = DirichletCharacter::trivial(1);
        let q3 = DirichletCharacter::kronecker(-3, 3).unwrap();
        assert!(eta_quadratic_constraint(1, &t, &q3));
        let o3 = DirichletCharacter::all(7).into_iter().find(|c| c.order == 3).unwrap();
        assert!(!eta_quadratic_constraint(1, &t, &o3));
        assert!(eta_quadratic_constraint(-1, &q3, &q3));
        let z = b_ell_invariance(&Cyc::zero(), &Cyc::from_int(5), &[1, -1, 5]).unwrap();
        assert!(z.invariant.iter().all(|x| x.1));
        assert!(matches!(b_ell_invariance(&Cyc::one(), &Cyc::zero(), &[1]), Err(IflError::NonUnit(_))));
    }

    #[test]
    fn nebentypus_reduction() {
        let q = DirichletCharacter::kronecker(-4, 4).unwrap();
        assert!(quadratic_nebentypus_reduction(&q).unwrap().psi.is_trivial());
        let o3 = DirichletCharacter::all(7).into_iter().find(|c| c.order == 3).unwrap();
        let r = quadratic_nebentypus_reduction(&o3).unwrap();
        assert_eq!(r.n, 2);
        assert_eq!(r.psi, o3);
        let o6 = DirichletCharacter::all(7).into_iter().find(|c| c.order == 6).unwrap();
        let r = quadratic_nebentypus_reduction(&o6).unwrap();
        assert_eq!(r.chi2.order, 2);
        assert_eq!(r.psi.pow(2).mul(&o6), r.chi2);
    }
}
