//! From a p-subgroup of SL_2(A) normalized by a diagonal j to an ideal a_0
//! with Gamma(a_0) inside the group.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{IflError, Result};
use crate::howell::SubLattice;
use crate::ideals::{lattice_to_ideal, IdealHandle};
use crate::matrix::{self as mx, M2};
use crate::pink::{gamma, ideal_times_sl2, matrix_lattice, pink_tower, MatrixGroup};
use crate::rings::{Ops, Ring, RingMorphism};

#[derive(Clone, Debug)]
pub struct EigenSplit {
    pub alpha: u32,
    /// (eigenvalue label, lattice); three parts, or diagonal/antidiagonal when alpha = -1 mod m.
    pub spaces: Vec<(String, SubLattice)>,
    pub minus_one_case: bool,
}

fn apply_rows<F: Fn(&M2) -> M2>(o: &Ops, l: &SubLattice, f: F) -> SubLattice {
    let rows = l
        .rows
        .iter()
        .map(|r| mx::to_vec(o, &f(&mx::from_vec(o, r))))
        .collect();
    matrix_lattice(o.ring, rows)
}

fn check_j(o: &Ops, j: &M2) -> Result<(u32, u32)> {
    let z = o.zero();
    if j[1] != z || j[2] != z {
        return Err(IflError::BadJ("j must be diagonal".into()));
    }
    let (zeta, zeta2) = (j[0], j[3]);
    if !o.is_unit(zeta) || !o.is_unit(zeta2) {
        return Err(IflError::BadJ("diagonal entries of j must be units".into()));
    }
    if !o.is_unit(o.sub(zeta, zeta2)) {
        return Err(IflError::BadJ("diagonal entries of j agree modulo the maximal ideal".into()));
    }
    Ok((zeta, zeta2))
}

/// Ad(j) on [[a,b],[c,d]] is [[a, alpha b],[alpha^-1 c, d]].
pub fn ad_eigensplit(ring: &Arc<Ring>, l: &SubLattice, j: &M2) -> Result<EigenSplit> {
    let o = ring.ops()?;
    let (zeta, zeta2) = check_j(&o, j)?;
    let alpha = o.mul(zeta, o.inv(zeta2).expect("unit"));
    let alpha_inv = o.inv(alpha).expect("unit");
    let ad = |x: &M2| [x[0], o.mul(alpha, x[1]), o.mul(alpha_inv, x[2]), x[3]];
    if l.rows.iter().any(|r| !l.contains(&mx::to_vec(&o, &ad(&mx::from_vec(&o, r))))) {
        return Err(IflError::NotStable);
    }
    let one = o.one();
    // (Ad - mu) as a map on matrices
    let shift = |x: &M2, mu: u32| -> M2 {
        let y = ad(x);
        [o.sub(y[0], o.mul(mu, x[0])), o.sub(y[1], o.mul(mu, x[1])), o.sub(y[2], o.mul(mu, x[2])), o.sub(y[3], o.mul(mu, x[3]))]
    };
    let diff = o.sub(o.mul(alpha, alpha), one);
    let minus_one_case = !o.is_unit(diff);
    // projector onto the 1-eigenspace: (Ad - alpha)(Ad - alpha^-1) / ((1 - alpha)(1 - alpha^-1))
    let c1 = o
        .inv(o.mul(o.sub(one, alpha), o.sub(one, alpha_inv)))
        .expect("alpha - 1 is a unit");
    let p1 = |x: &M2| mx::scale(&o, c1, &shift(&shift(x, alpha_inv), alpha));
    let diag = apply_rows(&o, l, p1);
    let spaces = if minus_one_case {
        let off = apply_rows(&o, l, |x| mx::sub(&o, x, &p1(x)));
        vec![("1".to_string(), diag), ("-1".to_string(), off)]
    } else {
        let ca = o
            .inv(o.mul(o.sub(alpha, one), o.sub(alpha, alpha_inv)))
            .expect("unit");
        let cb = o
            .inv(o.mul(o.sub(alpha_inv, one), o.sub(alpha_inv, alpha)))
            .expect("unit");
        let up = apply_rows(&o, l, |x| mx::scale(&o, ca, &shift(&shift(x, one), alpha_inv)));
        let down = apply_rows(&o, l, |x| mx::scale(&o, cb, &shift(&shift(x, one), alpha)));
        vec![
            ("alpha".to_string(), up),
            ("1".to_string(), diag),
            ("alpha^-1".to_string(), down),
        ]
    };
    Ok(EigenSplit { alpha, spaces, minus_one_case })
}

impl EigenSplit {
    pub fn reassemble(&self) -> SubLattice {
        let mut it = self.spaces.iter();
        let first = it.next().expect("nonempty").1.clone();
        it.fold(first, |acc, (_, l)| acc.sum(l))
    }
}

fn entry_block(ring: &Ring, k: usize) -> SubLattice {
    let n = ring.n();
    let rows = (0..n)
        .map(|i| {
            let mut v = vec![0; 4 * n];
            v[k * n + i] = 1;
            v
        })
        .collect();
    matrix_lattice(ring, rows)
}

/// L intersected with strictly upper (k = 1) or strictly lower (k = 2) matrices.
pub fn nilpotent_part(ring: &Ring, l: &SubLattice, k: usize) -> SubLattice {
    l.intersection(&entry_block(ring, k))
}

/// The entry lattice {v : v in entry k of some element of L}, for a part supported on entry k.
pub fn entry_lattice(ring: &Ring, part: &SubLattice, k: usize) -> SubLattice {
    let n = ring.n();
    crate::ideals::ring_lattice(ring, part.rows.iter().map(|r| r[k * n..(k + 1) * n].to_vec()).collect())
}

/// T x in L for x in the upper part and ((1+T)^-1 - 1) x in L for x in the lower part.
pub fn lambda_stability_check(ring: &Arc<Ring>, l: &SubLattice) -> Result<bool> {
    let o = ring.ops()?;
    let t = o.id(&ring.t_gen());
    let s = o.sub(o.inv(o.add(o.one(), t)).expect("unit"), o.one());
    let up = nilpotent_part(ring, l, 1);
    let down = nilpotent_part(ring, l, 2);
    let ok_up = up
        .rows
        .iter()
        .all(|r| l.contains(&mx::to_vec(&o, &mx::scale(&o, t, &mx::from_vec(&o, r)))));
    let ok_down = down
        .rows
        .iter()
        .all(|r| l.contains(&mx::to_vec(&o, &mx::scale(&o, s, &mx::from_vec(&o, r)))));
    Ok(ok_up && ok_down)
}

/// f(T) -> f((1+T)^-1 - 1).
pub fn beta_substitute(ring: &Arc<Ring>, f: &[u64]) -> Result<Vec<u64>> {
    let one = ring.one();
    let s = ring.sub(&ring.inv(&ring.add(&one, &ring.t_gen()))?, &one);
    let m = RingMorphism {
        source: ring.clone(),
        target: ring.clone(),
        t_image: s,
        x_image: ring.x_gen(),
        label: "beta".into(),
    };
    Ok(m.apply(f))
}

pub fn nilpotent_ideals(ring: &Arc<Ring>, l: &SubLattice) -> Result<(IdealHandle, IdealHandle)> {
    let v = entry_lattice(ring, &nilpotent_part(ring, l, 1), 1);
    let vt = entry_lattice(ring, &nilpotent_part(ring, l, 2), 2);
    let degenerate = |which: &str| IflError::Degenerate {
        stage: "nilpotent_ideals".into(),
        detail: format!("{which} nilpotent part is zero"),
    };
    let b = lattice_to_ideal(ring, &v).map_err(|_| degenerate("upper"))?;
    let bt = lattice_to_ideal(ring, &vt).map_err(|_| degenerate("lower"))?;
    Ok((b, bt))
}

/// Each matrix divided by the square root of its determinant.
pub fn sl2_twist(ring: &Arc<Ring>, images: &[(String, M2)]) -> Result<Vec<(String, M2)>> {
    let o = ring.ops()?;
    images
        .iter()
        .map(|(label, m)| {
            let d = mx::det(&o, m);
            let s = ring.sqrt_one_plus_m(o.elem(d))?;
            let si = o.id(&ring.inv(&s)?);
            Ok((label.clone(), mx::scale(&o, si, m)))
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceStep {
    pub stage: String,
    pub outcome: String,
}

#[derive(Clone, Debug)]
pub struct FullnessCertificate {
    pub ideal: IdealHandle,
    pub b_ideal: IdealHandle,
    pub bt_ideal: IdealHandle,
    pub verified: bool,
    pub route: String,
    pub minus_one_case: bool,
    pub pipeline_trace: Vec<TraceStep>,
}

#[derive(Serialize)]
pub struct CertificateReport {
    pub ideal_basis: Vec<Vec<u64>>,
    pub ideal_generators: Vec<String>,
    pub b_basis: Vec<Vec<u64>>,
    pub bt_basis: Vec<Vec<u64>>,
    pub verified: bool,
    pub route: String,
    pub minus_one_case: bool,
    pub pipeline_trace: Vec<TraceStep>,
}

impl FullnessCertificate {
    pub fn report(&self) -> CertificateReport {
        CertificateReport {
            ideal_basis: self.ideal.lattice.rows.clone(),
            ideal_generators: self.ideal.generators(),
            b_basis: self.b_ideal.lattice.rows.clone(),
            bt_basis: self.bt_ideal.lattice.rows.clone(),
            verified: self.verified,
            route: self.route.clone(),
            minus_one_case: self.minus_one_case,
            pipeline_trace: self.pipeline_trace.clone(),
        }
    }
}

/// Pipeline failure carrying the trace accumulated so far.
#[derive(Debug)]
pub struct FullnessFailure {
    pub error: IflError,
    pub pipeline_trace: Vec<TraceStep>,
}

pub fn fullness_certificate(g: &MatrixGroup, j: &M2, cap: usize) -> Result<FullnessCertificate> {
    fullness_with_trace(g, j, cap).map_err(|f| f.error)
}

pub fn fullness_with_trace(
    g: &MatrixGroup,
    j: &M2,
    cap: usize,
) -> std::result::Result<FullnessCertificate, FullnessFailure> {
    let mut trace: Vec<TraceStep> = Vec::new();
    macro_rules! step {
        ($stage:expr, $res:expr) => {
            match $res {
                Ok(v) => v,
                Err(e) => {
                    trace.push(TraceStep { stage: $stage.into(), outcome: format!("error: {e}") });
                    return Err(FullnessFailure { error: e, pipeline_trace: trace });
                }
            }
        };
    }
    let ring = &g.ring;
    let o = step!("input", ring.ops());
    let jd = mx::det(&o, j);
    if !o.is_unit(jd) {
        let e = IflError::BadJ("j is not invertible".into());
        trace.push(TraceStep { stage: "input".into(), outcome: format!("error: {e}") });
        return Err(FullnessFailure { error: e, pipeline_trace: trace });
    }
    let ji = mx::inv(&o, j).expect("unit determinant");
    if !g.generators.iter().chain(g.elements.iter().take(64)).all(|x| g.contains(&mx::conj(&o, j, x, &ji))) {
        let e = IflError::BadJ("j does not normalize the group".into());
        trace.push(TraceStep { stage: "input".into(), outcome: format!("error: {e}") });
        return Err(FullnessFailure { error: e, pipeline_trace: trace });
    }
    let data = step!("pink_tower", pink_tower(g, 2, cap));
    trace.push(TraceStep {
        stage: "pink_tower".into(),
        outcome: format!("|G| = {}, rank L1 = {}, rank L2 = {}", g.order(), data.l(1).log_size(), data.l(2).log_size()),
    });
    let l2 = data.l(2).clone();
    let mut found = None;
    for (route, l) in [("L2", &l2), ("L1", data.l(1))] {
        let split = step!("ad_eigensplit", ad_eigensplit(ring, l, j));
        trace.push(TraceStep {
            stage: "ad_eigensplit".into(),
            outcome: format!(
                "{route}: {} parts{}",
                split.spaces.len(),
                if split.minus_one_case { " (alpha = -1)" } else { "" }
            ),
        });
        let stable = step!("lambda_stability_check", lambda_stability_check(ring, l));
        if !stable {
            let e = IflError::Unverified {
                stage: "lambda_stability_check".into(),
                detail: format!("{route} nilpotent parts are not T-stable"),
            };
            trace.push(TraceStep { stage: "lambda_stability_check".into(), outcome: format!("error: {e}") });
            return Err(FullnessFailure { error: e, pipeline_trace: trace });
        }
        trace.push(TraceStep { stage: "lambda_stability_check".into(), outcome: format!("{route}: stable") });
        match nilpotent_ideals(ring, l) {
            Ok((b, bt)) => {
                let a0 = b.product(&bt).expect("same ring");
                trace.push(TraceStep {
                    stage: "nilpotent_ideals".into(),
                    outcome: format!("{route}: b = {:?}, bt = {:?}, a0 = {:?}", b.generators(), bt.generators(), a0.generators()),
                });
                if a0.is_zero() {
                    trace.push(TraceStep {
                        stage: "nilpotent_ideals".into(),
                        outcome: format!("{route}: a0 = b*bt is zero"),
                    });
                    continue;
                }
                found = Some((route, split.minus_one_case, b, bt, a0));
                break;
            }
            Err(e) => {
                trace.push(TraceStep { stage: "nilpotent_ideals".into(), outcome: format!("{route}: {e}") });
            }
        }
    }
    let Some((route, minus_one_case, b, bt, a0)) = found else {
        let e = IflError::Degenerate {
            stage: "nilpotent_ideals".into(),
            detail: "a0 = b*bt is zero on both L2 and L1 (truncation too shallow)".into(),
        };
        return Err(FullnessFailure { error: e, pipeline_trace: trace });
    };
    let lie = ideal_times_sl2(&a0.pow(2));
    if !l2.contains_lattice(&lie) {
        let e = IflError::Unverified {
            stage: "lie_containment".into(),
            detail: "a0^2 sl_2 is not inside L2".into(),
        };
        trace.push(TraceStep { stage: "lie_containment".into(), outcome: format!("error: {e}") });
        return Err(FullnessFailure { error: e, pipeline_trace: trace });
    }
    trace.push(TraceStep { stage: "lie_containment".into(), outcome: "a0^2 sl_2 in L2".into() });
    let ga = step!("direct_containment", gamma(&a0, cap));
    if !ga.is_subset(g) {
        let e = IflError::Unverified {
            stage: "direct_containment".into(),
            detail: format!("Gamma(a0) of order {} is not inside G", ga.order()),
        };
        trace.push(TraceStep { stage: "direct_containment".into(), outcome: format!("error: {e}") });
        return Err(FullnessFailure { error: e, pipeline_trace: trace });
    }
    trace.push(TraceStep {
        stage: "direct_containment".into(),
        outcome: format!("Gamma(a0) of order {} inside G", ga.order()),
    });
    Ok(FullnessCertificate {
        ideal: a0,
        b_ideal: b,
        bt_ideal: bt,
        verified: true,
        route: route.to_string(),
        minus_one_case,
        pipeline_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideals::{enumerate_ideals, maximal_ideal};
    use crate::pink::{group_from_strings, DEFAULT_CAP};

    fn sl2_lattice(ring: &Arc<Ring>) -> SubLattice {
        ideal_times_sl2(&IdealHandle::unit(ring))
    }

    #[test]
    fn split_over_f5() {
        let r = Ring::finite_field(5, 1).unwrap();
        let o = r.ops().unwrap();
        let l = sl2_lattice(&r);
        let j = mx::parse(&o, "2,0;0,1").unwrap();
        let s = ad_eigensplit(&r, &l, &j).unwrap();
        assert!(!s.minus_one_case);
        assert_eq!(s.spaces[0].1, entry_block(&r, 1));
        assert_eq!(s.spaces[2].1, entry_block(&r, 2));
        assert_eq!(s.spaces[1].1.log_size(), 1);
        assert_eq!(s.reassemble(), l);
        assert_eq!(o.elem(s.alpha), &[2]);
    }

    #[test]
    fn split_minus_one() {
        let r = Ring::finite_field(3, 1).unwrap();
        let o = r.ops().unwrap();
        let l = sl2_lattice(&r);
        let j = mx::parse(&o, "1,0;0,2").unwrap();
        let s = ad_eigensplit(&r, &l, &j).unwrap();
        assert!(s.minus_one_case);
        assert_eq!(s.spaces[0].1.log_size(), 1);
        assert_eq!(s.spaces[1].1.log_size(), 2);
        assert_eq!(s.reassemble(), l);
        let bad = mx::parse(&o, "1,0;0,1").unwrap();
        assert!(matches!(ad_eigensplit(&r, &l, &bad), Err(IflError::BadJ(_))));
    }

    #[test]
    fn not_stable() {
        let r = Ring::finite_field(5, 1).unwrap();
        let o = r.ops().unwrap();
        let l = matrix_lattice(&r, vec![mx::to_vec(&o, &mx::parse(&o, "0,1;1,0").unwrap())]);
        let j = mx::parse(&o, "2,0;0,1").unwrap();
        assert!(matches!(ad_eigensplit(&r, &l, &j), Err(IflError::NotStable)));
    }

    #[test]
    fn lambda_checks() {
        let r = Ring::trunc_iwasawa(3, 1, 2).unwrap();
        let o = r.ops().unwrap();
        for i in enumerate_ideals(&r, 1 << 20).unwrap() {
            assert!(lambda_stability_check(&r, &ideal_times_sl2(&i)).unwrap());
        }
        let l = matrix_lattice(&r, vec![mx::to_vec(&o, &mx::parse(&o, "0,1;0,0").unwrap())]);
        assert!(!lambda_stability_check(&r, &l).unwrap());
    }

    #[test]
    fn beta_is_involution() {
        let r = Ring::trunc_iwasawa(3, 1, 3).unwrap();
        assert_eq!(beta_substitute(&r, &r.one()).unwrap(), r.one());
        assert_eq!(beta_substitute(&r, &r.t_gen()).unwrap(), r.parse("2*T+T^2").unwrap());
        for e in &r.enumeration().unwrap().elems {
            let once = beta_substitute(&r, e).unwrap();
            assert_eq!(&beta_substitute(&r, &once).unwrap(), e);
        }
    }

    #[test]
    fn nilpotent_ideals_of_ideal_times_sl2() {
        let r = Ring::trunc_iwasawa(3, 2, 2).unwrap();
        for i in enumerate_ideals(&r, 1 << 20).unwrap() {
            if i.is_zero() {
                let e = nilpotent_ideals(&r, &ideal_times_sl2(&i)).unwrap_err();
                assert_eq!(e.stage(), Some("nilpotent_ideals"));
                continue;
            }
            let (b, bt) = nilpotent_ideals(&r, &ideal_times_sl2(&i)).unwrap();
            assert_eq!(b, i);
            assert_eq!(bt, i);
        }
    }

    #[test]
    fn l2_of_gamma_t() {
        let r = Ring::trunc_iwasawa(3, 1, 3).unwrap();
        let t = IdealHandle::from_strings(&r, &["T"]).unwrap();
        let g = gamma(&t, DEFAULT_CAP).unwrap();
        let data = pink_tower(&g, 2, DEFAULT_CAP).unwrap();
        let (b, bt) = nilpotent_ideals(&r, data.l(2)).unwrap();
        let t2 = IdealHandle::from_strings(&r, &["T^2"]).unwrap();
        assert_eq!((b, bt), (t2.clone(), t2));
    }

    #[test]
    fn twist_to_sl2() {
        let r = Ring::trunc_iwasawa(3, 1, 3).unwrap();
        let o = r.ops().unwrap();
        let x = mx::parse(&o, "1+T,0;0,1").unwrap();
        let id = mx::identity(&o);
        let out = sl2_twist(&r, &[("h".into(), x), ("e".into(), id)]).unwrap();
        assert_eq!(mx::det(&o, &out[0].1), o.one());
        assert_eq!(out[1].1, id);
        let bad = mx::parse(&o, "2,0;0,1").unwrap();
        assert!(sl2_twist(&r, &[("b".into(), bad)]).is_err());
    }

    #[test]
    fn certificate_for_maximal_congruence_group() {
        let r = Ring::trunc_iwasawa(3, 2, 2).unwrap();
        let o = r.ops().unwrap();
        let g = gamma(&maximal_ideal(&r), DEFAULT_CAP).unwrap();
        let j = mx::parse(&o, "1,0;0,8").unwrap();
        let cert = fullness_certificate(&g, &j, DEFAULT_CAP).unwrap();
        assert!(cert.verified);
        assert!(!cert.ideal.is_zero());
        assert!(gamma(&cert.ideal, DEFAULT_CAP).unwrap().is_subset(&g));
        assert_eq!(cert.ideal, cert.b_ideal.product(&cert.bt_ideal).unwrap());
    }

    #[test]
    fn certificate_errors() {
        let r = Ring::trunc_iwasawa(3, 1, 2).unwrap();
        let o = r.ops().unwrap();
        let t = IdealHandle::from_strings(&r, &["T"]).unwrap();
        let g = gamma(&t, DEFAULT_CAP).unwrap();
        let j = mx::parse(&o, "1,0;0,2").unwrap();
        let e = fullness_certificate(&g, &j, DEFAULT_CAP).unwrap_err();
        assert_eq!(e.stage(), Some("nilpotent_ideals"));
        let f3 = Ring::finite_field(3, 1).unwrap();
        let o3 = f3.ops().unwrap();
        let full = group_from_strings(&f3, &["1,1;0,1", "1,0;1,1"], DEFAULT_CAP).unwrap();
        let j3 = mx::parse(&o3, "1,0;0,2").unwrap();
        assert!(matches!(fullness_certificate(&full, &j3, DEFAULT_CAP), Err(IflError::NotPGroup(_))));
    }

    #[test]
    fn certificates_inside_ideal() {
        let r = Ring::trunc_iwasawa(3, 1, 3).unwrap();
        let o = r.ops().unwrap();
        let j = mx::parse(&o, "1,0;0,2").unwrap();
        for i in enumerate_ideals(&r, 1 << 20).unwrap() {
            if i.is_unit() || i.pow(2).is_zero() {
                continue;
            }
            let g = gamma(&i, DEFAULT_CAP).unwrap();
            let cert = fullness_certificate(&g, &j, DEFAULT_CAP).unwrap();
            assert!(cert.verified && !cert.ideal.is_zero() && cert.ideal.is_subset(&i));
        }
    }
}
