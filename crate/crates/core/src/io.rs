//! Text formats for rings, matrix groups and JSON reports.

use std::path::Path;
use std::sync::Arc;

use num::BigInt;
use serde::Serialize;

use crate::error::{IflError, Result};
use crate::matrix::{self as mx, M2};
use crate::rings::{parse_bivariate, Ring, RingKind};

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| IflError::Io(format!("{}: {e}", path.display())))
}

fn strip(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

/// `kind=trunc_iwasawa|zmod|monogenic|finite_field`, `p=`, `a=`, `b=`, `d=`, `ext_poly=`.
pub fn parse_ring_spec(text: &str) -> Result<Arc<Ring>> {
    let mut kind = None;
    let (mut p, mut a, mut b, mut d) = (None, 1u32, 1usize, None);
    let mut ext = None;
    for line in text.lines().map(strip).filter(|l| !l.is_empty()) {
        let (k, v) = line.split_once('=').ok_or_else(|| IflError::Parse(format!("expected key=value, got '{line}'")))?;
        let (k, v) = (k.trim(), v.trim());
        let num_err = || IflError::Parse(format!("bad value for {k}: '{v}'"));
        match k {
            "kind" => kind = Some(v.to_string()),
            "p" => p = Some(v.parse::<u64>().map_err(|_| num_err())?),
            "a" => a = v.parse().map_err(|_| num_err())?,
            "b" => b = v.parse().map_err(|_| num_err())?,
            "d" => d = Some(v.parse::<usize>().map_err(|_| num_err())?),
            "ext_poly" => ext = Some(v.to_string()),
            _ => return Err(IflError::Parse(format!("unknown ring key '{k}'"))),
        }
    }
    let p = p.ok_or_else(|| IflError::Parse("ring spec needs p=".into()))?;
    if a == 0 || b == 0 {
        return Err(IflError::Parse("a and b must be positive".into()));
    }
    let kind = kind.unwrap_or_else(|| "trunc_iwasawa".into());
    match kind.as_str() {
        "trunc_iwasawa" => Ring::trunc_iwasawa(p, a, b),
        "zmod" => Ring::zmod(p, a),
        "finite_field" => match ext {
            Some(f) => {
                let coeffs = poly_in_x(&f, p, 1)?;
                Ring::finite_field_with(p, coeffs.into_iter().map(|c| c[0]).collect())
            }
            None => Ring::finite_field(p, d.unwrap_or(1)),
        },
        "monogenic" => {
            let f = ext.ok_or_else(|| IflError::Parse("monogenic rings need ext_poly=".into()))?;
            let modulus = p.checked_pow(a).ok_or_else(|| IflError::Parse("p^a overflows".into()))?;
            Ring::monogenic(p, a, b, poly_in_x(&f, modulus, b)?)
        }
        other => Err(IflError::Parse(format!("unknown ring kind '{other}'"))),
    }
    .map_err(|e| match e {
        IflError::Parse(_) => e,
        other => IflError::Parse(format!("invalid ring: {other}")),
    })
}

/// Monic polynomial in x with (Z/m)[T]/(T^b) coefficients, lowest degree first.
fn poly_in_x(s: &str, m: u64, b: usize) -> Result<Vec<Vec<u64>>> {
    let terms = parse_bivariate(s)?;
    let deg = terms.iter().map(|t| t.2).max().unwrap_or(0);
    if deg == 0 {
        return Err(IflError::Parse("ext_poly must have positive degree in x".into()));
    }
    let mb = BigInt::from(m);
    let mut out = vec![vec![0u64; b]; deg + 1];
    for (c, te, xe) in terms {
        if te >= b {
            continue;
        }
        let c: u64 = (((c % &mb) + &mb) % &mb).try_into().expect("reduced");
        out[xe][te] = (out[xe][te] + c) % m;
    }
    let mut lead = vec![0u64; b];
    lead[0] = 1 % m;
    if out[deg] != lead {
        return Err(IflError::Parse("ext_poly must be monic in x".into()));
    }
    Ok(out)
}

pub fn ring_spec_string(ring: &Ring) -> String {
    let kind = match ring.kind {
        RingKind::ZmodPa => "zmod",
        RingKind::TruncIwasawa => "trunc_iwasawa",
        RingKind::MonogenicExt => "monogenic",
        RingKind::FiniteField => "finite_field",
    };
    let mut s = format!("kind={kind}\np={}\na={}\nb={}\n", ring.p, ring.a, ring.b);
    if ring.has_extension() {
        s.push_str(&format!("d={}\n", ring.d));
    }
    s
}

/// One `a,b;c,d` matrix per line; `#` comments and blank lines ignored.
pub fn parse_group_file(ring: &Arc<Ring>, text: &str) -> Result<Vec<M2>> {
    let o = ring.ops()?;
    text.lines()
        .map(strip)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, l)| mx::parse(&o, l).map_err(|e| IflError::Parse(format!("generator {}: {e}", i + 1))))
        .collect()
}

/// Pretty JSON with sorted object keys and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("reports serialize");
    let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_specs() {
        let r = parse_ring_spec("# test\nkind=trunc_iwasawa\np=3\na=2\nb=3\n").unwrap();
        assert_eq!(*r, *Ring::trunc_iwasawa(3, 2, 3).unwrap());
        assert_eq!(*parse_ring_spec(&ring_spec_string(&r)).unwrap(), *r);
        let f = parse_ring_spec("kind=finite_field\np=3\next_poly=x^2+1").unwrap();
        assert_eq!(f.size(), 9);
        let m = parse_ring_spec("kind=monogenic\np=3\na=1\nb=2\next_poly=x^2+T*x+2").unwrap();
        assert_eq!(m.size(), 81);
        assert!(parse_ring_spec("kind=finite_field\np=3\next_poly=x^2+2").is_err());
        assert!(parse_ring_spec("p=3\nq=2").is_err());
        assert!(parse_ring_spec("kind=monogenic\np=3\next_poly=2*x^2+1").is_err());
    }

    #[test]
    fn group_files() {
        let r = Ring::trunc_iwasawa(3, 1, 2).unwrap();
        let g = parse_group_file(&r, "1,T;0,1  # upper\n\n1,0;T,1\n").unwrap();
        assert_eq!(g.len(), 2);
        assert!(parse_group_file(&r, "1,T,0;1").is_err());
        assert!(parse_group_file(&r, "").unwrap().is_empty());
    }

    #[test]
    fn json_keys_sorted() {
        #[derive(Serialize)]
        struct S {
            zeta: u32,
            alpha: u32,
        }
        let s = to_json(&S { zeta: 1, alpha: 2 });
        assert!(s.find("alpha").unwrap() < s.find("zeta").unwrap());
    }
}
