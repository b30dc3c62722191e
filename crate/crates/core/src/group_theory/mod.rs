//! Finite-group machinery: products and Goursat, obstruction classes,
//! Galois descent, centralizers, cocycle splitting, Teichmuller limits.

pub mod cocycle;
pub mod linear;
pub mod obstruction;
pub mod product;

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::error::{IflError, Result};
use crate::matrix as mx;
use crate::pink::MatrixGroup;
use crate::rings::Ops;

pub use cocycle::split_tsigma_cocycle;
pub use linear::{
    centralizer_classify, split_descent, teichmuller_matrix_limit, twisted_invariants, CentralizerCase,
    TeichmullerLimit, TwistedInvariant,
};
pub use obstruction::{exhaustive_extensions, extend_rep, obstruction_class, Extensions, Obstruction, Rep};
pub use product::{
    goursat, merzljakov_search, merzljakov_verify, pairwise_implies_product, GoursatResult, Merzljakov,
    PairwiseReport, ProductSubgroup,
};

/// A finite group as a multiplication table; element 0 is the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    pub labels: Vec<String>,
    table: Vec<usize>,
    inverse: Vec<usize>,
}

impl FiniteGroup {
    /// Validated table, including associativity.
    pub fn from_table(labels: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self> {
        Self::build(labels, table, true)
    }

    fn build(labels: Vec<String>, table: Vec<Vec<usize>>, check_assoc: bool) -> Result<Self> {
        let n = table.len();
        if n == 0 || labels.len() != n || table.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(IflError::BadInput("multiplication table must be square with entries < n".into()));
        }
        if (0..n).any(|i| table[0][i] != i || table[i][0] != i) {
            return Err(IflError::BadInput("element 0 must be the identity".into()));
        }
        let flat: Vec<usize> = table.concat();
        let mut inverse = vec![usize::MAX; n];
        for i in 0..n {
            let mut seen = vec![false; n];
            for j in 0..n {
                let x = flat[i * n + j];
                if std::mem::replace(&mut seen[x], true) {
                    return Err(IflError::BadInput(format!("row {i} is not a permutation")));
                }
                if x == 0 {
                    inverse[i] = j;
                }
            }
        }
        for i in (0..n).filter(|_| check_assoc) {
            for j in 0..n {
                for k in 0..n {
                    if flat[flat[i * n + j] * n + k] != flat[i * n + flat[j * n + k]] {
                        return Err(IflError::BadInput(format!("not associative at ({i},{j},{k})")));
                    }
                }
            }
        }
        Ok(FiniteGroup { labels, table: flat, inverse })
    }

    /// Closure of `gens` under `mul`; elements sorted, identity first.
    pub fn generated<T, F>(identity: T, gens: &[T], mul: F, label: impl Fn(&T) -> String) -> Result<Self>
    where
        T: Ord + Clone + std::hash::Hash,
        F: Fn(&T, &T) -> T,
    {
        let mut elems = vec![identity.clone()];
        let mut seen: std::collections::HashSet<T> = [identity.clone()].into_iter().collect();
        let mut i = 0;
        while i < elems.len() {
            for g in gens {
                let y = mul(&elems[i], g);
                if seen.insert(y.clone()) {
                    elems.push(y);
                }
            }
            i += 1;
        }
        elems.sort();
        let pos = elems.iter().position(|e| *e == identity).expect("identity");
        let id = elems.remove(pos);
        elems.insert(0, id);
        let index: HashMap<T, usize> = elems.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        let table: Vec<Vec<usize>> = elems
            .iter()
            .map(|x| elems.iter().map(|y| index[&mul(x, y)]).collect())
            .collect();
        FiniteGroup::build(elems.iter().map(label).collect(), table, false)
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        let table = (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect();
        FiniteGroup::from_table((0..n).map(|i| format!("g^{i}")).collect(), table)
    }

    pub fn direct_product(a: &FiniteGroup, b: &FiniteGroup) -> Result<Self> {
        let (n, m) = (a.order(), b.order());
        let table = (0..n * m)
            .map(|x| (0..n * m).map(|y| a.mul(x / m, y / m) * m + b.mul(x % m, y % m)).collect())
            .collect();
        let labels = (0..n * m).map(|x| format!("({},{})", a.labels[x / m], b.labels[x % m])).collect();
        FiniteGroup::build(labels, table, false)
    }

    /// Permutations of {0,1,2}.
    pub fn symmetric3() -> Result<Self> {
        let compose = |x: &[usize; 3], y: &[usize; 3]| [x[y[0]], x[y[1]], x[y[2]]];
        FiniteGroup::generated([0, 1, 2], &[[1, 2, 0], [1, 0, 2]], compose, |p| format!("{}{}{}", p[0], p[1], p[2]))
    }

    /// Unit quaternions {1, -1, i, -i, j, -j, k, -k} under the Hamilton product.
    pub fn quaternion() -> Result<Self> {
        let mul = |x: &[i8; 4], y: &[i8; 4]| {
            [
                x[0] * y[0] - x[1] * y[1] - x[2] * y[2] - x[3] * y[3],
                x[0] * y[1] + x[1] * y[0] + x[2] * y[3] - x[3] * y[2],
                x[0] * y[2] - x[1] * y[3] + x[2] * y[0] + x[3] * y[1],
                x[0] * y[3] + x[1] * y[2] - x[2] * y[1] + x[3] * y[0],
            ]
        };
        let label = |x: &[i8; 4]| {
            let names = ["1", "i", "j", "k"];
            let k = x.iter().position(|&c| c != 0).expect("unit");
            format!("{}{}", if x[k] < 0 { "-" } else { "" }, names[k])
        };
        FiniteGroup::generated([1, 0, 0, 0], &[[0, 1, 0, 0], [0, 0, 1, 0]], mul, label)
    }

    /// Identity first, then the group's sorted elements; also returns that element order.
    /// The table has order^2 entries, which must not exceed `cap`.
    pub fn from_matrix_group(g: &MatrixGroup, cap: usize) -> Result<(Self, Vec<mx::M2>)> {
        let o = g.ops();
        let n = g.order();
        if (n as u128).pow(2) > cap as u128 {
            return Err(crate::error::too_large("group table (order^2 entries)", (n as u128).pow(2), cap as u128));
        }
        let mut elems = g.elements.clone();
        let id = mx::identity(&o);
        let pos = elems.binary_search(&id).map_err(|_| IflError::BadInput("not a group".into()))?;
        elems.remove(pos);
        elems.insert(0, id);
        let index: HashMap<mx::M2, usize> = elems.iter().enumerate().map(|(i, e)| (*e, i)).collect();
        let table = elems
            .iter()
            .map(|x| elems.iter().map(|y| index[&mx::mul(&o, x, y)]).collect())
            .collect();
        let t = FiniteGroup::build(elems.iter().map(|x| mx::format(&o, x)).collect(), table, false)?;
        Ok((t, elems))
    }

    /// Rows of comma-separated indices; optional first line `labels: a, b, ...`.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut labels = None;
        let mut rows = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            if let Some(rest) = line.strip_prefix("labels:") {
                labels = Some(rest.split(',').map(|s| s.trim().to_string()).collect::<Vec<_>>());
                continue;
            }
            let row = line
                .split(',')
                .map(|s| s.trim().parse::<usize>().map_err(|e| IflError::Parse(format!("table entry '{s}': {e}"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let labels = labels.unwrap_or_else(|| (0..rows.len()).map(|i| i.to_string()).collect());
        FiniteGroup::from_table(labels, rows)
    }

    pub fn order(&self) -> usize {
        self.inverse.len()
    }

    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.table[x * self.order() + y]
    }

    pub fn inv(&self, x: usize) -> usize {
        self.inverse[x]
    }

    pub fn pow(&self, x: usize, e: usize) -> usize {
        (0..e).fold(0, |acc, _| self.mul(acc, x))
    }

    pub fn element_order(&self, x: usize) -> usize {
        let mut y = x;
        let mut k = 1;
        while y != 0 {
            y = self.mul(y, x);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|x| (0..n).all(|y| self.mul(x, y) == self.mul(y, x)))
    }

    pub fn is_subgroup(&self, h: &[usize]) -> bool {
        h.contains(&0) && h.iter().all(|&x| h.iter().all(|&y| h.contains(&self.mul(x, self.inv(y)))))
    }

    pub fn is_normal(&self, h: &[usize]) -> bool {
        self.is_subgroup(h)
            && (0..self.order()).all(|g| h.iter().all(|&x| h.contains(&self.mul(self.mul(g, x), self.inv(g)))))
    }

    pub fn center(&self) -> Vec<usize> {
        let n = self.order();
        (0..n).filter(|&x| (0..n).all(|y| self.mul(x, y) == self.mul(y, x))).collect()
    }

    /// Left cosets gH in order of their least element.
    pub fn cosets(&self, h: &[usize]) -> Vec<Vec<usize>> {
        let mut owner = vec![usize::MAX; self.order()];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for g in 0..self.order() {
            if owner[g] != usize::MAX {
                continue;
            }
            let mut c: Vec<usize> = h.iter().map(|&x| self.mul(g, x)).collect();
            c.sort_unstable();
            for &x in &c {
                owner[x] = out.len();
            }
            out.push(c);
        }
        out
    }

    /// G/H for normal H; returns the quotient and the projection.
    pub fn quotient(&self, h: &[usize]) -> Result<(FiniteGroup, Vec<usize>)> {
        if !self.is_normal(h) {
            return Err(IflError::HypothesisFailed("subgroup is not normal".into()));
        }
        let cosets = self.cosets(h);
        let mut proj = vec![0; self.order()];
        for (i, c) in cosets.iter().enumerate() {
            for &x in c {
                proj[x] = i;
            }
        }
        let table = cosets
            .iter()
            .map(|a| cosets.iter().map(|b| proj[self.mul(a[0], b[0])]).collect())
            .collect();
        let labels = cosets.iter().map(|c| format!("{}H", self.labels[c[0]])).collect();
        Ok((FiniteGroup::build(labels, table, false)?, proj))
    }
}

/// A 2-cocycle with values (ring element ids) in the units of a finite ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cocycle2 {
    pub group: FiniteGroup,
    pub values: Vec<Vec<u32>>,
}

impl Cocycle2 {
    /// b(g,h) b(gh,k) = g.b(h,k) b(g,hk); `act[g]` is the action of g on ids (empty for trivial).
    pub fn identity_holds(&self, o: &Ops, act: &[Vec<u32>]) -> bool {
        let g = &self.group;
        let n = g.order();
        let a = |x: usize, v: u32| if act.is_empty() { v } else { act[x][v as usize] };
        (0..n).all(|x| {
            (0..n).all(|y| {
                (0..n).all(|z| {
                    let lhs = o.mul(self.values[x][y], self.values[g.mul(x, y)][z]);
                    let rhs = o.mul(a(x, self.values[y][z]), self.values[x][g.mul(y, z)]);
                    lhs == rhs
                })
            })
        })
    }

    pub fn table_strings(&self, o: &Ops) -> BTreeMap<String, String> {
        let g = &self.group;
        let mut out = BTreeMap::new();
        for x in 0..g.order() {
            for y in 0..g.order() {
                out.insert(
                    format!("{},{}", g.labels[x], g.labels[y]),
                    o.ring.format(o.elem(self.values[x][y])),
                );
            }
        }
        out
    }
}

/// Dense n x n matrices over an enumerated field, row-major ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GMat {
    pub n: usize,
    pub e: Vec<u32>,
}

impl GMat {
    pub fn identity(o: &Ops, n: usize) -> Self {
        Self::scalar(o, n, o.one())
    }

    pub fn scalar(o: &Ops, n: usize, c: u32) -> Self {
        let mut e = vec![o.zero(); n * n];
        for i in 0..n {
            e[i * n + i] = c;
        }
        GMat { n, e }
    }

    pub fn from_m2(m: &mx::M2) -> Self {
        GMat { n: 2, e: m.to_vec() }
    }

    pub fn to_m2(&self) -> mx::M2 {
        [self.e[0], self.e[1], self.e[2], self.e[3]]
    }

    pub fn at(&self, i: usize, j: usize) -> u32 {
        self.e[i * self.n + j]
    }

    pub fn mul(&self, o: &Ops, y: &GMat) -> GMat {
        let n = self.n;
        let mut e = vec![o.zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                e[i * n + j] = (0..n).fold(o.zero(), |acc, k| o.add(acc, o.mul(self.at(i, k), y.at(k, j))));
            }
        }
        GMat { n, e }
    }

    pub fn scale(&self, o: &Ops, c: u32) -> GMat {
        GMat { n: self.n, e: self.e.iter().map(|&x| o.mul(c, x)).collect() }
    }

    pub fn map(&self, f: impl Fn(u32) -> u32) -> GMat {
        GMat { n: self.n, e: self.e.iter().map(|&x| f(x)).collect() }
    }

    /// Gauss-Jordan inverse over a field.
    pub fn inv(&self, o: &Ops) -> Option<GMat> {
        let n = self.n;
        let mut a: Vec<Vec<u32>> = (0..n)
            .map(|i| {
                let mut r = self.e[i * n..(i + 1) * n].to_vec();
                r.extend((0..n).map(|j| if i == j { o.one() } else { o.zero() }));
                r
            })
            .collect();
        for c in 0..n {
            let pr = (c..n).find(|&r| o.is_unit(a[r][c]))?;
            a.swap(c, pr);
            let iv = o.inv(a[c][c])?;
            for x in a[c].iter_mut() {
                *x = o.mul(iv, *x);
            }
            for r in 0..n {
                if r != c && a[r][c] != o.zero() {
                    let f = a[r][c];
                    for k in 0..2 * n {
                        let t = o.mul(f, a[c][k]);
                        a[r][k] = o.sub(a[r][k], t);
                    }
                }
            }
        }
        Some(GMat { n, e: a.into_iter().flat_map(|r| r[n..].to_vec()).collect() })
    }

    /// Some(c) when the matrix is c times the identity.
    pub fn scalar_value(&self, o: &Ops) -> Option<u32> {
        let c = self.e[0];
        let n = self.n;
        (0..n)
            .all(|i| (0..n).all(|j| self.at(i, j) == if i == j { c } else { o.zero() }))
            .then_some(c)
    }

    pub fn trace(&self, o: &Ops) -> u32 {
        (0..self.n).fold(o.zero(), |acc, i| o.add(acc, self.at(i, i)))
    }

    pub fn format(&self, o: &Ops) -> String {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| o.ring.format(o.elem(self.at(i, j)))).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn parse(o: &Ops, s: &str) -> Result<GMat> {
        let rows: Vec<Vec<u32>> = s
            .split(';')
            .map(|r| r.split(',').map(|c| Ok(o.id(&o.ring.parse(c.trim())?))).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(IflError::Parse(format!("matrix '{s}' is not square")));
        }
        Ok(GMat { n, e: rows.concat() })
    }
}

/// Every matrix in GL_n over the enumerated field, in id order.
pub fn general_linear(o: &Ops, n: usize, cap: u128) -> Result<Vec<GMat>> {
    let q = o.size() as u128;
    let total = q.checked_pow((n * n) as u32).unwrap_or(u128::MAX);
    if total > cap {
        return Err(crate::error::too_large("GL_n enumeration", total, cap));
    }
    let mut out = Vec::new();
    let mut e = vec![0u32; n * n];
    loop {
        let m = GMat { n, e: e.clone() };
        if m.inv(o).is_some() {
            out.push(m);
        }
        let mut i = n * n;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            e[i] += 1;
            if (e[i] as usize) < o.size() {
                break;
            }
            e[i] = 0;
        }
    }
}
