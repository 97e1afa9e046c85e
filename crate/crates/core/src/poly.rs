//! Sparse multivariate polynomials and truncated power series over an exact
//! scalar field.
//!
//! Exponent vectors are dense fixed-length arrays of small integers; terms
//! are kept in a map with graded-lexicographic key order, which makes
//! serialization and reports deterministic. Zero coefficients are never
//! stored.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A monomial: a dense exponent vector.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Mono(pub Vec<u16>);

impl Mono {
    pub fn one(nvars: usize) -> Self {
        Mono(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Mono(e)
    }

    pub fn total_degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

impl Ord for Mono {
    /// Graded lexicographic: total degree first, then lex with earlier
    /// variables weighing more.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| {
                for (a, b) in self.0.iter().zip(&other.0) {
                    match a.cmp(b) {
                        std::cmp::Ordering::Equal => continue,
                        // larger exponent on an earlier variable = larger monomial
                        ord => return ord,
                    }
                }
                std::cmp::Ordering::Equal
            })
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// A sparse multivariate polynomial.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MultiPoly<K: Scalar> {
    nvars: usize,
    terms: BTreeMap<Mono, K>,
}

impl<K: Scalar> MultiPoly<K> {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: K) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Mono::one(nvars), c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, K::one())
    }

    /// The variable `x_{i+1}` (zero-based index `i`).
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index out of range");
        let mut p = Self::zero(nvars);
        p.add_term(Mono::var(nvars, i), K::one());
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Mono, K)>) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Maximum total degree of the stored exponents; `None` for the zero
    /// polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(Mono::total_degree).max()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &K)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Mono) -> K {
        self.terms.get(m).cloned().unwrap_or_else(K::zero)
    }

    pub fn constant_term(&self) -> K {
        self.coeff(&Mono::one(self.nvars))
    }

    /// Adds `c * m`, dropping the entry when the sum cancels.
    pub fn add_term(&mut self, m: Mono, c: K) {
        debug_assert_eq!(m.0.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), -c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &K) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        let mut out = Self::zero(self.nvars);
        for (m, k) in &self.terms {
            let prod = k.clone() * c.clone();
            if !prod.is_zero() {
                out.terms.insert(m.clone(), prod);
            }
        }
        out
    }

    /// Product, optionally discarding terms above a total-degree cap.
    pub fn mul_capped(&self, other: &Self, cap: Option<usize>) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Self::zero(self.nvars);
        for (ma, ca) in &self.terms {
            let da = ma.total_degree();
            if let Some(cap) = cap {
                if da > cap {
                    continue;
                }
            }
            for (mb, cb) in &other.terms {
                if let Some(cap) = cap {
                    if da + mb.total_degree() > cap {
                        continue;
                    }
                }
                out.add_term(ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.mul_capped(other, None)
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut out = Self::one(self.nvars);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Partial derivative with respect to variable `i`.
    pub fn partial(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.0[i] = e - 1;
            out.add_term(
                m2,
                c.clone() * K::from_rational(crate::scalar::rat_int(e as i64)),
            );
        }
        out
    }

    pub fn eval(&self, point: &[K]) -> K {
        assert_eq!(point.len(), self.nvars);
        let mut acc = K::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    t = t * point[i].clone();
                }
            }
            acc = acc + t;
        }
        acc
    }

    /// Discards all terms of total degree above `cap`.
    pub fn truncated(&self, cap: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            if m.total_degree() <= cap {
                out.terms.insert(m.clone(), c.clone());
            }
        }
        out
    }

    /// The homogeneous component of total degree `d`.
    pub fn homogeneous_part(&self, d: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            if m.total_degree() == d {
                out.terms.insert(m.clone(), c.clone());
            }
        }
        out
    }

    pub fn map_coeffs<L: Scalar>(&self, f: impl Fn(&K) -> L) -> MultiPoly<L> {
        let mut out = MultiPoly::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    /// Exact composition: substitutes `subst[i]` for variable `i`.
    ///
    /// All substituents must share a variable count; the result lives in
    /// their ring. With `cap` set, truncates during expansion.
    pub fn compose_capped(
        &self,
        subst: &[MultiPoly<K>],
        cap: Option<usize>,
    ) -> Result<MultiPoly<K>> {
        if subst.len() != self.nvars {
            return Err(Error::ArityMismatch {
                expected: self.nvars,
                got: subst.len(),
            });
        }
        let out_vars = if let Some(first) = subst.first() {
            let nv = first.nvars;
            if subst.iter().any(|s| s.nvars != nv) {
                return Err(Error::DimensionMismatch(
                    "substituents have differing variable counts".into(),
                ));
            }
            nv
        } else {
            return Ok(MultiPoly::constant(0, self.constant_term()));
        };
        // cache powers of each substituent
        let mut powers: Vec<Vec<MultiPoly<K>>> = subst
            .iter()
            .map(|s| vec![MultiPoly::one(out_vars), s.clone()])
            .collect();
        let mut acc = MultiPoly::zero(out_vars);
        for (m, c) in &self.terms {
            let mut t = MultiPoly::constant(out_vars, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap().mul_capped(&subst[i], cap);
                    powers[i].push(next);
                }
                t = t.mul_capped(&powers[i][e as usize], cap);
            }
            acc = acc.add(&t);
        }
        if let Some(cap) = cap {
            acc = acc.truncated(cap);
        }
        Ok(acc)
    }

    pub fn compose(&self, subst: &[MultiPoly<K>]) -> Result<MultiPoly<K>> {
        self.compose_capped(subst, None)
    }

    /// Composition where the substituents are truncated series; the result
    /// cap is the minimum cap among the substituents.
    pub fn compose_series(&self, subst: &[TruncSeries<K>]) -> Result<TruncSeries<K>> {
        if subst.len() != self.nvars {
            return Err(Error::ArityMismatch {
                expected: self.nvars,
                got: subst.len(),
            });
        }
        let cap = subst.iter().map(|s| s.cap).min().unwrap_or(0);
        let polys: Vec<MultiPoly<K>> = subst.iter().map(|s| s.poly.clone()).collect();
        let p = self.compose_capped(&polys, Some(cap))?;
        Ok(TruncSeries::new(p, cap))
    }

    /// Exact division: returns `q` with `self = q * d`, or `None` when `d`
    /// does not divide `self`.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        assert_eq!(self.nvars, d.nvars);
        if d.is_zero() {
            return None;
        }
        let (lead_m, lead_c) = d.terms.iter().next_back()?;
        let mut rem = self.clone();
        let mut quot = Self::zero(self.nvars);
        while !rem.is_zero() {
            let (rm, rc) = rem.terms.iter().next_back().unwrap();
            // divisibility of the leading monomials
            if rm.0.iter().zip(&lead_m.0).any(|(a, b)| a < b) {
                return None;
            }
            let qm = Mono(rm.0.iter().zip(&lead_m.0).map(|(a, b)| a - b).collect());
            let qc = rc.clone() / lead_c.clone();
            quot.add_term(qm.clone(), qc.clone());
            let mut factor = Self::zero(self.nvars);
            factor.add_term(qm, qc);
            rem = rem.sub(&factor.mul(d));
        }
        Some(quot)
    }

    /// Renders the polynomial with a custom variable namer.
    pub fn display_with<'a>(&'a self, namer: &'a dyn Fn(usize) -> String) -> PolyDisplay<'a, K> {
        PolyDisplay { poly: self, namer }
    }
}

pub struct PolyDisplay<'a, K: Scalar> {
    poly: &'a MultiPoly<K>,
    namer: &'a dyn Fn(usize) -> String,
}

impl<K: Scalar> fmt::Display for PolyDisplay<'_, K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", render_poly(self.poly, self.namer))
    }
}

/// Default display: variables named `x1..xN`, terms in descending order.
impl<K: Scalar> fmt::Display for MultiPoly<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let namer = |i: usize| format!("x{}", i + 1);
        write!(f, "{}", render_poly(self, &namer))
    }
}

pub(crate) fn render_poly<K: Scalar>(p: &MultiPoly<K>, namer: &dyn Fn(usize) -> String) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (idx, (m, c)) in p.terms.iter().rev().enumerate() {
        let cs = c.to_string();
        let (sign, mag) = match cs.strip_prefix('-') {
            // only safe for plain rational rendering; complex coefficients keep the sign inside
            Some(rest) if !rest.contains(['+', '-']) => ("-", rest.to_string()),
            _ => ("+", cs),
        };
        if idx == 0 {
            if sign == "-" {
                out.push('-');
            }
        } else {
            out.push_str(if sign == "-" { " - " } else { " + " });
        }
        let mut factors: Vec<String> = Vec::new();
        if m.is_constant() || mag != "1" {
            factors.push(mag.clone());
        }
        for (i, &e) in m.0.iter().enumerate() {
            if e == 1 {
                factors.push(namer(i));
            } else if e > 1 {
                factors.push(format!("{}^{}", namer(i), e));
            }
        }
        out.push_str(&factors.join("*"));
    }
    out
}

/// A multivariate power series truncated at a total-degree cap.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TruncSeries<K: Scalar> {
    poly: MultiPoly<K>,
    cap: usize,
}

impl<K: Scalar> TruncSeries<K> {
    pub fn new(poly: MultiPoly<K>, cap: usize) -> Self {
        TruncSeries {
            poly: poly.truncated(cap),
            cap,
        }
    }

    pub fn zero(nvars: usize, cap: usize) -> Self {
        TruncSeries {
            poly: MultiPoly::zero(nvars),
            cap,
        }
    }

    pub fn constant(nvars: usize, c: K, cap: usize) -> Self {
        TruncSeries {
            poly: MultiPoly::constant(nvars, c),
            cap,
        }
    }

    pub fn var(nvars: usize, i: usize, cap: usize) -> Self {
        TruncSeries::new(MultiPoly::var(nvars, i), cap)
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn nvars(&self) -> usize {
        self.poly.nvars()
    }

    pub fn poly(&self) -> &MultiPoly<K> {
        &self.poly
    }

    pub fn into_poly(self) -> MultiPoly<K> {
        self.poly
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        let cap = self.cap.min(other.cap);
        TruncSeries::new(self.poly.add(&other.poly), cap)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let cap = self.cap.min(other.cap);
        TruncSeries::new(self.poly.sub(&other.poly), cap)
    }

    pub fn neg(&self) -> Self {
        TruncSeries {
            poly: self.poly.neg(),
            cap: self.cap,
        }
    }

    pub fn scale(&self, c: &K) -> Self {
        TruncSeries {
            poly: self.poly.scale(c),
            cap: self.cap,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let cap = self.cap.min(other.cap);
        TruncSeries {
            poly: self.poly.mul_capped(&other.poly, Some(cap)),
            cap,
        }
    }

    /// The lowest total degree of a nonzero term; `None` for zero.
    pub fn valuation(&self) -> Option<usize> {
        self.poly.terms().map(|(m, _)| m.total_degree()).min()
    }

    /// Multiplicative inverse of a series with nonzero constant term, as the
    /// geometric series `(c + u)^-1 = c^-1 * sum (-u/c)^k` up to the cap.
    pub fn invert(&self) -> Result<Self> {
        let c = self.poly.constant_term();
        if c.is_zero() {
            return Err(Error::Unsupported(
                "series inversion requires a nonzero constant term".into(),
            ));
        }
        let cinv = c.inv();
        let mut u = self.poly.clone();
        u.add_term(Mono::one(self.nvars()), -c.clone());
        // u now has valuation >= 1
        let neg_u_over_c = u.scale(&(-cinv.clone()));
        let mut acc = MultiPoly::one(self.nvars());
        let mut term = MultiPoly::one(self.nvars());
        for _ in 0..self.cap {
            term = term.mul_capped(&neg_u_over_c, Some(self.cap));
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term);
        }
        Ok(TruncSeries {
            poly: acc.scale(&cinv),
            cap: self.cap,
        })
    }
}

impl<K: Scalar> fmt::Display for TruncSeries<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + O(deg {})", self.poly, self.cap + 1)
    }
}
