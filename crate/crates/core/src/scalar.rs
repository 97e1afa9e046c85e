//! Exact scalar fields.
//!
//! Every computation in this crate runs over an exact field: either the
//! rationals or the Gaussian rationals (rationals with the imaginary unit
//! adjoined). The [`Scalar`] trait abstracts the two so that polynomials,
//! series and matrices are written once.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Arbitrary-precision rational, always stored reduced with positive denominator.
pub type Rational = num_rational::BigRational;

/// Complex number with rational real and imaginary parts.
pub type GaussRational = num_complex::Complex<Rational>;

/// Shorthand for an integer rational.
pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Shorthand for the rational `p/q`. Panics when `q == 0`.
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Gaussian rational from integer real and imaginary parts.
pub fn gauss_int(re: i64, im: i64) -> GaussRational {
    GaussRational::new(rat_int(re), rat_int(im))
}

/// An exact field scalar with a conjugation involution.
///
/// Implemented by [`Rational`] (conjugation is the identity) and
/// [`GaussRational`] (complex conjugation). All arithmetic is exact; there is
/// no rounding anywhere in the crate.
pub trait Scalar:
    Clone
    + PartialEq
    + Eq
    + Debug
    + Display
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn from_rational(r: Rational) -> Self;

    /// The conjugate; an involution fixing the rationals.
    fn conjugate(&self) -> Self;

    /// Returns the value as a rational when it is real, `None` otherwise.
    fn to_rational(&self) -> Option<Rational>;

    /// The rational coordinates of the value over Q (one for the rationals,
    /// real and imaginary parts for the Gaussian rationals). Used for
    /// content normalization of vectors.
    fn rational_coords(&self) -> Vec<Rational>;

    /// Multiplication by a rational scale factor.
    fn scale(&self, r: &Rational) -> Self;

    /// The imaginary unit, when the field contains one.
    fn imaginary_unit() -> Option<Self>;

    fn inv(&self) -> Self {
        Self::one() / self.clone()
    }
}

impl Scalar for Rational {
    fn from_rational(r: Rational) -> Self {
        r
    }

    fn conjugate(&self) -> Self {
        self.clone()
    }

    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }

    fn rational_coords(&self) -> Vec<Rational> {
        vec![self.clone()]
    }

    fn scale(&self, r: &Rational) -> Self {
        self * r
    }

    fn imaginary_unit() -> Option<Self> {
        None
    }
}

impl Scalar for GaussRational {
    fn from_rational(r: Rational) -> Self {
        GaussRational::new(r, Rational::zero())
    }

    fn conjugate(&self) -> Self {
        GaussRational::new(self.re.clone(), -self.im.clone())
    }

    fn to_rational(&self) -> Option<Rational> {
        if self.im.is_zero() {
            Some(self.re.clone())
        } else {
            None
        }
    }

    fn rational_coords(&self) -> Vec<Rational> {
        vec![self.re.clone(), self.im.clone()]
    }

    fn scale(&self, r: &Rational) -> Self {
        GaussRational::new(&self.re * r, &self.im * r)
    }

    fn imaginary_unit() -> Option<Self> {
        Some(GaussRational::new(Rational::zero(), Rational::one()))
    }
}

/// Factors `n > 0` by trial division. Returns `(factors, leftover)` where
/// the leftover carries any part not split below the bound.
fn trial_factor(n: &BigInt) -> (Vec<(BigInt, u32)>, BigInt) {
    let mut m = n.clone();
    let mut factors = Vec::new();
    let limit = BigInt::from(100_000u32);
    let mut d = BigInt::from(2u32);
    while &d * &d <= m && d <= limit {
        let mut e = 0u32;
        while (&m % &d).is_zero() {
            m /= &d;
            e += 1;
        }
        if e > 0 {
            factors.push((d.clone(), e));
        }
        d += 1u32;
    }
    if m.is_one() {
        (factors, BigInt::one())
    } else if &d * &d > m {
        // the leftover is prime
        factors.push((m, 1));
        (factors, BigInt::one())
    } else {
        (factors, m)
    }
}

/// Splits a nonzero integer as `n = s * m^2` with `s` square-free (up to the
/// factoring bound; an unfactored leftover is kept in `s` unless it is a
/// perfect square).
pub fn squarefree_part(n: &BigInt) -> (BigInt, BigInt) {
    assert!(!n.is_zero());
    let (factors, leftover) = trial_factor(&n.abs());
    let mut s = if n.is_negative() {
        -BigInt::one()
    } else {
        BigInt::one()
    };
    let mut m = BigInt::one();
    for (p, e) in factors {
        if e % 2 == 1 {
            s *= &p;
        }
        m *= p.pow(e / 2);
    }
    if !leftover.is_one() {
        let r = leftover.sqrt();
        if &r * &r == leftover {
            m *= r;
        } else {
            s *= leftover;
        }
    }
    (s, m)
}

/// Square-free part of a rational: `r = s * t^2` with `s` a square-free
/// integer of the same sign and `t` rational.
pub fn rational_squarefree_part(r: &Rational) -> (BigInt, Rational) {
    let (s, m) = squarefree_part(&(r.numer() * r.denom()));
    // r = (num*den)/den^2 = s * (m/den)^2
    let t = Rational::new(m, r.denom().clone());
    (s, t)
}

/// All positive divisors of `n != 0`, or `None` when an unfactorable
/// leftover blocks complete enumeration.
pub fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let (factors, leftover) = trial_factor(&n.abs());
    if !leftover.is_one() {
        return None;
    }
    let mut divs = vec![BigInt::one()];
    for (p, e) in factors {
        let mut next = Vec::with_capacity(divs.len() * (e as usize + 1));
        for d in &divs {
            let mut pk = BigInt::one();
            for _ in 0..=e {
                next.push(d * &pk);
                pk *= &p;
            }
        }
        divs = next;
    }
    divs.sort();
    Some(divs)
}

/// The rational roots of a univariate polynomial with rational coefficients
/// (`coeffs[k]` multiplying `x^k`), with multiplicities. `complete` reports
/// whether the polynomial splits into rational linear factors entirely.
pub struct RationalRoots {
    pub roots: Vec<(Rational, usize)>,
    pub complete: bool,
}

pub fn rational_roots(coeffs: &[Rational]) -> RationalRoots {
    let mut c: Vec<Rational> = coeffs.to_vec();
    while c.last().is_some_and(Zero::is_zero) {
        c.pop();
    }
    if c.len() <= 1 {
        return RationalRoots {
            roots: Vec::new(),
            complete: true,
        };
    }
    // clear denominators
    let mut den_lcm = BigInt::one();
    for x in &c {
        den_lcm = den_lcm.lcm(x.denom());
    }
    let mut ic: Vec<BigInt> = c
        .iter()
        .map(|x| x.numer() * (&den_lcm / x.denom()))
        .collect();

    let mut roots: Vec<(Rational, usize)> = Vec::new();
    // strip x^k
    let mut zero_mult = 0usize;
    while ic.first().is_some_and(Zero::is_zero) {
        ic.remove(0);
        zero_mult += 1;
    }
    if zero_mult > 0 {
        roots.push((Rational::zero(), zero_mult));
    }

    let eval = |poly: &[BigInt], r: &Rational| -> Rational {
        let mut acc = Rational::zero();
        for k in (0..poly.len()).rev() {
            acc = acc * r + Rational::from_integer(poly[k].clone());
        }
        acc
    };
    let deflate = |poly: &[BigInt], r: &Rational| -> Vec<BigInt> {
        // synthetic division by (x - r); exactness is guaranteed for roots,
        // re-clearing denominators afterwards
        let mut q: Vec<Rational> = vec![Rational::zero(); poly.len() - 1];
        let mut carry = Rational::zero();
        for k in (0..poly.len() - 1).rev() {
            carry = Rational::from_integer(poly[k + 1].clone()) + carry * r;
            q[k] = carry.clone();
        }
        let mut lcm = BigInt::one();
        for x in &q {
            lcm = lcm.lcm(x.denom());
        }
        q.iter().map(|x| x.numer() * (&lcm / x.denom())).collect()
    };

    let (p_divs, q_divs) = match (divisors(&ic[0]), divisors(ic.last().unwrap())) {
        (Some(p), Some(q)) => (p, q),
        _ => {
            return RationalRoots {
                roots,
                complete: false,
            }
        }
    };
    let mut candidates: Vec<Rational> = Vec::new();
    for p in &p_divs {
        for q in &q_divs {
            let r = Rational::new(p.clone(), q.clone());
            if !candidates.contains(&r) {
                candidates.push(r);
            }
        }
    }
    for cand in candidates {
        for r in [cand.clone(), -cand] {
            let mut mult = 0usize;
            while ic.len() > 1 && eval(&ic, &r).is_zero() {
                ic = deflate(&ic, &r);
                mult += 1;
                // constant term may vanish after deflation only if r == 0,
                // which was stripped already
            }
            if mult > 0 {
                roots.push((r, mult));
            }
        }
    }
    roots.sort_by(|a, b| b.0.cmp(&a.0));
    RationalRoots {
        roots,
        complete: ic.len() <= 1,
    }
}

/// Scales a nonzero vector so that, after clearing denominators, the integer
/// entries have gcd 1, and orients it so that the first nonzero rational
/// coordinate is positive. Returns the vector unchanged when it is zero.
pub fn primitive_normalize<K: Scalar>(v: &[K]) -> Vec<K> {
    let coords: Vec<Rational> = v.iter().flat_map(|x| x.rational_coords()).collect();
    let mut den_lcm = BigInt::one();
    let mut num_gcd = BigInt::zero();
    for c in &coords {
        if !c.is_zero() {
            den_lcm = den_lcm.lcm(c.denom());
            num_gcd = num_gcd.gcd(c.numer());
        }
    }
    if num_gcd.is_zero() {
        return v.to_vec();
    }
    let mut factor = Rational::new(den_lcm, num_gcd);
    if let Some(first) = coords.iter().find(|c| !c.is_zero()) {
        if (first * &factor).is_negative() {
            factor = -factor;
        }
    }
    v.iter().map(|x| x.scale(&factor)).collect()
}
