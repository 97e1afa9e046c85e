//! Parametric generators for the catalog surfaces (the definite quadric,
//! the seven Lorentzian normal forms, the generalized type C surface), the
//! real affine group acting on the latter, and its transitivity identity.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::parse::Constraint;
use crate::poly::MultiPoly;
use crate::scalar::{rat, rat_int, Rational};
use crate::symmetry::{AffineMap, Hypersurface};
use crate::{RatMatrix, RatPoly};

/// The surface families exposed by the toolkit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// `x_{n+1} = sum x_i^2`
    T1Quadric,
    /// Lorentzian normal forms 1..7
    T2(u8),
    /// `x_{n+1} = x1 x2 + x1 sum_{j>=3} x_j^2`, `x1 > 0`
    Sec6Gamma,
}

impl Family {
    pub fn cli_name(&self) -> String {
        match self {
            Family::T1Quadric => "t1".into(),
            Family::T2(k) => format!("t2.{k}"),
            Family::Sec6Gamma => "sec6".into(),
        }
    }

    pub fn from_cli_name(name: &str) -> Result<Family> {
        match name {
            "t1" => Ok(Family::T1Quadric),
            "sec6" => Ok(Family::Sec6Gamma),
            _ => {
                if let Some(k) = name.strip_prefix("t2.") {
                    let k: u8 = k
                        .parse()
                        .map_err(|_| Error::Config(format!("unknown family '{name}'")))?;
                    if (1..=7).contains(&k) {
                        return Ok(Family::T2(k));
                    }
                }
                Err(Error::Config(format!(
                    "unknown family '{name}' (expected t1, t2.1..t2.7 or sec6)"
                )))
            }
        }
    }

    pub fn all() -> Vec<Family> {
        let mut out = vec![Family::T1Quadric];
        out.extend((1..=7).map(Family::T2));
        out.push(Family::Sec6Gamma);
        out
    }
}

/// A fully specified catalog surface.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceId {
    pub family: Family,
    pub n: usize,
    /// quartic coefficient, present exactly for family T2(3)
    pub alpha: Option<Rational>,
}

impl SurfaceId {
    pub fn new(family: Family, n: usize, alpha: Option<Rational>) -> Result<SurfaceId> {
        match family {
            Family::T1Quadric => {
                if !(2..=8).contains(&n) {
                    return Err(Error::Config(format!("t1 requires 2 <= n <= 8, got {n}")));
                }
            }
            Family::T2(k) => {
                if !(1..=7).contains(&k) {
                    return Err(Error::Config(format!("no family t2.{k}")));
                }
                if !(4..=8).contains(&n) {
                    return Err(Error::Config(format!(
                        "t2.{k} requires 4 <= n <= 8, got {n}"
                    )));
                }
            }
            Family::Sec6Gamma => {
                if !(3..=8).contains(&n) {
                    return Err(Error::Config(format!("sec6 requires 3 <= n <= 8, got {n}")));
                }
            }
        }
        let alpha = match (family, alpha) {
            (Family::T2(3), a) => Some(a.unwrap_or_else(Rational::zero)),
            (_, None) => None,
            (f, Some(_)) => {
                return Err(Error::Config(format!(
                    "alpha is only meaningful for t2.3, not {}",
                    f.cli_name()
                )))
            }
        };
        Ok(SurfaceId { family, n, alpha })
    }
}

fn var(nvars: usize, i: usize) -> RatPoly {
    MultiPoly::var(nvars, i)
}

/// `sum_{i in range} x_i^2` (1-based variable numbers).
fn sum_of_squares(nvars: usize, vars_1based: impl Iterator<Item = usize>) -> RatPoly {
    let mut acc = RatPoly::zero(nvars);
    for i in vars_1based {
        acc = acc.add(&var(nvars, i - 1).pow(2));
    }
    acc
}

/// Builds the defining polynomial and default reference point of a catalog
/// surface: the origin where the second fundamental form there is
/// non-degenerate, else `(1, 0, ..., 0, x_{n+1} solved)`.
pub fn make_surface(id: &SurfaceId) -> Result<Hypersurface> {
    let n = id.n;
    let d = n + 1;
    let x = |i: usize| var(d, i - 1); // 1-based
    let origin = vec![Rational::zero(); d];
    let shifted_point = {
        // (1, 0, ..., 0): every family using it has F(1,0,...,0) = 0
        let mut p = vec![Rational::zero(); d];
        p[0] = Rational::one();
        p
    };
    let (f, point, constraint) = match id.family {
        Family::T1Quadric => {
            let f = x(d).sub(&sum_of_squares(d, 1..=n));
            (f, origin, None)
        }
        Family::T2(1) => {
            let f = x(d)
                .sub(&x(1).mul(&x(n)))
                .sub(&sum_of_squares(d, 2..=n - 1));
            (f, origin, None)
        }
        Family::T2(2) => {
            let f = x(d)
                .sub(&x(1).mul(&x(n)))
                .sub(&sum_of_squares(d, 2..=n - 1))
                .sub(&x(1).pow(3));
            (f, origin, None)
        }
        Family::T2(3) => {
            let alpha = id.alpha.clone().unwrap_or_else(Rational::zero);
            let f = x(d)
                .sub(&x(1).mul(&x(n)))
                .sub(&sum_of_squares(d, 2..=n - 1))
                .sub(&x(1).pow(2).mul(&x(2)))
                .sub(&x(1).pow(4).scale(&alpha));
            (f, origin, None)
        }
        Family::T2(4) => {
            let f = x(d)
                .sub(&x(1).mul(&x(n)))
                .sub(&x(1).mul(&sum_of_squares(d, 2..=n - 1)));
            (f, shifted_point, None)
        }
        Family::T2(5) => {
            // 0 = x_{n+1} - 2 x_{n+1} x_n - 2 x_1 x_n^2 + x_1 x_n + 1/2 sum x_i^2
            let f = x(d)
                .sub(&x(d).mul(&x(n)).scale(&rat_int(2)))
                .sub(&x(1).mul(&x(n).pow(2)).scale(&rat_int(2)))
                .add(&x(1).mul(&x(n)))
                .add(&sum_of_squares(d, 2..=n - 1).scale(&rat(1, 2)));
            (f, origin, None)
        }
        Family::T2(6) => {
            let f = x(d)
                .sub(&x(1).mul(&x(n)))
                .sub(&sum_of_squares(d, 2..=n - 1))
                .sub(&x(1).mul(&x(2).pow(2)));
            (f, origin, None)
        }
        Family::T2(7) => {
            // (1 - 2 x_n)(x_{n+1} + x_1 x_n + 1/2 sum x_i^2) + x_n x_2^2
            let bracket = x(d)
                .add(&x(1).mul(&x(n)))
                .add(&sum_of_squares(d, 2..=n - 1).scale(&rat(1, 2)));
            let one_minus = RatPoly::one(d).sub(&x(n).scale(&rat_int(2)));
            let f = one_minus.mul(&bracket).add(&x(n).mul(&x(2).pow(2)));
            (f, origin, None)
        }
        Family::Sec6Gamma => {
            let f = x(d)
                .sub(&x(1).mul(&x(2)))
                .sub(&x(1).mul(&sum_of_squares(d, 3..=n)));
            let constraint = Constraint {
                poly: x(1),
                positive: true,
            };
            (f, shifted_point, Some(constraint))
        }
        Family::T2(k) => return Err(Error::Config(format!("no family t2.{k}"))),
    };
    Hypersurface::new(n, f, constraint, point)
}

/// Parameters of the affine group acting on the generalized type C surface:
/// `x1 -> q x1`, `x2 -> r^2 (x2 - 2 sum s_j x_j + t)`, `x_j -> r (x_j + s_j)`,
/// `x_{n+1} -> q r^2 (x_{n+1} + x1 sum s_j^2 + t x1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupParams {
    pub q: Rational,
    pub r: Rational,
    pub t: Rational,
    /// `s_3 .. s_n` (length `n - 2`)
    pub s: Vec<Rational>,
}

impl GroupParams {
    pub fn new(q: Rational, r: Rational, t: Rational, s: Vec<Rational>) -> Result<GroupParams> {
        if !q.is_positive() {
            return Err(Error::Config("group parameter q must be positive".into()));
        }
        if r.is_zero() {
            return Err(Error::Config("group parameter r must be nonzero".into()));
        }
        Ok(GroupParams { q, r, t, s })
    }

    pub fn identity(n: usize) -> GroupParams {
        GroupParams {
            q: Rational::one(),
            r: Rational::one(),
            t: Rational::zero(),
            s: vec![Rational::zero(); n - 2],
        }
    }

    pub fn n(&self) -> usize {
        self.s.len() + 2
    }

    /// The printed affine transformation on `R^{n+1}`.
    pub fn to_affine_map(&self) -> AffineMap {
        let n = self.n();
        let d = n + 1;
        let r_sq = &self.r * &self.r;
        let qr_sq = &self.q * &r_sq;
        let mut m = RatMatrix::zeros(d, d);
        let mut b = vec![Rational::zero(); d];
        m[(0, 0)] = self.q.clone();
        m[(1, 1)] = r_sq.clone();
        for (k, sj) in self.s.iter().enumerate() {
            let j = 2 + k; // zero-based index of x_{3+k}
            m[(1, j)] = -rat_int(2) * &r_sq * sj;
            m[(j, j)] = self.r.clone();
            b[j] = &self.r * sj;
        }
        b[1] = &r_sq * &self.t;
        let s_norm: Rational = self.s.iter().map(|sj| sj * sj).sum();
        m[(n, n)] = qr_sq.clone();
        m[(n, 0)] = &qr_sq * (&s_norm + &self.t);
        AffineMap::new(m, b)
    }

    /// Group law: `self` after `first`.
    pub fn compose(&self, first: &GroupParams) -> GroupParams {
        assert_eq!(self.n(), first.n());
        let (a, b) = (first, self);
        let r = &a.r * &b.r;
        let s: Vec<Rational> =
            a.s.iter()
                .zip(&b.s)
                .map(|(sa, sb)| sa + sb / &a.r)
                .collect();
        let cross: Rational = a.s.iter().zip(&b.s).map(|(sa, sb)| sa * sb).sum();
        let t = &a.t + (&b.t - rat_int(2) * &a.r * cross) / (&a.r * &a.r);
        GroupParams {
            q: &a.q * &b.q,
            r,
            t,
            s,
        }
    }

    pub fn inverse(&self) -> GroupParams {
        let r_sq = &self.r * &self.r;
        let s_norm: Rational = self.s.iter().map(|sj| sj * sj).sum();
        GroupParams {
            q: Rational::one() / &self.q,
            r: Rational::one() / &self.r,
            t: -(&r_sq * (&self.t + rat_int(2) * s_norm)),
            s: self.s.iter().map(|sj| -(&self.r * sj)).collect(),
        }
    }
}

/// Applies the printed group map to an exact point.
pub fn group_act(g: &GroupParams, x: &[Rational]) -> Vec<Rational> {
    g.to_affine_map().apply(x)
}

/// Checks the exact polynomial identity `F ∘ g = q r^2 F` for the
/// generalized type C surface, which preserves the zero set and both open
/// sides.
pub fn surface_invariance(g: &GroupParams, id: &SurfaceId) -> Result<bool> {
    if id.family != Family::Sec6Gamma {
        return Err(Error::Config(
            "surface invariance applies to the sec6 family".into(),
        ));
    }
    if g.n() != id.n {
        return Err(Error::DimensionMismatch(
            "group parameters do not match n".into(),
        ));
    }
    let factor = &g.q * &g.r * &g.r;
    Ok(invariance_defect(&g.to_affine_map(), &factor, id)?.is_zero())
}

/// `F ∘ map - factor * F`; zero exactly when the map multiplies the
/// defining polynomial by `factor`.
pub fn invariance_defect(map: &AffineMap, factor: &Rational, id: &SurfaceId) -> Result<RatPoly> {
    let surface = make_surface(id)?;
    let f = surface.defining_poly();
    let composed = f.compose(&map.substitution_polys())?;
    Ok(composed.sub(&f.scale(factor)))
}

/// A quotient of polynomials over the rationals, used for the symbolic
/// transitivity identity. No gcd reduction; equality is tested by
/// cross-multiplication.
#[derive(Clone, Debug)]
pub struct RatFunc {
    pub num: RatPoly,
    pub den: RatPoly,
}

impl RatFunc {
    pub fn from_poly(p: RatPoly) -> RatFunc {
        let nv = p.nvars();
        RatFunc {
            num: p,
            den: RatPoly::one(nv),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> RatFunc {
        RatFunc::from_poly(RatPoly::constant(nvars, c))
    }

    pub fn div(num: RatPoly, den: RatPoly) -> RatFunc {
        assert!(!den.is_zero());
        RatFunc { num, den }
    }

    pub fn mul(&self, other: &RatFunc) -> RatFunc {
        RatFunc {
            num: self.num.mul(&other.num),
            den: self.den.mul(&other.den),
        }
    }

    pub fn add(&self, other: &RatFunc) -> RatFunc {
        RatFunc {
            num: self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            den: self.den.mul(&other.den),
        }
    }

    pub fn sub(&self, other: &RatFunc) -> RatFunc {
        RatFunc {
            num: self.num.mul(&other.den).sub(&other.num.mul(&self.den)),
            den: self.den.mul(&other.den),
        }
    }

    /// Substitutes polynomials for the variables in both numerator and
    /// denominator.
    pub fn substitute(&self, subst: &[RatPoly]) -> Result<RatFunc> {
        Ok(RatFunc {
            num: self.num.compose(subst)?,
            den: self.den.compose(subst)?,
        })
    }

    /// Equality with a polynomial: `num = p * den`.
    pub fn equals_poly(&self, p: &RatPoly) -> bool {
        self.num.sub(&p.mul(&self.den)).is_zero()
    }
}

/// The printed parameter formulas of the transitivity argument, as rational
/// functions in `(x_1, ..., x_{n+1}, h)` where `h` is the auxiliary element
/// `±(x_{n+1} - x_1 x_2 - x_1 sum x_j^2)`. Only the rational combinations
/// `r^2`, `r s_j`, `t`, `s_j^2` enter the image components.
#[derive(Clone, Debug)]
pub struct TransitivityFormulas {
    pub n: usize,
    pub q: RatFunc,
    pub r_sq: RatFunc,
    pub t: RatFunc,
    pub r_s: Vec<RatFunc>,
    pub s_sq: Vec<RatFunc>,
}

/// Which side of the surface the domain lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Above,
    Below,
}

impl Side {
    pub fn sign(&self) -> i64 {
        match self {
            Side::Above => 1,
            Side::Below => -1,
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Side> {
        match s {
            ">" => Ok(Side::Above),
            "<" => Ok(Side::Below),
            _ => Err(Error::Config(format!("side must be '>' or '<', got '{s}'"))),
        }
    }
}

impl TransitivityFormulas {
    /// The formulas as printed: `q = x1`, `r^2 = h/x1`, `t = x1 x2 / h`,
    /// `r s_j = x_j`, `s_j^2 = x_j^2 x1 / h`.
    pub fn printed(n: usize) -> TransitivityFormulas {
        let nv = n + 2; // x1..x_{n+1}, h
        let x = |i: usize| MultiPoly::<Rational>::var(nv, i - 1);
        let h = x(n + 2);
        TransitivityFormulas {
            n,
            q: RatFunc::from_poly(x(1)),
            r_sq: RatFunc::div(h.clone(), x(1)),
            t: RatFunc::div(x(1).mul(&x(2)), h.clone()),
            r_s: (3..=n).map(|j| RatFunc::from_poly(x(j))).collect(),
            s_sq: (3..=n)
                .map(|j| RatFunc::div(x(j).pow(2).mul(&x(1)), h.clone()))
                .collect(),
        }
    }
}

/// Verifies symbolically that applying the group with the printed parameter
/// formulas to the base point `(1, 0, ..., 0, ±1)` reaches the generic
/// point `(x_1, ..., x_{n+1})`: each image component, after substituting
/// the defining expression for `h`, reduces to the matching coordinate.
pub fn verify_transitivity(n: usize, side: Side) -> Result<bool> {
    transitivity_identity_holds(side, &TransitivityFormulas::printed(n))
}

/// The identity check against caller-supplied parameter formulas (used for
/// the corrupted-formula controls).
pub fn transitivity_identity_holds(side: Side, formulas: &TransitivityFormulas) -> Result<bool> {
    let n = formulas.n;
    if n < 4 {
        return Err(Error::Config(
            "transitivity verification requires n >= 4".into(),
        ));
    }
    let nv = n + 2;
    let x = |i: usize| MultiPoly::<Rational>::var(nv, i - 1);

    // image of the base point (1, 0, ..., 0, sign) under the group map
    let mut components: Vec<RatFunc> = Vec::with_capacity(n + 1);
    components.push(formulas.q.clone()); // x1
    components.push(formulas.r_sq.mul(&formulas.t)); // x2
    for rs in &formulas.r_s {
        components.push(rs.clone());
    }
    // x_{n+1}: q r^2 (sign + t + sum s_j^2)
    let mut inner = RatFunc::constant(nv, rat_int(side.sign()));
    inner = inner.add(&formulas.t);
    for ssq in &formulas.s_sq {
        inner = inner.add(ssq);
    }
    components.push(formulas.q.mul(&formulas.r_sq).mul(&inner));

    // coherence of the stored combinations: (r s_j)^2 = r^2 * s_j^2
    for (rs, ssq) in formulas.r_s.iter().zip(&formulas.s_sq) {
        let lhs = rs.mul(rs);
        let rhs = formulas.r_sq.mul(ssq);
        if !lhs.sub(&rhs).num.is_zero() {
            return Ok(false);
        }
    }

    // h = sign * (x_{n+1} - x1 x2 - x1 sum_{j=3}^n x_j^2)
    let mut defect = x(n + 1).sub(&x(1).mul(&x(2)));
    for j in 3..=n {
        defect = defect.sub(&x(1).mul(&x(j).pow(2)));
    }
    let h_poly = defect.scale(&rat_int(side.sign()));
    let mut subst: Vec<RatPoly> = (1..=n + 1).map(x).collect();
    subst.push(h_poly);

    for (i, comp) in components.iter().enumerate() {
        let reduced = comp.substitute(&subst)?;
        if reduced.den.is_zero() {
            return Err(Error::Config(
                "denominator vanished under substitution".into(),
            ));
        }
        if !reduced.equals_poly(&x(i + 1)) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_rational_poly;
    use rand::{Rng, SeedableRng};

    fn id(family: Family, n: usize) -> SurfaceId {
        SurfaceId::new(family, n, None).unwrap()
    }

    fn random_params(n: usize, rng: &mut rand_chacha::ChaCha8Rng) -> GroupParams {
        let mut r = rat_int(0);
        while r.is_zero() {
            r = rat(rng.gen_range(-6..=6), rng.gen_range(1..=4));
        }
        GroupParams::new(
            rat(rng.gen_range(1..=8), rng.gen_range(1..=5)),
            r,
            rat(rng.gen_range(-5..=5), rng.gen_range(1..=3)),
            (0..n - 2)
                .map(|_| rat(rng.gen_range(-4..=4), rng.gen_range(1..=3)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn printed_surfaces_match() {
        let s = make_surface(&id(Family::T2(1), 4)).unwrap();
        let want = parse_rational_poly("x5 - x1*x4 - x2^2 - x3^2", 5).unwrap();
        assert_eq!(s.defining_poly(), &want);

        let s = make_surface(&id(Family::T2(7), 4)).unwrap();
        let want = parse_rational_poly(
            "x5 + x1*x4 + 1/2*x2^2 + 1/2*x3^2 - 2*x4*x5 - 2*x1*x4^2 - x2^2*x4 - x3^2*x4 + x2^2*x4",
            5,
        )
        .unwrap();
        assert_eq!(s.defining_poly(), &want);

        let s = make_surface(&id(Family::Sec6Gamma, 4)).unwrap();
        let want = parse_rational_poly("x5 - x1*x2 - x1*x3^2 - x1*x4^2", 5).unwrap();
        assert_eq!(s.defining_poly(), &want);
        assert!(s.constraint().is_some());
        assert_eq!(s.ref_point()[0], rat_int(1));
    }

    #[test]
    fn alternate_form_of_family_five_agrees() {
        // (1 - 2 x_n)(x_{n+1} + x_1 x_n + 1/2 sum x_i^2) + x_n sum x_i^2
        for n in [4usize, 5, 6] {
            let s = make_surface(&id(Family::T2(5), n)).unwrap();
            let d = n + 1;
            let x = |i: usize| MultiPoly::<Rational>::var(d, i - 1);
            let mid = sum_of_squares(d, 2..=n - 1);
            let bracket = x(d).add(&x(1).mul(&x(n))).add(&mid.scale(&rat(1, 2)));
            let one_minus = RatPoly::one(d).sub(&x(n).scale(&rat_int(2)));
            let alt = one_minus.mul(&bracket).add(&x(n).mul(&mid));
            assert_eq!(s.defining_poly(), &alt);
        }
    }

    #[test]
    fn every_catalog_surface_constructs() {
        for f in Family::all() {
            let ns: Vec<usize> = match f {
                Family::T1Quadric => (2..=6).collect(),
                _ => (4..=6).collect(),
            };
            for n in ns {
                let sid = SurfaceId::new(f, n, None).unwrap();
                let s = make_surface(&sid).unwrap();
                // construction already validated F(p) = 0 and grad != 0
                assert_eq!(s.n(), n);
            }
        }
    }

    #[test]
    fn id_validation() {
        assert!(SurfaceId::new(Family::T2(1), 3, None).is_err());
        assert!(SurfaceId::new(Family::T2(1), 4, Some(rat_int(1))).is_err());
        let with_alpha = SurfaceId::new(Family::T2(3), 4, Some(rat(1, 7))).unwrap();
        assert_eq!(with_alpha.alpha, Some(rat(1, 7)));
        let default_alpha = SurfaceId::new(Family::T2(3), 4, None).unwrap();
        assert_eq!(default_alpha.alpha, Some(rat_int(0)));
    }

    #[test]
    fn identity_params_act_trivially() {
        let g = GroupParams::identity(4);
        let x = vec![rat_int(3), rat(1, 2), rat_int(-1), rat_int(0), rat_int(7)];
        assert_eq!(group_act(&g, &x), x);
    }

    #[test]
    fn base_point_image_formula() {
        // the printed image (q, r^2 t, r s_3, ..., r s_n, q r^2 (1 + t + sum s_j^2))
        let g = GroupParams::new(
            rat(3, 2),
            rat(-2, 1),
            rat(5, 3),
            vec![rat(1, 2), rat(-1, 3)],
        )
        .unwrap();
        let mut base = vec![rat_int(1), rat_int(0), rat_int(0), rat_int(0), rat_int(1)];
        let image = group_act(&g, &base);
        let r_sq = rat_int(4);
        let s_norm = rat(1, 4) + rat(1, 9);
        assert_eq!(image[0], rat(3, 2));
        assert_eq!(image[1], &r_sq * rat(5, 3));
        assert_eq!(image[2], rat_int(-2) * rat(1, 2));
        assert_eq!(image[3], rat_int(-2) * rat(-1, 3));
        assert_eq!(
            image[4],
            rat(3, 2) * &r_sq * (rat_int(1) + rat(5, 3) + s_norm)
        );
        // off-surface points stay off the surface side
        base[4] = rat_int(2);
        let im2 = group_act(&g, &base);
        assert_ne!(im2, image);
    }

    #[test]
    fn composition_closure_and_inverse() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let a = random_params(5, &mut rng);
            let b = random_params(5, &mut rng);
            let c = b.compose(&a);
            // the composite parameter tuple acts as the composed map, exactly
            assert_eq!(
                c.to_affine_map(),
                b.to_affine_map().compose(&a.to_affine_map())
            );
            let inv = a.inverse();
            let e = inv.compose(&a);
            assert_eq!(e.to_affine_map(), AffineMap::identity(6));
        }
    }

    #[test]
    fn invariance_identity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let sid = id(Family::Sec6Gamma, 4);
        assert!(surface_invariance(&GroupParams::identity(4), &sid).unwrap());
        for _ in 0..5 {
            let g = random_params(4, &mut rng);
            assert!(surface_invariance(&g, &sid).unwrap());
        }
        // flipping the sign of the x2 row breaks the identity
        let g = random_params(4, &mut rng);
        let mut map = g.to_affine_map();
        for j in 0..5 {
            map.linear[(1, j)] = -map.linear[(1, j)].clone();
        }
        map.translation[1] = -map.translation[1].clone();
        let factor = &g.q * &g.r * &g.r;
        assert!(!invariance_defect(&map, &factor, &sid).unwrap().is_zero());
    }

    #[test]
    fn transitivity_identity() {
        assert!(verify_transitivity(4, Side::Above).unwrap());
        assert!(verify_transitivity(4, Side::Below).unwrap());
        assert!(verify_transitivity(5, Side::Above).unwrap());
        assert!(verify_transitivity(5, Side::Below).unwrap());
    }

    #[test]
    fn corrupted_transitivity_fails() {
        // dropping the sum s_j^2 term leaves a nonzero residual
        let mut formulas = TransitivityFormulas::printed(4);
        let nv = 4 + 2;
        formulas.s_sq = formulas
            .s_sq
            .iter()
            .map(|_| RatFunc::constant(nv, rat_int(0)))
            .collect();
        assert!(!transitivity_identity_holds(Side::Above, &formulas).unwrap());
    }
}
