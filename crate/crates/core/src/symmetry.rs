//! Affine symmetry Lie algebras of polynomial hypersurfaces: the tangency
//! solver, isotropy subalgebras, jet-stabilizer filtrations and the
//! homogeneity closure check.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::matrix::{annihilator, independent_subset, ExactMatrix, SpanReducer};
use crate::parse::Constraint;
use crate::poly::Mono;
use crate::scalar::{primitive_normalize, Rational};
use crate::{RatMatrix, RatPoly};

/// The affine vector field `x -> Ax + b` on `R^d`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AffineVectorField {
    pub linear: RatMatrix,
    pub translation: Vec<Rational>,
}

impl AffineVectorField {
    pub fn new(linear: RatMatrix, translation: Vec<Rational>) -> Self {
        assert_eq!(linear.rows(), linear.cols());
        assert_eq!(linear.rows(), translation.len());
        AffineVectorField {
            linear,
            translation,
        }
    }

    pub fn zero(dim: usize) -> Self {
        AffineVectorField {
            linear: ExactMatrix::zeros(dim, dim),
            translation: vec![Rational::zero(); dim],
        }
    }

    /// The constant field `∂/∂x_i`.
    pub fn partial(dim: usize, i: usize) -> Self {
        let mut f = Self::zero(dim);
        f.translation[i] = Rational::one();
        f
    }

    /// The linear field `x_j ∂/∂x_i`.
    pub fn linear_unit(dim: usize, i: usize, j: usize) -> Self {
        let mut f = Self::zero(dim);
        f.linear[(i, j)] = Rational::one();
        f
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn is_zero(&self) -> bool {
        self.linear.is_zero() && self.translation.iter().all(Zero::is_zero)
    }

    pub fn eval(&self, p: &[Rational]) -> Vec<Rational> {
        self.linear
            .mul_vec(p)
            .into_iter()
            .zip(&self.translation)
            .map(|(a, b)| a + b)
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        AffineVectorField {
            linear: self.linear.add(&other.linear),
            translation: self
                .translation
                .iter()
                .zip(&other.translation)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        AffineVectorField {
            linear: self.linear.scale(c),
            translation: self.translation.iter().map(|t| t * c).collect(),
        }
    }

    /// Lie bracket of vector fields: for `X = (A, a)`, `Y = (B, b)` the
    /// commutator `[X, Y] = DY·X - DX·Y` has linear part `BA - AB` and
    /// translation `Ba - Ab`.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "bracket of fields on R^{} and R^{}",
                self.dim(),
                other.dim()
            )));
        }
        let linear = other
            .linear
            .mul(&self.linear)
            .sub(&self.linear.mul(&other.linear));
        let translation = other
            .linear
            .mul_vec(&self.translation)
            .into_iter()
            .zip(self.linear.mul_vec(&other.translation))
            .map(|(x, y)| x - y)
            .collect();
        Ok(AffineVectorField {
            linear,
            translation,
        })
    }

    /// The derivation `X(F) = ∇F · (Ax + b)`.
    pub fn apply(&self, f: &RatPoly) -> RatPoly {
        let d = self.dim();
        assert_eq!(f.nvars(), d);
        let mut out = RatPoly::zero(d);
        for i in 0..d {
            let df = f.partial(i);
            if df.is_zero() {
                continue;
            }
            let mut comp = RatPoly::constant(d, self.translation[i].clone());
            for j in 0..d {
                if !self.linear[(i, j)].is_zero() {
                    comp.add_term(Mono::var(d, j), self.linear[(i, j)].clone());
                }
            }
            out = out.add(&df.mul(&comp));
        }
        out
    }

    /// Flattens to the coefficient vector (row-major linear part, then the
    /// translation) used for all span computations.
    pub fn flatten(&self) -> Vec<Rational> {
        let d = self.dim();
        let mut v = Vec::with_capacity(d * d + d);
        for i in 0..d {
            v.extend(self.linear.row(i).iter().cloned());
        }
        v.extend(self.translation.iter().cloned());
        v
    }

    pub fn from_flat(dim: usize, v: &[Rational]) -> Self {
        assert_eq!(v.len(), dim * dim + dim);
        let linear = ExactMatrix::from_fn(dim, dim, |i, j| v[i * dim + j].clone());
        AffineVectorField {
            linear,
            translation: v[dim * dim..].to_vec(),
        }
    }

    /// Rewrites the field in the coordinates `x = M y + t`.
    ///
    /// The pullback has linear part `M^-1 A M` and translation
    /// `M^-1 (A t + b)`.
    pub fn pullback(&self, map: &AffineMap) -> Self {
        let minv = map.linear.inverse().expect("frame must be invertible");
        let linear = minv.mul(&self.linear).mul(&map.linear);
        let at_b: Vec<Rational> = self
            .linear
            .mul_vec(&map.translation)
            .into_iter()
            .zip(&self.translation)
            .map(|(x, b)| x + b)
            .collect();
        AffineVectorField {
            linear,
            translation: minv.mul_vec(&at_b),
        }
    }
}

/// The invertible affine coordinate change `x = M y + t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMap {
    pub linear: RatMatrix,
    pub translation: Vec<Rational>,
}

impl AffineMap {
    pub fn new(linear: RatMatrix, translation: Vec<Rational>) -> Self {
        assert_eq!(linear.rows(), linear.cols());
        assert_eq!(linear.rows(), translation.len());
        AffineMap {
            linear,
            translation,
        }
    }

    pub fn identity(dim: usize) -> Self {
        AffineMap {
            linear: ExactMatrix::identity(dim),
            translation: vec![Rational::zero(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn apply(&self, p: &[Rational]) -> Vec<Rational> {
        self.linear
            .mul_vec(p)
            .into_iter()
            .zip(&self.translation)
            .map(|(a, b)| a + b)
            .collect()
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &Self) -> Self {
        AffineMap {
            linear: self.linear.mul(&other.linear),
            translation: self.apply(&other.translation),
        }
    }

    pub fn inverse(&self) -> Option<Self> {
        let minv = self.linear.inverse()?;
        let t = minv
            .mul_vec(&self.translation)
            .into_iter()
            .map(|x| -x)
            .collect();
        Some(AffineMap {
            linear: minv,
            translation: t,
        })
    }

    /// The components as degree-one polynomials, for substitution.
    pub fn substitution_polys(&self) -> Vec<RatPoly> {
        let d = self.dim();
        (0..d)
            .map(|i| {
                let mut p = RatPoly::constant(d, self.translation[i].clone());
                for j in 0..d {
                    if !self.linear[(i, j)].is_zero() {
                        p.add_term(Mono::var(d, j), self.linear[(i, j)].clone());
                    }
                }
                p
            })
            .collect()
    }
}

/// A polynomial hypersurface `{F = 0}` in `R^{n+1}` with a validated
/// reference point.
#[derive(Clone, Debug)]
pub struct Hypersurface {
    n: usize,
    f: RatPoly,
    constraint: Option<Constraint>,
    ref_point: Vec<Rational>,
}

impl Hypersurface {
    /// Validates that `F` is nonzero, vanishes at the reference point with
    /// nonzero gradient, and that the reference point satisfies the open
    /// constraint when one is given.
    pub fn new(
        n: usize,
        f: RatPoly,
        constraint: Option<Constraint>,
        ref_point: Vec<Rational>,
    ) -> Result<Self> {
        if f.nvars() != n + 1 {
            return Err(Error::InvalidSurface(format!(
                "defining polynomial must live in {} variables, found {}",
                n + 1,
                f.nvars()
            )));
        }
        if f.is_zero() {
            return Err(Error::InvalidSurface("defining polynomial is zero".into()));
        }
        if ref_point.len() != n + 1 {
            return Err(Error::InvalidSurface(
                "reference point has wrong dimension".into(),
            ));
        }
        if !f.eval(&ref_point).is_zero() {
            return Err(Error::InvalidSurface(
                "reference point does not lie on the surface".into(),
            ));
        }
        let grad = gradient_at(&f, &ref_point);
        if grad.iter().all(Zero::is_zero) {
            return Err(Error::SingularPoint);
        }
        if let Some(c) = &constraint {
            if !c.holds_at(&ref_point) {
                return Err(Error::InvalidSurface(
                    "reference point violates the open constraint".into(),
                ));
            }
        }
        Ok(Hypersurface {
            n,
            f,
            constraint,
            ref_point,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ambient_dim(&self) -> usize {
        self.n + 1
    }

    pub fn defining_poly(&self) -> &RatPoly {
        &self.f
    }

    pub fn constraint(&self) -> Option<&Constraint> {
        self.constraint.as_ref()
    }

    pub fn ref_point(&self) -> &[Rational] {
        &self.ref_point
    }

    pub fn gradient_at(&self, p: &[Rational]) -> Vec<Rational> {
        gradient_at(&self.f, p)
    }

    pub fn contains(&self, p: &[Rational]) -> bool {
        self.f.eval(p).is_zero()
    }

    /// The surface in the coordinates `x = M y + t`, with the reference
    /// point carried along.
    pub fn transformed(&self, map: &AffineMap) -> Result<Hypersurface> {
        let subs = map.substitution_polys();
        let g = self.f.compose(&subs)?;
        let inv = map
            .inverse()
            .ok_or_else(|| Error::InvalidSurface("coordinate change is singular".into()))?;
        let new_constraint = match &self.constraint {
            None => None,
            Some(c) => Some(Constraint {
                poly: c.poly.compose(&subs)?,
                positive: c.positive,
            }),
        };
        Hypersurface::new(self.n, g, new_constraint, inv.apply(&self.ref_point))
    }
}

fn gradient_at(f: &RatPoly, p: &[Rational]) -> Vec<Rational> {
    (0..f.nvars()).map(|i| f.partial(i).eval(p)).collect()
}

/// A finite list of linearly independent affine vector fields, optionally
/// with cached structure constants.
#[derive(Clone, Debug)]
pub struct LieAlgebraBasis {
    dim: usize,
    fields: Vec<AffineVectorField>,
    structure: Option<Vec<Vec<Vec<Rational>>>>,
}

impl LieAlgebraBasis {
    pub fn new(dim: usize, fields: Vec<AffineVectorField>) -> Result<Self> {
        let flat: Vec<Vec<Rational>> = fields.iter().map(AffineVectorField::flatten).collect();
        let reducer = SpanReducer::from_vectors(dim * dim + dim, &flat);
        if reducer.rank() != fields.len() {
            return Err(Error::InvalidSurface(
                "basis fields are linearly dependent".into(),
            ));
        }
        Ok(LieAlgebraBasis {
            dim,
            fields,
            structure: None,
        })
    }

    pub fn empty(dim: usize) -> Self {
        LieAlgebraBasis {
            dim,
            fields: Vec::new(),
            structure: None,
        }
    }

    /// The full affine algebra `aff(d) = gl(d) + R^d`.
    pub fn full_affine(dim: usize) -> Self {
        let mut fields = Vec::with_capacity(dim * dim + dim);
        for i in 0..dim {
            for j in 0..dim {
                fields.push(AffineVectorField::linear_unit(dim, i, j));
            }
        }
        for i in 0..dim {
            fields.push(AffineVectorField::partial(dim, i));
        }
        LieAlgebraBasis {
            dim,
            fields,
            structure: None,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn fields(&self) -> &[AffineVectorField] {
        &self.fields
    }

    pub fn flat_vectors(&self) -> Vec<Vec<Rational>> {
        self.fields.iter().map(AffineVectorField::flatten).collect()
    }

    fn reducer(&self) -> SpanReducer<Rational> {
        SpanReducer::from_vectors(self.dim * self.dim + self.dim, &self.flat_vectors())
    }

    pub fn contains(&self, field: &AffineVectorField) -> bool {
        self.reducer().contains(&field.flatten())
    }

    /// True when all pairwise brackets stay in the span.
    pub fn is_closed(&self) -> Result<bool> {
        let reducer = self.reducer();
        for i in 0..self.fields.len() {
            for j in i + 1..self.fields.len() {
                let br = self.fields[i].bracket(&self.fields[j])?;
                if !reducer.contains(&br.flatten()) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Computes and caches the structure constants `[f_i, f_j] = Σ c[i][j][k] f_k`.
    #[allow(clippy::needless_range_loop)] // triangular index pairs
    pub fn with_structure(mut self) -> Result<Self> {
        let k = self.fields.len();
        let n = self.dim * self.dim + self.dim;
        let cols: Vec<Vec<Rational>> = self.flat_vectors();
        let mat = ExactMatrix::from_fn(n, k, |i, j| cols[j][i].clone());
        let mut table = vec![vec![vec![Rational::zero(); k]; k]; k];
        for i in 0..k {
            for j in i + 1..k {
                let br = self.fields[i].bracket(&self.fields[j])?;
                let coords = mat.solve(&br.flatten()).ok_or(Error::NotClosed)?;
                // solve() gives a candidate; confirm it reproduces the bracket
                let mut rebuilt = AffineVectorField::zero(self.dim);
                for (c, f) in coords.iter().zip(&self.fields) {
                    rebuilt = rebuilt.add(&f.scale(c));
                }
                if rebuilt != br {
                    return Err(Error::NotClosed);
                }
                for l in 0..k {
                    table[i][j][l] = coords[l].clone();
                    table[j][i][l] = -coords[l].clone();
                }
            }
        }
        self.structure = Some(table);
        Ok(self)
    }

    pub fn structure(&self) -> Option<&Vec<Vec<Vec<Rational>>>> {
        self.structure.as_ref()
    }
}

/// All affine fields `X` with `X(F) = μ·F` for a constant `μ`.
///
/// Since `X` is affine, `deg X(F) <= deg F`, so the identity forces a
/// constant multiplier for irreducible `F` of exact degree. Degenerate
/// inputs may supply a positive `μ`-degree bound via
/// [`symmetry_algebra_with_mu_degree`].
pub fn symmetry_algebra(s: &Hypersurface) -> Result<LieAlgebraBasis> {
    symmetry_algebra_with_mu_degree(s, 0)
}

/// As [`symmetry_algebra`], with the multiplier allowed to be a polynomial
/// of total degree at most `mu_degree`.
#[allow(clippy::needless_range_loop)]
pub fn symmetry_algebra_with_mu_degree(
    s: &Hypersurface,
    mu_degree: usize,
) -> Result<LieAlgebraBasis> {
    let d = s.ambient_dim();
    let f = s.defining_poly();
    let mu_monos = monomials_up_to(d, mu_degree);
    let n_unknowns = d * d + d + mu_monos.len();

    // coefficient polynomial multiplying each unknown in X(F) - μF = 0
    let mut coeff_polys: Vec<RatPoly> = Vec::with_capacity(n_unknowns);
    let partials: Vec<RatPoly> = (0..d).map(|i| f.partial(i)).collect();
    for i in 0..d {
        for j in 0..d {
            coeff_polys.push(partials[i].mul(&RatPoly::var(d, j)));
        }
    }
    for p in &partials {
        coeff_polys.push(p.clone());
    }
    for m in &mu_monos {
        let mono_poly = RatPoly::from_terms(d, [(m.clone(), Rational::one())]);
        coeff_polys.push(f.mul(&mono_poly).neg());
    }

    // assemble the linear system, one row per monomial
    let mut row_index: std::collections::BTreeMap<Mono, usize> = Default::default();
    for p in &coeff_polys {
        for (m, _) in p.terms() {
            let next = row_index.len();
            row_index.entry(m.clone()).or_insert(next);
        }
    }
    let mut mat = ExactMatrix::<Rational>::zeros(row_index.len(), n_unknowns);
    for (col, p) in coeff_polys.iter().enumerate() {
        for (m, c) in p.terms() {
            mat[(row_index[m], col)] = c.clone();
        }
    }

    let fields = mat
        .nullspace()
        .into_iter()
        .map(|v| AffineVectorField::from_flat(d, &v[..d * d + d]))
        .collect();
    LieAlgebraBasis::new(d, fields)
}

pub(crate) fn monomials_up_to(nvars: usize, deg: usize) -> Vec<Mono> {
    let mut out = Vec::new();
    let mut cur = vec![0u16; nvars];
    fn rec(out: &mut Vec<Mono>, cur: &mut Vec<u16>, var: usize, left: usize) {
        if var == cur.len() {
            out.push(Mono(cur.clone()));
            return;
        }
        for e in 0..=left {
            cur[var] = e as u16;
            rec(out, cur, var + 1, left - e);
        }
        cur[var] = 0;
    }
    rec(&mut out, &mut cur, 0, deg);
    out
}

/// The subalgebra of fields in the span of `l` vanishing at `p`.
pub fn isotropy_at(l: &LieAlgebraBasis, p: &[Rational]) -> Result<LieAlgebraBasis> {
    let d = l.ambient_dim();
    if p.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "point lives in R^{}, algebra acts on R^{}",
            p.len(),
            d
        )));
    }
    if l.is_empty() {
        return Ok(LieAlgebraBasis::empty(d));
    }
    let evals: Vec<Vec<Rational>> = l.fields().iter().map(|f| f.eval(p)).collect();
    let mat = ExactMatrix::from_fn(d, l.len(), |i, j| evals[j][i].clone());
    let combos = mat.nullspace();
    let fields = combos
        .iter()
        .map(|c| {
            let mut acc = AffineVectorField::zero(d);
            for (coef, f) in c.iter().zip(l.fields()) {
                acc = acc.add(&f.scale(coef));
            }
            AffineVectorField::from_flat(d, &primitive_normalize(&acc.flatten()))
        })
        .collect();
    LieAlgebraBasis::new(d, fields)
}

/// Dimension of the image of the evaluation map at `p` intersected with the
/// tangent plane of `s` at `p`. Local transitivity on the surface is
/// equivalent to the value `n`.
pub fn transitivity_rank(l: &LieAlgebraBasis, p: &[Rational], s: &Hypersurface) -> Result<usize> {
    if !s.contains(p) {
        return Err(Error::InvalidSurface(
            "point does not lie on the surface".into(),
        ));
    }
    let d = l.ambient_dim();
    let evals: Vec<Vec<Rational>> = l.fields().iter().map(|f| f.eval(p)).collect();
    let e_reducer = SpanReducer::from_vectors(d, &evals);
    let dim_e = e_reducer.rank();
    // tangent plane = kernel of the gradient functional
    let grad = s.gradient_at(p);
    let tangent = ExactMatrix::from_rows(vec![grad]).nullspace();
    let dim_t = tangent.len();
    let mut sum_reducer = SpanReducer::from_vectors(d, &tangent);
    for v in &evals {
        sum_reducer.insert(v);
    }
    Ok(dim_e + dim_t - sum_reducer.rank())
}

/// The filtration of jet stabilizers `g_0 ⊇ g_1 ⊇ ...` with
/// `g_{i+1} = { X ∈ g_i : [X, h] ⊆ g_i + h }`.
#[derive(Clone, Debug)]
pub struct Filtration {
    pub chain: Vec<LieAlgebraBasis>,
    pub dims: Vec<usize>,
    pub stabilized_at: usize,
}

impl Filtration {
    pub fn stable(&self) -> &LieAlgebraBasis {
        &self.chain[self.stabilized_at]
    }
}

/// Computes the filtration of `p`-isotropy jet stabilizers of `h` inside
/// `g_full`, iterating until the dimensions stabilize.
pub fn filtration(
    h: &LieAlgebraBasis,
    g_full: &LieAlgebraBasis,
    p: &[Rational],
) -> Result<Filtration> {
    if !h.is_closed()? {
        return Err(Error::NotClosed);
    }
    let d = h.ambient_dim();
    let coord_dim = d * d + d;
    let h_flat = h.flat_vectors();

    let g0 = isotropy_at(g_full, p)?;
    let mut chain = vec![g0];
    let mut dims = vec![chain[0].len()];

    loop {
        let cur = chain.last().unwrap();
        if cur.is_empty() {
            break;
        }
        // functionals vanishing on g_i + h
        let mut span: Vec<Vec<Rational>> = cur.flat_vectors();
        span.extend(h_flat.iter().cloned());
        let functionals = annihilator(coord_dim, &span);

        // linear conditions on coefficients over the g_i basis
        let k = cur.len();
        let mut rows: Vec<Vec<Rational>> = Vec::new();
        for hf in h.fields() {
            let brackets: Vec<Vec<Rational>> = cur
                .fields()
                .iter()
                .map(|x| x.bracket(hf).map(|b| b.flatten()))
                .collect::<Result<_>>()?;
            for lam in &functionals {
                let row: Vec<Rational> = (0..k)
                    .map(|j| {
                        lam.iter()
                            .zip(&brackets[j])
                            .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
                    })
                    .collect();
                if row.iter().any(|x| !x.is_zero()) {
                    rows.push(row);
                }
            }
        }
        let combos = if rows.is_empty() {
            // no conditions: g_{i+1} = g_i
            ExactMatrix::<Rational>::zeros(1, k).nullspace()
        } else {
            ExactMatrix::from_rows(rows).nullspace()
        };
        let fields: Vec<AffineVectorField> = combos
            .iter()
            .map(|c| {
                let mut acc = AffineVectorField::zero(d);
                for (coef, f) in c.iter().zip(cur.fields()) {
                    acc = acc.add(&f.scale(coef));
                }
                AffineVectorField::from_flat(d, &primitive_normalize(&acc.flatten()))
            })
            .collect();
        let next = LieAlgebraBasis::new(d, fields)?;
        let stable = next.len() == cur.len();
        dims.push(next.len());
        chain.push(next);
        if stable {
            break;
        }
    }

    let stabilized_at = if dims.len() == 1 { 0 } else { dims.len() - 2 };
    Ok(Filtration {
        chain,
        dims,
        stabilized_at,
    })
}

/// The homogeneity closure condition at level `i`: for all `X, Y` in a basis
/// of `h + g_{i+1}`, the bracket `[X, Y]` lies in `h + g_i`.
pub fn check_prop_cs(h: &LieAlgebraBasis, filt: &Filtration, i: usize) -> Result<bool> {
    if i + 1 >= filt.chain.len() {
        return Err(Error::Config(format!(
            "filtration level {} not available (chain length {})",
            i + 1,
            filt.chain.len()
        )));
    }
    let d = h.ambient_dim();
    let coord_dim = d * d + d;

    let mut upper: Vec<Vec<Rational>> = h.flat_vectors();
    upper.extend(filt.chain[i + 1].flat_vectors());
    let upper_basis = independent_subset(coord_dim, &upper);

    let mut target: Vec<Vec<Rational>> = h.flat_vectors();
    target.extend(filt.chain[i].flat_vectors());
    let target_span = SpanReducer::from_vectors(coord_dim, &target);

    let fields: Vec<AffineVectorField> = upper_basis
        .iter()
        .map(|v| AffineVectorField::from_flat(d, v))
        .collect();
    for a in 0..fields.len() {
        for b in a + 1..fields.len() {
            let br = fields[a].bracket(&fields[b])?;
            if !target_span.contains(&br.flatten()) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_rational_poly;
    use crate::scalar::{rat, rat_int};

    fn pt(coords: &[i64]) -> Vec<Rational> {
        coords.iter().map(|&c| rat_int(c)).collect()
    }

    fn paraboloid() -> Hypersurface {
        let f = parse_rational_poly("x3 - x1^2 - x2^2", 3).unwrap();
        Hypersurface::new(2, f, None, pt(&[0, 0, 0])).unwrap()
    }

    #[test]
    fn bracket_antisymmetry() {
        let mut x = AffineVectorField::zero(3);
        x.linear[(0, 1)] = rat_int(2);
        x.translation[2] = rat(1, 3);
        assert!(x.bracket(&x).unwrap().is_zero());
    }

    #[test]
    fn bracket_euler_translation() {
        // [x1 d1, d1] = -d1
        let x = AffineVectorField::linear_unit(2, 0, 0);
        let y = AffineVectorField::partial(2, 0);
        let br = x.bracket(&y).unwrap();
        assert_eq!(br, AffineVectorField::partial(2, 0).scale(&rat_int(-1)));
    }

    #[test]
    fn bracket_jacobi_identity() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let d = 3;
        let random_field = |rng: &mut rand_chacha::ChaCha8Rng| {
            let mut f = AffineVectorField::zero(d);
            for i in 0..d {
                for j in 0..d {
                    f.linear[(i, j)] = rat_int(rng.gen_range(-3..=3));
                }
                f.translation[i] = rat_int(rng.gen_range(-3..=3));
            }
            f
        };
        for _ in 0..10 {
            let x = random_field(&mut rng);
            let y = random_field(&mut rng);
            let z = random_field(&mut rng);
            let lhs = x
                .bracket(&y)
                .unwrap()
                .bracket(&z)
                .unwrap()
                .add(&y.bracket(&z).unwrap().bracket(&x).unwrap())
                .add(&z.bracket(&x).unwrap().bracket(&y).unwrap());
            assert!(lhs.is_zero());
        }
    }

    #[test]
    fn bracket_matches_derivation_commutator() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let d = 3;
        let f = parse_rational_poly("x3^2 - x1*x2 + 2*x1 - x2^3", 3).unwrap();
        for _ in 0..5 {
            let mut x = AffineVectorField::zero(d);
            let mut y = AffineVectorField::zero(d);
            for i in 0..d {
                for j in 0..d {
                    x.linear[(i, j)] = rat_int(rng.gen_range(-2..=2));
                    y.linear[(i, j)] = rat_int(rng.gen_range(-2..=2));
                }
                x.translation[i] = rat_int(rng.gen_range(-2..=2));
                y.translation[i] = rat_int(rng.gen_range(-2..=2));
            }
            let lhs = x.bracket(&y).unwrap().apply(&f);
            let rhs = x.apply(&y.apply(&f)).sub(&y.apply(&x.apply(&f)));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn paraboloid_symmetry_dimension() {
        let s = paraboloid();
        let alg = symmetry_algebra(&s).unwrap();
        assert_eq!(alg.len(), 4);
        // cross-check: two surface translations, the rotation and the scaling
        let d = 3;
        let mut t1 = AffineVectorField::partial(d, 0);
        t1.linear[(2, 0)] = rat_int(2); // d1 + 2 x1 d3
        let mut t2 = AffineVectorField::partial(d, 1);
        t2.linear[(2, 1)] = rat_int(2);
        let mut rot = AffineVectorField::zero(d);
        rot.linear[(0, 1)] = rat_int(1);
        rot.linear[(1, 0)] = rat_int(-1);
        let mut sc = AffineVectorField::zero(d);
        sc.linear[(0, 0)] = rat_int(1);
        sc.linear[(1, 1)] = rat_int(1);
        sc.linear[(2, 2)] = rat_int(2);
        for field in [&t1, &t2, &rot, &sc] {
            assert!(
                alg.contains(field),
                "explicit generator missing from the solved algebra"
            );
            // genuine tangency: X(F) is a constant multiple of F
            let xf = field.apply(s.defining_poly());
            assert!(
                xf.is_zero()
                    || xf
                        .div_exact(s.defining_poly())
                        .is_some_and(|q| q.degree() == Some(0))
            );
        }
        assert!(alg.is_closed().unwrap());
    }

    #[test]
    fn perturbed_quadric_loses_transitivity() {
        let f = parse_rational_poly("x3 - x1^2 - x2^2 - x1^4 - 3*x2^5", 3).unwrap();
        let s = Hypersurface::new(2, f, None, pt(&[0, 0, 0])).unwrap();
        let alg = symmetry_algebra(&s).unwrap();
        assert!(
            alg.len() < 3,
            "perturbation must break transitivity, got dim {}",
            alg.len()
        );
    }

    #[test]
    fn isotropy_of_translations_is_trivial() {
        let fields = (0..3).map(|i| AffineVectorField::partial(3, i)).collect();
        let l = LieAlgebraBasis::new(3, fields).unwrap();
        let iso = isotropy_at(&l, &pt(&[1, 2, 3])).unwrap();
        assert_eq!(iso.len(), 0);
    }

    #[test]
    fn paraboloid_isotropy_and_transitivity() {
        let s = paraboloid();
        let alg = symmetry_algebra(&s).unwrap();
        let iso = isotropy_at(&alg, s.ref_point()).unwrap();
        assert_eq!(iso.len(), 2);
        for f in iso.fields() {
            assert!(f.eval(s.ref_point()).iter().all(num_traits::Zero::is_zero));
            assert!(alg.contains(f));
        }
        let rank = transitivity_rank(&alg, s.ref_point(), &s).unwrap();
        assert_eq!(rank, 2);
        assert_eq!(alg.len(), rank + iso.len());
    }

    #[test]
    fn transitivity_of_zero_algebra() {
        let s = paraboloid();
        let l = LieAlgebraBasis::empty(3);
        assert_eq!(transitivity_rank(&l, s.ref_point(), &s).unwrap(), 0);
    }

    #[test]
    fn quadric_filtration_stabilizes_at_conformal_isotropy() {
        // Lorentzian quadric x5 = x1 x4 + x2^2 + x3^2 for n = 4:
        // the stable jet stabilizer is cso(3,1) of dimension n(n-1)/2 + 1 = 7.
        let f = parse_rational_poly("x5 - x1*x4 - x2^2 - x3^2", 5).unwrap();
        let s = Hypersurface::new(4, f, None, pt(&[0, 0, 0, 0, 0])).unwrap();
        let h = symmetry_algebra(&s).unwrap();
        assert_eq!(h.len(), 11); // n + n(n-1)/2 + 1
        let g_full = LieAlgebraBasis::full_affine(5);
        let filt = filtration(&h, &g_full, s.ref_point()).unwrap();
        assert_eq!(filt.stable().len(), 7);
        // weakly decreasing dims, strictly until stabilization
        for w in filt.dims.windows(2) {
            assert!(w[0] >= w[1]);
        }
        // the stable algebra coincides with the isotropy of h itself
        let iso = isotropy_at(&h, s.ref_point()).unwrap();
        let stable = filt.stable();
        assert_eq!(stable.len(), iso.len());
        for f in iso.fields() {
            assert!(stable.contains(f));
        }
        // closure holds at every level
        for i in 0..filt.chain.len() - 1 {
            assert!(check_prop_cs(&h, &filt, i).unwrap());
        }
    }

    #[test]
    fn abelian_translation_filtration_is_immediate() {
        let fields: Vec<_> = (0..3).map(|i| AffineVectorField::partial(3, i)).collect();
        let h = LieAlgebraBasis::new(3, fields).unwrap();
        let filt = filtration(&h, &h, &pt(&[0, 0, 0])).unwrap();
        assert_eq!(filt.dims, vec![0]);
        assert_eq!(filt.stabilized_at, 0);
    }

    #[test]
    fn prop_cs_counterexample() {
        // h = span{d2}, fake chain with g0 = g1 = span{x2 d1}:
        // [d2, x2 d1] = d1 does not lie in h + g0.
        let d2 = AffineVectorField::partial(3, 1);
        let x2d1 = AffineVectorField::linear_unit(3, 0, 1);
        let h = LieAlgebraBasis::new(3, vec![d2]).unwrap();
        let g = LieAlgebraBasis::new(3, vec![x2d1]).unwrap();
        let filt = Filtration {
            chain: vec![g.clone(), g],
            dims: vec![1, 1],
            stabilized_at: 0,
        };
        assert!(!check_prop_cs(&h, &filt, 0).unwrap());
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn structure_constants_cache() {
        let s = paraboloid();
        let alg = symmetry_algebra(&s).unwrap().with_structure().unwrap();
        let table = alg.structure().unwrap();
        let k = alg.len();
        for i in 0..k {
            for j in 0..k {
                let br = alg.fields()[i].bracket(&alg.fields()[j]).unwrap();
                let mut rebuilt = AffineVectorField::zero(3);
                for (c, f) in table[i][j].iter().zip(alg.fields()) {
                    rebuilt = rebuilt.add(&f.scale(c));
                }
                assert_eq!(rebuilt, br);
            }
        }
        // a non-closed list is rejected
        let open_set = LieAlgebraBasis::new(
            2,
            vec![
                AffineVectorField::linear_unit(2, 0, 1),
                AffineVectorField::partial(2, 1),
            ],
        )
        .unwrap();
        assert!(open_set.with_structure().is_err());
    }

    #[test]
    fn multiplier_degree_bound_changes_nothing_for_exact_degrees() {
        // an affine field cannot raise the degree, so a polynomial
        // multiplier collapses to its constant term
        let s = paraboloid();
        let plain = symmetry_algebra(&s).unwrap();
        let extended = symmetry_algebra_with_mu_degree(&s, 2).unwrap();
        assert_eq!(plain.len(), extended.len());
        for f in plain.fields() {
            assert!(extended.contains(f));
        }
    }

    #[test]
    fn pullback_roundtrip() {
        let mut m = RatMatrix::identity(3);
        m[(0, 1)] = rat_int(2);
        m[(2, 0)] = rat_int(-1);
        let map = AffineMap::new(m, pt(&[1, 0, -2]));
        let mut x = AffineVectorField::zero(3);
        x.linear[(0, 2)] = rat_int(3);
        x.translation[1] = rat_int(1);
        let back = x.pullback(&map).pullback(&map.inverse().unwrap());
        assert_eq!(back, x);
    }
}
