//! Frame adaptation at a point of a hypersurface: the order-3 graph jet,
//! second fundamental form and its signature, the trace-normalized cubic
//! tensor, its pseudo-norm and Lorentzian orbit type, and the tube-domain
//! criterion.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::matrix::{congruence_diagonalize, independent_subset, ExactMatrix};
use crate::poly::{Mono, MultiPoly, TruncSeries};
use crate::scalar::{
    primitive_normalize, rat_int, rational_roots, rational_squarefree_part, Rational,
};
use crate::symmetry::{isotropy_at, symmetry_algebra, AffineMap, Hypersurface};
use crate::{RatMatrix, RatPoly, RatSeries};

/// Order-3 jet of a hypersurface at a point, in tangent-adapted graph
/// coordinates: the surface reads `y_{n+1} = y^T Q y + f3(y) + ...`.
#[derive(Clone, Debug)]
pub struct Jet3 {
    n: usize,
    q: RatMatrix,
    /// homogeneous cubic in the `n` tangent variables
    cubic: RatPoly,
    /// the affine change `x = M y + p` from jet to ambient coordinates
    frame: AffineMap,
    /// the solved graph function (linear part removed) up to the cap
    graph: RatSeries,
}

impl Jet3 {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn quadratic_form(&self) -> &RatMatrix {
        &self.q
    }

    pub fn cubic(&self) -> &RatPoly {
        &self.cubic
    }

    pub fn frame(&self) -> &AffineMap {
        &self.frame
    }

    pub fn graph(&self) -> &RatSeries {
        &self.graph
    }

    /// A jet built directly from a quadratic form and a cubic, with the
    /// identity frame. Used to feed synthetic jets through the adaptation
    /// and tensor pipeline.
    pub fn synthetic(q: RatMatrix, cubic: RatPoly) -> Jet3 {
        let n = q.rows();
        assert!(q.is_symmetric());
        assert_eq!(cubic.nvars(), n);
        let graph = {
            let mut f2 = RatPoly::zero(n);
            for i in 0..n {
                for j in 0..n {
                    if !q[(i, j)].is_zero() {
                        let mut m = Mono::one(n);
                        m.0[i] += 1;
                        m.0[j] += 1;
                        f2.add_term(m, q[(i, j)].clone());
                    }
                }
            }
            TruncSeries::new(f2.add(&cubic), 3)
        };
        Jet3 {
            n,
            q,
            cubic,
            frame: AffineMap::identity(n + 1),
            graph,
        }
    }

    /// Raw signature counts of `Q`: `(p, q, rank)`.
    pub fn signature_raw(&self) -> (usize, usize, usize) {
        let c = congruence_diagonalize(&self.q).expect("jet Q is symmetric by construction");
        let (p, q) = c.signature;
        (p, q, p + q)
    }

    /// Signature of the second fundamental form. The convention `p >= q` is
    /// not imposed; a singular form is reported as degenerate with its rank.
    pub fn signature(&self) -> Result<(usize, usize)> {
        let (p, q, rank) = self.signature_raw();
        if rank < self.n {
            return Err(Error::DegenerateForm { rank, dim: self.n });
        }
        Ok((p, q))
    }

    /// Negates the graph coordinate, flipping `Q -> -Q` and `C -> -C`. This
    /// is the affine recoordinatization used to orient an indefinite jet so
    /// that `p >= q`.
    pub fn flipped(&self) -> Jet3 {
        let d = self.n + 1;
        let mut flip = ExactMatrix::identity(d);
        flip[(self.n, self.n)] = -Rational::one();
        Jet3 {
            n: self.n,
            q: self.q.neg(),
            cubic: self.cubic.neg(),
            frame: AffineMap::new(self.frame.linear.mul(&flip), self.frame.translation.clone()),
            graph: self.graph.neg(),
        }
    }

    /// Returns the jet oriented so that `p >= q`, and whether a flip was
    /// applied.
    pub fn oriented(&self) -> (Jet3, bool) {
        let (p, q, _) = self.signature_raw();
        if q > p {
            (self.flipped(), true)
        } else {
            (self.clone(), false)
        }
    }
}

/// Computes the order-`order` graph jet of `s` at `p`.
///
/// Translates `p` to the origin, picks a graph coordinate with nonzero
/// gradient component, solves the implicit equation as a truncated series by
/// exact coefficient matching, and removes the linear part by a shear.
pub fn graph_jet(s: &Hypersurface, p: &[Rational], order: usize) -> Result<Jet3> {
    let n = s.n();
    let d = n + 1;
    if p.len() != d {
        return Err(Error::DimensionMismatch(
            "reference point has wrong dimension".into(),
        ));
    }
    if !s.contains(p) {
        return Err(Error::InvalidSurface(
            "point does not lie on the surface".into(),
        ));
    }
    let grad = s.gradient_at(p);
    // prefer the last coordinate as the graph direction
    let Some(k) = (0..d).rev().find(|&i| !grad[i].is_zero()) else {
        return Err(Error::SingularPoint);
    };

    // x = P w + p, with the graph coordinate moved last
    let sigma: Vec<usize> = (0..d).filter(|&i| i != k).chain([k]).collect();
    let mut perm = ExactMatrix::<Rational>::zeros(d, d);
    for (new, &old) in sigma.iter().enumerate() {
        perm[(old, new)] = Rational::one();
    }
    let translate_perm = AffineMap::new(perm, p.to_vec());
    let g = s
        .defining_poly()
        .compose(&translate_perm.substitution_polys())?;

    // g(u, v) = a v + (terms without a lone v); solve v = phi(u)
    let a = g.coeff(&Mono::var(d, n));
    debug_assert!(!a.is_zero());
    let a_inv = Rational::one() / a;
    let u_vars: Vec<RatSeries> = (0..n).map(|i| TruncSeries::var(n, i, order)).collect();
    let mut v = TruncSeries::zero(n, order);
    let mut iterations = 0usize;
    loop {
        let mut subst = u_vars.clone();
        subst.push(v.clone());
        let residual = g.compose_series(&subst)?;
        if residual.is_zero() {
            break;
        }
        v = v.sub(&residual.scale(&a_inv));
        iterations += 1;
        assert!(
            iterations <= order + 2,
            "implicit solve failed to stabilize; the gradient check should prevent this"
        );
    }
    debug_assert!(v.poly().constant_term().is_zero());

    let linear = v.poly().homogeneous_part(1);
    let f2 = v.poly().homogeneous_part(2);
    let cubic = v.poly().homogeneous_part(3);

    // shear w = Sh w' so that the graph function loses its linear part
    let mut shear = ExactMatrix::<Rational>::identity(d);
    for j in 0..n {
        shear[(n, j)] = linear.coeff(&Mono::var(n, j));
    }
    let frame = AffineMap::new(translate_perm.linear.mul(&shear), p.to_vec());

    let mut q = ExactMatrix::<Rational>::zeros(n, n);
    for i in 0..n {
        let mut m = Mono::one(n);
        m.0[i] = 2;
        q[(i, i)] = f2.coeff(&m);
        for j in i + 1..n {
            let mut m = Mono::one(n);
            m.0[i] = 1;
            m.0[j] = 1;
            let half = f2.coeff(&m) * crate::scalar::rat(1, 2);
            q[(i, j)] = half.clone();
            q[(j, i)] = half;
        }
    }

    let graph = TruncSeries::new(v.poly().sub(&linear), order);
    Ok(Jet3 {
        n,
        q,
        cubic,
        frame,
        graph,
    })
}

/// How far the metric was normalized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MetricKind {
    /// Exactly the anti-diagonal normal form `I_{p,q}`.
    AntiDiagonal,
    /// `c` times the anti-diagonal normal form, `c` square-free.
    Scaled(Rational),
    /// Diagonal with square-free entries; no further rational normalization
    /// was found.
    Diagonal,
}

/// A non-degenerate symmetric bilinear form in normalized coordinates.
#[derive(Clone, Debug)]
pub struct MetricForm {
    pub sig: (usize, usize),
    pub mat: RatMatrix,
    pub kind: MetricKind,
}

impl MetricForm {
    pub fn n(&self) -> usize {
        self.mat.rows()
    }

    pub fn inverse(&self) -> RatMatrix {
        self.mat.inverse().expect("metric is non-degenerate")
    }

    pub fn is_lorentzian(&self) -> bool {
        self.sig.1 == 1 && self.sig.0 == self.n() - 1
    }

    pub fn is_definite(&self) -> bool {
        self.sig.1 == 0 && self.sig.0 == self.n()
    }

    /// `<x, y> = x^T G y`
    pub fn pairing(&self, x: &[Rational], y: &[Rational]) -> Rational {
        self.mat
            .mul_vec(y)
            .iter()
            .zip(x)
            .fold(Rational::zero(), |acc, (gy, xi)| acc + gy * xi)
    }
}

/// The anti-diagonal normal form `I_{p,q}` with blocks `(q, p-q, q)`:
/// `(x_i, x_{p+i}) = 1` for the first `q` indices and `(x_i, x_i) = 1` on
/// the middle block.
pub fn standard_metric(p: usize, q: usize) -> RatMatrix {
    assert!(p >= q);
    let n = p + q;
    let mut g = ExactMatrix::<Rational>::zeros(n, n);
    for i in 0..q {
        g[(i, p + i)] = Rational::one();
        g[(p + i, i)] = Rational::one();
    }
    for i in q..p {
        g[(i, i)] = Rational::one();
    }
    g
}

/// A jet with the quadratic form brought to a normalized metric; the cubic
/// is carried along and the frame extended by the adapting transformation.
#[derive(Clone, Debug)]
pub struct AdaptedJet {
    pub n: usize,
    pub metric: MetricForm,
    /// cubic in the adapted tangent coordinates
    pub cubic: RatPoly,
    /// invertible tangent transformation with `B^T Q B = metric.mat`
    pub adapt: RatMatrix,
    /// the full-space frame `x = M y + p` including the adaptation
    pub frame: AffineMap,
}

/// Brings the jet's quadratic form to the anti-diagonal convention exactly
/// when a rational congruence reaches it, to `c * I_{p,q}` with square-free
/// `c` otherwise, and to a square-free diagonal form as a last resort.
///
/// Requires a non-degenerate, oriented (`p >= q`) jet.
pub fn adapt_frame(jet: &Jet3) -> Result<AdaptedJet> {
    let n = jet.n;
    let cong = congruence_diagonalize(&jet.q)?;
    let (p, q) = cong.signature;
    if p + q < n {
        return Err(Error::DegenerateForm {
            rank: p + q,
            dim: n,
        });
    }
    if p < q {
        return Err(Error::Unsupported(
            "jet must be oriented (p >= q) before frame adaptation".into(),
        ));
    }
    // already in the normal form: nothing to do
    if jet.q == standard_metric(p, q) {
        let metric = MetricForm {
            sig: (p, q),
            mat: jet.q.clone(),
            kind: MetricKind::AntiDiagonal,
        };
        return Ok(finish_adaptation(jet, ExactMatrix::identity(n), metric));
    }

    // scale each basis column so the diagonal entries become square-free
    // integers
    let mut b = cong.basis.clone();
    let mut entries: Vec<BigInt> = Vec::with_capacity(n);
    for i in 0..n {
        let d = cong.diagonal[(i, i)].clone();
        let (s, t) = rational_squarefree_part(&d);
        // d / t^2 = s
        let t_inv = Rational::one() / t;
        for r in 0..n {
            let v = b[(r, i)].clone() * &t_inv;
            b[(r, i)] = v;
        }
        entries.push(s);
    }

    // pair positives with negatives of the same square-free magnitude
    let mut pos: Vec<(usize, BigInt)> = Vec::new();
    let mut neg: Vec<(usize, BigInt)> = Vec::new();
    for (i, s) in entries.iter().enumerate() {
        if s.is_positive() {
            pos.push((i, s.clone()));
        } else {
            neg.push((i, -s.clone()));
        }
    }
    let mut pairs: Vec<(usize, usize, BigInt)> = Vec::new(); // (pos idx, neg idx, magnitude)
    let mut used_pos = vec![false; pos.len()];
    let mut exact = true;
    for (ni, nmag) in &neg {
        match pos
            .iter()
            .enumerate()
            .find(|(k, (_, pmag))| !used_pos[*k] && pmag == nmag)
        {
            Some((k, (pi, _))) => {
                used_pos[k] = true;
                pairs.push((*pi, *ni, nmag.clone()));
            }
            None => {
                exact = false;
                break;
            }
        }
    }

    let columns_of =
        |b: &RatMatrix, i: usize| -> Vec<Rational> { (0..n).map(|r| b[(r, i)].clone()).collect() };
    let combine = |b: &RatMatrix, coef: &[(usize, Rational)]| -> Vec<Rational> {
        let mut v = vec![Rational::zero(); n];
        for (i, c) in coef {
            for r in 0..n {
                let add = b[(r, *i)].clone() * c;
                let cur = v[r].clone();
                v[r] = cur + add;
            }
        }
        v
    };

    if exact {
        // middle block: positives not used by pairs
        let middle: Vec<(usize, BigInt)> = pos
            .iter()
            .zip(&used_pos)
            .filter(|(_, used)| !**used)
            .map(|((i, s), _)| (*i, s.clone()))
            .collect();

        // First try converting every pair (c, c) with c a sum of two squares
        // into units, targeting the plain anti-diagonal form; if leftovers
        // survive, retry without conversions targeting `c * I_{p,q}`.
        let mut unit_cols: Vec<Vec<Rational>> = Vec::new();
        let mut remaining: Vec<(usize, BigInt)> = Vec::new();
        {
            let mut stack = middle.clone();
            while let Some((i, c)) = stack.pop() {
                if c.is_one() {
                    unit_cols.push(columns_of(&b, i));
                    continue;
                }
                if let Some(pos2) = stack.iter().position(|(_, c2)| *c2 == c) {
                    if let Some((x, y)) = two_square_decomposition(&c) {
                        let (j, _) = stack.remove(pos2);
                        let cr = Rational::from_integer(c.clone());
                        let xi = x / &cr;
                        let yi = y / &cr;
                        unit_cols.push(combine(&b, &[(i, xi.clone()), (j, yi.clone())]));
                        unit_cols.push(combine(&b, &[(i, -yi), (j, xi)]));
                        continue;
                    }
                }
                remaining.push((i, c));
            }
        }
        let scale_class: Option<BigInt> = if remaining.is_empty() {
            Some(BigInt::one())
        } else if middle.iter().all(|(_, s)| *s == middle[0].1) {
            unit_cols = Vec::new();
            remaining = middle.clone();
            Some(middle[0].1.clone())
        } else {
            None
        };

        if let Some(c) = scale_class {
            let c_rat = Rational::from_integer(c.clone());
            // hyperbolic pairs: u = e+ + e-, w = (e+ - e-) * c/(2m)
            let mut first_block: Vec<Vec<Rational>> = Vec::new();
            let mut last_block: Vec<Vec<Rational>> = Vec::new();
            for (pi, ni, m) in &pairs {
                let u = combine(&b, &[(*pi, Rational::one()), (*ni, Rational::one())]);
                let half = &c_rat / (Rational::from_integer(m.clone()) * rat_int(2));
                let w = combine(&b, &[(*pi, half.clone()), (*ni, -half)]);
                first_block.push(u);
                last_block.push(w);
            }
            let mut middle_cols: Vec<Vec<Rational>> = unit_cols;
            for (i, _) in &remaining {
                middle_cols.push(columns_of(&b, *i));
            }
            let mut cols = first_block;
            cols.append(&mut middle_cols);
            cols.append(&mut last_block);
            let adapt = ExactMatrix::from_fn(n, n, |r, cidx| cols[cidx][r].clone());
            let g = standard_metric(p, q).scale(&c_rat);
            let check = adapt.transpose().mul(&jet.q).mul(&adapt);
            assert_eq!(check, g, "congruence identity must hold exactly");
            let kind = if c.is_one() {
                MetricKind::AntiDiagonal
            } else {
                MetricKind::Scaled(c_rat)
            };
            return Ok(finish_adaptation(
                jet,
                adapt,
                MetricForm {
                    sig: (p, q),
                    mat: g,
                    kind,
                },
            ));
        }
    }

    // fallback: keep the square-free diagonal form, positives first
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (entries[i].is_negative(), i));
    let adapt = ExactMatrix::from_fn(n, n, |r, cidx| b[(r, order[cidx])].clone());
    let mut g = ExactMatrix::<Rational>::zeros(n, n);
    for (cidx, &i) in order.iter().enumerate() {
        g[(cidx, cidx)] = Rational::from_integer(entries[i].clone());
    }
    let check = adapt.transpose().mul(&jet.q).mul(&adapt);
    assert_eq!(check, g, "congruence identity must hold exactly");
    Ok(finish_adaptation(
        jet,
        adapt,
        MetricForm {
            sig: (p, q),
            mat: g,
            kind: MetricKind::Diagonal,
        },
    ))
}

fn finish_adaptation(jet: &Jet3, adapt: RatMatrix, metric: MetricForm) -> AdaptedJet {
    let n = jet.n;
    let d = n + 1;
    // cubic in the new tangent coordinates: C'(y) = C(B y)
    let subs: Vec<RatPoly> = (0..n)
        .map(|i| {
            let mut p = RatPoly::zero(n);
            for j in 0..n {
                if !adapt[(i, j)].is_zero() {
                    p.add_term(Mono::var(n, j), adapt[(i, j)].clone());
                }
            }
            p
        })
        .collect();
    let cubic = jet.cubic.compose(&subs).expect("arity is fixed");
    let mut full = ExactMatrix::<Rational>::identity(d);
    for i in 0..n {
        for j in 0..n {
            full[(i, j)] = adapt[(i, j)].clone();
        }
    }
    let frame = AffineMap::new(jet.frame.linear.mul(&full), jet.frame.translation.clone());
    AdaptedJet {
        n,
        metric,
        cubic,
        adapt,
        frame,
    }
}

/// Writes a square-free positive integer as a sum of two rational squares.
/// For square-free integers, representability over the rationals implies an
/// integer representation, so the direct search decides.
fn two_square_decomposition(c: &BigInt) -> Option<(Rational, Rational)> {
    let mut x = BigInt::zero();
    while &x * &x <= *c {
        let rest = c - &x * &x;
        let y = rest.sqrt();
        if &y * &y == rest {
            return Some((Rational::from_integer(x), Rational::from_integer(y)));
        }
        x += 1;
    }
    None
}

/// The entry `T(a, b, c)` of the symmetric tensor attached to a cubic form
/// `f(y) = sum T_{abc} y_a y_b y_c`.
pub fn cubic_tensor_entry(cubic: &RatPoly, a: usize, b: usize, c: usize) -> Rational {
    let n = cubic.nvars();
    let mut m = Mono::one(n);
    m.0[a] += 1;
    m.0[b] += 1;
    m.0[c] += 1;
    let coeff = cubic.coeff(&m);
    if coeff.is_zero() {
        return coeff;
    }
    // number of distinct permutations of (a, b, c)
    let perms = if a == b && b == c {
        1
    } else if a == b || b == c || a == c {
        3
    } else {
        6
    };
    coeff / rat_int(perms)
}

/// The trace-normalized third-order tensor together with the shift that
/// killed the trace.
#[derive(Clone, Debug)]
pub struct L1Tensor {
    pub metric: MetricForm,
    /// trace-free symmetric cubic, as a cubic form
    pub tensor: RatPoly,
    /// the graph-level translation used to remove the trace
    pub d_shift: Vec<Rational>,
}

impl L1Tensor {
    pub fn n(&self) -> usize {
        self.metric.n()
    }

    pub fn is_zero(&self) -> bool {
        self.tensor.is_zero()
    }

    /// The operator `L1(X)` with `<L1(X) Y, Z> = T(X, Y, Z)`, i.e.
    /// `G^{-1} T(X, ., .)`; self-adjointness w.r.t. the metric is the
    /// statement that `G L1(X)` is symmetric.
    pub fn operator(&self, x: &[Rational]) -> RatMatrix {
        let n = self.n();
        let tx = ExactMatrix::from_fn(n, n, |b, c| {
            (0..n).fold(Rational::zero(), |acc, a| {
                acc + cubic_tensor_entry(&self.tensor, a, b, c) * &x[a]
            })
        });
        self.metric.inverse().mul(&tx)
    }
}

/// The metric trace of a cubic form: the covector
/// `tr T(X) = sum_{jk} G^{jk} T(e_j, e_k, X)`.
pub fn metric_trace(cubic: &RatPoly, metric: &MetricForm) -> Vec<Rational> {
    let n = metric.n();
    let ginv = metric.inverse();
    (0..n)
        .map(|c| {
            let mut acc = Rational::zero();
            for j in 0..n {
                for k in 0..n {
                    if !ginv[(j, k)].is_zero() {
                        acc += ginv[(j, k)].clone() * cubic_tensor_entry(cubic, j, k, c);
                    }
                }
            }
            acc
        })
        .collect()
}

/// Identifies the cubic of the adapted jet with a symmetric 3-tensor and
/// removes its metric trace with the unique graph-level shift.
///
/// The shift `x' = x' + D x_{n+1}` changes the cubic by
/// `-2 <y, D> <y, y>`, whose trace is `-2(n+2)/3 <D, X>`; non-degeneracy of
/// the metric makes the trace-killing `D` unique. For `n = 2` the normal
/// form convention leaves no room to shift, so only already trace-free
/// cubics are accepted.
pub fn extract_l1(adapted: &AdaptedJet) -> Result<L1Tensor> {
    let n = adapted.n;
    let metric = adapted.metric.clone();
    let trace = metric_trace(&adapted.cubic, &metric);
    if trace.iter().all(Zero::is_zero) {
        return Ok(L1Tensor {
            metric,
            tensor: adapted.cubic.clone(),
            d_shift: vec![Rational::zero(); n],
        });
    }
    if n == 2 {
        return Err(Error::Unsupported(
            "n = 2: the trace shift coefficient vanishes and the cubic is not trace-free".into(),
        ));
    }
    // D = 3/(2(n+2)) * G^{-1} tr
    let factor = crate::scalar::rat(3, 2 * (n as i64 + 2));
    let ginv = metric.inverse();
    let d_shift: Vec<Rational> = ginv
        .mul_vec(&trace)
        .into_iter()
        .map(|x| x * &factor)
        .collect();

    // T_tf = C - 2 <y, D> <y, y>
    let gd = metric.mat.mul_vec(&d_shift);
    let mut lin = RatPoly::zero(n);
    for (j, c) in gd.iter().enumerate() {
        if !c.is_zero() {
            lin.add_term(Mono::var(n, j), c.clone());
        }
    }
    let mut quad = RatPoly::zero(n);
    for i in 0..n {
        for j in 0..n {
            if !metric.mat[(i, j)].is_zero() {
                let mut m = Mono::one(n);
                m.0[i] += 1;
                m.0[j] += 1;
                quad.add_term(m, metric.mat[(i, j)].clone());
            }
        }
    }
    let tensor = adapted.cubic.sub(&lin.mul(&quad).scale(&rat_int(2)));
    let residual = metric_trace(&tensor, &metric);
    assert!(
        residual.iter().all(Zero::is_zero),
        "trace removal must be exact"
    );
    Ok(L1Tensor {
        metric,
        tensor,
        d_shift,
    })
}

/// Full contraction of `T ⊗ T` with three copies of the inverse metric.
pub fn pseudo_norm_sq(t: &L1Tensor) -> Rational {
    let n = t.n();
    let ginv = t.metric.inverse();
    // dense tensor for the contraction
    let mut dense = vec![Rational::zero(); n * n * n];
    for (m, _) in t.tensor.terms() {
        let mut idx = Vec::with_capacity(3);
        for (i, &e) in m.0.iter().enumerate() {
            for _ in 0..e {
                idx.push(i);
            }
        }
        debug_assert_eq!(idx.len(), 3);
        let val = cubic_tensor_entry(&t.tensor, idx[0], idx[1], idx[2]);
        // fill all permutations
        let perms = [
            [idx[0], idx[1], idx[2]],
            [idx[0], idx[2], idx[1]],
            [idx[1], idx[0], idx[2]],
            [idx[1], idx[2], idx[0]],
            [idx[2], idx[0], idx[1]],
            [idx[2], idx[1], idx[0]],
        ];
        for p in perms {
            dense[(p[0] * n + p[1]) * n + p[2]] = val.clone();
        }
    }
    let entry = |a: usize, b: usize, c: usize| &dense[(a * n + b) * n + c];
    let mut acc = Rational::zero();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if entry(a, b, c).is_zero() {
                    continue;
                }
                for d in 0..n {
                    if ginv[(a, d)].is_zero() {
                        continue;
                    }
                    for e in 0..n {
                        if ginv[(b, e)].is_zero() {
                            continue;
                        }
                        for f in 0..n {
                            if ginv[(c, f)].is_zero() || entry(d, e, f).is_zero() {
                                continue;
                            }
                            acc += entry(a, b, c).clone()
                                * entry(d, e, f).clone()
                                * ginv[(a, d)].clone()
                                * ginv[(b, e)].clone()
                                * ginv[(c, f)].clone();
                        }
                    }
                }
            }
        }
    }
    acc
}

/// Orbit type of a Lorentzian trace-free cubic tensor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrbitType {
    Zero,
    /// `c * l^3` with `l` null
    CubeNull,
    /// `l^2 * m` with `l` null and `m` independent
    SquareNullLinear,
    /// `l * q(x̄)` with `l` null and `q` a quadratic on the orthogonal
    /// complement; `params` are the sorted eigenvalues normalized so the
    /// entry of largest magnitude is `+1`.
    NullTimesQuadric {
        params: Vec<Rational>,
    },
    Unclassified {
        reason: String,
    },
}

impl OrbitType {
    pub fn tag(&self) -> &'static str {
        match self {
            OrbitType::Zero => "Zero",
            OrbitType::CubeNull => "CubeNull",
            OrbitType::SquareNullLinear => "SquareNullLinear",
            OrbitType::NullTimesQuadric { .. } => "NullTimesQuadric",
            OrbitType::Unclassified { .. } => "Unclassified",
        }
    }
}

/// All primitive rational linear forms dividing a nonzero cubic form, found
/// by rational-root extraction on pencil restrictions and verified by exact
/// division.
pub fn linear_divisors(cubic: &RatPoly) -> Vec<Vec<Rational>> {
    let n = cubic.nvars();
    debug_assert!(!cubic.is_zero());
    // a base point with f(a) != 0; a degree-3 form cannot vanish on the
    // whole grid {-1, 0, 1, 2}^n
    let mut base: Option<Vec<Rational>> = None;
    let vals = [0i64, 1, -1, 2];
    let mut counter = vec![0usize; n];
    'outer: loop {
        let a: Vec<Rational> = counter.iter().map(|&c| rat_int(vals[c])).collect();
        if !cubic.eval(&a).is_zero() {
            base = Some(a);
            break;
        }
        for slot in counter.iter_mut() {
            *slot += 1;
            if *slot < vals.len() {
                continue 'outer;
            }
            *slot = 0;
        }
        break;
    }
    let a = base.expect("a nonzero cubic form has a nonzero grid point");

    // candidate values v_j = l(e_j) for a divisor normalized to l(a) = 1:
    // -v_j is a root of s -> f(s a + e_j), a cubic with leading coefficient
    // f(a) != 0
    let mut candidate_sets: Vec<Vec<Rational>> = Vec::with_capacity(n);
    for j in 0..n {
        // coefficients of p_j(s) = f(s a + e_j)
        let d = n;
        let subs: Vec<RatPoly> = (0..d)
            .map(|i| {
                // variable 0 of a 1-variable ring: s * a_i + delta_ij
                let mut p = MultiPoly::<Rational>::zero(1);
                p.add_term(Mono(vec![1]), a[i].clone());
                if i == j {
                    p.add_term(Mono(vec![0]), Rational::one());
                }
                p
            })
            .collect();
        let pj = cubic.compose(&subs).expect("arity fixed");
        let coeffs: Vec<Rational> = (0..=3).map(|k| pj.coeff(&Mono(vec![k as u16]))).collect();
        let rr = rational_roots(&coeffs);
        let mut set: Vec<Rational> = rr.roots.into_iter().map(|(r, _)| -r).collect();
        set.sort();
        set.dedup();
        candidate_sets.push(set);
    }

    // assemble candidates consistent with l(a) = 1 and verify by division
    let mut found: Vec<Vec<Rational>> = Vec::new();
    let mut idx = vec![0usize; n];
    'assemble: loop {
        if candidate_sets.iter().any(Vec::is_empty) {
            break;
        }
        let v: Vec<Rational> = idx
            .iter()
            .enumerate()
            .map(|(j, &k)| candidate_sets[j][k].clone())
            .collect();
        let la: Rational = v.iter().zip(&a).map(|(vj, aj)| vj * aj).sum();
        if la.is_one() {
            let mut l = RatPoly::zero(n);
            for (j, vj) in v.iter().enumerate() {
                if !vj.is_zero() {
                    l.add_term(Mono::var(n, j), vj.clone());
                }
            }
            if !l.is_zero() && cubic.div_exact(&l).is_some() {
                let prim = primitive_normalize(&v);
                if !found.contains(&prim) {
                    found.push(prim);
                }
            }
        }
        for j in 0..n {
            idx[j] += 1;
            if idx[j] < candidate_sets[j].len() {
                continue 'assemble;
            }
            idx[j] = 0;
        }
        break;
    }
    found
}

fn linear_form_poly(n: usize, v: &[Rational]) -> RatPoly {
    let mut l = RatPoly::zero(n);
    for (j, c) in v.iter().enumerate() {
        if !c.is_zero() {
            l.add_term(Mono::var(n, j), c.clone());
        }
    }
    l
}

/// Classifies the trace-free tensor against the three Lorentzian template
/// shapes. Requires a Lorentzian metric.
pub fn classify_l1(t: &L1Tensor) -> Result<OrbitType> {
    if t.tensor.is_zero() {
        return Ok(OrbitType::Zero);
    }
    if !t.metric.is_lorentzian() {
        return Err(Error::Unsupported(format!(
            "orbit classification requires a Lorentzian metric, found signature {:?}",
            t.metric.sig
        )));
    }
    let n = t.n();
    let ginv = t.metric.inverse();
    let divisors = linear_divisors(&t.tensor);
    let null_divs: Vec<Vec<Rational>> = divisors
        .into_iter()
        .filter(|lam| {
            // (l, l) with l a covector: lambda^T G^{-1} lambda
            ginv.mul_vec(lam)
                .iter()
                .zip(lam)
                .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
                .is_zero()
        })
        .collect();
    if null_divs.is_empty() {
        return Ok(OrbitType::Unclassified {
            reason: "no rational null linear divisor".into(),
        });
    }

    // (a) c * l^3
    for lam in &null_divs {
        let l = linear_form_poly(n, lam);
        if let Some(q1) = t.tensor.div_exact(&l) {
            if let Some(q2) = q1.div_exact(&l) {
                if q2.div_exact(&l).is_some_and(|c| c.degree() == Some(0)) {
                    return Ok(OrbitType::CubeNull);
                }
            }
        }
    }
    // (b) l^2 * m
    for lam in &null_divs {
        let l = linear_form_poly(n, lam);
        if let Some(q1) = t.tensor.div_exact(&l) {
            if let Some(m) = q1.div_exact(&l) {
                if m.degree() == Some(1) {
                    return Ok(OrbitType::SquareNullLinear);
                }
            }
        }
    }
    // (c) l * q with q descending to the complement
    for lam in &null_divs {
        let l = linear_form_poly(n, lam);
        let Some(qpoly) = t.tensor.div_exact(&l) else {
            continue;
        };
        if qpoly.degree() != Some(2) {
            continue;
        }
        // bilinear matrix of q
        let mq = ExactMatrix::from_fn(n, n, |i, j| {
            let mut m = Mono::one(n);
            m.0[i] += 1;
            m.0[j] += 1;
            if i == j {
                qpoly.coeff(&m)
            } else {
                qpoly.coeff(&m) * crate::scalar::rat(1, 2)
            }
        });
        let v_l = ginv.mul_vec(lam); // the metric-dual null vector, lies in ker l
                                     // q descends to ker(l)/<v_l> iff Mq v_l is proportional to lambda
        let w = mq.mul_vec(&v_l);
        let proportional = {
            let mut red = crate::matrix::SpanReducer::new(n);
            red.insert(lam);
            red.contains(&w)
        };
        if !proportional {
            continue;
        }
        // basis of ker(l) extending v_l
        let kernel = ExactMatrix::from_rows(vec![lam.clone()]).nullspace();
        let mut extension: Vec<Vec<Rational>> = vec![v_l.clone()];
        extension.extend(kernel);
        let ext = independent_subset(n, &extension);
        let complement: Vec<Vec<Rational>> = ext.into_iter().skip(1).collect();
        debug_assert_eq!(complement.len(), n - 2);
        let m = n - 2;
        let q_hat = ExactMatrix::from_fn(m, m, |i, j| {
            complement[i]
                .iter()
                .zip(mq.mul_vec(&complement[j]))
                .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
        });
        let g_hat = ExactMatrix::from_fn(m, m, |i, j| {
            complement[i]
                .iter()
                .zip(t.metric.mat.mul_vec(&complement[j]))
                .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
        });
        if q_hat.is_zero() {
            continue;
        }
        // generalized eigenvalues: roots of det(q_hat - x g_hat)
        let char_poly = pencil_char_poly(&q_hat, &g_hat);
        let rr = rational_roots(&char_poly);
        if !rr.complete {
            return Ok(OrbitType::Unclassified {
                reason: "irrational eigenvalues in the quadratic factor".into(),
            });
        }
        let mut params: Vec<Rational> = Vec::new();
        for (root, mult) in rr.roots {
            for _ in 0..mult {
                params.push(root.clone());
            }
        }
        if params.len() != m {
            return Ok(OrbitType::Unclassified {
                reason: "eigenvalue count mismatch in the quadratic factor".into(),
            });
        }
        // normalize: divide by the signed entry of maximal magnitude,
        // preferring the positive one on ties
        let max_abs = params.iter().map(|x| x.abs()).max().unwrap();
        let lead = if params.contains(&max_abs) {
            max_abs.clone()
        } else {
            -max_abs.clone()
        };
        let mut normalized: Vec<Rational> = params.into_iter().map(|x| x / &lead).collect();
        normalized.sort_by(|a, b| b.cmp(a));
        return Ok(OrbitType::NullTimesQuadric { params: normalized });
    }
    Ok(OrbitType::Unclassified {
        reason: "no template shape matched".into(),
    })
}

/// Characteristic polynomial of the pencil `det(A - x B)`, low-degree
/// cofactor expansion; coefficient `k` multiplies `x^k`.
fn pencil_char_poly(a: &RatMatrix, b: &RatMatrix) -> Vec<Rational> {
    let m = a.rows();
    // entries as univariate polynomials
    let entries: Vec<Vec<MultiPoly<Rational>>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut p = MultiPoly::<Rational>::zero(1);
                    p.add_term(Mono(vec![0]), a[(i, j)].clone());
                    p.add_term(Mono(vec![1]), -b[(i, j)].clone());
                    p
                })
                .collect()
        })
        .collect();
    let det = poly_det(&entries);
    (0..=m).map(|k| det.coeff(&Mono(vec![k as u16]))).collect()
}

fn poly_det(entries: &[Vec<MultiPoly<Rational>>]) -> MultiPoly<Rational> {
    let m = entries.len();
    if m == 0 {
        return MultiPoly::one(1);
    }
    if m == 1 {
        return entries[0][0].clone();
    }
    let mut acc = MultiPoly::zero(1);
    for (j, cell) in entries[0].iter().enumerate() {
        if cell.is_zero() {
            continue;
        }
        let minor: Vec<Vec<MultiPoly<Rational>>> = entries[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        let term = cell.mul(&poly_det(&minor));
        acc = if j % 2 == 0 {
            acc.add(&term)
        } else {
            acc.sub(&term)
        };
    }
    acc
}

/// Outcome of the tube-domain criterion; the precondition failure (zero
/// trace-free tensor) is distinct from a negative answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TubeCriterion {
    Tube,
    NotTube,
    NotApplicable,
}

/// Decides whether some isotropy element acts on the trace-free cubic by a
/// nonzero scalar: solves `sum c_i action(X_i) T = lambda T` exactly and
/// reports whether a solution with `lambda != 0` exists.
pub fn tube_criterion(s: &Hypersurface, p: &[Rational]) -> Result<TubeCriterion> {
    let (jet, _) = graph_jet(s, p, 3)?.oriented();
    let adapted = adapt_frame(&jet)?;
    let l1 = extract_l1(&adapted)?;
    tube_criterion_for(s, p, &adapted, &l1)
}

/// As [`tube_criterion`], reusing an already computed adapted jet and
/// tensor.
pub fn tube_criterion_for(
    s: &Hypersurface,
    p: &[Rational],
    adapted: &AdaptedJet,
    l1: &L1Tensor,
) -> Result<TubeCriterion> {
    if l1.is_zero() {
        return Ok(TubeCriterion::NotApplicable);
    }
    let n = adapted.n;
    let algebra = symmetry_algebra(s)?;
    let iso = isotropy_at(&algebra, p)?;
    if iso.is_empty() {
        return Ok(TubeCriterion::NotTube);
    }

    // tangent blocks of the isotropy generators in the adapted frame
    let mut blocks: Vec<RatMatrix> = Vec::with_capacity(iso.len());
    for f in iso.fields() {
        let pulled = f.pullback(&adapted.frame);
        assert!(
            pulled.translation.iter().all(Zero::is_zero),
            "isotropy fields become linear in the adapted frame"
        );
        for j in 0..n {
            assert!(
                pulled.linear[(n, j)].is_zero(),
                "isotropy linearization preserves the tangent plane"
            );
        }
        blocks.push(ExactMatrix::from_fn(n, n, |i, j| {
            pulled.linear[(i, j)].clone()
        }));
    }

    // derivation action on the cubic: (a . f)(y) = grad f(y) . (a y)
    let actions: Vec<RatPoly> = blocks
        .iter()
        .map(|a| {
            let mut out = RatPoly::zero(n);
            for i in 0..n {
                let df = l1.tensor.partial(i);
                if df.is_zero() {
                    continue;
                }
                let mut row = RatPoly::zero(n);
                for j in 0..n {
                    if !a[(i, j)].is_zero() {
                        row.add_term(Mono::var(n, j), a[(i, j)].clone());
                    }
                }
                out = out.add(&df.mul(&row));
            }
            out
        })
        .collect();

    // rows indexed by cubic monomials; columns: c_1..c_k, lambda
    let mut row_index: std::collections::BTreeMap<Mono, usize> = Default::default();
    for poly in actions.iter().chain([&l1.tensor]) {
        for (m, _) in poly.terms() {
            let next = row_index.len();
            row_index.entry(m.clone()).or_insert(next);
        }
    }
    let k = actions.len();
    let mut mat = ExactMatrix::<Rational>::zeros(row_index.len(), k + 1);
    for (col, poly) in actions.iter().enumerate() {
        for (m, c) in poly.terms() {
            mat[(row_index[m], col)] = c.clone();
        }
    }
    for (m, c) in l1.tensor.terms() {
        mat[(row_index[m], k)] = -c.clone();
    }
    let solutions = mat.nullspace();
    let scaling = solutions.iter().any(|v| !v[k].is_zero());
    Ok(if scaling {
        TubeCriterion::Tube
    } else {
        TubeCriterion::NotTube
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_rational_poly;
    use crate::scalar::{rat, rat_int};

    fn pt(coords: &[i64]) -> Vec<Rational> {
        coords.iter().map(|&c| rat_int(c)).collect()
    }

    fn surface(n: usize, f: &str, p: &[i64]) -> Hypersurface {
        let poly = parse_rational_poly(f, n + 1).unwrap();
        Hypersurface::new(n, poly, None, pt(p)).unwrap()
    }

    fn sec6_gamma_n4() -> Hypersurface {
        surface(4, "x5 - x1*x2 - x1*x3^2 - x1*x4^2", &[1, 0, 0, 0, 0])
    }

    #[test]
    fn jet_of_round_paraboloid() {
        let s = surface(2, "x3 - x1^2 - x2^2", &[0, 0, 0]);
        let jet = graph_jet(&s, s.ref_point(), 3).unwrap();
        assert_eq!(jet.quadratic_form(), &RatMatrix::identity(2));
        assert!(jet.cubic().is_zero());
        assert_eq!(jet.signature().unwrap(), (2, 0));
    }

    #[test]
    fn jet_of_lorentzian_quadric() {
        let s = surface(4, "x5 - x1*x4 - x2^2 - x3^2", &[0, 0, 0, 0, 0]);
        let jet = graph_jet(&s, s.ref_point(), 3).unwrap();
        let mut want = RatMatrix::zeros(4, 4);
        want[(0, 3)] = rat(1, 2);
        want[(3, 0)] = rat(1, 2);
        want[(1, 1)] = rat_int(1);
        want[(2, 2)] = rat_int(1);
        assert_eq!(jet.quadratic_form(), &want);
        assert!(jet.cubic().is_zero());
        assert_eq!(jet.signature().unwrap(), (3, 1));
    }

    #[test]
    fn jet_of_generalized_type_c_surface() {
        let s = sec6_gamma_n4();
        let jet = graph_jet(&s, s.ref_point(), 3).unwrap();
        assert_eq!(jet.signature().unwrap(), (3, 1));
        assert!(!jet.cubic().is_zero());
    }

    #[test]
    fn degenerate_form_reported_with_rank() {
        // at the origin the quadratic part of x5 = x1 x4 + x1(x2^2 + x3^2)
        // is the rank-2 form x1 x4
        let f = parse_rational_poly("x5 - x1*x4 - x1*x2^2 - x1*x3^2", 5).unwrap();
        let s = Hypersurface::new(4, f, None, pt(&[0, 0, 0, 0, 0])).unwrap();
        let jet = graph_jet(&s, s.ref_point(), 3).unwrap();
        match jet.signature() {
            Err(crate::error::Error::DegenerateForm { rank, dim }) => {
                assert_eq!((rank, dim), (2, 4));
            }
            other => panic!("expected a degenerate-form report, got {other:?}"),
        }
        assert!(adapt_frame(&jet).is_err());
    }

    #[test]
    fn definite_jets_have_definite_contraction() {
        // for a positive definite metric the full contraction is a definite
        // form on cubics: a nonzero trace-free tensor has nonzero norm
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..25 {
            let n = 3 + (rng.gen_range(0..2) as usize);
            // random positive definite Q = S^T S + I
            let svals: Vec<i64> = (0..n * n).map(|_| rng.gen_range(-2..=2)).collect();
            let sm = RatMatrix::from_fn(n, n, |i, j| rat_int(svals[i * n + j]));
            let q = sm.transpose().mul(&sm).add(&RatMatrix::identity(n));
            let mut cubic = RatPoly::zero(n);
            for _ in 0..4 {
                let mut e = vec![0u16; n];
                for _ in 0..3 {
                    e[rng.gen_range(0..n)] += 1;
                }
                cubic.add_term(Mono(e), rat_int(rng.gen_range(-3..=3)));
            }
            let jet = Jet3::synthetic(q, cubic);
            let adapted = adapt_frame(&jet).unwrap();
            assert!(adapted.metric.is_definite());
            let l1 = extract_l1(&adapted).unwrap();
            if !l1.is_zero() {
                assert!(!pseudo_norm_sq(&l1).is_zero());
            }
        }
    }

    #[test]
    fn jet_signature_flips_on_the_other_side() {
        // same surface, reference point with x1 < 0: raw signature (1, 3)
        let f = parse_rational_poly("x5 - x1*x2 - x1*x3^2 - x1*x4^2", 5).unwrap();
        let s = Hypersurface::new(4, f, None, pt(&[-1, 0, 0, 0, 0])).unwrap();
        let jet = graph_jet(&s, s.ref_point(), 3).unwrap();
        assert_eq!(jet.signature().unwrap(), (1, 3));
        let (oriented, flipped) = jet.oriented();
        assert!(flipped);
        assert_eq!(oriented.signature().unwrap(), (3, 1));
    }

    /// Floating-point cross-check of the exact jet: second differences of
    /// the numerically solved graph function. Labeled: this is the only
    /// place floating point enters, as an independent oracle.
    #[test]
    fn jet_quadratic_form_matches_finite_differences() {
        use num_traits::ToPrimitive;
        let s = sec6_gamma_n4();
        let jet = graph_jet(&s, s.ref_point(), 3).unwrap();
        let n = 4usize;
        let f = s.defining_poly();
        let eval_f64 = |poly: &RatPoly, x: &[f64]| -> f64 {
            poly.terms()
                .map(|(m, c)| {
                    let mut v = c.to_f64().unwrap();
                    for (i, &e) in m.0.iter().enumerate() {
                        v *= x[i].powi(e as i32);
                    }
                    v
                })
                .sum()
        };
        let m: Vec<Vec<f64>> = (0..n + 1)
            .map(|i| {
                (0..n + 1)
                    .map(|j| jet.frame().linear[(i, j)].to_f64().unwrap())
                    .collect()
            })
            .collect();
        let p0: Vec<f64> = jet
            .frame()
            .translation
            .iter()
            .map(|x| x.to_f64().unwrap())
            .collect();
        let partials: Vec<RatPoly> = (0..n + 1).map(|i| f.partial(i)).collect();
        // numeric graph function in jet coordinates via Newton iteration
        let phi = |u: &[f64]| -> f64 {
            let mut v = 0.0f64;
            for _ in 0..60 {
                let mut y = u.to_vec();
                y.push(v);
                let x: Vec<f64> = (0..n + 1)
                    .map(|i| p0[i] + (0..n + 1).map(|j| m[i][j] * y[j]).sum::<f64>())
                    .collect();
                let val = eval_f64(f, &x);
                let dv: f64 = (0..n + 1)
                    .map(|i| eval_f64(&partials[i], &x) * m[i][n])
                    .sum();
                let step = val / dv;
                v -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            v
        };
        let second_diff = |d: &[f64], t: f64| -> f64 {
            let u_plus: Vec<f64> = d.iter().map(|x| x * t).collect();
            let u_minus: Vec<f64> = d.iter().map(|x| -x * t).collect();
            (phi(&u_plus) - 2.0 * phi(&[0.0; 4]) + phi(&u_minus)) / (t * t)
        };
        // Richardson-extrapolated one-directional second differences
        let q_dir = |d: &[f64]| -> f64 {
            let t = 1e-3;
            (4.0 * second_diff(d, t / 2.0) - second_diff(d, t)) / 3.0 / 2.0
        };
        let qm = jet.quadratic_form();
        for i in 0..n {
            let mut d = [0.0; 4];
            d[i] = 1.0;
            let got = q_dir(&d);
            let want = qm[(i, i)].to_f64().unwrap();
            assert!((got - want).abs() < 1e-9, "diagonal {i}: {got} vs {want}");
            for j in i + 1..n {
                let mut d2 = [0.0; 4];
                d2[i] = 1.0;
                d2[j] = 1.0;
                let got = q_dir(&d2);
                let want =
                    (qm[(i, i)].clone() + qm[(j, j)].clone() + rat_int(2) * qm[(i, j)].clone())
                        .to_f64()
                        .unwrap();
                assert!((got - want).abs() < 1e-9, "mixed {i}{j}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn adapt_identity_when_already_normal() {
        let g = standard_metric(3, 1);
        let jet = Jet3::synthetic(g.clone(), RatPoly::zero(4));
        let adapted = adapt_frame(&jet).unwrap();
        assert_eq!(adapted.adapt, RatMatrix::identity(4));
        assert_eq!(adapted.metric.kind, MetricKind::AntiDiagonal);
        assert_eq!(adapted.metric.mat, g);
    }

    #[test]
    fn adapt_diagonal_lorentzian() {
        let mut q = RatMatrix::zeros(4, 4);
        for i in 0..3 {
            q[(i, i)] = rat_int(1);
        }
        q[(3, 3)] = rat_int(-1);
        let jet = Jet3::synthetic(q.clone(), RatPoly::zero(4));
        let adapted = adapt_frame(&jet).unwrap();
        assert_eq!(adapted.metric.sig, (3, 1));
        assert_eq!(adapted.metric.kind, MetricKind::AntiDiagonal);
        let check = adapted.adapt.transpose().mul(&q).mul(&adapted.adapt);
        assert_eq!(check, standard_metric(3, 1));
    }

    #[test]
    fn adapt_scaled_metric() {
        // 2 * I_{3,1}: the result must be exactly G or c*G
        let q = standard_metric(3, 1).scale(&rat_int(2));
        let jet = Jet3::synthetic(q.clone(), RatPoly::zero(4));
        let adapted = adapt_frame(&jet).unwrap();
        let b = &adapted.adapt;
        let check = b.transpose().mul(&q).mul(b);
        match &adapted.metric.kind {
            MetricKind::AntiDiagonal => assert_eq!(check, standard_metric(3, 1)),
            MetricKind::Scaled(c) => {
                assert_eq!(check, standard_metric(3, 1).scale(c));
            }
            MetricKind::Diagonal => panic!("scaled form must normalize to G or c*G"),
        }
        // n = 5 variant: middle block (2,2,2) stays in one class
        let q5 = standard_metric(4, 1).scale(&rat_int(2));
        let jet5 = Jet3::synthetic(q5.clone(), RatPoly::zero(5));
        let a5 = adapt_frame(&jet5).unwrap();
        let check5 = a5.adapt.transpose().mul(&q5).mul(&a5.adapt);
        match &a5.metric.kind {
            MetricKind::AntiDiagonal => assert_eq!(check5, standard_metric(4, 1)),
            MetricKind::Scaled(c) => assert_eq!(check5, standard_metric(4, 1).scale(c)),
            MetricKind::Diagonal => panic!("scaled form must normalize to G or c*G"),
        }
    }

    #[test]
    fn l1_zero_cubic() {
        let jet = Jet3::synthetic(standard_metric(3, 1), RatPoly::zero(4));
        let l1 = extract_l1(&adapt_frame(&jet).unwrap()).unwrap();
        assert!(l1.is_zero());
        assert!(l1.d_shift.iter().all(num_traits::Zero::is_zero));
        assert_eq!(pseudo_norm_sq(&l1), rat_int(0));
    }

    #[test]
    fn l1_null_cube_is_trace_free() {
        // cubic x1^3 in the Lorentzian frame: already trace-free, D = 0
        let cubic = parse_rational_poly("x1^3", 4).unwrap();
        let jet = Jet3::synthetic(standard_metric(3, 1), cubic.clone());
        let l1 = extract_l1(&adapt_frame(&jet).unwrap()).unwrap();
        assert_eq!(l1.tensor, cubic);
        assert!(l1.d_shift.iter().all(num_traits::Zero::is_zero));
        // the metric trace vanishes
        assert!(metric_trace(&l1.tensor, &l1.metric)
            .iter()
            .all(num_traits::Zero::is_zero));
        // and the pseudo-norm is zero since x1 is null
        assert_eq!(pseudo_norm_sq(&l1), rat_int(0));
        assert_eq!(classify_l1(&l1).unwrap(), OrbitType::CubeNull);
    }

    #[test]
    fn l1_spacelike_cube_has_positive_norm() {
        let cubic = parse_rational_poly("x2^3", 4).unwrap();
        let metric = MetricForm {
            sig: (3, 1),
            mat: standard_metric(3, 1),
            kind: MetricKind::AntiDiagonal,
        };
        let t = L1Tensor {
            metric,
            tensor: cubic,
            d_shift: pt(&[0, 0, 0, 0]),
        };
        assert_eq!(pseudo_norm_sq(&t), rat_int(1));
    }

    #[test]
    fn l1_square_null_linear() {
        let cubic = parse_rational_poly("3*x1^2*x2", 4).unwrap();
        let jet = Jet3::synthetic(standard_metric(3, 1), cubic);
        let l1 = extract_l1(&adapt_frame(&jet).unwrap()).unwrap();
        assert_eq!(classify_l1(&l1).unwrap(), OrbitType::SquareNullLinear);
    }

    #[test]
    fn l1_null_times_quadric_mixed_eigenvalues() {
        // 3 x1 (x2^2 - x3^2) is trace-free; eigenvalues normalize to (1, -1)
        let cubic = parse_rational_poly("3*x1*x2^2 - 3*x1*x3^2", 4).unwrap();
        let jet = Jet3::synthetic(standard_metric(3, 1), cubic);
        let l1 = extract_l1(&adapt_frame(&jet).unwrap()).unwrap();
        assert!(l1.d_shift.iter().all(num_traits::Zero::is_zero));
        match classify_l1(&l1).unwrap() {
            OrbitType::NullTimesQuadric { params } => {
                assert_eq!(params, vec![rat_int(1), rat_int(-1)]);
            }
            other => panic!("expected NullTimesQuadric, got {other:?}"),
        }
        // a non-trace-free variant: the shift mixes in the metric, moving
        // the eigenvalues to (1, -7/11); computed by hand from
        // T_tf = C - 2<y,D><y,y> with D = (0,0,0,1/8)
        let cubic = parse_rational_poly("3*x1*x2^2 - 3/2*x1*x3^2", 4).unwrap();
        let jet = Jet3::synthetic(standard_metric(3, 1), cubic);
        let l1 = extract_l1(&adapt_frame(&jet).unwrap()).unwrap();
        assert_eq!(
            l1.d_shift,
            vec![rat_int(0), rat_int(0), rat_int(0), rat(1, 8)]
        );
        match classify_l1(&l1).unwrap() {
            OrbitType::NullTimesQuadric { params } => {
                assert_eq!(params, vec![rat_int(1), rat(-7, 11)]);
            }
            other => panic!("expected NullTimesQuadric, got {other:?}"),
        }
    }

    #[test]
    fn l1_definite_cube_unclassified() {
        // x2^3 has a spacelike linear factor only: no null divisor
        let cubic = parse_rational_poly("x2^3", 4).unwrap();
        let metric = MetricForm {
            sig: (3, 1),
            mat: standard_metric(3, 1),
            kind: MetricKind::AntiDiagonal,
        };
        let t = L1Tensor {
            metric,
            tensor: cubic,
            d_shift: pt(&[0, 0, 0, 0]),
        };
        assert!(matches!(
            classify_l1(&t).unwrap(),
            OrbitType::Unclassified { .. }
        ));
    }

    #[test]
    fn sec6_gamma_full_pipeline() {
        let s = sec6_gamma_n4();
        let (jet, flipped) = graph_jet(&s, s.ref_point(), 3).unwrap().oriented();
        assert!(!flipped);
        let adapted = adapt_frame(&jet).unwrap();
        let l1 = extract_l1(&adapted).unwrap();
        assert!(!l1.is_zero());
        assert_eq!(pseudo_norm_sq(&l1), rat_int(0));
        match classify_l1(&l1).unwrap() {
            OrbitType::NullTimesQuadric { params } => {
                assert_eq!(params, vec![rat_int(1), rat_int(1)]);
            }
            other => panic!("expected NullTimesQuadric, got {other:?}"),
        }
        // self-adjointness of the operator form: G L1(X) symmetric
        for x in [pt(&[1, 0, 0, 0]), pt(&[0, 1, 0, 0]), pt(&[1, 2, -1, 3])] {
            let op = l1.operator(&x);
            assert!(l1.metric.mat.mul(&op).is_symmetric());
        }
    }

    #[test]
    fn linear_divisor_search() {
        // x1 * (x2^2 + x3^2) has exactly one rational linear divisor
        let cubic = parse_rational_poly("x1*x2^2 + x1*x3^2", 4).unwrap();
        let divs = linear_divisors(&cubic);
        assert_eq!(divs.len(), 1);
        assert_eq!(divs[0], pt(&[1, 0, 0, 0]));
        // (x1 + x2)(x1 - x2) x3 has three
        let cubic = parse_rational_poly("x1^2*x3 - x2^2*x3", 4).unwrap();
        assert_eq!(linear_divisors(&cubic).len(), 3);
    }

    #[test]
    fn tube_criterion_on_catalog_and_controls() {
        // cube-null family member: a tube boundary
        let s = surface(4, "x5 - x1*x4 - x2^2 - x3^2 - x1^3", &[0, 0, 0, 0, 0]);
        assert_eq!(
            tube_criterion(&s, s.ref_point()).unwrap(),
            TubeCriterion::Tube
        );
        // definite quadric: zero trace-free tensor, criterion not applicable
        let q = surface(2, "x3 - x1^2 - x2^2", &[0, 0, 0]);
        assert_eq!(
            tube_criterion(&q, q.ref_point()).unwrap(),
            TubeCriterion::NotApplicable
        );
    }

    #[test]
    fn tube_criterion_cayley_scaling_isotropy() {
        // x3 = x1 x2 - x1^3/3 carries the weighted Euler field
        // x1 d1 + 2 x2 d2 + 3 x3 d3 in its isotropy, which scales the cubic:
        // the scaling system is solvable with lambda != 0.
        let s = surface(2, "x3 - x1*x2 + 1/3*x1^3", &[0, 0, 0]);
        let alg = crate::symmetry::symmetry_algebra(&s).unwrap();
        assert_eq!(alg.len(), 3);
        let iso = crate::symmetry::isotropy_at(&alg, s.ref_point()).unwrap();
        assert_eq!(iso.len(), 1);
        assert_eq!(
            tube_criterion(&s, s.ref_point()).unwrap(),
            TubeCriterion::Tube
        );
    }
}
