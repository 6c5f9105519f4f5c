//! Second fundamental form and covariant derivatives of vector fields on
//! `M = 𝔸ℙⁿ ⊂ S′_{n+1}(𝔸)`.
//!
//! Two independent paths are provided:
//! * exact: Christoffel symbols and field derivatives from the chart jets
//!   ([`LocalGeometry`], [`FieldOperators`]);
//! * numeric: central finite differences of the chart and of ambient
//!   fields along straight chart lines ([`sff_numeric`], [`shape_operator`],
//!   [`second_shape_operator`]).
//!
//! Operators are reported in the orthonormal tangent basis `t_i` of the
//! point: `a[(i, j)] = ⟨A t_j, t_i⟩`.

use nalgebra::{DMatrix, DVector};

use crate::algebra::{AlgebraElement, AlgebraTag};
use crate::chart::{ChartJet, ChartPoint, ProjectiveSpace, TangentVector};
use crate::error::{Error, Result};
use crate::jordan::HermitianMatrix;
use crate::linalg;

/// Finite-difference settings. Second differences use `step`; first
/// differences use `10 · step`, which balances truncation and rounding for
/// the nested derivatives of [`second_shape_operator`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdConfig {
    pub step: f64,
    /// Allowed disagreement between two Richardson levels, relative to
    /// `max(1, ‖value‖)`.
    pub tol: f64,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self { step: 1e-4, tol: 1e-5 }
    }
}

/// A vector field on `M` induced by the ambient space.
#[derive(Clone, Debug)]
pub enum FieldHandle {
    /// `V_u`: tangential projection of the constant ambient vector `u`,
    /// the gradient of `y ↦ ⟨u, y⟩` on `M`.
    Gradient(DVector<f64>),
    /// Linear field `y ↦ K y` of a derivation, in ambient coordinates.
    Killing(DMatrix<f64>),
}

impl FieldHandle {
    /// The ambient vector whose tangential part is the field at `φ(q)`.
    fn ambient_raw(&self, phi: &DVector<f64>) -> DVector<f64> {
        match self {
            FieldHandle::Gradient(u) => u.clone(),
            FieldHandle::Killing(k) => k * phi,
        }
    }

    /// Field value at chart coordinates `q`, as an ambient tangent vector.
    pub fn value(&self, space: &ProjectiveSpace, q: &[f64]) -> DVector<f64> {
        let (t, _) = space.tangent_frame(q);
        let w = self.ambient_raw(&space.chart_coords(q));
        &t * (t.transpose() * w)
    }

    fn check(&self, space: &ProjectiveSpace) -> Result<()> {
        let a = space.ambient_dim();
        let ok = match self {
            FieldHandle::Gradient(u) => u.len() == a,
            FieldHandle::Killing(k) => k.shape() == (a, a),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Shape(format!("field handle does not act on an ambient space of dimension {a}")))
        }
    }
}

/// Metric, connection and orthonormal frames at one chart point.
#[derive(Clone, Debug)]
pub struct LocalGeometry {
    pub point: ChartPoint,
    pub jet: ChartJet,
    pub metric: DMatrix<f64>,
    pub metric_inv: DMatrix<f64>,
    /// Orthonormal tangent basis, ambient columns.
    pub tangent: DMatrix<f64>,
    /// Row `i` holds the chart components of `t_i`.
    pub coeffs: DMatrix<f64>,
    /// Orthonormal basis of the normal space, ambient columns.
    pub normal: DMatrix<f64>,
    dim: usize,
    /// `Γ^k_ab` at row `a·D + b`, column `k`.
    gamma: DMatrix<f64>,
    /// `∂_e Γ^k_ab` at `((a·D + b)·D + e)·D + k`; empty below order 3.
    dgamma: Vec<f64>,
    /// Normal part of `∂_a∂_b φ`, column `a·D + b`.
    second: DMatrix<f64>,
}

impl LocalGeometry {
    pub fn new(space: &ProjectiveSpace, pt: &ChartPoint) -> Result<Self> {
        Self::with_order(space, pt, 3)
    }

    /// `order = 2` skips third derivatives (enough for the metric,
    /// Christoffel symbols, the second fundamental form and `A_V`).
    pub fn with_order(space: &ProjectiveSpace, pt: &ChartPoint, order: usize) -> Result<Self> {
        space.check_point(pt)?;
        let order = order.clamp(2, 3);
        let d = space.dim();
        let jet = space.jet(&pt.q, order);
        let metric = jet.d1.transpose() * &jet.d1;
        let metric_inv = metric
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::LeftChart(f64::NAN))?;
        let (tangent, c) = linalg::gram_schmidt(&jet.d1, 1e-12)?;
        let coeffs = c.transpose();
        let normal = linalg::orthonormal_complement(&tangent);

        // Γ_{ab,d} = ⟨φ_ab, φ_d⟩
        let lower = jet.d2.transpose() * &jet.d1;
        let gamma = &lower * &metric_inv;

        let mut dgamma = Vec::new();
        if order == 3 {
            let t3 = jet.d3.transpose() * &jet.d1;
            let t22 = jet.d2.transpose() * &jet.d2;
            dgamma = vec![0.0; d * d * d * d];
            for e in 0..d {
                // ∂_e g_cd = Γ_{ce,d} + Γ_{de,c}
                let mut dg = DMatrix::zeros(d, d);
                for c_ in 0..d {
                    for d_ in 0..d {
                        dg[(c_, d_)] = lower[(c_ * d + e, d_)] + lower[(d_ * d + e, c_)];
                    }
                }
                let dginv = -(&metric_inv * dg * &metric_inv);
                for a in 0..d {
                    for b in 0..d {
                        let ab = a * d + b;
                        let mut inner = DVector::zeros(d);
                        for d_ in 0..d {
                            inner[d_] = t3[(ab * d + e, d_)] + t22[(ab, d_ * d + e)];
                        }
                        let low = lower.row(ab).transpose();
                        let val = &dginv * low + &metric_inv * inner;
                        let base = (ab * d + e) * d;
                        dgamma[base..base + d].copy_from_slice(val.as_slice());
                    }
                }
            }
        }

        let second = &jet.d2 - &tangent * (tangent.transpose() * &jet.d2);
        Ok(Self {
            point: pt.clone(),
            jet,
            metric,
            metric_inv,
            tangent,
            coeffs,
            normal,
            dim: d,
            gamma,
            dgamma,
            second,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Γ^k_ab`.
    pub fn christoffel(&self, k: usize, a: usize, b: usize) -> f64 {
        self.gamma[(a * self.dim + b, k)]
    }

    /// `∂_e Γ^k_ab`; zero when built at order 2.
    pub fn christoffel_derivative(&self, k: usize, a: usize, b: usize, e: usize) -> f64 {
        let d = self.dim;
        self.dgamma.get(((a * d + b) * d + e) * d + k).copied().unwrap_or(0.0)
    }

    fn has_third_order(&self) -> bool {
        !self.dgamma.is_empty()
    }

    /// Chart components of the vector with orthonormal coefficients `x`.
    pub fn chart_components(&self, x: &DVector<f64>) -> DVector<f64> {
        self.coeffs.transpose() * x
    }

    /// Orthonormal coefficients of an ambient vector's tangential part.
    pub fn orthonormal_components(&self, v: &DVector<f64>) -> DVector<f64> {
        self.tangent.transpose() * v
    }

    /// `II(X, Y)` for chart components `x`, `y`, in ambient coordinates.
    pub fn sff_chart(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let d = self.dim;
        let mut w = DVector::zeros(d * d);
        for a in 0..d {
            for b in 0..d {
                w[a * d + b] = x[a] * y[b];
            }
        }
        &self.second * w
    }

    /// `II(X, Y)` for orthonormal coefficients.
    pub fn sff_orthonormal(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        self.sff_chart(&self.chart_components(x), &self.chart_components(y))
    }

    pub fn second_fundamental_form(&self) -> SecondFundamentalForm {
        SecondFundamentalForm {
            base: self.point.clone(),
            dim: self.dim,
            second: self.second.clone(),
        }
    }
}

/// `II` at one point, evaluated on chart components.
#[derive(Clone, Debug)]
pub struct SecondFundamentalForm {
    pub base: ChartPoint,
    dim: usize,
    second: DMatrix<f64>,
}

impl SecondFundamentalForm {
    pub fn evaluate(&self, x: &TangentVector, y: &TangentVector) -> Result<DVector<f64>> {
        if x.base != self.base || y.base != self.base {
            return Err(Error::Shape("tangent vectors live at a different base point".into()));
        }
        let d = self.dim;
        let mut out = DVector::zeros(self.second.nrows());
        for a in 0..d {
            for b in 0..d {
                let s = x.coords[a] * y.coords[b];
                if s != 0.0 {
                    out.axpy(s, &self.second.column(a * d + b), 1.0);
                }
            }
        }
        Ok(out)
    }
}

/// Closed form of `II(½∂/∂x_l^j, ½∂/∂x_r^k)` at the origin (zero-based
/// slot indices).
pub fn sff_closed_form_origin(tag: AlgebraTag, n: usize, j: usize, l: usize, k: usize, r: usize) -> Result<HermitianMatrix> {
    let space = ProjectiveSpace::new(tag, n)?;
    space.index(j, l)?;
    space.index(k, r)?;
    match tag {
        AlgebraTag::SpinFactor(m) => {
            let delta = if j == k { 1.0 } else { 0.0 };
            HermitianMatrix::spin(vec![0.0; m], -0.5 * delta, 0.0)
        }
        _ => {
            let size = n + 1;
            if j != k {
                let x = AlgebraElement::unit(tag, l)? * AlgebraElement::unit(tag, r)?.conj();
                HermitianMatrix::off_diagonal(tag, size, j, k, x.scale(0.25))
            } else {
                let delta = if l == r { 0.5 } else { 0.0 };
                let mut diag = vec![0.0; size];
                diag[j] = delta;
                diag[size - 1] = -delta;
                HermitianMatrix::diagonal(tag, &diag)
            }
        }
    }
}

fn richardson<F>(f: F, h: f64, power: i32, tol: f64, what: &str) -> Result<DVector<f64>>
where
    F: Fn(f64) -> DVector<f64>,
{
    let f1 = f(h);
    let f2 = f(h / 2.0);
    let f4 = f(h / 4.0);
    let k = 2f64.powi(power);
    let r1 = (&f2 * k - &f1) / (k - 1.0);
    let r2 = (&f4 * k - &f2) / (k - 1.0);
    let diff = (&r1 - &r2).amax();
    if !diff.is_finite() || diff > tol * r1.amax().max(1.0) {
        return Err(Error::NonConvergence(format!("{what}: Richardson levels differ by {diff:.3e}")));
    }
    Ok(r1)
}

fn shifted(q: &[f64], a: f64, x: &DVector<f64>, b: f64, y: &DVector<f64>) -> Vec<f64> {
    q.iter()
        .enumerate()
        .map(|(i, qi)| qi + a * x[i] + b * y[i])
        .collect()
}

fn check_vector(space: &ProjectiveSpace, base: &ChartPoint, v: &TangentVector) -> Result<()> {
    space.check_point(base)?;
    if &v.base != base {
        return Err(Error::Shape("tangent vector lives at a different base point".into()));
    }
    Ok(())
}

/// `II(X, Y)` by a mixed central second difference of the chart,
/// Richardson-extrapolated, projected onto the normal space.
pub fn sff_numeric(space: &ProjectiveSpace, base: &ChartPoint, x: &TangentVector, y: &TangentVector, fd: FdConfig) -> Result<HermitianMatrix> {
    check_vector(space, base, x)?;
    check_vector(space, base, y)?;
    let q = &base.q;
    let (xc, yc) = (&x.coords, &y.coords);
    let mixed = |h: f64| {
        (space.chart_coords(&shifted(q, h, xc, h, yc)) - space.chart_coords(&shifted(q, h, xc, -h, yc))
            - space.chart_coords(&shifted(q, -h, xc, h, yc))
            + space.chart_coords(&shifted(q, -h, xc, -h, yc)))
            / (4.0 * h * h)
    };
    let dd = richardson(mixed, fd.step, 2, fd.tol, "second fundamental form")?;
    let (t, _) = space.tangent_frame(q);
    let normal = &dd - &t * (t.transpose() * &dd);
    space.ambient().from_coords(normal.as_slice())
}

fn first_derivative<F>(g: F, fd: FdConfig, what: &str) -> Result<DVector<f64>>
where
    F: Fn(f64) -> DVector<f64>,
{
    richardson(|h| (g(h) - g(-h)) / (2.0 * h), 10.0 * fd.step, 2, fd.tol, what)
}

fn ambient_field_derivative(space: &ProjectiveSpace, q: &[f64], field: &FieldHandle, x: &DVector<f64>, fd: FdConfig) -> Result<DVector<f64>> {
    let zero = DVector::zeros(x.len());
    first_derivative(|h| field.value(space, &shifted(q, h, x, 0.0, &zero)), fd, "field derivative")
}

fn project_at(space: &ProjectiveSpace, q: &[f64], v: &DVector<f64>) -> DVector<f64> {
    let (t, _) = space.tangent_frame(q);
    &t * (t.transpose() * v)
}

/// `A_V X = ∇_X V` by finite differences of the ambient field along the
/// chart line through `base` with velocity `X`.
pub fn shape_operator(space: &ProjectiveSpace, base: &ChartPoint, field: &FieldHandle, x: &TangentVector, fd: FdConfig) -> Result<TangentVector> {
    check_vector(space, base, x)?;
    field.check(space)?;
    let dw = ambient_field_derivative(space, &base.q, field, &x.coords, fd)?;
    space.project_coords(base, &dw)
}

fn covariant_at(space: &ProjectiveSpace, q: &[f64], field: &FieldHandle, x: &DVector<f64>, fd: FdConfig) -> Result<DVector<f64>> {
    let dw = ambient_field_derivative(space, q, field, x, fd)?;
    Ok(project_at(space, q, &dw))
}

/// `(∇_Y A_V) X = ∇_Y ∇_X̃ V − ∇_{∇_Y X̃} V` with `X̃` the constant-component
/// extension of `X`, by nested finite differences.
pub fn directional_shape_operator(
    space: &ProjectiveSpace,
    base: &ChartPoint,
    field: &FieldHandle,
    y: &TangentVector,
    x: &TangentVector,
    fd: FdConfig,
) -> Result<TangentVector> {
    check_vector(space, base, x)?;
    check_vector(space, base, y)?;
    field.check(space)?;
    let q = &base.q;
    let zero = DVector::zeros(space.dim());
    let yc = &y.coords;
    let xc = &x.coords;

    let failure = std::cell::RefCell::new(None);
    let outer = first_derivative(
        |h| match covariant_at(space, &shifted(q, h, yc, 0.0, &zero), field, xc, fd) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                DVector::zeros(space.ambient_dim())
            }
        },
        fd,
        "outer derivative",
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let first = project_at(space, q, &outer?);

    let dx = first_derivative(
        |h| space.jet(&shifted(q, h, yc, 0.0, &zero), 1).d1 * xc,
        fd,
        "frame derivative",
    )?;
    let nabla_y_x = space.tangent_from_ambient(base, &project_at(space, q, &dx), 1e-8)?;
    let second = shape_operator(space, base, field, &nabla_y_x, fd)?;
    space.project_coords(base, &(first - second.ambient))
}

/// `A_{V,V} X = (∇_V A_V) X` by nested finite differences.
pub fn second_shape_operator(space: &ProjectiveSpace, base: &ChartPoint, field: &FieldHandle, x: &TangentVector, fd: FdConfig) -> Result<TangentVector> {
    let v = space.tangent_from_ambient(base, &field.value(space, &base.q), 1e-8)?;
    directional_shape_operator(space, base, field, &v, x, fd)
}

/// `A_V` and `A_{V,V}` of one field at one point, from exact jets.
#[derive(Clone, Debug)]
pub struct FieldOperators {
    /// `a[(i, j)] = ⟨A_V t_j, t_i⟩`.
    pub a: DMatrix<f64>,
    /// `⟨A_{V,V} t_j, t_i⟩`; empty when the geometry has no third order.
    pub avv: DMatrix<f64>,
    /// Orthonormal components of `V`.
    pub v: DVector<f64>,
    /// `∇_e∇_c y_b` at `(e·D + c)·D + b` in chart indices.
    hessian2: Vec<f64>,
    dim: usize,
}

impl FieldOperators {
    pub fn new(geom: &LocalGeometry, field: &FieldHandle) -> Result<Self> {
        let d = geom.dim();
        let jet = &geom.jet;
        let amb = jet.phi.len();
        match field {
            FieldHandle::Gradient(u) if u.len() != amb => {
                return Err(Error::Shape(format!("field vector of length {} for {amb}", u.len())))
            }
            FieldHandle::Killing(k) if k.shape() != (amb, amb) => {
                return Err(Error::Shape(format!("field operator of shape {:?} for {amb}", k.shape())))
            }
            _ => {}
        }
        let third = geom.has_third_order();

        // ambient representative W and its chart derivatives
        let (w, w1, w2) = match field {
            FieldHandle::Gradient(u) => (u.clone(), None, None),
            FieldHandle::Killing(k) => (
                k * &jet.phi,
                Some(k * &jet.d1),
                if third { Some(k * &jet.d2) } else { None },
            ),
        };

        let y = jet.d1.transpose() * &w;
        // ∂_c y_b
        let wd2 = jet.d2.transpose() * &w;
        let mut dy = DMatrix::zeros(d, d);
        for c in 0..d {
            for b in 0..d {
                dy[(c, b)] = wd2[b * d + c];
            }
        }
        let w1d1 = w1.as_ref().map(|w1| w1.transpose() * &jet.d1);
        if let Some(m) = &w1d1 {
            dy += m;
        }

        // ∇_c y_b
        let mut nabla = dy.clone();
        for c in 0..d {
            for b in 0..d {
                let mut s = 0.0;
                for k in 0..d {
                    s += geom.christoffel(k, c, b) * y[k];
                }
                nabla[(c, b)] -= s;
            }
        }

        let coeffs = &geom.coeffs;
        let a = coeffs * nabla.transpose() * coeffs.transpose();
        let vchart = &geom.metric_inv * &y;
        let v = coeffs * &y;

        if !third {
            return Ok(Self {
                a,
                avv: DMatrix::zeros(0, 0),
                v,
                hessian2: Vec::new(),
                dim: d,
            });
        }

        // ∂_e∂_c y_b
        let wd3 = jet.d3.transpose() * &w;
        let w1d2 = w1.as_ref().map(|w1| w1.transpose() * &jet.d2);
        let w2d1 = w2.as_ref().map(|w2| w2.transpose() * &jet.d1);
        let mut ddy = vec![0.0; d * d * d];
        for e in 0..d {
            for c in 0..d {
                for b in 0..d {
                    let mut s = wd3[(b * d + c) * d + e];
                    if let (Some(m12), Some(m21)) = (&w1d2, &w2d1) {
                        s += m21[(c * d + e, b)] + m12[(c, b * d + e)] + m12[(e, b * d + c)];
                    }
                    ddy[(e * d + c) * d + b] = s;
                }
            }
        }

        let mut hessian2 = vec![0.0; d * d * d];
        for e in 0..d {
            for c in 0..d {
                for b in 0..d {
                    let mut s = ddy[(e * d + c) * d + b];
                    for k in 0..d {
                        s -= geom.christoffel_derivative(k, c, b, e) * y[k];
                        s -= geom.christoffel(k, c, b) * dy[(e, k)];
                        s -= geom.christoffel(k, e, c) * nabla[(k, b)];
                        s -= geom.christoffel(k, e, b) * nabla[(c, k)];
                    }
                    hessian2[(e * d + c) * d + b] = s;
                }
            }
        }

        let mut mm = DMatrix::zeros(d, d);
        for b in 0..d {
            for c in 0..d {
                let mut s = 0.0;
                for e in 0..d {
                    s += vchart[e] * hessian2[(e * d + c) * d + b];
                }
                mm[(b, c)] = s;
            }
        }
        let avv = coeffs * mm * coeffs.transpose();
        Ok(Self {
            a,
            avv,
            v,
            hessian2,
            dim: d,
        })
    }

    /// `⟨(∇_Y A_V) X, t_i⟩` for orthonormal coefficients `y`, `x`.
    pub fn directional(&self, geom: &LocalGeometry, y: &DVector<f64>, x: &DVector<f64>) -> Result<DVector<f64>> {
        if self.hessian2.is_empty() {
            return Err(Error::InvalidConfig("third-order geometry required".into()));
        }
        let d = self.dim;
        let yc = geom.chart_components(y);
        let xc = geom.chart_components(x);
        let mut z = DVector::zeros(d);
        for e in 0..d {
            for c in 0..d {
                let s = yc[e] * xc[c];
                if s == 0.0 {
                    continue;
                }
                for b in 0..d {
                    z[b] += s * self.hessian2[(e * d + c) * d + b];
                }
            }
        }
        Ok(&geom.coeffs * z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn gauss(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
        DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
    }

    fn spaces() -> Vec<ProjectiveSpace> {
        vec![
            ProjectiveSpace::new(AlgebraTag::R, 2).unwrap(),
            ProjectiveSpace::new(AlgebraTag::C, 2).unwrap(),
            ProjectiveSpace::new(AlgebraTag::H, 1).unwrap(),
            ProjectiveSpace::new(AlgebraTag::O, 2).unwrap(),
            ProjectiveSpace::sphere(3).unwrap(),
        ]
    }

    #[test]
    fn christoffels_vanish_at_origin() {
        for s in spaces() {
            let g = LocalGeometry::new(&s, &s.origin()).unwrap();
            assert!(g.gamma.amax() < 1e-15);
        }
    }

    #[test]
    fn christoffel_derivative_matches_finite_difference() {
        let s = ProjectiveSpace::new(AlgebraTag::C, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let q: Vec<f64> = (0..s.dim()).map(|_| 0.5 * rng.sample::<f64, _>(StandardNormal)).collect();
        let g = LocalGeometry::new(&s, &s.point(q.clone()).unwrap()).unwrap();
        let h = 1e-5;
        let d = s.dim();
        for e in 0..d {
            let mut qp = q.clone();
            let mut qm = q.clone();
            qp[e] += h;
            qm[e] -= h;
            let gp = LocalGeometry::with_order(&s, &s.point(qp).unwrap(), 2).unwrap();
            let gm = LocalGeometry::with_order(&s, &s.point(qm).unwrap(), 2).unwrap();
            for k in 0..d {
                for a in 0..d {
                    for b in 0..d {
                        let fd = (gp.christoffel(k, a, b) - gm.christoffel(k, a, b)) / (2.0 * h);
                        assert!((fd - g.christoffel_derivative(k, a, b, e)).abs() < 1e-7);
                    }
                }
            }
        }
    }

    #[test]
    fn closed_form_norms() {
        let n2 = |m: &HermitianMatrix| m.inner(m).unwrap();
        let sphere = sff_closed_form_origin(AlgebraTag::SpinFactor(4), 1, 2, 0, 2, 0).unwrap();
        assert_eq!(n2(&sphere), 1.0);
        let same = sff_closed_form_origin(AlgebraTag::H, 2, 1, 2, 1, 2).unwrap();
        assert_eq!(n2(&same), 1.0);
        // n_k = J_l e_j: same slot, different unit
        let j_pair = sff_closed_form_origin(AlgebraTag::H, 2, 1, 0, 1, 3).unwrap();
        assert_eq!(n2(&j_pair), 0.0);
        let mixed = sff_closed_form_origin(AlgebraTag::O, 2, 0, 5, 1, 2).unwrap();
        assert_eq!(n2(&mixed), 0.25);
    }

    #[test]
    fn exact_sff_matches_closed_form_at_origin() {
        for s in spaces() {
            let g = LocalGeometry::with_order(&s, &s.origin(), 2).unwrap();
            let u = s.units();
            for a in 0..s.dim() {
                for b in 0..s.dim() {
                    let mut x = DVector::zeros(s.dim());
                    let mut y = DVector::zeros(s.dim());
                    x[a] = 0.5;
                    y[b] = 0.5;
                    let ii = g.sff_chart(&x, &y);
                    let cf = sff_closed_form_origin(s.tag(), s.n(), a / u, a % u, b / u, b % u).unwrap();
                    let cf = s.ambient().to_coords(&cf).unwrap();
                    assert!((ii - cf).amax() < 1e-14, "{} {a} {b}", s.tag());
                }
            }
        }
    }

    #[test]
    fn numeric_sff_matches_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for s in spaces() {
            let q: Vec<f64> = (0..s.dim()).map(|_| 0.6 * rng.sample::<f64, _>(StandardNormal)).collect();
            let pt = s.point(q).unwrap();
            let g = LocalGeometry::with_order(&s, &pt, 2).unwrap();
            let x = s.tangent_from_coords(&pt, &gauss(&mut rng, s.dim())).unwrap();
            let y = s.tangent_from_coords(&pt, &gauss(&mut rng, s.dim())).unwrap();
            let num = sff_numeric(&s, &pt, &x, &y, FdConfig::default()).unwrap();
            let num = s.ambient().to_coords(&num).unwrap();
            let exact = g.second_fundamental_form().evaluate(&x, &y).unwrap();
            assert!((&num - &exact).amax() < 1e-6, "{}", s.tag());
            for i in 0..s.dim() {
                assert!(num.dot(&g.tangent.column(i)).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn sphere_is_totally_umbilic() {
        let s = ProjectiveSpace::sphere(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let pt = s.point((0..4).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()).unwrap();
            let g = LocalGeometry::with_order(&s, &pt, 2).unwrap();
            let x = gauss(&mut rng, 4).normalize();
            let ii = g.sff_orthonormal(&x, &x);
            assert!((ii.norm() - 1.0).abs() < 1e-12);
            // unit sphere (ambient metric) about ½·identity: II(X,X) = −‖X‖²(y − c)
            let y = s.chart_coords(&pt.q);
            let mut c = DVector::zeros(s.ambient_dim());
            c[s.ambient().identity_index()] = 1.0;
            let radial = y - c;
            assert!((ii + radial).amax() < 1e-12);
        }
    }

    #[test]
    fn gradient_shape_operator_is_contraction_with_sff() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for s in spaces() {
            let pt = s.point((0..s.dim()).map(|_| 0.5 * rng.sample::<f64, _>(StandardNormal)).collect()).unwrap();
            let g = LocalGeometry::new(&s, &pt).unwrap();
            let u = gauss(&mut rng, s.ambient_dim());
            let ops = FieldOperators::new(&g, &FieldHandle::Gradient(u.clone())).unwrap();
            let d = s.dim();
            for i in 0..d {
                for j in 0..d {
                    let mut ei = DVector::zeros(d);
                    let mut ej = DVector::zeros(d);
                    ei[i] = 1.0;
                    ej[j] = 1.0;
                    let hess = u.dot(&g.sff_orthonormal(&ei, &ej));
                    assert!((ops.a[(i, j)] - hess).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn exact_operators_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let fd = FdConfig::default();
        for s in [
            ProjectiveSpace::new(AlgebraTag::C, 2).unwrap(),
            ProjectiveSpace::new(AlgebraTag::H, 1).unwrap(),
            ProjectiveSpace::sphere(3).unwrap(),
        ] {
            let pt = s.point((0..s.dim()).map(|_| 0.4 * rng.sample::<f64, _>(StandardNormal)).collect()).unwrap();
            let g = LocalGeometry::new(&s, &pt).unwrap();
            let basis = s.orthonormal_tangent_basis(&pt).unwrap();
            let u = gauss(&mut rng, s.ambient_dim());
            let k = {
                let m = DMatrix::from_fn(s.ambient_dim(), s.ambient_dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
                &m - m.transpose()
            };
            for field in [FieldHandle::Gradient(u), FieldHandle::Killing(k)] {
                let ops = FieldOperators::new(&g, &field).unwrap();
                for (j, t) in basis.iter().enumerate() {
                    let av = shape_operator(&s, &pt, &field, t, fd).unwrap();
                    let avv = second_shape_operator(&s, &pt, &field, t, fd).unwrap();
                    let av_o = g.orthonormal_components(&av.ambient);
                    let avv_o = g.orthonormal_components(&avv.ambient);
                    assert!((av_o - ops.a.column(j)).amax() < 1e-7, "{} A", s.tag());
                    assert!((avv_o - ops.avv.column(j)).amax() < 1e-5, "{} AVV", s.tag());
                }
            }
        }
    }

    #[test]
    fn normal_gradient_at_origin_is_sff_contraction() {
        let s = ProjectiveSpace::new(AlgebraTag::C, 2).unwrap();
        let o = s.origin();
        let g = LocalGeometry::new(&s, &o).unwrap();
        let e11 = HermitianMatrix::diag_unit(s.tag(), 3, 0).unwrap();
        let e33 = HermitianMatrix::diag_unit(s.tag(), 3, 2).unwrap();
        let u = s.ambient().to_coords(&e11.sub(&e33).unwrap()).unwrap();
        let field = FieldHandle::Gradient(u.clone());
        let basis = s.orthonormal_tangent_basis(&o).unwrap();
        for x in &basis {
            let av = shape_operator(&s, &o, &field, x, FdConfig::default()).unwrap();
            for y in &basis {
                let ii = g.second_fundamental_form().evaluate(x, y).unwrap();
                assert!((av.ambient.dot(&y.ambient) - u.dot(&ii)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn killing_operator_is_antisymmetric_and_avv_vanishes() {
        let s = ProjectiveSpace::new(AlgebraTag::C, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        // conjugation by a one-parameter unitary group: X ↦ kX − Xk
        let k = {
            let i = AlgebraElement::unit(AlgebraTag::C, 1).unwrap();
            let mut e = vec![AlgebraElement::zero(AlgebraTag::C).unwrap(); 4];
            e[0] = i.scale(0.3);
            e[3] = i.scale(-0.3);
            e[1] = AlgebraElement::new(AlgebraTag::C, &[0.7, 0.2]).unwrap();
            e[2] = -e[1].conj();
            e
        };
        let alg = s.ambient();
        let mut op = DMatrix::zeros(alg.dim(), alg.dim());
        for (col, b) in alg.basis().iter().enumerate() {
            let HermitianMatrix::Matrix { entries, .. } = b else { unreachable!() };
            let mut out = vec![AlgebraElement::zero(AlgebraTag::C).unwrap(); 4];
            for r in 0..2 {
                for c in 0..2 {
                    for m in 0..2 {
                        out[r * 2 + c] += k[r * 2 + m] * entries[m * 2 + c] - entries[r * 2 + m] * k[m * 2 + c];
                    }
                }
            }
            let img = HermitianMatrix::from_entries(AlgebraTag::C, 2, out).unwrap();
            op.set_column(col, &alg.to_coords(&img).unwrap());
        }
        let pt = s.point((0..2).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()).unwrap();
        let g = LocalGeometry::new(&s, &pt).unwrap();
        let ops = FieldOperators::new(&g, &FieldHandle::Killing(op)).unwrap();
        assert!((&ops.a + ops.a.transpose()).amax() < 1e-12);
        assert!(ops.avv.amax() < 1e-12);
    }
}
