//! Projective spaces `𝔸ℙⁿ ⊂ S′_{n+1}(𝔸)` through the affine chart
//!
//! ```text
//! Q ↦ (Q; 1)(Q*, 1) / (1 + ‖Q‖²)
//! ```
//!
//! Chart coordinates are real: direction `(j, l)` (the `i_l` component of the
//! `j`-th slot, zero-based) has index `a = j·(Λ+1) + l`. For the spin factor
//! `n = 1`, `Q ∈ ℝᵐ` and `a = j`.
//!
//! Ambient vectors are coordinate vectors over the fixed orthonormal basis
//! of [`JordanAlgebra`], so the ambient inner product is the Euclidean dot.

use nalgebra::{DMatrix, DVector};

use crate::algebra::{AlgebraElement, AlgebraTag};
use crate::error::{Error, Result};
use crate::jordan::{HermitianMatrix, JordanAlgebra};
use crate::linalg;

/// A point of the chart domain `𝔸ⁿ` (or `ℝᵐ` for the spin factor).
#[derive(Clone, Debug, PartialEq)]
pub struct ChartPoint {
    pub tag: AlgebraTag,
    pub n: usize,
    /// Real chart coordinates, length `N·(Λ+1)`.
    pub q: Vec<f64>,
}

impl ChartPoint {
    pub fn is_origin(&self) -> bool {
        self.q.iter().all(|&x| x == 0.0)
    }

    /// `Q` as a list of algebra elements; `None` for the spin factor.
    pub fn elements(&self) -> Option<Vec<AlgebraElement>> {
        let d = self.tag.dim().ok()?;
        Some(
            self.q
                .chunks(d)
                .map(|c| AlgebraElement::new(self.tag, c).expect("chunk length"))
                .collect(),
        )
    }
}

/// A tangent vector stored both as chart components `X^a` and as ambient
/// coordinates `Σ X^a ∂_a φ`.
#[derive(Clone, Debug)]
pub struct TangentVector {
    pub base: ChartPoint,
    pub coords: DVector<f64>,
    pub ambient: DVector<f64>,
}

/// An ordered list of tangent vectors at one point, orthonormal in the
/// ambient metric.
#[derive(Clone, Debug)]
pub struct PFrame {
    pub base: ChartPoint,
    pub vectors: Vec<TangentVector>,
}

impl PFrame {
    pub fn p(&self) -> usize {
        self.vectors.len()
    }
}

/// Derivatives of the chart map up to third order, in ambient coordinates.
///
/// Column `a` of `d1` is `∂_a φ`, column `a·D + b` of `d2` is `∂_a∂_b φ` and
/// column `(a·D + b)·D + c` of `d3` is `∂_a∂_b∂_c φ`. Higher orders than
/// requested are left empty.
#[derive(Clone, Debug)]
pub struct ChartJet {
    pub phi: DVector<f64>,
    pub d1: DMatrix<f64>,
    pub d2: DMatrix<f64>,
    pub d3: DMatrix<f64>,
}

/// Homogeneous coordinates `(Q; q₀)`.
#[derive(Clone, Debug)]
enum Ext {
    Div(Vec<AlgebraElement>),
    Spin(Vec<f64>, f64),
}

/// `𝔸ℙⁿ` (or `𝕊ᵐ`) together with its ambient Jordan algebra.
#[derive(Clone, Debug)]
pub struct ProjectiveSpace {
    tag: AlgebraTag,
    n: usize,
    ambient: JordanAlgebra,
}

impl ProjectiveSpace {
    pub fn new(tag: AlgebraTag, n: usize) -> Result<Self> {
        match tag {
            AlgebraTag::SpinFactor(_) if n != 1 => {
                return Err(Error::InvalidConfig(format!("the sphere chart has n = 1, got {n}")));
            }
            AlgebraTag::O if n > 2 => {
                return Err(Error::InvalidConfig(format!("octonionic projective spaces need n ≤ 2, got {n}")));
            }
            _ if n == 0 => return Err(Error::InvalidConfig("n must be positive".into())),
            _ => {}
        }
        let ambient = JordanAlgebra::new(tag, n + 1)?;
        Ok(Self { tag, n, ambient })
    }

    /// Convenience constructor for the sphere `𝕊ᵐ` in `S₂(ℝᵐ)`.
    pub fn sphere(m: usize) -> Result<Self> {
        Self::new(AlgebraTag::SpinFactor(m), 1)
    }

    pub fn tag(&self) -> AlgebraTag {
        self.tag
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ambient(&self) -> &JordanAlgebra {
        &self.ambient
    }

    /// Ambient dimension `dim S_{n+1}(𝔸)`.
    pub fn ambient_dim(&self) -> usize {
        self.ambient.dim()
    }

    /// Number of slots `N` (`m` for the sphere).
    pub fn slots(&self) -> usize {
        match self.tag {
            AlgebraTag::SpinFactor(m) => m,
            _ => self.n,
        }
    }

    /// `Λ + 1`.
    pub fn units(&self) -> usize {
        self.tag.units()
    }

    /// Manifold dimension `N·(Λ+1)`.
    pub fn dim(&self) -> usize {
        self.slots() * self.units()
    }

    pub fn index(&self, j: usize, l: usize) -> Result<usize> {
        if j >= self.slots() || l >= self.units() {
            return Err(Error::Index(format!(
                "direction ({j},{l}) outside {} slots × {} units",
                self.slots(),
                self.units()
            )));
        }
        Ok(j * self.units() + l)
    }

    pub fn origin(&self) -> ChartPoint {
        ChartPoint {
            tag: self.tag,
            n: self.n,
            q: vec![0.0; self.dim()],
        }
    }

    pub fn point(&self, q: Vec<f64>) -> Result<ChartPoint> {
        if q.len() != self.dim() {
            return Err(Error::Shape(format!("{} chart coordinates for dimension {}", q.len(), self.dim())));
        }
        if q.iter().any(|x| !x.is_finite()) {
            return Err(Error::Shape("non-finite chart coordinate".into()));
        }
        Ok(ChartPoint {
            tag: self.tag,
            n: self.n,
            q,
        })
    }

    pub(crate) fn check_point(&self, pt: &ChartPoint) -> Result<()> {
        if pt.tag != self.tag {
            return Err(Error::TagMismatch(pt.tag, self.tag));
        }
        if pt.n != self.n || pt.q.len() != self.dim() {
            return Err(Error::Shape(format!("point of length {} for dimension {}", pt.q.len(), self.dim())));
        }
        Ok(())
    }

    fn ext(&self, q: &[f64], q0: f64) -> Ext {
        match self.tag {
            AlgebraTag::SpinFactor(_) => Ext::Spin(q.to_vec(), q0),
            tag => {
                let d = self.units();
                let mut v: Vec<AlgebraElement> = q
                    .chunks(d)
                    .map(|c| AlgebraElement::new(tag, c).expect("chunk length"))
                    .collect();
                v.push(AlgebraElement::real(tag, q0).expect("division tag"));
                Ext::Div(v)
            }
        }
    }

    fn unit_ext(&self, a: usize) -> Ext {
        let mut q = vec![0.0; self.dim()];
        q[a] = 1.0;
        self.ext(&q, 0.0)
    }

    /// Ambient coordinates of `½(x y* + y x*)`.
    fn bsym(&self, x: &Ext, y: &Ext) -> DVector<f64> {
        let m = match (x, y) {
            (Ext::Spin(q, q0), Ext::Spin(r, r0)) => {
                let qr: f64 = q.iter().zip(r).map(|(a, b)| a * b).sum();
                let v = q.iter().zip(r).map(|(qi, ri)| 0.5 * (q0 * ri + r0 * qi)).collect();
                HermitianMatrix::Spin {
                    v,
                    b: 0.5 * (q0 * r0 - qr),
                    a: 0.5 * (q0 * r0 + qr),
                }
            }
            (Ext::Div(x), Ext::Div(y)) => {
                let size = x.len();
                let mut entries = Vec::with_capacity(size * size);
                for j in 0..size {
                    for k in 0..size {
                        entries.push((x[j] * y[k].conj() + y[j] * x[k].conj()).scale(0.5));
                    }
                }
                HermitianMatrix::Matrix {
                    tag: self.tag,
                    n: size,
                    entries,
                }
            }
            _ => unreachable!("one space, one kind of extension"),
        };
        self.ambient.to_coords(&m).expect("shape fixed by construction")
    }

    /// `φ(Q)` as a Hermitian matrix.
    pub fn chart(&self, pt: &ChartPoint) -> Result<HermitianMatrix> {
        self.check_point(pt)?;
        self.ambient.from_coords(self.chart_coords(&pt.q).as_slice())
    }

    /// `φ(Q)` in ambient coordinates.
    pub fn chart_coords(&self, q: &[f64]) -> DVector<f64> {
        let x = self.ext(q, 1.0);
        let s = 1.0 + q.iter().map(|v| v * v).sum::<f64>();
        self.bsym(&x, &x) / s
    }

    /// Exact derivatives of `φ` at `q` up to `order ≤ 3`.
    pub fn jet(&self, q: &[f64], order: usize) -> ChartJet {
        let dd = self.dim();
        let amb = self.ambient_dim();
        let x = self.ext(q, 1.0);
        let s = 1.0 + q.iter().map(|v| v * v).sum::<f64>();
        let w = 1.0 / s;
        let big_n = self.bsym(&x, &x);
        let phi = &big_n * w;
        let mut d1 = DMatrix::zeros(amb, 0);
        let mut d2 = DMatrix::zeros(amb, 0);
        let mut d3 = DMatrix::zeros(amb, 0);
        if order == 0 {
            return ChartJet { phi, d1, d2, d3 };
        }

        let units: Vec<Ext> = (0..dd).map(|a| self.unit_ext(a)).collect();
        let n1: Vec<DVector<f64>> = units.iter().map(|e| self.bsym(&x, e) * 2.0).collect();
        let s2 = s * s;
        let s3 = s2 * s;
        let s4 = s3 * s;
        let w1: Vec<f64> = q.iter().map(|qa| -2.0 * qa / s2).collect();

        d1 = DMatrix::zeros(amb, dd);
        for a in 0..dd {
            d1.set_column(a, &(&n1[a] * w + &big_n * w1[a]));
        }
        if order == 1 {
            return ChartJet { phi, d1, d2, d3 };
        }

        let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        let w2 = |a: usize, b: usize| -2.0 * delta(a, b) / s2 + 8.0 * q[a] * q[b] / s3;
        let mut n2 = vec![DVector::zeros(amb); dd * dd];
        for a in 0..dd {
            for b in a..dd {
                let v = self.bsym(&units[a], &units[b]) * 2.0;
                n2[b * dd + a] = v.clone();
                n2[a * dd + b] = v;
            }
        }
        d2 = DMatrix::zeros(amb, dd * dd);
        for a in 0..dd {
            for b in 0..dd {
                let col = &n2[a * dd + b] * w + &n1[a] * w1[b] + &n1[b] * w1[a] + &big_n * w2(a, b);
                d2.set_column(a * dd + b, &col);
            }
        }
        if order == 2 {
            return ChartJet { phi, d1, d2, d3 };
        }

        let w3 = |a: usize, b: usize, c: usize| {
            8.0 * (delta(a, b) * q[c] + delta(a, c) * q[b] + delta(b, c) * q[a]) / s3
                - 48.0 * q[a] * q[b] * q[c] / s4
        };
        d3 = DMatrix::zeros(amb, dd * dd * dd);
        for a in 0..dd {
            for b in a..dd {
                for c in b..dd {
                    let col = &n2[a * dd + b] * w1[c]
                        + &n2[a * dd + c] * w1[b]
                        + &n2[b * dd + c] * w1[a]
                        + &n1[a] * w2(b, c)
                        + &n1[b] * w2(a, c)
                        + &n1[c] * w2(a, b)
                        + &big_n * w3(a, b, c);
                    for (i, j, k) in [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)] {
                        d3.set_column((i * dd + j) * dd + k, &col);
                    }
                }
            }
        }
        ChartJet { phi, d1, d2, d3 }
    }

    /// The coordinate vector `∂/∂x_l^j` at `pt`, assembled from the
    /// three-term product-rule expansion.
    pub fn coordinate_vector(&self, pt: &ChartPoint, j: usize, l: usize) -> Result<TangentVector> {
        self.check_point(pt)?;
        let a = self.index(j, l)?;
        let q = &pt.q;
        let s = 1.0 + q.iter().map(|v| v * v).sum::<f64>();
        let x = self.ext(q, 1.0);
        let e = self.unit_ext(a);
        // (i_l w_j; 0)(Q*, 1) + (Q; 1)(ī_l w_jᵀ, 0) is twice the symmetrised outer product
        let first_two = self.bsym(&e, &x) * (2.0 / s);
        let third = self.bsym(&x, &x) * (2.0 * q[a] / (s * s));
        let mut coords = DVector::zeros(self.dim());
        coords[a] = 1.0;
        Ok(TangentVector {
            base: pt.clone(),
            coords,
            ambient: first_two - third,
        })
    }

    /// Gram–Schmidt of the coordinate vectors in index order.
    ///
    /// Returns `(t, c)` where the columns of `t` are orthonormal ambient
    /// vectors and row `i` of `c` holds the chart components of `t_i`.
    pub fn tangent_frame(&self, q: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
        let jet = self.jet(q, 1);
        let (t, c) = linalg::gram_schmidt(&jet.d1, 1e-12).expect("chart is an immersion");
        (t, c.transpose())
    }

    pub fn orthonormal_tangent_basis(&self, pt: &ChartPoint) -> Result<Vec<TangentVector>> {
        self.check_point(pt)?;
        let (t, c) = self.tangent_frame(&pt.q);
        Ok((0..self.dim())
            .map(|i| TangentVector {
                base: pt.clone(),
                coords: c.row(i).transpose(),
                ambient: t.column(i).into_owned(),
            })
            .collect())
    }

    /// Orthogonal projection of an ambient vector onto `T_{φ(pt)}M`.
    pub fn project_coords(&self, pt: &ChartPoint, u: &DVector<f64>) -> Result<TangentVector> {
        self.check_point(pt)?;
        if u.len() != self.ambient_dim() {
            return Err(Error::Shape(format!("ambient vector of length {} for {}", u.len(), self.ambient_dim())));
        }
        let (t, c) = self.tangent_frame(&pt.q);
        let w = t.transpose() * u;
        Ok(TangentVector {
            base: pt.clone(),
            coords: c.transpose() * &w,
            ambient: t * w,
        })
    }

    pub fn project_to_tangent(&self, pt: &ChartPoint, u: &HermitianMatrix) -> Result<TangentVector> {
        let uc = self.ambient.to_coords(u)?;
        self.project_coords(pt, &uc)
    }

    /// Tangent vector from an ambient vector that is already tangent;
    /// rejects inputs with a normal component above `tol`.
    pub fn tangent_from_ambient(&self, pt: &ChartPoint, v: &DVector<f64>, tol: f64) -> Result<TangentVector> {
        let t = self.project_coords(pt, v)?;
        let residual = (v - &t.ambient).norm();
        if residual > tol * v.norm().max(1.0) {
            return Err(Error::Shape(format!("vector is not tangent (normal part {residual:.3e})")));
        }
        Ok(t)
    }

    /// Tangent vector from chart components.
    pub fn tangent_from_coords(&self, pt: &ChartPoint, x: &DVector<f64>) -> Result<TangentVector> {
        self.check_point(pt)?;
        if x.len() != self.dim() {
            return Err(Error::Shape(format!("{} components for dimension {}", x.len(), self.dim())));
        }
        let jet = self.jet(&pt.q, 1);
        Ok(TangentVector {
            base: pt.clone(),
            coords: x.clone(),
            ambient: jet.d1 * x,
        })
    }

    /// Frame from rows of coefficients over the orthonormal tangent basis.
    pub fn frame_from_orthonormal(&self, pt: &ChartPoint, rows: &DMatrix<f64>, tol: f64) -> Result<PFrame> {
        self.check_point(pt)?;
        if rows.ncols() != self.dim() {
            return Err(Error::Shape(format!("frame rows of length {} for dimension {}", rows.ncols(), self.dim())));
        }
        if rows.nrows() == 0 || rows.nrows() > self.dim() {
            return Err(Error::Shape(format!("frame size {} outside 1..={}", rows.nrows(), self.dim())));
        }
        let residual = linalg::orthonormality_residual(&rows.transpose());
        if residual > tol {
            return Err(Error::NonOrthonormal(residual));
        }
        let (t, c) = self.tangent_frame(&pt.q);
        let vectors = rows
            .row_iter()
            .map(|r| TangentVector {
                base: pt.clone(),
                coords: c.transpose() * r.transpose(),
                ambient: &t * r.transpose(),
            })
            .collect();
        Ok(PFrame {
            base: pt.clone(),
            vectors,
        })
    }

    /// Rows of coefficients of a frame over the orthonormal tangent basis.
    pub fn frame_rows(&self, frame: &PFrame) -> Result<DMatrix<f64>> {
        self.check_point(&frame.base)?;
        let (t, _) = self.tangent_frame(&frame.base.q);
        let mut rows = DMatrix::zeros(frame.p(), self.dim());
        for (i, v) in frame.vectors.iter().enumerate() {
            rows.set_row(i, &(t.transpose() * &v.ambient).transpose());
        }
        Ok(rows)
    }

    /// Chart coordinates of a point of `M` with nonzero `(n+1, n+1)` entry.
    pub fn inverse_chart(&self, y: &DVector<f64>) -> Result<ChartPoint> {
        let m = self.ambient.from_coords(y.as_slice())?;
        let q = match &m {
            HermitianMatrix::Spin { v, b, a } => {
                let den = a + b;
                if den.abs() < 1e-12 {
                    return Err(Error::LeftChart(den));
                }
                v.iter().map(|x| x / den).collect()
            }
            HermitianMatrix::Matrix { n, entries, .. } => {
                let last = n - 1;
                let den = entries[last * n + last].re();
                if den.abs() < 1e-12 {
                    return Err(Error::LeftChart(den));
                }
                (0..last)
                    .flat_map(|j| entries[j * n + last].coeffs().to_vec())
                    .map(|x| x / den)
                    .collect()
            }
        };
        self.point(q)
    }

    /// Matrix of `J_l` on orthonormal tangent coordinates at the origin:
    /// every slot is right-multiplied by `i_l`.
    pub fn complex_structure_matrix(&self, l: usize) -> Result<DMatrix<f64>> {
        let d = match self.tag {
            AlgebraTag::SpinFactor(_) => return Err(Error::NoComplexStructure(self.tag)),
            t => t.dim()?,
        };
        if l == 0 || l >= d {
            return Err(Error::Index(format!("complex structure J_{l} of {}", self.tag)));
        }
        let il = AlgebraElement::unit(self.tag, l)?;
        let mut j = DMatrix::zeros(self.dim(), self.dim());
        for slot in 0..self.slots() {
            for r in 0..d {
                let img = AlgebraElement::unit(self.tag, r)? * il;
                for k in 0..d {
                    j[(slot * d + k, slot * d + r)] = img.coeff(k);
                }
            }
        }
        Ok(j)
    }

    /// `J_l X` for a tangent vector at the origin.
    pub fn complex_structure(&self, l: usize, x: &TangentVector) -> Result<TangentVector> {
        self.check_point(&x.base)?;
        if !x.base.is_origin() {
            return Err(Error::NotOrigin);
        }
        let j = self.complex_structure_matrix(l)?;
        // at the origin the orthonormal basis is ½∂_a, so J acts identically on chart components
        self.tangent_from_coords(&x.base, &(j * &x.coords))
    }
}

pub fn chart(pt: &ChartPoint) -> Result<HermitianMatrix> {
    ProjectiveSpace::new(pt.tag, pt.n)?.chart(pt)
}

pub fn coordinate_vector(pt: &ChartPoint, j: usize, l: usize) -> Result<TangentVector> {
    ProjectiveSpace::new(pt.tag, pt.n)?.coordinate_vector(pt, j, l)
}

pub fn orthonormal_tangent_basis(pt: &ChartPoint) -> Result<Vec<TangentVector>> {
    ProjectiveSpace::new(pt.tag, pt.n)?.orthonormal_tangent_basis(pt)
}

pub fn project_to_tangent(pt: &ChartPoint, u: &HermitianMatrix) -> Result<TangentVector> {
    ProjectiveSpace::new(pt.tag, pt.n)?.project_to_tangent(pt, u)
}

pub fn complex_structure(l: usize, x: &TangentVector) -> Result<TangentVector> {
    ProjectiveSpace::new(x.base.tag, x.base.n)?.complex_structure(l, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jordan::is_rank_one_projection;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn spaces() -> Vec<ProjectiveSpace> {
        let mut v = vec![];
        for (t, n) in [
            (AlgebraTag::R, 1),
            (AlgebraTag::R, 3),
            (AlgebraTag::C, 1),
            (AlgebraTag::C, 2),
            (AlgebraTag::H, 2),
            (AlgebraTag::O, 1),
            (AlgebraTag::O, 2),
        ] {
            v.push(ProjectiveSpace::new(t, n).unwrap());
        }
        for m in [1, 3, 5] {
            v.push(ProjectiveSpace::sphere(m).unwrap());
        }
        v
    }

    fn random_point(s: &ProjectiveSpace, rng: &mut ChaCha8Rng, scale: f64) -> ChartPoint {
        let q = (0..s.dim()).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
        s.point(q).unwrap()
    }

    #[test]
    fn origin_maps_to_last_diagonal_unit() {
        for s in spaces() {
            let m = s.chart(&s.origin()).unwrap();
            let size = s.n() + 1;
            let e = HermitianMatrix::diag_unit(s.tag(), size, size - 1).unwrap();
            assert!(m.sub(&e).unwrap().norm() < 1e-15, "{}", s.tag());
        }
    }

    #[test]
    fn complex_line_point() {
        let s = ProjectiveSpace::new(AlgebraTag::C, 1).unwrap();
        let m = s.chart(&s.point(vec![1.0, 0.0]).unwrap()).unwrap();
        for (j, k) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let e = m.entry(j, k).unwrap();
            assert!((e.re() - 0.5).abs() < 1e-15 && e.coeff(1).abs() < 1e-15);
        }
    }

    #[test]
    fn chart_points_are_rank_one_projections() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for s in spaces() {
            for _ in 0..5 {
                let pt = random_point(&s, &mut rng, 1.0);
                assert!(is_rank_one_projection(&s.chart(&pt).unwrap(), 1e-9));
            }
        }
    }

    #[test]
    fn sphere_points_have_radius_one_half() {
        let s = ProjectiveSpace::sphere(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pt = random_point(&s, &mut rng, 1.0);
        match s.chart(&pt).unwrap() {
            HermitianMatrix::Spin { v, b, a } => {
                let r2: f64 = v.iter().map(|x| x * x).sum::<f64>() + b * b;
                assert!((r2 - 0.25).abs() < 1e-14);
                assert!((a - 0.5).abs() < 1e-15);
            }
            _ => panic!("expected a spin-factor element"),
        }
    }

    #[test]
    fn origin_gram_is_four_identity() {
        for s in spaces() {
            let jet = s.jet(&s.origin().q, 1);
            let g = jet.d1.transpose() * &jet.d1;
            let d = s.dim();
            assert!((g - DMatrix::<f64>::identity(d, d) * 4.0).amax() < 1e-14);
        }
    }

    #[test]
    fn sphere_origin_coordinate_vector() {
        let s = ProjectiveSpace::sphere(3).unwrap();
        let v = s.coordinate_vector(&s.origin(), 1, 0).unwrap();
        let m = s.ambient().from_coords(v.ambient.as_slice()).unwrap();
        assert_eq!(m, HermitianMatrix::Spin { v: vec![0.0, 1.0, 0.0], b: 0.0, a: 0.0 });
    }

    #[test]
    fn coordinate_vectors_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = 1e-5;
        for s in spaces() {
            for _ in 0..3 {
                let pt = random_point(&s, &mut rng, 0.8);
                for a in 0..s.dim() {
                    let (j, l) = (a / s.units(), a % s.units());
                    let v = s.coordinate_vector(&pt, j, l).unwrap();
                    let mut qp = pt.q.clone();
                    let mut qm = pt.q.clone();
                    qp[a] += h;
                    qm[a] -= h;
                    let fd = (s.chart_coords(&qp) - s.chart_coords(&qm)) / (2.0 * h);
                    assert!((fd - &v.ambient).amax() < 1e-8, "{} a={a}", s.tag());
                }
            }
        }
    }

    #[test]
    fn jets_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = 1e-5;
        for s in spaces() {
            let pt = random_point(&s, &mut rng, 0.7);
            let d = s.dim();
            let jet = s.jet(&pt.q, 3);
            for a in 0..d {
                let mut qp = pt.q.clone();
                let mut qm = pt.q.clone();
                qp[a] += h;
                qm[a] -= h;
                let jp = s.jet(&qp, 2);
                let jm = s.jet(&qm, 2);
                let fd1 = (&jp.d1 - &jm.d1) / (2.0 * h);
                let fd2 = (&jp.d2 - &jm.d2) / (2.0 * h);
                for b in 0..d {
                    assert!((fd1.column(b) - jet.d2.column(b * d + a)).amax() < 1e-8);
                    for c in 0..d {
                        let exact = jet.d3.column((b * d + c) * d + a);
                        assert!((fd2.column(b * d + c) - exact).amax() < 1e-7, "{}", s.tag());
                    }
                }
                assert!((jet.d1.column(a) - s.coordinate_vector(&pt, a / s.units(), a % s.units()).unwrap().ambient).amax() < 1e-14);
            }
        }
    }

    #[test]
    fn tangent_basis_sizes_and_origin_scaling() {
        let h2 = ProjectiveSpace::new(AlgebraTag::H, 2).unwrap();
        let o2 = ProjectiveSpace::new(AlgebraTag::O, 2).unwrap();
        let s5 = ProjectiveSpace::sphere(5).unwrap();
        assert_eq!(h2.orthonormal_tangent_basis(&h2.origin()).unwrap().len(), 8);
        assert_eq!(o2.orthonormal_tangent_basis(&o2.origin()).unwrap().len(), 16);
        assert_eq!(s5.orthonormal_tangent_basis(&s5.origin()).unwrap().len(), 5);
        for (a, t) in o2.orthonormal_tangent_basis(&o2.origin()).unwrap().iter().enumerate() {
            let half = o2.coordinate_vector(&o2.origin(), a / 8, a % 8).unwrap().ambient * 0.5;
            assert!((&t.ambient - half).amax() < 1e-15);
        }
    }

    #[test]
    fn projection_examples() {
        let s = ProjectiveSpace::new(AlgebraTag::C, 2).unwrap();
        let o = s.origin();
        let u = s.coordinate_vector(&o, 0, 0).unwrap();
        let p = s.project_coords(&o, &u.ambient).unwrap();
        assert!((p.ambient - &u.ambient).amax() < 1e-15);

        let e11 = HermitianMatrix::diag_unit(s.tag(), 3, 0).unwrap();
        let e33 = HermitianMatrix::diag_unit(s.tag(), 3, 2).unwrap();
        let p = s.project_to_tangent(&o, &e11.sub(&e33).unwrap()).unwrap();
        assert!(p.ambient.amax() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let pt = random_point(&s, &mut rng, 1.0);
        let u = s.ambient().random_element(&mut rng);
        let p = s.project_to_tangent(&pt, &u).unwrap();
        let r = s.ambient().to_coords(&u).unwrap() - &p.ambient;
        for t in s.orthonormal_tangent_basis(&pt).unwrap() {
            assert!(r.dot(&t.ambient).abs() < 1e-13);
        }
    }

    #[test]
    fn inverse_chart_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for s in spaces() {
            let pt = random_point(&s, &mut rng, 1.0);
            let back = s.inverse_chart(&s.chart_coords(&pt.q)).unwrap();
            for (a, b) in pt.q.iter().zip(&back.q) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn complex_structures_are_orthogonal_involutions() {
        for s in spaces() {
            if s.tag().is_spin_factor() {
                assert!(matches!(s.complex_structure_matrix(1), Err(Error::NoComplexStructure(_))));
                continue;
            }
            let d = s.dim();
            for l in 1..s.units() {
                let j = s.complex_structure_matrix(l).unwrap();
                assert!((j.transpose() * &j - DMatrix::<f64>::identity(d, d)).amax() < 1e-15);
                assert!((&j * &j + DMatrix::<f64>::identity(d, d)).amax() < 1e-15);
            }
        }
    }

    #[test]
    fn complex_structure_examples() {
        let c = ProjectiveSpace::new(AlgebraTag::C, 2).unwrap();
        let o = c.origin();
        let x = c.coordinate_vector(&o, 1, 0).unwrap();
        let jx = c.complex_structure(1, &x).unwrap();
        assert_eq!(jx.coords.as_slice(), &[0.0, 0.0, 0.0, 1.0]);
        let jjx = c.complex_structure(1, &jx).unwrap();
        assert!((jjx.ambient + &x.ambient).amax() < 1e-15);

        let h = ProjectiveSpace::new(AlgebraTag::H, 1).unwrap();
        let x = h.coordinate_vector(&h.origin(), 0, 2).unwrap();
        let jx = h.complex_structure(1, &x).unwrap();
        // right multiplication: i₂·i₁ = −i₃
        assert_eq!(jx.coords.as_slice(), &[0.0, 0.0, 0.0, -1.0]);

        let j1 = h.complex_structure_matrix(1).unwrap();
        let j2 = h.complex_structure_matrix(2).unwrap();
        let j3 = h.complex_structure_matrix(3).unwrap();
        assert!((&j1 * &j2 + &j3).amax() < 1e-15);

        let off = h.point(vec![0.1, 0.0, 0.0, 0.0]).unwrap();
        let y = h.coordinate_vector(&off, 0, 0).unwrap();
        assert!(matches!(h.complex_structure(1, &y), Err(Error::NotOrigin)));
    }

    #[test]
    fn invalid_configurations() {
        assert!(ProjectiveSpace::new(AlgebraTag::O, 3).is_err());
        assert!(ProjectiveSpace::new(AlgebraTag::SpinFactor(3), 2).is_err());
        let s = ProjectiveSpace::new(AlgebraTag::C, 2).unwrap();
        assert!(matches!(s.coordinate_vector(&s.origin(), 2, 0), Err(Error::Index(_))));
    }
}
