//! Derivation algebras of the Jordan algebras and the Killing fields they
//! induce on the projective spaces.
//!
//! A derivation is stored as a `dim × dim` matrix over the fixed orthonormal
//! basis of the Jordan algebra, acting on coordinate columns. Since the
//! basis is orthonormal, derivations are antisymmetric matrices and the
//! operator inner product `−tr(D₁D₂)` is the Frobenius product.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::algebra::AlgebraTag;
use crate::calculus::FieldHandle;
use crate::chart::{ChartPoint, PFrame, ProjectiveSpace, TangentVector};
use crate::error::{Error, Result};
use crate::jordan::JordanAlgebra;
use crate::linalg;

/// Default relative singular-value cutoff.
pub const DEFAULT_CUTOFF: f64 = 1e-7;
/// Smallest singular-value gap accepted at the cutoff.
pub const MIN_GAP: f64 = 1e2;
/// Residual above which an operator is rejected as a derivation.
pub const DERIVATION_TOL: f64 = 1e-8;

/// Left multiplication operators `L_i = B_i ∘ ·` over the orthonormal basis.
#[derive(Clone, Debug)]
pub struct StructureConstants {
    pub mult: Vec<DMatrix<f64>>,
}

impl StructureConstants {
    pub fn new(alg: &JordanAlgebra) -> Result<Self> {
        let basis = alg.basis();
        let mult = basis
            .par_iter()
            .map(|bi| {
                let cols = basis
                    .iter()
                    .map(|bj| alg.to_coords(&bi.jordan_mul(bj)?))
                    .collect::<Result<Vec<_>>>()?;
                Ok(DMatrix::from_columns(&cols))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { mult })
    }

    pub fn dim(&self) -> usize {
        self.mult.len()
    }

    /// `max_i ‖[D, L_i] − L_{D B_i}‖_F`.
    pub fn derivation_residual(&self, d: &DMatrix<f64>) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut r = d * &self.mult[i] - &self.mult[i] * d;
                for a in 0..n {
                    if d[(a, i)] != 0.0 {
                        r -= &self.mult[a] * d[(a, i)];
                    }
                }
                r.norm()
            })
            .fold(0.0, f64::max)
    }

    /// Leibniz constraint rows over unordered basis pairs, unknown `D_ab`
    /// at column `a·dim + b`.
    pub fn constraint_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        let blocks: Vec<DMatrix<f64>> = pairs
            .par_iter()
            .map(|&(i, j)| {
                let li = &self.mult[i];
                let lj = &self.mult[j];
                let mut block = DMatrix::zeros(n, n * n);
                for c in 0..n {
                    for k in 0..n {
                        // D(B_i∘B_j)_c = Σ_k C^k_ij D_ck
                        block[(c, c * n + k)] += li[(k, j)];
                        // (D B_i)∘B_j and B_i∘(D B_j)
                        block[(c, k * n + i)] -= lj[(c, k)];
                        block[(c, k * n + j)] -= li[(c, k)];
                    }
                }
                block
            })
            .collect();
        let mut out = DMatrix::zeros(n * blocks.len(), n * n);
        for (b, block) in blocks.iter().enumerate() {
            out.view_mut((b * n, 0), (n, n * n)).copy_from(block);
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct DerivationBasis {
    pub tag: AlgebraTag,
    pub n: usize,
    /// Frobenius-orthonormal derivations.
    pub elements: Vec<DMatrix<f64>>,
    pub singular_value_gap: f64,
    pub constants: StructureConstants,
}

pub fn operator_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.dot(b)
}

fn unflatten(v: &[f64], n: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, v)
}

/// Dimension of `Der(S_n(𝔸))` from the classification of the simple
/// formally real Jordan algebras. `S₁(𝔸) = ℝ` has none; `S₂(𝕆)` is the spin
/// factor over `ℝ⁹`.
pub fn expected_dimension(tag: AlgebraTag, n: usize) -> Option<usize> {
    match (tag, n) {
        (_, 0) => None,
        (AlgebraTag::SpinFactor(m), 2) => Some(m * (m + 1) / 2),
        (AlgebraTag::SpinFactor(_), _) => None,
        (_, 1) => Some(0),
        (AlgebraTag::R, n) => Some(n * (n - 1) / 2),
        (AlgebraTag::C, n) => Some(n * n - 1),
        (AlgebraTag::H, n) => Some(n * (2 * n + 1)),
        (AlgebraTag::O, 2) => Some(36),
        (AlgebraTag::O, 3) => Some(52),
        (AlgebraTag::O, _) => None,
    }
}

pub fn derivation_basis(tag: AlgebraTag, n: usize) -> Result<DerivationBasis> {
    derivation_basis_with_cutoff(tag, n, DEFAULT_CUTOFF)
}

pub fn derivation_basis_with_cutoff(tag: AlgebraTag, n: usize, cutoff: f64) -> Result<DerivationBasis> {
    let alg = JordanAlgebra::new(tag, n)?;
    let constants = StructureConstants::new(&alg)?;
    let dim = constants.dim();
    let ns = linalg::null_space(&constants.constraint_matrix(), cutoff);
    if ns.gap_ratio < MIN_GAP {
        return Err(Error::ThresholdAmbiguity(ns.gap_ratio));
    }
    let elements = ns
        .basis
        .column_iter()
        .map(|c| unflatten(c.as_slice(), dim))
        .collect();
    Ok(DerivationBasis {
        tag,
        n,
        elements,
        singular_value_gap: ns.gap_ratio,
        constants,
    })
}

impl DerivationBasis {
    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    /// Coefficients of `x` over the basis.
    pub fn coefficients(&self, x: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.elements.iter().map(|d| operator_inner(d, x)))
    }

    /// Distance of `x` from the span of the basis.
    pub fn span_residual(&self, x: &DMatrix<f64>) -> f64 {
        let mut r = x.clone();
        for (d, c) in self.elements.iter().zip(self.coefficients(x).iter()) {
            r -= d * *c;
        }
        r.norm()
    }

    /// `max_{i<j} dist([D_i, D_j], span)`.
    pub fn bracket_closure_residual(&self) -> f64 {
        let n = self.dim();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        pairs
            .par_iter()
            .map(|&(i, j)| self.span_residual(&bracket(&self.elements[i], &self.elements[j])))
            .reduce(|| 0.0, f64::max)
    }

    /// Largest derivation residual over the basis.
    pub fn max_derivation_residual(&self) -> f64 {
        self.elements
            .par_iter()
            .map(|d| self.constants.derivation_residual(d))
            .reduce(|| 0.0, f64::max)
    }

    /// Killing field of `d` on `space` at `pt`.
    pub fn killing_field(&self, space: &ProjectiveSpace, d: &DMatrix<f64>, pt: &ChartPoint) -> Result<TangentVector> {
        if space.tag() != self.tag || space.ambient().n() != self.n {
            return Err(Error::InvalidConfig(format!(
                "derivations of S_{}({}) do not act on this space",
                self.n, self.tag
            )));
        }
        let r = self.constants.derivation_residual(d);
        if r > DERIVATION_TOL * d.norm().max(1.0) {
            return Err(Error::NotDerivation(r));
        }
        killing_value(space, d, pt)
    }
}

/// `D(φ(pt))` as a tangent vector, without checking `D`.
pub fn killing_value(space: &ProjectiveSpace, d: &DMatrix<f64>, pt: &ChartPoint) -> Result<TangentVector> {
    space.check_point(pt)?;
    let w = d * space.chart_coords(&pt.q);
    space.tangent_from_ambient(pt, &w, 1e-8)
}

pub fn killing_handle(d: &DMatrix<f64>) -> FieldHandle {
    FieldHandle::Killing(d.clone())
}

pub fn bracket(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * b - b * a
}

/// `𝔤 = 𝔨 ⊕ 𝔪` at one point.
#[derive(Clone, Debug)]
pub struct IsotropySplit {
    pub point: ChartPoint,
    /// Frobenius-orthonormal basis of the isotropy algebra.
    pub isotropy: Vec<DMatrix<f64>>,
    /// Frobenius-orthonormal basis of the complement, ordered by singular
    /// value of the evaluation map.
    pub complement: Vec<DMatrix<f64>>,
    /// Singular values of the evaluation map on the complement.
    pub evaluation_singular_values: Vec<f64>,
    pub gap_ratio: f64,
}

pub fn isotropy_split(space: &ProjectiveSpace, basis: &DerivationBasis, pt: &ChartPoint) -> Result<IsotropySplit> {
    space.check_point(pt)?;
    let phi = space.chart_coords(&pt.q);
    let g = basis.dim();
    let eval = DMatrix::from_columns(&basis.elements.iter().map(|d| d * &phi).collect::<Vec<_>>());
    // rows of the null-space problem are evaluation components
    let svd = eval.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let smax = sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > DEFAULT_CUTOFF * smax).count();
    let gap_ratio = if rank < sv.len() {
        sv[rank - 1] / sv[rank].max(f64::MIN_POSITIVE)
    } else {
        f64::INFINITY
    };
    if gap_ratio < MIN_GAP {
        return Err(Error::ThresholdAmbiguity(gap_ratio));
    }
    let combine = |coeffs: DVector<f64>| {
        let mut d = DMatrix::zeros(basis.elements[0].nrows(), basis.elements[0].ncols());
        for (e, c) in basis.elements.iter().zip(coeffs.iter()) {
            d += e * *c;
        }
        d
    };
    let complement: Vec<DMatrix<f64>> = order[..rank].iter().map(|&i| combine(v_t.row(i).transpose())).collect();
    // the SVD only returns min(A, g) right vectors; complete the kernel
    let m_rows = DMatrix::from_rows(&order[..rank].iter().map(|&i| v_t.row(i).into_owned()).collect::<Vec<_>>());
    let kernel = if rank < g {
        linalg::orthonormal_complement(&m_rows.transpose())
    } else {
        DMatrix::zeros(g, 0)
    };
    let isotropy = kernel.column_iter().map(|c| combine(c.into_owned())).collect();
    Ok(IsotropySplit {
        point: pt.clone(),
        isotropy,
        complement,
        evaluation_singular_values: sv[..rank].to_vec(),
        gap_ratio,
    })
}

impl IsotropySplit {
    /// Scale `c` with `‖D φ(pt)‖ = c ‖D‖_F` on the complement.
    pub fn isometry_scale(&self) -> Result<f64> {
        let sv = &self.evaluation_singular_values;
        let max = sv.iter().copied().fold(0.0, f64::max);
        let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
        let spread = if max > 0.0 { (max - min) / max } else { f64::INFINITY };
        if spread > 1e-8 {
            return Err(Error::RescalingFailure(spread));
        }
        Ok(max)
    }

    /// `(‖P_𝔪[𝔨,𝔨]‖, ‖P_𝔨[𝔨,𝔪]‖, ‖P_𝔪[𝔪,𝔪]‖)`, maxima over basis pairs.
    pub fn symmetric_pair_residuals(&self) -> (f64, f64, f64) {
        let leak = |x: &DMatrix<f64>, onto: &[DMatrix<f64>]| -> f64 {
            onto.iter().map(|e| operator_inner(e, x).powi(2)).sum::<f64>().sqrt()
        };
        let (k, m) = (&self.isotropy, &self.complement);
        let worst = |a: &[DMatrix<f64>], b: &[DMatrix<f64>], onto: &[DMatrix<f64>]| -> f64 {
            a.par_iter()
                .map(|x| b.iter().map(|y| leak(&bracket(x, y), onto)).fold(0.0, f64::max))
                .reduce(|| 0.0, f64::max)
        };
        (worst(k, k, m), worst(k, m, k), worst(m, m, m))
    }
}

/// `Σ_i ⟨u, K_i⟩ K_i` over the basis rescaled by `1/c`, evaluated at `pt`
/// in ambient coordinates.
pub fn reconstruct_projected_field(
    space: &ProjectiveSpace,
    basis: &DerivationBasis,
    scale: f64,
    u: &DVector<f64>,
    pt: &ChartPoint,
) -> Result<TangentVector> {
    space.check_point(pt)?;
    let phi = space.chart_coords(&pt.q);
    let mut acc = DVector::zeros(space.ambient_dim());
    for d in &basis.elements {
        let k = d * &phi / scale;
        acc += &k * u.dot(&k);
    }
    space.tangent_from_ambient(pt, &acc, 1e-8)
}

/// Residual of `∇_{K₁}K₂ = ½[K₁,K₂]_M` at `pt`, with `[K₁,K₂]_M` the field
/// of `−[D₁,D₂]`.
pub fn connection_bracket_residual(space: &ProjectiveSpace, d1: &DMatrix<f64>, d2: &DMatrix<f64>, pt: &ChartPoint) -> Result<f64> {
    space.check_point(pt)?;
    let phi = space.chart_coords(&pt.q);
    let nabla = space.project_coords(pt, &(d2 * (d1 * &phi)))?;
    let half = space.project_coords(pt, &(bracket(d1, d2) * &phi * -0.5))?;
    Ok((nabla.ambient - half.ambient).norm())
}

/// `exp(t D)` on the ambient coordinates.
pub fn one_parameter_group(d: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    (d * t).exp()
}

/// Image of a frame under an ambient isometry `g` of `M`.
pub fn transform_frame(space: &ProjectiveSpace, g: &DMatrix<f64>, frame: &PFrame, tol: f64) -> Result<PFrame> {
    let y = g * space.chart_coords(&frame.base.q);
    let base = space.inverse_chart(&y)?;
    let vectors = frame
        .vectors
        .iter()
        .map(|v| space.tangent_from_ambient(&base, &(g * &v.ambient), tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(PFrame { base, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{gaussian_vector, random_point, rng_for};

    #[test]
    fn small_dimensions() {
        for (tag, n, dim) in [
            (AlgebraTag::R, 3, 3),
            (AlgebraTag::C, 2, 3),
            (AlgebraTag::C, 3, 8),
            (AlgebraTag::H, 2, 10),
            (AlgebraTag::SpinFactor(3), 2, 6),
        ] {
            let b = derivation_basis(tag, n).unwrap();
            assert_eq!(b.dim(), dim, "{tag} {n}");
            assert_eq!(expected_dimension(tag, n), Some(dim));
            assert!(b.singular_value_gap > 1e4);
            assert!(b.max_derivation_residual() < 1e-10);
        }
    }

    #[test]
    fn derivations_are_antisymmetric_and_kill_identity() {
        let b = derivation_basis(AlgebraTag::H, 2).unwrap();
        let alg = JordanAlgebra::new(AlgebraTag::H, 2).unwrap();
        let id = alg.identity_index();
        for d in &b.elements {
            assert!((d + d.transpose()).amax() < 1e-10);
            assert!(d.column(id).amax() < 1e-10);
        }
    }

    #[test]
    fn non_derivation_is_rejected() {
        let space = ProjectiveSpace::new(AlgebraTag::C, 1).unwrap();
        let b = derivation_basis(AlgebraTag::C, 2).unwrap();
        let mut d = DMatrix::zeros(4, 4);
        d[(0, 3)] = 1.0;
        d[(3, 0)] = -1.0;
        assert!(matches!(
            b.killing_field(&space, &d, &space.origin()),
            Err(Error::NotDerivation(_))
        ));
    }

    #[test]
    fn complex_plane_split_and_reconstruction() {
        let space = ProjectiveSpace::new(AlgebraTag::C, 2).unwrap();
        let b = derivation_basis(AlgebraTag::C, 3).unwrap();
        let split = isotropy_split(&space, &b, &space.origin()).unwrap();
        assert_eq!((split.isotropy.len(), split.complement.len()), (4, 4));
        let (kk, km, mm) = split.symmetric_pair_residuals();
        assert!(kk.max(km).max(mm) < 1e-9);
        let c = split.isometry_scale().unwrap();
        let mut rng = rng_for(2, 0);
        for _ in 0..3 {
            let pt = random_point(&mut rng, &space, 0.7);
            let u = gaussian_vector(&mut rng, 9);
            let rec = reconstruct_projected_field(&space, &b, c, &u, &pt).unwrap();
            let proj = space.project_coords(&pt, &u).unwrap();
            assert!((rec.ambient - proj.ambient).amax() < 1e-9);
        }
        for k in &split.isotropy {
            assert!(b.killing_field(&space, k, &space.origin()).unwrap().ambient.amax() < 1e-10);
        }
    }

    #[test]
    fn flows_are_automorphisms() {
        let space = ProjectiveSpace::new(AlgebraTag::H, 1).unwrap();
        let b = derivation_basis(AlgebraTag::H, 2).unwrap();
        let alg = space.ambient();
        let mut rng = rng_for(4, 0);
        let coeffs = gaussian_vector(&mut rng, b.dim());
        let mut d = DMatrix::zeros(6, 6);
        for (e, c) in b.elements.iter().zip(coeffs.iter()) {
            d += e * *c;
        }
        let g = one_parameter_group(&d, 0.3);
        let x = alg.random_element(&mut rng);
        let y = alg.random_element(&mut rng);
        let gx = alg.to_coords(&x).map(|c| g.clone() * c).unwrap();
        let gy = alg.to_coords(&y).map(|c| g.clone() * c).unwrap();
        let lhs = g * alg.to_coords(&x.jordan_mul(&y).unwrap()).unwrap();
        let rhs = alg
            .to_coords(&alg.from_coords(gx.as_slice()).unwrap().jordan_mul(&alg.from_coords(gy.as_slice()).unwrap()).unwrap())
            .unwrap();
        assert!((lhs - rhs).amax() < 1e-10);
    }

    #[test]
    fn connection_identity_on_complement() {
        let space = ProjectiveSpace::new(AlgebraTag::C, 2).unwrap();
        let b = derivation_basis(AlgebraTag::C, 3).unwrap();
        let mut rng = rng_for(6, 0);
        let pt = random_point(&mut rng, &space, 0.5);
        let split = isotropy_split(&space, &b, &pt).unwrap();
        for d1 in &split.complement {
            for d2 in &split.complement {
                assert!(connection_bracket_residual(&space, d1, d2, &pt).unwrap() < 1e-10);
            }
        }
    }
}
