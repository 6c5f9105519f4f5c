//! Formally real Jordan algebras `S_n(𝔸)` and the spin factor `S₂(ℝᵐ)`.
//!
//! Product `A∘B = (AB + BA)/2`, inner product `⟨A,B⟩ = 2 Re tr(A∘B)`.
//! Every algebra carries a fixed orthonormal basis (the trace-free basis
//! followed by the normalised identity); coordinates in that basis are the
//! ambient Euclidean coordinates used by the geometry modules.
//!
//! Basis order for `S_n(𝔸)`:
//! 1. off-diagonal elements `½(i_l E_jk + ī_l E_kj)` for `j < k` in
//!    lexicographic order, `l = 0..d` innermost;
//! 2. the diagonal ladder `diag(1,…,1,−r,0,…)/√(2r(r+1))`, `r = 1..n`;
//! 3. the identity `I/√(2n)`.
//!
//! For the spin factor `(v, b, a) ↔ [[a−b, v], [v, a+b]]` the order is
//! `v = e_i/2` for `i = 1..m`, then `b = −½` (the ladder `diag(½, −½)`), then
//! `a = ½`.
//!
//! Octonion matrix products are formed entrywise as sums of binary
//! products, so the nonassociativity of 𝕆 never requires a bracketing choice.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::algebra::{AlgebraElement, AlgebraTag};
use crate::error::{Error, Result};

pub const DEFAULT_PROJECTION_TOL: f64 = 1e-9;

/// An element of `S_n(𝔸)` or of the spin factor.
#[derive(Clone, Debug, PartialEq)]
pub enum HermitianMatrix {
    /// Full `n × n` row-major array; `entries[k*n+j]` is the conjugate of
    /// `entries[j*n+k]`.
    Matrix {
        tag: AlgebraTag,
        n: usize,
        entries: Vec<AlgebraElement>,
    },
    /// `[[a−b, v], [v, a+b]]` with `v ∈ ℝᵐ`.
    Spin { v: Vec<f64>, b: f64, a: f64 },
}

pub(crate) fn check_size(tag: AlgebraTag, n: usize) -> Result<()> {
    match tag {
        AlgebraTag::SpinFactor(m) => {
            if m == 0 {
                return Err(Error::InvalidConfig("spin factor needs m ≥ 1".into()));
            }
            if n != 2 {
                return Err(Error::InvalidConfig(format!(
                    "spin factor S₂(R^{m}) has n = 2, got {n}"
                )));
            }
        }
        AlgebraTag::O if n > 3 => {
            return Err(Error::InvalidConfig(format!(
                "octonionic Hermitian matrices need n ≤ 3, got {n}"
            )));
        }
        _ if n == 0 => return Err(Error::InvalidConfig("n must be positive".into())),
        _ => {}
    }
    Ok(())
}

impl HermitianMatrix {
    pub fn zeros(tag: AlgebraTag, n: usize) -> Result<Self> {
        check_size(tag, n)?;
        Ok(match tag {
            AlgebraTag::SpinFactor(m) => HermitianMatrix::Spin {
                v: vec![0.0; m],
                b: 0.0,
                a: 0.0,
            },
            _ => HermitianMatrix::Matrix {
                tag,
                n,
                entries: vec![AlgebraElement::zero(tag)?; n * n],
            },
        })
    }

    pub fn identity(tag: AlgebraTag, n: usize) -> Result<Self> {
        let mut m = Self::zeros(tag, n)?;
        match &mut m {
            HermitianMatrix::Spin { a, .. } => *a = 1.0,
            HermitianMatrix::Matrix { entries, .. } => {
                for j in 0..n {
                    entries[j * n + j] = AlgebraElement::one(tag)?;
                }
            }
        }
        Ok(m)
    }

    /// `E_jj` (zero-based `j`).
    pub fn diag_unit(tag: AlgebraTag, n: usize, j: usize) -> Result<Self> {
        let mut diag = vec![0.0; n];
        *diag
            .get_mut(j)
            .ok_or_else(|| Error::Index(format!("diagonal {j} of {n}×{n}")))? = 1.0;
        Self::diagonal(tag, &diag)
    }

    pub fn diagonal(tag: AlgebraTag, diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        match tag {
            AlgebraTag::SpinFactor(m) => {
                check_size(tag, n)?;
                Ok(HermitianMatrix::Spin {
                    v: vec![0.0; m],
                    b: (diag[1] - diag[0]) / 2.0,
                    a: (diag[0] + diag[1]) / 2.0,
                })
            }
            _ => {
                let mut out = Self::zeros(tag, n)?;
                if let HermitianMatrix::Matrix { entries, .. } = &mut out {
                    for (j, &x) in diag.iter().enumerate() {
                        entries[j * n + j] = AlgebraElement::real(tag, x)?;
                    }
                }
                Ok(out)
            }
        }
    }

    /// `x E_jk + x̄ E_kj` for `j ≠ k`.
    pub fn off_diagonal(tag: AlgebraTag, n: usize, j: usize, k: usize, x: AlgebraElement) -> Result<Self> {
        if j == k || j >= n || k >= n {
            return Err(Error::Index(format!("off-diagonal ({j},{k}) of {n}×{n}")));
        }
        if x.tag() != tag {
            return Err(Error::TagMismatch(x.tag(), tag));
        }
        let mut out = Self::zeros(tag, n)?;
        if let HermitianMatrix::Matrix { entries, .. } = &mut out {
            entries[j * n + k] = x;
            entries[k * n + j] = x.conj();
        }
        Ok(out)
    }

    pub fn spin(v: Vec<f64>, b: f64, a: f64) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::InvalidConfig("spin factor needs m ≥ 1".into()));
        }
        Ok(HermitianMatrix::Spin { v, b, a })
    }

    /// Build from a full row-major entry array, checking the Hermitian
    /// conditions to a relative tolerance of `1e-12`.
    pub fn from_entries(tag: AlgebraTag, n: usize, entries: Vec<AlgebraElement>) -> Result<Self> {
        check_size(tag, n)?;
        if tag.is_spin_factor() {
            return Err(Error::SpinFactorArithmetic(tag));
        }
        if entries.len() != n * n {
            return Err(Error::Shape(format!("{} entries for {n}×{n}", entries.len())));
        }
        let scale = entries
            .iter()
            .map(|e| e.norm2())
            .fold(1.0f64, f64::max)
            .sqrt();
        for j in 0..n {
            for k in 0..n {
                let x = entries[j * n + k];
                x.check_same(&AlgebraElement::zero(tag)?)?;
                let y = entries[k * n + j].conj();
                if (x - y).norm2().sqrt() > 1e-12 * scale {
                    return Err(Error::Shape(format!("entries ({j},{k}) and ({k},{j}) are not conjugate")));
                }
            }
        }
        Ok(HermitianMatrix::Matrix { tag, n, entries })
    }

    pub fn tag(&self) -> AlgebraTag {
        match self {
            HermitianMatrix::Matrix { tag, .. } => *tag,
            HermitianMatrix::Spin { v, .. } => AlgebraTag::SpinFactor(v.len()),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            HermitianMatrix::Matrix { n, .. } => *n,
            HermitianMatrix::Spin { .. } => 2,
        }
    }

    /// Entry `(j, k)`; `None` for the spin factor.
    pub fn entry(&self, j: usize, k: usize) -> Option<AlgebraElement> {
        match self {
            HermitianMatrix::Matrix { n, entries, .. } if j < *n && k < *n => Some(entries[j * n + k]),
            _ => None,
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.tag() != other.tag() {
            return Err(Error::TagMismatch(self.tag(), other.tag()));
        }
        if self.size() != other.size() {
            return Err(Error::Shape(format!(
                "{}×{} vs {}×{}",
                self.size(),
                self.size(),
                other.size(),
                other.size()
            )));
        }
        Ok(())
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(match (self, other) {
            (HermitianMatrix::Spin { v, b, a }, HermitianMatrix::Spin { v: w, b: b2, a: a2 }) => {
                HermitianMatrix::Spin {
                    v: v.iter().zip(w).map(|(x, y)| x + s * y).collect(),
                    b: b + s * b2,
                    a: a + s * a2,
                }
            }
            (HermitianMatrix::Matrix { tag, n, entries }, HermitianMatrix::Matrix { entries: e2, .. }) => {
                HermitianMatrix::Matrix {
                    tag: *tag,
                    n: *n,
                    entries: entries.iter().zip(e2).map(|(x, y)| *x + y.scale(s)).collect(),
                }
            }
            _ => unreachable!("tags checked"),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(1.0, other)
    }

    pub fn scale(&self, s: f64) -> Self {
        match self {
            HermitianMatrix::Spin { v, b, a } => HermitianMatrix::Spin {
                v: v.iter().map(|x| x * s).collect(),
                b: b * s,
                a: a * s,
            },
            HermitianMatrix::Matrix { tag, n, entries } => HermitianMatrix::Matrix {
                tag: *tag,
                n: *n,
                entries: entries.iter().map(|x| x.scale(s)).collect(),
            },
        }
    }

    /// `Re tr`.
    pub fn trace(&self) -> f64 {
        match self {
            HermitianMatrix::Spin { a, .. } => 2.0 * a,
            HermitianMatrix::Matrix { n, entries, .. } => (0..*n).map(|j| entries[j * n + j].re()).sum(),
        }
    }

    pub fn jordan_mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(match (self, other) {
            (HermitianMatrix::Spin { v, b, a }, HermitianMatrix::Spin { v: w, b: b2, a: a2 }) => {
                let vw: f64 = v.iter().zip(w).map(|(x, y)| x * y).sum();
                HermitianMatrix::Spin {
                    v: v.iter().zip(w).map(|(x, y)| a * y + a2 * x).collect(),
                    b: a * b2 + a2 * b,
                    a: a * a2 + b * b2 + vw,
                }
            }
            (HermitianMatrix::Matrix { tag, n, entries: x }, HermitianMatrix::Matrix { entries: y, .. }) => {
                let n = *n;
                let zero = AlgebraElement::zero(*tag)?;
                let mut out = vec![zero; n * n];
                for i in 0..n {
                    for k in 0..n {
                        let mut acc = zero;
                        for j in 0..n {
                            acc += x[i * n + j] * y[j * n + k];
                            acc += y[i * n + j] * x[j * n + k];
                        }
                        out[i * n + k] = acc.scale(0.5);
                    }
                }
                HermitianMatrix::Matrix {
                    tag: *tag,
                    n,
                    entries: out,
                }
            }
            _ => unreachable!("tags checked"),
        })
    }

    /// `⟨A,B⟩ = 2 Re tr(A∘B)`; equals twice the Euclidean dot product of the
    /// full entry arrays.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(match (self, other) {
            (HermitianMatrix::Spin { v, b, a }, HermitianMatrix::Spin { v: w, b: b2, a: a2 }) => {
                let vw: f64 = v.iter().zip(w).map(|(x, y)| x * y).sum();
                4.0 * (a * a2 + b * b2 + vw)
            }
            (HermitianMatrix::Matrix { entries: x, .. }, HermitianMatrix::Matrix { entries: y, .. }) => {
                2.0 * x.iter().zip(y).map(|(p, q)| p.dot(q)).sum::<f64>()
            }
            _ => unreachable!("tags checked"),
        })
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).expect("self-compatible").sqrt()
    }
}

pub fn jordan_mul(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<HermitianMatrix> {
    a.jordan_mul(b)
}

pub fn inner(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    a.inner(b)
}

/// `‖p∘p − p‖ ≤ tol` and `|tr p − 1| ≤ tol`.
pub fn is_rank_one_projection(p: &HermitianMatrix, tol: f64) -> bool {
    let Ok(sq) = p.jordan_mul(p) else {
        return false;
    };
    let Ok(diff) = sq.sub(p) else {
        return false;
    };
    diff.norm() <= tol && (p.trace() - 1.0).abs() <= tol
}

/// Orthonormal basis of the trace-free subspace `S′_n(𝔸)`.
#[derive(Clone, Debug)]
pub struct TraceFreeBasis {
    pub tag: AlgebraTag,
    pub n: usize,
    pub vectors: Vec<HermitianMatrix>,
}

impl TraceFreeBasis {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

pub fn trace_free_basis(tag: AlgebraTag, n: usize) -> Result<TraceFreeBasis> {
    Ok(JordanAlgebra::new(tag, n)?.trace_free_basis())
}

/// `dim S_n(𝔸) = n + d·n(n−1)/2`, and `m + 2` for the spin factor.
pub fn jordan_dim(tag: AlgebraTag, n: usize) -> Result<usize> {
    check_size(tag, n)?;
    Ok(match tag {
        AlgebraTag::SpinFactor(m) => m + 2,
        _ => n + tag.dim()? * n * (n - 1) / 2,
    })
}

/// A Jordan algebra together with its fixed orthonormal basis.
#[derive(Clone, Debug)]
pub struct JordanAlgebra {
    tag: AlgebraTag,
    n: usize,
    basis: Vec<HermitianMatrix>,
}

impl JordanAlgebra {
    pub fn new(tag: AlgebraTag, n: usize) -> Result<Self> {
        check_size(tag, n)?;
        let mut basis = Vec::with_capacity(jordan_dim(tag, n)?);
        match tag {
            AlgebraTag::SpinFactor(m) => {
                for i in 0..m {
                    let mut v = vec![0.0; m];
                    v[i] = 0.5;
                    basis.push(HermitianMatrix::Spin { v, b: 0.0, a: 0.0 });
                }
                basis.push(HermitianMatrix::Spin {
                    v: vec![0.0; m],
                    b: -0.5,
                    a: 0.0,
                });
                basis.push(HermitianMatrix::Spin {
                    v: vec![0.0; m],
                    b: 0.0,
                    a: 0.5,
                });
            }
            _ => {
                let d = tag.dim()?;
                for j in 0..n {
                    for k in j + 1..n {
                        for l in 0..d {
                            let x = AlgebraElement::unit(tag, l)?.scale(0.5);
                            basis.push(HermitianMatrix::off_diagonal(tag, n, j, k, x)?);
                        }
                    }
                }
                for r in 1..n {
                    let s = 1.0 / ((2 * r * (r + 1)) as f64).sqrt();
                    let mut diag = vec![0.0; n];
                    diag[..r].iter_mut().for_each(|x| *x = s);
                    diag[r] = -(r as f64) * s;
                    basis.push(HermitianMatrix::diagonal(tag, &diag)?);
                }
                basis.push(HermitianMatrix::identity(tag, n)?.scale(1.0 / ((2 * n) as f64).sqrt()));
            }
        }
        Ok(Self { tag, n, basis })
    }

    pub fn tag(&self) -> AlgebraTag {
        self.tag
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Full orthonormal basis; the last element is the normalised identity.
    pub fn basis(&self) -> &[HermitianMatrix] {
        &self.basis
    }

    pub fn trace_free_basis(&self) -> TraceFreeBasis {
        TraceFreeBasis {
            tag: self.tag,
            n: self.n,
            vectors: self.basis[..self.basis.len() - 1].to_vec(),
        }
    }

    /// Index of the identity direction in ambient coordinates.
    pub fn identity_index(&self) -> usize {
        self.basis.len() - 1
    }

    /// Coordinates over the fixed orthonormal basis.
    pub fn to_coords(&self, x: &HermitianMatrix) -> Result<DVector<f64>> {
        if x.tag() != self.tag {
            return Err(Error::TagMismatch(x.tag(), self.tag));
        }
        if x.size() != self.n {
            return Err(Error::Shape(format!("{}×{} vs {}", x.size(), x.size(), self.n)));
        }
        let mut out = DVector::zeros(self.dim());
        match x {
            HermitianMatrix::Spin { v, b, a } => {
                let m = v.len();
                for (i, vi) in v.iter().enumerate() {
                    out[i] = 2.0 * vi;
                }
                out[m] = -2.0 * b;
                out[m + 1] = 2.0 * a;
            }
            HermitianMatrix::Matrix { n, entries, .. } => {
                let n = *n;
                let d = self.tag.units();
                let mut idx = 0;
                for j in 0..n {
                    for k in j + 1..n {
                        let e = entries[j * n + k];
                        for l in 0..d {
                            out[idx] = 2.0 * e.coeff(l);
                            idx += 1;
                        }
                    }
                }
                let diag: Vec<f64> = (0..n).map(|j| entries[j * n + j].re()).collect();
                for r in 1..n {
                    let s = 1.0 / ((2 * r * (r + 1)) as f64).sqrt();
                    let head: f64 = diag[..r].iter().sum();
                    out[idx] = 2.0 * s * (head - r as f64 * diag[r]);
                    idx += 1;
                }
                out[idx] = 2.0 * diag.iter().sum::<f64>() / ((2 * n) as f64).sqrt();
            }
        }
        Ok(out)
    }

    pub fn from_coords(&self, c: &[f64]) -> Result<HermitianMatrix> {
        if c.len() != self.dim() {
            return Err(Error::Shape(format!("{} coordinates for dimension {}", c.len(), self.dim())));
        }
        let mut out = HermitianMatrix::zeros(self.tag, self.n)?;
        for (ci, b) in c.iter().zip(&self.basis) {
            if *ci != 0.0 {
                out = out.axpy(*ci, b)?;
            }
        }
        Ok(out)
    }

    /// Standard Gaussian element in ambient coordinates.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> HermitianMatrix {
        let c: Vec<f64> = (0..self.dim()).map(|_| rng.sample(StandardNormal)).collect();
        self.from_coords(&c).expect("dimension matches")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const FAMILIES: [(AlgebraTag, usize); 7] = [
        (AlgebraTag::R, 3),
        (AlgebraTag::C, 3),
        (AlgebraTag::H, 3),
        (AlgebraTag::O, 3),
        (AlgebraTag::O, 2),
        (AlgebraTag::SpinFactor(2), 2),
        (AlgebraTag::SpinFactor(5), 2),
    ];

    fn close(a: &HermitianMatrix, b: &HermitianMatrix, tol: f64) -> bool {
        a.sub(b).unwrap().norm() <= tol
    }

    #[test]
    fn idempotent_examples() {
        let t = AlgebraTag::C;
        let e11 = HermitianMatrix::diag_unit(t, 2, 0).unwrap();
        let e22 = HermitianMatrix::diag_unit(t, 2, 1).unwrap();
        assert_eq!(e11.jordan_mul(&e22).unwrap().norm(), 0.0);

        let sym = HermitianMatrix::off_diagonal(t, 2, 0, 1, AlgebraElement::one(t).unwrap()).unwrap();
        let prod = e11.jordan_mul(&sym).unwrap();
        assert!(close(&prod, &sym.scale(0.5), 0.0));

        assert_eq!(e11.inner(&e11).unwrap(), 2.0);
        let d = e11.sub(&e22).unwrap();
        assert_eq!(d.inner(&d).unwrap(), 4.0);

        assert!(is_rank_one_projection(&e11, DEFAULT_PROJECTION_TOL));
        let half = e11.add(&e22).unwrap().scale(0.5);
        assert!(!is_rank_one_projection(&half, DEFAULT_PROJECTION_TOL));
    }

    #[test]
    fn spin_sphere_points_are_projections() {
        let (v, b) = (vec![0.3, -0.2, 0.1], 0.0f64);
        let r2: f64 = v.iter().map(|x| x * x).sum::<f64>() + b * b;
        let s = 0.5 / r2.sqrt();
        let p = HermitianMatrix::spin(v.iter().map(|x| x * s).collect(), b * s, 0.5).unwrap();
        assert!(is_rank_one_projection(&p, 1e-12));
        let q = HermitianMatrix::spin(v, 0.0, 0.5).unwrap();
        assert!(!is_rank_one_projection(&q, 1e-6));
    }

    #[test]
    fn spin_identity_is_neutral() {
        let alg = JordanAlgebra::new(AlgebraTag::SpinFactor(2), 2).unwrap();
        let one = HermitianMatrix::spin(vec![0.0, 0.0], 0.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let x = alg.random_element(&mut rng);
            assert!(close(&x.jordan_mul(&one).unwrap(), &x, 1e-15));
        }
    }

    #[test]
    fn basis_counts() {
        assert_eq!(trace_free_basis(AlgebraTag::R, 2).unwrap().len(), 2);
        assert_eq!(trace_free_basis(AlgebraTag::O, 3).unwrap().len(), 26);
        assert_eq!(trace_free_basis(AlgebraTag::SpinFactor(4), 2).unwrap().len(), 5);
        assert!(matches!(
            trace_free_basis(AlgebraTag::O, 4),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn basis_is_orthonormal_and_trace_free() {
        for (tag, n) in FAMILIES {
            let alg = JordanAlgebra::new(tag, n).unwrap();
            let tf = alg.trace_free_basis();
            assert_eq!(tf.len() + 1, jordan_dim(tag, n).unwrap());
            for (i, a) in alg.basis().iter().enumerate() {
                for (j, b) in alg.basis().iter().enumerate() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((a.inner(b).unwrap() - expect).abs() < 1e-12, "{tag} {i} {j}");
                }
            }
            for v in &tf.vectors {
                assert!(v.trace().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coordinates_match_inner_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (tag, n) in FAMILIES {
            let alg = JordanAlgebra::new(tag, n).unwrap();
            let x = alg.random_element(&mut rng);
            let c = alg.to_coords(&x).unwrap();
            for (i, b) in alg.basis().iter().enumerate() {
                assert!((c[i] - x.inner(b).unwrap()).abs() < 1e-12);
            }
            let back = alg.from_coords(c.as_slice()).unwrap();
            assert!(close(&back, &x, 1e-12));
        }
    }

    #[test]
    fn jordan_laws_on_random_elements() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (tag, n) in FAMILIES {
            let alg = JordanAlgebra::new(tag, n).unwrap();
            for _ in 0..20 {
                let a = alg.random_element(&mut rng);
                let b = alg.random_element(&mut rng);
                // commutativity
                assert!(close(&a.jordan_mul(&b).unwrap(), &b.jordan_mul(&a).unwrap(), 1e-12));
                // power associativity
                let aa = a.jordan_mul(&a).unwrap();
                let l = aa.jordan_mul(&a).unwrap();
                let r = a.jordan_mul(&aa).unwrap();
                assert!(close(&l, &r, 1e-11 * (1.0 + l.norm())));
                // symmetric, positive definite trace form
                assert!((a.inner(&b).unwrap() - b.inner(&a).unwrap()).abs() < 1e-12);
                assert!(a.inner(&a).unwrap() > 0.0);
                // inner product through the Jordan product
                let via = 2.0 * a.jordan_mul(&b).unwrap().trace();
                assert!((via - a.inner(&b).unwrap()).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn octonion_inner_is_symmetric_although_matrix_product_is_not() {
        let t = AlgebraTag::O;
        let o = |l| AlgebraElement::unit(t, l).unwrap();
        let a = HermitianMatrix::off_diagonal(t, 3, 0, 1, o(1))
            .unwrap()
            .add(&HermitianMatrix::off_diagonal(t, 3, 1, 2, o(2)).unwrap())
            .unwrap();
        let b = HermitianMatrix::off_diagonal(t, 3, 0, 2, o(4)).unwrap();
        assert!((a.inner(&b).unwrap() - b.inner(&a).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian_entries() {
        let t = AlgebraTag::C;
        let i = AlgebraElement::unit(t, 1).unwrap();
        let z = AlgebraElement::zero(t).unwrap();
        let bad = HermitianMatrix::from_entries(t, 2, vec![z, i, i, z]);
        assert!(bad.is_err());
        let good = HermitianMatrix::from_entries(t, 2, vec![z, i, i.conj(), z]);
        assert!(good.is_ok());
    }
}
