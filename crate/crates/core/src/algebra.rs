//! Normed division algebras ℝ, ℂ, ℍ, 𝕆.
//!
//! Elements are coefficient vectors over the unit basis `{i₀ = 1, i₁, …, i_Λ}`.
//! The multiplication convention is fixed by Cayley–Dickson doubling
//! ℝ → ℂ → ℍ → 𝕆 with
//!
//! ```text
//! (a, b)(c, d) = (ac − d̄b, da + bc̄)
//! ```
//!
//! so that, for instance, `i₁i₂ = i₃` and `i₁i₄ = i₅`. Only norms and real
//! parts of products enter the geometry, so any other convention gives the
//! same downstream numbers.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which Jordan-algebra family a computation lives in.
///
/// `SpinFactor(m)` is the spin factor `S₂(ℝᵐ)`; it is accepted by the Jordan
/// and chart layers but rejected by division-algebra arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AlgebraTag {
    R,
    C,
    H,
    O,
    SpinFactor(usize),
}

impl AlgebraTag {
    /// Real dimension `d` of the division algebra.
    pub fn dim(self) -> Result<usize> {
        match self {
            AlgebraTag::R => Ok(1),
            AlgebraTag::C => Ok(2),
            AlgebraTag::H => Ok(4),
            AlgebraTag::O => Ok(8),
            AlgebraTag::SpinFactor(_) => Err(Error::SpinFactorArithmetic(self)),
        }
    }

    /// Number of unit directions `Λ + 1` used by chart coordinates; the spin
    /// factor has a single real direction per coordinate.
    pub fn units(self) -> usize {
        match self {
            AlgebraTag::SpinFactor(_) => 1,
            other => other.dim().unwrap_or(1),
        }
    }

    /// Number of imaginary units `Λ`.
    pub fn imaginary_units(self) -> usize {
        self.units() - 1
    }

    pub fn is_spin_factor(self) -> bool {
        matches!(self, AlgebraTag::SpinFactor(_))
    }

    /// Short name used by the CLI and the frame-spec files.
    pub fn name(self) -> &'static str {
        match self {
            AlgebraTag::R => "R",
            AlgebraTag::C => "C",
            AlgebraTag::H => "H",
            AlgebraTag::O => "O",
            AlgebraTag::SpinFactor(_) => "Rm",
        }
    }

    pub(crate) fn require_division(self) -> Result<usize> {
        self.dim()
    }
}

impl fmt::Display for AlgebraTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgebraTag::SpinFactor(m) => write!(f, "R^{m}"),
            other => f.write_str(other.name()),
        }
    }
}

/// An element of ℝ, ℂ, ℍ or 𝕆. Coefficients past `dim` are kept at zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlgebraElement {
    tag: AlgebraTag,
    c: [f64; 8],
}

impl AlgebraElement {
    pub fn new(tag: AlgebraTag, coeffs: &[f64]) -> Result<Self> {
        let d = tag.require_division()?;
        if coeffs.len() != d {
            return Err(Error::Shape(format!(
                "{tag} element needs {d} coefficients, got {}",
                coeffs.len()
            )));
        }
        let mut c = [0.0; 8];
        c[..d].copy_from_slice(coeffs);
        Ok(Self { tag, c })
    }

    pub fn zero(tag: AlgebraTag) -> Result<Self> {
        tag.require_division()?;
        Ok(Self { tag, c: [0.0; 8] })
    }

    pub fn one(tag: AlgebraTag) -> Result<Self> {
        Self::unit(tag, 0)
    }

    pub fn real(tag: AlgebraTag, x: f64) -> Result<Self> {
        Ok(Self::one(tag)?.scale(x))
    }

    /// The basis unit `i_l`.
    pub fn unit(tag: AlgebraTag, l: usize) -> Result<Self> {
        let d = tag.require_division()?;
        if l >= d {
            return Err(Error::Index(format!("unit i_{l} does not exist in {tag}")));
        }
        let mut c = [0.0; 8];
        c[l] = 1.0;
        Ok(Self { tag, c })
    }

    pub fn tag(&self) -> AlgebraTag {
        self.tag
    }

    pub fn dim(&self) -> usize {
        self.tag.units()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c[..self.dim()]
    }

    pub fn coeff(&self, l: usize) -> f64 {
        self.c[l]
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub fn conj(&self) -> Self {
        let mut c = self.c;
        for x in c.iter_mut().skip(1) {
            *x = -*x;
        }
        Self { tag: self.tag, c }
    }

    pub fn re(&self) -> f64 {
        self.c[0]
    }

    pub fn norm2(&self) -> f64 {
        self.coeffs().iter().map(|x| x * x).sum()
    }

    /// Euclidean inner product `Re(a b̄)` of the coefficient vectors.
    pub fn dot(&self, other: &Self) -> f64 {
        self.coeffs()
            .iter()
            .zip(other.coeffs())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut c = self.c;
        c.iter_mut().for_each(|x| *x *= s);
        Self { tag: self.tag, c }
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0.0)
    }

    pub(crate) fn check_same(&self, other: &Self) -> Result<()> {
        if self.tag != other.tag {
            return Err(Error::TagMismatch(self.tag, other.tag));
        }
        Ok(())
    }

    /// Product through the cached structure constants; tags must agree.
    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        debug_assert_eq!(self.tag, other.tag);
        let d = self.dim();
        let table = structure_table(d);
        let mut c = [0.0; 8];
        for i in 0..d {
            let a = self.c[i];
            if a == 0.0 {
                continue;
            }
            for j in 0..d {
                let b = other.c[j];
                if b == 0.0 {
                    continue;
                }
                let (k, sign) = table[i * d + j];
                c[k] += sign * a * b;
            }
        }
        Self { tag: self.tag, c }
    }
}

impl Add for AlgebraElement {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        debug_assert_eq!(self.tag, rhs.tag);
        for (a, b) in self.c.iter_mut().zip(rhs.c) {
            *a += b;
        }
        self
    }
}

impl AddAssign for AlgebraElement {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Sub for AlgebraElement {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for AlgebraElement {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul for AlgebraElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.mul_unchecked(&rhs)
    }
}

/// Free-function form of [`AlgebraElement::checked_mul`].
pub fn mul(a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
    a.checked_mul(b)
}

pub fn conj(a: &AlgebraElement) -> Result<AlgebraElement> {
    a.tag.require_division()?;
    Ok(a.conj())
}

pub fn re(a: &AlgebraElement) -> Result<f64> {
    a.tag.require_division()?;
    Ok(a.re())
}

pub fn norm2(a: &AlgebraElement) -> Result<f64> {
    a.tag.require_division()?;
    Ok(a.norm2())
}

/// Reference Cayley–Dickson product on raw coefficient slices of equal
/// power-of-two length. `out` must have the same length.
pub fn cayley_dickson_mul(x: &[f64], y: &[f64], out: &mut [f64]) {
    let n = x.len();
    debug_assert!(n.is_power_of_two() && y.len() == n && out.len() == n);
    if n == 1 {
        out[0] = x[0] * y[0];
        return;
    }
    let h = n / 2;
    let (a, b) = x.split_at(h);
    let (c, d) = y.split_at(h);
    let conj = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .enumerate()
            .map(|(i, &t)| if i == 0 { t } else { -t })
            .collect()
    };
    let mut t1 = vec![0.0; h];
    let mut t2 = vec![0.0; h];
    // first half: ac − d̄b
    cayley_dickson_mul(a, c, &mut t1);
    cayley_dickson_mul(&conj(d), b, &mut t2);
    for i in 0..h {
        out[i] = t1[i] - t2[i];
    }
    // second half: da + bc̄
    cayley_dickson_mul(d, a, &mut t1);
    cayley_dickson_mul(b, &conj(c), &mut t2);
    for i in 0..h {
        out[h + i] = t1[i] + t2[i];
    }
}

type Table = Vec<(usize, f64)>;

fn build_table(d: usize) -> Table {
    let mut table = Vec::with_capacity(d * d);
    let mut out = vec![0.0; d];
    for i in 0..d {
        for j in 0..d {
            let mut x = vec![0.0; d];
            let mut y = vec![0.0; d];
            x[i] = 1.0;
            y[j] = 1.0;
            cayley_dickson_mul(&x, &y, &mut out);
            let k = out.iter().position(|v| *v != 0.0).expect("unit product");
            table.push((k, out[k]));
        }
    }
    table
}

fn structure_table(d: usize) -> &'static Table {
    static TABLES: [OnceLock<Table>; 4] = [
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
    ];
    let slot = d.trailing_zeros() as usize;
    TABLES[slot].get_or_init(|| build_table(d))
}
