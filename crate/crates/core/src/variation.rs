//! Second variation of the volume of a tangent `p`-frame under the fields
//! `V_u` and its trace over the trace-free directions `u`.
//!
//! Three evaluations of `tr Q_ξ` are provided:
//! * brute force: `Σ_u Q_ξ(V_u)` over the fixed trace-free basis;
//! * through the second fundamental form:
//!   `Σ_{j,k} 2‖II(e_j, n_k)‖² − ⟨II(e_j, e_j), II(n_k, n_k)⟩`;
//! * at the origin, `−Σ_l ‖J_l·ξ‖²` with `J_l` acting by the Leibniz rule.
//!
//! Frames are handled as `p × D` row matrices over the orthonormal tangent
//! basis of their base point. The normal completion `{n_k}` is obtained by
//! sweeping the orthonormal tangent basis in order against the frame.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraTag;
use crate::calculus::{sff_closed_form_origin, FieldHandle, FieldOperators, LocalGeometry};
use crate::chart::{ChartPoint, PFrame, ProjectiveSpace};
use crate::error::{Error, Result};
use crate::frame_spec::FrameSpec;
use crate::linalg;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub algebraic: f64,
    pub crosscheck: f64,
    pub flow: f64,
    pub fd_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            algebraic: 1e-9,
            crosscheck: 1e-5,
            flow: 1e-3,
            fd_step: 1e-4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    ComplexFrame,
    StrictlyUnstableOnAverage,
}

/// Orthonormal completion of the frame rows inside the tangent space.
pub fn frame_completion(rows: &DMatrix<f64>) -> DMatrix<f64> {
    linalg::orthonormal_complement(&rows.transpose()).transpose()
}

fn check_rows(rows: &DMatrix<f64>, dim: usize, tol: f64) -> Result<()> {
    if rows.ncols() != dim || rows.nrows() == 0 || rows.nrows() > dim {
        return Err(Error::Shape(format!("frame of shape {:?} in dimension {dim}", rows.shape())));
    }
    let r = linalg::orthonormality_residual(&rows.transpose());
    if r > tol {
        return Err(Error::NonOrthonormal(r));
    }
    Ok(())
}

/// `(Σ_j ⟨A e_j, e_j⟩)² + 2 Σ_{j,k} ⟨A e_j, n_k⟩² + Σ_j ⟨A_{V,V} e_j, e_j⟩`,
/// valid for gradient fields.
pub fn q_expanded(ops: &FieldOperators, e: &DMatrix<f64>, n: &DMatrix<f64>) -> f64 {
    let ae = &ops.a * e.transpose();
    let a = e * &ae;
    let b = n * &ae;
    let avv = (e * &ops.avv * e.transpose()).trace();
    a.trace().powi(2) + 2.0 * b.norm_squared() + avv
}

/// Second derivative of `√det G(t)` for the pushed-forward frame, valid for
/// any field:
/// `Σ⟨A_{V,V}e_j,e_j⟩ + Σ⟨A²e_j,e_j⟩ + Σ‖Ae_j‖² + (Σ a_jj)² − ½‖a + aᵀ‖²`.
pub fn q_general(ops: &FieldOperators, e: &DMatrix<f64>) -> f64 {
    let ae = &ops.a * e.transpose();
    let a = e * &ae;
    let a2 = (e * &ops.a * &ae).trace();
    let avv = (e * &ops.avv * e.transpose()).trace();
    let sym = &a + a.transpose();
    avv + a2 + ae.norm_squared() + a.trace().powi(2) - 0.5 * sym.norm_squared()
}

/// Everything needed to evaluate traces for many frames at one point.
#[derive(Clone, Debug)]
pub struct PointAnalysis {
    space: ProjectiveSpace,
    geom: LocalGeometry,
    fields: Vec<FieldOperators>,
    /// `II(t_a, t_b)` at column `a·D + b`.
    sff: DMatrix<f64>,
}

impl PointAnalysis {
    pub fn new(space: &ProjectiveSpace, pt: &ChartPoint) -> Result<Self> {
        let geom = LocalGeometry::new(space, pt)?;
        let amb = space.ambient_dim();
        // the last ambient direction is the identity, whose field vanishes
        let fields = (0..amb - 1)
            .into_par_iter()
            .map(|i| {
                let mut u = DVector::zeros(amb);
                u[i] = 1.0;
                FieldOperators::new(&geom, &FieldHandle::Gradient(u))
            })
            .collect::<Result<Vec<_>>>()?;
        let sff = if pt.is_origin() {
            origin_sff_table(space)?
        } else {
            let c = &geom.coeffs;
            let d = space.dim();
            let mut table = DMatrix::zeros(amb, d * d);
            for a in 0..d {
                for b in 0..d {
                    let col = geom.sff_chart(&c.row(a).transpose(), &c.row(b).transpose());
                    table.set_column(a * d + b, &col);
                }
            }
            table
        };
        Ok(Self {
            space: space.clone(),
            geom,
            fields,
            sff,
        })
    }

    pub fn space(&self) -> &ProjectiveSpace {
        &self.space
    }

    pub fn geometry(&self) -> &LocalGeometry {
        &self.geom
    }

    /// Operators of `V_u` for `u` running through the trace-free basis.
    pub fn field_operators(&self) -> &[FieldOperators] {
        &self.fields
    }

    /// `II(x, y)` for orthonormal coefficients.
    pub fn sff(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let d = self.space.dim();
        let mut w = DVector::zeros(d * d);
        for a in 0..d {
            if x[a] == 0.0 {
                continue;
            }
            for b in 0..d {
                w[a * d + b] = x[a] * y[b];
            }
        }
        &self.sff * w
    }

    pub fn trace_bruteforce(&self, rows: &DMatrix<f64>, tol: f64) -> Result<(f64, Vec<f64>)> {
        check_rows(rows, self.space.dim(), tol)?;
        let n = frame_completion(rows);
        let per: Vec<f64> = self.fields.iter().map(|ops| q_expanded(ops, rows, &n)).collect();
        Ok((linalg::pairwise_sum(&per), per))
    }

    /// `Q_ξ(V)` for an arbitrary field at this point.
    pub fn second_variation(&self, field: &FieldHandle, rows: &DMatrix<f64>, tol: f64) -> Result<f64> {
        check_rows(rows, self.space.dim(), tol)?;
        let ops = FieldOperators::new(&self.geom, field)?;
        Ok(match field {
            FieldHandle::Gradient(_) => q_expanded(&ops, rows, &frame_completion(rows)),
            FieldHandle::Killing(_) => q_general(&ops, rows),
        })
    }

    pub fn trace_sff(&self, rows: &DMatrix<f64>, tol: f64) -> Result<f64> {
        check_rows(rows, self.space.dim(), tol)?;
        let n = frame_completion(rows);
        let amb = self.space.ambient_dim();
        let mut mixed = 0.0;
        let mut sum_e = DVector::zeros(amb);
        let mut sum_n = DVector::zeros(amb);
        for e in rows.row_iter() {
            let e = e.transpose();
            sum_e += self.sff(&e, &e);
            for nk in n.row_iter() {
                mixed += self.sff(&e, &nk.transpose()).norm_squared();
            }
        }
        for nk in n.row_iter() {
            let nk = nk.transpose();
            sum_n += self.sff(&nk, &nk);
        }
        Ok(2.0 * mixed - sum_e.dot(&sum_n))
    }
}

fn origin_sff_table(space: &ProjectiveSpace) -> Result<DMatrix<f64>> {
    let d = space.dim();
    let u = space.units();
    let mut table = DMatrix::zeros(space.ambient_dim(), d * d);
    for a in 0..d {
        for b in 0..d {
            let m = sff_closed_form_origin(space.tag(), space.n(), a / u, a % u, b / u, b % u)?;
            table.set_column(a * d + b, &space.ambient().to_coords(&m)?);
        }
    }
    Ok(table)
}

/// `Q_ξ(V)` for one field. Gradient fields use the expanded formula;
/// Killing fields use the general push-forward expansion.
pub fn second_variation(space: &ProjectiveSpace, frame: &PFrame, field: &FieldHandle) -> Result<f64> {
    let geom = LocalGeometry::new(space, &frame.base)?;
    let ops = FieldOperators::new(&geom, field)?;
    let rows = space.frame_rows(frame)?;
    check_rows(&rows, space.dim(), 1e-9)?;
    Ok(match field {
        FieldHandle::Gradient(_) => q_expanded(&ops, &rows, &frame_completion(&rows)),
        FieldHandle::Killing(_) => q_general(&ops, &rows),
    })
}

pub fn trace_secvar_bruteforce(space: &ProjectiveSpace, frame: &PFrame) -> Result<(f64, Vec<f64>)> {
    let rows = space.frame_rows(frame)?;
    PointAnalysis::new(space, &frame.base)?.trace_bruteforce(&rows, 1e-9)
}

pub fn trace_secvar_sff(space: &ProjectiveSpace, frame: &PFrame) -> Result<f64> {
    let rows = space.frame_rows(frame)?;
    PointAnalysis::new(space, &frame.base)?.trace_sff(&rows, 1e-9)
}

/// `‖L·ξ‖²` for `ξ = e₁∧…∧e_p` (rows of `rows`), with `L` extended by the
/// Leibniz rule; evaluated through Gram determinants.
pub fn leibniz_norm2(rows: &DMatrix<f64>, op: &DMatrix<f64>) -> f64 {
    let p = rows.nrows();
    let images = rows * op.transpose();
    let mut total = 0.0;
    for j in 0..p {
        for k in 0..p {
            let gram = DMatrix::from_fn(p, p, |i, i2| {
                let u = if i == j { images.row(i) } else { rows.row(i) };
                let w = if i2 == k { images.row(i2) } else { rows.row(i2) };
                u.dot(&w)
            });
            total += gram.determinant();
        }
    }
    total
}

/// `‖J_l·ξ‖²` for `l = 1..Λ` at the origin.
pub fn j_norms2(space: &ProjectiveSpace, rows: &DMatrix<f64>) -> Result<Vec<f64>> {
    if space.tag().is_spin_factor() {
        return Err(Error::NoComplexStructure(space.tag()));
    }
    (1..space.units())
        .map(|l| Ok(leibniz_norm2(rows, &space.complex_structure_matrix(l)?)))
        .collect()
}

/// `‖J_l·ξ‖` for `l = 1..Λ` at the origin, through the normal part of
/// `J_l e_j`: for an orthogonal antisymmetric `J`, the Leibniz image is
/// `Σ_j e_1∧…∧(J e_j)^⊥∧…∧e_p`, whose norm squared is `Σ_j ‖(J e_j)^⊥‖²`.
/// Unlike the Gram-determinant sum this has no cancellation near zero.
pub fn j_defects(space: &ProjectiveSpace, rows: &DMatrix<f64>) -> Result<Vec<f64>> {
    if space.tag().is_spin_factor() {
        return Err(Error::NoComplexStructure(space.tag()));
    }
    (1..space.units())
        .map(|l| {
            let images = rows * space.complex_structure_matrix(l)?.transpose();
            let normal = &images - (&images * rows.transpose()) * rows;
            Ok(normal.norm())
        })
        .collect()
}

pub fn trace_secvar_closed_j(space: &ProjectiveSpace, frame: &PFrame) -> Result<f64> {
    if space.tag().is_spin_factor() {
        return Err(Error::NoComplexStructure(space.tag()));
    }
    if !frame.base.is_origin() {
        return Err(Error::NotOrigin);
    }
    let rows = space.frame_rows(frame)?;
    check_rows(&rows, space.dim(), 1e-9)?;
    Ok(-j_norms2(space, &rows)?.iter().sum::<f64>())
}

/// Result of [`classify_frame`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameClass {
    pub classification: Classification,
    /// Indices `l` with `‖J_l·ξ‖ > tol`.
    pub failing: Vec<usize>,
}

/// J-invariance test at the origin; for the sphere the classification
/// follows from `tr = −p(m − p)`.
pub fn classify_frame(space: &ProjectiveSpace, frame: &PFrame, tol: f64) -> Result<FrameClass> {
    if !frame.base.is_origin() {
        return Err(Error::NotOrigin);
    }
    let rows = space.frame_rows(frame)?;
    if let AlgebraTag::SpinFactor(m) = space.tag() {
        let p = frame.p();
        let classification = if p > 0 && p < m {
            Classification::StrictlyUnstableOnAverage
        } else {
            Classification::ComplexFrame
        };
        return Ok(FrameClass {
            classification,
            failing: Vec::new(),
        });
    }
    let failing: Vec<usize> = j_defects(space, &rows)?
        .iter()
        .enumerate()
        .filter(|(_, n)| **n > tol)
        .map(|(i, _)| i + 1)
        .collect();
    let classification = if failing.is_empty() {
        Classification::ComplexFrame
    } else {
        Classification::StrictlyUnstableOnAverage
    };
    Ok(FrameClass {
        classification,
        failing,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowConfig {
    /// Step of the central second difference in `t`.
    pub h: f64,
    /// RK4 steps per flow segment.
    pub substeps: usize,
    /// Allowed change of the extrapolated estimate when `h` is halved.
    pub tol: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            h: 1e-3,
            substeps: 4,
            tol: 1e-3,
        }
    }
}

/// Chart velocity `V^a` of a field and its derivative `∂_c V^a`.
fn velocity(space: &ProjectiveSpace, field: &FieldHandle, x: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
    let d = space.dim();
    let jet = space.jet(x, 2);
    let g = jet.d1.transpose() * &jet.d1;
    let ginv = g.try_inverse().unwrap_or_else(|| DMatrix::from_element(d, d, f64::NAN));
    let (w, w1) = match field {
        FieldHandle::Gradient(u) => (u.clone(), None),
        FieldHandle::Killing(k) => (k * &jet.phi, Some(k * &jet.d1)),
    };
    let y = jet.d1.transpose() * &w;
    let wd2 = jet.d2.transpose() * &w;
    let mut dy = DMatrix::zeros(d, d);
    for c in 0..d {
        for b in 0..d {
            dy[(b, c)] = wd2[b * d + c];
        }
    }
    if let Some(w1) = &w1 {
        // (w1ᵀ d1)[c][b] = ⟨W_c, φ_b⟩
        dy += (w1.transpose() * &jet.d1).transpose();
    }
    let v = &ginv * &y;
    let lower = jet.d2.transpose() * &jet.d1;
    let mut dv = DMatrix::zeros(d, d);
    for c in 0..d {
        let dg = DMatrix::from_fn(d, d, |a, b| lower[(a * d + c, b)] + lower[(b * d + c, a)]);
        let col = -(&ginv * (dg * &v)) + &ginv * dy.column(c);
        dv.set_column(c, &col);
    }
    (v, dv)
}

fn volume(space: &ProjectiveSpace, x: &[f64], frame: &DMatrix<f64>) -> f64 {
    let d1 = space.jet(x, 1).d1;
    let pushed = d1 * frame;
    (pushed.transpose() * pushed).determinant().max(0.0).sqrt()
}

fn flow(space: &ProjectiveSpace, field: &FieldHandle, x0: &[f64], j0: &DMatrix<f64>, t: f64, steps: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let dt = t / steps as f64;
    let mut x = DVector::from_column_slice(x0);
    let mut j = j0.clone();
    let rhs = |x: &DVector<f64>, j: &DMatrix<f64>| {
        let (v, dv) = velocity(space, field, x.as_slice());
        (v, dv * j)
    };
    for _ in 0..steps {
        let (k1x, k1j) = rhs(&x, &j);
        let (k2x, k2j) = rhs(&(&x + &k1x * (dt / 2.0)), &(&j + &k1j * (dt / 2.0)));
        let (k3x, k3j) = rhs(&(&x + &k2x * (dt / 2.0)), &(&j + &k2j * (dt / 2.0)));
        let (k4x, k4j) = rhs(&(&x + &k3x * dt), &(&j + &k3j * dt));
        x += (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (dt / 6.0);
        j += (k1j + k2j * 2.0 + k3j * 2.0 + k4j) * (dt / 6.0);
        if !x.iter().chain(j.iter()).all(|v| v.is_finite()) || x.amax() > 1e8 {
            return Err(Error::LeftChart(t));
        }
    }
    Ok((x.as_slice().to_vec(), j))
}

/// `d²/dt²|₀ ‖(φ_t)_* ξ‖` by integrating the flow of the field in chart
/// coordinates together with its variational equation.
pub fn flow_oracle(space: &ProjectiveSpace, frame: &PFrame, field: &FieldHandle, cfg: FlowConfig) -> Result<f64> {
    space.check_point(&frame.base)?;
    let d = space.dim();
    let j0 = DMatrix::from_fn(d, frame.p(), |a, i| frame.vectors[i].coords[a]);
    let x0 = &frame.base.q;
    let v0 = volume(space, x0, &j0);
    let estimate = |h: f64| -> Result<f64> {
        let (xp, jp) = flow(space, field, x0, &j0, h, cfg.substeps)?;
        let (xm, jm) = flow(space, field, x0, &j0, -h, cfg.substeps)?;
        Ok((volume(space, &xp, &jp) - 2.0 * v0 + volume(space, &xm, &jm)) / (h * h))
    };
    // each estimate carries an O(h²) error; cancel its leading term and
    // compare two such extrapolations
    let e = [estimate(cfg.h)?, estimate(cfg.h / 2.0)?, estimate(cfg.h / 4.0)?];
    let coarse = (4.0 * e[1] - e[0]) / 3.0;
    let fine = (4.0 * e[2] - e[1]) / 3.0;
    if (coarse - fine).abs() > cfg.tol {
        return Err(Error::NonConvergence(format!(
            "flow estimate changed by {:.3e} when halving the step",
            (coarse - fine).abs()
        )));
    }
    Ok(fine)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceTriple {
    pub bruteforce: f64,
    pub sff: f64,
    #[serde(rename = "closedJ")]
    pub closed_j: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerField {
    pub index: usize,
    pub q: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationReport {
    pub trace: TraceTriple,
    pub per_field: Vec<PerField>,
    pub classification: Classification,
    pub frame_echo: FrameSpec,
    pub tolerances: Tolerances,
}

impl VariationReport {
    /// Residuals of the report invariants: `(max(trace, 0), |bf − sff|,
    /// |closedJ − sff|)`.
    pub fn residuals(&self) -> (f64, f64, Option<f64>) {
        let t = &self.trace;
        (
            t.bruteforce.max(0.0),
            (t.bruteforce - t.sff).abs(),
            t.closed_j.map(|c| (c - t.sff).abs()),
        )
    }
}

pub fn variation_report(space: &ProjectiveSpace, frame: &PFrame, tol: Tolerances) -> Result<VariationReport> {
    let rows = space.frame_rows(frame)?;
    let analysis = PointAnalysis::new(space, &frame.base)?;
    let (bruteforce, per) = analysis.trace_bruteforce(&rows, tol.algebraic)?;
    let sff = analysis.trace_sff(&rows, tol.algebraic)?;
    let closed_j = if frame.base.is_origin() && !space.tag().is_spin_factor() {
        Some(-j_norms2(space, &rows)?.iter().sum::<f64>())
    } else {
        None
    };
    let classification = if bruteforce.abs() <= tol.crosscheck {
        Classification::ComplexFrame
    } else {
        Classification::StrictlyUnstableOnAverage
    };
    Ok(VariationReport {
        trace: TraceTriple {
            bruteforce,
            sff,
            closed_j,
        },
        per_field: per.into_iter().enumerate().map(|(index, q)| PerField { index, q }).collect(),
        classification,
        frame_echo: FrameSpec::from_frame(space, frame)?,
        tolerances: tol,
    })
}

/// `{v, J₁v, …, J_Λv}` at the origin for orthonormal coefficients `v`.
pub fn j_orbit_rows(space: &ProjectiveSpace, v: &DVector<f64>) -> Result<DMatrix<f64>> {
    let v = v.normalize();
    let mut rows = vec![v.transpose()];
    for l in 1..space.units() {
        rows.push((space.complex_structure_matrix(l)? * &v).transpose());
    }
    Ok(DMatrix::from_rows(&rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_frame_rows, random_point, rng_for};

    fn origin_frame(space: &ProjectiveSpace, rows: &DMatrix<f64>) -> PFrame {
        space.frame_from_orthonormal(&space.origin(), rows, 1e-9).unwrap()
    }

    fn unit_rows(d: usize, idx: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(idx.len(), d, |i, j| if idx[i] == j { 1.0 } else { 0.0 })
    }

    #[test]
    fn sphere_coordinate_frame() {
        let s = ProjectiveSpace::sphere(4).unwrap();
        let f = origin_frame(&s, &unit_rows(4, &[0]));
        let (t, per) = trace_secvar_bruteforce(&s, &f).unwrap();
        assert!((t + 3.0).abs() < 1e-12);
        assert_eq!(per.len(), 5);
        assert!((trace_secvar_sff(&s, &f).unwrap() + 3.0).abs() < 1e-12);
    }

    #[test]
    fn complex_plane_examples() {
        let s = ProjectiveSpace::new(AlgebraTag::C, 2).unwrap();
        let line = origin_frame(&s, &unit_rows(4, &[0, 1]));
        assert!(trace_secvar_bruteforce(&s, &line).unwrap().0.abs() < 1e-12);
        assert_eq!(
            classify_frame(&s, &line, 1e-9).unwrap().classification,
            Classification::ComplexFrame
        );
        let generic = origin_frame(&s, &unit_rows(4, &[0, 2]));
        let t = trace_secvar_bruteforce(&s, &generic).unwrap().0;
        assert!((t + 2.0).abs() < 1e-12);
        assert!((trace_secvar_closed_j(&s, &generic).unwrap() + 2.0).abs() < 1e-12);
        let class = classify_frame(&s, &generic, 1e-9).unwrap();
        assert_eq!(class.failing, vec![1]);
    }

    #[test]
    fn leibniz_norm_matches_projection_identity() {
        let s = ProjectiveSpace::new(AlgebraTag::O, 2).unwrap();
        let mut rng = rng_for(3, 0);
        for p in [1, 3, 8] {
            let rows = random_frame_rows(&mut rng, 16, p);
            for l in 1..8 {
                let j = s.complex_structure_matrix(l).unwrap();
                let a = &rows * &j * rows.transpose();
                let identity = p as f64 - a.norm_squared();
                assert!((leibniz_norm2(&rows, &j) - identity).abs() < 1e-10);
                let defect = j_defects(&s, &rows).unwrap()[l - 1];
                assert!((defect * defect - identity).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn quaternionic_line_in_hp1_matches_sphere_count() {
        let s = ProjectiveSpace::new(AlgebraTag::H, 1).unwrap();
        let mut rng = rng_for(5, 0);
        let rows = random_frame_rows(&mut rng, 4, 1);
        let f = origin_frame(&s, &rows);
        assert!((trace_secvar_closed_j(&s, &f).unwrap() + 3.0).abs() < 1e-12);
        assert!((trace_secvar_bruteforce(&s, &f).unwrap().0 + 3.0).abs() < 1e-10);
    }

    #[test]
    fn completion_rotation_does_not_change_q() {
        let s = ProjectiveSpace::new(AlgebraTag::H, 2).unwrap();
        let mut rng = rng_for(8, 0);
        let pt = random_point(&mut rng, &s, 0.5);
        let pa = PointAnalysis::new(&s, &pt).unwrap();
        let rows = random_frame_rows(&mut rng, 8, 3);
        let n = frame_completion(&rows);
        let rot = random_frame_rows(&mut rng, 5, 5);
        let n2 = &rot * &n;
        let spin = random_frame_rows(&mut rng, 3, 3);
        let rows2 = &spin * &rows;
        for ops in pa.field_operators() {
            let q1 = q_expanded(ops, &rows, &n);
            assert!((q1 - q_expanded(ops, &rows, &n2)).abs() < 1e-12);
            assert!((q1 - q_expanded(ops, &rows2, &n)).abs() < 1e-12);
            assert!((q1 - q_general(ops, &rows)).abs() < 1e-11);
        }
    }

    #[test]
    fn flow_oracle_agrees_with_formula() {
        let mut rng = rng_for(13, 0);
        for s in [
            ProjectiveSpace::new(AlgebraTag::C, 1).unwrap(),
            ProjectiveSpace::new(AlgebraTag::H, 1).unwrap(),
            ProjectiveSpace::sphere(3).unwrap(),
        ] {
            let pt = random_point(&mut rng, &s, 0.5);
            let rows = random_frame_rows(&mut rng, s.dim(), 2);
            let f = s.frame_from_orthonormal(&pt, &rows, 1e-9).unwrap();
            let u = crate::sampling::gaussian_vector(&mut rng, s.ambient_dim());
            let field = FieldHandle::Gradient(u);
            let exact = second_variation(&s, &f, &field).unwrap();
            let oracle = flow_oracle(&s, &f, &field, FlowConfig::default()).unwrap();
            assert!((exact - oracle).abs() < 1e-5, "{} {exact} {oracle}", s.tag());
        }
    }

    #[test]
    fn report_json_shape() {
        let s = ProjectiveSpace::new(AlgebraTag::C, 2).unwrap();
        let f = origin_frame(&s, &unit_rows(4, &[0, 1]));
        let r = variation_report(&s, &f, Tolerances::default()).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert!(v["trace"]["closedJ"].is_number());
        assert_eq!(v["classification"], "complex-frame");
        assert_eq!(v["per_field"].as_array().unwrap().len(), 8);
    }

    #[test]
    fn closed_j_errors() {
        let s = ProjectiveSpace::sphere(3).unwrap();
        let f = origin_frame(&s, &unit_rows(3, &[0]));
        assert!(matches!(trace_secvar_closed_j(&s, &f), Err(Error::NoComplexStructure(_))));
        let c = ProjectiveSpace::new(AlgebraTag::C, 1).unwrap();
        let pt = c.point(vec![0.2, 0.1]).unwrap();
        let f = c.frame_from_orthonormal(&pt, &unit_rows(2, &[0]), 1e-9).unwrap();
        assert!(matches!(trace_secvar_closed_j(&c, &f), Err(Error::NotOrigin)));
    }

    #[test]
    fn octonionic_adapted_plane_is_invariant() {
        let s = ProjectiveSpace::new(AlgebraTag::O, 2).unwrap();
        let (a, b) = (0.6, 0.8);
        let mut v = DVector::zeros(16);
        v[3] = a;
        v[8 + 3] = b;
        let rows = j_orbit_rows(&s, &v).unwrap();
        let f = origin_frame(&s, &rows);
        let r = variation_report(&s, &f, Tolerances::default()).unwrap();
        assert!(r.trace.bruteforce.abs() < 1e-10);
        assert!(r.trace.sff.abs() < 1e-10);
        assert!(r.trace.closed_j.unwrap().abs() < 1e-10);
        assert!(classify_frame(&s, &f, 1e-9).unwrap().failing.is_empty());
    }

    #[test]
    fn octonionic_line_has_zero_trace_without_invariance() {
        use crate::algebra::AlgebraElement;
        let s = ProjectiveSpace::new(AlgebraTag::O, 2).unwrap();
        let m = AlgebraElement::new(AlgebraTag::O, &[0.3, 0.5, 0.0, -0.2, 0.7, 0.0, 0.1, 0.4]).unwrap();
        let scale = (1.0 + m.norm2()).sqrt();
        let rows = DMatrix::from_fn(8, 16, |k, idx| {
            let x = AlgebraElement::unit(AlgebraTag::O, k).unwrap();
            let mx = m.checked_mul(&x).unwrap();
            let c = if idx < 8 { x.coeff(idx) } else { mx.coeff(idx - 8) };
            c / scale
        });
        let f = origin_frame(&s, &rows);
        let (bf, _) = trace_secvar_bruteforce(&s, &f).unwrap();
        assert!(bf.abs() < 1e-9, "{bf}");
        assert!((trace_secvar_sff(&s, &f).unwrap() - bf).abs() < 1e-9);
        let class = classify_frame(&s, &f, 1e-9).unwrap();
        assert!(!class.failing.is_empty());
    }
}
