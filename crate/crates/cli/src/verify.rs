//! The `verify` suites. Every suite draws from its own RNG stream family so
//! that adding samples to one suite leaves the others unchanged.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use apn_core::algebra::{AlgebraElement, AlgebraTag};
use apn_core::calculus::{self, sff_closed_form_origin, FdConfig, FieldHandle, FieldOperators, LocalGeometry};
use apn_core::chart::ProjectiveSpace;
use apn_core::error::Result;
use apn_core::sampling::{gaussian_vector, random_frame_rows, random_point, rng_for};
use apn_core::symmetry::{self, DerivationBasis};
use apn_core::variation::{self, FlowConfig, PointAnalysis, Tolerances};

/// Gap ratio required of the derivation null space.
const MIN_DERIVATION_GAP: f64 = 1e4;
/// Closure and symmetric-pair relations.
const BRACKET_TOL: f64 = 1e-7;
/// Second variation along Killing fields.
const KILLING_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct Suite {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
    pub checks: usize,
    /// Reported but excluded from the exit status.
    pub informational: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Suite {
    fn new(name: &str, residual: f64, tolerance: f64, checks: usize) -> Self {
        Self {
            name: name.to_string(),
            passed: residual <= tolerance,
            residual,
            tolerance,
            checks,
            informational: false,
            detail: None,
        }
    }

    fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }

    fn informational(mut self) -> Self {
        self.informational = true;
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub algebra: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    pub n: usize,
    pub seed: u64,
    pub samples: usize,
    pub tolerances: Tolerances,
    pub suites: Vec<Suite>,
    pub passed: bool,
}

fn stream(suite: u64, i: usize) -> u64 {
    (suite << 32) | i as u64
}

fn max(xs: impl IntoIterator<Item = f64>) -> f64 {
    // NaN propagates so that a broken evaluation cannot pass
    xs.into_iter().fold(0.0, |a, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) })
}

fn random_element<R: Rng>(rng: &mut R, tag: AlgebraTag) -> Result<AlgebraElement> {
    let d = tag.dim()?;
    AlgebraElement::new(tag, gaussian_vector(rng, d).as_slice())
}

fn random_p<R: Rng>(rng: &mut R, dim: usize) -> usize {
    rng.random_range(1..=dim)
}

struct Ctx<'a> {
    space: &'a ProjectiveSpace,
    seed: u64,
    samples: usize,
    tol: Tolerances,
}

impl Ctx<'_> {
    fn fd(&self) -> FdConfig {
        FdConfig {
            step: self.tol.fd_step,
            tol: self.tol.crosscheck,
        }
    }

    fn tag(&self) -> AlgebraTag {
        self.space.tag()
    }
}

fn algebra_suites(c: &Ctx) -> Result<Vec<Suite>> {
    let tag = c.tag();
    let mut norm = Vec::new();
    let mut alt = Vec::new();
    for i in 0..c.samples {
        let mut rng = rng_for(c.seed, stream(1, i));
        let x = random_element(&mut rng, tag)?;
        let y = random_element(&mut rng, tag)?;
        let xy = x * y;
        let scale = x.norm2() * y.norm2();
        norm.push((xy.norm2() - scale).abs() / scale);
        let left = (x * x) * y - x * (x * y);
        let right = (y * x) * x - y * (x * x);
        alt.push((left.norm2() + right.norm2()).sqrt() / (x.norm2() * y.norm2().sqrt()));
    }
    Ok(vec![
        Suite::new("algebra.norm_multiplicative", max(norm), c.tol.algebraic, c.samples),
        Suite::new("algebra.alternative", max(alt), c.tol.algebraic, c.samples),
    ])
}

fn jordan_suites(c: &Ctx) -> Result<Vec<Suite>> {
    let alg = c.space.ambient();
    let mut ident = Vec::new();
    let mut proj = Vec::new();
    let mut round = Vec::new();
    for i in 0..c.samples {
        let mut rng = rng_for(c.seed, stream(2, i));
        let x = alg.random_element(&mut rng);
        let y = alg.random_element(&mut rng);
        let x2 = x.jordan_mul(&x)?;
        let lhs = x2.jordan_mul(&y)?.jordan_mul(&x)?;
        let rhs = x2.jordan_mul(&y.jordan_mul(&x)?)?;
        ident.push(lhs.sub(&rhs)?.norm() / (x.norm().powi(3) * y.norm()));

        let pt = random_point(&mut rng, c.space, 1.0);
        let p = c.space.chart(&pt)?;
        let defect = p.jordan_mul(&p)?.sub(&p)?.norm() + (p.trace() - 1.0).abs();
        proj.push(defect);
        let back = c.space.inverse_chart(&c.space.chart_coords(&pt.q))?;
        let err = back.q.iter().zip(&pt.q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let qn: f64 = pt.q.iter().map(|v| v * v).sum();
        round.push(err / (1.0 + qn));
    }
    Ok(vec![
        Suite::new("jordan.jordan_identity", max(ident), c.tol.algebraic, c.samples),
        Suite::new("chart.rank_one_projection", max(proj), c.tol.algebraic, c.samples),
        Suite::new("chart.inverse_round_trip", max(round), c.tol.algebraic, c.samples),
    ])
}

fn calculus_suites(c: &Ctx) -> Result<Vec<Suite>> {
    let space = c.space;
    let d = space.dim();
    let u = space.units();
    let origin = space.origin();
    let basis = space.orthonormal_tangent_basis(&origin)?;
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|a| (a..d).map(move |b| (a, b))).collect();
    let sff_err = pairs
        .par_iter()
        .map(|&(a, b)| -> Result<f64> {
            let num = calculus::sff_numeric(space, &origin, &basis[a], &basis[b], c.fd())?;
            let exact = sff_closed_form_origin(space.tag(), space.n(), a / u, a % u, b / u, b % u)?;
            Ok(num.sub(&exact)?.norm())
        })
        .collect::<Result<Vec<_>>>()?;

    let shape_samples = c.samples.min(5);
    let mut shape_err = Vec::new();
    for i in 0..shape_samples {
        let mut rng = rng_for(c.seed, stream(3, i));
        let pt = random_point(&mut rng, space, 0.5);
        let geom = LocalGeometry::new(space, &pt)?;
        let field = FieldHandle::Gradient(gaussian_vector(&mut rng, space.ambient_dim()));
        let ops = FieldOperators::new(&geom, &field)?;
        let x = gaussian_vector(&mut rng, d).normalize();
        let tx = space.tangent_from_coords(&pt, &geom.chart_components(&x))?;
        let fd = calculus::shape_operator(space, &pt, &field, &tx, c.fd())?;
        let exact = &geom.tangent * (&ops.a * &x);
        shape_err.push((fd.ambient - exact).norm());
    }
    Ok(vec![
        Suite::new("calculus.sff_closed_form", max(sff_err), c.tol.crosscheck, pairs.len()),
        Suite::new("calculus.shape_operator_fd", max(shape_err), c.tol.crosscheck, shape_samples),
    ])
}

/// J-invariant frames at the origin.
fn invariant_rows<R: Rng>(rng: &mut R, space: &ProjectiveSpace) -> Result<DMatrix<f64>> {
    let d = space.dim();
    let v = if space.tag() == AlgebraTag::O {
        // (a y, b y) with real (a, b) spans an octonionic line through 0
        let y = gaussian_vector(rng, 8).normalize();
        let ab = gaussian_vector(rng, space.n()).normalize();
        DVector::from_fn(d, |i, _| ab[i / 8] * y[i % 8])
    } else {
        gaussian_vector(rng, d)
    };
    variation::j_orbit_rows(space, &v)
}

fn variation_suites(c: &Ctx, all_traces: &mut Vec<f64>) -> Result<Vec<Suite>> {
    let space = c.space;
    let d = space.dim();
    let tag = c.tag();
    let mut suites = Vec::new();
    let origin = PointAnalysis::new(space, &space.origin())?;

    // bruteforce vs second fundamental form, origin
    let origin_rows: Vec<DMatrix<f64>> = (0..c.samples)
        .map(|i| {
            let mut rng = rng_for(c.seed, stream(4, i));
            let p = random_p(&mut rng, d);
            random_frame_rows(&mut rng, d, p)
        })
        .collect();
    let origin_vals = origin_rows
        .par_iter()
        .map(|rows| -> Result<(f64, f64)> {
            Ok((origin.trace_bruteforce(rows, c.tol.algebraic)?.0, origin.trace_sff(rows, c.tol.algebraic)?))
        })
        .collect::<Result<Vec<_>>>()?;
    all_traces.extend(origin_vals.iter().map(|v| v.0));
    suites.push(Suite::new(
        "variation.secvarorbit_origin",
        max(origin_vals.iter().map(|(a, b)| (a - b).abs())),
        c.tol.crosscheck,
        c.samples,
    ));

    // same, away from the origin
    let points = c.samples.min(20);
    let off = (0..points)
        .into_par_iter()
        .map(|i| -> Result<Vec<(f64, f64)>> {
            let mut rng = rng_for(c.seed, stream(5, i));
            let pt = random_point(&mut rng, space, 0.6);
            let pa = PointAnalysis::new(space, &pt)?;
            (0..3)
                .map(|_| {
                    let p = random_p(&mut rng, d);
                    let rows = random_frame_rows(&mut rng, d, p);
                    Ok((pa.trace_bruteforce(&rows, c.tol.algebraic)?.0, pa.trace_sff(&rows, c.tol.algebraic)?))
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    let off: Vec<(f64, f64)> = off.into_iter().flatten().collect();
    all_traces.extend(off.iter().map(|v| v.0));
    suites.push(Suite::new(
        "variation.secvarorbit_random_points",
        max(off.iter().map(|(a, b)| (a - b).abs())),
        c.tol.crosscheck,
        off.len(),
    ));

    if let AlgebraTag::SpinFactor(m) = tag {
        let mut err = Vec::new();
        for p in 1..m {
            for i in 0..c.samples {
                let mut rng = rng_for(c.seed, stream(6, p * c.samples + i));
                let rows = random_frame_rows(&mut rng, d, p);
                let t = origin.trace_bruteforce(&rows, c.tol.algebraic)?.0;
                all_traces.push(t);
                err.push((t + (p * (m - p)) as f64).abs());
            }
        }
        let n = err.len();
        suites.push(Suite::new("variation.sphere_exact", max(err), c.tol.crosscheck, n));
    } else {
        let closed: Vec<(f64, f64)> = origin_rows
            .iter()
            .zip(&origin_vals)
            .map(|(rows, (_, sff))| Ok((*sff, -variation::j_norms2(space, rows)?.iter().sum::<f64>())))
            .collect::<Result<_>>()?;
        let residual = max(closed.iter().map(|(a, b)| (a - b).abs()));
        // the identity fails for generic frames of the octonionic plane
        if tag == AlgebraTag::O && space.n() == 2 {
            suites.push(
                Suite::new("variation.closed_j_random_frames", residual, c.tol.crosscheck, closed.len())
                    .informational()
                    .detail("known divergence on the octonionic plane; see the adapted-frame suite"),
            );
        } else {
            suites.push(Suite::new("variation.closed_j", residual, c.tol.crosscheck, closed.len()));
        }

        let mut zero = Vec::new();
        let mut closed_inv = Vec::new();
        for i in 0..c.samples.min(20) {
            let mut rng = rng_for(c.seed, stream(7, i));
            let rows = invariant_rows(&mut rng, space)?;
            let t = origin.trace_bruteforce(&rows, c.tol.algebraic)?.0;
            let sff = origin.trace_sff(&rows, c.tol.algebraic)?;
            let cj = -variation::j_norms2(space, &rows)?.iter().sum::<f64>();
            let frame = space.frame_from_orthonormal(&space.origin(), &rows, c.tol.algebraic)?;
            let class = variation::classify_frame(space, &frame, c.tol.crosscheck)?;
            let penalty = if class.failing.is_empty() { 0.0 } else { f64::INFINITY };
            zero.push(t.abs().max(penalty));
            closed_inv.push((sff - cj).abs());
        }
        let n = zero.len();
        if tag == AlgebraTag::O && space.n() == 2 {
            suites.push(Suite::new("variation.closed_j_adapted_frames", max(closed_inv), c.tol.crosscheck, n));
        }
        suites.push(Suite::new("variation.j_invariant_frames_zero", max(zero), c.tol.crosscheck, n));
    }

    // flow oracle
    let flows = c.samples.min(10);
    let flow_cfg = FlowConfig {
        tol: c.tol.flow,
        ..FlowConfig::default()
    };
    let flow_err = (0..flows)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut rng = rng_for(c.seed, stream(8, i));
            let pt = random_point(&mut rng, space, 0.4);
            let p = random_p(&mut rng, d);
            let rows = random_frame_rows(&mut rng, d, p);
            let frame = space.frame_from_orthonormal(&pt, &rows, c.tol.algebraic)?;
            let field = FieldHandle::Gradient(gaussian_vector(&mut rng, space.ambient_dim()));
            let exact = variation::second_variation(space, &frame, &field)?;
            let oracle = variation::flow_oracle(space, &frame, &field, flow_cfg)?;
            Ok((exact - oracle).abs())
        })
        .collect::<Result<Vec<_>>>()?;
    suites.push(Suite::new("variation.flow_oracle", max(flow_err), c.tol.flow, flows));

    let n = all_traces.len();
    suites.push(Suite::new(
        "variation.nonpositive_trace",
        max(all_traces.iter().map(|t| t.max(0.0))),
        c.tol.crosscheck,
        n,
    ));
    Ok(suites)
}

fn combination<R: Rng>(rng: &mut R, basis: &DerivationBasis) -> DMatrix<f64> {
    let coeffs = gaussian_vector(rng, basis.dim());
    let k = basis.elements[0].nrows();
    basis
        .elements
        .iter()
        .zip(coeffs.iter())
        .fold(DMatrix::zeros(k, k), |acc, (e, c)| acc + e * *c)
}

fn symmetry_suites(c: &Ctx) -> Result<Vec<Suite>> {
    let space = c.space;
    let d = space.dim();
    let size = space.ambient().n();
    let mut suites = Vec::new();
    let basis = symmetry::derivation_basis(c.tag(), size)?;
    let expected = symmetry::expected_dimension(c.tag(), size);
    let dim_err = match expected {
        Some(e) => (basis.dim() as f64 - e as f64).abs(),
        None => f64::NAN,
    };
    suites.push(
        Suite::new("symmetry.derivation_dimension", dim_err, 0.0, 1)
            .detail(format!("computed {}, expected {:?}", basis.dim(), expected)),
    );
    suites.push(Suite::new(
        "symmetry.singular_value_gap",
        1.0 / basis.singular_value_gap,
        1.0 / MIN_DERIVATION_GAP,
        1,
    ));
    suites.push(Suite::new("symmetry.bracket_closure", basis.bracket_closure_residual(), BRACKET_TOL, 1));
    if basis.dim() == 0 {
        return Ok(suites);
    }

    let split = symmetry::isotropy_split(space, &basis, &space.origin())?;
    let (kk, km, mm) = split.symmetric_pair_residuals();
    suites.push(
        Suite::new("symmetry.symmetric_pair", kk.max(km).max(mm), BRACKET_TOL, 1).detail(format!(
            "dim k = {}, dim m = {}",
            split.isotropy.len(),
            split.complement.len()
        )),
    );
    let scale = split.isometry_scale()?;

    let points = c.samples.min(10);
    let per_point = (0..points)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64, f64)> {
            let mut rng = rng_for(c.seed, stream(9, i));
            let pt = random_point(&mut rng, space, 0.6);
            let pa = PointAnalysis::new(space, &pt)?;
            let p = random_p(&mut rng, d);
            let rows = random_frame_rows(&mut rng, d, p);
            let killing = basis
                .elements
                .iter()
                .map(|k| Ok(pa.second_variation(&FieldHandle::Killing(k.clone()), &rows, c.tol.algebraic)?.abs()))
                .collect::<Result<Vec<f64>>>()?;
            let u = gaussian_vector(&mut rng, space.ambient_dim());
            let rec = symmetry::reconstruct_projected_field(space, &basis, scale, &u, &pt)?;
            let proj = space.project_coords(&pt, &u)?;
            let local = symmetry::isotropy_split(space, &basis, &pt)?;
            let conn = local
                .complement
                .iter()
                .flat_map(|a| local.complement.iter().map(move |b| (a, b)))
                .map(|(a, b)| symmetry::connection_bracket_residual(space, a, b, &pt))
                .collect::<Result<Vec<f64>>>()?;
            Ok((max(killing), (rec.ambient - proj.ambient).norm(), max(conn)))
        })
        .collect::<Result<Vec<_>>>()?;
    suites.push(Suite::new(
        "symmetry.killing_neutrality",
        max(per_point.iter().map(|v| v.0)),
        KILLING_TOL,
        points * basis.dim(),
    ));
    suites.push(Suite::new(
        "symmetry.projected_field_reconstruction",
        max(per_point.iter().map(|v| v.1)),
        c.tol.crosscheck,
        points,
    ));
    suites.push(Suite::new(
        "symmetry.connection_bracket",
        max(per_point.iter().map(|v| v.2)),
        c.tol.crosscheck,
        points,
    ));

    let origin = PointAnalysis::new(space, &space.origin())?;
    let rot = (0..points)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut rng = rng_for(c.seed, stream(10, i));
            let g = symmetry::one_parameter_group(&combination(&mut rng, &basis), 0.3);
            let p = random_p(&mut rng, d);
            let rows = random_frame_rows(&mut rng, d, p);
            let frame = space.frame_from_orthonormal(&space.origin(), &rows, c.tol.algebraic)?;
            let moved = symmetry::transform_frame(space, &g, &frame, 1e-8)?;
            let before = origin.trace_bruteforce(&rows, c.tol.algebraic)?.0;
            let after = variation::trace_secvar_bruteforce(space, &moved)?.0;
            Ok((before - after).abs())
        })
        .collect::<Result<Vec<_>>>()?;
    suites.push(Suite::new("symmetry.rotation_invariance", max(rot), c.tol.crosscheck, points));
    Ok(suites)
}

pub fn run(space: &ProjectiveSpace, seed: u64, samples: usize, tol: Tolerances) -> Result<VerifyReport> {
    let c = Ctx {
        space,
        seed,
        samples,
        tol,
    };
    let mut suites = Vec::new();
    if !c.tag().is_spin_factor() {
        suites.extend(algebra_suites(&c)?);
    }
    suites.extend(jordan_suites(&c)?);
    suites.extend(calculus_suites(&c)?);
    let mut traces = Vec::new();
    suites.extend(variation_suites(&c, &mut traces)?);
    suites.extend(symmetry_suites(&c)?);
    let passed = suites.iter().all(|s| s.passed || s.informational);
    let (algebra, m) = match space.tag() {
        AlgebraTag::SpinFactor(m) => ("Rm".to_string(), Some(m)),
        t => (t.name().to_string(), None),
    };
    Ok(VerifyReport {
        algebra,
        m,
        n: space.n(),
        seed,
        samples,
        tolerances: tol,
        suites,
        passed,
    })
}
