//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Modified Gram–Schmidt on the columns of `a`, in column order.
///
/// Returns `(q, c)` with `q` having orthonormal columns and `q = a · c`
/// (`c` upper triangular). Fails if a column is dependent on its
/// predecessors to relative tolerance `tol`.
pub fn gram_schmidt(a: &DMatrix<f64>, tol: f64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (rows, cols) = a.shape();
    let mut q = DMatrix::zeros(rows, cols);
    let mut c = DMatrix::<f64>::identity(cols, cols);
    for j in 0..cols {
        let mut v = a.column(j).into_owned();
        let scale = v.norm();
        for i in 0..j {
            let qi = q.column(i);
            let r = qi.dot(&v);
            v.axpy(-r, &qi, 1.0);
            // column j of c accumulates a-coefficients of q_j
            for k in 0..cols {
                let t = c[(k, i)];
                c[(k, j)] -= r * t;
            }
        }
        let norm = v.norm();
        if !(norm > tol * scale.max(f64::MIN_POSITIVE)) {
            return Err(Error::NonOrthonormal(norm));
        }
        q.set_column(j, &(v / norm));
        for k in 0..cols {
            c[(k, j)] /= norm;
        }
    }
    Ok((q, c))
}

/// Orthonormalise the rows of `a` in order.
pub fn orthonormalize_rows(a: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    Ok(gram_schmidt(&a.transpose(), tol)?.0.transpose())
}

/// Extend the orthonormal columns of `q` to an orthonormal basis of the
/// whole space by sweeping the standard basis vectors in order; returns
/// only the added columns.
pub fn orthonormal_complement(q: &DMatrix<f64>) -> DMatrix<f64> {
    let (rows, k) = q.shape();
    let mut basis: Vec<DVector<f64>> = q.column_iter().map(|c| c.into_owned()).collect();
    let mut added = Vec::with_capacity(rows - k);
    for e in 0..rows {
        if added.len() == rows - k {
            break;
        }
        let mut v = DVector::zeros(rows);
        v[e] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let r = b.dot(&v);
                v.axpy(-r, b, 1.0);
            }
        }
        let n = v.norm();
        if n > 0.3 {
            let v = v / n;
            basis.push(v.clone());
            added.push(v);
        }
    }
    if added.is_empty() {
        return DMatrix::zeros(rows, 0);
    }
    DMatrix::from_columns(&added)
}

/// Largest deviation of `q^T q` from the identity.
pub fn orthonormality_residual(q: &DMatrix<f64>) -> f64 {
    let g = q.transpose() * q;
    let n = g.nrows();
    (g - DMatrix::<f64>::identity(n, n)).amax()
}

/// Deterministic pairwise summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => {
            let (l, r) = xs.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

/// Result of a rank-revealing null-space computation.
#[derive(Clone, Debug)]
pub struct NullSpace {
    /// Orthonormal null vectors as columns.
    pub basis: DMatrix<f64>,
    /// Singular values in decreasing order.
    pub singular_values: Vec<f64>,
    /// `σ_last_kept / σ_first_dropped`; infinite when nothing is dropped.
    pub gap_ratio: f64,
}

/// Null space of `a` with cutoff `rel_cutoff · σ_max`.
///
/// Tall systems are reduced by a QR factorisation first, then the SVD of
/// the triangular factor is taken.
pub fn null_space(a: &DMatrix<f64>, rel_cutoff: f64) -> NullSpace {
    let cols = a.ncols();
    let r = if a.nrows() > cols {
        a.clone().qr().r()
    } else {
        let mut padded = DMatrix::zeros(cols, cols);
        padded.view_mut((0, 0), a.shape()).copy_from(a);
        padded
    };
    let svd = r.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let smax = sv.first().copied().unwrap_or(0.0);
    let cutoff = rel_cutoff * smax;
    let rank = sv.iter().filter(|&&s| s > cutoff).count();
    let gap_ratio = if rank == cols {
        f64::INFINITY
    } else if rank == 0 {
        0.0
    } else {
        sv[rank - 1] / sv[rank].max(f64::MIN_POSITIVE)
    };
    let null: Vec<DVector<f64>> = order[rank..]
        .iter()
        .map(|&i| v_t.row(i).transpose())
        .collect();
    let basis = if null.is_empty() {
        DMatrix::zeros(cols, 0)
    } else {
        DMatrix::from_columns(&null)
    };
    NullSpace {
        basis,
        singular_values: sv,
        gap_ratio,
    }
}
