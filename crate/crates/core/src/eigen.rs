//! Dense Hermitian eigendecomposition: complex Householder reduction to a
//! real symmetric tridiagonal, then implicit QL with Wilkinson shifts.
//!
//! Every spectral quantity in this crate runs through here. Eigenvalues
//! come back ascending with orthonormal eigenvector columns; accuracy is
//! on the order of machine epsilon times the matrix norm, including for
//! clustered eigenvalues.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{NonfreeError, Result};

/// Eigenvalues (ascending) and matching eigenvector columns of a Hermitian
/// matrix.
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

/// Full eigendecomposition. The input is taken as exactly Hermitian; only
/// its Hermitian part influences the result.
pub fn hermitian_eigen(a: &DMatrix<Complex64>) -> Result<HermitianEigen> {
    decompose(a, true).map(|(values, vectors)| HermitianEigen {
        values,
        vectors: vectors.expect("vectors requested"),
    })
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(a: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    decompose(a, false).map(|(values, _)| values)
}

fn decompose(
    a: &DMatrix<Complex64>,
    want_vectors: bool,
) -> Result<(Vec<f64>, Option<DMatrix<Complex64>>)> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigendecomposition needs a square matrix");
    if n == 0 {
        return Ok((Vec::new(), want_vectors.then(|| DMatrix::identity(0, 0))));
    }
    if n == 1 {
        return Ok((
            vec![a[(0, 0)].re],
            want_vectors.then(|| DMatrix::identity(1, 1)),
        ));
    }

    let mut work = a.clone();
    let mut transform = want_vectors.then(|| DMatrix::<Complex64>::identity(n, n));

    // Householder reduction to Hermitian tridiagonal form.
    for k in 0..n.saturating_sub(2) {
        let norm_sq: f64 = (k + 1..n).map(|i| work[(i, k)].norm_sqr()).sum();
        let norm = norm_sq.sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = work[(k + 1, k)];
        let phase = if x0 == Complex64::from(0.0) {
            Complex64::from(1.0)
        } else {
            x0 / Complex64::from(x0.norm())
        };
        let alpha = -phase * Complex64::from(norm);
        let mut v = DVector::from_element(n, Complex64::from(0.0));
        v[k + 1] = x0 - alpha;
        for i in k + 2..n {
            v[i] = work[(i, k)];
        }
        let vnorm_sq = v.norm_squared();
        if vnorm_sq == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm_sq;

        // Two-sided rank-2 update: A <- A - v w* - w v* with
        // w = tau A v - (tau/2)(v* tau A v) v.
        let p = (&work * &v) * Complex64::from(tau);
        let coupling = (v.adjoint() * &p)[(0, 0)] * Complex64::from(0.5 * tau);
        let w = &p - &v * coupling;
        work -= &v * w.adjoint() + &w * v.adjoint();

        if let Some(q) = transform.as_mut() {
            let qv = &*q * &v;
            *q -= qv * (v.adjoint() * Complex64::from(tau));
        }
    }

    // Realify the subdiagonal with a diagonal phase and run QL.
    let mut diag: Vec<f64> = (0..n).map(|i| work[(i, i)].re).collect();
    let mut off = vec![0.0f64; n];
    let mut chain = Complex64::from(1.0);
    let mut phases = vec![Complex64::from(1.0); n];
    for k in 0..n - 1 {
        let sub = work[(k + 1, k)];
        let mag = sub.norm();
        if mag > 0.0 {
            chain *= sub / Complex64::from(mag);
        }
        phases[k + 1] = chain;
        off[k] = mag;
    }
    if let Some(q) = transform.as_mut() {
        for (j, phase) in phases.iter().enumerate() {
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
    }

    tridiagonal_ql(&mut diag, &mut off, transform.as_mut())?;

    // Ascending order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("finite eigenvalues"));
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vectors = transform.map(|q| {
        let mut sorted = DMatrix::from_element(n, n, Complex64::from(0.0));
        for (dst, &src) in order.iter().enumerate() {
            sorted.set_column(dst, &q.column(src));
        }
        sorted
    });
    Ok((values, vectors))
}

/// Implicit QL with Wilkinson shifts on a real symmetric tridiagonal
/// (`diag`, subdiagonal `off`; `off[i]` couples `i` and `i+1`). Rotations
/// accumulate into the columns of `z` when present.
fn tridiagonal_ql(
    diag: &mut [f64],
    off: &mut [f64],
    mut z: Option<&mut DMatrix<Complex64>>,
) -> Result<()> {
    let n = diag.len();
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let scale = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * scale {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 50 {
                return Err(NonfreeError::Numerical(
                    "tridiagonal QL iteration failed to converge".into(),
                ));
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let mut s = 1.0f64;
            let mut c = 1.0f64;
            let mut p = 0.0f64;
            let mut aborted = false;
            for i in (l..m).rev() {
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    aborted = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                if let Some(q) = z.as_mut() {
                    for k in 0..q.nrows() {
                        let right = q[(k, i + 1)];
                        let left = q[(k, i)];
                        q[(k, i + 1)] = left * Complex64::from(s) + right * Complex64::from(c);
                        q[(k, i)] = left * Complex64::from(c) - right * Complex64::from(s);
                    }
                }
            }
            if aborted {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}
