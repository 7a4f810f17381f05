//! Dense linear-algebra helpers: complex eigendecompositions via Schur,
//! generalized symmetric eigenproblems, Lyapunov solves, and matrix functions.

use crate::error::{Error, Result};
use crate::{C64, CMatrix, CVector, RMatrix};
use nalgebra::SymmetricEigen;

/// Full eigendecomposition of a general complex matrix.
#[derive(Debug, Clone)]
pub struct ComplexEigen {
    pub values: Vec<C64>,
    /// Right eigenvectors as columns, unit 2-norm.
    pub vectors: CMatrix,
    /// max_i ||A x_i - λ_i x_i||_2 (unit eigenvectors)
    pub max_residual: f64,
    /// 2-norm condition estimate of the eigenvector matrix.
    pub vector_condition: f64,
}

/// Eigendecomposition by complex Schur factorization plus back-substitution
/// for the eigenvectors of the triangular factor. Near-degenerate diagonal
/// gaps are guarded; residuals are reported so callers can detect defective
/// clusters.
pub fn complex_eigen(a: &CMatrix) -> Result<ComplexEigen> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let schur = a
        .clone()
        .try_schur(1e-14, 100_000)
        .ok_or_else(|| Error::EigenFailure("complex Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let mut vectors = CMatrix::zeros(n, n);
    let values: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let scale = a.norm().max(1.0);
    for i in 0..n {
        let li = values[i];
        let mut z = CVector::zeros(n);
        z[i] = C64::new(1.0, 0.0);
        for j in (0..i).rev() {
            let mut s = C64::new(0.0, 0.0);
            for k in (j + 1)..=i {
                s += t[(j, k)] * z[k];
            }
            let mut d = t[(j, j)] - li;
            // LAPACK-style small-pivot guard: perturb exactly coincident
            // diagonal entries so the back-substitution stays finite.
            let floor = 1e-15 * scale;
            if d.norm() < floor {
                d = C64::new(floor, 0.0);
            }
            z[j] = -s / d;
        }
        let x = &q * z;
        let nrm = x.norm();
        vectors.set_column(i, &(x / C64::new(nrm, 0.0)));
    }
    let mut max_residual = 0.0f64;
    for i in 0..n {
        let x = vectors.column(i);
        let r = (a * x - x * values[i]).norm();
        max_residual = max_residual.max(r);
    }
    let vector_condition = condition_estimate(&vectors);
    Ok(ComplexEigen {
        values,
        vectors,
        max_residual,
        vector_condition,
    })
}

/// 2-norm condition number via singular values.
pub fn condition_estimate(m: &CMatrix) -> f64 {
    let sv = m.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if smin <= 0.0 { f64::INFINITY } else { smax / smin }
}

/// Largest singular value (operator 2-norm) of a complex matrix.
pub fn operator_norm(m: &CMatrix) -> f64 {
    m.clone().singular_values().max()
}

/// Eigenvalues and eigenvectors of a real symmetric matrix, ascending.
pub fn sym_eigen_sorted(a: &RMatrix) -> (Vec<f64>, RMatrix) {
    let n = a.nrows();
    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = RMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// f(A) for symmetric A through its eigendecomposition.
pub fn sym_matrix_function(a: &RMatrix, f: impl Fn(f64) -> f64) -> RMatrix {
    let (vals, vecs) = sym_eigen_sorted(a);
    let d = RMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&x| f(x)),
    ));
    &vecs * d * vecs.transpose()
}

/// Smallest and largest eigenvalues of the generalized symmetric problem
/// A x = λ M x with M symmetric positive definite (Cholesky reduction).
pub fn generalized_sym_eigen_extrema(a: &RMatrix, m: &RMatrix) -> Result<(f64, f64)> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::SingularSystem("mass matrix not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::SingularSystem("Cholesky factor not invertible".into()))?;
    let reduced = &linv * a * linv.transpose();
    let sym = (&reduced + reduced.transpose()) * 0.5;
    let (vals, _) = sym_eigen_sorted(&sym);
    Ok((vals[0], *vals.last().unwrap()))
}

/// Solve the stationary Lyapunov equation  Bᴴ G + G B = -M  for Hermitian
/// M ⪰ 0, assuming all eigenvalues of B have negative real part.
///
/// Diagonalization route with one step of residual refinement: with
/// B = XΛX⁻¹, the transformed unknown is G̃_ij = -(XᴴMX)_ij / (λ̄_i + λ_j).
pub fn lyapunov_solve(b: &CMatrix, m: &CMatrix) -> Result<CMatrix> {
    let eig = complex_eigen(b)?;
    for (i, lam) in eig.values.iter().enumerate() {
        if lam.re >= 0.0 {
            return Err(Error::SingularSystem(format!(
                "Lyapunov solve needs a stable matrix; eigenvalue {i} has Re = {:.3e}",
                lam.re
            )));
        }
    }
    let x = &eig.vectors;
    let xinv = x
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::SingularSystem("eigenvector matrix singular".into()))?;
    let solve_once = |rhs: &CMatrix| -> CMatrix {
        let mt = x.adjoint() * rhs * x;
        let n = b.nrows();
        let mut gt = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                gt[(i, j)] = -mt[(i, j)] / (eig.values[i].conj() + eig.values[j]);
            }
        }
        xinv.adjoint() * gt * &xinv
    };
    let mut g = solve_once(m);
    // one refinement pass mops up conditioning loss in X
    for _ in 0..2 {
        let resid = b.adjoint() * &g + &g * b + m;
        if resid.norm() <= 1e-13 * m.norm().max(1.0) {
            break;
        }
        g += solve_once(&resid);
    }
    // enforce exact Hermitian symmetry
    let g = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    Ok(g)
}

/// Orthonormal basis of the orthogonal complement of the column span of `cols`
/// (columns assumed orthonormal), via modified Gram-Schmidt over the identity.
pub fn orthonormal_complement(cols: &RMatrix) -> RMatrix {
    let n = cols.nrows();
    let k = cols.ncols();
    let mut basis: Vec<nalgebra::DVector<f64>> =
        (0..k).map(|j| cols.column(j).clone_owned()).collect();
    for i in 0..n {
        let mut v = nalgebra::DVector::zeros(n);
        v[i] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&v);
                v -= b * c;
            }
        }
        let nrm = v.norm();
        if nrm > 1e-8 {
            basis.push(v / nrm);
        }
        if basis.len() == n {
            break;
        }
    }
    assert_eq!(basis.len(), n, "complement construction lost rank");
    let mut out = RMatrix::zeros(n, n - k);
    for (j, b) in basis[k..].iter().enumerate() {
        out.set_column(j, b);
    }
    out
}

/// Promote a real matrix to complex.
pub fn to_complex(a: &RMatrix) -> CMatrix {
    a.map(|x| C64::new(x, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn test_matrix(n: usize, r: f64) -> CMatrix {
        let mut l = RMatrix::zeros(n, n);
        let mut v = RMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                l[(i, j)] = -0.05 * (((i * 7 + j * 13) % 19) as f64 / 19.0);
            }
        }
        let lt = l.transpose();
        l = (&l + &lt) * 0.5 - RMatrix::identity(n, n) * 2.0;
        for i in 0..n - 1 {
            v[(i, i + 1)] = ((i + 1) as f64).sqrt();
            v[(i + 1, i)] = v[(i, i + 1)];
        }
        to_complex(&l) + v.map(|x| C64::new(0.0, -r * x))
    }

    #[test]
    fn complex_eigen_reconstructs() {
        let b = test_matrix(24, 1.3);
        let eig = complex_eigen(&b).unwrap();
        assert!(eig.max_residual < 1e-10 * b.norm());
        // trace check
        let tr_direct: C64 = (0..24).map(|i| b[(i, i)]).sum();
        let tr_eig: C64 = eig.values.iter().sum();
        assert_relative_eq!(tr_direct.re, tr_eig.re, epsilon = 1e-10);
        assert_relative_eq!(tr_direct.im, tr_eig.im, epsilon = 1e-10);
    }

    #[test]
    fn lyapunov_residual_small() {
        let b = test_matrix(16, 0.7);
        let m = CMatrix::identity(16, 16);
        let g = lyapunov_solve(&b, &m).unwrap();
        let resid = b.adjoint() * &g + &g * &b + &m;
        assert!(resid.norm() < 1e-11 * g.norm().max(1.0));
    }

    #[test]
    fn generalized_eigen_matches_plain_for_identity_mass() {
        let b = test_matrix(10, 0.0);
        let a = b.map(|z| -z.re); // SPD-ish
        let m = RMatrix::identity(10, 10);
        let (lo, hi) = generalized_sym_eigen_extrema(&a, &m).unwrap();
        let (vals, _) = sym_eigen_sorted(&a);
        assert_relative_eq!(lo, vals[0], epsilon = 1e-10);
        assert_relative_eq!(hi, *vals.last().unwrap(), epsilon = 1e-10);
    }

    #[test]
    fn complement_spans_orthogonally() {
        let mut cols = RMatrix::zeros(7, 2);
        cols[(0, 0)] = 1.0;
        cols[(3, 1)] = 1.0;
        let q = orthonormal_complement(&cols);
        assert_eq!(q.ncols(), 5);
        let should_be_zero = cols.transpose() * &q;
        assert!(should_be_zero.norm() < 1e-12);
        let gram = q.transpose() * &q;
        assert!((gram - RMatrix::identity(5, 5)).norm() < 1e-12);
    }
}
