//! Orthonormal Hermite velocity basis, its quadrature grid, the kernel
//! vectors of the linearized collision operator, and the elementary
//! multiplication/projection matrices built on top of them.
//!
//! Basis functions are φ_α(v) = p_α(v) μ^{1/2}(v) with p_α a product of
//! normalized probabilists' Hermite polynomials and μ the unit Maxwellian
//! (2π)^{-d/2} e^{-|v|^2/2}; they are orthonormal in plain L²(dv). Total
//! degree is truncated at N and multi-indices are ordered graded-lex, so the
//! layout is deterministic and rotation-closed.

use crate::error::{Error, Result};
use crate::quadrature::VelocityGrid;
use crate::{RMatrix, RVector};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Serializable basis metadata.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BasisMeta {
    pub dim_v: usize,
    pub max_degree: usize,
    pub quad_order: usize,
    pub index_set: Vec<Vec<usize>>,
}

/// Orthonormal Hermite velocity basis with its tensor Gauss-Hermite grid.
#[derive(Debug, Clone)]
pub struct HermiteBasis {
    pub dim_v: usize,
    pub max_degree: usize,
    pub quad_order: usize,
    /// multi-indices α with |α| ≤ N, graded lexicographic
    pub index_set: Vec<Vec<usize>>,
    index_map: HashMap<Vec<usize>, usize>,
    pub grid: VelocityGrid,
    /// p_α evaluated at every grid node, flat layout [node * size + α]
    node_vals: Vec<f64>,
}

/// All multi-indices with |α| ≤ max_degree in graded lexicographic order.
pub fn graded_lex_indices(dim: usize, max_degree: usize) -> Vec<Vec<usize>> {
    fn compositions(dim: usize, total: usize, out: &mut Vec<Vec<usize>>, prefix: &mut Vec<usize>) {
        if dim == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for head in (0..=total).rev() {
            prefix.push(head);
            compositions(dim - 1, total - head, out, prefix);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for degree in 0..=max_degree {
        let mut level = Vec::new();
        compositions(dim, degree, &mut level, &mut Vec::new());
        level.sort();
        out.extend(level);
    }
    out
}

/// Values of the normalized probabilists' Hermite polynomials He_k/sqrt(k!)
/// for k = 0..=nmax at the point x.
pub fn hermite_values(x: f64, nmax: usize) -> Vec<f64> {
    let mut h = Vec::with_capacity(nmax + 1);
    h.push(1.0);
    if nmax >= 1 {
        h.push(x);
    }
    for k in 1..nmax {
        let next = (x * h[k] - (k as f64).sqrt() * h[k - 1]) / ((k + 1) as f64).sqrt();
        h.push(next);
    }
    h
}

/// μ^{1/2}(v) for the unit Maxwellian.
pub fn mu_half(v: &RVector) -> f64 {
    let d = v.len() as f64;
    (2.0 * std::f64::consts::PI).powf(-d / 4.0) * (-v.norm_squared() / 4.0).exp()
}

/// Build the basis. Kernel vectors need degree 2, so N ≥ 2 is required, and
/// the Gram of the basis is exact only for quad_order ≥ N + 1.
pub fn build_basis(dim_v: usize, max_degree: usize, quad_order: usize) -> Result<HermiteBasis> {
    if dim_v < 1 {
        return Err(Error::InvalidParameter("dim_v must be ≥ 1".into()));
    }
    if max_degree < 2 {
        return Err(Error::InvalidParameter(
            "max_degree must be ≥ 2 (kernel vectors are quadratic)".into(),
        ));
    }
    if quad_order < max_degree + 1 {
        return Err(Error::InvalidParameter(format!(
            "quad_order {quad_order} too small; need ≥ max_degree + 1 = {}",
            max_degree + 1
        )));
    }
    let index_set = graded_lex_indices(dim_v, max_degree);
    let index_map = index_set
        .iter()
        .enumerate()
        .map(|(i, a)| (a.clone(), i))
        .collect();
    let grid = VelocityGrid::new(dim_v, quad_order);
    let mut basis = HermiteBasis {
        dim_v,
        max_degree,
        quad_order,
        index_set,
        index_map,
        grid,
        node_vals: Vec::new(),
    };
    let size = basis.len();
    let mut node_vals = Vec::with_capacity(basis.grid.len() * size);
    for node in &basis.grid.nodes {
        let vals = basis.eval_poly_all(node);
        node_vals.extend(vals.iter());
    }
    basis.node_vals = node_vals;
    Ok(basis)
}

impl HermiteBasis {
    pub fn len(&self) -> usize {
        self.index_set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_set.is_empty()
    }

    pub fn meta(&self) -> BasisMeta {
        BasisMeta {
            dim_v: self.dim_v,
            max_degree: self.max_degree,
            quad_order: self.quad_order,
            index_set: self.index_set.clone(),
        }
    }

    pub fn index_of(&self, alpha: &[usize]) -> Option<usize> {
        self.index_map.get(alpha).copied()
    }

    /// p_α(v) for every α, as a vector.
    pub fn eval_poly_all(&self, v: &RVector) -> RVector {
        let tables: Vec<Vec<f64>> = (0..self.dim_v)
            .map(|ax| hermite_values(v[ax], self.max_degree))
            .collect();
        RVector::from_iterator(
            self.len(),
            self.index_set.iter().map(|alpha| {
                alpha
                    .iter()
                    .enumerate()
                    .map(|(ax, &k)| tables[ax][k])
                    .product::<f64>()
            }),
        )
    }

    /// p_α(v) together with all partial derivatives ∂p_α/∂v_i
    /// (∂/∂x of He_k/sqrt(k!) is sqrt(k) He_{k-1}/sqrt((k-1)!)).
    pub fn eval_poly_and_grad(&self, v: &RVector) -> (RVector, Vec<RVector>) {
        let tables: Vec<Vec<f64>> = (0..self.dim_v)
            .map(|ax| hermite_values(v[ax], self.max_degree))
            .collect();
        let vals = RVector::from_iterator(
            self.len(),
            self.index_set.iter().map(|alpha| {
                alpha
                    .iter()
                    .enumerate()
                    .map(|(ax, &k)| tables[ax][k])
                    .product::<f64>()
            }),
        );
        let mut grads = Vec::with_capacity(self.dim_v);
        for di in 0..self.dim_v {
            let g = RVector::from_iterator(
                self.len(),
                self.index_set.iter().map(|alpha| {
                    if alpha[di] == 0 {
                        return 0.0;
                    }
                    let mut prod = (alpha[di] as f64).sqrt();
                    for (ax, &k) in alpha.iter().enumerate() {
                        let kk = if ax == di { k - 1 } else { k };
                        prod *= tables[ax][kk];
                    }
                    prod
                }),
            );
            grads.push(g);
        }
        (vals, grads)
    }

    /// Cached p values at grid node `q` (slice of length `self.len()`).
    pub fn node_poly(&self, q: usize) -> &[f64] {
        let n = self.len();
        &self.node_vals[q * n..(q + 1) * n]
    }

    /// Gram matrix of {φ_α} under the grid quadrature (identity up to
    /// quadrature exactness).
    pub fn gram(&self) -> RMatrix {
        let n = self.len();
        let norm = (2.0 * std::f64::consts::PI).powf(-(self.dim_v as f64) / 2.0);
        let mut g = RMatrix::zeros(n, n);
        for (q, &w) in self.grid.weights.iter().enumerate() {
            let p = self.node_poly(q);
            for a in 0..n {
                let wa = w * p[a];
                for b in a..n {
                    g[(a, b)] += wa * p[b];
                }
            }
        }
        for a in 0..n {
            for b in 0..a {
                g[(a, b)] = g[(b, a)];
            }
        }
        g * norm
    }

    /// Coefficients of the function q(v) μ^{1/2}(v) in the basis, by grid
    /// quadrature of the inner products (exact for polynomial q of degree
    /// ≤ quad_order - 1 - max_degree).
    pub fn project_weighted(&self, q_part: impl Fn(&RVector) -> f64) -> RVector {
        let n = self.len();
        let norm = (2.0 * std::f64::consts::PI).powf(-(self.dim_v as f64) / 2.0);
        let mut c = RVector::zeros(n);
        for (q, &w) in self.grid.weights.iter().enumerate() {
            let p = self.node_poly(q);
            let f = q_part(&self.grid.nodes[q]) * w;
            for a in 0..n {
                c[a] += f * p[a];
            }
        }
        c * norm
    }
}

/// Reusable no-allocation evaluator of all p_α at a point; the workhorse of
/// the collision quadrature loops.
pub struct PolyEvaluator<'a> {
    basis: &'a HermiteBasis,
    /// per-axis Hermite value tables, flat [axis * (N+1) + k]
    tables: Vec<f64>,
}

impl<'a> PolyEvaluator<'a> {
    pub fn new(basis: &'a HermiteBasis) -> Self {
        PolyEvaluator {
            basis,
            tables: vec![0.0; basis.dim_v * (basis.max_degree + 1)],
        }
    }

    fn fill_tables(&mut self, v: &[f64]) {
        let nmax = self.basis.max_degree;
        for (ax, &x) in v.iter().enumerate() {
            let t = &mut self.tables[ax * (nmax + 1)..(ax + 1) * (nmax + 1)];
            t[0] = 1.0;
            if nmax >= 1 {
                t[1] = x;
            }
            for k in 1..nmax {
                t[k + 1] = (x * t[k] - (k as f64).sqrt() * t[k - 1]) / ((k + 1) as f64).sqrt();
            }
        }
    }

    /// Write p_α(v) for every α into `out` (length = basis.len()).
    pub fn eval(&mut self, v: &[f64], out: &mut [f64]) {
        self.fill_tables(v);
        let nmax = self.basis.max_degree;
        for (slot, alpha) in out.iter_mut().zip(&self.basis.index_set) {
            let mut prod = 1.0;
            for (ax, &k) in alpha.iter().enumerate() {
                prod *= self.tables[ax * (nmax + 1) + k];
            }
            *slot = prod;
        }
    }

    /// Values plus all partials; `grad` is flat [axis * n + α].
    pub fn eval_with_grad(&mut self, v: &[f64], out: &mut [f64], grad: &mut [f64]) {
        self.fill_tables(v);
        let nmax = self.basis.max_degree;
        let n = self.basis.len();
        for (a, alpha) in self.basis.index_set.iter().enumerate() {
            let mut prod = 1.0;
            for (ax, &k) in alpha.iter().enumerate() {
                prod *= self.tables[ax * (nmax + 1) + k];
            }
            out[a] = prod;
            for (di, &kd) in alpha.iter().enumerate() {
                grad[di * n + a] = if kd == 0 {
                    0.0
                } else {
                    let mut g = (kd as f64).sqrt();
                    for (ax, &k) in alpha.iter().enumerate() {
                        let kk = if ax == di { k - 1 } else { k };
                        g *= self.tables[ax * (nmax + 1) + kk];
                    }
                    g
                };
            }
        }
    }
}

/// Exact expansions of the d+2 collision invariants in the basis:
/// ψ_0 = μ^{1/2}, ψ_i = v_i μ^{1/2}, ψ_{d+1} = (|v|^2 - d) μ^{1/2} / sqrt(2d).
#[derive(Debug, Clone)]
pub struct KernelVectors {
    /// n × (d+2), orthonormal columns
    pub columns: RMatrix,
}

pub fn kernel_vectors(basis: &HermiteBasis) -> KernelVectors {
    let d = basis.dim_v;
    let n = basis.len();
    let mut cols = RMatrix::zeros(n, d + 2);
    let zero = vec![0usize; d];
    cols[(basis.index_of(&zero).unwrap(), 0)] = 1.0;
    for i in 0..d {
        let mut e = vec![0usize; d];
        e[i] = 1;
        cols[(basis.index_of(&e).unwrap(), 1 + i)] = 1.0;
    }
    // |v|^2 - d = Σ_i He_2(v_i) and φ_{2e_i} = He_2(v_i) μ^{1/2} / sqrt(2)
    for i in 0..d {
        let mut e2 = vec![0usize; d];
        e2[i] = 2;
        cols[(basis.index_of(&e2).unwrap(), d + 1)] = (1.0 / d as f64).sqrt();
    }
    KernelVectors { columns: cols }
}

impl KernelVectors {
    pub fn count(&self) -> usize {
        self.columns.ncols()
    }
}

/// Orthogonal projections onto Ker L and its complement: P0 = Ψ Ψᵀ,
/// P1 = I - P0.
pub fn projection_p0(kv: &KernelVectors) -> (RMatrix, RMatrix) {
    let p0 = &kv.columns * kv.columns.transpose();
    let p1 = RMatrix::identity(p0.nrows(), p0.ncols()) - &p0;
    (p0, p1)
}

/// Galerkin matrix of multiplication by the coordinate v_axis
/// (three-term recurrence; entries link neighbouring degrees only).
pub fn multiply_by_axis(basis: &HermiteBasis, axis: usize) -> RMatrix {
    let n = basis.len();
    let mut m = RMatrix::zeros(n, n);
    for (a, alpha) in basis.index_set.iter().enumerate() {
        let mut up = alpha.clone();
        up[axis] += 1;
        if let Some(b) = basis.index_of(&up) {
            let c = (up[axis] as f64).sqrt();
            m[(a, b)] = c;
            m[(b, a)] = c;
        }
    }
    m
}

/// Multiplication by v_1.
pub fn multiply_by_v1(basis: &HermiteBasis) -> RMatrix {
    multiply_by_axis(basis, 0)
}

/// Galerkin matrix of multiplication by ⟨v⟩^p = (1+|v|^2)^{p/2}, integrated on
/// a grid of doubled order so that the non-polynomial weight is resolved.
/// Returns the matrix and the max entry change under a further order bump
/// (a change above ~1e-8 signals an under-resolved weight).
pub fn weight_matrix_with_report(basis: &HermiteBasis, p: f64) -> (RMatrix, f64) {
    let base = weight_matrix_on(basis, p, 2 * basis.quad_order);
    let fine = weight_matrix_on(basis, p, 2 * basis.quad_order + 8);
    let delta = (&fine - &base).amax();
    (fine, delta)
}

/// Galerkin matrix of multiplication by ⟨v⟩^p (doubled-order grid).
pub fn weight_matrix(basis: &HermiteBasis, p: f64) -> RMatrix {
    weight_matrix_with_report(basis, p).0
}

fn weight_matrix_on(basis: &HermiteBasis, p: f64, order: usize) -> RMatrix {
    let n = basis.len();
    let norm = (2.0 * std::f64::consts::PI).powf(-(basis.dim_v as f64) / 2.0);
    let grid = VelocityGrid::new(basis.dim_v, order);
    let mut m = RMatrix::zeros(n, n);
    for (node, &w) in grid.nodes.iter().zip(&grid.weights) {
        let vals = basis.eval_poly_all(node);
        let weight = (1.0 + node.norm_squared()).powf(p / 2.0) * w;
        for a in 0..n {
            let wa = weight * vals[a];
            for b in a..n {
                m[(a, b)] += wa * vals[b];
            }
        }
    }
    for a in 0..n {
        for b in 0..a {
            m[(a, b)] = m[(b, a)];
        }
    }
    m * norm
}

/// The (d+2) × (d+2) matrix of (v_1 ψ_j, ψ_k): the stream operator compressed
/// onto the kernel. Block structure [[0, e1ᵀ, 0], [e1, 0, sqrt(2/d) e1],
/// [0, sqrt(2/d) e1ᵀ, 0]] with eigenvalues ±sqrt((d+2)/d) and 0 (d-fold).
pub fn reduced_stream_matrix(basis: &HermiteBasis, kv: &KernelVectors) -> RMatrix {
    let v1 = multiply_by_v1(basis);
    kv.columns.transpose() * v1 * &kv.columns
}

/// Eigenpairs of the reduced stream problem P0 (v_1 P0 φ) = η φ in closed
/// form. Returns (eta0, U) with U orthogonal, column j holding the expansion
/// of the j-th eigenfunction in kernel coordinates (ψ_0, ψ_1, …, ψ_{d+1}).
/// Ordering: j = 0 carries +sqrt((d+2)/d), j = 1 the ψ_0/ψ_{d+1} mix with
/// η = 0, j = 2..d the shear modes ψ_j, and j = d+1 carries -sqrt((d+2)/d).
pub fn stream_eigenbasis(d: usize) -> (Vec<f64>, RMatrix) {
    let k = d + 2;
    let df = d as f64;
    let eta_top = ((df + 2.0) / df).sqrt();
    let mut eta0 = vec![0.0; k];
    let mut u = RMatrix::zeros(k, k);
    let a = (df / (2.0 * (df + 2.0))).sqrt();
    let b = 1.0 / 2.0f64.sqrt();
    let c = (1.0 / (df + 2.0)).sqrt();
    eta0[0] = eta_top;
    u[(0, 0)] = a;
    u[(1, 0)] = b;
    u[(d + 1, 0)] = c;
    eta0[1] = 0.0;
    u[(0, 1)] = -(2.0 / (df + 2.0)).sqrt();
    u[(d + 1, 1)] = (df / (df + 2.0)).sqrt();
    for j in 2..=d {
        eta0[j] = 0.0;
        u[(j, j)] = 1.0;
    }
    eta0[d + 1] = -eta_top;
    u[(0, d + 1)] = a;
    u[(1, d + 1)] = -b;
    u[(d + 1, d + 1)] = c;
    (eta0, u)
}

/// Matrix of the composition f ↦ f(Rv) for an orthogonal R, computed by grid
/// quadrature (exact: total-degree truncation is rotation-closed).
pub fn rotation_representation(basis: &HermiteBasis, r: &RMatrix) -> Result<RMatrix> {
    let d = basis.dim_v;
    if r.nrows() != d || r.ncols() != d {
        return Err(Error::InvalidParameter(format!(
            "rotation must be {d}×{d}"
        )));
    }
    let defect = (r.transpose() * r - RMatrix::identity(d, d)).amax();
    if defect > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "matrix is not orthogonal: ‖RᵀR - I‖_max = {defect:.3e}"
        )));
    }
    let n = basis.len();
    let norm = (2.0 * std::f64::consts::PI).powf(-(d as f64) / 2.0);
    let mut m = RMatrix::zeros(n, n);
    for (q, &w) in basis.grid.weights.iter().enumerate() {
        let pv = basis.node_poly(q);
        let rotated = r * &basis.grid.nodes[q];
        let pr = basis.eval_poly_all(&rotated);
        // m[b, a] += w p_a(R v) p_b(v)
        for a in 0..n {
            let wa = w * pr[a];
            for b in 0..n {
                m[(b, a)] += wa * pv[b];
            }
        }
    }
    Ok(m * norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn index_counts_match_binomials() {
        // d=1, N=2 → 3 indices; d=3, N=2 → C(5,3) = 10
        assert_eq!(graded_lex_indices(1, 2).len(), 3);
        assert_eq!(graded_lex_indices(3, 2).len(), 10);
        assert_eq!(graded_lex_indices(3, 6).len(), 84);
    }

    #[test]
    fn ordering_is_graded_lex_and_deterministic() {
        let idx = graded_lex_indices(2, 2);
        assert_eq!(
            idx,
            vec![
                vec![0, 0],
                vec![0, 1],
                vec![1, 0],
                vec![0, 2],
                vec![1, 1],
                vec![2, 0]
            ]
        );
    }

    #[test]
    fn gram_is_identity() {
        for (d, n) in [(1usize, 4usize), (2, 3), (3, 4)] {
            let basis = build_basis(d, n, n + 1).unwrap();
            let g = basis.gram();
            let err = (&g - RMatrix::identity(basis.len(), basis.len())).amax();
            assert!(err < 1e-12, "gram defect {err:.3e} at d={d} N={n}");
        }
    }

    #[test]
    fn build_rejects_small_degree() {
        assert!(build_basis(2, 1, 4).is_err());
        assert!(build_basis(2, 3, 3).is_err());
    }

    #[test]
    fn kernel_vectors_orthonormal_and_low_degree() {
        let basis = build_basis(3, 4, 6).unwrap();
        let kv = kernel_vectors(&basis);
        let gram = kv.columns.transpose() * &kv.columns;
        assert!((gram - RMatrix::identity(5, 5)).amax() < 1e-14);
        // support only on degree ≤ 2 indices
        for j in 0..kv.count() {
            for (a, alpha) in basis.index_set.iter().enumerate() {
                if alpha.iter().sum::<usize>() > 2 {
                    assert_eq!(kv.columns[(a, j)], 0.0);
                }
            }
        }
        // ψ_0 is the unit vector on α = 0
        assert_eq!(kv.columns[(0, 0)], 1.0);
        assert_relative_eq!(kv.columns.column(0).norm(), 1.0);
    }

    #[test]
    fn kernel_energy_vector_matches_quadrature_oracle() {
        // oracle: coefficients of ψ_{d+1} by quadrature inner products
        let basis = build_basis(3, 4, 8).unwrap();
        let kv = kernel_vectors(&basis);
        let d = 3.0;
        let oracle = basis.project_weighted(|v| (v.norm_squared() - d) / (2.0 * d).sqrt());
        let diff = (&oracle - kv.columns.column(3 + 1)).amax();
        assert!(diff < 1e-12, "oracle mismatch {diff:.3e}");
    }

    #[test]
    fn projector_identities() {
        let basis = build_basis(3, 3, 5).unwrap();
        let kv = kernel_vectors(&basis);
        let (p0, p1) = projection_p0(&kv);
        let n = basis.len();
        assert!((&p0 * &p0 - &p0).amax() < 1e-12);
        assert!((&p0 * &p1).amax() < 1e-12);
        assert!((&p0 + &p1 - RMatrix::identity(n, n)).amax() < 1e-14);
        assert_relative_eq!(p0.trace(), 5.0, epsilon = 1e-12);
        // ψ_1 is in the range of P0
        let psi1 = kv.columns.column(1).clone_owned();
        assert!((&p0 * &psi1 - &psi1).amax() < 1e-13);
    }

    #[test]
    fn v1_matrix_matches_quadrature_oracle() {
        let basis = build_basis(2, 4, 8).unwrap();
        let v1 = multiply_by_v1(&basis);
        assert!((v1.transpose() - &v1).amax() < 1e-14);
        // quadrature oracle for (v_1 φ_a, φ_b)
        let n = basis.len();
        let norm = (2.0 * std::f64::consts::PI).powi(-1);
        let mut oracle = RMatrix::zeros(n, n);
        for (q, &w) in basis.grid.weights.iter().enumerate() {
            let p = basis.node_poly(q);
            let f = w * basis.grid.nodes[q][0];
            for a in 0..n {
                for b in 0..n {
                    oracle[(a, b)] += f * p[a] * p[b];
                }
            }
        }
        oracle *= norm;
        // rows/cols of top degree lose the out-of-basis coupling in the
        // truncated matrix; both representations agree inside the basis
        assert!((&oracle - &v1).amax() < 1e-12, "{:.3e}", (&oracle - &v1).amax());
        // recurrence coefficient linking degree 0 and 1
        let i0 = basis.index_of(&[0, 0]).unwrap();
        let i1 = basis.index_of(&[1, 0]).unwrap();
        assert_relative_eq!(v1[(i0, i1)], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn weight_matrix_properties() {
        let basis = build_basis(2, 3, 5).unwrap();
        let (w0, delta0) = weight_matrix_with_report(&basis, 0.0);
        assert!(delta0 < 1e-12);
        assert!((&w0 - RMatrix::identity(basis.len(), basis.len())).amax() < 1e-12);
        let (w2, delta2) = weight_matrix_with_report(&basis, 2.0);
        assert!(delta2 < 1e-8, "refinement delta {delta2:.3e}");
        // (⟨v⟩² φ_0, φ_0) = 1 + d via the Gaussian second moment
        assert_relative_eq!(w2[(0, 0)], 3.0, epsilon = 1e-10);
        let (vals, _) = crate::linalg::sym_eigen_sorted(&w2);
        assert!(vals[0] > 0.0);
    }

    #[test]
    fn weight_matrix_positive_for_fractional_power() {
        let basis = build_basis(3, 3, 5).unwrap();
        let w = weight_matrix(&basis, 1.5);
        let (vals, _) = crate::linalg::sym_eigen_sorted(&w);
        assert!(vals[0] >= 1.0 - 1e-10, "λ_min = {}", vals[0]);
    }

    #[test]
    fn reduced_stream_matrix_structure() {
        let basis = build_basis(3, 4, 6).unwrap();
        let kv = kernel_vectors(&basis);
        let m = reduced_stream_matrix(&basis, &kv);
        assert!((m.transpose() - &m).amax() < 1e-14);
        assert_relative_eq!(m[(1, 4)], (2.0f64 / 3.0).sqrt(), epsilon = 1e-13);
        assert_relative_eq!(m[(0, 1)], 1.0, epsilon = 1e-13);
        let (vals, _) = crate::linalg::sym_eigen_sorted(&m);
        let top = (5.0f64 / 3.0).sqrt();
        assert_relative_eq!(vals[0], -top, epsilon = 1e-13);
        assert_relative_eq!(vals[4], top, epsilon = 1e-13);
        for v in &vals[1..4] {
            assert!(v.abs() < 1e-13);
        }
    }

    #[test]
    fn reduced_stream_equals_projected_v1() {
        let basis = build_basis(3, 3, 5).unwrap();
        let kv = kernel_vectors(&basis);
        let m = reduced_stream_matrix(&basis, &kv);
        let v1 = multiply_by_v1(&basis);
        let (p0, _) = projection_p0(&kv);
        let projected = kv.columns.transpose() * (&p0 * &v1 * &p0) * &kv.columns;
        assert!((&projected - &m).amax() < 1e-12);
    }

    #[test]
    fn stream_eigenbasis_diagonalizes_reduced_matrix() {
        for d in [2usize, 3, 4] {
            let basis = build_basis(d, 3, 5).unwrap();
            let kv = kernel_vectors(&basis);
            let m = reduced_stream_matrix(&basis, &kv);
            let (eta0, u) = stream_eigenbasis(d);
            assert!((u.transpose() * &u - RMatrix::identity(d + 2, d + 2)).amax() < 1e-14);
            let diag = u.transpose() * &m * &u;
            for j in 0..d + 2 {
                assert_relative_eq!(diag[(j, j)], eta0[j], epsilon = 1e-13);
                for k in 0..d + 2 {
                    if k != j {
                        assert!(diag[(j, k)].abs() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn rotation_representation_swap_and_orthogonality() {
        let basis = build_basis(3, 3, 6).unwrap();
        let kv = kernel_vectors(&basis);
        // identity
        let id = rotation_representation(&basis, &RMatrix::identity(3, 3)).unwrap();
        assert!((&id - RMatrix::identity(basis.len(), basis.len())).amax() < 1e-12);
        // swap v1 <-> v2 maps ψ_1 to ψ_2
        let mut r = RMatrix::zeros(3, 3);
        r[(0, 1)] = 1.0;
        r[(1, 0)] = 1.0;
        r[(2, 2)] = 1.0;
        let rep = rotation_representation(&basis, &r).unwrap();
        let mapped = &rep * kv.columns.column(1);
        assert!((mapped - kv.columns.column(2)).amax() < 1e-12);
        // representation of a generic rotation is orthogonal
        let angle = 0.7f64;
        let mut rot = RMatrix::identity(3, 3);
        rot[(0, 0)] = angle.cos();
        rot[(0, 2)] = -angle.sin();
        rot[(2, 0)] = angle.sin();
        rot[(2, 2)] = angle.cos();
        let rep = rotation_representation(&basis, &rot).unwrap();
        let n = basis.len();
        assert!(
            (rep.transpose() * &rep - RMatrix::identity(n, n)).amax() < 1e-10,
            "representation not orthogonal"
        );
        // rotations commute with P0
        let (p0, _) = projection_p0(&kv);
        assert!((&rep * &p0 - &p0 * &rep).amax() < 1e-10);
    }

    #[test]
    fn rotation_rejects_non_orthogonal() {
        let basis = build_basis(2, 2, 4).unwrap();
        let mut r = RMatrix::identity(2, 2);
        r[(0, 1)] = 0.1;
        assert!(rotation_representation(&basis, &r).is_err());
    }
}
