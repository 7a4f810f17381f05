//! Maxwell-molecule (γ = 0, d = 3) backend: the linearized operator is
//! diagonal in the Burnett basis (Laguerre-Sonine radial polynomials times
//! real spherical harmonics, under the μ^{1/2} weight), with eigenvalues
//! given by one-dimensional θ-integrals
//!
//!   λ_{nl} = 2π ∫ b(cosθ) [ cos^{2n+l}(θ/2) P_l(cos(θ/2))
//!                         + sin^{2n+l}(θ/2) P_l(sin(θ/2)) - 1 - δ_{n0}δ_{l0} ] sinθ dθ
//!
//! over the supported angles. The bracket vanishes identically for the
//! collision-invariant modes (n,l) ∈ {(0,0), (0,1), (1,0)} and is ≤ 0
//! otherwise, so the kernel and the sign of the spectrum are exact. For the
//! non-cutoff profile the bracket's O(θ²) vanishing makes the integral finite.
//! The eigenvalue formula is cross-validated against the Dirichlet-form and
//! plain weak-form assemblies at small degree in the test suite.

use super::{CollisionKernelSpec, ConvergenceReport};
use crate::basis::HermiteBasis;
use crate::error::{Error, Result};
use crate::quadrature::{composite_gauss_legendre, graded_breaks};
use crate::{RMatrix, RVector};

/// (2m)! style factorial, exact in f64 for the small arguments used here.
fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Γ(m + 1/2) = sqrt(π) (2m)! / (4^m m!)
fn gamma_half(m: usize) -> f64 {
    std::f64::consts::PI.sqrt() * factorial(2 * m) / (4.0f64.powi(m as i32) * factorial(m))
}

/// Legendre polynomial P_l(x).
pub fn legendre_p(l: usize, x: f64) -> f64 {
    match l {
        0 => 1.0,
        1 => x,
        _ => {
            let mut pm2 = 1.0;
            let mut pm1 = x;
            for k in 2..=l {
                let kf = k as f64;
                let p = ((2.0 * kf - 1.0) * x * pm1 - (kf - 1.0) * pm2) / kf;
                pm2 = pm1;
                pm1 = p;
            }
            pm1
        }
    }
}

/// Associated Legendre P_l^m(x) (no Condon-Shortley phase), m ≥ 0.
fn assoc_legendre(l: usize, m: usize, x: f64) -> f64 {
    debug_assert!(m <= l);
    let somx2 = ((1.0 - x) * (1.0 + x)).max(0.0).sqrt();
    let mut pmm = 1.0;
    let mut fact = 1.0;
    for _ in 0..m {
        pmm *= fact * somx2;
        fact += 2.0;
    }
    if l == m {
        return pmm;
    }
    let mut pmmp1 = x * (2.0 * m as f64 + 1.0) * pmm;
    if l == m + 1 {
        return pmmp1;
    }
    let mut pll = 0.0;
    for ll in (m + 2)..=l {
        let llf = ll as f64;
        let mf = m as f64;
        pll = ((2.0 * llf - 1.0) * x * pmmp1 - (llf + mf - 1.0) * pmm) / (llf - mf);
        pmm = pmmp1;
        pmmp1 = pll;
    }
    pll
}

/// Real orthonormal spherical harmonic Y_{lm}(v̂) times ρ^l, evaluated as a
/// polynomial in v (finite at v = 0; axis points are handled by the
/// sin^m-factor inside P_l^m).
fn solid_harmonic(l: usize, m: i64, v: &RVector) -> f64 {
    let rho = v.norm();
    if rho == 0.0 {
        return if l == 0 {
            0.5 / std::f64::consts::PI.sqrt()
        } else {
            0.0
        };
    }
    let ct = (v[2] / rho).clamp(-1.0, 1.0);
    let phi = v[1].atan2(v[0]);
    let ma = m.unsigned_abs() as usize;
    let norm = ((2.0 * l as f64 + 1.0) / (4.0 * std::f64::consts::PI) * factorial(l - ma)
        / factorial(l + ma))
    .sqrt();
    let base = norm * assoc_legendre(l, ma, ct);
    let ang = match m.cmp(&0) {
        std::cmp::Ordering::Equal => base,
        std::cmp::Ordering::Greater => std::f64::consts::SQRT_2 * base * (ma as f64 * phi).cos(),
        std::cmp::Ordering::Less => std::f64::consts::SQRT_2 * base * (ma as f64 * phi).sin(),
    };
    rho.powi(l as i32) * ang
}

/// Generalized Laguerre L_n^{(a)}(x).
fn laguerre(n: usize, a: f64, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => 1.0 + a - x,
        _ => {
            let mut lm2 = 1.0;
            let mut lm1 = 1.0 + a - x;
            for k in 1..n {
                let kf = k as f64;
                let l = ((2.0 * kf + 1.0 + a - x) * lm1 - (kf + a) * lm2) / (kf + 1.0);
                lm2 = lm1;
                lm1 = l;
            }
            lm1
        }
    }
}

/// Burnett functions with 2n + l ≤ N expanded in the Hermite basis.
#[derive(Debug, Clone)]
pub struct BurnettBasis {
    /// (n, l, m) triples, ordered by total degree 2n+l, then l, then m
    pub indices: Vec<(usize, usize, i64)>,
    /// orthogonal change of basis, column J = Burnett_J in Hermite coordinates
    pub change: RMatrix,
}

impl BurnettBasis {
    pub fn new(basis: &HermiteBasis) -> Result<Self> {
        if basis.dim_v != 3 {
            return Err(Error::Unsupported(
                "Burnett basis requires d = 3 (spherical harmonics)".into(),
            ));
        }
        let nmax = basis.max_degree;
        let mut indices = Vec::new();
        for degree in 0..=nmax {
            let mut l = degree % 2;
            while l <= degree {
                let n = (degree - l) / 2;
                for m in -(l as i64)..=(l as i64) {
                    indices.push((n, l, m));
                }
                l += 2;
            }
        }
        debug_assert_eq!(indices.len(), basis.len());
        let mut change = RMatrix::zeros(basis.len(), indices.len());
        for (col, &(n, l, m)) in indices.iter().enumerate() {
            let c_nl = ((2.0 * std::f64::consts::PI).powf(1.5) * factorial(n)
                / (2.0f64.powf(l as f64 + 0.5) * gamma_half(n + l + 1)))
            .sqrt();
            let coeffs = basis.project_weighted(|v| {
                let rho2 = v.norm_squared();
                c_nl * laguerre(n, l as f64 + 0.5, rho2 / 2.0) * solid_harmonic(l, m, v)
            });
            change.set_column(col, &coeffs);
        }
        Ok(BurnettBasis { indices, change })
    }
}

fn is_kernel_mode(n: usize, l: usize) -> bool {
    matches!((n, l), (0, 0) | (0, 1) | (1, 0))
}

/// θ-integrand bracket of the eigenvalue formula.
fn eigen_bracket(n: usize, l: usize, theta: f64) -> f64 {
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    let p = 2 * n + l;
    let mut val = c.powi(p as i32) * legendre_p(l, c) + s.powi(p as i32) * legendre_p(l, s) - 1.0;
    if n == 0 && l == 0 {
        val -= 1.0;
    }
    val
}

/// Eigenvalue λ_{nl} by composite Gauss-Legendre over geometrically graded
/// panels of [theta_floor, π/2]. Collision invariants return exactly 0.
pub fn maxwell_eigenvalue(spec: &CollisionKernelSpec, n: usize, l: usize, gl_points: usize) -> f64 {
    if is_kernel_mode(n, l) {
        return 0.0;
    }
    let breaks = graded_breaks(spec.theta_floor, std::f64::consts::FRAC_PI_2, 2.0);
    let rule = composite_gauss_legendre(gl_points, &breaks);
    let mut acc = 0.0;
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        acc += w * spec.angular_profile(t) * eigen_bracket(n, l, t) * t.sin();
    }
    2.0 * std::f64::consts::PI * acc
}

/// Assemble L = C Λ Cᵀ on the Hermite basis from the Burnett eigenvalues.
/// Rejects γ ≠ 0. The convergence report compares two quadrature levels of
/// the 1-D eigenvalue integrals.
pub fn assemble_maxwell_diagonal(
    basis: &HermiteBasis,
    spec: &CollisionKernelSpec,
) -> Result<(RMatrix, ConvergenceReport)> {
    if spec.gamma != 0.0 {
        return Err(Error::Unsupported(format!(
            "maxwell_diagonal backend requires gamma = 0, got {}",
            spec.gamma
        )));
    }
    let burnett = BurnettBasis::new(basis)?;
    let nb = burnett.indices.len();
    let mut lam = RVector::zeros(nb);
    let mut max_change = 0.0f64;
    let mut seen = std::collections::HashMap::new();
    for (j, &(n, l, _m)) in burnett.indices.iter().enumerate() {
        let (val, change) = *seen.entry((n, l)).or_insert_with(|| {
            let coarse = maxwell_eigenvalue(spec, n, l, 16);
            let fine = maxwell_eigenvalue(spec, n, l, 24);
            (fine, (fine - coarse).abs())
        });
        lam[j] = val;
        max_change = max_change.max(change);
    }
    let l_mat = &burnett.change * RMatrix::from_diagonal(&lam) * burnett.change.transpose();
    Ok((
        l_mat,
        ConvergenceReport {
            max_entry_change: max_change,
            tol: 1e-10,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis;
    use crate::collision::Backend;
    use approx::assert_relative_eq;

    fn cutoff_spec() -> CollisionKernelSpec {
        CollisionKernelSpec {
            gamma: 0.0,
            s: 0.5,
            dim: 3,
            b_amplitude: 1.0,
            theta_floor: 1e-6,
            cutoff: true,
            backend: Backend::MaxwellDiagonal,
        }
    }

    #[test]
    fn burnett_change_of_basis_is_orthogonal() {
        let basis = build_basis(3, 4, 6).unwrap();
        let burnett = BurnettBasis::new(&basis).unwrap();
        let n = basis.len();
        let gram = burnett.change.transpose() * &burnett.change;
        let defect = (gram - RMatrix::identity(n, n)).amax();
        assert!(defect < 1e-12, "Burnett Gram defect {defect:.3e}");
    }

    #[test]
    fn cutoff_eigenvalues_match_closed_forms() {
        // b ≡ 1 on [0, π/2]:
        // (n,l) = (2,0): bracket = -sin²θ/2, λ = -π ∫ sin³ = -2π/3
        // (n,l) = (0,2): bracket = -(3/4) sin²θ, λ = -2π (3/4)(2/3) = -π
        let spec = cutoff_spec();
        assert_relative_eq!(
            maxwell_eigenvalue(&spec, 2, 0, 24),
            -2.0 * std::f64::consts::PI / 3.0,
            epsilon = 1e-10
        );
        assert_relative_eq!(
            maxwell_eigenvalue(&spec, 0, 2, 24),
            -std::f64::consts::PI,
            epsilon = 1e-10
        );
    }

    #[test]
    fn kernel_modes_are_exact_zeros_and_rest_negative() {
        let mut spec = cutoff_spec();
        spec.cutoff = false;
        spec.theta_floor = 1e-3;
        for n in 0..4usize {
            for l in 0..4usize {
                let lam = maxwell_eigenvalue(&spec, n, l, 24);
                if is_kernel_mode(n, l) {
                    assert_eq!(lam, 0.0);
                } else {
                    assert!(lam < 0.0, "λ_{{{n},{l}}} = {lam}");
                }
            }
        }
    }

    #[test]
    fn assembled_operator_annihilates_kernel() {
        let basis = build_basis(3, 4, 6).unwrap();
        let mut spec = cutoff_spec();
        spec.cutoff = false;
        spec.theta_floor = 1e-3;
        let (l, report) = assemble_maxwell_diagonal(&basis, &spec).unwrap();
        assert!(report.max_entry_change < 1e-10);
        let kv = crate::basis::kernel_vectors(&basis);
        for j in 0..kv.count() {
            let img = &l * kv.columns.column(j);
            assert!(img.amax() < 1e-12, "kernel defect {:.3e}", img.amax());
        }
        assert!((l.transpose() - &l).amax() < 1e-12);
    }
}
