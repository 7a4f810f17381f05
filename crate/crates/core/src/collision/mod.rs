//! Assembly of the linearized collision operator L for hard-potential
//! non-cutoff kernels, the splitting L = -A + K with K = P0 ⟨v⟩^{γ+2s} P0,
//! and the trilinear Galerkin tensor of the bilinear collision term Γ.
//!
//! Two assembly backends:
//! * `dirichlet_quadrature` — the symmetric Dirichlet quadratic form
//!   (Lf, f) = -(1/4) ∭ B μ μ_* (g' + g'_* - g - g_*)², polarized; manifestly
//!   symmetric and negative semidefinite, any dimension in {2, 3}.
//! * `maxwell_diagonal` — for γ = 0, d = 3: diagonal in the Burnett
//!   (Laguerre-Sonine × spherical harmonic) basis with eigenvalues given by
//!   1-D θ-integrals; serves as the fast path and the cross-check oracle.

mod dirichlet;
mod gamma;
mod maxwell;

pub use dirichlet::assemble_dirichlet;
#[cfg(test)]
pub(crate) use dirichlet::assemble_direct_weak_cutoff;
pub use gamma::{GammaTensor, assemble_gamma_tensor};
pub use maxwell::{BurnettBasis, assemble_maxwell_diagonal, maxwell_eigenvalue};

use crate::basis::{self, HermiteBasis, KernelVectors};
use crate::error::{Error, Result};
use crate::linalg;
use crate::symbols::WeightedGram;
use crate::RMatrix;
use serde::{Deserialize, Serialize};

/// Which assembly path produces the operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    DirichletQuadrature,
    MaxwellDiagonal,
}

/// Collision kernel B(v - v_*, σ) = |v - v_*|^γ b(cosθ) on θ ∈ [0, π/2],
/// with the model angular profile b = c_b θ^{-(d-1)-2s} (non-cutoff) or
/// b = c_b (cutoff).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CollisionKernelSpec {
    pub gamma: f64,
    pub s: f64,
    pub dim: usize,
    /// amplitude c_b of the model profile
    pub b_amplitude: f64,
    /// smallest resolved angle; angular integrals run on [theta_floor, π/2]
    pub theta_floor: f64,
    /// integrable angular profile instead of the singular one
    pub cutoff: bool,
    pub backend: Backend,
}

impl CollisionKernelSpec {
    pub fn new(gamma: f64, s: f64, dim: usize, backend: Backend) -> Result<Self> {
        let spec = CollisionKernelSpec {
            gamma,
            s,
            dim,
            b_amplitude: 1.0,
            theta_floor: 1e-3,
            cutoff: false,
            backend,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma + 2.0 * self.s < 0.0 {
            return Err(Error::SoftPotential(self.gamma + 2.0 * self.s));
        }
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "s must lie in (0,1), got {}",
                self.s
            )));
        }
        if !(self.theta_floor > 0.0 && self.theta_floor < std::f64::consts::FRAC_PI_4) {
            return Err(Error::InvalidParameter(
                "theta_floor must lie in (0, pi/4)".into(),
            ));
        }
        if self.b_amplitude <= 0.0 {
            return Err(Error::InvalidParameter("b_amplitude must be > 0".into()));
        }
        Ok(())
    }

    /// b(cosθ) model profile at angle θ.
    pub fn angular_profile(&self, theta: f64) -> f64 {
        if self.cutoff {
            self.b_amplitude
        } else {
            self.b_amplitude * theta.powf(-((self.dim - 1) as f64) - 2.0 * self.s)
        }
    }
}

/// Quadrature resolution for the Dirichlet-form assembly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssemblyOptions {
    /// Gauss-Hermite order per velocity axis (both v and v_*)
    pub quad_order_v: usize,
    /// trapezoid subintervals per geometric θ panel
    pub theta_subdiv: usize,
    /// azimuth points; 0 means the smallest count that integrates the
    /// basis polynomials exactly (2N + 2)
    pub n_azimuth: usize,
    /// geometric grading ratio of the θ panels
    pub theta_ratio: f64,
    /// tolerance for the σ-grid refinement report
    pub sigma_tol: f64,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions {
            quad_order_v: 0, // 0 → max_degree + 2
            theta_subdiv: 4,
            n_azimuth: 0,
            theta_ratio: 2.0,
            sigma_tol: 1e-4,
        }
    }
}

impl AssemblyOptions {
    pub(crate) fn resolve(&self, basis: &HermiteBasis) -> (usize, usize) {
        let q = if self.quad_order_v == 0 {
            basis.max_degree + 2
        } else {
            self.quad_order_v
        };
        let az = if self.n_azimuth == 0 {
            2 * basis.max_degree + 2
        } else {
            self.n_azimuth
        };
        (q, az)
    }
}

/// Refinement evidence attached to an assembled operator: the max entry
/// change between the coarse and fine σ-grids.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub max_entry_change: f64,
    pub tol: f64,
}

impl ConvergenceReport {
    pub fn converged(&self) -> bool {
        self.max_entry_change <= self.tol
    }
}

/// Assembled linearized operator with its splitting and discrete constants.
#[derive(Debug, Clone)]
pub struct LinearizedOperator {
    pub l: RMatrix,
    pub a: RMatrix,
    pub k: RMatrix,
    /// discrete coercivity: smallest eigenvalue of A against the weighted
    /// Gram (generalized problem), or plain L² when no Gram is attached
    pub nu0: f64,
    /// largest eigenvalue of M_a^{-1} (squared norm-ratio sup); 1 without Gram
    pub c1: f64,
    /// min(nu0/2, nu0/(2 c1))
    pub nu1: f64,
    /// smallest nonzero eigenvalue of -L (discrete spectral gap)
    pub spectral_gap: f64,
    pub basis: HermiteBasis,
    pub kernel: KernelVectors,
    pub kernel_spec: CollisionKernelSpec,
    pub convergence: ConvergenceReport,
    pub weighted_gram: Option<WeightedGram>,
}

impl LinearizedOperator {
    pub fn dim_kernel(&self) -> usize {
        self.kernel.count()
    }
}

/// Assemble L with the backend named in the spec and split it. On the
/// Maxwell path the Burnett degrees are taken from the basis.
pub fn assemble_l(
    basis: &HermiteBasis,
    spec: &CollisionKernelSpec,
    options: &AssemblyOptions,
    gram: Option<WeightedGram>,
) -> Result<LinearizedOperator> {
    spec.validate()?;
    if basis.dim_v != spec.dim {
        return Err(Error::InvalidParameter(format!(
            "basis dimension {} does not match kernel dim {}",
            basis.dim_v, spec.dim
        )));
    }
    let (l, convergence) = match spec.backend {
        Backend::DirichletQuadrature => assemble_dirichlet(basis, spec, options)?,
        Backend::MaxwellDiagonal => assemble_maxwell_diagonal(basis, spec)?,
    };
    finish_operator(basis, spec, l, convergence, gram)
}

pub(crate) fn finish_operator(
    basis: &HermiteBasis,
    spec: &CollisionKernelSpec,
    l: RMatrix,
    convergence: ConvergenceReport,
    gram: Option<WeightedGram>,
) -> Result<LinearizedOperator> {
    let kernel = basis::kernel_vectors(basis);
    let (a, k, nu0, c1, nu1) = split_ak(&l, basis, &kernel, spec, gram.as_ref())?;
    let spectral_gap = {
        let (vals, _) = linalg::sym_eigen_sorted(&l);
        // d+2 kernel eigenvalues sit at ~0; gap is the largest of the rest
        let mut sorted = vals;
        sorted.sort_by(|x, y| y.partial_cmp(x).unwrap());
        -sorted[kernel.count()]
    };
    Ok(LinearizedOperator {
        l,
        a,
        k,
        nu0,
        c1,
        nu1,
        spectral_gap,
        basis: basis.clone(),
        kernel,
        kernel_spec: spec.clone(),
        convergence,
        weighted_gram: gram,
    })
}

/// Split L = -A + K with K = P0 W P0, W the Galerkin matrix of ⟨v⟩^{γ+2s},
/// and compute the discrete constants:
/// nu0 = min generalized eigenvalue of (A, M_a); c1 = λ_max(M_a^{-1});
/// nu1 = min(nu0/2, nu0/(2 c1)). Without a weighted Gram both reduce to the
/// plain L² quantities (M_a = I).
pub fn split_ak(
    l: &RMatrix,
    basis: &HermiteBasis,
    kernel: &KernelVectors,
    spec: &CollisionKernelSpec,
    gram: Option<&WeightedGram>,
) -> Result<(RMatrix, RMatrix, f64, f64, f64)> {
    let w = basis::weight_matrix(basis, spec.gamma + 2.0 * spec.s);
    let psi = &kernel.columns;
    let k = psi * (psi.transpose() * &w * psi) * psi.transpose();
    let a = -l + &k;
    let (nu0, c1) = match gram {
        Some(g) => {
            let (lo, _) = linalg::generalized_sym_eigen_extrema(&a, &g.m_a)?;
            let (mvals, _) = linalg::sym_eigen_sorted(&g.m_a);
            (lo, 1.0 / mvals[0])
        }
        None => {
            let (vals, _) = linalg::sym_eigen_sorted(&a);
            (vals[0], 1.0)
        }
    };
    if nu0 <= 0.0 {
        return Err(Error::SingularSystem(format!(
            "A is not positive definite (nu0 = {nu0:.3e}); assembly is inconsistent"
        )));
    }
    let nu1 = (nu0 / 2.0).min(nu0 / (2.0 * c1));
    Ok((a, k, nu0, c1, nu1))
}
