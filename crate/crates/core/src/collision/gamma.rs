//! Trilinear Galerkin tensor of the bilinear collision term
//! Γ(f, g) = μ^{-1/2} Q(μ^{1/2} f, μ^{1/2} g).
//!
//! In the weak form the test function appears as the polynomial part p_κ:
//!   (Γ(φ_α, φ_β), φ_κ) = ∭ B μ μ_* p_α(v_*) p_β(v) [p_κ(v') - p_κ(v)].
//! The first-order transverse Taylor term of p_κ is subtracted pointwise at
//! every azimuth node; its azimuth sum is exactly zero on the equally spaced
//! circle, so the subtraction changes nothing analytically while removing the
//! O(θ) cancellation that would otherwise eat precision for s ≥ 1/2.

use super::{AssemblyOptions, CollisionKernelSpec, ConvergenceReport};
use crate::basis::{HermiteBasis, KernelVectors, PolyEvaluator};
use crate::error::{Error, Result};
use crate::quadrature::{SphereRule, VelocityGrid};
use crate::{C64, CVector, RVector};
use rayon::prelude::*;

/// Dense trilinear array G[α, β, κ] = (Γ(φ_α, φ_β), φ_κ), flat layout
/// [(α n + β) n + κ].
#[derive(Debug, Clone)]
pub struct GammaTensor {
    pub n: usize,
    pub entries: Vec<f64>,
    pub kernel_spec: CollisionKernelSpec,
    pub convergence: ConvergenceReport,
}

impl GammaTensor {
    #[inline]
    pub fn get(&self, a: usize, b: usize, k: usize) -> f64 {
        self.entries[(a * self.n + b) * self.n + k]
    }

    /// Γ(f, g) as a coefficient vector: out_κ = Σ_{α,β} G[α,β,κ] f_α g_β.
    pub fn apply(&self, f: &RVector, g: &RVector) -> RVector {
        let n = self.n;
        let mut out = vec![0.0f64; n];
        for a in 0..n {
            let fa = f[a];
            if fa == 0.0 {
                continue;
            }
            for b in 0..n {
                let c = fa * g[b];
                if c == 0.0 {
                    continue;
                }
                let slice = &self.entries[(a * n + b) * n..(a * n + b + 1) * n];
                for (o, e) in out.iter_mut().zip(slice) {
                    *o += c * e;
                }
            }
        }
        RVector::from_vec(out)
    }

    /// Same contraction with complex mode coefficients.
    pub fn apply_complex(&self, f: &CVector, g: &CVector) -> CVector {
        let n = self.n;
        let mut out = vec![C64::new(0.0, 0.0); n];
        for a in 0..n {
            let fa = f[a];
            if fa.norm_sqr() == 0.0 {
                continue;
            }
            for b in 0..n {
                let c = fa * g[b];
                let slice = &self.entries[(a * n + b) * n..(a * n + b + 1) * n];
                for (o, e) in out.iter_mut().zip(slice) {
                    *o += c * e;
                }
            }
        }
        CVector::from_vec(out)
    }

    /// Collision-invariance defects against the kernel vectors, both for the
    /// raw bilinear tensor (only mass is conserved termwise) and for the
    /// (α,β)-symmetrized contraction (all d+2 invariants).
    pub fn invariance_defects(&self, kernel: &KernelVectors) -> (f64, f64) {
        let n = self.n;
        let scale = self
            .entries
            .iter()
            .fold(0.0f64, |m, &x| m.max(x.abs()))
            .max(1e-300);
        let mut mass = 0.0f64;
        let mut symmetrized = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                for i in 0..kernel.count() {
                    let mut raw = 0.0;
                    let mut swapped = 0.0;
                    for k in 0..n {
                        let w = kernel.columns[(k, i)];
                        if w != 0.0 {
                            raw += self.get(a, b, k) * w;
                            swapped += self.get(b, a, k) * w;
                        }
                    }
                    if i == 0 {
                        mass = mass.max(raw.abs());
                    }
                    symmetrized = symmetrized.max((raw + swapped).abs());
                }
            }
        }
        (mass / scale, symmetrized / scale)
    }
}

pub fn assemble_gamma_tensor(
    basis: &HermiteBasis,
    spec: &CollisionKernelSpec,
    options: &AssemblyOptions,
) -> Result<GammaTensor> {
    spec.validate()?;
    if spec.dim != basis.dim_v {
        return Err(Error::InvalidParameter(
            "kernel dim does not match basis".into(),
        ));
    }
    if spec.dim != 2 && spec.dim != 3 {
        return Err(Error::Unsupported(
            "gamma tensor assembly supports d in {2,3}".into(),
        ));
    }
    let (q_order, n_az) = options.resolve(basis);
    let grid = VelocityGrid::new(basis.dim_v, q_order);
    let coarse = SphereRule::new(
        basis.dim_v,
        spec.theta_floor,
        options.theta_ratio,
        (options.theta_subdiv / 2).max(1),
        n_az,
    )?;
    let fine = SphereRule::new(
        basis.dim_v,
        spec.theta_floor,
        options.theta_ratio,
        options.theta_subdiv,
        n_az,
    )?;
    let g_coarse = gamma_entries(basis, spec, &grid, &coarse);
    let g_fine = gamma_entries(basis, spec, &grid, &fine);
    let max_entry_change = g_fine
        .iter()
        .zip(&g_coarse)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let report = ConvergenceReport {
        max_entry_change,
        tol: options.sigma_tol,
    };
    if !report.converged() {
        return Err(Error::NotConverged {
            what: "sigma grid",
            max_change: max_entry_change,
            tol: options.sigma_tol,
        });
    }
    Ok(GammaTensor {
        n: basis.len(),
        entries: g_fine,
        kernel_spec: spec.clone(),
        convergence: report,
    })
}

fn gamma_entries(
    basis: &HermiteBasis,
    spec: &CollisionKernelSpec,
    grid: &VelocityGrid,
    sphere: &SphereRule,
) -> Vec<f64> {
    let n = basis.len();
    let d = basis.dim_v;
    let nv = grid.len();
    let front = (2.0 * std::f64::consts::PI).powi(-(d as i32));
    // p_α at all nodes
    let mut ev0 = PolyEvaluator::new(basis);
    let mut vals = vec![0.0f64; nv * n];
    for (q, node) in grid.nodes.iter().enumerate() {
        ev0.eval(node.as_slice(), &mut vals[q * n..(q + 1) * n]);
    }
    let chunk = 8usize;
    let starts: Vec<usize> = (0..nv).step_by(chunk).collect();
    let slabs: Vec<Vec<f64>> = starts
        .par_iter()
        .map(|&start| {
            let mut slab = vec![0.0f64; n * n * n];
            let mut ev = PolyEvaluator::new(basis);
            let mut pv = vec![0.0f64; n];
            let mut grad = vec![0.0f64; d * n];
            let mut e1g = vec![0.0f64; n];
            let mut e2g = vec![0.0f64; n];
            let mut p_post = vec![0.0f64; n];
            let mut t_vec = vec![0.0f64; n];
            let mut m_acc = vec![0.0f64; n * n]; // [α * n + κ]
            let mut vy = vec![0.0f64; d];
            for qv in start..(start + chunk).min(nv) {
                let v = &grid.nodes[qv];
                let wv = grid.weights[qv];
                ev.eval_with_grad(v.as_slice(), &mut pv, &mut grad);
                m_acc.iter_mut().for_each(|x| *x = 0.0);
                for qs in 0..nv {
                    let vs = &grid.nodes[qs];
                    let u = v - vs;
                    let r = u.norm();
                    if r < 1e-14 {
                        continue;
                    }
                    let ws = grid.weights[qs];
                    let ps = &vals[qs * n..qs * n + n];
                    let khat = &u / r;
                    let (e1, e2) = SphereRule::frame(&khat);
                    let rho = 0.5 * r;
                    // frame components of ∇p_κ at v
                    for k in 0..n {
                        let mut a1 = 0.0;
                        let mut a2 = 0.0;
                        for i in 0..d {
                            a1 += e1[i] * grad[i * n + k];
                            a2 += e2[i] * grad[i * n + k];
                        }
                        e1g[k] = a1;
                        e2g[k] = a2;
                    }
                    t_vec.iter_mut().for_each(|x| *x = 0.0);
                    let kinetic = r.powf(spec.gamma) * ws;
                    for t in &sphere.theta {
                        let wt = kinetic * t.weight * spec.angular_profile(t.theta);
                        let (rc, rs) = (rho * t.cos, rho * t.sin);
                        for &(cphi, sphi, wphi) in &sphere.azimuth {
                            let w = wt * wphi;
                            for i in 0..d {
                                vy[i] = v[i] + rc * khat[i] - rho * khat[i]
                                    + rs * (cphi * e1[i] + sphi * e2[i]);
                            }
                            ev.eval(&vy, &mut p_post);
                            let (tc, tsn) = (rs * cphi, rs * sphi);
                            for k in 0..n {
                                t_vec[k] +=
                                    w * (p_post[k] - pv[k] - tc * e1g[k] - tsn * e2g[k]);
                            }
                        }
                    }
                    // M[α, κ] += p_α(v_*) t_κ
                    for a in 0..n {
                        let fa = ps[a];
                        if fa == 0.0 {
                            continue;
                        }
                        let row = &mut m_acc[a * n..(a + 1) * n];
                        for (dst, &t) in row.iter_mut().zip(&t_vec) {
                            *dst += fa * t;
                        }
                    }
                }
                // G[α, β, κ] += front wv p_β(v) M[α, κ]
                for a in 0..n {
                    let mrow = &m_acc[a * n..(a + 1) * n];
                    for b in 0..n {
                        let c = front * wv * pv[b];
                        if c == 0.0 {
                            continue;
                        }
                        let gslice = &mut slab[(a * n + b) * n..(a * n + b + 1) * n];
                        for (dst, &m) in gslice.iter_mut().zip(mrow) {
                            *dst += c * m;
                        }
                    }
                }
            }
            slab
        })
        .collect();
    let mut total = vec![0.0f64; n * n * n];
    for slab in &slabs {
        for (dst, src) in total.iter_mut().zip(slab) {
            *dst += src;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_basis, kernel_vectors};
    use crate::collision::Backend;

    fn small_tensor(s: f64, cutoff: bool) -> (GammaTensor, crate::basis::HermiteBasis) {
        let basis = build_basis(3, 2, 4).unwrap();
        let spec = CollisionKernelSpec {
            gamma: 0.0,
            s,
            dim: 3,
            b_amplitude: 1.0,
            theta_floor: 1e-3,
            cutoff,
            backend: Backend::DirichletQuadrature,
        };
        let options = AssemblyOptions {
            quad_order_v: 4,
            theta_subdiv: 4,
            n_azimuth: 8,
            theta_ratio: 2.0,
            sigma_tol: 1e-2,
        };
        let t = assemble_gamma_tensor(&basis, &spec, &options).unwrap();
        (t, basis)
    }

    #[test]
    fn gamma_of_zero_vanishes() {
        let (t, basis) = small_tensor(0.5, true);
        let f = RVector::from_element(basis.len(), 1.0);
        let zero = RVector::zeros(basis.len());
        assert_eq!(t.apply(&f, &zero).amax(), 0.0);
        assert_eq!(t.apply(&zero, &f).amax(), 0.0);
    }

    #[test]
    fn invariance_mass_termwise_and_all_symmetrized() {
        for (s, cutoff) in [(0.3, true), (0.7, false)] {
            let (t, basis) = small_tensor(s, cutoff);
            let kv = kernel_vectors(&basis);
            let (mass, symm) = t.invariance_defects(&kv);
            assert!(mass < 1e-10, "mass defect {mass:.3e} (s={s})");
            assert!(symm < 1e-10, "symmetrized defect {symm:.3e} (s={s})");
        }
    }

    #[test]
    fn gamma_halves_of_linearized_operator_sum_to_l() {
        // Γ(ψ0, g) + Γ(g, ψ0) = L g: check against the Maxwell backend
        let basis = build_basis(3, 2, 4).unwrap();
        let spec = CollisionKernelSpec {
            gamma: 0.0,
            s: 0.5,
            dim: 3,
            b_amplitude: 1.0,
            theta_floor: 1e-3,
            cutoff: false,
            backend: Backend::DirichletQuadrature,
        };
        let options = AssemblyOptions {
            quad_order_v: 6,
            theta_subdiv: 8,
            n_azimuth: 8,
            theta_ratio: 2.0,
            sigma_tol: 1e-2,
        };
        let t = assemble_gamma_tensor(&basis, &spec, &options).unwrap();
        let (l, _) = crate::collision::assemble_maxwell_diagonal(&basis, &spec).unwrap();
        let kv = kernel_vectors(&basis);
        let psi0 = kv.columns.column(0).clone_owned();
        let n = basis.len();
        for trial in 0..n {
            let mut g = RVector::zeros(n);
            g[trial] = 1.0;
            let via_gamma = t.apply(&psi0, &g) + t.apply(&g, &psi0);
            let via_l = &l * &g;
            let err = (via_gamma - via_l).amax();
            assert!(err < 5e-3, "column {trial}: defect {err:.3e}");
        }
    }
}
