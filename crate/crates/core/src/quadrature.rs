//! One-dimensional Gaussian rules, tensor velocity grids for the weight
//! e^{-|v|^2/2}, and the graded sphere rule used by collision assembly.

use crate::error::{Error, Result};
use crate::{RMatrix, RVector};
use nalgebra::SymmetricEigen;

/// Nodes and weights of a 1-D quadrature rule.
#[derive(Debug, Clone)]
pub struct Rule1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Golub-Welsch: eigen-decompose the symmetric Jacobi matrix with the given
/// off-diagonal recurrence coefficients; weights are mu0 * (first component)^2.
fn golub_welsch(offdiag: &[f64], mu0: f64) -> Rule1d {
    let n = offdiag.len() + 1;
    let mut jac = RMatrix::zeros(n, n);
    for (k, &b) in offdiag.iter().enumerate() {
        jac[(k, k + 1)] = b;
        jac[(k + 1, k)] = b;
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let w = mu0 * eig.eigenvectors[(0, i)] * eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], w)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Rule1d {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Gauss-Hermite rule for the weight e^{-x^2} on R.
pub fn gauss_hermite(n: usize) -> Rule1d {
    assert!(n >= 1);
    let offdiag: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
    golub_welsch(&offdiag, std::f64::consts::PI.sqrt())
}

/// Gauss-Hermite rule rescaled to the weight e^{-x^2/2}:
/// sum_q w_q f(x_q) ≈ ∫ f(x) e^{-x^2/2} dx.
pub fn gauss_hermite_half(n: usize) -> Rule1d {
    let base = gauss_hermite(n);
    let s = std::f64::consts::SQRT_2;
    Rule1d {
        nodes: base.nodes.iter().map(|x| s * x).collect(),
        weights: base.weights.iter().map(|w| s * w).collect(),
    }
}

/// Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> Rule1d {
    assert!(n >= 1);
    let offdiag: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    golub_welsch(&offdiag, 2.0)
}

/// Gauss-Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Rule1d {
    let base = gauss_legendre(n);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    Rule1d {
        nodes: base.nodes.iter().map(|x| c + h * x).collect(),
        weights: base.weights.iter().map(|w| h * w).collect(),
    }
}

/// Composite Gauss-Legendre over consecutive panels given by breakpoints.
pub fn composite_gauss_legendre(points_per_panel: usize, breaks: &[f64]) -> Rule1d {
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for w in breaks.windows(2) {
        let r = gauss_legendre_on(points_per_panel, w[0], w[1]);
        nodes.extend(r.nodes);
        weights.extend(r.weights);
    }
    Rule1d { nodes, weights }
}

/// Geometrically graded breakpoints from `hi` down toward `lo` with the given
/// ratio, returned in increasing order and clamped at `lo`.
pub fn graded_breaks(lo: f64, hi: f64, ratio: f64) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && ratio > 1.0);
    let mut b = vec![hi];
    let mut x = hi;
    while x / ratio > lo {
        x /= ratio;
        b.push(x);
    }
    b.push(lo);
    b.reverse();
    b
}

/// Tensor Gauss-Hermite grid in d dimensions for the weight e^{-|v|^2/2}.
///
/// `sum_q weights[q] f(nodes[q]) ≈ ∫_{R^d} f(v) e^{-|v|^2/2} dv`, nodes in a
/// fixed lexicographic order over the 1-D rule.
#[derive(Debug, Clone)]
pub struct VelocityGrid {
    pub dim: usize,
    pub order: usize,
    pub nodes: Vec<RVector>,
    pub weights: Vec<f64>,
}

impl VelocityGrid {
    pub fn new(dim: usize, order: usize) -> Self {
        let rule = gauss_hermite_half(order);
        let total = order.pow(dim as u32);
        let mut nodes = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        for flat in 0..total {
            let mut idx = flat;
            let mut v = RVector::zeros(dim);
            let mut w = 1.0;
            for ax in (0..dim).rev() {
                let i = idx % order;
                idx /= order;
                v[ax] = rule.nodes[i];
                w *= rule.weights[i];
            }
            nodes.push(v);
            weights.push(w);
        }
        VelocityGrid {
            dim,
            order,
            nodes,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// One polar node of the sphere rule.
#[derive(Debug, Clone, Copy)]
pub struct ThetaNode {
    pub theta: f64,
    pub cos: f64,
    pub sin: f64,
    /// weight including the sin^{d-2}θ sphere factor
    pub weight: f64,
}

/// Quadrature rule on the unit sphere restricted to the half-cone
/// θ ∈ [theta_floor, π/2] around a direction k, with geometric θ-grading and
/// trapezoid panels, tensored with an equally-weighted full azimuth circle.
/// Weights carry the sin^{d-2}θ sphere factor; the azimuth circle integrates
/// trigonometric polynomials of degree < n_azimuth exactly.
#[derive(Debug, Clone)]
pub struct SphereRule {
    pub dim: usize,
    pub theta: Vec<ThetaNode>,
    /// azimuth unit points on S^{d-2} with weights (d=3: circle; d=2: {±1})
    pub azimuth: Vec<(f64, f64, f64)>, // (cosφ, sinφ, weight); d=2 uses (±1, 0, 1)
}

impl SphereRule {
    /// `subdiv` trapezoid subintervals per geometric panel, `n_azimuth`
    /// equally spaced azimuth points (ignored for d=2).
    pub fn new(
        dim: usize,
        theta_floor: f64,
        ratio: f64,
        subdiv: usize,
        n_azimuth: usize,
    ) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::Unsupported(format!(
                "sphere rule implemented for d in {{2,3}}, got {dim}"
            )));
        }
        if !(theta_floor > 0.0 && theta_floor < std::f64::consts::FRAC_PI_4) {
            return Err(Error::InvalidParameter(format!(
                "theta_floor must lie in (0, pi/4), got {theta_floor}"
            )));
        }
        let breaks = graded_breaks(theta_floor, std::f64::consts::FRAC_PI_2, ratio);
        let mut theta = Vec::new();
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let h = (b - a) / subdiv as f64;
            for k in 0..=subdiv {
                let t = a + h * k as f64;
                // composite trapezoid: endpoints half weight
                let tw = if k == 0 || k == subdiv { 0.5 * h } else { h };
                let sphere_factor = t.sin().powi(dim as i32 - 2);
                theta.push(ThetaNode {
                    theta: t,
                    cos: t.cos(),
                    sin: t.sin(),
                    weight: tw * sphere_factor,
                });
            }
        }
        let azimuth = match dim {
            2 => vec![(1.0, 0.0, 1.0), (-1.0, 0.0, 1.0)],
            _ => {
                let n = n_azimuth.max(2);
                let dphi = 2.0 * std::f64::consts::PI / n as f64;
                (0..n)
                    .map(|m| {
                        let phi = dphi * m as f64;
                        (phi.cos(), phi.sin(), dphi)
                    })
                    .collect()
            }
        };
        Ok(SphereRule {
            dim,
            theta,
            azimuth,
        })
    }

    /// Refined copy with doubled θ-subdivision and azimuth count, used by the
    /// σ-grid convergence reports.
    pub fn doubled(&self, theta_floor: f64, ratio: f64, subdiv: usize, n_azimuth: usize) -> Self {
        SphereRule::new(self.dim, theta_floor, ratio, subdiv * 2, n_azimuth * 2)
            .expect("refinement of a valid rule stays valid")
    }

    /// Deterministic orthonormal frame (e1, e2) perpendicular to the unit
    /// vector k (d=3), or the single perpendicular direction (d=2).
    pub fn frame(k: &RVector) -> (RVector, RVector) {
        let d = k.len();
        if d == 2 {
            let e1 = RVector::from_vec(vec![-k[1], k[0]]);
            return (e1.clone(), e1);
        }
        // pick the axis least aligned with k
        let mut ax = 0;
        for i in 1..d {
            if k[i].abs() < k[ax].abs() {
                ax = i;
            }
        }
        let mut e1 = RVector::zeros(d);
        e1[ax] = 1.0;
        let e1 = (&e1 - k * k[ax]).normalize();
        let e2 = RVector::from_vec(vec![
            k[1] * e1[2] - k[2] * e1[1],
            k[2] * e1[0] - k[0] * e1[2],
            k[0] * e1[1] - k[1] * e1[0],
        ]);
        (e1, e2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hermite_rule_integrates_gaussian_moments() {
        let r = gauss_hermite_half(8);
        let m0: f64 = r.weights.iter().sum();
        assert_relative_eq!(m0, (2.0 * std::f64::consts::PI).sqrt(), epsilon = 1e-13);
        let m2: f64 = r
            .nodes
            .iter()
            .zip(&r.weights)
            .map(|(x, w)| w * x * x)
            .sum();
        // ∫ x^2 e^{-x^2/2} = sqrt(2π)
        assert_relative_eq!(m2, m0, epsilon = 1e-12);
        let m4: f64 = r
            .nodes
            .iter()
            .zip(&r.weights)
            .map(|(x, w)| w * x.powi(4))
            .sum();
        assert_relative_eq!(m4, 3.0 * m0, epsilon = 1e-12);
    }

    #[test]
    fn legendre_rule_exact_on_polynomials() {
        let r = gauss_legendre_on(6, 0.0, 2.0);
        let val: f64 = r
            .nodes
            .iter()
            .zip(&r.weights)
            .map(|(x, w)| w * x.powi(7))
            .sum();
        assert_relative_eq!(val, 2.0f64.powi(8) / 8.0, epsilon = 1e-12);
    }

    #[test]
    fn velocity_grid_total_mass() {
        let g = VelocityGrid::new(3, 5);
        let m: f64 = g.weights.iter().sum();
        assert_relative_eq!(
            m,
            (2.0 * std::f64::consts::PI).powf(1.5),
            epsilon = 1e-12 * m
        );
    }

    #[test]
    fn sphere_rule_measures_half_sphere() {
        // with b ≡ 1 and no integrand, total weight ≈ area of θ ∈ [floor, π/2]
        // band: 2π ∫ sinθ dθ = 2π cos(floor)
        let rule = SphereRule::new(3, 1e-4, 2.0, 64, 8).unwrap();
        let tot: f64 = rule
            .theta
            .iter()
            .map(|t| t.weight * rule.azimuth.iter().map(|a| a.2).sum::<f64>())
            .sum();
        assert_relative_eq!(tot, 2.0 * std::f64::consts::PI, epsilon = 1e-4);
    }

    #[test]
    fn frame_is_orthonormal() {
        let k = RVector::from_vec(vec![0.3, -0.4, 0.5]).normalize();
        let (e1, e2) = SphereRule::frame(&k);
        assert!(e1.dot(&k).abs() < 1e-14);
        assert!(e2.dot(&k).abs() < 1e-14);
        assert!(e1.dot(&e2).abs() < 1e-14);
        assert_relative_eq!(e1.norm(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(e2.norm(), 1.0, epsilon = 1e-14);
    }
}
