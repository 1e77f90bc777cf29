//! Analytic expressions for every quantity the simulation pipeline produces.
//!
//! Nothing in this module touches a matrix: each field of
//! [`ClosedFormBundle`] is evaluated straight from scalar formulas, which is
//! what makes it usable as an independent oracle against the protocol and
//! correlations modules.

use crate::xy_model::ModelParams;
use crate::Result;

/// Above this value of beta*max(B, alpha) the raw hyperbolics overflow a
/// f64, so the thermal ratios switch to shifted exponentials.
const LOG_SPACE_THRESHOLD: f64 = 350.0;

/// Thermal response coefficients and the ratios they are built from, all of
/// the form sinh(beta x)/Z or cosh(beta x)/Z.
#[derive(Debug, Clone, Copy)]
struct ThermalRatios {
    sinh_b_over_z: f64,
    sinh_alpha_over_z: f64,
    cosh_b_over_z: f64,
    cosh_alpha_over_z: f64,
}

fn thermal_ratios(params: &ModelParams) -> ThermalRatios {
    let beta = params.beta();
    let xb = beta * params.b;
    let xa = beta * params.alpha;
    if xb.max(xa) <= LOG_SPACE_THRESHOLD {
        let z = 2.0 * (xa.cosh() + xb.cosh());
        ThermalRatios {
            sinh_b_over_z: xb.sinh() / z,
            sinh_alpha_over_z: xa.sinh() / z,
            cosh_b_over_z: xb.cosh() / z,
            cosh_alpha_over_z: xa.cosh() / z,
        }
    } else {
        // Divide every exponential by exp(shift) so the largest term is 1.
        let shift = xb.max(xa);
        let e = |x: f64| (x - shift).exp();
        let z = e(xa) + e(-xa) + e(xb) + e(-xb);
        ThermalRatios {
            sinh_b_over_z: (e(xb) - e(-xb)) / (2.0 * z),
            sinh_alpha_over_z: (e(xa) - e(-xa)) / (2.0 * z),
            cosh_b_over_z: (e(xb) + e(-xb)) / (2.0 * z),
            cosh_alpha_over_z: (e(xa) + e(-xa)) / (2.0 * z),
        }
    }
}

/// (p, q) with p = B sinh(beta B)/Z + alpha sinh(beta alpha)/Z and
/// q = B sinh(beta alpha)/Z - alpha sinh(beta B)/Z.
pub fn thermal_pq(params: &ModelParams) -> (f64, f64) {
    let r = thermal_ratios(params);
    let p = params.b * r.sinh_b_over_z + params.alpha * r.sinh_alpha_over_z;
    let q = params.b * r.sinh_alpha_over_z - params.alpha * r.sinh_b_over_z;
    (p, q)
}

/// (sinh(beta B)/Z, sinh(beta alpha)/Z), the Boltzmann factors weighting the
/// field and coupling responses.
pub fn thermal_sinh_ratios(params: &ModelParams) -> (f64, f64) {
    let r = thermal_ratios(params);
    (r.sinh_b_over_z, r.sinh_alpha_over_z)
}

/// min over the rotation angle of the post-communication energy change,
/// p - sqrt(p^2 + q^2), written to avoid cancellation when |q| << p.
pub fn delta_tel_min(p: f64, q: f64) -> f64 {
    if p > 0.0 {
        -q * q / (p + p.hypot(q))
    } else {
        p - p.hypot(q)
    }
}

/// Critical temperature alpha / ln(1 + sqrt(2)) below which the thermal
/// state is entangled; independent of the field B.
pub fn critical_temperature(alpha: f64) -> f64 {
    alpha / (1.0 + std::f64::consts::SQRT_2).ln()
}

/// Thermal-state concurrence max{0, (2/Z)(sinh(beta alpha) - 1)}.
pub fn thermal_concurrence(params: &ModelParams) -> f64 {
    let beta = params.beta();
    let xa = beta * params.alpha;
    let xb = beta * params.b;
    if xb.max(xa) <= LOG_SPACE_THRESHOLD {
        let z = 2.0 * (xa.cosh() + xb.cosh());
        (2.0 / z * (xa.sinh() - 1.0)).max(0.0)
    } else {
        let r = thermal_ratios(params);
        let shift = xb.max(xa);
        // 2 sinh(xa)/Z - 2/Z with 1/Z = exp(-shift)/z_shifted.
        let z_shifted = (xa - shift).exp() + (-xa - shift).exp() + (xb - shift).exp()
            + (-xb - shift).exp();
        (2.0 * r.sinh_alpha_over_z - 2.0 * (-shift).exp() / z_shifted).max(0.0)
    }
}

/// Eigenvalues of the partial transpose of the thermal state:
/// cosh(beta alpha)/Z twice and [cosh(beta B) +- sqrt(sinh^2(beta B) +
/// sinh^2(beta alpha))]/Z, returned as [lambda1, lambda2, lambda+, lambda-].
pub fn thermal_pt_eigenvalues(params: &ModelParams) -> [f64; 4] {
    let r = thermal_ratios(params);
    let root = r.sinh_b_over_z.hypot(r.sinh_alpha_over_z);
    [
        r.cosh_alpha_over_z,
        r.cosh_alpha_over_z,
        r.cosh_b_over_z + root,
        r.cosh_b_over_z - root,
    ]
}

/// Everything the pipelines are checked against, for one parameter set.
#[derive(Debug, Clone)]
pub struct ClosedFormBundle {
    /// Energy injected by the measurement on the thermal state (equals p).
    pub delta_inf: f64,
    pub p: f64,
    pub q: f64,
    /// Optimal doubled rotation angle t0 = atan2(q, p).
    pub t0: f64,
    /// p - sqrt(p^2 + q^2) <= 0, with equality only when q = 0.
    pub delta_tel_min: f64,
    /// Curvature at the optimum, sqrt(p^2 + q^2) = p - delta_tel_min.
    pub f_second_deriv: f64,
    pub critical_temperature: f64,
    pub concurrence: f64,
    /// [lambda1, lambda2, lambda+, lambda-] of the partial transpose.
    pub pt_eigs: [f64; 4],
    /// Best extraction starting from |psi+>: (alpha + sqrt(alpha^2 + B^2))/2.
    pub e_plus_extract: f64,
    /// Best extraction in the T -> 0 entangled-ground limit:
    /// (sqrt(alpha^2 + B^2) - alpha)/2.
    pub e_ground_extract: f64,
    /// Boxed minimum of the product-state run: (B - sqrt(B^2 + alpha^2))/2.
    pub qee_min: f64,
}

pub fn evaluate(params: &ModelParams) -> Result<ClosedFormBundle> {
    params.validate()?;
    let (p, q) = thermal_pq(params);
    let minimum = delta_tel_min(p, q);
    let root = p.hypot(q);
    Ok(ClosedFormBundle {
        delta_inf: p,
        p,
        q,
        t0: q.atan2(p),
        delta_tel_min: minimum,
        f_second_deriv: root,
        critical_temperature: critical_temperature(params.alpha),
        concurrence: thermal_concurrence(params),
        pt_eigs: thermal_pt_eigenvalues(params),
        e_plus_extract: (params.alpha + params.alpha.hypot(params.b)) / 2.0,
        e_ground_extract: (params.alpha.hypot(params.b) - params.alpha) / 2.0,
        qee_min: (params.b - params.b.hypot(params.alpha)) / 2.0,
    })
}

/// Product-state energy-change curve (B/2)(1 - cos(2 theta)) +
/// (alpha/2) sin(2 theta).
pub fn qee_curve(b: f64, alpha: f64, theta: f64) -> f64 {
    let t = 2.0 * theta;
    b / 2.0 * (1.0 - t.cos()) + alpha / 2.0 * t.sin()
}
