//! The measurement -> classical communication -> conditional rotation
//! pipeline, with a complete energy ledger for every stage.
//!
//! Alice measures her qubit along frame-x, the outcome is communicated, and
//! Bob rotates his qubit by theta around a chosen axis with the sign of the
//! rotation conditioned on the outcome. For any initial state the energy
//! change after Bob's stage is exactly of the form
//! p (1 - cos 2 theta) - q sin 2 theta, so two pipeline evaluations recover
//! (p, q) and with them the exact optimal angle. Communication is treated as
//! instantaneous: no dynamics run between the stages.

use crate::closedform;
use crate::optim::{fibonacci_sphere, nelder_mead};
use crate::qmatrix::{
    kron, trace_product, ComplexMatrix, DensityMatrix, C64, HERMITICITY_TOL,
};
use crate::xy_model::{
    bell_plus, build_hamiltonian, frame_x, frame_y, frame_z, ket_00, thermal_state, ModelParams,
};
use crate::{Error, Result};

/// Measurement outcome k = +1 or k = -1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }
}

/// Alice's two projectors (I + k frame_x)/2 acting on qubit A.
#[derive(Debug, Clone)]
pub struct MeasurementSet {
    operators: [ComplexMatrix; 2],
}

impl MeasurementSet {
    /// The frame-x projective measurement used throughout the protocol.
    pub fn frame_x_projectors() -> Self {
        let i2 = ComplexMatrix::identity(2).unwrap();
        let build = |k: f64| {
            let local = i2.add(&frame_x().scale(k)).unwrap().scale(0.5);
            kron(&local, &i2).unwrap()
        };
        Self {
            operators: [build(1.0), build(-1.0)],
        }
    }

    /// Validates completeness and that each operator is a Hermitian
    /// idempotent, then accepts an arbitrary pair.
    pub fn new(operators: [ComplexMatrix; 2]) -> Result<Self> {
        let set = Self { operators };
        let defect = set.completeness_defect()?;
        if defect > HERMITICITY_TOL {
            return Err(Error::InvalidParams(format!(
                "measurement operators do not resolve the identity (defect {defect:.3e})"
            )));
        }
        for op in &set.operators {
            if op.hermiticity_defect() > HERMITICITY_TOL {
                return Err(Error::InvalidParams(
                    "measurement operator is not Hermitian".into(),
                ));
            }
            if op.mul(op)?.max_abs_diff(op) > HERMITICITY_TOL {
                return Err(Error::InvalidParams(
                    "measurement operator is not idempotent".into(),
                ));
            }
        }
        Ok(set)
    }

    pub fn operator(&self, k: Outcome) -> &ComplexMatrix {
        match k {
            Outcome::Plus => &self.operators[0],
            Outcome::Minus => &self.operators[1],
        }
    }

    /// Largest entry of sum_k M_k^dagger M_k - I.
    pub fn completeness_defect(&self) -> Result<f64> {
        let mut sum = ComplexMatrix::zeros(4)?;
        for op in &self.operators {
            sum = sum.add(&op.adjoint().mul(op)?)?;
        }
        Ok(sum.max_abs_diff(&ComplexMatrix::identity(4)?))
    }
}

/// Bob's conditional rotation: U = cos(theta) I + i k (axis . frame) sin(theta)
/// on qubit B, with the axis expressed in the model's spin frame.
#[derive(Debug, Clone, Copy)]
pub struct LoccUnitary {
    pub theta: f64,
    pub axis: [f64; 3],
    pub k: Outcome,
}

fn check_axis(axis: [f64; 3]) -> Result<()> {
    let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    if (norm - 1.0).abs() > HERMITICITY_TOL {
        return Err(Error::AxisNotUnit(norm));
    }
    Ok(())
}

fn axis_generator(axis: [f64; 3]) -> ComplexMatrix {
    frame_x()
        .scale(axis[0])
        .add(&frame_y().scale(axis[1]))
        .unwrap()
        .add(&frame_z().scale(axis[2]))
        .unwrap()
}

/// The frame-y axis singled out by the optimization in this model.
pub const Y_AXIS: [f64; 3] = [0.0, 1.0, 0.0];

/// Default lattice size for the coarse stage of [`optimize_axis`].
pub const DEFAULT_AXIS_GRID: usize = 2000;

impl LoccUnitary {
    pub fn new(theta: f64, axis: [f64; 3], k: Outcome) -> Result<Self> {
        check_axis(axis)?;
        Ok(Self { theta, axis, k })
    }

    /// Single-qubit rotation matrix.
    pub fn local_operator(&self) -> ComplexMatrix {
        let i2 = ComplexMatrix::identity(2).unwrap();
        let generator = axis_generator(self.axis);
        i2.scale(self.theta.cos()).add(
            &generator.scale_c(C64::new(0.0, self.k.sign() * self.theta.sin())),
        )
        .unwrap()
    }

    /// Rotation acting on the full register, I (x) U.
    pub fn operator(&self) -> ComplexMatrix {
        kron(&ComplexMatrix::identity(2).unwrap(), &self.local_operator()).unwrap()
    }

    /// Largest entry of U U^dagger - I.
    pub fn unitarity_defect(&self) -> f64 {
        let u = self.operator();
        u.mul(&u.adjoint())
            .unwrap()
            .max_abs_diff(&ComplexMatrix::identity(4).unwrap())
    }
}

/// One model instance: the epsilon = 0 Hamiltonian (all ledger entries are
/// offset-free) plus the fixed measurement.
#[derive(Debug, Clone)]
pub struct Pipeline {
    params: ModelParams,
    hamiltonian: ComplexMatrix,
    measurement: MeasurementSet,
}

impl Pipeline {
    pub fn new(params: ModelParams) -> Result<Self> {
        let ledger_params = ModelParams {
            epsilon: 0.0,
            ..params
        };
        Ok(Self {
            hamiltonian: build_hamiltonian(&ledger_params)?,
            measurement: MeasurementSet::frame_x_projectors(),
            params,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn measurement(&self) -> &MeasurementSet {
        &self.measurement
    }

    /// tr(H m) for any operator m.
    pub fn energy_of(&self, m: &ComplexMatrix) -> f64 {
        trace_product(&self.hamiltonian, m).unwrap().re
    }

    /// Unnormalized post-measurement branches M_k rho M_k.
    pub fn measured_branches(&self, rho: &DensityMatrix) -> [ComplexMatrix; 2] {
        let branch = |k: Outcome| {
            let m = self.measurement.operator(k);
            m.mul(rho.matrix()).unwrap().mul(&m.adjoint()).unwrap()
        };
        [branch(Outcome::Plus), branch(Outcome::Minus)]
    }

    /// Non-selective measurement: rho_A = sum_k M_k rho M_k and its energy.
    pub fn measure(&self, rho: &DensityMatrix) -> Result<(DensityMatrix, f64)> {
        let [plus, minus] = self.measured_branches(rho);
        let rho_a = DensityMatrix::new(plus.add(&minus)?)?;
        let energy = self.energy_of(rho_a.matrix());
        Ok((rho_a, energy))
    }

    /// Conditional rotation of both branches:
    /// rho_B = sum_k U(theta, k) M_k rho M_k U(theta, k)^dagger.
    pub fn apply_locc(
        &self,
        branches: &[ComplexMatrix; 2],
        theta: f64,
        axis: [f64; 3],
    ) -> Result<(DensityMatrix, f64)> {
        check_axis(axis)?;
        let mut rho_b = ComplexMatrix::zeros(4)?;
        for (k, branch) in Outcome::BOTH.iter().zip(branches) {
            let u = LoccUnitary::new(theta, axis, *k)?.operator();
            rho_b = rho_b.add(&branch.conjugate_with(&u)?)?;
        }
        let rho_b = DensityMatrix::new(rho_b)?;
        let energy = self.energy_of(rho_b.matrix());
        Ok((rho_b, energy))
    }

    /// E_B(t) - E_A for doubled angle t, without any state validation;
    /// the fast path behind the optimizers.
    pub fn delta_tel_at(&self, branches: &[ComplexMatrix; 2], axis: [f64; 3], t: f64) -> f64 {
        let theta = t / 2.0;
        let e_a: f64 = branches.iter().map(|b| self.energy_of(b)).sum();
        let mut e_b = 0.0;
        for (k, branch) in Outcome::BOTH.iter().zip(branches) {
            let u = LoccUnitary {
                theta,
                axis,
                k: *k,
            }
            .operator();
            e_b += self.energy_of(&branch.conjugate_with(&u).unwrap());
        }
        e_b - e_a
    }

    /// Exact response coefficients (p, q) of the angle curve
    /// dE(t) = p (1 - cos t) - q sin t, read off from two evaluations.
    pub fn angle_response(&self, branches: &[ComplexMatrix; 2], axis: [f64; 3]) -> (f64, f64) {
        let p = self.delta_tel_at(branches, axis, std::f64::consts::PI) / 2.0;
        let q = p - self.delta_tel_at(branches, axis, std::f64::consts::FRAC_PI_2);
        (p, q)
    }
}

/// Energy injected by the measurement on the thermal state, computed from
/// the density-matrix pipeline (the sinh closed form is its oracle).
pub fn delta_inf(params: &ModelParams) -> Result<f64> {
    let pipeline = Pipeline::new(*params)?;
    let rho = thermal_state(params)?;
    let e_initial = pipeline.energy_of(rho.matrix());
    let (_, e_a) = pipeline.measure(&rho)?;
    Ok(e_a - e_initial)
}

/// Optimal doubled angle t0 = atan2(q, p) and theta0 = t0/2 for the thermal
/// run; the branch choice keeps cos(t0) and sin(t0) aligned with p and q.
pub fn optimal_angle(params: &ModelParams) -> Result<(f64, f64)> {
    let (p, q) = closedform::thermal_pq(params);
    if p == 0.0 && q == 0.0 {
        return Err(Error::DegenerateAngle);
    }
    let t0 = q.atan2(p);
    Ok((t0, t0 / 2.0))
}

/// Central finite-difference second derivative of the simulated angle curve
/// at t0 (step 1e-4); positive at a minimum and equal to sqrt(p^2 + q^2).
pub fn verify_minimum(params: &ModelParams, t0: f64) -> Result<f64> {
    let pipeline = Pipeline::new(*params)?;
    let rho = thermal_state(params)?;
    let branches = pipeline.measured_branches(&rho);
    let f = |t: f64| pipeline.delta_tel_at(&branches, Y_AXIS, t);
    let h = 1e-4;
    Ok((f(t0 + h) - 2.0 * f(t0) + f(t0 - h)) / (h * h))
}

/// Result of the joint (axis, angle) minimization of the energy change.
#[derive(Debug, Clone, Copy)]
pub struct AxisOptimum {
    pub axis: [f64; 3],
    /// Minimized E_B - E_A (non-positive).
    pub delta_tel: f64,
    /// Doubled rotation angle achieving the minimum, in [0, pi].
    pub t0: f64,
    pub theta0: f64,
    /// Set at B = alpha where both frame-y poles extract exactly nothing.
    pub tie: bool,
}

/// Minimum of dE(t) = p(1 - cos t) - q sin t over t in [0, pi].
///
/// The angle is restricted to a half period so that the sign of the axis is
/// meaningful; the reflected axis with the reflected angle realizes the same
/// rotation.
fn restricted_angle_minimum(p: f64, q: f64) -> (f64, f64) {
    let mut best = (0.0, 0.0); // (value, t)
    let flipped = (2.0 * p, std::f64::consts::PI);
    if flipped.0 < best.0 {
        best = flipped;
    }
    if q >= 0.0 {
        let interior = (closedform::delta_tel_min(p, q), q.atan2(p));
        if interior.0 <= best.0 {
            best = interior;
        }
    }
    best
}

/// Joint numeric minimization of the energy change over the unit sphere of
/// rotation axes and the angle: Fibonacci lattice scan, Nelder-Mead
/// refinement on the sphere, then a snap of near-zero components.
pub fn optimize_axis(params: &ModelParams, grid_resolution: usize) -> Result<AxisOptimum> {
    let pipeline = Pipeline::new(*params)?;
    let rho = thermal_state(params)?;
    let branches = pipeline.measured_branches(&rho);

    let evaluate = |axis: [f64; 3]| -> (f64, f64) {
        let (p, q) = pipeline.angle_response(&branches, axis);
        restricted_angle_minimum(p, q)
    };

    let mut best_axis = [0.0, 1.0, 0.0];
    let mut best = evaluate(best_axis);
    for axis in fibonacci_sphere(grid_resolution.max(16)) {
        let value = evaluate(axis);
        if value.0 < best.0 {
            best = value;
            best_axis = axis;
        }
    }

    // Local refinement in the tangent plane of the best lattice point.
    let (e1, e2) = tangent_basis(best_axis);
    let objective = |u: &[f64]| {
        let axis = normalize([
            best_axis[0] + u[0] * e1[0] + u[1] * e2[0],
            best_axis[1] + u[0] * e1[1] + u[1] * e2[1],
            best_axis[2] + u[0] * e1[2] + u[1] * e2[2],
        ]);
        evaluate(axis).0
    };
    let (u_opt, refined_value) = nelder_mead(objective, &[0.0, 0.0], 0.2, 1e-15, 400);
    let mut axis = normalize([
        best_axis[0] + u_opt[0] * e1[0] + u_opt[1] * e2[0],
        best_axis[1] + u_opt[0] * e1[1] + u_opt[1] * e2[1],
        best_axis[2] + u_opt[0] * e1[2] + u_opt[1] * e2[2],
    ]);
    let mut value = evaluate(axis);

    // The stationarity conditions force the optimum onto a coordinate pole;
    // snap residual components below 1e-6 when that does not cost anything.
    let snapped: [f64; 3] = {
        let mut s = axis;
        for c in s.iter_mut() {
            if c.abs() < 1e-6 {
                *c = 0.0;
            }
        }
        s
    };
    let norm = (snapped[0] * snapped[0] + snapped[1] * snapped[1] + snapped[2] * snapped[2]).sqrt();
    if norm > 0.5 {
        let snapped = [snapped[0] / norm, snapped[1] / norm, snapped[2] / norm];
        let snapped_value = evaluate(snapped);
        if snapped_value.0 <= refined_value + 1e-12 {
            axis = snapped;
            value = snapped_value;
        }
    }

    let plus_pole = evaluate([0.0, 1.0, 0.0]).0;
    let minus_pole = evaluate([0.0, -1.0, 0.0]).0;
    let tie = (plus_pole - minus_pole).abs() < 1e-12;

    Ok(AxisOptimum {
        axis,
        delta_tel: value.0,
        t0: value.1,
        theta0: value.1 / 2.0,
        tie,
    })
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn tangent_basis(axis: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let helper = if axis[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let e1 = normalize([
        axis[1] * helper[2] - axis[2] * helper[1],
        axis[2] * helper[0] - axis[0] * helper[2],
        axis[0] * helper[1] - axis[1] * helper[0],
    ]);
    let e2 = [
        axis[1] * e1[2] - axis[2] * e1[1],
        axis[2] * e1[0] - axis[0] * e1[2],
        axis[0] * e1[1] - axis[1] * e1[0],
    ];
    (e1, e2)
}

/// Residuals of the constrained stationarity system for the axis search:
/// three gradient components with the multiplier eliminated by projection,
/// plus the unit-norm constraint.
pub fn lagrange_residuals(params: &ModelParams, axis: [f64; 3], t: f64) -> [f64; 4] {
    let (a, k) = closedform::thermal_sinh_ratios(params);
    let (b, alpha) = (params.b, params.alpha);
    let c = 1.0 - t.cos();
    let s = t.sin();
    let g = [
        (b * a * c - alpha * k * c) * axis[0],
        (b * a * c + alpha * k * c) * axis[1] + alpha * a * s - b * k * s,
        (-b * a * c + alpha * k * c) * axis[2],
    ];
    let lambda = -(g[0] * axis[0] + g[1] * axis[1] + g[2] * axis[2]) / 2.0;
    [
        g[0] + 2.0 * lambda * axis[0],
        g[1] + 2.0 * lambda * axis[1],
        g[2] + 2.0 * lambda * axis[2],
        axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2] - 1.0,
    ]
}

/// Thermal-only diagnostic coefficients of the rotated level energies.
#[derive(Debug, Clone, Copy)]
pub struct AxisOptimizationRecord {
    pub axis: [f64; 3],
    /// sinh(beta B)/Z.
    pub boltzmann_field: f64,
    /// sinh(beta alpha)/Z.
    pub boltzmann_coupling: f64,
    /// 1 - cos(t0).
    pub one_minus_cos_t0: f64,
    pub sin_t0: f64,
    /// (cos(t0) B - sin(t0) alpha)/4, the rotated field-level coefficient.
    pub rotated_field_coeff: f64,
    /// (cos(t0) alpha + sin(t0) B)/4, the rotated coupling-level coefficient.
    pub rotated_coupling_coeff: f64,
}

/// Full energy ledger of one protocol run. All energies use the epsilon = 0
/// Hamiltonian; differences are offset-independent anyway.
#[derive(Debug, Clone)]
pub struct ProtocolTrace {
    pub e_initial: f64,
    pub e_after_measurement: f64,
    pub e_after_locc: f64,
    /// E after measurement minus E initial.
    pub delta_inf: f64,
    /// E after the conditional rotation minus E after measurement.
    pub delta_tel: f64,
    /// max(0, -delta_tel): a suboptimal angle never reports extraction.
    pub delta_extract: f64,
    pub theta_opt: f64,
    pub t0: f64,
    /// Angle-response coefficients; thermal runs carry the sinh closed
    /// forms, pure-state runs the coefficients read off the pipeline.
    pub p: f64,
    pub q: f64,
    pub rho_after_measurement: DensityMatrix,
    pub rho_final: DensityMatrix,
    pub axis_record: Option<AxisOptimizationRecord>,
}

fn run_pipeline(
    pipeline: &Pipeline,
    rho0: &DensityMatrix,
    p: f64,
    q: f64,
    axis_record: Option<AxisOptimizationRecord>,
) -> Result<ProtocolTrace> {
    let e_initial = pipeline.energy_of(rho0.matrix());
    let (rho_a, e_a) = pipeline.measure(rho0)?;
    let branches = pipeline.measured_branches(rho0);
    if p == 0.0 && q == 0.0 {
        return Err(Error::DegenerateAngle);
    }
    let t0 = q.atan2(p);
    let theta0 = t0 / 2.0;
    let (rho_b, e_b) = pipeline.apply_locc(&branches, theta0, Y_AXIS)?;
    let delta_tel = e_b - e_a;
    Ok(ProtocolTrace {
        e_initial,
        e_after_measurement: e_a,
        e_after_locc: e_b,
        delta_inf: e_a - e_initial,
        delta_tel,
        delta_extract: (-delta_tel).max(0.0),
        theta_opt: theta0,
        t0,
        p,
        q,
        rho_after_measurement: rho_a,
        rho_final: rho_b,
        axis_record,
    })
}

/// The thermal run: Gibbs state in, optimally rotated state out.
pub fn run_thermal_qet(params: &ModelParams) -> Result<ProtocolTrace> {
    let pipeline = Pipeline::new(*params)?;
    let rho0 = thermal_state(params)?;
    let (p, q) = closedform::thermal_pq(params);
    let t0 = q.atan2(p);
    let (a, k) = closedform::thermal_sinh_ratios(params);
    let record = AxisOptimizationRecord {
        axis: Y_AXIS,
        boltzmann_field: a,
        boltzmann_coupling: k,
        one_minus_cos_t0: 1.0 - t0.cos(),
        sin_t0: t0.sin(),
        rotated_field_coeff: (t0.cos() * params.b - t0.sin() * params.alpha) / 4.0,
        rotated_coupling_coeff: (t0.cos() * params.alpha + t0.sin() * params.b) / 4.0,
    };
    run_pipeline(&pipeline, &rho0, p, q, Some(record))
}

/// The run starting from the excited Bell state |psi+>: Alice's measurement
/// stage lowers the energy by alpha/2 and Bob's optimized rotation extracts
/// (alpha + sqrt(alpha^2 + B^2))/2.
pub fn run_excited_qet(params: &ModelParams) -> Result<ProtocolTrace> {
    let pipeline = Pipeline::new(*params)?;
    let rho0 = DensityMatrix::from_ket(&bell_plus())?;
    let branches = pipeline.measured_branches(&rho0);
    let (p, q) = pipeline.angle_response(&branches, Y_AXIS);
    run_pipeline(&pipeline, &rho0, p, q, None)
}

/// The three pieces of the positive-semidefinite split H_A + H_B + V with
/// the epsilon = B offset folded into the site terms.
#[derive(Debug, Clone)]
pub struct QeeBreakdown {
    /// tr(H_A rho_A): B/2 after the measurement on |00>.
    pub e_site_a: f64,
    /// tr(H_B rho_A): zero, Bob's site is untouched by the measurement.
    pub e_site_b: f64,
    /// tr(V rho_A): zero for the product ground state.
    pub e_interaction: f64,
    pub h_site_a: ComplexMatrix,
    pub h_site_b: ComplexMatrix,
    pub h_interaction: ComplexMatrix,
}

/// Site-split operators: H_A = (B/2)(I + z_A), H_B = (B/2)(I + z_B), and the
/// exchange V, using the frame-z whose ground state is |0>.
pub fn qee_split(params: &ModelParams) -> Result<(ComplexMatrix, ComplexMatrix, ComplexMatrix)> {
    params.validate()?;
    let i2 = ComplexMatrix::identity(2)?;
    let i4 = ComplexMatrix::identity(4)?;
    let h_a = i4.add(&kron(&frame_z(), &i2)?)?.scale(params.b / 2.0);
    let h_b = i4.add(&kron(&i2, &frame_z())?)?.scale(params.b / 2.0);
    let v = kron(&crate::xy_model::frame_plus(), &crate::xy_model::frame_minus())?
        .add(&kron(
            &crate::xy_model::frame_minus(),
            &crate::xy_model::frame_plus(),
        )?)?
        .scale(params.alpha);
    Ok((h_a, h_b, v))
}

/// The product-state run: |00> in, requires B > alpha so that |00> is the
/// ground state. Returns the ledger plus the site-wise energy breakdown of
/// the measurement stage.
pub fn run_product_qee(params: &ModelParams) -> Result<(ProtocolTrace, QeeBreakdown)> {
    params.validate()?;
    if params.b <= params.alpha {
        return Err(Error::GroundStateNotProduct {
            b: params.b,
            alpha: params.alpha,
        });
    }
    let pipeline = Pipeline::new(*params)?;
    let rho0 = DensityMatrix::from_ket(&ket_00())?;
    let branches = pipeline.measured_branches(&rho0);
    let (p, q) = pipeline.angle_response(&branches, Y_AXIS);
    let trace = run_pipeline(&pipeline, &rho0, p, q, None)?;

    let (h_a, h_b, v) = qee_split(params)?;
    let rho_a = trace.rho_after_measurement.matrix();
    let breakdown = QeeBreakdown {
        e_site_a: trace_product(&h_a, rho_a)?.re,
        e_site_b: trace_product(&h_b, rho_a)?.re,
        e_interaction: trace_product(&v, rho_a)?.re,
        h_site_a: h_a,
        h_site_b: h_b,
        h_interaction: v,
    };
    Ok((trace, breakdown))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmatrix::outer;
    use crate::xy_model::bell_minus;

    fn params(b: f64, alpha: f64, t: f64) -> ModelParams {
        ModelParams::new(b, alpha, t).unwrap()
    }

    fn reference() -> ModelParams {
        params(0.5, 1.0, 0.5)
    }

    #[test]
    fn measurement_set_is_complete_and_projective() {
        let set = MeasurementSet::frame_x_projectors();
        assert!(set.completeness_defect().unwrap() == 0.0);
        for k in Outcome::BOTH {
            let m = set.operator(k);
            assert!(m.hermiticity_defect() == 0.0);
            assert!(m.mul(m).unwrap().max_abs_diff(m) < 1e-15);
        }
        // The validating constructor accepts its own operators.
        assert!(MeasurementSet::new([
            set.operator(Outcome::Plus).clone(),
            set.operator(Outcome::Minus).clone()
        ])
        .is_ok());
        // ...and rejects a non-complete pair.
        let half = set.operator(Outcome::Plus).scale(0.5);
        assert!(MeasurementSet::new([half.clone(), half]).is_err());
    }

    #[test]
    fn locc_unitary_is_unitary() {
        for (theta, axis) in [
            (0.3, [0.0, 1.0, 0.0]),
            (1.2, [1.0, 0.0, 0.0]),
            (-0.7, [0.6, 0.0, 0.8]),
        ] {
            for k in Outcome::BOTH {
                let u = LoccUnitary::new(theta, axis, k).unwrap();
                assert!(u.unitarity_defect() < 1e-15);
            }
        }
        assert!(matches!(
            LoccUnitary::new(0.3, [0.0, 2.0, 0.0], Outcome::Plus),
            Err(Error::AxisNotUnit(_))
        ));

        // apply_locc rejects the same bad axis.
        let prm = reference();
        let pipeline = Pipeline::new(prm).unwrap();
        let rho = thermal_state(&prm).unwrap();
        let branches = pipeline.measured_branches(&rho);
        assert!(matches!(
            pipeline.apply_locc(&branches, 0.3, [0.0, 2.0, 0.0]),
            Err(Error::AxisNotUnit(_))
        ));
    }

    #[test]
    fn measure_reference_energy() {
        let pipeline = Pipeline::new(reference()).unwrap();
        let rho = thermal_state(&reference()).unwrap();
        let (rho_a, e_a) = pipeline.measure(&rho).unwrap();
        // Oracle: E_A = -p with p from the sinh closed form.
        let (p, _) = closedform::thermal_pq(&reference());
        assert!((e_a + p).abs() < 1e-14);
        assert!((e_a + 0.39720).abs() < 1e-5);
        assert!((rho_a.matrix().trace().re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn measure_fixes_maximally_mixed() {
        let pipeline = Pipeline::new(reference()).unwrap();
        let quarter =
            DensityMatrix::new(ComplexMatrix::identity(4).unwrap().scale(0.25)).unwrap();
        let (rho_a, e_a) = pipeline.measure(&quarter).unwrap();
        assert!(rho_a.matrix().max_abs_diff(quarter.matrix()) < 1e-15);
        assert!(e_a.abs() < 1e-15);
    }

    #[test]
    fn delta_inf_simulation_matches_closed_form() {
        let d = delta_inf(&reference()).unwrap();
        let (p, _) = closedform::thermal_pq(&reference());
        assert!((d - p).abs() < 1e-12);
        assert!((d - 0.39720).abs() < 1e-5);

        // Symmetric point: 2 B sinh(beta B)/Z.
        let sym = params(0.8, 0.8, 0.4);
        let d_sym = delta_inf(&sym).unwrap();
        let beta = 2.5;
        let z = 4.0 * (beta * 0.8f64).cosh();
        assert!((d_sym - 2.0 * 0.8 * (beta * 0.8f64).sinh() / z).abs() < 1e-12);

        // Infinite-temperature proxy.
        assert!(delta_inf(&params(0.5, 1.0, 1e6)).unwrap().abs() < 1e-5);
    }

    #[test]
    fn locc_identity_angle_is_a_no_op() {
        let pipeline = Pipeline::new(reference()).unwrap();
        let rho = thermal_state(&reference()).unwrap();
        let branches = pipeline.measured_branches(&rho);
        let (rho_a, e_a) = pipeline.measure(&rho).unwrap();
        let (rho_b, e_b) = pipeline.apply_locc(&branches, 0.0, Y_AXIS).unwrap();
        assert!(rho_b.matrix().max_abs_diff(rho_a.matrix()) == 0.0);
        assert!(e_b == e_a);
    }

    #[test]
    fn locc_optimal_angle_reference_value() {
        let pipeline = Pipeline::new(reference()).unwrap();
        let rho = thermal_state(&reference()).unwrap();
        let branches = pipeline.measured_branches(&rho);
        let (_, e_a) = pipeline.measure(&rho).unwrap();
        let (t0, theta0) = optimal_angle(&reference()).unwrap();
        let (p, q) = closedform::thermal_pq(&reference());
        assert!((q / p - t0.tan()).abs() < 1e-15);
        assert!((q / p - 0.15143).abs() < 2e-5);

        let (_, e_b) = pipeline.apply_locc(&branches, theta0, Y_AXIS).unwrap();
        let expected = closedform::delta_tel_min(p, q);
        assert!((e_b - e_a - expected).abs() < 1e-13);
        assert!((e_b - e_a + 0.00453).abs() < 2e-6);
    }

    #[test]
    fn locc_outcome_relabeling_is_inert() {
        // Summing the channel in the opposite outcome order changes nothing.
        let pipeline = Pipeline::new(reference()).unwrap();
        let rho = thermal_state(&reference()).unwrap();
        let [plus, minus] = pipeline.measured_branches(&rho);
        let theta = 0.37;
        let direct = pipeline.apply_locc(&[plus.clone(), minus.clone()], theta, Y_AXIS).unwrap();

        let mut swapped = ComplexMatrix::zeros(4).unwrap();
        for (k, branch) in [Outcome::Minus, Outcome::Plus].iter().zip([minus, plus]) {
            let u = LoccUnitary::new(theta, Y_AXIS, *k).unwrap().operator();
            swapped = swapped.add(&branch.conjugate_with(&u).unwrap()).unwrap();
        }
        assert!(direct.0.matrix().max_abs_diff(&swapped) < 1e-15);
    }

    #[test]
    fn optimal_angle_degenerate_cases() {
        // B = alpha: q = 0 exactly, zero angle, zero extraction.
        let sym = params(0.8, 0.8, 0.4);
        let (t0, _) = optimal_angle(&sym).unwrap();
        assert!(t0 == 0.0);
        let trace = run_thermal_qet(&sym).unwrap();
        assert!(trace.delta_extract == 0.0);

        // B = 0: q = 0 as well.
        let zero_field = params(0.0, 1.0, 0.5);
        let (t0, _) = optimal_angle(&zero_field).unwrap();
        assert!(t0 == 0.0);
        assert!(run_thermal_qet(&zero_field).unwrap().delta_extract == 0.0);
    }

    #[test]
    fn second_derivative_matches_curvature() {
        let (t0, _) = optimal_angle(&reference()).unwrap();
        let fpp = verify_minimum(&reference(), t0).unwrap();
        let (p, q) = closedform::thermal_pq(&reference());
        assert!(fpp > 0.0);
        assert!((fpp - p.hypot(q)).abs() < 1e-6);
        assert!((fpp - 0.40173).abs() < 2e-5);

        // Symmetric point: curvature reduces to p.
        let sym = params(0.8, 0.8, 0.4);
        let (t0_sym, _) = optimal_angle(&sym).unwrap();
        let fpp_sym = verify_minimum(&sym, t0_sym).unwrap();
        let (p_sym, _) = closedform::thermal_pq(&sym);
        assert!((fpp_sym - p_sym).abs() < 1e-6);
    }

    #[test]
    fn thermal_trace_ledger_is_consistent() {
        let trace = run_thermal_qet(&reference()).unwrap();
        assert!((trace.delta_inf - trace.p).abs() < 1e-12);
        assert!((trace.delta_tel - closedform::delta_tel_min(trace.p, trace.q)).abs() < 1e-13);
        assert!((trace.delta_extract - 0.00453).abs() < 2e-6);
        assert!(trace.delta_tel <= 0.0);
        assert!((trace.e_after_locc - trace.e_after_measurement - trace.delta_tel).abs() == 0.0);
        let record = trace.axis_record.unwrap();
        assert_eq!(record.axis, Y_AXIS);
        // E_B rebuilt from the diagnostic coefficients.
        let e_b = -4.0 * record.rotated_field_coeff * record.boltzmann_field
            - 4.0 * record.rotated_coupling_coeff * record.boltzmann_coupling;
        assert!((e_b - trace.e_after_locc).abs() < 1e-12);
    }

    #[test]
    fn thermal_ground_limit() {
        let trace = run_thermal_qet(&params(0.5, 1.0, 1e-3)).unwrap();
        let expected = (1.25f64.sqrt() - 1.0) / 2.0;
        assert!((trace.delta_extract - expected).abs() < 1e-4);
        assert!((trace.delta_extract - 0.059017).abs() < 1e-4);
    }

    #[test]
    fn excited_run_values() {
        let trace = run_excited_qet(&reference()).unwrap();
        // Alice's stage change is -alpha/2: she extracts energy.
        assert!((trace.delta_inf + 0.5).abs() < 1e-12);
        assert!((trace.e_initial - 1.0).abs() < 1e-14);
        assert!((trace.delta_extract - 1.059017).abs() < 1e-6);
        let closed = (1.0 + 1.25f64.sqrt()) / 2.0;
        assert!((trace.delta_extract - closed).abs() < 1e-10);
    }

    #[test]
    fn excited_run_zero_field() {
        let trace = run_excited_qet(&params(0.0, 1.0, 0.5)).unwrap();
        assert!((trace.delta_extract - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qee_run_reference_values() {
        let (trace, breakdown) = run_product_qee(&params(1.0, 0.6, 0.5)).unwrap();
        assert!((breakdown.e_site_a - 0.5).abs() < 1e-12);
        assert!(breakdown.e_site_b.abs() < 1e-12);
        assert!(breakdown.e_interaction.abs() < 1e-12);
        let expected = (1.36f64.sqrt() - 1.0) / 2.0;
        assert!((trace.delta_extract - expected).abs() < 1e-10);
        assert!((trace.delta_extract - 0.083095).abs() < 1e-5);

        // Site split reassembles the offset Hamiltonian and accounts for
        // the whole measurement energy.
        let h_eps_b = build_hamiltonian(&ModelParams::with_epsilon(1.0, 0.6, 1.0, 0.5).unwrap())
            .unwrap();
        let sum = breakdown
            .h_site_a
            .add(&breakdown.h_site_b)
            .unwrap()
            .add(&breakdown.h_interaction)
            .unwrap();
        assert!(sum.max_abs_diff(&h_eps_b) < 1e-15);
        let e_a_offset = trace_product(&sum, trace.rho_after_measurement.matrix())
            .unwrap()
            .re;
        let total = breakdown.e_site_a + breakdown.e_site_b + breakdown.e_interaction;
        assert!((total - e_a_offset).abs() < 1e-12);
    }

    #[test]
    fn qee_curve_matches_closed_form_everywhere() {
        let p = params(1.0, 0.6, 0.5);
        let pipeline = Pipeline::new(p).unwrap();
        let rho0 = DensityMatrix::from_ket(&ket_00()).unwrap();
        let branches = pipeline.measured_branches(&rho0);
        for i in 0..50 {
            let theta = -1.5 + 3.0 * (i as f64) / 49.0;
            let sim = pipeline.delta_tel_at(&branches, Y_AXIS, 2.0 * theta);
            let closed = closedform::qee_curve(1.0, 0.6, theta);
            assert!((sim - closed).abs() < 1e-12);
        }
    }

    #[test]
    fn qee_rejects_wrong_ordering() {
        assert!(matches!(
            run_product_qee(&params(0.5, 1.0, 0.5)),
            Err(Error::GroundStateNotProduct { .. })
        ));
        assert!(run_product_qee(&params(0.8, 0.8, 0.5)).is_err());
    }

    #[test]
    fn hamiltonian_frame_y_commutator() {
        // [H, y_B] = -i B x_B + i alpha x_A z_B in the spin frame.
        let p = params(1.0, 0.6, 0.5);
        let h = build_hamiltonian(&p).unwrap();
        let i2 = ComplexMatrix::identity(2).unwrap();
        let y_b = kron(&i2, &frame_y()).unwrap();
        let commutator = h.mul(&y_b).unwrap().sub(&y_b.mul(&h).unwrap()).unwrap();

        let x_b = kron(&i2, &frame_x()).unwrap();
        let xz = kron(&frame_x(), &frame_z()).unwrap();
        let expected = x_b
            .scale_c(C64::new(0.0, -p.b))
            .add(&xz.scale_c(C64::new(0.0, p.alpha)))
            .unwrap();
        assert!(commutator.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn axis_optimization_selects_the_frame_y_pole() {
        let low_field = optimize_axis(&reference(), DEFAULT_AXIS_GRID).unwrap();
        assert!((low_field.axis[0]).abs() < 1e-6);
        assert!((low_field.axis[1] - 1.0).abs() < 1e-6);
        assert!((low_field.axis[2]).abs() < 1e-6);
        assert!(!low_field.tie);
        let (p, q) = closedform::thermal_pq(&reference());
        assert!((low_field.delta_tel - closedform::delta_tel_min(p, q)).abs() < 1e-9);

        let high_field = optimize_axis(&params(1.0, 0.5, 0.5), DEFAULT_AXIS_GRID).unwrap();
        assert!((high_field.axis[1] + 1.0).abs() < 1e-6);
        assert!(!high_field.tie);

        // Residuals of the stationarity system at the reported optimum.
        for (opt, prm) in [(low_field, reference()), (high_field, params(1.0, 0.5, 0.5))] {
            let res = lagrange_residuals(&prm, opt.axis, opt.t0);
            for r in res {
                assert!(r.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn axis_optimization_flags_the_degenerate_point() {
        let sym = optimize_axis(&params(0.8, 0.8, 0.4), 500).unwrap();
        assert!(sym.tie);
        assert!(sym.delta_tel.abs() < 1e-12);
    }

    #[test]
    fn general_axis_energy_matches_quadratic_form() {
        // Simulated dE(theta, n) against the closed quadratic form in the
        // axis components, for a scatter of axes and angles.
        let prm = reference();
        let pipeline = Pipeline::new(prm).unwrap();
        let rho = thermal_state(&prm).unwrap();
        let branches = pipeline.measured_branches(&rho);
        let (a, k) = closedform::thermal_sinh_ratios(&prm);
        let (b, alpha) = (prm.b, prm.alpha);
        for (i, axis) in fibonacci_sphere(24).into_iter().enumerate() {
            let theta = -1.4 + 0.13 * i as f64;
            let (n1, n2, n3) = (axis[0], axis[1], axis[2]);
            let sin2 = theta.sin() * theta.sin();
            let cos2 = theta.cos() * theta.cos();
            let l = -b / 4.0 * ((n1 * n1 + n2 * n2 - n3 * n3) * sin2 - cos2)
                - alpha * n2 / 4.0 * (2.0 * theta).sin();
            let m = alpha / 4.0 * ((n1 * n1 - n2 * n2 - n3 * n3) * sin2 + cos2)
                + b * n2 / 4.0 * (2.0 * theta).sin();
            let closed = (-4.0 * l + b) * a + (-4.0 * m + alpha) * k;
            let sim = pipeline.delta_tel_at(&branches, axis, 2.0 * theta);
            assert!((sim - closed).abs() < 1e-12);
        }
    }

    #[test]
    fn stage_outputs_remain_valid_states() {
        for (b, alpha, t) in [(0.5, 1.0, 0.5), (1.5, 0.6, 0.2), (0.8, 0.8, 2.0)] {
            let trace = run_thermal_qet(&params(b, alpha, t)).unwrap();
            for rho in [&trace.rho_after_measurement, &trace.rho_final] {
                assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
                assert!(rho.eigenvalues().iter().all(|&l| l > -1e-12));
            }
        }
    }

    #[test]
    fn optimality_against_random_angles() {
        let mut seed = 0x1234_5678_9abc_def0u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..10 {
            let prm = params(0.1 + 1.9 * next(), 0.3 + 1.2 * next(), 0.1 + 2.4 * next());
            let pipeline = Pipeline::new(prm).unwrap();
            let rho = thermal_state(&prm).unwrap();
            let branches = pipeline.measured_branches(&rho);
            let (t0, _) = optimal_angle(&prm).unwrap();
            let best = pipeline.delta_tel_at(&branches, Y_AXIS, t0);
            for _ in 0..200 {
                let t = (next() - 0.5) * 2.0 * std::f64::consts::PI;
                assert!(pipeline.delta_tel_at(&branches, Y_AXIS, t) >= best - 1e-12);
            }
        }
    }

    #[test]
    fn local_operators_commute() {
        // Operators on different sites commute; 50 random pairs.
        let mut seed = 0xdead_beefu64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            2.0 * ((seed >> 11) as f64 / (1u64 << 53) as f64) - 1.0
        };
        let i2 = ComplexMatrix::identity(2).unwrap();
        for _ in 0..50 {
            let mut rand2 = || {
                let mut m = ComplexMatrix::zeros(2).unwrap();
                for i in 0..2 {
                    for j in 0..2 {
                        m.set(i, j, C64::new(next(), next()));
                    }
                }
                m
            };
            let oa = kron(&rand2(), &i2).unwrap();
            let ob = kron(&i2, &rand2()).unwrap();
            let comm = oa.mul(&ob).unwrap().sub(&ob.mul(&oa).unwrap()).unwrap();
            assert!(comm.max_abs_diff(&ComplexMatrix::zeros(4).unwrap()) < 1e-13);
        }
    }

    #[test]
    fn extraction_hierarchy_at_reference_point() {
        let excited = run_excited_qet(&reference()).unwrap().delta_extract;
        let ground = run_thermal_qet(&params(0.5, 1.0, 1e-3))
            .unwrap()
            .delta_extract;
        let thermal = run_thermal_qet(&reference()).unwrap().delta_extract;
        assert!(excited > ground);
        assert!(ground > thermal);
    }

    #[test]
    fn extraction_decreases_along_the_low_field_slice() {
        let mut previous = f64::INFINITY;
        for i in 0..15 {
            let t = 0.1 + i as f64 * 0.1;
            let extract = run_thermal_qet(&params(0.3, 1.0, t)).unwrap().delta_extract;
            assert!(extract <= previous + 1e-12);
            previous = extract;
        }
    }

    #[test]
    fn pure_state_marginal_sanity() {
        // |psi-> run sanity: the measurement channel outputs a valid state.
        let pipeline = Pipeline::new(reference()).unwrap();
        let rho = DensityMatrix::new(outer(&bell_minus()).unwrap()).unwrap();
        let (rho_a, _) = pipeline.measure(&rho).unwrap();
        assert!((rho_a.matrix().trace().re - 1.0).abs() < 1e-13);
    }
}
