//! Runnable cross-check suite: per-module invariants plus the nine
//! acceptance criteria, each reported as a named residual against a pinned
//! tolerance.
//!
//! Every check compares two independent routes (density-matrix pipeline vs
//! scalar closed form, numeric minimizer vs analytic expression) or asserts
//! a structural invariant. The `tolerance_scale` knob exists for fault
//! injection: scaling all tolerances to zero must make the suite fail.

use std::time::Instant;

use crate::closedform;
use crate::correlations;
use crate::protocol::{
    self, lagrange_residuals, optimize_axis, run_excited_qet, run_product_qee, run_thermal_qet,
    MeasurementSet, Outcome, Pipeline, Y_AXIS,
};
use crate::qmatrix::{
    hermitian_eig, kron, partial_trace_b, partial_transpose_b, ComplexMatrix, DensityMatrix, C64,
};
use crate::xy_model::{spectral_data, thermal_state, ModelParams};

/// One named check: `passed` iff `residual <= tolerance`.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub module: &'static str,
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn check(module: &'static str, name: &str, residual: f64, tolerance: f64) -> CheckResult {
    CheckResult {
        module,
        name: name.to_string(),
        residual,
        tolerance,
        passed: residual.is_finite() && residual <= tolerance,
    }
}

/// Deterministic splitmix64 stream for randomized checks.
struct Rng(u64);

impl Rng {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    fn hermitian(&mut self, dim: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(dim).unwrap();
        for i in 0..dim {
            m.set(i, i, C64::new(self.range(-1.0, 1.0), 0.0));
            for j in (i + 1)..dim {
                let z = C64::new(self.range(-1.0, 1.0), self.range(-1.0, 1.0));
                m.set(i, j, z);
                m.set(j, i, z.conj());
            }
        }
        m
    }
}

fn params(b: f64, alpha: f64, t: f64) -> ModelParams {
    ModelParams::new(b, alpha, t).unwrap()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

// ---------------------------------------------------------------------------
// Module invariant suites
// ---------------------------------------------------------------------------

fn qmatrix_suite(out: &mut Vec<CheckResult>) {
    let mut rng = Rng(11);
    let mut involution = 0.0f64;
    let mut marginal_comm = 0.0f64;
    let mut reconstruct = 0.0f64;
    let mut gram = 0.0f64;
    let mut trace_sum = 0.0f64;
    for _ in 0..20 {
        let m = rng.hermitian(4);
        let pt = partial_transpose_b(&m).unwrap();
        involution =
            involution.max(partial_transpose_b(&pt).unwrap().max_abs_diff(&m));
        let direct = partial_trace_b(&m).unwrap();
        marginal_comm = marginal_comm.max(partial_trace_b(&pt).unwrap().max_abs_diff(&direct));

        let spec = hermitian_eig(&m).unwrap();
        reconstruct = reconstruct.max(spec.reconstruct().unwrap().max_abs_diff(&m));
        gram = gram.max(spec.gram_defect());
        let sum: f64 = spec.eigenvalues.iter().sum();
        trace_sum = trace_sum.max((sum - m.trace().re).abs());
    }
    out.push(check("qmatrix", "partial transpose involution", involution, 1e-15));
    out.push(check(
        "qmatrix",
        "B-transpose leaves the A marginal alone",
        marginal_comm,
        1e-15,
    ));
    out.push(check("qmatrix", "eigen reconstruction", reconstruct, 1e-12));
    out.push(check("qmatrix", "eigenvector orthonormality", gram, 1e-12));
    out.push(check("qmatrix", "eigenvalue sum equals trace", trace_sum, 1e-12));
}

fn xy_model_suite(out: &mut Vec<CheckResult>) {
    let mut z_residual = 0.0f64;
    let mut weight_sum = 0.0f64;
    let mut weight_spectrum = 0.0f64;
    let mut energy_formula = 0.0f64;
    for b in [0.2, 0.8, 1.6] {
        for alpha in [0.6, 1.0] {
            for t in [0.3, 1.0, 2.5] {
                let prm = params(b, alpha, t);
                let data = spectral_data(&prm).unwrap();
                let beta = prm.beta();
                let direct: f64 = data
                    .levels
                    .iter()
                    .map(|l| (-beta * l.energy).exp())
                    .sum();
                z_residual = z_residual.max((data.partition_function - direct).abs());
                let sum: f64 = data.thermal_weights.iter().sum();
                weight_sum = weight_sum.max((sum - 1.0).abs());

                let rho = thermal_state(&prm).unwrap();
                let mut weights = data.thermal_weights.clone();
                weights.sort_by(|a, b| a.partial_cmp(b).unwrap());
                for (got, want) in rho.eigenvalues().iter().zip(&weights) {
                    weight_spectrum = weight_spectrum.max((got - want).abs());
                }

                let direct_energy = crate::xy_model::energy_expectation(&prm, &rho).unwrap();
                let z = data.partition_function;
                let formula = -b * 2.0 * (beta * b).sinh() / z
                    - alpha * 2.0 * (beta * alpha).sinh() / z;
                energy_formula = energy_formula.max((direct_energy - formula).abs());
            }
        }
    }
    out.push(check("xy-model", "partition function vs level sum", z_residual, 1e-12));
    out.push(check("xy-model", "thermal weights sum to one", weight_sum, 1e-12));
    out.push(check(
        "xy-model",
        "thermal spectrum equals weights",
        weight_spectrum,
        1e-12,
    ));
    out.push(check(
        "xy-model",
        "energy expectation vs direct trace",
        energy_formula,
        1e-12,
    ));

    let base = thermal_state(&params(0.7, 0.9, 0.4)).unwrap();
    let offset = thermal_state(&ModelParams::with_epsilon(0.7, 0.9, 7.3, 0.4).unwrap()).unwrap();
    out.push(check(
        "xy-model",
        "epsilon cancels in the Gibbs state",
        base.matrix().max_abs_diff(offset.matrix()),
        1e-12,
    ));

    let cold = thermal_state(&params(0.5, 1.0, 1e-3)).unwrap();
    let bell = crate::qmatrix::outer(&crate::xy_model::bell_minus()).unwrap();
    out.push(check(
        "xy-model",
        "low-T state collapses onto the singlet",
        cold.matrix().max_abs_diff(&bell),
        1e-6,
    ));
}

fn protocol_suite(out: &mut Vec<CheckResult>) {
    let set = MeasurementSet::frame_x_projectors();
    let mut projector = set.completeness_defect().unwrap();
    for k in Outcome::BOTH {
        let m = set.operator(k);
        projector = projector.max(m.hermiticity_defect());
        projector = projector.max(m.mul(m).unwrap().max_abs_diff(m));
    }
    out.push(check(
        "protocol",
        "measurement completeness and idempotence",
        projector,
        1e-12,
    ));

    // Stage outputs stay valid states over a parameter scatter.
    let mut stage_validity = 0.0f64;
    for (b, alpha, t) in [(0.5, 1.0, 0.5), (1.5, 0.6, 0.2), (0.8, 0.8, 2.0), (0.05, 1.2, 0.05)] {
        let trace = run_thermal_qet(&params(b, alpha, t)).unwrap();
        for rho in [&trace.rho_after_measurement, &trace.rho_final] {
            stage_validity = stage_validity.max((rho.matrix().trace().re - 1.0).abs());
            stage_validity = stage_validity.max((-rho.eigenvalues()[0]).max(0.0));
        }
    }
    out.push(check(
        "protocol",
        "channel outputs are unit-trace PSD",
        stage_validity,
        1e-12,
    ));

    // Local operators on different sites commute.
    let mut rng = Rng(23);
    let i2 = ComplexMatrix::identity(2).unwrap();
    let mut commutator = 0.0f64;
    for _ in 0..50 {
        let oa = kron(&rng.hermitian(2), &i2).unwrap();
        let ob = kron(&i2, &rng.hermitian(2)).unwrap();
        let comm = oa.mul(&ob).unwrap().sub(&ob.mul(&oa).unwrap()).unwrap();
        commutator = commutator.max(comm.max_abs_diff(&ComplexMatrix::zeros(4).unwrap()));
    }
    out.push(check("protocol", "local operators commute", commutator, 1e-13));

    // Optimality of the closed-form angle against random angles.
    let mut optimality = 0.0f64;
    for _ in 0..10 {
        let prm = params(
            rng.range(0.05, 2.0),
            rng.range(0.3, 1.4),
            rng.range(0.1, 2.5),
        );
        let pipeline = Pipeline::new(prm).unwrap();
        let rho = thermal_state(&prm).unwrap();
        let branches = pipeline.measured_branches(&rho);
        let (t0, _) = protocol::optimal_angle(&prm).unwrap();
        let best = pipeline.delta_tel_at(&branches, Y_AXIS, t0);
        for _ in 0..200 {
            let t = rng.range(-std::f64::consts::PI, std::f64::consts::PI);
            optimality = optimality.max(best - pipeline.delta_tel_at(&branches, Y_AXIS, t));
        }
    }
    out.push(check(
        "protocol",
        "closed-form angle is optimal",
        optimality,
        1e-12,
    ));

    // Extraction is non-increasing in T on the fixed low-field slice.
    let mut monotone = 0.0f64;
    let mut previous = f64::INFINITY;
    for i in 0..15 {
        let t = 0.1 + i as f64 * 0.1;
        let extract = run_thermal_qet(&params(0.3, 1.0, t)).unwrap().delta_extract;
        monotone = monotone.max(extract - previous);
        previous = extract;
    }
    out.push(check(
        "protocol",
        "extraction decreases along the T slice",
        monotone,
        1e-12,
    ));

    // Hierarchy of the three runs at the reference point.
    let excited = run_excited_qet(&params(0.5, 1.0, 0.5)).unwrap().delta_extract;
    let ground = run_thermal_qet(&params(0.5, 1.0, 1e-3)).unwrap().delta_extract;
    let thermal = run_thermal_qet(&params(0.5, 1.0, 0.5)).unwrap().delta_extract;
    let hierarchy = (ground - excited).max(thermal - ground);
    out.push(check(
        "protocol",
        "excited > ground-limit > thermal extraction",
        hierarchy.max(0.0),
        1e-12,
    ));

    // Simulated general-axis energies against the quadratic closed form.
    let prm = params(0.5, 1.0, 0.5);
    let pipeline = Pipeline::new(prm).unwrap();
    let rho = thermal_state(&prm).unwrap();
    let branches = pipeline.measured_branches(&rho);
    let (a, k) = closedform::thermal_sinh_ratios(&prm);
    let mut general_axis = 0.0f64;
    for (i, axis) in crate::optim::fibonacci_sphere(24).into_iter().enumerate() {
        let theta = -1.4 + 0.13 * i as f64;
        let (n1, n2, n3) = (axis[0], axis[1], axis[2]);
        let sin2 = theta.sin() * theta.sin();
        let cos2 = theta.cos() * theta.cos();
        let l = -prm.b / 4.0 * ((n1 * n1 + n2 * n2 - n3 * n3) * sin2 - cos2)
            - prm.alpha * n2 / 4.0 * (2.0 * theta).sin();
        let m = prm.alpha / 4.0 * ((n1 * n1 - n2 * n2 - n3 * n3) * sin2 + cos2)
            + prm.b * n2 / 4.0 * (2.0 * theta).sin();
        let closed = (-4.0 * l + prm.b) * a + (-4.0 * m + prm.alpha) * k;
        let sim = pipeline.delta_tel_at(&branches, axis, 2.0 * theta);
        general_axis = general_axis.max((sim - closed).abs());
    }
    out.push(check(
        "protocol",
        "general-axis energy matches the quadratic form",
        general_axis,
        1e-12,
    ));
}

fn correlations_suite(out: &mut Vec<CheckResult>) {
    // Partial-transpose eigenvalues sum to one; C and N vanish together;
    // lambda- is negative exactly above the coupling threshold.
    let threshold = 3.0f64.acosh() / 2.0;
    let mut eig_sum = 0.0f64;
    let mut covanish = 0.0f64;
    let mut sign_rule = 0.0f64;
    for alpha in [0.6, 0.8, 1.0] {
        for i in 0..50 {
            let beta = 0.2 + i as f64 * 0.12;
            if (beta * alpha - threshold).abs() < 1e-9 {
                continue;
            }
            let prm = params(0.4, alpha, 1.0 / beta);
            let rho = thermal_state(&prm).unwrap();
            let (n, eigs) = correlations::negativity(&rho).unwrap();
            let c = correlations::concurrence(&rho).unwrap();
            let sum: f64 = eigs.iter().sum();
            eig_sum = eig_sum.max((sum - 1.0).abs());
            if (n > 0.0) != (c > 0.0) {
                covanish += 1.0;
            }
            let expect_negative = beta * alpha > threshold;
            if (eigs[0] < -1e-12) != expect_negative {
                sign_rule += 1.0;
            }
        }
    }
    out.push(check(
        "correlations",
        "PT eigenvalues sum to one",
        eig_sum,
        1e-12,
    ));
    out.push(check(
        "correlations",
        "concurrence and negativity share zeros",
        covanish,
        0.5,
    ));
    out.push(check(
        "correlations",
        "lambda- sign follows the coupling threshold",
        sign_rule,
        0.5,
    ));

    // Discord is non-negative and vanishes on product states.
    let mut product_discord = 0.0f64;
    let product = DensityMatrix::from_ket(&crate::xy_model::ket_00()).unwrap();
    product_discord = product_discord.max(correlations::discord_numeric(&product).unwrap());
    let hot = correlations::discord_xstate(&params(0.5, 1.0, 1e6)).unwrap();
    product_discord = product_discord.max(hot.discord);
    out.push(check(
        "correlations",
        "discord vanishes on uncorrelated states",
        product_discord,
        1e-7,
    ));

    // X-state report internals.
    let mut internals = 0.0f64;
    for (b, alpha, t) in [(0.5, 1.0, 0.5), (1.3, 0.6, 0.9)] {
        let report = correlations::discord_xstate(&params(b, alpha, t)).unwrap();
        let x = report.x_params;
        internals = internals.max((x.a + x.d + 2.0 * x.w - 1.0).abs());
        internals = internals.max(((x.a - x.d).abs() - report.gamma).max(0.0));
        internals = internals.max((-report.discord).max(0.0));
    }
    out.push(check(
        "correlations",
        "X-state report internal identities",
        internals,
        1e-12,
    ));

    // Post-measurement channel coincides with the protocol measurement.
    let prm = params(0.5, 1.0, 0.5);
    let rho = thermal_state(&prm).unwrap();
    let via_corr = correlations::post_measurement_state(&rho).unwrap();
    let (via_protocol, _) = Pipeline::new(prm).unwrap().measure(&rho).unwrap();
    out.push(check(
        "correlations",
        "post-measurement state matches the protocol channel",
        via_corr.matrix().max_abs_diff(via_protocol.matrix()),
        1e-12,
    ));
}

fn closedform_suite(out: &mut Vec<CheckResult>) {
    // Structural identities of the bundle.
    let mut structural = 0.0f64;
    for (b, alpha, t) in [(0.5, 1.0, 0.5), (2.0, 0.6, 0.1), (0.8, 0.8, 0.7), (0.5, 1.0, 1e-6)] {
        let bundle = closedform::evaluate(&params(b, alpha, t)).unwrap();
        structural = structural.max(bundle.delta_tel_min.max(0.0));
        structural = structural
            .max((bundle.f_second_deriv - (bundle.p - bundle.delta_tel_min)).abs());
        structural = structural.max((bundle.delta_inf - bundle.p).abs());
    }
    out.push(check(
        "closedform",
        "bundle identities (minimum, curvature)",
        structural,
        1e-12,
    ));

    // Thermal minimum degenerates to the ground extraction as T -> 0.
    let bundle = closedform::evaluate(&params(0.5, 1.0, 1e-3)).unwrap();
    out.push(check(
        "closedform",
        "low-T limit chain to ground extraction",
        (-bundle.delta_tel_min - bundle.e_ground_extract).abs(),
        1e-4,
    ));

    // Matrix-route concurrence and PT spectrum against the bundle fields
    // over a coarse grid.
    let mut overlap = 0.0f64;
    for alpha in [0.6, 1.0] {
        for t in [0.2, 0.7, 1.8] {
            for b in [0.1, 0.8, 1.9] {
                let prm = params(b, alpha, t);
                let bundle = closedform::evaluate(&prm).unwrap();
                let rho = thermal_state(&prm).unwrap();
                overlap = overlap
                    .max((correlations::concurrence(&rho).unwrap() - bundle.concurrence).abs());
                let (_, mut eigs) = correlations::negativity(&rho).unwrap();
                let mut closed = bundle.pt_eigs;
                eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
                closed.sort_by(|x, y| x.partial_cmp(y).unwrap());
                for (got, want) in eigs.iter().zip(closed) {
                    overlap = overlap.max((got - want).abs());
                }
            }
        }
    }
    out.push(check(
        "closedform",
        "bundle overlaps matrix-route correlations",
        overlap,
        1e-10,
    ));
}

/// All per-module invariant checks.
pub fn invariant_suite(tolerance_scale: f64) -> Vec<CheckResult> {
    let mut out = Vec::new();
    qmatrix_suite(&mut out);
    xy_model_suite(&mut out);
    protocol_suite(&mut out);
    correlations_suite(&mut out);
    closedform_suite(&mut out);
    rescale(out, tolerance_scale)
}

// ---------------------------------------------------------------------------
// Acceptance criteria
// ---------------------------------------------------------------------------

fn criterion_1(out: &mut Vec<CheckResult>) {
    let started = Instant::now();
    let expected = [(0.6, 0.6808, 0.68), (0.8, 0.9077, 0.9), (1.0, 1.1346, 1.13)];
    let mut tc_residual = 0.0f64;
    for (alpha, four_digit, coarse) in expected {
        let tc = correlations::critical_temperature(alpha);
        tc_residual = tc_residual.max((tc - four_digit).abs());
        // Rounding to the coarser reference value.
        let decimals = if coarse == 0.9 { 1 } else { 2 };
        let factor = 10f64.powi(decimals);
        tc_residual = tc_residual.max(((tc * factor).round() / factor - coarse).abs());
    }
    out.push(check(
        "acceptance",
        "criterion 1: critical temperatures",
        tc_residual,
        5e-5,
    ));

    // 100-point T scan at B = 0.3: both measures vanish above T_c and are
    // positive below, with the boundary within one grid step.
    let ts = linspace(0.05, 2.0, 100);
    let step = ts[1] - ts[0];
    let mut boundary_residual = 0.0f64;
    for alpha in [0.6, 0.8, 1.0] {
        let tc = correlations::critical_temperature(alpha);
        for &t in &ts {
            let rho = thermal_state(&params(0.3, alpha, t)).unwrap();
            let (n, _) = correlations::negativity(&rho).unwrap();
            let c = correlations::concurrence(&rho).unwrap();
            if (n > 0.0) != (c > 0.0) {
                boundary_residual = boundary_residual.max(1.0);
            }
            let positive = n > 0.0;
            let should_be_positive = t < tc;
            if positive != should_be_positive {
                // Mislabeled point: count how far (in grid steps) it sits
                // from the analytic boundary.
                boundary_residual = boundary_residual.max((t - tc).abs() / step);
            }
        }
    }
    out.push(check(
        "acceptance",
        "criterion 1: entanglement boundary on the T scan",
        boundary_residual,
        1.0,
    ));
    out.push(check(
        "acceptance",
        "criterion 1: runtime (s)",
        started.elapsed().as_secs_f64(),
        1.0,
    ));
}

fn criterion_2(out: &mut Vec<CheckResult>) {
    let started = Instant::now();
    let mut tel_residual = 0.0f64;
    let mut inf_residual = 0.0f64;
    for alpha in [0.6, 0.8, 1.0] {
        for t in linspace(0.05, 3.0, 20) {
            for b in linspace(0.05, 2.0, 20) {
                let prm = params(b, alpha, t);
                let trace = run_thermal_qet(&prm).unwrap();
                let bundle = closedform::evaluate(&prm).unwrap();
                tel_residual = tel_residual.max((trace.delta_tel - bundle.delta_tel_min).abs());
                inf_residual = inf_residual.max((trace.delta_inf - bundle.delta_inf).abs());
            }
        }
    }
    out.push(check(
        "acceptance",
        "criterion 2: simulated vs closed-form energy change",
        tel_residual,
        1e-10,
    ));
    out.push(check(
        "acceptance",
        "criterion 2: simulated vs closed-form injection",
        inf_residual,
        1e-10,
    ));
    out.push(check(
        "acceptance",
        "criterion 2: runtime (s)",
        started.elapsed().as_secs_f64(),
        10.0,
    ));
}

fn criterion_3(out: &mut Vec<CheckResult>) {
    let mut rng = Rng(301);
    let mut curvature = 0.0f64;
    let mut positivity_violation = 0.0f64;
    let mut minimality = 0.0f64;
    let mut worst_minimum = f64::NEG_INFINITY;
    for _ in 0..30 {
        let mut b = rng.range(0.05, 2.0);
        let alpha = rng.range(0.3, 1.4);
        if (b - alpha).abs() < 1e-3 {
            b += 0.01;
        }
        let prm = params(b, alpha, rng.range(0.1, 2.5));
        let (t0, _) = protocol::optimal_angle(&prm).unwrap();
        let fpp = protocol::verify_minimum(&prm, t0).unwrap();
        let (p, q) = closedform::thermal_pq(&prm);
        curvature = curvature.max((fpp - p.hypot(q)).abs());
        positivity_violation = positivity_violation.max(-fpp);

        let pipeline = Pipeline::new(prm).unwrap();
        let rho = thermal_state(&prm).unwrap();
        let branches = pipeline.measured_branches(&rho);
        let best = pipeline.delta_tel_at(&branches, Y_AXIS, t0);
        for _ in 0..200 {
            let t = rng.range(-std::f64::consts::PI, std::f64::consts::PI);
            minimality = minimality.max(best - pipeline.delta_tel_at(&branches, Y_AXIS, t));
        }
        // Strict negativity away from B = alpha.
        worst_minimum = worst_minimum.max(best);
    }
    out.push(check(
        "acceptance",
        "criterion 3: finite-difference curvature vs sqrt(p^2+q^2)",
        curvature,
        1e-6,
    ));
    out.push(check(
        "acceptance",
        "criterion 3: curvature positive",
        positivity_violation.max(0.0),
        0.0,
    ));
    out.push(check(
        "acceptance",
        "criterion 3: optimal angle minimizes over random angles",
        minimality.max(0.0),
        1e-12,
    ));
    out.push(check(
        "acceptance",
        "criterion 3: strict negativity away from B = alpha",
        if worst_minimum < 0.0 { 0.0 } else { 1.0 },
        0.5,
    ));
}

fn criterion_4(out: &mut Vec<CheckResult>) {
    let mut rng = Rng(401);
    let mut axis_residual = 0.0f64;
    let mut lagrange = 0.0f64;
    for below in [true, false] {
        for _ in 0..10 {
            let alpha = rng.range(0.5, 1.3);
            let b = if below {
                alpha * rng.range(0.1, 0.9)
            } else {
                alpha * rng.range(1.1, 2.0)
            };
            let prm = params(b, alpha, rng.range(0.1, 2.0));
            let optimum = optimize_axis(&prm, protocol::DEFAULT_AXIS_GRID).unwrap();
            let expected = if below { 1.0 } else { -1.0 };
            axis_residual = axis_residual
                .max(optimum.axis[0].abs())
                .max((optimum.axis[1] - expected).abs())
                .max(optimum.axis[2].abs());
            for r in lagrange_residuals(&prm, optimum.axis, optimum.t0) {
                lagrange = lagrange.max(r.abs());
            }
        }
    }
    out.push(check(
        "acceptance",
        "criterion 4: optimal axis lands on the frame-y pole",
        axis_residual,
        1e-6,
    ));
    out.push(check(
        "acceptance",
        "criterion 4: stationarity residuals at the optimum",
        lagrange,
        1e-9,
    ));
}

fn criterion_5(out: &mut Vec<CheckResult>) {
    let mut rng = Rng(501);
    let mut alice_residual = 0.0f64;
    let mut bob_residual = 0.0f64;
    for _ in 0..10 {
        let b = rng.range(0.05, 2.0);
        let alpha = rng.range(0.3, 1.4);
        let prm = params(b, alpha, 0.5);
        let trace = run_excited_qet(&prm).unwrap();
        alice_residual = alice_residual.max((trace.delta_inf + alpha / 2.0).abs());
        bob_residual =
            bob_residual.max((trace.delta_extract - (alpha + alpha.hypot(b)) / 2.0).abs());
    }
    out.push(check(
        "acceptance",
        "criterion 5: excited-run measurement stage is -alpha/2",
        alice_residual,
        1e-12,
    ));
    out.push(check(
        "acceptance",
        "criterion 5: excited-run extraction closed form",
        bob_residual,
        1e-10,
    ));
}

fn criterion_6(out: &mut Vec<CheckResult>) {
    let mut rng = Rng(601);
    let mut breakdown_residual = 0.0f64;
    let mut curve_residual = 0.0f64;
    let mut extraction_residual = 0.0f64;
    for _ in 0..10 {
        let alpha = rng.range(0.3, 1.0);
        let b = alpha * rng.range(1.05, 2.5);
        let prm = params(b, alpha, 0.5);
        let (trace, breakdown) = run_product_qee(&prm).unwrap();
        breakdown_residual = breakdown_residual
            .max((breakdown.e_site_a - b / 2.0).abs())
            .max(breakdown.e_site_b.abs())
            .max(breakdown.e_interaction.abs());
        extraction_residual =
            extraction_residual.max((trace.delta_extract - (b.hypot(alpha) - b) / 2.0).abs());

        let pipeline = Pipeline::new(prm).unwrap();
        let rho0 = DensityMatrix::from_ket(&crate::xy_model::ket_00()).unwrap();
        let branches = pipeline.measured_branches(&rho0);
        for i in 0..50 {
            let theta = -1.5 + 3.0 * i as f64 / 49.0;
            let sim = pipeline.delta_tel_at(&branches, Y_AXIS, 2.0 * theta);
            curve_residual =
                curve_residual.max((sim - closedform::qee_curve(b, alpha, theta)).abs());
        }
    }
    out.push(check(
        "acceptance",
        "criterion 6: site breakdown is (B/2, 0, 0)",
        breakdown_residual,
        1e-12,
    ));
    out.push(check(
        "acceptance",
        "criterion 6: angle curve matches the closed form",
        curve_residual,
        1e-12,
    ));
    out.push(check(
        "acceptance",
        "criterion 6: optimal extraction closed form",
        extraction_residual,
        1e-10,
    ));
}

fn criterion_7(out: &mut Vec<CheckResult>) {
    let cold = run_thermal_qet(&params(0.5, 1.0, 1e-3)).unwrap();
    let ground = (1.0f64.hypot(0.5) - 1.0) / 2.0;
    out.push(check(
        "acceptance",
        "criterion 7: cold thermal run reaches the ground extraction",
        (cold.delta_extract - ground).abs(),
        1e-4,
    ));

    let symmetric = run_thermal_qet(&params(0.8, 0.8, 0.4)).unwrap();
    let zero_field = run_thermal_qet(&params(0.0, 1.0, 0.5)).unwrap();
    out.push(check(
        "acceptance",
        "criterion 7: extraction vanishes at B = alpha and B = 0",
        symmetric.delta_extract.max(zero_field.delta_extract),
        1e-12,
    ));

    let hot = run_thermal_qet(&params(0.5, 1.0, 1e6)).unwrap();
    out.push(check(
        "acceptance",
        "criterion 7: extraction vanishes at infinite temperature",
        hot.delta_extract,
        1e-5,
    ));
}

fn criterion_8(out: &mut Vec<CheckResult>) {
    let started = Instant::now();
    let mut agreement = 0.0f64;
    for alpha in [0.6, 0.8, 1.0] {
        for t in linspace(0.2, 2.5, 10) {
            for b in linspace(0.1, 2.0, 10) {
                let prm = params(b, alpha, t);
                let closed = correlations::discord_xstate(&prm).unwrap().discord;
                let numeric =
                    correlations::discord_numeric(&thermal_state(&prm).unwrap()).unwrap();
                agreement = agreement.max((closed - numeric).abs());
            }
        }
    }
    out.push(check(
        "acceptance",
        "criterion 8: closed-form vs numeric discord",
        agreement,
        1e-5,
    ));

    let mut rng = Rng(801);
    let mut post = 0.0f64;
    for _ in 0..10 {
        let prm = params(
            rng.range(0.1, 2.0),
            rng.range(0.3, 1.3),
            rng.range(0.2, 2.0),
        );
        let cq = correlations::post_measurement_state(&thermal_state(&prm).unwrap()).unwrap();
        post = post.max(correlations::discord_numeric(&cq).unwrap());
    }
    out.push(check(
        "acceptance",
        "criterion 8: post-measurement discord vanishes",
        post,
        1e-7,
    ));
    out.push(check(
        "acceptance",
        "criterion 8: runtime (s)",
        started.elapsed().as_secs_f64(),
        60.0,
    ));
}

fn criterion_9(out: &mut Vec<CheckResult>) {
    // Existence of a point with no discord yet nonzero extraction above the
    // critical temperature. The sweep window extends to high fields, where
    // the thermal state approaches the product ground state and the residual
    // discord decays like exp(-beta B).
    let mut missing = 0.0f64;
    for alpha in [0.6, 0.8, 1.0] {
        let tc = correlations::critical_temperature(alpha);
        let mut found = false;
        'scan: for t in linspace(0.05, 3.0, 100) {
            if t <= tc {
                continue;
            }
            for b in linspace(0.05, 20.0, 100) {
                let report = correlations::discord_xstate(&params(b, alpha, t)).unwrap();
                let bundle = closedform::evaluate(&params(b, alpha, t)).unwrap();
                if report.discord < 1e-6 && -bundle.delta_tel_min > 1e-6 {
                    found = true;
                    break 'scan;
                }
            }
        }
        if !found {
            missing += 1.0;
        }
    }
    out.push(check(
        "acceptance",
        "criterion 9: extraction without discord exists above T_c",
        missing,
        0.5,
    ));
}

/// The nine acceptance criteria, in order, with their pinned tolerances.
pub fn acceptance_suite(tolerance_scale: f64) -> Vec<CheckResult> {
    let mut out = Vec::new();
    criterion_1(&mut out);
    criterion_2(&mut out);
    criterion_3(&mut out);
    criterion_4(&mut out);
    criterion_5(&mut out);
    criterion_6(&mut out);
    criterion_7(&mut out);
    criterion_8(&mut out);
    criterion_9(&mut out);
    rescale(out, tolerance_scale)
}

/// Invariants followed by acceptance criteria.
pub fn run_all(tolerance_scale: f64) -> Vec<CheckResult> {
    let mut out = invariant_suite(tolerance_scale);
    out.extend(acceptance_suite(tolerance_scale));
    out
}

fn rescale(mut checks: Vec<CheckResult>, tolerance_scale: f64) -> Vec<CheckResult> {
    if (tolerance_scale - 1.0).abs() > f64::EPSILON {
        for c in checks.iter_mut() {
            c.tolerance *= tolerance_scale;
            c.passed = c.residual.is_finite() && c.residual <= c.tolerance;
        }
    }
    checks
}
