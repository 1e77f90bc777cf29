//! Entanglement and discord measures for two-qubit states: negativity via
//! the partial transpose, Wootters concurrence, the critical temperature,
//! and quantum discord both as the X-state closed form and as an
//! independent minimization over projective measurements on A.
//!
//! All entropies are in bits (log base 2) with the 0 log 0 := 0 convention.

use crate::closedform;
use crate::optim::nelder_mead;
use crate::qmatrix::{
    hermitian_eig, kron, partial_trace_b, partial_transpose_b, sigma_y, ComplexMatrix,
    DensityMatrix, C64,
};
use crate::xy_model::{frame_x, thermal_state, ModelParams};
use crate::{Error, Result};

/// Eigenvalues within this band of zero count as zero when classifying the
/// sign of partial-transpose eigenvalues near the critical temperature.
const BOUNDARY_TOL: f64 = 1e-12;

/// -p log2(p) with the 0 log 0 = 0 convention; tiny negative inputs from
/// roundoff are treated as zero.
fn entropy_term(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

fn entropy_bits<I: IntoIterator<Item = f64>>(probabilities: I) -> f64 {
    probabilities.into_iter().map(entropy_term).sum()
}

/// Negativity sum_{lambda < 0} |lambda| of the B-partial-transpose, together
/// with the four transpose eigenvalues in ascending order.
pub fn negativity(rho: &DensityMatrix) -> Result<(f64, [f64; 4])> {
    let pt = partial_transpose_b(rho.matrix())?;
    let spectrum = hermitian_eig(&pt)?;
    let mut eigs = [0.0; 4];
    eigs.copy_from_slice(&spectrum.eigenvalues);
    let n = eigs
        .iter()
        .filter(|&&l| l < -BOUNDARY_TOL)
        .map(|l| -l)
        .sum();
    Ok((n, eigs))
}

/// Wootters concurrence via the spin-flipped state: the square roots of the
/// eigenvalues of rho (sigma_y x sigma_y) rho* (sigma_y x sigma_y) in
/// decreasing order enter max(0, l1 - l2 - l3 - l4). Conjugation is taken in
/// the sigma_z eigenbasis, i.e. entrywise on the matrix.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    let yy = kron(&sigma_y(), &sigma_y())?;
    let flipped = yy.mul(&rho.matrix().conj())?.mul(&yy)?;

    // Eigenvalues of rho * flipped equal those of sqrt(rho) flipped sqrt(rho),
    // which is Hermitian and numerically well behaved.
    let spectrum = hermitian_eig(rho.matrix())?;
    let mut sqrt_rho = ComplexMatrix::zeros(4)?;
    for (lambda, v) in spectrum.eigenvalues.iter().zip(&spectrum.eigenvectors) {
        let root = lambda.max(0.0).sqrt();
        for i in 0..4 {
            for j in 0..4 {
                let cur = sqrt_rho.get(i, j);
                sqrt_rho.set(i, j, cur + v[i] * v[j].conj() * root);
            }
        }
    }
    let core = sqrt_rho.mul(&flipped)?.mul(&sqrt_rho)?;
    let mut roots: Vec<f64> = hermitian_eig(&core)?
        .eigenvalues
        .iter()
        .map(|&l| {
            // Clamp eigensolver noise at near-pure states.
            debug_assert!(l > -1e-12);
            l.max(0.0).sqrt()
        })
        .collect();
    roots.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok((roots[0] - roots[1] - roots[2] - roots[3]).max(0.0))
}

/// alpha / ln(1 + sqrt(2)): the temperature where thermal entanglement
/// vanishes, independent of the field B.
pub fn critical_temperature(alpha: f64) -> f64 {
    closedform::critical_temperature(alpha)
}

/// The four independent entries of the thermal X state.
#[derive(Debug, Clone, Copy)]
pub struct XStateParams {
    /// <00|rho|00>.
    pub a: f64,
    /// <11|rho|11>.
    pub d: f64,
    /// <01|rho|01> = <10|rho|10>.
    pub w: f64,
    /// <01|rho|10>, real and negative for this model.
    pub z: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct EntropyBundle {
    /// S(rho), from the eigenvalues {a, d, w+z, w-z}.
    pub s_rho: f64,
    /// S of the A marginal diag(a+w, w+d).
    pub s_rho_a: f64,
    /// Conditional entropy after a frame-z measurement on A.
    pub s1: f64,
    /// Conditional entropy after an equatorial measurement on A.
    pub s2: f64,
}

/// Every correlation quantity for one thermal point.
#[derive(Debug, Clone)]
pub struct CorrelationReport {
    pub negativity: f64,
    pub concurrence: f64,
    /// Closed-form discord in bits.
    pub discord: f64,
    pub critical_temperature: f64,
    pub x_params: XStateParams,
    pub entropies: EntropyBundle,
    /// Gamma = sqrt((a-d)^2 + 4 z^2).
    pub gamma: f64,
    /// Partial-transpose eigenvalues, ascending.
    pub pt_eigenvalues: [f64; 4],
}

/// Closed-form discord of the thermal X state: S(rho_A) - S(rho) +
/// min{S1, S2}, assembled from the matrix entries (a, d, w, z).
pub fn discord_xstate(params: &ModelParams) -> Result<CorrelationReport> {
    let rho = thermal_state(params)?;
    let m = rho.matrix();
    let x = XStateParams {
        a: m.get(0, 0).re,
        d: m.get(3, 3).re,
        w: m.get(1, 1).re,
        z: m.get(1, 2).re,
    };
    let (a, d, w, z) = (x.a, x.d, x.w, x.z);

    let s_rho = entropy_bits([a, d, w + z, w - z]);
    let s_rho_a = entropy_bits([a + w, w + d]);

    // Conditional entropy for a frame-z measurement on A: two branches with
    // probabilities a+w and w+d, so S1 = H(a, d, w, w) - H(a+w, w+d).
    let s1 = entropy_bits([a, d, w, w]) - s_rho_a;

    let gamma = ((a - d) * (a - d) + 4.0 * z * z).sqrt();
    let s2 = entropy_bits([(1.0 + gamma) / 2.0, (1.0 - gamma) / 2.0]);

    let discord = (s_rho_a - s_rho + s1.min(s2)).max(0.0);
    let (neg, pt_eigs) = negativity(&rho)?;
    Ok(CorrelationReport {
        negativity: neg,
        concurrence: concurrence(&rho)?,
        discord,
        critical_temperature: critical_temperature(params.alpha),
        x_params: x,
        entropies: EntropyBundle {
            s_rho,
            s_rho_a,
            s1,
            s2,
        },
        gamma,
        pt_eigenvalues: pt_eigs,
    })
}

/// 2x2 block of rho with row index (ia, *) and column index (ja, *).
fn a_block(m: &ComplexMatrix, ia: usize, ja: usize) -> [[C64; 2]; 2] {
    [
        [m.get(ia * 2, ja * 2), m.get(ia * 2, ja * 2 + 1)],
        [m.get(ia * 2 + 1, ja * 2), m.get(ia * 2 + 1, ja * 2 + 1)],
    ]
}

/// Conditional entropy sum_k p_k S(rho_B | k) for the projective measurement
/// of A along the Bloch direction (theta, phi).
fn conditional_entropy(blocks: &[[[C64; 2]; 2]; 4], theta: f64, phi: f64) -> f64 {
    let half = theta / 2.0;
    let (c, s) = (half.cos(), half.sin());
    let phase = C64::new(phi.cos(), phi.sin());
    // |v> = (c, e^{i phi} s) and its orthogonal complement.
    let kets = [
        [C64::new(c, 0.0), phase * s],
        [C64::new(-s, 0.0), phase * c],
    ];

    let mut total = 0.0;
    for ket in kets {
        // K = <v|_A rho |v>_A, a 2x2 positive operator with trace p.
        let mut k = [[C64::new(0.0, 0.0); 2]; 2];
        for ia in 0..2 {
            for ja in 0..2 {
                let weight = ket[ia].conj() * ket[ja];
                let block = &blocks[ia * 2 + ja];
                for r in 0..2 {
                    for col in 0..2 {
                        k[r][col] += weight * block[r][col];
                    }
                }
            }
        }
        let p = (k[0][0].re + k[1][1].re).max(0.0);
        if p < 1e-15 {
            continue;
        }
        let half_trace = (k[0][0].re + k[1][1].re) / 2.0;
        let det = k[0][0].re * k[1][1].re - k[0][1].norm_sqr();
        let gap = (half_trace * half_trace - det).max(0.0).sqrt();
        let mu_plus = (half_trace + gap).max(0.0);
        let mu_minus = (half_trace - gap).max(0.0);
        // Unnormalized branch entropy: -sum mu log2(mu / p).
        for mu in [mu_plus, mu_minus] {
            if mu > 0.0 {
                total -= mu * (mu / p).log2();
            }
        }
    }
    total
}

const DISCORD_GRID_THETA: usize = 180;
const DISCORD_GRID_PHI: usize = 360;

/// Quantum discord with measurement on A, by direct numeric minimization of
/// the conditional entropy over rank-1 projective measurements: a
/// 180 x 360 Bloch grid followed by simplex refinement to 1e-7 bits.
pub fn discord_numeric(rho: &DensityMatrix) -> Result<f64> {
    let m = rho.matrix();
    let blocks = [
        a_block(m, 0, 0),
        a_block(m, 0, 1),
        a_block(m, 1, 0),
        a_block(m, 1, 1),
    ];

    let s_rho = entropy_bits(rho.eigenvalues().iter().map(|&l| l.max(0.0)));
    let marginal = partial_trace_b(m)?;
    let spec_a = hermitian_eig(&marginal)?;
    let s_rho_a = entropy_bits(spec_a.eigenvalues.iter().map(|&l| l.max(0.0)));

    let mut best = (0.0f64, 0.0f64, f64::INFINITY);
    for i in 0..DISCORD_GRID_THETA {
        let theta = (i as f64 + 0.5) * std::f64::consts::PI / DISCORD_GRID_THETA as f64;
        for j in 0..DISCORD_GRID_PHI {
            let phi = (j as f64 + 0.5) * 2.0 * std::f64::consts::PI / DISCORD_GRID_PHI as f64;
            let value = conditional_entropy(&blocks, theta, phi);
            if value < best.2 {
                best = (theta, phi, value);
            }
        }
    }
    let (refined, value) = nelder_mead(
        |x| conditional_entropy(&blocks, x[0], x[1]),
        &[best.0, best.1],
        0.02,
        1e-9,
        400,
    );
    let min_conditional = value.min(conditional_entropy(&blocks, refined[0], refined[1]));

    let discord = s_rho_a - s_rho + min_conditional;
    // The exact quantity is non-negative; only roundoff can push it below.
    if discord < -1e-9 {
        return Err(Error::InvalidState(format!(
            "numeric discord {discord} fell below zero"
        )));
    }
    Ok(discord.max(0.0))
}

/// Non-selective frame-x measurement of A: sum_k (|k><k| x I) rho
/// (|k><k| x I) over the |+->, |-> basis of qubit A. The output is
/// classical-quantum, hence has zero discord.
pub fn post_measurement_state(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let i2 = ComplexMatrix::identity(2)?;
    let mut out = ComplexMatrix::zeros(4)?;
    for k in [1.0, -1.0] {
        let projector = kron(&i2.add(&frame_x().scale(k))?.scale(0.5), &i2)?;
        out = out.add(&rho.matrix().conjugate_with(&projector)?)?;
    }
    DensityMatrix::new(out)
}
