//! The two-qubit XY Hamiltonian, its level structure and Gibbs states.
//!
//! The energy ladder is |00> at -B, |psi-> = (|01> - |10>)/sqrt(2) at -alpha,
//! |psi+> at +alpha and |11> at +B. Making |0> the low-field state of each
//! site fixes a right-handed local spin frame whose y and z components are
//! the negated matrix-basis Paulis; the conditional rotations in the
//! protocol module use the same frame so the axis labels stay consistent
//! with the field term.

use crate::qmatrix::{
    kron, outer, sigma_x, sigma_y, sigma_z, trace_product, ComplexMatrix, DensityMatrix, C64,
};
use crate::{Error, Result};

/// Physical parameters of one experiment: field B, coupling alpha, a
/// constant energy offset epsilon, and the bath temperature (k_B = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub b: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub temperature: f64,
}

impl ModelParams {
    /// Parameters with the default epsilon = 0 used for all energy ledgers.
    pub fn new(b: f64, alpha: f64, temperature: f64) -> Result<Self> {
        Self::with_epsilon(b, alpha, 0.0, temperature)
    }

    pub fn with_epsilon(b: f64, alpha: f64, epsilon: f64, temperature: f64) -> Result<Self> {
        let p = Self {
            b,
            alpha,
            epsilon,
            temperature,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.b.is_finite() || self.b < 0.0 {
            return Err(Error::InvalidParams(format!(
                "field b must be finite and >= 0, got {}",
                self.b
            )));
        }
        if !self.alpha.is_finite() || self.alpha <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "coupling alpha must be finite and > 0, got {}",
                self.alpha
            )));
        }
        if !self.epsilon.is_finite() {
            return Err(Error::InvalidParams("epsilon must be finite".into()));
        }
        // T = 0 is served by the dedicated pure-state entry points, never by
        // the Gibbs constructor.
        if !self.temperature.is_finite() || self.temperature <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "temperature must be finite and > 0, got {}",
                self.temperature
            )));
        }
        if !self.beta().is_finite() {
            return Err(Error::InvalidParams("inverse temperature overflows".into()));
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        1.0 / self.temperature
    }
}

/// Pauli x in the model's local spin frame (same as the matrix basis).
pub fn frame_x() -> ComplexMatrix {
    sigma_x()
}

/// Pauli y in the model's local spin frame: -sigma_y in the matrix basis.
pub fn frame_y() -> ComplexMatrix {
    sigma_y().scale(-1.0)
}

/// Pauli z in the model's local spin frame: -sigma_z, so that |0> is the
/// frame-z ground state and the site field reads +(B/2) frame_z.
pub fn frame_z() -> ComplexMatrix {
    sigma_z().scale(-1.0)
}

/// Frame raising operator (frame_x + i frame_y)/2.
pub fn frame_plus() -> ComplexMatrix {
    frame_x()
        .add(&frame_y().scale_c(C64::new(0.0, 1.0)))
        .unwrap()
        .scale(0.5)
}

/// Frame lowering operator (frame_x - i frame_y)/2.
pub fn frame_minus() -> ComplexMatrix {
    frame_x()
        .sub(&frame_y().scale_c(C64::new(0.0, 1.0)))
        .unwrap()
        .scale(0.5)
}

/// H = (B/2)(z_A + z_B) + alpha(sp_A sm_B + sm_A sp_B) + epsilon I in the
/// spin frame; in matrix form diag(-B, 0, 0, B) plus the alpha exchange
/// block plus the offset.
pub fn build_hamiltonian(params: &ModelParams) -> Result<ComplexMatrix> {
    params.validate()?;
    let i2 = ComplexMatrix::identity(2)?;
    let field = kron(&frame_z(), &i2)?
        .add(&kron(&i2, &frame_z())?)?
        .scale(params.b / 2.0);
    let exchange = kron(&frame_plus(), &frame_minus())?
        .add(&kron(&frame_minus(), &frame_plus())?)?
        .scale(params.alpha);
    let offset = ComplexMatrix::identity(4)?.scale(params.epsilon);
    field.add(&exchange)?.add(&offset)
}

/// Labels of the four energy eigenstates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelLabel {
    ZeroZero,
    OneOne,
    Plus,
    Minus,
}

impl std::fmt::Display for LevelLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LevelLabel::ZeroZero => write!(f, "00"),
            LevelLabel::OneOne => write!(f, "11"),
            LevelLabel::Plus => write!(f, "+"),
            LevelLabel::Minus => write!(f, "-"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EnergyLevel {
    pub label: LevelLabel,
    /// Eigenvalue of the epsilon = 0 Hamiltonian.
    pub energy: f64,
    /// Number of eigenstates sharing this energy (2 at B = alpha or B = 0).
    pub degeneracy: usize,
    pub eigenstate: Vec<C64>,
}

/// Spectrum, partition function and thermal weights of one parameter set.
#[derive(Debug, Clone)]
pub struct SpectralData {
    /// Per-state entries in the fixed order 00, 11, +, -.
    pub levels: Vec<EnergyLevel>,
    /// Z = 2(cosh(beta*alpha) + cosh(beta*B)). Overflows to infinity for
    /// extreme beta; the weights below stay finite regardless.
    pub partition_function: f64,
    /// p_n = exp(-beta E_n)/Z in the same order as `levels`.
    pub thermal_weights: Vec<f64>,
    /// One label below the degenerate point, both labels at B = alpha.
    pub ground_labels: Vec<LevelLabel>,
    pub ground_degenerate: bool,
}

fn basis_ket(index: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); 4];
    v[index] = C64::new(1.0, 0.0);
    v
}

pub fn ket_00() -> Vec<C64> {
    basis_ket(0)
}

pub fn ket_11() -> Vec<C64> {
    basis_ket(3)
}

/// (|01> + |10>)/sqrt(2), the +alpha eigenstate.
pub fn bell_plus() -> Vec<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    vec![
        C64::new(0.0, 0.0),
        C64::new(s, 0.0),
        C64::new(s, 0.0),
        C64::new(0.0, 0.0),
    ]
}

/// (|01> - |10>)/sqrt(2), the -alpha eigenstate.
pub fn bell_minus() -> Vec<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    vec![
        C64::new(0.0, 0.0),
        C64::new(s, 0.0),
        C64::new(-s, 0.0),
        C64::new(0.0, 0.0),
    ]
}

pub fn spectral_data(params: &ModelParams) -> Result<SpectralData> {
    params.validate()?;
    let beta = params.beta();
    let energies = [
        (LevelLabel::ZeroZero, -params.b, ket_00()),
        (LevelLabel::OneOne, params.b, ket_11()),
        (LevelLabel::Plus, params.alpha, bell_plus()),
        (LevelLabel::Minus, -params.alpha, bell_minus()),
    ];

    // Stable weights: shift by the ground energy before exponentiating so
    // very low temperatures never overflow.
    let e_min = energies
        .iter()
        .map(|(_, e, _)| *e)
        .fold(f64::INFINITY, f64::min);
    let shifted: Vec<f64> = energies
        .iter()
        .map(|(_, e, _)| (-beta * (e - e_min)).exp())
        .collect();
    let norm: f64 = shifted.iter().sum();
    let weights: Vec<f64> = shifted.iter().map(|w| w / norm).collect();

    let levels: Vec<EnergyLevel> = energies
        .iter()
        .map(|(label, energy, state)| EnergyLevel {
            label: *label,
            energy: *energy,
            degeneracy: energies
                .iter()
                .filter(|(_, e, _)| (e - energy).abs() <= 1e-12)
                .count(),
            eigenstate: state.clone(),
        })
        .collect();

    let mut ground_labels = Vec::new();
    for level in &levels {
        if (level.energy - e_min).abs() <= 1e-12 {
            ground_labels.push(level.label);
        }
    }
    let ground_degenerate = ground_labels.len() > 1;

    Ok(SpectralData {
        levels,
        partition_function: 2.0 * ((beta * params.alpha).cosh() + (beta * params.b).cosh()),
        thermal_weights: weights,
        ground_labels,
        ground_degenerate,
    })
}

/// Gibbs state exp(-beta H)/Z assembled from the spectral decomposition.
/// The epsilon offset cancels in the normalization, so the result only
/// depends on (B, alpha, T).
pub fn thermal_state(params: &ModelParams) -> Result<DensityMatrix> {
    let data = spectral_data(params)?;
    let mut rho = ComplexMatrix::zeros(4)?;
    for (level, weight) in data.levels.iter().zip(&data.thermal_weights) {
        rho = rho.add(&outer(&level.eigenstate)?.scale(*weight))?;
    }
    DensityMatrix::new(rho)
}

/// tr(H rho) with the epsilon = 0 Hamiltonian.
pub fn energy_expectation(params: &ModelParams, rho: &DensityMatrix) -> Result<f64> {
    let h = build_hamiltonian(&ModelParams {
        epsilon: 0.0,
        ..*params
    })?;
    Ok(trace_product(&h, rho.matrix())?.re)
}
