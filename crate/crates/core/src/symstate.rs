//! Reference-labelled qubit pairs and the parity symmetrization that drops
//! the labels.
//!
//! A pair |r,q; r',q'⟩ carries physical reference labels `r`, `r'` next to
//! its coding bits. Symmetrization forgets the labels and maps every basis
//! state onto |q,q'⟩ + η|q̄,q̄'⟩ with q̄ = q ⊕ 1, so that only the relative
//! value of the two bits survives.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{c, Ket, NORM_TOL, ONE, ZERO};

/// Tolerance for |η| = 1.
pub const ETA_TOL: f64 = 1e-12;

/// Bloch angles of |s⟩ = cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperpositionParams {
    pub theta: f64,
    pub phi: f64,
}

impl SuperpositionParams {
    /// Validates θ ∈ [0, π] and wraps φ into [−π, π).
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::OutOfRange(format!("theta = {theta} is outside [0, pi]")));
        }
        if !phi.is_finite() {
            return Err(Error::OutOfRange(format!("phi = {phi} is not finite")));
        }
        Ok(Self {
            theta,
            phi: wrap_phase(phi),
        })
    }
}

fn wrap_phase(phi: f64) -> f64 {
    if (-PI..PI).contains(&phi) {
        return phi;
    }
    let w = (phi + PI).rem_euclid(2.0 * PI) - PI;
    if w >= PI {
        -PI
    } else {
        w
    }
}

/// Two-qubit state with its (opaque) reference labels and symmetrization
/// phase η.
#[derive(Debug, Clone)]
pub struct LabeledTwoQubitState {
    pub reference_labels: (String, String),
    /// Amplitudes over |q,q'⟩ in the order 00, 01, 10, 11.
    pub amplitudes: Ket,
    pub eta: Complex64,
}

impl LabeledTwoQubitState {
    pub fn new(labels: (impl Into<String>, impl Into<String>), amplitudes: Ket, eta: Complex64) -> Result<Self> {
        if amplitudes.dim() != 4 {
            return Err(Error::Shape(format!("expected 4 amplitudes, got {}", amplitudes.dim())));
        }
        check_eta(eta)?;
        if amplitudes.is_normalized() && (amplitudes.norm() - 1.0).abs() > NORM_TOL {
            return Err(Error::OutOfRange("amplitudes flagged normalized but are not".into()));
        }
        Ok(Self {
            reference_labels: (labels.0.into(), labels.1.into()),
            amplitudes,
            eta,
        })
    }

    /// |r, first⟩|r', second⟩ for single-qubit kets.
    pub fn product(first: &Ket, second: &Ket, eta: Complex64) -> Result<Self> {
        if first.dim() != 2 || second.dim() != 2 {
            return Err(Error::Shape("product of two qubits expected".into()));
        }
        Self::new(("r", "r'"), first.kron(second), eta)
    }
}

pub fn check_eta(eta: Complex64) -> Result<()> {
    if (eta.norm() - 1.0).abs() > ETA_TOL {
        return Err(Error::OutOfRange(format!("|eta| = {} is not 1", eta.norm())));
    }
    Ok(())
}

pub fn make_superposition(p: SuperpositionParams) -> Result<Ket> {
    let p = SuperpositionParams::new(p.theta, p.phi)?;
    let (s, co) = (p.theta / 2.0).sin_cos();
    Ket::new(vec![c(co, 0.0), Complex64::from_polar(s, p.phi)])
}

/// Exchanges the |0⟩ and |1⟩ amplitudes.
pub fn bar(k: &Ket) -> Result<Ket> {
    if k.dim() != 2 {
        return Err(Error::Shape(format!("bar acts on qubits, got dim {}", k.dim())));
    }
    let flipped = vec![k[1], k[0]];
    Ok(if k.is_normalized() {
        Ket::new(flipped)?
    } else {
        Ket::unnormalized(flipped)
    })
}

/// |q,q'⟩ + η|q̄,q̄'⟩, unnormalized.
pub fn symmetrize_basis(q: u8, q2: u8, eta: Complex64) -> Result<Ket> {
    if q > 1 || q2 > 1 {
        return Err(Error::OutOfRange(format!("bits must be 0 or 1, got ({q}, {q2})")));
    }
    check_eta(eta)?;
    let idx = (2 * q + q2) as usize;
    let flipped = 3 - idx;
    let mut amps = vec![ZERO; 4];
    amps[idx] += ONE;
    amps[flipped] += eta;
    Ok(Ket::unnormalized(amps))
}

/// Linear extension of [`symmetrize_basis`] over the computational expansion.
///
/// With η = ±1 the images of |0,s⟩ and |1,s̄⟩ are proportional (factor η);
/// for other unit η they are not.
pub fn symmetrize_state(s: &LabeledTwoQubitState) -> Ket {
    symmetrize_amplitudes(&s.amplitudes, s.eta)
}

pub(crate) fn symmetrize_amplitudes(amps: &Ket, eta: Complex64) -> Ket {
    Ket::unnormalized((0..4).map(|i| amps[i] + eta * amps[3 - i]).collect())
}

/// Default fiducial reference vector |0⟩.
pub fn default_fiducial() -> Ket {
    Ket::basis(2, 0)
}

/// ⟨f|φ⟩⟨f|ψ⟩ + η⟨f|φ̄⟩⟨f|ψ̄⟩, the reference projections realised as
/// amplitude extraction against the fiducial vector `f`.
pub fn reference_stripped_product(phi: &Ket, psi: &Ket, eta: Complex64, fiducial: &Ket) -> Result<Complex64> {
    if phi.dim() != 2 || psi.dim() != 2 || fiducial.dim() != 2 {
        return Err(Error::Shape("reference-stripped product acts on qubits".into()));
    }
    check_eta(eta)?;
    let direct = fiducial.inner(phi) * fiducial.inner(psi);
    let barred = fiducial.inner(&bar(phi)?) * fiducial.inner(&bar(psi)?);
    Ok(direct + eta * barred)
}
