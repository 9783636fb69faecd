//! System-side parameters, the dressed-state diagonalization and the chirality
//! operators on the two-dimensional chiral subspace.
//!
//! Frequencies are in units of the bath linewidth λ and ħ = k_B = 1.
//!
//! The dressed basis is ordered (⇑, ⇓), so `C̄_z = diag(+1, −1)`,
//! `C̄_+ = |⇑⟩⟨⇓|` and `C̄_− = |⇓⟩⟨⇑|`. The lab (chirality) basis is ordered
//! (|C=+1⟩, |C=−1⟩).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat2, I, ONE, ZERO};

/// Physical system inputs in the rotating frame of the drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Spin-orbit splitting ω_so.
    pub omega_so: f64,
    /// Drive (electric field) frequency ω.
    pub drive: f64,
    /// Spin-electric coupling strength d·ε.
    pub d_eps: f64,
    /// Field phase α. Stored for completeness; always 0 in practice since it
    /// only rotates the initial azimuth.
    pub alpha: f64,
}

impl SystemParams {
    pub fn new(omega_so: f64, drive: f64, d_eps: f64) -> Result<Self> {
        let p = SystemParams {
            omega_so,
            drive,
            d_eps,
            alpha: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Build from the dressed splitting ω_s and the ratio Δ_so/ω_s, the way
    /// the figure scenarios are parameterized.
    pub fn from_dressed(omega_s: f64, detuning_ratio: f64, drive: f64) -> Result<Self> {
        if !(omega_s > 0.0) || !omega_s.is_finite() {
            return Err(Error::param("omega_s", "must be positive and finite"));
        }
        if !(-1.0..=1.0).contains(&detuning_ratio) {
            return Err(Error::param("delta_so_over_omega_s", "must lie in [-1, 1]"));
        }
        let delta_so = detuning_ratio * omega_s;
        let d_eps = omega_s * (1.0 - detuning_ratio * detuning_ratio).max(0.0).sqrt();
        Self::new(drive + delta_so, drive, d_eps)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_so > 0.0) || !self.omega_so.is_finite() {
            return Err(Error::param("omega_so", "must be positive and finite"));
        }
        if !self.drive.is_finite() {
            return Err(Error::param("drive", "must be finite"));
        }
        if !(self.d_eps >= 0.0) || !self.d_eps.is_finite() {
            return Err(Error::param("d_eps", "must be non-negative and finite"));
        }
        Ok(())
    }

    /// Δ_so = ω_so − ω.
    pub fn detuning(&self) -> f64 {
        self.omega_so - self.drive
    }

    /// Rotating-frame Hamiltonian `½(Δ_so σ_z + dε σ_x)` in the lab basis.
    pub fn lab_hamiltonian(&self) -> Mat2 {
        let delta = self.detuning();
        Mat2::from_real(0.5 * delta, 0.5 * self.d_eps, 0.5 * self.d_eps, -0.5 * delta)
    }
}

/// Quantities derived from the diagonalization of the rotating-frame
/// Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DressedParams {
    /// Δ_so.
    pub delta_so: f64,
    /// Dressed splitting ω_s.
    pub omega_s: f64,
    pub delta_plus: f64,
    pub delta_minus: f64,
    /// √(δ₊δ₋).
    pub delta_0: f64,
}

/// Diagonalize the rotating-frame Hamiltonian.
pub fn dressed_params(p: &SystemParams) -> Result<DressedParams> {
    let delta_so = p.detuning();
    let omega_s = delta_so.hypot(p.d_eps);
    if omega_s == 0.0 {
        return Err(Error::DegenerateDressedBasis);
    }
    let delta_plus = (omega_s + delta_so) / (2.0 * omega_s);
    let delta_minus = (omega_s - delta_so) / (2.0 * omega_s);
    Ok(DressedParams {
        delta_so,
        omega_s,
        delta_plus,
        delta_minus,
        delta_0: (delta_plus * delta_minus).sqrt(),
    })
}

impl DressedParams {
    /// `U = |ψ₊⟩⟨⇑| + |ψ₋⟩⟨⇓|` expressed in the lab basis. Its columns are
    /// `ψ₊ = (√δ₊, √δ₋)` and `ψ₋ = (−√δ₋, √δ₊)`.
    pub fn unitary(&self) -> Mat2 {
        let sp = self.delta_plus.sqrt();
        let sm = self.delta_minus.sqrt();
        Mat2::from_real(sp, -sm, sm, sp)
    }

    /// Dressed Hamiltonian `(ω_s/2) C̄_z`.
    pub fn hamiltonian(&self) -> Mat2 {
        chiral::z().scale_re(0.5 * self.omega_s)
    }
}

/// Chirality operators in the dressed basis.
pub mod chiral {
    use super::*;

    pub fn z() -> Mat2 {
        Mat2::new(ONE, ZERO, ZERO, -ONE)
    }

    /// `C̄_+ = |⇑⟩⟨⇓|`.
    pub fn plus() -> Mat2 {
        Mat2::new(ZERO, ONE, ZERO, ZERO)
    }

    /// `C̄_− = |⇓⟩⟨⇑|`.
    pub fn minus() -> Mat2 {
        Mat2::new(ZERO, ZERO, ONE, ZERO)
    }

    /// `C̄_x = (C̄_+ + C̄_−)/2`.
    pub fn x() -> Mat2 {
        (plus() + minus()).scale_re(0.5)
    }

    /// `C̄_y = (C̄_+ − C̄_−)/(2i)`.
    pub fn y() -> Mat2 {
        (plus() - minus()).scale(Complex64::new(0.0, -0.5))
    }

    /// Pauli matrices; the Bloch vector is measured against these, i.e.
    /// `σ_x = 2C̄_x`, `σ_y = 2C̄_y`, `σ_z = C̄_z`.
    pub fn sigma_x() -> Mat2 {
        Mat2::new(ZERO, ONE, ONE, ZERO)
    }

    pub fn sigma_y() -> Mat2 {
        Mat2::new(ZERO, -I, I, ZERO)
    }
}

/// A 2×2 reduced density matrix.
///
/// Construction through [`QubitState::new`] validates Hermiticity, unit trace
/// and positivity; the integrator uses the unchecked path and monitors those
/// properties itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    rho: Mat2,
}

/// Tolerances for accepting a matrix as a density matrix.
pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const POSITIVITY_TOL: f64 = 1e-9;

impl QubitState {
    pub fn new(rho: Mat2) -> Result<Self> {
        let herm = rho.hermiticity_defect();
        if herm > HERMITICITY_TOL {
            return Err(Error::NotDensityMatrix(format!("Hermiticity defect {herm:e}")));
        }
        let tr = rho.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::NotDensityMatrix(format!("trace {tr}")));
        }
        let [lo, _] = rho.hermitian_eigenvalues();
        if lo < -POSITIVITY_TOL {
            return Err(Error::NotDensityMatrix(format!("eigenvalue {lo:e}")));
        }
        Ok(QubitState { rho })
    }

    pub(crate) fn from_matrix_unchecked(rho: Mat2) -> Self {
        QubitState { rho }
    }

    /// `ρ = (I + R·σ)/2`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        if norm > 1.0 + POSITIVITY_TOL {
            return Err(Error::BlochNormExceeded(norm));
        }
        Ok(Self::from_bloch_unchecked(r))
    }

    pub(crate) fn from_bloch_unchecked(r: [f64; 3]) -> Self {
        let off = Complex64::new(0.5 * r[0], -0.5 * r[1]);
        QubitState {
            rho: Mat2::new(
                Complex64::new(0.5 * (1.0 + r[2]), 0.0),
                off,
                off.conj(),
                Complex64::new(0.5 * (1.0 - r[2]), 0.0),
            ),
        }
    }

    /// Bloch angles: `R = (sinθ cosφ, sinθ sinφ, cosθ)`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        Self::from_bloch_unchecked([
            theta.sin() * phi.cos(),
            theta.sin() * phi.sin(),
            theta.cos(),
        ])
    }

    pub fn excited() -> Self {
        Self::from_bloch_unchecked([0.0, 0.0, 1.0])
    }

    pub fn ground() -> Self {
        Self::from_bloch_unchecked([0.0, 0.0, -1.0])
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.rho
    }

    /// `R_j = Tr(ρ σ_j)`.
    pub fn bloch(&self) -> [f64; 3] {
        let m = &self.rho.0;
        let off = m[1][0];
        [2.0 * off.re, 2.0 * off.im, (m[0][0] - m[1][1]).re]
    }

    pub fn purity(&self) -> f64 {
        (self.rho * self.rho).trace().re
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        self.rho.hermitian_eigenvalues()
    }
}

/// `ρ̄ = U†ρU`: move a lab-basis density matrix into the dressed basis.
pub fn transform_to_dressed(state_lab: &QubitState, d: &DressedParams) -> Result<QubitState> {
    let checked = QubitState::new(*state_lab.matrix())?;
    let u = d.unitary();
    Ok(QubitState::from_matrix_unchecked(u.dagger() * *checked.matrix() * u))
}

/// Inverse of [`transform_to_dressed`]: `ρ = UρU†`.
pub fn transform_to_lab(state_dressed: &QubitState, d: &DressedParams) -> Result<QubitState> {
    let checked = QubitState::new(*state_dressed.matrix())?;
    let u = d.unitary();
    Ok(QubitState::from_matrix_unchecked(u * *checked.matrix() * u.dagger()))
}
