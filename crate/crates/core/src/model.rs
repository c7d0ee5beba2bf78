//! Physical parameters and the operators, Hamiltonians and generators of the
//! charger–battery system.
//!
//! The charger is a qubit with basis order `(|e⟩, |g⟩)`, so
//! `σ_z = diag(1, −1)` and `σ₋ = |g⟩⟨e|`. The battery is a `d`-level ladder
//! with `N̂ = Σ n|n⟩⟨n|` and lowering operator `B̂ = Σ |n−1⟩⟨n|`.
//!
//! All dynamics happen in the frame rotating at the charger frequency, so ω₀
//! only enters energetics. The rotating-wave treatment assumes
//! ω₀ ≫ |Ω|, g, Γ; that regime is not enforced here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{tensor_product, ComplexMatrix, Generator, C64, I, ONE, ZERO};

/// Physical constants of the charger, battery and bath.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Charger splitting ω₀ (energy unit of the battery ladder).
    pub omega0: f64,
    /// Detuning Δ_B = ω_B − ω₀.
    pub delta_b: f64,
    /// Charger–battery coupling g.
    pub g: f64,
    /// Number of battery levels.
    pub d: usize,
    /// Spontaneous emission rate Γ.
    pub gamma: f64,
    /// Constant Rabi drive Ω₀.
    pub drive: f64,
    /// Feedback gain f.
    pub f: f64,
    /// Photon collection efficiency η_c.
    pub eta_c: f64,
    /// Detector efficiency η_d.
    pub eta_d: f64,
    /// Mean thermal occupation n̄ of the uncollected channel.
    pub nbar: f64,
}

impl Default for ModelParams {
    /// Resonant zero-temperature charger with g = Γ = f = 1, no constant
    /// drive, η = 0.3 split symmetrically, and a 20-level battery.
    fn default() -> Self {
        let eta = 0.3f64;
        Self {
            omega0: 1.0,
            delta_b: 0.0,
            g: 1.0,
            d: 20,
            gamma: 1.0,
            drive: 0.0,
            f: 1.0,
            eta_c: eta.sqrt(),
            eta_d: eta.sqrt(),
            nbar: 0.0,
        }
    }
}

impl ModelParams {
    /// Validated parameter record.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        omega0: f64,
        delta_b: f64,
        g: f64,
        d: usize,
        gamma: f64,
        drive: f64,
        f: f64,
        eta_c: f64,
        eta_d: f64,
        nbar: f64,
    ) -> Result<Self> {
        let p = Self {
            omega0,
            delta_b,
            g,
            d,
            gamma,
            drive,
            f,
            eta_c,
            eta_d,
            nbar,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("omega0", self.omega0),
            ("delta_b", self.delta_b),
            ("g", self.g),
            ("gamma", self.gamma),
            ("drive", self.drive),
            ("f", self.f),
            ("eta_c", self.eta_c),
            ("eta_d", self.eta_d),
            ("nbar", self.nbar),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::param(name, format!("must be finite, got {v}")));
            }
        }
        if self.omega0 <= 0.0 {
            return Err(Error::param("omega0", "must be positive"));
        }
        if self.gamma < 0.0 {
            return Err(Error::param("gamma", "must be non-negative"));
        }
        if self.d < 2 {
            return Err(Error::param("d", format!("battery needs at least 2 levels, got {}", self.d)));
        }
        if !(0.0..=1.0).contains(&self.eta_c) {
            return Err(Error::param("eta_c", "must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.eta_d) {
            return Err(Error::param("eta_d", "must lie in [0, 1]"));
        }
        if self.nbar < 0.0 {
            return Err(Error::param("nbar", "must be non-negative"));
        }
        if self.f != 0.0 && self.eta() * self.gamma <= 0.0 {
            return Err(Error::param(
                "f",
                "feedback requires η·Γ > 0 (the feedback noise rate f²/ηΓ diverges)",
            ));
        }
        Ok(())
    }

    /// Total measurement efficiency η = η_c·η_d.
    pub fn eta(&self) -> f64 {
        self.eta_c * self.eta_d
    }

    /// Sets η_c = η_d = √η.
    pub fn with_efficiency(mut self, eta: f64) -> Self {
        self.eta_c = eta.sqrt();
        self.eta_d = eta.sqrt();
        self
    }

    /// Inverse bath temperature β = ln(1 + 1/n̄)/ω₀ (infinite at n̄ = 0).
    pub fn beta(&self) -> f64 {
        if self.nbar == 0.0 {
            f64::INFINITY
        } else {
            (1.0 + 1.0 / self.nbar).ln() / self.omega0
        }
    }

    /// E_max = ω₀(d − 1)
    pub fn e_max(&self) -> f64 {
        self.omega0 * (self.d - 1) as f64
    }

    /// Joint Hilbert-space dimension 2d.
    pub fn joint_dim(&self) -> usize {
        2 * self.d
    }

    /// Rate f²/(ηΓ) of the noise the feedback injects; zero without feedback.
    pub fn feedback_noise_rate(&self) -> f64 {
        if self.f == 0.0 {
            0.0
        } else {
            self.f * self.f / (self.eta() * self.gamma)
        }
    }
}

const EXCITED: usize = 0;
const GROUND: usize = 1;

pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
}

pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_vec(2, 2, vec![ZERO, -I, I, ZERO]).unwrap()
}

pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_real_diagonal(&[1.0, -1.0])
}

/// σ₊ = |e⟩⟨g|
pub fn sigma_plus() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(EXCITED, GROUND)] = ONE;
    m
}

/// σ₋ = |g⟩⟨e|
pub fn sigma_minus() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(GROUND, EXCITED)] = ONE;
    m
}

/// Battery number operator N̂ and lowering operator B̂.
pub fn battery_operators(d: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if d < 2 {
        return Err(Error::param("d", format!("battery needs at least 2 levels, got {d}")));
    }
    let n = ComplexMatrix::from_real_diagonal(&(0..d).map(|k| k as f64).collect::<Vec<_>>());
    let mut b = ComplexMatrix::zeros(d, d);
    for k in 1..d {
        b[(k - 1, k)] = ONE;
    }
    Ok((n, b))
}

/// Index of |c, n⟩ in the joint basis, `excited` selecting the charger state.
pub fn joint_index(d: usize, excited: bool, level: usize) -> usize {
    let c = if excited { EXCITED } else { GROUND };
    c * d + level
}

/// Operators embedded in the joint charger ⊗ battery space.
#[derive(Clone, Debug)]
pub struct JointOperators {
    pub d: usize,
    pub sigma_x: ComplexMatrix,
    pub sigma_y: ComplexMatrix,
    pub sigma_z: ComplexMatrix,
    pub sigma_plus: ComplexMatrix,
    pub sigma_minus: ComplexMatrix,
    /// I ⊗ N̂
    pub number: ComplexMatrix,
    /// I ⊗ B̂
    pub lowering: ComplexMatrix,
    /// σ₊⊗B̂ + σ₋⊗B̂†
    pub exchange: ComplexMatrix,
}

impl JointOperators {
    pub fn new(d: usize) -> Result<Self> {
        let (n, b) = battery_operators(d)?;
        let id_c = ComplexMatrix::identity(2);
        let id_b = ComplexMatrix::identity(d);
        let charger = |op: ComplexMatrix| tensor_product(&op, &id_b);
        let exchange = &tensor_product(&sigma_plus(), &b)? + &tensor_product(&sigma_minus(), &b.adjoint())?;
        Ok(Self {
            d,
            sigma_x: charger(sigma_x())?,
            sigma_y: charger(sigma_y())?,
            sigma_z: charger(sigma_z())?,
            sigma_plus: charger(sigma_plus())?,
            sigma_minus: charger(sigma_minus())?,
            number: tensor_product(&id_c, &n)?,
            lowering: tensor_product(&id_c, &b)?,
            exchange,
        })
    }
}

/// H₀ = (ω₀/2)σ_z + ω_B N̂ with ω_B = ω₀ + Δ_B.
pub fn bare_hamiltonian(p: &ModelParams) -> Result<ComplexMatrix> {
    p.validate()?;
    let ops = JointOperators::new(p.d)?;
    let mut h = ops.sigma_z.scale_real(0.5 * p.omega0);
    h.axpy(C64::new(p.omega0 + p.delta_b, 0.0), &ops.number);
    Ok(h)
}

/// H_int = g(σ₊⊗B̂ + σ₋⊗B̂†)
pub fn interaction_hamiltonian(p: &ModelParams) -> Result<ComplexMatrix> {
    p.validate()?;
    Ok(JointOperators::new(p.d)?.exchange.scale_real(p.g))
}

/// H = Δ_B N̂ + H_int + Ω σ_y in the frame rotating at ω₀.
pub fn rotating_frame_hamiltonian(p: &ModelParams, omega: f64) -> Result<ComplexMatrix> {
    p.validate()?;
    let ops = JointOperators::new(p.d)?;
    Ok(rotating_frame_from(&ops, p, omega))
}

pub(crate) fn rotating_frame_from(ops: &JointOperators, p: &ModelParams, omega: f64) -> ComplexMatrix {
    let mut h = ops.exchange.scale_real(p.g);
    h.axpy(C64::new(p.delta_b, 0.0), &ops.number);
    h.axpy(C64::new(omega, 0.0), &ops.sigma_y);
    h
}

/// Ensemble-average generator under Markovian (zero-delay) feedback, including
/// thermal noise on the uncollected channel and charger–battery detuning:
///
/// dρ/dt = −i[Δ_B N̂ + H_int + Ω₀σ_y, ρ] + i f[σ_y, σ₋ρ + ρσ₊]
///         + η_cΓ 𝒟[σ₋]ρ + (f²/ηΓ) 𝒟[σ_y]ρ
///         + (1−η_c)Γ{(1+n̄)𝒟[σ₋] + n̄𝒟[σ₊]}ρ
pub fn markovian_generator(p: &ModelParams) -> Result<Generator> {
    p.validate()?;
    let ops = JointOperators::new(p.d)?;
    let h = rotating_frame_from(&ops, p, p.drive);
    let unc = (1.0 - p.eta_c) * p.gamma;
    Generator::new(p.joint_dim())
        .with_hamiltonian(h)?
        .with_feedback_cross(p.f, ops.sigma_y.clone(), ops.sigma_minus.clone())?
        .with_dissipator(p.eta_c * p.gamma, ops.sigma_minus.clone())?
        .with_dissipator(p.feedback_noise_rate(), ops.sigma_y.clone())?
        .with_dissipator(unc * (1.0 + p.nbar), ops.sigma_minus.clone())?
        .with_dissipator(unc * p.nbar, ops.sigma_plus.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_level_battery_operators() {
        let (n, b) = battery_operators(2).unwrap();
        assert!(n.approx_eq(&ComplexMatrix::from_real_diagonal(&[0.0, 1.0]), 0.0));
        let expect = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(b.approx_eq(&expect, 0.0));
        // B̂|0⟩ = 0
        assert!((0..2).all(|i| b[(i, 0)] == ZERO));
        assert!(battery_operators(1).is_err());
    }

    #[test]
    fn ladder_commutation() {
        let (n, b) = battery_operators(20).unwrap();
        assert!(n.commutator(&b).approx_eq(&b.scale_real(-1.0), 0.0));
    }

    #[test]
    fn sigma_ladder_from_paulis() {
        let sp = &sigma_x() + &sigma_y().scale(I);
        assert!(sp.scale_real(0.5).approx_eq(&sigma_plus(), 0.0));
        let sm = &sigma_x() - &sigma_y().scale(I);
        assert!(sm.scale_real(0.5).approx_eq(&sigma_minus(), 0.0));
        assert!(sigma_plus().dot(&sigma_minus()).approx_eq(
            &ComplexMatrix::from_real_diagonal(&[1.0, 0.0]),
            0.0
        ));
    }

    #[test]
    fn interaction_matrix_element() {
        let p = ModelParams {
            g: 0.7,
            ..ModelParams::default()
        };
        let h = interaction_hamiltonian(&p).unwrap();
        let e0 = joint_index(p.d, true, 0);
        let g1 = joint_index(p.d, false, 1);
        assert_eq!(h[(e0, g1)], C64::new(0.7, 0.0));
        assert!(h.is_hermitian(0.0));
        let zero = interaction_hamiltonian(&ModelParams { g: 0.0, ..p }).unwrap();
        assert!(zero.approx_eq(&ComplexMatrix::zeros(40, 40), 0.0));
    }

    #[test]
    fn interaction_commutes_with_bare_hamiltonian() {
        for d in [2, 3, 7, 20] {
            let p = ModelParams {
                d,
                omega0: 3.0,
                g: 0.4,
                ..ModelParams::default()
            };
            let h0 = bare_hamiltonian(&p).unwrap();
            let hi = interaction_hamiltonian(&p).unwrap();
            assert!(h0.commutator(&hi).approx_eq(&ComplexMatrix::zeros(2 * d, 2 * d), 0.0));
        }
    }

    #[test]
    fn validation() {
        let base = ModelParams::default();
        assert!(base.validate().is_ok());
        for bad in [
            ModelParams { omega0: 0.0, ..base },
            ModelParams { gamma: -1.0, ..base },
            ModelParams { d: 1, ..base },
            ModelParams { eta_c: 1.5, ..base },
            ModelParams { eta_d: -0.1, ..base },
            ModelParams { nbar: -1.0, ..base },
            ModelParams { eta_c: 0.0, ..base },
            ModelParams { g: f64::NAN, ..base },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
        // no feedback: zero efficiency is fine
        assert!(ModelParams { eta_c: 0.0, f: 0.0, ..base }.validate().is_ok());
    }

    #[test]
    fn efficiency_split_and_temperature() {
        let p = ModelParams::default().with_efficiency(0.49);
        assert!((p.eta_c - 0.7).abs() < 1e-15 && (p.eta() - 0.49).abs() < 1e-15);
        assert_eq!(p.beta(), f64::INFINITY);
        let t = ModelParams { nbar: 2.0, ..p };
        // n̄ = 1/(e^{βω₀} − 1)
        assert!((1.0 / ((t.beta() * t.omega0).exp() - 1.0) - 2.0).abs() < 1e-12);
    }
}
