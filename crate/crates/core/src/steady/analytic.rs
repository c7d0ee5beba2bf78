//! Closed-form steady state for the population-inversion strategy (Ω₀ = 0).
//!
//! With no constant drive the stationary state factorizes as
//! ρ = ρ_C ⊗ ρ_B, both diagonal, with battery populations p_{n+1}/p_n = R set
//! by the charger's population ratio. Detuning drops out entirely.

use serde::Serialize;

use crate::energetics::virtual_temperature;
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Below this |ln R| the energy uses its cumulant expansion around R = 1.
const NEAR_UNIFORM: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SteadyAnalytic {
    pub sigma_z: f64,
    /// R = (1 + ⟨σ_z⟩)/(1 − ⟨σ_z⟩); infinite for perfect inversion.
    pub ratio: f64,
    pub populations: Vec<f64>,
    pub energy: f64,
    pub ergotropy: f64,
}

impl SteadyAnalytic {
    pub fn virtual_temperature(&self, omega0: f64) -> Result<f64> {
        virtual_temperature(self.ratio, omega0)
    }
}

fn require_undriven(p: &ModelParams) -> Result<()> {
    p.validate()?;
    if p.drive != 0.0 {
        return Err(Error::param(
            "drive",
            "closed-form steady state requires a zero constant drive (Ω₀ = 0)",
        ));
    }
    Ok(())
}

/// ⟨σ_z⟩ = (2f − Γ)/(Γ + 2Γn̄(1−η_c) − 2f + 2f²/ηΓ)
pub fn steady_sigma_z(p: &ModelParams) -> Result<f64> {
    require_undriven(p)?;
    let num = 2.0 * p.f - p.gamma;
    let den = p.gamma + 2.0 * p.gamma * p.nbar * (1.0 - p.eta_c) - 2.0 * p.f
        + 2.0 * p.feedback_noise_rate();
    if den == 0.0 || !den.is_finite() {
        return Err(Error::param("f", format!("⟨σ_z⟩ denominator is {den}")));
    }
    Ok((num / den).clamp(-1.0, 1.0))
}

/// f* = (Γ/2)[1 + √(1 + 4n̄(1−η_c)η)]
pub fn optimal_feedback_gain(p: &ModelParams) -> Result<f64> {
    require_undriven(p)?;
    let a = p.nbar * (1.0 - p.eta_c) * p.eta();
    Ok(0.5 * p.gamma * (1.0 + (1.0 + 4.0 * a).sqrt()))
}

/// Mean level Σ n p_n of the geometric distribution p_n ∝ Rⁿ on 0..d.
pub fn geometric_mean_level(ratio: f64, d: usize) -> f64 {
    let df = d as f64;
    if ratio.is_infinite() {
        return df - 1.0;
    }
    if ratio == 0.0 {
        return 0.0;
    }
    let x = ratio.ln();
    if x.abs() < NEAR_UNIFORM {
        // cumulants of the uniform distribution on d points: mean (d−1)/2,
        // variance (d²−1)/12, κ₃ = 0, κ₄ = −(d⁴−1)/120
        let k2 = (df * df - 1.0) / 12.0;
        let k4 = -(df.powi(4) - 1.0) / 120.0;
        return 0.5 * (df - 1.0) + k2 * x + k4 * x.powi(3) / 6.0;
    }
    // dR^d/(R^d−1) − R/(R−1), in a form that neither overflows nor cancels
    let below = |x: f64| 1.0 / (-x).exp_m1() - df / (-df * x).exp_m1();
    if x < 0.0 {
        below(x)
    } else {
        df - 1.0 - below(-x)
    }
}

fn geometric_populations(ratio: f64, d: usize) -> Vec<f64> {
    let w: Vec<f64> = if ratio > 1.0 {
        let q = 1.0 / ratio;
        (0..d).map(|n| q.powi((d - 1 - n) as i32)).collect()
    } else {
        (0..d).map(|n| ratio.powi(n as i32)).collect()
    };
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

pub fn steady_battery_analytic(p: &ModelParams) -> Result<SteadyAnalytic> {
    let sigma_z = steady_sigma_z(p)?;
    let ratio = if sigma_z >= 1.0 {
        f64::INFINITY
    } else {
        (1.0 + sigma_z) / (1.0 - sigma_z)
    };
    let energy = p.omega0 * geometric_mean_level(ratio, p.d);
    let ergotropy = if ratio > 1.0 {
        (2.0 * energy - p.e_max()).max(0.0)
    } else {
        0.0
    };
    Ok(SteadyAnalytic {
        sigma_z,
        ratio,
        populations: geometric_populations(ratio, p.d),
        energy,
        ergotropy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(f: f64, eta: f64) -> ModelParams {
        ModelParams {
            f,
            ..ModelParams::default().with_efficiency(eta)
        }
    }

    #[test]
    fn sigma_z_special_points() {
        let eta = 0.3;
        let s = steady_sigma_z(&params(1.0, eta)).unwrap();
        assert!((s - eta / (2.0 - eta)).abs() < 1e-15);
        assert_eq!(steady_sigma_z(&params(0.5, eta)).unwrap(), 0.0);
        assert_eq!(steady_sigma_z(&params(1.0, 1.0)).unwrap(), 1.0);
        let driven = ModelParams { drive: 0.1, ..params(1.0, eta) };
        assert!(steady_sigma_z(&driven).is_err());
    }

    #[test]
    fn optimal_gain() {
        assert_eq!(optimal_feedback_gain(&params(1.0, 0.3)).unwrap(), 1.0);
        let p = ModelParams {
            nbar: 2.0,
            eta_c: 0.7,
            eta_d: 0.7,
            ..ModelParams::default()
        };
        // 4·2·0.3·0.49 = 1.176
        let expect = 0.5 * (1.0 + 2.176f64.sqrt());
        assert!((optimal_feedback_gain(&p).unwrap() - expect).abs() < 1e-14);
        assert!((expect - 1.2375).abs() < 1e-4);
    }

    #[test]
    fn mean_level_limits_and_continuity() {
        for d in [2, 5, 20] {
            let df = d as f64;
            assert_eq!(geometric_mean_level(1.0, d), 0.5 * (df - 1.0));
            assert_eq!(geometric_mean_level(f64::INFINITY, d), df - 1.0);
            assert_eq!(geometric_mean_level(0.0, d), 0.0);
            // either side of the series switch
            for x in [0.99e-4, 1.01e-4, -0.99e-4, -1.01e-4] {
                let r = f64::exp(x);
                let direct: f64 = {
                    let w: Vec<f64> = (0..d).map(|n| r.powi(n as i32)).collect();
                    let z: f64 = w.iter().sum();
                    w.iter().enumerate().map(|(n, p)| n as f64 * p).sum::<f64>() / z
                };
                assert!((geometric_mean_level(r, d) - direct).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn fig2_reference_point() {
        let s = steady_battery_analytic(&params(1.0, 0.3)).unwrap();
        assert!((s.ratio - 10.0 / 7.0).abs() < 1e-14);
        assert!((s.energy / 19.0 - 0.8779).abs() < 1e-3);
        assert!((s.ergotropy - (2.0 * s.energy - 19.0)).abs() < 1e-12);
        let ratios: Vec<f64> = s.populations.windows(2).map(|w| w[1] / w[0]).collect();
        assert!(ratios.iter().all(|r| (r - 10.0 / 7.0).abs() < 1e-12));
        assert!((s.populations.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn perfect_and_absent_inversion() {
        let s = steady_battery_analytic(&params(1.0, 1.0)).unwrap();
        assert_eq!(s.energy, 19.0);
        assert_eq!(s.ergotropy, 19.0);
        assert_eq!(s.populations[19], 1.0);
        let s = steady_battery_analytic(&params(0.4, 0.3)).unwrap();
        assert!(s.ratio < 1.0 && s.ergotropy == 0.0);
        assert!(s.virtual_temperature(1.0).unwrap() > 0.0);
    }
}
