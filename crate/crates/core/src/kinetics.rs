//! Voltage-dependent gating kinetics for the three model families.
//!
//! Voltages are in mV, rates in 1/ms and time constants in ms. All rates are
//! defined at the 36 °C reference temperature; [`temperature_factor`] gives
//! the multiplier applied to every gating dynamic at other temperatures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reference temperature of the rate functions, °C.
pub const REFERENCE_TEMPERATURE: f64 = 36.0;

/// Q10 of every gating process.
pub const Q10: f64 = 2.78;

/// Half-width of the window around a removable singularity in which the
/// Taylor expansion of `u / (exp(u) - 1)` replaces the closed form.
const SINGULAR_WINDOW: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Regular-spiking, fast-spiking and intrinsically-bursting cortical cells.
    Neocortical,
    /// Thalamocortical relay cell.
    ThalamicRelay,
    /// Hippocampal fast-spiking interneuron.
    HippocampalInterneuron,
}

impl Family {
    pub fn short_name(self) -> &'static str {
        match self {
            Family::Neocortical => "neocortical",
            Family::ThalamicRelay => "TCR",
            Family::HippocampalInterneuron => "RHI",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateId {
    M,
    H,
    N,
    P,
    Q,
    R,
}

impl GateId {
    pub fn name(self) -> &'static str {
        match self {
            GateId::M => "m",
            GateId::H => "h",
            GateId::N => "n",
            GateId::P => "p",
            GateId::Q => "q",
            GateId::R => "r",
        }
    }

    /// Whether the gate opens with depolarisation.
    pub fn is_activation(self) -> bool {
        matches!(self, GateId::M | GateId::N | GateId::P | GateId::Q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateForm {
    AlphaBeta,
    SteadyStateTau,
    Instantaneous,
}

/// How a gate of `family` evolves, or `None` if the family has no such gate.
pub fn gate_form(family: Family, gate: GateId) -> Option<GateForm> {
    use GateForm::*;
    use GateId::*;
    match (family, gate) {
        (Family::Neocortical, M | H | N | Q | R) => Some(AlphaBeta),
        (Family::Neocortical, P) => Some(SteadyStateTau),
        (Family::ThalamicRelay, H | R) => Some(SteadyStateTau),
        (Family::ThalamicRelay, M | P) => Some(Instantaneous),
        (Family::HippocampalInterneuron, M) => Some(Instantaneous),
        (Family::HippocampalInterneuron, H | N) => Some(AlphaBeta),
        _ => None,
    }
}

/// `u / (exp(u) - 1)`, continuous through `u = 0` where it equals 1.
#[inline]
pub fn exprel_inv(u: f64) -> f64 {
    if u.abs() < SINGULAR_WINDOW {
        1.0 - 0.5 * u
    } else {
        u / u.exp_m1()
    }
}

/// Voltages where a rate function has the `0/0` form, as
/// `(family, gate, voltage)`; `v_t` is the cortical threshold shift.
pub fn removable_singularities(v_t: f64) -> [(Family, GateId, f64); 6] {
    [
        (Family::Neocortical, GateId::M, v_t + 13.0),
        (Family::Neocortical, GateId::M, v_t + 40.0),
        (Family::Neocortical, GateId::N, v_t + 15.0),
        (Family::Neocortical, GateId::Q, -27.0),
        (Family::HippocampalInterneuron, GateId::M, -35.0),
        (Family::HippocampalInterneuron, GateId::N, -34.0),
    ]
}

#[inline]
fn boltzmann(x: f64) -> f64 {
    1.0 / (1.0 + x.exp())
}

/// Rate functions of the cortical (RS/FS/IB) models. `vt` shifts the
/// spike-generating gates; the M- and L-current gates are unshifted.
pub mod neocortical {
    use super::{boltzmann, exprel_inv};

    #[inline]
    pub fn alpha_m(v: f64, vt: f64) -> f64 {
        1.28 * exprel_inv(-(v - vt - 13.0) / 4.0)
    }

    #[inline]
    pub fn beta_m(v: f64, vt: f64) -> f64 {
        1.4 * exprel_inv((v - vt - 40.0) / 5.0)
    }

    #[inline]
    pub fn alpha_h(v: f64, vt: f64) -> f64 {
        0.128 * (-(v - vt - 17.0) / 18.0).exp()
    }

    #[inline]
    pub fn beta_h(v: f64, vt: f64) -> f64 {
        4.0 * boltzmann(-(v - vt - 40.0) / 5.0)
    }

    #[inline]
    pub fn alpha_n(v: f64, vt: f64) -> f64 {
        0.16 * exprel_inv(-(v - vt - 15.0) / 5.0)
    }

    #[inline]
    pub fn beta_n(v: f64, vt: f64) -> f64 {
        0.5 * (-(v - vt - 10.0) / 40.0).exp()
    }

    #[inline]
    pub fn p_inf(v: f64) -> f64 {
        boltzmann(-(v + 35.0) / 10.0)
    }

    #[inline]
    pub fn tau_p(v: f64, tau_max: f64) -> f64 {
        let x = (v + 35.0) / 20.0;
        tau_max / (3.3 * x.exp() + (-x).exp())
    }

    #[inline]
    pub fn alpha_q(v: f64) -> f64 {
        0.055 * 3.8 * exprel_inv((-27.0 - v) / 3.8)
    }

    #[inline]
    pub fn beta_q(v: f64) -> f64 {
        0.94 * ((-75.0 - v) / 17.0).exp()
    }

    #[inline]
    pub fn alpha_r(v: f64) -> f64 {
        0.000457 * ((-13.0 - v) / 50.0).exp()
    }

    #[inline]
    pub fn beta_r(v: f64) -> f64 {
        0.0065 * boltzmann((-15.0 - v) / 28.0)
    }
}

/// Thalamocortical relay cell kinetics.
pub mod relay {
    use super::boltzmann;

    #[inline]
    pub fn m_inf(v: f64) -> f64 {
        boltzmann(-(v + 37.0) / 7.0)
    }

    #[inline]
    pub fn h_inf(v: f64) -> f64 {
        boltzmann((v + 41.0) / 4.0)
    }

    #[inline]
    pub fn tau_h(v: f64) -> f64 {
        let a1 = 0.128 * (-(v + 46.0) / 18.0).exp();
        let b1 = 4.0 * boltzmann(-(v + 23.0) / 5.0);
        1.0 / (a1 + b1)
    }

    #[inline]
    pub fn p_inf(v: f64) -> f64 {
        boltzmann(-(v + 60.0) / 6.2)
    }

    #[inline]
    pub fn r_inf(v: f64) -> f64 {
        boltzmann((v + 84.0) / 4.0)
    }

    #[inline]
    pub fn tau_r(v: f64) -> f64 {
        0.4 * ((-(v + 25.0) / 10.5).exp() + 28.0)
    }

    /// Potassium activation slaved to sodium inactivation.
    #[inline]
    pub fn n_from_h(h: f64) -> f64 {
        0.75 * (1.0 - h)
    }
}

/// Hippocampal interneuron kinetics (before the φ speed-up).
pub mod interneuron {
    use super::{boltzmann, exprel_inv};

    #[inline]
    pub fn alpha_m(v: f64) -> f64 {
        exprel_inv(-0.1 * (v + 35.0))
    }

    #[inline]
    pub fn beta_m(v: f64) -> f64 {
        4.0 * (-(v + 60.0) / 18.0).exp()
    }

    #[inline]
    pub fn m_inf(v: f64) -> f64 {
        let a = alpha_m(v);
        a / (a + beta_m(v))
    }

    #[inline]
    pub fn alpha_h(v: f64) -> f64 {
        0.07 * (-(v + 58.0) / 20.0).exp()
    }

    #[inline]
    pub fn beta_h(v: f64) -> f64 {
        boltzmann(-0.1 * (v + 28.0))
    }

    #[inline]
    pub fn alpha_n(v: f64) -> f64 {
        0.1 * exprel_inv(-0.1 * (v + 34.0))
    }

    #[inline]
    pub fn beta_n(v: f64) -> f64 {
        0.125 * (-(v + 44.0) / 80.0).exp()
    }
}

/// Opening and closing rates of an alpha-beta gate. `v_t` is only used by the
/// cortical spike-generating gates.
pub fn rate_pair(family: Family, gate: GateId, v: f64, v_t: f64) -> Result<(f64, f64)> {
    use GateId::*;
    let pair = match (family, gate) {
        (Family::Neocortical, M) => (neocortical::alpha_m(v, v_t), neocortical::beta_m(v, v_t)),
        (Family::Neocortical, H) => (neocortical::alpha_h(v, v_t), neocortical::beta_h(v, v_t)),
        (Family::Neocortical, N) => (neocortical::alpha_n(v, v_t), neocortical::beta_n(v, v_t)),
        (Family::Neocortical, Q) => (neocortical::alpha_q(v), neocortical::beta_q(v)),
        (Family::Neocortical, R) => (neocortical::alpha_r(v), neocortical::beta_r(v)),
        (Family::HippocampalInterneuron, M) => (interneuron::alpha_m(v), interneuron::beta_m(v)),
        (Family::HippocampalInterneuron, H) => (interneuron::alpha_h(v), interneuron::beta_h(v)),
        (Family::HippocampalInterneuron, N) => (interneuron::alpha_n(v), interneuron::beta_n(v)),
        _ => {
            return Err(Error::InvalidGate {
                family,
                gate,
                expected: "alpha-beta",
            })
        }
    };
    Ok(pair)
}

/// Steady state and time constant of a relaxation gate.
pub fn steady_tau(family: Family, gate: GateId, v: f64, tau_max: f64) -> Result<(f64, f64)> {
    match (family, gate) {
        (Family::Neocortical, GateId::P) => {
            Ok((neocortical::p_inf(v), neocortical::tau_p(v, tau_max)))
        }
        (Family::ThalamicRelay, GateId::H) => Ok((relay::h_inf(v), relay::tau_h(v))),
        (Family::ThalamicRelay, GateId::R) => Ok((relay::r_inf(v), relay::tau_r(v))),
        _ => Err(Error::InvalidGate {
            family,
            gate,
            expected: "steady-state/tau",
        }),
    }
}

/// Steady-state value of any gate the family has, whatever its form.
pub fn steady_state(family: Family, gate: GateId, v: f64, v_t: f64) -> Result<f64> {
    match gate_form(family, gate) {
        Some(GateForm::AlphaBeta) => {
            let (a, b) = rate_pair(family, gate, v, v_t)?;
            Ok(a / (a + b))
        }
        // tau_max does not affect the steady state
        Some(GateForm::SteadyStateTau) => Ok(steady_tau(family, gate, v, 1.0)?.0),
        Some(GateForm::Instantaneous) => Ok(match (family, gate) {
            (Family::ThalamicRelay, GateId::M) => relay::m_inf(v),
            (Family::ThalamicRelay, GateId::P) => relay::p_inf(v),
            _ => interneuron::m_inf(v),
        }),
        None => Err(Error::InvalidGate {
            family,
            gate,
            expected: "any",
        }),
    }
}

/// Multiplier `Q10^((T - 36)/10)` applied to every gating rate.
pub fn temperature_factor(celsius: f64) -> Result<f64> {
    if !(celsius > 0.0 && celsius < 50.0) {
        return Err(Error::TemperatureOutOfRange(celsius));
    }
    Ok(Q10.powf((celsius - REFERENCE_TEMPERATURE) / 10.0))
}

#[inline]
pub fn gate_derivative(x: f64, alpha: f64, beta: f64, k: f64) -> f64 {
    k * (alpha * (1.0 - x) - beta * x)
}

#[inline]
pub fn relaxation_derivative(x: f64, x_inf: f64, tau: f64, k: f64) -> f64 {
    k * (x_inf - x) / tau
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const ALL_GATES: [GateId; 6] = [GateId::M, GateId::H, GateId::N, GateId::P, GateId::Q, GateId::R];
    const FAMILIES: [Family; 3] = [
        Family::Neocortical,
        Family::ThalamicRelay,
        Family::HippocampalInterneuron,
    ];

    fn voltages() -> impl Iterator<Item = f64> {
        (0..=1800).map(|i| -120.0 + 0.1 * i as f64)
    }

    #[test]
    fn singular_limits() {
        let vt = -61.5;
        let (a, _) = rate_pair(Family::Neocortical, GateId::N, vt + 15.0, vt).unwrap();
        assert_relative_eq!(a, 0.16, epsilon = 1e-12);
        let (a, _) = rate_pair(Family::HippocampalInterneuron, GateId::M, -35.0, 0.0).unwrap();
        assert_relative_eq!(a, 1.0, epsilon = 1e-12);
        let (a, _) = rate_pair(Family::Neocortical, GateId::H, vt + 17.0, vt).unwrap();
        assert_eq!(a, 0.128);
        let (a, _) = rate_pair(Family::Neocortical, GateId::M, vt + 13.0, vt).unwrap();
        assert_relative_eq!(a, 1.28, epsilon = 1e-12);
        let (_, b) = rate_pair(Family::Neocortical, GateId::M, vt + 40.0, vt).unwrap();
        assert_relative_eq!(b, 1.4, epsilon = 1e-12);
        let (a, _) = rate_pair(Family::Neocortical, GateId::Q, -27.0, vt).unwrap();
        assert_relative_eq!(a, 0.209, epsilon = 1e-12);
        let (a, _) = rate_pair(Family::HippocampalInterneuron, GateId::N, -34.0, 0.0).unwrap();
        assert_relative_eq!(a, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn continuity_at_singular_voltages() {
        let vt = -58.0;
        let cases: [(Family, GateId, f64); 7] = [
            (Family::Neocortical, GateId::M, vt + 13.0),
            (Family::Neocortical, GateId::M, vt + 40.0),
            (Family::Neocortical, GateId::N, vt + 15.0),
            (Family::Neocortical, GateId::Q, -27.0),
            (Family::HippocampalInterneuron, GateId::N, -34.0),
            (Family::HippocampalInterneuron, GateId::M, -35.0),
            (Family::Neocortical, GateId::H, vt + 17.0),
        ];
        for (family, gate, v0) in cases {
            let at = rate_pair(family, gate, v0, vt).unwrap();
            for dv in [-1e-6, 1e-6, -2e-4, 2e-4] {
                let near = rate_pair(family, gate, v0 + dv, vt).unwrap();
                let tol = if dv.abs() < 1e-5 { 1e-6 } else { 1e-3 };
                assert!((near.0 - at.0).abs() < tol, "{family:?} {gate:?} alpha at {v0}+{dv}");
                assert!((near.1 - at.1).abs() < tol, "{family:?} {gate:?} beta at {v0}+{dv}");
            }
        }
    }

    #[test]
    fn rates_finite_and_non_negative() {
        for family in FAMILIES {
            for gate in ALL_GATES {
                if gate_form(family, gate) != Some(GateForm::AlphaBeta) {
                    // the interneuron's instantaneous m is built from a rate pair
                    let has_pair = (family, gate) == (Family::HippocampalInterneuron, GateId::M);
                    assert_eq!(rate_pair(family, gate, -60.0, -60.0).is_ok(), has_pair);
                    continue;
                }
                for v in voltages() {
                    let (a, b) = rate_pair(family, gate, v, -56.2).unwrap();
                    assert!(a.is_finite() && a >= 0.0, "{family:?} {gate:?} alpha({v}) = {a}");
                    assert!(b.is_finite() && b >= 0.0, "{family:?} {gate:?} beta({v}) = {b}");
                }
            }
        }
    }

    #[test]
    fn sigmoid_midpoints() {
        let (p, _) = steady_tau(Family::Neocortical, GateId::P, -35.0, 4000.0).unwrap();
        assert_eq!(p, 0.5);
        let (h, _) = steady_tau(Family::ThalamicRelay, GateId::H, -41.0, 0.0).unwrap();
        assert_eq!(h, 0.5);
        let (r, _) = steady_tau(Family::ThalamicRelay, GateId::R, -84.0, 0.0).unwrap();
        assert_eq!(r, 0.5);
        assert!(steady_tau(Family::ThalamicRelay, GateId::M, -60.0, 0.0).is_err());
    }

    #[test]
    fn steady_states_bounded_and_monotone() {
        for family in FAMILIES {
            for gate in ALL_GATES {
                if gate_form(family, gate).is_none() {
                    continue;
                }
                let mut prev: Option<f64> = None;
                for v in voltages() {
                    let x = steady_state(family, gate, v, -61.5).unwrap();
                    assert!((0.0..=1.0).contains(&x));
                    if let Some(p) = prev {
                        if gate.is_activation() {
                            assert!(x >= p - 1e-15, "{family:?} {gate:?} not rising at {v}");
                        } else {
                            assert!(x <= p + 1e-15, "{family:?} {gate:?} not falling at {v}");
                        }
                    }
                    prev = Some(x);
                }
                if gate_form(family, gate) == Some(GateForm::SteadyStateTau) {
                    for v in voltages() {
                        assert!(steady_tau(family, gate, v, 608.0).unwrap().1 > 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn temperature_factor_values() {
        assert_eq!(temperature_factor(36.0).unwrap(), 1.0);
        assert_relative_eq!(temperature_factor(26.0).unwrap(), 1.0 / 2.78, epsilon = 1e-12);
        assert_relative_eq!(temperature_factor(40.0).unwrap(), 1.505_282_173_1, epsilon = 1e-9);
        assert_relative_eq!(temperature_factor(20.0).unwrap(), 0.194_772_808_5, epsilon = 1e-9);
        assert!(temperature_factor(0.0).is_err());
        assert!(temperature_factor(50.0).is_err());
        assert!(temperature_factor(f64::NAN).is_err());
        let mut prev = 0.0;
        for i in 1..500 {
            let k = temperature_factor(i as f64 * 0.1).unwrap();
            assert!(k > prev);
            prev = k;
        }
    }

    #[test]
    fn derivative_forms() {
        let (a, b) = (0.3, 0.7);
        assert_relative_eq!(gate_derivative(a / (a + b), a, b, 1.0), 0.0, epsilon = 1e-15);
        assert_eq!(gate_derivative(0.0, 0.16, 0.0, 1.0), 0.16);
        assert_eq!(gate_derivative(0.2, a, b, 2.0), 2.0 * gate_derivative(0.2, a, b, 1.0));
        assert_eq!(relaxation_derivative(0.4, 0.4, 3.0, 1.0), 0.0);
        assert_eq!(relaxation_derivative(0.0, 0.5, 2.0, 1.0), 0.25);
        assert_eq!(relaxation_derivative(1.0, 0.5, 2.0, 2.0), -0.5);
    }
}
