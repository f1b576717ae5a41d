//! Cell parameter registry, membrane currents and the full state derivative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinetics::{self, interneuron, neocortical, relay, Family, GateId};

/// Number of gate slots carried by every state; unused slots stay at zero.
pub const GATE_SLOTS: usize = 6;

/// Every state component must remain inside `[-GATE_EPS, 1 + GATE_EPS]`.
pub const GATE_EPS: f64 = 1e-6;

/// Zero-input relaxation stops after this much simulated time.
pub const REST_MAX_MS: f64 = 3000.0;

const REST_DT: f64 = 0.01;

/// Biophysical parameters of one cell. Conductances in mS/cm², potentials in
/// mV, capacitance in µF/cm². Channels a cell does not have carry zero
/// conductance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellParams {
    pub cell_id: u32,
    pub family: Family,
    pub label: String,
    pub c: f64,
    pub g_leak: f64,
    pub g_na: f64,
    pub g_k: f64,
    pub g_m: f64,
    pub g_l: f64,
    pub g_t: f64,
    pub e_leak: f64,
    pub e_na: f64,
    pub e_k: f64,
    pub e_ca: Option<f64>,
    pub e_t: Option<f64>,
    pub v_t: Option<f64>,
    pub tau_max: Option<f64>,
    pub phi: Option<f64>,
    /// Listed for the interneuron but not used by any rate function.
    pub v_x: Option<f64>,
    /// A T-current conductance listed for a cell whose model has no T-current.
    /// Kept for reference; the simulated `g_t` is zero.
    pub ignored_g_t: Option<f64>,
}

/// Registry labels, in cell order 1..=10.
const LABELS: [&str; 10] = [
    "RS cell as observed from ferret Visual Cortex in vitro",
    "RS excitatory cell as observed from somatosensory cortex in vitro",
    "RS inhibitory cell as observed from somatosensory cortex in vitro",
    "FS cell as observed from ferret Visual Cortex in vitro",
    "FS cell as observed from somatosensory cortex in vitro",
    "IB cell as observed from guinea pig somatosensory cortex in vitro (initial burst followed by adaptive action potentials)",
    "IB cell as observed from guinea pig somatosensory cortex in vitro (repetitive bursting)",
    "IB cell as observed from cat visual cortex",
    "TCR cell as observed from mouse thalamocortical relay neuron",
    "RHI cell as observed from rat hippocampal interneuron",
];

/// g_leak, g_Na, g_K, g_M, g_L, E_leak, V_T, tau_max, C for the cortical cells.
const CORTICAL: [[f64; 9]; 8] = [
    [0.1, 50.0, 5.0, 0.07, 0.0, -70.0, -61.5, 4000.0, 0.29],
    [0.0205, 56.0, 6.0, 0.075, 0.0, -70.3, -56.2, 608.0, 1.0],
    [0.0133, 10.0, 21.0, 0.098, 0.0, -56.2, -65.4, 934.0, 1.0],
    [0.15, 50.0, 10.0, 0.0, 0.0, -70.0, -61.5, 0.0, 0.14],
    [0.038, 58.0, 3.9, 0.0787, 0.0, -70.4, -57.9, 502.0, 1.0],
    [0.01, 50.0, 5.0, 0.03, 0.1, -70.0, -56.2, 4000.0, 0.29],
    [0.01, 50.0, 5.0, 0.03, 0.2, -70.0, -56.2, 4000.0, 0.29],
    [0.1, 50.0, 4.2, 0.042, 0.12, -75.0, -58.0, 1000.0, 0.29],
];

/// Parameters of cell `cell_id` (1..=10).
pub fn registry(cell_id: u32) -> Result<CellParams> {
    let label = LABELS
        .get((cell_id as usize).wrapping_sub(1))
        .ok_or(Error::UnknownCell(cell_id))?
        .to_string();
    let params = match cell_id {
        1..=8 => {
            let [g_leak, g_na, g_k, g_m, g_l, e_leak, v_t, tau_max, c] =
                CORTICAL[cell_id as usize - 1];
            CellParams {
                cell_id,
                family: Family::Neocortical,
                label,
                c,
                g_leak,
                g_na,
                g_k,
                g_m,
                g_l,
                g_t: 0.0,
                e_leak,
                e_na: 50.0,
                e_k: -90.0,
                e_ca: (g_l > 0.0).then_some(120.0),
                e_t: None,
                v_t: Some(v_t),
                tau_max: (g_m > 0.0).then_some(tau_max),
                phi: None,
                v_x: None,
                ignored_g_t: None,
            }
        }
        9 => CellParams {
            cell_id,
            family: Family::ThalamicRelay,
            label,
            c: 1.0,
            g_leak: 0.05,
            g_na: 3.0,
            g_k: 5.0,
            g_m: 0.0,
            g_l: 0.0,
            g_t: 5.0,
            e_leak: -70.0,
            e_na: 50.0,
            e_k: -90.0,
            e_ca: None,
            e_t: Some(0.0),
            v_t: None,
            tau_max: None,
            phi: None,
            v_x: None,
            ignored_g_t: None,
        },
        10 => CellParams {
            cell_id,
            family: Family::HippocampalInterneuron,
            label,
            c: 1.0,
            g_leak: 0.1,
            g_na: 35.0,
            g_k: 9.0,
            g_m: 0.0,
            g_l: 0.0,
            g_t: 0.0,
            e_leak: -65.0,
            e_na: 55.0,
            e_k: -90.0,
            e_ca: None,
            e_t: None,
            v_t: None,
            tau_max: None,
            phi: Some(5.0),
            v_x: Some(5.0),
            ignored_g_t: Some(5.0),
        },
        _ => return Err(Error::UnknownCell(cell_id)),
    };
    Ok(params)
}

/// All ten cells in id order.
pub fn all_cells() -> Vec<CellParams> {
    (1..=10).map(|id| registry(id).expect("ids 1..=10 are registered")).collect()
}

impl CellParams {
    /// Checks the structural invariants of a parameter set.
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(format!("cell {}: {what}", self.cell_id)));
        if !(self.c > 0.0) {
            return bad("capacitance must be positive");
        }
        let g = [self.g_leak, self.g_na, self.g_k, self.g_m, self.g_l, self.g_t];
        if g.iter().any(|&g| !(g >= 0.0)) {
            return bad("conductances must be non-negative");
        }
        match self.family {
            Family::Neocortical => {
                if self.v_t.is_none() {
                    return bad("cortical cells need V_T");
                }
                if self.g_m > 0.0 && self.tau_max.is_none() {
                    return bad("an M-current needs tau_max");
                }
                if self.g_l > 0.0 && self.e_ca.is_none() {
                    return bad("an L-current needs E_Ca");
                }
                if self.g_t > 0.0 {
                    return bad("cortical cells have no T-current");
                }
            }
            Family::ThalamicRelay => {
                if !(self.g_t > 0.0) || self.g_m != 0.0 || self.g_l != 0.0 {
                    return bad("relay cells carry a T-current and no M/L currents");
                }
                if self.e_t.is_none() {
                    return bad("a T-current needs E_T");
                }
            }
            Family::HippocampalInterneuron => {
                if self.g_m != 0.0 || self.g_l != 0.0 || self.g_t != 0.0 {
                    return bad("interneurons carry only leak, Na and K currents");
                }
            }
        }
        Ok(())
    }

    /// Active gates in slot order.
    pub fn gates(&self) -> Vec<GateId> {
        use GateId::*;
        match self.family {
            Family::Neocortical => {
                let mut g = vec![M, H, N];
                if self.g_m > 0.0 {
                    g.push(P);
                }
                if self.g_l > 0.0 {
                    g.extend([Q, R]);
                }
                g
            }
            Family::ThalamicRelay => vec![H, R],
            Family::HippocampalInterneuron => vec![H, N],
        }
    }

    /// Gate-rate speed-up; 1 unless the cell lists φ.
    pub fn phi(&self) -> f64 {
        self.phi.unwrap_or(1.0)
    }
}

/// State slot of `gate` for `family`, or `None` if the family has no stored
/// state for it (instantaneous gates).
pub fn gate_slot(family: Family, gate: GateId) -> Option<usize> {
    use GateId::*;
    match (family, gate) {
        (Family::Neocortical, M) => Some(0),
        (Family::Neocortical, H) => Some(1),
        (Family::Neocortical, N) => Some(2),
        (Family::Neocortical, P) => Some(3),
        (Family::Neocortical, Q) => Some(4),
        (Family::Neocortical, R) => Some(5),
        (Family::ThalamicRelay, H) => Some(0),
        (Family::ThalamicRelay, R) => Some(1),
        (Family::HippocampalInterneuron, H) => Some(0),
        (Family::HippocampalInterneuron, N) => Some(1),
        _ => None,
    }
}

/// Membrane voltage and gate values. Slot meaning depends on the family:
/// cortical `[m, h, n, p, q, r]`, relay `[h, r, ..]`, interneuron `[h, n, ..]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CellState {
    pub v: f64,
    pub gates: [f64; GATE_SLOTS],
}

impl CellState {
    /// State at voltage `v` with every active gate at its steady state.
    pub fn at_steady_state(params: &CellParams, v: f64) -> CellState {
        let mut s = CellState { v, gates: [0.0; GATE_SLOTS] };
        let vt = params.v_t.unwrap_or(0.0);
        for gate in params.gates() {
            let slot = gate_slot(params.family, gate).expect("active gates have slots");
            s.gates[slot] = kinetics::steady_state(params.family, gate, v, vt)
                .expect("active gates have a steady state");
        }
        s
    }

    pub fn gate(&self, family: Family, gate: GateId) -> Option<f64> {
        gate_slot(family, gate).map(|i| self.gates[i])
    }

    /// `self + h * d`, component-wise.
    #[inline]
    pub fn axpy(&self, h: f64, d: &CellState) -> CellState {
        let mut out = *self;
        out.v += h * d.v;
        for (o, x) in out.gates.iter_mut().zip(d.gates.iter()) {
            *o += h * x;
        }
        out
    }

    pub fn norm(&self) -> f64 {
        (self.v * self.v + self.gates.iter().map(|x| x * x).sum::<f64>()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.gates.iter().all(|x| x.is_finite())
    }
}

/// Current densities in µA/cm², outward positive. Missing channels are zero.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CurrentBreakdown {
    pub leak: f64,
    pub na: f64,
    pub k: f64,
    pub m: f64,
    pub l: f64,
    pub t: f64,
}

impl CurrentBreakdown {
    pub fn total(&self) -> f64 {
        self.leak + self.na + self.k + self.m + self.l + self.t
    }

    /// Potassium carried by the delayed rectifier and the M-current.
    pub fn potassium(&self) -> f64 {
        self.k + self.m
    }
}

/// Conductance multipliers (open fractions) of each channel at one state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OpenFractions {
    pub na: f64,
    pub k: f64,
    pub m: f64,
    pub l: f64,
    pub t: f64,
}

pub fn open_fractions(state: &CellState, params: &CellParams) -> OpenFractions {
    let g = &state.gates;
    let v = state.v;
    match params.family {
        Family::Neocortical => OpenFractions {
            na: g[0] * g[0] * g[0] * g[1],
            k: g[2].powi(4),
            m: g[3],
            l: g[4] * g[4] * g[5],
            t: 0.0,
        },
        Family::ThalamicRelay => {
            let m = relay::m_inf(v);
            let p = relay::p_inf(v);
            OpenFractions {
                na: m * m * m * g[0],
                k: relay::n_from_h(g[0]).powi(4),
                m: 0.0,
                l: 0.0,
                t: p * p * g[1],
            }
        }
        Family::HippocampalInterneuron => {
            let m = interneuron::m_inf(v);
            OpenFractions {
                na: m * m * m * g[0],
                k: g[1].powi(4),
                m: 0.0,
                l: 0.0,
                t: 0.0,
            }
        }
    }
}

pub fn ionic_currents(state: &CellState, params: &CellParams) -> CurrentBreakdown {
    let v = state.v;
    let o = open_fractions(state, params);
    CurrentBreakdown {
        leak: params.g_leak * (v - params.e_leak),
        na: params.g_na * o.na * (v - params.e_na),
        k: params.g_k * o.k * (v - params.e_k),
        m: params.g_m * o.m * (v - params.e_k),
        l: params.g_l * o.l * (v - params.e_ca.unwrap_or(0.0)),
        t: params.g_t * o.t * (v - params.e_t.unwrap_or(0.0)),
    }
}

/// Time derivative of the full state under a constant stimulus `i_stim`
/// (µA/cm²) with every gating rate scaled by `k`.
pub fn state_derivative(state: &CellState, params: &CellParams, i_stim: f64, k: f64) -> CellState {
    derivative_with_currents(state, params, &ionic_currents(state, params), i_stim, k)
}

/// [`state_derivative`] given the already evaluated currents at `state`.
pub(crate) fn derivative_with_currents(
    state: &CellState,
    params: &CellParams,
    currents: &CurrentBreakdown,
    i_stim: f64,
    k: f64,
) -> CellState {
    let mut d = CellState {
        v: (i_stim - currents.total()) / params.c,
        gates: [0.0; GATE_SLOTS],
    };
    let v = state.v;
    let g = &state.gates;
    match params.family {
        Family::Neocortical => {
            let vt = params.v_t.unwrap_or(0.0);
            d.gates[0] = kinetics::gate_derivative(
                g[0],
                neocortical::alpha_m(v, vt),
                neocortical::beta_m(v, vt),
                k,
            );
            d.gates[1] = kinetics::gate_derivative(
                g[1],
                neocortical::alpha_h(v, vt),
                neocortical::beta_h(v, vt),
                k,
            );
            d.gates[2] = kinetics::gate_derivative(
                g[2],
                neocortical::alpha_n(v, vt),
                neocortical::beta_n(v, vt),
                k,
            );
            if params.g_m > 0.0 {
                let tau = neocortical::tau_p(v, params.tau_max.unwrap_or(1.0));
                d.gates[3] = kinetics::relaxation_derivative(g[3], neocortical::p_inf(v), tau, k);
            }
            if params.g_l > 0.0 {
                d.gates[4] = kinetics::gate_derivative(
                    g[4],
                    neocortical::alpha_q(v),
                    neocortical::beta_q(v),
                    k,
                );
                d.gates[5] = kinetics::gate_derivative(
                    g[5],
                    neocortical::alpha_r(v),
                    neocortical::beta_r(v),
                    k,
                );
            }
        }
        Family::ThalamicRelay => {
            d.gates[0] = kinetics::relaxation_derivative(g[0], relay::h_inf(v), relay::tau_h(v), k);
            d.gates[1] = kinetics::relaxation_derivative(g[1], relay::r_inf(v), relay::tau_r(v), k);
        }
        Family::HippocampalInterneuron => {
            let kp = k * params.phi();
            d.gates[0] = kinetics::gate_derivative(
                g[0],
                interneuron::alpha_h(v),
                interneuron::beta_h(v),
                kp,
            );
            d.gates[1] = kinetics::gate_derivative(
                g[1],
                interneuron::alpha_n(v),
                interneuron::beta_n(v),
                kp,
            );
        }
    }
    d
}

/// One classic fourth-order Runge-Kutta step.
#[inline]
pub fn rk4_step(state: &CellState, params: &CellParams, i_stim: f64, k: f64, dt: f64) -> CellState {
    let k1 = state_derivative(state, params, i_stim, k);
    rk4_step_with(state, &k1, params, i_stim, k, dt)
}

/// RK4 step reusing an already evaluated derivative at `state`.
#[inline]
pub(crate) fn rk4_step_with(
    state: &CellState,
    k1: &CellState,
    params: &CellParams,
    i_stim: f64,
    k: f64,
    dt: f64,
) -> CellState {
    let k2 = state_derivative(&state.axpy(0.5 * dt, k1), params, i_stim, k);
    let k3 = state_derivative(&state.axpy(0.5 * dt, &k2), params, i_stim, k);
    let k4 = state_derivative(&state.axpy(dt, &k3), params, i_stim, k);
    let mut out = *state;
    let w = dt / 6.0;
    out.v += w * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
    for i in 0..GATE_SLOTS {
        out.gates[i] += w * (k1.gates[i] + 2.0 * k2.gates[i] + 2.0 * k3.gates[i] + k4.gates[i]);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RestingState {
    pub state: CellState,
    /// Whether the derivative norm dropped below the tolerance in time.
    pub converged: bool,
    pub elapsed_ms: f64,
    pub residual: f64,
}

/// Zero-input equilibrium. The relaxation starts from the root of the
/// steady-state current-voltage curve nearest the leak reversal, which puts
/// slow gates (τ up to seconds) essentially at rest from the first step.
pub fn resting_state(params: &CellParams, tol: f64) -> Result<RestingState> {
    resting_state_from(params, steady_state_root(params), tol)
}

/// Most hyperpolarised voltage where the total steady-state ionic current
/// crosses zero with positive slope (a stable root of the I-V curve).
/// Some cells have a second, depolarised root; the hyperpolarised one is the
/// physiological rest. Falls back to the leak reversal.
fn steady_state_root(params: &CellParams) -> f64 {
    let current = |v: f64| ionic_currents(&CellState::at_steady_state(params, v), params).total();
    let step = 0.5;
    let (lo_v, hi_v) = (params.e_k.min(params.e_leak) - 20.0, 40.0);
    let n = ((hi_v - lo_v) / step) as usize;
    for i in 0..n {
        let (a, b) = (lo_v + i as f64 * step, lo_v + (i + 1) as f64 * step);
        let (fa, fb) = (current(a), current(b));
        if fa < 0.0 && fb > 0.0 {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if current(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return 0.5 * (lo + hi);
        }
    }
    params.e_leak
}

/// Relaxes from `v0` (gates at their steady states there) with no stimulus
/// until the derivative norm falls below `tol` or [`REST_MAX_MS`] elapses.
pub fn resting_state_from(params: &CellParams, v0: f64, tol: f64) -> Result<RestingState> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("rest tolerance must be positive, got {tol}")));
    }
    params.validate()?;
    let mut state = CellState::at_steady_state(params, v0);
    let steps = (REST_MAX_MS / REST_DT).round() as usize;
    for step in 0..=steps {
        let d = state_derivative(&state, params, 0.0, 1.0);
        let residual = d.norm();
        if residual < tol || step == steps {
            return Ok(RestingState {
                state,
                converged: residual < tol,
                elapsed_ms: step as f64 * REST_DT,
                residual,
            });
        }
        state = rk4_step_with(&state, &d, params, 0.0, 1.0, REST_DT);
        if !state.is_finite() {
            return Err(Error::IntegrationFailure { t_ms: (step + 1) as f64 * REST_DT });
        }
    }
    unreachable!("loop returns on its last iteration")
}
