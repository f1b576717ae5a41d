//! Energy accounting: channel energy functions, ion counting with pump
//! stoichiometry, and the Na⁺/K⁺ overlap decomposition.
//!
//! Units follow from µA/cm², mV and ms: current × voltage is nW/cm², its time
//! integral pJ/cm², and a current integral is nC/cm².

use serde::{Deserialize, Serialize};

use crate::cells::{self, CellParams, CellState, CurrentBreakdown};
use crate::error::{Error, Result};
use crate::format::{round6, sig6};
use crate::integrator::{
    self, Observer, Protocol, Sample, SpikeDetector, SpikeTrain, Trace, DEFAULT_RESET,
    DEFAULT_THRESHOLD, REST_TOL,
};

/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602e-19;
/// Avogadro constant, 1/mol.
pub const AVOGADRO: f64 = 6.022e23;
/// Na⁺ ions extruded per ATP hydrolysed by the Na⁺/K⁺ pump.
pub const NA_PER_ATP: f64 = 3.0;
/// Default free energy of ATP hydrolysis, kJ/mol.
pub const DEFAULT_F_ATP: f64 = 50.0;
/// Physiological range of the ATP free energy, kJ/mol.
pub const F_ATP_RANGE: (f64, f64) = (46.0, 62.0);

/// Electrochemical dissipation of all channels, `Σ g · open · (V - E)²`, in
/// nW/cm². The relay-cell potassium term uses the fourth power of its
/// activation like the current itself.
pub fn channel_energy_rate(state: &CellState, params: &CellParams) -> f64 {
    let v = state.v;
    let o = cells::open_fractions(state, params);
    let sq = |e: f64| (v - e) * (v - e);
    let mut e = params.g_leak * sq(params.e_leak)
        + params.g_na * o.na * sq(params.e_na)
        + params.g_k * o.k * sq(params.e_k);
    if params.g_m > 0.0 {
        e += params.g_m * o.m * sq(params.e_k);
    }
    if params.g_l > 0.0 {
        e += params.g_l * o.l * sq(params.e_ca.unwrap_or(0.0));
    }
    if params.g_t > 0.0 {
        e += params.g_t * o.t * sq(params.e_t.unwrap_or(0.0));
    }
    e
}

/// Rate of change of the circuit's electrochemical energy, `V·I_stim - E_cell`.
pub fn total_energy_rate(state: &CellState, params: &CellParams, i_stim: f64) -> f64 {
    state.v * i_stim - channel_energy_rate(state, params)
}

/// The same energy rate written as capacitor power plus battery powers,
/// `C·V·dV/dt + Σ I·E`. Returns the value and the sum of the magnitudes of
/// its terms (the scale against which round-off is judged).
pub fn battery_energy_rate(state: &CellState, params: &CellParams, i_stim: f64) -> (f64, f64) {
    let c = cells::ionic_currents(state, params);
    let dv = cells::state_derivative(state, params, i_stim, 1.0).v;
    let terms = [
        params.c * state.v * dv,
        c.leak * params.e_leak,
        c.na * params.e_na,
        c.k * params.e_k,
        c.m * params.e_k,
        c.l * params.e_ca.unwrap_or(0.0),
        c.t * params.e_t.unwrap_or(0.0),
    ];
    (terms.iter().sum(), terms.iter().map(|t| t.abs()).sum())
}

/// Largest relative disagreement between the two energy-rate forms along a
/// trace, relative to the magnitude of the terms being summed.
pub fn energy_identity_residual(trace: &Trace) -> f64 {
    let i_stim = trace.protocol.i_stim;
    trace
        .states
        .iter()
        .map(|s| {
            let (battery, scale) = battery_energy_rate(s, &trace.params, i_stim);
            let direct = total_energy_rate(s, &trace.params, i_stim);
            let scale = scale.max(direct.abs()).max(f64::MIN_POSITIVE);
            (battery - direct).abs() / scale
        })
        .fold(0.0, f64::max)
}

/// Outward part of the delayed-rectifier potassium current. The slow
/// M-current is not counted against sodium entry.
#[inline]
fn k_outward(c: &CurrentBreakdown) -> f64 {
    c.k.max(0.0)
}

/// Sodium charge neutralised by simultaneous potassium efflux.
#[inline]
fn overlap_rate(c: &CurrentBreakdown) -> f64 {
    c.na.abs().min(k_outward(c))
}

/// Sodium charge not neutralised by potassium efflux.
#[inline]
fn unbalanced_rate(c: &CurrentBreakdown) -> f64 {
    (c.na.abs() - k_outward(c)).max(0.0)
}

fn require_spikes(spikes: &SpikeTrain) -> Result<f64> {
    match spikes.count() {
        0 => Err(Error::NoSpikes),
        n => Ok(n as f64),
    }
}

/// Trapezoidal integral of `f` over the trace's analysis window divided by
/// the spike count.
fn per_spike<F: Fn(&CurrentBreakdown) -> f64>(trace: &Trace, spikes: &SpikeTrain, f: F) -> Result<f64> {
    let n = require_spikes(spikes)?;
    let w = trace.window();
    let dt = trace.dt();
    let mut area = 0.0;
    for i in w.start..w.end.saturating_sub(1) {
        area += 0.5 * (f(&trace.currents[i]) + f(&trace.currents[i + 1])) * dt;
    }
    Ok(area / n)
}

/// Na⁺ charge per spike, nC/cm².
pub fn sodium_load(trace: &Trace, spikes: &SpikeTrain) -> Result<f64> {
    per_spike(trace, spikes, |c| c.na.abs())
}

/// Delayed-rectifier K⁺ charge per spike, nC/cm².
pub fn potassium_load(trace: &Trace, spikes: &SpikeTrain) -> Result<f64> {
    per_spike(trace, spikes, |c| c.k.abs())
}

/// Charge the resting currents would carry over the analysis window, per
/// spike, for the same integrands as the loads: `(Q_Na, Q_K, Q_min, Q_overlap)`.
/// Subtracting it gives loads in excess of rest.
pub fn rest_baseline(trace: &Trace, spikes: &SpikeTrain) -> Result<[f64; 4]> {
    let n = require_spikes(spikes)?;
    let w = trace.window();
    let window_ms = w.end.saturating_sub(w.start + 1) as f64 * trace.dt();
    let b = charge_integrands(&trace.rest_currents);
    Ok([b[0], b[1], b[2], b[3]].map(|x| x * window_ms / n))
}

#[inline]
fn charge_integrands(c: &CurrentBreakdown) -> [f64; 4] {
    [c.na.abs(), c.k.abs(), unbalanced_rate(c), overlap_rate(c)]
}

/// `(Q_min, Q_overlap)` per spike, nC/cm². They sum to [`sodium_load`].
pub fn overlap_decomposition(trace: &Trace, spikes: &SpikeTrain) -> Result<(f64, f64)> {
    Ok((
        per_spike(trace, spikes, unbalanced_rate)?,
        per_spike(trace, spikes, overlap_rate)?,
    ))
}

/// Channel energy per spike, nJ/cm².
pub fn ionic_energy_per_spike(trace: &Trace, spikes: &SpikeTrain) -> Result<f64> {
    let n = require_spikes(spikes)?;
    let w = trace.window();
    let dt = trace.dt();
    let mut area = 0.0;
    for i in w.start..w.end.saturating_sub(1) {
        area += 0.5 * (trace.energy_rate[i] + trace.energy_rate[i + 1]) * dt;
    }
    // nW·ms = pJ
    Ok(area / n * 1e-3)
}

pub fn charge_separation(q_min: f64, q_na: f64) -> Result<f64> {
    if q_na == 0.0 {
        return Err(Error::ZeroDenominator("Na+ load"));
    }
    Ok(q_min / q_na)
}

/// ATP hydrolysed to pump `q_na` (nC/cm²) back out, pmol/cm².
pub fn atp_moles(q_na: f64) -> f64 {
    // nC -> C is 1e-9, mol -> pmol is 1e12
    q_na * 1e-9 / (NA_PER_ATP * ELEMENTARY_CHARGE * AVOGADRO) * 1e12
}

/// pmol/cm² × kJ/mol = nJ/cm².
pub fn metabolic_energy(atp_pmol: f64, f_atp: f64) -> f64 {
    atp_pmol * f_atp
}

pub fn f_atp_in_range(f_atp: f64) -> bool {
    (F_ATP_RANGE.0..=F_ATP_RANGE.1).contains(&f_atp)
}

/// nJ/cm² per pmol/cm² = kJ/mol.
pub fn hydrolysis_free_energy(ionic_energy: f64, atp_pmol: f64) -> Result<f64> {
    if atp_pmol == 0.0 {
        return Err(Error::ZeroDenominator("ATP"));
    }
    Ok(ionic_energy / atp_pmol)
}

/// Per-spike charge and energy totals of one run.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Loads {
    pub q_na: f64,
    pub q_k: f64,
    pub q_min: f64,
    pub q_overlap: f64,
    /// nJ/cm²
    pub ionic_energy: f64,
    /// `C × (peak - preceding trough)` averaged over spikes, nC/cm².
    pub q_min_capacitive: f64,
}

/// Streaming version of the trace integrals plus spike detection, so reports
/// never need a stored trace.
#[derive(Debug, Clone)]
pub struct LoadAccumulator {
    window_start: usize,
    dt: f64,
    capacitance: f64,
    rest: CurrentBreakdown,
    detector: SpikeDetector,
    prev: Option<[f64; 5]>,
    area: [f64; 5],
    samples_in_window: usize,
    reset: f64,
    in_spike: bool,
    peak: f64,
    trough: f64,
    amplitude_sum: f64,
    amplitude_count: usize,
}

impl LoadAccumulator {
    pub fn new(
        params: &CellParams,
        protocol: &Protocol,
        rest: CurrentBreakdown,
        threshold: f64,
        reset: f64,
    ) -> Result<Self> {
        Ok(LoadAccumulator {
            window_start: protocol.window_start(),
            dt: protocol.dt,
            capacitance: params.c,
            rest,
            detector: SpikeDetector::new(threshold, reset, protocol.transient)?,
            prev: None,
            area: [0.0; 5],
            samples_in_window: 0,
            reset,
            in_spike: false,
            peak: f64::NEG_INFINITY,
            trough: f64::INFINITY,
            amplitude_sum: 0.0,
            amplitude_count: 0,
        })
    }

    fn integrands(c: &CurrentBreakdown, energy_rate: f64) -> [f64; 5] {
        let [na, k, min, overlap] = charge_integrands(c);
        [na, k, min, overlap, energy_rate]
    }

    /// Spike train and per-spike loads, with the resting charge over the
    /// window removed when `subtract_rest` is set.
    pub fn finish(self, subtract_rest: bool) -> Result<(SpikeTrain, Loads)> {
        let spikes = self.detector.finish();
        let n = require_spikes(&spikes)?;
        let window_ms = self.samples_in_window.saturating_sub(1) as f64 * self.dt;
        let base = if subtract_rest {
            Self::integrands(&self.rest, 0.0)
        } else {
            [0.0; 5]
        };
        let per = |i: usize| (self.area[i] - base[i] * window_ms) / n;
        let q_min_capacitive = if self.amplitude_count > 0 {
            self.capacitance * self.amplitude_sum / self.amplitude_count as f64
        } else {
            f64::NAN
        };
        let loads = Loads {
            q_na: per(0),
            q_k: per(1),
            q_min: per(2),
            q_overlap: per(3),
            ionic_energy: self.area[4] / n * 1e-3,
            q_min_capacitive,
        };
        Ok((spikes, loads))
    }
}

impl Observer for LoadAccumulator {
    fn observe(&mut self, sample: &Sample<'_>) {
        let v = sample.state.v;
        let spiked = self.detector.push(sample.t, v).is_some();
        if sample.index >= self.window_start {
            let cur = Self::integrands(sample.currents, sample.energy_rate);
            if let Some(prev) = self.prev {
                for i in 0..5 {
                    self.area[i] += 0.5 * (prev[i] + cur[i]) * self.dt;
                }
            }
            self.prev = Some(cur);
            self.samples_in_window += 1;
        }

        if spiked {
            self.in_spike = true;
            self.peak = v;
        } else if self.in_spike {
            self.peak = self.peak.max(v);
            if v < self.reset {
                if self.trough.is_finite() {
                    self.amplitude_sum += self.peak - self.trough;
                    self.amplitude_count += 1;
                }
                self.in_spike = false;
                self.trough = v;
            }
        } else {
            self.trough = self.trough.min(v);
        }
    }
}

/// Options shared by every report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    /// kJ/mol
    pub f_atp: f64,
    pub threshold: f64,
    pub reset: f64,
    /// Remove the charge resting currents would carry over the window.
    pub subtract_rest: bool,
}

impl Default for Analysis {
    fn default() -> Self {
        Analysis {
            f_atp: DEFAULT_F_ATP,
            threshold: DEFAULT_THRESHOLD,
            reset: DEFAULT_RESET,
            subtract_rest: false,
        }
    }
}

/// Column names of a serialized [`EnergyReport`]; `rel_diff` is
/// [`EnergyReport::method_disagreement`].
pub const REPORT_COLUMNS: [&str; 16] = [
    "cell_id",
    "stim_uA_cm2",
    "temp_C",
    "spikes",
    "freq_Hz",
    "Q_Na_nC",
    "Q_K_nC",
    "Q_min_nC",
    "Q_overlap_nC",
    "charge_separation",
    "ATP_pmol",
    "metabolic_nJ",
    "ionic_nJ",
    "rel_diff",
    "hydrolysis_kJ_mol",
    "Q_min_capacitive_nC",
];

/// One row of per-spike flux and energy results.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub cell_id: u32,
    /// µA/cm²
    pub stimulus: f64,
    /// °C
    pub temperature: f64,
    pub spike_count: usize,
    /// Hz
    pub mean_frequency: f64,
    /// nC/cm² per spike
    pub q_na: f64,
    pub q_k: f64,
    pub q_min: f64,
    pub q_overlap: f64,
    pub charge_separation: f64,
    /// pmol/cm² per spike
    pub atp: f64,
    /// nJ/cm² per spike, ion counting
    pub metabolic_energy: f64,
    /// nJ/cm² per spike, channel energy integral
    pub ionic_energy: f64,
    /// kJ/mol
    pub hydrolysis: f64,
    /// Alternative capacitive minimum `C·ΔV`, nC/cm², for comparison only.
    pub q_min_capacitive: f64,
}

impl EnergyReport {
    pub fn from_loads(
        params: &CellParams,
        protocol: &Protocol,
        spikes: &SpikeTrain,
        loads: &Loads,
        f_atp: f64,
    ) -> Result<EnergyReport> {
        let atp = atp_moles(loads.q_na);
        Ok(EnergyReport {
            cell_id: params.cell_id,
            stimulus: protocol.i_stim,
            temperature: protocol.temperature,
            spike_count: spikes.count(),
            mean_frequency: integrator::mean_frequency(spikes),
            q_na: loads.q_na,
            q_k: loads.q_k,
            q_min: loads.q_min,
            q_overlap: loads.q_overlap,
            charge_separation: charge_separation(loads.q_min, loads.q_na)?,
            atp,
            metabolic_energy: metabolic_energy(atp, f_atp),
            ionic_energy: loads.ionic_energy,
            hydrolysis: hydrolysis_free_energy(loads.ionic_energy, atp)?,
            q_min_capacitive: loads.q_min_capacitive,
        })
    }

    /// `|metabolic - ionic| / ionic`.
    pub fn method_disagreement(&self) -> f64 {
        (self.metabolic_energy - self.ionic_energy).abs() / self.ionic_energy
    }

    fn values(&self) -> [f64; 16] {
        [
            f64::from(self.cell_id),
            self.stimulus,
            self.temperature,
            self.spike_count as f64,
            self.mean_frequency,
            self.q_na,
            self.q_k,
            self.q_min,
            self.q_overlap,
            self.charge_separation,
            self.atp,
            self.metabolic_energy,
            self.ionic_energy,
            self.method_disagreement(),
            self.hydrolysis,
            self.q_min_capacitive,
        ]
    }

    /// One CSV row under [`REPORT_COLUMNS`], six significant digits.
    pub fn csv_row(&self) -> String {
        self.values().map(sig6).join(",")
    }

    /// Flat JSON object keyed by [`REPORT_COLUMNS`].
    pub fn to_json(&self) -> serde_json::Value {
        let map = REPORT_COLUMNS
            .iter()
            .zip(self.values())
            .map(|(&k, v)| {
                let v = match k {
                    "cell_id" | "spikes" => serde_json::Value::from(v as u64),
                    _ => serde_json::Number::from_f64(round6(v)).map_or(serde_json::Value::Null, Into::into),
                };
                (k.to_string(), v)
            })
            .collect();
        serde_json::Value::Object(map)
    }
}

/// Report for `params` under `protocol`, starting from a precomputed rest
/// state. Nothing is stored beyond running sums.
pub fn report_from_rest(
    params: &CellParams,
    protocol: &Protocol,
    rest: &CellState,
    analysis: &Analysis,
) -> Result<EnergyReport> {
    let rest_currents = cells::ionic_currents(rest, params);
    let mut acc = LoadAccumulator::new(params, protocol, rest_currents, analysis.threshold, analysis.reset)?;
    integrator::integrate_with(params, protocol, rest, &mut acc)?;
    let (spikes, loads) = acc.finish(analysis.subtract_rest)?;
    EnergyReport::from_loads(params, protocol, &spikes, &loads, analysis.f_atp)
}

pub fn report_for(params: &CellParams, protocol: &Protocol, analysis: &Analysis) -> Result<EnergyReport> {
    let rest = cells::resting_state(params, REST_TOL)?;
    report_from_rest(params, protocol, &rest.state, analysis)
}

/// Report for a registered cell with default analysis settings.
pub fn energy_report(cell_id: u32, protocol: &Protocol) -> Result<EnergyReport> {
    let params = cells::registry(cell_id)?;
    report_for(&params, protocol, &Analysis::default())
}

/// Report assembled from a stored trace via the direct trace integrals.
pub fn report_from_trace(trace: &Trace, analysis: &Analysis) -> Result<EnergyReport> {
    let spikes = integrator::detect_spikes(trace, analysis.threshold, analysis.reset)?;
    let (q_min, q_overlap) = overlap_decomposition(trace, &spikes)?;
    let mut loads = Loads {
        q_na: sodium_load(trace, &spikes)?,
        q_k: potassium_load(trace, &spikes)?,
        q_min,
        q_overlap,
        ionic_energy: ionic_energy_per_spike(trace, &spikes)?,
        q_min_capacitive: f64::NAN,
    };
    if analysis.subtract_rest {
        let [na, k, min, overlap] = rest_baseline(trace, &spikes)?;
        loads.q_na -= na;
        loads.q_k -= k;
        loads.q_min -= min;
        loads.q_overlap -= overlap;
    }
    EnergyReport::from_loads(&trace.params, &trace.protocol, &spikes, &loads, analysis.f_atp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::registry;
    use approx::assert_relative_eq;

    fn pulse_trace(na: &[f64], k: &[f64], dt: f64) -> Trace {
        let p = registry(1).unwrap();
        let proto = Protocol {
            i_stim: 0.0,
            temperature: 36.0,
            duration: dt * (na.len() - 1) as f64,
            dt,
            transient: 0.0,
        };
        let states = vec![CellState::default(); na.len()];
        let currents = na
            .iter()
            .zip(k)
            .map(|(&na, &k)| CurrentBreakdown { na, k, ..Default::default() })
            .collect();
        Trace::from_parts(&p, &proto, states, currents)
    }

    fn one_spike() -> SpikeTrain {
        SpikeTrain { times: vec![1.0], window_start: 0.0, window_end: 10.0 }
    }

    /// Rectangle of `height` between 1 ms and 1 ms + `width` on a 0.01 ms grid.
    fn rect(height: f64, start: f64, width: f64) -> Vec<f64> {
        (0..=1000)
            .map(|i| {
                let t = i as f64 * 0.01;
                if t >= start - 1e-9 && t <= start + width + 1e-9 {
                    height
                } else {
                    0.0
                }
            })
            .collect()
    }

    #[test]
    fn zero_energy_at_leak_reversal_with_closed_gates() {
        for p in cells::all_cells() {
            let s = CellState { v: p.e_leak, gates: [0.0; cells::GATE_SLOTS] };
            if p.family == crate::kinetics::Family::Neocortical {
                assert_eq!(channel_energy_rate(&s, &p), 0.0);
            }
        }
    }

    #[test]
    fn energy_rate_identity_pointwise() {
        for p in cells::all_cells() {
            for v in [-85.0, -62.0, -20.0, 35.0] {
                let s = CellState::at_steady_state(&p, v);
                let (battery, scale) = battery_energy_rate(&s, &p, 0.8);
                let direct = total_energy_rate(&s, &p, 0.8);
                assert!((battery - direct).abs() <= 1e-12 * scale.max(1.0));
                assert!(channel_energy_rate(&s, &p) >= 0.0);
            }
        }
    }

    #[test]
    fn rectangular_sodium_pulse() {
        // a 1 ms pulse sampled at 0.01 ms spans 101 samples: area = 100 * 1 ms
        let na = rect(-100.0, 1.0, 1.0);
        let t = pulse_trace(&na, &vec![0.0; na.len()], 0.01);
        let q = sodium_load(&t, &one_spike()).unwrap();
        assert_relative_eq!(q, 100.0, max_relative = 1e-2);
        let (q_min, q_ov) = overlap_decomposition(&t, &one_spike()).unwrap();
        assert_eq!(q_ov, 0.0);
        assert_relative_eq!(q_min, q, epsilon = 1e-12);
    }

    #[test]
    fn rectangular_potassium_pulse() {
        let k = rect(50.0, 2.0, 2.0);
        let t = pulse_trace(&vec![0.0; k.len()], &k, 0.01);
        assert_relative_eq!(potassium_load(&t, &one_spike()).unwrap(), 100.0, max_relative = 1e-2);
    }

    #[test]
    fn disjoint_pulses_do_not_overlap() {
        let na = rect(-80.0, 1.0, 1.0);
        let k = rect(60.0, 4.0, 2.0);
        let t = pulse_trace(&na, &k, 0.01);
        let (q_min, q_ov) = overlap_decomposition(&t, &one_spike()).unwrap();
        assert_eq!(q_ov, 0.0);
        assert_relative_eq!(q_min, sodium_load(&t, &one_spike()).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn fully_overlapping_pulses() {
        let na = rect(-80.0, 1.0, 1.0);
        let k = rect(100.0, 1.0, 1.0);
        let t = pulse_trace(&na, &k, 0.01);
        let (q_min, q_ov) = overlap_decomposition(&t, &one_spike()).unwrap();
        assert_eq!(q_min, 0.0);
        assert_relative_eq!(q_ov, sodium_load(&t, &one_spike()).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn zero_spikes_is_an_error() {
        let t = pulse_trace(&[0.0; 10], &[0.0; 10], 0.01);
        let none = SpikeTrain { times: vec![], window_start: 0.0, window_end: 0.09 };
        assert_eq!(sodium_load(&t, &none), Err(Error::NoSpikes));
        assert_eq!(ionic_energy_per_spike(&t, &none), Err(Error::NoSpikes));
    }

    #[test]
    fn constant_energy_rate_rectangle() {
        let p = registry(1).unwrap();
        let proto = Protocol { i_stim: 0.0, temperature: 36.0, duration: 1000.0, dt: 1.0, transient: 0.0 };
        let mut t = Trace::from_parts(&p, &proto, vec![CellState::default(); 1001], vec![CurrentBreakdown::default(); 1001]);
        t.energy_rate = vec![1000.0; 1001];
        let spikes = SpikeTrain { times: vec![3.0], window_start: 0.0, window_end: 1000.0 };
        // 1000 nW for 1000 ms = 1e6 pJ = 1000 nJ
        assert_relative_eq!(ionic_energy_per_spike(&t, &spikes).unwrap(), 1000.0, epsilon = 1e-9);
    }

    #[test]
    fn ion_counting_arithmetic() {
        assert_eq!(atp_moles(0.0), 0.0);
        assert_relative_eq!(atp_moles(174.0), 0.60, epsilon = 0.005);
        assert_relative_eq!(atp_moles(69.0), 0.24, epsilon = 0.005);
        assert_relative_eq!(metabolic_energy(0.60, 50.0), 30.0, epsilon = 1e-12);
        assert_relative_eq!(metabolic_energy(0.24, 50.0), 12.0, epsilon = 1e-12);
        assert_eq!(metabolic_energy(0.0, 55.0), 0.0);
        assert_relative_eq!(hydrolysis_free_energy(30.0, 0.60).unwrap(), 50.0, epsilon = 1e-12);
        assert!(hydrolysis_free_energy(30.0, 0.0).is_err());
        assert_eq!(charge_separation(3.0, 3.0).unwrap(), 1.0);
        assert!(charge_separation(1.0, 0.0).is_err());
        assert!(f_atp_in_range(50.0) && f_atp_in_range(46.0) && !f_atp_in_range(70.0));
    }

    #[test]
    fn report_serialization() {
        let r = EnergyReport {
            cell_id: 9,
            stimulus: 0.44,
            temperature: 36.0,
            spike_count: 52,
            mean_frequency: 13.0,
            q_na: 71.912345,
            q_k: 78.6,
            q_min: 57.3,
            q_overlap: 14.612345,
            charge_separation: 0.8,
            atp: 0.25,
            metabolic_energy: 12.5,
            ionic_energy: 12.0,
            hydrolysis: 48.0,
            q_min_capacitive: 64.3,
        };
        let row = r.csv_row();
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), REPORT_COLUMNS.len());
        assert_eq!(&cells[..6], &["9", "0.44", "36", "52", "13", "71.9123"]);
        assert_eq!(cells[13], "0.0416667");
        let json = r.to_json();
        assert_eq!(json["cell_id"], 9);
        assert_eq!(json["spikes"], 52);
        assert_eq!(json["Q_overlap_nC"], 14.6123);
    }
}
