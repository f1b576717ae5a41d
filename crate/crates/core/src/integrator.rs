//! Fixed-step RK4 integration, trace recording and spike analysis.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cells::{self, CellParams, CellState, CurrentBreakdown};
use crate::energetics::channel_energy_rate;
use crate::error::{Error, Result};
use crate::format::sig6;
use crate::kinetics::{self, GateId};

pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_DURATION: f64 = 4000.0;
pub const DEFAULT_TRANSIENT: f64 = 0.0;
/// The relay cell's spikes peak near -6 mV, so the detector sits below 0 mV.
pub const DEFAULT_THRESHOLD: f64 = -20.0;
pub const DEFAULT_RESET: f64 = -40.0;

/// Residual bound used when relaxing to the zero-input rest state.
pub const REST_TOL: f64 = 1e-9;

/// A constant step current applied from rest for the whole run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    /// µA/cm²
    pub i_stim: f64,
    /// °C
    pub temperature: f64,
    /// ms
    pub duration: f64,
    /// ms
    pub dt: f64,
    /// Leading time excluded from every analysis, ms.
    pub transient: f64,
}

impl Protocol {
    pub fn new(i_stim: f64, temperature: f64) -> Self {
        Protocol {
            i_stim,
            temperature,
            duration: DEFAULT_DURATION,
            dt: DEFAULT_DT,
            transient: DEFAULT_TRANSIENT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidProtocol(msg));
        if !self.i_stim.is_finite() {
            return bad(format!("stimulus must be finite, got {}", self.i_stim));
        }
        if !(self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.transient >= 0.0) {
            return bad(format!("transient must be non-negative, got {}", self.transient));
        }
        if !(self.duration > self.transient) {
            return bad(format!(
                "duration {} must exceed transient {}",
                self.duration, self.transient
            ));
        }
        if self.dt > self.duration - self.transient {
            return bad("dt longer than the analysis window".into());
        }
        kinetics::temperature_factor(self.temperature)?;
        Ok(())
    }

    /// Number of integration steps; sample count is one more.
    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    /// Index of the first sample inside the analysis window.
    pub fn window_start(&self) -> usize {
        (self.transient / self.dt).round() as usize
    }

    /// Length of the analysis window actually covered by samples, ms.
    pub fn window_ms(&self) -> f64 {
        (self.steps() - self.window_start()) as f64 * self.dt
    }
}

/// One evaluated sample handed to an [`Observer`].
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub index: usize,
    pub t: f64,
    pub state: &'a CellState,
    pub currents: &'a CurrentBreakdown,
    /// Channel energy rate, nW/cm².
    pub energy_rate: f64,
}

/// Receives every sample of an integration in time order.
pub trait Observer {
    fn observe(&mut self, sample: &Sample<'_>);
}

impl<A: Observer, B: Observer> Observer for (A, B) {
    fn observe(&mut self, sample: &Sample<'_>) {
        self.0.observe(sample);
        self.1.observe(sample);
    }
}

/// Integrates from `initial` under `protocol`, feeding each of the
/// `protocol.steps() + 1` samples to `observer`.
pub fn integrate_with<O: Observer>(
    params: &CellParams,
    protocol: &Protocol,
    initial: &CellState,
    observer: &mut O,
) -> Result<()> {
    protocol.validate()?;
    params.validate()?;
    let k = kinetics::temperature_factor(protocol.temperature)?;
    let dt = protocol.dt;
    let steps = protocol.steps();
    let mut state = *initial;
    for index in 0..=steps {
        let t = index as f64 * dt;
        if !state.is_finite() {
            return Err(Error::IntegrationFailure { t_ms: t });
        }
        let currents = cells::ionic_currents(&state, params);
        observer.observe(&Sample {
            index,
            t,
            state: &state,
            currents: &currents,
            energy_rate: channel_energy_rate(&state, params),
        });
        if index < steps {
            let d = cells::derivative_with_currents(&state, params, &currents, protocol.i_stim, k);
            state = cells::rk4_step_with(&state, &d, params, protocol.i_stim, k, dt);
        }
    }
    Ok(())
}

/// Uniformly sampled record of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub params: CellParams,
    pub protocol: Protocol,
    pub gate_ids: Vec<GateId>,
    pub states: Vec<CellState>,
    pub currents: Vec<CurrentBreakdown>,
    /// nW/cm²
    pub energy_rate: Vec<f64>,
    /// Currents of the zero-input rest state; subtracted as a per-window
    /// baseline by the charge integrals. Zero for synthetic traces.
    pub rest_currents: CurrentBreakdown,
}

impl Trace {
    fn empty(params: &CellParams, protocol: &Protocol) -> Self {
        let n = protocol.steps() + 1;
        Trace {
            params: params.clone(),
            protocol: *protocol,
            gate_ids: params.gates(),
            states: Vec::with_capacity(n),
            currents: Vec::with_capacity(n),
            energy_rate: Vec::with_capacity(n),
            rest_currents: CurrentBreakdown::default(),
        }
    }

    /// Builds a trace from externally produced series. Energy rates are
    /// recomputed from the states.
    pub fn from_parts(
        params: &CellParams,
        protocol: &Protocol,
        states: Vec<CellState>,
        currents: Vec<CurrentBreakdown>,
    ) -> Self {
        assert_eq!(states.len(), currents.len(), "series lengths differ");
        let energy_rate = states.iter().map(|s| channel_energy_rate(s, params)).collect();
        Trace {
            params: params.clone(),
            protocol: *protocol,
            gate_ids: params.gates(),
            states,
            currents,
            energy_rate,
            rest_currents: CurrentBreakdown::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.protocol.dt
    }

    pub fn time(&self, index: usize) -> f64 {
        index as f64 * self.protocol.dt
    }

    pub fn voltage(&self) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(|s| s.v)
    }

    /// Sample range `[start, end)` of the analysis window.
    pub fn window(&self) -> std::ops::Range<usize> {
        self.protocol.window_start().min(self.len())..self.len()
    }

    /// Writes the trace as CSV with one row per sample.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let family = self.params.family;
        let slots: Vec<usize> = self
            .gate_ids
            .iter()
            .map(|&g| cells::gate_slot(family, g).expect("active gates have slots"))
            .collect();
        write!(out, "t_ms,V_mV")?;
        for g in &self.gate_ids {
            write!(out, ",{}", g.name())?;
        }
        writeln!(out, ",I_l,I_Na,I_K,I_M,I_L,I_T,E_rate_nW")?;
        for (i, (s, c)) in self.states.iter().zip(&self.currents).enumerate() {
            write!(out, "{},{}", sig6(self.time(i)), sig6(s.v))?;
            for &slot in &slots {
                write!(out, ",{}", sig6(s.gates[slot]))?;
            }
            writeln!(
                out,
                ",{},{},{},{},{},{},{}",
                sig6(c.leak),
                sig6(c.na),
                sig6(c.k),
                sig6(c.m),
                sig6(c.l),
                sig6(c.t),
                sig6(self.energy_rate[i])
            )?;
        }
        Ok(())
    }
}

impl Observer for Trace {
    fn observe(&mut self, sample: &Sample<'_>) {
        self.states.push(*sample.state);
        self.currents.push(*sample.currents);
        self.energy_rate.push(sample.energy_rate);
    }
}

/// Full trace of one run started from the zero-input rest state.
pub fn integrate(params: &CellParams, protocol: &Protocol) -> Result<Trace> {
    let rest = cells::resting_state(params, REST_TOL)?;
    let mut trace = integrate_from(params, protocol, &rest.state)?;
    trace.rest_currents = cells::ionic_currents(&rest.state, params);
    Ok(trace)
}

pub fn integrate_from(params: &CellParams, protocol: &Protocol, initial: &CellState) -> Result<Trace> {
    protocol.validate()?;
    let mut trace = Trace::empty(params, protocol);
    integrate_with(params, protocol, initial, &mut trace)?;
    Ok(trace)
}

/// Upward threshold crossings inside an analysis window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeTrain {
    /// Crossing times in ms, linearly interpolated between samples.
    pub times: Vec<f64>,
    pub window_start: f64,
    pub window_end: f64,
}

impl SpikeTrain {
    pub fn count(&self) -> usize {
        self.times.len()
    }

    pub fn window_ms(&self) -> f64 {
        self.window_end - self.window_start
    }
}

/// Streaming threshold detector with hysteresis: after a crossing, the
/// voltage must fall below `reset` before the next one can register.
#[derive(Debug, Clone)]
pub struct SpikeDetector {
    threshold: f64,
    reset: f64,
    window_start: f64,
    armed: bool,
    prev: Option<(f64, f64)>,
    times: Vec<f64>,
    last_t: f64,
}

impl SpikeDetector {
    pub fn new(threshold: f64, reset: f64, window_start: f64) -> Result<Self> {
        if !(threshold > reset) {
            return Err(Error::InvalidParameter(format!(
                "spike threshold {threshold} must exceed reset {reset}"
            )));
        }
        Ok(SpikeDetector {
            threshold,
            reset,
            window_start,
            armed: true,
            prev: None,
            times: Vec::new(),
            last_t: window_start,
        })
    }

    /// Feeds the next sample; returns the crossing time if one occurred.
    pub fn push(&mut self, t: f64, v: f64) -> Option<f64> {
        let mut spike = None;
        if let Some((t0, v0)) = self.prev {
            if self.armed && v0 < self.threshold && v >= self.threshold {
                let tc = t0 + (t - t0) * (self.threshold - v0) / (v - v0);
                self.armed = false;
                if t >= self.window_start && tc >= self.window_start {
                    self.times.push(tc);
                    spike = Some(tc);
                }
            }
        }
        if v < self.reset {
            self.armed = true;
        }
        self.prev = Some((t, v));
        self.last_t = t;
        spike
    }

    pub fn finish(self) -> SpikeTrain {
        SpikeTrain {
            times: self.times,
            window_start: self.window_start,
            window_end: self.last_t.max(self.window_start),
        }
    }
}

impl Observer for SpikeDetector {
    fn observe(&mut self, sample: &Sample<'_>) {
        self.push(sample.t, sample.state.v);
    }
}

pub fn detect_spikes(trace: &Trace, threshold: f64, reset: f64) -> Result<SpikeTrain> {
    let mut det = SpikeDetector::new(threshold, reset, trace.protocol.transient)?;
    for (i, v) in trace.voltage().enumerate() {
        det.push(trace.time(i), v);
    }
    Ok(det.finish())
}

/// `(time, 1000 / ISI)` placed at the later spike of each interval.
pub fn interspike_frequencies(spikes: &SpikeTrain) -> Vec<(f64, f64)> {
    spikes
        .times
        .windows(2)
        .map(|w| (w[1], 1000.0 / (w[1] - w[0])))
        .collect()
}

/// Spike count over the analysis window, Hz.
pub fn mean_frequency(spikes: &SpikeTrain) -> f64 {
    let w = spikes.window_ms();
    if w > 0.0 {
        1000.0 * spikes.count() as f64 / w
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::registry;

    fn synthetic(values: &[f64], dt: f64) -> Trace {
        let p = registry(1).unwrap();
        let proto = Protocol {
            i_stim: 0.0,
            temperature: 36.0,
            duration: dt * (values.len() - 1) as f64,
            dt,
            transient: 0.0,
        };
        let states: Vec<CellState> = values.iter().map(|&v| CellState { v, ..Default::default() }).collect();
        let currents = vec![CurrentBreakdown::default(); values.len()];
        Trace::from_parts(&p, &proto, states, currents)
    }

    #[test]
    fn protocol_validation() {
        let mut p = Protocol::new(1.0, 36.0);
        p.validate().unwrap();
        p.transient = p.duration;
        assert!(p.validate().is_err());
        let mut p = Protocol::new(1.0, 36.0);
        p.dt = 0.0;
        assert!(p.validate().is_err());
        let p = Protocol::new(1.0, 60.0);
        assert!(matches!(p.validate(), Err(Error::TemperatureOutOfRange(_))));
        assert_eq!(Protocol::new(0.0, 36.0).steps(), 400_000);
        assert_eq!(Protocol::new(0.0, 36.0).window_ms(), 4000.0);
    }

    #[test]
    fn constant_trace_has_no_spikes() {
        let t = synthetic(&vec![-65.0; 1000], 0.1);
        assert_eq!(detect_spikes(&t, 0.0, -30.0).unwrap().count(), 0);
    }

    #[test]
    fn sine_crossing_five_times() {
        // 5 full periods of a 40 mV sine around -20 mV
        let dt = 0.01;
        let values: Vec<f64> = (0..=50_000)
            .map(|i| -20.0 - 40.0 * (2.0 * std::f64::consts::PI * i as f64 * dt / 100.0).cos())
            .collect();
        let spikes = detect_spikes(&synthetic(&values, dt), 0.0, -30.0).unwrap();
        assert_eq!(spikes.count(), 5);
        assert!(spikes.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn hysteresis_suppresses_shoulder() {
        // crosses 0, dips to -10 (above reset), crosses again, then resets
        let values = [-60.0, 10.0, -10.0, 10.0, -40.0, 10.0];
        let spikes = detect_spikes(&synthetic(&values, 1.0), 0.0, -30.0).unwrap();
        assert_eq!(spikes.count(), 2);
        assert!((spikes.times[0] - (60.0 / 70.0)).abs() < 1e-12);
    }

    #[test]
    fn detector_rejects_inverted_levels() {
        assert!(SpikeDetector::new(-30.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn frequencies_from_isis() {
        let s = SpikeTrain { times: vec![0.0, 100.0, 200.0], window_start: 0.0, window_end: 1000.0 };
        assert_eq!(interspike_frequencies(&s), vec![(100.0, 10.0), (200.0, 10.0)]);
        let one = SpikeTrain { times: vec![5.0], window_start: 0.0, window_end: 1000.0 };
        assert!(interspike_frequencies(&one).is_empty());
        let ten = SpikeTrain {
            times: (0..10).map(|i| i as f64 * 100.0).collect(),
            window_start: 0.0,
            window_end: 1000.0,
        };
        assert_eq!(mean_frequency(&ten), 10.0);
    }

    #[test]
    fn quiescent_without_input() {
        for id in [1, 9, 10] {
            let p = registry(id).unwrap();
            let proto = Protocol { duration: 1000.0, transient: 200.0, ..Protocol::new(0.0, 36.0) };
            let trace = integrate(&p, &proto).unwrap();
            assert_eq!(trace.len(), proto.steps() + 1);
            assert_eq!(detect_spikes(&trace, 0.0, -30.0).unwrap().count(), 0);
        }
    }
}
