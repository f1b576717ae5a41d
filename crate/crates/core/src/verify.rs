//! Golden values and acceptance checks.
//!
//! Reference numbers are the published per-spike results for the ten cells
//! at 36 °C under their threshold stimuli, plus the sweep spot values quoted
//! alongside them.

use std::fmt;
use std::time::Instant;

use serde::Serialize;

use crate::cells::{self, CellParams};
use crate::energetics::{self, Analysis, EnergyReport};
use crate::error::{Error, Result};
use crate::format::sig6;
use crate::integrator::{self, Protocol, Trace};
use crate::kinetics::{self, Family};
use crate::sweep::{self, SweepSettings};

/// Published per-spike results of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Golden {
    pub cell_id: u32,
    /// µA/cm²
    pub stimulus: f64,
    pub frequency: f64,
    pub q_na: f64,
    pub q_k: f64,
    pub q_min: f64,
    pub q_overlap: f64,
    pub separation: f64,
    pub atp: f64,
    pub metabolic: f64,
    pub ionic: f64,
    pub hydrolysis: f64,
}

const fn g(cell_id: u32, stimulus: f64, v: [f64; 10]) -> Golden {
    Golden {
        cell_id,
        stimulus,
        frequency: v[0],
        q_na: v[1],
        q_k: v[2],
        q_min: v[3],
        q_overlap: v[4],
        separation: v[5],
        atp: v[6],
        metabolic: v[7],
        ionic: v[8],
        hydrolysis: v[9],
    }
}

// freq, Na, K, min, overlap, separation, ATP, metabolic, ionic, hydrolysis
#[rustfmt::skip]
pub const REFERENCE: [Golden; 10] = [
    g(1, 1.4,   [5.0,  174.0, 141.0, 65.0,  109.0, 0.38, 0.60, 30.0, 30.0, 49.14]),
    g(2, 0.7,   [5.0,  207.0, 214.0, 108.0, 99.0,  0.52, 0.72, 36.0, 34.0, 47.03]),
    g(3, 0.15,  [6.0,  134.0, 150.0, 70.0,  64.0,  0.52, 0.46, 23.0, 20.0, 43.93]),
    g(4, 1.75,  [54.0, 162.0, 156.0, 22.0,  140.0, 0.14, 0.56, 28.0, 24.0, 41.96]),
    g(5, 0.8,   [2.0,  217.0, 197.0, 129.0, 88.0,  0.60, 0.75, 38.0, 38.0, 51.15]),
    g(6, 0.25,  [2.0,  132.0, 137.0, 37.0,  95.0,  0.28, 0.46, 23.0, 23.0, 49.70]),
    g(7, 0.25,  [15.0, 103.0, 117.0, 15.0,  88.0,  0.14, 0.36, 18.0, 18.0, 51.91]),
    g(8, 2.25,  [7.0,  147.0, 133.0, 51.0,  96.0,  0.35, 0.51, 25.0, 30.0, 59.95]),
    g(9, 0.44,  [15.0, 69.0,  79.0,  55.0,  14.0,  0.79, 0.24, 12.0, 12.0, 48.78]),
    g(10, 0.20, [9.0,  163.0, 127.0, 125.0, 38.0,  0.77, 0.56, 28.0, 23.0, 40.82]),
];

pub fn golden(cell_id: u32) -> Result<&'static Golden> {
    REFERENCE
        .iter()
        .find(|g| g.cell_id == cell_id)
        .ok_or(Error::UnknownCell(cell_id))
}

/// The reference protocol of a cell: its threshold stimulus at 36 °C.
pub fn reference_protocol(cell_id: u32) -> Result<Protocol> {
    Ok(Protocol::new(golden(cell_id)?.stimulus, kinetics::REFERENCE_TEMPERATURE))
}

/// Acceptance bound applied to a measured value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Bound {
    /// `|value - expected| <= r·|expected|`
    Relative(f64),
    /// `|value - expected| <= a`
    Absolute(f64),
    /// The looser of a relative and an absolute bound.
    RelativeOrAbsolute(f64, f64),
    /// `lo <= value <= hi`
    Within(f64, f64),
    AtLeast(f64),
    AtMost(f64),
    /// Strictly below.
    Below(f64),
}

impl Bound {
    pub fn admits(self, value: f64, expected: f64) -> bool {
        if !value.is_finite() {
            return false;
        }
        let dev = (value - expected).abs();
        match self {
            Bound::Relative(r) => dev <= r * expected.abs(),
            Bound::Absolute(a) => dev <= a,
            Bound::RelativeOrAbsolute(r, a) => dev <= (r * expected.abs()).max(a),
            Bound::Within(lo, hi) => (lo..=hi).contains(&value),
            Bound::AtLeast(x) => value >= x,
            Bound::AtMost(x) => value <= x,
            Bound::Below(x) => value < x,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Bound::Relative(r) => write!(f, "±{}%", sig6(r * 100.0)),
            Bound::Absolute(a) => write!(f, "±{}", sig6(a)),
            Bound::RelativeOrAbsolute(r, a) => write!(f, "±max({}%, {})", sig6(r * 100.0), sig6(a)),
            Bound::Within(lo, hi) => write!(f, "in [{}, {}]", sig6(lo), sig6(hi)),
            Bound::AtLeast(x) => write!(f, ">= {}", sig6(x)),
            Bound::AtMost(x) => write!(f, "<= {}", sig6(x)),
            Bound::Below(x) => write!(f, "< {}", sig6(x)),
        }
    }
}

/// One measured quantity against its bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub subject: String,
    pub metric: String,
    pub value: f64,
    pub expected: f64,
    pub bound: Bound,
    pub passed: bool,
}

impl Check {
    pub fn new(subject: impl Into<String>, metric: impl Into<String>, value: f64, expected: f64, bound: Bound) -> Check {
        Check {
            subject: subject.into(),
            metric: metric.into(),
            value,
            expected,
            passed: bound.admits(value, expected),
            bound,
        }
    }

    /// A check with no reference value, only a bound.
    pub fn bounded(subject: impl Into<String>, metric: impl Into<String>, value: f64, bound: Bound) -> Check {
        Check::new(subject, metric, value, f64::NAN, bound)
    }

    fn failed(subject: impl Into<String>, metric: impl Into<String>, bound: Bound) -> Check {
        Check::new(subject, metric, f64::NAN, f64::NAN, bound)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} = {}", self.subject, self.metric, sig6(self.value))?;
        if self.expected.is_nan() {
            write!(f, " (want {})", self.bound)
        } else {
            write!(f, " (want {} {})", sig6(self.expected), self.bound)
        }
    }
}

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub elapsed_s: f64,
}

impl Criterion {
    fn new(id: u8, title: &'static str) -> Criterion {
        Criterion {
            id,
            title,
            checks: Vec::new(),
            notes: Vec::new(),
            elapsed_s: 0.0,
        }
    }

    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// `PASS criterion N: title (k/n checks, t s)`
    pub fn summary_line(&self) -> String {
        let ok = self.checks.iter().filter(|c| c.passed).count();
        format!(
            "{} criterion {}: {} ({}/{} checks, {:.1} s)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            ok,
            self.checks.len(),
            self.elapsed_s
        )
    }

    fn push(&mut self, check: Check) {
        self.checks.push(check);
    }
}

fn timed(id: u8, title: &'static str, body: impl FnOnce(&mut Criterion)) -> Criterion {
    let start = Instant::now();
    let mut c = Criterion::new(id, title);
    body(&mut c);
    c.elapsed_s = start.elapsed().as_secs_f64();
    c
}

fn cell(id: u32) -> String {
    format!("cell {id}")
}

/// Quantities read off one stored reference trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceAudit {
    pub cell_id: u32,
    pub identity_residual: f64,
    pub q_na: f64,
    pub q_min: f64,
    pub q_overlap: f64,
    pub gate_min: f64,
    pub gate_max: f64,
}

pub fn audit_trace(trace: &Trace, analysis: &Analysis) -> Result<TraceAudit> {
    let spikes = integrator::detect_spikes(trace, analysis.threshold, analysis.reset)?;
    let (q_min, q_overlap) = energetics::overlap_decomposition(trace, &spikes)?;
    let slots: Vec<usize> = trace
        .gate_ids
        .iter()
        .filter_map(|&g| cells::gate_slot(trace.params.family, g))
        .collect();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in &trace.states {
        for &i in &slots {
            lo = lo.min(s.gates[i]);
            hi = hi.max(s.gates[i]);
        }
    }
    Ok(TraceAudit {
        cell_id: trace.params.cell_id,
        identity_residual: energetics::energy_identity_residual(trace),
        q_na: energetics::sodium_load(trace, &spikes)?,
        q_min,
        q_overlap,
        gate_min: lo,
        gate_max: hi,
    })
}

/// Largest jump between neighbouring samples of any rate function on a
/// 10⁻⁶ mV lattice spanning ±10⁻³ mV around each removable singularity.
pub fn singularity_jump(v_t: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for (family, gate, v0) in kinetics::removable_singularities(v_t) {
        let vt = if family == Family::Neocortical { v_t } else { 0.0 };
        let rate = |v: f64| kinetics::rate_pair(family, gate, v, vt).expect("singular gates are alpha-beta");
        let mut prev = rate(v0 - 1e-3);
        for k in -999..=1000 {
            let cur = rate(v0 + k as f64 * 1e-6);
            worst = worst.max((cur.0 - prev.0).abs()).max((cur.1 - prev.1).abs());
            prev = cur;
        }
    }
    worst
}

/// Stimulus of the 36 °C cross-section, µA/cm².
pub const SPOT_STIMULUS: f64 = 7.0;

/// The cells to check and the analysis settings to use.
#[derive(Debug, Clone)]
pub struct Suite {
    pub cells: Vec<CellParams>,
    pub analysis: Analysis,
}

impl Suite {
    pub fn new(cells: Vec<CellParams>) -> Suite {
        Suite {
            cells,
            analysis: Analysis::default(),
        }
    }

    /// All ten registered cells.
    pub fn all() -> Suite {
        Suite::new(cells::all_cells())
    }

    /// Cells 1, 5 and 9.
    pub fn quick() -> Suite {
        Suite::new([1, 5, 9].iter().map(|&i| cells::registry(i).expect("registered")).collect())
    }

    fn find(&self, id: u32) -> Option<&CellParams> {
        self.cells.iter().find(|p| p.cell_id == id)
    }

    fn report(&self, params: &CellParams, protocol: &Protocol) -> Result<EnergyReport> {
        energetics::report_for(params, protocol, &self.analysis)
    }

    /// Streaming reports at each cell's reference protocol.
    pub fn reports(&self) -> Vec<(u32, Result<EnergyReport>)> {
        self.cells
            .iter()
            .map(|p| {
                let r = reference_protocol(p.cell_id).and_then(|proto| self.report(p, &proto));
                (p.cell_id, r)
            })
            .collect()
    }

    /// Stored reference traces, audited one at a time so only one is alive.
    pub fn audits(&self) -> Vec<(u32, Result<TraceAudit>)> {
        self.cells
            .iter()
            .map(|p| {
                let r = reference_protocol(p.cell_id)
                    .and_then(|proto| integrator::integrate(p, &proto))
                    .and_then(|t| audit_trace(&t, &self.analysis));
                (p.cell_id, r)
            })
            .collect()
    }

    pub fn reproduction(&self, reports: &[(u32, Result<EnergyReport>)], elapsed_s: f64) -> Criterion {
        let mut c = timed(1, "reference table reproduction", |c| {
            for (id, r) in reports {
                let gold = match golden(*id) {
                    Ok(g) => g,
                    Err(e) => {
                        c.notes.push(format!("{}: {e}", cell(*id)));
                        continue;
                    }
                };
                let r = match r {
                    Ok(r) => r,
                    Err(e) => {
                        c.push(Check::failed(cell(*id), format!("report ({e})"), Bound::Absolute(0.0)));
                        continue;
                    }
                };
                let q = Bound::Relative(0.15);
                let rows = [
                    ("q_na", r.q_na, gold.q_na, q),
                    ("q_k", r.q_k, gold.q_k, q),
                    ("q_min", r.q_min, gold.q_min, q),
                    ("q_overlap", r.q_overlap, gold.q_overlap, q),
                    ("charge_separation", r.charge_separation, gold.separation, Bound::Absolute(0.08)),
                    ("atp_pmol", r.atp, gold.atp, q),
                    ("metabolic_nJ", r.metabolic_energy, gold.metabolic, q),
                    ("ionic_nJ", r.ionic_energy, gold.ionic, q),
                    ("hydrolysis_kJ_mol", r.hydrolysis, gold.hydrolysis, Bound::Relative(0.10)),
                    ("freq_Hz", r.mean_frequency, gold.frequency, Bound::RelativeOrAbsolute(0.20, 1.0)),
                ];
                for (metric, value, expected, bound) in rows {
                    c.push(Check::new(cell(*id), metric, value, expected, bound));
                }
            }
        });
        c.elapsed_s += elapsed_s;
        c.push(Check::bounded("all cells", "runtime_s", c.elapsed_s, Bound::AtMost(120.0)));
        c
    }

    pub fn cross_method(reports: &[(u32, Result<EnergyReport>)]) -> Criterion {
        timed(2, "ion counting agrees with channel energy", |c| {
            for (id, r) in reports {
                let value = r.as_ref().map_or(f64::NAN, |r| r.method_disagreement());
                c.push(Check::bounded(cell(*id), "|metabolic - ionic| / ionic", value, Bound::AtMost(0.25)));
            }
        })
    }

    pub fn energy_identity(audits: &[(u32, Result<TraceAudit>)]) -> Criterion {
        timed(3, "energy-rate identity on every sample", |c| {
            for (id, a) in audits {
                let value = a.as_ref().map_or(f64::NAN, |a| a.identity_residual);
                c.push(Check::bounded(cell(*id), "max relative residual", value, Bound::AtMost(1e-6)));
            }
        })
    }

    pub fn decomposition(
        audits: &[(u32, Result<TraceAudit>)],
        reports: &[(u32, Result<EnergyReport>)],
    ) -> Criterion {
        let rel = |q_na: f64, q_min: f64, q_ov: f64| (q_na - (q_min + q_ov)).abs() / q_na.abs();
        timed(4, "sodium load = minimum + overlap", |c| {
            for (id, a) in audits {
                let value = a.as_ref().map_or(f64::NAN, |a| rel(a.q_na, a.q_min, a.q_overlap));
                c.push(Check::bounded(cell(*id), "trace relative gap", value, Bound::AtMost(1e-6)));
            }
            for (id, r) in reports {
                let value = r.as_ref().map_or(f64::NAN, |r| rel(r.q_na, r.q_min, r.q_overlap));
                c.push(Check::bounded(cell(*id), "streaming relative gap", value, Bound::AtMost(1e-6)));
            }
        })
    }

    fn ionic_at(&self, id: u32, temperature: f64, stimulus: f64) -> Result<EnergyReport> {
        let p = self.find(id).ok_or(Error::UnknownCell(id))?;
        self.report(p, &Protocol::new(stimulus, temperature))
    }

    pub fn sweep_spots(&self) -> Criterion {
        timed(5, "sweep spot values", |c| {
            let value = |r: &Result<EnergyReport>, f: fn(&EnergyReport) -> f64| r.as_ref().map_or(f64::NAN, f);
            if self.find(10).is_some() {
                let cold = self.ionic_at(10, 20.0, 2.25);
                c.push(Check::new("cell 10 (20 °C, 2.25)", "freq_Hz", value(&cold, |r| r.mean_frequency), 55.0, Bound::Absolute(8.0)));
                c.push(Check::new("cell 10 (20 °C, 2.25)", "ionic_nJ", value(&cold, |r| r.ionic_energy), 58.0, Bound::Absolute(9.0)));
                let hot = self.ionic_at(10, 40.0, 10.0);
                let ratio = value(&cold, |r| r.ionic_energy) / value(&hot, |r| r.ionic_energy);
                c.push(Check::bounded("cell 10 (20 °C, 2.25)/(40 °C, 10)", "ionic ratio", ratio, Bound::AtLeast(4.0)));
                let fr = value(&hot, |r| r.mean_frequency) / value(&cold, |r| r.mean_frequency);
                c.notes.push(format!("cell 10 frequency ratio (40 °C, 10)/(20 °C, 2.25) = {}", sig6(fr)));
            }
            if self.find(8).is_some() {
                let cold = self.ionic_at(8, 20.0, 2.25);
                let hot = self.ionic_at(8, 40.0, 2.25);
                let (ec, eh) = (value(&cold, |r| r.ionic_energy), value(&hot, |r| r.ionic_energy));
                c.push(Check::bounded("cell 8 (20 °C, 2.25)/(40 °C, 2.25)", "ionic ratio", ec / eh, Bound::AtLeast(6.0)));
                c.notes.push(format!("cell 8 ionic energy {} nJ at 20 °C, {} nJ at 40 °C", sig6(ec), sig6(eh)));
            }
            for p in &self.cells {
                let e = value(&self.ionic_at(p.cell_id, 36.0, SPOT_STIMULUS), |r| r.ionic_energy);
                let subject = format!("cell {} (36 °C, 7)", p.cell_id);
                let check = match p.cell_id {
                    9 => Check::new(subject, "ionic_nJ", e, 8.42, Bound::Absolute(1.5)),
                    5 => Check::new(subject, "ionic_nJ", e, 26.8, Bound::Absolute(4.0)),
                    2 => Check::new(subject, "ionic_nJ", e, 28.5, Bound::Absolute(4.0)),
                    _ => Check::bounded(subject, "ionic_nJ", e, Bound::Within(13.0, 21.0)),
                };
                c.push(check);
            }
        })
    }

    pub fn temperature_trends(&self) -> Criterion {
        timed(6, "loads and energy fall from 20 °C to 40 °C", |c| {
            for p in &self.cells {
                for stim in [2.25, 5.0, 10.0] {
                    let subject = format!("cell {} stim {}", p.cell_id, sig6(stim));
                    let cold = self.report(p, &Protocol::new(stim, 20.0));
                    let hot = self.report(p, &Protocol::new(stim, 40.0));
                    let (cold, hot) = match (cold, hot) {
                        (Ok(a), Ok(b)) => (a, b),
                        (a, b) => {
                            let why = a.err().or(b.err()).map(|e| e.to_string()).unwrap_or_default();
                            c.push(Check::failed(subject, format!("reports ({why})"), Bound::Absolute(0.0)));
                            continue;
                        }
                    };
                    let drop = |a: f64, b: f64| 1.0 - b / a;
                    c.push(Check::bounded(&subject, "ionic 40/20", hot.ionic_energy / cold.ionic_energy, Bound::Below(1.0)));
                    c.push(Check::bounded(&subject, "overlap reduction", drop(cold.q_overlap, hot.q_overlap), Bound::AtLeast(0.80)));
                    c.push(Check::bounded(&subject, "Na reduction", drop(cold.q_na, hot.q_na), Bound::AtLeast(0.70)));
                    c.push(Check::bounded(&subject, "K reduction", drop(cold.q_k, hot.q_k), Bound::AtLeast(0.70)));
                }
            }
        })
    }

    pub fn hygiene(&self, audits: &[(u32, Result<TraceAudit>)], reports: &[(u32, Result<EnergyReport>)]) -> Criterion {
        timed(7, "numerical hygiene", |c| {
            for (p, (_, coarse)) in self.cells.iter().zip(reports) {
                let subject = cell(p.cell_id);
                let fine = reference_protocol(p.cell_id).and_then(|mut proto| {
                    proto.dt *= 0.5;
                    self.report(p, &proto)
                });
                match (coarse, &fine) {
                    (Ok(a), Ok(b)) => {
                        let rel = |x: f64, y: f64| (x - y).abs() / x.abs();
                        c.push(Check::bounded(&subject, "dt/2 ionic change", rel(a.ionic_energy, b.ionic_energy), Bound::Below(1e-3)));
                        c.push(Check::bounded(&subject, "dt/2 frequency change", rel(a.mean_frequency, b.mean_frequency), Bound::Below(5e-3)));
                    }
                    _ => c.push(Check::failed(&subject, "dt/2 reports", Bound::Absolute(0.0))),
                }
            }
            for (id, a) in audits {
                let (lo, hi) = a.as_ref().map_or((f64::NAN, f64::NAN), |a| (a.gate_min, a.gate_max));
                c.push(Check::bounded(cell(*id), "gate min", lo, Bound::AtLeast(-cells::GATE_EPS)));
                c.push(Check::bounded(cell(*id), "gate max", hi, Bound::AtMost(1.0 + cells::GATE_EPS)));
            }
            let mut thresholds: Vec<f64> = self.cells.iter().filter_map(|p| p.v_t).collect();
            thresholds.dedup();
            if thresholds.is_empty() {
                thresholds.push(-60.0);
            }
            let jump = thresholds.iter().map(|&vt| singularity_jump(vt)).fold(0.0, f64::max);
            c.push(Check::bounded("rate functions", "max jump near singularities", jump, Bound::AtMost(1e-6)));

            if let Some(p) = self.cells.first() {
                let again = reference_protocol(p.cell_id).and_then(|proto| self.report(p, &proto));
                let same = match (&reports[0].1, &again) {
                    (Ok(a), Ok(b)) => bitwise_equal(a, b),
                    _ => false,
                };
                c.push(Check::bounded(cell(p.cell_id), "rerun bit-identical", f64::from(u8::from(same)), Bound::AtLeast(1.0)));
                let settings = SweepSettings::default();
                let (t, s) = ([30.0, 38.0], [2.25, 4.0]);
                let same = match (
                    sweep::run_sweep(p.cell_id, &t, &s, &settings),
                    sweep::run_sweep_sequential(p.cell_id, &t, &s, &settings),
                ) {
                    (Ok(a), Ok(b)) => a == b,
                    _ => false,
                };
                c.push(Check::bounded(cell(p.cell_id), "sweep equals sequential", f64::from(u8::from(same)), Bound::AtLeast(1.0)));
            }
        })
    }

    pub fn hydrolysis_range(reports: &[(u32, Result<EnergyReport>)]) -> Criterion {
        timed(8, "hydrolysis free energy range and extremes", |c| {
            let ok: Vec<&EnergyReport> = reports.iter().filter_map(|(_, r)| r.as_ref().ok()).collect();
            for (id, r) in reports {
                let value = r.as_ref().map_or(f64::NAN, |r| r.hydrolysis);
                c.push(Check::bounded(cell(*id), "hydrolysis_kJ_mol", value, Bound::Within(38.0, 62.0)));
            }
            let by = |f: fn(f64, f64) -> bool| {
                ok.iter()
                    .copied()
                    .reduce(|a, b| if f(b.hydrolysis, a.hydrolysis) { b } else { a })
            };
            let min = by(|x, y| x < y);
            let max = by(|x, y| x > y);
            let h = |id: u32| ok.iter().find(|r| r.cell_id == id).map_or(f64::NAN, |r| r.hydrolysis);
            c.push(Check::new("cell 10", "hydrolysis_kJ_mol", h(10), 40.82, Bound::Absolute(4.0)));
            c.push(Check::new("cell 8", "hydrolysis_kJ_mol", h(8), 59.95, Bound::Absolute(6.0)));
            let min_id = min.map_or(0, |r| r.cell_id);
            let max_id = max.map_or(0, |r| r.cell_id);
            c.push(Check::new("all cells", "argmin hydrolysis", f64::from(min_id), 10.0, Bound::Absolute(0.0)));
            c.push(Check::new("all cells", "argmax hydrolysis", f64::from(max_id), 8.0, Bound::Absolute(0.0)));
        })
    }

    /// Criteria 1 to 4 on the suite's cells, plus 8 when all ten are present.
    pub fn run_reference(&self) -> Vec<Criterion> {
        let start = Instant::now();
        let reports = self.reports();
        let elapsed = start.elapsed().as_secs_f64();
        let start = Instant::now();
        let audits = self.audits();
        let mut identity = Suite::energy_identity(&audits);
        identity.elapsed_s += start.elapsed().as_secs_f64();
        let mut out = vec![
            self.reproduction(&reports, elapsed),
            Suite::cross_method(&reports),
            identity,
            Suite::decomposition(&audits, &reports),
        ];
        if self.cells.len() == REFERENCE.len() {
            out.push(Suite::hydrolysis_range(&reports));
        }
        out
    }

    /// Every criterion, in order.
    pub fn run_all(&self) -> Vec<Criterion> {
        let start = Instant::now();
        let reports = self.reports();
        let elapsed = start.elapsed().as_secs_f64();
        let start = Instant::now();
        let audits = self.audits();
        let mut identity = Suite::energy_identity(&audits);
        identity.elapsed_s += start.elapsed().as_secs_f64();
        vec![
            self.reproduction(&reports, elapsed),
            Suite::cross_method(&reports),
            identity,
            Suite::decomposition(&audits, &reports),
            self.sweep_spots(),
            self.temperature_trends(),
            self.hygiene(&audits, &reports),
            Suite::hydrolysis_range(&reports),
        ]
    }
}

fn bitwise_equal(a: &EnergyReport, b: &EnergyReport) -> bool {
    let fields = |r: &EnergyReport| {
        [
            r.stimulus,
            r.temperature,
            r.mean_frequency,
            r.q_na,
            r.q_k,
            r.q_min,
            r.q_overlap,
            r.charge_separation,
            r.atp,
            r.metabolic_energy,
            r.ionic_energy,
            r.hydrolysis,
            r.q_min_capacitive,
        ]
        .map(f64::to_bits)
    };
    a.cell_id == b.cell_id && a.spike_count == b.spike_count && fields(a) == fields(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_rows_are_consistent() {
        for g in &REFERENCE {
            assert_eq!(golden(g.cell_id).unwrap().cell_id, g.cell_id);
            // published separation is rounded Q_min / Q_Na
            assert!((g.q_min / g.q_na - g.separation).abs() < 0.02, "cell {}", g.cell_id);
            assert!((g.q_min + g.q_overlap - g.q_na).abs() <= 2.0, "cell {}", g.cell_id);
            // hydrolysis is ionic energy over ATP, both rounded
            assert!((g.ionic / g.atp - g.hydrolysis).abs() / g.hydrolysis < 0.06, "cell {}", g.cell_id);
        }
        assert!(golden(11).is_err());
        assert_eq!(reference_protocol(9).unwrap().i_stim, 0.44);
    }

    #[test]
    fn bounds() {
        assert!(Bound::Relative(0.15).admits(115.0, 100.0));
        assert!(!Bound::Relative(0.15).admits(115.1, 100.0));
        assert!(Bound::RelativeOrAbsolute(0.2, 1.0).admits(3.0, 2.0));
        assert!(!Bound::RelativeOrAbsolute(0.2, 1.0).admits(3.1, 2.0));
        assert!(Bound::RelativeOrAbsolute(0.2, 1.0).admits(58.0, 54.0 * 1.05));
        assert!(Bound::Within(13.0, 21.0).admits(21.0, f64::NAN));
        assert!(!Bound::Below(1.0).admits(1.0, f64::NAN));
        assert!(!Bound::AtLeast(0.0).admits(f64::NAN, 0.0));
    }

    #[test]
    fn rates_are_continuous_at_singularities() {
        for vt in [-65.4, -58.0, -56.2] {
            assert!(singularity_jump(vt) < 1e-6);
        }
    }

    #[test]
    fn criterion_passes_only_with_all_checks() {
        let mut c = Criterion::new(9, "demo");
        assert!(!c.passed());
        c.push(Check::bounded("x", "y", 1.0, Bound::AtMost(2.0)));
        assert!(c.passed());
        c.push(Check::bounded("x", "z", 3.0, Bound::AtMost(2.0)));
        assert!(!c.passed());
        assert_eq!(c.failures().count(), 1);
        assert!(c.summary_line().starts_with("FAIL criterion 9: demo (1/2 checks"));
    }
}
