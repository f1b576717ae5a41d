//! Temperature × stimulus grids of per-spike observables.
//!
//! Points are independent runs started from the cell's zero-input rest state
//! (which does not depend on temperature, so it is computed once per grid).
//! Results land in slots fixed by their grid index, so the parallel and
//! sequential paths produce identical grids.

use std::io::Write;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cells::{self, CellParams, CellState};
use crate::energetics::{self, Analysis, EnergyReport};
use crate::error::{Error, Result};
use crate::format::sig6;
use crate::integrator::{Protocol, REST_TOL};
use crate::kinetics;

pub const CSV_HEADER: &str =
    "cell_id,temp_C,stim_uA_cm2,freq_Hz,ionic_nJ,metabolic_nJ,hydrolysis_kJ_mol,overlap_nC,status";

/// `start, start + step, ..., stop` with the endpoint included when the
/// step divides the span (up to rounding).
pub fn axis(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return Err(Error::InvalidParameter("axis bounds must be finite".into()));
    }
    if stop < start {
        return Err(Error::InvalidParameter(format!(
            "empty axis: stop {stop} < start {start}"
        )));
    }
    if stop == start {
        return Ok(vec![start]);
    }
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(format!("axis step must be positive, got {step}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

pub fn default_temperature_axis() -> Vec<f64> {
    axis(20.0, 40.0, 1.0).expect("static axis")
}

pub fn default_stimulus_axis() -> Vec<f64> {
    axis(2.25, 10.0, 0.25).expect("static axis")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointStatus {
    Ok,
    NoSpikes,
    IntegrationFailure,
}

impl PointStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PointStatus::Ok => "ok",
            PointStatus::NoSpikes => "no-spikes",
            PointStatus::IntegrationFailure => "integration-failure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Observable {
    Frequency,
    IonicEnergy,
    MetabolicEnergy,
    Hydrolysis,
    Overlap,
    SodiumLoad,
    PotassiumLoad,
}

impl Observable {
    pub const ALL: [Observable; 7] = [
        Observable::Frequency,
        Observable::IonicEnergy,
        Observable::MetabolicEnergy,
        Observable::Hydrolysis,
        Observable::Overlap,
        Observable::SodiumLoad,
        Observable::PotassiumLoad,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Observable::Frequency => "freq_Hz",
            Observable::IonicEnergy => "ionic_nJ",
            Observable::MetabolicEnergy => "metabolic_nJ",
            Observable::Hydrolysis => "hydrolysis_kJ_mol",
            Observable::Overlap => "overlap_nC",
            Observable::SodiumLoad => "na_load_nC",
            Observable::PotassiumLoad => "k_load_nC",
        }
    }

    pub fn of(self, r: &EnergyReport) -> f64 {
        match self {
            Observable::Frequency => r.mean_frequency,
            Observable::IonicEnergy => r.ionic_energy,
            Observable::MetabolicEnergy => r.metabolic_energy,
            Observable::Hydrolysis => r.hydrolysis,
            Observable::Overlap => r.q_overlap,
            Observable::SodiumLoad => r.q_na,
            Observable::PotassiumLoad => r.q_k,
        }
    }
}

/// Outcome of one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub status: PointStatus,
    pub report: Option<EnergyReport>,
}

impl GridPoint {
    fn from_result(r: Result<EnergyReport>) -> GridPoint {
        match r {
            Ok(report) => GridPoint {
                status: PointStatus::Ok,
                report: Some(report),
            },
            Err(Error::NoSpikes) | Err(Error::ZeroDenominator(_)) => GridPoint {
                status: PointStatus::NoSpikes,
                report: None,
            },
            Err(_) => GridPoint {
                status: PointStatus::IntegrationFailure,
                report: None,
            },
        }
    }

    pub fn value(&self, observable: Observable) -> Option<f64> {
        self.report.as_ref().map(|r| observable.of(r))
    }
}

/// Row-major grid: `points[ti * stimulus.len() + si]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub cell_id: u32,
    pub temperature: Vec<f64>,
    pub stimulus: Vec<f64>,
    pub points: Vec<GridPoint>,
}

/// Settings applied at every point; stimulus and temperature come from the
/// axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings {
    pub protocol: Protocol,
    pub analysis: Analysis,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            protocol: Protocol::new(0.0, kinetics::REFERENCE_TEMPERATURE),
            analysis: Analysis::default(),
        }
    }
}

fn check_axis(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidParameter(format!("{name} axis is empty")));
    }
    if values.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(format!("{name} axis has non-finite values")));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!(
            "{name} axis must be strictly increasing"
        )));
    }
    Ok(())
}

struct Job<'a> {
    params: CellParams,
    rest: CellState,
    temperature: &'a [f64],
    stimulus: &'a [f64],
    settings: SweepSettings,
}

impl<'a> Job<'a> {
    fn prepare(
        cell_id: u32,
        temperature: &'a [f64],
        stimulus: &'a [f64],
        settings: &SweepSettings,
    ) -> Result<Self> {
        check_axis("temperature", temperature)?;
        check_axis("stimulus", stimulus)?;
        for &t in temperature {
            kinetics::temperature_factor(t)?;
        }
        let mut probe = settings.protocol;
        probe.i_stim = stimulus[0];
        probe.temperature = temperature[0];
        probe.validate()?;

        let params = cells::registry(cell_id)?;
        let rest = cells::resting_state(&params, REST_TOL)?;
        Ok(Job {
            params,
            rest: rest.state,
            temperature,
            stimulus,
            settings: *settings,
        })
    }

    fn len(&self) -> usize {
        self.temperature.len() * self.stimulus.len()
    }

    fn point(&self, index: usize) -> GridPoint {
        let ns = self.stimulus.len();
        let mut protocol = self.settings.protocol;
        protocol.temperature = self.temperature[index / ns];
        protocol.i_stim = self.stimulus[index % ns];
        GridPoint::from_result(energetics::report_from_rest(
            &self.params,
            &protocol,
            &self.rest,
            &self.settings.analysis,
        ))
    }

    fn into_grid(self, points: Vec<GridPoint>) -> SweepGrid {
        SweepGrid {
            cell_id: self.params.cell_id,
            temperature: self.temperature.to_vec(),
            stimulus: self.stimulus.to_vec(),
            points,
        }
    }
}

/// Grid for one cell, evaluated in parallel when the `parallel` feature is
/// on. Point failures are recorded in the grid; only bad axes, settings or
/// cell ids are errors.
pub fn run_sweep(
    cell_id: u32,
    temperature: &[f64],
    stimulus: &[f64],
    settings: &SweepSettings,
) -> Result<SweepGrid> {
    #[cfg(feature = "parallel")]
    {
        run_sweep_parallel(cell_id, temperature, stimulus, settings)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_sweep_sequential(cell_id, temperature, stimulus, settings)
    }
}

#[cfg(feature = "parallel")]
pub fn run_sweep_parallel(
    cell_id: u32,
    temperature: &[f64],
    stimulus: &[f64],
    settings: &SweepSettings,
) -> Result<SweepGrid> {
    let job = Job::prepare(cell_id, temperature, stimulus, settings)?;
    let mut points = vec![
        GridPoint {
            status: PointStatus::IntegrationFailure,
            report: None
        };
        job.len()
    ];
    points
        .par_iter_mut()
        .enumerate()
        .for_each(|(i, slot)| *slot = job.point(i));
    Ok(job.into_grid(points))
}

pub fn run_sweep_sequential(
    cell_id: u32,
    temperature: &[f64],
    stimulus: &[f64],
    settings: &SweepSettings,
) -> Result<SweepGrid> {
    let job = Job::prepare(cell_id, temperature, stimulus, settings)?;
    let points = (0..job.len()).map(|i| job.point(i)).collect();
    Ok(job.into_grid(points))
}

/// Evaluates the grid visiting points in `order` (a permutation of the
/// flat indices). Used to check that evaluation order cannot matter.
pub fn run_sweep_in_order(
    cell_id: u32,
    temperature: &[f64],
    stimulus: &[f64],
    settings: &SweepSettings,
    order: &[usize],
) -> Result<SweepGrid> {
    let job = Job::prepare(cell_id, temperature, stimulus, settings)?;
    let mut seen = vec![false; job.len()];
    for &i in order {
        if i >= seen.len() || std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidParameter("order is not a permutation".into()));
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::InvalidParameter("order is not a permutation".into()));
    }
    let mut points = vec![None; job.len()];
    for &i in order {
        points[i] = Some(job.point(i));
    }
    Ok(job.into_grid(points.into_iter().map(Option::unwrap).collect()))
}

/// Grid coordinates `(temperature °C, stimulus µA/cm²)`.
pub type GridCoord = (f64, f64);

impl SweepGrid {
    pub fn shape(&self) -> (usize, usize) {
        (self.temperature.len(), self.stimulus.len())
    }

    pub fn get(&self, ti: usize, si: usize) -> &GridPoint {
        &self.points[ti * self.stimulus.len() + si]
    }

    /// Point at the axis values nearest `coord`.
    pub fn nearest(&self, coord: GridCoord) -> &GridPoint {
        let closest = |axis: &[f64], x: f64| {
            let mut best = 0;
            for (i, a) in axis.iter().enumerate() {
                if (a - x).abs() < (axis[best] - x).abs() {
                    best = i;
                }
            }
            best
        };
        self.get(closest(&self.temperature, coord.0), closest(&self.stimulus, coord.1))
    }

    /// Dense `[temperature][stimulus]` matrix, `None` where the point is not ok.
    pub fn matrix(&self, observable: Observable) -> Vec<Vec<Option<f64>>> {
        self.points
            .chunks(self.stimulus.len())
            .map(|row| row.iter().map(|p| p.value(observable)).collect())
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W, header: bool) -> std::io::Result<()> {
        if header {
            writeln!(out, "{CSV_HEADER}")?;
        }
        let observables = [
            Observable::Frequency,
            Observable::IonicEnergy,
            Observable::MetabolicEnergy,
            Observable::Hydrolysis,
            Observable::Overlap,
        ];
        for (ti, &t) in self.temperature.iter().enumerate() {
            for (si, &s) in self.stimulus.iter().enumerate() {
                let p = self.get(ti, si);
                write!(out, "{},{},{}", self.cell_id, sig6(t), sig6(s))?;
                for o in observables {
                    match p.value(o) {
                        Some(x) => write!(out, ",{}", sig6(x))?,
                        None => write!(out, ",")?,
                    }
                }
                writeln!(out, ",{}", p.status.as_str())?;
            }
        }
        Ok(())
    }

    /// Plot-ready JSON: both axes, a status matrix and one dense matrix per
    /// observable, numbers rounded to six significant digits.
    pub fn to_json(&self) -> serde_json::Value {
        let round = |x: f64| -> serde_json::Value {
            sig6(x)
                .parse::<f64>()
                .ok()
                .and_then(serde_json::Number::from_f64)
                .map_or(serde_json::Value::Null, serde_json::Value::Number)
        };
        let mut observables = serde_json::Map::new();
        for o in Observable::ALL {
            let m: Vec<serde_json::Value> = self
                .matrix(o)
                .into_iter()
                .map(|row| row.into_iter().map(|v| v.map_or(serde_json::Value::Null, round)).collect())
                .collect();
            observables.insert(o.key().to_string(), serde_json::Value::Array(m));
        }
        let status: Vec<Vec<&str>> = self
            .points
            .chunks(self.stimulus.len())
            .map(|row| row.iter().map(|p| p.status.as_str()).collect())
            .collect();
        serde_json::json!({
            "cell_id": self.cell_id,
            "temp_C": self.temperature.iter().map(|&x| round(x)).collect::<Vec<_>>(),
            "stim_uA_cm2": self.stimulus.iter().map(|&x| round(x)).collect::<Vec<_>>(),
            "status": status,
            "observables": observables,
        })
    }
}

/// `observable(a) / observable(b)`; an error unless both points are ok.
pub fn fold_change(grid: &SweepGrid, observable: Observable, a: GridCoord, b: GridCoord) -> Result<f64> {
    let va = grid.nearest(a).value(observable).ok_or(Error::NoSpikes)?;
    let vb = grid.nearest(b).value(observable).ok_or(Error::NoSpikes)?;
    if vb == 0.0 {
        return Err(Error::ZeroDenominator("fold-change reference"));
    }
    Ok(va / vb)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short() -> SweepSettings {
        let mut s = SweepSettings::default();
        s.protocol.duration = 300.0;
        s
    }

    #[test]
    fn axis_includes_endpoint() {
        let a = axis(2.25, 10.0, 0.25).unwrap();
        assert_eq!(a.len(), 32);
        assert_eq!(a[0], 2.25);
        assert!((a[31] - 10.0).abs() < 1e-12);
        assert_eq!(default_temperature_axis().len(), 21);
        assert_eq!(axis(36.0, 36.0, 0.0).unwrap(), vec![36.0]);
        assert!(axis(5.0, 4.0, 1.0).is_err());
        assert!(axis(1.0, 4.0, 0.0).is_err());
    }

    #[test]
    fn rejects_bad_axes() {
        let s = short();
        assert!(run_sweep(10, &[], &[1.0], &s).is_err());
        assert!(run_sweep(10, &[30.0, 30.0], &[1.0], &s).is_err());
        assert!(run_sweep(10, &[30.0], &[2.0, 1.0], &s).is_err());
        assert!(run_sweep(10, &[55.0], &[1.0], &s).is_err());
        assert!(run_sweep(11, &[30.0], &[1.0], &s).is_err());
    }

    #[test]
    fn single_point_matches_energy_report() {
        let s = short();
        let grid = run_sweep(10, &[30.0], &[3.0], &s).unwrap();
        assert_eq!(grid.points.len(), 1);
        let mut p = s.protocol;
        p.temperature = 30.0;
        p.i_stim = 3.0;
        let direct = energetics::energy_report(10, &p).unwrap();
        assert_eq!(grid.points[0].report, Some(direct));
    }

    #[test]
    fn no_spike_points_are_statuses() {
        let grid = run_sweep(10, &[30.0], &[0.0, 3.0], &short()).unwrap();
        assert_eq!(grid.get(0, 0).status, PointStatus::NoSpikes);
        assert_eq!(grid.get(0, 1).status, PointStatus::Ok);
        assert!(fold_change(&grid, Observable::IonicEnergy, (30.0, 0.0), (30.0, 3.0)).is_err());
    }

    #[test]
    fn order_and_scheduling_do_not_matter() {
        let (t, s) = ([25.0, 35.0], [2.0, 4.0, 6.0]);
        let set = short();
        let seq = run_sweep_sequential(10, &t, &s, &set).unwrap();
        let rev: Vec<usize> = (0..6).rev().collect();
        assert_eq!(run_sweep_in_order(10, &t, &s, &set, &rev).unwrap(), seq);
        assert_eq!(run_sweep(10, &t, &s, &set).unwrap(), seq);
        assert!(run_sweep_in_order(10, &t, &s, &set, &[0, 0, 1, 2, 3, 4]).is_err());
    }

    #[test]
    fn fold_change_of_a_point_with_itself_is_one() {
        let grid = run_sweep(10, &[20.0, 40.0], &[3.0], &short()).unwrap();
        for o in Observable::ALL {
            assert_eq!(fold_change(&grid, o, (20.0, 3.0), (20.0, 3.0)).unwrap(), 1.0);
        }
    }

    #[test]
    fn csv_and_json_layout() {
        let grid = run_sweep(10, &[30.0], &[0.0, 3.0], &short()).unwrap();
        let mut buf = Vec::new();
        grid.write_csv(&mut buf, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1], "10,30,0,,,,,,no-spikes");
        assert!(lines[2].starts_with("10,30,3,") && lines[2].ends_with(",ok"));
        assert_eq!(lines[2].split(',').count(), 9);

        let json = grid.to_json();
        assert_eq!(json["status"][0][0], "no-spikes");
        assert!(json["observables"]["ionic_nJ"][0][0].is_null());
        assert!(json["observables"]["ionic_nJ"][0][1].is_number());
    }
}
