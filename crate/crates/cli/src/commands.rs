use std::io::Write;
use std::time::Instant;

use neuroenergy::cells::{self, CellParams};
use neuroenergy::energetics::{self, Analysis, REPORT_COLUMNS};
use neuroenergy::format::sig6;
use neuroenergy::integrator::{self, Protocol};
use neuroenergy::kinetics::REFERENCE_TEMPERATURE;
use neuroenergy::sweep::{self, SweepSettings};
use neuroenergy::verify::{self, Suite};
use neuroenergy::Error;

use crate::{open_output, Failure, Format, RunConfig, VerifyArgs};

const CELL_COUNT: u32 = 10;
const TEMP_STEP: f64 = 1.0;
const STIM_STEP: f64 = 0.25;
const BURSTING_CELL: u32 = 7;

fn parse_cells(spec: &str) -> Result<Vec<u32>, Failure> {
    if spec.trim().eq_ignore_ascii_case("all") {
        return Ok((1..=CELL_COUNT).collect());
    }
    let mut ids = Vec::new();
    for part in spec.split(',') {
        let id: u32 = part
            .trim()
            .parse()
            .map_err(|_| Failure::validation(format!("--cell: cannot parse {part:?}")))?;
        cells::registry(id)?;
        if !ids.contains(&id) {
            ids.push(id);
        }
    }
    if ids.is_empty() {
        return Err(Failure::validation("--cell: no cells selected"));
    }
    Ok(ids)
}

fn parse_number(flag: &str, text: &str) -> Result<f64, Failure> {
    text.trim()
        .parse()
        .map_err(|_| Failure::validation(format!("--{flag}: cannot parse {text:?}")))
}

fn parse_scalar(flag: &str, value: &Option<String>) -> Result<Option<f64>, Failure> {
    match value {
        None => Ok(None),
        Some(s) if s.contains(':') => Err(Failure::validation(format!(
            "--{flag}: ranges are only accepted by sweep"
        ))),
        Some(s) => parse_number(flag, s).map(Some),
    }
}

/// `V`, `START:STOP` or `START:STOP:STEP`.
fn parse_axis(flag: &str, value: &Option<String>, default: Vec<f64>, step: f64) -> Result<Vec<f64>, Failure> {
    let Some(s) = value else { return Ok(default) };
    let parts = s
        .split(':')
        .map(|p| parse_number(flag, p))
        .collect::<Result<Vec<_>, _>>()?;
    let axis = match parts[..] {
        [v] => Ok(vec![v]),
        [a, b] => sweep::axis(a, b, step),
        [a, b, s] => sweep::axis(a, b, s),
        _ => return Err(Failure::validation(format!("--{flag}: expected START:STOP[:STEP]"))),
    };
    axis.map_err(|e| Failure::validation(format!("--{flag}: {e}")))
}

fn analysis(cfg: &RunConfig) -> Result<Analysis, Failure> {
    if !(cfg.fatp > 0.0) {
        return Err(Failure::validation(format!("--fatp must be positive, got {}", cfg.fatp)));
    }
    if !energetics::f_atp_in_range(cfg.fatp) {
        let (lo, hi) = energetics::F_ATP_RANGE;
        eprintln!("warning: --fatp {} kJ/mol is outside the physiological range [{lo}, {hi}]", cfg.fatp);
    }
    Ok(Analysis {
        f_atp: cfg.fatp,
        subtract_rest: cfg.subtract_rest,
        ..Analysis::default()
    })
}

fn apply_overrides(mut protocol: Protocol, cfg: &RunConfig) -> Protocol {
    if let Some(d) = cfg.duration {
        protocol.duration = d;
    }
    if let Some(dt) = cfg.dt {
        protocol.dt = dt;
    }
    if let Some(t) = cfg.transient {
        protocol.transient = t;
    }
    protocol
}

/// The cell's reference protocol with any flag overrides applied.
fn protocol_for(cell_id: u32, cfg: &RunConfig) -> Result<Protocol, Failure> {
    let mut p = verify::reference_protocol(cell_id)?;
    if let Some(stim) = parse_scalar("stim", &cfg.stim)? {
        p.i_stim = stim;
    }
    p.temperature = parse_scalar("temp", &cfg.temp)?.unwrap_or(REFERENCE_TEMPERATURE);
    let p = apply_overrides(p, cfg);
    p.validate()?;
    Ok(p)
}

fn opt(x: Option<f64>) -> String {
    x.map(sig6).unwrap_or_default()
}

fn csv_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

pub fn cells(cfg: &RunConfig) -> Result<(), Failure> {
    let params: Vec<CellParams> = parse_cells(&cfg.cell)?
        .into_iter()
        .map(cells::registry)
        .collect::<Result<_, _>>()?;
    let mut out = open_output(&cfg.out)?;
    match cfg.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &params).map_err(|e| Failure::validation(e.to_string()))?;
            writeln!(out)?;
        }
        Format::Csv => {
            writeln!(
                out,
                "cell_id,family,label,C_uF_cm2,g_leak,g_Na,g_K,g_M,g_L,g_T,E_leak,E_Na,E_K,E_Ca,E_T,V_T,tau_max_ms,phi,stim_uA_cm2"
            )?;
            for p in &params {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    p.cell_id,
                    p.family.short_name(),
                    csv_quote(&p.label),
                    sig6(p.c),
                    sig6(p.g_leak),
                    sig6(p.g_na),
                    sig6(p.g_k),
                    sig6(p.g_m),
                    sig6(p.g_l),
                    sig6(p.g_t),
                    sig6(p.e_leak),
                    sig6(p.e_na),
                    sig6(p.e_k),
                    opt(p.e_ca),
                    opt(p.e_t),
                    opt(p.v_t),
                    opt(p.tau_max),
                    opt(p.phi),
                    sig6(verify::golden(p.cell_id)?.stimulus),
                )?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn simulate(cfg: &RunConfig) -> Result<(), Failure> {
    if cfg.format == Format::Json {
        return Err(Failure::validation("simulate writes traces as CSV only"));
    }
    let ids = parse_cells(&cfg.cell)?;
    let [id] = ids[..] else {
        return Err(Failure::validation("simulate needs exactly one --cell"));
    };
    let params = cells::registry(id)?;
    let protocol = protocol_for(id, cfg)?;
    let analysis = analysis(cfg)?;
    let trace = integrator::integrate(&params, &protocol)?;
    let mut out = open_output(&cfg.out)?;
    trace.write_csv(&mut out)?;
    out.flush()?;
    let spikes = integrator::detect_spikes(&trace, analysis.threshold, analysis.reset)?;
    eprintln!(
        "cell {id}: {} spikes, mean frequency {} Hz over {} ms",
        spikes.count(),
        sig6(integrator::mean_frequency(&spikes)),
        sig6(spikes.window_ms())
    );
    Ok(())
}

pub fn report(cfg: &RunConfig) -> Result<(), Failure> {
    let ids = parse_cells(&cfg.cell)?;
    let analysis = analysis(cfg)?;
    let mut rows = Vec::new();
    for &id in &ids {
        let params = cells::registry(id)?;
        let protocol = protocol_for(id, cfg)?;
        let result = energetics::report_for(&params, &protocol, &analysis);
        rows.push((id, protocol, result));
    }

    let mut out = open_output(&cfg.out)?;
    let mut numerical = None;
    let status_of = |r: &Result<_, Error>| match r {
        Ok(_) => "ok",
        Err(Error::NoSpikes) | Err(Error::ZeroDenominator(_)) => "no-spikes",
        Err(_) => "integration-failure",
    };
    match cfg.format {
        Format::Csv => {
            writeln!(out, "{},status", REPORT_COLUMNS.join(","))?;
            for (id, protocol, r) in &rows {
                match r {
                    Ok(rep) => writeln!(out, "{},ok", rep.csv_row())?,
                    Err(_) => {
                        let blanks = ",".repeat(REPORT_COLUMNS.len() - 3);
                        writeln!(
                            out,
                            "{id},{},{}{blanks},{}",
                            sig6(protocol.i_stim),
                            sig6(protocol.temperature),
                            status_of(r)
                        )?
                    }
                }
            }
        }
        Format::Json => {
            let list: Vec<serde_json::Value> = rows
                .iter()
                .map(|(id, protocol, r)| {
                    let mut v = match r {
                        Ok(rep) => rep.to_json(),
                        Err(_) => serde_json::json!({
                            "cell_id": id,
                            "stim_uA_cm2": protocol.i_stim,
                            "temp_C": protocol.temperature,
                        }),
                    };
                    v["status"] = status_of(r).into();
                    v
                })
                .collect();
            serde_json::to_writer_pretty(&mut out, &list).map_err(|e| Failure::validation(e.to_string()))?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    if ids.contains(&BURSTING_CELL) {
        eprintln!("note: cell {BURSTING_CELL} fires in bursts; freq_Hz is the mean spike rate over the window, not a burst rate");
    }
    for (id, _, r) in rows {
        if let Err(e @ Error::IntegrationFailure { .. }) = r {
            eprintln!("cell {id}: {e}");
            numerical.get_or_insert(e);
        }
    }
    match numerical {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

pub fn sweep(cfg: &RunConfig) -> Result<(), Failure> {
    let ids = parse_cells(&cfg.cell)?;
    let temperature = parse_axis("temp", &cfg.temp, sweep::default_temperature_axis(), TEMP_STEP)?;
    let stimulus = parse_axis("stim", &cfg.stim, sweep::default_stimulus_axis(), STIM_STEP)?;
    let settings = SweepSettings {
        protocol: apply_overrides(Protocol::new(stimulus[0], temperature[0]), cfg),
        analysis: analysis(cfg)?,
    };

    let mut grids = Vec::new();
    for id in ids {
        let start = Instant::now();
        let grid = sweep::run_sweep(id, &temperature, &stimulus, &settings)?;
        eprintln!(
            "cell {id}: {} points in {:.1} s",
            grid.points.len(),
            start.elapsed().as_secs_f64()
        );
        grids.push(grid);
    }

    let mut out = open_output(&cfg.out)?;
    match cfg.format {
        Format::Csv => {
            for (i, g) in grids.iter().enumerate() {
                g.write_csv(&mut out, i == 0)?;
            }
        }
        Format::Json => {
            let list: Vec<serde_json::Value> = grids.iter().map(|g| g.to_json()).collect();
            serde_json::to_writer_pretty(&mut out, &list).map_err(|e| Failure::validation(e.to_string()))?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn verify(args: &VerifyArgs) -> Result<(), Failure> {
    let mut suite = if args.quick { Suite::quick() } else { Suite::all() };
    if let Some(f) = args.perturb_gna {
        if !(f.is_finite() && f >= 0.0) {
            return Err(Failure::validation(format!("--perturb-gna must be non-negative, got {f}")));
        }
        for p in &mut suite.cells {
            p.g_na *= f;
        }
    }
    let criteria = if args.quick {
        suite.run_reference()
    } else {
        suite.run_all()
    };

    let mut out = open_output(&args.out)?;
    match args.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &criteria).map_err(|e| Failure::validation(e.to_string()))?;
            writeln!(out)?;
        }
        Format::Csv => {
            for c in &criteria {
                writeln!(out, "{}", c.summary_line())?;
                for check in c.failures() {
                    writeln!(out, "    {check}")?;
                }
            }
        }
    }
    out.flush()?;
    let failed = criteria.iter().filter(|c| !c.passed()).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure {
            code: Failure::ACCEPTANCE,
            message: format!("{failed} of {} criteria failed", criteria.len()),
        })
    }
}
