//! Command implementations behind the `apfsim` binary.

use crate::config::{ConfigError, ScenarioConfig};
use crate::control::StrategyKind;
use crate::emd::{decompose, EmdConfig, Signal};
use crate::metrics::{compare_report, metrics_report, summarize, ComparisonTable, MetricsReport};
use crate::plant::{simulate_strategy, SimulationError, SimulationTrace};
use crate::plot::{line_chart, Series};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("input error: {0}")]
    Input(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    /// 1 for configuration or input problems, 2 for failures while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<SimulationError> for CliError {
    fn from(e: SimulationError) -> Self {
        match e {
            SimulationError::Config(c) => CliError::Config(c),
            SimulationError::Control(c) => CliError::Runtime(c.to_string()),
        }
    }
}

fn runtime<E: std::fmt::Display>(what: &Path) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Runtime(format!("{}: {e}", what.display()))
}

/// Scenario from `path` (or the defaults) with an optional seed override.
pub fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<ScenarioConfig, CliError> {
    let mut cfg = match path {
        Some(p) => ScenarioConfig::from_path(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(runtime(path))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(runtime(path))
}

fn prepare_dir(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(runtime(out))
}

fn write_trace(trace: &SimulationTrace, path: &Path) -> Result<(), CliError> {
    let mut w = create(path)?;
    trace.write_csv(&mut w).map_err(runtime(path))?;
    w.flush().map_err(runtime(path))
}

fn write_report(report: &MetricsReport, metrics: &Path, thd: &Path) -> Result<(), CliError> {
    report.write_csv(create(metrics)?).map_err(runtime(metrics))?;
    report.write_thd_csv(create(thd)?).map_err(runtime(thd))
}

/// Files produced by one `simulate` run.
#[derive(Debug, Clone)]
pub struct SimulateOutput {
    pub trace: PathBuf,
    pub metrics: PathBuf,
    pub summary: PathBuf,
    pub plots: Vec<PathBuf>,
}

pub fn cmd_simulate(cfg: &ScenarioConfig, out: &Path, plots: bool) -> Result<SimulateOutput, CliError> {
    prepare_dir(out)?;
    let trace = simulate_strategy(cfg, cfg.strategy)?;
    let report = metrics_report(&trace, &cfg.evaluation).map_err(|e| CliError::Runtime(e.to_string()))?;
    let row = summarize(&trace, &report, &cfg.evaluation);

    let o = &cfg.output;
    let trace_path = out.join(&o.trace);
    write_trace(&trace, &trace_path)?;
    write_report(&report, &out.join(&o.metrics), &out.join(&o.thd))?;
    let summary = out.join(&o.summary);
    write_text(&summary, &ComparisonTable { rows: vec![row] }.to_text())?;
    write_text(&out.join("config.json"), &cfg.to_json())?;

    let plots = if plots {
        write_plots(out, &[(&trace, &report)])?
    } else {
        Vec::new()
    };
    Ok(SimulateOutput {
        trace: trace_path,
        metrics: out.join(&o.metrics),
        summary,
        plots,
    })
}

pub const COMPARE_STRATEGIES: [StrategyKind; 2] = [StrategyKind::EmdHybrid, StrategyKind::PlainModifiedPq];

/// Trace file name for one strategy inside a compare run.
pub fn compare_trace_name(kind: StrategyKind) -> String {
    format!("trace_{}.csv", kind.name())
}

/// Run both strategies on the same scenario (concurrently) and write both
/// traces, the comparison table and optional plots.
pub fn cmd_compare(cfg: &ScenarioConfig, out: &Path, plots: bool) -> Result<ComparisonTable, CliError> {
    prepare_dir(out)?;
    let [a, b] = std::thread::scope(|s| {
        COMPARE_STRATEGIES.map(|kind| s.spawn(move || simulate_strategy(cfg, kind)))
            .map(|h| h.join().expect("simulation thread panicked"))
    });
    let (a, b) = (a?, b?);
    let table = compare_report(&a, &b, &cfg.evaluation).map_err(|e| CliError::Runtime(e.to_string()))?;

    let mut reports = Vec::new();
    for trace in [&a, &b] {
        write_trace(trace, &out.join(compare_trace_name(trace.strategy)))?;
        let rep = metrics_report(trace, &cfg.evaluation).map_err(|e| CliError::Runtime(e.to_string()))?;
        let name = trace.strategy.name();
        write_report(&rep, &out.join(format!("metrics_{name}.csv")), &out.join(format!("thd_{name}.csv")))?;
        reports.push(rep);
    }
    let csv_path = out.join("comparison.csv");
    table.write_csv(create(&csv_path)?).map_err(runtime(&csv_path))?;
    write_text(&out.join("comparison.txt"), &table.to_text())?;
    write_text(&out.join("config.json"), &cfg.to_json())?;
    if plots {
        write_plots(out, &[(&a, &reports[0]), (&b, &reports[1])])?;
    }
    Ok(table)
}

fn write_plots(out: &Path, runs: &[(&SimulationTrace, &MetricsReport)]) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    let mut save = |name: String, svg: String| -> Result<(), CliError> {
        let p = out.join(name);
        write_text(&p, &svg)?;
        files.push(p);
        Ok(())
    };
    let time = &runs[0].1.time;
    let pf: Vec<Series> = runs
        .iter()
        .map(|(t, r)| Series {
            label: t.strategy.name(),
            values: &r.pf,
        })
        .collect();
    save("pf.svg".into(), line_chart("Power factor", "time [s]", time, &pf))?;

    for (trace, rep) in runs {
        let name = trace.strategy.name();
        let pq = [
            Series {
                label: "P [W]",
                values: &rep.p,
            },
            Series {
                label: "Q [VA]",
                values: &rep.q,
            },
        ];
        save(format!("pq_{name}.svg"), line_chart(&format!("P and Q, {name}"), "time [s]", time, &pq))?;
        let phases: Vec<Vec<f64>> = vec![
            trace.column(|r| r.source_current.r),
            trace.column(|r| r.source_current.s),
            trace.column(|r| r.source_current.t),
            trace.column(|r| r.source_neutral),
        ];
        let series: Vec<Series> = ["i_R", "i_S", "i_T", "i_N"]
            .iter()
            .zip(&phases)
            .map(|(label, values)| Series { label, values })
            .collect();
        save(
            format!("source_currents_{name}.svg"),
            line_chart(&format!("Source currents [A], {name}"), "time [s]", time, &series),
        )?;
    }
    Ok(files)
}

/// Parse a single-column CSV of samples. A non-numeric first line is taken
/// as a header.
pub fn read_signal_csv(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    let mut first = true;
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |what: &str| CliError::Input(format!("{}: line {}: {what}", path.display(), n + 1));
        if line.split(',').count() > 1 {
            return Err(bad("expected a single column"));
        }
        match line.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            _ if first => {}
            _ => return Err(bad(&format!("cannot parse {:?} as a number", line.trim()))),
        }
        first = false;
    }
    if out.is_empty() {
        return Err(CliError::Input(format!("{}: no samples", path.display())));
    }
    Ok(out)
}

/// Decompose a single-column CSV; returns the number of IMFs written.
pub fn cmd_emd(input: &Path, sample_rate: f64, out: &Path, cfg: &EmdConfig) -> Result<usize, CliError> {
    let samples = read_signal_csv(input)?;
    let signal = Signal::new(samples, sample_rate).map_err(|e| CliError::Input(e.to_string()))?;
    let set = decompose(&signal, cfg);
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        prepare_dir(dir)?;
    }
    let mut w = csv::Writer::from_writer(create(out)?);
    let mut header: Vec<String> = (1..=set.imfs.len()).map(|k| format!("IMF{k}")).collect();
    header.push("residue".into());
    w.write_record(&header).map_err(runtime(out))?;
    for k in 0..signal.len() {
        let row = set
            .imfs
            .iter()
            .map(|imf| imf.samples()[k])
            .chain(std::iter::once(set.residue.samples()[k]))
            .map(|x| x.to_string());
        w.write_record(row).map_err(runtime(out))?;
    }
    w.flush().map_err(runtime(out))?;
    Ok(set.imfs.len())
}
