//! Command-line interface.
//!
//! Subcommands:
//! - `bounds` — closed-form throughput report for one parameter point
//! - `curve`  — sweep a parameter axis and emit CSV
//! - `verify` — run a numerical verification suite
//! - `scheme` — build a transmission scheme and dump or check it
//! - `plot`   — render a curve CSV as a standalone SVG
//!
//! Exit codes: `0` success, `2` bad usage or invalid input, `3` I/O
//! failure, `4` a verification or condition check failed.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bounds::{report, DofReport};
use crate::matrix_core::sample_channel;
use crate::model::{make_params, ChannelParams, Regime};
use crate::schemes::{build, check_conditions, CheckKind, Family, SchemeSpec};
use crate::verifier::{run_suite, SuiteReport, SUITES};

/// Command error carrying the process exit code.
#[derive(Debug)]
pub struct CmdError {
    pub code: i32,
    pub msg: String,
}

fn usage_err(msg: impl Into<String>) -> CmdError {
    CmdError { code: 2, msg: msg.into() }
}

fn io_err(msg: impl Into<String>) -> CmdError {
    CmdError { code: 3, msg: msg.into() }
}

fn check_err(msg: impl Into<String>) -> CmdError {
    CmdError { code: 4, msg: msg.into() }
}

#[derive(Parser, Debug)]
#[command(name = "xdof", version, about = "Degrees-of-freedom bounds and schemes for bursty MIMO interference channels", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Print the bound report for one parameter point.
    Bounds(BoundsArgs),
    /// Sweep an axis and write curve data as CSV.
    Curve(CurveArgs),
    /// Run a numerical verification suite.
    Verify(VerifyArgs),
    /// Construct a scheme; dump its matrices or check its conditions.
    Scheme(SchemeArgs),
    /// Render a curve CSV as a standalone SVG.
    Plot(PlotArgs),
}

/// Optional JSON config file; explicit flags override its entries.
#[derive(Debug, Default, Deserialize)]
struct ConfigFile {
    #[serde(rename = "M")]
    m: Option<usize>,
    #[serde(rename = "N")]
    n: Option<usize>,
    p_d: Option<f64>,
    p_c: Option<f64>,
    p_d_given_c: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct ParamFlags {
    /// Transmit antennas per transmitter.
    #[arg(long = "M")]
    m: Option<usize>,
    /// Receive antennas per receiver.
    #[arg(long = "N")]
    n: Option<usize>,
    /// Direct-link on probability.
    #[arg(long)]
    pd: Option<f64>,
    /// Cross-link on probability.
    #[arg(long)]
    pc: Option<f64>,
    /// Conditional probability of the direct link given the cross link.
    #[arg(long)]
    pdc: Option<f64>,
    /// JSON config file supplying any of M, N, p_d, p_c, p_d_given_c.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Flag/config resolution: each field is taken from the explicit flag when
/// present, otherwise from the config file, otherwise it is an error.
struct Resolved {
    m: usize,
    n: usize,
    p_d: f64,
    p_c: f64,
    p_dgc: f64,
}

impl ParamFlags {
    fn load_config(&self) -> Result<ConfigFile, CmdError> {
        match &self.config {
            None => Ok(ConfigFile::default()),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| io_err(format!("cannot read config {}: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| usage_err(format!("bad config {}: {e}", path.display())))
            }
        }
    }

    fn resolve(&self) -> Result<Resolved, CmdError> {
        let cfg = self.load_config()?;
        let need = |v: Option<f64>, c: Option<f64>, name: &str| {
            v.or(c).ok_or_else(|| usage_err(format!("missing --{name} (or config entry)")))
        };
        let m = self.m.or(cfg.m).ok_or_else(|| usage_err("missing --M (or config entry)"))?;
        let n = self.n.or(cfg.n).ok_or_else(|| usage_err("missing --N (or config entry)"))?;
        Ok(Resolved {
            m,
            n,
            p_d: need(self.pd, cfg.p_d, "pd")?,
            p_c: need(self.pc, cfg.p_c, "pc")?,
            p_dgc: need(self.pdc, cfg.p_d_given_c, "pdc")?,
        })
    }

    fn params(&self) -> Result<ChannelParams, CmdError> {
        let r = self.resolve()?;
        make_params(r.m, r.n, r.p_d, r.p_c, r.p_dgc)
            .map_err(|e| usage_err(format!("invalid parameters: {e}")))
    }
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[command(flatten)]
    params: ParamFlags,
    /// Emit the full report as JSON instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    /// Integer antenna ratios M/N with max(M, N) = cap.
    #[value(name = "ratio-m-over-n", alias = "ratio_m_over_n")]
    RatioMOverN,
    /// Integer antenna ratios N/M with max(M, N) = cap.
    #[value(name = "ratio-n-over-m", alias = "ratio_n_over_m")]
    RatioNOverM,
    /// Cross-link probability grid at fixed M, N.
    #[value(name = "p-c", alias = "p_c")]
    PC,
}

#[derive(Args, Debug)]
struct CurveArgs {
    #[command(flatten)]
    params: ParamFlags,
    /// Sweep axis.
    #[arg(long, value_enum, default_value = "ratio-m-over-n")]
    axis: Axis,
    /// First axis value (ratio axes: inclusive lower ratio filter).
    #[arg(long)]
    start: Option<f64>,
    /// Last axis value (ratio axes: inclusive upper ratio filter).
    #[arg(long)]
    stop: Option<f64>,
    /// Grid size for the probability axis.
    #[arg(long, default_value_t = 41)]
    points: usize,
    /// Largest antenna count used by the ratio axes.
    #[arg(long, default_value_t = 12)]
    cap: usize,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Suite name.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Master seed for all randomized checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trial count for randomized checks.
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SchemeArgs {
    #[command(flatten)]
    params: ParamFlags,
    /// Scheme family name (e.g. type1_r1, hkia_lb_t2_blend).
    #[arg(long)]
    family: String,
    /// Private-stream power exponent.
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Secondary power exponent (blended schemes).
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    /// Channel realization seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print the condition-check table instead of dumping matrices.
    #[arg(long)]
    check: bool,
    /// Write the JSON dump here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PlotArgs {
    /// Input curve CSV (as produced by `curve`).
    #[arg(long = "in")]
    input: PathBuf,
    /// Output SVG path.
    #[arg(long)]
    out: PathBuf,
}

/// Parses `args` (including argv[0]) and runs the selected command,
/// returning the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // Help/version requests are successful exits; parse errors are
            // usage errors (code 2).
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let res = match cli.cmd {
        Cmd::Bounds(a) => cmd_bounds(&a),
        Cmd::Curve(a) => cmd_curve(&a),
        Cmd::Verify(a) => cmd_verify(&a),
        Cmd::Scheme(a) => cmd_scheme(&a),
        Cmd::Plot(a) => cmd_plot(&a),
    };
    match res {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            e.code
        }
    }
}

/// Entry point used by the binary.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

// ---------------------------------------------------------------------------
// number formatting

/// Formats with 12 significant digits, plain decimal notation, dot decimal
/// separator. Trailing zeros are trimmed so equal values always print
/// identically.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    // digits after the decimal point so that total significant digits = 12
    let dec = (11 - mag).max(0) as usize;
    let s = format!("{x:.dec$}");
    if s.contains('.') {
        let t = s.trim_end_matches('0').trim_end_matches('.');
        t.to_string()
    } else {
        s
    }
}

// ---------------------------------------------------------------------------
// bounds

fn regime_code(r: Regime) -> u8 {
    match r {
        Regime::Regime1 => 1,
        Regime::Regime2 => 2,
    }
}

fn render_bounds_table(r: &DofReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "parameters      M={} N={}", r.m, r.n);
    let _ = writeln!(
        s,
        "probabilities   p_d={} p_c={} p_cd={}",
        fmt_sig(r.p_d),
        fmt_sig(r.p_c),
        fmt_sig(r.p_cd)
    );
    let _ = writeln!(
        s,
        "classification  {:?}, regime {}",
        r.classification.channel_type,
        regime_code(r.classification.regime)
    );
    let _ = writeln!(s, "eta_ub          {}", fmt_sig(r.eta_ub));
    let _ = writeln!(s, "eta_lb          {}", fmt_sig(r.eta_lb));
    let _ = writeln!(s, "gap             {}", fmt_sig(r.gap));
    let _ = writeln!(s, "tight           {} ({})", r.tight, r.tight_reason);
    let _ = writeln!(s, "per-scheme totals:");
    for (k, v) in &r.per_scheme {
        let _ = writeln!(s, "  {k:<24} {}", fmt_sig(*v));
    }
    s
}

fn cmd_bounds(a: &BoundsArgs) -> Result<(), CmdError> {
    let params = a.params.params()?;
    let rep = report(&params);
    if a.json {
        let text = serde_json::to_string_pretty(&rep)
            .map_err(|e| io_err(format!("serialize report: {e}")))?;
        println!("{text}");
    } else {
        print!("{}", render_bounds_table(&rep));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// curve

/// One row of curve output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub x: f64,
    pub eta_ub: f64,
    pub eta_lb: f64,
    pub eta_ia: f64,
    pub eta_hkia: f64,
    pub regime: u8,
    pub tight: bool,
}

/// Exact CSV header for curve output; `plot` validates against it.
pub const CURVE_HEADER: &str = "x,eta_ub,eta_lb,eta_ia,eta_hkia,regime,tight";

fn row_from_report(x: f64, rep: &DofReport, norm: f64) -> CurveRow {
    CurveRow {
        x,
        eta_ub: rep.eta_ub / norm,
        eta_lb: rep.eta_lb / norm,
        eta_ia: rep.per_scheme["ia"] / norm,
        eta_hkia: rep.per_scheme["hkia"] / norm,
        regime: regime_code(rep.classification.regime),
        tight: rep.tight,
    }
}

/// Generates curve rows for one axis.
///
/// Ratio axes enumerate all integer pairs `(M, N)` with `max(M, N) = cap`,
/// sorted by ratio and restricted to `[start, stop]`; eta values are
/// normalized by `max(M, N)`. The probability axis is a uniform grid of
/// `points` values of `p_c` in `[start, stop]` at fixed `M, N`.
pub fn sweep_rows(
    axis: Axis,
    m: Option<usize>,
    n: Option<usize>,
    p_d: f64,
    p_c: f64,
    p_dgc: f64,
    start: Option<f64>,
    stop: Option<f64>,
    points: usize,
    cap: usize,
) -> Result<Vec<CurveRow>, CmdError> {
    let mut rows = Vec::new();
    match axis {
        Axis::RatioMOverN | Axis::RatioNOverM => {
            if cap == 0 {
                return Err(usage_err("cap must be at least 1"));
            }
            let lo = start.unwrap_or(0.0);
            let hi = stop.unwrap_or(1.0);
            // all (M, N) with max(M, N) = cap, keyed by the axis ratio
            let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
            for v in 1..=cap {
                for (mm, nn) in [(v, cap), (cap, v)] {
                    if mm == nn && v < cap {
                        continue; // the square pair appears once, at v = cap
                    }
                    let x = match axis {
                        Axis::RatioMOverN => mm as f64 / nn as f64,
                        Axis::RatioNOverM => nn as f64 / mm as f64,
                        Axis::PC => unreachable!(),
                    };
                    if !pairs.iter().any(|p| p.1 == mm && p.2 == nn) {
                        pairs.push((x, mm, nn));
                    }
                }
            }
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            for (x, mm, nn) in pairs {
                if x < lo - 1e-12 || x > hi + 1e-12 {
                    continue;
                }
                let params = make_params(mm, nn, p_d, p_c, p_dgc)
                    .map_err(|e| usage_err(format!("invalid parameters: {e}")))?;
                let rep = report(&params);
                rows.push(row_from_report(x, &rep, mm.max(nn) as f64));
            }
        }
        Axis::PC => {
            let m = m.ok_or_else(|| usage_err("p-c axis requires --M"))?;
            let n = n.ok_or_else(|| usage_err("p-c axis requires --N"))?;
            let lo = start.unwrap_or(0.0);
            let hi = stop.unwrap_or(p_d);
            if points == 0 {
                return Err(usage_err("empty grid: points must be at least 1"));
            }
            for i in 0..points {
                let t = if points == 1 { 0.0 } else { i as f64 / (points - 1) as f64 };
                let pc_i = lo + t * (hi - lo);
                let params = make_params(m, n, p_d, pc_i, p_dgc)
                    .map_err(|e| usage_err(format!("invalid parameters at p_c={pc_i}: {e}")))?;
                let rep = report(&params);
                rows.push(row_from_report(pc_i, &rep, 1.0));
            }
        }
    }
    if rows.is_empty() {
        return Err(usage_err("empty grid: no points in the requested range"));
    }
    Ok(rows)
}

/// Serializes curve rows to CSV with the exact expected header.
pub fn rows_to_csv(rows: &[CurveRow]) -> String {
    let mut s = String::with_capacity(64 * (rows.len() + 1));
    s.push_str(CURVE_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            fmt_sig(r.x),
            fmt_sig(r.eta_ub),
            fmt_sig(r.eta_lb),
            fmt_sig(r.eta_ia),
            fmt_sig(r.eta_hkia),
            r.regime,
            r.tight
        );
    }
    s
}

fn write_output(path: Option<&Path>, content: &str) -> Result<(), CmdError> {
    match path {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(p) => std::fs::write(p, content)
            .map_err(|e| io_err(format!("cannot write {}: {e}", p.display()))),
    }
}

fn cmd_curve(a: &CurveArgs) -> Result<(), CmdError> {
    let cfg = a.params.load_config()?;
    let pd = a
        .params
        .pd
        .or(cfg.p_d)
        .ok_or_else(|| usage_err("missing --pd (or config entry)"))?;
    let pc = a
        .params
        .pc
        .or(cfg.p_c)
        .ok_or_else(|| usage_err("missing --pc (or config entry)"))?;
    let pdc = a
        .params
        .pdc
        .or(cfg.p_d_given_c)
        .ok_or_else(|| usage_err("missing --pdc (or config entry)"))?;
    let rows = sweep_rows(
        a.axis,
        a.params.m.or(cfg.m),
        a.params.n.or(cfg.n),
        pd,
        pc,
        pdc,
        a.start,
        a.stop,
        a.points,
        a.cap,
    )?;
    write_output(a.out.as_deref(), &rows_to_csv(&rows))
}

// ---------------------------------------------------------------------------
// verify

fn render_suite_text(rep: &SuiteReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "suite: {}", rep.suite);
    for r in &rep.records {
        let _ = writeln!(s, "[{:?}] {} — {}", r.status, r.name, r.detail);
    }
    let _ = writeln!(s, "result: {}", if rep.failed() { "FAIL" } else { "PASS" });
    s
}

fn cmd_verify(a: &VerifyArgs) -> Result<(), CmdError> {
    if !SUITES.contains(&a.suite.as_str()) {
        return Err(usage_err(format!(
            "unknown suite '{}'; expected one of {}",
            a.suite,
            SUITES.join(", ")
        )));
    }
    let rep = run_suite(&a.suite, a.seed, a.trials)
        .map_err(|e| check_err(format!("suite execution failed: {e}")))?;
    match &a.out {
        Some(p) => {
            let json = serde_json::to_string_pretty(&rep)
                .map_err(|e| io_err(format!("serialize report: {e}")))?;
            std::fs::write(p, json)
                .map_err(|e| io_err(format!("cannot write {}: {e}", p.display())))?;
        }
        None => print!("{}", render_suite_text(&rep)),
    }
    if rep.failed() {
        return Err(check_err("one or more verification records failed"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// scheme

#[derive(Debug, Serialize)]
struct MatrixDump {
    rows: usize,
    cols: usize,
    /// Entries in row-major order.
    data: Vec<f64>,
}

fn dump_matrix(m: &nalgebra::DMatrix<f64>) -> MatrixDump {
    let mut data = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            data.push(m[(i, j)]);
        }
    }
    MatrixDump { rows: m.nrows(), cols: m.ncols(), data }
}

#[derive(Debug, Serialize)]
struct StreamDump {
    name: String,
    tx: usize,
    rx: Option<usize>,
    precoder: MatrixDump,
    /// Per-column symbol variance as (coefficient, power exponent).
    col_vars: Vec<(f64, f64)>,
}

#[derive(Debug, Serialize)]
struct SchemeDump {
    family: String,
    m: usize,
    n: usize,
    a: f64,
    b: f64,
    seed: u64,
    /// Stream dimension split [d_D1, d_C1, d_C2, d_D2].
    dims: [usize; 4],
    public_power_fraction: f64,
    filters: BTreeMap<String, MatrixDump>,
    streams: Vec<StreamDump>,
}

fn dump_scheme(spec: &SchemeSpec, seed: u64) -> SchemeDump {
    SchemeDump {
        family: spec.family.name().to_string(),
        m: spec.m,
        n: spec.n,
        a: spec.a,
        b: spec.b,
        seed,
        dims: spec.dims,
        public_power_fraction: spec.public_power_fraction,
        filters: spec.filters.iter().map(|(k, v)| (k.clone(), dump_matrix(v))).collect(),
        streams: spec
            .streams
            .iter()
            .map(|s| StreamDump {
                name: s.name.to_string(),
                tx: s.tx,
                rx: s.rx,
                precoder: dump_matrix(&s.precoder),
                col_vars: s.col_vars.clone(),
            })
            .collect(),
    }
}

fn cmd_scheme(a: &SchemeArgs) -> Result<(), CmdError> {
    let family = Family::parse(&a.family).ok_or_else(|| {
        usage_err(format!(
            "unknown family '{}'; expected one of {}",
            a.family,
            Family::ALL.iter().map(|f| f.name()).collect::<Vec<_>>().join(", ")
        ))
    })?;
    let cfg = a.params.load_config()?;
    let m = a.params.m.or(cfg.m).ok_or_else(|| usage_err("missing --M (or config entry)"))?;
    let n = a.params.n.or(cfg.n).ok_or_else(|| usage_err("missing --N (or config entry)"))?;
    let re = sample_channel(m, n, a.seed);
    let spec = build(family, &re, m, n, a.a, a.b)
        .map_err(|e| usage_err(format!("cannot build scheme: {e}")))?;
    if a.check {
        let checks = check_conditions(&spec, &re);
        let mut s = String::new();
        let _ = writeln!(s, "family: {}  M={m} N={n} seed={}", family.name(), a.seed);
        let _ = writeln!(s, "{:<40} {:<10} {:>14} pass", "condition", "kind", "value");
        let mut ok = true;
        for c in &checks {
            let kind = match c.kind {
                CheckKind::Null => "null",
                CheckKind::FullRank => "full-rank",
            };
            let _ = writeln!(s, "{:<40} {:<10} {:>14.6e} {}", c.name, kind, c.value, c.pass);
            ok &= c.pass;
        }
        write_output(a.out.as_deref(), &s)?;
        if !ok {
            return Err(check_err("one or more scheme conditions failed"));
        }
        return Ok(());
    }
    let dump = dump_scheme(&spec, a.seed);
    let json =
        serde_json::to_string_pretty(&dump).map_err(|e| io_err(format!("serialize: {e}")))?;
    write_output(a.out.as_deref(), &(json + "\n"))
}

// ---------------------------------------------------------------------------
// plot

/// Parses curve CSV text, validating the exact header.
pub fn parse_curve_csv(text: &str) -> Result<Vec<CurveRow>, CmdError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| usage_err("empty CSV"))?;
    if header.trim_end() != CURVE_HEADER {
        return Err(usage_err(format!(
            "bad CSV header: expected '{CURVE_HEADER}', got '{header}'"
        )));
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(usage_err(format!("row {}: expected 7 fields, got {}", idx + 2, fields.len())));
        }
        let num = |i: usize| -> Result<f64, CmdError> {
            fields[i]
                .trim()
                .parse::<f64>()
                .map_err(|_| usage_err(format!("row {}: bad number '{}'", idx + 2, fields[i])))
        };
        let regime = fields[5]
            .trim()
            .parse::<u8>()
            .map_err(|_| usage_err(format!("row {}: bad regime '{}'", idx + 2, fields[5])))?;
        let tight = match fields[6].trim() {
            "true" => true,
            "false" => false,
            other => return Err(usage_err(format!("row {}: bad tight flag '{other}'", idx + 2))),
        };
        rows.push(CurveRow {
            x: num(0)?,
            eta_ub: num(1)?,
            eta_lb: num(2)?,
            eta_ia: num(3)?,
            eta_hkia: num(4)?,
            regime,
            tight,
        });
    }
    if rows.is_empty() {
        return Err(usage_err("CSV contains no data rows"));
    }
    Ok(rows)
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 480.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 140.0;
const MARGIN_T: f64 = 24.0;
const MARGIN_B: f64 = 48.0;

fn fmt2(x: f64) -> String {
    format!("{x:.2}")
}

/// Renders curve rows as a standalone 640x480 SVG: one polyline per eta
/// column, dashed lower bound when any row is not tight, point markers for
/// a single-row input.
pub fn render_svg(rows: &[CurveRow]) -> String {
    let series: [(&str, &str, fn(&CurveRow) -> f64); 4] = [
        ("eta_ub", "#d62728", |r| r.eta_ub),
        ("eta_lb", "#1f77b4", |r| r.eta_lb),
        ("eta_ia", "#2ca02c", |r| r.eta_ia),
        ("eta_hkia", "#ff7f0e", |r| r.eta_hkia),
    ];
    let any_loose = rows.iter().any(|r| !r.tight);

    let xs: Vec<f64> = rows.iter().map(|r| r.x).collect();
    let mut xmin = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut xmax = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for r in rows {
        for (_, _, get) in &series {
            ymin = ymin.min(get(r));
            ymax = ymax.max(get(r));
        }
    }
    if (xmax - xmin).abs() < 1e-12 {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if (ymax - ymin).abs() < 1e-12 {
        ymin -= 0.5;
        ymax += 0.5;
    }
    let plot_w = SVG_W - MARGIN_L - MARGIN_R;
    let plot_h = SVG_H - MARGIN_T - MARGIN_B;
    let px = |x: f64| MARGIN_L + (x - xmin) / (xmax - xmin) * plot_w;
    let py = |y: f64| MARGIN_T + (1.0 - (y - ymin) / (ymax - ymin)) * plot_h;

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" viewBox=\"0 0 640 480\">"
    );
    s.push_str("<rect width=\"640\" height=\"480\" fill=\"white\"/>\n");
    // axes
    let _ = writeln!(
        s,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        fmt2(MARGIN_L),
        fmt2(MARGIN_T),
        fmt2(MARGIN_L),
        fmt2(SVG_H - MARGIN_B)
    );
    let _ = writeln!(
        s,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        fmt2(MARGIN_L),
        fmt2(SVG_H - MARGIN_B),
        fmt2(SVG_W - MARGIN_R),
        fmt2(SVG_H - MARGIN_B)
    );
    // tick labels at the extremes
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
        fmt2(MARGIN_L),
        fmt2(SVG_H - MARGIN_B + 16.0),
        fmt_sig_short(xmin)
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
        fmt2(SVG_W - MARGIN_R),
        fmt2(SVG_H - MARGIN_B + 16.0),
        fmt_sig_short(xmax)
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>",
        fmt2(MARGIN_L - 6.0),
        fmt2(SVG_H - MARGIN_B),
        fmt_sig_short(ymin)
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>",
        fmt2(MARGIN_L - 6.0),
        fmt2(MARGIN_T + 8.0),
        fmt_sig_short(ymax)
    );
    // axis labels
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">x</text>",
        fmt2(MARGIN_L + plot_w / 2.0),
        fmt2(SVG_H - 8.0)
    );
    let _ = writeln!(
        s,
        "<text x=\"14\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">eta</text>",
        fmt2(MARGIN_T + plot_h / 2.0),
        fmt2(MARGIN_T + plot_h / 2.0)
    );

    for (i, (name, color, get)) in series.iter().enumerate() {
        let dash = if *name == "eta_lb" && any_loose {
            " stroke-dasharray=\"6 4\""
        } else {
            ""
        };
        if rows.len() == 1 {
            let r = &rows[0];
            let _ = writeln!(
                s,
                "<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"{color}\"/>",
                fmt2(px(r.x)),
                fmt2(py(get(r)))
            );
        } else {
            let pts: Vec<String> =
                rows.iter().map(|r| format!("{},{}", fmt2(px(r.x)), fmt2(py(get(r))))).collect();
            let _ = writeln!(
                s,
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash} points=\"{}\"/>",
                pts.join(" ")
            );
        }
        // legend
        let ly = MARGIN_T + 14.0 + 18.0 * i as f64;
        let _ = writeln!(
            s,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"1.5\"{dash}/>",
            fmt2(SVG_W - MARGIN_R + 10.0),
            fmt2(ly),
            fmt2(SVG_W - MARGIN_R + 34.0),
            fmt2(ly)
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-size=\"11\">{name}</text>",
            fmt2(SVG_W - MARGIN_R + 40.0),
            fmt2(ly + 4.0)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn fmt_sig_short(x: f64) -> String {
    // short labels for axis extremes
    let s = format!("{x:.4}");
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t.is_empty() { "0".to_string() } else { t.to_string() }
}

fn cmd_plot(a: &PlotArgs) -> Result<(), CmdError> {
    let text = std::fs::read_to_string(&a.input)
        .map_err(|e| usage_err(format!("cannot read {}: {e}", a.input.display())))?;
    let rows = parse_curve_csv(&text)?;
    let svg = render_svg(&rows);
    std::fs::write(&a.out, svg)
        .map_err(|e| io_err(format!("cannot write {}: {e}", a.out.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig_digit_formatting_is_stable() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(2.5), "2.5");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(2.5), fmt_sig(2.5000000000));
        assert_eq!(fmt_sig(1100.0), "1100");
        // dot decimal separator regardless of locale conventions
        assert!(fmt_sig(0.05).contains('.'));
    }

    #[test]
    fn ratio_sweep_hits_known_anchors() {
        // direct p_d=0.7, cross p_c=0.3, conditional 0.5: eta_ub/N is 1.1 at
        // M=N and 0.7 at M/N=1/2
        let rows = sweep_rows(
            Axis::RatioMOverN,
            None,
            None,
            0.7,
            0.3,
            0.5,
            None,
            None,
            41,
            12,
        )
        .unwrap();
        let at = |x: f64| rows.iter().find(|r| (r.x - x).abs() < 1e-12).unwrap();
        assert!((at(1.0).eta_ub - 1.1).abs() < 1e-12);
        assert!((at(0.5).eta_ub - 0.7).abs() < 1e-12);
        // sorted by ratio
        for w in rows.windows(2) {
            assert!(w[0].x <= w[1].x);
        }
    }

    #[test]
    fn ratio_sweep_respects_range_filter() {
        let rows = sweep_rows(
            Axis::RatioMOverN,
            None,
            None,
            0.7,
            0.3,
            0.5,
            Some(0.4),
            Some(0.6),
            41,
            12,
        )
        .unwrap();
        assert!(rows.iter().all(|r| r.x >= 0.4 - 1e-12 && r.x <= 0.6 + 1e-12));
        assert!(!rows.is_empty());
    }

    #[test]
    fn empty_grid_is_a_usage_error() {
        let err = sweep_rows(
            Axis::RatioMOverN,
            None,
            None,
            0.7,
            0.3,
            0.5,
            Some(0.401),
            Some(0.402),
            41,
            12,
        )
        .unwrap_err();
        assert_eq!(err.code, 2);
    }

    #[test]
    fn csv_round_trips_through_parser() {
        let rows = sweep_rows(
            Axis::PC,
            Some(3),
            Some(2),
            0.7,
            0.5,
            0.9,
            Some(0.0),
            Some(0.6),
            7,
            12,
        )
        .unwrap();
        let csv = rows_to_csv(&rows);
        let parsed = parse_curve_csv(&csv).unwrap();
        assert_eq!(parsed.len(), rows.len());
        for (a, b) in parsed.iter().zip(rows.iter()) {
            assert!((a.eta_ub - b.eta_ub).abs() < 1e-11);
            assert_eq!(a.regime, b.regime);
            assert_eq!(a.tight, b.tight);
        }
    }

    #[test]
    fn bad_csv_header_is_rejected() {
        let err = parse_curve_csv("x,eta_ub\n1,2\n").unwrap_err();
        assert_eq!(err.code, 2);
    }

    #[test]
    fn svg_output_is_standalone_and_sized() {
        let rows = sweep_rows(
            Axis::RatioMOverN,
            None,
            None,
            0.7,
            0.3,
            0.5,
            None,
            None,
            41,
            6,
        )
        .unwrap();
        let svg = render_svg(&rows);
        assert!(svg.starts_with("<?xml"));
        assert!(svg.contains("width=\"640\" height=\"480\""));
        assert_eq!(svg.matches("<polyline").count(), 4);
    }

    #[test]
    fn single_row_plot_uses_point_markers() {
        let row = CurveRow {
            x: 0.5,
            eta_ub: 1.0,
            eta_lb: 0.9,
            eta_ia: 0.8,
            eta_hkia: 0.9,
            regime: 1,
            tight: true,
        };
        let svg = render_svg(&[row]);
        assert!(!svg.contains("<polyline"));
        assert_eq!(svg.matches("<circle").count(), 4);
    }

    #[test]
    fn loose_bound_renders_dashed() {
        let base = CurveRow {
            x: 0.5,
            eta_ub: 1.0,
            eta_lb: 0.9,
            eta_ia: 0.8,
            eta_hkia: 0.9,
            regime: 2,
            tight: false,
        };
        let rows = vec![base.clone(), CurveRow { x: 0.6, ..base.clone() }];
        let svg = render_svg(&rows);
        assert!(svg.contains("stroke-dasharray"));
        let tight_rows =
            vec![CurveRow { tight: true, ..base.clone() }, CurveRow { x: 0.6, tight: true, ..base }];
        assert!(!render_svg(&tight_rows).contains("stroke-dasharray"));
    }
}
