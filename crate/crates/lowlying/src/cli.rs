use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand};
use lowlying_core::besseltransform::{BesselTransform, DJResult, GridValue, ScanGrid, ScanKind, ScanReport};
use lowlying_core::density::DensityEngine;
use lowlying_core::kuznetsov::{AdmissibleWeight, HeckeAverager};
use lowlying_core::maassdata::{validate_records, MaassFormRecord};
use lowlying_core::rmt::{make_test_function, rmt_expected_value_x, rmt_expected_value_xi, Group};
use lowlying_core::weights::SpectralWeight;
use serde_json::json;

use crate::config::{Layer, RunConfig};
use crate::data::{parse_records, DataFormat};
use crate::error::{AppError, AppResult};
use crate::output;
use crate::scan;

#[derive(Debug, Parser)]
#[command(name = "lowlying", version, about = "Low-lying zeros of level-1 Maass form L-functions: Bessel transforms, Kuznetsov trace formula, one-level densities")]
pub struct Cli {
    /// JSON file with default settings (flags override it).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Vanishing order M of the weight h at the origin.
    #[arg(long = "M", global = true)]
    pub order: Option<u32>,
    #[arg(long, global = true)]
    pub bump_halfwidth: Option<f64>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Largest Kloosterman modulus.
    #[arg(long, global = true)]
    pub c_max: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long = "T", global = true)]
    pub t: Option<u32>,
    #[arg(long = "T-list", global = true, value_delimiter = ',')]
    pub t_list: Option<Vec<u32>>,
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    #[arg(long = "eta-list", global = true, value_delimiter = ',')]
    pub eta_list: Option<Vec<f64>>,
    /// Maass form data file (CSV or JSON); relative paths are also looked
    /// up under $MAASS_DATA_DIR.
    #[arg(long = "maass-data", global = true)]
    pub data_path: Option<PathBuf>,
    /// Output file (default: standard output).
    #[arg(long, short = 'o', global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// D_J(X) by quadrature, residues and the asymptotic expansion.
    BesselInt {
        #[arg(long = "X")]
        x: f64,
        /// quadrature, residue, asymptotic, auto or all.
        #[arg(long, default_value = "all")]
        method: String,
    },
    /// Empirical ratios of |D_J|, |A_g|, |B_g| to their claimed bounds.
    BoundScan {
        /// small_X, large_X, souped_up, stationary_A, stationary_B or all.
        #[arg(long, default_value = "all")]
        which: String,
        /// Grid values; a trailing T means a multiple of T (e.g. 0.125T).
        #[arg(long = "X-list", value_delimiter = ',')]
        x_list: Option<Vec<String>>,
    },
    /// Spectral against geometric side of the Kuznetsov formula.
    TraceVerify {
        #[arg(long)]
        format: Option<String>,
        /// gaussian or spectral (h_T at --T).
        #[arg(long, default_value = "gaussian")]
        weight: String,
        #[arg(long, default_value_t = 10.0)]
        center: f64,
        #[arg(long, value_delimiter = ',', default_value = "1,1.5,2")]
        width: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        vanishing: u32,
        #[arg(long = "m-list", value_delimiter = ',', default_value = "1,2,3")]
        m_list: Vec<u64>,
        #[arg(long = "n-list", value_delimiter = ',', default_value = "1,2,3")]
        n_list: Vec<u64>,
    },
    /// Σ h_T(t_u)/‖u‖² from the geometric side.
    TotalMass,
    /// Avg(λ_m; h_T/‖u‖²) from the geometric side.
    AvgLambda {
        #[arg(long = "m-list", value_delimiter = ',', default_value = "2,3,4,5,7")]
        m_list: Vec<u64>,
        #[arg(long)]
        format: Option<String>,
    },
    /// The explicit-formula density at one (T, eta).
    Density,
    /// Density deviations over T-list × eta-list, plus the split diagnostics.
    Converge,
    /// Random matrix predictions ∫φW_G by both routes.
    Kernels {
        /// so-even, so-odd, o, u, sp or all.
        #[arg(long, default_value = "all")]
        group: String,
    },
    /// Checks a Maass form data file.
    ValidateData {
        #[arg(long)]
        format: Option<String>,
    },
}

impl Cli {
    fn flag_layer(&self) -> Layer {
        Layer {
            order: self.order,
            bump_halfwidth: self.bump_halfwidth,
            tol: self.tol,
            c_max: self.c_max,
            threads: self.threads,
            t: self.t,
            t_list: self.t_list.clone(),
            eta: self.eta,
            eta_list: self.eta_list.clone(),
            data_path: self.data_path.clone(),
            output_path: self.output.clone(),
        }
    }
}

/// What a command produced: the data to write, a one-line summary and
/// whether a verification failed.
#[derive(Debug)]
pub struct Outcome {
    pub data: String,
    pub extra: Vec<(PathBuf, String)>,
    pub summary: String,
    pub failed: bool,
}

impl Outcome {
    fn ok(data: String, summary: String) -> Self {
        Outcome { data, extra: Vec::new(), summary, failed: false }
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code: 0 success, 1 verification failure,
/// 2 usage or input error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run_cli(&cli) {
        Ok(o) => {
            eprintln!("{}", o.summary);
            if o.failed {
                1
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run_cli(cli: &Cli) -> AppResult<Outcome> {
    let file = cli.config.as_deref().map(Layer::from_json_file).transpose()?;
    let cfg = RunConfig::resolve(cli.flag_layer(), file, Layer::from_env()?)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| AppError::Usage(format!("thread pool: {e}")))?;
    let outcome = pool.install(|| execute(&cli.command, &cfg))?;
    write_output(cfg.output_path.as_deref(), &outcome.data)?;
    for (path, text) in &outcome.extra {
        std::fs::write(path, text).map_err(|e| AppError::io(path, e))?;
    }
    Ok(outcome)
}

fn write_output(path: Option<&Path>, data: &str) -> AppResult<()> {
    match path {
        Some(p) => std::fs::write(p, data).map_err(|e| AppError::io(p, e)),
        None => {
            print!("{data}");
            Ok(())
        }
    }
}

fn load_data(cfg: &RunConfig, format: &Option<String>) -> AppResult<Vec<MaassFormRecord>> {
    let path = cfg.data_path.as_deref().ok_or_else(|| AppError::Usage("--maass-data is required".into()))?;
    let format = format.as_deref().map(DataFormat::from_str).transpose()?;
    parse_records(path, format)
}

pub fn execute(command: &Command, cfg: &RunConfig) -> AppResult<Outcome> {
    match command {
        Command::BesselInt { x, method } => bessel_int(cfg, *x, method),
        Command::BoundScan { which, x_list } => bound_scan(cfg, which, x_list.as_deref()),
        Command::TraceVerify { format, weight, center, width, vanishing, m_list, n_list } => {
            let data = load_data(cfg, format)?;
            let weights = match weight.as_str() {
                "gaussian" => width
                    .iter()
                    .map(|w| AdmissibleWeight::gaussian(*center, *w, *vanishing))
                    .collect::<Result<Vec<_>, _>>()?,
                "spectral" => vec![AdmissibleWeight::spectral(cfg.family()?, cfg.require_t()?)?],
                other => return Err(AppError::Usage(format!("unknown weight `{other}` (gaussian or spectral)"))),
            };
            let pairs: Vec<(u64, u64)> = m_list.iter().flat_map(|&m| n_list.iter().map(move |&n| (m, n))).collect();
            let reports = scan::trace_grid(&weights, &pairs, &data, cfg.c_max, cfg.tol)?;
            let failures = reports.iter().filter(|r| !r.passed).count();
            let worst = reports.iter().map(|r| r.relative_discrepancy()).fold(0.0, f64::max);
            let value = json!(reports.iter().map(output::trace_json).collect::<Vec<_>>());
            Ok(Outcome {
                data: output::pretty(&value)?,
                extra: Vec::new(),
                summary: format!(
                    "trace-verify: {} of {} checks within budget over {} records; worst relative discrepancy {worst:.3e}",
                    reports.len() - failures,
                    reports.len(),
                    data.len()
                ),
                failed: failures > 0,
            })
        }
        Command::TotalMass => {
            let ts = cfg.t_list_or(&[11, 21, 41, 81]);
            let rows: Vec<_> = ts.iter().copied().zip(scan::total_mass_scan(&ts, &cfg.family()?, cfg.c_max, cfg.tol)?).collect();
            let ratios: Vec<f64> = rows.iter().map(|(t, g)| g.total() / (*t as f64).powi(2)).collect();
            let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = ratios.iter().cloned().fold(0.0, f64::max);
            Ok(Outcome::ok(
                output::total_mass_csv(&rows)?,
                format!("total-mass: {} values of T, mass/T^2 in [{lo:.4}, {hi:.4}]", rows.len()),
            ))
        }
        Command::AvgLambda { m_list, format } => avg_lambda(cfg, m_list, format),
        Command::Density => {
            let t = cfg.require_t()?;
            let phi = make_test_function(cfg.require_eta()?)?;
            let engine = DensityEngine::new(&cfg.family()?, t, phi.eta(), cfg.c_max, cfg.tol)?;
            let (r, s) = engine.evaluate(&phi)?;
            Ok(Outcome::ok(
                output::pretty(&output::density_json(&r, &s))?,
                format!("density: T = {t}, eta = {}, total {:.6}, prediction {:.6}, deviation {:.3e}", r.eta, r.total, r.rmt_o_prediction, r.deviation),
            ))
        }
        Command::Converge => {
            let ts = cfg.t_list_or(&[11, 21, 41, 81]);
            let phis = cfg.eta_list_or(&[0.8, 1.2]).into_iter().map(make_test_function).collect::<Result<Vec<_>, _>>()?;
            let result = scan::convergence_scan(&ts, &phis, &cfg.family()?, cfg.c_max, cfg.tol)?;
            let main = output::density_csv(&result.reports)?;
            let split = output::split_csv(&result.splits)?;
            let flagged = result.reports.iter().filter(|r| r.beyond_main_threshold).count();
            let summary = format!("converge: {} cells, {flagged} beyond the eta < 5/4 guarantee", result.reports.len());
            match &cfg.output_path {
                Some(p) => Ok(Outcome { data: main, extra: vec![(split_path(p), split)], summary, failed: false }),
                None => Ok(Outcome::ok(format!("{main}\n{split}"), summary)),
            }
        }
        Command::Kernels { group } => kernels(cfg, group),
        Command::ValidateData { format } => {
            let data = load_data(cfg, format)?;
            if data.is_empty() {
                return Err(AppError::Usage("the data file holds no records".into()));
            }
            let report = validate_records(&data);
            Ok(Outcome {
                data: output::pretty(&output::validation_json(&report))?,
                extra: Vec::new(),
                summary: format!("validate-data: {} records, {} failing", data.len(), report.failure_count()),
                failed: !report.all_passed(),
            })
        }
    }
}

/// `out.csv` → `out.split.csv`.
pub fn split_path(p: &Path) -> PathBuf {
    let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("converge");
    let ext = p.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    p.with_file_name(format!("{stem}.split.{ext}"))
}

fn bessel_int(cfg: &RunConfig, x: f64, method: &str) -> AppResult<Outcome> {
    let t = cfg.require_t()?;
    let bt = BesselTransform::new(SpectralWeight::new(cfg.family()?, t)?)?;
    let tol = cfg.tol.min(1e-10);
    let run = |m: &str| -> AppResult<DJResult> {
        Ok(match m {
            "quadrature" => bt.dj_quadrature(x, tol)?,
            "residue" => bt.dj_residue_sum(x, tol)?,
            "asymptotic" => bt.dj_asymptotic_corrected(x)?,
            "auto" => bt.dj_auto(x, tol)?,
            other => return Err(AppError::Usage(format!("unknown method `{other}`"))),
        })
    };
    let methods: Vec<&str> = if method == "all" { vec!["quadrature", "residue", "asymptotic"] } else { vec![method] };
    let mut results = Vec::new();
    let mut values = Vec::new();
    for m in &methods {
        match run(m) {
            Ok(r) => {
                results.push(output::dj_json(&r));
                values.push((*m, Some(r.value)));
            }
            Err(AppError::Core(e)) if methods.len() > 1 => {
                results.push(json!({ "method": m, "error": e.to_string() }));
                values.push((*m, None));
            }
            Err(e) => return Err(e),
        }
    }
    let mut deltas = Vec::new();
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            if let ((a, Some(va)), (b, Some(vb))) = (values[i], values[j]) {
                deltas.push(json!({ "a": a, "b": b, "delta": (va - vb).norm() }));
            }
        }
    }
    let v = json!({ "X": x, "T": t, "results": results, "deltas": deltas });
    let summary = match values.iter().find_map(|(_, v)| *v) {
        Some(v) => format!("bessel-int: X = {x}, T = {t}, D_J = {:.12e}i from {} method(s)", v.im, results.len()),
        None => format!("bessel-int: X = {x}, T = {t}, no method applies"),
    };
    Ok(Outcome::ok(output::pretty(&v)?, summary))
}

fn parse_grid_value(s: &str) -> AppResult<GridValue> {
    let s = s.trim();
    let bad = || AppError::Usage(format!("bad grid value `{s}`"));
    if let Some(q) = s.strip_suffix('T').or_else(|| s.strip_suffix('t')) {
        let q = if q.is_empty() { 1.0 } else { q.parse().map_err(|_| bad())? };
        Ok(GridValue::PerT(q))
    } else {
        Ok(GridValue::Abs(s.parse().map_err(|_| bad())?))
    }
}

/// Default grid for each scan, chosen inside its regime.
pub fn default_grid_values(which: ScanKind) -> Vec<GridValue> {
    use std::f64::consts::PI;
    match which {
        ScanKind::SmallX => [0.5, 1.0, 2.0, 4.0, 8.0]
            .map(GridValue::Abs)
            .into_iter()
            .chain([0.5, 1.0].map(GridValue::PerT))
            .collect(),
        ScanKind::LargeX | ScanKind::SoupedUp => [0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0].map(GridValue::PerT).to_vec(),
        ScanKind::StationaryA | ScanKind::StationaryB => {
            [1.0 / 16.0, 1.0 / 8.0, 0.25, 0.5, 1.0].map(|q| GridValue::PerT(q / (2.0 * PI))).to_vec()
        }
    }
}

fn bound_scan(cfg: &RunConfig, which: &str, x_list: Option<&[String]>) -> AppResult<Outcome> {
    let kinds: Vec<ScanKind> = if which == "all" { ScanKind::ALL.to_vec() } else { vec![ScanKind::from_str(which)?] };
    let ts = cfg.t_list_or(&[21, 41]);
    let family = cfg.family()?;
    let mut reports: Vec<ScanReport> = Vec::new();
    for k in kinds {
        let xs = match x_list {
            Some(list) => list.iter().map(|s| parse_grid_value(s)).collect::<AppResult<Vec<_>>>()?,
            None => default_grid_values(k),
        };
        let grid = ScanGrid { xs, ts: ts.clone() };
        reports.push(scan::bound_scan(k, &grid, &family)?);
    }
    let parts: Vec<String> = reports
        .iter()
        .map(|r| {
            let per_t: Vec<String> = ts
                .iter()
                .map(|t| match r.sup_ratio_at(*t) {
                    Some(v) => format!("T={t}: {v:.3e}"),
                    None => format!("T={t}: -"),
                })
                .collect();
            format!("{} sup ratio {}", r.which, per_t.join(", "))
        })
        .collect();
    let flagged: usize = reports.iter().map(|r| r.flagged().count()).sum();
    Ok(Outcome::ok(
        output::scan_csv(&reports),
        format!("bound-scan: {}; {flagged} out-of-regime points skipped", parts.join("; ")),
    ))
}

fn avg_lambda(cfg: &RunConfig, m_list: &[u64], format: &Option<String>) -> AppResult<Outcome> {
    let t = cfg.require_t()?;
    let max_m = m_list.iter().copied().max().unwrap_or(1);
    let averager = HeckeAverager::new(&cfg.family()?, t, max_m, cfg.c_max, cfg.tol)?;
    let data = match &cfg.data_path {
        Some(_) => Some(load_data(cfg, format)?),
        None => None,
    };
    let weight = averager.engine().weight().clone();
    let mut header = vec!["m", "avg", "error", "eisenstein", "kloosterman"];
    if data.is_some() {
        header.push("spectral_partial");
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    let mass = averager.total_mass().total();
    for &m in m_list {
        let a = averager.average(m)?;
        let (eis, kl) = if m == 1 {
            (0.0, 0.0)
        } else {
            let g = averager.engine().geometric_side(m, 1)?;
            (g.eisenstein_term / mass, g.kloosterman_contribution() / mass)
        };
        let mut row = vec![m.to_string(), format!("{}", a.value), format!("{}", a.error), format!("{eis}"), format!("{kl}")];
        if let Some(d) = &data {
            let mut num = 0.0;
            let mut den = 0.0;
            for r in d {
                let h = weight.eval(r.t) / r.norm_sq;
                num += h * r.require_lambda(m)?;
                den += h;
            }
            row.push(format!("{}", num / den));
        }
        w.write_record(&row)?;
    }
    let text = String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf-8");
    Ok(Outcome::ok(text, format!("avg-lambda: T = {t}, {} values of m, total mass {mass:.6e}", m_list.len())))
}

fn kernels(cfg: &RunConfig, group: &str) -> AppResult<Outcome> {
    let eta = cfg.require_eta()?;
    let phi = make_test_function(eta)?;
    let groups: Vec<Group> = if group == "all" { Group::ALL.to_vec() } else { vec![Group::from_str(group)?] };
    let prediction = phi.phi_hat(0.0) + 0.5 * phi.phi(0.0);
    let rows: Vec<_> = groups
        .iter()
        .map(|&g| {
            let x = rmt_expected_value_x(&phi, g);
            let xi = rmt_expected_value_xi(&phi, g);
            json!({ "group": g.name(), "eta": eta, "x_route": x, "xi_route": xi, "delta": (x - xi).abs() })
        })
        .collect();
    let v = json!({ "eta": eta, "phi_hat_0": phi.phi_hat(0.0), "phi_0": phi.phi(0.0), "o_prediction": prediction, "groups": rows });
    Ok(Outcome::ok(
        output::pretty(&v)?,
        format!("kernels: eta = {eta}, O prediction phi_hat(0) + phi(0)/2 = {prediction:.10}"),
    ))
}
