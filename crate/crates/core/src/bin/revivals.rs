use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use revivals::config::{ModelKind, Overrides, RunConfig};
use revivals::criticality::{
    fit_powerlaw, fit_powerlaw_free, locate_classical_peak, locate_divergence, scan, Column,
    DerivativeOrder, FitWindow, ScanResult, Side,
};
use revivals::dicke::Parity;
use revivals::dynamics::{autocorrelation, detect_revivals, gaussian_packet, TimeGrid};
use revivals::experiments::{self, ExperimentId};
use revivals::output::{fmt_f64, provenance_line, write_table};
use revivals::timescales::{timescales_at, timescales_at_with, SlopeRule};
use revivals::Error;

#[derive(Parser)]
#[command(
    name = "revivals",
    version,
    about = "Revival times across quantum phase transitions"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Every field of the run configuration. Flags override `--config`.
#[derive(Args)]
struct Common {
    /// TOML file with run settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    model: Option<ModelArg>,
    /// Vibron N.
    #[arg(short = 'N', long = "N", global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    chi: Option<f64>,
    #[arg(long, global = true)]
    j: Option<f64>,
    #[arg(long, global = true)]
    w0: Option<f64>,
    #[arg(long, global = true)]
    w: Option<f64>,
    #[arg(long, global = true)]
    lambda: Option<f64>,
    #[arg(long, global = true)]
    n_max: Option<usize>,
    #[arg(long, global = true)]
    parity: Option<Parity>,
    #[arg(long, global = true)]
    k0: Option<usize>,
    #[arg(long, global = true)]
    sigma: Option<f64>,
    #[arg(long, global = true)]
    cutoff: Option<f64>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[arg(long, global = true)]
    t_max: Option<f64>,
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Scan start.
    #[arg(long, global = true)]
    from: Option<f64>,
    /// Scan end.
    #[arg(long, global = true)]
    to: Option<f64>,
    /// Number of scan points.
    #[arg(long, global = true)]
    steps: Option<usize>,
    /// `lo,hi` bracket for `locate`.
    #[arg(long, global = true, value_parser = parse_pair)]
    bracket: Option<(f64, f64)>,
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Vibron,
    Dicke,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Second,
    Third,
    TclPeak,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Below,
    Above,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Gap,
    ParabolaMidpoint,
}

#[derive(Subcommand)]
enum Command {
    /// Levels as `k,E`.
    Spectrum,
    /// Autocorrelation trace of a Gaussian packet.
    Autocorr,
    /// `T_Cl`, `T_R`, `T_SR` and the derivatives behind them at `k0`.
    Timescales {
        #[arg(long, value_enum, default_value = "gap")]
        slope_rule: RuleArg,
    },
    /// Timescales and gap over a control grid.
    Scan,
    /// Control value where a timescale diverges or peaks.
    Locate {
        #[arg(long, value_enum, default_value = "second")]
        order: OrderArg,
        #[arg(long, value_enum, default_value = "parabola-midpoint")]
        slope_rule: RuleArg,
    },
    /// Power-law fit of one column of a scan file; one JSON record per side.
    Fit {
        /// Scan CSV written by `scan`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "T_r")]
        column: String,
        #[arg(long, value_enum, default_value = "both")]
        side: SideArg,
        /// Known critical point.
        #[arg(long, conflicts_with = "free")]
        xc: Option<f64>,
        /// `lo,hi` bracket for a free critical point.
        #[arg(long, value_parser = parse_pair)]
        free: Option<(f64, f64)>,
        #[arg(long, default_value_t = 3)]
        exclude: usize,
        #[arg(long, default_value_t = 0.1)]
        max_distance: f64,
    },
    /// Runs a canned experiment and compares against its expected values.
    Reproduce {
        /// limits, fig1..fig5 or all.
        id: String,
        /// Directory for the CSV data behind each figure.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected lo,hi")?;
    let a: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((a, b))
}

impl From<RuleArg> for SlopeRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Gap => SlopeRule::Gap,
            RuleArg::ParabolaMidpoint => SlopeRule::ParabolaMidpoint,
        }
    }
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Self {
        match s {
            SideArg::Below => Side::Below,
            SideArg::Above => Side::Above,
            SideArg::Both => Side::Both,
        }
    }
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            model: self.model.map(|m| match m {
                ModelArg::Vibron => ModelKind::Vibron,
                ModelArg::Dicke => ModelKind::Dicke,
            }),
            n: self.n,
            chi: self.chi,
            j: self.j,
            w0: self.w0,
            w: self.w,
            lambda: self.lambda,
            n_max: self.n_max,
            parity: self.parity,
            k0: self.k0,
            sigma: self.sigma,
            cutoff: self.cutoff,
            dt: self.dt,
            t_max: self.t_max,
            threshold: self.threshold,
            from: self.from,
            to: self.to,
            steps: self.steps,
            bracket: self.bracket,
            output: self.output.clone(),
            workers: self.workers,
        }
    }

    fn resolve(&self) -> Result<RunConfig, Error> {
        let base = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        Ok(base.merged(&self.overrides()))
    }
}

enum Failure {
    Usage(String),
    Numerical(String),
    Mismatch,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn sink(cfg: &RunConfig) -> Result<Box<dyn Write>, Failure> {
    Ok(match &cfg.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn header(cfg: &RunConfig) -> Vec<String> {
    vec![provenance_line(&cfg.to_json())]
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Command::Reproduce { id, out_dir } = &cli.command {
        return reproduce(id, out_dir.as_deref(), cli.common.workers.unwrap_or(1));
    }
    let cfg = cli.common.resolve()?;
    if !matches!(cli.command, Command::Fit { .. }) {
        cfg.validate()?;
    }

    match cli.command {
        Command::Spectrum => {
            let s = cfg.spectrum()?;
            write_table(
                sink(&cfg)?,
                &header(&cfg),
                "k,E",
                s.levels()
                    .iter()
                    .enumerate()
                    .map(|(k, e)| vec![k.to_string(), fmt_f64(*e)]),
            )?;
        }
        Command::Autocorr => {
            let s = cfg.spectrum()?;
            let t = timescales_at(&s, cfg.k0)?;
            let packet = gaussian_packet(s.len(), cfg.k0, cfg.sigma, cfg.cutoff)?;
            let grid = match (cfg.dt, cfg.t_max) {
                (Some(dt), Some(t_max)) => TimeGrid::covering(dt, t_max)?,
                (dt, t_max) => {
                    let d = TimeGrid::for_timescales(t.t_cl, t.t_r)?;
                    let dt = dt.unwrap_or(d.dt);
                    TimeGrid::covering(dt, t_max.unwrap_or(d.time(d.count - 1)))?
                }
            };
            let trace = autocorrelation(&s, &packet, &grid)?;
            trace.write_csv(sink(&cfg)?, &header(&cfg))?;
            if t.t_cl.is_finite() {
                for r in detect_revivals(&trace, cfg.threshold, t.t_cl)? {
                    eprintln!("revival t={} |A|={}", r.time, r.modulus);
                }
            }
        }
        Command::Timescales { slope_rule } => {
            let s = cfg.spectrum()?;
            let t = timescales_at_with(&s, cfg.k0, slope_rule.into())?;
            let d = t.derivatives;
            write_table(
                sink(&cfg)?,
                &header(&cfg),
                "param,k0,T_cl,T_r,T_sr,E1,E2,E3",
                [vec![
                    fmt_f64(cfg.control()?),
                    cfg.k0.to_string(),
                    fmt_f64(t.t_cl),
                    fmt_f64(t.t_r),
                    fmt_f64(t.t_sr),
                    fmt_f64(d.first),
                    fmt_f64(d.second),
                    fmt_f64(d.third),
                ]],
            )?;
        }
        Command::Scan => {
            let grid = cfg.grid()?;
            let mid = grid[grid.len() / 2];
            let model = cfg.model_spec(match cfg.model {
                ModelKind::Vibron => mid,
                ModelKind::Dicke => grid.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            })?;
            let result = scan(&model, cfg.k0, &grid, cfg.workers)?;
            result.write_csv(sink(&cfg)?, &header(&cfg))?;
        }
        Command::Locate { order, slope_rule } => {
            let bracket = cfg
                .bracket
                .ok_or_else(|| Failure::Usage("locate needs --bracket lo,hi".into()))?;
            let model = cfg.model_spec(bracket.1)?;
            let (name, control) = match order {
                OrderArg::Second => (
                    "second",
                    locate_divergence(&model, cfg.k0, bracket, DerivativeOrder::Second)?,
                ),
                OrderArg::Third => (
                    "third",
                    locate_divergence(&model, cfg.k0, bracket, DerivativeOrder::Third)?,
                ),
                OrderArg::TclPeak => (
                    "tcl-peak",
                    locate_classical_peak(&model, cfg.k0, bracket, slope_rule.into())?,
                ),
            };
            let mut out = sink(&cfg)?;
            for line in header(&cfg) {
                writeln!(out, "# {line}")?;
            }
            writeln!(out, "order,k0,control")?;
            writeln!(out, "{name},{},{}", cfg.k0, fmt_f64(control))?;
        }
        Command::Fit {
            input,
            column,
            side,
            xc,
            free,
            exclude,
            max_distance,
        } => {
            let column: Column = column.parse()?;
            let scan = ScanResult::read_csv(BufReader::new(File::open(&input)?))?;
            let window = FitWindow {
                exclude_nearest: exclude,
                max_distance,
                regular: None,
            };
            let fits = match (xc, free) {
                (Some(xc), None) => fit_powerlaw(&scan, column, xc, side.into(), &window)?,
                (None, Some(bracket)) => {
                    fit_powerlaw_free(&scan, column, side.into(), bracket, &window)?
                }
                _ => {
                    return Err(Failure::Usage(
                        "fit needs exactly one of --xc or --free".into(),
                    ))
                }
            };
            let mut out = sink(&cfg)?;
            for f in fits {
                writeln!(out, "{}", f.to_record())?;
            }
        }
        Command::Reproduce { .. } => unreachable!(),
    }
    Ok(())
}

fn reproduce(id: &str, out_dir: Option<&std::path::Path>, workers: usize) -> Result<(), Failure> {
    let ids: Vec<ExperimentId> = if id == "all" {
        ExperimentId::ALL.to_vec()
    } else {
        vec![id.parse()?]
    };
    let mut ok = true;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for id in ids {
        let report = experiments::run(id, workers, out_dir)?;
        write!(out, "{report}")?;
        ok &= report.passed();
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Mismatch)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Mismatch) => {
            eprintln!("regression mismatch");
            ExitCode::from(4)
        }
    }
}
