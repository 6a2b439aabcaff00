use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use rkhs_sampling::bounds::thmbound_rhs;
use rkhs_sampling::harness::report::write_report;
use rkhs_sampling::harness::{prefix_convergence, run_trials, ExperimentConfig, Format, ReportRow};
use rkhs_sampling::projection::project;
use rkhs_sampling::{Error, Point, Space};

#[derive(Parser)]
#[command(name = "rkhs-mc", version, about = "Monte Carlo certification of RKHS sampling bounds")]
struct Cli {
    /// Experiment config (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path; stdout when absent
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format: csv or json
    #[arg(long, global = true)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full experiment and write the summary report
    Run,
    /// Print the bound for every (n, delta) without sampling
    Bound,
    /// Project the target onto the span of the configured points
    Project,
    /// Tabulate K_P on the configured points, or on a default grid
    KpTable,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        Error::Numerical(_) => 3,
        _ => 1,
    }
}

fn execute(cli: &Cli) -> Result<(), Error> {
    let Some(path) = &cli.config else {
        return Err(Error::Config("--config <path> is required".into()));
    };
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let format = cli.format.or(cfg.format).unwrap_or(Format::Csv);
    let out = cli.out.clone().or_else(|| cfg.output.clone());
    match cli.command {
        Command::Run => run(&cfg, format, out.as_deref()),
        Command::Bound => bound(&cfg, format, out.as_deref()),
        Command::Project => project_points(&cfg, format, out.as_deref()),
        Command::KpTable => kp_table(&cfg, format, out.as_deref()),
    }
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match out {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn write_rows<T: Serialize>(rows: &[T], format: Format, out: Option<&Path>) -> Result<(), Error> {
    let mut w = sink(out)?;
    match format {
        Format::Csv => {
            let mut c = csv::Writer::from_writer(&mut w);
            for r in rows {
                c.serialize(r)?;
            }
            c.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, rows)?;
            w.write_all(b"\n")?;
        }
    }
    w.flush()?;
    Ok(())
}

fn run(cfg: &ExperimentConfig, format: Format, out: Option<&Path>) -> Result<(), Error> {
    let result = run_trials(cfg)?;
    let rows: Vec<ReportRow> = result.summary.iter().map(ReportRow::from).collect();
    write_report(&rows, format, sink(out)?)?;

    let cancelled = result.cancellation_warnings();
    if cancelled > 0 {
        eprintln!("warning: {cancelled} trials lost more than 1e-8 of ||f||^2 to cancellation");
    }
    if let Some(p) = &cfg.prefix {
        let curves = prefix_convergence(cfg, p.max_n, p.seeds, p.threshold)?;
        let target = match out {
            Some(o) => o.with_extension("prefix.json"),
            None => PathBuf::from(format!("{}.prefix.json", cfg.experiment_id)),
        };
        let mut w = std::io::BufWriter::new(std::fs::File::create(&target)?);
        serde_json::to_writer(&mut w, &curves)?;
        w.flush()?;
        if curves.nonmonotone_curves > 0 {
            return Err(Error::Numerical(format!(
                "{} prefix error curves increased",
                curves.nonmonotone_curves
            )));
        }
    }
    let violations: usize = result.summary.iter().map(|c| c.ordering_violations).sum();
    if violations > 0 {
        return Err(Error::Numerical(format!(
            "projection error exceeded the Monte Carlo residual in {violations} records"
        )));
    }
    Ok(())
}

fn bound(cfg: &ExperimentConfig, format: Format, out: Option<&Path>) -> Result<(), Error> {
    let ctx = cfg.context()?;
    let mut rows = Vec::new();
    for &n in &cfg.ns {
        for &delta in &cfg.deltas {
            rows.push(thmbound_rhs(&ctx, &cfg.target, &cfg.lambda, n, delta)?);
        }
    }
    write_rows(&rows, format, out)
}

#[derive(Serialize)]
struct WeightRow {
    index: usize,
    x_re: f64,
    x_im: f64,
    weight_re: f64,
    weight_im: f64,
    retained: bool,
    error_sq: f64,
}

fn project_points(cfg: &ExperimentConfig, format: Format, out: Option<&Path>) -> Result<(), Error> {
    let Some(points) = &cfg.points else {
        return Err(Error::Config("project needs `points` in the config".into()));
    };
    let p = project(&cfg.target, points, cfg.drop_tol)?;
    let rows: Vec<WeightRow> = points
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let (x_re, x_im) = x.coords();
            WeightRow {
                index: i,
                x_re,
                x_im,
                weight_re: p.weights[i].re,
                weight_im: p.weights[i].im,
                retained: p.retained.contains(&i),
                error_sq: p.error_sq,
            }
        })
        .collect();
    write_rows(&rows, format, out)
}

#[derive(Serialize)]
struct KpRow {
    i: usize,
    j: usize,
    x_re: f64,
    x_im: f64,
    y_re: f64,
    y_im: f64,
    kp_re: f64,
    kp_im: f64,
}

fn default_grid(space: Space) -> Vec<Point> {
    match space {
        Space::Interval => (0..9)
            .map(|i| Point::Interval(-std::f64::consts::PI + i as f64 * std::f64::consts::FRAC_PI_4))
            .collect(),
        Space::Disk => std::iter::once(Point::Disk(0.0.into()))
            .chain([0.25, 0.5, 0.75].iter().flat_map(|&r| {
                (0..4).map(move |k| {
                    let z = rkhs_sampling::Complex64::from_polar(r, k as f64 * std::f64::consts::FRAC_PI_2);
                    Point::Disk(z)
                })
            }))
            .collect(),
    }
}

fn kp_table(cfg: &ExperimentConfig, format: Format, out: Option<&Path>) -> Result<(), Error> {
    let ctx = cfg.context()?;
    let points = cfg
        .points
        .clone()
        .unwrap_or_else(|| default_grid(cfg.kernel.space()));
    let mut rows = Vec::with_capacity(points.len() * points.len());
    for (i, x) in points.iter().enumerate() {
        for (j, y) in points.iter().enumerate() {
            let v = ctx.kp_eval(x, y)?;
            let ((x_re, x_im), (y_re, y_im)) = (x.coords(), y.coords());
            rows.push(KpRow { i, j, x_re, x_im, y_re, y_im, kp_re: v.re, kp_im: v.im });
        }
    }
    write_rows(&rows, format, out)
}
