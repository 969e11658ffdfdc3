use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hardy_henon::harness::experiments::RunRecord;
use hardy_henon::harness::{self, emit_csv, emit_svg, parse_config, verify, ExperimentKind};
use hardy_henon::kernel::{decay_fit, envelope_profile, kernel_profile, polynomial_fit, sign_analysis};
use hardy_henon::lorentz::{self, LorentzExponents};
use hardy_henon::spectral::read_snapshot;
use hardy_henon::Error;

/// Hardy-Hénon numerical laboratory.
#[derive(Parser)]
#[command(name = "hh", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Lorentz,
    Kernel,
    Evolve,
    Weakform,
    All,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute one experiment configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Write CSV/SVG reports and append the record to `runs.store` here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Execute a `fujita_scan` configuration and print one line per cell.
    Scan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run acceptance checks.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
    },
    /// Tabulate the kernel profile as CSV `r,g` followed by a fit summary.
    Kernel {
        #[arg(long)]
        m: f64,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 10.0)]
        rmax: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
    },
    /// Lorentz norm of a stored field snapshot.
    Norms {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        p: f64,
        /// Second exponent; `inf` for the weak norm.
        #[arg(long, default_value = "inf")]
        q: String,
    },
}

enum Fail {
    Assertion(String),
    Config(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::Io(_) => Fail::Config(e.to_string()),
            other => Fail::Assertion(other.to_string()),
        }
    }
}

fn write_reports(rec: &RunRecord, dir: &Path) -> Result<(), Fail> {
    let io = |e: std::io::Error| Fail::Config(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    for (name, text) in emit_csv(rec).into_iter().chain(emit_svg(rec)) {
        std::fs::write(dir.join(name), text).map_err(io)?;
    }
    std::fs::write(dir.join("config.toml"), rec.config.emit()?).map_err(io)?;
    harness::append(rec, &dir.join("runs.store"))?;
    Ok(())
}

fn summarize(rec: &RunRecord) {
    println!("kind: {:?}  wall time {:.2}s", rec.kind, rec.wall_time);
    for c in &rec.cells {
        match (&c.outcome, &c.error) {
            (Some(o), _) => println!("cell {}: {:?}", c.label, o.status),
            (_, Some(e)) => println!("cell {}: error {e}", c.label),
            _ => {}
        }
    }
    for (k, v) in &rec.metrics {
        println!("metric {k} = {v:.6e}");
    }
    for c in &rec.checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("check {tag} {} = {:.6e} (threshold {:.6e})", c.name, c.value, c.threshold);
    }
    for n in &rec.notes {
        println!("note: {n}");
    }
}

fn run_config(config: &Path, out: Option<&Path>, scan: bool) -> Result<(), Fail> {
    let cfg = parse_config(config)?;
    if scan && cfg.kind != ExperimentKind::FujitaScan {
        return Err(Fail::Config("config error at `kind`: scan needs kind = \"fujita_scan\"".into()));
    }
    let rec = harness::execute(&cfg)?;
    if scan {
        println!("p,status,t_star");
        for c in &rec.cells {
            let (status, t) = match c.outcome.map(|o| o.status) {
                Some(hardy_henon::evolve::Status::Blowup { t_star, .. }) => ("blowup", t_star.to_string()),
                Some(hardy_henon::evolve::Status::Completed) => ("completed", String::new()),
                Some(hardy_henon::evolve::Status::StepUnderflow { t }) => ("step_underflow", t.to_string()),
                None => ("error", String::new()),
            };
            println!("{},{status},{t}", c.param);
        }
    }
    summarize(&rec);
    if let Some(dir) = out {
        write_reports(&rec, dir)?;
    }
    if rec.passed() {
        Ok(())
    } else {
        Err(Fail::Assertion("one or more checks failed".into()))
    }
}

fn run_kernel(m: f64, n: usize, rmax: f64, points: usize) -> Result<(), Fail> {
    if points < 2 || rmax.is_nan() || rmax <= 0.0 {
        return Err(Fail::Config("config error at `points`: need points >= 2 and rmax > 0".into()));
    }
    let radii: Vec<f64> = (0..points).map(|i| rmax * i as f64 / (points - 1) as f64).collect();
    let table = kernel_profile(m, n, &radii)?;
    println!("r,g");
    for (r, g) in table.radii.iter().zip(&table.values) {
        println!("{r},{g}");
    }
    let (min, first_neg) = sign_analysis(&table);
    println!("# min {min:.6e}");
    if let Some(r) = first_neg {
        println!("# first negative radius {r}");
    }
    let lo = 2f64.min(rmax / 4.0);
    let fit = if m.fract() == 0.0 {
        let tab = if m >= 2.0 && n == 1 { envelope_profile(m, &radii)? } else { table };
        decay_fit(&tab, lo, rmax, None).map(|f| {
            format!(
                "# fit stretched exponential: L = {:.6}, rate {:.6e}, power {:.4}, predicted L = {:.6}",
                f.exponent,
                f.rate,
                f.power,
                2.0 * m / (2.0 * m - 1.0)
            )
        })
    } else {
        polynomial_fit(&table, lo, rmax).map(|f| {
            format!("# fit polynomial: exponent {:.6}, predicted {}", f.exponent, n as f64 + 2.0 * m)
        })
    };
    match fit {
        Ok(s) => println!("{s}"),
        Err(e) => println!("# fit unavailable: {e}"),
    }
    Ok(())
}

fn run_norms(field: &Path, p: f64, q: &str) -> Result<(), Fail> {
    let qv = match q {
        "inf" | "infinity" => f64::INFINITY,
        s => s
            .parse::<f64>()
            .map_err(|e| Fail::Config(format!("config error at `q`: {e}")))?,
    };
    let (f, _) = read_snapshot(field)?;
    let v = lorentz::rearrange(&f).lorentz_norm(LorentzExponents { p, q: qv })?;
    println!("field_path,p,q,value");
    println!("{},{p},{q},{v}", field.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.cmd {
        Cmd::Run { config, out } => run_config(&config, out.as_deref(), false),
        Cmd::Scan { config, out } => run_config(&config, out.as_deref(), true),
        Cmd::Verify { suite } => {
            let name = match suite {
                Suite::Lorentz => "lorentz",
                Suite::Kernel => "kernel",
                Suite::Evolve => "evolve",
                Suite::Weakform => "weakform",
                Suite::All => "all",
            };
            let mut ok = true;
            for id in verify::suite(name).unwrap_or_default() {
                let rep = verify::criterion(id);
                println!("{rep}");
                ok &= rep.passed();
            }
            if ok {
                Ok(())
            } else {
                Err(Fail::Assertion("verification failed".into()))
            }
        }
        Cmd::Kernel { m, n, rmax, points } => run_kernel(m, n, rmax, points),
        Cmd::Norms { field, p, q } => run_norms(&field, p, &q),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Assertion(msg)) => {
            eprintln!("hh: {msg}");
            ExitCode::from(1)
        }
        Err(Fail::Config(msg)) => {
            eprintln!("hh: {msg}");
            ExitCode::from(2)
        }
    }
}
