use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use walker_verify::cli::{self, Format, Grid, Output, RunConfig, Source};
use walker_verify::domain::{DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_TOL};
use walker_verify::exec::{configure_threads, Exec};
use walker_verify::Result;

#[derive(Parser)]
#[command(name = "walker-verify", version, about = "Checks Einstein Walker metrics")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Einstein, symmetry and reduced-system residuals.
    Check(Common),
    /// det T and Petrov type on a grid, with the holonomy verdict.
    Classify {
        #[command(flatten)]
        common: Common,
        /// Grid as var=lo:hi:n,... (other coordinates sit at the domain midpoint).
        #[arg(long)]
        grid: Option<String>,
    },
    /// Killing residuals and closure of the field list.
    Killing {
        #[command(flatten)]
        common: Common,
        /// File of [[killing]] tables replacing the metric's list.
        #[arg(long)]
        fields: Option<PathBuf>,
    },
    /// Flow that removes A, compared with the closed-form transform.
    GaugeDemo(Common),
    /// Catalog entries.
    List {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Writes a metric in the file format.
    Export {
        metric: String,
        #[arg(long, allow_negative_numbers = true)]
        lambda: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Catalog name or metric file.
    metric: String,
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Decimal or 0x-prefixed hex.
    #[arg(long, value_parser = parse_seed, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Runs sample loops on one thread.
    #[arg(long)]
    serial: bool,
}

fn parse_seed(s: &str) -> std::result::Result<u64, String> {
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    }
    .map_err(|e| e.to_string())
}

impl Common {
    fn config(&self) -> Result<RunConfig> {
        let mut c = RunConfig::new(Source::resolve(&self.metric)?);
        c.lambda = self.lambda;
        c.samples = self.samples;
        c.tol = self.tol;
        c.seed = self.seed;
        c.format = self.format;
        if self.serial {
            c.exec = Exec::Serial;
        }
        Ok(c)
    }
}

fn write_out(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| walker_verify::Error::Io(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn report(
    run: impl FnOnce(&RunConfig) -> Result<Output>,
    common: &Common,
    setup: impl FnOnce(&mut RunConfig) -> Result<()>,
) -> Result<i32> {
    let mut cfg = common.config()?;
    setup(&mut cfg)?;
    let out = run(&cfg)?;
    write_out(&out.render(cfg.format), common.out.as_ref())?;
    Ok(out.exit_code())
}

fn run(cmd: Cmd) -> Result<i32> {
    match cmd {
        Cmd::Check(c) => report(cli::cmd_check, &c, |_| Ok(())),
        Cmd::Classify { common, grid } => report(cli::cmd_classify, &common, |cfg| {
            cfg.grid = grid.as_deref().map(str::parse::<Grid>).transpose()?;
            Ok(())
        }),
        Cmd::Killing { common, fields } => report(cli::cmd_killing, &common, |cfg| {
            cfg.fields = fields;
            Ok(())
        }),
        Cmd::GaugeDemo(c) => report(cli::cmd_gauge_demo, &c, |_| Ok(())),
        Cmd::List { format, out } => {
            let o = cli::cmd_list()?;
            write_out(&o.render(format), out.as_ref())?;
            Ok(0)
        }
        Cmd::Export { metric, lambda, out } => {
            let mut cfg = RunConfig::new(Source::resolve(&metric)?);
            cfg.lambda = lambda;
            write_out(&cli::cmd_export(&cfg)?, out.as_ref())?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Ok(v) = std::env::var("WALKER_VERIFY_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => configure_threads(n),
            _ => log::warn!("ignoring WALKER_VERIFY_THREADS={v}"),
        }
    }
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
