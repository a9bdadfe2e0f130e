use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rfid_mti::analysis::{efficiency_curves, write_curves_csv, ISMTI_SEARCH};
use rfid_mti::experiment::parse_axis;
use rfid_mti::{ismti_p_opt, ssmti_p_opt, sweep, write_csv, ExperimentConfig, Result, TimingModel};

#[derive(Parser)]
#[command(name = "mti", version, about = "Missing tag identification simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Repeated trials of a single parameter cell, as one CSV row.
    Run(ExpArgs),
    /// Every cell of the parameter grid, one CSV row each.
    Sweep(ExpArgs),
    /// Efficiency curves and optimal load factors.
    Optimize {
        #[arg(long, default_value = "0.1..6:0.05")]
        p_grid: String,
        #[arg(long, default_value = "0..1:0.1")]
        q_grid: String,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// One seeded run with a log line per round.
    Trace {
        #[command(flatten)]
        exp: ExpArgs,
        /// Trial index whose seed is used.
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
}

/// Values accept `v`, `v1,v2` or `a..b:step`.
#[derive(Args)]
struct ExpArgs {
    /// key=value file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// ssmti, ismti or edfsa.
    #[arg(long)]
    protocol: Option<String>,
    #[arg(long)]
    n: Option<String>,
    /// Missing rate.
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    w: Option<String>,
    /// Load factor, or `opt`.
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    detect_err: Option<String>,
    #[arg(long)]
    capture: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// `given` or a rate.
    #[arg(long)]
    q_prior: Option<String>,
    /// per-bit or per-message.
    #[arg(long)]
    broadcast: Option<String>,
    #[arg(long)]
    edfsa_empty_ms: Option<String>,
    #[arg(long, short)]
    output: Option<String>,
}

impl ExpArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_text(&std::fs::read_to_string(path)?)?;
        }
        let flags = [
            ("protocol", &self.protocol),
            ("n", &self.n),
            ("q", &self.q),
            ("w", &self.w),
            ("p", &self.p),
            ("detect_err", &self.detect_err),
            ("capture", &self.capture),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("q_prior", &self.q_prior),
            ("broadcast", &self.broadcast),
            ("edfsa_empty_ms", &self.edfsa_empty_ms),
            ("output", &self.output),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        Ok(cfg)
    }
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.config()?;
            let report = rfid_mti::run_experiment(&cfg)?;
            write_csv(sink(&cfg.output)?, &[report])
        }
        Command::Sweep(args) => {
            let cfg = args.config()?;
            let reports = sweep(&cfg)?;
            write_csv(sink(&cfg.output)?, &reports)
        }
        Command::Optimize {
            p_grid,
            q_grid,
            output,
        } => {
            let timing = TimingModel::default();
            let (ss, is) =
                efficiency_curves(&parse_axis(&p_grid)?, &parse_axis(&q_grid)?, &timing)?;
            write_curves_csv(sink(&output)?, &ss, &is)?;
            eprintln!("ssmti p_opt={:.4}", ssmti_p_opt(&timing));
            for q in parse_axis(&q_grid)? {
                let p = ismti_p_opt(q)?;
                let edge = if (p - ISMTI_SEARCH.1).abs() < 1e-3 {
                    " (search bound)"
                } else {
                    ""
                };
                eprintln!("ismti q={q} p_opt={p:.4}{edge}");
            }
            Ok(())
        }
        Command::Trace { exp, trial } => {
            let cfg = exp.config()?;
            let cells = cfg.cells()?;
            if cells.len() != 1 {
                return Err(rfid_mti::Error::Config(format!(
                    "trace expects a single parameter cell, got {}",
                    cells.len()
                )));
            }
            let r = cfg.run_trial(&cells[0], trial)?;
            let mut out = sink(&cfg.output)?;
            for line in &r.trace {
                writeln!(out, "{line}")?;
            }
            writeln!(
                out,
                "stage=done elapsed_ms={:.4} rounds={} missing={} present={} reader_bits={} \
                 tag_bits={} slots={} false_positives={} false_negatives={}",
                r.elapsed_ms,
                r.rounds,
                r.identified_missing.len(),
                r.identified_present.len(),
                r.reader_bits,
                r.tag_bits,
                r.slots_used,
                r.false_positives,
                r.false_negatives
            )?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mti: {e}");
            ExitCode::from(2)
        }
    }
}
