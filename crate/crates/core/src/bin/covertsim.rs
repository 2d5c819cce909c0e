use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use covertsim::expcli::{
    print_resource_table, render_summary, replay_trial, run_experiment, write_outputs, Assertion, ExperimentConfig,
    Scenario,
};
use covertsim::Error;

const EXIT_RUNTIME: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_ASSERT: u8 = 3;

#[derive(Parser)]
#[command(name = "covertsim", version, about = "Covert and verifiable quantum learning simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment and write report.json and summary.csv.
    Run {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Output directory.
        #[arg(long, default_value = "covertsim-out")]
        out: PathBuf,
        /// Rate assertion such as `success>=0.9` or `bad_accept<=0.05`; repeatable.
        #[arg(long = "assert", value_name = "FLAG(>=|<=)RATE")]
        asserts: Vec<String>,
    },
    /// Re-run a single trial and print its record.
    Replay {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        trial: u64,
    },
    /// Print formula resource counts for a configuration.
    Resources {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Emit JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// List the scenario names.
    ListScenarios,
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON config file; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    delta_leak: Option<f64>,
    #[arg(long)]
    delta_tilde: Option<f64>,
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
}

impl ConfigArgs {
    fn build(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match (&self.config, &self.scenario) {
            (Some(p), _) => ExperimentConfig::load(p)?,
            (None, Some(s)) => ExperimentConfig::new(Scenario::parse(s)?),
            (None, None) => return Err(Error::Config("need --config or --scenario".into())),
        };
        if let (Some(_), Some(s)) = (&self.config, &self.scenario) {
            cfg.scenario = Scenario::parse(s)?;
        }
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { cfg.$f = v; })* };
        }
        set!(n, m, eps, delta, delta_tilde, trials, seed);
        if self.delta_leak.is_some() {
            cfg.delta_leak = self.delta_leak;
        }
        if self.blocks.is_some() {
            cfg.blocks = self.blocks;
        }
        if self.workers.is_some() {
            cfg.workers = self.workers;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_assertion(s: &str) -> Result<Assertion, Error> {
    let bad = || Error::Config(format!("bad assertion {s:?}; expected FLAG>=RATE or FLAG<=RATE"));
    let (flag, op, val) = if let Some((f, v)) = s.split_once(">=") {
        (f, true, v)
    } else if let Some((f, v)) = s.split_once("<=") {
        (f, false, v)
    } else {
        return Err(bad());
    };
    let v: f64 = val.trim().parse().map_err(|_| bad())?;
    if !(0.0..=1.0).contains(&v) || flag.trim().is_empty() {
        return Err(bad());
    }
    let flag = flag.trim().to_string();
    Ok(if op { Assertion { flag, min: Some(v), max: None } } else { Assertion { flag, min: None, max: Some(v) } })
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        Error::Config(_) | Error::Parse(_) => ExitCode::from(EXIT_CONFIG),
        _ => ExitCode::from(EXIT_RUNTIME),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::ListScenarios => {
            for s in Scenario::ALL {
                println!("{:<14} {}", s.name(), s.describe());
            }
            ExitCode::SUCCESS
        }
        Cmd::Resources { cfg, json } => {
            let cfg = match cfg.build() {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            let out = if json {
                covertsim::expcli::resource_table(&cfg).and_then(|r| serde_json::to_string_pretty(&r).map_err(Error::from))
            } else {
                print_resource_table(&cfg)
            };
            match out {
                Ok(s) => {
                    println!("{s}");
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Cmd::Replay { cfg, trial } => {
            let res = cfg.build().and_then(|c| replay_trial(&c, trial));
            match res.and_then(|r| serde_json::to_string_pretty(&r).map_err(Error::from)) {
                Ok(s) => {
                    println!("{s}");
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Cmd::Run { cfg, out, asserts } => {
            let mut cfg = match cfg.build() {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            for a in &asserts {
                match parse_assertion(a) {
                    Ok(a) => cfg.assertions.push(a),
                    Err(e) => return fail(&e),
                }
            }
            let report = match run_experiment(&cfg) {
                Ok(r) => r,
                Err(e) => return fail(&e),
            };
            if let Err(e) = write_outputs(&report, &out) {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_RUNTIME);
            }
            print!("{}", render_summary(&report));
            println!("wrote {}", out.display());
            if report.all_assertions_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_ASSERT)
            }
        }
    }
}
