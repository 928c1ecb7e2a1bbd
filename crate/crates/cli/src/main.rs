use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wdaug_core::mock::{MockConfig, MockServer};

mod commands;
mod config;
mod manifest;

use commands::{parse_named, Ctx, EvaluateArgs};
use config::{AverageArg, Method, RunConfig};

/// Failure carrying the process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }

    pub fn plan(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }

    pub fn provider(message: impl Into<String>) -> Self {
        CliError { code: 3, message: message.into() }
    }
}

#[derive(Parser)]
#[command(name = "wdaug", version, about = "Class balancing and augmentation pipeline for a four-class wellness corpus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration; every key has a default.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for all artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Input corpus (JSONL); overrides paths.input.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Test records per class instead of the computed value.
    #[arg(long)]
    test_per_class: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the balancing plan and write plan.json.
    Plan(Common),
    /// Write train.jsonl and test.jsonl.
    Split(Common),
    /// Fill the training split up to the plan's target with generated records.
    Augment {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        method: Option<Method>,
        #[arg(long)]
        eda_alpha: Option<f64>,
        #[arg(long)]
        bt_pivot: Option<String>,
        #[arg(long)]
        bt_endpoint: Option<String>,
        #[arg(long)]
        llm_base_url: Option<String>,
        #[arg(long)]
        llm_model: Option<String>,
        /// Overwrite an existing train_balanced.jsonl.
        #[arg(long)]
        force: bool,
    },
    /// Score generated records against their parents.
    Similarity {
        #[command(flatten)]
        common: Common,
        /// Balanced corpus to compare, as NAME=PATH; repeatable.
        #[arg(long = "balanced", value_parser = parse_named)]
        balanced: Vec<(String, PathBuf)>,
    },
    /// Train the builtin classifier on each training set and compare.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Training corpus as NAME=PATH; repeatable. The first is the baseline.
        #[arg(long = "train", value_parser = parse_named)]
        train: Vec<(String, PathBuf)>,
        /// Predictions from an external model as NAME=PATH; repeatable.
        #[arg(long = "external", value_parser = parse_named)]
        external: Vec<(String, PathBuf)>,
        #[arg(long)]
        test: Option<PathBuf>,
        #[arg(long, value_enum)]
        average: Option<AverageArg>,
    },
    /// Merge stage outputs into report.txt.
    Report(Common),
    /// Serve the offline mock of the remote providers.
    MockServer {
        #[arg(long, default_value = "127.0.0.1:8089")]
        addr: SocketAddr,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Answer the first N requests with HTTP 429.
        #[arg(long, default_value_t = 0)]
        rate_limit_first: usize,
        /// Return input text unchanged.
        #[arg(long)]
        echo: bool,
    },
}

fn context(common: &Common, tweak: impl FnOnce(&mut RunConfig)) -> Result<Ctx, CliError> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p).map_err(CliError::usage)?,
        None => RunConfig::default(),
    };
    if let Some(p) = &common.input {
        cfg.paths.input = Some(p.clone());
    }
    if let Some(s) = common.seed {
        cfg.split.seed = s;
    }
    if let Some(k) = common.test_per_class {
        cfg.split.per_class_test = Some(k);
    }
    tweak(&mut cfg);
    Ctx::new(cfg, common.out.clone())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Plan(c) => commands::plan(&context(&c, |_| {})?),
        Command::Split(c) => commands::split(&context(&c, |_| {})?),
        Command::Augment { common, method, eda_alpha, bt_pivot, bt_endpoint, llm_base_url, llm_model, force } => {
            let ctx = context(&common, |cfg| {
                if let Some(m) = method {
                    cfg.augment.method = m;
                }
                if let Some(a) = eda_alpha {
                    cfg.augment.eda_alpha = a;
                }
                if let Some(p) = bt_pivot {
                    cfg.bt.pivot = p;
                }
                if bt_endpoint.is_some() {
                    cfg.bt.endpoint = bt_endpoint;
                }
                if let Some(u) = llm_base_url {
                    cfg.llm.base_url = u;
                }
                if let Some(m) = llm_model {
                    cfg.llm.model = m;
                }
            })?;
            commands::augment(&ctx, force)
        }
        Command::Similarity { common, balanced } => commands::similarity(&context(&common, |_| {})?, &balanced),
        Command::Evaluate { common, train, external, test, average } => {
            let ctx = context(&common, |cfg| {
                if let Some(a) = average {
                    cfg.report.average = a;
                }
            })?;
            commands::evaluate_cmd(&ctx, &EvaluateArgs { train, external, test })
        }
        Command::Report(c) => commands::report(&context(&c, |_| {})?),
        Command::MockServer { addr, seed, rate_limit_first, echo } => {
            let server = MockServer::start_on(addr, MockConfig { seed, rate_limit_first, echo, empty_translation: false })
                .map_err(|e| CliError::usage(format!("{addr}: {e}")))?;
            println!("mock server listening on {}", server.base_url());
            server.wait();
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
