//! `causeplan` command-line driver.
//!
//! Exit codes:
//!
//! | code | meaning                                                        |
//! |------|----------------------------------------------------------------|
//! | 0    | success (valid model, goal-achieving plan, expectations held)  |
//! | 1    | negative result (invalid model, failed plan or transfer, unmet expectation) |
//! | 2    | unusable input (unreadable file, syntax error, condition mismatch) |
//! | 3    | state space larger than `--max-states`                         |
//! | 4    | value iteration hit `--max-iterations`                         |

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use causeplan::PlannerConfig;

#[derive(Parser)]
#[command(name = "causeplan", version, about = "Plan assemblies from causal models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a `.cm` model.
    Validate {
        model: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Evaluate a model for a set of active functions.
    Evaluate {
        model: PathBuf,
        /// Active function labels, comma separated.
        #[arg(long, value_delimiter = ',', conflicts_with = "all_subsets")]
        active: Vec<String>,
        /// Evaluate every subset of the function nodes.
        #[arg(long)]
        all_subsets: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Print the connector compatibility matrix of an object.
    Compat {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Plan an object's assembly under a model and binding.
    Plan {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        binding: PathBuf,
        #[command(flatten)]
        planner: PlannerArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Replan a test object with a frozen training model.
    Transfer {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        binding: PathBuf,
        /// Training object ids, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        training: Vec<String>,
        #[command(flatten)]
        planner: PlannerArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run an experiment config and check its expectations.
    Experiment {
        config: PathBuf,
        #[arg(long, env = "CAUSEPLAN_CATALOG", default_value = "fixtures/catalog")]
        catalog: PathBuf,
        #[command(flatten)]
        planner: PlannerArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Count reachable states and actions for an object.
    Enumerate {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, requires = "binding")]
        model: Option<PathBuf>,
        #[arg(long, requires = "model")]
        binding: Option<PathBuf>,
        /// Include every transition distribution in the document.
        #[arg(long)]
        transitions: bool,
        #[command(flatten)]
        planner: PlannerArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// List the objects in a catalog.
    Catalog {
        #[arg(long, env = "CAUSEPLAN_CATALOG", default_value = "fixtures/catalog")]
        catalog: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct SourceArgs {
    /// Object id in the catalog, or a path to an object `.json` file.
    #[arg(long)]
    object: String,
    #[arg(long, env = "CAUSEPLAN_CATALOG", default_value = "fixtures/catalog")]
    catalog: PathBuf,
}

#[derive(Args)]
struct PlannerArgs {
    #[arg(long)]
    discount: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_states: Option<usize>,
    #[arg(long)]
    max_iterations: Option<usize>,
}

impl PlannerArgs {
    fn config(&self) -> PlannerConfig {
        let d = PlannerConfig::default();
        PlannerConfig {
            discount: self.discount.unwrap_or(d.discount),
            epsilon: self.epsilon.unwrap_or(d.epsilon),
            max_states: self.max_states.unwrap_or(d.max_states),
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
            rewards: d.rewards,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Document,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Also write the JSON document to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { model, output } => commands::validate(&model, &output),
        Command::Evaluate {
            model,
            active,
            all_subsets,
            output,
        } => commands::evaluate(&model, &active, all_subsets, &output),
        Command::Compat { source, output } => commands::compat(&source, &output),
        Command::Plan {
            source,
            model,
            binding,
            planner,
            output,
        } => commands::plan(&source, &model, &binding, &planner.config(), &output),
        Command::Transfer {
            source,
            model,
            binding,
            training,
            planner,
            output,
        } => commands::transfer(&source, &model, &binding, &training, &planner.config(), &output),
        Command::Experiment {
            config,
            catalog,
            planner,
            output,
        } => commands::experiment(&config, &catalog, &planner.config(), &output),
        Command::Enumerate {
            source,
            model,
            binding,
            transitions,
            planner,
            output,
        } => commands::enumerate(
            &source,
            model.as_deref(),
            binding.as_deref(),
            transitions,
            &planner.config(),
            &output,
        ),
        Command::Catalog { catalog, output } => commands::catalog(&catalog, &output),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
