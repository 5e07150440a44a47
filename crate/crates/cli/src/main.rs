//! `cyclo`: command-line access to the cyclic-category toolkit.

mod check;
mod commands;
mod literal;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "cyclo",
    version,
    about = "Finite models of the (epi)cyclic category, a geometric-logic checker, and subgroups of Q"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Print the machine-readable report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Instantiate axiom schemes up to this parameter.
    #[arg(long, global = true, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..=8))]
    pub scheme_cap: u64,
    /// Arrow displacement bound M (default 3n per model).
    #[arg(long, global = true)]
    pub arrow_bound: Option<i64>,
    /// Bound B of indexed disjunctions (default: the arrow bound).
    #[arg(long, global = true)]
    pub index_bound: Option<i64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a model X_n.
    #[command(subcommand)]
    Model(ModelCmd),
    /// Split an arrow as base path plus windings of the cycle.
    Factorize {
        #[arg(long)]
        n: usize,
        /// Arrow literal `disp@src`.
        #[arg(long, allow_hyphen_values = true)]
        arrow: String,
    },
    /// The minimal positive arrow between two objects.
    Pmin {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
    },
    /// A generator for two loops in which every domain occurs once.
    Mingen {
        #[arg(long)]
        n: usize,
        /// First loop, comma-separated arrow literals.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
        #[arg(long, value_enum, default_value_t = Mode::Epicyclic)]
        mode: Mode,
    },
    /// Split an elementary cycle so that it passes through an object.
    Insert {
        #[arg(long)]
        n: usize,
        #[arg(long = "loop")]
        cycle: String,
        #[arg(long)]
        object: usize,
    },
    /// Morphisms X_n -> X_m up to a degree.
    Homs {
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        #[arg(long, default_value_t = 1)]
        max_degree: usize,
        /// Print only the number of morphisms.
        #[arg(long)]
        count: bool,
        /// Print this many morphisms drawn with --seed.
        #[arg(long, conflicts_with = "count")]
        sample: Option<usize>,
    },
    /// Compose two morphisms, `second o first`.
    Compose {
        /// Morphism `n>m@base:b1,...,bn` or its JSON form.
        #[arg(long)]
        first: String,
        #[arg(long)]
        second: String,
    },
    /// The degree k with H(l(xi)) = l(xi)^k.
    Modfun {
        #[arg(long)]
        morphism: String,
    },
    /// Check a theory or a `.geo` file in bounded models.
    Check(check::CheckArgs),
    /// Parse a sequent or formula, or expand a macro.
    Parse {
        /// Sequent (with `|-`) or closed formula.
        #[arg(allow_hyphen_values = true, required_unless_present = "expand")]
        text: Option<String>,
        /// Expand a macro by name, e.g. `Phi`.
        #[arg(long, conflicts_with = "text")]
        expand: Option<String>,
        /// Loop lengths for --expand, comma-separated.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
    },
    /// Ordered subgroups of Q.
    #[command(subcommand)]
    Q(QCmd),
    /// Render a model, loops or a morphism.
    Export {
        #[arg(value_enum)]
        format: Format,
        #[arg(long, required_unless_present = "morphism")]
        n: Option<usize>,
        /// Highlight a loop, `name=disp@src,...` (repeatable).
        #[arg(long = "loop")]
        loops: Vec<String>,
        #[arg(long, conflicts_with_all = ["n", "loops"])]
        morphism: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
pub enum ModelCmd {
    /// The model X_n.
    New {
        #[arg(long)]
        n: usize,
    },
    /// Models from the orbits of a permutation of 0..k.
    FromPerm {
        /// Images of 0, 1, ..., comma-separated.
        #[arg(long, value_delimiter = ',')]
        perm: Vec<usize>,
        /// Reject permutations with more than one orbit.
        #[arg(long)]
        transitive: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum QCmd {
    /// z > 0 with x = n·z and y = m·z.
    CommonGen {
        #[arg(long, default_value = "")]
        heights: String,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// A cocone into Q for a diagram of embeddings Z -> Z.
    Colimit {
        /// `chain:2,3` or `{"objects": k, "arrows": [...]}`.
        #[arg(long)]
        diagram: String,
    },
    /// Membership test.
    Contains {
        #[arg(long, default_value = "")]
        heights: String,
        #[arg(long, allow_hyphen_values = true)]
        q: String,
    },
    /// Least N with x <= N·y.
    Archimedean {
        #[arg(long, default_value = "")]
        heights: String,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Epicyclic,
    Cyclic,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Dot,
}

/// Exit codes.
pub const OK: u8 = 0;
pub const COUNTEREXAMPLE: u8 = 1;
pub const USAGE: u8 = 2;
pub const UNKNOWN: u8 = 3;

/// What a command produced: text for people, JSON for machines.
pub struct Report {
    pub text: String,
    pub json: serde_json::Value,
    pub code: u8,
}

impl Report {
    pub fn ok(text: impl Into<String>, json: serde_json::Value) -> Self {
        Report {
            text: text.into(),
            json,
            code: OK,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(report) => {
            if cli.global.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report.json).expect("serializable")
                );
            } else if !report.text.is_empty() {
                print!("{}", report.text);
                if !report.text.ends_with('\n') {
                    println!();
                }
            }
            ExitCode::from(report.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(USAGE)
        }
    }
}
