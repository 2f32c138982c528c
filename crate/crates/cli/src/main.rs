use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use skewgroupoid::fuzz::{fuzz, FuzzOptions};
use skewgroupoid::groupoid::{connected_components, isotropy_group};
use skewgroupoid::instance::parse_instance;
use skewgroupoid::pipeline::{run_pipeline, PipelineOptions};
use skewgroupoid::report::Report;

#[derive(Parser)]
#[command(name = "skewgroupoid", version, about = "Checks partial actions of finite groupoids and their skew rings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct FileArgs {
    /// Instance file (JSON)
    file: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the groupoid, the algebra and the partial action
    Validate(FileArgs),
    /// List connected components
    Components(FileArgs),
    /// Group-type search and the factorization isomorphism
    Factorize(FileArgs),
    /// Extension checks; with no flags, all of them
    Check {
        #[command(flatten)]
        file: FileArgs,
        #[arg(long)]
        separable: bool,
        #[arg(long)]
        frobenius: bool,
        #[arg(long)]
        artinian: bool,
        #[arg(long)]
        all: bool,
    },
    /// Random instances through the invariant suites
    Fuzz {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 3)]
        max_objects: usize,
        #[arg(long, default_value_t = 12)]
        max_dim: usize,
        #[arg(long, default_value_t = 4)]
        max_isotropy: usize,
        /// Directory for counterexample instances
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Full pipeline report
    Report(FileArgs),
}

fn emit(report: &Report, format: Format) -> ExitCode {
    match format {
        Format::Text => print!("{}", report.to_text()),
        Format::Json => println!("{}", report.to_json()),
    }
    ExitCode::from(report.exit_code() as u8)
}

fn run_file(args: &FileArgs, opts: PipelineOptions, extra: impl FnOnce(&skewgroupoid::instance::InstanceFile)) -> ExitCode {
    let file = match parse_instance(&args.file) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    extra(&file);
    emit(&run_pipeline(&file, &opts), args.format)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate(args) => run_file(&args, PipelineOptions::validate_only(), |_| {}),
        Command::Components(args) => {
            let text = matches!(args.format, Format::Text);
            run_file(&args, PipelineOptions::validate_only(), |f| {
                let Ok(g) = f.build_groupoid() else { return };
                if !text {
                    return;
                }
                for c in connected_components(&g) {
                    let objs: Vec<&str> = c.object_map.iter().map(|&o| g.object_name(o)).collect();
                    let iso = isotropy_group(&c.groupoid, 0).map(|s| s.morphism_map.len()).unwrap_or(0);
                    println!("component {{{}}}: {} morphisms, isotropy order {}", objs.join(","), c.morphism_map.len(), iso);
                }
            })
        }
        Command::Factorize(args) => run_file(&args, PipelineOptions::factorization(), |_| {}),
        Command::Check {
            file,
            separable,
            frobenius,
            artinian,
            all,
        } => {
            let none = !(separable || frobenius || artinian);
            let every = all || none;
            let opts = PipelineOptions {
                factorize: false,
                separable: every || separable,
                frobenius: every || frobenius,
                artinian: every || artinian,
                ..PipelineOptions::all()
            };
            run_file(&file, opts, |_| {})
        }
        Command::Report(args) => run_file(&args, PipelineOptions::all(), |_| {}),
        Command::Fuzz {
            seed,
            count,
            max_objects,
            max_dim,
            max_isotropy,
            out,
            format,
        } => {
            let outcome = fuzz(&FuzzOptions {
                seed,
                count,
                max_objects,
                max_dim,
                max_isotropy,
                out_dir: out,
            });
            let s = &outcome.summary;
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(s).expect("summary serializes")),
                Format::Text => {
                    println!(
                        "seed {}: {} instances ({} global, {} partial), {} group type, {} separable, max dim {}",
                        s.seed, s.instances, s.global, s.partial, s.group_type, s.separable, s.max_dim
                    );
                    for v in &s.violations {
                        println!("violation ({}) in instance {}: {}", v.check, v.instance, v.witness);
                    }
                    println!("{} violations in {} ms", s.violations.len(), outcome.elapsed_ms);
                }
            }
            if s.violations.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
