use clap::Parser;
use rpdhg_cli::args::{describe, Cli, Command};
use rpdhg_cli::compare::compare;
use rpdhg_cli::{run, CliError};

fn main() {
    let cli = Cli::parse();
    let result: Result<(), CliError> = match cli.command {
        Command::Run(args) => args.to_spec().and_then(|spec| {
            let outcome = run(&spec)?;
            println!("experiment {}", outcome.experiment_hash);
            for r in &outcome.runs {
                println!(
                    "{:<8} {:>6} iterations  best objective {:.12e}  -> {}",
                    r.kind.name(),
                    r.summary.iterations,
                    r.summary.best_objective,
                    r.dir.display()
                );
            }
            Ok(())
        }),
        Command::Compare(args) => compare(&args.traces, args.rel, args.reference).map(|c| print!("{}", c.render())),
        Command::Describe(args) => describe(args.experiment.as_deref()).map(|doc| println!("{doc}")),
    };
    if let Err(e) = result {
        eprintln!("rpdhg: {e}");
        std::process::exit(e.exit_code() as i32);
    }
}
