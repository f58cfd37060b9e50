use clap::Parser;
use modelcheck_cli::config::{resolve, Command, Overrides, ProfileKind};
use modelcheck_cli::{output, run};
use std::path::PathBuf;
use std::process::ExitCode;

/// Numerical checks of sharp inequalities on rotationally symmetric model
/// manifolds.
///
/// Settings are resolved as flags, then the `--config` file, then built-in
/// defaults. Exit status is 0 when every asserted check holds, 1 when one
/// is violated and 2 on configuration or numerical errors.
#[derive(Debug, Parser)]
#[command(name = "modelcheck", version)]
struct Cli {
    /// Pipeline to run; may come from the config file instead.
    #[arg(value_enum)]
    command: Option<Command>,
    /// TOML run config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the resolved config as TOML and exit.
    #[arg(long)]
    print_config: bool,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_enum)]
    profile: Option<ProfileKind>,
    /// Curvature exponent of the power-law profile.
    #[arg(long)]
    alpha: Option<f64>,
    /// Curvature scale.
    #[arg(long = "A")]
    a: Option<f64>,
    /// Iterated-log depth.
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    t_onset: Option<f64>,
    #[arg(long = "tmax")]
    t_max: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    /// Comma-separated exponents.
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    /// Comma-separated log-weight exponents.
    #[arg(long, value_delimiter = ',')]
    beta: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    epsilon: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    a2: Option<Vec<f64>>,
    /// Corpus seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Corpus size.
    #[arg(long)]
    count: Option<usize>,
    /// Comma-separated radius sweep.
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write SVG charts.
    #[arg(long)]
    plot: bool,
}

impl Cli {
    fn overrides(self) -> (Option<PathBuf>, bool, Overrides) {
        let o = Overrides {
            command: self.command,
            n: self.n,
            profile: self.profile,
            alpha: self.alpha,
            a: self.a,
            k: self.k,
            t_onset: self.t_onset,
            t_max: self.t_max,
            tol: self.tol,
            p: self.p,
            beta: self.beta,
            epsilon: self.epsilon,
            a2: self.a2,
            seed: self.seed,
            count: self.count,
            radii: self.radii,
            gamma: self.gamma,
            out: self.out,
            plot: self.plot,
        };
        (self.config, self.print_config, o)
    }
}

fn main() -> ExitCode {
    let (file, print, overrides) = Cli::parse().overrides();
    let cfg = match resolve(file.as_deref(), overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}\n\nRun `modelcheck --help` for usage.");
            return ExitCode::from(2);
        }
    };
    if print {
        match cfg.to_toml() {
            Ok(t) => {
                print!("{t}");
                return ExitCode::SUCCESS;
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
        }
    }
    let bundle = match run(&cfg) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = output::write_bundle(&bundle, &cfg.output.dir) {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    for s in &bundle.sections {
        println!("{:<28} {:?}", s.name, s.verdict);
    }
    if bundle.passed() {
        ExitCode::SUCCESS
    } else {
        for f in bundle.failures() {
            eprintln!("violated: {f}");
        }
        ExitCode::from(1)
    }
}
