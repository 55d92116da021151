use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sparse_ias::experiments::ExperimentName;
use sparse_ias_cli::{init_threads, run, CliError, Emit, Overrides, RunConfig};

/// Sparse recovery with hybrid IAS in composite-frame dictionaries.
#[derive(Parser)]
#[command(name = "sparse-ias", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// 1-D deconvolution in the [increments, cosine] frame.
    Deconv1d(Flags),
    /// Denoising of a blocky image in the vertical/horizontal increment frames.
    Denoise2d(Flags),
    /// Deblurring of a stars/moon/cloud scene in [identity, increments, cosine].
    Restore2d(Flags),
    /// Denoising and compression of a mixed texture image.
    Natural2d(Flags),
    /// Sparse-coding classification of digit images against labelled atoms.
    Dictlearn(Flags),
    /// Runs the experiment described by a `key = value` config file.
    Solve {
        config: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Args, Default)]
struct Flags {
    /// Grid size (1-D), image side (2-D) or atom count (dictlearn).
    #[arg(long)]
    n: Option<usize>,
    /// Observation count (deconv1d) or test digit count (dictlearn).
    #[arg(long)]
    m: Option<usize>,
    /// Data-generation grid size (deconv1d; default 1253).
    #[arg(long)]
    n_dense: Option<usize>,
    /// Gaussian blur width (deconv1d 0.02, restore2d 0.006).
    #[arg(long)]
    w: Option<f64>,
    /// Noise std as a fraction of the clean maximum (0.02, 0.1, 0.01, 0.05); sigma itself for dictlearn (0.01).
    #[arg(long)]
    sigma_frac: Option<f64>,
    /// First-phase r (default 1).
    #[arg(long, allow_hyphen_values = true)]
    r1: Option<f64>,
    /// First-phase eta = r beta - 3/2.
    #[arg(long, allow_hyphen_values = true)]
    eta1: Option<f64>,
    /// Second-phase r (1/2; -1 for dictlearn).
    #[arg(long, allow_hyphen_values = true)]
    r2: Option<f64>,
    /// Second-phase eta.
    #[arg(long, allow_hyphen_values = true)]
    eta2: Option<f64>,
    /// Outer iterations before the global switch (default 10; 80 for dictlearn).
    #[arg(long)]
    switch_after: Option<usize>,
    /// Relative theta change that ends phase one (dictlearn default 1e-3).
    #[arg(long)]
    switch_rtol: Option<f64>,
    /// Relative theta change that stops the run (1e-3; 1e-9 for deconv1d).
    #[arg(long)]
    theta_rtol: Option<f64>,
    /// Outer iteration cap (100; 400 for deconv1d; 80 for dictlearn).
    #[arg(long)]
    max_outer: Option<usize>,
    /// Sensitivity constant C in theta_j = C / |AW e_j|^2 (default 1).
    #[arg(long)]
    sensitivity: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Existing output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Artifact kinds, comma separated: csv,pgm,svg.
    #[arg(long)]
    emit: Option<String>,
    /// Solve each alpha subproblem to convergence instead of early stopping.
    #[arg(long)]
    exact_alpha: bool,
    /// Project alpha onto the nonnegative orthant (default on for dictlearn).
    #[arg(long)]
    nonneg: bool,
    /// Per-component switching when theta falls below the convexity threshold.
    #[arg(long)]
    local_hybrid: bool,
    /// Majority-vote threshold (dictlearn, default 0.01).
    #[arg(long)]
    tau: Option<f64>,
    /// PGM image replacing the bundled clean image (2-D experiments).
    #[arg(long)]
    image: Option<PathBuf>,
    /// Labelled atom matrix file (dictlearn).
    #[arg(long)]
    atoms: Option<PathBuf>,
    /// Labelled test digit matrix file (dictlearn).
    #[arg(long)]
    tests: Option<PathBuf>,
    /// Print the resolved config and exit.
    #[arg(long)]
    dump_config: bool,
}

impl Flags {
    fn overrides(&self) -> Result<Overrides, CliError> {
        Ok(Overrides {
            n: self.n,
            m: self.m,
            n_dense: self.n_dense,
            w: self.w.map(Some),
            sigma_frac: self.sigma_frac,
            seed: self.seed,
            r1: self.r1,
            eta1: self.eta1,
            r2: self.r2,
            eta2: self.eta2,
            sensitivity: self.sensitivity,
            local_hybrid: self.local_hybrid.then_some(true),
            switch_after: self.switch_after.map(Some),
            switch_rtol: self.switch_rtol.map(Some),
            theta_rtol: self.theta_rtol,
            max_outer: self.max_outer,
            exact_alpha: self.exact_alpha.then_some(true),
            nonneg: self.nonneg.then_some(true),
            tau: self.tau,
            image: self.image.clone().map(Some),
            atoms: self.atoms.clone().map(Some),
            tests: self.tests.clone().map(Some),
            out: self.out.clone(),
            emit: self.emit.as_deref().map(str::parse::<Emit>).transpose()?,
            ..Overrides::default()
        })
    }
}

fn resolve(command: Command) -> Result<(RunConfig, bool), CliError> {
    let (base, flags) = match command {
        Command::Deconv1d(f) => (RunConfig::defaults(ExperimentName::Deconv1d), f),
        Command::Denoise2d(f) => (RunConfig::defaults(ExperimentName::Denoise2d), f),
        Command::Restore2d(f) => (RunConfig::defaults(ExperimentName::Restore2d), f),
        Command::Natural2d(f) => (RunConfig::defaults(ExperimentName::Natural2d), f),
        Command::Dictlearn(f) => (RunConfig::defaults(ExperimentName::DictLearn), f),
        Command::Solve { config, flags } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| CliError::Io(format!("{}: {e}", config.display())))?;
            (RunConfig::parse(&text)?, flags)
        }
    };
    let mut cfg = base;
    flags.overrides()?.apply(&mut cfg);
    cfg.validate()?;
    Ok((cfg, flags.dump_config))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = init_threads().and_then(|_| resolve(cli.command)).and_then(|(cfg, dump)| {
        if dump {
            print!("{}", cfg.to_canonical());
            Ok(())
        } else {
            run(&cfg).map(|lines| lines.iter().for_each(|l| println!("{l}")))
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sparse-ias: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
