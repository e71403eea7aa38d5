use std::path::PathBuf;
use std::process::ExitCode;

use afr::commands::{self, CflSearch, DEFAULT_SAMPLES};
use afr::config::{parse_grid, parse_list, FileConfig, RunOptions};
use afr::output::Line;
use afr_core::Scheme;
use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

/// Adaptive flux reconstruction solver for the compressible Euler equations.
#[derive(Parser, Debug)]
#[command(name = "afr", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one case and write line.csv, solution.vtk and run.ndjson.
    Run {
        #[command(flatten)]
        common: Common,
        /// Extraction line `x0,y0,x1,y1` (defaults to a case-specific line).
        #[arg(long)]
        line: Option<String>,
        /// Number of samples along the extraction line.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Grid convergence study against the exact solution; writes convergence.csv.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Comma-separated grids, e.g. `8,16,32` or `8x8,16x16`.
        #[arg(long)]
        grids: Option<String>,
    },
    /// Largest stable CFL by bisection; writes max_cfl.csv.
    MaxCfl {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Maximum CFL for each scheme and degree; writes sweep.csv.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        search: SearchArgs,
        /// Comma-separated schemes (default `dg,afr,fr`).
        #[arg(long)]
        schemes: Option<String>,
        /// Comma-separated degrees (default `1,2,3,4,5`).
        #[arg(long)]
        degrees: Option<String>,
        /// Solution nodes per direction, kept fixed across degrees.
        #[arg(long)]
        dofs: Option<usize>,
    },
    /// Write the reference operators (nodes, mass, filter, lifting, skew) as CSV.
    DumpOperators {
        /// Polynomial degree.
        #[arg(long)]
        p: Option<usize>,
        /// Spatial dimension (1 or 2).
        #[arg(long)]
        dim: Option<usize>,
        /// FR parameter (defaults to c_+ of the degree).
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    run: RunOptions,
}

#[derive(Args, Debug)]
struct SearchArgs {
    /// Lower end of the CFL bracket (must pass unless 0).
    #[arg(long)]
    lo: Option<f64>,
    /// Upper end of the CFL bracket (must fail).
    #[arg(long)]
    hi: Option<f64>,
    /// Bisection stops when the bracket is narrower than this.
    #[arg(long)]
    tol: Option<f64>,
}

impl SearchArgs {
    fn resolve(&self, file: &FileConfig) -> CflSearch {
        let d = CflSearch::default();
        CflSearch {
            lo: self.lo.or(file.lo).unwrap_or(d.lo),
            hi: self.hi.or(file.hi).unwrap_or(d.hi),
            tol: self.tol.or(file.tol).unwrap_or(d.tol),
        }
    }
}

fn load(path: &Option<PathBuf>) -> Result<FileConfig> {
    match path {
        Some(p) => FileConfig::load(p),
        None => Ok(FileConfig::default()),
    }
}

impl Common {
    fn resolve(&self) -> Result<(RunOptions, FileConfig)> {
        let file = load(&self.config)?;
        Ok((self.run.merged_over(&file.run()), file))
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { common, line, samples } => {
            let (opts, file) = common.resolve()?;
            let line = line.or(file.line).map(|s| Line::parse(&s)).transpose()?;
            let samples = samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES);
            let report = commands::run(&opts, line, samples)?;
            println!("reached t = {:.6e} in {} steps", report.time, report.steps);
            for f in report.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Converge { common, grids } => {
            let (opts, file) = common.resolve()?;
            let case = opts.case()?;
            let grids = grids.or(file.grids).unwrap_or_else(|| "8,16,32,64".to_string());
            let grids = grids.split(',').map(|g| parse_grid(g.trim(), case.dim())).collect::<Result<Vec<_>>>()?;
            let rows = commands::converge(&opts, &grids)?;
            println!("{:>9} {:>9} {:>13} {:>13} {:>13} {:>7}", "grid", "dofs", "L1", "L2", "Linf", "O(L2)");
            for r in rows {
                let order = r.order_l2.map(|o| format!("{o:.2}")).unwrap_or_default();
                let grid = format!("{}x{}", r.cells[0], r.cells[1]);
                println!(
                    "{grid:>9} {:>9} {:>13.5e} {:>13.5e} {:>13.5e} {order:>7}",
                    r.dofs, r.errors.l1, r.errors.l2, r.errors.linf
                );
            }
        }
        Command::MaxCfl { common, search } => {
            let (opts, file) = common.resolve()?;
            let row = commands::max_cfl(&opts, search.resolve(&file))?;
            println!("max CFL ({} p={} {}x{}): {:.4}", row.scheme, row.p, row.nx, row.ny, row.max_cfl);
        }
        Command::Sweep { common, search, schemes, degrees, dofs } => {
            let (opts, file) = common.resolve()?;
            let schemes: Vec<Scheme> = parse_list(&schemes.or(file.schemes.clone()).unwrap_or_else(|| "dg,afr,fr".into()))?;
            let degrees: Vec<usize> = parse_list(&degrees.or(file.degrees.clone()).unwrap_or_else(|| "1,2,3,4,5".into()))?;
            let rows = commands::sweep(&opts, &schemes, &degrees, dofs.or(file.dofs), search.resolve(&file))?;
            for r in rows {
                println!("{:>4} p={} {}x{}: {:.4}", r.scheme, r.p, r.nx, r.ny, r.max_cfl);
            }
        }
        Command::DumpOperators { p, dim, c, out, config } => {
            let file = load(&config)?;
            let p = p.or(file.p).unwrap_or(3);
            let dim = dim.or(file.dim).unwrap_or(1);
            if !(1..=2).contains(&dim) {
                bail!("--dim must be 1 or 2");
            }
            let out = out.or(file.out).unwrap_or_else(|| PathBuf::from("afr-operators"));
            for name in commands::dump_operators(p, dim, c.or(file.c), &out)? {
                println!("wrote {}", out.join(name).display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
