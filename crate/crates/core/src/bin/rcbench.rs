//! Benchmark CLI for the two-scale rough-contact solver.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rough_contact::bench::{
    run_alpha_table, run_benchmark, run_offline_fit, write_run_outputs, BenchmarkConfig,
};
use rough_contact::bench::csv;
use rough_contact::coupling::Strategy;
use rough_contact::surface::write_surface_xyz;

#[derive(Parser)]
#[command(name = "rcbench", about = "Two-scale rough-contact benchmark driver", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by commands that build the micro surface. Command-line
/// values override the configuration file.
#[derive(Args)]
struct SurfaceArgs {
    /// Configuration file (TOML); defaults are used when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Surface refinement level override.
    #[arg(long)]
    surface_n: Option<u32>,
    /// Surface seed override.
    #[arg(long)]
    seed: Option<u64>,
}

impl SurfaceArgs {
    fn load(&self) -> Result<BenchmarkConfig, rough_contact::Error> {
        let mut cfg = match &self.config {
            Some(path) => BenchmarkConfig::from_path(path)?,
            None => BenchmarkConfig::default(),
        };
        if let Some(n) = self.surface_n {
            cfg.micro.n = n;
        }
        if let Some(seed) = self.seed {
            cfg.micro.seed = seed;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the displacement-controlled benchmark and write its curves.
    Run {
        #[command(flatten)]
        surface: SurfaceArgs,
        /// Coupling strategy override.
        #[arg(long, value_enum)]
        strategy: Option<Strategy>,
        /// Number of load steps override.
        #[arg(long)]
        steps: Option<usize>,
        /// Newton tolerance override (N).
        #[arg(long)]
        tol_newton: Option<f64>,
        /// Elastic-correction tolerance override (relative).
        #[arg(long)]
        tol_corr: Option<f64>,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write per-step micro pressure maps.
        #[arg(long)]
        dump_maps: bool,
    },
    /// Tabulate the flat-punch factor over refinement levels.
    Alpha {
        /// Largest refinement level.
        #[arg(long, default_value_t = 6)]
        max_n: u32,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Sample the corrected micro curve offline and fit the power law.
    OfflineFit {
        #[command(flatten)]
        surface: SurfaceArgs,
        /// Number of sweep steps override.
        #[arg(long)]
        steps: Option<usize>,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print statistics of the generated surface.
    SurfaceStats {
        #[command(flatten)]
        surface: SurfaceArgs,
        /// Also write the heights as an XYZ file.
        #[arg(long)]
        xyz: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rcbench: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), rough_contact::Error> {
    match cli.command {
        Command::Run {
            surface,
            strategy,
            steps,
            tol_newton,
            tol_corr,
            out,
            dump_maps,
        } => {
            let mut cfg = surface.load()?;
            if let Some(s) = strategy {
                cfg.solver.strategy = s;
            }
            if let Some(k) = steps {
                cfg.loading.steps = k;
            }
            if let Some(t) = tol_newton {
                cfg.solver.tol_newton = t;
            }
            if let Some(t) = tol_corr {
                cfg.solver.tol_correction = t;
            }

            let run = run_benchmark(&cfg)?;
            write_run_outputs(&out, &run, dump_maps)?;

            let total: f64 = run.history.steps.iter().map(|s| s.wall_seconds).sum();
            println!(
                "strategy {} seed {} n {}: {} steps, rms {:.4} um, alpha {:.4}",
                cfg.solver.strategy, cfg.micro.seed, cfg.micro.n, run.history.steps.len(),
                run.stats.rms, run.alpha
            );
            if let Some(offline) = &run.offline {
                println!(
                    "offline fit: a {:.6e}, b {:.4}, r2 {:.6} ({} samples, {:.2} s)",
                    offline.fit.a,
                    offline.fit.b,
                    offline.fit.r2,
                    offline.raw.len(),
                    offline.wall_seconds
                );
            }
            for (k, rec) in run.history.steps.iter().enumerate() {
                println!(
                    "step {:3}: delta {:9.4} um, P {:12.6e} N, g_n {:8.4} um, {} iterations, {:7.3} s",
                    rec.step,
                    rec.delta,
                    rec.reaction,
                    run.mean_gap(k),
                    rec.iterations(),
                    rec.wall_seconds
                );
            }
            println!("total stepping time {total:.2} s; outputs in {}", out.display());
            Ok(())
        }
        Command::Alpha { max_n, out } => {
            let rows = run_alpha_table(max_n)?;
            std::fs::create_dir_all(&out)?;
            csv::write_alpha(&out.join("alpha.csv"), &rows)?;
            for (n, alpha) in rows {
                println!("n {n}: alpha {alpha:.6}");
            }
            Ok(())
        }
        Command::OfflineFit { surface, steps, out } => {
            let cfg = surface.load()?;
            let n_steps = steps.unwrap_or(cfg.solver.offline_steps);
            let (cfg, stats, curve) = run_offline_fit(&cfg, n_steps)?;
            std::fs::create_dir_all(&out)?;
            csv::write_offline(&out.join("offline.csv"), &curve)?;
            csv::write_fit(&out.join("fit.csv"), &curve.fit)?;
            println!(
                "seed {} n {}: a {:.6e}, b {:.6}, r2 {:.8}, monotone {}, {:.2} s",
                cfg.micro.seed,
                cfg.micro.n,
                curve.fit.a,
                curve.fit.b,
                curve.fit.r2,
                curve.corrected.monotone,
                curve.wall_seconds
            );
            println!("rms {:.6} um over {} samples", stats.rms, curve.raw.len());
            Ok(())
        }
        Command::SurfaceStats { surface, xyz } => {
            let cfg = surface.load()?;
            let (surf, _, alpha, stats) = rough_contact::bench::prepare_surface(&cfg)?;
            println!(
                "n {} seed {}: grid {}x{}, rms {:.6} um, mean {:.6} um, max {:.6} um, alpha {:.6}",
                cfg.micro.n,
                cfg.micro.seed,
                surf.grid(),
                surf.grid(),
                stats.rms,
                stats.mean,
                stats.max,
                alpha
            );
            if let Some(path) = xyz {
                write_surface_xyz(&surf, &path)?;
                println!("heights written to {}", path.display());
            }
            Ok(())
        }
    }
}
