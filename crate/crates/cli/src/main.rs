use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};

use edgeprice::anchors::run_anchors;
use edgeprice::harness::{
    compare_optimizers, compare_optimizers_randomized, csv_string, emit_csv, run_sweep, surface_grid,
    ComparisonReport, SweepParam, SweepRow, SweepSpec,
};
use edgeprice::optimizers::run_algorithm;
use edgeprice::plot::{emit_plot, Heatmap, PlotData, PlotLabels, Series};
use edgeprice::pricing::{dynamic_user_utility, max_user_utility};
use edgeprice::scenario::{load_scenario_with_defaults, validate};
use edgeprice::{Algorithm, Allocation, Scenario, SwarmConfig};

#[derive(Parser, Debug)]
#[command(name = "edgeprice", version, about = "Dynamic-pricing edge offloading: sweeps, allocation search and checks")]
struct Cli {
    /// Scenario file of `key = value` lines; unspecified keys keep their defaults.
    #[arg(long, global = true, env = "EDGEPRICE_SCENARIO")]
    scenario: Option<PathBuf>,

    /// Override a scenario or optimizer key, e.g. `--set q_kb=300 --set p_n=20`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Base seed for every stochastic step.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the dynamic-pricing model along one parameter.
    Sweep {
        /// f_server (Hz), b (bit/s), q (bits) or f_local (Hz).
        #[arg(long)]
        param: SweepParam,
        /// Comma-separated, strictly increasing values in canonical units.
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        grid: Vec<f64>,
        /// Fixed server frequency in Hz (default: top of the search box).
        #[arg(long)]
        f_server: Option<f64>,
        /// Fixed bandwidth in bit/s (default: top of the search box).
        #[arg(long)]
        b: Option<f64>,
        /// CSV destination; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Line plot destination.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Evaluate the dynamic-pricing model over the whole search box.
    Surface {
        /// Grid points per axis.
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Heatmap of the user utility.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run one seeded allocation search.
    Optimize {
        #[arg(long, default_value = "disc-pso")]
        algo: Algorithm,
    },
    /// Run every algorithm over paired-seed trials.
    Compare {
        #[arg(long, default_value_t = 50)]
        trials: usize,
        /// Draw task size and local CPU frequency per trial instead of using the fixed scenario.
        #[arg(long)]
        randomized: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Scatter plot of the best positions found.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Check the model against the built-in reference values.
    Validate,
}

/// Errors that map to exit code 2.
#[derive(Debug)]
struct ConfigError(anyhow::Error);

fn config<T>(r: Result<T>) -> std::result::Result<T, ConfigError> {
    r.map_err(ConfigError)
}

fn load_inputs(cli: &Cli) -> Result<(Scenario, SwarmConfig)> {
    let mut s = match &cli.scenario {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            load_scenario_with_defaults(&text).with_context(|| format!("loading {}", path.display()))?
        }
        None => Scenario::default(),
    };
    let mut cfg = SwarmConfig::default();
    for o in &cli.overrides {
        let (key, value) = o
            .split_once('=')
            .ok_or_else(|| anyhow!("override `{o}` is not of the form KEY=VALUE"))?;
        let key = key.trim();
        if SwarmConfig::KEYS.contains(&key) {
            cfg.set(key, value)?;
        } else {
            s.set(key, value)?;
        }
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let report = validate(&s);
    if !report.is_empty() {
        bail!("invalid scenario: {report}");
    }
    cfg.validate()?;
    Ok((s, cfg))
}

fn write_or_print(csv: String, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, csv).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn sweep_plot(rows: &[SweepRow], param: SweepParam, path: &Path) -> Result<()> {
    let series = |name: &str, f: fn(&SweepRow) -> f64| Series::new(name, rows.iter().map(|r| (r.value, f(r))).collect());
    let data = PlotData::Line(vec![
        series("u_user", |r| r.u_user),
        series("u_server", |r| r.u_server),
        series("price", |r| r.price),
    ]);
    emit_plot(&data, &PlotLabels::new(&format!("sweep over {param}"), param.name(), "value"), path)?;
    Ok(())
}

fn print_comparison(report: &ComparisonReport) {
    eprintln!("u_max = {:.9}", report.u_max);
    eprintln!("{:<9} {:>10} {:>14} {:>12} {:>10}", "algorithm", "mean_iter", "mean_u_user", "std_u_user", "converged");
    for t in &report.stats {
        eprintln!(
            "{:<9} {:>10.2} {:>14.6} {:>12.6} {:>7}/{}",
            t.algorithm.name(),
            t.mean_iterations,
            t.mean_value,
            t.std_value,
            t.converged_list.iter().filter(|&&c| c).count(),
            t.n_trials()
        );
    }
}

fn run(cli: &Cli) -> std::result::Result<ExitCode, ConfigError> {
    let (s, cfg) = config(load_inputs(cli))?;
    let outcome: Result<ExitCode> = (|| match &cli.command {
        Command::Sweep {
            param,
            grid,
            f_server,
            b,
            out,
            svg,
        } => {
            let corner = Allocation::box_max(&s);
            let a = Allocation::new(f_server.unwrap_or(corner.f_server), b.unwrap_or(corner.b));
            let rows = run_sweep(&SweepSpec::new(*param, grid.clone(), s, a))?;
            write_or_print(csv_string(&rows), out.as_deref())?;
            if let Some(path) = svg {
                sweep_plot(&rows, *param, path)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Surface { steps, out, svg } => {
            let g = surface_grid(&s, *steps, *steps)?;
            write_or_print(csv_string(&g.rows()), out.as_deref())?;
            let (i, j) = g.argmax_u_user();
            eprintln!(
                "argmax u_user = {:.9} at f_server_hz={:e} b_bps={:e}",
                g.cells[i][j].u_user, g.f_values[i], g.b_values[j]
            );
            if let Some(path) = svg {
                let data = PlotData::Heatmap(Heatmap {
                    xs: g.f_values.clone(),
                    ys: g.b_values.clone(),
                    values: g.column(|c| c.u_user),
                });
                emit_plot(&data, &PlotLabels::new("user utility", "f_server (Hz)", "b (bit/s)"), path)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Optimize { algo } => {
            let (_, u_max) = max_user_utility(&s);
            let objective = |a: Allocation| dynamic_user_utility(&s, a);
            let r = run_algorithm(*algo, &s, &objective, u_max, &cfg)?;
            println!(
                "algorithm={} seed={} best_value={:.9} f_server_hz={:.9e} b_bps={:.9e} iterations={} converged={} evaluations={} u_max={:.9}",
                algo.name(),
                r.seed,
                r.best_value,
                r.best_position.f_server,
                r.best_position.b,
                r.iterations_used,
                r.converged,
                r.evaluations,
                u_max
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare {
            trials,
            randomized,
            out,
            svg,
        } => {
            let report = if *randomized {
                compare_optimizers_randomized(&s, &cfg, *trials)?
            } else {
                compare_optimizers(&s, &cfg, *trials)?
            };
            match out {
                Some(path) => emit_csv(&report.records, path)?,
                None => print!("{}", csv_string(&report.records)),
            }
            print_comparison(&report);
            if let Some(path) = svg {
                let series = report
                    .stats
                    .iter()
                    .map(|t| {
                        Series::new(
                            t.algorithm.name(),
                            t.position_list.iter().map(|p| (p.f_server, p.b)).collect(),
                        )
                    })
                    .collect();
                emit_plot(
                    &PlotData::Scatter(series),
                    &PlotLabels::new("best positions", "f_server (Hz)", "b (bit/s)"),
                    path,
                )?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate => {
            let results = run_anchors(&s, &cfg);
            for r in &results {
                println!("{r}");
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            println!("{} anchors, {failed} failed", results.len());
            Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    })();
    // Input errors surfacing inside a command (bad grid, unwritable path) are
    // configuration errors too.
    config(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(ConfigError(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
