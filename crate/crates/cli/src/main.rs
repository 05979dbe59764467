use std::fs;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use chainplan_core::evaluation::{evaluate_postures, EvaluateOptions};
use chainplan_core::io::{
    parse_population, parse_scenario, parse_script, read_trajectory, write_report, write_sweep_table, write_trajectory,
};
use chainplan_core::planner::{Objective, Planner};
use chainplan_core::render::{render_postures_svg, SvgStyle};
use chainplan_core::{plan_soo, population_sweep, Outcome, Scenario, ScriptedSource, Weights};
use chainplan_server::{serve, Hub, HubConfig};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "chainplan",
    version,
    about = "Greedy chain planning with human-assisted escapes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a scenario and write the trajectory table.
    Plan {
        scenario: PathBuf,
        /// Override the scenario's joint step (radians).
        #[arg(long)]
        dq: Option<f64>,
        #[arg(long, value_enum, default_value_t = Mode::Soo)]
        mode: Mode,
        /// Distance, posture and visibility weights for `--mode moo`.
        #[arg(long, value_name = "D,P,V")]
        weights: Option<WeightsArg>,
        /// `fail` stops at the first local minimum; `script:<path>` answers
        /// minima from an intervention file.
        #[arg(long, value_name = "POLICY", default_value = "fail")]
        on_stuck: OnStuck,
        /// Trajectory table destination; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Evaluate a planned trajectory and print the report.
    Evaluate {
        scenario: PathBuf,
        trajectory: PathBuf,
        /// Accessibility sampling seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Accessibility sample count.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Plan and evaluate once per mannequin of a population file.
    Sweep { scenario: PathBuf, population: PathBuf },
    /// Draw a scenario with a trajectory as SVG.
    Render {
        scenario: PathBuf,
        /// Saved trajectory table; the scenario is planned when omitted.
        #[arg(long)]
        trajectory: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the session server.
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        addr: IpAddr,
        /// Port of the length-delimited transport.
        #[arg(long, default_value_t = 7878)]
        port: u16,
        /// Port of the web-socket transport; defaults to `port + 1`.
        #[arg(long)]
        ws_port: Option<u16>,
        /// Seconds a stuck session waits for an intervention before aborting.
        #[arg(long, default_value_t = 600)]
        park_timeout: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Soo,
    Moo,
}

#[derive(Clone, Copy)]
struct WeightsArg(Weights);

impl FromStr for WeightsArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
            .collect::<Result<_, _>>()?;
        match parts[..] {
            [distance, posture, visibility] => Ok(WeightsArg(Weights {
                distance,
                posture,
                visibility,
            })),
            _ => Err("expected three comma-separated weights".into()),
        }
    }
}

#[derive(Clone)]
enum OnStuck {
    Fail,
    Script(PathBuf),
}

impl FromStr for OnStuck {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fail" => Ok(OnStuck::Fail),
            _ => match s.strip_prefix("script:") {
                Some(p) if !p.is_empty() => Ok(OnStuck::Script(p.into())),
                _ => Err("expected `fail` or `script:<path>`".into()),
            },
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_scenario(path: &Path) -> Result<Scenario> {
    parse_scenario(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn exit_code(outcome: Option<Outcome>) -> ExitCode {
    match outcome {
        Some(Outcome::Success) => ExitCode::SUCCESS,
        Some(Outcome::BudgetExhausted) => ExitCode::from(3),
        Some(Outcome::Stuck | Outcome::Aborted) | None => ExitCode::from(2),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Plan {
            scenario,
            dq,
            mode,
            weights,
            on_stuck,
            out,
            svg,
        } => {
            let mut s = load_scenario(&scenario)?;
            if let Some(dq) = dq {
                s.dq = dq;
            }
            let objective = match (mode, weights) {
                (Mode::Soo, None) => Objective::Distance,
                (Mode::Soo, Some(_)) => bail!("--weights needs --mode moo"),
                (Mode::Moo, w) => Objective::Weighted(w.map_or(
                    Weights {
                        distance: 1.0,
                        posture: 1.0,
                        visibility: 1.0,
                    },
                    |w| w.0,
                )),
            };
            let planner = Planner::new(&s).objective(objective);
            let (traj, _) = match on_stuck {
                OnStuck::Fail => planner.run_collect(None)?,
                OnStuck::Script(path) => {
                    let script = parse_script(&read(&path)?).with_context(|| format!("{}", path.display()))?;
                    planner.run_collect(Some(&mut ScriptedSource::new(script)))?
                }
            };
            emit(out.as_deref(), &write_trajectory(&traj))?;
            if let Some(p) = svg {
                let postures: Vec<_> = traj.postures().cloned().collect();
                let doc = render_postures_svg(&s, &postures, &SvgStyle::default())?;
                fs::write(&p, doc).with_context(|| format!("cannot write {}", p.display()))?;
            }
            let outcome = traj.outcome();
            eprintln!(
                "{}: {} after {} steps, distance {}",
                s.name,
                outcome.map_or("unfinished", Outcome::as_str),
                traj.len() - 1,
                traj.last().distance
            );
            Ok(exit_code(outcome))
        }
        Command::Evaluate {
            scenario,
            trajectory,
            seed,
            samples,
        } => {
            let s = load_scenario(&scenario)?;
            let table = read_trajectory(&read(&trajectory)?).with_context(|| format!("{}", trajectory.display()))?;
            if table.dof() != s.chain.dof() {
                bail!(
                    "trajectory has {} joints but the scenario chain has {}",
                    table.dof(),
                    s.chain.dof()
                );
            }
            let opts = EvaluateOptions {
                seed,
                samples,
                ..EvaluateOptions::default()
            };
            let report = evaluate_postures(&s, &table.postures(), table.outcome, opts)?;
            emit(None, &write_report(&report))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { scenario, population } => {
            let s = load_scenario(&scenario)?;
            let pop = parse_population(&read(&population)?).with_context(|| format!("{}", population.display()))?;
            if pop.is_empty() {
                bail!("{}: population is empty", population.display());
            }
            emit(None, &write_sweep_table(&population_sweep(&s, &pop)?))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Render {
            scenario,
            trajectory,
            out,
        } => {
            let s = load_scenario(&scenario)?;
            let postures = match trajectory {
                Some(p) => read_trajectory(&read(&p)?)
                    .with_context(|| format!("{}", p.display()))?
                    .postures(),
                None => plan_soo(&s)?.0.postures().cloned().collect(),
            };
            emit(
                out.as_deref(),
                &render_postures_svg(&s, &postures, &SvgStyle::default())?,
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Serve {
            addr,
            port,
            ws_port,
            park_timeout,
        } => {
            let ws_port = match ws_port {
                Some(p) => p,
                None => port
                    .checked_add(1)
                    .context("--port leaves no room for the web-socket port")?,
            };
            let hub = Hub::new(HubConfig {
                park_timeout: Duration::from_secs(park_timeout),
                ..HubConfig::default()
            });
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(serve(SocketAddr::new(addr, port), SocketAddr::new(addr, ws_port), hub))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();

    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
