#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use mulepatrol::canonical::{self, format_float};
use mulepatrol::deploy::{
    approximation_report, load_plan, make_plan, save_plan, verify_point_coverage, CountMode,
    DeploymentPlan,
};
use mulepatrol::model::{
    generate_instance, load_instance, save_instance, GenParams, Instance, Strategy,
};
use mulepatrol::sim::{simulate, SimConfig};

use crate::render::{render_svg, RenderStyle};

#[derive(Parser)]
#[command(
    name = "mulepatrol",
    version,
    about = "Plan and check data-mule patrols over road segments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Tight,
    Step5,
}

impl From<Mode> for CountMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Tight => CountMode::Tight,
            Mode::Step5 => CountMode::Step5,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyName {
    Stationary,
    Waypoint,
    Adversarial,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    Gen {
        #[arg(long = "segments")]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Box size as W,H in meters.
        #[arg(long, value_parser = parse_pair, default_value = "100,100")]
        bbox: (f64, f64),
        /// Segment length range as MIN,MAX in meters.
        #[arg(long = "len", value_parser = parse_pair, default_value = "1,10")]
        len: (f64, f64),
        #[arg(long, default_value_t = 1.0)]
        speed: f64,
        #[arg(long, default_value_t = 20.0)]
        period: f64,
        #[arg(long, default_value_t = 0)]
        sensors: usize,
        /// Sensor motion. Waypoint sensors move at up to 2V with pauses up
        /// to t/4; adversarial ones flee at 10V, re-deciding every t/100.
        #[arg(long, value_enum, default_value = "stationary")]
        strategy: StrategyName,
        #[arg(short = 'o')]
        out: PathBuf,
    },
    /// Compute a deployment plan.
    Plan {
        #[arg(short = 'i')]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "tight")]
        mode: Mode,
        #[arg(short = 'o')]
        out: PathBuf,
    },
    /// Check analytically that every road point is visited once per period.
    Verify {
        #[arg(short = 'i')]
        instance: PathBuf,
        #[arg(short = 'p')]
        plan: PathBuf,
        #[arg(long, default_value_t = mulepatrol::deploy::DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(short = 'o')]
        out: PathBuf,
    },
    /// Replay the plan against the instance's sensors.
    Simulate {
        #[arg(short = 'i')]
        instance: PathBuf,
        #[arg(short = 'p')]
        plan: PathBuf,
        #[arg(long, default_value_t = 5.0)]
        horizon_mult: f64,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[arg(long, default_value_t = 1000.0)]
        max_step_div: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short = 'o')]
        out: PathBuf,
    },
    /// Report the lower bound and approximation ratio of a plan.
    Bound {
        #[arg(short = 'p')]
        plan: PathBuf,
    },
    /// Draw an instance and optional plan as SVG.
    Render {
        #[arg(short = 'i')]
        instance: PathBuf,
        #[arg(short = 'p')]
        plan: Option<PathBuf>,
        #[arg(short = 'o')]
        out: PathBuf,
    },
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected two comma-separated numbers, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok((parse(a)?, parse(b)?))
}

fn load_matching(instance: &Path, plan: &Path) -> Result<(Instance, DeploymentPlan)> {
    let inst =
        load_instance(instance).with_context(|| format!("loading {}", instance.display()))?;
    let plan = load_plan(plan).with_context(|| format!("loading {}", plan.display()))?;
    plan.check_instance(&inst)?;
    Ok((inst, plan))
}

/// Runs one subcommand; `Ok(false)` means the checked property failed.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Gen {
            m,
            seed,
            bbox,
            len,
            speed,
            period,
            sensors,
            strategy,
            out,
        } => {
            let strategy = match strategy {
                StrategyName::Stationary => Strategy::Stationary,
                StrategyName::Waypoint => Strategy::Waypoint {
                    seed,
                    v_max: 2.0 * speed,
                    pause_max: period / 4.0,
                },
                StrategyName::Adversarial => Strategy::Adversarial {
                    v_max: 10.0 * speed,
                    decision_interval: period / 100.0,
                },
            };
            let inst = generate_instance(&GenParams {
                seed,
                m,
                width: bbox.0,
                height: bbox.1,
                len_min: len.0,
                len_max: len.1,
                speed,
                period,
                n_sensors: sensors,
                strategy,
            })?;
            save_instance(&inst, &out)?;
            println!(
                "M={} sensors={} seed={seed}",
                inst.m(),
                inst.sensors().len()
            );
            Ok(true)
        }
        Command::Plan {
            instance,
            mode,
            out,
        } => {
            let inst = load_instance(&instance)
                .with_context(|| format!("loading {}", instance.display()))?;
            let plan = make_plan(&inst, mode.into())?;
            save_plan(&plan, &out)?;
            let bound = approximation_report(&plan);
            println!(
                "mode={} M={} J={} N={} LB={} ratio={}",
                plan.count_mode,
                inst.m(),
                plan.round_j,
                plan.mule_count,
                bound.lower_bound,
                format_float(bound.ratio)
            );
            Ok(true)
        }
        Command::Verify {
            instance,
            plan,
            samples,
            out,
        } => {
            let (inst, plan) = load_matching(&instance, &plan)?;
            let report = verify_point_coverage(&plan, &inst, samples);
            canonical::write_file(&report, &out)?;
            println!(
                "points={} max_gap={} period={} violations={} pass={}",
                report.points.len(),
                format_float(report.max_gap),
                format_float(report.period),
                report.violations,
                report.pass
            );
            Ok(report.pass)
        }
        Command::Simulate {
            instance,
            plan,
            horizon_mult,
            eps,
            max_step_div,
            seed,
            out,
        } => {
            let (inst, plan) = load_matching(&instance, &plan)?;
            if !(max_step_div > 0.0) {
                bail!("--max-step-div must be positive");
            }
            let t = inst.period();
            let config = SimConfig {
                horizon: horizon_mult * t,
                contact_radius: eps,
                max_step: t / max_step_div,
                warmup: 0.0,
                seed,
            };
            let report = simulate(&inst, &plan, &config)?;
            report.save(&out)?;
            let worst = report.sensors.iter().map(|s| s.max_gap).fold(0.0, f64::max);
            println!(
                "sensors={} max_gap={} period={} violations={} pass={}",
                report.sensors.len(),
                format_float(worst),
                format_float(t),
                report.violations,
                report.pass
            );
            Ok(report.pass)
        }
        Command::Bound { plan } => {
            let plan = load_plan(&plan).with_context(|| format!("loading {}", plan.display()))?;
            let b = approximation_report(&plan);
            println!(
                "N={} LB={} ratio={}",
                b.mule_count,
                b.lower_bound,
                format_float(b.ratio)
            );
            Ok(true)
        }
        Command::Render {
            instance,
            plan,
            out,
        } => {
            let inst = load_instance(&instance)
                .with_context(|| format!("loading {}", instance.display()))?;
            let plan = match plan {
                Some(p) => {
                    let plan = load_plan(&p).with_context(|| format!("loading {}", p.display()))?;
                    plan.check_instance(&inst)?;
                    Some(plan)
                }
                None => None,
            };
            let svg = render_svg(&inst, plan.as_ref(), &RenderStyle::default());
            canonical::write_atomic(&out, svg.as_bytes())?;
            println!("wrote={}", out.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
