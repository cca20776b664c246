mod args;

use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use bailfund::analysis::{
    compensator_diagnostic, convergence_study, mean_variance_study, moments_csv, ordering_study,
    ConvergenceConfig, MomentsConfig,
};
use bailfund::exec::map_indexed;
use bailfund::fluid::{blocking_fluid, inf_fluid, skorokhod_fluid, steady_state_classify};
use bailfund::numfmt::g17;
use bailfund::simulate::{simulate_with, skorokhod_equivalence_check_with, SimOptions};
use bailfund::{generate_stream, EventStream, Execution, ModelParams, ScalingSpec};

use args::{Cli, Command, FluidChoice, ParamArgs};

enum Failure {
    Usage(String),
    Runtime(String),
    Verdict,
}

impl From<bailfund::Error> for Failure {
    fn from(e: bailfund::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Verdict) => ExitCode::from(1),
    }
}

fn params_from(a: &ParamArgs) -> Result<ModelParams, Failure> {
    let mut p = ModelParams::preset(&a.preset).ok_or_else(|| {
        Failure::Usage(format!(
            "unknown preset `{}` (expected example1, example2-inf or example2-block)",
            a.preset
        ))
    })?;
    if let Some(v) = a.m0 {
        p.m0 = v;
    }
    if let Some(v) = a.lambda_d {
        p.lambda_d = v;
    }
    if let Some(v) = a.lambda_b {
        p.lambda_b = v;
    }
    if let Some(d) = a.dist_d {
        p.dist_d = d;
    }
    if let Some(d) = a.dist_b {
        p.dist_b = d;
    }
    if let Some(d) = a.dist_p {
        p.dist_p = d;
    }
    if let Some(d) = a.dist_s {
        p.dist_s = d;
    }
    Ok(p.validated()?)
}

fn write_out(target: &str, content: &str) -> Outcome {
    if target == "-" {
        io::stdout()
            .lock()
            .write_all(content.as_bytes())
            .map_err(|e| Failure::Runtime(format!("stdout: {e}")))
    } else {
        fs::write(target, content).map_err(|e| Failure::Runtime(format!("{target}: {e}")))
    }
}

/// Summary lines go to stdout unless the CSV already does.
fn report(csv_target: Option<&str>, line: &str) {
    if csv_target == Some("-") {
        eprintln!("{line}");
    } else {
        println!("{line}");
    }
}

fn sampled_csv(path: &bailfund::CadlagPath, times: &[f64]) -> String {
    let mut out = String::from("t,value\n");
    for (&t, v) in times.iter().zip(path.sample(times)) {
        out.push_str(&format!("{},{}\n", g17(t), g17(v)));
    }
    out
}

fn read_scenario(path: &Path, horizon: f64) -> Result<EventStream, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read scenario {}: {e}", path.display())))?;
    EventStream::from_scenario(&text, horizon)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn dispatch(command: Command) -> Outcome {
    let exec = Execution::default();
    match command {
        Command::Simulate(a) => {
            let mut params = params_from(&a.params)?;
            let stream = match &a.scenario {
                Some(path) => read_scenario(path, a.run.t_end)?,
                None => generate_stream(&params, ScalingSpec::new(a.run.eta)?, a.run.seed, a.run.t_end)?,
            };
            // an explicit --m0 beats the scenario's own initial capital
            if let (Some(m0), None) = (stream.initial_capital, a.params.m0) {
                params.m0 = m0;
            }
            if let Some(path) = &a.emit_events {
                fs::write(path, stream.to_scenario())
                    .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
            }
            let opts = SimOptions { skorokhod_return_factor: a.skorokhod_return_factor };
            let result = simulate_with(a.model, &params, &stream, &opts);
            let csv = match &a.grid {
                Some(times) => sampled_csv(&result.path, times),
                None => result.path.to_csv(),
            };
            write_out(&a.output, &csv)
        }
        Command::Fluid(a) => {
            let params = params_from(&a.params)?;
            let curve = match a.model {
                FluidChoice::Inf => inf_fluid(&params, a.t_end, a.dt)?,
                FluidChoice::Skorokhod => {
                    let (curve, regime) = skorokhod_fluid(&params, a.t_end, a.dt)?;
                    report(Some(&a.output), &format!("regime={regime:?}"));
                    curve
                }
                FluidChoice::Block => blocking_fluid(&params, a.t_end, a.dt)?,
            };
            write_out(&a.output, &curve.to_csv())?;
            report(
                Some(&a.output),
                &format!("{} final={}", steady_state_classify(&params), g17(curve.final_value())),
            );
            Ok(())
        }
        Command::Mean(a) => {
            let params = params_from(&a.params)?;
            let grid = a.grid.clone().unwrap_or_else(|| {
                let n = a.run.t_end.floor().max(0.0) as usize;
                (0..=n).map(|k| k as f64).collect()
            });
            let cfg = MomentsConfig { reps: a.reps, grid, eta: a.run.eta, seed0: a.run.seed, exec };
            let rows = mean_variance_study(a.model, &params, &cfg)?;
            write_out(&a.output, &moments_csv(&rows))
        }
        Command::Converge(a) => {
            let params = params_from(&a.params)?;
            let cfg = ConvergenceConfig {
                etas: a.etas.clone(),
                reps: a.reps,
                t_end: a.t_end,
                seed0: a.seed,
                fluid_dt: a.dt,
                exec,
            };
            let r = convergence_study(a.model, &params, &cfg)?;
            write_out(&a.output, &r.to_csv())?;
            for e in &r.per_eta {
                report(
                    Some(&a.output),
                    &format!("eta={} median={} q90={}", g17(e.eta), g17(e.median), g17(e.q90)),
                );
            }
            Ok(())
        }
        Command::Order(a) => {
            let params = params_from(&a.params)?;
            let r = ordering_study(a.family, &params, a.reps, a.t_end, a.seed, exec)?;
            if let Some(target) = &a.output {
                write_out(target, &r.to_csv())?;
            }
            report(
                a.output.as_deref(),
                &format!(
                    "family={} runs={} violations={} max_violation={} equality_gap={}",
                    a.family.name(),
                    r.runs,
                    r.violations.len(),
                    g17(r.max_violation),
                    g17(r.max_equality_gap)
                ),
            );
            if r.passed() {
                Ok(())
            } else {
                Err(Failure::Verdict)
            }
        }
        Command::Equiv(a) => {
            let params = params_from(&a.params)?;
            let opts = SimOptions { skorokhod_return_factor: a.skorokhod_return_factor };
            let reports = map_indexed(exec, a.reps, |rep| {
                let seed = bailfund::analysis::replicate_seed(a.seed, rep);
                generate_stream(&params, ScalingSpec::unit(), seed, a.t_end)
                    .map(|s| skorokhod_equivalence_check_with(&params, &s, &opts))
            });
            let reports = reports.into_iter().collect::<Result<Vec<_>, _>>()?;
            let nr = reports.iter().map(|r| r.no_returns_deviation).fold(0.0, f64::max);
            let wr = reports.iter().map(|r| r.with_returns_deviation).fold(0.0, f64::max);
            let failed = reports.iter().filter(|r| !r.passed()).count();
            println!(
                "runs={} mismatches={failed} no_returns_deviation={} with_returns_deviation={}",
                reports.len(),
                g17(nr),
                g17(wr)
            );
            if failed == 0 {
                Ok(())
            } else {
                Err(Failure::Verdict)
            }
        }
        Command::Diagnose(a) => {
            let params = params_from(&a.params)?;
            let d = compensator_diagnostic(
                a.component,
                &params,
                a.eta,
                a.reps,
                &a.checkpoints,
                a.seed,
                exec,
            )?;
            write_out(&a.output, &d.to_csv())?;
            report(
                Some(&a.output),
                &format!("component={} within_3se={}", a.component.name(), d.within_band(3.0)),
            );
            Ok(())
        }
    }
}
