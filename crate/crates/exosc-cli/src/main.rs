//! Command-line front end: simulation, cycle location, singular cycles,
//! manifold sampling, chart verification, eps-convergence studies and
//! parameter sweeps. Emits plot-ready CSV and JSON.
//!
//! Exit codes: 0 success, 2 validation failure, 3 numerical failure,
//! 4 partial sweep.

mod args;
mod sweep;

use std::process::ExitCode;

use args::Args;
use exosc::charts::verify::run_verification;
use exosc::cycles::{convergence_study, find_cycle, Crossing, SectionSpec};
use exosc::models::{CorbeillerParams, Model, State2};
use exosc::ode::{fmt17, integrate, IntegratorConfig};
use exosc::singular::singular_cycle;
use exosc::slowmf::{slow_manifold_corbeiller, slow_manifold_hester, ManifoldOrder};

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
pub const EXIT_PARTIAL: u8 = 4;

fn main() -> ExitCode {
    let raw: Vec<String> = std::env::args().skip(1).collect();
    let Some(command) = raw.first() else {
        usage();
        return ExitCode::from(EXIT_VALIDATION);
    };
    let args = match Args::parse(&raw[1..]) {
        Ok(a) => a,
        Err(e) => return validation_error(&e),
    };
    let run = match command.as_str() {
        "simulate" => cmd_simulate(&args),
        "cycle" => cmd_cycle(&args),
        "singular" => cmd_singular(&args),
        "manifold" => cmd_manifold(&args),
        "charts-verify" => cmd_charts_verify(&args),
        "converge" => cmd_converge(&args),
        "sweep" => sweep::cmd_sweep(&args),
        "help" | "--help" | "-h" => {
            usage();
            return ExitCode::SUCCESS;
        }
        other => {
            eprintln!("unknown command '{other}'");
            usage();
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    match run {
        Ok(code) => code,
        Err(CmdError::Validation(msg)) => validation_error(&msg),
        Err(CmdError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}

fn validation_error(msg: &str) -> ExitCode {
    eprintln!("invalid invocation: {msg}");
    ExitCode::from(EXIT_VALIDATION)
}

fn usage() {
    eprintln!(
        "usage: exosc <command> [--flag value ...]\n\
         commands:\n\
         \u{20}  simulate       integrate one trajectory (CSV + summary JSON)\n\
         \u{20}  cycle          locate the attracting limit cycle (JSON)\n\
         \u{20}  singular       construct the piecewise-smooth singular cycle (JSON)\n\
         \u{20}  manifold       sample the slow/invariant-manifold graph (CSV)\n\
         \u{20}  charts-verify  run the blow-up chart verification suite (JSON)\n\
         \u{20}  converge       eps-convergence study against the singular cycle (CSV)\n\
         \u{20}  sweep          classify a parameter grid, resumable (CSV)\n\
         common flags: --system hester|corbeiller, --alpha/--mu/--kappa/--gamma or --a/--b,\n\
         --eps, --out FILE, --config FILE (flat key=value; flags override)"
    );
}

pub enum CmdError {
    Validation(String),
    Numerical(String),
}

type CmdResult = Result<ExitCode, CmdError>;

impl From<String> for CmdError {
    fn from(v: String) -> Self {
        CmdError::Validation(v)
    }
}

fn numerical(e: exosc::Error) -> CmdError {
    match e {
        exosc::Error::InvalidParameter(m) => CmdError::Validation(m),
        other => CmdError::Numerical(other.to_string()),
    }
}

fn write_file(path: &str, contents: &str) -> Result<(), CmdError> {
    std::fs::write(path, contents)
        .map_err(|e| CmdError::Numerical(format!("cannot write {path}: {e}")))
}

fn timestamp_header() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("# generated {secs}\n")
}

fn section_from(args: &Args) -> Result<SectionSpec, CmdError> {
    let delta = args.f64_or("delta", 0.1)?;
    let crossing = match args.string_or("crossing", "descending").as_str() {
        "descending" => Crossing::Descending,
        "ascending" => Crossing::Ascending,
        other => {
            return Err(format!("--crossing must be descending or ascending, got '{other}'").into())
        }
    };
    Ok(SectionSpec { delta, crossing })
}

fn cmd_simulate(args: &Args) -> CmdResult {
    let model = args.model()?;
    let eps = args.eps()?;
    let e = eps.positive().map_err(|e| CmdError::Validation(e.to_string()))?;
    let x0 = args.f64_req("x0")?;
    let y0 = args.f64_req("y0")?;
    let t_end = args.f64_req("t-end")?;
    let rtol = args.f64_or("rtol", 1e-9)?;
    let atol = args.f64_or("atol", 1e-12)?;
    let out = args.string_or("out", "trajectory.csv");
    let summary_path = args.string_or("summary", "summary.json");
    args.reject_unknown()?;

    let cfg = IntegratorConfig {
        rtol,
        atol,
        h_max: (10.0 * e).min(0.1),
        max_steps: 50_000_000,
        ..Default::default()
    };
    let field = move |s: State2| model.normalized(e, s);
    let traj = integrate(&field, State2::new(x0, y0), (0.0, t_end), &cfg, &[]).map_err(numerical)?;

    let mut csv = timestamp_header();
    csv.push_str(&traj.to_csv());
    write_file(&out, &csv)?;

    let eq = model.equilibrium(&eps);
    let fin = traj.last_state();
    let summary = serde_json::json!({
        "system": model.system().name(),
        "params": model,
        "eps": e,
        "start": [x0, y0],
        "t_end": t_end,
        "equilibrium": [eq.x, eq.y],
        "final_state": [fin.x, fin.y],
        "accepted_steps": traj.times.len() - 1,
        "events": traj.events.iter().map(|ev| serde_json::json!([ev.id, ev.t, ev.state.x, ev.state.y])).collect::<Vec<_>>(),
    });
    write_file(&summary_path, &format!("{:#}\n", summary))?;
    println!("wrote {out} and {summary_path}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_cycle(args: &Args) -> CmdResult {
    let model = args.model()?;
    let eps = args.eps()?;
    let section = section_from(args)?;
    let out = args.string_or("out", "cycle.json");
    args.reject_unknown()?;
    let cycle = find_cycle(&model, &eps, &section).map_err(numerical)?;
    write_file(&out, &(cycle.to_json() + "\n"))?;
    println!(
        "wrote {out}: fixed point x = {}, period_t1 = {}, period_t = {}, floquet = {}{}",
        fmt17(cycle.fixed_point_x),
        fmt17(cycle.period_t1),
        fmt17(cycle.period_t),
        fmt17(cycle.floquet),
        if cycle.floquet_noise_floor_flag { " (below noise floor)" } else { "" }
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_singular(args: &Args) -> CmdResult {
    let model = args.model()?;
    let out = args.string_or("out", "singular.json");
    args.reject_unknown()?;
    let cyc = singular_cycle(model).map_err(numerical)?;
    write_file(&out, &(cyc.to_json() + "\n"))?;
    println!(
        "wrote {out}: {} segments, closure gap {}",
        cyc.segments.len(),
        fmt17(cyc.closure_gap())
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_manifold(args: &Args) -> CmdResult {
    let model = args.model()?;
    let eps = args.eps()?;
    let e = eps.positive().map_err(|e| CmdError::Validation(e.to_string()))?;
    let x_min = args.f64_req("x-min")?;
    let x_max = args.f64_req("x-max")?;
    let n = args.usize_or("n", 200)?;
    let order = match args.string_or("order", "leading").as_str() {
        "leading" => ManifoldOrder::Leading,
        "full" => ManifoldOrder::Full,
        other => return Err(format!("--order must be leading or full, got '{other}'").into()),
    };
    let out = args.string_or("out", "manifold.csv");
    args.reject_unknown()?;
    if !(x_max > x_min) || n < 2 {
        return Err("need x-max > x-min and n >= 2".to_string().into());
    }

    let mut csv = timestamp_header();
    csv.push_str("x,y_graph,order\n");
    let order_name = match order {
        ManifoldOrder::Leading => "leading",
        ManifoldOrder::Full => "full",
    };
    for i in 0..n {
        let x = x_min + (x_max - x_min) * i as f64 / (n - 1) as f64;
        let y = match &model {
            Model::Hester(p) => slow_manifold_hester(p, x).map(|h| e * h),
            Model::Corbeiller(p) => slow_manifold_corbeiller(p, e, x, order),
        }
        .map_err(numerical)?;
        csv.push_str(&format!("{},{},{}\n", fmt17(x), fmt17(y), order_name));
    }
    write_file(&out, &csv)?;
    println!("wrote {out}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_charts_verify(args: &Args) -> CmdResult {
    let model = args.model()?;
    let params: CorbeillerParams = match model {
        Model::Corbeiller(p) => p,
        Model::Hester(_) => {
            return Err("the chart catalog covers --system corbeiller only".to_string().into())
        }
    };
    let seed = args.u64_or("seed", 42)?;
    let out = args.string_or("out", "charts_report.json");
    args.reject_unknown()?;

    let report = run_verification(params, seed).map_err(numerical)?;
    write_file(&out, &(report.to_json() + "\n"))?;
    let failures = report.failures();
    if failures.is_empty() {
        println!("wrote {out}: {} checks, all passed", report.checks.len());
        Ok(ExitCode::SUCCESS)
    } else {
        for f in &failures {
            eprintln!(
                "FAILED {} [chart {}] mismatch {} > tolerance {} at {:?}",
                f.name,
                f.chart,
                fmt17(f.max_mismatch),
                f.tolerance,
                f.worst_point
            );
        }
        eprintln!("{} of {} checks failed; report in {out}", failures.len(), report.checks.len());
        Ok(ExitCode::from(EXIT_NUMERICAL))
    }
}

fn cmd_converge(args: &Args) -> CmdResult {
    let model = args.model()?;
    let eps_list = args.eps_list()?;
    let section = section_from(args)?;
    let out = args.string_or("out", "converge.csv");
    args.reject_unknown()?;
    let report = convergence_study(&model, &eps_list, &section).map_err(numerical)?;
    let mut csv = timestamp_header();
    csv.push_str(&report.to_csv());
    write_file(&out, &csv)?;
    let failed = report.rows.iter().filter(|r| r.error.is_some()).count();
    println!("wrote {out} ({} rows, {failed} failed)", report.rows.len());
    if failed > 0 {
        Ok(ExitCode::from(EXIT_NUMERICAL))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}
