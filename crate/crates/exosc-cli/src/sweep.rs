//! Parameter sweep: classify every point of a parameter grid, with optional
//! per-cycle details, resumable through an on-disk journal keyed by grid
//! index. Grid points run concurrently (the workloads are pure); journal
//! writes are serialized. EXOSC_THREADS caps the worker count.

use std::collections::BTreeMap;
use std::io::Write;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use exosc::cycles::{classify_existence, find_cycle, Existence, SectionSpec};
use exosc::models::{CorbeillerParams, Epsilon, HesterParams, Model, State2};
use exosc::ode::fmt17;
use exosc::singular::{hausdorff_distance, singular_cycle};

use crate::args::{parse_grid, Args};
use crate::{timestamp_header, CmdError, CmdResult, EXIT_PARTIAL};

struct GridPoint {
    idx: usize,
    values: BTreeMap<String, f64>,
}

struct Row {
    idx: usize,
    csv: String,
    failed: bool,
}

pub fn cmd_sweep(args: &Args) -> CmdResult {
    let system = args
        .get("system")
        .ok_or_else(|| "missing required flag --system".to_string())?;
    let param_names: Vec<&str> = match system.as_str() {
        "hester" => vec!["alpha", "mu", "kappa", "gamma"],
        "corbeiller" => vec!["a", "b"],
        other => return Err(format!("--system must be hester or corbeiller, got '{other}'").into()),
    };
    let mut grids = Vec::new();
    for name in &param_names {
        let raw = args
            .get(name)
            .ok_or_else(|| format!("missing required flag --{name} (number or lo:hi:n)"))?;
        grids.push((name.to_string(), parse_grid(&raw)?.values));
    }
    let eps_val = args.f64_req("eps")?;
    let eps = Epsilon::new(eps_val).map_err(|e| e.to_string())?;
    let n_seeds = args.usize_or("seeds", 5)?;
    let rng_seed = args.u64_or("seed", 42)?;
    let ball = args.f64_or("ball", 5.0)?;
    let out = args.string_or("out", "sweep.csv");
    let journal_path = args.string_or("journal", &format!("{out}.journal"));
    args.reject_unknown()?;

    // cross product, row-major in flag order
    let mut points: Vec<GridPoint> = vec![GridPoint { idx: 0, values: BTreeMap::new() }];
    for (name, values) in &grids {
        let mut next = Vec::with_capacity(points.len() * values.len());
        for gp in &points {
            for v in values {
                let mut m = gp.values.clone();
                m.insert(name.clone(), *v);
                next.push(GridPoint { idx: 0, values: m });
            }
        }
        points = next;
    }
    for (i, gp) in points.iter_mut().enumerate() {
        gp.idx = i;
    }

    // resume: journal lines are "<idx>|<csv row>" or "<idx>|!<csv row>" for
    // recorded failures
    let mut done: BTreeMap<usize, Row> = BTreeMap::new();
    if let Ok(text) = std::fs::read_to_string(&journal_path) {
        for line in text.lines() {
            if let Some((idx, rest)) = line.split_once('|') {
                if let Ok(idx) = idx.parse::<usize>() {
                    let failed = rest.starts_with('!');
                    let csv = rest.strip_prefix('!').unwrap_or(rest).to_string();
                    done.insert(idx, Row { idx, csv, failed });
                }
            }
        }
    }

    let journal = Mutex::new(
        std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&journal_path)
            .map_err(|e| CmdError::Numerical(format!("cannot open journal {journal_path}: {e}")))?,
    );
    let results: Mutex<Vec<Option<Row>>> = Mutex::new((0..points.len()).map(|_| None).collect());
    for row in done.into_values() {
        let idx = row.idx;
        if idx < points.len() {
            results.lock().unwrap()[idx] = Some(row);
        }
    }

    let todo: Vec<&GridPoint> = {
        let res = results.lock().unwrap();
        points.iter().filter(|gp| res[gp.idx].is_none()).collect()
    };
    let threads = std::env::var("EXOSC_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(|n| n.get().min(8)).unwrap_or(1)
        });
    let cursor = AtomicUsize::new(0);

    std::thread::scope(|scope| {
        for _ in 0..threads.min(todo.len().max(1)) {
            scope.spawn(|| loop {
                let k = cursor.fetch_add(1, Ordering::SeqCst);
                if k >= todo.len() {
                    break;
                }
                let gp = todo[k];
                let row = evaluate_point(&system, gp, &eps, eps_val, ball, n_seeds, rng_seed);
                {
                    let mut j = journal.lock().unwrap();
                    let marker = if row.failed { "!" } else { "" };
                    let _ = writeln!(j, "{}|{}{}", row.idx, marker, row.csv);
                }
                let idx = row.idx;
                results.lock().unwrap()[idx] = Some(row);
            });
        }
    });

    let rows = results.into_inner().unwrap();
    let mut csv = timestamp_header();
    csv.push_str("idx,system,");
    csv.push_str(&param_names.join(","));
    csv.push_str(",eps,classification,fixed_point_x,period_t,hausdorff,floquet\n");
    let mut any_failed = false;
    for row in rows.iter().flatten() {
        csv.push_str(&row.csv);
        csv.push('\n');
        any_failed |= row.failed;
    }
    crate::write_file(&out, &csv)?;
    let n_done = rows.iter().flatten().count();
    println!("wrote {out}: {n_done}/{} grid points (journal {journal_path})", rows.len());
    if any_failed || n_done < rows.len() {
        Ok(ExitCode::from(EXIT_PARTIAL))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

fn evaluate_point(
    system: &str,
    gp: &GridPoint,
    eps: &Epsilon,
    eps_val: f64,
    ball: f64,
    n_seeds: usize,
    rng_seed: u64,
) -> Row {
    let v = |k: &str| gp.values[k];
    // column order matches the header, not the BTreeMap order
    let ordered: Vec<String> = match system {
        "hester" => ["alpha", "mu", "kappa", "gamma"].iter().map(|k| fmt17(v(k))).collect(),
        _ => ["a", "b"].iter().map(|k| fmt17(v(k))).collect(),
    };
    let params_csv = ordered.join(",");

    let model = match system {
        "hester" => HesterParams::new(v("alpha"), v("mu"), v("kappa"), v("gamma")).map(Model::Hester),
        _ => CorbeillerParams::new(v("a"), v("b")).map(Model::Corbeiller),
    };
    let model = match model {
        Ok(m) => m,
        Err(e) => {
            return Row {
                idx: gp.idx,
                csv: format!("{},{system},{params_csv},{},invalid: {e},,,,", gp.idx, fmt17(eps_val)),
                failed: true,
            }
        }
    };

    let class = classify_existence(&model, eps, ball, n_seeds, rng_seed.wrapping_add(gp.idx as u64));
    let class_name = match class {
        Existence::CycleFound => "CycleFound",
        Existence::ConvergesToEquilibrium => "ConvergesToEquilibrium",
        Existence::Indeterminate => "Indeterminate",
    };
    let (mut fx, mut period, mut hd, mut fl) = (String::new(), String::new(), String::new(), String::new());
    if class == Existence::CycleFound {
        if let Ok(cycle) = find_cycle(&model, eps, &SectionSpec::default()) {
            fx = fmt17(cycle.fixed_point_x);
            period = fmt17(cycle.period_t);
            fl = fmt17(cycle.floquet);
            if let Ok(sing) = singular_cycle(model) {
                let polys: Vec<&[State2]> = vec![&cycle.points];
                if let Ok(d) = hausdorff_distance(&polys, &sing.polylines(), 1e-3) {
                    hd = fmt17(d);
                }
            }
        }
    }
    Row {
        idx: gp.idx,
        csv: format!(
            "{},{system},{params_csv},{},{class_name},{fx},{period},{hd},{fl}",
            gp.idx,
            fmt17(eps_val)
        ),
        failed: false,
    }
}
