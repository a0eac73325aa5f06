//! Acceptance suite: one test per numbered criterion, each printing a single
//! PASS/FAIL line (visible with `cargo test --test acceptance -- --nocapture`,
//! or automatically on failure).

use std::time::Instant;

use exosc::charts::verify::run_verification;
use exosc::charts::{pi14_conservation_residual, pi14_transition};
use exosc::cycles::{
    classify_existence, convergence_study, find_cycle, Existence, SectionSpec, FLOQUET_NOISE_FLOOR,
};
use exosc::models::{
    corbeiller_field_normalized, hester_field_normalized, CorbeillerParams, Epsilon, FieldValue,
    HesterParams, Model, State2,
};
use exosc::ode::{integrate, EventDirection, EventSpec, IntegratorConfig};
use exosc::singular::{drop_point_hester, drop_point_hester_integrated, hester_jump_point};
use exosc::slowmf::{lambert_w, manifold_residual, slow_manifold_corbeiller, ManifoldOrder};

fn hesterpara() -> HesterParams {
    HesterParams::new(0.5, 0.4, 0.2, 0.3).unwrap()
}

fn lcpara() -> CorbeillerParams {
    CorbeillerParams::new(1.0, 0.25).unwrap()
}

fn verdict(n: u32, what: &str, pass: bool, detail: &str) -> bool {
    println!("criterion {n}: {} - {what} ({detail})", if pass { "PASS" } else { "FAIL" });
    pass
}

/// Existence dichotomy: the reference parameters give a cycle at eps = 0.05;
/// pushing kappa (1+alpha) to 1.2 sends 20 random seeds in the radius-5 ball
/// to the equilibrium (within 1e-4 by t1 = 500). Total runtime under 60 s.
#[test]
fn criterion_01_existence_dichotomy() {
    let started = Instant::now();
    let eps = Epsilon::new(0.05).unwrap();
    let cycle_side = classify_existence(&Model::Hester(hesterpara()), &eps, 5.0, 20, 42);
    let no_cycle = HesterParams::new(0.5, 0.4, 0.8, 0.3).unwrap();
    let eq_side = classify_existence(&Model::Hester(no_cycle), &eps, 5.0, 20, 42);
    let elapsed = started.elapsed().as_secs_f64();
    let pass = cycle_side == Existence::CycleFound
        && eq_side == Existence::ConvergesToEquilibrium
        && elapsed < 60.0;
    assert!(
        verdict(
            1,
            "existence dichotomy across kappa (1+alpha) = 1",
            pass,
            &format!("kappa=0.2 -> {cycle_side:?}, kappa=0.8 -> {eq_side:?}, {elapsed:.1} s")
        ),
        "dichotomy not reproduced"
    );
}

/// Hausdorff distance between the located cycle and the singular cycle is
/// strictly decreasing over eps in {0.1, 0.05, 0.02, 0.01} for both systems
/// and below 0.2 at eps = 0.01. Runtime under 5 minutes.
#[test]
fn criterion_02_hausdorff_convergence() {
    let started = Instant::now();
    let ladder = [0.1, 0.05, 0.02, 0.01];
    let section = SectionSpec::default();
    let mut pass = true;
    let mut detail = String::new();
    for model in [Model::Hester(hesterpara()), Model::Corbeiller(lcpara())] {
        let report = convergence_study(&model, &ladder, &section).unwrap();
        let hs: Vec<f64> = report.rows.iter().map(|r| r.hausdorff.unwrap()).collect();
        let decreasing = hs.windows(2).all(|w| w[1] < w[0]);
        let small = hs[3] < 0.2;
        pass &= decreasing && small;
        detail.push_str(&format!(
            "{:?}: {:?} decreasing={decreasing} final<0.2={small}; ",
            model.system(),
            hs.iter().map(|h| (h * 1e4).round() / 1e4).collect::<Vec<_>>()
        ));
    }
    let elapsed = started.elapsed().as_secs_f64();
    pass &= elapsed < 300.0;
    detail.push_str(&format!("{elapsed:.1} s"));
    assert!(verdict(2, "Hausdorff convergence to the singular cycle", pass, &detail));
}

/// The cycle's maximal x over points inside the switching layer approaches
/// the jump-off abscissa within 5% at eps = 0.005.
#[test]
fn criterion_03_jump_point_asymptotics() {
    let p = hesterpara();
    let (x_j, _) = hester_jump_point(&p).unwrap();
    let eps = Epsilon::new(0.005).unwrap();
    let cycle = find_cycle(&Model::Hester(p), &eps, &SectionSpec::default()).unwrap();
    let max_x_layer = cycle
        .points
        .iter()
        .filter(|s| s.y.abs() < 5.0 * 0.005)
        .map(|s| s.x)
        .fold(f64::NEG_INFINITY, f64::max);
    let rel = (max_x_layer - x_j).abs() / x_j;
    let pass = rel < 0.05;
    assert!(verdict(
        3,
        "cycle reaches the jump-off point",
        pass,
        &format!("max x in layer = {max_x_layer:.6}, x_j = {x_j:.6}, rel = {rel:.4}")
    ));
}

/// Closed-form drop point against the event-integrated value on a 5x5
/// (gamma, alpha) grid, agreement 1e-8.
#[test]
fn criterion_04_drop_point_oracle() {
    let gammas = [0.1, 0.3, 0.5, 0.7, 0.9];
    let alphas = [0.25, 0.5, 1.0, 1.5, 2.0];
    let mut worst = 0.0_f64;
    for &gamma in &gammas {
        for &alpha in &alphas {
            let kappa = 0.5 / (1.0 + alpha);
            let p = HesterParams::new(alpha, 1.0, kappa, gamma).unwrap();
            let closed = drop_point_hester(&p).unwrap();
            let integ = drop_point_hester_integrated(&p).unwrap();
            worst = worst.max((closed - integ).abs());
        }
    }
    let reference = drop_point_hester(&hesterpara()).unwrap();
    let pass = worst < 1e-8;
    assert!(verdict(
        4,
        "drop-point closed form matches event integration on the 5x5 grid",
        pass,
        &format!("worst |closed - integrated| = {worst:.2e}; reference x_d = {reference:.9}")
    ));
}

/// Lambert W: identity residual over 10^4 points, the bisection-oracle value
/// at w = 1, and the log asymptotics; all in under a second.
#[test]
fn criterion_05_lambert_w_suite() {
    let started = Instant::now();
    let brk = -(-1.0_f64).exp();
    let mut worst = 0.0_f64;
    for i in 0..2000 {
        let t = i as f64 / 1999.0;
        let w = brk + 1e-6 + (brk.abs() - 1e-6) * t;
        let z = lambert_w(w).unwrap();
        worst = worst.max((z * z.exp() - w).abs() / w.abs().max(1.0));
    }
    for i in 0..8000 {
        let t = i as f64 / 7999.0;
        let w = 10f64.powf(-6.0 + 12.0 * t);
        let z = lambert_w(w).unwrap();
        worst = worst.max((z * z.exp() - w).abs() / w.abs().max(1.0));
    }

    // independent bisection oracle at w = 1
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid * mid.exp() > 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let omega = 0.5 * (lo + hi);
    let w1 = lambert_w(1.0).unwrap();
    let w1_ok = (w1 - omega).abs() < 1e-13 && (w1 - 0.5671432904097838).abs() < 1e-13;

    let mut asym_ok = true;
    for w in [1e3, 1e4, 1e6] {
        let z = lambert_w(w).unwrap();
        let l = w.ln();
        asym_ok &= (z / l - 1.0).abs() <= 1.1 * l.ln() / l;
    }
    let elapsed = started.elapsed().as_secs_f64();
    let pass = worst <= 1e-12 && w1_ok && asym_ok && elapsed < 1.0;
    assert!(verdict(
        5,
        "Lambert W identity, oracle value, asymptotics",
        pass,
        &format!("identity residual {worst:.2e}, W(1) ok={w1_ok}, asymptotics ok={asym_ok}, {elapsed:.3} s")
    ));
}

/// Slow manifolds: the scaled Hester residual stays below 0.05 across
/// x in [0.2, 1.0] at eps = 0.01; the leading-order Le Corbeiller relative
/// residual is below 0.10 at eps = 0.01 and strictly decreasing over
/// eps in {0.05, 0.02, 0.01}.
#[test]
fn criterion_06_slow_manifold_residuals() {
    // Hester: ride the attracting branch across the window
    let p = hesterpara();
    let eps = 0.01;
    let y0 = eps * exosc::slowmf::slow_manifold_hester(&p, 0.05).unwrap();
    let field = move |s: State2| hester_field_normalized(&p, eps, s);
    let cfg = IntegratorConfig { rtol: 1e-10, atol: 1e-13, h_max: 0.1, ..Default::default() };
    let g = |s: State2| s.x - 1.05;
    let events = [EventSpec { id: 0, g: &g, direction: EventDirection::Rising, terminal: true }];
    let traj = integrate(&field, State2::new(0.05, y0), (0.0, 2e4), &cfg, &events).unwrap();
    let hester_res =
        manifold_residual(Model::Hester(p), eps, &traj, (0.2, 1.0), ManifoldOrder::Leading).unwrap();

    // Le Corbeiller ladder
    let lc = lcpara();
    let mut rel = Vec::new();
    for e in [0.05, 0.02, 0.01] {
        let x0 = -1.2;
        let y0 = slow_manifold_corbeiller(&lc, e, x0, ManifoldOrder::Leading).unwrap();
        let field = move |s: State2| corbeiller_field_normalized(&lc, e, s);
        let cfg = IntegratorConfig {
            rtol: 1e-10,
            atol: 1e-13,
            h_max: (10.0 * e).min(0.1),
            ..Default::default()
        };
        let g = |s: State2| s.x + 0.25;
        let events = [EventSpec { id: 0, g: &g, direction: EventDirection::Rising, terminal: true }];
        let traj = integrate(&field, State2::new(x0, y0), (0.0, 4e3), &cfg, &events).unwrap();
        let r = manifold_residual(Model::Corbeiller(lc), e, &traj, (-0.8, -0.3), ManifoldOrder::Leading)
            .unwrap();
        rel.push(r / slow_manifold_corbeiller(&lc, e, -0.5, ManifoldOrder::Leading).unwrap());
    }
    let ladder_ok = rel[0] > rel[1] && rel[1] > rel[2];
    let pass = hester_res <= 0.05 && rel[2] <= 0.10 && ladder_ok;
    assert!(verdict(
        6,
        "slow-manifold residuals",
        pass,
        &format!(
            "hester scaled residual {hester_res:.4}; corbeiller relative {:?} decreasing={ladder_ok}",
            rel.iter().map(|r| (r * 1e4).round() / 1e4).collect::<Vec<_>>()
        )
    ));
}

/// Chart calculus: round-trips, blow-down commutation, field collinearity,
/// equilibrium spectra (with the corner resonance) and the invariant
/// parabola, all through the verification suite, in under 30 s.
#[test]
fn criterion_07_chart_calculus() {
    let started = Instant::now();
    let report = run_verification(lcpara(), 42).unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    let failures = report.failures();
    let pass = failures.is_empty() && elapsed < 30.0;
    let detail = if let Some(f) = failures.first() {
        format!("{} checks, first failure: {} ({:.2e} > {:.0e})", report.checks.len(), f.name, f.max_mismatch, f.tolerance)
    } else {
        format!("{} checks, all passed, {elapsed:.1} s", report.checks.len())
    };
    assert!(verdict(7, "blow-up chart calculus", pass, &detail));
}

/// Closed-form local transition data against numeric integration of the
/// decoupled radial subsystem on a 4x4 grid, agreement 1e-8.
#[test]
fn criterion_08_radial_transition_closed_form() {
    let deltas = [0.15, 0.25, 0.35, 0.45];
    let r_ins = [0.02, 0.1, 0.3, 0.45];
    let mut worst = 0.0_f64;
    for &delta in &deltas {
        for &r_in in &r_ins {
            let (t_closed, eps_closed, _) = pi14_transition(delta, r_in).unwrap();
            let r5 = (-1.0_f64 / delta).exp();
            let field = |s: State2| FieldValue { dx: s.x * (1.0 + s.y), dy: -s.y * s.y };
            let g = move |s: State2| s.x - r5;
            let events =
                [EventSpec { id: 0, g: &g, direction: EventDirection::Any, terminal: true }];
            let cfg =
                IntegratorConfig { rtol: 1e-12, atol: 1e-14, h_max: 0.01, ..Default::default() };
            let t_end = if t_closed >= 0.0 { t_closed + 1.0 } else { t_closed - 1.0 };
            let traj =
                integrate(&field, State2::new(r_in, delta), (0.0, t_end), &cfg, &events).unwrap();
            let ev = traj.events.last().unwrap();
            worst = worst.max((ev.t - t_closed).abs()).max((ev.state.y - eps_closed).abs());
            assert!(pi14_conservation_residual(delta, r_in).unwrap() < 1e-10);
        }
    }
    let pass = worst < 1e-8;
    assert!(verdict(
        8,
        "radial transition closed form matches integration on the 4x4 grid",
        pass,
        &format!("worst mismatch {worst:.2e}")
    ));
}

/// Contraction scaling: least-squares slope of log |Pi'(x*)| against 1/eps
/// over eps in {0.1, 0.05, 0.025}, keeping points above the 1e-12
/// finite-difference noise floor, must be negative.
///
/// This criterion is not attainable in double precision: the true multiplier
/// is below ~1e-11 already at eps = 0.2 (central differences scatter in sign
/// and scale like 1/h across h in {1e-3, 0.02, 0.1}), so every reading that
/// clears the 1e-12 floor is integrator roundoff, 1-2 orders above the
/// actual derivative. The fit below therefore regresses on noise; it is kept
/// exactly as stated rather than loosened, and the supporting evidence for
/// the underlying exponential-contraction claim lives in the return-map
/// contraction tests, which bound |Pi(x) - x*| directly.
#[test]
fn criterion_09_contraction_scaling() {
    let model = Model::Corbeiller(lcpara());
    let section = SectionSpec::default();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut raw = Vec::new();
    for e in [0.1, 0.05, 0.025] {
        let eps = Epsilon::new(e).unwrap();
        let cycle = find_cycle(&model, &eps, &section).unwrap();
        raw.push((e, cycle.floquet));
        if cycle.floquet.abs() > FLOQUET_NOISE_FLOOR {
            xs.push(1.0 / e);
            ys.push(cycle.floquet.abs().ln());
        }
    }
    let (slope, r2) = exosc::lsq_line(&xs, &ys);
    let pass = xs.len() >= 2 && slope < 0.0;
    let detail = format!(
        "multipliers {:?}; {} points above the 1e-12 floor; slope = {slope:+.3e} (r2 = {r2:.2}); readings are finite-difference noise, see the doc comment",
        raw.iter().map(|(e, f)| format!("eps={e}: {f:+.2e}")).collect::<Vec<_>>(),
        xs.len()
    );
    assert!(verdict(9, "contraction scaling fit", pass, &detail), "{detail}");
}

/// Period limit in the original time: the Le Corbeiller periods at
/// eps = 0.02 and 0.01 differ by less than 5%.
#[test]
fn criterion_10_period_limit() {
    let model = Model::Corbeiller(lcpara());
    let section = SectionSpec::default();
    let t02 = find_cycle(&model, &Epsilon::new(0.02).unwrap(), &section).unwrap().period_t;
    let t01 = find_cycle(&model, &Epsilon::new(0.01).unwrap(), &section).unwrap().period_t;
    let rel = (t02 - t01).abs() / t01;
    let pass = rel < 0.05;
    assert!(verdict(
        10,
        "original-time period limit",
        pass,
        &format!("T(0.02) = {t02:.5}, T(0.01) = {t01:.5}, rel = {rel:.4}")
    ));
}

/// Uniqueness probe: five spread seeds converge to the same fixed point
/// within 1e-6 for both systems at eps = 0.05.
#[test]
fn criterion_11_uniqueness_probe() {
    let eps = Epsilon::new(0.05).unwrap();
    let section = SectionSpec::default();
    let mut pass = true;
    let mut detail = String::new();
    for model in [Model::Hester(hesterpara()), Model::Corbeiller(lcpara())] {
        let base = find_cycle(&model, &eps, &section).unwrap().fixed_point_x;
        let mut spread = 0.0_f64;
        for dx in [-0.3, -0.1, 0.1, 0.3, 0.5] {
            // restart the solver from a displaced seed via one raw return
            let seeded = seeded_fixed_point(&model, &eps, &section, base + dx);
            spread = spread.max((seeded - base).abs());
        }
        pass &= spread < 1e-6;
        detail.push_str(&format!("{:?}: x* = {base:.8}, spread {spread:.2e}; ", model.system()));
    }
    assert!(verdict(11, "uniqueness from spread seeds", pass, &detail));
}

/// Fixed-point iteration from an arbitrary seed; the strong contraction makes
/// plain iteration converge, independently of the secant path inside
/// find_cycle.
fn seeded_fixed_point(model: &Model, eps: &Epsilon, section: &SectionSpec, seed: f64) -> f64 {
    let mut x = seed;
    for _ in 0..20 {
        let next = exosc::cycles::return_map(model, eps, section, x).unwrap();
        if (next - x).abs() < 1e-12 {
            return next;
        }
        x = next;
    }
    x
}
