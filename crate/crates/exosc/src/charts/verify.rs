//! Machine verification of the chart calculus: transition round-trips,
//! blow-down commutation, pushforward collinearity of the fields, spectrum
//! checks for every cataloged equilibrium, invariant-set preservation, and
//! the invariant parabola connecting the corner lines.

use serde::{Deserialize, Serialize};

use super::transitions::transition_raw;
use super::{
    blow_down, catalog_entries, chart_transition, equilibria_catalog, eval_chart_field,
    exp_neg_inv, transition_pairs, CatalogEntry, ChartId, ChartPoint,
};
use crate::error::Result;
use crate::models::CorbeillerParams;
use crate::rng::SplitMix64;

pub const ROUNDTRIP_TOL: f64 = 1e-12;
pub const COMMUTATION_TOL: f64 = 1e-12;
pub const COLLINEARITY_TOL: f64 = 1e-6;
pub const EIGEN_TOL: f64 = 1e-6;
pub const INVARIANT_SET_TOL: f64 = 1e-12;
pub const PARABOLA_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub chart: String,
    pub points_tested: usize,
    pub max_mismatch: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Coordinates of the worst point, for diagnosis.
    pub worst_point: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub params: CorbeillerParams,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    /// Every cataloged equilibrium with both spectra and their mismatch.
    pub catalog: Vec<CatalogEntry>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Run the complete suite. Deterministic for a fixed seed.
pub fn run_verification(params: CorbeillerParams, seed: u64) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    let mut rng = SplitMix64::new(seed);
    check_roundtrips(params, &mut rng, &mut checks)?;
    check_commutation(params, &mut rng, &mut checks)?;
    check_collinearity(params, &mut rng, &mut checks)?;
    check_eigenvalues(params, &mut checks)?;
    check_invariant_sets(params, &mut rng, &mut checks)?;
    check_parabola(params, &mut checks)?;
    check_corner_resonance(params, &mut checks)?;
    Ok(VerifyReport { params, seed, checks, catalog: catalog_entries(params)? })
}

/// A random valid point of `chart` lying in the overlap domain of the
/// transition toward `to`. Graph-restricted sources are constructed directly;
/// everything else is rejection-sampled.
fn sample_source(chart: ChartId, to: ChartId, params: CorbeillerParams, rng: &mut SplitMix64) -> ChartPoint {
    use ChartId::*;
    // sources that must sit on the invariant exponential graph
    match (chart, to) {
        (ExtK3, K3) => {
            let eps = rng.range(0.15, 0.8);
            let c = [rng.range(-1.5, 1.5), rng.range(0.05, 1.2), eps, exp_neg_inv(1.0, eps)];
            return ChartPoint::new(ExtK3, &c, params).unwrap();
        }
        (FrakK1, CalK2) => {
            let eps = rng.range(0.15, 0.8);
            let c = [rng.range(-1.5, 1.5), rng.range(0.05, 1.2), eps, exp_neg_inv(1.0, eps)];
            return ChartPoint::new(FrakK1, &c, params).unwrap();
        }
        (CalK1, CalK2) => {
            let eps = rng.range(0.15, 0.8);
            let rho1 = rng.range(0.2, 1.0);
            let c = [rng.range(0.05, 1.2), eps, rho1, exp_neg_inv(1.0, eps) / rho1];
            return ChartPoint::new(CalK1, &c, params).unwrap();
        }
        _ => {}
    }
    for _ in 0..10_000 {
        let pt = sample_generic(chart, params, rng);
        if chart_transition(chart, to, &pt).is_ok() {
            return pt;
        }
    }
    panic!("could not sample the overlap domain {} -> {}", chart.name(), to.name());
}

fn sample_generic(chart: ChartId, params: CorbeillerParams, rng: &mut SplitMix64) -> ChartPoint {
    let mask = chart.nonneg_mask();
    let mut c = [0.0; 4];
    for (i, item) in c.iter_mut().enumerate().take(chart.arity()) {
        *item = if mask[i] { rng.range(0.05, 1.3) } else { rng.range(-1.5, 1.5) };
    }
    // keep K2-family exponentials e^{y2} in a tame range
    if matches!(chart, ChartId::K2 | ChartId::K21 | ChartId::K22) {
        let idx = if chart == ChartId::K2 || chart == ChartId::K22 { 1 } else { 0 };
        c[idx] = rng.range(-3.0, 3.0);
    }
    ChartPoint::new(chart, &c[..chart.arity()], params).unwrap()
}

fn record(
    checks: &mut Vec<CheckResult>,
    name: String,
    chart: String,
    points: usize,
    mismatch: f64,
    tol: f64,
    worst: Vec<f64>,
) {
    checks.push(CheckResult {
        name,
        chart,
        points_tested: points,
        max_mismatch: mismatch,
        tolerance: tol,
        passed: mismatch <= tol,
        worst_point: worst,
    });
}

fn check_roundtrips(
    params: CorbeillerParams,
    rng: &mut SplitMix64,
    checks: &mut Vec<CheckResult>,
) -> Result<()> {
    let pairs = transition_pairs();
    for &(from, to) in &pairs {
        let mut worst = 0.0_f64;
        let mut worst_pt = Vec::new();
        let n = 100;
        for _ in 0..n {
            let pt = sample_source(from, to, params, rng);
            let there = chart_transition(from, to, &pt)?;
            let back = chart_transition(to, from, &there)?;
            let mut m = 0.0_f64;
            for i in 0..from.arity() {
                m = m.max((back.coords[i] - pt.coords[i]).abs() / pt.coords[i].abs().max(1.0));
            }
            if m > worst {
                worst = m;
                worst_pt = pt.coord_slice().to_vec();
            }
        }
        record(
            checks,
            format!("roundtrip {} -> {} -> {}", from.name(), to.name(), from.name()),
            from.name().into(),
            n,
            worst,
            ROUNDTRIP_TOL,
            worst_pt,
        );
    }
    Ok(())
}

fn check_commutation(
    params: CorbeillerParams,
    rng: &mut SplitMix64,
    checks: &mut Vec<CheckResult>,
) -> Result<()> {
    for &(from, to) in &transition_pairs() {
        let mut worst = 0.0_f64;
        let mut worst_pt = Vec::new();
        let n = 100;
        for _ in 0..n {
            let pt = sample_source(from, to, params, rng);
            let img = chart_transition(from, to, &pt)?;
            let a = blow_down(&pt)?;
            let b = blow_down(&img)?;
            let mut m = 0.0_f64;
            for i in 0..3 {
                m = m.max((a[i] - b[i]).abs() / a[i].abs().max(1.0));
            }
            if m > worst {
                worst = m;
                worst_pt = pt.coord_slice().to_vec();
            }
        }
        record(
            checks,
            format!("blow-down commutation {} -> {}", from.name(), to.name()),
            from.name().into(),
            n,
            worst,
            COMMUTATION_TOL,
            worst_pt,
        );
    }
    Ok(())
}

/// Pairs whose fields are both cataloged, for the pushforward check.
fn field_pairs() -> Vec<(ChartId, ChartId)> {
    use ChartId::*;
    vec![
        (K2, K1),
        (K3, K2),
        (K3, ExtK3),
        (ExtK3, FrakK1),
        (FrakK1, CalK1),
        (FrakK1, CalK2),
        (CalK1, CalK2),
        (CalK2, TildeK1),
        (CalK2, TildeK2),
        (TildeK1, TildeK2),
        (TildeK2, HatK31),
        (HatK31, K31),
        (K12, K11),
        (K21, K11),
        (K22, K11),
        (K21, K12),
        (K22, K21),
        (K31, K21),
        (K31, K22),
        (K1, K11),
        (K1, K12),
        (K2, K21),
        (K2, K22),
        (K3, K31),
    ]
}

fn check_collinearity(
    params: CorbeillerParams,
    rng: &mut SplitMix64,
    checks: &mut Vec<CheckResult>,
) -> Result<()> {
    for (from, to) in field_pairs() {
        let mut worst = 0.0_f64;
        let mut worst_pt = Vec::new();
        let mut tested = 0usize;
        while tested < 100 {
            let pt = sample_source(from, to, params, rng);
            let img = chart_transition(from, to, &pt)?;
            let f_src = eval_chart_field(&pt)?;
            let f_tgt = eval_chart_field(&img)?;
            let ns: f64 = f_src.iter().map(|v| v * v).sum::<f64>().sqrt();
            let nt: f64 = f_tgt.iter().map(|v| v * v).sum::<f64>().sqrt();
            if ns < 1e-2 || nt < 1e-2 {
                continue; // stay clear of equilibria, where direction is undefined
            }
            tested += 1;

            // pushforward by a finite-difference Jacobian of the bare formula
            let m = to.arity();
            let nsrc = from.arity();
            let mut push = vec![0.0_f64; m];
            let h = 1e-7;
            for j in 0..nsrc {
                let mut cp = pt.coords;
                cp[j] += h;
                let fp = transition_raw(from, to, &cp).expect("documented pair");
                let mut cm = pt.coords;
                cm[j] -= h;
                let fm = transition_raw(from, to, &cm).expect("documented pair");
                for i in 0..m {
                    push[i] += (fp[i] - fm[i]) / (2.0 * h) * f_src[j];
                }
            }
            let np: f64 = push.iter().map(|v| v * v).sum::<f64>().sqrt();
            let dot: f64 = push.iter().zip(&f_tgt).map(|(u, v)| u * v).sum();
            let cosang = dot / (np * nt);
            let mut perp = 0.0_f64;
            for i in 0..m {
                let w = push[i] / np - cosang * f_tgt[i] / nt;
                perp += w * w;
            }
            let angle = perp.sqrt().atan2(cosang);
            if angle > worst {
                worst = angle;
                worst_pt = pt.coord_slice().to_vec();
            }
        }
        record(
            checks,
            format!("field collinearity {} -> {}", from.name(), to.name()),
            from.name().into(),
            tested,
            worst,
            COLLINEARITY_TOL,
            worst_pt,
        );
    }
    Ok(())
}

fn check_eigenvalues(params: CorbeillerParams, checks: &mut Vec<CheckResult>) -> Result<()> {
    for rec in equilibria_catalog(params)? {
        let mismatch = rec.spectrum_mismatch()?;
        record(
            checks,
            format!("spectrum at {:?} ({})", rec.point.coord_slice(), rec.classification),
            rec.chart.name().into(),
            1,
            mismatch,
            EIGEN_TOL,
            rec.point.coord_slice().to_vec(),
        );
    }
    Ok(())
}

/// Declared invariant sets: coordinate planes and lines per chart, the
/// exponential graphs, and the corner parabola.
fn check_invariant_sets(
    params: CorbeillerParams,
    rng: &mut SplitMix64,
    checks: &mut Vec<CheckResult>,
) -> Result<()> {
    use ChartId::*;
    let (a, _b) = (params.a, params.b);
    struct SetCheck {
        name: &'static str,
        chart: ChartId,
        /// Builds a random point of the set.
        sample: Box<dyn Fn(&mut SplitMix64) -> [f64; 4]>,
        /// Components of the field that must vanish on the set.
        normal_components: Vec<usize>,
    }
    let free = |rng: &mut SplitMix64| rng.range(-1.5, 1.5);
    let pos = |rng: &mut SplitMix64| rng.range(0.05, 1.3);
    let sets: Vec<SetCheck> = vec![
        SetCheck {
            name: "K1 plane eps1 = 0",
            chart: K1,
            sample: Box::new(move |r| [free(r), pos(r), 0.0, 0.0]),
            normal_components: vec![2],
        },
        SetCheck {
            name: "K1 plane r1 = 0",
            chart: K1,
            sample: Box::new(move |r| [free(r), 0.0, pos(r), 0.0]),
            normal_components: vec![1],
        },
        SetCheck {
            name: "K2 cylinder r2 = 0",
            chart: K2,
            sample: Box::new(move |r| [free(r), r.range(-3.0, 3.0), 0.0, 0.0]),
            normal_components: vec![2],
        },
        SetCheck {
            name: "K3 plane r3 = 0",
            chart: K3,
            sample: Box::new(move |r| [free(r), 0.0, pos(r), 0.0]),
            normal_components: vec![1],
        },
        SetCheck {
            name: "K3 plane eps3 = 0",
            chart: K3,
            sample: Box::new(move |r| [free(r), pos(r), 0.0, 0.0]),
            normal_components: vec![2],
        },
        SetCheck {
            name: "ExtK3 plane q = 0",
            chart: ExtK3,
            sample: Box::new(move |r| [free(r), pos(r), pos(r), 0.0]),
            normal_components: vec![3],
        },
        SetCheck {
            name: "FrakK1 plane eps = 0",
            chart: FrakK1,
            sample: Box::new(move |r| [free(r), pos(r), 0.0, pos(r)]),
            normal_components: vec![2],
        },
        SetCheck {
            name: "FrakK1 plane rho1 = 0",
            chart: FrakK1,
            sample: Box::new(move |r| [free(r), pos(r), pos(r), 0.0]),
            normal_components: vec![3],
        },
        SetCheck {
            name: "FrakK1 plane r1 = 0",
            chart: FrakK1,
            sample: Box::new(move |r| [free(r), 0.0, pos(r), pos(r)]),
            normal_components: vec![1],
        },
        SetCheck {
            name: "CalK1 plane rho1 = 0",
            chart: CalK1,
            sample: Box::new(move |r| [pos(r), pos(r), 0.0, pos(r)]),
            normal_components: vec![2],
        },
        SetCheck {
            name: "CalK1 plane eps = 0",
            chart: CalK1,
            sample: Box::new(move |r| [pos(r), 0.0, pos(r), pos(r)]),
            normal_components: vec![1],
        },
        SetCheck {
            name: "CalK2 plane eps = 0",
            chart: CalK2,
            sample: Box::new(move |r| [free(r), pos(r), 0.0, 0.0]),
            normal_components: vec![2],
        },
        SetCheck {
            name: "CalK2 plane r2 = 0",
            chart: CalK2,
            sample: Box::new(move |r| [free(r), 0.0, pos(r), 0.0]),
            normal_components: vec![1],
        },
        SetCheck {
            name: "TildeK1 plane eps1 = 0",
            chart: TildeK1,
            sample: Box::new(move |r| [free(r), 0.0, pos(r), 0.0]),
            normal_components: vec![1],
        },
        SetCheck {
            name: "TildeK1 plane sigma1 = 0",
            chart: TildeK1,
            sample: Box::new(move |r| [free(r), pos(r), 0.0, 0.0]),
            normal_components: vec![2],
        },
        SetCheck {
            name: "TildeK2 plane sigma2 = 0",
            chart: TildeK2,
            sample: Box::new(move |r| [free(r), pos(r), 0.0, 0.0]),
            normal_components: vec![2],
        },
        SetCheck {
            name: "TildeK2 plane r2 = 0",
            chart: TildeK2,
            sample: Box::new(move |r| [free(r), 0.0, pos(r), 0.0]),
            normal_components: vec![1],
        },
        SetCheck {
            name: "HatK31 axis (invariant vertical-cylinder edge)",
            chart: HatK31,
            sample: Box::new(move |r| [0.0, pos(r), 0.0, 0.0]),
            normal_components: vec![0, 2],
        },
        SetCheck {
            name: "HatK31 plane shat1 = 0",
            chart: HatK31,
            sample: Box::new(move |r| [pos(r), pos(r), 0.0, 0.0]),
            normal_components: vec![2],
        },
        SetCheck {
            name: "K31 edge r31 = s1 = 0",
            chart: K31,
            sample: Box::new(move |r| [0.0, pos(r), 0.0, 0.0]),
            normal_components: vec![0, 2],
        },
        SetCheck {
            name: "K21 edge r21 = s1 = 0",
            chart: K21,
            sample: Box::new(move |r| [r.range(-3.0, 3.0), 0.0, 0.0, 0.0]),
            normal_components: vec![1, 2],
        },
        SetCheck {
            name: "K11 edge r11 = s1 = 0",
            chart: K11,
            sample: Box::new(move |r| [0.0, pos(r), 0.0, 0.0]),
            normal_components: vec![0, 2],
        },
        SetCheck {
            name: "K11 corner line r11 = 1/(2a), s1 = 0",
            chart: K11,
            sample: Box::new(move |r| [1.0 / (2.0 * a), pos(r), 0.0, 0.0]),
            normal_components: vec![0, 2],
        },
        SetCheck {
            name: "K12 corner lines x2 = +-sqrt(2a), s2 = 0",
            chart: K12,
            sample: Box::new(move |r| {
                let sign = if r.next_f64() < 0.5 { -1.0 } else { 1.0 };
                [sign * (2.0 * a).sqrt(), pos(r), 0.0, 0.0]
            }),
            normal_components: vec![0, 2],
        },
        SetCheck {
            name: "K12 plane s2 = 0",
            chart: K12,
            sample: Box::new(move |r| [free(r), pos(r), 0.0, 0.0]),
            normal_components: vec![2],
        },
    ];

    for set in &sets {
        let mut worst = 0.0_f64;
        let mut worst_pt = Vec::new();
        let n = 50;
        for _ in 0..n {
            let c = (set.sample)(rng);
            let pt = ChartPoint::new(set.chart, &c[..set.chart.arity()], params)?;
            let f = eval_chart_field(&pt)?;
            for &i in &set.normal_components {
                if f[i].abs() > worst {
                    worst = f[i].abs();
                    worst_pt = pt.coord_slice().to_vec();
                }
            }
        }
        record(
            checks,
            format!("invariant set: {}", set.name),
            set.chart.name().into(),
            n,
            worst,
            INVARIANT_SET_TOL,
            worst_pt,
        );
    }

    // graph invariance q = e^{-1/eps}: the normal component q' - d/dt e^{-1/eps}
    for (name, chart) in [("ExtK3 graph q = e^{-1/eps}", ExtK3), ("FrakK1 graph rho1 = e^{-1/eps}", FrakK1)] {
        let mut worst = 0.0_f64;
        let mut worst_pt = Vec::new();
        let n = 50;
        for _ in 0..n {
            let eps = rng.range(0.15, 1.0);
            let c = [rng.range(-1.5, 1.5), rng.range(0.05, 1.3), eps, exp_neg_inv(1.0, eps)];
            let pt = ChartPoint::new(chart, &c, params)?;
            let f = eval_chart_field(&pt)?;
            let normal = f[3] - exp_neg_inv(1.0, eps) / (eps * eps) * f[2];
            if normal.abs() > worst {
                worst = normal.abs();
                worst_pt = pt.coord_slice().to_vec();
            }
        }
        record(checks, format!("invariant set: {name}"), chart.name().into(), n, worst, INVARIANT_SET_TOL, worst_pt);
    }

    // parabola invariance inside K22 s2 = 0: normal = y2' + x2 x2' / a
    {
        let mut worst = 0.0_f64;
        let mut worst_pt = Vec::new();
        let n = 50;
        for _ in 0..n {
            let x2 = rng.range(-2.0, 2.0);
            let y2 = -x2 * x2 / (2.0 * a);
            let pt = ChartPoint::new(K22, &[x2, y2, 0.0], params)?;
            let f = eval_chart_field(&pt)?;
            let normal = f[1] + x2 * f[0] / a;
            if normal.abs() > worst {
                worst = normal.abs();
                worst_pt = pt.coord_slice().to_vec();
            }
        }
        record(
            checks,
            "invariant set: K22 parabola y2 = -x2^2/(2a), s2 = 0".into(),
            K22.name().into(),
            n,
            worst,
            INVARIANT_SET_TOL,
            worst_pt,
        );
    }
    Ok(())
}

/// The invariant corner lines map onto the parabola y2 = -x2^2/(2a) when
/// expressed in the chart covering the cylinder waist.
fn check_parabola(params: CorbeillerParams, checks: &mut Vec<CheckResult>) -> Result<()> {
    use ChartId::*;
    let a = params.a;
    let mut worst = 0.0_f64;
    let mut worst_pt = Vec::new();
    let mut n = 0usize;
    for i in 1..=20 {
        let eps1 = 0.1 * i as f64;
        // corner line in the base chart of the vertical cylinder
        let from_k11 = ChartPoint::new(K11, &[1.0 / (2.0 * a), eps1, 0.0], params)?;
        let img = chart_transition(K11, K22, &from_k11)?;
        let m = (img.coords[1] + img.coords[0] * img.coords[0] / (2.0 * a)).abs();
        n += 1;
        if m > worst {
            worst = m;
            worst_pt = from_k11.coord_slice().to_vec();
        }
        // both corner lines seen from the outgoing chart
        for sign in [-1.0, 1.0] {
            let from_k12 = ChartPoint::new(K12, &[sign * (2.0 * a).sqrt(), eps1, 0.0], params)?;
            if sign > 0.0 {
                // the positive corner is visible in K11 coordinates
                let via_k11 = chart_transition(K12, K11, &from_k12)?;
                let img = chart_transition(K11, K22, &via_k11)?;
                let m = (img.coords[1] + img.coords[0] * img.coords[0] / (2.0 * a)).abs();
                n += 1;
                if m > worst {
                    worst = m;
                    worst_pt = from_k12.coord_slice().to_vec();
                }
            }
        }
    }
    record(
        checks,
        "corner lines meet along the invariant parabola in K22".into(),
        "K22".into(),
        n,
        worst,
        PARABOLA_TOL,
        worst_pt,
    );
    Ok(())
}

fn check_corner_resonance(params: CorbeillerParams, checks: &mut Vec<CheckResult>) -> Result<()> {
    for rec in equilibria_catalog(params)? {
        if rec.chart != ChartId::K12 || rec.point.coords[2] != 0.0 {
            continue;
        }
        let e: Vec<f64> = rec.eigenvalues.iter().map(|v| v.0).collect();
        let (dbl, simple) = if (e[0] - e[1]).abs() < 1e-14 { (e[0], e[2]) } else { (e[2], e[0]) };
        let m = (dbl + 2.0 * simple).abs();
        record(
            checks,
            format!("2:1 eigenvalue resonance at corner saddle {:?}", rec.point.coord_slice()),
            rec.chart.name().into(),
            1,
            m,
            1e-12,
            rec.point.coord_slice().to_vec(),
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_suite_passes() {
        let params = CorbeillerParams::new(1.0, 0.25).unwrap();
        let report = run_verification(params, 42).unwrap();
        let failures = report.failures();
        assert!(
            failures.is_empty(),
            "{} failing checks, first: {:?}",
            failures.len(),
            failures.first()
        );
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let params = CorbeillerParams::new(1.0, 0.25).unwrap();
        let a = run_verification(params, 7).unwrap();
        let b = run_verification(params, 7).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn second_parameter_set_passes() {
        let params = CorbeillerParams::new(0.6, 0.4).unwrap();
        let report = run_verification(params, 1).unwrap();
        assert!(report.all_passed(), "failures: {:?}", report.failures().first());
    }
}
