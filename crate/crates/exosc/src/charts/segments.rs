//! The fully desingularized singular-cycle segments expressed in their owning
//! charts. The fast lower-field segment lives in the base plane; everything
//! here covers the slow return along the blown-up switching manifold.

use serde::{Deserialize, Serialize};

use super::{blow_down, ChartId, ChartPoint};
use crate::error::{Error, Result};
use crate::models::{CorbeillerParams, FieldValue, State2};
use crate::ode::{integrate, EventDirection, EventSpec, IntegratorConfig};
use crate::singular::drop_point_corbeiller;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlownUpSegment {
    pub label: String,
    pub chart: ChartId,
    pub points: Vec<ChartPoint>,
}

/// CSV with a chart column: `chart,label,c1,c2,c3,c4` (c4 empty for
/// three-coordinate charts).
pub fn segments_to_csv(segments: &[BlownUpSegment]) -> String {
    let mut out = String::from("chart,label,c1,c2,c3,c4\n");
    for seg in segments {
        for pt in &seg.points {
            let c = pt.coord_slice();
            let c4 = if c.len() > 3 { crate::ode::fmt17(c[3]) } else { String::new() };
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                seg.chart.name(),
                seg.label,
                crate::ode::fmt17(c[0]),
                crate::ode::fmt17(c[1]),
                crate::ode::fmt17(c[2]),
                c4
            ));
        }
    }
    out
}

/// Center-manifold expansion at the entry point of the inner sphere:
/// x1 = -b + a/(1+b) eps1 + O(eps1^2).
pub fn tilde_k1_center_manifold_x1(params: &CorbeillerParams, eps1: f64) -> f64 {
    -params.b + params.a / (1.0 + params.b) * eps1
}

/// Segments of the blown-up singular cycle beyond the fast lower-field orbit:
/// the entry fiber, the climb and traverse of the exponential-regime critical
/// manifold, the outer-sphere and inner-sphere connections, and the two
/// invariant lines on the vertical cylinder.
pub fn blown_up_singular_segments(params: CorbeillerParams) -> Result<Vec<BlownUpSegment>> {
    let (a, b) = (params.a, params.b);
    let x_d = drop_point_corbeiller(&params)?;
    let n = 101usize;
    let lin = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (n - 1) as f64;

    // entry fiber in the scaling chart: x frozen at the drop point
    let gamma2 = BlownUpSegment {
        label: "Gamma2".into(),
        chart: ChartId::K2,
        points: (0..n)
            .map(|i| ChartPoint::new(ChartId::K2, &[x_d, lin(-12.0, 12.0, i), 0.0], params))
            .collect::<Result<_>>()?,
    };

    // climb up the blown-up switching manifold at fixed x
    let r1_top = -x_d / b;
    let gamma3 = BlownUpSegment {
        label: "Gamma3".into(),
        chart: ChartId::FrakK1,
        points: (0..n)
            .map(|i| ChartPoint::new(ChartId::FrakK1, &[x_d, lin(0.0, r1_top, i), 0.0, 0.0], params))
            .collect::<Result<_>>()?,
    };

    // traverse of the critical manifold r1 = -x/b toward x = 0
    let gamma4 = BlownUpSegment {
        label: "Gamma4".into(),
        chart: ChartId::FrakK1,
        points: (0..n)
            .map(|i| {
                let x = lin(x_d, 0.0, i);
                ChartPoint::new(ChartId::FrakK1, &[x, -x / b, 0.0, 0.0], params)
            })
            .collect::<Result<_>>()?,
    };

    // equilibrium line on the outer sphere: r2 = -x2/b at eps = 0
    let gamma5 = BlownUpSegment {
        label: "Gamma5".into(),
        chart: ChartId::CalK2,
        points: (0..n)
            .map(|i| {
                let x2 = lin(-1.0, 0.0, i);
                ChartPoint::new(ChartId::CalK2, &[x2, -x2 / b, 0.0], params)
            })
            .collect::<Result<_>>()?,
    };

    let gamma6 = BlownUpSegment {
        label: "Gamma6".into(),
        chart: ChartId::TildeK2,
        points: shoot_center_manifold(params)?,
    };

    // invariant axis connecting the inner sphere to the vertical cylinder
    let gamma7 = BlownUpSegment {
        label: "Gamma7".into(),
        chart: ChartId::HatK31,
        points: (0..n)
            .map(|i| ChartPoint::new(ChartId::HatK31, &[0.0, lin(0.0, 1.0, i), 0.0], params))
            .collect::<Result<_>>()?,
    };

    // base edge of the vertical cylinder, from the entry saddle to the
    // outgoing resonant saddle
    let gamma8 = BlownUpSegment {
        label: "Gamma8".into(),
        chart: ChartId::K11,
        points: (0..n)
            .map(|i| ChartPoint::new(ChartId::K11, &[lin(0.0, 1.0 / (2.0 * a), i), 0.0, 0.0], params))
            .collect::<Result<_>>()?,
    };

    let segs = vec![gamma2, gamma3, gamma4, gamma5, gamma6, gamma7, gamma8];

    // endpoint consistency: consecutive segments blow down to the same point
    for w in segs.windows(2) {
        let end = blow_down(w[0].points.last().unwrap())?;
        let start = blow_down(w[1].points.first().unwrap())?;
        for i in 0..3 {
            if (end[i] - start[i]).abs() > 1e-6 {
                return Err(Error::IntegrationFailure(format!(
                    "segment junction {} -> {} blows down inconsistently: {end:?} vs {start:?}",
                    w[0].label, w[1].label
                )));
            }
        }
    }
    Ok(segs)
}

/// Shoot the unique center manifold of the inner sphere forward inside the
/// invariant sigma2 = 0 plane until it settles at the origin. A single
/// well-started orbit suffices: the planar flow is forward-trapped there.
/// The field is rescaled by the positive factor 1/(1 + r2), which leaves the
/// orbit unchanged while removing the large-radius stiffness of the start.
fn shoot_center_manifold(params: CorbeillerParams) -> Result<Vec<ChartPoint>> {
    let (a, b) = (params.a, params.b);
    let eps1 = 1e-4;
    let x1 = tilde_k1_center_manifold_x1(&params, eps1);
    // kappa-tilde image in the eps-direction chart: x2 = x1/eps1, r2 = 1/eps1
    let start = State2::new(x1 / eps1, 1.0 / eps1);
    let field = move |s: State2| {
        let h = s.x + b * s.y;
        let scale = 1.0 / (1.0 + s.y.abs());
        FieldValue { dx: (a * s.y - s.x * h) * scale, dy: -2.0 * s.y * h * scale }
    };
    let g = |s: State2| (s.x * s.x + s.y * s.y) - 1e-8;
    let events = [EventSpec { id: 0, g: &g, direction: EventDirection::Falling, terminal: true }];
    let cfg = IntegratorConfig {
        rtol: 1e-10,
        atol: 1e-12,
        h_max: 5.0,
        max_steps: 20_000_000,
        ..Default::default()
    };
    let traj = integrate(&field, start, (0.0, 5e6), &cfg, &events)?;
    if traj.events.is_empty() {
        return Err(Error::IntegrationFailure("center-manifold orbit did not reach the origin".into()));
    }
    let mut pts: Vec<ChartPoint> = Vec::with_capacity(512);
    // thin the dense output to roughly uniform arclength
    let mut last = State2::new(f64::INFINITY, f64::INFINITY);
    let total: f64 = traj.states.windows(2).map(|w| w[0].dist(&w[1])).sum();
    let step = total / 400.0;
    for s in &traj.states {
        if s.dist(&last) >= step {
            pts.push(ChartPoint::new(ChartId::TildeK2, &[s.x, s.y.max(0.0), 0.0], params)?);
            last = *s;
        }
    }
    // keep the located exit state, then close at the degenerate endpoint
    let exit = traj.events.last().unwrap().state;
    pts.push(ChartPoint::new(ChartId::TildeK2, &[exit.x, exit.y.max(0.0), 0.0], params)?);
    pts.push(ChartPoint::new(ChartId::TildeK2, &[0.0, 0.0, 0.0], params)?);
    Ok(pts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lc() -> CorbeillerParams {
        CorbeillerParams::new(1.0, 0.25).unwrap()
    }

    #[test]
    fn center_manifold_slope() {
        let p = lc();
        let slope = (tilde_k1_center_manifold_x1(&p, 1e-3) - tilde_k1_center_manifold_x1(&p, 0.0)) / 1e-3;
        assert!((slope - 0.8).abs() < 1e-12, "slope {slope}");
        assert_eq!(tilde_k1_center_manifold_x1(&p, 0.0), -0.25);
    }

    #[test]
    fn segments_blow_down_consistently() {
        let segs = blown_up_singular_segments(lc()).unwrap();
        assert_eq!(segs.len(), 7);
        let labels: Vec<&str> = segs.iter().map(|s| s.label.as_str()).collect();
        assert_eq!(labels, ["Gamma2", "Gamma3", "Gamma4", "Gamma5", "Gamma6", "Gamma7", "Gamma8"]);

        // the base-edge endpoints both sit at the blow-up center
        let g8 = segs.last().unwrap();
        for pt in [g8.points.first().unwrap(), g8.points.last().unwrap()] {
            let bd = blow_down(pt).unwrap();
            assert_eq!(bd, [0.0, 0.0, 0.0]);
        }

        // the outer-sphere line ends where the inner sphere begins
        let g5 = &segs[3];
        let end = blow_down(g5.points.last().unwrap()).unwrap();
        assert!(end.iter().all(|v| v.abs() < 1e-9), "{end:?}");
    }

    #[test]
    fn center_manifold_reaches_origin_tangent_to_x_axis() {
        let segs = blown_up_singular_segments(lc()).unwrap();
        let g6 = &segs[4];
        assert_eq!(g6.chart, ChartId::TildeK2);
        let last_interior = &g6.points[g6.points.len() - 2];
        let (x2, r2) = (last_interior.coords[0], last_interior.coords[1]);
        assert!(x2 > 0.0, "approach from positive x2, got {x2}");
        assert!(r2 <= x2 * x2 / (lc().a - lc().b * x2) + 1e-9, "tangency region violated");
        // final point is the origin exactly
        let end = g6.points.last().unwrap();
        assert_eq!(end.coord_slice(), &[0.0, 0.0, 0.0]);
    }
}
