//! Transition maps between overlapping charts.
//!
//! `transition_raw` is the bare coordinate formula (used for finite-difference
//! pushforwards, where probe points may sit slightly off the strict overlap);
//! `chart_transition` adds the overlap-domain checks. Maps whose source must
//! lie on the invariant graph q = e^{-1/eps} check that membership, since the
//! target chart represents only that slice.

use super::{exp_neg_inv, ChartId, ChartPoint};
use crate::error::{Error, Result};

/// Relative tolerance for membership in the invariant exponential graph.
const ON_GRAPH_RTOL: f64 = 1e-9;

/// Every supported ordered transition (from, to).
pub fn transition_pairs() -> Vec<(ChartId, ChartId)> {
    use ChartId::*;
    let invertible = [
        (K2, K1),
        (K3, K2),
        (K3, ExtK3),
        (FrakK1, ExtK3),
        (CalK1, FrakK1),
        (CalK2, FrakK1),
        (CalK1, CalK2),
        (TildeK1, CalK2),
        (TildeK2, CalK2),
        (TildeK1, TildeK2),
        (HatK31, TildeK2),
        (HatK32, TildeK2),
        (HatK32, HatK31),
        (HatK31, K31),
        (HatK32, K32),
        (K12, K11),
        (K21, K11),
        (K22, K11),
        (K21, K12),
        (K22, K21),
        (K31, K21),
        (K32, K21),
        (K31, K22),
        (K32, K31),
        (K11, K1),
        (K12, K1),
        (K21, K2),
        (K22, K2),
        (K31, K3),
        (K32, K3),
    ];
    let mut out = Vec::with_capacity(invertible.len() * 2);
    for (f, t) in invertible {
        out.push((f, t));
        out.push((t, f));
    }
    out
}

/// Map a chart point into another chart. Errors with `OutsideOverlap` when
/// the point violates the transition's domain.
pub fn chart_transition(from: ChartId, to: ChartId, pt: &ChartPoint) -> Result<ChartPoint> {
    if pt.chart != from {
        return Err(Error::InvalidChartPoint(format!(
            "point is in chart {}, not {}",
            pt.chart.name(),
            from.name()
        )));
    }
    pt.validate()?;
    domain_check(from, to, &pt.coords)?;
    let coords = transition_raw(from, to, &pt.coords).ok_or_else(|| {
        Error::OutsideOverlap(format!("no documented transition {} -> {}", from.name(), to.name()))
    })?;
    ChartPoint::new(to, &coords[..to.arity()], pt.params)
}

fn outside(msg: &str) -> Error {
    Error::OutsideOverlap(msg.into())
}

fn on_graph(value: f64, eps: f64) -> bool {
    let target = exp_neg_inv(1.0, eps);
    (value - target).abs() <= ON_GRAPH_RTOL * target.abs().max(value.abs()).max(1e-300)
}

fn domain_check(from: ChartId, to: ChartId, c: &[f64; 4]) -> Result<()> {
    use ChartId::*;
    let req = |ok: bool, msg: &str| if ok { Ok(()) } else { Err(outside(msg)) };
    match (from, to) {
        (K2, K1) => req(c[1] < 0.0, "requires y2 < 0"),
        (K1, K2) => req(c[2] > 0.0, "requires eps1 > 0"),
        (K3, K2) => req(c[2] > 0.0, "requires eps3 > 0"),
        (K2, K3) => req(c[1] > 0.0, "requires y2 > 0"),
        (K3, ExtK3) => Ok(()),
        (ExtK3, K3) => req(on_graph(c[3], c[2]), "requires q = e^{-1/eps}"),
        (FrakK1, ExtK3) => Ok(()),
        (ExtK3, FrakK1) => req(c[3] > 0.0, "requires q > 0"),
        (CalK1, FrakK1) => Ok(()),
        (FrakK1, CalK1) => req(c[0] < 0.0, "requires x < 0"),
        (CalK2, FrakK1) => req(c[2] > 0.0, "requires eps > 0"),
        (FrakK1, CalK2) => {
            req(c[3] > 0.0, "requires rho1 > 0")?;
            req(on_graph(c[3], c[2]), "requires rho1 = e^{-1/eps}")
        }
        (CalK1, CalK2) => {
            req(c[2] > 0.0, "requires rho1 > 0")?;
            req(on_graph(c[2] * c[3], c[1]), "requires nu1 rho1 = e^{-1/eps}")
        }
        (CalK2, CalK1) => req(c[0] < 0.0 && c[2] > 0.0, "requires x2 < 0 and eps > 0"),
        (TildeK1, CalK2) => Ok(()),
        (CalK2, TildeK1) => req(c[1] > 0.0, "requires r2 > 0"),
        (TildeK2, CalK2) => Ok(()),
        (CalK2, TildeK2) => req(c[2] > 0.0, "requires eps > 0"),
        (TildeK1, TildeK2) => req(c[1] > 0.0, "requires eps1 > 0"),
        (TildeK2, TildeK1) => req(c[1] > 0.0, "requires r2 > 0"),
        (HatK31, TildeK2) => Ok(()),
        (TildeK2, HatK31) => req(c[0] > 0.0, "requires x2 > 0"),
        (HatK32, TildeK2) => Ok(()),
        (TildeK2, HatK32) => req(c[1] > 0.0, "requires r2 > 0"),
        (HatK32, HatK31) => req(c[0] > 0.0, "requires xhat2 > 0"),
        (HatK31, HatK32) => req(c[0] > 0.0, "requires rhat1 > 0"),
        (HatK31, K31) => req(c[1] > 0.0, "requires sigma > 0"),
        (K31, HatK31) => req(c[1] > 0.0, "requires eps3 > 0"),
        (HatK32, K32) => req(c[1] > 0.0, "requires sigma > 0"),
        (K32, HatK32) => req(c[1] > 0.0, "requires eps3 > 0"),
        (K12, K11) => req(c[0] > 0.0, "requires x2 > 0"),
        (K11, K12) => req(c[0] > 0.0, "requires r11 > 0"),
        (K21, K11) => req(c[0] < 0.0, "requires y2 < 0"),
        (K11, K21) => req(c[1] > 0.0, "requires eps1 > 0"),
        (K22, K11) => req(c[0] > 0.0 && c[1] < 0.0, "requires x2 > 0 and y2 < 0"),
        (K11, K22) => req(c[0] > 0.0 && c[1] > 0.0, "requires r11 > 0 and eps1 > 0"),
        (K21, K12) => req(c[0] < 0.0 && c[1] > 0.0, "requires y2 < 0 and r21 > 0"),
        (K12, K21) => req(c[0] > 0.0 && c[1] > 0.0, "requires x2 > 0 and eps1 > 0"),
        (K22, K21) => req(c[0] > 0.0, "requires x2 > 0"),
        (K21, K22) => req(c[1] > 0.0, "requires r21 > 0"),
        (K31, K21) => req(c[1] > 0.0, "requires eps3 > 0"),
        (K21, K31) => req(c[0] > 0.0, "requires y2 > 0"),
        (K32, K21) => req(c[0] > 0.0 && c[1] > 0.0, "requires x2 > 0 and eps3 > 0"),
        (K21, K32) => req(c[0] > 0.0 && c[1] > 0.0, "requires y2 > 0 and r21 > 0"),
        (K31, K22) => req(c[0] > 0.0 && c[1] > 0.0, "requires r31 > 0 and eps3 > 0"),
        (K22, K31) => req(c[0] > 0.0 && c[1] > 0.0, "requires x2 > 0 and y2 > 0"),
        (K32, K31) => req(c[0] > 0.0, "requires x2 > 0"),
        (K31, K32) => req(c[0] > 0.0, "requires r31 > 0"),
        (K11, K1) | (K12, K1) | (K21, K2) | (K22, K2) | (K31, K3) | (K32, K3) => Ok(()),
        (K1, K11) => req(c[0] > 0.0, "requires x > 0"),
        (K1, K12) => req(c[1] > 0.0, "requires r1 > 0"),
        (K2, K21) => req(c[0] > 0.0, "requires x > 0"),
        (K2, K22) => req(c[2] > 0.0, "requires r2 > 0"),
        (K3, K31) => req(c[0] > 0.0, "requires x > 0"),
        (K3, K32) => req(c[1] > 0.0, "requires r3 > 0"),
        _ => Ok(()),
    }
}

/// Bare transition formulas. Returns None for undocumented pairs.
pub(crate) fn transition_raw(from: ChartId, to: ChartId, c: &[f64; 4]) -> Option<[f64; 4]> {
    use ChartId::*;
    let z = 0.0;
    Some(match (from, to) {
        // first cylindrical blow-up
        (K2, K1) => [c[0], -c[2] * c[1], -1.0 / c[1], z],
        (K1, K2) => [c[0], -1.0 / c[2], c[1] * c[2], z],
        (K3, K2) => [c[0], 1.0 / c[2], c[1] * c[2], z],
        (K2, K3) => [c[0], c[2] * c[1], 1.0 / c[1], z],
        // exponential extension
        (K3, ExtK3) => [c[0], c[1], c[2], exp_neg_inv(1.0, c[2])],
        (ExtK3, K3) => [c[0], c[1], c[2], z],
        (FrakK1, ExtK3) => [c[0], c[3] * c[1], c[2], c[3]],
        (ExtK3, FrakK1) => [c[0], c[1] / c[3], c[2], c[3]],
        // cylinder-of-spheres blow-up in FrakK1
        (CalK1, FrakK1) => [-c[3], c[3] * c[0], c[1], c[3] * c[2]],
        (FrakK1, CalK1) => [c[1] / -c[0], c[2], c[3] / -c[0], -c[0]],
        (CalK2, FrakK1) => {
            let nu2 = exp_neg_inv(1.0, c[2]);
            [nu2 * c[0], nu2 * c[1], c[2], nu2]
        }
        (FrakK1, CalK2) => [c[0] / c[3], c[1] / c[3], c[2], z],
        (CalK1, CalK2) => [-1.0 / c[2], c[0] / c[2], c[1], z],
        (CalK2, CalK1) => [-c[1] / c[0], c[2], -1.0 / c[0], -exp_neg_inv(1.0, c[2]) * c[0]],
        // spherical blow-up of the sphere-family origin
        (TildeK1, CalK2) => [c[2] * c[0], c[2], c[2] * c[1], z],
        (CalK2, TildeK1) => [c[0] / c[1], c[2] / c[1], c[1], z],
        (TildeK2, CalK2) => [c[2] * c[0], c[2] * c[1], c[2], z],
        (CalK2, TildeK2) => [c[0] / c[2], c[1] / c[2], c[2], z],
        (TildeK1, TildeK2) => [c[0] / c[1], 1.0 / c[1], c[2] * c[1], z],
        (TildeK2, TildeK1) => [c[0] / c[1], 1.0 / c[1], c[2] * c[1], z],
        // weighted blow-up near the inner-sphere exit point
        (HatK31, TildeK2) => [c[2], c[2] * c[2] * c[0], c[1], z],
        (TildeK2, HatK31) => [c[1] / (c[0] * c[0]), c[2], c[0], z],
        (HatK32, TildeK2) => [c[2] * c[0], c[2] * c[2], c[1], z],
        (TildeK2, HatK32) => [c[0] / c[1].sqrt(), c[2], c[1].sqrt(), z],
        (HatK32, HatK31) => [1.0 / (c[0] * c[0]), c[1], c[2] * c[0], z],
        (HatK31, HatK32) => [1.0 / c[0].sqrt(), c[1], c[2] * c[0].sqrt(), z],
        // matching between the exponential and algebraic regimes
        (HatK31, K31) => [c[0] / c[1], c[1], c[1] * exp_neg_inv(1.0, c[1]) * c[2], z],
        (K31, HatK31) => [c[0] * c[1], c[1], c[2] * (1.0 / c[1]).exp() / c[1], z],
        (HatK32, K32) => [c[1].sqrt() * c[0], c[1], c[1].sqrt() * exp_neg_inv(1.0, c[1]) * c[2], z],
        (K32, HatK32) => [c[0] / c[1].sqrt(), c[1], c[2] * (1.0 / c[1]).exp() / c[1].sqrt(), z],
        // vertical cylinder over the switching circle
        (K12, K11) => [1.0 / (c[0] * c[0]), c[1], c[2] * c[0], z],
        (K11, K12) => [1.0 / c[0].sqrt(), c[1], c[2] * c[0].sqrt(), z],
        (K21, K11) => [-c[1] * c[0], -1.0 / c[0], c[2], z],
        (K11, K21) => [-1.0 / c[1], c[0] * c[1], c[2], z],
        (K22, K11) => [-c[1] / (c[0] * c[0]), -1.0 / c[1], c[2] * c[0], z],
        (K11, K22) => [1.0 / (c[0] * c[1]).sqrt(), -1.0 / c[1], c[2] * (c[0] * c[1]).sqrt(), z],
        (K21, K12) => {
            let m = -c[1] * c[0]; // -r21 y2 > 0
            [1.0 / m.sqrt(), -1.0 / c[0], c[2] * m.sqrt(), z]
        }
        (K12, K21) => [-1.0 / c[1], c[1] / (c[0] * c[0]), c[2] * c[0], z],
        (K22, K21) => [c[1], 1.0 / (c[0] * c[0]), c[2] * c[0], z],
        (K21, K22) => [1.0 / c[1].sqrt(), c[0], c[2] * c[1].sqrt(), z],
        (K31, K21) => [1.0 / c[1], c[0] * c[1], c[2], z],
        (K21, K31) => [c[1] * c[0], 1.0 / c[0], c[2], z],
        (K32, K21) => [1.0 / c[1], c[1] / (c[0] * c[0]), c[2] * c[0], z],
        (K21, K32) => {
            let m = c[1] * c[0]; // r21 y2 > 0
            [1.0 / m.sqrt(), 1.0 / c[0], c[2] * m.sqrt(), z]
        }
        (K31, K22) => {
            let m = c[0] * c[1]; // r31 eps3 > 0
            [1.0 / m.sqrt(), 1.0 / c[1], c[2] * m.sqrt(), z]
        }
        (K22, K31) => [c[1] / (c[0] * c[0]), 1.0 / c[1], c[2] * c[0], z],
        (K32, K31) => [1.0 / (c[0] * c[0]), c[1], c[2] * c[0], z],
        (K31, K32) => [1.0 / c[0].sqrt(), c[1], c[2] * c[0].sqrt(), z],
        // vertical cylinder charts against the base charts they refine
        (K11, K1) => [c[2], c[2] * c[2] * c[0], c[1], z],
        (K1, K11) => [c[1] / (c[0] * c[0]), c[2], c[0], z],
        (K12, K1) => [c[2] * c[0], c[2] * c[2], c[1], z],
        (K1, K12) => [c[0] / c[1].sqrt(), c[2], c[1].sqrt(), z],
        (K21, K2) => [c[2], c[0], c[2] * c[2] * c[1], z],
        (K2, K21) => [c[1], c[2] / (c[0] * c[0]), c[0], z],
        (K22, K2) => [c[2] * c[0], c[1], c[2] * c[2], z],
        (K2, K22) => [c[0] / c[2].sqrt(), c[1], c[2].sqrt(), z],
        (K31, K3) => [c[2], c[2] * c[2] * c[0], c[1], z],
        (K3, K31) => [c[1] / (c[0] * c[0]), c[2], c[0], z],
        (K32, K3) => [c[2] * c[0], c[2] * c[2], c[1], z],
        (K3, K32) => [c[0] / c[1].sqrt(), c[2], c[1].sqrt(), z],
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::CorbeillerParams;

    fn lc() -> CorbeillerParams {
        CorbeillerParams::new(1.0, 0.25).unwrap()
    }

    #[test]
    fn k2_to_k1_example() {
        // (r2, y2) = (0.2, -4) maps to r1 = 0.8, eps1 = 0.25
        let pt = ChartPoint::new(ChartId::K2, &[0.3, -4.0, 0.2], lc()).unwrap();
        let out = chart_transition(ChartId::K2, ChartId::K1, &pt).unwrap();
        assert!((out.coords[1] - 0.8).abs() < 1e-15);
        assert!((out.coords[2] - 0.25).abs() < 1e-15);
        assert_eq!(out.coords[0], 0.3);
    }

    #[test]
    fn k2_to_k1_outside_overlap() {
        let pt = ChartPoint::new(ChartId::K2, &[0.3, 2.0, 0.2], lc()).unwrap();
        assert!(matches!(
            chart_transition(ChartId::K2, ChartId::K1, &pt),
            Err(Error::OutsideOverlap(_))
        ));
    }

    #[test]
    fn roundtrip_k1_k2() {
        let pt = ChartPoint::new(ChartId::K1, &[0.3, 0.8, 0.25], lc()).unwrap();
        let there = chart_transition(ChartId::K1, ChartId::K2, &pt).unwrap();
        let back = chart_transition(ChartId::K2, ChartId::K1, &there).unwrap();
        for i in 0..3 {
            assert!((back.coords[i] - pt.coords[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn exp_to_alg_consistent_with_blowdown() {
        // sigma = 0.5, rhat1 = 1, shat1 = 1
        let pt = ChartPoint::new(ChartId::HatK31, &[1.0, 0.5, 1.0], lc()).unwrap();
        let img = chart_transition(ChartId::HatK31, ChartId::K31, &pt).unwrap();
        assert!((img.coords[0] - 2.0).abs() < 1e-15, "r31");
        assert!((img.coords[1] - 0.5).abs() < 1e-15, "eps3");
        assert!((img.coords[2] - 0.5 * (-2.0_f64).exp()).abs() < 1e-16, "s1");
        let a = super::super::blow_down(&pt).unwrap();
        let b = super::super::blow_down(&img).unwrap();
        for i in 0..3 {
            assert!((a[i] - b[i]).abs() <= 1e-15 * a[i].abs().max(1.0), "{a:?} vs {b:?}");
        }
    }
}
