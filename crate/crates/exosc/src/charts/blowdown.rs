//! Blow-down of chart points to the original variables (x, y, eps).
//!
//! Each map is the literal composition of the chart definitions; no separate
//! per-chart formula is maintained, so transition maps and blow-downs cannot
//! drift apart. Charts reached through the exponential extension blow down
//! via the invariant graph q = e^{-1/eps}.

use super::{exp_neg_inv, ChartId, ChartPoint};
use crate::error::Result;

/// Original-variable image (x, y, eps) of a chart point.
pub fn blow_down(pt: &ChartPoint) -> Result<[f64; 3]> {
    pt.validate()?;
    let c = pt.coords;
    Ok(match pt.chart {
        ChartId::K1 => [c[0], -c[1], c[1] * c[2]],
        ChartId::K2 => [c[0], c[2] * c[1], c[2]],
        ChartId::K3 => [c[0], c[1], c[1] * c[2]],
        // (x, r, eps3, q): y = r, original eps = r eps3
        ChartId::ExtK3 => [c[0], c[1], c[1] * c[2]],
        // r = rho1 r1, so y = rho1 r1 and eps = rho1 r1 eps3
        ChartId::FrakK1 => [c[0], c[3] * c[1], c[3] * c[1] * c[2]],
        ChartId::CalK1 => {
            let (r1, eps, rho1, nu1) = (c[0], c[1], c[2], c[3]);
            let y = nu1 * nu1 * rho1 * r1;
            [-nu1, y, y * eps]
        }
        ChartId::CalK2 => {
            let (x2, r2, eps) = (c[0], c[1], c[2]);
            let nu2 = exp_neg_inv(1.0, eps);
            let y = nu2 * nu2 * r2;
            [nu2 * x2, y, y * eps]
        }
        ChartId::TildeK1 => {
            let (x1, eps1, sigma1) = (c[0], c[1], c[2]);
            let eps3 = sigma1 * eps1;
            let nu2 = exp_neg_inv(1.0, eps3);
            let y = nu2 * nu2 * sigma1;
            [nu2 * sigma1 * x1, y, y * eps3]
        }
        ChartId::TildeK2 => {
            let (x2, r2, sigma2) = (c[0], c[1], c[2]);
            let nu2 = exp_neg_inv(1.0, sigma2);
            let y = nu2 * nu2 * sigma2 * r2;
            [nu2 * sigma2 * x2, y, y * sigma2]
        }
        ChartId::HatK31 => {
            let (rhat1, sigma, shat1) = (c[0], c[1], c[2]);
            let nu2 = exp_neg_inv(1.0, sigma);
            let y = nu2 * nu2 * sigma * shat1 * shat1 * rhat1;
            [nu2 * sigma * shat1, y, y * sigma]
        }
        ChartId::HatK32 => {
            let (xhat2, sigma, shat2) = (c[0], c[1], c[2]);
            let nu2 = exp_neg_inv(1.0, sigma);
            let y = nu2 * nu2 * sigma * shat2 * shat2;
            [nu2 * sigma * shat2 * xhat2, y, y * sigma]
        }
        ChartId::K11 => {
            let (r11, eps1, s1) = (c[0], c[1], c[2]);
            [s1, -s1 * s1 * r11, s1 * s1 * r11 * eps1]
        }
        ChartId::K12 => {
            let (x2, eps1, s2) = (c[0], c[1], c[2]);
            [s2 * x2, -s2 * s2, s2 * s2 * eps1]
        }
        ChartId::K21 => {
            let (y2, r21, s1) = (c[0], c[1], c[2]);
            [s1, s1 * s1 * r21 * y2, s1 * s1 * r21]
        }
        ChartId::K22 => {
            let (x2, y2, s2) = (c[0], c[1], c[2]);
            [s2 * x2, s2 * s2 * y2, s2 * s2]
        }
        ChartId::K31 => {
            let (r31, eps3, s1) = (c[0], c[1], c[2]);
            [s1, s1 * s1 * r31, s1 * s1 * r31 * eps3]
        }
        ChartId::K32 => {
            let (x2, eps3, s2) = (c[0], c[1], c[2]);
            [s2 * x2, s2 * s2, s2 * s2 * eps3]
        }
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
    fn k2_example() {
        let pt = ChartPoint::new(ChartId::K2, &[0.3, -2.0, 0.05], lc()).unwrap();
        let b = blow_down(&pt).unwrap();
        assert_eq!(b[0], 0.3);
        assert!((b[1] - (-0.1)).abs() < 1e-15);
        assert!((b[2] - 0.05).abs() < 1e-15);
    }

    #[test]
    fn all_radii_zero_hits_blowup_center() {
        for (chart, coords) in [
            (ChartId::K1, vec![0.4, 0.0, 0.0]),
            (ChartId::K3, vec![0.4, 0.0, 0.0]),
            (ChartId::FrakK1, vec![0.4, 0.0, 0.0, 0.0]),
            (ChartId::CalK1, vec![0.5, 0.0, 0.3, 0.0]),
            (ChartId::CalK2, vec![0.5, 0.3, 0.0]),
            (ChartId::TildeK2, vec![0.5, 0.3, 0.0]),
            (ChartId::HatK31, vec![0.5, 0.0, 0.3]),
            (ChartId::K11, vec![0.5, 0.3, 0.0]),
            (ChartId::K22, vec![0.5, 0.3, 0.0]),
        ] {
            let pt = ChartPoint::new(chart, &coords, lc()).unwrap();
            let b = blow_down(&pt).unwrap();
            assert_eq!(b[1], 0.0, "{chart:?} y");
            assert_eq!(b[2], 0.0, "{chart:?} eps");
        }
    }
}
