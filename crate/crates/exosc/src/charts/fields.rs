//! Desingularized vector fields, one per chart.
//!
//! Boundary exponentials e^{-1/eps}-style are evaluated with an explicit
//! limit branch returning exactly 0 at coordinate 0, matching the smooth
//! one-sided extension of each system. The K2-family fields contain e^{y2}
//! terms; where a chart was stated with the logistic normalization the safe
//! kernels from `models` are used.

use super::{exp_neg_inv, ChartId, ChartPoint};
use crate::error::{Error, Result};
use crate::models::logistic_factor;

/// Right-hand side of the desingularized flow in the chart of `pt`.
/// K32 and HatK32 carry no cataloged field and are rejected.
pub fn eval_chart_field(pt: &ChartPoint) -> Result<Vec<f64>> {
    pt.validate()?;
    let (a, b) = (pt.params.a, pt.params.b);
    let c = pt.coords;
    let out: Vec<f64> = match pt.chart {
        ChartId::K1 => {
            let (x, r1, eps1) = (c[0], c[1], c[2]);
            let e = exp_neg_inv(1.0, eps1);
            let g = x + b * r1 * (2.0 - e);
            vec![r1 * (a - r1), r1 * g, -eps1 * g]
        }
        ChartId::K2 => {
            let (x, y2, r2) = (c[0], c[1], c[2]);
            let sig = logistic_factor(y2);
            vec![
                r2 * (r2 * y2 + a) * sig,
                (-x + 2.0 * b * r2 * y2) * sig - b * r2 * y2 * (1.0 - sig),
                0.0,
            ]
        }
        ChartId::K3 => {
            let (x, r3, eps3) = (c[0], c[1], c[2]);
            let e = exp_neg_inv(1.0, eps3);
            let w = b * r3 + e * (x - 2.0 * b * r3);
            vec![r3 * e * (a + r3), -r3 * w, eps3 * w]
        }
        ChartId::ExtK3 => {
            let (x, r, eps, q) = (c[0], c[1], c[2], c[3]);
            let w = b * r + q * (x - 2.0 * b * r);
            vec![r * eps * q * (a + r), -r * eps * w, eps * eps * w, q * w]
        }
        ChartId::FrakK1 => {
            let (x, r1, eps, rho1) = (c[0], c[1], c[2], c[3]);
            let g = x + b * r1 * (1.0 - 2.0 * rho1);
            vec![
                rho1 * r1 * eps * (a + rho1 * r1),
                -r1 * (1.0 + eps) * g,
                eps * eps * g,
                rho1 * g,
            ]
        }
        ChartId::CalK1 => {
            let (r1, eps, rho1, nu1) = (c[0], c[1], c[2], c[3]);
            let big_g = 1.0 - b * r1 * (1.0 - 2.0 * nu1 * rho1);
            let aa = a + rho1 * r1 * nu1 * nu1;
            vec![
                r1 * ((1.0 + eps) * big_g + rho1 * r1 * eps * aa),
                -eps * eps * big_g,
                -rho1 * (big_g - rho1 * r1 * eps * aa),
                -nu1 * rho1 * r1 * eps * aa,
            ]
        }
        ChartId::CalK2 => {
            let (x2, r2, eps) = (c[0], c[1], c[2]);
            let e = exp_neg_inv(1.0, eps);
            let e2 = exp_neg_inv(2.0, eps);
            let h = x2 + b * r2 * (1.0 - 2.0 * e);
            vec![-x2 * h + r2 * eps * (a + r2 * e2), -r2 * (2.0 + eps) * h, eps * eps * h]
        }
        ChartId::TildeK1 => {
            let (x1, eps1, sigma1) = (c[0], c[1], c[2]);
            let prod = sigma1 * eps1;
            let e = exp_neg_inv(1.0, prod);
            let e2 = exp_neg_inv(2.0, prod);
            let h = x1 + b * (1.0 - 2.0 * e);
            vec![
                eps1 * (a + sigma1 * e2) + x1 * (1.0 + prod) * h,
                2.0 * eps1 * (1.0 + prod) * h,
                -sigma1 * (2.0 + prod) * h,
            ]
        }
        ChartId::TildeK2 => {
            let (x2, r2, sigma2) = (c[0], c[1], c[2]);
            let e = exp_neg_inv(1.0, sigma2);
            let e2 = exp_neg_inv(2.0, sigma2);
            let h = x2 + b * r2 * (1.0 - 2.0 * e);
            vec![
                r2 * (a + sigma2 * r2 * e2) - x2 * (1.0 + sigma2) * h,
                -2.0 * r2 * (1.0 + sigma2) * h,
                sigma2 * sigma2 * h,
            ]
        }
        ChartId::HatK31 => {
            let (rhat1, sigma, shat1) = (c[0], c[1], c[2]);
            let e = exp_neg_inv(1.0, sigma);
            let e2 = exp_neg_inv(2.0, sigma);
            let aa = a + sigma * rhat1 * shat1 * shat1 * e2;
            let h = 1.0 + b * rhat1 * shat1 * (1.0 - 2.0 * e);
            vec![
                -2.0 * rhat1 * rhat1 * aa,
                sigma * sigma * h,
                -shat1 * (-rhat1 * aa + (1.0 + sigma) * h),
            ]
        }
        ChartId::K31 => {
            let (r31, eps3, s1) = (c[0], c[1], c[2]);
            let e = exp_neg_inv(1.0, eps3);
            vec![
                -r31
                    * (b * r31 * s1
                        + e * (1.0 - 2.0 * b * r31 * s1 + 2.0 * a * r31 + 2.0 * r31 * r31 * s1 * s1)),
                eps3 * (b * r31 * s1 + e * (1.0 - 2.0 * b * r31 * s1)),
                s1 * r31 * e * (a + s1 * s1 * r31),
            ]
        }
        ChartId::K22 => {
            let (x2, y2, s2) = (c[0], c[1], c[2]);
            vec![a + s2 * s2 * y2, -x2 + b * s2 * y2 * (2.0 - y2.exp()), 0.0]
        }
        ChartId::K21 => {
            let (y2, r21, s1) = (c[0], c[1], c[2]);
            let inner = a + s1 * s1 * r21 * y2;
            vec![
                -1.0 + b * s1 * r21 * y2 * (2.0 - y2.exp()),
                -2.0 * r21 * r21 * inner,
                s1 * r21 * inner,
            ]
        }
        ChartId::K12 => {
            let (x2, eps1, s2) = (c[0], c[1], c[2]);
            let e = exp_neg_inv(1.0, eps1);
            let g = x2 + b * s2 * (2.0 - e);
            vec![a - s2 * s2 - 0.5 * x2 * g, -eps1 * g, 0.5 * s2 * g]
        }
        ChartId::K11 => {
            let (r11, eps1, s1) = (c[0], c[1], c[2]);
            let e = exp_neg_inv(1.0, eps1);
            let w = 1.0 + b * s1 * r11 * (2.0 - e);
            vec![
                r11 * (w - 2.0 * r11 * (a - r11 * s1 * s1)),
                -eps1 * w,
                s1 * r11 * (a - r11 * s1 * s1),
            ]
        }
        ChartId::K32 | ChartId::HatK32 => {
            return Err(Error::InvalidChartPoint(format!(
                "{} has no cataloged desingularized field",
                pt.chart.name()
            )));
        }
    };
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidChartPoint(format!(
            "{} field not finite at {:?}",
            pt.chart.name(),
            pt.coord_slice()
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::CorbeillerParams;

    fn lc() -> CorbeillerParams {
        CorbeillerParams::new(1.0, 0.25).unwrap()
    }

    #[test]
    fn frak_k1_line_of_equilibria() {
        let pt = ChartPoint::new(ChartId::FrakK1, &[-2.0, 0.0, 0.0, 0.0], lc()).unwrap();
        let f = eval_chart_field(&pt).unwrap();
        assert_eq!(f, vec![0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn k12_outgoing_saddle_is_equilibrium() {
        let a = 1.0_f64;
        let pt = ChartPoint::new(ChartId::K12, &[(2.0 * a).sqrt(), 0.0, 0.0], lc()).unwrap();
        let f = eval_chart_field(&pt).unwrap();
        for v in f {
            assert!(v.abs() < 1e-15, "residual {v}");
        }
    }

    #[test]
    fn tilde_k2_example_vector() {
        let pt = ChartPoint::new(ChartId::TildeK2, &[1.0, 1.0, 0.0], lc()).unwrap();
        let f = eval_chart_field(&pt).unwrap();
        assert!((f[0] - (-0.25)).abs() < 1e-15);
        assert!((f[1] - (-2.5)).abs() < 1e-15);
        assert_eq!(f[2], 0.0);
    }

    #[test]
    fn k1_recovers_lower_pws_flow_scaled() {
        // in eps1 = 0, r1 > 0 the flow is the lower field times r1 under y = -r1
        let (x, r1) = (0.7, 0.4);
        let pt = ChartPoint::new(ChartId::K1, &[x, r1, 0.0], lc()).unwrap();
        let f = eval_chart_field(&pt).unwrap();
        let y = -r1;
        let lower = (y + 1.0, -x + 2.0 * 0.25 * y); // (dx, dy)
        assert!((f[0] - r1 * lower.0).abs() < 1e-15);
        // r1' = -y' = -r1 * dy
        assert!((f[1] - (-r1) * lower.1).abs() < 1e-15);
        assert_eq!(f[2], 0.0);
    }

    #[test]
    fn k3_recovers_upper_pws_flow_scaled() {
        // in eps3 = 0 the e^{-1/eps3} branch kills every term except -b r3^2
        let pt = ChartPoint::new(ChartId::K3, &[0.3, 0.5, 0.0], lc()).unwrap();
        let f = eval_chart_field(&pt).unwrap();
        assert_eq!(f[0], 0.0);
        assert!((f[1] - (-0.25 * 0.25)).abs() < 1e-15);
        assert_eq!(f[2], 0.0);
    }

    #[test]
    fn unsupported_charts_rejected() {
        let pt = ChartPoint::new(ChartId::K32, &[0.1, 0.2, 0.3], lc()).unwrap();
        assert!(eval_chart_field(&pt).is_err());
        let pt = ChartPoint::new(ChartId::HatK32, &[0.1, 0.2, 0.3], lc()).unwrap();
        assert!(eval_chart_field(&pt).is_err());
    }
}
