//! Equilibria of the chart fields with their analytic eigenvalues, plus the
//! finite-difference Jacobian machinery used to verify every record.
//!
//! Eigenvalues are stated for the fields exactly as implemented in
//! `fields.rs`. Where a doubled eigenvalue pairs with a simple one of half
//! the magnitude and opposite sign (the saddles q_i, q_o on the vertical
//! cylinder), the records carry the exact 2:1 resonance lambda_double =
//! -2 lambda_simple; the saddle q_s nearby carries the 1:-1 pair.

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use super::{eval_chart_field, ChartId, ChartPoint};
use crate::error::Result;
use crate::models::CorbeillerParams;

pub type C64 = Complex<f64>;

/// One cataloged equilibrium: location, analytic spectrum, classification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriumRecord {
    pub chart: ChartId,
    pub point: ChartPoint,
    /// Analytic eigenvalues as (re, im) pairs, sorted by (re, im).
    pub eigenvalues: Vec<(f64, f64)>,
    pub classification: String,
}

impl EquilibriumRecord {
    fn new(
        chart: ChartId,
        coords: &[f64],
        params: CorbeillerParams,
        eigs: &[C64],
        classification: &str,
    ) -> Result<Self> {
        let mut e: Vec<(f64, f64)> = eigs.iter().map(|z| (z.re, z.im)).collect();
        sort_eigs(&mut e);
        Ok(Self {
            chart,
            point: ChartPoint::new(chart, coords, params)?,
            eigenvalues: e,
            classification: classification.into(),
        })
    }

    pub fn analytic_spectrum(&self) -> Vec<C64> {
        self.eigenvalues.iter().map(|&(re, im)| C64::new(re, im)).collect()
    }

    /// Max absolute mismatch between the analytic spectrum and the
    /// finite-difference Jacobian spectrum, both sorted by (re, im).
    pub fn spectrum_mismatch(&self) -> Result<f64> {
        let numeric = numeric_spectrum(&self.point)?;
        let analytic = self.analytic_spectrum();
        let mut num: Vec<(f64, f64)> = numeric.iter().map(|z| (z.re, z.im)).collect();
        sort_eigs(&mut num);
        let mut worst = 0.0_f64;
        for (a, n) in self.eigenvalues.iter().zip(&num) {
            let d = ((a.0 - n.0).powi(2) + (a.1 - n.1).powi(2)).sqrt();
            worst = worst.max(d);
        }
        if analytic.len() != num.len() {
            worst = f64::INFINITY;
        }
        Ok(worst)
    }
}

pub fn sort_eigs(e: &mut [(f64, f64)]) {
    e.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.partial_cmp(&b.1).unwrap()));
}

/// Serializable catalog entry carrying both spectra and their mismatch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub chart: ChartId,
    pub point: ChartPoint,
    pub classification: String,
    pub analytic_eigs: Vec<(f64, f64)>,
    pub numeric_eigs: Vec<(f64, f64)>,
    pub max_mismatch: f64,
}

/// The full catalog with finite-difference spectra evaluated, ready to dump.
pub fn catalog_entries(params: CorbeillerParams) -> Result<Vec<CatalogEntry>> {
    equilibria_catalog(params)?
        .into_iter()
        .map(|rec| {
            let numeric = numeric_spectrum(&rec.point)?;
            let mut num: Vec<(f64, f64)> = numeric.iter().map(|z| (z.re, z.im)).collect();
            sort_eigs(&mut num);
            let max_mismatch = rec.spectrum_mismatch()?;
            Ok(CatalogEntry {
                chart: rec.chart,
                point: rec.point,
                classification: rec.classification.clone(),
                analytic_eigs: rec.eigenvalues.clone(),
                numeric_eigs: num,
                max_mismatch,
            })
        })
        .collect()
}

/// Central-difference Jacobian of the chart field, falling back to one-sided
/// second-order differences where a nonnegative coordinate sits near its
/// boundary (the exponential branches are one-sided there).
pub fn numeric_jacobian(pt: &ChartPoint) -> Result<DMatrix<f64>> {
    let n = pt.chart.arity();
    let mask = pt.chart.nonneg_mask();
    let h = 1e-4;
    let mut jac = DMatrix::zeros(n, n);
    for j in 0..n {
        let at = |v: f64| -> Result<Vec<f64>> {
            let mut q = *pt;
            q.coords[j] = v;
            eval_chart_field(&q)
        };
        let x = pt.coords[j];
        let col: Vec<f64> = if mask[j] && x - h < 0.0 {
            let f0 = at(x)?;
            let f1 = at(x + h)?;
            let f2 = at(x + 2.0 * h)?;
            (0..n).map(|i| (-3.0 * f0[i] + 4.0 * f1[i] - f2[i]) / (2.0 * h)).collect()
        } else {
            let fm = at(x - h)?;
            let fp = at(x + h)?;
            (0..n).map(|i| (fp[i] - fm[i]) / (2.0 * h)).collect()
        };
        for i in 0..n {
            jac[(i, j)] = col[i];
        }
    }
    Ok(jac)
}

/// Eigenvalues of the finite-difference Jacobian.
pub fn numeric_spectrum(pt: &ChartPoint) -> Result<Vec<C64>> {
    let jac = numeric_jacobian(pt)?;
    Ok(jac.complex_eigenvalues().iter().copied().collect())
}

/// All cataloged equilibria of the chart fields for the given parameters.
pub fn equilibria_catalog(params: CorbeillerParams) -> Result<Vec<EquilibriumRecord>> {
    let (a, b) = (params.a, params.b);
    let z = C64::new(0.0, 0.0);
    let re = |v: f64| C64::new(v, 0.0);
    let focus = C64::new(b, (1.0 - b * b).sqrt());
    let mut recs = Vec::new();

    // K1: saddles along the line of equilibria in {r1 = eps1 = 0}, and the
    // focus of the lower subsystem in the invariant eps1 = 0 plane.
    for x in [-1.0, 1.0] {
        recs.push(EquilibriumRecord::new(
            ChartId::K1,
            &[x, 0.0, 0.0],
            params,
            &[z, re(x), re(-x)],
            "line of saddle-type equilibria on the entry edge",
        )?);
    }
    recs.push(EquilibriumRecord::new(
        ChartId::K1,
        &[-2.0 * b * a, a, 0.0],
        params,
        &[a * focus, a * focus.conj(), z],
        "unstable focus inside the invariant eps1 = 0 plane",
    )?);

    // K3: both exit-edge lines are fully non-hyperbolic.
    for coords in [[-1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.5]] {
        recs.push(EquilibriumRecord::new(
            ChartId::K3,
            &coords,
            params,
            &[z, z, z],
            "fully non-hyperbolic line (exponential loss of hyperbolicity)",
        )?);
    }

    // FrakK1: the critical manifold regained by the exponential extension.
    for (x, rho1) in [(-1.0, 0.0), (-0.5, 0.0), (-1.0, 0.2)] {
        let r1 = -x / (b * (1.0 - 2.0 * rho1));
        recs.push(EquilibriumRecord::new(
            ChartId::FrakK1,
            &[x, r1, 0.0, rho1],
            params,
            &[re(x / (1.0 - 2.0 * rho1)), z, z, z],
            "attracting critical manifold point (eps = 0)",
        )?);
    }
    for (x, eps) in [(-1.0, 0.5), (-0.5, 0.25)] {
        recs.push(EquilibriumRecord::new(
            ChartId::FrakK1,
            &[x, -x / b, eps, 0.0],
            params,
            &[re(x * (1.0 + eps)), z, z, z],
            "attracting equilibrium sheet inside rho1 = 0",
        )?);
    }
    for x in [-1.0, 1.0] {
        recs.push(EquilibriumRecord::new(
            ChartId::FrakK1,
            &[x, 0.0, 0.0, 0.0],
            params,
            &[z, re(-x), z, re(x)],
            "partially hyperbolic saddle on the extended entry line",
        )?);
    }
    recs.push(EquilibriumRecord::new(
        ChartId::FrakK1,
        &[0.0, 0.0, 0.5, 0.3],
        params,
        &[z, z, z, z],
        "fully non-hyperbolic plane x = r1 = 0",
    )?);

    // CalK1: corner point of the critical manifold on the outer sphere, and
    // the line of saddles along the nu1 axis.
    recs.push(EquilibriumRecord::new(
        ChartId::CalK1,
        &[1.0 / b, 0.0, 0.0, 0.0],
        params,
        &[re(-1.0), z, z, z],
        "partially hyperbolic endpoint of the critical manifold",
    )?);
    recs.push(EquilibriumRecord::new(
        ChartId::CalK1,
        &[0.0, 0.0, 0.0, 0.7],
        params,
        &[re(1.0), z, re(-1.0), z],
        "line of partially hyperbolic saddles along the nu1 axis",
    )?);

    // CalK2 (reduced): attracting equilibrium line on the outer sphere,
    // terminating at the non-hyperbolic origin.
    for x2 in [-1.0, -0.5] {
        recs.push(EquilibriumRecord::new(
            ChartId::CalK2,
            &[x2, -x2 / b, 0.0],
            params,
            &[re(x2), z, z],
            "normally hyperbolic attracting equilibrium line on the sphere",
        )?);
    }
    recs.push(EquilibriumRecord::new(
        ChartId::CalK2,
        &[0.0, 0.0, 0.0],
        params,
        &[z, z, z],
        "non-hyperbolic endpoint of the equilibrium line",
    )?);

    // TildeK1: entry point of the center manifold and the hyperbolic saddle
    // on the inner sphere.
    recs.push(EquilibriumRecord::new(
        ChartId::TildeK1,
        &[-b, 0.0, 0.0],
        params,
        &[re(-b), z, z],
        "partially hyperbolic entry point of the unique center manifold",
    )?);
    recs.push(EquilibriumRecord::new(
        ChartId::TildeK1,
        &[0.0, 0.0, 0.0],
        params,
        &[re(b), re(2.0 * b), re(-2.0 * b)],
        "hyperbolic saddle on the inner sphere",
    )?);

    // TildeK2: the non-hyperbolic exit point the center manifold limits onto.
    recs.push(EquilibriumRecord::new(
        ChartId::TildeK2,
        &[0.0, 0.0, 0.0],
        params,
        &[z, z, z],
        "non-hyperbolic exit point of the inner sphere",
    )?);

    // HatK31: saddle connecting the inner sphere to the vertical cylinder.
    recs.push(EquilibriumRecord::new(
        ChartId::HatK31,
        &[0.0, 0.0, 0.0],
        params,
        &[z, z, re(-1.0)],
        "partially hyperbolic saddle at the top of the vertical cylinder",
    )?);

    // K12: resonant hyperbolic saddles and the focus seen in this chart.
    let s2a = (2.0 * a).sqrt();
    let sa2 = (a / 2.0).sqrt();
    recs.push(EquilibriumRecord::new(
        ChartId::K12,
        &[-s2a, 0.0, 0.0],
        params,
        &[re(s2a), re(s2a), re(-sa2)],
        "resonant hyperbolic saddle (doubled eigenvalue = -2 x simple)",
    )?);
    recs.push(EquilibriumRecord::new(
        ChartId::K12,
        &[s2a, 0.0, 0.0],
        params,
        &[re(-s2a), re(-s2a), re(sa2)],
        "resonant hyperbolic saddle (doubled eigenvalue = -2 x simple)",
    )?);
    recs.push(EquilibriumRecord::new(
        ChartId::K12,
        &[-2.0 * b * a.sqrt(), 0.0, a.sqrt()],
        params,
        &[a.sqrt() * focus, a.sqrt() * focus.conj(), z],
        "unstable focus inside the invariant eps1 = 0 plane",
    )?);

    // K11: entry saddle of the cylinder base and the image of the outgoing
    // resonant saddle.
    recs.push(EquilibriumRecord::new(
        ChartId::K11,
        &[0.0, 0.0, 0.0],
        params,
        &[re(1.0), re(-1.0), z],
        "partially hyperbolic saddle at the base of the vertical cylinder",
    )?);
    recs.push(EquilibriumRecord::new(
        ChartId::K11,
        &[1.0 / (2.0 * a), 0.0, 0.0],
        params,
        &[re(-1.0), re(-1.0), re(0.5)],
        "resonant saddle (image of the outgoing corner saddle)",
    )?);

    Ok(recs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lc() -> CorbeillerParams {
        CorbeillerParams::new(1.0, 0.25).unwrap()
    }

    #[test]
    fn every_record_is_an_equilibrium() {
        for rec in equilibria_catalog(lc()).unwrap() {
            let f = eval_chart_field(&rec.point).unwrap();
            let norm: f64 = f.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(norm < 1e-12, "{:?} at {:?}: |f| = {norm}", rec.chart, rec.point.coord_slice());
        }
    }

    #[test]
    fn every_record_matches_fd_spectrum() {
        for rec in equilibria_catalog(lc()).unwrap() {
            let mismatch = rec.spectrum_mismatch().unwrap();
            assert!(
                mismatch < 1e-6,
                "{:?} at {:?}: spectrum mismatch {mismatch}",
                rec.chart,
                rec.point.coord_slice()
            );
        }
    }

    #[test]
    fn critical_manifold_eigenvalue_examples() {
        // C1 point with x = -1, rho1 = 0: single non-trivial eigenvalue -1
        let recs = equilibria_catalog(lc()).unwrap();
        let c1 = recs
            .iter()
            .find(|r| r.chart == ChartId::FrakK1 && r.point.coords[0] == -1.0 && r.point.coords[3] == 0.0)
            .unwrap();
        let min = c1.eigenvalues.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
        assert!((min - (-1.0)).abs() < 1e-14);
    }

    #[test]
    fn inner_sphere_saddle_eigenvalues() {
        // b = 0.25: {b, 2b, -2b} = {0.25, 0.5, -0.5}
        let recs = equilibria_catalog(lc()).unwrap();
        let pr = recs
            .iter()
            .find(|r| r.chart == ChartId::TildeK1 && r.point.coords[0] == 0.0)
            .unwrap();
        let mut want = vec![(0.25, 0.0), (0.5, 0.0), (-0.5, 0.0)];
        sort_eigs(&mut want);
        assert_eq!(pr.eigenvalues, want);
    }

    #[test]
    fn corner_saddles_resonance() {
        // q_i and q_o: the doubled eigenvalue equals -2 times the simple one
        let recs = equilibria_catalog(lc()).unwrap();
        for r in recs.iter().filter(|r| r.chart == ChartId::K12 && r.point.coords[2] == 0.0) {
            let e: Vec<f64> = r.eigenvalues.iter().map(|v| v.0).collect();
            // sorted by real part: the doubled pair is either the first two
            // or the last two depending on sign
            let (dbl, simple) = if (e[0] - e[1]).abs() < 1e-14 { (e[0], e[2]) } else { (e[2], e[0]) };
            assert!((dbl + 2.0 * simple).abs() < 1e-12, "resonance broken: {e:?}");
        }
    }
}
