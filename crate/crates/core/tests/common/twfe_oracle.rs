//! Brute-force least squares with explicit id and wave dummies and a
//! textbook cluster sandwich computed on the full design.

use carelab::panel::{Column, Panel};
use nalgebra::{DMatrix, DVector};

pub struct DenseFit {
    pub beta: Vec<f64>,
    pub se: Vec<f64>,
}

/// `slopes` are columns built from each row; clusters are ids and the
/// small-sample factor is `G/(G-1) * (N-1)/(N-K)` with
/// `K = slopes + waves - 1` (id effects are nested in the clusters).
pub fn dense_twfe(
    panel: &Panel,
    outcome: Column,
    slopes: &[&dyn Fn(&carelab::panel::PanelObservation) -> f64],
) -> Option<DenseFit> {
    let rows = panel.rows();
    let n = rows.len();
    let waves = panel.waves();
    let mut ids: Vec<u64> = rows.iter().map(|r| r.id).collect();
    ids.dedup();
    let k = slopes.len();
    let p = k + ids.len() + waves.len() - 1;
    let mut x = DMatrix::<f64>::zeros(n, p);
    let mut y = DVector::<f64>::zeros(n);
    for (i, r) in rows.iter().enumerate() {
        for (j, f) in slopes.iter().enumerate() {
            x[(i, j)] = f(r);
        }
        let g = ids.iter().position(|&v| v == r.id).unwrap();
        x[(i, k + g)] = 1.0;
        let w = waves.iter().position(|&v| v == r.wave).unwrap();
        if w > 0 {
            x[(i, k + ids.len() + w - 1)] = 1.0;
        }
        y[i] = outcome.value(r).unwrap();
    }
    let xtx = x.transpose() * &x;
    let inv = xtx.clone().try_inverse()?;
    // reject near-singular designs
    let check = &inv * &xtx - DMatrix::<f64>::identity(p, p);
    if check.abs().max() > 1e-8 {
        return None;
    }
    let beta = &inv * x.transpose() * &y;
    let e = &y - &x * &beta;
    let mut meat = DMatrix::<f64>::zeros(p, p);
    for &id in &ids {
        let mut s = DVector::<f64>::zeros(p);
        for (i, r) in rows.iter().enumerate() {
            if r.id == id {
                s += x.row(i).transpose() * e[i];
            }
        }
        meat += &s * s.transpose();
    }
    let g = ids.len() as f64;
    let big_k = (k + waves.len() - 1) as f64;
    let c = g / (g - 1.0) * (n as f64 - 1.0) / (n as f64 - big_k);
    let v = &inv * meat * &inv * c;
    Some(DenseFit {
        beta: (0..k).map(|j| beta[j]).collect(),
        se: (0..k).map(|j| v[(j, j)].sqrt()).collect(),
    })
}
