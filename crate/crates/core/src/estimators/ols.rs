//! Least squares on demeaned data with cluster-robust inference.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::design::Design;
use super::within::TwoWay;
use super::{Coefficient, DropReason, DroppedColumn, RegressionResult};
use crate::error::{Error, Result};

/// Residual norm, relative to the raw column norm, below which a regressor
/// counts as linearly dependent.
pub(crate) const RANK_TOLERANCE: f64 = 1e-9;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Greedy left-to-right column selection: a column is kept when it has a
/// component orthogonal to every column kept before it, so earlier columns
/// win ties.
pub(crate) fn select_columns(
    raw: &[Vec<f64>],
    demeaned: &[Vec<f64>],
    is_bin: &[bool],
) -> (Vec<usize>, Vec<(usize, DropReason)>) {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for (j, (r, v)) in raw.iter().zip(demeaned).enumerate() {
        let raw_norm = dot(r, r).sqrt();
        if raw_norm == 0.0 {
            let reason = if is_bin[j] {
                DropReason::EmptyCell
            } else {
                DropReason::Collinear
            };
            dropped.push((j, reason));
            continue;
        }
        let mut v = v.clone();
        // two passes of modified Gram-Schmidt for stability
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm <= RANK_TOLERANCE * raw_norm {
            dropped.push((j, DropReason::Collinear));
            continue;
        }
        v.iter_mut().for_each(|a| *a /= norm);
        basis.push(v);
        kept.push(j);
    }
    (kept, dropped)
}

pub(crate) fn estimate(d: Design) -> Result<RegressionResult> {
    let n = d.y.len();
    if d.n_cluster < 2 {
        return Err(Error::Estimation(format!(
            "need at least 2 clusters, found {}",
            d.n_cluster
        )));
    }
    let fe = TwoWay {
        id: &d.id,
        wave: &d.wave,
        n_id: d.n_id,
        n_wave: d.n_wave,
    };
    let mut cols: Vec<Vec<f64>> = std::iter::once(d.y.clone())
        .chain(d.x.iter().cloned())
        .collect();
    cols.par_iter_mut()
        .try_for_each(|c| fe.demean(c).map(|_| ()))?;
    let mut y = cols.remove(0);

    let (kept, dropped) = select_columns(&d.x, &cols, &d.is_bin);
    if kept.is_empty() {
        return Err(Error::Estimation(
            "no identifiable regressors remain".into(),
        ));
    }
    let k = kept.len();
    let big_k = k + d.fe_params;
    if n <= big_k {
        return Err(Error::Estimation(format!(
            "{n} observations cannot identify {big_k} parameters"
        )));
    }

    let y_scale = d.y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let sst: f64 = dot(&y, &y);
    let degenerate = sst.sqrt() <= 1e-12 * y_scale * (n as f64).sqrt();
    if degenerate {
        y.iter_mut().for_each(|v| *v = 0.0);
    }

    let x = DMatrix::from_fn(n, k, |i, j| cols[kept[j]][i]);
    let qr = x.clone().qr();
    let r = qr.r();
    let qty = qr.q().transpose() * DVector::from_column_slice(&y);
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Estimation("singular design after rank selection".into()))?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or_else(|| Error::Estimation("singular design after rank selection".into()))?;
    let bread = &r_inv * r_inv.transpose();

    let resid = DVector::from_column_slice(&y) - &x * &beta;
    let mut scores = vec![DVector::<f64>::zeros(k); d.n_cluster];
    for i in 0..n {
        let s = &mut scores[d.cluster[i]];
        for j in 0..k {
            s[j] += x[(i, j)] * resid[i];
        }
    }
    let mut meat = DMatrix::<f64>::zeros(k, k);
    for s in &scores {
        meat += s * s.transpose();
    }
    let g = d.n_cluster as f64;
    let c = g / (g - 1.0) * (n as f64 - 1.0) / (n - big_k) as f64;
    let mut cov = (&bread * meat * &bread) * c;
    cov = (&cov + cov.transpose()) * 0.5;

    let t_dist = StudentsT::new(0.0, 1.0, g - 1.0).map_err(|e| Error::Estimation(e.to_string()))?;
    let coefficients = kept
        .iter()
        .enumerate()
        .map(|(j, &col)| {
            let est = beta[j];
            let se = cov[(j, j)].max(0.0).sqrt();
            let t = (se > 0.0).then(|| est / se);
            Coefficient {
                name: d.names[col].clone(),
                estimate: est,
                se,
                t,
                p: t.map(|t| 2.0 * t_dist.sf(t.abs())),
            }
        })
        .collect();
    let ssr = resid.norm_squared();
    Ok(RegressionResult {
        coefficients,
        covariance: cov,
        n_obs: n,
        n_clusters: d.n_cluster,
        n_singletons: d.n_singletons,
        dropped: dropped
            .into_iter()
            .map(|(j, reason)| DroppedColumn {
                name: d.names[j].clone(),
                reason,
            })
            .collect(),
        r2_within: if degenerate { 0.0 } else { 1.0 - ssr / sst },
        k: big_k,
        degenerate,
    })
}
