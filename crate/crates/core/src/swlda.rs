//! Stepwise linear discriminant analysis.
//!
//! Labels are coded +1 (target) / -1 (non-target) and regressed on the
//! features by least squares. Features enter one at a time, most
//! significant first, while their partial F-test p-value is below
//! `p_enter`; after every entry, selected features whose p-value has risen
//! above `p_remove` are dropped, least significant first. The final
//! regression weights form the discriminant.
//!
//! Regressions are solved by modified Gram-Schmidt QR on the selected
//! columns plus an intercept. A candidate's residual-sum-of-squares
//! reduction is `(r_x . r_y)^2 / |r_x|^2` where `r_x`, `r_y` are the
//! candidate and the labels with the current model projected out; a
//! selected feature's contribution is `beta_j^2 / [(X'X)^-1]_jj`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

pub const P_ENTER: f64 = 0.10;
pub const P_REMOVE: f64 = 0.15;
pub const MAX_FEATURES: usize = 60;
pub const MIN_ROWS: usize = 12;
/// Features with variance below this are never entered.
pub const MIN_VARIANCE: f64 = 1e-12;
// candidate columns whose residual keeps less than this fraction of their
// centred energy are treated as collinear with the model
const COLLINEAR_TOL: f64 = 1e-10;

/// Rows of features with +1/-1 labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<Vec<f64>>,
    labels: Vec<f64>,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<f64>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        if features.len() < MIN_ROWS {
            return Err(Error::invalid(format!(
                "need at least {MIN_ROWS} rows, got {}",
                features.len()
            )));
        }
        let dim = features[0].len();
        if dim == 0 || features.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid(
                "feature rows must be non-empty and equally long",
            ));
        }
        if features.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("features contain non-finite values"));
        }
        if labels.iter().any(|&l| l != 1.0 && l != -1.0) {
            return Err(Error::invalid("labels must be +1 or -1"));
        }
        if !labels.contains(&1.0) || !labels.contains(&-1.0) {
            return Err(Error::invalid("dataset must contain both classes"));
        }
        Ok(Dataset { features, labels })
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features[0].len()
    }

    pub fn n_targets(&self) -> usize {
        self.labels.iter().filter(|&&l| l > 0.0).count()
    }

    fn column(&self, j: usize) -> Vec<f64> {
        self.features.iter().map(|r| r[j]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwldaParams {
    pub p_enter: f64,
    pub p_remove: f64,
    pub max_features: usize,
}

impl Default for SwldaParams {
    fn default() -> Self {
        SwldaParams {
            p_enter: P_ENTER,
            p_remove: P_REMOVE,
            max_features: MAX_FEATURES,
        }
    }
}

impl SwldaParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.p_enter && self.p_enter <= self.p_remove && self.p_remove < 1.0) {
            return Err(Error::invalid(format!(
                "need 0 < p_enter ({}) <= p_remove ({}) < 1",
                self.p_enter, self.p_remove
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwldaModel {
    /// Feature indices in order of entry.
    pub selected: Vec<usize>,
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub p_enter: f64,
    pub p_remove: f64,
    pub max_features: usize,
    pub feature_dim: usize,
}

impl SwldaModel {
    pub fn validate(&self) -> Result<()> {
        if self.selected.len() != self.weights.len() {
            return Err(Error::invalid("one weight per selected feature required"));
        }
        if self.selected.len() > self.max_features {
            return Err(Error::invalid("more selected features than max_features"));
        }
        let mut seen = HashSet::new();
        for &i in &self.selected {
            if i >= self.feature_dim || !seen.insert(i) {
                return Err(Error::invalid(format!("bad selected feature index {i}")));
            }
        }
        if !self.intercept.is_finite() || self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("model weights must be finite"));
        }
        Ok(())
    }

    /// Fraction of rows whose score sign matches the label.
    pub fn training_accuracy(&self, data: &Dataset) -> Result<f64> {
        let mut correct = 0usize;
        for (row, &label) in data.features().iter().zip(data.labels()) {
            let s = score(self, row)?;
            if (s > 0.0) == (label > 0.0) {
                correct += 1;
            }
        }
        Ok(correct as f64 / data.len() as f64)
    }
}

/// Upper tail of F(1, df) at `f`.
fn f_survival(f: f64, df: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    if !f.is_finite() {
        return 0.0;
    }
    beta_reg(df / 2.0, 0.5, df / (df + f))
}

/// p-value of the partial F statistic for one added regressor:
/// `F = (ss_reduced - ss_full) / (ss_full / df_full)` on (1, df_full) dof.
pub fn partial_f_pvalue(
    residual_ss_reduced: f64,
    residual_ss_full: f64,
    df_full: usize,
) -> Result<f64> {
    if df_full < 1 {
        return Err(Error::invalid("df_full must be >= 1"));
    }
    if !(residual_ss_full >= 0.0 && residual_ss_reduced.is_finite()) {
        return Err(Error::invalid(
            "residual sums of squares must be finite and >= 0",
        ));
    }
    let tol = 1e-12 * residual_ss_reduced.abs().max(1.0);
    if residual_ss_reduced < residual_ss_full - tol {
        return Err(Error::invalid(
            "reduced-model residual SS must be >= full-model residual SS",
        ));
    }
    Ok(pvalue_from_drop(
        residual_ss_reduced - residual_ss_full,
        residual_ss_full,
        df_full,
    ))
}

fn pvalue_from_drop(ss_drop: f64, ss_full: f64, df_full: usize) -> f64 {
    let ss_drop = ss_drop.max(0.0);
    if ss_full <= 0.0 {
        return if ss_drop > 0.0 { 0.0 } else { 1.0 };
    }
    f_survival(ss_drop / (ss_full / df_full as f64), df_full as f64)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Least-squares fit of the labels on an intercept plus `selected` columns.
struct Fit {
    /// Orthonormal basis, intercept direction first.
    q: Vec<Vec<f64>>,
    /// Upper-triangular factor, row-major, size m x m.
    r: Vec<Vec<f64>>,
    /// Label residual after projecting out `q`.
    residual: Vec<f64>,
    rss: f64,
}

impl Fit {
    /// Returns `None` if the columns are numerically rank deficient.
    fn new(columns: &[Vec<f64>], labels: &[f64], selected: &[usize]) -> Option<Fit> {
        let n = labels.len();
        let m = selected.len() + 1;
        let mut q: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut r = vec![vec![0.0; m]; m];
        let ones = vec![1.0; n];
        let raw = std::iter::once(&ones).chain(selected.iter().map(|&j| &columns[j]));
        for (k, col) in raw.enumerate() {
            let mut v = col.clone();
            let energy = dot(&v, &v);
            // two passes of modified Gram-Schmidt
            for _ in 0..2 {
                for (i, qi) in q.iter().enumerate() {
                    let c = dot(qi, &v);
                    r[i][k] += c;
                    axpy(-c, qi, &mut v);
                }
            }
            let norm = dot(&v, &v).sqrt();
            if !(norm > 0.0) || norm * norm <= COLLINEAR_TOL * energy {
                return None;
            }
            r[k][k] = norm;
            v.iter_mut().for_each(|x| *x /= norm);
            q.push(v);
        }
        let mut residual = labels.to_vec();
        for qi in &q {
            let c = dot(qi, &residual);
            axpy(-c, qi, &mut residual);
        }
        let rss = dot(&residual, &residual);
        Some(Fit {
            q,
            r,
            residual,
            rss,
        })
    }

    fn dof(&self) -> usize {
        self.residual.len().saturating_sub(self.q.len())
    }

    /// Coefficients for [intercept, selected...].
    fn coefficients(&self, labels: &[f64]) -> Vec<f64> {
        let m = self.q.len();
        let qty: Vec<f64> = self.q.iter().map(|qi| dot(qi, labels)).collect();
        let mut beta = vec![0.0; m];
        for i in (0..m).rev() {
            let s: f64 = (i + 1..m).map(|j| self.r[i][j] * beta[j]).sum();
            beta[i] = (qty[i] - s) / self.r[i][i];
        }
        beta
    }

    /// Diagonal of (X'X)^-1 = R^-1 R^-T, i.e. squared row norms of R^-1.
    fn inverse_gram_diagonal(&self) -> Vec<f64> {
        let m = self.q.len();
        // column c of R^-1 by back substitution, stored transposed
        let mut inv_t = vec![vec![0.0; m]; m];
        for (c, col) in inv_t.iter_mut().enumerate() {
            for i in (0..=c).rev() {
                let rhs = if i == c { 1.0 } else { 0.0 };
                let s: f64 = (i + 1..=c).map(|j| self.r[i][j] * col[j]).sum();
                col[i] = (rhs - s) / self.r[i][i];
            }
        }
        (0..m)
            .map(|i| inv_t.iter().map(|col| col[i] * col[i]).sum())
            .collect()
    }

    /// Residual-SS drop from adding `column`, or `None` if it is collinear.
    fn entry_drop(&self, column: &[f64], centred_energy: f64) -> Option<f64> {
        let mut v = column.to_vec();
        for qi in &self.q {
            let c = dot(qi, &v);
            axpy(-c, qi, &mut v);
        }
        let e = dot(&v, &v);
        if !(e > COLLINEAR_TOL * centred_energy) {
            return None;
        }
        let c = dot(&v, &self.residual);
        Some(c * c / e)
    }
}

fn variance(x: &[f64]) -> f64 {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / x.len() as f64
}

/// Stepwise selection followed by a least-squares fit on the selected features.
pub fn train(data: &Dataset, params: &SwldaParams) -> Result<SwldaModel> {
    params.validate()?;
    let n = data.len();
    let dim = data.dim();
    let labels = data.labels();
    let columns: Vec<Vec<f64>> = (0..dim).map(|j| data.column(j)).collect();
    let energies: Vec<f64> = columns.iter().map(|c| variance(c) * n as f64).collect();
    let enterable: Vec<bool> = columns
        .iter()
        .map(|c| variance(c) >= MIN_VARIANCE)
        .collect();

    let mut selected: Vec<usize> = Vec::new();
    let mut fit = Fit::new(&columns, labels, &selected).expect("intercept-only fit");
    let mut visited: HashSet<Vec<usize>> = HashSet::new();
    let max_iterations = params.max_features.max(1) * dim;

    for _ in 0..max_iterations {
        if selected.len() >= params.max_features {
            break;
        }
        // forward step
        let df_full = n as i64 - selected.len() as i64 - 2;
        if df_full < 1 {
            break;
        }
        let mut best: Option<(usize, f64)> = None;
        for j in 0..dim {
            if !enterable[j] || selected.contains(&j) {
                continue;
            }
            let Some(drop) = fit.entry_drop(&columns[j], energies[j]) else {
                continue;
            };
            let p = pvalue_from_drop(drop, (fit.rss - drop).max(0.0), df_full as usize);
            if best.is_none_or(|(_, bp)| p < bp) {
                best = Some((j, p));
            }
        }
        let Some((j, p)) = best else { break };
        if !(p < params.p_enter) {
            break;
        }
        let mut candidate = selected.clone();
        candidate.push(j);
        let Some(next) = Fit::new(&columns, labels, &candidate) else {
            break;
        };
        selected = candidate;
        fit = next;

        // backward steps
        loop {
            let pvals = removal_pvalues(&fit, labels);
            let worst = pvals
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > params.p_remove)
                .fold(None::<(usize, f64)>, |acc, (i, &p)| match acc {
                    Some((_, bp)) if bp >= p => acc,
                    _ => Some((i, p)),
                });
            let Some((pos, _)) = worst else { break };
            selected.remove(pos);
            fit = Fit::new(&columns, labels, &selected).expect("subset of a full-rank fit");
        }

        let mut key = selected.clone();
        key.sort_unstable();
        if !visited.insert(key) {
            break;
        }
    }

    let beta = fit.coefficients(labels);
    Ok(SwldaModel {
        selected,
        weights: beta[1..].to_vec(),
        intercept: beta[0],
        p_enter: params.p_enter,
        p_remove: params.p_remove,
        max_features: params.max_features,
        feature_dim: dim,
    })
}

/// p-value of each selected feature given all the others.
fn removal_pvalues(fit: &Fit, labels: &[f64]) -> Vec<f64> {
    let beta = fit.coefficients(labels);
    let diag = fit.inverse_gram_diagonal();
    let df = fit.dof();
    (1..beta.len())
        .map(|i| {
            if df < 1 {
                return 1.0;
            }
            pvalue_from_drop(beta[i] * beta[i] / diag[i], fit.rss, df)
        })
        .collect()
}

/// `intercept + sum(weights * features[selected])`; larger means more target-like.
pub fn score(model: &SwldaModel, features: &[f64]) -> Result<f64> {
    if features.len() != model.feature_dim {
        return Err(Error::invalid(format!(
            "feature vector has {} values, model expects {}",
            features.len(),
            model.feature_dim
        )));
    }
    Ok(model.intercept
        + model
            .selected
            .iter()
            .zip(&model.weights)
            .map(|(&i, w)| w * features[i])
            .sum::<f64>())
}
