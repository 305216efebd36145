//! Intercept-plus-rank-one latent factor model over the will matrix.
//!
//! Each observed vote is approximated as `mu + i_u + i_n + f_u * f_n`. The
//! note intercept `i_n` is what remains of a note's support once the
//! one-dimensional polarity term has absorbed agreement along the main axis
//! of division, which makes it a bridging score.
//!
//! Fitting is by alternating least squares: every sub-step solves its block
//! in closed form with the rest held fixed, so the regularized objective
//! never increases from one sweep to the next.

mod bridging;

pub use bridging::{bridging_minapproval, BridgingReport, BridgingScore};

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{AgoraError, Result};
use crate::matrix::{Schema, WillMatrix};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentFactors {
    pub mu: f64,
    pub user_intercepts: Vec<f64>,
    pub item_intercepts: Vec<f64>,
    pub user_factors: Vec<f64>,
    pub item_factors: Vec<f64>,
}

impl LatentFactors {
    pub fn zeros(n: usize, m: usize) -> Self {
        LatentFactors {
            mu: 0.0,
            user_intercepts: vec![0.0; n],
            item_intercepts: vec![0.0; m],
            user_factors: vec![0.0; n],
            item_factors: vec![0.0; m],
        }
    }

    pub fn n_users(&self) -> usize {
        self.user_intercepts.len()
    }

    pub fn n_items(&self) -> usize {
        self.item_intercepts.len()
    }

    pub fn predict(&self, user: usize, item: usize) -> Result<f64> {
        if user >= self.n_users() || item >= self.n_items() {
            return Err(AgoraError::IndexOutOfRange(format!(
                "({user}, {item}) outside {}x{}",
                self.n_users(),
                self.n_items()
            )));
        }
        Ok(self.predict_unchecked(user, item))
    }

    pub(crate) fn predict_unchecked(&self, user: usize, item: usize) -> f64 {
        self.mu
            + self.user_intercepts[user]
            + self.item_intercepts[item]
            + self.user_factors[user] * self.item_factors[item]
    }

    fn is_finite(&self) -> bool {
        self.mu.is_finite()
            && [
                &self.user_intercepts,
                &self.item_intercepts,
                &self.user_factors,
                &self.item_factors,
            ]
            .iter()
            .all(|v| v.iter().all(|x| x.is_finite()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub lambda_intercept: f64,
    pub lambda_factor: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Stop once a sweep improves the objective by less than this.
    pub tolerance: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            lambda_intercept: 0.15,
            lambda_factor: 0.03,
            epochs: 200,
            seed: 1,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub final_objective: f64,
    /// Objective at initialisation followed by one value per sweep.
    pub trace: Vec<f64>,
    pub config: FitConfig,
    pub epochs_run: usize,
    pub converged: bool,
}

/// Observed votes rescaled to `[0, 1]`, stored by row and by column.
struct Observations {
    by_user: Vec<Vec<(usize, f64)>>,
    by_item: Vec<Vec<(usize, f64)>>,
    count: usize,
}

/// Maps a stored vote onto the unit interval used for fitting.
pub fn rescale(schema: Schema, value: f64) -> f64 {
    match schema {
        Schema::Ternary => (value + 1.0) / 2.0,
        Schema::Rating { min, max } if max > min => (value - min) / (max - min),
        Schema::Rating { .. } => 0.5,
    }
}

impl Observations {
    fn from_matrix(matrix: &WillMatrix) -> Self {
        let schema = matrix.schema();
        let mut by_user = vec![Vec::new(); matrix.n_participants()];
        let mut by_item = vec![Vec::new(); matrix.n_statements()];
        for (u, i, v) in matrix.entries() {
            let r = rescale(schema, v);
            by_user[u].push((i, r));
            by_item[i].push((u, r));
        }
        Observations {
            by_user,
            by_item,
            count: matrix.n_entries(),
        }
    }
}

pub fn objective(matrix: &WillMatrix, factors: &LatentFactors, config: &FitConfig) -> f64 {
    objective_obs(&Observations::from_matrix(matrix), factors, config)
}

fn objective_obs(obs: &Observations, f: &LatentFactors, config: &FitConfig) -> f64 {
    let mut loss = 0.0;
    for (u, row) in obs.by_user.iter().enumerate() {
        for &(i, r) in row {
            let e = r - f.predict_unchecked(u, i);
            loss += e * e;
        }
    }
    let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    loss + config.lambda_intercept * (sq(&f.user_intercepts) + sq(&f.item_intercepts))
        + config.lambda_factor * (sq(&f.user_factors) + sq(&f.item_factors))
}

/// Minimises `sum (e_k - a - f * g_k)^2 + li * a^2 + lf * f^2` over `(a, f)`.
/// Falls back to coordinate updates when the 2x2 system is singular, which can
/// only happen without regularization.
fn solve_pair(residuals: &[(f64, f64)], li: f64, lf: f64, a: f64, f: f64) -> (f64, f64) {
    let c = residuals.len() as f64;
    let (mut sg, mut sgg, mut se, mut sge) = (0.0, 0.0, 0.0, 0.0);
    for &(e, g) in residuals {
        sg += g;
        sgg += g * g;
        se += e;
        sge += g * e;
    }
    let a11 = c + li;
    let a22 = sgg + lf;
    let det = a11 * a22 - sg * sg;
    if det > 1e-12 * a11 * a22 && det > 0.0 {
        ((se * a22 - sg * sge) / det, (a11 * sge - sg * se) / det)
    } else {
        let a = if a11 > 0.0 { (se - f * sg) / a11 } else { a };
        let f = if a22 > 0.0 { (sge - a * sg) / a22 } else { f };
        (a, f)
    }
}

pub fn fit(matrix: &WillMatrix, config: &FitConfig) -> Result<(LatentFactors, FitReport)> {
    if matrix.n_entries() == 0 {
        return Err(AgoraError::EmptyInput("cannot fit an empty matrix".into()));
    }
    if !(config.lambda_intercept >= 0.0 && config.lambda_factor >= 0.0) {
        return Err(AgoraError::InvalidArgument(
            "regularization must be non-negative".into(),
        ));
    }
    let obs = Observations::from_matrix(matrix);
    let (n, m) = (matrix.n_participants(), matrix.n_statements());
    let (li, lf) = (config.lambda_intercept, config.lambda_factor);

    let mut rng = rng::seeded(config.seed);
    let mut f = LatentFactors::zeros(n, m);
    for x in f.user_factors.iter_mut().chain(f.item_factors.iter_mut()) {
        let z: f64 = StandardNormal.sample(&mut rng);
        *x = 1e-3 * z;
    }

    let mut trace = vec![objective_obs(&obs, &f, config)];
    let mut converged = false;
    let mut scratch = Vec::new();
    for _ in 0..config.epochs {
        // global mean, unregularized
        let mut total = 0.0;
        for (u, row) in obs.by_user.iter().enumerate() {
            for &(i, r) in row {
                total += r - f.user_intercepts[u] - f.item_intercepts[i] - f.user_factors[u] * f.item_factors[i];
            }
        }
        f.mu = total / obs.count as f64;

        for (u, row) in obs.by_user.iter().enumerate() {
            scratch.clear();
            scratch.extend(
                row.iter()
                    .map(|&(i, r)| (r - f.mu - f.item_intercepts[i], f.item_factors[i])),
            );
            let (a, g) = solve_pair(&scratch, li, lf, f.user_intercepts[u], f.user_factors[u]);
            f.user_intercepts[u] = a;
            f.user_factors[u] = g;
        }
        for (i, col) in obs.by_item.iter().enumerate() {
            scratch.clear();
            scratch.extend(
                col.iter()
                    .map(|&(u, r)| (r - f.mu - f.user_intercepts[u], f.user_factors[u])),
            );
            let (b, g) = solve_pair(&scratch, li, lf, f.item_intercepts[i], f.item_factors[i]);
            f.item_intercepts[i] = b;
            f.item_factors[i] = g;
        }

        let value = objective_obs(&obs, &f, config);
        if !value.is_finite() || !f.is_finite() {
            return Err(AgoraError::NonFinite(format!(
                "objective diverged after {} sweeps",
                trace.len()
            )));
        }
        let prev = *trace.last().expect("trace starts non-empty");
        trace.push(value);
        if prev - value < config.tolerance {
            converged = true;
            break;
        }
    }

    let report = FitReport {
        final_objective: *trace.last().expect("non-empty"),
        epochs_run: trace.len() - 1,
        trace,
        config: *config,
        converged,
    };
    Ok((f, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HelpfulnessStatus {
    Helpful,
    NotHelpful,
    NeedsMoreRatings,
}

/// Helpful needs a high intercept earned without leaning on the polarity
/// factor; a strongly negative intercept is not helpful; the rest wait.
pub fn helpfulness_status(
    factors: &LatentFactors,
    helpful_threshold: f64,
    polarity_cap: f64,
) -> Result<Vec<HelpfulnessStatus>> {
    if !(helpful_threshold.is_finite() && polarity_cap.is_finite()) {
        return Err(AgoraError::InvalidArgument("thresholds must be finite".into()));
    }
    Ok(factors
        .item_intercepts
        .iter()
        .zip(&factors.item_factors)
        .map(|(&i_n, &f_n)| {
            if i_n >= helpful_threshold && f_n.abs() <= polarity_cap {
                HelpfulnessStatus::Helpful
            } else if i_n <= -helpful_threshold {
                HelpfulnessStatus::NotHelpful
            } else {
                HelpfulnessStatus::NeedsMoreRatings
            }
        })
        .collect())
}

/// Shape of the fitted user-factor distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorDiagnostics {
    pub count: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// Sarle's coefficient; values above 5/9 hint at bimodality.
    pub bimodality_coefficient: f64,
    pub histogram: Vec<HistogramBin>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

pub fn factor_diagnostics(values: &[f64], bins: usize) -> FactorDiagnostics {
    let n = values.len();
    if n == 0 {
        return FactorDiagnostics {
            count: 0,
            mean: 0.0,
            std_dev: 0.0,
            min: 0.0,
            max: 0.0,
            skewness: 0.0,
            excess_kurtosis: 0.0,
            bimodality_coefficient: 0.0,
            histogram: Vec::new(),
        };
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let moment = |k: i32| values.iter().map(|x| (x - mean).powi(k)).sum::<f64>() / nf;
    let var = moment(2);
    let std_dev = var.sqrt();
    let (skewness, excess_kurtosis) = if var > 0.0 {
        (moment(3) / var.powf(1.5), moment(4) / (var * var) - 3.0)
    } else {
        (0.0, 0.0)
    };
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bins = bins.max(1);
    let width = (max - min) / bins as f64;
    let mut histogram: Vec<HistogramBin> = (0..bins)
        .map(|b| HistogramBin {
            lo: min + width * b as f64,
            hi: if b + 1 == bins {
                max
            } else {
                min + width * (b + 1) as f64
            },
            count: 0,
        })
        .collect();
    for &x in values {
        let b = if width > 0.0 {
            (((x - min) / width) as usize).min(bins - 1)
        } else {
            0
        };
        histogram[b].count += 1;
    }
    FactorDiagnostics {
        count: n,
        mean,
        std_dev,
        min,
        max,
        skewness,
        excess_kurtosis,
        bimodality_coefficient: (skewness * skewness + 1.0) / (excess_kurtosis + 3.0),
        histogram,
    }
}
