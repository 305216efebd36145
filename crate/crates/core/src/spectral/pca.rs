use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{AgoraError, Result};
use crate::matrix::WillMatrix;

/// How unseen cells are filled before projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Impute {
    #[default]
    Zero,
    /// Mean of the participant's recorded votes (0 when there are none).
    RowMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    /// Unit-norm principal directions over statement space, one per row.
    pub components: Vec<Vec<f64>>,
    /// Participant coordinates, `n x dims`.
    pub coordinates: Vec<Vec<f64>>,
    /// Variance along each component, non-increasing.
    pub explained_variance: Vec<f64>,
    pub total_variance: f64,
    /// Per-statement column means removed before projection.
    pub column_means: Vec<f64>,
}

impl Projection {
    pub fn dims(&self) -> usize {
        self.components.len()
    }

    pub fn explained_ratio(&self) -> Vec<f64> {
        self.explained_variance
            .iter()
            .map(|v| {
                if self.total_variance > 0.0 {
                    v / self.total_variance
                } else {
                    0.0
                }
            })
            .collect()
    }
}

pub(crate) fn imputed(matrix: &WillMatrix, impute: Impute) -> DMatrix<f64> {
    let (n, m) = (matrix.n_participants(), matrix.n_statements());
    let fill: Vec<f64> = match impute {
        Impute::Zero => vec![0.0; n],
        Impute::RowMean => (0..n)
            .map(|r| {
                let row = matrix.row(r);
                if row.is_empty() {
                    0.0
                } else {
                    row.iter().map(|&(_, v)| v).sum::<f64>() / row.len() as f64
                }
            })
            .collect(),
    };
    DMatrix::from_fn(n, m, |r, c| matrix.get(r, c).unwrap_or(fill[r]))
}

/// Column-centred PCA of the imputed vote matrix, with each component's sign
/// fixed so that its largest-magnitude loading is positive.
pub fn reduce(matrix: &WillMatrix, dims: usize, impute: Impute) -> Result<Projection> {
    matrix.require_ternary()?;
    let (n, m) = (matrix.n_participants(), matrix.n_statements());
    if n < 2 {
        return Err(AgoraError::TooFewRows(n));
    }
    if dims == 0 || dims > n.min(m) {
        return Err(AgoraError::InvalidArgument(format!(
            "dims must be in 1..={}, got {dims}",
            n.min(m)
        )));
    }

    let mut x = imputed(matrix, impute);
    let column_means: Vec<f64> = (0..m).map(|c| x.column(c).mean()).collect();
    for (c, mean) in column_means.iter().enumerate() {
        x.column_mut(c).add_scalar_mut(-mean);
    }

    let svd = x.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma = svd.singular_values;
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]).then(a.cmp(&b)));

    let scale = (n - 1) as f64;
    let total_variance = sigma.iter().map(|s| s * s).sum::<f64>() / scale;
    let mut components = Vec::with_capacity(dims);
    let mut explained_variance = Vec::with_capacity(dims);
    for &k in order.iter().take(dims) {
        let mut comp: Vec<f64> = v_t.row(k).iter().copied().collect();
        let pivot = comp
            .iter()
            .enumerate()
            .fold(0, |best, (i, v)| if v.abs() > comp[best].abs() { i } else { best });
        if comp[pivot] < 0.0 {
            comp.iter_mut().for_each(|v| *v = -*v);
        }
        components.push(comp);
        explained_variance.push(sigma[k] * sigma[k] / scale);
    }

    let coordinates = (0..n)
        .map(|r| {
            components
                .iter()
                .map(|comp| x.row(r).iter().zip(comp).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();

    Ok(Projection {
        components,
        coordinates,
        explained_variance,
        total_variance,
        column_means,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{Participant, Schema, Statement, Vote};

    fn from_rows(rows: &[&[f64]]) -> WillMatrix {
        let n = rows.len();
        let m = rows[0].len();
        let mut votes = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_nan() {
                    votes.push(Vote::new(format!("p{i}"), format!("s{j}"), v));
                }
            }
        }
        WillMatrix::build(
            &votes,
            (0..n).map(|i| Participant::new(format!("p{i}"))).collect(),
            (0..m).map(|j| Statement::new(format!("s{j}"))).collect(),
            Schema::Ternary,
        )
        .unwrap()
    }

    #[test]
    fn rank_one_puts_all_variance_first() {
        let u = [1.0, -1.0, 1.0, 1.0, -1.0];
        let v = [1.0, 1.0, -1.0, -1.0];
        let rows: Vec<Vec<f64>> = u.iter().map(|a| v.iter().map(|b| a * b).collect()).collect();
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let p = reduce(&from_rows(&refs), 3, Impute::Zero).unwrap();
        assert!((p.explained_variance[0] / p.total_variance - 1.0).abs() < 1e-6);
        assert!(p.explained_variance[1].abs() < 1e-9);
    }

    #[test]
    fn full_rank_reconstructs_centered_matrix() {
        let nan = f64::NAN;
        let rows: [&[f64]; 4] = [
            &[1.0, 0.0, -1.0],
            &[-1.0, nan, 1.0],
            &[1.0, 1.0, nan],
            &[0.0, -1.0, -1.0],
        ];
        let m = from_rows(&rows);
        let p = reduce(&m, 3, Impute::Zero).unwrap();
        let mut x = imputed(&m, Impute::Zero);
        for c in 0..3 {
            let mean = x.column(c).mean();
            x.column_mut(c).add_scalar_mut(-mean);
        }
        let mut err = 0.0;
        for r in 0..4 {
            for c in 0..3 {
                let rec: f64 = (0..3).map(|k| p.coordinates[r][k] * p.components[k][c]).sum();
                err += (rec - x[(r, c)]).powi(2);
            }
        }
        assert!(err.sqrt() < 1e-6);
        // orthonormal, sorted, sign-canonical
        for a in 0..3 {
            for b in 0..3 {
                let ip: f64 = p.components[a].iter().zip(&p.components[b]).map(|(x, y)| x * y).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((ip - want).abs() < 1e-9);
            }
            let max = p.components[a]
                .iter()
                .fold(0.0f64, |m, v| if v.abs() > m.abs() { *v } else { m });
            assert!(max > 0.0);
        }
        assert!(p.explained_variance.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn row_mean_imputation_fills_with_participant_mean() {
        let nan = f64::NAN;
        let m = from_rows(&[&[1.0, 1.0, nan], &[-1.0, nan, 0.0]]);
        let x = imputed(&m, Impute::RowMean);
        assert_eq!(x[(0, 2)], 1.0);
        assert_eq!(x[(1, 1)], -0.5);
    }

    #[test]
    fn errors() {
        let one = from_rows(&[&[1.0, -1.0]]);
        assert!(matches!(reduce(&one, 1, Impute::Zero), Err(AgoraError::TooFewRows(1))));
        let two = from_rows(&[&[1.0, -1.0], &[0.0, 1.0]]);
        assert!(reduce(&two, 3, Impute::Zero).is_err());
        assert!(reduce(&two, 0, Impute::Zero).is_err());
    }
}
