use serde::{Deserialize, Serialize};

use crate::error::{AgoraError, Result};
use crate::matrix::WillMatrix;

use super::OpinionGroups;

/// Smoothed vote probability `(2 + N) / (1 + T)`. Exceeds 1 whenever
/// `N + 1 > T`, most visibly `2.0` on an empty tally.
pub fn smoothed_probability(n: usize, t: usize) -> f64 {
    (2 + n) as f64 / (1 + t) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VoteValue {
    Agree,
    Disagree,
}

impl VoteValue {
    pub fn value(self) -> f64 {
        match self {
            VoteValue::Agree => 1.0,
            VoteValue::Disagree => -1.0,
        }
    }
}

/// Which way round the within/outside ratio is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// `P(g') / P(g)`, outside over inside.
    #[default]
    Paper,
    /// `P(g) / P(g')`, inside over outside.
    Polis,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepnessOptions {
    /// Count pass votes among the votes cast, `T`.
    pub count_pass_in_total: bool,
    pub orientation: Orientation,
}

impl Default for RepnessOptions {
    fn default() -> Self {
        RepnessOptions {
            count_pass_in_total: true,
            orientation: Orientation::Paper,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepnessReport {
    pub statement: String,
    pub group: usize,
    pub vote: VoteValue,
    pub n_g: usize,
    pub t_g: usize,
    pub p_g: f64,
    pub n_gprime: usize,
    pub t_gprime: usize,
    pub p_gprime: f64,
    pub ratio: f64,
    pub orientation: Orientation,
    pub count_pass_in_total: bool,
    /// Set when either smoothed estimate exceeds 1.
    pub probability_above_one: bool,
}

#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    matching: usize,
    total: usize,
}

fn tallies(matrix: &WillMatrix, groups: &OpinionGroups, col: usize, target: f64, count_pass: bool) -> Vec<Tally> {
    let mut out = vec![Tally::default(); groups.k];
    for &(row, v) in matrix.column(col) {
        let g = groups.assignment[row];
        if v == target {
            out[g].matching += 1;
        }
        if v != 0.0 || count_pass {
            out[g].total += 1;
        }
    }
    out
}

fn check_groups(matrix: &WillMatrix, groups: &OpinionGroups) -> Result<()> {
    matrix.require_ternary()?;
    if groups.assignment.len() != matrix.n_participants() {
        return Err(AgoraError::InvalidArgument(format!(
            "groups cover {} participants, matrix has {}",
            groups.assignment.len(),
            matrix.n_participants()
        )));
    }
    if let Some(&g) = groups.assignment.iter().find(|&&g| g >= groups.k) {
        return Err(AgoraError::IndexOutOfRange(format!("group {g} with k = {}", groups.k)));
    }
    Ok(())
}

pub fn repness(
    matrix: &WillMatrix,
    groups: &OpinionGroups,
    statement: &str,
    group: usize,
    vote: VoteValue,
    options: RepnessOptions,
) -> Result<RepnessReport> {
    check_groups(matrix, groups)?;
    if group >= groups.k {
        return Err(AgoraError::IndexOutOfRange(format!(
            "group {group} with k = {}",
            groups.k
        )));
    }
    let col = matrix
        .statement_index(statement)
        .ok_or_else(|| AgoraError::UnknownId(statement.to_string()))?;
    if groups.assignment.iter().all(|&g| g == group) {
        return Err(AgoraError::EmptyComplement(group));
    }
    let per_group = tallies(matrix, groups, col, vote.value(), options.count_pass_in_total);
    let inside = per_group[group];
    let outside = per_group
        .iter()
        .enumerate()
        .filter(|(g, _)| *g != group)
        .fold(Tally::default(), |acc, (_, t)| Tally {
            matching: acc.matching + t.matching,
            total: acc.total + t.total,
        });
    let p_g = smoothed_probability(inside.matching, inside.total);
    let p_gprime = smoothed_probability(outside.matching, outside.total);
    let ratio = match options.orientation {
        Orientation::Paper => p_gprime / p_g,
        Orientation::Polis => p_g / p_gprime,
    };
    Ok(RepnessReport {
        statement: statement.to_string(),
        group,
        vote,
        n_g: inside.matching,
        t_g: inside.total,
        p_g,
        n_gprime: outside.matching,
        t_gprime: outside.total,
        p_gprime,
        ratio,
        orientation: options.orientation,
        count_pass_in_total: options.count_pass_in_total,
        probability_above_one: p_g > 1.0 || p_gprime > 1.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusEntry {
    pub statement: String,
    pub score: f64,
    /// Smoothed agreement probability per group.
    pub per_group: Vec<f64>,
    pub votes: usize,
    pub unvoted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusReport {
    /// Descending by score, ties by statement id.
    pub ranking: Vec<ConsensusEntry>,
    /// Statements left out of the ranking because nobody voted on them.
    pub excluded: Vec<ConsensusEntry>,
}

/// Scores each statement by the product over groups of the smoothed
/// agreement probability.
pub fn group_informed_consensus(
    matrix: &WillMatrix,
    groups: &OpinionGroups,
    count_pass_in_total: bool,
    include_unvoted: bool,
) -> Result<ConsensusReport> {
    check_groups(matrix, groups)?;
    if groups.k < 2 {
        return Err(AgoraError::InvalidArgument("consensus needs at least 2 groups".into()));
    }
    let mut ranking = Vec::new();
    let mut excluded = Vec::new();
    for (col, s) in matrix.statements().iter().enumerate() {
        let per_group: Vec<f64> = tallies(matrix, groups, col, 1.0, count_pass_in_total)
            .iter()
            .map(|t| smoothed_probability(t.matching, t.total))
            .collect();
        let votes = matrix.column(col).len();
        let entry = ConsensusEntry {
            statement: s.id.clone(),
            score: per_group.iter().product(),
            per_group,
            votes,
            unvoted: votes == 0,
        };
        if entry.unvoted && !include_unvoted {
            excluded.push(entry);
        } else {
            ranking.push(entry);
        }
    }
    ranking.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.statement.cmp(&b.statement)));
    Ok(ConsensusReport { ranking, excluded })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{Participant, Schema, Statement, Vote};

    fn groups(assignment: Vec<usize>, k: usize) -> OpinionGroups {
        OpinionGroups {
            k,
            assignment,
            centroids: vec![],
            silhouettes: vec![],
        }
    }

    /// Builds a matrix from per-participant vote rows over statements s0..
    fn matrix(rows: &[&[Option<f64>]]) -> WillMatrix {
        let mut votes = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if let Some(v) = v {
                    votes.push(Vote::new(format!("p{i}"), format!("s{j}"), *v));
                }
            }
        }
        WillMatrix::build(
            &votes,
            (0..rows.len()).map(|i| Participant::new(format!("p{i}"))).collect(),
            (0..rows[0].len()).map(|j| Statement::new(format!("s{j}"))).collect(),
            Schema::Ternary,
        )
        .unwrap()
    }

    #[test]
    fn formula_values() {
        assert_eq!(smoothed_probability(3, 4), 1.0);
        assert_eq!(smoothed_probability(0, 0), 2.0);
        assert_eq!(smoothed_probability(5, 9), 0.7);
        assert_eq!(smoothed_probability(1, 9), 0.3);
        let ratio = smoothed_probability(1, 9) / smoothed_probability(5, 9);
        assert!((ratio - 3.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn monotone_in_agreement() {
        for t in 0..20 {
            for n in 0..t {
                assert!(smoothed_probability(n + 1, t) >= smoothed_probability(n, t));
            }
        }
    }

    #[test]
    fn report_counts_and_orientation() {
        let a = Some(1.0);
        let d = Some(-1.0);
        let p = Some(0.0);
        // group 0: p0..p2, group 1: p3..p4
        let m = matrix(&[&[a], &[a], &[p], &[d], &[a]]);
        let g = groups(vec![0, 0, 0, 1, 1], 2);
        let r = repness(&m, &g, "s0", 0, VoteValue::Agree, RepnessOptions::default()).unwrap();
        assert_eq!((r.n_g, r.t_g, r.n_gprime, r.t_gprime), (2, 3, 1, 2));
        assert_eq!(r.p_g, 1.0);
        assert_eq!(r.p_gprime, 1.0);
        let no_pass = RepnessOptions {
            count_pass_in_total: false,
            orientation: Orientation::Polis,
        };
        let r = repness(&m, &g, "s0", 0, VoteValue::Agree, no_pass).unwrap();
        assert_eq!(r.t_g, 2);
        assert_eq!(r.ratio, (4.0 / 3.0) / 1.0);
        assert!(r.probability_above_one);
    }

    #[test]
    fn empty_tally_is_flagged() {
        let m = matrix(&[&[None], &[Some(1.0)]]);
        let g = groups(vec![0, 1], 2);
        let r = repness(&m, &g, "s0", 0, VoteValue::Agree, RepnessOptions::default()).unwrap();
        assert_eq!(r.p_g, 2.0);
        assert!(r.probability_above_one);
    }

    #[test]
    fn empty_complement() {
        let m = matrix(&[&[Some(1.0)], &[Some(1.0)]]);
        let g = groups(vec![0, 0], 2);
        assert!(matches!(
            repness(&m, &g, "s0", 0, VoteValue::Agree, RepnessOptions::default()),
            Err(AgoraError::EmptyComplement(0))
        ));
    }

    #[test]
    fn unanimous_statement_tops_consensus_and_unvoted_is_excluded() {
        let a = Some(1.0);
        let d = Some(-1.0);
        let rows: Vec<Vec<Option<f64>>> = (0..8).map(|i| vec![a, if i < 4 { a } else { d }, None]).collect();
        let refs: Vec<&[Option<f64>]> = rows.iter().map(|r| r.as_slice()).collect();
        let m = matrix(&refs);
        let g = groups(vec![0, 0, 0, 0, 1, 1, 1, 1], 2);
        let report = group_informed_consensus(&m, &g, true, false).unwrap();
        assert_eq!(report.ranking[0].statement, "s0");
        // (2+4)/(1+4) in each group
        assert!((report.ranking[0].score - 1.44).abs() < 1e-12);
        assert_eq!(report.excluded.len(), 1);
        assert_eq!(report.excluded[0].score, 4.0);
        let with = group_informed_consensus(&m, &g, true, true).unwrap();
        assert_eq!(with.ranking[0].statement, "s2");
    }

    #[test]
    fn consensus_is_label_invariant() {
        let a = Some(1.0);
        let d = Some(-1.0);
        let m = matrix(&[&[a, d], &[a, a], &[d, a], &[a, d], &[d, d]]);
        let g1 = groups(vec![0, 0, 1, 1, 1], 2);
        let g2 = groups(vec![1, 1, 0, 0, 0], 2);
        let r1 = group_informed_consensus(&m, &g1, true, false).unwrap();
        let r2 = group_informed_consensus(&m, &g2, true, false).unwrap();
        for (x, y) in r1.ranking.iter().zip(&r2.ranking) {
            assert_eq!(x.statement, y.statement);
            assert!((x.score - y.score).abs() < 1e-15);
        }
    }
}
