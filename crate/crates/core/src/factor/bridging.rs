//! Group-minimum approval: a statement bridges as well as its weakest
//! demographic group supports it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{AgoraError, Result};
use crate::matrix::WillMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgingScore {
    pub statement: String,
    pub score: f64,
    /// Approval share per group; `None` when nobody in the group voted.
    pub approvals: BTreeMap<String, Option<f64>>,
    pub voters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgingReport {
    pub attribute: String,
    pub groups: Vec<String>,
    pub count_pass_in_denominator: bool,
    /// Descending by score, ties by statement id.
    pub ranking: Vec<BridgingScore>,
}

/// Scores each statement by the smallest per-group approval share. A group
/// with no voters on a statement contributes a share of zero.
pub fn bridging_minapproval(
    matrix: &WillMatrix,
    attribute: &str,
    count_pass_in_denominator: bool,
) -> Result<BridgingReport> {
    matrix.require_ternary()?;
    let membership: Vec<&str> = matrix
        .participants()
        .iter()
        .map(|p| {
            p.demographics
                .get(attribute)
                .map(String::as_str)
                .ok_or_else(|| AgoraError::MissingAttribute(p.id.clone()))
        })
        .collect::<Result<_>>()?;
    let mut groups: Vec<String> = membership.iter().map(|g| g.to_string()).collect();
    groups.sort();
    groups.dedup();
    if groups.len() < 2 {
        return Err(AgoraError::EmptyGroup(format!(
            "attribute {attribute:?} defines {} group(s), need at least 2",
            groups.len()
        )));
    }
    let group_of: Vec<usize> = membership
        .iter()
        .map(|g| groups.binary_search_by(|x| x.as_str().cmp(g)).expect("group present"))
        .collect();

    let mut ranking: Vec<BridgingScore> = matrix
        .statements()
        .iter()
        .enumerate()
        .map(|(col, s)| {
            let mut agree = vec![0usize; groups.len()];
            let mut voters = vec![0usize; groups.len()];
            for &(row, v) in matrix.column(col) {
                let g = group_of[row];
                if v > 0.0 {
                    agree[g] += 1;
                }
                if v != 0.0 || count_pass_in_denominator {
                    voters[g] += 1;
                }
            }
            let shares: Vec<Option<f64>> = agree
                .iter()
                .zip(&voters)
                .map(|(&a, &t)| (t > 0).then(|| a as f64 / t as f64))
                .collect();
            let score = shares.iter().map(|s| s.unwrap_or(0.0)).fold(f64::INFINITY, f64::min);
            BridgingScore {
                statement: s.id.clone(),
                score,
                approvals: groups.iter().cloned().zip(shares).collect(),
                voters: matrix.column(col).len(),
            }
        })
        .collect();
    ranking.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.statement.cmp(&b.statement)));
    Ok(BridgingReport {
        attribute: attribute.to_string(),
        groups,
        count_pass_in_denominator,
        ranking,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{Participant, Schema, Statement, Vote};

    /// `agree[g]` of `size[g]` members in each group approve; the rest disagree.
    fn build(groups: &[(&str, usize)], support: &[(&str, &[usize])]) -> WillMatrix {
        let mut participants = Vec::new();
        for (g, size) in groups {
            for k in 0..*size {
                participants.push(Participant::new(format!("{g}{k}")).with_attr("party", *g));
            }
        }
        let mut votes = Vec::new();
        for (s, agrees) in support {
            for ((g, size), &a) in groups.iter().zip(agrees.iter()) {
                for k in 0..*size {
                    votes.push(Vote::new(format!("{g}{k}"), *s, if k < a { 1.0 } else { -1.0 }));
                }
            }
        }
        let statements = support.iter().map(|(s, _)| Statement::new(*s)).collect();
        WillMatrix::build(&votes, participants, statements, Schema::Ternary).unwrap()
    }

    #[test]
    fn even_support_scores_half() {
        let m = build(&[("D", 4), ("R", 6)], &[("s", &[2, 3])]);
        let r = bridging_minapproval(&m, "party", true).unwrap();
        assert_eq!(r.ranking[0].score, 0.5);
    }

    #[test]
    fn missing_attribute() {
        let m = WillMatrix::build(
            &[],
            vec![Participant::new("a").with_attr("party", "D"), Participant::new("b")],
            vec![Statement::new("s")],
            Schema::Ternary,
        )
        .unwrap();
        assert!(matches!(
            bridging_minapproval(&m, "party", true),
            Err(AgoraError::MissingAttribute(ref p)) if p == "b"
        ));
    }

    #[test]
    fn single_group_is_rejected() {
        let m = build(&[("D", 3)], &[("s", &[1])]);
        assert!(matches!(
            bridging_minapproval(&m, "party", true),
            Err(AgoraError::EmptyGroup(_))
        ));
    }

    #[test]
    fn relabeling_and_duplication_invariance() {
        let a = build(&[("D", 4), ("R", 5)], &[("s", &[1, 4]), ("t", &[3, 2])]);
        let b = build(&[("X", 4), ("A", 5)], &[("s", &[1, 4]), ("t", &[3, 2])]);
        let c = build(&[("D", 8), ("R", 10)], &[("s", &[2, 8]), ("t", &[6, 4])]);
        let score = |m: &WillMatrix| {
            bridging_minapproval(m, "party", true)
                .unwrap()
                .ranking
                .into_iter()
                .map(|s| (s.statement, s.score))
                .collect::<Vec<_>>()
        };
        assert_eq!(score(&a), score(&b));
        assert_eq!(score(&a), score(&c));
    }

    #[test]
    fn pass_flag_changes_denominator() {
        let participants = vec![
            Participant::new("d0").with_attr("party", "D"),
            Participant::new("d1").with_attr("party", "D"),
            Participant::new("r0").with_attr("party", "R"),
        ];
        let votes = [
            Vote::new("d0", "s", 1.0),
            Vote::new("d1", "s", 0.0),
            Vote::new("r0", "s", 1.0),
        ];
        let m = WillMatrix::build(&votes, participants, vec![Statement::new("s")], Schema::Ternary).unwrap();
        assert_eq!(bridging_minapproval(&m, "party", true).unwrap().ranking[0].score, 0.5);
        assert_eq!(bridging_minapproval(&m, "party", false).unwrap().ranking[0].score, 1.0);
    }
}
