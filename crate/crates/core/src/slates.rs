//! Proportional slates: greedy selection of k statements where each round
//! serves the next `ceil(remaining / rounds_left)` participants, plus checks
//! for justified representation in its approval and rating forms.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{AgoraError, Result};
use crate::io::UtilityLine;

/// Dense utilities, `values[participant][statement]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityTable {
    pub participants: Vec<String>,
    pub statements: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl UtilityTable {
    pub fn new(participants: Vec<String>, statements: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != participants.len() || values.iter().any(|row| row.len() != statements.len()) {
            return Err(AgoraError::InvalidArgument("utility table shape mismatch".into()));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(AgoraError::NonFinite("utility table holds a non-finite value".into()));
        }
        for ids in [&participants, &statements] {
            let mut sorted: Vec<&String> = ids.iter().collect();
            sorted.sort();
            if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
                return Err(AgoraError::DuplicateId(w[0].clone()));
            }
        }
        Ok(UtilityTable {
            participants,
            statements,
            values,
        })
    }

    /// Generic ids `p0..` and `s0..`.
    pub fn from_values(values: Vec<Vec<f64>>) -> Result<Self> {
        let m = values.first().map_or(0, Vec::len);
        let participants = (0..values.len()).map(|i| format!("p{i}")).collect();
        let statements = (0..m).map(|j| format!("s{j}")).collect();
        Self::new(participants, statements, values)
    }

    /// Assembles a dense table from utility lines. Participant and statement
    /// order follow first appearance unless `pool` fixes the statement order.
    pub fn from_lines(lines: &[UtilityLine], pool: Option<&[String]>) -> Result<Self> {
        let mut participants: Vec<String> = Vec::new();
        let mut p_index = HashMap::new();
        let mut statements: Vec<String> = pool.map(<[String]>::to_vec).unwrap_or_default();
        let mut s_index: HashMap<String, usize> = statements.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        for l in lines {
            if !p_index.contains_key(&l.participant) {
                p_index.insert(l.participant.clone(), participants.len());
                participants.push(l.participant.clone());
            }
            if !s_index.contains_key(&l.statement) {
                if pool.is_some() {
                    return Err(AgoraError::UnknownId(l.statement.clone()));
                }
                s_index.insert(l.statement.clone(), statements.len());
                statements.push(l.statement.clone());
            }
        }
        let mut values = vec![vec![f64::NAN; statements.len()]; participants.len()];
        for l in lines {
            let cell = &mut values[p_index[&l.participant]][s_index[&l.statement]];
            if !cell.is_nan() && *cell != l.utility {
                return Err(AgoraError::DuplicateVote {
                    participant: l.participant.clone(),
                    statement: l.statement.clone(),
                });
            }
            *cell = l.utility;
        }
        for (i, row) in values.iter().enumerate() {
            if let Some(j) = row.iter().position(|v| v.is_nan()) {
                return Err(AgoraError::InvalidArgument(format!(
                    "utilities must be dense: missing ({}, {})",
                    participants[i], statements[j]
                )));
            }
        }
        Self::new(participants, statements, values)
    }

    pub fn n_participants(&self) -> usize {
        self.participants.len()
    }

    pub fn n_statements(&self) -> usize {
        self.statements.len()
    }

    pub fn statement_index(&self, id: &str) -> Option<usize> {
        self.statements.iter().position(|s| s == id)
    }

    /// Approval view: approve when utility is at least `threshold`.
    pub fn approvals(&self, threshold: f64) -> Vec<Vec<bool>> {
        self.values
            .iter()
            .map(|row| row.iter().map(|&u| u >= threshold).collect())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slate {
    /// Selected statement ids in selection order.
    pub selected: Vec<String>,
    /// Participants labelled satisfied by each selected statement.
    pub matched_groups: Vec<Vec<String>>,
    /// Quota served in each round.
    pub quotas: Vec<usize>,
    /// The quota-th utility that won each round.
    pub round_values: Vec<f64>,
}

fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

/// Greedy slate of size `k`. Round r (1-based) serves `q = ceil(|A| / (k - r + 1))`
/// active participants: it picks the statement whose q-th highest active
/// utility is largest (ties by statement id) and retires its top-q supporters
/// (ties by participant id).
pub fn greedy_slate(table: &UtilityTable, k: usize) -> Result<Slate> {
    let (n, m) = (table.n_participants(), table.n_statements());
    if k == 0 {
        return Err(AgoraError::InvalidArgument("k must be >= 1".into()));
    }
    if m < k {
        return Err(AgoraError::PoolExhausted {
            needed: k,
            available: m,
        });
    }
    if n < k {
        return Err(AgoraError::InvalidArgument(format!(
            "need at least k = {k} participants, got {n}"
        )));
    }

    let mut active: Vec<usize> = (0..n).collect();
    let mut taken = vec![false; m];
    let mut slate = Slate {
        selected: Vec::with_capacity(k),
        matched_groups: Vec::with_capacity(k),
        quotas: Vec::with_capacity(k),
        round_values: Vec::with_capacity(k),
    };
    for r in 1..=k {
        let q = ceil_div(active.len(), k - r + 1);
        let mut best: Option<(usize, f64)> = None;
        for s in (0..m).filter(|&s| !taken[s]) {
            let mut column: Vec<f64> = active.iter().map(|&p| table.values[p][s]).collect();
            column.sort_by(|a, b| b.total_cmp(a));
            let value = column[q - 1];
            let better = match best {
                None => true,
                Some((b, bv)) => value > bv || (value == bv && table.statements[s] < table.statements[b]),
            };
            if better {
                best = Some((s, value));
            }
        }
        let (s, value) = best.expect("pool holds at least k statements");
        taken[s] = true;
        active.sort_by(|&a, &b| {
            table.values[b][s]
                .total_cmp(&table.values[a][s])
                .then_with(|| table.participants[a].cmp(&table.participants[b]))
        });
        let satisfied: Vec<usize> = active.drain(..q).collect();
        active.sort_unstable();
        slate.selected.push(table.statements[s].clone());
        slate
            .matched_groups
            .push(satisfied.iter().map(|&p| table.participants[p].clone()).collect());
        slate.quotas.push(q);
        slate.round_values.push(value);
    }
    Ok(slate)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JrWitness {
    /// Participant indices of the unrepresented cohesive group.
    pub group: Vec<usize>,
    /// The commonly approved candidate (approval form) or the item every
    /// member strictly prefers to the whole committee (rating form).
    pub candidate: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum JrVerdict {
    Satisfied,
    Violated(JrWitness),
}

impl JrVerdict {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, JrVerdict::Satisfied)
    }
}

fn check_committee(n_items: usize, committee: &[usize], k: usize) -> Result<()> {
    if committee.len() != k || k == 0 {
        return Err(AgoraError::InvalidArgument(format!(
            "committee has {} members, expected k = {k} >= 1",
            committee.len()
        )));
    }
    if let Some(&c) = committee.iter().find(|&&c| c >= n_items) {
        return Err(AgoraError::IndexOutOfRange(format!("committee member {c}")));
    }
    Ok(())
}

/// Candidate indices sorted by id, for first-witness reporting.
fn by_id(ids: &[String]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by(|&a, &b| ids[a].cmp(&ids[b]));
    order
}

/// Approval-based justified representation. A violation is a candidate `c`
/// whose approvers who approve nothing in the committee number at least
/// `ceil(n / k)`.
pub fn jr_check_approval(
    approvals: &[Vec<bool>],
    candidate_ids: &[String],
    committee: &[usize],
    k: usize,
) -> Result<JrVerdict> {
    let n = approvals.len();
    check_committee(candidate_ids.len(), committee, k)?;
    let threshold = ceil_div(n, k);
    let unrepresented: Vec<usize> = (0..n)
        .filter(|&v| !committee.iter().any(|&c| approvals[v][c]))
        .collect();
    for c in by_id(candidate_ids) {
        let group: Vec<usize> = unrepresented.iter().copied().filter(|&v| approvals[v][c]).collect();
        if !group.is_empty() && group.len() >= threshold {
            return Ok(JrVerdict::Violated(JrWitness { group, candidate: c }));
        }
    }
    Ok(JrVerdict::Satisfied)
}

/// Rating-based justified representation. A violation is an item outside
/// the committee that at least `ceil(n / k)` participants each rate strictly
/// above every committee item.
pub fn jr_check_rating(table: &UtilityTable, committee: &[usize], k: usize) -> Result<JrVerdict> {
    check_committee(table.n_statements(), committee, k)?;
    let threshold = ceil_div(table.n_participants(), k);
    let best_in_committee: Vec<f64> = table
        .values
        .iter()
        .map(|row| committee.iter().map(|&c| row[c]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    for j in by_id(&table.statements) {
        if committee.contains(&j) {
            continue;
        }
        let group: Vec<usize> = (0..table.n_participants())
            .filter(|&p| table.values[p][j] > best_in_committee[p])
            .collect();
        if !group.is_empty() && group.len() >= threshold {
            return Ok(JrVerdict::Violated(JrWitness { group, candidate: j }));
        }
    }
    Ok(JrVerdict::Satisfied)
}

/// Resolves slate ids to statement indices of `table`.
pub fn committee_indices(table: &UtilityTable, slate: &Slate) -> Result<Vec<usize>> {
    slate
        .selected
        .iter()
        .map(|s| table.statement_index(s).ok_or_else(|| AgoraError::UnknownId(s.clone())))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedEntry {
    pub participant: String,
    pub matched: String,
    /// Utility of the matched statement minus the best other slate member;
    /// `None` when the slate has a single statement.
    pub slack: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedReport {
    pub satisfied: bool,
    pub entries: Vec<MatchedEntry>,
    /// Entries with negative slack.
    pub violations: Vec<MatchedEntry>,
}

/// Checks that every matched participant rates its own statement at least as
/// high as every other statement on the slate.
pub fn matched_jr_check(slate: &Slate, table: &UtilityTable) -> Result<MatchedReport> {
    let committee = committee_indices(table, slate)?;
    let p_index: HashMap<&str, usize> = table
        .participants
        .iter()
        .enumerate()
        .map(|(i, p)| (p.as_str(), i))
        .collect();
    let mut entries = Vec::new();
    for (slot, group) in slate.matched_groups.iter().enumerate() {
        let own = committee[slot];
        for pid in group {
            let p = *p_index
                .get(pid.as_str())
                .ok_or_else(|| AgoraError::UnknownId(pid.clone()))?;
            let row = &table.values[p];
            let other = committee
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != slot)
                .map(|(_, &c)| row[c])
                .fold(f64::NEG_INFINITY, f64::max);
            entries.push(MatchedEntry {
                participant: pid.clone(),
                matched: slate.selected[slot].clone(),
                slack: other.is_finite().then(|| row[own] - other),
            });
        }
    }
    let violations: Vec<MatchedEntry> = entries
        .iter()
        .filter(|e| e.slack.is_some_and(|s| s < 0.0))
        .cloned()
        .collect();
    Ok(MatchedReport {
        satisfied: violations.is_empty(),
        entries,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    #[test]
    fn k_one_is_max_min() {
        let t = UtilityTable::from_values(vec![vec![0.9, 0.5, 0.1], vec![0.1, 0.6, 0.9], vec![0.8, 0.4, 0.8]]).unwrap();
        let s = greedy_slate(&t, 1).unwrap();
        assert_eq!(s.selected, vec!["s1"]);
        assert_eq!(s.quotas, vec![3]);
        assert_eq!(s.round_values, vec![0.4]);
        let m = matched_jr_check(&s, &t).unwrap();
        assert!(m.satisfied);
        assert!(m.entries.iter().all(|e| e.slack.is_none()));
    }

    #[test]
    fn distinct_loves() {
        let n = 4;
        let values = (0..n)
            .map(|i| (0..n).map(|j| if (i + 1) % n == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let t = UtilityTable::from_values(values).unwrap();
        let s = greedy_slate(&t, n).unwrap();
        let mut sel = s.selected.clone();
        sel.sort();
        assert_eq!(sel, ids("s", n));
        for (stmt, group) in s.selected.iter().zip(&s.matched_groups) {
            let j: usize = stmt[1..].parse().unwrap();
            assert_eq!(group, &vec![format!("p{}", (j + n - 1) % n)]);
        }
        let m = matched_jr_check(&s, &t).unwrap();
        assert!(m.satisfied);
        assert!(m.entries.iter().all(|e| e.slack == Some(1.0)));
    }

    #[test]
    fn matched_groups_partition_participants() {
        let t = UtilityTable::from_values(
            (0..7)
                .map(|i| (0..5).map(|j| ((i * 7 + j * 3) % 11) as f64).collect())
                .collect(),
        )
        .unwrap();
        let s = greedy_slate(&t, 3).unwrap();
        assert_eq!(s.quotas, vec![3, 2, 2]);
        let mut all: Vec<&String> = s.matched_groups.iter().flatten().collect();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 7);
    }

    #[test]
    fn pool_exhausted() {
        let t = UtilityTable::from_values(vec![vec![1.0], vec![0.0]]).unwrap();
        assert!(matches!(greedy_slate(&t, 2), Err(AgoraError::PoolExhausted { .. })));
    }

    #[test]
    fn approval_jr_examples() {
        let cands = ids("c", 3);
        // everyone approves something in the committee {c0}
        let all = vec![vec![true, true, false]; 4];
        assert!(jr_check_approval(&all, &cands, &[0, 1], 2).unwrap().is_satisfied());
        // two of four voters approve only c2, committee {c0, c1}
        let approvals = vec![
            vec![true, false, false],
            vec![false, true, false],
            vec![false, false, true],
            vec![false, false, true],
        ];
        match jr_check_approval(&approvals, &cands, &[0, 1], 2).unwrap() {
            JrVerdict::Violated(w) => {
                assert_eq!(w.candidate, 2);
                assert_eq!(w.group, vec![2, 3]);
            }
            JrVerdict::Satisfied => panic!("expected a violation"),
        }
    }

    #[test]
    fn rating_jr_examples() {
        // committee holds every participant's top item
        let t = UtilityTable::from_values(vec![vec![0.9, 0.1, 0.5], vec![0.2, 0.8, 0.5]]).unwrap();
        assert!(jr_check_rating(&t, &[0, 1], 2).unwrap().is_satisfied());
        // n = 2, k = 1: both prefer s1 to the sole committee item s0
        let t = UtilityTable::from_values(vec![vec![0.1, 0.9], vec![0.2, 0.3]]).unwrap();
        assert_eq!(
            jr_check_rating(&t, &[0], 1).unwrap(),
            JrVerdict::Violated(JrWitness {
                group: vec![0, 1],
                candidate: 1
            })
        );
    }

    #[test]
    fn greedy_from_a_fixed_pool_can_violate_rating_jr() {
        // p0 and p1 both rate s0 above every slate item; p0 is retired in
        // round one by s1, leaving p1 to share round two with p3.
        let t = UtilityTable::from_values(vec![
            vec![0.9, 0.8, 0.0],
            vec![0.5, 0.0, 0.1],
            vec![0.0, 0.85, 0.0],
            vec![0.0, 0.0, 0.5],
        ])
        .unwrap();
        let s = greedy_slate(&t, 2).unwrap();
        assert_eq!(s.selected, vec!["s1", "s2"]);
        let committee = committee_indices(&t, &s).unwrap();
        assert_eq!(
            jr_check_rating(&t, &committee, 2).unwrap(),
            JrVerdict::Violated(JrWitness {
                group: vec![0, 1],
                candidate: 0
            })
        );
    }

    #[test]
    fn dense_lines_required() {
        let lines = vec![
            UtilityLine {
                participant: "a".into(),
                statement: "x".into(),
                utility: 1.0,
            },
            UtilityLine {
                participant: "b".into(),
                statement: "y".into(),
                utility: 1.0,
            },
        ];
        assert!(UtilityTable::from_lines(&lines, None).is_err());
    }
}
