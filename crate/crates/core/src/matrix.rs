//! The will matrix: participants as rows, statements as columns, and a sparse
//! set of votes or ratings in between.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{AgoraError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Participant {
    pub id: String,
    #[serde(default)]
    pub demographics: BTreeMap<String, String>,
}

impl Participant {
    pub fn new(id: impl Into<String>) -> Self {
        Participant {
            id: id.into(),
            demographics: BTreeMap::new(),
        }
    }

    pub fn with_attr(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.demographics.insert(key.into(), value.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statement {
    pub id: String,
    #[serde(default)]
    pub text: String,
    #[serde(default)]
    pub author: Option<String>,
    #[serde(default)]
    pub round: u32,
}

impl Statement {
    pub fn new(id: impl Into<String>) -> Self {
        Statement {
            id: id.into(),
            text: String::new(),
            author: None,
            round: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vote {
    pub participant: String,
    pub statement: String,
    pub value: f64,
}

impl Vote {
    pub fn new(participant: impl Into<String>, statement: impl Into<String>, value: f64) -> Self {
        Vote {
            participant: participant.into(),
            statement: statement.into(),
            value,
        }
    }
}

/// Value domain of the matrix entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "schema", rename_all = "lowercase")]
pub enum Schema {
    /// -1 disagree, 0 pass, +1 agree.
    Ternary,
    /// Real ratings in `[min, max]`.
    Rating { min: f64, max: f64 },
}

impl Schema {
    pub fn check(&self, value: f64) -> bool {
        match *self {
            Schema::Ternary => value == -1.0 || value == 0.0 || value == 1.0,
            Schema::Rating { min, max } => value.is_finite() && value >= min && value <= max,
        }
    }

    /// Midpoint of the value range; ratings above it tally as agreement.
    pub fn midpoint(&self) -> f64 {
        match *self {
            Schema::Ternary => 0.0,
            Schema::Rating { min, max } => 0.5 * (min + max),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Schema::Ternary => "ternary",
            Schema::Rating { .. } => "rating",
        }
    }
}

/// Sparse participant x statement matrix. Immutable once built.
#[derive(Debug, Clone)]
pub struct WillMatrix {
    participants: Vec<Participant>,
    statements: Vec<Statement>,
    schema: Schema,
    entries: BTreeMap<(usize, usize), f64>,
    row_index: HashMap<String, usize>,
    col_index: HashMap<String, usize>,
    // per-column (row, value) lists, rows ascending
    columns: Vec<Vec<(usize, f64)>>,
    rows: Vec<Vec<(usize, f64)>>,
}

impl PartialEq for WillMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.participants == other.participants
            && self.statements == other.statements
            && self.schema == other.schema
            && self.entries == other.entries
    }
}

impl WillMatrix {
    /// Builds the matrix from a vote list. Identical duplicate votes collapse to
    /// one entry; conflicting duplicates are rejected.
    pub fn build(
        votes: &[Vote],
        participants: Vec<Participant>,
        statements: Vec<Statement>,
        schema: Schema,
    ) -> Result<Self> {
        if let Schema::Rating { min, max } = schema {
            if !(min.is_finite() && max.is_finite() && min <= max) {
                return Err(AgoraError::SchemaViolation(format!(
                    "rating bounds [{min}, {max}] are not a finite interval"
                )));
            }
        }
        let row_index = index_ids(participants.iter().map(|p| p.id.as_str()), "participant")?;
        let col_index = index_ids(statements.iter().map(|s| s.id.as_str()), "statement")?;

        let mut entries = BTreeMap::new();
        for vote in votes {
            let row = *row_index
                .get(&vote.participant)
                .ok_or_else(|| AgoraError::UnknownId(vote.participant.clone()))?;
            let col = *col_index
                .get(&vote.statement)
                .ok_or_else(|| AgoraError::UnknownId(vote.statement.clone()))?;
            if !schema.check(vote.value) {
                return Err(AgoraError::SchemaViolation(format!(
                    "value {} for ({}, {}) outside {} schema",
                    vote.value,
                    vote.participant,
                    vote.statement,
                    schema.name()
                )));
            }
            match entries.insert((row, col), vote.value) {
                Some(prev) if prev != vote.value => {
                    return Err(AgoraError::DuplicateVote {
                        participant: vote.participant.clone(),
                        statement: vote.statement.clone(),
                    })
                }
                _ => {}
            }
        }

        let mut columns = vec![Vec::new(); statements.len()];
        let mut rows = vec![Vec::new(); participants.len()];
        for (&(r, c), &v) in &entries {
            columns[c].push((r, v));
            rows[r].push((c, v));
        }
        Ok(WillMatrix {
            participants,
            statements,
            schema,
            entries,
            row_index,
            col_index,
            columns,
            rows,
        })
    }

    pub fn participants(&self) -> &[Participant] {
        &self.participants
    }

    pub fn statements(&self) -> &[Statement] {
        &self.statements
    }

    pub fn schema(&self) -> Schema {
        self.schema
    }

    pub fn n_participants(&self) -> usize {
        self.participants.len()
    }

    pub fn n_statements(&self) -> usize {
        self.statements.len()
    }

    pub fn n_entries(&self) -> usize {
        self.entries.len()
    }

    pub fn density(&self) -> f64 {
        let cells = self.participants.len() * self.statements.len();
        if cells == 0 {
            0.0
        } else {
            self.entries.len() as f64 / cells as f64
        }
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.entries.get(&(row, col)).copied()
    }

    /// All entries in (row, col) order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries.iter().map(|(&(r, c), &v)| (r, c, v))
    }

    pub fn column(&self, col: usize) -> &[(usize, f64)] {
        &self.columns[col]
    }

    pub fn row(&self, row: usize) -> &[(usize, f64)] {
        &self.rows[row]
    }

    pub fn participant_index(&self, id: &str) -> Option<usize> {
        self.row_index.get(id).copied()
    }

    pub fn statement_index(&self, id: &str) -> Option<usize> {
        self.col_index.get(id).copied()
    }

    /// Votes in (row, col) order, re-expressed with ids.
    pub fn votes(&self) -> Vec<Vote> {
        self.entries()
            .map(|(r, c, v)| Vote::new(self.participants[r].id.clone(), self.statements[c].id.clone(), v))
            .collect()
    }

    pub fn require_ternary(&self) -> Result<()> {
        match self.schema {
            Schema::Ternary => Ok(()),
            other => Err(AgoraError::SchemaViolation(format!(
                "operation requires ternary votes, dataset is {}",
                other.name()
            ))),
        }
    }

    pub fn summarize(&self) -> DatasetSummary {
        let mid = self.schema.midpoint();
        let tallies = self
            .statements
            .iter()
            .zip(&self.columns)
            .map(|(s, col)| {
                let mut t = StatementTally {
                    statement: s.id.clone(),
                    agree: 0,
                    disagree: 0,
                    pass: 0,
                    total: col.len(),
                };
                for &(_, v) in col {
                    if v > mid {
                        t.agree += 1;
                    } else if v < mid {
                        t.disagree += 1;
                    } else {
                        t.pass += 1;
                    }
                }
                t
            })
            .collect();
        DatasetSummary {
            n_participants: self.n_participants(),
            n_statements: self.n_statements(),
            n_votes: self.n_entries(),
            density: self.density(),
            tallies,
        }
    }
}

fn index_ids<'a>(ids: impl Iterator<Item = &'a str>, kind: &str) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::new();
    for (i, id) in ids.enumerate() {
        if index.insert(id.to_string(), i).is_some() {
            return Err(AgoraError::DuplicateId(format!("{kind} {id}")));
        }
    }
    Ok(index)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatementTally {
    pub statement: String,
    pub agree: usize,
    pub disagree: usize,
    pub pass: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub n_participants: usize,
    pub n_statements: usize,
    pub n_votes: usize,
    pub density: f64,
    pub tallies: Vec<StatementTally>,
}
