//! JSON Lines readers and writers for datasets, ranking ballots and utility
//! tables.
//!
//! A dataset directory holds `votes.jsonl` (schema header line followed by one
//! vote per line), `participants.jsonl` and `statements.jsonl`. The latter two
//! are optional on load; when absent the ids are taken from the votes in
//! order of first appearance.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{AgoraError, Result};
use crate::matrix::{Participant, Schema, Statement, Vote, WillMatrix};

pub const VOTES_FILE: &str = "votes.jsonl";
pub const PARTICIPANTS_FILE: &str = "participants.jsonl";
pub const STATEMENTS_FILE: &str = "statements.jsonl";

/// Parses every non-blank line of `text` as `T`. Line numbers are 1-based.
pub fn parse_lines<T: DeserializeOwned>(text: &str) -> Result<Vec<(usize, T)>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map(|v| (i + 1, v))
                .map_err(|e| AgoraError::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })
        })
        .collect()
}

fn read_lines<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>> {
    let mut text = String::new();
    for line in BufReader::new(fs::File::open(path)?).lines() {
        text.push_str(&line?);
        text.push('\n');
    }
    parse_lines(&text)
}

/// Parses a votes file: the schema header followed by votes.
pub fn parse_votes(text: &str) -> Result<(Schema, Vec<Vote>)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (header_no, header) = lines.next().ok_or(AgoraError::Parse {
        line: 1,
        message: "missing schema header".into(),
    })?;
    let schema: Schema = serde_json::from_str(header).map_err(|e| AgoraError::Parse {
        line: header_no + 1,
        message: format!("bad schema header: {e}"),
    })?;
    let mut votes = Vec::new();
    for (i, line) in lines {
        let vote: Vote = serde_json::from_str(line).map_err(|e| AgoraError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        if !schema.check(vote.value) {
            return Err(AgoraError::SchemaViolation(format!(
                "line {}: value {} outside {} schema",
                i + 1,
                vote.value,
                schema.name()
            )));
        }
        votes.push(vote);
    }
    Ok((schema, votes))
}

pub fn load_dataset(dir: impl AsRef<Path>) -> Result<WillMatrix> {
    let dir = dir.as_ref();
    let text = fs::read_to_string(dir.join(VOTES_FILE))?;
    let (schema, votes) = parse_votes(&text)?;

    let participants = match optional(&dir.join(PARTICIPANTS_FILE))? {
        Some(text) => parse_lines::<Participant>(&text)?.into_iter().map(|(_, p)| p).collect(),
        None => first_seen(votes.iter().map(|v| v.participant.as_str()))
            .map(Participant::new)
            .collect(),
    };
    let statements = match optional(&dir.join(STATEMENTS_FILE))? {
        Some(text) => parse_lines::<Statement>(&text)?.into_iter().map(|(_, s)| s).collect(),
        None => first_seen(votes.iter().map(|v| v.statement.as_str()))
            .map(Statement::new)
            .collect(),
    };
    WillMatrix::build(&votes, participants, statements, schema)
}

fn optional(path: &Path) -> Result<Option<String>> {
    match fs::read_to_string(path) {
        Ok(t) => Ok(Some(t)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn first_seen<'a>(ids: impl Iterator<Item = &'a str>) -> impl Iterator<Item = &'a str> {
    let mut seen = std::collections::HashSet::new();
    ids.filter(move |id| seen.insert(*id))
}

pub fn votes_to_string(matrix: &WillMatrix) -> String {
    let mut out = serde_json::to_string(&matrix.schema()).expect("schema serializes");
    out.push('\n');
    let ternary = matches!(matrix.schema(), Schema::Ternary);
    for (r, c, v) in matrix.entries() {
        let value = if ternary { json!(v as i64) } else { json!(v) };
        let line = json!({
            "participant": matrix.participants()[r].id,
            "statement": matrix.statements()[c].id,
            "value": value,
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    out
}

pub fn to_jsonl<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn save_dataset(matrix: &WillMatrix, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    write_file(&dir.join(VOTES_FILE), &votes_to_string(matrix))?;
    write_file(&dir.join(PARTICIPANTS_FILE), &to_jsonl(matrix.participants()))?;
    write_file(&dir.join(STATEMENTS_FILE), &to_jsonl(matrix.statements()))?;
    Ok(())
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(contents.as_bytes())?;
    Ok(())
}

/// One line of a rankings file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingLine {
    pub participant: String,
    pub ranking: Vec<String>,
}

pub fn load_rankings(path: impl AsRef<Path>) -> Result<Vec<RankingLine>> {
    Ok(read_lines(path.as_ref())?.into_iter().map(|(_, r)| r).collect())
}

/// One line of a dense utility file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityLine {
    pub participant: String,
    pub statement: String,
    pub utility: f64,
}

pub fn load_utilities(path: impl AsRef<Path>) -> Result<Vec<UtilityLine>> {
    Ok(read_lines(path.as_ref())?.into_iter().map(|(_, r)| r).collect())
}

pub fn load_statements(path: impl AsRef<Path>) -> Result<Vec<Statement>> {
    Ok(read_lines(path.as_ref())?.into_iter().map(|(_, r)| r).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> WillMatrix {
        let participants = vec![Participant::new("a").with_attr("party", "D"), Participant::new("b")];
        let mut s1 = Statement::new("s1");
        s1.text = "more parks".into();
        s1.author = Some("a".into());
        let statements = vec![s1, Statement::new("s2")];
        let votes = [
            Vote::new("a", "s1", 1.0),
            Vote::new("b", "s1", 0.0),
            Vote::new("b", "s2", -1.0),
        ];
        WillMatrix::build(&votes, participants, statements, Schema::Ternary).unwrap()
    }

    #[test]
    fn save_then_load_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let m = sample();
        save_dataset(&m, dir.path()).unwrap();
        let back = load_dataset(dir.path()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn malformed_line_reports_its_number() {
        let text = "{\"schema\":\"ternary\"}\n\
                    {\"participant\":\"a\",\"statement\":\"s\",\"value\":1}\n\
                    {\"participant\":\"a\",\"statement\":\"t\",\"value\":1}\n\
                    {\"participant\":\"b\",\"statement\":\"s\",\"value\":-1}\n\
                    {\"participant\":\"b\",\"statement\":\n";
        match parse_votes(text) {
            Err(AgoraError::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn rating_value_above_max_is_rejected() {
        let text = "{\"schema\":\"rating\",\"min\":1,\"max\":5}\n\
                    {\"participant\":\"a\",\"statement\":\"s\",\"value\":7}\n";
        assert!(matches!(parse_votes(text), Err(AgoraError::SchemaViolation(_))));
    }

    #[test]
    fn missing_side_files_are_derived_from_votes() {
        let dir = tempfile::tempdir().unwrap();
        write_file(
            &dir.path().join(VOTES_FILE),
            "{\"schema\":\"ternary\"}\n\
             {\"participant\":\"y\",\"statement\":\"t\",\"value\":1}\n\
             {\"participant\":\"x\",\"statement\":\"t\",\"value\":0}\n",
        )
        .unwrap();
        let m = load_dataset(dir.path()).unwrap();
        let ids: Vec<_> = m.participants().iter().map(|p| p.id.as_str()).collect();
        assert_eq!(ids, ["y", "x"]);
        assert_eq!(m.n_statements(), 1);
    }
}
