//! Ranked-ballot rules over strict total orders: plurality, Borda, Condorcet
//! analysis and the Schulze method.
//!
//! All rules break residual ties by candidate id and say so through a tie
//! flag rather than silently.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{AgoraError, Result};
use crate::io::RankingLine;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankingProfile {
    candidates: Vec<String>,
    /// Each ballot lists candidate indices from most to least preferred.
    rankings: Vec<Vec<usize>>,
}

impl RankingProfile {
    /// Validates that every ballot is a permutation of `candidates`.
    pub fn new(candidates: Vec<String>, rankings: Vec<Vec<usize>>) -> Result<Self> {
        if rankings.is_empty() {
            return Err(AgoraError::EmptyInput("profile needs at least one ranking".into()));
        }
        let c = candidates.len();
        let mut sorted = candidates.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(AgoraError::DuplicateId("candidate listed twice".into()));
        }
        for (b, ranking) in rankings.iter().enumerate() {
            let mut seen = vec![false; c];
            if ranking.len() != c {
                return Err(AgoraError::InvalidRanking(format!(
                    "ballot {b} ranks {} of {c} candidates",
                    ranking.len()
                )));
            }
            for &x in ranking {
                if x >= c || std::mem::replace(&mut seen[x], true) {
                    return Err(AgoraError::InvalidRanking(format!(
                        "ballot {b} is not a strict total order"
                    )));
                }
            }
        }
        Ok(RankingProfile { candidates, rankings })
    }

    /// Builds a profile from id-labelled ballots. Candidates are taken from
    /// the first ballot, in its order.
    pub fn from_ids<S: AsRef<str>>(ballots: &[Vec<S>]) -> Result<Self> {
        let first = ballots
            .first()
            .ok_or_else(|| AgoraError::EmptyInput("profile needs at least one ranking".into()))?;
        let candidates: Vec<String> = first.iter().map(|s| s.as_ref().to_string()).collect();
        let index: HashMap<&str, usize> = candidates.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
        let rankings = ballots
            .iter()
            .map(|b| {
                b.iter()
                    .map(|s| {
                        index
                            .get(s.as_ref())
                            .copied()
                            .ok_or_else(|| AgoraError::InvalidRanking(format!("unknown candidate {}", s.as_ref())))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        RankingProfile::new(candidates, rankings)
    }

    pub fn from_lines(lines: &[RankingLine]) -> Result<Self> {
        let ballots: Vec<Vec<&str>> = lines
            .iter()
            .map(|l| l.ranking.iter().map(String::as_str).collect())
            .collect();
        Self::from_ids(&ballots)
    }

    /// `count` copies of the ballot given by ids.
    pub fn repeat(ballots: &[(usize, &[&str])]) -> Result<Self> {
        let expanded: Vec<Vec<&str>> = ballots
            .iter()
            .flat_map(|(count, b)| std::iter::repeat_n(b.to_vec(), *count))
            .collect();
        Self::from_ids(&expanded)
    }

    pub fn candidates(&self) -> &[String] {
        &self.candidates
    }

    pub fn rankings(&self) -> &[Vec<usize>] {
        &self.rankings
    }

    pub fn n_voters(&self) -> usize {
        self.rankings.len()
    }

    pub fn n_candidates(&self) -> usize {
        self.candidates.len()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.candidates.iter().position(|c| c == id)
    }
}

/// `d[x][y]`: number of voters ranking x above y.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairwiseMatrix {
    pub candidates: Vec<String>,
    pub d: Vec<Vec<usize>>,
}

impl PairwiseMatrix {
    pub fn from_profile(profile: &RankingProfile) -> Self {
        let c = profile.n_candidates();
        let mut d = vec![vec![0; c]; c];
        let mut position = vec![0; c];
        for ranking in profile.rankings() {
            for (pos, &x) in ranking.iter().enumerate() {
                position[x] = pos;
            }
            for x in 0..c {
                for y in 0..c {
                    if x != y && position[x] < position[y] {
                        d[x][y] += 1;
                    }
                }
            }
        }
        PairwiseMatrix {
            candidates: profile.candidates().to_vec(),
            d,
        }
    }

    /// x beats y by strict majority of head-to-head preferences.
    pub fn beats(&self, x: usize, y: usize) -> bool {
        self.d[x][y] > self.d[y][x]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallotResult {
    pub rule: String,
    pub winner: String,
    /// All candidates, best first.
    pub order: Vec<String>,
    /// Per-candidate score in candidate order, for scoring rules.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scores: Option<Vec<(String, f64)>>,
    /// The winner was decided by the id tie-break.
    pub tie: bool,
}

/// Order candidates by score descending, then id; flag a tie at the top.
fn scored(rule: &str, profile: &RankingProfile, scores: Vec<f64>) -> BallotResult {
    let ids = profile.candidates();
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then_with(|| ids[a].cmp(&ids[b])));
    let top = scores[order[0]];
    let tie = scores.iter().filter(|&&s| s == top).count() > 1;
    BallotResult {
        rule: rule.to_string(),
        winner: ids[order[0]].clone(),
        order: order.iter().map(|&i| ids[i].clone()).collect(),
        scores: Some(ids.iter().cloned().zip(scores).collect()),
        tie,
    }
}

pub fn plurality(profile: &RankingProfile) -> BallotResult {
    let mut firsts = vec![0.0; profile.n_candidates()];
    for r in profile.rankings() {
        firsts[r[0]] += 1.0;
    }
    scored("plurality", profile, firsts)
}

/// Last place earns 0 points, next-to-last 1, up to `c - 1` for first.
pub fn borda(profile: &RankingProfile) -> BallotResult {
    let c = profile.n_candidates();
    let mut points = vec![0.0; c];
    for r in profile.rankings() {
        for (pos, &x) in r.iter().enumerate() {
            points[x] += (c - 1 - pos) as f64;
        }
    }
    scored("borda", profile, points)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum CondorcetOutcome {
    Winner {
        winner: String,
        pairwise: PairwiseMatrix,
    },
    /// No candidate beats all others. `cycle` is set when the strict
    /// majority relation contains a directed cycle.
    NoWinner {
        cycle: bool,
        pairwise: PairwiseMatrix,
    },
}

impl CondorcetOutcome {
    pub fn winner(&self) -> Option<&str> {
        match self {
            CondorcetOutcome::Winner { winner, .. } => Some(winner),
            CondorcetOutcome::NoWinner { .. } => None,
        }
    }

    pub fn has_cycle(&self) -> bool {
        matches!(self, CondorcetOutcome::NoWinner { cycle: true, .. })
    }
}

pub fn condorcet(profile: &RankingProfile) -> CondorcetOutcome {
    let pairwise = PairwiseMatrix::from_profile(profile);
    let c = profile.n_candidates();
    if let Some(w) = (0..c).find(|&x| (0..c).all(|y| y == x || pairwise.beats(x, y))) {
        return CondorcetOutcome::Winner {
            winner: profile.candidates()[w].clone(),
            pairwise,
        };
    }
    let cycle = majority_cycle(&pairwise);
    CondorcetOutcome::NoWinner { cycle, pairwise }
}

/// Detects a directed cycle in the strict-majority graph by repeatedly
/// stripping candidates that beat nobody remaining.
fn majority_cycle(p: &PairwiseMatrix) -> bool {
    let c = p.d.len();
    let mut alive = vec![true; c];
    loop {
        let sink = (0..c).find(|&x| alive[x] && !(0..c).any(|y| alive[y] && p.beats(x, y)));
        match sink {
            Some(x) => alive[x] = false,
            None => return alive.iter().any(|&a| a),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchulzeResult {
    pub result: BallotResult,
    pub pairwise: PairwiseMatrix,
    /// `p[x][y]`: strength of the strongest path from x to y.
    pub strongest_paths: Vec<Vec<usize>>,
    /// Some position in the full order was settled by the id tie-break.
    pub order_has_ties: bool,
}

/// Widest-path strengths with winning-votes links: a link x->y has strength
/// `d[x][y]` when x wins the pair, else 0.
pub fn strongest_paths(pairwise: &PairwiseMatrix) -> Vec<Vec<usize>> {
    let c = pairwise.d.len();
    let mut p = vec![vec![0; c]; c];
    for x in 0..c {
        for y in 0..c {
            if x != y && pairwise.beats(x, y) {
                p[x][y] = pairwise.d[x][y];
            }
        }
    }
    for k in 0..c {
        for x in 0..c {
            if x == k {
                continue;
            }
            for y in 0..c {
                if y != k && y != x {
                    p[x][y] = p[x][y].max(p[x][k].min(p[k][y]));
                }
            }
        }
    }
    p
}

pub fn schulze(profile: &RankingProfile) -> SchulzeResult {
    let pairwise = PairwiseMatrix::from_profile(profile);
    let p = strongest_paths(&pairwise);
    let ids = profile.candidates();
    let c = ids.len();

    // Peel off unbeaten candidates one at a time, lowest id first.
    let mut remaining: Vec<usize> = (0..c).collect();
    let mut order = Vec::with_capacity(c);
    let mut tie = false;
    let mut order_has_ties = false;
    while !remaining.is_empty() {
        let mut unbeaten: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&x| !remaining.iter().any(|&y| p[y][x] > p[x][y]))
            .collect();
        if unbeaten.is_empty() {
            // the Schulze relation is acyclic, so this only guards bad input
            unbeaten = remaining.clone();
        }
        unbeaten.sort_by(|&a, &b| ids[a].cmp(&ids[b]));
        if unbeaten.len() > 1 {
            order_has_ties = true;
            if order.is_empty() {
                tie = true;
            }
        }
        let pick = unbeaten[0];
        order.push(pick);
        remaining.retain(|&x| x != pick);
    }
    SchulzeResult {
        result: BallotResult {
            rule: "schulze".into(),
            winner: ids[order[0]].clone(),
            order: order.iter().map(|&i| ids[i].clone()).collect(),
            scores: None,
            tie,
        },
        pairwise,
        strongest_paths: p,
        order_has_ties,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Plurality,
    Borda,
    Schulze,
}

impl Rule {
    pub fn winner(self, profile: &RankingProfile) -> BallotResult {
        match self {
            Rule::Plurality => plurality(profile),
            Rule::Borda => borda(profile),
            Rule::Schulze => schulze(profile).result,
        }
    }
}

/// Inserts `n_clones` copies of `candidate` next to it on every ballot. The
/// order inside the clone block is shuffled per ballot from `seed`. Clone ids
/// are `<candidate>~1`, `<candidate>~2`, ...
pub fn clone_candidate(
    profile: &RankingProfile,
    candidate: &str,
    n_clones: usize,
    seed: u64,
) -> Result<RankingProfile> {
    if n_clones == 0 {
        return Err(AgoraError::InvalidArgument("n_clones must be >= 1".into()));
    }
    let target = profile
        .index_of(candidate)
        .ok_or_else(|| AgoraError::UnknownId(candidate.to_string()))?;
    let c = profile.n_candidates();
    let mut candidates = profile.candidates().to_vec();
    for k in 1..=n_clones {
        let id = format!("{candidate}~{k}");
        if candidates.contains(&id) {
            return Err(AgoraError::DuplicateId(id));
        }
        candidates.push(id);
    }
    let mut rng = rng::seeded(seed);
    let rankings = profile
        .rankings()
        .iter()
        .map(|r| {
            let mut block: Vec<usize> = std::iter::once(target).chain(c..c + n_clones).collect();
            block.shuffle(&mut rng);
            r.iter()
                .flat_map(|&x| if x == target { block.clone() } else { vec![x] })
                .collect()
        })
        .collect();
    RankingProfile::new(candidates, rankings)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloneReport {
    pub rule: Rule,
    pub candidate: String,
    pub n_clones: usize,
    pub winner_before: String,
    /// Winner on the cloned profile, as returned.
    pub winner_after_raw: String,
    /// Same, with any clone mapped back to the cloned candidate.
    pub winner_after: String,
    pub unchanged: bool,
}

pub fn clone_test(
    profile: &RankingProfile,
    candidate: &str,
    n_clones: usize,
    seed: u64,
    rule: Rule,
) -> Result<CloneReport> {
    let cloned = clone_candidate(profile, candidate, n_clones, seed)?;
    let before = rule.winner(profile).winner;
    let raw = rule.winner(&cloned).winner;
    let after = match raw.split_once('~') {
        Some((base, _)) if base == candidate => candidate.to_string(),
        _ => raw.clone(),
    };
    Ok(CloneReport {
        rule,
        candidate: candidate.to_string(),
        n_clones,
        unchanged: before == after,
        winner_before: before,
        winner_after_raw: raw,
        winner_after: after,
    })
}
