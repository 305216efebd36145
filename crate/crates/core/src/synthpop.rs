//! Seeded synthetic populations with known latent structure.
//!
//! Agents hold ideal points around cluster centres, statements are points in
//! the same space, and votes follow the sign of their inner product outside a
//! pass band. Everything here is a pure function of its parameters and seed.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{AgoraError, Result};
use crate::factor::LatentFactors;
use crate::matrix::{Participant, Schema, Statement, Vote, WillMatrix};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub ideal_point: Vec<f64>,
    pub noise_scale: f64,
    pub pass_band: f64,
}

/// Cluster centres with per-cluster head counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    pub centers: Vec<Vec<f64>>,
    pub counts: Vec<usize>,
    /// Standard deviation of the isotropic Gaussian around each centre.
    pub spread: f64,
    pub noise_scale: f64,
    pub pass_band: f64,
}

impl ClusterSpec {
    pub fn new(centers: Vec<Vec<f64>>, counts: Vec<usize>) -> Self {
        ClusterSpec {
            centers,
            counts,
            spread: 0.1,
            noise_scale: 0.0,
            pass_band: 0.0,
        }
    }

    pub fn spread(mut self, spread: f64) -> Self {
        self.spread = spread;
        self
    }

    pub fn noise(mut self, noise_scale: f64) -> Self {
        self.noise_scale = noise_scale;
        self
    }

    pub fn pass_band(mut self, pass_band: f64) -> Self {
        self.pass_band = pass_band;
        self
    }

    /// Parses the compact form `KxS@(c..);(c..)` (K clusters of S agents) or
    /// `S1,S2@(c..);(c..)` (explicit counts).
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |why: &str| AgoraError::BadSpec(format!("cluster layout {text:?}: {why}"));
        let (counts_part, centers_part) = text.split_once('@').ok_or_else(|| bad("missing '@'"))?;
        let counts: Vec<usize> = if let Some((k, s)) = counts_part.split_once('x') {
            let k: usize = k.trim().parse().map_err(|_| bad("bad cluster count"))?;
            let s: usize = s.trim().parse().map_err(|_| bad("bad cluster size"))?;
            vec![s; k]
        } else {
            counts_part
                .split(',')
                .map(|c| c.trim().parse().map_err(|_| bad("bad cluster size")))
                .collect::<Result<_>>()?
        };
        let centers: Vec<Vec<f64>> = centers_part
            .split(';')
            .map(|c| {
                let inner = c
                    .trim()
                    .strip_prefix('(')
                    .and_then(|c| c.strip_suffix(')'))
                    .ok_or_else(|| bad("centre must be parenthesised"))?;
                inner
                    .split(',')
                    .map(|x| x.trim().parse::<f64>().map_err(|_| bad("bad coordinate")))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        if centers.len() != counts.len() {
            return Err(bad("number of centres differs from number of counts"));
        }
        Ok(ClusterSpec::new(centers, counts))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticWorld {
    pub seed: u64,
    pub dims: usize,
    pub agents: Vec<AgentSpec>,
    /// Generating cluster of each agent.
    pub labels: Vec<usize>,
    pub statement_points: Vec<Vec<f64>>,
    #[serde(default)]
    pub ground_truth: Option<LatentFactors>,
}

pub fn participant_id(i: usize) -> String {
    format!("p{i}")
}

pub fn statement_id(j: usize) -> String {
    format!("s{j}")
}

pub fn generate_world(n: usize, m: usize, d: usize, seed: u64, layout: &ClusterSpec) -> Result<SyntheticWorld> {
    if n == 0 || m == 0 || d == 0 {
        return Err(AgoraError::BadSpec("n, m and d must be at least 1".into()));
    }
    if layout.counts.iter().sum::<usize>() != n {
        return Err(AgoraError::BadSpec(format!(
            "cluster counts sum to {}, expected {n}",
            layout.counts.iter().sum::<usize>()
        )));
    }
    if layout.centers.iter().any(|c| c.len() != d) {
        return Err(AgoraError::BadSpec(format!("every centre must have dimension {d}")));
    }
    if !(layout.spread >= 0.0 && layout.noise_scale >= 0.0 && layout.pass_band >= 0.0) {
        return Err(AgoraError::BadSpec(
            "spread, noise and pass band must be non-negative".into(),
        ));
    }

    let mut rng = rng::seeded(seed);
    let mut agents = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for (label, (center, &count)) in layout.centers.iter().zip(&layout.counts).enumerate() {
        for _ in 0..count {
            let ideal_point = center
                .iter()
                .map(|c| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    c + layout.spread * z
                })
                .collect();
            agents.push(AgentSpec {
                ideal_point,
                noise_scale: layout.noise_scale,
                pass_band: layout.pass_band,
            });
            labels.push(label);
        }
    }
    let unit = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
    let statement_points = (0..m)
        .map(|_| (0..d).map(|_| unit.sample(&mut rng)).collect())
        .collect();
    Ok(SyntheticWorld {
        seed,
        dims: d,
        agents,
        labels,
        statement_points,
        ground_truth: None,
    })
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

impl SyntheticWorld {
    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn n_statements(&self) -> usize {
        self.statement_points.len()
    }

    pub fn participants(&self) -> Vec<Participant> {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, l)| Participant::new(participant_id(i)).with_attr("cluster", l.to_string()))
            .collect()
    }

    pub fn statements(&self) -> Vec<Statement> {
        (0..self.n_statements())
            .map(|j| Statement::new(statement_id(j)))
            .collect()
    }

    /// Ternary votes on a uniformly sampled subset of (agent, statement) pairs.
    pub fn cast_votes(&self, density: f64, seed: u64) -> Result<WillMatrix> {
        if !(density > 0.0 && density <= 1.0) {
            return Err(AgoraError::InvalidArgument(format!("density {density} not in (0, 1]")));
        }
        let (n, m) = (self.n_agents(), self.n_statements());
        let cells = n * m;
        let wanted = ((density * cells as f64).round() as usize).clamp(1, cells);
        let mut rng = rng::seeded(seed);
        let mut picked = index::sample(&mut rng, cells, wanted).into_vec();
        picked.sort_unstable();

        let votes: Vec<Vote> = picked
            .into_iter()
            .map(|cell| {
                let (i, j) = (cell / m, cell % m);
                let agent = &self.agents[i];
                let z: f64 = StandardNormal.sample(&mut rng);
                let score = dot(&agent.ideal_point, &self.statement_points[j]) + agent.noise_scale * z;
                let value = if score > agent.pass_band {
                    1.0
                } else if score < -agent.pass_band {
                    -1.0
                } else {
                    0.0
                };
                Vote::new(participant_id(i), statement_id(j), value)
            })
            .collect();
        WillMatrix::build(&votes, self.participants(), self.statements(), Schema::Ternary)
    }

    pub fn utility_at(&self, agent: usize, statement: usize) -> Result<f64> {
        let a = self
            .agents
            .get(agent)
            .ok_or_else(|| AgoraError::UnknownId(participant_id(agent)))?;
        let s = self
            .statement_points
            .get(statement)
            .ok_or_else(|| AgoraError::UnknownId(statement_id(statement)))?;
        Ok(-distance(&a.ideal_point, s))
    }

    /// Negative Euclidean distance between the agent's ideal point and the
    /// statement's point.
    pub fn utility(&self, agent: &str, statement: &str) -> Result<f64> {
        let i = parse_index(agent, 'p').ok_or_else(|| AgoraError::UnknownId(agent.into()))?;
        let j = parse_index(statement, 's').ok_or_else(|| AgoraError::UnknownId(statement.into()))?;
        self.utility_at(i, j)
    }

    pub fn positions(&self) -> Vec<Vec<f64>> {
        self.agents.iter().map(|a| a.ideal_point.clone()).collect()
    }
}

fn parse_index(id: &str, prefix: char) -> Option<usize> {
    id.strip_prefix(prefix)?.parse().ok()
}

/// A rating matrix in `[0, 1]` generated exactly by the intercept-plus-rank-one
/// model, with its generating parameters.
#[derive(Debug, Clone)]
pub struct ModelWorld {
    pub matrix: WillMatrix,
    pub truth: LatentFactors,
}

pub fn model_structured(n: usize, m: usize, density: f64, seed: u64) -> Result<ModelWorld> {
    if !(density > 0.0 && density <= 1.0) || n == 0 || m == 0 {
        return Err(AgoraError::BadSpec("need n, m >= 1 and density in (0, 1]".into()));
    }
    let mut rng = rng::seeded(seed);
    let small = Uniform::new_inclusive(-0.1, 0.1).expect("valid range");
    let factor = Uniform::new_inclusive(-0.4, 0.4).expect("valid range");
    let truth = LatentFactors {
        mu: 0.5,
        user_intercepts: (0..n).map(|_| small.sample(&mut rng)).collect(),
        item_intercepts: (0..m).map(|_| small.sample(&mut rng)).collect(),
        user_factors: (0..n).map(|_| factor.sample(&mut rng)).collect(),
        item_factors: (0..m).map(|_| factor.sample(&mut rng)).collect(),
    };
    let cells = n * m;
    let wanted = ((density * cells as f64).round() as usize).clamp(1, cells);
    let mut picked = index::sample(&mut rng, cells, wanted).into_vec();
    picked.sort_unstable();
    let votes: Vec<Vote> = picked
        .into_iter()
        .map(|cell| {
            let (i, j) = (cell / m, cell % m);
            Vote::new(participant_id(i), statement_id(j), truth.predict_unchecked(i, j))
        })
        .collect();
    let participants = (0..n).map(|i| Participant::new(participant_id(i))).collect();
    let statements = (0..m).map(|j| Statement::new(statement_id(j))).collect();
    let matrix = WillMatrix::build(&votes, participants, statements, Schema::Rating { min: 0.0, max: 1.0 })?;
    Ok(ModelWorld { matrix, truth })
}

/// Two camps of raters, mostly partisan notes, and one note rated helpful by
/// both camps.
#[derive(Debug, Clone)]
pub struct PlantedNotes {
    pub matrix: WillMatrix,
    pub bridging: usize,
    /// Notes favoured by one camp only.
    pub partisan: Vec<usize>,
    /// Camp of each rater: 0 or 1.
    pub camps: Vec<usize>,
}

/// Helpfulness probabilities used by [`planted_bridging`].
pub const BRIDGING_RATE: f64 = 0.8;
pub const PARTISAN_OWN_RATE: f64 = 0.9;
pub const PARTISAN_OTHER_RATE: f64 = 0.1;
pub const NEUTRAL_RATE: f64 = 0.5;

pub fn planted_bridging(n: usize, m: usize, density: f64, seed: u64) -> Result<PlantedNotes> {
    if n < 2 || m < 3 || !(density > 0.0 && density <= 1.0) {
        return Err(AgoraError::BadSpec("need n >= 2, m >= 3 and density in (0, 1]".into()));
    }
    let mut rng = rng::seeded(seed);
    let camps: Vec<usize> = (0..n).map(|i| i % 2).collect();
    let bridging = rng.random_range(0..m);
    // note kinds: None = neutral, Some(c) = partisan for camp c
    let kinds: Vec<Option<usize>> = (0..m)
        .map(|j| match j {
            _ if j == bridging => None,
            _ if j % 4 == 3 => None,
            _ => Some(j % 2),
        })
        .collect();
    let partisan = (0..m).filter(|&j| kinds[j].is_some()).collect();

    let cells = n * m;
    let wanted = ((density * cells as f64).round() as usize).clamp(1, cells);
    let mut picked = index::sample(&mut rng, cells, wanted).into_vec();
    picked.sort_unstable();
    let votes: Vec<Vote> = picked
        .into_iter()
        .map(|cell| {
            let (i, j) = (cell / m, cell % m);
            let p = if j == bridging {
                BRIDGING_RATE
            } else {
                match kinds[j] {
                    Some(c) if c == camps[i] => PARTISAN_OWN_RATE,
                    Some(_) => PARTISAN_OTHER_RATE,
                    None => NEUTRAL_RATE,
                }
            };
            let value = if rng.random_bool(p) { 1.0 } else { -1.0 };
            Vote::new(participant_id(i), statement_id(j), value)
        })
        .collect();
    let participants = camps
        .iter()
        .enumerate()
        .map(|(i, c)| Participant::new(participant_id(i)).with_attr("camp", c.to_string()))
        .collect();
    let statements = (0..m).map(|j| Statement::new(statement_id(j))).collect();
    let matrix = WillMatrix::build(&votes, participants, statements, Schema::Ternary)?;
    Ok(PlantedNotes {
        matrix,
        bridging,
        partisan,
        camps,
    })
}

/// Per-cluster head counts of a world.
pub fn cluster_sizes(world: &SyntheticWorld) -> BTreeMap<usize, usize> {
    let mut sizes = BTreeMap::new();
    for &l in &world.labels {
        *sizes.entry(l).or_insert(0) += 1;
    }
    sizes
}
