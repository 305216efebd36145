//! Multi-round deliberation over a synthetic population.
//!
//! Opinions are points, candidate statements are points, and a participant's
//! support for a statement is its negative distance. Each round generates
//! candidates, predicts every participant's support, aggregates the implied
//! rankings with Schulze, has participants re-rank the shortlist by their true
//! utilities, and moves every opinion part of the way toward the winner.
//!
//! Candidate generation and support prediction sit behind ports so that other
//! implementations can be swapped in; both must be deterministic for a given
//! seed.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::ballots::{schulze, RankingProfile};
use crate::error::{AgoraError, Result};
use crate::rng;
use crate::synthpop::{distance, SyntheticWorld};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundConfig {
    pub n_candidates: usize,
    /// Shortlist size for the re-rank stage.
    pub top_m: usize,
    /// Revision step toward each round's winner, in `[0, 1]`.
    pub eta: f64,
    pub rounds: usize,
    pub seed: u64,
    /// Standard deviation of Gaussian noise added by the default predictor.
    pub predictor_noise: f64,
}

impl Default for RoundConfig {
    fn default() -> Self {
        RoundConfig {
            n_candidates: 5,
            top_m: 4,
            eta: 0.3,
            rounds: 3,
            seed: 42,
            predictor_noise: 0.0,
        }
    }
}

impl RoundConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_candidates == 0 {
            return Err(AgoraError::InvalidArgument("n_candidates must be >= 1".into()));
        }
        if self.top_m == 0 || self.top_m > self.n_candidates {
            return Err(AgoraError::InvalidArgument(format!(
                "top_m must be in 1..={}, got {}",
                self.n_candidates, self.top_m
            )));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(AgoraError::InvalidArgument(format!("eta {} not in [0, 1]", self.eta)));
        }
        if !(self.predictor_noise >= 0.0 && self.predictor_noise.is_finite()) {
            return Err(AgoraError::InvalidArgument(
                "predictor noise must be finite and >= 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: String,
    pub point: Vec<f64>,
    /// How the generator produced it, e.g. `medoid`.
    pub origin: String,
}

pub trait GeneratorPort {
    /// Produces exactly `count` candidates from the current opinions.
    fn generate(&self, opinions: &[Vec<f64>], count: usize, round: usize) -> Result<Vec<Candidate>>;
}

pub trait PredictorPort {
    /// Support of each participant for each candidate, `[participant][candidate]`.
    fn predict(&self, opinions: &[Vec<f64>], candidates: &[Candidate], round: usize) -> Result<Vec<Vec<f64>>>;
}

pub fn centroid(points: &[Vec<f64>]) -> Vec<f64> {
    let d = points.first().map_or(0, Vec::len);
    let mut c = vec![0.0; d];
    for p in points {
        for (a, x) in c.iter_mut().zip(p) {
            *a += x;
        }
    }
    let n = points.len().max(1) as f64;
    c.iter_mut().for_each(|a| *a /= n);
    c
}

/// Index of the point with the smallest total distance to all others; the
/// lowest index wins ties.
pub fn medoid(points: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_sum = f64::INFINITY;
    for (i, p) in points.iter().enumerate() {
        let sum: f64 = points.iter().map(|q| distance(p, q)).sum();
        if sum < best_sum {
            best = i;
            best_sum = sum;
        }
    }
    best
}

/// Mean distance of the points to their centroid.
pub fn dispersion(points: &[Vec<f64>]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let c = centroid(points);
    points.iter().map(|p| distance(p, &c)).sum::<f64>() / points.len() as f64
}

/// Medoid opinion, then the centroid, then seeded convex combinations of two
/// randomly drawn opinions.
#[derive(Debug, Clone, Copy)]
pub struct DefaultGenerator {
    pub seed: u64,
}

impl GeneratorPort for DefaultGenerator {
    fn generate(&self, opinions: &[Vec<f64>], count: usize, round: usize) -> Result<Vec<Candidate>> {
        if opinions.is_empty() {
            return Err(AgoraError::EmptyInput("no opinions to generate from".into()));
        }
        let id = |k: usize| format!("r{round}-c{k:03}");
        let mut out = Vec::with_capacity(count);
        if count >= 1 {
            out.push(Candidate {
                id: id(0),
                point: opinions[medoid(opinions)].clone(),
                origin: "medoid".into(),
            });
        }
        if count >= 2 {
            out.push(Candidate {
                id: id(1),
                point: centroid(opinions),
                origin: "centroid".into(),
            });
        }
        let mut rng = rng::substream(self.seed, round as u64);
        for k in 2..count {
            let a = &opinions[rng.random_range(0..opinions.len())];
            let b = &opinions[rng.random_range(0..opinions.len())];
            let t: f64 = rng.random();
            out.push(Candidate {
                id: id(k),
                point: a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect(),
                origin: "mix".into(),
            });
        }
        Ok(out)
    }
}

/// Negative distance, optionally perturbed by seeded Gaussian noise.
#[derive(Debug, Clone, Copy)]
pub struct UtilityPredictor {
    pub noise: f64,
    pub seed: u64,
}

impl PredictorPort for UtilityPredictor {
    fn predict(&self, opinions: &[Vec<f64>], candidates: &[Candidate], round: usize) -> Result<Vec<Vec<f64>>> {
        let mut rng = rng::substream(self.seed, round as u64);
        Ok(opinions
            .iter()
            .map(|x| {
                candidates
                    .iter()
                    .map(|c| {
                        let base = -distance(x, &c.point);
                        if self.noise > 0.0 {
                            let z: f64 = StandardNormal.sample(&mut rng);
                            base + self.noise * z
                        } else {
                            base
                        }
                    })
                    .collect()
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub candidates: Vec<Candidate>,
    /// Predicted support, `[participant][candidate]`.
    pub scores: Vec<Vec<f64>>,
    /// Each participant's ranking as candidate indices, best first.
    pub rankings: Vec<Vec<usize>>,
    pub schulze_order: Vec<String>,
    pub shortlist: Vec<String>,
    /// Re-rank ballots as shortlist indices, best first.
    pub rerank_rankings: Vec<Vec<usize>>,
    pub rerank_order: Vec<String>,
    pub winner: Candidate,
    pub dispersion_before: f64,
    pub dispersion_after: f64,
    pub positions_after: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTrace {
    pub config: RoundConfig,
    pub world_seed: u64,
    pub initial_positions: Vec<Vec<f64>>,
    pub rounds: Vec<RoundRecord>,
}

fn rank_by_scores(scores: &[f64], ids: &[String]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then_with(|| ids[a].cmp(&ids[b])));
    order
}

/// One round on the given opinions. Returns the record with revised
/// positions already applied.
pub fn run_round(
    opinions: &[Vec<f64>],
    round: usize,
    config: &RoundConfig,
    generator: &dyn GeneratorPort,
    predictor: &dyn PredictorPort,
) -> Result<RoundRecord> {
    config.validate()?;
    if opinions.is_empty() {
        return Err(AgoraError::EmptyInput("population has no agents".into()));
    }
    let dims = opinions[0].len();

    let candidates = generator.generate(opinions, config.n_candidates, round)?;
    if candidates.len() != config.n_candidates {
        return Err(AgoraError::PortFailure(format!(
            "generator returned {} candidates, expected {}",
            candidates.len(),
            config.n_candidates
        )));
    }
    if candidates
        .iter()
        .any(|c| c.point.len() != dims || c.point.iter().any(|x| !x.is_finite()))
    {
        return Err(AgoraError::PortFailure(
            "generator returned a malformed candidate".into(),
        ));
    }
    let ids: Vec<String> = candidates.iter().map(|c| c.id.clone()).collect();

    let scores = predictor.predict(opinions, &candidates, round)?;
    if scores.len() != opinions.len()
        || scores
            .iter()
            .any(|row| row.len() != candidates.len() || row.iter().any(|x| !x.is_finite()))
    {
        return Err(AgoraError::PortFailure(
            "predictor returned a score table of the wrong shape or with non-finite entries".into(),
        ));
    }
    let rankings: Vec<Vec<usize>> = scores.iter().map(|row| rank_by_scores(row, &ids)).collect();
    let stage_one = schulze(&RankingProfile::new(ids.clone(), rankings.clone())?);
    let shortlist: Vec<String> = stage_one.result.order[..config.top_m].to_vec();
    let short: Vec<&Candidate> = shortlist
        .iter()
        .map(|id| {
            candidates
                .iter()
                .find(|c| &c.id == id)
                .expect("shortlist from candidates")
        })
        .collect();

    let rerank_rankings: Vec<Vec<usize>> = opinions
        .iter()
        .map(|x| {
            let truth: Vec<f64> = short.iter().map(|c| -distance(x, &c.point)).collect();
            rank_by_scores(&truth, &shortlist)
        })
        .collect();
    let stage_two = schulze(&RankingProfile::new(shortlist.clone(), rerank_rankings.clone())?);
    let winner = (*short
        .iter()
        .find(|c| c.id == stage_two.result.winner)
        .expect("winner from shortlist"))
    .clone();

    let dispersion_before = dispersion(opinions);
    let positions_after: Vec<Vec<f64>> = opinions
        .iter()
        .map(|x| {
            x.iter()
                .zip(&winner.point)
                .map(|(a, w)| (1.0 - config.eta) * a + config.eta * w)
                .collect()
        })
        .collect();
    let dispersion_after = dispersion(&positions_after);

    Ok(RoundRecord {
        round,
        candidates,
        scores,
        rankings,
        schulze_order: stage_one.result.order,
        shortlist,
        rerank_rankings,
        rerank_order: stage_two.result.order,
        winner,
        dispersion_before,
        dispersion_after,
        positions_after,
    })
}

pub fn run_pipeline(
    world: &SyntheticWorld,
    config: &RoundConfig,
    generator: &dyn GeneratorPort,
    predictor: &dyn PredictorPort,
) -> Result<RoundTrace> {
    config.validate()?;
    let initial_positions = world.positions();
    let mut positions = initial_positions.clone();
    let mut rounds = Vec::with_capacity(config.rounds);
    for round in 1..=config.rounds {
        let record = run_round(&positions, round, config, generator, predictor)?;
        positions = record.positions_after.clone();
        rounds.push(record);
    }
    Ok(RoundTrace {
        config: *config,
        world_seed: world.seed,
        initial_positions,
        rounds,
    })
}

/// Runs the pipeline with the default generator and utility predictor, both
/// keyed from `config.seed`.
pub fn run_default_pipeline(world: &SyntheticWorld, config: &RoundConfig) -> Result<RoundTrace> {
    let generator = DefaultGenerator { seed: config.seed };
    let predictor = UtilityPredictor {
        noise: config.predictor_noise,
        seed: config.seed ^ 0x9e37_79b9_7f4a_7c15,
    };
    run_pipeline(world, config, &generator, &predictor)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Opinion {
    pub id: String,
    pub position: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisRecord {
    /// The elicited opinions, as received.
    pub elicitation: Vec<Opinion>,
    pub synthesis: Candidate,
    /// Ids of the opinions the generator was given.
    pub provenance: Vec<String>,
}

/// Two-step reflection: collect opinions, then hand all of them to the
/// generator for a single collective statement.
pub fn reflect_skeleton(opinions: &[Opinion], generator: &dyn GeneratorPort) -> Result<SynthesisRecord> {
    if opinions.is_empty() {
        return Err(AgoraError::EmptyInput("no opinions to reflect on".into()));
    }
    let points: Vec<Vec<f64>> = opinions.iter().map(|o| o.position.clone()).collect();
    let mut produced = generator.generate(&points, 1, 0)?;
    if produced.len() != 1 {
        return Err(AgoraError::PortFailure(format!(
            "generator returned {} statements, expected 1",
            produced.len()
        )));
    }
    Ok(SynthesisRecord {
        elicitation: opinions.to_vec(),
        synthesis: produced.remove(0),
        provenance: opinions.iter().map(|o| o.id.clone()).collect(),
    })
}
