use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AgoraError, Result};
use crate::rng;
use crate::synthpop::distance;

use super::Projection;

const MAX_ITERS: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpinionGroups {
    pub k: usize,
    /// Group index of each participant, in matrix row order.
    pub assignment: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Mean silhouette of every k that was tried.
    pub silhouettes: Vec<KScore>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KScore {
    pub k: usize,
    pub silhouette: f64,
}

impl OpinionGroups {
    pub fn members(&self, group: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &g)| g == group)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &g in &self.assignment {
            sizes[g] += 1;
        }
        sizes
    }
}

/// Lloyd's k-means with farthest-point seeding. The first centre is drawn
/// from `seed`; each later one is the point farthest from the centres chosen
/// so far. Returns `None` when there are fewer than `k` distinct points.
///
/// Groups are relabelled in order of their lowest-index member.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Option<(Vec<usize>, Vec<Vec<f64>>)> {
    let n = points.len();
    if k == 0 || k > n {
        return None;
    }
    let mut rng = rng::seeded(seed);
    let mut centers = vec![points[rng.random_range(0..n)].clone()];
    let mut nearest: Vec<f64> = points.iter().map(|p| distance(p, &centers[0])).collect();
    while centers.len() < k {
        let (far, &d) = nearest.iter().enumerate().fold(
            (0, &nearest[0]),
            |best, (i, d)| if *d > *best.1 { (i, d) } else { best },
        );
        if d == 0.0 {
            return None;
        }
        centers.push(points[far].clone());
        for (i, p) in points.iter().enumerate() {
            nearest[i] = nearest[i].min(distance(p, &points[far]));
        }
    }

    let dims = points[0].len();
    let mut assignment = vec![usize::MAX; n];
    for _ in 0..MAX_ITERS {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let best = closest(p, &centers);
            if assignment[i] != best {
                assignment[i] = best;
                changed = true;
            }
        }
        // refill empty groups with the point farthest from its centre
        for g in 0..k {
            if !assignment.contains(&g) {
                let (far, _) = points
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| count(&assignment, assignment[*i]) > 1)
                    .map(|(i, p)| (i, distance(p, &centers[assignment[i]])))
                    .fold((usize::MAX, -1.0), |b, x| if x.1 > b.1 { x } else { b });
                if far == usize::MAX {
                    return None;
                }
                assignment[far] = g;
                changed = true;
            }
        }
        let mut sums = vec![vec![0.0; dims]; k];
        let mut counts = vec![0usize; k];
        for (p, &g) in points.iter().zip(&assignment) {
            counts[g] += 1;
            for (s, x) in sums[g].iter_mut().zip(p) {
                *s += x;
            }
        }
        for g in 0..k {
            centers[g] = sums[g].iter().map(|s| s / counts[g] as f64).collect();
        }
        if !changed {
            break;
        }
    }

    // canonical labels
    let mut order: Vec<usize> = Vec::with_capacity(k);
    for &g in &assignment {
        if !order.contains(&g) {
            order.push(g);
        }
    }
    let mut relabel = vec![0; k];
    for (new, &old) in order.iter().enumerate() {
        relabel[old] = new;
    }
    let assignment = assignment.iter().map(|&g| relabel[g]).collect();
    let centroids = order.iter().map(|&g| centers[g].clone()).collect();
    Some((assignment, centroids))
}

fn count(assignment: &[usize], g: usize) -> usize {
    assignment.iter().filter(|&&x| x == g).count()
}

fn closest(p: &[f64], centers: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (g, c) in centers.iter().enumerate() {
        let d = distance(p, c);
        if d < best_d {
            best = g;
            best_d = d;
        }
    }
    best
}

/// Mean silhouette; members of singleton groups score 0.
pub fn silhouette(points: &[Vec<f64>], assignment: &[usize], k: usize) -> f64 {
    let n = points.len();
    if n == 0 {
        return 0.0;
    }
    let sizes = {
        let mut s = vec![0usize; k];
        for &g in assignment {
            s[g] += 1;
        }
        s
    };
    let mut total = 0.0;
    for i in 0..n {
        let own = assignment[i];
        if sizes[own] <= 1 {
            continue;
        }
        let mut sums = vec![0.0; k];
        for j in 0..n {
            if j != i {
                sums[assignment[j]] += distance(&points[i], &points[j]);
            }
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&g| g != own && sizes[g] > 0)
            .map(|g| sums[g] / sizes[g] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 && b.is_finite() {
            total += (b - a) / denom;
        }
    }
    total / n as f64
}

/// Runs k-means for every k in `2..=k_max` and keeps the k with the highest
/// mean silhouette, preferring the smaller k on ties.
pub fn cluster(projection: &Projection, k_max: usize, seed: u64) -> Result<OpinionGroups> {
    if k_max < 2 {
        return Err(AgoraError::InvalidArgument(format!("k_max must be >= 2, got {k_max}")));
    }
    let points = &projection.coordinates;
    let first = points
        .first()
        .ok_or_else(|| AgoraError::DegenerateInput("no points to cluster".into()))?;
    if points.iter().all(|p| p == first) {
        return Err(AgoraError::DegenerateInput("all projected points are identical".into()));
    }

    let mut best: Option<(f64, OpinionGroups)> = None;
    let mut silhouettes = Vec::new();
    for k in 2..=k_max.min(points.len()) {
        let Some((assignment, centroids)) = kmeans(points, k, seed) else {
            continue;
        };
        let s = silhouette(points, &assignment, k);
        silhouettes.push(KScore { k, silhouette: s });
        if best.as_ref().is_none_or(|(top, _)| s > top + 1e-12) {
            let groups = OpinionGroups {
                k,
                assignment,
                centroids,
                silhouettes: Vec::new(),
            };
            best = Some((s, groups));
        }
    }
    let (_, mut groups) = best.ok_or_else(|| AgoraError::DegenerateInput("no k produced a clustering".into()))?;
    groups.silhouettes = silhouettes;
    Ok(groups)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn projection(points: Vec<Vec<f64>>) -> Projection {
        Projection {
            components: vec![],
            coordinates: points,
            explained_variance: vec![],
            total_variance: 0.0,
            column_means: vec![],
        }
    }

    #[test]
    fn separated_blobs_give_two_groups() {
        let mut pts = Vec::new();
        for i in 0..10 {
            pts.push(vec![-5.0 + 0.01 * i as f64, 0.0]);
            pts.push(vec![5.0 - 0.01 * i as f64, 0.1]);
        }
        let g = cluster(&projection(pts), 5, 7).unwrap();
        assert_eq!(g.k, 2);
        for i in 0..20 {
            assert_eq!(g.assignment[i], i % 2);
        }
    }

    #[test]
    fn kmax_two_forces_two_groups() {
        let pts = vec![vec![0.0], vec![1.0], vec![2.0], vec![10.0], vec![11.0], vec![20.0]];
        let g = cluster(&projection(pts), 2, 0).unwrap();
        assert_eq!(g.k, 2);
        assert!(g.sizes().iter().all(|&s| s > 0));
    }

    #[test]
    fn identical_points_are_degenerate() {
        let pts = vec![vec![1.0, 1.0]; 5];
        assert!(matches!(
            cluster(&projection(pts), 3, 0),
            Err(AgoraError::DegenerateInput(_))
        ));
    }

    #[test]
    fn silhouette_of_chosen_k_dominates() {
        let pts: Vec<Vec<f64>> = (0..30)
            .map(|i| {
                vec![
                    (i % 3) as f64 * 4.0 + (i as f64 * 0.37).sin() * 0.3,
                    (i as f64 * 1.3).cos(),
                ]
            })
            .collect();
        let g = cluster(&projection(pts), 6, 11).unwrap();
        let chosen = g.silhouettes.iter().find(|s| s.k == g.k).unwrap().silhouette;
        for s in &g.silhouettes {
            assert!(chosen >= s.silhouette);
            if s.k < g.k {
                assert!(chosen > s.silhouette);
            }
        }
        assert_eq!(g.k, 3);
    }

    #[test]
    fn deterministic_under_seed() {
        let pts: Vec<Vec<f64>> = (0..25)
            .map(|i| vec![(i as f64 * 0.7).sin(), (i as f64 * 0.3).cos()])
            .collect();
        let a = cluster(&projection(pts.clone()), 4, 3).unwrap();
        let b = cluster(&projection(pts), 4, 3).unwrap();
        assert_eq!(a, b);
    }
}
