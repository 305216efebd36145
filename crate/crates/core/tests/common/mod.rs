//! Independent reference computations used by the integration suites. None
//! of these call into the implementation paths they are compared against.

#![allow(dead_code)]

use agora_core::ballots::RankingProfile;
use agora_core::rng;
use rand::seq::SliceRandom;
use rand::Rng;

/// All permutations of `0..c` in lexicographic order.
pub fn permutations(c: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for x in 0..used.len() {
            if !used[x] {
                used[x] = true;
                prefix.push(x);
                go(prefix, used, out);
                prefix.pop();
                used[x] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; c], &mut out);
    out
}

pub fn letters(c: usize) -> Vec<String> {
    (0..c).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
}

/// Head-to-head counts tallied ballot by ballot.
pub fn tally_pairs(c: usize, ballots: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut d = vec![vec![0; c]; c];
    for b in ballots {
        for i in 0..b.len() {
            for j in i + 1..b.len() {
                d[b[i]][b[j]] += 1;
            }
        }
    }
    d
}

/// Strongest-path strengths by enumerating every simple path.
pub fn exhaustive_paths(d: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let c = d.len();
    let link = |x: usize, y: usize| if d[x][y] > d[y][x] { d[x][y] } else { 0 };
    fn walk(
        at: usize,
        target: usize,
        weakest: usize,
        visited: &mut Vec<bool>,
        link: &dyn Fn(usize, usize) -> usize,
        best: &mut usize,
    ) {
        for next in 0..visited.len() {
            if visited[next] || next == at {
                continue;
            }
            let w = weakest.min(link(at, next));
            if w == 0 {
                continue;
            }
            if next == target {
                *best = (*best).max(w);
            } else {
                visited[next] = true;
                walk(next, target, w, visited, link, best);
                visited[next] = false;
            }
        }
    }
    let mut p = vec![vec![0; c]; c];
    for x in 0..c {
        for y in 0..c {
            if x == y {
                continue;
            }
            let mut visited = vec![false; c];
            visited[x] = true;
            let mut best = 0;
            walk(x, y, usize::MAX, &mut visited, &link, &mut best);
            p[x][y] = best;
        }
    }
    p
}

/// Schulze winner from exhaustive path strengths: the lowest id among
/// candidates no one beats.
pub fn oracle_schulze_winner(ids: &[String], ballots: &[Vec<usize>]) -> String {
    let c = ids.len();
    let p = exhaustive_paths(&tally_pairs(c, ballots));
    (0..c)
        .filter(|&x| (0..c).all(|y| p[y][x] <= p[x][y]))
        .map(|x| ids[x].clone())
        .min()
        .expect("the Schulze winner set is never empty")
}

/// Candidate beating every other by strict majority, if any.
pub fn oracle_condorcet(ids: &[String], ballots: &[Vec<usize>]) -> Option<String> {
    let c = ids.len();
    let d = tally_pairs(c, ballots);
    (0..c)
        .find(|&x| (0..c).all(|y| y == x || d[x][y] > d[y][x]))
        .map(|x| ids[x].clone())
}

pub fn random_profile(rng: &mut impl Rng, max_c: usize, max_v: usize) -> RankingProfile {
    let c = rng.random_range(1..=max_c);
    let v = rng.random_range(1..=max_v);
    let ballots = (0..v)
        .map(|_| {
            let mut b: Vec<usize> = (0..c).collect();
            b.shuffle(rng);
            b
        })
        .collect();
    RankingProfile::new(letters(c), ballots).unwrap()
}

/// Every multiset of `v` ballots drawn from `kinds`, for each `v` in `1..=max_v`.
pub fn all_multisets(kinds: usize, max_v: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, left: usize, kinds: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for k in start..kinds {
            cur.push(k);
            go(k, left - 1, kinds, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for v in 1..=max_v {
        go(0, v, kinds, &mut Vec::new(), &mut out);
    }
    out
}

/// Approval JR by enumerating every voter subset of size at least
/// `ceil(n/k)`: violated iff some such subset shares an approved candidate
/// and approves nothing in the committee.
pub fn brute_force_approval_jr(approvals: &[Vec<bool>], committee: &[usize], k: usize) -> bool {
    let n = approvals.len();
    let m = approvals.first().map_or(0, Vec::len);
    let threshold = n.div_ceil(k);
    for mask in 1u32..(1 << n) {
        if (mask.count_ones() as usize) < threshold {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let cohesive = (0..m).any(|c| members.iter().all(|&v| approvals[v][c]));
        let unrepresented = members.iter().all(|&v| committee.iter().all(|&c| !approvals[v][c]));
        if cohesive && unrepresented {
            return false;
        }
    }
    true
}

/// Rating JR by enumerating every (outside item, participant subset) pair.
pub fn brute_force_rating_jr(values: &[Vec<f64>], committee: &[usize], k: usize) -> bool {
    let n = values.len();
    let m = values.first().map_or(0, Vec::len);
    let threshold = n.div_ceil(k);
    for j in (0..m).filter(|j| !committee.contains(j)) {
        for mask in 1u32..(1 << n) {
            if (mask.count_ones() as usize) < threshold {
                continue;
            }
            let dominated = (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .all(|i| committee.iter().all(|&c| values[i][j] > values[i][c]));
            if dominated {
                return false;
            }
        }
    }
    true
}

/// Fraction of points whose label matches `truth` under the best one-to-one
/// relabelling of two groups.
pub fn two_label_agreement(found: &[usize], truth: &[usize]) -> f64 {
    let n = found.len() as f64;
    let same = found.iter().zip(truth).filter(|(a, b)| a == b).count() as f64;
    let flipped = found
        .iter()
        .zip(truth)
        .filter(|(a, b)| (**a == 0) == (**b == 1))
        .count() as f64;
    same.max(flipped) / n
}

pub fn seeded(seed: u64) -> agora_core::rng::AgoraRng {
    rng::seeded(seed)
}
