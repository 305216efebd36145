//! Small worked examples with known outcomes, shared by the CLI's
//! `reproduce` command, the Python bindings and the test suites.

use crate::ballots::RankingProfile;
use crate::matrix::{Participant, Schema, Statement, Vote, WillMatrix};

/// Seven voters: 4 × a>b>c, 2 × b>c>a, 1 × c>b>a. Plurality picks a, Borda
/// picks b (a=8, b=9, c=4).
pub fn plurality_borda_profile() -> RankingProfile {
    RankingProfile::repeat(&[(4, &["a", "b", "c"]), (2, &["b", "c", "a"]), (1, &["c", "b", "a"])])
        .expect("fixture profile is valid")
}

/// Three voters whose majorities run a>b>c>a.
pub fn cyclic_profile() -> RankingProfile {
    RankingProfile::repeat(&[(1, &["a", "b", "c"]), (1, &["b", "c", "a"]), (1, &["c", "a", "b"])])
        .expect("fixture profile is valid")
}

/// Attribute used by the bridging fixtures.
pub const PARTY: &str = "party";

/// `support[s] = (statement, [(group, size, agree)])`: the first `agree`
/// members of each group agree, the rest disagree. Members are shared across
/// statements.
fn group_votes(groups: &[(&str, usize)], support: &[(&str, Vec<(&str, usize, usize)>)]) -> WillMatrix {
    let mut participants = Vec::new();
    for (g, size) in groups {
        for k in 0..*size {
            participants.push(Participant::new(format!("{g}{k:03}")).with_attr(PARTY, *g));
        }
    }
    let mut votes = Vec::new();
    for (s, rows) in support {
        for &(g, voters, agree) in rows {
            for k in 0..voters {
                let value = if k < agree { 1.0 } else { -1.0 };
                votes.push(Vote::new(format!("{g}{k:03}"), *s, value));
            }
        }
    }
    let statements = support.iter().map(|(s, _)| Statement::new(*s)).collect();
    WillMatrix::build(&votes, participants, statements, Schema::Ternary).expect("fixture matrix is valid")
}

/// Two statements rated by 20 D and 20 R voters. A: 80% of D, 10% of R
/// approve. B: 30% of D, 35% of R approve. Group-minimum puts B (0.30) above
/// A (0.10).
pub fn bridging_pair() -> WillMatrix {
    group_votes(
        &[("D", 20), ("R", 20)],
        &[
            ("A", vec![("D", 20, 16), ("R", 20, 2)]),
            ("B", vec![("D", 20, 6), ("R", 20, 7)]),
        ],
    )
}

/// 100 D and 100 R voters. Two statements carry broad votes; a third was
/// seen by one voter from each group, both of whom agreed, and so scores a
/// perfect 1.0 despite representing almost nobody.
pub fn bridging_caveat() -> WillMatrix {
    group_votes(
        &[("D", 100), ("R", 100)],
        &[
            ("broad", vec![("D", 100, 70), ("R", 100, 60)]),
            ("split", vec![("D", 100, 90), ("R", 100, 15)]),
            ("rare", vec![("D", 1, 1), ("R", 1, 1)]),
        ],
    )
}

/// Agreement count, vote count and the hand-evaluated smoothed probability.
pub const SMOOTHING_CASES: [(usize, usize, f64); 4] = [(3, 4, 1.0), (0, 0, 2.0), (5, 9, 0.7), (1, 9, 0.3)];

/// Inside tally, outside tally and the ratio of the outside estimate to the
/// inside one: (3/10) / (7/10) = 3/7.
pub const SMOOTHING_RATIO_CASE: ((usize, usize), (usize, usize), f64) = ((5, 9), (1, 9), 3.0 / 7.0);
