use agora_core::io::{load_dataset, save_dataset};
use agora_core::spectral::{
    group_informed_consensus, reduce, repness, Impute, OpinionGroups, RepnessOptions, VoteValue,
};
use agora_core::{Participant, Schema, Statement, Vote, WillMatrix};
use proptest::prelude::*;

/// Sparse matrix over `n x m` cells; `None` cells are unvoted.
fn cells(n: usize, m: usize, schema: Schema) -> impl Strategy<Value = Vec<Option<f64>>> {
    let value = match schema {
        Schema::Ternary => prop_oneof![Just(-1.0), Just(0.0), Just(1.0)].boxed(),
        Schema::Rating { min, max } => (min..=max).boxed(),
    };
    proptest::collection::vec(proptest::option::of(value), n * m)
}

fn build(n: usize, m: usize, schema: Schema, cells: &[Option<f64>], attrs: &[u8]) -> WillMatrix {
    let votes: Vec<Vote> = cells
        .iter()
        .enumerate()
        .filter_map(|(cell, v)| v.map(|v| Vote::new(format!("u{}", cell / m), format!("c{}", cell % m), v)))
        .collect();
    let participants = (0..n)
        .map(|i| Participant::new(format!("u{i}")).with_attr("side", format!("{}", attrs[i % attrs.len()] % 3)))
        .collect();
    let statements = (0..m)
        .map(|j| Statement {
            text: format!("statement \"{j}\"\n"),
            round: (j % 2) as u32,
            ..Statement::new(format!("c{j}"))
        })
        .collect();
    WillMatrix::build(&votes, participants, statements, schema).unwrap()
}

fn dataset() -> impl Strategy<Value = WillMatrix> {
    (
        1usize..7,
        1usize..7,
        prop_oneof![Just(Schema::Ternary), Just(Schema::Rating { min: 0.0, max: 5.0 })],
    )
        .prop_flat_map(|(n, m, schema)| {
            (cells(n, m, schema), proptest::collection::vec(any::<u8>(), 1..4))
                .prop_map(move |(c, a)| build(n, m, schema, &c, &a))
        })
}

fn ternary(n: usize, m: usize) -> impl Strategy<Value = WillMatrix> {
    cells(n, m, Schema::Ternary).prop_map(move |c| build(n, m, Schema::Ternary, &c, &[0]))
}

fn two_groups(n: usize, split: usize) -> OpinionGroups {
    OpinionGroups {
        k: 2,
        assignment: (0..n).map(|i| usize::from(i >= split)).collect(),
        centroids: vec![vec![0.0], vec![1.0]],
        silhouettes: Vec::new(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn saved_datasets_load_back_unchanged(matrix in dataset()) {
        let dir = tempfile::tempdir().unwrap();
        save_dataset(&matrix, dir.path()).unwrap();
        let back = load_dataset(dir.path()).unwrap();
        prop_assert_eq!(&back, &matrix);
        prop_assert_eq!(back.summarize(), matrix.summarize());
    }

    #[test]
    fn extra_agreement_never_lowers_agree_share(matrix in ternary(8, 3), split in 1usize..8, col in 0usize..3) {
        let groups = two_groups(8, split);
        let options = RepnessOptions::default();
        let before = repness(&matrix, &groups, &format!("c{col}"), 0, VoteValue::Agree, options).unwrap();
        // one more member of group 0 who agrees
        let mut votes = matrix.votes();
        votes.push(Vote::new("extra", format!("c{col}"), 1.0));
        let mut people = matrix.participants().to_vec();
        people.insert(split, Participant::new("extra"));
        let grown = WillMatrix::build(&votes, people, matrix.statements().to_vec(), Schema::Ternary).unwrap();
        let after = repness(&grown, &two_groups(9, split + 1), &format!("c{col}"), 0, VoteValue::Agree, options).unwrap();
        prop_assert_eq!(after.n_g, before.n_g + 1);
        prop_assert_eq!(after.t_g, before.t_g + 1);
        if before.t_g > 0 {
            prop_assert!(after.n_g as f64 / after.t_g as f64 >= before.n_g as f64 / before.t_g as f64);
        }
    }

    #[test]
    fn flipping_a_vote_to_agree_never_lowers_group_probability(matrix in ternary(8, 3), split in 1usize..8, col in 0usize..3) {
        let groups = two_groups(8, split);
        let options = RepnessOptions::default();
        let id = format!("c{col}");
        let before = repness(&matrix, &groups, &id, 0, VoteValue::Agree, options).unwrap();
        let mut votes = matrix.votes();
        if let Some(v) = votes.iter_mut().find(|v| v.statement == id && v.value != 1.0 && groups.assignment[matrix.participant_index(&v.participant).unwrap()] == 0) {
            v.value = 1.0;
            let flipped = WillMatrix::build(&votes, matrix.participants().to_vec(), matrix.statements().to_vec(), Schema::Ternary).unwrap();
            let after = repness(&flipped, &groups, &id, 0, VoteValue::Agree, options).unwrap();
            prop_assert_eq!(after.t_g, before.t_g);
            prop_assert_eq!(after.n_g, before.n_g + 1);
            prop_assert!(after.p_g > before.p_g);
        }
    }

    #[test]
    fn consensus_ignores_group_labels(matrix in ternary(7, 4), split in 1usize..7) {
        let groups = two_groups(7, split);
        let mut swapped = groups.clone();
        for g in &mut swapped.assignment {
            *g = 1 - *g;
        }
        let a = group_informed_consensus(&matrix, &groups, true, false).unwrap();
        let b = group_informed_consensus(&matrix, &swapped, true, false).unwrap();
        let scores = |r: &agora_core::spectral::ConsensusReport| {
            r.ranking.iter().map(|e| (e.statement.clone(), e.score)).collect::<Vec<_>>()
        };
        prop_assert_eq!(scores(&a), scores(&b));
    }

    #[test]
    fn projection_follows_participant_order(matrix in ternary(6, 5), rotate in 1usize..6) {
        let n = matrix.n_participants();
        let mut people = matrix.participants().to_vec();
        people.rotate_left(rotate);
        let permuted = WillMatrix::build(&matrix.votes(), people, matrix.statements().to_vec(), Schema::Ternary).unwrap();
        let a = reduce(&matrix, 1, Impute::Zero).unwrap();
        let b = reduce(&permuted, 1, Impute::Zero).unwrap();
        prop_assert!((a.total_variance - b.total_variance).abs() < 1e-9);
        prop_assert!((a.explained_variance[0] - b.explained_variance[0]).abs() < 1e-9);
        // coordinates are only pinned down when the leading component is isolated
        let full = reduce(&matrix, 2, Impute::Zero).unwrap();
        let gap = full.explained_variance[0] - full.explained_variance[1];
        let loadings = &a.components[0];
        let mut sorted: Vec<f64> = loadings.iter().map(|x| x.abs()).collect();
        sorted.sort_by(|x, y| y.total_cmp(x));
        let sign_clear = sorted.len() < 2 || sorted[0] - sorted[1] > 1e-6;
        if gap > 1e-6 && sign_clear {
            for i in 0..n {
                let j = (i + n - rotate) % n;
                prop_assert!((a.coordinates[i][0] - b.coordinates[j][0]).abs() < 1e-8);
            }
        }
        for (v, w) in full.components.iter().zip(full.components.iter().skip(1)) {
            let dot: f64 = v.iter().zip(w).map(|(x, y)| x * y).sum();
            prop_assert!(dot.abs() <= 1e-9);
        }
        prop_assert!(full.explained_variance.windows(2).all(|w| w[0] >= w[1]));
    }
}
