//! Bundled worked examples, each checked against its known outcome.

use agora_core::ballots::{borda, condorcet, plurality, BallotResult};
use agora_core::factor::bridging_minapproval;
use agora_core::fixtures;
use agora_core::spectral::smoothed_probability;
use serde::Serialize;
use serde_json::{json, Value};

use crate::commands::{vote_report, CliError, CliResult, Ctx};
use crate::{Case, RuleArg};

#[derive(Serialize)]
struct Check {
    name: String,
    expected: Value,
    actual: Value,
    ok: bool,
}

#[derive(Serialize)]
struct ReproduceReport {
    case: Case,
    ok: bool,
    checks: Vec<Check>,
    details: Value,
}

const TOLERANCE: f64 = 1e-12;

fn check(name: &str, expected: Value, actual: Value) -> Check {
    let ok = match (expected.as_f64(), actual.as_f64()) {
        (Some(e), Some(a)) => (e - a).abs() <= TOLERANCE * e.abs().max(1.0),
        _ => expected == actual,
    };
    Check {
        name: name.into(),
        ok,
        expected,
        actual,
    }
}

fn score(r: &BallotResult, id: &str) -> f64 {
    r.scores
        .as_ref()
        .and_then(|s| s.iter().find(|(c, _)| c == id))
        .map_or(f64::NAN, |(_, v)| *v)
}

pub fn run(ctx: &mut Ctx, case: Case) -> CliResult<()> {
    let (checks, details) = match case {
        Case::Smoothing => {
            let mut checks: Vec<Check> = fixtures::SMOOTHING_CASES
                .iter()
                .map(|&(n, t, p)| check(&format!("P(N={n}, T={t})"), json!(p), json!(smoothed_probability(n, t))))
                .collect();
            checks.push(check(
                "empty tally exceeds 1",
                json!(true),
                json!(smoothed_probability(0, 0) > 1.0),
            ));
            let ((n, t), (n2, t2), want) = fixtures::SMOOTHING_RATIO_CASE;
            let ratio = smoothed_probability(n2, t2) / smoothed_probability(n, t);
            checks.push(check("P(g')/P(g)", json!(want), json!(ratio)));
            (checks, json!({ "formula": "(2 + N) / (1 + T)" }))
        }
        Case::Bridging => {
            let r = bridging_minapproval(&fixtures::bridging_pair(), fixtures::PARTY, true)?;
            let find = |id: &str| r.ranking.iter().find(|s| s.statement == id).map(|s| s.score);
            let checks = vec![
                check("score(A)", json!(0.10), json!(find("A"))),
                check("score(B)", json!(0.30), json!(find("B"))),
                check("top", json!("B"), json!(r.ranking[0].statement)),
            ];
            (checks, serde_json::to_value(&r).expect("report serializes"))
        }
        Case::BridgingCaveat => {
            let r = bridging_minapproval(&fixtures::bridging_caveat(), fixtures::PARTY, true)?;
            let top = &r.ranking[0];
            let checks = vec![
                check("top", json!("rare"), json!(top.statement)),
                check("score(rare)", json!(1.0), json!(top.score)),
                check("voters(rare)", json!(2), json!(top.voters)),
            ];
            (checks, serde_json::to_value(&r).expect("report serializes"))
        }
        Case::PluralityBorda => {
            let p = fixtures::plurality_borda_profile();
            let (pl, bo) = (plurality(&p), borda(&p));
            let checks = vec![
                check("plurality winner", json!("a"), json!(pl.winner)),
                check("plurality(a)", json!(4.0), json!(score(&pl, "a"))),
                check("borda winner", json!("b"), json!(bo.winner)),
                check("borda(a)", json!(8.0), json!(score(&bo, "a"))),
                check("borda(b)", json!(9.0), json!(score(&bo, "b"))),
                check("borda(c)", json!(4.0), json!(score(&bo, "c"))),
            ];
            (checks, json!({ "plurality": pl, "borda": bo }))
        }
        Case::Cycle => {
            let p = fixtures::cyclic_profile();
            let out = condorcet(&p);
            let checks = vec![
                check("condorcet winner", Value::Null, json!(out.winner())),
                check("cycle", json!(true), json!(out.has_cycle())),
            ];
            let report = vote_report(&p, RuleArg::Condorcet);
            (checks, serde_json::to_value(&report).expect("report serializes"))
        }
    };
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.ok)
        .map(|c| format!("{}: expected {}, got {}", c.name, c.expected, c.actual))
        .collect();
    ctx.emit(&ReproduceReport {
        case,
        ok: failed.is_empty(),
        checks,
        details,
    });
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::AssertionFailed(failed.join("; ")))
    }
}
