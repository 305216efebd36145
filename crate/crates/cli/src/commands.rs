use std::fs;
use std::path::{Path, PathBuf};

use agora_core::ballots::{
    borda, clone_test, condorcet, plurality, schulze, CloneReport, CondorcetOutcome, RankingProfile, Rule,
};
use agora_core::factor::{
    self, bridging_minapproval, factor_diagnostics, helpfulness_status, FitConfig, FitReport, HelpfulnessStatus,
    LatentFactors,
};
use agora_core::io::{self, PARTICIPANTS_FILE, STATEMENTS_FILE, VOTES_FILE};
use agora_core::pipeline::{run_default_pipeline, RoundConfig, RoundTrace};
use agora_core::slates::{
    committee_indices, greedy_slate, jr_check_approval, jr_check_rating, matched_jr_check, JrVerdict, MatchedReport,
    Slate, UtilityTable,
};
use agora_core::spectral::{
    cluster, group_informed_consensus, reduce, repness, Impute, OpinionGroups, Orientation, RepnessOptions, VoteValue,
};
use agora_core::synthpop::{cluster_sizes, generate_world, ClusterSpec, SyntheticWorld};
use agora_core::{AgoraError, DatasetSummary, Schema, WillMatrix};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::manifest::{Recorder, RunManifest, REPORT_SCHEMA_VERSION};
use crate::{
    pretty, reproduce, BridgeArgs, CheckArg, Cli, ClusterArgs, Command, ConsensusArgs, FamilyArg, ImputeArg,
    IngestArgs, NotesCommand, NotesDiagnosticsArgs, NotesFitArgs, NotesStatusArgs, OrientationArg, PipelineArgs,
    RepnessArgs, RuleArg, SlateArgs, SynthArgs, VoteArg, VoteArgs,
};

#[derive(Debug)]
pub enum CliError {
    Domain(AgoraError),
    /// A reproduced example diverged from its known outcome.
    AssertionFailed(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Domain(e) => e.fmt(f),
            CliError::AssertionFailed(what) => write!(f, "assertion failed: {what}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<AgoraError> for CliError {
    fn from(e: AgoraError) -> Self {
        CliError::Domain(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Domain(e.into())
    }
}

impl CliError {
    pub fn name(&self) -> &'static str {
        match self {
            CliError::Domain(e) => e.name(),
            CliError::AssertionFailed(_) => "AssertionFailed",
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn parse_error(path: &Path, e: serde_json::Error) -> CliError {
    CliError::Domain(AgoraError::Parse {
        line: e.line(),
        message: format!("{}: {e}", path.display()),
    })
}

/// Tracks digests of everything read and written during one run.
pub struct Ctx<'a> {
    cli: &'a Cli,
    rec: Recorder,
}

impl Ctx<'_> {
    fn read(&mut self, path: &Path) -> CliResult<String> {
        let text =
            fs::read_to_string(path).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
        self.rec.input(path, text.as_bytes());
        Ok(text)
    }

    fn read_json<T: DeserializeOwned>(&mut self, path: &Path) -> CliResult<T> {
        let text = self.read(path)?;
        serde_json::from_str(&text).map_err(|e| parse_error(path, e))
    }

    fn dataset(&mut self, dir: &Path) -> CliResult<WillMatrix> {
        for name in [VOTES_FILE, PARTICIPANTS_FILE, STATEMENTS_FILE] {
            let path = dir.join(name);
            if path.exists() {
                self.read(&path)?;
            }
        }
        Ok(io::load_dataset(dir)?)
    }

    fn write(&mut self, path: &Path, contents: &str) -> CliResult<()> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        io::write_file(path, contents)?;
        self.rec.output(&path.display().to_string(), contents.as_bytes());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, path: &Path, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).expect("report serializes");
        text.push('\n');
        self.write(path, &text)
    }

    fn primary(&mut self, path: &Path) {
        self.rec.primary = Some(path.to_path_buf());
    }

    pub(crate) fn emit<T: Serialize>(&mut self, report: &T) {
        let text = if self.cli.pretty {
            pretty::render(&serde_json::to_value(report).expect("report serializes"))
        } else {
            let mut t = serde_json::to_string_pretty(report).expect("report serializes");
            t.push('\n');
            t
        };
        print!("{text}");
        self.rec.output("-", text.as_bytes());
    }
}

fn seed_of(command: &Command) -> Option<u64> {
    match command {
        Command::Synth(a) => Some(a.seed),
        Command::Cluster(a) => Some(a.seed),
        Command::Notes(NotesCommand::Fit(a)) => Some(a.seed),
        Command::Vote(a) => a.clone.as_ref().map(|_| a.seed),
        Command::Pipeline(a) => Some(a.seed),
        _ => None,
    }
}

fn command_name(command: &Command) -> String {
    match command {
        Command::Synth(_) => "synth".into(),
        Command::Ingest(_) => "ingest".into(),
        Command::Cluster(_) => "cluster".into(),
        Command::Repness(_) => "repness".into(),
        Command::Consensus(_) => "consensus".into(),
        Command::Notes(NotesCommand::Fit(_)) => "notes fit".into(),
        Command::Notes(NotesCommand::Status(_)) => "notes status".into(),
        Command::Notes(NotesCommand::Diagnostics(_)) => "notes diagnostics".into(),
        Command::Bridge(_) => "bridge".into(),
        Command::Vote(_) => "vote".into(),
        Command::Slate(_) => "slate".into(),
        Command::Pipeline(_) => "pipeline".into(),
        Command::Reproduce(_) => "reproduce".into(),
    }
}

pub fn dispatch(cli: &Cli) -> CliResult<()> {
    let mut ctx = Ctx {
        cli,
        rec: Recorder::default(),
    };
    let outcome = match &cli.command {
        Command::Synth(a) => synth(&mut ctx, a),
        Command::Ingest(a) => ingest(&mut ctx, a),
        Command::Cluster(a) => cluster_cmd(&mut ctx, a),
        Command::Repness(a) => repness_cmd(&mut ctx, a),
        Command::Consensus(a) => consensus(&mut ctx, a),
        Command::Notes(NotesCommand::Fit(a)) => notes_fit(&mut ctx, a),
        Command::Notes(NotesCommand::Status(a)) => notes_status(&mut ctx, a),
        Command::Notes(NotesCommand::Diagnostics(a)) => notes_diagnostics(&mut ctx, a),
        Command::Bridge(a) => bridge(&mut ctx, a),
        Command::Vote(a) => vote(&mut ctx, a),
        Command::Slate(a) => slate(&mut ctx, a),
        Command::Pipeline(a) => pipeline(&mut ctx, a),
        Command::Reproduce(a) => reproduce::run(&mut ctx, a.case),
    };
    let manifest = RunManifest {
        tool: "agora".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        schema_version: REPORT_SCHEMA_VERSION,
        command: command_name(&cli.command),
        argv: std::env::args().skip(1).collect(),
        flags: serde_json::to_value(&cli.command).expect("flags serialize"),
        seed: seed_of(&cli.command),
        inputs: std::mem::take(&mut ctx.rec.inputs),
        outputs: std::mem::take(&mut ctx.rec.outputs),
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    match cli.manifest.clone().or_else(|| ctx.rec.default_location()) {
        Some(path) => io::write_file(&path, &format!("{text}\n"))?,
        None if outcome.is_ok() => eprintln!("{}", serde_json::to_string(&manifest).expect("manifest serializes")),
        None => {}
    }
    outcome
}

#[derive(Serialize)]
struct SynthReport {
    seed: u64,
    dims: usize,
    cluster_sizes: Vec<usize>,
    summary: DatasetSummary,
}

fn synth(ctx: &mut Ctx, a: &SynthArgs) -> CliResult<()> {
    let layout = ClusterSpec::parse(&a.clusters)?
        .spread(a.spread)
        .noise(a.noise)
        .pass_band(a.pass_band);
    let world = generate_world(a.n, a.m, a.d, a.seed, &layout)?;
    let matrix = world.cast_votes(a.density, a.seed.wrapping_add(1))?;
    fs::create_dir_all(&a.out)?;
    ctx.primary(&a.out);
    ctx.write(&a.out.join(VOTES_FILE), &io::votes_to_string(&matrix))?;
    ctx.write(&a.out.join(PARTICIPANTS_FILE), &io::to_jsonl(matrix.participants()))?;
    ctx.write(&a.out.join(STATEMENTS_FILE), &io::to_jsonl(matrix.statements()))?;
    ctx.write_json(&a.out.join("world.json"), &world)?;
    ctx.emit(&SynthReport {
        seed: a.seed,
        dims: a.d,
        cluster_sizes: cluster_sizes(&world).into_values().collect(),
        summary: matrix.summarize(),
    });
    Ok(())
}

fn ingest(ctx: &mut Ctx, a: &IngestArgs) -> CliResult<()> {
    let matrix = ctx.dataset(&a.input)?;
    if let Some(out) = &a.out {
        fs::create_dir_all(out)?;
        ctx.primary(out);
        ctx.write(&out.join(VOTES_FILE), &io::votes_to_string(&matrix))?;
        ctx.write(&out.join(PARTICIPANTS_FILE), &io::to_jsonl(matrix.participants()))?;
        ctx.write(&out.join(STATEMENTS_FILE), &io::to_jsonl(matrix.statements()))?;
    }
    ctx.emit(&matrix.summarize());
    Ok(())
}

/// Written by `cluster`, read back by `repness` and `consensus`.
#[derive(Debug, Serialize, Deserialize)]
pub struct GroupsReport {
    pub participants: Vec<String>,
    pub dims: usize,
    pub impute: Impute,
    pub explained_variance: Vec<f64>,
    pub explained_ratio: Vec<f64>,
    pub coordinates: Vec<Vec<f64>>,
    pub groups: OpinionGroups,
}

fn cluster_cmd(ctx: &mut Ctx, a: &ClusterArgs) -> CliResult<()> {
    let matrix = ctx.dataset(&a.input)?;
    let impute = match a.impute {
        ImputeArg::Zero => Impute::Zero,
        ImputeArg::RowMean => Impute::RowMean,
    };
    let projection = reduce(&matrix, a.dims, impute)?;
    let groups = cluster(&projection, a.kmax, a.seed)?;
    let report = GroupsReport {
        participants: matrix.participants().iter().map(|p| p.id.clone()).collect(),
        dims: a.dims,
        impute,
        explained_ratio: projection.explained_ratio(),
        explained_variance: projection.explained_variance,
        coordinates: projection.coordinates,
        groups,
    };
    if let Some(path) = &a.report {
        ctx.primary(path);
        ctx.write_json(path, &report)?;
    }
    ctx.emit(&report);
    Ok(())
}

/// Aligns a saved grouping with the matrix's participant order.
fn load_groups(ctx: &mut Ctx, path: &Path, matrix: &WillMatrix) -> CliResult<OpinionGroups> {
    let saved: GroupsReport = ctx.read_json(path)?;
    let mut groups = saved.groups.clone();
    groups.assignment = matrix
        .participants()
        .iter()
        .map(|p| {
            saved
                .participants
                .iter()
                .position(|q| q == &p.id)
                .map(|i| saved.groups.assignment[i])
                .ok_or_else(|| AgoraError::UnknownId(p.id.clone()))
        })
        .collect::<Result<_, _>>()?;
    Ok(groups)
}

fn repness_cmd(ctx: &mut Ctx, a: &RepnessArgs) -> CliResult<()> {
    let matrix = ctx.dataset(&a.input)?;
    let groups = load_groups(ctx, &a.groups, &matrix)?;
    let options = RepnessOptions {
        count_pass_in_total: !a.exclude_pass,
        orientation: match a.orientation {
            OrientationArg::Paper => Orientation::Paper,
            OrientationArg::Polis => Orientation::Polis,
        },
    };
    let vote = match a.vote {
        VoteArg::Agree => VoteValue::Agree,
        VoteArg::Disagree => VoteValue::Disagree,
    };
    let ids: Vec<String> = match &a.statement {
        Some(s) => vec![s.clone()],
        None => matrix.statements().iter().map(|s| s.id.clone()).collect(),
    };
    let reports = ids
        .iter()
        .map(|s| repness(&matrix, &groups, s, a.group, vote, options))
        .collect::<Result<Vec<_>, _>>()?;
    ctx.emit(&reports);
    Ok(())
}

fn consensus(ctx: &mut Ctx, a: &ConsensusArgs) -> CliResult<()> {
    let matrix = ctx.dataset(&a.input)?;
    let groups = load_groups(ctx, &a.groups, &matrix)?;
    let report = group_informed_consensus(&matrix, &groups, !a.exclude_pass, a.include_unvoted)?;
    ctx.emit(&report);
    Ok(())
}

/// Written by `notes fit`, read back by `notes status` and `notes diagnostics`.
#[derive(Debug, Serialize, Deserialize)]
pub struct FactorsFile {
    pub participants: Vec<String>,
    pub statements: Vec<String>,
    pub schema: Schema,
    pub factors: LatentFactors,
    pub report: FitReport,
}

fn notes_fit(ctx: &mut Ctx, a: &NotesFitArgs) -> CliResult<()> {
    let matrix = ctx.dataset(&a.input)?;
    let config = FitConfig {
        lambda_intercept: a.lambda_intercept,
        lambda_factor: a.lambda_factor,
        epochs: a.epochs,
        seed: a.seed,
        ..FitConfig::default()
    };
    let (factors, report) = factor::fit(&matrix, &config)?;
    let file = FactorsFile {
        participants: matrix.participants().iter().map(|p| p.id.clone()).collect(),
        statements: matrix.statements().iter().map(|s| s.id.clone()).collect(),
        schema: matrix.schema(),
        factors,
        report,
    };
    if let Some(path) = &a.out {
        ctx.primary(path);
        ctx.write_json(path, &file)?;
    }
    ctx.emit(&file);
    Ok(())
}

#[derive(Serialize)]
struct StatusLine {
    statement: String,
    intercept: f64,
    factor: f64,
    status: HelpfulnessStatus,
}

fn notes_status(ctx: &mut Ctx, a: &NotesStatusArgs) -> CliResult<()> {
    let file: FactorsFile = ctx.read_json(&a.factors)?;
    let status = helpfulness_status(&file.factors, a.threshold, a.cap)?;
    let lines: Vec<StatusLine> = file
        .statements
        .iter()
        .enumerate()
        .map(|(j, s)| StatusLine {
            statement: s.clone(),
            intercept: file.factors.item_intercepts[j],
            factor: file.factors.item_factors[j],
            status: status[j],
        })
        .collect();
    ctx.emit(&lines);
    Ok(())
}

fn notes_diagnostics(ctx: &mut Ctx, a: &NotesDiagnosticsArgs) -> CliResult<()> {
    let file: FactorsFile = ctx.read_json(&a.factors)?;
    if a.bins == 0 {
        return Err(AgoraError::InvalidArgument("bins must be >= 1".into()).into());
    }
    let values = match a.family {
        FamilyArg::User => &file.factors.user_factors,
        FamilyArg::Item => &file.factors.item_factors,
    };
    ctx.emit(&factor_diagnostics(values, a.bins));
    Ok(())
}

fn bridge(ctx: &mut Ctx, a: &BridgeArgs) -> CliResult<()> {
    let matrix = ctx.dataset(&a.input)?;
    ctx.emit(&bridging_minapproval(&matrix, &a.attr, !a.exclude_pass)?);
    Ok(())
}

#[derive(Serialize)]
pub(crate) struct VoteReport {
    pub rule: String,
    pub candidates: Vec<String>,
    pub n_voters: usize,
    /// `None` only for the Condorcet rule without a Condorcet winner.
    pub winner: Option<String>,
    pub order: Option<Vec<String>>,
    pub tie: bool,
    pub scores: Option<Vec<(String, f64)>>,
    pub pairwise: Vec<Vec<usize>>,
    pub strongest_paths: Vec<Vec<usize>>,
    pub schulze_order_has_ties: bool,
    pub condorcet_cycle: bool,
    pub clone: Option<CloneReport>,
}

pub(crate) fn vote_report(profile: &RankingProfile, rule: RuleArg) -> VoteReport {
    let s = schulze(profile);
    let cond = condorcet(profile);
    let (winner, order, tie, scores) = match rule {
        RuleArg::Plurality | RuleArg::Borda => {
            let r = if matches!(rule, RuleArg::Plurality) {
                plurality(profile)
            } else {
                borda(profile)
            };
            (Some(r.winner), Some(r.order), r.tie, r.scores)
        }
        RuleArg::Schulze => (
            Some(s.result.winner.clone()),
            Some(s.result.order.clone()),
            s.result.tie,
            None,
        ),
        RuleArg::Condorcet => (cond.winner().map(str::to_string), None, false, None),
    };
    VoteReport {
        rule: format!("{rule:?}").to_lowercase(),
        candidates: profile.candidates().to_vec(),
        n_voters: profile.n_voters(),
        winner,
        order,
        tie,
        scores,
        pairwise: s.pairwise.d.clone(),
        strongest_paths: s.strongest_paths.clone(),
        schulze_order_has_ties: s.order_has_ties,
        condorcet_cycle: matches!(cond, CondorcetOutcome::NoWinner { cycle: true, .. }),
        clone: None,
    }
}

fn vote(ctx: &mut Ctx, a: &VoteArgs) -> CliResult<()> {
    let text = ctx.read(&a.input)?;
    let lines: Vec<_> = io::parse_lines(&text)?.into_iter().map(|(_, l)| l).collect();
    let profile = RankingProfile::from_lines(&lines)?;
    let mut report = vote_report(&profile, a.rule);
    if let Some(candidate) = &a.clone {
        let rule = match a.rule {
            RuleArg::Plurality => Rule::Plurality,
            RuleArg::Borda => Rule::Borda,
            RuleArg::Schulze => Rule::Schulze,
            RuleArg::Condorcet => {
                return Err(
                    AgoraError::InvalidArgument("--clone needs a rule that always elects a winner".into()).into(),
                )
            }
        };
        report.clone = Some(clone_test(&profile, candidate, a.clones, a.seed, rule)?);
    }
    ctx.emit(&report);
    Ok(())
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum CheckReport {
    Approval { threshold: f64, verdict: JrVerdict },
    Rating { verdict: JrVerdict },
    Matched(MatchedReport),
}

#[derive(Serialize)]
struct SlateReport {
    k: usize,
    participants: Vec<String>,
    pool: Vec<String>,
    slate: Slate,
    check: Option<CheckReport>,
}

fn slate(ctx: &mut Ctx, a: &SlateArgs) -> CliResult<()> {
    let text = ctx.read(&a.utilities)?;
    let lines: Vec<io::UtilityLine> = io::parse_lines(&text)?.into_iter().map(|(_, l)| l).collect();
    let pool: Option<Vec<String>> = match &a.pool {
        Some(path) => {
            let text = ctx.read(path)?;
            let statements: Vec<agora_core::Statement> = io::parse_lines(&text)?.into_iter().map(|(_, s)| s).collect();
            Some(statements.into_iter().map(|s| s.id).collect())
        }
        None => None,
    };
    let table = UtilityTable::from_lines(&lines, pool.as_deref())?;
    let slate = greedy_slate(&table, a.k)?;
    let committee = committee_indices(&table, &slate)?;
    let check = match a.check {
        None => None,
        Some(CheckArg::Approval) => Some(CheckReport::Approval {
            threshold: a.approve_at,
            verdict: jr_check_approval(&table.approvals(a.approve_at), &table.statements, &committee, a.k)?,
        }),
        Some(CheckArg::Rating) => Some(CheckReport::Rating {
            verdict: jr_check_rating(&table, &committee, a.k)?,
        }),
        Some(CheckArg::Matched) => Some(CheckReport::Matched(matched_jr_check(&slate, &table)?)),
    };
    ctx.emit(&SlateReport {
        k: a.k,
        participants: table.participants.clone(),
        pool: table.statements.clone(),
        slate,
        check,
    });
    Ok(())
}

#[derive(Serialize)]
struct RoundSummary {
    round: usize,
    winner: String,
    origin: String,
    shortlist: Vec<String>,
    dispersion_before: f64,
    dispersion_after: f64,
}

#[derive(Serialize)]
struct PipelineReport {
    trace: Option<PathBuf>,
    rounds: Vec<RoundSummary>,
}

fn pipeline(ctx: &mut Ctx, a: &PipelineArgs) -> CliResult<()> {
    let world: SyntheticWorld = ctx.read_json(&a.world)?;
    let config = RoundConfig {
        n_candidates: a.candidates,
        top_m: a.top,
        eta: a.eta,
        rounds: a.rounds,
        seed: a.seed,
        predictor_noise: a.noise,
    };
    let trace: RoundTrace = run_default_pipeline(&world, &config)?;
    let rounds = trace
        .rounds
        .iter()
        .map(|r| RoundSummary {
            round: r.round,
            winner: r.winner.id.clone(),
            origin: r.winner.origin.clone(),
            shortlist: r.shortlist.clone(),
            dispersion_before: r.dispersion_before,
            dispersion_after: r.dispersion_after,
        })
        .collect();
    match &a.trace {
        Some(path) => {
            ctx.primary(path);
            ctx.write_json(path, &trace)?;
            ctx.emit(&PipelineReport {
                trace: Some(path.clone()),
                rounds,
            });
        }
        None => ctx.emit(&trace),
    }
    Ok(())
}
