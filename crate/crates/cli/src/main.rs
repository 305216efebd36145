//! `agora`: command-line access to every analysis in `agora-core`.
//!
//! Reports are JSON on stdout (or tables with `--pretty`). Every run also
//! emits a manifest recording flags, seed and input/output digests.

mod commands;
mod manifest;
mod pretty;
mod reproduce;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "agora",
    version,
    about = "Collective-judgment aggregation over sparse will matrices"
)]
pub struct Cli {
    /// Render reports as human-readable tables instead of JSON.
    #[arg(long, global = true)]
    pub pretty: bool,
    /// Where to write the run manifest. Defaults to a sidecar next to the
    /// primary output file, or stderr when there is none.
    #[arg(long, global = true, value_name = "PATH")]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Generate a synthetic population and its votes.
    Synth(SynthArgs),
    /// Validate a dataset directory and summarize it.
    Ingest(IngestArgs),
    /// Project participants with PCA and cluster them into opinion groups.
    Cluster(ClusterArgs),
    /// Representativeness of statements for one opinion group.
    Repness(RepnessArgs),
    /// Rank statements by group-informed consensus.
    Consensus(ConsensusArgs),
    /// Latent-factor helpfulness model.
    #[command(subcommand)]
    Notes(NotesCommand),
    /// Rank statements by their weakest demographic group's approval.
    Bridge(BridgeArgs),
    /// Aggregate ranked ballots.
    Vote(VoteArgs),
    /// Build a proportional slate and check justified representation.
    Slate(SlateArgs),
    /// Run the multi-round deliberation pipeline on a synthetic world.
    Pipeline(PipelineArgs),
    /// Re-run a bundled worked example and check its known outcome.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 0.3)]
    pub density: f64,
    /// Cluster layout, e.g. "2x100@(-1,0);(1,0)" or "60,40@(-1,0);(1,0)".
    #[arg(long)]
    pub clusters: String,
    #[arg(long, default_value_t = 0.1)]
    pub spread: f64,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0.0)]
    pub pass_band: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    #[arg(long = "in", value_name = "DIR")]
    pub input: PathBuf,
    /// Re-save the validated dataset in canonical form.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImputeArg {
    Zero,
    RowMean,
}

#[derive(Debug, Args, Serialize)]
pub struct ClusterArgs {
    #[arg(long = "in", value_name = "DIR")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub dims: usize,
    #[arg(long, default_value_t = 5)]
    pub kmax: usize,
    #[arg(long, value_enum, default_value_t = ImputeArg::Zero)]
    pub impute: ImputeArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VoteArg {
    Agree,
    Disagree,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OrientationArg {
    Paper,
    Polis,
}

#[derive(Debug, Args, Serialize)]
pub struct RepnessArgs {
    #[arg(long = "in", value_name = "DIR")]
    pub input: PathBuf,
    /// Groups report written by `agora cluster`.
    #[arg(long, value_name = "PATH", default_value = "groups.json")]
    pub groups: PathBuf,
    #[arg(long)]
    pub group: usize,
    #[arg(long, value_enum, default_value_t = VoteArg::Agree)]
    pub vote: VoteArg,
    /// Ratio orientation: `paper` is P(g')/P(g), `polis` is P(g)/P(g').
    #[arg(long, value_enum, default_value_t = OrientationArg::Paper)]
    pub orientation: OrientationArg,
    /// Only this statement; all statements otherwise.
    #[arg(long)]
    pub statement: Option<String>,
    /// Leave passes out of T(g).
    #[arg(long)]
    pub exclude_pass: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct ConsensusArgs {
    #[arg(long = "in", value_name = "DIR")]
    pub input: PathBuf,
    #[arg(long, value_name = "PATH", default_value = "groups.json")]
    pub groups: PathBuf,
    #[arg(long)]
    pub exclude_pass: bool,
    /// Rank statements nobody voted on instead of listing them apart.
    #[arg(long)]
    pub include_unvoted: bool,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NotesCommand {
    /// Fit the intercept-plus-factor model by alternating least squares.
    Fit(NotesFitArgs),
    /// Classify statements from fitted factors.
    Status(NotesStatusArgs),
    /// Distribution summary of fitted user or item factors.
    Diagnostics(NotesDiagnosticsArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct NotesFitArgs {
    #[arg(long = "in", value_name = "DIR")]
    pub input: PathBuf,
    #[arg(long = "lambda-i", default_value_t = 0.15)]
    pub lambda_intercept: f64,
    #[arg(long = "lambda-f", default_value_t = 0.03)]
    pub lambda_factor: f64,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct NotesStatusArgs {
    /// Factors file written by `agora notes fit`.
    #[arg(long, value_name = "PATH", default_value = "factors.json")]
    pub factors: PathBuf,
    #[arg(long, default_value_t = 0.4)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0.5)]
    pub cap: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyArg {
    User,
    Item,
}

#[derive(Debug, Args, Serialize)]
pub struct NotesDiagnosticsArgs {
    #[arg(long, value_name = "PATH", default_value = "factors.json")]
    pub factors: PathBuf,
    #[arg(long, value_enum, default_value_t = FamilyArg::User)]
    pub family: FamilyArg,
    #[arg(long, default_value_t = 10)]
    pub bins: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct BridgeArgs {
    #[arg(long = "in", value_name = "DIR")]
    pub input: PathBuf,
    /// Demographic attribute defining the groups.
    #[arg(long)]
    pub attr: String,
    /// Leave passes out of each group's denominator.
    #[arg(long)]
    pub exclude_pass: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleArg {
    Plurality,
    Borda,
    Condorcet,
    Schulze,
}

#[derive(Debug, Args, Serialize)]
pub struct VoteArgs {
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub rule: RuleArg,
    /// Also re-run the rule with this candidate cloned.
    #[arg(long, value_name = "CANDIDATE")]
    pub clone: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub clones: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckArg {
    Approval,
    Rating,
    Matched,
}

#[derive(Debug, Args, Serialize)]
pub struct SlateArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_name = "PATH")]
    pub utilities: PathBuf,
    /// Statements file fixing the candidate pool and its order.
    #[arg(long, value_name = "PATH")]
    pub pool: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub check: Option<CheckArg>,
    /// Utility at or above which a participant approves a statement.
    #[arg(long, default_value_t = 0.5)]
    pub approve_at: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct PipelineArgs {
    /// World file written by `agora synth`.
    #[arg(long, value_name = "PATH")]
    pub world: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub rounds: usize,
    #[arg(long, default_value_t = 5)]
    pub candidates: usize,
    #[arg(long, default_value_t = 4)]
    pub top: usize,
    #[arg(long, default_value_t = 0.3)]
    pub eta: f64,
    /// Standard deviation of noise added by the predictor.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, value_name = "PATH")]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum Case {
    #[value(name = "fn13")]
    #[serde(rename = "fn13")]
    Smoothing,
    #[value(name = "fn18")]
    #[serde(rename = "fn18")]
    Bridging,
    #[value(name = "fn18-caveat")]
    #[serde(rename = "fn18-caveat")]
    BridgingCaveat,
    #[value(name = "fn28")]
    #[serde(rename = "fn28")]
    PluralityBorda,
    #[value(name = "fn29")]
    #[serde(rename = "fn29")]
    Cycle,
}

#[derive(Debug, Args, Serialize)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub case: Case,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let body = serde_json::json!({ "error": e.name(), "message": e.to_string() });
            eprintln!("{body}");
            ExitCode::from(1)
        }
    }
}
