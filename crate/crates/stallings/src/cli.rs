//! Command-line front end: one parser, one dispatcher, JSON or DOT output.
//!
//! Exit codes follow the contract: 0 on success, 1 when a verification or
//! resource check fails (with a machine-readable report on stdout), 2 on
//! usage errors (bad flags, malformed words, out-of-range ids). All numeric
//! verdicts serialize as exact rationals `{"num": "…", "den": "…"}`; floats
//! never appear. Output is deterministic: object keys are sorted by the
//! serializer and no randomized sweep runs in any subcommand, so identical
//! configurations produce byte-identical bytes (the `--seed` flag is part of
//! the configuration surface and reserved for randomized extensions).
//!
//! `STALLINGS_THREADS` is accepted and validated for forward compatibility;
//! every current search is single-threaded so that certificates and reports
//! are reproducible.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::action_builder::{GammaSequence, StageBudgets};
use crate::isoperimetry::{
    parse_ratio, phi_search, ratio_to_json, threshold_report, PhiBound, ThresholdBudgets,
    ThresholdReport,
};
use crate::normality::{degree_certify, wq_closure, LPredicate, NormalityCertificate, Verdict};
use crate::schreier::{OrbitFiniteness, SchreierView, VertexRef};
use crate::subgroups::{Malnormality, SubgroupHandle};
use crate::words::{Alphabet, Word};
use crate::{Error, Result};

/// Shared configuration: the ambient rank, search budgets, output format,
/// and the reproducibility seed. Every budget must be positive.
#[derive(Debug, Clone, clap::Args)]
pub struct RunConfig {
    /// Rank of the ambient free group.
    #[arg(long, global = true, default_value_t = 2)]
    pub rank: usize,
    /// Ball radius used by searches and witness sweeps.
    #[arg(long, global = true, default_value_t = 4)]
    pub radius: usize,
    /// Maximum candidate-set size used by searches.
    #[arg(long = "max-size", global = true, default_value_t = 8)]
    pub max_size: usize,
    /// Iteration ceiling for fixed-point computations.
    #[arg(long = "max-iter", global = true, default_value_t = 16)]
    pub max_iter: usize,
    /// Wall-clock ceiling in seconds, enforced between pipeline stages.
    #[arg(long = "time-ceiling", global = true, default_value_t = 900)]
    pub time_ceiling: u64,
    /// Output format; DOT applies to graph-shaped results only.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed for randomized sweeps (all current subcommands are
    /// deterministic; the seed is recorded configuration).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

impl RunConfig {
    fn validate(&self) -> Result<()> {
        if self.rank == 0 {
            return Err(Error::InvalidArgument("rank must be positive".into()));
        }
        if self.radius == 0 || self.max_size == 0 || self.max_iter == 0 || self.time_ceiling == 0 {
            return Err(Error::InvalidArgument(
                "budgets (radius, max-size, max-iter, time-ceiling) must be positive".into(),
            ));
        }
        Ok(())
    }

    fn alphabet(&self) -> Result<Alphabet> {
        Alphabet::new(self.rank)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
}

#[derive(Debug, Parser)]
#[command(
    name = "stallings",
    about = "Subgroup graphs, exact isoperimetry, weak normality, and staged amenable actions over free groups",
    version,
    color = clap::ColorChoice::Never,
    disable_help_subcommand = true
)]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Free-group word arithmetic.
    Word {
        #[command(subcommand)]
        op: WordOp,
    },
    /// Finitely generated subgroups as rooted core graphs.
    Subgroup {
        #[command(subcommand)]
        op: SubgroupOp,
    },
    /// The completed action Γ*: orbits and balls.
    Schreier {
        #[command(subcommand)]
        op: SchreierOp,
    },
    /// Certified upper bounds for the isoperimetric constant φ_S.
    Phi(PhiArgs),
    /// Weak-normality witnesses, closures, certificates, and thresholds.
    Normality {
        #[command(subcommand)]
        op: NormalityOp,
    },
    /// The staged construction of an amenable almost-free action.
    Action {
        #[command(subcommand)]
        op: ActionOp,
    },
}

#[derive(Debug, Subcommand)]
pub enum WordOp {
    /// Freely reduce the input.
    Reduce { text: String },
    /// Invert (and reduce) the input.
    Inverse { text: String },
    /// Concatenate two words and reduce.
    Concat { left: String, right: String },
    /// Cyclically reduce: w = c·u·c⁻¹ with u cyclically reduced.
    Cyclic { text: String },
}

#[derive(Debug, Subcommand)]
pub enum SubgroupOp {
    /// Rank of the subgroup (cycle rank of its core graph).
    Rank(GensArg),
    /// Index in the ambient free group (null when infinite).
    Index(GensArg),
    /// Membership of a word.
    Contains {
        #[command(flatten)]
        gens: GensArg,
        #[arg(long)]
        word: String,
    },
    /// The rooted core graph (JSON or DOT per --format).
    Graph(GensArg),
    /// A free basis read off a spanning tree.
    Generators(GensArg),
    /// Intersection with a second subgroup (fiber product core).
    Intersect {
        #[command(flatten)]
        gens: GensArg,
        #[arg(long = "with")]
        with: String,
    },
    /// Conjugate by a word.
    Conjugate {
        #[command(flatten)]
        gens: GensArg,
        #[arg(long)]
        by: String,
    },
    /// Ball-certified malnormality at the configured radius.
    Malnormal(GensArg),
}

#[derive(Debug, clap::Args)]
pub struct GensArg {
    /// Comma-separated generator words (empty for the trivial subgroup).
    #[arg(long, default_value = "")]
    pub gens: String,
}

#[derive(Debug, Subcommand)]
pub enum SchreierOp {
    /// Decide finiteness of the forward orbit of a vertex under a word.
    Orbit {
        #[command(flatten)]
        gens: GensArg,
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 0)]
        vertex: u32,
    },
    /// The induced ball around a core vertex in Γ* (JSON or DOT).
    Ball {
        #[command(flatten)]
        gens: GensArg,
        #[arg(long, default_value_t = 0)]
        vertex: u32,
    },
}

#[derive(Debug, clap::Args)]
pub struct PhiArgs {
    /// Comma-separated generators of the subgroup H; φ is bounded on the
    /// Schreier graph of F/H (empty: the Cayley graph of F itself).
    #[arg(long, default_value = "")]
    pub subgroup: String,
    /// Disable the greedy growth pass (exhaustive stratum only).
    #[arg(long = "no-heuristics")]
    pub no_heuristics: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PredChoice {
    /// Infinite conjugation intersection (rank ≥ 1).
    Infinite,
    /// Nonamenable conjugation intersection (rank ≥ 2).
    Nonamenable,
    /// Heuristic: nonamenable action on the ambient Cayley graph.
    NonamenableOnX,
}

#[derive(Debug, Subcommand)]
pub enum NormalityOp {
    /// Words g in the configured ball with gHg⁻¹ ∩ H satisfying the predicate.
    Witnesses {
        #[command(flatten)]
        gens: GensArg,
        #[arg(long, value_enum, default_value_t = PredChoice::Infinite)]
        pred: PredChoice,
    },
    /// Iterate the witness-generation step to a ball-certified fixed point.
    Closure {
        #[command(flatten)]
        gens: GensArg,
        #[arg(long, value_enum, default_value_t = PredChoice::Infinite)]
        pred: PredChoice,
    },
    /// n-degree weak-normality certification in the full free group.
    Certify {
        #[command(flatten)]
        gens: GensArg,
        #[arg(long)]
        degree: usize,
        #[arg(long, value_enum, default_value_t = PredChoice::Infinite)]
        pred: PredChoice,
    },
    /// Compare a certified φ upper bound against (1/2ⁿ)·φ(reference) and run
    /// the licensed certification when the strict threshold is met.
    Threshold {
        #[command(flatten)]
        gens: GensArg,
        #[arg(long)]
        degree: usize,
        /// Reference φ as "p" or "p/q" (default: built-in Cayley value).
        #[arg(long = "reference-phi")]
        reference_phi: Option<String>,
        /// Witness radius of the certification sweep.
        #[arg(long = "witness-radius", default_value_t = 2)]
        witness_radius: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum ActionOp {
    /// Build stages 1..=n, resuming from the state file when it exists.
    Build {
        #[arg(long)]
        stages: usize,
        #[arg(long, default_value = "gamma.json")]
        state: PathBuf,
        #[arg(long = "max-k", default_value_t = 64)]
        max_k: usize,
        #[arg(long = "max-ball", default_value_t = 3_000_000)]
        max_ball: usize,
        #[arg(long = "max-quotient", default_value_t = 4096)]
        max_quotient: usize,
        #[arg(long = "max-modulus", default_value_t = 64)]
        max_modulus: usize,
        #[arg(long = "max-side", default_value_t = 8)]
        max_side: usize,
        #[arg(long = "max-shapes", default_value_t = 100_000)]
        max_shapes: usize,
    },
    /// Re-verify the three invariants of a built stage from stored data.
    Verify {
        #[arg(long)]
        stage: usize,
        #[arg(long, default_value = "gamma.json")]
        state: PathBuf,
    },
    /// Export a chart of the stage action around the basepoint.
    Export {
        #[arg(long)]
        stage: usize,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value = "gamma.json")]
        state: PathBuf,
    },
}

/// Parse argv, dispatch, and render: returns the process exit code and the
/// full stdout payload.
pub fn execute<I, S>(argv: I) -> (i32, String)
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    if let Some(threads) = std::env::var_os("STALLINGS_THREADS") {
        let ok = threads
            .to_str()
            .and_then(|s| s.parse::<usize>().ok())
            .is_some_and(|n| n >= 1);
        if !ok {
            return (
                2,
                render_error("STALLINGS_THREADS must be a positive integer"),
            );
        }
    }
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            return (code, e.render().to_string());
        }
    };
    if let Err(e) = cli.config.validate() {
        return (2, render_error(&e.to_string()));
    }
    match run(&cli) {
        Ok(Outcome::Success(text)) => (0, text),
        Ok(Outcome::Failed(report)) => (1, pretty(&report)),
        Err(e) => {
            let code = match e {
                Error::MalformedWord(_) | Error::InvalidArgument(_) | Error::InvalidVertex(_) => 2,
                _ => 1,
            };
            (code, render_error(&e.to_string()))
        }
    }
}

enum Outcome {
    Success(String),
    /// A verification ran and failed; the report is machine-readable.
    Failed(Value),
}

fn run(cli: &Cli) -> Result<Outcome> {
    let config = &cli.config;
    let alphabet = config.alphabet()?;
    let started = Instant::now();
    match &cli.command {
        Command::Word { op } => run_word(alphabet, op).map(ok_json),
        Command::Subgroup { op } => run_subgroup(config, alphabet, op),
        Command::Schreier { op } => run_schreier(config, alphabet, op),
        Command::Phi(args) => {
            let h = subgroup_of(alphabet, &args.subgroup)?;
            let view = SchreierView::new(h.graph().clone());
            let bound = phi_search(&view, config.max_size, config.radius, !args.no_heuristics)?;
            Ok(ok_json(phi_json(&bound)))
        }
        Command::Normality { op } => run_normality(config, alphabet, op),
        Command::Action { op } => run_action(config, alphabet, op, started),
    }
}

fn run_word(alphabet: Alphabet, op: &WordOp) -> Result<Value> {
    Ok(match op {
        WordOp::Reduce { text } => word_json(&Word::parse(alphabet, text)?),
        WordOp::Inverse { text } => word_json(&Word::parse(alphabet, text)?.inverse()),
        WordOp::Concat { left, right } => {
            let l = Word::parse(alphabet, left)?;
            let r = Word::parse(alphabet, right)?;
            word_json(&l.concat(&r))
        }
        WordOp::Cyclic { text } => {
            let w = Word::parse(alphabet, text)?;
            let (conj, core) = w.cyclically_reduce();
            json!({
                "word": w.to_string(),
                "conjugator": conj.to_string(),
                "core": core.to_string(),
                "length": core.len(),
            })
        }
    })
}

fn run_subgroup(config: &RunConfig, alphabet: Alphabet, op: &SubgroupOp) -> Result<Outcome> {
    match op {
        SubgroupOp::Rank(g) => {
            let h = subgroup_of(alphabet, &g.gens)?;
            Ok(ok_json(json!({ "rank": h.rank() })))
        }
        SubgroupOp::Index(g) => {
            let h = subgroup_of(alphabet, &g.gens)?;
            Ok(ok_json(json!({ "index": h.index(), "rank": h.rank() })))
        }
        SubgroupOp::Contains { gens, word } => {
            let h = subgroup_of(alphabet, &gens.gens)?;
            let w = Word::parse(alphabet, word)?;
            Ok(ok_json(json!({
                "word": w.to_string(),
                "contains": h.contains(&w),
            })))
        }
        SubgroupOp::Graph(g) => {
            let h = subgroup_of(alphabet, &g.gens)?;
            Ok(match config.format {
                Format::Json => ok_json(h.graph().to_json()),
                Format::Dot => Outcome::Success(h.graph().to_dot()),
            })
        }
        SubgroupOp::Generators(g) => {
            let h = subgroup_of(alphabet, &g.gens)?;
            Ok(ok_json(json!({
                "rank": h.rank(),
                "generators": words_json(&h.generators()),
            })))
        }
        SubgroupOp::Intersect { gens, with } => {
            let h = subgroup_of(alphabet, &gens.gens)?;
            let k = subgroup_of(alphabet, with)?;
            Ok(ok_json(subgroup_json(&h.intersect(&k)?)))
        }
        SubgroupOp::Conjugate { gens, by } => {
            let h = subgroup_of(alphabet, &gens.gens)?;
            let g = Word::parse(alphabet, by)?;
            Ok(ok_json(subgroup_json(&h.conjugate(&g)?)))
        }
        SubgroupOp::Malnormal(g) => {
            let h = subgroup_of(alphabet, &g.gens)?;
            let value = match h.malnormal_in_ball(config.radius)? {
                Malnormality::BallCertified { radius } => json!({
                    "malnormal": true,
                    "certified_radius": radius,
                }),
                Malnormality::Violated {
                    witness,
                    intersection,
                } => json!({
                    "malnormal": false,
                    "witness": witness.to_string(),
                    "intersection": subgroup_json(&intersection),
                }),
            };
            Ok(ok_json(value))
        }
    }
}

fn run_schreier(config: &RunConfig, alphabet: Alphabet, op: &SchreierOp) -> Result<Outcome> {
    match op {
        SchreierOp::Orbit { gens, word, vertex } => {
            let h = subgroup_of(alphabet, &gens.gens)?;
            let view = SchreierView::new(h.graph().clone());
            if *vertex as usize >= view.core().num_vertices() {
                return Err(Error::InvalidVertex(*vertex));
            }
            let w = Word::parse(alphabet, word)?;
            let decision = view.orbit_finiteness(&w, &VertexRef::Core(*vertex))?;
            let value = match decision {
                OrbitFiniteness::Finite(orbit) => json!({
                    "word": w.to_string(),
                    "vertex": vertex,
                    "finite": true,
                    "orbit_size": orbit.len(),
                    "orbit": orbit,
                }),
                OrbitFiniteness::Infinite => json!({
                    "word": w.to_string(),
                    "vertex": vertex,
                    "finite": false,
                }),
            };
            Ok(ok_json(value))
        }
        SchreierOp::Ball { gens, vertex } => {
            let h = subgroup_of(alphabet, &gens.gens)?;
            let view = SchreierView::new(h.graph().clone());
            if *vertex as usize >= view.core().num_vertices() {
                return Err(Error::InvalidVertex(*vertex));
            }
            let ball = view.ball(&VertexRef::Core(*vertex), config.radius);
            Ok(match config.format {
                Format::Dot => Outcome::Success(ball.graph.to_dot()),
                Format::Json => ok_json(json!({
                    "center": vertex,
                    "radius": config.radius,
                    "vertices": ball.graph.num_vertices(),
                    "depths": ball.depths,
                    "kinds": ball
                        .refs
                        .iter()
                        .map(|r| if r.is_core() { "core" } else { "tree" })
                        .collect::<Vec<_>>(),
                    "graph": ball.graph.to_json(),
                })),
            })
        }
    }
}

fn run_normality(config: &RunConfig, alphabet: Alphabet, op: &NormalityOp) -> Result<Outcome> {
    match op {
        NormalityOp::Witnesses { gens, pred } => {
            let h = subgroup_of(alphabet, &gens.gens)?;
            let pred = build_pred(config, alphabet, *pred)?;
            let found = crate::normality::witnesses(&h, &pred, config.radius)?;
            Ok(ok_json(json!({
                "predicate": pred.describe(),
                "radius": config.radius,
                "count": found.len(),
                "witnesses": found
                    .iter()
                    .map(|(g, meet)| json!({
                        "word": g.to_string(),
                        "meet_rank": meet.rank(),
                    }))
                    .collect::<Vec<_>>(),
            })))
        }
        NormalityOp::Closure { gens, pred } => {
            let h = subgroup_of(alphabet, &gens.gens)?;
            let pred = build_pred(config, alphabet, *pred)?;
            let (closure, fixed) = wq_closure(&h, &pred, config.radius, config.max_iter)?;
            Ok(ok_json(json!({
                "predicate": pred.describe(),
                "radius": config.radius,
                "fixed_point": fixed,
                "equals_input": closure == h,
                "closure": subgroup_json(&closure),
            })))
        }
        NormalityOp::Certify { gens, degree, pred } => {
            let h = subgroup_of(alphabet, &gens.gens)?;
            let pred = build_pred(config, alphabet, *pred)?;
            let cert = degree_certify(&h, *degree, &pred, config.radius)?;
            Ok(ok_json(certificate_json(&cert)))
        }
        NormalityOp::Threshold {
            gens,
            degree,
            reference_phi,
            witness_radius,
        } => {
            let h = subgroup_of(alphabet, &gens.gens)?;
            let reference = cayley_view(alphabet)?;
            let budgets = ThresholdBudgets {
                max_size: config.max_size,
                radius: config.radius,
                witness_radius: *witness_radius,
                reference_phi: reference_phi.as_deref().map(parse_ratio).transpose()?,
                ..ThresholdBudgets::default()
            };
            let report = threshold_report(&h, &reference, *degree, &budgets)?;
            let value = threshold_json(&report);
            if report.consistent {
                Ok(ok_json(value))
            } else {
                Ok(Outcome::Failed(value))
            }
        }
    }
}

fn run_action(
    config: &RunConfig,
    alphabet: Alphabet,
    op: &ActionOp,
    started: Instant,
) -> Result<Outcome> {
    match op {
        ActionOp::Build {
            stages,
            state,
            max_k,
            max_ball,
            max_quotient,
            max_modulus,
            max_side,
            max_shapes,
        } => {
            let budgets = StageBudgets {
                max_k: *max_k,
                max_ball_vertices: *max_ball,
                max_quotient_order: *max_quotient,
                max_abelian_modulus: *max_modulus,
                max_box_side: *max_side,
                max_shapes: *max_shapes,
            };
            let mut seq = if state.exists() {
                let seq = GammaSequence::load(state)?;
                if seq.alphabet() != alphabet {
                    return Err(Error::InvalidArgument(format!(
                        "state file {} has rank {}, requested rank {}",
                        state.display(),
                        seq.alphabet().rank(),
                        alphabet.rank()
                    )));
                }
                seq
            } else {
                GammaSequence::initial(alphabet)
            };
            for n in 1..=*stages {
                if started.elapsed().as_secs() >= config.time_ceiling {
                    return Err(Error::StageBudget {
                        stage: n,
                        search: "wall clock",
                        budget: format!("{} s", config.time_ceiling),
                    });
                }
                seq.build_stage(n, &budgets)?;
            }
            seq.save(state)?;
            let stages_json: Vec<Value> = (0..=seq.built())
                .map(|n| match seq.meta(n) {
                    None => json!({
                        "n": n,
                        "vertices": seq.stage(n).map(|g| g.num_vertices()),
                    }),
                    Some(m) => json!({
                        "n": m.n,
                        "vertices": seq.stage(n).map(|g| g.num_vertices()),
                        "quotient": m.quotient,
                        "avoided_len": m.avoided_len,
                        "k": m.k,
                        "ball_vertices": m.ball_vertices,
                        "eps": ratio_to_json(&m.eps),
                        "folner_ratio": ratio_to_json(&m.folner_ratio),
                        "folner_size": m.folner_ids.len(),
                    }),
                })
                .collect();
            Ok(ok_json(json!({
                "state": state.display().to_string(),
                "built": seq.built(),
                "stages": stages_json,
            })))
        }
        ActionOp::Verify { stage, state } => {
            let seq = load_state(state)?;
            let report = seq.verify_stage(*stage)?;
            let value = json!({
                "stage": report.n,
                "pass": report.pass(),
                "deficient_vertex": report.deficient_vertex,
                "folner_ok": report.folner_ok,
                "folner_ratio": report
                    .folner_ratio
                    .as_ref()
                    .map(ratio_to_json)
                    .unwrap_or(Value::Null),
                "orbits_ok": report.orbits_ok,
                "orbit_violation": report
                    .orbit_violation
                    .as_ref()
                    .map(|(w, v)| json!([w.to_string(), v]))
                    .unwrap_or(Value::Null),
                "finite_orbit_counts": counts_json(&report.finite_orbit_counts),
                "almost_free_counts": counts_json(&report.almost_free_counts),
            });
            if report.pass() {
                Ok(ok_json(value))
            } else {
                Ok(Outcome::Failed(value))
            }
        }
        ActionOp::Export {
            stage,
            depth,
            state,
        } => {
            let seq = load_state(state)?;
            match config.format {
                Format::Json => Ok(ok_json(seq.export_action(*stage, *depth)?)),
                Format::Dot => {
                    let ball = seq.export_ball(*stage, *depth)?;
                    Ok(Outcome::Success(ball.graph.to_dot()))
                }
            }
        }
    }
}

fn load_state(state: &PathBuf) -> Result<GammaSequence> {
    if !state.exists() {
        return Err(Error::InvalidArgument(format!(
            "no action state at {}; run `action build` first",
            state.display()
        )));
    }
    GammaSequence::load(state)
}

/// Parse a comma-separated generator list; empty segments are skipped, the
/// empty string is the trivial subgroup.
fn parse_words(alphabet: Alphabet, spec: &str) -> Result<Vec<Word>> {
    let mut out = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        out.push(Word::parse(alphabet, part)?);
    }
    Ok(out)
}

fn subgroup_of(alphabet: Alphabet, spec: &str) -> Result<SubgroupHandle> {
    SubgroupHandle::from_generators(alphabet, &parse_words(alphabet, spec)?)
}

fn cayley_view(alphabet: Alphabet) -> Result<SchreierView> {
    let trivial = SubgroupHandle::from_generators(alphabet, &[])?;
    Ok(SchreierView::new(trivial.graph().clone()))
}

fn build_pred(config: &RunConfig, alphabet: Alphabet, choice: PredChoice) -> Result<LPredicate> {
    Ok(match choice {
        PredChoice::Infinite => LPredicate::Infinite,
        PredChoice::Nonamenable => LPredicate::Nonamenable,
        PredChoice::NonamenableOnX => {
            let defaults = ThresholdBudgets::default();
            LPredicate::NonamenableOnX {
                x: cayley_view(alphabet)?,
                max_size: config.max_size,
                radius: defaults.pred_radius,
                eps: defaults.pred_eps,
            }
        }
    })
}

fn ok_json(value: Value) -> Outcome {
    Outcome::Success(pretty(&value))
}

fn pretty(value: &Value) -> String {
    serde_json::to_string_pretty(value).expect("JSON values always serialize")
}

fn render_error(message: &str) -> String {
    pretty(&json!({ "error": message }))
}

fn word_json(w: &Word) -> Value {
    json!({ "word": w.to_string(), "length": w.len() })
}

fn words_json(words: &[Word]) -> Vec<String> {
    words.iter().map(|w| w.to_string()).collect()
}

/// Subgroup summary in the shape every subcommand (and the Python bindings)
/// emits.
pub fn subgroup_json(h: &SubgroupHandle) -> Value {
    json!({
        "rank": h.rank(),
        "index": h.index(),
        "vertices": h.graph().num_vertices(),
        "generators": words_json(&h.generators()),
    })
}

fn vertex_json(v: &VertexRef) -> Value {
    match v {
        VertexRef::Core(i) => json!({ "core": i }),
        VertexRef::Tree { anchor, walk } => json!({
            "tree": { "anchor": anchor, "walk": walk.to_string() }
        }),
    }
}

/// Search-bound report in the `phi` subcommand's output shape.
pub fn phi_json(bound: &PhiBound) -> Value {
    json!({
        "upper": ratio_to_json(&bound.upper),
        "witness_size": bound.witness.len(),
        "witness": bound.witness.iter().map(vertex_json).collect::<Vec<_>>(),
        "searched_floor": ratio_to_json(&bound.searched_floor),
        "per_size_min": bound
            .per_size_min
            .iter()
            .map(|(m, r)| json!([m, ratio_to_json(r)]))
            .collect::<Vec<_>>(),
        "max_size": bound.max_size,
        "radius": bound.radius,
        "truncated": bound.truncated,
    })
}

/// Certificate report in the `normality certify` output shape.
pub fn certificate_json(cert: &NormalityCertificate) -> Value {
    json!({
        "verdict": match cert.verdict {
            Verdict::Certified => "certified",
            Verdict::Unknown => "unknown",
        },
        "degree": cert.degree,
        "predicate": cert.predicate,
        "heuristic": cert.heuristic,
        "radius": cert.radius,
        "subject": subgroup_json(&cert.subject),
        "ambient": words_json(&cert.ambient),
        "witnesses": cert
            .witnesses
            .iter()
            .map(|(w, r)| json!([w.to_string(), r]))
            .collect::<Vec<_>>(),
        "chain": cert.chain.iter().map(subgroup_json).collect::<Vec<_>>(),
    })
}

/// Threshold report in the `normality threshold` output shape.
pub fn threshold_json(report: &ThresholdReport) -> Value {
    json!({
        "phi_upper": ratio_to_json(&report.phi_upper),
        "witness_size": report.witness_size,
        "reference_phi": ratio_to_json(&report.reference_phi),
        "degree": report.degree,
        "threshold": ratio_to_json(&report.threshold),
        "met": report.met,
        "consistent": report.consistent,
        "truncated": report.truncated,
        "certificate": report
            .certificate
            .as_ref()
            .map(certificate_json)
            .unwrap_or(Value::Null),
    })
}

fn counts_json(counts: &[(Word, usize)]) -> Value {
    Value::Array(
        counts
            .iter()
            .map(|(w, c)| json!([w.to_string(), c]))
            .collect(),
    )
}
