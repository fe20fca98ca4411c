//! Command-line pipeline: preprocess, train, sample, eval, gen-corpus.

mod config_file;
mod csvio;
mod preprocess;

use std::collections::HashSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lmol::checkpoint::{load_checkpoint, save_checkpoint};
use lmol::context::{ContextSpec, FragmentCondition, NumericCondition};
use lmol::corpus::generate_corpus;
use lmol::dataset::{split_dataset, Dataset};
use lmol::metrics;
use lmol::sample::generate;
use lmol::train::{train_loop, TrainOptions};
use lmol::{rng, Error, ModelConfig, ModelParams, SamplerConfig, TrainConfig};
use numcore::AdamState;
use smiles::descriptors::{descriptor_by_name, BUILTIN_COLUMNS};
use smiles::{descriptors, parse as parse_smiles, tokenize, validate, Vocabulary, UNK_ID};

use config_file::RunConfig;
use csvio::{load_generated, Table};

#[derive(Parser)]
#[command(name = "lmol", about = "Conditional SMILES generation pipeline", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Filter a CSV corpus, compute descriptors, build the vocabulary, and
    /// serialize the tokenized dataset.
    Preprocess(PreprocessArgs),
    /// Train a model on a preprocessed dataset.
    Train(TrainArgs),
    /// Generate SMILES from a checkpoint under optional conditions.
    Sample(SampleArgs),
    /// Compute metrics over generated SMILES and emit report CSVs.
    Eval(EvalArgs),
    /// Emit a synthetic SMILES corpus CSV for desk-scale experiments.
    GenCorpus(GenCorpusArgs),
}

#[derive(Args)]
struct PreprocessArgs {
    /// Input CSV with a `smiles` column and optional property columns.
    #[arg(long)]
    input: PathBuf,
    /// Output directory for dataset.bin, vocab.txt, stats.txt.
    #[arg(long, default_value = "data")]
    out_dir: PathBuf,
    /// Run configuration file (condition.<i>.name bindings).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Reuse an existing vocabulary instead of rebuilding one.
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Token-count cap per molecule.
    #[arg(long, default_value_t = 256)]
    max_tokens: usize,
}

#[derive(Args)]
struct TrainArgs {
    /// Directory produced by `preprocess`.
    #[arg(long, default_value = "data")]
    data: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Checkpoint path (written at every eval interval).
    #[arg(long, default_value = "model.ckpt")]
    out: PathBuf,
    /// Continue from the checkpoint at --out.
    #[arg(long)]
    resume: bool,
    /// Metrics log path (CSV: step,train_loss,test_loss).
    #[arg(long, default_value = "metrics.csv")]
    metrics: PathBuf,
    /// Architecture preset: desk or paper.
    #[arg(long, default_value = "desk")]
    preset: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f32>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, default_value = "model.ckpt")]
    checkpoint: PathBuf,
    #[arg(long, default_value = "data/vocab.txt")]
    vocab: PathBuf,
    /// Numeric condition: name=value, name=a:b:step, or name=v1,v2,v3.
    #[arg(long = "cond")]
    conds: Vec<String>,
    /// Token-sequence condition as a SMILES string.
    #[arg(long)]
    fragment: Option<String>,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0.8)]
    temperature: f32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 256)]
    max_new_tokens: usize,
    /// Write one SMILES per line here (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a CSV with smiles, stop_reason, and per-sample targets.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Generated SMILES: plain lines or a CSV with a `smiles` column.
    #[arg(long)]
    generated: PathBuf,
    /// Reference corpus for novelty (lines or CSV).
    #[arg(long)]
    reference: Option<PathBuf>,
    /// name=target for a fixed target, or a bare name to read per-row
    /// target_<name> columns from the generated CSV.
    #[arg(long = "cond")]
    conds: Vec<String>,
    #[arg(long)]
    fragment: Option<String>,
    /// CSV supplying actual property values (smiles,<name>,...) for
    /// conditions that are not built-in descriptors.
    #[arg(long)]
    actuals: Option<PathBuf>,
    #[arg(long, default_value = "eval_report")]
    out_dir: PathBuf,
    /// Restrict to a comma-separated metric list
    /// (validity,uniqueness,novelty,mad,sm).
    #[arg(long)]
    metrics: Option<String>,
}

#[derive(Args)]
struct GenCorpusArgs {
    #[arg(long, default_value_t = 5000)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "corpus.csv")]
    out: PathBuf,
}

enum CliError {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<smiles::SmilesError> for CliError {
    fn from(e: smiles::SmilesError) -> Self {
        CliError::Runtime(e.into())
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Preprocess(args) => cmd_preprocess(args),
        Command::Train(args) => cmd_train(args),
        Command::Sample(args) => cmd_sample(args),
        Command::Eval(args) => cmd_eval(args),
        Command::GenCorpus(args) => cmd_gen_corpus(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn load_run_config(path: &Option<PathBuf>) -> Result<RunConfig, CliError> {
    match path {
        Some(p) => Ok(RunConfig::load(p)?),
        None => Ok(RunConfig::default()),
    }
}

// ── preprocess ──────────────────────────────────────────────────────────

fn cmd_preprocess(args: PreprocessArgs) -> Result<(), CliError> {
    let run_cfg = load_run_config(&args.config)?;
    let mut condition_names = run_cfg.condition_names()?;
    if condition_names.is_empty() {
        condition_names = BUILTIN_COLUMNS.iter().map(|s| s.to_string()).collect();
    }
    let table = Table::load(&args.input)?;
    let existing = match &args.vocab {
        Some(p) => Some(Vocabulary::load(p)?),
        None => None,
    };
    let output = preprocess::preprocess(&table, &condition_names, args.max_tokens, existing)?;
    preprocess::write_outputs(&args.out_dir, &output)?;
    print!("{}", output.stats.report());
    println!("vocabulary_size {}", output.vocab.len());
    println!("wrote {}", args.out_dir.join("dataset.bin").display());
    Ok(())
}

// ── train ───────────────────────────────────────────────────────────────

fn build_model_config(
    preset: &str,
    run_cfg: &RunConfig,
    d_voc: usize,
    n_conditions: usize,
) -> Result<ModelConfig, CliError> {
    let mut cfg = match preset {
        "desk" => ModelConfig::desk(d_voc, n_conditions),
        "paper" => ModelConfig::paper(d_voc, n_conditions),
        other => return Err(usage(format!("unknown preset {other:?} (desk|paper)"))),
    };
    if let Some(v) = run_cfg.get_parsed("model.d_emb")? {
        cfg.d_emb = v;
    }
    if let Some(v) = run_cfg.get_parsed("model.n_heads")? {
        cfg.n_heads = v;
    }
    if let Some(v) = run_cfg.get_parsed("model.n_layers")? {
        cfg.n_layers = v;
    }
    if let Some(v) = run_cfg.get_parsed("model.d_ffn")? {
        cfg.d_ffn = v;
    }
    if let Some(v) = run_cfg.get_parsed("model.max_seq_len")? {
        cfg.max_seq_len = v;
    }
    if let Some(v) = run_cfg.get_parsed("model.dropout_p")? {
        cfg.dropout_p = v;
    }
    if let Some(v) = run_cfg.get_parsed("model.fragment_cap")? {
        cfg.fragment_cap = v;
    }
    if let Some(v) = run_cfg.get_parsed("model.rope_base")? {
        cfg.rope_base = v;
    }
    Ok(cfg)
}

fn build_train_config(args: &TrainArgs, run_cfg: &RunConfig) -> Result<TrainConfig, CliError> {
    let mut cfg = TrainConfig::desk();
    if let Some(v) = run_cfg.get_parsed("train.batch_size")? {
        cfg.batch_size = v;
    }
    if let Some(v) = run_cfg.get_parsed("train.grad_accum")? {
        cfg.grad_accum = v;
    }
    if let Some(v) = run_cfg.get_parsed("train.p_del")? {
        cfg.p_del = v;
    }
    if let Some(v) = run_cfg.get_parsed("train.learning_rate")? {
        cfg.learning_rate = v;
    }
    if let Some(v) = run_cfg.get_parsed("train.beta1")? {
        cfg.beta1 = v;
    }
    if let Some(v) = run_cfg.get_parsed("train.beta2")? {
        cfg.beta2 = v;
    }
    if let Some(v) = run_cfg.get_parsed("train.max_steps")? {
        cfg.max_steps = v;
    }
    if let Some(v) = run_cfg.get_parsed("train.seed")? {
        cfg.seed = v;
    }
    if let Some(v) = run_cfg.get_parsed("train.eval_interval")? {
        cfg.eval_interval = v;
    }
    if let Some(v) = run_cfg.get_parsed("train.grad_clip")? {
        cfg.grad_clip = Some(v);
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.steps {
        cfg.max_steps = v;
    }
    if let Some(v) = args.batch_size {
        cfg.batch_size = v;
    }
    if let Some(v) = args.learning_rate {
        cfg.learning_rate = v;
    }
    Ok(cfg)
}

fn cmd_train(args: TrainArgs) -> Result<(), CliError> {
    let run_cfg = load_run_config(&args.config)?;
    let dataset = Dataset::load(&args.data.join("dataset.bin"))?;
    let vocab = Vocabulary::load(&args.data.join("vocab.txt"))?;
    let train_cfg = build_train_config(&args, &run_cfg)?;
    let model_cfg = build_model_config(
        &args.preset,
        &run_cfg,
        vocab.len(),
        dataset.condition_names.len(),
    )?;
    model_cfg.check()?;
    train_cfg.check()?;

    let split_ratio: f64 = run_cfg.get_parsed("train.split_ratio")?.unwrap_or(0.9);
    let (train_rows, test_rows) = split_dataset(dataset.rows, split_ratio, train_cfg.seed)?;

    let (params, mut adam, start_step) = if args.resume {
        let ckpt = lmol::checkpoint::load_checkpoint_expecting(&args.out, &model_cfg)?;
        if ckpt.params.condition_names() != dataset.condition_names {
            return Err(Error::config(
                "checkpoint condition columns do not match the dataset",
            )
            .into());
        }
        let params = ckpt.params;
        let all = params.all();
        let mut adam = AdamState::new(
            &all,
            train_cfg.learning_rate,
            train_cfg.beta1,
            train_cfg.beta2,
            train_cfg.adam_epsilon,
        );
        if let Some((m, v, t)) = ckpt.adam {
            adam.restore(m, v, t).map_err(Error::from)?;
        }
        println!("resuming from step {}", ckpt.step);
        (params, adam, ckpt.step)
    } else {
        let params = ModelParams::init(
            model_cfg,
            &dataset.condition_names,
            &mut rng::derive(train_cfg.seed, rng::STREAM_INIT, 0),
        )?;
        let all = params.all();
        let adam = AdamState::new(
            &all,
            train_cfg.learning_rate,
            train_cfg.beta1,
            train_cfg.beta2,
            train_cfg.adam_epsilon,
        );
        (params, adam, 0)
    };

    println!(
        "training: {} parameters, {} train rows, {} test rows, {} steps",
        params.param_count(),
        train_rows.len(),
        test_rows.len(),
        train_cfg.max_steps
    );
    let opts = TrainOptions {
        config: train_cfg,
        checkpoint_path: Some(args.out.clone()),
        metrics_path: Some(args.metrics.clone()),
        verbose: true,
    };
    train_loop(&params, &mut adam, start_step, &train_rows, &test_rows, &opts)?;
    // Final checkpoint even when max_steps is not a multiple of the
    // interval.
    save_checkpoint(
        &args.out,
        &params,
        Some(&adam),
        opts.config.max_steps,
        opts.config.seed,
    )?;
    println!("checkpoint written to {}", args.out.display());
    Ok(())
}

// ── sample ──────────────────────────────────────────────────────────────

enum CondValues {
    Fixed(f64),
    /// Uniform draws over a discrete set (`a:b:step` or `v1,v2,v3`).
    Set(Vec<f64>),
}

fn parse_cond_flag(flag: &str) -> Result<(String, CondValues), CliError> {
    let (name, rest) = flag
        .split_once('=')
        .ok_or_else(|| usage(format!("--cond {flag:?}: expected name=value")))?;
    let parse_f64 = |s: &str| -> Result<f64, CliError> {
        s.trim()
            .parse()
            .map_err(|_| usage(format!("--cond {flag:?}: {s:?} is not a number")))
    };
    let values = if rest.contains(':') {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(usage(format!("--cond {flag:?}: ranges are a:b:step")));
        }
        let (a, b, step) = (parse_f64(parts[0])?, parse_f64(parts[1])?, parse_f64(parts[2])?);
        if step <= 0.0 || b < a {
            return Err(usage(format!("--cond {flag:?}: bad range")));
        }
        let mut values = Vec::new();
        let mut v = a;
        while v <= b + 1e-9 {
            values.push(v);
            v += step;
        }
        CondValues::Set(values)
    } else if rest.contains(',') {
        CondValues::Set(
            rest.split(',')
                .map(parse_f64)
                .collect::<Result<Vec<_>, _>>()?,
        )
    } else {
        CondValues::Fixed(parse_f64(rest)?)
    };
    Ok((name.to_string(), values))
}

fn cmd_sample(args: SampleArgs) -> Result<(), CliError> {
    if args.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let ckpt = load_checkpoint(&args.checkpoint)?;
    let params = ckpt.params;
    let vocab = Vocabulary::load(&args.vocab)?;
    if vocab.len() != params.config.d_voc {
        return Err(Error::config(format!(
            "vocabulary of {} tokens does not match checkpoint d_voc {}",
            vocab.len(),
            params.config.d_voc
        ))
        .into());
    }

    let mut conds: Vec<(usize, String, CondValues)> = Vec::new();
    for flag in &args.conds {
        let (name, values) = parse_cond_flag(flag)?;
        let id = params.condition_index(&name).ok_or_else(|| {
            usage(format!(
                "unknown condition {name:?}; this model was trained with {:?}",
                params.condition_names()
            ))
        })?;
        conds.push((id, name, values));
    }

    let fragment = match &args.fragment {
        None => None,
        Some(text) => {
            let ids = tokenize(text, &vocab)?;
            if ids.contains(&UNK_ID) {
                return Err(usage(format!(
                    "fragment {text:?} contains tokens outside the model vocabulary"
                )));
            }
            if ids.len() > params.config.fragment_cap {
                return Err(usage(format!(
                    "fragment of {} tokens exceeds the cap of {}",
                    ids.len(),
                    params.config.fragment_cap
                )));
            }
            Some(FragmentCondition::new(ids, params.config.fragment_cap)?)
        }
    };

    let sampler = SamplerConfig {
        temperature: args.temperature,
        max_new_tokens: args.max_new_tokens,
        seed: args.seed,
    };

    let mut lines = Vec::with_capacity(args.n);
    let mut csv_rows: Vec<Vec<String>> = Vec::with_capacity(args.n);
    for i in 0..args.n {
        let mut target_rng = rng::derive(args.seed, rng::STREAM_EPOCH, i as u64);
        let numeric: Vec<NumericCondition> = conds
            .iter()
            .map(|(id, _, values)| {
                use rand::Rng;
                let value = match values {
                    CondValues::Fixed(v) => *v,
                    CondValues::Set(set) => set[target_rng.random_range(0..set.len())],
                };
                NumericCondition {
                    property_id: *id,
                    value,
                }
            })
            .collect();
        let spec = ContextSpec::new(numeric.clone(), fragment.clone())?;
        let mut rng = rng::derive(args.seed, rng::STREAM_SAMPLE, i as u64);
        let (smiles, reason) = generate(&params, &vocab, &spec, &sampler, &mut rng)?;
        let mut row = vec![smiles.clone(), reason.as_str().to_string()];
        for ((_, name, _), cond) in conds.iter().zip(&numeric) {
            let _ = name;
            row.push(format!("{}", cond.value));
        }
        csv_rows.push(row);
        lines.push(smiles);
    }

    let text = lines.join("\n") + "\n";
    match &args.out {
        Some(path) => std::fs::write(path, text).map_err(Error::from)?,
        None => print!("{text}"),
    }
    if let Some(path) = &args.csv {
        let mut header = vec!["smiles".to_string(), "stop_reason".to_string()];
        for (_, name, _) in &conds {
            header.push(format!("target_{name}"));
        }
        let mut out = header.join(",");
        out.push('\n');
        for row in &csv_rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        std::fs::write(path, out).map_err(Error::from)?;
    }
    Ok(())
}

// ── eval ────────────────────────────────────────────────────────────────

fn cmd_eval(args: EvalArgs) -> Result<(), CliError> {
    let (generated, table) = load_generated(&args.generated)?;
    if generated.is_empty() {
        return Err(Error::data("no generated SMILES to evaluate").into());
    }
    let requested: Option<HashSet<String>> = args
        .metrics
        .as_ref()
        .map(|m| m.split(',').map(|s| s.trim().to_string()).collect());
    let wants = |name: &str| requested.as_ref().is_none_or(|r| r.contains(name));

    if requested
        .as_ref()
        .is_some_and(|r| r.contains("novelty"))
        && args.reference.is_none()
    {
        return Err(usage("novelty requested but no --reference given"));
    }

    let mut summary: Vec<(String, f64)> = Vec::new();
    if wants("validity") {
        summary.push(("validity".into(), metrics::validity(&generated)));
    }
    if wants("uniqueness") {
        summary.push(("uniqueness".into(), metrics::uniqueness(&generated)?));
        summary.push((
            "uniqueness_at_1k".into(),
            metrics::uniqueness_at(&generated, 1000)?,
        ));
    }
    if wants("novelty") {
        if let Some(ref_path) = &args.reference {
            let (reference, _) = load_generated(ref_path)?;
            let reference: HashSet<String> = reference.into_iter().collect();
            summary.push(("novelty".into(), metrics::novelty(&generated, &reference)));
        }
    }

    // Per-molecule parse results drive MAD and the detail rows.
    let parsed: Vec<Option<smiles::MolGraph>> = generated
        .iter()
        .map(|s| match validate(s) {
            v if v.is_valid() => parse_smiles(s).ok(),
            _ => None,
        })
        .collect();

    let actuals_table = match &args.actuals {
        Some(p) => Some(Table::load(p)?),
        None => None,
    };

    struct CondEval {
        name: String,
        targets: Vec<Option<f64>>,
        actuals: Vec<Option<f64>>,
    }
    let mut cond_evals: Vec<CondEval> = Vec::new();
    if wants("mad") {
        for flag in &args.conds {
            let (name, targets) = if let Some((name, value)) = flag.split_once('=') {
                if value.contains(':') || value.contains(',') {
                    return Err(usage(format!(
                        "--cond {flag:?}: eval needs a fixed target or a bare name \
                         with target_{name} columns in the generated CSV"
                    )));
                }
                let v: f64 = value
                    .parse()
                    .map_err(|_| usage(format!("--cond {flag:?}: bad number")))?;
                (name.to_string(), vec![Some(v); generated.len()])
            } else {
                let t = table.as_ref().ok_or_else(|| {
                    usage(format!(
                        "--cond {flag}: per-row targets need a generated CSV with target columns"
                    ))
                })?;
                let col = t.column(&format!("target_{flag}")).ok_or_else(|| {
                    usage(format!("generated CSV has no target_{flag} column"))
                })?;
                (
                    flag.to_string(),
                    t.rows.iter().map(|r| r[col].parse().ok()).collect(),
                )
            };
            let actuals = actual_values(&name, &generated, &parsed, actuals_table.as_ref())?;
            cond_evals.push(CondEval {
                name,
                targets,
                actuals,
            });
        }
        for ce in &cond_evals {
            let pairs: Vec<(f64, f64)> = ce
                .actuals
                .iter()
                .zip(&ce.targets)
                .filter_map(|(a, t)| Some(((*a)?, (*t)?)))
                .collect();
            if !pairs.is_empty() {
                let (a, t): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
                summary.push((format!("mad_{}", ce.name), metrics::mad(&a, &t)?));
            }
        }
    }

    let mut fragment_hits: Option<Vec<bool>> = None;
    if wants("sm") {
        if let Some(frag) = &args.fragment {
            summary.push((
                "substructure_match_rate".into(),
                metrics::substructure_match_rate(&generated, frag)?,
            ));
            let frag_graph = parse_smiles(frag).map_err(Error::from)?;
            let pattern = smiles::to_pattern(&frag_graph);
            fragment_hits = Some(
                generated
                    .iter()
                    .map(|s| {
                        parse_smiles(s)
                            .map(|g| smiles::substructure_match(&pattern, &g))
                            .unwrap_or(false)
                    })
                    .collect(),
            );
        }
    }

    // Detail CSV: one row per generated sample.
    let mut header = vec!["smiles".to_string(), "valid".to_string()];
    for ce in &cond_evals {
        header.push(format!("target_{}", ce.name));
        header.push(format!("actual_{}", ce.name));
    }
    if fragment_hits.is_some() {
        header.push("matches_fragment".into());
    }
    let detail: Vec<Vec<String>> = generated
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut row = vec![s.clone(), (parsed[i].is_some() as u8).to_string()];
            for ce in &cond_evals {
                row.push(ce.targets[i].map_or(String::new(), |v| v.to_string()));
                row.push(ce.actuals[i].map_or(String::new(), |v| v.to_string()));
            }
            if let Some(hits) = &fragment_hits {
                row.push((hits[i] as u8).to_string());
            }
            row
        })
        .collect();

    metrics::emit_report(&args.out_dir, &summary, &header, &detail)?;
    println!("{:<28} value", "metric");
    for (name, value) in &summary {
        println!("{name:<28} {value:.4}");
    }
    println!("report written to {}", args.out_dir.display());
    Ok(())
}

/// Actual property values per generated molecule: built-in descriptors when
/// available, otherwise looked up in the supplied actuals CSV. Invalid
/// molecules yield `None` and are excluded from MAD.
fn actual_values(
    name: &str,
    generated: &[String],
    parsed: &[Option<smiles::MolGraph>],
    actuals: Option<&Table>,
) -> Result<Vec<Option<f64>>, CliError> {
    if BUILTIN_COLUMNS.contains(&name) {
        return Ok(parsed
            .iter()
            .map(|g| {
                g.as_ref()
                    .map(|g| descriptor_by_name(&descriptors(g), name).expect("built-in"))
            })
            .collect());
    }
    let table = actuals.ok_or_else(|| {
        usage(format!(
            "condition {name:?} is not a built-in descriptor; supply --actuals"
        ))
    })?;
    let scol = table
        .column("smiles")
        .ok_or_else(|| usage("--actuals CSV needs a smiles column"))?;
    let vcol = table
        .column(name)
        .ok_or_else(|| usage(format!("--actuals CSV has no {name} column")))?;
    let lookup: std::collections::HashMap<&str, f64> = table
        .rows
        .iter()
        .filter_map(|r| Some((r[scol].as_str(), r[vcol].parse().ok()?)))
        .collect();
    Ok(generated
        .iter()
        .zip(parsed)
        .map(|(s, g)| {
            if g.is_some() {
                lookup.get(s.as_str()).copied()
            } else {
                None
            }
        })
        .collect())
}

// ── gen-corpus ──────────────────────────────────────────────────────────

fn cmd_gen_corpus(args: GenCorpusArgs) -> Result<(), CliError> {
    let corpus = generate_corpus(args.n, args.seed);
    let mut text = String::from("smiles\n");
    for s in &corpus {
        text.push_str(s);
        text.push('\n');
    }
    std::fs::write(&args.out, text).map_err(Error::from)?;
    println!("wrote {} molecules to {}", corpus.len(), args.out.display());
    Ok(())
}

