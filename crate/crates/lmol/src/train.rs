//! The SCL training loop: deterministic batch scheduling, gradient
//! accumulation, constant-rate Adam, periodic held-out evaluation, and
//! checkpointing.

use std::fs;
use std::path::PathBuf;

use numcore::{AdamState, Tape};

use crate::batch::{frame, make_batch, Batch};
use crate::checkpoint::save_checkpoint;
use crate::config::TrainConfig;
use crate::context::{assemble_input, ContextSpec, NumericCondition, IGNORE_ID};
use crate::dataset::EncodedRow;
use crate::error::Error;
use crate::model::{forward, Mode};
use crate::params::ModelParams;
use crate::rng;

/// One metrics-log row; the file format is CSV `step,train_loss,test_loss`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub step: u64,
    pub train_loss: f32,
    pub test_loss: f32,
}

pub struct TrainOptions {
    pub config: TrainConfig,
    pub checkpoint_path: Option<PathBuf>,
    pub metrics_path: Option<PathBuf>,
    pub verbose: bool,
}

/// Deterministic batch schedule: micro-batch `m` draws rows
/// `perm_epoch[pos*B..]` where the epoch permutation depends only on
/// `(seed, epoch)`. Any step can therefore be rebuilt from the step index
/// alone, which is what makes resume exact.
fn micro_batch_rows<'a>(
    rows: &'a [EncodedRow],
    batch_size: usize,
    seed: u64,
    micro_index: u64,
) -> Vec<&'a EncodedRow> {
    use rand::seq::SliceRandom;
    let n = rows.len();
    let per_epoch = n.div_ceil(batch_size) as u64;
    let epoch = micro_index / per_epoch;
    let pos = (micro_index % per_epoch) as usize;
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng::derive(seed, rng::STREAM_EPOCH, epoch));
    perm[pos * batch_size..n.min((pos + 1) * batch_size)]
        .iter()
        .map(|&i| &rows[i])
        .collect()
}

/// Forward/backward over one set of micro-batches, leaving summed gradients
/// on the parameters. Per-sample losses are weighted by their counted
/// positions so the result equals the mean over every non-ignored position
/// of the whole step, independent of how the step is split into
/// micro-batches. Returns that mean loss.
pub fn accumulate_gradients(
    params: &ModelParams<f32>,
    batches: &[Batch],
    cfg: &TrainConfig,
    step: u64,
) -> Result<f32, Error> {
    let counts: Vec<Vec<usize>> = batches
        .iter()
        .map(|b| {
            b.loss_mask
                .iter()
                .map(|m| m.iter().filter(|&&x| x).count())
                .collect()
        })
        .collect();
    let total: usize = counts.iter().flatten().sum();
    if total == 0 {
        return Err(Error::data("step contains no loss-bearing positions"));
    }

    let mut step_loss = 0.0f64;
    for (mi, batch) in batches.iter().enumerate() {
        let tape = Tape::new();
        let mut dropout_rng = rng::derive(
            cfg.seed,
            rng::STREAM_DROPOUT,
            step * cfg.grad_accum as u64 + mi as u64,
        );
        let mut micro_loss = None;
        for (si, tokens) in batch.tokens.iter().enumerate() {
            let spec = ContextSpec {
                numeric: batch.numeric[si].clone(),
                fragment: batch.fragments.as_ref().map(|f| f[si].clone()),
            };
            let assembled = assemble_input(&tape, &spec, tokens, params)?;
            let logits = forward(
                &tape,
                params,
                &assembled.input,
                &assembled.positions,
                Mode::Train,
                Some(&mut dropout_rng),
            )?;
            let ce = tape.cross_entropy(&logits, &assembled.targets, IGNORE_ID)?;
            debug_assert_eq!(ce.counted, counts[mi][si]);
            if ce.counted == 0 {
                continue;
            }
            let weight = ce.counted as f32 / total as f32;
            let scaled = tape.scale(&ce.loss, weight);
            micro_loss = Some(match micro_loss {
                None => scaled,
                Some(acc) => tape.add(&acc, &scaled)?,
            });
        }
        if let Some(loss) = micro_loss {
            let value = loss.item();
            if !value.is_finite() {
                return Err(Error::NonFiniteLoss {
                    step,
                    detail: format!("micro-batch {mi} produced loss {value}"),
                });
            }
            step_loss += value as f64;
            tape.backward(&loss)?;
        }
    }
    Ok(step_loss as f32)
}

fn clip_gradients(params: &ModelParams<f32>, max_norm: f32) {
    let all = params.all();
    let mut sq = 0.0f64;
    for t in &all {
        if let Some(g) = t.grad() {
            sq += g.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>();
        }
    }
    let norm = sq.sqrt() as f32;
    if norm > max_norm && norm > 0.0 {
        let scale = max_norm / norm;
        for t in &all {
            if let Some(g) = t.grad() {
                t.zero_grad();
                let scaled: Vec<f32> = g.iter().map(|&v| v * scale).collect();
                t.accumulate_grad(&scaled);
            }
        }
    }
}

/// One optimizer step over pre-built micro-batches.
pub fn train_step(
    params: &ModelParams<f32>,
    adam: &mut AdamState<f32>,
    batches: &[Batch],
    cfg: &TrainConfig,
    step: u64,
) -> Result<f32, Error> {
    let loss = accumulate_gradients(params, batches, cfg, step)?;
    if let Some(clip) = cfg.grad_clip {
        clip_gradients(params, clip);
    }
    adam.step(&params.all())?;
    Ok(loss)
}

/// Builds the micro-batches of one step from the deterministic schedule.
pub fn batches_for_step(
    rows: &[EncodedRow],
    params: &ModelParams<f32>,
    cfg: &TrainConfig,
    step: u64,
) -> Vec<Batch> {
    (0..cfg.grad_accum as u64)
        .map(|j| {
            let micro = step * cfg.grad_accum as u64 + j;
            let selected = micro_batch_rows(rows, cfg.batch_size, cfg.seed, micro);
            let mut batch_rng = rng::derive(cfg.seed, rng::STREAM_BATCH, micro);
            make_batch(
                &selected,
                params.config.n_numeric_conditions,
                cfg.p_del,
                params.config.fragment_cap,
                &mut batch_rng,
            )
        })
        .collect()
}

/// Mean held-out loss with dropout disabled: full numeric conditions, no
/// fragment, no deletion.
pub fn eval_loss(
    params: &ModelParams<f32>,
    rows: &[EncodedRow],
    cap: usize,
) -> Result<f32, Error> {
    let n = rows.len().min(cap.max(1));
    let mut sum = 0.0f64;
    let mut total = 0usize;
    for row in &rows[..n] {
        let tape = Tape::eval();
        let numeric = (0..params.config.n_numeric_conditions)
            .map(|id| NumericCondition {
                property_id: id,
                value: row.props[id] as f64,
            })
            .collect();
        let spec = ContextSpec::new(numeric, None)?;
        let tokens = frame(&row.token_ids, row.token_ids.len() + 2);
        let assembled = assemble_input(&tape, &spec, &tokens, params)?;
        let logits = forward(
            &tape,
            params,
            &assembled.input,
            &assembled.positions,
            Mode::Eval,
            None,
        )?;
        let ce = tape.cross_entropy(&logits, &assembled.targets, IGNORE_ID)?;
        sum += ce.loss.item() as f64 * ce.counted as f64;
        total += ce.counted;
    }
    if total == 0 {
        return Err(Error::data("no loss-bearing positions in evaluation set"));
    }
    Ok((sum / total as f64) as f32)
}

/// Runs steps `start_step..max_steps` with periodic evaluation and
/// checkpointing; constant learning rate throughout. Returns the metrics
/// log rows produced by this run.
pub fn train_loop(
    params: &ModelParams<f32>,
    adam: &mut AdamState<f32>,
    start_step: u64,
    train_rows: &[EncodedRow],
    test_rows: &[EncodedRow],
    opts: &TrainOptions,
) -> Result<Vec<MetricsRow>, Error> {
    let cfg = &opts.config;
    cfg.check()?;
    if train_rows.is_empty() {
        return Err(Error::data("empty training set"));
    }
    let mut metrics = Vec::new();
    let mut recent_loss = f32::NAN;
    for step in start_step..cfg.max_steps {
        let batches = batches_for_step(train_rows, params, cfg, step);
        recent_loss = train_step(params, adam, &batches, cfg, step)?;
        let done = step + 1;
        if done % cfg.eval_interval == 0 || done == cfg.max_steps {
            let test_loss = if test_rows.is_empty() {
                f32::NAN
            } else {
                eval_loss(params, test_rows, 256)?
            };
            metrics.push(MetricsRow {
                step: done,
                train_loss: recent_loss,
                test_loss,
            });
            if opts.verbose {
                eprintln!("step {done}: train loss {recent_loss:.4}, test loss {test_loss:.4}");
            }
            if let Some(path) = &opts.checkpoint_path {
                save_checkpoint(path, params, Some(adam), done, cfg.seed)?;
            }
            if let Some(path) = &opts.metrics_path {
                write_metrics(path, &metrics)?;
            }
        }
    }
    let _ = recent_loss;
    Ok(metrics)
}

fn write_metrics(path: &PathBuf, rows: &[MetricsRow]) -> Result<(), Error> {
    let mut text = String::from("step,train_loss,test_loss\n");
    for r in rows {
        text.push_str(&format!("{},{},{}\n", r.step, r.train_loss, r.test_loss));
    }
    let tmp = path.with_extension("csv.tmp");
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
