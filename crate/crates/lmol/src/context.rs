//! Condition encoding, input assembly, and stochastic context deletion.
//!
//! The model input is the context rows (numeric conditions first, then the
//! fragment token rows) followed by the embedded SMILES. The loss only ever
//! covers SMILES-region targets.

use numcore::{Real, Tape, Tensor};
use rand::Rng;
use smiles::PAD_ID;

use crate::error::Error;
use crate::params::ModelParams;

/// Target id marking positions excluded from the loss.
pub const IGNORE_ID: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericCondition {
    pub property_id: usize,
    /// Value in property units (molecular weight arrives pre-scaled by
    /// 1/100 from the data pipeline).
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragmentCondition {
    pub token_ids: Vec<u32>,
}

impl FragmentCondition {
    pub fn new(token_ids: Vec<u32>, cap: usize) -> Result<Self, Error> {
        if token_ids.is_empty() {
            return Err(Error::length("fragment must hold at least one token"));
        }
        if token_ids.len() > cap {
            return Err(Error::length(format!(
                "fragment of {} tokens exceeds the cap of {cap}",
                token_ids.len()
            )));
        }
        Ok(FragmentCondition { token_ids })
    }

    pub fn len(&self) -> usize {
        self.token_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.token_ids.is_empty()
    }
}

/// An ordered, possibly empty set of numeric conditions plus an optional
/// fragment. Property ids are kept strictly increasing.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContextSpec {
    pub numeric: Vec<NumericCondition>,
    pub fragment: Option<FragmentCondition>,
}

impl ContextSpec {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(
        mut numeric: Vec<NumericCondition>,
        fragment: Option<FragmentCondition>,
    ) -> Result<Self, Error> {
        numeric.sort_by_key(|c| c.property_id);
        for pair in numeric.windows(2) {
            if pair[0].property_id == pair[1].property_id {
                return Err(Error::config(format!(
                    "duplicate numeric condition id {}",
                    pair[0].property_id
                )));
            }
        }
        Ok(ContextSpec { numeric, fragment })
    }

    pub fn is_unconditional(&self) -> bool {
        self.numeric.is_empty() && self.fragment.is_none()
    }

    pub fn context_len(&self) -> usize {
        self.numeric.len() + self.fragment.as_ref().map_or(0, FragmentCondition::len)
    }
}

/// Encodes one numeric condition: `value * w_p + b_p + tau_p`.
pub fn encode_numeric<R: Real>(
    tape: &Tape<R>,
    c: &NumericCondition,
    params: &ModelParams<R>,
) -> Result<Tensor<R>, Error> {
    let p = params
        .cond
        .numeric
        .get(c.property_id)
        .ok_or_else(|| Error::config(format!("unknown property id {}", c.property_id)))?;
    let scaled = tape.scale(&p.w, R::from_f64(c.value));
    let with_bias = tape.add(&scaled, &p.b)?;
    Ok(tape.add(&with_bias, &p.tau)?)
}

/// Encodes a fragment: shared token embeddings plus the fragment-specific
/// table, plus the broadcast label vector.
pub fn encode_fragment<R: Real>(
    tape: &Tape<R>,
    f: &FragmentCondition,
    params: &ModelParams<R>,
) -> Result<Tensor<R>, Error> {
    if f.len() > params.config.fragment_cap {
        return Err(Error::length(format!(
            "fragment of {} tokens exceeds the cap of {}",
            f.len(),
            params.config.fragment_cap
        )));
    }
    let tok = tape.embedding(&params.tok_emb, &f.token_ids)?;
    let frag = tape.embedding(&params.cond.frag_emb, &f.token_ids)?;
    let summed = tape.add(&tok, &frag)?;
    Ok(tape.add_row_vec(&summed, &params.cond.frag_label)?)
}

/// A fully assembled model input for one sequence.
pub struct Assembled<R: Real> {
    /// `(context + smiles) × d_emb` embedding rows.
    pub input: Tensor<R>,
    /// RoPE positions `0..total`.
    pub positions: Vec<usize>,
    pub context_len: usize,
    /// Per-position next-token targets; `IGNORE_ID` outside the SMILES
    /// region and at `[PAD]` targets.
    pub targets: Vec<u32>,
    /// True exactly where `targets` is a real SMILES-region token.
    pub loss_mask: Vec<bool>,
}

/// Builds embedding rows `numeric ++ fragment ++ smiles` with the loss mask
/// over SMILES-region prediction targets. `smiles_ids` must arrive framed
/// `[CLS] … [SEP]` (plus optional `[PAD]` tail).
pub fn assemble_input<R: Real>(
    tape: &Tape<R>,
    spec: &ContextSpec,
    smiles_ids: &[u32],
    params: &ModelParams<R>,
) -> Result<Assembled<R>, Error> {
    if smiles_ids.is_empty() {
        return Err(Error::length("empty SMILES token sequence"));
    }
    if smiles_ids.len() > params.config.max_seq_len + 2 {
        return Err(Error::length(format!(
            "SMILES region of {} tokens exceeds the limit of {}",
            smiles_ids.len(),
            params.config.max_seq_len + 2
        )));
    }
    let mut parts: Vec<Tensor<R>> = Vec::with_capacity(spec.numeric.len() + 2);
    for c in &spec.numeric {
        parts.push(encode_numeric(tape, c, params)?);
    }
    if let Some(f) = &spec.fragment {
        parts.push(encode_fragment(tape, f, params)?);
    }
    parts.push(tape.embedding(&params.tok_emb, smiles_ids)?);
    let input = tape.concat_rows(&parts)?;

    let ctx_len = spec.context_len();
    let total = ctx_len + smiles_ids.len();
    let positions: Vec<usize> = (0..total).collect();

    let mut targets = vec![IGNORE_ID; total];
    let mut loss_mask = vec![false; total];
    for i in ctx_len..total.saturating_sub(1) {
        let next = smiles_ids[i + 1 - ctx_len];
        if next != PAD_ID {
            targets[i] = next;
            loss_mask[i] = true;
        }
    }
    Ok(Assembled {
        input,
        positions,
        context_len: ctx_len,
        targets,
        loss_mask,
    })
}

/// Which of the registered conditions a batch carries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionTemplate {
    pub numeric_present: Vec<bool>,
    pub fragment_present: bool,
}

impl ConditionTemplate {
    pub fn all(n_numeric: usize) -> Self {
        ConditionTemplate {
            numeric_present: vec![true; n_numeric],
            fragment_present: true,
        }
    }

    pub fn none(n_numeric: usize) -> Self {
        ConditionTemplate {
            numeric_present: vec![false; n_numeric],
            fragment_present: false,
        }
    }

    pub fn is_unconditional(&self) -> bool {
        !self.fragment_present && self.numeric_present.iter().all(|&p| !p)
    }
}

/// Stochastic context deletion for one batch: every numeric condition gets
/// one Bernoulli(p_del) draw deciding deletion for the whole batch, then one
/// further draw for the entire fragment. Surviving conditions keep their
/// canonical order; deleting everything leaves the batch unconditional.
pub fn scl_apply(
    template: &ConditionTemplate,
    p_del: f64,
    rng: &mut impl Rng,
) -> ConditionTemplate {
    let numeric_present = template
        .numeric_present
        .iter()
        .map(|&present| {
            let delete = rng.random::<f64>() < p_del;
            present && !delete
        })
        .collect();
    let delete_fragment = rng.random::<f64>() < p_del;
    ConditionTemplate {
        numeric_present,
        fragment_present: template.fragment_present && !delete_fragment,
    }
}

/// Draws a contiguous fragment span from raw (unframed) SMILES tokens:
/// start uniform over the sequence, end uniform above the start, truncated
/// to `cap`.
pub fn sample_fragment_span(
    smiles_ids: &[u32],
    rng: &mut impl Rng,
    cap: usize,
) -> FragmentCondition {
    assert!(!smiles_ids.is_empty(), "SMILES region must be non-empty");
    let len = smiles_ids.len();
    let start = rng.random_range(0..len);
    let end = rng.random_range(start + 1..=len);
    let end = end.min(start + cap);
    FragmentCondition {
        token_ids: smiles_ids[start..end].to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ModelConfig;
    use crate::rng;
    use smiles::{CLS_ID, SEP_ID};

    fn test_params() -> ModelParams<f64> {
        let config = ModelConfig {
            d_emb: 8,
            n_heads: 2,
            n_layers: 1,
            d_ffn: 16,
            d_voc: 12,
            max_seq_len: 32,
            dropout_p: 0.0,
            n_numeric_conditions: 2,
            fragment_cap: 50,
            rope_base: 10000,
        };
        ModelParams::init(
            config,
            &["alpha".into(), "beta".into()],
            &mut rng::derive(3, rng::STREAM_INIT, 0),
        )
        .unwrap()
    }

    #[test]
    fn numeric_encoding_is_affine() {
        let params = test_params();
        let tape = Tape::eval();
        let at = |v: f64| {
            encode_numeric(
                &tape,
                &NumericCondition {
                    property_id: 0,
                    value: v,
                },
                &params,
            )
            .unwrap()
            .to_vec()
        };
        // value 0 → b + tau
        let zero = at(0.0);
        let b = params.cond.numeric[0].b.to_vec();
        let tau = params.cond.numeric[0].tau.to_vec();
        for i in 0..zero.len() {
            assert!((zero[i] - (b[i] + tau[i])).abs() < 1e-12);
        }
        // encode(v1) − encode(v2) = (v1 − v2) · w exactly (f64 here)
        let (v1, v2) = (1.75, -0.5);
        let (e1, e2) = (at(v1), at(v2));
        let w = params.cond.numeric[0].w.to_vec();
        for i in 0..e1.len() {
            assert!((e1[i] - e2[i] - (v1 - v2) * w[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn distinct_property_ids_differ() {
        let params = test_params();
        let tape = Tape::eval();
        let a = encode_numeric(&tape, &NumericCondition { property_id: 0, value: 1.0 }, &params)
            .unwrap()
            .to_vec();
        let b = encode_numeric(&tape, &NumericCondition { property_id: 1, value: 1.0 }, &params)
            .unwrap()
            .to_vec();
        assert_ne!(a, b);
    }

    #[test]
    fn unknown_property_is_a_config_error() {
        let params = test_params();
        let tape = Tape::eval();
        let r = encode_numeric(&tape, &NumericCondition { property_id: 9, value: 1.0 }, &params);
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn fragment_rows_reduce_to_token_embeddings_when_zeroed() {
        let params = test_params();
        params
            .cond
            .frag_emb
            .set_data(&vec![0.0; params.cond.frag_emb.numel()]);
        params
            .cond
            .frag_label
            .set_data(&vec![0.0; params.cond.frag_label.numel()]);
        let tape = Tape::eval();
        let f = FragmentCondition::new(vec![4, 5, 4], 50).unwrap();
        let rows = encode_fragment(&tape, &f, &params).unwrap();
        let plain = tape.embedding(&params.tok_emb, &f.token_ids).unwrap();
        assert_eq!(rows.to_vec(), plain.to_vec());
        assert_eq!(rows.shape(), vec![3, 8]);
        // Same token at two positions gives identical rows pre-RoPE.
        let data = rows.to_vec();
        assert_eq!(data[0..8], data[16..24]);
    }

    #[test]
    fn assembled_layout_and_mask() {
        let params = test_params();
        let tape = Tape::eval();
        let spec = ContextSpec::new(
            vec![
                NumericCondition { property_id: 0, value: 0.5 },
                NumericCondition { property_id: 1, value: 2.0 },
            ],
            Some(FragmentCondition::new(vec![4, 5], 50).unwrap()),
        )
        .unwrap();
        let smiles = vec![CLS_ID, 4, 5, 6, SEP_ID, PAD_ID, PAD_ID];
        let a = assemble_input(&tape, &spec, &smiles, &params).unwrap();
        assert_eq!(a.context_len, 4);
        assert_eq!(a.input.shape(), vec![4 + 7, 8]);
        assert_eq!(a.positions, (0..11).collect::<Vec<_>>());
        // Mask: positions 4..=7 predict tokens 4,5,6,SEP; pads excluded.
        let expect_mask = vec![
            false, false, false, false, true, true, true, true, false, false, false,
        ];
        assert_eq!(a.loss_mask, expect_mask);
        assert_eq!(a.targets[4], 4);
        assert_eq!(a.targets[7], SEP_ID);
        assert_eq!(a.targets[8], IGNORE_ID);
        let mask_sum = a.loss_mask.iter().filter(|&&m| m).count();
        assert_eq!(mask_sum, 4);
    }

    #[test]
    fn empty_spec_is_the_plain_sequence() {
        let params = test_params();
        let tape = Tape::eval();
        let smiles = vec![CLS_ID, 4, SEP_ID];
        let a = assemble_input(&tape, &ContextSpec::empty(), &smiles, &params).unwrap();
        let plain = tape.embedding(&params.tok_emb, &smiles).unwrap();
        assert_eq!(a.input.to_vec(), plain.to_vec());
        assert_eq!(a.context_len, 0);
        assert_eq!(a.loss_mask, vec![true, true, false]);
    }

    #[test]
    fn scl_extremes() {
        let template = ConditionTemplate::all(3);
        let mut rng = rng::derive(0, rng::STREAM_BATCH, 0);
        let kept = scl_apply(&template, 0.0, &mut rng);
        assert_eq!(kept, template);
        let dropped = scl_apply(&template, 1.0, &mut rng);
        assert!(dropped.is_unconditional());
    }

    #[test]
    fn scl_retention_statistics() {
        let template = ConditionTemplate::all(3);
        let trials = 10_000;
        let mut counts = [0u32; 4];
        for i in 0..trials {
            let mut rng = rng::derive(11, rng::STREAM_BATCH, i);
            let t = scl_apply(&template, 0.15, &mut rng);
            for (j, &p) in t.numeric_present.iter().enumerate() {
                if p {
                    counts[j] += 1;
                }
            }
            if t.fragment_present {
                counts[3] += 1;
            }
        }
        let expected = 8500.0;
        let tol = 3.0 * (10_000.0f64 * 0.15 * 0.85).sqrt();
        for (j, &c) in counts.iter().enumerate() {
            assert!(
                (c as f64 - expected).abs() <= tol,
                "condition {j} retained {c} times, outside {expected} ± {tol:.1}"
            );
        }
    }

    #[test]
    fn fragment_span_properties() {
        let ids: Vec<u32> = (4..64).collect();
        for i in 0..10_000u64 {
            let mut rng = rng::derive(5, rng::STREAM_BATCH, i);
            let f = sample_fragment_span(&ids, &mut rng, 50);
            assert!(!f.token_ids.is_empty());
            assert!(f.token_ids.len() <= 50.min(ids.len()));
            // Contiguity: consecutive values in the source are consecutive
            // here too.
            let start = f.token_ids[0] as usize - 4;
            assert_eq!(
                f.token_ids,
                ids[start..start + f.token_ids.len()].to_vec()
            );
        }
        // Single-token input always yields that token.
        let mut rng = rng::derive(5, rng::STREAM_BATCH, 0);
        let f = sample_fragment_span(&[9], &mut rng, 50);
        assert_eq!(f.token_ids, vec![9]);
    }

    #[test]
    fn deleting_one_condition_leaves_others_bitwise_equal() {
        let params = test_params();
        let tape = Tape::eval();
        let c0 = NumericCondition { property_id: 0, value: 0.7 };
        let both = ContextSpec::new(
            vec![c0, NumericCondition { property_id: 1, value: 1.1 }],
            None,
        )
        .unwrap();
        let only0 = ContextSpec::new(vec![c0], None).unwrap();
        let row_both = encode_numeric(&tape, &both.numeric[0], &params).unwrap();
        let row_only = encode_numeric(&tape, &only0.numeric[0], &params).unwrap();
        assert_eq!(row_both.to_vec(), row_only.to_vec());
    }
}
