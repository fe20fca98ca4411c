//! Batch construction: framing, padding, loss masks, stochastic context
//! deletion, and fragment-span draws.

use rand_chacha::ChaCha8Rng;
use smiles::{CLS_ID, PAD_ID, SEP_ID};

use crate::context::{
    sample_fragment_span, scl_apply, ConditionTemplate, FragmentCondition, NumericCondition,
};
use crate::dataset::EncodedRow;

/// One training micro-batch. Token rows are framed `[CLS] … [SEP]` and
/// padded with `[PAD]` to the longest sample; the loss mask marks positions
/// whose next-token target is a real SMILES-region token.
#[derive(Debug, Clone)]
pub struct Batch {
    pub tokens: Vec<Vec<u32>>,
    /// Per sample: surviving numeric conditions with this sample's values.
    pub numeric: Vec<Vec<NumericCondition>>,
    /// Per sample fragment span, present when the template kept the
    /// fragment condition.
    pub fragments: Option<Vec<FragmentCondition>>,
    pub loss_mask: Vec<Vec<bool>>,
    pub template: ConditionTemplate,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn l_max(&self) -> usize {
        self.tokens.first().map_or(0, Vec::len)
    }
}

/// Frames a raw token sequence as `[CLS] … [SEP]` plus `[PAD]` up to
/// `l_max` (framed length).
pub fn frame(raw: &[u32], l_max: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(l_max);
    out.push(CLS_ID);
    out.extend_from_slice(raw);
    out.push(SEP_ID);
    debug_assert!(out.len() <= l_max);
    out.resize(l_max, PAD_ID);
    out
}

/// Builds one batch from dataset rows: applies stochastic context deletion
/// to the registered-condition template, draws per-sample fragment spans
/// when the fragment survives, pads, and masks.
pub fn make_batch(
    rows: &[&EncodedRow],
    n_conditions: usize,
    p_del: f64,
    fragment_cap: usize,
    rng: &mut ChaCha8Rng,
) -> Batch {
    assert!(!rows.is_empty());
    let template = scl_apply(&ConditionTemplate::all(n_conditions), p_del, rng);

    let fragments = template.fragment_present.then(|| {
        rows.iter()
            .map(|r| sample_fragment_span(&r.token_ids, rng, fragment_cap))
            .collect::<Vec<_>>()
    });

    let l_max = rows.iter().map(|r| r.token_ids.len() + 2).max().unwrap();
    let tokens: Vec<Vec<u32>> = rows.iter().map(|r| frame(&r.token_ids, l_max)).collect();
    let loss_mask = tokens
        .iter()
        .map(|row| {
            (0..l_max)
                .map(|i| i + 1 < l_max && row[i + 1] != PAD_ID)
                .collect()
        })
        .collect();

    let numeric = rows
        .iter()
        .map(|r| {
            template
                .numeric_present
                .iter()
                .enumerate()
                .filter(|(_, &present)| present)
                .map(|(id, _)| NumericCondition {
                    property_id: id,
                    value: r.props[id] as f64,
                })
                .collect()
        })
        .collect();

    Batch {
        tokens,
        numeric,
        fragments,
        loss_mask,
        template,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn row(ids: &[u32], w: f32) -> EncodedRow {
        EncodedRow {
            token_ids: ids.to_vec(),
            props: vec![w],
        }
    }

    #[test]
    fn equal_length_rows_have_no_padding() {
        let rows = [row(&[4, 5, 6], 1.0), row(&[7, 8, 9], 2.0)];
        let refs: Vec<&EncodedRow> = rows.iter().collect();
        let mut rng = rng::derive(0, rng::STREAM_BATCH, 0);
        let b = make_batch(&refs, 1, 0.0, 50, &mut rng);
        assert!(b.tokens.iter().all(|r| !r.contains(&PAD_ID)));
        assert_eq!(b.l_max(), 5);
    }

    #[test]
    fn every_row_ends_real_content_with_sep() {
        let rows = [row(&[4], 1.0), row(&[5, 6, 7, 8], 2.0)];
        let refs: Vec<&EncodedRow> = rows.iter().collect();
        let mut rng = rng::derive(1, rng::STREAM_BATCH, 0);
        let b = make_batch(&refs, 1, 0.15, 50, &mut rng);
        for toks in &b.tokens {
            let last_real = toks.iter().rposition(|&t| t != PAD_ID).unwrap();
            assert_eq!(toks[last_real], SEP_ID);
            assert_eq!(toks[0], CLS_ID);
        }
    }

    #[test]
    fn mask_never_covers_pad_targets() {
        let rows = [row(&[4], 1.0), row(&[5, 6, 7, 8], 2.0)];
        let refs: Vec<&EncodedRow> = rows.iter().collect();
        let mut rng = rng::derive(2, rng::STREAM_BATCH, 0);
        let b = make_batch(&refs, 1, 0.0, 50, &mut rng);
        for (toks, mask) in b.tokens.iter().zip(&b.loss_mask) {
            for i in 0..toks.len() {
                if mask[i] {
                    assert_ne!(toks[i + 1], PAD_ID);
                }
            }
            // Row mask sum is the number of real prediction targets:
            // raw tokens plus the SEP.
            let real: usize = toks.iter().filter(|&&t| t != PAD_ID).count();
            let sum: usize = mask.iter().filter(|&&m| m).count();
            assert_eq!(sum, real - 1);
        }
    }

    #[test]
    fn deletion_is_batch_global() {
        let rows: Vec<EncodedRow> = (0..64)
            .map(|i| EncodedRow {
                token_ids: vec![4 + i % 3, 5],
                props: vec![1.0, 2.0, 3.0],
            })
            .collect();
        let refs: Vec<&EncodedRow> = rows.iter().collect();
        for i in 0..200u64 {
            let mut rng = rng::derive(3, rng::STREAM_BATCH, i);
            let b = make_batch(&refs, 3, 0.5, 50, &mut rng);
            // Every sample carries exactly the surviving conditions.
            let survivors: Vec<usize> = b
                .template
                .numeric_present
                .iter()
                .enumerate()
                .filter(|(_, &p)| p)
                .map(|(i, _)| i)
                .collect();
            for sample in &b.numeric {
                let ids: Vec<usize> = sample.iter().map(|c| c.property_id).collect();
                assert_eq!(ids, survivors);
            }
            match (&b.fragments, b.template.fragment_present) {
                (Some(f), true) => assert_eq!(f.len(), rows.len()),
                (None, false) => {}
                _ => panic!("fragment presence inconsistent"),
            }
        }
    }
}
