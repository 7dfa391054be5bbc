//! Token dictionary for the classifier input: an indexed vocabulary built
//! from training text plus fixed special tokens for padding, separators, and
//! the corrector's discretized hyperparameters.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corrector::Selector;
use crate::dataset::{threshold_index, CorrectionCandidate};
use crate::phonetics::Representation;

pub const PAD: usize = 0;
pub const UNK: usize = 1;
pub const SEP: usize = 2;
/// THR_01..THR_12 occupy 3..=14.
const THR_BASE: usize = 2;
/// REP_PLAIN, REP_IPA, REP_WBET occupy 15..=17.
const REP_BASE: usize = 15;
/// SEL_WIN, SEL_LET occupy 18..=19.
const SEL_BASE: usize = 18;
/// First index available to corpus tokens.
const FIRST_WORD: usize = 20;

pub fn threshold_token(threshold: f64) -> usize {
    THR_BASE + threshold_index(threshold)
}

pub fn rep_token(rep: Representation) -> usize {
    match rep {
        Representation::Plain => REP_BASE,
        Representation::Ipa => REP_BASE + 1,
        Representation::Wbet => REP_BASE + 2,
    }
}

pub fn selector_token(selector: Selector) -> usize {
    match selector {
        Selector::Win => SEL_BASE,
        Selector::Let => SEL_BASE + 1,
    }
}

/// Dense, stable token→index map. Indices 0..19 are reserved; corpus tokens
/// are assigned from 20 upward in sorted order, so the mapping depends only
/// on the token set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    words: BTreeMap<String, usize>,
}

impl Vocabulary {
    /// Collect every token of the source hypotheses and candidate strings.
    pub fn build(training: &[CorrectionCandidate]) -> Self {
        let mut tokens: Vec<&str> = training
            .iter()
            .flat_map(|c| {
                c.hypothesis()
                    .split_whitespace()
                    .chain(c.candidate.split_whitespace())
            })
            .collect();
        tokens.sort_unstable();
        tokens.dedup();
        let words = tokens
            .into_iter()
            .enumerate()
            .map(|(i, t)| (t.to_string(), FIRST_WORD + i))
            .collect();
        Vocabulary { words }
    }

    /// Total index space (reserved slots included).
    pub fn len(&self) -> usize {
        FIRST_WORD + self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index(&self, token: &str) -> usize {
        self.words.get(token).copied().unwrap_or(UNK)
    }
}

/// Encode one candidate as a fixed-length index sequence:
/// hypothesis ++ SEP ++ candidate ++ SEP ++ THR/REP/SEL tokens, right-padded
/// with PAD. When the sequence overflows, hypothesis tokens are dropped from
/// the left first (then candidate tokens), so the candidate portion and the
/// config tokens survive.
pub fn encode(
    candidate: &CorrectionCandidate,
    vocab: &Vocabulary,
    max_seq_len: usize,
) -> Vec<usize> {
    encode_parts(
        candidate.hypothesis(),
        &candidate.candidate,
        &candidate.cfg,
        vocab,
        max_seq_len,
    )
}

/// [`encode`] for a bare (hypothesis, candidate, config) triple, which is all
/// the classifier sees; a reference transcript is not required.
pub fn encode_parts(
    hypothesis: &str,
    candidate: &str,
    cfg: &crate::corrector::PhocoConfig,
    vocab: &Vocabulary,
    max_seq_len: usize,
) -> Vec<usize> {
    assert!(max_seq_len >= 5, "max_seq_len must fit SEP SEP THR REP SEL");
    let mut hyp: Vec<usize> = hypothesis
        .split_whitespace()
        .map(|t| vocab.index(t))
        .collect();
    let mut cand: Vec<usize> = candidate
        .split_whitespace()
        .map(|t| vocab.index(t))
        .collect();

    let fixed = 5; // two separators plus the three config tokens
    let overflow = (hyp.len() + cand.len() + fixed).saturating_sub(max_seq_len);
    if overflow > 0 {
        let from_hyp = overflow.min(hyp.len());
        hyp.drain(..from_hyp);
        let from_cand = (overflow - from_hyp).min(cand.len());
        cand.drain(..from_cand);
    }

    let mut seq = Vec::with_capacity(max_seq_len);
    seq.extend(hyp);
    seq.push(SEP);
    seq.extend(cand);
    seq.push(SEP);
    seq.push(threshold_token(cfg.threshold));
    seq.push(rep_token(cfg.rep));
    seq.push(selector_token(cfg.selector));
    seq.resize(max_seq_len, PAD);
    seq
}
