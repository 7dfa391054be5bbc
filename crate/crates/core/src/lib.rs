//! Post-correction for closed-domain ASR transcripts.
//!
//! The pipeline has two halves. A phonetic corrector scans a normalized
//! transcript for segments that sound like phrases from a domain lexicon (the
//! *context*) and proposes replacements under a Levenshtein-based similarity
//! threshold. A small recurrent binary classifier (the *gate*) is trained on
//! labeled correction candidates and decides, per proposal, whether applying
//! it would actually lower the word error rate. The hybrid corrector applies
//! a proposal only when the gate agrees.
//!
//! Modules follow the data flow: [`normalizer`] → [`phonetics`] →
//! [`corrector`], with [`distance`] underneath; [`dataset`] builds labeled
//! corpora, [`gate`] trains and evaluates the classifier, and [`hybrid`]
//! combines both halves and produces the evaluation report.

pub mod corrector;
pub mod dataset;
pub mod distance;
mod error;
pub mod gate;
pub mod hybrid;
pub mod normalizer;
pub mod phonetics;

pub use corrector::{correct, Context, PhocoConfig, Replacement, Selector};
pub use distance::{levenshtein, normalized_distance, wer, WerBreakdown};
pub use error::{Error, Result};
pub use normalizer::{normalize, number_to_words, NormRules};
pub use phonetics::{phonemize, G2pRuleTable, G2pTables, Representation};
