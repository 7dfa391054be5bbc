//! The phonetic corrector: finds in-context replacement candidates whose
//! phonetic distance to a transcript segment falls under a similarity
//! threshold, using either a token sliding window (Win) or incremental
//! character growth (Let), then applies the best non-overlapping set.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distance::normalized_distance;
use crate::error::{Error, Result};
use crate::phonetics::{phonemize, G2pTables, Representation};

/// Candidate-extraction strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selector {
    Win,
    Let,
}

impl Selector {
    pub const ALL: [Selector; 2] = [Selector::Win, Selector::Let];

    pub fn as_str(self) -> &'static str {
        match self {
            Selector::Win => "win",
            Selector::Let => "let",
        }
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Selector {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "win" => Ok(Selector::Win),
            "let" => Ok(Selector::Let),
            other => Err(format!("unknown selector {other:?} (win|let)")),
        }
    }
}

/// The corrector's hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhocoConfig {
    pub threshold: f64,
    pub rep: Representation,
    pub selector: Selector,
}

impl PhocoConfig {
    pub fn new(threshold: f64, rep: Representation, selector: Selector) -> Result<Self> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::InvalidThreshold(threshold));
        }
        Ok(PhocoConfig {
            threshold,
            rep,
            selector,
        })
    }
}

#[derive(Debug, Clone)]
struct ContextPhrase {
    text: String,
    token_count: usize,
    /// Phonetic form per representation, spaces preserved.
    phonetic: [String; 3],
}

impl ContextPhrase {
    fn phonetic(&self, rep: Representation) -> &str {
        match rep {
            Representation::Plain => &self.phonetic[0],
            Representation::Ipa => &self.phonetic[1],
            Representation::Wbet => &self.phonetic[2],
        }
    }
}

/// The domain lexicon: common words and phrases eligible as replacements,
/// with their phonetic forms precomputed for every representation.
#[derive(Debug, Clone)]
pub struct Context {
    phrases: Vec<ContextPhrase>,
}

impl Context {
    /// Build from normalized phrases. Phrases must be non-empty and already
    /// in normalizer output form.
    pub fn new<S: AsRef<str>>(phrases: &[S], tables: &G2pTables) -> Result<Self> {
        let mut out = Vec::with_capacity(phrases.len());
        for phrase in phrases {
            let text = phrase.as_ref();
            let renorm = crate::normalizer::normalize(text, &crate::normalizer::NormRules::empty());
            if text.is_empty() || renorm != text {
                return Err(Error::RulesFormat {
                    path: Path::new("<context>").to_path_buf(),
                    line: out.len() + 1,
                    msg: format!("context phrase {text:?} is not normalized text"),
                });
            }
            out.push(ContextPhrase {
                text: text.to_string(),
                token_count: text.split(' ').count(),
                phonetic: [
                    phonemize(text, Representation::Plain, tables)?,
                    phonemize(text, Representation::Ipa, tables)?,
                    phonemize(text, Representation::Wbet, tables)?,
                ],
            });
        }
        Ok(Context { phrases: out })
    }

    /// Load a context file: one normalized phrase per line, `#` comments.
    pub fn from_file(path: impl AsRef<Path>, tables: &G2pTables) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let phrases: Vec<&str> = text
            .lines()
            .map(|l| l.trim_end_matches('\r'))
            .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
            .collect();
        Self::new(&phrases, tables)
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn phrases(&self) -> impl Iterator<Item = &str> {
        self.phrases.iter().map(|p| p.text.as_str())
    }
}

/// A scored span: hypothesis tokens `[start_token, end_token)` matched a
/// context phrase at the given normalized phonetic distance.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredCandidate {
    pub start_token: usize,
    pub end_token: usize,
    pub phrase: String,
    pub distance: f64,
}

/// An accepted, non-overlapping substitution.
#[derive(Debug, Clone, PartialEq)]
pub struct Replacement {
    pub start_token: usize,
    pub end_token: usize,
    pub phrase: String,
    pub distance: f64,
}

/// A tokenized hypothesis with its per-token phonetic forms.
struct PreparedHyp<'a> {
    tokens: Vec<&'a str>,
    phon_tokens: Vec<String>,
    /// Character count per raw token.
    token_chars: Vec<usize>,
}

impl<'a> PreparedHyp<'a> {
    fn new(hypothesis: &'a str, rep: Representation, tables: &G2pTables) -> Result<Self> {
        let tokens: Vec<&str> = hypothesis.split_whitespace().collect();
        let mut phon_tokens = Vec::with_capacity(tokens.len());
        for t in &tokens {
            phon_tokens.push(phonemize(t, rep, tables)?);
        }
        let token_chars = tokens.iter().map(|t| t.chars().count()).collect();
        Ok(PreparedHyp {
            tokens,
            phon_tokens,
            token_chars,
        })
    }

    /// Phonetic form of the token span, word separators included. Equal to
    /// phonemizing the joined raw tokens because rules never cross spaces.
    fn span_phonetic(&self, start: usize, end: usize) -> String {
        self.phon_tokens[start..end].join(" ")
    }
}

/// Score every token window of width n-1, n, n+1 around each context phrase
/// of n tokens; keep the pairs at or under the threshold.
pub fn win_candidates(
    hypothesis: &str,
    ctx: &Context,
    cfg: &PhocoConfig,
    tables: &G2pTables,
) -> Result<Vec<ScoredCandidate>> {
    let hyp = PreparedHyp::new(hypothesis, cfg.rep, tables)?;
    Ok(win_scored(&hyp, ctx, cfg))
}

fn win_scored(hyp: &PreparedHyp, ctx: &Context, cfg: &PhocoConfig) -> Vec<ScoredCandidate> {
    let mut out = Vec::new();
    for phrase in &ctx.phrases {
        let n = phrase.token_count;
        let mut widths = vec![n.saturating_sub(1).max(1), n, n + 1];
        widths.dedup();
        let target = phrase.phonetic(cfg.rep);
        for w in widths {
            if w > hyp.tokens.len() {
                continue;
            }
            for start in 0..=(hyp.tokens.len() - w) {
                let d = normalized_distance(&hyp.span_phonetic(start, start + w), target);
                if d <= cfg.threshold {
                    out.push(ScoredCandidate {
                        start_token: start,
                        end_token: start + w,
                        phrase: phrase.text.clone(),
                        distance: d,
                    });
                }
            }
        }
    }
    out
}

/// From each token start, grow a segment character by character up to the
/// phrase's phonetic length plus three; each growth step is snapped forward
/// to the next token boundary and scored as that token span. The best span
/// per (start, phrase) is kept when it is at or under the threshold.
pub fn let_candidates(
    hypothesis: &str,
    ctx: &Context,
    cfg: &PhocoConfig,
    tables: &G2pTables,
) -> Result<Vec<ScoredCandidate>> {
    let hyp = PreparedHyp::new(hypothesis, cfg.rep, tables)?;
    Ok(let_scored(&hyp, ctx, cfg))
}

fn let_scored(hyp: &PreparedHyp, ctx: &Context, cfg: &PhocoConfig) -> Vec<ScoredCandidate> {
    let mut out = Vec::new();
    for start in 0..hyp.tokens.len() {
        for phrase in &ctx.phrases {
            let budget = phrase.phonetic(cfg.rep).chars().count() + 3;
            let target = phrase.phonetic(cfg.rep);
            let mut best: Option<(usize, f64)> = None;
            let mut consumed = 0usize;
            for end in start..hyp.tokens.len() {
                // Minimal segment length that reaches into this token: the
                // previous tokens, their separating spaces, one character.
                let min_chars = consumed + (end - start) + 1;
                if min_chars > budget {
                    break;
                }
                let d = normalized_distance(&hyp.span_phonetic(start, end + 1), target);
                if best.is_none_or(|(_, b)| d < b) {
                    best = Some((end + 1, d));
                }
                consumed += hyp.token_chars[end];
            }
            if let Some((end, d)) = best {
                if d <= cfg.threshold {
                    out.push(ScoredCandidate {
                        start_token: start,
                        end_token: end,
                        phrase: phrase.text.clone(),
                        distance: d,
                    });
                }
            }
        }
    }
    out
}

/// Greedy non-overlapping selection: ascending distance, then wider span,
/// then earlier start, then lexicographic phrase.
pub fn resolve_overlaps(mut candidates: Vec<ScoredCandidate>) -> Vec<Replacement> {
    candidates.sort_by(|a, b| {
        a.distance
            .partial_cmp(&b.distance)
            .expect("distances are finite")
            .then((b.end_token - b.start_token).cmp(&(a.end_token - a.start_token)))
            .then(a.start_token.cmp(&b.start_token))
            .then(a.phrase.cmp(&b.phrase))
    });
    let mut kept: Vec<Replacement> = Vec::new();
    for c in candidates {
        let overlaps = kept
            .iter()
            .any(|k| c.start_token < k.end_token && k.start_token < c.end_token);
        if !overlaps {
            kept.push(Replacement {
                start_token: c.start_token,
                end_token: c.end_token,
                phrase: c.phrase,
                distance: c.distance,
            });
        }
    }
    kept.sort_by_key(|r| r.start_token);
    kept
}

pub(crate) fn apply_replacements(tokens: &[&str], replacements: &[Replacement]) -> String {
    let mut out: Vec<&str> = Vec::with_capacity(tokens.len());
    let mut i = 0;
    let mut next = replacements.iter().peekable();
    while i < tokens.len() {
        match next.peek() {
            Some(r) if r.start_token == i => {
                out.push(&r.phrase);
                i = r.end_token;
                next.next();
            }
            _ => {
                out.push(tokens[i]);
                i += 1;
            }
        }
    }
    out.join(" ")
}

/// Run the configured selector over a normalized hypothesis and substitute
/// the winning spans. Returns the corrected text with the replacements made,
/// sorted by position; with an empty context or no match under the threshold
/// the hypothesis comes back unchanged.
pub fn correct(
    hypothesis: &str,
    ctx: &Context,
    cfg: &PhocoConfig,
    tables: &G2pTables,
) -> Result<(String, Vec<Replacement>)> {
    let hyp = PreparedHyp::new(hypothesis, cfg.rep, tables)?;
    let candidates = match cfg.selector {
        Selector::Win => win_scored(&hyp, ctx, cfg),
        Selector::Let => let_scored(&hyp, ctx, cfg),
    };
    let replacements = resolve_overlaps(candidates);
    let corrected = apply_replacements(&hyp.tokens, &replacements);
    Ok((corrected, replacements))
}

/// Scored candidates plus the token list, for callers that sweep thresholds
/// over one hypothesis without re-phonemizing (the augmentation grid).
pub(crate) fn scored_with_tokens<'a>(
    hypothesis: &'a str,
    ctx: &Context,
    cfg: &PhocoConfig,
    tables: &G2pTables,
) -> Result<(Vec<&'a str>, Vec<ScoredCandidate>)> {
    let hyp = PreparedHyp::new(hypothesis, cfg.rep, tables)?;
    let candidates = match cfg.selector {
        Selector::Win => win_scored(&hyp, ctx, cfg),
        Selector::Let => let_scored(&hyp, ctx, cfg),
    };
    Ok((hyp.tokens, candidates))
}
