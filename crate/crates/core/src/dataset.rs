//! Corpus model and dataset construction: the augmentation grid that turns
//! each utterance into one labeled correction candidate per corrector
//! configuration, the train/validation/test split, and a synthetic
//! noisy-corpus generator for desk-scale evaluation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::corrector::{self, Context, PhocoConfig, Selector};
use crate::distance::{normalized_distance, wer};
use crate::error::{Error, Result};
use crate::normalizer::{normalize, NormRules};
use crate::phonetics::{phonemize, G2pTables, Representation};

/// One audio's reference transcript plus its two ASR hypotheses (produced
/// with and without recognition context).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utterance {
    pub id: String,
    pub reference: String,
    pub hyp_with_context: String,
    pub hyp_without_context: String,
}

impl Utterance {
    pub fn hypothesis(&self, source: SourceHyp) -> &str {
        match source {
            SourceHyp::WithContext => &self.hyp_with_context,
            SourceHyp::WithoutContext => &self.hyp_without_context,
        }
    }
}

/// Which of the two ASR hypotheses a candidate was generated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceHyp {
    WithContext,
    WithoutContext,
}

impl SourceHyp {
    pub const ALL: [SourceHyp; 2] = [SourceHyp::WithContext, SourceHyp::WithoutContext];
}

impl fmt::Display for SourceHyp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SourceHyp::WithContext => "with_context",
            SourceHyp::WithoutContext => "without_context",
        })
    }
}

/// A proposed correction for one hypothesis under one corrector
/// configuration, labeled 1 exactly when it lowers the WER.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionCandidate {
    #[serde(rename = "id")]
    pub utterance_id: String,
    pub reference: String,
    pub hyp_with_context: String,
    pub hyp_without_context: String,
    pub cfg: PhocoConfig,
    pub source_hyp: SourceHyp,
    pub candidate: String,
    pub wer_hyp: f64,
    pub wer_cand: f64,
    pub label: u8,
}

impl CorrectionCandidate {
    /// The hypothesis this candidate corrects.
    pub fn hypothesis(&self) -> &str {
        match self.source_hyp {
            SourceHyp::WithContext => &self.hyp_with_context,
            SourceHyp::WithoutContext => &self.hyp_without_context,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.label == 1
    }
}

/// The similarity thresholds swept by the augmentation grid: 0.05 to 0.60 in
/// steps of 0.05.
pub fn threshold_grid() -> [f64; 12] {
    std::array::from_fn(|i| (i as f64 + 1.0) * 0.05)
}

/// Grid position of a threshold, 1-based (0.05 → 1, 0.60 → 12). Off-grid
/// values are rounded to the nearest step and clamped.
pub fn threshold_index(threshold: f64) -> usize {
    ((threshold * 20.0).round() as i64).clamp(1, 12) as usize
}

fn tokens(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}

/// Expand every utterance through the full configuration grid: 12 thresholds
/// x 3 representations x 2 selectors x both hypotheses, 144 candidates per
/// utterance, each labeled by comparing its WER to the hypothesis WER.
pub fn augment(
    utterances: &[Utterance],
    ctx: &Context,
    tables: &G2pTables,
) -> Result<Vec<CorrectionCandidate>> {
    let grid = threshold_grid();
    let max_threshold = grid[grid.len() - 1];
    let mut out = Vec::with_capacity(utterances.len() * 144);
    for utt in utterances {
        if utt.reference.is_empty() {
            return Err(Error::EmptyReference {
                id: Some(utt.id.clone()),
            });
        }
        let ref_tokens = tokens(&utt.reference);
        let mut wer_cache: HashMap<String, f64> = HashMap::new();
        for source in SourceHyp::ALL {
            let hyp = utt.hypothesis(source);
            let wer_hyp = wer(&ref_tokens, &tokens(hyp))?.wer;
            for rep in Representation::ALL {
                for selector in Selector::ALL {
                    // Candidates scored once at the widest threshold; each
                    // grid row keeps its qualifying subset (the qualifying
                    // set is monotone in the threshold).
                    let widest = PhocoConfig::new(max_threshold, rep, selector)?;
                    let (hyp_tokens, scored) =
                        corrector::scored_with_tokens(hyp, ctx, &widest, tables)?;
                    for threshold in grid {
                        let qualifying: Vec<_> = scored
                            .iter()
                            .filter(|c| c.distance <= threshold)
                            .cloned()
                            .collect();
                        let replacements = corrector::resolve_overlaps(qualifying);
                        let candidate = corrector::apply_replacements(&hyp_tokens, &replacements);
                        let wer_cand = match wer_cache.get(&candidate) {
                            Some(&w) => w,
                            None => {
                                let w = wer(&ref_tokens, &tokens(&candidate))?.wer;
                                wer_cache.insert(candidate.clone(), w);
                                w
                            }
                        };
                        out.push(CorrectionCandidate {
                            utterance_id: utt.id.clone(),
                            reference: utt.reference.clone(),
                            hyp_with_context: utt.hyp_with_context.clone(),
                            hyp_without_context: utt.hyp_without_context.clone(),
                            cfg: PhocoConfig::new(threshold, rep, selector)?,
                            source_hyp: source,
                            candidate,
                            wer_hyp,
                            wer_cand,
                            label: u8::from(wer_cand < wer_hyp),
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Random 80/10/10 partition by candidate, deterministic under the seed.
pub fn split(
    candidates: &[CorrectionCandidate],
    seed: u64,
) -> (
    Vec<CorrectionCandidate>,
    Vec<CorrectionCandidate>,
    Vec<CorrectionCandidate>,
) {
    let mut indices: Vec<usize> = (0..candidates.len()).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    // Fisher–Yates, spelled out so the shuffle is pinned to this crate
    // rather than to rand's slice adaptors.
    for i in (1..indices.len()).rev() {
        let j = rng.random_range(0..=i);
        indices.swap(i, j);
    }
    let n = candidates.len();
    let n_train = n * 8 / 10;
    let n_val = n / 10;
    let pick = |range: std::ops::Range<usize>| {
        indices[range]
            .iter()
            .map(|&i| candidates[i].clone())
            .collect::<Vec<_>>()
    };
    (
        pick(0..n_train),
        pick(n_train..n_train + n_val),
        pick(n_train + n_val..n),
    )
}

/// Textually distinct single-edit variants of a token that plausibly come out
/// of a speech recognizer: confusable letter substitutions, accent toggles,
/// silent-h insertion/deletion, ll/y and rr/r swaps.
fn perturbations(token: &str) -> Vec<String> {
    const CHAR_SUBS: &[(char, char)] = &[
        ('b', 'v'),
        ('v', 'b'),
        ('s', 'z'),
        ('z', 's'),
        ('c', 's'),
        ('s', 'c'),
        ('g', 'j'),
        ('j', 'g'),
        ('y', 'i'),
        ('i', 'y'),
        ('m', 'n'),
        ('n', 'm'),
        ('r', 'l'),
        ('l', 'r'),
        ('o', 'u'),
        ('u', 'o'),
        ('e', 'i'),
        ('i', 'e'),
        ('d', 't'),
        ('t', 'd'),
        ('a', 'e'),
        ('a', 'á'),
        ('á', 'a'),
        ('e', 'é'),
        ('é', 'e'),
        ('i', 'í'),
        ('í', 'i'),
        ('o', 'ó'),
        ('ó', 'o'),
        ('u', 'ú'),
        ('ú', 'u'),
    ];
    let chars: Vec<char> = token.chars().collect();
    let mut forms = BTreeSet::new();
    for (i, &c) in chars.iter().enumerate() {
        for &(from, to) in CHAR_SUBS {
            if c == from {
                let mut v = chars.clone();
                v[i] = to;
                forms.insert(v.iter().collect::<String>());
            }
        }
    }
    forms.insert(format!("h{token}"));
    if token.contains('h') {
        forms.insert(token.replacen('h', "", 1));
    }
    for (pat, sub) in [("ll", "y"), ("y", "ll"), ("rr", "r"), ("qu", "k")] {
        if token.contains(pat) {
            forms.insert(token.replacen(pat, sub, 1));
        }
    }
    forms.remove(token);
    forms.remove("");
    forms.into_iter().collect()
}

/// The noise channel: per-token confusion pools of phonetically near forms.
struct ConfusionChannel {
    pools: BTreeMap<String, Vec<String>>,
}

/// A replacement qualifies when its phone string is this close to the
/// original's.
const CONFUSION_MAX_DISTANCE: f64 = 0.34;

impl ConfusionChannel {
    fn build(vocab: &BTreeSet<String>, tables: &G2pTables) -> Result<Self> {
        let phon: BTreeMap<&String, String> = vocab
            .iter()
            .map(|t| Ok((t, phonemize(t, Representation::Ipa, tables)?)))
            .collect::<Result<_>>()?;
        let mut pools = BTreeMap::new();
        for token in vocab {
            let own = &phon[token];
            let mut pool = BTreeSet::new();
            for other in vocab {
                if other != token
                    && normalized_distance(own, &phon[other]) <= CONFUSION_MAX_DISTANCE
                {
                    pool.insert(other.clone());
                }
            }
            for form in perturbations(token) {
                let form_phon = phonemize(&form, Representation::Ipa, tables)?;
                if normalized_distance(own, &form_phon) <= CONFUSION_MAX_DISTANCE {
                    pool.insert(form);
                }
            }
            let pool: Vec<String> = pool.into_iter().collect();
            debug_assert!(!pool.is_empty(), "confusion pool for {token:?} is empty");
            pools.insert(token.clone(), pool);
        }
        Ok(ConfusionChannel { pools })
    }

    /// Corrupt one sentence. Every token consumes exactly two draws whether
    /// or not it is corrupted, so corruption sets at different noise rates
    /// are nested under the same seed.
    fn corrupt(&self, sentence: &str, noise_rate: f64, rng: &mut ChaCha20Rng) -> String {
        let out: Vec<&str> = sentence
            .split_whitespace()
            .map(|token| {
                let u: f64 = rng.random();
                let pool = &self.pools[token];
                let pick = rng.random_range(0..pool.len());
                if u < noise_rate {
                    pool[pick].as_str()
                } else {
                    token
                }
            })
            .collect();
        out.join(" ")
    }
}

/// Generate a corpus whose hypotheses come from a phoneme-confusion channel:
/// each token of the reference is replaced, with probability `noise_rate`,
/// by a phonetically near neighbor. The two hypotheses are independent draws
/// from the same channel. Deterministic under the seed.
pub fn synthesize_corpus<S: AsRef<str>>(
    clean_sentences: &[S],
    ctx: &Context,
    noise_rate: f64,
    seed: u64,
    tables: &G2pTables,
) -> Result<Vec<Utterance>> {
    if !(0.0..=1.0).contains(&noise_rate) {
        return Err(Error::InvalidNoiseRate(noise_rate));
    }
    let rules = NormRules::empty();
    let mut references = Vec::with_capacity(clean_sentences.len());
    for (i, s) in clean_sentences.iter().enumerate() {
        let reference = normalize(s.as_ref(), &rules);
        if reference.is_empty() {
            return Err(Error::EmptyReference {
                id: Some(format!("sentence {}", i + 1)),
            });
        }
        references.push(reference);
    }

    let mut vocab: BTreeSet<String> = BTreeSet::new();
    for r in &references {
        vocab.extend(r.split_whitespace().map(str::to_string));
    }
    for phrase in ctx.phrases() {
        vocab.extend(phrase.split_whitespace().map(str::to_string));
    }
    let channel = ConfusionChannel::build(&vocab, tables)?;

    let base = ChaCha20Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(references.len());
    for (i, reference) in references.into_iter().enumerate() {
        let mut hyps = [String::new(), String::new()];
        for (j, hyp) in hyps.iter_mut().enumerate() {
            let mut rng = base.clone();
            rng.set_stream((i as u64) * 2 + j as u64);
            *hyp = channel.corrupt(&reference, noise_rate, &mut rng);
        }
        let [hyp_with_context, hyp_without_context] = hyps;
        out.push(Utterance {
            id: format!("u{i:04}"),
            reference,
            hyp_with_context,
            hyp_without_context,
        });
    }
    Ok(out)
}

/// Deterministically sample plausible telesales order sentences built around
/// the context phrases, for driving the synthetic corpus.
pub fn sample_sentences(ctx: &Context, n: usize, seed: u64) -> Vec<String> {
    const TEMPLATES: &[&str] = &[
        "quiero {}",
        "deme {} por favor",
        "me manda {}",
        "cuánto cuesta {}",
        "necesito {} para hoy",
        "sí confirmo {}",
        "agregue {} al pedido",
        "van a ser {num} de {}",
        "mándeme {num} {}",
        "mejor cambio {} por {alt}",
        "sin {} gracias",
        "tiene {} en la sucursal",
    ];
    const NUMBERS: &[&str] = &["dos", "tres", "cuatro", "seis", "doce"];
    let phrases: Vec<&str> = ctx.phrases().collect();
    if phrases.is_empty() {
        return Vec::new();
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let template = TEMPLATES[rng.random_range(0..TEMPLATES.len())];
            let phrase = phrases[rng.random_range(0..phrases.len())];
            let alt = phrases[rng.random_range(0..phrases.len())];
            let num = NUMBERS[rng.random_range(0..NUMBERS.len())];
            template
                .replacen("{num}", num, 1)
                .replacen("{alt}", alt, 1)
                .replacen("{}", phrase, 1)
        })
        .collect()
}

fn write_jsonl<T: Serialize>(items: &[T], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        let line = serde_json::to_string(item).expect("serializable record");
        w.write_all(line.as_bytes())
            .and_then(|()| w.write_all(b"\n"))
            .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            line: lineno + 1,
            source,
        })?;
        out.push(item);
    }
    Ok(out)
}

/// Write a corpus as line-delimited JSON records.
pub fn save_corpus(utterances: &[Utterance], path: impl AsRef<Path>) -> Result<()> {
    write_jsonl(utterances, path.as_ref())
}

/// Read a corpus, validating that every reference is non-empty.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Utterance>> {
    let utterances: Vec<Utterance> = read_jsonl(path.as_ref())?;
    for u in &utterances {
        if u.reference.is_empty() {
            return Err(Error::EmptyReference {
                id: Some(u.id.clone()),
            });
        }
    }
    Ok(utterances)
}

/// Write augmented candidates as line-delimited JSON records.
pub fn save_candidates(candidates: &[CorrectionCandidate], path: impl AsRef<Path>) -> Result<()> {
    write_jsonl(candidates, path.as_ref())
}

pub fn load_candidates(path: impl AsRef<Path>) -> Result<Vec<CorrectionCandidate>> {
    read_jsonl(path.as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn tables() -> G2pTables {
        G2pTables::default()
    }

    fn small_ctx() -> Context {
        Context::new(
            &["coca cola", "agua mineral", "jugo de manzana", "pepsi"],
            &tables(),
        )
        .unwrap()
    }

    fn utterance(id: &str, reference: &str, h1: &str, h2: &str) -> Utterance {
        Utterance {
            id: id.into(),
            reference: reference.into(),
            hyp_with_context: h1.into(),
            hyp_without_context: h2.into(),
        }
    }

    #[test]
    fn augment_produces_full_grid() {
        let utts = vec![utterance(
            "a",
            "quiero una coca cola",
            "quiero una coca gola",
            "quiero una boca cola",
        )];
        let cands = augment(&utts, &small_ctx(), &tables()).unwrap();
        assert_eq!(cands.len(), 144);

        let mut cells = HashSet::new();
        for c in &cands {
            assert_eq!(c.utterance_id, "a");
            let key = (
                threshold_index(c.cfg.threshold),
                c.cfg.rep,
                c.cfg.selector,
                c.source_hyp,
            );
            assert!(cells.insert(key), "duplicate grid cell {key:?}");
        }
        assert_eq!(cells.len(), 144);
    }

    #[test]
    fn augment_labels_match_stored_wers() {
        let utts = vec![
            utterance(
                "a",
                "quiero una coca cola",
                "quiero una coca gola",
                "quiero una boca cola",
            ),
            utterance(
                "b",
                "dos aguas minerales",
                "dos aguas minerales",
                "los aguas minerales",
            ),
        ];
        let cands = augment(&utts, &small_ctx(), &tables()).unwrap();
        for c in &cands {
            let r = tokens(&c.reference);
            let wer_hyp = wer(&r, &tokens(c.hypothesis())).unwrap().wer;
            let wer_cand = wer(&r, &tokens(&c.candidate)).unwrap().wer;
            assert_eq!(wer_hyp, c.wer_hyp);
            assert_eq!(wer_cand, c.wer_cand);
            assert_eq!(c.label, u8::from(wer_cand < wer_hyp));
        }
    }

    #[test]
    fn perfect_hypotheses_never_label_positive() {
        let utts = vec![utterance(
            "a",
            "quiero una coca cola",
            "quiero una coca cola",
            "quiero una coca cola",
        )];
        let cands = augment(&utts, &small_ctx(), &tables()).unwrap();
        assert_eq!(cands.len(), 144);
        assert!(cands.iter().all(|c| c.label == 0));
    }

    #[test]
    fn augment_rejects_empty_reference() {
        let utts = vec![utterance("a", "", "x", "y")];
        assert!(matches!(
            augment(&utts, &small_ctx(), &tables()),
            Err(Error::EmptyReference { .. })
        ));
    }

    #[test]
    fn split_sizes_and_determinism() {
        let utts = vec![utterance(
            "a",
            "quiero una coca cola",
            "quiero una coca gola",
            "quiero una boca cola",
        )];
        let cands = augment(&utts, &small_ctx(), &tables()).unwrap();

        let (train, val, test) = split(&cands, 7);
        assert_eq!((train.len(), val.len(), test.len()), (115, 14, 15));

        let (t2, v2, s2) = split(&cands, 7);
        assert_eq!(train, t2);
        assert_eq!(val, v2);
        assert_eq!(test, s2);

        let (t3, _, _) = split(&cands, 8);
        assert_ne!(train, t3);

        // Disjoint union equals the input.
        let all: Vec<_> = train.into_iter().chain(val).chain(test).collect();
        assert_eq!(all.len(), cands.len());
        let key = |c: &CorrectionCandidate| {
            (
                c.utterance_id.clone(),
                threshold_index(c.cfg.threshold),
                c.cfg.rep,
                c.cfg.selector,
                c.source_hyp,
            )
        };
        let mut seen = HashSet::new();
        for c in &all {
            assert!(seen.insert(key(c)));
        }
    }

    #[test]
    fn split_tiny() {
        let utts = vec![utterance(
            "a",
            "una coca cola",
            "una coca gola",
            "una boca cola",
        )];
        let cands = augment(&utts, &small_ctx(), &tables()).unwrap();
        let ten = &cands[..10];
        let (train, val, test) = split(ten, 1);
        assert_eq!((train.len(), val.len(), test.len()), (8, 1, 1));
    }

    #[test]
    fn synthesize_rate_zero_copies_references() {
        let ctx = small_ctx();
        let sentences = sample_sentences(&ctx, 10, 3);
        let corpus = synthesize_corpus(&sentences, &ctx, 0.0, 11, &tables()).unwrap();
        assert_eq!(corpus.len(), 10);
        for u in &corpus {
            assert_eq!(u.reference, u.hyp_with_context);
            assert_eq!(u.reference, u.hyp_without_context);
        }
    }

    #[test]
    fn synthesize_rate_one_corrupts_every_token() {
        let ctx = small_ctx();
        let corpus =
            synthesize_corpus(&["quiero una coca cola"], &ctx, 1.0, 11, &tables()).unwrap();
        let u = &corpus[0];
        for hyp in [&u.hyp_with_context, &u.hyp_without_context] {
            let ref_toks = tokens(&u.reference);
            let hyp_toks = tokens(hyp);
            assert_eq!(ref_toks.len(), hyp_toks.len());
            for (r, h) in ref_toks.iter().zip(&hyp_toks) {
                assert_ne!(r, h, "token {r:?} was not corrupted in {hyp:?}");
            }
        }
    }

    #[test]
    fn synthesize_mean_wer_grows_with_noise_rate() {
        let ctx = small_ctx();
        let sentences = sample_sentences(&ctx, 40, 5);
        let mean_wer = |rate: f64| {
            let corpus = synthesize_corpus(&sentences, &ctx, rate, 11, &tables()).unwrap();
            let mut total = 0.0;
            let mut count = 0usize;
            for u in &corpus {
                let r = tokens(&u.reference);
                for source in SourceHyp::ALL {
                    total += wer(&r, &tokens(u.hypothesis(source))).unwrap().wer;
                    count += 1;
                }
            }
            total / count as f64
        };
        let w1 = mean_wer(0.1);
        let w3 = mean_wer(0.3);
        let w5 = mean_wer(0.5);
        assert!(w1 < w3 && w3 < w5, "wer not monotone: {w1} {w3} {w5}");
    }

    #[test]
    fn synthesize_rejects_bad_rate() {
        let ctx = small_ctx();
        assert!(matches!(
            synthesize_corpus(&["hola"], &ctx, 1.5, 1, &tables()),
            Err(Error::InvalidNoiseRate(_))
        ));
    }

    #[test]
    fn corpus_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let ctx = small_ctx();
        let sentences = sample_sentences(&ctx, 5, 9);
        let corpus = synthesize_corpus(&sentences, &ctx, 0.3, 2, &tables()).unwrap();
        let path = dir.path().join("corpus.jsonl");
        save_corpus(&corpus, &path).unwrap();
        assert_eq!(load_corpus(&path).unwrap(), corpus);

        let cands = augment(&corpus, &ctx, &tables()).unwrap();
        let cpath = dir.path().join("candidates.jsonl");
        save_candidates(&cands, &cpath).unwrap();
        assert_eq!(load_candidates(&cpath).unwrap(), cands);

        // The on-disk field names are part of the interface.
        let first_line = std::fs::read_to_string(&cpath)
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .to_string();
        for field in [
            "\"id\"",
            "\"reference\"",
            "\"hyp_with_context\"",
            "\"hyp_without_context\"",
            "\"cfg\"",
            "\"threshold\"",
            "\"rep\"",
            "\"selector\"",
            "\"source_hyp\"",
            "\"candidate\"",
            "\"wer_hyp\"",
            "\"wer_cand\"",
            "\"label\"",
        ] {
            assert!(first_line.contains(field), "{field} missing in {first_line}");
        }
    }

    #[test]
    fn threshold_grid_shape() {
        let grid = threshold_grid();
        assert_eq!(grid.len(), 12);
        assert!((grid[0] - 0.05).abs() < 1e-12);
        assert!((grid[11] - 0.60).abs() < 1e-12);
        assert_eq!(threshold_index(grid[0]), 1);
        assert_eq!(threshold_index(grid[11]), 12);
        assert_eq!(threshold_index(0.25), 5);
    }
}
