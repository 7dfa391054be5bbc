//! Grapheme-to-phoneme transduction for Mexican Spanish into the string
//! spaces the corrector compares in: the normalized text itself (Plain), IPA,
//! or an ASCII Worldbet variant (Wbet).

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEFAULT_IPA: &str = include_str!("../data/g2p_ipa.tsv");
const DEFAULT_WBET: &str = include_str!("../data/g2p_wbet.tsv");

/// Alphabet the normalizer can emit (minus digits, which it spells out).
const NORMALIZED_LETTERS: &str = "abcdefghijklmnopqrstuvwxyzáéíóúüñ";

/// The string space a comparison runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Plain,
    Ipa,
    Wbet,
}

impl Representation {
    pub const ALL: [Representation; 3] =
        [Representation::Plain, Representation::Ipa, Representation::Wbet];

    pub fn as_str(self) -> &'static str {
        match self {
            Representation::Plain => "plain",
            Representation::Ipa => "ipa",
            Representation::Wbet => "wbet",
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Representation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "plain" => Ok(Representation::Plain),
            "ipa" => Ok(Representation::Ipa),
            "wbet" => Ok(Representation::Wbet),
            other => Err(format!("unknown representation {other:?} (plain|ipa|wbet)")),
        }
    }
}

#[derive(Debug, Clone)]
struct Rule {
    /// Pattern only matches at the start of a word.
    anchored: bool,
    pattern: Vec<char>,
    replacement: String,
}

/// An ordered rewrite-rule table. At each position the first matching rule
/// applies; the constructor rejects tables where an earlier rule shadows a
/// later one and tables that do not cover the normalizer output alphabet.
#[derive(Debug, Clone)]
pub struct G2pRuleTable {
    rules: Vec<Rule>,
}

impl G2pRuleTable {
    /// The built-in Mexican Spanish IPA table.
    pub fn default_ipa() -> Self {
        Self::parse(DEFAULT_IPA, Path::new("<builtin ipa>")).expect("builtin IPA table is valid")
    }

    /// The built-in ASCII Worldbet mirror of the IPA table.
    pub fn default_wbet() -> Self {
        Self::parse(DEFAULT_WBET, Path::new("<builtin wbet>"))
            .expect("builtin Wbet table is valid")
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Parse `pattern<TAB>replacement` lines; `#` comments and blank lines
    /// are skipped. A leading `^` in the pattern anchors it to word starts;
    /// a replacement of `∅` (or an empty field) deletes the grapheme.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut rules = Vec::new();
        let mut lines = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let Some((pattern, replacement)) = line.split_once('\t') else {
                return Err(Error::RulesFormat {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    msg: format!("expected `pattern<TAB>replacement`, got {line:?}"),
                });
            };
            let (anchored, literal) = match pattern.strip_prefix('^') {
                Some(rest) => (true, rest),
                None => (false, pattern),
            };
            rules.push(Rule {
                anchored,
                pattern: literal.chars().collect(),
                replacement: if replacement == "∅" {
                    String::new()
                } else {
                    replacement.to_string()
                },
            });
            lines.push(lineno + 1);
        }
        Self::build(rules, path, &lines)
    }

    fn build(rules: Vec<Rule>, path: &Path, lines: &[usize]) -> Result<Self> {
        let fail = |i: usize, msg: String| Error::RulesFormat {
            path: path.to_path_buf(),
            line: lines.get(i).copied().unwrap_or(i + 1),
            msg,
        };
        for (i, rule) in rules.iter().enumerate() {
            if rule.pattern.is_empty() {
                return Err(fail(i, "empty pattern".into()));
            }
            if rule.pattern.contains(&' ') || rule.replacement.contains(' ') {
                return Err(fail(i, "patterns and replacements must not contain spaces".into()));
            }
        }
        // An earlier unanchored rule whose pattern is a prefix of a later
        // rule's pattern makes the later rule unreachable.
        for i in 0..rules.len() {
            if rules[i].anchored {
                continue;
            }
            for j in (i + 1)..rules.len() {
                let shadows = rules[j].pattern.starts_with(&rules[i].pattern)
                    && (rules[j].pattern.len() > rules[i].pattern.len() || rules[j].anchored);
                let duplicate =
                    rules[j].pattern == rules[i].pattern && rules[j].anchored == rules[i].anchored;
                if shadows || duplicate {
                    return Err(fail(
                        j,
                        format!(
                            "rule {:?} is shadowed by earlier rule {:?} (longer patterns must \
                             be listed before their prefixes)",
                            rules[j].pattern.iter().collect::<String>(),
                            rules[i].pattern.iter().collect::<String>(),
                        ),
                    ));
                }
            }
        }
        // Totality over the normalized alphabet: every letter needs an
        // unanchored single-character fallback rule.
        for letter in NORMALIZED_LETTERS.chars() {
            let covered = rules
                .iter()
                .any(|r| !r.anchored && r.pattern.len() == 1 && r.pattern[0] == letter);
            if !covered {
                return Err(fail(
                    rules.len().saturating_sub(1),
                    format!("table has no single-character rule for {letter:?}; it must be total"),
                ));
            }
        }
        Ok(G2pRuleTable { rules })
    }

    fn apply(&self, text: &str) -> Result<String> {
        let chars: Vec<char> = text.chars().collect();
        let mut out = String::with_capacity(text.len());
        let mut i = 0;
        let mut at_word_start = true;
        'outer: while i < chars.len() {
            if chars[i] == ' ' {
                out.push(' ');
                i += 1;
                at_word_start = true;
                continue;
            }
            for rule in &self.rules {
                if rule.anchored && !at_word_start {
                    continue;
                }
                if chars[i..].starts_with(&rule.pattern) {
                    out.push_str(&rule.replacement);
                    i += rule.pattern.len();
                    at_word_start = false;
                    continue 'outer;
                }
            }
            return Err(Error::G2pCoverage { ch: chars[i] });
        }
        Ok(out)
    }
}

/// The rule tables for the two non-trivial representations.
#[derive(Debug, Clone)]
pub struct G2pTables {
    ipa: G2pRuleTable,
    wbet: G2pRuleTable,
}

impl G2pTables {
    pub fn new(ipa: G2pRuleTable, wbet: G2pRuleTable) -> Self {
        G2pTables { ipa, wbet }
    }

    pub fn table(&self, rep: Representation) -> Option<&G2pRuleTable> {
        match rep {
            Representation::Plain => None,
            Representation::Ipa => Some(&self.ipa),
            Representation::Wbet => Some(&self.wbet),
        }
    }
}

impl Default for G2pTables {
    fn default() -> Self {
        G2pTables {
            ipa: G2pRuleTable::default_ipa(),
            wbet: G2pRuleTable::default_wbet(),
        }
    }
}

/// Transduce normalized text into the requested representation. Plain is the
/// identity; IPA/Wbet rewrite word by word, preserving spaces.
pub fn phonemize(text: &str, rep: Representation, tables: &G2pTables) -> Result<String> {
    match tables.table(rep) {
        None => Ok(text.to_string()),
        Some(table) => table.apply(text),
    }
}
