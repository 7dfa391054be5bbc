//! Deterministic Spanish text normalization applied to every transcript
//! before phonetic processing: lowercase, strip symbols, spell out numbers,
//! expand abbreviations, collapse whitespace.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

const DEFAULT_ABBREVIATIONS: &str = include_str!("../data/abbreviations.tsv");

/// Letters that survive cleanup (plus digits and the space, handled separately).
pub const KEEP_LETTERS: &str = "abcdefghijklmnopqrstuvwxyzáéíóúüñ";

fn is_keep_letter(c: char) -> bool {
    c.is_ascii_lowercase() || "áéíóúüñ".contains(c)
}

/// Whether a character survives the cleanup stage. Digits survive cleanup
/// but are spelled out afterwards, so they never appear in final output.
pub fn is_keep_char(c: char) -> bool {
    is_keep_letter(c) || c.is_ascii_digit() || c == ' '
}

/// Normalization rule set: the surviving character set is fixed; the
/// abbreviation table is configuration.
///
/// Abbreviation keys are matched against whole tokens *after* symbol cleanup
/// and number expansion, so keys must be lowercase keep-alphabet letters with
/// no spaces or digits. Expansions must already be normalized (expanding is a
/// fixed point), which the constructor verifies.
#[derive(Debug, Clone)]
pub struct NormRules {
    abbreviations: Vec<(String, String)>,
    lookup: HashMap<String, String>,
}

impl NormRules {
    /// Build a rule set from `(key, expansion)` pairs, validating the
    /// invariants described on the type.
    pub fn new(abbreviations: Vec<(String, String)>) -> Result<Self> {
        Self::build(abbreviations, Path::new("<memory>"), None)
    }

    /// Rules with an empty abbreviation table.
    pub fn empty() -> Self {
        NormRules {
            abbreviations: Vec::new(),
            lookup: HashMap::new(),
        }
    }

    /// Parse a rules file: one `key<TAB>expansion` per line, `#` comments.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Parse rules from text; `path` is only used in error messages.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut pairs = Vec::new();
        let mut lines = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches(['\r', '\n']);
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let Some((key, expansion)) = line.split_once('\t') else {
                return Err(Error::RulesFormat {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    msg: format!("expected `key<TAB>expansion`, got {line:?}"),
                });
            };
            pairs.push((key.to_string(), expansion.trim().to_string()));
            lines.push(lineno + 1);
        }
        Self::build(pairs, path, Some(&lines))
    }

    fn build(pairs: Vec<(String, String)>, path: &Path, lines: Option<&[usize]>) -> Result<Self> {
        let fail = |i: usize, msg: String| Error::RulesFormat {
            path: path.to_path_buf(),
            line: lines.map(|l| l[i]).unwrap_or(i + 1),
            msg,
        };
        let mut lookup = HashMap::new();
        for (i, (key, expansion)) in pairs.iter().enumerate() {
            if key.is_empty() {
                return Err(fail(i, "empty abbreviation key".into()));
            }
            if !key.chars().all(is_keep_letter) {
                return Err(fail(
                    i,
                    format!(
                        "abbreviation key {key:?} must be lowercase letters from [{KEEP_LETTERS}] \
                         (it is matched against cleaned tokens)"
                    ),
                ));
            }
            if lookup.insert(key.clone(), expansion.clone()).is_some() {
                return Err(fail(i, format!("duplicate abbreviation key {key:?}")));
            }
        }
        let rules = NormRules {
            abbreviations: pairs,
            lookup,
        };
        // Expansions must be fixed points of the full pipeline, or
        // normalization would not be idempotent.
        for (i, (key, expansion)) in rules.abbreviations.iter().enumerate() {
            let renorm = normalize(expansion, &rules);
            if &renorm != expansion {
                return Err(fail(
                    i,
                    format!(
                        "expansion of {key:?} is not normalized: {expansion:?} \
                         re-normalizes to {renorm:?}"
                    ),
                ));
            }
        }
        Ok(rules)
    }

    pub fn abbreviations(&self) -> &[(String, String)] {
        &self.abbreviations
    }

    fn expand(&self, token: &str) -> Option<&str> {
        self.lookup.get(token).map(String::as_str)
    }
}

impl Default for NormRules {
    /// The built-in table (sr, lt, ml, kg, núm/num).
    fn default() -> Self {
        Self::parse(DEFAULT_ABBREVIATIONS, Path::new("<builtin abbreviations>"))
            .expect("builtin abbreviation table is valid")
    }
}

/// Normalize raw transcript text: lowercase, replace out-of-alphabet symbols
/// with spaces, spell digits out as Spanish cardinals, expand whole-token
/// abbreviations, collapse whitespace. Total and idempotent.
pub fn normalize(text: &str, rules: &NormRules) -> String {
    let lowered = text.to_lowercase();
    let cleaned: String = lowered
        .chars()
        .map(|c| if is_keep_char(c) { c } else { ' ' })
        .collect();

    let mut out = String::with_capacity(cleaned.len());
    for token in cleaned.split_whitespace() {
        for piece in expand_digit_runs(token) {
            let expanded = rules.expand(&piece).unwrap_or(&piece);
            if !expanded.is_empty() {
                if !out.is_empty() {
                    out.push(' ');
                }
                out.push_str(expanded);
            }
        }
    }
    out
}

/// Split a token into alternating letter runs and spelled-out digit runs:
/// "2kg" becomes ["dos", "kg"].
fn expand_digit_runs(token: &str) -> Vec<String> {
    let mut pieces = Vec::new();
    let mut current = String::new();
    let mut current_is_digit = None::<bool>;
    let flush = |s: &mut String, is_digit: bool, pieces: &mut Vec<String>| {
        if s.is_empty() {
            return;
        }
        if is_digit {
            pieces.push(digits_to_words(s));
        } else {
            pieces.push(std::mem::take(s));
        }
        s.clear();
    };
    for c in token.chars() {
        let d = c.is_ascii_digit();
        if current_is_digit.is_some_and(|prev| prev != d) {
            flush(&mut current, current_is_digit.unwrap(), &mut pieces);
        }
        current_is_digit = Some(d);
        current.push(c);
    }
    if let Some(d) = current_is_digit {
        flush(&mut current, d, &mut pieces);
    }
    pieces
}

/// Spell out a digit run. Values up to 999 999 read as one cardinal; anything
/// longer (or unparseable) is read digit by digit, so the stage stays total.
fn digits_to_words(digits: &str) -> String {
    if let Ok(n) = digits.parse::<u64>() {
        if let Ok(words) = number_to_words(n) {
            return words;
        }
    }
    let mut out = String::new();
    for c in digits.chars() {
        let d = c.to_digit(10).expect("digit run") as u64;
        if !out.is_empty() {
            out.push(' ');
        }
        let _ = write!(out, "{}", UNITS[d as usize]);
    }
    out
}

const UNITS: [&str; 30] = [
    "cero",
    "uno",
    "dos",
    "tres",
    "cuatro",
    "cinco",
    "seis",
    "siete",
    "ocho",
    "nueve",
    "diez",
    "once",
    "doce",
    "trece",
    "catorce",
    "quince",
    "dieciséis",
    "diecisiete",
    "dieciocho",
    "diecinueve",
    "veinte",
    "veintiuno",
    "veintidós",
    "veintitrés",
    "veinticuatro",
    "veinticinco",
    "veintiséis",
    "veintisiete",
    "veintiocho",
    "veintinueve",
];

const TENS: [&str; 10] = [
    "", "", "", "treinta", "cuarenta", "cincuenta", "sesenta", "setenta", "ochenta", "noventa",
];

const HUNDREDS: [&str; 10] = [
    "",
    "ciento",
    "doscientos",
    "trescientos",
    "cuatrocientos",
    "quinientos",
    "seiscientos",
    "setecientos",
    "ochocientos",
    "novecientos",
];

/// Standard Spanish cardinal for 0..=999 999.
pub fn number_to_words(n: u64) -> Result<String> {
    if n > 999_999 {
        return Err(Error::NumberOutOfRange(n));
    }
    if n == 0 {
        return Ok("cero".to_string());
    }
    let mut parts: Vec<String> = Vec::new();
    let thousands = n / 1000;
    let rest = n % 1000;
    if thousands > 0 {
        if thousands == 1 {
            parts.push("mil".to_string());
        } else {
            // "un"/"veintiún" before "mil".
            parts.push(format!("{} mil", under_thousand(thousands, true)));
        }
    }
    if rest > 0 {
        parts.push(under_thousand(rest, false));
    }
    Ok(parts.join(" "))
}

fn under_thousand(n: u64, apocope: bool) -> String {
    debug_assert!((1..=999).contains(&n));
    let mut parts: Vec<String> = Vec::new();
    let hundreds = n / 100;
    let rest = n % 100;
    if hundreds > 0 {
        if n == 100 {
            return "cien".to_string();
        }
        parts.push(HUNDREDS[hundreds as usize].to_string());
    }
    if rest > 0 {
        parts.push(under_hundred(rest, apocope));
    }
    parts.join(" ")
}

fn under_hundred(n: u64, apocope: bool) -> String {
    debug_assert!((1..=99).contains(&n));
    if n < 30 {
        return match (n, apocope) {
            (1, true) => "un".to_string(),
            (21, true) => "veintiún".to_string(),
            _ => UNITS[n as usize].to_string(),
        };
    }
    let tens = TENS[(n / 10) as usize];
    match n % 10 {
        0 => tens.to_string(),
        u => format!("{tens} y {}", under_hundred(u, apocope)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rules_with(extra: &[(&str, &str)]) -> NormRules {
        let pairs = extra
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        NormRules::new(pairs).unwrap()
    }

    #[test]
    fn empty_input() {
        assert_eq!(normalize("", &NormRules::default()), "");
    }

    #[test]
    fn four_stage_example() {
        assert_eq!(
            normalize("¿Quiero 2 Coca-Colas!", &NormRules::default()),
            "quiero dos coca colas"
        );
    }

    #[test]
    fn abbreviation_and_number_example() {
        let rules = rules_with(&[("lt", "litros")]);
        assert_eq!(normalize("3 lt de agua", &rules), "tres litros de agua");
    }

    #[test]
    fn abbreviations_match_whole_tokens_only() {
        let rules = rules_with(&[("lt", "litros")]);
        assert_eq!(normalize("alto lt", &rules), "alto litros");
    }

    #[test]
    fn digit_runs_inside_tokens_are_split_out() {
        let rules = rules_with(&[("kg", "kilogramos")]);
        assert_eq!(normalize("2kg", &rules), "dos kilogramos");
        assert_eq!(normalize("a1b", &rules), "a uno b");
    }

    #[test]
    fn large_numbers_read_digit_by_digit() {
        assert_eq!(
            normalize("1000000", &NormRules::empty()),
            "uno cero cero cero cero cero cero"
        );
    }

    #[test]
    fn accents_survive() {
        assert_eq!(normalize("Güera NIÑO", &NormRules::empty()), "güera niño");
    }

    #[test]
    fn default_table_expands() {
        let rules = NormRules::default();
        assert_eq!(normalize("sr perez", &rules), "señor perez");
        assert_eq!(normalize("núm 5", &rules), "número cinco");
    }

    #[test]
    fn number_words() {
        assert_eq!(number_to_words(0).unwrap(), "cero");
        assert_eq!(number_to_words(16).unwrap(), "dieciséis");
        assert_eq!(number_to_words(21).unwrap(), "veintiuno");
        assert_eq!(number_to_words(35).unwrap(), "treinta y cinco");
        assert_eq!(number_to_words(100).unwrap(), "cien");
        assert_eq!(number_to_words(101).unwrap(), "ciento uno");
        assert_eq!(number_to_words(600).unwrap(), "seiscientos");
        assert_eq!(number_to_words(1000).unwrap(), "mil");
        assert_eq!(number_to_words(21_000).unwrap(), "veintiún mil");
        assert_eq!(number_to_words(31_001).unwrap(), "treinta y un mil uno");
        assert_eq!(number_to_words(100_000).unwrap(), "cien mil");
        assert_eq!(number_to_words(101_000).unwrap(), "ciento un mil");
        assert_eq!(
            number_to_words(999_999).unwrap(),
            "novecientos noventa y nueve mil novecientos noventa y nueve"
        );
        assert!(matches!(
            number_to_words(1_000_000),
            Err(Error::NumberOutOfRange(_))
        ));
    }

    #[test]
    fn rejects_bad_rule_tables() {
        assert!(NormRules::new(vec![("no.".into(), "número".into())]).is_err());
        assert!(NormRules::new(vec![("Sr".into(), "señor".into())]).is_err());
        assert!(NormRules::new(vec![
            ("lt".into(), "litros".into()),
            ("lt".into(), "litros".into()),
        ])
        .is_err());
        // Expansion that is not a fixed point (contains an abbreviation key).
        assert!(NormRules::new(vec![
            ("lt".into(), "litros".into()),
            ("bot".into(), "botella lt".into()),
        ])
        .is_err());
        // Expansion with symbols that cleanup would remove.
        assert!(NormRules::new(vec![("sr".into(), "Señor.".into())]).is_err());
    }

    #[test]
    fn parses_rule_files_with_comments() {
        let rules = NormRules::parse(
            "# comment\nlt\tlitros\n\nkg\tkilogramos\n",
            Path::new("test.tsv"),
        )
        .unwrap();
        assert_eq!(rules.abbreviations().len(), 2);
        assert!(NormRules::parse("no tab here\n", Path::new("t")).is_err());
    }

    proptest! {
        #[test]
        fn idempotent(s in "\\PC{0,60}") {
            let rules = NormRules::default();
            let once = normalize(&s, &rules);
            prop_assert_eq!(normalize(&once, &rules), once);
        }

        #[test]
        fn output_alphabet_is_closed(s in "\\PC{0,60}") {
            let out = normalize(&s, &NormRules::default());
            for c in out.chars() {
                prop_assert!(is_keep_char(c), "unexpected char {:?} in {:?}", c, out);
                prop_assert!(!c.is_ascii_digit(), "digit {:?} survived in {:?}", c, out);
            }
            prop_assert!(!out.starts_with(' ') && !out.ends_with(' '));
            prop_assert!(!out.contains("  "));
        }
    }
}
