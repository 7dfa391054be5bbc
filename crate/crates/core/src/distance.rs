//! Edit-distance primitives: character-level Levenshtein, normalized phonetic
//! distance, and word-level WER with a substitution/deletion/insertion breakdown.

use crate::error::{Error, Result};

/// Unit-cost edit distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_slices(&a, &b)
}

fn levenshtein_slices<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let cost = usize::from(ca != cb);
            curr[j + 1] = (prev[j + 1] + 1).min(curr[j] + 1).min(prev[j] + cost);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// Levenshtein distance scaled into [0, 1] by the longer string's length.
/// Two empty strings are at distance 0.
pub fn normalized_distance(a: &str, b: &str) -> f64 {
    let la = a.chars().count();
    let lb = b.chars().count();
    let denom = la.max(lb);
    if denom == 0 {
        return 0.0;
    }
    levenshtein(a, b) as f64 / denom as f64
}

/// Word error rate of a hypothesis against a reference, with the edit
/// operations broken down by kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WerBreakdown {
    pub substitutions: usize,
    pub deletions: usize,
    pub insertions: usize,
    pub ref_len: usize,
    pub wer: f64,
}

impl WerBreakdown {
    pub fn edits(&self) -> usize {
        self.substitutions + self.deletions + self.insertions
    }
}

/// Token-level minimal edit alignment of `hypothesis` against `reference`.
///
/// Ties in the backtrace prefer substitution, then deletion, then insertion,
/// so the S/D/I split is deterministic. The WER itself is tie-free. The
/// reference must be non-empty; WER may exceed 1.0.
pub fn wer<T: AsRef<str>>(reference: &[T], hypothesis: &[T]) -> Result<WerBreakdown> {
    if reference.is_empty() {
        return Err(Error::EmptyReference { id: None });
    }
    let m = reference.len();
    let n = hypothesis.len();
    // Full table so the backtrace can recover the operation counts.
    let mut dp = vec![0usize; (m + 1) * (n + 1)];
    let idx = |i: usize, j: usize| i * (n + 1) + j;
    for i in 0..=m {
        dp[idx(i, 0)] = i;
    }
    for j in 0..=n {
        dp[idx(0, j)] = j;
    }
    for i in 1..=m {
        for j in 1..=n {
            let cost = usize::from(reference[i - 1].as_ref() != hypothesis[j - 1].as_ref());
            dp[idx(i, j)] = (dp[idx(i - 1, j - 1)] + cost)
                .min(dp[idx(i - 1, j)] + 1)
                .min(dp[idx(i, j - 1)] + 1);
        }
    }

    let (mut i, mut j) = (m, n);
    let (mut subs, mut dels, mut ins) = (0usize, 0usize, 0usize);
    while i > 0 || j > 0 {
        let here = dp[idx(i, j)];
        if i > 0 && j > 0 {
            let cost = usize::from(reference[i - 1].as_ref() != hypothesis[j - 1].as_ref());
            if here == dp[idx(i - 1, j - 1)] + cost {
                subs += cost;
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && here == dp[idx(i - 1, j)] + 1 {
            dels += 1;
            i -= 1;
            continue;
        }
        ins += 1;
        j -= 1;
    }

    let edits = subs + dels + ins;
    debug_assert_eq!(edits, dp[idx(m, n)]);
    Ok(WerBreakdown {
        substitutions: subs,
        deletions: dels,
        insertions: ins,
        ref_len: m,
        wer: edits as f64 / m as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent oracle: the textbook exponential recursion, no table.
    fn lev_oracle(a: &[char], b: &[char]) -> usize {
        match (a.split_first(), b.split_first()) {
            (None, _) => b.len(),
            (_, None) => a.len(),
            (Some((ca, ta)), Some((cb, tb))) => {
                if ca == cb {
                    lev_oracle(ta, tb)
                } else {
                    1 + lev_oracle(ta, b).min(lev_oracle(a, tb)).min(lev_oracle(ta, tb))
                }
            }
        }
    }

    fn lev_oracle_str(a: &str, b: &str) -> usize {
        let a: Vec<char> = a.chars().collect();
        let b: Vec<char> = b.chars().collect();
        lev_oracle(&a, &b)
    }

    #[test]
    fn levenshtein_examples() {
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("gato", "kato"), 1);
        assert_eq!(levenshtein("coca cola", "coca gola"), 1);
        assert_eq!(lev_oracle_str("gato", "kato"), 1);
        assert_eq!(lev_oracle_str("coca cola", "coca gola"), 1);
    }

    #[test]
    fn levenshtein_counts_scalar_values_not_bytes() {
        assert_eq!(levenshtein("año", "ano"), 1);
        assert_eq!(levenshtein("é", "e"), 1);
    }

    #[test]
    fn normalized_distance_examples() {
        assert_eq!(normalized_distance("abc", "abc"), 0.0);
        assert_eq!(normalized_distance("ab", ""), 1.0);
        let d = normalized_distance("coca cola", "coca gola");
        assert!((d - 1.0 / 9.0).abs() < 1e-12);
        assert_eq!(normalized_distance("", ""), 0.0);
    }

    #[test]
    fn wer_examples() {
        let r = ["quiero", "dos", "coca", "colas"];
        let b = wer(&r, &r).unwrap();
        assert_eq!(b.edits(), 0);
        assert_eq!(b.wer, 0.0);

        let h = ["quiero", "los", "coca", "colas"];
        let b = wer(&r, &h).unwrap();
        assert_eq!(b.substitutions, 1);
        assert_eq!(b.deletions, 0);
        assert_eq!(b.insertions, 0);
        assert_eq!(b.wer, 0.25);

        let b = wer(&["hola"], &[]).unwrap();
        assert_eq!(b.deletions, 1);
        assert_eq!(b.wer, 1.0);

        assert!(wer::<&str>(&[], &["hola"]).is_err());
    }

    #[test]
    fn wer_can_exceed_one() {
        let b = wer(&["a"], &["b", "c", "d"]).unwrap();
        assert!(b.wer > 1.0);
        assert_eq!(b.edits(), 3);
    }

    #[test]
    fn wer_prefers_substitution_over_insert_delete() {
        // "x" vs "y": one substitution, never del+ins.
        let b = wer(&["a", "x", "b"], &["a", "y", "b"]).unwrap();
        assert_eq!((b.substitutions, b.deletions, b.insertions), (1, 0, 0));
    }

    proptest! {
        #[test]
        fn matches_oracle_on_short_strings(
            a in "[abc]{0,6}",
            b in "[abc]{0,6}",
        ) {
            prop_assert_eq!(levenshtein(&a, &b), lev_oracle_str(&a, &b));
        }

        #[test]
        fn is_a_metric(
            a in "[ab]{0,8}",
            b in "[ab]{0,8}",
            c in "[ab]{0,8}",
        ) {
            let dab = levenshtein(&a, &b);
            let dba = levenshtein(&b, &a);
            prop_assert_eq!(dab, dba);
            prop_assert_eq!(dab == 0, a == b);
            let dac = levenshtein(&a, &c);
            let dbc = levenshtein(&b, &c);
            prop_assert!(dac <= dab + dbc);
        }

        #[test]
        fn normalized_distance_is_bounded(
            a in "[abcd]{0,10}",
            b in "[abcd]{0,10}",
        ) {
            let d = normalized_distance(&a, &b);
            prop_assert!((0.0..=1.0).contains(&d));
            prop_assert_eq!(d == 0.0, a == b);
        }

        #[test]
        fn wer_invariants(
            r in proptest::collection::vec("[ab]{1,3}", 1..6),
            h in proptest::collection::vec("[ab]{1,3}", 0..6),
            extra in "[ab]{1,3}",
        ) {
            let identity = wer(&r, &r).unwrap();
            prop_assert_eq!(identity.wer, 0.0);

            let base = wer(&r, &h).unwrap();
            let mut r2 = r.clone();
            let mut h2 = h.clone();
            r2.push(extra.clone());
            h2.push(extra);
            let appended = wer(&r2, &h2).unwrap();
            prop_assert_eq!(base.edits(), appended.edits());
        }
    }
}
