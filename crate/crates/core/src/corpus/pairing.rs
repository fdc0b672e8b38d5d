use serde::{Deserialize, Serialize};

use super::{jaccard, ngram_set, Submission};

/// An erroneous submission matched to its most similar correct sibling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarPair {
    pub correct: Submission,
    pub erroneous: Submission,
    pub jaccard: f64,
}

/// Best correct match for one erroneous submission, retained or not.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Candidate {
    pub correct_index: usize,
    pub jaccard: f64,
}

/// Highest-Jaccard correct submission for each erroneous one (earliest wins
/// ties). `None` when the correct pool is empty.
pub(crate) fn best_matches(correct_pool: &[Submission], erroneous_pool: &[Submission], n: usize) -> Vec<Option<Candidate>> {
    let correct_sets: Vec<_> = correct_pool.iter().map(|s| ngram_set(&s.source_lines, n)).collect();
    erroneous_pool
        .iter()
        .map(|err| {
            let err_set = ngram_set(&err.source_lines, n);
            let mut best: Option<Candidate> = None;
            for (i, set) in correct_sets.iter().enumerate() {
                let j = jaccard(set, &err_set);
                if best.as_ref().is_none_or(|b| j > b.jaccard) {
                    best = Some(Candidate { correct_index: i, jaccard: j });
                }
            }
            best
        })
        .collect()
}

/// Pairs every erroneous submission with its highest-Jaccard correct
/// submission and keeps the pair when the similarity exceeds `threshold`.
/// Each erroneous submission appears in at most one pair; output order
/// follows `erroneous_pool`.
pub fn pair_submissions(
    correct_pool: &[Submission],
    erroneous_pool: &[Submission],
    threshold: f64,
    n: usize,
) -> Vec<SimilarPair> {
    best_matches(correct_pool, erroneous_pool, n)
        .into_iter()
        .zip(erroneous_pool)
        .filter_map(|(cand, err)| {
            let cand = cand?;
            (cand.jaccard > threshold).then(|| SimilarPair {
                correct: correct_pool[cand.correct_index].clone(),
                erroneous: err.clone(),
                jaccard: cand.jaccard,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Verdict;
    use std::collections::HashSet;

    fn sub(id: &str, verdict: Verdict, src: &str) -> Submission {
        Submission::from_source(id, "p1", "u1", verdict, src).unwrap()
    }

    /// Independent 3-gram Jaccard: tokens by hand-written character classes,
    /// windows enumerated with explicit indices.
    fn brute_jaccard3(a: &str, b: &str) -> f64 {
        fn toks(s: &str) -> Vec<String> {
            let mut out = Vec::new();
            let mut cur = String::new();
            for ch in s.chars() {
                if ch.is_alphanumeric() || ch == '_' {
                    cur.push(ch);
                } else {
                    if !cur.is_empty() {
                        out.push(std::mem::take(&mut cur));
                    }
                    if !ch.is_whitespace() {
                        out.push(ch.to_string());
                    }
                }
            }
            if !cur.is_empty() {
                out.push(cur);
            }
            out
        }
        fn grams(s: &str) -> HashSet<String> {
            let t = toks(s);
            let mut g = HashSet::new();
            let mut i = 0;
            while i + 3 <= t.len() {
                g.insert(format!("{}\u{1}{}\u{1}{}", t[i], t[i + 1], t[i + 2]));
                i += 1;
            }
            g
        }
        let (ga, gb) = (grams(a), grams(b));
        let inter = ga.iter().filter(|x| gb.contains(*x)).count();
        let union = ga.len() + gb.len() - inter;
        inter as f64 / union as f64
    }

    const CORRECT: &str = "n = int(input())\nvals = list(map(int, input().split()))\ntotal = 0\nfor v in vals:\n    if v > 0:\n        total += v\nprint(total)\nprint(n)\nprint(len(vals))";
    const ERRONEOUS: &str = "n = int(input())\nvals = list(map(int, input().split()))\ntotal = 0\nfor v in vals:\n    if v >= 0:\n        total += v\nprint(total)\nprint(n)\nprint(len(vals))";

    #[test]
    fn identical_text_is_retained_with_unit_similarity() {
        let c = sub("c", Verdict::Correct, CORRECT);
        let e = sub("e", Verdict::Incorrect, CORRECT);
        let pairs = pair_submissions(&[c], &[e], 0.9, 3);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].jaccard, 1.0);
    }

    #[test]
    fn unrelated_programs_are_dropped() {
        let c = sub("c", Verdict::Correct, CORRECT);
        let e = sub("e", Verdict::Incorrect, "import sys\nsys.exit(0)");
        assert!(pair_submissions(&[c], &[e], 0.9, 3).is_empty());
    }

    #[test]
    fn near_duplicate_matches_brute_force_and_is_retained() {
        let oracle = brute_jaccard3(CORRECT, ERRONEOUS);
        // 50 shared windows out of 55, frozen from the oracle above.
        assert!((oracle - 50.0 / 55.0).abs() < 1e-12, "oracle = {oracle}");
        let c = sub("c", Verdict::Correct, CORRECT);
        let e = sub("e", Verdict::Incorrect, ERRONEOUS);
        let pairs = pair_submissions(&[c], &[e], 0.9, 3);
        assert_eq!(pairs.len(), 1);
        assert!((pairs[0].jaccard - oracle).abs() < 1e-12);
    }

    #[test]
    fn picks_the_most_similar_correct_submission() {
        let far = sub("far", Verdict::Correct, "print(sum(map(int, input().split())))");
        let near = sub("near", Verdict::Correct, CORRECT);
        let e = sub("e", Verdict::Incorrect, ERRONEOUS);
        let pairs = pair_submissions(&[far, near], &[e], 0.9, 3);
        assert_eq!(pairs[0].correct.submission_id, "near");
    }

    #[test]
    fn empty_pools() {
        let e = sub("e", Verdict::Incorrect, ERRONEOUS);
        assert!(pair_submissions(&[], &[e], 0.9, 3).is_empty());
        assert!(pair_submissions(&[], &[], 0.9, 3).is_empty());
    }
}
