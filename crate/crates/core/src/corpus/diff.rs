use std::collections::BTreeSet;

use super::CorpusError;

/// 1-based indices of erroneous-side lines that diverge from the correct side.
///
/// Equal-length programs are compared position by position. Programs of
/// different length are aligned by longest common subsequence after their
/// common prefix and suffix are removed; every unaligned erroneous line is
/// reported. When the first alignment gap is a deletion (a correct-side line
/// with no erroneous counterpart), the erroneous position where that line
/// would sit is reported as well, so `min(D)` is always the first point of
/// divergence. A deletion at the very end yields `len(erroneous) + 1`.
pub fn diff_indices<S: AsRef<str> + PartialEq>(correct: &[S], erroneous: &[S]) -> BTreeSet<usize> {
    if correct.len() == erroneous.len() {
        return correct
            .iter()
            .zip(erroneous)
            .enumerate()
            .filter(|(_, (c, e))| c.as_ref() != e.as_ref())
            .map(|(i, _)| i + 1)
            .collect();
    }

    let prefix = correct
        .iter()
        .zip(erroneous)
        .take_while(|(c, e)| c.as_ref() == e.as_ref())
        .count();
    let max_suffix = correct.len().min(erroneous.len()) - prefix;
    let suffix = correct
        .iter()
        .rev()
        .zip(erroneous.iter().rev())
        .take(max_suffix)
        .take_while(|(c, e)| c.as_ref() == e.as_ref())
        .count();

    let c_mid = &correct[prefix..correct.len() - suffix];
    let e_mid = &erroneous[prefix..erroneous.len() - suffix];
    let matched = lcs_matched_erroneous(c_mid, e_mid);

    let mut out: BTreeSet<usize> = matched
        .iter()
        .enumerate()
        .filter(|(_, m)| !**m)
        .map(|(j, _)| prefix + j + 1)
        .collect();
    // Lengths differ, so something breaks right after the common prefix.
    out.insert(prefix + 1);
    out
}

/// For each erroneous-side line, whether a longest common subsequence with
/// `correct` uses it.
fn lcs_matched_erroneous<S: AsRef<str>>(correct: &[S], erroneous: &[S]) -> Vec<bool> {
    let (n, m) = (correct.len(), erroneous.len());
    let mut table = vec![0u32; (n + 1) * (m + 1)];
    let at = |i: usize, j: usize| i * (m + 1) + j;
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            table[at(i, j)] = if correct[i].as_ref() == erroneous[j].as_ref() {
                table[at(i + 1, j + 1)] + 1
            } else {
                table[at(i + 1, j)].max(table[at(i, j + 1)])
            };
        }
    }
    let mut matched = vec![false; m];
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        if correct[i].as_ref() == erroneous[j].as_ref() {
            matched[j] = true;
            i += 1;
            j += 1;
        } else if table[at(i + 1, j)] >= table[at(i, j + 1)] {
            i += 1;
        } else {
            j += 1;
        }
    }
    matched
}

/// `min(D)`; an empty set means the programs do not diverge.
pub fn first_divergence(diff: &BTreeSet<usize>) -> Result<usize, CorpusError> {
    diff.first().copied().ok_or(CorpusError::NoDivergence)
}
