use super::{CodePair, CorpusError, DivergenceSource, FragmentSample, Label, Split};

/// Cuts both programs after the divergence line, giving a correct-labeled and
/// an incorrect-labeled prefix of equal length.
pub fn slice_pair(pair: &CodePair, question: &str, split: Split) -> Result<(FragmentSample, FragmentSample), CorpusError> {
    let line = pair.divergence_line;
    let limit = pair.correct.source_lines.len().min(pair.erroneous.source_lines.len());
    if line == 0 || line > limit {
        return Err(CorpusError::DivergenceOutOfRange { line, limit });
    }
    if pair.divergence_source == DivergenceSource::PositionalDiff
        && pair.correct.source_lines[line - 1] == pair.erroneous.source_lines[line - 1]
    {
        return Err(CorpusError::NoDivergence);
    }
    let fragment = |lines: &[String], label| FragmentSample {
        problem_id: pair.erroneous.problem_id.clone(),
        question: question.to_string(),
        prefix_lines: lines[..line].to_vec(),
        label,
        pair_id: pair.pair_id.clone(),
        split,
    };
    Ok((
        fragment(&pair.correct.source_lines, Label::Correct),
        fragment(&pair.erroneous.source_lines, Label::Incorrect),
    ))
}
