use serde::{Deserialize, Serialize};

use super::{CorpusError, Submission};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalizationPrompt {
    pub pair_id: String,
    pub text: String,
}

const INSTRUCTIONS: &str = "Please act as a senior programmer. Based on the programming question (QUESTION), \
identify the erroneous line in the code (RESPONSE 1). Refer to the correct code (RESPONSE 2) to make the judgment.\n\
\n\
It is known that (RESPONSE 1) is the incorrect code, and (RESPONSE 2) is the very similar correct code. \
Based on your judgment, output the line number of the initial erroneous line in (RESPONSE 1). \
Please do not provide any other explanations, just return the line number of the initial error.\n\
\n\
**Note**: You must deeply understand the semantic information of the code. When referencing the correct code, \
do not perform line-by-line comparison and directly return the line number of the first differing line.\n\
\n\
[QUESTION]\n";

const BEFORE_ERRONEOUS: &str = "\n\n[RESPONSE 1]\n[The start of RESPONSE 1]\n";
const BEFORE_CORRECT: &str = "\n[The end of RESPONSE 1]\n\n[RESPONSE 2]\n[The start of RESPONSE 2]\n";
const TAIL: &str = "\n[The end of RESPONSE 2]\n\n[OUTPUT]\n";

/// Number of template characters (bytes) surrounding the three slots.
pub const TEMPLATE_LEN: usize = INSTRUCTIONS.len() + BEFORE_ERRONEOUS.len() + BEFORE_CORRECT.len() + TAIL.len();

/// Fills the divergence-localization template. Slots are inserted verbatim
/// with no escaping; the erroneous program is RESPONSE 1 and the correct one
/// RESPONSE 2.
pub fn emit_localization_prompt(
    pair_id: &str,
    question: &str,
    erroneous: &Submission,
    correct: &Submission,
) -> LocalizationPrompt {
    let err_src = erroneous.source_lines.join("\n");
    let corr_src = correct.source_lines.join("\n");
    let mut text = String::with_capacity(TEMPLATE_LEN + question.len() + err_src.len() + corr_src.len());
    text.push_str(INSTRUCTIONS);
    text.push_str(question);
    text.push_str(BEFORE_ERRONEOUS);
    text.push_str(&err_src);
    text.push_str(BEFORE_CORRECT);
    text.push_str(&corr_src);
    text.push_str(TAIL);
    LocalizationPrompt { pair_id: pair_id.to_string(), text }
}

/// Takes the first integer in a model answer as the 1-based fault line and
/// checks it against the erroneous program's length.
pub fn ingest_localization_answer(raw: &str, erroneous: &Submission) -> Result<usize, CorpusError> {
    let reject = |reason: &str| CorpusError::AnswerRejected { reason: reason.to_string(), raw: raw.to_string() };
    let bytes = raw.as_bytes();
    let start = bytes.iter().position(u8::is_ascii_digit).ok_or_else(|| reject("no integer found"))?;
    let end = bytes[start..].iter().position(|b| !b.is_ascii_digit()).map_or(bytes.len(), |e| start + e);
    let negative = start > 0 && bytes[start - 1] == b'-';
    let value: usize = raw[start..end].parse().map_err(|_| reject("integer too large"))?;
    let len = erroneous.source_lines.len();
    if negative || value == 0 || value > len {
        return Err(reject(&format!("line number outside 1..={len}")));
    }
    Ok(value)
}
