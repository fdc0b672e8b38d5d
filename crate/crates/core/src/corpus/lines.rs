/// Splits on LF or CRLF, strips trailing whitespace from every line and drops
/// trailing empty lines.
pub fn normalize_lines(raw_source: &str) -> Vec<String> {
    let mut lines: Vec<String> = raw_source
        .split('\n')
        .map(|l| l.trim_end().to_string())
        .collect();
    while lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    lines
}
