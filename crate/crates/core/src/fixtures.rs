//! Built-in scripted scenarios used by tests, benches and the CLI demos.
//!
//! Each [`ScriptedTask`] bundles a generator scenario, an evaluator table, a
//! reference program and I/O tests, so a guarded run can be checked end to
//! end without any model.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Problem, RawSubmission, TestCase, Verdict};
use crate::evaluator::{prefix_key, ScriptedTable};
use crate::generator::{Alternative, Scenario, ScenarioLine, TokenId};
use crate::guard::{GuardConfig, Policy, TimingMode};
use crate::hashing::stable_hash_bytes;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedTask {
    pub task_id: String,
    pub question: String,
    pub scenario: Scenario,
    pub table: ScriptedTable,
    /// The intended program, one entry per line.
    pub reference: Vec<String>,
    pub tests: Vec<TestCase>,
}

/// Toy vocabulary id for a token string.
pub fn token_id(token: &str) -> TokenId {
    TokenId((stable_hash_bytes(token.as_bytes()) % 50_000) as u32)
}

/// Alternative whose first token is the first lexical token of `text`.
pub fn alt(text: &str, weight: f64) -> Alternative {
    let first = tokenize(text).first().map(|t| token_id(t));
    Alternative { text: text.into(), first_token: first, weight }
}

/// Alternative with an explicit first token, for subword-style vocabularies
/// where the first token is shorter than the first word.
pub fn alt_with_token(text: &str, token: &str, weight: f64) -> Alternative {
    Alternative { text: text.into(), first_token: Some(token_id(token)), weight }
}

fn only(text: &str) -> ScenarioLine {
    ScenarioLine { alternatives: vec![alt(text, 1.0)] }
}

fn key(prefix: &[String], line: &str) -> String {
    let mut lines = prefix.to_vec();
    lines.push(line.to_string());
    prefix_key(&lines)
}

fn test(stdin: &str, out: &str) -> TestCase {
    TestCase { stdin: stdin.into(), expected_stdout: out.into() }
}

/// Deterministic guard settings for scripted runs: greedy decoding and
/// simulated timing, so traces are byte-reproducible.
pub fn scripted_guard_config(policy: Policy) -> GuardConfig {
    GuardConfig {
        policy,
        temperature: 0.0,
        timing: TimingMode::Simulated { ms_per_token: 2.0, ms_per_score: 15.0 },
        ..GuardConfig::default()
    }
}

pub const BRACKETS_QUESTION: &str = "Given a string of parentheses, insert the fewest parentheses so that it \
becomes balanced. Print the lexicographically smallest such string.";

/// Balanced-parentheses task with two faulty spots. At line 5 the heaviest
/// candidate `C = []` scores 0.38; one penalty on its first token lets
/// `for i in s:` through at 0.76. At line 9 a line opening with token `b`
/// scores 0.21 twice before the second penalty lets the correct line win.
pub fn brackets() -> ScriptedTask {
    let reference: Vec<String> = [
        "s = input()",
        "depth = 0",
        "need = 0",
        "# track unmatched brackets",
        "for i in s:",
        "    if i == '(':",
        "        depth += 1",
        "    elif depth > 0:",
        "        depth -= 1",
        "    else:",
        "        need += 1",
        "print('(' * need + s + ')' * depth)",
    ]
    .map(String::from)
    .to_vec();

    let mut lines: Vec<ScenarioLine> = reference.iter().map(|l| only(l)).collect();
    lines[4] = ScenarioLine { alternatives: vec![alt("C = []", 0.50), alt("for i in s:", 0.45), alt("while s:", 0.05)] };
    lines[8] = ScenarioLine {
        alternatives: vec![
            alt_with_token("        bracket = s[0]", "b", 0.45),
            alt("        depth -= 1", 0.35),
            alt("        need -= 1", 0.20),
        ],
    };

    let mut entries = BTreeMap::new();
    entries.insert(key(&reference[..4], "C = []"), 0.38);
    entries.insert(key(&reference[..4], "for i in s:"), 0.76);
    entries.insert(key(&reference[..8], "        bracket = s[0]"), 0.21);
    entries.insert(key(&reference[..8], "        depth -= 1"), 0.83);

    ScriptedTask {
        task_id: "brackets".into(),
        question: BRACKETS_QUESTION.into(),
        scenario: Scenario { end_after: lines.len(), lines },
        table: ScriptedTable { entries, default: 0.9 },
        reference,
        tests: vec![test("())\n", "(())\n"), test(")(\n", "()()\n"), test("((\n", "(())\n")],
    }
}

/// Tasks whose fault line is won, under greedy decoding, by a wrong
/// alternative until its first token has been penalized once or twice.
///
/// Each program assigns two to four values, sums them, must scale the sum and
/// print it. The wrong candidates print early instead and share the first
/// token `print`, so unbiased resampling keeps proposing them while a
/// penalty on `print` hands the line to the correct `total = total * m`.
pub fn planted_fault_suite(count: usize, seed: u64) -> Vec<ScriptedTask> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let values: Vec<u32> = (0..rng.random_range(2..=4)).map(|_| rng.random_range(1..=9)).collect();
            let mult: u32 = rng.random_range(2..=5);
            let penalties_needed = 1 + (i % 2);
            let second_bad = rng.random_bool(0.5);

            let mut reference: Vec<String> =
                values.iter().enumerate().map(|(j, v)| format!("v{} = {v}", j + 1)).collect();
            let names: Vec<String> = (1..=values.len()).map(|j| format!("v{j}")).collect();
            reference.push(format!("total = {}", names.join(" + ")));
            let prefix = reference.clone();
            let good = format!("total = total * {mult}");
            reference.push(good.clone());
            reference.push("print(total)".into());

            // Greedy picks the heavier bad line until enough 0.8 penalties.
            let (bad_w, good_w) = if penalties_needed == 1 { (0.50, 0.45) } else { (0.55, 0.40) };
            let bad = "print(total)".to_string();
            let mut alternatives = vec![alt(&bad, bad_w), alt(&good, good_w)];
            let rest = 1.0 - bad_w - good_w;
            let bad2 = format!("print(total + {mult})");
            if second_bad {
                alternatives.push(alt(&bad2, rest));
            } else {
                alternatives.push(alt("total = -total", rest));
            }

            let mut lines: Vec<ScenarioLine> = prefix.iter().map(|l| only(l)).collect();
            lines.push(ScenarioLine { alternatives });
            lines.push(only("print(total)"));

            let mut entries = BTreeMap::new();
            entries.insert(key(&prefix, &bad), 0.2);
            entries.insert(key(&prefix, &bad2), 0.3);
            entries.insert(key(&prefix, "total = -total"), 0.1);
            let expected = values.iter().sum::<u32>() * mult;
            ScriptedTask {
                task_id: format!("planted_{i:02}"),
                question: format!("Print {mult} times the sum of {values:?}."),
                scenario: Scenario { end_after: lines.len(), lines },
                table: ScriptedTable { entries, default: 0.9 },
                reference,
                tests: vec![test("", &format!("{expected}\n"))],
            }
        })
        .collect()
}

/// Two tasks for auditing rollbacks under the penalty policy with greedy
/// decoding. `audit_a` rolls back four times: twice on a wrong line 3, once
/// on the correct line 5 (a false alarm), once on a wrong line 7. `audit_b`
/// never rolls back.
pub fn rollback_audit_suite() -> Vec<ScriptedTask> {
    let reference: Vec<String> = [
        "n = int(input())",
        "xs = list(range(n))",
        "evens = [x for x in xs if x % 2 == 0]",
        "# report",
        "count = len(evens)",
        "half = count // 2",
        "print(count, half)",
    ]
    .map(String::from)
    .to_vec();
    let bad3 = "odds = [x for x in xs if x % 2]";
    let alt5 = "size = len(evens)";
    let bad7 = "print(count)";

    let mut lines: Vec<ScenarioLine> = reference.iter().map(|l| only(l)).collect();
    lines[2] = ScenarioLine { alternatives: vec![alt(bad3, 0.60), alt(&reference[2], 0.40)] };
    lines[4] = ScenarioLine { alternatives: vec![alt(&reference[4], 0.55), alt(alt5, 0.45)] };
    lines[5] = only("half = size // 2");
    let count_is = "count = size";
    lines[6] = ScenarioLine { alternatives: vec![alt(bad7, 0.45), alt(count_is, 0.40)] };
    let mut after: Vec<ScenarioLine> = vec![only("print(count, half)")];
    lines.append(&mut after);

    let mut entries = BTreeMap::new();
    entries.insert(key(&reference[..2], bad3), 0.2);
    entries.insert(key(&reference[..4], &reference[4]), 0.45);
    let mut realized: Vec<String> = reference[..4].to_vec();
    realized.push(alt5.into());
    realized.push("half = size // 2".into());
    entries.insert(key(&realized, bad7), 0.3);

    let a = ScriptedTask {
        task_id: "audit_a".into(),
        question: "Print how many even numbers are below n, and half that count.".into(),
        scenario: Scenario { end_after: lines.len(), lines },
        table: ScriptedTable { entries, default: 0.9 },
        reference,
        tests: vec![test("5\n", "3 1\n")],
    };

    let simple: Vec<String> = ["n = int(input())", "print(n * n)"].map(String::from).to_vec();
    let b = ScriptedTask {
        task_id: "audit_b".into(),
        question: "Print n squared.".into(),
        scenario: Scenario { end_after: 2, lines: simple.iter().map(|l| only(l)).collect() },
        table: ScriptedTable { entries: BTreeMap::new(), default: 0.9 },
        reference: simple,
        tests: vec![test("4\n", "16\n")],
    };
    vec![a, b]
}

const STATS: &str = "n = int(input())
xs = list(map(int, input().split()))
total = 0
count = 0
for x in xs:
    total = total + x
    count = count + 1
best = xs[0]
worst = xs[0]
for x in xs:
    if x > best:
        best = x
    if x < worst:
        worst = x
span = best - worst
mean = total // count
print(total)
print(span)
print(mean)
print(best, worst)
squares = 0
for x in xs:
    squares = squares + x * x
print(squares)
";

const LETTERS: &str = "s = input().strip()
vowels = 'aeiou'
count_v = 0
count_c = 0
for ch in s:
    if ch in vowels:
        count_v = count_v + 1
    elif ch.isalpha():
        count_c = count_c + 1
upper = s.upper()
lower = s.lower()
rev = s[::-1]
same = rev == s
length = len(s)
half = length // 2
print(count_v, count_c)
print(upper)
print(rev)
print(same)
print(half)
";

const DIGITS: &str = "n = int(input())
digits = [int(d) for d in str(n)]
digit_sum = 0
for d in digits:
    digit_sum = digit_sum + d
product = 1
for d in digits:
    product = product * d
evens = 0
odds = 0
for d in digits:
    if d % 2 == 0:
        evens = evens + 1
    else:
        odds = odds + 1
largest = max(digits)
smallest = min(digits)
print(digit_sum)
print(product)
print(evens, odds)
print(largest - smallest)
value = 0
for d in digits:
    value = value * 10 + d
print(value == n)
";

fn edit(base: &str, edits: &[(usize, &str)]) -> String {
    let mut lines: Vec<String> = base.lines().map(String::from).collect();
    for (line, text) in edits {
        lines[line - 1] = text.to_string();
    }
    lines.join("\n") + "\n"
}

fn submission(problem: &str, user: &str, verdict: Verdict, source: String) -> RawSubmission {
    RawSubmission { submission_id: None, problem_id: problem.into(), user_id: user.into(), verdict, source }
}

/// Inputs for a corpus build over three problems and four users each, one
/// correct and one erroneous submission per user: nine single-line pairs and
/// three multi-line pairs, one of which has a localization answer. A fifth
/// and sixth user on problem `stats` contribute submissions that must be
/// filtered out (syntax error, runtime error, dissimilar program).
pub struct PairCorpus {
    pub submissions: Vec<RawSubmission>,
    pub problems: BTreeMap<String, Problem>,
    pub answers: BTreeMap<String, String>,
}

pub fn pair_corpus() -> PairCorpus {
    type Edits = &'static [(usize, &'static str)];
    let specs: [(&str, &str, &str, TestCase, [Edits; 4]); 3] = [
        (
            "stats",
            STATS,
            "Read n integers and print their sum, range, integer mean, and the max and min.",
            test("4\n1 2 3 10\n", "16\n9\n4\n10 1\n114\n"),
            [
                &[(6, "    total = total - x")],
                &[(15, "span = best + worst")],
                &[(11, "    if x < best:")],
                &[(16, "mean = total % count"), (19, "print(span)")],
            ],
        ),
        (
            "letters",
            LETTERS,
            "Count vowels and consonants of a word, then print it upper-cased, reversed, whether it is a palindrome, and half its length.",
            test("level\n", "2 3\nLEVEL\nlevel\nTrue\n2\n"),
            [
                &[(7, "        count_v = count_v + 2")],
                &[(12, "rev = s[1:]")],
                &[(15, "half = length // 3")],
                &[(11, "lower = s.lower().strip()"), (13, "same = rev != s")],
            ],
        ),
        (
            "digits",
            DIGITS,
            "Print the digit sum, digit product, counts of even and odd digits, and the spread of the digits of n.",
            test("2349\n", "18\n216\n2 2\n7\nTrue\n"),
            [
                &[(5, "    digit_sum = digit_sum + d + 1")],
                &[(6, "product = 0")],
                &[(16, "largest = min(digits)")],
                &[(6, "product = 1 * 1"), (9, "evens = 1")],
            ],
        ),
    ];

    let mut submissions = Vec::new();
    let mut problems = BTreeMap::new();
    for (pid, base, question, case, edits) in specs {
        problems.insert(pid.to_string(), Problem { question: question.into(), tests: vec![case] });
        for (u, e) in edits.iter().enumerate() {
            let user = format!("u{}", u + 1);
            submissions.push(submission(pid, &user, Verdict::Correct, base.to_string()));
            submissions.push(submission(pid, &user, Verdict::Incorrect, edit(base, e)));
        }
    }
    submissions.push(submission("stats", "u5", Verdict::Correct, edit(STATS, &[(20, "print(best, worst")])));
    submissions.push(submission("stats", "u5", Verdict::Incorrect, edit(STATS, &[(16, "mean = total // 0")])));
    submissions.push(submission("stats", "u6", Verdict::Correct, STATS.to_string()));
    submissions.push(submission("stats", "u6", Verdict::Incorrect, "print(42)\n".into()));

    let mut answers = BTreeMap::new();
    answers.insert("stats:u4:0".to_string(), "The faulty line is 16.".to_string());
    PairCorpus { submissions, problems, answers }
}

/// One program per failure class for a Python runner: unparseable, raising,
/// and printing the wrong answer. All three target the same test.
pub fn taxonomy_programs() -> (Vec<(&'static str, String)>, Vec<TestCase>) {
    let programs = vec![
        ("unparseable", "n = int(input())\nprint(n * 2\n".to_string()),
        ("raising", "n = int(input())\nprint(n // 0)\n".to_string()),
        ("wrong_answer", "n = int(input())\nprint(n * 3)\n".to_string()),
    ];
    (programs, vec![test("21\n", "42\n")])
}
