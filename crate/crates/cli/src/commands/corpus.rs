use std::collections::BTreeMap;
use std::path::Path;

use lineguard_core::corpus::{build_corpus, read_answers, read_submissions, write_corpus, CorpusConfig, CorpusError, Problem};

use crate::config::{Overrides, RunConfig};
use crate::error::{CliError, CliResult, EXIT_PARTIAL};
use crate::manifest::RunManifest;

fn config_err(e: CorpusError) -> CliError {
    CliError::config(e.to_string())
}

/// Builds the fragment corpus described by the config's `corpus` section.
pub fn build(config_path: &Path, overrides: &Overrides) -> CliResult<u8> {
    let (cfg, raw) = RunConfig::load(config_path, overrides)?;
    let mut manifest = RunManifest::start("corpus build", cfg.hash());
    manifest.digest(config_path, &raw);
    let section = cfg.corpus.as_ref().ok_or_else(|| CliError::config("config has no \"corpus\" section"))?;
    let runner = cfg.runner.clone().ok_or_else(|| CliError::config("corpus build needs a \"runner\""))?;

    manifest.digest_file(&section.submissions)?;
    manifest.digest_file(&section.problems)?;
    let submissions = read_submissions(&section.submissions).map_err(config_err)?;
    let problems_text = std::fs::read_to_string(&section.problems)
        .map_err(|e| CliError::config(format!("{}: {e}", section.problems.display())))?;
    let problems: BTreeMap<String, Problem> = serde_json::from_str(&problems_text)
        .map_err(|e| CliError::config(format!("{}: {e}", section.problems.display())))?;
    let answers = match &section.answers {
        Some(p) => {
            manifest.digest_file(p)?;
            read_answers(p).map_err(config_err)?
        }
        None => BTreeMap::new(),
    };

    let mut corpus_cfg = CorpusConfig::new(runner);
    if let Some(n) = section.ngram {
        corpus_cfg.ngram = n;
    }
    if let Some(t) = section.threshold {
        corpus_cfg.threshold = t;
    }
    if let Some(r) = section.split_ratios {
        corpus_cfg.split_ratios = r;
    }
    let build = build_corpus(&submissions, &problems, &answers, &corpus_cfg, cfg.jobs).map_err(config_err)?;
    write_corpus(&build, &cfg.out_dir).map_err(|e| CliError::io(e.to_string()))?;

    let c = &build.manifest.counts;
    println!(
        "pairs {} (single {}, multi {}, localized {}), pending prompts {}, fragments {}, failures {}",
        c.pairs_retained,
        c.single_line_pairs,
        c.multi_line_pairs,
        c.localized_pairs,
        c.pending_prompts,
        c.fragments,
        build.manifest.failures
    );
    let code = if build.manifest.failures > 0 { EXIT_PARTIAL } else { 0 };
    manifest.finish(
        &cfg.out_dir,
        serde_json::json!({
            "exit_code": code,
            "fragments": c.fragments,
            "pairs": c.pairs_retained,
            "pending_prompts": c.pending_prompts,
            "failures": build.manifest.failures,
        }),
    )?;
    Ok(code)
}
