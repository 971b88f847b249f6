//! CSV rows and JSON summaries named by suite and configuration hash.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::json;

use crate::config::RunConfig;
use crate::suites::SuiteReport;

pub struct Written {
    pub csv: PathBuf,
    pub json: PathBuf,
}

pub fn stem(suite: &str, cfg: &RunConfig) -> String {
    format!("{suite}-{}", cfg.hash())
}

pub fn csv_bytes(rep: &SuiteReport) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rep.rows {
        w.serialize(r)?;
    }
    if rep.rows.is_empty() {
        w.write_record(["item", "depth", "seed", "value", "witness"])?;
    }
    Ok(w.into_inner()?)
}

pub fn write(rep: &SuiteReport, cfg: &RunConfig, dir: &Path) -> Result<Written> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let base = dir.join(stem(&rep.suite, cfg));
    let csv = base.with_extension("csv");
    let json_path = base.with_extension("json");
    std::fs::write(&csv, csv_bytes(rep)?).with_context(|| format!("writing {}", csv.display()))?;
    let doc = json!({
        "suite": rep.suite,
        "config": cfg.to_text(),
        "config_hash": cfg.hash(),
        "passed": rep.passed(),
        "assertions": rep.assertions,
        "summary": rep.summary,
    });
    std::fs::write(&json_path, serde_json::to_string_pretty(&doc)?).with_context(|| format!("writing {}", json_path.display()))?;
    std::fs::write(base.with_extension("cfg"), cfg.to_text())?;
    Ok(Written { csv, json: json_path })
}
