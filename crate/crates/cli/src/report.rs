//! `report.md` from the artifacts of an earlier run.

use std::fmt::Write as _;
use std::path::Path;

use crate::artifacts::{manifest_path, sha256_hex, Manifest, Summary, SUMMARY};
use crate::error::{CliError, CliResult};

pub const REPORT: &str = "report.md";

/// Reads `summary.json` and `manifest.json` from `dir`, re-checks file checksums and
/// writes `report.md`. Returns whether every check passed.
pub fn emit_report(dir: &Path) -> CliResult<bool> {
    let read = |name: &Path| -> CliResult<Vec<u8>> {
        std::fs::read(name).map_err(|_| CliError::Missing(format!("{} not found", name.display())))
    };
    let summary: Summary = serde_json::from_slice(&read(&dir.join(SUMMARY))?)?;
    let manifest: Manifest = serde_json::from_slice(&read(&manifest_path(dir))?)?;

    let mut integrity = Vec::new();
    for f in &manifest.files {
        let ok = match std::fs::read(dir.join(&f.name)) {
            Ok(bytes) => sha256_hex(&bytes) == f.sha256,
            Err(_) => return Err(CliError::Missing(format!("{} listed in the manifest but absent", f.name))),
        };
        integrity.push((f.name.as_str(), ok));
    }
    let intact = integrity.iter().all(|(_, ok)| *ok);
    let passed = summary.passed() && intact;

    let mark = |ok: bool| if ok { "PASS" } else { "FAIL" };
    let mut md = String::new();
    writeln!(md, "# pinlab {} run\n", summary.command).unwrap();
    writeln!(md, "Overall: **{}**\n", mark(passed)).unwrap();
    writeln!(md, "- seed: {}", manifest.seed).unwrap();
    writeln!(md, "- version: {}", manifest.version).unwrap();
    writeln!(md, "- generator: {}", manifest.generator).unwrap();
    writeln!(md, "- threads: {}", manifest.threads).unwrap();
    writeln!(md, "- wall clock: {:.2} s\n", manifest.wall_clock_seconds).unwrap();
    writeln!(md, "## Checks\n\n| check | result | detail |\n|---|---|---|").unwrap();
    for c in &summary.checks {
        writeln!(md, "| {} | {} | {} |", c.name, mark(c.pass), c.detail.replace('|', "\\|")).unwrap();
    }
    writeln!(md, "\n## Files\n\n| file | sha256 | checksum |\n|---|---|---|").unwrap();
    for (f, (_, ok)) in manifest.files.iter().zip(&integrity) {
        writeln!(md, "| {} | `{}` | {} |", f.name, f.sha256, mark(*ok)).unwrap();
    }
    writeln!(md, "\n## Values\n\n```json\n{}\n```", serde_json::to_string_pretty(&summary.values)?).unwrap();
    std::fs::write(dir.join(REPORT), md)?;
    Ok(passed)
}
