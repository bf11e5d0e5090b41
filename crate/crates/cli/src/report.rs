//! Human-readable summary table of a scenario bundle.

use std::path::Path;

use mcf_core::error::{Error, Result};

/// One row per diagnostic: name, value, anchor when pinned, pass/fail.
pub fn emit_report(bundle_dir: &Path) -> Result<String> {
    let path = bundle_dir.join("report.json");
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Error::Io(format!("missing bundle: {path:?}: {e}")))?;
    let report: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::Io(format!("{path:?}: {e}")))?;

    let mut out = String::new();
    let scenario = report["scenario"].as_str().unwrap_or("?");
    let stop = report["track"]["stop_reason"].as_str().unwrap_or("?");
    let snaps = report["track"]["snapshots"].as_u64().unwrap_or(0);
    out.push_str(&format!(
        "scenario {scenario}: {snaps} snapshots, stop {stop}\n"
    ));
    out.push_str(&format!(
        "{:<22} {:>16} {:>16} {:>14} {:>8}\n",
        "diagnostic", "value", "anchor", "verdict", "status"
    ));

    let diags = report["diagnostics"].as_array().cloned().unwrap_or_default();
    let failures = report["failures"].as_array().cloned().unwrap_or_default();
    if diags.is_empty() && failures.is_empty() {
        return Err(Error::Refused("bundle contains no diagnostics".into()));
    }
    for d in &diags {
        let op = d["op"].as_str().unwrap_or("?");
        let value = d["value"]
            .as_f64()
            .map(|v| format!("{v:.6}"))
            .unwrap_or_else(|| "-".into());
        let anchor = d["anchor"]
            .as_f64()
            .map(|v| format!("{v:.6}"))
            .unwrap_or_else(|| "-".into());
        let verdict = d["verdict"].as_str().unwrap_or("-");
        let status = match d["pass"].as_bool() {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "-",
        };
        out.push_str(&format!(
            "{op:<22} {value:>16} {anchor:>16} {verdict:>14} {status:>8}\n"
        ));
    }
    for f in &failures {
        let op = f["op"].as_str().unwrap_or("?");
        let err = f["error"].as_str().unwrap_or("?");
        out.push_str(&format!("{op:<22} {:>16} {:>16} {:>14} {:>8}  {err}\n", "-", "-", "-", "FAIL"));
    }
    Ok(out)
}
