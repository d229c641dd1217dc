//! Text tables for `--table`.

use std::fmt::Write;

use pbr_monty::qcore::ProbabilityTable;
use pbr_monty::OutputEnvelope;
use serde_json::Value;

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// One line per result: key, exact value (if any), decimal.
pub fn table(env: &OutputEnvelope) -> String {
    let mut out = String::new();
    let params: Vec<String> = env.parameters.iter().map(|(k, v)| format!("{k}={}", plain(v))).collect();
    let _ = writeln!(out, "{}  {}", env.command, params.join("  "));
    let width = env.float_results.keys().map(String::len).max().unwrap_or(0).max(3);
    let _ = writeln!(out, "{:width$}  {:>12}  {:>14}", "key", "exact", "decimal");
    for (key, value) in &env.float_results {
        let exact = env.exact_value(key).map(ToString::to_string).unwrap_or_default();
        let _ = writeln!(out, "{key:width$}  {exact:>12}  {value:>14.10}");
    }
    let mut meta = Vec::new();
    if let Some(seed) = env.metadata.seed {
        meta.push(format!("seed={seed}"));
    }
    if let Some(trials) = env.metadata.trials {
        meta.push(format!("trials={trials}"));
    }
    meta.push(format!("version={}", env.metadata.version));
    let _ = writeln!(out, "{}", meta.join("  "));
    out
}

/// Rows are preparations Ψ1..Ψ4, columns outcomes Φ1..Φ4.
pub fn born_grid(t: &ProbabilityTable) -> String {
    let mut out = String::from("      Φ1    Φ2    Φ3    Φ4\n");
    for (h, row) in t.rows().iter().enumerate() {
        let _ = write!(out, "Ψ{} ", h + 1);
        for p in row {
            let _ = write!(out, "{p:>6}");
        }
        out.push('\n');
    }
    out
}
