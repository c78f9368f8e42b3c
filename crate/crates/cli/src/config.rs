//! Flat key-value config files mirroring CLI flags, and the resolved-config
//! echo every run writes into its output directory.
//!
//! A config file holds `key = value` lines (keys are long flag names without
//! the leading dashes, `#` starts a comment). File values act as defaults;
//! flags given on the command line override them.

use std::fmt::Write as _;
use std::path::Path;

/// Expands `--config FILE` in raw argv by splicing the file's entries as
/// long flags directly after the subcommand, before user flags, so explicit
/// flags win.
pub fn merge_config_file(argv: Vec<String>) -> Result<Vec<String>, String> {
    let Some(pos) = argv.iter().position(|a| a == "--config") else {
        return Ok(argv);
    };
    if pos + 1 >= argv.len() {
        return Err("--config requires a file path".into());
    }
    let path = argv[pos + 1].clone();
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{path}: {e}"))?;
    let mut injected = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("{path}:{}: expected key = value", lineno + 1))?;
        injected.push(format!("--{}", key.trim()));
        injected.push(value.trim().to_string());
    }
    let mut out: Vec<String> = Vec::with_capacity(argv.len() + injected.len());
    // argv: program, subcommand, rest (with --config FILE removed)
    let mut rest: Vec<String> = argv.clone();
    rest.drain(pos..=pos + 1);
    if rest.len() < 2 {
        return Err("--config requires a subcommand".into());
    }
    out.extend(rest[..2].iter().cloned());
    out.extend(injected);
    out.extend(rest[2..].iter().cloned());
    Ok(out)
}

/// Writes `resolved-config.txt` with the fully resolved key-value pairs.
pub fn write_resolved_config(
    out_dir: &Path,
    subcommand: &str,
    pairs: &[(&str, String)],
) -> std::io::Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let mut text = format!("subcommand = {subcommand}\n");
    for (k, v) in pairs {
        let _ = writeln!(text, "{k} = {v}");
    }
    std::fs::write(out_dir.join("resolved-config.txt"), text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_entries_splice_before_user_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "seed = 5\ncount = 7 # comment\n").unwrap();
        let argv: Vec<String> = [
            "t3cen",
            "gen-data",
            "--config",
            path.to_str().unwrap(),
            "--seed",
            "9",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let merged = merge_config_file(argv).unwrap();
        assert_eq!(
            merged,
            vec!["t3cen", "gen-data", "--seed", "5", "--count", "7", "--seed", "9"]
        );
    }

    #[test]
    fn missing_file_is_an_error() {
        let argv: Vec<String> = ["t3cen", "lift", "--config", "/nonexistent"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert!(merge_config_file(argv).is_err());
    }
}
