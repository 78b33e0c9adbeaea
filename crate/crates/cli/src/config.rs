//! `--config` files: `key = value` lines with the long flag names as keys.
//! Entries are appended to the command line unless the flag is already
//! there. A `command` key supplies the subcommand words when the command
//! line has none.

use std::fs;

fn given(argv: &[String], key: &str) -> bool {
    let flag = format!("--{key}");
    argv.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")))
}

fn config_path(argv: &[String]) -> Option<String> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

pub fn merge(mut argv: Vec<String>) -> Result<Vec<String>, String> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let mut command = None;
    let mut extra = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config {path} line {}: expected key = value", no + 1))?;
        let (k, v) = (k.trim().trim_start_matches("--"), v.trim());
        match k {
            "config" => return Err(format!("config {path} line {}: nested config files are not supported", no + 1)),
            "command" => command = Some(v.to_string()),
            _ if given(&argv, k) => {}
            _ => extra.push(format!("--{k}={v}")),
        }
    }
    // before the subcommand only global options (all of which take a value) may appear
    let mut i = 1;
    let mut has_command = false;
    while i < argv.len() {
        if !argv[i].starts_with("--") {
            has_command = true;
            break;
        }
        i += if argv[i].contains('=') { 1 } else { 2 };
    }
    if let (Some(c), false) = (command, has_command) {
        let words: Vec<String> = c.split_whitespace().map(String::from).collect();
        argv.splice(1..1, words);
    }
    argv.extend(extra);
    Ok(argv)
}
