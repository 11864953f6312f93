//! `--config FILE`: plain `key=value` lines (blank lines and `#` comments
//! allowed). Each key not already given on the command line is appended as
//! `--key value`, so clap validates file values exactly like flags.

use std::ffi::OsString;

use anyhow::{bail, Context};

pub fn merge_config_file(mut argv: Vec<OsString>) -> anyhow::Result<Vec<OsString>> {
    let Some(path) = find_config_path(&argv)? else {
        return Ok(argv);
    };
    let text =
        std::fs::read_to_string(&path).with_context(|| format!("reading config file {path}"))?;
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("{path}:{}: expected key=value, found `{line}`", line_no + 1);
        };
        let flag = format!("--{}", key.trim().replace('_', "-"));
        if flag == "--config" {
            bail!(
                "{path}:{}: config files cannot include other config files",
                line_no + 1
            );
        }
        if !given(&argv, &flag) {
            argv.push(flag.into());
            argv.push(value.trim().into());
        }
    }
    Ok(argv)
}

fn given(argv: &[OsString], flag: &str) -> bool {
    let with_value = format!("{flag}=");
    argv.iter()
        .filter_map(|a| a.to_str())
        .any(|a| a == flag || a.starts_with(&with_value))
}

fn find_config_path(argv: &[OsString]) -> anyhow::Result<Option<String>> {
    let mut args = argv.iter().skip(1).map(|a| a.to_string_lossy());
    while let Some(arg) = args.next() {
        if arg == "--config" {
            return match args.next() {
                Some(p) => Ok(Some(p.into_owned())),
                None => bail!("--config needs a file name"),
            };
        }
        if let Some(p) = arg.strip_prefix("--config=") {
            return Ok(Some(p.to_owned()));
        }
    }
    Ok(None)
}
