//! `key = value` config files, merged into the argument list so that explicit
//! flags take precedence.

use std::ffi::OsString;
use std::fs;

/// Removes `--config <path>` / `--config=<path>` from `args` and returns the path.
fn take_config_path(args: &mut Vec<OsString>) -> Result<Option<String>, String> {
    let mut found = None;
    let mut i = 0;
    while i < args.len() {
        let a = args[i].to_string_lossy().into_owned();
        if a == "--config" {
            let path = args
                .get(i + 1)
                .ok_or("--config needs a path")?
                .to_string_lossy()
                .into_owned();
            args.drain(i..i + 2);
            found = Some(path);
        } else if let Some(p) = a.strip_prefix("--config=") {
            found = Some(p.to_string());
            args.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(found)
}

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key = value", i + 1))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(format!("config line {}: empty key", i + 1));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

fn flag_given(args: &[OsString], key: &str) -> bool {
    let long = format!("--{key}");
    let with_eq = format!("--{key}=");
    args.iter()
        .map(|a| a.to_string_lossy())
        .any(|a| a == long || a.starts_with(&with_eq))
}

/// Appends config entries not already given on the command line.
pub fn merge_config(mut args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = take_config_path(&mut args)? else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("config `{path}`: {e}"))?;
    let entries = parse_config(&text).map_err(|e| format!("config `{path}`: {e}"))?;
    let given: Vec<OsString> = args.clone();
    for (key, value) in entries {
        if !flag_given(&given, &key) {
            args.push(format!("--{key}={value}").into());
        }
    }
    Ok(args)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn flags_win_over_config() {
        let dir = std::env::temp_dir().join(format!("densitylab-config-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.conf");
        fs::write(
            &path,
            "# density run\nhorizon = 5000\ntail_fraction=0.25\nset = ap:2,2\n",
        )
        .unwrap();
        let args = os(&[
            "densitylab",
            "density",
            "--config",
            path.to_str().unwrap(),
            "--horizon",
            "1000",
        ]);
        let merged = merge_config(args).unwrap();
        let merged: Vec<String> = merged
            .iter()
            .map(|a| a.to_string_lossy().into_owned())
            .collect();
        assert_eq!(
            merged,
            vec![
                "densitylab",
                "density",
                "--horizon",
                "1000",
                "--tail-fraction=0.25",
                "--set=ap:2,2"
            ]
        );
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn malformed_lines_are_rejected() {
        assert!(parse_config("horizon 5").is_err());
        assert!(parse_config(" = 5").is_err());
    }
}
