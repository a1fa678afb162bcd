//! Parsing of set, sequence, sign and ψ literals.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use densitylab::primes::prime_set;
use densitylab::sets::Generator;
use densitylab::signed::SignSequence;
use densitylab::{CoeffSequence, Error, IntegerSet, PsiFunction, Result};

pub const SET_LITERALS: &[(&str, &str)] = &[
    (
        "ap:<first>,<stride>",
        "arithmetic progression first + i*stride",
    ),
    ("naturals", "all positive integers"),
    ("evens", "even positive integers"),
    ("odds", "odd positive integers"),
    ("squares", "perfect squares"),
    ("primes:<horizon>", "primes up to the horizon (sieve)"),
    ("intervals:<file.json>", "JSON array of [lo, hi] pairs"),
    (
        "phi:<file.csv>",
        "increasing sequence phi(1), phi(2), ... one per line",
    ),
];

pub const SEQUENCE_LITERALS: &[(&str, &str)] = &[
    ("recip", "1/n"),
    ("recip-pow:<a>", "1/n^a"),
    ("recip-logsq", "1/(n log^2(n+1))"),
    ("const:<v>", "constant v"),
    ("file:<path.csv>", "one value per line"),
];

pub const SIGN_LITERALS: &[(&str, &str)] = &[
    ("alt", "(-1)^(n+1)"),
    (
        "alt-on:<set>",
        "alternating signs along the members of a set, 0 elsewhere",
    ),
    ("file:<path.csv>", "one of -1, 0, 1 per line"),
];

fn parse_err(what: &str, literal: &str, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{what} literal `{literal}`: {msg}"))
}

/// Lines of a one-column file; a header or a leading `n,` column is skipped.
fn column_values(path: &Path, what: &str, literal: &str) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| parse_err(what, literal, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let field = line.rsplit(',').next().unwrap_or(line).trim();
        if i == 0 && field.parse::<f64>().is_err() {
            continue;
        }
        out.push(field.to_string());
    }
    Ok(out)
}

pub fn parse_set(literal: &str) -> Result<IntegerSet> {
    let (head, arg) = literal.split_once(':').unwrap_or((literal, ""));
    match (head, arg) {
        ("naturals", "") => Ok(IntegerSet::naturals()),
        ("evens", "") => Ok(IntegerSet::evens()),
        ("odds", "") => Ok(IntegerSet::odds()),
        ("squares", "") => Ok(IntegerSet::squares()),
        ("ap", _) => {
            let (f, s) = arg
                .split_once(',')
                .ok_or_else(|| parse_err("set", literal, "expected ap:first,stride"))?;
            let first = f.trim().parse().map_err(|e| parse_err("set", literal, e))?;
            let stride = s.trim().parse().map_err(|e| parse_err("set", literal, e))?;
            Ok(IntegerSet::arithmetic(first, stride)?.with_label(literal))
        }
        ("primes", _) => prime_set(parse_count(arg).map_err(|e| parse_err("set", literal, e))?),
        ("intervals", _) => {
            let text = fs::read_to_string(arg).map_err(|e| parse_err("set", literal, e))?;
            let pairs: Vec<(u64, u64)> =
                serde_json::from_str(&text).map_err(|e| parse_err("set", literal, e))?;
            IntegerSet::interval_union(literal, pairs)
        }
        ("phi", _) => {
            let values = column_values(Path::new(arg), "set", literal)?
                .iter()
                .map(|v| v.parse::<u64>().map_err(|e| parse_err("set", literal, e)))
                .collect::<Result<Vec<_>>>()?;
            IntegerSet::generator(literal, Generator::Table(Arc::new(values)))
        }
        _ => Err(parse_err(
            "set",
            literal,
            "unknown form; run `densitylab list`",
        )),
    }
}

pub fn parse_sequence(literal: &str) -> Result<CoeffSequence> {
    let (head, arg) = literal.split_once(':').unwrap_or((literal, ""));
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|e| parse_err("sequence", literal, e))
    };
    match (head, arg) {
        ("recip", "") => Ok(CoeffSequence::recip()),
        ("recip-logsq", "") => Ok(CoeffSequence::recip_logsq()),
        ("recip-pow", _) => Ok(CoeffSequence::recip_pow(num(arg)?)),
        ("const", _) => CoeffSequence::constant(num(arg)?),
        ("file", _) => {
            let values = column_values(Path::new(arg), "sequence", literal)?
                .iter()
                .map(|v| num(v))
                .collect::<Result<Vec<_>>>()?;
            CoeffSequence::table(literal, values)
        }
        _ => Err(parse_err(
            "sequence",
            literal,
            "unknown form; run `densitylab list`",
        )),
    }
}

pub fn parse_signs(literal: &str) -> Result<SignSequence> {
    let (head, arg) = literal.split_once(':').unwrap_or((literal, ""));
    match (head, arg) {
        ("alt", "") => Ok(SignSequence::alternating()),
        ("alt-on", _) => Ok(SignSequence::alternating_on(parse_set(arg)?)),
        ("file", _) => {
            let values = column_values(Path::new(arg), "sign", literal)?
                .iter()
                .map(|v| v.parse::<i64>().map_err(|e| parse_err("sign", literal, e)))
                .collect::<Result<Vec<_>>>()?;
            SignSequence::table(literal, values)
        }
        _ => Err(parse_err(
            "sign",
            literal,
            "unknown form; run `densitylab list`",
        )),
    }
}

pub fn parse_psi(key: &str) -> Result<PsiFunction> {
    PsiFunction::from_key(key)
}

/// Non-negative integer, also accepting integral scientific notation (`1e6`).
pub fn parse_count(s: &str) -> std::result::Result<u64, String> {
    let s = s.trim().replace('_', "");
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < 1.8e19 => Ok(v as u64),
        _ => Err(format!("`{s}` is not a non-negative integer")),
    }
}
