//! `DSET1` and `TSET1` text formats.
//!
//! ```text
//! DSET1 n=3
//! 0 0
//! 0 1
//! ```
//!
//! The header names the level; each following line holds one `i j` pair of
//! decimal integers. Writers emit pairs sorted by `(i, j)` with `\n` line
//! endings, so writing a parsed canonical file reproduces it byte for byte.
//! Readers reject malformed headers, malformed or out-of-range pairs and
//! duplicates, reporting the 1-based line number. Blank lines are skipped.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{CubeSet, MAX_LEVEL};
use crate::incidence::TubeSet;

const CUBE_MAGIC: &str = "DSET1";
const TUBE_MAGIC: &str = "TSET1";

fn write_pairs(magic: &str, level: u32, pairs: &[(u32, u32)]) -> String {
    let mut out = format!("{magic} n={level}\n");
    for (i, j) in pairs {
        out.push_str(&format!("{i} {j}\n"));
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_pairs(magic: &str, text: &str) -> Result<(u32, Vec<(u32, u32)>)> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l.trim()));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let level = header
        .strip_prefix(magic)
        .and_then(|rest| rest.trim().strip_prefix("n="))
        .and_then(|n| n.parse::<u32>().ok())
        .ok_or_else(|| parse_err(1, format!("expected header `{magic} n=<level>`, found `{header}`")))?;
    if level > MAX_LEVEL {
        return Err(parse_err(1, format!("level {level} exceeds {MAX_LEVEL}")));
    }
    let side = 1u64 << level;
    let mut seen = std::collections::HashSet::new();
    let mut pairs = Vec::new();
    for (no, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [i, j] = fields[..] else {
            return Err(parse_err(no, format!("expected `i j`, found `{line}`")));
        };
        let num = |s: &str| s.parse::<u64>().map_err(|_| parse_err(no, format!("`{s}` is not an index")));
        let (i, j) = (num(i)?, num(j)?);
        if i >= side || j >= side {
            return Err(parse_err(no, format!("index ({i}, {j}) out of range for level {level}")));
        }
        let pair = (i as u32, j as u32);
        if !seen.insert(pair) {
            return Err(parse_err(no, format!("duplicate entry ({i}, {j})")));
        }
        pairs.push(pair);
    }
    Ok((level, pairs))
}

pub fn write_dset(set: &CubeSet) -> String {
    write_pairs(CUBE_MAGIC, set.level(), &set.sorted_indices())
}

pub fn parse_dset(text: &str) -> Result<CubeSet> {
    let (level, pairs) = parse_pairs(CUBE_MAGIC, text)?;
    CubeSet::from_indices(level, pairs)
}

pub fn write_tset(tubes: &TubeSet) -> String {
    write_pairs(TUBE_MAGIC, tubes.level(), &tubes.sorted_indices())
}

pub fn parse_tset(text: &str) -> Result<TubeSet> {
    let (level, pairs) = parse_pairs(TUBE_MAGIC, text)?;
    TubeSet::from_indices(level, pairs)
}

pub fn save_set(path: impl AsRef<Path>, set: &CubeSet) -> Result<()> {
    Ok(fs::write(path, write_dset(set))?)
}

pub fn load_set(path: impl AsRef<Path>) -> Result<CubeSet> {
    parse_dset(&fs::read_to_string(path)?)
}

pub fn save_tubes(path: impl AsRef<Path>, tubes: &TubeSet) -> Result<()> {
    Ok(fs::write(path, write_tset(tubes))?)
}

pub fn load_tubes(path: impl AsRef<Path>) -> Result<TubeSet> {
    parse_tset(&fs::read_to_string(path)?)
}
