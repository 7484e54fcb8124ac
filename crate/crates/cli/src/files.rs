//! JSON and point-file helpers shared by the subcommands.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use stiefel_polar::{ComplexDenseTensor, ObjectiveSpec, StiefelTuple};

use crate::error::{with_path, CliResult};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = with_path(fs::read_to_string(path), path)?;
    with_path(serde_json::from_str(&text), path)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        with_path(fs::create_dir_all(dir), dir)?;
    }
    let mut text = with_path(serde_json::to_string_pretty(value), path)?;
    text.push('\n');
    with_path(fs::write(path, text), path)
}

pub fn read_spec(path: &Path) -> CliResult<ObjectiveSpec> {
    read_json(path)
}

#[derive(Deserialize)]
struct Factors {
    factors: Vec<ComplexDenseTensor>,
}

/// Reads the `factors` array of a result file or a ground-truth sidecar.
pub fn read_point(path: &Path) -> CliResult<StiefelTuple> {
    let f: Factors = read_json(path)?;
    let ms = f.factors.iter().map(|t| t.to_matrix()).collect::<stiefel_polar::Result<Vec<_>>>();
    with_path(ms.and_then(StiefelTuple::from_matrices), path)
}

/// Aliases keep clap from reading these as repeated flags.
pub type SizeList = Vec<usize>;
pub type SeedList = Vec<u64>;

/// Comma-separated list, e.g. `4,4,4`.
pub fn parse_list(s: &str) -> Result<SizeList, String> {
    s.split(',').map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}"))).collect()
}

/// Seeds as a comma-separated mix of values and ranges `a..b` / `a..=b`.
/// The empty string is the empty list.
pub fn parse_seeds(s: &str) -> Result<SeedList, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let num = |x: &str| x.trim().parse::<u64>().map_err(|e| format!("{x:?}: {e}"));
        if let Some((a, b)) = part.split_once("..=") {
            out.extend(num(a)?..=num(b)?);
        } else if let Some((a, b)) = part.split_once("..") {
            out.extend(num(a)?..num(b)?);
        } else {
            out.push(num(part)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("").unwrap(), Vec::<u64>::new());
        assert_eq!(parse_seeds("0..3,7,9..=10").unwrap(), vec![0, 1, 2, 7, 9, 10]);
        assert!(parse_seeds("1,x").is_err());
    }

    #[test]
    fn dim_lists() {
        assert_eq!(parse_list("4, 4,5").unwrap(), vec![4, 4, 5]);
        assert!(parse_list("4,-1").is_err());
    }
}
