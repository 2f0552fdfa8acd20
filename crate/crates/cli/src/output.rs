use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use moqt_core::format_number;
use serde::Serialize;
use serde_json::Value;

/// Output sink confined to one directory.
#[derive(Debug, Clone)]
pub struct OutputDir {
    root: PathBuf,
    pub quiet: bool,
}

impl OutputDir {
    pub fn create(root: PathBuf, quiet: bool) -> anyhow::Result<Self> {
        std::fs::create_dir_all(&root).with_context(|| format!("creating output directory {}", root.display()))?;
        Ok(Self { root, quiet })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Write `name` atomically: the bytes land in a temporary file in the same
    /// directory which is then renamed over the target.
    pub fn write(&self, name: &str, bytes: &[u8]) -> anyhow::Result<PathBuf> {
        if name.is_empty() || name.contains(['/', '\\']) || name == "." || name == ".." {
            bail!("refusing to write `{name}` outside the output directory");
        }
        let target = self.root.join(name);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.root)
            .with_context(|| format!("creating temporary file in {}", self.root.display()))?;
        tmp.write_all(bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(&target).with_context(|| format!("writing {}", target.display()))?;
        if !self.quiet {
            eprintln!("wrote {}", target.display());
        }
        Ok(target)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> anyhow::Result<PathBuf> {
        self.write(name, json_text(value)?.as_bytes())
    }
}

/// Round every number to nine significant digits so outputs are stable.
pub fn round_numbers(value: Value) -> Value {
    match value {
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => {
                let rounded: f64 = format_number(f).parse().expect("formatted float parses");
                serde_json::Number::from_f64(rounded).map_or(Value::Null, Value::Number)
            }
            _ => Value::Number(n),
        },
        Value::Array(items) => Value::Array(items.into_iter().map(round_numbers).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_numbers(v))).collect()),
        other => other,
    }
}

pub fn json_text<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let v = round_numbers(serde_json::to_value(value)?);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

/// Numeric CSV with a header row.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self { text: format!("{}\n", header.join(",")) }
    }

    pub fn row(&mut self, cells: &[f64]) {
        let line: Vec<String> = cells.iter().map(|v| format_number(*v)).collect();
        self.text.push_str(&line.join(","));
        self.text.push('\n');
    }

    /// Row whose first cell is a label; labels must not need quoting.
    pub fn labelled_row(&mut self, label: &str, cells: &[f64]) {
        self.text.push_str(label);
        for v in cells {
            self.text.push(',');
            self.text.push_str(&format_number(*v));
        }
        self.text.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}

/// Parse a list of numbers: `a,b,c` or an inclusive range `start:stop:count`.
pub fn parse_grid(spec: &str) -> anyhow::Result<Vec<f64>> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Ok(Vec::new());
    }
    let num = |s: &str| -> anyhow::Result<f64> {
        let v: f64 = s.trim().parse().with_context(|| format!("`{}` is not a number", s.trim()))?;
        if !v.is_finite() {
            bail!("`{}` is not finite", s.trim());
        }
        Ok(v)
    };
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            bail!("range `{spec}` must look like start:stop:count");
        }
        let (lo, hi) = (num(parts[0])?, num(parts[1])?);
        let n: usize = parts[2].trim().parse().with_context(|| format!("range count `{}` is not an integer", parts[2]))?;
        return Ok(moqt_core::fitting::synthetic::linspace(lo, hi, n));
    }
    spec.split(',').map(num).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("1,2.5").unwrap(), vec![1.0, 2.5]);
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("").unwrap(), Vec::<f64>::new());
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("x").is_err());
    }

    #[test]
    fn numbers_rounded_to_nine_digits() {
        let v = round_numbers(serde_json::json!({"a": 0.1 + 0.2, "n": 3, "s": [1.0 / 3.0]}));
        assert_eq!(v.to_string(), r#"{"a":0.3,"n":3,"s":[0.333333333]}"#);
    }

    #[test]
    fn writes_stay_inside_root() {
        let dir = tempfile::tempdir().unwrap();
        let out = OutputDir::create(dir.path().to_path_buf(), true).unwrap();
        assert!(out.write("../escape.txt", b"x").is_err());
        let p = out.write("ok.txt", b"x").unwrap();
        assert_eq!(std::fs::read(p).unwrap(), b"x");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
