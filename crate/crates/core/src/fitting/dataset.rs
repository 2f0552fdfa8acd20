use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::format_number;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("dataset is empty")]
    Empty,
    #[error("x, y and sigma must have equal lengths ({x}, {y}, {sigma})")]
    LengthMismatch { x: usize, y: usize, sigma: usize },
    #[error("x must be strictly increasing (point {index})")]
    NotIncreasing { index: usize },
    #[error("point {index} is not finite")]
    NonFinite { index: usize },
    #[error("sigma must be positive (point {index})")]
    BadSigma { index: usize },
    #[error("model has {params} parameters and needs at least {needed} points, got {got}")]
    TooFewPoints { params: usize, needed: usize, got: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub sigma: Option<Vec<f64>>,
}

impl Dataset {
    pub fn new(x: Vec<f64>, y: Vec<f64>, sigma: Option<Vec<f64>>) -> Result<Self, DatasetError> {
        let ns = sigma.as_ref().map_or(x.len(), Vec::len);
        if x.len() != y.len() || ns != x.len() {
            return Err(DatasetError::LengthMismatch { x: x.len(), y: y.len(), sigma: ns });
        }
        if x.is_empty() {
            return Err(DatasetError::Empty);
        }
        for i in 0..x.len() {
            if !x[i].is_finite() || !y[i].is_finite() {
                return Err(DatasetError::NonFinite { index: i });
            }
            if i > 0 && !(x[i] > x[i - 1]) {
                return Err(DatasetError::NotIncreasing { index: i });
            }
        }
        if let Some(s) = &sigma {
            if let Some(index) = s.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(DatasetError::BadSigma { index });
            }
        }
        Ok(Self { x, y, sigma })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn span(&self) -> f64 {
        self.x[self.len() - 1] - self.x[0]
    }

    pub fn require_points(&self, params: usize) -> Result<(), DatasetError> {
        if self.len() < params + 1 {
            return Err(DatasetError::TooFewPoints { params, needed: params + 1, got: self.len() });
        }
        Ok(())
    }

    /// Copy with `y → scale·y + shift` (σ scales by `|scale|`).
    pub fn affine(&self, scale: f64, shift: f64) -> Self {
        Self {
            x: self.x.clone(),
            y: self.y.iter().map(|v| scale * v + shift).collect(),
            sigma: self.sigma.as_ref().map(|s| s.iter().map(|v| v * scale.abs()).collect()),
        }
    }

    /// Parse `x,y[,sigma]` CSV with a header row and `#` comment lines.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self, DatasetError> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let parse_err = |e: csv::Error| {
            let line = e.position().map_or(0, |p| p.line());
            DatasetError::Parse { line, message: e.to_string() }
        };
        let headers = rdr.headers().map_err(parse_err)?.clone();
        let header_line = rdr.position().line();
        let cols: Vec<&str> = headers.iter().collect();
        let with_sigma = match cols.as_slice() {
            ["x", "y"] => false,
            ["x", "y", "sigma"] => true,
            [] | [""] => return Err(DatasetError::Empty),
            _ => {
                return Err(DatasetError::Parse {
                    line: header_line.max(1),
                    message: format!("expected header `x,y` or `x,y,sigma`, found `{}`", cols.join(",")),
                })
            }
        };
        let (mut x, mut y, mut s) = (Vec::new(), Vec::new(), Vec::new());
        for record in rdr.records() {
            let record = record.map_err(parse_err)?;
            let line = record.position().map_or(0, |p| p.line());
            let want = if with_sigma { 3 } else { 2 };
            if record.len() != want {
                return Err(DatasetError::Parse { line, message: format!("expected {want} fields, found {}", record.len()) });
            }
            let field = |i: usize| -> Result<f64, DatasetError> {
                record[i].parse::<f64>().map_err(|_| DatasetError::Parse {
                    line,
                    message: format!("`{}` is not a number", &record[i]),
                })
            };
            x.push(field(0)?);
            y.push(field(1)?);
            if with_sigma {
                s.push(field(2)?);
            }
        }
        Self::new(x, y, with_sigma.then_some(s))
    }

    pub fn from_path(path: &Path) -> Result<Self, DatasetError> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        match &self.sigma {
            Some(s) => {
                writeln!(w, "x,y,sigma")?;
                for i in 0..self.len() {
                    writeln!(w, "{},{},{}", format_number(self.x[i]), format_number(self.y[i]), format_number(s[i]))?;
                }
            }
            None => {
                writeln!(w, "x,y")?;
                for i in 0..self.len() {
                    writeln!(w, "{},{}", format_number(self.x[i]), format_number(self.y[i]))?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_sigma() {
        let text = "# synthetic\nx,y,sigma\n0,1,0.1\n# mid comment\n1,2,0.1\n";
        let d = Dataset::from_reader(text.as_bytes()).unwrap();
        assert_eq!(d.x, vec![0.0, 1.0]);
        assert_eq!(d.sigma, Some(vec![0.1, 0.1]));
    }

    #[test]
    fn reports_line_numbers() {
        let text = "x,y\n0,1\n1,abc\n";
        match Dataset::from_reader(text.as_bytes()) {
            Err(DatasetError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match Dataset::from_reader("x,y\n0,1\n1\n".as_bytes()) {
            Err(DatasetError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(Dataset::from_reader("".as_bytes()), Err(DatasetError::Empty)));
        assert!(matches!(Dataset::from_reader("x,y\n".as_bytes()), Err(DatasetError::Empty)));
        assert!(matches!(Dataset::from_reader("a,b\n1,2\n".as_bytes()), Err(DatasetError::Parse { .. })));
        assert!(matches!(Dataset::new(vec![1.0, 1.0], vec![0.0, 0.0], None), Err(DatasetError::NotIncreasing { index: 1 })));
        assert!(matches!(
            Dataset::new(vec![0.0, 1.0], vec![0.0, 0.0], Some(vec![1.0, 0.0])),
            Err(DatasetError::BadSigma { index: 1 })
        ));
        let d = Dataset::new(vec![0.0, 1.0], vec![0.0, 0.0], None).unwrap();
        assert!(d.require_points(2).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let d = Dataset::new(vec![0.0, 1.5e-7], vec![0.25, -3.0], Some(vec![0.01, 0.02])).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        assert_eq!(Dataset::from_reader(buf.as_slice()).unwrap(), d);
    }
}
