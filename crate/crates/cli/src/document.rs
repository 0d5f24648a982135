//! Spec documents and data files.

use std::fs;
use std::path::{Path, PathBuf};

use ked_core::{KernelSpec, MeasureSpec};
use serde::Deserialize;

use crate::error::{input, CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub nodes: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedPoint {
    pub x: Vec<f64>,
    pub value: f64,
}

/// Stored reference values checked by `verify` alongside the oracle.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    pub kpp: Option<f64>,
    #[serde(default)]
    pub kp: Vec<ExpectedPoint>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub schema_version: u32,
    pub kernel: KernelSpec,
    pub measure: MeasureSpec,
    #[serde(default)]
    pub oracle: OracleConfig,
    /// Nodes and values for `bq`, relative to the spec file.
    pub data: Option<PathBuf>,
    pub expected: Option<Expected>,
    #[serde(skip)]
    pub dir: PathBuf,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

impl SpecDocument {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read(path)?;
        let mut doc: SpecDocument =
            serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", path.display())))?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(input(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                doc.schema_version
            )));
        }
        doc.dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let dir = doc.dir.clone();
        resolve_empirical(&mut doc.measure, &dir)?;
        if let Some(data) = &doc.data {
            doc.data = Some(dir.join(data));
        }
        Ok(doc)
    }
}

/// Loads `path` entries of empirical measures into `points`.
fn resolve_empirical(spec: &mut MeasureSpec, dir: &Path) -> Result<()> {
    match spec {
        MeasureSpec::Empirical {
            points,
            weights,
            path,
        } => {
            if let Some(p) = path.take() {
                if points.is_some() {
                    return Err(input("empirical measure has both points and path"));
                }
                let data = DataSet::load(&dir.join(p))?;
                if data.values.is_some() {
                    return Err(input("empirical measure file must not have a y column"));
                }
                *points = Some(data.points);
                if data.weights.is_some() {
                    *weights = data.weights;
                }
            }
            Ok(())
        }
        MeasureSpec::Mixture { components, .. } => components
            .iter_mut()
            .try_for_each(|c| resolve_empirical(c, dir)),
        MeasureSpec::Pushforward { base, .. } => resolve_empirical(base, dir),
        _ => Ok(()),
    }
}

/// Points with optional values (`y`) and weights (`w`).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSet {
    pub points: Vec<Vec<f64>>,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
}

impl DataSet {
    /// Reads `.json` files as `{"points": [...], "values": [...], "weights": [...]}`
    /// and anything else as CSV with header `x1,...,xd[,y][,w]`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = read(path)?;
        let data = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", path.display())))?
        } else {
            Self::from_csv(&text).map_err(|e| input(format!("{}: {e}", path.display())))?
        };
        data.validate()
            .map_err(|e| input(format!("{}: {e}", path.display())))?;
        Ok(data)
    }

    fn from_csv(text: &str) -> std::result::Result<Self, String> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| e.to_string())?
            .iter()
            .map(str::to_string)
            .collect();
        let d = header.iter().take_while(|h| h.starts_with('x')).count();
        for (i, h) in header[..d].iter().enumerate() {
            if *h != format!("x{}", i + 1) {
                return Err(format!("column {} is '{h}', expected 'x{}'", i + 1, i + 1));
            }
        }
        let mut y_col = None;
        let mut w_col = None;
        for (i, h) in header.iter().enumerate().skip(d) {
            let slot = match h.as_str() {
                "y" => &mut y_col,
                "w" => &mut w_col,
                other => return Err(format!("unknown column '{other}'")),
            };
            if slot.replace(i).is_some() {
                return Err(format!("duplicate column '{h}'"));
            }
        }
        if d == 0 {
            return Err("no x1..xd columns".into());
        }
        let mut data = DataSet {
            points: Vec::new(),
            values: y_col.map(|_| Vec::new()),
            weights: w_col.map(|_| Vec::new()),
        };
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| e.to_string())?;
            let nums = record
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| format!("row {}: '{f}' is not a number", row + 1))
                })
                .collect::<std::result::Result<Vec<f64>, String>>()?;
            data.points.push(nums[..d].to_vec());
            if let (Some(c), Some(v)) = (y_col, data.values.as_mut()) {
                v.push(nums[c]);
            }
            if let (Some(c), Some(w)) = (w_col, data.weights.as_mut()) {
                w.push(nums[c]);
            }
        }
        Ok(data)
    }

    fn validate(&self) -> std::result::Result<(), String> {
        let d = self.points.first().ok_or("no rows")?.len();
        if d == 0 {
            return Err("points must have at least one coordinate".into());
        }
        if let Some(i) = self.points.iter().position(|p| p.len() != d) {
            return Err(format!(
                "row {} has {} coordinates, expected {d}",
                i + 1,
                self.points[i].len()
            ));
        }
        for (name, col) in [("values", &self.values), ("weights", &self.weights)] {
            if let Some(c) = col {
                if c.len() != self.points.len() {
                    return Err(format!(
                        "{} {name} for {} points",
                        c.len(),
                        self.points.len()
                    ));
                }
            }
        }
        let all = self
            .points
            .iter()
            .flatten()
            .chain(self.values.iter().flatten())
            .chain(self.weights.iter().flatten());
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err("non-finite entry".into());
        }
        Ok(())
    }
}
