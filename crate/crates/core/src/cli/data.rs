use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::{Failure, Outcome};
use crate::distances::{parse_confusion_csv, parse_distance_csv, shepard_distance, shepard_similarity, SimilarityMatrix, HEBREW_CONFUSION_CSV};
use crate::distances::{ConfusionMatrix, DistanceMatrix};
use crate::inventory::{dataset_labels, parse_feature_table, DatasetId, Inventory, TheoryId, ARTICULATORY_CSV, PHONOLOGICAL_CSV};

pub const DATA_DIR_ENV: &str = "CONFMETRIC_DATA_DIR";
pub const HEBREW_CONFUSION_FILE: &str = "hebrew_confusion.csv";

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct InputRecord {
    pub role: String,
    pub source: String,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Where a dataset comes from: `bundled:<id>`, `distances:<path>` or a confusion CSV path.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Bundled(DatasetId),
    Confusion(PathBuf),
    Distances(PathBuf),
}

impl Source {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        if let Some(id) = text.strip_prefix("bundled:") {
            let id: DatasetId = id.parse().map_err(|_| Failure::Usage(format!("unknown bundled dataset '{id}'")))?;
            return Ok(Source::Bundled(id));
        }
        if let Some(path) = text.strip_prefix("distances:") {
            return Ok(Source::Distances(PathBuf::from(path)));
        }
        Ok(Source::Confusion(PathBuf::from(text)))
    }

    /// Short dataset name for reports.
    pub fn default_name(&self) -> String {
        match self {
            Source::Bundled(id) => id.to_string(),
            Source::Confusion(p) | Source::Distances(p) => {
                p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "data".into())
            }
        }
    }
}

fn data_dir() -> Option<PathBuf> {
    std::env::var_os(DATA_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

pub fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

/// Bundled file contents, from the data directory override when set.
fn bundled_text(file: &str, builtin: &'static str) -> Result<(String, String), Failure> {
    match data_dir() {
        Some(dir) => {
            let path = dir.join(file);
            Ok((read_text(&path)?, path.display().to_string()))
        }
        None => Ok((builtin.to_string(), format!("bundled:{file}"))),
    }
}

pub fn feature_table(theory: TheoryId) -> Result<(Inventory, InputRecord), Failure> {
    let (file, builtin) = match theory {
        TheoryId::Articulatory => ("articulatory.csv", ARTICULATORY_CSV),
        TheoryId::Phonological => ("phonological.csv", PHONOLOGICAL_CSV),
    };
    let (text, source) = bundled_text(file, builtin)?;
    let inv = parse_feature_table(&text, theory.as_str()).map_err(|e| Failure::Data(format!("{source}: {e}")))?;
    let record = InputRecord { role: format!("{theory} features"), sha256: sha256_hex(text.as_bytes()), source };
    Ok((inv, record))
}

pub fn load_confusion(source: &Source) -> Result<(ConfusionMatrix, InputRecord), Failure> {
    let (text, origin) = match source {
        Source::Bundled(DatasetId::Hebrew) => bundled_text(HEBREW_CONFUSION_FILE, HEBREW_CONFUSION_CSV)?,
        Source::Bundled(id) => {
            return Err(Failure::Data(format!("no bundled confusion matrix for '{id}'; pass a CSV path")))
        }
        Source::Confusion(path) => (read_text(path)?, path.display().to_string()),
        Source::Distances(path) => {
            return Err(Failure::Usage(format!("{} is a distance matrix, not a confusion matrix", path.display())))
        }
    };
    let cm = parse_confusion_csv(&text).map_err(|e| Failure::Data(format!("{origin}: {e}")))?;
    let record = InputRecord { role: "confusion".into(), sha256: sha256_hex(text.as_bytes()), source: origin };
    Ok((cm, record))
}

pub struct Dataset {
    pub name: String,
    pub similarity: Option<SimilarityMatrix<f64>>,
    pub distances: DistanceMatrix<f64>,
    pub inputs: Vec<InputRecord>,
}

pub fn load_dataset(source: &Source, smoothing: f64) -> Outcome<Dataset> {
    let name = source.default_name();
    if let Source::Distances(path) = source {
        let text = read_text(path)?;
        let dm = parse_distance_csv(&text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
        let record = InputRecord {
            role: "distances".into(),
            sha256: sha256_hex(text.as_bytes()),
            source: path.display().to_string(),
        };
        return Ok(Dataset { name, similarity: None, distances: dm, inputs: vec![record] });
    }
    let (cm, record) = load_confusion(source)?;
    let sm = shepard_similarity(&cm, smoothing)?;
    let dm = shepard_distance(&sm)?;
    Ok(Dataset { name, similarity: Some(sm), distances: dm, inputs: vec![record] })
}

/// The feature-table rows for the dataset's phonemes, optionally limited to a
/// dataset's marked phonemes; the distances are restricted to match.
pub fn align(
    table: &Inventory,
    dm: &DistanceMatrix<f64>,
    dataset: Option<DatasetId>,
) -> Outcome<(Inventory, DistanceMatrix<f64>)> {
    let marked = dataset.map(dataset_labels);
    let mut labels = Vec::new();
    for label in dm.labels() {
        if let Some(marked) = &marked {
            if !marked.contains(&label.as_str()) {
                continue;
            }
        }
        if table.index_of(label).is_none() {
            return Err(Failure::Data(format!(
                "phoneme '{label}' has no row in the {} feature table",
                table.theory().name()
            )));
        }
        labels.push(label.clone());
    }
    if labels.len() < 2 {
        return Err(Failure::Data(format!("only {} phoneme(s) remain after alignment", labels.len())));
    }
    let inv = table.subset(&labels)?;
    let dm = dm.restrict(&labels)?;
    Ok((inv, dm))
}
