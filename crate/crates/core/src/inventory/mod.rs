//! Phoneme inventories over binary feature theories.

mod bundled;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bundled::{bundled_table, dataset_labels, load_inventory, ARTICULATORY_CSV, PHONOLOGICAL_CSV};

/// A named, ordered set of binary features.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureTheory {
    name: String,
    feature_names: Vec<String>,
}

impl FeatureTheory {
    pub fn new(name: impl Into<String>, feature_names: Vec<String>) -> Result<Self> {
        let mut seen = HashMap::new();
        for (k, f) in feature_names.iter().enumerate() {
            if f.is_empty() {
                return Err(Error::InvalidTheory(format!("feature {k} has an empty name")));
            }
            if seen.insert(f.as_str(), k).is_some() {
                return Err(Error::InvalidTheory(format!("duplicate feature name '{f}'")));
            }
        }
        Ok(Self { name: name.into(), feature_names })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn arity(&self) -> usize {
        self.feature_names.len()
    }

    pub fn index_of(&self, feature: &str) -> Option<usize> {
        self.feature_names.iter().position(|f| f == feature)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TheoryId {
    Articulatory,
    Phonological,
}

impl TheoryId {
    pub fn as_str(self) -> &'static str {
        match self {
            TheoryId::Articulatory => "articulatory",
            TheoryId::Phonological => "phonological",
        }
    }
}

impl fmt::Display for TheoryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoryId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "articulatory" => Ok(TheoryId::Articulatory),
            "phonological" => Ok(TheoryId::Phonological),
            other => Err(Error::InvalidTheory(other.to_string())),
        }
    }
}

/// The three confusion datasets whose phoneme sets are marked in the bundled table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetId {
    /// Nicely & Miller.
    Nm,
    Luce,
    Hebrew,
}

impl DatasetId {
    pub const ALL: [DatasetId; 3] = [DatasetId::Nm, DatasetId::Luce, DatasetId::Hebrew];

    pub fn as_str(self) -> &'static str {
        match self {
            DatasetId::Nm => "nm",
            DatasetId::Luce => "luce",
            DatasetId::Hebrew => "hebrew",
        }
    }
}

impl fmt::Display for DatasetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DatasetId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nm" => Ok(DatasetId::Nm),
            "luce" => Ok(DatasetId::Luce),
            "hebrew" => Ok(DatasetId::Hebrew),
            other => Err(Error::UnknownLabel(format!("dataset {other}"))),
        }
    }
}

/// Binary feature values of one phoneme, in theory order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureVector(Vec<u8>);

impl FeatureVector {
    pub fn new(values: Vec<u8>) -> Result<Self> {
        if let Some(v) = values.iter().find(|&&v| v > 1) {
            return Err(Error::NonBinaryCell { line: 0, column: String::new(), value: v.to_string() });
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, k: usize) -> bool {
        self.0[k] == 1
    }

    /// Number of features on which the two vectors disagree.
    pub fn hamming(&self, other: &FeatureVector) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

/// Phoneme labels with a binary feature matrix under one theory.
///
/// Constructed inventories always have pairwise-distinct rows. The only way
/// to obtain coinciding rows is [`Inventory::drop_feature`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inventory {
    phonemes: Vec<String>,
    theory: FeatureTheory,
    features: Vec<FeatureVector>,
}

impl Inventory {
    pub fn new(phonemes: Vec<String>, theory: FeatureTheory, features: Vec<FeatureVector>) -> Result<Self> {
        if phonemes.len() != features.len() {
            return Err(Error::DimensionMismatch { expected: phonemes.len(), found: features.len() });
        }
        if phonemes.len() < 2 {
            return Err(Error::TooFewPhonemes(phonemes.len()));
        }
        let mut labels = HashMap::new();
        for (i, p) in phonemes.iter().enumerate() {
            if labels.insert(p.as_str(), i).is_some() {
                return Err(Error::DuplicateLabel { line: i + 2, label: p.clone() });
            }
        }
        for fv in &features {
            if fv.len() != theory.arity() {
                return Err(Error::DimensionMismatch { expected: theory.arity(), found: fv.len() });
            }
        }
        let mut rows: HashMap<&FeatureVector, usize> = HashMap::new();
        for (i, fv) in features.iter().enumerate() {
            if let Some(&first) = rows.get(fv) {
                return Err(Error::DuplicateFeatureVector {
                    first: phonemes[first].clone(),
                    second: phonemes[i].clone(),
                });
            }
            rows.insert(fv, i);
        }
        Ok(Self { phonemes, theory, features })
    }

    pub fn phonemes(&self) -> &[String] {
        &self.phonemes
    }

    pub fn theory(&self) -> &FeatureTheory {
        &self.theory
    }

    pub fn features(&self) -> &[FeatureVector] {
        &self.features
    }

    pub fn feature(&self, i: usize) -> &FeatureVector {
        &self.features[i]
    }

    pub fn len(&self) -> usize {
        self.phonemes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phonemes.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.theory.arity()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.phonemes.iter().position(|p| p == label)
    }

    pub fn vector_of(&self, label: &str) -> Result<&FeatureVector> {
        self.index_of(label)
            .map(|i| &self.features[i])
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Removes one feature column. Rows may coincide afterwards.
    pub fn drop_feature(&self, feature_name: &str) -> Result<Inventory> {
        let k = self
            .theory
            .index_of(feature_name)
            .ok_or_else(|| Error::UnknownFeature(feature_name.to_string()))?;
        let mut names = self.theory.feature_names.clone();
        names.remove(k);
        let theory = FeatureTheory { name: self.theory.name.clone(), feature_names: names };
        let features = self
            .features
            .iter()
            .map(|fv| {
                let mut v = fv.0.clone();
                v.remove(k);
                FeatureVector(v)
            })
            .collect();
        Ok(Inventory { phonemes: self.phonemes.clone(), theory, features })
    }

    /// Rows for `labels`, in the order given.
    pub fn subset<S: AsRef<str>>(&self, labels: &[S]) -> Result<Inventory> {
        let mut phonemes = Vec::with_capacity(labels.len());
        let mut features = Vec::with_capacity(labels.len());
        for l in labels {
            let l = l.as_ref();
            let i = self.index_of(l).ok_or_else(|| Error::UnknownLabel(l.to_string()))?;
            phonemes.push(self.phonemes[i].clone());
            features.push(self.features[i].clone());
        }
        if phonemes.len() < 2 {
            return Err(Error::TooFewPhonemes(phonemes.len()));
        }
        // A subset of an inventory may inherit coinciding rows (after a drop);
        // keep that tolerance instead of re-validating.
        Ok(Inventory { phonemes, theory: self.theory.clone(), features })
    }

    /// Serializes as `phoneme,<features>` CSV with `+`/`-` cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("phoneme");
        for f in &self.theory.feature_names {
            out.push(',');
            out.push_str(f);
        }
        out.push('\n');
        for (p, fv) in self.phonemes.iter().zip(&self.features) {
            out.push_str(p);
            for &v in &fv.0 {
                out.push_str(if v == 1 { ",+" } else { ",-" });
            }
            out.push('\n');
        }
        out
    }
}

/// Parses a `phoneme,<feature names...>` table with cells in `{+, -, 1, 0}`.
pub fn parse_feature_table(text: &str, theory_name: &str) -> Result<Inventory> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = records.next().ok_or(Error::EmptyTable)??;
    let feature_names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let theory = FeatureTheory::new(theory_name, feature_names)?;
    let width = theory.arity() + 1;

    let mut phonemes = Vec::new();
    let mut features = Vec::new();
    for record in records {
        let record = record?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != width {
            return Err(Error::RaggedRow { line, expected: width, found: record.len() });
        }
        let label = record[0].to_string();
        if phonemes.contains(&label) {
            return Err(Error::DuplicateLabel { line, label });
        }
        let mut values = Vec::with_capacity(theory.arity());
        for (k, cell) in record.iter().skip(1).enumerate() {
            let v = match cell {
                "+" | "1" => 1,
                "-" | "0" | "\u{2212}" => 0,
                other => {
                    return Err(Error::NonBinaryCell {
                        line,
                        column: theory.feature_names[k].clone(),
                        value: other.to_string(),
                    })
                }
            };
            values.push(v);
        }
        phonemes.push(label);
        features.push(FeatureVector(values));
    }
    Inventory::new(phonemes, theory, features)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_phoneme_table_parses() {
        let inv = parse_feature_table("phoneme,f\na,+\nb,-\n", "toy").unwrap();
        assert_eq!(inv.len(), 2);
        assert_eq!(inv.n_features(), 1);
        assert_eq!(inv.feature(0).values(), &[1]);
        assert_eq!(inv.feature(1).values(), &[0]);
    }

    #[test]
    fn duplicate_vectors_rejected() {
        let err = parse_feature_table("phoneme,f,g\na,+,-\nb,1,0\n", "toy").unwrap_err();
        assert!(err.to_string().contains("duplicate feature vector"), "{err}");
    }

    #[test]
    fn table_errors_carry_location() {
        let err = parse_feature_table("phoneme,f,g\na,+,-\nb,+\n", "toy").unwrap_err();
        assert!(matches!(err, Error::RaggedRow { line: 3, expected: 3, found: 2 }), "{err:?}");
        let err = parse_feature_table("phoneme,f,g\na,+,x\nb,-,-\n", "toy").unwrap_err();
        assert!(matches!(err, Error::NonBinaryCell { line: 2, ref column, .. } if column == "g"), "{err:?}");
        let err = parse_feature_table("phoneme,f\na,+\na,-\n", "toy").unwrap_err();
        assert!(matches!(err, Error::DuplicateLabel { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn single_phoneme_rejected() {
        assert!(matches!(parse_feature_table("phoneme,f\na,+\n", "toy"), Err(Error::TooFewPhonemes(1))));
    }

    #[test]
    fn theory_rejects_duplicate_names() {
        assert!(FeatureTheory::new("t", vec!["a".into(), "a".into()]).is_err());
        assert!(FeatureTheory::new("t", vec!["".into()]).is_err());
    }

    #[test]
    fn drop_unknown_feature_fails() {
        let inv = load_inventory(TheoryId::Articulatory, DatasetId::Hebrew);
        assert!(matches!(inv.drop_feature("nope"), Err(Error::UnknownFeature(_))));
    }

    #[test]
    fn dropping_voicing_merges_p_and_b() {
        let inv = load_inventory(TheoryId::Articulatory, DatasetId::Hebrew);
        assert_eq!(inv.n_features(), 14);
        let dropped = inv.drop_feature("vc").unwrap();
        assert_eq!(dropped.n_features(), 13);
        assert_eq!(dropped.len(), inv.len());
        assert_eq!(dropped.vector_of("p").unwrap(), dropped.vector_of("b").unwrap());
    }
}
