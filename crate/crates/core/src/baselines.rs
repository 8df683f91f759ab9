//! Theory-driven comparison scores: uniform weights, place/manner/voicing
//! agreement and natural-class similarity.

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use crate::distances::DistanceMatrix;
use crate::error::{Error, Result};
use crate::inventory::{bundled_table, FeatureTheory, Inventory, TheoryId};
use crate::method::Method;
use crate::metric::MetricModel;
use crate::scalar::Scalar;

pub const PLACE_FEATURES: [&str; 6] = ["lb", "dn", "al", "pa", "vl", "gl"];
pub const MANNER_FEATURES: [&str; 7] = ["pl", "af", "fr", "ns", "lt", "rt", "gd"];
pub const VOICING_FEATURE: &str = "vc";
/// Place label for rows with no place bit set.
pub const NO_PLACE: &str = "none";

pub const MAX_ENUMERATION_FEATURES: usize = 20;
pub const MAX_ENUMERATION_PHONEMES: usize = 64;

/// W = I over the theory's features.
pub fn uniform_model<T: Scalar>(theory: FeatureTheory) -> MetricModel<T> {
    MetricModel::uniform(theory)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PmvEntry {
    pub place: String,
    pub manner: String,
    pub voiced: bool,
}

/// Place, manner and voicing per phoneme.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct PmvSpec {
    entries: BTreeMap<String, PmvEntry>,
}

impl PmvSpec {
    pub fn new(entries: BTreeMap<String, PmvEntry>) -> Self {
        Self { entries }
    }

    /// Reads the one-hot place/manner blocks and the voicing column of an
    /// articulatory-style inventory.
    pub fn from_articulatory(inv: &Inventory) -> Result<Self> {
        let col = |name: &str| inv.theory().index_of(name).ok_or_else(|| Error::UnknownFeature(name.to_string()));
        let place: Vec<(usize, &str)> = PLACE_FEATURES.iter().map(|&f| Ok((col(f)?, f))).collect::<Result<_>>()?;
        let manner: Vec<(usize, &str)> = MANNER_FEATURES.iter().map(|&f| Ok((col(f)?, f))).collect::<Result<_>>()?;
        let voicing = col(VOICING_FEATURE)?;
        let mut entries = BTreeMap::new();
        for (label, fv) in inv.phonemes().iter().zip(inv.features()) {
            let on = |block: &[(usize, &str)]| -> Vec<String> {
                block.iter().filter(|(k, _)| fv.get(*k)).map(|(_, f)| f.to_string()).collect()
            };
            let places = on(&place);
            let manners = on(&manner);
            if places.len() > 1 || manners.len() != 1 {
                return Err(Error::UnmappedPhoneme(label.clone()));
            }
            let entry = PmvEntry {
                place: places.into_iter().next().unwrap_or_else(|| NO_PLACE.to_string()),
                manner: manners.into_iter().next().unwrap(),
                voiced: fv.get(voicing),
            };
            entries.insert(label.clone(), entry);
        }
        Ok(Self { entries })
    }

    /// Uses the inventory's own columns when it is articulatory, otherwise
    /// looks its labels up in the bundled articulatory table.
    pub fn for_inventory(inv: &Inventory) -> Result<Self> {
        if let Ok(spec) = Self::from_articulatory(inv) {
            return Ok(spec);
        }
        let table = bundled_table(TheoryId::Articulatory);
        let full = Self::from_articulatory(&table)?;
        let mut entries = BTreeMap::new();
        for label in inv.phonemes() {
            let e = full.entries.get(label).ok_or_else(|| Error::UnmappedPhoneme(label.clone()))?;
            entries.insert(label.clone(), e.clone());
        }
        Ok(Self { entries })
    }

    pub fn get(&self, label: &str) -> Option<&PmvEntry> {
        self.entries.get(label)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Number of agreeing dimensions among place, manner and voicing (0 to 3).
pub fn pmv_similarity(spec: &PmvSpec, a: &str, b: &str) -> Result<u8> {
    let ea = spec.get(a).ok_or_else(|| Error::UnmappedPhoneme(a.to_string()))?;
    let eb = spec.get(b).ok_or_else(|| Error::UnmappedPhoneme(b.to_string()))?;
    Ok((ea.place == eb.place) as u8 + (ea.manner == eb.manner) as u8 + (ea.voiced == eb.voiced) as u8)
}

/// Distinct phoneme subsets expressible as conjunctions of feature values.
/// Subsets are bitmasks over the inventory order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NaturalClassSet {
    labels: Vec<String>,
    classes: Vec<u64>,
}

impl NaturalClassSet {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Sorted ascending by bitmask.
    pub fn classes(&self) -> &[u64] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn members(&self, class: u64) -> Vec<&str> {
        (0..self.labels.len()).filter(|&i| class >> i & 1 == 1).map(|i| self.labels[i].as_str()).collect()
    }

    /// Subsets as label lists, sorted by size and then lexicographically.
    pub fn subsets(&self) -> Vec<Vec<String>> {
        let mut out: Vec<Vec<String>> = self
            .classes
            .iter()
            .map(|&c| {
                let mut m: Vec<String> = self.members(c).into_iter().map(String::from).collect();
                m.sort();
                m
            })
            .collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Dump<'a> {
            phonemes: &'a [String],
            count: usize,
            classes: Vec<Vec<String>>,
        }
        Ok(serde_json::to_string_pretty(&Dump { phonemes: &self.labels, count: self.len(), classes: self.subsets() })?)
    }

    fn index(&self, label: &str) -> Result<usize> {
        self.labels.iter().position(|l| l == label).ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// `(shared, non_shared)` class counts for a pair of indices.
    pub fn counts(&self, a: usize, b: usize) -> (usize, usize) {
        let (ma, mb) = (1u64 << a, 1u64 << b);
        let mut shared = 0;
        let mut non_shared = 0;
        for &c in &self.classes {
            match (c & ma != 0, c & mb != 0) {
                (true, true) => shared += 1,
                (true, false) | (false, true) => non_shared += 1,
                _ => {}
            }
        }
        (shared, non_shared)
    }
}

pub fn enumerate_natural_classes(inv: &Inventory) -> Result<NaturalClassSet> {
    let (nf, np) = (inv.n_features(), inv.len());
    if nf > MAX_ENUMERATION_FEATURES || np > MAX_ENUMERATION_PHONEMES {
        return Err(Error::EnumerationBound { features: nf, phonemes: np, max: MAX_ENUMERATION_FEATURES });
    }
    let all = if np == 64 { u64::MAX } else { (1u64 << np) - 1 };
    // Each feature either constrains to 1, to 0, or is left open; refining
    // one feature at a time and deduplicating extents visits every
    // conjunction's extent without walking all 3^n_f specifications.
    let mut classes: HashSet<u64> = HashSet::from([all]);
    for k in 0..nf {
        let ones = inv
            .features()
            .iter()
            .enumerate()
            .filter(|(_, fv)| fv.get(k))
            .fold(0u64, |m, (i, _)| m | 1 << i);
        let zeros = all & !ones;
        let mut next = classes.clone();
        for &c in &classes {
            for part in [c & ones, c & zeros] {
                if part != 0 {
                    next.insert(part);
                }
            }
        }
        classes = next;
    }
    let mut classes: Vec<u64> = classes.into_iter().collect();
    classes.sort_unstable();
    Ok(NaturalClassSet { labels: inv.phonemes().to_vec(), classes })
}

/// shared / (shared + non-shared) natural classes.
pub fn frisch_similarity(ncs: &NaturalClassSet, a: &str, b: &str) -> Result<f64> {
    let (i, j) = (ncs.index(a)?, ncs.index(b)?);
    Ok(frisch_by_index(ncs, i, j))
}

fn frisch_by_index(ncs: &NaturalClassSet, i: usize, j: usize) -> f64 {
    let (shared, non_shared) = ncs.counts(i, j);
    shared as f64 / (shared + non_shared) as f64
}

/// Baseline scores in distance orientation. Uniform gives W = I distances;
/// PMV and Frisch give `max − similarity` (3 − S and 1 − S), which reverses
/// the similarity order and keeps a zero diagonal.
pub fn baseline_distances<T: Scalar>(method: Method, inv: &Inventory) -> Result<DistanceMatrix<T>> {
    let labels = inv.phonemes().to_vec();
    match method {
        Method::Uniform => uniform_model::<T>(inv.theory().clone()).distances(inv),
        Method::Pmv => {
            let spec = PmvSpec::for_inventory(inv)?;
            let mut err = None;
            let dm = DistanceMatrix::from_fn(labels.clone(), |i, j| match pmv_similarity(&spec, &labels[i], &labels[j]) {
                Ok(s) => T::of(3.0 - s as f64),
                Err(e) => {
                    err.get_or_insert(e);
                    T::zero()
                }
            });
            err.map_or(Ok(dm), Err)
        }
        Method::Frisch => {
            let ncs = enumerate_natural_classes(inv)?;
            Ok(DistanceMatrix::from_fn(labels, |i, j| T::of(1.0 - frisch_by_index(&ncs, i, j))))
        }
        other => Err(Error::InvalidConfig(format!("'{other}' is not a baseline method"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inventory::{load_inventory, parse_feature_table, DatasetId};

    fn toy(text: &str) -> Inventory {
        parse_feature_table(text, "toy").unwrap()
    }

    #[test]
    fn uniform_examples() {
        let inv = bundled_table(TheoryId::Phonological);
        let m = uniform_model::<f64>(inv.theory().clone());
        assert!(m.psd_certified());
        let (p, b) = (inv.vector_of("p").unwrap(), inv.vector_of("b").unwrap());
        assert_eq!(m.metric_distance(p, p).unwrap(), 0.0);
        assert_eq!(m.metric_distance(p, b).unwrap(), 1.0);
        let art = bundled_table(TheoryId::Articulatory);
        let m = uniform_model::<f64>(art.theory().clone());
        assert_eq!(m.metric_distance(art.vector_of("t").unwrap(), art.vector_of("m").unwrap()).unwrap(), 5.0);
    }

    #[test]
    fn pmv_examples() {
        let spec = PmvSpec::for_inventory(&bundled_table(TheoryId::Articulatory)).unwrap();
        assert_eq!(pmv_similarity(&spec, "b", "g").unwrap(), 2);
        assert_eq!(pmv_similarity(&spec, "s", "s").unwrap(), 3);
        assert_eq!(pmv_similarity(&spec, "t", "f").unwrap(), 1);
        assert_eq!(pmv_similarity(&spec, "t", "m").unwrap(), 0);
        assert!(matches!(pmv_similarity(&spec, "t", "?"), Err(Error::UnmappedPhoneme(_))));
        // k and g carry no place bit and so share the "none" place.
        assert_eq!(pmv_similarity(&spec, "k", "g").unwrap(), 2);
    }

    #[test]
    fn pmv_on_phonological_inventory_uses_articulatory_labels() {
        let phon = load_inventory(TheoryId::Phonological, DatasetId::Hebrew);
        let spec = PmvSpec::for_inventory(&phon).unwrap();
        assert_eq!(spec.len(), phon.len());
        let a: DistanceMatrix<f64> = baseline_distances(Method::Pmv, &phon).unwrap();
        let b: DistanceMatrix<f64> =
            baseline_distances(Method::Pmv, &load_inventory(TheoryId::Articulatory, DatasetId::Hebrew)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pmv_symmetric_and_three_iff_same_triple() {
        let inv = bundled_table(TheoryId::Articulatory);
        let spec = PmvSpec::for_inventory(&inv).unwrap();
        for a in inv.phonemes() {
            for b in inv.phonemes() {
                let s = pmv_similarity(&spec, a, b).unwrap();
                assert_eq!(s, pmv_similarity(&spec, b, a).unwrap());
                assert_eq!(s == 3, spec.get(a) == spec.get(b));
            }
        }
    }

    #[test]
    fn natural_class_small_cases() {
        let one_feature = toy("phoneme,f\na,1\nb,0\n");
        let ncs = enumerate_natural_classes(&one_feature).unwrap();
        assert_eq!(ncs.len(), 3);
        assert_eq!(ncs.subsets(), vec![vec!["a".to_string()], vec!["b".to_string()], vec!["a".into(), "b".into()]]);
        assert!((frisch_similarity(&ncs, "a", "b").unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(frisch_similarity(&ncs, "a", "a").unwrap(), 1.0);
    }

    #[test]
    fn frisch_hand_counts_on_three_phonemes() {
        // Classes: {a,b,c}, {a,b}, {c}, {a}, {b,c}, {b}.
        let inv = toy("phoneme,f,g\na,1,0\nb,1,1\nc,0,1\n");
        let ncs = enumerate_natural_classes(&inv).unwrap();
        assert_eq!(ncs.len(), 6);
        assert_eq!(ncs.counts(0, 1), (2, 3));
        assert_eq!(ncs.counts(0, 2), (1, 4));
        assert_eq!(frisch_similarity(&ncs, "b", "c").unwrap(), 2.0 / 5.0);
    }

    #[test]
    fn redundant_feature_adds_no_class() {
        let base = toy("phoneme,f,g\na,1,0\nb,1,1\nc,0,1\nd,0,0\n");
        let dup = toy("phoneme,f,g,g2\na,1,0,0\nb,1,1,1\nc,0,1,1\nd,0,0,0\n");
        let (x, y) = (enumerate_natural_classes(&base).unwrap(), enumerate_natural_classes(&dup).unwrap());
        assert_eq!(x.classes(), y.classes());
        let dx: DistanceMatrix<f64> = baseline_distances(Method::Frisch, &base).unwrap();
        let dy: DistanceMatrix<f64> = baseline_distances(Method::Frisch, &dup).unwrap();
        assert_eq!(dx, dy);
    }

    #[test]
    fn bundled_frisch_is_symmetric_in_unit_interval() {
        let inv = bundled_table(TheoryId::Phonological);
        let ncs = enumerate_natural_classes(&inv).unwrap();
        assert_eq!(*ncs.classes().last().unwrap(), (1u64 << inv.len()) - 1);
        for i in 0..inv.len() {
            for j in 0..inv.len() {
                let s = frisch_by_index(&ncs, i, j);
                assert!((0.0..=1.0).contains(&s));
                assert_eq!(s, frisch_by_index(&ncs, j, i));
                assert_eq!(s == 1.0, i == j);
            }
        }
        let json = ncs.to_json().unwrap();
        assert!(json.contains("\"count\""));
    }

    #[test]
    fn baseline_orientation_reverses_similarity() {
        let inv = bundled_table(TheoryId::Articulatory);
        let spec = PmvSpec::for_inventory(&inv).unwrap();
        let dm: DistanceMatrix<f64> = baseline_distances(Method::Pmv, &inv).unwrap();
        let (t, f, m) = (inv.index_of("t").unwrap(), inv.index_of("f").unwrap(), inv.index_of("m").unwrap());
        assert!(dm.get(t, f) < dm.get(t, m));
        assert_eq!(dm.get(t, f), 3.0 - pmv_similarity(&spec, "t", "f").unwrap() as f64);
        assert!(baseline_distances::<f64>(Method::Ls, &inv).is_err());
    }

    #[test]
    fn enumeration_bound() {
        let names: Vec<String> = (0..21).map(|k| format!("f{k}")).collect();
        let mut text = format!("phoneme,{}\n", names.join(","));
        text += &format!("a,{}\n", vec!["0"; 21].join(","));
        text += &format!("b,{}\n", vec!["1"; 21].join(","));
        assert!(matches!(enumerate_natural_classes(&toy(&text)), Err(Error::EnumerationBound { .. })));
    }
}
