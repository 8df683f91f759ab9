use super::{parse_feature_table, DatasetId, Inventory, TheoryId};

pub const ARTICULATORY_CSV: &str = include_str!("../../data/articulatory.csv");
pub const PHONOLOGICAL_CSV: &str = include_str!("../../data/phonological.csv");

// Dataset markers per phoneme, in table order: (label, luce, nm, hebrew).
const MEMBERSHIP: [(&str, bool, bool, bool); 27] = [
    ("p", true, true, true),
    ("b", true, true, true),
    ("t", true, true, true),
    ("d", true, true, true),
    ("k", true, true, true),
    ("g", true, true, true),
    ("tS", true, false, false),
    ("dZ", true, false, false),
    ("f", true, true, true),
    ("v", true, true, true),
    ("T", true, true, false),
    ("D", true, true, false),
    ("s", true, true, true),
    ("z", true, true, true),
    ("S", true, true, true),
    ("Z", false, true, false),
    ("h", true, true, true),
    ("m", true, true, true),
    ("n", true, true, true),
    ("N", true, false, false),
    ("l", true, false, true),
    ("R", true, false, false),
    ("w", true, false, false),
    ("j", true, false, true),
    ("X", false, false, true),
    ("ts", false, false, true),
    ("K", false, false, true),
];

/// The full 27-phoneme table for one theory.
pub fn bundled_table(theory: TheoryId) -> Inventory {
    let csv = match theory {
        TheoryId::Articulatory => ARTICULATORY_CSV,
        TheoryId::Phonological => PHONOLOGICAL_CSV,
    };
    parse_feature_table(csv, theory.as_str()).expect("bundled feature table is valid")
}

/// Labels marked for `dataset`, in table order.
pub fn dataset_labels(dataset: DatasetId) -> Vec<&'static str> {
    MEMBERSHIP
        .iter()
        .filter(|(_, luce, nm, hebrew)| match dataset {
            DatasetId::Luce => *luce,
            DatasetId::Nm => *nm,
            DatasetId::Hebrew => *hebrew,
        })
        .map(|(label, ..)| *label)
        .collect()
}

/// Bundled inventory for a dataset, feature columns in table order.
pub fn load_inventory(theory: TheoryId, dataset: DatasetId) -> Inventory {
    bundled_table(theory)
        .subset(&dataset_labels(dataset))
        .expect("membership labels exist in the bundled table")
}
