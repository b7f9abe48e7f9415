//! Fixtures shared by the criterion benchmarks.

use sfw_core::data::{normalize_labels, parse_libsvm, synthetic, Dataset};
use sfw_core::objectives::LossKind;

const BREAST_CANCER: &[u8] = include_bytes!("../../../data/breast-cancer_scale");

pub fn breast_cancer(kind: LossKind) -> Dataset {
    let ds = parse_libsvm(BREAST_CANCER).expect("bundled file parses");
    normalize_labels(ds, kind).expect("two labels")
}

pub fn mushrooms(kind: LossKind) -> Dataset {
    normalize_labels(synthetic::mushrooms_like(0), kind).expect("two labels")
}
