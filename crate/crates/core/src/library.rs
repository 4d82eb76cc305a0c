//! Reference instances compiled into the binary.

use crate::io::{parse_instance, Instance, IoError};

pub const MANIFEST: &str = include_str!("../../../instances/manifest.json");

const FILES: &[(&str, &str)] = &[
    ("ternary7", include_str!("../../../instances/ternary7.json")),
    (
        "butterfly",
        include_str!("../../../instances/butterfly.json"),
    ),
    ("zero_sum", include_str!("../../../instances/zero_sum.json")),
    ("andor", include_str!("../../../instances/andor.json")),
    (
        "ternary_andor",
        include_str!("../../../instances/ternary_andor.json"),
    ),
    ("cb1", include_str!("../../../instances/cb1.json")),
    ("cb2", include_str!("../../../instances/cb2.json")),
    (
        "matching_4x3",
        include_str!("../../../instances/matching_4x3.json"),
    ),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    FILES.iter().map(|(n, _)| *n)
}

/// Raw JSON of a bundled instance; a trailing `.json` is ignored.
pub fn source(name: &str) -> Option<&'static str> {
    let name = name.strip_suffix(".json").unwrap_or(name);
    FILES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn load(name: &str) -> Option<Result<Instance, IoError>> {
    source(name).map(parse_instance)
}
