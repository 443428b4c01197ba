//! The four bundled reference systems (V to VIII), compiled into the library.

use crate::system::FiniteProbabilitySystem;

pub const SYSTEM_V_JSON: &str = include_str!("../fixtures/system_v.json");
pub const SYSTEM_VI_JSON: &str = include_str!("../fixtures/system_vi.json");
pub const SYSTEM_VII_JSON: &str = include_str!("../fixtures/system_vii.json");
pub const SYSTEM_VIII_JSON: &str = include_str!("../fixtures/system_viii.json");

/// `(label, file name, JSON)` for each bundled system, in table order.
pub const REFERENCE_SYSTEMS: [(&str, &str, &str); 4] = [
    ("V", "system_v.json", SYSTEM_V_JSON),
    ("VI", "system_vi.json", SYSTEM_VI_JSON),
    ("VII", "system_vii.json", SYSTEM_VII_JSON),
    ("VIII", "system_viii.json", SYSTEM_VIII_JSON),
];

fn load(json: &str) -> FiniteProbabilitySystem {
    FiniteProbabilitySystem::from_json(json).expect("bundled fixture parses")
}

pub fn system_v() -> FiniteProbabilitySystem {
    load(SYSTEM_V_JSON)
}

pub fn system_vi() -> FiniteProbabilitySystem {
    load(SYSTEM_VI_JSON)
}

pub fn system_vii() -> FiniteProbabilitySystem {
    load(SYSTEM_VII_JSON)
}

pub fn system_viii() -> FiniteProbabilitySystem {
    load(SYSTEM_VIII_JSON)
}

/// All four systems with their labels.
pub fn reference_systems() -> Vec<(&'static str, FiniteProbabilitySystem)> {
    REFERENCE_SYSTEMS
        .iter()
        .map(|(label, _, json)| (*label, load(json)))
        .collect()
}
