//! Bundled data files.

/// The 48 x 36 m office floor used by the default experiments.
pub const OFFICE_MAP_JSON: &str = include_str!("../assets/office_48x36.json");

/// Target sets A and B for the office map.
pub const TARGET_SETS_JSON: &str = include_str!("../assets/target_sets.json");
