//! Bundled example data.

use crate::design::RawDataset;
use crate::error::Result;

/// Portland cement heat-of-hardening data (13 mixes, 4 clinker compounds).
pub const HALDPORT_CSV: &str = include_str!("../data/haldport.csv");

/// Response column of [`HALDPORT_CSV`].
pub const HALDPORT_RESPONSE: &str = "heat";

pub fn haldport() -> Result<RawDataset> {
    RawDataset::from_csv_reader(HALDPORT_CSV.as_bytes(), HALDPORT_RESPONSE)
}
