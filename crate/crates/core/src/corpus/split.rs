use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::CaseDocument;
use crate::error::{Error, Result};

/// Train/validation/test case ids cut at two dates.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<String>,
    pub valid: Vec<String>,
    pub test: Vec<String>,
    pub boundaries: (NaiveDate, NaiveDate),
}

impl DatasetSplit {
    pub fn total(&self) -> usize {
        self.train.len() + self.valid.len() + self.test.len()
    }
}

/// Splits cases by judgment date: `date <= cut1` is train,
/// `cut1 < date <= cut2` is validation, the rest is test. A date equal to a
/// cut goes to the earlier split. Input order is preserved within each split.
pub fn chronological_split(
    cases: &[CaseDocument],
    cut1: NaiveDate,
    cut2: NaiveDate,
) -> Result<DatasetSplit> {
    if cut2 < cut1 {
        return Err(Error::Config(format!("second cut {cut2} precedes first cut {cut1}")));
    }
    let mut split = DatasetSplit {
        boundaries: (cut1, cut2),
        ..Default::default()
    };
    for case in cases {
        let date = case
            .judgment_date
            .ok_or_else(|| Error::MissingDate(case.case_id.clone()))?;
        let bucket = if date <= cut1 {
            &mut split.train
        } else if date <= cut2 {
            &mut split.valid
        } else {
            &mut split.test
        };
        bucket.push(case.case_id.clone());
    }
    Ok(split)
}
