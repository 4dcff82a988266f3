use alloc::vec::Vec;

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use super::special::{chi_squared_sf, f_sf};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatError {
    #[error("need at least two groups, got {0}")]
    TooFewGroups(usize),
    #[error("row {0} of the contingency table sums to zero")]
    DegenerateTable(usize),
    #[error("group {0} is empty")]
    EmptyGroup(usize),
    #[error("no within-group degrees of freedom")]
    NoWithinDf,
    #[error("all samples are identical")]
    DegenerateInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquared {
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
}

/// Pearson chi-squared test of homogeneity on a `g x 2` table of
/// `(success, failure)` counts. Cells with zero expected count add nothing.
pub fn chi_squared_test(table: &[[u64; 2]]) -> Result<ChiSquared, StatError> {
    if table.len() < 2 {
        return Err(StatError::TooFewGroups(table.len()));
    }
    if let Some(i) = table.iter().position(|r| r[0] + r[1] == 0) {
        return Err(StatError::DegenerateTable(i));
    }
    let total: u64 = table.iter().map(|r| r[0] + r[1]).sum();
    let cols = [0, 1].map(|j| table.iter().map(|r| r[j]).sum::<u64>());
    // (O - R C / T)^2 / (R C / T) = (O T - R C)^2 / (R C T), so the
    // deviation is an exact integer and proportional rows give exactly 0.
    let mut statistic = 0.0;
    for row in table {
        let r = row[0] + row[1];
        for j in 0..2 {
            let rc = u128::from(r) * u128::from(cols[j]);
            if rc == 0 {
                continue;
            }
            let dev = i128::try_from(u128::from(row[j]) * u128::from(total)).expect("fits")
                - i128::try_from(rc).expect("fits");
            statistic += (dev as f64) * (dev as f64) / (rc as f64 * total as f64);
        }
    }
    let df = (table.len() - 1) as u32;
    Ok(ChiSquared { statistic, df, p_value: chi_squared_sf(statistic, f64::from(df)) })
}

fn serialize_f<S: Serializer>(f: &f64, s: S) -> Result<S::Ok, S::Error> {
    if f.is_finite() {
        s.serialize_f64(*f)
    } else {
        s.serialize_str("inf")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Anova {
    /// Infinite when every group is constant but the means differ.
    #[serde(serialize_with = "serialize_f")]
    pub f: f64,
    pub df_between: u32,
    pub df_within: u32,
    pub p_value: f64,
}

/// One-way ANOVA across `groups`.
pub fn anova_test(groups: &[Vec<f64>]) -> Result<Anova, StatError> {
    if groups.len() < 2 {
        return Err(StatError::TooFewGroups(groups.len()));
    }
    if let Some(i) = groups.iter().position(Vec::is_empty) {
        return Err(StatError::EmptyGroup(i));
    }
    let n: usize = groups.iter().map(Vec::len).sum();
    let k = groups.len();
    if n <= k {
        return Err(StatError::NoWithinDf);
    }
    let means: Vec<f64> = groups.iter().map(|g| g.iter().sum::<f64>() / g.len() as f64).collect();
    let grand = groups.iter().flatten().sum::<f64>() / n as f64;
    let ssb: f64 = groups.iter().zip(&means).map(|(g, m)| g.len() as f64 * (m - grand) * (m - grand)).sum();
    let ssw: f64 = groups.iter().zip(&means).map(|(g, m)| g.iter().map(|x| (x - m) * (x - m)).sum::<f64>()).sum();
    let df_between = (k - 1) as u32;
    let df_within = (n - k) as u32;
    let (f, p_value) = match (ssb == 0.0, ssw == 0.0) {
        (true, true) => return Err(StatError::DegenerateInput),
        (true, false) => (0.0, 1.0),
        (false, true) => (f64::INFINITY, 0.0),
        (false, false) => {
            let f = (ssb / f64::from(df_between)) / (ssw / f64::from(df_within));
            (f, f_sf(f, f64::from(df_between), f64::from(df_within)))
        }
    };
    Ok(Anova { f, df_between, df_within, p_value })
}
