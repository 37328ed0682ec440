use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parental health status; `Poor` is the shock state (z = 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Health {
    Good,
    Poor,
}

impl Health {
    pub const BOTH: [Health; 2] = [Health::Good, Health::Poor];

    pub fn index(self) -> usize {
        match self {
            Health::Good => 0,
            Health::Poor => 1,
        }
    }

    pub fn from_index(z: usize) -> Self {
        if z == 0 {
            Health::Good
        } else {
            Health::Poor
        }
    }

    pub fn is_poor(self) -> bool {
        self == Health::Poor
    }
}

/// Parental utility `u(z, d)` from health status and received care.
///
/// Must be increasing in care and supermodular: the utility gain from care
/// is at least as large when parents are in poor health.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CareUtilityTable", into = "CareUtilityTable")]
pub struct CareUtility {
    table: [[f64; 2]; 2],
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct CareUtilityTable {
    good_no_care: f64,
    good_care: f64,
    poor_no_care: f64,
    poor_care: f64,
}

impl TryFrom<CareUtilityTable> for CareUtility {
    type Error = Error;

    fn try_from(t: CareUtilityTable) -> Result<Self> {
        CareUtility::new(t.good_no_care, t.good_care, t.poor_no_care, t.poor_care)
    }
}

impl From<CareUtility> for CareUtilityTable {
    fn from(u: CareUtility) -> Self {
        CareUtilityTable {
            good_no_care: u.table[0][0],
            good_care: u.table[0][1],
            poor_no_care: u.table[1][0],
            poor_care: u.table[1][1],
        }
    }
}

impl CareUtility {
    pub fn new(
        good_no_care: f64,
        good_care: f64,
        poor_no_care: f64,
        poor_care: f64,
    ) -> Result<Self> {
        let table = [[good_no_care, good_care], [poor_no_care, poor_care]];
        if table.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::param("care_utility", "entries must be finite"));
        }
        let gain_good = good_care - good_no_care;
        let gain_poor = poor_care - poor_no_care;
        if gain_good < 0.0 || gain_poor < 0.0 {
            return Err(Error::param(
                "care_utility",
                format!("must be increasing in care (gains {gain_good}, {gain_poor})"),
            ));
        }
        if gain_poor < gain_good {
            return Err(Error::param(
                "care_utility",
                format!("must be supermodular: poor-health care gain {gain_poor} < good-health gain {gain_good}"),
            ));
        }
        Ok(CareUtility { table })
    }

    pub fn value(&self, z: Health, care: bool) -> f64 {
        self.table[z.index()][care as usize]
    }

    /// `u(z, 1) - u(z, 0)`.
    pub fn care_gain(&self, z: Health) -> f64 {
        self.table[z.index()][1] - self.table[z.index()][0]
    }
}

/// Constant-relative-risk-aversion consumption utility; curvature 1 is log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ConsumptionUtility {
    curvature: f64,
}

impl TryFrom<f64> for ConsumptionUtility {
    type Error = Error;

    fn try_from(curvature: f64) -> Result<Self> {
        ConsumptionUtility::crra(curvature)
    }
}

impl From<ConsumptionUtility> for f64 {
    fn from(u: ConsumptionUtility) -> f64 {
        u.curvature
    }
}

impl Default for ConsumptionUtility {
    fn default() -> Self {
        ConsumptionUtility::LOG
    }
}

impl ConsumptionUtility {
    pub const LOG: ConsumptionUtility = ConsumptionUtility { curvature: 1.0 };

    pub fn crra(curvature: f64) -> Result<Self> {
        if !(curvature.is_finite() && curvature > 0.0) {
            return Err(Error::param(
                "consumption_curvature",
                format!("must be finite and > 0, got {curvature}"),
            ));
        }
        Ok(ConsumptionUtility { curvature })
    }

    pub fn curvature(&self) -> f64 {
        self.curvature
    }

    pub fn value(&self, c: f64) -> Result<f64> {
        if !(c > 0.0) {
            return Err(Error::Domain(c));
        }
        Ok(self.eval(c))
    }

    /// `value` without the domain check; returns `-inf` for `c <= 0`.
    pub(crate) fn eval(&self, c: f64) -> f64 {
        if !(c > 0.0) {
            return f64::NEG_INFINITY;
        }
        if self.curvature == 1.0 {
            c.ln()
        } else {
            let k = 1.0 - self.curvature;
            (c.powf(k) - 1.0) / k
        }
    }

    pub fn marginal(&self, c: f64) -> Result<f64> {
        if !(c > 0.0) {
            return Err(Error::Domain(c));
        }
        Ok(c.powf(-self.curvature))
    }
}
