use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Currency decay model; durations in seconds, rates per second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum CurrencyModel {
    /// max(0, 1 − age/volatility)^s
    Ballou { volatility: f64, s: f64 },
    /// max(0, 1 − age/shelf_life)
    Li { shelf_life: f64 },
    /// 1 / (update_rate · age + 1)
    Hinrichs { update_rate: f64 },
    /// exp(−decline · age)
    Heinrich { decline: f64 },
}

impl CurrencyModel {
    pub fn name(&self) -> &'static str {
        match self {
            CurrencyModel::Ballou { .. } => "ballou",
            CurrencyModel::Li { .. } => "li",
            CurrencyModel::Hinrichs { .. } => "hinrichs",
            CurrencyModel::Heinrich { .. } => "heinrich",
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            CurrencyModel::Ballou { volatility, s } => {
                if !(volatility > 0.0) {
                    return Err(Error::param("volatility", "must be positive"));
                }
                if !(s > 0.0) {
                    return Err(Error::param("s", "must be positive"));
                }
            }
            CurrencyModel::Li { shelf_life } if !(shelf_life > 0.0) => {
                return Err(Error::param("shelf_life", "must be positive"))
            }
            CurrencyModel::Hinrichs { update_rate } if !(update_rate > 0.0) => {
                return Err(Error::param("update_rate", "must be positive"))
            }
            CurrencyModel::Heinrich { decline } if !(decline >= 0.0) => {
                return Err(Error::param("decline", "must be >= 0"))
            }
            _ => {}
        }
        Ok(())
    }

    /// Currency of a value of the given age in seconds.
    pub fn at_age(&self, age: f64) -> Result<f64> {
        self.validate()?;
        if age < 0.0 {
            return Err(Error::InvalidInput(format!("negative age {age} s: timestamp lies after evaluation time")));
        }
        Ok(match *self {
            CurrencyModel::Ballou { volatility, s } => (1.0 - age / volatility).max(0.0).powf(s),
            CurrencyModel::Li { shelf_life } => (1.0 - age / shelf_life).max(0.0),
            CurrencyModel::Hinrichs { update_rate } => 1.0 / (update_rate * age + 1.0),
            CurrencyModel::Heinrich { decline } => (-decline * age).exp(),
        })
    }
}

/// Currency of a value recorded at `ts` evaluated at `now` (Unix seconds).
pub fn currency(ts: i64, now: i64, model: CurrencyModel) -> Result<f64> {
    model.at_age((now - ts) as f64)
}
