use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Conforming entries over non-missing entries.
pub fn syntactic_accuracy(values: &[Option<String>], dictionary: &BTreeSet<String>) -> Result<f64> {
    if dictionary.is_empty() {
        return Err(Error::param("dictionary", "must not be empty"));
    }
    let present: Vec<&String> = values.iter().flatten().collect();
    if present.is_empty() {
        return Err(Error::Degenerate("all entries missing: syntactic accuracy undefined".into()));
    }
    let ok = present.iter().filter(|v| dictionary.contains(v.as_str())).count();
    Ok(ok as f64 / present.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    Increase,
    Decrease,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageHinkleyParams {
    pub delta: f64,
    pub lambda: f64,
    #[serde(default)]
    pub direction: Direction,
}

impl Default for PageHinkleyParams {
    fn default() -> Self {
        PageHinkleyParams {
            delta: 0.005,
            lambda: 50.0,
            direction: Direction::Increase,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageHinkleyOutcome {
    pub alarm_indices: Vec<usize>,
    pub max_statistic: f64,
}

struct Detector {
    sign: f64,
    delta: f64,
    count: f64,
    mean: f64,
    cum: f64,
    extreme: f64,
}

impl Detector {
    fn new(sign: f64, delta: f64) -> Self {
        Detector {
            sign,
            delta,
            count: 0.0,
            mean: 0.0,
            cum: 0.0,
            extreme: 0.0,
        }
    }

    /// Feeds one value and returns the current test statistic.
    fn update(&mut self, x: f64) -> f64 {
        self.count += 1.0;
        self.mean += (x - self.mean) / self.count;
        self.cum += self.sign * (x - self.mean) - self.delta;
        self.extreme = self.extreme.min(self.cum);
        self.cum - self.extreme
    }

    fn reset(&mut self) {
        *self = Detector::new(self.sign, self.delta);
    }
}

/// Page-Hinkley change detection. The statistic m_t = Σ(x_i − x̄_i − δ)
/// uses the running mean x̄_i; an alarm fires when m_t − min m ≥ λ and the
/// detector restarts after each alarm. `Both` runs an increase and a
/// decrease detector side by side.
pub fn page_hinkley(series: &[f64], p: PageHinkleyParams) -> Result<PageHinkleyOutcome> {
    if !(p.lambda > 0.0) {
        return Err(Error::param("lambda", "must be positive"));
    }
    if series.len() < 2 {
        return Err(Error::InvalidInput("page-hinkley needs at least two values".into()));
    }
    let mut detectors: Vec<Detector> = match p.direction {
        Direction::Increase => vec![Detector::new(1.0, p.delta)],
        Direction::Decrease => vec![Detector::new(-1.0, p.delta)],
        Direction::Both => vec![Detector::new(1.0, p.delta), Detector::new(-1.0, p.delta)],
    };
    let mut alarms = Vec::new();
    let mut max_stat = 0.0f64;
    for (t, &x) in series.iter().enumerate() {
        let mut fired = false;
        for d in detectors.iter_mut() {
            let s = d.update(x);
            max_stat = max_stat.max(s);
            fired |= s >= p.lambda;
        }
        if fired {
            alarms.push(t);
            detectors.iter_mut().for_each(Detector::reset);
        }
    }
    Ok(PageHinkleyOutcome {
        alarm_indices: alarms,
        max_statistic: max_stat,
    })
}
