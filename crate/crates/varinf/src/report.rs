//! Experiment reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// One reported number with its standard error, and the check it feeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Statistic {
    pub name: String,
    pub value: f64,
    pub se: f64,
    /// Value the statistic is compared against, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_se: Option<f64>,
    /// Allowed discrepancy, when the statistic is checked.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
}

impl Statistic {
    /// Informational, not checked.
    pub fn info(name: impl Into<String>, value: f64, se: f64) -> Self {
        Statistic {
            name: name.into(),
            value,
            se,
            reference: None,
            reference_se: None,
            tolerance: None,
            pass: None,
        }
    }

    /// Checked: passes when `|value - reference| <= tolerance`.
    pub fn against(name: impl Into<String>, value: f64, se: f64, reference: f64, reference_se: f64, tolerance: f64) -> Self {
        Statistic {
            name: name.into(),
            value,
            se,
            reference: Some(reference),
            reference_se: Some(reference_se),
            tolerance: Some(tolerance),
            pass: Some((value - reference).abs() <= tolerance),
        }
    }

    /// Checked by an explicit predicate, for range conditions.
    pub fn checked(name: impl Into<String>, value: f64, se: f64, pass: bool) -> Self {
        Statistic {
            pass: Some(pass),
            ..Statistic::info(name, value, se)
        }
    }

    /// `(value - reference) / combined SE`, when both exist.
    pub fn z(&self) -> Option<f64> {
        let r = self.reference?;
        let s = (self.se * self.se + self.reference_se.unwrap_or(0.0).powi(2)).sqrt();
        if s > 0.0 {
            Some((self.value - r) / s)
        } else if self.value == r {
            Some(0.0)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub experiment: String,
    pub seed: u64,
    pub statistics: Vec<Statistic>,
    pub tolerances: BTreeMap<String, f64>,
    pub pass: bool,
    pub wall_clock_seconds: f64,
    /// Free-form configuration echo.
    pub config: serde_json::Value,
}

impl McReport {
    pub fn new(experiment: &str, seed: u64, config: serde_json::Value) -> Self {
        McReport {
            experiment: experiment.into(),
            seed,
            statistics: Vec::new(),
            tolerances: BTreeMap::new(),
            pass: true,
            wall_clock_seconds: 0.0,
            config,
        }
    }

    pub fn push(&mut self, s: Statistic) {
        self.statistics.push(s);
        self.pass = self.computed_pass();
    }

    /// All checked statistics pass.
    pub fn computed_pass(&self) -> bool {
        self.statistics.iter().all(|s| s.pass != Some(false))
    }

    pub fn failures(&self) -> impl Iterator<Item = &Statistic> {
        self.statistics.iter().filter(|s| s.pass == Some(false))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Aligned plain-text rendering.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "experiment  {}", self.experiment).unwrap();
        writeln!(s, "seed        {}", self.seed).unwrap();
        writeln!(s, "result      {}", if self.pass { "PASS" } else { "FAIL" }).unwrap();
        writeln!(s, "wall clock  {:.2} s", self.wall_clock_seconds).unwrap();
        for (k, v) in &self.tolerances {
            writeln!(s, "tolerance   {k} = {v}").unwrap();
        }
        let w = self.statistics.iter().map(|x| x.name.len()).max().unwrap_or(4).max(4);
        writeln!(
            s,
            "\n{:<w$}  {:>14}  {:>11}  {:>14}  {:>11}  {:>5}",
            "name", "value", "se", "reference", "tolerance", "check"
        )
        .unwrap();
        let opt = |v: Option<f64>, p: usize| v.map_or(String::from("-"), |x| format!("{x:.p$e}"));
        for st in &self.statistics {
            writeln!(
                s,
                "{:<w$}  {:>14.6e}  {:>11.3e}  {:>14}  {:>11}  {:>5}",
                st.name,
                st.value,
                st.se,
                opt(st.reference, 6),
                opt(st.tolerance, 3),
                match st.pass {
                    Some(true) => "ok",
                    Some(false) => "FAIL",
                    None => "",
                }
            )
            .unwrap();
        }
        s
    }
}
