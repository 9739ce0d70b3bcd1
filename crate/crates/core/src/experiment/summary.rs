//! Per-cell statistics over record rows and planner comparisons.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::Serialize;

use super::records::RecordRow;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stats {
    pub mean: f64,
    /// Sample standard deviation (n - 1); zero for a single value.
    pub std: f64,
    pub count: usize,
}

impl Stats {
    /// Values are sorted before summation so the result does not depend on
    /// input order.
    pub fn of(values: &[f64]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let mut dev: Vec<f64> = v.iter().map(|x| (x - mean) * (x - mean)).collect();
        dev.sort_by(f64::total_cmp);
        let std = if v.len() > 1 {
            (dev.iter().sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Stats {
            mean,
            std,
            count: v.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct CellKey {
    pub planner: String,
    pub attacker: String,
    pub m: u64,
    pub alpha: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub key: CellKey,
    pub f_full: Stats,
    pub f_attacked: Stats,
    /// Over rows where the rate is defined.
    pub attack_rate: Option<Stats>,
}

/// Difference of mean attacked values between two planners in one cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub baseline: String,
    pub attacker: String,
    pub m: u64,
    pub alpha: u64,
    /// `mean(resilient) - mean(baseline)` of `f_attacked`.
    pub mean_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub cells: Vec<Cell>,
    pub comparisons: Vec<Comparison>,
}

impl Summary {
    pub fn cell(&self, planner: &str, attacker: &str, m: u64, alpha: u64) -> Option<&Cell> {
        self.cells.iter().find(|c| {
            c.key.planner == planner
                && c.key.attacker == attacker
                && c.key.m == m
                && c.key.alpha == alpha
        })
    }
}

pub fn summarize_rows(rows: &[RecordRow]) -> Summary {
    let mut groups: BTreeMap<CellKey, Vec<&RecordRow>> = BTreeMap::new();
    for r in rows {
        groups
            .entry(CellKey {
                planner: r.planner.clone(),
                attacker: r.attacker.clone(),
                m: r.m,
                alpha: r.alpha,
            })
            .or_default()
            .push(r);
    }
    let cells: Vec<Cell> = groups
        .into_iter()
        .map(|(key, rs)| {
            let full: Vec<_> = rs.iter().map(|r| r.f_full).collect();
            let attacked: Vec<_> = rs.iter().map(|r| r.f_attacked).collect();
            let rates: Vec<_> = rs.iter().filter_map(|r| r.attack_rate).collect();
            Cell {
                key,
                f_full: Stats::of(&full).expect("non-empty group"),
                f_attacked: Stats::of(&attacked).expect("non-empty group"),
                attack_rate: Stats::of(&rates),
            }
        })
        .collect();

    let mut comparisons = Vec::new();
    for c in cells.iter().filter(|c| c.key.planner == "resilient") {
        for baseline in ["greedy", "brute-force"] {
            let other = cells.iter().find(|o| {
                o.key.planner == baseline
                    && o.key.attacker == c.key.attacker
                    && o.key.m == c.key.m
                    && o.key.alpha == c.key.alpha
            });
            if let Some(o) = other {
                comparisons.push(Comparison {
                    baseline: baseline.to_string(),
                    attacker: c.key.attacker.clone(),
                    m: c.key.m,
                    alpha: c.key.alpha,
                    mean_difference: c.f_attacked.mean - o.f_attacked.mean,
                });
            }
        }
    }
    Summary { cells, comparisons }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        writeln!(
            out,
            "{:<12} {:<9} {:>4} {:>5} {:>6} {:>18} {:>18} {:>18}",
            "planner", "attacker", "m", "alpha", "n", "f_full", "f_attacked", "attack_rate"
        )?;
        let ms = |s: &Stats| format!("{:.3} ± {:.3}", s.mean, s.std);
        for c in &self.cells {
            writeln!(
                out,
                "{:<12} {:<9} {:>4} {:>5} {:>6} {:>18} {:>18} {:>18}",
                c.key.planner,
                c.key.attacker,
                c.key.m,
                c.key.alpha,
                c.f_attacked.count,
                ms(&c.f_full),
                ms(&c.f_attacked),
                c.attack_rate.as_ref().map_or("-".to_string(), ms),
            )?;
        }
        if !self.comparisons.is_empty() {
            writeln!(out)?;
            writeln!(
                out,
                "{:<24} {:<9} {:>4} {:>5} {:>12}",
                "comparison", "attacker", "m", "alpha", "mean diff"
            )?;
            for c in &self.comparisons {
                writeln!(
                    out,
                    "{:<24} {:<9} {:>4} {:>5} {:>12.4}",
                    format!("resilient - {}", c.baseline),
                    c.attacker,
                    c.m,
                    c.alpha,
                    c.mean_difference
                )?;
            }
        }
        f.write_str(&out)
    }
}
