//! Welch t-tests, Pearson correlation, descriptive statistics and grouped
//! aggregation over metric records.

mod special;

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use libm::sqrt;
use thiserror::Error;

use crate::metrics::MetricRecord;
use crate::types::{Category, Regime};

pub use special::regularized_incomplete_beta;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("need at least {needed} values, got {got}")]
    InsufficientSample { needed: usize, got: usize },
    #[error("both samples are constant with different means")]
    ZeroVarianceBoth,
    #[error("input is constant")]
    ConstantInput,
    #[error("samples have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    EmptyInput,
    #[error("non-finite value in input")]
    NonFinite,
    #[error("incomplete beta evaluation did not converge")]
    NoConvergence,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTestResult {
    pub t_statistic: f64,
    pub degrees_of_freedom: f64,
    /// Two-tailed.
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_variance(xs: &[f64], m: f64) -> f64 {
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

fn check_finite(xs: &[f64]) -> Result<(), StatsError> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(StatsError::NonFinite)
    }
}

/// Two-tailed p-value of a t statistic with `df` degrees of freedom.
pub fn student_t_two_tailed(t: f64, df: f64) -> Result<f64, StatsError> {
    let x = df / (df + t * t);
    let p = regularized_incomplete_beta(x, df / 2.0, 0.5).map_err(|_| StatsError::NoConvergence)?;
    Ok(p.clamp(f64::MIN_POSITIVE, 1.0))
}

/// Unequal-variance two-sample t-test with Welch–Satterthwaite degrees of
/// freedom.
///
/// Two constant samples with the same value give `t = 0, p = 1`.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TTestResult, StatsError> {
    for s in [a, b] {
        if s.len() < 2 {
            return Err(StatsError::InsufficientSample { needed: 2, got: s.len() });
        }
        check_finite(s)?;
    }
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let (m1, m2) = (mean(a), mean(b));
    let (se1, se2) = (sample_variance(a, m1) / n1, sample_variance(b, m2) / n2);
    let se_sum = se1 + se2;
    if se_sum == 0.0 {
        if m1 != m2 {
            return Err(StatsError::ZeroVarianceBoth);
        }
        return Ok(TTestResult {
            t_statistic: 0.0,
            degrees_of_freedom: n1 + n2 - 2.0,
            p_value: 1.0,
            n1: a.len(),
            n2: b.len(),
        });
    }
    let t = (m1 - m2) / sqrt(se_sum);
    let df = se_sum * se_sum / (se1 * se1 / (n1 - 1.0) + se2 * se2 / (n2 - 1.0));
    Ok(TTestResult {
        t_statistic: t,
        degrees_of_freedom: df,
        p_value: student_t_two_tailed(t, df)?,
        n1: a.len(),
        n2: b.len(),
    })
}

/// Sample Pearson correlation coefficient.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::InsufficientSample { needed: 2, got: x.len() });
    }
    check_finite(x)?;
    check_finite(y)?;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        let (dx, dy) = (xi - mx, yi - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ConstantInput);
    }
    Ok((sxy / sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescriptiveStats {
    pub mean: f64,
    /// Sample (n - 1) standard deviation; zero for a single value.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

pub fn describe(values: &[f64]) -> Result<DescriptiveStats, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    check_finite(values)?;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // summation rounding can push the mean of equal values past them
    let m = mean(values).clamp(min, max);
    let std = if values.len() == 1 {
        0.0
    } else {
        sqrt(sample_variance(values, m))
    };
    Ok(DescriptiveStats {
        mean: m,
        std,
        min,
        max,
        n: values.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupKey {
    Model,
    Regime,
    Category,
}

impl core::str::FromStr for GroupKey {
    type Err = crate::types::UnknownVariant;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "model" => Ok(Self::Model),
            "regime" | "pet" => Ok(Self::Regime),
            "category" => Ok(Self::Category),
            other => Err(crate::types::UnknownVariant(other.into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroupLabel {
    pub model: Option<String>,
    pub regime: Option<Regime>,
    pub category: Option<Category>,
}

impl GroupLabel {
    fn sort_key(&self) -> Vec<String> {
        let mut key = Vec::new();
        key.extend(self.model.clone());
        key.extend(self.regime.map(|r| r.as_str().to_string()));
        key.extend(self.category.map(|c| c.as_str().to_string()));
        key
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupRow {
    pub label: GroupLabel,
    pub n: usize,
    pub pass_rate: DescriptiveStats,
    /// Mean pass rate as a percentage.
    pub pass_rate_pct: f64,
    pub expansion: Option<DescriptiveStats>,
    pub cc_delta: Option<DescriptiveStats>,
    pub entropy_delta: Option<DescriptiveStats>,
    pub time_delta: Option<DescriptiveStats>,
    pub semantic_elasticity: DescriptiveStats,
}

fn describe_present(values: impl Iterator<Item = Option<f64>>) -> Option<DescriptiveStats> {
    let v: Vec<f64> = values.flatten().collect();
    describe(&v).ok()
}

/// One row per combination of the requested keys, ordered lexicographically
/// by (model, regime, category) identifiers. Missing values of a metric are
/// skipped; a metric with no values in a group is `None`.
pub fn aggregate(records: &[MetricRecord], keys: &[GroupKey]) -> Result<Vec<GroupRow>, StatsError> {
    if records.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let mut groups: BTreeMap<Vec<String>, (GroupLabel, Vec<&MetricRecord>)> = BTreeMap::new();
    for r in records {
        let label = GroupLabel {
            model: keys.contains(&GroupKey::Model).then(|| r.model_id.clone()),
            regime: keys.contains(&GroupKey::Regime).then_some(r.regime),
            category: keys.contains(&GroupKey::Category).then_some(r.category),
        };
        groups
            .entry(label.sort_key())
            .or_insert_with(|| (label, Vec::new()))
            .1
            .push(r);
    }
    groups
        .into_values()
        .map(|(label, rows)| {
            let pass: Vec<f64> = rows.iter().map(|r| r.pass_rate).collect();
            let se: Vec<f64> = rows.iter().map(|r| r.semantic_elasticity).collect();
            let pass_rate = describe(&pass)?;
            Ok(GroupRow {
                label,
                n: rows.len(),
                pass_rate_pct: pass_rate.mean * 100.0,
                pass_rate,
                expansion: describe_present(rows.iter().map(|r| r.expansion)),
                cc_delta: describe_present(rows.iter().map(|r| r.cc_delta.map(|d| d as f64))),
                entropy_delta: describe_present(rows.iter().map(|r| r.entropy_delta)),
                time_delta: describe_present(rows.iter().map(|r| r.time_delta)),
                semantic_elasticity: describe(&se)?,
            })
        })
        .collect()
}
