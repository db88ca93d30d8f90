//! Markdown summary: category pass rates, SE per model and regime, regime
//! t-tests, correlation and complexity-shift counts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use obfubench_core::stats::{aggregate, pearson_r, welch_t_test, GroupKey, GroupRow, StatsError, TTestResult};
use obfubench_core::{Category, ComplexityShift, MetricRecord, Regime};

use super::ReportError;

const REGIMES: [Regime; 2] = [Regime::ZeroShot, Regime::FewShot];

/// Column heading used for a regime in the category table.
fn standard_label(regime: Regime) -> &'static str {
    match regime {
        Regime::ZeroShot => "Standard",
        Regime::FewShot => "Few-shot",
    }
}

fn pct(x: f64) -> String {
    format!("{x:.2}%")
}

fn f3(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn p_value(p: f64) -> String {
    if p < 1e-4 {
        format!("{p:.3e}")
    } else {
        format!("{p:.4}")
    }
}

/// Category rows in Table 2 layout: mean pass rate per regime, all models
/// pooled. A regime with no records shows `n/a`.
pub fn category_table(records: &[MetricRecord]) -> Result<String, ReportError> {
    let rows = aggregate(records, &[GroupKey::Regime, GroupKey::Category])?;
    let cell: BTreeMap<(Category, Regime), f64> = rows
        .iter()
        .filter_map(|r| Some(((r.label.category?, r.label.regime?), r.pass_rate_pct)))
        .collect();
    let categories: BTreeSet<Category> = records.iter().map(|r| r.category).collect();
    let mut out = String::new();
    writeln!(out, "| Category | {} | {} |", standard_label(REGIMES[0]), standard_label(REGIMES[1])).unwrap();
    out.push_str("|---|---|---|\n");
    for c in categories {
        let cells: Vec<String> = REGIMES
            .iter()
            .map(|r| cell.get(&(c, *r)).map_or_else(|| "n/a".into(), |v| pct(*v)))
            .collect();
        writeln!(out, "| {} | {} | {} |", c.display_name(), cells[0], cells[1]).unwrap();
    }
    Ok(out)
}

/// SE rows in Table 3 layout, models in lexicographic order and the
/// zero-shot row first within each model.
pub fn elasticity_table(records: &[MetricRecord]) -> Result<String, ReportError> {
    let mut rows = aggregate(records, &[GroupKey::Model, GroupKey::Regime])?;
    rows.sort_by(|a, b| (&a.label.model, a.label.regime).cmp(&(&b.label.model, b.label.regime)));
    let mut out = String::from("| Model | PET | Mean | Std Dev | Min | Max |\n|---|---|---|---|---|---|\n");
    for r in rows {
        let se = r.semantic_elasticity;
        writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} |",
            r.label.model.as_deref().unwrap_or_default(),
            r.label.regime.map(Regime::display_name).unwrap_or_default(),
            f3(se.mean),
            f3(se.std),
            f3(se.min),
            f3(se.max)
        )
        .unwrap();
    }
    Ok(out)
}

fn describe_test(name: &str, result: Result<TTestResult, StatsError>) -> String {
    match result {
        Ok(t) => format!(
            "- {name}: t = {}, df = {}, p = {} (n = {}, {})\n",
            f3(t.t_statistic),
            f3(t.degrees_of_freedom),
            p_value(t.p_value),
            t.n1,
            t.n2
        ),
        Err(e) => format!("- {name}: not computable ({e})\n"),
    }
}

fn regime_split(records: &[MetricRecord], metric: impl Fn(&MetricRecord) -> Option<f64>) -> (Vec<f64>, Vec<f64>) {
    let pick = |regime| records.iter().filter(|r| r.regime == regime).filter_map(&metric).collect();
    (pick(Regime::ZeroShot), pick(Regime::FewShot))
}

pub fn regime_tests(records: &[MetricRecord]) -> String {
    let present: BTreeSet<Regime> = records.iter().map(|r| r.regime).collect();
    if present.len() < 2 {
        let only = present.iter().next().map_or("no", |r| r.display_name());
        return format!("Omitted: the records cover a single prompt regime ({only}), so there is nothing to compare.\n");
    }
    let mut out = String::from("Welch two-tailed tests, standard (zero-shot) against few-shot:\n\n");
    let (a, b) = regime_split(records, |r| Some(r.pass_rate));
    out.push_str(&describe_test("Pass rate", welch_t_test(&a, &b)));
    let (a, b) = regime_split(records, |r| r.cc_delta.map(|d| d as f64));
    out.push_str(&describe_test("ΔCC", welch_t_test(&a, &b)));
    let (a, b) = regime_split(records, |r| r.entropy_delta);
    out.push_str(&describe_test("ΔH", welch_t_test(&a, &b)));
    out
}

pub fn correlation(records: &[MetricRecord]) -> String {
    let (x, y): (Vec<f64>, Vec<f64>) = records
        .iter()
        .filter_map(|r| Some((r.cc_delta? as f64, r.pass_rate)))
        .unzip();
    match pearson_r(&x, &y) {
        Ok(r) => format!("- Pearson r(ΔCC, pass rate) = {} (n = {})\n", f3(r), x.len()),
        Err(e) => format!("- Pearson r(ΔCC, pass rate): not computable ({e})\n"),
    }
}

/// Counts of reduced, unchanged and increased complexity per (model, PET),
/// followed by the functions whose complexity went down.
pub fn complexity_shift(records: &[MetricRecord]) -> String {
    let mut groups: BTreeMap<(&str, Regime), BTreeMap<ComplexityShift, Vec<&str>>> = BTreeMap::new();
    for r in records {
        if let Some(d) = r.cc_delta {
            groups
                .entry((r.model_id.as_str(), r.regime))
                .or_default()
                .entry(ComplexityShift::of(d))
                .or_default()
                .push(r.function_id.as_str());
        }
    }
    if groups.is_empty() {
        return "No record has a complexity change.\n".into();
    }
    let mut out = String::from("| Model | PET | Reduced | Unchanged | Increased |\n|---|---|---|---|---|\n");
    for ((model, regime), shifts) in &groups {
        let n = |s| shifts.get(&s).map_or(0, Vec::len);
        writeln!(
            out,
            "| {model} | {} | {} | {} | {} |",
            regime.display_name(),
            n(ComplexityShift::Reduced),
            n(ComplexityShift::Unchanged),
            n(ComplexityShift::Increased)
        )
        .unwrap();
    }
    out.push('\n');
    for ((model, regime), shifts) in &groups {
        if let Some(ids) = shifts.get(&ComplexityShift::Reduced) {
            let mut ids = ids.clone();
            ids.sort_unstable();
            writeln!(out, "- Reduced complexity, {model} / {}: {}", regime.display_name(), ids.join(", ")).unwrap();
        }
    }
    out
}

/// Table of the mean of every metric per group, for `stats --group`.
pub fn group_table(records: &[MetricRecord], keys: &[GroupKey]) -> Result<String, ReportError> {
    let rows = aggregate(records, keys)?;
    let mut out = String::new();
    let mut head: Vec<&str> = Vec::new();
    for k in [GroupKey::Model, GroupKey::Regime, GroupKey::Category] {
        if keys.contains(&k) {
            head.push(match k {
                GroupKey::Model => "Model",
                GroupKey::Regime => "PET",
                GroupKey::Category => "Category",
            });
        }
    }
    head.extend(["n", "Pass rate", "E", "ΔCC", "ΔH", "ΔT (s)", "SE"]);
    writeln!(out, "| {} |", head.join(" | ")).unwrap();
    writeln!(out, "|{}", "---|".repeat(head.len())).unwrap();
    for r in &rows {
        writeln!(out, "| {} |", group_cells(r).join(" | ")).unwrap();
    }
    Ok(out)
}

fn group_cells(r: &GroupRow) -> Vec<String> {
    let mean = |d: Option<obfubench_core::stats::DescriptiveStats>| d.map_or_else(|| "n/a".into(), |d| f3(d.mean));
    let mut cells = Vec::new();
    cells.extend(r.label.model.clone());
    cells.extend(r.label.regime.map(|g| g.display_name().to_string()));
    cells.extend(r.label.category.map(|c| c.display_name().to_string()));
    cells.push(r.n.to_string());
    cells.push(pct(r.pass_rate_pct));
    cells.push(mean(r.expansion));
    cells.push(mean(r.cc_delta));
    cells.push(mean(r.entropy_delta));
    cells.push(mean(r.time_delta));
    cells.push(f3(r.semantic_elasticity.mean));
    cells
}

pub fn render_summary(records: &[MetricRecord]) -> Result<String, ReportError> {
    if records.is_empty() {
        return Err(ReportError::EmptyInput);
    }
    let models: BTreeSet<&str> = records.iter().map(|r| r.model_id.as_str()).collect();
    let mut out = String::from("# Obfuscation benchmark summary\n\n");
    writeln!(
        out,
        "{} records, models: {}.\n",
        records.len(),
        models.into_iter().collect::<Vec<_>>().join(", ")
    )
    .unwrap();
    out.push_str("## Pass rate by category\n\n");
    out.push_str(&category_table(records)?);
    out.push_str("\n## Semantic Elasticity\n\n");
    out.push_str(&elasticity_table(records)?);
    out.push_str("\n## Regime comparison\n\n");
    out.push_str(&regime_tests(records));
    out.push_str("\n## Correlation\n\n");
    out.push_str(&correlation(records));
    out.push_str("\n## Complexity shift\n\n");
    out.push_str(&complexity_shift(records));
    Ok(out)
}
