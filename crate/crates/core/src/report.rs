//! CSV serialization of every report type. Columns are fixed, a header row
//! is always written and floats carry six decimals.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use crate::constraints::{Constraint, ConstraintReport};
use crate::error::Result;
use crate::experiments::{FusionEvalReport, TrialRecord};
use crate::meta::{mu_ranking, MUReport};
use crate::metrics::MetricReport;
use crate::types::{Collection, TopicId};

/// Topic label of per-run mean rows.
pub const ALL_TOPICS: &str = "all";

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.6}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn writer(w: impl Write) -> csv::Writer<impl Write> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

/// Long format: one row per `(metric, run, topic)` plus one mean row per
/// `(metric, run)` with topic `all`. The mean row's collection size is
/// filled in only when every topic shares it.
pub fn write_metric_reports(
    w: impl Write,
    reports: &[MetricReport],
    collections: &BTreeMap<TopicId, Collection>,
) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["metric", "run", "topic", "score", "collection_size"])?;
    let sizes: BTreeSet<u64> = collections.values().map(Collection::size).collect();
    let shared = if sizes.len() == 1 { sizes.first().map(u64::to_string).unwrap_or_default() } else { String::new() };
    for report in reports {
        let metric = report.metric.to_string();
        let mut by_run: BTreeMap<&str, Vec<(&str, f64)>> = BTreeMap::new();
        for ((topic, run), &v) in &report.per_topic {
            by_run.entry(run).or_default().push((topic, v));
        }
        for (run, rows) in by_run {
            for (topic, v) in rows {
                let size = collections.get(topic).map(|c| c.size().to_string()).unwrap_or_default();
                out.write_record([metric.as_str(), run, topic, &fmt_f64(v), &size])?;
            }
            out.write_record([metric.as_str(), run, ALL_TOPICS, &fmt_f64(report.means[run]), &shared])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// One row per metric in MU rank order.
pub fn write_mu_report(w: impl Write, report: &MUReport) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["rank", "metric", "mu", "joint", "marginal_unanimous", "pairs", "tie_credit", "mode"])?;
    for (i, m) in mu_ranking(report).iter().enumerate() {
        let c = report.counts[m];
        out.write_record([
            (i + 1).to_string(),
            m.to_string(),
            fmt_f64(report.mu[m]),
            fmt_f64(c.joint),
            fmt_f64(c.marginal_unanimous),
            c.pairs.to_string(),
            fmt_f64(report.tie_credit),
            report.mode.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "fail"
    }
}

/// Wide format: one row per metric, one verdict column per constraint and
/// the suite parameters.
pub fn write_constraint_matrix(w: impl Write, reports: &[ConstraintReport]) -> Result<()> {
    let mut out = writer(w);
    let mut header = vec!["metric".to_string()];
    header.extend(Constraint::ALL.iter().map(|c| c.to_string()));
    header.push("suite".into());
    out.write_record(&header)?;
    for r in reports {
        let mut row = vec![r.metric.to_string()];
        row.extend(Constraint::ALL.iter().map(|&c| verdict(r.verdict(c)).to_string()));
        row.push(r.generator_params.to_string());
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Long format: one row per generated case and metric.
pub fn write_constraint_cases(w: impl Write, reports: &[ConstraintReport]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["metric", "constraint", "case", "lhs", "rhs", "holds"])?;
    for r in reports {
        let metric = r.metric.to_string();
        for o in &r.outcomes {
            out.write_record([
                metric.clone(),
                o.constraint.to_string(),
                o.label.clone(),
                format!("{:e}", o.lhs),
                format!("{:e}", o.rhs),
                o.holds.to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// `trial_id, x, y, defined`, then one column per meta key (sorted union).
pub fn write_trials(w: impl Write, records: &[TrialRecord]) -> Result<()> {
    let keys: BTreeSet<&str> = records.iter().flat_map(|r| r.meta.keys().map(String::as_str)).collect();
    let mut out = writer(w);
    let mut header = vec!["trial_id", "x", "y", "defined"];
    header.extend(keys.iter().copied());
    out.write_record(&header)?;
    for r in records {
        let mut row = vec![r.trial_id.to_string(), fmt_opt(r.x), fmt_opt(r.y), r.is_defined().to_string()];
        row.extend(keys.iter().map(|k| r.meta.get(*k).cloned().unwrap_or_default()));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// One row per system, then the best single system and both fusions.
pub fn write_fusion_eval(w: impl Write, report: &FusionEvalReport) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["name", "kind", "mean_oie", "topics"])?;
    let topics = report.topics.to_string();
    for (run, &v) in &report.per_system {
        out.write_record([run.as_str(), "system", &fmt_f64(v), &topics])?;
    }
    for (name, v) in [("max_single", report.max_single), ("borda", report.borda), ("bordalog", report.borda_log)] {
        out.write_record([name, "summary", &fmt_f64(v), &topics])?;
    }
    out.flush()?;
    Ok(())
}
