//! Metric reports projected from investigation logs. A report is a
//! pure function of the log: every number is recomputable from the
//! records, and equal logs produce byte-identical reports.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::pddl::Name;
use crate::round::{HostsetStatus, InvestigationLog};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Reference figures measured on the production-scale deployment this
/// system models, reported alongside desk-scale results for context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceFigures {
    pub rounds_to_resolution_band: String,
    pub mean_changes_per_replan: f64,
    pub typical_plan_size: f64,
    pub rounds_per_week: f64,
    pub overhead_fraction: f64,
}

impl Default for ReferenceFigures {
    fn default() -> Self {
        ReferenceFigures {
            rounds_to_resolution_band: "14-15".into(),
            mean_changes_per_replan: 6.1,
            typical_plan_size: 120.0,
            rounds_per_week: 640.0,
            overhead_fraction: 0.0665,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundSeries {
    pub round: u32,
    pub goals: usize,
    pub plan_size: usize,
    pub diff_added: usize,
    pub diff_canceled: usize,
    pub executed: usize,
    pub planning_ms: u64,
    pub tactical_ms: u64,
    pub execution_ms: u64,
    pub other_ms: u64,
    pub terminated: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResolutionStats {
    pub resolved_roots: usize,
    pub min_rounds: u32,
    pub median_rounds: f64,
    pub max_rounds: u32,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Aggregates {
    pub total_rounds: usize,
    pub hostsets_analyzed: usize,
    pub hostsets_flagged: usize,
    pub hostsets_discarded: usize,
    pub hosts_total: usize,
    pub hosts_flagged: usize,
    pub mean_flags_per_flagged_host: f64,
    pub mean_plan_size: f64,
    /// Mean |added| + |canceled| over replanning rounds (round >= 2).
    pub mean_changes_per_replan: f64,
    /// Same mean including the first round's all-new plan.
    pub mean_changes_including_first: f64,
    /// Per-root span from first worked round to resolution round.
    pub rounds_to_resolution: ResolutionStats,
    pub total_deployments: usize,
    /// (planning + tactical + other) / total simulated time.
    pub overhead_fraction: f64,
}

/// Desk-scale analog of per-week activity: rounds bucketed by 1,000
/// simulated minutes of execution time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityBucket {
    pub bucket: u64,
    pub rounds: usize,
    pub mean_plan_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub references: ReferenceFigures,
    pub aggregates: Aggregates,
    pub buckets: Vec<ActivityBucket>,
    pub series: Vec<RoundSeries>,
}

/// Milliseconds per reporting bucket (1,000 simulated minutes).
const BUCKET_MS: u64 = 1_000 * 60_000;

/// Projects a report from an investigation log.
pub fn build_report(log: &InvestigationLog) -> Report {
    let series: Vec<RoundSeries> = log
        .rounds
        .iter()
        .map(|r| RoundSeries {
            round: r.round,
            goals: r.goals.len(),
            plan_size: r.plan.actions.len(),
            diff_added: r.diff.added.len(),
            diff_canceled: r.diff.canceled.len(),
            executed: r.executed.len(),
            planning_ms: r.timings.planning_ms,
            tactical_ms: r.timings.tactical_ms,
            execution_ms: r.timings.execution_ms,
            other_ms: r.timings.other_ms,
            terminated: r.terminated,
        })
        .collect();

    // Lineage from creation events; everything else is a root.
    let mut parent_of: BTreeMap<Name, Name> = BTreeMap::new();
    let mut members_of: BTreeMap<Name, BTreeSet<String>> = BTreeMap::new();
    for record in &log.rounds {
        for c in &record.created {
            parent_of.insert(c.hostset.clone(), c.parent.clone());
            members_of.insert(c.hostset.clone(), c.members.iter().cloned().collect());
        }
        for r in &record.resolved {
            members_of
                .entry(r.hostset.clone())
                .or_insert_with(|| r.members.iter().cloned().collect());
        }
    }
    let mut seen: BTreeSet<Name> = parent_of.keys().cloned().collect();
    for record in &log.rounds {
        seen.extend(record.goals.iter().cloned());
        for r in &record.resolved {
            seen.insert(r.hostset.clone());
        }
    }
    let root_of = |h: &Name| -> Name {
        let mut cur = h.clone();
        while let Some(p) = parent_of.get(&cur) {
            cur = p.clone();
        }
        cur
    };
    let roots: BTreeSet<Name> = seen.iter().map(&root_of).collect();
    let has_children: BTreeSet<&Name> = parent_of.values().collect();

    let resolutions = log.resolution_rounds();
    let mut hostsets_flagged = 0;
    let mut hostsets_discarded = 0;
    let mut flagged_leaf_members: Vec<&BTreeSet<String>> = Vec::new();
    for (hostset, (_, status)) in &resolutions {
        match status {
            HostsetStatus::Flagged => hostsets_flagged += 1,
            HostsetStatus::Discarded => hostsets_discarded += 1,
            HostsetStatus::Active => {}
        }
        if *status == HostsetStatus::Flagged && !has_children.contains(hostset) {
            if let Some(members) = members_of.get(hostset) {
                flagged_leaf_members.push(members);
            }
        }
    }
    let hosts_total: BTreeSet<&String> = members_of.values().flatten().collect();
    let mut flag_counts: BTreeMap<&String, usize> = BTreeMap::new();
    for members in &flagged_leaf_members {
        for m in members.iter() {
            *flag_counts.entry(m).or_default() += 1;
        }
    }
    let hosts_flagged = flag_counts.len();
    let mean_flags = if hosts_flagged == 0 {
        0.0
    } else {
        flag_counts.values().sum::<usize>() as f64 / hosts_flagged as f64
    };

    // Per-root span: first round that executed an action on the
    // subtree through the root's resolution round.
    let first_worked = log.first_worked_rounds();
    let mut root_first: BTreeMap<Name, u32> = BTreeMap::new();
    for (hostset, round) in &first_worked {
        let root = root_of(hostset);
        let entry = root_first.entry(root).or_insert(*round);
        *entry = (*entry).min(*round);
    }
    let mut spans: Vec<u32> = Vec::new();
    for root in &roots {
        if let (Some(first), Some((resolved, _))) = (root_first.get(root), resolutions.get(root)) {
            spans.push(resolved - first + 1);
        }
    }
    spans.sort_unstable();
    let resolution_stats = if spans.is_empty() {
        ResolutionStats::default()
    } else {
        let median = if spans.len() % 2 == 1 {
            f64::from(spans[spans.len() / 2])
        } else {
            f64::from(spans[spans.len() / 2 - 1] + spans[spans.len() / 2]) / 2.0
        };
        ResolutionStats {
            resolved_roots: spans.len(),
            min_rounds: spans[0],
            median_rounds: median,
            max_rounds: *spans.last().expect("nonempty"),
        }
    };

    let planned: Vec<&RoundSeries> = series.iter().filter(|s| !s.terminated).collect();
    let mean_plan_size = mean(planned.iter().map(|s| s.plan_size as f64));
    let mean_changes_including_first =
        mean(planned.iter().map(|s| (s.diff_added + s.diff_canceled) as f64));
    let mean_changes_per_replan = mean(
        planned
            .iter()
            .filter(|s| s.round >= 2)
            .map(|s| (s.diff_added + s.diff_canceled) as f64),
    );

    let total_time: u64 = series.iter().map(|s| s.planning_ms + s.tactical_ms + s.execution_ms + s.other_ms).sum();
    let overhead: u64 = series.iter().map(|s| s.planning_ms + s.tactical_ms + s.other_ms).sum();
    let overhead_fraction = if total_time == 0 {
        0.0
    } else {
        overhead as f64 / total_time as f64
    };

    // Activity per 1,000 simulated minutes of execution time.
    let mut buckets: BTreeMap<u64, (usize, usize)> = BTreeMap::new();
    let mut cumulative_ms = 0u64;
    for s in &series {
        cumulative_ms += s.execution_ms;
        let bucket = cumulative_ms / BUCKET_MS;
        let entry = buckets.entry(bucket).or_default();
        entry.0 += 1;
        entry.1 += s.plan_size;
    }
    let buckets: Vec<ActivityBucket> = buckets
        .into_iter()
        .map(|(bucket, (rounds, plan_sizes))| ActivityBucket {
            bucket,
            rounds,
            mean_plan_size: if rounds == 0 { 0.0 } else { plan_sizes as f64 / rounds as f64 },
        })
        .collect();

    Report {
        schema_version: REPORT_SCHEMA_VERSION,
        references: ReferenceFigures::default(),
        aggregates: Aggregates {
            total_rounds: series.len(),
            hostsets_analyzed: seen.len(),
            hostsets_flagged,
            hostsets_discarded,
            hosts_total: hosts_total.len(),
            hosts_flagged,
            mean_flags_per_flagged_host: mean_flags,
            mean_plan_size,
            mean_changes_per_replan,
            mean_changes_including_first,
            rounds_to_resolution: resolution_stats,
            total_deployments: log.rounds.iter().map(|r| r.deployments.len()).sum(),
            overhead_fraction,
        },
        buckets,
        series,
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for v in values {
        sum += v;
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

pub fn report_json(report: &Report) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

/// Fixed column order, one data row per round record.
pub const CSV_HEADER: &str = "round,goals,plan_size,diff_added,diff_canceled,executed,planning_ms,tactical_ms,execution_ms,other_ms,terminated";

pub fn report_csv(report: &Report) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for s in &report.series {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            s.round,
            s.goals,
            s.plan_size,
            s.diff_added,
            s.diff_canceled,
            s.executed,
            s.planning_ms,
            s.tactical_ms,
            s.execution_ms,
            s.other_ms,
            s.terminated,
        ));
    }
    out
}
