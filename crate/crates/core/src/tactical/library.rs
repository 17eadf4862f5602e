//! Default component library (49 stream + 16 batch components) and the
//! strategic-action-to-tag mapping covering every schema the domain
//! generator produces.

use std::collections::BTreeMap;

use crate::netadmin::{DomainConfig, POP_TO_ADMIN, PROTOCOL_SENSOR};
use crate::num::Num;
use crate::tactical::{ArgBinding, Component, Platform, TagGoal, TagMapping, TagSet};

/// Tags available at deployment time without running any component.
pub const SOURCE_TAGS: [&str; 5] = [
    "dns-stream",
    "flow-stream",
    "sflow-stream",
    "blacklist-feed",
    "metadata",
];

pub fn source_tags() -> TagSet {
    SOURCE_TAGS.iter().map(|s| s.to_string()).collect()
}

fn comp(
    id: &str,
    platform: Platform,
    inputs: &[&str],
    outputs: &[&str],
    cost: u64,
    params: &[(&str, &str)],
) -> Component {
    Component {
        id: id.to_string(),
        platform,
        input_tags: inputs.iter().map(|s| s.to_string()).collect(),
        output_tags: outputs.iter().map(|s| s.to_string()).collect(),
        unit_cost: Num::from_int(cost),
        params: params
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect(),
    }
}

const STREAM_COUNT: usize = 49;
const BATCH_COUNT: usize = 16;

/// Builds the default library. Filler components consume parsed feeds
/// and emit tags nothing else needs, so they never shorten a mapped
/// goal's flow.
pub fn default_library() -> Vec<Component> {
    use Platform::{Batch, Stream};
    let hs = [("hostset", "string")];
    let mut lib = vec![
        // Parsing and ingestion.
        comp("dns-parser", Stream, &["dns-stream"], &["dns-parsed"], 1, &[]),
        comp("flow-parser", Stream, &["flow-stream"], &["flow-parsed"], 1, &[]),
        comp("sflow-parser", Stream, &["sflow-stream"], &["sflow-parsed"], 1, &[]),
        comp("flow-ingestor", Stream, &["flow-parsed"], &["flow-ingest"], 1, &hs),
        comp("dns-ingestor", Stream, &["dns-parsed"], &["dns-ingest"], 1, &hs),
        // Setup-chain analytics.
        comp(
            "blacklist-matcher",
            Stream,
            &["dns-parsed", "blacklist-feed"],
            &["blacklist-extract"],
            2,
            &hs,
        ),
        comp("frequent-host-counter", Stream, &["flow-parsed"], &["frequent-hosts"], 2, &hs),
        comp("window-aligner", Stream, &["flow-parsed"], &["window-align"], 1, &hs),
        comp("traffic-aggregator", Stream, &["flow-parsed"], &["traffic-aggregate"], 2, &hs),
        comp("protocol-grouper", Stream, &["flow-parsed"], &["protocol-group"], 2, &hs),
        comp(
            "protocol-sense-splitter",
            Stream,
            &["protocol-group"],
            &["protocol-sense", "split"],
            3,
            &hs,
        ),
        // Per-protocol branch analytics.
        comp("http-filter", Stream, &["flow-parsed"], &["http-traffic", "filter"], 2, &hs),
        comp("tcp-filter", Stream, &["flow-parsed"], &["tcp-traffic", "filter"], 2, &hs),
        comp("smtp-filter", Stream, &["flow-parsed"], &["smtp-traffic", "filter"], 2, &hs),
        comp("http-model-comparator", Stream, &["http-traffic"], &["model-compare"], 3, &hs),
        comp("tcp-model-comparator", Stream, &["tcp-traffic"], &["model-compare"], 3, &hs),
        comp("smtp-model-comparator", Stream, &["smtp-traffic"], &["model-compare"], 3, &hs),
        comp("traffic-correlator", Stream, &["filter"], &["correlate"], 2, &hs),
        comp("refinement-splitter", Stream, &["model-compare"], &["split"], 2, &hs),
        comp("anomaly-marker", Stream, &["model-compare"], &["anomaly-mark"], 2, &hs),
        // Reporting.
        comp("report-builder", Stream, &["metadata"], &["report"], 1, &hs),
        comp("admin-notifier", Stream, &["report"], &["admin-notify"], 1, &hs),
    ];

    // Batch analytics (model building and archival reporting).
    lib.extend([
        comp("history-archiver", Batch, &["flow-parsed"], &["flow-archive"], 2, &[]),
        comp("dns-archiver", Batch, &["dns-parsed"], &["dns-archive"], 2, &[]),
        comp("model-builder", Batch, &["flow-archive"], &["traffic-model"], 4, &[]),
        comp("model-refresher", Batch, &["traffic-model"], &["model-refresh"], 3, &[]),
        comp("daily-rollup", Batch, &["flow-archive"], &["daily-rollup"], 2, &[]),
        comp("weekly-rollup", Batch, &["daily-rollup"], &["weekly-rollup"], 2, &[]),
    ]);

    let stream_so_far = lib.iter().filter(|c| c.platform == Platform::Stream).count();
    for i in 0..STREAM_COUNT - stream_so_far {
        lib.push(comp(
            &format!("stream-probe-{i:02}"),
            Stream,
            &["flow-parsed"],
            &[&format!("probe-metric-{i:02}")],
            1,
            &[],
        ));
    }
    let batch_so_far = lib.iter().filter(|c| c.platform == Platform::Batch).count();
    for i in 0..BATCH_COUNT - batch_so_far {
        lib.push(comp(
            &format!("pig-rollup-{i:02}"),
            Batch,
            &["flow-archive"],
            &[&format!("rollup-metric-{i:02}")],
            1,
            &[],
        ));
    }
    lib
}

fn goal(tags: &[&str], bind: &[(&str, ArgBinding)]) -> TagGoal {
    TagGoal {
        tags: tags.iter().map(|s| s.to_string()).collect(),
        bind: bind
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect(),
    }
}

/// Default action-to-tag mapping for every schema the configured
/// domain generates.
pub fn default_mapping(config: &DomainConfig) -> TagMapping {
    let hs = ("hostset", ArgBinding::Arg(0));
    let mut entries: BTreeMap<String, TagGoal> = BTreeMap::new();

    let setup_goals: [(&str, &[&str]); 8] = [
        ("ingest-flows", &["flow-ingest"]),
        ("ingest-dns", &["dns-ingest"]),
        ("extract-blacklist", &["blacklist-extract"]),
        ("check-frequent-hosts", &["frequent-hosts"]),
        ("align-windows", &["window-align"]),
        ("build-baseline", &["traffic-model"]),
        ("aggregate-traffic", &["traffic-aggregate"]),
        ("group-by-protocol", &["protocol-group"]),
    ];
    for (i, (name, tags)) in setup_goals.iter().enumerate() {
        if i < config.setup_chain_length {
            entries.insert(name.to_string(), goal(tags, &[hs.clone()]));
        }
    }
    for i in 8..config.setup_chain_length {
        entries.insert(
            format!("prepare-pass-{}", i + 1),
            goal(&["window-align"], &[hs.clone()]),
        );
    }

    entries.insert(
        PROTOCOL_SENSOR.to_string(),
        goal(&["protocol-sense", "split"], &[hs.clone()]),
    );

    for p in &config.protocols {
        let proto = ("protocol", ArgBinding::Value(p.to_string()));
        let traffic = format!("{p}-traffic");
        entries.insert(
            format!("filter-{p}"),
            goal(&[&traffic, "filter"], &[hs.clone(), proto.clone()]),
        );
        for k in 1..=config.branch_length.saturating_sub(4) {
            entries.insert(
                format!("correlate-pass-{k}-{p}"),
                goal(&[&traffic, "correlate"], &[hs.clone(), proto.clone()]),
            );
        }
        entries.insert(
            format!("compare-model-{p}"),
            goal(&[&traffic, "model-compare"], &[hs.clone(), proto.clone()]),
        );
        entries.insert(
            format!("sense-refine-{p}"),
            goal(&[&traffic, "model-compare", "split"], &[hs.clone(), proto.clone()]),
        );
        entries.insert(
            format!("mark-anomalous-{p}"),
            goal(&[&traffic, "anomaly-mark"], &[hs.clone(), proto]),
        );
    }

    entries.insert(
        POP_TO_ADMIN.to_string(),
        goal(&["report", "admin-notify"], &[hs]),
    );

    TagMapping { entries }
}
