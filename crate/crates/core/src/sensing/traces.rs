//! Synthetic network traces with injected anomalies and ground truth.
//!
//! Three record kinds are generated per host from configured baseline
//! rates: DNS queries, flow summaries, and sampled-packet digests.
//! Injected anomalies modify the matching host's records: volume
//! multiplies flow bytes, blacklist-contact adds DNS queries to
//! blacklisted domains, geo-spread fans flows out across many distinct
//! peer prefixes. Generation is a pure function of (config, spec,
//! seed).

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::pddl::{name, Name};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TraceRecord {
    Dns {
        host: String,
        ts: u64,
        domain: String,
    },
    Flow {
        host: String,
        ts: u64,
        peer: String,
        bytes: u64,
        protocol: Name,
    },
    #[serde(rename = "sampledflow")]
    SampledFlow {
        host: String,
        ts: u64,
        digest: String,
    },
}

impl TraceRecord {
    pub fn ts(&self) -> u64 {
        match self {
            TraceRecord::Dns { ts, .. }
            | TraceRecord::Flow { ts, .. }
            | TraceRecord::SampledFlow { ts, .. } => *ts,
        }
    }

    pub fn host(&self) -> &str {
        match self {
            TraceRecord::Dns { host, .. }
            | TraceRecord::Flow { host, .. }
            | TraceRecord::SampledFlow { host, .. } => host,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TraceSet {
    /// Host universe covered by these traces.
    pub hosts: Vec<String>,
    pub dns: Vec<TraceRecord>,
    pub flows: Vec<TraceRecord>,
    pub sampled: Vec<TraceRecord>,
    /// Blacklisted domains, one per line in the sidecar file.
    pub blacklist: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnomalyKind {
    None,
    Volume,
    BlacklistContact,
    GeoSpread,
}

/// Injected-anomaly labels for every host in the universe.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GroundTruth {
    pub hosts: BTreeMap<String, AnomalyKind>,
}

impl GroundTruth {
    pub fn anomalous(&self) -> impl Iterator<Item = (&String, AnomalyKind)> {
        self.hosts
            .iter()
            .filter(|(_, k)| **k != AnomalyKind::None)
            .map(|(h, k)| (h, *k))
    }
}

/// How many hosts of each anomaly kind to inject.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct AnomalySpec {
    pub volume: usize,
    pub blacklist_contact: usize,
    pub geo_spread: usize,
}

impl AnomalySpec {
    pub fn total(&self) -> usize {
        self.volume + self.blacklist_contact + self.geo_spread
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TraceConfig {
    pub n_hosts: usize,
    pub duration_hours: u32,
    pub flow_rate_per_hour: f64,
    pub dns_rate_per_hour: f64,
    pub sampled_rate_per_hour: f64,
    /// Flow-byte multiplier for volume-anomalous hosts.
    pub volume_multiplier: u64,
    /// Distinct peer prefixes contacted by geo-spread hosts.
    pub geo_prefix_count: usize,
    /// Distinct peer prefixes of ordinary traffic.
    pub clean_prefix_pool: usize,
    pub base_flow_bytes: u64,
    /// Background perturbation probability; 0 keeps generation exactly
    /// separable by the default thresholds.
    pub noise: f64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig {
            n_hosts: 100,
            duration_hours: 24,
            flow_rate_per_hour: 20.0,
            dns_rate_per_hour: 10.0,
            sampled_rate_per_hour: 2.0,
            volume_multiplier: 10,
            geo_prefix_count: 24,
            clean_prefix_pool: 4,
            base_flow_bytes: 1200,
            noise: 0.0,
        }
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum TraceError {
    #[error("host count must be at least 1")]
    NoHosts,
    #[error("duration must be at least 1 hour")]
    TooShort,
    #[error("{total} anomalies exceed {hosts} hosts")]
    TooManyAnomalies { total: usize, hosts: usize },
    #[error("trace io: {0}")]
    Io(String),
}

pub fn host_name(index: usize, total: usize) -> String {
    let width = total.to_string().len().max(3);
    format!("host-{index:0width$}")
}

const CLEAN_DOMAINS: usize = 20;
const BLACKLIST_DOMAINS: usize = 8;

/// Poisson sample via inversion; fine for per-hour rates.
fn poisson(rng: &mut ChaCha8Rng, rate: f64) -> usize {
    let limit = (-rate).exp();
    let mut product: f64 = rng.gen();
    let mut count = 0usize;
    while product > limit {
        product *= rng.gen::<f64>();
        count += 1;
    }
    count
}

/// Generates traces plus the ground-truth labels.
pub fn generate_traces(
    config: &TraceConfig,
    spec: &AnomalySpec,
    seed: u64,
) -> Result<(TraceSet, GroundTruth), TraceError> {
    if config.n_hosts < 1 {
        return Err(TraceError::NoHosts);
    }
    if config.duration_hours < 1 {
        return Err(TraceError::TooShort);
    }
    if spec.total() > config.n_hosts {
        return Err(TraceError::TooManyAnomalies {
            total: spec.total(),
            hosts: config.n_hosts,
        });
    }

    let hosts: Vec<String> = (0..config.n_hosts)
        .map(|i| host_name(i, config.n_hosts))
        .collect();
    let blacklist: Vec<String> = (0..BLACKLIST_DOMAINS)
        .map(|i| format!("sinkhole-{i:02}.blocked.example"))
        .collect();
    let clean_domains: Vec<String> = (0..CLEAN_DOMAINS)
        .map(|i| format!("svc-{i:02}.intra.example"))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Assign anomaly kinds to seed-chosen hosts.
    let mut indices: Vec<usize> = (0..config.n_hosts).collect();
    for i in (1..indices.len()).rev() {
        let j = rng.gen_range(0..=i);
        indices.swap(i, j);
    }
    let mut truth = GroundTruth::default();
    for host in &hosts {
        truth.hosts.insert(host.clone(), AnomalyKind::None);
    }
    let mut picked = indices.into_iter();
    for (kind, count) in [
        (AnomalyKind::Volume, spec.volume),
        (AnomalyKind::BlacklistContact, spec.blacklist_contact),
        (AnomalyKind::GeoSpread, spec.geo_spread),
    ] {
        for _ in 0..count {
            let idx = picked.next().expect("budget checked");
            truth.hosts.insert(hosts[idx].clone(), kind);
        }
    }

    let protocols = [name("http"), name("tcp"), name("smtp")];
    let mut set = TraceSet {
        hosts: hosts.clone(),
        blacklist: blacklist.clone(),
        ..Default::default()
    };

    for host in &hosts {
        let kind = truth.hosts[host];
        let mut geo_cursor = 0usize;
        let mut forced_blacklist = kind != AnomalyKind::BlacklistContact;
        for hour in 0..config.duration_hours {
            let base_ts = u64::from(hour) * 3600;

            for _ in 0..poisson(&mut rng, config.flow_rate_per_hour) {
                let ts = base_ts + rng.gen_range(0..3600);
                let (peer, protocol) = match kind {
                    AnomalyKind::GeoSpread => {
                        let prefix = geo_cursor % config.geo_prefix_count.max(20);
                        geo_cursor += 1;
                        (
                            format!("203.{prefix}.0.{}", rng.gen_range(1..255)),
                            name("smtp"),
                        )
                    }
                    _ => {
                        let prefix = rng.gen_range(0..config.clean_prefix_pool.max(1));
                        let proto = protocols[rng.gen_range(0..protocols.len())].clone();
                        (format!("10.{prefix}.0.{}", rng.gen_range(1..255)), proto)
                    }
                };
                let mut bytes = config.base_flow_bytes + rng.gen_range(0..200);
                if kind == AnomalyKind::Volume {
                    bytes *= config.volume_multiplier;
                }
                if config.noise > 0.0 && rng.gen::<f64>() < config.noise {
                    bytes += rng.gen_range(0..config.base_flow_bytes);
                }
                let protocol = if kind == AnomalyKind::Volume { name("tcp") } else { protocol };
                set.flows.push(TraceRecord::Flow {
                    host: host.clone(),
                    ts,
                    peer,
                    bytes,
                    protocol,
                });
            }

            for _ in 0..poisson(&mut rng, config.dns_rate_per_hour) {
                let ts = base_ts + rng.gen_range(0..3600);
                let domain = if kind == AnomalyKind::BlacklistContact
                    && (!forced_blacklist || rng.gen::<f64>() < 0.3)
                {
                    forced_blacklist = true;
                    blacklist[rng.gen_range(0..blacklist.len())].clone()
                } else {
                    clean_domains[rng.gen_range(0..clean_domains.len())].clone()
                };
                set.dns.push(TraceRecord::Dns { host: host.clone(), ts, domain });
            }

            for _ in 0..poisson(&mut rng, config.sampled_rate_per_hour) {
                let ts = base_ts + rng.gen_range(0..3600);
                set.sampled.push(TraceRecord::SampledFlow {
                    host: host.clone(),
                    ts,
                    digest: format!("{:016x}", rng.gen::<u64>()),
                });
            }
        }
    }

    // Timestamps nondecreasing within each file.
    for records in [&mut set.dns, &mut set.flows, &mut set.sampled] {
        records.sort_by(|a, b| (a.ts(), a.host()).cmp(&(b.ts(), b.host())));
    }

    Ok((set, truth))
}

const DNS_FILE: &str = "dns.ndjson";
const FLOWS_FILE: &str = "flows.ndjson";
const SAMPLED_FILE: &str = "sampledflows.ndjson";
const BLACKLIST_FILE: &str = "blacklist.txt";
const TRUTH_FILE: &str = "ground-truth.json";
const HOSTS_FILE: &str = "hosts.txt";

/// Writes the trace files next to their ground truth:
/// newline-delimited JSON per record kind, a plain-text blacklist, and
/// the ground-truth map.
pub fn write_trace_files(
    dir: &Path,
    set: &TraceSet,
    truth: &GroundTruth,
) -> Result<(), TraceError> {
    let io = |e: std::io::Error| TraceError::Io(e.to_string());
    fs::create_dir_all(dir).map_err(io)?;
    for (file, records) in [
        (DNS_FILE, &set.dns),
        (FLOWS_FILE, &set.flows),
        (SAMPLED_FILE, &set.sampled),
    ] {
        let mut out = fs::File::create(dir.join(file)).map_err(io)?;
        for r in records {
            let line = serde_json::to_string(r).expect("record serializes");
            writeln!(out, "{line}").map_err(io)?;
        }
    }
    fs::write(dir.join(BLACKLIST_FILE), set.blacklist.join("\n") + "\n").map_err(io)?;
    fs::write(dir.join(HOSTS_FILE), set.hosts.join("\n") + "\n").map_err(io)?;
    fs::write(
        dir.join(TRUTH_FILE),
        serde_json::to_string_pretty(truth).expect("truth serializes"),
    )
    .map_err(io)?;
    Ok(())
}

pub fn read_trace_files(dir: &Path) -> Result<(TraceSet, GroundTruth), TraceError> {
    let io = |e: std::io::Error| TraceError::Io(e.to_string());
    let mut set = TraceSet::default();
    for (file, records) in [
        (DNS_FILE, &mut set.dns),
        (FLOWS_FILE, &mut set.flows),
        (SAMPLED_FILE, &mut set.sampled),
    ] {
        let reader = BufReader::new(fs::File::open(dir.join(file)).map_err(io)?);
        for line in reader.lines() {
            let line = line.map_err(io)?;
            if line.trim().is_empty() {
                continue;
            }
            records.push(serde_json::from_str(&line).map_err(|e| TraceError::Io(e.to_string()))?);
        }
    }
    set.blacklist = fs::read_to_string(dir.join(BLACKLIST_FILE))
        .map_err(io)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(String::from)
        .collect();
    set.hosts = fs::read_to_string(dir.join(HOSTS_FILE))
        .map_err(io)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(String::from)
        .collect();
    let truth: GroundTruth = serde_json::from_str(
        &fs::read_to_string(dir.join(TRUTH_FILE)).map_err(io)?,
    )
    .map_err(|e| TraceError::Io(e.to_string()))?;
    Ok((set, truth))
}
