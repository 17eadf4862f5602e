//! Trace backend: resolves sensing actions by thresholded analysis of
//! synthetic traces. A pure function of (action, state, traces,
//! thresholds) — no randomness anywhere.
//!
//! Signal-to-protocol attribution: blacklisted DNS contact indicates
//! web-borne malware (http), raw volume shows up at the transport
//! layer (tcp), and wide geographic fan-out is mail-relay behavior
//! (smtp).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::netadmin::PROTOCOL_SENSOR;
use crate::pddl::{name, GroundAtom, Name};
use crate::round::WorldState;
use crate::sensing::outcome::{ChildHostset, SensingOutcome};
use crate::sensing::simulate::sensing_subject;
use crate::sensing::traces::{TraceRecord, TraceSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisThresholds {
    /// Volume signal: z-score of per-host flow bytes against the
    /// universe baseline must exceed this...
    pub volume_zscore: f64,
    /// ...and the host's volume must exceed this multiple of the
    /// baseline mean (guards against tiny-variance false fires).
    pub volume_ratio: f64,
    /// Blacklist signal: at least this many blacklisted DNS contacts.
    pub blacklist_hits: usize,
    /// Geo signal: at least this many distinct peer /24 prefixes.
    pub geo_prefixes: usize,
    /// Hostsets at or below this size are confirmed rather than split.
    pub min_refine_size: usize,
    /// When set, signals are computed over the trailing window of this
    /// many hours instead of the whole trace (model expiry).
    pub baseline_window_hours: Option<u32>,
}

impl Default for AnalysisThresholds {
    fn default() -> Self {
        AnalysisThresholds {
            volume_zscore: 3.0,
            volume_ratio: 2.0,
            blacklist_hits: 1,
            geo_prefixes: 20,
            min_refine_size: 8,
            baseline_window_hours: None,
        }
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum AnalyzeError {
    #[error("no hostset argument of `{0}` is registered")]
    UnknownHostset(Name),
    #[error("member `{0}` is not covered by the trace set")]
    MissingTraces(String),
}

/// Per-host signal measurements over the (windowed) trace set.
struct Signals {
    bytes: BTreeMap<String, u64>,
    blacklist_hits: BTreeMap<String, usize>,
    prefixes: BTreeMap<String, BTreeSet<String>>,
    mean_bytes: f64,
    sd_bytes: f64,
}

fn measure(traces: &TraceSet, thresholds: &AnalysisThresholds) -> Signals {
    let window_start = thresholds.baseline_window_hours.map(|w| {
        let end = traces
            .dns
            .iter()
            .chain(&traces.flows)
            .chain(&traces.sampled)
            .map(TraceRecord::ts)
            .max()
            .unwrap_or(0);
        end.saturating_sub(u64::from(w) * 3600)
    });
    let in_window = |ts: u64| window_start.is_none_or(|start| ts >= start);

    let mut bytes: BTreeMap<String, u64> = BTreeMap::new();
    let mut prefixes: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for host in &traces.hosts {
        bytes.insert(host.clone(), 0);
        prefixes.insert(host.clone(), BTreeSet::new());
    }
    for record in &traces.flows {
        if let TraceRecord::Flow { host, ts, peer, bytes: b, .. } = record {
            if !in_window(*ts) {
                continue;
            }
            *bytes.entry(host.clone()).or_default() += b;
            let prefix = peer.rsplit_once('.').map(|(p, _)| p.to_string()).unwrap_or_default();
            prefixes.entry(host.clone()).or_default().insert(prefix);
        }
    }

    let blocked: BTreeSet<&String> = traces.blacklist.iter().collect();
    let mut blacklist_hits: BTreeMap<String, usize> = BTreeMap::new();
    for host in &traces.hosts {
        blacklist_hits.insert(host.clone(), 0);
    }
    for record in &traces.dns {
        if let TraceRecord::Dns { host, ts, domain } = record {
            if in_window(*ts) && blocked.contains(domain) {
                *blacklist_hits.entry(host.clone()).or_default() += 1;
            }
        }
    }

    let n = traces.hosts.len().max(1) as f64;
    let mean = bytes.values().map(|&b| b as f64).sum::<f64>() / n;
    let var = bytes
        .values()
        .map(|&b| {
            let d = b as f64 - mean;
            d * d
        })
        .sum::<f64>()
        / n;
    Signals {
        bytes,
        blacklist_hits,
        prefixes,
        mean_bytes: mean,
        sd_bytes: var.sqrt(),
    }
}

impl Signals {
    fn volume(&self, host: &str, t: &AnalysisThresholds) -> bool {
        let b = *self.bytes.get(host).unwrap_or(&0) as f64;
        if self.sd_bytes < f64::EPSILON || self.mean_bytes < f64::EPSILON {
            return false;
        }
        let z = (b - self.mean_bytes) / self.sd_bytes;
        z > t.volume_zscore && b > t.volume_ratio * self.mean_bytes
    }

    fn blacklist(&self, host: &str, t: &AnalysisThresholds) -> bool {
        *self.blacklist_hits.get(host).unwrap_or(&0) >= t.blacklist_hits
    }

    fn geo(&self, host: &str, t: &AnalysisThresholds) -> bool {
        self.prefixes.get(host).map_or(0, BTreeSet::len) >= t.geo_prefixes
    }

    /// Signal for the protocol a branch investigates.
    fn fires_for(&self, host: &str, protocol: &str, t: &AnalysisThresholds) -> bool {
        match protocol {
            "http" => self.blacklist(host, t),
            "tcp" => self.volume(host, t),
            "smtp" => self.geo(host, t),
            _ => false,
        }
    }

    /// Ordering magnitude used to split persistent sets.
    fn magnitude(&self, host: &str, protocol: &str) -> u64 {
        match protocol {
            "http" => *self.blacklist_hits.get(host).unwrap_or(&0) as u64,
            "tcp" => *self.bytes.get(host).unwrap_or(&0),
            "smtp" => self.prefixes.get(host).map_or(0, BTreeSet::len) as u64,
            _ => 0,
        }
    }
}

fn atom2(pred: &str, a: &Name, b: &Name) -> GroundAtom {
    GroundAtom::new(name(pred), vec![a.clone(), b.clone()])
}

/// Resolves a sensing action deterministically from trace evidence.
pub fn analyze_traces(
    schema: &Name,
    args: &[Name],
    state: &WorldState,
    traces: &TraceSet,
    thresholds: &AnalysisThresholds,
) -> Result<SensingOutcome, AnalyzeError> {
    let subject = sensing_subject(args, state)
        .ok_or_else(|| AnalyzeError::UnknownHostset(schema.clone()))?
        .clone();
    let members = state.registry[&subject].members.clone();
    let universe: BTreeSet<&String> = traces.hosts.iter().collect();
    for member in &members {
        if !universe.contains(member) {
            return Err(AnalyzeError::MissingTraces(member.clone()));
        }
    }
    let signals = measure(traces, thresholds);

    if schema.as_str() == PROTOCOL_SENSOR {
        return Ok(partition(&subject, &members, &signals, thresholds));
    }
    if let Some(protocol) = schema.as_str().strip_prefix("sense-refine-") {
        return Ok(refine(&subject, &members, protocol, &signals, thresholds));
    }
    // Any other sensor acts as a keep-or-discard decision: keep when
    // some member still shows its assigned-protocol signal.
    let protocol = state
        .facts
        .iter()
        .find(|f| {
            f.predicate.as_str() == "assigned-protocol" && f.args.first() == Some(&subject)
        })
        .and_then(|f| f.args.get(1).cloned())
        .map(|p| p.to_string())
        .unwrap_or_default();
    let keep = members
        .iter()
        .any(|m| signals.fires_for(m, &protocol, thresholds));
    if keep {
        Ok(SensingOutcome {
            new_facts: vec![GroundAtom::new(name("ready-for-admin"), vec![subject])],
            ..Default::default()
        })
    } else {
        Ok(SensingOutcome { discard_parent: true, ..Default::default() })
    }
}

/// Protocol attribution order mirrors the branch declaration order.
const PROTOCOL_ORDER: [&str; 3] = ["http", "tcp", "smtp"];

fn partition(
    subject: &Name,
    members: &BTreeSet<String>,
    signals: &Signals,
    thresholds: &AnalysisThresholds,
) -> SensingOutcome {
    let removed_facts: Vec<GroundAtom> = PROTOCOL_ORDER
        .iter()
        .map(|p| atom2("assigned-protocol", subject, &name(p)))
        .collect();

    let mut buckets: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
    let mut clean: BTreeSet<String> = BTreeSet::new();
    for member in members {
        match PROTOCOL_ORDER
            .iter()
            .find(|p| signals.fires_for(member, p, thresholds))
        {
            Some(p) => {
                buckets.entry(p).or_default().insert(member.clone());
            }
            None => {
                clean.insert(member.clone());
            }
        }
    }

    if clean.len() == members.len() {
        return SensingOutcome {
            removed_facts,
            discard_parent: true,
            ..Default::default()
        };
    }

    let mut children = Vec::new();
    for p in PROTOCOL_ORDER {
        if let Some(bucket) = buckets.remove(p) {
            let protocol = name(p);
            let cname = name(&format!("{subject}-{p}"));
            children.push(ChildHostset {
                facts: vec![
                    atom2("assigned-protocol", &cname, &protocol),
                    atom2("obtained-from", &cname, subject),
                ],
                name: cname,
                members: bucket,
                discarded: false,
            });
        }
    }
    if !clean.is_empty() {
        let cname = name(&format!("{subject}-clean"));
        children.push(ChildHostset {
            facts: vec![atom2("obtained-from", &cname, subject)],
            name: cname,
            members: clean,
            discarded: true,
        });
    }
    SensingOutcome { children, removed_facts, ..Default::default() }
}

fn refine(
    subject: &Name,
    members: &BTreeSet<String>,
    protocol: &str,
    signals: &Signals,
    thresholds: &AnalysisThresholds,
) -> SensingOutcome {
    let pname = name(protocol);
    let refined = atom2("refined", subject, &pname);

    let hot: BTreeSet<String> = members
        .iter()
        .filter(|m| signals.fires_for(m, protocol, thresholds))
        .cloned()
        .collect();
    let cold: BTreeSet<String> = members.difference(&hot).cloned().collect();

    if hot.is_empty() {
        return SensingOutcome {
            removed_facts: vec![refined],
            discard_parent: true,
            ..Default::default()
        };
    }
    if cold.is_empty() && hot.len() <= thresholds.min_refine_size {
        // The whole set persists and is small enough to escalate.
        return SensingOutcome::default();
    }

    let child = |suffix: &str, members: BTreeSet<String>, discarded: bool| {
        let cname = name(&format!("{subject}-{suffix}"));
        let facts = if discarded {
            vec![atom2("obtained-from", &cname, subject)]
        } else {
            vec![
                atom2("assigned-protocol", &cname, &pname),
                atom2("filtered", &cname, &pname),
                atom2("obtained-from", &cname, subject),
            ]
        };
        ChildHostset { name: cname, members, facts, discarded }
    };

    let mut children = Vec::new();
    if hot.len() <= thresholds.min_refine_size {
        children.push(child("r1", hot, false));
    } else {
        // Split the persistent set by signal magnitude so deeper
        // refinement always works on strictly smaller sets.
        let mut ranked: Vec<&String> = hot.iter().collect();
        ranked.sort_by_key(|m| (std::cmp::Reverse(signals.magnitude(m, protocol)), (*m).clone()));
        let mid = ranked.len().div_ceil(2);
        children.push(child("r1", ranked[..mid].iter().map(|s| (*s).clone()).collect(), false));
        children.push(child("r2", ranked[mid..].iter().map(|s| (*s).clone()).collect(), false));
    }
    if !cold.is_empty() {
        children.push(child("clean", cold, true));
    }

    SensingOutcome {
        children,
        removed_facts: vec![refined],
        ..Default::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::traces::{generate_traces, AnomalyKind, AnomalySpec, TraceConfig};

    fn world_over(hosts: &[String]) -> (WorldState, Name) {
        let mut w = WorldState::new(vec![]);
        let root = name("hs01");
        w.add_root_hostset(root.clone(), hosts.iter().cloned().collect(), 1);
        (w, root)
    }

    #[test]
    fn volume_host_lands_in_tcp_child() {
        let config = TraceConfig { n_hosts: 20, duration_hours: 6, ..Default::default() };
        let spec = AnomalySpec { volume: 1, ..Default::default() };
        let (traces, truth) = generate_traces(&config, &spec, 11).unwrap();
        let volume_host = truth
            .anomalous()
            .find(|(_, k)| *k == AnomalyKind::Volume)
            .map(|(h, _)| h.clone())
            .unwrap();
        let (w, root) = world_over(&traces.hosts);
        let out = analyze_traces(
            &name(PROTOCOL_SENSOR),
            &[root],
            &w,
            &traces,
            &AnalysisThresholds::default(),
        )
        .unwrap();
        let tcp = out
            .children
            .iter()
            .find(|c| c.name.as_str().ends_with("-tcp"))
            .expect("tcp child");
        assert_eq!(tcp.members.iter().collect::<Vec<_>>(), vec![&volume_host]);
        // Everyone else is in the discarded clean child.
        let clean = out.children.iter().find(|c| c.discarded).unwrap();
        assert_eq!(clean.members.len(), 19);
    }

    #[test]
    fn no_signal_discards_subject() {
        let config = TraceConfig { n_hosts: 10, duration_hours: 4, ..Default::default() };
        let (traces, _) = generate_traces(&config, &AnomalySpec::default(), 2).unwrap();
        let (w, root) = world_over(&traces.hosts);
        let out = analyze_traces(
            &name(PROTOCOL_SENSOR),
            &[root],
            &w,
            &traces,
            &AnalysisThresholds::default(),
        )
        .unwrap();
        assert!(out.discard_parent);
        assert!(out.children.is_empty());
    }

    #[test]
    fn analysis_is_pure() {
        let config = TraceConfig { n_hosts: 15, duration_hours: 4, ..Default::default() };
        let spec = AnomalySpec { blacklist_contact: 2, ..Default::default() };
        let (traces, _) = generate_traces(&config, &spec, 8).unwrap();
        let (w, root) = world_over(&traces.hosts);
        let a = analyze_traces(
            &name(PROTOCOL_SENSOR),
            &[root.clone()],
            &w,
            &traces,
            &AnalysisThresholds::default(),
        )
        .unwrap();
        let b = analyze_traces(
            &name(PROTOCOL_SENSOR),
            &[root],
            &w,
            &traces,
            &AnalysisThresholds::default(),
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn missing_member_is_an_error() {
        let config = TraceConfig { n_hosts: 5, duration_hours: 2, ..Default::default() };
        let (traces, _) = generate_traces(&config, &AnomalySpec::default(), 1).unwrap();
        let mut hosts = traces.hosts.clone();
        hosts.push("ghost-999".to_string());
        let (w, root) = world_over(&hosts);
        let err = analyze_traces(
            &name(PROTOCOL_SENSOR),
            &[root],
            &w,
            &traces,
            &AnalysisThresholds::default(),
        )
        .unwrap_err();
        assert_eq!(err, AnalyzeError::MissingTraces("ghost-999".to_string()));
    }

    #[test]
    fn refine_confirms_small_persistent_sets() {
        let config = TraceConfig { n_hosts: 30, duration_hours: 6, ..Default::default() };
        let spec = AnomalySpec { geo_spread: 2, ..Default::default() };
        let (traces, truth) = generate_traces(&config, &spec, 21).unwrap();
        let geo_hosts: BTreeSet<String> = truth
            .anomalous()
            .filter(|(_, k)| *k == AnomalyKind::GeoSpread)
            .map(|(h, _)| h.clone())
            .collect();
        let mut w = WorldState::new(vec![]);
        let child = name("hs01-smtp");
        w.add_root_hostset(name("hs01"), traces.hosts.iter().cloned().collect(), 1);
        w.registry.insert(
            child.clone(),
            crate::round::HostsetEntry {
                members: geo_hosts,
                parent: Some(name("hs01")),
                status: crate::round::HostsetStatus::Active,
                first_seen_round: 2,
                first_worked_round: None,
                resolved_round: None,
            },
        );
        let out = analyze_traces(
            &name("sense-refine-smtp"),
            &[child],
            &w,
            &traces,
            &AnalysisThresholds::default(),
        )
        .unwrap();
        // Both members persist and 2 <= min_refine_size: confirmed.
        assert_eq!(out, SensingOutcome::default());
    }
}
