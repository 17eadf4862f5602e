//! Simulator backend: draws sensing outcomes from the manifest's
//! pre-determined outcome schemas using a keyed random stream.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::netadmin::SensingManifest;
use crate::pddl::{name, GroundAtom, Name};
use crate::round::WorldState;
use crate::sensing::outcome::{ChildHostset, OutcomeSchema, SensingOutcome};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum SimulateError {
    #[error("sensing action `{0}` has no manifest entry")]
    NoManifestEntry(Name),
    #[error("no hostset argument of `{0}` is registered")]
    UnknownHostset(Name),
    #[error("cannot determine the protocol under refinement for `{0}`")]
    NoProtocol(Name),
}

fn atom2(pred: &str, a: &Name, b: &Name) -> GroundAtom {
    GroundAtom::new(name(pred), vec![a.clone(), b.clone()])
}

fn child_name(parent: &Name, suffix: &str) -> Name {
    name(&format!("{parent}-{suffix}"))
}

/// Subject hostset of a sensing instance: its first registered argument.
pub fn sensing_subject<'a>(args: &'a [Name], state: &WorldState) -> Option<&'a Name> {
    args.iter().find(|a| state.registry.contains_key(*a))
}

/// Resolves a sensing action by drawing from its outcome schema.
/// Identical (schema, args, state, rng stream) inputs give identical
/// outcomes.
pub fn simulate_outcome(
    schema: &Name,
    args: &[Name],
    state: &WorldState,
    manifest: &SensingManifest,
    rng: &mut ChaCha8Rng,
) -> Result<SensingOutcome, SimulateError> {
    let entry = manifest
        .entries
        .get(schema)
        .ok_or_else(|| SimulateError::NoManifestEntry(schema.clone()))?;
    let subject = sensing_subject(args, state)
        .ok_or_else(|| SimulateError::UnknownHostset(schema.clone()))?
        .clone();
    let members = state.registry[&subject].members.clone();

    match entry {
        OutcomeSchema::PartitionByProtocol { include_prob } => {
            Ok(partition(&subject, &members, include_prob, rng))
        }
        OutcomeSchema::RefineSplit {
            child_count_dist,
            assignment: _,
            min_split_size,
        } => {
            let protocol = refined_protocol(schema, &subject, state)
                .ok_or_else(|| SimulateError::NoProtocol(schema.clone()))?;
            Ok(refine_split(
                &subject,
                &members,
                &protocol,
                child_count_dist,
                *min_split_size,
                rng,
            ))
        }
        OutcomeSchema::FlagDecision { flag_prob } => {
            let flagged = rng.gen::<f64>() < *flag_prob;
            if flagged {
                Ok(SensingOutcome {
                    new_facts: vec![GroundAtom::new(name("ready-for-admin"), vec![subject])],
                    ..Default::default()
                })
            } else {
                Ok(SensingOutcome {
                    discard_parent: true,
                    ..Default::default()
                })
            }
        }
    }
}

/// Protocol a branch sensor refines: from the action name suffix, with
/// a fallback to the subject's protocol assignment in the world state.
fn refined_protocol(schema: &Name, subject: &Name, state: &WorldState) -> Option<Name> {
    if let Some(suffix) = schema.as_str().strip_prefix("sense-refine-") {
        return Name::new(suffix).ok();
    }
    state
        .facts
        .iter()
        .find(|f| {
            f.predicate.as_str() == "assigned-protocol"
                && f.args.first() == Some(subject)
        })
        .and_then(|f| f.args.get(1).cloned())
}

fn partition(
    subject: &Name,
    members: &BTreeSet<String>,
    include_prob: &BTreeMap<Name, f64>,
    rng: &mut ChaCha8Rng,
) -> SensingOutcome {
    // Optimistic protocol assignments are withdrawn; the observed
    // partition replaces them.
    let removed_facts: Vec<GroundAtom> = include_prob
        .keys()
        .map(|p| atom2("assigned-protocol", subject, p))
        .collect();

    if members.is_empty() {
        return SensingOutcome {
            removed_facts,
            discard_parent: true,
            ..Default::default()
        };
    }

    let mut buckets: BTreeMap<&Name, BTreeSet<String>> = BTreeMap::new();
    let mut clean: BTreeSet<String> = BTreeSet::new();
    for member in members {
        let mut assigned = false;
        for (protocol, prob) in include_prob {
            if rng.gen::<f64>() < *prob {
                buckets.entry(protocol).or_default().insert(member.clone());
                assigned = true;
                break;
            }
        }
        if !assigned {
            clean.insert(member.clone());
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
    for (protocol, bucket) in &buckets {
        let cname = child_name(subject, protocol.as_str());
        children.push(ChildHostset {
            facts: vec![
                atom2("assigned-protocol", &cname, protocol),
                atom2("obtained-from", &cname, subject),
            ],
            name: cname,
            members: bucket.clone(),
            discarded: false,
        });
    }
    if !clean.is_empty() {
        let cname = child_name(subject, "clean");
        children.push(ChildHostset {
            facts: vec![atom2("obtained-from", &cname, subject)],
            name: cname,
            members: clean,
            discarded: true,
        });
    }

    SensingOutcome {
        children,
        removed_facts,
        ..Default::default()
    }
}

fn refine_split(
    subject: &Name,
    members: &BTreeSet<String>,
    protocol: &Name,
    dist: &[f64; 4],
    min_split_size: usize,
    rng: &mut ChaCha8Rng,
) -> SensingOutcome {
    // Small enough: the refinement is confirmed and the plan proceeds
    // to mark and escalate this hostset as-is.
    if members.len() <= min_split_size.max(1) {
        return SensingOutcome::default();
    }

    let refined = atom2("refined", subject, protocol);
    let draw: f64 = rng.gen();
    let mut acc = 0.0;
    let mut count = dist.len() - 1;
    for (k, p) in dist.iter().enumerate() {
        acc += p;
        if draw < acc {
            count = k;
            break;
        }
    }

    if count == 0 {
        // The deeper analysis found nothing: the set is clean.
        return SensingOutcome {
            removed_facts: vec![refined],
            discard_parent: true,
            ..Default::default()
        };
    }

    let refine_child = |index: usize, bucket: BTreeSet<String>| {
        let cname = child_name(subject, &format!("r{index}"));
        ChildHostset {
            facts: vec![
                atom2("assigned-protocol", &cname, protocol),
                atom2("filtered", &cname, protocol),
                atom2("obtained-from", &cname, subject),
            ],
            name: cname,
            members: bucket,
            discarded: false,
        }
    };

    let children = if count == 1 {
        // The analysis narrowed the anomaly to a strict subset; the
        // remainder is deemed clean. Keeps refinement shrinking.
        let mut hot = BTreeSet::new();
        let mut cold = BTreeSet::new();
        for member in members {
            if rng.gen_range(0..2u32) == 0 {
                hot.insert(member.clone());
            } else {
                cold.insert(member.clone());
            }
        }
        if hot.is_empty() {
            let first = cold.pop_first().expect("members nonempty");
            hot.insert(first);
        }
        if cold.is_empty() {
            let last = hot.pop_last().expect("members nonempty");
            cold.insert(last);
        }
        let clean_name = child_name(subject, "clean");
        vec![
            refine_child(1, hot),
            ChildHostset {
                facts: vec![atom2("obtained-from", &clean_name, subject)],
                name: clean_name,
                members: cold,
                discarded: true,
            },
        ]
    } else {
        let mut buckets: Vec<BTreeSet<String>> = vec![BTreeSet::new(); count];
        for member in members {
            let b = rng.gen_range(0..count);
            buckets[b as usize].insert(member.clone());
        }
        buckets.retain(|b| !b.is_empty());
        if buckets.len() == 1 && buckets[0].len() == members.len() {
            // Degenerate draw: force a strict shrink so refinement
            // always terminates.
            let sorted: Vec<String> = members.iter().cloned().collect();
            let mid = sorted.len().div_ceil(2);
            buckets = vec![
                sorted[..mid].iter().cloned().collect(),
                sorted[mid..].iter().cloned().collect(),
            ];
        }
        buckets
            .into_iter()
            .enumerate()
            .map(|(i, bucket)| refine_child(i + 1, bucket))
            .collect()
    };

    SensingOutcome {
        children,
        removed_facts: vec![refined],
        ..Default::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netadmin::{default_manifest, DomainConfig, PROTOCOL_SENSOR};
    use crate::sensing::keyed_rng;
    use crate::sensing::outcome::MemberAssignment;

    fn world(members: &[&str]) -> (WorldState, Name) {
        let mut w = WorldState::new(vec![]);
        let hs = name("hs01");
        w.add_root_hostset(hs.clone(), members.iter().map(|s| s.to_string()).collect(), 1);
        (w, hs)
    }

    fn run(
        schema: &str,
        members: &[&str],
        seed: u64,
    ) -> SensingOutcome {
        let (w, hs) = world(members);
        let manifest = default_manifest(&DomainConfig::default());
        let mut rng = keyed_rng(seed, 1, &format!("{schema}({hs})"));
        simulate_outcome(&name(schema), &[hs], &w, &manifest, &mut rng).unwrap()
    }

    #[test]
    fn empty_parent_is_discarded() {
        let out = run(PROTOCOL_SENSOR, &[], 1);
        assert!(out.children.is_empty());
        assert!(out.discard_parent);
    }

    #[test]
    fn partition_is_deterministic_and_conserving() {
        let members: Vec<String> = (0..10).map(|i| format!("h{i:02}")).collect();
        let refs: Vec<&str> = members.iter().map(|s| s.as_str()).collect();
        let a = run(PROTOCOL_SENSOR, &refs, 42);
        let b = run(PROTOCOL_SENSOR, &refs, 42);
        assert_eq!(a, b);
        let (w, _) = world(&refs);
        a.validate(&w.registry[&name("hs01")].members).unwrap();
        // Every member lands in exactly one child.
        let total: usize = a.children.iter().map(|c| c.members.len()).sum();
        assert_eq!(total, 10);
    }

    #[test]
    fn small_hostset_is_confirmed_not_split() {
        let out = run("sense-refine-http", &["a", "b"], 7);
        assert_eq!(out, SensingOutcome::default());
    }

    #[test]
    fn refine_children_shrink_strictly() {
        for seed in 0..50 {
            let members: Vec<String> = (0..12).map(|i| format!("h{i:02}")).collect();
            let refs: Vec<&str> = members.iter().map(|s| s.as_str()).collect();
            let out = run("sense-refine-http", &refs, seed);
            for child in &out.children {
                assert!(child.members.len() < 12, "child as large as parent");
                assert!(!child.members.is_empty());
            }
        }
    }

    #[test]
    fn missing_manifest_entry_is_an_error() {
        let (w, hs) = world(&["a"]);
        let manifest = default_manifest(&DomainConfig::default());
        let mut rng = keyed_rng(0, 1, "x");
        let err =
            simulate_outcome(&name("sense-unknown"), &[hs], &w, &manifest, &mut rng).unwrap_err();
        assert!(matches!(err, SimulateError::NoManifestEntry(_)));
    }

    #[test]
    fn flag_decision_extremes() {
        let (w, hs) = world(&["a", "b"]);
        let mut manifest = default_manifest(&DomainConfig::default());
        manifest
            .entries
            .insert(name("sense-verdict"), OutcomeSchema::FlagDecision { flag_prob: 1.0 });
        let mut rng = keyed_rng(3, 1, "sense-verdict(hs01)");
        let out = simulate_outcome(&name("sense-verdict"), &[hs.clone()], &w, &manifest, &mut rng)
            .unwrap();
        assert!(!out.discard_parent);
        assert_eq!(out.new_facts[0].predicate.as_str(), "ready-for-admin");

        manifest
            .entries
            .insert(name("sense-verdict"), OutcomeSchema::FlagDecision { flag_prob: 0.0 });
        let mut rng = keyed_rng(3, 1, "sense-verdict(hs01)");
        let out =
            simulate_outcome(&name("sense-verdict"), &[hs], &w, &manifest, &mut rng).unwrap();
        assert!(out.discard_parent);
    }

    #[test]
    fn refine_child_count_tracks_distribution() {
        // Empirical frequencies over 1,000 draws stay within 0.05 of
        // the configured distribution (64 members make bucket-collapse
        // corrections vanishingly rare).
        let members: Vec<String> = (0..64).map(|i| format!("h{i:02}")).collect();
        let refs: Vec<&str> = members.iter().map(|s| s.as_str()).collect();
        let dist = [0.1, 0.3, 0.4, 0.2];
        let mut counts = [0usize; 4];
        for round in 0..1000 {
            let (w, hs) = world(&refs);
            let mut manifest = default_manifest(&DomainConfig::default());
            manifest.entries.insert(
                name("sense-refine-http"),
                OutcomeSchema::RefineSplit {
                    child_count_dist: dist,
                    assignment: MemberAssignment::Uniform,
                    min_split_size: 4,
                },
            );
            let mut rng = keyed_rng(99, round, "sense-refine-http(hs01)");
            let out =
                simulate_outcome(&name("sense-refine-http"), &[hs], &w, &manifest, &mut rng)
                    .unwrap();
            // Refined (non-clean) child count is what the distribution
            // governs.
            let k = if out.discard_parent {
                0
            } else {
                out.children.iter().filter(|c| !c.discarded).count()
            };
            counts[k.min(3)] += 1;
        }
        for (k, expected) in dist.iter().enumerate() {
            let freq = counts[k] as f64 / 1000.0;
            assert!(
                (freq - expected).abs() <= 0.05,
                "child count {k}: frequency {freq} vs expected {expected}"
            );
        }
    }
}
