//! World state: planner-visible facts plus the hostset registry that
//! tracks drill-down membership, lineage and resolution.
//!
//! The registry is the metadata store of the system: host membership
//! lives only here, never in the planning problem, so hostsets stay
//! opaque planner objects.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::num::Num;
use crate::pddl::{GroundAtom, Name};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HostsetStatus {
    Active,
    Flagged,
    Discarded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HostsetEntry {
    pub members: BTreeSet<String>,
    pub parent: Option<Name>,
    pub status: HostsetStatus,
    /// Round in which the hostset entered the registry.
    pub first_seen_round: u32,
    /// First round whose executed prefix touched this hostset.
    pub first_worked_round: Option<u32>,
    /// Round in which the hostset left `Active`.
    pub resolved_round: Option<u32>,
}

/// The investigation's world: objects, facts, fluents, and the
/// hostset registry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    /// Non-hostset objects present in every planning problem.
    pub fixed_objects: Vec<(Name, Name)>,
    pub facts: BTreeSet<GroundAtom>,
    pub fluents: BTreeMap<Name, Num>,
    pub registry: BTreeMap<Name, HostsetEntry>,
}

impl WorldState {
    pub fn new(fixed_objects: Vec<(Name, Name)>) -> WorldState {
        WorldState {
            fixed_objects,
            facts: BTreeSet::new(),
            fluents: BTreeMap::new(),
            registry: BTreeMap::new(),
        }
    }

    pub fn add_root_hostset(&mut self, name: Name, members: BTreeSet<String>, round: u32) {
        self.registry.insert(
            name,
            HostsetEntry {
                members,
                parent: None,
                status: HostsetStatus::Active,
                first_seen_round: round,
                first_worked_round: None,
                resolved_round: None,
            },
        );
    }

    pub fn children_of<'a>(&'a self, parent: &'a Name) -> impl Iterator<Item = &'a Name> {
        self.registry
            .iter()
            .filter(move |(_, e)| e.parent.as_ref() == Some(parent))
            .map(|(n, _)| n)
    }

    pub fn is_leaf(&self, hostset: &Name) -> bool {
        self.children_of(hostset).next().is_none()
    }

    /// Hostsets the investigation still plans for: active leaves.
    pub fn active_frontier(&self) -> Vec<Name> {
        self.registry
            .iter()
            .filter(|(n, e)| e.status == HostsetStatus::Active && self.is_leaf(n))
            .map(|(n, _)| n.clone())
            .collect()
    }

    pub fn root_of(&self, hostset: &Name) -> Name {
        let mut cur = hostset.clone();
        while let Some(entry) = self.registry.get(&cur) {
            match &entry.parent {
                Some(p) => cur = p.clone(),
                None => break,
            }
        }
        cur
    }

    pub fn roots(&self) -> Vec<Name> {
        self.registry
            .iter()
            .filter(|(_, e)| e.parent.is_none())
            .map(|(n, _)| n.clone())
            .collect()
    }

    /// Resolves interior hostsets whose whole subtree has settled:
    /// flagged when any child ended flagged, discarded otherwise.
    /// Returns the cascade in resolution order.
    pub fn cascade_resolution(&mut self, round: u32) -> Vec<(Name, HostsetStatus)> {
        let mut resolved = Vec::new();
        loop {
            let mut changed = false;
            let names: Vec<Name> = self.registry.keys().cloned().collect();
            for name in names {
                if self.registry[&name].status != HostsetStatus::Active
                    || self.is_leaf(&name)
                {
                    continue;
                }
                let children: Vec<Name> = self.children_of(&name).cloned().collect();
                let all_settled = children
                    .iter()
                    .all(|c| self.registry[c].status != HostsetStatus::Active);
                if !all_settled {
                    continue;
                }
                let any_flagged = children
                    .iter()
                    .any(|c| self.registry[c].status == HostsetStatus::Flagged);
                let status = if any_flagged {
                    HostsetStatus::Flagged
                } else {
                    HostsetStatus::Discarded
                };
                let entry = self.registry.get_mut(&name).expect("known hostset");
                entry.status = status;
                entry.resolved_round = Some(round);
                resolved.push((name, status));
                changed = true;
            }
            if !changed {
                return resolved;
            }
        }
    }

    pub fn mark_resolved(&mut self, hostset: &Name, status: HostsetStatus, round: u32) {
        let entry = self.registry.get_mut(hostset).expect("known hostset");
        entry.status = status;
        entry.resolved_round = Some(round);
    }
}

/// Snapshot file format tag.
pub const SNAPSHOT_FORMAT: &str = "worldstate-v1";

#[derive(Serialize, Deserialize)]
struct SnapshotFile {
    format: String,
    state: WorldState,
}

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("snapshot format `{0}` is not `{SNAPSHOT_FORMAT}`")]
    VersionMismatch(String),
    #[error("corrupt snapshot: {0}")]
    Corrupt(String),
}

/// Serializes the world state as versioned JSON.
pub fn snapshot(state: &WorldState) -> String {
    serde_json::to_string_pretty(&SnapshotFile {
        format: SNAPSHOT_FORMAT.to_string(),
        state: state.clone(),
    })
    .expect("world state serializes")
}

/// Restores a snapshot, rejecting unknown versions and corrupt input.
pub fn restore(text: &str) -> Result<WorldState, SnapshotError> {
    let file: SnapshotFile =
        serde_json::from_str(text).map_err(|e| SnapshotError::Corrupt(e.to_string()))?;
    if file.format != SNAPSHOT_FORMAT {
        return Err(SnapshotError::VersionMismatch(file.format));
    }
    Ok(file.state)
}

/// Violations reported by the registry validator.
#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum StateViolation {
    #[error("hostset `{0}` has an unknown parent `{1}`")]
    UnknownParent(Name, Name),
    #[error("parent chain of `{0}` contains a cycle")]
    ParentCycle(Name),
    #[error("children of `{0}` overlap on member `{1}`")]
    ChildrenOverlap(Name, String),
    #[error("child `{child}` of `{parent}` holds `{member}` outside the parent")]
    ChildEscapes { parent: Name, child: Name, member: String },
    #[error("children of `{0}` do not cover member `{1}`")]
    MemberLost(Name, String),
    #[error("resolved hostset `{0}` has active descendant `{1}`")]
    ActiveDescendant(Name, Name),
    #[error("hostset `{0}` regressed from a resolved status to active")]
    StatusRegression(Name),
}

/// Checks the forest, disjointness, conservation, and no-active-
/// descendant invariants.
pub fn validate_registry(state: &WorldState) -> Result<(), StateViolation> {
    for (name, entry) in &state.registry {
        if let Some(parent) = &entry.parent {
            if !state.registry.contains_key(parent) {
                return Err(StateViolation::UnknownParent(name.clone(), parent.clone()));
            }
        }
        // Parent walk must terminate within registry size.
        let mut cur = name.clone();
        let mut hops = 0;
        while let Some(p) = state.registry.get(&cur).and_then(|e| e.parent.clone()) {
            hops += 1;
            if hops > state.registry.len() {
                return Err(StateViolation::ParentCycle(name.clone()));
            }
            cur = p;
        }
    }

    for (name, entry) in &state.registry {
        let children: Vec<&Name> = state.children_of(name).collect();
        if children.is_empty() {
            continue;
        }
        let mut seen: BTreeMap<&String, &Name> = BTreeMap::new();
        for child in &children {
            for member in &state.registry[*child].members {
                if !entry.members.contains(member) {
                    return Err(StateViolation::ChildEscapes {
                        parent: name.clone(),
                        child: (*child).clone(),
                        member: member.clone(),
                    });
                }
                if let Some(_other) = seen.insert(member, child) {
                    return Err(StateViolation::ChildrenOverlap(name.clone(), member.clone()));
                }
            }
        }
        // Splits are total: no member may silently vanish.
        for member in &entry.members {
            if !seen.contains_key(member) {
                return Err(StateViolation::MemberLost(name.clone(), member.clone()));
            }
        }
    }

    for (name, entry) in &state.registry {
        if entry.status == HostsetStatus::Active {
            continue;
        }
        let mut stack: Vec<Name> = state.children_of(name).cloned().collect();
        while let Some(d) = stack.pop() {
            if state.registry[&d].status == HostsetStatus::Active {
                return Err(StateViolation::ActiveDescendant(name.clone(), d));
            }
            stack.extend(state.children_of(&d).cloned());
        }
    }
    Ok(())
}

/// Monotonicity across rounds: once flagged or discarded, never active
/// again.
pub fn check_monotonic(prev: &WorldState, cur: &WorldState) -> Result<(), StateViolation> {
    for (name, entry) in &prev.registry {
        if entry.status != HostsetStatus::Active {
            match cur.registry.get(name) {
                Some(now) if now.status == HostsetStatus::Active => {
                    return Err(StateViolation::StatusRegression(name.clone()));
                }
                _ => {}
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::name;

    fn members(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn world_with_split() -> WorldState {
        let mut w = WorldState::new(vec![]);
        w.add_root_hostset(name("hs01"), members(&["a", "b", "c"]), 1);
        w.registry.insert(
            name("hs01-http"),
            HostsetEntry {
                members: members(&["a"]),
                parent: Some(name("hs01")),
                status: HostsetStatus::Active,
                first_seen_round: 2,
                first_worked_round: None,
                resolved_round: None,
            },
        );
        w.registry.insert(
            name("hs01-clean"),
            HostsetEntry {
                members: members(&["b", "c"]),
                parent: Some(name("hs01")),
                status: HostsetStatus::Discarded,
                first_seen_round: 2,
                first_worked_round: None,
                resolved_round: Some(2),
            },
        );
        w
    }

    #[test]
    fn fresh_state_round_trips() {
        let w = WorldState::new(vec![(name("http"), name("protocol"))]);
        let restored = restore(&snapshot(&w)).unwrap();
        assert_eq!(restored, w);
    }

    #[test]
    fn split_state_round_trips_and_validates() {
        let w = world_with_split();
        validate_registry(&w).unwrap();
        let restored = restore(&snapshot(&w)).unwrap();
        assert_eq!(restored, w);
    }

    #[test]
    fn truncated_snapshot_is_corrupt() {
        let text = snapshot(&world_with_split());
        let cut = &text[..text.len() / 2];
        assert!(matches!(restore(cut), Err(SnapshotError::Corrupt(_))));
    }

    #[test]
    fn version_mismatch_detected() {
        let text = snapshot(&world_with_split()).replace(SNAPSHOT_FORMAT, "worldstate-v9");
        assert!(matches!(restore(&text), Err(SnapshotError::VersionMismatch(_))));
    }

    #[test]
    fn lost_member_detected() {
        let mut w = world_with_split();
        w.registry.get_mut(&name("hs01-clean")).unwrap().members = members(&["b"]);
        assert!(matches!(
            validate_registry(&w),
            Err(StateViolation::MemberLost(_, _))
        ));
    }

    #[test]
    fn overlapping_children_detected() {
        let mut w = world_with_split();
        w.registry.get_mut(&name("hs01-clean")).unwrap().members = members(&["a", "b", "c"]);
        assert!(matches!(
            validate_registry(&w),
            Err(StateViolation::ChildrenOverlap(_, _))
        ));
    }

    #[test]
    fn resolved_with_active_descendant_detected() {
        let mut w = world_with_split();
        w.registry.get_mut(&name("hs01")).unwrap().status = HostsetStatus::Flagged;
        assert!(matches!(
            validate_registry(&w),
            Err(StateViolation::ActiveDescendant(_, _))
        ));
    }

    #[test]
    fn cascade_resolves_parent_when_children_settle() {
        let mut w = world_with_split();
        w.mark_resolved(&name("hs01-http"), HostsetStatus::Flagged, 5);
        let resolved = w.cascade_resolution(5);
        assert_eq!(resolved, vec![(name("hs01"), HostsetStatus::Flagged)]);
        assert_eq!(w.registry[&name("hs01")].resolved_round, Some(5));
        validate_registry(&w).unwrap();
    }

    #[test]
    fn monotonicity_regression_detected() {
        let w = world_with_split();
        let mut later = w.clone();
        later.registry.get_mut(&name("hs01-clean")).unwrap().status = HostsetStatus::Active;
        assert!(matches!(
            check_monotonic(&w, &later),
            Err(StateViolation::StatusRegression(_))
        ));
    }

    #[test]
    fn frontier_is_active_leaves() {
        let w = world_with_split();
        assert_eq!(w.active_frontier(), vec![name("hs01-http")]);
        assert_eq!(w.root_of(&name("hs01-http")), name("hs01"));
    }
}
