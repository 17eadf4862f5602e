//! Simulated deployment registry standing in for the stream/batch
//! execution platforms. Transitions are serialized through `&mut` and
//! checked, so no call sequence can leave two running deployments for
//! one strategic action instance.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::round::PlanInstance;
use crate::tactical::Flow;

pub type DeploymentId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeploymentState {
    Running,
    Completed,
    Canceled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    pub id: DeploymentId,
    pub instance: PlanInstance,
    pub flow: Flow,
    pub state: DeploymentState,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DeploymentRegistry {
    deployments: BTreeMap<DeploymentId, Deployment>,
    next_id: DeploymentId,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum RegistryError {
    #[error("instance `{0}` already has a running deployment")]
    DuplicateDeployment(PlanInstance),
    #[error("unknown deployment {0}")]
    UnknownDeployment(DeploymentId),
    #[error("deployment {id} is {state:?}, not running")]
    InvalidTransition { id: DeploymentId, state: DeploymentState },
}

impl DeploymentRegistry {
    pub fn new() -> DeploymentRegistry {
        DeploymentRegistry::default()
    }

    pub fn deploy(
        &mut self,
        flow: Flow,
        instance: PlanInstance,
    ) -> Result<DeploymentId, RegistryError> {
        if self.running_for(&instance).is_some() {
            return Err(RegistryError::DuplicateDeployment(instance));
        }
        let id = self.next_id;
        self.next_id += 1;
        self.deployments.insert(
            id,
            Deployment { id, instance, flow, state: DeploymentState::Running },
        );
        Ok(id)
    }

    pub fn cancel(&mut self, id: DeploymentId) -> Result<(), RegistryError> {
        self.transition(id, DeploymentState::Canceled)
    }

    pub fn complete(&mut self, id: DeploymentId) -> Result<(), RegistryError> {
        self.transition(id, DeploymentState::Completed)
    }

    fn transition(&mut self, id: DeploymentId, to: DeploymentState) -> Result<(), RegistryError> {
        let dep = self
            .deployments
            .get_mut(&id)
            .ok_or(RegistryError::UnknownDeployment(id))?;
        if dep.state != DeploymentState::Running {
            return Err(RegistryError::InvalidTransition { id, state: dep.state });
        }
        dep.state = to;
        Ok(())
    }

    pub fn running_for(&self, instance: &PlanInstance) -> Option<DeploymentId> {
        self.deployments
            .values()
            .find(|d| d.state == DeploymentState::Running && d.instance == *instance)
            .map(|d| d.id)
    }

    pub fn get(&self, id: DeploymentId) -> Option<&Deployment> {
        self.deployments.get(&id)
    }

    pub fn len(&self) -> usize {
        self.deployments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deployments.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Deployment> {
        self.deployments.values()
    }

    /// Audit dump of the full registry state.
    pub fn dump_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("registry serializes")
    }

    /// The one-running-per-instance invariant, checked exhaustively.
    pub fn check_invariant(&self) -> bool {
        let mut running: Vec<&PlanInstance> = self
            .deployments
            .values()
            .filter(|d| d.state == DeploymentState::Running)
            .map(|d| &d.instance)
            .collect();
        let total = running.len();
        running.sort();
        running.dedup();
        running.len() == total
    }
}
