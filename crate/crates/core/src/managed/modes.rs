//! Lifecycle nodes, the table of available modes and the mode manager that
//! serves the change-mode endpoints.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::rc::Rc;

use serde::Serialize;

use crate::bus::{
    change_mode_service, BusError, ModeChange, Payload, Port, ServiceRequest, ServiceResponse, MODE_TRANSITIONS_TOPIC,
};
use crate::scalar::Scalar;

pub const GENERATE_SEARCH_PATH_NODE: &str = "f_generate_search_path";
pub const FOLLOW_PIPELINE_NODE: &str = "f_follow_pipeline";
pub const MAINTAIN_MOTION_NODE: &str = "f_maintain_motion";
pub const NODES: [&str; 3] = [GENERATE_SEARCH_PATH_NODE, FOLLOW_PIPELINE_NODE, MAINTAIN_MOTION_NODE];

pub const MODE_SPIRAL_HIGH: &str = "fd_spiral_high";
pub const MODE_SPIRAL_MEDIUM: &str = "fd_spiral_medium";
pub const MODE_SPIRAL_LOW: &str = "fd_spiral_low";
pub const MODE_UNGROUND: &str = "fd_unground";
pub const MODE_FOLLOW_PIPELINE: &str = "fd_follow_pipeline";
pub const MODE_ALL_THRUSTERS: &str = "fd_all_thrusters";
pub const MODE_RECOVER_THRUSTERS: &str = "fd_recover_thrusters";

/// Lifecycle node serving a function, e.g. `generate_search_path` ->
/// `f_generate_search_path`.
pub fn node_for_function(function: &str) -> Option<&'static str> {
    NODES.into_iter().find(|n| n.strip_prefix("f_") == Some(function))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum LifecycleState {
    Inactive,
    Active,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct ModeRow<S: Scalar> {
    pub node: &'static str,
    pub mode: &'static str,
    pub state: LifecycleState,
    /// Commanded altitude for search modes.
    pub altitude: Option<S>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct ModeTable<S: Scalar> {
    rows: Vec<ModeRow<S>>,
}

impl<S: Scalar> Default for ModeTable<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Scalar> ModeTable<S> {
    pub fn new() -> Self {
        use LifecycleState::*;
        let row = |node, mode, state, altitude: Option<f64>| ModeRow {
            node,
            mode,
            state,
            altitude: altitude.map(S::lit),
        };
        Self {
            rows: vec![
                row(GENERATE_SEARCH_PATH_NODE, MODE_SPIRAL_HIGH, Active, Some(2.0)),
                row(GENERATE_SEARCH_PATH_NODE, MODE_SPIRAL_MEDIUM, Active, Some(1.0)),
                row(GENERATE_SEARCH_PATH_NODE, MODE_SPIRAL_LOW, Active, Some(0.5)),
                row(GENERATE_SEARCH_PATH_NODE, MODE_UNGROUND, Inactive, None),
                row(FOLLOW_PIPELINE_NODE, MODE_FOLLOW_PIPELINE, Active, None),
                row(FOLLOW_PIPELINE_NODE, MODE_UNGROUND, Inactive, None),
                row(MAINTAIN_MOTION_NODE, MODE_ALL_THRUSTERS, Inactive, None),
                row(MAINTAIN_MOTION_NODE, MODE_RECOVER_THRUSTERS, Active, None),
            ],
        }
    }

    pub fn rows(&self) -> &[ModeRow<S>] {
        &self.rows
    }

    pub fn lookup(&self, node: &str, mode: &str) -> Option<&ModeRow<S>> {
        self.rows.iter().find(|r| r.node == node && r.mode == mode)
    }

    pub fn modes_of<'a>(&'a self, node: &'a str) -> impl Iterator<Item = &'a ModeRow<S>> + 'a {
        self.rows.iter().filter(move |r| r.node == node)
    }

    /// The node's INACTIVE row (lifecycle start state).
    pub fn inactive_mode(&self, node: &str) -> Option<&ModeRow<S>> {
        self.rows
            .iter()
            .find(|r| r.node == node && r.state == LifecycleState::Inactive)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct LifecycleNode<S: Scalar> {
    pub name: &'static str,
    pub state: LifecycleState,
    pub mode: &'static str,
    pub altitude: Option<S>,
    /// Bumped on every effective mode change.
    pub revision: u64,
}

impl<S: Scalar> LifecycleNode<S> {
    fn from_row(row: &ModeRow<S>) -> Self {
        Self {
            name: row.node,
            state: row.state,
            mode: row.mode,
            altitude: row.altitude,
            revision: 0,
        }
    }

    pub fn is_active(&self) -> bool {
        self.state == LifecycleState::Active
    }
}

/// The three lifecycle nodes of the managed subsystem.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct NodeSet<S: Scalar> {
    table: ModeTable<S>,
    nodes: BTreeMap<&'static str, LifecycleNode<S>>,
}

impl<S: Scalar> Default for NodeSet<S> {
    fn default() -> Self {
        Self::new(ModeTable::new())
    }
}

impl<S: Scalar> NodeSet<S> {
    /// Every node starts in its INACTIVE mode.
    pub fn new(table: ModeTable<S>) -> Self {
        let nodes = NODES
            .into_iter()
            .map(|n| {
                let row = table.inactive_mode(n).expect("every node has an inactive mode");
                (n, LifecycleNode::from_row(row))
            })
            .collect();
        Self { table, nodes }
    }

    pub fn table(&self) -> &ModeTable<S> {
        &self.table
    }

    pub fn get(&self, node: &str) -> Option<&LifecycleNode<S>> {
        self.nodes.get(node)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &LifecycleNode<S>> {
        self.nodes.values()
    }

    pub fn search(&self) -> &LifecycleNode<S> {
        &self.nodes[GENERATE_SEARCH_PATH_NODE]
    }

    pub fn follow(&self) -> &LifecycleNode<S> {
        &self.nodes[FOLLOW_PIPELINE_NODE]
    }

    pub fn maintain(&self) -> &LifecycleNode<S> {
        &self.nodes[MAINTAIN_MOTION_NODE]
    }

    /// Switches `node` to `mode`; idempotent when already there.
    /// Returns `Ok(true)` when the mode actually changed.
    pub fn change_mode(&mut self, node: &str, mode: &str) -> Result<bool, String> {
        let current = self.nodes.get(node).ok_or_else(|| format!("unknown node {node}"))?;
        let row = self
            .table
            .lookup(node, mode)
            .ok_or_else(|| format!("unknown mode {mode} for node {node}"))?;
        if current.mode == row.mode {
            return Ok(false);
        }
        let revision = current.revision + 1;
        let updated = LifecycleNode {
            revision,
            ..LifecycleNode::from_row(row)
        };
        self.nodes.insert(updated.name, updated);
        Ok(true)
    }

    /// `node=mode` pairs joined with `;`, in node-name order.
    pub fn summary(&self) -> String {
        self.nodes
            .values()
            .map(|n| format!("{}={}", n.name, n.mode))
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Serves `/<node>/change_mode` for every node in the set and announces
/// effective transitions on the transitions topic.
pub fn register_mode_manager<S: Scalar>(port: &Port, nodes: &Rc<RefCell<NodeSet<S>>>) -> Result<(), BusError> {
    for node in NODES {
        let nodes = Rc::clone(nodes);
        let announce = port.clone();
        port.register_service(&change_mode_service(node), move |req| {
            let mode = match req {
                ServiceRequest::ChangeMode { node: target, mode } if target == node => mode,
                ServiceRequest::ChangeMode { node: target, .. } => {
                    return ServiceResponse::fail(format!("request for {target} sent to {node}"))
                }
                other => return ServiceResponse::fail(format!("unsupported request {other:?}")),
            };
            let result = nodes.borrow_mut().change_mode(node, mode);
            match result {
                Ok(changed) => {
                    if changed {
                        let event = Payload::ModeChanged(ModeChange {
                            node: node.to_string(),
                            mode: mode.clone(),
                        });
                        if let Err(e) = announce.publish(MODE_TRANSITIONS_TOPIC, event) {
                            log::warn!("mode transition not announced: {e}");
                        }
                    }
                    ServiceResponse::ok(if changed { "changed" } else { "unchanged" })
                }
                Err(detail) => ServiceResponse::fail(detail),
            }
        })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bus::Bus;

    #[test]
    fn table_rows() {
        let t = ModeTable::<f64>::new();
        assert_eq!(t.rows().len(), 8);
        assert_eq!(t.modes_of(GENERATE_SEARCH_PATH_NODE).count(), 4);
        assert_eq!(t.inactive_mode(MAINTAIN_MOTION_NODE).unwrap().mode, MODE_ALL_THRUSTERS);
        assert_eq!(t.lookup(MAINTAIN_MOTION_NODE, MODE_RECOVER_THRUSTERS).unwrap().state, LifecycleState::Active);
        assert_eq!(node_for_function("follow_pipeline"), Some(FOLLOW_PIPELINE_NODE));
        assert_eq!(node_for_function("inspect"), None);
    }

    #[test]
    fn change_mode_semantics() {
        let mut n = NodeSet::<f64>::default();
        assert!(!n.search().is_active());
        assert_eq!(n.change_mode(GENERATE_SEARCH_PATH_NODE, MODE_SPIRAL_MEDIUM), Ok(true));
        assert_eq!(n.search().altitude, Some(1.0));
        assert!(n.search().is_active());
        assert_eq!(n.change_mode(GENERATE_SEARCH_PATH_NODE, MODE_SPIRAL_MEDIUM), Ok(false));
        assert_eq!(n.search().revision, 1);
        assert_eq!(n.change_mode(FOLLOW_PIPELINE_NODE, MODE_UNGROUND), Ok(false));
        assert_eq!(n.follow().state, LifecycleState::Inactive);
        assert!(n.change_mode(MAINTAIN_MOTION_NODE, "fd_bogus").is_err());
    }

    #[test]
    fn services_on_bus() {
        let bus = Bus::shared();
        let nodes = Rc::new(RefCell::new(NodeSet::<f64>::default()));
        register_mode_manager(&bus.port("mode_manager"), &nodes).unwrap();
        for node in NODES {
            assert!(bus.has_service(&change_mode_service(node)));
        }
        let rsp = bus
            .call_service(
                "/f_maintain_motion/change_mode",
                ServiceRequest::ChangeMode {
                    node: MAINTAIN_MOTION_NODE.into(),
                    mode: MODE_RECOVER_THRUSTERS.into(),
                },
            )
            .unwrap();
        assert!(rsp.success);
        assert_eq!(nodes.borrow().maintain().mode, MODE_RECOVER_THRUSTERS);
        let rsp = bus
            .call_service(
                "/f_generate_search_path/change_mode",
                ServiceRequest::ChangeMode {
                    node: GENERATE_SEARCH_PATH_NODE.into(),
                    mode: "fd_bogus".into(),
                },
            )
            .unwrap();
        assert!(!rsp.success);
        assert!(rsp.detail.contains("fd_bogus"));
    }
}
