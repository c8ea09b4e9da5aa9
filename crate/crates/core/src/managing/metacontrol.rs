//! MAPE-K reasoner over the TOMASys knowledge base, plus the bridge that
//! turns configuration requests into mode changes.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::rc::Rc;

use serde::Serialize;

use super::monitors::WATER_VISIBILITY_KEY;
use super::{serve_objectives, Manager, ManagerKind};
use crate::bus::{
    change_mode_service, parse_value, Bus, BusError, ObjectiveRequest, Payload, PayloadKind, Port, ServiceRequest,
    ServiceResponse, DIAGNOSTICS_TOPIC, REQUEST_CONFIGURATION_SERVICE,
};
use crate::managed::{
    node_for_function, ModeTable, MODE_ALL_THRUSTERS, MODE_FOLLOW_PIPELINE, MODE_RECOVER_THRUSTERS, MODE_SPIRAL_HIGH,
    MODE_SPIRAL_LOW, MODE_SPIRAL_MEDIUM,
};
use crate::scalar::Scalar;
use crate::tomasys::{
    init_kb, ComponentStatus, DesignId, KnowledgeBase, Qa, DESIGN_ALL_THRUSTERS, DESIGN_FOLLOW_PIPELINE,
    DESIGN_RECOVER_THRUSTERS, DESIGN_SPIRAL_HIGH, DESIGN_SPIRAL_LOW, DESIGN_SPIRAL_MEDIUM,
};

pub const REASONER_CLIENT: &str = "mros_reasoner";
pub const BRIDGE_CLIENT: &str = "system_modes_bridge";

/// Lifecycle mode realising a function design.
pub fn design_mode(design: DesignId) -> Option<&'static str> {
    Some(match design {
        DESIGN_ALL_THRUSTERS => MODE_ALL_THRUSTERS,
        DESIGN_RECOVER_THRUSTERS => MODE_RECOVER_THRUSTERS,
        DESIGN_SPIRAL_LOW => MODE_SPIRAL_LOW,
        DESIGN_SPIRAL_MEDIUM => MODE_SPIRAL_MEDIUM,
        DESIGN_SPIRAL_HIGH => MODE_SPIRAL_HIGH,
        DESIGN_FOLLOW_PIPELINE => MODE_FOLLOW_PIPELINE,
        _ => return None,
    })
}

/// Mode a node returns to when its objective is retired.
pub fn unground_mode(node: &str) -> Option<&'static str> {
    ModeTable::<f64>::new().inactive_mode(node).map(|r| r.mode)
}

/// Serves `/mros/request_configuration` by forwarding to the node's
/// change_mode service.
pub fn register_bridge(bus: &Rc<Bus>) -> Result<(), BusError> {
    let port = bus.port(BRIDGE_CLIENT);
    let forward = port.clone();
    port.register_service(REQUEST_CONFIGURATION_SERVICE, move |req| {
        let ServiceRequest::RequestConfiguration { node, mode } = req else {
            return ServiceResponse::fail(format!("unsupported request {req:?}"));
        };
        let change = ServiceRequest::ChangeMode {
            node: node.clone(),
            mode: mode.clone(),
        };
        match forward.call_service(&change_mode_service(node), change) {
            Ok(resp) => resp,
            Err(e) => ServiceResponse::fail(e.to_string()),
        }
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct KbSnapshot {
    pub stamp: f64,
    pub kb: serde_json::Value,
}

/// Monitor buffer filled by the diagnostics subscription between cycles.
#[derive(Debug, Default)]
struct Inbox {
    water_visibility: Option<(f64, f64)>,
    /// Component events in arrival order.
    components: Vec<(String, ComponentStatus)>,
    malformed: usize,
}

impl Inbox {
    fn absorb(&mut self, stamp: f64, name: &str, key: &str, value: &str) {
        if key == WATER_VISIBILITY_KEY {
            match parse_value(value) {
                Ok(v) if v.is_finite() => self.water_visibility = Some((v, stamp)),
                _ => {
                    log::error!("{name}: unreadable {key}={value:?}");
                    self.malformed += 1;
                }
            }
        } else if key.starts_with("thruster_") {
            let status = match value {
                "FAILED" => ComponentStatus::Failed,
                "AVAILABLE" => ComponentStatus::Available,
                _ => {
                    log::error!("{name}: unreadable {key}={value:?}");
                    self.malformed += 1;
                    return;
                }
            };
            if self.components.last() != Some(&(key.to_string(), status)) {
                self.components.push((key.to_string(), status));
            }
        }
    }
}

pub struct Metacontrol<S: Scalar> {
    port: Port,
    kb: Rc<RefCell<KnowledgeBase<S>>>,
    inbox: Rc<RefCell<Inbox>>,
    /// Nodes whose objective was retired since the last cycle.
    retired: Rc<RefCell<Vec<&'static str>>>,
    period_steps: u64,
    snapshots: Option<Vec<KbSnapshot>>,
    malformed: usize,
}

impl<S: Scalar> std::fmt::Debug for Metacontrol<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Metacontrol")
            .field("period_steps", &self.period_steps)
            .field("objectives", &self.kb.borrow().objectives().count())
            .finish()
    }
}

impl<S: Scalar> Metacontrol<S> {
    /// Wires the reasoner and the bridge onto `bus`.
    pub fn attach(bus: &Rc<Bus>, period_steps: u64, snapshot_kb: bool) -> Result<Self, BusError> {
        register_bridge(bus)?;
        let port = bus.port(REASONER_CLIENT);
        let kb = Rc::new(RefCell::new(init_kb::<S>()));
        let inbox = Rc::new(RefCell::new(Inbox::default()));
        let retired = Rc::new(RefCell::new(Vec::new()));

        let sink = Rc::clone(&inbox);
        port.subscribe(DIAGNOSTICS_TOPIC, PayloadKind::Diagnostic, move |env| {
            if let Payload::Diagnostic(status) = &env.payload {
                let mut inbox = sink.borrow_mut();
                for kv in status.values() {
                    inbox.absorb(env.stamp, &status.name, &kv.key, &kv.value);
                }
            }
        })?;

        let objectives = Rc::clone(&kb);
        let retire = Rc::clone(&retired);
        serve_objectives(&port, move |req| {
            let mut kb = objectives.borrow_mut();
            match req {
                ObjectiveRequest::Set { function } => {
                    let f = kb.function_by_name(function).ok_or_else(|| format!("unknown function {function}"))?;
                    if kb.objective(f.objective()).is_none() {
                        kb.set_objective(f, BTreeMap::new()).map_err(|e| e.to_string())?;
                    }
                    Ok(())
                }
                ObjectiveRequest::Remove { function } => {
                    let f = kb.function_by_name(function).ok_or_else(|| format!("unknown function {function}"))?;
                    kb.remove_objective(f.objective()).map_err(|e| e.to_string())?;
                    if let Some(node) = node_for_function(function) {
                        retire.borrow_mut().push(node);
                    }
                    Ok(())
                }
            }
        })?;

        Ok(Self {
            port,
            kb,
            inbox,
            retired,
            period_steps: period_steps.max(1),
            snapshots: snapshot_kb.then(Vec::new),
            malformed: 0,
        })
    }

    pub fn kb(&self) -> std::cell::Ref<'_, KnowledgeBase<S>> {
        self.kb.borrow()
    }

    /// Diagnostic values that could not be parsed so far.
    pub fn malformed(&self) -> usize {
        self.malformed
    }

    fn monitor(&mut self) {
        let inbox = std::mem::take(&mut *self.inbox.borrow_mut());
        self.malformed += inbox.malformed;
        let mut kb = self.kb.borrow_mut();
        if let Some((v, stamp)) = inbox.water_visibility {
            if let Err(e) = kb.update_measured_qa(Qa::WaterVisibility, S::lit(v), S::lit(stamp)) {
                log::error!("water visibility rejected: {e}");
                self.malformed += 1;
            }
        }
        for (name, status) in inbox.components {
            if let Err(e) = kb.update_component_status(&name, status) {
                log::error!("component update rejected: {e}");
                self.malformed += 1;
            }
        }
    }

    fn request(&self, node: &str, mode: &str) -> Result<bool, BusError> {
        let resp = self.port.call_service(
            REQUEST_CONFIGURATION_SERVICE,
            ServiceRequest::RequestConfiguration {
                node: node.to_string(),
                mode: mode.to_string(),
            },
        )?;
        if !resp.success {
            log::warn!("configuration {node}={mode} refused: {}", resp.detail);
        }
        Ok(resp.success)
    }

    /// One full monitor-analyze-plan-execute iteration.
    pub fn cycle(&mut self) -> Result<(), BusError> {
        self.monitor();
        let plan = {
            let mut kb = self.kb.borrow_mut();
            kb.analyze();
            kb.plan()
        };

        let retired = std::mem::take(&mut *self.retired.borrow_mut());
        for node in retired {
            if let Some(mode) = unground_mode(node) {
                self.request(node, mode)?;
            }
        }

        for (objective, design) in plan.iter() {
            let Some(design) = design else {
                log::warn!("no feasible design for {objective}");
                continue;
            };
            let (node, mode) = {
                let kb = self.kb.borrow();
                let function = kb.objective(objective).map(|o| o.of_function);
                let node = function
                    .and_then(|f| kb.function(f))
                    .and_then(|f| node_for_function(&f.name));
                (node, design_mode(design))
            };
            let (Some(node), Some(mode)) = (node, mode) else {
                log::error!("{design} has no realisation");
                continue;
            };
            if self.request(node, mode)? {
                if let Err(e) = self.kb.borrow_mut().apply_grounding(objective, design) {
                    log::error!("grounding {objective} on {design}: {e}");
                }
            }
        }

        if let Some(snaps) = self.snapshots.as_mut() {
            snaps.push(KbSnapshot {
                stamp: self.port.now(),
                kb: self.kb.borrow().snapshot_json(),
            });
        }
        Ok(())
    }
}

impl<S: Scalar> Manager for Metacontrol<S> {
    fn kind(&self) -> ManagerKind {
        ManagerKind::Metacontrol
    }

    fn coordinator_activates_follow(&self) -> bool {
        false
    }

    fn tick(&mut self, step: u64) -> Result<(), BusError> {
        if step.is_multiple_of(self.period_steps) {
            self.cycle()?;
        }
        Ok(())
    }

    fn clients(&self) -> Vec<&'static str> {
        vec![REASONER_CLIENT, BRIDGE_CLIENT]
    }

    fn take_snapshots(&mut self) -> Vec<KbSnapshot> {
        self.snapshots.as_mut().map(std::mem::take).unwrap_or_default()
    }
}
