//! Random reconfiguration: every adaptation period, each node whose
//! function has an active objective is switched to a uniformly drawn mode.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::rc::Rc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{serve_objectives, Manager, ManagerKind};
use crate::bus::{change_mode_service, Bus, BusError, ObjectiveRequest, Port, ServiceRequest};
use crate::managed::{node_for_function, ModeTable, NODES};
use crate::scalar::Scalar;

pub const RANDOM_CLIENT: &str = "random_manager";

/// Stream index of the manager's generator; the world uses stream 0.
const RANDOM_STREAM: u64 = 1;

#[derive(Debug)]
pub struct RandomManager<S: Scalar> {
    port: Port,
    table: ModeTable<S>,
    period_steps: u64,
    exclude: Vec<String>,
    active: Rc<RefCell<BTreeSet<&'static str>>>,
    rng: ChaCha8Rng,
}

impl<S: Scalar> RandomManager<S> {
    pub fn attach(bus: &Rc<Bus>, period_steps: u64, exclude: Vec<String>, seed: u64) -> Result<Self, BusError> {
        let port = bus.port(RANDOM_CLIENT);
        let active = Rc::new(RefCell::new(BTreeSet::new()));
        let sink = Rc::clone(&active);
        serve_objectives(&port, move |req| {
            let mut active = sink.borrow_mut();
            match req {
                ObjectiveRequest::Set { function } => {
                    active.insert(node_for_function(function).expect("checked by serve_objectives"));
                }
                ObjectiveRequest::Remove { function } => {
                    active.remove(node_for_function(function).expect("checked by serve_objectives"));
                }
            }
            Ok(())
        })?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(RANDOM_STREAM);
        Ok(Self {
            port,
            table: ModeTable::new(),
            period_steps: period_steps.max(1),
            exclude,
            active,
            rng,
        })
    }

    /// Nodes currently eligible for reconfiguration, in table order.
    pub fn eligible(&self) -> Vec<&'static str> {
        let active = self.active.borrow();
        NODES
            .into_iter()
            .filter(|n| active.contains(n) && !self.exclude.iter().any(|e| e == n))
            .collect()
    }
}

impl<S: Scalar> Manager for RandomManager<S> {
    fn kind(&self) -> ManagerKind {
        ManagerKind::Random
    }

    fn tick(&mut self, step: u64) -> Result<(), BusError> {
        if !step.is_multiple_of(self.period_steps) {
            return Ok(());
        }
        for node in self.eligible() {
            let modes: Vec<&str> = self.table.modes_of(node).map(|r| r.mode).collect();
            let Some(mode) = modes.choose(&mut self.rng) else {
                continue;
            };
            let resp = self.port.call_service(
                &change_mode_service(node),
                ServiceRequest::ChangeMode {
                    node: node.to_string(),
                    mode: mode.to_string(),
                },
            )?;
            if !resp.success {
                log::warn!("random mode {node}={mode} refused: {}", resp.detail);
            }
        }
        Ok(())
    }

    fn clients(&self) -> Vec<&'static str> {
        vec![RANDOM_CLIENT]
    }
}
